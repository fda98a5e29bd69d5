//! Assignment of eigenvalues to continuous branches between grid points.

use crate::operator::C64;

/// Relative cost margin below which a pairwise branch swap counts as ambiguous.
pub const TAU_MATCH: f64 = 1e-3;

/// Brute force is used up to this dimension, Hungarian above it.
const BRUTE_FORCE_MAX: usize = 6;

/// Returns `perm` such that branch `j` continues with `candidates[perm[j]]`,
/// minimising `Σ_j |reference_j − candidates[perm[j]]|²`. Exact ties go to the
/// first permutation in lexicographic order.
pub fn assign(reference: &[C64], candidates: &[C64]) -> Vec<usize> {
    assert_eq!(reference.len(), candidates.len());
    let n = reference.len();
    let cost: Vec<Vec<f64>> = reference
        .iter()
        .map(|r| candidates.iter().map(|c| (r - c).norm_sqr()).collect())
        .collect();
    if n <= BRUTE_FORCE_MAX {
        brute_force(&cost)
    } else {
        hungarian(&cost)
    }
}

fn brute_force(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let total = |p: &[usize]| p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum::<f64>();
    let mut best = perm.clone();
    let mut best_cost = total(&perm);
    while next_permutation(&mut perm) {
        let c = total(&perm);
        if c < best_cost {
            best_cost = c;
            best.copy_from_slice(&perm);
        }
    }
    best
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// O(n³) Hungarian algorithm on a square cost matrix (potentials form).
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=n {
        out[p[j] - 1] = j - 1;
    }
    out
}

/// Looks for a pair of branches whose swap costs almost nothing yet changes
/// the real parts of both curves. Swaps between coincident references, or
/// that only exchange imaginary parts (conjugate pairs at an exceptional
/// point), are immaterial and not reported.
pub fn find_ambiguity(reference: &[C64], assigned: &[C64], scale: f64) -> Option<(usize, usize)> {
    let tiny = 1e-9 * scale.max(1.0);
    let n = reference.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let ab = reference[i] - reference[j];
            let xy = assigned[i] - assigned[j];
            if ab.re.abs() <= tiny || xy.re.abs() <= tiny {
                continue;
            }
            let swap_penalty = 2.0 * (ab * xy.conj()).re;
            if swap_penalty <= TAU_MATCH * ab.norm() * xy.norm() {
                return Some((i, j));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn follows_nearest_neighbours() {
        let reference = [r(0.0), r(1.0), r(2.0)];
        let candidates = [r(2.1), r(-0.1), r(0.9)];
        assert_eq!(assign(&reference, &candidates), vec![1, 2, 0]);
    }

    #[test]
    fn hungarian_matches_brute_force() {
        // Pseudo-random but fixed 7x7 instance compared against the brute force.
        let vals: Vec<f64> = (0..49).map(|k| ((k * 37 % 101) as f64 * 0.173).sin()).collect();
        let cost: Vec<Vec<f64>> = (0..7).map(|i| vals[i * 7..i * 7 + 7].to_vec()).collect();
        let total = |p: &[usize]| p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum::<f64>();
        let h = hungarian(&cost);
        let b = brute_force(&cost);
        assert!((total(&h) - total(&b)).abs() < 1e-12);
    }

    #[test]
    fn ties_keep_identity() {
        let reference = [r(0.0), r(0.0)];
        let candidates = [r(-0.1), r(0.1)];
        assert_eq!(assign(&reference, &candidates), vec![0, 1]);
    }

    #[test]
    fn conjugate_split_is_not_ambiguous() {
        let reference = [r(-0.41), r(-0.40)];
        let assigned = [C64::new(-0.405, 0.01), C64::new(-0.405, -0.01)];
        assert_eq!(find_ambiguity(&reference, &assigned, 1.0), None);
    }

    #[test]
    fn orthogonal_real_swap_is_ambiguous() {
        let reference = [C64::new(0.0, 1.0), C64::new(1.0, -1.0)];
        let assigned = [C64::new(0.0, 0.0), C64::new(1.0, 1.0)];
        // Both real parts differ, and the swap costs exactly zero.
        assert_eq!(find_ambiguity(&reference, &assigned, 1.0), Some((0, 1)));
    }
}
