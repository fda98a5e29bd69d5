//! Small dense non-Hermitian eigensolver.
//!
//! Characteristic polynomial by the Faddeev–LeVerrier trace recursion, roots
//! by Aberth–Ehrlich simultaneous iteration, a Newton polish, and eigenvectors
//! by inverse iteration.

use nalgebra::{DMatrix, DVector};

use crate::operator::C64;

const EPS: f64 = f64::EPSILON;
const MAX_ABERTH_ITERS: usize = 800;

/// Coefficients of `det(zI − A)`, lowest degree first; the last is 1.
pub fn characteristic_polynomial(a: &DMatrix<C64>) -> Vec<C64> {
    let n = a.nrows();
    let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
    coeffs[n] = C64::new(1.0, 0.0);
    let id = DMatrix::<C64>::identity(n, n);
    let mut m = DMatrix::<C64>::zeros(n, n);
    for k in 1..=n {
        m = a * &m + &id * coeffs[n - k + 1];
        let am = a * &m;
        coeffs[n - k] = -am.trace() / (k as f64);
    }
    coeffs
}

/// `(p(z), p'(z), Σ|c_k||z|^k)`; the last term bounds the rounding error of `p(z)`.
pub(crate) fn horner(coeffs: &[C64], z: C64) -> (C64, C64, f64) {
    horner_with_floor(coeffs, z, 0.0)
}

/// As [`horner`], with `|z|` clamped below by `floor` in the error bound so
/// that multiple roots at the origin can still meet the stopping criterion.
fn horner_with_floor(coeffs: &[C64], z: C64, floor: f64) -> (C64, C64, f64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    let mut bound = 0.0;
    let az = z.norm().max(floor);
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
        bound = bound * az + c.norm();
    }
    (p, dp, bound)
}

#[derive(Debug)]
pub(crate) struct RootsDidNotConverge;

/// All roots of the monic polynomial `coeffs` (lowest degree first).
pub(crate) fn polynomial_roots(coeffs: &[C64]) -> Result<Vec<C64>, RootsDidNotConverge> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    // Fujiwara-type radius for the starting circle.
    let radius = (0..n)
        .map(|k| (coeffs[k].norm() / coeffs[n].norm()).powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max);
    if radius == 0.0 {
        return Ok(vec![C64::new(0.0, 0.0); n]);
    }
    let center = -coeffs[n - 1] / (n as f64 * coeffs[n]);
    let mut z: Vec<C64> = (0..n)
        .map(|j| {
            let angle = 2.0 * std::f64::consts::PI * j as f64 / n as f64 + 0.4;
            center + C64::from_polar(radius, angle)
        })
        .collect();

    let floor = EPS * radius;
    let mut converged = vec![false; n];
    for _ in 0..MAX_ABERTH_ITERS {
        let mut all_done = true;
        for j in 0..n {
            if converged[j] {
                continue;
            }
            let (p, dp, bound) = horner_with_floor(coeffs, z[j], floor);
            if p.norm() <= 8.0 * EPS * bound {
                converged[j] = true;
                continue;
            }
            all_done = false;
            if dp.norm() == 0.0 {
                let nudge = 1e-8 * (1.0 + z[j].norm());
                z[j] += C64::new(nudge, 1e-8);
                continue;
            }
            let ratio = p / dp;
            let repulsion: C64 = (0..n).filter(|&i| i != j).map(|i| (z[j] - z[i]).inv()).sum();
            let step = ratio / (C64::new(1.0, 0.0) - ratio * repulsion);
            z[j] -= step;
            if step.norm() <= EPS * z[j].norm() {
                converged[j] = true;
            }
        }
        if all_done {
            break;
        }
    }
    for root in z.iter_mut() {
        polish(coeffs, root);
    }
    let ok = z.iter().all(|&r| {
        let (p, _, bound) = horner_with_floor(coeffs, r, floor);
        p.norm() <= 1e4 * EPS * bound
    });
    if ok {
        Ok(z)
    } else {
        Err(RootsDidNotConverge)
    }
}

fn polish(coeffs: &[C64], root: &mut C64) {
    for _ in 0..3 {
        let (p, dp, _) = horner(coeffs, *root);
        if p.norm() == 0.0 || dp.norm() == 0.0 {
            return;
        }
        let candidate = *root - p / dp;
        if horner(coeffs, candidate).0.norm() < p.norm() {
            *root = candidate;
        } else {
            return;
        }
    }
}

/// For a real polynomial, snaps roots onto an exactly conjugation-closed set:
/// each root either becomes real or is averaged with its nearest conjugate
/// partner.
pub(crate) fn symmetrize_conjugates(roots: &mut [C64]) {
    let n = roots.len();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        used[i] = true;
        let target = roots[i].conj();
        let self_dist = 2.0 * roots[i].im.abs();
        let partner = (0..n)
            .filter(|&j| !used[j])
            .map(|j| (j, (roots[j] - target).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match partner {
            Some((j, dist)) if dist < self_dist => {
                let mid = (roots[i] + roots[j].conj()) * 0.5;
                roots[i] = mid;
                roots[j] = mid.conj();
                used[j] = true;
            }
            _ => roots[i] = C64::new(roots[i].re, 0.0),
        }
    }
}

/// Right eigenvector for an (approximate) eigenvalue by inverse iteration.
pub fn eigenvector(a: &DMatrix<C64>, eigenvalue: C64) -> DVector<C64> {
    let n = a.nrows();
    let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut x = DVector::from_fn(n, |i, _| C64::new(1.0 + 0.1 * i as f64, 0.05 * i as f64));
    let mut shift_size = 1e-10 * scale;
    for _ in 0..6 {
        let shifted = a - DMatrix::<C64>::identity(n, n) * (eigenvalue + C64::new(shift_size, shift_size));
        let lu = shifted.lu();
        let mut ok = true;
        for _ in 0..4 {
            match lu.solve(&x) {
                Some(y) if y.iter().all(|z| z.is_finite()) => {
                    let norm = y.norm();
                    x = y / C64::new(norm, 0.0);
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            break;
        }
        shift_size *= 100.0;
    }
    x
}
