//! Matrix exponential by scaling and squaring with a degree-13 Padé approximant.

use nalgebra::DMatrix;

use crate::operator::C64;

/// Padé [13/13] numerator coefficients.
const B: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the degree-13 approximant needs no scaling.
const THETA_13: f64 = 5.371920351148152;

/// Relative residual accepted by [`expm_checked`].
pub const TAU_EXP: f64 = 1e-11;

fn norm_one(a: &DMatrix<C64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn max_abs(a: &DMatrix<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `e^A`. Returns `None` if the Padé denominator is singular or the input is not finite.
pub fn expm(a: &DMatrix<C64>) -> Option<DMatrix<C64>> {
    let n = a.nrows();
    if a.iter().any(|z| !z.is_finite()) {
        return None;
    }
    let norm = norm_one(a);
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * C64::new(2f64.powi(-squarings), 0.0);
    let id = DMatrix::<C64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |k: usize| C64::new(B[k], 0.0);

    let inner_u = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9));
    let u = &a * (inner_u + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1));
    let inner_v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8));
    let v = inner_v + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);

    let mut r = (&v - &u).lu().solve(&(&v + &u))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if r.iter().all(|z| z.is_finite()) {
        Some(r)
    } else {
        None
    }
}

/// `e^A` together with the relative self-consistency residual
/// `‖e^{A/2}·e^{A/2} − e^A‖ / max(1, ‖e^A‖)`.
pub fn expm_with_residual(a: &DMatrix<C64>) -> Option<(DMatrix<C64>, f64)> {
    let full = expm(a)?;
    let half = expm(&(a * C64::new(0.5, 0.0)))?;
    let diff = &half * &half - &full;
    let residual = max_abs(&diff) / max_abs(&full).max(1.0);
    Some((full, residual))
}

/// `e^A`, or `None` if it cannot be computed to [`TAU_EXP`].
pub fn expm_checked(a: &DMatrix<C64>) -> Option<DMatrix<C64>> {
    match expm_with_residual(a) {
        Some((m, res)) if res < TAU_EXP => Some(m),
        _ => None,
    }
}
