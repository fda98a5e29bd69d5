//! Adaptive Dormand–Prince 5(4) integration of linear complex systems
//! `dy/dx = A(x) y`, with dense output at requested abscissae.
//!
//! Because the system is linear and homogeneous, the state may be rescaled
//! by any factor mid-flight. The integrator uses this to keep the stored
//! state within `[NORM_FLOOR, NORM_CEIL]` and reports the accumulated power
//! of two with each sample.

use crate::operator::C64;

pub const NORM_FLOOR: f64 = 1e-150;
pub const NORM_CEIL: f64 = 1e150;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    /// Absolute tolerance relative to the current state norm, so that the
    /// error control is invariant under the rescaling described above.
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_steps: 50_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OdeError {
    #[error("step size underflow at x = {x} (h = {h:e})")]
    StepUnderflow { x: f64, h: f64 },
    #[error("step budget of {max_steps} exhausted at x = {x}")]
    TooManySteps { x: f64, max_steps: usize },
    #[error("non-finite state at x = {x}")]
    NonFinite { x: f64 },
    #[error("sample abscissae must be non-decreasing and finite")]
    BadSamples,
}

/// State at one sample: amplitudes scaled by `2^{-log2_scale}`.
#[derive(Clone, Debug, PartialEq)]
pub struct OdeSample {
    pub x: f64,
    pub y: Vec<C64>,
    pub log2_scale: i64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

fn norm(y: &[C64]) -> f64 {
    y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy_into(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for i in 0..out.len() {
        let mut acc = C64::new(0.0, 0.0);
        for &(coef, k) in terms {
            if coef != 0.0 {
                acc += k[i] * coef;
            }
        }
        out[i] = y[i] + acc * h;
    }
}

/// Integrates `y' = rhs(x, y)` from `samples[0]` and returns the solution at
/// every entry of `samples`.
pub fn integrate_linear<F>(
    mut rhs: F,
    y0: &[C64],
    samples: &[f64],
    opts: &OdeOptions,
) -> Result<(Vec<OdeSample>, OdeStats), OdeError>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    if samples.is_empty() {
        return Ok((Vec::new(), OdeStats::default()));
    }
    if samples.iter().any(|x| !x.is_finite()) || samples.windows(2).any(|w| w[1] < w[0]) {
        return Err(OdeError::BadSamples);
    }
    let n = y0.len();
    let x_end = *samples.last().unwrap();
    let mut x = samples[0];
    let mut y = y0.to_vec();
    let mut log2_scale: i64 = 0;
    let mut out = Vec::with_capacity(samples.len());
    let mut stats = OdeStats::default();
    let mut next = 0;
    while next < samples.len() && samples[next] == x {
        out.push(OdeSample { x, y: y.clone(), log2_scale });
        next += 1;
    }
    if next == samples.len() {
        return Ok((out, stats));
    }

    let zero = C64::new(0.0, 0.0);
    let mut k1 = vec![zero; n];
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let mut k5 = vec![zero; n];
    let mut k6 = vec![zero; n];
    let mut k7 = vec![zero; n];
    let mut tmp = vec![zero; n];
    let mut y1 = vec![zero; n];

    rhs(x, &y, &mut k1);
    let mut h = initial_step(&mut rhs, x, &y, &k1, x_end - x, opts);
    let mut last_rejected = false;

    while next < samples.len() {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(OdeError::TooManySteps { x, max_steps: opts.max_steps });
        }
        let remaining = x_end - x;
        if h >= remaining {
            h = remaining;
        }
        if h <= 16.0 * f64::EPSILON * x.abs().max(1e-300) {
            return Err(OdeError::StepUnderflow { x, h });
        }

        axpy_into(&mut tmp, &y, h, &[(A21, &k1)]);
        rhs(x + C2 * h, &tmp, &mut k2);
        axpy_into(&mut tmp, &y, h, &[(A31, &k1), (A32, &k2)]);
        rhs(x + C3 * h, &tmp, &mut k3);
        axpy_into(&mut tmp, &y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        rhs(x + C4 * h, &tmp, &mut k4);
        axpy_into(&mut tmp, &y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        rhs(x + C5 * h, &tmp, &mut k5);
        axpy_into(&mut tmp, &y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        let x_new = if h == remaining { x_end } else { x + h };
        rhs(x_new, &tmp, &mut k6);
        axpy_into(&mut y1, &y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        rhs(x_new, &y1, &mut k7);

        let state_scale = norm(&y).max(norm(&y1));
        let mut err_sq = 0.0;
        for i in 0..n {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let sc = opts.atol * state_scale + opts.rtol * y[i].norm().max(y1[i].norm());
            err_sq += if sc > 0.0 { (e.norm() / sc).powi(2) } else { 0.0 };
        }
        let err = (err_sq / n as f64).sqrt();
        if !err.is_finite() || y1.iter().any(|z| !z.is_finite()) {
            if y.iter().any(|z| !z.is_finite()) {
                return Err(OdeError::NonFinite { x });
            }
            stats.rejected += 1;
            h *= 0.2;
            last_rejected = true;
            continue;
        }

        if err <= 1.0 {
            stats.accepted += 1;
            // Dense output for every sample inside (x, x_new].
            if next < samples.len() && samples[next] <= x_new {
                let mut r5 = vec![zero; n];
                for i in 0..n {
                    r5[i] = (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7) * h;
                }
                while next < samples.len() && samples[next] <= x_new {
                    let xs = samples[next];
                    let state = if xs == x_new {
                        y1.clone()
                    } else {
                        let theta = (xs - x) / h;
                        let theta1 = 1.0 - theta;
                        (0..n)
                            .map(|i| {
                                let r2 = y1[i] - y[i];
                                let r3 = k1[i] * h - r2;
                                let r4 = r2 - k7[i] * h - r3;
                                y[i] + (r2 + (r3 + (r4 + r5[i] * theta1) * theta) * theta1) * theta
                            })
                            .collect()
                    };
                    out.push(OdeSample { x: xs, y: state, log2_scale });
                    next += 1;
                }
            }
            x = x_new;
            std::mem::swap(&mut y, &mut y1);
            std::mem::swap(&mut k1, &mut k7);

            let nrm = norm(&y);
            if nrm > 0.0 && !(NORM_FLOOR..=NORM_CEIL).contains(&nrm) {
                let e = nrm.log2().round() as i32;
                let f = 2f64.powi(-e);
                for v in y.iter_mut().chain(k1.iter_mut()) {
                    *v *= f;
                }
                log2_scale += e as i64;
            }

            let mut factor = if err == 0.0 { 5.0 } else { 0.9 * err.powf(-0.2) };
            factor = factor.clamp(0.2, 5.0);
            if last_rejected {
                factor = factor.min(1.0);
            }
            h *= factor;
            last_rejected = false;
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            last_rejected = true;
        }
    }
    Ok((out, stats))
}

fn initial_step<F>(rhs: &mut F, x: f64, y: &[C64], f0: &[C64], span: f64, opts: &OdeOptions) -> f64
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let n = y.len();
    let ynorm = norm(y);
    let sc: Vec<f64> = y.iter().map(|z| opts.atol * ynorm + opts.rtol * z.norm()).collect();
    let weighted = |v: &[C64]| {
        (v.iter().zip(&sc).map(|(z, s)| if *s > 0.0 { (z.norm() / s).powi(2) } else { 0.0 }).sum::<f64>()
            / n as f64)
            .sqrt()
    };
    let d0 = weighted(y);
    let d1 = weighted(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(span);
    let y1: Vec<C64> = y.iter().zip(f0).map(|(a, b)| a + b * h0).collect();
    let mut f1 = vec![C64::new(0.0, 0.0); n];
    rhs(x + h0, &y1, &mut f1);
    let diff: Vec<C64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = weighted(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}
