//! Frequency and decay-rate estimates for population time series.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Angular frequency of the dominant spectral peak of a uniformly sampled
/// signal, or `None` if fewer than four samples or no peak exists.
///
/// The mean is removed and a Hann window applied before the transform; the
/// peak position is refined by parabolic interpolation of the log magnitudes.
pub fn dominant_angular_frequency(values: &[f64], dt: f64) -> Option<f64> {
    let n = values.len();
    if n < 4 || !(dt > 0.0) {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos();
            Complex::new((v - mean) * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mag: Vec<f64> = buf.iter().map(|z| z.norm()).collect();
    let half = n / 2;
    let (peak, &peak_mag) = mag[1..half].iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    let peak = peak + 1;
    if peak_mag == 0.0 {
        return None;
    }
    let offset = if peak + 1 < half {
        let (a, b, c) = (mag[peak - 1].ln(), mag[peak].ln(), mag[peak + 1].ln());
        let denom = a - 2.0 * b + c;
        if denom.is_finite() && denom != 0.0 {
            0.5 * (a - c) / denom
        } else {
            0.0
        }
    } else {
        0.0
    };
    Some(2.0 * std::f64::consts::PI * (peak as f64 + offset) / (n as f64 * dt))
}

/// Least-squares slope `b` of `ln|P − ½| ≈ a − b t` over the samples with
/// `floor < |P − ½| < ceiling`. Returns `None` with fewer than three usable points.
pub fn relaxation_rate(times: &[f64], values: &[f64], floor: f64, ceiling: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter_map(|(&t, &p)| {
            let d = (p - 0.5).abs();
            (d > floor && d < ceiling).then(|| (t, d.ln()))
        })
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let m = pts.len() as f64;
    let tx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ty = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - tx) * (p.1 - ty)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(-sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sine_frequency() {
        let dt = 0.05;
        let omega = 1.37;
        let v: Vec<f64> = (0..4000).map(|i| 0.3 + (omega * i as f64 * dt).sin()).collect();
        let got = dominant_angular_frequency(&v, dt).unwrap();
        assert!((got - omega).abs() / omega < 1e-3);
    }

    #[test]
    fn fits_exponential_relaxation() {
        let t: Vec<f64> = (0..200).map(|i| i as f64 * 0.1).collect();
        let p: Vec<f64> = t.iter().map(|&x| 0.5 - 0.2 * (-0.7 * x).exp()).collect();
        let rate = relaxation_rate(&t, &p, 1e-12, 1.0).unwrap();
        assert!((rate - 0.7).abs() < 1e-10);
        assert!(relaxation_rate(&t, &p, 1.0, 2.0).is_none());
    }

    #[test]
    fn degenerate_inputs() {
        assert!(dominant_angular_frequency(&[1.0, 2.0], 0.1).is_none());
        assert!(dominant_angular_frequency(&[1.0; 16], 0.1).is_none());
    }
}
