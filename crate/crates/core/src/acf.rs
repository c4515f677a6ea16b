//! Autocorrelation of the intensity channels and time-delay-signature
//! detection.
//!
//! A residual correlation peak at the feedback delay would hand an
//! eavesdropper the round-trip time, so concealment is checked by scanning
//! the normalized autocorrelation for significant local maxima.

use crate::error::{Error, Result};
use crate::scalar::Real;
use num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

/// Normalized autocorrelation sampled at multiples of `lag_step`.
#[derive(Debug, Clone)]
pub struct AcfCurve<T> {
    /// Lag spacing (ns).
    pub lag_step: T,
    /// `values[j]` is the normalized autocorrelation at lag j·lag_step;
    /// `values[0]` is 1.
    pub values: Vec<T>,
}

impl<T: Real> AcfCurve<T> {
    pub fn max_lag(&self) -> T {
        self.lag_step * T::from_usize(self.values.len() - 1).unwrap()
    }

    /// CSV export: `lag_ns,acf`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "lag_ns,acf")?;
        for (j, v) in self.values.iter().enumerate() {
            let lag = self.lag_step * T::from_usize(j).unwrap();
            writeln!(w, "{:.14e},{:.14e}", lag, v)?;
        }
        Ok(())
    }
}

fn demean<T: Real>(series: &[T]) -> Result<Vec<T>> {
    let n = T::from_usize(series.len()).unwrap();
    let mean = series.iter().copied().sum::<T>() / n;
    let centered: Vec<T> = series.iter().map(|&v| v - mean).collect();
    let var = centered.iter().map(|&v| v * v).sum::<T>();
    if !(var > T::zero()) {
        return Err(Error::ZeroVariance);
    }
    Ok(centered)
}

/// Biased-normalization autocorrelation via the frequency domain
/// (O(n log n)). Matches [`autocorrelation_direct`] to within 1e-10.
pub fn autocorrelation<T: Real>(series: &[T], dt: T, max_lag: T) -> Result<AcfCurve<T>> {
    let lags = lag_count(series.len(), dt, max_lag)?;
    let centered = demean(series)?;
    let n = centered.len();

    let size = (n + lags + 1).next_power_of_two();
    let mut planner = FftPlanner::<T>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);

    let mut buf: Vec<Complex<T>> = centered
        .iter()
        .map(|&v| Complex::new(v, T::zero()))
        .collect();
    buf.resize(size, Complex::new(T::zero(), T::zero()));
    fwd.process(&mut buf);
    for v in buf.iter_mut() {
        *v = Complex::new(v.norm_sqr(), T::zero());
    }
    inv.process(&mut buf);

    let c0 = buf[0].re;
    let values: Vec<T> = buf[..=lags].iter().map(|c| c.re / c0).collect();
    Ok(AcfCurve {
        lag_step: dt,
        values,
    })
}

/// Direct-sum reference implementation (O(n·lags)); the independent oracle
/// for the frequency-domain route.
pub fn autocorrelation_direct<T: Real>(series: &[T], dt: T, max_lag: T) -> Result<AcfCurve<T>> {
    let lags = lag_count(series.len(), dt, max_lag)?;
    let centered = demean(series)?;
    let n = centered.len();
    let c0 = centered.iter().map(|&v| v * v).sum::<T>();
    let mut values = Vec::with_capacity(lags + 1);
    for j in 0..=lags {
        let mut acc = T::zero();
        for t in 0..(n - j) {
            acc += centered[t] * centered[t + j];
        }
        values.push(acc / c0);
    }
    Ok(AcfCurve {
        lag_step: dt,
        values,
    })
}

fn lag_count<T: Real>(len: usize, dt: T, max_lag: T) -> Result<usize> {
    if !(dt > T::zero()) || !(max_lag > T::zero()) {
        return Err(Error::Analysis("dt and max_lag must be > 0".into()));
    }
    let lags = (max_lag / dt).to_f64_lossy().floor() as usize;
    if lags == 0 {
        return Err(Error::Analysis("max_lag shorter than one sample".into()));
    }
    if len < 2 * lags {
        return Err(Error::Analysis(format!(
            "series too short: {len} samples for {lags} lags (need at least 2x)"
        )));
    }
    Ok(lags)
}

#[derive(Debug, Clone, Serialize)]
pub struct Peak<T> {
    pub lag_ns: T,
    pub height: T,
}

/// Outcome of the time-delay-signature scan.
#[derive(Debug, Clone, Serialize)]
pub struct TdReport<T> {
    /// True when no significant peak was found in the scan window.
    pub verdict: bool,
    /// Effective absolute threshold applied to |ACF|.
    pub threshold: T,
    /// Background deviation of |ACF| over the window (top 1% excluded).
    pub sigma: T,
    pub peaks: Vec<Peak<T>>,
}

/// Scans `[scan_min, scan_max]` (ns) for local maxima of |ACF| exceeding
/// `threshold_sigma` background deviations and the absolute floor.
pub fn detect_td_peaks<T: Real>(
    acf: &AcfCurve<T>,
    scan_min: T,
    scan_max: T,
    threshold_sigma: T,
    abs_floor: T,
) -> Result<TdReport<T>> {
    if !(scan_min > T::zero()) || !(scan_max > scan_min) {
        return Err(Error::Analysis(
            "scan window must satisfy 0 < lag_min < lag_max".into(),
        ));
    }
    let step = acf.lag_step;
    let i_min = (scan_min / step).to_f64_lossy().ceil() as usize;
    let i_max = (scan_max / step).to_f64_lossy().floor() as usize;
    if i_max >= acf.values.len() {
        return Err(Error::Analysis(format!(
            "scan window exceeds ACF range ({} > {})",
            scan_max.to_f64_lossy(),
            acf.max_lag().to_f64_lossy()
        )));
    }
    if i_min.max(1) > i_max {
        return Err(Error::Analysis("empty scan window".into()));
    }
    let i_min = i_min.max(1);

    let mut magnitudes: Vec<T> = acf.values[i_min..=i_max].iter().map(|v| v.abs()).collect();
    magnitudes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let drop = ((magnitudes.len() as f64) * 0.01).ceil() as usize;
    let kept = &magnitudes[..magnitudes.len().saturating_sub(drop.max(1))];
    let sigma = std_dev(kept);
    let threshold = (threshold_sigma * sigma).max(abs_floor);

    let mut peaks = Vec::new();
    for i in i_min..=i_max {
        let here = acf.values[i].abs();
        if here <= threshold {
            continue;
        }
        let left = acf.values[i - 1].abs();
        let right = if i + 1 < acf.values.len() {
            acf.values[i + 1].abs()
        } else {
            here
        };
        if here > left && here >= right {
            peaks.push(Peak {
                lag_ns: step * T::from_usize(i).unwrap(),
                height: here,
            });
        }
    }

    Ok(TdReport {
        verdict: peaks.is_empty(),
        threshold,
        sigma,
        peaks,
    })
}

fn std_dev<T: Real>(values: &[T]) -> T {
    if values.len() < 2 {
        return T::zero();
    }
    let n = T::from_usize(values.len()).unwrap();
    let mean = values.iter().copied().sum::<T>() / n;
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
    var.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn white_noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn lag_zero_is_one() {
        let s = white_noise(4096, 3);
        let acf = autocorrelation(&s, 0.5, 100.0).unwrap();
        assert!((acf.values[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sinusoid_acf_peaks_at_period() {
        // Closed form for a sinusoid: ACF(lag) ~ cos(2π·lag/P); at lag = P it
        // returns to ~1 (biased estimator taper is ~lag/n, kept tiny here).
        let period = 1.0;
        let dt = 0.01;
        let n = 400_000;
        let s: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * i as f64 * dt / period).sin())
            .collect();
        let acf = autocorrelation(&s, dt, 2.0).unwrap();
        let j = (period / dt).round() as usize;
        assert!(
            (acf.values[j] - 1.0).abs() < 1e-3,
            "ACF at one period: {}",
            acf.values[j]
        );
    }

    #[test]
    fn white_noise_acf_is_small() {
        let n = 1 << 16;
        let s = white_noise(n, 17);
        let acf = autocorrelation(&s, 1.0, 2000.0).unwrap();
        let bound = 5.0 / (n as f64).sqrt();
        for (j, v) in acf.values.iter().enumerate().skip(1) {
            assert!(v.abs() < bound, "lag {j}: {v} exceeds {bound}");
        }
    }

    #[test]
    fn fft_matches_direct_sum() {
        let s = white_noise(4096, 99);
        let fast = autocorrelation(&s, 1.0, 512.0).unwrap();
        let slow = autocorrelation_direct(&s, 1.0, 512.0).unwrap();
        for (a, b) in fast.values.iter().zip(&slow.values) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_series_is_zero_variance() {
        let s = vec![2.5; 1000];
        assert!(matches!(
            autocorrelation(&s, 1.0, 10.0),
            Err(Error::ZeroVariance)
        ));
    }

    #[test]
    fn max_lag_too_large_errors() {
        let s = white_noise(100, 1);
        assert!(autocorrelation(&s, 1.0, 60.0).is_err());
    }

    #[test]
    fn delayed_feedback_surrogate_peak_detected() {
        // x(t) = 0.9·x(t − 6 ns) + noise on a 0.05 ns grid: the ACF provably
        // peaks at the delay.
        let dt = 0.05;
        let delay_steps = (6.0 / dt) as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200_000;
        let mut x = vec![0.0f64; n];
        for i in 0..n {
            let past = if i >= delay_steps { x[i - delay_steps] } else { 0.0 };
            x[i] = 0.9 * past + rng.gen_range(-1.0f64..1.0);
        }
        let acf = autocorrelation(&x[delay_steps * 4..], dt, 10.0).unwrap();
        let report = detect_td_peaks(&acf, 0.5, 10.0, 5.0, 0.05).unwrap();
        assert!(!report.verdict, "surrogate delay must be detected");
        let hit = report
            .peaks
            .iter()
            .any(|p| (p.lag_ns - 6.0).abs() < 0.2 && p.height > 0.5);
        assert!(hit, "expected a peak near 6 ns, got {:?}", report.peaks);
    }

    #[test]
    fn white_noise_is_concealed() {
        let s = white_noise(1 << 16, 21);
        let acf = autocorrelation(&s, 0.05, 40.0).unwrap();
        let report = detect_td_peaks(&acf, 0.5, 30.0, 5.0, 0.05).unwrap();
        assert!(report.verdict, "unexpected peaks: {:?}", report.peaks);
    }

    #[test]
    fn empty_window_errors() {
        let s = white_noise(4096, 5);
        let acf = autocorrelation(&s, 1.0, 100.0).unwrap();
        assert!(detect_td_peaks(&acf, 5.0, 4.0, 5.0, 0.05).is_err());
        assert!(detect_td_peaks(&acf, 90.0, 2000.0, 5.0, 0.05).is_err());
    }
}
