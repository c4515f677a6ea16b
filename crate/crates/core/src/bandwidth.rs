//! Chaos-bandwidth estimation from averaged periodograms.
//!
//! The bandwidth feeds the extraction-timing constraint report: the latch
//! stagger must not undercut the signal's decorrelation scale.

use crate::error::{Error, Result};
use crate::scalar::Real;
use num_complex::Complex;
use rustfft::FftPlanner;

/// One-sided averaged periodogram.
#[derive(Debug, Clone)]
pub struct WelchSpectrum<T> {
    /// Frequency bin spacing (GHz when dt is in ns).
    pub df: T,
    /// Power at bins 0..len (DC first); arbitrary units.
    pub psd: Vec<T>,
}

const SEGMENTS: usize = 8;

/// Welch estimate with 8 segments, 50% overlap, Hann window.
pub fn welch_spectrum<T: Real>(series: &[T], dt: T) -> Result<WelchSpectrum<T>> {
    if series.len() < (1 << 14) {
        return Err(Error::Analysis(format!(
            "bandwidth estimate needs at least 2^14 samples, got {}",
            series.len()
        )));
    }
    // 8 segments at 50% overlap span 4.5 segment lengths.
    let seg = ((series.len() as f64 / 4.5).floor() as usize) & !1;
    let step = seg / 2;

    let n = T::from_usize(series.len()).unwrap();
    let mean = series.iter().copied().sum::<T>() / n;
    let var = series
        .iter()
        .map(|&v| (v - mean) * (v - mean))
        .sum::<T>();
    if !(var > T::zero()) {
        return Err(Error::ZeroVariance);
    }

    let window: Vec<T> = (0..seg)
        .map(|i| {
            let x = T::from_usize(i).unwrap() / T::from_usize(seg - 1).unwrap();
            T::from_f64_lossy(0.5) * (T::one() - (T::TAU() * x).cos())
        })
        .collect();

    let mut planner = FftPlanner::<T>::new();
    let fft = planner.plan_fft_forward(seg);
    let half = seg / 2;
    let mut psd = vec![T::zero(); half + 1];
    let mut buf = vec![Complex::new(T::zero(), T::zero()); seg];
    for s in 0..SEGMENTS {
        let start = s * step;
        for (i, slot) in buf.iter_mut().enumerate() {
            *slot = Complex::new((series[start + i] - mean) * window[i], T::zero());
        }
        fft.process(&mut buf);
        for (k, acc) in psd.iter_mut().enumerate() {
            *acc += buf[k].norm_sqr();
        }
    }

    Ok(WelchSpectrum {
        df: (T::from_usize(seg).unwrap() * dt).recip(),
        psd,
    })
}

/// Smallest frequency containing 80% of the AC power (DC bin excluded).
/// Returns GHz when `dt` is in ns.
pub fn estimate_bandwidth<T: Real>(series: &[T], dt: T) -> Result<T> {
    let spectrum = welch_spectrum(series, dt)?;
    Ok(energy_bandwidth(&spectrum, T::from_f64_lossy(0.8)))
}

/// Frequency below which `fraction` of the AC power lies.
pub fn energy_bandwidth<T: Real>(spectrum: &WelchSpectrum<T>, fraction: T) -> T {
    let total: T = spectrum.psd[1..].iter().copied().sum();
    let target = total * fraction;
    let mut cum = T::zero();
    for (k, &p) in spectrum.psd.iter().enumerate().skip(1) {
        cum += p;
        if cum >= target {
            return spectrum.df * T::from_usize(k).unwrap();
        }
    }
    spectrum.df * T::from_usize(spectrum.psd.len() - 1).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sinusoid_bandwidth_is_its_frequency() {
        let dt = 0.01; // ns -> Nyquist 50 GHz
        let f0 = 12.0; // GHz
        let n = 1 << 15;
        let s: Vec<f64> = (0..n)
            .map(|i| (std::f64::consts::TAU * f0 * i as f64 * dt).sin())
            .collect();
        let bw = estimate_bandwidth(&s, dt).unwrap();
        let spectrum = welch_spectrum(&s, dt).unwrap();
        assert!(
            (bw - f0).abs() <= spectrum.df,
            "bw {bw} vs f0 {f0} (df {})",
            spectrum.df
        );
    }

    #[test]
    fn white_noise_bandwidth_is_80_percent_of_nyquist() {
        let dt = 0.02;
        let nyquist = 0.5 / dt;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s: Vec<f64> = (0..(1 << 16)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let bw = estimate_bandwidth(&s, dt).unwrap();
        assert!(
            (bw - 0.8 * nyquist).abs() < 0.05 * (0.8 * nyquist),
            "bw {bw} vs {}",
            0.8 * nyquist
        );
    }

    #[test]
    fn short_series_rejected() {
        let s = vec![0.0f64; 100];
        assert!(estimate_bandwidth(&s, 0.01).is_err());
    }

    #[test]
    fn constant_series_rejected() {
        let s = vec![1.0f64; 1 << 14];
        assert!(matches!(
            estimate_bandwidth(&s, 0.01),
            Err(Error::ZeroVariance)
        ));
    }
}
