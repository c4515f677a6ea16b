//! Physical parameters of the dual-channel VCSEL chaos source.
//!
//! Rates are per nanosecond, delays in nanoseconds, angles in radians.
//! `omega0` is the solitary-laser center angular frequency in rad/s; it only
//! enters through the constant feedback phase `omega0 * tau_o`.

use crate::error::{Error, Result};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VcselParams<T> {
    /// Cavity decay rate (ns⁻¹).
    pub k: T,
    /// Linewidth enhancement factor.
    pub alpha: T,
    /// Decay rate of the total carrier population (ns⁻¹).
    pub g_n: T,
    /// Dichroism (ns⁻¹).
    pub g_a: T,
    /// Birefringence (ns⁻¹).
    pub g_p: T,
    /// Spin-flip rate (ns⁻¹).
    pub g_s: T,
    /// Spontaneous-emission factor (ns⁻¹).
    pub beta_sp: T,
    /// Normalized injection current, threshold at 1.
    pub mu: T,
    /// Center angular frequency of the solitary laser (rad/s).
    pub omega0: T,
    /// Feedback strength of the x-polarized mode (ns⁻¹).
    pub g1: T,
    /// Feedback strength of the y-polarized mode (ns⁻¹).
    pub g2: T,
    /// Polarizer angle seen by the optical feedback path (rad).
    pub theta_p1: T,
    /// Waveplate angle of the phase-modulated arm (rad).
    pub theta_p2: T,
    /// Laser-to-splitter delay (ns).
    pub tau_o1: T,
    /// Splitter-to-mirror delay (ns).
    pub tau_o2: T,
    /// Electronic delay of the electro-optic feedback (ns).
    pub tau_e: T,
    /// Include spontaneous-emission noise (Euler–Maruyama stepping).
    pub noise_enabled: bool,
}

impl<T: Real> VcselParams<T> {
    /// Full optical roundtrip delay, 2·(tau_o1 + tau_o2).
    pub fn tau_o(&self) -> T {
        let two = T::from_f64_lossy(2.0);
        two * (self.tau_o1 + self.tau_o2)
    }

    /// Total delay of the electro-optic phase signal, tau_e + 2·tau_o1 + tau_o2.
    pub fn phase_delay(&self) -> T {
        let two = T::from_f64_lossy(2.0);
        self.tau_e + two * self.tau_o1 + self.tau_o2
    }

    /// Constant feedback phase omega0·tau_o (radians; omega0 is in rad/s,
    /// delays in ns).
    pub fn feedback_phase(&self) -> T {
        self.omega0 * self.tau_o() * T::from_f64_lossy(1e-9)
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg: [(&str, T); 9] = [
            ("vcsel.k", self.k),
            ("vcsel.g_n", self.g_n),
            ("vcsel.g_a", self.g_a),
            ("vcsel.g_p", self.g_p),
            ("vcsel.g_s", self.g_s),
            ("vcsel.beta_sp", self.beta_sp),
            ("vcsel.mu", self.mu),
            ("vcsel.g1", self.g1),
            ("vcsel.g2", self.g2),
        ];
        for (name, v) in nonneg {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::config(name, "must be finite and >= 0"));
            }
        }
        let positive: [(&str, T); 3] = [
            ("vcsel.tau_o1", self.tau_o1),
            ("vcsel.tau_o2", self.tau_o2),
            ("vcsel.tau_e", self.tau_e),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::config(name, "must be finite and > 0"));
            }
        }
        if !self.omega0.is_finite() {
            return Err(Error::config("vcsel.omega0", "must be finite"));
        }
        Ok(())
    }

    /// Operating point used throughout: strong pumping, polarization-rotated
    /// feedback at 15 ns⁻¹, 6 ns optical roundtrip, 23.25 ns electronic delay.
    pub fn operating_point() -> Self {
        let deg_22_5 = T::from_f64_lossy(22.5f64.to_radians());
        VcselParams {
            k: T::from_f64_lossy(300.0),
            alpha: T::from_f64_lossy(4.0),
            g_n: T::from_f64_lossy(1.0),
            g_a: T::from_f64_lossy(0.5),
            g_p: T::from_f64_lossy(30.0),
            g_s: T::from_f64_lossy(50.0),
            beta_sp: T::from_f64_lossy(1e-6),
            mu: T::from_f64_lossy(4.5),
            omega0: T::from_f64_lossy(2.2176e15),
            g1: T::from_f64_lossy(15.0),
            g2: T::from_f64_lossy(15.0),
            theta_p1: deg_22_5,
            theta_p2: deg_22_5,
            tau_o1: T::from_f64_lossy(1.5),
            tau_o2: T::from_f64_lossy(1.5),
            tau_e: T::from_f64_lossy(23.25),
            noise_enabled: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_delay_is_derived() {
        let p = VcselParams::<f64>::operating_point();
        assert_eq!(p.tau_o(), 6.0);
        assert_eq!(p.phase_delay(), 23.25 + 3.0 + 1.5);
    }

    #[test]
    fn operating_point_validates() {
        VcselParams::<f64>::operating_point().validate().unwrap();
    }

    #[test]
    fn negative_rate_rejected() {
        let mut p = VcselParams::<f64>::operating_point();
        p.g_s = -1.0;
        let err = p.validate().unwrap_err();
        assert!(err.to_string().contains("g_s"));
    }

    #[test]
    fn zero_delay_rejected() {
        let mut p = VcselParams::<f64>::operating_point();
        p.tau_e = 0.0;
        assert!(p.validate().is_err());
    }
}
