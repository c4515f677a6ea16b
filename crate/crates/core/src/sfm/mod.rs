//! Spin-flip VCSEL model with polarization-rotated optical feedback and
//! delayed electro-optic phase modulation.
//!
//! State: two complex slowly-varying field amplitudes (x/y linear
//! polarizations), the total carrier inversion N and the spin population
//! difference n. The feedback couples each mode to the delayed, rotated
//! field, with a phase factor driven by the delayed projection signal
//! φ = |E_y·sin(2θ_p1) − E_x·cos(2θ_p1)|².

mod history;
mod integrator;

pub use history::HistoryBuffer;
pub use integrator::{integrate, IntegrationConfig, Integrator, StepSample};

use crate::error::{Error, Result};
use crate::params::VcselParams;
use crate::scalar::Real;
use num_complex::Complex;

/// Instantaneous dynamical state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimState<T> {
    pub e_x: Complex<T>,
    pub e_y: Complex<T>,
    /// Total carrier inversion.
    pub n_carrier: T,
    /// Spin population difference.
    pub n_spin: T,
    /// Simulation time (ns).
    pub t: T,
}

impl<T: Real> SimState<T> {
    /// Off state: zero fields, carriers at the pump level.
    pub fn off(params: &VcselParams<T>) -> Self {
        SimState {
            e_x: Complex::new(T::zero(), T::zero()),
            e_y: Complex::new(T::zero(), T::zero()),
            n_carrier: params.mu,
            n_spin: T::zero(),
            t: T::zero(),
        }
    }

    /// Default seed state: small equal fields, carriers at the pump level.
    pub fn seed(params: &VcselParams<T>) -> Self {
        let amp = T::from_f64_lossy(1e-3);
        SimState {
            e_x: Complex::new(amp, amp),
            e_y: Complex::new(amp, amp),
            n_carrier: params.mu,
            n_spin: T::zero(),
            t: T::zero(),
        }
    }

    /// Multiplies every real component by (1 + rel·u), u ~ U(-1, 1) from the
    /// given RNG. Used to break the exact x/y symmetry of the seed state
    /// reproducibly.
    pub fn perturbed<R: rand::Rng>(mut self, rel: T, rng: &mut R) -> Self {
        let mut jig = |v: &mut T| {
            let u = T::from_f64_lossy(rng.gen_range(-1.0..1.0));
            *v = *v * (T::one() + rel * u);
        };
        jig(&mut self.e_x.re);
        jig(&mut self.e_x.im);
        jig(&mut self.e_y.re);
        jig(&mut self.e_y.im);
        jig(&mut self.n_carrier);
        jig(&mut self.n_spin);
        self
    }

    pub fn is_finite(&self) -> bool {
        self.e_x.re.is_finite()
            && self.e_x.im.is_finite()
            && self.e_y.re.is_finite()
            && self.e_y.im.is_finite()
            && self.n_carrier.is_finite()
            && self.n_spin.is_finite()
    }
}

/// Delayed inputs to the right-hand side: fields one optical roundtrip ago
/// and the projection signal one electro-optic loop ago.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delayed<T> {
    pub e_x: Complex<T>,
    pub e_y: Complex<T>,
    pub phi: T,
}

/// Time derivative of the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deriv<T> {
    pub e_x: Complex<T>,
    pub e_y: Complex<T>,
    pub n_carrier: T,
    pub n_spin: T,
}

impl<T: Real> Deriv<T> {
    pub fn max_norm(&self) -> T {
        self.e_x
            .norm()
            .max(self.e_y.norm())
            .max(self.n_carrier.abs())
            .max(self.n_spin.abs())
    }
}

/// Projection signal fed to the phase modulator:
/// φ = |E_y·sin(2θ_p1) − E_x·cos(2θ_p1)|².
pub fn phase_signal<T: Real>(e_x: Complex<T>, e_y: Complex<T>, theta_p1: T) -> T {
    let two = T::from_f64_lossy(2.0);
    let (s, c) = ((two * theta_p1).sin(), (two * theta_p1).cos());
    (e_y * s - e_x * c).norm_sqr()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    X,
    Y,
}

/// Precomputed per-parameter constants for the right-hand side. Building one
/// of these once per run keeps the hot loop free of trigonometry.
#[derive(Debug, Clone)]
pub struct SfmModel<T> {
    pub params: VcselParams<T>,
    k_1ia: Complex<T>,
    gamma_ap: T,
    sin_2p1: T,
    cos_2p1: T,
    cos2_2p2: T,
    sin2_2p2: T,
    /// g_{1,2}·Ψ_{x,y}·e^{-i·omega0·tau_o}, folded per mode.
    fb_pre_x: Complex<T>,
    fb_pre_y: Complex<T>,
    sqrt_beta: T,
}

impl<T: Real> SfmModel<T> {
    pub fn new(params: &VcselParams<T>) -> Self {
        let two = T::from_f64_lossy(2.0);
        let sin_2p1 = (two * params.theta_p1).sin();
        let cos_2p1 = (two * params.theta_p1).cos();
        let c2p2 = (two * params.theta_p2).cos();
        let s2p2 = (two * params.theta_p2).sin();
        let phase = params.feedback_phase();
        let fb_phase = Complex::new(phase.cos(), -phase.sin());
        // Ψ_x = sin(2θ_p1), Ψ_y = cos(2θ_p1).
        let fb_pre_x = fb_phase * (params.g1 * sin_2p1);
        let fb_pre_y = fb_phase * (params.g2 * cos_2p1);
        SfmModel {
            params: params.clone(),
            k_1ia: Complex::new(params.k, params.k * params.alpha),
            gamma_ap: params.g_a + params.g_p,
            sin_2p1,
            cos_2p1,
            cos2_2p2: c2p2 * c2p2,
            sin2_2p2: s2p2 * s2p2,
            fb_pre_x,
            fb_pre_y,
            sqrt_beta: params.beta_sp.sqrt(),
        }
    }

    /// Both modes' feedback addends for one set of delayed values. The
    /// Runge–Kutta stages at a common stage time share these.
    #[inline]
    pub fn feedback_pair(&self, delayed: &Delayed<T>) -> FeedbackPair<T> {
        let (sin_phi, cos_phi) = delayed.phi.sin_cos();
        let modulated = Complex::new(
            self.cos2_2p2 + cos_phi * self.sin2_2p2,
            sin_phi * self.sin2_2p2,
        );
        let rot_y = delayed.e_y * self.cos_2p1;
        let rot_x = delayed.e_x * self.sin_2p1;
        FeedbackPair {
            x: (rot_y - rot_x) * modulated * self.fb_pre_x,
            y: (rot_y + rot_x) * modulated * self.fb_pre_y,
        }
    }

    /// Delayed-feedback addend for one mode.
    ///
    /// Reading of the feedback path: the delayed field is rotated through the
    /// polarizer (mixing E_x and E_y with weights cos/sin of 2θ_p1, sign
    /// split by mode), the modulated arm contributes e^{iφ_delayed} weighted
    /// by sin²(2θ_p2) against the unmodulated cos²(2θ_p2) arm, and the
    /// roundtrip adds the constant phase e^{-i·omega0·tau_o}. This is the
    /// single swap point for alternate readings of the feedback path.
    pub fn feedback_term(&self, mode: Mode, delayed: &Delayed<T>) -> Complex<T> {
        let pair = self.feedback_pair(delayed);
        match mode {
            Mode::X => pair.x,
            Mode::Y => pair.y,
        }
    }

    /// Right-hand side of the model. `noise` is the pair (ζ_x, ζ_y); pass
    /// zeros when spontaneous-emission noise is disabled.
    pub fn rhs(
        &self,
        state: &SimState<T>,
        delayed: &Delayed<T>,
        noise: (Complex<T>, Complex<T>),
    ) -> Result<Deriv<T>> {
        if !state.is_finite() {
            return Err(Error::NonFinite {
                t_ns: state.t.to_f64_lossy(),
                what: "state".into(),
            });
        }
        if !(delayed.e_x.re.is_finite()
            && delayed.e_x.im.is_finite()
            && delayed.e_y.re.is_finite()
            && delayed.e_y.im.is_finite()
            && delayed.phi.is_finite())
        {
            return Err(Error::NonFinite {
                t_ns: state.t.to_f64_lossy(),
                what: "delayed value".into(),
            });
        }
        Ok(self.rhs_unchecked(state, delayed, noise))
    }

    /// Same as [`SfmModel::rhs`] without the finiteness checks; the
    /// integrator calls this and polices divergence once per step instead.
    #[inline]
    pub fn rhs_unchecked(
        &self,
        state: &SimState<T>,
        delayed: &Delayed<T>,
        noise: (Complex<T>, Complex<T>),
    ) -> Deriv<T> {
        self.rhs_with_feedback(state, &self.feedback_pair(delayed), noise)
    }

    #[inline]
    pub(crate) fn rhs_with_feedback(
        &self,
        state: &SimState<T>,
        fb: &FeedbackPair<T>,
        noise: (Complex<T>, Complex<T>),
    ) -> Deriv<T> {
        let p = &self.params;
        let n1 = state.n_carrier - T::one();
        let i_n = Complex::new(T::zero(), state.n_spin);

        // Field equations: x gets +i·n·E_y and -(g_a+g_p)·E_x, y the opposite.
        let d_ex = self.k_1ia * (state.e_x * n1 + i_n * state.e_y) - state.e_x * self.gamma_ap
            + fb.x
            + noise.0 * self.sqrt_beta;
        let d_ey = self.k_1ia * (state.e_y * n1 - i_n * state.e_x) + state.e_y * self.gamma_ap
            + fb.y
            + noise.1 * self.sqrt_beta;

        let power = state.e_x.norm_sqr() + state.e_y.norm_sqr();
        // Im(E_x·conj(E_y)); i·n·(E_x·Ē_y − Ē_x·E_y) = -2·n·Im(E_x·Ē_y).
        let cross = (state.e_x * state.e_y.conj()).im;
        let two = T::from_f64_lossy(2.0);

        let d_nc =
            p.g_n * (p.mu - state.n_carrier * (T::one() + power) - two * state.n_spin * cross);
        let d_ns = -p.g_s * state.n_spin
            - p.g_n * (state.n_spin * power + two * state.n_carrier * cross);

        Deriv {
            e_x: d_ex,
            e_y: d_ey,
            n_carrier: d_nc,
            n_spin: d_ns,
        }
    }
}

/// Feedback addends of the two modes at one stage time.
#[derive(Debug, Clone, Copy)]
pub struct FeedbackPair<T> {
    pub x: Complex<T>,
    pub y: Complex<T>,
}

/// Convenience wrapper over [`SfmModel::rhs`] for one-off evaluations.
pub fn rhs<T: Real>(
    state: &SimState<T>,
    delayed: &Delayed<T>,
    params: &VcselParams<T>,
    noise: (Complex<T>, Complex<T>),
) -> Result<Deriv<T>> {
    SfmModel::new(params).rhs(state, delayed, noise)
}

/// Fixed-point residual: max-norm of the right-hand side evaluated with the
/// delayed values frozen at the current state and noise off.
pub fn steady_state_residual<T: Real>(state: &SimState<T>, params: &VcselParams<T>) -> T {
    let model = SfmModel::new(params);
    let delayed = Delayed {
        e_x: state.e_x,
        e_y: state.e_y,
        phi: phase_signal(state.e_x, state.e_y, params.theta_p1),
    };
    let zero = Complex::new(T::zero(), T::zero());
    model
        .rhs_unchecked(state, &delayed, (zero, zero))
        .max_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn zeroc() -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    #[test]
    fn phase_signal_zero_field() {
        assert_eq!(phase_signal(zeroc(), zeroc(), 0.3), 0.0);
    }

    #[test]
    fn phase_signal_theta_zero_picks_x() {
        // sin(0) = 0, cos(0) = 1: φ = |-E_x|².
        let p = phase_signal(Complex64::new(1.0, 0.0), Complex64::new(0.7, -0.2), 0.0);
        assert!((p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phase_signal_cancels_at_22_5_deg() {
        let th = 22.5f64.to_radians();
        let one = Complex64::new(1.0, 0.0);
        assert!(phase_signal(one, one, th).abs() < 1e-30);
    }

    #[test]
    fn rhs_decoupled_x_mode_decays() {
        // g1 = g2 = 0, n = 0, E_y = 0, N = 1: dE_x/dt = -(g_a+g_p)·E_x.
        let mut p = VcselParams::<f64>::operating_point();
        p.g1 = 0.0;
        p.g2 = 0.0;
        let state = SimState {
            e_x: Complex64::new(0.3, -0.1),
            e_y: zeroc(),
            n_carrier: 1.0,
            n_spin: 0.0,
            t: 0.0,
        };
        let delayed = Delayed {
            e_x: zeroc(),
            e_y: zeroc(),
            phi: 0.0,
        };
        let d = rhs(&state, &delayed, &p, (zeroc(), zeroc())).unwrap();
        let expected = state.e_x * -(p.g_a + p.g_p);
        assert!((d.e_x - expected).norm() < 1e-12);
    }

    #[test]
    fn rhs_zero_fields_carrier_relaxation() {
        let p = VcselParams::<f64>::operating_point();
        let state = SimState {
            e_x: zeroc(),
            e_y: zeroc(),
            n_carrier: 2.0,
            n_spin: 0.5,
            t: 0.0,
        };
        let delayed = Delayed {
            e_x: zeroc(),
            e_y: zeroc(),
            phi: 0.0,
        };
        let d = rhs(&state, &delayed, &p, (zeroc(), zeroc())).unwrap();
        assert!((d.n_carrier - p.g_n * (p.mu - 2.0)).abs() < 1e-15);
        assert!((d.n_spin - (-p.g_s * 0.5)).abs() < 1e-15);
    }

    #[test]
    fn rhs_rejects_non_finite() {
        let p = VcselParams::<f64>::operating_point();
        let state = SimState {
            e_x: Complex64::new(f64::NAN, 0.0),
            e_y: zeroc(),
            n_carrier: 1.0,
            n_spin: 0.0,
            t: 3.25,
        };
        let delayed = Delayed {
            e_x: zeroc(),
            e_y: zeroc(),
            phi: 0.0,
        };
        let err = rhs(&state, &delayed, &p, (zeroc(), zeroc())).unwrap_err();
        assert!(err.to_string().contains("3.25"));
    }

    #[test]
    fn off_state_is_fixed_point_without_feedback() {
        let mut p = VcselParams::<f64>::operating_point();
        p.g1 = 0.0;
        p.g2 = 0.0;
        p.beta_sp = 0.0;
        let state = SimState::off(&p);
        assert_eq!(steady_state_residual(&state, &p), 0.0);
    }

    #[test]
    fn random_state_has_positive_residual() {
        let p = VcselParams::<f64>::operating_point();
        let state = SimState {
            e_x: Complex64::new(0.4, 0.2),
            e_y: Complex64::new(-0.3, 0.9),
            n_carrier: 1.3,
            n_spin: 0.1,
            t: 0.0,
        };
        assert!(steady_state_residual(&state, &p) > 0.0);
    }
}
