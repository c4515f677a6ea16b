//! Fixed-step integration of the delayed model.
//!
//! Deterministic runs use classical fourth-order Runge–Kutta; the delayed
//! terms are exact ring reads at whole steps (delays are validated to be
//! integer multiples of h) and cubic-Hermite midpoints at half steps, which
//! preserves the fourth-order convergence. With spontaneous-emission noise
//! enabled the stepper switches to Euler–Maruyama on the same grid.
//!
//! Identical inputs (parameters, initial state, step, seed) produce
//! bit-identical trajectories.

use super::{Delayed, Deriv, HistoryBuffer, SfmModel, SimState};
use crate::error::{Error, Result};
use crate::params::VcselParams;
use crate::scalar::Real;
use crate::trajectory::{FieldSamples, Trajectory};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IntegrationConfig<T> {
    /// Step size (ns).
    pub h: T,
    /// End of integration (ns).
    pub t_end: T,
    /// Initial interval discarded before any sample is used (ns).
    pub warm_up: T,
    /// Trajectory sample spacing in steps.
    pub decimation: usize,
    /// Seed for the initial-condition perturbation and, when enabled, the
    /// spontaneous-emission noise.
    pub seed: u64,
    /// Divergence bound on |E|.
    pub max_field: T,
    /// Relative size of the seeded initial-condition perturbation.
    pub ic_perturbation: T,
    /// Keep raw complex fields in the trajectory.
    pub store_fields: bool,
}

impl<T: Real> Default for IntegrationConfig<T> {
    fn default() -> Self {
        IntegrationConfig {
            h: T::from_f64_lossy(5e-5),
            t_end: T::from_f64_lossy(1000.0),
            warm_up: T::from_f64_lossy(200.0),
            decimation: 1,
            seed: 1,
            max_field: T::from_f64_lossy(1e6),
            ic_perturbation: T::from_f64_lossy(1e-6),
            store_fields: false,
        }
    }
}

impl<T: Real> IntegrationConfig<T> {
    pub fn validate(&self, params: &VcselParams<T>) -> Result<()> {
        params.validate()?;
        if !(self.h > T::zero()) {
            return Err(Error::config("integration.h", "must be > 0"));
        }
        if !(self.t_end > self.warm_up) {
            return Err(Error::config(
                "integration.t_end",
                "must exceed the warm-up interval",
            ));
        }
        if self.warm_up < T::zero() {
            return Err(Error::config("integration.warm_up", "must be >= 0"));
        }
        if self.decimation == 0 {
            return Err(Error::config("integration.decimation", "must be >= 1"));
        }
        if !(self.max_field > T::zero()) {
            return Err(Error::config("integration.max_field", "must be > 0"));
        }
        delay_steps(params.tau_o(), self.h, "vcsel.tau_o")?;
        delay_steps(params.phase_delay(), self.h, "vcsel.tau_e + 2*tau_o1 + tau_o2")?;
        Ok(())
    }
}

/// Number of grid steps in a delay, erroring unless the delay is an integer
/// multiple of the step (relative tolerance 1e-6).
fn delay_steps<T: Real>(delay: T, h: T, what: &str) -> Result<i64> {
    let ratio = (delay / h).to_f64_lossy();
    let rounded = ratio.round();
    if rounded < 1.0 {
        return Err(Error::config(
            what,
            format!("delay {} ns is shorter than the step", delay),
        ));
    }
    if (ratio - rounded).abs() > 1e-6 * rounded.max(1.0) {
        return Err(Error::config(
            what,
            format!(
                "delay {} ns is not an integer multiple of h = {} ns (ratio {})",
                delay, h, ratio
            ),
        ));
    }
    Ok(rounded as i64)
}

/// Default seeded initial condition: small symmetric fields broken by a
/// reproducible relative perturbation.
pub fn default_ic<T: Real>(params: &VcselParams<T>, cfg: &IntegrationConfig<T>) -> SimState<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    SimState::seed(params).perturbed(cfg.ic_perturbation, &mut rng)
}

/// One accepted step, exposed to streaming consumers.
#[derive(Debug, Clone, Copy)]
pub struct StepSample<T> {
    /// Grid index of the node (t = index · h).
    pub node: i64,
    pub i_x: T,
    pub i_y: T,
    pub e_x: Complex<T>,
    pub e_y: Complex<T>,
}

pub struct Integrator<T: Real> {
    model: SfmModel<T>,
    cfg: IntegrationConfig<T>,
    history: HistoryBuffer<T>,
    state: SimState<T>,
    /// Derivative at the current node (reused as the first stage).
    deriv: Deriv<T>,
    node: i64,
    tau_o_steps: i64,
    phase_steps: i64,
    h_half: T,
    h_sixth: T,
    max_norm_sqr: T,
    noise_rng: ChaCha8Rng,
    noise_amp: T,
}

impl<T: Real> Integrator<T> {
    pub fn new(
        params: &VcselParams<T>,
        ic: SimState<T>,
        cfg: &IntegrationConfig<T>,
    ) -> Result<Self> {
        cfg.validate(params)?;
        let tau_o_steps = delay_steps(params.tau_o(), cfg.h, "vcsel.tau_o")?;
        let phase_steps = delay_steps(params.phase_delay(), cfg.h, "phase delay")?;
        let capacity = tau_o_steps.max(phase_steps) as usize;
        let mut history =
            HistoryBuffer::new(capacity, cfg.h, params.theta_p1, ic.e_x, ic.e_y);

        let model = SfmModel::new(params);
        let zero = Complex::new(T::zero(), T::zero());
        let mut state = ic;
        state.t = T::zero();
        // Delayed values at t = 0 are the constant pre-history.
        let delayed0 = Delayed {
            e_x: history.fields_at(-1).0,
            e_y: history.fields_at(-1).1,
            phi: history.phi_at(-1),
        };
        let deriv = model.rhs(&state, &delayed0, (zero, zero))?;
        history.push(state.e_x, state.e_y, deriv.e_x, deriv.e_y);

        let two = T::from_f64_lossy(2.0);
        let six = T::from_f64_lossy(6.0);
        // Noise stream is decoupled from the initial-condition stream.
        let mut noise_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        noise_rng.set_stream(1);
        Ok(Integrator {
            max_norm_sqr: cfg.max_field * cfg.max_field,
            h_half: cfg.h / two,
            h_sixth: cfg.h / six,
            noise_amp: (model.params.beta_sp * cfg.h).sqrt(),
            model,
            cfg: cfg.clone(),
            history,
            state,
            deriv,
            node: 0,
            tau_o_steps,
            phase_steps,
            noise_rng,
        })
    }

    pub fn state(&self) -> &SimState<T> {
        &self.state
    }

    pub fn node(&self) -> i64 {
        self.node
    }

    pub fn time(&self) -> T {
        self.state.t
    }

    pub fn step_size(&self) -> T {
        self.cfg.h
    }

    pub fn history(&self) -> &HistoryBuffer<T> {
        &self.history
    }

    fn delayed_at_node(&self, node: i64) -> Delayed<T> {
        let (e_x, e_y) = self.history.fields_at(node - self.tau_o_steps);
        Delayed {
            e_x,
            e_y,
            phi: self.history.phi_at(node - self.phase_steps),
        }
    }

    fn delayed_at_midpoint(&self, node: i64) -> Delayed<T> {
        let (e_x, e_y) = self.history.fields_at_midpoint(node - self.tau_o_steps);
        Delayed {
            e_x,
            e_y,
            phi: self.history.phi_at_midpoint(node - self.phase_steps),
        }
    }

    #[inline]
    fn advance(base: &SimState<T>, k: &Deriv<T>, dt: T, t: T) -> SimState<T> {
        SimState {
            e_x: base.e_x + k.e_x * dt,
            e_y: base.e_y + k.e_y * dt,
            n_carrier: base.n_carrier + k.n_carrier * dt,
            n_spin: base.n_spin + k.n_spin * dt,
            t,
        }
    }

    /// Advances one grid step. Errors on divergence or non-finite values,
    /// reporting the time of the failed step.
    pub fn step(&mut self) -> Result<StepSample<T>> {
        let new_state = if self.model.params.noise_enabled {
            self.step_euler_maruyama()
        } else {
            self.step_rk4()
        };
        let next = self.node + 1;
        let t_next = T::from_i64(next).unwrap() * self.cfg.h;

        let nx = new_state.e_x.norm_sqr();
        let ny = new_state.e_y.norm_sqr();
        if !(nx <= self.max_norm_sqr && ny <= self.max_norm_sqr)
            || !new_state.n_carrier.is_finite()
            || !new_state.n_spin.is_finite()
        {
            return Err(Error::Divergence {
                t_ns: t_next.to_f64_lossy(),
                bound: self.cfg.max_field.to_f64_lossy(),
            });
        }

        let mut accepted = new_state;
        accepted.t = t_next;
        // Derivative at the accepted node; next step reuses it as its first
        // stage and the history needs it for Hermite midpoints.
        let fb = self.model.feedback_pair(&self.delayed_at_node(next));
        let zero = Complex::new(T::zero(), T::zero());
        let deriv = self.model.rhs_with_feedback(&accepted, &fb, (zero, zero));
        self.history
            .push(accepted.e_x, accepted.e_y, deriv.e_x, deriv.e_y);
        self.state = accepted;
        self.deriv = deriv;
        self.node = next;
        Ok(StepSample {
            node: next,
            i_x: nx,
            i_y: ny,
            e_x: accepted.e_x,
            e_y: accepted.e_y,
        })
    }

    fn step_rk4(&mut self) -> SimState<T> {
        let y = self.state;
        let t_mid = y.t + self.h_half;
        let t_next = y.t + self.cfg.h;
        let zero = Complex::new(T::zero(), T::zero());
        let noise = (zero, zero);

        let k1 = self.deriv;
        let fb_mid = self.model.feedback_pair(&self.delayed_at_midpoint(self.node));
        let y2 = Self::advance(&y, &k1, self.h_half, t_mid);
        let k2 = self.model.rhs_with_feedback(&y2, &fb_mid, noise);
        let y3 = Self::advance(&y, &k2, self.h_half, t_mid);
        let k3 = self.model.rhs_with_feedback(&y3, &fb_mid, noise);
        let fb_end = self.model.feedback_pair(&self.delayed_at_node(self.node + 1));
        let y4 = Self::advance(&y, &k3, self.cfg.h, t_next);
        let k4 = self.model.rhs_with_feedback(&y4, &fb_end, noise);

        let two = T::from_f64_lossy(2.0);
        SimState {
            e_x: y.e_x + (k1.e_x + (k2.e_x + k3.e_x) * two + k4.e_x) * self.h_sixth,
            e_y: y.e_y + (k1.e_y + (k2.e_y + k3.e_y) * two + k4.e_y) * self.h_sixth,
            n_carrier: y.n_carrier
                + (k1.n_carrier + (k2.n_carrier + k3.n_carrier) * two + k4.n_carrier)
                    * self.h_sixth,
            n_spin: y.n_spin
                + (k1.n_spin + (k2.n_spin + k3.n_spin) * two + k4.n_spin) * self.h_sixth,
            t: t_next,
        }
    }

    /// Euler–Maruyama: deterministic drift plus the Wiener increment
    /// sqrt(beta_sp·h)·ζ on each field, ζ a unit-variance complex Gaussian.
    fn step_euler_maruyama(&mut self) -> SimState<T> {
        let y = self.state;
        let drift = self.deriv;
        let mut out = Self::advance(&y, &drift, self.cfg.h, y.t + self.cfg.h);
        let inv_sqrt2 = T::from_f64_lossy(std::f64::consts::FRAC_1_SQRT_2);
        let mut draw = |rng: &mut ChaCha8Rng| -> T {
            let z: f64 = rng.sample(StandardNormal);
            T::from_f64_lossy(z)
        };
        let zx = Complex::new(draw(&mut self.noise_rng), draw(&mut self.noise_rng)) * inv_sqrt2;
        let zy = Complex::new(draw(&mut self.noise_rng), draw(&mut self.noise_rng)) * inv_sqrt2;
        out.e_x = out.e_x + zx * self.noise_amp;
        out.e_y = out.e_y + zy * self.noise_amp;
        out
    }
}

/// Integrates the model and collects the decimated post-warm-up trajectory.
pub fn integrate<T: Real>(
    params: &VcselParams<T>,
    ic: SimState<T>,
    cfg: &IntegrationConfig<T>,
) -> Result<Trajectory<T>> {
    let mut integ = Integrator::new(params, ic, cfg)?;
    let h = cfg.h;
    let total_steps = (cfg.t_end / h).to_f64_lossy().round() as i64;
    let warm_steps = (cfg.warm_up / h).to_f64_lossy().round() as i64;
    let dec = cfg.decimation as i64;

    let est = ((total_steps - warm_steps) / dec + 2) as usize;
    let mut i_x = Vec::with_capacity(est);
    let mut i_y = Vec::with_capacity(est);
    let mut fields = cfg.store_fields.then(FieldSamples::default);

    let keep = |node: i64| node >= warm_steps && (node - warm_steps) % dec == 0;
    if keep(0) {
        let s = integ.state();
        i_x.push(s.e_x.norm_sqr());
        i_y.push(s.e_y.norm_sqr());
        if let Some(f) = fields.as_mut() {
            f.e_x.push(s.e_x);
            f.e_y.push(s.e_y);
        }
    }
    while integ.node() < total_steps {
        let sample = integ.step()?;
        if keep(sample.node) {
            i_x.push(sample.i_x);
            i_y.push(sample.i_y);
            if let Some(f) = fields.as_mut() {
                f.e_x.push(sample.e_x);
                f.e_y.push(sample.e_y);
            }
        }
    }

    Ok(Trajectory {
        dt: h * T::from_i64(dec).unwrap(),
        t0: h * T::from_i64(warm_steps).unwrap(),
        i_x,
        i_y,
        fields,
    })
}
