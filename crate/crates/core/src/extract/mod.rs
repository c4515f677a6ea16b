//! Comparator / staggered-latch / parity bit extraction.
//!
//! M single-bit comparators each compare the intensity with a delayed copy
//! of itself (delays pairwise separated by more than a clock period). Each
//! comparator feeds a positive-edge latch; the M latch clocks are staggered
//! by τ/M within a clock period, and one output bit — the parity of all
//! latched bits — is emitted after every edge, for M·f_c bits per second
//! per channel.

mod engine;
mod reference;

pub use engine::{EdgeEngine, SampleSource, StreamWindow, StreamingExtractor};
pub use reference::extract_reference;

use crate::bits::{BitStream, StreamMeta};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::trajectory::{Channel, Trajectory};
use serde::Serialize;

/// Comparator delays T_m = sqrt(3.2·m − 1) ns, m = 1..=M; strictly
/// increasing, pairwise gaps shrinking toward ~0.14 ns at m ≈ 39.
pub fn delay_schedule<T: Real>(m: usize) -> Vec<T> {
    (1..=m)
        .map(|i| {
            (T::from_f64_lossy(3.2) * T::from_usize(i).unwrap() - T::one()).sqrt()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Advisory {
    /// δτ·B_w >= 10.
    Strong,
    /// δτ·B_w >= 1.
    Pass,
    /// δτ·B_w < 1: the stagger undercuts the signal's decorrelation scale.
    Flagged,
    /// No bandwidth supplied.
    Unknown,
}

/// Timing-constraint report. The two schedule inequalities are hard errors
/// at construction; the stagger-vs-bandwidth ratio is advisory only.
#[derive(Debug, Clone, Serialize)]
pub struct TimingReport<T> {
    pub tau_ns: T,
    pub delta_tau_ns: T,
    pub min_delay_ns: T,
    pub min_pairwise_gap_ns: T,
    pub bw_ghz: Option<T>,
    pub delta_tau_bw: Option<T>,
    pub advisory: Advisory,
}

/// Checks the schedule inequalities (T_m > τ, pairwise gaps > τ) and
/// reports the δτ·B_w margin.
pub fn validate_timing<T: Real>(
    schedule: &[T],
    f_c_ghz: T,
    bw_ghz: Option<T>,
) -> Result<TimingReport<T>> {
    if schedule.is_empty() {
        return Err(Error::config("extraction.schedule", "must be non-empty"));
    }
    if !(f_c_ghz > T::zero()) {
        return Err(Error::config("extraction.f_c", "must be > 0"));
    }
    let tau = f_c_ghz.recip();
    let m = schedule.len();

    let mut min_delay = schedule[0];
    for (i, &t) in schedule.iter().enumerate() {
        if !(t > tau) {
            return Err(Error::config(
                "extraction.schedule",
                format!(
                    "T_{} = {} ns must exceed the clock period {} ns",
                    i + 1,
                    t,
                    tau
                ),
            ));
        }
        min_delay = min_delay.min(t);
    }
    let mut min_gap = T::infinity();
    for i in 0..m {
        for j in (i + 1)..m {
            let gap = (schedule[i] - schedule[j]).abs();
            if !(gap > tau) {
                return Err(Error::config(
                    "extraction.schedule",
                    format!(
                        "|T_{} - T_{}| = {} ns must exceed the clock period {} ns",
                        i + 1,
                        j + 1,
                        gap,
                        tau
                    ),
                ));
            }
            min_gap = min_gap.min(gap);
        }
    }
    if m == 1 {
        min_gap = T::infinity();
    }

    let delta_tau = tau / T::from_usize(m).unwrap();
    let (delta_tau_bw, advisory) = match bw_ghz {
        Some(bw) => {
            let ratio = delta_tau * bw;
            let adv = if ratio >= T::from_f64_lossy(10.0) {
                Advisory::Strong
            } else if ratio >= T::one() {
                Advisory::Pass
            } else {
                Advisory::Flagged
            };
            (Some(ratio), adv)
        }
        None => (None, Advisory::Unknown),
    };

    Ok(TimingReport {
        tau_ns: tau,
        delta_tau_ns: delta_tau,
        min_delay_ns: min_delay,
        min_pairwise_gap_ns: min_gap,
        bw_ghz,
        delta_tau_bw,
        advisory,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionConfig<T> {
    m: usize,
    f_c_ghz: T,
    schedule: Vec<T>,
    /// Time of the first clock edge (ns).
    pub t_start: T,
    /// Comparator output on exact equality.
    pub tie_rule: bool,
    /// Discard the first M bits emitted while the latches fill from reset.
    pub drop_first_cycle: bool,
}

impl<T: Real> ExtractionConfig<T> {
    /// Validates the hard timing inequalities at construction; a config that
    /// exists is extractable.
    pub fn new(
        m: usize,
        f_c_ghz: T,
        schedule: Vec<T>,
        t_start: T,
        tie_rule: bool,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::config("extraction.m", "must be >= 1"));
        }
        if m > 64 {
            return Err(Error::config("extraction.m", "at most 64 comparators"));
        }
        if schedule.len() != m {
            return Err(Error::config(
                "extraction.schedule",
                format!("expected {} delays, got {}", m, schedule.len()),
            ));
        }
        validate_timing(&schedule, f_c_ghz, None)?;
        Ok(ExtractionConfig {
            m,
            f_c_ghz,
            schedule,
            t_start,
            tie_rule,
            drop_first_cycle: false,
        })
    }

    /// Standard configuration: schedule from [`delay_schedule`], first edge
    /// placed so every delayed lookup stays at or after `t_data_start`.
    pub fn standard(m: usize, f_c_ghz: T, t_data_start: T, sample_dt: T) -> Result<Self> {
        let schedule = delay_schedule::<T>(m);
        let max_t = schedule[m - 1];
        let margin = sample_dt * T::from_f64_lossy(2.0);
        Self::new(m, f_c_ghz, schedule, t_data_start + max_t + margin, false)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn f_c_ghz(&self) -> T {
        self.f_c_ghz
    }

    /// Clock period (ns).
    pub fn tau(&self) -> T {
        self.f_c_ghz.recip()
    }

    /// Latch stagger τ/M (ns).
    pub fn delta_tau(&self) -> T {
        self.tau() / T::from_usize(self.m).unwrap()
    }

    pub fn schedule(&self) -> &[T] {
        &self.schedule
    }

    pub fn max_delay(&self) -> T {
        self.schedule
            .iter()
            .copied()
            .fold(T::neg_infinity(), T::max)
    }

    /// Time of edge `j` (global emission index): cycle j/M, latch j%M.
    #[inline]
    pub fn edge_time(&self, j: u64) -> T {
        let cycle = T::from_u64(j / self.m as u64).unwrap();
        let slot = T::from_u64(j % self.m as u64).unwrap();
        self.t_start + cycle * self.tau() + slot * self.delta_tau()
    }

    /// Emitted bits for a given extraction duration: M·floor(duration/τ).
    pub fn emission_count(&self, duration: T) -> u64 {
        let cycles = (duration / self.tau()).to_f64_lossy().floor() as u64;
        cycles * self.m as u64
    }

    pub fn validate_timing(&self, bw_ghz: Option<T>) -> Result<TimingReport<T>> {
        validate_timing(&self.schedule, self.f_c_ghz, bw_ghz)
    }

    pub fn meta(&self, channel: Channel, duration_ns: T, bit_count: usize) -> StreamMeta {
        StreamMeta {
            channel: channel.to_string(),
            m: self.m,
            f_c_ghz: self.f_c_ghz.to_f64_lossy(),
            t_start_ns: self.t_start.to_f64_lossy(),
            duration_ns: duration_ns.to_f64_lossy(),
            bit_count,
            schedule: self.schedule.iter().map(|t| t.to_f64_lossy()).collect(),
        }
    }
}

/// Single comparator decision: 1 iff I(t) > I(t − T_m), ties resolved by
/// `tie_rule`. Off-grid times are cubically interpolated.
pub fn comparator_bit<T: Real, S: SampleSource<T>>(
    source: &S,
    t: T,
    t_m: T,
    tie_rule: bool,
) -> Result<bool> {
    let now = source.sample_cubic(t)?;
    let before = source.sample_cubic(t - t_m)?;
    if now > before {
        Ok(true)
    } else if now < before {
        Ok(false)
    } else {
        Ok(tie_rule)
    }
}

/// Event-ordered extraction over an in-memory trajectory channel.
pub fn extract<T: Real>(
    traj: &Trajectory<T>,
    channel: Channel,
    config: &ExtractionConfig<T>,
    duration: T,
) -> Result<BitStream> {
    let view = traj.view(channel);
    let total = config.emission_count(duration);
    let mut engine = EdgeEngine::new(config.clone(), total);
    let mut out = BitStream::with_capacity(total as usize);
    while let Some(bit) = engine.emit_next(&view)? {
        if let Some(b) = bit {
            out.push(b);
        }
    }
    out.meta = Some(config.meta(channel, duration, out.len()));
    Ok(out)
}

/// Total key rate in bits per second: channels · M · f_c.
pub fn throughput<T: Real>(config: &ExtractionConfig<T>, channels: usize) -> T {
    T::from_usize(channels).unwrap()
        * T::from_usize(config.m).unwrap()
        * config.f_c_ghz
        * T::from_f64_lossy(1e9)
}

/// Latch-trace export: one row per edge with every latch state and the
/// emitted parity, `t_ns,ff_1..ff_M,xor`.
pub fn write_latch_trace<T: Real, W: std::io::Write>(
    traj: &Trajectory<T>,
    channel: Channel,
    config: &ExtractionConfig<T>,
    cycles: u64,
    mut w: W,
) -> Result<()> {
    let view = traj.view(channel);
    let total = cycles * config.m() as u64;
    let mut engine = EdgeEngine::new(config.clone(), total);
    let header: Vec<String> = (1..=config.m()).map(|m| format!("ff_{m}")).collect();
    writeln!(w, "t_ns,{},xor", header.join(","))
        .map_err(|e| Error::io("<latch trace>".to_string(), e))?;
    let mut j = 0u64;
    while let Some(bit) = engine.emit_next(&view)? {
        let t = config.edge_time(j);
        let states: Vec<&str> = (0..config.m())
            .map(|m| if engine.latch(m) { "1" } else { "0" })
            .collect();
        let parity = bit.unwrap_or_else(|| engine.parity());
        writeln!(
            w,
            "{:.14e},{},{}",
            t,
            states.join(","),
            u8::from(parity)
        )
        .map_err(|e| Error::io("<latch trace>".to_string(), e))?;
        j += 1;
    }
    Ok(())
}

#[cfg(test)]
mod tests;
