//! Event-ordered extraction engine and the streaming sample window.
//!
//! The engine walks edges in time order (latch m within cycle k fires at
//! t_start + k·τ + (m−1)·δτ), updates one latch per edge from its
//! comparator, and emits the parity of all latches after every edge. The
//! same engine runs over an in-memory trajectory or a bounded window fed
//! by a live integration; both paths perform identical arithmetic, so the
//! produced streams are bit-identical.

use super::{comparator_bit, ExtractionConfig};
use crate::bits::BitStream;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::trajectory::{cubic_kernel, Channel, SeriesView};

/// Anything that can serve cubically interpolated samples at a time.
pub trait SampleSource<T> {
    fn sample_cubic(&self, t: T) -> Result<T>;
}

impl<'a, T: Real> SampleSource<T> for SeriesView<'a, T> {
    fn sample_cubic(&self, t: T) -> Result<T> {
        SeriesView::sample_cubic(self, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Emission {
    /// All scheduled edges have fired.
    Done,
    /// An edge fired during the discarded first cycle.
    Dropped,
    Bit(bool),
}

/// Incremental extractor state: latch register plus the next edge index.
#[derive(Debug, Clone)]
pub struct EdgeEngine<T> {
    config: ExtractionConfig<T>,
    latches: u64,
    next: u64,
    total: u64,
}

impl<T: Real> EdgeEngine<T> {
    /// Latches start from hardware reset (all zeros).
    pub fn new(config: ExtractionConfig<T>, total_emissions: u64) -> Self {
        EdgeEngine {
            config,
            latches: 0,
            next: 0,
            total: total_emissions,
        }
    }

    pub fn emitted(&self) -> u64 {
        self.next
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn next_edge_time(&self) -> Option<T> {
        (self.next < self.total).then(|| self.config.edge_time(self.next))
    }

    pub fn latch(&self, m: usize) -> bool {
        (self.latches >> m) & 1 == 1
    }

    pub fn parity(&self) -> bool {
        self.latches.count_ones() & 1 == 1
    }

    /// Fires the next edge: latches its comparator bit and emits the parity.
    pub fn emit_next<S: SampleSource<T>>(&mut self, source: &S) -> Result<Emission> {
        if self.next >= self.total {
            return Ok(Emission::Done);
        }
        let j = self.next;
        let m = (j % self.config.m() as u64) as usize;
        let t = self.config.edge_time(j);
        let bit = comparator_bit(source, t, self.config.schedule()[m], self.config.tie_rule)?;
        self.latches = (self.latches & !(1u64 << m)) | ((bit as u64) << m);
        self.next = j + 1;
        if self.config.drop_first_cycle && j < self.config.m() as u64 {
            Ok(Emission::Dropped)
        } else {
            Ok(Emission::Bit(self.parity()))
        }
    }
}

/// Bounded ring of recent samples on a uniform grid, fed by a live
/// integration. Serves the same cubic interpolation as `SeriesView` over
/// the retained span.
#[derive(Debug, Clone)]
pub struct StreamWindow<T> {
    values: Vec<T>,
    mask: usize,
    /// Number of samples pushed so far; sample i sits at t0 + i·dt.
    head: i64,
    t0: T,
    dt: T,
}

impl<T: Real> StreamWindow<T> {
    /// `span_samples` is the guaranteed lookback depth.
    pub fn new(span_samples: usize, t0: T, dt: T) -> Self {
        let cap = (span_samples + 8).next_power_of_two();
        StreamWindow {
            values: vec![T::zero(); cap],
            mask: cap - 1,
            head: 0,
            t0,
            dt,
        }
    }

    #[inline]
    pub fn push(&mut self, value: T) {
        let slot = (self.head as usize) & self.mask;
        self.values[slot] = value;
        self.head += 1;
    }

    /// Index of the newest available sample.
    pub fn newest(&self) -> i64 {
        self.head - 1
    }

    /// Whether interpolation at `t` has its full stencil available.
    pub fn covers(&self, t: T) -> bool {
        let u = ((t - self.t0) / self.dt).to_f64_lossy();
        let idx = u.floor() as i64;
        idx + 2 <= self.newest() && idx >= 1 && self.head - (idx - 1) <= self.values.len() as i64
    }
}

impl<T: Real> SampleSource<T> for StreamWindow<T> {
    fn sample_cubic(&self, t: T) -> Result<T> {
        let u = (t - self.t0) / self.dt;
        let i = u.floor();
        let idx = i.to_f64_lossy() as i64;
        if idx < 1 || idx + 2 > self.newest() || self.head - (idx - 1) > self.values.len() as i64 {
            return Err(Error::OutOfRange {
                t_ns: t.to_f64_lossy(),
                min_ns: (self.t0 + self.dt).to_f64_lossy(),
                max_ns: (self.t0 + self.dt * T::from_i64(self.newest()).unwrap()).to_f64_lossy(),
            });
        }
        let s = u - i;
        let at = |k: i64| self.values[(k as usize) & self.mask];
        Ok(cubic_kernel(at(idx - 1), at(idx), at(idx + 1), at(idx + 2), s))
    }
}

/// Drives one engine per channel from a live sample feed, producing streams
/// bit-identical to [`super::extract`] over the equivalent trajectory.
pub struct StreamingExtractor<T: Real> {
    channels: Vec<(Channel, StreamWindow<T>, EdgeEngine<T>, BitStream)>,
    duration: T,
}

impl<T: Real> StreamingExtractor<T> {
    /// `t0`/`dt` describe the sample grid that will be fed via `push`;
    /// the window retains the schedule depth plus interpolation margin.
    pub fn new(
        config: &ExtractionConfig<T>,
        channels: &[Channel],
        duration: T,
        t0: T,
        dt: T,
    ) -> Self {
        let span = ((config.max_delay() / dt).to_f64_lossy().ceil() as usize) + 8;
        let total = config.emission_count(duration);
        let channels = channels
            .iter()
            .map(|&ch| {
                (
                    ch,
                    StreamWindow::new(span, t0, dt),
                    EdgeEngine::new(config.clone(), total),
                    BitStream::with_capacity(total as usize),
                )
            })
            .collect();
        StreamingExtractor { channels, duration }
    }

    /// Feeds the next grid sample of each requested channel (pass the x and
    /// y intensities; unused ones are ignored) and fires every edge that
    /// became resolvable.
    pub fn push_sample(&mut self, i_x: T, i_y: T) -> Result<()> {
        for (ch, window, engine, out) in self.channels.iter_mut() {
            window.push(match ch {
                Channel::X => i_x,
                Channel::Y => i_y,
            });
            while let Some(t_edge) = engine.next_edge_time() {
                if !window.covers(t_edge) {
                    break;
                }
                match engine.emit_next(window)? {
                    Emission::Done => break,
                    Emission::Dropped => {}
                    Emission::Bit(b) => out.push(b),
                }
            }
        }
        Ok(())
    }

    /// True once every channel has fired all scheduled edges.
    pub fn complete(&self) -> bool {
        self.channels
            .iter()
            .all(|(_, _, engine, _)| engine.emitted() == engine.total())
    }

    /// Returns the finished per-channel streams; errors if the feed ended
    /// before all edges could fire.
    pub fn finish(self, config: &ExtractionConfig<T>) -> Result<Vec<(Channel, BitStream)>> {
        let duration = self.duration;
        self.channels
            .into_iter()
            .map(|(ch, _, engine, mut out)| {
                if engine.emitted() != engine.total() {
                    return Err(Error::Analysis(format!(
                        "channel {ch}: feed ended after {} of {} emissions",
                        engine.emitted(),
                        engine.total()
                    )));
                }
                out.meta = Some(config.meta(ch, duration, out.len()));
                Ok((ch, out))
            })
            .collect()
    }
}
