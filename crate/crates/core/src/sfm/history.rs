//! Ring storage of past field samples on the integration grid.
//!
//! Delays are validated to be integer multiples of the step, so grid-node
//! lookups are exact reads. Runge–Kutta stages at half steps read the
//! cubic-Hermite midpoint of a past interval, using the stored node
//! derivatives; that keeps the delayed terms fourth-order accurate.
//! Times at or before t = 0 return the initial condition (the pre-history
//! is constant by construction).

use crate::scalar::Real;
use num_complex::Complex;

use super::phase_signal;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Node<T> {
    pub e_x: Complex<T>,
    pub e_y: Complex<T>,
    pub d_ex: Complex<T>,
    pub d_ey: Complex<T>,
    pub phi: T,
}

#[derive(Debug, Clone)]
pub struct HistoryBuffer<T> {
    nodes: Vec<Node<T>>,
    mask: usize,
    /// Absolute index of the next node to be written.
    head: i64,
    h: T,
    sin_2p1: T,
    cos_2p1: T,
    initial: Node<T>,
}

impl<T: Real> HistoryBuffer<T> {
    /// `capacity_steps` must cover the longest model delay; an interpolation
    /// margin is added internally and the ring is sized to a power of two.
    pub fn new(capacity_steps: usize, h: T, theta_p1: T, e_x0: Complex<T>, e_y0: Complex<T>) -> Self {
        let cap = (capacity_steps + 4).next_power_of_two();
        let zero = Complex::new(T::zero(), T::zero());
        let two = T::from_f64_lossy(2.0);
        let (sin_2p1, cos_2p1) = (two * theta_p1).sin_cos();
        let initial = Node {
            e_x: e_x0,
            e_y: e_y0,
            d_ex: zero,
            d_ey: zero,
            phi: phase_signal(e_x0, e_y0, theta_p1),
        };
        HistoryBuffer {
            nodes: vec![initial; cap],
            mask: cap - 1,
            head: 0,
            h,
            sin_2p1,
            cos_2p1,
            initial,
        }
    }

    #[inline]
    fn phi_of(&self, e_x: Complex<T>, e_y: Complex<T>) -> T {
        (e_y * self.sin_2p1 - e_x * self.cos_2p1).norm_sqr()
    }

    pub fn capacity(&self) -> usize {
        self.nodes.len()
    }

    pub fn step(&self) -> T {
        self.h
    }

    /// Absolute index of the most recently written node, or -1 if empty.
    pub fn last_node(&self) -> i64 {
        self.head - 1
    }

    /// Appends the node for the next grid time; `d_ex`/`d_ey` are the field
    /// derivatives at that node.
    pub fn push(&mut self, e_x: Complex<T>, e_y: Complex<T>, d_ex: Complex<T>, d_ey: Complex<T>) {
        let node = Node {
            e_x,
            e_y,
            d_ex,
            d_ey,
            phi: self.phi_of(e_x, e_y),
        };
        let slot = (self.head as usize) & self.mask;
        self.nodes[slot] = node;
        self.head += 1;
    }

    #[inline]
    pub(crate) fn node(&self, index: i64) -> &Node<T> {
        if index < 0 {
            return &self.initial;
        }
        debug_assert!(index < self.head, "lookup ahead of history head");
        debug_assert!(
            self.head - index <= self.nodes.len() as i64,
            "lookup beyond ring capacity"
        );
        &self.nodes[(index as usize) & self.mask]
    }

    /// Fields at a grid node (exact read).
    #[inline]
    pub fn fields_at(&self, index: i64) -> (Complex<T>, Complex<T>) {
        let n = self.node(index);
        (n.e_x, n.e_y)
    }

    /// Projection signal at a grid node (stored, equals `phase_signal` of the
    /// stored fields).
    #[inline]
    pub fn phi_at(&self, index: i64) -> T {
        self.node(index).phi
    }

    /// Fields at the midpoint of [index, index+1] by cubic Hermite using the
    /// stored values and derivatives: (y₀+y₁)/2 + h·(y₀'−y₁')/8.
    #[inline]
    pub fn fields_at_midpoint(&self, index: i64) -> (Complex<T>, Complex<T>) {
        if index < 0 {
            // Midpoint lies at or before t = 0 where the history is constant.
            return (self.initial.e_x, self.initial.e_y);
        }
        let a = self.node(index);
        let b = self.node(index + 1);
        let half = T::from_f64_lossy(0.5);
        let eighth = T::from_f64_lossy(0.125);
        let hx = (a.e_x + b.e_x) * half + (a.d_ex - b.d_ex) * (self.h * eighth);
        let hy = (a.e_y + b.e_y) * half + (a.d_ey - b.d_ey) * (self.h * eighth);
        (hx, hy)
    }

    /// Projection signal at the midpoint of [index, index+1], evaluated on
    /// the Hermite-interpolated fields.
    #[inline]
    pub fn phi_at_midpoint(&self, index: i64) -> T {
        if index < 0 {
            return self.initial.phi;
        }
        let (ex, ey) = self.fields_at_midpoint(index);
        self.phi_of(ex, ey)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pre_history_returns_initial_condition() {
        let buf = HistoryBuffer::new(16, 0.5, 0.3, c(1.0, 2.0), c(-0.5, 0.0));
        let (ex, ey) = buf.fields_at(-3);
        assert_eq!(ex, c(1.0, 2.0));
        assert_eq!(ey, c(-0.5, 0.0));
        assert_eq!(buf.phi_at(-1), phase_signal(c(1.0, 2.0), c(-0.5, 0.0), 0.3));
    }

    #[test]
    fn stored_phi_matches_stored_fields() {
        let theta = 22.5f64.to_radians();
        let mut buf = HistoryBuffer::new(16, 0.1, theta, c(0.0, 0.0), c(0.0, 0.0));
        buf.push(c(0.3, 0.1), c(-0.2, 0.4), c(0.0, 0.0), c(0.0, 0.0));
        assert_eq!(
            buf.phi_at(0),
            phase_signal(c(0.3, 0.1), c(-0.2, 0.4), theta)
        );
    }

    #[test]
    fn hermite_midpoint_reproduces_cubic() {
        // y(t) = t³ on nodes t=1, 1.5 (h = 0.5): the Hermite midpoint must be
        // exact for a cubic.
        let h = 0.5;
        let mut buf = HistoryBuffer::new(8, h, 0.0, c(1.0, 0.0), c(1.0, 0.0));
        let y = |t: f64| t * t * t;
        let dy = |t: f64| 3.0 * t * t;
        buf.push(c(y(1.0), 0.0), c(0.0, 0.0), c(dy(1.0), 0.0), c(0.0, 0.0));
        buf.push(c(y(1.5), 0.0), c(0.0, 0.0), c(dy(1.5), 0.0), c(0.0, 0.0));
        let (mid, _) = buf.fields_at_midpoint(0);
        assert!((mid.re - y(1.25)).abs() < 1e-14, "got {}", mid.re);
    }

    #[test]
    fn ring_wraps_without_losing_recent_nodes() {
        let mut buf = HistoryBuffer::new(4, 1.0, 0.0, c(0.0, 0.0), c(0.0, 0.0));
        let cap = buf.capacity() as i64;
        for i in 0..(3 * cap) {
            buf.push(c(i as f64, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        }
        let last = buf.last_node();
        for back in 0..cap {
            let idx = last - back;
            assert_eq!(buf.fields_at(idx).0.re, idx as f64);
        }
    }
}
