//! Uniformly sampled intensity time series of the two polarization channels.

use crate::error::{Error, Result};
use crate::scalar::Real;
use num_complex::Complex;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    X,
    Y,
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Channel::X => write!(f, "x"),
            Channel::Y => write!(f, "y"),
        }
    }
}

/// Raw complex fields, kept only when requested.
#[derive(Debug, Clone, Default)]
pub struct FieldSamples<T> {
    pub e_x: Vec<Complex<T>>,
    pub e_y: Vec<Complex<T>>,
}

#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    /// Sample spacing (ns).
    pub dt: T,
    /// Time of the first sample (ns).
    pub t0: T,
    pub i_x: Vec<T>,
    pub i_y: Vec<T>,
    pub fields: Option<FieldSamples<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.i_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.i_x.is_empty()
    }

    /// Time of the last sample.
    pub fn t_end(&self) -> T {
        if self.is_empty() {
            self.t0
        } else {
            self.t0 + self.dt * T::from_usize(self.len() - 1).unwrap()
        }
    }

    pub fn channel(&self, ch: Channel) -> &[T] {
        match ch {
            Channel::X => &self.i_x,
            Channel::Y => &self.i_y,
        }
    }

    pub fn view(&self, ch: Channel) -> SeriesView<'_, T> {
        SeriesView {
            t0: self.t0,
            dt: self.dt,
            values: self.channel(ch),
        }
    }

    /// CSV export: `t_ns,I_x,I_y` (plus raw field columns when stored),
    /// 15 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        if self.fields.is_some() {
            writeln!(w, "t_ns,I_x,I_y,Re_Ex,Im_Ex,Re_Ey,Im_Ey")?;
        } else {
            writeln!(w, "t_ns,I_x,I_y")?;
        }
        for i in 0..self.len() {
            let t = self.t0 + self.dt * T::from_usize(i).unwrap();
            match &self.fields {
                Some(f) => writeln!(
                    w,
                    "{:.14e},{:.14e},{:.14e},{:.14e},{:.14e},{:.14e},{:.14e}",
                    t, self.i_x[i], self.i_y[i], f.e_x[i].re, f.e_x[i].im, f.e_y[i].re, f.e_y[i].im
                )?,
                None => writeln!(w, "{:.14e},{:.14e},{:.14e}", t, self.i_x[i], self.i_y[i])?,
            }
        }
        Ok(())
    }

    /// Reads the CSV format produced by `write_csv` (intensity columns only).
    pub fn read_csv(path: &std::path::Path) -> Result<Trajectory<T>> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Format {
            path: path.display().to_string(),
            message: "empty file".into(),
        })?;
        if !header.starts_with("t_ns,I_x,I_y") {
            return Err(Error::Format {
                path: path.display().to_string(),
                message: format!("unexpected header: {header}"),
            });
        }
        let mut times = Vec::new();
        let mut i_x = Vec::new();
        let mut i_y = Vec::new();
        for (ln, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let mut next = |name: &str| -> Result<T> {
                let raw = parts.next().ok_or_else(|| Error::Format {
                    path: path.display().to_string(),
                    message: format!("line {}: missing {name}", ln + 2),
                })?;
                raw.trim().parse::<f64>().map(T::from_f64_lossy).map_err(|e| Error::Format {
                    path: path.display().to_string(),
                    message: format!("line {}: {name}: {e}", ln + 2),
                })
            };
            times.push(next("t_ns")?);
            i_x.push(next("I_x")?);
            i_y.push(next("I_y")?);
        }
        if times.len() < 2 {
            return Err(Error::Format {
                path: path.display().to_string(),
                message: "need at least two samples".into(),
            });
        }
        let dt = times[1] - times[0];
        Ok(Trajectory {
            dt,
            t0: times[0],
            i_x,
            i_y,
            fields: None,
        })
    }
}

/// Borrowed view of one channel as a uniformly sampled series.
#[derive(Debug, Clone, Copy)]
pub struct SeriesView<'a, T> {
    pub t0: T,
    pub dt: T,
    pub values: &'a [T],
}

/// Four-point Lagrange cubic on equally spaced samples y(-1), y(0), y(1),
/// y(2), evaluated at fractional position s in [0, 1] between y(0) and y(1).
#[inline]
pub fn cubic_kernel<T: Real>(ym1: T, y0: T, y1: T, y2: T, s: T) -> T {
    let one = T::one();
    let two = T::from_f64_lossy(2.0);
    let half = T::from_f64_lossy(0.5);
    let sixth = T::from_f64_lossy(1.0 / 6.0);
    let wm1 = -s * (s - one) * (s - two) * sixth;
    let w0 = (s + one) * (s - one) * (s - two) * half;
    let w1 = -(s + one) * s * (s - two) * half;
    let w2 = (s + one) * s * (s - one) * sixth;
    ym1 * wm1 + y0 * w0 + y1 * w1 + y2 * w2
}

impl<'a, T: Real> SeriesView<'a, T> {
    /// Cubic interpolation at an arbitrary time. Requires one sample of
    /// margin on the left and two on the right of the bracketing interval.
    pub fn sample_cubic(&self, t: T) -> Result<T> {
        let u = (t - self.t0) / self.dt;
        let i = u.floor();
        let idx = i.to_f64_lossy() as i64;
        let n = self.values.len() as i64;
        if idx < 1 || idx > n - 3 {
            return Err(Error::OutOfRange {
                t_ns: t.to_f64_lossy(),
                min_ns: (self.t0 + self.dt).to_f64_lossy(),
                max_ns: (self.t0 + self.dt * T::from_i64(n - 3).unwrap()).to_f64_lossy(),
            });
        }
        let s = u - i;
        let k = idx as usize;
        Ok(cubic_kernel(
            self.values[k - 1],
            self.values[k],
            self.values[k + 1],
            self.values[k + 2],
            s,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_traj() -> Trajectory<f64> {
        let n = 64;
        Trajectory {
            dt: 0.25,
            t0: 10.0,
            i_x: (0..n).map(|i| i as f64).collect(),
            i_y: (0..n).map(|i| (i * i) as f64).collect(),
            fields: None,
        }
    }

    #[test]
    fn cubic_reproduces_cubic_polynomial() {
        let p = |t: f64| 2.0 - 0.5 * t + 3.0 * t * t - 0.25 * t * t * t;
        let dt = 0.1;
        let values: Vec<f64> = (0..50).map(|i| p(i as f64 * dt)).collect();
        let view = SeriesView {
            t0: 0.0,
            dt,
            values: &values,
        };
        for &t in &[0.13, 1.071, 3.999, 4.61] {
            let got = view.sample_cubic(t).unwrap();
            assert!((got - p(t)).abs() < 1e-12, "t={t}: {got} vs {}", p(t));
        }
    }

    #[test]
    fn cubic_matches_dense_resampling_of_smooth_signal() {
        // Oracle: interpolating the coarse grid must agree with the value on
        // a 100x denser grid to O(dt^4).
        let f = |t: f64| (2.1 * t).sin() + 0.3 * (5.3 * t).cos();
        let dt = 0.01;
        let coarse: Vec<f64> = (0..2000).map(|i| f(i as f64 * dt)).collect();
        let view = SeriesView {
            t0: 0.0,
            dt,
            values: &coarse,
        };
        let mut worst = 0.0f64;
        for j in 0..1000 {
            let t = 0.05 + j as f64 * 0.0173;
            let got = view.sample_cubic(t).unwrap();
            worst = worst.max((got - f(t)).abs());
        }
        // (5.3*dt)^4 / 24 ~ 3e-7; allow slack.
        assert!(worst < 1e-6, "worst interpolation error {worst}");
    }

    #[test]
    fn cubic_is_exact_on_grid_points() {
        let tr = ramp_traj();
        let v = tr.view(Channel::Y);
        let t = tr.t0 + 7.0 * tr.dt;
        assert!((v.sample_cubic(t).unwrap() - 49.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_errors() {
        let tr = ramp_traj();
        let v = tr.view(Channel::X);
        assert!(v.sample_cubic(tr.t0).is_err());
        assert!(v.sample_cubic(tr.t_end()).is_err());
        assert!(v.sample_cubic(tr.t0 + 2.0).is_ok());
    }

    #[test]
    fn csv_roundtrip() {
        let tr = ramp_traj();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let dir = std::env::temp_dir().join("chaosbits_traj_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("traj.csv");
        std::fs::write(&path, &buf).unwrap();
        let back = Trajectory::<f64>::read_csv(&path).unwrap();
        assert_eq!(back.len(), tr.len());
        assert!((back.dt - tr.dt).abs() < 1e-12);
        assert!((back.i_y[5] - tr.i_y[5]).abs() < 1e-9);
    }
}
