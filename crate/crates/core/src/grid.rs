use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform time grid `t_k = k * dt`, `k = 0..=steps`.
///
/// Times are computed by multiplication, never by accumulation, so two grids
/// built from the same parameters produce bit-identical samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    dt: f64,
    steps: usize,
}

impl TimeGrid {
    /// Grid covering `[0, t_max]` with spacing `dt`; the last sample is the
    /// largest multiple of `dt` not exceeding `t_max` (up to rounding slack).
    pub fn new(t_max: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        if !(t_max >= dt && t_max.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "t_max must be at least dt, got t_max={t_max}, dt={dt}"
            )));
        }
        let steps = (t_max / dt + 1e-9).floor() as usize;
        Ok(Self { dt, steps })
    }

    /// Grid of `points` evenly spaced samples spanning `[0, t_max]` inclusive.
    pub fn with_points(t_max: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidGrid("need at least two points".into()));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "t_max must be positive, got {t_max}"
            )));
        }
        Ok(Self {
            dt: t_max / (points - 1) as f64,
            steps: points - 1,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn t_max(&self) -> f64 {
        self.time(self.steps)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_count_survives_rounding() {
        // 100 / 0.01 evaluates to 9999.999...
        let g = TimeGrid::new(100.0, 0.01).unwrap();
        assert_eq!(g.len(), 10_001);
        assert_eq!(g.time(0), 0.0);
        assert!((g.t_max() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn point_count_grid() {
        let g = TimeGrid::with_points(100.0, 1000).unwrap();
        assert_eq!(g.len(), 1000);
        assert!((g.t_max() - 100.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_spacing() {
        assert!(TimeGrid::new(1.0, 0.0).is_err());
        assert!(TimeGrid::new(0.001, 0.01).is_err());
        assert!(TimeGrid::with_points(1.0, 1).is_err());
    }
}
