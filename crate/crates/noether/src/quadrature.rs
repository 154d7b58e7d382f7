//! Cumulative composite-Simpson quadrature along trajectories.
//!
//! The table is built once per (integrand, trajectory) pair on a uniform
//! refinement of the working interval; afterwards every prefix integral is a
//! table lookup plus a local quadratic correction for the fractional node.

use crate::error::{Error, Result};

/// Relative disagreement between the full-resolution and half-resolution
/// Simpson totals that counts as a failed self-check.
pub const CROSS_CHECK_TOL: f64 = 1e-7;

/// Default number of refinement intervals (kept a multiple of 4 so the
/// half-resolution cross-check reuses the same samples).
pub const DEFAULT_REFINEMENT: usize = 4096;

/// Cumulative integral `t ↦ ∫_lo^t f` on `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct CumulativeIntegral {
    lo: f64,
    h: f64,
    samples: Vec<f64>,
    cumulative: Vec<f64>,
}

impl CumulativeIntegral {
    /// Sample `f` on `n + 1` uniform nodes (`n` a multiple of 4) and build the
    /// prefix table. Fails with [`Error::QuadratureFailure`] when halving the
    /// resolution moves the total by more than `CROSS_CHECK_TOL·(1 + |total|)`.
    pub fn build(lo: f64, hi: f64, n: usize, mut f: impl FnMut(f64) -> Result<f64>) -> Result<Self> {
        assert!(hi > lo, "empty quadrature interval");
        let n = n.max(8).div_ceil(4) * 4;
        let h = (hi - lo) / n as f64;
        let mut samples = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let t = if j == n { hi } else { lo + j as f64 * h };
            samples.push(f(t)?);
        }

        let mut cumulative = vec![0.0; n + 1];
        for k in (0..n).step_by(2) {
            let base = cumulative[k];
            // Half-interval rule for the odd node, full Simpson for the pair.
            cumulative[k + 1] =
                base + h / 12.0 * (5.0 * samples[k] + 8.0 * samples[k + 1] - samples[k + 2]);
            cumulative[k + 2] =
                base + h / 3.0 * (samples[k] + 4.0 * samples[k + 1] + samples[k + 2]);
        }

        let total = cumulative[n];
        let mut coarse = 0.0;
        for k in (0..n).step_by(4) {
            coarse += (2.0 * h) / 3.0 * (samples[k] + 4.0 * samples[k + 2] + samples[k + 4]);
        }
        let disagreement = (total - coarse).abs();
        let threshold = CROSS_CHECK_TOL * (1.0 + total.abs());
        if disagreement > threshold {
            return Err(Error::QuadratureFailure {
                disagreement,
                threshold,
            });
        }

        Ok(Self {
            lo,
            h,
            samples,
            cumulative,
        })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.lo + self.h * (self.samples.len() - 1) as f64)
    }

    /// Cumulative values at the table nodes.
    pub fn cumulative_values(&self) -> &[f64] {
        &self.cumulative
    }

    /// `∫_lo^t f`. The fractional part of the last interval is integrated with
    /// the quadratic through the three nearest samples.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let n = self.samples.len() - 1;
        let (lo, hi) = self.range();
        let slack = 1e-12 * (hi - lo).max(1.0);
        if t < lo - slack || t > hi + slack {
            return Err(Error::PadExceeded { t, lo, hi });
        }
        let t = t.clamp(lo, hi);
        let pos = (t - lo) / self.h;
        let j = (pos.floor() as usize).min(n - 1);
        let s = pos - j as f64;

        // Quadratic through samples at offsets (−1, 0, 1) around node j,
        // shifted to (0, 1, 2) at the left boundary.
        let (fm, f0, fp, s) = if j == 0 {
            (self.samples[0], self.samples[1], self.samples[2], s - 1.0)
        } else {
            (self.samples[j - 1], self.samples[j], self.samples[j + 1], s)
        };
        let c1 = 0.5 * (fp - fm);
        let c2 = 0.5 * (fp - 2.0 * f0 + fm);
        let (base, from) = if j == 0 {
            (0.0, -1.0)
        } else {
            (self.cumulative[j], 0.0)
        };
        let part = |x: f64| self.h * (f0 * x + c1 * x * x / 2.0 + c2 * x * x * x / 3.0);
        Ok(base + part(s) - part(from))
    }

    /// `∫_a^b f` through the prefix table.
    pub fn between(&self, a: f64, b: f64) -> Result<f64> {
        Ok(self.eval(b)? - self.eval(a)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn integrates_sine_exactly_enough() {
        let ci = CumulativeIntegral::build(0.0, PI, 4096, |t| Ok(t.sin())).unwrap();
        assert_abs_diff_eq!(ci.eval(PI).unwrap(), 2.0, epsilon = 1e-12);
        for &t in &[0.1, 0.7, 1.234, 2.9, PI] {
            assert_abs_diff_eq!(ci.eval(t).unwrap(), 1.0 - t.cos(), epsilon = 1e-11);
        }
        assert_abs_diff_eq!(ci.between(0.5, 2.5).unwrap(), 0.5f64.cos() - 2.5f64.cos(), epsilon = 1e-11);
    }

    #[test]
    fn cross_check_catches_unresolved_integrand() {
        let err = CumulativeIntegral::build(0.0, 1.0, 8, |t| Ok((5000.0 * t).sin()));
        assert!(matches!(err, Err(Error::QuadratureFailure { .. })));
    }

    #[test]
    fn out_of_range_eval_is_rejected() {
        let ci = CumulativeIntegral::build(0.0, 1.0, 64, |_| Ok(1.0)).unwrap();
        assert!(ci.eval(1.5).is_err());
        assert!(ci.eval(-0.5).is_err());
    }
}
