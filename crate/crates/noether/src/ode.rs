//! Generic ODE solvers: embedded Dormand–Prince 5(4) with step rejection and
//! classical fixed-step RK4. Both record the derivative at every accepted node
//! so callers can build Hermite dense output.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Dormand–Prince 5(4) coefficients.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
/// b(5th) − b(4th), applied to the stages for the embedded error estimate.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const SAFETY: f64 = 0.9;
const MIN_SCALE: f64 = 0.2;
const MAX_SCALE: f64 = 5.0;

#[derive(Debug, Clone)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Cap on |h|; keeps the grid fine enough for accurate dense output even
    /// where the solution is locally smooth.
    pub max_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: None,
            max_steps: 4_000_000,
        }
    }
}

/// Accepted nodes of a solve: times, states and state derivatives.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub derivs: Vec<DVector<f64>>,
}

fn error_norm(err: &DVector<f64>, y: &DVector<f64>, y_new: &DVector<f64>, opts: &OdeOptions) -> f64 {
    let mut acc = 0.0;
    for i in 0..err.len() {
        let scale = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
        let r = err[i] / scale;
        acc += r * r;
    }
    (acc / err.len() as f64).sqrt()
}

/// Integrate `dy/dt = f(t, y)` from `t0` to `t_end` (either direction) with the
/// embedded Dormand–Prince pair. Returns every accepted node.
pub fn dopri5<F>(mut f: F, t0: f64, y0: DVector<f64>, t_end: f64, opts: &OdeOptions) -> Result<OdeSolution>
where
    F: FnMut(f64, &DVector<f64>) -> Result<DVector<f64>>,
{
    let span = t_end - t0;
    let mut sol = OdeSolution {
        times: vec![t0],
        states: vec![y0.clone()],
        derivs: Vec::new(),
    };
    let k1_first = f(t0, &y0)?;
    sol.derivs.push(k1_first.clone());
    if span == 0.0 {
        return Ok(sol);
    }
    let dir = span.signum();
    let h_max = opts.max_step.unwrap_or(span.abs() / 16.0).min(span.abs());
    let h_min = span.abs() * 1e-14;

    let mut t = t0;
    let mut y = y0;
    let mut k1 = k1_first;
    let mut h = (span.abs() / 1000.0).min(h_max).max(h_min * 16.0);
    let mut steps = 0usize;

    while (t_end - t) * dir > 0.0 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::StepFailure {
                t,
                detail: format!("exceeded {} steps", opts.max_steps),
            });
        }
        h = h.min(h_max).min((t_end - t).abs());
        let hs = h * dir;

        let stage = |f: &mut F, t: f64, y: &DVector<f64>| f(t, y);
        let attempt = (|| -> Result<(DVector<f64>, DVector<f64>, DVector<f64>)> {
            let y2 = &y + hs * (A21 * &k1);
            let k2 = stage(&mut f, t + C2 * hs, &y2)?;
            let y3 = &y + hs * (A31 * &k1 + A32 * &k2);
            let k3 = stage(&mut f, t + C3 * hs, &y3)?;
            let y4 = &y + hs * (A41 * &k1 + A42 * &k2 + A43 * &k3);
            let k4 = stage(&mut f, t + C4 * hs, &y4)?;
            let y5 = &y + hs * (A51 * &k1 + A52 * &k2 + A53 * &k3 + A54 * &k4);
            let k5 = stage(&mut f, t + C5 * hs, &y5)?;
            let y6 = &y + hs * (A61 * &k1 + A62 * &k2 + A63 * &k3 + A64 * &k4 + A65 * &k5);
            let k6 = stage(&mut f, t + hs, &y6)?;
            let y_new = &y + hs * (B1 * &k1 + B3 * &k3 + B4 * &k4 + B5 * &k5 + B6 * &k6);
            let k7 = stage(&mut f, t + hs, &y_new)?;
            let err = hs * (E1 * &k1 + E3 * &k3 + E4 * &k4 + E5 * &k5 + E6 * &k6 + E7 * &k7);
            Ok((y_new, k7, err))
        })();

        match attempt {
            Ok((y_new, k7, err)) => {
                let norm = error_norm(&err, &y, &y_new, opts);
                if norm <= 1.0 {
                    t += hs;
                    y = y_new;
                    k1 = k7;
                    sol.times.push(t);
                    sol.states.push(y.clone());
                    sol.derivs.push(k1.clone());
                    let scale = if norm == 0.0 {
                        MAX_SCALE
                    } else {
                        (SAFETY * norm.powf(-0.2)).clamp(MIN_SCALE, MAX_SCALE)
                    };
                    h *= scale;
                } else {
                    let scale = (SAFETY * norm.powf(-0.2)).clamp(MIN_SCALE, 1.0);
                    h *= scale;
                    if h < h_min {
                        return Err(Error::StepFailure {
                            t,
                            detail: format!("step underflow (h = {h:.3e})"),
                        });
                    }
                }
            }
            Err(e) => {
                // The rhs failed inside the step, usually near a guarded
                // singularity. Retry with a smaller step before giving up.
                h *= 0.25;
                if h < h_min {
                    return Err(e);
                }
            }
        }
    }
    Ok(sol)
}

/// Fixed-step classical RK4 from `t0` to `t_end` (either direction).
pub fn rk4<F>(mut f: F, t0: f64, y0: DVector<f64>, t_end: f64, h: f64) -> Result<OdeSolution>
where
    F: FnMut(f64, &DVector<f64>) -> Result<DVector<f64>>,
{
    assert!(h > 0.0, "step must be positive");
    let span = t_end - t0;
    let dir = if span < 0.0 { -1.0 } else { 1.0 };
    let mut sol = OdeSolution {
        times: vec![t0],
        states: vec![y0.clone()],
        derivs: vec![f(t0, &y0)?],
    };
    if span == 0.0 {
        return Ok(sol);
    }
    let n = (span.abs() / h).ceil().max(1.0) as usize;
    let hs = span / n as f64;
    let mut t = t0;
    let mut y = y0;
    for i in 0..n {
        let k1 = sol.derivs.last().unwrap().clone();
        let k2 = f(t + 0.5 * hs, &(&y + (0.5 * hs) * &k1))?;
        let k3 = f(t + 0.5 * hs, &(&y + (0.5 * hs) * &k2))?;
        let k4 = f(t + hs, &(&y + hs * &k3))?;
        y = &y + (hs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = if i + 1 == n { t_end } else { t0 + (i + 1) as f64 * hs };
        sol.times.push(t);
        sol.states.push(y.clone());
        sol.derivs.push(f(t, &y)?);
    }
    let _ = dir;
    Ok(sol)
}
