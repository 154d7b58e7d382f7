//! Trajectories on padded intervals with Hermite dense output.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions};

use super::LagrangianSystem;

static NEXT_TRAJECTORY_ID: AtomicU64 = AtomicU64::new(1);

/// Step selection for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub enum StepControl {
    /// Embedded Dormand–Prince with rejection.
    Adaptive { rel_tol: f64, abs_tol: f64 },
    /// Classical RK4 with the given step.
    Fixed { h: f64 },
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl::Adaptive {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
        }
    }
}

/// Initial data plus the working interval for one trajectory.
///
/// The trajectory is materialized on `[a − pad_left, b + pad_right]` so that
/// time-shifted families and ε-stencils can sample slightly beyond `[a, b]`.
/// Padding may be asymmetric: systems guarded on one side (e.g. a singular
/// time origin) keep a sliver there while families that reach forward get a
/// generous margin on the other.
#[derive(Debug, Clone)]
pub struct InitialValueProblem {
    pub t0: f64,
    pub q0: DVector<f64>,
    pub qdot0: DVector<f64>,
    pub interval: (f64, f64),
    pub pad_left: f64,
    pub pad_right: f64,
    pub step: StepControl,
}

impl InitialValueProblem {
    /// Default padding is 20% of the interval width on both sides.
    pub fn new(t0: f64, q0: DVector<f64>, qdot0: DVector<f64>, a: f64, b: f64) -> Self {
        assert!(b > a, "interval must be nonempty");
        Self {
            t0,
            q0,
            qdot0,
            interval: (a, b),
            pad_left: 0.2 * (b - a),
            pad_right: 0.2 * (b - a),
            step: StepControl::default(),
        }
    }

    pub fn with_pad(mut self, pad: f64) -> Self {
        self.pad_left = pad;
        self.pad_right = pad;
        self
    }

    pub fn with_pads(mut self, left: f64, right: f64) -> Self {
        self.pad_left = left;
        self.pad_right = right;
        self
    }

    pub fn with_step(mut self, step: StepControl) -> Self {
        self.step = step;
        self
    }
}

#[derive(Debug, Clone)]
struct Node {
    t: f64,
    q: DVector<f64>,
    qdot: DVector<f64>,
    /// Acceleration at the node, recycled from the integrator stages.
    accel: DVector<f64>,
}

/// A sampled trajectory with Hermite dense output built from `(q, q̇, q̈)`
/// node data; evaluating at a grid time reproduces the stored state exactly
/// and the velocity is the exact time derivative of the position interpolant.
pub struct Trajectory {
    id: u64,
    system: Arc<LagrangianSystem>,
    interval: (f64, f64),
    pads: (f64, f64),
    nodes: Vec<Node>,
}

impl std::fmt::Debug for Trajectory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Trajectory")
            .field("id", &self.id)
            .field("system", &self.system.name())
            .field("interval", &self.interval)
            .field("pads", &self.pads)
            .field("nodes", &self.nodes.len())
            .finish()
    }
}

impl Trajectory {
    /// Stable identity used by per-trajectory caches.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn system(&self) -> &Arc<LagrangianSystem> {
        &self.system
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    /// `(left, right)` padding widths.
    pub fn pads(&self) -> (f64, f64) {
        self.pads
    }

    /// Bounds of the materialized (padded) grid.
    pub fn padded_interval(&self) -> (f64, f64) {
        (self.nodes[0].t, self.nodes[self.nodes.len() - 1].t)
    }

    pub fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(|n| n.t)
    }

    pub fn grid_len(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_state(&self, idx: usize) -> (f64, &DVector<f64>, &DVector<f64>) {
        let n = &self.nodes[idx];
        (n.t, &n.q, &n.qdot)
    }

    fn segment(&self, t: f64) -> Result<usize> {
        let (lo, hi) = self.padded_interval();
        let slack = 1e-12 * (hi - lo).abs().max(1.0);
        if t < lo - slack || t > hi + slack {
            return Err(Error::PadExceeded { t, lo, hi });
        }
        // Index of the segment [t_k, t_{k+1}] containing t.
        let k = self.nodes.partition_point(|n| n.t <= t);
        Ok(k.clamp(1, self.nodes.len() - 1) - 1)
    }

    /// Interpolated position at `t`.
    pub fn position(&self, t: f64) -> Result<DVector<f64>> {
        Ok(self.state(t)?.0)
    }

    /// Interpolated velocity at `t`; exactly the time derivative of
    /// [`position`](Self::position), so t-differencing families built on the
    /// interpolant stays self-consistent.
    pub fn velocity(&self, t: f64) -> Result<DVector<f64>> {
        Ok(self.state(t)?.1)
    }

    /// Interpolated `(q, q̇)` at `t`.
    pub fn state(&self, t: f64) -> Result<(DVector<f64>, DVector<f64>)> {
        let k = self.segment(t)?;
        let (l, r) = (&self.nodes[k], &self.nodes[k + 1]);
        Ok(hermite5(t, l, r))
    }

    /// Euler–Lagrange residual `‖d/dt ∂_q̇L − ∂_qL‖∞` at `t`, with the time
    /// derivative taken by central differences along the interpolant.
    pub fn el_residual(&self, t: f64) -> Result<f64> {
        let h = 1e-5;
        let sys = &self.system;
        let (qp, dp) = self.state(t + h)?;
        let (qm, dm) = self.state(t - h)?;
        let pp = sys.grad_qdot(t + h, &qp, &dp)?;
        let pm = sys.grad_qdot(t - h, &qm, &dm)?;
        let (q, qd) = self.state(t)?;
        let gq = sys.grad_q(t, &q, &qd)?;
        let r = (pp - pm) / (2.0 * h) - gq;
        Ok(r.amax())
    }

    /// Max EL residual over all interior grid midpoints.
    pub fn max_el_residual(&self) -> Result<f64> {
        let (lo, hi) = self.padded_interval();
        let mut worst = 0.0f64;
        for w in self.nodes.windows(2) {
            let mid = 0.5 * (w[0].t + w[1].t);
            if mid - 1e-5 < lo || mid + 1e-5 > hi {
                continue;
            }
            worst = worst.max(self.el_residual(mid)?);
        }
        Ok(worst)
    }

    /// Build a trajectory from closed-form `q(t)` and `q̇(t)`, sampled on a
    /// uniform grid. Used for non-Euler–Lagrange test curves; node
    /// accelerations come from differencing the supplied velocity.
    pub fn from_fn(
        system: Arc<LagrangianSystem>,
        interval: (f64, f64),
        pad: f64,
        nodes: usize,
        q_fn: impl Fn(f64) -> DVector<f64>,
        qdot_fn: impl Fn(f64) -> DVector<f64>,
    ) -> Self {
        assert!(nodes >= 2);
        let (a, b) = interval;
        let (lo, hi) = (a - pad, b + pad);
        let pads = (pad, pad);
        let dt = (hi - lo) / (nodes - 1) as f64;
        let h = 1e-6;
        let node_list = (0..nodes)
            .map(|i| {
                let t = if i + 1 == nodes { hi } else { lo + i as f64 * dt };
                Node {
                    t,
                    q: q_fn(t),
                    qdot: qdot_fn(t),
                    accel: (qdot_fn(t + h) - qdot_fn(t - h)) / (2.0 * h),
                }
            })
            .collect();
        Self {
            id: NEXT_TRAJECTORY_ID.fetch_add(1, Ordering::Relaxed),
            system,
            interval,
            pads,
            nodes: node_list,
        }
    }
}

/// Two-point quintic Hermite on `[l.t, r.t]` matching value, velocity and
/// acceleration at both nodes. Returns `(q, q̇)` with `q̇ = dq/dt` of the
/// interpolant itself.
fn hermite5(t: f64, l: &Node, r: &Node) -> (DVector<f64>, DVector<f64>) {
    let h = r.t - l.t;
    let s = (t - l.t) / h;
    let n = l.q.len();
    let mut q = DVector::zeros(n);
    let mut qd = DVector::zeros(n);
    let (s2, s3, s4, s5) = (s * s, s * s * s, s * s * s * s, s * s * s * s * s);
    for i in 0..n {
        let y0 = l.q[i];
        let d0 = l.qdot[i] * h;
        let a0 = l.accel[i] * h * h;
        let big_a = r.q[i] - y0 - d0 - 0.5 * a0;
        let big_b = r.qdot[i] * h - d0 - a0;
        let big_c = r.accel[i] * h * h - a0;
        let c3 = 10.0 * big_a - 4.0 * big_b + 0.5 * big_c;
        let c4 = -15.0 * big_a + 7.0 * big_b - big_c;
        let c5 = 6.0 * big_a - 3.0 * big_b + 0.5 * big_c;
        q[i] = y0 + d0 * s + 0.5 * a0 * s2 + c3 * s3 + c4 * s4 + c5 * s5;
        qd[i] = (d0 + a0 * s + 3.0 * c3 * s2 + 4.0 * c4 * s3 + 5.0 * c5 * s4) / h;
    }
    (q, qd)
}

/// Integrate the Euler–Lagrange equations of `system` over the padded interval
/// of `ivp`. The state is `y = (q, q̇)`; accelerations at the accepted nodes are
/// recycled into the dense-output data.
pub fn integrate(system: &Arc<LagrangianSystem>, ivp: &InitialValueProblem) -> Result<Trajectory> {
    let n = system.dim();
    assert_eq!(ivp.q0.len(), n);
    assert_eq!(ivp.qdot0.len(), n);
    if !system.in_domain(ivp.t0, &ivp.q0, &ivp.qdot0) {
        return Err(Error::DomainViolation {
            t: ivp.t0,
            detail: "initial data violate the domain guard".into(),
        });
    }
    let (a, b) = ivp.interval;
    let (lo, hi) = (a - ivp.pad_left, b + ivp.pad_right);
    if ivp.t0 < lo || ivp.t0 > hi {
        return Err(Error::Config(format!(
            "t0 = {} outside padded interval [{lo}, {hi}]",
            ivp.t0
        )));
    }

    let sys = system.clone();
    let rhs = move |t: f64, y: &DVector<f64>| -> Result<DVector<f64>> {
        let q = y.rows(0, n).into_owned();
        let qd = y.rows(n, n).into_owned();
        let acc = sys.lagrange_rhs(t, &q, &qd)?;
        let mut dy = DVector::zeros(2 * n);
        dy.rows_mut(0, n).copy_from(&qd);
        dy.rows_mut(n, n).copy_from(&acc);
        Ok(dy)
    };

    let mut y0 = DVector::zeros(2 * n);
    y0.rows_mut(0, n).copy_from(&ivp.q0);
    y0.rows_mut(n, n).copy_from(&ivp.qdot0);

    let solve = |t_end: f64| -> Result<ode::OdeSolution> {
        match ivp.step {
            StepControl::Adaptive { rel_tol, abs_tol } => {
                let opts = OdeOptions {
                    rel_tol,
                    abs_tol,
                    max_step: Some((hi - lo) / 64.0),
                    ..OdeOptions::default()
                };
                ode::dopri5(&rhs, ivp.t0, y0.clone(), t_end, &opts)
            }
            StepControl::Fixed { h } => ode::rk4(&rhs, ivp.t0, y0.clone(), t_end, h),
        }
    };

    let mut nodes: Vec<Node> = Vec::new();
    if ivp.t0 > lo {
        let back = solve(lo)?;
        for i in (1..back.times.len()).rev() {
            nodes.push(make_node(n, back.times[i], &back.states[i], &back.derivs[i]));
        }
    }
    let fwd = solve(hi)?;
    for i in 0..fwd.times.len() {
        nodes.push(make_node(n, fwd.times[i], &fwd.states[i], &fwd.derivs[i]));
    }
    debug_assert!(nodes.windows(2).all(|w| w[0].t < w[1].t));

    Ok(Trajectory {
        id: NEXT_TRAJECTORY_ID.fetch_add(1, Ordering::Relaxed),
        system: system.clone(),
        interval: ivp.interval,
        pads: (ivp.pad_left, ivp.pad_right),
        nodes,
    })
}

fn make_node(n: usize, t: f64, y: &DVector<f64>, dy: &DVector<f64>) -> Node {
    Node {
        t,
        q: y.rows(0, n).into_owned(),
        qdot: y.rows(n, n).into_owned(),
        accel: dy.rows(n, n).into_owned(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::{free_particle, harmonic_oscillator, kepler, vecn};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::TAU;

    #[test]
    fn oscillator_closes_after_one_period() {
        let sys = Arc::new(harmonic_oscillator());
        let ivp = InitialValueProblem::new(0.0, vecn(&[0.0]), vecn(&[1.0]), 0.0, TAU);
        let traj = integrate(&sys, &ivp).unwrap();
        let (q, qd) = traj.state(TAU).unwrap();
        assert_abs_diff_eq!(q[0], 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(qd[0], 1.0, epsilon = 1e-8);
        // Dense output against the exact solution sin t at awkward times.
        for &t in &[0.123, 1.7, 3.9, 5.55, -0.8, TAU + 0.9] {
            let (q, qd) = traj.state(t).unwrap();
            assert_abs_diff_eq!(q[0], t.sin(), epsilon = 1e-8);
            assert_abs_diff_eq!(qd[0], t.cos(), epsilon = 1e-8);
        }
    }

    #[test]
    fn circular_kepler_orbit_returns_to_start() {
        let sys = Arc::new(kepler(1.0));
        let ivp = InitialValueProblem::new(0.0, vecn(&[1.0, 0.0]), vecn(&[0.0, 1.0]), 0.0, TAU);
        let traj = integrate(&sys, &ivp).unwrap();
        let (q, qd) = traj.state(TAU).unwrap();
        assert_abs_diff_eq!(q[0], 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(q[1], 0.0, epsilon = 1e-7);
        assert_abs_diff_eq!(qd[0], 0.0, epsilon = 1e-7);
        assert_abs_diff_eq!(qd[1], 1.0, epsilon = 1e-7);
    }

    #[test]
    fn free_particle_is_exact() {
        let sys = Arc::new(free_particle(1));
        let ivp = InitialValueProblem::new(0.0, vecn(&[0.0]), vecn(&[1.0]), 0.0, 1.0);
        let traj = integrate(&sys, &ivp).unwrap();
        let (q, _) = traj.state(1.0).unwrap();
        assert_abs_diff_eq!(q[0], 1.0, epsilon = 1e-13);
    }

    #[test]
    fn grid_times_reproduce_stored_states() {
        let sys = Arc::new(harmonic_oscillator());
        let ivp = InitialValueProblem::new(0.0, vecn(&[0.0]), vecn(&[1.0]), 0.0, TAU);
        let traj = integrate(&sys, &ivp).unwrap();
        for idx in [0, traj.grid_len() / 2, traj.grid_len() - 1] {
            let (t, q, qd) = traj.node_state(idx);
            let (qi, qdi) = traj.state(t).unwrap();
            assert_abs_diff_eq!(qi[0], q[0], epsilon = 1e-14);
            assert_abs_diff_eq!(qdi[0], qd[0], epsilon = 1e-14);
        }
    }

    #[test]
    fn el_residual_small_on_motions() {
        let sys = Arc::new(kepler(1.0));
        let ivp = InitialValueProblem::new(0.0, vecn(&[1.0, 0.0]), vecn(&[0.0, 1.2]), 0.0, 10.0);
        let traj = integrate(&sys, &ivp).unwrap();
        assert!(traj.max_el_residual().unwrap() < 1e-5);
    }

    #[test]
    fn sampling_outside_pad_fails() {
        let sys = Arc::new(harmonic_oscillator());
        let ivp = InitialValueProblem::new(0.0, vecn(&[0.0]), vecn(&[1.0]), 0.0, 1.0).with_pad(0.1);
        let traj = integrate(&sys, &ivp).unwrap();
        assert!(matches!(traj.state(1.2), Err(Error::PadExceeded { .. })));
        assert!(traj.state(1.05).is_ok());
    }

    #[test]
    fn guard_violating_initial_data_is_rejected() {
        let sys = Arc::new(kepler(1.0));
        let ivp = InitialValueProblem::new(0.0, vecn(&[0.0, 0.0]), vecn(&[0.0, 1.0]), 0.0, 1.0);
        assert!(matches!(
            integrate(&sys, &ivp),
            Err(Error::DomainViolation { .. })
        ));
    }

    #[test]
    fn fixed_step_rk4_mode() {
        let sys = Arc::new(harmonic_oscillator());
        let ivp = InitialValueProblem::new(0.0, vecn(&[0.0]), vecn(&[1.0]), 0.0, TAU)
            .with_step(StepControl::Fixed { h: 1e-3 });
        let traj = integrate(&sys, &ivp).unwrap();
        let (q, _) = traj.state(TAU).unwrap();
        assert_abs_diff_eq!(q[0], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn from_fn_builds_non_el_curves() {
        let sys = Arc::new(harmonic_oscillator());
        let traj = Trajectory::from_fn(
            sys,
            (0.0, 2.0),
            0.4,
            512,
            |t| vecn(&[t * t]),
            |t| vecn(&[2.0 * t]),
        );
        let (q, qd) = traj.state(1.3).unwrap();
        assert_abs_diff_eq!(q[0], 1.69, epsilon = 1e-9);
        assert_abs_diff_eq!(qd[0], 2.6, epsilon = 1e-9);
        // The EL residual of q = t² for the oscillator is |−q − 2| = t² + 2.
        assert!(traj.el_residual(1.0).unwrap() > 2.9);
    }
}
