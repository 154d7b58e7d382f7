//! Space changes, time changes, gauge terms and the invariance residuals
//! built from them.
//!
//! Everything here works on ε-families attached to a base trajectory. The
//! derivative in ε at ε = 0 is taken by central differences (step `eps0`)
//! unless a form is exact by construction; velocities of a perturbed family
//! come from central differences in t (step `h_t`), so user-supplied families
//! only ever provide positions.

use std::sync::Arc;

use nalgebra::DVector;

use crate::dynamics::{LagrangianSystem, Trajectory, VectorFn};
use crate::error::{Error, Result};

/// Default ε step for central differences of families. Together with
/// `DEFAULT_HT` this balances truncation against the ε_mach/(h_t·ε₀)
/// roundoff floor of doubly-differenced quantities.
pub const DEFAULT_EPS0: f64 = 1e-4;
/// Default t step for differencing perturbed families and gauge terms.
pub const DEFAULT_HT: f64 = 1e-4;

/// General ε-family evaluator: `(ε, t, trajectory) → q_ε(t)`.
pub type FamilyFn = dyn Fn(f64, f64, &Trajectory) -> Result<DVector<f64>> + Send + Sync;
/// Gauge evaluator `(ε, t, trajectory) → G(ε, t)`.
pub type GaugeFn = dyn Fn(f64, f64, &Trajectory) -> Result<f64> + Send + Sync;
/// Time-change evaluator `(ε, t, trajectory) → time`. Time changes may be
/// built from the motion itself (e.g. `t + ε·q(t)·u`), hence the trajectory
/// argument and fallibility.
pub type TimeFn = dyn Fn(f64, f64, &Trajectory) -> Result<f64> + Send + Sync;
/// Evaluator of `∂_ε(·)|_{ε=0}` along a trajectory.
pub type DEpsFn = dyn Fn(f64, &Trajectory) -> Result<f64> + Send + Sync;

/// How a one-parameter family of trajectories is specified.
#[derive(Clone)]
pub enum SpaceForm {
    /// `q_ε(t) = q(t) + ε·φ(t, q, q̇)`.
    Pointwise(Arc<VectorFn>),
    /// `q_ε(t) = q(t + ε)`.
    TimeShift,
    /// Fully general family, possibly depending on the whole trajectory.
    Map(Arc<FamilyFn>),
}

#[derive(Clone)]
pub struct SpaceChange {
    pub form: SpaceForm,
    pub eps0: f64,
    pub h_t: f64,
    /// Optional closed-form `q̇_ε(t)`; when absent the family velocity comes
    /// from t-differencing, which is accurate to O(h_t²) and carries an
    /// ε_mach/(h_t·ε₀) roundoff floor through later ε-differences.
    velocity_fn: Option<Arc<FamilyFn>>,
}

impl SpaceChange {
    pub fn pointwise(
        phi: impl Fn(f64, &DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            form: SpaceForm::Pointwise(Arc::new(phi)),
            eps0: DEFAULT_EPS0,
            h_t: DEFAULT_HT,
            velocity_fn: None,
        }
    }

    pub fn time_shift() -> Self {
        Self {
            form: SpaceForm::TimeShift,
            eps0: DEFAULT_EPS0,
            h_t: DEFAULT_HT,
            velocity_fn: None,
        }
    }

    pub fn map(
        f: impl Fn(f64, f64, &Trajectory) -> Result<DVector<f64>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            form: SpaceForm::Map(Arc::new(f)),
            eps0: DEFAULT_EPS0,
            h_t: DEFAULT_HT,
            velocity_fn: None,
        }
    }

    pub fn with_eps0(mut self, eps0: f64) -> Self {
        self.eps0 = eps0;
        self
    }

    /// Supply the family velocity in closed form.
    pub fn with_velocity(
        mut self,
        f: impl Fn(f64, f64, &Trajectory) -> Result<DVector<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.velocity_fn = Some(Arc::new(f));
        self
    }

    /// `q_ε(t)` along the base trajectory.
    pub fn eval(&self, eps: f64, t: f64, traj: &Trajectory) -> Result<DVector<f64>> {
        match &self.form {
            SpaceForm::Pointwise(phi) => {
                let (q, qd) = traj.state(t)?;
                Ok(&q + eps * phi(t, &q, &qd))
            }
            SpaceForm::TimeShift => traj.position(t + eps),
            SpaceForm::Map(f) => f(eps, t, traj),
        }
    }

    /// `q̇_ε(t)`: the closed form when supplied, otherwise central
    /// differencing of the family in t.
    pub fn velocity(&self, eps: f64, t: f64, traj: &Trajectory) -> Result<DVector<f64>> {
        if let Some(v) = &self.velocity_fn {
            return v(eps, t, traj);
        }
        let h = self.h_t;
        Ok((self.eval(eps, t + h, traj)? - self.eval(eps, t - h, traj)?) / (2.0 * h))
    }

    /// `∂_ε q_ε(t) |_{ε=0}`: exact for the pointwise form, central difference
    /// at `eps0` otherwise.
    pub fn d_eps(&self, traj: &Trajectory, t: f64) -> Result<DVector<f64>> {
        match &self.form {
            SpaceForm::Pointwise(phi) => {
                let (q, qd) = traj.state(t)?;
                Ok(phi(t, &q, &qd))
            }
            _ => {
                let e = self.eps0;
                Ok((self.eval(e, t, traj)? - self.eval(-e, t, traj)?) / (2.0 * e))
            }
        }
    }
}

/// The two interchangeable styles of time change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeStyle {
    /// `τ(ε, t)` entering through a moving integration interval.
    Tau,
    /// `θ_ε(t)` entering through reparameterization by its inverse.
    Theta,
}

#[derive(Clone)]
pub struct TimeChange {
    pub style: TimeStyle,
    eval: Arc<TimeFn>,
    d_eps: Option<Arc<DEpsFn>>,
    pub eps0: f64,
}

impl TimeChange {
    pub fn trivial(style: TimeStyle) -> Self {
        Self {
            style,
            eval: Arc::new(|_, t, _| Ok(t)),
            d_eps: Some(Arc::new(|_, _| Ok(0.0))),
            eps0: DEFAULT_EPS0,
        }
    }

    pub fn tau(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            style: TimeStyle::Tau,
            eval: Arc::new(move |eps, t, _| Ok(f(eps, t))),
            d_eps: None,
            eps0: DEFAULT_EPS0,
        }
    }

    pub fn theta(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            style: TimeStyle::Theta,
            eval: Arc::new(move |eps, t, _| Ok(f(eps, t))),
            d_eps: None,
            eps0: DEFAULT_EPS0,
        }
    }

    /// Time change built from the motion it accompanies.
    pub fn on_motion(
        style: TimeStyle,
        f: impl Fn(f64, f64, &Trajectory) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            style,
            eval: Arc::new(f),
            d_eps: None,
            eps0: DEFAULT_EPS0,
        }
    }

    /// Attach the analytic `t ↦ ∂_ε τ(ε, t)|_{ε=0}`.
    pub fn with_d_eps(mut self, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.d_eps = Some(Arc::new(move |t, _| Ok(g(t))));
        self
    }

    /// Analytic ε-derivative that reads the motion.
    pub fn with_d_eps_on_motion(
        mut self,
        g: impl Fn(f64, &Trajectory) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        self.d_eps = Some(Arc::new(g));
        self
    }

    pub fn value(&self, eps: f64, t: f64, traj: &Trajectory) -> Result<f64> {
        (self.eval)(eps, t, traj)
    }

    /// `∂_ε τ(ε, t)|_{ε=0}`.
    pub fn d_eps_at(&self, t: f64, traj: &Trajectory) -> Result<f64> {
        if let Some(g) = &self.d_eps {
            return g(t, traj);
        }
        let e = self.eps0;
        Ok((self.value(e, t, traj)? - self.value(-e, t, traj)?) / (2.0 * e))
    }

    /// `∂_t τ(ε, t)` by central difference.
    pub fn d_t(&self, eps: f64, t: f64, h: f64, traj: &Trajectory) -> Result<f64> {
        Ok((self.value(eps, t + h, traj)? - self.value(eps, t - h, traj)?) / (2.0 * h))
    }

    /// Inverse of `t ↦ θ_ε(t)` by Newton iteration; used by validity checks.
    pub fn theta_inverse(&self, eps: f64, xi: f64, traj: &Trajectory) -> Result<f64> {
        let mut t = xi;
        for _ in 0..50 {
            let f = self.value(eps, t, traj)? - xi;
            if f.abs() < 1e-14 * (1.0 + xi.abs()) {
                break;
            }
            let fp = self.d_t(eps, t, 1e-6, traj)?;
            t -= f / fp;
        }
        Ok(t)
    }
}

/// Gauge term `G(ε, t)`: only `∂_ε G|_{ε=0}` ever enters a constant of motion.
#[derive(Clone)]
pub struct BHFunction {
    eval: Arc<GaugeFn>,
    d_eps: Option<Arc<DEpsFn>>,
    /// Pointwise gauges keep constants local; trajectory functionals do not.
    pub pointwise: bool,
    pub trivial: bool,
    pub eps0: f64,
}

impl BHFunction {
    pub fn trivial() -> Self {
        Self {
            eval: Arc::new(|_, _, _| Ok(0.0)),
            d_eps: Some(Arc::new(|_, _| Ok(0.0))),
            pointwise: true,
            trivial: true,
            eps0: DEFAULT_EPS0,
        }
    }

    /// Gauge that is a point function of `(t, q(t), q̇(t))` scaled by ε.
    pub fn pointwise(
        g: impl Fn(f64, &DVector<f64>, &DVector<f64>) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let g = Arc::new(g);
        let g2 = g.clone();
        Self {
            eval: Arc::new(move |eps, t, traj| {
                let (q, qd) = traj.state(t)?;
                Ok(eps * g(t, &q, &qd))
            }),
            d_eps: Some(Arc::new(move |t, traj| {
                let (q, qd) = traj.state(t)?;
                Ok(g2(t, &q, &qd))
            })),
            pointwise: true,
            trivial: false,
            eps0: DEFAULT_EPS0,
        }
    }

    /// Fully general gauge, possibly an integral functional of the trajectory.
    pub fn functional(
        g: impl Fn(f64, f64, &Trajectory) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            eval: Arc::new(g),
            d_eps: None,
            pointwise: false,
            trivial: false,
            eps0: DEFAULT_EPS0,
        }
    }

    pub fn with_d_eps(
        mut self,
        g: impl Fn(f64, &Trajectory) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        self.d_eps = Some(Arc::new(g));
        self
    }

    pub fn value(&self, eps: f64, t: f64, traj: &Trajectory) -> Result<f64> {
        (self.eval)(eps, t, traj)
    }

    /// `∂_ε G(ε, t)|_{ε=0}`.
    pub fn d_eps_at(&self, t: f64, traj: &Trajectory) -> Result<f64> {
        if let Some(g) = &self.d_eps {
            return g(t, traj);
        }
        let e = self.eps0;
        Ok((self.value(e, t, traj)? - self.value(-e, t, traj)?) / (2.0 * e))
    }
}

/// A symmetry candidate: space change, time change and gauge on a common
/// padded interval. The style is the time change's.
#[derive(Clone)]
pub struct SymmetryTriple {
    pub space: SpaceChange,
    pub time: TimeChange,
    pub bh: BHFunction,
}

impl SymmetryTriple {
    pub fn new(space: SpaceChange, time: TimeChange, bh: BHFunction) -> Self {
        Self { space, time, bh }
    }

    /// Space change only, with trivial time change and gauge.
    pub fn space_only(space: SpaceChange, style: TimeStyle) -> Self {
        Self {
            space,
            time: TimeChange::trivial(style),
            bh: BHFunction::trivial(),
        }
    }

    pub fn style(&self) -> TimeStyle {
        self.time.style
    }
}

/// `∂_ε q_ε(t)|_{ε=0}` for a space change along a trajectory.
pub fn d_eps_space(space: &SpaceChange, traj: &Trajectory, t: f64) -> Result<DVector<f64>> {
    space.d_eps(traj, t)
}

/// `∂_ε L(t, q_ε(t), q̇_ε(t))|_{ε=0}` by central differences.
pub fn d_eps_lagrangian(
    sys: &LagrangianSystem,
    space: &SpaceChange,
    traj: &Trajectory,
    t: f64,
) -> Result<f64> {
    let e = space.eps0;
    let lag_at = |eps: f64| -> Result<f64> {
        let q = space.eval(eps, t, traj)?;
        let qd = space.velocity(eps, t, traj)?;
        sys.lagrangian(t, &q, &qd)
    };
    Ok((lag_at(e)? - lag_at(-e)?) / (2.0 * e))
}

/// Residual of infinitesimal invariance under space and time change with
/// gauge, in the moving-interval (τ) formulation:
/// `∂_ε[ L(τ, q_ε(τ), q̇_ε(τ))·∂_tτ + ∂_tG ]|_{ε=0}`.
pub fn invariance_residual(
    sys: &LagrangianSystem,
    triple: &SymmetryTriple,
    traj: &Trajectory,
    t: f64,
) -> Result<f64> {
    if triple.style() != TimeStyle::Tau {
        return Err(Error::Config(
            "invariance_residual expects a tau-style triple".into(),
        ));
    }
    let e = triple.space.eps0;
    let h = triple.space.h_t;
    let lam = |eps: f64| -> Result<f64> {
        let xi = triple.time.value(eps, t, traj)?;
        let q = triple.space.eval(eps, xi, traj)?;
        let qd = triple.space.velocity(eps, xi, traj)?;
        let dt_tau = triple.time.d_t(eps, t, h, traj)?;
        Ok(sys.lagrangian(xi, &q, &qd)? * dt_tau)
    };
    let d_eps_lam = (lam(e)? - lam(-e)?) / (2.0 * e);
    let dg_dt = (triple.bh.d_eps_at(t + h, traj)? - triple.bh.d_eps_at(t - h, traj)?) / (2.0 * h);
    Ok(d_eps_lam + dg_dt)
}

/// Residual of the reparameterization-style (θ) invariance:
/// `∂_ε[ L(θ_ε(t), q_ε(t), q̇_ε(t)/θ′_ε(t))·θ′_ε(t) + ∂_tG ]|_{ε=0}`.
pub fn alt_invariance_residual(
    sys: &LagrangianSystem,
    triple: &SymmetryTriple,
    traj: &Trajectory,
    t: f64,
) -> Result<f64> {
    if triple.style() != TimeStyle::Theta {
        return Err(Error::Config(
            "alt_invariance_residual expects a theta-style triple".into(),
        ));
    }
    let e = triple.space.eps0;
    let h = triple.space.h_t;
    let lam = |eps: f64| -> Result<f64> {
        let theta = triple.time.value(eps, t, traj)?;
        let theta_p = triple.time.d_t(eps, t, h, traj)?;
        let q = triple.space.eval(eps, t, traj)?;
        let qd = triple.space.velocity(eps, t, traj)?;
        Ok(sys.lagrangian(theta, &q, &(qd / theta_p))? * theta_p)
    };
    let d_eps_lam = (lam(e)? - lam(-e)?) / (2.0 * e);
    let dg_dt = (triple.bh.d_eps_at(t + h, traj)? - triple.bh.d_eps_at(t - h, traj)?) / (2.0 * h);
    Ok(d_eps_lam + dg_dt)
}

/// Max residual of the total-derivative condition
/// `∂_ε L|₀ = d/dt ψ(t, q, q̇)` over the supplied sample times.
pub fn total_derivative_check(
    sys: &LagrangianSystem,
    space: &SpaceChange,
    psi: &crate::dynamics::ScalarFn,
    traj: &Trajectory,
    times: &[f64],
) -> Result<f64> {
    let h = space.h_t;
    let psi_at = |t: f64| -> Result<f64> {
        let (q, qd) = traj.state(t)?;
        Ok(psi(t, &q, &qd))
    };
    let mut worst = 0.0f64;
    for &t in times {
        let lhs = d_eps_lagrangian(sys, space, traj, t)?;
        let dpsi = (psi_at(t + h)? - psi_at(t - h)?) / (2.0 * h);
        worst = worst.max((lhs - dpsi).abs());
    }
    Ok(worst)
}

/// Interior Chebyshev nodes of `[a, b]`, densest near the ends.
pub fn chebyshev_nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (0..n)
        .map(|j| {
            let angle = std::f64::consts::PI * (2.0 * j as f64 + 1.0) / (2.0 * n as f64);
            mid + half * angle.cos()
        })
        .rev()
        .collect()
}

/// The fixed 64-point residual/drift sampling grid of an interval.
pub fn check_grid(a: f64, b: f64) -> Vec<f64> {
    chebyshev_nodes(a, b, 64)
}
