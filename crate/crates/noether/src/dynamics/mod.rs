//! Lagrangian systems and their derived dynamics.
//!
//! A [`LagrangianSystem`] owns the scalar evaluator `L(t, q, q̇)` plus optional
//! analytic partial derivatives and a domain guard. Everything downstream
//! (the Euler–Lagrange right-hand side, momentum, energy, invariance residuals)
//! is built from these evaluators, falling back to central finite differences
//! when analytic derivatives are absent.

mod trajectory;

pub use trajectory::{InitialValueProblem, StepControl, Trajectory, integrate};

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Scalar evaluator of `(t, q, q̇)`.
pub type ScalarFn = dyn Fn(f64, &DVector<f64>, &DVector<f64>) -> f64 + Send + Sync;
/// Vector evaluator of `(t, q, q̇)`.
pub type VectorFn = dyn Fn(f64, &DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync;
/// Matrix evaluator of `(t, q, q̇)`.
pub type MatrixFn = dyn Fn(f64, &DVector<f64>, &DVector<f64>) -> DMatrix<f64> + Send + Sync;
/// Domain predicate; `true` means the point is inside the admissible region.
pub type GuardFn = dyn Fn(f64, &DVector<f64>, &DVector<f64>) -> bool + Send + Sync;
/// Potential evaluator `U(t, q)`.
pub type PotentialFn = dyn Fn(f64, &DVector<f64>) -> f64 + Send + Sync;
/// Potential gradient `∂_q U(t, q)`.
pub type PotentialGradFn = dyn Fn(f64, &DVector<f64>) -> DVector<f64> + Send + Sync;

/// Relative step for first-order central differences (√ε balancing).
pub const FD_STEP_FIRST: f64 = 1e-6;
/// Relative step for second-order central differences (∛ε balancing).
pub const FD_STEP_SECOND: f64 = 1e-4;
/// Mass matrices with condition estimate beyond `1/EPS_COND` count as singular.
pub const EPS_COND: f64 = 1e-12;

/// Full set of analytic partial derivatives of the Lagrangian.
#[derive(Clone)]
pub struct AnalyticDerivatives {
    pub grad_q: Arc<VectorFn>,
    pub grad_qdot: Arc<VectorFn>,
    pub hess_qdot_qdot: Arc<MatrixFn>,
    pub hess_qdot_q: Arc<MatrixFn>,
    pub hess_qdot_t: Arc<VectorFn>,
}

/// A Lagrangian mechanical system with `dim` degrees of freedom.
#[derive(Clone)]
pub struct LagrangianSystem {
    name: String,
    dim: usize,
    lagrangian: Arc<ScalarFn>,
    analytic: Option<AnalyticDerivatives>,
    guard: Option<Arc<GuardFn>>,
}

impl std::fmt::Debug for LagrangianSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LagrangianSystem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("analytic", &self.analytic.is_some())
            .field("guarded", &self.guard.is_some())
            .finish()
    }
}

impl LagrangianSystem {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        lagrangian: impl Fn(f64, &DVector<f64>, &DVector<f64>) -> f64 + Send + Sync + 'static,
    ) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Self {
            name: name.into(),
            dim,
            lagrangian: Arc::new(lagrangian),
            analytic: None,
            guard: None,
        }
    }

    pub fn with_analytic(mut self, analytic: AnalyticDerivatives) -> Self {
        self.analytic = Some(analytic);
        self
    }

    pub fn with_guard(
        mut self,
        guard: impl Fn(f64, &DVector<f64>, &DVector<f64>) -> bool + Send + Sync + 'static,
    ) -> Self {
        self.guard = Some(Arc::new(guard));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_analytic(&self) -> bool {
        self.analytic.is_some()
    }

    /// The same system with analytic derivatives dropped, forcing every
    /// derivative through the central-difference path. Used to cross-check
    /// supplied derivatives against the numerical ones.
    pub fn without_analytic(&self) -> Self {
        Self {
            analytic: None,
            ..self.clone()
        }
    }

    /// Same dynamics with the Lagrangian shifted by a constant. Shifting
    /// leaves every partial derivative, and hence the Lagrange equations,
    /// untouched; it only moves the value of `L` away from zero.
    pub fn shifted(&self, k: f64) -> Self {
        if k == 0.0 {
            return self.clone();
        }
        let inner = self.lagrangian.clone();
        Self {
            name: format!("{}+{k}", self.name),
            dim: self.dim,
            lagrangian: Arc::new(move |t, q, qd| inner(t, q, qd) + k),
            analytic: self.analytic.clone(),
            guard: self.guard.clone(),
        }
    }

    pub fn in_domain(&self, t: f64, q: &DVector<f64>, qdot: &DVector<f64>) -> bool {
        self.guard.as_ref().is_none_or(|g| g(t, q, qdot))
    }

    fn require_domain(&self, t: f64, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<()> {
        if self.in_domain(t, q, qdot) {
            Ok(())
        } else {
            Err(Error::DomainViolation {
                t,
                detail: format!("system `{}`", self.name),
            })
        }
    }

    pub fn lagrangian(&self, t: f64, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<f64> {
        self.require_domain(t, q, qdot)?;
        Ok((self.lagrangian)(t, q, qdot))
    }

    /// `L` without the guard check, for stencil interiors already validated.
    fn lag_raw(&self, t: f64, q: &DVector<f64>, qdot: &DVector<f64>) -> f64 {
        (self.lagrangian)(t, q, qdot)
    }

    /// Central difference of `L` in a single coordinate of `q` or `q̇`.
    /// The step shrinks once by 10 if a stencil end leaves the domain.
    fn fd_coordinate(
        &self,
        t: f64,
        q: &DVector<f64>,
        qdot: &DVector<f64>,
        in_q: bool,
        i: usize,
    ) -> Result<f64> {
        let base = if in_q { q[i] } else { qdot[i] };
        let mut h = FD_STEP_FIRST * base.abs().max(1.0);
        for attempt in 0..2 {
            let mut qp = q.clone();
            let mut qm = q.clone();
            let mut dp = qdot.clone();
            let mut dm = qdot.clone();
            if in_q {
                qp[i] = base + h;
                qm[i] = base - h;
            } else {
                dp[i] = base + h;
                dm[i] = base - h;
            }
            if self.in_domain(t, &qp, &dp) && self.in_domain(t, &qm, &dm) {
                return Ok((self.lag_raw(t, &qp, &dp) - self.lag_raw(t, &qm, &dm)) / (2.0 * h));
            }
            if attempt == 0 {
                h /= 10.0;
            }
        }
        Err(Error::DomainViolation {
            t,
            detail: format!("finite-difference stencil left the domain of `{}`", self.name),
        })
    }

    /// ∂L/∂q.
    pub fn grad_q(&self, t: f64, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<DVector<f64>> {
        self.require_domain(t, q, qdot)?;
        if let Some(a) = &self.analytic {
            return Ok((a.grad_q)(t, q, qdot));
        }
        let mut g = DVector::zeros(self.dim);
        for i in 0..self.dim {
            g[i] = self.fd_coordinate(t, q, qdot, true, i)?;
        }
        Ok(g)
    }

    /// ∂L/∂q̇, the conjugate momentum.
    pub fn grad_qdot(&self, t: f64, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<DVector<f64>> {
        self.require_domain(t, q, qdot)?;
        if let Some(a) = &self.analytic {
            return Ok((a.grad_qdot)(t, q, qdot));
        }
        let mut g = DVector::zeros(self.dim);
        for i in 0..self.dim {
            g[i] = self.fd_coordinate(t, q, qdot, false, i)?;
        }
        Ok(g)
    }

    /// Four-point cross stencil for a mixed second partial of `L`.
    /// `bump` applies signed steps to a copy of `(t, q, q̇)`.
    fn fd_cross(
        &self,
        t: f64,
        h1: f64,
        h2: f64,
        bump: impl Fn(f64, f64) -> (f64, DVector<f64>, DVector<f64>),
    ) -> Result<f64> {
        let mut s1 = h1;
        let mut s2 = h2;
        for attempt in 0..2 {
            let pts = [
                bump(s1, s2),
                bump(s1, -s2),
                bump(-s1, s2),
                bump(-s1, -s2),
            ];
            if pts.iter().all(|(tt, qq, dd)| self.in_domain(*tt, qq, dd)) {
                let v = |p: &(f64, DVector<f64>, DVector<f64>)| self.lag_raw(p.0, &p.1, &p.2);
                return Ok((v(&pts[0]) - v(&pts[1]) - v(&pts[2]) + v(&pts[3])) / (4.0 * s1 * s2));
            }
            if attempt == 0 {
                s1 /= 10.0;
                s2 /= 10.0;
            }
        }
        Err(Error::DomainViolation {
            t,
            detail: format!("second-derivative stencil left the domain of `{}`", self.name),
        })
    }

    /// ∂²L/∂q̇∂q̇, the mass matrix.
    pub fn hess_qdot_qdot(&self, t: f64, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.require_domain(t, q, qdot)?;
        if let Some(a) = &self.analytic {
            return Ok((a.hess_qdot_qdot)(t, q, qdot));
        }
        let n = self.dim;
        let mut m = DMatrix::zeros(n, n);
        let step = |x: f64| FD_STEP_SECOND * x.abs().max(1.0);
        for i in 0..n {
            let hi = step(qdot[i]);
            // Diagonal: three-point second difference.
            let mut dp = qdot.clone();
            let mut dm = qdot.clone();
            dp[i] += hi;
            dm[i] -= hi;
            if !(self.in_domain(t, q, &dp) && self.in_domain(t, q, &dm)) {
                return Err(Error::DomainViolation {
                    t,
                    detail: format!("second-derivative stencil left the domain of `{}`", self.name),
                });
            }
            let l0 = self.lag_raw(t, q, qdot);
            m[(i, i)] = (self.lag_raw(t, q, &dp) - 2.0 * l0 + self.lag_raw(t, q, &dm)) / (hi * hi);
            for j in (i + 1)..n {
                let hj = step(qdot[j]);
                let val = self.fd_cross(t, hi, hj, |a, b| {
                    let mut d = qdot.clone();
                    d[i] += a;
                    d[j] += b;
                    (t, q.clone(), d)
                })?;
                m[(i, j)] = val;
                m[(j, i)] = val;
            }
        }
        Ok(m)
    }

    /// ∂²L/∂q̇∂q with entries `∂²L/∂q̇_i ∂q_j`.
    pub fn hess_qdot_q(&self, t: f64, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.require_domain(t, q, qdot)?;
        if let Some(a) = &self.analytic {
            return Ok((a.hess_qdot_q)(t, q, qdot));
        }
        let n = self.dim;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let hi = FD_STEP_SECOND * qdot[i].abs().max(1.0);
            for j in 0..n {
                let hj = FD_STEP_SECOND * q[j].abs().max(1.0);
                m[(i, j)] = self.fd_cross(t, hi, hj, |a, b| {
                    let mut d = qdot.clone();
                    let mut p = q.clone();
                    d[i] += a;
                    p[j] += b;
                    (t, p, d)
                })?;
            }
        }
        Ok(m)
    }

    /// ∂²L/∂q̇∂t.
    pub fn hess_qdot_t(&self, t: f64, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<DVector<f64>> {
        self.require_domain(t, q, qdot)?;
        if let Some(a) = &self.analytic {
            return Ok((a.hess_qdot_t)(t, q, qdot));
        }
        let n = self.dim;
        let ht = FD_STEP_SECOND * t.abs().max(1.0);
        let mut g = DVector::zeros(n);
        for i in 0..n {
            let hi = FD_STEP_SECOND * qdot[i].abs().max(1.0);
            g[i] = self.fd_cross(t, hi, ht, |a, b| {
                let mut d = qdot.clone();
                d[i] += a;
                (t + b, q.clone(), d)
            })?;
        }
        Ok(g)
    }

    /// Acceleration from the Euler–Lagrange equations:
    /// solves `M q̈ = ∂_q L − ∂²_{q̇t} L − ∂²_{q̇q} L · q̇` with `M = ∂²_{q̇q̇} L`.
    pub fn lagrange_rhs(&self, t: f64, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<DVector<f64>> {
        let mass = self.hess_qdot_qdot(t, q, qdot)?;
        let rhs = self.grad_q(t, q, qdot)? - self.hess_qdot_t(t, q, qdot)? - &mass_apply_cross(self, t, q, qdot)?;
        let norm_m = mass.norm();
        let lu = mass.clone().lu();
        let inv = lu.try_inverse().ok_or(Error::SingularMassMatrix {
            t,
            cond: f64::INFINITY,
        })?;
        let cond = norm_m * inv.norm();
        if !cond.is_finite() || cond > 1.0 / EPS_COND {
            return Err(Error::SingularMassMatrix { t, cond });
        }
        lu.solve(&rhs).ok_or(Error::SingularMassMatrix {
            t,
            cond: f64::INFINITY,
        })
    }

    /// Conjugate momentum `p = ∂_q̇ L`.
    pub fn momentum(&self, t: f64, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<DVector<f64>> {
        self.grad_qdot(t, q, qdot)
    }

    /// Energy `E = p · q̇ − L`.
    pub fn energy(&self, t: f64, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<f64> {
        Ok(self.grad_qdot(t, q, qdot)?.dot(qdot) - self.lagrangian(t, q, qdot)?)
    }
}

fn mass_apply_cross(
    sys: &LagrangianSystem,
    t: f64,
    q: &DVector<f64>,
    qdot: &DVector<f64>,
) -> Result<DVector<f64>> {
    Ok(sys.hess_qdot_q(t, q, qdot)? * qdot)
}

/// Time-dependent scalar prefactor `c(t)` with its derivative.
#[derive(Clone)]
pub struct TimeFactor {
    pub value: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub deriv: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl TimeFactor {
    pub fn constant_one() -> Self {
        Self {
            value: Arc::new(|_| 1.0),
            deriv: Arc::new(|_| 0.0),
        }
    }
}

/// Builder for Lagrangians of the form `L = c(t)·(½ q̇ᵀ K q̇ − U(t, q))`,
/// which covers every system in the catalog. Analytic derivatives come for
/// free from the structure.
pub struct MechanicalSystem {
    pub name: String,
    pub dim: usize,
    /// Constant symmetric kinetic matrix `K`.
    pub kinetic: DMatrix<f64>,
    /// Potential `U(t, q)`.
    pub potential: Arc<PotentialFn>,
    /// Gradient `∂_q U(t, q)`.
    pub potential_grad: Arc<PotentialGradFn>,
    /// Optional prefactor `c(t)`; defaults to 1.
    pub time_factor: Option<TimeFactor>,
    pub guard: Option<Arc<GuardFn>>,
}

impl MechanicalSystem {
    pub fn build(self) -> LagrangianSystem {
        let n = self.dim;
        assert_eq!(self.kinetic.nrows(), n);
        assert_eq!(self.kinetic.ncols(), n);
        let tf = self.time_factor.unwrap_or_else(TimeFactor::constant_one);
        let k_l = self.kinetic.clone();
        let u_l = self.potential.clone();
        let c_l = tf.value.clone();
        let lag = move |t: f64, q: &DVector<f64>, qd: &DVector<f64>| {
            c_l(t) * (0.5 * qd.dot(&(&k_l * qd)) - u_l(t, q))
        };

        let (k1, k2, k3, k4) = (
            self.kinetic.clone(),
            self.kinetic.clone(),
            self.kinetic.clone(),
            self.kinetic,
        );
        let (c1, c2, c3) = (tf.value.clone(), tf.value.clone(), tf.value);
        let cd = tf.deriv;
        let ug = self.potential_grad;
        let analytic = AnalyticDerivatives {
            grad_q: Arc::new(move |t, q, _| -c1(t) * ug(t, q)),
            grad_qdot: Arc::new(move |t, _, qd| c2(t) * (&k1 * qd)),
            hess_qdot_qdot: Arc::new(move |t, _, _| c3(t) * &k2),
            hess_qdot_q: Arc::new(move |_, _, _| DMatrix::zeros(n, n)),
            hess_qdot_t: Arc::new(move |t, _, qd| cd(t) * (&k3 * qd)),
        };
        let _ = k4;

        let mut sys = LagrangianSystem::new(self.name, n, lag).with_analytic(analytic);
        if let Some(g) = self.guard {
            sys.guard = Some(g);
        }
        sys
    }
}
