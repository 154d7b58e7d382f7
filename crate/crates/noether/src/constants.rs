//! Building conserved quantities from symmetry triples, transforming the
//! triples themselves (gauge/time trivialization, style conversion) and
//! measuring drift along trajectories.

use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::dynamics::{LagrangianSystem, Trajectory};
use crate::error::{Error, Result};
use crate::quadrature::{CumulativeIntegral, DEFAULT_REFINEMENT};
use crate::variation::{
    check_grid, d_eps_lagrangian, invariance_residual, alt_invariance_residual, BHFunction,
    SpaceChange, SymmetryTriple, TimeChange, TimeStyle,
};

/// Whether a constant is a point function of `(t, q, q̇)` or carries an
/// integral over `[t0, t]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantKind {
    Local,
    Nonlocal,
}

/// Which theorem or transform produced a constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    SpaceOnly,
    SpaceWithGauge,
    NonlocalIntegral,
    FullTau,
    FullTheta,
    TrivializedGauge,
    TrivializedTime,
    ConvertedStyle,
    SingleMotion,
    Explicit,
}

type QuantityFn = dyn Fn(f64, &Trajectory) -> Result<f64> + Send + Sync;

/// A candidate constant of motion: a scalar evaluator along trajectories.
#[derive(Clone)]
pub struct ConservedQuantity {
    pub kind: ConstantKind,
    pub provenance: Provenance,
    pub label: String,
    /// Base time of the integral term for nonlocal constants.
    pub t0: Option<f64>,
    eval: Arc<QuantityFn>,
}

impl ConservedQuantity {
    pub fn eval(&self, t: f64, traj: &Trajectory) -> Result<f64> {
        (self.eval)(t, traj)
    }

    /// Wrap a closed-form evaluator, e.g. a catalog reference expression.
    pub fn explicit(
        label: impl Into<String>,
        f: impl Fn(f64, &Trajectory) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            kind: ConstantKind::Local,
            provenance: Provenance::Explicit,
            label: label.into(),
            t0: None,
            eval: Arc::new(f),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

impl std::fmt::Debug for ConservedQuantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConservedQuantity")
            .field("label", &self.label)
            .field("kind", &self.kind)
            .field("provenance", &self.provenance)
            .finish()
    }
}

/// Single-slot cache keyed by trajectory identity. Conserved-quantity
/// evaluators and trajectory-dependent families use it so cumulative tables
/// are built once per trajectory and shared across threads.
pub struct PerTrajectoryCache<T> {
    slot: Mutex<Option<(u64, Arc<T>)>>,
}

impl<T> Default for PerTrajectoryCache<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T> PerTrajectoryCache<T> {
    pub fn new() -> Self {
        Self {
            slot: Mutex::new(None),
        }
    }

    pub fn get_or_build(&self, traj: &Trajectory, build: impl FnOnce() -> Result<T>) -> Result<Arc<T>> {
        let mut slot = self.slot.lock().unwrap();
        if let Some((id, v)) = slot.as_ref() {
            if *id == traj.id() {
                return Ok(v.clone());
            }
        }
        let v = Arc::new(build()?);
        *slot = Some((traj.id(), v.clone()));
        Ok(v)
    }
}

/// Constant from invariance under space change only: `F = ∂_q̇L · ∂_ε q_ε|₀`.
pub fn simple_constant(sys: &Arc<LagrangianSystem>, space: &SpaceChange) -> ConservedQuantity {
    let sys = sys.clone();
    let space = space.clone();
    ConservedQuantity {
        kind: ConstantKind::Local,
        provenance: Provenance::SpaceOnly,
        label: "momentum_pairing".into(),
        t0: None,
        eval: Arc::new(move |t, traj| {
            let (q, qd) = traj.state(t)?;
            let p = sys.grad_qdot(t, &q, &qd)?;
            Ok(p.dot(&space.d_eps(traj, t)?))
        }),
    }
}

/// Constant from gauge invariance under space change: `F + ∂_ε G|₀`.
pub fn bh_constant(
    sys: &Arc<LagrangianSystem>,
    space: &SpaceChange,
    bh: &BHFunction,
) -> ConservedQuantity {
    let sys = sys.clone();
    let space = space.clone();
    let bh = bh.clone();
    ConservedQuantity {
        kind: if bh.pointwise {
            ConstantKind::Local
        } else {
            ConstantKind::Nonlocal
        },
        provenance: Provenance::SpaceWithGauge,
        label: "gauge_pairing".into(),
        t0: None,
        eval: Arc::new(move |t, traj| {
            let (q, qd) = traj.state(t)?;
            let p = sys.grad_qdot(t, &q, &qd)?;
            Ok(p.dot(&space.d_eps(traj, t)?) + bh.d_eps_at(t, traj)?)
        }),
    }
}

/// Integral constant of motion `F(t) − ∫_{t0}^{t} ∂_ε L ds`, valid for any
/// space change on Euler–Lagrange motions. The inner integral is cached as a
/// cumulative table per trajectory.
pub fn nonlocal_constant(
    sys: &Arc<LagrangianSystem>,
    space: &SpaceChange,
    t0: f64,
) -> ConservedQuantity {
    let sys = sys.clone();
    let space = space.clone();
    let cache: PerTrajectoryCache<CumulativeIntegral> = PerTrajectoryCache::new();
    ConservedQuantity {
        kind: ConstantKind::Nonlocal,
        provenance: Provenance::NonlocalIntegral,
        label: "integral_pairing".into(),
        t0: Some(t0),
        eval: Arc::new(move |t, traj| {
            let table = cache.get_or_build(traj, || {
                let (a, b) = traj.interval();
                if t0 < a || t0 > b {
                    return Err(Error::Config(format!(
                        "nonlocal base time t0 = {t0} outside [{a}, {b}]"
                    )));
                }
                let n = DEFAULT_REFINEMENT.max(2 * traj.grid_len());
                CumulativeIntegral::build(a, b, n, |s| d_eps_lagrangian(&sys, &space, traj, s))
            })?;
            let (q, qd) = traj.state(t)?;
            let p = sys.grad_qdot(t, &q, &qd)?;
            Ok(p.dot(&space.d_eps(traj, t)?) - table.between(t0, t)?)
        }),
    }
}

/// Constant of the full space–time–gauge theorem in the τ formulation:
/// `N = p·∂_εq_ε|₀ + L·∂_ετ|₀ + ∂_εG|₀`.
pub fn full_constant(sys: &Arc<LagrangianSystem>, triple: &SymmetryTriple) -> Result<ConservedQuantity> {
    if triple.style() != TimeStyle::Tau {
        return Err(Error::Config("full_constant expects a tau-style triple".into()));
    }
    let sys = sys.clone();
    let triple = triple.clone();
    Ok(ConservedQuantity {
        kind: if triple.bh.pointwise {
            ConstantKind::Local
        } else {
            ConstantKind::Nonlocal
        },
        provenance: Provenance::FullTau,
        label: "space_time_gauge".into(),
        t0: None,
        eval: Arc::new(move |t, traj| {
            let (q, qd) = traj.state(t)?;
            let p = sys.grad_qdot(t, &q, &qd)?;
            let l = sys.lagrangian(t, &q, &qd)?;
            Ok(p.dot(&triple.space.d_eps(traj, t)?)
                + l * triple.time.d_eps_at(t, traj)?
                + triple.bh.d_eps_at(t, traj)?)
        }),
    })
}

/// Constant of the θ-style full theorem:
/// `N = p·(∂_εq_ε|₀ − (∂_εθ|₀) q̇) + L·∂_εθ|₀ + ∂_εG|₀`.
pub fn alt_full_constant(
    sys: &Arc<LagrangianSystem>,
    triple: &SymmetryTriple,
) -> Result<ConservedQuantity> {
    if triple.style() != TimeStyle::Theta {
        return Err(Error::Config(
            "alt_full_constant expects a theta-style triple".into(),
        ));
    }
    let sys = sys.clone();
    let triple = triple.clone();
    Ok(ConservedQuantity {
        kind: if triple.bh.pointwise {
            ConstantKind::Local
        } else {
            ConstantKind::Nonlocal
        },
        provenance: Provenance::FullTheta,
        label: "space_time_gauge_theta".into(),
        t0: None,
        eval: Arc::new(move |t, traj| {
            let (q, qd) = traj.state(t)?;
            let p = sys.grad_qdot(t, &q, &qd)?;
            let l = sys.lagrangian(t, &q, &qd)?;
            let dtheta = triple.time.d_eps_at(t, traj)?;
            Ok(p.dot(&(triple.space.d_eps(traj, t)? - dtheta * &qd))
                + l * dtheta
                + triple.bh.d_eps_at(t, traj)?)
        }),
    })
}

/// Result of absorbing the gauge term into the time change.
pub struct BhTrivialization {
    /// The (possibly constant-shifted) Lagrangian to use with [`triple`](Self::triple).
    pub system: Arc<LagrangianSystem>,
    pub triple: SymmetryTriple,
    pub k_shift: f64,
}

/// Replace the gauge of a τ-style triple by a modified time change
/// `τ + ε(∂_εG|₀ − k·∂_ετ|₀)/(L + k)` with trivial gauge. The shift `k` keeps
/// the denominator away from zeros of `L` along the base motion; when absent
/// it is auto-selected as `1 + 2·max|min(L, 0)|`.
pub fn trivialize_bh(
    sys: &Arc<LagrangianSystem>,
    triple: &SymmetryTriple,
    traj: &Trajectory,
    k_shift: Option<f64>,
) -> Result<BhTrivialization> {
    if triple.style() != TimeStyle::Tau {
        return Err(Error::Config("trivialize_bh expects a tau-style triple".into()));
    }
    let (a, b) = traj.interval();
    let grid: Vec<f64> = std::iter::once(a)
        .chain(check_grid(a, b))
        .chain(std::iter::once(b))
        .collect();
    let mut l_values = Vec::with_capacity(grid.len());
    for &t in &grid {
        let (q, qd) = traj.state(t)?;
        let v = sys.lagrangian(t, &q, &qd)?;
        if !v.is_finite() {
            return Err(Error::ZeroDenominator {
                detail: "Lagrangian not finite along the trajectory".into(),
            });
        }
        l_values.push(v);
    }
    let l_min = l_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let l_max_abs = l_values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let k = match k_shift {
        Some(k) => {
            // L + k must stay away from zero on the whole interval: reject a
            // sign change across the sample grid as well as a small floor.
            let floor = l_values.iter().fold(f64::INFINITY, |m, v| m.min((v + k).abs()));
            let (min, max) = l_values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v + k), hi.max(v + k))
                });
            if floor < 1e-9 * (1.0 + l_max_abs) || (min < 0.0 && max > 0.0) {
                return Err(Error::ZeroDenominator {
                    detail: format!("L + {k} vanishes along the trajectory"),
                });
            }
            k
        }
        None => 1.0 + 2.0 * l_min.min(0.0).abs(),
    };

    let (sys0, time0, bh0) = (sys.clone(), triple.time.clone(), triple.bh.clone());
    let (sys1, time1, bh1) = (sys.clone(), triple.time.clone(), triple.bh.clone());
    let extra = move |sys: &LagrangianSystem,
                      time: &TimeChange,
                      bh: &BHFunction,
                      t: f64,
                      tr: &Trajectory|
          -> Result<f64> {
        let (q, qd) = tr.state(t)?;
        let l = sys.lagrangian(t, &q, &qd)?;
        Ok((bh.d_eps_at(t, tr)? - k * time.d_eps_at(t, tr)?) / (l + k))
    };
    let extra2 = extra;
    let new_time = TimeChange::on_motion(TimeStyle::Tau, move |eps, t, tr| {
        Ok(time0.value(eps, t, tr)? + eps * extra(&sys0, &time0, &bh0, t, tr)?)
    })
    .with_d_eps_on_motion(move |t, tr| {
        Ok(time1.d_eps_at(t, tr)? + extra2(&sys1, &time1, &bh1, t, tr)?)
    });

    Ok(BhTrivialization {
        system: Arc::new(sys.shifted(k)),
        triple: SymmetryTriple::new(triple.space.clone(), new_time, BHFunction::trivial()),
        k_shift: k,
    })
}

/// Replace the time change of a τ-style triple by an enlarged gauge
/// `G + ε·L(t, q, q̇)·∂_ετ|₀`, leaving a trivial time change.
pub fn trivialize_time(sys: &Arc<LagrangianSystem>, triple: &SymmetryTriple) -> Result<SymmetryTriple> {
    if triple.style() != TimeStyle::Tau {
        return Err(Error::Config("trivialize_time expects a tau-style triple".into()));
    }
    let sys = sys.clone();
    let sys2 = sys.clone();
    let time = triple.time.clone();
    let time2 = triple.time.clone();
    let bh = triple.bh.clone();
    let bh2 = triple.bh.clone();
    let pointwise = triple.bh.pointwise;
    let new_bh = BHFunction::functional(move |eps, t, traj| {
        let (q, qd) = traj.state(t)?;
        Ok(bh.value(eps, t, traj)? + eps * sys.lagrangian(t, &q, &qd)? * time.d_eps_at(t, traj)?)
    })
    .with_d_eps(move |t, traj| {
        let (q, qd) = traj.state(t)?;
        Ok(bh2.d_eps_at(t, traj)? + sys2.lagrangian(t, &q, &qd)? * time2.d_eps_at(t, traj)?)
    });
    let mut new_bh = new_bh;
    new_bh.pointwise = pointwise;
    Ok(SymmetryTriple::new(
        triple.space.clone(),
        TimeChange::trivial(TimeStyle::Tau),
        new_bh,
    ))
}

/// Which of the two displayed space-change replacements a style conversion uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConversionForm {
    /// `q_ε(t ± ε·∂τ|₀)`: composition with a shifted time argument.
    Composition,
    /// `q_ε(t) ± ε·(∂τ|₀)·q̇(t)`: first-order expansion, needs no extra padding.
    #[default]
    FirstOrder,
}

fn converted_space(space: &SpaceChange, time: &TimeChange, form: ConversionForm, sign: f64) -> SpaceChange {
    let space = space.clone();
    let time = time.clone();
    let eps0 = space.eps0;
    let h_t = space.h_t;
    let mut out = match form {
        ConversionForm::Composition => SpaceChange::map(move |eps, t, traj: &Trajectory| {
            space.eval(eps, t + sign * eps * time.d_eps_at(t, traj)?, traj)
        }),
        ConversionForm::FirstOrder => SpaceChange::map(move |eps, t, traj: &Trajectory| {
            let q = space.eval(eps, t, traj)?;
            Ok(q + (sign * eps * time.d_eps_at(t, traj)?) * traj.velocity(t)?)
        }),
    };
    out.eps0 = eps0;
    out.h_t = h_t;
    out
}

/// Rewrite a τ-style triple as a θ-style triple with the same constant.
pub fn standard_to_alternative(triple: &SymmetryTriple, form: ConversionForm) -> Result<SymmetryTriple> {
    if triple.style() != TimeStyle::Tau {
        return Err(Error::Config("standard_to_alternative expects tau style".into()));
    }
    Ok(SymmetryTriple::new(
        converted_space(&triple.space, &triple.time, form, 1.0),
        triple.time.restyled(TimeStyle::Theta),
        triple.bh.clone(),
    ))
}

/// Rewrite a θ-style triple as a τ-style triple with the same constant.
pub fn alternative_to_standard(triple: &SymmetryTriple, form: ConversionForm) -> Result<SymmetryTriple> {
    if triple.style() != TimeStyle::Theta {
        return Err(Error::Config("alternative_to_standard expects theta style".into()));
    }
    Ok(SymmetryTriple::new(
        converted_space(&triple.space, &triple.time, form, -1.0),
        triple.time.restyled(TimeStyle::Tau),
        triple.bh.clone(),
    ))
}

/// Per-constant drift statistics over the sampling grid.
#[derive(Debug, Clone, Serialize)]
pub struct DriftReport {
    pub constant_id: String,
    pub kind: ConstantKind,
    pub provenance: Provenance,
    /// Base time whose value all samples are compared against.
    pub t_base: f64,
    pub baseline: f64,
    pub samples: Vec<(f64, f64)>,
    pub max_abs_drift: f64,
    pub rel_drift: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub residual_summary: ResidualSummary,
}

/// Deviation statistics of the sampled values from the baseline.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualSummary {
    pub mean_abs: f64,
    pub max_abs: f64,
}

/// Sample a constant on the 64-point check grid plus endpoints and compare
/// against its value at the left endpoint.
pub fn drift(cq: &ConservedQuantity, traj: &Trajectory, tolerance: f64) -> Result<DriftReport> {
    let (a, b) = traj.interval();
    let mut times = Vec::with_capacity(66);
    times.push(a);
    times.extend(check_grid(a, b));
    times.push(b);

    let baseline = cq.eval(a, traj)?;
    let mut samples = Vec::with_capacity(times.len());
    let mut max_abs = 0.0f64;
    let mut sum_abs = 0.0f64;
    for &t in &times {
        let v = cq.eval(t, traj)?;
        let dev = (v - baseline).abs();
        max_abs = max_abs.max(dev);
        sum_abs += dev;
        samples.push((t, v));
    }
    let rel = max_abs / baseline.abs().max(1.0);
    Ok(DriftReport {
        constant_id: cq.label.clone(),
        kind: cq.kind,
        provenance: cq.provenance,
        t_base: a,
        baseline,
        max_abs_drift: max_abs,
        rel_drift: rel,
        tolerance,
        pass: rel <= tolerance,
        residual_summary: ResidualSummary {
            mean_abs: sum_abs / samples.len() as f64,
            max_abs,
        },
        samples,
    })
}

/// Build the constant of a family whose invariance holds only along the given
/// motion. Two preconditions are measured first and exceeding `threshold`
/// (resp. the anchoring budget) is an error: the family must anchor to the
/// motion (`q_0(t) = q(t)`) and its invariance residual must vanish along it.
pub fn single_motion_constant(
    sys: &Arc<LagrangianSystem>,
    triple: &SymmetryTriple,
    traj: &Trajectory,
    threshold: f64,
) -> Result<ConservedQuantity> {
    let (a, b) = traj.interval();
    let mut anchor = 0.0f64;
    for t in check_grid(a, b) {
        let q0 = triple.space.eval(0.0, t, traj)?;
        let q = traj.position(t)?;
        anchor = anchor.max((q0 - &q).amax() / (1.0 + q.amax()));
    }
    if anchor > 1e-7 {
        return Err(Error::ResidualTooLarge {
            residual: anchor,
            threshold: 1e-7,
        });
    }
    let mut worst = 0.0f64;
    for t in check_grid(a, b) {
        let r = match triple.style() {
            TimeStyle::Tau => invariance_residual(sys, triple, traj, t)?,
            TimeStyle::Theta => alt_invariance_residual(sys, triple, traj, t)?,
        };
        worst = worst.max(r.abs());
    }
    if worst > threshold {
        return Err(Error::ResidualTooLarge {
            residual: worst,
            threshold,
        });
    }
    let mut cq = match triple.style() {
        TimeStyle::Tau => full_constant(sys, triple)?,
        TimeStyle::Theta => alt_full_constant(sys, triple)?,
    };
    cq.provenance = Provenance::SingleMotion;
    cq.label = "single_motion".into();
    Ok(cq)
}

impl TimeChange {
    /// Same evaluator reinterpreted in the other style.
    pub fn restyled(&self, style: TimeStyle) -> TimeChange {
        let mut out = self.clone();
        out.style = style;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, InitialValueProblem};
    use nalgebra::DVector;
    use crate::testkit::{free_particle, harmonic_oscillator, vecn};
    use crate::variation::SpaceForm;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::TAU;

    fn sine() -> (Arc<LagrangianSystem>, Trajectory) {
        let sys = Arc::new(harmonic_oscillator());
        let ivp = InitialValueProblem::new(0.0, vecn(&[0.0]), vecn(&[1.0]), 0.0, TAU);
        (sys.clone(), integrate(&sys, &ivp).unwrap())
    }

    fn energy_gauge_triple(sys: &Arc<LagrangianSystem>) -> SymmetryTriple {
        let sys = sys.clone();
        SymmetryTriple::new(
            SpaceChange::time_shift(),
            TimeChange::trivial(TimeStyle::Tau),
            BHFunction::pointwise(move |t, q, qd| -sys.lagrangian(t, q, qd).unwrap()),
        )
    }

    #[test]
    fn translation_momentum_on_free_particle() {
        let sys = Arc::new(free_particle(2));
        let ivp = InitialValueProblem::new(0.0, vecn(&[0.0, 0.0]), vecn(&[1.0, 0.5]), 0.0, 4.0);
        let traj = integrate(&sys, &ivp).unwrap();
        let u = vecn(&[0.3, -0.8]);
        let expect = 1.0 * 0.3 + 0.5 * (-0.8);
        let u2 = u.clone();
        let family = SpaceChange::pointwise(move |_, _, _| u2.clone());
        let cq = simple_constant(&sys, &family);
        for &t in &[0.0, 1.0, 3.5] {
            assert_abs_diff_eq!(cq.eval(t, &traj).unwrap(), expect, epsilon = 1e-10);
        }
    }

    #[test]
    fn identity_family_gives_zero() {
        let (sys, traj) = sine();
        let family = SpaceChange::map(|_eps, t, traj: &Trajectory| traj.position(t));
        let cq = simple_constant(&sys, &family);
        assert_abs_diff_eq!(cq.eval(1.0, &traj).unwrap(), 0.0, epsilon = 1e-6);
    }

    #[test]
    fn gauge_energy_equals_direct_energy() {
        let (sys, traj) = sine();
        let triple = energy_gauge_triple(&sys);
        let cq = bh_constant(&sys, &triple.space, &triple.bh);
        for &t in &[0.2, 1.4, 5.0] {
            let (q, qd) = traj.state(t).unwrap();
            let e = sys.energy(t, &q, &qd).unwrap();
            assert_abs_diff_eq!(cq.eval(t, &traj).unwrap(), e, epsilon = 1e-7);
        }
    }

    #[test]
    fn nonlocal_shift_constant_is_initial_velocity() {
        let (sys, traj) = sine();
        let shift = SpaceChange::pointwise(|_, q, _| DVector::from_element(q.len(), 1.0));
        let cq = nonlocal_constant(&sys, &shift, 0.0);
        for t in check_grid(0.0, TAU) {
            assert_abs_diff_eq!(cq.eval(t, &traj).unwrap(), 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn full_constant_energy_triple() {
        let (sys, traj) = sine();
        let triple = SymmetryTriple::new(
            SpaceChange::time_shift(),
            TimeChange::tau(|eps, t| t - eps).with_d_eps(|_| -1.0),
            BHFunction::trivial(),
        );
        let cq = full_constant(&sys, &triple).unwrap();
        let (q, qd) = traj.state(0.9).unwrap();
        let e = sys.energy(0.9, &q, &qd).unwrap();
        assert_abs_diff_eq!(cq.eval(0.9, &traj).unwrap(), e, epsilon = 1e-7);
        assert_abs_diff_eq!(cq.eval(0.0, &traj).unwrap(), 0.5, epsilon = 1e-7);
    }

    #[test]
    fn trivialize_bh_recovers_reverse_time_shift() {
        // On a window where L = cos(2t)/2 stays positive, the k = 0
        // trivialization of the energy gauge triple is exactly τ = t − ε.
        let sys = Arc::new(harmonic_oscillator());
        let ivp = InitialValueProblem::new(0.0, vecn(&[0.0]), vecn(&[1.0]), 0.1, 0.6);
        let traj = integrate(&sys, &ivp).unwrap();
        let triple = energy_gauge_triple(&sys);
        let trv = trivialize_bh(&sys, &triple, &traj, Some(0.0)).unwrap();
        assert_eq!(trv.k_shift, 0.0);
        for &t in &[0.2, 0.35, 0.5] {
            let eps = 1e-4;
            assert_abs_diff_eq!(
                trv.triple.time.value(eps, t, &traj).unwrap(),
                t - eps,
                epsilon = 1e-9
            );
        }
        // And with the auto-selected shift the residual stays invariant.
        let trv = trivialize_bh(&sys, &triple, &traj, None).unwrap();
        assert!(trv.k_shift >= 1.0);
        for &t in &[0.2, 0.35, 0.5] {
            let r = invariance_residual(&trv.system, &trv.triple, &traj, t).unwrap();
            assert!(r.abs() < 1e-6, "residual {r}");
        }
    }

    #[test]
    fn explicit_shift_through_a_lagrangian_zero_is_rejected() {
        // Over a full period the oscillator Lagrangian crosses zero, so the
        // unshifted trivialization must refuse.
        let (sys, traj) = sine();
        let triple = energy_gauge_triple(&sys);
        let err = trivialize_bh(&sys, &triple, &traj, Some(0.0));
        assert!(matches!(err, Err(Error::ZeroDenominator { .. })));
    }

    #[test]
    fn trivialize_time_moves_time_change_into_gauge() {
        let (sys, traj) = sine();
        let triple = SymmetryTriple::new(
            SpaceChange::time_shift(),
            TimeChange::tau(|eps, t| t - eps).with_d_eps(|_| -1.0),
            BHFunction::trivial(),
        );
        let out = trivialize_time(&sys, &triple).unwrap();
        assert_abs_diff_eq!(out.time.value(0.123, 1.3, &traj).unwrap(), 1.3, epsilon = 1e-15);
        // ∂_εG_new|₀ = −L along the trajectory.
        for &t in &[0.4, 2.0] {
            let (q, qd) = traj.state(t).unwrap();
            let l = sys.lagrangian(t, &q, &qd).unwrap();
            assert_abs_diff_eq!(out.bh.d_eps_at(t, &traj).unwrap(), -l, epsilon = 1e-9);
        }
        // Unchanged when the time change is already trivial.
        let triple = energy_gauge_triple(&sys);
        let out = trivialize_time(&sys, &triple).unwrap();
        for &t in &[0.4, 2.0] {
            assert_abs_diff_eq!(
                out.bh.d_eps_at(t, &traj).unwrap(),
                triple.bh.d_eps_at(t, &traj).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn style_conversion_preserves_the_constant() {
        let (sys, traj) = sine();
        let triple = SymmetryTriple::new(
            SpaceChange::time_shift(),
            TimeChange::tau(|eps, t| t - eps).with_d_eps(|_| -1.0),
            BHFunction::trivial(),
        );
        let orig = full_constant(&sys, &triple).unwrap();
        for form in [ConversionForm::FirstOrder, ConversionForm::Composition] {
            let conv = standard_to_alternative(&triple, form).unwrap();
            let alt = alt_full_constant(&sys, &conv).unwrap();
            for &t in &[0.5, 2.2, 4.0] {
                assert_abs_diff_eq!(
                    orig.eval(t, &traj).unwrap(),
                    alt.eval(t, &traj).unwrap(),
                    epsilon = 1e-6
                );
            }
            let back = alternative_to_standard(&conv, form).unwrap();
            let cq = full_constant(&sys, &back).unwrap();
            assert_abs_diff_eq!(
                cq.eval(1.0, &traj).unwrap(),
                orig.eval(1.0, &traj).unwrap(),
                epsilon = 1e-6
            );
        }
    }

    #[test]
    fn alt_constant_of_trivial_triple_is_zero() {
        let (sys, traj) = sine();
        let triple = SymmetryTriple::new(
            SpaceChange::map(|_eps, t, traj: &Trajectory| traj.position(t)),
            TimeChange::trivial(TimeStyle::Theta),
            BHFunction::trivial(),
        );
        let cq = alt_full_constant(&sys, &triple).unwrap();
        for &t in &[0.3, 2.0, 5.1] {
            assert_abs_diff_eq!(cq.eval(t, &traj).unwrap(), 0.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn conversion_with_trivial_time_change_keeps_the_space_change() {
        let (_, traj) = sine();
        let triple = SymmetryTriple::new(
            SpaceChange::pointwise(|_, q, _| q.clone()),
            TimeChange::trivial(TimeStyle::Tau),
            BHFunction::trivial(),
        );
        let conv = standard_to_alternative(&triple, ConversionForm::Composition).unwrap();
        for &t in &[0.5, 3.3] {
            let a = triple.space.eval(2e-4, t, &traj).unwrap();
            let b = conv.space.eval(2e-4, t, &traj).unwrap();
            assert_abs_diff_eq!(a[0], b[0], epsilon = 1e-14);
        }
    }

    #[test]
    fn drift_passes_on_motion_and_fails_on_arbitrary_curve() {
        let (sys, traj) = sine();
        let triple = energy_gauge_triple(&sys);
        let energy = bh_constant(&sys, &triple.space, &triple.bh).with_label("energy");
        let report = drift(&energy, &traj, 1e-6).unwrap();
        assert!(report.pass, "rel drift {}", report.rel_drift);

        let curve = Trajectory::from_fn(
            sys.clone(),
            (0.0, 2.0),
            0.4,
            2048,
            |t| vecn(&[t * t]),
            |t| vecn(&[2.0 * t]),
        );
        let sys2 = sys.clone();
        let direct_energy = ConservedQuantity::explicit("energy_direct", move |t, tr| {
            let (q, qd) = tr.state(t)?;
            sys2.energy(t, &q, &qd)
        });
        let report = drift(&direct_energy, &curve, 1e-6).unwrap();
        assert!(!report.pass);
        assert!(report.max_abs_drift > 0.1);

        let zero = ConservedQuantity::explicit("zero", |_, _| Ok(0.0));
        assert!(drift(&zero, &traj, 1e-6).unwrap().pass);
    }

    #[test]
    fn space_form_pointwise_is_exact() {
        let (_, traj) = sine();
        let family = SpaceChange::pointwise(|t, q, qd| q + t * qd);
        if let SpaceForm::Pointwise(_) = family.form {
            let d = family.d_eps(&traj, 1.0).unwrap();
            let (q, qd) = traj.state(1.0).unwrap();
            assert_abs_diff_eq!(d[0], q[0] + 1.0 * qd[0], epsilon = 1e-15);
        } else {
            panic!("expected pointwise form");
        }
    }
}
