//! Exponentially damped Lagrangian `e^{(k/m)t}(½m q̇² − c q²)`: the decaying
//! energy-plus-action constant and the true first integral of the quadratic
//! potential, plus the delay-style symmetry known for this system.

use std::sync::Arc;

use nalgebra::DVector;

use crate::constants::{
    alt_full_constant, bh_constant, nonlocal_constant, ConservedQuantity, PerTrajectoryCache,
};
use crate::dynamics::{InitialValueProblem, Trajectory};
use crate::error::Result;
use crate::quadrature::CumulativeIntegral;
use crate::systems::dissipative_oscillator;
use crate::variation::{BHFunction, SpaceChange, SymmetryTriple, TimeChange, TimeStyle};

use super::{
    max_pointwise_disagreement, push_standard_checks, Applicability, CatalogEntry, CheckOutcome,
    EntryCheck, ExpectedConstant, NamedTriple, PsiCondition,
};

const M: f64 = 1.0;
const K_FRICTION: f64 = 1.0;
const C_POTENTIAL: f64 = 0.5;
const H: f64 = K_FRICTION / M;

fn vecn(v: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(v)
}

/// Undamped energy `½m q̇² + c q²`.
fn bare_energy(q: &DVector<f64>, qd: &DVector<f64>) -> f64 {
    0.5 * M * qd.norm_squared() + C_POTENTIAL * q.norm_squared()
}

/// The point-function first integral `e^{kt/m}(E + ½ k q·q̇)`.
fn first_integral() -> ConservedQuantity {
    ConservedQuantity::explicit("first_integral", |t, tr| {
        let (q, qd) = tr.state(t)?;
        Ok((H * t).exp() * (bare_energy(&q, &qd) + 0.5 * K_FRICTION * q.dot(&qd)))
    })
}

pub(super) fn dissipative_entry() -> Result<CatalogEntry> {
    let system = Arc::new(dissipative_oscillator(M, K_FRICTION, C_POTENTIAL));
    let ivp = InitialValueProblem::new(0.0, vecn(&[1.0]), vecn(&[0.0]), 0.0, 10.0);

    // Gauge −εℒ + ε(k/2)e^{kt/m} q·q̇ catches the time-shift family exactly
    // when the potential is homogeneous of degree 2.
    let sys_g = system.clone();
    let gauge = BHFunction::pointwise(move |t, q, qd| {
        -sys_g.lagrangian(t, q, qd).unwrap() + 0.5 * K_FRICTION * (H * t).exp() * q.dot(qd)
    });
    let gauge_triple = SymmetryTriple::new(
        SpaceChange::time_shift(),
        TimeChange::trivial(TimeStyle::Tau),
        gauge,
    );

    // Delay-style symmetry: Q_ε(t) = (1 − εk/2m)·q(t) with θ_ε(t) = t + ε is
    // a finite invariance in the reparameterization style, valid on any
    // smooth curve.
    let logan_triple = SymmetryTriple::new(
        SpaceChange::pointwise(|_, q, _| (-0.5 * K_FRICTION / M) * q),
        TimeChange::theta(|eps, t| t + eps).with_d_eps(|_| 1.0),
        BHFunction::trivial(),
    );

    let sys_psi = system.clone();
    let mut entry = CatalogEntry {
        id: "dissipative_quadratic".into(),
        summary: "damped oscillator: decaying energy + action constant and a true first integral".into(),
        notes: "time-shift family with gauge; delay-style scaling symmetry of the damped oscillator".into(),
        system: system.clone(),
        default_ivp: ivp,
        triples: vec![
            NamedTriple {
                name: "time_shift_gauge".into(),
                tag: "dissipative/gauge",
                triple: gauge_triple.clone(),
                invariance: Some(Applicability::AllMotions),
                psi: Some(PsiCondition {
                    psi: Arc::new(move |t, q, qd| {
                        sys_psi.lagrangian(t, q, qd).unwrap()
                            - 0.5 * K_FRICTION * (H * t).exp() * q.dot(qd)
                    }),
                    applicability: Applicability::AllMotions,
                }),
            },
            NamedTriple {
                name: "logan_scaling".into(),
                tag: "dissipative/delay-scaling",
                triple: logan_triple.clone(),
                invariance: Some(Applicability::AnyCurve),
                psi: None,
            },
        ],
        expected: Vec::new(),
        checks: Vec::new(),
        probe_curve: Some(Arc::new(|sys, (a, b)| {
            // Damped envelope keeps e^{ht}L of order one along the probe, so
            // absolute residual thresholds stay meaningful.
            let u = |t: f64| (0.9 * t).cos() + 0.2 * (0.3 * t).sin() + 0.5;
            let ud = |t: f64| -0.9 * (0.9 * t).sin() + 0.06 * (0.3 * t).cos();
            Trajectory::from_fn(
                sys.clone(),
                (a, b),
                0.2 * (b - a),
                4096,
                move |t| vecn(&[(-0.5 * t).exp() * u(t)]),
                move |t| vecn(&[(-0.5 * t).exp() * (ud(t) - 0.5 * u(t))]),
            )
        })),
    };

    // Running dissipative action ∫_0^t ℒ ds, cached per trajectory.
    let sys_a = system.clone();
    let action_cache: Arc<PerTrajectoryCache<CumulativeIntegral>> = Arc::new(PerTrajectoryCache::new());
    let running_action = move |tr: &Trajectory| -> Result<Arc<CumulativeIntegral>> {
        let sys = sys_a.clone();
        action_cache.get_or_build(tr, || {
            let (a, b) = tr.interval();
            CumulativeIntegral::build(a, b, 8192, |s| {
                let (q, qd) = tr.state(s)?;
                sys.lagrangian(s, &q, &qd)
            })
        })
    };

    let sys = system.clone();
    entry.expected.push(ExpectedConstant::new(
        "energy_plus_action_nonlocal",
        "integral constant of the time-shift family",
        1e-6,
        Applicability::AllMotions,
        move |traj| {
            let (a, _) = traj.interval();
            Ok(nonlocal_constant(&sys, &SpaceChange::time_shift(), a))
        },
    ));
    let sys = system.clone();
    let ra = running_action.clone();
    entry.expected.push(ExpectedConstant::new(
        "energy_plus_action_explicit",
        "decaying energy e^{kt/m}E plus k/m times the running action",
        1e-6,
        Applicability::AllMotions,
        move |_| {
            let sys = sys.clone();
            let ra = ra.clone();
            Ok(ConservedQuantity::explicit("energy_plus_action_explicit", move |t, tr| {
                let (q, qd) = tr.state(t)?;
                let dissipative_energy = sys.energy(t, &q, &qd)?;
                let (a, _) = tr.interval();
                Ok(dissipative_energy + H * ra(tr)?.between(a, t)?)
            }))
        },
    ));
    let sys = system.clone();
    let tr = gauge_triple.clone();
    entry.expected.push(ExpectedConstant::new(
        "first_integral_gauge",
        "true first integral from the quadratic-potential gauge",
        1e-6,
        Applicability::AllMotions,
        move |_| Ok(bh_constant(&sys, &tr.space, &tr.bh)),
    ));
    let sys = system.clone();
    let lt = logan_triple.clone();
    entry.expected.push(ExpectedConstant::new(
        "scaling_integral",
        "first integral of the delay-style scaling symmetry",
        1e-6,
        Applicability::AllMotions,
        move |_| alt_full_constant(&sys, &lt),
    ));

    entry.checks.push(EntryCheck::new(
        "gauge_equals_first_integral",
        "gauge constant equals e^{kt/m}(E + ½k q·q̇) pointwise",
        |ctx| {
            let nt = ctx.entry.find_triple("time_shift_gauge").unwrap();
            let cq = bh_constant(ctx.system, &nt.triple.space, &nt.triple.bh);
            let d = max_pointwise_disagreement(&cq, &first_integral(), ctx.traj)?;
            Ok(CheckOutcome::within(d, 1e-6, "explicit formula"))
        },
    ));
    entry.checks.push(EntryCheck::new(
        "scaling_opposes_first_integral",
        "the scaling constant is the first integral with opposite sign",
        |ctx| {
            let nt = ctx.entry.find_triple("logan_scaling").unwrap();
            let cq = alt_full_constant(ctx.system, &nt.triple)?;
            let fi = first_integral();
            let (a, b) = ctx.traj.interval();
            let mut worst = 0.0f64;
            for t in crate::variation::check_grid(a, b) {
                worst = worst.max((cq.eval(t, ctx.traj)? + fi.eval(t, ctx.traj)?).abs());
            }
            Ok(CheckOutcome::within(worst, 1e-6, "N = −e^{kt/m}(E + ½k q·q̇)"))
        },
    ));

    push_standard_checks(&mut entry);
    Ok(entry)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{alternative_to_standard, full_constant, trivialize_bh, ConversionForm};
    use crate::dynamics::integrate;
    use crate::variation::invariance_residual;
    use approx::assert_abs_diff_eq;

    #[test]
    fn delay_form_of_the_scaling_symmetry() {
        // Converting the scaling symmetry to the moving-interval style with
        // the composition form reproduces (1 − εk/2m)·q(t − ε).
        let entry = dissipative_entry().unwrap();
        let traj = integrate(&entry.system, &entry.default_ivp).unwrap();
        let nt = entry.find_triple("logan_scaling").unwrap();
        let conv = alternative_to_standard(&nt.triple, ConversionForm::Composition).unwrap();
        let eps = 1e-4;
        for &t in &[1.0, 3.7, 8.2] {
            let got = conv.space.eval(eps, t, &traj).unwrap();
            let expect = (1.0 - eps * K_FRICTION / (2.0 * M)) * traj.position(t - eps).unwrap();
            assert_abs_diff_eq!(got[0], expect[0], epsilon = 1e-10);
        }
        // That converted triple carries the same constant through the
        // tau-style theorem.
        let tau_cq = full_constant(&entry.system, &conv).unwrap();
        let theta_cq = alt_full_constant(&entry.system, &nt.triple).unwrap();
        for &t in &[0.5, 4.0, 9.0] {
            assert_abs_diff_eq!(
                tau_cq.eval(t, &traj).unwrap(),
                theta_cq.eval(t, &traj).unwrap(),
                epsilon = 1e-6
            );
        }
    }

    #[test]
    fn trivialized_time_change_formula_on_positive_window() {
        // Where L stays away from zero, the k = 0 gauge trivialization of the
        // time-shift gauge triple is τ = t − ε + ε·k(q·q̇)/(2L).
        let entry = dissipative_entry().unwrap();
        let ivp = InitialValueProblem::new(0.0, vecn(&[1.0]), vecn(&[0.0]), 0.0, 0.4);
        let traj = integrate(&entry.system, &ivp).unwrap();
        let nt = entry.find_triple("time_shift_gauge").unwrap();
        let trv = trivialize_bh(&entry.system, &nt.triple, &traj, Some(0.0)).unwrap();
        let eps = 1e-5;
        for &t in &[0.1, 0.2, 0.3] {
            let (q, qd) = traj.state(t).unwrap();
            let l_bare = 0.5 * M * qd.norm_squared() - C_POTENTIAL * q.norm_squared();
            let expect = t - eps + eps * K_FRICTION * q.dot(&qd) / (2.0 * l_bare);
            let got = trv.triple.time.value(eps, t, &traj).unwrap();
            assert_abs_diff_eq!(got, expect, epsilon = 1e-9);
            let r = invariance_residual(&trv.system, &trv.triple, &traj, t).unwrap();
            assert!(r.abs() < 1e-6, "residual {r}");
        }
    }
}
