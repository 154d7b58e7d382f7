//! Harmonic-oscillator space changes: shift, dilation and the nonlocal
//! integral family, all feeding the integral constant of motion.

use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::DVector;

use crate::constants::{bh_constant, nonlocal_constant, ConservedQuantity, PerTrajectoryCache};
use crate::dynamics::{InitialValueProblem, Trajectory};
use crate::error::Result;
use crate::quadrature::CumulativeIntegral;
use crate::systems::harmonic_oscillator;
use crate::variation::{check_grid, total_derivative_check, BHFunction, SpaceChange, SymmetryTriple, TimeStyle};

use super::{
    push_standard_checks, Applicability, CatalogEntry, CheckOutcome, EntryCheck, ExpectedConstant,
    NamedTriple, PsiCondition,
};

fn vecn(v: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(v)
}

fn default_ivp() -> InitialValueProblem {
    InitialValueProblem::new(0.0, vecn(&[0.0]), vecn(&[1.0]), 0.0, TAU)
}

fn bent_curve() -> Arc<super::ProbeCurveFn> {
    Arc::new(|sys, (a, b)| {
        Trajectory::from_fn(
            sys.clone(),
            (a, b),
            0.2 * (b - a),
            4096,
            |t| vecn(&[t * t]),
            |t| vecn(&[2.0 * t]),
        )
    })
}

/// Check that the gauge built from the always-available ψ = ∂_q̇L·φ yields the
/// identically-zero constant.
fn trivial_psi_check(triple_name: &'static str) -> EntryCheck {
    EntryCheck::new(
        format!("trivial_psi_zero_{triple_name}"),
        "gauge from ψ = ∂_q̇L·φ collapses the constant to 0",
        move |ctx| {
            let nt = ctx.entry.find_triple(triple_name).unwrap();
            let sys = ctx.system.clone();
            let space = nt.triple.space.clone();
            let traj_psi = move |t: f64, tr: &Trajectory| -> Result<f64> {
                let (q, qd) = tr.state(t)?;
                let p = sys.grad_qdot(t, &q, &qd)?;
                Ok(p.dot(&space.d_eps(tr, t)?))
            };
            let psi2 = traj_psi.clone();
            let gauge = BHFunction::functional(move |eps, t, tr| Ok(-eps * traj_psi(t, tr)?))
                .with_d_eps(move |t, tr| Ok(-psi2(t, tr)?));
            let cq = bh_constant(ctx.system, &nt.triple.space, &gauge);
            let (a, b) = ctx.traj.interval();
            let mut worst = 0.0f64;
            for t in check_grid(a, b) {
                worst = worst.max(cq.eval(t, ctx.traj)?.abs());
            }
            Ok(CheckOutcome::within(worst, 1e-8, "identically zero"))
        },
    )
}

pub(super) fn shift_entry() -> Result<CatalogEntry> {
    let system = Arc::new(harmonic_oscillator());
    let shift = SpaceChange::pointwise(|_, q, _| DVector::from_element(q.len(), 1.0));

    let mut entry = CatalogEntry {
        id: "oscillator_shift".into(),
        summary: "space shift q + ε: integral constant equal to q̇(t0)".into(),
        notes: "the shift is no symmetry, yet the integral theorem still yields a constant".into(),
        system: system.clone(),
        default_ivp: default_ivp(),
        triples: vec![NamedTriple {
            name: "space_shift".into(),
            tag: "oscillator/shift",
            triple: SymmetryTriple::space_only(shift.clone(), TimeStyle::Tau),
            invariance: None,
            psi: Some(PsiCondition {
                psi: Arc::new(|_, _, qd| qd[0]),
                applicability: Applicability::AllMotions,
            }),
        }],
        expected: Vec::new(),
        checks: Vec::new(),
        probe_curve: Some(bent_curve()),
    };

    let sys = system.clone();
    let sc = shift.clone();
    entry.expected.push(ExpectedConstant::new(
        "initial_velocity",
        "integral constant of the shift family, base point t0 = a",
        1e-6,
        Applicability::AllMotions,
        move |traj| {
            let (a, _) = traj.interval();
            Ok(nonlocal_constant(&sys, &sc, a))
        },
    ));

    entry.checks.push(EntryCheck::new(
        "equals_initial_velocity",
        "the integral constant evaluates to q̇(t0) at every sample time",
        |ctx| {
            let nt = ctx.entry.find_triple("space_shift").unwrap();
            let (a, b) = ctx.traj.interval();
            let mut worst = 0.0f64;
            for t0 in [a, 1.3] {
                let cq = nonlocal_constant(ctx.system, &nt.triple.space, t0);
                let expect = ctx.traj.velocity(t0)?[0];
                for t in check_grid(a, b) {
                    worst = worst.max((cq.eval(t, ctx.traj)? - expect).abs());
                }
            }
            Ok(CheckOutcome::within(worst, 1e-6, "N(t) = q̇(t0) for t0 ∈ {a, 1.3}"))
        },
    ));
    entry.checks.push(EntryCheck::new(
        "psi_fails_off_motions",
        "ψ = q̇ violates the total-derivative condition on the bent curve q = t²",
        |ctx| {
            let probe = ctx.entry.probe().unwrap();
            let (a, b) = probe.interval();
            let nt = ctx.entry.find_triple("space_shift").unwrap();
            let psi = |_: f64, _: &DVector<f64>, qd: &DVector<f64>| qd[0];
            let r = total_derivative_check(ctx.system, &nt.triple.space, &psi, &probe, &check_grid(a, b))?;
            Ok(CheckOutcome::exceeds(r, 1e-2, "residual must be large off motions"))
        },
    ));
    entry.checks.push(trivial_psi_check("space_shift"));
    push_standard_checks(&mut entry);
    Ok(entry)
}

pub(super) fn dilation_entry() -> Result<CatalogEntry> {
    let system = Arc::new(harmonic_oscillator());
    let dilation = SpaceChange::pointwise(|_, q, _| q.clone());

    let mut entry = CatalogEntry {
        id: "oscillator_dilation".into(),
        summary: "dilation (1+ε)q: integral constant q q̇ − 2∫L".into(),
        notes: "∂_εL|₀ = 2L; a total derivative only along motions".into(),
        system: system.clone(),
        default_ivp: default_ivp(),
        triples: vec![NamedTriple {
            name: "dilation".into(),
            tag: "oscillator/dilation",
            triple: SymmetryTriple::space_only(dilation.clone(), TimeStyle::Tau),
            invariance: None,
            psi: Some(PsiCondition {
                psi: Arc::new(|_, q, qd| q[0] * qd[0]),
                applicability: Applicability::AllMotions,
            }),
        }],
        expected: Vec::new(),
        checks: Vec::new(),
        probe_curve: Some(bent_curve()),
    };

    let sys = system.clone();
    let sc = dilation.clone();
    entry.expected.push(ExpectedConstant::new(
        "virial_integral",
        "q q̇ minus twice the running action",
        1e-6,
        Applicability::AllMotions,
        move |traj| {
            let (a, _) = traj.interval();
            Ok(nonlocal_constant(&sys, &sc, a))
        },
    ));

    entry.checks.push(EntryCheck::new(
        "d_eps_is_twice_lagrangian",
        "∂_εL|₀ of the dilation equals 2L pointwise",
        |ctx| {
            let nt = ctx.entry.find_triple("dilation").unwrap();
            let (a, b) = ctx.traj.interval();
            let mut worst = 0.0f64;
            for t in check_grid(a, b) {
                let v = crate::variation::d_eps_lagrangian(ctx.system, &nt.triple.space, ctx.traj, t)?;
                let (q, qd) = ctx.traj.state(t)?;
                let l = ctx.system.lagrangian(t, &q, &qd)?;
                worst = worst.max((v - 2.0 * l).abs());
            }
            Ok(CheckOutcome::within(worst, 1e-6, "2L"))
        },
    ));
    entry.checks.push(trivial_psi_check("dilation"));
    push_standard_checks(&mut entry);
    Ok(entry)
}

pub(super) fn nonlocal_entry() -> Result<CatalogEntry> {
    let system = Arc::new(harmonic_oscillator());

    // q_ε(t) = q(t) + ε ∫_0^t q dτ, with the inner integral cached per
    // trajectory; the family velocity q̇ + ε q(t) is supplied in closed form.
    let cache: Arc<PerTrajectoryCache<CumulativeIntegral>> = Arc::new(PerTrajectoryCache::new());
    let integral_of_q = move |tr: &Trajectory| -> Result<Arc<CumulativeIntegral>> {
        cache.get_or_build(tr, || {
            let (lo, hi) = tr.padded_interval();
            CumulativeIntegral::build(lo, hi, 8192, |s| Ok(tr.position(s)?[0]))
        })
    };
    let iq = integral_of_q.clone();
    let family = SpaceChange::map(move |eps, t, tr: &Trajectory| {
        let table = iq(tr)?;
        let i = table.between(0.0, t)?;
        Ok(tr.position(t)? + vecn(&[eps * i]))
    })
    .with_velocity(move |eps, t, tr: &Trajectory| {
        Ok(tr.velocity(t)? + eps * tr.position(t)?)
    });

    let mut entry = CatalogEntry {
        id: "oscillator_nonlocal".into(),
        summary: "nonlocal family q + ε∫q: constant simplifying to (q̇(0) − q̇(t0))·q̇(t0)".into(),
        notes: "the space change itself depends on the whole trajectory".into(),
        system: system.clone(),
        default_ivp: default_ivp(),
        triples: vec![NamedTriple {
            name: "integral_family".into(),
            tag: "oscillator/nonlocal-family",
            triple: SymmetryTriple::space_only(family.clone(), TimeStyle::Tau),
            invariance: None,
            psi: None,
        }],
        expected: Vec::new(),
        checks: Vec::new(),
        probe_curve: None,
    };

    let sys = system.clone();
    let fam = family.clone();
    entry.expected.push(ExpectedConstant::new(
        "velocity_correlation",
        "integral constant of the nonlocal family, t0 = 1",
        1e-6,
        Applicability::AllMotions,
        move |_| Ok(nonlocal_constant(&sys, &fam, 1.0)),
    ));
    let iq2 = integral_of_q.clone();
    entry.expected.push(ExpectedConstant::new(
        "roundabout_energy",
        "q̇∫q − q²/2 + (∫q)²/2, the t0-free variant",
        1e-6,
        Applicability::AllMotions,
        move |_| {
            let iq = iq2.clone();
            Ok(ConservedQuantity::explicit("roundabout_energy", move |t, tr| {
                let i = iq(tr)?.between(0.0, t)?;
                let (q, qd) = tr.state(t)?;
                Ok(qd[0] * i - 0.5 * q[0] * q[0] + 0.5 * i * i)
            }))
        },
    ));

    entry.checks.push(EntryCheck::new(
        "simplified_value",
        "constant equals (q̇(0) − q̇(t0))·q̇(t0) for several base points",
        |ctx| {
            let nt = ctx.entry.find_triple("integral_family").unwrap();
            let (a, b) = ctx.traj.interval();
            let qd0 = ctx.traj.velocity(0.0)?[0];
            let mut worst = 0.0f64;
            for t0 in [1.0, std::f64::consts::FRAC_PI_2, 3.0] {
                let cq = nonlocal_constant(ctx.system, &nt.triple.space, t0);
                let qdt0 = ctx.traj.velocity(t0)?[0];
                let expect = (qd0 - qdt0) * qdt0;
                for t in check_grid(a, b) {
                    worst = worst.max((cq.eval(t, ctx.traj)? - expect).abs());
                }
            }
            Ok(CheckOutcome::within(worst, 1e-6, "t0 ∈ {1, π/2, 3}"))
        },
    ));
    entry.checks.push(EntryCheck::new(
        "roundabout_energy_value",
        "the t0-free variant equals q̇(0)²/2 − E, a disguised energy law",
        |ctx| {
            let exp = &ctx.entry.expected[1];
            let cq = exp.build(ctx.traj)?;
            let (a, b) = ctx.traj.interval();
            let qd0 = ctx.traj.velocity(0.0)?[0];
            let mut worst = 0.0f64;
            for t in check_grid(a, b) {
                let (q, qd) = ctx.traj.state(t)?;
                let e = ctx.system.energy(t, &q, &qd)?;
                worst = worst.max((cq.eval(t, ctx.traj)? - (0.5 * qd0 * qd0 - e)).abs());
            }
            Ok(CheckOutcome::within(worst, 1e-6, "−E + q̇(0)²/2"))
        },
    ));
    push_standard_checks(&mut entry);
    Ok(entry)
}
