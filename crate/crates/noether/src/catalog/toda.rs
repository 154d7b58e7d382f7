//! Nonperiodic exponential lattice: the weighted-momentum integral constant
//! and the asymptotic-velocity constants shared by all cone potentials.

use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constants::{nonlocal_constant, ConservedQuantity, PerTrajectoryCache};
use crate::dynamics::{InitialValueProblem, Trajectory};
use crate::error::Result;
use crate::quadrature::CumulativeIntegral;
use crate::systems::{toda, toda_potential};
use crate::variation::{check_grid, SpaceChange, SymmetryTriple, TimeStyle};

use super::{
    max_baseline_disagreement, push_standard_checks, Applicability, CatalogEntry, CheckOutcome,
    EntryCheck, ExpectedConstant, NamedTriple,
};

fn vecn(v: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(v)
}

/// Shift family `q + εv` paired with the integral constant, which evaluates to
/// `q̇(t0)·v` on every motion; checked for three seeded random directions.
pub(super) fn cone_velocity_check() -> EntryCheck {
    EntryCheck::new(
        "asymptotic_velocity_pairing",
        "integral constant of q + εv equals q̇(t0)·v for 3 random directions",
        |ctx| {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let (a, b) = ctx.traj.interval();
            let dim = ctx.system.dim();
            let mut worst = 0.0f64;
            for _ in 0..3 {
                let v = DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
                let v2 = v.clone();
                let family = SpaceChange::pointwise(move |_, _, _| v2.clone());
                let cq = nonlocal_constant(ctx.system, &family, a);
                let expect = ctx.traj.velocity(a)?.dot(&v);
                for t in check_grid(a, b) {
                    worst = worst.max((cq.eval(t, ctx.traj)? - expect).abs());
                }
            }
            Ok(CheckOutcome::within(worst, 1e-6, "q̇(t0)·v for seeded v"))
        },
    )
}

pub(super) fn toda_entry(n: usize) -> Result<CatalogEntry> {
    assert!(n >= 2);
    let system = Arc::new(toda(n));
    let (q0, qd0) = match n {
        2 => (vecn(&[-1.0, 1.0]), vecn(&[0.0, 0.0])),
        3 => (vecn(&[-2.0, 0.0, 2.0]), vecn(&[0.0, 0.0, 0.0])),
        _ => (
            DVector::from_fn(n, |i, _| 2.0 * i as f64 - (n - 1) as f64),
            DVector::zeros(n),
        ),
    };
    let ivp = InitialValueProblem::new(0.0, q0, qd0, 0.0, 10.0);

    // Q_ε(t) = Q(e^{−ε} t) + ε(1, 2, …, n), chosen so that the potential picks
    // up a clean factor e^{−ε}.
    let ladder = DVector::from_fn(n, |i, _| (i + 1) as f64);
    let family = SpaceChange::map(move |eps, t, tr: &Trajectory| {
        Ok(tr.position((-eps).exp() * t)? + eps * &ladder)
    })
    .with_velocity(|eps, t, tr: &Trajectory| {
        Ok((-eps).exp() * tr.velocity((-eps).exp() * t)?)
    });

    let mut entry = CatalogEntry {
        id: format!("toda_n{n}"),
        summary: "exponential lattice: weighted momentum minus potential action is constant".into(),
        notes: "cone potential; repelling particles with finite asymptotic velocities".into(),
        system: system.clone(),
        default_ivp: ivp,
        triples: vec![NamedTriple {
            name: "lattice_scale".into(),
            tag: "toda/scaled-ladder",
            triple: SymmetryTriple::space_only(family.clone(), TimeStyle::Tau),
            invariance: None,
            psi: None,
        }],
        expected: Vec::new(),
        checks: Vec::new(),
        probe_curve: None,
    };

    let sys = system.clone();
    entry.expected.push(ExpectedConstant::new(
        "energy",
        "lattice energy",
        1e-6,
        Applicability::AllMotions,
        move |_| {
            let sys = sys.clone();
            Ok(ConservedQuantity::explicit("energy", move |t, tr| {
                let (q, qd) = tr.state(t)?;
                sys.energy(t, &q, &qd)
            }))
        },
    ));
    let sys = system.clone();
    let fam = family.clone();
    entry.expected.push(ExpectedConstant::new(
        "weighted_momentum_action",
        "integral constant of the scaled-ladder family (t0 = 0)",
        1e-6,
        Applicability::AllMotions,
        move |_| Ok(nonlocal_constant(&sys, &fam, 0.0)),
    ));

    // Σ_k k·q̇_k(t) − ∫_0^t V, the reduced form of the same constant.
    let reduced = move |tr: &Trajectory,
                        cache: &PerTrajectoryCache<CumulativeIntegral>|
          -> Result<ConservedQuantity> {
        let table = cache.get_or_build(tr, || {
            let (a, b) = tr.interval();
            CumulativeIntegral::build(a, b, 8192, |s| Ok(toda_potential(s, &tr.position(s)?)))
        })?;
        Ok(ConservedQuantity::explicit("weighted_momentum_reduced", move |t, tr| {
            let qd = tr.velocity(t)?;
            let weighted: f64 = (0..qd.len()).map(|k| (k + 1) as f64 * qd[k]).sum();
            Ok(weighted - table.between(0.0, t)?)
        }))
    };

    let cache: Arc<PerTrajectoryCache<CumulativeIntegral>> = Arc::new(PerTrajectoryCache::new());
    let cache2 = cache.clone();
    entry.checks.push(EntryCheck::new(
        "reduced_form_matches",
        "integral constant agrees with Σ k·q̇_k − ∫V after baseline subtraction",
        move |ctx| {
            let nt = ctx.entry.find_triple("lattice_scale").unwrap();
            let nl = nonlocal_constant(ctx.system, &nt.triple.space, 0.0);
            let red = reduced(ctx.traj, &cache2)?;
            let d = max_baseline_disagreement(&nl, &red, ctx.traj)?;
            Ok(CheckOutcome::within(d, 1e-6, "reduced vs raw integral constant"))
        },
    ));
    let cache3 = cache.clone();
    entry.checks.push(EntryCheck::new(
        "reduced_form_is_constant",
        "Σ k·q̇_k − ∫V stays at its t = 0 value",
        move |ctx| {
            let table = cache3.get_or_build(ctx.traj, || {
                let (a, b) = ctx.traj.interval();
                let tr = ctx.traj;
                CumulativeIntegral::build(a, b, 8192, |s| Ok(toda_potential(s, &tr.position(s)?)))
            })?;
            let (a, b) = ctx.traj.interval();
            let weighted = |t: f64| -> Result<f64> {
                let qd = ctx.traj.velocity(t)?;
                Ok((0..qd.len()).map(|k| (k + 1) as f64 * qd[k]).sum())
            };
            let base = weighted(0.0)?;
            let mut worst = 0.0f64;
            for t in check_grid(a, b) {
                let v = weighted(t)? - table.between(0.0, t)?;
                worst = worst.max((v - base).abs());
            }
            Ok(CheckOutcome::within(worst, 1e-6, "value pinned at t = 0"))
        },
    ));
    entry.checks.push(cone_velocity_check());
    push_standard_checks(&mut entry);
    Ok(entry)
}
