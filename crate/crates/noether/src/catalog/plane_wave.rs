//! Particle in a travelling quadratic field `U(q − tu)`: the drift-corrected
//! energy `q̇·u − E` from a space shift combined with a forward time change
//! and a velocity-dependent gauge.

use std::sync::Arc;

use nalgebra::DVector;

use crate::constants::{full_constant, ConservedQuantity};
use crate::dynamics::InitialValueProblem;
use crate::error::Result;
use crate::systems::plane_wave;
use crate::variation::{BHFunction, SpaceChange, SymmetryTriple, TimeChange};

use super::{
    max_pointwise_disagreement, push_standard_checks, Applicability, CatalogEntry, CheckOutcome,
    EntryCheck, ExpectedConstant, NamedTriple,
};

fn vecn(v: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(v)
}

fn wave_triple() -> SymmetryTriple {
    SymmetryTriple::new(
        SpaceChange::pointwise(|_, q, _| {
            let mut u = DVector::zeros(q.len());
            u[0] = 1.0;
            u
        }),
        TimeChange::tau(|eps, t| t + eps).with_d_eps(|_| 1.0),
        BHFunction::pointwise(|_, _, qd| -qd.norm_squared()),
    )
}

pub(super) fn plane_wave_entry() -> Result<CatalogEntry> {
    let u = vecn(&[1.0, 0.0]);
    let system = Arc::new(plane_wave(u.clone()));
    let ivp = InitialValueProblem::new(0.0, vecn(&[1.0, 0.0]), vecn(&[0.0, 1.0]), 0.0, 10.0);

    let mut entry = CatalogEntry {
        id: "plane_wave".into(),
        summary: "travelling quadratic field: q̇·u − E from shift + time change + gauge".into(),
        notes: "gauge depends on the velocity; every piece of the triple is nontrivial".into(),
        system: system.clone(),
        default_ivp: ivp,
        triples: vec![NamedTriple {
            name: "comoving_shift".into(),
            tag: "plane-wave/comoving",
            triple: wave_triple(),
            invariance: Some(Applicability::AllMotions),
            psi: None,
        }],
        expected: Vec::new(),
        checks: Vec::new(),
        probe_curve: None,
    };

    let sys = system.clone();
    entry.expected.push(ExpectedConstant::new(
        "drift_energy",
        "q̇·u + L − ‖q̇‖² from the full theorem",
        1e-6,
        Applicability::AllMotions,
        move |_| full_constant(&sys, &wave_triple()),
    ));
    let sys = system.clone();
    let u2 = u.clone();
    entry.expected.push(ExpectedConstant::new(
        "drift_energy_explicit",
        "the same constant as the closed form q̇·u − E",
        1e-6,
        Applicability::AllMotions,
        move |_| {
            let sys = sys.clone();
            let u = u2.clone();
            Ok(ConservedQuantity::explicit("drift_energy_explicit", move |t, tr| {
                let (q, qd) = tr.state(t)?;
                Ok(qd.dot(&u) - sys.energy(t, &q, &qd)?)
            }))
        },
    ));

    entry.checks.push(EntryCheck::new(
        "theorem_matches_closed_form",
        "full-theorem constant equals q̇·u − E pointwise",
        |ctx| {
            let a = full_constant(ctx.system, &wave_triple())?;
            let b = ctx.entry.expected[1].build(ctx.traj)?;
            let d = max_pointwise_disagreement(&a, &b, ctx.traj)?;
            Ok(CheckOutcome::within(d, 1e-6, "q̇·u − E"))
        },
    ));
    push_standard_checks(&mut entry);
    Ok(entry)
}
