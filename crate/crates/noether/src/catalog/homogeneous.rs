//! Potentials homogeneous of degree −2: the central `−1/‖q‖²` field and the
//! rational inverse-square lattice. Both admit the time-dependent first
//! integral `F = m q·q̇ − 2tE`, its antiderivative companion
//! `F₁ = ½m‖q‖² − t²E − tF`, and the resulting closed-form radius law.

use std::sync::Arc;

use nalgebra::DVector;

use crate::constants::{bh_constant, full_constant, ConservedQuantity};
use crate::dynamics::{InitialValueProblem, LagrangianSystem, Trajectory};
use crate::error::Result;
use crate::systems::{calogero, inverse_square_potential};
use crate::variation::{check_grid, BHFunction, SpaceChange, SymmetryTriple, TimeChange};

use super::toda::cone_velocity_check;
use super::{
    max_pointwise_disagreement, push_standard_checks, Applicability, CatalogEntry, CheckOutcome,
    EntryCheck, ExpectedConstant, NamedTriple, PsiCondition,
};

const MASS: f64 = 1.0;

fn vecn(v: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(v)
}

/// Scaling family `q_ε(t) = e^ε q(e^{−2ε} t)` that maps motions to motions
/// when the potential is homogeneous of degree −2.
fn scaling_family() -> SpaceChange {
    SpaceChange::map(|eps: f64, t, tr: &Trajectory| Ok(eps.exp() * tr.position((-2.0 * eps).exp() * t)?))
        .with_velocity(|eps, t, tr: &Trajectory| {
            Ok((-eps).exp() * tr.velocity((-2.0 * eps).exp() * t)?)
        })
}

fn scale_triples(system: &Arc<LagrangianSystem>) -> Vec<NamedTriple> {
    let tau_triple = SymmetryTriple::new(
        scaling_family(),
        TimeChange::tau(|eps, t| (1.0 + 2.0 * eps) * t).with_d_eps(|t| 2.0 * t),
        BHFunction::trivial(),
    );
    let sys_g = system.clone();
    let gauge_triple = SymmetryTriple::new(
        scaling_family(),
        TimeChange::trivial(crate::variation::TimeStyle::Tau),
        BHFunction::pointwise(move |t, q, qd| 2.0 * t * sys_g.lagrangian(t, q, qd).unwrap()),
    );
    let sys_psi = system.clone();
    vec![
        NamedTriple {
            name: "scale_time_change".into(),
            tag: "homogeneous/scaling-time",
            triple: tau_triple,
            invariance: Some(Applicability::AnyCurve),
            psi: None,
        },
        NamedTriple {
            name: "scale_gauge".into(),
            tag: "homogeneous/scaling-gauge",
            triple: gauge_triple,
            invariance: Some(Applicability::AnyCurve),
            psi: Some(PsiCondition {
                psi: Arc::new(move |t, q, qd| -2.0 * t * sys_psi.lagrangian(t, q, qd).unwrap()),
                applicability: Applicability::AnyCurve,
            }),
        },
    ]
}

/// `F = m q·q̇ − 2tE` as a reference expression.
fn linear_virial(system: &Arc<LagrangianSystem>) -> ConservedQuantity {
    let sys = system.clone();
    ConservedQuantity::explicit("linear_virial_reference", move |t, tr| {
        let (q, qd) = tr.state(t)?;
        Ok(MASS * q.dot(&qd) - 2.0 * t * sys.energy(t, &q, &qd)?)
    })
}

fn push_alpha_minus_two(entry: &mut CatalogEntry) {
    let system = entry.system.clone();

    let sys = system.clone();
    entry.expected.push(ExpectedConstant::new(
        "energy",
        "energy of the autonomous system",
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
    entry.expected.push(ExpectedConstant::new(
        "linear_virial",
        "F = m q·q̇ − 2tE from the scaling + time-change pair",
        1e-6,
        Applicability::AllMotions,
        move |_| {
            let triple = scale_triples(&sys).remove(0).triple;
            full_constant(&sys, &triple)
        },
    ));

    let sys = system.clone();
    entry.expected.push(ExpectedConstant::new(
        "conic_companion",
        "F₁ = ½m‖q‖² − t²E − tF, the antiderivative of the virial law",
        1e-6,
        Applicability::AllMotions,
        move |traj| {
            let (a, _) = traj.interval();
            let f_hat = linear_virial(&sys).eval(a, traj)?;
            let sys = sys.clone();
            Ok(ConservedQuantity::explicit("conic_companion", move |t, tr| {
                let (q, qd) = tr.state(t)?;
                let e = sys.energy(t, &q, &qd)?;
                Ok(0.5 * MASS * q.norm_squared() - t * t * e - t * f_hat)
            }))
        },
    ));

    entry.checks.push(EntryCheck::new(
        "virial_formula",
        "both scaling routes reproduce m q·q̇ − 2tE pointwise",
        |ctx| {
            let reference = linear_virial(ctx.system);
            let tau = full_constant(
                ctx.system,
                &ctx.entry.find_triple("scale_time_change").unwrap().triple,
            )?;
            let gauge_triple = &ctx.entry.find_triple("scale_gauge").unwrap().triple;
            let gauge = bh_constant(ctx.system, &gauge_triple.space, &gauge_triple.bh);
            let d = max_pointwise_disagreement(&tau, &reference, ctx.traj)?
                .max(max_pointwise_disagreement(&gauge, &reference, ctx.traj)?);
            Ok(CheckOutcome::within(d, 1e-6, "m q·q̇ − 2tE"))
        },
    ));
    entry.checks.push(EntryCheck::new(
        "radius_law",
        "‖q(t)‖ = √((2/m)(t²E + tF + F₁)) along the integrated motion",
        |ctx| {
            let (a, b) = ctx.traj.interval();
            let e_hat = {
                let (q, qd) = ctx.traj.state(a)?;
                ctx.system.energy(a, &q, &qd)?
            };
            let f_hat = linear_virial(ctx.system).eval(a, ctx.traj)?;
            let f1_hat = {
                let q = ctx.traj.position(a)?;
                0.5 * MASS * q.norm_squared() - a * a * e_hat - a * f_hat
            };
            let mut worst = 0.0f64;
            for t in check_grid(a, b).into_iter().chain([a, b]) {
                let r = ctx.traj.position(t)?.norm();
                let predicted = ((2.0 / MASS) * (t * t * e_hat + t * f_hat + f1_hat)).sqrt();
                worst = worst.max((r - predicted).abs());
            }
            Ok(CheckOutcome::within(worst, 1e-6, "prefactor 2/m under the root"))
        },
    ));
}

pub(super) fn inverse_square_entry() -> Result<CatalogEntry> {
    let system = Arc::new(inverse_square_potential(MASS, 1.0));
    // Positive energy so the orbit scatters instead of spiralling into the
    // collision within the window.
    let ivp = InitialValueProblem::new(0.0, vecn(&[1.0, 0.0]), vecn(&[0.2, 1.5]), 0.0, 10.0);

    let mut entry = CatalogEntry {
        id: "homogeneous_inverse_square".into(),
        summary: "central −1/‖q‖² field: virial-type first integrals and the radius law".into(),
        notes: "degree −2 homogeneity; conic law for (t, ‖q‖)".into(),
        system: system.clone(),
        default_ivp: ivp,
        triples: scale_triples(&system),
        expected: Vec::new(),
        checks: Vec::new(),
        probe_curve: Some(Arc::new(|sys, (a, b)| {
            Trajectory::from_fn(
                sys.clone(),
                (a, b),
                0.2 * (b - a),
                4096,
                |t| vecn(&[1.3 + 0.2 * (0.9 * t).sin() + 0.05 * t, 0.8 + 0.1 * (1.1 * t).cos()]),
                |t| vecn(&[0.18 * (0.9 * t).cos() + 0.05, -0.11 * (1.1 * t).sin()]),
            )
        })),
    };
    push_alpha_minus_two(&mut entry);
    push_standard_checks(&mut entry);
    Ok(entry)
}

pub(super) fn calogero_entry() -> Result<CatalogEntry> {
    let system = Arc::new(calogero(3));
    let ivp = InitialValueProblem::new(
        0.0,
        vecn(&[-1.0, 0.0, 1.0]),
        vecn(&[0.3, 0.0, -0.3]),
        0.0,
        10.0,
    );

    let mut entry = CatalogEntry {
        id: "homogeneous_calogero".into(),
        summary: "inverse-square pair lattice: degree −2 constants and asymptotic velocities".into(),
        notes: "repulsive rational lattice; also a cone potential with asymptotic velocity".into(),
        system: system.clone(),
        default_ivp: ivp,
        triples: scale_triples(&system),
        expected: Vec::new(),
        checks: Vec::new(),
        probe_curve: Some(Arc::new(|sys, (a, b)| {
            // Keep the three coordinates separated along the probe.
            Trajectory::from_fn(
                sys.clone(),
                (a, b),
                0.2 * (b - a),
                4096,
                |t| vecn(&[-1.5 - 0.1 * t + 0.1 * (0.8 * t).sin(), 0.2 * (0.5 * t).cos(), 1.5 + 0.12 * t]),
                |t| vecn(&[-0.1 + 0.08 * (0.8 * t).cos(), -0.1 * (0.5 * t).sin(), 0.12]),
            )
        })),
    };
    push_alpha_minus_two(&mut entry);
    entry.checks.push(cone_velocity_check());
    push_standard_checks(&mut entry);
    Ok(entry)
}
