//! Lane–Emden polytrope of index `n`, started just off the singular time
//! origin with the regular-series data `q(t0) = 1 − t0²/6`, `q̇(t0) = −t0/3`.
//!
//! Two scaling families are attached. For `n = 5` the first family's integral
//! term has a vanishing prefactor, so the constant collapses to a point
//! function; for `n = 1` it vanishes identically while the second family stays
//! informative; for odd `n ≥ 7` the integral term is a monotone Lyapunov-type
//! quantity.

use std::sync::Arc;

use nalgebra::DVector;

use crate::constants::{nonlocal_constant, ConservedQuantity};
use crate::dynamics::{InitialValueProblem, Trajectory};
use crate::error::Result;
use crate::quadrature::CumulativeIntegral;
use crate::systems::lane_emden_system;
use crate::variation::{check_grid, d_eps_space, SpaceChange, SymmetryTriple, TimeStyle};

use super::{
    max_baseline_disagreement, push_standard_checks, Applicability, CatalogEntry, CheckOutcome,
    EntryCheck, ExpectedConstant, NamedTriple,
};

const T0: f64 = 1e-3;
const T_END: f64 = 10.0;
/// ε step for the scaling families; small enough that the ε²-truncation of
/// the integrand stays below the identically-zero budget of the n = 1 case.
const SCALE_EPS0: f64 = 3e-5;

fn vecn(v: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(v)
}

/// `q_ε(t) = e^ε q(e^{cε} t)` with closed-form velocity `e^{(1+c)ε} q̇(e^{cε} t)`.
fn scaling_family(c: f64) -> SpaceChange {
    SpaceChange::map(move |eps, t, tr: &Trajectory| {
        Ok(eps.exp() * tr.position((c * eps).exp() * t)?)
    })
    .with_velocity(move |eps, t, tr: &Trajectory| {
        Ok(((1.0 + c) * eps).exp() * tr.velocity((c * eps).exp() * t)?)
    })
    .with_eps0(SCALE_EPS0)
}

/// Catalog entry for the Lane–Emden equation of index `n ≥ 1`.
pub fn lane_emden_entry(n: u32) -> Result<CatalogEntry> {
    assert!(n >= 1, "index must be at least 1");
    let system = Arc::new(lane_emden_system(n));
    let ivp = InitialValueProblem::new(
        T0,
        vecn(&[1.0 - T0 * T0 / 6.0]),
        vecn(&[-T0 / 3.0]),
        T0,
        T_END,
    )
    .with_pads(5e-4, 0.05);

    let c_a = (n as f64 - 1.0) / 2.0;
    let family_a = scaling_family(c_a);
    let family_b = scaling_family(1.0);

    let mut entry = CatalogEntry {
        id: match n {
            1 => "lane_emden_n1".to_string(),
            5 => "lane_emden_n5".to_string(),
            7 => "lane_emden_n7".to_string(),
            _ => format!("lane_emden_n{n}"),
        },
        summary: "Lane–Emden polytrope: integral constants from two scaling families".into(),
        notes: "singular at t = 0; n = 5 admits a local first integral, odd n ≥ 7 a monotone integral term".into(),
        system: system.clone(),
        default_ivp: ivp,
        triples: vec![
            NamedTriple {
                name: "scale_matched".into(),
                tag: "lane-emden/matched-scaling",
                triple: SymmetryTriple::space_only(family_a.clone(), TimeStyle::Tau),
                invariance: None,
                psi: None,
            },
            NamedTriple {
                name: "scale_uniform".into(),
                tag: "lane-emden/uniform-scaling",
                triple: SymmetryTriple::space_only(family_b.clone(), TimeStyle::Tau),
                invariance: None,
            psi: None,
            },
        ],
        expected: Vec::new(),
        checks: Vec::new(),
        probe_curve: None,
    };

    let sys = system.clone();
    let fam = family_a.clone();
    entry.expected.push(ExpectedConstant::new(
        "matched_scaling_integral",
        "integral constant of the solution-preserving scaling family",
        1e-5,
        Applicability::AllMotions,
        move |traj| {
            let (a, _) = traj.interval();
            Ok(nonlocal_constant(&sys, &fam, a))
        },
    ));
    let sys = system.clone();
    let fam = family_b.clone();
    entry.expected.push(ExpectedConstant::new(
        "uniform_scaling_integral",
        "integral constant of the uniform scaling family",
        1e-5,
        Applicability::AllMotions,
        move |traj| {
            let (a, _) = traj.interval();
            Ok(nonlocal_constant(&sys, &fam, a))
        },
    ));

    if n == 5 {
        entry.expected.push(ExpectedConstant::new(
            "local_first_integral",
            "point-function first integral −t²(q q̇ + t q̇² + t q⁶/3)",
            1e-5,
            Applicability::AllMotions,
            move |_| {
                Ok(ConservedQuantity::explicit("local_first_integral", |t, tr| {
                    let (q, qd) = tr.state(t)?;
                    let (q, qd) = (q[0], qd[0]);
                    Ok(-t * t * (q * qd + t * qd * qd + t * q.powi(6) / 3.0))
                }))
            },
        ));
        entry.checks.push(EntryCheck::new(
            "local_equals_integral_constant",
            "for n = 5 the integral constant reduces to the local first integral",
            |ctx| {
                let nt = ctx.entry.find_triple("scale_matched").unwrap();
                let (a, _) = ctx.traj.interval();
                let nl = nonlocal_constant(ctx.system, &nt.triple.space, a);
                let local = ctx.entry.expected[2].build(ctx.traj)?;
                let d = max_baseline_disagreement(&nl, &local, ctx.traj)?;
                Ok(CheckOutcome::within(d, 1e-5, "vanishing integral prefactor"))
            },
        ));
    }

    if n == 1 {
        entry.checks.push(EntryCheck::new(
            "matched_scaling_vanishes",
            "for n = 1 the matched-scaling constant is identically zero",
            |ctx| {
                let nt = ctx.entry.find_triple("scale_matched").unwrap();
                let (a, b) = ctx.traj.interval();
                let cq = nonlocal_constant(ctx.system, &nt.triple.space, a);
                let mut worst = 0.0f64;
                for t in check_grid(a, b) {
                    worst = worst.max(cq.eval(t, ctx.traj)?.abs());
                }
                Ok(CheckOutcome::within(worst, 1e-8, "identically zero"))
            },
        ));
        entry.checks.push(EntryCheck::new(
            "uniform_scaling_nontrivial",
            "the uniform-scaling pairing stays far from zero along the motion",
            |ctx| {
                let nt = ctx.entry.find_triple("scale_uniform").unwrap();
                let (a, b) = ctx.traj.interval();
                let mut max_abs = 0.0f64;
                for t in check_grid(a, b) {
                    let (q, qd) = ctx.traj.state(t)?;
                    let p = ctx.system.grad_qdot(t, &q, &qd)?;
                    let f = p.dot(&d_eps_space(&nt.triple.space, ctx.traj, t)?);
                    max_abs = max_abs.max(f.abs());
                }
                Ok(CheckOutcome::exceeds(max_abs, 1e-2, "momentum pairing is nonzero"))
            },
        ));
    }

    if n >= 7 && n % 2 == 1 {
        entry.checks.push(EntryCheck::new(
            "integral_term_monotone",
            "∫ t² q^{n+1} dt is nondecreasing at every table step",
            move |ctx| {
                let (a, b) = ctx.traj.interval();
                let power = (n + 1) as i32;
                let traj = ctx.traj;
                let table = CumulativeIntegral::build(a, b, 8192, |s| {
                    let q = traj.position(s)?;
                    Ok(s * s * q[0].powi(power))
                })?;
                let worst_drop = table
                    .cumulative_values()
                    .windows(2)
                    .map(|w| w[0] - w[1])
                    .fold(f64::NEG_INFINITY, f64::max);
                Ok(CheckOutcome::within(
                    worst_drop.max(0.0),
                    0.0,
                    "largest decrease across table nodes",
                ))
            },
        ));
    }

    push_standard_checks(&mut entry);
    Ok(entry)
}
