//! Momentum, angular momentum and the energy routes on the textbook systems.

use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::DVector;

use crate::constants::{bh_constant, full_constant, simple_constant};
use crate::dynamics::{InitialValueProblem, Trajectory};
use crate::error::Result;
use crate::systems::{central_oscillator_2d, free_particle, harmonic_oscillator};
use crate::variation::{BHFunction, SpaceChange, SymmetryTriple, TimeChange, TimeStyle};

use super::{
    max_pointwise_disagreement, push_standard_checks, Applicability, CatalogEntry, CheckOutcome,
    ConservedQuantity, EntryCheck, ExpectedConstant, NamedTriple, PsiCondition,
};

fn vecn(v: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(v)
}

fn translation(u: DVector<f64>) -> SpaceChange {
    SpaceChange::pointwise(move |_, _, _| u.clone())
}

/// Energy triple `(q(t+ε), τ = t−ε, G = 0)` for an autonomous Lagrangian.
pub(super) fn energy_time_change_triple() -> SymmetryTriple {
    SymmetryTriple::new(
        SpaceChange::time_shift(),
        TimeChange::tau(|eps, t| t - eps).with_d_eps(|_| -1.0),
        BHFunction::trivial(),
    )
}

pub(super) fn free_particle_entry() -> Result<CatalogEntry> {
    let system = Arc::new(free_particle(2));
    let ivp = InitialValueProblem::new(0.0, vecn(&[0.0, 0.0]), vecn(&[1.0, 0.5]), 0.0, 10.0);

    let sys_l = system.clone();
    let mut entry = CatalogEntry {
        id: "free_particle".into(),
        summary: "free particle in the plane: momentum components and energy".into(),
        notes: "translation and time-shift invariance; simplest conservation laws".into(),
        system: system.clone(),
        default_ivp: ivp,
        triples: vec![
            NamedTriple {
                name: "translate_x".into(),
                tag: "momentum/translation",
                triple: SymmetryTriple::space_only(translation(vecn(&[1.0, 0.0])), TimeStyle::Tau),
                invariance: Some(Applicability::AnyCurve),
                psi: None,
            },
            NamedTriple {
                name: "translate_y".into(),
                tag: "momentum/translation",
                triple: SymmetryTriple::space_only(translation(vecn(&[0.0, 1.0])), TimeStyle::Tau),
                invariance: Some(Applicability::AnyCurve),
                psi: None,
            },
            NamedTriple {
                name: "time_shift_energy".into(),
                tag: "energy/time-change",
                triple: energy_time_change_triple(),
                invariance: Some(Applicability::AnyCurve),
                psi: Some(PsiCondition {
                    psi: Arc::new(move |t, q, qd| sys_l.lagrangian(t, q, qd).unwrap()),
                    applicability: Applicability::AnyCurve,
                }),
            },
        ],
        expected: Vec::new(),
        checks: Vec::new(),
        probe_curve: Some(Arc::new(|sys, (a, b)| {
            Trajectory::from_fn(
                sys.clone(),
                (a, b),
                0.2 * (b - a),
                4096,
                |t| vecn(&[t * t / 20.0, (0.7 * t).sin()]),
                |t| vecn(&[t / 10.0, 0.7 * (0.7 * t).cos()]),
            )
        })),
    };

    let sys = system.clone();
    entry.expected.push(ExpectedConstant::new(
        "momentum_x",
        "momentum component along e₁",
        1e-6,
        Applicability::AllMotions,
        move |_| Ok(simple_constant(&sys, &translation(vecn(&[1.0, 0.0])))),
    ));
    let sys = system.clone();
    entry.expected.push(ExpectedConstant::new(
        "momentum_y",
        "momentum component along e₂",
        1e-6,
        Applicability::AllMotions,
        move |_| Ok(simple_constant(&sys, &translation(vecn(&[0.0, 1.0])))),
    ));
    let sys = system.clone();
    entry.expected.push(ExpectedConstant::new(
        "energy",
        "energy from the time-shift + reverse time change pair",
        1e-6,
        Applicability::AllMotions,
        move |_| full_constant(&sys, &energy_time_change_triple()),
    ));
    push_standard_checks(&mut entry);
    Ok(entry)
}

pub(super) fn central_force_entry() -> Result<CatalogEntry> {
    let system = Arc::new(central_oscillator_2d());
    let ivp = InitialValueProblem::new(0.0, vecn(&[1.0, 0.0]), vecn(&[0.3, 1.0]), 0.0, TAU);

    let rotation = SpaceChange::map(|eps: f64, t, traj: &Trajectory| {
        let q = traj.position(t)?;
        let (c, s) = (eps.cos(), eps.sin());
        Ok(vecn(&[c * q[0] - s * q[1], s * q[0] + c * q[1]]))
    });

    let mut entry = CatalogEntry {
        id: "central_force_2d".into(),
        summary: "planar central force: angular momentum det(q, q̇) and energy".into(),
        notes: "rotation invariance is finite, so it holds on arbitrary curves".into(),
        system: system.clone(),
        default_ivp: ivp,
        triples: vec![
            NamedTriple {
                name: "rotation".into(),
                tag: "angular-momentum/rotation",
                triple: SymmetryTriple::space_only(rotation.clone(), TimeStyle::Tau),
                invariance: Some(Applicability::AnyCurve),
                psi: None,
            },
            NamedTriple {
                name: "time_shift_energy".into(),
                tag: "energy/time-change",
                triple: energy_time_change_triple(),
                invariance: Some(Applicability::AnyCurve),
                psi: None,
            },
        ],
        expected: Vec::new(),
        checks: Vec::new(),
        probe_curve: Some(Arc::new(|sys, (a, b)| {
            Trajectory::from_fn(
                sys.clone(),
                (a, b),
                0.2 * (b - a),
                4096,
                |t| vecn(&[(1.0 + 0.2 * t).cos() + 0.1 * t, (0.9 * t).sin() - 0.3]),
                |t| vecn(&[-0.2 * (1.0 + 0.2 * t).sin() + 0.1, 0.9 * (0.9 * t).cos()]),
            )
        })),
    };

    let sys = system.clone();
    let rot = rotation.clone();
    entry.expected.push(ExpectedConstant::new(
        "angular_momentum",
        "angular momentum from the rotation family",
        1e-6,
        Applicability::AllMotions,
        move |_| Ok(simple_constant(&sys, &rot)),
    ));
    let sys = system.clone();
    entry.expected.push(ExpectedConstant::new(
        "energy",
        "energy from the time-shift + reverse time change pair",
        1e-6,
        Applicability::AllMotions,
        move |_| full_constant(&sys, &energy_time_change_triple()),
    ));

    entry.checks.push(EntryCheck::new(
        "single_motion_reduces_to_simple",
        "a finitely invariant family passes the single-motion gate and gives the plain pairing",
        |ctx| {
            let nt = ctx.entry.find_triple("rotation").unwrap();
            let via_single =
                crate::constants::single_motion_constant(ctx.system, &nt.triple, ctx.traj, 1e-6)?;
            let plain = simple_constant(ctx.system, &nt.triple.space);
            let d = max_pointwise_disagreement(&via_single, &plain, ctx.traj)?;
            Ok(CheckOutcome::within(d, 1e-9, "identical evaluators"))
        },
    ));
    entry.checks.push(EntryCheck::new(
        "angular_momentum_formula",
        "rotation constant equals det(q, q̇) pointwise",
        |ctx| {
            let nt = ctx.entry.find_triple("rotation").unwrap();
            let cq = simple_constant(ctx.system, &nt.triple.space);
            let det = ConservedQuantity::explicit("det", |t, tr| {
                let (q, qd) = tr.state(t)?;
                Ok(q[0] * qd[1] - q[1] * qd[0])
            });
            let d = max_pointwise_disagreement(&cq, &det, ctx.traj)?;
            Ok(CheckOutcome::within(d, 1e-6, "det(q, q̇)"))
        },
    ));
    push_standard_checks(&mut entry);
    Ok(entry)
}

pub(super) fn oscillator_energy_entry() -> Result<CatalogEntry> {
    let system = Arc::new(harmonic_oscillator());
    let ivp = InitialValueProblem::new(0.0, vecn(&[0.0]), vecn(&[1.0]), 0.0, TAU);

    // Gauge route: G = −εL(q, q̇).
    let sys_g = system.clone();
    let gauge_triple = SymmetryTriple::new(
        SpaceChange::time_shift(),
        TimeChange::trivial(TimeStyle::Tau),
        BHFunction::pointwise(move |t, q, qd| -sys_g.lagrangian(t, q, qd).unwrap()),
    );
    // Integral-functional gauge: G(ε, t) = −∫_t^{t+ε} L, a finite invariance.
    let sys_w = system.clone();
    let window_gauge = BHFunction::functional(move |eps, t, traj: &Trajectory| {
        if eps == 0.0 {
            return Ok(0.0);
        }
        // Simpson over the short window [t, t+ε].
        let n = 16;
        let h = eps / n as f64;
        let l = |s: f64| -> Result<f64> {
            let (q, qd) = traj.state(s)?;
            sys_w.lagrangian(s, &q, &qd)
        };
        let mut acc = l(t)? + l(t + eps)?;
        for j in 1..n {
            let w = if j % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * l(t + j as f64 * h)?;
        }
        Ok(-acc * h / 3.0)
    });
    let window_triple = SymmetryTriple::new(
        SpaceChange::time_shift(),
        TimeChange::trivial(TimeStyle::Tau),
        window_gauge,
    );

    let sys_psi = system.clone();
    let mut entry = CatalogEntry {
        id: "oscillator_energy".into(),
        summary: "harmonic oscillator: energy via gauge, time change and window gauge".into(),
        notes: "three equivalent routes to conservation of energy".into(),
        system: system.clone(),
        default_ivp: ivp,
        triples: vec![
            NamedTriple {
                name: "gauge_energy".into(),
                tag: "energy/gauge",
                triple: gauge_triple.clone(),
                invariance: Some(Applicability::AnyCurve),
                psi: Some(PsiCondition {
                    psi: Arc::new(move |t, q, qd| sys_psi.lagrangian(t, q, qd).unwrap()),
                    applicability: Applicability::AnyCurve,
                }),
            },
            NamedTriple {
                name: "time_change_energy".into(),
                tag: "energy/time-change",
                triple: energy_time_change_triple(),
                invariance: Some(Applicability::AnyCurve),
                psi: None,
            },
            NamedTriple {
                name: "window_gauge_energy".into(),
                tag: "energy/integral-gauge",
                triple: window_triple.clone(),
                invariance: Some(Applicability::AnyCurve),
                psi: None,
            },
        ],
        expected: Vec::new(),
        checks: Vec::new(),
        probe_curve: Some(Arc::new(|sys, (a, b)| {
            Trajectory::from_fn(
                sys.clone(),
                (a, b),
                0.2 * (b - a),
                4096,
                |t| vecn(&[0.1 * t * t + (1.3 * t).sin()]),
                |t| vecn(&[0.2 * t + 1.3 * (1.3 * t).cos()]),
            )
        })),
    };

    let sys = system.clone();
    let tr = gauge_triple.clone();
    entry.expected.push(ExpectedConstant::new(
        "energy_gauge",
        "energy from the time-shift family with gauge −εL",
        1e-6,
        Applicability::AllMotions,
        move |_| Ok(bh_constant(&sys, &tr.space, &tr.bh)),
    ));
    let sys = system.clone();
    entry.expected.push(ExpectedConstant::new(
        "energy_time_change",
        "energy from the reverse time change with trivial gauge",
        1e-6,
        Applicability::AllMotions,
        move |_| full_constant(&sys, &energy_time_change_triple()),
    ));
    let sys = system.clone();
    let tr = window_triple.clone();
    entry.expected.push(ExpectedConstant::new(
        "energy_window_gauge",
        "energy from the action-window integral gauge",
        1e-6,
        Applicability::AllMotions,
        move |_| Ok(bh_constant(&sys, &tr.space, &tr.bh)),
    ));

    entry.checks.push(EntryCheck::new(
        "routes_agree",
        "the three energy constants coincide with p·q̇ − L pointwise",
        |ctx| {
            let sys = ctx.system.clone();
            let direct = ConservedQuantity::explicit("energy_direct", move |t, tr| {
                let (q, qd) = tr.state(t)?;
                sys.energy(t, &q, &qd)
            });
            let mut worst = 0.0f64;
            for exp in &ctx.entry.expected {
                let cq = exp.build(ctx.traj)?;
                worst = worst.max(max_pointwise_disagreement(&cq, &direct, ctx.traj)?);
            }
            Ok(CheckOutcome::within(worst, 1e-6, "all routes vs direct energy"))
        },
    ));
    push_standard_checks(&mut entry);
    Ok(entry)
}
