//! Kepler's problem: both derivations of the Laplace–Runge–Lenz vector, their
//! trivializations, and a speed constant valid along circular motions only.

use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constants::{
    alt_full_constant, bh_constant, single_motion_constant, ConservedQuantity,
};
use crate::dynamics::{integrate, InitialValueProblem, Trajectory};
use crate::error::{Error, Result};
use crate::systems::kepler;
use crate::variation::{check_grid, BHFunction, SpaceChange, SymmetryTriple, TimeChange, TimeStyle};

use super::simple::energy_time_change_triple;
use super::{
    max_pointwise_disagreement, push_standard_checks, Applicability, CatalogEntry, CheckOutcome,
    EntryCheck, ExpectedConstant, NamedTriple,
};

const K: f64 = 1.0;

fn vecn(v: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(v)
}

fn det2(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn perp(u: &DVector<f64>) -> DVector<f64> {
    vecn(&[-u[1], u[0]])
}

/// Component of the Laplace–Runge–Lenz vector along `u`:
/// `(q·u)‖q̇‖² − (q̇·u)(q̇·q) − k(q·u)/‖q‖`.
pub(super) fn lrl_component(u: DVector<f64>) -> ConservedQuantity {
    ConservedQuantity::explicit("lrl_reference", move |t, tr| {
        let (q, qd) = tr.state(t)?;
        Ok(q.dot(&u) * qd.norm_squared() - qd.dot(&u) * qd.dot(&q) - K * q.dot(&u) / q.norm())
    })
}

/// Delay family `q(t) + det(q(t), q(t+ε))·u^⊥` with the matching gauge
/// `−εk(q·u)/‖q‖`; invariant along Kepler motions (where `q ∥ q̈`).
pub(super) fn lrl_triple(u: DVector<f64>) -> SymmetryTriple {
    let u_space = u.clone();
    let u_vel = u.clone();
    let space = SpaceChange::map(move |eps, t, tr: &Trajectory| {
        let q = tr.position(t)?;
        let q_shift = tr.position(t + eps)?;
        Ok(&q + det2(&q, &q_shift) * perp(&u_space))
    })
    .with_velocity(move |eps, t, tr: &Trajectory| {
        let (q, qd) = tr.state(t)?;
        let (qs, qds) = tr.state(t + eps)?;
        Ok(&qd + (det2(&qd, &qs) + det2(&q, &qds)) * perp(&u_vel))
    });
    let u_gauge = u.clone();
    SymmetryTriple::new(
        space,
        TimeChange::trivial(TimeStyle::Tau),
        BHFunction::pointwise(move |_, q, _| -K * q.dot(&u_gauge) / q.norm()),
    )
}

/// The rotation-matrix route: `Ξ = [[u₁,−u₂],[u₂,u₁]](q·q̇, det(q̇,q))ᵀ` with
/// `θ_ε(t) = t + ε q(t)·u` and gauge `−ε·½q̇·Ξ`. Its total-derivative identity
/// needs no equations of motion, so the invariance holds on arbitrary curves.
pub(super) fn rotation_route_triple(u: DVector<f64>) -> SymmetryTriple {
    let xi = move |q: &DVector<f64>, qd: &DVector<f64>, u: &DVector<f64>| -> DVector<f64> {
        let s = q.dot(qd);
        let d = det2(qd, q);
        vecn(&[u[0] * s - u[1] * d, u[1] * s + u[0] * d])
    };
    let u_space = u.clone();
    let xi_space = xi;
    let space = SpaceChange::pointwise(move |_, q, qd| xi_space(q, qd, &u_space));
    let u_theta = u.clone();
    let time = TimeChange::on_motion(TimeStyle::Theta, move |eps, t, tr: &Trajectory| {
        Ok(t + eps * tr.position(t)?.dot(&u_theta))
    });
    let u_d = u.clone();
    let time = time.with_d_eps_on_motion(move |t, tr| Ok(tr.position(t)?.dot(&u_d)));
    let u_gauge = u.clone();
    let bh = BHFunction::pointwise(move |_, q, qd| -0.5 * qd.dot(&xi(q, qd, &u_gauge)));
    SymmetryTriple::new(space, time, bh)
}

fn angular_momentum() -> ConservedQuantity {
    ConservedQuantity::explicit("angular_momentum", |t, tr| {
        let (q, qd) = tr.state(t)?;
        Ok(det2(&q, &qd))
    })
}

pub(super) fn eccentric_entry() -> Result<CatalogEntry> {
    let system = Arc::new(kepler(K));
    let (q0, qd0) = (vecn(&[1.0, 0.0]), vecn(&[0.0, 1.2]));
    // One radial period of the bound orbit from the vis-viva energy.
    let energy = 0.5 * qd0.norm_squared() - K / q0.norm();
    let semi_major = -K / (2.0 * energy);
    let period = TAU * semi_major.powf(1.5) / K.sqrt();
    let ivp = InitialValueProblem::new(0.0, q0, qd0, 0.0, period);

    let mut entry = CatalogEntry {
        id: "kepler_2d".into(),
        summary: "eccentric Kepler orbit: Laplace-Runge-Lenz vector by two derivations".into(),
        notes: "Laplace-Runge-Lenz vector; delay family needs the motion, rotation route does not".into(),
        system: system.clone(),
        default_ivp: ivp,
        triples: vec![
            NamedTriple {
                name: "lrl_delay_x".into(),
                tag: "kepler/lrl-delay",
                triple: lrl_triple(vecn(&[1.0, 0.0])),
                invariance: Some(Applicability::AllMotions),
                psi: None,
            },
            NamedTriple {
                name: "lrl_delay_y".into(),
                tag: "kepler/lrl-delay",
                triple: lrl_triple(vecn(&[0.0, 1.0])),
                invariance: Some(Applicability::AllMotions),
                psi: None,
            },
            NamedTriple {
                name: "lrl_rotation_x".into(),
                tag: "kepler/lrl-rotation",
                triple: rotation_route_triple(vecn(&[1.0, 0.0])),
                invariance: Some(Applicability::AnyCurve),
                psi: None,
            },
            NamedTriple {
                name: "lrl_rotation_y".into(),
                tag: "kepler/lrl-rotation",
                triple: rotation_route_triple(vecn(&[0.0, 1.0])),
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
            // A wobbling loop that stays well away from the collision.
            Trajectory::from_fn(
                sys.clone(),
                (a, b),
                0.2 * (b - a),
                8192,
                |t| {
                    let r = 2.0 + 0.3 * (0.8 * t).sin();
                    let phi = 0.3 * t + 0.2 * (0.5 * t).sin();
                    vecn(&[r * phi.cos(), r * phi.sin()])
                },
                |t| {
                    let r = 2.0 + 0.3 * (0.8 * t).sin();
                    let rd = 0.24 * (0.8 * t).cos();
                    let phi = 0.3 * t + 0.2 * (0.5 * t).sin();
                    let phid = 0.3 + 0.1 * (0.5 * t).cos();
                    vecn(&[
                        rd * phi.cos() - r * phid * phi.sin(),
                        rd * phi.sin() + r * phid * phi.cos(),
                    ])
                },
            )
        })),
    };

    let sys = system.clone();
    entry.expected.push(ExpectedConstant::new(
        "energy",
        "orbital energy",
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
    entry.expected.push(ExpectedConstant::new(
        "angular_momentum",
        "det(q, q̇)",
        1e-6,
        Applicability::AllMotions,
        move |_| Ok(angular_momentum()),
    ));
    for (cid, ux, uy) in [("lrl_x", 1.0, 0.0), ("lrl_y", 0.0, 1.0)] {
        let sys = system.clone();
        entry.expected.push(ExpectedConstant::new(
            cid,
            format!("Laplace-Runge-Lenz component along ({ux}, {uy})"),
            1e-6,
            Applicability::AllMotions,
            move |_| {
                let triple = lrl_triple(vecn(&[ux, uy]));
                Ok(bh_constant(&sys, &triple.space, &triple.bh))
            },
        ));
    }

    entry.checks.push(EntryCheck::new(
        "lrl_formula",
        "gauge pairing reproduces the closed-form Laplace-Runge-Lenz component",
        |ctx| {
            let mut worst = 0.0f64;
            for u in [vecn(&[1.0, 0.0]), vecn(&[0.0, 1.0])] {
                let triple = lrl_triple(u.clone());
                let cq = bh_constant(ctx.system, &triple.space, &triple.bh);
                worst = worst.max(max_pointwise_disagreement(
                    &cq,
                    &lrl_component(u),
                    ctx.traj,
                )?);
            }
            Ok(CheckOutcome::within(worst, 1e-6, "(q·u)‖q̇‖² − (q̇·u)(q̇·q) − k(q·u)/‖q‖"))
        },
    ));
    entry.checks.push(EntryCheck::new(
        "derivations_oppose",
        "rotation-route constant is minus the delay-route constant",
        |ctx| {
            let mut worst = 0.0f64;
            for u in [vecn(&[1.0, 0.0]), vecn(&[0.0, 1.0])] {
                let delay = lrl_triple(u.clone());
                let a = bh_constant(ctx.system, &delay.space, &delay.bh);
                let b = alt_full_constant(ctx.system, &rotation_route_triple(u))?;
                let (lo, hi) = ctx.traj.interval();
                for t in check_grid(lo, hi) {
                    worst = worst.max((a.eval(t, ctx.traj)? + b.eval(t, ctx.traj)?).abs());
                }
            }
            Ok(CheckOutcome::within(worst, 1e-6, "opposite signs"))
        },
    ));
    entry.checks.push(EntryCheck::new(
        "lrl_linearity",
        "u ↦ LRL component is linear: superposition at random directions",
        |ctx| {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let mut worst = 0.0f64;
            for _ in 0..3 {
                let u = vecn(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
                let v = vecn(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
                let sum = lrl_triple(&u + &v);
                let tu = lrl_triple(u);
                let tv = lrl_triple(v);
                let n_sum = bh_constant(ctx.system, &sum.space, &sum.bh);
                let n_u = bh_constant(ctx.system, &tu.space, &tu.bh);
                let n_v = bh_constant(ctx.system, &tv.space, &tv.bh);
                let (lo, hi) = ctx.traj.interval();
                for t in check_grid(lo, hi) {
                    let d = n_sum.eval(t, ctx.traj)?
                        - n_u.eval(t, ctx.traj)?
                        - n_v.eval(t, ctx.traj)?;
                    worst = worst.max(d.abs());
                }
            }
            Ok(CheckOutcome::within(worst, 1e-6, "N_{u+v} = N_u + N_v"))
        },
    ));
    push_standard_checks(&mut entry);
    Ok(entry)
}

/// Family of uniform circular motions with a phase shift; a symmetry of the
/// action along the circular orbit only.
fn circular_phase_family() -> SymmetryTriple {
    let omega = (K / 1.0f64).sqrt();
    let space = SpaceChange::map(move |eps, t, _tr: &Trajectory| {
        let scale = (omega * eps).exp();
        let angle = omega * (eps + t);
        Ok(vecn(&[scale * angle.cos(), scale * angle.sin()]))
    })
    .with_velocity(move |eps, t, _tr: &Trajectory| {
        let scale = (omega * eps).exp();
        let angle = omega * (eps + t);
        Ok(vecn(&[-scale * omega * angle.sin(), scale * omega * angle.cos()]))
    });
    SymmetryTriple::space_only(space, TimeStyle::Tau)
}

fn eccentric_probe() -> Result<(Arc<crate::dynamics::LagrangianSystem>, Trajectory)> {
    let sys = Arc::new(kepler(K));
    let ivp = InitialValueProblem::new(0.0, vecn(&[1.0, 0.0]), vecn(&[0.0, 1.2]), 0.0, TAU);
    let traj = integrate(&sys, &ivp)?;
    Ok((sys, traj))
}

pub(super) fn circular_entry() -> Result<CatalogEntry> {
    let system = Arc::new(kepler(K));
    let ivp = InitialValueProblem::new(0.0, vecn(&[1.0, 0.0]), vecn(&[0.0, 1.0]), 0.0, TAU);

    let mut entry = CatalogEntry {
        id: "kepler_circular".into(),
        summary: "circular Kepler orbit: squared speed is constant along this single motion".into(),
        notes: "phase-shift family of circular motions; not a symmetry off the circle".into(),
        system: system.clone(),
        default_ivp: ivp,
        triples: vec![NamedTriple {
            name: "phase_shift".into(),
            tag: "kepler/circular-phase",
            triple: circular_phase_family(),
            invariance: Some(Applicability::SingleMotion),
            psi: None,
        }],
        expected: Vec::new(),
        checks: Vec::new(),
        probe_curve: None,
    };

    let sys = system.clone();
    entry.expected.push(ExpectedConstant::new(
        "speed_squared",
        "‖q̇‖² from the single-motion phase family",
        1e-8,
        Applicability::SingleMotion,
        move |traj| single_motion_constant(&sys, &circular_phase_family(), traj, 1e-6),
    ));
    let sys = system.clone();
    entry.expected.push(ExpectedConstant::new(
        "energy",
        "orbital energy",
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

    entry.checks.push(EntryCheck::new(
        "speed_squared_is_one",
        "for R = k = 1 the speed constant equals 1 everywhere",
        |ctx| {
            let cq = single_motion_constant(ctx.system, &circular_phase_family(), ctx.traj, 1e-6)?;
            let (a, b) = ctx.traj.interval();
            let mut worst = 0.0f64;
            for t in check_grid(a, b) {
                worst = worst.max((cq.eval(t, ctx.traj)? - 1.0).abs());
            }
            Ok(CheckOutcome::within(worst, 1e-8, "‖q̇‖² = 1"))
        },
    ));
    entry.checks.push(EntryCheck::new(
        "speed_drifts_on_eccentric_orbit",
        "the same quantity fails visibly on an eccentric orbit",
        |_ctx| {
            let (_, traj) = eccentric_probe()?;
            let speed = ConservedQuantity::explicit("speed_squared", |t, tr| {
                Ok(tr.velocity(t)?.norm_squared())
            });
            let report = crate::constants::drift(&speed, &traj, 1e-6)?;
            Ok(CheckOutcome::exceeds(
                report.max_abs_drift,
                1e-2,
                "speed is not conserved off the circle",
            ))
        },
    ));
    entry.checks.push(EntryCheck::new(
        "family_rejected_on_eccentric_orbit",
        "single-motion builder refuses the phase family on an eccentric orbit",
        |_ctx| {
            let (sys, traj) = eccentric_probe()?;
            match single_motion_constant(&sys, &circular_phase_family(), &traj, 1e-6) {
                Err(Error::ResidualTooLarge { residual, threshold }) => Ok(CheckOutcome::exceeds(
                    residual,
                    threshold,
                    "rejected with ResidualTooLarge",
                )),
                Err(e) => Err(e),
                Ok(_) => Ok(CheckOutcome::exceeds(0.0, 1.0, "unexpectedly accepted")),
            }
        },
    ));
    push_standard_checks(&mut entry);
    Ok(entry)
}
