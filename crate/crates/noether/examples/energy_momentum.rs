//! The classical trio: momentum from translations, angular momentum from
//! rotations, energy from the time-shift family — each built as a conserved
//! quantity and drift-checked along an integrated motion.
//!
//! ```bash
//! cargo run --example energy_momentum
//! ```

use nalgebra::DVector;
use noether::constants::{drift, full_constant, simple_constant};
use noether::dynamics::{integrate, InitialValueProblem, Trajectory};
use noether::systems::{central_oscillator_2d, free_particle};
use noether::variation::{BHFunction, SpaceChange, SymmetryTriple, TimeChange};
use std::f64::consts::TAU;
use std::sync::Arc;

fn main() -> noether::Result<()> {
    // Free particle: translations give momentum components.
    let sys = Arc::new(free_particle(2));
    let ivp = InitialValueProblem::new(
        0.0,
        DVector::from_vec(vec![0.0, 0.0]),
        DVector::from_vec(vec![1.0, 0.5]),
        0.0,
        10.0,
    );
    let traj = integrate(&sys, &ivp)?;
    let u = DVector::from_vec(vec![0.6, -0.8]);
    let u2 = u.clone();
    let translation = SpaceChange::pointwise(move |_, _, _| u2.clone());
    let momentum = simple_constant(&sys, &translation).with_label("momentum_u");
    let report = drift(&momentum, &traj, 1e-6)?;
    println!(
        "free particle  momentum·u = {:+.12}   rel drift {:.2e}   pass = {}",
        report.baseline, report.rel_drift, report.pass
    );

    // Central force: the rotation family gives det(q, q̇).
    let sys = Arc::new(central_oscillator_2d());
    let ivp = InitialValueProblem::new(
        0.0,
        DVector::from_vec(vec![1.0, 0.0]),
        DVector::from_vec(vec![0.3, 1.0]),
        0.0,
        TAU,
    );
    let traj = integrate(&sys, &ivp)?;
    let rotation = SpaceChange::map(|eps: f64, t, tr: &Trajectory| {
        let q = tr.position(t)?;
        let (c, s) = (eps.cos(), eps.sin());
        Ok(DVector::from_vec(vec![c * q[0] - s * q[1], s * q[0] + c * q[1]]))
    });
    let ang = simple_constant(&sys, &rotation).with_label("angular_momentum");
    let report = drift(&ang, &traj, 1e-6)?;
    println!(
        "central force  det(q,q̇)   = {:+.12}   rel drift {:.2e}   pass = {}",
        report.baseline, report.rel_drift, report.pass
    );

    // Energy two ways: reverse time change with no gauge, or gauge −εL with
    // no time change. Both pair with the time-shift family.
    let time_route = SymmetryTriple::new(
        SpaceChange::time_shift(),
        TimeChange::tau(|eps, t| t - eps).with_d_eps(|_| -1.0),
        BHFunction::trivial(),
    );
    let energy = full_constant(&sys, &time_route)?.with_label("energy");
    let report = drift(&energy, &traj, 1e-6)?;
    println!(
        "central force  energy      = {:+.12}   rel drift {:.2e}   pass = {}",
        report.baseline, report.rel_drift, report.pass
    );
    Ok(())
}
