//! Using the library on a system of your own: define a Lagrangian (here a
//! quartic oscillator, no analytic derivatives supplied — everything runs on
//! central finite differences), integrate it, and attach families to get
//! constants of motion.
//!
//! ```bash
//! cargo run --example custom_system
//! ```

use nalgebra::DVector;
use noether::constants::{drift, full_constant, nonlocal_constant};
use noether::dynamics::{integrate, InitialValueProblem, LagrangianSystem};
use noether::variation::{BHFunction, SpaceChange, SymmetryTriple, TimeChange};
use std::sync::Arc;

fn main() -> noether::Result<()> {
    // L = q̇²/2 − q⁴/4: anharmonic, autonomous, one degree of freedom.
    let sys = Arc::new(LagrangianSystem::new("quartic_oscillator", 1, |_, q, qd| {
        0.5 * qd[0] * qd[0] - 0.25 * q[0].powi(4)
    }));

    let ivp = InitialValueProblem::new(
        0.0,
        DVector::from_vec(vec![1.0]),
        DVector::from_vec(vec![0.0]),
        0.0,
        12.0,
    );
    let traj = integrate(&sys, &ivp)?;
    println!(
        "integrated on the padded interval {:?} with {} nodes",
        traj.padded_interval(),
        traj.grid_len()
    );
    println!("max Euler-Lagrange residual: {:.2e}", traj.max_el_residual()?);

    // Autonomous, so the time-shift family with the reverse time change gives
    // the energy.
    let triple = SymmetryTriple::new(
        SpaceChange::time_shift(),
        TimeChange::tau(|eps, t| t - eps).with_d_eps(|_| -1.0),
        BHFunction::trivial(),
    );
    let energy = full_constant(&sys, &triple)?.with_label("energy");
    let report = drift(&energy, &traj, 1e-6)?;
    println!(
        "energy = {:+.10}   rel drift {:.2e}   pass = {}",
        report.baseline, report.rel_drift, report.pass
    );

    // And any family at all gives an integral constant; the rigid shift
    // recovers q̇(t0).
    let shift = SpaceChange::pointwise(|_, q, _| DVector::from_element(q.len(), 1.0));
    let cq = nonlocal_constant(&sys, &shift, 2.0);
    println!(
        "shift-family integral constant: N(9) = {:+.10}   q̇(2) = {:+.10}",
        cq.eval(9.0, &traj)?,
        traj.velocity(2.0)?[0]
    );
    Ok(())
}
