//! Integral (nonlocal) constants of motion on the harmonic oscillator: any
//! one-parameter family of trajectories yields one, no symmetry required.
//!
//! Three families are tried: the rigid shift q + ε, the dilation (1+ε)q, and
//! a family that depends on the whole past of the trajectory through ∫q.
//!
//! ```bash
//! cargo run --example integral_constants
//! ```

use nalgebra::DVector;
use noether::constants::{drift, nonlocal_constant};
use noether::dynamics::{integrate, InitialValueProblem, Trajectory};
use noether::quadrature::CumulativeIntegral;
use noether::systems::harmonic_oscillator;
use noether::variation::SpaceChange;
use std::f64::consts::TAU;
use std::sync::{Arc, Mutex};

fn main() -> noether::Result<()> {
    let sys = Arc::new(harmonic_oscillator());
    let ivp = InitialValueProblem::new(
        0.0,
        DVector::from_vec(vec![0.0]),
        DVector::from_vec(vec![1.0]),
        0.0,
        TAU,
    );
    let traj = integrate(&sys, &ivp)?;

    // Rigid shift: the constant is q̇(t0).
    let shift = SpaceChange::pointwise(|_, q, _| DVector::from_element(q.len(), 1.0));
    for t0 in [0.0, 1.3] {
        let cq = nonlocal_constant(&sys, &shift, t0);
        println!(
            "shift family, t0 = {t0:>4}: N = {:+.10}  (q̇(t0) = {:+.10})",
            cq.eval(2.0, &traj)?,
            traj.velocity(t0)?[0]
        );
    }

    // Dilation: N = q q̇ − 2∫L, drifting below 1e−6.
    let dilation = SpaceChange::pointwise(|_, q, _| q.clone());
    let cq = nonlocal_constant(&sys, &dilation, 0.0).with_label("virial_integral");
    let report = drift(&cq, &traj, 1e-6)?;
    println!(
        "dilation family:          N = {:+.10}  rel drift {:.2e}  pass = {}",
        report.baseline, report.rel_drift, report.pass
    );

    // A family that reads the whole trajectory: q_ε = q + ε ∫₀ᵗ q dτ. The
    // inner integral is tabulated once and shared.
    let table: Arc<Mutex<Option<Arc<CumulativeIntegral>>>> = Arc::new(Mutex::new(None));
    let integral_of_q = move |tr: &Trajectory| -> noether::Result<Arc<CumulativeIntegral>> {
        let mut slot = table.lock().unwrap();
        if let Some(t) = slot.as_ref() {
            return Ok(t.clone());
        }
        let (lo, hi) = tr.padded_interval();
        let built = Arc::new(CumulativeIntegral::build(lo, hi, 8192, |s| {
            Ok(tr.position(s)?[0])
        })?);
        *slot = Some(built.clone());
        Ok(built)
    };
    let iq = integral_of_q.clone();
    let family = SpaceChange::map(move |eps, t, tr: &Trajectory| {
        let i = iq(tr)?.between(0.0, t)?;
        Ok(tr.position(t)? + DVector::from_vec(vec![eps * i]))
    })
    .with_velocity(|eps, t, tr: &Trajectory| Ok(tr.velocity(t)? + eps * tr.position(t)?));

    // With base point t0, the constant simplifies to (q̇(0) − q̇(t0))·q̇(t0).
    for t0 in [1.0, 3.0] {
        let cq = nonlocal_constant(&sys, &family, t0);
        let qd0 = traj.velocity(0.0)?[0];
        let qdt = traj.velocity(t0)?[0];
        println!(
            "trajectory family, t0 = {t0}: N = {:+.10}  ((q̇(0)−q̇(t0))q̇(t0) = {:+.10})",
            cq.eval(5.0, &traj)?,
            (qd0 - qdt) * qdt
        );
    }
    Ok(())
}
