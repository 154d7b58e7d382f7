//! The nonperiodic exponential lattice: a scaled-ladder family produces the
//! integral constant Σ k·q̇_k − ∫V, and rigid shifts recover the initial (or
//! asymptotic) velocity components — the cone-potential picture.
//!
//! ```bash
//! cargo run --example toda_lattice
//! ```

use nalgebra::DVector;
use noether::catalog;
use noether::constants::{drift, nonlocal_constant};
use noether::dynamics::integrate;
use noether::variation::SpaceChange;

fn main() -> noether::Result<()> {
    for id in ["toda_n2", "toda_n3"] {
        let entry = catalog::get_entry(id)?;
        let traj = integrate(&entry.system, &entry.default_ivp)?;
        println!("{id}");
        for exp in &entry.expected {
            let cq = exp.build(&traj)?;
            let report = drift(&cq, &traj, exp.tolerance)?;
            println!(
                "  {:<26} value = {:+.10}  rel drift {:.2e}  pass = {}",
                exp.id, report.baseline, report.rel_drift, report.pass
            );
        }

        // Rigid shift along v: the integral constant equals q̇(t0)·v for every
        // direction; with t0 → ∞ these are the asymptotic velocities.
        let v = DVector::from_fn(entry.dim(), |i, _| 1.0 - 0.4 * i as f64);
        let v2 = v.clone();
        let family = SpaceChange::pointwise(move |_, _, _| v2.clone());
        let cq = nonlocal_constant(&entry.system, &family, 0.0);
        println!(
            "  shift along v:             N = {:+.10}  (q̇(0)·v = {:+.10})",
            cq.eval(8.0, &traj)?,
            traj.velocity(0.0)?.dot(&v)
        );
        // The particles end up flying apart: velocity at the window's end.
        let qd = traj.velocity(10.0)?;
        println!("  q̇(10) = {:?}\n", qd.as_slice());
    }
    Ok(())
}
