//! Potentials homogeneous of degree −2 admit the time-dependent first
//! integral F = m q·q̇ − 2tE, its antiderivative F₁ = ½m‖q‖² − t²E − tF, and
//! hence a closed-form law for the distance from the origin — without knowing
//! the orbit's shape. Shown on a central field and on the inverse-square pair
//! lattice.
//!
//! ```bash
//! cargo run --example homogeneous_potentials
//! ```

use noether::catalog;
use noether::constants::drift;
use noether::dynamics::integrate;
use noether::variation::check_grid;

fn main() -> noether::Result<()> {
    for id in ["homogeneous_inverse_square", "homogeneous_calogero"] {
        let entry = catalog::get_entry(id)?;
        let traj = integrate(&entry.system, &entry.default_ivp)?;
        println!("{id}");
        for exp in &entry.expected {
            let cq = exp.build(&traj)?;
            let report = drift(&cq, &traj, exp.tolerance)?;
            println!(
                "  {:<18} value = {:+.10}  rel drift {:.2e}  pass = {}",
                exp.id, report.baseline, report.rel_drift, report.pass
            );
        }

        // Radius law: ‖q(t)‖ = sqrt((2/m)(t²E + tF + F₁)) with the three
        // constants frozen at t = a.
        let (a, b) = traj.interval();
        let (q0, qd0) = traj.state(a)?;
        let e = entry.system.energy(a, &q0, &qd0)?;
        let f = q0.dot(&qd0) - 2.0 * a * e;
        let f1 = 0.5 * q0.norm_squared() - a * a * e - a * f;
        let mut worst = 0.0f64;
        for t in check_grid(a, b) {
            let predicted = (2.0 * (t * t * e + t * f + f1)).sqrt();
            worst = worst.max((traj.position(t)?.norm() - predicted).abs());
        }
        println!("  radius law reproduces ‖q(t)‖ to {worst:.2e} across the window");
        let t = 0.7 * b;
        println!(
            "  at t = {t:.1}: ‖q‖ = {:.8}, predicted {:.8}\n",
            traj.position(t)?.norm(),
            (2.0 * (t * t * e + t * f + f1)).sqrt()
        );
    }
    Ok(())
}
