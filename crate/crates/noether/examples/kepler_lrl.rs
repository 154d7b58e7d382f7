//! The Laplace-Runge-Lenz vector of the Kepler problem, twice: once from a
//! delay family with a gauge (needs the equations of motion), once from a
//! rotation-matrix family with a motion-dependent time change (does not).
//! Also: absorbing the gauge into a time change, and a constant valid along
//! one single motion only.
//!
//! ```bash
//! cargo run --example kepler_lrl
//! ```

use noether::catalog;
use noether::constants::{
    alt_full_constant, bh_constant, drift, full_constant, single_motion_constant, trivialize_bh,
    ConservedQuantity,
};
use noether::dynamics::integrate;
use noether::variation::check_grid;

fn main() -> noether::Result<()> {
    let entry = catalog::get_entry("kepler_2d")?;
    let traj = integrate(&entry.system, &entry.default_ivp)?;
    let (a, b) = traj.interval();
    println!("eccentric orbit over one radial period [{a:.3}, {b:.3}]\n");

    // Route one: delay family + gauge, constant via the gauge pairing.
    let delay = &entry.find_triple("lrl_delay_x").unwrap().triple;
    let lrl_x = bh_constant(&entry.system, &delay.space, &delay.bh).with_label("lrl_x");
    let report = drift(&lrl_x, &traj, 1e-6)?;
    println!(
        "delay route:    A·e₁ = {:+.10}  rel drift {:.2e}  pass = {}",
        report.baseline, report.rel_drift, report.pass
    );

    // Route two: rotation family, theta-style time change, gauge −ε·½q̇·Ξ.
    let rotation = &entry.find_triple("lrl_rotation_x").unwrap().triple;
    let minus_lrl_x = alt_full_constant(&entry.system, rotation)?;
    let mut worst = 0.0f64;
    for t in check_grid(a, b) {
        worst = worst.max((lrl_x.eval(t, &traj)? + minus_lrl_x.eval(t, &traj)?).abs());
    }
    println!("rotation route: equals the opposite of the delay route to {worst:.2e}");

    // Gauge trivialization: the same constant from a pure time change. Kepler's
    // Lagrangian is positive, so no shift is needed (k = 0 works).
    let trv = trivialize_bh(&entry.system, delay, &traj, Some(0.0))?;
    let via_time = full_constant(&trv.system, &trv.triple)?;
    let mut worst = 0.0f64;
    for t in check_grid(a, b) {
        worst = worst.max((lrl_x.eval(t, &traj)? - via_time.eval(t, &traj)?).abs());
    }
    println!("trivialized:    time change τ = t − εk(q·u)/(‖q‖L) reproduces it to {worst:.2e}");

    // Single-motion constant: the phase-shift family of circular motions makes
    // ‖q̇‖² constant along the circular orbit — and is rejected off it.
    let circular = catalog::get_entry("kepler_circular")?;
    let circ_traj = integrate(&circular.system, &circular.default_ivp)?;
    let family = &circular.find_triple("phase_shift").unwrap().triple;
    let speed2 = single_motion_constant(&circular.system, family, &circ_traj, 1e-6)?;
    println!(
        "\ncircular orbit: ‖q̇‖² = {:+.10} (family accepted along this motion)",
        speed2.eval(1.0, &circ_traj)?
    );
    match single_motion_constant(&circular.system, family, &traj, 1e-6) {
        Err(e) => println!("eccentric orbit: family rejected — {e}"),
        Ok(_) => println!("eccentric orbit: unexpectedly accepted"),
    }
    let speed = ConservedQuantity::explicit("speed_squared", |t, tr| {
        Ok(tr.velocity(t)?.norm_squared())
    });
    let report = drift(&speed, &traj, 1e-6)?;
    println!(
        "eccentric orbit: raw ‖q̇‖² drifts by {:.3} over the period (not conserved)",
        report.max_abs_drift
    );
    Ok(())
}
