//! The Lane-Emden equation t²-weighted Lagrangian across polytropic indices:
//! scaling families give integral constants; n = 5 collapses to a local first
//! integral, n = 1 degenerates to zero for one family, and odd n ≥ 7 yields a
//! monotone integral term.
//!
//! ```bash
//! cargo run --example lane_emden
//! ```

use noether::catalog::{self, lane_emden_entry};
use noether::constants::{drift, nonlocal_constant};
use noether::dynamics::integrate;
use noether::quadrature::CumulativeIntegral;
use noether::variation::check_grid;

fn main() -> noether::Result<()> {
    for n in [1u32, 5, 7] {
        let entry = lane_emden_entry(n)?;
        let traj = integrate(&entry.system, &entry.default_ivp)?;
        println!("index n = {n}");
        for exp in &entry.expected {
            let cq = exp.build(&traj)?;
            let report = drift(&cq, &traj, exp.tolerance)?;
            println!(
                "  {:<26} N(a) = {:+.3e}  rel drift {:.2e}  pass = {}",
                exp.id, report.baseline, report.rel_drift, report.pass
            );
        }
        match n {
            1 => {
                let family = &entry.find_triple("scale_matched").unwrap().triple.space;
                let cq = nonlocal_constant(&entry.system, family, entry.default_ivp.t0);
                let worst = check_grid(1e-3, 10.0)
                    .into_iter()
                    .map(|t| cq.eval(t, &traj).unwrap().abs())
                    .fold(0.0f64, f64::max);
                println!("  matched-scaling constant is identically zero: max |N| = {worst:.2e}");
            }
            5 => {
                // n = 5 has the closed-form solution (1 + t²/3)^{−1/2}.
                let q = traj.position(3.0)?[0];
                println!(
                    "  q(3) = {q:.10} vs closed form {:.10}",
                    (1.0 + 3.0f64 * 3.0 / 3.0).powf(-0.5)
                );
            }
            7 => {
                let table = CumulativeIntegral::build(1e-3, 10.0, 4096, |s| {
                    Ok(s * s * traj.position(s)?[0].powi(8))
                })?;
                let monotone = table.cumulative_values().windows(2).all(|w| w[1] >= w[0]);
                println!("  integral term ∫t²q⁸ nondecreasing across the table: {monotone}");
            }
            _ => {}
        }
    }

    // Any other index works through the same constructor.
    let entry = catalog::lane_emden_entry(3)?;
    let traj = integrate(&entry.system, &entry.default_ivp)?;
    let exp = &entry.expected[0];
    let report = drift(&exp.build(&traj)?, &traj, exp.tolerance)?;
    println!("index n = 3 (ad hoc): rel drift {:.2e}  pass = {}", report.rel_drift, report.pass);
    Ok(())
}
