//! The equivalence transforms: a symmetry triple's gauge can be absorbed into
//! the time change (and vice versa) without touching the constant, and the two
//! time-change styles convert into each other.
//!
//! Everything is shown on conservation of energy for the harmonic oscillator.
//!
//! ```bash
//! cargo run --example trivialize
//! ```

use nalgebra::DVector;
use noether::constants::{
    alt_full_constant, full_constant, standard_to_alternative, trivialize_bh, trivialize_time,
    ConversionForm,
};
use noether::dynamics::{integrate, InitialValueProblem};
use noether::systems::harmonic_oscillator;
use noether::variation::{BHFunction, SpaceChange, SymmetryTriple, TimeChange, TimeStyle};
use std::f64::consts::TAU;
use std::sync::Arc;

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

    // Start from the gauge form: time-shift family, trivial time change,
    // G = −εL.
    let sys_g = sys.clone();
    let gauge_form = SymmetryTriple::new(
        SpaceChange::time_shift(),
        TimeChange::trivial(TimeStyle::Tau),
        BHFunction::pointwise(move |t, q, qd| -sys_g.lagrangian(t, q, qd).unwrap()),
    );
    let n_gauge = full_constant(&sys, &gauge_form)?;
    println!("gauge form:        N(1.0) = {:+.12}", n_gauge.eval(1.0, &traj)?);

    // Absorb the gauge into the time change. The Lagrangian vanishes at some
    // times on this orbit, so the auto-selected shift k keeps the denominator
    // away from zero; the constant is untouched.
    let trv = trivialize_bh(&sys, &gauge_form, &traj, None)?;
    let n_time = full_constant(&trv.system, &trv.triple)?;
    println!(
        "time-change form:  N(1.0) = {:+.12}   (auto shift k = {})",
        n_time.eval(1.0, &traj)?,
        trv.k_shift
    );

    // The reverse: start from (q(t+ε), τ = t−ε, G = 0) and push the time
    // change into the gauge; ∂_εG|₀ comes out as −L, the form we started from.
    let time_form = SymmetryTriple::new(
        SpaceChange::time_shift(),
        TimeChange::tau(|eps, t| t - eps).with_d_eps(|_| -1.0),
        BHFunction::trivial(),
    );
    let back = trivialize_time(&sys, &time_form)?;
    let (q, qd) = traj.state(1.0)?;
    println!(
        "time → gauge:      ∂_εG|₀(1.0) = {:+.12}   (−L = {:+.12})",
        back.bh.d_eps_at(1.0, &traj)?,
        -sys.lagrangian(1.0, &q, &qd)?
    );

    // Style conversion: the same constant through the theta-style theorem.
    for form in [ConversionForm::FirstOrder, ConversionForm::Composition] {
        let theta_form = standard_to_alternative(&time_form, form)?;
        let n_theta = alt_full_constant(&sys, &theta_form)?;
        println!(
            "theta style ({form:?}): N(1.0) = {:+.12}",
            n_theta.eval(1.0, &traj)?
        );
    }
    Ok(())
}
