//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::DVector;

use noether::catalog::{
    self, build_superintegrable, max_baseline_disagreement, max_invariance_residual,
    max_pointwise_disagreement, Applicability, CatalogEntry, CheckCtx,
};
use noether::constants::{
    alt_full_constant, alternative_to_standard, bh_constant, drift, full_constant,
    nonlocal_constant, standard_to_alternative, trivialize_bh, trivialize_time, ConservedQuantity,
    ConversionForm,
};
use noether::dynamics::{integrate, Trajectory};
use noether::variation::{check_grid, total_derivative_check, SpaceChange};

type CriterionResult = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        match $cond {
            true => {}
            false => return Err(format!($($arg)+)),
        }
    };
}

fn criterion(number: u32, name: &str, body: impl FnOnce() -> CriterionResult) {
    match body() {
        Ok(()) => println!("ACCEPTANCE {number:>2} {name}: PASS"),
        Err(msg) => {
            println!("ACCEPTANCE {number:>2} {name}: FAIL ({msg})");
            panic!("criterion {number} `{name}` failed: {msg}");
        }
    }
}

fn entry_with_trajectory(id: &str) -> Result<(CatalogEntry, Trajectory), String> {
    let entry = catalog::get_entry(id).map_err(|e| format!("{id}: {e}"))?;
    let traj = integrate(&entry.system, &entry.default_ivp).map_err(|e| format!("{id}: {e}"))?;
    Ok((entry, traj))
}

/// Build and drift-check every expected constant of an entry at its declared
/// tolerance.
fn assert_entry_drifts(entry: &CatalogEntry, traj: &Trajectory) -> CriterionResult {
    for exp in &entry.expected {
        let cq = exp
            .build(traj)
            .map_err(|e| format!("{}/{}: {e}", entry.id, exp.id))?;
        let report = drift(&cq, traj, exp.tolerance).map_err(|e| format!("{}: {e}", exp.id))?;
        ensure!(
            report.pass,
            "{}/{}: rel drift {:.3e} > {:.1e}",
            entry.id,
            exp.id,
            report.rel_drift,
            exp.tolerance
        );
    }
    Ok(())
}

fn run_entry_check(entry: &CatalogEntry, traj: &Trajectory, check_id: &str) -> CriterionResult {
    let check = entry
        .checks
        .iter()
        .find(|c| c.id == check_id)
        .ok_or_else(|| format!("{}: no check `{check_id}`", entry.id))?;
    let ctx = CheckCtx {
        entry,
        system: &entry.system,
        traj,
        seed: 7,
    };
    let out = check.run(&ctx).map_err(|e| format!("{check_id}: {e}"))?;
    ensure!(
        out.pass,
        "{}/{}: value {:.3e} vs threshold {:.3e} ({})",
        entry.id,
        check_id,
        out.value,
        out.threshold,
        out.detail
    );
    Ok(())
}

#[test]
fn criterion_01_energy_momentum_angular_momentum() {
    criterion(1, "energy, momentum, angular momentum", || {
        for id in ["oscillator_energy", "free_particle", "central_force_2d"] {
            let (entry, traj) = entry_with_trajectory(id)?;
            assert_entry_drifts(&entry, &traj)?;
        }
        Ok(())
    });
}

#[test]
fn criterion_02_nonlocal_constant_oracle() {
    criterion(2, "integral-constant oracle on the oscillator", || {
        // Space shift: the integral constant equals q̇(t0) at 64 sample times.
        let (entry, traj) = entry_with_trajectory("oscillator_shift")?;
        let shift = &entry.find_triple("space_shift").unwrap().triple.space;
        for t0 in [0.0, 1.3] {
            let cq = nonlocal_constant(&entry.system, shift, t0);
            let expect = traj.velocity(t0).unwrap()[0];
            for t in check_grid(0.0, TAU) {
                let v = cq.eval(t, &traj).map_err(|e| e.to_string())?;
                ensure!((v - expect).abs() <= 1e-6, "shift t0={t0}: |{v} − {expect}| > 1e-6");
            }
        }

        // Nonlocal family: the simplified value (q̇(0) − q̇(t0))·q̇(t0); with the
        // exact solution sin t this is (1 − cos t0)·cos t0.
        let (entry, traj) = entry_with_trajectory("oscillator_nonlocal")?;
        let family = &entry.find_triple("integral_family").unwrap().triple.space;
        for t0 in [1.0, FRAC_PI_2, 3.0] {
            let cq = nonlocal_constant(&entry.system, family, t0);
            let oracle = (1.0 - t0.cos()) * t0.cos();
            if t0 != FRAC_PI_2 {
                ensure!(oracle.abs() > 0.1, "oracle should be nontrivial at t0={t0}");
            }
            for t in check_grid(0.0, TAU) {
                let v = cq.eval(t, &traj).map_err(|e| e.to_string())?;
                ensure!(
                    (v - oracle).abs() <= 1e-6,
                    "family t0={t0}: |{v} − {oracle}| > 1e-6"
                );
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_03_trivialization_equivalence() {
    criterion(3, "gauge/time trivialization preserves constants", || {
        let cases = [
            ("oscillator_energy", "time_change_energy"),
            ("oscillator_energy", "gauge_energy"),
            ("dissipative_quadratic", "time_shift_gauge"),
            ("kepler_2d", "lrl_delay_x"),
            ("kepler_2d", "lrl_delay_y"),
            ("homogeneous_inverse_square", "scale_time_change"),
            ("homogeneous_inverse_square", "scale_gauge"),
            ("plane_wave", "comoving_shift"),
        ];
        for (id, triple_name) in cases {
            let (entry, traj) = entry_with_trajectory(id)?;
            let triple = &entry.find_triple(triple_name).unwrap().triple;
            let orig = full_constant(&entry.system, triple).map_err(|e| e.to_string())?;
            let trv = trivialize_bh(&entry.system, triple, &traj, None).map_err(|e| e.to_string())?;
            let via_time = full_constant(&trv.system, &trv.triple).map_err(|e| e.to_string())?;
            let gauge_form = trivialize_time(&entry.system, triple).map_err(|e| e.to_string())?;
            let via_gauge = full_constant(&entry.system, &gauge_form).map_err(|e| e.to_string())?;
            let d1 = max_baseline_disagreement(&orig, &via_time, &traj).map_err(|e| e.to_string())?;
            let d2 = max_baseline_disagreement(&orig, &via_gauge, &traj).map_err(|e| e.to_string())?;
            ensure!(
                d1 <= 1e-6 && d2 <= 1e-6,
                "{id}/{triple_name}: time-trivialized {d1:.3e}, gauge-trivialized {d2:.3e}"
            );
        }
        Ok(())
    });
}

#[test]
fn criterion_04_style_equivalence() {
    criterion(4, "tau-style and theta-style constants coincide", || {
        // Tau → theta on the dissipative gauge triple and both LRL triples.
        let tau_cases = [
            ("dissipative_quadratic", "time_shift_gauge"),
            ("kepler_2d", "lrl_delay_x"),
            ("kepler_2d", "lrl_delay_y"),
        ];
        for (id, name) in tau_cases {
            let (entry, traj) = entry_with_trajectory(id)?;
            let triple = &entry.find_triple(name).unwrap().triple;
            let orig = full_constant(&entry.system, triple).map_err(|e| e.to_string())?;
            for form in [ConversionForm::FirstOrder, ConversionForm::Composition] {
                let conv = standard_to_alternative(triple, form).map_err(|e| e.to_string())?;
                let alt = alt_full_constant(&entry.system, &conv).map_err(|e| e.to_string())?;
                let d = max_pointwise_disagreement(&orig, &alt, &traj).map_err(|e| e.to_string())?;
                ensure!(d <= 1e-6, "{id}/{name} ({form:?}): disagreement {d:.3e}");
            }
        }
        // Theta → tau on the delay-style scaling symmetry and the rotation
        // route.
        let theta_cases = [
            ("dissipative_quadratic", "logan_scaling"),
            ("kepler_2d", "lrl_rotation_x"),
        ];
        for (id, name) in theta_cases {
            let (entry, traj) = entry_with_trajectory(id)?;
            let triple = &entry.find_triple(name).unwrap().triple;
            let orig = alt_full_constant(&entry.system, triple).map_err(|e| e.to_string())?;
            for form in [ConversionForm::FirstOrder, ConversionForm::Composition] {
                let conv = alternative_to_standard(triple, form).map_err(|e| e.to_string())?;
                let tau = full_constant(&entry.system, &conv).map_err(|e| e.to_string())?;
                let d = max_pointwise_disagreement(&orig, &tau, &traj).map_err(|e| e.to_string())?;
                ensure!(d <= 1e-6, "{id}/{name} ({form:?}): disagreement {d:.3e}");
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_05_kepler_laplace_runge_lenz() {
    criterion(5, "Laplace-Runge-Lenz vector on Kepler orbits", || {
        let (entry, traj) = entry_with_trajectory("kepler_2d")?;
        assert_entry_drifts(&entry, &traj)?;
        run_entry_check(&entry, &traj, "derivations_oppose")?;
        run_entry_check(&entry, &traj, "lrl_formula")?;

        let (circ, circ_traj) = entry_with_trajectory("kepler_circular")?;
        run_entry_check(&circ, &circ_traj, "speed_squared_is_one")?;
        run_entry_check(&circ, &circ_traj, "speed_drifts_on_eccentric_orbit")?;
        run_entry_check(&circ, &circ_traj, "family_rejected_on_eccentric_orbit")?;
        Ok(())
    });
}

#[test]
fn criterion_06_homogeneous_degree_minus_two() {
    criterion(6, "degree −2 potentials: virial constants and radius law", || {
        for id in ["homogeneous_inverse_square", "homogeneous_calogero"] {
            let (entry, traj) = entry_with_trajectory(id)?;
            assert_entry_drifts(&entry, &traj)?;
            run_entry_check(&entry, &traj, "radius_law")?;
        }
        Ok(())
    });
}

#[test]
fn criterion_07_lane_emden() {
    criterion(7, "Lane-Emden constants across indices", || {
        let (e5, t5) = entry_with_trajectory("lane_emden_n5")?;
        assert_entry_drifts(&e5, &t5)?;
        run_entry_check(&e5, &t5, "local_equals_integral_constant")?;

        let (e1, t1) = entry_with_trajectory("lane_emden_n1")?;
        run_entry_check(&e1, &t1, "matched_scaling_vanishes")?;
        run_entry_check(&e1, &t1, "uniform_scaling_nontrivial")?;
        assert_entry_drifts(&e1, &t1)?;

        let (e7, t7) = entry_with_trajectory("lane_emden_n7")?;
        run_entry_check(&e7, &t7, "integral_term_monotone")?;
        assert_entry_drifts(&e7, &t7)?;
        Ok(())
    });
}

#[test]
fn criterion_08_toda_and_cone_potentials() {
    criterion(8, "exponential lattice and asymptotic velocities", || {
        for id in ["toda_n2", "toda_n3"] {
            let (entry, traj) = entry_with_trajectory(id)?;
            assert_entry_drifts(&entry, &traj)?;
            run_entry_check(&entry, &traj, "reduced_form_matches")?;
            run_entry_check(&entry, &traj, "reduced_form_is_constant")?;
            run_entry_check(&entry, &traj, "asymptotic_velocity_pairing")?;
        }
        let (cal, cal_traj) = entry_with_trajectory("homogeneous_calogero")?;
        run_entry_check(&cal, &cal_traj, "asymptotic_velocity_pairing")?;
        Ok(())
    });
}

#[test]
fn criterion_09_superintegrable_family() {
    criterion(9, "superintegrable family: shape residuals and three integrals", || {
        for a in [0.0, 0.1] {
            let profile = build_superintegrable(a, 0.0, 1.0, (1.0, 0.0, 0.0), (-0.9, 0.9))
                .map_err(|e| e.to_string())?;
            ensure!(
                profile.residual_linear <= 1e-8 && profile.residual_coupling <= 1e-8,
                "a={a}: residuals {:.3e}, {:.3e}",
                profile.residual_linear,
                profile.residual_coupling
            );
        }
        for id in ["superintegrable_a0", "superintegrable_a01"] {
            let (entry, traj) = entry_with_trajectory(id)?;
            assert_entry_drifts(&entry, &traj)?;
            run_entry_check(&entry, &traj, "shape_equation_residuals")?;
            run_entry_check(&entry, &traj, "third_integral_formula")?;
        }
        Ok(())
    });
}

#[test]
fn criterion_10_invariance_residuals() {
    criterion(10, "claimed invariances and total-derivative conditions", || {
        // Every catalog triple with an invariance claim, on its class.
        for id in catalog::entry_ids() {
            let (entry, traj) = entry_with_trajectory(id)?;
            let probe = entry
                .probe_curve
                .as_ref()
                .map(|f| f(&entry.system, entry.default_ivp.interval));
            for nt in &entry.triples {
                let Some(applies) = nt.invariance else { continue };
                let mut worst = max_invariance_residual(&entry.system, &nt.triple, &traj)
                    .map_err(|e| format!("{id}/{}: {e}", nt.name))?;
                if applies == Applicability::AnyCurve {
                    if let Some(p) = &probe {
                        worst = worst.max(
                            max_invariance_residual(&entry.system, &nt.triple, p)
                                .map_err(|e| format!("{id}/{} probe: {e}", nt.name))?,
                        );
                    }
                }
                ensure!(worst <= 1e-6, "{id}/{}: residual {worst:.3e}", nt.name);
            }
        }

        // ψ = L for the autonomous time shift, on an arbitrary curve.
        let (entry, traj) = entry_with_trajectory("oscillator_energy")?;
        let probe = entry.probe_curve.as_ref().unwrap()(&entry.system, (0.0, TAU));
        let sys = entry.system.clone();
        let psi_l = move |t: f64, q: &DVector<f64>, qd: &DVector<f64>| {
            sys.lagrangian(t, q, qd).unwrap()
        };
        for curve in [&traj, &probe] {
            let (a, b) = curve.interval();
            let r = total_derivative_check(
                &entry.system,
                &SpaceChange::time_shift(),
                &psi_l,
                curve,
                &check_grid(a, b),
            )
            .map_err(|e| e.to_string())?;
            ensure!(r <= 1e-6, "psi = L residual {r:.3e}");
        }

        // ψ = q̇ for the oscillator shift: passes on motions, fails off them.
        let (entry, traj) = entry_with_trajectory("oscillator_shift")?;
        let shift = &entry.find_triple("space_shift").unwrap().triple.space;
        let psi_qd = |_: f64, _: &DVector<f64>, qd: &DVector<f64>| qd[0];
        let r = total_derivative_check(&entry.system, shift, &psi_qd, &traj, &check_grid(0.0, TAU))
            .map_err(|e| e.to_string())?;
        ensure!(r <= 1e-6, "psi = q̇ on motions: residual {r:.3e}");
        let bent = entry.probe_curve.as_ref().unwrap()(&entry.system, (0.0, 2.0));
        let r = total_derivative_check(&entry.system, shift, &psi_qd, &bent, &check_grid(0.2, 1.8))
            .map_err(|e| e.to_string())?;
        ensure!(r > 1e-2, "psi = q̇ must fail on q = t²: residual {r:.3e}");
        Ok(())
    });
}

#[test]
fn criterion_11_cli_determinism_and_budget() {
    criterion(11, "CLI verifies everything, deterministically, in budget", || {
        let bin = env!("CARGO_BIN_EXE_noether");
        let dir = std::env::temp_dir().join(format!("noether-acceptance-{}", std::process::id()));
        std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
        let start = std::time::Instant::now();
        let mut reports = Vec::new();
        for run in 0..2 {
            let path = dir.join(format!("report{run}.json"));
            let out = std::process::Command::new(bin)
                .args([
                    "verify",
                    "--entries",
                    "all",
                    "--seed",
                    "7",
                    "--quiet",
                    "--report",
                ])
                .arg(&path)
                .output()
                .map_err(|e| e.to_string())?;
            ensure!(
                out.status.code() == Some(0),
                "run {run}: exit {:?}, stderr: {}",
                out.status.code(),
                String::from_utf8_lossy(&out.stderr)
            );
            let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
            let mut doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
            strip_timings(&mut doc);
            reports.push(doc);
        }
        let elapsed = start.elapsed().as_secs_f64();
        ensure!(
            reports[0] == reports[1],
            "reports differ beyond timing fields"
        );
        ensure!(elapsed < 60.0, "two full runs took {elapsed:.1} s");
        std::fs::remove_dir_all(&dir).ok();
        Ok(())
    });
}

fn strip_timings(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Object(map) => {
            map.remove("wall_ms");
            for v in map.values_mut() {
                strip_timings(v);
            }
        }
        serde_json::Value::Array(items) => {
            for v in items {
                strip_timings(v);
            }
        }
        _ => {}
    }
}

/// The remaining cross-cutting consistency claims not pinned to one criterion:
/// the gauge constant built from the time-shift family with `G = −εL` equals
/// the energy evaluator everywhere on the catalog's autonomous systems.
#[test]
fn gauge_energy_matches_direct_energy_everywhere() {
    for id in ["free_particle", "central_force_2d", "oscillator_energy", "kepler_2d"] {
        let entry = catalog::get_entry(id).unwrap();
        let traj = integrate(&entry.system, &entry.default_ivp).unwrap();
        let sys = entry.system.clone();
        let sys_cq = sys.clone();
        let gauge = noether::variation::BHFunction::pointwise(move |t, q, qd| {
            -sys_cq.lagrangian(t, q, qd).unwrap()
        });
        let cq = bh_constant(&entry.system, &SpaceChange::time_shift(), &gauge);
        let direct = {
            let sys = sys.clone();
            ConservedQuantity::explicit("direct", move |t, tr: &Trajectory| {
                let (q, qd) = tr.state(t)?;
                sys.energy(t, &q, &qd)
            })
        };
        let d = max_pointwise_disagreement(&cq, &direct, &traj).unwrap();
        assert!(d <= 1e-6, "{id}: gauge energy vs direct energy {d:.3e}");
    }
}
