//! Cross-module numerical properties: Richardson order of the ε-differences,
//! Euler–Lagrange residuals at random times, analytic-vs-numeric derivative
//! agreement, energy drift on autonomous entries, and a couple of
//! property-based invariants.

use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use noether::catalog;
use noether::dynamics::{integrate, Trajectory};
use noether::quadrature::CumulativeIntegral;
use noether::variation::{check_grid, d_eps_space, SpaceChange};

fn trajectory_of(id: &str) -> (std::sync::Arc<noether::dynamics::LagrangianSystem>, Trajectory) {
    let entry = catalog::get_entry(id).unwrap();
    let traj = integrate(&entry.system, &entry.default_ivp).unwrap();
    (entry.system.clone(), traj)
}

/// Observed order of the central ε-difference via three step halvings; `None`
/// when the increments sit below the noise floor (e.g. families linear in ε).
fn observed_order(space: &SpaceChange, traj: &Trajectory, t: f64) -> Option<f64> {
    let base = space.eps0;
    let d = |eps: f64| {
        let mut sc = space.clone();
        sc.eps0 = eps;
        d_eps_space(&sc, traj, t).unwrap()
    };
    let d1 = d(base);
    let d2 = d(base / 2.0);
    let d4 = d(base / 4.0);
    let num = (&d1 - &d2).amax();
    let den = (&d2 - &d4).amax();
    // Below this floor the ε² signal is buried in roundoff (e.g. points where
    // the relevant third derivative vanishes) and the ratio is meaningless.
    if den < 1e-10 * (1.0 + d4.amax()) {
        return None;
    }
    Some((num / den).log2())
}

#[test]
fn epsilon_differences_have_second_order() {
    // Families with genuine ε-curvature across the catalog. Sample points are
    // kept clear of integrator knots: across a knot the dense output is only
    // C², so the ε-expansion of the difference quotient degrades there.
    let cases: Vec<(&str, &str)> = vec![
        ("oscillator_energy", "gauge_energy"),
        ("kepler_2d", "lrl_delay_x"),
        ("toda_n2", "lattice_scale"),
        ("homogeneous_inverse_square", "scale_time_change"),
        ("lane_emden_n5", "scale_matched"),
    ];
    for (id, triple) in cases {
        let entry = catalog::get_entry(id).unwrap();
        let traj = integrate(&entry.system, &entry.default_ivp).unwrap();
        // Measure at the default ε₀ or 1e−4, whichever is larger, so the
        // ε²-increments stay above the roundoff floor.
        let mut space = entry.find_triple(triple).unwrap().triple.space.clone();
        space.eps0 = space.eps0.max(1e-4);
        let space = &space;
        let (a, b) = traj.interval();
        let knots: Vec<f64> = traj.grid().collect();
        let clear_of_knots = |t: f64| {
            let i = knots.partition_point(|&k| k < t);
            let margin = 4.0 * space.eps0;
            (i == 0 || t - knots[i - 1] > margin) && (i == knots.len() || knots[i] - t > margin)
        };
        let mut orders: Vec<f64> = Vec::new();
        for t in check_grid(a, b).into_iter().filter(|&t| clear_of_knots(t)).step_by(4) {
            if let Some(order) = observed_order(space, &traj, t) {
                assert!(
                    (1.5..=2.6).contains(&order),
                    "{id}/{triple} at t = {t}: observed order {order} out of sanity band"
                );
                orders.push(order);
            }
        }
        assert!(orders.len() >= 4, "{id}/{triple}: too few measurable points");
        orders.sort_by(f64::total_cmp);
        let median = orders[orders.len() / 2];
        assert!(
            (1.8..=2.2).contains(&median),
            "{id}/{triple}: median observed order {median}"
        );
    }
}

#[test]
fn residuals_agree_across_style_conversion() {
    // The moving-interval residual of a triple and the reparameterization
    // residual of its converted triple are the same function of t; checked on
    // a bent (non-EL) curve where neither vanishes.
    use noether::constants::{standard_to_alternative, ConversionForm};
    use noether::variation::{
        alt_invariance_residual, invariance_residual, BHFunction, SpaceChange, SymmetryTriple,
        TimeChange,
    };
    let entry = catalog::get_entry("oscillator_energy").unwrap();
    let probe = entry.probe_curve.as_ref().unwrap()(&entry.system, (0.0, 6.0));
    // Time-shift family with no gauge and no time change: residual dL/dt ≠ 0.
    let triple = SymmetryTriple::new(
        SpaceChange::time_shift(),
        TimeChange::tau(|_, t| t).with_d_eps(|_| 0.0),
        BHFunction::trivial(),
    );
    let converted = standard_to_alternative(&triple, ConversionForm::FirstOrder).unwrap();
    let mut largest = 0.0f64;
    for t in check_grid(0.5, 5.5) {
        let r_tau = invariance_residual(&entry.system, &triple, &probe, t).unwrap();
        let r_theta = alt_invariance_residual(&entry.system, &converted, &probe, t).unwrap();
        largest = largest.max(r_tau.abs());
        assert!(
            (r_tau - r_theta).abs() <= 1e-6,
            "residuals diverge at t = {t}: {r_tau} vs {r_theta}"
        );
    }
    assert!(largest > 1e-2, "probe curve should make the residual visible");
}

#[test]
fn el_residual_at_random_interior_times() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for id in ["oscillator_energy", "kepler_2d", "toda_n3"] {
        let (_, traj) = trajectory_of(id);
        let (a, b) = traj.interval();
        for _ in 0..200 {
            let t = rng.gen_range(a..b);
            let r = traj.el_residual(t).unwrap();
            assert!(r < 1e-5, "{id}: EL residual {r:.3e} at t = {t}");
        }
    }
}

#[test]
fn analytic_derivatives_match_finite_differences() {
    // 100 random in-domain points per system, sampled near the default
    // trajectory so guards are respected; max relative error ≤ 1e−6.
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for id in [
        "kepler_2d",
        "toda_n3",
        "homogeneous_calogero",
        "lane_emden_n5",
        "dissipative_quadratic",
        "plane_wave",
        "superintegrable_a01",
    ] {
        let (sys, traj) = trajectory_of(id);
        assert!(sys.has_analytic(), "{id} should carry analytic derivatives");
        let numeric = sys.without_analytic();
        let (a, b) = traj.interval();
        let mut accepted = 0;
        while accepted < 100 {
            let t = rng.gen_range(a..b);
            let (q0, qd0) = traj.state(t).unwrap();
            let q = q0.map(|x| x * rng.gen_range(0.9..1.1) + rng.gen_range(-0.05..0.05));
            let qd = qd0.map(|x| x * rng.gen_range(0.9..1.1) + rng.gen_range(-0.05..0.05));
            if !sys.in_domain(t, &q, &qd) {
                continue;
            }
            accepted += 1;
            let pairs = [
                (sys.grad_q(t, &q, &qd).unwrap(), numeric.grad_q(t, &q, &qd).unwrap()),
                (sys.grad_qdot(t, &q, &qd).unwrap(), numeric.grad_qdot(t, &q, &qd).unwrap()),
                (sys.hess_qdot_t(t, &q, &qd).unwrap(), numeric.hess_qdot_t(t, &q, &qd).unwrap()),
            ];
            for (analytic, fd) in pairs {
                for i in 0..analytic.len() {
                    let rel = (analytic[i] - fd[i]).abs() / analytic[i].abs().max(1.0);
                    assert!(rel <= 1e-6, "{id}: rel error {rel:.3e} at t = {t}");
                }
            }
            let m_a = sys.hess_qdot_qdot(t, &q, &qd).unwrap();
            let m_n = numeric.hess_qdot_qdot(t, &q, &qd).unwrap();
            let rel = (&m_a - &m_n).norm() / m_a.norm().max(1.0);
            assert!(rel <= 1e-6, "{id}: mass-matrix rel error {rel:.3e}");
        }
    }
}

#[test]
fn autonomous_entries_conserve_energy() {
    for id in [
        "oscillator_energy",
        "kepler_2d",
        "toda_n2",
        "toda_n3",
        "homogeneous_calogero",
        "homogeneous_inverse_square",
    ] {
        let (sys, traj) = trajectory_of(id);
        let (a, b) = traj.interval();
        let e0 = {
            let (q, qd) = traj.state(a).unwrap();
            sys.energy(a, &q, &qd).unwrap()
        };
        for t in check_grid(a, b) {
            let (q, qd) = traj.state(t).unwrap();
            let e = sys.energy(t, &q, &qd).unwrap();
            let rel = (e - e0).abs() / e0.abs().max(1.0);
            assert!(rel <= 1e-6, "{id}: energy drift {rel:.3e}");
        }
    }
}

proptest! {
    /// Pointwise space changes report their generator exactly.
    #[test]
    fn pointwise_d_eps_is_exact(c0 in -2.0f64..2.0, c1 in -2.0f64..2.0, c2 in -2.0f64..2.0, t in 0.5f64..5.5) {
        let (_, traj) = trajectory_of("oscillator_energy");
        let family = SpaceChange::pointwise(move |tt, q, qd| {
            DVector::from_vec(vec![c0 + c1 * q[0] + c2 * qd[0] * tt])
        });
        let d = d_eps_space(&family, &traj, t).unwrap();
        let (q, qd) = traj.state(t).unwrap();
        let expect = c0 + c1 * q[0] + c2 * qd[0] * t;
        prop_assert!((d[0] - expect).abs() < 1e-14);
    }

    /// The cumulative table is exact on quadratics at arbitrary evaluation
    /// points (the fractional-node correction is a local quadratic), and
    /// exact on cubics at the even table nodes where plain composite Simpson
    /// applies.
    #[test]
    fn cumulative_simpson_exactness(
        a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, d in -2.0f64..2.0,
        upper in 0.1f64..4.0,
    ) {
        let quad = CumulativeIntegral::build(0.0, 4.0, 64, |x| Ok(a + b * x + c * x * x)).unwrap();
        let exact = a * upper + b * upper * upper / 2.0 + c * upper.powi(3) / 3.0;
        let got = quad.eval(upper).unwrap();
        prop_assert!((got - exact).abs() < 1e-12, "quadratic: got {got}, exact {exact}");

        let cubic = CumulativeIntegral::build(0.0, 4.0, 64, |x| Ok(a + b * x + c * x * x + d * x * x * x)).unwrap();
        let node = 0.125 * (upper / 0.125).round().clamp(1.0, 32.0);
        let exact = a * node + b * node * node / 2.0 + c * node.powi(3) / 3.0 + d * node.powi(4) / 4.0;
        let got = cubic.eval(node).unwrap();
        prop_assert!((got - exact).abs() < 1e-12, "cubic at node {node}: got {got}, exact {exact}");
    }

    /// The interval parser embedded in the run config round-trips floats and
    /// rejects empty intervals.
    #[test]
    fn interval_override_parsing(a in -100.0f64..100.0, w in 0.001f64..50.0) {
        let mut cfg = noether::suite::RunConfig::default();
        let b = a + w;
        cfg.apply_kv("interval", &format!("{a},{b}")).unwrap();
        prop_assert_eq!(cfg.interval, Some((a, b)));
        let reversed = format!("{b},{a}");
        prop_assert!(cfg.apply_kv("interval", &reversed).is_err());
    }
}
