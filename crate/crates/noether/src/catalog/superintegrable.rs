//! A two-degree family `L = ẋẏ − g(x)·y` with three independent first
//! integrals. The shape functions `(g, μ)` are produced by solving the pair
//!
//! ```text
//! μ‴ = 6a·g′
//! 24a·g² + 2μ·g″ + 3g′·μ′ − 3g·μ″ = 0
//! ```
//!
//! whose solutions make `x + ε·f(x, ẋ)` with `f = gμ + ½ẋ²μ′ + aẋ⁴` a gauge
//! symmetry; the induced integral `ẏf − yḟ` carries an `ẋ⁴` term when `a ≠ 0`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::constants::{bh_constant, ConservedQuantity};
use crate::dynamics::{InitialValueProblem, MechanicalSystem};
use crate::error::{Error, Result};
use crate::ode::{dopri5, OdeOptions};
use crate::variation::{BHFunction, SpaceChange, SymmetryTriple, TimeChange, TimeStyle};

use super::{
    max_pointwise_disagreement, push_standard_checks, Applicability, CatalogEntry, CheckOutcome,
    EntryCheck, ExpectedConstant, NamedTriple, PsiCondition,
};

/// Tabulated shape functions of the family, with enough derivatives to
/// evaluate the third integral, on a uniform grid over `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct SuperintegrableProfile {
    pub a: f64,
    lo: f64,
    h: f64,
    /// Node rows `[V, g, g′, μ, μ′, μ″]`.
    rows: Vec<[f64; 6]>,
    /// Max defect of `μ‴ = 6a g′` reconstructed by finite differences.
    pub residual_linear: f64,
    /// Max defect of the coupling equation with `g″` reconstructed likewise.
    pub residual_coupling: f64,
}

const STATE_DIM: usize = 6;
const GRID_N: usize = 800;

fn rhs(a: f64, y: &DVector<f64>) -> Result<DVector<f64>> {
    // y = [V, g, g', mu, mu', mu'']
    let (g, gp) = (y[1], y[2]);
    let (mu, mup, mupp) = (y[3], y[4], y[5]);
    if mu.abs() < 1e-12 {
        return Err(Error::OdeFailure(
            "μ vanished while solving the shape equations".into(),
        ));
    }
    let gpp = (3.0 * g * mupp - 3.0 * gp * mup - 24.0 * a * g * g) / (2.0 * mu);
    Ok(DVector::from_vec(vec![g, gp, gpp, mup, mupp, 6.0 * a * gp]))
}

impl SuperintegrableProfile {
    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.lo + self.h * (self.rows.len() - 1) as f64)
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi) = self.range();
        x >= lo && x <= hi
    }

    /// Hermite interpolation of one column, using the exact derivative
    /// relations between columns (V′ = g, g′ column, μ-chain, μ‴ = 6ag′).
    fn col(&self, x: f64, idx: usize) -> f64 {
        let n = self.rows.len() - 1;
        let pos = ((x - self.lo) / self.h).clamp(0.0, n as f64);
        let j = (pos.floor() as usize).min(n - 1);
        let s = pos - j as f64;
        let (l, r) = (&self.rows[j], &self.rows[j + 1]);
        let deriv = |row: &[f64; 6]| -> f64 {
            match idx {
                0 => row[1],
                1 => row[2],
                2 => {
                    (3.0 * row[1] * row[5] - 3.0 * row[2] * row[4] - 24.0 * self.a * row[1] * row[1])
                        / (2.0 * row[3].max(1e-300))
                }
                3 => row[4],
                4 => row[5],
                _ => 6.0 * self.a * row[2],
            }
        };
        let (y0, y1) = (l[idx], r[idx]);
        let (d0, d1) = (deriv(l) * self.h, deriv(r) * self.h);
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * d1
    }

    pub fn potential(&self, x: f64) -> f64 {
        self.col(x, 0)
    }
    pub fn g(&self, x: f64) -> f64 {
        self.col(x, 1)
    }
    pub fn g_prime(&self, x: f64) -> f64 {
        self.col(x, 2)
    }
    pub fn mu(&self, x: f64) -> f64 {
        self.col(x, 3)
    }
    pub fn mu_prime(&self, x: f64) -> f64 {
        self.col(x, 4)
    }
    pub fn mu_second(&self, x: f64) -> f64 {
        self.col(x, 5)
    }

    /// `f(x, ẋ) = gμ + ½ẋ²μ′ + aẋ⁴`.
    pub fn shape_f(&self, x: f64, xd: f64) -> f64 {
        self.g(x) * self.mu(x) + 0.5 * xd * xd * self.mu_prime(x) + self.a * xd.powi(4)
    }

    /// `ḟ` along motions (using ẍ = −g): `g′μẋ + ½ẋ³μ″ − 4agẋ³`.
    pub fn shape_f_dot(&self, x: f64, xd: f64) -> f64 {
        self.g_prime(x) * self.mu(x) * xd + 0.5 * xd.powi(3) * self.mu_second(x)
            - 4.0 * self.a * self.g(x) * xd.powi(3)
    }

    /// Degenerate closed-form profile: `a = 0`, `μ ≡ 0`, `g` linear. Every
    /// equation of the pair is satisfied identically and the third integral
    /// collapses to zero.
    pub fn degenerate(g0: f64, g0_prime: f64, x_range: (f64, f64)) -> Self {
        let (lo, hi) = x_range;
        let h = (hi - lo) / GRID_N as f64;
        let rows = (0..=GRID_N)
            .map(|j| {
                let x = lo + j as f64 * h;
                let g = g0 + g0_prime * x;
                let v = g0 * x + 0.5 * g0_prime * x * x;
                [v, g, g0_prime, 0.0, 0.0, 0.0]
            })
            .collect();
        Self {
            a: 0.0,
            lo,
            h,
            rows,
            residual_linear: 0.0,
            residual_coupling: 0.0,
        }
    }
}

/// Solve the shape equations from `x = 0` outward and tabulate the profile.
///
/// `mu_init = (μ(0), μ′(0), μ″(0))` must have `μ(0) ≠ 0`; the coupling
/// equation determines `g″` only where `μ` does not vanish. For the `a = 0`
/// reduction the slope `g′(0)` must be positive.
pub fn build_superintegrable(
    a: f64,
    g0: f64,
    g0_prime: f64,
    mu_init: (f64, f64, f64),
    x_range: (f64, f64),
) -> Result<SuperintegrableProfile> {
    let (lo, hi) = x_range;
    if !(lo < 0.0 && hi > 0.0) {
        return Err(Error::Config("x_range must contain 0".into()));
    }
    if a == 0.0 && g0_prime <= 0.0 {
        return Err(Error::Config("the a = 0 reduction needs g'(0) > 0".into()));
    }
    if mu_init.0 == 0.0 {
        return Err(Error::Config(
            "μ(0) must be nonzero; use the degenerate profile for μ ≡ 0".into(),
        ));
    }

    let y0 = DVector::from_vec(vec![0.0, g0, g0_prime, mu_init.0, mu_init.1, mu_init.2]);
    let opts = OdeOptions {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        max_step: Some(2e-3),
        ..OdeOptions::default()
    };
    let fwd = dopri5(|_, y| rhs(a, y), 0.0, y0.clone(), hi, &opts)?;
    let bwd = dopri5(|_, y| rhs(a, y), 0.0, y0, lo, &opts)?;

    // The solver grid is fine (max_step 2e-3), so nearest-node cubic Hermite
    // resampling keeps full accuracy on the uniform tabulation grid.
    let h = (hi - lo) / GRID_N as f64;
    let sample = |x: f64| -> [f64; 6] {
        let sol = if x >= 0.0 { &fwd } else { &bwd };
        let k = sol
            .times
            .partition_point(|&t| if x >= 0.0 { t <= x } else { t >= x })
            .clamp(1, sol.times.len() - 1)
            - 1;
        let (t0, t1) = (sol.times[k], sol.times[k + 1]);
        let w = t1 - t0;
        let s = (x - t0) / w;
        let mut row = [0.0; STATE_DIM];
        for (i, slot) in row.iter_mut().enumerate() {
            let (y0, y1) = (sol.states[k][i], sol.states[k + 1][i]);
            let (d0, d1) = (sol.derivs[k][i] * w, sol.derivs[k + 1][i] * w);
            let (s2, s3) = (s * s, s * s * s);
            *slot = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
                + (s3 - 2.0 * s2 + s) * d0
                + (-2.0 * s3 + 3.0 * s2) * y1
                + (s3 - s2) * d1;
        }
        row
    };
    let rows: Vec<[f64; 6]> = (0..=GRID_N)
        .map(|j| sample(if j == GRID_N { hi } else { lo + j as f64 * h }))
        .collect();

    // Residuals of the pair, with the highest derivatives reconstructed by
    // fourth-order central differences so the check is independent of the
    // relations used during the solve.
    let d4 = |col: &dyn Fn(usize) -> f64, i: usize| -> f64 {
        (-col(i + 2) + 8.0 * col(i + 1) - 8.0 * col(i - 1) + col(i - 2)) / (12.0 * h)
    };
    let mut res_linear = 0.0f64;
    let mut res_coupling = 0.0f64;
    for i in 2..rows.len() - 2 {
        let mu3 = d4(&|k| rows[k][5], i);
        res_linear = res_linear.max((mu3 - 6.0 * a * rows[i][2]).abs());
        let gpp = d4(&|k| rows[k][2], i);
        let [_, g, gp, mu, mup, mupp] = rows[i];
        res_coupling = res_coupling
            .max((24.0 * a * g * g + 2.0 * mu * gpp + 3.0 * gp * mup - 3.0 * g * mupp).abs());
    }

    Ok(SuperintegrableProfile {
        a,
        lo,
        h,
        rows,
        residual_linear: res_linear,
        residual_coupling: res_coupling,
    })
}

/// The Lagrangian system `L = ẋẏ − g(x)y` induced by a profile, guarded to
/// the tabulated range of `x`.
pub fn superintegrable_system(profile: &Arc<SuperintegrableProfile>) -> crate::dynamics::LagrangianSystem {
    let mut kinetic = DMatrix::zeros(2, 2);
    kinetic[(0, 1)] = 1.0;
    kinetic[(1, 0)] = 1.0;
    let p_u = profile.clone();
    let p_g = profile.clone();
    let p_guard = profile.clone();
    MechanicalSystem {
        name: format!("superintegrable_a{}", profile.a),
        dim: 2,
        kinetic,
        potential: Arc::new(move |_, q: &DVector<f64>| p_u.g(q[0]) * q[1]),
        potential_grad: Arc::new(move |_, q: &DVector<f64>| {
            DVector::from_vec(vec![p_g.g_prime(q[0]) * q[1], p_g.g(q[0])])
        }),
        time_factor: None,
        guard: Some(Arc::new(move |_, q: &DVector<f64>, _: &DVector<f64>| {
            p_guard.contains(q[0])
        })),
    }
    .build()
}

fn vecn(v: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(v)
}

fn shape_triple(profile: &Arc<SuperintegrableProfile>) -> SymmetryTriple {
    let p_space = profile.clone();
    let p_gauge = profile.clone();
    SymmetryTriple::new(
        SpaceChange::pointwise(move |_, q, qd| vecn(&[p_space.shape_f(q[0], qd[0]), 0.0])),
        TimeChange::trivial(TimeStyle::Tau),
        BHFunction::pointwise(move |_, q, qd| -q[1] * p_gauge.shape_f_dot(q[0], qd[0])),
    )
}

/// The third integral `ẏf − yḟ` in closed form.
fn third_integral(profile: &Arc<SuperintegrableProfile>) -> ConservedQuantity {
    let p = profile.clone();
    ConservedQuantity::explicit("third_integral_reference", move |t, tr| {
        let _ = t;
        let (q, qd) = tr.state(t)?;
        Ok(qd[1] * p.shape_f(q[0], qd[0]) - q[1] * p.shape_f_dot(q[0], qd[0]))
    })
}

pub(super) fn superintegrable_entry(a: f64) -> Result<CatalogEntry> {
    let profile = Arc::new(build_superintegrable(a, 0.0, 1.0, (1.0, 0.0, 0.0), (-0.9, 0.9))?);
    let system = Arc::new(superintegrable_system(&profile));
    let ivp = InitialValueProblem::new(0.0, vecn(&[0.3, 0.2]), vecn(&[0.0, 0.1]), 0.0, 10.0);

    let p_psi = profile.clone();
    let mut entry = CatalogEntry {
        id: (if a == 0.0 { "superintegrable_a0" } else { "superintegrable_a01" }).into(),
        summary: "coupled 2-DOF family with three first integrals from solved shape functions".into(),
        notes: "shape pair solved numerically; third integral gains an ẋ⁴ term when a ≠ 0".into(),
        system: system.clone(),
        default_ivp: ivp,
        triples: vec![NamedTriple {
            name: "shape_family".into(),
            tag: "superintegrable/shape-family",
            triple: shape_triple(&profile),
            invariance: Some(Applicability::AllMotions),
            psi: Some(PsiCondition {
                psi: Arc::new(move |_, q, qd| q[1] * p_psi.shape_f_dot(q[0], qd[0])),
                applicability: Applicability::AllMotions,
            }),
        }],
        expected: Vec::new(),
        checks: Vec::new(),
        probe_curve: None,
    };

    let p = profile.clone();
    entry.expected.push(ExpectedConstant::new(
        "oscillator_energy_x",
        "½ẋ² + V(x), the decoupled energy of the x motion",
        1e-6,
        Applicability::AllMotions,
        move |_| {
            let p = p.clone();
            Ok(ConservedQuantity::explicit("oscillator_energy_x", move |t, tr| {
                let _ = t;
                let (q, qd) = tr.state(t)?;
                Ok(0.5 * qd[0] * qd[0] + p.potential(q[0]))
            }))
        },
    ));
    let sys = system.clone();
    entry.expected.push(ExpectedConstant::new(
        "coupled_energy",
        "ẋẏ + g(x)y, the energy of the full Lagrangian",
        1e-6,
        Applicability::AllMotions,
        move |_| {
            let sys = sys.clone();
            Ok(ConservedQuantity::explicit("coupled_energy", move |t, tr| {
                let (q, qd) = tr.state(t)?;
                sys.energy(t, &q, &qd)
            }))
        },
    ));
    let sys = system.clone();
    let p = profile.clone();
    entry.expected.push(ExpectedConstant::new(
        "third_integral",
        "ẏf − yḟ from the shape-family gauge pairing",
        1e-6,
        Applicability::AllMotions,
        move |_| {
            let triple = shape_triple(&p);
            Ok(bh_constant(&sys, &triple.space, &triple.bh))
        },
    ));

    let p = profile.clone();
    entry.checks.push(EntryCheck::new(
        "shape_equation_residuals",
        "finite-difference defects of the solved shape pair",
        move |_ctx| {
            let worst = p.residual_linear.max(p.residual_coupling);
            Ok(CheckOutcome::within(worst, 1e-8, "μ‴ = 6ag′ and the coupling equation"))
        },
    ));
    let p = profile.clone();
    entry.checks.push(EntryCheck::new(
        "third_integral_formula",
        "gauge pairing equals the expanded ẏf − yḟ",
        move |ctx| {
            let triple = shape_triple(&p);
            let cq = bh_constant(ctx.system, &triple.space, &triple.bh);
            let d = max_pointwise_disagreement(&cq, &third_integral(&p), ctx.traj)?;
            Ok(CheckOutcome::within(d, 1e-6, "expanded polynomial in ẋ"))
        },
    ));
    push_standard_checks(&mut entry);
    Ok(entry)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::drift;
    use crate::dynamics::integrate;
    use approx::assert_abs_diff_eq;

    #[test]
    fn a_zero_profile_matches_closed_form() {
        // With μ(0) = 1, μ′(0) = μ″(0) = 0 and g(0) = 0, g′(0) = 1 the pair
        // reduces to μ ≡ 1, g(x) = x, V(x) = x²/2.
        let p = build_superintegrable(0.0, 0.0, 1.0, (1.0, 0.0, 0.0), (-0.9, 0.9)).unwrap();
        for &x in &[-0.7, -0.2, 0.0, 0.4, 0.85] {
            assert_abs_diff_eq!(p.g(x), x, epsilon = 1e-10);
            assert_abs_diff_eq!(p.mu(x), 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(p.potential(x), 0.5 * x * x, epsilon = 1e-10);
        }
        assert!(p.residual_linear < 1e-10);
        assert!(p.residual_coupling < 1e-10);
    }

    #[test]
    fn degenerate_profile_kills_the_third_integral() {
        let p = Arc::new(SuperintegrableProfile::degenerate(0.0, 1.0, (-0.9, 0.9)));
        let system = Arc::new(superintegrable_system(&p));
        let ivp = InitialValueProblem::new(0.0, vecn(&[0.3, 0.2]), vecn(&[0.0, 0.1]), 0.0, 10.0);
        let traj = integrate(&system, &ivp).unwrap();
        let cq = third_integral(&p);
        let report = drift(&cq, &traj, 1e-6).unwrap();
        assert!(report.pass);
        assert!(report.baseline.abs() < 1e-14, "identically zero");
    }

    #[test]
    fn builder_rejects_bad_inputs() {
        assert!(build_superintegrable(0.0, 0.0, -1.0, (1.0, 0.0, 0.0), (-0.5, 0.5)).is_err());
        assert!(build_superintegrable(0.1, 0.0, 1.0, (0.0, 0.0, 0.0), (-0.5, 0.5)).is_err());
        assert!(build_superintegrable(0.1, 0.0, 1.0, (1.0, 0.0, 0.0), (0.1, 0.5)).is_err());
    }
}
