//! Ready-made systems with their symmetry triples, expected constants of
//! motion and verification checks.
//!
//! Every entry bundles a [`LagrangianSystem`], default initial data, the
//! symmetry triples known for the system, the constants those triples induce
//! (with tolerances and applicability), and a list of numerical checks that
//! the verification suite and the acceptance tests execute.

mod custom;
mod dissipative;
mod homogeneous;
mod kepler;
mod lane_emden;
mod oscillator;
mod plane_wave;
mod simple;
mod superintegrable;
mod toda;

pub use custom::{custom_entry, CustomSystemSpec};
pub use lane_emden::lane_emden_entry;
pub use superintegrable::{build_superintegrable, SuperintegrableProfile};

use std::sync::Arc;

use serde::Serialize;

use crate::constants::{
    alt_full_constant, alternative_to_standard, bh_constant, full_constant, nonlocal_constant,
    standard_to_alternative, trivialize_bh, trivialize_time, ConservedQuantity, ConversionForm,
};
use crate::dynamics::{InitialValueProblem, LagrangianSystem, ScalarFn, Trajectory};
use crate::error::{Error, Result};
use crate::variation::{
    alt_invariance_residual, check_grid, invariance_residual, total_derivative_check, BHFunction,
    SymmetryTriple, TimeStyle,
};

/// On which class of curves a claim (invariance, conservation) holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Applicability {
    /// Along every Euler–Lagrange motion.
    AllMotions,
    /// Along one particular motion only.
    SingleMotion,
    /// Along arbitrary smooth curves, EL or not.
    AnyCurve,
}

/// A known point function ψ satisfying the total-derivative condition for a
/// space change, together with the class of curves it holds on.
#[derive(Clone)]
pub struct PsiCondition {
    pub psi: Arc<ScalarFn>,
    pub applicability: Applicability,
}

/// A symmetry triple with its bookkeeping.
#[derive(Clone)]
pub struct NamedTriple {
    pub name: String,
    /// Topic tag for reports and `explain`.
    pub tag: &'static str,
    pub triple: SymmetryTriple,
    /// Invariance claim; `None` for families used only through the integral
    /// constant, which needs no invariance at all.
    pub invariance: Option<Applicability>,
    pub psi: Option<PsiCondition>,
}

type BuildFn = dyn Fn(&Trajectory) -> Result<ConservedQuantity> + Send + Sync;
type CheckFn = dyn Fn(&CheckCtx) -> Result<CheckOutcome> + Send + Sync;

/// A constant the entry is expected to conserve, with its builder.
#[derive(Clone)]
pub struct ExpectedConstant {
    pub id: String,
    pub description: String,
    pub tolerance: f64,
    pub applicability: Applicability,
    build: Arc<BuildFn>,
}

impl ExpectedConstant {
    pub fn new(
        id: impl Into<String>,
        description: impl Into<String>,
        tolerance: f64,
        applicability: Applicability,
        build: impl Fn(&Trajectory) -> Result<ConservedQuantity> + Send + Sync + 'static,
    ) -> Self {
        Self {
            id: id.into(),
            description: description.into(),
            tolerance,
            applicability,
            build: Arc::new(build),
        }
    }

    pub fn build(&self, traj: &Trajectory) -> Result<ConservedQuantity> {
        (self.build)(traj).map(|cq| cq.with_label(self.id.clone()))
    }
}

/// Outcome of one numerical check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub detail: String,
}

impl CheckOutcome {
    /// Pass when `value ≤ threshold`.
    pub fn within(value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            value,
            threshold,
            pass: value <= threshold,
            detail: detail.into(),
        }
    }

    /// Pass when `value > threshold` (for checks that must detect failure).
    pub fn exceeds(value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            value,
            threshold,
            pass: value > threshold,
            detail: detail.into(),
        }
    }
}

/// Context handed to entry checks.
pub struct CheckCtx<'a> {
    pub entry: &'a CatalogEntry,
    pub system: &'a Arc<LagrangianSystem>,
    pub traj: &'a Trajectory,
    /// Seed for any randomized choices inside the check.
    pub seed: u64,
}

/// A named verification step run by the suite.
#[derive(Clone)]
pub struct EntryCheck {
    pub id: String,
    pub description: String,
    run: Arc<CheckFn>,
}

impl EntryCheck {
    pub fn new(
        id: impl Into<String>,
        description: impl Into<String>,
        run: impl Fn(&CheckCtx) -> Result<CheckOutcome> + Send + Sync + 'static,
    ) -> Self {
        Self {
            id: id.into(),
            description: description.into(),
            run: Arc::new(run),
        }
    }

    pub fn run(&self, ctx: &CheckCtx) -> Result<CheckOutcome> {
        (self.run)(ctx)
    }
}

pub type ProbeCurveFn = dyn Fn(&Arc<LagrangianSystem>, (f64, f64)) -> Trajectory + Send + Sync;

/// One catalog system with everything needed to verify it.
pub struct CatalogEntry {
    pub id: String,
    pub summary: String,
    /// Cross-reference notes printed by `explain`.
    pub notes: String,
    pub system: Arc<LagrangianSystem>,
    pub default_ivp: InitialValueProblem,
    pub triples: Vec<NamedTriple>,
    pub expected: Vec<ExpectedConstant>,
    pub checks: Vec<EntryCheck>,
    /// Generator of a smooth non-EL curve on the same interval, for claims
    /// that hold on arbitrary curves.
    pub probe_curve: Option<Arc<ProbeCurveFn>>,
}

impl CatalogEntry {
    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    pub fn find_triple(&self, name: &str) -> Option<&NamedTriple> {
        self.triples.iter().find(|t| t.name == name)
    }

    fn probe(&self) -> Option<Trajectory> {
        let (a, b) = self.default_ivp.interval;
        self.probe_curve.as_ref().map(|f| f(&self.system, (a, b)))
    }
}

/// One-line listing data for an entry.
#[derive(Debug, Clone, Serialize)]
pub struct EntrySummary {
    pub id: String,
    pub dim: usize,
    pub triples: usize,
    pub constants: usize,
    pub summary: String,
}

type EntryBuilder = fn() -> Result<CatalogEntry>;

const REGISTRY: &[(&str, EntryBuilder)] = &[
    ("free_particle", simple::free_particle_entry),
    ("central_force_2d", simple::central_force_entry),
    ("oscillator_energy", simple::oscillator_energy_entry),
    ("oscillator_shift", oscillator::shift_entry),
    ("oscillator_dilation", oscillator::dilation_entry),
    ("oscillator_nonlocal", oscillator::nonlocal_entry),
    ("dissipative_quadratic", dissipative::dissipative_entry),
    ("lane_emden_n1", || lane_emden::lane_emden_entry(1)),
    ("lane_emden_n5", || lane_emden::lane_emden_entry(5)),
    ("lane_emden_n7", || lane_emden::lane_emden_entry(7)),
    ("homogeneous_inverse_square", homogeneous::inverse_square_entry),
    ("homogeneous_calogero", homogeneous::calogero_entry),
    ("toda_n2", || toda::toda_entry(2)),
    ("toda_n3", || toda::toda_entry(3)),
    ("kepler_2d", kepler::eccentric_entry),
    ("kepler_circular", kepler::circular_entry),
    ("superintegrable_a0", || superintegrable::superintegrable_entry(0.0)),
    ("superintegrable_a01", || superintegrable::superintegrable_entry(0.1)),
    ("plane_wave", plane_wave::plane_wave_entry),
];

/// Ids of all registered entries, in stable order.
pub fn entry_ids() -> Vec<&'static str> {
    REGISTRY.iter().map(|(id, _)| *id).collect()
}

/// Construct the entry registered under `id`.
pub fn get_entry(id: &str) -> Result<CatalogEntry> {
    REGISTRY
        .iter()
        .find(|(eid, _)| *eid == id)
        .map(|(_, build)| build())
        .unwrap_or_else(|| Err(Error::UnknownEntry(id.to_string())))
}

/// Summaries of every entry, in stable order.
pub fn list_entries() -> Result<Vec<EntrySummary>> {
    REGISTRY
        .iter()
        .map(|(id, build)| {
            let e = build()?;
            Ok(EntrySummary {
                id: id.to_string(),
                dim: e.dim(),
                triples: e.triples.len(),
                constants: e.expected.len(),
                summary: e.summary.to_string(),
            })
        })
        .collect()
}

/// FNV-1a hash for deriving deterministic per-name seeds.
pub(crate) fn stable_hash(s: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Max |invariance residual| of a triple over the check grid, dispatched on
/// the triple's style.
pub fn max_invariance_residual(
    sys: &Arc<LagrangianSystem>,
    triple: &SymmetryTriple,
    traj: &Trajectory,
) -> Result<f64> {
    let (a, b) = traj.interval();
    let mut worst = 0.0f64;
    for t in check_grid(a, b) {
        let r = match triple.style() {
            TimeStyle::Tau => invariance_residual(sys, triple, traj, t)?,
            TimeStyle::Theta => alt_invariance_residual(sys, triple, traj, t)?,
        };
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Max over the check grid of the baseline-subtracted disagreement between
/// two constants: `|(x(t) − x(a)) − (y(t) − y(a))|`.
pub fn max_baseline_disagreement(
    x: &ConservedQuantity,
    y: &ConservedQuantity,
    traj: &Trajectory,
) -> Result<f64> {
    let (a, b) = traj.interval();
    let xa = x.eval(a, traj)?;
    let ya = y.eval(a, traj)?;
    let mut worst = 0.0f64;
    for t in check_grid(a, b).into_iter().chain(std::iter::once(b)) {
        let dx = x.eval(t, traj)? - xa;
        let dy = y.eval(t, traj)? - ya;
        worst = worst.max((dx - dy).abs());
    }
    Ok(worst)
}

/// Max over the check grid of the raw pointwise disagreement `|x(t) − y(t)|`.
pub fn max_pointwise_disagreement(
    x: &ConservedQuantity,
    y: &ConservedQuantity,
    traj: &Trajectory,
) -> Result<f64> {
    let (a, b) = traj.interval();
    let mut worst = 0.0f64;
    for t in check_grid(a, b) {
        worst = worst.max((x.eval(t, traj)? - y.eval(t, traj)?).abs());
    }
    Ok(worst)
}

const RESIDUAL_TOL: f64 = 1e-6;
const AGREEMENT_TOL: f64 = 1e-6;

/// Append the generic checks every entry gets for free:
/// invariance residuals on the claimed class, total-derivative conditions
/// and ψ-absorption for triples carrying a ψ, and trivialization plus style
/// equivalence for invariant triples.
pub(crate) fn push_standard_checks(entry: &mut CatalogEntry) {
    for (idx, nt) in entry.triples.iter().enumerate() {
        let name = nt.name.clone();
        if let Some(applies) = nt.invariance {
            entry.checks.push(EntryCheck::new(
                format!("invariance_{name}"),
                format!("invariance residual of `{name}` on its applicability class"),
                move |ctx| {
                    let nt = &ctx.entry.triples[idx];
                    let mut worst = max_invariance_residual(ctx.system, &nt.triple, ctx.traj)?;
                    let mut scope = "default trajectory";
                    if applies == Applicability::AnyCurve {
                        if let Some(probe) = ctx.entry.probe() {
                            worst =
                                worst.max(max_invariance_residual(ctx.system, &nt.triple, &probe)?);
                            scope = "default trajectory + non-EL probe curve";
                        }
                    }
                    Ok(CheckOutcome::within(worst, RESIDUAL_TOL, scope))
                },
            ));
        }
        if nt.psi.is_some() {
            entry.checks.push(EntryCheck::new(
                format!("total_derivative_{name}"),
                format!("∂_εL|₀ = dψ/dt for `{name}` on its applicability class"),
                move |ctx| {
                    let nt = &ctx.entry.triples[idx];
                    let psi = nt.psi.as_ref().unwrap();
                    let (a, b) = ctx.traj.interval();
                    let grid = check_grid(a, b);
                    let p = psi.psi.clone();
                    let f = move |t: f64, q: &nalgebra::DVector<f64>, qd: &nalgebra::DVector<f64>| {
                        p(t, q, qd)
                    };
                    let mut worst =
                        total_derivative_check(ctx.system, &nt.triple.space, &f, ctx.traj, &grid)?;
                    let mut scope = "default trajectory";
                    if psi.applicability == Applicability::AnyCurve {
                        if let Some(probe) = ctx.entry.probe() {
                            let (a, b) = probe.interval();
                            worst = worst.max(total_derivative_check(
                                ctx.system,
                                &nt.triple.space,
                                &f,
                                &probe,
                                &check_grid(a, b),
                            )?);
                            scope = "default trajectory + non-EL probe curve";
                        }
                    }
                    Ok(CheckOutcome::within(worst, RESIDUAL_TOL, scope))
                },
            ));
            entry.checks.push(EntryCheck::new(
                format!("psi_absorption_{name}"),
                format!("integral constant minus gauge constant for `{name}` stays constant"),
                move |ctx| {
                    let nt = &ctx.entry.triples[idx];
                    let psi = nt.psi.as_ref().unwrap().psi.clone();
                    let (a, _) = ctx.traj.interval();
                    let nl = nonlocal_constant(ctx.system, &nt.triple.space, a);
                    let gauge = bh_constant(
                        ctx.system,
                        &nt.triple.space,
                        &BHFunction::pointwise(move |t, q, qd| -psi(t, q, qd)),
                    );
                    let worst = max_baseline_disagreement(&nl, &gauge, ctx.traj)?;
                    Ok(CheckOutcome::within(worst, AGREEMENT_TOL, "difference is constant"))
                },
            ));
        }
        if nt.invariance.is_some() && nt.invariance != Some(Applicability::SingleMotion) {
            match nt.triple.style() {
                TimeStyle::Tau => {
                    entry.checks.push(EntryCheck::new(
                        format!("trivialization_{name}"),
                        format!(
                            "constants from `{name}`, its gauge-trivialized and its time-trivialized forms agree"
                        ),
                        move |ctx| {
                            let nt = &ctx.entry.triples[idx];
                            let orig = full_constant(ctx.system, &nt.triple)?;
                            let trv = trivialize_bh(ctx.system, &nt.triple, ctx.traj, None)?;
                            let via_time = full_constant(&trv.system, &trv.triple)?;
                            let gauge_form = trivialize_time(ctx.system, &nt.triple)?;
                            let via_gauge = full_constant(ctx.system, &gauge_form)?;
                            let d1 = max_baseline_disagreement(&orig, &via_time, ctx.traj)?;
                            let d2 = max_baseline_disagreement(&orig, &via_gauge, ctx.traj)?;
                            Ok(CheckOutcome::within(
                                d1.max(d2),
                                AGREEMENT_TOL,
                                format!("k_shift = {}", trv.k_shift),
                            ))
                        },
                    ));
                    entry.checks.push(EntryCheck::new(
                        format!("style_equivalence_{name}"),
                        format!("constant of `{name}` is preserved under conversion to theta style"),
                        move |ctx| {
                            let nt = &ctx.entry.triples[idx];
                            let orig = full_constant(ctx.system, &nt.triple)?;
                            let conv =
                                standard_to_alternative(&nt.triple, ConversionForm::FirstOrder)?;
                            let alt = alt_full_constant(ctx.system, &conv)?;
                            let d = max_pointwise_disagreement(&orig, &alt, ctx.traj)?;
                            Ok(CheckOutcome::within(d, AGREEMENT_TOL, "first-order form"))
                        },
                    ));
                }
                TimeStyle::Theta => {
                    entry.checks.push(EntryCheck::new(
                        format!("style_equivalence_{name}"),
                        format!("constant of `{name}` is preserved under conversion to tau style"),
                        move |ctx| {
                            let nt = &ctx.entry.triples[idx];
                            let orig = alt_full_constant(ctx.system, &nt.triple)?;
                            let conv =
                                alternative_to_standard(&nt.triple, ConversionForm::FirstOrder)?;
                            let tau = full_constant(ctx.system, &conv)?;
                            let d = max_pointwise_disagreement(&orig, &tau, ctx.traj)?;
                            Ok(CheckOutcome::within(d, AGREEMENT_TOL, "first-order form"))
                        },
                    ));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lists_expected_entries() {
        let ids = entry_ids();
        for required in ["kepler_2d", "lane_emden_n5", "toda_n3", "oscillator_nonlocal"] {
            assert!(ids.contains(&required), "missing `{required}`");
        }
    }

    #[test]
    fn unknown_entry_is_an_error() {
        assert!(matches!(get_entry("bogus"), Err(Error::UnknownEntry(_))));
    }

    #[test]
    fn stable_hash_is_stable() {
        assert_eq!(stable_hash("kepler_2d"), stable_hash("kepler_2d"));
        assert_ne!(stable_hash("kepler_2d"), stable_hash("toda_n2"));
    }
}
