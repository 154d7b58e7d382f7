//! User-registered systems: a built-in potential family plus numeric
//! parameters, declared in the run configuration. No expression parsing —
//! the family name selects a constructor, the parameters fill it in.
//!
//! Every custom entry gets the universally valid constants: one integral
//! constant per axis shift (which must equal `q̇(t0)·e_i` along motions) and,
//! for autonomous families, the energy. An Euler–Lagrange residual check
//! guards the integration quality.

use std::sync::Arc;

use nalgebra::DVector;

use crate::constants::{nonlocal_constant, ConservedQuantity};
use crate::dynamics::{InitialValueProblem, LagrangianSystem};
use crate::error::{Error, Result};
use crate::systems;
use crate::variation::{SpaceChange, SymmetryTriple, TimeStyle};

use super::{
    push_standard_checks, Applicability, CatalogEntry, CheckOutcome, EntryCheck, ExpectedConstant,
    NamedTriple,
};

/// Declarative description of a custom system, as read from the config file.
#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct CustomSystemSpec {
    /// Built-in family name; see [`custom_entry`] for the list.
    pub family: String,
    /// Family parameters, arity checked per family.
    pub params: Vec<f64>,
    pub t0: Option<f64>,
    pub q0: Vec<f64>,
    pub qdot0: Vec<f64>,
    pub interval: Option<(f64, f64)>,
}

fn build_system(spec: &CustomSystemSpec, dim: usize) -> Result<(LagrangianSystem, bool)> {
    let arity = |n: usize| -> Result<()> {
        if spec.params.len() != n {
            return Err(Error::Config(format!(
                "family `{}` takes {n} parameter(s), got {}",
                spec.family,
                spec.params.len()
            )));
        }
        Ok(())
    };
    let fixed_dim = |n: usize| -> Result<()> {
        if dim != n {
            return Err(Error::Config(format!(
                "family `{}` has {n} degree(s) of freedom, q0 has {dim}",
                spec.family
            )));
        }
        Ok(())
    };
    let p = &spec.params;
    Ok(match spec.family.as_str() {
        "free_particle" => {
            arity(0)?;
            (systems::free_particle(dim), true)
        }
        "harmonic_oscillator" => {
            arity(0)?;
            fixed_dim(1)?;
            (systems::harmonic_oscillator(), true)
        }
        "central_oscillator" => {
            arity(0)?;
            fixed_dim(2)?;
            (systems::central_oscillator_2d(), true)
        }
        "kepler" => {
            arity(1)?;
            fixed_dim(2)?;
            (systems::kepler(p[0]), true)
        }
        "inverse_square" => {
            arity(2)?;
            fixed_dim(2)?;
            (systems::inverse_square_potential(p[0], p[1]), true)
        }
        "calogero" => {
            arity(0)?;
            (systems::calogero(dim), true)
        }
        "toda" => {
            arity(0)?;
            (systems::toda(dim), true)
        }
        "dissipative_oscillator" => {
            arity(3)?;
            fixed_dim(1)?;
            (systems::dissipative_oscillator(p[0], p[1], p[2]), false)
        }
        "lane_emden" => {
            arity(1)?;
            fixed_dim(1)?;
            (systems::lane_emden_system(p[0] as u32), false)
        }
        "plane_wave" => {
            if spec.params.len() != dim {
                return Err(Error::Config(format!(
                    "family `plane_wave` takes the drift vector as parameters ({dim} value(s))"
                )));
            }
            (systems::plane_wave(DVector::from_row_slice(p)), false)
        }
        other => {
            return Err(Error::Config(format!(
                "unknown system family `{other}`; known: free_particle, harmonic_oscillator, \
                 central_oscillator, kepler, inverse_square, calogero, toda, \
                 dissipative_oscillator, lane_emden, plane_wave"
            )))
        }
    })
}

/// Build a catalog entry from a declarative spec.
pub fn custom_entry(id: &str, spec: &CustomSystemSpec) -> Result<CatalogEntry> {
    if spec.q0.is_empty() || spec.q0.len() != spec.qdot0.len() {
        return Err(Error::Config(format!(
            "custom system `{id}` needs q0 and qdot0 of equal, nonzero length"
        )));
    }
    let dim = spec.q0.len();
    let (system, autonomous) = build_system(spec, dim)?;
    let system = Arc::new(system);
    let (a, b) = spec.interval.unwrap_or((0.0, 10.0));
    if b <= a {
        return Err(Error::Config(format!("custom system `{id}`: empty interval")));
    }
    let t0 = spec.t0.unwrap_or(a);
    let ivp = InitialValueProblem::new(
        t0,
        DVector::from_row_slice(&spec.q0),
        DVector::from_row_slice(&spec.qdot0),
        a,
        b,
    );

    let mut entry = CatalogEntry {
        id: id.to_string(),
        summary: format!("custom system from family `{}`", spec.family),
        notes: format!("registered from the run configuration; parameters {:?}", spec.params),
        system: system.clone(),
        default_ivp: ivp,
        triples: Vec::new(),
        expected: Vec::new(),
        checks: Vec::new(),
        probe_curve: None,
    };

    for i in 0..dim {
        let axis = move |_: f64, q: &DVector<f64>, _: &DVector<f64>| {
            let mut v = DVector::zeros(q.len());
            v[i] = 1.0;
            v
        };
        let shift = SpaceChange::pointwise(axis);
        entry.triples.push(NamedTriple {
            name: format!("axis_shift_{i}"),
            tag: "custom/axis-shift",
            triple: SymmetryTriple::space_only(shift.clone(), TimeStyle::Tau),
            invariance: None,
            psi: None,
        });
        let sys = system.clone();
        entry.expected.push(ExpectedConstant::new(
            format!("velocity_component_{i}"),
            format!("integral constant of the shift along axis {i}; equals q̇(t0)·e{i}"),
            1e-6,
            Applicability::AllMotions,
            move |traj| {
                let (a, _) = traj.interval();
                Ok(nonlocal_constant(&sys, &shift, a))
            },
        ));
    }
    if autonomous {
        let sys = system.clone();
        entry.expected.push(ExpectedConstant::new(
            "energy",
            "energy of the autonomous system",
            1e-6,
            Applicability::AllMotions,
            move |_| {
                let sys = sys.clone();
                Ok(ConservedQuantity::explicit("energy", move |t, tr| {
                    let (q, qd) = tr.state(t)?;
                    sys.energy(t, &q, &qd)
                }))
            },
        ));
    }
    entry.checks.push(EntryCheck::new(
        "el_residual",
        "Euler-Lagrange residual of the integrated motion at grid midpoints",
        |ctx| {
            let r = ctx.traj.max_el_residual()?;
            Ok(CheckOutcome::within(r, 1e-4, "finite-difference residual"))
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

    fn kepler_spec() -> CustomSystemSpec {
        CustomSystemSpec {
            family: "kepler".into(),
            params: vec![2.0],
            t0: None,
            q0: vec![1.5, 0.0],
            qdot0: vec![0.0, 1.0],
            interval: Some((0.0, 8.0)),
        }
    }

    #[test]
    fn custom_kepler_entry_verifies() {
        let entry = custom_entry("my_kepler", &kepler_spec()).unwrap();
        assert_eq!(entry.dim(), 2);
        let traj = integrate(&entry.system, &entry.default_ivp).unwrap();
        for exp in &entry.expected {
            let cq = exp.build(&traj).unwrap();
            let report = drift(&cq, &traj, exp.tolerance).unwrap();
            assert!(report.pass, "{}: rel drift {}", exp.id, report.rel_drift);
        }
        // The axis-shift constant is the initial velocity component.
        let cq = entry.expected[1].build(&traj).unwrap();
        let v = cq.eval(5.0, &traj).unwrap();
        assert!((v - 1.0).abs() < 1e-6, "got {v}");
    }

    #[test]
    fn bad_specs_are_config_errors() {
        let mut spec = kepler_spec();
        spec.params = vec![];
        assert!(matches!(custom_entry("x", &spec), Err(Error::Config(_))));

        let mut spec = kepler_spec();
        spec.family = "warp_drive".into();
        assert!(matches!(custom_entry("x", &spec), Err(Error::Config(_))));

        let mut spec = kepler_spec();
        spec.q0 = vec![1.0];
        assert!(matches!(custom_entry("x", &spec), Err(Error::Config(_))));
    }
}
