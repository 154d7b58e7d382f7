//! Constructors for the Lagrangian systems used throughout the catalog.
//!
//! All of them fit the mechanical template `L = c(t)·(½ q̇ᵀK q̇ − U(t, q))`,
//! which supplies analytic derivatives; the finite-difference fallback path is
//! exercised separately in tests.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{LagrangianSystem, MechanicalSystem, TimeFactor};

/// `L = ½‖q̇‖²` in `dim` dimensions.
pub fn free_particle(dim: usize) -> LagrangianSystem {
    MechanicalSystem {
        name: "free_particle".into(),
        dim,
        kinetic: DMatrix::identity(dim, dim),
        potential: Arc::new(|_, _| 0.0),
        potential_grad: Arc::new(move |_, q: &DVector<f64>| DVector::zeros(q.len())),
        time_factor: None,
        guard: None,
    }
    .build()
}

/// One-dimensional oscillator `L = q̇²/2 − q²/2`.
pub fn harmonic_oscillator() -> LagrangianSystem {
    MechanicalSystem {
        name: "harmonic_oscillator".into(),
        dim: 1,
        kinetic: DMatrix::identity(1, 1),
        potential: Arc::new(|_, q: &DVector<f64>| 0.5 * q[0] * q[0]),
        potential_grad: Arc::new(|_, q: &DVector<f64>| DVector::from_vec(vec![q[0]])),
        time_factor: None,
        guard: None,
    }
    .build()
}

/// Planar central-force system `L = ½‖q̇‖² − ½‖q‖²` (isotropic oscillator).
pub fn central_oscillator_2d() -> LagrangianSystem {
    MechanicalSystem {
        name: "central_oscillator_2d".into(),
        dim: 2,
        kinetic: DMatrix::identity(2, 2),
        potential: Arc::new(|_, q: &DVector<f64>| 0.5 * q.norm_squared()),
        potential_grad: Arc::new(|_, q: &DVector<f64>| q.clone()),
        time_factor: None,
        guard: None,
    }
    .build()
}

/// Planar Kepler problem `L = ½‖q̇‖² + k/‖q‖`, guarded away from the collision.
pub fn kepler(k: f64) -> LagrangianSystem {
    MechanicalSystem {
        name: "kepler".into(),
        dim: 2,
        kinetic: DMatrix::identity(2, 2),
        potential: Arc::new(move |_, q: &DVector<f64>| -k / q.norm()),
        potential_grad: Arc::new(move |_, q: &DVector<f64>| {
            let r = q.norm();
            (k / (r * r * r)) * q
        }),
        time_factor: None,
        guard: Some(Arc::new(|_, q: &DVector<f64>, _: &DVector<f64>| q.norm() > 1e-8)),
    }
    .build()
}

/// Dissipative Lagrangian `e^{(k/m)t}·(½m‖q̇‖² − c‖q‖²)` in one dimension:
/// viscous damping `−k q̇` around a quadratic potential.
pub fn dissipative_oscillator(m: f64, k: f64, c: f64) -> LagrangianSystem {
    let h = k / m;
    MechanicalSystem {
        name: "dissipative_oscillator".into(),
        dim: 1,
        kinetic: DMatrix::identity(1, 1) * m,
        potential: Arc::new(move |_, q: &DVector<f64>| c * q[0] * q[0]),
        potential_grad: Arc::new(move |_, q: &DVector<f64>| DVector::from_vec(vec![2.0 * c * q[0]])),
        time_factor: Some(TimeFactor {
            value: Arc::new(move |t| (h * t).exp()),
            deriv: Arc::new(move |t| h * (h * t).exp()),
        }),
        guard: None,
    }
    .build()
}

/// Lane–Emden system of index `n`: `L = t²(q̇²/2 − q^{n+1}/(n+1))`, singular at `t = 0`.
pub fn lane_emden_system(n: u32) -> LagrangianSystem {
    let p = n as i32;
    MechanicalSystem {
        name: format!("lane_emden_n{n}"),
        dim: 1,
        kinetic: DMatrix::identity(1, 1),
        potential: Arc::new(move |_, q: &DVector<f64>| q[0].powi(p + 1) / (p + 1) as f64),
        potential_grad: Arc::new(move |_, q: &DVector<f64>| DVector::from_vec(vec![q[0].powi(p)])),
        time_factor: Some(TimeFactor {
            value: Arc::new(|t| t * t),
            deriv: Arc::new(|t| 2.0 * t),
        }),
        guard: Some(Arc::new(|t, _: &DVector<f64>, _: &DVector<f64>| t != 0.0)),
    }
    .build()
}

/// Central homogeneous potential of degree −2: `L = ½m‖q̇‖² + k/‖q‖²`.
pub fn inverse_square_potential(m: f64, k: f64) -> LagrangianSystem {
    MechanicalSystem {
        name: "inverse_square_potential".into(),
        dim: 2,
        kinetic: DMatrix::identity(2, 2) * m,
        potential: Arc::new(move |_, q: &DVector<f64>| -k / q.norm_squared()),
        potential_grad: Arc::new(move |_, q: &DVector<f64>| {
            let r2 = q.norm_squared();
            (2.0 * k / (r2 * r2)) * q
        }),
        time_factor: None,
        guard: Some(Arc::new(|_, q: &DVector<f64>, _: &DVector<f64>| q.norm() > 1e-8)),
    }
    .build()
}

/// Rational inverse-square pair interaction on the line:
/// `U = Σ_{j<k} 1/(q_j − q_k)²`, homogeneous of degree −2.
pub fn calogero(n: usize) -> LagrangianSystem {
    let guard_n = n;
    MechanicalSystem {
        name: format!("calogero_n{n}"),
        dim: n,
        kinetic: DMatrix::identity(n, n),
        potential: Arc::new(move |_, q: &DVector<f64>| {
            let mut u = 0.0;
            for j in 0..q.len() {
                for k in (j + 1)..q.len() {
                    let d = q[j] - q[k];
                    u += 1.0 / (d * d);
                }
            }
            u
        }),
        potential_grad: Arc::new(move |_, q: &DVector<f64>| {
            let mut g = DVector::zeros(q.len());
            for j in 0..q.len() {
                for k in (j + 1)..q.len() {
                    let d = q[j] - q[k];
                    let f = -2.0 / (d * d * d);
                    g[j] += f;
                    g[k] -= f;
                }
            }
            g
        }),
        time_factor: None,
        guard: Some(Arc::new(move |_, q: &DVector<f64>, _: &DVector<f64>| {
            for j in 0..guard_n {
                for k in (j + 1)..guard_n {
                    if (q[j] - q[k]).abs() < 1e-8 {
                        return false;
                    }
                }
            }
            true
        })),
    }
    .build()
}

/// Nonperiodic exponential lattice of `n` particles on the line:
/// `U = Σ_k e^{q_k − q_{k+1}}`.
pub fn toda(n: usize) -> LagrangianSystem {
    MechanicalSystem {
        name: format!("toda_n{n}"),
        dim: n,
        kinetic: DMatrix::identity(n, n),
        potential: Arc::new(toda_potential),
        potential_grad: Arc::new(|_, q: &DVector<f64>| {
            let mut g = DVector::zeros(q.len());
            for k in 0..q.len() - 1 {
                let e = (q[k] - q[k + 1]).exp();
                g[k] += e;
                g[k + 1] -= e;
            }
            g
        }),
        time_factor: None,
        guard: None,
    }
    .build()
}

pub fn toda_potential(_t: f64, q: &DVector<f64>) -> f64 {
    (0..q.len() - 1).map(|k| (q[k] - q[k + 1]).exp()).sum()
}

/// Particle in a travelling external field: `L = ½‖q̇‖² − U(q − tu)`
/// with the quadratic profile `U(x) = ½‖x‖²`.
pub fn plane_wave(u: DVector<f64>) -> LagrangianSystem {
    let dim = u.len();
    let u2 = u.clone();
    MechanicalSystem {
        name: "plane_wave".into(),
        dim,
        kinetic: DMatrix::identity(dim, dim),
        potential: Arc::new(move |t, q: &DVector<f64>| 0.5 * (q - t * &u).norm_squared()),
        potential_grad: Arc::new(move |t, q: &DVector<f64>| q - t * &u2),
        time_factor: None,
        guard: None,
    }
    .build()
}
