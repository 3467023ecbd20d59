//! Equilibria of the Lorenz system and their linear stability.
//!
//! ```text
//! dx/dt = σ(y − x)
//! dy/dt = x(ρ − z) − y
//! dz/dt = xy − βz
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::linalg::{Complex, ComplexMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorenzParams {
    sigma: f64,
    rho: f64,
    beta: f64,
}

impl LorenzParams {
    pub fn new(sigma: f64, rho: f64, beta: f64) -> Result<Self> {
        for (name, v) in [("sigma", sigma), ("rho", rho), ("beta", beta)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(domain(format!("{name} must be finite and positive, got {v}")));
            }
        }
        Ok(Self { sigma, rho, beta })
    }

    /// σ = 10, β = 8/3 with the given ρ.
    pub fn classic(rho: f64) -> Result<Self> {
        Self::new(10.0, rho, 8.0 / 3.0)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Right-hand side of the Lorenz equations at `(x, y, z)`.
    pub fn vector_field(&self, [x, y, z]: [f64; 3]) -> [f64; 3] {
        [
            self.sigma * (y - x),
            x * (self.rho - z) - y,
            x * y - self.beta * z,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Trivial,
    PlusBranch,
    MinusBranch,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Trivial => "trivial",
            Branch::PlusBranch => "plus",
            Branch::MinusBranch => "minus",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumPoint {
    pub branch: Branch,
    pub x0: f64,
    pub y0: f64,
    pub z0: f64,
}

impl EquilibriumPoint {
    pub fn coords(&self) -> [f64; 3] {
        [self.x0, self.y0, self.z0]
    }
}

/// Fixed points of the flow. The two convective branches exist only for ρ > 1.
pub fn equilibria(p: &LorenzParams) -> Vec<EquilibriumPoint> {
    let mut points = vec![EquilibriumPoint {
        branch: Branch::Trivial,
        x0: 0.0,
        y0: 0.0,
        z0: 0.0,
    }];
    if p.rho > 1.0 {
        let r = (p.beta * (p.rho - 1.0)).sqrt();
        let z0 = p.rho - 1.0;
        points.push(EquilibriumPoint {
            branch: Branch::PlusBranch,
            x0: r,
            y0: r,
            z0,
        });
        points.push(EquilibriumPoint {
            branch: Branch::MinusBranch,
            x0: -r,
            y0: -r,
            z0,
        });
    }
    points
}

pub fn equilibrium(p: &LorenzParams, branch: Branch) -> Option<EquilibriumPoint> {
    equilibria(p).into_iter().find(|e| e.branch == branch)
}

/// Linearization of the flow at `e`.
pub fn jacobian(p: &LorenzParams, e: &EquilibriumPoint) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[
        &[-p.sigma, p.sigma, 0.0],
        &[p.rho - e.z0, -1.0, -e.x0],
        &[e.y0, e.x0, -p.beta],
    ])
    .expect("3x3 literal")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StabilityClass {
    StableNode,
    UnstableNode,
    UnstableSaddle,
    StableSpiral,
    UnstableSpiral,
    Marginal,
}

impl fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::StableNode => "stable node",
            Self::UnstableNode => "unstable node",
            Self::UnstableSaddle => "unstable saddle",
            Self::StableSpiral => "stable spiral",
            Self::UnstableSpiral => "unstable spiral",
            Self::Marginal => "marginal",
        })
    }
}

/// `1e-6 · (1 + max |λ|)`, used for both realness and sign decisions.
pub fn default_stability_tol(eigenvalues: &[Complex]) -> f64 {
    let scale = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    1e-6 * (1.0 + scale)
}

/// Classifies a three-dimensional equilibrium from its spectrum.
///
/// Eigenvalues with `|Im| <= im_tol` count as real; any `|Re| <= re_tol`
/// makes the point marginal.
pub fn classify_stability(
    eigenvalues: &[Complex],
    im_tol: f64,
    re_tol: f64,
) -> Result<StabilityClass> {
    if eigenvalues.len() != 3 {
        return Err(domain(format!(
            "stability classification expects 3 eigenvalues, got {}",
            eigenvalues.len()
        )));
    }
    if eigenvalues.iter().any(|z| z.re.abs() <= re_tol) {
        return Ok(StabilityClass::Marginal);
    }
    let (real, complex): (Vec<Complex>, Vec<Complex>) =
        eigenvalues.iter().partition(|z| z.im.abs() <= im_tol);

    Ok(if complex.is_empty() {
        let negative = real.iter().filter(|z| z.re < 0.0).count();
        match negative {
            3 => StabilityClass::StableNode,
            0 => StabilityClass::UnstableNode,
            _ => StabilityClass::UnstableSaddle,
        }
    } else {
        let pair_re = complex.iter().map(|z| z.re).sum::<f64>() / complex.len() as f64;
        let max_re = eigenvalues.iter().map(|z| z.re).fold(f64::MIN, f64::max);
        if pair_re > 0.0 {
            StabilityClass::UnstableSpiral
        } else if max_re < 0.0 {
            StabilityClass::StableSpiral
        } else {
            // decaying oscillation with an expanding real direction
            StabilityClass::UnstableSaddle
        }
    })
}
