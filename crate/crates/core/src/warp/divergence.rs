//! Discrete check of the divergence split
//! `e^f div_f X = div_H(e^f dπ₁X) + ξ(e^{-f} g(X, ξ))`.
//!
//! The left side is the conservative 3D divergence with `√det g = e^f sinh ρ`.
//! The right side expands `div_H(e^f dπ₁X)` by the product rule into
//! `e^f div_H(dπ₁X) + g_H(dπ₁X, grad_H e^f)`, with the 2D divergence taken
//! conservatively with `√det g_H = sinh ρ` and `grad_H e^f` differenced from
//! grid samples. Both routes are second-order central differences, so the
//! pointwise residual is `O(step²)`.

use std::f64::consts::TAU;

use super::WarpField;
use crate::error::{Error, Result};

/// Uniform axis `start + i * step`, `i < count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(start: f64, end: f64, count: usize) -> Self {
        let step = if count > 1 {
            (end - start) / (count - 1) as f64
        } else {
            0.0
        };
        Axis { start, step, count }
    }

    pub fn at(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }
}

/// Grid over `(ρ, θ, t)`; θ is the uniform periodic partition of `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarGrid3 {
    pub rho: Axis,
    pub n_theta: usize,
    pub t: Axis,
}

impl PolarGrid3 {
    pub fn theta(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n_theta as f64
    }

    fn theta_step(&self) -> f64 {
        TAU / self.n_theta as f64
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n_theta + j) * self.t.count + k
    }

    fn len(&self) -> usize {
        self.rho.count * self.n_theta * self.t.count
    }

    fn validate(&self) -> Result<()> {
        if self.rho.count < 3 || self.n_theta < 3 || self.t.count < 3 {
            return Err(Error::Input(format!(
                "grid too coarse: need at least 3 points per axis, got ({}, {}, {})",
                self.rho.count, self.n_theta, self.t.count
            )));
        }
        if !(self.rho.start > 0.0) || !(self.rho.step > 0.0) || !(self.t.step > 0.0) {
            return Err(Error::Input(
                "rho axis must start above 0 (axis excluded) and both rho and t steps must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A vector field `X = X^ρ ∂ρ + X^θ ∂θ + X^t ξ` sampled at grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField3 {
    pub grid: PolarGrid3,
    pub rho: Vec<f64>,
    pub theta: Vec<f64>,
    pub t: Vec<f64>,
}

impl VectorField3 {
    /// Samples `field(ρ, θ, t) -> [X^ρ, X^θ, X^t]` on every node.
    pub fn sample(grid: PolarGrid3, field: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        let n = grid.len();
        let (mut xr, mut xth, mut xt) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for i in 0..grid.rho.count {
            for j in 0..grid.n_theta {
                for k in 0..grid.t.count {
                    let [a, b, c] = field(grid.rho.at(i), grid.theta(j), grid.t.at(k));
                    let idx = grid.index(i, j, k);
                    xr[idx] = a;
                    xth[idx] = b;
                    xt[idx] = c;
                }
            }
        }
        VectorField3 {
            grid,
            rho: xr,
            theta: xth,
            t: xt,
        }
    }
}

/// Both sides and their difference on interior nodes
/// (`1 ≤ i ≤ n_ρ-2`, all θ, `1 ≤ k ≤ n_t-2`), flattened in `(i, j, k)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceResidual {
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub residual: Vec<f64>,
    pub max: f64,
}

pub fn divergence_identity_residual(w: &WarpField, x: &VectorField3) -> Result<DivergenceResidual> {
    let g = x.grid;
    g.validate()?;
    let n = g.len();
    if x.rho.len() != n || x.theta.len() != n || x.t.len() != n {
        return Err(Error::Input("vector field does not match its grid".into()));
    }
    w.check(g.rho.at(g.rho.count - 1))?;

    let ef: Vec<f64> = (0..g.rho.count).map(|i| w.exp_f(g.rho.at(i))).collect();
    let sh: Vec<f64> = (0..g.rho.count).map(|i| g.rho.at(i).sinh()).collect();

    let (dr, dth, dt) = (2.0 * g.rho.step, 2.0 * g.theta_step(), 2.0 * g.t.step);
    let nth = g.n_theta;
    let mut out = DivergenceResidual {
        lhs: Vec::new(),
        rhs: Vec::new(),
        residual: Vec::new(),
        max: 0.0,
    };
    for i in 1..g.rho.count - 1 {
        for j in 0..nth {
            let (jm, jp) = ((j + nth - 1) % nth, (j + 1) % nth);
            for k in 1..g.t.count - 1 {
                let at = |i, j, k| g.index(i, j, k);
                let c = at(i, j, k);
                let vol = |i: usize| ef[i] * sh[i];

                // e^f div_f X with sqrt(det g) = e^f sinh rho.
                let d_rho = (vol(i + 1) * x.rho[at(i + 1, j, k)] - vol(i - 1) * x.rho[at(i - 1, j, k)]) / dr;
                let d_th = vol(i) * (x.theta[at(i, jp, k)] - x.theta[at(i, jm, k)]) / dth;
                let d_t = vol(i) * (x.t[at(i, j, k + 1)] - x.t[at(i, j, k - 1)]) / dt;
                let lhs = ef[i] * (d_rho + d_th + d_t) / vol(i);

                // e^f div_H(dπ₁X) + g_H(dπ₁X, grad e^f) + ξ(e^{-f} g(X, ξ)).
                let div_h = ((sh[i + 1] * x.rho[at(i + 1, j, k)] - sh[i - 1] * x.rho[at(i - 1, j, k)]) / dr
                    + sh[i] * (x.theta[at(i, jp, k)] - x.theta[at(i, jm, k)]) / dth)
                    / sh[i];
                // f is radial: the θ-component of grad e^f vanishes.
                let grad_ef_rho = (ef[i + 1] - ef[i - 1]) / dr;
                let vertical = {
                    let flux = |k: usize| {
                        let g_x_xi = ef[i] * ef[i] * x.t[at(i, j, k)];
                        g_x_xi / ef[i]
                    };
                    (flux(k + 1) - flux(k - 1)) / dt
                };
                let rhs = ef[i] * div_h + x.rho[c] * grad_ef_rho + vertical;

                let r = (lhs - rhs).abs();
                out.max = out.max.max(r);
                out.lhs.push(lhs);
                out.rhs.push(rhs);
                out.residual.push(r);
            }
        }
    }
    Ok(out)
}
