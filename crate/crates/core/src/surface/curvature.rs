use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::ProfileCurve;
use crate::warp::WarpField;

/// Scalar field on a polar grid: strictly increasing `ρ > 0` samples times a
/// uniform periodic partition of `[0, 2π)`. Values are stored row-major in
/// `ρ` (`values[i * n_theta + j]`).
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub rho: Vec<f64>,
    pub n_theta: usize,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn new(rho: Vec<f64>, n_theta: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rho.len() * n_theta {
            return Err(Error::Input(format!(
                "grid is not rectangular: {} values for {} x {} nodes",
                values.len(),
                rho.len(),
                n_theta
            )));
        }
        if rho.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Input("rho samples must be strictly increasing".into()));
        }
        if rho.first().is_some_and(|&r| !(r > 0.0)) {
            return Err(Error::Input("rho grid must exclude the axis rho = 0".into()));
        }
        Ok(GridField { rho, n_theta, values })
    }

    pub fn from_fn(rho: Vec<f64>, n_theta: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(rho.len() * n_theta);
        for &r in &rho {
            for j in 0..n_theta {
                values.push(f(r, theta_at(j, n_theta)));
            }
        }
        GridField::new(rho, n_theta, values)
    }

    /// `f(ρ)` of a radial warp sampled on the same nodes as `self`.
    pub fn sample_warp(&self, w: &WarpField) -> Result<Self> {
        let mut values = Vec::with_capacity(self.values.len());
        for &r in &self.rho {
            let f = w.eval_f(r)?;
            values.extend(std::iter::repeat_n(f, self.n_theta));
        }
        GridField::new(self.rho.clone(), self.n_theta, values)
    }

    pub fn theta(&self, j: usize) -> f64 {
        theta_at(j, self.n_theta)
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_theta + j]
    }
}

fn theta_at(j: usize, n: usize) -> f64 {
    TAU * j as f64 / n as f64
}

/// Second-order derivative along `ρ` on a non-uniform grid (one-sided
/// three-point stencils at both ends).
fn d_rho(rho: &[f64], col: impl Fn(usize) -> f64, out: &mut [f64]) {
    let n = rho.len();
    let stencil = |i0: usize, at: usize| {
        let (x0, x1, x2) = (rho[i0], rho[i0 + 1], rho[i0 + 2]);
        let (h1, h2) = (x1 - x0, x2 - x1);
        let (f0, f1, f2) = (col(i0), col(i0 + 1), col(i0 + 2));
        match at {
            0 => {
                (-(2.0 * h1 + h2) / (h1 * (h1 + h2))) * f0 + ((h1 + h2) / (h1 * h2)) * f1 - (h1 / (h2 * (h1 + h2))) * f2
            }
            1 => -(h2 / (h1 * (h1 + h2))) * f0 + ((h2 - h1) / (h1 * h2)) * f1 + (h1 / (h2 * (h1 + h2))) * f2,
            _ => {
                (h2 / (h1 * (h1 + h2))) * f0 - ((h1 + h2) / (h1 * h2)) * f1 + ((2.0 * h2 + h1) / (h2 * (h1 + h2))) * f2
            }
        }
    };
    out[0] = stencil(0, 0);
    for (i, slot) in out.iter_mut().enumerate().take(n - 1).skip(1) {
        *slot = stencil(i - 1, 1);
    }
    out[n - 1] = stencil(n - 3, 2);
}

/// Pointwise mean curvature of the graph of `u` from the divergence form
///
/// `−2H e^f = (1/sinh ρ) ∂ρ[e^f u_ρ sinh ρ / W] + (1/sinh²ρ) ∂θ[e^f u_θ / W]`,
/// `W² = e^{−2f} + u_ρ² + u_θ² / sinh²ρ`,
///
/// with the normal pointing downward. `f` may depend on `θ`.
pub fn mean_curvature_graph(u: &GridField, f: &GridField) -> Result<GridField> {
    let (nr, nt) = (u.rho.len(), u.n_theta);
    if nr < 5 || nt < 8 {
        return Err(Error::Input(format!(
            "grid too coarse for the curvature operator: need >= 5 rho and >= 8 theta samples, got {nr} x {nt}"
        )));
    }
    if f.rho != u.rho || f.n_theta != nt {
        return Err(Error::Input("u and f must be sampled on the same grid".into()));
    }
    if u.rho[0].sinh() < 1e-8 {
        return Err(Error::Input(format!("rho = {} is too close to the axis", u.rho[0])));
    }
    let dth = TAU / nt as f64;
    let idx = |i: usize, j: usize| i * nt + j;
    let sh: Vec<f64> = u.rho.iter().map(|r| r.sinh()).collect();

    let mut u_r = vec![0.0; nr * nt];
    let mut col = vec![0.0; nr];
    for j in 0..nt {
        d_rho(&u.rho, |i| u.values[idx(i, j)], &mut col);
        for i in 0..nr {
            u_r[idx(i, j)] = col[i];
        }
    }
    let mut flux_r = vec![0.0; nr * nt];
    let mut flux_t = vec![0.0; nr * nt];
    for (i, &s) in sh.iter().enumerate() {
        for j in 0..nt {
            let (jm, jp) = ((j + nt - 1) % nt, (j + 1) % nt);
            let u_t = (u.values[idx(i, jp)] - u.values[idx(i, jm)]) / (2.0 * dth);
            let k = idx(i, j);
            let ef = f.values[k].exp();
            let w = ((-2.0 * f.values[k]).exp() + u_r[k] * u_r[k] + u_t * u_t / (s * s)).sqrt();
            flux_r[k] = ef * u_r[k] / w * s;
            flux_t[k] = ef * u_t / w;
        }
    }

    let mut out = vec![0.0; nr * nt];
    for j in 0..nt {
        d_rho(&u.rho, |i| flux_r[idx(i, j)], &mut col);
        for i in 0..nr {
            let (jm, jp) = ((j + nt - 1) % nt, (j + 1) % nt);
            let dt = (flux_t[idx(i, jp)] - flux_t[idx(i, jm)]) / (2.0 * dth);
            let div = col[i] / sh[i] + dt / (sh[i] * sh[i]);
            out[idx(i, j)] = -div / (2.0 * f.values[idx(i, j)].exp());
        }
    }
    GridField::new(u.rho.clone(), nt, out)
}

/// [`mean_curvature_graph`] with `f` taken from a radial warp.
pub fn mean_curvature_radial(u: &GridField, w: &WarpField) -> Result<GridField> {
    mean_curvature_graph(u, &u.sample_warp(w)?)
}

/// Result of feeding a solved profile back through the curvature operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureConsistency {
    pub spacing: f64,
    pub expected: f64,
    /// `max |H(ρ, θ) − H|` over the annulus `[0.05ρ₀, 0.95ρ₀]`.
    pub max_error: f64,
    /// Nodes inside the annulus.
    pub nodes: usize,
}

/// Samples `u` on a grid uniform in `σ = √(ρ₀ − ρ)` whose largest `ρ` step
/// is `spacing` (steps shrink toward the equator, where `u` steepens). The
/// grid extends two cells past the annulus `[0.05ρ₀, 0.95ρ₀]` on each side;
/// [`mean_curvature_radial`] is compared with the profile's `H` inside the
/// annulus only, so the one-sided end stencils never enter.
pub fn profile_curvature_consistency(
    profile: &ProfileCurve,
    spacing: f64,
    n_theta: usize,
) -> Result<CurvatureConsistency> {
    let rho0 = profile.rho0;
    let (lo, hi) = (0.05 * rho0, 0.95 * rho0);
    if !(spacing > 0.0 && spacing <= 0.1 * (hi - lo)) {
        return Err(Error::domain("spacing", spacing, format!("(0, {}]", 0.1 * (hi - lo))));
    }
    let (s_lo, s_hi) = ((rho0 - hi).sqrt(), (rho0 - lo).sqrt());
    let n_inner = ((s_hi - s_lo) * 2.0 * s_hi / spacing).ceil() as usize;
    let ds = (s_hi - s_lo) / n_inner as f64;
    // decreasing sigma gives increasing rho
    let rho: Vec<f64> = (0..n_inner + 5)
        .map(|k| {
            let sigma = s_hi + ds * (2.0 - k as f64);
            rho0 - sigma * sigma
        })
        .collect();
    if rho[0] <= 0.0 || s_lo - 2.0 * ds <= 0.0 {
        return Err(Error::domain(
            "spacing",
            spacing,
            "padding must stay inside (0, rho0)".to_string(),
        ));
    }
    let radial = profile.resample(&rho)?;
    let mut values = Vec::with_capacity(rho.len() * n_theta);
    for &u in &radial {
        values.extend(std::iter::repeat_n(u, n_theta));
    }
    let field = GridField::new(rho, n_theta, values)?;
    let h_field = mean_curvature_radial(&field, profile.ode().warp())?;
    let expected = profile.ode().h_curv();
    let mut max_error = 0.0f64;
    for i in 2..n_inner + 3 {
        for j in 0..n_theta {
            max_error = max_error.max((h_field.at(i, j) - expected).abs());
        }
    }
    Ok(CurvatureConsistency {
        spacing,
        expected,
        max_error,
        nodes: n_inner + 1,
    })
}
