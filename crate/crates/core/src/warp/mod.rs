//! Warping functions `f(ρ)` for the warped product `H ×_f R`, the
//! coefficients of the metric `dρ² + sinh²ρ dθ² + e^{2f} dt²`, and the
//! cumulative integral `F(ρ) = ∫₀^ρ e^{f(s)} sinh s ds`.

mod divergence;
mod tabulated;

pub use divergence::{divergence_identity_residual, Axis, DivergenceResidual, PolarGrid3, VectorField3};
pub use tabulated::TabulatedWarp;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A radial warping function.
#[derive(Debug, Clone, PartialEq)]
pub enum WarpField {
    /// `f ≡ c`.
    Constant(f64),
    /// `f(ρ) = ln(2 cosh ρ)`.
    LogCosh,
    /// Monotone C¹ piecewise-cubic interpolation of `(ρ, f)` knots.
    Tabulated(TabulatedWarp),
}

/// Diagonal metric coefficients in the coordinate frame `(∂ρ, ∂θ, ξ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricCoeffs {
    pub g_rho_rho: f64,
    pub g_theta_theta: f64,
    pub g_tt: f64,
}

impl WarpField {
    pub fn tabulated(knots: &[(f64, f64)], quad_tol: f64) -> Result<Self> {
        TabulatedWarp::new(knots, quad_tol).map(WarpField::Tabulated)
    }

    pub fn name(&self) -> &'static str {
        match self {
            WarpField::Constant(_) => "constant",
            WarpField::LogCosh => "log_cosh",
            WarpField::Tabulated(_) => "table",
        }
    }

    /// Largest radius at which the family is defined.
    pub fn rho_max(&self) -> f64 {
        match self {
            WarpField::Tabulated(t) => t.rho_max(),
            _ => f64::INFINITY,
        }
    }

    pub(crate) fn check(&self, rho: f64) -> Result<()> {
        if rho.is_nan() || rho < 0.0 || rho > self.rho_max() {
            return Err(Error::domain("rho", rho, format!("[0, {}]", self.rho_max())));
        }
        Ok(())
    }

    /// `f(ρ)`.
    pub fn eval_f(&self, rho: f64) -> Result<f64> {
        self.check(rho)?;
        Ok(self.f(rho))
    }

    /// `f'(ρ)`.
    pub fn eval_df(&self, rho: f64) -> Result<f64> {
        self.check(rho)?;
        Ok(self.df(rho))
    }

    /// `F(ρ)`, normalized by `F(0) = 0`.
    pub fn cumulative_f(&self, rho: f64) -> Result<f64> {
        self.check(rho)?;
        self.big_f(rho)
    }

    pub fn metric_coeffs(&self, rho: f64) -> Result<MetricCoeffs> {
        self.check(rho)?;
        let s = rho.sinh();
        let ef = self.exp_f(rho);
        Ok(MetricCoeffs {
            g_rho_rho: 1.0,
            g_theta_theta: s * s,
            g_tt: ef * ef,
        })
    }

    /// `√det g = e^{f(ρ)} sinh ρ`.
    pub fn volume_element(&self, rho: f64) -> Result<f64> {
        self.check(rho)?;
        Ok(self.vol(rho))
    }

    /// `sup_B e^{-2f} · sup_B e^{f}` over the geodesic disc of radius `rho0`.
    ///
    /// Exact for the constant and log-cosh families; the tabulated family
    /// uses 1024 samples followed by ternary refinement, so the result is
    /// approximate there.
    pub fn script_f_bound(&self, rho0: f64) -> Result<f64> {
        if !(rho0 > 0.0) {
            return Err(Error::domain("rho0", rho0, "(0, inf)"));
        }
        self.check(rho0)?;
        Ok(match self {
            WarpField::Constant(c) => (-c).exp(),
            // f increasing: e^{-2f} peaks at 0 (= 1/4), e^f at rho0.
            WarpField::LogCosh => 0.25 * (2.0 * rho0.cosh()),
            WarpField::Tabulated(t) => {
                let f_min = t.sampled_extremum(rho0, false);
                let f_max = t.sampled_extremum(rho0, true);
                (-2.0 * f_min).exp() * f_max.exp()
            }
        })
    }

    // Unchecked evaluators. Callers validate ρ first.

    pub(crate) fn f(&self, rho: f64) -> f64 {
        match self {
            WarpField::Constant(c) => *c,
            WarpField::LogCosh => (2.0 * rho.cosh()).ln(),
            WarpField::Tabulated(t) => t.value(rho),
        }
    }

    pub(crate) fn df(&self, rho: f64) -> f64 {
        match self {
            WarpField::Constant(_) => 0.0,
            WarpField::LogCosh => rho.tanh(),
            WarpField::Tabulated(t) => t.slope(rho),
        }
    }

    pub(crate) fn exp_f(&self, rho: f64) -> f64 {
        match self {
            WarpField::Constant(c) => c.exp(),
            WarpField::LogCosh => 2.0 * rho.cosh(),
            WarpField::Tabulated(t) => t.value(rho).exp(),
        }
    }

    pub(crate) fn vol(&self, rho: f64) -> f64 {
        self.exp_f(rho) * rho.sinh()
    }

    pub(crate) fn big_f(&self, rho: f64) -> Result<f64> {
        Ok(match self {
            // e^c (cosh ρ - 1), written without cancellation.
            WarpField::Constant(c) => {
                let s = (0.5 * rho).sinh();
                2.0 * c.exp() * s * s
            }
            // (cosh 2ρ - 1) / 2 = sinh²ρ
            WarpField::LogCosh => {
                let s = rho.sinh();
                s * s
            }
            WarpField::Tabulated(t) => t.cumulative(rho)?,
        })
    }
}
