//! Height estimate for the upper cap, its two corollaries, the per-level
//! inequalities behind it, and the isoperimetric evaluator.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surface::{coarea_residual, level_circle, RotationalSphere};

/// Curvature bound of the base: `K ≡ −κ` on the hyperbolic plane.
pub const KAPPA: f64 = 1.0;

/// Relative tolerance for the per-level inequality built on the
/// finite-difference `A'(t)`.
pub const LEVEL_REL_TOL: f64 = 1e-6;
/// Relative tolerance for the geodesic-circle equality `L² = 4π|Ω| + κ|Ω|²`.
pub const CIRCLE_REL_TOL: f64 = 1e-10;

/// Tolerance used for every inequality verdict.
pub fn abs_tol(rhs: f64) -> f64 {
    1e-9 * rhs.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelCheck {
    pub t: f64,
    /// `L(t)²`
    pub lhs13: f64,
    /// `−2H𝓕 A'(t) |Ω(t)|`
    pub rhs13: f64,
    /// `L(t)²` again, compared against the isoperimetric side.
    pub lhs14: f64,
    /// `4π|Ω(t)| + κ|Ω(t)|²`
    pub rhs14: f64,
    /// `|lhs14 − rhs14| / L²`
    pub circle_residual: f64,
    pub ok13: bool,
    pub ok14: bool,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub family: String,
    #[serde(rename = "H")]
    pub h_curv: f64,
    pub kappa: f64,
    pub script_f: f64,
    pub rho0: f64,
    pub h: f64,
    pub a_plus: f64,
    pub vol_u1: f64,
    pub rhs: f64,
    pub slack: f64,
    pub abs_tol: f64,
    pub holds: bool,
    /// Proof-chain steps that are strict for this sphere (empty when every
    /// step is an equality).
    pub strict_links: Vec<String>,
    pub per_level: Vec<LevelCheck>,
}

/// Both sides of a single inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

impl InequalityCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        InequalityCheck {
            lhs,
            rhs,
            slack,
            holds: slack >= -abs_tol(rhs),
        }
    }
}

fn script_f(sphere: &RotationalSphere) -> Result<f64> {
    sphere.warp().script_f_bound(sphere.rho0)
}

/// `h ≤ H𝓕A⁺/(2π) − κ Vol(U₁)/(4π)` with per-level diagnostics at
/// `t = h/10, 2h/10, …, 9h/10`.
pub fn theorem1_check(sphere: &RotationalSphere) -> Result<EstimateReport> {
    let mut report = theorem1_bound(sphere)?;
    for k in 1..10 {
        report
            .per_level
            .push(proof_chain_check(sphere, sphere.h * k as f64 / 10.0)?);
    }
    if report
        .per_level
        .iter()
        .any(|l| l.rhs13 - l.lhs13 > LEVEL_REL_TOL * l.rhs13.abs())
    {
        report
            .strict_links
            .push("level inequality L^2 <= -2HF A'(t)|Omega(t)| is strict at some sampled level".into());
    }
    Ok(report)
}

/// The bound alone, without the level sampling.
pub fn theorem1_bound(sphere: &RotationalSphere) -> Result<EstimateReport> {
    let f = script_f(sphere)?;
    let rhs = sphere.h_curv * f * sphere.a_plus / (2.0 * PI) - KAPPA * sphere.vol_u1 / (4.0 * PI);
    let slack = rhs - sphere.h;
    let tol = abs_tol(rhs);
    let mut strict_links = Vec::new();
    if !warp_constant_on_cap(sphere)? {
        strict_links.push("sup of e^{-2f} and e^f over the cap are not attained everywhere (f is not constant)".into());
    }
    Ok(EstimateReport {
        family: sphere.warp().name().to_string(),
        h_curv: sphere.h_curv,
        kappa: KAPPA,
        script_f: f,
        rho0: sphere.rho0,
        h: sphere.h,
        a_plus: sphere.a_plus,
        vol_u1: sphere.vol_u1,
        rhs,
        slack,
        abs_tol: tol,
        holds: slack >= -tol,
        strict_links,
        per_level: Vec::new(),
    })
}

fn warp_constant_on_cap(sphere: &RotationalSphere) -> Result<bool> {
    let w = sphere.warp();
    let f0 = w.eval_f(0.0)?;
    for k in 1..=64 {
        if w.eval_f(sphere.rho0 * k as f64 / 64.0)? != f0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Slab height `2h` against `H𝓕A/π − κ Vol(U)/(2π)` for the closed sphere,
/// evaluated on the cap quantities so that the bound is exactly twice the
/// theorem's.
pub fn corollary2_check(sphere: &RotationalSphere) -> Result<InequalityCheck> {
    let f = script_f(sphere)?;
    let rhs = sphere.h_curv * f * sphere.a_plus / PI - KAPPA * sphere.vol_u1 / (2.0 * PI);
    Ok(InequalityCheck::new(sphere.total_height(), rhs))
}

/// The same slab bound with the closed-sphere area and volume substituted
/// literally (`A = 2A⁺`, `Vol(U) = 2 Vol(U₁)`).
pub fn corollary2_closed_check(sphere: &RotationalSphere) -> Result<InequalityCheck> {
    let f = script_f(sphere)?;
    let rhs = sphere.h_curv * f * sphere.total_area() / PI - KAPPA * sphere.total_volume() / (2.0 * PI);
    Ok(InequalityCheck::new(sphere.total_height(), rhs))
}

/// `κ Vol(U₁)/(4π) ≤ H𝓕A⁺/(2π)`.
pub fn corollary3_check(sphere: &RotationalSphere) -> Result<InequalityCheck> {
    let f = script_f(sphere)?;
    Ok(InequalityCheck::new(
        KAPPA * sphere.vol_u1 / (4.0 * PI),
        sphere.h_curv * f * sphere.a_plus / (2.0 * PI),
    ))
}

/// The two per-level inequalities at height `t ∈ [0.05h, 0.95h]`, with
/// `A'(t)` from a central difference of step `10⁻⁴h`.
pub fn proof_chain_check(sphere: &RotationalSphere, t: f64) -> Result<LevelCheck> {
    let f = script_f(sphere)?;
    let coarea = coarea_residual(sphere, t, 1e-4 * sphere.h)?;
    let circle = level_circle(sphere, t)?;
    let l2 = circle.l_t * circle.l_t;
    let omega = circle.disc_area;
    let rhs13 = -2.0 * sphere.h_curv * f * coarea.area_derivative * omega;
    let rhs14 = 4.0 * PI * omega + KAPPA * omega * omega;
    let circle_residual = (l2 - rhs14).abs() / l2;
    let ok13 = l2 <= rhs13 + LEVEL_REL_TOL * rhs13.abs();
    let ok14 = l2 >= rhs14 - CIRCLE_REL_TOL * l2;
    Ok(LevelCheck {
        t,
        lhs13: l2,
        rhs13,
        lhs14: l2,
        rhs14,
        circle_residual,
        ok13,
        ok14,
        ok: ok13 && ok14,
    })
}

/// `L² − 4πA(1 − deficit/(2π) − K₀A/(4π))`, where `deficit = ∫_D (K − K₀)`.
pub fn isoperimetric_residual(l: f64, a: f64, k0: f64, curvature_deficit: f64) -> Result<f64> {
    if !(l >= 0.0) {
        return Err(Error::domain("L", l, "[0, inf)"));
    }
    if !(a >= 0.0) {
        return Err(Error::domain("A", a, "[0, inf)"));
    }
    Ok(l * l - 4.0 * PI * a * (1.0 - curvature_deficit / (2.0 * PI) - k0 * a / (4.0 * PI)))
}

impl EstimateReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }

    pub fn csv_header() -> &'static str {
        "H,rho0,height,area_plus,vol_U1,script_F,bound_rhs,slack,reason"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},",
            self.h_curv, self.rho0, self.h, self.a_plus, self.vol_u1, self.script_f, self.rhs, self.slack
        )
    }
}
