//! Admissibility analysis and integration of the rotational profile
//! `u_ρ = G / (e^f √(e^{2f} sinh²ρ − G²))`, `G = d − 2H F(ρ)`.
//!
//! The branch taken is `u_ρ = −|G| / (e^f √P)`, so `u` decreases from its
//! height `h = u(0)` at the axis to `u(ρ₀) = 0` at the turning radius. The
//! `1/√(ρ₀ − ρ)` blow-up of the slope is removed with `ρ = ρ₀ − σ²`.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::roots::{brent, first_sign_change};
use crate::warp::WarpField;

/// Numerical controls shared by the profile pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub quad_tol: f64,
    pub root_tol: f64,
    pub rho_max: f64,
    pub march_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            quad_tol: 1e-10,
            root_tol: 1e-12,
            rho_max: 20.0,
            march_step: 1e-2,
        }
    }
}

impl SolverOptions {
    pub(crate) fn quad(&self) -> QuadOptions {
        QuadOptions {
            rel_tol: self.quad_tol,
            abs_tol: 1e-15,
            max_intervals: 4000,
        }
    }
}

/// The radius where the profile turns vertical.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPoint {
    pub rho0: f64,
    pub bracket: (f64, f64),
    /// `P(ρ₀) = e^{2f} sinh²ρ₀ − G(ρ₀)²`.
    pub residual: f64,
}

/// Conditions of an admissible solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// (a) `G(0) = 0`.
    AxisFluxZero,
    /// (b) `G` nonzero and of one sign on `(0, ρ₀]`.
    FluxSingleSigned,
    /// (c) `|G| < e^f sinh ρ` on `(0, ρ₀)`.
    FluxBelowVolume,
    /// (d) `u_ρ(0⁺) = 0` with bounded curvature at the axis.
    FlatAtAxis,
    /// (e) `|u_ρ| → ∞` at `ρ₀`.
    VerticalAtEquator,
}

impl Condition {
    pub fn id(&self) -> &'static str {
        match self {
            Condition::AxisFluxZero => "a",
            Condition::FluxSingleSigned => "b",
            Condition::FluxBelowVolume => "c",
            Condition::FlatAtAxis => "d",
            Condition::VerticalAtEquator => "e",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub condition: Condition,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    #[serde(rename = "H")]
    pub h_curv: f64,
    pub d: f64,
    pub rho0: f64,
    pub violations: Vec<Violation>,
}

impl fmt::Display for AdmissibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.admissible {
            return write!(f, "admissible (rho0 = {})", self.rho0);
        }
        let mut s = String::new();
        for v in &self.violations {
            let _ = write!(s, " ({}) at rho = {};", v.condition.id(), v.rho);
        }
        write!(f, "violations:{}", s.trim_end_matches(';'))
    }
}

/// `G(ρ) = d − 2H F(ρ)`.
pub fn flux_g(w: &WarpField, h_curv: f64, d: f64, rho: f64) -> Result<f64> {
    Ok(d - 2.0 * h_curv * w.cumulative_f(rho)?)
}

/// The profile ODE for fixed `(f, H, d)` with its turning radius resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileOde {
    warp: WarpField,
    h_curv: f64,
    d: f64,
    turning: TurningPoint,
    // sign of G on (0, rho0)
    g_sign: f64,
    // dQ/drho at rho0 for Q = e^f sinh - |G|
    q_slope: f64,
    opts: SolverOptions,
}

impl ProfileOde {
    pub fn new(w: &WarpField, h_curv: f64, d: f64, opts: SolverOptions) -> Result<Self> {
        if !(h_curv > 0.0) || !h_curv.is_finite() {
            return Err(Error::domain("H", h_curv, "(0, inf)"));
        }
        if !d.is_finite() {
            return Err(Error::domain("d", d, "finite reals"));
        }
        let turning = turning_radius_with(w, h_curv, d, &opts)?;
        let rho0 = turning.rho0;
        let g_mid = d - 2.0 * h_curv * w.big_f(0.5 * rho0)?;
        let g_sign = if g_mid < 0.0 { -1.0 } else { 1.0 };
        let ef = w.exp_f(rho0);
        let q_slope = ef * (w.df(rho0) * rho0.sinh() + rho0.cosh()) + g_sign * 2.0 * h_curv * ef * rho0.sinh();
        Ok(ProfileOde {
            warp: w.clone(),
            h_curv,
            d,
            turning,
            g_sign,
            q_slope,
            opts,
        })
    }

    pub fn warp(&self) -> &WarpField {
        &self.warp
    }
    pub fn h_curv(&self) -> f64 {
        self.h_curv
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn rho0(&self) -> f64 {
        self.turning.rho0
    }
    pub fn turning(&self) -> TurningPoint {
        self.turning
    }
    pub fn options(&self) -> &SolverOptions {
        &self.opts
    }

    pub fn g(&self, rho: f64) -> Result<f64> {
        Ok(self.d - 2.0 * self.h_curv * self.warp.big_f(rho)?)
    }

    /// `(Q, e^f sinh ρ + |G|, |G|, e^f)` with `P = Q · (e^f sinh ρ + |G|)`.
    /// Within ~1e-8 of the turning radius `Q` is linearized, where the
    /// direct difference has lost most of its digits.
    /// `gap = ρ₀ − ρ` is passed separately so callers working in `σ` keep
    /// it exact.
    pub(crate) fn radicand(&self, rho: f64, gap: f64) -> Result<(f64, f64, f64, f64)> {
        let ef = self.warp.exp_f(rho);
        let vol = ef * rho.sinh();
        let g = self.g(rho)?.abs();
        let scale = self.rho0().max(1.0);
        let mut q = vol - g;
        if gap < 1e-8 * scale || (q <= 0.0 && gap < 1e-6 * scale) {
            q = -self.q_slope * gap;
        }
        Ok((q, vol + g, g, ef))
    }

    /// `|u_ρ|` on `(0, ρ₀)`, no domain check.
    pub(crate) fn slope_abs(&self, rho: f64, gap: f64) -> Result<f64> {
        if rho <= 0.0 {
            return Ok(0.0);
        }
        let (q, sum, g, ef) = self.radicand(rho, gap)?;
        if !(q > 0.0) {
            return Err(Error::Numeric(format!(
                "radicand P({rho}) = {} is not positive",
                q * sum
            )));
        }
        Ok(g / (ef * (q * sum).sqrt()))
    }

    /// `u_ρ(ρ)` on the open interval `(0, ρ₀)`; negative on the chosen branch.
    pub fn slope(&self, rho: f64) -> Result<f64> {
        if !(rho > 0.0 && rho < self.rho0()) {
            return Err(Error::domain("rho", rho, format!("(0, {})", self.rho0())));
        }
        Ok(-self.slope_abs(rho, self.rho0() - rho)?)
    }

    /// `∫ |u_ρ(s)| ds` over `s ∈ [ρ₀ − σ_hi², ρ₀ − σ_lo²]`, integrated in `σ`.
    pub(crate) fn drop_between(&self, sigma_lo: f64, sigma_hi: f64) -> Result<f64> {
        self.sigma_integral(sigma_lo, sigma_hi, |s, gap| self.slope_abs(s, gap))
    }

    /// `∫ g(s) ds` over `s ∈ [ρ₀ − σ_hi², ρ₀ − σ_lo²]` via `s = ρ₀ − σ²`.
    /// `g` receives `(s, σ²)`.
    pub(crate) fn sigma_integral<G>(&self, sigma_lo: f64, sigma_hi: f64, g: G) -> Result<f64>
    where
        G: Fn(f64, f64) -> Result<f64>,
    {
        let rho0 = self.rho0();
        let failure = std::cell::Cell::new(None);
        let integrand = |sigma: f64| {
            let gap = sigma * sigma;
            let s = rho0 - gap;
            if s <= 0.0 {
                return 0.0;
            }
            match g(s, gap) {
                Ok(v) => 2.0 * sigma * v,
                Err(e) => {
                    failure.set(Some(e));
                    f64::NAN
                }
            }
        };
        let q = integrate(integrand, sigma_lo, sigma_hi, &self.opts.quad());
        if let Some(e) = failure.take() {
            return Err(e);
        }
        Ok(q?.value)
    }

    pub(crate) fn sigma_of(&self, rho: f64) -> f64 {
        (self.rho0() - rho).max(0.0).sqrt()
    }
}

pub fn turning_radius(w: &WarpField, h_curv: f64, d: f64) -> Result<TurningPoint> {
    turning_radius_with(w, h_curv, d, &SolverOptions::default())
}

/// Smallest `ρ₀ > 0` with `e^{2f} sinh²ρ₀ = G(ρ₀)²`.
///
/// Marches the sign of `Q = e^f sinh ρ − |G|` (which carries the sign of
/// `P`) and refines the first resolved sign change with Brent's method.
/// Points where `|Q|` is within rounding of `e^f sinh ρ + |G|` are skipped,
/// so an asymptotic approach `Q → 0⁺` is not mistaken for a root.
pub fn turning_radius_with(w: &WarpField, h_curv: f64, d: f64, opts: &SolverOptions) -> Result<TurningPoint> {
    if !(h_curv > 0.0) {
        return Err(Error::domain("H", h_curv, "(0, inf)"));
    }
    let stop = opts.rho_max.min(w.rho_max());
    let q = |rho: f64| -> Result<(f64, f64)> {
        let vol = w.vol(rho);
        let g = (d - 2.0 * h_curv * w.big_f(rho)?).abs();
        Ok((vol - g, vol + g))
    };
    let failure = std::cell::Cell::new(None);
    let resolved = |rho: f64| match q(rho) {
        Ok((diff, sum)) if diff.abs() > 64.0 * f64::EPSILON * sum => Some(diff),
        Ok(_) => None,
        Err(e) => {
            failure.set(Some(e));
            None
        }
    };
    let bracket = first_sign_change(resolved, opts.march_step, stop, opts.march_step);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let Some((lo, hi)) = bracket else {
        return Err(Error::NoSphere { rho_max: stop });
    };
    let rho0 = brent(|r| q(r).map(|v| v.0).unwrap_or(f64::NAN), lo, hi, 1e-16, 200)?;
    let (diff, sum) = q(rho0)?;
    let residual = diff * sum;
    let scale = sum * sum;
    if residual.abs() > opts.root_tol * scale.max(1.0) {
        return Err(Error::Root(format!(
            "turning radius residual {residual:e} above tolerance at rho = {rho0}"
        )));
    }
    Ok(TurningPoint {
        rho0,
        bracket: (lo, hi),
        residual,
    })
}

pub fn check_admissible(w: &WarpField, h_curv: f64, d: f64) -> Result<AdmissibilityReport> {
    check_admissible_with(w, h_curv, d, &SolverOptions::default())
}

pub fn check_admissible_with(w: &WarpField, h_curv: f64, d: f64, opts: &SolverOptions) -> Result<AdmissibilityReport> {
    let ode = ProfileOde::new(w, h_curv, d, *opts)?;
    Ok(admissibility(&ode))
}

fn admissibility(ode: &ProfileOde) -> AdmissibilityReport {
    const N: usize = 2000;
    let rho0 = ode.rho0();
    let w = ode.warp();
    let mut violations = Vec::new();
    let mut flag = |condition, rho| {
        if !violations.iter().any(|v: &Violation| v.condition == condition) {
            violations.push(Violation { condition, rho });
        }
    };

    if ode.d().abs() > 1e-12 {
        flag(Condition::AxisFluxZero, 0.0);
    }

    let first_sign = ode.g(rho0 / N as f64).map(f64::signum).unwrap_or(0.0);
    for k in 1..=N {
        let rho = rho0 * k as f64 / N as f64;
        let g = ode.g(rho).unwrap_or(f64::NAN);
        if !(g != 0.0 && g.signum() == first_sign) {
            flag(Condition::FluxSingleSigned, rho);
        }
        if k < N && !(g.abs() < w.vol(rho)) {
            flag(Condition::FluxBelowVolume, rho);
        }
    }

    let eps = 1e-6 * rho0;
    match (ode.slope(eps), ode.slope(2.0 * eps)) {
        (Ok(s1), Ok(s2)) => {
            let (k1, k2) = (s1 / eps, s2 / (2.0 * eps));
            if s1.abs() > 1e-4 || (k1 - k2).abs() > 1e-3 * k1.abs().max(1.0) {
                flag(Condition::FlatAtAxis, eps);
            }
        }
        _ => flag(Condition::FlatAtAxis, eps),
    }

    let (near, nearer) = (rho0 * (1.0 - 1e-6), rho0 * (1.0 - 1e-8));
    match (ode.slope(near), ode.slope(nearer)) {
        (Ok(s1), Ok(s2)) if s2.abs() > 5.0 * s1.abs() && s1.abs() > 0.0 => {}
        _ => flag(Condition::VerticalAtEquator, rho0),
    }

    AdmissibilityReport {
        admissible: violations.is_empty(),
        h_curv: ode.h_curv(),
        d: ode.d(),
        rho0,
        violations,
    }
}

/// `u_ρ(ρ)` for `ρ ∈ (0, ρ₀)`.
pub fn profile_derivative(w: &WarpField, h_curv: f64, d: f64, rho: f64) -> Result<f64> {
    ProfileOde::new(w, h_curv, d, SolverOptions::default())?.slope(rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub rho: f64,
    pub u: f64,
    pub du_drho: f64,
}

/// Sampled generating curve of the upper cap on `[0, ρ₀]`.
///
/// The curve keeps its ODE so that `u` can be evaluated exactly between
/// samples; `scale` multiplies every reported `u` and `u_ρ` (1 unless the
/// curve was deliberately perturbed).
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub samples: Vec<ProfileSample>,
    pub rho0: f64,
    pub h: f64,
    ode: ProfileOde,
    scale: f64,
}

pub fn integrate_profile(w: &WarpField, h_curv: f64, d: f64, n: usize) -> Result<ProfileCurve> {
    integrate_profile_with(w, h_curv, d, n, &SolverOptions::default())
}

pub fn integrate_profile_with(
    w: &WarpField,
    h_curv: f64,
    d: f64,
    n: usize,
    opts: &SolverOptions,
) -> Result<ProfileCurve> {
    if n < 2 {
        return Err(Error::Input(format!("profile needs at least 2 samples, got {n}")));
    }
    let ode = ProfileOde::new(w, h_curv, d, *opts)?;
    let report = admissibility(&ode);
    if !report.admissible {
        return Err(Error::NotAdmissible(report.to_string()));
    }
    ProfileCurve::from_ode(ode, n)
}

impl ProfileCurve {
    fn from_ode(ode: ProfileOde, n: usize) -> Result<Self> {
        let rho0 = ode.rho0();
        let top = rho0.sqrt();
        // uniform in sigma = sqrt(rho0 - rho): clustered near the equator
        let sigma: Vec<f64> = (0..n).map(|i| top * (1.0 - i as f64 / (n - 1) as f64)).collect();
        let mut u = vec![0.0; n];
        for i in (0..n - 1).rev() {
            u[i] = u[i + 1] + ode.drop_between(sigma[i + 1], sigma[i])?;
        }
        let mut samples = Vec::with_capacity(n);
        for i in 0..n {
            let rho = match i {
                0 => 0.0,
                _ if i == n - 1 => rho0,
                _ => rho0 - sigma[i] * sigma[i],
            };
            let du_drho = match i {
                0 => 0.0,
                _ if i == n - 1 => f64::NEG_INFINITY,
                _ => ode.slope(rho)?,
            };
            samples.push(ProfileSample { rho, u: u[i], du_drho });
        }
        Ok(ProfileCurve {
            h: u[0],
            rho0,
            samples,
            ode,
            scale: 1.0,
        })
    }

    pub fn ode(&self) -> &ProfileOde {
        &self.ode
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Copy with `u` (and `u_ρ`) multiplied by `factor`.
    pub fn perturbed(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.scale *= factor;
        out.h *= factor;
        for s in &mut out.samples {
            s.u *= factor;
            s.du_drho *= factor;
        }
        out
    }

    /// `u(ρ)` for `ρ ∈ [0, ρ₀]`, integrating from the nearest sample outward.
    pub fn u_at(&self, rho: f64) -> Result<f64> {
        if !(0.0..=self.rho0).contains(&rho) {
            return Err(Error::domain("rho", rho, format!("[0, {}]", self.rho0)));
        }
        let i = self.samples.partition_point(|s| s.rho <= rho);
        if i == 0 || i >= self.samples.len() {
            // only rho == rho0 lands past the last sample
            return Ok(self.samples[self.samples.len() - 1].u);
        }
        let next = &self.samples[i];
        let extra = self
            .ode
            .drop_between(self.ode.sigma_of(next.rho), self.ode.sigma_of(rho))?;
        Ok(next.u + self.scale * extra)
    }

    /// `u` at strictly increasing radii in `[0, ρ₀]`, accumulated from the
    /// outermost node inward one short interval at a time. The errors are
    /// far smoother in `ρ` than those of independent [`Self::u_at`] calls,
    /// which matters when the result is differentiated numerically.
    pub fn resample(&self, rho: &[f64]) -> Result<Vec<f64>> {
        if rho.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Input("resample radii must be strictly increasing".into()));
        }
        let Some(&last) = rho.last() else {
            return Ok(Vec::new());
        };
        let mut u = vec![0.0; rho.len()];
        u[rho.len() - 1] = self.u_at(last)?;
        for i in (0..rho.len() - 1).rev() {
            if rho[i] < 0.0 {
                return Err(Error::domain("rho", rho[i], format!("[0, {}]", self.rho0)));
            }
            let extra = self
                .ode
                .drop_between(self.ode.sigma_of(rho[i + 1]), self.ode.sigma_of(rho[i]))?;
            u[i] = u[i + 1] + self.scale * extra;
        }
        Ok(u)
    }

    /// `u_ρ(ρ)` on `(0, ρ₀)`.
    pub fn slope_at(&self, rho: f64) -> Result<f64> {
        Ok(self.scale * self.ode.slope(rho)?)
    }

    /// CSV with header `rho,u,du_drho`, shortest round-trip formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rho,u,du_drho\n");
        for s in &self.samples {
            let _ = writeln!(out, "{},{},{}", s.rho, s.u, s.du_drho);
        }
        out
    }
}
