use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{ProfileCurve, ProfileOde};
use crate::roots::brent;
use crate::warp::WarpField;

/// The bi-graph sphere obtained by gluing the graphs of `u` and `−u` along
/// the equator `ρ = ρ₀` in the slice `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationalSphere {
    pub profile: ProfileCurve,
    pub h_curv: f64,
    pub d: f64,
    pub rho0: f64,
    pub h: f64,
    /// Area of the upper cap.
    pub a_plus: f64,
    /// Volume enclosed between the upper cap and the slice.
    pub vol_u1: f64,
}

impl RotationalSphere {
    pub fn warp(&self) -> &WarpField {
        self.profile.ode().warp()
    }

    pub fn total_height(&self) -> f64 {
        2.0 * self.h
    }

    pub fn total_area(&self) -> f64 {
        2.0 * self.a_plus
    }

    pub fn total_volume(&self) -> f64 {
        2.0 * self.vol_u1
    }

    fn ode(&self) -> &ProfileOde {
        self.profile.ode()
    }

    /// Area of the part of the upper cap over `ρ ∈ [ρ₀ − σ_hi², ρ₀ − σ_lo²]`.
    fn area_between(&self, sigma_lo: f64, sigma_hi: f64) -> Result<f64> {
        let ode = self.ode();
        let k = self.profile.scale();
        let part = ode.sigma_integral(sigma_lo, sigma_hi, |s, gap| area_density(ode, k, s, gap))?;
        Ok(TAU * part)
    }
}

/// `sinh ρ √(1 + e^{2f} (k u_ρ)²)` written as `sinh ρ √(P + k² G²) / √P`.
fn area_density(ode: &ProfileOde, k: f64, s: f64, gap: f64) -> Result<f64> {
    if s <= 0.0 {
        return Ok(0.0);
    }
    let (q, sum, g, _) = ode.radicand(s, gap)?;
    let p = q * sum;
    if !(p > 0.0) {
        return Err(Error::Numeric(format!("radicand P({s}) = {p} is not positive")));
    }
    Ok(s.sinh() * (p + k * k * g * g).sqrt() / p.sqrt())
}

pub fn glue_bigraph(profile: &ProfileCurve) -> Result<RotationalSphere> {
    let a_plus = cap_area(profile)?;
    let vol_u1 = cap_volume(profile)?;
    let ode = profile.ode();
    Ok(RotationalSphere {
        profile: profile.clone(),
        h_curv: ode.h_curv(),
        d: ode.d(),
        rho0: profile.rho0,
        h: profile.h,
        a_plus,
        vol_u1,
    })
}

/// `A⁺ = 2π ∫₀^{ρ₀} sinh ρ √(1 + e^{2f} u_ρ²) dρ`; for the solved profile
/// the density reduces to `e^f sinh²ρ / √(e^{2f} sinh²ρ − G²)`.
pub fn cap_area(profile: &ProfileCurve) -> Result<f64> {
    let ode = profile.ode();
    let k = profile.scale();
    let part = ode.sigma_integral(0.0, profile.rho0.sqrt(), |s, gap| area_density(ode, k, s, gap))?;
    Ok(TAU * part)
}

/// `Vol(U₁) = 2π ∫₀^{ρ₀} u e^f sinh ρ dρ`, integrated by parts to
/// `2π ∫₀^{ρ₀} F(ρ) |u_ρ| dρ` (boundary terms vanish: `F(0) = u(ρ₀) = 0`).
pub fn cap_volume(profile: &ProfileCurve) -> Result<f64> {
    let ode = profile.ode();
    let w = ode.warp();
    let part = ode.sigma_integral(0.0, profile.rho0.sqrt(), |s, gap| {
        Ok(w.big_f(s)? * ode.slope_abs(s, gap)?)
    })?;
    Ok(TAU * profile.scale() * part)
}

/// The circle `Γ_t` where the upper cap crosses height `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelCircle {
    pub t: f64,
    pub rho_t: f64,
    /// Circumference `2π sinh ρ_t` in the slice.
    pub l_t: f64,
    /// `A(t)`: area of the cap above height `t`.
    pub area_cap_above: f64,
    /// `|Ω(t)| = 2π (cosh ρ_t − 1)`.
    pub disc_area: f64,
    #[serde(skip)]
    sigma_t: f64,
}

impl LevelCircle {
    pub fn csv_header() -> &'static str {
        "t,rho_t,L_t,A_t,Omega_t"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.t, self.rho_t, self.l_t, self.area_cap_above, self.disc_area
        )
    }
}

/// `σ_t = √(ρ₀ − ρ_t)` with `u(ρ_t) = t`.
fn level_sigma(sphere: &RotationalSphere, t: f64) -> Result<f64> {
    if !(t >= 0.0 && t < sphere.h) {
        return Err(Error::domain("t", t, format!("[0, {})", sphere.h)));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let p = &sphere.profile;
    let ode = p.ode();
    let k = p.scale();
    // u decreases along the samples; first sample strictly below t
    let i = p.samples.partition_point(|s| s.u >= t);
    let (upper, lower) = (&p.samples[i - 1], &p.samples[i]);
    let (s_hi, s_lo) = (ode.sigma_of(upper.rho), ode.sigma_of(lower.rho));
    let u_of = |sigma: f64| -> f64 {
        match ode.drop_between(s_lo, sigma) {
            Ok(v) => lower.u + k * v - t,
            Err(_) => f64::NAN,
        }
    };
    brent(u_of, s_lo, s_hi, 1e-17, 200)
}

pub fn level_circle(sphere: &RotationalSphere, t: f64) -> Result<LevelCircle> {
    let sigma_t = level_sigma(sphere, t)?;
    let rho_t = if sigma_t == 0.0 {
        sphere.rho0
    } else {
        sphere.rho0 - sigma_t * sigma_t
    };
    let half = (0.5 * rho_t).sinh();
    Ok(LevelCircle {
        t,
        rho_t,
        l_t: TAU * rho_t.sinh(),
        area_cap_above: sphere.area_between(sigma_t, sphere.rho0.sqrt())?,
        disc_area: 2.0 * TAU * half * half,
        sigma_t,
    })
}

/// `‖T‖` and `ν = g(ξ, N)` for `ξ = T + νN` at radius `ρ ∈ (0, ρ₀)`.
pub fn tangential_decomposition(sphere: &RotationalSphere, rho: f64) -> Result<(f64, f64)> {
    let slope = sphere.profile.slope_at(rho)?;
    let ef = sphere.warp().exp_f(rho);
    let a = ef * slope;
    let root = (1.0 + a * a).sqrt();
    Ok((ef * a.abs() / root, -ef / root))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxResidual {
    pub rho: f64,
    /// `|e^{2f} u_ρ sinh ρ / √(1 + (e^f u_ρ)²) − (d − 2H F)|`.
    pub corrected: f64,
    /// Same with `d − 2H e^f F` on the right.
    pub as_printed: f64,
}

pub fn flux_first_integral_residual(sphere: &RotationalSphere, rho: f64) -> Result<FluxResidual> {
    let slope = sphere.profile.slope_at(rho)?;
    let w = sphere.warp();
    let ef = w.exp_f(rho);
    let a = ef * slope;
    let lhs = ef * rho.sinh() * a / (1.0 + a * a).sqrt();
    let big_f = w.big_f(rho)?;
    let two_h = 2.0 * sphere.h_curv;
    Ok(FluxResidual {
        rho,
        corrected: (lhs - (sphere.d - two_h * big_f)).abs(),
        as_printed: (lhs - (sphere.d - two_h * ef * big_f)).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoareaResidual {
    pub t: f64,
    pub dt: f64,
    /// Central difference of `A(t)`.
    pub area_derivative: f64,
    /// `−L_t / ‖grad h‖` on `Γ_t`.
    pub boundary_integral: f64,
    pub residual: f64,
}

/// Compares `A'(t)` (central difference with step `dt`) against
/// `−∫_{Γ_t} ‖grad h‖⁻¹`, where on a radial graph
/// `‖grad h‖ = |u_ρ| / √(1 + e^{2f} u_ρ²)` is constant along `Γ_t`.
pub fn coarea_residual(sphere: &RotationalSphere, t: f64, dt: f64) -> Result<CoareaResidual> {
    let h = sphere.h;
    if !(t >= 0.05 * h && t <= 0.95 * h) {
        return Err(Error::domain("t", t, format!("[{}, {}]", 0.05 * h, 0.95 * h)));
    }
    if !(dt > 0.0 && dt < 0.05 * h) {
        return Err(Error::domain("dt", dt, format!("(0, {})", 0.05 * h)));
    }
    let s_above = level_sigma(sphere, t + dt)?;
    let s_below = level_sigma(sphere, t - dt)?;
    // A(t + dt) − A(t − dt) is minus the area of the band between the levels.
    let band = sphere.area_between(s_below, s_above)?;
    let area_derivative = -band / (2.0 * dt);

    let circle = level_circle(sphere, t)?;
    let rho = circle.rho_t;
    let slope = sphere.profile.slope_at(rho)?;
    let ef = sphere.warp().exp_f(rho);
    let grad_norm = slope.abs() / (1.0 + ef * ef * slope * slope).sqrt();
    let boundary_integral = -circle.l_t / grad_norm;
    Ok(CoareaResidual {
        t,
        dt,
        area_derivative,
        boundary_integral,
        residual: (area_derivative - boundary_integral).abs(),
    })
}

#[allow(dead_code)]
fn geodesic_disc_area(rho: f64) -> f64 {
    2.0 * PI * (rho.cosh() - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::integrate_profile;

    fn sphere(w: WarpField, h: f64) -> RotationalSphere {
        glue_bigraph(&integrate_profile(&w, h, 0.0, 513).unwrap()).unwrap()
    }

    #[test]
    fn mirror_symmetry_totals() {
        let s = sphere(WarpField::LogCosh, 2.0);
        assert_eq!(s.total_height(), 2.0 * s.h);
        assert_eq!(s.total_area(), 2.0 * s.a_plus);
        assert_eq!(s.total_volume(), 2.0 * s.vol_u1);
        assert!((s.rho0 - 0.5 * 3f64.ln()).abs() < 1e-12);
        assert!(s.a_plus > 0.0 && s.vol_u1 > 0.0);
    }

    #[test]
    fn small_caps_vanish() {
        let a: Vec<f64> = [5.0, 20.0, 80.0]
            .iter()
            .map(|&h| sphere(WarpField::Constant(0.0), h).a_plus)
            .collect();
        assert!(a[0] > a[1] && a[1] > a[2] && a[2] < 1e-2);
    }

    #[test]
    fn constant_shift_keeps_area_and_volume() {
        let base = sphere(WarpField::Constant(0.0), 1.0);
        for c in [-1.0, 1.0] {
            let s = sphere(WarpField::Constant(c), 1.0);
            assert!((s.a_plus - base.a_plus).abs() < 1e-9 * base.a_plus);
            assert!((s.vol_u1 - base.vol_u1).abs() < 1e-9 * base.vol_u1);
        }
    }

    #[test]
    fn degenerate_profile_has_no_volume() {
        let p = integrate_profile(&WarpField::LogCosh, 2.0, 0.0, 33)
            .unwrap()
            .perturbed(0.0);
        assert_eq!(cap_volume(&p).unwrap(), 0.0);
    }

    #[test]
    fn level_circle_endpoints() {
        let s = sphere(WarpField::LogCosh, 2.0);
        let eq = level_circle(&s, 0.0).unwrap();
        assert_eq!(eq.rho_t, s.rho0);
        assert!((eq.l_t - TAU * s.rho0.sinh()).abs() < 1e-15);
        assert!((eq.area_cap_above - s.a_plus).abs() < 1e-12);
        let top = level_circle(&s, s.h * (1.0 - 1e-12)).unwrap();
        assert!(top.rho_t < 1e-4 && top.l_t < 1e-3);
        assert!(level_circle(&s, s.h).is_err());
        assert!(level_circle(&s, -0.1).is_err());
    }

    #[test]
    fn level_quantities_decrease() {
        let s = sphere(WarpField::LogCosh, 2.0);
        let levels: Vec<LevelCircle> = (0..20)
            .map(|k| level_circle(&s, s.h * k as f64 / 20.0).unwrap())
            .collect();
        for w in levels.windows(2) {
            assert!(w[1].area_cap_above < w[0].area_cap_above);
            assert!(w[1].disc_area < w[0].disc_area);
            assert!(w[1].rho_t < w[0].rho_t);
        }
        for l in &levels {
            assert!((l.disc_area - geodesic_disc_area(l.rho_t)).abs() < 1e-13 * l.disc_area.max(1.0));
        }
    }

    #[test]
    fn tangential_limits_and_identity() {
        let s = sphere(WarpField::LogCosh, 2.0);
        let w = WarpField::LogCosh;
        let (t, nu) = tangential_decomposition(&s, 1e-9).unwrap();
        assert!(t < 1e-7);
        assert!((nu.abs() - w.exp_f(0.0)).abs() < 1e-9);
        let (t, nu) = tangential_decomposition(&s, s.rho0 * (1.0 - 1e-12)).unwrap();
        assert!(nu.abs() < 1e-4);
        assert!((t - w.exp_f(s.rho0)).abs() < 1e-8);
        for k in 1..50 {
            let rho = s.rho0 * k as f64 / 50.0;
            let (t, nu) = tangential_decomposition(&s, rho).unwrap();
            let e2f = w.exp_f(rho).powi(2);
            assert!((t * t + nu * nu - e2f).abs() <= 1e-12 * e2f);
            assert!(nu < 0.0);
        }
        assert!(tangential_decomposition(&s, s.rho0).is_err());
    }

    #[test]
    fn flux_is_conserved_but_printed_variant_is_not() {
        for (w, h) in [(WarpField::LogCosh, 2.0), (WarpField::Constant(0.0), 1.0)] {
            let s = sphere(w.clone(), h);
            let mut printed = 0.0f64;
            for sample in &s.profile.samples[1..s.profile.samples.len() - 1] {
                let r = flux_first_integral_residual(&s, sample.rho).unwrap();
                assert!(r.corrected <= 1e-9, "{r:?}");
                printed = printed.max(r.as_printed);
            }
            if matches!(w, WarpField::LogCosh) {
                assert!(printed > 1e-3);
            } else {
                assert!(printed <= 1e-9);
            }
        }
    }

    #[test]
    fn coarea_matches_and_converges() {
        let s = sphere(WarpField::LogCosh, 2.0);
        let r = coarea_residual(&s, 0.5 * s.h, 1e-4 * s.h).unwrap();
        assert!(r.residual <= 1e-6, "{r:?}");
        let s0 = sphere(WarpField::Constant(0.0), 1.0);
        let r = coarea_residual(&s0, s0.h / 3.0, 1e-4 * s0.h).unwrap();
        assert!(r.residual <= 1e-6, "{r:?}");

        let res: Vec<f64> = [0.02, 0.01, 0.005]
            .iter()
            .map(|&f| coarea_residual(&s, 0.5 * s.h, f * s.h).unwrap().residual)
            .collect();
        for w in res.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 1.8 && order < 2.2, "{res:?}");
        }
        assert!(coarea_residual(&s, 0.01 * s.h, 1e-4).is_err());
    }
}
