use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::{debug, info};
use rayon::prelude::*;
use serde::Serialize;

use super::{
    exit_code, Cli, Command, CommonArgs, CurvatureArgs, Family, RunConfig, SweepArgs, EXIT_NO_SPHERE, EXIT_OK,
    EXIT_VERIFY_FAILED,
};
use crate::error::{Error, Result};
use crate::estimates::{corollary2_check, corollary3_check, theorem1_bound, theorem1_check, EstimateReport};
use crate::profile::{check_admissible_with, integrate_profile_with, AdmissibilityReport, ProfileCurve};
use crate::surface::{
    coarea_residual, export_mesh, flux_first_integral_residual, glue_bigraph, mean_curvature_graph,
    profile_curvature_consistency, GridField, RotationalSphere,
};
use crate::warp::WarpField;

/// Runs one parsed invocation and returns the process exit code. Errors are
/// reported on stderr.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Solve(args) => with_config(&args, cmd_solve),
        Command::Verify(args) => with_config(&args, cmd_verify),
        Command::Mesh(args) => with_config(&args, cmd_mesh),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Curvature(args) => cmd_curvature(&args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn with_config(args: &CommonArgs, cmd: fn(&RunConfig) -> Result<i32>) -> Result<i32> {
    let cfg = RunConfig::resolve(args)?;
    debug!("resolved config: {cfg:?}");
    cmd(&cfg)
}

fn write_output(cfg: &RunConfig, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.out)
        .map_err(|e| Error::Input(format!("cannot create output directory {}: {e}", cfg.out.display())))?;
    let path = cfg.out.join(name);
    fs::write(&path, contents).map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))?;
    info!("wrote {}", path.display());
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports are always serializable");
    s.push('\n');
    s
}

/// `F(0)` for the antiderivative of `e^f sinh ρ` without normalization:
/// `e^c cosh ρ` for constant warps, `cosh(2ρ)/2` for `ln(2 cosh ρ)`.
fn unnormalized_f_at_zero(w: &WarpField) -> Option<f64> {
    match w {
        WarpField::Constant(c) => Some(c.exp()),
        WarpField::LogCosh => Some(0.5),
        WarpField::Tabulated(_) => None,
    }
}

/// Profile and sphere for the configured run, with `--inject-error` applied.
fn build(cfg: &RunConfig) -> Result<(WarpField, AdmissibilityReport, ProfileCurve, RotationalSphere)> {
    let w = cfg.warp()?;
    let h = cfg.curvature()?;
    let opts = cfg.solver_options();
    let adm = check_admissible_with(&w, h, cfg.d, &opts)?;
    if !adm.admissible {
        return Err(Error::NotAdmissible(adm.to_string()));
    }
    let mut profile = integrate_profile_with(&w, h, cfg.d, cfg.grid.n_rho, &opts)?;
    if let Some(k) = cfg.inject_error {
        info!("scaling the profile by {k}");
        profile = profile.perturbed(k);
    }
    let sphere = glue_bigraph(&profile)?;
    Ok((w, adm, profile, sphere))
}

#[derive(Debug, Serialize)]
struct SolveReport {
    family: String,
    c: Option<f64>,
    #[serde(rename = "H")]
    h_curv: f64,
    d: f64,
    d_unnormalized: Option<f64>,
    d_mapping: String,
    admissibility: AdmissibilityReport,
    rho0: f64,
    turning_residual: f64,
    height: f64,
    total_height: f64,
    area_plus: f64,
    vol_u1: f64,
    samples: usize,
    inject_error: Option<f64>,
}

fn cmd_solve(cfg: &RunConfig) -> Result<i32> {
    let w = cfg.warp()?;
    let h = cfg.curvature()?;
    let adm = check_admissible_with(&w, h, cfg.d, &cfg.solver_options())?;
    let d_unnormalized = unnormalized_f_at_zero(&w).map(|f0| cfg.d + 2.0 * h * f0);
    let d_mapping = match d_unnormalized {
        Some(_) => {
            "d_unnormalized = d + 2 H F_raw(0), F_raw the antiderivative of e^f sinh(rho) without normalization".into()
        }
        None => "tabulated warp: F is only defined up to a constant, so d is reported as is".to_string(),
    };
    if !adm.admissible {
        eprintln!("not admissible: {adm}");
        let report = serde_json::json!({
            "family": w.name(),
            "H": h,
            "d": cfg.d,
            "d_unnormalized": d_unnormalized,
            "admissibility": adm,
        });
        write_output(cfg, "report.json", &to_json(&report))?;
        return Ok(EXIT_NO_SPHERE);
    }
    let (_, adm, profile, sphere) = build(cfg)?;
    write_output(cfg, "profile.csv", &profile.to_csv())?;
    let report = SolveReport {
        family: w.name().to_string(),
        c: matches!(cfg.family, Family::Constant).then_some(cfg.c),
        h_curv: h,
        d: cfg.d,
        d_unnormalized,
        d_mapping,
        rho0: sphere.rho0,
        turning_residual: profile.ode().turning().residual,
        height: sphere.h,
        total_height: sphere.total_height(),
        area_plus: sphere.a_plus,
        vol_u1: sphere.vol_u1,
        samples: profile.samples.len(),
        inject_error: cfg.inject_error,
        admissibility: adm,
    };
    write_output(cfg, "report.json", &to_json(&report))?;
    println!(
        "rho0 = {}  h = {}  A+ = {}  Vol(U1) = {}",
        report.rho0, report.height, report.area_plus, report.vol_u1
    );
    Ok(EXIT_OK)
}

/// One line of the verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    /// Informational checks never affect the exit code.
    pub primary: bool,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckOutcome {
    fn at_most(name: &str, value: f64, tolerance: f64, detail: String) -> Self {
        CheckOutcome {
            name: name.into(),
            primary: true,
            passed: value <= tolerance,
            value,
            tolerance,
            detail,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub family: String,
    #[serde(rename = "H")]
    pub h_curv: f64,
    pub rho0: f64,
    pub height: f64,
    pub inject_error: Option<f64>,
    pub checks: Vec<CheckOutcome>,
    pub estimate: EstimateReport,
    pub all_passed: bool,
}

fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn cmd_verify(cfg: &RunConfig) -> Result<i32> {
    let (w, _, profile, sphere) = build(cfg)?;
    let mut checks = Vec::new();

    let mc: Vec<f64> = [4e-3, 2e-3, 1e-3]
        .iter()
        .map(|&dx| profile_curvature_consistency(&profile, dx, 8).map(|r| r.max_error))
        .collect::<Result<_>>()?;
    let mc_orders = orders(&mc);
    let mut mc_check = CheckOutcome::at_most(
        "mc-consistency",
        mc[2],
        1e-4,
        format!("max |H_grid - H| at spacings 4e-3, 2e-3, 1e-3: {mc:?}; observed orders {mc_orders:?}"),
    );
    mc_check.passed &= mc_orders.iter().all(|&p| p >= 1.9);
    checks.push(mc_check);

    let interior = &profile.samples[1..profile.samples.len() - 1];
    let (mut corrected, mut printed) = (0.0f64, 0.0f64);
    for s in interior {
        let r = flux_first_integral_residual(&sphere, s.rho)?;
        corrected = corrected.max(r.corrected);
        printed = printed.max(r.as_printed);
    }
    checks.push(CheckOutcome::at_most(
        "flux-corrected",
        corrected,
        1e-8,
        format!("max over {} interior samples of |flux - (d - 2HF)|", interior.len()),
    ));
    checks.push(CheckOutcome {
        name: "flux-as-printed".into(),
        primary: false,
        passed: printed > 1e-3,
        value: printed,
        tolerance: 1e-3,
        detail: "same residual with d - 2H e^f F; expected NOT conserved for non-constant warps".into(),
    });

    let h = sphere.h;
    let mut worst = 0.0f64;
    for frac in [0.25, 0.5, 0.75] {
        worst = worst.max(coarea_residual(&sphere, frac * h, 1e-4 * h)?.residual);
    }
    checks.push(CheckOutcome::at_most(
        "coarea",
        worst,
        1e-6,
        "max |A'(t) + L_t/|grad h|| at t = h/4, h/2, 3h/4 with dt = 1e-4 h".into(),
    ));
    let steps: Vec<f64> = [0.02, 0.01, 0.005]
        .iter()
        .map(|&f| coarea_residual(&sphere, 0.5 * h, f * h).map(|r| r.residual))
        .collect::<Result<_>>()?;
    let coarea_orders = orders(&steps);
    let min_order = coarea_orders.iter().cloned().fold(f64::INFINITY, f64::min);
    checks.push(CheckOutcome {
        name: "coarea-order".into(),
        primary: true,
        passed: min_order >= 1.9,
        value: min_order,
        tolerance: 1.9,
        detail: format!("residuals at dt = 0.02h, 0.01h, 0.005h: {steps:?}"),
    });

    let estimate = theorem1_check(&sphere)?;
    let tol = cfg.abs_tol * estimate.rhs.abs().max(1.0);
    let circle = estimate.per_level.iter().map(|l| l.circle_residual).fold(0.0, f64::max);
    checks.push(CheckOutcome::at_most(
        "level-circle-isoperimetry",
        circle,
        1e-10,
        "max |L^2 - 4 pi |Omega| - |Omega|^2| / L^2 over the sampled levels".into(),
    ));
    let bad13: Vec<f64> = estimate.per_level.iter().filter(|l| !l.ok13).map(|l| l.t).collect();
    checks.push(CheckOutcome {
        name: "level-area-inequality".into(),
        primary: true,
        passed: bad13.is_empty(),
        value: bad13.len() as f64,
        tolerance: 0.0,
        detail: format!(
            "L^2 <= -2HF A'(t)|Omega(t)| at {} levels; failing t: {bad13:?}",
            estimate.per_level.len()
        ),
    });
    checks.push(CheckOutcome {
        name: "height-estimate".into(),
        primary: true,
        passed: estimate.slack >= -tol,
        value: estimate.slack,
        tolerance: -tol,
        detail: format!("h = {} <= rhs = {}", estimate.h, estimate.rhs),
    });
    let c2 = corollary2_check(&sphere)?;
    checks.push(CheckOutcome {
        name: "slab-height".into(),
        primary: true,
        passed: c2.slack >= -cfg.abs_tol * c2.rhs.abs().max(1.0),
        value: c2.slack,
        tolerance: -cfg.abs_tol * c2.rhs.abs().max(1.0),
        detail: format!("2h = {} <= {}", c2.lhs, c2.rhs),
    });
    let c3 = corollary3_check(&sphere)?;
    checks.push(CheckOutcome {
        name: "volume-area-bound".into(),
        primary: true,
        passed: c3.slack >= -cfg.abs_tol * c3.rhs.abs().max(1.0),
        value: c3.slack,
        tolerance: -cfg.abs_tol * c3.rhs.abs().max(1.0),
        detail: format!("kappa Vol(U1)/4pi = {} <= H F A+/2pi = {}", c3.lhs, c3.rhs),
    });

    if let WarpField::Constant(c) = w {
        if c != 0.0 {
            checks.extend(scaling_law_checks(cfg, c, &profile, &sphere)?);
        }
    }

    let all_passed = checks.iter().filter(|c| c.primary).all(|c| c.passed);
    let report = VerifyReport {
        family: w.name().to_string(),
        h_curv: sphere.h_curv,
        rho0: sphere.rho0,
        height: sphere.h,
        inject_error: cfg.inject_error,
        checks,
        estimate,
        all_passed,
    };
    write_output(cfg, "verify.json", &to_json(&report))?;
    for c in &report.checks {
        let verdict = match (c.primary, c.passed) {
            (true, true) => "PASS",
            (true, false) => "FAIL",
            (false, true) => "info",
            (false, false) => "INFO",
        };
        println!(
            "{verdict} {:<26} value = {:e}  tol = {:e}",
            c.name, c.value, c.tolerance
        );
    }
    Ok(if all_passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

/// `u_c = e^{−c} u_0` with identical `ρ₀`, and `c`-independent area and volume.
fn scaling_law_checks(
    cfg: &RunConfig,
    c: f64,
    profile: &ProfileCurve,
    sphere: &RotationalSphere,
) -> Result<Vec<CheckOutcome>> {
    let base_cfg = RunConfig {
        c: 0.0,
        inject_error: None,
        ..cfg.clone()
    };
    let (_, _, base, base_sphere) = build(&base_cfg)?;
    let factor = (-c).exp();
    let mut sup = 0.0f64;
    for (a, b) in profile.samples.iter().zip(&base.samples) {
        sup = sup.max((a.u - factor * b.u).abs());
    }
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs();
    Ok(vec![
        CheckOutcome::at_most(
            "scaling-profile",
            sup,
            1e-9,
            format!("sup |u_c - e^-c u_0| with c = {c}"),
        ),
        CheckOutcome::at_most(
            "scaling-rho0",
            (sphere.rho0 - base_sphere.rho0).abs(),
            1e-12,
            "turning radius independent of c".into(),
        ),
        CheckOutcome::at_most(
            "scaling-area-volume",
            rel(sphere.a_plus, base_sphere.a_plus).max(rel(sphere.vol_u1, base_sphere.vol_u1)),
            1e-8,
            "relative change of A+ and Vol(U1) against c = 0".into(),
        ),
    ])
}

fn sweep_row(cfg: &RunConfig, w: &WarpField, h: f64) -> String {
    let reason = |e: &Error| match e {
        Error::NoSphere { .. } => "no turning radius".to_string(),
        other => other.to_string().replace([',', '\n'], ";"),
    };
    let opts = cfg.solver_options();
    let attempt = || -> Result<EstimateReport> {
        let adm = check_admissible_with(w, h, cfg.d, &opts)?;
        if !adm.admissible {
            return Err(Error::NotAdmissible(adm.to_string()));
        }
        let mut p = integrate_profile_with(w, h, cfg.d, cfg.grid.n_rho, &opts)?;
        if let Some(k) = cfg.inject_error {
            p = p.perturbed(k);
        }
        theorem1_bound(&glue_bigraph(&p)?)
    };
    match attempt() {
        Ok(r) => r.csv_row(),
        Err(e) => format!("{h},,,,,,,,{}", reason(&e)),
    }
}

fn cmd_sweep(args: &SweepArgs) -> Result<i32> {
    let mut cfg = RunConfig::resolve(&args.common)?;
    if let Some(v) = &args.h_values {
        cfg.h_values = v.clone();
    }
    if cfg.h_values.is_empty() {
        return Err(Error::Input("sweep needs at least one H value".into()));
    }
    if let Some(&bad) = cfg.h_values.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
        return Err(Error::domain("H", bad, "(0, inf)"));
    }
    let w = cfg.warp()?;
    let mut hs = cfg.h_values.clone();
    hs.sort_by(f64::total_cmp);
    let rows: Vec<String> = hs.par_iter().map(|&h| sweep_row(&cfg, &w, h)).collect();
    let mut csv = String::from(EstimateReport::csv_header());
    csv.push('\n');
    for r in &rows {
        csv.push_str(r);
        csv.push('\n');
    }
    write_output(&cfg, "sweep.csv", &csv)?;
    print!("{csv}");
    Ok(EXIT_OK)
}

fn cmd_mesh(cfg: &RunConfig) -> Result<i32> {
    let (_, _, _, sphere) = build(cfg)?;
    let mesh = export_mesh(&sphere, cfg.grid.n_rho, cfg.grid.n_theta)?;
    write_output(cfg, "sphere.obj", &mesh.to_obj())?;
    println!(
        "vertices = {}  faces = {}  euler = {}  height = {}",
        mesh.vertices.len(),
        mesh.faces.len(),
        mesh.euler_characteristic(),
        sphere.total_height()
    );
    Ok(EXIT_OK)
}

/// Reads a `rho,theta,u` CSV on a rectangular grid (any row order) whose
/// `θ` values are the uniform partition `2πj/n` of `[0, 2π)`.
pub(crate) fn read_polar_csv(path: &Path) -> Result<GridField> {
    let text = fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Input("empty input CSV".into()))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    if header != ["rho", "theta", "u"] {
        return Err(Error::Input(format!(
            "expected header rho,theta,u, got {}",
            header.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Input(format!(
                "line {}: expected 3 fields, got {}",
                k + 2,
                fields.len()
            )));
        }
        let mut v = [0.0; 3];
        for (slot, field) in v.iter_mut().zip(&fields) {
            *slot = field
                .parse::<f64>()
                .map_err(|_| Error::Input(format!("line {}: '{field}' is not a number", k + 2)))?;
            if !slot.is_finite() {
                return Err(Error::Input(format!("line {}: non-finite value", k + 2)));
            }
        }
        rows.push(v);
    }
    let mut rho: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    rho.sort_by(f64::total_cmp);
    rho.dedup();
    let mut theta: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    theta.sort_by(f64::total_cmp);
    theta.dedup();
    let nt = theta.len();
    if rows.len() != rho.len() * nt {
        return Err(Error::Input(format!(
            "grid is not rectangular: {} rows for {} rho x {} theta values",
            rows.len(),
            rho.len(),
            nt
        )));
    }
    for (j, &t) in theta.iter().enumerate() {
        if (t - TAU * j as f64 / nt as f64).abs() > 1e-9 {
            return Err(Error::Input(format!(
                "theta values must be 2 pi j / {nt}; found {t} at position {j}"
            )));
        }
    }
    let mut filled: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for r in &rows {
        let i = rho
            .binary_search_by(|x| x.total_cmp(&r[0]))
            .expect("value came from the list");
        let j = theta
            .binary_search_by(|x| x.total_cmp(&r[1]))
            .expect("value came from the list");
        if filled.insert((i, j), r[2]).is_some() {
            return Err(Error::Input(format!("duplicate node rho = {} theta = {}", r[0], r[1])));
        }
    }
    GridField::new(rho, nt, filled.into_values().collect())
}

fn cmd_curvature(args: &CurvatureArgs) -> Result<i32> {
    let cfg = RunConfig::resolve(&args.common)?;
    let w = cfg.warp()?;
    let u = read_polar_csv(&args.input)?;
    let f = u.sample_warp(&w)?;
    let h = mean_curvature_graph(&u, &f)?;
    let mut csv = String::from("rho,theta,H\n");
    for (i, &r) in h.rho.iter().enumerate() {
        for j in 0..h.n_theta {
            // adding 0.0 turns -0 into 0
            let _ = writeln!(csv, "{},{},{}", r, h.theta(j), h.at(i, j) + 0.0);
        }
    }
    write_output(&cfg, "hfield.csv", &csv)?;
    let max = h.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = h.values.iter().cloned().fold(f64::INFINITY, f64::min);
    println!("H range [{min:e}, {max:e}] over {} nodes", h.values.len());
    Ok(EXIT_OK)
}
