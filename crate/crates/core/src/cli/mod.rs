//! Command-line front end: flag and config-file merging, the five
//! subcommands, and the exit-code contract.

mod commands;

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::profile::SolverOptions;
use crate::warp::WarpField;

pub use commands::{run, CheckOutcome, VerifyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BAD_INPUT: i32 = 1;
pub const EXIT_NO_SPHERE: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "warpcmc",
    version,
    about = "Rotational CMC spheres in warped products H x_f R"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the profile curve; writes profile.csv and report.json.
    Solve(CommonArgs),
    /// Run every consistency check; writes verify.json.
    Verify(CommonArgs),
    /// Height-estimate table over a list of H values; writes sweep.csv.
    Sweep(SweepArgs),
    /// Triangulate the sphere; writes sphere.obj.
    Mesh(CommonArgs),
    /// Mean curvature of a graph given on a polar grid; writes hfield.csv.
    Curvature(CurvatureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Family {
    Constant,
    LogCosh,
    Table,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Constant => "constant",
            Family::LogCosh => "log_cosh",
            Family::Table => "table",
        })
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Constant warp value (family constant).
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Mean curvature.
    #[arg(long = "H", allow_negative_numbers = true)]
    pub h: Option<f64>,
    /// Flux constant (0 is the only admissible value).
    #[arg(long, allow_negative_numbers = true)]
    pub d: Option<f64>,
    #[arg(long)]
    pub quad_tol: Option<f64>,
    #[arg(long)]
    pub root_tol: Option<f64>,
    #[arg(long)]
    pub n_rho: Option<usize>,
    #[arg(long)]
    pub n_theta: Option<usize>,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Scale the solved profile by this factor before checking (negative control).
    #[arg(long)]
    pub inject_error: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated H values.
    #[arg(long = "H-values", value_delimiter = ',')]
    pub h_values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct CurvatureArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// CSV with header `rho,theta,u` on a rectangular polar grid.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub n_rho: usize,
    pub n_theta: usize,
}

/// Everything a run needs. Mirrors the JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub family: Family,
    /// Value of `f` for the constant family.
    pub c: f64,
    /// `(ρ, f)` knots for the table family; the first `ρ` must be 0.
    pub knots: Vec<(f64, f64)>,
    #[serde(rename = "H")]
    pub h: Option<f64>,
    pub d: f64,
    pub quad_tol: f64,
    pub root_tol: f64,
    pub abs_tol: f64,
    pub grid: Grid,
    pub out: PathBuf,
    pub inject_error: Option<f64>,
    #[serde(rename = "H_values")]
    pub h_values: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            family: Family::LogCosh,
            c: 0.0,
            knots: Vec::new(),
            h: None,
            d: 0.0,
            quad_tol: 1e-10,
            root_tol: 1e-12,
            abs_tol: 1e-9,
            grid: Grid {
                n_rho: 257,
                n_theta: 64,
            },
            out: PathBuf::from("."),
            inject_error: None,
            h_values: vec![1.1, 1.5, 2.0, 3.0, 5.0],
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Input(format!("invalid config {}: {e}", path.display())))
    }

    /// Defaults, then the config file, then explicit flags.
    pub fn resolve(args: &CommonArgs) -> Result<Self, Error> {
        let mut cfg = match &args.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = args.family {
            cfg.family = v;
        }
        if let Some(v) = args.c {
            cfg.c = v;
        }
        if let Some(v) = args.h {
            cfg.h = Some(v);
        }
        if let Some(v) = args.d {
            cfg.d = v;
        }
        if let Some(v) = args.quad_tol {
            cfg.quad_tol = v;
        }
        if let Some(v) = args.root_tol {
            cfg.root_tol = v;
        }
        if let Some(v) = args.n_rho {
            cfg.grid.n_rho = v;
        }
        if let Some(v) = args.n_theta {
            cfg.grid.n_theta = v;
        }
        if let Some(v) = &args.out {
            cfg.out = v.clone();
        }
        if let Some(v) = args.inject_error {
            cfg.inject_error = Some(v);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        for (name, tol) in [
            ("quad_tol", self.quad_tol),
            ("root_tol", self.root_tol),
            ("abs_tol", self.abs_tol),
        ] {
            if !(tol > 0.0 && tol <= 1e-2) {
                return Err(Error::domain(name, tol, "(0, 1e-2]"));
            }
        }
        if let Some(h) = self.h {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::domain("H", h, "(0, inf)"));
            }
        }
        if !self.d.is_finite() {
            return Err(Error::domain("d", self.d, "finite reals"));
        }
        if !self.c.is_finite() {
            return Err(Error::domain("c", self.c, "finite reals"));
        }
        if self.grid.n_rho < 2 || self.grid.n_theta < 3 {
            return Err(Error::Input(format!(
                "grid must have n_rho >= 2 and n_theta >= 3, got {} x {}",
                self.grid.n_rho, self.grid.n_theta
            )));
        }
        if let Some(k) = self.inject_error {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::domain("inject_error", k, "(0, inf)"));
            }
        }
        if self.family == Family::Table && self.knots.is_empty() {
            return Err(Error::Input("family table needs a knot list in the config file".into()));
        }
        Ok(())
    }

    pub fn curvature(&self) -> Result<f64, Error> {
        self.h
            .ok_or_else(|| Error::Input("mean curvature --H is required".into()))
    }

    pub fn warp(&self) -> Result<WarpField, Error> {
        match self.family {
            Family::Constant => Ok(WarpField::Constant(self.c)),
            Family::LogCosh => Ok(WarpField::LogCosh),
            Family::Table => WarpField::tabulated(&self.knots, self.quad_tol),
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            quad_tol: self.quad_tol,
            root_tol: self.root_tol,
            ..SolverOptions::default()
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Domain { .. } | Error::Input(_) => EXIT_BAD_INPUT,
        _ => EXIT_NO_SPHERE,
    }
}
