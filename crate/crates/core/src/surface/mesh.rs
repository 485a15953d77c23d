use std::f64::consts::TAU;
use std::fmt::Write as _;

use super::sphere::RotationalSphere;
use crate::error::{Error, Result};

/// Closed triangle mesh of a rotational sphere in the disc-model chart
/// `(tanh(ρ/2) cos θ, tanh(ρ/2) sin θ, ±u(ρ))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 3]>,
    /// Zero-based, counter-clockwise seen from outside.
    pub faces: Vec<[usize; 3]>,
}

pub fn export_mesh(sphere: &RotationalSphere, n_rho: usize, n_theta: usize) -> Result<TriangleMesh> {
    if n_rho < 2 || n_theta < 3 {
        return Err(Error::Input(format!(
            "mesh resolution must satisfy n_rho >= 2 and n_theta >= 3, got {n_rho} x {n_theta}"
        )));
    }
    let rho0 = sphere.rho0;
    let top = rho0.sqrt();
    // rings j = 1..=n_rho, graded in sqrt(rho0 - rho) like the profile samples
    let mut rings = Vec::with_capacity(n_rho);
    for j in 1..=n_rho {
        let (rho, u) = if j == n_rho {
            (rho0, 0.0)
        } else {
            let sigma = top * (1.0 - j as f64 / n_rho as f64);
            let rho = rho0 - sigma * sigma;
            (rho, sphere.profile.u_at(rho)?)
        };
        rings.push((rho, u));
    }

    // levels from the north pole down: upper rings, equator, mirrored rings
    let mut levels: Vec<(f64, f64)> = rings.clone();
    levels.extend(rings[..n_rho - 1].iter().rev().map(|&(r, u)| (r, -u)));

    let mut vertices = vec![[0.0, 0.0, sphere.h]];
    for &(rho, z) in &levels {
        let r = (0.5 * rho).tanh();
        for k in 0..n_theta {
            let th = TAU * k as f64 / n_theta as f64;
            vertices.push([r * th.cos(), r * th.sin(), z]);
        }
    }
    let south = vertices.len();
    vertices.push([0.0, 0.0, -sphere.h]);

    let ring = |l: usize, k: usize| 1 + l * n_theta + (k % n_theta);
    let mut faces = Vec::with_capacity(2 * n_theta * levels.len());
    for k in 0..n_theta {
        faces.push([0, ring(0, k), ring(0, k + 1)]);
    }
    for l in 0..levels.len() - 1 {
        for k in 0..n_theta {
            let (a0, a1, b0, b1) = (ring(l, k), ring(l, k + 1), ring(l + 1, k), ring(l + 1, k + 1));
            faces.push([a0, b0, b1]);
            faces.push([a0, b1, a1]);
        }
    }
    let last = levels.len() - 1;
    for k in 0..n_theta {
        faces.push([ring(last, k), south, ring(last, k + 1)]);
    }
    Ok(TriangleMesh { vertices, faces })
}

impl TriangleMesh {
    pub fn edge_count(&self) -> usize {
        let mut edges: Vec<(usize, usize)> = self
            .faces
            .iter()
            .flat_map(|f| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.faces.len() as i64
    }

    /// Volume enclosed in chart coordinates (divergence theorem); positive
    /// when faces are oriented outward.
    pub fn signed_chart_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let [a, b, c] = f.map(|i| self.vertices[i]);
                let cross = [
                    b[1] * c[2] - b[2] * c[1],
                    b[2] * c[0] - b[0] * c[2],
                    b[0] * c[1] - b[1] * c[0],
                ];
                (a[0] * cross[0] + a[1] * cross[1] + a[2] * cross[2]) / 6.0
            })
            .sum()
    }

    /// Sum of triangle areas in the warped metric, pulled back to the chart:
    /// `λ² (dx² + dy²) + e^{2f(ρ)} dz²` with `λ = 2 / (1 − r²)` and
    /// `ρ = 2 artanh r`, evaluated at each triangle's centroid.
    pub fn riemannian_area(&self, exp_f: impl Fn(f64) -> f64) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let [a, b, c] = f.map(|i| self.vertices[i]);
                let cx = (a[0] + b[0] + c[0]) / 3.0;
                let cy = (a[1] + b[1] + c[1]) / 3.0;
                let r2 = cx * cx + cy * cy;
                let lambda = 2.0 / (1.0 - r2);
                let rho = 2.0 * r2.sqrt().atanh();
                let ez = exp_f(rho);
                let metric = [lambda * lambda, lambda * lambda, ez * ez];
                let e1 = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                let e2 = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
                let dot = |u: [f64; 3], v: [f64; 3]| (0..3).map(|i| metric[i] * u[i] * v[i]).sum::<f64>();
                let (g11, g22, g12) = (dot(e1, e1), dot(e2, e2), dot(e1, e2));
                0.5 * (g11 * g22 - g12 * g12).max(0.0).sqrt()
            })
            .sum()
    }

    /// Wavefront OBJ: a header comment, `v x y z` lines, then 1-based `f i j k`.
    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        out.push_str("# rotational CMC sphere in H x_f R\n");
        out.push_str("# chart: (tanh(rho/2) cos theta, tanh(rho/2) sin theta, t); coordinate chart, not an isometric embedding\n");
        let _ = writeln!(out, "# vertices {} faces {}", self.vertices.len(), self.faces.len());
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", v[0], v[1], v[2]);
        }
        for f in &self.faces {
            let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
        }
        out
    }
}
