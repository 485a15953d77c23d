//! Geometry of graphs and rotational spheres in `H ×_f R`.

mod curvature;
mod mesh;
mod sphere;

pub use curvature::{
    mean_curvature_graph, mean_curvature_radial, profile_curvature_consistency, CurvatureConsistency, GridField,
};
pub use mesh::{export_mesh, TriangleMesh};
pub use sphere::{
    cap_area, cap_volume, coarea_residual, flux_first_integral_residual, glue_bigraph, level_circle,
    tangential_decomposition, CoareaResidual, FluxResidual, LevelCircle, RotationalSphere,
};
