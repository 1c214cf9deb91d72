//! Tolerance configuration.
//!
//! Every numerical threshold used by the toolkit lives here so that runs can
//! override them uniformly (`ABSSPEC_TOL_FILE` or an explicit file) and the
//! run manifest can record the exact values in effect.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative eigenvalue-cluster tolerance: mu_i and mu_j coincide when
    /// |mu_i - mu_j| <= cluster_rel * (1 + ||A||).
    pub cluster_rel: f64,
    /// Relative rank threshold for pivoted QR decisions.
    pub rank_rel: f64,
    /// Orthonormality slack allowed in subspace frames.
    pub frame_orth: f64,
    /// Locus vertices are refined until |gap| falls below this.
    pub locus_vertex_gap: f64,
    /// |gap| below which a point counts as lying on a locus.
    pub on_locus: f64,
    /// Step factor for complex finite differences: h = fd_step * (1 + |lambda|).
    pub fd_step: f64,
    /// Principal-angle margin for the propagated-subspace containment check.
    pub containment_margin: f64,
    /// Chordal radius of the exclusion neighborhoods around the attractor
    /// and repeller points on the invariant sphere.
    pub exclusion_radius: f64,
    /// Initial number of contour samples for winding counts.
    pub contour_start: usize,
    /// Maximum number of contour samples.
    pub contour_cap: usize,
    /// Relative tolerance of the adaptive integrator.
    pub ode_rel: f64,
    /// Absolute tolerance of the adaptive integrator.
    pub ode_abs: f64,
    /// Maximum integrator step as a fraction of the middle half-width.
    pub max_step_frac: f64,
    /// Normalized Evans-determinant magnitude accepted as a refined zero.
    pub refine_target: f64,
    /// Seam continuity tolerance for problem files.
    pub seam: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            cluster_rel: 1e-9,
            rank_rel: 1e-10,
            frame_orth: 1e-10,
            locus_vertex_gap: 1e-8,
            on_locus: 1e-6,
            fd_step: 1e-6,
            containment_margin: 1e-6,
            exclusion_radius: 0.05,
            contour_start: 64,
            contour_cap: 1 << 16,
            ode_rel: 1e-10,
            ode_abs: 1e-12,
            max_step_frac: 1.0 / 16.0,
            refine_target: 1e-10,
            seam: 1e-8,
        }
    }
}

impl Tolerances {
    /// Load overrides from a JSON file; absent fields keep their defaults.
    pub fn from_file(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            context: path.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Defaults, then overrides from `ABSSPEC_TOL_FILE` if the variable is set.
    pub fn from_env() -> Result<Self> {
        match std::env::var("ABSSPEC_TOL_FILE") {
            Ok(path) if !path.is_empty() => Self::from_file(&path),
            _ => Ok(Self::default()),
        }
    }

    pub fn exclusions_disjoint(&self) -> bool {
        // P_n and P_s sit at chordal distance 1 on the invariant sphere.
        2.0 * self.exclusion_radius < 1.0
    }
}
