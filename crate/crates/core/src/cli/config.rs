use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::cone::ConePoint;
use crate::error::{Error, Result};
use crate::fuchsian::MAX_RADIUS;
use crate::holspace::HolConfig;
use crate::moebius::C64;

/// Experiment configuration. Every field has a default; a config file only
/// needs the fields it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub seed: u64,

    pub det_tol: f64,
    pub rel_tol: f64,
    pub prox_tol: f64,
    pub conv_tol: f64,
    pub const_tol: f64,
    pub sup_tol: f64,
    pub tail_tol: f64,
    pub cone_tol: f64,
    pub invariance_tol: f64,
    pub dbar_tol: f64,
    pub holonomy_tol: f64,
    pub descent_tol: f64,
    pub area_tol: f64,
    pub witness_tol: f64,
    pub identity_tol: f64,
    pub laplacian_tol: f64,
    pub action_tol: f64,
    pub limit_tol: f64,
    pub comp_bound: f64,

    /// Random triples for the invariance and preservation sweeps.
    pub samples: usize,
    /// Random fibers in the dbar sweep, with `|z2 / z1|` at most `dbar_fiber_ratio`.
    pub dbar_fibers: usize,
    pub dbar_fiber_ratio: f64,
    pub holonomy_fibers: usize,
    pub leaf_samples: usize,
    pub null_leaves: usize,
    /// Side of the square grids used by the dbar and Laplacian sweeps.
    pub grid_size: usize,
    pub grid_radius: f64,
    pub dbar_step: f64,
    pub laplacian_step: f64,

    pub word_radius: usize,
    pub probe_samples: usize,
    pub probe_iterations: usize,
    pub orbit_points: usize,
    pub orbit_bound: usize,
    pub representation: Option<PathBuf>,

    pub orbit_terms: usize,
    pub compact_radius: f64,
    pub action_pairs: usize,
    pub degree: usize,
    pub r_fit: f64,
    pub fit_samples: usize,
    pub r_check: f64,
    pub check_radii: usize,
    pub check_angles: usize,

    pub leaf_grid_size: usize,
    /// Cone fiber `[re z1, im z1, re z2, im z2, t]` for the leaf grid.
    pub fiber: [f64; 5],
}

impl Default for Config {
    fn default() -> Self {
        let hol = HolConfig::default();
        Self {
            seed: 0,
            det_tol: 1e-12,
            rel_tol: 1e-9,
            prox_tol: 1e-6,
            conv_tol: 1e-6,
            const_tol: 1e-10,
            sup_tol: hol.sup_tol,
            tail_tol: hol.tail_tol,
            cone_tol: 1e-10,
            invariance_tol: 1e-10,
            dbar_tol: 1e-8,
            holonomy_tol: 1e-8,
            descent_tol: 1e-9,
            area_tol: 1e-6,
            witness_tol: 1e-12,
            identity_tol: 1e-5,
            laplacian_tol: 1e-6,
            action_tol: 1e-9,
            limit_tol: 1e-6,
            comp_bound: 1e3,
            samples: 10_000,
            dbar_fibers: 4,
            dbar_fiber_ratio: 0.4,
            holonomy_fibers: 8,
            leaf_samples: 64,
            null_leaves: 8,
            grid_size: 21,
            grid_radius: 0.7,
            dbar_step: 1e-4,
            laplacian_step: 1e-3,
            word_radius: 4,
            probe_samples: 1000,
            probe_iterations: 200,
            orbit_points: 4,
            orbit_bound: 1000,
            representation: None,
            orbit_terms: 40,
            compact_radius: 0.5,
            action_pairs: 8,
            degree: hol.degree,
            r_fit: hol.r_fit,
            fit_samples: hol.fit_samples,
            r_check: hol.r_check,
            check_radii: hol.check_radii,
            check_angles: hol.check_angles,
            leaf_grid_size: 128,
            fiber: [1.0, 0.0, 0.0, 0.0, 1.0],
        }
    }
}

impl Config {
    /// Parses a config document. Unknown top-level fields are returned as
    /// warnings rather than rejected.
    pub fn from_json(text: &str) -> Result<(Self, Vec<String>)> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| super::parse_error(text, &e))?;
        let obj = value.as_object().ok_or_else(|| Error::Config {
            location: "$".into(),
            message: "config must be a JSON object".into(),
        })?;
        let known = known_fields();
        let warnings = obj
            .keys()
            .filter(|k| !known.contains(k.as_str()))
            .map(|k| format!("ignoring unknown config field `{k}`"))
            .collect();
        let config: Config =
            serde_json::from_str(text).map_err(|e| super::parse_error(text, &e))?;
        config.validate()?;
        Ok((config, warnings))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |location: &str, message: &str| {
            Err(Error::Config {
                location: location.into(),
                message: message.into(),
            })
        };
        let positive = [
            ("det_tol", self.det_tol),
            ("rel_tol", self.rel_tol),
            ("prox_tol", self.prox_tol),
            ("conv_tol", self.conv_tol),
            ("const_tol", self.const_tol),
            ("sup_tol", self.sup_tol),
            ("tail_tol", self.tail_tol),
            ("cone_tol", self.cone_tol),
            ("invariance_tol", self.invariance_tol),
            ("dbar_tol", self.dbar_tol),
            ("holonomy_tol", self.holonomy_tol),
            ("descent_tol", self.descent_tol),
            ("area_tol", self.area_tol),
            ("witness_tol", self.witness_tol),
            ("identity_tol", self.identity_tol),
            ("laplacian_tol", self.laplacian_tol),
            ("action_tol", self.action_tol),
            ("limit_tol", self.limit_tol),
            ("comp_bound", self.comp_bound),
            ("grid_radius", self.grid_radius),
            ("dbar_step", self.dbar_step),
            ("laplacian_step", self.laplacian_step),
            ("compact_radius", self.compact_radius),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(name, "must be positive and finite");
            }
        }
        if self.word_radius > MAX_RADIUS {
            return bad("word_radius", &format!("must be at most {MAX_RADIUS}"));
        }
        if self.grid_radius >= 0.99 {
            return bad("grid_radius", "must be below 0.99");
        }
        if !(self.dbar_fiber_ratio >= 0.0 && self.dbar_fiber_ratio < 1.0) {
            return bad("dbar_fiber_ratio", "must lie in [0, 1)");
        }
        if self.compact_radius > 0.9 {
            return bad("compact_radius", "must be at most 0.9");
        }
        for (name, v) in [
            ("samples", self.samples),
            ("grid_size", self.grid_size),
            ("probe_samples", self.probe_samples),
            ("probe_iterations", self.probe_iterations),
            ("orbit_bound", self.orbit_bound),
            ("degree", self.degree),
        ] {
            if v == 0 {
                return bad(name, "must be positive");
            }
        }
        for (name, v) in [
            ("leaf_samples", self.leaf_samples),
            ("orbit_terms", self.orbit_terms),
            ("leaf_grid_size", self.leaf_grid_size),
        ] {
            if v < 2 {
                return bad(name, "must be at least 2");
            }
        }
        self.hol()
            .validate()
            .or_else(|e| bad("degree", &e.to_string()))?;
        self.fiber_point()
            .map(|_| ())
            .or_else(|e| bad("fiber", &e.to_string()))
    }

    pub fn hol(&self) -> HolConfig {
        HolConfig {
            degree: self.degree,
            r_fit: self.r_fit,
            fit_samples: self.fit_samples,
            r_check: self.r_check,
            check_radii: self.check_radii,
            check_angles: self.check_angles,
            sup_tol: self.sup_tol,
            tail_tol: self.tail_tol,
        }
    }

    pub fn fiber_point(&self) -> Result<ConePoint> {
        let [a, b, c, d, t] = self.fiber;
        ConePoint::new(C64::new(a, b), C64::new(c, d), t)
    }
}

fn known_fields() -> BTreeSet<String> {
    match serde_json::to_value(Config::default()) {
        Ok(serde_json::Value::Object(m)) => m.keys().cloned().collect(),
        _ => BTreeSet::new(),
    }
}
