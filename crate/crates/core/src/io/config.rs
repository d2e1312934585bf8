//! JSON run configuration with defaults and range checks.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dispersion::direction_from_degrees;
use crate::error::{Error, Result};
use crate::mesh::Inclusion;
use crate::spectrum::{Backend, ContrastSign, DEFAULT_MEAN_THRESHOLD};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InclusionKind {
    #[default]
    Disk,
    Polygon,
}

/// Everything a subcommand needs. Unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub kind: InclusionKind,
    /// Disk radius.
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default = "default_center")]
    pub center: [f64; 2],
    /// Polygon vertices.
    #[serde(default)]
    pub vertices: Option<Vec<[f64; 2]>>,
    /// Target mesh size.
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_n_modes")]
    pub n_modes: usize,
    #[serde(default = "default_backend")]
    pub backend: Backend,
    #[serde(default = "default_threshold")]
    pub mean_threshold: f64,
    pub sign: ContrastSign,
    #[serde(default)]
    pub branch: usize,
    /// Direction of `κ̂` in degrees.
    #[serde(default)]
    pub angle: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Runs each `τ` in turn instead of `tau`.
    #[serde(default)]
    pub tau_sweep: Option<Vec<f64>>,
    /// Series truncation order `M`.
    #[serde(default = "default_order", alias = "M")]
    pub order: usize,
    /// Resonance exclusion radius; defaults to `10⁻³ ν₁`.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Ceiling `Z` on `ζ₀` for negative-contrast bounds; defaults to `ν₁`.
    #[serde(default)]
    pub ceiling: Option<f64>,
    #[serde(default = "default_etas")]
    pub etas: Vec<f64>,
    /// Truncation orders compared in `validate`; defaults to the even orders up to `M`.
    #[serde(default)]
    pub validate_orders: Option<Vec<usize>>,
    #[serde(default = "default_samples")]
    pub samples_per_band: usize,
    /// Upper end of the negative-contrast sweep; defaults to `ν₁`.
    #[serde(default)]
    pub zeta_max: Option<f64>,
    #[serde(default = "default_true")]
    pub svg: bool,
    /// Writes every `ψ_m` as `node_index,value`.
    #[serde(default)]
    pub dump_fields: bool,
    /// Output directory; the `--out` flag takes precedence.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_center() -> [f64; 2] {
    [0.5, 0.5]
}
fn default_h() -> f64 {
    1.0 / 64.0
}
fn default_n_modes() -> usize {
    50
}
fn default_backend() -> Backend {
    Backend::Fem
}
fn default_threshold() -> f64 {
    DEFAULT_MEAN_THRESHOLD
}
fn default_tau() -> f64 {
    1.0
}
fn default_order() -> usize {
    10
}
fn default_etas() -> Vec<f64> {
    vec![0.08, 0.04, 0.02]
}
fn default_samples() -> usize {
    200
}
fn default_true() -> bool {
    true
}

fn invalid(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| invalid("config", e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn inclusion(&self) -> Result<Inclusion> {
        match self.kind {
            InclusionKind::Disk => {
                let radius = self.radius.ok_or_else(|| invalid("radius", "required for a disk"))?;
                Ok(Inclusion::Disk {
                    radius,
                    center: self.center,
                })
            }
            InclusionKind::Polygon => {
                let vertices = self
                    .vertices
                    .clone()
                    .ok_or_else(|| invalid("vertices", "required for a polygon"))?;
                Ok(Inclusion::Polygon { vertices })
            }
        }
    }

    /// Unit vector `κ̂`.
    pub fn direction(&self) -> [f64; 2] {
        direction_from_degrees(self.angle)
    }

    /// The `τ` values to run.
    pub fn taus(&self) -> Vec<f64> {
        self.tau_sweep.clone().unwrap_or_else(|| vec![self.tau])
    }

    pub fn orders_to_validate(&self) -> Vec<usize> {
        self.validate_orders
            .clone()
            .unwrap_or_else(|| (2..=self.order).step_by(2).collect())
    }

    /// Inradius-like length the mesh must resolve.
    fn feature_size(&self, inclusion: &Inclusion) -> f64 {
        match inclusion {
            Inclusion::Disk { radius, .. } => *radius,
            Inclusion::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| {
                        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let inclusion = self.inclusion()?;
        if let Inclusion::Disk { radius, .. } = inclusion {
            if !(radius > 0.0 && radius < 0.5) {
                return Err(invalid("radius", "inclusion not strictly interior"));
            }
        }
        inclusion.validate().map_err(|e| {
            let field = if self.kind == InclusionKind::Disk { "radius" } else { "vertices" };
            invalid(field, e.to_string().trim_start_matches("geometry error: ").to_string())
        })?;
        let feature = self.feature_size(&inclusion);
        if !(self.h > 0.0 && self.h <= feature / 4.0) {
            return Err(invalid("h", format!("mesh size must satisfy 0 < h ≤ {}", feature / 4.0)));
        }
        if self.n_modes == 0 {
            return Err(invalid("n_modes", "at least one mode is required"));
        }
        if self.backend == Backend::BesselDisk
            && !matches!(inclusion, Inclusion::Disk { center, .. } if center == [0.5, 0.5])
        {
            return Err(invalid("backend", "the Bessel backend needs a centred disk"));
        }
        if !(self.mean_threshold > 0.0 && self.mean_threshold < 1.0) {
            return Err(invalid("mean_threshold", "must lie in (0, 1)"));
        }
        if self.order < 2 {
            return Err(invalid("order", "M must be at least 2"));
        }
        if self.sign == ContrastSign::Negative && self.branch != 0 {
            return Err(invalid("branch", "negative contrast has a single branch"));
        }
        if !self.angle.is_finite() {
            return Err(invalid("angle", "must be finite"));
        }
        for t in self.taus() {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid("tau", format!("τ must be positive, got {t}")));
            }
        }
        if matches!(&self.tau_sweep, Some(v) if v.is_empty()) {
            return Err(invalid("tau_sweep", "must not be empty"));
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0) {
                return Err(invalid("epsilon", "must be positive"));
            }
        }
        for &e in &self.etas {
            if !(e > 0.0 && e <= crate::direct::ETA_MAX) {
                return Err(invalid("etas", format!("η must lie in (0, {}]", crate::direct::ETA_MAX)));
            }
        }
        if let Some(orders) = &self.validate_orders {
            if orders.iter().any(|&m| m > self.order) {
                return Err(invalid("validate_orders", "orders must not exceed M"));
            }
        }
        if self.samples_per_band < 2 {
            return Err(invalid("samples_per_band", "at least 2 samples are required"));
        }
        if let Some(z) = self.zeta_max {
            if !(z > 0.0) {
                return Err(invalid("zeta_max", "must be positive"));
            }
        }
        Ok(())
    }

    /// Pretty JSON of the effective configuration.
    pub fn echo(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(r#"{"radius": 0.375, "sign": "positive"}"#).unwrap();
        assert_eq!(cfg.h, 1.0 / 64.0);
        assert_eq!(cfg.n_modes, 50);
        assert_eq!(cfg.order, 10);
        assert_eq!(cfg.branch, 0);
        assert_eq!(cfg.angle, 0.0);
    }

    #[test]
    fn radius_too_large() {
        let err = parse_config(r#"{"radius": 0.6, "sign": "positive"}"#).unwrap_err();
        assert!(err.is_validation());
        assert!(err.to_string().contains("inclusion not strictly interior"), "{err}");
    }

    #[test]
    fn angle_ninety() {
        let cfg = parse_config(r#"{"radius": 0.375, "sign": "negative", "angle": 90}"#).unwrap();
        let d = cfg.direction();
        assert!(d[0].abs() <= 1e-15 && (d[1] - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn unknown_key_rejected() {
        let err = parse_config(r#"{"radius": 0.375, "sign": "positive", "colour": 1}"#).unwrap_err();
        assert!(err.is_validation());
        assert!(err.to_string().contains("colour"));
    }

    #[test]
    fn coarse_mesh_rejected() {
        let err = parse_config(r#"{"radius": 0.1, "sign": "positive", "h": 0.05}"#).unwrap_err();
        assert!(err.to_string().contains("h"));
    }

    #[test]
    fn order_alias() {
        let cfg = parse_config(r#"{"radius": 0.375, "sign": "positive", "M": 6}"#).unwrap();
        assert_eq!(cfg.order, 6);
        assert_eq!(cfg.orders_to_validate(), vec![2, 4, 6]);
    }
}
