//! Run configuration read from JSON by the command-line front end.
//!
//! Every field is optional; omitted fields take the defaults below. Unknown
//! fields are rejected so that typos surface as errors. A run writes the
//! fully resolved configuration next to its artifacts as `config.json`, and
//! rerunning from that file reproduces the artifacts byte for byte.
//!
//! ```json
//! {
//!   "params": { "b": 1.0, "w": 0.02, "l": 20.0, "gamma": 2.0, "u": 1.0,
//!               "epsilon": 0.05, "delta": 0.05 },
//!   "grid": null,
//!   "seed": 1,
//!   "phi_steps": 128,
//!   "out": "out",
//!   "threads": null,
//!   "flow": { "rel_tol": 0.05, "shift_tol": 1e-7 },
//!   "branches": { "k_min": -6.0, "k_max": 4.0, "k_points": 201, "n_max": 3 },
//!   "index": { "fermi_levels": 5, "triples": 100, "max_dim": 12 },
//!   "decouple": { "d": [2.0, 4.0, 6.0, 8.0], "phi": 0.0 },
//!   "toy": { "l": 6.283185307179586, "m_lo": -8, "m_hi": 8, "vbar": 0.0,
//!            "phi_steps": 128, "n_sites": 128 }
//! }
//! ```
//!
//! `grid: null` selects [`GridSpec::default_for`]. Branch momenta `k` and
//! truncation distances `d` are in units of `√B` and `1/√B` respectively.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GridSpec, PhysicalParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowOptions {
    /// Relative slack on the flow, velocity and spacing bounds.
    pub rel_tol: f64,
    /// Absolute bound on `|E_k(2π) − E_{k+1}(0)|`, in units of `B`.
    pub shift_tol: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            rel_tol: 0.05,
            shift_tol: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BranchOptions {
    pub k_min: f64,
    pub k_max: f64,
    pub k_points: usize,
    /// Highest branch index `n` tabulated.
    pub n_max: usize,
}

impl Default for BranchOptions {
    fn default() -> Self {
        Self {
            k_min: -6.0,
            k_max: 4.0,
            k_points: 201,
            n_max: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IndexOptions {
    /// Fermi levels spread over `Δ` for the crossing/index comparison.
    pub fermi_levels: usize,
    /// Random projection triples for the index identities.
    pub triples: usize,
    /// Largest dimension of a random triple.
    pub max_dim: usize,
}

impl Default for IndexOptions {
    fn default() -> Self {
        Self {
            fermi_levels: 5,
            triples: 100,
            max_dim: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoupleOptions {
    /// Truncation distances in magnetic lengths, increasing.
    pub d: Vec<f64>,
    pub phi: f64,
}

impl Default for DecoupleOptions {
    fn default() -> Self {
        Self {
            d: vec![2.0, 4.0, 6.0, 8.0],
            phi: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToyOptions {
    pub l: f64,
    pub m_lo: i64,
    pub m_hi: i64,
    pub vbar: f64,
    pub phi_steps: usize,
    /// Sites of the upwind and Fourier discretizations.
    pub n_sites: usize,
}

impl Default for ToyOptions {
    fn default() -> Self {
        Self {
            l: 2.0 * std::f64::consts::PI,
            m_lo: -8,
            m_hi: 8,
            vbar: 0.0,
            phi_steps: 128,
            n_sites: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: PhysicalParams,
    pub grid: Option<GridSpec>,
    /// Seed of the impurity field.
    pub seed: u64,
    pub phi_steps: usize,
    pub out: PathBuf,
    /// Worker threads; `None` uses every core. Results do not depend on it.
    pub threads: Option<usize>,
    pub flow: FlowOptions,
    pub branches: BranchOptions,
    pub index: IndexOptions,
    pub decouple: DecoupleOptions,
    pub toy: ToyOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: PhysicalParams::default(),
            grid: None,
            seed: 1,
            phi_steps: 128,
            out: PathBuf::from("out"),
            threads: None,
            flow: FlowOptions::default(),
            branches: BranchOptions::default(),
            index: IndexOptions::default(),
            decouple: DecoupleOptions::default(),
            toy: ToyOptions::default(),
        }
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParams {
        field,
        reason: reason.into(),
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The grid actually used.
    pub fn resolved_grid(&self) -> GridSpec {
        self.grid
            .unwrap_or_else(|| GridSpec::default_for(&self.params))
    }

    /// A copy with the default grid written out.
    pub fn resolved(&self) -> Self {
        Self {
            grid: Some(self.resolved_grid()),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.resolved_grid().validate(&self.params)?;
        if self.phi_steps < crate::flow::MIN_PHI_STEPS {
            return Err(invalid(
                "phi_steps",
                format!(
                    "need at least {}, got {}",
                    crate::flow::MIN_PHI_STEPS,
                    self.phi_steps
                ),
            ));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads", "need at least one thread"));
        }
        let f = &self.flow;
        if !(f.rel_tol >= 0.0 && f.rel_tol < 1.0) {
            return Err(invalid(
                "flow.rel_tol",
                format!("need 0 <= rel_tol < 1, got {}", f.rel_tol),
            ));
        }
        if !(f.shift_tol > 0.0) {
            return Err(invalid("flow.shift_tol", "must be positive"));
        }
        let b = &self.branches;
        if !(b.k_min < b.k_max) || b.k_points < 2 {
            return Err(invalid(
                "branches.k_min",
                format!(
                    "need k_min < k_max and k_points >= 2, got [{}, {}] with {} points",
                    b.k_min, b.k_max, b.k_points
                ),
            ));
        }
        if self.index.fermi_levels == 0 {
            return Err(invalid(
                "index.fermi_levels",
                "need at least one Fermi level",
            ));
        }
        if self.index.max_dim < 2 {
            return Err(invalid("index.max_dim", "need dimension at least 2"));
        }
        let d = &self.decouple.d;
        if d.is_empty() || d.iter().any(|x| !(*x >= 0.0)) || d.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid(
                "decouple.d",
                "need a nonempty increasing list of non-negative distances",
            ));
        }
        let t = &self.toy;
        if !(t.l > 0.0) {
            return Err(invalid("toy.l", "circumference must be positive"));
        }
        if t.m_hi - t.m_lo < 2 {
            return Err(invalid("toy.m_hi", "need m_hi >= m_lo + 2"));
        }
        if t.n_sites < 32 || (t.n_sites as i64) < 4 * t.m_lo.abs().max(t.m_hi.abs()) {
            return Err(invalid(
                "toy.n_sites",
                "need at least 32 sites and four per mode",
            ));
        }
        if t.phi_steps < 2 {
            return Err(invalid("toy.phi_steps", "need at least two flux steps"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_the_default() {
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn partial_params_keep_other_defaults() {
        let c = RunConfig::from_json(r#"{"params": {"l": 40.0}, "seed": 3}"#).unwrap();
        assert_eq!(c.params.l, 40.0);
        assert_eq!(c.params.b, 1.0);
        assert_eq!(c.seed, 3);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(matches!(
            RunConfig::from_json(r#"{"sead": 3}"#),
            Err(Error::Config(_))
        ));
        assert!(RunConfig::from_json(r#"{"params": {"bee": 1}}"#).is_err());
    }

    #[test]
    fn strong_disorder_fails_validation_by_field() {
        let c = RunConfig::from_json(r#"{"params": {"b": 1.0, "w": 0.6}}"#).unwrap();
        match c.validate() {
            Err(Error::InvalidParams { field, .. }) => assert_eq!(field, "b"),
            other => panic!("expected a field error, got {other:?}"),
        }
    }

    #[test]
    fn resolved_round_trips() {
        let c = RunConfig::default().resolved();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), c);
        assert_eq!(c.resolved_grid(), GridSpec::default_for(&c.params));
    }

    #[test]
    fn coarse_flux_grid_is_rejected() {
        let c = RunConfig {
            phi_steps: 10,
            ..Default::default()
        };
        assert!(matches!(
            c.validate(),
            Err(Error::InvalidParams {
                field: "phi_steps",
                ..
            })
        ));
    }
}
