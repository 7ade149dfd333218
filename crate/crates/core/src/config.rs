//! Experiment specifications read from TOML.
//!
//! ```toml
//! seed = 7
//! rounds = 1_000_000
//! replications = 2
//!
//! [scenario]
//! kind = "single"
//! policies = ["optimal", "equal", "standard"]
//!
//! [grid]
//! n = [4, 8, 16]
//! distances_km = [[20.0, 30.0]]
//! coherence_time_s = [1e-3]
//! ```
//!
//! Unknown keys are rejected. Absent physical parameters default to
//! 0.15 dB/km attenuation, `F0 = 1`, `c = 2e5 km/s` and no decoherence.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::allocation::PolicyKind;
use crate::chain::ChainConfig;
use crate::engine::{default_warmup, RepeaterConfig};
use crate::error::{Error, Result};
use crate::link::{make_link, DEFAULT_ATTENUATION_DB_PER_KM, FIBER_LIGHT_SPEED_KM_PER_S};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// One balanced repeater between two links.
    Single,
    /// Two repeaters, three links.
    Chain,
    /// Only the sequential baseline of a single repeater.
    Standard,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Single => "single",
            ScenarioKind::Chain => "chain",
            ScenarioKind::Standard => "standard",
        }
    }

    pub fn links(self) -> usize {
        match self {
            ScenarioKind::Chain => 3,
            _ => 2,
        }
    }
}

/// A balanced allocation policy or the sequential baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyChoice {
    Optimal,
    Equal,
    Proportional,
    HardCutoff,
    Standard,
}

impl PolicyChoice {
    pub fn kind(self) -> Option<PolicyKind> {
        match self {
            PolicyChoice::Optimal => Some(PolicyKind::Optimal),
            PolicyChoice::Equal => Some(PolicyKind::Equal),
            PolicyChoice::Proportional => Some(PolicyKind::Proportional),
            PolicyChoice::HardCutoff => Some(PolicyKind::HardCutoff),
            PolicyChoice::Standard => None,
        }
    }

    pub fn name(self) -> &'static str {
        self.kind().map_or("standard", PolicyKind::name)
    }
}

impl fmt::Display for PolicyChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "standard" {
            return Ok(PolicyChoice::Standard);
        }
        let kind: PolicyKind = s.parse()?;
        Ok(match kind {
            PolicyKind::Optimal => PolicyChoice::Optimal,
            PolicyKind::Equal => PolicyChoice::Equal,
            PolicyKind::Proportional => PolicyChoice::Proportional,
            PolicyKind::HardCutoff => PolicyChoice::HardCutoff,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub kind: ScenarioKind,
    #[serde(default = "default_policies")]
    pub policies: Vec<PolicyChoice>,
}

fn default_policies() -> Vec<PolicyChoice> {
    vec![PolicyChoice::Optimal]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    /// Memories per node.
    pub n: Vec<usize>,
    /// Link lengths per grid point: `[d_l, d_r]`, or `[d1, d2, d3]` for a chain.
    pub distances_km: Vec<Vec<f64>>,
    #[serde(default = "default_coherence")]
    pub coherence_time_s: Vec<f64>,
    #[serde(default = "default_fidelity")]
    pub initial_fidelity: Vec<f64>,
    #[serde(default = "default_attenuation")]
    pub attenuation_db_per_km: f64,
    #[serde(default = "default_light_speed")]
    pub light_speed_km_per_s: f64,
}

fn default_coherence() -> Vec<f64> {
    vec![f64::INFINITY]
}

fn default_fidelity() -> Vec<f64> {
    vec![1.0]
}

fn default_attenuation() -> f64 {
    DEFAULT_ATTENUATION_DB_PER_KM
}

fn default_light_speed() -> f64 {
    FIBER_LIGHT_SPEED_KM_PER_S
}

fn default_rounds() -> u64 {
    1_000_000
}

fn default_replications() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub seed: u64,
    /// Total rounds per run, warmup included; cycles for the sequential baseline.
    #[serde(default = "default_rounds")]
    pub rounds: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warmup: Option<u64>,
    #[serde(default = "default_replications")]
    pub replications: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub scenario: Scenario,
    pub grid: Grid,
}

/// One point of the parameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub n_memories: usize,
    pub distances_km: [f64; 3],
    pub links: usize,
    pub coherence_time_s: f64,
    pub initial_fidelity: f64,
    pub attenuation_db_per_km: f64,
    pub light_speed_km_per_s: f64,
}

impl GridPoint {
    pub fn single(&self, policy: PolicyKind) -> Result<RepeaterConfig> {
        let [d_l, d_r, _] = self.distances_km;
        let left = make_link(d_l, self.attenuation_db_per_km, self.light_speed_km_per_s)?;
        let right = make_link(d_r, self.attenuation_db_per_km, self.light_speed_km_per_s)?;
        let cfg = RepeaterConfig::from_links(self.n_memories, left, right, policy)
            .with_coherence_time(self.coherence_time_s)
            .with_initial_fidelity(self.initial_fidelity);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn chain(&self, policy: PolicyKind) -> Result<ChainConfig> {
        let cfg = ChainConfig {
            n_memories: self.n_memories,
            distances_km: self.distances_km,
            attenuation_db_per_km: self.attenuation_db_per_km,
            light_speed_km_per_s: self.light_speed_km_per_s,
            coherence_time_s: self.coherence_time_s,
            initial_fidelity: self.initial_fidelity,
            policy,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ExperimentSpec {
    /// A one-point spec: `N = 16` on 20/30 km links (20/30/20 km for a chain).
    pub fn example(kind: ScenarioKind) -> Self {
        let distances = match kind {
            ScenarioKind::Chain => vec![20.0, 30.0, 20.0],
            _ => vec![20.0, 30.0],
        };
        let policies = match kind {
            ScenarioKind::Standard => vec![PolicyChoice::Standard],
            _ => vec![PolicyChoice::Optimal],
        };
        ExperimentSpec {
            seed: 0,
            rounds: default_rounds(),
            warmup: None,
            replications: 1,
            output: None,
            scenario: Scenario { kind, policies },
            grid: Grid {
                n: vec![16],
                distances_km: vec![distances],
                coherence_time_s: default_coherence(),
                initial_fidelity: default_fidelity(),
                attenuation_db_per_km: DEFAULT_ATTENUATION_DB_PER_KM,
                light_speed_km_per_s: FIBER_LIGHT_SPEED_KM_PER_S,
            },
        }
    }

    pub fn warmup(&self) -> u64 {
        self.warmup.unwrap_or_else(|| default_warmup(self.rounds))
    }

    /// The spec with every default written out.
    pub fn effective(&self) -> Self {
        let mut spec = self.clone();
        spec.warmup = Some(self.warmup());
        spec
    }

    pub fn validate(&self) -> Result<()> {
        let kind = self.scenario.kind;
        let bad = |field: &str, msg: String| Err(Error::config(field, msg));
        if self.grid.n.is_empty() || self.grid.distances_km.is_empty() {
            return bad("grid", "grid must contain at least one N and one distance set".into());
        }
        if self.grid.coherence_time_s.is_empty() || self.grid.initial_fidelity.is_empty() {
            return bad("grid", "coherence_time_s and initial_fidelity must not be empty".into());
        }
        if self.scenario.policies.is_empty() {
            return bad("scenario.policies", "at least one policy is required".into());
        }
        if self.replications == 0 {
            return bad("replications", "must be at least 1".into());
        }
        let uses_warmup = self.scenario.policies.iter().any(|p| p.kind().is_some());
        if uses_warmup && self.rounds <= self.warmup() {
            return bad("rounds", format!("rounds ({}) must exceed warmup ({})", self.rounds, self.warmup()));
        }
        if self.rounds == 0 {
            return bad("rounds", "must be positive".into());
        }
        for (i, d) in self.grid.distances_km.iter().enumerate() {
            if d.len() != kind.links() {
                return bad(
                    &format!("grid.distances_km[{i}]"),
                    format!("{} scenario needs {} distances, got {}", kind.name(), kind.links(), d.len()),
                );
            }
        }
        for &p in &self.scenario.policies {
            let allowed = match kind {
                ScenarioKind::Standard => p == PolicyChoice::Standard,
                ScenarioKind::Chain => p != PolicyChoice::HardCutoff,
                ScenarioKind::Single => true,
            };
            if !allowed {
                return bad("scenario.policies", format!("policy `{p}` is not available for the {} scenario", kind.name()));
            }
        }
        for point in self.points() {
            let checked = match kind {
                ScenarioKind::Chain => point.chain(PolicyKind::Optimal).map(|_| ()),
                _ => point.single(PolicyKind::Optimal).map(|_| ()),
            };
            checked.map_err(|e| Error::config("grid", e.to_string()))?;
        }
        Ok(())
    }

    /// Grid points in a fixed order: N outermost, then distances, coherence
    /// time and initial fidelity.
    pub fn points(&self) -> Vec<GridPoint> {
        let g = &self.grid;
        let mut out = Vec::new();
        for &n in &g.n {
            for d in &g.distances_km {
                for &t_c in &g.coherence_time_s {
                    for &f0 in &g.initial_fidelity {
                        let mut distances_km = [f64::NAN; 3];
                        for (slot, &x) in distances_km.iter_mut().zip(d) {
                            *slot = x;
                        }
                        out.push(GridPoint {
                            n_memories: n,
                            distances_km,
                            links: d.len(),
                            coherence_time_s: t_c,
                            initial_fidelity: f0,
                            attenuation_db_per_km: g.attenuation_db_per_km,
                            light_speed_km_per_s: g.light_speed_km_per_s,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("<spec>", e.to_string()))
    }
}

/// Parses and validates a spec from TOML text; `origin` names the source in errors.
pub fn parse_config(text: &str, origin: &str) -> Result<ExperimentSpec> {
    let spec: ExperimentSpec = toml::from_str(text).map_err(|e| Error::config(origin, e.to_string().trim_end()))?;
    spec.validate().map_err(|e| match e {
        Error::Config { path, message } => Error::config(format!("{origin}: {path}"), message),
        other => other,
    })?;
    Ok(spec)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
    parse_config(&text, &path.display().to_string())
}
