//! Run configuration: a TOML document describing agents, the reference
//! model, invariant-set parameters, the graph schedule and initial
//! conditions. The schema is documented in `docs/config-schema.md`; two
//! built-in scenarios ship embedded in the binary.

use nalgebra::{DMatrix, DVector, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{Edge, GraphSchedule, NetworkError, Switching, WeightedDigraph};
use crate::polytope::{HPolytope, PolytopeError};
use crate::regulator::{AgentModel, ModelError, ReferenceModel};

pub const BUILTIN_SCENARIO_1: &str = "paper-s1";
pub const BUILTIN_SCENARIO_2: &str = "paper-s2";

const SCENARIO_1_TOML: &str = include_str!("../scenarios/paper-s1.toml");
const SCENARIO_2_TOML: &str = include_str!("../scenarios/paper-s2.toml");

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("TOML parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("TOML serialize error: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("unknown built-in scenario {0:?} (available: paper-s1, paper-s2)")]
    UnknownBuiltin(String),
    #[error("agent {agent}: {what} must be {expected}, got {got}")]
    BadShape {
        agent: String,
        what: &'static str,
        expected: String,
        got: String,
    },
    #[error("agent {agent}: matrix {what} has ragged rows")]
    RaggedMatrix { agent: String, what: &'static str },
    #[error("no agents configured")]
    NoAgents,
    #[error("graph step {step}: edge endpoint {endpoint} out of 1..={agents}")]
    EdgeEndpoint {
        step: usize,
        endpoint: usize,
        agents: usize,
    },
    #[error("invariant-set parameters need 0 < delta < epsilon < 1, got epsilon={epsilon}, delta={delta}")]
    BadTightening { epsilon: f64, delta: f64 },
    #[error("agent {agent}: model rejected: {source}")]
    Model {
        agent: String,
        source: ModelError,
    },
    #[error("input polytope: {0}")]
    Polytope(#[from] PolytopeError),
    #[error("graph schedule: {0}")]
    Network(#[from] NetworkError),
    #[error("entry {what} is not finite")]
    NonFinite { what: String },
}

/// Mirror of the TOML document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub horizon: usize,
    pub reference: ReferenceConfig,
    #[serde(default)]
    pub mcai: McaiConfig,
    pub graph: GraphConfig,
    pub agents: Vec<AgentConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    /// Reference step (the sampling period of the underlying systems).
    pub h: f64,
    /// Output map, one row per output, two columns.
    pub q: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McaiConfig {
    /// Steady-state constraint truncation.
    pub epsilon: f64,
    /// Governor gate tightening, strictly below epsilon.
    pub delta: f64,
    /// Cap on the constraint-accumulation horizon.
    pub max_horizon: usize,
}

impl Default for McaiConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            delta: 0.005,
            max_horizon: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    /// Connectivity window length; unions are taken over `[t, t+window]`.
    pub window: usize,
    #[serde(default = "default_weight_floor")]
    pub weight_floor: f64,
    /// Graph snapshots, cycled in order unless `timeline` is given.
    pub steps: Vec<GraphStepConfig>,
    /// Optional explicit switching order (1-indexed into `steps`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeline: Option<Vec<usize>>,
}

fn default_weight_floor() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphStepConfig {
    /// `[i, j, a_ij]` triples, 1-indexed: agent `i` listens to agent `j`.
    pub edges: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub name: String,
    /// Row-major state matrix.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    /// Optional pre-designed feedback gain; synthesized when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<Vec<f64>>>,
    pub input: InputConfig,
    pub x0: Vec<f64>,
    pub omega0: [f64; 2],
}

/// Input constraint set: either a box or explicit halfspace rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum InputConfig {
    Box { min: Vec<f64>, max: Vec<f64> },
    Rows { rows: Vec<Vec<f64>>, rhs: Vec<f64> },
}

/// Load one of the scenarios embedded in the binary.
pub fn builtin_config(name: &str) -> Result<RunConfig, ConfigError> {
    match name {
        BUILTIN_SCENARIO_1 => RunConfig::from_toml(SCENARIO_1_TOML),
        BUILTIN_SCENARIO_2 => RunConfig::from_toml(SCENARIO_2_TOML),
        other => Err(ConfigError::UnknownBuiltin(other.to_string())),
    }
}

pub fn builtin_names() -> &'static [&'static str] {
    &[BUILTIN_SCENARIO_1, BUILTIN_SCENARIO_2]
}

fn to_matrix(
    agent: &str,
    what: &'static str,
    rows: &[Vec<f64>],
) -> Result<DMatrix<f64>, ConfigError> {
    if rows.is_empty() {
        return Err(ConfigError::BadShape {
            agent: agent.to_string(),
            what,
            expected: "at least one row".into(),
            got: "0 rows".into(),
        });
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(ConfigError::RaggedMatrix {
            agent: agent.to_string(),
            what,
        });
    }
    let m = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    if m.iter().any(|v| !v.is_finite()) {
        return Err(ConfigError::NonFinite {
            what: format!("{agent}.{what}"),
        });
    }
    Ok(m)
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String, ConfigError> {
        Ok(toml::to_string_pretty(self)?)
    }

    /// Schema-level validation: shapes, finiteness, index ranges.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.agents.is_empty() {
            return Err(ConfigError::NoAgents);
        }
        if !(self.mcai.delta > 0.0
            && self.mcai.delta < self.mcai.epsilon
            && self.mcai.epsilon < 1.0)
        {
            return Err(ConfigError::BadTightening {
                epsilon: self.mcai.epsilon,
                delta: self.mcai.delta,
            });
        }
        for a in &self.agents {
            let n = a.a.len();
            let am = to_matrix(&a.name, "a", &a.a)?;
            if am.ncols() != n {
                return Err(ConfigError::BadShape {
                    agent: a.name.clone(),
                    what: "a",
                    expected: format!("{n}x{n}"),
                    got: format!("{}x{}", am.nrows(), am.ncols()),
                });
            }
            let bm = to_matrix(&a.name, "b", &a.b)?;
            if bm.nrows() != n {
                return Err(ConfigError::BadShape {
                    agent: a.name.clone(),
                    what: "b",
                    expected: format!("{n} rows"),
                    got: format!("{} rows", bm.nrows()),
                });
            }
            let cm = to_matrix(&a.name, "c", &a.c)?;
            if cm.ncols() != n {
                return Err(ConfigError::BadShape {
                    agent: a.name.clone(),
                    what: "c",
                    expected: format!("{n} columns"),
                    got: format!("{} columns", cm.ncols()),
                });
            }
            if let Some(k) = &a.k {
                let km = to_matrix(&a.name, "k", k)?;
                if km.nrows() != bm.ncols() || km.ncols() != n {
                    return Err(ConfigError::BadShape {
                        agent: a.name.clone(),
                        what: "k",
                        expected: format!("{}x{n}", bm.ncols()),
                        got: format!("{}x{}", km.nrows(), km.ncols()),
                    });
                }
            }
            if a.x0.len() != n {
                return Err(ConfigError::BadShape {
                    agent: a.name.clone(),
                    what: "x0",
                    expected: format!("{n} entries"),
                    got: format!("{} entries", a.x0.len()),
                });
            }
            if a.x0.iter().chain(a.omega0.iter()).any(|v| !v.is_finite()) {
                return Err(ConfigError::NonFinite {
                    what: format!("{}.x0/omega0", a.name),
                });
            }
        }
        let n_agents = self.agents.len();
        for (si, step) in self.graph.steps.iter().enumerate() {
            for (i, j, _) in &step.edges {
                for endpoint in [i, j] {
                    if *endpoint == 0 || *endpoint > n_agents {
                        return Err(ConfigError::EdgeEndpoint {
                            step: si + 1,
                            endpoint: *endpoint,
                            agents: n_agents,
                        });
                    }
                }
            }
        }
        if let Some(tl) = &self.graph.timeline {
            for idx in tl {
                if *idx == 0 || *idx > self.graph.steps.len() {
                    return Err(ConfigError::EdgeEndpoint {
                        step: 0,
                        endpoint: *idx,
                        agents: self.graph.steps.len(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Build the validated agent models and the shared reference model.
    pub fn build_models(&self) -> Result<(Vec<AgentModel>, ReferenceModel), ConfigError> {
        let q = to_matrix("reference", "q", &self.reference.q)?;
        let reference = ReferenceModel::new(self.reference.h, q).map_err(|source| {
            ConfigError::Model {
                agent: "reference".into(),
                source,
            }
        })?;
        let mut agents = Vec::with_capacity(self.agents.len());
        for a in &self.agents {
            let am = to_matrix(&a.name, "a", &a.a)?;
            let bm = to_matrix(&a.name, "b", &a.b)?;
            let cm = to_matrix(&a.name, "c", &a.c)?;
            let km = a.k.as_ref().map(|k| to_matrix(&a.name, "k", k)).transpose()?;
            let input = match &a.input {
                InputConfig::Box { min, max } => HPolytope::from_bounds(min, max)?,
                InputConfig::Rows { rows, rhs } => {
                    let g = to_matrix(&a.name, "input.rows", rows)?;
                    HPolytope::new(g, DVector::from_vec(rhs.clone()))?
                }
            };
            agents.push(
                AgentModel::new(am, bm, cm, input, km).map_err(|source| ConfigError::Model {
                    agent: a.name.clone(),
                    source,
                })?,
            );
        }
        Ok((agents, reference))
    }

    /// Build the switching schedule (0-indexed internally).
    pub fn build_schedule(&self) -> Result<GraphSchedule, ConfigError> {
        let n = self.agents.len();
        let mut graphs = Vec::with_capacity(self.graph.steps.len());
        for step in &self.graph.steps {
            let edges = step
                .edges
                .iter()
                .map(|(i, j, w)| Edge {
                    node: i - 1,
                    neighbor: j - 1,
                    weight: *w,
                })
                .collect();
            graphs.push(WeightedDigraph::new(n, edges, self.graph.weight_floor)?);
        }
        let switching = match &self.graph.timeline {
            Some(tl) => Switching::Timeline(tl.iter().map(|i| i - 1).collect()),
            None => Switching::Cyclic,
        };
        Ok(GraphSchedule::new(
            graphs,
            switching,
            self.graph.window,
            self.graph.weight_floor,
        )?)
    }

    pub fn initial_states(&self) -> Vec<DVector<f64>> {
        self.agents
            .iter()
            .map(|a| DVector::from_vec(a.x0.clone()))
            .collect()
    }

    pub fn initial_references(&self) -> Vec<Vector2<f64>> {
        self.agents
            .iter()
            .map(|a| Vector2::new(a.omega0[0], a.omega0[1]))
            .collect()
    }

    pub fn agent_names(&self) -> Vec<String> {
        self.agents.iter().map(|a| a.name.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse_and_validate() {
        for name in builtin_names() {
            let cfg = builtin_config(name).unwrap();
            assert_eq!(cfg.agents.len(), 4);
            assert_eq!(cfg.reference.h, 0.37);
            let (agents, reference) = cfg.build_models().unwrap();
            assert_eq!(agents.len(), 4);
            assert_eq!(reference.q.nrows(), 1);
            let sched = cfg.build_schedule().unwrap();
            assert_eq!(sched.period(), 4);
        }
    }

    #[test]
    fn scenarios_differ_only_in_agent3_start() {
        let s1 = builtin_config(BUILTIN_SCENARIO_1).unwrap();
        let s2 = builtin_config(BUILTIN_SCENARIO_2).unwrap();
        assert_eq!(s1.agents[2].x0, vec![35.0, -0.3, 0.22]);
        assert_eq!(s2.agents[2].x0, vec![47.0, -45.0, -32.0]);
        for i in [0usize, 1, 3] {
            assert_eq!(s1.agents[i].x0, s2.agents[i].x0);
        }
        assert_eq!(s1.graph, s2.graph);
    }

    #[test]
    fn toml_round_trip_is_equivalent() {
        let cfg = builtin_config(BUILTIN_SCENARIO_1).unwrap();
        let text = cfg.to_toml().unwrap();
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_builtin_rejected() {
        assert!(matches!(
            builtin_config("paper-s3"),
            Err(ConfigError::UnknownBuiltin(_))
        ));
    }

    #[test]
    fn bad_tightening_rejected() {
        let mut cfg = builtin_config(BUILTIN_SCENARIO_1).unwrap();
        cfg.mcai.delta = cfg.mcai.epsilon;
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::BadTightening { .. })
        ));
    }

    #[test]
    fn ragged_matrix_rejected() {
        let mut cfg = builtin_config(BUILTIN_SCENARIO_1).unwrap();
        cfg.agents[0].a[1] = vec![0.0];
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::RaggedMatrix { .. })
        ));
    }

    #[test]
    fn out_of_range_edge_rejected() {
        let mut cfg = builtin_config(BUILTIN_SCENARIO_1).unwrap();
        cfg.graph.steps[0].edges.push((5, 1, 0.4));
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::EdgeEndpoint { .. })
        ));
    }
}
