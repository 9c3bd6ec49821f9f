//! Scenario file schema and conversion to the domain model.
//!
//! Scenarios are single JSON documents with explicit ids and from/to line
//! endpoints; unknown fields are rejected so golden files stay honest. A line
//! with `direction: "both"` expands to two one-sided constraints with
//! negated incidence rows.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use dermkt_core::{validate, CostSpec, Generator, Line, Network, Prosumer, Scenario, UtilitySpec};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub network: NetworkFile,
    #[serde(default)]
    pub prosumers: Vec<ProsumerFile>,
    #[serde(default)]
    pub generators: Vec<GeneratorFile>,
    /// One entry per node; omitted means all zeros.
    #[serde(default)]
    pub fixed_demand: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub nodes: usize,
    #[serde(default)]
    pub lines: Vec<LineFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineFile {
    pub from: usize,
    pub to: usize,
    pub capacity: f64,
    #[serde(default)]
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// One constraint on the from-to flow component.
    #[default]
    Forward,
    /// Symmetric limits: the line is expanded into two constraints with
    /// negated incidence rows.
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProsumerFile {
    pub id: String,
    pub node: usize,
    pub capacity: f64,
    /// Consumption cap; must exceed the capacity.
    pub z: f64,
    pub utility: UtilityFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum UtilityFile {
    Isoelastic { eta: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorFile {
    pub id: String,
    pub node: usize,
    pub cost: CostFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum CostFile {
    Quadratic {
        alpha: f64,
        beta: f64,
        y_min: f64,
        y_max: f64,
    },
}

impl ScenarioFile {
    pub fn to_scenario(&self) -> Result<Scenario, CliError> {
        let n = self.network.nodes;
        let mut lines = Vec::new();
        for (idx, line) in self.network.lines.iter().enumerate() {
            if line.from >= n || line.to >= n {
                return Err(CliError::Input(format!(
                    "line {idx}: endpoint out of range (nodes: {n})"
                )));
            }
            if line.from == line.to {
                return Err(CliError::Input(format!(
                    "line {idx}: from and to must differ"
                )));
            }
            let mut row = vec![0.0; n];
            row[line.from] = 1.0;
            row[line.to] = -1.0;
            match line.direction {
                Direction::Forward => lines.push(Line {
                    incidence_row: row,
                    capacity: line.capacity,
                }),
                Direction::Both => {
                    let negated: Vec<f64> = row.iter().map(|v| -v).collect();
                    lines.push(Line {
                        incidence_row: row,
                        capacity: line.capacity,
                    });
                    lines.push(Line {
                        incidence_row: negated,
                        capacity: line.capacity,
                    });
                }
            }
        }
        let mut fixed_demand = self.fixed_demand.clone();
        if fixed_demand.is_empty() {
            fixed_demand = vec![0.0; n];
        }
        Ok(Scenario {
            network: Network {
                node_count: n,
                lines,
            },
            prosumers: self
                .prosumers
                .iter()
                .map(|p| {
                    let UtilityFile::Isoelastic { eta } = p.utility;
                    Prosumer {
                        id: p.id.clone(),
                        node: p.node,
                        capacity: p.capacity,
                        consumption_cap: p.z,
                        utility: UtilitySpec::Isoelastic { eta },
                    }
                })
                .collect(),
            generators: self
                .generators
                .iter()
                .map(|g| {
                    let CostFile::Quadratic {
                        alpha,
                        beta,
                        y_min,
                        y_max,
                    } = g.cost;
                    Generator {
                        id: g.id.clone(),
                        node: g.node,
                        cost: CostSpec::Quadratic {
                            alpha,
                            beta,
                            y_min,
                            y_max,
                        },
                    }
                })
                .collect(),
            fixed_demand,
        })
    }

    /// Rebuilds the file form of a scenario whose incidence rows are single
    /// from/to pairs (as the generator produces). General hand-built rows
    /// are not representable and are rejected.
    pub fn from_scenario(scenario: &Scenario) -> Result<ScenarioFile, CliError> {
        let mut lines = Vec::new();
        for (idx, line) in scenario.network.lines.iter().enumerate() {
            let mut from = None;
            let mut to = None;
            for (i, v) in line.incidence_row.iter().enumerate() {
                match *v {
                    0.0 => {}
                    1.0 => {
                        if from.replace(i).is_some() {
                            return Err(CliError::Input(format!(
                                "line {idx}: incidence row is not a from/to pair"
                            )));
                        }
                    }
                    -1.0 => {
                        if to.replace(i).is_some() {
                            return Err(CliError::Input(format!(
                                "line {idx}: incidence row is not a from/to pair"
                            )));
                        }
                    }
                    _ => {
                        return Err(CliError::Input(format!(
                            "line {idx}: incidence row is not a from/to pair"
                        )))
                    }
                }
            }
            let (Some(from), Some(to)) = (from, to) else {
                return Err(CliError::Input(format!(
                    "line {idx}: incidence row is not a from/to pair"
                )));
            };
            lines.push(LineFile {
                from,
                to,
                capacity: line.capacity,
                direction: Direction::Forward,
            });
        }
        Ok(ScenarioFile {
            network: NetworkFile {
                nodes: scenario.network.node_count,
                lines,
            },
            prosumers: scenario
                .prosumers
                .iter()
                .map(|p| {
                    let UtilitySpec::Isoelastic { eta } = p.utility;
                    ProsumerFile {
                        id: p.id.clone(),
                        node: p.node,
                        capacity: p.capacity,
                        z: p.consumption_cap,
                        utility: UtilityFile::Isoelastic { eta },
                    }
                })
                .collect(),
            generators: scenario
                .generators
                .iter()
                .map(|g| {
                    let CostSpec::Quadratic {
                        alpha,
                        beta,
                        y_min,
                        y_max,
                    } = g.cost;
                    GeneratorFile {
                        id: g.id.clone(),
                        node: g.node,
                        cost: CostFile::Quadratic {
                            alpha,
                            beta,
                            y_min,
                            y_max,
                        },
                    }
                })
                .collect(),
            fixed_demand: scenario.fixed_demand.clone(),
        })
    }
}

/// Loads, parses, and validates a scenario file. Parse errors carry the
/// line/column context from the JSON parser; validation failures list every
/// violation.
pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let file: ScenarioFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("cannot parse {}: {e}", path.display())))?;
    let scenario = file.to_scenario()?;
    let violations = validate(&scenario);
    if !violations.is_empty() {
        return Err(CliError::Input(format!(
            "{} failed validation:\n  {}",
            path.display(),
            violations.join("\n  ")
        )));
    }
    Ok(scenario)
}

/// Serializes a scenario file to pretty JSON with a trailing newline.
pub fn to_json_string(file: &ScenarioFile) -> String {
    let mut text = serde_json::to_string_pretty(file).expect("scenario serializes");
    text.push('\n');
    text
}
