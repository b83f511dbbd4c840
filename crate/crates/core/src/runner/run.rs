use std::path::Path;

use crate::lane::{evaluate_lane, LaneResult, LANE_RESULTS_HEADER};
use crate::model::{Archetype, Category};
use crate::population::{generate_population_with_lanes, MixSpec, Population};

use super::config::ScenarioConfig;
use super::RunError;

/// One evaluated driver, as stored in lane_results.csv.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityRow {
    pub lane: usize,
    pub position: usize,
    pub archetype: Archetype,
    pub u_expected: f64,
    pub u_adjusted: f64,
    pub u_final: f64,
}

impl UtilityRow {
    pub fn category(&self) -> Category {
        self.archetype.category()
    }

    pub fn is_lead(&self) -> bool {
        self.position == 1
    }
}

/// A generated population with every lane evaluated.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub config: ScenarioConfig,
    pub mix: MixSpec,
    pub population: Population,
    /// `lanes[k]` is lane `k + 1`.
    pub lanes: Vec<LaneResult>,
}

impl ScenarioRun {
    pub fn simulate(config: &ScenarioConfig) -> Result<Self, RunError> {
        config.validate()?;
        let mix = config.resolved_mix()?;
        let population =
            generate_population_with_lanes(config.n, &mix, config.seed, config.lane_count);
        let lanes = (1..=population.lane_count())
            .map(|lane| evaluate_lane(&population.lane_archetypes(lane), &config.params))
            .collect();
        Ok(ScenarioRun {
            config: config.clone(),
            mix,
            population,
            lanes,
        })
    }

    /// All drivers, lane by lane in position order.
    pub fn rows(&self) -> Vec<UtilityRow> {
        self.lanes
            .iter()
            .enumerate()
            .flat_map(|(k, lane)| {
                lane.records.iter().map(move |r| UtilityRow {
                    lane: k + 1,
                    position: r.position,
                    archetype: r.archetype,
                    u_expected: r.u_expected,
                    u_adjusted: r.u_adjusted,
                    u_final: r.u_final,
                })
            })
            .collect()
    }
}

fn malformed(path: &Path, line: usize, message: impl std::fmt::Display) -> RunError {
    RunError::MalformedInput {
        path: path.to_path_buf(),
        message: format!("line {line}: {message}"),
    }
}

/// Parses lane_results.csv content.
pub fn parse_lane_results(text: &str, path: &Path) -> Result<Vec<UtilityRow>, RunError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == LANE_RESULTS_HEADER => {}
        _ => return Err(malformed(path, 1, "unexpected header")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(malformed(path, lineno, "expected 7 fields"));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|e| malformed(path, lineno, e));
        let real = |s: &str| s.parse::<f64>().map_err(|e| malformed(path, lineno, e));
        let archetype: Archetype = fields[2].parse().map_err(|e| malformed(path, lineno, e))?;
        rows.push(UtilityRow {
            lane: int(fields[0])?,
            position: int(fields[1])?,
            archetype,
            u_expected: real(fields[4])?,
            u_adjusted: real(fields[5])?,
            u_final: real(fields[6])?,
        });
    }
    Ok(rows)
}

pub fn read_lane_results(path: &Path) -> Result<Vec<UtilityRow>, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
    parse_lane_results(&text, path)
}
