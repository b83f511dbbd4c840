//! Report assembly and the on-disk run directory.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::lane::{
    jam_onset_position, running_totals, write_lane_rows, write_series_rows, UtilityKind,
    UtilitySeries, LANE_RESULTS_HEADER, RUNNING_TOTALS_HEADER,
};
use crate::model::Category;
use crate::population::MixSpec;

use super::compare::{
    compare_archetype_pairs, compare_categories, comparisons_csv, split_by_category, ComparisonRow,
    Measure, COMPARISON_HEADER,
};
use super::config::{Scenario, ScenarioConfig};
use super::divergence::{divergence_csv, divergence_rows, DivergenceRow};
use super::run::{read_lane_results, ScenarioRun, UtilityRow};
use super::tables::{mean_utility_table, population_table, MeanUtilityTable, PopulationTable};
use super::RunError;

pub const POPULATION_FILE: &str = "population.csv";
pub const LANE_RESULTS_FILE: &str = "lane_results.csv";
pub const RUNNING_TOTALS_FILE: &str = "running_totals.csv";
pub const COMPARISONS_FILE: &str = "comparisons.csv";
pub const PAIRINGS_FILE: &str = "pairings.csv";
pub const DIVERGENCE_FILE: &str = "divergence.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Pairwise battery outcome; skipped when an archetype has fewer than two
/// followers (e.g. single-category scenarios).
#[derive(Debug, Clone, PartialEq)]
pub enum Pairings {
    Computed(Vec<ComparisonRow>),
    Skipped(String),
}

#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub run: ScenarioRun,
    pub population_table: PopulationTable,
    pub mean_utility_table: MeanUtilityTable,
    /// R against I within the run; empty when only one category is present.
    pub category_comparison: Vec<ComparisonRow>,
    pub archetype_pairings: Pairings,
    /// Cumulative expected utility of the first positions, one series per lane.
    pub running_totals: Vec<UtilitySeries>,
    pub divergence: Vec<DivergenceRow>,
}

impl ReportBundle {
    pub fn seed(&self) -> u64 {
        self.run.config.seed
    }
}

fn companion_run(run: &ScenarioRun, scenario: Scenario) -> Result<Option<ScenarioRun>, RunError> {
    if run.config.scenario == scenario {
        return Ok(None);
    }
    let fraction = scenario.preset_fraction().expect("companions are presets");
    if run.config.scenario == Scenario::Custom && run.mix.responsible_fraction() == fraction {
        return Ok(None);
    }
    ScenarioRun::simulate(&run.config.companion(scenario)).map(Some)
}

/// Simulates the scenario and computes every report. The divergence report
/// needs mixed, all-responsible and all-irresponsible runs; whichever of those
/// the scenario is not gets simulated with the same n, seed and parameters.
pub fn build_bundle(run: ScenarioRun) -> Result<ReportBundle, RunError> {
    let config = &run.config;
    let rows = run.rows();
    let (r, i) = split_by_category(&rows);
    let category_comparison = if r.is_empty() || i.is_empty() {
        Vec::new()
    } else {
        compare_categories("R", &r, "I", &i, config.seed, config.exact_cutoff)?
    };
    let archetype_pairings = match compare_archetype_pairs(&rows, config.seed, config.exact_cutoff)
    {
        Ok(rows) => Pairings::Computed(rows),
        Err(e @ RunError::InsufficientSample { .. }) => Pairings::Skipped(e.to_string()),
        Err(e) => return Err(e),
    };
    let running_totals = run
        .lanes
        .iter()
        .map(|lane| running_totals(lane, UtilityKind::Expected, config.running_total_positions))
        .collect();

    let mixed = companion_run(&run, Scenario::Mixed50)?;
    let all_r = companion_run(&run, Scenario::AllResponsible)?;
    let all_i = companion_run(&run, Scenario::AllIrresponsible)?;
    let divergence = divergence_rows(
        mixed.as_ref().unwrap_or(&run),
        all_r.as_ref().unwrap_or(&run),
        all_i.as_ref().unwrap_or(&run),
    )?;

    Ok(ReportBundle {
        population_table: population_table(&run.population),
        mean_utility_table: mean_utility_table(&rows, config.lane_count),
        category_comparison,
        archetype_pairings,
        running_totals,
        divergence,
        run,
    })
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<ReportBundle, RunError> {
    build_bundle(ScenarioRun::simulate(config)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    /// Lowercase hex SHA-256 of the file content.
    pub sha256: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn digest(&self, file_name: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.path.file_name().is_some_and(|n| n == file_name))
            .map(|e| e.sha256.as_str())
    }
}

impl fmt::Display for Manifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(f, "{}  {}", e.sha256, e.path.display())?;
        }
        Ok(())
    }
}

/// Writes files into one directory and records their digests.
pub(crate) struct RunDir {
    dir: PathBuf,
    manifest: Manifest,
}

impl RunDir {
    pub(crate) fn create(dir: &Path) -> Result<Self, RunError> {
        std::fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
        Ok(RunDir {
            dir: dir.to_path_buf(),
            manifest: Manifest::default(),
        })
    }

    pub(crate) fn write(&mut self, name: &str, content: &str) -> Result<(), RunError> {
        let path = self.dir.join(name);
        std::fs::write(&path, content).map_err(|e| RunError::io(&path, e))?;
        self.manifest.entries.push(ManifestEntry {
            path,
            sha256: hex::encode(Sha256::digest(content.as_bytes())),
        });
        Ok(())
    }

    pub(crate) fn finish(self) -> Manifest {
        self.manifest
    }
}

fn lane_results_csv(run: &ScenarioRun) -> String {
    let mut out = String::from(LANE_RESULTS_HEADER);
    out.push('\n');
    for (k, lane) in run.lanes.iter().enumerate() {
        write_lane_rows(&mut out, k + 1, lane);
    }
    out
}

fn running_totals_csv(series: &[UtilitySeries]) -> String {
    let mut out = String::from(RUNNING_TOTALS_HEADER);
    out.push('\n');
    for (k, s) in series.iter().enumerate() {
        write_series_rows(&mut out, k + 1, s);
    }
    out
}

#[derive(Serialize)]
struct ScenarioEcho<'a> {
    name: &'static str,
    n: usize,
    seed: u64,
    lane_count: usize,
    running_total_positions: usize,
    exact_cutoff: usize,
    mix: &'a MixSpec,
    params: &'a crate::model::ModelParams,
}

#[derive(Serialize)]
struct MeasureSummary {
    measure: &'static str,
    n: usize,
    mean: f64,
    sd: f64,
}

fn category_summaries(rows: &[UtilityRow]) -> serde_json::Value {
    let mut out = serde_json::Map::new();
    for category in Category::ALL {
        let sample: Vec<&UtilityRow> = rows.iter().filter(|r| r.category() == category).collect();
        let measures: Vec<MeasureSummary> = Measure::ALL
            .iter()
            .filter_map(|&m| {
                let values: Vec<f64> = sample.iter().map(|r| m.of(r)).collect();
                crate::stats::GroupSummary::from_sample(&values)
                    .ok()
                    .map(|s| MeasureSummary {
                        measure: m.name(),
                        n: s.n,
                        mean: s.mean,
                        sd: s.sd,
                    })
            })
            .collect();
        out.insert(category.symbol().to_string(), json!(measures));
    }
    serde_json::Value::Object(out)
}

fn summary_json(bundle: &ReportBundle) -> String {
    let run = &bundle.run;
    let config = &run.config;
    let lanes: Vec<_> = run
        .lanes
        .iter()
        .enumerate()
        .map(|(k, lane)| {
            json!({
                "lane": k + 1,
                "drivers": lane.len(),
                "total_expected": lane.total_expected,
                "total_adjusted": lane.total_adjusted,
                "total_final": lane.total_final,
                "jam_triggered": lane.jam_triggered,
                "jam_onset_position": jam_onset_position(lane),
            })
        })
        .collect();
    let comparisons = if bundle.category_comparison.is_empty() {
        "summary-only"
    } else {
        "computed"
    };
    let pairings = match &bundle.archetype_pairings {
        Pairings::Computed(rows) => json!({ "status": "computed", "rows": rows.len() }),
        Pairings::Skipped(reason) => json!({ "status": "skipped", "reason": reason }),
    };
    let derivable = bundle.divergence.iter().filter(|d| d.derivable).count();
    let doc = json!({
        "scenario": ScenarioEcho {
            name: config.scenario.name(),
            n: config.n,
            seed: config.seed,
            lane_count: config.lane_count,
            running_total_positions: config.running_total_positions,
            exact_cutoff: config.exact_cutoff,
            mix: &run.mix,
            params: &config.params,
        },
        "seed": config.seed,
        "population_table": bundle.population_table,
        "mean_utility_table": bundle.mean_utility_table,
        "lanes": lanes,
        "categories": category_summaries(&run.rows()),
        "comparisons": comparisons,
        "pairings": pairings,
        "divergence": { "cells": bundle.divergence.len(), "derivable": derivable },
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("summary is serializable");
    text.push('\n');
    text
}

fn pairings_csv(pairings: &Pairings) -> String {
    match pairings {
        Pairings::Computed(rows) => comparisons_csv(rows),
        Pairings::Skipped(_) => format!("{COMPARISON_HEADER}\n"),
    }
}

/// Writes the seven report files into `output_dir`.
pub fn emit_reports(bundle: &ReportBundle, output_dir: &Path) -> Result<Manifest, RunError> {
    let mut dir = RunDir::create(output_dir)?;
    dir.write(POPULATION_FILE, &bundle.run.population.to_csv())?;
    dir.write(LANE_RESULTS_FILE, &lane_results_csv(&bundle.run))?;
    dir.write(
        RUNNING_TOTALS_FILE,
        &running_totals_csv(&bundle.running_totals),
    )?;
    dir.write(
        COMPARISONS_FILE,
        &comparisons_csv(&bundle.category_comparison),
    )?;
    dir.write(PAIRINGS_FILE, &pairings_csv(&bundle.archetype_pairings))?;
    dir.write(DIVERGENCE_FILE, &divergence_csv(&bundle.divergence))?;
    dir.write(SUMMARY_FILE, &summary_json(bundle))?;
    Ok(dir.finish())
}

/// Scenario name and seed recorded in a run directory's summary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunInfo {
    pub scenario: String,
    pub seed: u64,
    pub exact_cutoff: usize,
}

pub fn read_run_info(run_dir: &Path) -> Result<RunInfo, RunError> {
    let path = run_dir.join(SUMMARY_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| RunError::io(&path, e))?;
    let malformed = |message: &str| RunError::MalformedInput {
        path: path.clone(),
        message: message.to_string(),
    };
    let doc: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| malformed(&e.to_string()))?;
    let scenario = doc["scenario"]["name"]
        .as_str()
        .ok_or_else(|| malformed("missing scenario.name"))?
        .to_string();
    let seed = doc["seed"]
        .as_u64()
        .ok_or_else(|| malformed("missing seed"))?;
    let exact_cutoff = doc["scenario"]["exact_cutoff"]
        .as_u64()
        .ok_or_else(|| malformed("missing scenario.exact_cutoff"))? as usize;
    Ok(RunInfo {
        scenario,
        seed,
        exact_cutoff,
    })
}

fn load_run(run_dir: &Path) -> Result<(RunInfo, Vec<UtilityRow>), RunError> {
    let info = read_run_info(run_dir)?;
    let rows = read_lane_results(&run_dir.join(LANE_RESULTS_FILE))?;
    Ok((info, rows))
}

/// Compares every driver of run A with every driver of run B and writes
/// comparisons.csv. When both runs come from the same scenario the labels get
/// an `a`/`b` suffix to keep them apart.
pub fn compare_runs(
    run_a: &Path,
    run_b: &Path,
    out: &Path,
) -> Result<(Vec<ComparisonRow>, Manifest), RunError> {
    let (info_a, rows_a) = load_run(run_a)?;
    let (info_b, rows_b) = load_run(run_b)?;
    let (label_a, label_b) = if info_a.scenario == info_b.scenario {
        (
            format!("{}-a", info_a.scenario),
            format!("{}-b", info_b.scenario),
        )
    } else {
        (info_a.scenario.clone(), info_b.scenario.clone())
    };
    let rows = compare_categories(
        &label_a,
        &rows_a,
        &label_b,
        &rows_b,
        info_a.seed,
        info_a.exact_cutoff,
    )?;
    let mut dir = RunDir::create(out)?;
    dir.write(COMPARISONS_FILE, &comparisons_csv(&rows))?;
    Ok((rows, dir.finish()))
}

/// Runs the 15-pair battery over a stored run and writes pairings.csv.
pub fn pairings_for_run(
    run: &Path,
    out: &Path,
) -> Result<(Vec<ComparisonRow>, Manifest), RunError> {
    let (info, rows) = load_run(run)?;
    let pairs = compare_archetype_pairs(&rows, info.seed, info.exact_cutoff)?;
    let mut dir = RunDir::create(out)?;
    dir.write(PAIRINGS_FILE, &comparisons_csv(&pairs))?;
    Ok((pairs, dir.finish()))
}
