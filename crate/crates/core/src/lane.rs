//! Single-lane evaluation: expected, adjusted and jam-capped utilities.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::{
    adjusted_utility, baseline_utility, expected_utility_pair, Archetype, ModelParams,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriverUtility {
    pub position: usize,
    pub archetype: Archetype,
    pub u_expected: f64,
    pub u_adjusted: f64,
    pub u_final: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaneResult {
    pub records: Vec<DriverUtility>,
    pub total_expected: f64,
    /// Sum of adjusted utilities; the jam test is applied to this value.
    pub total_adjusted: f64,
    pub total_final: f64,
    pub jam_triggered: bool,
}

impl LaneResult {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityKind {
    Expected,
    Adjusted,
    Final,
}

impl UtilityKind {
    pub fn of(self, record: &DriverUtility) -> f64 {
        match self {
            UtilityKind::Expected => record.u_expected,
            UtilityKind::Adjusted => record.u_adjusted,
            UtilityKind::Final => record.u_final,
        }
    }
}

/// Prefix sums of one utility kind, as `(position, cumulative)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilitySeries {
    pub kind: UtilityKind,
    pub points: Vec<(usize, f64)>,
}

/// Evaluates a lane given its archetypes in position order.
///
/// The lead gets its baseline as expected utility and zero adjusted utility.
/// Each follower's expected utility is the pair value against the driver ahead,
/// less the mismatch penalty when categories differ. The jam rule is applied
/// once, after the whole lane has been summed: if the adjusted total is at or
/// below the threshold, every final utility is `min(adjusted, 0)`.
pub fn evaluate_lane(archetypes: &[Archetype], params: &ModelParams) -> LaneResult {
    let mut records = Vec::with_capacity(archetypes.len());
    for (i, &archetype) in archetypes.iter().enumerate() {
        let (u_expected, u_adjusted) = match i {
            0 => (baseline_utility(archetype.category(), params), 0.0),
            _ => {
                let lead = archetypes[i - 1];
                let u_e = expected_utility_pair(lead.category(), archetype.category(), params);
                (u_e, adjusted_utility(lead, archetype, u_e, params))
            }
        };
        records.push(DriverUtility {
            position: i + 1,
            archetype,
            u_expected,
            u_adjusted,
            u_final: u_adjusted,
        });
    }

    let total_expected = records.iter().map(|r| r.u_expected).sum();
    let total_adjusted: f64 = records.iter().map(|r| r.u_adjusted).sum();
    let jam_triggered = total_adjusted <= params.jam_threshold;
    if jam_triggered {
        for r in &mut records {
            r.u_final = r.u_adjusted.min(0.0);
        }
    }
    let total_final = records.iter().map(|r| r.u_final).sum();

    LaneResult {
        records,
        total_expected,
        total_adjusted,
        total_final,
        jam_triggered,
    }
}

pub fn running_totals(
    result: &LaneResult,
    kind: UtilityKind,
    max_positions: usize,
) -> UtilitySeries {
    let mut acc = 0.0;
    let points = result
        .records
        .iter()
        .take(max_positions)
        .map(|r| {
            acc += kind.of(r);
            (r.position, acc)
        })
        .collect();
    UtilitySeries { kind, points }
}

/// First position at which cumulative expected utility is at or below zero.
pub fn jam_onset_position(result: &LaneResult) -> Option<usize> {
    let mut acc = 0.0;
    result.records.iter().find_map(|r| {
        acc += r.u_expected;
        (acc <= 0.0).then_some(r.position)
    })
}

pub const LANE_RESULTS_HEADER: &str =
    "lane,position,archetype,category,u_expected,u_adjusted,u_final";
pub const RUNNING_TOTALS_HEADER: &str = "lane,position,cumulative";

/// Appends the rows of `result` (lane id `lane`) in lane_results.csv layout.
pub fn write_lane_rows(out: &mut String, lane: usize, result: &LaneResult) {
    for r in &result.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            lane,
            r.position,
            r.archetype.name(),
            r.archetype.category().symbol(),
            r.u_expected,
            r.u_adjusted,
            r.u_final
        );
    }
}

pub fn write_series_rows(out: &mut String, lane: usize, series: &UtilitySeries) {
    for (position, value) in &series.points {
        let _ = writeln!(out, "{lane},{position},{value}");
    }
}
