//! Descriptive tables: drivers by lane and mean final utility by category.

use serde::Serialize;

use crate::model::{Archetype, Category};
use crate::population::Population;

use super::run::UtilityRow;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountRow {
    pub label: String,
    /// Indexed by lane - 1.
    pub lane_counts: Vec<usize>,
    pub total: usize,
    /// Share of the whole population in each lane.
    pub lane_shares: Vec<f64>,
    pub total_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PopulationTable {
    pub n: usize,
    /// Alphabetical by archetype label.
    pub rows: Vec<CountRow>,
    pub totals: CountRow,
}

impl PopulationTable {
    pub fn row(&self, archetype: Archetype) -> &CountRow {
        self.rows
            .iter()
            .find(|r| r.label == archetype.label())
            .expect("every archetype has a row")
    }
}

fn share(count: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        count as f64 / n as f64
    }
}

fn count_row(label: &str, lane_counts: Vec<usize>, n: usize) -> CountRow {
    let total = lane_counts.iter().sum();
    CountRow {
        label: label.to_string(),
        lane_shares: lane_counts.iter().map(|&c| share(c, n)).collect(),
        lane_counts,
        total,
        total_share: share(total, n),
    }
}

pub fn population_table(pop: &Population) -> PopulationTable {
    let n = pop.len();
    let counts = pop.lane_counts();
    let mut archetypes = Archetype::ALL;
    archetypes.sort_by_key(|a| a.label());
    let rows = archetypes
        .iter()
        .map(|a| {
            let per_lane = counts.iter().map(|c| c[a.code() as usize]).collect();
            count_row(a.label(), per_lane, n)
        })
        .collect();
    let totals = count_row("Total", pop.lanes.iter().map(Vec::len).collect(), n);
    PopulationTable { n, rows, totals }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanRow {
    pub category: Category,
    pub label: String,
    /// Mean final utility per lane; `None` when the lane has no such drivers.
    pub lane_means: Vec<Option<f64>>,
    pub overall_mean: Option<f64>,
    pub lane_counts: Vec<usize>,
    pub overall_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanUtilityTable {
    /// Irresponsible first, then Responsible.
    pub rows: Vec<MeanRow>,
}

impl MeanUtilityTable {
    pub fn row(&self, category: Category) -> &MeanRow {
        self.rows
            .iter()
            .find(|r| r.category == category)
            .expect("both categories present")
    }
}

pub fn mean_utility_table(rows: &[UtilityRow], lane_count: usize) -> MeanUtilityTable {
    let mut out = Vec::with_capacity(2);
    for category in [Category::Irresponsible, Category::Responsible] {
        let mut sums = vec![0.0; lane_count];
        let mut counts = vec![0usize; lane_count];
        for r in rows.iter().filter(|r| r.category() == category) {
            sums[r.lane - 1] += r.u_final;
            counts[r.lane - 1] += 1;
        }
        let mean = |s: f64, c: usize| (c > 0).then(|| s / c as f64);
        let total: f64 = sums.iter().sum();
        let overall_count: usize = counts.iter().sum();
        out.push(MeanRow {
            category,
            label: category.label().to_string(),
            lane_means: sums
                .iter()
                .zip(&counts)
                .map(|(&s, &c)| mean(s, c))
                .collect(),
            overall_mean: mean(total, overall_count),
            lane_counts: counts,
            overall_count,
        });
    }
    MeanUtilityTable { rows: out }
}
