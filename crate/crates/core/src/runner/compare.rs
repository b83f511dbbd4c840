//! Group comparisons behind the Mann-Whitney report tables.

use std::fmt::Write as _;

use crate::model::{Archetype, Category};
use crate::stats::{csv_p, effect_sizes, mann_whitney_u, EffectSizes, GroupSummary, MwuResult};

use super::run::UtilityRow;
use super::RunError;

/// Per-driver quantity compared between groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    /// Post-adjustment expected utility (u^A).
    ExpectedUtility,
    /// Pre-penalty pair value, or the baseline for leads (u^E).
    OriginalPayoff,
    /// Utility after the jam cap (u^final).
    FinalUtility,
}

impl Measure {
    pub const ALL: [Measure; 3] = [
        Measure::ExpectedUtility,
        Measure::OriginalPayoff,
        Measure::FinalUtility,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::ExpectedUtility => "expected_utility",
            Measure::OriginalPayoff => "original_payoff",
            Measure::FinalUtility => "final_utility",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Measure::ExpectedUtility => "Expected Utility",
            Measure::OriginalPayoff => "Original Payoff",
            Measure::FinalUtility => "Final Utility",
        }
    }

    pub fn of(self, row: &UtilityRow) -> f64 {
        match self {
            Measure::ExpectedUtility => row.u_adjusted,
            Measure::OriginalPayoff => row.u_expected,
            Measure::FinalUtility => row.u_final,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub group_a: String,
    pub group_b: String,
    pub measure: Measure,
    pub summary_a: GroupSummary,
    pub summary_b: GroupSummary,
    pub mwu: MwuResult,
    pub effects: EffectSizes,
    pub seed: u64,
}

impl ComparisonRow {
    pub fn mean_diff(&self) -> f64 {
        self.summary_a.mean - self.summary_b.mean
    }
}

pub const COMPARISON_HEADER: &str = "group_a,group_b,n_a,n_b,mean_a,mean_b,mean_diff,u1,u2,u_max,z,p_two_sided,cohens_d,r_z,r_rank_biserial,method";

pub fn comparisons_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(COMPARISON_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.group_a,
            r.group_b,
            r.summary_a.n,
            r.summary_b.n,
            r.summary_a.mean,
            r.summary_b.mean,
            r.mean_diff(),
            r.mwu.u1,
            r.mwu.u2,
            r.mwu.u_max,
            r.mwu.z,
            csv_p(r.mwu.p_two_sided),
            r.effects.cohens_d,
            r.effects.r_z,
            r.effects.r_rank_biserial,
            r.mwu.method.as_str()
        );
    }
    out
}

fn group_label(group: &str, measure: Measure) -> String {
    format!("{group}:{}", measure.name())
}

/// Compares two raw samples of one measure.
pub fn compare_samples(
    group_a: &str,
    a: &[f64],
    group_b: &str,
    b: &[f64],
    measure: Measure,
    seed: u64,
    exact_cutoff: usize,
) -> Result<ComparisonRow, RunError> {
    let summary_a = GroupSummary::from_sample(a)?;
    let summary_b = GroupSummary::from_sample(b)?;
    let mwu = mann_whitney_u(a, b, exact_cutoff)?;
    let effects = effect_sizes(&mwu, &summary_a, &summary_b)?;
    Ok(ComparisonRow {
        group_a: group_label(group_a, measure),
        group_b: group_label(group_b, measure),
        measure,
        summary_a,
        summary_b,
        mwu,
        effects,
        seed,
    })
}

/// One row per [`Measure`], group A against group B. Used both within a run
/// (R drivers vs I drivers) and across runs (all drivers of each).
pub fn compare_categories(
    label_a: &str,
    rows_a: &[UtilityRow],
    label_b: &str,
    rows_b: &[UtilityRow],
    seed: u64,
    exact_cutoff: usize,
) -> Result<Vec<ComparisonRow>, RunError> {
    Measure::ALL
        .iter()
        .map(|&m| {
            let a: Vec<f64> = rows_a.iter().map(|r| m.of(r)).collect();
            let b: Vec<f64> = rows_b.iter().map(|r| m.of(r)).collect();
            compare_samples(label_a, &a, label_b, &b, m, seed, exact_cutoff)
        })
        .collect()
}

/// Within-run split into (responsible, irresponsible) rows.
pub fn split_by_category(rows: &[UtilityRow]) -> (Vec<UtilityRow>, Vec<UtilityRow>) {
    rows.iter()
        .partition(|r| r.category() == Category::Responsible)
}

/// Archetypes in the order pairings are reported (alphabetical by label).
pub fn pairing_order() -> [Archetype; 6] {
    let mut order = Archetype::ALL;
    order.sort_by_key(|a| a.label());
    order
}

/// All 15 unordered archetype pairs compared on follower expected utility.
pub fn compare_archetype_pairs(
    rows: &[UtilityRow],
    seed: u64,
    exact_cutoff: usize,
) -> Result<Vec<ComparisonRow>, RunError> {
    let measure = Measure::ExpectedUtility;
    let order = pairing_order();
    let samples: Vec<Vec<f64>> = order
        .iter()
        .map(|&a| {
            rows.iter()
                .filter(|r| !r.is_lead() && r.archetype == a)
                .map(|r| measure.of(r))
                .collect()
        })
        .collect();
    for (a, s) in order.iter().zip(&samples) {
        if s.len() < 2 {
            return Err(RunError::InsufficientSample {
                archetype: *a,
                count: s.len(),
            });
        }
    }
    let mut out = Vec::with_capacity(15);
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            out.push(compare_samples(
                order[i].name(),
                &samples[i],
                order[j].name(),
                &samples[j],
                measure,
                seed,
                exact_cutoff,
            )?);
        }
    }
    Ok(out)
}
