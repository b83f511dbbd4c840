//! Published reference values next to what the model actually produces.
//!
//! Three published tables are covered: mean final utility by category and lane
//! in the mixed scenario, the within-run R vs I comparison in the mixed
//! scenario, and the cross-run all-R vs all-I comparison. Each numeric cell
//! becomes one row with a verdict on whether the model reproduces it.

use std::fmt::Write as _;

use crate::model::Category;

use super::compare::{compare_categories, split_by_category, ComparisonRow, Measure};
use super::run::ScenarioRun;
use super::tables::mean_utility_table;
use super::RunError;

pub const MEAN_TABLE: &str = "mean_final_utility_by_lane";
pub const MIXED_TABLE: &str = "mixed_scenario_comparison";
pub const HOMOGENEOUS_TABLE: &str = "homogeneous_scenario_comparison";

pub const DIVERGENCE_HEADER: &str =
    "table,row,column,paper_value,implementation_value,derivable_from_formal_model,seed,note";

/// Published cell value. `Below(x)` is a printed "< x".
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PublishedValue {
    Number(f64),
    Below(f64),
}

impl PublishedValue {
    fn render(self) -> String {
        match self {
            PublishedValue::Number(v) => format!("{v}"),
            PublishedValue::Below(v) => format!("<{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CellKind {
    Mean,
    Count,
    UStatistic,
    PValue,
    CohensD,
    EffectR,
}

const MEAN_TOLERANCE: f64 = 0.01;
const COUNT_SIGMAS: f64 = 4.0;
const U_RELATIVE_TOLERANCE: f64 = 0.01;
const D_RELATIVE_TOLERANCE: f64 = 0.05;
const R_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceRow {
    pub table: &'static str,
    pub row: String,
    pub column: String,
    pub paper_value: PublishedValue,
    /// `None` when the model has no value for the cell (e.g. an empty group).
    pub implementation_value: Option<f64>,
    pub derivable: bool,
    pub seed: u64,
    pub note: String,
}

const MEAN_COLUMNS: [&str; 8] = [
    "Lane 1",
    "Lane 2",
    "Lane 3",
    "Overall",
    "Lane 1 count",
    "Lane 2 count",
    "Lane 3 count",
    "Overall count",
];

const PUBLISHED_MEANS: [(Category, [f64; 8]); 2] = [
    (
        Category::Irresponsible,
        [
            -0.2041, -0.2824, -0.2821, -0.2444, 120971.0, 64520.0, 64509.0, 250000.0,
        ],
    ),
    (
        Category::Responsible,
        [
            -0.3978, -0.3596, -0.3592, -0.3722, 83560.0, 83121.0, 83319.0, 250000.0,
        ],
    ),
];

const COMPARISON_COLUMNS: [&str; 7] = [
    "R Mean",
    "I Mean",
    "Mean Difference",
    "U Statistic",
    "P Value",
    "Cohen's d",
    "Effect Size r",
];

/// (measure, R mean, I mean, mean difference, U, d, r); p is printed "< 0.001".
type PublishedComparison = (Measure, [f64; 6]);

const PUBLISHED_MIXED: [PublishedComparison; 3] = [
    (
        Measure::ExpectedUtility,
        [-0.127, 0.128, -0.256, 7.47e9, -2.039, 0.659],
    ),
    (
        Measure::OriginalPayoff,
        [2.999, -0.007, 3.007, 6.25e10, 51.815, 0.866],
    ),
    (
        Measure::FinalUtility,
        [-0.372, -0.244, -0.128, 2.31e10, -0.647, 0.226],
    ),
];

const PUBLISHED_HOMOGENEOUS: [PublishedComparison; 3] = [
    (
        Measure::ExpectedUtility,
        [-0.090, -1.470, 1.380, 2.5e11, 28.555, 1.000],
    ),
    (
        Measure::OriginalPayoff,
        [0.000, -1.000, 1.000, 2.5e11, 258.198, 1.000],
    ),
    (
        Measure::FinalUtility,
        [-0.090, -1.470, 1.380, 2.5e11, 29.392, 1.000],
    ),
];

const PUBLISHED_P_BOUND: f64 = 0.001;

fn matches(kind: CellKind, reference: PublishedValue, value: f64) -> bool {
    match (kind, reference) {
        (CellKind::PValue, PublishedValue::Below(bound)) => value < bound,
        (_, PublishedValue::Below(_)) => false,
        (CellKind::Mean, PublishedValue::Number(p)) => (value - p).abs() <= MEAN_TOLERANCE,
        (CellKind::Count, PublishedValue::Number(p)) => {
            (value - p).abs() <= COUNT_SIGMAS * p.max(1.0).sqrt()
        }
        (CellKind::UStatistic, PublishedValue::Number(p)) => {
            (value - p).abs() <= U_RELATIVE_TOLERANCE * p.abs()
        }
        (CellKind::CohensD, PublishedValue::Number(p)) => {
            (value - p).abs() <= D_RELATIVE_TOLERANCE * p.abs()
        }
        (CellKind::EffectR | CellKind::PValue, PublishedValue::Number(p)) => {
            (value - p).abs() <= R_TOLERANCE
        }
    }
}

fn mean_rows(mixed: &ScenarioRun, out: &mut Vec<DivergenceRow>) {
    let table = mean_utility_table(&mixed.rows(), mixed.config.lane_count);
    for (category, published) in PUBLISHED_MEANS {
        let row = table.row(category);
        for (col, (&reference, column)) in published.iter().zip(MEAN_COLUMNS).enumerate() {
            let (value, kind) = match col {
                0..=2 => (row.lane_means.get(col).copied().flatten(), CellKind::Mean),
                3 => (row.overall_mean, CellKind::Mean),
                4..=6 => (
                    row.lane_counts.get(col - 4).map(|&c| c as f64),
                    CellKind::Count,
                ),
                _ => (Some(row.overall_count as f64), CellKind::Count),
            };
            let reference = PublishedValue::Number(reference);
            let derivable = value.is_some_and(|v| matches(kind, reference, v));
            let note = match kind {
                CellKind::Count => "sampling tolerance 4 sigma",
                _ => "mean of u_final",
            };
            out.push(DivergenceRow {
                table: MEAN_TABLE,
                row: category.label().to_string(),
                column: column.to_string(),
                paper_value: reference,
                implementation_value: value,
                derivable,
                seed: mixed.config.seed,
                note: note.to_string(),
            });
        }
    }
}

fn comparison_cells(
    table: &'static str,
    published: &[PublishedComparison; 3],
    rows: &[ComparisonRow],
    seed: u64,
    out: &mut Vec<DivergenceRow>,
) {
    for (measure, values) in published {
        let cmp = rows
            .iter()
            .find(|r| r.measure == *measure)
            .expect("one comparison per measure");
        let [r_mean, i_mean, diff, u, d, r] = *values;
        let r_rb = cmp.effects.r_rank_biserial.abs();
        let cells: [(CellKind, PublishedValue, f64, String); 7] = [
            (
                CellKind::Mean,
                PublishedValue::Number(r_mean),
                cmp.summary_a.mean,
                String::new(),
            ),
            (
                CellKind::Mean,
                PublishedValue::Number(i_mean),
                cmp.summary_b.mean,
                String::new(),
            ),
            (
                CellKind::Mean,
                PublishedValue::Number(diff),
                cmp.mean_diff(),
                String::new(),
            ),
            (
                CellKind::UStatistic,
                PublishedValue::Number(u),
                cmp.mwu.u_max,
                "u_max".into(),
            ),
            (
                CellKind::PValue,
                PublishedValue::Below(PUBLISHED_P_BOUND),
                cmp.mwu.p_two_sided,
                String::new(),
            ),
            (
                CellKind::CohensD,
                PublishedValue::Number(d),
                cmp.effects.cohens_d,
                String::new(),
            ),
            (
                CellKind::EffectR,
                PublishedValue::Number(r),
                cmp.effects.r_z,
                format!("r_z; r_rank_biserial={r_rb}"),
            ),
        ];
        for ((kind, reference, value, extra), column) in cells.into_iter().zip(COMPARISON_COLUMNS) {
            let mut derivable = matches(kind, reference, value);
            if kind == CellKind::EffectR && !derivable {
                derivable = matches(kind, reference, r_rb);
            }
            let mut note = format!("measure={}", measure.name());
            if !extra.is_empty() {
                note.push_str("; ");
                note.push_str(&extra);
            }
            if *measure == Measure::OriginalPayoff {
                derivable = false;
                note.push_str("; no derivation in the formal model (u_expected used as proxy)");
            }
            out.push(DivergenceRow {
                table,
                row: measure.label().to_string(),
                column: column.to_string(),
                paper_value: reference,
                implementation_value: Some(value),
                derivable,
                seed,
                note,
            });
        }
    }
}

/// Builds every divergence row from the three reference scenarios.
pub fn divergence_rows(
    mixed: &ScenarioRun,
    all_responsible: &ScenarioRun,
    all_irresponsible: &ScenarioRun,
) -> Result<Vec<DivergenceRow>, RunError> {
    let mut out = Vec::new();
    mean_rows(mixed, &mut out);

    let cutoff = mixed.config.exact_cutoff;
    let rows = mixed.rows();
    let (r, i) = split_by_category(&rows);
    if !r.is_empty() && !i.is_empty() {
        let within = compare_categories("R", &r, "I", &i, mixed.config.seed, cutoff)?;
        comparison_cells(
            MIXED_TABLE,
            &PUBLISHED_MIXED,
            &within,
            mixed.config.seed,
            &mut out,
        );
    }

    let (ra, ia) = (all_responsible.rows(), all_irresponsible.rows());
    if !ra.is_empty() && !ia.is_empty() {
        let seed = all_responsible.config.seed;
        let cross = compare_categories(
            "all-responsible",
            &ra,
            "all-irresponsible",
            &ia,
            seed,
            cutoff,
        )?;
        comparison_cells(
            HOMOGENEOUS_TABLE,
            &PUBLISHED_HOMOGENEOUS,
            &cross,
            seed,
            &mut out,
        );
    }
    Ok(out)
}

pub fn divergence_csv(rows: &[DivergenceRow]) -> String {
    let mut out = String::from(DIVERGENCE_HEADER);
    out.push('\n');
    for r in rows {
        let value = r
            .implementation_value
            .map_or_else(String::new, |v| format!("{v}"));
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.table,
            r.row,
            r.column,
            r.paper_value.render(),
            value,
            if r.derivable { "yes" } else { "no" },
            r.seed,
            r.note
        );
    }
    out
}
