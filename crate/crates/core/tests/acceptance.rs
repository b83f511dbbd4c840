//! End-to-end acceptance checks. Runs without the libtest harness so that each
//! criterion prints exactly one `[PASS]`/`[FAIL]` line; exits non-zero if any
//! criterion fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::ExitCode;
use std::sync::OnceLock;

use archetype_sim::lane::{evaluate_lane, jam_onset_position};
use archetype_sim::model::{
    baseline_utility, expected_utility_pair, Archetype, Category, ModelParams,
};
use archetype_sim::population::{lane_category_count, LEFT_LANE};
use archetype_sim::runner::report::{Pairings, DIVERGENCE_FILE, RUNNING_TOTALS_FILE};
use archetype_sim::runner::tables::population_table;
use archetype_sim::runner::{
    compare_archetype_pairs, compare_categories, emit_reports, run_scenario, Scenario,
    ScenarioConfig, ScenarioRun,
};
use archetype_sim::stats::{format_p, mann_whitney_u, DEFAULT_EXACT_CUTOFF};
use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 500_000;
const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

type Outcome = Result<String, String>;

fn config(scenario: Scenario, seed: u64) -> ScenarioConfig {
    ScenarioConfig::preset(scenario).with_n(N).with_seed(seed)
}

fn mixed_run() -> &'static ScenarioRun {
    static RUN: OnceLock<ScenarioRun> = OnceLock::new();
    RUN.get_or_init(|| ScenarioRun::simulate(&config(Scenario::Mixed50, 1)).unwrap())
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// (lead, follower, matrix, (p_follow, p_pass), published pair value). Matrix
/// rows are the lead's action, columns the follower's, ordered (follow, pass).
type PublishedPair = (Category, Category, [[f64; 2]; 2], [f64; 2], f64);

const PUBLISHED_PAIRS: [PublishedPair; 4] = [
    (
        Category::Responsible,
        Category::Responsible,
        [[0.0, -1.0], [1.0, -1.0]],
        [0.5, 0.5],
        -0.25,
    ),
    (
        Category::Responsible,
        Category::Irresponsible,
        [[1.0, 1.0], [-1.0, -1.0]],
        [0.1, 0.9],
        -0.80,
    ),
    (
        Category::Irresponsible,
        Category::Responsible,
        [[1.0, 1.0], [-1.0, -1.0]],
        [0.3, 0.7],
        -0.40,
    ),
    (
        Category::Irresponsible,
        Category::Irresponsible,
        [[0.0, 1.0], [1.0, -1.0]],
        [0.1, 0.9],
        -0.63,
    ),
];

fn four_term(m: [[f64; 2]; 2], p: [f64; 2]) -> f64 {
    p[0] * p[0] * m[0][0] + p[0] * p[1] * m[0][1] + p[1] * p[0] * m[1][0] + p[1] * p[1] * m[1][1]
}

fn criterion_01_pair_utility_oracle() -> Outcome {
    let params = ModelParams::default();
    let mut detail = Vec::new();
    let mut ok = true;
    for (lead, follower, m, p, published) in PUBLISHED_PAIRS {
        let oracle = four_term(m, p);
        let got = expected_utility_pair(lead, follower, &params);
        ok &= (got - oracle).abs() < 1e-12 && (oracle - published).abs() < 1e-12;
        detail.push(format!("({},{})={got}", lead.symbol(), follower.symbol()));
    }
    verdict(ok, detail.join(" "))
}

// Published whole-population shares, percent.
const PUBLISHED_SHARES: [(Archetype, f64); 6] = [
    (Archetype::Dangerous, 8.7),
    (Archetype::Impatient, 13.5),
    (Archetype::LeftLaneCamper, 11.5),
    (Archetype::Responsible, 50.0),
    (Archetype::Selfish, 15.6),
    (Archetype::Slowpoke, 0.7),
];

fn criterion_02_population_reproduction() -> Outcome {
    let mut ok = true;
    let mut worst = (0.0f64, Archetype::Responsible, 0u64);
    let mut lane1 = Vec::new();
    for seed in SEEDS {
        let run = if seed == 1 {
            mixed_run().clone()
        } else {
            ScenarioRun::simulate(&config(Scenario::Mixed50, seed)).unwrap()
        };
        let table = population_table(&run.population);
        for (archetype, published) in PUBLISHED_SHARES {
            let dev = (table.row(archetype).total_share * 100.0 - published).abs();
            ok &= dev <= 0.15;
            if dev > worst.0 {
                worst = (dev, archetype, seed);
            }
        }
        let llc = table.row(Archetype::LeftLaneCamper);
        ok &= llc.lane_counts.iter().skip(1).all(|&c| c == 0);
        let share = table.totals.lane_shares[LEFT_LANE - 1] * 100.0;
        ok &= (share - 40.9).abs() <= 0.3;
        lane1.push(format!("{share:.3}"));
    }
    verdict(
        ok,
        format!(
            "worst share deviation {:.4} pp ({} seed {}); lane-1 share % {}",
            worst.0,
            worst.1.name(),
            worst.2,
            lane1.join("/")
        ),
    )
}

fn criterion_03_lane1_irresponsible_mass() -> Outcome {
    // Camper share after rescaling the published irresponsible shares to sum to one.
    let camper = 0.5 * 0.2291 / 1.0002;
    let oracle = N as f64 * (camper + (0.5 - camper) / 3.0);
    let target = 121_508.0;
    let count = lane_category_count(&mixed_run().population, LEFT_LANE, Category::Irresponsible);
    let ok = (count as f64 - target).abs() <= 1200.0 && (oracle - target).abs() < 2.0;
    verdict(
        ok,
        format!("count {count}, target {target}, oracle {oracle:.1}"),
    )
}

fn criterion_04_homogeneous_separation() -> Outcome {
    let r = ScenarioRun::simulate(&config(Scenario::AllResponsible, 1)).unwrap();
    let i = ScenarioRun::simulate(&config(Scenario::AllIrresponsible, 1)).unwrap();
    let rows = compare_categories(
        "all-responsible",
        &r.rows(),
        "all-irresponsible",
        &i.rows(),
        1,
        DEFAULT_EXACT_CUTOFF,
    )
    .unwrap();
    let fu = rows
        .iter()
        .find(|c| c.measure == archetype_sim::runner::Measure::FinalUtility)
        .unwrap();
    let nn = (fu.mwu.n1 * fu.mwu.n2) as f64;
    let sep = fu.mwu.u_max / nn;
    let rrb = fu.effects.r_rank_biserial.abs();
    let p = format_p(fu.mwu.p_two_sided);
    let ok =
        sep >= 0.9999 && rrb >= 0.9998 && p == "<1e-300" && fu.summary_a.mean > fu.summary_b.mean;
    verdict(
        ok,
        format!(
            "u_max/(n1n2) {sep:.6}, |r_rb| {rrb:.6}, p {p}, means {:.4} > {:.4}",
            fu.summary_a.mean, fu.summary_b.mean
        ),
    )
}

fn criterion_05_subtype_equivalence() -> Outcome {
    let run = mixed_run();
    let rows = compare_archetype_pairs(&run.rows(), 1, DEFAULT_EXACT_CUTOFF).unwrap();
    let responsible = "Responsible:expected_utility";
    let mut within = Vec::new();
    let mut across = Vec::new();
    for r in &rows {
        if r.group_a == responsible || r.group_b == responsible {
            across.push(r);
        } else {
            within.push(r);
        }
    }
    let worst_within = within
        .iter()
        .max_by(|a, b| {
            a.effects
                .cohens_d
                .abs()
                .total_cmp(&b.effects.cohens_d.abs())
        })
        .unwrap();
    let within_ok = within.iter().all(|r| r.effects.cohens_d.abs() < 0.05);
    let failing = within
        .iter()
        .filter(|r| r.effects.cohens_d.abs() >= 0.05)
        .count();
    let ds: Vec<f64> = across.iter().map(|r| r.effects.cohens_d.abs()).collect();
    let spread =
        ds.iter().cloned().fold(f64::MIN, f64::max) - ds.iter().cloned().fold(f64::MAX, f64::min);
    let across_ok = across.iter().all(|r| r.mwu.p_two_sided < 0.001) && spread <= 0.1;
    verdict(
        within.len() == 10 && across.len() == 5 && within_ok && across_ok,
        format!(
            "I-vs-I {failing}/10 with |d|>=0.05 (max {:.4} {} vs {}); R-vs-I |d| spread {spread:.4}",
            worst_within.effects.cohens_d.abs(),
            worst_within.group_a,
            worst_within.group_b
        ),
    )
}

fn criterion_06_exact_vs_normal() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = (0.0f64, 0, 0);
    let mut exceeding = BTreeSet::new();
    let mut sums_ok = true;
    for n1 in 1..=7 {
        for n2 in 1..=7 {
            let n = n1 + n2;
            for _ in 0..1000 {
                let mut ranks: Vec<f64> = (1..=n).map(|r| r as f64).collect();
                for k in (1..n).rev() {
                    let j = (rng.next_u64() % (k as u64 + 1)) as usize;
                    ranks.swap(k, j);
                }
                let (a, b) = ranks.split_at(n1);
                let exact = mann_whitney_u(a, b, 7).unwrap();
                let approx = mann_whitney_u(a, b, 0).unwrap();
                sums_ok &= exact.u1 + exact.u2 == (n1 * n2) as f64;
                let diff = (exact.p_two_sided - approx.p_two_sided).abs();
                if diff > 0.02 {
                    exceeding.insert((n1, n2));
                }
                if diff > worst.0 {
                    worst = (diff, n1, n2);
                }
            }
        }
    }
    verdict(
        sums_ok && exceeding.is_empty(),
        format!(
            "max |p_normal - p_exact| {:.4} at n1={} n2={}; {}/49 size pairs exceed 0.02; u1+u2=n1n2 {}",
            worst.0,
            worst.1,
            worst.2,
            exceeding.len(),
            if sums_ok { "always" } else { "violated" }
        ),
    )
}

fn arb_lane() -> impl Strategy<Value = Vec<Archetype>> {
    (0.0f64..=1.0).prop_flat_map(|fraction| {
        vec((0.0f64..1.0, 0usize..5), 0..=200).prop_map(move |draws| {
            draws
                .into_iter()
                .map(|(u, k)| {
                    if u < fraction {
                        Archetype::Responsible
                    } else {
                        Archetype::IRRESPONSIBLE[k]
                    }
                })
                .collect()
        })
    })
}

fn check_corollaries(lane: &[Archetype], params: &ModelParams) -> Result<(), TestCaseError> {
    let result = evaluate_lane(lane, params);
    let bound: f64 = lane
        .iter()
        .map(|a| baseline_utility(a.category(), params))
        .sum();
    prop_assert!(result.total_final <= bound + 1e-9, "bound");

    let mismatches = lane
        .windows(2)
        .filter(|w| w[0].category() != w[1].category())
        .count();
    let plain = evaluate_lane(lane, &params.without_penalty());
    let decomposed = plain.total_adjusted - 0.5 * mismatches as f64;
    prop_assert!(
        (result.total_adjusted - decomposed).abs() <= 1e-9 * (1 + lane.len()) as f64,
        "decomposition"
    );

    for homogeneous in [Archetype::Responsible, Archetype::Selfish] {
        let same: Vec<Archetype> = lane
            .iter()
            .map(|a| {
                if a.category() == homogeneous.category() {
                    *a
                } else {
                    homogeneous
                }
            })
            .collect();
        let h = evaluate_lane(&same, params);
        prop_assert!(
            h.records
                .iter()
                .skip(1)
                .all(|r| r.u_adjusted == r.u_expected),
            "homogeneous"
        );
    }

    if !lane.is_empty() {
        prop_assert!(result.jam_triggered, "jam");
        prop_assert!(result.records.iter().all(|r| r.u_final <= 0.0), "jam cap");
    }
    Ok(())
}

fn criterion_07_corollary_suite() -> Outcome {
    let params = ModelParams::default();
    let mut runner = TestRunner::new(Config {
        cases: 10_000,
        failure_persistence: None,
        ..Config::default()
    });
    match runner.run(&arb_lane(), |lane| check_corollaries(&lane, &params)) {
        Ok(()) => Ok("10000 random lanes: bound, homogeneity, decomposition, jam".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn onset_oracle(lead: f64, pair: f64) -> usize {
    let mut acc = lead;
    let mut position = 1;
    while acc > 0.0 {
        position += 1;
        acc += pair;
    }
    position
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

fn running_total_at(dir: &Path, lane: usize, position: usize) -> f64 {
    let text = std::fs::read_to_string(dir.join(RUNNING_TOTALS_FILE)).unwrap();
    text.lines()
        .skip(1)
        .map(|l| l.split(',').collect::<Vec<_>>())
        .find(|f| f[0] == lane.to_string() && f[1] == position.to_string())
        .map(|f| f[2].parse().unwrap())
        .unwrap()
}

fn criterion_08_jam_onset() -> Outcome {
    let params = ModelParams::default();
    let r_oracle = onset_oracle(5.0, four_term(PUBLISHED_PAIRS[0].2, PUBLISHED_PAIRS[0].3));
    let i_oracle = onset_oracle(3.0, four_term(PUBLISHED_PAIRS[3].2, PUBLISHED_PAIRS[3].3));
    let r_onset = jam_onset_position(&evaluate_lane(&[Archetype::Responsible; 40], &params));
    let mut mixed_i: Vec<Archetype> = Archetype::IRRESPONSIBLE
        .iter()
        .cycle()
        .take(40)
        .copied()
        .collect();
    mixed_i.rotate_left(2);
    let i_onset = jam_onset_position(&evaluate_lane(&mixed_i, &params));

    let tmp = tempfile::tempdir().unwrap();
    let (mut first, mut tenth) = (Vec::new(), Vec::new());
    for seed in SEEDS {
        let dir = tmp.path().join(seed.to_string());
        let cfg = config(Scenario::Mixed50, seed);
        emit_reports(&run_scenario(&cfg).unwrap(), &dir).unwrap();
        first.push(running_total_at(&dir, 1, 1));
        tenth.push(running_total_at(&dir, 1, 10));
    }
    let (m1, m10) = (median(first), median(tenth));
    let ok = r_oracle == 21
        && i_oracle == 6
        && r_onset == Some(r_oracle)
        && i_onset == Some(i_oracle)
        && m1 > 0.0
        && m10 <= 0.0;
    verdict(
        ok,
        format!(
            "onset all-R {r_onset:?} all-I {i_onset:?}; lane-1 median cumulative pos1 {m1} pos10 {m10:.4}"
        ),
    )
}

fn criterion_09_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(Scenario::Mixed50, 1);
    let a = emit_reports(&run_scenario(&cfg).unwrap(), &tmp.path().join("a")).unwrap();
    let b = emit_reports(&run_scenario(&cfg).unwrap(), &tmp.path().join("b")).unwrap();
    let mut ok = a.entries.len() == 7 && b.entries.len() == 7;
    for (x, y) in a.entries.iter().zip(&b.entries) {
        ok &= x.sha256 == y.sha256;
        ok &= std::fs::read(&x.path).unwrap() == std::fs::read(&y.path).unwrap();
    }
    verdict(
        ok,
        format!(
            "{} files, digests {}",
            a.entries.len(),
            if ok { "identical" } else { "differ" }
        ),
    )
}

fn criterion_10_divergence_completeness() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let bundle = run_scenario(&config(Scenario::Mixed50, 1)).unwrap();
    assert!(matches!(bundle.archetype_pairings, Pairings::Computed(_)));
    emit_reports(&bundle, tmp.path()).unwrap();
    let text = std::fs::read_to_string(tmp.path().join(DIVERGENCE_FILE)).unwrap();
    let rows: Vec<Vec<String>> = text
        .lines()
        .skip(1)
        .map(|l| l.splitn(8, ',').map(str::to_string).collect())
        .collect();

    let mut expected = BTreeSet::new();
    for row in ["Irresponsible", "Responsible"] {
        for lane in ["Lane 1", "Lane 2", "Lane 3", "Overall"] {
            expected.insert((
                "mean_final_utility_by_lane".to_string(),
                row.to_string(),
                lane.to_string(),
            ));
            expected.insert((
                "mean_final_utility_by_lane".to_string(),
                row.to_string(),
                format!("{lane} count"),
            ));
        }
    }
    for table in [
        "mixed_scenario_comparison",
        "homogeneous_scenario_comparison",
    ] {
        for row in ["Expected Utility", "Original Payoff", "Final Utility"] {
            for col in [
                "R Mean",
                "I Mean",
                "Mean Difference",
                "U Statistic",
                "P Value",
                "Cohen's d",
                "Effect Size r",
            ] {
                expected.insert((table.to_string(), row.to_string(), col.to_string()));
            }
        }
    }
    let found: BTreeSet<_> = rows
        .iter()
        .map(|f| (f[0].clone(), f[1].clone(), f[2].clone()))
        .collect();
    let verdicts_ok = rows.iter().all(|f| f[5] == "yes" || f[5] == "no");
    let payoff_flagged = rows
        .iter()
        .filter(|f| f[1] == "Original Payoff")
        .all(|f| f[5] == "no");
    let missing = expected.difference(&found).count();
    let yes = rows.iter().filter(|f| f[5] == "yes").count();
    verdict(
        missing == 0 && rows.len() == expected.len() && verdicts_ok && payoff_flagged,
        format!(
            "{} rows, {missing} missing, {yes} derivable, Original Payoff rows all non-derivable: {payoff_flagged}",
            rows.len()
        ),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        (
            "criterion_01_pair_utility_oracle",
            criterion_01_pair_utility_oracle,
        ),
        (
            "criterion_02_population_reproduction",
            criterion_02_population_reproduction,
        ),
        (
            "criterion_03_lane1_irresponsible_mass",
            criterion_03_lane1_irresponsible_mass,
        ),
        (
            "criterion_04_homogeneous_separation",
            criterion_04_homogeneous_separation,
        ),
        (
            "criterion_05_subtype_equivalence",
            criterion_05_subtype_equivalence,
        ),
        ("criterion_06_exact_vs_normal", criterion_06_exact_vs_normal),
        ("criterion_07_corollary_suite", criterion_07_corollary_suite),
        ("criterion_08_jam_onset", criterion_08_jam_onset),
        ("criterion_09_determinism", criterion_09_determinism),
        (
            "criterion_10_divergence_completeness",
            criterion_10_divergence_completeness,
        ),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
