//! Rank-based two-sample comparison and effect sizes.
//!
//! `mann_whitney_u` follows the usual two-sided convention: exact null
//! distribution when both samples are small and tie-free, otherwise a normal
//! approximation with tie-corrected variance and a 0.5 continuity correction.

use statrs::function::erf::erfc;
use thiserror::Error;

/// Both samples at or below this size (and no ties) use the exact distribution.
pub const DEFAULT_EXACT_CUTOFF: usize = 10;

/// p-values below this are printed as `<1e-300` and written as 0 in CSV.
pub const P_VALUE_FLOOR: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("input contains a non-finite value")]
    NonFiniteInput,
    #[error("sample is empty")]
    EmptySample,
    #[error("at least two observations per group are required, got {0}")]
    TooFewObservations(usize),
    #[error("pooled variance is zero but means differ (infinite effect)")]
    DegenerateVariance { sign: f64 },
    #[error("pooled variance is zero and means are equal")]
    ZeroEffect,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupSummary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); zero when n < 2.
    pub sd: f64,
}

impl GroupSummary {
    pub fn from_sample(values: &[f64]) -> Result<Self, StatsError> {
        if values.is_empty() {
            return Err(StatsError::EmptySample);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFiniteInput);
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n >= 2 {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Ok(GroupSummary { n, mean, sd })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    NormalApproximation,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::NormalApproximation => "normal-approximation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwuResult {
    pub n1: usize,
    pub n2: usize,
    pub u1: f64,
    pub u2: f64,
    pub u_max: f64,
    /// Signed: positive when the first sample tends to be larger.
    pub z: f64,
    pub p_two_sided: f64,
    pub method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectSizes {
    pub cohens_d: f64,
    pub r_z: f64,
    pub r_rank_biserial: f64,
}

/// Midranks (1-based) of `values`, ties sharing the mean of their rank span.
pub fn midranks(values: &[f64]) -> Result<Vec<f64>, StatsError> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFiniteInput);
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Ranks start+1..=end, mean is (start + 1 + end) / 2.
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    Ok(ranks)
}

/// Standard normal upper tail.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

struct PooledRanks {
    rank_sum_a: f64,
    /// Σ (t³ − t) over tie groups.
    tie_term: f64,
    has_ties: bool,
}

fn pooled_ranks(a: &[f64], b: &[f64]) -> PooledRanks {
    let mut pooled: Vec<(f64, bool)> = a
        .iter()
        .map(|&v| (v, true))
        .chain(b.iter().map(|&v| (v, false)))
        .collect();
    pooled.sort_unstable_by(|x, y| x.0.total_cmp(&y.0));

    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut has_ties = false;
    let mut start = 0;
    while start < pooled.len() {
        let mut end = start + 1;
        while end < pooled.len() && pooled[end].0 == pooled[start].0 {
            end += 1;
        }
        let t = (end - start) as f64;
        if end - start > 1 {
            has_ties = true;
            tie_term += t * t * t - t;
        }
        let rank = (start + 1 + end) as f64 / 2.0;
        let in_a = pooled[start..end].iter().filter(|x| x.1).count();
        rank_sum_a += rank * in_a as f64;
        start = end;
    }
    PooledRanks {
        rank_sum_a,
        tie_term,
        has_ties,
    }
}

/// Number of ways to reach each value of U for sample sizes (n1, n2), i.e. the
/// exact null distribution scaled by C(n1 + n2, n1).
pub fn exact_u_counts(n1: usize, n2: usize) -> Vec<f64> {
    let max_u = n1 * n2;
    // prev[i] is the distribution for sizes (i, j - 1); with no second sample U is always 0.
    let mut prev: Vec<Vec<f64>> = vec![vec![1.0]; n1 + 1];
    for j in 1..=n2 {
        let mut cur: Vec<Vec<f64>> = Vec::with_capacity(n1 + 1);
        cur.push(vec![1.0]);
        for i in 1..=n1 {
            // f(i, j, u) = f(i - 1, j, u - j) + f(i, j - 1, u)
            let mut dist = vec![0.0; i * j + 1];
            for (u, &c) in prev[i].iter().enumerate() {
                dist[u] += c;
            }
            for (u, &c) in cur[i - 1].iter().enumerate() {
                dist[u + j] += c;
            }
            cur.push(dist);
        }
        prev = cur;
    }
    let mut out = prev.swap_remove(n1);
    out.resize(max_u + 1, 0.0);
    out
}

fn exact_two_sided(u1: f64, n1: usize, n2: usize) -> f64 {
    let counts = exact_u_counts(n1, n2);
    let total: f64 = counts.iter().sum();
    let u = u1.round() as usize;
    let lower: f64 = counts[..=u].iter().sum();
    let upper: f64 = counts[u..].iter().sum();
    (2.0 * lower.min(upper) / total).min(1.0)
}

pub fn mann_whitney_u(a: &[f64], b: &[f64], exact_cutoff: usize) -> Result<MwuResult, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFiniteInput);
    }
    let (n1, n2) = (a.len(), b.len());
    let (f1, f2) = (n1 as f64, n2 as f64);
    let n = f1 + f2;
    let ranks = pooled_ranks(a, b);
    let u1 = ranks.rank_sum_a - f1 * (f1 + 1.0) / 2.0;
    let u2 = f1 * f2 - u1;

    let mean = f1 * f2 / 2.0;
    let variance = f1 * f2 / 12.0 * ((n + 1.0) - ranks.tie_term / (n * (n - 1.0)));
    let z = if variance > 0.0 {
        let dev = u1 - mean;
        dev.signum() * (dev.abs() - 0.5).max(0.0) / variance.sqrt()
    } else {
        0.0
    };

    let (method, p_two_sided) = if n1 <= exact_cutoff && n2 <= exact_cutoff && !ranks.has_ties {
        (Method::Exact, exact_two_sided(u1, n1, n2))
    } else if variance > 0.0 {
        (
            Method::NormalApproximation,
            (2.0 * normal_sf(z.abs())).min(1.0),
        )
    } else {
        (Method::NormalApproximation, 1.0)
    };

    Ok(MwuResult {
        n1,
        n2,
        u1,
        u2,
        u_max: u1.max(u2),
        z,
        p_two_sided,
        method,
    })
}

/// Pooled-SD standardized mean difference `(mean_a - mean_b) / sd_pooled`.
pub fn cohens_d(a: &GroupSummary, b: &GroupSummary) -> Result<f64, StatsError> {
    for g in [a, b] {
        if g.n < 2 {
            return Err(StatsError::TooFewObservations(g.n));
        }
    }
    let (n1, n2) = (a.n as f64, b.n as f64);
    let pooled_var = ((n1 - 1.0) * a.sd * a.sd + (n2 - 1.0) * b.sd * b.sd) / (n1 + n2 - 2.0);
    let diff = a.mean - b.mean;
    if pooled_var <= 0.0 {
        return Err(if diff == 0.0 {
            StatsError::ZeroEffect
        } else {
            StatsError::DegenerateVariance {
                sign: diff.signum(),
            }
        });
    }
    Ok(diff / pooled_var.sqrt())
}

/// `cohens_d` for reporting: infinite when variance vanishes with distinct
/// means, zero when both are degenerate and equal.
pub fn cohens_d_or_sentinel(a: &GroupSummary, b: &GroupSummary) -> Result<f64, StatsError> {
    match cohens_d(a, b) {
        Ok(d) => Ok(d),
        Err(StatsError::DegenerateVariance { sign }) => Ok(sign * f64::INFINITY),
        Err(StatsError::ZeroEffect) => Ok(0.0),
        Err(e) => Err(e),
    }
}

pub fn effect_sizes(
    mwu: &MwuResult,
    a: &GroupSummary,
    b: &GroupSummary,
) -> Result<EffectSizes, StatsError> {
    let nn = (mwu.n1 * mwu.n2) as f64;
    Ok(EffectSizes {
        cohens_d: cohens_d_or_sentinel(a, b)?,
        r_z: mwu.z.abs() / ((mwu.n1 + mwu.n2) as f64).sqrt(),
        r_rank_biserial: 1.0 - 2.0 * mwu.u1 / nn,
    })
}

/// Text rendering of a p-value, floored at [`P_VALUE_FLOOR`].
pub fn format_p(p: f64) -> String {
    if p < P_VALUE_FLOOR {
        "<1e-300".to_string()
    } else {
        format!("{p}")
    }
}

/// Numeric CSV value of a p-value: zero below the floor.
pub fn csv_p(p: f64) -> f64 {
    if p < P_VALUE_FLOOR {
        0.0
    } else {
        p
    }
}
