//! Driver taxonomy and the pairwise game model.
//!
//! Every driver belongs to one of six archetypes. Utility formulas only see the
//! two-way [`Category`] of an archetype, so the model is a small table keyed by
//! the ordered (lead, follower) category pair: a 2x2 payoff matrix and an action
//! distribution per pair, plus per-category baselines.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used when checking that an action distribution sums to one.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamsError {
    #[error("payoff matrix for {pair} has a non-finite entry")]
    NonFiniteMatrix { pair: CategoryPair },
    #[error("action distribution for {pair} is invalid: p_follow={p_follow}, p_pass={p_pass}")]
    InvalidDistribution {
        pair: CategoryPair,
        p_follow: f64,
        p_pass: f64,
    },
    #[error("parameter `{name}` must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("unknown archetype `{0}`")]
    UnknownArchetype(String),
}

/// Driver behavior archetype. The discriminant is the archetype code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Archetype {
    Responsible = 0,
    Selfish = 1,
    Impatient = 2,
    LeftLaneCamper = 3,
    Dangerous = 4,
    Slowpoke = 5,
}

impl Archetype {
    pub const ALL: [Archetype; 6] = [
        Archetype::Responsible,
        Archetype::Selfish,
        Archetype::Impatient,
        Archetype::LeftLaneCamper,
        Archetype::Dangerous,
        Archetype::Slowpoke,
    ];

    /// The five irresponsible archetypes, in code order.
    pub const IRRESPONSIBLE: [Archetype; 5] = [
        Archetype::Selfish,
        Archetype::Impatient,
        Archetype::LeftLaneCamper,
        Archetype::Dangerous,
        Archetype::Slowpoke,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Archetype> {
        Archetype::ALL.get(code as usize).copied()
    }

    /// Identifier used in CSV files and config keys.
    pub fn name(self) -> &'static str {
        match self {
            Archetype::Responsible => "Responsible",
            Archetype::Selfish => "Selfish",
            Archetype::Impatient => "Impatient",
            Archetype::LeftLaneCamper => "LeftLaneCamper",
            Archetype::Dangerous => "Dangerous",
            Archetype::Slowpoke => "Slowpoke",
        }
    }

    /// Human-readable label, e.g. "Left Lane Camper".
    pub fn label(self) -> &'static str {
        match self {
            Archetype::LeftLaneCamper => "Left Lane Camper",
            other => other.name(),
        }
    }

    pub fn category(self) -> Category {
        category_of(self)
    }
}

impl fmt::Display for Archetype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Archetype {
    type Err = ParamsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        if let Ok(code) = trimmed.parse::<u8>() {
            return Archetype::from_code(code)
                .ok_or_else(|| ParamsError::UnknownArchetype(s.into()));
        }
        let squashed: String = trimmed
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Archetype::ALL
            .into_iter()
            .find(|a| a.name().to_ascii_lowercase() == squashed)
            .ok_or_else(|| ParamsError::UnknownArchetype(s.into()))
    }
}

/// Two-way classification: Responsible (R) or Irresponsible (I).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "R")]
    Responsible,
    #[serde(rename = "I")]
    Irresponsible,
}

impl Category {
    pub const ALL: [Category; 2] = [Category::Responsible, Category::Irresponsible];

    pub fn index(self) -> usize {
        match self {
            Category::Responsible => 0,
            Category::Irresponsible => 1,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Category::Responsible => "R",
            Category::Irresponsible => "I",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Category::Responsible => "Responsible",
            Category::Irresponsible => "Irresponsible",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Ordered (lead, follower) category pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CategoryPair {
    pub lead: Category,
    pub follower: Category,
}

impl CategoryPair {
    pub const ALL: [CategoryPair; 4] = [
        CategoryPair::new(Category::Responsible, Category::Responsible),
        CategoryPair::new(Category::Responsible, Category::Irresponsible),
        CategoryPair::new(Category::Irresponsible, Category::Responsible),
        CategoryPair::new(Category::Irresponsible, Category::Irresponsible),
    ];

    pub const fn new(lead: Category, follower: Category) -> Self {
        CategoryPair { lead, follower }
    }
}

impl fmt::Display for CategoryPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.lead, self.follower)
    }
}

/// Only `Responsible` maps to R; the other five archetypes are irresponsible.
pub fn category_of(archetype: Archetype) -> Category {
    match archetype {
        Archetype::Responsible => Category::Responsible,
        _ => Category::Irresponsible,
    }
}

/// A driver's move when interacting with the car ahead or behind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Follow = 0,
    Pass = 1,
}

impl Action {
    pub const ALL: [Action; 2] = [Action::Follow, Action::Pass];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// 2x2 payoff matrix; rows are the lead driver's action, columns the follower's.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PayoffMatrix(pub [[f64; 2]; 2]);

impl PayoffMatrix {
    pub fn get(&self, lead: Action, follower: Action) -> f64 {
        self.0[lead.index()][follower.index()]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    pub fn min_entry(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionDistribution {
    pub p_follow: f64,
    pub p_pass: f64,
}

impl ActionDistribution {
    pub fn new(p_follow: f64, p_pass: f64) -> Option<Self> {
        let d = ActionDistribution { p_follow, p_pass };
        d.is_valid().then_some(d)
    }

    pub fn prob(&self, action: Action) -> f64 {
        match action {
            Action::Follow => self.p_follow,
            Action::Pass => self.p_pass,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.p_follow.is_finite()
            && self.p_pass.is_finite()
            && self.p_follow >= 0.0
            && self.p_pass >= 0.0
            && (self.p_follow + self.p_pass - 1.0).abs() <= PROBABILITY_TOLERANCE
    }
}

/// Matrix and action probabilities for one ordered category pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSpec {
    pub matrix: PayoffMatrix,
    pub p_follow: f64,
    pub p_pass: f64,
}

impl PairSpec {
    pub fn distribution(&self) -> ActionDistribution {
        ActionDistribution {
            p_follow: self.p_follow,
            p_pass: self.p_pass,
        }
    }
}

/// One [`PairSpec`] per ordered category pair. Keys in config files are
/// `rr`, `ri`, `ir` and `ii` (lead first).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PairTable {
    pub rr: PairSpec,
    pub ri: PairSpec,
    pub ir: PairSpec,
    pub ii: PairSpec,
}

impl PairTable {
    pub fn get(&self, pair: CategoryPair) -> &PairSpec {
        use Category::*;
        match (pair.lead, pair.follower) {
            (Responsible, Responsible) => &self.rr,
            (Responsible, Irresponsible) => &self.ri,
            (Irresponsible, Responsible) => &self.ir,
            (Irresponsible, Irresponsible) => &self.ii,
        }
    }

    pub fn get_mut(&mut self, pair: CategoryPair) -> &mut PairSpec {
        use Category::*;
        match (pair.lead, pair.follower) {
            (Responsible, Responsible) => &mut self.rr,
            (Responsible, Irresponsible) => &mut self.ri,
            (Irresponsible, Responsible) => &mut self.ir,
            (Irresponsible, Irresponsible) => &mut self.ii,
        }
    }
}

impl Default for PairTable {
    fn default() -> Self {
        let mixed = PayoffMatrix([[1.0, 1.0], [-1.0, -1.0]]);
        PairTable {
            rr: PairSpec {
                matrix: PayoffMatrix([[0.0, -1.0], [1.0, -1.0]]),
                p_follow: 0.5,
                p_pass: 0.5,
            },
            ri: PairSpec {
                matrix: mixed,
                p_follow: 0.1,
                p_pass: 0.9,
            },
            // No matrix is published for an irresponsible lead; the mixed-pair
            // matrix is reused and can be overridden in config.
            ir: PairSpec {
                matrix: mixed,
                p_follow: 0.3,
                p_pass: 0.7,
            },
            ii: PairSpec {
                matrix: PayoffMatrix([[0.0, 1.0], [1.0, -1.0]]),
                p_follow: 0.1,
                p_pass: 0.9,
            },
        }
    }
}

/// Full parameter set of the game model. `Default` is the published model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub pairs: PairTable,
    pub baseline_r: f64,
    pub baseline_i: f64,
    pub mismatch_penalty: f64,
    pub jam_threshold: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            pairs: PairTable::default(),
            baseline_r: 5.0,
            baseline_i: 3.0,
            mismatch_penalty: 0.5,
            jam_threshold: 0.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ParamsError> {
        for pair in CategoryPair::ALL {
            let spec = self.pairs.get(pair);
            if !spec.matrix.is_finite() {
                return Err(ParamsError::NonFiniteMatrix { pair });
            }
            if !spec.distribution().is_valid() {
                return Err(ParamsError::InvalidDistribution {
                    pair,
                    p_follow: spec.p_follow,
                    p_pass: spec.p_pass,
                });
            }
        }
        for (name, value) in [
            ("baseline_r", self.baseline_r),
            ("baseline_i", self.baseline_i),
            ("mismatch_penalty", self.mismatch_penalty),
            ("jam_threshold", self.jam_threshold),
        ] {
            if !value.is_finite() {
                return Err(ParamsError::NonFinite { name, value });
            }
        }
        Ok(())
    }

    /// Same parameters with the mismatch penalty set to zero.
    pub fn without_penalty(mut self) -> Self {
        self.mismatch_penalty = 0.0;
        self
    }

    pub fn from_toml_str(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("model params always serialize")
    }
}

pub fn baseline_utility(category: Category, params: &ModelParams) -> f64 {
    match category {
        Category::Responsible => params.baseline_r,
        Category::Irresponsible => params.baseline_i,
    }
}

pub fn payoff_matrix(lead: Category, follower: Category, params: &ModelParams) -> PayoffMatrix {
    params.pairs.get(CategoryPair::new(lead, follower)).matrix
}

pub fn action_distribution(
    lead: Category,
    follower: Category,
    params: &ModelParams,
) -> ActionDistribution {
    params
        .pairs
        .get(CategoryPair::new(lead, follower))
        .distribution()
}

/// Expected payoff of a follower behind a lead, summed over all four action
/// pairs. Both drivers' actions are drawn from the pair's distribution.
pub fn expected_utility_pair(lead: Category, follower: Category, params: &ModelParams) -> f64 {
    let matrix = payoff_matrix(lead, follower, params);
    let dist = action_distribution(lead, follower, params);
    Action::ALL
        .iter()
        .flat_map(|&a| Action::ALL.iter().map(move |&b| (a, b)))
        .map(|(a, b)| dist.prob(a) * dist.prob(b) * matrix.get(a, b))
        .sum()
}

/// Applies the mismatch penalty when lead and follower differ in category.
pub fn adjusted_utility(
    lead: Archetype,
    follower: Archetype,
    u_expected: f64,
    params: &ModelParams,
) -> f64 {
    if category_of(lead) == category_of(follower) {
        u_expected
    } else {
        u_expected - params.mismatch_penalty
    }
}
