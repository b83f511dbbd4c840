//! Seeded driver populations and lane assignment.
//!
//! Archetypes are drawn independently per driver from the mix shares, then each
//! driver is placed in a lane. Left lane campers always go to lane 1; everyone
//! else is uniform over all lanes. Drivers take in-lane positions in id order.
//!
//! Randomness comes from two ChaCha20 streams, one for archetype draws and one
//! for lane draws, each keyed by `SHA-256(label || seed_le)`. Every driver
//! consumes exactly one 64-bit word from each stream, so driver `id` always uses
//! word `id` of both streams regardless of the lane rule. Words are mapped to
//! draws without rejection:
//!
//! * archetype: `u = (w >> 11) * 2^-53`, first archetype (code order) whose
//!   cumulative share exceeds `u`;
//! * lane: `((w as u128 * lane_count) >> 64) + 1`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{Archetype, Category};

pub const DEFAULT_LANE_COUNT: usize = 3;
/// Lane that left lane campers always occupy.
pub const LEFT_LANE: usize = 1;

/// Irresponsible archetype prevalence, in `Archetype::IRRESPONSIBLE` order.
/// The printed column sums to 100.02%, so these are renormalized on use.
pub const DEFAULT_IRRESPONSIBLE_SHARES: [f64; 5] = [0.3121, 0.2708, 0.2291, 0.1743, 0.0139];

/// Raw shares may be off from 1 by this much before renormalization.
pub const SHARE_SUM_SLACK: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MixError {
    #[error("invalid mix: {0}")]
    InvalidMix(String),
}

fn invalid(msg: impl Into<String>) -> MixError {
    MixError::InvalidMix(msg.into())
}

/// Scenario composition: the responsible fraction and how the irresponsible
/// remainder splits among the five irresponsible archetypes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMix", into = "RawMix")]
pub struct MixSpec {
    responsible_fraction: f64,
    irresponsible_shares: [f64; 5],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMix {
    responsible_fraction: f64,
    #[serde(default)]
    irresponsible_shares: Option<BTreeMap<String, f64>>,
}

impl TryFrom<RawMix> for MixSpec {
    type Error = MixError;

    fn try_from(raw: RawMix) -> Result<Self, Self::Error> {
        let shares = match raw.irresponsible_shares {
            None => DEFAULT_IRRESPONSIBLE_SHARES,
            Some(map) => {
                let mut shares = [0.0; 5];
                for (key, value) in map {
                    let archetype: Archetype = key
                        .parse()
                        .map_err(|_| invalid(format!("unknown archetype `{key}`")))?;
                    let slot = Archetype::IRRESPONSIBLE
                        .iter()
                        .position(|a| *a == archetype)
                        .ok_or_else(|| {
                            invalid("Responsible cannot carry an irresponsible share")
                        })?;
                    shares[slot] = value;
                }
                shares
            }
        };
        MixSpec::new(raw.responsible_fraction, shares)
    }
}

impl From<MixSpec> for RawMix {
    fn from(mix: MixSpec) -> Self {
        let map = Archetype::IRRESPONSIBLE
            .iter()
            .zip(mix.irresponsible_shares)
            .map(|(a, s)| (a.name().to_string(), s))
            .collect();
        RawMix {
            responsible_fraction: mix.responsible_fraction,
            irresponsible_shares: Some(map),
        }
    }
}

impl MixSpec {
    /// Builds a mix, renormalizing `irresponsible_shares` (in
    /// `Archetype::IRRESPONSIBLE` order) to sum to exactly one.
    pub fn new(
        responsible_fraction: f64,
        irresponsible_shares: [f64; 5],
    ) -> Result<Self, MixError> {
        if !(0.0..=1.0).contains(&responsible_fraction) {
            return Err(invalid(format!(
                "responsible_fraction {responsible_fraction} is outside [0, 1]"
            )));
        }
        for (a, s) in Archetype::IRRESPONSIBLE.iter().zip(irresponsible_shares) {
            if !(0.0..=1.0).contains(&s) {
                return Err(invalid(format!("share for {a} is {s}, outside [0, 1]")));
            }
        }
        let sum: f64 = irresponsible_shares.iter().sum();
        if (sum - 1.0).abs() > SHARE_SUM_SLACK {
            return Err(invalid(format!(
                "irresponsible shares sum to {sum}, expected 1"
            )));
        }
        Ok(MixSpec {
            responsible_fraction,
            irresponsible_shares: irresponsible_shares.map(|s| s / sum),
        })
    }

    pub fn with_responsible_fraction(responsible_fraction: f64) -> Result<Self, MixError> {
        MixSpec::new(responsible_fraction, DEFAULT_IRRESPONSIBLE_SHARES)
    }

    /// Same irresponsible split with a different responsible fraction.
    pub fn with_fraction(&self, responsible_fraction: f64) -> Result<Self, MixError> {
        if !(0.0..=1.0).contains(&responsible_fraction) {
            return Err(invalid(format!(
                "responsible_fraction {responsible_fraction} is outside [0, 1]"
            )));
        }
        Ok(MixSpec {
            responsible_fraction,
            irresponsible_shares: self.irresponsible_shares,
        })
    }

    pub fn responsible_fraction(&self) -> f64 {
        self.responsible_fraction
    }

    /// Normalized share of `archetype` within the irresponsible group; zero for
    /// `Responsible`.
    pub fn irresponsible_share(&self, archetype: Archetype) -> f64 {
        Archetype::IRRESPONSIBLE
            .iter()
            .position(|a| *a == archetype)
            .map_or(0.0, |i| self.irresponsible_shares[i])
    }
}

/// Whole-population share of each archetype, indexed by archetype code.
pub fn archetype_shares(mix: &MixSpec) -> [f64; 6] {
    let mut out = [0.0; 6];
    out[0] = mix.responsible_fraction;
    for a in Archetype::IRRESPONSIBLE {
        out[a.code() as usize] = (1.0 - mix.responsible_fraction) * mix.irresponsible_share(a);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Driver {
    pub id: usize,
    pub archetype: Archetype,
    /// 1-based lane id; lane 1 is the left lane.
    pub lane: usize,
    /// 1-based rank within the lane.
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub drivers: Vec<Driver>,
    /// `lanes[k]` holds the ids of lane `k + 1` in position order.
    pub lanes: Vec<Vec<usize>>,
    pub seed: u64,
    pub mix: MixSpec,
}

impl Population {
    pub fn len(&self) -> usize {
        self.drivers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.drivers.is_empty()
    }

    pub fn lane_count(&self) -> usize {
        self.lanes.len()
    }

    /// Archetypes of lane `lane` (1-based) in position order.
    pub fn lane_archetypes(&self, lane: usize) -> Vec<Archetype> {
        self.lanes[lane - 1]
            .iter()
            .map(|&id| self.drivers[id].archetype)
            .collect()
    }

    /// Counts indexed by `[lane - 1][archetype code]`.
    pub fn lane_counts(&self) -> Vec<[usize; 6]> {
        let mut counts = vec![[0usize; 6]; self.lanes.len()];
        for d in &self.drivers {
            counts[d.lane - 1][d.archetype.code() as usize] += 1;
        }
        counts
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.drivers.len() * 32 + 64);
        out.push_str("id,archetype,category,lane,position\n");
        for d in &self.drivers {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                d.id,
                d.archetype.name(),
                d.archetype.category().symbol(),
                d.lane,
                d.position
            );
        }
        out
    }
}

/// Derives the 32-byte key of a named sub-stream of `seed`.
pub fn stream_key(seed: u64, label: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(label.as_bytes());
    hasher.update(seed.to_le_bytes());
    hasher.finalize().into()
}

/// Sequential word source for one sub-stream.
pub struct DrawStream(ChaCha20Rng);

impl DrawStream {
    pub fn new(seed: u64, label: &str) -> Self {
        DrawStream(ChaCha20Rng::from_seed(stream_key(seed, label)))
    }

    pub fn next_word(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in [0, 1) with 53 bits of resolution.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_word() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

pub const ARCHETYPE_STREAM: &str = "archetype";
pub const LANE_STREAM: &str = "lane";

/// Left lane campers always land in lane 1. Others are uniform over
/// `1..=lane_count`. One word is consumed either way.
pub fn assign_lane(archetype: Archetype, lane_count: usize, stream: &mut DrawStream) -> usize {
    let word = stream.next_word();
    if archetype == Archetype::LeftLaneCamper {
        return LEFT_LANE;
    }
    ((word as u128 * lane_count as u128) >> 64) as usize + 1
}

/// Inverse-CDF sampler over archetype codes.
struct ArchetypeSampler {
    cumulative: [f64; 6],
    /// Archetype returned when rounding leaves `u` above the final cumulative value.
    fallback: Archetype,
}

impl ArchetypeSampler {
    fn new(shares: [f64; 6]) -> Self {
        let mut cumulative = [0.0; 6];
        let mut acc = 0.0;
        for (c, s) in cumulative.iter_mut().zip(shares) {
            acc += s;
            *c = acc;
        }
        let fallback = shares
            .iter()
            .rposition(|&s| s > 0.0)
            .map_or(Archetype::Responsible, |i| Archetype::ALL[i]);
        ArchetypeSampler {
            cumulative,
            fallback,
        }
    }

    fn draw(&self, stream: &mut DrawStream) -> Archetype {
        let u = stream.next_unit();
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .map_or(self.fallback, |i| Archetype::ALL[i])
    }
}

pub fn generate_population(n: usize, mix: &MixSpec, seed: u64) -> Population {
    generate_population_with_lanes(n, mix, seed, DEFAULT_LANE_COUNT)
}

pub fn generate_population_with_lanes(
    n: usize,
    mix: &MixSpec,
    seed: u64,
    lane_count: usize,
) -> Population {
    assert!(lane_count >= 1, "at least one lane is required");
    let sampler = ArchetypeSampler::new(archetype_shares(mix));

    let mut archetype_stream = DrawStream::new(seed, ARCHETYPE_STREAM);
    let mut lane_stream = DrawStream::new(seed, LANE_STREAM);
    let mut lanes: Vec<Vec<usize>> = vec![Vec::new(); lane_count];
    let mut drivers = Vec::with_capacity(n);
    for id in 0..n {
        let archetype = sampler.draw(&mut archetype_stream);
        let lane = assign_lane(archetype, lane_count, &mut lane_stream);
        let members = &mut lanes[lane - 1];
        members.push(id);
        drivers.push(Driver {
            id,
            archetype,
            lane,
            position: members.len(),
        });
    }
    Population {
        drivers,
        lanes,
        seed,
        mix: mix.clone(),
    }
}

/// Drivers per category, indexed by `Category::index`.
pub fn category_counts(pop: &Population) -> [usize; 2] {
    let mut out = [0; 2];
    for d in &pop.drivers {
        out[d.archetype.category().index()] += 1;
    }
    out
}

/// Convenience for tests and reports: number of `category` drivers in `lane`.
pub fn lane_category_count(pop: &Population, lane: usize, category: Category) -> usize {
    pop.lanes[lane - 1]
        .iter()
        .filter(|&&id| pop.drivers[id].archetype.category() == category)
        .count()
}
