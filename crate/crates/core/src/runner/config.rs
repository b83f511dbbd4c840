//! Scenario configuration and its TOML document form.
//!
//! ```toml
//! [scenario]
//! name = "custom"            # all-responsible | all-irresponsible | mixed50 | custom
//! n = 500000
//! seed = 1
//! lane_count = 3
//! running_total_positions = 25
//! output_dir = "runs/custom"
//!
//! [mix]                      # required for custom; presets only take the shares
//! responsible_fraction = 0.3
//! [mix.irresponsible_shares]
//! Selfish = 0.5
//! Dangerous = 0.5
//!
//! [model]                    # any subset; missing keys keep the published values
//! mismatch_penalty = 0.5
//! [model.pairs.ir]
//! matrix = [[1.0, 1.0], [-1.0, -1.0]]
//! p_follow = 0.3
//! p_pass = 0.7
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::RunError;
use crate::model::ModelParams;
use crate::population::{MixSpec, DEFAULT_IRRESPONSIBLE_SHARES, DEFAULT_LANE_COUNT};
use crate::stats::DEFAULT_EXACT_CUTOFF;

pub const DEFAULT_N: usize = 500_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_POSITIONS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    AllResponsible,
    AllIrresponsible,
    #[serde(rename = "mixed50")]
    Mixed50,
    Custom,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::AllResponsible => "all-responsible",
            Scenario::AllIrresponsible => "all-irresponsible",
            Scenario::Mixed50 => "mixed50",
            Scenario::Custom => "custom",
        }
    }

    /// Responsible fraction fixed by the preset; `None` for custom.
    pub fn preset_fraction(self) -> Option<f64> {
        match self {
            Scenario::AllResponsible => Some(1.0),
            Scenario::AllIrresponsible => Some(0.0),
            Scenario::Mixed50 => Some(0.5),
            Scenario::Custom => None,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            Scenario::AllResponsible,
            Scenario::AllIrresponsible,
            Scenario::Mixed50,
            Scenario::Custom,
        ]
        .into_iter()
        .find(|sc| sc.name() == s)
        .ok_or_else(|| RunError::Config(format!("unknown scenario `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub seed: u64,
    pub lane_count: usize,
    /// Explicit mix; required for `Custom`. Presets take only its shares.
    pub mix: Option<MixSpec>,
    pub params: ModelParams,
    pub running_total_positions: usize,
    pub exact_cutoff: usize,
    pub output_dir: PathBuf,
}

impl ScenarioConfig {
    pub fn preset(scenario: Scenario) -> Self {
        ScenarioConfig {
            scenario,
            n: DEFAULT_N,
            seed: DEFAULT_SEED,
            lane_count: DEFAULT_LANE_COUNT,
            mix: None,
            params: ModelParams::default(),
            running_total_positions: DEFAULT_POSITIONS,
            exact_cutoff: DEFAULT_EXACT_CUTOFF,
            output_dir: PathBuf::from("out"),
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_output_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.output_dir = dir.into();
        self
    }

    /// Mix actually simulated.
    pub fn resolved_mix(&self) -> Result<MixSpec, RunError> {
        match (self.scenario.preset_fraction(), &self.mix) {
            (Some(fraction), Some(mix)) => Ok(mix.with_fraction(fraction)?),
            (Some(fraction), None) => Ok(MixSpec::new(fraction, DEFAULT_IRRESPONSIBLE_SHARES)?),
            (None, Some(mix)) => Ok(mix.clone()),
            (None, None) => Err(RunError::Config(
                "scenario `custom` requires a [mix] section".into(),
            )),
        }
    }

    /// Same configuration switched to another preset, keeping shares and params.
    pub fn companion(&self, scenario: Scenario) -> Self {
        ScenarioConfig {
            scenario,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.lane_count == 0 {
            return Err(RunError::Config("lane_count must be at least 1".into()));
        }
        self.params.validate()?;
        self.resolved_mix()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioSection {
    name: Option<Scenario>,
    n: Option<usize>,
    seed: Option<u64>,
    lane_count: Option<usize>,
    running_total_positions: Option<usize>,
    exact_cutoff: Option<usize>,
    output_dir: Option<PathBuf>,
}

/// Parsed config document; every key optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    #[serde(default)]
    scenario: ScenarioSection,
    mix: Option<MixSpec>,
    #[serde(default)]
    model: ModelParams,
}

impl ConfigDocument {
    pub fn parse(text: &str) -> Result<Self, RunError> {
        toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
        Self::parse(&text)
    }

    /// Builds a config from this document; `scenario` overrides the document's
    /// `[scenario] name` when given.
    pub fn into_config(self, scenario: Option<Scenario>) -> Result<ScenarioConfig, RunError> {
        let chosen = scenario
            .or(self.scenario.name)
            .ok_or_else(|| RunError::Config("no scenario given".into()))?;
        let defaults = ScenarioConfig::preset(chosen);
        let s = self.scenario;
        let config = ScenarioConfig {
            scenario: chosen,
            n: s.n.unwrap_or(defaults.n),
            seed: s.seed.unwrap_or(defaults.seed),
            lane_count: s.lane_count.unwrap_or(defaults.lane_count),
            mix: self.mix,
            params: self.model,
            running_total_positions: s
                .running_total_positions
                .unwrap_or(defaults.running_total_positions),
            exact_cutoff: s.exact_cutoff.unwrap_or(defaults.exact_cutoff),
            output_dir: s.output_dir.unwrap_or(defaults.output_dir),
        };
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_fix_fraction() {
        for (sc, frac) in [
            (Scenario::AllResponsible, 1.0),
            (Scenario::AllIrresponsible, 0.0),
            (Scenario::Mixed50, 0.5),
        ] {
            let c = ScenarioConfig::preset(sc);
            assert_eq!(c.resolved_mix().unwrap().responsible_fraction(), frac);
            assert_eq!(c.n, 500_000);
            assert_eq!(c.lane_count, 3);
            assert_eq!(c.running_total_positions, 25);
        }
        assert!(ScenarioConfig::preset(Scenario::Custom)
            .resolved_mix()
            .is_err());
    }

    #[test]
    fn scenario_names_round_trip() {
        for name in ["all-responsible", "all-irresponsible", "mixed50", "custom"] {
            assert_eq!(name.parse::<Scenario>().unwrap().name(), name);
        }
        assert!("half".parse::<Scenario>().is_err());
    }

    #[test]
    fn document_parsing_and_overrides() {
        let doc = ConfigDocument::parse(
            "[scenario]\nname = \"custom\"\nn = 1000\nseed = 9\n[mix]\nresponsible_fraction = 0.3\n[model]\nmismatch_penalty = 1.0\n",
        )
        .unwrap();
        let c = doc.into_config(None).unwrap();
        assert_eq!(c.scenario, Scenario::Custom);
        assert_eq!((c.n, c.seed), (1000, 9));
        assert_eq!(c.params.mismatch_penalty, 1.0);
        assert_eq!(c.params.baseline_r, 5.0);
        assert_eq!(c.resolved_mix().unwrap().responsible_fraction(), 0.3);

        // Preset keeps the preset fraction even with a [mix] section.
        let doc = ConfigDocument::parse("[mix]\nresponsible_fraction = 0.3\n").unwrap();
        let c = doc.into_config(Some(Scenario::Mixed50)).unwrap();
        assert_eq!(c.resolved_mix().unwrap().responsible_fraction(), 0.5);

        assert!(ConfigDocument::parse("")
            .unwrap()
            .into_config(None)
            .is_err());
        assert!(ConfigDocument::parse("[scenario]\nbogus = 1\n").is_err());
        assert!(ConfigDocument::parse("[scenario]\nname = \"custom\"\n")
            .unwrap()
            .into_config(None)
            .is_err());
        let bad_params =
            "[model.pairs.rr]\nmatrix = [[0.0, 0.0], [0.0, 0.0]]\np_follow = 0.9\np_pass = 0.9\n";
        assert!(ConfigDocument::parse(bad_params)
            .unwrap()
            .into_config(Some(Scenario::Mixed50))
            .is_err());
    }

    #[test]
    fn empty_document_reproduces_published_model() {
        let c = ConfigDocument::parse("")
            .unwrap()
            .into_config(Some(Scenario::Mixed50))
            .unwrap();
        assert_eq!(c, ScenarioConfig::preset(Scenario::Mixed50));
    }
}
