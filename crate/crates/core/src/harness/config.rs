//! Experiment configuration files (TOML).
//!
//! ```toml
//! mode = "sampled"        # "exact" or "sampled"
//! seed = 7                # required when sampled
//! trials = 50             # coarse trial directions N
//! batch = 10000           # pairs per trial M, required when sampled
//! rounds = 3              # refinement rounds
//! jitter_seed = 11        # optional; jitters the trial spiral
//! orthonormalize = false  # frame runs only
//! include_trials = true   # per-trial records in the report
//!
//! [alice]
//! direction = { theta = 1.5, phi = 2.1 }
//! # or: frame = [{ theta = 1.5707963267948966, phi = 0.0 }, ...]
//!
//! [prior]                 # omit or leave `poles` empty to disable
//! poles = [{ theta = 1.4, phi = 2.0 }]   # one per transferred axis
//!
//! [output]
//! report = "report.json"
//! ```
//!
//! Angles are radians: `theta` from +z, `phi` from +x. Seeds must fit in a
//! TOML integer (`0 ≤ seed < 2⁶³`). The canonical form is what
//! [`ExperimentConfig::to_toml`] writes: keys in the order above, optional
//! keys omitted when unset.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{HarnessError, HarnessResult};
use crate::math::Direction;
use crate::search::{EvaluationMode, HemispherePrior, SearchParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Polar {
    pub theta: f64,
    pub phi: f64,
}

impl Polar {
    pub fn direction(&self) -> Direction {
        Direction::from_polar(self.theta, self.phi)
    }

    fn check(&self, field: &str) -> HarnessResult<()> {
        if self.theta.is_finite() && self.phi.is_finite() {
            Ok(())
        } else {
            Err(HarnessError::validation(field, "angles must be finite"))
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AliceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Polar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Vec<Polar>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSpec {
    #[serde(default)]
    pub poles: Vec<Polar>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

fn default_true() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch: Option<usize>,
    #[serde(default)]
    pub rounds: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jitter_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub orthonormalize: bool,
    #[serde(default = "default_true", skip_serializing_if = "is_true")]
    pub include_trials: bool,
    pub alice: AliceSpec,
    #[serde(default)]
    pub prior: PriorSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

/// What a validated config asks to transfer.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Direction(Direction),
    Frame([Direction; 3]),
}

impl ExperimentConfig {
    /// Parses and validates.
    pub fn from_toml(text: &str, source_name: &str) -> HarnessResult<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(0);
            HarnessError::Parse {
                source_name: source_name.to_string(),
                line,
                message: e.message().to_string(),
            }
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn validate(&self) -> HarnessResult<()> {
        if self.trials == 0 {
            return Err(HarnessError::validation("trials", "must be at least 1"));
        }
        if self.mode == Mode::Sampled {
            if self.seed.is_none() {
                return Err(HarnessError::validation("seed", "required in sampled mode"));
            }
            match self.batch {
                None => return Err(HarnessError::validation("batch", "required in sampled mode")),
                Some(0) => return Err(HarnessError::validation("batch", "must be at least 1")),
                Some(_) => {}
            }
        }
        let axes = match (&self.alice.direction, &self.alice.frame) {
            (Some(d), None) => {
                d.check("alice.direction")?;
                1
            }
            (None, Some(frame)) => {
                if frame.len() != 3 {
                    return Err(HarnessError::validation("alice.frame", "must list exactly three axes"));
                }
                for p in frame {
                    p.check("alice.frame")?;
                }
                let dirs: Vec<Direction> = frame.iter().map(Polar::direction).collect();
                for i in 0..3 {
                    for j in i + 1..3 {
                        if dirs[i].dot(&dirs[j]).abs() > 1e-10 {
                            return Err(HarnessError::validation(
                                "alice.frame",
                                format!("axes {i} and {j} are not orthogonal within 1e-10"),
                            ));
                        }
                    }
                }
                3
            }
            _ => {
                return Err(HarnessError::validation(
                    "alice",
                    "set exactly one of alice.direction and alice.frame",
                ))
            }
        };
        for p in &self.prior.poles {
            p.check("prior.poles")?;
        }
        if !self.prior.poles.is_empty() && self.prior.poles.len() != axes {
            return Err(HarnessError::validation(
                "prior.poles",
                format!("expected {axes} pole(s), one per transferred axis"),
            ));
        }
        Ok(())
    }

    pub fn target(&self) -> Target {
        match (&self.alice.direction, &self.alice.frame) {
            (Some(d), _) => Target::Direction(d.direction()),
            (None, Some(f)) => Target::Frame([f[0].direction(), f[1].direction(), f[2].direction()]),
            (None, None) => unreachable!("validated config has a target"),
        }
    }

    pub fn evaluation_mode(&self) -> EvaluationMode {
        match self.mode {
            Mode::Exact => EvaluationMode::Exact,
            Mode::Sampled => EvaluationMode::Sampled {
                batch: self.batch.unwrap_or(0),
                seed: self.seed.unwrap_or(0),
            },
        }
    }

    /// Prior for axis `i`; disabled when no poles are configured.
    pub fn prior_for(&self, i: usize) -> HemispherePrior {
        self.prior
            .poles
            .get(i)
            .map_or_else(HemispherePrior::disabled, |p| HemispherePrior::new(p.direction()))
    }

    pub fn search_params(&self) -> SearchParams {
        SearchParams {
            trials: self.trials,
            rounds: self.rounds,
            prior: self.prior_for(0),
            mode: self.evaluation_mode(),
            jitter: self.jitter_seed,
        }
    }
}
