//! Run configuration and its flat `key = value` text form.

use alloc::format;
use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

use crate::sentence::PunctMode;

/// Transition system driving both training and decoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    /// One Attach-p action per word, left to right.
    #[default]
    L2r,
    /// Stack-pointer baseline: Shift-Attach-p and Reduce.
    TopDown,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "l2r" => Ok(Mode::L2r),
            "topdown" | "top-down" => Ok(Mode::TopDown),
            _ => Err(format!("unknown mode `{}` (l2r, topdown)", s)),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::L2r => "l2r",
            Mode::TopDown => "topdown",
        })
    }
}

/// How the left-to-right decoder keeps its output acyclic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CyclePolicy {
    /// Mask cycle-creating heads at every step.
    #[default]
    Forbid,
    /// Decode without masking, then break any cycles.
    PostFix,
}

impl FromStr for CyclePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "forbid" => Ok(CyclePolicy::Forbid),
            "post_fix" | "post-fix" => Ok(CyclePolicy::PostFix),
            _ => Err(format!("unknown cycle policy `{}` (forbid, post_fix)", s)),
        }
    }
}

impl fmt::Display for CyclePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CyclePolicy::Forbid => "forbid",
            CyclePolicy::PostFix => "post_fix",
        })
    }
}

/// Layer sizes of the scorer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dims {
    pub word_dim: usize,
    pub tag_dim: usize,
    /// Per direction; encoder states are twice this wide.
    pub enc_hidden: usize,
    pub dec_hidden: usize,
    pub label_hidden: usize,
}

impl Default for Dims {
    fn default() -> Self {
        Dims {
            word_dim: 32,
            tag_dim: 16,
            enc_hidden: 64,
            dec_hidden: 64,
            label_hidden: 32,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Global gradient norm clip; 0 disables clipping.
    pub clip_norm: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            learning_rate: 2e-3,
            beta1: 0.9,
            beta2: 0.9,
            epsilon: 1e-8,
            clip_norm: 5.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub beam_size: usize,
    pub cycle_policy: CyclePolicy,
    pub seed: u64,
    pub dims: Dims,
    pub optimizer: OptimizerConfig,
    pub epochs: usize,
    pub batch_size: usize,
    pub min_freq: usize,
    pub input_dropout: f64,
    pub init_scale: f64,
    pub punct: PunctMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::L2r,
            beam_size: 1,
            cycle_policy: CyclePolicy::Forbid,
            seed: 1,
            dims: Dims::default(),
            optimizer: OptimizerConfig::default(),
            epochs: 30,
            batch_size: 8,
            min_freq: 1,
            input_dropout: 0.0,
            init_scale: 1.0,
            punct: PunctMode::Ud,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConfigError {
    UnknownKey(String),
    BadValue { key: String, value: String, reason: String },
    Syntax { line: usize, text: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::UnknownKey(k) => write!(f, "unknown config key `{}`", k),
            ConfigError::BadValue { key, value, reason } => {
                write!(f, "bad value `{}` for `{}`: {}", value, key, reason)
            }
            ConfigError::Syntax { line, text } => {
                write!(f, "line {}: expected `key = value`, got `{}`", line, text)
            }
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

impl RunConfig {
    pub const KEYS: [&'static str; 20] = [
        "mode",
        "beam_size",
        "cycle_policy",
        "seed",
        "word_dim",
        "tag_dim",
        "enc_hidden",
        "dec_hidden",
        "label_hidden",
        "learning_rate",
        "beta1",
        "beta2",
        "epsilon",
        "clip_norm",
        "epochs",
        "batch_size",
        "min_freq",
        "input_dropout",
        "init_scale",
        "punct",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "mode" => self.mode = parse_value(key, value)?,
            "beam_size" => self.beam_size = parse_value(key, value)?,
            "cycle_policy" => self.cycle_policy = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "word_dim" => self.dims.word_dim = parse_value(key, value)?,
            "tag_dim" => self.dims.tag_dim = parse_value(key, value)?,
            "enc_hidden" => self.dims.enc_hidden = parse_value(key, value)?,
            "dec_hidden" => self.dims.dec_hidden = parse_value(key, value)?,
            "label_hidden" => self.dims.label_hidden = parse_value(key, value)?,
            "learning_rate" => self.optimizer.learning_rate = parse_value(key, value)?,
            "beta1" => self.optimizer.beta1 = parse_value(key, value)?,
            "beta2" => self.optimizer.beta2 = parse_value(key, value)?,
            "epsilon" => self.optimizer.epsilon = parse_value(key, value)?,
            "clip_norm" => self.optimizer.clip_norm = parse_value(key, value)?,
            "epochs" => self.epochs = parse_value(key, value)?,
            "batch_size" => self.batch_size = parse_value(key, value)?,
            "min_freq" => self.min_freq = parse_value(key, value)?,
            "input_dropout" => self.input_dropout = parse_value(key, value)?,
            "init_scale" => self.init_scale = parse_value(key, value)?,
            "punct" => self.punct = parse_value(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        self.check(key, value)
    }

    fn check(&self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |reason: &str| ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
            reason: reason.to_string(),
        };
        match key {
            "beam_size" if self.beam_size == 0 => Err(bad("must be at least 1")),
            "batch_size" if self.batch_size == 0 => Err(bad("must be at least 1")),
            "word_dim" | "tag_dim" | "enc_hidden" | "dec_hidden" | "label_hidden"
                if value == "0" =>
            {
                Err(bad("must be at least 1"))
            }
            "input_dropout" if !(0.0..1.0).contains(&self.input_dropout) => {
                Err(bad("must lie in [0, 1)"))
            }
            _ => Ok(()),
        }
    }

    /// Applies every `key = value` line of `text` on top of `self`. Blank
    /// lines and lines starting with `#` are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: lineno + 1,
                text: line.to_string(),
            })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut config = RunConfig::default();
        config.apply_text(text)?;
        Ok(config)
    }

    /// Renders every key; `from_text(to_text())` reproduces `self`.
    pub fn to_text(&self) -> String {
        let o = &self.optimizer;
        let d = &self.dims;
        format!(
            "mode = {}\nbeam_size = {}\ncycle_policy = {}\nseed = {}\nword_dim = {}\ntag_dim = {}\n\
             enc_hidden = {}\ndec_hidden = {}\nlabel_hidden = {}\nlearning_rate = {:?}\nbeta1 = {:?}\n\
             beta2 = {:?}\nepsilon = {:?}\nclip_norm = {:?}\nepochs = {}\nbatch_size = {}\nmin_freq = {}\n\
             input_dropout = {:?}\ninit_scale = {:?}\npunct = {}\n",
            self.mode,
            self.beam_size,
            self.cycle_policy,
            self.seed,
            d.word_dim,
            d.tag_dim,
            d.enc_hidden,
            d.dec_hidden,
            d.label_hidden,
            o.learning_rate,
            o.beta1,
            o.beta2,
            o.epsilon,
            o.clip_norm,
            self.epochs,
            self.batch_size,
            self.min_freq,
            self.input_dropout,
            self.init_scale,
            self.punct,
        )
    }
}
