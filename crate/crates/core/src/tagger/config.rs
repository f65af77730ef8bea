use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::keylog::PauseMode;

/// How training instances are drawn within an epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Sampling {
    /// Every instance of every task exactly once, in a shuffled interleaving.
    #[default]
    Shuffled,
    /// Each step picks a task uniformly, then an instance of it uniformly.
    TaskUniform,
}

impl FromStr for Sampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shuffled" => Ok(Sampling::Shuffled),
            "task-uniform" => Ok(Sampling::TaskUniform),
            _ => Err(Error::Config(format!(
                "unknown sampling {s:?} (expected shuffled or task-uniform)"
            ))),
        }
    }
}

impl fmt::Display for Sampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sampling::Shuffled => "shuffled",
            Sampling::TaskUniform => "task-uniform",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub d_word: usize,
    /// Character embedding size; also the hidden size of the character bi-LSTM.
    pub d_char: usize,
    pub d_hidden: usize,
    pub n_layers: usize,
    pub sigma: f64,
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
    /// 1-based context layer that auxiliary heads read from.
    pub aux_output_layer: usize,
    pub pause_mode: PauseMode,
    pub sampling: Sampling,
    /// The main task always reads the topmost layer.
    pub main_task: String,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            d_word: 64,
            d_char: 100,
            d_hidden: 100,
            n_layers: 3,
            sigma: 0.2,
            lr: 0.1,
            epochs: 30,
            seed: 1,
            aux_output_layer: 3,
            pause_mode: PauseMode::ReleaseToPress,
            sampling: Sampling::Shuffled,
            main_task: "chunk".to_string(),
        }
    }
}

const KEYS: [&str; 12] = [
    "d_word",
    "d_char",
    "d_hidden",
    "n_layers",
    "sigma",
    "lr",
    "epochs",
    "seed",
    "aux_output_layer",
    "pause_mode",
    "sampling",
    "main_task",
];

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d_word == 0 || self.d_char == 0 || self.d_hidden == 0 || self.n_layers == 0 {
            return Err(Error::Config(
                "dimensions and layer count must be positive".into(),
            ));
        }
        if self.aux_output_layer == 0 || self.aux_output_layer > self.n_layers {
            return Err(Error::Config(format!(
                "aux_output_layer {} outside 1..={}",
                self.aux_output_layer, self.n_layers
            )));
        }
        if !(self.sigma >= 0.0 && self.lr > 0.0 && self.sigma.is_finite() && self.lr.is_finite()) {
            return Err(Error::Config("sigma must be >= 0 and lr > 0".into()));
        }
        Ok(())
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "d_word" => self.d_word = num(key, value)?,
            "d_char" => self.d_char = num(key, value)?,
            "d_hidden" => self.d_hidden = num(key, value)?,
            "n_layers" | "layers" => {
                let layers = num(key, value)?;
                // keep "aux at the top" unless it was set explicitly
                if self.aux_output_layer == self.n_layers {
                    self.aux_output_layer = layers;
                }
                self.n_layers = layers;
            }
            "sigma" => self.sigma = num(key, value)?,
            "lr" => self.lr = num(key, value)?,
            "epochs" => self.epochs = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "aux_output_layer" => self.aux_output_layer = num(key, value)?,
            "pause_mode" => self.pause_mode = value.parse()?,
            "sampling" => self.sampling = value.parse()?,
            "main_task" => self.main_task = value.to_string(),
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file on top of `self`. `#` starts a
    /// comment line.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, "expected key = value"))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::parse(i + 1, e.to_string()))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut config = ModelConfig::default();
        config.apply_text(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Renders every key in the same `key = value` format.
    pub fn to_text(&self) -> String {
        KEYS.iter()
            .map(|k| format!("{k} = {}\n", self.get(k)))
            .collect()
    }

    fn get(&self, key: &str) -> String {
        match key {
            "d_word" => self.d_word.to_string(),
            "d_char" => self.d_char.to_string(),
            "d_hidden" => self.d_hidden.to_string(),
            "n_layers" => self.n_layers.to_string(),
            "sigma" => self.sigma.to_string(),
            "lr" => self.lr.to_string(),
            "epochs" => self.epochs.to_string(),
            "seed" => self.seed.to_string(),
            "aux_output_layer" => self.aux_output_layer.to_string(),
            "pause_mode" => self.pause_mode.to_string(),
            "sampling" => self.sampling.to_string(),
            "main_task" => self.main_task.clone(),
            _ => unreachable!("unknown key {key}"),
        }
    }
}
