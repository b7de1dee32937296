//! Scenario configuration: one JSON document describing the acoustic
//! environment, the link, the game and the jammer distances to sweep.
//! Every field has a default, so `{}` is the reference scenario.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel_model::{
    error_model_for_distance, AcousticEnvironment, EmpiricalPerTable, ErrorModel, LinkParams, PerMode, PerModel,
};
use crate::error::{Error, Result};
use crate::game_solver::{GameConfig, Horizon, JammerKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GameSettings {
    pub k_info: u32,
    pub b_t0: u32,
    pub b_j0: u32,
    pub alpha: f64,
    pub horizon: Horizon,
    pub discount: f64,
    pub jammer: JammerKind,
}

impl Default for GameSettings {
    fn default() -> Self {
        Self {
            k_info: 4,
            b_t0: 200,
            b_j0: 200,
            alpha: 0.4,
            horizon: Horizon::Finite(30),
            discount: 1.0,
            jammer: JammerKind::Equilibrium,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub environment: AcousticEnvironment,
    pub link: LinkParams,
    pub game: GameSettings,
    pub per_mode: PerMode,
    /// `distance_m,per_blocked` CSV used in empirical mode.
    pub empirical_table_path: Option<PathBuf>,
    /// Clear-channel PER used in empirical mode.
    pub empirical_per_clear: f64,
    /// Jammer-receiver distances, m.
    pub sweep_m: Vec<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            environment: AcousticEnvironment::default(),
            link: LinkParams::default(),
            game: GameSettings::default(),
            per_mode: PerMode::Uncoded,
            empirical_table_path: None,
            empirical_per_clear: 0.0,
            sweep_m: default_sweep(),
        }
    }
}

/// 20 m to 180 m in 10 m steps.
pub fn default_sweep() -> Vec<f64> {
    (2..=18).map(|i| i as f64 * 10.0).collect()
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file. A relative empirical table path is taken
    /// relative to the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut config =
            Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), strip_prefix(e))))?;
        if let (Some(table), Some(dir)) = (&config.empirical_table_path, path.parent()) {
            if table.is_relative() {
                config.empirical_table_path = Some(dir.join(table));
            }
        }
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        self.environment.validate()?;
        self.link.validate()?;
        if self.sweep_m.is_empty() {
            return Err(Error::Config("sweep_m must list at least one distance".into()));
        }
        if let Some(d) = self.sweep_m.iter().find(|d| !(**d > 0.0) || !d.is_finite()) {
            return Err(Error::Config(format!("sweep distance {d} is not positive")));
        }
        if !(0.0..=1.0).contains(&self.empirical_per_clear) {
            return Err(Error::Config("empirical_per_clear must lie in [0, 1]".into()));
        }
        if self.per_mode == PerMode::Empirical && self.empirical_table_path.is_none() {
            return Err(Error::Config("empirical mode needs empirical_table_path".into()));
        }
        self.game_config(&ErrorModel { p_clear: 0.0, p_blocked: 0.0 }).validate()
    }

    pub fn per_model(&self, mode: PerMode) -> Result<PerModel> {
        Ok(match mode {
            PerMode::Uncoded => PerModel::Uncoded,
            PerMode::Coded => PerModel::Coded,
            PerMode::Empirical => {
                let path = self
                    .empirical_table_path
                    .as_ref()
                    .ok_or_else(|| Error::Config("empirical mode needs empirical_table_path".into()))?;
                PerModel::Empirical(EmpiricalPerTable::from_csv_path(path, self.empirical_per_clear)?)
            }
        })
    }

    pub fn error_model(&self, distance_m: f64, model: &PerModel) -> Result<ErrorModel> {
        error_model_for_distance(distance_m, &self.link, &self.environment, model)
    }

    pub fn game_config(&self, errors: &ErrorModel) -> GameConfig {
        let g = &self.game;
        GameConfig {
            k_info: g.k_info,
            b_t0: g.b_t0,
            b_j0: g.b_j0,
            alpha: g.alpha,
            horizon: g.horizon,
            discount: g.discount,
            p_clear: errors.p_clear,
            p_blocked: errors.p_blocked,
            jammer: g.jammer,
        }
    }
}

fn strip_prefix(e: Error) -> String {
    match e {
        Error::Config(msg) => msg,
        other => other.to_string(),
    }
}
