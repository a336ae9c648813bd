use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{ChannelModel, ChannelParams};
use crate::controller::{DvaConfig, MiEvaluator, QuantGrid};
use crate::error::{FlashError, Result};
use crate::info::{VoltageGrid, DEFAULT_C2C_SAMPLES, DEFAULT_HERMITE_ORDER, MAX_HERMITE_ORDER};
use crate::lattice::{DEFAULT_CELLS_PER_WORDLINE, DEFAULT_WORDLINES};

/// Where the controller gets its picture of the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoMode {
    /// Exact convolved densities of the simulated channel.
    Ideal,
    /// Gaussian mixtures fitted to read histograms.
    Estimation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WritePolicy {
    /// Full-scale levels for the whole run.
    Fixed,
    /// One scale factor for both parities, chosen so even cells meet the
    /// setpoint.
    DvaSingleEvenTarget,
    /// A scale factor per parity.
    DvaJointAlternating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadPolicy {
    /// Midpoints between the written levels.
    FixedMid,
    /// Equal-likelihood crossings of the current channel estimate.
    Dta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderSchedule {
    EvenFirst,
    /// Swap the programming order of the parities every `cadence` cycles.
    Alternating,
}

/// One experiment, read from a flat TOML file. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub preset: String,
    /// Named channel constants the overrides below apply to.
    pub channel: String,
    pub model: ChannelModel,
    pub info_mode: InfoMode,
    pub write_policy: WritePolicy,
    pub read_policy: ReadPolicy,
    pub write_order: OrderSchedule,
    /// Settable voltage levels on [-1, 8] V; 0 means unrestricted.
    pub quantization: usize,
    pub cadence: u64,
    pub max_cycles: u64,
    pub wordlines: usize,
    pub cells_per_wordline: usize,
    pub seed: u64,
    pub target_mi: f64,
    pub margin_mi: f64,
    pub alpha_min: f64,
    pub alpha_epsilon: f64,
    pub retention_t: f64,
    pub programming_noise: bool,
    pub wearout_noise: bool,
    pub retention_noise: bool,
    pub programming_error: bool,
    pub cell_to_cell: bool,
    pub c2c_samples: usize,
    pub hermite_order: usize,
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub grid_step: f64,
    /// Raw-BER level that counts as end of life for BER lifetimes.
    pub ber_limit: f64,
    pub output_csv: Option<PathBuf>,
    pub output_plot: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let dva = DvaConfig::default();
        let grid = VoltageGrid::default();
        ExperimentConfig {
            preset: "custom".into(),
            channel: ChannelParams::APPENDIX_PRESET.into(),
            model: ChannelModel::Model2,
            info_mode: InfoMode::Ideal,
            write_policy: WritePolicy::Fixed,
            read_policy: ReadPolicy::FixedMid,
            write_order: OrderSchedule::EvenFirst,
            quantization: 0,
            cadence: dva.cadence,
            max_cycles: 6000,
            wordlines: DEFAULT_WORDLINES,
            cells_per_wordline: DEFAULT_CELLS_PER_WORDLINE,
            seed: 1,
            target_mi: dva.target_mi,
            margin_mi: dva.margin_mi,
            alpha_min: dva.alpha_min,
            alpha_epsilon: dva.epsilon,
            retention_t: 8760.0,
            programming_noise: true,
            wearout_noise: true,
            retention_noise: true,
            programming_error: true,
            cell_to_cell: true,
            c2c_samples: DEFAULT_C2C_SAMPLES,
            hermite_order: DEFAULT_HERMITE_ORDER,
            grid_lo: grid.lo,
            grid_hi: grid.hi(),
            grid_step: grid.step,
            ber_limit: 1e-2,
            output_csv: None,
            output_plot: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| FlashError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| FlashError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML form, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn channel_params(&self) -> Result<ChannelParams> {
        let mut p = ChannelParams::preset(&self.channel)?.with_model(self.model);
        p.retention_t = self.retention_t;
        p.components.programming = self.programming_noise;
        p.components.wearout = self.wearout_noise;
        p.components.retention = self.retention_noise;
        p.components.programming_error = self.programming_error;
        p.components.cell_to_cell = self.cell_to_cell;
        p.validate()?;
        Ok(p)
    }

    pub fn dva_config(&self) -> DvaConfig {
        DvaConfig {
            target_mi: self.target_mi,
            margin_mi: self.margin_mi,
            cadence: self.cadence,
            alpha_min: self.alpha_min,
            epsilon: self.alpha_epsilon,
            evaluator: match self.info_mode {
                InfoMode::Ideal => MiEvaluator::IdealGrid,
                InfoMode::Estimation => MiEvaluator::GaussianGh,
            },
        }
    }

    pub fn quant_grid(&self) -> Result<Option<QuantGrid>> {
        match self.quantization {
            0 => Ok(None),
            n => QuantGrid::standard(n).map(Some),
        }
    }

    pub fn voltage_grid(&self) -> Result<VoltageGrid> {
        VoltageGrid::new(self.grid_lo, self.grid_hi, self.grid_step)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FlashError::Config(m));
        if self.cadence == 0 {
            return bad("cadence must be at least 1".into());
        }
        if self.max_cycles < self.cadence {
            return bad(format!(
                "max_cycles ({}) must be at least one cadence ({})",
                self.max_cycles, self.cadence
            ));
        }
        if !matches!(self.quantization, 0 | 2..) {
            return bad(format!("quantization must be 0 (off) or >= 2 levels, got {}", self.quantization));
        }
        if !(2..=MAX_HERMITE_ORDER).contains(&self.hermite_order) {
            return bad(format!("hermite_order must lie in 2..={MAX_HERMITE_ORDER}"));
        }
        if !(self.ber_limit > 0.0 && self.ber_limit < 0.5) {
            return bad(format!("ber_limit must lie in (0, 0.5), got {}", self.ber_limit));
        }
        self.dva_config().validate()?;
        self.channel_params()?;
        self.voltage_grid()?;
        self.quant_grid()?;
        crate::lattice::CellLattice::new(self.wordlines, self.cells_per_wordline)
            .map(|_| ())
            .map_err(|e| FlashError::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ExperimentConfig::from_toml("cadance = 100\n").unwrap_err();
        assert_eq!(e.kind(), "config");
    }

    #[test]
    fn parses_enums() {
        let c = ExperimentConfig::from_toml(
            "model = \"model1\"\ninfo_mode = \"estimation\"\nwrite_policy = \"dva_joint_alternating\"\n\
             read_policy = \"dta\"\nwrite_order = \"alternating\"\nquantization = 128\n",
        )
        .unwrap();
        assert_eq!(c.model, ChannelModel::Model1);
        assert_eq!(c.quant_grid().unwrap().unwrap().n_levels, 128);
    }

    #[test]
    fn toml_round_trip() {
        let c = ExperimentConfig { seed: 42, alpha_min: 0.45, ..Default::default() };
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn inconsistent_configs_fail() {
        assert!(ExperimentConfig::from_toml("cadence = 0").is_err());
        assert!(ExperimentConfig::from_toml("max_cycles = 10").is_err());
        assert!(ExperimentConfig::from_toml("cells_per_wordline = 7").is_err());
        assert!(ExperimentConfig::from_toml("margin_mi = 0.2").is_err());
    }
}
