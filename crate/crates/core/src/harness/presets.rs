use super::config::{ExperimentConfig, InfoMode, OrderSchedule, ReadPolicy, WritePolicy};
use crate::channel::ChannelModel;
use crate::error::{FlashError, Result};

/// Names accepted by [`preset`].
pub const PRESET_NAMES: &[&str] = &[
    "fixed-model2",
    "fixed-model1",
    "fig4",
    "fig5",
    "fig6",
    "fig7",
    "fig8",
    "fig9-fixed-fixed",
    "fig9-fixed-dta",
    "fig9-dva-dta",
    "fig10",
    "fig11",
    "quant256",
];

fn base(name: &str) -> ExperimentConfig {
    ExperimentConfig {
        preset: name.to_string(),
        ..ExperimentConfig::default()
    }
}

fn fixed(name: &str, model: ChannelModel) -> ExperimentConfig {
    ExperimentConfig {
        model,
        max_cycles: 4000,
        ..base(name)
    }
}

fn joint(name: &str, model: ChannelModel, info_mode: InfoMode) -> ExperimentConfig {
    ExperimentConfig {
        model,
        info_mode,
        write_policy: WritePolicy::DvaJointAlternating,
        write_order: OrderSchedule::Alternating,
        max_cycles: 8000,
        ..base(name)
    }
}

fn quantized(name: &str, levels: usize) -> ExperimentConfig {
    ExperimentConfig {
        quantization: levels,
        ..joint(name, ChannelModel::Model2, InfoMode::Estimation)
    }
}

/// Built-in experiment definitions, one per reproduced figure.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let cfg = match name {
        "fixed-model2" => fixed(name, ChannelModel::Model2),
        "fixed-model1" => fixed(name, ChannelModel::Model1),
        "fig4" => ExperimentConfig {
            write_policy: WritePolicy::DvaSingleEvenTarget,
            max_cycles: 8000,
            ..base(name)
        },
        "fig5" | "fig6" => joint(name, ChannelModel::Model2, InfoMode::Ideal),
        "fig7" => joint(name, ChannelModel::Model1, InfoMode::Estimation),
        "fig8" => joint(name, ChannelModel::Model2, InfoMode::Estimation),
        "fig9-fixed-fixed" => fixed(name, ChannelModel::Model2),
        "fig9-fixed-dta" => ExperimentConfig {
            info_mode: InfoMode::Estimation,
            read_policy: ReadPolicy::Dta,
            ..fixed(name, ChannelModel::Model2)
        },
        "fig9-dva-dta" => ExperimentConfig {
            alpha_min: 0.45,
            read_policy: ReadPolicy::Dta,
            ..joint(name, ChannelModel::Model2, InfoMode::Estimation)
        },
        "fig10" => quantized(name, 64),
        "fig11" => quantized(name, 128),
        "quant256" => quantized(name, 256),
        other => {
            return Err(FlashError::Config(format!(
                "unknown preset `{other}`; known: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    debug_assert!(cfg.validate().is_ok());
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_is_valid() {
        for name in PRESET_NAMES {
            let c = preset(name).unwrap();
            c.validate().unwrap();
            assert_eq!(c.preset, *name);
        }
        assert!(preset("fig12").is_err());
    }

    #[test]
    fn dta_experiment_bounds_alpha() {
        assert_eq!(preset("fig9-dva-dta").unwrap().alpha_min, 0.45);
    }
}
