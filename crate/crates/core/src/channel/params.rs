use serde::{Deserialize, Serialize};

use crate::error::{FlashError, Result};

/// Which ground-truth channel the simulator generates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ChannelModel {
    /// Programming, wear-out and retention noise only.
    Model1,
    /// Model 1 plus programming errors and cell-to-cell interference.
    #[default]
    Model2,
}

/// Switches for individual noise components. Everything is on by default;
/// tests and degenerate experiments turn components off to isolate effects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseComponents {
    pub programming: bool,
    pub wearout: bool,
    pub retention: bool,
    pub programming_error: bool,
    pub cell_to_cell: bool,
}

impl Default for NoiseComponents {
    fn default() -> Self {
        Self::all()
    }
}

impl NoiseComponents {
    pub const fn all() -> Self {
        NoiseComponents {
            programming: true,
            wearout: true,
            retention: true,
            programming_error: true,
            cell_to_cell: true,
        }
    }

    pub const fn none() -> Self {
        NoiseComponents {
            programming: false,
            wearout: false,
            retention: false,
            programming_error: false,
            cell_to_cell: false,
        }
    }
}

/// Coupling-ratio statistics for cell-to-cell interference.
///
/// Mean ratios are stored at unit strength; the effective mean of each
/// ratio is `base * strength`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct C2cParams {
    /// Same-wordline neighbour coupling at unit strength.
    pub base_x: f64,
    /// Directly-above neighbour coupling at unit strength.
    pub base_y: f64,
    /// Diagonal neighbour coupling at unit strength.
    pub base_xy: f64,
    pub strength: f64,
    /// Half-width of the truncation window, as a fraction of the mean.
    pub width_factor: f64,
    /// Standard deviation, as a fraction of the mean.
    pub std_factor: f64,
}

impl C2cParams {
    pub fn mean_x(&self) -> f64 {
        self.base_x * self.strength
    }
    pub fn mean_y(&self) -> f64 {
        self.base_y * self.strength
    }
    pub fn mean_xy(&self) -> f64 {
        self.base_xy * self.strength
    }
}

/// One `P(from -> to) = exp(c1 * x + c0)` entry of the programming-error law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeCoefficient {
    pub from: usize,
    pub to: usize,
    pub c1: f64,
    pub c0: f64,
}

/// Static constants of the ground-truth read channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub sigma_e: f64,
    pub sigma_p: f64,
    pub a_w: f64,
    pub c_w: f64,
    pub k_i: f64,
    pub a_r: f64,
    pub b_r: f64,
    pub k_o: f64,
    /// Retention time normalisation, hours.
    pub t0: f64,
    /// Largest programmed-minus-erased voltage difference of a cell.
    pub v_max: f64,
    pub default_thresholds: [f64; 4],
    pub c2c: C2cParams,
    pub pe_coeffs: Vec<PeCoefficient>,
    /// P/E count that maps to `x = 1` in the programming-error law.
    pub pe_norm: f64,
    pub model: ChannelModel,
    /// Retention time applied to every read, hours.
    pub retention_t: f64,
    #[serde(default)]
    pub components: NoiseComponents,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self::paper_appendix()
    }
}

impl ChannelParams {
    /// Name of the built-in preset returned by [`ChannelParams::paper_appendix`].
    pub const APPENDIX_PRESET: &'static str = "paper-appendix";

    /// Reference channel constants for a 2-bit MLC device.
    pub fn paper_appendix() -> Self {
        ChannelParams {
            sigma_e: 0.35,
            sigma_p: 0.05,
            a_w: 1.8e-4,
            c_w: 1.26e-3,
            k_i: 0.62,
            a_r: 7.0e-4,
            b_r: 4.76e-3,
            k_o: 0.3,
            t0: 1.0,
            v_max: 16.0,
            default_thresholds: [2.8, 5.2, 6.4, 7.86],
            c2c: C2cParams {
                base_x: 0.1,
                base_y: 0.08,
                base_xy: 0.006,
                strength: 0.2,
                width_factor: 0.2,
                std_factor: 0.3,
            },
            pe_coeffs: vec![
                PeCoefficient { from: 0, to: 2, c1: 0.87, c0: -11.89 },
                PeCoefficient { from: 0, to: 3, c1: 1.41, c0: -19.82 },
                PeCoefficient { from: 1, to: 2, c1: 1.63, c0: -19.22 },
                PeCoefficient { from: 1, to: 3, c1: 0.73, c0: -11.67 },
                PeCoefficient { from: 2, to: 3, c1: 1.50, c0: -17.69 },
            ],
            pe_norm: 3000.0,
            model: ChannelModel::Model2,
            retention_t: 8760.0,
            components: NoiseComponents::all(),
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            Self::APPENDIX_PRESET => Ok(Self::paper_appendix()),
            other => Err(FlashError::Config(format!("unknown channel preset `{other}`"))),
        }
    }

    pub fn with_model(mut self, model: ChannelModel) -> Self {
        self.model = model;
        self
    }

    /// Programming errors are simulated (Model 2 and not switched off).
    pub fn pe_active(&self) -> bool {
        self.model == ChannelModel::Model2 && self.components.programming_error
    }

    /// Cell-to-cell interference is simulated.
    pub fn c2c_active(&self) -> bool {
        self.model == ChannelModel::Model2
            && self.components.cell_to_cell
            && self.c2c.strength > 0.0
    }

    /// Programming-noise standard deviation of a cell programmed to `level`.
    pub fn programming_sigma(&self, level: usize) -> f64 {
        if !self.components.programming {
            0.0
        } else if level == 0 {
            self.sigma_e
        } else {
            self.sigma_p
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(FlashError::Config(msg));
        let positive = [
            ("sigma_e", self.sigma_e),
            ("sigma_p", self.sigma_p),
            ("a_w", self.a_w),
            ("c_w", self.c_w),
            ("a_r", self.a_r),
            ("b_r", self.b_r),
            ("t0", self.t0),
            ("v_max", self.v_max),
            ("pe_norm", self.pe_norm),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.sigma_e <= self.sigma_p {
            return bad(format!(
                "erased-state sigma ({}) must exceed programmed-state sigma ({})",
                self.sigma_e, self.sigma_p
            ));
        }
        if !(self.k_i > 0.0 && self.k_i <= 1.0 && self.k_o > 0.0 && self.k_o <= 1.0) {
            return bad(format!("exponents must lie in (0, 1]: k_i={}, k_o={}", self.k_i, self.k_o));
        }
        if self.retention_t < 0.0 || !self.retention_t.is_finite() {
            return bad(format!("retention time must be >= 0, got {}", self.retention_t));
        }
        let t = &self.default_thresholds;
        if !t.windows(2).all(|w| w[0] < w[1]) {
            return bad(format!("default thresholds must be strictly increasing: {t:?}"));
        }
        if self.v_max < t[3] - t[0] {
            return bad(format!("v_max ({}) is smaller than the threshold span", self.v_max));
        }
        let c = &self.c2c;
        for (name, v) in [
            ("c2c.base_x", c.base_x),
            ("c2c.base_y", c.base_y),
            ("c2c.base_xy", c.base_xy),
            ("c2c.strength", c.strength),
            ("c2c.width_factor", c.width_factor),
            ("c2c.std_factor", c.std_factor),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        for pe in &self.pe_coeffs {
            if pe.from > 3 || pe.to > 3 || pe.to <= pe.from {
                return bad(format!(
                    "programming-error entries must be upward transitions between levels 0..3, got {} -> {}",
                    pe.from, pe.to
                ));
            }
        }
        Ok(())
    }
}
