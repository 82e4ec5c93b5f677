//! Link adaptation: SINR to spectral efficiency, CQI quantization and the
//! resulting per-RBG transport capacity.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Target BER used throughout the reference scenarios (Γ ≈ 5.53).
pub const DEFAULT_TARGET_BER: f64 = 5e-5;

/// SNR gap between the Shannon bound and a practical modulation at a target
/// bit error rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrGap {
    gamma: f64,
    target_ber: f64,
}

impl SnrGap {
    /// Γ = −ln(5·BER)/1.5. Rejects any BER for which Γ would drop below 1.
    pub fn from_ber(target_ber: f64) -> Result<Self> {
        if !(target_ber > 0.0 && target_ber < 0.5) {
            return Err(Error::InvalidLink(format!(
                "target BER {target_ber} outside (0, 0.5)"
            )));
        }
        let gamma = -(5.0 * target_ber).ln() / 1.5;
        if gamma < 1.0 - 1e-12 {
            return Err(Error::InvalidLink(format!(
                "target BER {target_ber} gives SNR gap {gamma:.4} < 1"
            )));
        }
        Ok(Self {
            gamma: gamma.max(1.0),
            target_ber,
        })
    }

    /// Γ = 1: the Shannon bound.
    pub fn shannon() -> Self {
        Self {
            gamma: 1.0,
            target_ber: (-1.5f64).exp() / 5.0,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn target_ber(&self) -> f64 {
        self.target_ber
    }
}

impl Default for SnrGap {
    fn default() -> Self {
        Self::from_ber(DEFAULT_TARGET_BER).expect("default BER is valid")
    }
}

/// η = log₂(1 + γ/Γ), with `sinr` linear.
pub fn spectral_efficiency(sinr: f64, gap: &SnrGap) -> f64 {
    (sinr.max(0.0) / gap.gamma).ln_1p() / std::f64::consts::LN_2
}

pub const CQI_LEVELS: usize = 16;

/// Upper spectral-efficiency boundary of each CQI interval. Entry 15 has no
/// upper boundary; its value is the efficiency credited to CQI 15.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CqiTable {
    thresholds: [f64; CQI_LEVELS],
}

const DEFAULT_THRESHOLDS: [f64; CQI_LEVELS] = [
    0.15, 0.23, 0.38, 0.6, 0.88, 1.18, 1.48, 1.91, 2.41, 2.73, 3.32, 3.9, 4.52, 5.12, 5.55, 5.55,
];

impl Default for CqiTable {
    fn default() -> Self {
        Self {
            thresholds: DEFAULT_THRESHOLDS,
        }
    }
}

impl CqiTable {
    pub fn new(thresholds: [f64; CQI_LEVELS]) -> Result<Self> {
        if thresholds.iter().any(|t| !t.is_finite() || *t <= 0.0) {
            return Err(Error::InvalidCqiTable(
                "thresholds must be finite and positive".into(),
            ));
        }
        if thresholds[..15].windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidCqiTable(
                "thresholds must be strictly increasing through CQI 14".into(),
            ));
        }
        if thresholds[15] < thresholds[14] {
            return Err(Error::InvalidCqiTable(
                "CQI 15 efficiency must not be below the CQI 14 boundary".into(),
            ));
        }
        Ok(Self { thresholds })
    }

    pub fn thresholds(&self) -> &[f64; CQI_LEVELS] {
        &self.thresholds
    }

    /// Largest CQI whose lower boundary `eta` exceeds.
    pub fn cqi_from_efficiency(&self, eta: f64) -> u8 {
        self.thresholds[..15]
            .iter()
            .take_while(|&&t| eta > t)
            .count() as u8
    }

    /// Efficiency credited to a CQI when transmitting. CQI 0 means no
    /// transmission.
    pub fn efficiency(&self, cqi: u8) -> f64 {
        match cqi {
            0 => 0.0,
            q => self.thresholds[usize::from(q.min(15))],
        }
    }

    /// Bits carried over `bandwidth` Hz for one `tti` at the given CQI.
    pub fn rate_from_cqi(&self, cqi: u8, bandwidth: f64, tti: f64) -> f64 {
        self.efficiency(cqi) * bandwidth * tti
    }
}

impl FromStr for CqiTable {
    type Err = Error;

    /// Sixteen whitespace- or line-separated efficiencies; `#` starts a
    /// comment. The last entry may be written as `>5.55`.
    fn from_str(s: &str) -> Result<Self> {
        let tokens: Vec<&str> = s
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(|l| l.split(|c: char| c.is_whitespace() || c == ','))
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.len() != CQI_LEVELS {
            return Err(Error::InvalidCqiTable(format!(
                "expected {CQI_LEVELS} entries, found {}",
                tokens.len()
            )));
        }
        let mut thresholds = [0.0; CQI_LEVELS];
        for (slot, tok) in thresholds.iter_mut().zip(&tokens) {
            *slot = tok
                .trim_start_matches('>')
                .parse()
                .map_err(|_| Error::InvalidCqiTable(format!("cannot parse {tok:?}")))?;
        }
        Self::new(thresholds)
    }
}

/// Which efficiency curve turns SINR into bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateModel {
    /// Eq. η = log₂(1 + γ/Γ) without quantization.
    Continuous,
    /// Via the CQI table.
    #[default]
    Quantized,
}

impl fmt::Display for RateModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateModel::Continuous => f.write_str("continuous"),
            RateModel::Quantized => f.write_str("quantized"),
        }
    }
}

/// Everything needed to turn a SINR into a rate.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkModel {
    pub gap: SnrGap,
    pub table: CqiTable,
    pub rate_model: RateModel,
}

impl LinkModel {
    pub fn efficiency(&self, sinr: f64) -> f64 {
        let eta = spectral_efficiency(sinr, &self.gap);
        match self.rate_model {
            RateModel::Continuous => eta,
            RateModel::Quantized => self.table.efficiency(self.table.cqi_from_efficiency(eta)),
        }
    }

    pub fn cqi(&self, sinr: f64) -> u8 {
        self.table
            .cqi_from_efficiency(spectral_efficiency(sinr, &self.gap))
    }

    /// Bits in one TTI over `bandwidth` at the given SINR.
    pub fn bits(&self, sinr: f64, bandwidth: f64, tti: f64) -> f64 {
        self.efficiency(sinr) * bandwidth * tti
    }
}
