//! Fading channel generation and SINR mapping.

mod fading;
mod pdp;

pub use fading::{
    generate_flat_trace, generate_selective_trace, FadingModel, FadingSpec, JakesProcess,
    TapProcess, DEFAULT_OSCILLATORS, MIN_OSCILLATORS,
};
pub use pdp::{PowerDelayProfile, Tap, BUILTIN_PROFILES};

use crate::error::{Error, Result};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Unit-mean power gains indexed by (UE, TTI, RBG).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTrace {
    gains: Vec<f64>,
    n_ues: usize,
    n_ttis: usize,
    rbg_count: usize,
    tti_duration: f64,
}

impl ChannelTrace {
    pub(crate) fn new(
        gains: Vec<f64>,
        n_ues: usize,
        n_ttis: usize,
        rbg_count: usize,
        tti_duration: f64,
    ) -> Self {
        debug_assert_eq!(gains.len(), n_ues * n_ttis * rbg_count);
        Self {
            gains,
            n_ues,
            n_ttis,
            rbg_count,
            tti_duration,
        }
    }

    pub fn n_ues(&self) -> usize {
        self.n_ues
    }

    pub fn n_ttis(&self) -> usize {
        self.n_ttis
    }

    pub fn rbg_count(&self) -> usize {
        self.rbg_count
    }

    pub fn tti_duration(&self) -> f64 {
        self.tti_duration
    }

    pub fn gain(&self, ue: usize, tti: usize, rbg: usize) -> f64 {
        self.gains[(ue * self.n_ttis + tti) * self.rbg_count + rbg]
    }

    /// Gains of every RBG for one UE in one TTI.
    pub fn rbg_gains(&self, ue: usize, tti: usize) -> &[f64] {
        let start = (ue * self.n_ttis + tti) * self.rbg_count;
        &self.gains[start..start + self.rbg_count]
    }

    /// Time series of one (UE, RBG) stream.
    pub fn series(&self, ue: usize, rbg: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_ttis).map(move |t| self.gain(ue, t, rbg))
    }
}

/// γ = ε·γ̄, both linear.
pub fn instantaneous_sinr(avg_sinr: f64, gain: f64) -> f64 {
    avg_sinr * gain
}

/// Mean cell SINR: the linear mean of the per-UE average SINRs, in dB.
pub fn mean_cell_sinr(avg_sinrs_db: &[f64]) -> Result<f64> {
    if avg_sinrs_db.is_empty() {
        return Err(Error::InvalidArgument("empty SINR list".into()));
    }
    let mean =
        avg_sinrs_db.iter().map(|&d| db_to_linear(d)).sum::<f64>() / avg_sinrs_db.len() as f64;
    Ok(linear_to_db(mean))
}
