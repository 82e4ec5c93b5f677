//! Per-TTI allocation decisions for MTS, BETS, PFS and FTGS, in time-domain
//! (one UE takes every RBG) and frequency-domain (per-RBG) variants.
//!
//! A UE that can carry nothing on a resource (CQI 0) never wins it while some
//! other UE can use it. For the rate-weighted metrics this follows from the
//! metric itself; BETS applies it explicitly.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulerKind {
    /// Maximum throughput: argmax rᵢ.
    Mts,
    /// Blind equal throughput: argmax 1/ζᵢ.
    Bets,
    /// Proportional fair: argmax rᵢ/ζᵢ.
    Pfs,
    /// Fair throughput guarantees: argmax rᵢ/αᵢ.
    Ftgs,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 4] = [
        SchedulerKind::Mts,
        SchedulerKind::Bets,
        SchedulerKind::Pfs,
        SchedulerKind::Ftgs,
    ];
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchedulerKind::Mts => "mts",
            SchedulerKind::Bets => "bets",
            SchedulerKind::Pfs => "pfs",
            SchedulerKind::Ftgs => "ftgs",
        })
    }
}

impl FromStr for SchedulerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mts" | "mt" => Ok(SchedulerKind::Mts),
            "bets" | "bet" => Ok(SchedulerKind::Bets),
            "pfs" | "pf" => Ok(SchedulerKind::Pfs),
            "ftgs" => Ok(SchedulerKind::Ftgs),
            other => Err(Error::SchedulerConfig(format!(
                "unknown scheduler {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulingMode {
    #[default]
    Td,
    Fd,
}

impl fmt::Display for SchedulingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchedulingMode::Td => "td",
            SchedulingMode::Fd => "fd",
        })
    }
}

impl FromStr for SchedulingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "td" => Ok(SchedulingMode::Td),
            "fd" => Ok(SchedulingMode::Fd),
            other => Err(Error::SchedulerConfig(format!("unknown mode {other:?}"))),
        }
    }
}

pub const DEFAULT_BETA: f64 = 0.99;
pub const DEFAULT_ZETA_INIT: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchedulerConfig {
    pub kind: SchedulerKind,
    #[serde(default)]
    pub mode: SchedulingMode,
    /// Smoothing factor of the past-throughput average.
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Per-UE FTGS weights. Only ratios matter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ftgs_alphas: Option<Vec<f64>>,
    /// Initial ζᵢ in bit/s.
    #[serde(default = "default_zeta_init")]
    pub zeta_init: f64,
}

fn default_beta() -> f64 {
    DEFAULT_BETA
}

fn default_zeta_init() -> f64 {
    DEFAULT_ZETA_INIT
}

impl SchedulerConfig {
    pub fn new(kind: SchedulerKind, mode: SchedulingMode) -> Self {
        Self {
            kind,
            mode,
            beta: DEFAULT_BETA,
            ftgs_alphas: None,
            zeta_init: DEFAULT_ZETA_INIT,
        }
    }

    pub fn ftgs(mode: SchedulingMode, alphas: Vec<f64>) -> Self {
        Self {
            ftgs_alphas: Some(alphas),
            ..Self::new(SchedulerKind::Ftgs, mode)
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    /// Checks the configuration for `n_ues` users.
    pub fn validate(&self, n_ues: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::SchedulerConfig(format!(
                "beta {} outside [0, 1]",
                self.beta
            )));
        }
        if !(self.zeta_init > 0.0 && self.zeta_init.is_finite()) {
            return Err(Error::SchedulerConfig(format!(
                "zeta_init must be positive, got {}",
                self.zeta_init
            )));
        }
        if self.kind == SchedulerKind::Ftgs {
            let alphas = self
                .ftgs_alphas
                .as_ref()
                .ok_or_else(|| Error::SchedulerConfig("FTGS requires alpha weights".into()))?;
            if alphas.len() != n_ues {
                return Err(Error::SchedulerConfig(format!(
                    "{} alpha weights for {n_ues} UEs",
                    alphas.len()
                )));
            }
            if alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
                return Err(Error::SchedulerConfig(
                    "alpha weights must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchedulerState {
    zeta: Vec<f64>,
    tti_index: u64,
}

impl SchedulerState {
    pub fn new(n_ues: usize, config: &SchedulerConfig) -> Self {
        Self {
            zeta: vec![config.zeta_init; n_ues],
            tti_index: 0,
        }
    }

    pub fn from_zeta(zeta: Vec<f64>) -> Self {
        Self { zeta, tti_index: 0 }
    }

    /// Past average throughput per UE, bit/s.
    pub fn zeta(&self) -> &[f64] {
        &self.zeta
    }

    pub fn tti_index(&self) -> u64 {
        self.tti_index
    }
}

/// Achievable bits per TTI: one wideband figure per UE (what a TD scheduler
/// sees) and one per (UE, RBG).
#[derive(Debug, Clone, PartialEq)]
pub struct RateGrid {
    wideband: Vec<f64>,
    subband: Vec<f64>,
    rbg_count: usize,
}

impl RateGrid {
    pub fn new(wideband: Vec<f64>, subband: Vec<f64>, rbg_count: usize) -> Result<Self> {
        if rbg_count == 0 || subband.len() != wideband.len() * rbg_count {
            return Err(Error::InvalidArgument(format!(
                "rate grid of {} entries does not match {} UEs x {rbg_count} RBGs",
                subband.len(),
                wideband.len()
            )));
        }
        if wideband.iter().chain(&subband).any(|r| !(*r >= 0.0)) {
            return Err(Error::InvalidArgument("rates must be non-negative".into()));
        }
        Ok(Self {
            wideband,
            subband,
            rbg_count,
        })
    }

    /// Flat channel: every RBG carries `wideband / rbg_count`.
    pub fn flat(wideband: Vec<f64>, rbg_count: usize) -> Result<Self> {
        let subband = wideband
            .iter()
            .flat_map(|&r| std::iter::repeat_n(r / rbg_count as f64, rbg_count))
            .collect();
        Self::new(wideband, subband, rbg_count)
    }

    pub fn n_ues(&self) -> usize {
        self.wideband.len()
    }

    pub fn rbg_count(&self) -> usize {
        self.rbg_count
    }

    pub fn wideband(&self, ue: usize) -> f64 {
        self.wideband[ue]
    }

    pub fn subband(&self, ue: usize, rbg: usize) -> f64 {
        self.subband[ue * self.rbg_count + rbg]
    }
}

/// The decision for one TTI.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    owner: Vec<usize>,
    rbg_bits: Vec<f64>,
    granted_bits: Vec<f64>,
}

impl Allocation {
    /// Owner per RBG.
    pub fn owner(&self) -> &[usize] {
        &self.owner
    }

    /// Bits carried by each RBG.
    pub fn rbg_bits(&self) -> &[f64] {
        &self.rbg_bits
    }

    /// Bits delivered to each UE in this TTI.
    pub fn granted_bits(&self) -> &[f64] {
        &self.granted_bits
    }

    /// All RBGs to one UE at its wideband rate.
    pub fn whole_band(ue: usize, rates: &RateGrid) -> Self {
        let m = rates.rbg_count();
        let mut granted_bits = vec![0.0; rates.n_ues()];
        granted_bits[ue] = rates.wideband(ue);
        Self {
            owner: vec![ue; m],
            rbg_bits: vec![rates.wideband(ue) / m as f64; m],
            granted_bits,
        }
    }

    /// Per-RBG owners, each RBG delivering its subband rate.
    pub fn per_rbg(owner: Vec<usize>, rates: &RateGrid) -> Self {
        let mut granted_bits = vec![0.0; rates.n_ues()];
        let mut rbg_bits = Vec::with_capacity(owner.len());
        for (l, &ue) in owner.iter().enumerate() {
            let bits = rates.subband(ue, l);
            granted_bits[ue] += bits;
            rbg_bits.push(bits);
        }
        Self {
            owner,
            rbg_bits,
            granted_bits,
        }
    }

    pub fn is_scheduled(&self, ue: usize) -> bool {
        self.owner.contains(&ue)
    }
}

/// Index of the largest value; ties go to the lowest index.
fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    best
}

fn alphas(config: &SchedulerConfig, n: usize) -> Result<&[f64]> {
    match &config.ftgs_alphas {
        Some(a) if a.len() == n => Ok(a),
        Some(a) => Err(Error::SchedulerConfig(format!(
            "{} alpha weights for {n} UEs",
            a.len()
        ))),
        None => Err(Error::SchedulerConfig("FTGS requires alpha weights".into())),
    }
}

/// Time-domain winner for this TTI.
pub fn td_select(
    kind: SchedulerKind,
    rates: &RateGrid,
    state: &SchedulerState,
    config: &SchedulerConfig,
) -> Result<usize> {
    let n = rates.n_ues();
    if n == 0 {
        return Err(Error::InvalidArgument("no UEs to schedule".into()));
    }
    let zeta = &state.zeta;
    let ue = match kind {
        SchedulerKind::Mts => argmax((0..n).map(|i| rates.wideband(i))),
        SchedulerKind::Bets => {
            let usable = (0..n).any(|i| rates.wideband(i) > 0.0);
            argmax((0..n).map(|i| {
                if usable && rates.wideband(i) <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    1.0 / zeta[i]
                }
            }))
        }
        SchedulerKind::Pfs => argmax((0..n).map(|i| rates.wideband(i) / zeta[i])),
        SchedulerKind::Ftgs => {
            let a = alphas(config, n)?;
            argmax((0..n).map(|i| rates.wideband(i) / a[i]))
        }
    };
    Ok(ue)
}

/// Frequency-domain allocation of `rbg_count` RBGs.
///
/// MTS, PFS and FTGS pick the per-RBG argmax of their metric, with ζ held at
/// its start-of-TTI value. BETS hands out RBGs in index order to the UE whose
/// expected throughput is currently lowest. A UE without RBGs is compared at
/// its ζ; once it holds some, at the ζ update it would see if the TTI ended
/// now and each of its RBGs carried rᵢ(k)/M bits.
pub fn fd_allocate(
    kind: SchedulerKind,
    rates: &RateGrid,
    state: &SchedulerState,
    config: &SchedulerConfig,
    rbg_count: usize,
    tti: f64,
) -> Result<Allocation> {
    let n = rates.n_ues();
    if n == 0 {
        return Err(Error::InvalidArgument("no UEs to schedule".into()));
    }
    if rbg_count == 0 || rbg_count != rates.rbg_count() {
        return Err(Error::InvalidArgument(format!(
            "rbg_count {rbg_count} does not match rate grid ({})",
            rates.rbg_count()
        )));
    }
    let zeta = &state.zeta;
    let owner: Vec<usize> = match kind {
        SchedulerKind::Mts => (0..rbg_count)
            .map(|l| argmax((0..n).map(|i| rates.subband(i, l))))
            .collect(),
        SchedulerKind::Pfs => (0..rbg_count)
            .map(|l| argmax((0..n).map(|i| rates.subband(i, l) / zeta[i])))
            .collect(),
        SchedulerKind::Ftgs => {
            let a = alphas(config, n)?;
            (0..rbg_count)
                .map(|l| argmax((0..n).map(|i| rates.subband(i, l) / a[i])))
                .collect()
        }
        SchedulerKind::Bets => {
            let beta = config.beta;
            let m = rbg_count as f64;
            let mut expected = zeta.clone();
            let mut held = vec![0usize; n];
            let mut owner = Vec::with_capacity(rbg_count);
            for l in 0..rbg_count {
                let usable = (0..n).any(|i| rates.subband(i, l) > 0.0);
                let ue = argmax(expected.iter().enumerate().map(|(i, z)| {
                    if usable && rates.subband(i, l) <= 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        -z
                    }
                }));
                owner.push(ue);
                held[ue] += 1;
                let bits = held[ue] as f64 * rates.wideband(ue) / m;
                expected[ue] = beta * zeta[ue] + (1.0 - beta) * bits / tti;
            }
            owner
        }
    };
    Ok(Allocation::per_rbg(owner, rates))
}

/// Commits one TTI: ζᵢ ← β·ζᵢ + (1−β)·(granted bits / TTI).
pub fn update_state(
    state: &mut SchedulerState,
    allocation: &Allocation,
    config: &SchedulerConfig,
    tti: f64,
) {
    let beta = config.beta;
    for (z, bits) in state.zeta.iter_mut().zip(&allocation.granted_bits) {
        *z = beta * *z + (1.0 - beta) * bits / tti;
    }
    state.tti_index += 1;
}

/// One full scheduling decision in the configured mode.
pub fn allocate(
    rates: &RateGrid,
    state: &SchedulerState,
    config: &SchedulerConfig,
    tti: f64,
) -> Result<Allocation> {
    match config.mode {
        SchedulingMode::Td => {
            let ue = td_select(config.kind, rates, state, config)?;
            Ok(Allocation::whole_band(ue, rates))
        }
        SchedulingMode::Fd => {
            fd_allocate(config.kind, rates, state, config, rates.rbg_count(), tti)
        }
    }
}
