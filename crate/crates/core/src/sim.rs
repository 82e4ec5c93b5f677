//! Scenario description and the TTI loop.
//!
//! Scenarios are TOML documents. A file may list several channels and several
//! schedulers; it expands into one [`Scenario`] per (channel, scheduler) pair,
//! and runs sharing a channel reuse the same fading trace.
//!
//! ```toml
//! name = "flat-fast"
//! duration = 60.0
//! seed = 7
//! ues = [10.0, 11.7041, 12.9248]
//!
//! [channel]
//! kind = "flat"
//! doppler_hz = 120.0
//!
//! [[scheduler]]
//! kind = "bets"
//!
//! [[scheduler]]
//! kind = "ftgs"
//! mode = "fd"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytics::{
    event_statistics, worst_ue, AllocationLog, DeltaStats, EventStats, ThroughputReport,
};
use crate::channel::{
    db_to_linear, generate_flat_trace, generate_selective_trace, linear_to_db, ChannelTrace,
    FadingModel, FadingSpec, PowerDelayProfile, DEFAULT_OSCILLATORS,
};
use crate::error::{Error, Result};
use crate::ftgs::{self, FtgsParameters};
use crate::linkadapt::{CqiTable, LinkModel, RateModel, SnrGap};
use crate::schedulers::{
    allocate, update_state, RateGrid, SchedulerConfig, SchedulerKind, SchedulerState,
};

pub const DEFAULT_TTI: f64 = 1e-3;
pub const DEFAULT_RB_COUNT: usize = 25;
pub const DEFAULT_RBG_SIZE: usize = 2;
pub const DEFAULT_BANDWIDTH: f64 = 5e6;
pub const DEFAULT_WARMUP_TTIS: usize = 1000;
/// Residual bound used when a run solves its own FTGS weights.
pub const AUTO_SOLVE_TOL: f64 = 1e-9;

/// A UE is described by its average SINR; files may give either a bare
/// number or `{ avg_sinr_db = ... }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "UeEntry")]
pub struct UeProfile {
    pub avg_sinr_db: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum UeEntry {
    Db(f64),
    Table { avg_sinr_db: f64 },
}

impl From<UeEntry> for UeProfile {
    fn from(e: UeEntry) -> Self {
        match e {
            UeEntry::Db(avg_sinr_db) | UeEntry::Table { avg_sinr_db } => Self { avg_sinr_db },
        }
    }
}

impl UeProfile {
    pub fn linear(&self) -> f64 {
        db_to_linear(self.avg_sinr_db)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Flat,
    Selective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub kind: ChannelKind,
    /// Name used in report labels; derived from the other fields if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Built-in power delay profile (selective only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pdp: Option<String>,
    /// `delay_ns power_db` table, relative to the scenario file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pdp_file: Option<PathBuf>,
    pub doppler_hz: f64,
    #[serde(default)]
    pub model: FadingModel,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rice_k_db: Vec<f64>,
    #[serde(default = "default_oscillators")]
    pub oscillators: usize,
}

fn default_oscillators() -> usize {
    DEFAULT_OSCILLATORS
}

impl ChannelConfig {
    pub fn flat(doppler_hz: f64) -> Self {
        Self {
            kind: ChannelKind::Flat,
            label: None,
            pdp: None,
            pdp_file: None,
            doppler_hz,
            model: FadingModel::JakesRayleigh,
            rice_k_db: Vec::new(),
            oscillators: DEFAULT_OSCILLATORS,
        }
    }

    pub fn selective(pdp: &str, doppler_hz: f64) -> Self {
        Self {
            kind: ChannelKind::Selective,
            pdp: Some(pdp.to_string()),
            ..Self::flat(doppler_hz)
        }
    }

    pub fn with_rice(mut self, rice_k_db: Vec<f64>) -> Self {
        self.model = FadingModel::Rician;
        self.rice_k_db = rice_k_db;
        self
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    pub fn label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        let base = match self.kind {
            ChannelKind::Flat => "flat".to_string(),
            ChannelKind::Selective => match (&self.pdp, &self.pdp_file) {
                (Some(name), _) => name.clone(),
                (None, Some(path)) => path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "custom".into()),
                (None, None) => "selective".into(),
            },
        };
        let rice = match self.model {
            FadingModel::Rician => {
                let ks: Vec<String> = self.rice_k_db.iter().map(|k| k.to_string()).collect();
                format!("-rice{}", ks.join("_"))
            }
            FadingModel::JakesRayleigh => String::new(),
        };
        format!("{base}-{}hz{rice}", self.doppler_hz)
    }

    /// The power delay profile of a selective channel.
    pub fn profile(&self) -> Result<Option<PowerDelayProfile>> {
        match (self.kind, &self.pdp, &self.pdp_file) {
            (ChannelKind::Flat, None, None) => Ok(None),
            (ChannelKind::Flat, _, _) => Err(Error::scenario(
                "channel.pdp",
                "a flat channel takes no power delay profile",
            )),
            (ChannelKind::Selective, Some(_), Some(_)) => Err(Error::scenario(
                "channel.pdp",
                "give either pdp or pdp_file, not both",
            )),
            (ChannelKind::Selective, Some(name), None) => PowerDelayProfile::builtin(name)
                .map(Some)
                .ok_or_else(|| Error::scenario("channel.pdp", format!("unknown profile {name:?}"))),
            (ChannelKind::Selective, None, Some(path)) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    Error::scenario("channel.pdp_file", format!("{}: {e}", path.display()))
                })?;
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "custom".into());
                PowerDelayProfile::parse(name, &text).map(Some)
            }
            (ChannelKind::Selective, None, None) => Err(Error::scenario(
                "channel.pdp",
                "a selective channel needs pdp or pdp_file",
            )),
        }
    }

    fn fading_spec(&self, seed: u64) -> FadingSpec {
        FadingSpec {
            doppler_hz: self.doppler_hz,
            model: self.model,
            rice_k_db: self.rice_k_db.clone(),
            oscillators: self.oscillators,
            seed,
        }
    }
}

/// How a TD scheduler's single wideband CQI is formed from the per-RBG
/// SINRs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WidebandAggregation {
    /// Integer part of the mean subband CQI; with the continuous rate model,
    /// the mean subband spectral efficiency.
    #[default]
    MeanCqi,
    /// CQI of the mean linear SINR.
    MeanSinr,
    /// CQI of the median SINR.
    MedianSinr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    pub ues: Vec<UeProfile>,
    pub channel: ChannelConfig,
    pub scheduler: SchedulerConfig,
    /// Measured simulated time in seconds, after the warm-up.
    pub duration: f64,
    #[serde(default = "default_tti")]
    pub tti: f64,
    #[serde(default = "default_rb_count")]
    pub rb_count: usize,
    #[serde(default = "default_rbg_size")]
    pub rbg_size: usize,
    /// System bandwidth in Hz.
    #[serde(default = "default_bandwidth")]
    pub bandwidth: f64,
    #[serde(default = "default_ber")]
    pub target_ber: f64,
    #[serde(default)]
    pub rate_model: RateModel,
    #[serde(default)]
    pub wideband_cqi: WidebandAggregation,
    /// Sixteen efficiency thresholds replacing the built-in CQI table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cqi_table: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: u64,
    /// TTIs simulated before statistics start.
    #[serde(default = "default_warmup")]
    pub warmup_ttis: usize,
    #[serde(default)]
    pub log_allocations: bool,
}

fn default_name() -> String {
    "scenario".into()
}
fn default_tti() -> f64 {
    DEFAULT_TTI
}
fn default_rb_count() -> usize {
    DEFAULT_RB_COUNT
}
fn default_rbg_size() -> usize {
    DEFAULT_RBG_SIZE
}
fn default_bandwidth() -> f64 {
    DEFAULT_BANDWIDTH
}
fn default_ber() -> f64 {
    crate::linkadapt::DEFAULT_TARGET_BER
}
fn default_warmup() -> usize {
    DEFAULT_WARMUP_TTIS
}

impl Scenario {
    /// A scenario with the default grid (25 RBs of 200 kHz, RBGs of 2 RBs),
    /// 1 ms TTI, 60 s duration and 1000 warm-up TTIs.
    pub fn new(ues_db: &[f64], channel: ChannelConfig, scheduler: SchedulerConfig) -> Self {
        Self {
            name: default_name(),
            ues: ues_db
                .iter()
                .map(|&d| UeProfile { avg_sinr_db: d })
                .collect(),
            channel,
            scheduler,
            duration: 60.0,
            tti: DEFAULT_TTI,
            rb_count: DEFAULT_RB_COUNT,
            rbg_size: DEFAULT_RBG_SIZE,
            bandwidth: DEFAULT_BANDWIDTH,
            target_ber: default_ber(),
            rate_model: RateModel::default(),
            wideband_cqi: WidebandAggregation::default(),
            cqi_table: None,
            seed: 0,
            warmup_ttis: DEFAULT_WARMUP_TTIS,
            log_allocations: false,
        }
    }

    /// Parses a single-run scenario.
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut all = parse_scenarios(text, None)?;
        if all.len() != 1 {
            return Err(Error::scenario(
                "scheduler",
                format!("expected one run, the document expands to {}", all.len()),
            ));
        }
        Ok(all.remove(0))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn label(&self) -> String {
        format!(
            "{}-{}-{}",
            self.channel.label(),
            self.scheduler.kind,
            self.scheduler.mode
        )
    }

    pub fn gamma_bars(&self) -> Vec<f64> {
        self.ues.iter().map(UeProfile::linear).collect()
    }

    pub fn rbg_count(&self) -> usize {
        self.rb_count / self.rbg_size.max(1)
    }

    pub fn rbg_bandwidth(&self) -> f64 {
        self.bandwidth / self.rb_count as f64 * self.rbg_size as f64
    }

    /// Bandwidth covered by the RBGs; leftover RBs carry no data.
    pub fn scheduled_bandwidth(&self) -> f64 {
        self.rbg_bandwidth() * self.rbg_count() as f64
    }

    pub fn measured_ttis(&self) -> usize {
        (self.duration / self.tti).round() as usize
    }

    pub fn total_ttis(&self) -> usize {
        self.measured_ttis() + self.warmup_ttis
    }

    pub fn link_model(&self) -> Result<LinkModel> {
        let gap = SnrGap::from_ber(self.target_ber)
            .map_err(|e| Error::scenario("target_ber", e.to_string()))?;
        let table = match &self.cqi_table {
            None => CqiTable::default(),
            Some(v) => {
                let arr: [f64; 16] = v.as_slice().try_into().map_err(|_| {
                    Error::scenario(
                        "cqi_table",
                        format!("16 thresholds required, got {}", v.len()),
                    )
                })?;
                CqiTable::new(arr).map_err(|e| Error::scenario("cqi_table", e.to_string()))?
            }
        };
        Ok(LinkModel {
            gap,
            table,
            rate_model: self.rate_model,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.ues.is_empty() {
            return Err(Error::scenario("ues", "at least one UE required"));
        }
        if let Some(u) = self.ues.iter().find(|u| !u.avg_sinr_db.is_finite()) {
            return Err(Error::scenario(
                "ues",
                format!("non-finite SINR {}", u.avg_sinr_db),
            ));
        }
        if !(self.tti > 0.0 && self.tti.is_finite()) {
            return Err(Error::scenario("tti", "must be positive"));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::scenario("duration", "must be positive"));
        }
        let ratio = self.duration / self.tti;
        if ratio.round() < 1.0 || (ratio - ratio.round()).abs() > 1e-6 * ratio.max(1.0) {
            return Err(Error::scenario(
                "duration",
                format!(
                    "{} s is not a whole number of {} s TTIs",
                    self.duration, self.tti
                ),
            ));
        }
        if self.rbg_size == 0 || self.rb_count < self.rbg_size {
            return Err(Error::scenario(
                "rbg_size",
                format!(
                    "{} RBs cannot form RBGs of {}",
                    self.rb_count, self.rbg_size
                ),
            ));
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::scenario("bandwidth", "must be positive"));
        }
        self.link_model()?;
        let taps = match self.channel.profile()? {
            Some(pdp) => pdp.len(),
            None => 1,
        };
        self.channel
            .fading_spec(self.seed)
            .validate(taps)
            .map_err(|e| Error::scenario("channel", e.to_string()))?;
        let mut sched = self.scheduler.clone();
        if sched.kind == SchedulerKind::Ftgs && sched.ftgs_alphas.is_none() {
            // solved at run time
            sched.ftgs_alphas = Some(vec![1.0; self.ues.len()]);
        }
        sched
            .validate(self.ues.len())
            .map_err(|e| Error::scenario("scheduler", e.to_string()))
    }
}

/// Reads a scenario file, resolving `pdp_file` against its directory.
pub fn load_scenarios(path: &Path) -> Result<Vec<Scenario>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::scenario(path.display().to_string(), e.to_string()))?;
    let mut all = parse_scenarios(&text, path.parent())?;
    if let Some(stem) = path.file_stem() {
        for s in &mut all {
            if s.name == default_name() {
                s.name = stem.to_string_lossy().into_owned();
            }
        }
    }
    Ok(all)
}

/// Expands a scenario document into one scenario per (channel, scheduler).
pub fn parse_scenarios(text: &str, base_dir: Option<&Path>) -> Result<Vec<Scenario>> {
    let mut doc: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::scenario("<document>", e.message().to_string()))?;
    let channels = take_one_or_many::<ChannelConfig>(&mut doc, "channel")?;
    let schedulers = take_one_or_many::<SchedulerConfig>(&mut doc, "scheduler")?;
    let mut scenarios = Vec::with_capacity(channels.len() * schedulers.len());
    for channel in &channels {
        let mut channel = channel.clone();
        if let (Some(dir), Some(p)) = (base_dir, &channel.pdp_file) {
            if p.is_relative() {
                channel.pdp_file = Some(dir.join(p));
            }
        }
        for sched in &schedulers {
            let mut table = doc.clone();
            table.insert(
                "channel".into(),
                toml::Value::try_from(&channel).expect("serializable"),
            );
            table.insert(
                "scheduler".into(),
                toml::Value::try_from(sched).expect("serializable"),
            );
            let scenario: Scenario =
                toml::Value::Table(table)
                    .try_into()
                    .map_err(|e: toml::de::Error| {
                        Error::scenario("<document>", e.message().to_string())
                    })?;
            scenario.validate()?;
            scenarios.push(scenario);
        }
    }
    Ok(scenarios)
}

fn take_one_or_many<T: serde::de::DeserializeOwned>(
    doc: &mut toml::Table,
    key: &str,
) -> Result<Vec<T>> {
    let value = doc
        .remove(key)
        .ok_or_else(|| Error::scenario(key, "missing"))?;
    let items = match value {
        toml::Value::Array(items) => items,
        other => vec![other],
    };
    if items.is_empty() {
        return Err(Error::scenario(key, "empty list"));
    }
    items
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            v.try_into().map_err(|e: toml::de::Error| {
                Error::scenario(format!("{key}[{i}]"), e.message().to_string())
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UeReport {
    pub avg_sinr_db: f64,
    /// bit/s over the measured interval.
    pub throughput: f64,
    pub delivered_bits: f64,
    /// TTIs in which the UE owned at least one RBG.
    pub scheduled_ttis: usize,
    pub delta: Option<DeltaStats>,
    pub events: Option<EventStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub label: String,
    /// The scenario as run, FTGS weights included.
    pub scenario: Scenario,
    pub warmup_ttis: usize,
    pub measured_ttis: usize,
    pub rbg_count: usize,
    pub scheduled_bandwidth: f64,
    pub throughput: ThroughputReport,
    /// Cell throughput over the scheduled bandwidth, bit/s/Hz.
    pub cell_efficiency: f64,
    pub ues: Vec<UeReport>,
    /// UE with the fewest scheduling events.
    pub worst_ue: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ftgs: Option<FtgsParameters>,
    #[serde(skip)]
    pub allocation_log: Option<AllocationLog>,
}

impl SimReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Fading trace covering warm-up and measurement.
pub fn generate_trace(scenario: &Scenario) -> Result<ChannelTrace> {
    let spec = scenario.channel.fading_spec(scenario.seed);
    let n = scenario.ues.len();
    let ttis = scenario.total_ttis();
    match scenario.channel.profile()? {
        None => generate_flat_trace(&spec, n, ttis, scenario.rbg_count(), scenario.tti),
        Some(pdp) => generate_selective_trace(
            &pdp,
            &spec,
            n,
            ttis,
            scenario.rbg_count(),
            scenario.rbg_bandwidth(),
            scenario.tti,
        ),
    }
}

pub fn run(scenario: &Scenario) -> Result<SimReport> {
    scenario.validate()?;
    let trace = generate_trace(scenario)?;
    run_on_trace(scenario, &trace)
}

/// Runs several scenarios, generating each distinct fading trace once.
pub fn run_all(scenarios: &[Scenario]) -> Result<Vec<SimReport>> {
    let mut reports = Vec::with_capacity(scenarios.len());
    let mut cached: Option<(TraceKey, ChannelTrace)> = None;
    for s in scenarios {
        s.validate()?;
        let key = TraceKey::of(s);
        let trace = match cached.take() {
            Some((k, t)) if k == key => t,
            _ => generate_trace(s)?,
        };
        reports.push(run_on_trace(s, &trace)?);
        cached = Some((key, trace));
    }
    Ok(reports)
}

#[derive(PartialEq)]
struct TraceKey {
    channel: ChannelConfig,
    seed: u64,
    n_ues: usize,
    ttis: usize,
    rbg_count: usize,
    rbg_bandwidth: f64,
    tti: f64,
}

impl TraceKey {
    fn of(s: &Scenario) -> Self {
        Self {
            channel: s.channel.clone(),
            seed: s.seed,
            n_ues: s.ues.len(),
            ttis: s.total_ttis(),
            rbg_count: s.rbg_count(),
            rbg_bandwidth: s.rbg_bandwidth(),
            tti: s.tti,
        }
    }
}

/// Per-RBG and wideband bits of every UE in one TTI.
struct RateBuilder<'a> {
    link: &'a LinkModel,
    aggregation: WidebandAggregation,
    gamma_bars: Vec<f64>,
    rbg_bits_per_eff: f64,
    rbg_count: usize,
    sinr: Vec<f64>,
    eff: Vec<f64>,
}

impl RateBuilder<'_> {
    fn wideband_efficiency(&mut self) -> f64 {
        let sinr = &self.sinr;
        if sinr.iter().all(|&s| s == sinr[0]) {
            return self.eff[0];
        }
        let m = sinr.len() as f64;
        match self.aggregation {
            WidebandAggregation::MeanSinr => self.link.efficiency(sinr.iter().sum::<f64>() / m),
            WidebandAggregation::MedianSinr => {
                let mut sorted = sinr.clone();
                sorted.sort_by(f64::total_cmp);
                let k = sorted.len();
                let med = if k % 2 == 1 {
                    sorted[k / 2]
                } else {
                    0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
                };
                self.link.efficiency(med)
            }
            WidebandAggregation::MeanCqi => match self.link.rate_model {
                RateModel::Continuous => self.eff.iter().sum::<f64>() / m,
                RateModel::Quantized => {
                    let total: u32 = sinr.iter().map(|&s| self.link.cqi(s) as u32).sum();
                    self.link
                        .table
                        .efficiency((total / sinr.len() as u32) as u8)
                }
            },
        }
    }

    fn build(&mut self, trace: &ChannelTrace, k: usize) -> RateGrid {
        let n = self.gamma_bars.len();
        let mut wideband = Vec::with_capacity(n);
        let mut subband = Vec::with_capacity(n * self.rbg_count);
        for ue in 0..n {
            let gb = self.gamma_bars[ue];
            self.sinr.clear();
            self.eff.clear();
            for &g in trace.rbg_gains(ue, k) {
                let s = gb * g;
                self.sinr.push(s);
                self.eff.push(self.link.efficiency(s));
            }
            subband.extend(self.eff.iter().map(|e| e * self.rbg_bits_per_eff));
            // accumulate exactly as an FD grant of every RBG would
            let per_rbg = self.wideband_efficiency() * self.rbg_bits_per_eff;
            wideband.push((0..self.rbg_count).fold(0.0, |acc, _| acc + per_rbg));
        }
        RateGrid::new(wideband, subband, self.rbg_count).expect("rates are consistent")
    }
}

/// Runs the scheduler over a pre-generated trace.
pub fn run_on_trace(scenario: &Scenario, trace: &ChannelTrace) -> Result<SimReport> {
    scenario.validate()?;
    let n = scenario.ues.len();
    let rbg_count = scenario.rbg_count();
    if trace.n_ues() != n
        || trace.rbg_count() != rbg_count
        || trace.n_ttis() < scenario.total_ttis()
    {
        return Err(Error::InvalidArgument(format!(
            "trace of {} UEs x {} TTIs x {} RBGs does not cover the scenario",
            trace.n_ues(),
            trace.n_ttis(),
            trace.rbg_count()
        )));
    }
    let link = scenario.link_model()?;
    let gamma_bars = scenario.gamma_bars();
    let mut config = scenario.scheduler.clone();
    let mut ftgs_params = None;
    if config.kind == SchedulerKind::Ftgs && config.ftgs_alphas.is_none() {
        let params = ftgs::solve(
            &gamma_bars,
            &link.gap,
            scenario.scheduled_bandwidth(),
            AUTO_SOLVE_TOL,
        )?;
        config.ftgs_alphas = Some(params.alpha.clone());
        ftgs_params = Some(params);
    }

    let tti = scenario.tti;
    let warmup = scenario.warmup_ttis;
    let measured = scenario.measured_ttis();
    let mut rates = RateBuilder {
        link: &link,
        aggregation: scenario.wideband_cqi,
        gamma_bars,
        rbg_bits_per_eff: scenario.rbg_bandwidth() * tti,
        rbg_count,
        sinr: Vec::with_capacity(rbg_count),
        eff: Vec::with_capacity(rbg_count),
    };
    let mut state = SchedulerState::new(n, &config);
    let mut bits = vec![0.0; n];
    let mut events: Vec<Vec<(u64, f64)>> = vec![Vec::new(); n];
    let mut log = scenario
        .log_allocations
        .then(|| AllocationLog::starting_at(rbg_count, warmup as u64));

    for k in 0..warmup + measured {
        let grid = rates.build(trace, k);
        let alloc = allocate(&grid, &state, &config, tti)?;
        if k >= warmup {
            for (ue, &b) in alloc.granted_bits().iter().enumerate() {
                if alloc.is_scheduled(ue) {
                    bits[ue] += b;
                    events[ue].push((k as u64, b));
                }
            }
            if let Some(log) = log.as_mut() {
                log.push(&alloc);
            }
        }
        update_state(&mut state, &alloc, &config, tti);
    }

    let duration = measured as f64 * tti;
    let throughput = ThroughputReport::from_bits(&bits, duration);
    let ues: Vec<UeReport> = (0..n)
        .map(|ue| {
            let ttis: Vec<u64> = events[ue].iter().map(|e| e.0).collect();
            UeReport {
                avg_sinr_db: scenario.ues[ue].avg_sinr_db,
                throughput: throughput.per_ue[ue],
                delivered_bits: bits[ue],
                scheduled_ttis: events[ue].len(),
                delta: DeltaStats::from_schedule(&ttis, tti).ok(),
                events: event_statistics(&events[ue], tti),
            }
        })
        .collect();
    let counts: Vec<usize> = ues.iter().map(|u| u.scheduled_ttis).collect();
    let mut echo = scenario.clone();
    echo.scheduler = config;
    Ok(SimReport {
        label: scenario.label(),
        warmup_ttis: warmup,
        measured_ttis: measured,
        rbg_count,
        scheduled_bandwidth: scenario.scheduled_bandwidth(),
        cell_efficiency: throughput.cell / scenario.scheduled_bandwidth(),
        throughput,
        worst_ue: worst_ue(&counts).expect("at least one UE"),
        ues,
        ftgs: ftgs_params,
        allocation_log: log,
        scenario: echo,
    })
}

/// How the lowest SINR of a span scenario is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpanTarget {
    /// Mean cell SINR in dB.
    MeanCellDb(f64),
    /// γ̄_max,dB − γ̄_min,dB.
    SpanDb(f64),
}

/// Average SINRs in dB, equally spaced in linear scale from the derived
/// minimum up to `gamma_max_db`.
pub fn sinr_span_scenario(gamma_max_db: f64, target: SpanTarget, n_ues: usize) -> Result<Vec<f64>> {
    if n_ues < 2 {
        return Err(Error::InvalidArgument("at least two UEs required".into()));
    }
    if !gamma_max_db.is_finite() {
        return Err(Error::InvalidArgument("maximum SINR must be finite".into()));
    }
    let max = db_to_linear(gamma_max_db);
    let min = match target {
        SpanTarget::MeanCellDb(mu) => {
            // equal linear spacing puts the mean halfway between the ends
            let min = 2.0 * db_to_linear(mu) - max;
            if !(min > 0.0 && min <= max * (1.0 + 1e-12)) {
                return Err(Error::InvalidArgument(format!(
                    "mean cell SINR {mu} dB is unreachable with maximum {gamma_max_db} dB \
                     (must lie in ({:.4}, {gamma_max_db}] dB)",
                    linear_to_db(max / 2.0)
                )));
            }
            min.min(max)
        }
        SpanTarget::SpanDb(span) => {
            if !(span >= 0.0 && span.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "span must be non-negative, got {span}"
                )));
            }
            db_to_linear(gamma_max_db - span)
        }
    };
    let step = (max - min) / (n_ues - 1) as f64;
    Ok((0..n_ues)
        .map(|k| {
            if k == n_ues - 1 {
                gamma_max_db
            } else {
                linear_to_db(min + step * k as f64)
            }
        })
        .collect())
}
