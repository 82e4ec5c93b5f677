//! Throughput, fairness and inter-scheduling-time metrics, the DLL
//! service-time model and the BETS closed form.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ftgs::single_user_mean_rate;
use crate::linkadapt::SnrGap;
use crate::schedulers::Allocation;

/// Jain's index (Σx)²/(N·Σx²).
pub fn jain_index(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::InvalidArgument("empty throughput list".into()));
    }
    if x.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument(
            "throughputs must be finite and non-negative".into(),
        ));
    }
    let sum: f64 = x.iter().sum();
    let sq: f64 = x.iter().map(|v| v * v).sum();
    if sq == 0.0 {
        return Err(Error::InvalidArgument("all throughputs are zero".into()));
    }
    Ok(sum * sum / (x.len() as f64 * sq))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    /// bit/s per UE.
    pub per_ue: Vec<f64>,
    /// Σ per_ue.
    pub cell: f64,
    /// Zero when nothing was delivered.
    pub jain: f64,
}

impl ThroughputReport {
    pub fn from_rates(per_ue: Vec<f64>) -> Self {
        let cell = per_ue.iter().sum();
        let jain = jain_index(&per_ue).unwrap_or(0.0);
        Self { per_ue, cell, jain }
    }

    /// From total delivered bits per UE over `duration` seconds.
    pub fn from_bits(bits: &[f64], duration: f64) -> Self {
        Self::from_rates(bits.iter().map(|b| b / duration).collect())
    }
}

/// Per-TTI allocation record: owner and bits of every RBG.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AllocationLog {
    rbg_count: usize,
    first_tti: u64,
    owners: Vec<u32>,
    bits: Vec<f64>,
}

impl AllocationLog {
    pub fn new(rbg_count: usize) -> Self {
        Self::starting_at(rbg_count, 0)
    }

    /// A log whose first entry is TTI `first_tti`.
    pub fn starting_at(rbg_count: usize, first_tti: u64) -> Self {
        Self {
            rbg_count,
            first_tti,
            owners: Vec::new(),
            bits: Vec::new(),
        }
    }

    pub fn push(&mut self, allocation: &Allocation) {
        debug_assert_eq!(allocation.owner().len(), self.rbg_count);
        self.owners
            .extend(allocation.owner().iter().map(|&u| u as u32));
        self.bits.extend_from_slice(allocation.rbg_bits());
    }

    pub fn rbg_count(&self) -> usize {
        self.rbg_count
    }

    pub fn len(&self) -> usize {
        if self.rbg_count == 0 {
            0
        } else {
            self.owners.len() / self.rbg_count
        }
    }

    pub fn is_empty(&self) -> bool {
        self.owners.is_empty()
    }

    pub fn owners(&self, entry: usize) -> &[u32] {
        &self.owners[entry * self.rbg_count..(entry + 1) * self.rbg_count]
    }

    pub fn rbg_bits(&self, entry: usize) -> &[f64] {
        &self.bits[entry * self.rbg_count..(entry + 1) * self.rbg_count]
    }

    /// TTI indices in which `ue` owns at least one RBG.
    pub fn scheduling_ttis(&self, ue: usize) -> Vec<u64> {
        (0..self.len())
            .filter(|&k| self.owners(k).contains(&(ue as u32)))
            .map(|k| self.first_tti + k as u64)
            .collect()
    }

    /// Bits delivered to `ue` over the whole log.
    pub fn total_bits(&self, ue: usize) -> f64 {
        self.owners
            .iter()
            .zip(&self.bits)
            .filter(|(o, _)| **o as usize == ue)
            .map(|(_, b)| b)
            .sum()
    }

    /// `tti,rbg,ue,bits` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "tti,rbg,ue,bits")?;
        for k in 0..self.len() {
            let tti = self.first_tti + k as u64;
            for (l, (o, b)) in self.owners(k).iter().zip(self.rbg_bits(k)).enumerate() {
                writeln!(w, "{tti},{l},{o},{}", format_sig(*b, 6))?;
            }
        }
        Ok(())
    }
}

/// Inter-scheduling times of one UE, in TTIs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaStats {
    #[serde(skip)]
    samples: Vec<u64>,
    tti: f64,
    pub count: usize,
    pub p_delta_1: f64,
    pub mean_ms: f64,
    pub std_ms: f64,
    pub max_ms: f64,
}

impl DeltaStats {
    /// From the sorted TTI indices at which the UE was scheduled.
    pub fn from_schedule(ttis: &[u64], tti: f64) -> Result<Self> {
        if ttis.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least two scheduling events, got {}",
                ttis.len()
            )));
        }
        let samples: Vec<u64> = ttis.windows(2).map(|w| w[1] - w[0]).collect();
        if samples.contains(&0) {
            return Err(Error::InvalidArgument(
                "scheduling instants must be strictly increasing".into(),
            ));
        }
        let ms = tti * 1e3;
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<u64>() as f64 / n;
        let var = samples
            .iter()
            .map(|&d| (d as f64 - mean).powi(2))
            .sum::<f64>()
            / n;
        Ok(Self {
            count: samples.len(),
            p_delta_1: samples.iter().filter(|&&d| d == 1).count() as f64 / n,
            mean_ms: mean * ms,
            std_ms: var.sqrt() * ms,
            max_ms: *samples.iter().max().expect("non-empty") as f64 * ms,
            samples,
            tti,
        })
    }

    /// δ samples in TTIs.
    pub fn samples(&self) -> &[u64] {
        &self.samples
    }

    pub fn samples_ms(&self) -> impl Iterator<Item = f64> + '_ {
        let ms = self.tti * 1e3;
        self.samples.iter().map(move |&d| d as f64 * ms)
    }

    /// ECDF of δ given δ > 1 TTI as (δ in ms, cumulative probability) at each
    /// distinct value; empty when every gap is one TTI.
    pub fn conditional_ecdf(&self) -> Vec<(f64, f64)> {
        let mut tail: Vec<u64> = self.samples.iter().copied().filter(|&d| d > 1).collect();
        tail.sort_unstable();
        let n = tail.len() as f64;
        let ms = self.tti * 1e3;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (k, &d) in tail.iter().enumerate() {
            let point = (d as f64 * ms, (k + 1) as f64 / n);
            match out.last_mut() {
                Some(last) if last.0 == point.0 => *last = point,
                _ => out.push(point),
            }
        }
        out
    }
}

pub fn delta_statistics(log: &AllocationLog, ue: usize, tti: f64) -> Result<DeltaStats> {
    DeltaStats::from_schedule(&log.scheduling_ttis(ue), tti)
}

/// `delta_ms,cumulative_probability` rows.
pub fn write_ecdf_csv<W: Write>(mut w: W, ecdf: &[(f64, f64)]) -> std::io::Result<()> {
    writeln!(w, "delta_ms,cumulative_probability")?;
    for (d, p) in ecdf {
        writeln!(w, "{},{}", format_sig(*d, 6), format_sig(*p, 6))?;
    }
    Ok(())
}

/// Index of the UE with the fewest scheduling events (lowest index on ties).
pub fn worst_ue(event_counts: &[usize]) -> Option<usize> {
    event_counts
        .iter()
        .enumerate()
        .min_by_key(|(i, c)| (**c, *i))
        .map(|(i, _)| i)
}

/// Moments of the per-event inter-scheduling time δ (seconds) and of the
/// bits b granted per scheduling event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventStats {
    pub events: usize,
    pub m_delta: f64,
    pub sigma_delta: f64,
    pub m_b: f64,
    pub sigma_b: f64,
}

/// From (TTI index, bits) per scheduling event, in time order.
pub fn event_statistics(events: &[(u64, f64)], tti: f64) -> Option<EventStats> {
    if events.len() < 2 {
        return None;
    }
    let deltas: Vec<f64> = events
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) as f64 * tti)
        .collect();
    let bits: Vec<f64> = events.iter().map(|e| e.1).collect();
    let (m_delta, sigma_delta) = mean_std(&deltas);
    let (m_b, sigma_b) = mean_std(&bits);
    Some(EventStats {
        events: events.len(),
        m_delta,
        sigma_delta,
        m_b,
        sigma_b,
    })
}

fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServiceTimeMoments {
    /// Mean of D in seconds.
    pub m_d: f64,
    /// Standard deviation of D in seconds.
    pub sigma_d: f64,
    /// Mean number of scheduling events per packet.
    pub m_n: f64,
    pub sigma_n: f64,
}

/// Moments of the time D to deliver an L-bit packet when each scheduling
/// event carries b bits and events are δ apart.
///
/// N is the number of events per packet, with the packet start uniform within
/// an event: m_N = L/m_b + 1/2 and
/// σ_N² = (m_b² + 4σ_b²)/(12 m_b²) + m_N σ_b²/m_b².
/// D is a random sum of N gaps: m_D = m_N m_δ, σ_D² = m_N σ_δ² + σ_N² m_δ².
pub fn dll_service_moments(
    m_delta: f64,
    sigma_delta: f64,
    m_b: f64,
    sigma_b: f64,
    l_bits: f64,
) -> Result<ServiceTimeMoments> {
    if !(m_b > 0.0 && l_bits > 0.0 && m_delta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "m_b, L and m_delta must be positive (m_b = {m_b}, L = {l_bits}, m_delta = {m_delta})"
        )));
    }
    if !(sigma_b >= 0.0 && sigma_delta >= 0.0) {
        return Err(Error::InvalidArgument(
            "standard deviations must be non-negative".into(),
        ));
    }
    let m_n = l_bits / m_b + 0.5;
    let cv2 = (sigma_b / m_b).powi(2);
    let var_n = (1.0 + 4.0 * cv2) / 12.0 + m_n * cv2;
    if !(var_n >= 0.0) {
        return Err(Error::ModelInconsistency(format!(
            "negative event-count variance {var_n}"
        )));
    }
    let var_d = m_n * sigma_delta * sigma_delta + var_n * m_delta * m_delta;
    Ok(ServiceTimeMoments {
        m_d: m_n * m_delta,
        sigma_d: var_d.sqrt(),
        m_n,
        sigma_n: var_n.sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetsClosedForm {
    /// Mean rate Ḡᵢ of each UE when it holds the band, bit/s.
    pub capacity: Vec<f64>,
    /// Equal per-UE throughput S/N, bit/s.
    pub per_ue: f64,
    /// Cell throughput S = N/Σ(1/Ḡᵢ), bit/s.
    pub cell: f64,
    /// S/B in bit/s/Hz.
    pub efficiency: f64,
}

/// Long-term BETS throughput on Rayleigh fading with the continuous rate
/// model over bandwidth B.
pub fn bets_closed_form(
    gamma_bars: &[f64],
    gap: &SnrGap,
    bandwidth: f64,
) -> Result<BetsClosedForm> {
    if gamma_bars.is_empty() {
        return Err(Error::InvalidArgument("at least one UE required".into()));
    }
    if gamma_bars.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
        return Err(Error::InvalidArgument(
            "average SINRs must be positive".into(),
        ));
    }
    if !(bandwidth > 0.0) {
        return Err(Error::InvalidArgument("bandwidth must be positive".into()));
    }
    let capacity: Vec<f64> = gamma_bars
        .iter()
        .map(|&g| single_user_mean_rate(g, gap, bandwidth))
        .collect();
    let n = capacity.len() as f64;
    let cell = n / capacity.iter().map(|g| 1.0 / g).sum::<f64>();
    Ok(BetsClosedForm {
        per_ue: cell / n,
        efficiency: cell / bandwidth,
        cell,
        capacity,
    })
}

/// φ = η_FTGS/η_BETS − 1.
pub fn opportunistic_gain(eta_ftgs: f64, eta_bets: f64) -> Result<f64> {
    if !(eta_bets > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "BETS efficiency must be positive, got {eta_bets}"
        )));
    }
    Ok(eta_ftgs / eta_bets - 1.0)
}

/// `x` with `digits` significant digits, in plain notation for moderate
/// magnitudes and scientific otherwise; trailing zeros dropped.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
