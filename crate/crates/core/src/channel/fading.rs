//! Sum-of-sinusoids Jakes fading and the tapped-delay-line frequency
//! response built on top of it.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pdp::{PowerDelayProfile, Tap};
use super::ChannelTrace;
use crate::error::{Error, Result};

pub const DEFAULT_OSCILLATORS: usize = 32;
pub const MIN_OSCILLATORS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FadingModel {
    #[default]
    JakesRayleigh,
    /// Listed taps carry a line-of-sight component.
    Rician,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FadingSpec {
    /// Maximum Doppler shift ν_d in Hz.
    pub doppler_hz: f64,
    #[serde(default)]
    pub model: FadingModel,
    /// Rice factor K in dB for the leading taps; taps beyond the list stay
    /// Rayleigh.
    #[serde(default)]
    pub rice_k_db: Vec<f64>,
    #[serde(default = "default_oscillators")]
    pub oscillators: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_oscillators() -> usize {
    DEFAULT_OSCILLATORS
}

impl FadingSpec {
    pub fn rayleigh(doppler_hz: f64, seed: u64) -> Self {
        Self {
            doppler_hz,
            model: FadingModel::JakesRayleigh,
            rice_k_db: Vec::new(),
            oscillators: DEFAULT_OSCILLATORS,
            seed,
        }
    }

    pub fn rician(doppler_hz: f64, rice_k_db: Vec<f64>, seed: u64) -> Self {
        Self {
            model: FadingModel::Rician,
            rice_k_db,
            ..Self::rayleigh(doppler_hz, seed)
        }
    }

    pub fn validate(&self, tap_count: usize) -> Result<()> {
        if !(self.doppler_hz > 0.0 && self.doppler_hz.is_finite()) {
            return Err(Error::InvalidFading(format!(
                "doppler spread must be positive, got {}",
                self.doppler_hz
            )));
        }
        if self.oscillators < MIN_OSCILLATORS {
            return Err(Error::InvalidFading(format!(
                "at least {MIN_OSCILLATORS} oscillators required, got {}",
                self.oscillators
            )));
        }
        if self.model == FadingModel::Rician {
            if self.rice_k_db.len() > tap_count {
                return Err(Error::InvalidFading(format!(
                    "{} Rice factors for {tap_count} taps",
                    self.rice_k_db.len()
                )));
            }
            if self.rice_k_db.iter().any(|k| !k.is_finite()) {
                return Err(Error::InvalidFading("Rice factors must be finite".into()));
            }
        }
        Ok(())
    }

    fn rice_k_linear(&self, tap: usize) -> Option<f64> {
        match self.model {
            FadingModel::Rician => self.rice_k_db.get(tap).map(|k| 10f64.powf(k / 10.0)),
            FadingModel::JakesRayleigh => None,
        }
    }
}

/// Independent random stream for one (UE, tap) fading process.
fn stream_rng(seed: u64, ue: usize, tap: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((ue as u64) << 16) | tap as u64);
    rng
}

/// Unit-power complex Gaussian-like process with Jakes Doppler spectrum,
/// realized as a sum of equal-amplitude complex sinusoids.
///
/// Arrival angles are θₙ = 2π(n + u)/M with a random offset u ∈ [0.1, 0.4]
/// per process; the offset keeps θₙ and −θₘ apart so no two oscillators share
/// a Doppler frequency, which makes the time average of |h|² equal to one.
#[derive(Debug, Clone)]
pub struct JakesProcess {
    rotors: Vec<Complex64>,
    steps: Vec<Complex64>,
    scale: f64,
    count: u64,
}

const RENORMALIZE_EVERY: u64 = 4096;

impl JakesProcess {
    pub fn new<R: Rng>(doppler_hz: f64, oscillators: usize, dt: f64, rng: &mut R) -> Self {
        let m = oscillators as f64;
        let offset = rng.random_range(0.1..0.4);
        let mut rotors = Vec::with_capacity(oscillators);
        let mut steps = Vec::with_capacity(oscillators);
        for n in 0..oscillators {
            let theta = 2.0 * PI * (n as f64 + offset) / m;
            let freq = doppler_hz * theta.cos();
            let phase = rng.random_range(0.0..2.0 * PI);
            rotors.push(Complex64::from_polar(1.0, phase));
            steps.push(Complex64::from_polar(1.0, 2.0 * PI * freq * dt));
        }
        Self {
            rotors,
            steps,
            scale: 1.0 / m.sqrt(),
            count: 0,
        }
    }

    /// Current sample, then advance by one step.
    pub fn next_sample(&mut self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (r, s) in self.rotors.iter_mut().zip(&self.steps) {
            acc += *r;
            *r *= s;
        }
        self.count += 1;
        if self.count % RENORMALIZE_EVERY == 0 {
            for r in &mut self.rotors {
                *r /= r.norm();
            }
        }
        acc * self.scale
    }
}

impl Iterator for JakesProcess {
    type Item = Complex64;

    fn next(&mut self) -> Option<Complex64> {
        Some(self.next_sample())
    }
}

/// One tap of a tapped delay line: a diffuse Jakes component plus an
/// optional line-of-sight phasor, with total average power `power`.
///
/// The line-of-sight path arrives at a random angle θ₀ and so rotates at the
/// Doppler shift ν_d·cos θ₀ with a random initial phase.
#[derive(Debug, Clone)]
pub struct TapProcess {
    diffuse: JakesProcess,
    diffuse_amplitude: f64,
    los: Complex64,
    los_step: Complex64,
}

impl TapProcess {
    pub fn new(spec: &FadingSpec, ue: usize, tap: usize, power: f64, dt: f64) -> Self {
        let mut rng = stream_rng(spec.seed, ue, tap);
        let diffuse = JakesProcess::new(spec.doppler_hz, spec.oscillators, dt, &mut rng);
        let amplitude = power.sqrt();
        match spec.rice_k_linear(tap) {
            Some(k) => {
                let phase = rng.random_range(0.0..2.0 * PI);
                let theta: f64 = rng.random_range(0.0..2.0 * PI);
                let shift = spec.doppler_hz * theta.cos();
                Self {
                    diffuse,
                    diffuse_amplitude: amplitude * (1.0 / (k + 1.0)).sqrt(),
                    los: Complex64::from_polar(amplitude * (k / (k + 1.0)).sqrt(), phase),
                    los_step: Complex64::from_polar(1.0, 2.0 * PI * shift * dt),
                }
            }
            None => Self {
                diffuse,
                diffuse_amplitude: amplitude,
                los: Complex64::new(0.0, 0.0),
                los_step: Complex64::new(1.0, 0.0),
            },
        }
    }

    pub fn next_sample(&mut self) -> Complex64 {
        let h = self.los + self.diffuse.next_sample() * self.diffuse_amplitude;
        self.los *= self.los_step;
        h
    }
}

fn check_dims(n_ues: usize, n_ttis: usize, rbg_count: usize, tti: f64) -> Result<()> {
    if n_ues == 0 || n_ttis == 0 || rbg_count == 0 {
        return Err(Error::InvalidArgument(format!(
            "trace dimensions must be positive (ues {n_ues}, ttis {n_ttis}, rbgs {rbg_count})"
        )));
    }
    if !(tti > 0.0 && tti.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "TTI must be positive, got {tti}"
        )));
    }
    Ok(())
}

/// Flat fading: one Jakes process per UE, the same gain on every RBG.
pub fn generate_flat_trace(
    spec: &FadingSpec,
    n_ues: usize,
    n_ttis: usize,
    rbg_count: usize,
    tti: f64,
) -> Result<ChannelTrace> {
    spec.validate(1)?;
    check_dims(n_ues, n_ttis, rbg_count, tti)?;
    let taps = [Tap {
        delay: 0.0,
        power_db: 0.0,
    }];
    Ok(tapped_delay_line(
        &taps,
        &[1.0],
        spec,
        n_ues,
        n_ttis,
        rbg_count,
        0.0,
        tti,
    ))
}

/// Frequency-selective fading: |H(f)|² of the tapped delay line evaluated at
/// the centre of each RBG, with tap powers normalized to unit total.
pub fn generate_selective_trace(
    pdp: &PowerDelayProfile,
    spec: &FadingSpec,
    n_ues: usize,
    n_ttis: usize,
    rbg_count: usize,
    rbg_bandwidth: f64,
    tti: f64,
) -> Result<ChannelTrace> {
    spec.validate(pdp.len())?;
    check_dims(n_ues, n_ttis, rbg_count, tti)?;
    if !(rbg_bandwidth > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "RBG bandwidth must be positive, got {rbg_bandwidth}"
        )));
    }
    let powers = pdp.normalized_powers();
    Ok(tapped_delay_line(
        pdp.taps(),
        &powers,
        spec,
        n_ues,
        n_ttis,
        rbg_count,
        rbg_bandwidth,
        tti,
    ))
}

#[allow(clippy::too_many_arguments)]
fn tapped_delay_line(
    taps: &[Tap],
    powers: &[f64],
    spec: &FadingSpec,
    n_ues: usize,
    n_ttis: usize,
    rbg_count: usize,
    rbg_bandwidth: f64,
    tti: f64,
) -> ChannelTrace {
    // e^{-j2π f_l τ_j}, row-major by RBG
    let phasors: Vec<Complex64> = (0..rbg_count)
        .flat_map(|l| {
            let f = (l as f64 + 0.5) * rbg_bandwidth;
            taps.iter()
                .map(move |t| Complex64::from_polar(1.0, -2.0 * PI * f * t.delay))
        })
        .collect();
    let mut gains = vec![0.0; n_ues * n_ttis * rbg_count];
    let mut tap_samples = vec![Complex64::new(0.0, 0.0); taps.len()];
    for ue in 0..n_ues {
        let mut procs: Vec<TapProcess> = powers
            .iter()
            .enumerate()
            .map(|(j, &p)| TapProcess::new(spec, ue, j, p, tti))
            .collect();
        let ue_gains = &mut gains[ue * n_ttis * rbg_count..(ue + 1) * n_ttis * rbg_count];
        for row in ue_gains.chunks_exact_mut(rbg_count) {
            for (s, p) in tap_samples.iter_mut().zip(&mut procs) {
                *s = p.next_sample();
            }
            for (l, g) in row.iter_mut().enumerate() {
                let ph = &phasors[l * taps.len()..(l + 1) * taps.len()];
                let h = tap_samples
                    .iter()
                    .zip(ph)
                    .fold(Complex64::new(0.0, 0.0), |acc, (s, e)| acc + s * e);
                *g = h.norm_sqr();
            }
        }
    }
    ChannelTrace::new(gains, n_ues, n_ttis, rbg_count, tti)
}
