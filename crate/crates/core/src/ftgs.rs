//! FTGS parameter optimization on Rayleigh channels.
//!
//! The FTGS metric of UE i is Sᵢ = W·log₂(1 + γ/Γ)/αᵢ. With γ exponential of
//! mean γ̄ᵢ its CDF is 1 − e^{c/γ̄ᵢ}, c = Γ(1 − 2^{αᵢs/W}). From the metric
//! distributions follow the access probability p(i) = P[Sᵢ > maxⱼ Sⱼ] and the
//! mean rate R̄ᵢ of UE i when it wins. [`solve`] finds the weights αᵢ for
//! which every UE receives the same long-term bits, p(i)·R̄ᵢ = const, which
//! is equivalent to p(i) = 1/(R̄ᵢ Σⱼ 1/R̄ⱼ).

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linkadapt::SnrGap;
use crate::quadrature::{integrate_with_breaks, Tolerance};
use crate::special::exp_e1;

/// Presentation scale for α: the solver reports weights with
/// mean(αᵢ / (W·mᵢ)) equal to this constant, mᵢ being the single-user
/// Shannon mean efficiency. Reproduces the usual 10-UE reference table
/// (α₁ ≈ 2.99 at 10 dB, Γ ≈ 5.53). Scheduling only depends on ratios.
pub const ALPHA_SCALE: f64 = 2.368_785_446_435_286_4;

/// Distribution of the FTGS metric of one UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricDistribution {
    /// Linear average SINR γ̄.
    pub gamma_bar: f64,
    /// Weight α in bit/s.
    pub alpha: f64,
    /// Linear SNR gap Γ.
    pub gap: f64,
    /// Bandwidth W in Hz.
    pub bandwidth: f64,
}

impl MetricDistribution {
    pub fn new(gamma_bar: f64, alpha: f64, gap: &SnrGap, bandwidth: f64) -> Result<Self> {
        for (name, v) in [
            ("gamma_bar", gamma_bar),
            ("alpha", alpha),
            ("bandwidth", bandwidth),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(Self {
            gamma_bar,
            alpha,
            gap: gap.gamma(),
            bandwidth,
        })
    }

    /// c/γ̄ with c = Γ(1 − 2^{αs/W}); always ≤ 0.
    fn exponent(&self, s: f64) -> f64 {
        -self.gap * (self.alpha * s * LN_2 / self.bandwidth).exp_m1() / self.gamma_bar
    }

    pub fn cdf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        -self.exponent(s).exp_m1()
    }

    pub fn pdf(&self, s: f64) -> f64 {
        if s < 0.0 {
            return 0.0;
        }
        let e = self.exponent(s);
        // Γ − c = Γ·2^{αs/W}
        let gamma_minus_c = self.gap * (self.alpha * s * LN_2 / self.bandwidth).exp();
        LN_2 * self.alpha / (self.bandwidth * self.gamma_bar) * gamma_minus_c * e.exp()
    }

    /// s with cdf(s) = q, for q ∈ [0, 1).
    pub fn quantile(&self, q: f64) -> f64 {
        let ln_tail = (-q).ln_1p();
        (self.bandwidth / self.alpha) * (1.0 - self.gamma_bar * ln_tail / self.gap).log2()
    }
}

pub fn metric_cdf(dist: &MetricDistribution, s: f64) -> f64 {
    dist.cdf(s)
}

pub fn metric_pdf(dist: &MetricDistribution, s: f64) -> f64 {
    dist.pdf(s)
}

/// W·E[log₂(1 + εγ̄/Γ)] for ε ~ Exp(1): mean rate of a UE that is always
/// scheduled, = W·log₂(e)·e^{Γ/γ̄}·E₁(Γ/γ̄).
pub fn single_user_mean_rate(gamma_bar: f64, gap: &SnrGap, bandwidth: f64) -> f64 {
    let x = gap.gamma() / gamma_bar;
    bandwidth * std::f64::consts::LOG2_E * exp_e1(x)
}

const TAIL: f64 = 1e-12;

fn domain(dists: &[MetricDistribution]) -> (f64, Vec<f64>) {
    let upper = dists
        .iter()
        .map(|d| d.quantile(1.0 - TAIL))
        .fold(0.0, f64::max);
    let mut breaks: Vec<f64> = dists
        .iter()
        .flat_map(|d| [0.01, 0.25, 0.5, 0.75, 0.99].map(|q| d.quantile(q)))
        .filter(|&s| s > 0.0 && s < upper)
        .collect();
    breaks.sort_by(f64::total_cmp);
    (upper, breaks)
}

/// ∫ sᵏ·p_{Sᵢ}(s)·Π_{j≠i} P_{Sⱼ}(s) ds for k ∈ {0, 1}.
fn winning_moment(dists: &[MetricDistribution], i: usize, k: i32, tol: Tolerance) -> Result<f64> {
    if i >= dists.len() {
        return Err(Error::InvalidArgument(format!(
            "UE index {i} out of range for {} UEs",
            dists.len()
        )));
    }
    let (upper, breaks) = domain(dists);
    let integrand = |s: f64| {
        let mut v = dists[i].pdf(s) * s.powi(k);
        for (j, d) in dists.iter().enumerate() {
            if j != i {
                v *= d.cdf(s);
            }
        }
        v
    };
    Ok(integrate_with_breaks(integrand, 0.0, upper, &breaks, tol)?.value)
}

/// p(i) = ∫ p_{Sᵢ}(s) Π_{j≠i} P_{Sⱼ}(s) ds.
pub fn access_probability(dists: &[MetricDistribution], i: usize) -> Result<f64> {
    access_probability_with(dists, i, Tolerance::default())
}

pub fn access_probability_with(
    dists: &[MetricDistribution],
    i: usize,
    tol: Tolerance,
) -> Result<f64> {
    winning_moment(dists, i, 0, tol)
}

/// R̄ᵢ = (αᵢ/p(i)) ∫ s·p_{Sᵢ}(s) Π_{j≠i} P_{Sⱼ}(s) ds, in bit/s.
pub fn conditional_mean_rate(dists: &[MetricDistribution], i: usize) -> Result<f64> {
    conditional_mean_rate_with(dists, i, Tolerance::default())
}

pub fn conditional_mean_rate_with(
    dists: &[MetricDistribution],
    i: usize,
    tol: Tolerance,
) -> Result<f64> {
    let p = winning_moment(dists, i, 0, tol)?;
    if !(p > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "UE {i} never wins the argmax (p = {p})"
        )));
    }
    Ok(dists[i].alpha / p * winning_moment(dists, i, 1, tol)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FtgsParameters {
    pub gamma_bars: Vec<f64>,
    /// Weights αᵢ in bit/s.
    pub alpha: Vec<f64>,
    /// Access probabilities p(i).
    pub p: Vec<f64>,
    /// Conditional mean rates R̄ᵢ in bit/s.
    pub rbar: Vec<f64>,
    pub bandwidth: f64,
    pub gap: f64,
    /// max over i of |p(i) − 1/(R̄ᵢ Σⱼ R̄ⱼ⁻¹)| at the solution.
    pub residual: f64,
    pub iterations: usize,
}

impl FtgsParameters {
    pub fn n_ues(&self) -> usize {
        self.alpha.len()
    }

    /// αᵢ/W: the weights in bit/s/Hz.
    pub fn alpha_per_hz(&self) -> Vec<f64> {
        self.alpha.iter().map(|a| a / self.bandwidth).collect()
    }

    pub fn rbar_per_hz(&self) -> Vec<f64> {
        self.rbar.iter().map(|r| r / self.bandwidth).collect()
    }

    /// p(i)·R̄ᵢ/W, the guaranteed spectral efficiency of each UE.
    pub fn guaranteed_efficiency(&self) -> Vec<f64> {
        self.p
            .iter()
            .zip(&self.rbar)
            .map(|(p, r)| p * r / self.bandwidth)
            .collect()
    }

    fn distributions(&self) -> Vec<MetricDistribution> {
        self.gamma_bars
            .iter()
            .zip(&self.alpha)
            .map(|(&g, &a)| MetricDistribution {
                gamma_bar: g,
                alpha: a,
                gap: self.gap,
                bandwidth: self.bandwidth,
            })
            .collect()
    }

    /// Metric distributions at the solved weights.
    pub fn metric_distributions(&self) -> Vec<MetricDistribution> {
        self.distributions()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Bound on every residual of p(i) = 1/(R̄ᵢ Σⱼ R̄ⱼ⁻¹).
    pub tol: f64,
    pub quadrature: Tolerance,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            quadrature: Tolerance::default(),
            max_iterations: 60,
        }
    }
}

/// Solves for {αᵢ, p(i), R̄ᵢ} given linear average SINRs.
pub fn solve(gamma_bars: &[f64], gap: &SnrGap, bandwidth: f64, tol: f64) -> Result<FtgsParameters> {
    solve_with(
        gamma_bars,
        gap,
        bandwidth,
        &SolverOptions {
            tol,
            ..SolverOptions::default()
        },
    )
}

struct Problem<'a> {
    gamma_bars: &'a [f64],
    gap: f64,
    bandwidth: f64,
    quad: Tolerance,
}

impl Problem<'_> {
    fn dists(&self, log_alpha: &[f64]) -> Vec<MetricDistribution> {
        self.gamma_bars
            .iter()
            .zip(log_alpha)
            .map(|(&g, &la)| MetricDistribution {
                gamma_bar: g,
                alpha: la.exp(),
                gap: self.gap,
                bandwidth: self.bandwidth,
            })
            .collect()
    }

    /// ln(p(i)·R̄ᵢ) = ln(αᵢ·∫ s pᵢ Π Pⱼ) for every i.
    fn log_bits(&self, log_alpha: &[f64]) -> Result<Vec<f64>> {
        let dists = self.dists(log_alpha);
        (0..dists.len())
            .map(|i| Ok(log_alpha[i] + winning_moment(&dists, i, 1, self.quad)?.ln()))
            .collect()
    }

    /// Residuals for UEs 1..N relative to UE 0, with α₀ pinned.
    fn residual(&self, log_alpha: &[f64]) -> Result<Vec<f64>> {
        let lb = self.log_bits(log_alpha)?;
        Ok(lb[1..].iter().map(|v| v - lb[0]).collect())
    }

    fn evaluate(&self, log_alpha: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let dists = self.dists(log_alpha);
        let mut p = Vec::with_capacity(dists.len());
        let mut rbar = Vec::with_capacity(dists.len());
        for i in 0..dists.len() {
            let pi = winning_moment(&dists, i, 0, self.quad)?;
            let m1 = winning_moment(&dists, i, 1, self.quad)?;
            p.push(pi);
            rbar.push(dists[i].alpha * m1 / pi);
        }
        Ok((p, rbar))
    }
}

fn equal_bits_residual(p: &[f64], rbar: &[f64]) -> f64 {
    let inv_sum: f64 = rbar.iter().map(|r| 1.0 / r).sum();
    p.iter()
        .zip(rbar)
        .map(|(p, r)| (p - 1.0 / (r * inv_sum)).abs())
        .fold(0.0, f64::max)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn solve_with(
    gamma_bars: &[f64],
    gap: &SnrGap,
    bandwidth: f64,
    opts: &SolverOptions,
) -> Result<FtgsParameters> {
    if gamma_bars.is_empty() {
        return Err(Error::InvalidArgument("at least one UE required".into()));
    }
    if let Some(g) = gamma_bars.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "average SINR must be positive, got {g}"
        )));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "bandwidth must be positive, got {bandwidth}"
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let problem = Problem {
        gamma_bars,
        gap: gap.gamma(),
        bandwidth,
        quad: opts.quadrature,
    };
    let n = gamma_bars.len();
    let single: Vec<f64> = gamma_bars
        .iter()
        .map(|&g| single_user_mean_rate(g, gap, bandwidth))
        .collect();

    // Newton on ln αᵢ, i ≥ 1, with a forward-difference Jacobian.
    let mut x: Vec<f64> = single.iter().map(|m| m.ln()).collect();
    let mut iterations = 0;
    if n > 1 {
        let mut f = problem.residual(&x)?;
        loop {
            if max_abs(&f) < 0.1 * opts.tol {
                break;
            }
            if iterations >= opts.max_iterations {
                return Err(Error::SolverDivergence {
                    iterations,
                    max_residual: max_abs(&f),
                    residuals: f,
                });
            }
            iterations += 1;
            let h = 1e-6;
            let mut jac = DMatrix::<f64>::zeros(n - 1, n - 1);
            for k in 1..n {
                let mut xp = x.clone();
                xp[k] += h;
                let fp = problem.residual(&xp)?;
                for r in 0..n - 1 {
                    jac[(r, k - 1)] = (fp[r] - f[r]) / h;
                }
            }
            let rhs = DVector::from_iterator(n - 1, f.iter().map(|v| -v));
            let step = jac
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::SolverDivergence {
                    iterations,
                    max_residual: max_abs(&f),
                    residuals: f.clone(),
                })?;
            // backtracking on the residual norm
            let norm = max_abs(&f);
            let mut lambda = 1.0;
            loop {
                let mut trial = x.clone();
                for k in 1..n {
                    trial[k] += lambda * step[k - 1];
                }
                let ft = problem.residual(&trial)?;
                if max_abs(&ft) < norm || lambda < 1e-4 {
                    x = trial;
                    f = ft;
                    break;
                }
                lambda *= 0.5;
            }
        }
    }

    // fix the presentation scale: mean(αᵢ/mᵢ) = ALPHA_SCALE
    let ratio_mean = x
        .iter()
        .zip(&single)
        .map(|(la, m)| la.exp() / m)
        .sum::<f64>()
        / n as f64;
    let shift = (ALPHA_SCALE / ratio_mean).ln();
    for la in &mut x {
        *la += shift;
    }

    let (p, rbar) = problem.evaluate(&x)?;
    let residual = equal_bits_residual(&p, &rbar);
    if !(residual <= opts.tol) {
        return Err(Error::SolverDivergence {
            iterations,
            max_residual: residual,
            residuals: p
                .iter()
                .zip(&rbar)
                .map(|(p, r)| p - 1.0 / (r * rbar.iter().map(|q| 1.0 / q).sum::<f64>()))
                .collect(),
        });
    }
    Ok(FtgsParameters {
        gamma_bars: gamma_bars.to_vec(),
        alpha: x.iter().map(|la| la.exp()).collect(),
        p,
        rbar,
        bandwidth,
        gap: gap.gamma(),
        residual,
        iterations,
    })
}
