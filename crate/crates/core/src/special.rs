//! Exponential integral E₁(x) = ∫ₓ^∞ e⁻ᵗ/t dt for x > 0.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;
const SERIES_LIMIT: f64 = 1.0;
const EPS: f64 = 1e-16;
const MAX_TERMS: usize = 500;

/// E₁(x). Returns +∞ at 0 and NaN for negative or NaN input.
pub fn e1(x: f64) -> f64 {
    if x.is_nan() || x < 0.0 {
        f64::NAN
    } else if x == 0.0 {
        f64::INFINITY
    } else if x <= SERIES_LIMIT {
        e1_series(x)
    } else {
        (-x).exp() * scaled_continued_fraction(x)
    }
}

/// eˣ·E₁(x), evaluated without overflow for large x.
pub fn exp_e1(x: f64) -> f64 {
    if x.is_nan() || x < 0.0 {
        f64::NAN
    } else if x == 0.0 {
        f64::INFINITY
    } else if x <= SERIES_LIMIT {
        x.exp() * e1_series(x)
    } else {
        scaled_continued_fraction(x)
    }
}

// E₁(x) = −γ − ln x − Σ_{k≥1} (−x)ᵏ/(k·k!)
fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term *= -x / kf;
        let contrib = term / kf;
        sum += contrib;
        if contrib.abs() < EPS * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

// eˣE₁(x) = 1/(x+1− 1/(x+3− 4/(x+5− …))), modified Lentz.
fn scaled_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_TERMS {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // Abramowitz & Stegun Table 5.1
        let cases = [
            (0.5, 0.559_773_594_776_160_8),
            (1.0, 0.219_383_934_395_520_3),
            (2.0, 0.048_900_510_708_061_12),
            (5.0, 0.001_148_295_591_275_325_8),
        ];
        for (x, want) in cases {
            assert!((e1(x) - want).abs() / want < 1e-13, "E1({x}) = {}", e1(x));
        }
    }

    #[test]
    fn continuity_at_switch() {
        let below = e1_series(1.0);
        let above = (-1.0f64).exp() * scaled_continued_fraction(1.0);
        assert!((below - above).abs() / below < 1e-13);
    }

    #[test]
    fn scaled_matches_unscaled() {
        for x in [0.01, 0.3, 1.5, 20.0] {
            assert!((exp_e1(x) - x.exp() * e1(x)).abs() / exp_e1(x) < 1e-13);
        }
        assert!(exp_e1(800.0).is_finite());
    }

    #[test]
    fn domain() {
        assert!(e1(-1.0).is_nan());
        assert_eq!(e1(0.0), f64::INFINITY);
    }
}
