//! Tapped-delay-line power delay profiles.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tap {
    /// Excess delay in seconds.
    pub delay: f64,
    /// Average tap power in dB.
    pub power_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerDelayProfile {
    name: String,
    taps: Vec<Tap>,
}

const NS: f64 = 1e-9;

const PEDESTRIAN: [(f64, f64); 7] = [
    (0.0, 0.0),
    (30.0, -1.0),
    (70.0, -2.0),
    (90.0, -3.0),
    (120.0, -8.0),
    (190.0, -17.2),
    (410.0, -20.8),
];

const VEHICULAR: [(f64, f64); 9] = [
    (0.0, 0.0),
    (30.0, -1.5),
    (150.0, -1.4),
    (310.0, -3.6),
    (370.0, -0.6),
    (710.0, -9.1),
    (1090.0, -7.0),
    (1730.0, -12.0),
    (2510.0, -16.9),
];

const URBAN: [(f64, f64); 9] = [
    (0.0, -1.0),
    (50.0, -1.0),
    (120.0, -1.0),
    (200.0, 0.0),
    (230.0, 0.0),
    (500.0, 0.0),
    (1600.0, -3.0),
    (2300.0, -5.0),
    (5000.0, -7.0),
];

pub const BUILTIN_PROFILES: [&str; 3] = ["pedestrian", "vehicular", "urban"];

impl PowerDelayProfile {
    pub fn new(name: impl Into<String>, taps: Vec<Tap>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidProfile("at least one tap required".into()));
        }
        if !(taps[0].delay >= 0.0) {
            return Err(Error::InvalidProfile("first delay must be >= 0".into()));
        }
        if taps
            .iter()
            .any(|t| !t.delay.is_finite() || !t.power_db.is_finite())
        {
            return Err(Error::InvalidProfile(
                "delays and powers must be finite".into(),
            ));
        }
        if taps.windows(2).any(|w| w[1].delay <= w[0].delay) {
            return Err(Error::InvalidProfile(
                "delays must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            name: name.into(),
            taps,
        })
    }

    fn from_table(name: &str, table: &[(f64, f64)]) -> Self {
        let taps = table
            .iter()
            .map(|&(d, p)| Tap {
                delay: d * NS,
                power_db: p,
            })
            .collect();
        Self::new(name, taps).expect("built-in profile is valid")
    }

    /// One of the built-in profiles: "pedestrian", "vehicular", "urban", or
    /// "flat" (a single 0 dB tap).
    pub fn builtin(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "pedestrian" => Some(Self::from_table("pedestrian", &PEDESTRIAN)),
            "vehicular" => Some(Self::from_table("vehicular", &VEHICULAR)),
            "urban" => Some(Self::from_table("urban", &URBAN)),
            "flat" => Some(Self::from_table("flat", &[(0.0, 0.0)])),
            _ => None,
        }
    }

    pub fn pedestrian() -> Self {
        Self::from_table("pedestrian", &PEDESTRIAN)
    }

    pub fn vehicular() -> Self {
        Self::from_table("vehicular", &VEHICULAR)
    }

    pub fn urban() -> Self {
        Self::from_table("urban", &URBAN)
    }

    /// Parses `delay_ns power_db` pairs, one per line. Blank lines and `#`
    /// comments are skipped; commas are accepted as separators.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self> {
        let mut taps = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|f| !f.is_empty())
                .collect();
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| {
                    Error::InvalidProfile(format!("line {}: cannot parse {s:?}", lineno + 1))
                })
            };
            if fields.len() != 2 {
                return Err(Error::InvalidProfile(format!(
                    "line {}: expected `delay_ns power_db`",
                    lineno + 1
                )));
            }
            taps.push(Tap {
                delay: parse(fields[0])? * NS,
                power_db: parse(fields[1])?,
            });
        }
        Self::new(name, taps)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Linear tap powers scaled to sum to one.
    pub fn normalized_powers(&self) -> Vec<f64> {
        let lin: Vec<f64> = self
            .taps
            .iter()
            .map(|t| 10f64.powf(t.power_db / 10.0))
            .collect();
        let total: f64 = lin.iter().sum();
        lin.into_iter().map(|p| p / total).collect()
    }

    /// Root-mean-square delay spread in seconds, with moments weighted by
    /// linear tap power.
    pub fn rms_delay_spread(&self) -> f64 {
        if self.taps.len() == 1 {
            return 0.0;
        }
        let w = self.normalized_powers();
        let (m1, m2) = self
            .taps
            .iter()
            .zip(&w)
            .fold((0.0, 0.0), |(m1, m2), (t, p)| {
                (m1 + p * t.delay, m2 + p * t.delay * t.delay)
            });
        (m2 - m1 * m1).max(0.0).sqrt()
    }
}

impl FromStr for PowerDelayProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse("custom", s)
    }
}

impl fmt::Display for PowerDelayProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# {}", self.name)?;
        writeln!(f, "# delay_ns power_db")?;
        for t in &self.taps {
            writeln!(f, "{} {}", (t.delay / NS * 1e6).round() / 1e6, t.power_db)?;
        }
        Ok(())
    }
}
