//! x-dependent observables given by finite Fourier series.

use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::numerics::{cos_2pi, frac, sin_2pi};

/// One term `cos * cos(2 pi k x) + sin * sin(2 pi k x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierMode {
    pub k: u32,
    pub cos: f64,
    pub sin: f64,
}

/// `phi(x) = constant + sum of modes`, evaluated on the first coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    pub label: String,
    pub constant: f64,
    pub modes: Vec<FourierMode>,
}

impl Observable {
    pub fn sin() -> Self {
        Self::fourier(1)
    }

    pub fn cos() -> Self {
        Observable {
            label: "cos".into(),
            constant: 0.0,
            modes: vec![FourierMode { k: 1, cos: 1.0, sin: 0.0 }],
        }
    }

    /// `sin(2 pi k x)`.
    pub fn fourier(k: u32) -> Self {
        Observable {
            label: if k == 1 { "sin".into() } else { format!("fourier:{k}") },
            constant: 0.0,
            modes: vec![FourierMode { k, cos: 0.0, sin: 1.0 }],
        }
    }

    pub fn constant(c: f64) -> Self {
        Observable {
            label: format!("const:{c}"),
            constant: c,
            modes: Vec::new(),
        }
    }

    /// Parses `sin`, `cos`, `fourier:k` or `const:c`.
    ///
    /// ```
    /// use stdmap_core::stats::Observable;
    /// let phi = Observable::parse("fourier:3").unwrap();
    /// assert!((phi.eval(1.0 / 12.0) - 1.0).abs() < 1e-15);
    /// assert!(Observable::parse("tan").is_err());
    /// ```
    pub fn parse(selector: &str) -> Result<Self, StatsError> {
        let bad = || StatsError::InvalidConfig(format!("unknown observable '{selector}'"));
        match selector {
            "sin" => Ok(Self::sin()),
            "cos" => Ok(Self::cos()),
            s => match s.split_once(':') {
                Some(("fourier", k)) => {
                    let k: u32 = k.parse().map_err(|_| bad())?;
                    if k == 0 {
                        return Err(StatsError::InvalidConfig("fourier:k needs k >= 1".into()));
                    }
                    Ok(Self::fourier(k))
                }
                Some(("const", c)) => c.parse().map(Self::constant).map_err(|_| bad()),
                _ => Err(bad()),
            },
        }
    }

    /// Reads coefficient lines `k a b` standing for `a cos(2 pi k x) + b sin(2 pi k x)`;
    /// `k = 0` contributes `a` to the constant. Blank lines and `#` comments are skipped.
    pub fn from_coefficients(label: &str, text: &str) -> Result<Self, StatsError> {
        let mut obs = Observable {
            label: label.to_string(),
            constant: 0.0,
            modes: Vec::new(),
        };
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = || StatsError::InvalidConfig(format!("{label}:{}: expected 'k a b', got '{line}'", lineno + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(err());
            }
            let k: u32 = fields[0].parse().map_err(|_| err())?;
            let a: f64 = fields[1].parse().map_err(|_| err())?;
            let b: f64 = fields[2].parse().map_err(|_| err())?;
            if !(a.is_finite() && b.is_finite()) {
                return Err(err());
            }
            if k == 0 {
                obs.constant += a;
            } else {
                obs.modes.push(FourierMode { k, cos: a, sin: b });
            }
        }
        if obs.constant == 0.0 && obs.modes.is_empty() {
            return Err(StatsError::InvalidConfig(format!("{label}: no coefficients")));
        }
        Ok(obs)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let mut v = self.constant;
        for m in &self.modes {
            let t = frac(m.k as f64 * x);
            if m.cos != 0.0 {
                v += m.cos * cos_2pi(t);
            }
            if m.sin != 0.0 {
                v += m.sin * sin_2pi(t);
            }
        }
        v
    }

    /// `sup |phi| + sup |phi'|`, bounded through the coefficients.
    pub fn c1_norm_bound(&self) -> f64 {
        self.constant.abs()
            + self
                .modes
                .iter()
                .map(|m| (m.cos.abs() + m.sin.abs()) * (1.0 + std::f64::consts::TAU * m.k as f64))
                .sum::<f64>()
    }
}
