use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Shape of the outward drift `b(x)` for `x ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DriftKind {
    /// `b ≡ 0`: simple random walk.
    Zero,
    /// `b ≡ b0`.
    Constant { b: f64 },
    /// `b(x) = c / x`.
    Lamperti { c: f64 },
    /// `b(x) = D / (x ln x)`.
    LogLamperti { d: f64 },
    /// Explicit values `b(1), b(2), ...`; the last value repeats.
    Table { values: Vec<f64> },
}

/// An outward drift profile on `x = 1, 2, ...`.
///
/// Below `x_min` the drift is clamped to `b(x_min)`, which keeps `b` total
/// while preserving its asymptotic class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    kind: DriftKind,
    x_min: u64,
}

impl Drift {
    pub fn new(kind: DriftKind, x_min: u64) -> Result<Self> {
        if x_min == 0 {
            return Err(Error::param("x_min must be a positive integer"));
        }
        let drift = Self { kind, x_min };
        match &drift.kind {
            DriftKind::Zero => {}
            DriftKind::Constant { b } => check(1, *b)?,
            DriftKind::Lamperti { c } => {
                if !c.is_finite() || c.abs() >= x_min as f64 {
                    return Err(Error::DriftOutOfRange { x: x_min as i64, value: c / x_min as f64 });
                }
            }
            DriftKind::LogLamperti { d } => {
                if x_min < 2 {
                    return Err(Error::param("log-Lamperti drift needs x_min >= 2"));
                }
                check(x_min as i64, drift.at(x_min))?;
                if !d.is_finite() {
                    return Err(Error::param("log-Lamperti D must be finite"));
                }
            }
            DriftKind::Table { values } => {
                if values.is_empty() {
                    return Err(Error::param("drift table is empty"));
                }
                for (i, &b) in values.iter().enumerate() {
                    check(i as i64 + 1, b)?;
                }
            }
        }
        Ok(drift)
    }

    pub fn zero() -> Self {
        Self { kind: DriftKind::Zero, x_min: 1 }
    }

    pub fn kind(&self) -> &DriftKind {
        &self.kind
    }

    pub fn x_min(&self) -> u64 {
        self.x_min
    }

    /// `b(x)` for `x ≥ 1`.
    #[inline]
    pub fn at(&self, x: u64) -> f64 {
        debug_assert!(x >= 1);
        let x = x.max(self.x_min);
        match &self.kind {
            DriftKind::Zero => 0.0,
            DriftKind::Constant { b } => *b,
            DriftKind::Lamperti { c } => c / x as f64,
            DriftKind::LogLamperti { d } => {
                let xf = x as f64;
                d / (xf * xf.ln())
            }
            // values[0] is b(x_min)
            DriftKind::Table { values } => {
                values[(x.min(values.len() as u64 + self.x_min - 1) - self.x_min) as usize]
            }
        }
    }

    /// `ln((1 - b(x)) / (1 + b(x)))`, the log resistor ratio at `x`.
    #[inline]
    pub fn log_ratio(&self, x: u64) -> f64 {
        let b = self.at(x);
        (-b).ln_1p() - b.ln_1p()
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            DriftKind::Zero => true,
            DriftKind::Constant { b } => *b == 0.0,
            DriftKind::Lamperti { c } => *c == 0.0,
            DriftKind::LogLamperti { d } => *d == 0.0,
            DriftKind::Table { values } => values.iter().all(|&b| b == 0.0),
        }
    }
}

fn check(x: i64, b: f64) -> Result<()> {
    if b.is_finite() && b.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::DriftOutOfRange { x, value: b })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lamperti_values_and_clamp() {
        let d = Drift::new(DriftKind::Lamperti { c: 1.0 / 3.0 }, 1).unwrap();
        assert_relative_eq!(d.at(3), 1.0 / 9.0, epsilon = 1e-15);
        let d = Drift::new(DriftKind::Lamperti { c: 1.5 }, 2).unwrap();
        assert_relative_eq!(d.at(1), 0.75);
        assert_relative_eq!(d.at(2), 0.75);
        assert_relative_eq!(d.at(3), 0.5);
    }

    #[test]
    fn lamperti_out_of_range() {
        assert!(matches!(
            Drift::new(DriftKind::Lamperti { c: 1.5 }, 1),
            Err(Error::DriftOutOfRange { .. })
        ));
        assert!(Drift::new(DriftKind::Lamperti { c: -1.0 }, 1).is_err());
    }

    #[test]
    fn log_lamperti_needs_x_min_two() {
        assert!(Drift::new(DriftKind::LogLamperti { d: -1.0 }, 1).is_err());
        let d = Drift::new(DriftKind::LogLamperti { d: -1.0 }, 2).unwrap();
        assert_relative_eq!(d.at(10), -1.0 / (10.0 * 10f64.ln()));
        assert_eq!(d.at(1), d.at(2));
    }

    #[test]
    fn table_repeats_last() {
        let d = Drift::new(DriftKind::Table { values: vec![0.1, -0.2] }, 1).unwrap();
        assert_eq!(d.at(1), 0.1);
        assert_eq!(d.at(2), -0.2);
        assert_eq!(d.at(50), -0.2);
        assert!(Drift::new(DriftKind::Table { values: vec![0.1, 1.0] }, 1).is_err());
    }
}
