//! Boundary conditions on one boundary component.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// `∂u/∂ν + h u = 0` on one boundary component, with `h = 0` (Neumann) and
/// `h = +∞` (Dirichlet) as the two limiting cases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryCondition {
    Neumann,
    Robin(f64),
    Dirichlet,
}

impl BoundaryCondition {
    /// Robin condition with validation of `h`. `h = +∞` maps to Dirichlet and
    /// `h = 0` to Neumann.
    pub fn robin(h: f64) -> Result<Self> {
        if h.is_nan() || h < 0.0 {
            return Err(Error::InvalidInput(format!("Robin parameter must be >= 0, got {h}")));
        }
        Ok(if h == 0.0 {
            BoundaryCondition::Neumann
        } else if h.is_infinite() {
            BoundaryCondition::Dirichlet
        } else {
            BoundaryCondition::Robin(h)
        })
    }

    pub fn validate(&self) -> Result<()> {
        if let BoundaryCondition::Robin(h) = *self {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::InvalidInput(format!("Robin parameter must be finite and > 0, got {h}")));
            }
        }
        Ok(())
    }

    /// The Robin coefficient, `0` for Neumann and `+∞` for Dirichlet.
    pub fn h(&self) -> f64 {
        match *self {
            BoundaryCondition::Neumann => 0.0,
            BoundaryCondition::Robin(h) => h,
            BoundaryCondition::Dirichlet => f64::INFINITY,
        }
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self, BoundaryCondition::Dirichlet)
    }

    pub fn is_neumann(&self) -> bool {
        matches!(self, BoundaryCondition::Neumann)
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryCondition::Neumann => write!(f, "neumann"),
            BoundaryCondition::Robin(h) => write!(f, "robin:{h}"),
            BoundaryCondition::Dirichlet => write!(f, "dirichlet"),
        }
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "neumann" | "n" => Ok(BoundaryCondition::Neumann),
            "dirichlet" | "d" => Ok(BoundaryCondition::Dirichlet),
            _ => {
                let rest = s
                    .strip_prefix("robin:")
                    .ok_or_else(|| Error::InvalidInput(format!("unknown boundary condition '{s}'")))?;
                let h = match rest {
                    "inf" | "infinity" => f64::INFINITY,
                    _ => {
                        rest.parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad Robin parameter '{rest}'")))?
                    }
                };
                BoundaryCondition::robin(h)
            }
        }
    }
}

impl Serialize for BoundaryCondition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BoundaryCondition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
