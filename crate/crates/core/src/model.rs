//! Model constants: loop weight, Coulomb-gas coupling, central charge,
//! Fermi velocity and bulk energy density at the two critical points.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Dense loops at n = 1 (percolation hulls).
    Dense,
    /// Dilute loops at n = 0 (self-avoiding polymers).
    Dilute,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Dense => "dense",
            ModelKind::Dilute => "dilute",
        }
    }

    /// Name of the statistical problem the point describes.
    pub fn physical_name(self) -> &'static str {
        match self {
            ModelKind::Dense => "percolation",
            ModelKind::Dilute => "polymers",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dense" | "percolation" => Ok(ModelKind::Dense),
            "dilute" | "polymers" => Ok(ModelKind::Dilute),
            other => Err(Error::invalid(format!("unknown model '{other}'"))),
        }
    }
}

/// Fully populated constants for one model at one system size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Loop weight.
    pub n: f64,
    /// Coulomb-gas coupling.
    pub g: f64,
    /// Central charge.
    pub c: f64,
    /// Fermi velocity in lattice units.
    pub v_f: f64,
    /// Ground-state energy per site (sign convention E0 ~ -e_inf L).
    pub e_inf: f64,
    /// Number of sites.
    pub l: usize,
    /// Half the number of sites.
    pub n_half: usize,
}

/// Largest supported chain; patterns are packed five bits per site into a u128.
pub const MAX_SITES: usize = 24;

pub fn make_spec(kind: ModelKind, l: usize) -> Result<ModelSpec> {
    if l < 4 || !l.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "L must be even and at least 4, got {l}"
        )));
    }
    if l > MAX_SITES {
        return Err(Error::invalid(format!(
            "L = {l} exceeds the supported maximum {MAX_SITES}"
        )));
    }
    let spec = match kind {
        ModelKind::Dense => {
            let g = 8.0 / 3.0;
            ModelSpec {
                kind,
                n: 1.0,
                g,
                c: dense_central_charge(g),
                v_f: 3.0 * 3f64.sqrt() / 2.0,
                e_inf: 1.0,
                l,
                n_half: l / 2,
            }
        }
        ModelKind::Dilute => {
            let g = 1.5;
            ModelSpec {
                kind,
                n: 0.0,
                g,
                c: dilute_central_charge(g),
                v_f: 8.0 / 3.0,
                e_inf: 2f64.sqrt(),
                l,
                n_half: l / 2,
            }
        }
    };
    Ok(spec)
}

impl ModelSpec {
    /// Energy scale 2π v_F / L that turns gaps into scaling dimensions.
    pub fn gap_scale(&self) -> f64 {
        2.0 * PI * self.v_f / self.l as f64
    }

    /// Potts Q = n² for the dense model.
    pub fn potts_q(&self) -> f64 {
        2.0 * (1.0 + (PI * self.g / 2.0).cos())
    }
}

pub fn dense_central_charge(g: f64) -> f64 {
    1.0 - 3.0 * (g - 4.0).powi(2) / (2.0 * g)
}

pub fn dilute_central_charge(g: f64) -> f64 {
    1.0 - 6.0 * (g - 1.0).powi(2) / g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_constants() {
        let s = make_spec(ModelKind::Dense, 10).unwrap();
        assert!((s.v_f - 2.598076211).abs() < 1e-9);
        assert_eq!(s.e_inf, 1.0);
        assert!(s.c.abs() < 1e-12);
        assert!((s.potts_q() - s.n * s.n).abs() < 1e-12);
        assert_eq!(s.n_half, 5);
    }

    #[test]
    fn dilute_constants() {
        let s = make_spec(ModelKind::Dilute, 10).unwrap();
        assert!((-2.0 * (PI * s.g).cos() - s.n).abs() < 1e-12);
        assert!(s.c.abs() < 1e-12);
        assert_eq!(s.v_f, 8.0 / 3.0);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(make_spec(ModelKind::Dense, 7).is_err());
        assert!(make_spec(ModelKind::Dense, 2).is_err());
        assert!(make_spec(ModelKind::Dilute, 26).is_err());
    }

    #[test]
    fn parses_names() {
        assert_eq!("percolation".parse::<ModelKind>().unwrap(), ModelKind::Dense);
        assert_eq!("polymers".parse::<ModelKind>().unwrap(), ModelKind::Dilute);
        assert!("ising".parse::<ModelKind>().is_err());
    }
}
