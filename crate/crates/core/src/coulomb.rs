//! Coulomb-gas side: Kac weights, the coupling g of each loop model, the
//! weights of the X field and the limits giving b.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelKind;

/// Coarse and fine steps of the one-sided limits.
pub const LIMIT_STEPS: (f64, f64) = (1e-4, 1e-5);
/// Required agreement of the two one-sided limits.
pub const SIDE_AGREEMENT: f64 = 1e-6;

/// h_{r,s} = ([r(x+1) - s x]² - 1) / (4x(x+1)); real labels allowed.
pub fn kac_h(x: f64, r: f64, s: f64) -> f64 {
    let a = r * (x + 1.0) - s * x;
    (a * a - 1.0) / (4.0 * x * (x + 1.0))
}

/// c = 1 - 6/(x(x+1)).
pub fn kac_c(x: f64) -> f64 {
    1.0 - 6.0 / (x * (x + 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KacParams {
    pub x: f64,
    pub c: f64,
}

impl KacParams {
    pub fn new(x: f64) -> Result<Self> {
        if !(x > 0.0) {
            return Err(Error::invalid(format!("Kac parameter x = {x} must be positive")));
        }
        Ok(KacParams { x, c: kac_c(x) })
    }

    pub fn h(&self, r: f64, s: f64) -> f64 {
        kac_h(self.x, r, s)
    }
}

/// Coupling, central charge and control parameter (Q for dense, n for dilute).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CgParams {
    pub kind: ModelKind,
    pub g: f64,
    pub c: f64,
    pub control: f64,
}

/// Branch of g for each model.
pub fn g_range(kind: ModelKind) -> (f64, f64) {
    match kind {
        ModelKind::Dense => (2.0, 4.0),
        ModelKind::Dilute => (1.0, 2.0),
    }
}

pub fn central_charge(kind: ModelKind, g: f64) -> f64 {
    match kind {
        ModelKind::Dense => 1.0 - 3.0 * (g - 4.0).powi(2) / (2.0 * g),
        ModelKind::Dilute => 1.0 - 6.0 * (g - 1.0).powi(2) / g,
    }
}

/// Q(g) = 2(1 + cos πg/2) for dense, n(g) = -2 cos πg for dilute.
pub fn control_of_g(kind: ModelKind, g: f64) -> f64 {
    match kind {
        ModelKind::Dense => 2.0 * (1.0 + (PI * g / 2.0).cos()),
        ModelKind::Dilute => -2.0 * (PI * g).cos(),
    }
}

/// Solves for g on the model's branch.
pub fn cg_params(kind: ModelKind, control: f64) -> Result<CgParams> {
    let g = match kind {
        ModelKind::Dense => {
            if !(control > 0.0 && control <= 4.0) {
                return Err(Error::invalid(format!("Q = {control} outside (0, 4]")));
            }
            4.0 - 2.0 / PI * (control / 2.0 - 1.0).clamp(-1.0, 1.0).acos()
        }
        ModelKind::Dilute => {
            if !(-2.0..=2.0).contains(&control) {
                return Err(Error::invalid(format!("n = {control} outside [-2, 2]")));
            }
            2.0 - (-control / 2.0).clamp(-1.0, 1.0).acos() / PI
        }
    };
    Ok(CgParams {
        kind,
        g,
        c: central_charge(kind, g),
        control,
    })
}

/// Weights (h, h̄) of the X field at coupling g.
pub fn x_field_weights(kind: ModelKind, g: f64) -> (f64, f64) {
    let shift = (central_charge(kind, g) - 1.0) / 24.0;
    ((2.0 + g).powi(2) / (4.0 * g) + shift, (2.0 - g).powi(2) / (4.0 * g) + shift)
}

/// The c = 0 point of each model.
pub fn physical_g(kind: ModelKind) -> f64 {
    match kind {
        ModelKind::Dense => 8.0 / 3.0,
        ModelKind::Dilute => 1.5,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Below,
    Above,
}

/// lim f(x0 ± ε) from steps (ε, ε/10) with linear Richardson extrapolation.
pub fn one_sided_limit(f: impl Fn(f64) -> f64, x0: f64, side: Side, steps: (f64, f64)) -> f64 {
    let sign = match side {
        Side::Below => -1.0,
        Side::Above => 1.0,
    };
    let (e1, e2) = steps;
    let (f1, f2) = (f(x0 + sign * e1), f(x0 + sign * e2));
    let r = e1 / e2;
    (r * f2 - f1) / (r - 1.0)
}

/// The two one-sided limits; an error when they disagree beyond `SIDE_AGREEMENT`.
pub fn two_sided_limit(f: impl Fn(f64) -> f64, x0: f64, steps: (f64, f64)) -> Result<f64> {
    let below = one_sided_limit(&f, x0, Side::Below, steps);
    let above = one_sided_limit(&f, x0, Side::Above, steps);
    if !(below.is_finite() && above.is_finite()) || (below - above).abs() > SIDE_AGREEMENT {
        return Err(Error::Numerical(format!(
            "one-sided limits disagree at {x0}: {below} vs {above}"
        )));
    }
    Ok(0.5 * (below + above))
}

/// Bulk b = -lim (c/2) / h̄_X as g → g0.
pub fn b_from_collision(kind: ModelKind, g0: f64) -> Result<f64> {
    b_from_collision_with(kind, g0, LIMIT_STEPS)
}

pub fn b_from_collision_with(kind: ModelKind, g0: f64, steps: (f64, f64)) -> Result<f64> {
    let (lo, hi) = g_range(kind);
    if !(g0 > lo && g0 < hi) {
        return Err(Error::invalid(format!("g0 = {g0} outside ({lo}, {hi})")));
    }
    if central_charge(kind, g0).abs() > 1e-12 {
        return Err(Error::invalid(format!("c({g0}) = {} is not zero", central_charge(kind, g0))));
    }
    two_sided_limit(
        |g| {
            let c = central_charge(kind, g);
            -(c / 2.0) / x_field_weights(kind, g).1
        },
        g0,
        steps,
    )
}

/// Chiral Kac labels of the field colliding with T: (1,5) for percolation,
/// (3,1) for polymers.
pub fn chiral_labels(kind: ModelKind) -> (f64, f64) {
    match kind {
        ModelKind::Dense => (1.0, 5.0),
        ModelKind::Dilute => (3.0, 1.0),
    }
}

/// Chiral b = -lim (c/2)/(h_X - 2) as x → 2.
pub fn chiral_b(kind: ModelKind) -> Result<f64> {
    let (r, s) = chiral_labels(kind);
    two_sided_limit(|x| -(kac_c(x) / 2.0) / (kac_h(x, r, s) - 2.0), 2.0, LIMIT_STEPS)
}

/// b_bulk from 2/b_bulk = 1/b_perco + 1/b_poly.
pub fn harmonic_bulk(b_perco: f64, b_poly: f64) -> f64 {
    2.0 / (1.0 / b_perco + 1.0 / b_poly)
}

/// All analytic values at once, for reports.
#[derive(Clone, Debug, Serialize)]
pub struct Predictions {
    pub b_bulk_dense: f64,
    pub b_bulk_dilute: f64,
    pub b_chiral_percolation: f64,
    pub b_chiral_polymers: f64,
    pub b_harmonic: f64,
    pub x_weights_dense: (f64, f64),
    pub x_weights_dilute: (f64, f64),
}

pub fn predictions() -> Result<Predictions> {
    let p = chiral_b(ModelKind::Dense)?;
    let q = chiral_b(ModelKind::Dilute)?;
    Ok(Predictions {
        b_bulk_dense: b_from_collision(ModelKind::Dense, physical_g(ModelKind::Dense))?,
        b_bulk_dilute: b_from_collision(ModelKind::Dilute, physical_g(ModelKind::Dilute))?,
        b_chiral_percolation: p,
        b_chiral_polymers: q,
        b_harmonic: harmonic_bulk(p, q),
        x_weights_dense: x_field_weights(ModelKind::Dense, physical_g(ModelKind::Dense)),
        x_weights_dilute: x_field_weights(ModelKind::Dilute, physical_g(ModelKind::Dilute)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kac_values() {
        assert!((kac_h(2.0, 2.0, 1.0) - 5.0 / 8.0).abs() < 1e-15);
        assert!((kac_h(2.0, 1.0, 3.0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(kac_h(2.0, 1.0, 2.0), 0.0);
        assert_eq!(kac_c(2.0), 0.0);
    }

    #[test]
    fn branches() {
        let d = cg_params(ModelKind::Dense, 1.0).unwrap();
        assert!((d.g - 8.0 / 3.0).abs() < 1e-12 && d.c.abs() < 1e-12);
        let p = cg_params(ModelKind::Dilute, 0.0).unwrap();
        assert!((p.g - 1.5).abs() < 1e-12 && p.c.abs() < 1e-12);
        assert!(cg_params(ModelKind::Dense, 0.0).is_err());
        assert!(cg_params(ModelKind::Dilute, 2.5).is_err());
    }
}
