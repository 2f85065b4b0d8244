//! The Hopf manifold `(R² − {0})/⟨x ↦ αx⟩` with the map `f = diag(1, λ)`.
//!
//! In the chart given by the fundamental annulus `α < ‖y‖ ≤ 1`, the
//! derivative of `fⁿ` at `x` is represented by `diag(α^{−m}, λⁿα^{−m})`,
//! where `m = m(n, x)` brings `fⁿ(x)` back into the annulus.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfModel {
    alpha: f64,
    lambda: f64,
}

impl HopfModel {
    pub fn new(alpha: f64, lambda: f64) -> Result<Self> {
        if !(0.0 < alpha && alpha < 1.0 && lambda > 1.0 && lambda.is_finite()) {
            return Err(Error::Precondition(format!("need 0 < alpha < 1 < lambda, got {alpha}, {lambda}")));
        }
        Ok(Self { alpha, lambda })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn in_annulus(&self, y: [f64; 2]) -> bool {
        let r = y[0].hypot(y[1]);
        self.alpha < r && r <= 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfStep {
    pub n: i64,
    pub m: i64,
    /// Row-major representative.
    pub rep: [[f64; 2]; 2],
    /// Operator norm of the representative.
    pub norm: f64,
    /// `rep·x`, a point of the annulus.
    pub image: [f64; 2],
}

impl HopfStep {
    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.rep[0][0], self.rep[0][1], self.rep[1][0], self.rep[1][1])
    }
}

/// The return exponent `m(n, x)` and the representative
/// `diag(α^{−m}, λⁿα^{−m})` of `D_x fⁿ`, chosen so that its image of `x`
/// lies in the annulus.
pub fn hopf_return_cocycle(model: &HopfModel, x: [f64; 2], n: i64) -> Result<HopfStep> {
    if x[0] == 0.0 && x[1] == 0.0 {
        return Err(Error::Precondition("x must be nonzero".into()));
    }
    let (alpha, lambda) = (model.alpha, model.lambda);
    let ln_alpha = alpha.ln();
    // ln ‖diag(1, λⁿ)x‖ without overflow
    let ln_y = {
        let u = x[0].abs().ln();
        let w = x[1].abs().ln() + n as f64 * lambda.ln();
        if x[0] == 0.0 {
            w
        } else if x[1] == 0.0 {
            u
        } else {
            let (hi, lo) = if u >= w { (u, w) } else { (w, u) };
            hi + 0.5 * (2.0 * (lo - hi)).exp().ln_1p()
        }
    };
    // α < α^{−m}‖y‖ ≤ 1  ⇔  −m·ln α + ln‖y‖ ∈ (ln α, 0]
    let mut m = (ln_y / ln_alpha).floor() as i64;
    let build = |m: i64| -> HopfStep {
        let s = alpha.powf(-(m as f64));
        let rep = [[s, 0.0], [0.0, lambda.powf(n as f64) * s]];
        let image = [rep[0][0] * x[0], rep[1][1] * x[1]];
        let norm = rep[0][0].abs().max(rep[1][1].abs());
        HopfStep { n, m, rep, norm, image }
    };
    for _ in 0..4 {
        let step = build(m);
        let r = step.image[0].hypot(step.image[1]);
        if r > 1.0 {
            m -= 1;
        } else if r <= alpha {
            m += 1;
        } else {
            return Ok(step);
        }
    }
    Err(Error::Numerical(format!("no return exponent found for n = {n}")))
}

/// Steps `n = 0..=n_max`.
pub fn hopf_trace(model: &HopfModel, x: [f64; 2], n_max: i64) -> Result<Vec<HopfStep>> {
    (0..=n_max).map(|n| hopf_return_cocycle(model, x, n)).collect()
}
