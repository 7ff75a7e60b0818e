//! Long-time susceptible fraction under free spread after the intervention.
//!
//! With `σ ≡ σ0` the quantity `x·exp(-σ0(x+y))` is conserved and `y → 0`,
//! so `x∞` is the root below `1/σ0` of `z·exp(-σ0 z) = x·exp(-σ0(x+y))`.
//! It is solved in log form, `ln z - σ0 z = ln x - σ0(x+y)`, whose left side
//! increases on `(0, 1/σ0)`.

use crate::error::{Error, Result};
use crate::model::{EpidemicState, ModelParams};
use crate::roots::newton_bisect;

const BRACKET_EPS: f64 = 1e-15;

/// Final size `x∞(x, y, σ0)`.
pub fn x_infinity(params: &ModelParams, state: &EpidemicState) -> Result<f64> {
    state.validate()?;
    final_size(params.sigma0, state.x, state.y)
}

/// Final size for raw inputs; `x, y > 0`.
pub fn final_size(sigma0: f64, x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0 && sigma0 > 0.0) {
        return Err(Error::domain("state", format!("final size needs x, y > 0 (x = {x}, y = {y})")));
    }
    let target = x.ln() - sigma0 * (x + y);
    let g = |z: f64| (z.ln() - sigma0 * z - target, 1.0 / z - sigma0);
    let upper = 1.0 / sigma0;
    let mut lo = BRACKET_EPS.min(0.5 * upper);
    if g(lo).0 > 0.0 {
        lo = f64::MIN_POSITIVE;
    }
    let hi = upper * (1.0 - BRACKET_EPS);
    let hi = if g(hi).0 < 0.0 { upper } else { hi };
    newton_bisect(g, lo, hi, 1e-6, 1e-15).ok_or_else(|| {
        Error::Internal(format!("final size root not bracketed for x = {x}, y = {y}, σ0 = {sigma0}"))
    })
}

/// `(∂x∞/∂x, ∂x∞/∂y)` at `state`.
pub fn x_infinity_partials(params: &ModelParams, state: &EpidemicState) -> Result<(f64, f64)> {
    let xi = x_infinity(params, state)?;
    let s0 = params.sigma0;
    let ratio = xi / (1.0 - s0 * xi);
    Ok(((1.0 - s0 * state.x) / state.x * ratio, -s0 * ratio))
}
