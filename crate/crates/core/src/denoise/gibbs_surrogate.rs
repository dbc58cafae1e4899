use crate::error::{Error, Result};
use crate::model::validate_params;
use crate::spin::{Spin, SpinSequence};

use super::{forward_backward, map_denoise};

/// Lower clamp of the moment estimate of `p`.
pub const P_HAT_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsOutput {
    pub denoised: SpinSequence,
    pub p_hat: f64,
}

/// `p̂ = (1 − r̂/(1−2ε)²)/2` clamped to `[P_HAT_FLOOR, ½]`, where `r̂` is the
/// empirical lag-one correlation of `y`.
pub fn estimate_p_moment(y: &[Spin], epsilon: f64) -> Result<f64> {
    if y.len() < 2 {
        return Err(Error::SequenceTooShort { len: y.len(), min: 2 });
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::OutOfRange { name: "epsilon", value: epsilon });
    }
    let gain = (1.0 - 2.0 * epsilon).powi(2);
    if gain == 0.0 {
        return Err(Error::SingularChannel);
    }
    let agree = y.windows(2).filter(|w| w[0] == w[1]).count() as f64;
    let pairs = (y.len() - 1) as f64;
    let r_hat = (2.0 * agree - pairs) / pairs;
    Ok((0.5 * (1.0 - r_hat / gain)).clamp(P_HAT_FLOOR, 0.5))
}

/// MAP decoding of forward-backward posteriors at `(p̂, ε)`.
pub fn gibbs_denoise(y: &[Spin], epsilon: f64) -> Result<GibbsOutput> {
    let p_hat = estimate_p_moment(y, epsilon)?;
    let params = validate_params(p_hat, epsilon)?;
    let denoised = map_denoise(&forward_backward(y, &params)?);
    Ok(GibbsOutput { denoised, p_hat })
}
