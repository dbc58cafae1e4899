//! Denoisers for the observed process and their zero-one loss.
//!
//! * [`forward_backward`]: exact posterior marginals for known `(p, ε)`.
//! * [`dude`]: two-sided context counts mapped through the inverted channel.
//! * [`bfp_denoise`]: product of the two one-sided conditionals.
//! * [`gibbs_denoise`]: forward-backward run with a moment estimate of `p`.

mod bfp;
mod dude;
mod forward_backward;
mod gibbs_surrogate;
mod two_sided;

pub use bfp::{bfp_conditional, bfp_denoise, BfpMode, BfpOutput};
pub use dude::{default_context_length, dude, ContextCounts, DudeOutput, MAX_CONTEXT_LENGTH};
pub use forward_backward::forward_backward;
pub use gibbs_surrogate::{estimate_p_moment, gibbs_denoise, GibbsOutput, P_HAT_FLOOR};
pub use two_sided::{posterior_from_two_sided, EmissionMatrix, TwoSidedPosterior, NEGATIVE_TOLERANCE};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::{Spin, SpinSequence};

/// Per-position `(P[X = −1 | …], P[X = +1 | …])`.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMarginals {
    probs: Vec<[f64; 2]>,
}

impl PosteriorMarginals {
    /// Normalises each pair; rejects negative or all-zero entries.
    pub fn from_unnormalized(pairs: Vec<[f64; 2]>) -> Result<Self> {
        let mut probs = pairs;
        for pair in probs.iter_mut() {
            let total = pair[0] + pair[1];
            if !(pair[0] >= 0.0 && pair[1] >= 0.0 && total > 0.0 && total.is_finite()) {
                return Err(Error::InvalidArgument(format!("invalid posterior pair {pair:?}")));
            }
            pair[0] /= total;
            pair[1] /= total;
        }
        Ok(Self { probs })
    }

    pub(crate) fn from_normalized(probs: Vec<[f64; 2]>) -> Self {
        Self { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// `(q_minus, q_plus)` at position `i`.
    pub fn get(&self, i: usize) -> (f64, f64) {
        let [m, p] = self.probs[i];
        (m, p)
    }

    pub fn prob(&self, i: usize, x: Spin) -> f64 {
        self.probs[i][x.index()]
    }

    pub fn pairs(&self) -> &[[f64; 2]] {
        &self.probs
    }
}

/// Per-position argmax; an exact tie goes to `+1`.
pub fn map_denoise(post: &PosteriorMarginals) -> SpinSequence {
    let symbols = post
        .pairs()
        .iter()
        .map(|&[m, p]| if m > p { Spin::Minus } else { Spin::Plus })
        .collect();
    SpinSequence::from_spins(symbols).expect("posteriors are nonempty")
}

/// Fraction of positions where `xhat` and `x` differ.
pub fn bit_error_rate(xhat: &[Spin], x: &[Spin]) -> Result<f64> {
    if xhat.len() != x.len() {
        return Err(Error::LengthMismatch {
            left: xhat.len(),
            right: x.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::EmptySequence);
    }
    let errors = xhat.iter().zip(x).filter(|(a, b)| a != b).count();
    Ok(errors as f64 / x.len() as f64)
}

/// One denoising run scored against the hidden chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerReport {
    pub schema_version: u32,
    pub algorithm: String,
    pub p: f64,
    pub epsilon: f64,
    pub n: usize,
    pub seed: u64,
    #[serde(default)]
    pub ber: Option<f64>,
    pub runtime_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub clamped: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub generator: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_tie_break_and_order() {
        let post = PosteriorMarginals::from_unnormalized(vec![[0.9, 0.1], [0.5, 0.5], [0.2, 0.8]]).unwrap();
        assert_eq!(map_denoise(&post).to_string(), "-++");
        let ties = PosteriorMarginals::from_unnormalized(vec![[1.0, 1.0]; 4]).unwrap();
        assert_eq!(map_denoise(&ties).to_string(), "++++");
    }

    #[test]
    fn map_is_scale_invariant() {
        let raw = vec![[0.3, 0.7], [0.6, 0.4], [0.45, 0.55]];
        let scaled: Vec<[f64; 2]> = raw.iter().map(|&[a, b]| [a * 17.0, b * 17.0]).collect();
        assert_eq!(
            map_denoise(&PosteriorMarginals::from_unnormalized(raw).unwrap()),
            map_denoise(&PosteriorMarginals::from_unnormalized(scaled).unwrap())
        );
    }

    #[test]
    fn posterior_validation() {
        assert!(PosteriorMarginals::from_unnormalized(vec![[0.0, 0.0]]).is_err());
        assert!(PosteriorMarginals::from_unnormalized(vec![[-0.1, 1.1]]).is_err());
        let p = PosteriorMarginals::from_unnormalized(vec![[1.0, 3.0]]).unwrap();
        assert_eq!(p.get(0), (0.25, 0.75));
    }

    #[test]
    fn ber_values() {
        let x: SpinSequence = "++-+-+".parse().unwrap();
        let comp: SpinSequence = "--+-+-".parse().unwrap();
        let half: SpinSequence = "---+-+".parse().unwrap();
        assert_eq!(bit_error_rate(&x, &x).unwrap(), 0.0);
        assert_eq!(bit_error_rate(&comp, &x).unwrap(), 1.0);
        assert!((bit_error_rate(&half, &x).unwrap() - 2.0 / 6.0).abs() < 1e-15);
        let half2: SpinSequence = "--+-+-+-++".parse().unwrap();
        let ones = SpinSequence::constant(Spin::Plus, 10).unwrap();
        assert_eq!(bit_error_rate(&half2, &ones).unwrap(), 0.5);
        assert!(matches!(bit_error_rate(&x[..3], &x), Err(Error::LengthMismatch { .. })));
    }
}
