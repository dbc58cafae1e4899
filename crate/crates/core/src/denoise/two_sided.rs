use crate::error::{Error, Result};
use crate::model::ChannelParams;
use crate::spin::Spin;

/// Entries of `Π⁻¹q` below `−NEGATIVE_TOLERANCE` are counted as clamped.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;

/// Row-stochastic `Π[x][y] = P(Y = y | X = x)` of the binary symmetric channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionMatrix {
    epsilon: f64,
}

impl EmissionMatrix {
    pub fn new(epsilon: f64) -> Self {
        Self { epsilon }
    }

    pub fn from_params(params: &ChannelParams) -> Self {
        Self::new(params.epsilon())
    }

    pub fn entry(&self, x: Spin, y: Spin) -> f64 {
        if x == y {
            1.0 - self.epsilon
        } else {
            self.epsilon
        }
    }

    /// Column `π_y`, indexed by the hidden state in `(−1, +1)` order.
    #[inline]
    pub fn column(&self, y: Spin) -> [f64; 2] {
        match y {
            Spin::Minus => [1.0 - self.epsilon, self.epsilon],
            Spin::Plus => [self.epsilon, 1.0 - self.epsilon],
        }
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        let e = self.epsilon;
        [[1.0 - e, e], [e, 1.0 - e]]
    }

    /// `Π⁻¹ = 1/(1−2ε)·[[1−ε, −ε], [−ε, 1−ε]]`.
    pub fn inverse(&self) -> Result<[[f64; 2]; 2]> {
        let e = self.epsilon;
        let det = 1.0 - 2.0 * e;
        if det == 0.0 {
            return Err(Error::SingularChannel);
        }
        Ok([[(1.0 - e) / det, -e / det], [-e / det, (1.0 - e) / det]])
    }

    pub fn apply_inverse(&self, q: [f64; 2]) -> Result<[f64; 2]> {
        let inv = self.inverse()?;
        Ok([
            inv[0][0] * q[0] + inv[0][1] * q[1],
            inv[1][0] * q[0] + inv[1][1] * q[1],
        ])
    }
}

/// Distribution of the hidden symbol recovered from a two-sided output
/// conditional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSidedPosterior {
    /// `(P[X = −1], P[X = +1])`.
    pub dist: [f64; 2],
    /// Whether `Π⁻¹q` had an entry below `−NEGATIVE_TOLERANCE` that was set to 0.
    pub clamped: bool,
}

/// `π_{y_n} ⊙ Π⁻¹ q₂`, normalised, where `q₂ = (Q(Y_n = −1 | rest), Q(Y_n = +1 | rest))`.
///
/// Negative entries of `Π⁻¹q₂` (possible when `q₂` is estimated) are set to
/// zero before normalising.
pub fn posterior_from_two_sided(q2: [f64; 2], y_n: Spin, params: &ChannelParams) -> Result<TwoSidedPosterior> {
    EmissionMatrix::from_params(params).posterior(q2, y_n)
}

impl EmissionMatrix {
    /// [`posterior_from_two_sided`] for this channel.
    pub fn posterior(&self, q2: [f64; 2], y_n: Spin) -> Result<TwoSidedPosterior> {
        if !(q2[0] >= 0.0 && q2[1] >= 0.0) || (q2[0] + q2[1] - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("{q2:?} is not a distribution")));
        }
        let mut v = self.apply_inverse(q2)?;
        let mut clamped = false;
        for entry in v.iter_mut() {
            if *entry < 0.0 {
                clamped |= *entry < -NEGATIVE_TOLERANCE;
                *entry = 0.0;
            }
        }
        let pi = self.column(y_n);
        let raw = [pi[0] * v[0], pi[1] * v[1]];
        let total = raw[0] + raw[1];
        Ok(TwoSidedPosterior {
            dist: [raw[0] / total, raw[1] / total],
            clamped,
        })
    }
}
