//! Channel parameters and the Ising couplings derived from them.
//!
//! A symmetric Markov source with flip probability `p` observed through a
//! binary symmetric channel with crossover probability `epsilon` maps onto a
//! one-dimensional Ising chain with nearest-neighbour coupling `J` and a
//! random external field of strength `K`. Every other module reads its
//! constants from [`Couplings`].

use crate::error::{Error, Result};

/// Validated `(p, epsilon)` pair, both strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    p: f64,
    epsilon: f64,
}

impl ChannelParams {
    pub fn new(p: f64, epsilon: f64) -> Result<Self> {
        validate_params(p, epsilon)
    }

    /// Flip probability of the hidden Markov source.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Crossover probability of the channel.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Whether the emission matrix can be inverted (`epsilon != 1/2`).
    pub fn channel_invertible(&self) -> bool {
        self.epsilon != 0.5
    }

    pub fn couplings(&self) -> Couplings {
        derive_couplings(*self)
    }
}

fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NonFinite { name, value });
    }
    if value <= 0.0 || value >= 1.0 {
        return Err(Error::OutOfRange { name, value });
    }
    Ok(())
}

/// Checks `0 < p < 1` and `0 < epsilon < 1`. Nothing is clamped.
pub fn validate_params(p: f64, epsilon: f64) -> Result<ChannelParams> {
    check_probability("p", p)?;
    check_probability("epsilon", epsilon)?;
    Ok(ChannelParams { p, epsilon })
}

/// Ising constants of the model, together with the parameters they came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couplings {
    params: ChannelParams,
    /// Source coupling `½·log((1−p)/p)`.
    pub j: f64,
    /// Field coupling `½·log((1−ε)/ε)`.
    pub k: f64,
    /// Prefactor `cosh(J)`.
    pub c_j: f64,
    /// Per-symbol normaliser `4·cosh(J)·cosh(K)`.
    pub lambda: f64,
    /// `(1−p)² + p²`.
    pub alpha: f64,
}

pub fn derive_couplings(params: ChannelParams) -> Couplings {
    let ChannelParams { p, epsilon } = params;
    // ln_1p keeps J and K exactly zero at the symmetric point.
    let j = 0.5 * ((1.0 - 2.0 * p) / p).ln_1p();
    let k = 0.5 * ((1.0 - 2.0 * epsilon) / epsilon).ln_1p();
    let c_j = j.cosh();
    Couplings {
        params,
        j,
        k,
        c_j,
        lambda: 4.0 * c_j * k.cosh(),
        alpha: (1.0 - p) * (1.0 - p) + p * p,
    }
}

impl Couplings {
    pub fn params(&self) -> ChannelParams {
        self.params
    }

    pub fn p(&self) -> f64 {
        self.params.p
    }

    pub fn epsilon(&self) -> f64 {
        self.params.epsilon
    }

    /// `|K| + |J|`, the radius of the interval every field stays in.
    pub fn field_radius(&self) -> f64 {
        self.k.abs() + self.j.abs()
    }

    /// `tanh(J) = 1 − 2p`.
    pub fn source_correlation(&self) -> f64 {
        1.0 - 2.0 * self.params.p
    }

    /// `tanh(K) = 1 − 2ε`.
    pub fn channel_correlation(&self) -> f64 {
        1.0 - 2.0 * self.params.epsilon
    }
}
