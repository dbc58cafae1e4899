use crate::error::{Error, Result};
use crate::model::ChannelParams;
use crate::numeric::log_cosh;
use crate::spin::{Spin, SpinSequence};
use crate::transfer::{backward_scan, field_fn_a, forward_scan, left_context_field, right_context_field};
use crate::model::Couplings;

use super::{map_denoise, EmissionMatrix, PosteriorMarginals};

/// Source of the one-sided output conditionals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfpMode {
    /// Transfer-operator conditionals over the full observed past and future.
    Exact,
    /// Empirical conditionals given `k` symbols on one side.
    Empirical(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BfpOutput {
    pub denoised: SpinSequence,
    pub posteriors: PosteriorMarginals,
    pub clamped: usize,
}

/// `Q(y₀ | left)·Q(y₀ | right)`, normalised over `y₀`, for finite contexts.
pub fn bfp_conditional(y0: Spin, left: &[Spin], right: &[Spin], model: &Couplings) -> f64 {
    let a_left = field_fn_a(left_context_field(left, model), model);
    let a_right = field_fn_a(right_context_field(right, model), model);
    product_from_fields(a_left, a_right, model)[y0.index()]
}

/// One-sided conditionals are `∝ cosh(K·y₀ + A(w))`; their product is normalised here.
fn product_from_fields(a_left: f64, a_right: f64, model: &Couplings) -> [f64; 2] {
    let log_weight = |s: Spin| {
        let x = model.k * s.sign();
        log_cosh(x + a_left) + log_cosh(x + a_right)
    };
    let (lm, lp) = (log_weight(Spin::Minus), log_weight(Spin::Plus));
    // 1 / (1 + e^{lm − lp}) for the plus entry.
    let plus = 1.0 / (1.0 + (lm - lp).exp());
    [1.0 - plus, plus]
}

fn normalize_or_uniform(c: [u64; 2]) -> [f64; 2] {
    let total = c[0] + c[1];
    if total == 0 {
        [0.5, 0.5]
    } else {
        [c[0] as f64 / total as f64, c[1] as f64 / total as f64]
    }
}

fn one_sided_key(symbols: &[Spin]) -> usize {
    symbols.iter().fold(0usize, |acc, s| acc << 1 | usize::from(s.bit()))
}

/// Denoises with the product of the two one-sided output conditionals,
/// mapped through the inverted channel.
///
/// Positions without a full context on both sides (the first and last
/// symbol in exact mode, `k` symbols at each end otherwise) are passed
/// through, with the channel-only posterior reported for them.
pub fn bfp_denoise(y: &[Spin], params: &ChannelParams, mode: BfpMode) -> Result<BfpOutput> {
    let emission = EmissionMatrix::from_params(params);
    emission.inverse()?;
    let n = y.len();
    let margin = match mode {
        BfpMode::Exact => 1,
        BfpMode::Empirical(k) => {
            if k == 0 || k > 24 {
                return Err(Error::InvalidArgument(format!("context length must be in 1..=24, got {k}")));
            }
            k
        }
    };
    if n <= 2 * margin {
        return Err(Error::SequenceTooShort { len: n, min: 2 * margin + 1 });
    }

    let q2: Box<dyn Fn(usize) -> [f64; 2]> = match mode {
        BfpMode::Exact => {
            let model = params.couplings();
            let from_left: Vec<f64> = forward_scan(y, 0.0, &model).iter().map(|&w| field_fn_a(w, &model)).collect();
            let from_right: Vec<f64> = backward_scan(y, 0.0, &model).iter().map(|&w| field_fn_a(w, &model)).collect();
            Box::new(move |i| product_from_fields(from_left[i - 1], from_right[i + 1], &model))
        }
        BfpMode::Empirical(k) => {
            let mut left_counts = vec![[0u64; 2]; 1 << k];
            let mut right_counts = vec![[0u64; 2]; 1 << k];
            for i in k..n {
                left_counts[one_sided_key(&y[i - k..i])][y[i].index()] += 1;
            }
            for i in 0..n - k {
                right_counts[one_sided_key(&y[i + 1..=i + k])][y[i].index()] += 1;
            }
            Box::new(move |i| {
                let l = normalize_or_uniform(left_counts[one_sided_key(&y[i - k..i])]);
                let r = normalize_or_uniform(right_counts[one_sided_key(&y[i + 1..=i + k])]);
                let (m, p) = (l[0] * r[0], l[1] * r[1]);
                if m + p == 0.0 {
                    [0.5, 0.5]
                } else {
                    [m / (m + p), p / (m + p)]
                }
            })
        }
    };

    let mut clamped = 0;
    let mut post = Vec::with_capacity(n);
    for i in 0..n {
        if i < margin || i >= n - margin {
            post.push(emission.column(y[i]));
            continue;
        }
        let p = emission.posterior(q2(i), y[i])?;
        clamped += usize::from(p.clamped);
        post.push(p.dist);
    }
    let posteriors = PosteriorMarginals::from_normalized(post);
    let mut denoised = map_denoise(&posteriors).into_symbols();
    for i in (0..margin).chain(n - margin..n) {
        denoised[i] = y[i];
    }
    Ok(BfpOutput {
        denoised: SpinSequence::from_spins(denoised)?,
        posteriors,
        clamped,
    })
}
