//! Exact output probabilities through the random-field Ising transfer
//! recursion.
//!
//! Summing the hidden spins of the Ising chain one at a time from the right
//! turns the `2^L` configuration sum into a scan over auxiliary fields
//! `w_i = K·y_i + A(w_{i+1})`. The same scan run from the left gives the
//! fields of a left context, and the two meet in the two-sided conditionals.

use crate::error::{Error, Result};
use crate::gibbs;
use crate::model::{ChannelParams, Couplings};
use crate::numeric::{log_2cosh, log_cosh, CompensatedSum};
use crate::spin::{Spin, SpinSequence};

/// Longest word [`brute_force_cylinder`] will enumerate.
pub const MAX_ENUMERATION_LEN: usize = 22;

/// `A(w) = ½·log(cosh(w+J)/cosh(w−J))`; odd, increasing, `|A| < |J|`.
#[inline]
pub fn field_fn_a(w: f64, model: &Couplings) -> f64 {
    0.5 * (log_cosh(w + model.j) - log_cosh(w - model.j))
}

/// `dA/dw = sinh(2J) / (cosh(2J) + cosh(2w))`.
#[inline]
pub fn field_fn_a_derivative(w: f64, model: &Couplings) -> f64 {
    let two_j = 2.0 * model.j;
    two_j.sinh() / (two_j.cosh() + (2.0 * w).cosh())
}

/// `B(w) = ½·log(4·cosh(w+J)·cosh(w−J))`, the per-site log partition term.
#[inline]
pub fn log_partition_b(w: f64, model: &Couplings) -> f64 {
    0.5 * (log_2cosh(w + model.j) + log_2cosh(w - model.j))
}

/// `dB/dw = ½·(tanh(w+J) + tanh(w−J))`.
#[inline]
pub fn log_partition_b_derivative(w: f64, model: &Couplings) -> f64 {
    0.5 * ((w + model.j).tanh() + (w - model.j).tanh())
}

/// Fields attached to the positions of a [`SpinSequence`].
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTrajectory {
    start: i64,
    horizon: i64,
    values: Vec<f64>,
}

impl FieldTrajectory {
    /// First position carrying a field.
    pub fn start(&self) -> i64 {
        self.start
    }

    /// Position of the last observed symbol the fields were computed from.
    pub fn horizon(&self) -> i64 {
        self.horizon
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, i: i64) -> Option<f64> {
        let offset = usize::try_from(i.checked_sub(self.start)?).ok()?;
        self.values.get(offset).copied()
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("trajectories are nonempty")
    }
}

/// Right-to-left scan `w_i = K·y_i + A(w_{i+1})` seeded with `w_{n+1} = tail`.
///
/// `out[i]` holds the field at `y[i]`.
pub fn backward_scan(y: &[Spin], tail: f64, model: &Couplings) -> Vec<f64> {
    let mut out = vec![0.0; y.len()];
    let mut w = tail;
    for (slot, s) in out.iter_mut().zip(y).rev() {
        w = model.k * s.sign() + field_fn_a(w, model);
        *slot = w;
    }
    out
}

/// Left-to-right scan `w_{j+1} = K·y_{j+1} + A(w_j)` seeded with `w_{m−1} = head`.
pub fn forward_scan(y: &[Spin], head: f64, model: &Couplings) -> Vec<f64> {
    let mut w = head;
    y.iter()
        .map(|s| {
            w = model.k * s.sign() + field_fn_a(w, model);
            w
        })
        .collect()
}

/// Fields `w_i^{(n)}` for `i = m..=n`, where `w_n^{(n)} = K·y_n`.
pub fn backward_fields(y: &SpinSequence, model: &Couplings) -> FieldTrajectory {
    FieldTrajectory {
        start: y.start(),
        horizon: y.end(),
        values: backward_scan(y, 0.0, model),
    }
}

/// Fields `w_j^{(−m)}` of a left context, computed from its leftmost symbol.
pub fn forward_fields(y: &SpinSequence, model: &Couplings) -> FieldTrajectory {
    FieldTrajectory {
        start: y.start(),
        horizon: y.start(),
        values: forward_scan(y, 0.0, model),
    }
}

/// Innermost field of a right context (`w_1`), or 0 when it is empty.
pub fn right_context_field(right: &[Spin], model: &Couplings) -> f64 {
    backward_scan(right, 0.0, model).first().copied().unwrap_or(0.0)
}

/// Innermost field of a left context (`w_{−1}`), or 0 when it is empty.
pub fn left_context_field(left: &[Spin], model: &Couplings) -> f64 {
    forward_scan(left, 0.0, model).last().copied().unwrap_or(0.0)
}

/// Cylinder probability by direct enumeration of the hidden configurations.
///
/// Works from `(p, ε)` alone and shares no code with the recursion, so it
/// serves as the reference for [`cylinder_prob`].
pub fn brute_force_cylinder(y: &[Spin], params: &ChannelParams) -> Result<f64> {
    let len = y.len();
    if len == 0 {
        return Err(Error::EmptySequence);
    }
    if len > MAX_ENUMERATION_LEN {
        return Err(Error::TooLong {
            len,
            max: MAX_ENUMERATION_LEN,
        });
    }
    let (p, eps) = (params.p(), params.epsilon());
    // Observed symbol as bit, with bit 1 meaning x_i = +1 below.
    let y_bits: Vec<bool> = y.iter().map(|&s| s == Spin::Plus).collect();
    let mut total = CompensatedSum::new();
    for mask in 0u32..(1u32 << len) {
        let hidden = |i: usize| mask >> i & 1 == 1;
        let mut prob = 0.5;
        for i in 0..len {
            prob *= if hidden(i) == y_bits[i] { 1.0 - eps } else { eps };
            if i + 1 < len {
                prob *= if hidden(i) == hidden(i + 1) { 1.0 - p } else { p };
            }
        }
        total.add(prob);
    }
    Ok(total.value())
}

/// `log Q(y_m^n)`; an empty word has probability one.
pub fn log_cylinder_prob(y: &[Spin], model: &Couplings) -> f64 {
    if y.is_empty() {
        return 0.0;
    }
    let fields = backward_scan(y, 0.0, model);
    let mut sum: CompensatedSum = fields[1..].iter().map(|&w| log_partition_b(w, model)).collect();
    sum.add(log_2cosh(fields[0]));
    sum.add(model.c_j.ln());
    sum.add(-(y.len() as f64) * model.lambda.ln());
    sum.value()
}

/// `Q(y_m^n) = c_J/λ^L · 2·cosh(w_m)·exp(Σ_{i>m} B(w_i))` in `O(L)`.
pub fn cylinder_prob(y: &SpinSequence, model: &Couplings) -> f64 {
    log_cylinder_prob(y, model).exp()
}

/// `Q(y_0 | y_1^n) = cosh(w_0)·exp(B(w_1)) / (λ·cosh(w_1))`.
///
/// An empty future gives the stationary marginal 1/2.
pub fn conditional_prob(y0: Spin, future: &[Spin], model: &Couplings) -> f64 {
    let w1 = right_context_field(future, model);
    let w0 = model.k * y0.sign() + field_fn_a(w1, model);
    (log_cosh(w0) + log_partition_b(w1, model) - log_cosh(w1) - model.lambda.ln()).exp()
}

/// `Q(y_0 | y_{−m}^{−1}, y_1^n)` for finite contexts; either side may be empty.
///
/// Both contexts reduce to the single field `a = A(w_{−1}) + A(w_1)` and the
/// conditional is `cosh(K·y_0 + a) / (cosh(K·y_0 + a) + cosh(−K·y_0 + a))`.
pub fn two_sided_conditional(y0: Spin, left: &[Spin], right: &[Spin], model: &Couplings) -> f64 {
    let a = field_fn_a(left_context_field(left, model), model)
        + field_fn_a(right_context_field(right, model), model);
    two_sided_from_field(y0, a, model)
}

/// Two-sided conditional given the combined context field `a`.
#[inline]
pub fn two_sided_from_field(y0: Spin, a: f64, model: &Couplings) -> f64 {
    // cosh(x+a) / (cosh(x+a) + cosh(x−a)) = ½·(1 + tanh(x)·tanh(a)), tanh(K) = 1−2ε
    0.5 * (1.0 + model.channel_correlation() * y0.sign() * a.tanh())
}

/// Infinite-context limit of [`two_sided_conditional`].
///
/// Each context is extended past its far end by repeating its outermost
/// symbol; the decay certificate guarantees every continuation of the given
/// symbols lands within `tol`. Fails with `InsufficientContext` otherwise.
pub fn two_sided_limit_conditional(
    y0: Spin,
    left: &[Spin],
    right: &[Spin],
    tol: f64,
    model: &Couplings,
) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if model.k == 0.0 {
        return Ok(0.5);
    }
    // The conditional moves by at most half the change in a, and |A'| ≤ 1.
    let side_tol = tol;
    let right_field = gibbs::limit_field(right, side_tol, model)?;
    let mut mirrored = left.to_vec();
    mirrored.reverse();
    let left_field = gibbs::limit_field(&mirrored, side_tol, model)?;
    let a = field_fn_a(left_field, model) + field_fn_a(right_field, model);
    Ok(two_sided_from_field(y0, a, model))
}
