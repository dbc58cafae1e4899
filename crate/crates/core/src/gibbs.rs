//! Thermodynamic description of the output process: the g-function, its
//! Gibbs potential, the pressure, contraction rates of the field recursion
//! and the constants of the Bowen-Gibbs comparison.
//!
//! Functions on one-sided infinite sequences take a finite prefix. The prefix
//! is continued by repeating its last symbol, which makes the continuation's
//! fields computable in closed form (a fixed point of `w ↦ ±K + A(w)`), and
//! the decay certificate bounds how far any other continuation could move the
//! result.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::model::{ChannelParams, Couplings};
use crate::numeric::{log_2cosh, log_cosh, maximize_on_interval, CompensatedSum};
use crate::spin::Spin;
use crate::transfer::{
    backward_scan, field_fn_a, field_fn_a_derivative, log_partition_b, log_partition_b_derivative,
    log_cylinder_prob,
};

/// Grid size of the scan preceding golden-section refinement.
pub const SUPREMUM_GRID_POINTS: usize = 10_001;
/// Refinement tolerance for numerical suprema.
pub const SUPREMUM_XTOL: f64 = 1e-12;
/// Continued-fraction denominators below this magnitude are reported.
pub const CF_DENOMINATOR_FLOOR: f64 = 1e-13;

/// Which estimate produced a [`DecayBound`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecayRegime {
    /// `|dA/dw| ≤ |1−2p|` everywhere.
    Naive,
    /// Fields avoid a neighbourhood of 0 when `|K| > |J|` (ε < p for p, ε ≤ ½).
    EpsLtP,
    /// Contraction of the twice-iterated field map.
    SecondIterate,
}

impl DecayRegime {
    pub fn as_str(self) -> &'static str {
        match self {
            DecayRegime::Naive => "naive",
            DecayRegime::EpsLtP => "eps_lt_p",
            DecayRegime::SecondIterate => "second_iterate",
        }
    }
}

impl fmt::Display for DecayRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Exponential contraction certificate `|w_i^{(n)} − w_i| ≤ C·ρ^{n−i}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayBound {
    pub rho: f64,
    pub regime: DecayRegime,
    /// `C = C₁/(1−ρ)` with `C₁ = |K| + |J|`.
    pub c: f64,
    pub c1: f64,
}

impl DecayBound {
    /// Bound on the field error at position 0 when symbols up to `n` are known.
    pub fn tail_bound(&self, n: usize) -> f64 {
        self.c * pow_usize(self.rho, n)
    }

    /// Hölder exponent `θ = −log₂ ρ` of the limit fields in the `2^{−k}` metric.
    pub fn holder_exponent(&self) -> f64 {
        -self.rho.log2()
    }

    /// The ε-independent rate `|1−2p|`.
    pub fn naive_rate(params: &ChannelParams) -> f64 {
        (1.0 - 2.0 * params.p()).abs()
    }
}

fn pow_usize(x: f64, n: usize) -> f64 {
    if n > i32::MAX as usize {
        if x < 1.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        x.powi(n as i32)
    }
}

/// Pressure and the two-sided constants of the Bowen-Gibbs comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsCertificate {
    pub pressure: f64,
    pub c_lower: f64,
    pub c_upper: f64,
}

impl GibbsCertificate {
    pub fn contains(&self, ratio: f64) -> bool {
        self.c_lower <= ratio && ratio <= self.c_upper
    }
}

/// `|A'(K + A(w))·A'(w)|`, the derivative of the twice-iterated field map.
pub fn second_iterate_product(w: f64, model: &Couplings) -> f64 {
    let inner = model.k.abs() + field_fn_a(w, model);
    (field_fn_a_derivative(inner, model) * field_fn_a_derivative(w, model)).abs()
}

/// The same product written with `α = (1−p)² + p²`.
pub fn second_iterate_product_alpha(w: f64, model: &Couplings) -> f64 {
    let alpha = model.alpha;
    let t = model.source_correlation();
    let inner = 2.0 * (model.k.abs() + field_fn_a(w, model));
    t * t / ((alpha + (1.0 - alpha) * inner.cosh()) * (alpha + (1.0 - alpha) * (2.0 * w).cosh()))
}

/// `sup_w |A'(K + A(w))·A'(w)|` over the invariant interval `[−C₁, C₁]`.
///
/// Returns `(argmax, sup)`.
pub fn second_iterate_sup(model: &Couplings) -> (f64, f64) {
    let r = model.field_radius();
    maximize_on_interval(
        |w| second_iterate_product(w, model),
        -r,
        r,
        SUPREMUM_GRID_POINTS,
        SUPREMUM_XTOL,
    )
}

/// Contraction rate of the field recursion for the given parameters.
pub fn decay_rate_bound(params: &ChannelParams) -> DecayBound {
    let model = params.couplings();
    let (j, k) = (model.j.abs(), model.k.abs());
    let c1 = j + k;
    let (rho, regime) = if j == 0.0 {
        (0.0, DecayRegime::Naive)
    } else if k > j {
        // sup of |A'| over [|K|−|J|, |K|+|J|], attained at the inner end
        let two_j = 2.0 * j;
        let rho = two_j.sinh() / (two_j.cosh() + (2.0 * (k - j)).cosh());
        (rho, DecayRegime::EpsLtP)
    } else {
        let (_, sup) = second_iterate_sup(&model);
        (sup.sqrt(), DecayRegime::SecondIterate)
    };
    DecayBound {
        rho,
        regime,
        c: c1 / (1.0 - rho),
        c1,
    }
}

/// Closed form of the improved rate, `ε(1−ε)|1−2p| / ((p−ε)² + ε(1−ε))`.
pub fn improved_rate_closed_form(params: &ChannelParams) -> f64 {
    let (p, e) = (params.p(), params.epsilon());
    e * (1.0 - e) * (1.0 - 2.0 * p).abs() / ((p - e) * (p - e) + e * (1.0 - e))
}

/// Fixed point of `w ↦ K + A(w)`, the field of an all-`+1` sequence.
pub fn plus_fixed_point(model: &Couplings) -> f64 {
    let k = model.k;
    let g = |w: f64| k + field_fn_a(w, model) - w;
    let r = model.field_radius();
    let (mut lo, mut hi) = (-r, r);
    // g is decreasing (A' < 1) with g(−r) ≥ 0 ≥ g(r).
    let mut w = k;
    for _ in 0..200 {
        let gw = g(w);
        if gw == 0.0 {
            return w;
        }
        if gw > 0.0 {
            lo = w;
        } else {
            hi = w;
        }
        let newton = w - gw / (field_fn_a_derivative(w, model) - 1.0);
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - w).abs() <= 1e-16 * w.abs().max(1.0) {
            return next;
        }
        w = next;
    }
    w
}

/// Fixed point of `w ↦ s·K + A(w)`.
pub fn constant_fixed_point(s: Spin, model: &Couplings) -> f64 {
    s.sign() * plus_fixed_point(model)
}

fn limit_fields_unchecked(y: &[Spin], model: &Couplings) -> Vec<f64> {
    let last = *y.last().expect("nonempty");
    let w_tail = constant_fixed_point(last, model);
    // Positions past the end carry the fixed point; the last symbol's own
    // field is the fixed point too.
    let mut fields = backward_scan(&y[..y.len() - 1], w_tail, model);
    fields.push(w_tail);
    fields
}

/// `w_0(y)` for the infinite sequence whose prefix is `y`, guaranteed to
/// within `tol` of every continuation of `y`.
pub fn limit_field(y: &[Spin], tol: f64, model: &Couplings) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if model.k == 0.0 {
        return Ok(0.0);
    }
    if y.is_empty() {
        return Err(Error::InsufficientContext {
            available: 0,
            bound: f64::INFINITY,
            tol,
        });
    }
    let bound = decay_rate_bound(&model.params()).tail_bound(y.len() - 1);
    if bound >= tol {
        return Err(Error::InsufficientContext {
            available: y.len(),
            bound,
            tol,
        });
    }
    Ok(limit_fields_unchecked(y, model)[0])
}

/// `g(y) = ½ + ½·(1−2p)(1−2ε)·y₀·tanh(w₁(y))`.
pub fn g_function(y: &[Spin], tol: f64, model: &Couplings) -> Result<f64> {
    let (&y0, tail) = y.split_first().ok_or(Error::EmptySequence)?;
    let w1 = limit_field(tail, tol, model)?;
    Ok(g_from_field(y0, w1, model))
}

#[inline]
pub(crate) fn g_from_field(y0: Spin, w1: f64, model: &Couplings) -> f64 {
    0.5 + 0.5 * model.source_correlation() * model.channel_correlation() * y0.sign() * w1.tanh()
}

/// `g(y) = cosh(w₀)·exp(B(w₁)) / (λ·cosh(w₁))`, the unsimplified form.
pub fn g_function_cosh_form(y: &[Spin], tol: f64, model: &Couplings) -> Result<f64> {
    let (&y0, tail) = y.split_first().ok_or(Error::EmptySequence)?;
    let w1 = limit_field(tail, tol, model)?;
    let w0 = model.k * y0.sign() + field_fn_a(w1, model);
    Ok((log_cosh(w0) + log_partition_b(w1, model) - log_cosh(w1) - model.lambda.ln()).exp())
}

/// Result of a truncated continued-fraction evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuedFractionValue {
    pub g: f64,
    /// `|g_depth − g_{depth−1}|`, zero at depth 1.
    pub truncation_delta: f64,
}

/// `2g = a₁ − b₁/(a₂ − b₂/(a₃ − …))` with `q_i = (1−2p)·y_{i−1}·y_i`,
/// `a_i = 1 + q_i`, `b_i = 4ε(1−ε)·q_i`, truncated after `depth` levels.
///
/// The tail below the last level is the attracting fixed point of
/// `t ↦ a − b/t` for a constant continuation (`q = 1−2p`).
pub fn g_continued_fraction(y: &[Spin], depth: usize, model: &Couplings) -> Result<ContinuedFractionValue> {
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    if y.len() < depth + 1 {
        return Err(Error::SequenceTooShort {
            len: y.len(),
            min: depth + 1,
        });
    }
    let g = continued_fraction_at(y, depth, model)?;
    let truncation_delta = if depth > 1 {
        (g - continued_fraction_at(y, depth - 1, model)?).abs()
    } else {
        0.0
    };
    Ok(ContinuedFractionValue { g, truncation_delta })
}

fn continued_fraction_at(y: &[Spin], depth: usize, model: &Couplings) -> Result<f64> {
    let r = model.source_correlation();
    let noise = 4.0 * model.epsilon() * (1.0 - model.epsilon());
    let (a_tail, b_tail) = (1.0 + r, noise * r);
    // Larger-magnitude root of t² − a·t + b = 0 attracts the backward map.
    let mut t = 0.5 * (a_tail + (a_tail * a_tail - 4.0 * b_tail).sqrt());
    for i in (1..=depth).rev() {
        if t.abs() < CF_DENOMINATOR_FLOOR {
            return Err(Error::DivisionNearZero { level: i + 1, value: t });
        }
        let q = r * (y[i - 1] * y[i]).sign();
        t = (1.0 + q) - noise * q / t;
    }
    Ok(0.5 * t)
}

/// `φ(y) = B(w₀(y))`.
pub fn potential_phi(y: &[Spin], tol: f64, model: &Couplings) -> Result<f64> {
    Ok(log_partition_b(limit_field(y, tol, model)?, model))
}

/// `φ(y) = ½·log(4·sinh²(w₀) + 1/(p(1−p)))`.
pub fn potential_phi_sinh_form(y: &[Spin], tol: f64, model: &Couplings) -> Result<f64> {
    let w0 = limit_field(y, tol, model)?;
    let p = model.p();
    Ok(0.5 * (4.0 * w0.sinh().powi(2) + 1.0 / (p * (1.0 - p))).ln())
}

/// `h(y) = cosh(w₀(y))·exp(−B(w₀(y)))`, the transfer function relating `g` and `φ`.
pub fn coboundary_h(y: &[Spin], tol: f64, model: &Couplings) -> Result<f64> {
    let w0 = limit_field(y, tol, model)?;
    Ok((log_cosh(w0) - log_partition_b(w0, model)).exp())
}

/// `P = log λ`.
pub fn pressure(model: &Couplings) -> f64 {
    model.lambda.ln()
}

/// `sup |dB/dw|` over `[−C₁, C₁]`.
pub fn sup_abs_b_derivative(model: &Couplings) -> f64 {
    let r = model.field_radius();
    maximize_on_interval(
        |w| log_partition_b_derivative(w, model).abs(),
        -r,
        r,
        SUPREMUM_GRID_POINTS,
        SUPREMUM_XTOL,
    )
    .1
}

/// Constants `C̲ ≤ Q(y_0^n) / exp(S_{n+1}φ(y) − (n+1)P) ≤ C̄`.
///
/// `cosh` is minimal at 0 and maximal at the interval ends; `B` is even and
/// increasing in `|w|`.
pub fn bowen_gibbs_certificate(model: &Couplings) -> GibbsCertificate {
    let decay = decay_rate_bound(&model.params());
    let r = model.field_radius();
    let (cosh_inf, cosh_sup) = (1.0, r.cosh());
    let (exp_b_inf, exp_b_sup) = (log_partition_b(0.0, model).exp(), log_partition_b(r, model).exp());
    let spread = decay.c / (1.0 - decay.rho) * sup_abs_b_derivative(model);
    GibbsCertificate {
        pressure: pressure(model),
        c_lower: model.c_j * cosh_inf / exp_b_sup * (-spread).exp(),
        c_upper: model.c_j * cosh_sup / exp_b_inf * spread.exp(),
    }
}

fn extend_repeating(y: &[Spin], len: usize) -> Vec<Spin> {
    let mut out = y.to_vec();
    let last = *y.last().expect("nonempty");
    out.resize(len.max(y.len()), last);
    out
}

/// `Q(y_0^n) / exp(S_{n+1}φ(y) − (n+1)P)` for the infinite sequence with
/// prefix `y` (continued by its last symbol).
///
/// Evaluated as `c_J·2cosh(w_0^{(n)})·exp(−B(w_0) + Σ_{i=1}^n [B(w_i^{(n)}) − B(w_i)])`,
/// with the same factor 2 as [`crate::transfer::log_cylinder_prob`].
pub fn bowen_gibbs_ratio(y: &[Spin], n: usize, model: &Couplings) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::EmptySequence);
    }
    let full = extend_repeating(y, n + 1);
    let finite = backward_scan(&full[..=n], 0.0, model);
    let limit = limit_fields_unchecked(&full, model);
    let mut sum: CompensatedSum = (1..=n)
        .map(|i| log_partition_b(finite[i], model) - log_partition_b(limit[i], model))
        .collect();
    sum.add(model.c_j.ln());
    sum.add(log_2cosh(finite[0]));
    sum.add(-log_partition_b(limit[0], model));
    Ok(sum.value().exp())
}

/// The same ratio computed from the cylinder probability and the Birkhoff sum.
pub fn bowen_gibbs_ratio_direct(y: &[Spin], n: usize, model: &Couplings) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::EmptySequence);
    }
    let full = extend_repeating(y, n + 1);
    let limit = limit_fields_unchecked(&full, model);
    let mut sum: CompensatedSum = limit[..=n].iter().map(|&w| -log_partition_b(w, model)).collect();
    sum.add(log_cylinder_prob(&full[..=n], model));
    sum.add((n + 1) as f64 * pressure(model));
    Ok(sum.value().exp())
}

/// `|g(u·(+1)^∞) − g(u·(−1)^∞)|` for a prefix `u` of length `n ≥ 1`.
///
/// The field map is increasing in the tail field, so the two constant
/// continuations realise the supremum over all continuations of `u`.
fn extreme_pair_gap(prefix: &[Spin], w_star: f64, model: &Couplings) -> f64 {
    let c = 0.5 * (model.source_correlation() * model.channel_correlation()).abs();
    let inner = &prefix[1..];
    let (hi, lo) = if inner.is_empty() {
        (w_star, -w_star)
    } else {
        (backward_scan(inner, w_star, model)[0], backward_scan(inner, -w_star, model)[0])
    };
    c * (hi.tanh() - lo.tanh()).abs()
}

/// Lower estimate of `var_n(g)`, the largest change of `g` between sequences
/// sharing their first `n` symbols.
///
/// Every prefix is enumerated when `2^n ≤ samples`; otherwise `samples`
/// seeded prefixes are drawn, each from its own ChaCha20 stream so that the
/// prefixes for `n` and `n+1` are nested and the estimate is non-increasing
/// in `n`.
pub fn variation_estimate(n: usize, samples: usize, model: &Couplings, seed: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if model.k == 0.0 || model.j == 0.0 {
        return Ok(0.0);
    }
    let w_star = plus_fixed_point(model);
    let mut prefix = vec![Spin::Plus; n];
    let mut best: f64 = 0.0;
    if n < 63 && (1u64 << n) <= samples as u64 {
        for mask in 0u64..1 << n {
            for (i, s) in prefix.iter_mut().enumerate() {
                *s = Spin::from_bit((mask >> i & 1) as u8);
            }
            best = best.max(extreme_pair_gap(&prefix, w_star, model));
        }
    } else {
        for stream in 0..samples as u64 {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            for s in prefix.iter_mut() {
                *s = if rng.random::<bool>() { Spin::Plus } else { Spin::Minus };
            }
            best = best.max(extreme_pair_gap(&prefix, w_star, model));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_params;
    use crate::spin::all_words;
    use crate::transfer::conditional_prob;

    const FIXED_POINT: f64 = 1.737_205_653_029_149;
    const G_ALL_ONES: f64 = 0.725_576_411_921_994;

    fn model(p: f64, e: f64) -> Couplings {
        validate_params(p, e).unwrap().couplings()
    }

    fn lcg_spins(len: usize, mut state: u64) -> Vec<Spin> {
        (0..len)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                if state >> 63 == 1 {
                    Spin::Plus
                } else {
                    Spin::Minus
                }
            })
            .collect()
    }

    #[test]
    fn fixed_point_matches_iteration() {
        let m = model(0.2, 0.1);
        let mut w = 0.0;
        for _ in 0..500 {
            w = m.k + field_fn_a(w, &m);
        }
        assert!((plus_fixed_point(&m) - w).abs() < 1e-14);
        assert!((w - FIXED_POINT).abs() < 1e-14);
    }

    #[test]
    fn limit_field_values() {
        let m = model(0.2, 0.1);
        let ones = vec![Spin::Plus; 50];
        assert!((limit_field(&ones, 1e-4, &m).unwrap() - FIXED_POINT).abs() < 1e-4);
        assert_eq!(limit_field(&ones, 1e-4, &model(0.2, 0.5)).unwrap(), 0.0);
        assert!(matches!(
            limit_field(&ones[..2], 1e-6, &m),
            Err(Error::InsufficientContext { .. })
        ));
    }

    #[test]
    fn alternating_limit_is_period_two_orbit() {
        let m = model(0.3, 0.2);
        // w_0 for (+,−,+,−,…) is the fixed point of F₊∘F₋.
        let mut w = 0.0;
        for _ in 0..2000 {
            w = m.k + field_fn_a(-m.k + field_fn_a(w, &m), &m);
        }
        let alt: Vec<Spin> = (0..200).map(|i| if i % 2 == 0 { Spin::Plus } else { Spin::Minus }).collect();
        assert!((limit_field(&alt, 1e-12, &m).unwrap() - w).abs() < 1e-12);
    }

    #[test]
    fn g_values() {
        let m = model(0.2, 0.1);
        let ones = vec![Spin::Plus; 60];
        let g = g_function(&ones, 1e-10, &m).unwrap();
        assert!((g - G_ALL_ONES).abs() < 1e-12);
        assert!((g - 0.72558).abs() < 1e-5);
        assert_eq!(g_function(&ones, 1e-10, &model(0.3, 0.5)).unwrap(), 0.5);
        let y = lcg_spins(80, 9);
        let mut flipped = y.clone();
        flipped[0] = flipped[0].flip();
        let sum = g_function(&y, 1e-10, &m).unwrap() + g_function(&flipped, 1e-10, &m).unwrap();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn g_forms_agree() {
        for &(p, e) in &[(0.2, 0.1), (0.3, 0.35), (0.1, 0.45), (0.7, 0.2)] {
            let m = model(p, e);
            for seed in 0..50 {
                let y = lcg_spins(120, seed);
                let a = g_function(&y, 1e-10, &m).unwrap();
                let b = g_function_cosh_form(&y, 1e-10, &m).unwrap();
                assert!((a - b).abs() < 1e-12, "{p} {e}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn continued_fraction_values() {
        let m = model(0.2, 0.1);
        let ones = vec![Spin::Plus; 201];
        let cf = g_continued_fraction(&ones, 200, &m).unwrap();
        // t = 2g is the positive root of t² − 1.6t + 0.216 = 0
        let t = 0.5 * (1.6 + (1.6f64 * 1.6 - 4.0 * 0.216).sqrt());
        assert!((cf.g - t / 2.0).abs() < 1e-12);
        assert!((cf.g - G_ALL_ONES).abs() < 1e-10);
        let fair = model(0.2, 0.5);
        for depth in [1, 5, 30] {
            let y = lcg_spins(depth + 1, depth as u64);
            assert!((g_continued_fraction(&y, depth, &fair).unwrap().g - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn continued_fraction_agrees_with_recursion() {
        for &(p, e) in &[(0.2, 0.1), (0.3, 0.25), (0.05, 0.4), (0.8, 0.3)] {
            let m = model(p, e);
            for seed in 0..100 {
                let y = lcg_spins(201, seed + 1000);
                let cf = g_continued_fraction(&y, 200, &m).unwrap();
                let g = conditional_prob(y[0], &y[1..], &m);
                assert!((cf.g - g).abs() < 1e-10, "({p},{e}) seed {seed}: {} vs {g}", cf.g);
                assert!(cf.truncation_delta < 1e-10);
            }
        }
    }

    #[test]
    fn continued_fraction_arguments() {
        let m = model(0.2, 0.1);
        let y = vec![Spin::Plus; 5];
        assert!(g_continued_fraction(&y, 0, &m).is_err());
        assert!(matches!(
            g_continued_fraction(&y, 5, &m),
            Err(Error::SequenceTooShort { .. })
        ));
    }

    #[test]
    fn phi_values_and_forms() {
        let m = model(0.2, 0.5);
        let y = lcg_spins(40, 3);
        assert!((potential_phi(&y, 1e-8, &m).unwrap() - 2.5f64.ln()).abs() < 1e-15);
        let sym = model(0.5, 0.2);
        let w0 = limit_field(&y, 1e-8, &sym).unwrap();
        let expected = 0.5 * (4.0 * w0.sinh().powi(2) + 4.0).ln();
        assert!((potential_phi(&y, 1e-8, &sym).unwrap() - expected).abs() < 1e-14);
        let m = model(0.2, 0.1);
        let ones = vec![Spin::Plus; 80];
        let phi = potential_phi(&ones, 1e-10, &m).unwrap();
        assert!((phi - log_partition_b(FIXED_POINT, &m)).abs() < 1e-12);
        for &(p, e) in &[(0.2, 0.1), (0.4, 0.3), (0.7, 0.05)] {
            let m = model(p, e);
            for seed in 0..20 {
                let y = lcg_spins(150, seed);
                let a = potential_phi(&y, 1e-10, &m).unwrap();
                let b = potential_phi_sinh_form(&y, 1e-10, &m).unwrap();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coboundary_identity() {
        let fair = model(0.2, 0.5);
        assert!((coboundary_h(&lcg_spins(30, 1), 1e-8, &fair).unwrap() - 0.4).abs() < 1e-15);
        for &(p, e) in &[(0.2, 0.1), (0.35, 0.3), (0.1, 0.4)] {
            let m = model(p, e);
            for seed in 0..50 {
                let y = lcg_spins(150, seed);
                let g = g_function(&y, 1e-12, &m).unwrap();
                let phi = potential_phi(&y, 1e-12, &m).unwrap();
                let h = coboundary_h(&y, 1e-12, &m).unwrap();
                let h_shift = coboundary_h(&y[1..], 1e-12, &m).unwrap();
                assert!(h > 0.0);
                let rhs = phi.exp() / m.lambda * h / h_shift;
                assert!((g - rhs).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn coboundary_is_shift_covariant() {
        let m = model(0.3, 0.2);
        let y = lcg_spins(150, 77);
        let fields = limit_fields_unchecked(&y, &m);
        for i in [0, 1, 5, 17] {
            let w_i = fields[i];
            let direct = (log_cosh(w_i) - log_partition_b(w_i, &m)).exp();
            assert!((coboundary_h(&y[i..], 1e-10, &m).unwrap() - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn pressure_values() {
        assert!((pressure(&model(0.5, 0.5)) - 4f64.ln()).abs() < 1e-15);
        assert!((pressure(&model(0.2, 0.1)) - 2.120_263_536_200_091).abs() < 1e-12);
    }

    #[test]
    fn decay_bounds() {
        let sym = decay_rate_bound(&validate_params(0.5, 0.3).unwrap());
        assert_eq!(sym.rho, 0.0);
        let improved = decay_rate_bound(&validate_params(0.2, 0.05).unwrap());
        assert_eq!(improved.regime, DecayRegime::EpsLtP);
        assert!((improved.rho - 0.0475 / 0.07 * 0.6).abs() < 1e-12);
        let second = decay_rate_bound(&validate_params(0.2, 0.3).unwrap());
        assert_eq!(second.regime, DecayRegime::SecondIterate);
        assert!(second.rho < 0.6);
        // Regression baseline from the numerical supremum.
        assert!((second.rho - 0.575_074_968_522_555).abs() < 1e-9, "{}", second.rho);
    }

    #[test]
    fn improved_rate_forms_agree() {
        for &p in &[0.1, 0.2, 0.3, 0.45] {
            for &e in &[0.01, 0.05, 0.08] {
                let params = validate_params(p, e).unwrap();
                let b = decay_rate_bound(&params);
                assert_eq!(b.regime, DecayRegime::EpsLtP);
                assert!((b.rho - improved_rate_closed_form(&params)).abs() < 1e-14);
                assert!(b.rho < (1.0 - 2.0 * p) - 1e-9);
            }
        }
    }

    #[test]
    fn second_iterate_alpha_form() {
        for &(p, e) in &[(0.2, 0.3), (0.1, 0.45), (0.3, 0.3)] {
            let m = model(p, e);
            for i in 0..=40 {
                let w = -3.0 + 0.15 * i as f64;
                let a = second_iterate_product(w, &m);
                let b = second_iterate_product_alpha(w, &m);
                assert!((a - b).abs() < 1e-14 * a.max(1.0));
            }
            let (_, sup) = second_iterate_sup(&m);
            assert!(sup < (1.0 - 2.0 * p).powi(2) - 1e-9);
        }
    }

    #[test]
    fn conditional_converges_to_g_within_certificate() {
        for &(p, e) in &[(0.2, 0.1), (0.2, 0.3), (0.45, 0.05)] {
            let m = model(p, e);
            let decay = decay_rate_bound(&m.params());
            for seed in 0..30 {
                let y = lcg_spins(300, seed);
                let g = g_function(&y, 1e-14, &m).unwrap();
                for n in 1..=60 {
                    let q = conditional_prob(y[0], &y[1..=n], &m);
                    assert!((q - g).abs() <= decay.tail_bound(n) + 1e-14, "({p},{e}) n={n}: {} > {}", (q - g).abs(), decay.tail_bound(n));
                }
            }
        }
    }

    #[test]
    fn gibbs_ratio_routes_agree_and_stay_in_certificate() {
        let m = model(0.2, 0.1);
        let cert = bowen_gibbs_certificate(&m);
        assert!(cert.c_lower > 0.0 && cert.c_upper >= cert.c_lower);
        for seed in 0..40 {
            let y = lcg_spins(60, seed);
            for n in [0, 1, 10, 59, 120] {
                let a = bowen_gibbs_ratio(&y, n, &m).unwrap();
                let b = bowen_gibbs_ratio_direct(&y, n, &m).unwrap();
                assert!((a - b).abs() < 1e-10 * a, "seed {seed} n={n}: {a} vs {b}");
                assert!(cert.contains(a));
            }
        }
    }

    #[test]
    fn gibbs_ratio_degenerate_channel_is_constant() {
        let m = model(0.2, 0.5);
        let cert = bowen_gibbs_certificate(&m);
        for w in all_words(6) {
            let r = bowen_gibbs_ratio(&w, 5, &m).unwrap();
            assert!((r - 1.0).abs() < 1e-14);
            assert!(cert.contains(r));
        }
    }

    #[test]
    fn gibbs_ratio_stabilises() {
        let m = model(0.2, 0.1);
        let y = lcg_spins(100, 4);
        let a = bowen_gibbs_ratio(&y, 200, &m).unwrap();
        let b = bowen_gibbs_ratio(&y, 400, &m).unwrap();
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn variation_estimates() {
        assert_eq!(variation_estimate(5, 100, &model(0.2, 0.5), 1).unwrap(), 0.0);
        let m = model(0.2, 0.05);
        let decay = decay_rate_bound(&m.params());
        let v10 = variation_estimate(10, 2000, &m, 1).unwrap();
        assert!(v10 <= decay.c * 0.407_142_857_142_857_1f64.powi(10));
        let mut prev = f64::INFINITY;
        for n in 1..40 {
            let v = variation_estimate(n, 500, &m, 3).unwrap();
            assert!(v <= prev, "n={n}: {v} > {prev}");
            prev = v;
        }
        assert!(variation_estimate(0, 10, &m, 0).is_err());
    }

    #[test]
    fn exhaustive_variation_matches_brute_force_pairs() {
        // For n = 3, compare against every pair of length-12 continuations.
        let m = model(0.3, 0.2);
        let n = 3;
        let exact = variation_estimate(n, 1 << n, &m, 0).unwrap();
        let mut brute: f64 = 0.0;
        for prefix in all_words(n) {
            let mut values = Vec::new();
            for cont in all_words(10) {
                let mut y = prefix.clone();
                y.extend(cont);
                values.push(conditional_prob(y[0], &y[1..], &m));
            }
            let (lo, hi) = values.iter().fold((1.0f64, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            brute = brute.max(hi - lo);
        }
        // Finite continuations see slightly less spread than infinite tails.
        assert!(brute <= exact + 1e-12);
        assert!(exact - brute < 1e-3);
    }
}
