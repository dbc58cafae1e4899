use crate::error::{Error, Result};
use crate::model::ChannelParams;
use crate::spin::Spin;

use super::{EmissionMatrix, PosteriorMarginals};

/// Posterior marginals `P[X_n = x | Y_1^N = y]` by the scaled forward and
/// backward recursions.
///
/// `α_n` and `β_n` are renormalised to sum to one at every step; the ratio
/// `α_n(x)β_n(x) / Σ α_n β_n` is unaffected by the scaling.
pub fn forward_backward(y: &[Spin], params: &ChannelParams) -> Result<PosteriorMarginals> {
    if y.is_empty() {
        return Err(Error::EmptySequence);
    }
    let p = params.p();
    let emission = EmissionMatrix::new(params.epsilon());
    let transition = [[1.0 - p, p], [p, 1.0 - p]];
    let n = y.len();

    let mut alpha = Vec::with_capacity(n);
    let first = emission.column(y[0]);
    alpha.push(normalize([0.5 * first[0], 0.5 * first[1]]));
    for &obs in &y[1..] {
        let prev: [f64; 2] = *alpha.last().unwrap();
        let like = emission.column(obs);
        let next = [
            (prev[0] * transition[0][0] + prev[1] * transition[1][0]) * like[0],
            (prev[0] * transition[0][1] + prev[1] * transition[1][1]) * like[1],
        ];
        alpha.push(normalize(next));
    }

    let mut beta = [1.0, 1.0];
    let mut post = vec![[0.0; 2]; n];
    for i in (0..n).rev() {
        post[i] = normalize([alpha[i][0] * beta[0], alpha[i][1] * beta[1]]);
        if i > 0 {
            let like = emission.column(y[i]);
            beta = normalize([
                transition[0][0] * like[0] * beta[0] + transition[0][1] * like[1] * beta[1],
                transition[1][0] * like[0] * beta[0] + transition[1][1] * like[1] * beta[1],
            ]);
        }
    }
    Ok(PosteriorMarginals::from_normalized(post))
}

#[inline]
fn normalize(v: [f64; 2]) -> [f64; 2] {
    let s = v[0] + v[1];
    [v[0] / s, v[1] / s]
}
