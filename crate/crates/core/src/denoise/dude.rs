use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spin::{Spin, SpinSequence};

use super::EmissionMatrix;

/// Largest supported one-sided context length.
pub const MAX_CONTEXT_LENGTH: usize = 16;
/// Contexts with `2k` bits at most this many are counted in a dense table.
const DENSE_KEY_BITS: usize = 16;
/// Positions per counting shard.
const SHARD_LEN: usize = 1 << 16;

/// `max(1, ⌈½·log₂ N⌉)`, capped at 12.
pub fn default_context_length(n: usize) -> usize {
    if n < 2 {
        return 1;
    }
    let half_log = 0.5 * (n as f64).log2();
    (half_log.ceil() as usize).clamp(1, 12)
}

#[derive(Debug, Clone)]
enum Table {
    Dense(Vec<[u64; 2]>),
    Sparse(HashMap<u64, [u64; 2]>),
}

impl Table {
    fn empty(k: usize) -> Self {
        if 2 * k <= DENSE_KEY_BITS {
            Table::Dense(vec![[0; 2]; 1 << (2 * k)])
        } else {
            Table::Sparse(HashMap::new())
        }
    }

    fn bump(&mut self, key: u64, center: Spin) {
        match self {
            Table::Dense(v) => v[key as usize][center.index()] += 1,
            Table::Sparse(m) => m.entry(key).or_insert([0; 2])[center.index()] += 1,
        }
    }

    fn get(&self, key: u64) -> [u64; 2] {
        match self {
            Table::Dense(v) => v[key as usize],
            Table::Sparse(m) => m.get(&key).copied().unwrap_or([0; 2]),
        }
    }

    fn merge(mut self, other: Table) -> Table {
        match (&mut self, other) {
            (Table::Dense(a), Table::Dense(b)) => {
                for (x, y) in a.iter_mut().zip(b) {
                    x[0] += y[0];
                    x[1] += y[1];
                }
            }
            (Table::Sparse(a), Table::Sparse(b)) => {
                for (key, c) in b {
                    let e = a.entry(key).or_insert([0; 2]);
                    e[0] += c[0];
                    e[1] += c[1];
                }
            }
            _ => unreachable!("shards share one layout"),
        }
        self
    }

    fn distinct(&self) -> usize {
        match self {
            Table::Dense(v) => v.iter().filter(|c| c[0] + c[1] > 0).count(),
            Table::Sparse(m) => m.len(),
        }
    }
}

/// Bits of `symbols`, first symbol most significant.
fn pack_key(symbols: &[Spin]) -> u64 {
    symbols.iter().fold(0u64, |acc, s| acc << 1 | u64::from(s.bit()))
}

/// Key of the two-sided context around position `i`: left bits then right bits.
#[inline]
fn context_key(y: &[Spin], i: usize, k: usize) -> u64 {
    pack_key(&y[i - k..i]) << k | pack_key(&y[i + 1..=i + k])
}

/// Counts `m(left, center, right)` over every interior position of a sequence.
#[derive(Debug, Clone)]
pub struct ContextCounts {
    k: usize,
    table: Table,
}

impl ContextCounts {
    /// Counts all positions `i` with `k ≤ i < N − k`. Needs `N > 2k + 1`.
    pub fn from_sequence(y: &[Spin], k: usize) -> Result<Self> {
        check_context_length(k)?;
        let n = y.len();
        if n <= 2 * k + 1 {
            return Err(Error::SequenceTooShort { len: n, min: 2 * k + 2 });
        }
        let (lo, hi) = (k, n - k);
        let shards: Vec<(usize, usize)> = (lo..hi)
            .step_by(SHARD_LEN)
            .map(|s| (s, (s + SHARD_LEN).min(hi)))
            .collect();
        let table = shards
            .into_par_iter()
            .map(|(s, e)| {
                let mut t = Table::empty(k);
                for i in s..e {
                    t.bump(context_key(y, i, k), y[i]);
                }
                t
            })
            .reduce(|| Table::empty(k), Table::merge);
        Ok(Self { k, table })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of contexts seen at least once.
    pub fn distinct_contexts(&self) -> usize {
        self.table.distinct()
    }

    /// `m(left, center, right)`; both contexts must have length `k`.
    pub fn count(&self, left: &[Spin], center: Spin, right: &[Spin]) -> u64 {
        assert!(left.len() == self.k && right.len() == self.k, "context length must be k");
        self.table.get(pack_key(left) << self.k | pack_key(right))[center.index()]
    }

    /// Empirical `q̂₂(· | left, right)`, or `None` for an unseen context.
    pub fn conditional(&self, left: &[Spin], right: &[Spin]) -> Option<[f64; 2]> {
        assert!(left.len() == self.k && right.len() == self.k, "context length must be k");
        normalize_counts(self.table.get(pack_key(left) << self.k | pack_key(right)))
    }

    fn conditional_at(&self, y: &[Spin], i: usize) -> [f64; 2] {
        normalize_counts(self.table.get(context_key(y, i, self.k))).expect("position was counted")
    }
}

fn normalize_counts(c: [u64; 2]) -> Option<[f64; 2]> {
    let total = c[0] + c[1];
    (total > 0).then(|| [c[0] as f64 / total as f64, c[1] as f64 / total as f64])
}

fn check_context_length(k: usize) -> Result<()> {
    if k == 0 || k > MAX_CONTEXT_LENGTH {
        return Err(Error::InvalidArgument(format!(
            "context length must be in 1..={MAX_CONTEXT_LENGTH}, got {k}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DudeOutput {
    pub denoised: SpinSequence,
    pub k: usize,
    /// Positions whose inverted-channel estimate had a negative entry.
    pub clamped: usize,
    pub distinct_contexts: usize,
}

/// Two-pass discrete universal denoiser with one-sided context length `k`.
///
/// The first and last `k` symbols have no full context and are passed
/// through unchanged.
pub fn dude(y: &[Spin], epsilon: f64, k: usize) -> Result<DudeOutput> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::OutOfRange { name: "epsilon", value: epsilon });
    }
    let emission = EmissionMatrix::new(epsilon);
    emission.inverse()?;
    let counts = ContextCounts::from_sequence(y, k)?;
    let n = y.len();
    let decided: Vec<(Spin, bool)> = (0..n)
        .into_par_iter()
        .map(|i| {
            if i < k || i >= n - k {
                return Ok((y[i], false));
            }
            let post = emission.posterior(counts.conditional_at(y, i), y[i])?;
            let x = if post.dist[0] > post.dist[1] { Spin::Minus } else { Spin::Plus };
            Ok((x, post.clamped))
        })
        .collect::<Result<_>>()?;
    let clamped = decided.iter().filter(|d| d.1).count();
    let denoised = SpinSequence::from_spins(decided.into_iter().map(|d| d.0).collect())?;
    Ok(DudeOutput {
        denoised,
        k,
        clamped,
        distinct_contexts: counts.distinct_contexts(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::parse_spins;

    #[test]
    fn counts_by_hand() {
        let y = parse_spins("+-+++").unwrap();
        let c = ContextCounts::from_sequence(&y, 1).unwrap();
        let (p, m) = (Spin::Plus, Spin::Minus);
        assert_eq!(c.count(&[p], m, &[p]), 1);
        assert_eq!(c.count(&[p], p, &[p]), 1);
        assert_eq!(c.count(&[m], p, &[p]), 1);
        assert_eq!(c.conditional(&[p], &[p]), Some([0.5, 0.5]));
        assert_eq!(c.conditional(&[m], &[m]), None);

        let y = parse_spins("+-+").unwrap();
        assert!(ContextCounts::from_sequence(&y, 1).is_err());
        let y = parse_spins("+-+-").unwrap();
        let c = ContextCounts::from_sequence(&y, 1).unwrap();
        assert_eq!(c.conditional(&[p], &[p]), Some([1.0, 0.0]));
    }

    #[test]
    fn dense_and_sparse_agree() {
        let y: Vec<Spin> = (0..5000u64)
            .map(|i| Spin::from_bit(((i.wrapping_mul(2654435761) >> 7) & 1) as u8))
            .collect();
        let dense = ContextCounts::from_sequence(&y, 8).unwrap();
        let sparse = ContextCounts::from_sequence(&y, 9).unwrap();
        assert!(matches!(dense.table, Table::Dense(_)));
        assert!(matches!(sparse.table, Table::Sparse(_)));
        let total = |c: &ContextCounts| -> u64 {
            match &c.table {
                Table::Dense(v) => v.iter().map(|x| x[0] + x[1]).sum(),
                Table::Sparse(m) => m.values().map(|x| x[0] + x[1]).sum(),
            }
        };
        assert_eq!(total(&dense), 5000 - 16);
        assert_eq!(total(&sparse), 5000 - 18);
    }

    #[test]
    fn sharded_matches_serial() {
        let n = 3 * SHARD_LEN + 17;
        let y: Vec<Spin> = (0..n as u64).map(|i| Spin::from_bit(((i * i + 3 * i) >> 2 & 1) as u8)).collect();
        let c = ContextCounts::from_sequence(&y, 3).unwrap();
        let mut serial = Table::empty(3);
        for i in 3..n - 3 {
            serial.bump(context_key(&y, i, 3), y[i]);
        }
        match (&c.table, &serial) {
            (Table::Dense(a), Table::Dense(b)) => assert_eq!(a, b),
            _ => panic!("expected dense tables"),
        }
    }

    #[test]
    fn ends_pass_through_and_errors() {
        let y = parse_spins("-+-+--+-+-").unwrap();
        let out = dude(&y, 0.1, 2).unwrap();
        assert_eq!(&out.denoised[..2], &y[..2]);
        assert_eq!(&out.denoised[8..], &y[8..]);
        assert!(matches!(dude(&y[..5], 0.1, 2), Err(Error::SequenceTooShort { .. })));
        assert_eq!(dude(&y, 0.5, 1).unwrap_err(), Error::SingularChannel);
        assert!(dude(&y, 0.1, 0).is_err());
    }

    #[test]
    fn default_k() {
        assert_eq!(default_context_length(1), 1);
        assert_eq!(default_context_length(4), 1);
        assert_eq!(default_context_length(1000), 5);
        assert_eq!(default_context_length(1_000_000), 10);
        assert_eq!(default_context_length(usize::MAX), 12);
    }
}
