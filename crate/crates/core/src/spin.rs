//! ±1 symbols and finite windows of them.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A symbol of the binary alphabet `{−1, +1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(i8)]
pub enum Spin {
    Minus = -1,
    Plus = 1,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Minus, Spin::Plus];

    #[inline]
    pub fn value(self) -> i8 {
        self as i8
    }

    #[inline]
    pub fn sign(self) -> f64 {
        self as i8 as f64
    }

    #[inline]
    pub fn flip(self) -> Spin {
        match self {
            Spin::Minus => Spin::Plus,
            Spin::Plus => Spin::Minus,
        }
    }

    /// Index into `(minus, plus)` ordered pairs.
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Spin::Minus => 0,
            Spin::Plus => 1,
        }
    }

    /// Bit used by the packed encoding: `+1 ↔ 0`, `−1 ↔ 1`.
    #[inline]
    pub fn bit(self) -> u8 {
        match self {
            Spin::Plus => 0,
            Spin::Minus => 1,
        }
    }

    #[inline]
    pub fn from_bit(bit: u8) -> Spin {
        if bit & 1 == 0 {
            Spin::Plus
        } else {
            Spin::Minus
        }
    }
}

impl std::ops::Mul for Spin {
    type Output = Spin;

    #[inline]
    fn mul(self, rhs: Spin) -> Spin {
        if self == rhs {
            Spin::Plus
        } else {
            Spin::Minus
        }
    }
}

impl std::ops::Neg for Spin {
    type Output = Spin;

    fn neg(self) -> Spin {
        self.flip()
    }
}

impl TryFrom<i64> for Spin {
    type Error = Error;

    fn try_from(v: i64) -> Result<Spin> {
        match v {
            1 => Ok(Spin::Plus),
            -1 => Ok(Spin::Minus),
            other => Err(Error::InvalidSpin(other)),
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Plus => "+",
            Spin::Minus => "-",
        })
    }
}

/// Converts a slice of integers into spins, rejecting anything but ±1.
pub fn spins_from_ints<I>(values: I) -> Result<Vec<Spin>>
where
    I: IntoIterator,
    I::Item: Into<i64>,
{
    values.into_iter().map(|v| Spin::try_from(v.into())).collect()
}

/// Compact `+`/`-` rendering of a window, e.g. `++-+`.
pub fn format_spins(spins: &[Spin]) -> String {
    spins.iter().map(|s| s.to_string()).collect()
}

/// Parses `++-+`, `+1 -1 +1` or `1,-1,1`.
pub fn parse_spins(s: &str) -> Result<Vec<Spin>> {
    let trimmed = s.trim();
    if trimmed.chars().all(|c| c == '+' || c == '-') {
        return Ok(trimmed
            .chars()
            .map(|c| if c == '+' { Spin::Plus } else { Spin::Minus })
            .collect());
    }
    trimmed
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            let v: i64 = t
                .trim_start_matches('+')
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("not a spin: {t:?}")))?;
            Spin::try_from(v)
        })
        .collect()
}

/// Every word of length `len`, in lexicographic order with `−1 < +1`.
pub fn all_words(len: usize) -> impl Iterator<Item = Vec<Spin>> {
    assert!(len < 63);
    (0u64..1 << len).map(move |mask| {
        (0..len)
            .map(|i| {
                if mask >> (len - 1 - i) & 1 == 1 {
                    Spin::Plus
                } else {
                    Spin::Minus
                }
            })
            .collect()
    })
}

/// A nonempty run of spins occupying positions `start ..= start + len − 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinSequence {
    start: i64,
    symbols: Vec<Spin>,
}

impl SpinSequence {
    pub fn new(start: i64, symbols: Vec<Spin>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptySequence);
        }
        Ok(Self { start, symbols })
    }

    /// Sequence starting at position 0.
    pub fn from_spins(symbols: Vec<Spin>) -> Result<Self> {
        Self::new(0, symbols)
    }

    pub fn from_ints<I>(start: i64, values: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: Into<i64>,
    {
        Self::new(start, spins_from_ints(values)?)
    }

    pub fn constant(spin: Spin, len: usize) -> Result<Self> {
        Self::from_spins(vec![spin; len])
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// Last occupied position.
    pub fn end(&self) -> i64 {
        self.start + self.symbols.len() as i64 - 1
    }

    pub fn symbols(&self) -> &[Spin] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<Spin> {
        self.symbols
    }

    /// Symbol at absolute position `i`, if inside the window.
    pub fn at(&self, i: i64) -> Option<Spin> {
        let offset = i.checked_sub(self.start)?;
        usize::try_from(offset)
            .ok()
            .and_then(|o| self.symbols.get(o).copied())
    }

    pub fn reversed(&self) -> SpinSequence {
        let mut symbols = self.symbols.clone();
        symbols.reverse();
        SpinSequence {
            start: -self.end(),
            symbols,
        }
    }

    pub fn to_ints(&self) -> Vec<i8> {
        self.symbols.iter().map(|s| s.value()).collect()
    }
}

impl Deref for SpinSequence {
    type Target = [Spin];

    fn deref(&self) -> &[Spin] {
        &self.symbols
    }
}

impl fmt::Display for SpinSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_spins(&self.symbols))
    }
}

impl FromStr for SpinSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_spins(parse_spins(s)?)
    }
}

/// One bit per symbol, least significant bit first within each byte.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedSpins {
    len: usize,
    bytes: Vec<u8>,
}

impl PackedSpins {
    pub fn pack(spins: &[Spin]) -> Self {
        let mut bytes = vec![0u8; spins.len().div_ceil(8)];
        for (i, s) in spins.iter().enumerate() {
            bytes[i / 8] |= s.bit() << (i % 8);
        }
        Self {
            len: spins.len(),
            bytes,
        }
    }

    /// Rebuilds from raw bytes; bits past `len` must be zero.
    pub fn from_bytes(len: usize, bytes: Vec<u8>) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::LengthMismatch {
                left: bytes.len(),
                right: len.div_ceil(8),
            });
        }
        if len % 8 != 0 && bytes[len / 8] >> (len % 8) != 0 {
            return Err(Error::InvalidArgument("nonzero padding bits".into()));
        }
        Ok(Self { len, bytes })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn get(&self, i: usize) -> Option<Spin> {
        (i < self.len).then(|| Spin::from_bit(self.bytes[i / 8] >> (i % 8)))
    }

    pub fn unpack(&self) -> Vec<Spin> {
        (0..self.len)
            .map(|i| Spin::from_bit(self.bytes[i / 8] >> (i % 8)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spin_algebra() {
        assert_eq!(Spin::Plus * Spin::Minus, Spin::Minus);
        assert_eq!(Spin::Minus * Spin::Minus, Spin::Plus);
        assert_eq!(-Spin::Plus, Spin::Minus);
        assert_eq!(Spin::try_from(0), Err(Error::InvalidSpin(0)));
        assert_eq!(Spin::Minus.sign(), -1.0);
    }

    #[test]
    fn empty_sequence_rejected() {
        assert_eq!(SpinSequence::from_spins(vec![]), Err(Error::EmptySequence));
    }

    #[test]
    fn parsing_accepts_common_notations() {
        let a: SpinSequence = "++-+".parse().unwrap();
        let b: SpinSequence = "+1 +1 -1 +1".parse().unwrap();
        let c: SpinSequence = "1,1,-1,1".parse().unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
        assert_eq!(a.to_string(), "++-+");
        assert!("1,2".parse::<SpinSequence>().is_err());
    }

    #[test]
    fn window_indexing() {
        let s = SpinSequence::from_ints(-2, [1i8, -1, 1]).unwrap();
        assert_eq!(s.end(), 0);
        assert_eq!(s.at(-1), Some(Spin::Minus));
        assert_eq!(s.at(1), None);
        assert_eq!(s.at(-3), None);
        let r = s.reversed();
        assert_eq!(r.start(), 0);
        assert_eq!(r.end(), 2);
    }

    #[test]
    fn words_enumerate_in_order() {
        let words: Vec<_> = all_words(2).collect();
        assert_eq!(words.len(), 4);
        assert_eq!(words[0], vec![Spin::Minus, Spin::Minus]);
        assert_eq!(words[3], vec![Spin::Plus, Spin::Plus]);
    }

    #[test]
    fn packed_padding_is_checked() {
        assert!(PackedSpins::from_bytes(3, vec![0b1000]).is_err());
        assert!(PackedSpins::from_bytes(3, vec![0b101]).is_ok());
        assert!(PackedSpins::from_bytes(9, vec![0]).is_err());
    }

    proptest! {
        #[test]
        fn packing_round_trips(bits in proptest::collection::vec(any::<bool>(), 0..200)) {
            let spins: Vec<Spin> = bits.iter().map(|&b| if b { Spin::Plus } else { Spin::Minus }).collect();
            let packed = PackedSpins::pack(&spins);
            prop_assert_eq!(packed.as_bytes().len(), spins.len().div_ceil(8));
            let again = PackedSpins::from_bytes(spins.len(), packed.as_bytes().to_vec()).unwrap();
            prop_assert_eq!(again.unpack(), spins);
        }
    }
}
