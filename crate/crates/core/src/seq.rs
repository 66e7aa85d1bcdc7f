//! Eventually periodic sequences over natural-number symbols, plus the
//! pairing machinery used everywhere else: Cantor pairing, the countable
//! product packing `lambda_pack`/`lambda_unpack` and positional
//! interleaving of sequence pairs.
//!
//! A sequence is stored as a finite `prefix` followed by a repeating
//! `cycle`. The common case is a cycle of length one (an eventually
//! constant sequence, written `1101:0` when printed); longer cycles only
//! arise from interleaving two sequences whose tail symbols differ, and
//! keep every operation on pairs total and exact.

use std::fmt;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Tape and sequence symbols. Machine tapes only ever hold 0 and 1;
/// semantic-level sequences use the full range.
pub type Symbol = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeqError {
    /// The sequence (or a tuple component) must be eventually zero for
    /// the packing in question, but is not.
    #[error("sequence tail is not zero")]
    TailNotZero,
}

/// Errors from parsing the `prefix:tail` literal form.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeqParseError {
    #[error("sequence literal must contain exactly one ':'")]
    MissingColon,
    #[error("empty tail in sequence literal")]
    EmptyTail,
    #[error("bad symbol {0:?} in sequence literal")]
    BadSymbol(String),
}

/// An infinite sequence with eventually periodic values, in canonical
/// form: the cycle is the shortest possible and the prefix never ends
/// with symbols that already follow the cycle pattern. Two values are
/// equal exactly when they agree at every position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EvSeq {
    prefix: Vec<Symbol>,
    cycle: Vec<Symbol>,
}

fn canonicalize(prefix: &mut Vec<Symbol>, cycle: &mut Vec<Symbol>) {
    debug_assert!(!cycle.is_empty());
    let n = cycle.len();
    for d in 1..=n {
        if n % d == 0 && (0..n).all(|i| cycle[i] == cycle[i % d]) {
            cycle.truncate(d);
            break;
        }
    }
    // Absorbing a trailing prefix symbol rotates the cycle by one.
    while let Some(&last) = prefix.last() {
        if last == *cycle.last().unwrap() {
            prefix.pop();
            cycle.rotate_right(1);
        } else {
            break;
        }
    }
}

impl EvSeq {
    /// The all-`sym` sequence.
    pub fn constant(sym: Symbol) -> Self {
        EvSeq {
            prefix: Vec::new(),
            cycle: vec![sym],
        }
    }

    /// The all-zero sequence `0^N`.
    pub fn zeros() -> Self {
        Self::constant(0)
    }

    /// Eventually constant sequence: `prefix` then `tail` forever.
    /// Trailing prefix symbols equal to `tail` are stripped.
    pub fn make(prefix: Vec<Symbol>, tail: Symbol) -> Self {
        Self::periodic(prefix, vec![tail])
    }

    /// General form: `prefix` then `cycle` repeated forever.
    ///
    /// Panics if `cycle` is empty.
    pub fn periodic(mut prefix: Vec<Symbol>, mut cycle: Vec<Symbol>) -> Self {
        assert!(!cycle.is_empty(), "cycle must be nonempty");
        canonicalize(&mut prefix, &mut cycle);
        EvSeq { prefix, cycle }
    }

    /// Symbol at position `i`.
    pub fn at(&self, i: usize) -> Symbol {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    pub fn prefix(&self) -> &[Symbol] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[Symbol] {
        &self.cycle
    }

    /// The tail symbol when the sequence is eventually constant.
    pub fn tail(&self) -> Option<Symbol> {
        if self.cycle.len() == 1 {
            Some(self.cycle[0])
        } else {
            None
        }
    }

    /// True when the values are 0 from some position on.
    pub fn has_zero_tail(&self) -> bool {
        self.cycle == [0]
    }

    pub fn is_all_zero(&self) -> bool {
        self.has_zero_tail() && self.prefix.iter().all(|&s| s == 0)
    }

    /// True when every symbol is 0 or 1 (a machine-tape sequence).
    pub fn is_binary(&self) -> bool {
        self.prefix.iter().chain(self.cycle.iter()).all(|&s| s <= 1)
    }

    /// Largest symbol attained anywhere in the sequence.
    pub fn max_symbol(&self) -> Symbol {
        self.prefix
            .iter()
            .chain(self.cycle.iter())
            .copied()
            .max()
            .unwrap_or(0)
    }

    /// The first `k` symbols.
    pub fn first(&self, k: usize) -> Vec<Symbol> {
        (0..k).map(|i| self.at(i)).collect()
    }

    /// The sequence with the first `k` positions dropped.
    pub fn suffix(&self, k: usize) -> EvSeq {
        if k <= self.prefix.len() {
            EvSeq::periodic(self.prefix[k..].to_vec(), self.cycle.clone())
        } else {
            let shift = (k - self.prefix.len()) % self.cycle.len();
            let mut cycle = self.cycle.clone();
            cycle.rotate_left(shift);
            EvSeq::periodic(Vec::new(), cycle)
        }
    }

    /// The sequence with `front` prepended.
    pub fn prepend(&self, front: &[Symbol]) -> EvSeq {
        let mut prefix = front.to_vec();
        prefix.extend_from_slice(&self.prefix);
        EvSeq::periodic(prefix, self.cycle.clone())
    }

    /// Pointwise image of the sequence under `f`.
    pub fn map(&self, f: impl Fn(Symbol) -> Symbol) -> EvSeq {
        EvSeq::periodic(
            self.prefix.iter().map(|&s| f(s)).collect(),
            self.cycle.iter().map(|&s| f(s)).collect(),
        )
    }

    /// Positions already cycling start here.
    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }
}

impl fmt::Display for EvSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn side(f: &mut fmt::Formatter<'_>, syms: &[Symbol]) -> fmt::Result {
            if syms.iter().any(|&s| s > 9) {
                for (i, s) in syms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{s}")?;
                }
            } else {
                for s in syms {
                    write!(f, "{s}")?;
                }
            }
            Ok(())
        }
        side(f, &self.prefix)?;
        write!(f, ":")?;
        side(f, &self.cycle)
    }
}

fn parse_side(text: &str) -> Result<Vec<Symbol>, SeqParseError> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    if text.contains(',') {
        text.split(',')
            .map(|part| {
                part.trim()
                    .parse::<Symbol>()
                    .map_err(|_| SeqParseError::BadSymbol(part.to_string()))
            })
            .collect()
    } else {
        text.chars()
            .map(|c| {
                c.to_digit(10)
                    .ok_or_else(|| SeqParseError::BadSymbol(c.to_string()))
            })
            .collect()
    }
}

impl FromStr for EvSeq {
    type Err = SeqParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (prefix, cycle) = s.split_once(':').ok_or(SeqParseError::MissingColon)?;
        if cycle.contains(':') {
            return Err(SeqParseError::MissingColon);
        }
        let prefix = parse_side(prefix.trim())?;
        let cycle = parse_side(cycle.trim())?;
        if cycle.is_empty() {
            return Err(SeqParseError::EmptyTail);
        }
        Ok(EvSeq::periodic(prefix, cycle))
    }
}

impl Serialize for EvSeq {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for EvSeq {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(de::Error::custom)
    }
}

/// A finite-support point of the countable product space: components
/// beyond the stored ones read as the all-zero sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeqTuple {
    components: Vec<EvSeq>,
}

impl SeqTuple {
    pub fn new(components: Vec<EvSeq>) -> Self {
        SeqTuple { components }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[EvSeq] {
        &self.components
    }

    /// Component `i`, reading absent components as `0^N`.
    pub fn component(&self, i: usize) -> EvSeq {
        self.components.get(i).cloned().unwrap_or_else(EvSeq::zeros)
    }

    fn value(&self, i: usize, j: usize) -> Symbol {
        self.components.get(i).map(|c| c.at(j)).unwrap_or(0)
    }
}

/// Cantor pairing `(i+j)(i+j+1)/2 + j`, a bijection on pairs of naturals.
pub fn cantor_pair(i: u64, j: u64) -> u64 {
    let d = i + j;
    d * (d + 1) / 2 + j
}

fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.saturating_mul(x) > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Inverse of [`cantor_pair`].
pub fn cantor_unpair(k: u64) -> (u64, u64) {
    let d = (isqrt(8 * k + 1) - 1) / 2;
    let j = k - d * (d + 1) / 2;
    (d - j, j)
}

/// Packs a finite-support tuple into a single sequence along the Cantor
/// pairing: position `cantor_pair(i, j)` of the result holds component
/// `i` at position `j`. All components must be eventually zero, since
/// the zero components beyond the tuple force the packed tail to zero.
pub fn lambda_pack(t: &SeqTuple) -> Result<EvSeq, SeqError> {
    for c in t.components() {
        if !c.has_zero_tail() {
            return Err(SeqError::TailNotZero);
        }
    }
    let mut bound = 0u64;
    for (i, c) in t.components().iter().enumerate() {
        if !c.prefix().is_empty() {
            bound = bound.max(cantor_pair(i as u64, (c.prefix().len() - 1) as u64) + 1);
        }
    }
    let prefix = (0..bound)
        .map(|k| {
            let (i, j) = cantor_unpair(k);
            t.value(i as usize, j as usize)
        })
        .collect();
    Ok(EvSeq::make(prefix, 0))
}

/// Reads `count` components back out of a packed sequence. Fails with
/// [`SeqError::TailNotZero`] when the input is not eventually zero (such
/// a sequence is not a finite-support packing).
pub fn lambda_unpack(s: &EvSeq, count: usize) -> Result<SeqTuple, SeqError> {
    if !s.has_zero_tail() {
        return Err(SeqError::TailNotZero);
    }
    let plen = s.prefix_len() as u64;
    let components = (0..count as u64)
        .map(|i| {
            // cantor_pair(i, j) >= j, so positions beyond plen read 0.
            let vals = (0..plen)
                .map(|j| s.at(cantor_pair(i, j) as usize))
                .collect();
            EvSeq::make(vals, 0)
        })
        .collect();
    Ok(SeqTuple::new(components))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Positional interleaving: even positions from `x`, odd from `y`.
pub fn interleave_pair(x: &EvSeq, y: &EvSeq) -> EvSeq {
    let lead = x.prefix_len().max(y.prefix_len());
    let period = lcm(x.cycle().len(), y.cycle().len());
    let value = |pos: usize| {
        if pos % 2 == 0 {
            x.at(pos / 2)
        } else {
            y.at(pos / 2)
        }
    };
    let prefix = (0..2 * lead).map(value).collect();
    let cycle = (0..2 * period).map(|k| value(2 * lead + k)).collect();
    EvSeq::periodic(prefix, cycle)
}

/// Right-nested interleaving of `n >= 1` components:
/// `[x0, x1, x2]` becomes `interleave(x0, interleave(x1, x2))`.
pub fn interleave_nested(components: &[EvSeq]) -> EvSeq {
    assert!(!components.is_empty(), "need at least one component");
    let mut iter = components.iter().rev();
    let mut acc = iter.next().unwrap().clone();
    for x in iter {
        acc = interleave_pair(x, &acc);
    }
    acc
}

/// Inverse of [`interleave_nested`] at a known arity.
pub fn split_nested(s: &EvSeq, arity: usize) -> Vec<EvSeq> {
    assert!(arity >= 1, "need at least one component");
    let mut out = Vec::with_capacity(arity);
    let mut rest = s.clone();
    for _ in 0..arity - 1 {
        let (head, tail) = split_pair(&rest);
        out.push(head);
        rest = tail;
    }
    out.push(rest);
    out
}

/// Inverse of [`interleave_pair`].
pub fn split_pair(s: &EvSeq) -> (EvSeq, EvSeq) {
    let lead = s.prefix_len();
    let period = s.cycle().len();
    let comp = |offset: usize| {
        let prefix = (0..lead).map(|i| s.at(2 * i + offset)).collect();
        let cycle = (0..period).map(|i| s.at(2 * (lead + i) + offset)).collect();
        EvSeq::periodic(prefix, cycle)
    };
    (comp(0), comp(1))
}
