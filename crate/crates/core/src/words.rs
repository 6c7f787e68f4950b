//! Binary words, necklaces and p-closeness.
//!
//! A word of length `n` is stored as the integer whose binary expansion,
//! most significant bit first, spells `x_1 x_2 ... x_n`. Same-length words
//! therefore compare lexicographically exactly when their integers do, and
//! exhaustive scans are plain integer ranges.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::EdgeCountVector;

/// Longest word the packed representation holds.
pub const MAX_WORD_LEN: u32 = 63;

#[inline]
pub(crate) fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// An element of `X_n`: a finite 0/1 sequence read with glued ends.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryWord {
    len: u32,
    bits: u64,
}

impl BinaryWord {
    pub fn new(len: u32, bits: u64) -> Result<Self> {
        if len == 0 || len > MAX_WORD_LEN {
            return Err(Error::param(format!(
                "word length must be in 1..={MAX_WORD_LEN}, got {len}"
            )));
        }
        if bits & !low_mask(len) != 0 {
            return Err(Error::param(format!(
                "bit pattern {bits:#b} does not fit in {len} symbols"
            )));
        }
        Ok(BinaryWord { len, bits })
    }

    /// Constructor for callers that already guarantee the invariants.
    #[inline]
    pub(crate) fn from_raw(len: u32, bits: u64) -> Self {
        debug_assert!((1..=MAX_WORD_LEN).contains(&len) && bits & !low_mask(len) == 0);
        BinaryWord { len, bits }
    }

    pub fn zeros(len: u32) -> Result<Self> {
        Self::new(len, 0)
    }

    pub fn ones(len: u32) -> Result<Self> {
        Self::new(len, low_mask(len.min(64)))
    }

    #[inline]
    pub fn len(&self) -> u32 {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Symbol `x_{i+1}` (0-based index `i`).
    #[inline]
    pub fn symbol(&self, i: u32) -> u8 {
        ((self.bits >> (self.len - 1 - (i % self.len))) & 1) as u8
    }

    pub fn count_ones(&self) -> u32 {
        self.bits.count_ones()
    }

    /// `x_{i+1} ... x_n x_1 ... x_i`.
    #[inline]
    pub fn rotate_left(&self, i: u32) -> Self {
        let n = self.len;
        let i = i % n;
        if i == 0 {
            return *self;
        }
        let bits = ((self.bits << i) | (self.bits >> (n - i))) & low_mask(n);
        BinaryWord { len: n, bits }
    }

    /// Bit pattern of the cyclic window of length `p` starting at symbol `i`.
    /// `p` may exceed the word length; the word then wraps more than once.
    #[inline]
    pub fn window(&self, i: u32, p: u32) -> u64 {
        let n = self.len;
        if p <= n {
            let rot = self.rotate_left(i);
            rot.bits >> (n - p)
        } else {
            (0..p).fold(0u64, |acc, j| (acc << 1) | self.symbol(i + j) as u64)
        }
    }

    /// All `n` cyclic windows of length `p`, in order of their starting symbol.
    pub fn windows(&self, p: u32) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).map(move |i| self.window(i, p))
    }

    /// Smallest `r >= 1` with `rotate_left(r) == self`; always divides `n`.
    pub fn period(&self) -> u32 {
        let n = self.len;
        (1..=n)
            .filter(|r| n % r == 0)
            .find(|&r| self.rotate_left(r) == *self)
            .unwrap_or(n)
    }
}

impl fmt::Display for BinaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", self.symbol(i))?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl FromStr for BinaryWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('[').trim_end_matches(']');
        let mut bits = 0u64;
        let mut len = 0u32;
        for c in s.chars() {
            let b = match c {
                '0' => 0,
                '1' => 1,
                _ => return Err(Error::param(format!("invalid symbol {c:?} in word {s:?}"))),
            };
            len += 1;
            if len > MAX_WORD_LEN {
                return Err(Error::param(format!("word {s:?} is too long")));
            }
            bits = (bits << 1) | b;
        }
        BinaryWord::new(len, bits)
    }
}

/// A word of length `p`, one edge of the de Bruijn graph `G_p`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PWord {
    pub order: u32,
    pub bits: u64,
}

impl PWord {
    pub fn new(order: u32, bits: u64) -> Result<Self> {
        if order == 0 || order > MAX_WORD_LEN || bits & !low_mask(order) != 0 {
            return Err(Error::param(format!(
                "invalid p-word {bits:#b} of order {order}"
            )));
        }
        Ok(PWord { order, bits })
    }

    pub fn index(&self) -> usize {
        self.bits as usize
    }
}

impl fmt::Display for PWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.order).rev() {
            write!(f, "{}", (self.bits >> i) & 1)?;
        }
        Ok(())
    }
}

impl FromStr for PWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let w: BinaryWord = s.parse()?;
        PWord::new(w.len(), w.bits())
    }
}

/// An element of `X_n / ~`, represented by its lexicographically minimal rotation.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Necklace {
    rep: BinaryWord,
}

impl Necklace {
    pub fn of(word: BinaryWord) -> Self {
        canonical_rotation(word)
    }

    pub fn representative(&self) -> BinaryWord {
        self.rep
    }

    pub fn len(&self) -> u32 {
        self.rep.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of distinct rotations, i.e. the minimal period of the orbit.
    pub fn period(&self) -> u32 {
        self.rep.period()
    }

    pub fn is_prime(&self) -> bool {
        is_prime_orbit(self.rep)
    }
}

impl fmt::Display for Necklace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.rep.fmt(f)
    }
}

impl fmt::Debug for Necklace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Necklace[{}]", self.rep)
    }
}

/// Cyclic window counts without range checks; `p` may exceed the word length.
pub fn cyclic_window_counts(x: BinaryWord, p: u32) -> EdgeCountVector {
    let mut counts = vec![0u32; 1usize << p];
    for w in x.windows(p) {
        counts[w as usize] += 1;
    }
    EdgeCountVector::from_counts_unchecked(p, counts)
}

/// The vector `n(x)`: how often each length-`p` word occurs cyclically in `x`.
pub fn cyclic_pword_counts(x: BinaryWord, p: u32) -> Result<EdgeCountVector> {
    if p == 0 || p > x.len() {
        return Err(Error::param(format!(
            "window length p={p} must satisfy 1 <= p <= n={}",
            x.len()
        )));
    }
    if p > 24 {
        return Err(Error::param(format!(
            "window length p={p} too large to tabulate"
        )));
    }
    Ok(cyclic_window_counts(x, p))
}

pub fn p_close(x: BinaryWord, y: BinaryWord, p: u32) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::param(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x == y {
        // reflexive, still validate p
        cyclic_pword_counts(x, p)?;
        return Ok(true);
    }
    Ok(cyclic_pword_counts(x, p)? == cyclic_pword_counts(y, p)?)
}

/// `d(x, y) = n - max{p : x ~p y}`, with the maximum over an empty set taken as 0.
pub fn ultrametric_distance(x: &Necklace, y: &Necklace) -> Result<u32> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::param(format!(
            "length mismatch: {} vs {}",
            n,
            y.len()
        )));
    }
    if x == y {
        return Ok(0);
    }
    let (a, b) = (x.representative(), y.representative());
    // closeness is monotone in p, so the first failure ends the scan
    let mut deepest = 0;
    for p in 1..=n.min(24) {
        if cyclic_window_counts(a, p) == cyclic_window_counts(b, p) {
            deepest = p;
        } else {
            break;
        }
    }
    Ok(n - deepest)
}

pub fn canonical_rotation(x: BinaryWord) -> Necklace {
    let rep =
        (1..x.len())
            .map(|i| x.rotate_left(i))
            .fold(x, |best, r| if r.bits < best.bits { r } else { best });
    Necklace { rep }
}

pub fn is_prime_orbit(x: BinaryWord) -> bool {
    x.period() == x.len()
}

/// All `2^n` words in ascending order.
pub fn enumerate_words(n: u32) -> Result<impl Iterator<Item = BinaryWord> + Clone> {
    if n == 0 || n > 40 {
        return Err(Error::param(format!(
            "enumeration length must be in 1..=40, got {n}"
        )));
    }
    Ok((0..(1u64 << n)).map(move |b| BinaryWord::from_raw(n, b)))
}

/// Necklaces of length `n` in ascending order of their representatives
/// (Fredricksen-Kessler-Maiorana generation restricted to necklaces).
pub fn enumerate_necklaces(n: u32) -> Result<NecklaceIter> {
    if n == 0 || n > MAX_WORD_LEN {
        return Err(Error::param(format!(
            "necklace length must be in 1..={MAX_WORD_LEN}, got {n}"
        )));
    }
    Ok(NecklaceIter {
        n: n as usize,
        a: vec![0; n as usize + 1],
        started: false,
        done: false,
    })
}

pub struct NecklaceIter {
    n: usize,
    // 1-based working string
    a: Vec<u8>,
    started: bool,
    done: bool,
}

impl NecklaceIter {
    fn current(&self) -> Necklace {
        let bits = self.a[1..]
            .iter()
            .fold(0u64, |acc, &s| (acc << 1) | s as u64);
        Necklace {
            rep: BinaryWord::from_raw(self.n as u32, bits),
        }
    }
}

impl Iterator for NecklaceIter {
    type Item = Necklace;

    fn next(&mut self) -> Option<Necklace> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.current());
        }
        let n = self.n;
        loop {
            let mut i = n;
            while i > 0 && self.a[i] == 1 {
                i -= 1;
            }
            if i == 0 {
                self.done = true;
                return None;
            }
            self.a[i] = 1;
            for j in i + 1..=n {
                self.a[j] = self.a[j - i];
            }
            if n % i == 0 {
                return Some(self.current());
            }
        }
    }
}

/// One level of the cluster hierarchy: the classes of `p`-close necklaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterTreeLevel {
    pub level: u32,
    /// Classes sorted by their smallest member; members sorted ascending.
    pub classes: Vec<Vec<Necklace>>,
}

impl ClusterTreeLevel {
    /// True when every class of `self` lies inside a single class of `coarser`.
    pub fn refines(&self, coarser: &ClusterTreeLevel) -> bool {
        let mut owner = std::collections::HashMap::new();
        for (ci, class) in coarser.classes.iter().enumerate() {
            for x in class {
                owner.insert(*x, ci);
            }
        }
        self.classes.iter().all(|class| {
            let first = owner.get(&class[0]);
            first.is_some() && class.iter().all(|x| owner.get(x) == first)
        })
    }

    pub fn class_of(&self, x: &Necklace) -> Option<&[Necklace]> {
        self.classes
            .iter()
            .find(|c| c.binary_search(x).is_ok())
            .map(|c| c.as_slice())
    }
}

/// Partition levels `1..=p_max` of the given necklaces.
pub fn cluster_tree_of(necklaces: &[Necklace], p_max: u32) -> Result<Vec<ClusterTreeLevel>> {
    let Some(first) = necklaces.first() else {
        return Ok(Vec::new());
    };
    let n = first.len();
    if necklaces.iter().any(|x| x.len() != n) {
        return Err(Error::param("necklaces of different lengths"));
    }
    if p_max == 0 || p_max > n || p_max > 24 {
        return Err(Error::param(format!(
            "p_max={p_max} must satisfy 1 <= p_max <= n={n}"
        )));
    }
    let levels = (1..=p_max)
        .map(|p| {
            let mut groups: BTreeMap<EdgeCountVector, Vec<Necklace>> = BTreeMap::new();
            for x in necklaces {
                groups
                    .entry(cyclic_window_counts(x.representative(), p))
                    .or_default()
                    .push(*x);
            }
            let mut classes: Vec<Vec<Necklace>> = groups
                .into_values()
                .map(|mut c| {
                    c.sort();
                    c.dedup();
                    c
                })
                .collect();
            classes.sort();
            ClusterTreeLevel { level: p, classes }
        })
        .collect();
    Ok(levels)
}

/// Hierarchy over all necklaces of length `n` (optionally prime orbits only).
pub fn cluster_tree(n: u32, p_max: u32, prime_only: bool) -> Result<Vec<ClusterTreeLevel>> {
    if p_max < 2 || p_max > n {
        return Err(Error::param(format!(
            "p_max={p_max} must satisfy 2 <= p_max <= n={n}"
        )));
    }
    let necklaces: Vec<Necklace> = enumerate_necklaces(n)?
        .filter(|x| !prime_only || x.is_prime())
        .collect();
    cluster_tree_of(&necklaces, p_max)
}
