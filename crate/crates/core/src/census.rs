//! Exact cluster censuses, moments, distributions and edge-visit statistics.
//!
//! Three routes produce the map `n -> |C_n|`:
//!
//! * [`brute_census`] scans all `2^n` words (n <= 28);
//! * [`necklace_census`] scans canonical necklaces and also records necklace-level
//!   sizes (n <= 24);
//! * [`best_census`] enumerates admissible vectors and counts the closed walks of
//!   each one with the BEST theorem.
//!
//! For a balanced vector with strongly connected support the number of cyclic
//! words realizing it is
//!
//! ```text
//! |C_n| = n * T * prod_u (d_u - 1)! / prod_a n_a!
//! ```
//!
//! where `d_u` is the out-degree of vertex `u` in the multigraph with `n_a`
//! parallel copies of edge `a`, and `T` counts spanning arborescences rooted
//! at any support vertex. The formula counts Eulerian circuits with a marked
//! first edge, which are exactly the `n` rotations of each word.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::p_theory;
use crate::error::{Error, Result};
use crate::graph::{is_balanced, support_connected, AdmissibleEnumerator, EdgeCountVector};
use crate::numeric::{bareiss_det, factorials, ratio_f64, rational_to_f64};
use crate::words::{low_mask, BinaryWord};

/// Largest word length the exhaustive word scan accepts.
pub const BRUTE_MAX_N: u32 = 28;
/// Largest word length the necklace scan accepts.
pub const NECKLACE_MAX_N: u32 = 24;
/// Largest window order a census accepts.
pub const CENSUS_MAX_P: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Brute,
    Best,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Brute => "brute",
            Engine::Best => "best",
        })
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(Engine::Brute),
            "best" => Ok(Engine::Best),
            other => Err(Error::param(format!("unknown engine '{other}'"))),
        }
    }
}

/// Word level counts over `X_n`; necklace level over `X_n` modulo rotation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Word,
    Necklace,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Word => "word",
            Level::Necklace => "necklace",
        })
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word" => Ok(Level::Word),
            "necklace" => Ok(Level::Necklace),
            other => Err(Error::param(format!("unknown level '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterRecord {
    pub vector: EdgeCountVector,
    pub size_words: BigUint,
    pub size_necklaces: Option<BigUint>,
}

/// The complete partition of `X_n` (or of its prime orbits) into clusters.
///
/// Records are kept sorted by vector, so two tables built by different
/// engines compare equal record for record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusTable {
    n: u32,
    p: u32,
    engine: Engine,
    prime_only: bool,
    records: Vec<ClusterRecord>,
}

impl CensusTable {
    /// Assembles a table from records in any order. Duplicate vectors and
    /// vectors of the wrong order or length are rejected.
    pub fn from_records(
        n: u32,
        p: u32,
        engine: Engine,
        prime_only: bool,
        mut records: Vec<ClusterRecord>,
    ) -> Result<Self> {
        records.sort_by(|a, b| a.vector.cmp(&b.vector));
        for w in records.windows(2) {
            if w[0].vector == w[1].vector {
                return Err(Error::param(format!("duplicate vector {}", w[0].vector)));
            }
        }
        for r in &records {
            if r.vector.p() != p || r.vector.total() != n as u64 {
                return Err(Error::param(format!(
                    "vector {} does not match n={n}, p={p}",
                    r.vector
                )));
            }
        }
        Ok(CensusTable {
            n,
            p,
            engine,
            prime_only,
            records,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    /// Whether only prime orbits were counted.
    pub fn prime_only(&self) -> bool {
        self.prime_only
    }

    pub fn records(&self) -> &[ClusterRecord] {
        &self.records
    }

    /// Number of non-empty clusters `N_p(n)`.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, v: &EdgeCountVector) -> Option<&ClusterRecord> {
        self.records
            .binary_search_by(|r| r.vector.cmp(v))
            .ok()
            .map(|i| &self.records[i])
    }

    /// `sum |C_n|`; equals `2^n` for a full table.
    pub fn total_words(&self) -> BigUint {
        self.records.iter().map(|r| &r.size_words).sum()
    }

    pub fn has_necklace_sizes(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(|r| r.size_necklaces.is_some())
    }

    /// Number of necklaces `d_n` covered by the table.
    pub fn necklace_count(&self) -> Result<BigUint> {
        self.require_necklaces()?;
        Ok(self
            .records
            .iter()
            .map(|r| r.size_necklaces.as_ref().expect("checked"))
            .sum())
    }

    /// Fills necklace-level sizes for prime `n`, where every non-constant
    /// word has exactly `n` distinct rotations.
    pub fn derive_prime_necklace_sizes(&mut self) -> Result<()> {
        if !is_prime(self.n) {
            return Err(Error::State(format!(
                "necklace sizes follow from word sizes only for prime n; n={} needs a necklace scan",
                self.n
            )));
        }
        let n = BigUint::from(self.n);
        for r in &mut self.records {
            let size = if r.vector.is_constant_word() {
                r.size_words.clone()
            } else {
                let (q, rem) = r.size_words.div_rem(&n);
                if !rem.is_zero() {
                    return Err(Error::Validation(format!(
                        "cluster {} has size {} not divisible by n",
                        r.vector, r.size_words
                    )));
                }
                q
            };
            r.size_necklaces = Some(size);
        }
        Ok(())
    }

    fn require_necklaces(&self) -> Result<()> {
        if self.has_necklace_sizes() {
            Ok(())
        } else {
            Err(Error::State(
                "necklace-level sizes are not available for this table".into(),
            ))
        }
    }

    fn sizes(&self, level: Level) -> Result<Vec<&BigUint>> {
        match level {
            Level::Word => Ok(self.records.iter().map(|r| &r.size_words).collect()),
            Level::Necklace => {
                self.require_necklaces()?;
                Ok(self
                    .records
                    .iter()
                    .map(|r| r.size_necklaces.as_ref().expect("checked"))
                    .collect())
            }
        }
    }
}

pub(crate) fn is_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn check_census_p(p: u32) -> Result<()> {
    if !(2..=CENSUS_MAX_P).contains(&p) {
        return Err(Error::param(format!(
            "window order p={p} must lie in 2..={CENSUS_MAX_P}"
        )));
    }
    Ok(())
}

/// Packs per-word window counts into an integer key: 5 bits per edge when
/// `2^p * 5 <= 128` and counts stay below 32.
struct WindowKeyer {
    n: u32,
    p: u32,
    packed: bool,
}

impl WindowKeyer {
    fn new(n: u32, p: u32) -> Self {
        WindowKeyer {
            n,
            p,
            packed: p <= 4 && n < 32,
        }
    }

    fn counts(&self, bits: u64, out: &mut [u32]) {
        out.iter_mut().for_each(|c| *c = 0);
        let n = self.n;
        let p = self.p;
        if p <= n {
            let doubled = ((bits as u128) << n) | bits as u128;
            let mask = low_mask(p) as u128;
            for i in 0..n {
                let w = (doubled >> (2 * n - i - p)) & mask;
                out[w as usize] += 1;
            }
        } else {
            for w in BinaryWord::from_raw(n, bits).windows(p) {
                out[w as usize] += 1;
            }
        }
    }

    fn key(&self, counts: &[u32]) -> u128 {
        counts
            .iter()
            .enumerate()
            .fold(0u128, |k, (i, &c)| k | ((c as u128) << (5 * i)))
    }

    fn unkey(&self, key: u128) -> Vec<u32> {
        (0..1usize << self.p)
            .map(|i| ((key >> (5 * i)) & 31) as u32)
            .collect()
    }
}

#[derive(Default)]
struct Tally {
    packed: HashMap<u128, (u64, u64)>,
    general: HashMap<Vec<u32>, (u64, u64)>,
}

impl Tally {
    fn add(&mut self, keyer: &WindowKeyer, counts: &[u32], words: u64, necklaces: u64) {
        let slot = if keyer.packed {
            self.packed.entry(keyer.key(counts)).or_default()
        } else {
            self.general.entry(counts.to_vec()).or_default()
        };
        slot.0 += words;
        slot.1 += necklaces;
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (k, v) in other.packed {
            let s = self.packed.entry(k).or_default();
            s.0 += v.0;
            s.1 += v.1;
        }
        for (k, v) in other.general {
            let s = self.general.entry(k).or_default();
            s.0 += v.0;
            s.1 += v.1;
        }
        self
    }

    fn into_records(self, keyer: &WindowKeyer, with_necklaces: bool) -> Vec<ClusterRecord> {
        let p = keyer.p;
        let rec = |counts: Vec<u32>, (w, k): (u64, u64)| ClusterRecord {
            vector: EdgeCountVector::from_counts_unchecked(p, counts),
            size_words: BigUint::from(w),
            size_necklaces: with_necklaces.then(|| BigUint::from(k)),
        };
        let mut out: Vec<ClusterRecord> = self
            .packed
            .into_iter()
            .map(|(k, v)| rec(keyer.unkey(k), v))
            .chain(self.general.into_iter().map(|(c, v)| rec(c, v)))
            .collect();
        out.sort_by(|a, b| a.vector.cmp(&b.vector));
        out
    }
}

const CHUNK_BITS: u32 = 14;

fn chunks(n: u32) -> (u64, u64) {
    let bits = n.min(CHUNK_BITS);
    (1u64 << (n - bits), 1u64 << bits)
}

/// Word-level census by scanning every word of length `n`.
pub fn brute_census(n: u32, p: u32) -> Result<CensusTable> {
    check_census_p(p)?;
    if n == 0 {
        return Err(Error::param("word length n must be >= 1"));
    }
    if n > BRUTE_MAX_N {
        return Err(Error::capacity(
            format!("brute-force census supports n <= {BRUTE_MAX_N}, got n={n}"),
            "use the BEST engine (--engine best) for larger n",
        ));
    }
    let keyer = WindowKeyer::new(n, p);
    let (chunk_count, chunk_len) = chunks(n);
    let tally = (0..chunk_count)
        .into_par_iter()
        .map(|c| {
            let mut t = Tally::default();
            let mut counts = vec![0u32; 1 << p];
            for bits in c * chunk_len..(c + 1) * chunk_len {
                keyer.counts(bits, &mut counts);
                t.add(&keyer, &counts, 1, 0);
            }
            t
        })
        .reduce(Tally::default, Tally::merge);
    CensusTable::from_records(
        n,
        p,
        Engine::Brute,
        false,
        tally.into_records(&keyer, false),
    )
}

fn is_canonical(bits: u64, n: u32) -> bool {
    let mask = low_mask(n);
    let mut r = bits;
    for _ in 1..n {
        r = ((r << 1) | (r >> (n - 1))) & mask;
        if r < bits {
            return false;
        }
    }
    true
}

/// Census over necklaces, recording both word-level and necklace-level sizes.
/// With `prime_only`, necklaces whose period is a proper divisor of `n` are skipped.
pub fn necklace_census(n: u32, p: u32, prime_only: bool) -> Result<CensusTable> {
    check_census_p(p)?;
    if n == 0 {
        return Err(Error::param("word length n must be >= 1"));
    }
    if n > NECKLACE_MAX_N {
        return Err(Error::capacity(
            format!("necklace census supports n <= {NECKLACE_MAX_N}, got n={n}"),
            "for prime n use the BEST engine, whose word sizes divide by n",
        ));
    }
    let keyer = WindowKeyer::new(n, p);
    let (chunk_count, chunk_len) = chunks(n);
    let tally = (0..chunk_count)
        .into_par_iter()
        .map(|c| {
            let mut t = Tally::default();
            let mut counts = vec![0u32; 1 << p];
            for bits in c * chunk_len..(c + 1) * chunk_len {
                if !is_canonical(bits, n) {
                    continue;
                }
                let period = BinaryWord::from_raw(n, bits).period();
                if prime_only && period != n {
                    continue;
                }
                keyer.counts(bits, &mut counts);
                t.add(&keyer, &counts, period as u64, 1);
            }
            t
        })
        .reduce(Tally::default, Tally::merge);
    CensusTable::from_records(
        n,
        p,
        Engine::Brute,
        prime_only,
        tally.into_records(&keyer, true),
    )
}

/// BEST-theorem evaluator with a factorial table shared across vectors.
#[derive(Clone, Debug)]
pub struct BestCounter {
    factorials: Vec<BigUint>,
}

impl BestCounter {
    pub fn new(max_n: u32) -> Self {
        BestCounter {
            factorials: factorials(max_n),
        }
    }

    /// `|C_n|` for a balanced vector; 0 when the support is disconnected.
    pub fn size(&self, v: &EdgeCountVector) -> Result<BigUint> {
        if !is_balanced(v) {
            return Err(Error::param(format!("vector {v} is not balanced")));
        }
        if v.is_zero() {
            return Err(Error::param("the zero vector labels no cluster"));
        }
        if v.is_constant_word() {
            return Ok(BigUint::one());
        }
        if !support_connected(v)? {
            return Ok(BigUint::zero());
        }
        let n = v.total();
        if n as usize >= self.factorials.len() {
            return Err(Error::param(format!(
                "vector total {n} exceeds the factorial table ({} entries)",
                self.factorials.len()
            )));
        }
        let counts = v.counts();
        let half = counts.len() / 2;
        let out_deg: Vec<u64> = (0..half)
            .map(|u| counts[2 * u] as u64 + counts[2 * u + 1] as u64)
            .collect();
        let support: Vec<usize> = (0..half).filter(|&u| out_deg[u] > 0).collect();
        let index: HashMap<usize, usize> =
            support.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        // Laplacian L = D_out - A on support vertices; drop the first row/column.
        let m = support.len();
        let mut lap = vec![vec![BigInt::zero(); m]; m];
        for (a, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let (t, h) = (index[&(a >> 1)], index[&(a & (half - 1))]);
            lap[t][t] += BigInt::from(c);
            lap[t][h] -= BigInt::from(c);
        }
        let reduced: Vec<Vec<BigInt>> = lap[1..].iter().map(|row| row[1..].to_vec()).collect();
        let trees = bareiss_det(reduced)
            .to_biguint()
            .ok_or_else(|| Error::Numerical("negative arborescence count".into()))?;
        let mut num = trees * BigUint::from(n);
        for &u in &support {
            num *= &self.factorials[out_deg[u] as usize - 1];
        }
        let den: BigUint = counts
            .iter()
            .map(|&c| &self.factorials[c as usize])
            .product();
        let (q, r) = num.div_rem(&den);
        if !r.is_zero() {
            return Err(Error::Numerical(format!(
                "BEST count for {v} is not an integer"
            )));
        }
        Ok(q)
    }
}

/// `|C_n|` by the BEST theorem.
pub fn best_cluster_size(v: &EdgeCountVector) -> Result<BigUint> {
    let n = v.total().min(u32::MAX as u64) as u32;
    BestCounter::new(n).size(v)
}

/// Word-level census from the admissible vectors of `G_p`.
pub fn best_census(n: u32, p: u32) -> Result<CensusTable> {
    let en = AdmissibleEnumerator::new(n, p)?;
    let counter = BestCounter::new(n);
    let parts: Vec<Result<Vec<ClusterRecord>>> = (0..=n)
        .into_par_iter()
        .map(|first| {
            let mut vectors = Vec::new();
            en.for_each_with_first(first, |c| {
                vectors.push(EdgeCountVector::from_counts_unchecked(p, c.to_vec()))
            });
            vectors
                .into_iter()
                .map(|vector| {
                    let size_words = counter.size(&vector)?;
                    Ok(ClusterRecord {
                        vector,
                        size_words,
                        size_necklaces: None,
                    })
                })
                .collect()
        })
        .collect();
    let mut records = Vec::new();
    for part in parts {
        records.extend(part?);
    }
    CensusTable::from_records(n, p, Engine::Best, false, records)
}

/// Dispatches to the requested engine.
pub fn census(n: u32, p: u32, engine: Engine) -> Result<CensusTable> {
    match engine {
        Engine::Brute => brute_census(n, p),
        Engine::Best => best_census(n, p),
    }
}

/// `Z_k = sum |C|^k` (word level) or `sum |calC|^k` (necklace level).
pub fn moments(table: &CensusTable, k: u32, level: Level) -> Result<BigUint> {
    if k == 0 {
        return Err(Error::param("moment order k must be >= 1"));
    }
    let sizes = table.sizes(level)?;
    let parts: Vec<BigUint> = sizes.par_iter().map(|s| Pow::pow(*s, k)).collect();
    Ok(parts.iter().sum())
}

/// `P_k = calZ_k / d_n^k`: the chance that `k` random necklaces share a cluster.
pub fn prob_k(table: &CensusTable, k: u32) -> Result<f64> {
    let z = moments(table, k, Level::Necklace)?;
    let d = table.necklace_count()?;
    Ok(ratio_f64(&z, &Pow::pow(&d, k)))
}

/// The largest cluster; ties go to the lexicographically smallest vector.
pub fn max_cluster(table: &CensusTable) -> Result<&ClusterRecord> {
    let mut best: Option<&ClusterRecord> = None;
    for r in &table.records {
        if best.is_none_or(|b| r.size_words > b.size_words) {
            best = Some(r);
        }
    }
    best.ok_or_else(|| Error::State("empty census".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSample {
    pub t: f64,
    pub empirical: f64,
    pub theoretical: f64,
}

/// Distinct cluster sizes ascending, with the cumulative size-weighted mass.
fn size_steps(table: &CensusTable) -> Result<(Vec<BigUint>, Vec<BigUint>, BigUint)> {
    let mut sizes: Vec<&BigUint> = table.records.iter().map(|r| &r.size_words).collect();
    if sizes.is_empty() {
        return Err(Error::State("empty census".into()));
    }
    sizes.sort();
    let mut distinct: Vec<BigUint> = Vec::new();
    let mut cumulative: Vec<BigUint> = Vec::new();
    let mut acc = BigUint::zero();
    for s in sizes {
        acc += s;
        if distinct.last() == Some(s) {
            *cumulative.last_mut().expect("paired") = acc.clone();
        } else {
            distinct.push(s.clone());
            cumulative.push(acc.clone());
        }
    }
    Ok((distinct, cumulative, acc))
}

/// Size-weighted CDF of cluster sizes sampled at `t = j / bins`, `j = 0..=bins`.
pub fn empirical_distribution(table: &CensusTable, bins: u32) -> Result<Vec<DistributionSample>> {
    if bins == 0 {
        return Err(Error::param("bins must be >= 1"));
    }
    let (distinct, cumulative, total) = size_steps(table)?;
    let cmax = distinct.last().expect("nonempty").clone();
    let b = BigUint::from(bins);
    let mut out = Vec::with_capacity(bins as usize + 1);
    let mut idx = 0usize;
    for j in 0..=bins {
        // |C| <= (j / bins) |C_max|  <=>  |C| * bins <= j * |C_max|
        let bound = &cmax * j;
        while idx < distinct.len() && &distinct[idx] * &b <= bound {
            idx += 1;
        }
        let mass = if idx == 0 {
            0.0
        } else {
            ratio_f64(&cumulative[idx - 1], &total)
        };
        let t = j as f64 / bins as f64;
        out.push(DistributionSample {
            t,
            empirical: if j == bins { 1.0 } else { mass },
            theoretical: p_theory(t, table.p)?,
        });
    }
    Ok(out)
}

/// `sup_t |P_hat(t) - P(t)|` over `t` in `[0, 1]`, taken over the exact step
/// function rather than a grid. `P` is increasing, so on each step the extreme
/// deviation sits at one of its ends.
pub fn sup_distance_to_theory(table: &CensusTable) -> Result<f64> {
    let (distinct, cumulative, total) = size_steps(table)?;
    let cmax = distinct.last().expect("nonempty");
    let t_of = |s: &BigUint| ratio_f64(s, cmax);
    let p = table.p;
    let mut sup = p_theory(t_of(&distinct[0]), p)?;
    for i in 0..distinct.len() {
        let f = ratio_f64(&cumulative[i], &total);
        let left = p_theory(t_of(&distinct[i]), p)?;
        sup = sup.max((f - left).abs());
        if i + 1 < distinct.len() {
            let right = p_theory(t_of(&distinct[i + 1]), p)?;
            sup = sup.max((f - right).abs());
        }
    }
    Ok(sup)
}

/// `<n_a>_k = sum n_a |C|^k / sum |C|^k` as exact rationals.
pub fn mean_edge_visits_exact(table: &CensusTable, k: u32) -> Result<Vec<BigRational>> {
    if k == 0 {
        return Err(Error::param("weight exponent k must be >= 1"));
    }
    let records: Vec<&ClusterRecord> = table.records.iter().collect();
    weighted_visits(table.p, &records, |r| Pow::pow(&r.size_words, k))
}

pub fn mean_edge_visits(table: &CensusTable, k: u32) -> Result<Vec<f64>> {
    Ok(mean_edge_visits_exact(table, k)?
        .iter()
        .map(rational_to_f64)
        .collect())
}

fn weighted_visits(
    p: u32,
    records: &[&ClusterRecord],
    weight: impl Fn(&ClusterRecord) -> BigUint + Sync,
) -> Result<Vec<BigRational>> {
    let edges = 1usize << p;
    let weights: Vec<BigUint> = records.par_iter().map(|r| weight(r)).collect();
    let den: BigUint = weights.iter().sum();
    if den.is_zero() {
        return Err(Error::State("no clusters carry weight".into()));
    }
    let den = BigInt::from(den);
    Ok((0..edges)
        .map(|a| {
            let num: BigUint = records
                .iter()
                .zip(&weights)
                .map(|(r, w)| w * r.vector.counts()[a])
                .sum();
            BigRational::new(BigInt::from(num), den.clone())
        })
        .collect())
}

/// `n_bar_a(t)`: size-weighted edge visits over clusters with
/// `|C| <= t |C_max|`. With no cluster below the threshold, the smallest
/// clusters are used (the `t -> 0` limit).
pub fn thresholded_edge_visits_exact(table: &CensusTable, t: f64) -> Result<Vec<BigRational>> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::param(format!("threshold t={t} must lie in (0, 1]")));
    }
    let cmax = &max_cluster(table)?.size_words;
    let tr = BigRational::from_float(t).expect("finite");
    let (tn, td) = (
        tr.numer().magnitude().clone(),
        tr.denom().magnitude().clone(),
    );
    let bound = cmax * &tn;
    let mut chosen: Vec<&ClusterRecord> = table
        .records
        .iter()
        .filter(|r| &r.size_words * &td <= bound)
        .collect();
    if chosen.is_empty() {
        let smallest = table
            .records
            .iter()
            .map(|r| &r.size_words)
            .min()
            .expect("nonempty");
        chosen = table
            .records
            .iter()
            .filter(|r| &r.size_words == smallest)
            .collect();
    }
    weighted_visits(table.p, &chosen, |r| r.size_words.clone())
}

pub fn thresholded_edge_visits(table: &CensusTable, t: f64) -> Result<Vec<f64>> {
    Ok(thresholded_edge_visits_exact(table, t)?
        .iter()
        .map(rational_to_f64)
        .collect())
}

/// Header of the census CSV.
pub const CENSUS_COLUMNS: [&str; 6] =
    ["n", "p", "engine", "vector", "size_words", "size_necklaces"];

/// Writes the census rows (header line included, no comment lines).
pub fn write_census_csv<W: std::io::Write>(table: &CensusTable, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(out);
    w.write_record(CENSUS_COLUMNS)?;
    for r in &table.records {
        w.write_record([
            table.n.to_string(),
            table.p.to_string(),
            table.engine.to_string(),
            r.vector.to_string(),
            r.size_words.to_string(),
            r.size_necklaces
                .as_ref()
                .map(|s| s.to_string())
                .unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a census CSV; lines starting with `#` are skipped.
pub fn read_census_csv<R: std::io::Read>(input: R) -> Result<CensusTable> {
    let mut rd = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != CENSUS_COLUMNS {
        return Err(Error::param(format!("unexpected census header {header:?}")));
    }
    let mut meta: Option<(u32, u32, Engine)> = None;
    let mut records = Vec::new();
    for row in rd.records() {
        let row = row?;
        let field = |i: usize| row.get(i).unwrap_or("");
        let parse_u32 = |s: &str| {
            s.parse::<u32>()
                .map_err(|_| Error::param(format!("bad integer '{s}'")))
        };
        let parse_big = |s: &str| {
            s.parse::<BigUint>()
                .map_err(|_| Error::param(format!("bad size '{s}'")))
        };
        let this = (
            parse_u32(field(0))?,
            parse_u32(field(1))?,
            field(2).parse::<Engine>()?,
        );
        match meta {
            None => meta = Some(this),
            Some(m) if m != this => {
                return Err(Error::param("census rows disagree on n, p or engine"))
            }
            _ => {}
        }
        let vector: EdgeCountVector = field(3).parse()?;
        let size_necklaces = match field(5) {
            "" => None,
            s => Some(parse_big(s)?),
        };
        records.push(ClusterRecord {
            vector,
            size_words: parse_big(field(4))?,
            size_necklaces,
        });
    }
    let (n, p, engine) = meta.ok_or_else(|| Error::param("census file has no rows"))?;
    let total: BigUint = records.iter().map(|r| &r.size_words).sum();
    let prime_only = total != (BigUint::one() << n);
    CensusTable::from_records(n, p, engine, prime_only, records)
}

/// `n / 2^p` as an exact rational.
pub fn uniform_visits(n: u32, p: u32) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::one() << p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn v(p: u32, c: &[u32]) -> EdgeCountVector {
        EdgeCountVector::new(p, c.to_vec()).unwrap()
    }

    fn size_of(t: &CensusTable, c: &[u32]) -> u64 {
        t.get(&v(t.p(), c)).unwrap().size_words.to_u64().unwrap()
    }

    #[test]
    fn small_brute_censuses() {
        let t = brute_census(3, 2).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(size_of(&t, &[3, 0, 0, 0]), 1);
        assert_eq!(size_of(&t, &[0, 0, 0, 3]), 1);
        assert_eq!(size_of(&t, &[1, 1, 1, 0]), 3);
        assert_eq!(size_of(&t, &[0, 1, 1, 1]), 3);
        let t = brute_census(2, 2).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(size_of(&t, &[0, 1, 1, 0]), 2);
        let t = brute_census(1, 2).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.total_words(), BigUint::from(2u32));
    }

    #[test]
    fn best_size_examples() {
        assert_eq!(
            best_cluster_size(&v(2, &[1, 1, 1, 0])).unwrap(),
            BigUint::from(3u32)
        );
        assert_eq!(
            best_cluster_size(&v(2, &[0, 2, 2, 0])).unwrap(),
            BigUint::from(2u32)
        );
        assert_eq!(
            best_cluster_size(&v(2, &[9, 0, 0, 0])).unwrap(),
            BigUint::one()
        );
        assert_eq!(
            best_cluster_size(&v(2, &[1, 0, 0, 1])).unwrap(),
            BigUint::zero()
        );
        assert!(matches!(
            best_cluster_size(&v(2, &[1, 1, 0, 0])),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn engines_agree_small() {
        for p in 2..=4 {
            for n in 1..=12 {
                let mut b = brute_census(n, p).unwrap();
                let e = best_census(n, p).unwrap();
                b.engine = Engine::Best;
                assert_eq!(b, e, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn necklace_census_matches_prime_derivation() {
        for n in [7u32, 11] {
            let nk = necklace_census(n, 2, false).unwrap();
            let mut best = best_census(n, 2).unwrap();
            best.derive_prime_necklace_sizes().unwrap();
            for r in best.records() {
                let other = nk.get(&r.vector).unwrap();
                assert_eq!(other.size_words, r.size_words);
                assert_eq!(other.size_necklaces, r.size_necklaces);
            }
            assert_eq!(
                nk.necklace_count().unwrap(),
                BigUint::from((2u32.pow(n) - 2) / n + 2)
            );
        }
        assert!(best_census(12, 2)
            .unwrap()
            .derive_prime_necklace_sizes()
            .is_err());
    }

    #[test]
    fn moments_and_probabilities() {
        let t = brute_census(3, 2).unwrap();
        assert_eq!(moments(&t, 1, Level::Word).unwrap(), BigUint::from(8u32));
        assert_eq!(moments(&t, 2, Level::Word).unwrap(), BigUint::from(20u32));
        assert!(matches!(
            moments(&t, 2, Level::Necklace),
            Err(Error::State(_))
        ));
        let nk = necklace_census(7, 2, false).unwrap();
        assert!((prob_k(&nk, 1).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(max_cluster(&t).unwrap().size_words, BigUint::from(3u32));
        // tie between the two size-3 clusters goes to the smaller vector
        assert_eq!(max_cluster(&t).unwrap().vector, v(2, &[0, 1, 1, 1]));
    }

    #[test]
    fn distribution_shape() {
        let t = best_census(20, 3).unwrap();
        let d = empirical_distribution(&t, 50).unwrap();
        assert_eq!(d.len(), 51);
        assert_eq!(d[50].empirical, 1.0);
        assert_eq!(d[0].empirical, 0.0);
        assert!(d.windows(2).all(|w| w[0].empirical <= w[1].empirical));
        assert!(d.windows(2).all(|w| w[0].theoretical <= w[1].theoretical));
        let sup = sup_distance_to_theory(&t).unwrap();
        let grid = d
            .iter()
            .map(|s| (s.empirical - s.theoretical).abs())
            .fold(0.0, f64::max);
        assert!(sup + 1e-12 >= grid);
    }

    #[test]
    fn edge_visit_sum_rules() {
        let t = best_census(16, 3).unwrap();
        let uniform = uniform_visits(16, 3);
        assert!(mean_edge_visits_exact(&t, 1)
            .unwrap()
            .iter()
            .all(|x| *x == uniform));
        for th in [0.01, 0.1, 0.5, 1.0] {
            let nb = thresholded_edge_visits_exact(&t, th).unwrap();
            let s: BigRational = nb.iter().sum();
            assert_eq!(s, BigRational::from_integer(16.into()));
        }
        assert!(thresholded_edge_visits_exact(&t, 1.0)
            .unwrap()
            .iter()
            .all(|x| *x == uniform));
        // far below every cluster: smallest clusters are the constant words
        let tiny = thresholded_edge_visits(&t, 1e-300).unwrap();
        assert_eq!(tiny[0], 8.0);
        assert_eq!(tiny[7], 8.0);
    }

    #[test]
    fn csv_round_trip() {
        let mut t = best_census(7, 2).unwrap();
        t.derive_prime_necklace_sizes().unwrap();
        let mut buf = Vec::new();
        write_census_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n,p,engine,vector,size_words,size_necklaces\n"));
        let with_comment = format!("# orbit-census v1\n{text}");
        let back = read_census_csv(with_comment.as_bytes()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn capacity_errors() {
        assert!(matches!(brute_census(29, 2), Err(Error::Capacity { .. })));
        assert!(matches!(best_census(41, 4), Err(Error::Capacity { .. })));
        assert!(matches!(best_census(10, 5), Err(Error::Capacity { .. })));
        assert!(matches!(
            necklace_census(25, 2, false),
            Err(Error::Capacity { .. })
        ));
    }
}
