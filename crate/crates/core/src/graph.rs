//! The de Bruijn graph `G_p` and edge-count vectors.
//!
//! Edges of `G_p` are the `2^p` words of length `p`, vertices the `2^(p-1)`
//! words of length `p-1`. Edge `a = a_1...a_p` runs from `a_1...a_(p-1)` to
//! `a_2...a_p`, so a cyclic word of length `n` is exactly a closed walk of `n`
//! edges and its cyclic `p`-windows are the edges it traverses.
//!
//! A cluster of `p`-close words is labelled by the edge-count vector of the
//! walk. Admissible vectors are those realised by at least one closed walk:
//! balanced at every vertex and with a connected support. They are
//! enumerated by choosing the counts of the `2^(p-1)` edges with `a_1 = 0`
//! freely and solving the balance equations for the rest.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{low_mask, BinaryWord, PWord};

/// Counts `n_a` of every edge `a` of `G_p`, indexed by the integer value of `a`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeCountVector {
    p: u32,
    counts: Vec<u32>,
}

impl EdgeCountVector {
    pub fn new(p: u32, counts: Vec<u32>) -> Result<Self> {
        if p == 0 || p > 24 {
            return Err(Error::param(format!("order p={p} out of range")));
        }
        if counts.len() != 1usize << p {
            return Err(Error::param(format!(
                "expected {} counts for p={p}, got {}",
                1usize << p,
                counts.len()
            )));
        }
        Ok(EdgeCountVector { p, counts })
    }

    pub(crate) fn from_counts_unchecked(p: u32, counts: Vec<u32>) -> Self {
        debug_assert_eq!(counts.len(), 1usize << p);
        EdgeCountVector { p, counts }
    }

    /// The vector with every edge visited `per_edge` times.
    pub fn homogeneous(p: u32, per_edge: u32) -> Result<Self> {
        Self::new(p, vec![per_edge; 1usize << p])
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn get(&self, edge: PWord) -> u32 {
        self.counts[edge.index()]
    }

    /// Total walk length `n = sum_a n_a`.
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    /// The vector of a constant word: a single self-loop carries the whole walk.
    pub fn is_constant_word(&self) -> bool {
        let last = self.counts.len() - 1;
        let nz: Vec<usize> = (0..self.counts.len())
            .filter(|&i| self.counts[i] > 0)
            .collect();
        nz.len() == 1 && (nz[0] == 0 || nz[0] == last)
    }
}

impl fmt::Display for EdgeCountVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                f.write_str(":")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for EdgeCountVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EdgeCountVector(p={}; {})", self.p, self)
    }
}

/// Parses the colon-joined form used in census files; `p` is inferred from the length.
impl FromStr for EdgeCountVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let counts = s
            .split(':')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|e| Error::param(format!("bad count {t:?}: {e}")))
            })
            .collect::<Result<Vec<u32>>>()?;
        let len = counts.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::param(format!(
                "vector length {len} is not 2^p with p >= 1"
            )));
        }
        EdgeCountVector::new(len.trailing_zeros(), counts)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeBruijnGraph {
    p: u32,
}

impl DeBruijnGraph {
    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn vertex_count(&self) -> usize {
        1usize << (self.p - 1)
    }

    pub fn edge_count(&self) -> usize {
        1usize << self.p
    }

    #[inline]
    pub fn tail(&self, edge: usize) -> usize {
        edge >> 1
    }

    #[inline]
    pub fn head(&self, edge: usize) -> usize {
        edge & (self.vertex_count() - 1)
    }

    pub fn out_edges(&self, vertex: usize) -> [usize; 2] {
        [2 * vertex, 2 * vertex + 1]
    }

    pub fn in_edges(&self, vertex: usize) -> [usize; 2] {
        [vertex, vertex + self.vertex_count()]
    }

    /// Edges that may follow `edge` in a walk: `a_2...a_p 0` and `a_2...a_p 1`.
    pub fn successors(&self, edge: usize) -> [usize; 2] {
        self.out_edges(self.head(edge))
    }

    pub fn follows(&self, a: usize, b: usize) -> bool {
        self.head(a) == self.tail(b)
    }
}

pub fn build_debruijn(p: u32) -> Result<DeBruijnGraph> {
    if !(2..=24).contains(&p) {
        return Err(Error::param(format!(
            "de Bruijn order p={p} must be in 2..=24"
        )));
    }
    Ok(DeBruijnGraph { p })
}

/// The closed walk traced by `x`: its `n` cyclic `p`-windows in order.
pub fn word_to_path(x: BinaryWord, p: u32) -> Vec<PWord> {
    x.windows(p).map(|bits| PWord { order: p, bits }).collect()
}

/// Visits of the closed walk of `x` on `G_q` to each vertex (`q-1`-bit word).
pub fn vertex_visit_counts(x: BinaryWord, q: u32) -> Vec<u32> {
    let mut visits = vec![0u32; 1usize << (q - 1)];
    let mask = low_mask(q - 1);
    for w in x.windows(q) {
        visits[(w & mask) as usize] += 1;
    }
    visits
}

/// Kirchhoff condition: inflow equals outflow at every vertex.
pub fn is_balanced(v: &EdgeCountVector) -> bool {
    if v.p() < 2 {
        return true;
    }
    let g = DeBruijnGraph { p: v.p() };
    let c = v.counts();
    (0..g.vertex_count()).all(|u| {
        let [o0, o1] = g.out_edges(u);
        let [i0, i1] = g.in_edges(u);
        c[o0] as u64 + c[o1] as u64 == c[i0] as u64 + c[i1] as u64
    })
}

/// Whether the edges with `n_a > 0` lie in one strongly connected piece.
pub fn support_connected(v: &EdgeCountVector) -> Result<bool> {
    if v.is_zero() {
        return Err(Error::param("support of the zero vector is empty"));
    }
    if v.p() < 2 {
        return Err(Error::param("support connectivity needs p >= 2"));
    }
    let g = DeBruijnGraph { p: v.p() };
    let c = v.counts();
    let support: Vec<usize> = (0..c.len()).filter(|&a| c[a] > 0).collect();
    let root = g.tail(support[0]);
    let reach = |forward: bool| {
        let mut seen = vec![false; g.vertex_count()];
        let mut stack = vec![root];
        seen[root] = true;
        while let Some(u) = stack.pop() {
            let edges = if forward {
                g.out_edges(u)
            } else {
                g.in_edges(u)
            };
            for a in edges {
                if c[a] == 0 {
                    continue;
                }
                let w = if forward { g.head(a) } else { g.tail(a) };
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    };
    let fwd = reach(true);
    let bwd = reach(false);
    Ok(support
        .iter()
        .all(|&a| fwd[g.tail(a)] && bwd[g.tail(a)] && fwd[g.head(a)] && bwd[g.head(a)]))
}

/// Rank of the vertex balance system for `G_p`, by exact elimination.
pub fn balance_rank(p: u32) -> Result<usize> {
    let g = build_debruijn(p)?;
    if p > 12 {
        return Err(Error::capacity(
            format!("balance rank for p={p}"),
            "use p <= 12",
        ));
    }
    let mut rows: Vec<Vec<i64>> = (0..g.vertex_count())
        .map(|u| {
            let mut r = vec![0i64; g.edge_count()];
            for a in g.out_edges(u) {
                r[a] += 1;
            }
            for a in g.in_edges(u) {
                r[a] -= 1;
            }
            r
        })
        .collect();
    Ok(integer_rank(&mut rows))
}

fn integer_rank(rows: &mut [Vec<i64>]) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != 0 {
                let (a, b) = (rows[rank][col], rows[r][col]);
                let pivot_row = rows[rank].clone();
                for (x, y) in rows[r].iter_mut().zip(&pivot_row) {
                    *x = *x * a - *y * b;
                }
                let g = rows[r].iter().fold(0i64, |g, &x| num_integer::gcd(g, x));
                if g > 1 {
                    rows[r].iter_mut().for_each(|x| *x /= g);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Largest `n` for which admissible vectors of order `p` are enumerated.
pub fn enumeration_limit(p: u32) -> Option<u32> {
    match p {
        2 | 3 => Some(200),
        4 => Some(40),
        _ => None,
    }
}

fn check_enumeration_capacity(n: u32, p: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::param("walk length n must be >= 1"));
    }
    match enumeration_limit(p) {
        Some(limit) if n <= limit => Ok(()),
        Some(limit) => Err(Error::capacity(
            format!("admissible-vector enumeration for p={p} supports n <= {limit}, got n={n}"),
            "use a smaller n, or the brute-force engine for n <= 28",
        )),
        None => Err(Error::capacity(
            format!("admissible-vector enumeration supports p in 2..=4, got p={p}"),
            "use the brute-force engine for n <= 28",
        )),
    }
}

/// Back-solves balance equations from the free counts `n_0..n_(H-1)`.
#[derive(Clone, Debug)]
pub struct AdmissibleEnumerator {
    n: u32,
    p: u32,
    half: usize,
    /// For the determined edge `half + u`: coefficients over the free counts.
    forms: Vec<Vec<i64>>,
    /// Determined edges that become evaluable once free index `j` is set.
    ready_at: Vec<Vec<usize>>,
}

impl AdmissibleEnumerator {
    pub fn new(n: u32, p: u32) -> Result<Self> {
        check_enumeration_capacity(n, p)?;
        Ok(Self::new_unchecked(n, p))
    }

    fn new_unchecked(n: u32, p: u32) -> Self {
        let half = 1usize << (p - 1);
        // n_{u+H} = n_{2u} + n_{2u+1} - n_u for u = 0..H-2; the all-ones
        // edge is fixed by the total length.
        let mut forms: Vec<Vec<i64>> = Vec::with_capacity(half - 1);
        for u in 0..half - 1 {
            let mut f = vec![0i64; half];
            for e in [2 * u, 2 * u + 1] {
                if e < half {
                    f[e] += 1;
                } else {
                    let prev = forms[e - half].clone();
                    f.iter_mut().zip(prev).for_each(|(x, y)| *x += y);
                }
            }
            f[u] -= 1;
            forms.push(f);
        }
        let mut ready_at = vec![Vec::new(); half];
        for (k, f) in forms.iter().enumerate() {
            let last = f.iter().rposition(|&c| c != 0).unwrap_or(0);
            ready_at[last].push(k);
        }
        AdmissibleEnumerator {
            n,
            p,
            half,
            forms,
            ready_at,
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Visits every admissible count vector whose first free count is `first`,
    /// in lexicographic order of the free counts.
    pub fn for_each_with_first(&self, first: u32, mut f: impl FnMut(&[u32])) {
        if first > self.n {
            return;
        }
        let mut free = vec![0i64; self.half];
        let mut full = vec![0u32; 2 * self.half];
        free[0] = first as i64;
        if self.forms_ok(0, &free) {
            self.descend(1, first as i64, &mut free, &mut full, &mut f);
        }
    }

    pub fn for_each(&self, mut f: impl FnMut(&[u32])) {
        for first in 0..=self.n {
            self.for_each_with_first(first, &mut f);
        }
    }

    fn forms_ok(&self, depth: usize, free: &[i64]) -> bool {
        self.ready_at[depth].iter().all(|&k| {
            self.forms[k]
                .iter()
                .zip(free)
                .map(|(c, x)| c * x)
                .sum::<i64>()
                >= 0
        })
    }

    fn descend(
        &self,
        depth: usize,
        used: i64,
        free: &mut Vec<i64>,
        full: &mut Vec<u32>,
        f: &mut impl FnMut(&[u32]),
    ) {
        let n = self.n as i64;
        if depth == self.half {
            let mut total = used;
            for (i, &x) in free.iter().enumerate() {
                full[i] = x as u32;
            }
            for (k, form) in self.forms.iter().enumerate() {
                let v: i64 = form.iter().zip(free.iter()).map(|(c, x)| c * x).sum();
                full[self.half + k] = v as u32;
                total += v;
            }
            let ones = n - total;
            if ones < 0 {
                return;
            }
            full[2 * self.half - 1] = ones as u32;
            let v = EdgeCountVector::from_counts_unchecked(self.p, full.clone());
            debug_assert!(is_balanced(&v));
            if support_connected(&v).unwrap_or(false) {
                f(full);
            }
            return;
        }
        for x in 0..=(n - used) {
            free[depth] = x;
            if self.forms_ok(depth, free) {
                self.descend(depth + 1, used + x, free, full, f);
            }
        }
        free[depth] = 0;
    }
}

/// Every admissible edge-count vector of total `n`, deterministic order.
pub fn enumerate_admissible_vectors(n: u32, p: u32) -> Result<Vec<EdgeCountVector>> {
    let en = AdmissibleEnumerator::new(n, p)?;
    let mut out = Vec::new();
    en.for_each(|c| out.push(EdgeCountVector::from_counts_unchecked(p, c.to_vec())));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleCount {
    pub n: u32,
    pub p: u32,
    pub count: u64,
    /// `count / (w_p n^(2^(p-1)))` where the coefficient is known (p = 2: w = 1/4).
    pub leading_ratio: Option<f64>,
}

/// Exact number of non-empty clusters `N_p(n)`.
pub fn count_admissible(n: u32, p: u32) -> Result<AdmissibleCount> {
    use rayon::prelude::*;
    let en = AdmissibleEnumerator::new(n, p)?;
    let count: u64 = (0..=n)
        .into_par_iter()
        .map(|first| {
            let mut c = 0u64;
            en.for_each_with_first(first, |_| c += 1);
            c
        })
        .sum();
    let leading_ratio = match p {
        2 => Some(count as f64 / (n as f64 * n as f64 / 4.0)),
        _ => None,
    };
    Ok(AdmissibleCount {
        n,
        p,
        count,
        leading_ratio,
    })
}
