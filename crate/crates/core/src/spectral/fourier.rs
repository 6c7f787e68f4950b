//! Exact cluster sizes and moments from traces on a discrete phase grid.
//!
//! `T(phi) = Tr(Q Lambda(phi))^n` is a trigonometric polynomial whose
//! frequencies are the count vectors, each entry in `0..=n`. Sampling at
//! `phi = 2 pi m / L` with `L >= n + 1` keeps distinct vectors distinct modulo
//! `L`, so the discrete transform recovers every coefficient exactly:
//!
//! ```text
//! |C_n| = L^(-D) sum_m T(2 pi m / L) e^(-2 pi i (n, m) / L)
//! ```
//!
//! For moments the reduced matrix is used: an admissible vector is fixed by
//! its first `H` counts and `n`, so the `H`-phase transform is just as exact.
//! `Z_k` is the `k`-fold cyclic convolution of the sampled traces at zero.

use num_bigint::BigUint;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{build_q_prime, check_p, flatten, trace_power_flat, PhasePoint};
use crate::error::{Error, Result};
use crate::graph::EdgeCountVector;
use crate::numeric::pairwise_sum;

/// Rounding tolerance for values recovered from a transform.
pub const ROUNDING_TOLERANCE: f64 = 1e-6;
/// Results above this cannot be certified as integers in double precision.
pub const FOURIER_MAX_VALUE: f64 = 4.5e15;
/// Largest number of complex products one convolution step may take.
pub const FOURIER_MAX_WORK: u64 = 1 << 32;

/// Traces sampled on the grid `{0..L-1}^D` for one `(n, p)`.
#[derive(Clone, Debug)]
pub struct TraceGrid {
    n: u32,
    p: u32,
    grid: u32,
    reduced: bool,
    values: Vec<Complex64>,
    roots: Vec<Complex64>,
}

impl TraceGrid {
    /// Full grid over all `2^p` phases (`reduced = false`) or over the first
    /// `2^(p-1)` (`reduced = true`).
    pub fn new(n: u32, p: u32, grid: u32, reduced: bool) -> Result<Self> {
        check_p(p)?;
        if n == 0 {
            return Err(Error::param("n must be >= 1"));
        }
        if grid < n + 1 {
            return Err(Error::param(format!(
                "grid size L={grid} must be at least n+1={}",
                n + 1
            )));
        }
        let dim = if reduced { 1u32 << (p - 1) } else { 1u32 << p };
        let points = (grid as u64)
            .checked_pow(dim)
            .filter(|&x| x <= 1 << 28)
            .ok_or_else(|| {
                Error::capacity(
                    format!("grid of {grid}^{dim} points is too large"),
                    "use a smaller n or p",
                )
            })?;
        let roots: Vec<Complex64> = (0..grid)
            .map(|j| Complex64::cis(std::f64::consts::TAU * j as f64 / grid as f64))
            .collect();
        let half = 1usize << (p - 1);
        let values: Vec<Complex64> = (0..points)
            .into_par_iter()
            .map(|idx| {
                let digits = grid_digits(idx, grid, dim as usize);
                let phases: Vec<f64> = digits
                    .iter()
                    .map(|&m| std::f64::consts::TAU * m as f64 / grid as f64)
                    .collect();
                let phi = if reduced {
                    PhasePoint::reduced(p, phases)
                } else {
                    PhasePoint::full(p, phases)
                }
                .expect("sized by construction");
                let m = build_q_prime(&phi).expect("valid p");
                trace_power_flat(&flatten(&m), half, n)
            })
            .collect();
        Ok(TraceGrid {
            n,
            p,
            grid,
            reduced,
            values,
            roots,
        })
    }

    pub fn dim(&self) -> usize {
        if self.reduced {
            1 << (self.p - 1)
        } else {
            1 << self.p
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// The coefficient of `e^(i (c, phi))` for the frequency vector `c`
    /// (length `dim`), as an unrounded complex number.
    pub fn coefficient(&self, c: &[u32]) -> Complex64 {
        let l = self.grid as u64;
        let d = self.dim();
        let chunks = chunk_ranges(self.values.len());
        let partial: Vec<Complex64> = chunks
            .par_iter()
            .map(|&(a, b)| {
                let terms: Vec<Complex64> = (a..b)
                    .map(|idx| {
                        let digits = grid_digits(idx as u64, self.grid, d);
                        let dot: u64 = digits.iter().zip(c).map(|(&m, &x)| m * x as u64).sum();
                        let k = ((l - dot % l) % l) as usize;
                        self.values[idx] * self.roots[k]
                    })
                    .collect();
                pairwise_sum(&terms)
            })
            .collect();
        pairwise_sum(&partial) / self.values.len() as f64
    }
}

fn grid_digits(mut idx: u64, grid: u32, dim: usize) -> Vec<u64> {
    let mut out = vec![0u64; dim];
    for slot in out.iter_mut() {
        *slot = idx % grid as u64;
        idx /= grid as u64;
    }
    out
}

fn grid_index(digits: &[u64], grid: u32) -> usize {
    digits
        .iter()
        .rev()
        .fold(0u64, |acc, &d| acc * grid as u64 + d) as usize
}

/// Fixed chunking, independent of the worker count, for reproducible sums.
fn chunk_ranges(len: usize) -> Vec<(usize, usize)> {
    const CHUNK: usize = 4096;
    (0..len.div_ceil(CHUNK))
        .map(|i| (i * CHUNK, ((i + 1) * CHUNK).min(len)))
        .collect()
}

pub(crate) fn round_checked(z: Complex64, what: &str) -> Result<BigUint> {
    if z.re.abs() > FOURIER_MAX_VALUE {
        return Err(Error::capacity(
            format!(
                "{what} is about {:.3e}, beyond exact double-precision rounding",
                z.re
            ),
            "use the census engines for values this large",
        ));
    }
    let r = z.re.round();
    let residual = (z.re - r).abs().max(z.im.abs());
    if residual > ROUNDING_TOLERANCE || r < 0.0 {
        return Err(Error::Numerical(format!(
            "{what} = {z} is not within {ROUNDING_TOLERANCE} of a nonnegative integer"
        )));
    }
    Ok(BigUint::from(r as u64))
}

/// `|C_n|` by discrete Fourier inversion over the full `L^(2^p)` grid (`p = 2`).
pub fn fourier_cluster_size(v: &EdgeCountVector, grid: u32) -> Result<BigUint> {
    if v.p() != 2 {
        return Err(Error::capacity(
            format!(
                "full-grid inversion needs L^(2^p) points; p={} is not supported",
                v.p()
            ),
            "use p = 2, or the BEST engine",
        ));
    }
    let n = v.total() as u32;
    let tg = TraceGrid::new(n, 2, grid, false)?;
    fourier_cluster_size_on(&tg, v)
}

/// As [`fourier_cluster_size`], reusing a precomputed full grid.
pub fn fourier_cluster_size_on(tg: &TraceGrid, v: &EdgeCountVector) -> Result<BigUint> {
    if tg.reduced || v.p() != tg.p || v.total() != tg.n as u64 {
        return Err(Error::param("trace grid does not match the vector"));
    }
    round_checked(tg.coefficient(v.counts()), "cluster size")
}

/// `Z_k` from the reduced trace grid by `k`-fold cyclic convolution.
pub fn fourier_moment(n: u32, p: u32, k: u32, grid: u32) -> Result<BigUint> {
    if !(2..=3).contains(&p) {
        return Err(Error::capacity(
            format!("Fourier moments support p in 2..=3, got p={p}"),
            "use the census engines",
        ));
    }
    if k == 0 {
        return Err(Error::param("k must be >= 1"));
    }
    let tg = TraceGrid::new(n, p, grid, true)?;
    fourier_moment_on(&tg, k)
}

/// As [`fourier_moment`], reusing a precomputed reduced grid.
pub fn fourier_moment_on(tg: &TraceGrid, k: u32) -> Result<BigUint> {
    if !tg.reduced {
        return Err(Error::param("moments need the reduced grid"));
    }
    if k == 1 {
        return round_checked(tg.values[0], "Z_1");
    }
    let d = tg.dim();
    let l = tg.grid;
    let size = tg.values.len();
    let neg = |idx: usize| -> usize {
        let digits = grid_digits(idx as u64, l, d);
        let negated: Vec<u64> = digits.iter().map(|&x| (l as u64 - x) % l as u64).collect();
        grid_index(&negated, l)
    };
    // g_1 = T, g_j = g_(j-1) (*) T; Z_k = L^(-D(k-1)) sum_m g_(k-1)(m) T(-m).
    let mut g = tg.values.clone();
    let steps = k - 2;
    if steps > 0
        && (size as u64)
            .saturating_mul(size as u64)
            .saturating_mul(steps as u64)
            > FOURIER_MAX_WORK
    {
        return Err(Error::capacity(
            format!("convolution over {size} grid points {steps} times is too large"),
            "use smaller n or k, or the census engines",
        ));
    }
    for _ in 0..steps {
        g = (0..size)
            .into_par_iter()
            .map(|m| {
                let md = grid_digits(m as u64, l, d);
                let terms: Vec<Complex64> = (0..size)
                    .map(|m2| {
                        let d2 = grid_digits(m2 as u64, l, d);
                        let diff: Vec<u64> = md
                            .iter()
                            .zip(&d2)
                            .map(|(&a, &b)| (a + l as u64 - b) % l as u64)
                            .collect();
                        g[m2] * tg.values[grid_index(&diff, l)]
                    })
                    .collect();
                pairwise_sum(&terms)
            })
            .collect();
    }
    let chunks = chunk_ranges(size);
    let partial: Vec<Complex64> = chunks
        .par_iter()
        .map(|&(a, b)| {
            let terms: Vec<Complex64> = (a..b).map(|m| g[m] * tg.values[neg(m)]).collect();
            pairwise_sum(&terms)
        })
        .collect();
    let scale = (size as f64).powi(k as i32 - 1);
    round_checked(pairwise_sum(&partial) / scale, &format!("Z_{k}"))
}
