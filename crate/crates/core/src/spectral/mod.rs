//! Transfer matrices of `G_p` and the identities built on them.
//!
//! Index conventions are 0-based: edge `a` is the integer value of its bits,
//! `H = 2^(p-1)`.
//!
//! * `Q[r][c] = 1` iff `c mod H == r >> 1`, i.e. edge `r` can follow edge `c`.
//!   `Q = Q0 + Q1` where `Q0` keeps the columns `< H` and `Q1` the rest,
//!   and `Q = R S` with `R` (`2^p x H`) and `S` (`H x 2^p`).
//! * `Q'(phi) = S Lambda(phi) R` is `H x H` with `Q'[i][i >> 1] = e^(i phi_i)`
//!   and `Q'[i][(i >> 1) + H/2] = e^(i phi_(i+H))`.
//! * The reduced matrix `calQ(phi)` is `Q'` with the second-half phases set
//!   to zero, so `Tr calQ(phi)^n = sum_n |C_n| e^(i sum_(a<H) n_a phi_a)`.
//!
//! Traces of powers are computed by repeated multiplication; the matrices
//! are tiny and not normal, so eigendecompositions would buy nothing.

mod fourier;
mod identities;
mod saddle;

pub use fourier::*;
pub use identities::*;
pub use saddle::*;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type RealMatrix = DMatrix<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;

/// Largest order the dense builders accept (`2^p <= 1024`).
pub const MAX_MATRIX_P: u32 = 10;

fn check_p(p: u32) -> Result<()> {
    if !(2..=MAX_MATRIX_P).contains(&p) {
        return Err(Error::param(format!(
            "order p={p} must lie in 2..={MAX_MATRIX_P}"
        )));
    }
    Ok(())
}

fn dims(p: u32) -> (usize, usize) {
    let d = 1usize << p;
    (d, d / 2)
}

/// Edge adjacency `Q` (0/1 entries).
pub fn build_q(p: u32) -> Result<RealMatrix> {
    check_p(p)?;
    let (d, h) = dims(p);
    Ok(DMatrix::from_fn(d, d, |r, c| {
        ((c % h) == (r >> 1)) as u8 as f64
    }))
}

/// `(Q0, Q1)`: the parts of `Q` in columns `< H` and `>= H`.
pub fn build_q0_q1(p: u32) -> Result<(RealMatrix, RealMatrix)> {
    check_p(p)?;
    let (d, h) = dims(p);
    let q0 = DMatrix::from_fn(d, d, |r, c| (c == r >> 1) as u8 as f64);
    let q1 = DMatrix::from_fn(d, d, |r, c| (c == (r >> 1) + h) as u8 as f64);
    Ok((q0, q1))
}

/// `(R, S)` with `Q = R S`.
pub fn build_r_s(p: u32) -> Result<(RealMatrix, RealMatrix)> {
    check_p(p)?;
    let (d, h) = dims(p);
    let r = DMatrix::from_fn(d, h, |i, j| (j == i >> 1) as u8 as f64);
    let s = DMatrix::from_fn(h, d, |i, j| (j == i || j == i + h) as u8 as f64);
    Ok((r, s))
}

/// `Q_p = (Q/2)^p`, by repeated multiplication.
pub fn build_qp(p: u32) -> Result<RealMatrix> {
    let half_q = build_q(p)? * 0.5;
    Ok(matrix_power(&half_q, p))
}

/// `M^k` by repeated multiplication (`k = 0` gives the identity).
pub fn matrix_power(m: &RealMatrix, k: u32) -> RealMatrix {
    let mut acc = DMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..k {
        acc = &acc * m;
    }
    acc
}

/// Phases on the edges of `G_p` (full, `2^p` entries) or on the first half
/// of them (reduced, `2^(p-1)` entries).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    p: u32,
    phases: Vec<f64>,
}

impl PhasePoint {
    pub fn full(p: u32, phases: Vec<f64>) -> Result<Self> {
        check_p(p)?;
        if phases.len() != 1 << p {
            return Err(Error::param(format!(
                "a full phase point for p={p} needs {} phases, got {}",
                1usize << p,
                phases.len()
            )));
        }
        Ok(PhasePoint { p, phases })
    }

    pub fn reduced(p: u32, phases: Vec<f64>) -> Result<Self> {
        check_p(p)?;
        if phases.len() != 1 << (p - 1) {
            return Err(Error::param(format!(
                "a reduced phase point for p={p} needs {} phases, got {}",
                1usize << (p - 1),
                phases.len()
            )));
        }
        Ok(PhasePoint { p, phases })
    }

    pub fn zero_full(p: u32) -> Result<Self> {
        Self::full(p, vec![0.0; 1 << p.min(MAX_MATRIX_P)])
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn is_reduced(&self) -> bool {
        self.phases.len() != 1 << self.p
    }

    /// The full point with the second-half phases set to zero.
    pub fn to_full(&self) -> PhasePoint {
        let mut phases = self.phases.clone();
        phases.resize(1 << self.p, 0.0);
        PhasePoint { p: self.p, phases }
    }
}

/// `Lambda(phi)`: the diagonal phase matrix.
pub fn build_lambda(phi: &PhasePoint) -> ComplexMatrix {
    let v: Vec<Complex64> = phi.phases.iter().map(|&x| Complex64::cis(x)).collect();
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(v))
}

/// `Q Lambda(phi)` for a full phase point.
pub fn build_q_lambda(phi: &PhasePoint) -> Result<ComplexMatrix> {
    let phi = phi.to_full();
    let q = build_q(phi.p)?.map(|x| Complex64::new(x, 0.0));
    Ok(q * build_lambda(&phi))
}

/// `Q'(phi) = S Lambda(phi) R`; a reduced point gives the reduced matrix `calQ(phi)`.
pub fn build_q_prime(phi: &PhasePoint) -> Result<ComplexMatrix> {
    let full = phi.to_full();
    let h = 1usize << (phi.p - 1);
    let quarter = h / 2;
    let mut m = DMatrix::from_element(h, h, Complex64::new(0.0, 0.0));
    for i in 0..h {
        m[(i, i >> 1)] += Complex64::cis(full.phases[i]);
        m[(i, (i >> 1) + quarter)] += Complex64::cis(full.phases[i + h]);
    }
    Ok(m)
}

/// Row-major copy, for the hot loops.
pub(crate) fn flatten(m: &ComplexMatrix) -> Vec<Complex64> {
    let d = m.nrows();
    (0..d * d).map(|k| m[(k / d, k % d)]).collect()
}

/// `Tr A^n` for a row-major `d x d` matrix, with a compensated trace sum.
pub(crate) fn trace_power_flat(a: &[Complex64], d: usize, n: u32) -> Complex64 {
    if n == 0 {
        return Complex64::new(d as f64, 0.0);
    }
    let mut acc = a.to_vec();
    let mut tmp = vec![Complex64::new(0.0, 0.0); d * d];
    for _ in 1..n {
        for i in 0..d {
            for j in 0..d {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    s += acc[i * d + k] * a[k * d + j];
                }
                tmp[i * d + j] = s;
            }
        }
        std::mem::swap(&mut acc, &mut tmp);
    }
    kahan_sum((0..d).map(|i| acc[i * d + i]))
}

pub(crate) fn kahan_sum(values: impl Iterator<Item = Complex64>) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut c = Complex64::new(0.0, 0.0);
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// `Tr M^n` by repeated multiplication.
pub fn trace_power(m: &ComplexMatrix, n: u32) -> Complex64 {
    trace_power_flat(&flatten(m), m.nrows(), n)
}

/// `Tr (Q Lambda(phi))^n = sum_n |C_n| e^(i (n, phi))`.
pub fn generating_trace(phi: &PhasePoint, n: u32) -> Result<Complex64> {
    Ok(trace_power(&build_q_lambda(phi)?, n))
}

/// `Tr calQ(phi)^n` (or `Tr Q'(phi)^n` for a full point), on the half-size matrix.
pub fn reduced_trace(phi: &PhasePoint, n: u32) -> Result<Complex64> {
    Ok(trace_power(&build_q_prime(phi)?, n))
}

/// One line of a validation report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationRecord {
    pub check: String,
    pub params: serde_json::Value,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ValidationRecord {
    pub(crate) fn new(
        check: &str,
        params: serde_json::Value,
        residual: f64,
        tolerance: f64,
    ) -> Self {
        ValidationRecord {
            check: check.to_string(),
            params,
            residual,
            tolerance,
            pass: residual.is_finite() && residual <= tolerance,
        }
    }
}

/// Largest absolute entry of `a - b`.
pub(crate) fn max_abs_diff(a: &RealMatrix, b: &RealMatrix) -> f64 {
    (a - b).abs().max()
}
