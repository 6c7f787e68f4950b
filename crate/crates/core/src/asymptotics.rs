//! Closed-form large-`n` estimates and their comparison with exact censuses.
//!
//! With `m = 2^(p-2)`:
//!
//! ```text
//! Z_k     ~ 2^(nk) k^(-m) (2^p / (pi n))^((k-1) m)
//! P_k     ~ k^(-m) (2^p / (pi n))^((k-1) m)
//! |C_max| ~ 2^n (2^p / (pi n))^m              (word level; divide by n for necklaces)
//! rho(t)  = (-ln t)^(m-1) / (m-1)!
//! P(t)    = t * sum_{j<m} (-ln t)^j / j!
//! ```
//!
//! `rho` is the density whose moments `int_0^1 rho(t) t^(k-1) dt` equal `k^(-m)`.
//! Every estimate is carried as a base-2 logarithm so that `n = 200` stays
//! finite.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::census::{best_census, max_cluster, moments, Level};
use crate::error::{Error, Result};
use crate::numeric::log2_big;

/// A closed-form value in log2 scale, split into its power-of-two part and
/// its power-law correction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticEstimate {
    pub n: u32,
    pub p: u32,
    pub k: Option<u32>,
    pub log2_value: f64,
    pub log2_power_of_two: f64,
    pub log2_power_law: f64,
}

impl AsymptoticEstimate {
    fn new(n: u32, p: u32, k: Option<u32>, log2_power_of_two: f64, log2_power_law: f64) -> Self {
        AsymptoticEstimate {
            n,
            p,
            k,
            log2_value: log2_power_of_two + log2_power_law,
            log2_power_of_two,
            log2_power_law,
        }
    }

    /// `2^log2_value`; infinite when out of `f64` range.
    pub fn value(&self) -> f64 {
        self.log2_value.exp2()
    }
}

fn check(n: u32, p: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::param("n must be >= 1"));
    }
    if !(2..=30).contains(&p) {
        return Err(Error::param(format!("p={p} must lie in 2..=30")));
    }
    Ok(())
}

fn half_dim(p: u32) -> f64 {
    (1u64 << (p - 2)) as f64
}

/// `log2(2^p / (pi n))`.
fn log2_scale(n: u32, p: u32) -> f64 {
    p as f64 - (PI * n as f64).log2()
}

/// Estimate of `Z_k`.
pub fn asymptotic_zk(n: u32, p: u32, k: u32) -> Result<AsymptoticEstimate> {
    check(n, p)?;
    if k == 0 {
        return Err(Error::param("k must be >= 1"));
    }
    let m = half_dim(p);
    let law = -m * (k as f64).log2() + (k - 1) as f64 * m * log2_scale(n, p);
    Ok(AsymptoticEstimate::new(
        n,
        p,
        Some(k),
        n as f64 * k as f64,
        law,
    ))
}

/// Estimate of the probability that `k` random orbits share a cluster.
pub fn asymptotic_pk(n: u32, p: u32, k: u32) -> Result<AsymptoticEstimate> {
    let z = asymptotic_zk(n, p, k)?;
    Ok(AsymptoticEstimate::new(
        n,
        p,
        Some(k),
        0.0,
        z.log2_power_law,
    ))
}

/// Estimate of the largest cluster.
pub fn asymptotic_max_cluster(n: u32, p: u32, level: Level) -> Result<AsymptoticEstimate> {
    check(n, p)?;
    let law = half_dim(p) * log2_scale(n, p);
    let shift = match level {
        Level::Word => 0.0,
        Level::Necklace => -(n as f64).log2(),
    };
    Ok(AsymptoticEstimate::new(n, p, None, n as f64 + shift, law))
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::param(format!("t={t} must lie in (0, 1]")));
    }
    Ok(())
}

/// Limiting density of relative cluster sizes.
pub fn rho(t: f64, p: u32) -> Result<f64> {
    check_t(t)?;
    check(1, p)?;
    let m = 1u64 << (p - 2);
    let u = -t.ln();
    let mut v = 1.0;
    for j in 1..m {
        v *= u / j as f64;
    }
    Ok(v)
}

/// `P(t) = int_0^t rho`; `P(0) = 0`.
pub fn p_theory(t: f64, p: u32) -> Result<f64> {
    check(1, p)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    check_t(t)?;
    let m = 1u64 << (p - 2);
    let u = -t.ln();
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..m {
        term *= u / j as f64;
        sum += term;
    }
    Ok(t * sum)
}

/// Double-exponential (tanh-sinh) quadrature on `[a, b]`, refined by halving
/// the step until successive estimates agree to `tol`. Endpoint
/// singularities of integrable type are handled since nodes never touch the
/// ends.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let width = b - a;
    let node = |t: f64| {
        let s = PI * t.sinh();
        // x and 1 - x, each computed without cancellation
        let x = 1.0 / (1.0 + (-s).exp());
        let y = 1.0 / (1.0 + s.exp());
        let w = PI * t.cosh() * x * y;
        (a + width * x, b - width * y, w)
    };
    let t_max = 4.0;
    let eval = |t: f64| {
        let (x, xr, w) = node(t);
        if w == 0.0 || x <= a || xr >= b {
            0.0
        } else {
            f(x) * w
        }
    };
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= t_max {
        sum += eval(k as f64 * h) + eval(-(k as f64) * h);
        k += 1;
    }
    let mut prev = sum * h * width;
    for _ in 0..12 {
        h /= 2.0;
        let mut k = 1;
        while k as f64 * h <= t_max {
            sum += eval(k as f64 * h) + eval(-(k as f64) * h);
            k += 2;
        }
        let est = sum * h * width;
        if (est - prev).abs() <= tol * est.abs().max(1.0) {
            return Ok(est);
        }
        prev = est;
    }
    Err(Error::Numerical(format!(
        "quadrature did not reach tolerance {tol}"
    )))
}

/// `int_0^1 rho(t) t^(k-1) dt`.
pub fn rho_moment(k: u32, p: u32) -> Result<f64> {
    check(1, p)?;
    tanh_sinh(
        |t| rho(t, p).unwrap_or(0.0) * t.powi(k as i32 - 1),
        0.0,
        1.0,
        1e-13,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    Moment,
    MaxCluster,
}

/// One comparison point between an exact value and its estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub n: u32,
    pub p: u32,
    pub kind: SeriesKind,
    /// Moment order; 0 for max-cluster rows.
    pub k: u32,
    pub exact_log2: f64,
    pub asymptotic_log2: f64,
    pub ratio: f64,
}

/// Exact/asymptotic ratios of `Z_k` for each `n` in the range and each `k`,
/// plus word-level `|C_max|` rows at multiples of `2^p`.
pub fn ratio_series(
    n_from: u32,
    n_to: u32,
    step: u32,
    p: u32,
    k_list: &[u32],
) -> Result<Vec<RatioRow>> {
    if step == 0 || n_from == 0 || n_from > n_to {
        return Err(Error::param("need 1 <= n_from <= n_to and step >= 1"));
    }
    let mut rows = Vec::new();
    for n in (n_from..=n_to).step_by(step as usize) {
        let table = best_census(n, p)?;
        for &k in k_list {
            let exact = log2_big(&moments(&table, k, Level::Word)?);
            let est = asymptotic_zk(n, p, k)?.log2_value;
            rows.push(RatioRow {
                n,
                p,
                kind: SeriesKind::Moment,
                k,
                exact_log2: exact,
                asymptotic_log2: est,
                ratio: (exact - est).exp2(),
            });
        }
        if n % (1 << p) == 0 {
            let exact = log2_big(&max_cluster(&table)?.size_words);
            let est = asymptotic_max_cluster(n, p, Level::Word)?.log2_value;
            rows.push(RatioRow {
                n,
                p,
                kind: SeriesKind::MaxCluster,
                k: 0,
                exact_log2: exact,
                asymptotic_log2: est,
                ratio: (exact - est).exp2(),
            });
        }
    }
    Ok(rows)
}
