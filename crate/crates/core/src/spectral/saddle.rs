//! The saddle point of `F_n(phi) = log |Tr calQ(phi)^n|^2` at `phi = 0`.
//!
//! `F_n` is even in `phi`, so the gradient vanishes at the origin. Near it
//! `|Tr calQ^n|^2 ~ 2^(2n) exp(-(n/2) phi^T A phi)` with `A = -Hess F_n / n`,
//! and the Gaussian integral over the `2^(p-1)` reduced phases gives
//! `Z_2 ~ 2^(2n) (2 pi n)^(-2^(p-2)) det(A)^(-1/2)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{build_q_prime, check_p, PhasePoint, RealMatrix, ValidationRecord};
use crate::census::{best_census, moments, Level};
use crate::error::{Error, Result};
use crate::numeric::log2_big;

/// Step of the central-difference gradient.
pub const GRADIENT_STEP: f64 = 1e-5;
/// Step of the central-difference Hessian.
pub const SADDLE_STEP: f64 = 1e-4;
/// Bound on the gradient components at the origin.
pub const GRADIENT_TOLERANCE: f64 = 1e-8;
/// Relative tolerance on `det A` once `n >= 2p`.
pub const HESSIAN_TOLERANCE: f64 = 1e-5;
/// Relative tolerance of the Gaussian `Z_2` against the exact value.
pub const Z2_TOLERANCE: f64 = 0.1;

/// Smallest `n` at which the Gaussian `Z_2` is compared with the exact one:
/// the relative correction behaves like `4^(p-2) / n`.
pub fn z2_min_n(p: u32) -> u32 {
    16 << (2 * (p - 2))
}

/// `F_n(phi)` for a reduced phase point, evaluated on `calQ/2` to stay in range.
pub fn saddle_function(phi: &PhasePoint, n: u32) -> Result<f64> {
    if !phi.is_reduced() {
        return Err(Error::param(
            "the saddle function takes a reduced phase point",
        ));
    }
    let m = build_q_prime(phi)?.map(|z| z * 0.5);
    let t = super::trace_power(&m, n);
    Ok(t.norm_sqr().ln() + 2.0 * n as f64 * std::f64::consts::LN_2)
}

fn shifted(p: u32, base: &[f64], moves: &[(usize, f64)]) -> Result<PhasePoint> {
    let mut v = base.to_vec();
    for &(i, d) in moves {
        v[i] += d;
    }
    PhasePoint::reduced(p, v)
}

/// Central-difference gradient of `F_n` at `phi`.
pub fn saddle_gradient(phi: &PhasePoint, n: u32, h: f64) -> Result<Vec<f64>> {
    let p = phi.p();
    let base = phi.phases();
    (0..base.len())
        .map(|i| {
            let plus = saddle_function(&shifted(p, base, &[(i, h)])?, n)?;
            let minus = saddle_function(&shifted(p, base, &[(i, -h)])?, n)?;
            Ok((plus - minus) / (2.0 * h))
        })
        .collect()
}

/// Central-difference Hessian of `F_n` at `phi`.
pub fn saddle_hessian(phi: &PhasePoint, n: u32, h: f64) -> Result<RealMatrix> {
    let p = phi.p();
    let base = phi.phases();
    let d = base.len();
    let f0 = saddle_function(phi, n)?;
    let mut hess = DMatrix::zeros(d, d);
    for i in 0..d {
        let fp = saddle_function(&shifted(p, base, &[(i, h)])?, n)?;
        let fm = saddle_function(&shifted(p, base, &[(i, -h)])?, n)?;
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let f = |si: f64, sj: f64| {
                saddle_function(&shifted(p, base, &[(i, si * h), (j, sj * h)])?, n)
            };
            let v = (f(1.0, 1.0)? - f(1.0, -1.0)? - f(-1.0, 1.0)? + f(-1.0, -1.0)?) / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(hess)
}

/// Limit of `det A`: `2^(-p 2^(p-1))`.
pub fn saddle_det_limit(p: u32) -> f64 {
    (-(p as f64) * (1u64 << (p - 1)) as f64).exp2()
}

/// Outcome of [`saddle_report`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleReport {
    pub n: u32,
    pub p: u32,
    pub max_gradient: f64,
    pub det_a: f64,
    pub det_limit: f64,
    /// `log2` of the Gaussian estimate of `Z_2` built on the measured `det A`.
    pub z2_gaussian_log2: f64,
    /// `log2 Z_2` from the exact census, for `n >= z2_min_n(p)` when affordable.
    pub z2_exact_log2: Option<f64>,
}

/// Gradient, Hessian and Gaussian `Z_2` at the origin for `(n, p)`.
pub fn saddle_report(n: u32, p: u32) -> Result<SaddleReport> {
    check_p(p)?;
    if p > 4 || n > 200 {
        return Err(Error::capacity(
            format!("saddle check at n={n}, p={p}"),
            "p <= 4 and n <= 200",
        ));
    }
    if n < p {
        return Err(Error::param(format!("need n >= p, got n={n}, p={p}")));
    }
    let origin = PhasePoint::reduced(p, vec![0.0; 1 << (p - 1)])?;
    let grad = saddle_gradient(&origin, n, GRADIENT_STEP)?;
    let max_gradient = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
    let a = saddle_hessian(&origin, n, SADDLE_STEP)? * (-1.0 / n as f64);
    let det_a = a.lu().determinant();
    let m = (1u64 << (p - 2)) as f64;
    let z2_gaussian_log2 =
        2.0 * n as f64 - m * (std::f64::consts::TAU * n as f64).log2() - 0.5 * det_a.log2();
    let affordable = n >= z2_min_n(p)
        && match p {
            2 | 3 => n <= 200,
            4 => n <= 40,
            _ => false,
        };
    let z2_exact_log2 = if affordable {
        Some(log2_big(&moments(&best_census(n, p)?, 2, Level::Word)?))
    } else {
        None
    };
    Ok(SaddleReport {
        n,
        p,
        max_gradient,
        det_a,
        det_limit: saddle_det_limit(p),
        z2_gaussian_log2,
        z2_exact_log2,
    })
}

/// [`saddle_report`] as validation records. The determinant is compared with
/// its limit only for `n >= 2p`, where it is already exact.
pub fn saddle_check(n: u32, p: u32) -> Result<Vec<ValidationRecord>> {
    let r = saddle_report(n, p)?;
    let params = json!({ "n": n, "p": p });
    let mut out = vec![ValidationRecord::new(
        "saddle_gradient",
        params.clone(),
        r.max_gradient,
        GRADIENT_TOLERANCE,
    )];
    if n >= 2 * p {
        out.push(ValidationRecord::new(
            "saddle_hessian_det",
            json!({ "n": n, "p": p, "det_A": r.det_a, "limit": r.det_limit }),
            (r.det_a - r.det_limit).abs() / r.det_limit,
            HESSIAN_TOLERANCE,
        ));
    }
    if let Some(exact) = r.z2_exact_log2 {
        let ratio = (r.z2_gaussian_log2 - exact).exp2();
        out.push(ValidationRecord::new(
            "saddle_z2",
            json!({ "n": n, "p": p, "gaussian_over_exact": ratio }),
            (ratio - 1.0).abs(),
            Z2_TOLERANCE,
        ));
    }
    Ok(out)
}
