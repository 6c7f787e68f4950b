//! Executable forms of the matrix identities used to evaluate the Gaussian
//! integrals: the variable change that halves the phase count, the
//! determinants of `F`, `G`, `B`, and the spectra of `M_(p+1)` and `M~_p`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{
    build_q, build_q0_q1, build_q_prime, build_qp, check_p, matrix_power, max_abs_diff,
    trace_power, PhasePoint, RealMatrix, ValidationRecord,
};
use crate::error::{Error, Result};
use crate::numeric::rational_det;

/// Relative tolerance of the matrix identities.
pub const IDENTITY_TOLERANCE: f64 = 1e-10;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn rel_strict(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// `(F, G) = (1 - Q1 + Q_p, 1 - Q0 + Q_p)`.
pub fn build_f_g(p: u32) -> Result<(RealMatrix, RealMatrix)> {
    let (q0, q1) = build_q0_q1(p)?;
    let qp = build_qp(p)?;
    let id = DMatrix::identity(q0.nrows(), q0.ncols());
    Ok((&id - &q1 + &qp, &id - &q0 + &qp))
}

/// `Q0 sum_(r<p) (Q/2)^r`.
pub fn build_qbar(p: u32) -> Result<RealMatrix> {
    let q = build_q(p)? * 0.5;
    let (q0, _) = build_q0_q1(p)?;
    let mut sum = DMatrix::zeros(q.nrows(), q.ncols());
    for r in 0..p {
        sum += matrix_power(&q, r);
    }
    Ok(q0 * sum)
}

/// `B = 2^(-p-1) (Qbar + Qbar^T + 2 - (1 + 2p) Q_p)`.
pub fn build_b(p: u32) -> Result<RealMatrix> {
    let qbar = build_qbar(p)?;
    let qp = build_qp(p)?;
    let id: RealMatrix = DMatrix::identity(qbar.nrows(), qbar.ncols());
    let inner = &qbar + qbar.transpose() + id * 2.0 - qp * (1.0 + 2.0 * p as f64);
    Ok(inner * (-(p as f64) - 1.0).exp2())
}

/// `det B` in exact rational arithmetic. Every entry of `B` is a dyadic
/// rational with a short mantissa, so the float matrix converts exactly.
pub fn exact_det_b(p: u32) -> Result<BigRational> {
    check_p(p)?;
    if p > 6 {
        return Err(Error::capacity(
            format!("exact determinant of a {0}x{0} rational matrix", 1u32 << p),
            "p <= 6",
        ));
    }
    let b = build_b(p)?;
    let rows = (0..b.nrows())
        .map(|i| {
            (0..b.ncols())
                .map(|j| BigRational::from_float(b[(i, j)]).expect("finite"))
                .collect()
        })
        .collect();
    Ok(rational_det(rows))
}

/// `M_s = 1 + sum_(r=1)^(s-1) [(Q/2)^r + (Q^T/2)^r] - (2s - 1) Q_s` on `2^s` coordinates.
pub fn build_m(s: u32) -> Result<RealMatrix> {
    let q = build_q(s)? * 0.5;
    let qt = q.transpose();
    let mut m: RealMatrix = DMatrix::identity(q.nrows(), q.ncols());
    for r in 1..s {
        m += matrix_power(&q, r) + matrix_power(&qt, r);
    }
    m -= build_qp(s)? * (2.0 * s as f64 - 1.0);
    Ok(m)
}

/// `M~_p = 1 + M_p + 3 Q_p`.
pub fn build_m_tilde(p: u32) -> Result<RealMatrix> {
    let m = build_m(p)?;
    let id: RealMatrix = DMatrix::identity(m.nrows(), m.ncols());
    Ok(id + m + build_qp(p)? * 3.0)
}

/// Eigenvalues grouped by their nearest integer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// `(eigenvalue, multiplicity)`, ascending.
    pub eigenvalues: Vec<(i64, usize)>,
    /// Largest distance of an eigenvalue from its integer.
    pub residual: f64,
}

impl SpectrumReport {
    pub fn multiplicities(&self) -> BTreeMap<i64, usize> {
        self.eigenvalues.iter().copied().collect()
    }

    pub fn dimension(&self) -> usize {
        self.eigenvalues.iter().map(|e| e.1).sum()
    }
}

/// Spectrum of a symmetric matrix whose eigenvalues are expected to be integers.
pub fn integer_spectrum(m: &RealMatrix) -> SpectrumReport {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    let mut residual: f64 = 0.0;
    for &l in eig.eigenvalues.iter() {
        let r = l.round();
        residual = residual.max((l - r).abs() / r.abs().max(1.0));
        *counts.entry(r as i64).or_default() += 1;
    }
    SpectrumReport {
        eigenvalues: counts.into_iter().collect(),
        residual,
    }
}

/// Predicted spectrum of `M_(p+1)`.
pub fn m_spectrum(p: u32) -> BTreeMap<i64, usize> {
    let mut out = BTreeMap::new();
    out.insert(0, 1usize << p);
    for k in 0..p {
        *out.entry(k as i64 + 1).or_default() += 1 << (p - k - 1);
    }
    *out.entry(p as i64 + 1).or_default() += 1;
    out
}

/// Predicted spectrum of `M~_p`.
pub fn m_tilde_spectrum(p: u32) -> BTreeMap<i64, usize> {
    let mut out = BTreeMap::new();
    for k in 0..=p.saturating_sub(2) {
        *out.entry(k as i64 + 2).or_default() += 1 << (p - k - 2);
    }
    *out.entry(p as i64 + 1).or_default() += 1;
    *out.entry(4).or_default() += 1;
    *out.entry(1).or_default() += (1 << (p - 1)) - 1;
    out
}

fn det(m: &RealMatrix) -> f64 {
    m.clone().lu().determinant()
}

/// `det(1 - alpha (Q_(0,1) - Q_p)) = 1` and `det(1 - alpha (Q - Q_p)) = 1 - alpha`.
pub fn det_identity_check(alpha: f64, p: u32) -> Result<Vec<ValidationRecord>> {
    let q = build_q(p)?;
    let (q0, q1) = build_q0_q1(p)?;
    let qp = build_qp(p)?;
    let id: RealMatrix = DMatrix::identity(q.nrows(), q.ncols());
    let params = json!({ "p": p, "alpha": alpha });
    let d0 = det(&(&id - (&q0 - &qp) * alpha));
    let d1 = det(&(&id - (&q1 - &qp) * alpha));
    let dq = det(&(&id - (&q - &qp) * alpha));
    Ok(vec![
        ValidationRecord::new(
            "det_identity_q0",
            params.clone(),
            rel(d0, 1.0),
            IDENTITY_TOLERANCE,
        ),
        ValidationRecord::new(
            "det_identity_q1",
            params.clone(),
            rel(d1, 1.0),
            IDENTITY_TOLERANCE,
        ),
        ValidationRecord::new(
            "det_identity_q",
            params,
            rel(dq, 1.0 - alpha),
            IDENTITY_TOLERANCE,
        ),
    ])
}

/// Sample points used by [`validate_all`].
pub const DET_IDENTITY_ALPHAS: [f64; 5] = [-2.0, -0.5, 0.3, 1.0, 3.0];

pub fn det_f_g_check(p: u32) -> Result<Vec<ValidationRecord>> {
    let (f, g) = build_f_g(p)?;
    let params = json!({ "p": p });
    Ok(vec![
        ValidationRecord::new(
            "det_F",
            params.clone(),
            rel(det(&f), 1.0),
            IDENTITY_TOLERANCE,
        ),
        ValidationRecord::new("det_G", params, rel(det(&g), 1.0), IDENTITY_TOLERANCE),
    ])
}

/// `det B` against `2^(-2^p)` as stated, plus the exact value and the
/// rescaled form `det(2^p B) = 2^(-2^p)`.
pub fn det_b_check(p: u32) -> Result<Vec<ValidationRecord>> {
    let b = build_b(p)?;
    let d = 1usize << p;
    let params = json!({ "p": p });
    let target = (-(d as f64)).exp2();
    let numeric = det(&b);
    let mut out = vec![
        ValidationRecord::new(
            "B_symmetric",
            params.clone(),
            max_abs_diff(&b, &b.transpose()),
            0.0,
        ),
        ValidationRecord::new(
            "det_B",
            json!({ "p": p, "value": numeric, "expected": target }),
            rel_strict(numeric, target),
            IDENTITY_TOLERANCE,
        ),
    ];
    let scaled = det(&(&b * (p as f64).exp2()));
    out.push(ValidationRecord::new(
        "det_B_rescaled",
        json!({ "p": p, "value": scaled, "expected": target }),
        rel_strict(scaled, target),
        IDENTITY_TOLERANCE,
    ));
    if p <= 6 {
        let exact = exact_det_b(p)?;
        let expected = BigRational::new(BigInt::one(), BigInt::one() << ((p as usize + 1) * d));
        let log2 = -((p as f64 + 1.0) * d as f64);
        out.push(ValidationRecord::new(
            "det_B_exact",
            json!({ "p": p, "log2_value": if exact == expected { log2 } else { f64::NAN }, "expected_log2": log2 }),
            if exact == expected { 0.0 } else { f64::INFINITY },
            0.0,
        ));
    }
    Ok(out)
}

/// Block relation `[[B, -BC], [-C^T B, C^T B C]] = 2^(-p) M_(p+1)`, `C = G F^(-1)`.
pub fn matrices_connection_check(p: u32) -> Result<ValidationRecord> {
    let b = build_b(p)?;
    let (f, g) = build_f_g(p)?;
    let finv = f
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("F is singular".into()))?;
    let c = &g * finv;
    let d = b.nrows();
    let mut block = DMatrix::zeros(2 * d, 2 * d);
    block.view_mut((0, 0), (d, d)).copy_from(&b);
    block.view_mut((0, d), (d, d)).copy_from(&(-(&b * &c)));
    block
        .view_mut((d, 0), (d, d))
        .copy_from(&(-(c.transpose() * &b)));
    block
        .view_mut((d, d), (d, d))
        .copy_from(&(c.transpose() * &b * &c));
    let m = build_m(p + 1)? * (-(p as f64)).exp2();
    let scale = m.abs().max().max(1e-300);
    Ok(ValidationRecord::new(
        "matrices_connection",
        json!({ "p": p }),
        max_abs_diff(&block, &m) / scale,
        IDENTITY_TOLERANCE,
    ))
}

fn spectrum_record(
    check: &str,
    p: u32,
    m: &RealMatrix,
    expected: &BTreeMap<i64, usize>,
) -> ValidationRecord {
    let report = integer_spectrum(m);
    let matches = &report.multiplicities() == expected;
    ValidationRecord::new(
        check,
        json!({
            "p": p,
            "found": report.eigenvalues,
            "expected": expected.iter().map(|(k, v)| (*k, *v)).collect::<Vec<_>>(),
        }),
        if matches {
            report.residual
        } else {
            f64::INFINITY
        },
        IDENTITY_TOLERANCE,
    )
}

/// Spectra of `M_(p+1)` and `M~_p`, and `prod_(lambda != 0) lambda = det(M~_p) / 4`.
pub fn spectrum_check(p: u32) -> Result<Vec<ValidationRecord>> {
    let m = build_m(p + 1)?;
    let mt = build_m_tilde(p)?;
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let prod: f64 = eig.eigenvalues.iter().filter(|l| l.abs() > 0.5).product();
    let quarter = det(&mt) / 4.0;
    Ok(vec![
        spectrum_record("spectrum_M", p, &m, &m_spectrum(p)),
        spectrum_record("spectrum_M_tilde", p, &mt, &m_tilde_spectrum(p)),
        ValidationRecord::new(
            "product_identity",
            json!({ "p": p, "product": prod, "quarter_det_M_tilde": quarter }),
            rel_strict(prod, quarter),
            IDENTITY_TOLERANCE,
        ),
    ])
}

/// `Q^k Q_p = Q_p Q^k = 2^k Q_p`, `Q_(0,1)^k Q_p = Q_p`, `Q_p^k = Q_p`,
/// `Q0^T Q0 + Q1^T Q1 = 2`, and the trace values, for `k <= 2p`.
pub fn matrix_relations_check(p: u32) -> Result<Vec<ValidationRecord>> {
    let q = build_q(p)?;
    let (q0, q1) = build_q0_q1(p)?;
    let qp = build_qp(p)?;
    let mut rel_res: f64 = 0.0;
    let mut trace_res: f64 = 0.0;
    for k in 1..=2 * p {
        let qk = matrix_power(&q, k);
        let two_k = (k as f64).exp2();
        rel_res = rel_res
            .max(max_abs_diff(&(&qk * &qp), &(&qp * two_k)))
            .max(max_abs_diff(&(&qp * &qk), &(&qp * two_k)))
            .max(max_abs_diff(&(matrix_power(&q0, k) * &qp), &qp))
            .max(max_abs_diff(&(matrix_power(&q1, k) * &qp), &qp))
            .max(max_abs_diff(&matrix_power(&qp, k), &qp));
        for qx in [&q0, &q1] {
            let pk = matrix_power(qx, k);
            trace_res = trace_res
                .max((pk.trace() - 1.0).abs())
                .max(((&qp * &pk).trace() - 1.0).abs());
        }
        trace_res = trace_res.max((qk.trace() - two_k).abs());
    }
    let id: RealMatrix = DMatrix::identity(q.nrows(), q.ncols());
    let strange = max_abs_diff(&(q0.transpose() * &q0 + q1.transpose() * &q1), &(id * 2.0));
    let params = json!({ "p": p, "k_max": 2 * p });
    Ok(vec![
        ValidationRecord::new("matrix_relations", params.clone(), rel_res, 0.0),
        ValidationRecord::new("q0_q1_relation", params.clone(), strange, 0.0),
        ValidationRecord::new("trace_relations", params, trace_res, 0.0),
    ])
}

/// `(Q - Q_p)^k = Q^k - (2^k - 1) Q_p` and `(Q_(0,1) - Q_p)^k = (Q_(0,1) - Q_p) Q_(0,1)^(k-1)`.
pub fn power_identity_check(p: u32) -> Result<ValidationRecord> {
    let q = build_q(p)?;
    let (q0, q1) = build_q0_q1(p)?;
    let qp = build_qp(p)?;
    let mut res: f64 = 0.0;
    for k in 1..=2 * p {
        let lhs = matrix_power(&(&q - &qp), k);
        let rhs = matrix_power(&q, k) - &qp * ((k as f64).exp2() - 1.0);
        res = res.max(max_abs_diff(&lhs, &rhs));
        for qx in [&q0, &q1] {
            let lhs = matrix_power(&(qx - &qp), k);
            let rhs = (qx - &qp) * matrix_power(qx, k - 1);
            res = res.max(max_abs_diff(&lhs, &rhs));
        }
    }
    Ok(ValidationRecord::new(
        "power_identities",
        json!({ "p": p }),
        res,
        0.0,
    ))
}

fn random_phases(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len)
        .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
        .collect()
}

/// Conjugating `Q'(phi)` by `Lambda(xi)` and a common phase `e^(-i xi0)`
/// multiplies `Tr (.)^n` by `e^(-i n xi0)`, so `|Tr|` and every delta-constrained
/// product of traces are unchanged.
pub fn gauge_check(p: u32, seed: u64) -> Result<ValidationRecord> {
    check_p(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1usize << (p - 1);
    let mut res: f64 = 0.0;
    for _ in 0..20 {
        let phi = PhasePoint::full(p, random_phases(&mut rng, 2 * h))?;
        let xi = random_phases(&mut rng, h);
        let xi0 = rng.random::<f64>() * std::f64::consts::TAU;
        let a = build_q_prime(&phi)?;
        let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            h,
            xi.iter().map(|&x| Complex64::cis(x)),
        ));
        let conj = lam.adjoint();
        let b = (&lam * &a * &conj) * Complex64::cis(-xi0);
        for n in 1..=(2 * p + 3) {
            let ta = trace_power(&a, n);
            let tb = trace_power(&b, n);
            let expected = ta * Complex64::cis(-(n as f64) * xi0);
            res = res.max((tb - expected).norm() / (n as f64).exp2());
        }
    }
    Ok(ValidationRecord::new(
        "gauge_identity",
        json!({ "p": p, "seed": seed }),
        res,
        IDENTITY_TOLERANCE,
    ))
}

/// The gauge that removes the second-half phases: returns `(phi_reduced, xi0)`
/// with `Tr Q'(phi)^n = e^(i n xi0) Tr calQ(phi_reduced)^n`.
///
/// Row `i` of `Q'` has its second-half entry in column `j(i) = (i >> 1) + H/2`.
/// Setting `theta_(H-1) = 0`, `xi0 = phi_(2H-1)` and
/// `theta_i = theta_(j(i)) + xi0 - phi_(i+H)` (with `j(i) > i` for `i < H-1`)
/// makes every such entry of `e^(-i xi0) D Q' D^(-1)` equal to 1, where
/// `D = diag(e^(i theta))`.
pub fn reduce_phases(phi: &PhasePoint) -> Result<(PhasePoint, f64)> {
    if phi.is_reduced() {
        return Err(Error::param("phase reduction needs a full phase point"));
    }
    let p = phi.p();
    let h = 1usize << (p - 1);
    let ph = phi.phases();
    let xi0 = ph[2 * h - 1];
    let mut theta = vec![0.0; h];
    for i in (0..h - 1).rev() {
        let j = (i >> 1) + h / 2;
        theta[i] = theta[j] + xi0 - ph[i + h];
    }
    let reduced: Vec<f64> = (0..h)
        .map(|i| ph[i] + theta[i] - theta[i >> 1] - xi0)
        .collect();
    Ok((PhasePoint::reduced(p, reduced)?, xi0))
}

/// Half the phases can be gauged away: `Tr Q'(phi)^n = e^(i n xi0) Tr calQ(phi~)^n`.
pub fn phase_reduction_check(p: u32, seed: u64) -> Result<ValidationRecord> {
    check_p(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut res: f64 = 0.0;
    for _ in 0..20 {
        let phi = PhasePoint::full(p, random_phases(&mut rng, 1 << p))?;
        let (red, xi0) = reduce_phases(&phi)?;
        let a = build_q_prime(&phi)?;
        let b = build_q_prime(&red)?;
        for n in 1..=(2 * p + 3) {
            let lhs = trace_power(&a, n);
            let rhs = trace_power(&b, n) * Complex64::cis(n as f64 * xi0);
            res = res.max((lhs - rhs).norm() / (n as f64).exp2());
        }
    }
    Ok(ValidationRecord::new(
        "phase_reduction",
        json!({ "p": p, "seed": seed }),
        res,
        IDENTITY_TOLERANCE,
    ))
}

/// Determinant of the block change of variables `[[1, G F^(-1)], [0, 1]]`.
pub fn jacobian_check(p: u32) -> Result<ValidationRecord> {
    let (f, g) = build_f_g(p)?;
    let finv = f
        .try_inverse()
        .ok_or_else(|| Error::Numerical("F is singular".into()))?;
    let d = g.nrows();
    let mut t: RealMatrix = DMatrix::identity(2 * d, 2 * d);
    t.view_mut((0, d), (d, d)).copy_from(&(g * finv));
    Ok(ValidationRecord::new(
        "jacobian",
        json!({ "p": p }),
        rel(det(&t), 1.0),
        IDENTITY_TOLERANCE,
    ))
}

/// `Tr Q^k = 2^k`, `Q = R S`, and every entry of `(Q/2)^p` equal to `2^(-p)`.
pub fn construction_check(p: u32) -> Result<Vec<ValidationRecord>> {
    let q = build_q(p)?;
    let (r, s) = super::build_r_s(p)?;
    let qp = build_qp(p)?;
    let e = (-(p as f64)).exp2();
    let params = json!({ "p": p });
    let tr = (1..=2 * p)
        .map(|k| (matrix_power(&q, k).trace() - (k as f64).exp2()).abs())
        .fold(0.0, f64::max);
    Ok(vec![
        ValidationRecord::new("trace_Q_powers", params.clone(), tr, 0.0),
        ValidationRecord::new(
            "Q_equals_RS",
            params.clone(),
            max_abs_diff(&q, &(r * s)),
            0.0,
        ),
        ValidationRecord::new(
            "Qp_entries",
            params,
            qp.iter().map(|x| (x - e).abs()).fold(0.0, f64::max),
            0.0,
        ),
    ])
}

/// Every matrix check at order `p`.
pub fn validate_all(p: u32) -> Result<Vec<ValidationRecord>> {
    check_p(p)?;
    let mut out = construction_check(p)?;
    out.extend(matrix_relations_check(p)?);
    out.push(power_identity_check(p)?);
    for alpha in DET_IDENTITY_ALPHAS {
        out.extend(det_identity_check(alpha, p)?);
    }
    out.extend(det_f_g_check(p)?);
    out.push(jacobian_check(p)?);
    out.push(gauge_check(p, 0x5eed)?);
    out.push(phase_reduction_check(p, 0x5eed)?);
    out.extend(det_b_check(p)?);
    out.push(matrices_connection_check(p)?);
    out.extend(spectrum_check(p)?);
    Ok(out)
}

/// Absolute value of an exact rational as a float, for reports.
pub fn rational_magnitude_log2(x: &BigRational) -> f64 {
    let a = x.abs();
    crate::numeric::log2_big(a.numer().magnitude())
        - crate::numeric::log2_big(a.denom().magnitude())
}
