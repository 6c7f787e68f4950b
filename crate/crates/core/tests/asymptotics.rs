use orbit_census::asymptotics::{
    asymptotic_max_cluster, asymptotic_pk, asymptotic_zk, p_theory, ratio_series, rho, rho_moment,
    SeriesKind,
};
use orbit_census::census::{necklace_census, prob_k};
use orbit_census::{Error, Level};
use proptest::prelude::*;

proptest! {
    #[test]
    fn zk_against_max_cluster(n in 2u32..=400, p in 2u32..=6) {
        let z2 = asymptotic_zk(n, p, 2).unwrap().log2_value;
        let cmax = asymptotic_max_cluster(2 * n, p, Level::Word).unwrap().log2_value;
        prop_assert!((z2 - cmax).abs() < 1e-9);
    }

    #[test]
    fn probability_chain(n in 2u32..=400, p in 2u32..=6, k in 1u32..=6) {
        let z = asymptotic_zk(n, p, k).unwrap().log2_value;
        let pk = asymptotic_pk(n, p, k).unwrap().log2_value;
        let nf = n as f64;
        let chained = z - k as f64 * nf.log2() - k as f64 * (nf - nf.log2());
        prop_assert!((pk - chained).abs() < 1e-9 * z.abs().max(1.0));
    }

    #[test]
    fn cdf_is_monotone(p in 2u32..=5, a in 0.001f64..1.0, b in 0.001f64..1.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(p_theory(lo, p).unwrap() <= p_theory(hi, p).unwrap());
        prop_assert!(rho(lo, p).unwrap() >= 0.0);
    }
}

#[test]
fn first_moment_is_exact() {
    for n in [1u32, 10, 200] {
        assert_eq!(asymptotic_zk(n, 3, 1).unwrap().log2_value, n as f64);
        assert_eq!(asymptotic_pk(n, 3, 1).unwrap().value(), 1.0);
    }
}

#[test]
fn cdf_closed_forms() {
    for t in [0.01, 0.2, 0.5, 0.9, 1.0] {
        assert!((p_theory(t, 2).unwrap() - t).abs() < 1e-15);
        assert!((p_theory(t, 3).unwrap() - t * (1.0 - f64::ln(t))).abs() < 1e-15);
    }
    for p in 2..=5 {
        assert!((p_theory(1.0, p).unwrap() - 1.0).abs() < 1e-15);
    }
    assert!(matches!(rho(0.0, 3), Err(Error::Parameter(_))));
}

#[test]
fn rho_moments() {
    for p in 2..=4u32 {
        for k in 1..=6u32 {
            let want = (k as f64).powf(-((1u32 << (p - 2)) as f64));
            assert!((rho_moment(k, p).unwrap() - want).abs() < 1e-8);
        }
    }
}

#[test]
fn second_probability_at_70() {
    let t = necklace_census(23, 3, false).unwrap();
    let exact = prob_k(&t, 2).unwrap();
    assert!(exact > 0.0);
    let table = orbit_census::census::best_census(71, 3).unwrap();
    let mut table = table;
    table.derive_prime_necklace_sizes().unwrap();
    let exact = prob_k(&table, 2).unwrap();
    let est = asymptotic_pk(71, 3, 2).unwrap().value();
    assert!((exact / est - 1.0).abs() < 0.2, "{exact} vs {est}");
}

#[test]
fn ratio_series_rows() {
    let rows = ratio_series(16, 32, 8, 3, &[2, 3]).unwrap();
    assert_eq!(
        rows.iter().filter(|r| r.kind == SeriesKind::Moment).count(),
        6
    );
    assert_eq!(
        rows.iter()
            .filter(|r| r.kind == SeriesKind::MaxCluster)
            .count(),
        3
    );
    assert!(rows.iter().all(|r| r.ratio > 0.5 && r.ratio < 1.5));
}
