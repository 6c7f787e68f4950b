//! Acceptance gate: one PASS/FAIL line per clause.
//!
//! Four clauses are red on exact data and are listed in `KNOWN_RED`; the
//! gate fails if any other clause is red or if a listed clause turns green.

use std::collections::BTreeSet;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::{One, Pow, ToPrimitive};
use orbit_census::asymptotics::{asymptotic_max_cluster, asymptotic_zk, rho_moment};
use orbit_census::baker::{orbit_points, p_neighborhood_check};
use orbit_census::census::{
    best_census, brute_census, max_cluster, mean_edge_visits_exact, moments, necklace_census,
    sup_distance_to_theory, thresholded_edge_visits_exact, uniform_visits, CensusTable,
};
use orbit_census::graph::{count_admissible, enumerate_admissible_vectors};
use orbit_census::spectral::fourier_cluster_size_on;
use orbit_census::spectral::{
    det_b_check, det_f_g_check, det_identity_check, saddle_gradient, spectrum_check, PhasePoint,
    TraceGrid, DET_IDENTITY_ALPHAS,
};
use orbit_census::words::{enumerate_necklaces, p_close, ultrametric_distance};
use orbit_census::{log2_big, EdgeCountVector, Level, Necklace};

const KNOWN_RED: [&str; 4] = ["13a", "5b", "6a", "9c"];

struct Gate {
    red: BTreeSet<String>,
}

impl Gate {
    fn line(&mut self, id: &str, pass: bool, detail: impl AsRef<str>) {
        println!(
            "[{}] {id:<4} {}",
            if pass { "PASS" } else { "FAIL" },
            detail.as_ref()
        );
        if !pass {
            self.red.insert(id.to_string());
        }
    }
}

fn nk(s: &str) -> Necklace {
    Necklace::of(s.parse().unwrap())
}

fn partition_ok(t: &CensusTable) -> bool {
    t.total_words() == BigUint::one() << t.n()
}

fn cluster_tree(g: &mut Gate) {
    let start = Instant::now();
    let (x, y, z) = (nk("1101000"), nk("1100010"), nk("1100100"));
    let dxy = ultrametric_distance(&x, &y).unwrap();
    let dxz = ultrametric_distance(&x, &z).unwrap();
    let dzy = ultrametric_distance(&z, &y).unwrap();
    let close = [(x, y), (x, z), (z, y)]
        .iter()
        .all(|(a, b)| p_close(a.representative(), b.representative(), 2).unwrap());
    let elapsed = start.elapsed();
    g.line(
        "1",
        dxy == 4 && dxz == 5 && dzy == 5 && close && elapsed.as_micros() < 1000,
        format!(
            "distances {dxy},{dxz},{dzy} (want 4,5,5); all 2-close: {close}; {} us",
            elapsed.as_micros()
        ),
    );
}

fn engines(g: &mut Gate, partition: &mut Vec<(u32, u32, bool)>) {
    let mut mismatches = 0;
    let mut runs = 0;
    for p in 2..=4u32 {
        for n in p..=16 {
            let a = brute_census(n, p).unwrap();
            let b = best_census(n, p).unwrap();
            partition.push((n, p, partition_ok(&a) && partition_ok(&b)));
            runs += 1;
            let same = a.len() == b.len()
                && a.records()
                    .iter()
                    .zip(b.records())
                    .all(|(r, s)| r.vector == s.vector && r.size_words == s.size_words);
            if !same {
                mismatches += 1;
            }
        }
    }
    g.line(
        "2a",
        mismatches == 0,
        format!("brute = best on {runs} runs (n <= 16, p = 2..4), {mismatches} mismatches"),
    );

    let mut checked = 0;
    let mut bad = 0;
    for n in 1..=20u32 {
        let grid = TraceGrid::new(n, 2, n + 1, false).unwrap();
        let best = best_census(n, 2).unwrap();
        for v in enumerate_admissible_vectors(n, 2).unwrap() {
            checked += 1;
            let f = fourier_cluster_size_on(&grid, &v).unwrap();
            if Some(&f) != best.get(&v).map(|r| &r.size_words) {
                bad += 1;
            }
        }
    }
    g.line(
        "2b",
        bad == 0,
        format!(
            "Fourier = BEST on {checked} admissible vectors (p = 2, n <= 20), {bad} mismatches"
        ),
    );
}

fn prime_identity(g: &mut Gate) {
    let mut ok = true;
    let mut cases = 0;
    for n in [7u32, 11, 13] {
        for p in [2u32, 3] {
            let words = best_census(n, p).unwrap();
            let necks = necklace_census(n, p, false).unwrap();
            for k in 2..=4u32 {
                let zk = moments(&words, k, Level::Word).unwrap();
                let zn = moments(&necks, k, Level::Necklace).unwrap();
                let two = BigUint::from(2u32);
                let nk_pow: BigUint = Pow::pow(BigUint::from(n), k);
                let diff = &zk - &two;
                ok &= (&diff % &nk_pow) == BigUint::ZERO && zn == diff / nk_pow + two;
                cases += 1;
            }
        }
    }
    g.line(
        "4",
        ok,
        format!(
            "necklace Z_k = (Z_k - 2)/n^k + 2 on {cases} cases (n = 7, 11, 13; p = 2, 3; k = 2..4)"
        ),
    );
}

fn moment_ratios(g: &mut Gate, partition: &mut Vec<(u32, u32, bool)>) {
    let start = Instant::now();
    let ns: Vec<u32> = (30..=90).step_by(10).collect();
    let ks = [2u32, 3, 4, 5];
    // ratios[i][j]: n = ns[i], k = ks[j]
    let mut ratios = Vec::new();
    for &n in &ns {
        let t = best_census(n, 3).unwrap();
        partition.push((n, 3, partition_ok(&t)));
        let row: Vec<f64> = ks
            .iter()
            .map(|&k| {
                let exact = log2_big(&moments(&t, k, Level::Word).unwrap());
                (exact - asymptotic_zk(n, 3, k).unwrap().log2_value).exp2()
            })
            .collect();
        ratios.push(row);
    }
    let at70 = &ratios[ns.iter().position(|&n| n == 70).unwrap()];
    let fmt = |r: &[f64]| {
        r.iter()
            .map(|x| format!("{x:.4}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    g.line(
        "5a",
        at70.iter().all(|r| (r - 1.0).abs() <= 0.25),
        format!(
            "p=3, n=70: ratios k=2..5 = [{}], all within 0.25 of 1",
            fmt(at70)
        ),
    );
    let dev: Vec<f64> = at70.iter().map(|r| (r - 1.0).abs()).collect();
    let k2_closest = dev.iter().skip(1).all(|&d| dev[0] < d);
    g.line(
        "5b",
        k2_closest,
        format!("n=70: k=2 closest to 1? |ratio-1| = [{}]", fmt(&dev)),
    );
    let decreasing_in_k = ratios.iter().all(|row| row.windows(2).all(|w| w[0] > w[1]));
    g.line(
        "5c",
        decreasing_in_k,
        "ratios strictly decreasing in k at every n = 30..90 (k=2 uppermost)",
    );
    let mean: Vec<f64> = ratios
        .iter()
        .map(|row| row.iter().map(|r| (r - 1.0).abs()).sum::<f64>() / row.len() as f64)
        .collect();
    let each_k =
        (0..ks.len()).all(|j| (ratios[ns.len() - 1][j] - 1.0).abs() < (ratios[0][j] - 1.0).abs());
    g.line(
        "5d",
        mean.windows(2).all(|w| w[1] < w[0]) && each_k,
        format!(
            "mean |ratio-1| over k along n=30..90: [{}]; each k closer at 90 than 30: {each_k}",
            fmt(&mean)
        ),
    );
    let secs = start.elapsed().as_secs_f64();
    g.line("5e", secs <= 1800.0, format!("runtime {secs:.1} s"));
}

fn max_cluster_ratio(g: &mut Gate) {
    let mut homogeneous_max = Vec::new();
    let mut ratio_max = Vec::new();
    let mut ratio_hom = Vec::new();
    for n in (8..=64u32).step_by(8) {
        let t = best_census(n, 3).unwrap();
        let m = max_cluster(&t).unwrap();
        let hom = EdgeCountVector::homogeneous(3, n / 8).unwrap();
        let hom_size = &t.get(&hom).unwrap().size_words;
        homogeneous_max.push((n, m.vector == hom));
        let est = asymptotic_max_cluster(n, 3, Level::Word)
            .unwrap()
            .log2_value;
        ratio_max.push((log2_big(&m.size_words) - est).exp2());
        ratio_hom.push((log2_big(hom_size) - est).exp2());
    }
    let failing: Vec<u32> = homogeneous_max
        .iter()
        .filter(|x| !x.1)
        .map(|x| x.0)
        .collect();
    g.line(
        "6a",
        failing.is_empty(),
        format!("homogeneous vector is the maximizer for n = 8..64; fails at n = {failing:?}"),
    );
    let last = *ratio_max.last().unwrap();
    g.line(
        "6b",
        (last - 1.0).abs() <= 0.3,
        format!("n=64: |C_max| / estimate = {last:.4}"),
    );
    let mono_max = ratio_max[1..].windows(2).all(|w| w[1] > w[0]);
    let mono_hom = ratio_hom.windows(2).all(|w| w[1] > w[0]);
    g.line(
        "6c",
        mono_max && mono_hom && ratio_max.iter().all(|&r| r < 1.0),
        format!(
            "ratio rises toward 1 from below: max cluster n=16..64 [{}]; homogeneous n=8..64 [{}]",
            ratio_max[1..]
                .iter()
                .map(|x| format!("{x:.3}"))
                .collect::<Vec<_>>()
                .join(", "),
            ratio_hom
                .iter()
                .map(|x| format!("{x:.3}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    );
}

fn distribution(g: &mut Gate, t70: &CensusTable) {
    let t47 = best_census(47, 3).unwrap();
    let d47 = sup_distance_to_theory(&t47).unwrap();
    let d70 = sup_distance_to_theory(t70).unwrap();
    g.line(
        "7",
        d70 <= 0.1 && d70 < d47,
        format!("sup |P_hat - t(1 - ln t)|: n=47 {d47:.4}, n=70 {d70:.4}"),
    );
}

fn rho_identity(g: &mut Gate) {
    let mut worst: f64 = 0.0;
    for p in 2..=4u32 {
        for k in 1..=6u32 {
            let target = (k as f64).powf(-((1u32 << (p - 2)) as f64));
            worst = worst.max((rho_moment(k, p).unwrap() - target).abs());
        }
    }
    g.line(
        "8",
        worst <= 1e-8,
        format!("max |int rho t^(k-1) - k^(-2^(p-2))| = {worst:.2e} (k <= 6, p = 2..4)"),
    );
}

fn matrix_identities(g: &mut Gate) {
    let start = Instant::now();
    let mut fg = 0.0f64;
    let mut prop = 0.0f64;
    let mut det_b = 0.0f64;
    let mut det_b_scaled = 0.0f64;
    let mut det_b_exact = true;
    let mut spectra = true;
    let mut product = 0.0f64;
    for p in 2..=6u32 {
        for r in det_f_g_check(p).unwrap() {
            fg = fg.max(r.residual);
        }
        for alpha in DET_IDENTITY_ALPHAS {
            for r in det_identity_check(alpha, p).unwrap() {
                prop = prop.max(r.residual);
            }
        }
        for r in det_b_check(p).unwrap() {
            match r.check.as_str() {
                "det_B" => det_b = det_b.max(r.residual),
                "det_B_rescaled" => det_b_scaled = det_b_scaled.max(r.residual),
                "det_B_exact" => det_b_exact &= r.pass,
                _ => {}
            }
        }
        for r in spectrum_check(p).unwrap() {
            match r.check.as_str() {
                "product_identity" => product = product.max(r.residual),
                _ => spectra &= r.pass,
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    g.line(
        "9a",
        fg < 1e-10,
        format!("det F = det G = 1, max residual {fg:.2e}"),
    );
    g.line(
        "9b",
        prop < 1e-10,
        format!("det(I - aQ) identities at 5 alphas, max residual {prop:.2e}"),
    );
    g.line(
        "9c",
        det_b < 1e-10,
        format!("det B = 2^(-2^p): max relative residual {det_b:.3e}"),
    );
    g.line(
        "9d",
        det_b_scaled < 1e-10 && det_b_exact,
        format!("det(2^p B) = 2^(-2^p), max residual {det_b_scaled:.2e}; exact det B = 2^(-(p+1) 2^p): {det_b_exact}"),
    );
    g.line(
        "9e",
        spectra,
        "spectra of M_(p+1) and M~_p with exact multiplicities",
    );
    g.line(
        "9f",
        product < 1e-10,
        format!("prod nonzero eigenvalues = det(M~_p)/4, max residual {product:.2e}"),
    );
    g.line("9g", secs < 10.0, format!("suite p = 2..6 in {secs:.2} s"));
}

fn saddle(g: &mut Gate) {
    let mut worst = 0.0f64;
    for p in [2u32, 3] {
        for n in [20u32, 50] {
            let origin = PhasePoint::reduced(p, vec![0.0; 1 << (p - 1)]).unwrap();
            let grad = saddle_gradient(&origin, n, 1e-5).unwrap();
            worst = worst.max(grad.iter().fold(0.0, |a, x| a.max(x.abs())));
        }
    }
    g.line(
        "10",
        worst < 1e-8,
        format!("max |grad log|Tr Q^n|^2| at 0 = {worst:.2e} (p = 2, 3; n = 20, 50)"),
    );
}

fn anisotropy(g: &mut Gate, tables: &[(u32, CensusTable)]) {
    let mut uniform = true;
    for p in 2..=4u32 {
        for n in p..=16 {
            let t = best_census(n, p).unwrap();
            let want = uniform_visits(n, p);
            uniform &= mean_edge_visits_exact(&t, 1)
                .unwrap()
                .iter()
                .all(|x| *x == want);
        }
    }
    g.line(
        "11a",
        uniform,
        "<n_a>_1 = n/2^p exactly for every edge (n <= 16, p = 2..4)",
    );

    let dev: Vec<f64> = tables
        .iter()
        .map(|(n, t)| {
            mean_edge_visits_exact(t, 2)
                .unwrap()
                .iter()
                .map(|x| (x.to_f64().unwrap() - *n as f64 / 8.0).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let max = dev.iter().cloned().fold(0.0, f64::max);
    g.line(
        "11b",
        max <= 1.0 && dev.last() <= dev.first(),
        format!(
            "max_a |<n_a>_2 - n/8| for n = 20..70: [{}] (bound 1, D(70) <= D(20))",
            dev.iter()
                .map(|x| format!("{x:.4}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    );

    let mut sums = true;
    for (n, t) in tables {
        for i in 1..=20 {
            let v = thresholded_edge_visits_exact(t, i as f64 * 0.05).unwrap();
            let total: num_rational::BigRational = v.iter().sum();
            sums &= total == num_rational::BigRational::from_integer((*n).into());
        }
    }
    g.line(
        "11c",
        sums,
        "sum_a n_bar_a(t) = n exactly at t = 0.05, 0.10, ..., 1 (p = 3, n = 20..70)",
    );
}

fn counting(g: &mut Gate) {
    let c = count_admissible(200, 2).unwrap();
    let r = c.leading_ratio.unwrap();
    g.line(
        "12a",
        (0.9..=1.1).contains(&r),
        format!("N_2(200) = {}, 4N/n^2 = {r:.4}", c.count),
    );
    let n3 = brute_census(3, 2).unwrap().len();
    let e3 = count_admissible(3, 2).unwrap().count;
    g.line(
        "12b",
        n3 == 4 && e3 == 4,
        format!("N_2(3): brute {n3}, enumeration {e3}"),
    );
}

fn baker(g: &mut Gate) {
    // (pairs checked, pairs failing) for p-close and for 2p-close pairs
    let mut close = (0, 0);
    let mut close2 = (0, 0);
    let mut example = None;
    for n in 2..=8u32 {
        let necks: Vec<Necklace> = enumerate_necklaces(n).unwrap().collect();
        for p in [2u32, 3] {
            if p > n {
                continue;
            }
            for (i, x) in necks.iter().enumerate() {
                for y in &necks[i..] {
                    let (a, b) = (x.representative(), y.representative());
                    let metric =
                        || p_neighborhood_check(&orbit_points(x), &orbit_points(y), p).unwrap();
                    if p_close(a, b, p).unwrap() {
                        close.0 += 1;
                        if !metric() {
                            close.1 += 1;
                            example.get_or_insert((p, *x, *y));
                        }
                    }
                    if 2 * p <= n && p_close(a, b, 2 * p).unwrap() {
                        close2.0 += 1;
                        close2.1 += (!metric()) as u32;
                    }
                }
            }
        }
    }
    let ex = example
        .map(|(p, x, y)| format!("; first counterexample p={p}: {x} vs {y}"))
        .unwrap_or_default();
    g.line(
        "13a",
        close.1 == 0,
        format!(
            "p-close => metric p-neighborhood (n <= 8, p = 2, 3): {} of {} pairs fail{ex}",
            close.1, close.0
        ),
    );
    g.line(
        "13b",
        close2.1 == 0 && close2.0 > 0,
        format!(
            "2p-close => metric p-neighborhood (n <= 8, p = 2, 3): {} of {} pairs fail",
            close2.1, close2.0
        ),
    );
}

fn main() {
    let mut g = Gate {
        red: BTreeSet::new(),
    };
    println!();
    let mut partition = Vec::new();
    cluster_tree(&mut g);
    engines(&mut g, &mut partition);
    prime_identity(&mut g);
    moment_ratios(&mut g, &mut partition);
    max_cluster_ratio(&mut g);
    let tables: Vec<(u32, CensusTable)> = (20..=70u32)
        .step_by(10)
        .map(|n| (n, best_census(n, 3).unwrap()))
        .collect();
    for (n, t) in &tables {
        partition.push((*n, 3, partition_ok(t)));
    }
    let t70 = &tables.last().unwrap().1;
    let bad: Vec<_> = partition.iter().filter(|x| !x.2).collect();
    g.line(
        "3",
        bad.is_empty() && t70.n() == 70,
        format!(
            "sum |C| = 2^n on {} census runs including n=70, p=3; failures {bad:?}",
            partition.len()
        ),
    );
    distribution(&mut g, t70);
    rho_identity(&mut g);
    matrix_identities(&mut g);
    saddle(&mut g);
    anisotropy(&mut g, &tables);
    counting(&mut g);
    baker(&mut g);

    let known: BTreeSet<String> = KNOWN_RED.iter().map(|s| s.to_string()).collect();
    println!("red clauses: {:?} (documented: {:?})", g.red, known);
    assert_eq!(g.red, known, "red clauses differ from the documented set");
}
