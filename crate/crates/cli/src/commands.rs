use num_bigint::BigUint;
use serde_json::{json, Value};

use orbit_census::asymptotics::{asymptotic_max_cluster, asymptotic_zk};
use orbit_census::baker::{orbit_points, p_neighborhood_check};
use orbit_census::census::{
    census, empirical_distribution, max_cluster, mean_edge_visits, moments, necklace_census,
    sup_distance_to_theory, thresholded_edge_visits, NECKLACE_MAX_N,
};
use orbit_census::graph::{count_admissible, enumerate_admissible_vectors};
use orbit_census::spectral::{
    fourier_cluster_size_on, fourier_moment_on, saddle_check, validate_all, z2_min_n, TraceGrid,
};
use orbit_census::words::{enumerate_necklaces, p_close};
use orbit_census::{log2_big, CensusTable, Engine, Error, Level, Necklace, PWord, Result};

use crate::output::{num, Artifact};

fn stem(cmd: &str, n: u32, p: u32) -> String {
    format!("{cmd}_n{n}_p{p}")
}

fn big(x: &BigUint) -> Value {
    Value::String(x.to_string())
}

/// The census with necklace-level sizes, when the level needs them.
fn table_for(n: u32, p: u32, engine: Engine, level: Level) -> Result<CensusTable> {
    match level {
        Level::Word => census(n, p, engine),
        Level::Necklace => {
            let mut t = census(n, p, engine)?;
            if t.derive_prime_necklace_sizes().is_ok() {
                Ok(t)
            } else if n <= NECKLACE_MAX_N {
                necklace_census(n, p, false)
            } else {
                Err(Error::State(format!(
                    "necklace-level sizes for non-prime n={n} need the necklace scan (n <= {NECKLACE_MAX_N})"
                )))
            }
        }
    }
}

pub struct CensusOutput {
    pub artifact: Artifact,
    pub summary: String,
}

pub fn run_census(n: u32, p: u32, engine: Engine) -> Result<CensusOutput> {
    let t = census(n, p, engine)?;
    let mut a = Artifact::new(
        stem("census", n, p),
        &["n", "p", "engine", "vector", "size_words", "size_necklaces"],
    );
    a.param("n", n);
    a.param("p", p);
    a.param("engine", engine.to_string());
    for r in t.records() {
        a.row(vec![
            json!(n),
            json!(p),
            json!(engine.to_string()),
            json!(r.vector.to_string()),
            big(&r.size_words),
            r.size_necklaces.as_ref().map_or(Value::Null, big),
        ]);
    }
    let cmax = &max_cluster(&t)?.size_words;
    let z2 = moments(&t, 2, Level::Word)?;
    Ok(CensusOutput {
        artifact: a,
        summary: format!("clusters={} |C_max|={cmax} Z_2={z2}", t.len()),
    })
}

pub fn run_moments(n: u32, p: u32, ks: &[u32], level: Level, engine: Engine) -> Result<Artifact> {
    let t = table_for(n, p, engine, level)?;
    let mut a = Artifact::new(
        stem("moments", n, p),
        &[
            "n",
            "p",
            "k",
            "level",
            "exact",
            "exact_log2",
            "asymptotic_log2",
            "ratio",
        ],
    );
    a.param("n", n);
    a.param("p", p);
    a.param(
        "k",
        ks.iter()
            .map(|k| k.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    a.param("level", level.to_string());
    a.param("engine", engine.to_string());
    for &k in ks {
        let exact = moments(&t, k, level)?;
        let exact_log2 = log2_big(&exact);
        let mut est = asymptotic_zk(n, p, k)?.log2_value;
        if level == Level::Necklace {
            est -= k as f64 * (n as f64).log2();
        }
        a.row(vec![
            json!(n),
            json!(p),
            json!(k),
            json!(level.to_string()),
            big(&exact),
            num(exact_log2),
            num(est),
            num((exact_log2 - est).exp2()),
        ]);
    }
    Ok(a)
}

pub fn run_distribution(n: u32, p: u32, bins: u32, engine: Engine) -> Result<Artifact> {
    let t = census(n, p, engine)?;
    let mut a = Artifact::new(
        stem("distribution", n, p),
        &["t", "empirical", "theoretical"],
    );
    a.param("n", n);
    a.param("p", p);
    a.param("bins", bins);
    a.param("engine", engine.to_string());
    a.param("sup_distance", num(sup_distance_to_theory(&t)?));
    for s in empirical_distribution(&t, bins)? {
        a.row(vec![num(s.t), num(s.empirical), num(s.theoretical)]);
    }
    Ok(a)
}

pub enum Weighting {
    Moments(Vec<u32>),
    Thresholds(Vec<f64>),
}

pub fn run_anisotropy(n: u32, p: u32, weighting: &Weighting, engine: Engine) -> Result<Artifact> {
    let t = census(n, p, engine)?;
    let mut a = Artifact::new(stem("anisotropy", n, p), &["edge", "k_or_t", "value"]);
    a.param("n", n);
    a.param("p", p);
    a.param("engine", engine.to_string());
    let columns: Vec<(Value, Vec<f64>)> = match weighting {
        Weighting::Moments(ks) => {
            a.param("weighting", "moment");
            ks.iter()
                .map(|&k| Ok((json!(k), mean_edge_visits(&t, k)?)))
                .collect::<Result<_>>()?
        }
        Weighting::Thresholds(ts) => {
            a.param("weighting", "threshold");
            ts.iter()
                .map(|&x| Ok((num(x), thresholded_edge_visits(&t, x)?)))
                .collect::<Result<_>>()?
        }
    };
    for (key, values) in &columns {
        for (edge, v) in values.iter().enumerate() {
            let label = PWord::new(p, edge as u64)?.to_string();
            a.row(vec![json!(label), key.clone(), num(*v)]);
        }
    }
    Ok(a)
}

pub fn run_max_cluster(n: u32, p: u32, engine: Engine) -> Result<Artifact> {
    let mut t = census(n, p, engine)?;
    let _ = t.derive_prime_necklace_sizes();
    let mut a = Artifact::new(
        stem("max-cluster", n, p),
        &[
            "n",
            "p",
            "level",
            "vector",
            "size",
            "exact_log2",
            "asymptotic_log2",
            "ratio",
        ],
    );
    a.param("n", n);
    a.param("p", p);
    a.param("engine", engine.to_string());
    let m = max_cluster(&t)?;
    let mut levels = vec![(Level::Word, m.size_words.clone())];
    if let Some(s) = &m.size_necklaces {
        levels.push((Level::Necklace, s.clone()));
    }
    for (level, size) in levels {
        let exact = log2_big(&size);
        let est = asymptotic_max_cluster(n, p, level)?.log2_value;
        a.row(vec![
            json!(n),
            json!(p),
            json!(level.to_string()),
            json!(m.vector.to_string()),
            big(&size),
            num(exact),
            num(est),
            num((exact - est).exp2()),
        ]);
    }
    Ok(a)
}

pub fn run_count_clusters(n: u32, p: u32) -> Result<Artifact> {
    let c = count_admissible(n, p)?;
    let mut a = Artifact::new(
        stem("count-clusters", n, p),
        &["n", "p", "count", "leading_ratio"],
    );
    a.param("n", n);
    a.param("p", p);
    a.row(vec![
        json!(n),
        json!(p),
        json!(c.count),
        c.leading_ratio.map_or(Value::Null, num),
    ]);
    Ok(a)
}

pub struct Report {
    pub artifact: Artifact,
    pub failures: Vec<String>,
}

pub fn run_validate(p: u32) -> Result<Report> {
    let mut records = validate_all(p)?;
    if p <= 4 {
        let n = if p == 4 { 40 } else { z2_min_n(p) };
        records.extend(saddle_check(n, p)?);
    }
    let mut a = Artifact::new(
        format!("validate_p{p}"),
        &["check", "params", "residual", "tolerance", "pass"],
    );
    a.param("p", p);
    for r in &records {
        a.row(vec![
            json!(r.check),
            json!(r.params.to_string()),
            num(r.residual),
            num(r.tolerance),
            json!(r.pass),
        ]);
    }
    let failures: Vec<String> = records
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.check.clone())
        .collect();
    let mut doc = serde_json::Map::new();
    doc.insert("pass".into(), json!(failures.is_empty()));
    doc.insert("failed".into(), json!(failures));
    doc.insert("checks".into(), serde_json::to_value(&records)?);
    a.json = Some(doc);
    Ok(Report {
        artifact: a,
        failures,
    })
}

pub fn run_fourier(n: u32, p: u32, ks: Option<&[u32]>, grid: Option<u32>) -> Result<Artifact> {
    let grid = grid.unwrap_or(n + 1);
    match ks {
        Some(ks) => {
            if !(2..=3).contains(&p) {
                return Err(Error::Capacity {
                    message: format!("Fourier moments support p in 2..=3, got p={p}"),
                    hint: "use the census engines".into(),
                });
            }
            let tg = TraceGrid::new(n, p, grid, true)?;
            let mut a = Artifact::new(stem("fourier", n, p), &["n", "p", "k", "grid", "exact"]);
            a.param("n", n);
            a.param("p", p);
            a.param("grid", grid);
            for &k in ks {
                a.row(vec![
                    json!(n),
                    json!(p),
                    json!(k),
                    json!(grid),
                    big(&fourier_moment_on(&tg, k)?),
                ]);
            }
            Ok(a)
        }
        None => {
            if p != 2 {
                return Err(Error::Capacity {
                    message: format!("full-grid inversion supports p = 2 only, got p={p}"),
                    hint: "pass --k for moments, or use the BEST engine".into(),
                });
            }
            let tg = TraceGrid::new(n, p, grid, false)?;
            let mut a = Artifact::new(
                stem("fourier", n, p),
                &["n", "p", "grid", "vector", "size_words"],
            );
            a.param("n", n);
            a.param("p", p);
            a.param("grid", grid);
            for v in enumerate_admissible_vectors(n, p)? {
                let s = fourier_cluster_size_on(&tg, &v)?;
                a.row(vec![
                    json!(n),
                    json!(p),
                    json!(grid),
                    json!(v.to_string()),
                    big(&s),
                ]);
            }
            Ok(a)
        }
    }
}

/// Largest `n` for the exhaustive pair scan.
pub const BAKER_MAX_N: u32 = 14;

pub fn run_baker_check(n: u32, p: u32, doubled: bool) -> Result<Report> {
    if n == 0 || p == 0 || p > n {
        return Err(Error::Parameter(format!(
            "need 1 <= p <= n, got n={n}, p={p}"
        )));
    }
    if n > BAKER_MAX_N {
        return Err(Error::Capacity {
            message: format!("exhaustive pair scan at n={n}"),
            hint: format!("n <= {BAKER_MAX_N}"),
        });
    }
    let window = if doubled { 2 * p } else { p };
    if window > n {
        return Err(Error::Parameter(format!(
            "window 2p={window} exceeds n={n}"
        )));
    }
    let necks: Vec<Necklace> = enumerate_necklaces(n)?.collect();
    let mut a = Artifact::new(
        stem("baker-check", n, p),
        &["x", "y", "window", "metric_close"],
    );
    a.param("n", n);
    a.param("p", p);
    a.param("window", window);
    let mut failures = Vec::new();
    for (i, x) in necks.iter().enumerate() {
        for y in &necks[i..] {
            if !p_close(x.representative(), y.representative(), window)? {
                continue;
            }
            let ok = p_neighborhood_check(&orbit_points(x), &orbit_points(y), p)?;
            if !ok {
                failures.push(format!("{x}~{y}"));
            }
            a.row(vec![
                json!(x.to_string()),
                json!(y.to_string()),
                json!(window),
                json!(ok),
            ]);
        }
    }
    Ok(Report {
        artifact: a,
        failures,
    })
}
