//! The baker's map on exact rationals and the metric form of p-closeness.
//!
//! A periodic word `x` of length `n` codes the orbit whose points have
//! `q = 0.x_(i+1) x_(i+2) ...` and `p = 0.x_i x_(i-1) ...`, both repeating with
//! period `n`, so every coordinate is an integer over `2^n - 1`.
//!
//! The map is `(2q, p/2)` for `q < 1/2` and `(2q - 1, (1 + p)/2)` otherwise.
//! The all-ones word codes `q = p = 0.111... = 1`, the corner of the square,
//! which is outside the half-open domain. It is kept as a marked fixed point
//! with coordinates `(1, 1)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::words::{BinaryWord, Necklace};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhasePointRational {
    q: BigRational,
    p: BigRational,
    corner: bool,
}

fn in_unit(x: &BigRational) -> bool {
    !x.is_negative() && x < &BigRational::one()
}

impl PhasePointRational {
    pub fn new(q: BigRational, p: BigRational) -> Result<Self> {
        if !in_unit(&q) || !in_unit(&p) {
            return Err(Error::param(format!("point ({q}, {p}) is outside [0,1)^2")));
        }
        Ok(PhasePointRational {
            q,
            p,
            corner: false,
        })
    }

    /// Shorthand for `(qn/qd, pn/pd)`.
    pub fn from_fractions(qn: i64, qd: i64, pn: i64, pd: i64) -> Result<Self> {
        if qd == 0 || pd == 0 {
            return Err(Error::param("zero denominator"));
        }
        Self::new(
            BigRational::new(qn.into(), qd.into()),
            BigRational::new(pn.into(), pd.into()),
        )
    }

    /// The corner `(1, 1)` coded by the all-ones word.
    pub fn corner() -> Self {
        PhasePointRational {
            q: BigRational::one(),
            p: BigRational::one(),
            corner: true,
        }
    }

    pub fn q(&self) -> &BigRational {
        &self.q
    }

    pub fn p(&self) -> &BigRational {
        &self.p
    }

    pub fn is_corner(&self) -> bool {
        self.corner
    }

    /// Symbol of the Markov partition cell: 0 iff `q < 1/2`.
    pub fn symbol(&self) -> u8 {
        if self.q < BigRational::new(1.into(), 2.into()) {
            0
        } else {
            1
        }
    }
}

/// One application of the baker's map. The corner is fixed.
pub fn baker_step(v: &PhasePointRational) -> Result<PhasePointRational> {
    if v.corner {
        return Ok(v.clone());
    }
    if !in_unit(&v.q) || !in_unit(&v.p) {
        return Err(Error::param("point is outside the unit square"));
    }
    let two = BigRational::from_integer(2.into());
    let one = BigRational::one();
    let (q, p) = if v.symbol() == 0 {
        (&v.q * &two, &v.p / &two)
    } else {
        (&v.q * &two - &one, (&one + &v.p) / &two)
    };
    Ok(PhasePointRational {
        q,
        p,
        corner: false,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicOrbit {
    code: Necklace,
    points: Vec<PhasePointRational>,
}

impl PeriodicOrbit {
    pub fn code(&self) -> &Necklace {
        &self.code
    }

    pub fn points(&self) -> &[PhasePointRational] {
        &self.points
    }

    pub fn period(&self) -> u32 {
        self.points.len() as u32
    }

    /// The word read off the partition cells along the orbit.
    pub fn symbolic_code(&self) -> BinaryWord {
        let bits = self
            .points
            .iter()
            .fold(0u64, |acc, pt| (acc << 1) | pt.symbol() as u64);
        BinaryWord::new(self.period(), bits).expect("period fits")
    }
}

fn reverse_bits(bits: u64, n: u32) -> u64 {
    bits.reverse_bits() >> (64 - n)
}

/// The `n` points of the orbit coded by `x`, starting from the representative.
pub fn orbit_points(x: &Necklace) -> PeriodicOrbit {
    let word = x.representative();
    let n = word.len();
    if word.count_ones() == n {
        return PeriodicOrbit {
            code: *x,
            points: vec![PhasePointRational::corner(); n as usize],
        };
    }
    let den = BigInt::from((1u128 << n) - 1);
    let points = (0..n)
        .map(|i| {
            let rot = word.rotate_left(i).bits();
            PhasePointRational {
                q: BigRational::new(BigInt::from(rot), den.clone()),
                p: BigRational::new(BigInt::from(reverse_bits(rot, n)), den.clone()),
                corner: false,
            }
        })
        .collect();
    PeriodicOrbit { code: *x, points }
}

/// `max(|q - q'|, |p - p'|)`.
pub fn sup_distance(v: &PhasePointRational, w: &PhasePointRational) -> BigRational {
    let dq = (&v.q - &w.q).abs();
    let dp = (&v.p - &w.p).abs();
    if dq > dp {
        dq
    } else {
        dp
    }
}

/// Whether the points of `gx` and `gy` can be paired one to one with every
/// pair within sup-distance `2^-p`.
pub fn p_neighborhood_check(gx: &PeriodicOrbit, gy: &PeriodicOrbit, p: u32) -> Result<bool> {
    if gx.period() != gy.period() {
        return Err(Error::param(format!(
            "periods differ: {} vs {}",
            gx.period(),
            gy.period()
        )));
    }
    let eps = BigRational::new(BigInt::one(), BigInt::one() << p);
    let n = gx.points.len();
    let adj: Vec<Vec<usize>> = gx
        .points
        .iter()
        .map(|a| {
            (0..n)
                .filter(|&j| sup_distance(a, &gy.points[j]) <= eps)
                .collect()
        })
        .collect();
    Ok(perfect_matching(&adj, n))
}

/// Kuhn's augmenting-path matching on an `n x n` bipartite graph.
fn perfect_matching(adj: &[Vec<usize>], n: usize) -> bool {
    fn augment(
        u: usize,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for &v in &adj[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if owner[v].is_none_or(|w| augment(w, adj, seen, owner)) {
                owner[v] = Some(u);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; n];
    (0..n).all(|u| augment(u, adj, &mut vec![false; n], &mut owner))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nk(s: &str) -> Necklace {
        Necklace::of(s.parse().unwrap())
    }

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn step_examples() {
        let o = PhasePointRational::from_fractions(0, 1, 0, 1).unwrap();
        assert_eq!(baker_step(&o).unwrap(), o);
        let v = PhasePointRational::from_fractions(1, 3, 0, 1).unwrap();
        assert_eq!(
            baker_step(&v).unwrap(),
            PhasePointRational::from_fractions(2, 3, 0, 1).unwrap()
        );
        let w = PhasePointRational::from_fractions(3, 4, 1, 2).unwrap();
        assert_eq!(
            baker_step(&w).unwrap(),
            PhasePointRational::from_fractions(1, 2, 3, 4).unwrap()
        );
        assert!(PhasePointRational::from_fractions(1, 1, 0, 1).is_err());
        assert!(PhasePointRational::from_fractions(-1, 3, 0, 1).is_err());
    }

    #[test]
    fn two_cycle() {
        let o = orbit_points(&nk("01"));
        assert_eq!(o.points()[0].q(), &r(1, 3));
        assert_eq!(o.points()[0].p(), &r(2, 3));
        assert_eq!(o.points()[1].q(), &r(2, 3));
        assert_eq!(o.points()[1].p(), &r(1, 3));
        assert_eq!(sup_distance(&o.points()[0], &o.points()[1]), r(1, 3));
        let origin = PhasePointRational::from_fractions(0, 1, 0, 1).unwrap();
        assert_eq!(sup_distance(&origin, &o.points()[0]), r(2, 3));
    }

    #[test]
    fn closure_and_coding() {
        for n in 1..=9 {
            for x in crate::words::enumerate_necklaces(n).unwrap() {
                let o = orbit_points(&x);
                assert_eq!(o.symbolic_code(), x.representative());
                for (i, pt) in o.points().iter().enumerate() {
                    let next = baker_step(pt).unwrap();
                    assert_eq!(&next, &o.points()[(i + 1) % n as usize]);
                }
                let mut pt = o.points()[0].clone();
                for _ in 0..n {
                    pt = baker_step(&pt).unwrap();
                }
                assert_eq!(pt, o.points()[0]);
            }
        }
    }

    #[test]
    fn neighborhood_examples() {
        let gx = orbit_points(&nk("1101000"));
        let gy = orbit_points(&nk("1100010"));
        assert!(p_neighborhood_check(&gx, &gy, 2).unwrap());
        assert!(p_neighborhood_check(&gx, &gx, 7).unwrap());
        let zeros = orbit_points(&nk("0000000"));
        let ones = orbit_points(&nk("1111111"));
        assert!(ones.points()[0].is_corner());
        assert!(!p_neighborhood_check(&zeros, &ones, 1).unwrap());
        assert!(p_neighborhood_check(&gx, &orbit_points(&nk("01")), 2).is_err());
    }
}
