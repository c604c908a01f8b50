//! Cylinders of `S_(s,u)`.
//!
//! The cylinder with base `c_1..c_n` holds the elements whose first `n`
//! blocks are `c_1..c_n`. Writing `L = c_1 + ... + c_n` and `τ` for the value
//! of the encoded base word, the cylinder is `τ + s^{-L} · S_(s,u)`, so
//!
//! ```text
//! inf = τ + s^{-L} inf S_(s,u)      sup = τ + s^{-L} sup S_(s,u)
//! ```
//!
//! The extrema of the whole set depend on the regime of `u`:
//!
//! | `u`          | inf                                     | sup                            |
//! |--------------|-----------------------------------------|--------------------------------|
//! | 0            | `(s-1)/(s^{s-1}-1)`                     | `1/(s-1)`                      |
//! | 1            | `(s-2)/(s^{s-1}-1) + 1/(s-1)`           | `1/(s^2-1) + 1/(s-1)`          |
//! | 2..=s-2      | `1/(s-1)`                               | `1/(s^{u+1}-1) + u/(s-1)`      |
//! | s-1          | `1/(s-1)`                               | `1 - 1/(s^{s-2}-1)`            |
//!
//! For `u = 0` the endpoints are also computed from the partial sums
//! `g_n = Σ c_k s^{-(c_1+...+c_k)}`; both routes must agree.

use num::{BigInt, One, Zero};
use serde::{Deserialize, Serialize};

use crate::blocks::{block_values, block_word, check_blocks, check_params, is_block_value};
use crate::error::{Error, Result};
use crate::rational::{big_pow, inv_pow, ratio, Rational};

fn frac(num: BigInt, den: BigInt) -> Rational {
    Rational::new(num, den)
}

/// Infimum and supremum of `S_(s,u)`.
pub fn set_extrema(s: u32, u: u32) -> Result<(Rational, Rational)> {
    check_params(s, u)?;
    let one = BigInt::one();
    let drift = ratio(u as i64, s as i64 - 1);
    let inf = match u {
        0 | 1 => frac(BigInt::from(s - u - 1), big_pow(s, s as usize - 1) - &one) + &drift,
        _ => ratio(1, s as i64 - 1),
    };
    let sup = if u == 0 {
        ratio(1, s as i64 - 1)
    } else if u <= s - 2 {
        frac(one.clone(), big_pow(s, u as usize + 1) - &one) + &drift
    } else {
        Rational::one() - frac(one.clone(), big_pow(s, s as usize - 2) - &one)
    };
    Ok((inf, sup))
}

/// `d(S_(s,u)) = sup - inf`.
pub fn set_diameter(s: u32, u: u32) -> Result<Rational> {
    let (inf, sup) = set_extrema(s, u)?;
    Ok(sup - inf)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cylinder {
    pub s: u32,
    pub u: u32,
    pub base: Vec<u32>,
    /// `Σ c_k s^{-(c_1+...+c_k)}`.
    #[serde(with = "crate::rational::json")]
    pub g: Rational,
    /// Value of the encoded base word.
    #[serde(with = "crate::rational::json")]
    pub tau: Rational,
    #[serde(with = "crate::rational::json")]
    pub inf: Rational,
    #[serde(with = "crate::rational::json")]
    pub sup: Rational,
}

impl Cylinder {
    pub fn new(s: u32, u: u32, base: &[u32]) -> Result<Self> {
        check_params(s, u)?;
        check_blocks(s, u, base, 0)?;
        let root = Self::whole_set(s, u)?;
        Ok(base.iter().fold(root, |cyl, &c| cyl.child_unchecked(c)))
    }

    /// Rank-0 cylinder: the whole set.
    pub fn whole_set(s: u32, u: u32) -> Result<Self> {
        let (inf, sup) = set_extrema(s, u)?;
        Ok(Cylinder { s, u, base: vec![], g: Rational::zero(), tau: Rational::zero(), inf, sup })
    }

    pub fn rank(&self) -> usize {
        self.base.len()
    }

    /// `c_1 + ... + c_n`, the digit length of the base word.
    pub fn digit_len(&self) -> usize {
        self.base.iter().map(|&c| c as usize).sum()
    }

    pub fn diameter(&self) -> Rational {
        &self.sup - &self.inf
    }

    pub fn hull_contains(&self, x: &Rational) -> bool {
        &self.inf <= x && x <= &self.sup
    }

    pub fn hull_within(&self, outer: &Cylinder) -> bool {
        outer.inf <= self.inf && self.sup <= outer.sup
    }

    /// Child with block `c` appended.
    pub fn child(&self, c: u32) -> Result<Cylinder> {
        if !is_block_value(self.s, self.u, c) {
            return Err(Error::InvalidBlock { value: c, index: self.rank(), s: self.s, u: self.u });
        }
        Ok(self.child_unchecked(c))
    }

    fn child_unchecked(&self, c: u32) -> Cylinder {
        let (s, u) = (self.s, self.u);
        let start = self.digit_len();
        let mut tau = self.tau.clone();
        for (i, d) in block_word(u, c).into_iter().enumerate() {
            if d != 0 {
                tau += frac(BigInt::from(d), big_pow(s, start + i + 1));
            }
        }
        let len = start + c as usize;
        let g = &self.g + frac(BigInt::from(c), big_pow(s, len));
        let scale = inv_pow(s, len);
        let (set_inf, set_sup) = set_extrema(s, u).expect("validated parameters");
        let mut base = self.base.clone();
        base.push(c);
        Cylinder {
            s,
            u,
            base,
            g,
            inf: &tau + &scale * set_inf,
            sup: &tau + &scale * set_sup,
            tau,
        }
    }

    /// Children in increasing block order, skipping `u`.
    pub fn children(&self) -> Vec<Cylinder> {
        block_values(self.s, self.u).into_iter().map(|c| self.child_unchecked(c)).collect()
    }
}

/// `(inf, sup)` of the cylinder; an empty base gives the set extrema.
pub fn cylinder_endpoints(s: u32, u: u32, base: &[u32]) -> Result<(Rational, Rational)> {
    let c = Cylinder::new(s, u, base)?;
    Ok((c.inf, c.sup))
}

/// Closed-form diameter: for `u = 0`
/// `(s^{s-1} - 1 - (s-1)^2) / ((s-1)(s^{s-1}-1) s^L)`, otherwise `s^{-L} d(S_(s,u))`.
pub fn cylinder_diameter(s: u32, u: u32, base: &[u32]) -> Result<Rational> {
    check_params(s, u)?;
    check_blocks(s, u, base, 0)?;
    let len: usize = base.iter().map(|&c| c as usize).sum();
    if u == 0 {
        let top = big_pow(s, s as usize - 1) - BigInt::one();
        let num = &top - BigInt::from(s - 1).pow(2);
        let den = BigInt::from(s - 1) * top * big_pow(s, len);
        return Ok(frac(num, den));
    }
    Ok(inv_pow(s, len) * set_diameter(s, u)?)
}

/// Endpoints from the partial sums `g_n`, valid for `u = 0` only.
pub fn partial_sum_endpoints(s: u32, base: &[u32]) -> Result<(Rational, Rational)> {
    check_params(s, 0)?;
    check_blocks(s, 0, base, 0)?;
    let mut g = Rational::zero();
    let mut len = 0usize;
    for &c in base {
        len += c as usize;
        g += frac(BigInt::from(c), big_pow(s, len));
    }
    let scale = big_pow(s, len);
    let inf = &g + frac(BigInt::from(s - 1), (big_pow(s, s as usize - 1) - BigInt::one()) * &scale);
    let sup = g + frac(BigInt::one(), BigInt::from(s - 1) * scale);
    Ok((inf, sup))
}

/// Children of the cylinder with the given base.
pub fn children(s: u32, u: u32, base: &[u32]) -> Result<Vec<Cylinder>> {
    Ok(Cylinder::new(s, u, base)?.children())
}

/// Open interval between two sibling hulls; it contains no element of the set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapInterval {
    #[serde(with = "crate::rational::json")]
    pub lower: Rational,
    #[serde(with = "crate::rational::json")]
    pub upper: Rational,
}

impl GapInterval {
    pub fn contains(&self, x: &Rational) -> bool {
        &self.lower < x && x < &self.upper
    }

    pub fn length(&self) -> Rational {
        &self.upper - &self.lower
    }
}

/// Gap `(sup Δ'_{base,p+1}, inf Δ'_{base,p})` of `S_(s,0)`, `p ∈ 1..=s-2`.
pub fn gap_interval(s: u32, base: &[u32], p: u32) -> Result<GapInterval> {
    check_params(s, 0)?;
    if p < 1 || p > s - 2 {
        return Err(Error::InvalidParameter(format!("gap index p={p} outside 1..={}", s - 2)));
    }
    let parent = Cylinder::new(s, 0, base)?;
    let upper = parent.child_unchecked(p).inf;
    let lower = parent.child_unchecked(p + 1).sup;
    Ok(GapInterval { lower, upper })
}

/// Relative position of the sibling cylinders with last blocks `p` and `p + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SiblingOrder {
    /// Child `p` lies wholly below child `p + 1`.
    Increasing,
    /// Child `p` lies wholly above child `p + 1`.
    Decreasing,
    /// The hulls touch or overlap.
    Overlapping,
}

/// Ordering predicted by the `u` regime table:
/// `u ∈ {0, 1}` decreasing, `u ∈ {s-2, s-1}` increasing, and in between
/// increasing for `p + 1 <= u`, decreasing for `p > u`.
pub fn expected_order(s: u32, u: u32, p: u32) -> Option<SiblingOrder> {
    if !is_block_value(s, u, p) || !is_block_value(s, u, p + 1) {
        return None;
    }
    if u <= 1 {
        Some(SiblingOrder::Decreasing)
    } else if u + 2 >= s || p < u {
        Some(SiblingOrder::Increasing)
    } else {
        Some(SiblingOrder::Decreasing)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderVerdict {
    /// Order computed from exact endpoints.
    pub observed: SiblingOrder,
    /// Order predicted by the regime table.
    pub expected: Option<SiblingOrder>,
}

impl OrderVerdict {
    pub fn agrees(&self) -> bool {
        self.expected == Some(self.observed)
    }
}

/// Compares the children `p` and `p + 1` of `base`.
pub fn cylinder_order(s: u32, u: u32, base: &[u32], p: u32) -> Result<OrderVerdict> {
    check_params(s, u)?;
    for q in [p, p + 1] {
        if !is_block_value(s, u, q) {
            return Err(Error::InvalidParameter(format!(
                "block {q} does not exist for s={s}, u={u}"
            )));
        }
    }
    let parent = Cylinder::new(s, u, base)?;
    let lo = parent.child_unchecked(p);
    let hi = parent.child_unchecked(p + 1);
    let observed = if lo.sup < hi.inf {
        SiblingOrder::Increasing
    } else if lo.inf > hi.sup {
        SiblingOrder::Decreasing
    } else {
        SiblingOrder::Overlapping
    };
    Ok(OrderVerdict { observed, expected: expected_order(s, u, p) })
}

/// Why a point cannot belong to the set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Exclusion {
    /// Outside the hull `[inf, sup]` of the whole set.
    OutsideHull {
        #[serde(with = "crate::rational::json")]
        inf: Rational,
        #[serde(with = "crate::rational::json")]
        sup: Rational,
    },
    /// Between two sibling hulls below `parent`.
    Gap { parent: Vec<u32>, gap: GapInterval },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Location {
    /// The point lies in the hull of the rank-`depth` cylinder with this base.
    Inside { chain: Vec<u32> },
    Excluded { witness: Exclusion },
    /// Two sibling hulls share the point at this rank, so the chain forks.
    Undecided { chain: Vec<u32> },
}

/// Follows the nested hulls containing `x` down to rank `depth`.
pub fn point_locate(x: &Rational, s: u32, u: u32, depth: usize) -> Result<Location> {
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    let mut current = Cylinder::whole_set(s, u)?;
    if !current.hull_contains(x) {
        return Ok(Location::Excluded {
            witness: Exclusion::OutsideHull { inf: current.inf, sup: current.sup },
        });
    }
    for _ in 0..depth {
        let mut kids = current.children();
        let hits: Vec<usize> = (0..kids.len()).filter(|&i| kids[i].hull_contains(x)).collect();
        match hits.len() {
            1 => current = kids.swap_remove(hits[0]),
            0 => {
                let lower = kids.iter().map(|k| &k.sup).filter(|v| *v < x).max().cloned();
                let upper = kids.iter().map(|k| &k.inf).filter(|v| *v > x).min().cloned();
                let gap = GapInterval {
                    lower: lower.expect("parent hull is spanned by its children"),
                    upper: upper.expect("parent hull is spanned by its children"),
                };
                return Ok(Location::Excluded {
                    witness: Exclusion::Gap { parent: current.base, gap },
                });
            }
            _ => return Ok(Location::Undecided { chain: current.base }),
        }
    }
    Ok(Location::Inside { chain: current.base })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_examples() {
        assert_eq!(cylinder_endpoints(3, 0, &[1]).unwrap(), (ratio(5, 12), ratio(1, 2)));
        assert_eq!(cylinder_endpoints(3, 0, &[2]).unwrap(), (ratio(1, 4), ratio(5, 18)));
        assert_eq!(cylinder_endpoints(4, 1, &[]).unwrap(), (ratio(23, 63), ratio(2, 5)));
    }

    #[test]
    fn set_extrema_examples() {
        assert_eq!(set_extrema(3, 0).unwrap(), (ratio(1, 4), ratio(1, 2)));
        assert_eq!(set_extrema(4, 0).unwrap(), (ratio(1, 21), ratio(1, 3)));
        assert_eq!(set_extrema(4, 3).unwrap(), (ratio(1, 3), ratio(14, 15)));
    }

    #[test]
    fn degenerate_sets_are_points() {
        for u in [1, 2] {
            let (inf, sup) = set_extrema(3, u).unwrap();
            assert_eq!(inf, sup);
            assert_eq!(children(3, u, &[]).unwrap().len(), 1);
        }
        assert_eq!(set_extrema(3, 1).unwrap().0, ratio(5, 8));
        assert_eq!(set_extrema(3, 2).unwrap().0, ratio(1, 2));
    }

    #[test]
    fn diameter_examples() {
        assert_eq!(cylinder_diameter(3, 0, &[1]).unwrap(), ratio(1, 12));
        assert_eq!(cylinder_diameter(3, 0, &[1, 1]).unwrap(), ratio(1, 36));
        assert_eq!(cylinder_diameter(3, 0, &[]).unwrap(), ratio(1, 4));
        let c = Cylinder::new(3, 0, &[1]).unwrap();
        assert_eq!(c.diameter(), ratio(1, 2) - ratio(5, 12));
    }

    #[test]
    fn partial_sum_route_agrees() {
        for s in 3..=7 {
            for base in [vec![], vec![1], vec![s - 1, 2], vec![2, 1, s - 1, 1]] {
                let c = Cylinder::new(s, 0, &base).unwrap();
                assert_eq!(partial_sum_endpoints(s, &base).unwrap(), (c.inf.clone(), c.sup.clone()));
                assert_eq!(c.g, c.tau);
            }
        }
    }

    #[test]
    fn invalid_bases() {
        assert!(matches!(Cylinder::new(3, 0, &[0]), Err(Error::InvalidBlock { .. })));
        assert!(matches!(Cylinder::new(5, 2, &[1, 2]), Err(Error::InvalidBlock { index: 1, .. })));
        assert!(cylinder_diameter(4, 1, &[1]).is_err());
    }

    #[test]
    fn gap_examples() {
        let g = gap_interval(3, &[], 1).unwrap();
        assert_eq!((g.lower.clone(), g.upper.clone()), (ratio(5, 18), ratio(5, 12)));
        let g = gap_interval(4, &[], 2).unwrap();
        assert_eq!((g.lower, g.upper), (ratio(5, 96), ratio(43, 336)));
        let g = gap_interval(3, &[1], 1).unwrap();
        assert_eq!((g.lower, g.upper), (ratio(23, 54), ratio(17, 36)));
        assert!(gap_interval(3, &[], 2).is_err());
        assert!(gap_interval(3, &[], 0).is_err());
    }

    #[test]
    fn order_examples() {
        let v = cylinder_order(3, 0, &[], 1).unwrap();
        assert_eq!(v.observed, SiblingOrder::Decreasing);
        assert!(v.agrees());
        let v = cylinder_order(5, 4, &[], 1).unwrap();
        assert_eq!(v.observed, SiblingOrder::Increasing);
        assert!(v.agrees());
        let v = cylinder_order(6, 2, &[], 3).unwrap();
        assert_eq!(v.observed, SiblingOrder::Decreasing);
        assert!(v.agrees());
        assert!(cylinder_order(6, 2, &[], 1).is_err());
        assert!(cylinder_order(6, 2, &[], 5).is_err());
    }

    #[test]
    fn children_examples() {
        let kids = children(3, 0, &[]).unwrap();
        let bases: Vec<Vec<u32>> = kids.iter().map(|k| k.base.clone()).collect();
        assert_eq!(bases, vec![vec![1], vec![2]]);
        let kids = children(4, 2, &[3]).unwrap();
        let bases: Vec<Vec<u32>> = kids.iter().map(|k| k.base.clone()).collect();
        assert_eq!(bases, vec![vec![3, 1], vec![3, 3]]);
        let parent = Cylinder::new(3, 0, &[1]).unwrap();
        let child = parent.child(2).unwrap();
        assert_eq!(child.diameter() / parent.diameter(), ratio(1, 9));
    }

    #[test]
    fn locate_examples() {
        let loc = point_locate(&ratio(1, 2), 3, 0, 8).unwrap();
        assert_eq!(loc, Location::Inside { chain: vec![1; 8] });
        let loc = point_locate(&ratio(1, 4), 3, 0, 8).unwrap();
        assert_eq!(loc, Location::Inside { chain: vec![2; 8] });
        let loc = point_locate(&ratio(1, 3), 3, 0, 3).unwrap();
        match loc {
            Location::Excluded { witness: Exclusion::Gap { parent, gap } } => {
                assert!(parent.is_empty());
                assert_eq!(gap, gap_interval(3, &[], 1).unwrap());
            }
            other => panic!("unexpected {other:?}"),
        }
        let loc = point_locate(&ratio(3, 4), 3, 0, 3).unwrap();
        assert!(matches!(loc, Location::Excluded { witness: Exclusion::OutsideHull { .. } }));
        assert!(point_locate(&ratio(1, 2), 3, 0, 0).is_err());
    }

    #[test]
    fn cylinder_json_record() {
        let c = Cylinder::new(3, 0, &[1]).unwrap();
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["inf"]["num"], "5");
        assert_eq!(v["inf"]["den"], "12");
        assert_eq!(v["base"], serde_json::json!([1]));
    }
}
