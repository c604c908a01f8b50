//! Covering stages of `S_(s,u)` and the geometric decay of their length.
//!
//! Stage `E_k` is the union of the hulls of all rank-`k` cylinders. A child
//! with block `c` has diameter `s^{-c}` times its parent's, so
//!
//! ```text
//! λ(E_k) = σ^k · d₀,    σ = Σ_{c ≠ u} s^{-c},    d₀ = d(S_(s,u)).
//! ```
//!
//! Stages are built from cylinders and summed directly; the closed form is
//! kept as an independent check.

use num::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::blocks::{block_values, check_params};
use crate::cylinder::{set_diameter, Cylinder};
use crate::error::{Error, Result};
use crate::rational::{inv_pow, Rational};

/// Default cap on `count × denominator bits` for one stage.
pub const DEFAULT_BIT_BUDGET: u64 = 1 << 20;

pub fn sigma(s: u32, u: u32) -> Result<Rational> {
    check_params(s, u)?;
    Ok(block_values(s, u).into_iter().map(|c| inv_pow(s, c as usize)).sum())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverStage {
    pub s: u32,
    pub u: u32,
    pub k: usize,
    /// Rank-`k` cylinders sorted by infimum.
    pub intervals: Vec<Cylinder>,
    /// Sum of the hull lengths.
    #[serde(with = "crate::rational::json")]
    pub total_length: Rational,
    /// `σ^k · d₀`.
    #[serde(with = "crate::rational::json")]
    pub closed_form: Rational,
}

impl CoverStage {
    pub fn agrees(&self) -> bool {
        self.total_length == self.closed_form
    }

    /// True when consecutive hulls are separated by a positive gap.
    pub fn is_disjoint(&self) -> bool {
        self.intervals.windows(2).all(|w| w[0].sup < w[1].inf)
    }
}

/// Rough cost of stage `k`: cylinder count times the bit length of the
/// largest denominator, `s^{k(s-1) + s}`.
pub fn stage_cost(s: u32, u: u32, k: usize) -> u64 {
    let count = (block_values(s, u).len() as f64).powi(k as i32);
    let bits = ((k as f64) * (s as f64 - 1.0) + s as f64) * (s as f64).log2();
    let cost = count * bits;
    if cost >= u64::MAX as f64 {
        u64::MAX
    } else {
        cost.ceil() as u64
    }
}

fn check_budget(s: u32, u: u32, k: usize, budget: u64) -> Result<()> {
    let cost = stage_cost(s, u, k);
    if cost > budget {
        return Err(Error::Budget(format!(
            "stage k={k} for s={s}, u={u} needs about {cost} bits, budget is {budget}"
        )));
    }
    Ok(())
}

fn next_stage(parents: &[Cylinder]) -> Vec<Cylinder> {
    let mut out: Vec<Cylinder> = parents.par_iter().flat_map_iter(|p| p.children()).collect();
    out.sort_by(|a, b| a.inf.cmp(&b.inf).then_with(|| a.sup.cmp(&b.sup)));
    out
}

fn finish(s: u32, u: u32, k: usize, intervals: Vec<Cylinder>, sigma: &Rational, d0: &Rational) -> CoverStage {
    let total_length = intervals.par_iter().map(|c| c.diameter()).reduce(Rational::zero, |a, b| a + b);
    let closed_form = num::pow(sigma.clone(), k) * d0;
    CoverStage { s, u, k, intervals, total_length, closed_form }
}

pub fn cover_stage(s: u32, u: u32, k: usize) -> Result<CoverStage> {
    cover_stage_with_budget(s, u, k, DEFAULT_BIT_BUDGET)
}

pub fn cover_stage_with_budget(s: u32, u: u32, k: usize, budget: u64) -> Result<CoverStage> {
    check_params(s, u)?;
    if k == 0 {
        return Err(Error::InvalidParameter("stage index k must be at least 1".into()));
    }
    check_budget(s, u, k, budget)?;
    let sig = sigma(s, u)?;
    let d0 = set_diameter(s, u)?;
    let mut stage = vec![Cylinder::whole_set(s, u)?];
    for _ in 0..k {
        stage = next_stage(&stage);
    }
    Ok(finish(s, u, k, stage, &sig, &d0))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecayRow {
    pub k: usize,
    /// Directly summed `λ(E_k)`.
    #[serde(with = "crate::rational::json")]
    pub length: Rational,
    /// `λ(E_k) / λ(E_{k-1})`; absent for `k = 1` and when the previous
    /// length is zero.
    #[serde(with = "option_json")]
    pub ratio: Option<Rational>,
    /// Direct sum equals `σ^k · d₀`.
    pub closed_form_agrees: bool,
}

mod option_json {
    use serde::Serializer;

    use crate::rational::{Rational, RationalJson};

    pub fn serialize<S: Serializer>(x: &Option<Rational>, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_some(&x.as_ref().map(RationalJson::from))
    }
}

/// Stage lengths for `k = 1..=k_max`, each stage refined from the last.
pub fn measure_decay_report(s: u32, u: u32, k_max: usize) -> Result<Vec<DecayRow>> {
    measure_decay_report_with_budget(s, u, k_max, DEFAULT_BIT_BUDGET)
}

pub fn measure_decay_report_with_budget(s: u32, u: u32, k_max: usize, budget: u64) -> Result<Vec<DecayRow>> {
    check_params(s, u)?;
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    check_budget(s, u, k_max, budget)?;
    let sig = sigma(s, u)?;
    let d0 = set_diameter(s, u)?;
    let mut stage = vec![Cylinder::whole_set(s, u)?];
    let mut prev: Option<Rational> = None;
    let mut rows = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        stage = next_stage(&stage);
        let st = finish(s, u, k, stage, &sig, &d0);
        let ratio = prev.as_ref().filter(|p| p.is_positive()).map(|p| &st.total_length / p);
        rows.push(DecayRow { k, length: st.total_length.clone(), ratio, closed_form_agrees: st.agrees() });
        prev = Some(st.total_length);
        stage = st.intervals;
    }
    Ok(rows)
}

/// Checks that every interval of `child` lies in exactly one interval of
/// `parent`, and that each parent interval keeps an uncovered open piece.
pub fn check_refinement(parent: &CoverStage, child: &CoverStage) -> Result<(), String> {
    if child.k != parent.k + 1 || child.s != parent.s || child.u != parent.u {
        return Err("stages are not consecutive".into());
    }
    for c in &child.intervals {
        let holders = parent.intervals.iter().filter(|p| c.hull_within(p)).count();
        if holders != 1 {
            return Err(format!("child {:?} lies in {holders} parent intervals", c.base));
        }
    }
    for p in parent.intervals.iter().filter(|p| p.diameter().is_positive()) {
        let mut inner: Vec<&Cylinder> = child.intervals.iter().filter(|c| c.base.starts_with(&p.base)).collect();
        inner.sort_by(|a, b| a.inf.cmp(&b.inf));
        let mut reach = p.inf.clone();
        let mut gap = false;
        for c in inner {
            if c.inf > reach {
                gap = true;
                break;
            }
            if c.sup > reach {
                reach = c.sup.clone();
            }
        }
        if !gap && reach >= p.sup {
            return Err(format!("children cover all of parent {:?}", p.base));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn sigma_values() {
        assert_eq!(sigma(3, 0).unwrap(), ratio(4, 9));
        assert_eq!(sigma(4, 0).unwrap(), ratio(21, 64));
        assert_eq!(sigma(3, 1).unwrap(), ratio(1, 9));
        assert!(sigma(2, 0).is_err());
    }

    #[test]
    fn first_stages_s3() {
        let e1 = cover_stage(3, 0, 1).unwrap();
        let hulls: Vec<_> = e1.intervals.iter().map(|c| (c.inf.clone(), c.sup.clone())).collect();
        assert_eq!(hulls, vec![(ratio(1, 4), ratio(5, 18)), (ratio(5, 12), ratio(1, 2))]);
        assert_eq!(e1.total_length, ratio(1, 9));
        assert!(e1.agrees() && e1.is_disjoint());
        let e2 = cover_stage(3, 0, 2).unwrap();
        assert_eq!(e2.total_length, ratio(4, 81));
        assert!(e2.agrees() && e2.is_disjoint());
        check_refinement(&e1, &e2).unwrap();
    }

    #[test]
    fn deep_stage_s3() {
        let e8 = cover_stage(3, 0, 8).unwrap();
        assert!(e8.agrees());
        assert_eq!(e8.total_length, num::pow(ratio(4, 9), 8) / num::BigInt::from(4));
        assert!(e8.total_length < ratio(1, 1000));
    }

    #[test]
    fn decay_ratios() {
        let rows = measure_decay_report(3, 0, 4).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows[0].ratio.is_none());
        for r in &rows[1..] {
            assert_eq!(r.ratio, Some(ratio(4, 9)));
        }
        assert!(rows.iter().all(|r| r.closed_form_agrees));
        let rows = measure_decay_report(4, 0, 4).unwrap();
        assert!(rows[1..].iter().all(|r| r.ratio == Some(ratio(21, 64))));
        assert!(rows.windows(2).all(|w| w[1].length < w[0].length));
    }

    #[test]
    fn degenerate_single_point() {
        let rows = measure_decay_report(3, 2, 5).unwrap();
        assert!(rows.iter().all(|r| r.length.is_zero() && r.ratio.is_none() && r.closed_form_agrees));
    }

    #[test]
    fn stages_nest_for_all_markers() {
        for s in 3..=6 {
            for u in 0..s {
                let mut prev = cover_stage(s, u, 1).unwrap();
                for k in 2..=3 {
                    let next = cover_stage(s, u, k).unwrap();
                    assert!(next.agrees(), "s={s} u={u} k={k}");
                    assert!(next.is_disjoint(), "s={s} u={u} k={k}");
                    check_refinement(&prev, &next).unwrap();
                    prev = next;
                }
            }
        }
    }

    #[test]
    fn budget_guard() {
        assert!(cover_stage(4, 0, 8).is_ok());
        let err = cover_stage(8, 0, 12).unwrap_err();
        assert!(err.is_resource());
        assert!(matches!(cover_stage_with_budget(3, 0, 2, 10), Err(Error::Budget(_))));
        assert!(cover_stage(3, 0, 0).is_err());
    }
}
