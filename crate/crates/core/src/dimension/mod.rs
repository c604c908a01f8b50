//! Similarity dimensions from Moran-type equations, plus a box-counting
//! estimator used as an independent empirical check.
//!
//! A set built from `N_k` pieces scaled by `s^{-k}` has dimension `α`, the
//! unique root of
//!
//! ```text
//! F(α) = Σ_k N_k s^{-kα} = 1.
//! ```
//!
//! `F` is strictly decreasing, so the root is bracketed and bisected.

mod boxcount;

pub use boxcount::{
    box_count_estimate, box_count_with, cover_from_alphabet, power_scales, BoxCount, BoxCountOptions,
    HullCover, ScaleCount,
};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::blocks::{block_values, check_params};
use crate::comboset::ComboAlphabet;
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-12;

const MAX_ITERATIONS: usize = 400;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MoranEquation {
    s: u32,
    counts: BTreeMap<u32, u64>,
}

impl MoranEquation {
    /// `counts` maps a word length `k >= 1` to the number of words `N_k`.
    pub fn new(s: u32, counts: BTreeMap<u32, u64>) -> Result<Self> {
        if s < 2 {
            return Err(Error::InvalidRadix { s, min: 2 });
        }
        if counts.contains_key(&0) {
            return Err(Error::InvalidEquation("word lengths must be at least 1".into()));
        }
        let counts: BTreeMap<u32, u64> = counts.into_iter().filter(|&(_, n)| n > 0).collect();
        if counts.is_empty() {
            return Err(Error::InvalidEquation("all counts are zero".into()));
        }
        Ok(MoranEquation { s, counts })
    }

    pub fn from_alphabet(a: &ComboAlphabet) -> Self {
        let counts = a.length_counts().iter().map(|(&k, &n)| (k as u32, n)).collect();
        MoranEquation::new(a.base(), counts).expect("alphabets are nonempty")
    }

    pub fn base(&self) -> u32 {
        self.s
    }

    pub fn counts(&self) -> &BTreeMap<u32, u64> {
        &self.counts
    }

    /// `m = Σ N_k`.
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn eval(&self, alpha: f64) -> f64 {
        let s = self.s as f64;
        self.counts.iter().map(|(&k, &n)| n as f64 * s.powf(-(k as f64) * alpha)).sum()
    }

    /// True when all words have one length `k` and there are `s^k` of them.
    pub fn is_full_shift(&self) -> bool {
        match self.single_length() {
            Some((k, n)) => (self.s as u128).checked_pow(k).is_some_and(|p| p == n as u128),
            None => false,
        }
    }

    fn single_length(&self) -> Option<(u32, u64)> {
        (self.counts.len() == 1).then(|| self.counts.iter().map(|(&k, &n)| (k, n)).next().unwrap())
    }
}

/// Exact description of a root when the equation is solvable by hand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedForm {
    pub expr: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionResult {
    pub alpha: f64,
    /// `|F(α) - 1|`.
    pub residual: f64,
    /// Final bisection interval.
    pub bracket: (f64, f64),
    pub closed_form: Option<ClosedForm>,
}

fn log_expr(s: u32, arg: &str) -> String {
    format!("log_{s}({arg})")
}

/// Closed forms with `t = s^{-α}`: a single length `k` gives
/// `α = (1/k) log_s N_k`; lengths `{1, 2}` give a quadratic in `t`.
fn closed_form(eq: &MoranEquation) -> Option<ClosedForm> {
    let s = eq.s;
    let ln_s = (s as f64).ln();
    if eq.total() == 1 {
        return Some(ClosedForm { expr: "0".into(), value: 0.0 });
    }
    if eq.is_full_shift() {
        return Some(ClosedForm { expr: "1".into(), value: 1.0 });
    }
    if let Some((k, n)) = eq.single_length() {
        let expr = if k == 1 {
            log_expr(s, &n.to_string())
        } else {
            format!("(1/{k})*{}", log_expr(s, &n.to_string()))
        };
        return Some(ClosedForm { expr, value: (n as f64).ln() / (k as f64 * ln_s) });
    }
    let keys: Vec<u32> = eq.counts.keys().copied().collect();
    if keys == [1, 2] {
        // a t + b t² = 1  →  1/t = 2b / (sqrt(a² + 4b) - a)
        let a = eq.counts[&1];
        let b = eq.counts[&2];
        let disc = a * a + 4 * b;
        let value = ((2 * b) as f64 / ((disc as f64).sqrt() - a as f64)).ln() / ln_s;
        let expr = log_expr(s, &format!("{}/(sqrt({disc})-{a})", 2 * b));
        return Some(ClosedForm { expr, value });
    }
    None
}

/// Root of `Σ N_k s^{-kα} = 1` by bisection.
///
/// The bracket starts at `[0, 1]` and is doubled upward while `F(hi) > 1`.
/// Bisection runs until the bracket is narrower than `tol` and the residual
/// is at most `tol`, or the bracket cannot shrink further in `f64`.
pub fn moran_solve(eq: &MoranEquation, tol: f64) -> Result<DimensionResult> {
    if tol.is_nan() || tol <= 0.0 || !tol.is_finite() {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let closed_form = closed_form(eq);
    if eq.total() == 1 {
        return Ok(DimensionResult { alpha: 0.0, residual: 0.0, bracket: (0.0, 0.0), closed_form });
    }
    if eq.is_full_shift() {
        return Ok(DimensionResult { alpha: 1.0, residual: 0.0, bracket: (1.0, 1.0), closed_form });
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while eq.eval(hi) > 1.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::InvalidEquation("no root below 1e6".into()));
        }
    }
    let mut alpha = 0.5 * (lo + hi);
    for _ in 0..MAX_ITERATIONS {
        alpha = 0.5 * (lo + hi);
        if alpha <= lo || alpha >= hi {
            break;
        }
        let f = eq.eval(alpha);
        if hi - lo <= tol && (f - 1.0).abs() <= tol {
            break;
        }
        if f > 1.0 {
            lo = alpha;
        } else {
            hi = alpha;
        }
    }
    Ok(DimensionResult {
        alpha,
        residual: (eq.eval(alpha) - 1.0).abs(),
        bracket: (lo, hi),
        closed_form,
    })
}

/// Dimension of `S_(s,u)`: one piece of scale `s^{-c}` per allowed block `c`.
pub fn dim_s(s: u32, u: u32) -> Result<DimensionResult> {
    check_params(s, u)?;
    let counts = block_values(s, u).into_iter().map(|c| (c, 1)).collect();
    moran_solve(&MoranEquation::new(s, counts)?, DEFAULT_TOL)
}

/// Counts of the combination set with one word of length 1 and `s - 1` words
/// of every length `2..=s-1`.
pub fn tilde_equation(s: u32) -> Result<MoranEquation> {
    if s < 3 {
        return Err(Error::InvalidRadix { s, min: 3 });
    }
    let mut counts = BTreeMap::from([(1, 1)]);
    counts.extend((2..s).map(|k| (k, (s - 1) as u64)));
    MoranEquation::new(s, counts)
}

pub fn dim_tilde(s: u32) -> Result<DimensionResult> {
    moran_solve(&tilde_equation(s)?, DEFAULT_TOL)
}

/// Dimension of the set spanned by an alphabet.
///
/// If some length `k` carries all `s^k` words, every expansion decomposes
/// into such words and the set is all of `[0, 1]`, so `α = 1`. A Moran root
/// above 1 means the word cylinders overlap; the set still lies in `[0, 1]`,
/// so the result is capped at 1.
pub fn dim_alphabet(a: &ComboAlphabet, tol: f64) -> Result<DimensionResult> {
    let eq = MoranEquation::from_alphabet(a);
    let full = eq.counts.iter().any(|(&k, &n)| {
        (eq.s as u128).checked_pow(k).is_some_and(|p| p == n as u128)
    });
    let r = moran_solve(&eq, tol)?;
    if (full && !eq.is_full_shift()) || r.alpha > 1.0 {
        return Ok(DimensionResult {
            alpha: 1.0,
            residual: 0.0,
            bracket: (1.0, 1.0),
            closed_form: Some(ClosedForm { expr: "1".into(), value: 1.0 }),
        });
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comboset::{sprime3_alphabet, tilde_alphabet};

    fn eq(s: u32, counts: &[(u32, u64)]) -> MoranEquation {
        MoranEquation::new(s, counts.iter().copied().collect()).unwrap()
    }

    #[test]
    fn golden_ratio_case() {
        let r = moran_solve(&eq(3, &[(1, 1), (2, 1)]), DEFAULT_TOL).unwrap();
        let exact = ((5f64.sqrt() + 1.0) / 2.0).ln() / 3f64.ln();
        assert!((r.alpha - exact).abs() < 1e-11);
        let cf = r.closed_form.unwrap();
        assert_eq!(cf.expr, "log_3(2/(sqrt(5)-1))");
        assert!((cf.value - exact).abs() < 1e-15);
    }

    #[test]
    fn pure_power_case() {
        let r = moran_solve(&eq(3, &[(3, 2)]), DEFAULT_TOL).unwrap();
        assert!((r.alpha - 2f64.ln() / 3f64.ln() / 3.0).abs() < 1e-11);
        assert_eq!(r.closed_form.unwrap().expr, "(1/3)*log_3(2)");
    }

    #[test]
    fn cubic_cases_match_polynomial_roots() {
        // roots of t + t² + t³ = 1, t³ + t² = 1 and t + 3t² + 3t³ = 1 from a companion-matrix solver
        let r = moran_solve(&eq(4, &[(1, 1), (2, 1), (3, 1)]), DEFAULT_TOL).unwrap();
        assert!((r.alpha - 0.43957321080331907).abs() < 1e-10);
        assert!(r.closed_form.is_none());
        let r = dim_s(4, 1).unwrap();
        assert!((r.alpha - 0.20284261568791231).abs() < 1e-10);
        let r = dim_tilde(4).unwrap();
        assert!((r.alpha - 0.6888879715275168).abs() < 1e-10);
        let r = dim_tilde(5).unwrap();
        assert!((r.alpha - 0.6744981393158146).abs() < 1e-10);
    }

    #[test]
    fn single_word_and_full_shift() {
        for s in 2..=9 {
            for k in 1..=4 {
                let r = moran_solve(&eq(s, &[(k, 1)]), DEFAULT_TOL).unwrap();
                assert_eq!(r.alpha, 0.0);
            }
        }
        let r = moran_solve(&eq(3, &[(1, 3)]), DEFAULT_TOL).unwrap();
        assert_eq!(r.alpha, 1.0);
        let r = moran_solve(&eq(2, &[(3, 8)]), DEFAULT_TOL).unwrap();
        assert_eq!(r.alpha, 1.0);
    }

    #[test]
    fn dim_s_examples() {
        let r = dim_s(3, 0).unwrap();
        assert!((r.alpha - 0.4380178794859424).abs() < 1e-10);
        assert_eq!(dim_s(3, 1).unwrap().alpha, 0.0);
        assert_eq!(dim_s(3, 2).unwrap().alpha, 0.0);
        let r = dim_tilde(3).unwrap();
        assert!((r.alpha - 2f64.ln() / 3f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn tilde_dominates_block_sets() {
        for s in 3..=8 {
            let t = dim_tilde(s).unwrap().alpha;
            for u in 0..s {
                assert!(t >= dim_s(s, u).unwrap().alpha, "s={s} u={u}");
            }
        }
    }

    #[test]
    fn bracket_and_residual() {
        for counts in [vec![(1, 1), (2, 1)], vec![(2, 5), (7, 3)], vec![(1, 4), (3, 9)]] {
            let e = eq(5, &counts);
            let r = moran_solve(&e, DEFAULT_TOL).unwrap();
            let (lo, hi) = r.bracket;
            assert!(lo <= r.alpha && r.alpha <= hi);
            assert!(hi - lo <= DEFAULT_TOL);
            assert!(e.eval(lo) >= 1.0 && e.eval(hi) <= 1.0);
            assert!(r.residual <= 10.0 * DEFAULT_TOL);
        }
    }

    #[test]
    fn root_above_one_extends_bracket() {
        let e = eq(2, &[(1, 5)]);
        let r = moran_solve(&e, DEFAULT_TOL).unwrap();
        assert!((r.alpha - 5f64.ln() / 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn invalid_equations() {
        assert!(matches!(MoranEquation::new(3, BTreeMap::from([(1, 0)])), Err(Error::InvalidEquation(_))));
        assert!(MoranEquation::new(3, BTreeMap::new()).is_err());
        assert!(MoranEquation::new(3, BTreeMap::from([(0, 2)])).is_err());
        assert!(MoranEquation::new(1, BTreeMap::from([(1, 2)])).is_err());
        assert!(moran_solve(&eq(3, &[(1, 2)]), 0.0).is_err());
        assert!(moran_solve(&eq(3, &[(1, 2)]), f64::NAN).is_err());
    }

    #[test]
    fn alphabets() {
        let r = dim_alphabet(&sprime3_alphabet(), DEFAULT_TOL).unwrap();
        assert!((r.alpha - 0.21030991785715247).abs() < 1e-10);
        let r = dim_alphabet(&tilde_alphabet(3).unwrap(), DEFAULT_TOL).unwrap();
        assert!((r.alpha - 0.6309297535714574).abs() < 1e-10);
        let all = ComboAlphabet::from_strs(3, &["0", "1", "2", "12"]).unwrap();
        assert_eq!(dim_alphabet(&all, DEFAULT_TOL).unwrap().alpha, 1.0);
        let dense = ComboAlphabet::from_strs(2, &["0", "1", "00"]).unwrap();
        assert!(moran_solve(&MoranEquation::from_alphabet(&dense), DEFAULT_TOL).unwrap().alpha > 1.0);
        assert_eq!(dim_alphabet(&dense, DEFAULT_TOL).unwrap().alpha, 1.0);
    }
}
