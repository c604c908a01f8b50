//! Independent cross-checks for the closed forms in [`crate::cylinder`] and
//! [`crate::comboset`].
//!
//! Nothing here uses the set extrema. Values come from the digit codec, from
//! exhaustive minimization over block extensions, or from textbook formulas
//! written out term by term.

use std::collections::HashMap;

use num::{BigInt, One, Zero};
use rand::Rng;

use crate::blocks::{block_encode, block_values, block_word, check_blocks, check_params, BlockSequence};
use crate::comboset::ComboAlphabet;
use crate::cylinder::GapInterval;
use crate::digits::{digits_to_rational, DigitString};
use crate::error::{Error, Result};
use crate::rational::{big_pow, inv_pow, Rational};

/// Value of the word encoding `base`, i.e. the prefix `τ` with a zero tail.
pub fn prefix_value(s: u32, u: u32, base: &[u32]) -> Result<Rational> {
    let b = BlockSequence::finite(s, u, base.to_vec())?;
    Ok(digits_to_rational(&block_encode(&b)))
}

/// Value of the element whose blocks are all `c`.
pub fn constant_block_value(s: u32, u: u32, c: u32) -> Result<Rational> {
    check_blocks(s, u, &[c], 0)?;
    Ok(digits_to_rational(&DigitString::periodic(s, vec![], block_word(u, c))?))
}

/// Min and max over elements of a cylinder that extend `base` by exactly
/// `depth` blocks and then continue with a fixed tail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionBounds {
    pub min: Rational,
    pub max: Rational,
    /// `s^{-(L + depth)}`: the true extrema lie within this of `min`, `max`.
    pub tail_bound: Rational,
}

impl ExtensionBounds {
    /// `inf ≤ min ≤ inf + tail` and `sup - tail ≤ max ≤ sup`.
    pub fn brackets(&self, inf: &Rational, sup: &Rational) -> bool {
        inf <= &self.min
            && &self.min - inf <= self.tail_bound
            && &self.max <= sup
            && sup - &self.max <= self.tail_bound
    }
}

fn tail_value(s: u32, u: u32) -> Rational {
    let c = block_values(s, u)[0];
    constant_block_value(s, u, c).expect("first block value exists")
}

/// Exhaustive extrema by dynamic programming.
///
/// Appending a block is an increasing map `y ↦ v + s^{-c} y`, so the best
/// value over `depth` blocks is `min_c (v_c + s^{-c} f_{depth-1})`, which
/// equals the minimum over all `(s-1)^depth` extensions.
pub fn extension_bounds(s: u32, u: u32, base: &[u32], depth: usize) -> Result<ExtensionBounds> {
    check_params(s, u)?;
    let tau = prefix_value(s, u, base)?;
    let len: usize = base.iter().map(|&c| c as usize).sum();
    let steps: Vec<(Rational, Rational)> = block_values(s, u)
        .into_iter()
        .map(|c| (prefix_value(s, u, &[c]).expect("valid block"), inv_pow(s, c as usize)))
        .collect();
    let t0 = tail_value(s, u);
    let (mut lo, mut hi) = (t0.clone(), t0);
    for _ in 0..depth {
        lo = steps.iter().map(|(v, k)| v + k * &lo).min().expect("nonempty alphabet");
        hi = steps.iter().map(|(v, k)| v + k * &hi).max().expect("nonempty alphabet");
    }
    let scale = inv_pow(s, len);
    Ok(ExtensionBounds {
        min: &tau + &scale * lo,
        max: &tau + &scale * hi,
        tail_bound: inv_pow(s, len + depth),
    })
}

/// Same as [`extension_bounds`] by listing every extension.
pub fn enumerate_extension_bounds(s: u32, u: u32, base: &[u32], depth: usize) -> Result<ExtensionBounds> {
    check_params(s, u)?;
    let values = block_values(s, u);
    let total = (values.len() as u64).checked_pow(depth as u32).filter(|&n| n <= 1 << 22);
    if total.is_none() {
        return Err(Error::Budget(format!("{}^{depth} extensions", values.len())));
    }
    let t0 = tail_value(s, u);
    let len: usize = base.iter().map(|&c| c as usize).sum();
    let mut best: Option<(Rational, Rational)> = None;
    let mut idx = vec![0usize; depth];
    loop {
        let mut blocks = base.to_vec();
        blocks.extend(idx.iter().map(|&i| values[i]));
        let ext_len: usize = blocks.iter().map(|&c| c as usize).sum();
        let x = prefix_value(s, u, &blocks)? + inv_pow(s, ext_len) * &t0;
        best = Some(match best {
            None => (x.clone(), x),
            Some((lo, hi)) => (lo.min(x.clone()), hi.max(x)),
        });
        // odometer over block indices
        let mut pos = depth;
        loop {
            if pos == 0 {
                let (min, max) = best.expect("at least one extension");
                return Ok(ExtensionBounds { min, max, tail_bound: inv_pow(s, len + depth) });
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < values.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Extrema over periodic words and all words of length `depth` over an
/// alphabet, followed by a fixed periodic tail.
pub fn combo_extension_bounds(a: &ComboAlphabet, depth: usize) -> ExtensionBounds {
    let s = a.base();
    let steps: Vec<(Rational, Rational)> =
        a.words().iter().map(|w| (a.word_value(w), inv_pow(s, w.len()))).collect();
    let t0 = a.periodic_value(&a.words()[0]);
    let (mut lo, mut hi) = (t0.clone(), t0);
    for _ in 0..depth {
        lo = steps.iter().map(|(v, k)| v + k * &lo).min().expect("nonempty alphabet");
        hi = steps.iter().map(|(v, k)| v + k * &hi).max().expect("nonempty alphabet");
    }
    ExtensionBounds { min: lo, max: hi, tail_bound: inv_pow(s, depth) }
}

/// Gap `(b_{p+1}, a_p)` of `S_(s,0)` written out from the partial sums
/// `g = Σ c_k s^{-(c_1+...+c_k)}`.
pub fn gap_formula(s: u32, base: &[u32], p: u32) -> Result<GapInterval> {
    check_params(s, 0)?;
    check_blocks(s, 0, base, 0)?;
    if p < 1 || p + 2 > s {
        return Err(Error::InvalidParameter(format!("gap index p={p} outside 1..={}", s - 2)));
    }
    let mut g = Rational::zero();
    let mut len = 0usize;
    for &c in base {
        len += c as usize;
        g += Rational::new(BigInt::from(c), big_pow(s, len));
    }
    let sm1 = BigInt::from(s - 1);
    let top = big_pow(s, s as usize - 1) - BigInt::one();
    let b_scale = big_pow(s, len + p as usize + 1);
    let a_scale = big_pow(s, len + p as usize);
    let lower = Rational::new(BigInt::from(p + 1), b_scale.clone())
        + Rational::new(BigInt::one(), &sm1 * &b_scale)
        + &g;
    let upper = Rational::new(BigInt::from(p), a_scale.clone()) + Rational::new(sm1, top * a_scale) + g;
    Ok(GapInterval { lower, upper })
}

/// `a_p - b_{p+1}` in closed form:
/// `((s^{s-1}-1)(p(s-1)^2 - s) + s(s-1)^2) / ((s-1)(s^{s-1}-1) s^{L+p+1})`.
pub fn gap_length_formula(s: u32, base: &[u32], p: u32) -> Result<Rational> {
    check_blocks(s, 0, base, 0)?;
    let len: usize = base.iter().map(|&c| c as usize).sum();
    let sm1 = BigInt::from(s - 1);
    let top = big_pow(s, s as usize - 1) - BigInt::one();
    let num = &top * (BigInt::from(p) * &sm1 * &sm1 - BigInt::from(s)) + BigInt::from(s) * &sm1 * &sm1;
    let den = sm1 * top * big_pow(s, len + p as usize + 1);
    Ok(Rational::new(num, den))
}

/// Result of searching a gap for elements of `S_(s,0)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GapAudit {
    /// Search nodes expanded.
    pub nodes: u64,
    /// Elements tested against the gap.
    pub elements: u64,
    /// Block prefixes whose test elements fell inside the gap.
    pub hits: Vec<Vec<u32>>,
}

/// Searches every `u = 0` block prefix of `depth` blocks for an element inside
/// the open interval `gap`.
///
/// Each prefix is completed with the tails `1 1 1 ...` and
/// `(s-1) (s-1) ...`. A subtree with prefix value `τ` and digit length `L` is
/// skipped when `[τ, τ + s^{-L}]` misses the gap, which is sound because any
/// digit tail lies in `[0, 1]`.
pub fn gap_audit(s: u32, gap: &GapInterval, depth: usize) -> Result<GapAudit> {
    check_params(s, 0)?;
    let values = block_values(s, 0);
    let tails = [constant_block_value(s, 0, 1)?, constant_block_value(s, 0, s - 1)?];
    let steps: Vec<(u32, Rational)> = values.iter().map(|&c| (c, Rational::new(BigInt::from(c), BigInt::one()))).collect();
    let mut audit = GapAudit::default();
    let mut stack: Vec<(Vec<u32>, Rational, usize)> = vec![(vec![], Rational::zero(), 0)];
    while let Some((prefix, tau, len)) = stack.pop() {
        audit.nodes += 1;
        let scale = inv_pow(s, len);
        if &tau + &scale <= gap.lower || tau >= gap.upper {
            continue;
        }
        if prefix.len() == depth {
            for t in &tails {
                audit.elements += 1;
                if gap.contains(&(&tau + &scale * t)) {
                    audit.hits.push(prefix.clone());
                }
            }
            continue;
        }
        for (c, cv) in &steps {
            let next = len + *c as usize;
            let mut p = prefix.clone();
            p.push(*c);
            stack.push((p, &tau + cv * inv_pow(s, next), next));
        }
    }
    Ok(audit)
}

/// Backtracking membership test for a finite digit word in the block
/// language, without the streaming scanner.
pub fn matches_block_language(s: u32, u: u32, digits: &[u32]) -> bool {
    fn go(s: u32, u: u32, d: &[u32], memo: &mut HashMap<usize, bool>, at: usize) -> bool {
        if at == d.len() {
            return true;
        }
        if let Some(&r) = memo.get(&at) {
            return r;
        }
        let r = block_values(s, u).into_iter().any(|c| {
            let w = block_word(u, c);
            d[at..].starts_with(&w) && go(s, u, d, memo, at + w.len())
        });
        memo.insert(at, r);
        r
    }
    go(s, u, digits, &mut HashMap::new(), 0)
}

/// Number of block sequences with digit length exactly `n`.
pub fn count_words(s: u32, u: u32, n: usize) -> u128 {
    let values = block_values(s, u);
    let mut a = vec![0u128; n + 1];
    a[0] = 1;
    for i in 1..=n {
        a[i] = values.iter().filter(|&&c| c as usize <= i).map(|&c| a[i - c as usize]).sum();
    }
    a[n]
}

/// Number of word sequences over `lengths` whose total length lies in
/// `(max_digits - L, max_digits]`, `L` the largest length.
pub fn count_cover_prefixes(lengths: &[usize], max_digits: usize) -> u128 {
    let longest = lengths.iter().copied().max().unwrap_or(0);
    let mut a = vec![0u128; max_digits + 1];
    a[0] = 1;
    for i in 1..=max_digits {
        a[i] = lengths.iter().filter(|&&k| k <= i).map(|&k| a[i - k]).sum();
    }
    (max_digits.saturating_sub(longest) + 1..=max_digits).map(|i| a[i]).sum()
}

/// `n` blocks drawn uniformly from the allowed values.
pub fn random_blocks<R: Rng + ?Sized>(rng: &mut R, s: u32, u: u32, n: usize) -> Vec<u32> {
    let values = block_values(s, u);
    (0..n).map(|_| values[rng.gen_range(0..values.len())]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comboset::{block_alphabet, comboset_extrema, enumerate_prefixes, tilde_alphabet};
    use crate::cylinder::{gap_interval, set_extrema, Cylinder};
    use crate::rational::ratio;

    #[test]
    fn dp_matches_enumeration() {
        for s in 3..=5 {
            for u in 0..s {
                for base in [vec![], vec![block_values(s, u)[0]]] {
                    let dp = extension_bounds(s, u, &base, 5).unwrap();
                    let brute = enumerate_extension_bounds(s, u, &base, 5).unwrap();
                    assert_eq!(dp, brute, "s={s} u={u} base={base:?}");
                }
            }
        }
    }

    #[test]
    fn bounds_bracket_cylinder_extrema() {
        for s in 3..=8 {
            for u in 0..s {
                let v = block_values(s, u);
                for base in [vec![], vec![v[0]], vec![*v.last().unwrap(), v[0]]] {
                    let cyl = Cylinder::new(s, u, &base).unwrap();
                    let b = extension_bounds(s, u, &base, 10).unwrap();
                    assert!(b.brackets(&cyl.inf, &cyl.sup), "s={s} u={u} base={base:?}");
                }
            }
        }
    }

    #[test]
    fn combo_bounds_bracket_extrema() {
        for s in 3..=6 {
            let a = tilde_alphabet(s).unwrap();
            let e = comboset_extrema(&a);
            assert!(combo_extension_bounds(&a, 10).brackets(&e.inf, &e.sup));
        }
    }

    #[test]
    fn gap_formulas_agree() {
        for s in 3..=8 {
            for base in [vec![], vec![1], vec![s - 1, 2]] {
                for p in 1..=s - 2 {
                    let g = gap_interval(s, &base, p).unwrap();
                    assert_eq!(g, gap_formula(s, &base, p).unwrap());
                    assert_eq!(g.length(), gap_length_formula(s, &base, p).unwrap());
                }
            }
        }
        let g = gap_formula(3, &[], 1).unwrap();
        assert_eq!((g.lower, g.upper), (ratio(5, 18), ratio(5, 12)));
    }

    #[test]
    fn gap_audit_finds_nothing_and_detects_planted_hits() {
        let g = gap_interval(3, &[], 1).unwrap();
        let audit = gap_audit(3, &g, 8).unwrap();
        assert!(audit.hits.is_empty());
        assert!(audit.nodes > 0);
        let wide = GapInterval { lower: ratio(1, 4), upper: ratio(1, 2) };
        let audit = gap_audit(3, &wide, 3).unwrap();
        assert!(!audit.hits.is_empty());
    }

    #[test]
    fn membership_matcher() {
        assert!(matches_block_language(3, 0, &[0, 2, 1, 1, 0, 2]));
        assert!(!matches_block_language(3, 0, &[0, 0, 2]));
        assert!(!matches_block_language(3, 0, &[0]));
        assert!(matches_block_language(4, 1, &[1, 2, 1, 1, 3]));
        assert!(matches_block_language(4, 1, &[]));
    }

    #[test]
    fn word_counts() {
        assert_eq!(count_words(3, 0, 10), 89);
        assert_eq!(count_words(3, 1, 7), 0);
        assert_eq!(count_words(3, 1, 6), 1);
        let a = block_alphabet(3, 0).unwrap();
        assert_eq!(count_cover_prefixes(&[1, 2], 12), 377);
        assert_eq!(enumerate_prefixes(&a, 12).unwrap().len(), 377);
        let a = block_alphabet(4, 0).unwrap();
        assert_eq!(count_cover_prefixes(&[1, 2, 3], 12) as usize, enumerate_prefixes(&a, 12).unwrap().len());
    }

    #[test]
    fn extrema_tails() {
        // the DP converges to the set extrema from independent data
        for s in 3..=6 {
            for u in 0..s {
                let (inf, sup) = set_extrema(s, u).unwrap();
                let b = extension_bounds(s, u, &[], 30).unwrap();
                assert!(b.brackets(&inf, &sup));
            }
        }
    }
}
