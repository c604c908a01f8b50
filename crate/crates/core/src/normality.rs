//! Digit frequencies and the normality dichotomy for `S_(s,0)`.
//!
//! Every block `0^(c-1) c` carries `c - 1` zeros, so along block boundaries
//! `N_0 = Σ_{c ≥ 2} (c - 1) N_c`. If each nonzero digit had frequency `1/s`
//! the zeros would have frequency
//!
//! ```text
//! (1/s) Σ_{c=2}^{s-1} (c - 1) = (s - 2)(s - 1) / (2s),
//! ```
//!
//! which equals `1/s` only for `s = 3`. Hence normal numbers exist in the
//! union of the sets `S_(s,u)` only in base 3, where the alphabet
//! `{021, 102}` produces a continuum of them.

use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::blocks::{check_params, BlockScanner};
use crate::comboset::sprime3_alphabet;
use crate::digits::DigitString;
use crate::dimension::{dim_alphabet, dim_s, DimensionResult, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::rational::{ratio, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrequencyProfile {
    pub s: u32,
    pub k: usize,
    /// `N_i` for each digit `i`.
    pub counts: Vec<u64>,
    #[serde(serialize_with = "freqs_json")]
    pub freqs: Vec<Rational>,
}

fn freqs_json<S: serde::Serializer>(x: &[Rational], ser: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = ser.serialize_seq(Some(x.len()))?;
    for f in x {
        seq.serialize_element(&crate::rational::RationalJson::from(f))?;
    }
    seq.end()
}

impl FrequencyProfile {
    /// Largest `|N_i / k - 1/s|`.
    pub fn max_deviation_from_uniform(&self) -> Rational {
        let target = ratio(1, self.s as i64);
        self.freqs.iter().map(|f| num::abs(f - &target)).max().unwrap_or_else(Rational::zero)
    }
}

/// Counts of each digit over the first `k` digits of `d`.
pub fn digit_frequencies(d: &DigitString, k: usize) -> Result<FrequencyProfile> {
    let s = d.base();
    if k == 0 {
        return Err(Error::InvalidParameter("prefix length k must be positive".into()));
    }
    let pre = d.preperiod();
    let mut counts = vec![0u64; s as usize];
    match d.period() {
        None if pre.len() < k => return Err(Error::TooShort { needed: k, available: pre.len() }),
        None => pre[..k].iter().for_each(|&x| counts[x as usize] += 1),
        Some(period) => {
            let head = pre.len().min(k);
            pre[..head].iter().for_each(|&x| counts[x as usize] += 1);
            let rest = k - head;
            let (full, part) = (rest / period.len(), rest % period.len());
            for &x in period {
                counts[x as usize] += full as u64;
            }
            period[..part].iter().for_each(|&x| counts[x as usize] += 1);
        }
    }
    let freqs = counts.iter().map(|&n| ratio(n as i64, k as i64)).collect();
    Ok(FrequencyProfile { s, k, counts, freqs })
}

/// Zero frequency forced on an element of `S_(s,0)` whose nonzero digits
/// all have frequency `1/s`: `(s-2)(s-1)/(2s)`.
pub fn structural_zero_frequency(s: u32) -> Result<Rational> {
    if s < 3 {
        return Err(Error::InvalidRadix { s, min: 3 });
    }
    let s = s as i64;
    Ok(ratio((s - 2) * (s - 1), 2 * s))
}

/// Long-run zero frequency of a uniformly random block sequence in
/// `S_(s,0)`: `E[c-1] / E[c] = (s-2)/s`.
pub fn ergodic_zero_frequency(s: u32) -> Result<Rational> {
    if s < 3 {
        return Err(Error::InvalidRadix { s, min: 3 });
    }
    Ok(ratio(s as i64 - 2, s as i64))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalityVerdict {
    pub s: u32,
    pub exists: bool,
    #[serde(with = "crate::rational::json")]
    pub structural_zero_frequency: Rational,
    #[serde(with = "crate::rational::json")]
    pub uniform_frequency: Rational,
    pub explanation: String,
}

/// Whether `S_(s,u)` can contain base-`s` normal numbers for some `u`.
pub fn normal_candidate_exists(s: u32) -> Result<NormalityVerdict> {
    let zero = structural_zero_frequency(s)?;
    let uniform = ratio(1, s as i64);
    let exists = zero == uniform;
    let explanation = if exists {
        format!("zero frequency (s-2)(s-1)/(2s) = {zero} equals 1/s; the words 021 and 102 give normal elements")
    } else if zero > Rational::one() {
        format!("zero frequency (s-2)(s-1)/(2s) = {zero} exceeds 1, so no digit distribution is uniform")
    } else {
        format!("zero frequency (s-2)(s-1)/(2s) = {zero} differs from 1/s = {uniform}")
    };
    Ok(NormalityVerdict { s, exists, structural_zero_frequency: zero, uniform_frequency: uniform, explanation })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityBounds {
    /// Dimension of the set spanned by `{021, 102}`.
    pub lower: DimensionResult,
    /// Dimension of `S_(3,0)`.
    pub upper: DimensionResult,
}

/// Bounds on the dimension of the base-3 normal numbers in `S_(3,0)`.
pub fn normality_dimension_bounds() -> NormalityBounds {
    NormalityBounds {
        lower: dim_alphabet(&sprime3_alphabet(), DEFAULT_TOL).expect("fixed alphabet"),
        upper: dim_s(3, 0).expect("fixed parameters"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IdentityResidual {
    /// `N_u - Σ_{c ≠ u} (c-1) N_c` over the prefix.
    pub residual: i64,
    /// The prefix ends on a block boundary.
    pub aligned: bool,
    /// Largest possible residual off a boundary, `s - 2`.
    pub bound: u32,
}

/// Marker-count identity over the first `k` digits of `d`.
///
/// Each block `u^(c-1) c` adds `c - 1` markers and one `c`, so the residual
/// is zero on block boundaries and equals the pending marker run otherwise.
pub fn structural_identity_residual(d: &DigitString, u: u32, k: usize) -> Result<IdentityResidual> {
    let s = d.base();
    check_params(s, u)?;
    let mut scanner = BlockScanner::new(s, u);
    let mut residual = 0i64;
    let mut seen = 0;
    for x in d.digits().take(k) {
        scanner.push(x)?;
        residual += weight(u, x);
        seen += 1;
    }
    if seen < k {
        return Err(Error::TooShort { needed: k, available: seen });
    }
    Ok(IdentityResidual { residual, aligned: scanner.at_boundary(), bound: s - 2 })
}

fn weight(u: u32, x: u32) -> i64 {
    if x == u {
        1
    } else {
        -(x as i64 - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundaryAudit {
    pub boundaries: usize,
    /// Largest `|residual|` seen at a boundary; zero for members.
    pub max_abs_residual: u64,
}

/// Evaluates the identity at every block boundary within `k` digits.
pub fn boundary_residuals(d: &DigitString, u: u32, k: usize) -> Result<BoundaryAudit> {
    check_params(d.base(), u)?;
    let mut scanner = BlockScanner::new(d.base(), u);
    let mut residual = 0i64;
    let mut audit = BoundaryAudit { boundaries: 0, max_abs_residual: 0 };
    for x in d.digits().take(k) {
        let closed = scanner.push(x)?;
        residual += weight(u, x);
        if closed.is_some() {
            audit.boundaries += 1;
            audit.max_abs_residual = audit.max_abs_residual.max(residual.unsigned_abs());
        }
    }
    Ok(audit)
}

/// `n_words` words drawn uniformly from `{021, 102}` with a seeded stream.
pub fn sprime3_element(seed: u64, n_words: usize) -> DigitString {
    let a = sprime3_alphabet();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let digits: Vec<u32> =
        (0..n_words).flat_map(|_| a.words()[rng.gen_range(0..a.len())].iter().copied()).collect();
    DigitString::finite(3, digits).expect("digits below 3")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn periodic(s: u32, period: &[u32]) -> DigitString {
        DigitString::periodic(s, vec![], period.to_vec()).unwrap()
    }

    #[test]
    fn frequency_examples() {
        let p = digit_frequencies(&periodic(3, &[0, 2, 1]), 3000).unwrap();
        assert_eq!(p.freqs, vec![ratio(1, 3); 3]);
        let p = digit_frequencies(&periodic(3, &[1]), 100).unwrap();
        assert_eq!(p.counts, vec![0, 100, 0]);
        let p = digit_frequencies(&periodic(3, &[0, 2]), 101).unwrap();
        assert_eq!(p.counts, vec![51, 0, 50]);
        let short = DigitString::finite(3, vec![0, 2]).unwrap();
        assert_eq!(digit_frequencies(&short, 3), Err(Error::TooShort { needed: 3, available: 2 }));
        let pre = DigitString::periodic(4, vec![3, 3], vec![1, 0]).unwrap();
        let p = digit_frequencies(&pre, 7).unwrap();
        assert_eq!(p.counts.iter().sum::<u64>(), 7);
        let naive: Vec<u64> = (0..4).map(|i| pre.digits().take(7).filter(|&x| x == i).count() as u64).collect();
        assert_eq!(p.counts, naive);
    }

    #[test]
    fn structural_values() {
        assert_eq!(structural_zero_frequency(3).unwrap(), ratio(1, 3));
        assert_eq!(structural_zero_frequency(4).unwrap(), ratio(3, 4));
        assert_eq!(structural_zero_frequency(5).unwrap(), ratio(6, 5));
        assert!(structural_zero_frequency(2).is_err());
        assert_eq!(ergodic_zero_frequency(3).unwrap(), ratio(1, 3));
        assert_eq!(ergodic_zero_frequency(6).unwrap(), ratio(2, 3));
    }

    #[test]
    fn dichotomy() {
        assert!(normal_candidate_exists(3).unwrap().exists);
        assert!(!normal_candidate_exists(4).unwrap().exists);
        assert!(!normal_candidate_exists(7).unwrap().exists);
        for s in 3..=64 {
            let v = normal_candidate_exists(s).unwrap();
            assert_eq!(v.exists, v.structural_zero_frequency == ratio(1, s as i64));
            assert_eq!(v.exists, s == 3);
        }
    }

    #[test]
    fn bounds() {
        let b = normality_dimension_bounds();
        let ln3 = 3f64.ln();
        assert!((b.lower.alpha - 2f64.ln() / ln3 / 3.0).abs() < 1e-9);
        assert!((b.upper.alpha - ((5f64.sqrt() + 1.0) / 2.0).ln() / ln3).abs() < 1e-9);
        assert!(b.lower.alpha < b.upper.alpha);
    }

    #[test]
    fn identity_residuals() {
        let x = periodic(3, &[0, 2, 1]);
        let r = structural_identity_residual(&x, 0, 300).unwrap();
        assert_eq!(r, IdentityResidual { residual: 0, aligned: true, bound: 1 });
        let r = structural_identity_residual(&x, 0, 301).unwrap();
        assert!(!r.aligned && r.residual == 1);
        let bad = periodic(3, &[0, 2, 1, 2]);
        assert!(matches!(structural_identity_residual(&bad, 0, 8), Err(Error::NotAMember { offset: 3, .. })));
        let bad = periodic(3, &[0, 0, 2]);
        assert!(matches!(structural_identity_residual(&bad, 0, 3), Err(Error::NotAMember { offset: 2, .. })));
        // s = 5, u = 2: blocks 1, 223, 2224
        let x = DigitString::finite(5, vec![1, 2, 2, 3, 2, 2, 2, 4, 2]).unwrap();
        let r = structural_identity_residual(&x, 2, 8).unwrap();
        assert_eq!((r.residual, r.aligned), (0, true));
        let r = structural_identity_residual(&x, 2, 9).unwrap();
        assert_eq!((r.residual, r.aligned, r.bound), (1, false, 3));
    }

    #[test]
    fn sprime3_elements_are_normal_prefixes() {
        let x = sprime3_element(7, 10_000);
        let p = digit_frequencies(&x, 30_000).unwrap();
        assert_eq!(p.freqs, vec![ratio(1, 3); 3]);
        for k in [1, 2, 100, 29_999] {
            let p = digit_frequencies(&x, k).unwrap();
            assert!(p.max_deviation_from_uniform() <= ratio(3, k as i64));
        }
        let audit = boundary_residuals(&x, 0, 30_000).unwrap();
        assert!(audit.boundaries > 10_000);
        assert_eq!(audit.max_abs_residual, 0);
        assert_eq!(sprime3_element(7, 50), sprime3_element(7, 50));
        assert_ne!(sprime3_element(7, 50), sprime3_element(8, 50));
    }
}
