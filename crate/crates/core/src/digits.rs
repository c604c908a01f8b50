//! s-adic digit strings: a finite preperiod followed by an optional period.
//!
//! A [`DigitString`] without a period is a finite word; as a number it carries
//! the implicit `(0)` tail. Construction through [`DigitString::periodic`]
//! puts the string in canonical form:
//!
//! * the period is primitive and the preperiod as short as possible,
//! * a `(0)` period is dropped (finite form),
//! * an `(s-1)` period is replaced by its `(0)`-tail twin, except for the
//!   number 1 which has no other representation in `[0, 1]`.
//!
//! The `(s-1)`-tail twin of an s-adic-rational is available through
//! [`DigitString::twin`].

use std::collections::HashMap;

use num::{BigInt, Integer, One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{big_pow, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDigitString")]
pub struct DigitString {
    s: u32,
    preperiod: Vec<u32>,
    period: Option<Vec<u32>>,
}

#[derive(Deserialize)]
struct RawDigitString {
    s: u32,
    preperiod: Vec<u32>,
    period: Option<Vec<u32>>,
}

impl TryFrom<RawDigitString> for DigitString {
    type Error = Error;

    fn try_from(raw: RawDigitString) -> Result<Self> {
        match raw.period {
            Some(period) => DigitString::periodic(raw.s, raw.preperiod, period),
            None => DigitString::finite(raw.s, raw.preperiod),
        }
    }
}

fn check_digits(s: u32, digits: &[u32], first_offset: usize) -> Result<()> {
    match digits.iter().position(|&d| d >= s) {
        Some(i) => Err(Error::InvalidDigit { digit: digits[i], offset: first_offset + i, s }),
        None => Ok(()),
    }
}

fn check_radix(s: u32) -> Result<()> {
    if s < 2 {
        return Err(Error::InvalidRadix { s, min: 2 });
    }
    Ok(())
}

/// Shortest `(preperiod, period)` describing the same infinite sequence.
pub(crate) fn normalize_periodic<T: PartialEq + Clone>(pre: &mut Vec<T>, period: &mut Vec<T>) {
    let n = period.len();
    if let Some(q) = (1..=n).find(|&q| n.is_multiple_of(q) && (q..n).all(|i| period[i] == period[i - q])) {
        period.truncate(q);
    }
    while let (Some(a), Some(b)) = (pre.last(), period.last()) {
        if a != b {
            break;
        }
        pre.pop();
        period.rotate_right(1);
    }
}

impl DigitString {
    /// Finite word; trailing zeros are kept since the codec treats them as digits.
    pub fn finite(s: u32, digits: Vec<u32>) -> Result<Self> {
        check_radix(s)?;
        check_digits(s, &digits, 0)?;
        Ok(DigitString { s, preperiod: digits, period: None })
    }

    /// Preperiod followed by a repeating period, reduced to canonical form.
    pub fn periodic(s: u32, preperiod: Vec<u32>, period: Vec<u32>) -> Result<Self> {
        check_radix(s)?;
        check_digits(s, &preperiod, 0)?;
        check_digits(s, &period, preperiod.len())?;
        if period.is_empty() {
            return Err(Error::InvalidParameter("period must be nonempty".into()));
        }
        let mut pre = preperiod;
        let mut per = period;
        normalize_periodic(&mut pre, &mut per);
        if per == [0] {
            return Ok(DigitString { s, preperiod: pre, period: None });
        }
        if per == [s - 1] {
            // pre never ends in s-1 after normalization
            if let Some(last) = pre.last_mut() {
                *last += 1;
                return Ok(DigitString { s, preperiod: pre, period: None });
            }
        }
        Ok(DigitString { s, preperiod: pre, period: Some(per) })
    }

    pub fn base(&self) -> u32 {
        self.s
    }

    pub fn preperiod(&self) -> &[u32] {
        &self.preperiod
    }

    pub fn period(&self) -> Option<&[u32]> {
        self.period.as_deref()
    }

    pub fn is_finite(&self) -> bool {
        self.period.is_none()
    }

    /// Digits in order; endless when a period is present.
    pub fn digits(&self) -> impl Iterator<Item = u32> + '_ {
        let tail = self.period.as_deref().unwrap_or(&[]);
        self.preperiod.iter().copied().chain(tail.iter().copied().cycle())
    }

    /// The first `n` digits, or `None` when a finite word is shorter than `n`.
    pub fn prefix(&self, n: usize) -> Option<Vec<u32>> {
        let v: Vec<u32> = self.digits().take(n).collect();
        (v.len() == n).then_some(v)
    }

    pub fn value(&self) -> Rational {
        digits_to_rational(self)
    }

    /// The `(s-1)`-tail representation of an s-adic-rational.
    ///
    /// Returns `None` when the value is not s-adic-rational or is 0.
    /// The result is deliberately not canonical.
    pub fn twin(&self) -> Option<DigitString> {
        if self.period.is_some() {
            return None;
        }
        let last = self.preperiod.iter().rposition(|&d| d != 0)?;
        let mut pre = self.preperiod[..=last].to_vec();
        pre[last] -= 1;
        Some(DigitString { s: self.s, preperiod: pre, period: Some(vec![self.s - 1]) })
    }

    /// Compact text form, e.g. `0.02(102)`; digits above 9 are bracketed.
    pub fn to_text(&self) -> String {
        let fmt = |d: &u32| if *d < 10 { d.to_string() } else { format!("[{d}]") };
        let mut out = String::from("0.");
        out.extend(self.preperiod.iter().map(fmt));
        if let Some(p) = &self.period {
            out.push('(');
            out.extend(p.iter().map(fmt));
            out.push(')');
        }
        out
    }
}

/// `Σ d_k s^{-k}`, with the period summed as a geometric series.
pub fn digits_to_rational(d: &DigitString) -> Rational {
    let s = BigInt::from(d.s);
    let mut pre_num = BigInt::zero();
    for &digit in &d.preperiod {
        pre_num = pre_num * &s + digit;
    }
    let pre_den = big_pow(d.s, d.preperiod.len());
    let mut value = Rational::new(pre_num, pre_den.clone());
    if let Some(period) = &d.period {
        let mut per_num = BigInt::zero();
        for &digit in period {
            per_num = per_num * &s + digit;
        }
        let per_den = big_pow(d.s, period.len()) - BigInt::one();
        value += Rational::new(per_num, per_den * pre_den);
    }
    value
}

fn check_unit(x: &Rational) -> Result<()> {
    if !crate::rational::is_unit_interval(x) {
        return Err(Error::OutOfRange(x.to_string()));
    }
    Ok(())
}

/// First `n` digits of the canonical expansion of `x`, as a finite word.
///
/// For `x = 1` the only expansion is `(s-1)` repeated.
pub fn rational_to_digits(x: &Rational, s: u32, n: usize) -> Result<DigitString> {
    check_radix(s)?;
    check_unit(x)?;
    if n == 0 {
        return Err(Error::InvalidParameter("digit count must be at least 1".into()));
    }
    if x.is_one() {
        return DigitString::finite(s, vec![s - 1; n]);
    }
    let den = x.denom().clone();
    let mut rem = x.numer().clone();
    let mut digits = Vec::with_capacity(n);
    for _ in 0..n {
        rem *= s;
        let (q, r) = rem.div_rem(&den);
        digits.push(q.to_u32().expect("digit below base"));
        rem = r;
    }
    DigitString::finite(s, digits)
}

/// Exact canonical expansion of `x` with its preperiod and period.
///
/// The period of `a/b` can be as long as `b - 1` digits, so the search stops
/// with a budget error after `max_digits` digits.
pub fn rational_expansion(x: &Rational, s: u32, max_digits: usize) -> Result<DigitString> {
    check_radix(s)?;
    check_unit(x)?;
    if x.is_one() {
        return DigitString::periodic(s, vec![], vec![s - 1]);
    }
    let den = x.denom().clone();
    let mut rem = x.numer().clone();
    let mut seen: HashMap<BigInt, usize> = HashMap::new();
    let mut digits = Vec::new();
    while !rem.is_zero() {
        if let Some(&start) = seen.get(&rem) {
            let period = digits.split_off(start);
            return DigitString::periodic(s, digits, period);
        }
        if digits.len() >= max_digits {
            return Err(Error::Budget(format!(
                "expansion of {x} in base {s} needs more than {max_digits} digits"
            )));
        }
        seen.insert(rem.clone(), digits.len());
        rem *= s;
        let (q, r) = rem.div_rem(&den);
        digits.push(q.to_u32().expect("digit below base"));
        rem = r;
    }
    DigitString::finite(s, digits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn finite_sum() {
        let d = DigitString::finite(3, vec![0, 2, 1]).unwrap();
        assert_eq!(digits_to_rational(&d), ratio(7, 27));
    }

    #[test]
    fn all_twos_in_base_three_is_one() {
        let d = DigitString::periodic(3, vec![], vec![2]).unwrap();
        assert_eq!(d.period(), Some(&[2][..]));
        assert_eq!(d.value(), ratio(1, 1));
    }

    #[test]
    fn periodic_value_matches_partial_sums() {
        // 0.02(102) in base 3; compare with a 200-digit partial sum and its tail bound.
        let d = DigitString::periodic(3, vec![0, 2], vec![1, 0, 2]).unwrap();
        let v = d.value();
        let digits: Vec<u32> = d.digits().take(200).collect();
        let partial = digits_to_rational(&DigitString::finite(3, digits).unwrap());
        assert!(partial <= v);
        assert!(&v - &partial <= crate::rational::inv_pow(3, 200));
        assert_eq!(v, ratio(7, 26));
    }

    #[test]
    fn canonical_form_is_minimal() {
        let d = DigitString::periodic(3, vec![0, 2, 1, 0, 2], vec![1, 0, 2, 1, 0, 2]).unwrap();
        assert_eq!(d.preperiod(), &[] as &[u32]);
        assert_eq!(d.period(), Some(&[0, 2, 1][..]));
    }

    #[test]
    fn nines_tail_becomes_finite() {
        let d = DigitString::periodic(3, vec![0], vec![2]).unwrap();
        assert!(d.is_finite());
        assert_eq!(d.preperiod(), &[1]);
        let z = DigitString::periodic(5, vec![3, 1], vec![0, 0]).unwrap();
        assert_eq!(z.preperiod(), &[3, 1]);
        assert!(z.is_finite());
    }

    #[test]
    fn invalid_digit_reports_offset() {
        let err = DigitString::periodic(3, vec![0, 1], vec![2, 3]).unwrap_err();
        assert_eq!(err, Error::InvalidDigit { digit: 3, offset: 3, s: 3 });
    }

    #[test]
    fn one_third_and_its_twin() {
        let d = rational_to_digits(&ratio(1, 3), 3, 4).unwrap();
        assert_eq!(d.preperiod(), &[1, 0, 0, 0]);
        let exact = rational_expansion(&ratio(1, 3), 3, 100).unwrap();
        assert_eq!(exact.preperiod(), &[1]);
        let twin = exact.twin().unwrap();
        assert_eq!(twin.preperiod(), &[0]);
        assert_eq!(twin.period(), Some(&[2][..]));
        assert_eq!(twin.value(), ratio(1, 3));
    }

    #[test]
    fn five_twelfths() {
        let d = rational_to_digits(&ratio(5, 12), 3, 5).unwrap();
        assert_eq!(d.preperiod(), &[1, 0, 2, 0, 2]);
        let exact = rational_expansion(&ratio(5, 12), 3, 100).unwrap();
        assert_eq!(exact.preperiod(), &[1]);
        assert_eq!(exact.period(), Some(&[0, 2][..]));
        assert_eq!(exact.value(), ratio(5, 12));
    }

    #[test]
    fn range_errors() {
        assert!(matches!(rational_to_digits(&ratio(4, 3), 3, 2), Err(Error::OutOfRange(_))));
        assert!(matches!(rational_to_digits(&ratio(-1, 3), 3, 2), Err(Error::OutOfRange(_))));
        assert!(matches!(rational_expansion(&ratio(1, 7919), 2, 10), Err(Error::Budget(_))));
    }

    #[test]
    fn one_has_only_the_full_tail() {
        assert_eq!(rational_to_digits(&ratio(1, 1), 4, 3).unwrap().preperiod(), &[3, 3, 3]);
        let one = rational_expansion(&ratio(1, 1), 4, 10).unwrap();
        assert_eq!(one.period(), Some(&[3][..]));
        assert!(one.twin().is_none());
    }

    #[test]
    fn text_and_json_forms() {
        let d = DigitString::periodic(3, vec![0, 2], vec![1]).unwrap();
        assert_eq!(d.to_text(), "0.02(1)");
        let j = serde_json::to_string(&d).unwrap();
        assert_eq!(j, r#"{"s":3,"preperiod":[0,2],"period":[1]}"#);
        let back: DigitString = serde_json::from_str(&j).unwrap();
        assert_eq!(back, d);
        let f: DigitString = serde_json::from_str(r#"{"s":3,"preperiod":[1,2],"period":null}"#).unwrap();
        assert!(f.is_finite());
        assert!(serde_json::from_str::<DigitString>(r#"{"s":3,"preperiod":[5],"period":null}"#).is_err());
    }
}
