//! Box-counting dimension estimates from interval covers.

use num::{BigInt, Integer, One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::comboset::{enumerate_prefixes, ComboAlphabet};
use crate::error::{Error, Result};
use crate::rational::{inv_pow, to_f64, Rational};

/// Closed intervals covering a set, valid down to boxes of size `resolution`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HullCover {
    resolution: Rational,
    hulls: Vec<(Rational, Rational)>,
}

impl HullCover {
    /// A zero `resolution` means the hulls are the set itself.
    pub fn new(hulls: Vec<(Rational, Rational)>, resolution: Rational) -> Result<Self> {
        if resolution.is_negative() {
            return Err(Error::InvalidParameter("resolution must be nonnegative".into()));
        }
        if hulls.is_empty() {
            return Err(Error::InvalidParameter("cover has no intervals".into()));
        }
        if let Some((a, b)) = hulls.iter().find(|(a, b)| a > b) {
            return Err(Error::InvalidParameter(format!("interval [{a}, {b}] is reversed")));
        }
        Ok(HullCover { resolution, hulls })
    }

    /// Cylinder hulls of every word sequence reaching `depth` digits.
    ///
    /// The shortest such sequence has `depth - L + 1` digits, `L` the longest
    /// word, which fixes the finest box size the cover is valid for.
    pub fn from_alphabet(a: &ComboAlphabet, depth: usize) -> Result<Self> {
        let prefixes = enumerate_prefixes(a, depth)?;
        let shortest = prefixes.iter().map(|p| p.total_digits).min().unwrap_or(depth);
        let hulls = prefixes.into_iter().map(|p| (p.lower, p.upper)).collect();
        HullCover::new(hulls, inv_pow(a.base(), shortest))
    }

    pub fn resolution(&self) -> &Rational {
        &self.resolution
    }

    pub fn hulls(&self) -> &[(Rational, Rational)] {
        &self.hulls
    }

    pub fn len(&self) -> usize {
        self.hulls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hulls.is_empty()
    }

    /// Number of half-open boxes `[iε, (i+1)ε)` meeting some interval.
    pub fn count_boxes(&self, epsilon: &Rational) -> Result<u64> {
        if !epsilon.is_positive() {
            return Err(Error::InvalidParameter("box size must be positive".into()));
        }
        let mut ranges: Vec<(BigInt, BigInt)> =
            self.hulls.iter().map(|(a, b)| (box_index(a, epsilon), box_index(b, epsilon))).collect();
        ranges.sort();
        let mut total = BigInt::zero();
        let mut current: Option<(BigInt, BigInt)> = None;
        for (lo, hi) in ranges {
            match &mut current {
                Some((_, end)) if lo <= &*end + 1 => {
                    if hi > *end {
                        *end = hi;
                    }
                }
                _ => {
                    if let Some((a, b)) = current.take() {
                        total += b - a + 1;
                    }
                    current = Some((lo, hi));
                }
            }
        }
        if let Some((a, b)) = current {
            total += b - a + 1;
        }
        total.to_u64().ok_or_else(|| Error::Budget(format!("box count {total} overflows u64")))
    }
}

fn box_index(x: &Rational, epsilon: &Rational) -> BigInt {
    let q = x / epsilon;
    q.numer().div_floor(q.denom())
}

/// Cover of the set spanned by an alphabet, see [`HullCover::from_alphabet`].
pub fn cover_from_alphabet(a: &ComboAlphabet, depth: usize) -> Result<HullCover> {
    HullCover::from_alphabet(a, depth)
}

/// Box sizes `s^{-j}` for each `j` in `exponents`.
pub fn power_scales(s: u32, exponents: impl IntoIterator<Item = usize>) -> Vec<Rational> {
    exponents.into_iter().map(|j| inv_pow(s, j)).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BoxCountOptions {
    /// Coarsest scales left out of the fit. `None` drops two when at least
    /// five scales are given and none otherwise.
    pub drop_coarsest: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleCount {
    #[serde(with = "crate::rational::json")]
    pub epsilon: Rational,
    pub count: u64,
    pub used_in_fit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxCount {
    /// Least-squares slope of `ln N(ε)` against `ln(1/ε)`.
    pub slope: f64,
    pub intercept: f64,
    /// Ordered from coarsest to finest.
    pub counts: Vec<ScaleCount>,
}

pub fn box_count_estimate(cover: &HullCover, scales: &[Rational]) -> Result<BoxCount> {
    box_count_with(cover, scales, BoxCountOptions::default())
}

pub fn box_count_with(cover: &HullCover, scales: &[Rational], opts: BoxCountOptions) -> Result<BoxCount> {
    if scales.len() < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 scales, got {}", scales.len())));
    }
    let mut sorted: Vec<Rational> = scales.to_vec();
    sorted.sort_by(|a, b| b.cmp(a));
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParameter("scales must be distinct".into()));
    }
    if let Some(e) = sorted.iter().find(|e| !e.is_positive() || **e > Rational::one()) {
        return Err(Error::InvalidParameter(format!("scale {e} is outside (0, 1]")));
    }
    let finest = sorted.last().unwrap();
    if finest < cover.resolution() {
        return Err(Error::InvalidParameter(format!(
            "scale {finest} is finer than the cover resolution {}",
            cover.resolution()
        )));
    }
    let drop = opts.drop_coarsest.unwrap_or(if sorted.len() >= 5 { 2 } else { 0 });
    if sorted.len() - drop.min(sorted.len()) < 2 {
        return Err(Error::InvalidParameter(format!(
            "dropping {drop} of {} scales leaves fewer than 2 for the fit",
            sorted.len()
        )));
    }
    let counts: Vec<u64> = sorted.par_iter().map(|e| cover.count_boxes(e)).collect::<Result<_>>()?;
    let rows: Vec<ScaleCount> = sorted
        .into_iter()
        .zip(counts)
        .enumerate()
        .map(|(i, (epsilon, count))| ScaleCount { epsilon, count, used_in_fit: i >= drop })
        .collect();
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.used_in_fit)
        .map(|r| (-to_f64(&r.epsilon).ln(), (r.count as f64).ln()))
        .collect();
    let (slope, intercept) = least_squares(&points);
    Ok(BoxCount { slope, intercept, counts: rows })
}

fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
