//! Sets built from a finite alphabet of digit words.
//!
//! Given words `σ_1..σ_m` over `{0..s-1}`, the set `E` holds the numbers whose
//! base-`s` expansion is a concatenation of these words. Each word `σ` acts
//! as the contraction `y ↦ v(σ) + s^{-|σ|} y`, where `v(σ)` is the value of
//! the word followed by zeros, so `E` is the attractor of these maps.

use std::collections::BTreeMap;

use num::{BigInt, One, Zero};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::blocks::{block_values, block_word, check_params};
use crate::error::{Error, Result};
use crate::rational::{big_pow, inv_pow, Rational};

/// Upper limit on the number of prefixes [`enumerate_prefixes`] will build.
pub const MAX_PREFIXES: usize = 1 << 21;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComboAlphabet {
    s: u32,
    words: Vec<Vec<u32>>,
    length_counts: BTreeMap<usize, u64>,
}

impl ComboAlphabet {
    pub fn new(s: u32, words: Vec<Vec<u32>>) -> Result<Self> {
        if s < 2 {
            return Err(Error::InvalidRadix { s, min: 2 });
        }
        if words.is_empty() {
            return Err(Error::InvalidAlphabet("at least one word is required".into()));
        }
        let mut length_counts = BTreeMap::new();
        for (i, w) in words.iter().enumerate() {
            if w.is_empty() {
                return Err(Error::InvalidAlphabet(format!("word {i} is empty")));
            }
            if let Some(&d) = w.iter().find(|&&d| d >= s) {
                return Err(Error::InvalidAlphabet(format!("word {i} has digit {d} >= {s}")));
            }
            if words[..i].contains(w) {
                return Err(Error::InvalidAlphabet(format!("word {i} is a duplicate")));
            }
            *length_counts.entry(w.len()).or_insert(0) += 1;
        }
        Ok(ComboAlphabet { s, words, length_counts })
    }

    /// Words written as digit strings, e.g. `["021", "102"]`; needs `s <= 10`.
    pub fn from_strs(s: u32, words: &[&str]) -> Result<Self> {
        let parsed = words.iter().map(|w| parse_word(w)).collect::<Result<Vec<_>>>()?;
        Self::new(s, parsed)
    }

    pub fn base(&self) -> u32 {
        self.s
    }

    pub fn words(&self) -> &[Vec<u32>] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// `k ↦` number of words of length `k`.
    pub fn length_counts(&self) -> &BTreeMap<usize, u64> {
        &self.length_counts
    }

    pub fn max_word_len(&self) -> usize {
        *self.length_counts.keys().next_back().expect("nonempty alphabet")
    }

    pub fn contains(&self, word: &[u32]) -> bool {
        self.words.iter().any(|w| w == word)
    }

    /// No word is a proper prefix of another. Without this, different word
    /// sequences may share digits and cylinders may overlap.
    pub fn is_prefix_free(&self) -> bool {
        self.words.iter().enumerate().all(|(i, a)| {
            self.words.iter().enumerate().all(|(j, b)| i == j || !b.starts_with(a))
        })
    }

    /// Value of `word` followed by zeros.
    pub fn word_value(&self, word: &[u32]) -> Rational {
        word_value(self.s, word)
    }

    /// Value of `word` repeated forever.
    pub fn periodic_value(&self, word: &[u32]) -> Rational {
        let scale = Rational::one() - inv_pow(self.s, word.len());
        word_value(self.s, word) / scale
    }
}

pub(crate) fn word_value(s: u32, word: &[u32]) -> Rational {
    let mut num = BigInt::zero();
    for &d in word {
        num = num * s + d;
    }
    Rational::new(num, big_pow(s, word.len()))
}

fn parse_word(w: &str) -> Result<Vec<u32>> {
    w.chars()
        .map(|ch| {
            ch.to_digit(10)
                .ok_or_else(|| Error::InvalidAlphabet(format!("word {w:?}: {ch:?} is not a digit")))
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WireWord {
    Text(String),
    Digits(Vec<u32>),
}

#[derive(Serialize, Deserialize)]
struct WireAlphabet {
    s: u32,
    combos: Vec<WireWord>,
}

impl Serialize for ComboAlphabet {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let combos = self
            .words
            .iter()
            .map(|w| {
                if self.s <= 10 {
                    WireWord::Text(w.iter().map(|d| char::from_digit(*d, 10).unwrap()).collect())
                } else {
                    WireWord::Digits(w.clone())
                }
            })
            .collect();
        WireAlphabet { s: self.s, combos }.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ComboAlphabet {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let wire = WireAlphabet::deserialize(de)?;
        let mut words = Vec::with_capacity(wire.combos.len());
        for w in wire.combos {
            words.push(match w {
                WireWord::Text(t) => {
                    if wire.s > 10 {
                        return Err(de::Error::custom(
                            "string words need s <= 10; use digit arrays instead",
                        ));
                    }
                    parse_word(&t).map_err(de::Error::custom)?
                }
                WireWord::Digits(d) => d,
            });
        }
        ComboAlphabet::new(wire.s, words).map_err(de::Error::custom)
    }
}

/// Words `u^(c-1) c` for every `c ∈ {1..s-1}` and marker `u ≠ c`.
///
/// `c = 1` gives the single word `1` for every marker, so the alphabet has one
/// word of length 1 and `s - 1` words of each length `2..=s-1`, in total
/// `s² - 3s + 3`.
pub fn tilde_alphabet(s: u32) -> Result<ComboAlphabet> {
    if s < 3 {
        return Err(Error::InvalidRadix { s, min: 3 });
    }
    let mut words: Vec<Vec<u32>> = vec![vec![1]];
    for c in 2..s {
        for u in (0..s).filter(|&u| u != c) {
            words.push(block_word(u, c));
        }
    }
    ComboAlphabet::new(s, words)
}

/// The base-3 alphabet `{021, 102}`.
pub fn sprime3_alphabet() -> ComboAlphabet {
    ComboAlphabet::new(3, vec![vec![0, 2, 1], vec![1, 0, 2]]).expect("fixed alphabet")
}

/// `S_(s,u)` as a word set: one word `u^(c-1) c` per allowed block `c`.
pub fn block_alphabet(s: u32, u: u32) -> Result<ComboAlphabet> {
    check_params(s, u)?;
    ComboAlphabet::new(s, block_values(s, u).into_iter().map(|c| block_word(u, c)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComboExtrema {
    #[serde(with = "crate::rational::json")]
    pub inf: Rational,
    #[serde(with = "crate::rational::json")]
    pub sup: Rational,
    /// Word whose periodic repetition attains the infimum.
    pub inf_word: Vec<u32>,
    /// Word whose periodic repetition attains the supremum.
    pub sup_word: Vec<u32>,
}

impl ComboExtrema {
    pub fn diameter(&self) -> Rational {
        &self.sup - &self.inf
    }
}

/// Extrema of `E` from the periodic values of single words.
///
/// Each word map `y ↦ v(σ) + s^{-|σ|} y` is increasing, so the infimum of the
/// attractor is the smallest of the fixed points `v(σ^∞)`, and likewise for
/// the supremum.
pub fn comboset_extrema(a: &ComboAlphabet) -> ComboExtrema {
    let values: Vec<Rational> = a.words.iter().map(|w| a.periodic_value(w)).collect();
    let lo = (0..values.len()).min_by(|&i, &j| values[i].cmp(&values[j])).unwrap();
    let hi = (0..values.len()).max_by(|&i, &j| values[i].cmp(&values[j])).unwrap();
    ComboExtrema {
        inf: values[lo].clone(),
        sup: values[hi].clone(),
        inf_word: a.words[lo].clone(),
        sup_word: a.words[hi].clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComboCylinder {
    pub s: u32,
    pub base: Vec<Vec<u32>>,
    /// Total digit count of the base words.
    pub total_digits: usize,
    #[serde(with = "crate::rational::json")]
    pub inf: Rational,
    #[serde(with = "crate::rational::json")]
    pub sup: Rational,
}

impl ComboCylinder {
    pub fn diameter(&self) -> Rational {
        &self.sup - &self.inf
    }
}

/// Cylinder of `E` whose expansion starts with the given words.
pub fn combo_cylinder(a: &ComboAlphabet, base_words: &[Vec<u32>]) -> Result<ComboCylinder> {
    if let Some(w) = base_words.iter().find(|w| !a.contains(w)) {
        return Err(Error::InvalidAlphabet(format!("word {w:?} is not in the alphabet")));
    }
    let ext = comboset_extrema(a);
    let digits: Vec<u32> = base_words.iter().flatten().copied().collect();
    let prefix = word_value(a.s, &digits);
    let scale = inv_pow(a.s, digits.len());
    Ok(ComboCylinder {
        s: a.s,
        base: base_words.to_vec(),
        total_digits: digits.len(),
        inf: &prefix + &scale * &ext.inf,
        sup: &prefix + &scale * &ext.sup,
    })
}

/// Hull of one combo-cylinder, identified by word indices into the alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixHull {
    pub prefix: Vec<usize>,
    pub total_digits: usize,
    pub lower: Rational,
    pub upper: Rational,
}

/// Hulls of every word sequence whose total length lies in
/// `(max_digits - L, max_digits]`, `L` the longest word length.
///
/// Every infinite word sequence has such a prefix, so the hulls cover `E`.
pub fn enumerate_prefixes(a: &ComboAlphabet, max_digits: usize) -> Result<Vec<PrefixHull>> {
    let longest = a.max_word_len();
    if max_digits < longest {
        return Err(Error::InvalidParameter(format!(
            "max_digits={max_digits} is below the longest word length {longest}"
        )));
    }
    let floor = max_digits - longest;
    let ext = comboset_extrema(a);
    let mut out = Vec::new();
    // depth-first over (indices, numerator of the prefix value, digit count)
    let mut stack: Vec<(Vec<usize>, BigInt, usize)> = vec![(vec![], BigInt::zero(), 0)];
    while let Some((prefix, num, len)) = stack.pop() {
        if len > floor {
            if out.len() >= MAX_PREFIXES {
                return Err(Error::Budget(format!(
                    "more than {MAX_PREFIXES} prefixes up to {max_digits} digits"
                )));
            }
            let scale = inv_pow(a.s, len);
            let value = Rational::new(num.clone(), big_pow(a.s, len));
            out.push(PrefixHull {
                prefix: prefix.clone(),
                total_digits: len,
                lower: &value + &scale * &ext.inf,
                upper: &value + &scale * &ext.sup,
            });
        }
        for (i, w) in a.words.iter().enumerate().rev() {
            let next = len + w.len();
            if next > max_digits {
                continue;
            }
            let mut n = num.clone();
            for &d in w {
                n = n * a.s + d;
            }
            let mut p = prefix.clone();
            p.push(i);
            stack.push((p, n, next));
        }
    }
    Ok(out)
}
