//! Block coordinates of `S_(s,u)`.
//!
//! An element is written as a sequence of blocks `c_1 c_2 ...` with
//! `c_i ∈ {1..s-1} \ {u}`; its digits are `u^(c_1-1) c_1 u^(c_2-1) c_2 ...`.
//! Equivalently its value is `u/(s-1) + Σ (c_k - u) s^{-(c_1+...+c_k)}`.

use std::collections::HashMap;

use num::{BigInt, One, Zero};
use serde::{Deserialize, Serialize};

use crate::digits::{normalize_periodic, DigitString};
use crate::error::{Error, MembershipViolation, Result};
use crate::rational::{big_pow, inv_pow, Rational};

/// Checks `s >= 3` and `u < s`.
pub fn check_params(s: u32, u: u32) -> Result<()> {
    if s < 3 {
        return Err(Error::InvalidRadix { s, min: 3 });
    }
    if u >= s {
        return Err(Error::InvalidMarker { u, s });
    }
    Ok(())
}

/// Allowed block values `A_0 \ {u}` in increasing order.
pub fn block_values(s: u32, u: u32) -> Vec<u32> {
    (1..s).filter(|&c| c != u).collect()
}

pub fn is_block_value(s: u32, u: u32, c: u32) -> bool {
    c >= 1 && c < s && c != u
}

/// The digit word `u^(c-1) c` of a single block.
pub fn block_word(u: u32, c: u32) -> Vec<u32> {
    let mut w = vec![u; c as usize - 1];
    w.push(c);
    w
}

pub(crate) fn check_blocks(s: u32, u: u32, blocks: &[u32], first_index: usize) -> Result<()> {
    match blocks.iter().position(|&c| !is_block_value(s, u, c)) {
        Some(i) => Err(Error::InvalidBlock { value: blocks[i], index: first_index + i, s, u }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawBlockSequence")]
pub struct BlockSequence {
    s: u32,
    u: u32,
    blocks: Vec<u32>,
    tail: Option<Vec<u32>>,
}

#[derive(Deserialize)]
struct RawBlockSequence {
    s: u32,
    u: u32,
    blocks: Vec<u32>,
    tail: Option<Vec<u32>>,
}

impl TryFrom<RawBlockSequence> for BlockSequence {
    type Error = Error;

    fn try_from(raw: RawBlockSequence) -> Result<Self> {
        BlockSequence::new(raw.s, raw.u, raw.blocks, raw.tail)
    }
}

impl BlockSequence {
    /// Validates every block and normalizes the periodic tail.
    pub fn new(s: u32, u: u32, blocks: Vec<u32>, tail: Option<Vec<u32>>) -> Result<Self> {
        check_params(s, u)?;
        check_blocks(s, u, &blocks, 0)?;
        let mut blocks = blocks;
        let tail = match tail {
            None => None,
            Some(t) if t.is_empty() => {
                return Err(Error::InvalidParameter("periodic tail must be nonempty".into()))
            }
            Some(mut t) => {
                check_blocks(s, u, &t, blocks.len())?;
                normalize_periodic(&mut blocks, &mut t);
                Some(t)
            }
        };
        Ok(BlockSequence { s, u, blocks, tail })
    }

    pub fn finite(s: u32, u: u32, blocks: Vec<u32>) -> Result<Self> {
        Self::new(s, u, blocks, None)
    }

    pub fn periodic(s: u32, u: u32, blocks: Vec<u32>, tail: Vec<u32>) -> Result<Self> {
        Self::new(s, u, blocks, Some(tail))
    }

    pub fn base(&self) -> u32 {
        self.s
    }

    pub fn marker(&self) -> u32 {
        self.u
    }

    pub fn blocks(&self) -> &[u32] {
        &self.blocks
    }

    pub fn tail(&self) -> Option<&[u32]> {
        self.tail.as_deref()
    }

    /// Blocks in order; endless when a tail is present.
    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        let tail = self.tail.as_deref().unwrap_or(&[]);
        self.blocks.iter().copied().chain(tail.iter().copied().cycle())
    }
}

fn expand(u: u32, blocks: &[u32]) -> Vec<u32> {
    blocks.iter().flat_map(|&c| block_word(u, c)).collect()
}

/// Digit form of a block sequence.
pub fn block_encode(b: &BlockSequence) -> DigitString {
    let pre = expand(b.u, &b.blocks);
    let built = match &b.tail {
        Some(t) => DigitString::periodic(b.s, pre, expand(b.u, t)),
        None => DigitString::finite(b.s, pre),
    };
    built.expect("block digits are valid base-s digits")
}

/// Streaming parser for the block language `(u^(c-1) c)*`.
#[derive(Debug, Clone)]
pub struct BlockScanner {
    s: u32,
    u: u32,
    run: u32,
    offset: usize,
}

impl BlockScanner {
    pub fn new(s: u32, u: u32) -> Self {
        BlockScanner { s, u, run: 0, offset: 0 }
    }

    /// Feeds one digit; returns the block value when the digit closes a block.
    pub fn push(&mut self, digit: u32) -> Result<Option<u32>> {
        let at = self.offset;
        self.offset += 1;
        if digit >= self.s {
            return Err(Error::InvalidDigit { digit, offset: at, s: self.s });
        }
        if digit == self.u {
            self.run += 1;
            return Ok(None);
        }
        let expected = self.run + 1;
        if digit != expected {
            return Err(Error::NotAMember {
                offset: at,
                reason: MembershipViolation::UnexpectedDigit { expected, found: digit },
            });
        }
        self.run = 0;
        Ok(Some(digit))
    }

    /// Number of marker digits read since the last block boundary.
    pub fn pending_run(&self) -> u32 {
        self.run
    }

    pub fn at_boundary(&self) -> bool {
        self.run == 0
    }

    pub fn offset(&self) -> usize {
        self.offset
    }
}

/// Inverse of [`block_encode`].
///
/// Finite words must end on a block boundary. For periodic strings the
/// returned sequence has a periodic tail of blocks.
pub fn block_decode(d: &DigitString, u: u32) -> Result<BlockSequence> {
    let s = d.base();
    check_params(s, u)?;
    let mut scanner = BlockScanner::new(s, u);
    let mut blocks = Vec::new();

    let Some(period) = d.period() else {
        for &digit in d.preperiod() {
            if let Some(c) = scanner.push(digit)? {
                blocks.push(c);
            }
        }
        if !scanner.at_boundary() {
            return Err(Error::NotAMember {
                offset: scanner.offset(),
                reason: MembershipViolation::IncompleteBlock { run: scanner.pending_run() },
            });
        }
        return BlockSequence::finite(s, u, blocks);
    };

    let pre_len = d.preperiod().len();
    if period.iter().all(|&x| x == u) {
        // the scanner would wait forever; report where the endless run starts
        let trailing = d.preperiod().iter().rev().take_while(|&&x| x == u).count();
        return Err(Error::NotAMember {
            offset: pre_len - trailing,
            reason: MembershipViolation::EndlessMarkerRun,
        });
    }
    // phase of the period at each block boundary → index of the block starting there
    let mut phases: HashMap<usize, usize> = HashMap::new();
    for digit in d.digits() {
        if scanner.at_boundary() && scanner.offset() >= pre_len {
            let phase = (scanner.offset() - pre_len) % period.len();
            if let Some(&start) = phases.get(&phase) {
                let tail = blocks.split_off(start);
                return BlockSequence::periodic(s, u, blocks, tail);
            }
            phases.insert(phase, blocks.len());
        }
        if let Some(c) = scanner.push(digit)? {
            blocks.push(c);
        }
    }
    unreachable!("a periodic digit string is endless")
}

/// `u/(s-1) + Σ (c_k - u) s^{-(c_1+...+c_k)}`.
///
/// A finite sequence yields the value of its encoded word with a `(0)` tail,
/// which is the partial sum `τ` of its cylinder.
pub fn element_value(b: &BlockSequence) -> Rational {
    let s = b.s;
    let u = BigInt::from(b.u);
    let mut value = Rational::zero();
    let mut depth = 0usize;
    for &c in &b.blocks {
        depth += c as usize;
        value += Rational::new(BigInt::from(c) - &u, big_pow(s, depth));
    }
    match &b.tail {
        None => {
            // marker digits of the finite word: Σ_{k<=depth} u s^{-k}
            let geometric = Rational::one() - inv_pow(s, depth);
            value + Rational::new(u, BigInt::from(s - 1)) * geometric
        }
        Some(tail) => {
            let mut period_sum = Rational::zero();
            let mut inner = 0usize;
            for &c in tail {
                inner += c as usize;
                period_sum += Rational::new(BigInt::from(c) - &u, big_pow(s, inner));
            }
            let repeat = Rational::one() / (Rational::one() - inv_pow(s, inner));
            value
                + inv_pow(s, depth) * period_sum * repeat
                + Rational::new(u, BigInt::from(s - 1))
        }
    }
}

/// Image of `b` under the coding map `x ↦ Σ c_n s^{-n}` into the Cantor set
/// over the block alphabet.
pub fn coding_value(b: &BlockSequence) -> Rational {
    let d = match &b.tail {
        Some(t) => DigitString::periodic(b.s, b.blocks.clone(), t.clone()),
        None => DigitString::finite(b.s, b.blocks.clone()),
    };
    d.expect("block values are base-s digits").value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digits::digits_to_rational;
    use crate::rational::ratio;

    fn word(b: &BlockSequence) -> Vec<u32> {
        block_encode(b).preperiod().to_vec()
    }

    #[test]
    fn encode_templates() {
        assert_eq!(word(&BlockSequence::finite(3, 0, vec![2, 1]).unwrap()), vec![0, 2, 1]);
        assert_eq!(word(&BlockSequence::finite(4, 1, vec![3, 2]).unwrap()), vec![1, 1, 3, 1, 2]);
    }

    #[test]
    fn encode_with_tail() {
        let b = BlockSequence::periodic(3, 0, vec![1], vec![2]).unwrap();
        let d = block_encode(&b);
        assert_eq!(d.preperiod(), &[1]);
        assert_eq!(d.period(), Some(&[0, 2][..]));
        assert_eq!(digits_to_rational(&d), element_value(&b));
    }

    #[test]
    fn invalid_blocks_rejected() {
        assert!(matches!(
            BlockSequence::finite(4, 1, vec![2, 1]),
            Err(Error::InvalidBlock { value: 1, index: 1, .. })
        ));
        assert!(BlockSequence::finite(4, 1, vec![0]).is_err());
        assert!(BlockSequence::finite(4, 1, vec![4]).is_err());
        assert!(BlockSequence::periodic(4, 0, vec![], vec![]).is_err());
        assert!(BlockSequence::finite(2, 0, vec![1]).is_err());
    }

    #[test]
    fn decode_examples() {
        let d = DigitString::finite(3, vec![0, 2, 1]).unwrap();
        assert_eq!(block_decode(&d, 0).unwrap().blocks(), &[2, 1]);

        // two zeros would need block value 3, which base 3 does not have
        let d = DigitString::finite(3, vec![0, 0, 1]).unwrap();
        let err = block_decode(&d, 0).unwrap_err();
        assert_eq!(
            err,
            Error::NotAMember {
                offset: 2,
                reason: MembershipViolation::UnexpectedDigit { expected: 3, found: 1 }
            }
        );

        let d = DigitString::finite(4, vec![1, 1, 1, 2]).unwrap();
        assert!(matches!(block_decode(&d, 1), Err(Error::NotAMember { offset: 3, .. })));
    }

    #[test]
    fn decode_rejects_zero_terminator_and_incomplete_words() {
        let d = DigitString::finite(4, vec![2, 0]).unwrap();
        assert!(matches!(block_decode(&d, 2), Err(Error::NotAMember { offset: 1, .. })));
        let d = DigitString::finite(4, vec![1, 0]).unwrap();
        assert_eq!(
            block_decode(&d, 0).unwrap_err(),
            Error::NotAMember { offset: 2, reason: MembershipViolation::IncompleteBlock { run: 1 } }
        );
    }

    #[test]
    fn decode_endless_marker_run() {
        let d = DigitString::periodic(4, vec![1, 2, 2], vec![2]).unwrap();
        assert_eq!(
            block_decode(&d, 2).unwrap_err(),
            Error::NotAMember { offset: 1, reason: MembershipViolation::EndlessMarkerRun }
        );
    }

    #[test]
    fn decode_periodic_across_phase() {
        // (021) repeated is the block tail (2 1)
        let d = DigitString::periodic(3, vec![], vec![0, 2, 1]).unwrap();
        let b = block_decode(&d, 0).unwrap();
        assert_eq!(b.blocks(), &[] as &[u32]);
        assert_eq!(b.tail(), Some(&[2, 1][..]));
        // (102) repeated is the tail (1 2)
        let d = DigitString::periodic(3, vec![], vec![1, 0, 2]).unwrap();
        assert_eq!(block_decode(&d, 0).unwrap().tail(), Some(&[1, 2][..]));
    }

    #[test]
    fn element_values() {
        let ones = BlockSequence::periodic(3, 0, vec![], vec![1]).unwrap();
        assert_eq!(element_value(&ones), ratio(1, 2));
        let twos = BlockSequence::periodic(3, 0, vec![], vec![2]).unwrap();
        assert_eq!(element_value(&twos), ratio(1, 4));
        let b = BlockSequence::periodic(4, 1, vec![], vec![2]).unwrap();
        assert_eq!(element_value(&b), ratio(2, 5));
    }

    #[test]
    fn finite_value_is_word_value() {
        let b = BlockSequence::finite(5, 2, vec![3, 1, 4]).unwrap();
        assert_eq!(element_value(&b), digits_to_rational(&block_encode(&b)));
    }

    #[test]
    fn coding_map() {
        let b = BlockSequence::periodic(3, 0, vec![1], vec![2]).unwrap();
        // 0.1(2) in base 3 = 2/3
        assert_eq!(coding_value(&b), ratio(2, 3));
    }

    #[test]
    fn scanner_streams_blocks() {
        let mut sc = BlockScanner::new(4, 1);
        let got: Vec<Option<u32>> = [1, 2, 1, 1, 3].iter().map(|&d| sc.push(d).unwrap()).collect();
        assert_eq!(got, vec![None, Some(2), None, None, Some(3)]);
        assert!(sc.at_boundary());
        assert!(sc.push(3).is_err());
    }
}
