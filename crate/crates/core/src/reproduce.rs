//! Runner for the acceptance checks, shared by the test suite and the CLI.
//!
//! Each criterion is a self-contained audit that returns observed versus
//! expected values. Data fields are deterministic for a given seed; wall
//! time is kept out of the serialized form.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::blocks::{block_decode, block_encode, block_values, element_value, BlockSequence};
use crate::comboset::{block_alphabet, comboset_extrema, sprime3_alphabet, tilde_alphabet, ComboAlphabet};
use crate::cylinder::{
    cylinder_diameter, cylinder_order, gap_interval, partial_sum_endpoints, set_extrema, Cylinder, SiblingOrder,
};
use crate::dimension::{
    box_count_estimate, dim_alphabet, dim_s, dim_tilde, power_scales, HullCover, DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::measure::{measure_decay_report, sigma};
use crate::normality::{
    boundary_residuals, digit_frequencies, normal_candidate_exists, sprime3_element, structural_zero_frequency,
};
use crate::oracle::{enumerate_extension_bounds, extension_bounds, gap_audit, random_blocks};
use crate::rational::{inv_pow, ratio, to_f64, Rational};

pub const DEFAULT_SEED: u64 = 20_240_917;

/// Failures listed per criterion before truncation.
const MAX_LISTED: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Dimension,
    Cylinder,
    Measure,
    Normality,
    Codec,
}

impl Group {
    pub const ALL: [Group; 5] = [Group::Dimension, Group::Cylinder, Group::Measure, Group::Normality, Group::Codec];

    pub fn name(self) -> &'static str {
        match self {
            Group::Dimension => "dimension",
            Group::Cylinder => "cylinder",
            Group::Measure => "measure",
            Group::Normality => "normality",
            Group::Codec => "codec",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Group::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown criterion group {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproduceConfig {
    pub seed: u64,
    /// Allowed `|slope - α|` for the box-count criterion.
    pub box_tolerance: f64,
    /// Run only criteria in this group.
    pub only: Option<Group>,
    /// Fail criteria that exceed their time limit.
    pub enforce_time: bool,
}

impl Default for ReproduceConfig {
    fn default() -> Self {
        ReproduceConfig { seed: DEFAULT_SEED, box_tolerance: 0.05, only: None, enforce_time: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub group: Group,
    pub title: &'static str,
    pub passed: bool,
    pub cases: u64,
    pub observed: String,
    pub expected: String,
    /// First few failing cases.
    pub failures: Vec<String>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CriterionReport {
    /// One-line summary, e.g. `[PASS] 1 dimension: ...`.
    pub fn line(&self) -> String {
        format!(
            "[{}] {} {}: {} | observed {} | expected {} | {} cases | {:.2?}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.group,
            self.title,
            self.observed,
            self.expected,
            self.cases,
            self.elapsed
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproduceReport {
    pub version: &'static str,
    pub seed: u64,
    pub criteria: Vec<CriterionReport>,
}

impl ReproduceReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

struct Tally {
    cases: u64,
    failures: Vec<String>,
    failed: u64,
}

impl Tally {
    fn new() -> Self {
        Tally { cases: 0, failures: Vec::new(), failed: 0 }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failed += 1;
            if self.failures.len() < MAX_LISTED {
                self.failures.push(what());
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.cases += other.cases;
        self.failed += other.failed;
        for f in other.failures {
            if self.failures.len() < MAX_LISTED {
                self.failures.push(f);
            }
        }
        self
    }
}

pub const CRITERIA: [(u8, Group, &str); 9] = [
    (1, Group::Dimension, "closed-form dimensions"),
    (2, Group::Dimension, "degenerate alphabets"),
    (3, Group::Cylinder, "cylinder identities"),
    (4, Group::Cylinder, "sibling order and gaps"),
    (5, Group::Measure, "covering measure recursion"),
    (6, Group::Cylinder, "set extrema cross-check"),
    (7, Group::Dimension, "box-count oracle"),
    (8, Group::Normality, "normality dichotomy"),
    (9, Group::Codec, "block codec bijection"),
];

fn time_limit(id: u8) -> Option<Duration> {
    match id {
        1 => Some(Duration::from_millis(100)),
        3 => Some(Duration::from_secs(60)),
        5 => Some(Duration::from_secs(30)),
        _ => None,
    }
}

pub fn run_criterion(id: u8, cfg: &ReproduceConfig) -> Result<CriterionReport> {
    let &(_, group, title) = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .ok_or_else(|| Error::InvalidParameter(format!("no criterion {id}")))?;
    let start = Instant::now();
    let (mut tally, observed, expected) = match id {
        1 => closed_forms()?,
        2 => degenerate_alphabets()?,
        3 => cylinder_identities(cfg.seed)?,
        4 => order_and_gaps()?,
        5 => measure_recursion()?,
        6 => extrema_cross_check()?,
        7 => box_count_oracle(cfg.box_tolerance, cfg.enforce_time)?,
        8 => normality_dichotomy(cfg.seed)?,
        _ => codec_bijection(cfg.seed)?,
    };
    let elapsed = start.elapsed();
    if let Some(limit) = time_limit(id).filter(|_| cfg.enforce_time) {
        tally.check(elapsed <= limit, || format!("took {elapsed:.2?}, limit {limit:.2?}"));
    }
    Ok(CriterionReport {
        id,
        group,
        title,
        passed: tally.failed == 0,
        cases: tally.cases,
        observed,
        expected,
        failures: tally.failures,
        elapsed,
    })
}

pub fn reproduce_all(cfg: &ReproduceConfig) -> Result<ReproduceReport> {
    let criteria = CRITERIA
        .iter()
        .filter(|(_, g, _)| cfg.only.is_none_or(|o| o == *g))
        .map(|&(id, _, _)| run_criterion(id, cfg))
        .collect::<Result<_>>()?;
    Ok(ReproduceReport { version: crate::VERSION, seed: cfg.seed, criteria })
}

type Outcome = Result<(Tally, String, String)>;

fn closed_forms() -> Outcome {
    let ln3 = 3f64.ln();
    let golden = ((5f64.sqrt() + 1.0) / 2.0).ln() / ln3;
    let third = 2f64.ln() / ln3 / 3.0;
    let a = dim_s(3, 0)?.alpha;
    let b = dim_alphabet(&sprime3_alphabet(), DEFAULT_TOL)?.alpha;
    let mut t = Tally::new();
    t.check((a - golden).abs() <= 1e-9, || format!("dim S(3,0) = {a}"));
    t.check((b - third).abs() <= 1e-9, || format!("dim S'3 = {b}"));
    Ok((t, format!("{a:.12}, {b:.12}"), format!("{golden:.12}, {third:.12}")))
}

fn degenerate_alphabets() -> Outcome {
    let mut t = Tally::new();
    for s in 2..=12u32 {
        for len in 1..=4usize {
            for first in 0..s {
                let word: Vec<u32> = (0..len as u32).map(|i| (first + i) % s).collect();
                let a = ComboAlphabet::new(s, vec![word.clone()])?;
                let r = dim_alphabet(&a, DEFAULT_TOL)?;
                t.check(r.alpha == 0.0, || format!("s={s} word {word:?}: alpha {}", r.alpha));
            }
        }
        let a = ComboAlphabet::new(s, (0..s).map(|d| vec![d]).collect())?;
        let r = dim_alphabet(&a, DEFAULT_TOL)?;
        t.check((r.alpha - 1.0).abs() <= 1e-12, || format!("s={s} full digits: alpha {}", r.alpha));
    }
    Ok((t, "alpha 0 for one word, 1 for all digits".into(), "0 exactly, 1 within 1e-12".into()))
}

fn random_case(rng: &mut ChaCha8Rng) -> (u32, u32, Vec<u32>) {
    let s = rng.gen_range(3..=8);
    let u = rng.gen_range(0..s);
    let rank = rng.gen_range(0..=4);
    let base = random_blocks(rng, s, u, rank);
    (s, u, base)
}

fn cylinder_identities(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<(u32, u32, Vec<u32>, u32)> = (0..1000)
        .map(|_| {
            let (s, u, base) = random_case(&mut rng);
            let values = block_values(s, u);
            let c = values[rng.gen_range(0..values.len())];
            (s, u, base, c)
        })
        .collect();
    let tally = cases
        .par_iter()
        .map(|(s, u, base, c)| -> Result<Tally> {
            let (s, u, c) = (*s, *u, *c);
            let mut t = Tally::new();
            let tag = || format!("s={s} u={u} base={base:?}");
            let parent = Cylinder::new(s, u, base)?;
            let child = parent.child(c)?;
            let d = cylinder_diameter(s, u, base)?;
            t.check(d == &parent.sup - &parent.inf, || format!("{} diameter", tag()));
            t.check(child.diameter() == parent.diameter() * inv_pow(s, c as usize), || {
                format!("{} child {c} ratio", tag())
            });
            if u == 0 {
                t.check(partial_sum_endpoints(s, base)? == (parent.inf.clone(), parent.sup.clone()), || {
                    format!("{} partial sums", tag())
                });
            }
            let b = extension_bounds(s, u, base, 10)?;
            t.check(b.brackets(&parent.inf, &parent.sup), || format!("{} extension bounds", tag()));
            Ok(t)
        })
        .try_reduce(Tally::new, |a, b| Ok(a.merge(b)))?;
    let observed = format!("{} failures", tally.failed);
    Ok((tally, observed, "0 failures over 1000 cylinders".into()))
}

fn bases_up_to_rank(s: u32, u: u32, rank: usize) -> Vec<Vec<u32>> {
    let values = block_values(s, u);
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..rank {
        frontier = frontier
            .iter()
            .flat_map(|b: &Vec<u32>| {
                values.iter().map(move |&c| {
                    let mut n = b.clone();
                    n.push(c);
                    n
                })
            })
            .collect();
        out.extend(frontier.iter().cloned());
    }
    out
}

fn order_and_gaps() -> Outcome {
    let jobs: Vec<(u32, u32)> = (3..=8u32).flat_map(|s| (0..s).map(move |u| (s, u))).collect();
    let order = jobs
        .par_iter()
        .map(|&(s, u)| -> Result<Tally> {
            let mut t = Tally::new();
            for base in bases_up_to_rank(s, u, 2) {
                let mut kids = Cylinder::new(s, u, &base)?.children();
                for p in 1..s - 1 {
                    if block_values(s, u).contains(&p) && block_values(s, u).contains(&(p + 1)) {
                        let v = cylinder_order(s, u, &base, p)?;
                        t.check(v.agrees() && v.observed != SiblingOrder::Overlapping, || {
                            format!("s={s} u={u} base={base:?} p={p}: {v:?}")
                        });
                    }
                }
                kids.sort_by(|a, b| a.inf.cmp(&b.inf));
                let disjoint = kids.windows(2).all(|w| w[0].sup < w[1].inf);
                t.check(disjoint, || format!("s={s} u={u} base={base:?}: children overlap"));
            }
            Ok(t)
        })
        .try_reduce(Tally::new, |a, b| Ok(a.merge(b)))?;
    let gap_jobs: Vec<(u32, Vec<u32>, u32)> = (3..=8u32)
        .flat_map(|s| bases_up_to_rank(s, 0, 2).into_iter().flat_map(move |b| (1..=s - 2).map(move |p| (s, b.clone(), p))))
        .collect();
    let gaps = gap_jobs
        .par_iter()
        .map(|(s, base, p)| -> Result<Tally> {
            let mut t = Tally::new();
            let g = gap_interval(*s, base, *p)?;
            let audit = gap_audit(*s, &g, 12)?;
            t.check(audit.hits.is_empty(), || format!("s={s} base={base:?} p={p}: element at {:?}", audit.hits[0]));
            Ok(t)
        })
        .try_reduce(Tally::new, |a, b| Ok(a.merge(b)))?;
    let (order_cases, gap_cases) = (order.cases, gaps.cases);
    let tally = order.merge(gaps);
    let observed = format!("{} failures ({order_cases} order checks, {gap_cases} gaps)", tally.failed);
    Ok((tally, observed, "0 failures".into()))
}

fn measure_recursion() -> Outcome {
    let mut t = Tally::new();
    for s in [3, 4] {
        let rows = measure_decay_report(s, 0, 8)?;
        let sig = sigma(s, 0)?;
        for r in &rows {
            t.check(r.closed_form_agrees, || format!("s={s} k={}: direct sum differs", r.k));
            if let Some(q) = &r.ratio {
                t.check(*q == sig, || format!("s={s} k={}: ratio {q}", r.k));
            }
        }
    }
    let e8 = measure_decay_report(3, 0, 8)?.pop().expect("eight rows").length;
    let target = num::pow(ratio(4, 9), 8) / BigInt::from(4);
    t.check(e8 == target, || format!("lambda(E_8) = {e8}"));
    t.check(e8 < ratio(1, 1000), || format!("lambda(E_8) = {e8} is not below 1e-3"));
    let observed = format!("lambda(E_8) = {e8} ~ {:.3e}", to_f64(&e8));
    Ok((t, observed, format!("(4/9)^8/4 = {target}")))
}

fn extrema_cross_check() -> Outcome {
    let mut t = Tally::new();
    for s in 3..=8u32 {
        for u in 0..s {
            let (inf, sup) = set_extrema(s, u)?;
            let e = comboset_extrema(&block_alphabet(s, u)?);
            t.check(e.inf == inf && e.sup == sup, || format!("s={s} u={u}: alphabet extrema differ"));
            let b = extension_bounds(s, u, &[], 10)?;
            t.check(b.brackets(&inf, &sup), || format!("s={s} u={u}: outside depth-10 bounds"));
            let branches = block_values(s, u).len() as u64;
            if branches.pow(10) <= 1 << 16 {
                let brute = enumerate_extension_bounds(s, u, &[], 10)?;
                t.check(brute == b, || format!("s={s} u={u}: enumeration differs from recursion"));
            }
        }
    }
    let observed = format!("{} failures", t.failed);
    Ok((t, observed, "0 failures over s = 3..8".into()))
}

fn box_count_oracle(tolerance: f64, enforce_time: bool) -> Outcome {
    let sets = [
        ("S(3,0)", block_alphabet(3, 0)?, dim_s(3, 0)?.alpha),
        ("S(4,0)", block_alphabet(4, 0)?, dim_s(4, 0)?.alpha),
        ("tilde S(3)", tilde_alphabet(3)?, dim_tilde(3)?.alpha),
    ];
    let mut t = Tally::new();
    let mut observed = Vec::new();
    let mut expected = Vec::new();
    for (name, a, alpha) in sets {
        let start = Instant::now();
        let cover = HullCover::from_alphabet(&a, 12)?;
        let r = box_count_estimate(&cover, &power_scales(a.base(), 4..=10))?;
        t.check((r.slope - alpha).abs() <= tolerance, || format!("{name}: slope {} vs {alpha}", r.slope));
        let elapsed = start.elapsed();
        if enforce_time {
            t.check(elapsed <= Duration::from_secs(10), || format!("{name}: took {elapsed:.2?}"));
        }
        observed.push(format!("{name} {:.4}", r.slope));
        expected.push(format!("{alpha:.4}"));
    }
    Ok((t, observed.join(", "), format!("{} within {tolerance}", expected.join(", "))))
}

fn normality_dichotomy(seed: u64) -> Outcome {
    let mut t = Tally::new();
    let z3 = structural_zero_frequency(3)?;
    t.check(z3 == ratio(1, 3), || format!("s=3 structural frequency {z3}"));
    t.check(normal_candidate_exists(3)?.exists, || "s=3 verdict false".into());
    for s in 4..=10u32 {
        let v = normal_candidate_exists(s)?;
        t.check(v.structural_zero_frequency != ratio(1, s as i64) && !v.exists, || format!("s={s}: {v:?}"));
    }
    let x = sprime3_element(seed, 10_000);
    let p = digit_frequencies(&x, 30_000)?;
    let dev = p.max_deviation_from_uniform();
    t.check(dev <= ratio(1, 100), || format!("frequency deviation {dev}"));
    let audit = boundary_residuals(&x, 0, 30_000)?;
    t.check(audit.max_abs_residual == 0, || format!("residual {} at a boundary", audit.max_abs_residual));
    let observed = format!(
        "freqs {}/{}/{} of 30000, {} boundaries with residual 0",
        p.counts[0], p.counts[1], p.counts[2], audit.boundaries
    );
    Ok((t, observed, "zero frequency 1/3 only for s=3; freqs within 0.01 of 1/3".into()))
}

fn codec_bijection(seed: u64) -> Outcome {
    let jobs: Vec<(u32, u32)> = (3..=8u32).flat_map(|s| (0..s).map(move |u| (s, u))).collect();
    let tally = jobs
        .par_iter()
        .map(|&(s, u)| -> Result<Tally> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((s as u64) << 32 | u as u64));
            let mut t = Tally::new();
            let mut images: HashMap<Rational, BlockSequence> = HashMap::new();
            for _ in 0..10_000 {
                let n = rng.gen_range(0..=10);
                let blocks = random_blocks(&mut rng, s, u, n);
                let b = if rng.gen_bool(0.5) {
                    let m = rng.gen_range(1..=4);
                    BlockSequence::periodic(s, u, blocks, random_blocks(&mut rng, s, u, m))?
                } else {
                    BlockSequence::finite(s, u, blocks)?
                };
                let back = block_decode(&block_encode(&b), u)?;
                t.check(back == b, || format!("s={s} u={u}: {b:?} decoded as {back:?}"));
                if b.tail().is_some() {
                    let x = element_value(&b);
                    match images.get(&x) {
                        Some(prev) => t.check(*prev == b, || format!("s={s} u={u}: {prev:?} and {b:?} share {x}")),
                        None => {
                            images.insert(x, b);
                        }
                    }
                }
            }
            Ok(t)
        })
        .try_reduce(Tally::new, |a, b| Ok(a.merge(b)))?;
    let observed = format!("{} failures over {} checks", tally.failed, tally.cases);
    Ok((tally, observed, "roundtrip identity and distinct images".into()))
}
