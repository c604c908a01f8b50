use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use sadic::comboset::{block_alphabet, sprime3_alphabet, tilde_alphabet, ComboAlphabet};
use sadic::cylinder::{gap_interval, Cylinder, GapInterval};
use sadic::dimension::{
    box_count_with, dim_alphabet, moran_solve, power_scales, BoxCountOptions, DimensionResult, HullCover,
    MoranEquation,
};
use sadic::measure::{measure_decay_report_with_budget, sigma};
use sadic::normality::{
    digit_frequencies, normal_candidate_exists, normality_dimension_bounds, structural_identity_residual,
    FrequencyProfile, IdentityResidual, NormalityBounds, NormalityVerdict,
};
use sadic::oracle::{gap_audit, random_blocks};
use sadic::rational::{to_f64, RationalJson};
use sadic::reproduce::{reproduce_all, Group, ReproduceConfig};
use sadic::{block_encode, element_value, BlockSequence, DigitString, Rational};

use crate::{Cli, CliError, Command, Format, SetArgs};

pub const SCHEMA: u32 = 1;

pub struct Report {
    pub text: String,
    /// Set when the report was produced but a check failed.
    pub failure: Option<String>,
}

impl Report {
    fn ok(text: String) -> Self {
        Report { text, failure: None }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: u32,
    version: &'static str,
    command: &'a str,
    #[serde(flatten)]
    data: T,
}

fn json<T: Serialize>(command: &str, data: T) -> Result<Report, CliError> {
    let env = Envelope { schema: SCHEMA, version: sadic::VERSION, command, data };
    let mut text = serde_json::to_string_pretty(&env).map_err(|e| CliError::Domain(e.to_string()))?;
    text.push('\n');
    Ok(Report::ok(text))
}

fn reject(cli: &Cli, allowed: &[Format]) -> Result<(), CliError> {
    match cli.format {
        Some(f) if !allowed.contains(&f) => {
            Err(CliError::Domain(format!("format {f:?} is not available for this command").to_lowercase()))
        }
        _ => Ok(()),
    }
}

pub fn dispatch(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Dim(a) => {
            reject(cli, &[Format::Json])?;
            dim(&a.set, a.tol)
        }
        Command::Cylinder(a) => {
            reject(cli, &[Format::Json])?;
            cylinder(a.s, a.u, &a.base)
        }
        Command::Gaps(a) => {
            reject(cli, &[Format::Json])?;
            gaps(a.s, &a.base, a.p, a.audit_depth)
        }
        Command::Generate(a) => {
            reject(cli, &[Format::Json])?;
            generate(a)
        }
        Command::Boxcount(a) => {
            reject(cli, &[Format::Json, Format::Csv])?;
            boxcount(a, cli.format == Some(Format::Csv))
        }
        Command::Measure(a) => {
            reject(cli, &[Format::Json, Format::Csv])?;
            measure(a, cli.format != Some(Format::Json))
        }
        Command::Freq(a) => {
            reject(cli, &[Format::Json])?;
            freq(a)
        }
        Command::Normal(a) => {
            reject(cli, &[Format::Json])?;
            normal(a.s)
        }
        Command::Reproduce(a) => {
            reject(cli, &[Format::Json, Format::Table])?;
            reproduce(a, cli.format == Some(Format::Json))
        }
    }
}

/// Digits from `1,2,3` or `123`.
pub fn parse_digits(text: &str) -> Result<Vec<u32>, CliError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(vec![]);
    }
    let bad = |t: &str| CliError::Domain(format!("cannot read {t:?} as a digit list"));
    if text.contains(',') {
        text.split(',').map(|t| t.trim().parse::<u32>().map_err(|_| bad(text))).collect()
    } else {
        text.chars().map(|c| c.to_digit(10).ok_or_else(|| bad(text))).collect()
    }
}

/// Exponents from `4..10` (inclusive) or `4,6,8`.
pub fn parse_scales(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Domain(format!("cannot read {text:?} as scales; use a..b or a,b,c"));
    if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    text.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

fn resolve_alphabet(spec: &str) -> Result<ComboAlphabet, CliError> {
    let parse_u32 = |t: &str| t.parse::<u32>().map_err(|_| CliError::Domain(format!("bad alphabet name {spec:?}")));
    if spec == "sprime3" {
        return Ok(sprime3_alphabet());
    }
    if let Some(rest) = spec.strip_prefix("tilde:") {
        return Ok(tilde_alphabet(parse_u32(rest)?)?);
    }
    if let Some(rest) = spec.strip_prefix("blocks:") {
        let (s, u) = rest.split_once(':').ok_or_else(|| CliError::Domain(format!("expected blocks:S:U, got {spec:?}")))?;
        return Ok(block_alphabet(parse_u32(s)?, parse_u32(u)?)?);
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| CliError::Domain(format!("cannot read alphabet file {spec}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| CliError::Domain(format!("malformed alphabet file {spec}: {e}")))
}

fn set_alphabet(set: &SetArgs) -> Result<ComboAlphabet, CliError> {
    match (&set.alphabet, set.s, set.u) {
        (Some(spec), _, _) => resolve_alphabet(spec),
        (None, Some(s), Some(u)) => Ok(block_alphabet(s, u)?),
        _ => Err(CliError::Domain("give --s and --u, or --alphabet".into())),
    }
}

#[derive(Serialize)]
struct DimOut {
    s: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    u: Option<u32>,
    alphabet: ComboAlphabet,
    counts: std::collections::BTreeMap<u32, u64>,
    #[serde(flatten)]
    result: DimensionResult,
}

fn dim(set: &SetArgs, tol: f64) -> Result<Report, CliError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(CliError::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let a = set_alphabet(set)?;
    let eq = MoranEquation::from_alphabet(&a);
    let result = if set.alphabet.is_some() { dim_alphabet(&a, tol)? } else { moran_solve(&eq, tol)? };
    json("dim", DimOut { s: a.base(), u: set.u, counts: eq.counts().clone(), alphabet: a, result })
}

#[derive(Serialize)]
struct ChildOut {
    block: u32,
    inf: RationalJson,
    sup: RationalJson,
}

#[derive(Serialize)]
struct CylinderOut {
    s: u32,
    u: u32,
    base: Vec<u32>,
    inf: RationalJson,
    sup: RationalJson,
    diameter: RationalJson,
    tau: RationalJson,
    children: Vec<ChildOut>,
}

fn cylinder(s: u32, u: u32, base: &str) -> Result<Report, CliError> {
    let c = Cylinder::new(s, u, &parse_digits(base)?)?;
    let children = c
        .children()
        .into_iter()
        .map(|k| ChildOut { block: *k.base.last().expect("child has a block"), inf: (&k.inf).into(), sup: (&k.sup).into() })
        .collect();
    json(
        "cylinder",
        CylinderOut {
            s,
            u,
            inf: (&c.inf).into(),
            sup: (&c.sup).into(),
            diameter: (&c.diameter()).into(),
            tau: (&c.tau).into(),
            base: c.base,
            children,
        },
    )
}

#[derive(Serialize)]
struct AuditOut {
    depth: usize,
    nodes: u64,
    elements: u64,
    hits: Vec<Vec<u32>>,
}

#[derive(Serialize)]
struct GapOut {
    p: u32,
    #[serde(flatten)]
    gap: GapInterval,
    length: RationalJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    audit: Option<AuditOut>,
}

#[derive(Serialize)]
struct GapsOut {
    s: u32,
    u: u32,
    base: Vec<u32>,
    gaps: Vec<GapOut>,
}

fn gaps(s: u32, base: &str, p: Option<u32>, audit_depth: Option<usize>) -> Result<Report, CliError> {
    let base = parse_digits(base)?;
    let ps: Vec<u32> = match p {
        Some(p) => vec![p],
        None => (1..s.saturating_sub(1)).collect(),
    };
    let mut out = Vec::new();
    let mut failure = None;
    for p in ps {
        let gap = gap_interval(s, &base, p)?;
        let audit = match audit_depth {
            Some(depth) => {
                let a = gap_audit(s, &gap, depth)?;
                if !a.hits.is_empty() {
                    failure = Some(format!("gap p={p} contains an element"));
                }
                Some(AuditOut { depth, nodes: a.nodes, elements: a.elements, hits: a.hits })
            }
            None => None,
        };
        out.push(GapOut { p, length: (&gap.length()).into(), gap, audit });
    }
    let mut report = json("gaps", GapsOut { s, u: 0, base, gaps: out })?;
    report.failure = failure;
    Ok(report)
}

#[derive(Serialize)]
struct GenerateOut {
    sequence: BlockSequence,
    text: String,
    digits: DigitString,
    value: RationalJson,
}

fn generate(a: &crate::GenerateArgs) -> Result<Report, CliError> {
    let blocks = match a.random {
        Some(n) => {
            sadic::blocks::check_params(a.s, a.u)?;
            random_blocks(&mut ChaCha8Rng::seed_from_u64(a.seed), a.s, a.u, n)
        }
        None => parse_digits(&a.blocks)?,
    };
    let tail = a.tail.as_deref().map(parse_digits).transpose()?;
    let seq = BlockSequence::new(a.s, a.u, blocks, tail)?;
    let digits = block_encode(&seq);
    let value = element_value(&seq);
    json("generate", GenerateOut { text: digits.to_text(), value: (&value).into(), sequence: seq, digits })
}

#[derive(Serialize)]
struct BoxcountOut {
    s: u32,
    depth: usize,
    hulls: usize,
    #[serde(flatten)]
    result: sadic::dimension::BoxCount,
}

fn boxcount(a: &crate::BoxcountArgs, csv: bool) -> Result<Report, CliError> {
    if a.depth == 0 {
        return Err(CliError::Domain("depth must be at least 1".into()));
    }
    let alphabet = set_alphabet(&a.set)?;
    let s = alphabet.base();
    let exps = parse_scales(&a.scales)?;
    let cover = HullCover::from_alphabet(&alphabet, a.depth)?;
    let result = box_count_with(&cover, &power_scales(s, exps), BoxCountOptions { drop_coarsest: a.drop })?;
    if csv {
        let mut text = String::from("num,den,approx,count,used_in_fit\n");
        for r in &result.counts {
            let e = RationalJson::from(&r.epsilon);
            let _ = writeln!(text, "{},{},{:e},{},{}", e.num, e.den, e.approx, r.count, r.used_in_fit);
        }
        return Ok(Report::ok(text));
    }
    json("boxcount", BoxcountOut { s, depth: a.depth, hulls: cover.len(), result })
}

#[derive(Serialize)]
struct MeasureOut {
    s: u32,
    u: u32,
    sigma: RationalJson,
    rows: Vec<sadic::measure::DecayRow>,
}

fn measure(a: &crate::MeasureArgs, csv: bool) -> Result<Report, CliError> {
    let rows = measure_decay_report_with_budget(a.s, a.u, a.k, a.budget)?;
    let failure = rows
        .iter()
        .find(|r| !r.closed_form_agrees)
        .map(|r| format!("stage {} disagrees with sigma^k d0", r.k));
    let mut report = if csv {
        let mut text = String::from("k,num,den,approx\n");
        for r in &rows {
            let _ = writeln!(text, "{},{},{},{:e}", r.k, r.length.numer(), r.length.denom(), to_f64(&r.length));
        }
        Report::ok(text)
    } else {
        json("measure", MeasureOut { s: a.s, u: a.u, sigma: (&sigma(a.s, a.u)?).into(), rows })?
    };
    report.failure = failure;
    Ok(report)
}

#[derive(Serialize)]
struct FreqOut {
    digits: DigitString,
    profile: FrequencyProfile,
    #[serde(skip_serializing_if = "Option::is_none")]
    u: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    identity: Option<IdentityResidual>,
    #[serde(skip_serializing_if = "Option::is_none")]
    membership_error: Option<String>,
}

fn freq(a: &crate::FreqArgs) -> Result<Report, CliError> {
    let pre = parse_digits(&a.pre)?;
    let digits = match &a.period {
        Some(p) => DigitString::periodic(a.s, pre, parse_digits(p)?)?,
        None => DigitString::finite(a.s, pre)?,
    };
    let profile = digit_frequencies(&digits, a.k)?;
    let (identity, membership_error) = match a.u {
        Some(u) => match structural_identity_residual(&digits, u, a.k) {
            Ok(r) => (Some(r), None),
            Err(e @ sadic::Error::NotAMember { .. }) => (None, Some(e.to_string())),
            Err(e) => return Err(e.into()),
        },
        None => (None, None),
    };
    json("freq", FreqOut { digits, profile, u: a.u, identity, membership_error })
}

#[derive(Serialize)]
struct NormalOut {
    #[serde(flatten)]
    verdict: NormalityVerdict,
    #[serde(with = "sadic::rational::json")]
    ergodic_zero_frequency: Rational,
    #[serde(skip_serializing_if = "Option::is_none")]
    dimension_bounds: Option<NormalityBounds>,
}

fn normal(s: u32) -> Result<Report, CliError> {
    let verdict = normal_candidate_exists(s)?;
    let dimension_bounds = verdict.exists.then(normality_dimension_bounds);
    let ergodic_zero_frequency = sadic::normality::ergodic_zero_frequency(s)?;
    json("normal", NormalOut { verdict, ergodic_zero_frequency, dimension_bounds })
}

fn reproduce(a: &crate::ReproduceArgs, as_json: bool) -> Result<Report, CliError> {
    if a.box_tol.is_nan() || a.box_tol <= 0.0 {
        return Err(CliError::Domain(format!("box tolerance must be positive, got {}", a.box_tol)));
    }
    let only = a.only.as_deref().map(str::parse::<Group>).transpose()?;
    let cfg = ReproduceConfig { seed: a.seed, box_tolerance: a.box_tol, only, enforce_time: !a.no_time_limits };
    let report = reproduce_all(&cfg)?;
    let failed: Vec<String> = report.criteria.iter().filter(|c| !c.passed).map(|c| c.id.to_string()).collect();
    let text = if as_json {
        json("reproduce", &report)?.text
    } else {
        let mut t = String::new();
        for c in &report.criteria {
            let _ = writeln!(t, "{}", c.line());
            for f in &c.failures {
                let _ = writeln!(t, "    {f}");
            }
        }
        t
    };
    let failure = (!failed.is_empty()).then(|| format!("criteria failed: {}", failed.join(", ")));
    Ok(Report { text, failure })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digit_lists() {
        assert_eq!(parse_digits("").unwrap(), Vec::<u32>::new());
        assert_eq!(parse_digits("102").unwrap(), vec![1, 0, 2]);
        assert_eq!(parse_digits("1, 12,3").unwrap(), vec![1, 12, 3]);
        assert!(parse_digits("1a").is_err());
    }

    #[test]
    fn scale_lists() {
        assert_eq!(parse_scales("4..7").unwrap(), vec![4, 5, 6, 7]);
        assert_eq!(parse_scales("4..=5").unwrap(), vec![4, 5]);
        assert_eq!(parse_scales("4,6").unwrap(), vec![4, 6]);
        assert!(parse_scales("7..4").is_err());
        assert!(parse_scales("x").is_err());
    }
}
