//! One function per subcommand. Each returns `Ok(false)` when it ran but
//! reports a failed check.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context};
use num_rational::BigRational;
use serde::Serialize;

use symrd::codec::{decode_container, encode_blocks, Codec, Container, HEADER_LEN};
use symrd::converse::{finite_n_lower_bound, ConverseConfig};
use symrd::exactdist::{ball_probability, BallMode, SpectrumBuilder};
use symrd::experiments::{
    redundancy_sweep, straightline_demo, verify_rows, StraightLineScheme, SweepOptions,
};
use symrd::ldbounds::sandwich;
use symrd::model::{PairFile, SymmetricPair};
use symrd::numeric::rational_to_f64;
use symrd::rdsolve::{distortion_grid, rate_distortion};

use crate::output::{self, Format};
use crate::{Cli, Command};

const LN_2: f64 = std::f64::consts::LN_2;

struct Loaded {
    pair: SymmetricPair,
    labels: Vec<String>,
}

fn load(path: Option<&Path>) -> anyhow::Result<Loaded> {
    match path {
        Some(p) => {
            let (file, pair) = symrd::model::read_pair_file(p)
                .with_context(|| format!("loading pair from {}", p.display()))?;
            Ok(Loaded {
                pair,
                labels: file.labels(),
            })
        }
        None => Ok(Loaded {
            pair: SymmetricPair::hamming(2).with_name("binary-hamming"),
            labels: vec!["0".into(), "1".into()],
        }),
    }
}

pub fn run(cli: &Cli) -> anyhow::Result<bool> {
    let fmt = |default| cli.out.unwrap_or(default);
    // verify-all must see invalid matrices, so it parses the file itself.
    if let Command::VerifyAll = cli.command {
        return verify_all(cli.pair.as_deref(), fmt(Format::Csv));
    }
    let loaded = load(cli.pair.as_deref())?;
    let pair = &loaded.pair;
    match &cli.command {
        Command::Validate => validate(pair, fmt(Format::Json)),
        Command::Rdcurve { points } => rdcurve(pair, *points, fmt(Format::Csv)),
        Command::Ballprob { point, exact, log } => {
            let mode = match (exact, log) {
                (true, _) => BallMode::Exact,
                (_, true) => BallMode::Log,
                _ => BallMode::Auto,
            };
            ballprob(pair, point.n, &point.d, mode, fmt(Format::Json))
        }
        Command::Ldbounds { point } => ldbounds(pair, point.n, &point.d, fmt(Format::Json)),
        Command::Encode {
            point,
            scheme,
            input,
            output,
        } => {
            let codec = Codec::new(pair, point.n, point.d.clone(), cli.seed, *scheme)?;
            encode(&codec, &loaded.labels, input, output, fmt(Format::Json))
        }
        Command::Decode { input, output } => decode(pair, &loaded.labels, input, output),
        Command::RedundancySweep { d, n_grid, trials } => {
            let opts = SweepOptions {
                trials: *trials,
                seed: cli.seed,
                ..SweepOptions::default()
            };
            let report = redundancy_sweep(pair, d, n_grid, &opts)?;
            match fmt(Format::Csv) {
                Format::Csv => output::rows(Format::Csv, &report.rows)?,
                Format::Json => output::record(Format::Json, &report)?,
            }
            Ok(true)
        }
        Command::ConverseBound {
            d,
            nmin,
            nmax,
            step,
            epsilon,
        } => converse(pair, d, *nmin, *nmax, *step, *epsilon, fmt(Format::Csv)),
        Command::StraightlineDemo {
            a,
            theta,
            n_grid,
            trials,
            encode_limit,
        } => {
            let scheme = StraightLineScheme::erasure_instance(a.clone(), *theta)?;
            let report = straightline_demo(&scheme, n_grid, *trials, cli.seed, *encode_limit)?;
            match fmt(Format::Csv) {
                Format::Csv => output::rows(Format::Csv, &report.rows)?,
                Format::Json => output::record(Format::Json, &report)?,
            }
            Ok(true)
        }
        Command::VerifyAll => unreachable!("handled above"),
    }
}

#[derive(Serialize)]
struct PairSummary {
    name: Option<String>,
    size: usize,
    /// Common denominator `Q`.
    scale: u64,
    d_star: String,
    d_star_value: f64,
    sigma2: String,
    sigma2_value: f64,
    d_max: String,
    d_max_value: f64,
}

fn validate(pair: &SymmetricPair, fmt: Format) -> anyhow::Result<bool> {
    output::record(
        fmt,
        &PairSummary {
            name: pair.name().map(str::to_owned),
            size: pair.size(),
            scale: pair.scale(),
            d_star: pair.d_star().to_string(),
            d_star_value: pair.d_star_f64(),
            sigma2: pair.sigma2().to_string(),
            sigma2_value: pair.sigma2_f64(),
            d_max: pair.d_max().to_string(),
            d_max_value: pair.d_max_f64(),
        },
    )?;
    Ok(true)
}

#[derive(Serialize)]
struct CurveRow {
    #[serde(rename = "D")]
    d: f64,
    #[serde(rename = "R_nats")]
    r_nats: f64,
    #[serde(rename = "R_bits")]
    r_bits: f64,
    lambda_star: f64,
    slope: f64,
}

fn rdcurve(pair: &SymmetricPair, points: usize, fmt: Format) -> anyhow::Result<bool> {
    let rows = distortion_grid(pair, points)
        .into_iter()
        .map(|d| {
            let p = rate_distortion(pair, d)?;
            Ok(CurveRow {
                d,
                r_nats: p.rate,
                r_bits: p.rate / LN_2,
                lambda_star: p.lambda_star,
                slope: p.slope,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    output::rows(fmt, &rows)?;
    Ok(true)
}

#[derive(Serialize)]
struct BallRecord {
    n: usize,
    #[serde(rename = "D")]
    d: String,
    prob_rational: Option<String>,
    log_prob_nats: f64,
    approx: bool,
}

fn ballprob(
    pair: &SymmetricPair,
    n: usize,
    d: &BigRational,
    mode: BallMode,
    fmt: Format,
) -> anyhow::Result<bool> {
    let b = ball_probability(pair, n, d, mode)?;
    output::record(
        fmt,
        &BallRecord {
            n,
            d: d.to_string(),
            prob_rational: b.prob.as_ref().map(ToString::to_string),
            log_prob_nats: b.log_prob,
            approx: b.approx,
        },
    )?;
    Ok(true)
}

#[derive(Serialize)]
struct LdRecord {
    n: usize,
    #[serde(rename = "D")]
    d: String,
    /// `None` below `n0`.
    lower: Option<f64>,
    upper: f64,
    exact: f64,
    log_lower_nats: Option<f64>,
    log_upper_nats: f64,
    log_exact_nats: f64,
    exact_is_approx: bool,
    n0: u64,
    eta_star: f64,
    #[serde(rename = "M_lower")]
    m_lower: f64,
    #[serde(rename = "M_upper")]
    m_upper: f64,
    #[serde(rename = "C_star")]
    c_star: f64,
}

fn ldbounds(pair: &SymmetricPair, n: usize, d: &BigRational, fmt: Format) -> anyhow::Result<bool> {
    let s = sandwich(pair, n, rational_to_f64(d))?;
    let b = ball_probability(pair, n, d, BallMode::Auto)?;
    let c = s.constants;
    output::record(
        fmt,
        &LdRecord {
            n,
            d: d.to_string(),
            lower: s.lower(),
            upper: s.upper(),
            exact: b.log_prob.exp(),
            log_lower_nats: s.log_lower,
            log_upper_nats: s.log_upper,
            log_exact_nats: b.log_prob,
            exact_is_approx: b.approx,
            n0: c.n0,
            eta_star: c.eta,
            m_lower: c.m_lower,
            m_upper: c.m_upper,
            c_star: c.c_star,
        },
    )?;
    Ok(true)
}

/// Symbol indices from text: whitespace-separated labels, or one run of
/// single-character labels.
fn parse_symbols(text: &str, labels: &[String]) -> anyhow::Result<Vec<usize>> {
    let lookup = |tok: &str| {
        labels
            .iter()
            .position(|l| l == tok)
            .with_context(|| format!("unknown symbol {tok:?}; alphabet is {labels:?}"))
    };
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let single_chars = labels.iter().all(|l| l.chars().count() == 1);
    if single_chars
        && tokens
            .iter()
            .all(|t| t.chars().count() > 1 || lookup(t).is_ok())
    {
        let mut out = Vec::new();
        for t in tokens {
            for ch in t.chars() {
                out.push(lookup(&ch.to_string())?);
            }
        }
        return Ok(out);
    }
    tokens.into_iter().map(lookup).collect()
}

fn format_symbols(symbols: &[usize], labels: &[String]) -> String {
    let sep = if labels.iter().all(|l| l.chars().count() == 1) {
        ""
    } else {
        " "
    };
    let mut s = symbols
        .iter()
        .map(|&i| labels[i].as_str())
        .collect::<Vec<_>>()
        .join(sep);
    s.push('\n');
    s
}

#[derive(Serialize)]
struct EncodeRecord {
    n: usize,
    #[serde(rename = "D")]
    d: String,
    scheme: String,
    blocks: usize,
    header_bytes: usize,
    payload_bits: usize,
    payload_bits_per_symbol: f64,
    payload_nats_per_symbol: f64,
    mean_index: f64,
    /// Largest per-block distortion, exact.
    max_block_distortion: String,
}

fn encode(
    codec: &Codec<'_>,
    labels: &[String],
    input: &Path,
    output_path: &Path,
    fmt: Format,
) -> anyhow::Result<bool> {
    let text =
        std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let source = parse_symbols(&text, labels)?;
    if source.is_empty() {
        bail!("input {} holds no symbols", input.display());
    }
    let (container, blocks) = encode_blocks(codec, &source)?;
    std::fs::write(output_path, container.to_bytes())
        .with_context(|| format!("writing {}", output_path.display()))?;
    let n = codec.n();
    let max_scaled = blocks
        .iter()
        .map(|b| b.distortion_scaled)
        .max()
        .unwrap_or(0);
    let nq = n as u64 * codec.pair().scale();
    let symbols = source.len() as f64;
    let bits = container.payload.len();
    output::record(
        fmt,
        &EncodeRecord {
            n,
            d: codec.radius().to_string(),
            scheme: codec.scheme().to_string(),
            blocks: blocks.len(),
            header_bytes: HEADER_LEN,
            payload_bits: bits,
            payload_bits_per_symbol: bits as f64 / symbols,
            payload_nats_per_symbol: bits as f64 * LN_2 / symbols,
            mean_index: blocks.iter().map(|b| b.index as f64).sum::<f64>() / blocks.len() as f64,
            max_block_distortion: BigRational::new(max_scaled.into(), nq.into()).to_string(),
        },
    )?;
    Ok(true)
}

fn decode(
    pair: &SymmetricPair,
    labels: &[String],
    input: &Path,
    output_path: &Path,
) -> anyhow::Result<bool> {
    let bytes = std::fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let container = Container::from_bytes(&bytes)?;
    let out = decode_container(pair, &container)?;
    std::fs::write(output_path, format_symbols(&out, labels))
        .with_context(|| format!("writing {}", output_path.display()))?;
    Ok(true)
}

#[derive(Serialize)]
struct ConverseRow {
    n: usize,
    lower_nats: f64,
    achievable_nats: f64,
    /// `n·(achievable - lower)/ln n`.
    normalized_gap: f64,
    trivial: bool,
}

fn converse(
    pair: &SymmetricPair,
    d: &BigRational,
    nmin: usize,
    nmax: usize,
    step: usize,
    epsilon: Option<f64>,
    fmt: Format,
) -> anyhow::Result<bool> {
    if nmin < 2 || nmax < nmin || step == 0 {
        bail!("need 2 <= nmin <= nmax and step >= 1");
    }
    let config = ConverseConfig::new(pair, rational_to_f64(d), epsilon)?;
    let mut builder = SpectrumBuilder::new(pair);
    let mut rows = Vec::new();
    for n in (nmin..=nmax).step_by(step) {
        while builder.current().n() < n {
            builder.step();
        }
        let spec = builder.current();
        let law =
            symrd::codec::IndexDistribution::from_exact(spec.ball_probability(spec.threshold(d)?));
        let achievable = law.expected_golomb_bits(&law.golomb_parameter()) * LN_2 / n as f64;
        let bound = finite_n_lower_bound(&config, n as u64);
        let nf = n as f64;
        rows.push(ConverseRow {
            n,
            lower_nats: bound.lower_rate_nats,
            achievable_nats: achievable,
            normalized_gap: (achievable - bound.lower_rate_nats) * nf / nf.ln(),
            trivial: bound.trivial,
        });
    }
    output::rows(fmt, &rows)?;
    Ok(true)
}

fn verify_all(path: Option<&Path>, fmt: Format) -> anyhow::Result<bool> {
    let rows = match path {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let file: PairFile =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
            file.rational_rows()?
        }
        None => SymmetricPair::hamming(2).matrix().entries().to_vec(),
    };
    let list = verify_rows(rows);
    match fmt {
        Format::Csv => {
            // Human-readable lines; use --out json for the structured form.
            std::io::stdout().write_all(list.to_string().as_bytes())?;
        }
        Format::Json => output::record(Format::Json, &list)?,
    }
    Ok(list.all_passed())
}
