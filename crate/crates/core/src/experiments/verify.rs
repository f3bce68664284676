//! One-shot checklist of the library's invariants on a given pair.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::sweep::roundtrips;
use crate::codec::{decode_container, encode_blocks, mix64, Codec, IndexDistribution, Scheme};
use crate::converse::{finite_n_lower_bound, ConverseConfig};
use crate::exactdist::{
    ball_smallest_oracle, conditional_tail_mean_of, OracleVerdict, SpectrumBuilder,
};
use crate::ldbounds::{rate_function, sandwich, tail_level};
use crate::model::{validate_pair, SymmetricPair};
use crate::numeric::rational_to_f64;
use crate::rdsolve::{blahut_arimoto_at_distortion, distortion_grid, rate_distortion, BaOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Not applicable at desk scale for this pair.
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub module: &'static str,
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Checklist {
    pub checks: Vec<Check>,
}

impl Checklist {
    /// True when nothing failed; skipped checks do not count against it.
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }
}

impl fmt::Display for Checklist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skip => "SKIP",
            };
            writeln!(f, "{tag} [{}] {}: {}", c.module, c.name, c.detail)?;
        }
        Ok(())
    }
}

/// Largest blocklength at which the exact large-deviation checks run.
const LD_MAX_N: u64 = 2048;
/// Consecutive blocklengths checked from `n0` on.
const LD_SPAN: u64 = 16;

fn check(module: &'static str, name: &'static str, ok: bool, detail: String) -> Check {
    let status = if ok { Status::Pass } else { Status::Fail };
    Check {
        module,
        name,
        status,
        detail,
    }
}

fn skip(module: &'static str, name: &'static str, detail: String) -> Check {
    Check {
        module,
        name,
        status: Status::Skip,
        detail,
    }
}

fn errored(module: &'static str, name: &'static str, e: impl fmt::Display) -> Check {
    check(module, name, false, format!("error: {e}"))
}

/// Validates `rows` and, if they form a symmetric pair, runs [`verify_all`].
/// A validation failure is reported as the only check.
pub fn verify_rows(rows: Vec<Vec<BigRational>>) -> Checklist {
    match validate_pair(rows) {
        Ok(pair) => verify_all(&pair),
        Err(e) => Checklist {
            checks: vec![errored("model", "pair validates", e)],
        },
    }
}

pub fn verify_all(pair: &SymmetricPair) -> Checklist {
    let checks = vec![
        check_model(pair),
        check_rate_identity(pair),
        check_blahut(pair),
        check_curve_shape(pair),
        check_spectrum_total(pair),
        check_ball_smallest(pair),
        check_sandwich_and_gibbs(pair),
        check_roundtrips(pair),
        check_container(pair),
        check_converse(pair),
    ];
    Checklist {
        checks: checks.into_iter().flatten().collect(),
    }
}

fn check_model(pair: &SymmetricPair) -> Vec<Check> {
    let m = pair.matrix();
    let k = pair.size();
    let col_mean = (0..k).fold(BigRational::zero(), |acc, x| acc + m.entry(x, 0))
        / BigRational::from_integer((k as i64).into());
    let second = (0..k).fold(BigRational::zero(), |acc, x| {
        acc + m.entry(x, 0) * m.entry(x, 0)
    }) / BigRational::from_integer((k as i64).into());
    let var = second - &col_mean * &col_mean;
    let zeros = (0..k).all(|x| (0..k).any(|y| m.entry(x, y).is_zero()));
    vec![check(
        "model",
        "D* is the column mean, sigma^2 > 0, rows contain a zero",
        &col_mean == pair.d_star() && &var == pair.sigma2() && var > BigRational::zero() && zeros,
        format!("D* = {}, sigma^2 = {}", pair.d_star(), pair.sigma2()),
    )]
}

fn check_rate_identity(pair: &SymmetricPair) -> Vec<Check> {
    let name = "rate function equals R_I on a 20-point grid within 1e-10";
    let mut worst: f64 = 0.0;
    for d in distortion_grid(pair, 20) {
        match (rate_function(pair, d), rate_distortion(pair, d)) {
            (Ok(l), Ok(r)) => worst = worst.max((l.lambda_star - r.rate).abs()),
            (Err(e), _) => return vec![errored("ldbounds", name, e)],
            (_, Err(e)) => return vec![errored("rdsolve", name, e)],
        }
    }
    vec![check(
        "rdsolve",
        name,
        worst <= 1e-10,
        format!("max gap {worst:.3e}"),
    )]
}

fn check_blahut(pair: &SymmetricPair) -> Vec<Check> {
    let name = "Blahut-Arimoto agrees with R_I within 1e-7";
    let k = pair.size();
    let source = vec![1.0 / k as f64; k];
    let m = pair.matrix().to_f64();
    let mut worst: f64 = 0.0;
    for d in distortion_grid(pair, 20) {
        let ba = match blahut_arimoto_at_distortion(&source, &m, d, &BaOptions::default()) {
            Ok(p) => p,
            Err(e) => return vec![errored("rdsolve", name, e)],
        };
        match rate_distortion(pair, d) {
            Ok(r) => worst = worst.max((ba.rate - r.rate).abs()),
            Err(e) => return vec![errored("rdsolve", name, e)],
        }
    }
    vec![check(
        "rdsolve",
        name,
        worst <= 1e-7,
        format!("max gap {worst:.3e}"),
    )]
}

fn check_curve_shape(pair: &SymmetricPair) -> Vec<Check> {
    let name = "R_I is decreasing and convex";
    let grid = distortion_grid(pair, 40);
    let rates: Result<Vec<f64>, _> = grid
        .iter()
        .map(|&d| rate_distortion(pair, d).map(|p| p.rate))
        .collect();
    let rates = match rates {
        Ok(r) => r,
        Err(e) => return vec![errored("rdsolve", name, e)],
    };
    let decreasing = rates.windows(2).all(|w| w[1] < w[0]);
    let convex = rates.windows(3).all(|w| w[0] - 2.0 * w[1] + w[2] >= -1e-12);
    vec![check(
        "rdsolve",
        name,
        decreasing && convex,
        format!("{} points", grid.len()),
    )]
}

fn check_spectrum_total(pair: &SymmetricPair) -> Vec<Check> {
    let n = 8;
    let mut b = SpectrumBuilder::new(pair);
    for _ in 0..n {
        b.step();
    }
    let total = b.current().total();
    let expected = num_bigint::BigUint::from(pair.size()).pow(n);
    vec![check(
        "exactdist",
        "distortion spectrum counts sum to |X|^n",
        total == expected,
        format!("n = {n}, total {total}"),
    )]
}

fn check_ball_smallest(pair: &SymmetricPair) -> Vec<Check> {
    let name = "no set with a ball's conditional distortion is more probable";
    // At most 2^9 - 1 subsets: the exhaustive check is exponential.
    let k = pair.size();
    let mut n = 0u32;
    while (k as u64).pow(n + 1) <= 9 {
        n += 1;
    }
    if n == 0 {
        return vec![skip(
            "exactdist",
            name,
            format!("|X| = {k} too large to enumerate"),
        )];
    }
    match ball_smallest_oracle(pair, n as usize) {
        Ok(r) => check_verdict(name, n, &r.verdict, r.subsets_checked),
        Err(e) => vec![errored("exactdist", name, e)],
    }
}

fn check_verdict(name: &'static str, n: u32, v: &OracleVerdict, subsets: u64) -> Vec<Check> {
    vec![check(
        "exactdist",
        name,
        *v == OracleVerdict::Holds,
        format!("n = {n}, {subsets} subsets, {v:?}"),
    )]
}

fn check_sandwich_and_gibbs(pair: &SymmetricPair) -> Vec<Check> {
    let sw = "exact ball probability lies in the sandwich";
    let gb = "conditional mean of the tail is within C*/n of its level";
    let d = pair.d_star() / BigRational::from_integer(2.into());
    let d_f = rational_to_f64(&d);
    let n0 = match sandwich(pair, 1, d_f) {
        Ok(s) => s.constants.n0,
        Err(e) => return vec![errored("ldbounds", sw, &e), errored("ldbounds", gb, &e)],
    };
    if n0 > LD_MAX_N {
        let why = format!("n0 = {n0} above {LD_MAX_N}");
        return vec![skip("ldbounds", sw, why.clone()), skip("ldbounds", gb, why)];
    }
    let mut b = SpectrumBuilder::new(pair);
    let (mut sw_bad, mut gb_bad, mut c_star) = (0, 0, 0.0);
    let c = -d.clone();
    for n in 1..n0 + LD_SPAN {
        b.step();
        if n < n0 {
            continue;
        }
        let spec = b.current();
        let s = match sandwich(pair, n as usize, d_f) {
            Ok(s) => s,
            Err(e) => return vec![errored("ldbounds", sw, e)],
        };
        c_star = s.constants.c_star;
        let t = match spec.threshold(&d) {
            Ok(t) => t,
            Err(e) => return vec![errored("ldbounds", sw, e)],
        };
        if !s.contains_log(spec.log_ball_probability(t)) {
            sw_bad += 1;
        }
        match conditional_tail_mean_of(spec, &c) {
            Ok(m) => {
                if rational_to_f64(&m) > tail_level(d_f) + c_star / n as f64 {
                    gb_bad += 1;
                }
            }
            Err(e) => return vec![errored("ldbounds", gb, e)],
        }
    }
    let range = format!("D = {d}, n in [{n0}, {})", n0 + LD_SPAN);
    vec![
        check(
            "ldbounds",
            sw,
            sw_bad == 0,
            format!("{range}, {sw_bad} violations"),
        ),
        check(
            "ldbounds",
            gb,
            gb_bad == 0,
            format!("{range}, C* = {c_star:.4e}, {gb_bad} violations"),
        ),
    ]
}

/// Largest `n ≤ 64` whose expected index at `d` stays within `limit`, so
/// the codebook search stays cheap.
fn codec_n(pair: &SymmetricPair, d: &BigRational, limit: f64) -> usize {
    let mut b = SpectrumBuilder::new(pair);
    let mut best = 1;
    for n in 1..=64usize {
        let spec = b.step();
        let Ok(t) = spec.threshold(d) else { break };
        if -spec.log_ball_probability(t) > limit.ln() {
            break;
        }
        best = n;
    }
    best
}

fn check_roundtrips(pair: &SymmetricPair) -> Vec<Check> {
    let name = "encode/decode roundtrips stay within the radius";
    let d = pair.d_star() / BigRational::from_integer(2.into());
    let n = codec_n(pair, &d, 1e3);
    [Scheme::Golomb, Scheme::EliasDelta]
        .into_iter()
        .map(
            |scheme| match roundtrips(pair, n, &d, scheme, 200, 0x5EED) {
                Ok(s) => check(
                    "codec",
                    name,
                    true,
                    format!(
                        "{scheme}, n = {n}, 200 trials, mean index {:.1}",
                        s.mean_index
                    ),
                ),
                Err(e) => errored("codec", name, e),
            },
        )
        .collect()
}

fn check_container(pair: &SymmetricPair) -> Vec<Check> {
    let name = "container roundtrip reproduces every block";
    let d = pair.d_star() / BigRational::from_integer(2.into());
    let n = codec_n(pair, &d, 1e3);
    let k = pair.size() as u64;
    let source: Vec<usize> = (0..3 * n as u64).map(|j| (mix64(j) % k) as usize).collect();
    let run = || -> Result<bool, crate::codec::CodecError> {
        let codec = Codec::new(pair, n, d.clone(), 11, Scheme::Golomb)?;
        let (container, blocks) = encode_blocks(&codec, &source)?;
        let parsed = crate::codec::Container::from_bytes(&container.to_bytes())?;
        let out = decode_container(pair, &parsed)?;
        let expected: Vec<usize> = blocks.iter().flat_map(|b| b.codeword.clone()).collect();
        Ok(out == expected)
    };
    match run() {
        Ok(ok) => vec![check("codec", name, ok, format!("3 blocks of n = {n}"))],
        Err(e) => vec![errored("codec", name, e)],
    }
}

fn check_converse(pair: &SymmetricPair) -> Vec<Check> {
    let name = "converse lower bound is below the exact Golomb rate";
    let d = pair.d_star() / BigRational::from_integer(2.into());
    let d_f = rational_to_f64(&d);
    let config = match ConverseConfig::new(pair, d_f, None) {
        Ok(c) => c,
        Err(e) => return vec![errored("converse", name, e)],
    };
    let mut b = SpectrumBuilder::new(pair);
    let mut bad = Vec::new();
    let grid = [16u64, 32, 64, 128, 256];
    for n in 1..=*grid.last().expect("nonempty") {
        let spec = b.step();
        if !grid.contains(&n) {
            continue;
        }
        let Ok(t) = spec.threshold(&d) else { continue };
        let p = spec.ball_probability(t);
        if p.is_one() {
            continue;
        }
        let law = IndexDistribution::from_exact(p);
        let achievable =
            law.expected_golomb_bits(&law.golomb_parameter()) * std::f64::consts::LN_2 / n as f64;
        if finite_n_lower_bound(&config, n).lower_rate_nats > achievable {
            bad.push(n);
        }
    }
    vec![check(
        "converse",
        name,
        bad.is_empty(),
        format!("n in {grid:?}, violations at {bad:?}"),
    )]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hamming_pairs_pass() {
        for k in [2, 3] {
            let list = verify_all(&SymmetricPair::hamming(k));
            assert!(list.all_passed(), "{list}");
            assert!(
                list.checks.iter().all(|c| c.status == Status::Pass),
                "{list}"
            );
        }
    }

    #[test]
    fn tampered_matrix_reports_validation() {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let list = verify_rows(vec![
            vec![r(0, 1), r(1, 1)],
            vec![r(1, 1), r(1, 1_000_000_000)],
        ]);
        assert_eq!(list.checks.len(), 1);
        assert_eq!(list.checks[0].status, Status::Fail);
        assert!(!list.all_passed());
    }
}
