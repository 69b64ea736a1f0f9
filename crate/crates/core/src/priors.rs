//! Neutral priors, a chi-squared neutrality test and Monte Carlo incentive
//! audits for cardinal mechanisms.
//!
//! Sample `s` of a run with seed `seed` always comes from ChaCha stream `s`
//! of that seed, and partial sums are combined in a fixed chunk order, so
//! results do not depend on the number of worker threads.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::mechanisms::{MechanismError, MechanismId, DEFAULT_ENUM_CAP};
use crate::model::{alloc_utility, ModelError, Profile};
use crate::rational::parse_rational;
use crate::scalar::Scalar;
use crate::Rational;

/// Samples per parallel work unit.
const CHUNK: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PriorError {
    #[error("invalid prior: {0}")]
    Invalid(String),
    #[error("need at least {needed} samples for {items} items, got {got}")]
    TooFewSamples { needed: u64, got: u64, items: usize },
    #[error("neutrality test supports 2..=6 items, got {0}")]
    UnsupportedItems(usize),
    #[error("no critical value for significance {0}; use 0.1, 0.05, 0.01 or 0.001")]
    UnsupportedAlpha(f64),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Marginal {
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum PriorSpec {
    /// Every value drawn independently from the same marginal.
    Iid(Marginal),
    /// Uniform on the probability simplex.
    Simplex,
    /// Item `j` uniform on its own interval.
    PerItem(Vec<(f64, f64)>),
    /// Uniformly random order; the item ranked `r` gets `(m - r + 1) / m`.
    OrderUniform,
}

impl PriorSpec {
    pub fn validate(&self, m: usize) -> Result<(), PriorError> {
        let interval = |a: f64, b: f64| {
            if a.is_finite() && b.is_finite() && a >= 0.0 && a < b {
                Ok(())
            } else {
                Err(PriorError::Invalid(format!(
                    "interval ({a},{b}) needs 0 <= a < b"
                )))
            }
        };
        if m == 0 {
            return Err(PriorError::Invalid("need at least one item".into()));
        }
        match self {
            PriorSpec::Iid(Marginal::Uniform { a, b }) => interval(*a, *b),
            PriorSpec::Iid(Marginal::Exponential { rate })
                if !(rate.is_finite() && *rate > 0.0) =>
            {
                Err(PriorError::Invalid(format!(
                    "exponential rate {rate} must be positive"
                )))
            }
            PriorSpec::PerItem(iv) if iv.len() != m => Err(PriorError::Invalid(format!(
                "{} intervals for {m} items",
                iv.len()
            ))),
            PriorSpec::PerItem(iv) => iv.iter().try_for_each(|&(a, b)| interval(a, b)),
            _ => Ok(()),
        }
    }

    /// Priors that are neutral by construction.
    pub fn is_declared_neutral(&self) -> bool {
        !matches!(self, PriorSpec::PerItem(_))
    }
}

impl fmt::Display for PriorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriorSpec::Iid(Marginal::Uniform { a, b }) => write!(f, "iid-uniform:{a},{b}"),
            PriorSpec::Iid(Marginal::Exponential { rate }) => write!(f, "iid-exp:{rate}"),
            PriorSpec::Simplex => write!(f, "simplex"),
            PriorSpec::PerItem(iv) => {
                let parts: Vec<String> = iv.iter().map(|(a, b)| format!("{a},{b}")).collect();
                write!(f, "per-item:{}", parts.join(";"))
            }
            PriorSpec::OrderUniform => write!(f, "order-uniform"),
        }
    }
}

fn number(text: &str) -> Result<f64, String> {
    parse_rational(text.trim())
        .map(|r| r.approx_f64())
        .map_err(|e| e.to_string())
}

fn pair(text: &str) -> Result<(f64, f64), String> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| format!("expected `a,b`, got `{text}`"))?;
    Ok((number(a)?, number(b)?))
}

impl FromStr for PriorSpec {
    type Err = String;

    /// `simplex`, `order-uniform`, `iid-uniform:a,b`, `iid-exp:rate`,
    /// `per-item:a1,b1;a2,b2;...` (bounds may be fractions).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, arg) = s.split_once(':').map_or((s, None), |(h, a)| (h, Some(a)));
        match (head, arg) {
            ("simplex", None) => Ok(PriorSpec::Simplex),
            ("order-uniform", None) => Ok(PriorSpec::OrderUniform),
            ("iid-uniform", None) => Ok(PriorSpec::Iid(Marginal::Uniform { a: 0.0, b: 1.0 })),
            ("iid-uniform", Some(ab)) => {
                pair(ab).map(|(a, b)| PriorSpec::Iid(Marginal::Uniform { a, b }))
            }
            ("iid-exp", rate) => Ok(PriorSpec::Iid(Marginal::Exponential {
                rate: rate.map_or(Ok(1.0), number)?,
            })),
            ("per-item", Some(list)) => list
                .split(';')
                .map(pair)
                .collect::<Result<_, _>>()
                .map(PriorSpec::PerItem),
            _ => Err(format!("unknown prior `{s}`")),
        }
    }
}

/// Generator for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One valuation row in floating point.
pub fn sample_f64<R: Rng + ?Sized>(prior: &PriorSpec, m: usize, rng: &mut R) -> Vec<f64> {
    match prior {
        PriorSpec::Iid(Marginal::Uniform { a, b }) => {
            (0..m).map(|_| rng.random_range(*a..*b)).collect()
        }
        PriorSpec::Iid(Marginal::Exponential { rate }) => {
            let exp = Exp::new(*rate).expect("validated rate");
            (0..m).map(|_| exp.sample(rng)).collect()
        }
        PriorSpec::Simplex => {
            let mut cuts: Vec<f64> = (0..m - 1).map(|_| rng.random::<f64>()).collect();
            cuts.sort_by(f64::total_cmp);
            let mut prev = 0.0;
            let mut out = Vec::with_capacity(m);
            for c in cuts.into_iter().chain(std::iter::once(1.0)) {
                out.push(c - prev);
                prev = c;
            }
            out
        }
        PriorSpec::PerItem(iv) => iv.iter().map(|&(a, b)| rng.random_range(a..b)).collect(),
        PriorSpec::OrderUniform => {
            let mut ranks: Vec<usize> = (0..m).collect();
            for k in (1..m).rev() {
                ranks.swap(k, rng.random_range(0..=k));
            }
            ranks.iter().map(|&r| (m - r) as f64 / m as f64).collect()
        }
    }
}

/// Sample `index` of the run seeded with `seed`, converted exactly to
/// rationals.
pub fn sample_valuation(prior: &PriorSpec, m: usize, seed: u64, index: u64) -> Vec<Rational> {
    let mut rng = sample_rng(seed, index);
    to_rationals(&sample_f64(prior, m, &mut rng))
}

fn to_rationals(xs: &[f64]) -> Vec<Rational> {
    xs.iter()
        .map(|x| x.to_rational().expect("samples are finite"))
        .collect()
}

/// Upper-tail chi-squared critical values for `m!-1` degrees of freedom.
fn chi2_critical(df: usize, alpha: f64) -> Option<f64> {
    const ALPHAS: [f64; 4] = [0.10, 0.05, 0.01, 0.001];
    let row: [f64; 4] = match df {
        1 => [2.7055, 3.8415, 6.6349, 10.8276],
        5 => [9.2364, 11.0705, 15.0863, 20.5150],
        23 => [32.0069, 35.1725, 41.6384, 49.7282],
        119 => [139.1495, 145.4607, 157.7995, 172.4177],
        719 => [768.0058, 782.4906, 810.1471, 841.9052],
        _ => return None,
    };
    ALPHAS
        .iter()
        .position(|a| (a - alpha).abs() < 1e-12)
        .map(|k| row[k])
}

/// Index of the strict order of `v` (decreasing) among all `m!` orders,
/// or `None` if two values tie.
fn order_index(v: &[f64]) -> Option<usize> {
    let m = v.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| v[b].total_cmp(&v[a]));
    if order.windows(2).any(|w| v[w[0]] == v[w[1]]) {
        return None;
    }
    // Lehmer code
    let mut idx = 0;
    for k in 0..m {
        let smaller = order[k + 1..].iter().filter(|&&x| x < order[k]).count();
        idx = idx * (m - k) + smaller;
    }
    Some(idx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeutralityResult {
    pub statistic: f64,
    pub df: usize,
    pub critical: f64,
    pub alpha: f64,
    pub samples: u64,
    /// Samples with two equal values, left out of the tally.
    pub ties: u64,
    pub pass: bool,
}

impl NeutralityResult {
    pub fn to_json(&self) -> Value {
        json!({
            "predicate": "neutrality",
            "verdict": self.pass,
            "statistic": self.statistic,
            "df": self.df,
            "critical": self.critical,
            "alpha": self.alpha,
            "samples": self.samples,
            "ties": self.ties,
        })
    }
}

/// Chi-squared goodness of fit of the sampled preference orders against
/// the uniform distribution on all `m!` orders.
pub fn neutrality_test(
    prior: &PriorSpec,
    m: usize,
    samples: u64,
    alpha: f64,
    seed: u64,
) -> Result<NeutralityResult, PriorError> {
    prior.validate(m)?;
    if !(2..=6).contains(&m) {
        return Err(PriorError::UnsupportedItems(m));
    }
    let cells: usize = (1..=m).product();
    let df = cells - 1;
    let critical = chi2_critical(df, alpha).ok_or(PriorError::UnsupportedAlpha(alpha))?;
    let needed = cells as u64 * 20;
    if samples < needed {
        return Err(PriorError::TooFewSamples {
            needed,
            got: samples,
            items: m,
        });
    }
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(Vec<u64>, u64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut counts = vec![0u64; cells];
            let mut ties = 0;
            for s in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                let v = sample_f64(prior, m, &mut sample_rng(seed, s));
                match order_index(&v) {
                    Some(k) => counts[k] += 1,
                    None => ties += 1,
                }
            }
            (counts, ties)
        })
        .collect();
    let mut counts = vec![0u64; cells];
    let mut ties = 0;
    for (c, t) in partial {
        for (acc, x) in counts.iter_mut().zip(c) {
            *acc += x;
        }
        ties += t;
    }
    let counted = samples - ties;
    let expected = counted as f64 / cells as f64;
    let statistic = if counted == 0 {
        f64::INFINITY
    } else {
        counts
            .iter()
            .map(|&o| (o as f64 - expected).powi(2) / expected)
            .sum()
    };
    Ok(NeutralityResult {
        statistic,
        df,
        critical,
        alpha,
        samples,
        ties,
        pass: statistic <= critical,
    })
}

/// Monte Carlo estimate of one deviation's expected gain.
#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub agent: usize,
    pub truth: Vec<Rational>,
    pub deviation: Vec<Rational>,
    /// Mean of `u(deviation) - u(truth)`; positive means misreporting pays.
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
    pub prior: String,
    pub mechanism: String,
}

impl McReport {
    pub fn to_json(&self) -> Value {
        let rats = |v: &[Rational]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        json!({
            "mechanism": self.mechanism,
            "prior": self.prior,
            "agent": self.agent + 1,
            "truth": rats(&self.truth),
            "deviation": rats(&self.deviation),
            "estimate": self.estimate,
            "std_error": self.std_error,
            "samples": self.samples,
            "seed": self.seed,
        })
    }

    pub fn csv_header() -> [&'static str; 9] {
        [
            "mechanism",
            "prior",
            "agent",
            "truth",
            "deviation",
            "estimate",
            "std_error",
            "samples",
            "seed",
        ]
    }

    pub fn csv_record(&self) -> [String; 9] {
        let rats = |v: &[Rational]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        [
            self.mechanism.clone(),
            self.prior.clone(),
            (self.agent + 1).to_string(),
            rats(&self.truth),
            rats(&self.deviation),
            format!("{:e}", self.estimate),
            format!("{:e}", self.std_error),
            self.samples.to_string(),
            self.seed.to_string(),
        ]
    }

    /// How many standard errors the estimate lies above zero.
    pub fn z_score(&self) -> f64 {
        self.estimate / self.std_error
    }
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if other.count == 0 {
            return self;
        }
        if self.count == 0 {
            return other;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + d * other.count as f64 / count as f64,
            m2: self.m2
                + other.m2
                + d * d * (self.count as f64 * other.count as f64) / count as f64,
        }
    }

    fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        (self.m2 / (self.count - 1) as f64).sqrt() / (self.count as f64).sqrt()
    }
}

/// Settings shared by every deviation in [`bic_audit_mc`].
#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub agents: usize,
    pub prior: PriorSpec,
    pub samples: u64,
    pub seed: u64,
}

/// Estimates each deviation's gain over truthful reporting. Every sample
/// draws the opponents once and evaluates all arms on them.
pub fn bic_audit_mc(
    mech: &MechanismId,
    agent: usize,
    truth: &[Rational],
    deviations: &[Vec<Rational>],
    cfg: &McConfig,
) -> Result<Vec<McReport>, PriorError> {
    let m = truth.len();
    let n = cfg.agents;
    cfg.prior.validate(m)?;
    if agent >= n {
        return Err(PriorError::Invalid(format!(
            "agent {} out of range for {n} agents",
            agent + 1
        )));
    }
    if deviations.iter().any(|d| d.len() != m) {
        return Err(PriorError::Invalid(
            "deviation length differs from the item count".into(),
        ));
    }
    if cfg.samples == 0 {
        return Err(PriorError::Invalid("need at least one sample".into()));
    }
    let run = |row: &[Rational], others: &[Vec<Rational>]| -> Result<Rational, PriorError> {
        let mut rows = others.to_vec();
        rows.insert(agent, row.to_vec());
        let profile = Profile::new(rows)?;
        let alloc = mech.run(&profile, DEFAULT_ENUM_CAP)?;
        Ok(alloc_utility(truth, &alloc, agent))
    };
    let chunks = cfg.samples.div_ceil(CHUNK);
    let partial: Vec<Vec<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![Moments::default(); deviations.len()];
            for s in c * CHUNK..((c + 1) * CHUNK).min(cfg.samples) {
                let mut rng = sample_rng(cfg.seed, s);
                let others: Vec<Vec<Rational>> = (1..n)
                    .map(|_| to_rationals(&sample_f64(&cfg.prior, m, &mut rng)))
                    .collect();
                let honest = run(truth, &others)?;
                for (d, slot) in deviations.iter().zip(acc.iter_mut()) {
                    let gain = if d.as_slice() == truth {
                        Rational::default()
                    } else {
                        run(d, &others)? - &honest
                    };
                    slot.push(gain.approx_f64());
                }
            }
            Ok(acc)
        })
        .collect::<Result<_, PriorError>>()?;
    let mut totals = vec![Moments::default(); deviations.len()];
    for chunk in partial {
        for (t, x) in totals.iter_mut().zip(chunk) {
            *t = t.merge(x);
        }
    }
    Ok(deviations
        .iter()
        .zip(totals)
        .map(|(d, mo)| McReport {
            agent,
            truth: truth.to_vec(),
            deviation: d.clone(),
            estimate: mo.mean,
            std_error: mo.std_error(),
            samples: mo.count,
            seed: cfg.seed,
            prior: cfg.prior.to_string(),
            mechanism: mech.to_string(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::welfare::WelfareFn;

    #[test]
    fn simplex_rows_sum_to_one() {
        let mut rng = sample_rng(7, 0);
        for m in 1..6 {
            let v = sample_f64(&PriorSpec::Simplex, m, &mut rng);
            assert_eq!(v.len(), m);
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(v.iter().all(|&x| x >= 0.0));
        }
        let v = sample_f64(&PriorSpec::Simplex, 2, &mut rng);
        assert_eq!(v[0] + v[1], 1.0);
    }

    #[test]
    fn per_item_values_stay_in_range() {
        let p: PriorSpec = "per-item:0,1;1/2,3/4".parse().unwrap();
        for s in 0..200 {
            let v = sample_f64(&p, 2, &mut sample_rng(1, s));
            assert!((0.0..1.0).contains(&v[0]) && (0.5..0.75).contains(&v[1]));
        }
    }

    #[test]
    fn order_uniform_rows_are_rank_scores() {
        let v = sample_f64(&PriorSpec::OrderUniform, 4, &mut sample_rng(3, 9));
        let mut sorted = v.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(sorted, vec![1.0, 0.75, 0.5, 0.25]);
    }

    #[test]
    fn prior_strings_round_trip() {
        for s in [
            "simplex",
            "order-uniform",
            "iid-uniform:0,1",
            "iid-exp:2",
            "per-item:0,1;0.5,0.75",
        ] {
            let p: PriorSpec = s.parse().unwrap();
            assert_eq!(p.to_string().parse::<PriorSpec>().unwrap(), p);
        }
        assert!("gaussian".parse::<PriorSpec>().is_err());
        assert!(PriorSpec::PerItem(vec![(1.0, 0.5)]).validate(1).is_err());
    }

    #[test]
    fn lehmer_index_is_a_bijection() {
        let mut seen = std::collections::HashSet::new();
        for p in itertools::Itertools::permutations(0..4usize, 4) {
            let v: Vec<f64> = p.iter().map(|&x| x as f64).collect();
            assert!(seen.insert(order_index(&v).unwrap()));
        }
        assert_eq!(seen.len(), 24);
        assert!(seen.iter().all(|&k| k < 24));
        assert_eq!(order_index(&[1.0, 1.0, 0.0]), None);
    }

    #[test]
    fn neutrality_examples() {
        let r = neutrality_test(&PriorSpec::Simplex, 2, 100_000, 0.01, 11).unwrap();
        assert!(r.pass, "{r:?}");
        let r = neutrality_test(&"per-item:0,1;2,3".parse().unwrap(), 2, 10_000, 0.01, 11).unwrap();
        assert!(!r.pass);
        // P(v1 > v2) = 1 - E[v2] = 3/8, so this prior is not neutral
        let prior: PriorSpec = "per-item:0,1;1/2,3/4".parse().unwrap();
        let r = neutrality_test(&prior, 2, 100_000, 0.01, 11).unwrap();
        assert!(!r.pass);
        let above = (0..100_000u64)
            .filter(|&s| {
                let v = sample_f64(&prior, 2, &mut sample_rng(11, s));
                v[0] > v[1]
            })
            .count() as f64
            / 100_000.0;
        assert!((above - 0.375).abs() < 0.005, "{above}");
        assert!(matches!(
            neutrality_test(&PriorSpec::Simplex, 3, 119, 0.01, 0),
            Err(PriorError::TooFewSamples { needed: 120, .. })
        ));
        assert!(matches!(
            neutrality_test(&PriorSpec::Simplex, 3, 1000, 0.2, 0),
            Err(PriorError::UnsupportedAlpha(_))
        ));
    }

    #[test]
    fn welfare_deviation_pays() {
        let truth = vec![ratio(3, 5), ratio(2, 5)];
        let dev = vec![ratio(7, 10), ratio(3, 10)];
        let cfg = McConfig {
            agents: 2,
            prior: PriorSpec::Simplex,
            samples: 20_000,
            seed: 5,
        };
        let r = bic_audit_mc(
            &MechanismId::WelfareMax(WelfareFn::Nash),
            0,
            &truth,
            &[dev, truth.clone()],
            &cfg,
        )
        .unwrap();
        assert!(
            (r[0].estimate - 0.02).abs() < 4.0 * r[0].std_error,
            "{:?}",
            r[0]
        );
        assert_eq!((r[1].estimate, r[1].std_error), (0.0, 0.0));
    }

    #[test]
    fn reports_are_deterministic() {
        let truth = vec![ratio(1, 2), ratio(1, 3), ratio(1, 6)];
        let dev = vec![ratio(1, 6), ratio(1, 2), ratio(1, 3)];
        let cfg = McConfig {
            agents: 3,
            prior: PriorSpec::Simplex,
            samples: 10_000,
            seed: 42,
        };
        let a = bic_audit_mc(
            &MechanismId::RrPass,
            1,
            &truth,
            std::slice::from_ref(&dev),
            &cfg,
        )
        .unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b =
            pool.install(|| bic_audit_mc(&MechanismId::RrPass, 1, &truth, &[dev], &cfg).unwrap());
        assert_eq!(a, b);
        assert_eq!(a[0].estimate.to_bits(), b[0].estimate.to_bits());
    }
}
