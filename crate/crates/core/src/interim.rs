//! Exact Bayesian analysis of ordinal mechanisms when every opponent's
//! preference order is uniform and independent (and all items are
//! positively valued by opponents).

use std::collections::HashMap;

use itertools::Itertools;
use num_traits::Zero;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::audits::{is_efficient, EfficiencyCriterion};
use crate::mechanisms::{MechanismError, MechanismId, DEFAULT_ENUM_CAP};
use crate::model::{preference_order, Allocation, ModelError, OrdinalReport, Profile};
use crate::rational::int;
use crate::Rational;

/// Default bound on mechanism evaluations per enumeration.
pub const DEFAULT_EVAL_CAP: u64 = 100_000_000;

/// Default node budget for [`characterization_search`].
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterimError {
    #[error("enumeration needs {evaluations} mechanism runs, above cap {cap}")]
    TooLarge { evaluations: u64, cap: u64 },
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("agent {agent} out of range for {agents} agents")]
    AgentOutOfRange { agent: usize, agents: usize },
    #[error("interim allocation is not positional: reports {first:?} and {second:?} differ at rank {rank}")]
    NotPositional {
        first: OrdinalReport,
        second: OrdinalReport,
        rank: usize,
    },
    #[error("{0}")]
    BadInput(String),
}

fn factorial(m: usize) -> u64 {
    (1..=m as u64)
        .try_fold(1u64, |acc, k| acc.checked_mul(k))
        .unwrap_or(u64::MAX)
}

fn saturating_pow(base: u64, exp: usize) -> u64 {
    (0..exp).fold(1u64, |acc, _| acc.saturating_mul(base))
}

/// All `m!·(m+1)` ordinal reports: permutations in lexicographic order,
/// positive counts ascending within each.
pub fn all_reports(m: usize) -> Vec<OrdinalReport> {
    (0..m)
        .permutations(m)
        .flat_map(|p| {
            (0..=m).map(move |k| OrdinalReport::new(p.clone(), k).expect("valid permutation"))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterimTable {
    pub agent: usize,
    pub report: OrdinalReport,
    /// `q[j]`: probability that the agent receives item `j`.
    pub q: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionalInterim {
    pub agent: usize,
    /// `q_pos[l]`: probability of receiving the item she ranks `l + 1`.
    pub q_pos: Vec<Rational>,
}

/// Non-increasing check.
pub fn check_monotone(qp: &PositionalInterim) -> bool {
    qp.q_pos.windows(2).all(|w| w[0] >= w[1])
}

struct Enumeration<'a> {
    mech: &'a MechanismId,
    agent: usize,
    n: usize,
    m: usize,
    perms: Vec<OrdinalReport>,
}

impl<'a> Enumeration<'a> {
    /// Fails before materializing anything if `reports` reports over all
    /// opponent profiles would exceed `cap` runs.
    fn new(
        mech: &'a MechanismId,
        agent: usize,
        n: usize,
        m: usize,
        reports: u64,
        cap: u64,
    ) -> Result<Self, InterimError> {
        if !mech.is_ordinal() {
            return Err(MechanismError::NotOrdinal(mech.to_string()).into());
        }
        if agent >= n {
            return Err(InterimError::AgentOutOfRange { agent, agents: n });
        }
        if m == 0 || m > 32 {
            return Err(InterimError::BadInput(format!(
                "item count {m} outside 1..=32"
            )));
        }
        let evaluations = saturating_pow(factorial(m), n - 1).saturating_mul(reports);
        if evaluations > cap {
            return Err(InterimError::TooLarge { evaluations, cap });
        }
        let perms = (0..m)
            .permutations(m)
            .map(|p| OrdinalReport::full(p).expect("permutation"))
            .collect();
        Ok(Self {
            mech,
            agent,
            n,
            m,
            perms,
        })
    }

    fn opponent_profiles(&self) -> u64 {
        saturating_pow(self.perms.len() as u64, self.n - 1)
    }

    /// Items the agent receives, as a bitmask, for every opponent profile.
    /// Opponent profile `code` is read in base `m!`, lowest digit first.
    fn masks(&self, report: &OrdinalReport) -> Result<Vec<u32>, InterimError> {
        if report.items() != self.m {
            return Err(InterimError::BadInput(
                "report has the wrong number of items".into(),
            ));
        }
        let base = self.perms.len() as u64;
        let mut reports = vec![report.clone(); self.n];
        (0..self.opponent_profiles())
            .map(|code| {
                let mut c = code;
                for (o, slot) in reports.iter_mut().enumerate() {
                    if o != self.agent {
                        *slot = self.perms[(c % base) as usize].clone();
                        c /= base;
                    }
                }
                let alloc = self.mech.run_reports(&reports)?;
                Ok((0..self.m)
                    .filter(|&j| alloc.owner(j) == self.agent)
                    .fold(0u32, |acc, j| acc | 1 << j))
            })
            .collect()
    }

    fn table(&self, report: &OrdinalReport, masks: &[u32]) -> InterimTable {
        let total = int(masks.len() as i64);
        let q = (0..self.m)
            .map(|j| int(masks.iter().filter(|&&mask| mask >> j & 1 == 1).count() as i64) / &total)
            .collect();
        InterimTable {
            agent: self.agent,
            report: report.clone(),
            q,
        }
    }
}

/// Interim allocation of one report, averaged over all `(m!)^(n-1)`
/// opponent order profiles.
pub fn interim_allocation(
    mech: &MechanismId,
    agent: usize,
    report: &OrdinalReport,
    n: usize,
    m: usize,
    cap: u64,
) -> Result<InterimTable, InterimError> {
    let e = Enumeration::new(mech, agent, n, m, 1, cap)?;
    let masks = e.masks(report)?;
    Ok(e.table(report, &masks))
}

/// A demotion that turned an item the agent did not get into one she gets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotonicityViolation {
    pub report: OrdinalReport,
    pub demoted: OrdinalReport,
    pub item: usize,
    pub opponent_profile: u64,
}

/// Per-report outcomes for one agent over every opponent profile; the
/// shared cache behind the positional, monotonicity and BIC checks.
pub struct ReportTable {
    agent: usize,
    n: usize,
    m: usize,
    reports: Vec<OrdinalReport>,
    index: HashMap<OrdinalReport, usize>,
    masks: Vec<Vec<u32>>,
}

impl ReportTable {
    pub fn build(
        mech: &MechanismId,
        agent: usize,
        n: usize,
        m: usize,
        cap: u64,
    ) -> Result<Self, InterimError> {
        let count = factorial(m).saturating_mul(m as u64 + 1);
        let e = Enumeration::new(mech, agent, n, m, count, cap)?;
        let reports = all_reports(m);
        let masks = reports
            .par_iter()
            .map(|r| e.masks(r))
            .collect::<Result<Vec<_>, _>>()?;
        let index = reports
            .iter()
            .cloned()
            .enumerate()
            .map(|(k, r)| (r, k))
            .collect();
        Ok(Self {
            agent,
            n,
            m,
            reports,
            index,
            masks,
        })
    }

    pub fn agents(&self) -> usize {
        self.n
    }

    pub fn reports(&self) -> &[OrdinalReport] {
        &self.reports
    }

    pub fn interim(&self, report: &OrdinalReport) -> Option<InterimTable> {
        let k = *self.index.get(report)?;
        let total = int(self.masks[k].len() as i64);
        let q = (0..self.m)
            .map(|j| {
                int(self.masks[k]
                    .iter()
                    .filter(|&&mask| mask >> j & 1 == 1)
                    .count() as i64)
                    / &total
            })
            .collect();
        Some(InterimTable {
            agent: self.agent,
            report: report.clone(),
            q,
        })
    }

    /// Expected utility of reporting `report` when the true values are
    /// `values`.
    pub fn expected_utility(
        &self,
        report: &OrdinalReport,
        values: &[Rational],
    ) -> Option<Rational> {
        let t = self.interim(report)?;
        Some(t.q.iter().zip(values).map(|(q, v)| q * v).sum())
    }

    /// Verifies that `q` depends only on rank (and vanishes past the
    /// positive count), returning the common positional vector.
    pub fn positional(&self) -> Result<PositionalInterim, InterimError> {
        let base = OrdinalReport::full((0..self.m).collect())?;
        let q_pos = self.interim(&base).expect("full report present").q;
        for r in &self.reports {
            let q = self.interim(r).expect("enumerated").q;
            for (l, &j) in r.order().iter().enumerate() {
                let expected = if l < r.positive_count() {
                    q_pos[l].clone()
                } else {
                    Rational::zero()
                };
                if q[j] != expected {
                    return Err(InterimError::NotPositional {
                        first: base,
                        second: r.clone(),
                        rank: l + 1,
                    });
                }
            }
        }
        Ok(PositionalInterim {
            agent: self.agent,
            q_pos,
        })
    }

    /// Swapping the items at ranks `l` and `l + 1` never makes the demoted
    /// item go from not received to received, for any opponent profile.
    pub fn elementary_monotonicity(&self) -> Option<MonotonicityViolation> {
        for (k, r) in self.reports.iter().enumerate() {
            for l in 0..self.m.saturating_sub(1) {
                let mut order = r.order().to_vec();
                order.swap(l, l + 1);
                let demoted = OrdinalReport::new(order, r.positive_count()).expect("permutation");
                let item = r.order()[l];
                let d = self.index[&demoted];
                let bad = self.masks[k]
                    .iter()
                    .zip(&self.masks[d])
                    .position(|(before, after)| before >> item & 1 == 0 && after >> item & 1 == 1);
                if let Some(code) = bad {
                    return Some(MonotonicityViolation {
                        report: r.clone(),
                        demoted,
                        item,
                        opponent_profile: code as u64,
                    });
                }
            }
        }
        None
    }
}

pub fn positional_interim(
    mech: &MechanismId,
    agent: usize,
    n: usize,
    m: usize,
    cap: u64,
) -> Result<PositionalInterim, InterimError> {
    ReportTable::build(mech, agent, n, m, cap)?.positional()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BicAuditResult {
    pub agent: usize,
    pub truthful_report: OrdinalReport,
    pub truthful: Rational,
    /// Best report other than the truthful one (first on ties).
    pub best_deviation: OrdinalReport,
    pub best_deviation_value: Rational,
    pub verdict: bool,
}

fn report_json(r: &OrdinalReport) -> Value {
    json!({
        "order": r.order().iter().map(|j| j + 1).collect::<Vec<_>>(),
        "positive_count": r.positive_count(),
    })
}

impl BicAuditResult {
    pub fn to_json(&self) -> Value {
        json!({
            "predicate": "bic",
            "verdict": self.verdict,
            "agent": self.agent + 1,
            "truthful_report": report_json(&self.truthful_report),
            "truthful_utility": self.truthful.to_string(),
            "best_deviation": report_json(&self.best_deviation),
            "best_deviation_utility": self.best_deviation_value.to_string(),
        })
    }
}

/// Compares the truthful expected utility against every ordinal report.
pub fn bic_audit_exact(
    mech: &MechanismId,
    agent: usize,
    values: &[Rational],
    n: usize,
    m: usize,
    cap: u64,
) -> Result<BicAuditResult, InterimError> {
    if values.len() != m {
        return Err(InterimError::BadInput(format!(
            "expected {m} values, got {}",
            values.len()
        )));
    }
    let table = ReportTable::build(mech, agent, n, m, cap)?;
    Ok(bic_from_table(&table, values))
}

pub fn bic_from_table(table: &ReportTable, values: &[Rational]) -> BicAuditResult {
    let truthful_report = preference_order(values);
    let truthful = table
        .expected_utility(&truthful_report, values)
        .expect("all reports enumerated");
    let mut best: Option<(OrdinalReport, Rational)> = None;
    for r in table.reports() {
        if *r == truthful_report {
            continue;
        }
        let u = table.expected_utility(r, values).expect("enumerated");
        if best.as_ref().is_none_or(|(_, b)| u > *b) {
            best = Some((r.clone(), u));
        }
    }
    let (best_deviation, best_deviation_value) =
        best.unwrap_or_else(|| (truthful_report.clone(), truthful.clone()));
    BicAuditResult {
        agent: table.agent,
        verdict: truthful >= best_deviation_value,
        truthful_report,
        truthful,
        best_deviation,
        best_deviation_value,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DsicViolation {
    pub profile: Profile<Rational>,
    pub agent: usize,
    pub deviation: Vec<Rational>,
    pub truthful_utility: Rational,
    pub deviating_utility: Rational,
}

/// Every profile over `grid` and every unilateral misreport within `grid`
/// that strictly helps the deviator.
pub fn dsic_audit_grid(
    mech: &MechanismId,
    grid: &[Rational],
    n: usize,
    m: usize,
    cap: u64,
) -> Result<Vec<DsicViolation>, InterimError> {
    let g = grid.len();
    if g == 0 || n == 0 || m == 0 {
        return Err(InterimError::BadInput("empty grid or instance".into()));
    }
    if grid.iter().any(|v| v < &Rational::zero()) {
        return Err(InterimError::BadInput(
            "grid values must be nonnegative".into(),
        ));
    }
    let cells = n * m;
    let profiles = saturating_pow(g as u64, cells);
    if profiles > cap {
        return Err(InterimError::TooLarge {
            evaluations: profiles,
            cap,
        });
    }
    let decode = |code: u64| -> Vec<usize> {
        let mut c = code;
        (0..cells)
            .map(|_| {
                let d = (c % g as u64) as usize;
                c /= g as u64;
                d
            })
            .collect()
    };
    let build = |digits: &[usize]| -> Profile<Rational> {
        Profile::new(
            digits
                .chunks(m)
                .map(|row| row.iter().map(|&d| grid[d].clone()).collect())
                .collect(),
        )
        .expect("grid values are nonnegative")
    };
    let outcomes: Vec<Allocation> = (0..profiles)
        .into_par_iter()
        .map(|code| mech.run(&build(&decode(code)), DEFAULT_ENUM_CAP))
        .collect::<Result<_, _>>()?;
    let row_codes = saturating_pow(g as u64, m);
    let stride = |i: usize| saturating_pow(g as u64, i * m);
    let mut violations = Vec::new();
    for code in 0..profiles {
        let digits = decode(code);
        let truth = build(&digits);
        for i in 0..n {
            let own = (code / stride(i)) % row_codes;
            let values = truth.row(i);
            let honest = crate::model::alloc_utility(values, &outcomes[code as usize], i);
            for dev in 0..row_codes {
                if dev == own {
                    continue;
                }
                let alt = code - own * stride(i) + dev * stride(i);
                let u = crate::model::alloc_utility(values, &outcomes[alt as usize], i);
                if u > honest {
                    let dev_digits = decode(alt);
                    violations.push(DsicViolation {
                        profile: truth.clone(),
                        agent: i,
                        deviation: dev_digits[i * m..(i + 1) * m]
                            .iter()
                            .map(|&d| grid[d].clone())
                            .collect(),
                        truthful_utility: honest.clone(),
                        deviating_utility: u,
                    });
                }
            }
        }
    }
    Ok(violations)
}

/// Deterministic two-agent mechanism on `{0,x,y}^m` profiles, listed with
/// agent 1's row as the high digit.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismTable {
    pub profiles: Vec<Profile<Rational>>,
    pub outcomes: Vec<Allocation>,
}

impl MechanismTable {
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.profiles
                .iter()
                .zip(&self.outcomes)
                .map(|(p, a)| {
                    json!({
                        "values": p.rows().iter().map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
                        "owners": a.owners().iter().map(|o| o + 1).collect::<Vec<_>>(),
                    })
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CharacterizationOutcome {
    /// Every surviving mechanism is a serial dictatorship.
    Verified,
    /// A surviving mechanism that is not a serial dictatorship.
    Counterexample(MechanismTable),
    /// Node budget exhausted before the search finished.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacterizationReport {
    pub items: usize,
    pub criterion: EfficiencyCriterion,
    /// Whether allocations of items nobody values were fixed to agent 1.
    pub canonical_zero_items: bool,
    pub survivors: u64,
    pub nodes: u64,
    pub outcome: CharacterizationOutcome,
}

impl CharacterizationReport {
    pub fn to_json(&self) -> Value {
        let (status, counterexample) = match &self.outcome {
            CharacterizationOutcome::Verified => ("verified", Value::Null),
            CharacterizationOutcome::Counterexample(t) => ("counterexample", t.to_json()),
            CharacterizationOutcome::Inconclusive => ("inconclusive", Value::Null),
        };
        json!({
            "items": self.items,
            "criterion": self.criterion.predicate().name(),
            "canonical_zero_items": self.canonical_zero_items,
            "survivors": self.survivors,
            "nodes": self.nodes,
            "outcome": status,
            "counterexample": counterexample,
        })
    }
}

/// Search settings for [`characterization_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct CharacterizationConfig {
    pub items: usize,
    pub x: Rational,
    pub y: Rational,
    pub criterion: EfficiencyCriterion,
    /// Fix the owner of items both agents value at zero to agent 1.
    pub canonical_zero_items: bool,
    pub node_budget: u64,
}

impl CharacterizationConfig {
    pub fn new(items: usize) -> Self {
        Self {
            items,
            x: int(1),
            y: int(2),
            criterion: EfficiencyCriterion::SdPlus,
            canonical_zero_items: items > 1,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

/// Precomputed instance data shared by both search strategies.
struct Space {
    m: usize,
    rows: Vec<Vec<Rational>>,
    /// `util[k][r][c]`: agent `k`'s value for her bundle under owner code
    /// `c` when her row is `rows[r]`.
    util: [Vec<Vec<Rational>>; 2],
    /// Allowed owner codes per profile `a * R + b`.
    domains: Vec<u32>,
}

impl Space {
    fn new(cfg: &CharacterizationConfig) -> Result<Self, InterimError> {
        let m = cfg.items;
        if !(1..=3).contains(&m) {
            return Err(InterimError::BadInput(format!(
                "characterization search supports 1..=3 items, got {m}"
            )));
        }
        if !(cfg.x > Rational::zero() && cfg.y > cfg.x) {
            return Err(InterimError::BadInput("need y > x > 0".into()));
        }
        if cfg.criterion == EfficiencyCriterion::Pareto {
            return Err(InterimError::BadInput(
                "criterion must be sd or sd-plus".into(),
            ));
        }
        let levels = [Rational::zero(), cfg.x.clone(), cfg.y.clone()];
        let rows: Vec<Vec<Rational>> = (0..m)
            .map(|_| levels.iter().cloned())
            .multi_cartesian_product()
            .collect();
        let codes = 1usize << m;
        let owners = |c: usize| -> Vec<usize> { (0..m).map(|j| c >> j & 1).collect() };
        let util: [Vec<Vec<Rational>>; 2] = std::array::from_fn(|k| {
            rows.iter()
                .map(|r| {
                    (0..codes)
                        .map(|c| {
                            owners(c)
                                .iter()
                                .zip(r)
                                .filter(|(&o, _)| o == k)
                                .map(|(_, v)| v.clone())
                                .sum()
                        })
                        .collect()
                })
                .collect()
        });
        let mut domains = Vec::with_capacity(rows.len() * rows.len());
        for a in &rows {
            for b in &rows {
                let profile = Profile::new(vec![a.clone(), b.clone()])?;
                let mut mask = 0u32;
                for c in 0..codes {
                    let o = owners(c);
                    let zero_item_moved =
                        (0..m).any(|j| a[j].is_zero() && b[j].is_zero() && o[j] != 0);
                    if cfg.canonical_zero_items && zero_item_moved {
                        continue;
                    }
                    let alloc = Allocation::new(o, 2)?;
                    let eff = is_efficient(&profile, &alloc, cfg.criterion, DEFAULT_ENUM_CAP)
                        .map_err(|e| InterimError::BadInput(e.to_string()))?;
                    if eff.verdict {
                        mask |= 1 << c;
                    }
                }
                domains.push(mask);
            }
        }
        Ok(Self {
            m,
            rows,
            util,
            domains,
        })
    }

    fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// Profiles differing from `p` in exactly one agent's row.
    fn neighbors(&self, p: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let r = self.row_count();
        let (a, b) = (p / r, p % r);
        let first = (0..r)
            .filter(move |&a2| a2 != a)
            .map(move |a2| (0, a2 * r + b));
        let second = (0..r)
            .filter(move |&b2| b2 != b)
            .map(move |b2| (1, a * r + b2));
        first.chain(second)
    }

    fn row_of(&self, p: usize, agent: usize) -> usize {
        if agent == 0 {
            p / self.row_count()
        } else {
            p % self.row_count()
        }
    }

    /// Neither side of the pair gains by reporting the other's row.
    fn compatible(&self, agent: usize, p: usize, cp: usize, q: usize, cq: usize) -> bool {
        let u = &self.util[agent];
        let (rp, rq) = (self.row_of(p, agent), self.row_of(q, agent));
        u[rp][cp] >= u[rp][cq] && u[rq][cq] >= u[rq][cp]
    }

    fn is_dictatorial(&self, table: &[usize]) -> bool {
        let r = self.row_count();
        [(0usize, 1usize), (1, 0)].into_iter().any(|(d1, d2)| {
            table.iter().enumerate().all(|(p, &c)| {
                let rows = [&self.rows[p / r], &self.rows[p % r]];
                (0..self.m).all(|j| {
                    let owner = c >> j & 1;
                    if rows[d1][j] > Rational::zero() {
                        owner == d1
                    } else if rows[d2][j] > Rational::zero() {
                        owner == d2
                    } else {
                        true
                    }
                })
            })
        })
    }

    fn is_dsic(&self, table: &[usize]) -> bool {
        (0..table.len()).all(|p| {
            self.neighbors(p)
                .all(|(k, q)| self.compatible(k, p, table[p], q, table[q]))
        })
    }

    fn table(&self, codes: &[usize]) -> MechanismTable {
        let r = self.row_count();
        let profiles = (0..codes.len())
            .map(|p| {
                Profile::new(vec![self.rows[p / r].clone(), self.rows[p % r].clone()])
                    .expect("valid")
            })
            .collect();
        let outcomes = codes
            .iter()
            .map(|&c| Allocation::new((0..self.m).map(|j| c >> j & 1).collect(), 2).expect("valid"))
            .collect();
        MechanismTable { profiles, outcomes }
    }
}

/// Searches all deterministic two-agent mechanisms on `{0,x,y}^m` that are
/// DSIC and efficient under `criterion`, checking each survivor is a serial
/// dictatorship on positively valued items. One item is enumerated table by
/// table; more items use backtracking with forward checking.
pub fn characterization_search(
    cfg: &CharacterizationConfig,
) -> Result<CharacterizationReport, InterimError> {
    let space = Space::new(cfg)?;
    let (survivors, nodes, outcome) = if cfg.items == 1 && !cfg.canonical_zero_items {
        exhaustive_tables(&space, cfg.node_budget)
    } else {
        Backtracker::new(&space, cfg.node_budget).run()
    };
    Ok(CharacterizationReport {
        items: cfg.items,
        criterion: cfg.criterion,
        canonical_zero_items: cfg.canonical_zero_items,
        survivors,
        nodes,
        outcome,
    })
}

fn exhaustive_tables(space: &Space, budget: u64) -> (u64, u64, CharacterizationOutcome) {
    let profiles = space.domains.len();
    let total = 1u64 << profiles; // one item: owner bit per profile
    let mut survivors = 0;
    for (nodes, code) in (0..total).enumerate() {
        if nodes as u64 >= budget {
            return (
                survivors,
                nodes as u64,
                CharacterizationOutcome::Inconclusive,
            );
        }
        let table: Vec<usize> = (0..profiles).map(|p| (code >> p & 1) as usize).collect();
        let efficient = table
            .iter()
            .zip(&space.domains)
            .all(|(&c, &d)| d >> c & 1 == 1);
        if !efficient || !space.is_dsic(&table) {
            continue;
        }
        survivors += 1;
        if !space.is_dictatorial(&table) {
            return (
                survivors,
                nodes as u64 + 1,
                CharacterizationOutcome::Counterexample(space.table(&table)),
            );
        }
    }
    (survivors, total, CharacterizationOutcome::Verified)
}

struct Backtracker<'a> {
    space: &'a Space,
    budget: u64,
    nodes: u64,
    survivors: u64,
    assigned: Vec<Option<usize>>,
    counterexample: Option<Vec<usize>>,
}

impl<'a> Backtracker<'a> {
    fn new(space: &'a Space, budget: u64) -> Self {
        Self {
            space,
            budget,
            nodes: 0,
            survivors: 0,
            assigned: vec![None; space.domains.len()],
            counterexample: None,
        }
    }

    fn run(mut self) -> (u64, u64, CharacterizationOutcome) {
        let domains = self.space.domains.clone();
        let finished = self.search(domains);
        let outcome = match (self.counterexample.take(), finished) {
            (Some(t), _) => CharacterizationOutcome::Counterexample(self.space.table(&t)),
            (None, true) => CharacterizationOutcome::Verified,
            (None, false) => CharacterizationOutcome::Inconclusive,
        };
        (self.survivors, self.nodes, outcome)
    }

    /// Returns false to abort (budget or counterexample).
    fn search(&mut self, domains: Vec<u32>) -> bool {
        // most constrained unassigned profile, lowest index on ties
        let next = (0..domains.len())
            .filter(|&p| self.assigned[p].is_none())
            .min_by_key(|&p| domains[p].count_ones());
        let Some(p) = next else {
            let table: Vec<usize> = self.assigned.iter().map(|c| c.expect("complete")).collect();
            debug_assert!(self.space.is_dsic(&table));
            self.survivors += 1;
            if !self.space.is_dictatorial(&table) {
                self.counterexample = Some(table);
                return false;
            }
            return true;
        };
        let mut options = domains[p];
        while options != 0 {
            let c = options.trailing_zeros() as usize;
            options &= options - 1;
            self.nodes += 1;
            if self.nodes > self.budget {
                return false;
            }
            let mut next = domains.clone();
            next[p] = 1 << c;
            let mut wiped = false;
            for (agent, q) in self.space.neighbors(p) {
                if self.assigned[q].is_some() {
                    continue;
                }
                let mut keep = 0u32;
                let mut rest = next[q];
                while rest != 0 {
                    let cq = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    if self.space.compatible(agent, p, c, q, cq) {
                        keep |= 1 << cq;
                    }
                }
                next[q] = keep;
                if keep == 0 {
                    wiped = true;
                    break;
                }
            }
            if wiped {
                continue;
            }
            self.assigned[p] = Some(c);
            let go_on = self.search(next);
            self.assigned[p] = None;
            if !go_on {
                return false;
            }
        }
        true
    }
}

/// Total interim probability mass over agents, for the row-sum identity.
pub fn interim_mass(tables: &[InterimTable]) -> Rational {
    tables
        .iter()
        .flat_map(|t| t.q.iter())
        .fold(Rational::zero(), |a, q| a + q)
}
