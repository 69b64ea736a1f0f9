//! Deterministic allocation mechanisms for indivisible goods.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::model::{Allocation, ModelError, OrdinalReport, Profile};
use crate::scalar::Scalar;
use crate::welfare::{compare_welfare, WelfareFn};

/// Default bound on exhaustive enumerations (`n^m` allocations).
pub const DEFAULT_ENUM_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MechanismError {
    #[error("exhaustive search over {agents}^{items} allocations exceeds cap {cap}")]
    TooLarge {
        agents: usize,
        items: usize,
        cap: u64,
    },
    #[error("mechanism `{0}` needs cardinal values, not ordinal reports")]
    NotOrdinal(String),
    #[error("mechanism needs exactly {expected} agents, got {got}")]
    AgentCount { expected: usize, got: usize },
    #[error("reports disagree on the number of items")]
    ItemMismatch,
    #[error("at least one agent and one item required")]
    Empty,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `n^m`, saturating.
pub fn allocation_count(agents: usize, items: usize) -> u64 {
    (agents as u64)
        .checked_pow(items as u32)
        .unwrap_or(u64::MAX)
}

pub(crate) fn check_cap(agents: usize, items: usize, cap: u64) -> Result<(), MechanismError> {
    if allocation_count(agents, items) > cap {
        return Err(MechanismError::TooLarge { agents, items, cap });
    }
    Ok(())
}

fn report_items(reports: &[OrdinalReport]) -> Result<usize, MechanismError> {
    let m = reports.first().ok_or(MechanismError::Empty)?.items();
    if reports.iter().any(|r| r.items() != m) {
        return Err(MechanismError::ItemMismatch);
    }
    Ok(m)
}

/// Round-robin where an agent passes once every item she values positively
/// is gone. Items nobody values are dealt round-robin from agent 1 at the
/// end, in increasing item order.
pub fn rr_pass(reports: &[OrdinalReport]) -> Result<Allocation, MechanismError> {
    let m = report_items(reports)?;
    let n = reports.len();
    let mut owner = vec![usize::MAX; m];
    let mut cursor = vec![0usize; n];
    let mut left = m;
    while left > 0 {
        let mut progressed = false;
        for (i, report) in reports.iter().enumerate() {
            let positives = report.positive_items();
            while cursor[i] < positives.len() && owner[positives[cursor[i]]] != usize::MAX {
                cursor[i] += 1;
            }
            if let Some(&item) = positives.get(cursor[i]) {
                owner[item] = i;
                left -= 1;
                progressed = true;
                if left == 0 {
                    break;
                }
            }
        }
        if !progressed {
            break;
        }
    }
    let leftovers: Vec<usize> = (0..m).filter(|&j| owner[j] == usize::MAX).collect();
    for (k, j) in leftovers.into_iter().enumerate() {
        owner[j] = k % n;
    }
    Ok(Allocation::from_owner_unchecked(owner))
}

fn check_order(order: &[usize], n: usize) -> Result<(), MechanismError> {
    OrdinalReport::new(order.to_vec(), 0)
        .ok()
        .filter(|_| order.len() == n)
        .map(|_| ())
        .ok_or(MechanismError::Model(ModelError::NotAPermutation(n)))
}

fn serial_dictatorship_on(
    positive: impl Fn(usize, usize) -> bool,
    n: usize,
    m: usize,
    order: &[usize],
) -> Result<Allocation, MechanismError> {
    check_order(order, n)?;
    let last = *order.last().ok_or(MechanismError::Empty)?;
    let owner = (0..m)
        .map(|j| {
            order
                .iter()
                .copied()
                .find(|&i| positive(i, j))
                .unwrap_or(last)
        })
        .collect();
    Ok(Allocation::from_owner_unchecked(owner))
}

/// Each agent in `order` takes every remaining item she values positively;
/// items valued by nobody go to the last agent in `order`.
pub fn serial_dictatorship<T: Scalar>(
    profile: &Profile<T>,
    order: &[usize],
) -> Result<Allocation, MechanismError> {
    serial_dictatorship_on(
        |i, j| *profile.value(i, j) > T::zero(),
        profile.agents(),
        profile.items(),
        order,
    )
}

/// Exhaustive welfare maximization; ties go to the lexicographically
/// smallest owner vector.
pub fn welfare_max<T: Scalar>(
    profile: &Profile<T>,
    w: &WelfareFn,
    cap: u64,
) -> Result<Allocation, MechanismError> {
    let (n, m) = (profile.agents(), profile.items());
    check_cap(n, m, cap)?;
    let mut best: Option<(Vec<usize>, Vec<T>)> = None;
    for owner in OwnerVectors::new(n, m) {
        let alloc = Allocation::from_owner_unchecked(owner);
        let u = profile.utilities(&alloc);
        let better = match &best {
            None => true,
            Some((_, bu)) => compare_welfare(w, &u, bu) == Ordering::Greater,
        };
        if better {
            best = Some((alloc.owners().to_vec(), u));
        }
    }
    let (owner, _) = best.ok_or(MechanismError::Empty)?;
    Ok(Allocation::from_owner_unchecked(owner))
}

/// Two agents: agent 2 receives agent 1's least favorite item (last in
/// agent 1's tie-broken order), agent 1 receives the rest.
pub fn pass_least_favorite<T: Scalar>(profile: &Profile<T>) -> Result<Allocation, MechanismError> {
    if profile.agents() != 2 {
        return Err(MechanismError::AgentCount {
            expected: 2,
            got: profile.agents(),
        });
    }
    pass_least_favorite_reports(&profile.reports())
}

fn pass_least_favorite_reports(reports: &[OrdinalReport]) -> Result<Allocation, MechanismError> {
    if reports.len() != 2 {
        return Err(MechanismError::AgentCount {
            expected: 2,
            got: reports.len(),
        });
    }
    let m = report_items(reports)?;
    let worst = reports[0].least_favorite().ok_or(MechanismError::Empty)?;
    let owner = (0..m).map(|j| usize::from(j == worst)).collect();
    Ok(Allocation::from_owner_unchecked(owner))
}

/// Owner vectors in lexicographic order (item 0 most significant).
#[derive(Debug, Clone)]
pub struct OwnerVectors {
    agents: usize,
    next: Option<Vec<usize>>,
}

impl OwnerVectors {
    pub fn new(agents: usize, items: usize) -> Self {
        let next = (agents > 0).then(|| vec![0; items]);
        Self { agents, next }
    }
}

impl Iterator for OwnerVectors {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut k = succ.len();
        while k > 0 {
            k -= 1;
            succ[k] += 1;
            if succ[k] < self.agents {
                self.next = Some(succ);
                return Some(current);
            }
            succ[k] = 0;
        }
        Some(current)
    }
}

/// Dispatch handle for the mechanisms above.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MechanismId {
    RrPass,
    /// 0-indexed priority order.
    SerialDictatorship(Vec<usize>),
    WelfareMax(WelfareFn),
    PassLeastFavorite,
}

impl MechanismId {
    /// Whether the outcome is a function of the agents' ordinal reports.
    pub fn is_ordinal(&self) -> bool {
        !matches!(self, MechanismId::WelfareMax(_))
    }

    pub fn run<T: Scalar>(
        &self,
        profile: &Profile<T>,
        cap: u64,
    ) -> Result<Allocation, MechanismError> {
        match self {
            MechanismId::RrPass => rr_pass(&profile.reports()),
            MechanismId::SerialDictatorship(order) => serial_dictatorship(profile, order),
            MechanismId::WelfareMax(w) => welfare_max(profile, w, cap),
            MechanismId::PassLeastFavorite => pass_least_favorite(profile),
        }
    }

    /// Runs an ordinal mechanism on `(order, positive_count)` reports.
    pub fn run_reports(&self, reports: &[OrdinalReport]) -> Result<Allocation, MechanismError> {
        match self {
            MechanismId::RrPass => rr_pass(reports),
            MechanismId::SerialDictatorship(order) => {
                let m = report_items(reports)?;
                serial_dictatorship_on(|i, j| reports[i].is_positive(j), reports.len(), m, order)
            }
            MechanismId::PassLeastFavorite => pass_least_favorite_reports(reports),
            MechanismId::WelfareMax(_) => Err(MechanismError::NotOrdinal(self.to_string())),
        }
    }
}

impl fmt::Display for MechanismId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MechanismId::RrPass => write!(f, "rr-pass"),
            MechanismId::SerialDictatorship(order) => {
                let order: Vec<String> = order.iter().map(|i| (i + 1).to_string()).collect();
                write!(f, "serial-dictatorship:{}", order.join(","))
            }
            MechanismId::WelfareMax(w) => write!(f, "welfare-max:{w}"),
            MechanismId::PassLeastFavorite => write!(f, "pass-least-favorite"),
        }
    }
}

impl FromStr for MechanismId {
    type Err = String;

    /// `rr-pass`, `serial-dictatorship:2,1` (1-indexed order),
    /// `welfare-max:nash`, `welfare-max:p-mean=1/2`, `pass-least-favorite`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, arg) = s.split_once(':').map_or((s, None), |(h, a)| (h, Some(a)));
        match (head, arg) {
            ("rr-pass", None) => Ok(MechanismId::RrPass),
            ("pass-least-favorite", None) => Ok(MechanismId::PassLeastFavorite),
            ("serial-dictatorship" | "sd", Some(order)) => {
                let order = order
                    .split(',')
                    .map(|t| match t.trim().parse::<usize>() {
                        Ok(k) if k >= 1 => Ok(k - 1),
                        _ => Err(format!("bad agent index `{t}`")),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(MechanismId::SerialDictatorship(order))
            }
            ("welfare-max", Some(w)) => w.parse().map(MechanismId::WelfareMax),
            _ => Err(format!("unknown mechanism `{s}`")),
        }
    }
}
