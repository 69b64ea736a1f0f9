//! Exhaustive efficiency checks.
//!
//! The search visits owner vectors in lexicographic order (item 1 most
//! significant, agents ascending) and returns the first dominating one, so
//! the witness is the same one a plain scan of all `n^m` allocations finds.
//! Branches that can no longer weakly dominate are cut early.

use super::dominance::{compare_prefixes, relevant_len, Dominance, DominanceMode};
use super::{AuditError, AuditReport, Predicate, Witness};
use crate::mechanisms::{check_cap, OwnerVectors};
use crate::model::{Allocation, OrdinalReport, Profile};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EfficiencyCriterion {
    Pareto,
    Sd,
    SdPlus,
}

impl EfficiencyCriterion {
    pub fn predicate(self) -> Predicate {
        match self {
            EfficiencyCriterion::Pareto => Predicate::Pareto,
            EfficiencyCriterion::Sd => Predicate::Sd,
            EfficiencyCriterion::SdPlus => Predicate::SdPlus,
        }
    }

    fn mode(self) -> Option<DominanceMode> {
        match self {
            EfficiencyCriterion::Pareto => None,
            EfficiencyCriterion::Sd => Some(DominanceMode::Sd),
            EfficiencyCriterion::SdPlus => Some(DominanceMode::SdPlus),
        }
    }
}

/// Whether `y` dominates `x` under `criterion`.
pub fn allocation_dominates<T: Scalar>(
    profile: &Profile<T>,
    y: &Allocation,
    x: &Allocation,
    criterion: EfficiencyCriterion,
) -> bool {
    let n = profile.agents();
    match criterion.mode() {
        None => {
            let (uy, ux) = (profile.utilities(y), profile.utilities(x));
            uy.iter().zip(&ux).all(|(a, b)| a >= b) && uy.iter().zip(&ux).any(|(a, b)| a > b)
        }
        Some(mode) => {
            let mut strict = false;
            for i in 0..n {
                let report = crate::model::preference_order(profile.row(i));
                let order = &report.order()[..relevant_len(&report, mode)];
                match compare_prefixes(order, |j| y.owner(j) == i, |j| x.owner(j) == i) {
                    Dominance::Incomparable => return false,
                    Dominance::Strict => strict = true,
                    Dominance::Weak => {}
                }
            }
            strict
        }
    }
}

/// Reference scan over all `n^m` allocations, without pruning.
pub fn exhaustive_witness<T: Scalar>(
    profile: &Profile<T>,
    x: &Allocation,
    criterion: EfficiencyCriterion,
    cap: u64,
) -> Result<Option<Allocation>, AuditError> {
    x.check_against(profile)?;
    check_cap(profile.agents(), profile.items(), cap)?;
    Ok(OwnerVectors::new(profile.agents(), profile.items())
        .map(Allocation::from_owner_unchecked)
        .find(|y| allocation_dominates(profile, y, x, criterion)))
}

/// Exhaustive efficiency check; the witness is the first dominating
/// allocation in owner-vector order.
pub fn is_efficient<T: Scalar>(
    profile: &Profile<T>,
    x: &Allocation,
    criterion: EfficiencyCriterion,
    cap: u64,
) -> Result<AuditReport<T>, AuditError> {
    x.check_against(profile)?;
    check_cap(profile.agents(), profile.items(), cap)?;
    let mut search = Search::new(profile, x, criterion);
    let predicate = criterion.predicate();
    Ok(match search.run() {
        Some(y) => {
            let utilities = profile.utilities(&y);
            AuditReport::fail(
                predicate,
                Witness::Allocation {
                    allocation: y,
                    utilities,
                },
            )
        }
        None => AuditReport::pass(predicate),
    })
}

const FREE: usize = usize::MAX;

struct Search<'a, T> {
    profile: &'a Profile<T>,
    x: &'a Allocation,
    criterion: EfficiencyCriterion,
    /// Relevant prefix of each agent's order (dominance criteria only).
    orders: Vec<Vec<usize>>,
    /// `need[i][l]`: items of `x_i` among agent i's top `l + 1`.
    need: Vec<Vec<usize>>,
    /// Pareto bookkeeping.
    target: Vec<T>,
    owner: Vec<usize>,
}

impl<'a, T: Scalar> Search<'a, T> {
    fn new(profile: &'a Profile<T>, x: &'a Allocation, criterion: EfficiencyCriterion) -> Self {
        let n = profile.agents();
        let (mut orders, mut need) = (Vec::new(), Vec::new());
        if let Some(mode) = criterion.mode() {
            for i in 0..n {
                let report: OrdinalReport = crate::model::preference_order(profile.row(i));
                let order = report.order()[..relevant_len(&report, mode)].to_vec();
                let mut acc = 0;
                need.push(
                    order
                        .iter()
                        .map(|&j| {
                            acc += usize::from(x.owner(j) == i);
                            acc
                        })
                        .collect(),
                );
                orders.push(order);
            }
        }
        Self {
            profile,
            x,
            criterion,
            orders,
            need,
            target: profile.utilities(x),
            owner: vec![FREE; profile.items()],
        }
    }

    fn run(&mut self) -> Option<Allocation> {
        self.descend(0)
    }

    fn descend(&mut self, item: usize) -> Option<Allocation> {
        if item == self.owner.len() {
            let y = Allocation::from_owner_unchecked(self.owner.clone());
            return allocation_dominates(self.profile, &y, self.x, self.criterion).then_some(y);
        }
        for agent in 0..self.profile.agents() {
            self.owner[item] = agent;
            if self.feasible() {
                if let Some(y) = self.descend(item + 1) {
                    self.owner[item] = FREE;
                    return Some(y);
                }
            }
        }
        self.owner[item] = FREE;
        None
    }

    /// Can the current partial assignment still be completed into an
    /// allocation that weakly dominates `x`?
    fn feasible(&self) -> bool {
        match self.criterion.mode() {
            Some(_) => self
                .orders
                .iter()
                .zip(&self.need)
                .enumerate()
                .all(|(i, (order, need))| {
                    let mut reachable = 0;
                    order.iter().zip(need).all(|(&j, &k)| {
                        let o = self.owner[j];
                        reachable += usize::from(o == i || o == FREE);
                        reachable >= k
                    })
                }),
            None => (0..self.profile.agents()).all(|i| {
                let row = self.profile.row(i);
                let best = self
                    .owner
                    .iter()
                    .zip(row)
                    .filter(|(&o, _)| o == i || o == FREE)
                    .fold(T::zero(), |acc, (_, v)| acc + v.clone());
                best >= self.target[i]
            }),
        }
    }
}
