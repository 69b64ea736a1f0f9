//! Valuation profiles, integral allocations, bundles and ordinal reports.
//!
//! Agents and items are 0-indexed here. Text formats and the CLI are
//! 1-indexed; conversion happens at the I/O boundary only.

use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("profile must have at least one agent")]
    NoAgents,
    #[error("agent {agent} has {got} values, expected {expected}")]
    Ragged {
        agent: usize,
        got: usize,
        expected: usize,
    },
    #[error("negative value for agent {agent}, item {item}")]
    NegativeValue { agent: usize, item: usize },
    #[error("item {item} assigned to agent {owner}, but there are only {agents} agents")]
    OwnerOutOfRange {
        item: usize,
        owner: usize,
        agents: usize,
    },
    #[error("allocation covers {got} items, profile has {expected}")]
    ItemCount { got: usize, expected: usize },
    #[error("order is not a permutation of {0} items")]
    NotAPermutation(usize),
    #[error("positive count {count} exceeds item count {items}")]
    PositiveCount { count: usize, items: usize },
    #[error("item {item} out of range for {items} items")]
    ItemOutOfRange { item: usize, items: usize },
}

/// Additive valuations `values[i][j] >= 0` of agent `i` for item `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile<T> {
    values: Vec<Vec<T>>,
    items: usize,
}

impl<T: Scalar> Profile<T> {
    pub fn new(values: Vec<Vec<T>>) -> Result<Self, ModelError> {
        let items = values.first().ok_or(ModelError::NoAgents)?.len();
        for (agent, row) in values.iter().enumerate() {
            if row.len() != items {
                return Err(ModelError::Ragged {
                    agent,
                    got: row.len(),
                    expected: items,
                });
            }
            if let Some(item) = row.iter().position(|v| *v < T::zero()) {
                return Err(ModelError::NegativeValue { agent, item });
            }
        }
        Ok(Self { values, items })
    }

    pub fn agents(&self) -> usize {
        self.values.len()
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn row(&self, agent: usize) -> &[T] {
        &self.values[agent]
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.values
    }

    pub fn value(&self, agent: usize, item: usize) -> &T {
        &self.values[agent][item]
    }

    /// Replaces one agent's row (unilateral deviation).
    pub fn with_row(&self, agent: usize, row: Vec<T>) -> Result<Self, ModelError> {
        let mut values = self.values.clone();
        values[agent] = row;
        Self::new(values)
    }

    pub fn reports(&self) -> Vec<OrdinalReport> {
        self.values
            .iter()
            .map(|row| preference_order(row))
            .collect()
    }

    pub fn utilities(&self, alloc: &Allocation) -> Vec<T> {
        (0..self.agents())
            .map(|i| alloc_utility(self.row(i), alloc, i))
            .collect()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Profile<U> {
        Profile {
            values: self
                .values
                .iter()
                .map(|r| r.iter().map(&f).collect())
                .collect(),
            items: self.items,
        }
    }
}

/// A set of item indices, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Bundle(Vec<usize>);

impl Bundle {
    pub fn new(mut items: Vec<usize>) -> Self {
        items.sort_unstable();
        items.dedup();
        Bundle(items)
    }

    pub fn empty() -> Self {
        Bundle(Vec::new())
    }

    pub fn checked(items: Vec<usize>, m: usize) -> Result<Self, ModelError> {
        if let Some(&item) = items.iter().find(|&&j| j >= m) {
            return Err(ModelError::ItemOutOfRange { item, items: m });
        }
        Ok(Self::new(items))
    }

    pub fn items(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, item: usize) -> bool {
        self.0.binary_search(&item).is_ok()
    }

    pub fn without(&self, item: usize) -> Bundle {
        Bundle(self.0.iter().copied().filter(|&j| j != item).collect())
    }

    pub fn is_superset(&self, other: &Bundle) -> bool {
        other.iter().all(|j| self.contains(j))
    }
}

impl FromIterator<usize> for Bundle {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Bundle::new(iter.into_iter().collect())
    }
}

impl fmt::Display for Bundle {
    /// 1-indexed, e.g. `{1,2}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, j) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", j + 1)?;
        }
        write!(f, "}}")
    }
}

/// Integral allocation: `owner[j]` receives item `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Allocation {
    owner: Vec<usize>,
}

impl Allocation {
    pub fn new(owner: Vec<usize>, agents: usize) -> Result<Self, ModelError> {
        if let Some((item, &o)) = owner.iter().enumerate().find(|(_, &o)| o >= agents) {
            return Err(ModelError::OwnerOutOfRange {
                item,
                owner: o,
                agents,
            });
        }
        Ok(Self { owner })
    }

    /// Caller guarantees every owner index is valid.
    pub(crate) fn from_owner_unchecked(owner: Vec<usize>) -> Self {
        Self { owner }
    }

    /// Builds an allocation from disjoint bundles covering `0..m`.
    pub fn from_bundles(bundles: &[Bundle], m: usize) -> Result<Self, ModelError> {
        let mut owner = vec![usize::MAX; m];
        for (i, b) in bundles.iter().enumerate() {
            for j in b.iter() {
                if j >= m {
                    return Err(ModelError::ItemOutOfRange { item: j, items: m });
                }
                owner[j] = i;
            }
        }
        if owner.contains(&usize::MAX) {
            return Err(ModelError::ItemCount {
                got: owner.iter().filter(|&&o| o != usize::MAX).count(),
                expected: m,
            });
        }
        Ok(Self { owner })
    }

    pub fn owner(&self, item: usize) -> usize {
        self.owner[item]
    }

    pub fn owners(&self) -> &[usize] {
        &self.owner
    }

    pub fn items(&self) -> usize {
        self.owner.len()
    }

    pub fn bundle(&self, agent: usize) -> Bundle {
        Bundle(
            self.owner
                .iter()
                .enumerate()
                .filter_map(|(j, &o)| (o == agent).then_some(j))
                .collect(),
        )
    }

    pub fn bundles(&self, agents: usize) -> Vec<Bundle> {
        (0..agents).map(|i| self.bundle(i)).collect()
    }

    pub fn check_against<T: Scalar>(&self, profile: &Profile<T>) -> Result<(), ModelError> {
        if self.items() != profile.items() {
            return Err(ModelError::ItemCount {
                got: self.items(),
                expected: profile.items(),
            });
        }
        Self::new(self.owner.clone(), profile.agents()).map(|_| ())
    }

    /// Comma-separated 1-indexed owner list, e.g. `"1,1,2,2"`.
    pub fn to_owner_list(&self) -> String {
        self.owner
            .iter()
            .map(|o| (o + 1).to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Strict preference order plus the number of positively valued items.
///
/// The positively valued items are exactly `order[..positive_count]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrdinalReport {
    order: Vec<usize>,
    positive_count: usize,
}

impl OrdinalReport {
    pub fn new(order: Vec<usize>, positive_count: usize) -> Result<Self, ModelError> {
        let m = order.len();
        let mut seen = vec![false; m];
        for &j in &order {
            if j >= m || std::mem::replace(&mut seen[j], true) {
                return Err(ModelError::NotAPermutation(m));
            }
        }
        if positive_count > m {
            return Err(ModelError::PositiveCount {
                count: positive_count,
                items: m,
            });
        }
        Ok(Self {
            order,
            positive_count,
        })
    }

    /// A report that values every item positively.
    pub fn full(order: Vec<usize>) -> Result<Self, ModelError> {
        let m = order.len();
        Self::new(order, m)
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn positive_count(&self) -> usize {
        self.positive_count
    }

    pub fn items(&self) -> usize {
        self.order.len()
    }

    pub fn positive_items(&self) -> &[usize] {
        &self.order[..self.positive_count]
    }

    pub fn is_positive(&self, item: usize) -> bool {
        self.positive_items().contains(&item)
    }

    /// 0-based rank of every item: `ranks()[order[k]] == k`.
    pub fn ranks(&self) -> Vec<usize> {
        let mut rank = vec![0; self.order.len()];
        for (k, &j) in self.order.iter().enumerate() {
            rank[j] = k;
        }
        rank
    }

    pub fn least_favorite(&self) -> Option<usize> {
        self.order.last().copied()
    }
}

/// Items by strictly decreasing value; equal values keep increasing index.
pub fn preference_order<T: Scalar>(values: &[T]) -> OrdinalReport {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable sort keeps index order among ties
    order.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let positive_count = values.iter().filter(|v| **v > T::zero()).count();
    OrdinalReport {
        order,
        positive_count,
    }
}

/// Additive utility of a bundle.
pub fn utility<T: Scalar>(values: &[T], bundle: &Bundle) -> T {
    bundle
        .iter()
        .fold(T::zero(), |acc, j| acc + values[j].clone())
}

/// Utility of agent `agent` (with valuation `values`) in `alloc`.
pub fn alloc_utility<T: Scalar>(values: &[T], alloc: &Allocation, agent: usize) -> T {
    alloc
        .owners()
        .iter()
        .zip(values)
        .filter(|(&o, _)| o == agent)
        .fold(T::zero(), |acc, (_, v)| acc + v.clone())
}
