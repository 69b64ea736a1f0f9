use crate::model::{preference_order, Bundle, OrdinalReport};
use crate::scalar::Scalar;

/// Prefix sums over the whole preference order (`Sd`) or only over the
/// positively valued prefix (`SdPlus`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DominanceMode {
    Sd,
    SdPlus,
}

/// How bundle `a` compares to bundle `b` for one agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    /// Every relevant prefix sum of `a` is at least `b`'s and one is larger.
    Strict,
    /// `a` and `b` coincide on the relevant items.
    Weak,
    /// Some relevant prefix sum of `a` is below `b`'s.
    Incomparable,
}

impl Dominance {
    pub fn is_weak_or_better(self) -> bool {
        self != Dominance::Incomparable
    }
}

pub(crate) fn relevant_len(report: &OrdinalReport, mode: DominanceMode) -> usize {
    match mode {
        DominanceMode::Sd => report.items(),
        DominanceMode::SdPlus => report.positive_count(),
    }
}

/// Prefix-sum comparison over `order[..len]` given membership tests.
pub(crate) fn compare_prefixes(
    order: &[usize],
    in_a: impl Fn(usize) -> bool,
    in_b: impl Fn(usize) -> bool,
) -> Dominance {
    let (mut sa, mut sb) = (0usize, 0usize);
    let mut strict = false;
    for &j in order {
        sa += usize::from(in_a(j));
        sb += usize::from(in_b(j));
        if sa < sb {
            return Dominance::Incomparable;
        }
        strict |= sa > sb;
    }
    if strict {
        Dominance::Strict
    } else {
        Dominance::Weak
    }
}

/// Stochastic dominance of bundle `a` over `b` under valuation `values`,
/// using the lexicographically tie-broken preference order.
pub fn dominates<T: Scalar>(
    values: &[T],
    a: &Bundle,
    b: &Bundle,
    mode: DominanceMode,
) -> Dominance {
    let report = preference_order(values);
    let order = &report.order()[..relevant_len(&report, mode)];
    compare_prefixes(order, |j| a.contains(j), |j| b.contains(j))
}
