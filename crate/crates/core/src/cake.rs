//! Divisible goods on `[0,1]` with piecewise-linear densities.
//!
//! All arithmetic is exact. A [`PieceSet`] is a finite union of half-open
//! intervals kept sorted and merged, so equality of piece sets is plain
//! structural equality.

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::audits::{AuditReport, Predicate, Witness};
use crate::rational::{int, ratio};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CakeError {
    #[error("density has no segments")]
    Empty,
    #[error("no agents")]
    NoAgents,
    #[error("segments must tile [0,1) in order (problem at segment {0})")]
    NotATiling(usize),
    #[error("density is negative on segment {0}")]
    Negative(usize),
    #[error("unnormalized density")]
    Unnormalized,
    #[error("interval [{0},{1}) is empty or outside [0,1]")]
    BadInterval(String, String),
    #[error("intervals overlap")]
    Overlap,
    #[error("pieces do not partition [0,1]")]
    NotAPartition,
    #[error("need at least 2 crumbs, got {0}")]
    CrumbCount(usize),
    #[error("agent {agent} out of range for {agents} agents")]
    AgentOutOfRange { agent: usize, agents: usize },
    #[error("expected {expected} earlier reports, got {got}")]
    EarlierReports { expected: usize, got: usize },
}

/// `f(t) = a + b·t` on `[l, r)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub l: Rational,
    pub r: Rational,
    pub a: Rational,
    pub b: Rational,
}

impl Segment {
    pub fn new(l: Rational, r: Rational, a: Rational, b: Rational) -> Self {
        Self { l, r, a, b }
    }

    pub fn at(&self, t: &Rational) -> Rational {
        &self.a + &self.b * t
    }

    /// Integral over `[x, y)`, which must lie inside the segment.
    fn integral(&self, x: &Rational, y: &Rational) -> Rational {
        &self.a * (y - x) + &self.b * (y * y - x * x) / int(2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseDensity {
    segments: Vec<Segment>,
}

impl PiecewiseDensity {
    /// Validated density: segments tile `[0,1)`, nonnegative, unit mass.
    pub fn new(segments: Vec<Segment>) -> Result<Self, CakeError> {
        let d = Self::unnormalized(segments)?;
        if d.total() != Rational::one() {
            return Err(CakeError::Unnormalized);
        }
        Ok(d)
    }

    /// Same checks as [`PiecewiseDensity::new`] except the unit-mass one.
    pub fn unnormalized(segments: Vec<Segment>) -> Result<Self, CakeError> {
        if segments.is_empty() {
            return Err(CakeError::Empty);
        }
        let mut edge = Rational::zero();
        for (k, s) in segments.iter().enumerate() {
            if s.l != edge || s.r <= s.l {
                return Err(CakeError::NotATiling(k));
            }
            if s.at(&s.l).is_negative() || s.at(&s.r).is_negative() {
                return Err(CakeError::Negative(k));
            }
            edge = s.r.clone();
        }
        if edge != Rational::one() {
            return Err(CakeError::NotATiling(segments.len()));
        }
        Ok(Self { segments })
    }

    pub fn uniform() -> Self {
        Self {
            segments: vec![Segment::new(int(0), int(1), int(1), int(0))],
        }
    }

    /// `f(t) = a + b·t` on all of `[0,1)`.
    pub fn linear(a: Rational, b: Rational) -> Result<Self, CakeError> {
        Self::new(vec![Segment::new(int(0), int(1), a, b)])
    }

    /// Step function with the given interior breakpoints and heights.
    pub fn piecewise_constant(
        breaks: &[Rational],
        heights: &[Rational],
    ) -> Result<Self, CakeError> {
        assert_eq!(
            breaks.len() + 1,
            heights.len(),
            "need one more height than breakpoints"
        );
        let mut edges = vec![int(0)];
        edges.extend(breaks.iter().cloned());
        edges.push(int(1));
        Self::new(
            edges
                .windows(2)
                .zip(heights)
                .map(|(w, h)| Segment::new(w[0].clone(), w[1].clone(), h.clone(), int(0)))
                .collect(),
        )
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total(&self) -> Rational {
        self.segments.iter().map(|s| s.integral(&s.l, &s.r)).sum()
    }

    /// Exact value of a piece set.
    pub fn value(&self, x: &PieceSet) -> Rational {
        integrate(self, x)
    }
}

/// Finite union of disjoint half-open intervals, sorted and merged.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PieceSet {
    intervals: Vec<(Rational, Rational)>,
}

impl PieceSet {
    pub fn new(mut intervals: Vec<(Rational, Rational)>) -> Result<Self, CakeError> {
        for (l, r) in &intervals {
            if l >= r || l.is_negative() || *r > Rational::one() {
                return Err(CakeError::BadInterval(l.to_string(), r.to_string()));
            }
        }
        intervals.sort();
        if intervals.windows(2).any(|w| w[0].1 > w[1].0) {
            return Err(CakeError::Overlap);
        }
        Ok(Self::merged(intervals))
    }

    fn merged(sorted: Vec<(Rational, Rational)>) -> Self {
        let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(sorted.len());
        for (l, r) in sorted {
            if l >= r {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.1 == l => last.1 = r,
                _ => out.push((l, r)),
            }
        }
        Self { intervals: out }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full() -> Self {
        Self {
            intervals: vec![(int(0), int(1))],
        }
    }

    pub fn intervals(&self) -> &[(Rational, Rational)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> Rational {
        self.intervals.iter().map(|(l, r)| r - l).sum()
    }

    /// Union of disjoint piece sets.
    pub fn union(&self, other: &PieceSet) -> Result<PieceSet, CakeError> {
        let mut all = self.intervals.clone();
        all.extend(other.intervals.iter().cloned());
        PieceSet::new(all)
    }

    /// `self ∖ other`.
    pub fn difference(&self, other: &PieceSet) -> PieceSet {
        let mut out = Vec::new();
        for (l, r) in &self.intervals {
            let mut cur = l.clone();
            for (ol, or) in &other.intervals {
                if or <= &cur || ol >= r {
                    continue;
                }
                if *ol > cur {
                    out.push((cur.clone(), ol.clone()));
                }
                cur = cur.max(or.clone());
            }
            if cur < *r {
                out.push((cur, r.clone()));
            }
        }
        PieceSet::merged(out)
    }

    pub fn is_disjoint(&self, other: &PieceSet) -> bool {
        self.intersection_measure(other).is_zero()
    }

    fn intersection_measure(&self, other: &PieceSet) -> Rational {
        let mut total = Rational::zero();
        for (l, r) in &self.intervals {
            for (ol, or) in &other.intervals {
                let lo = l.max(ol);
                let hi = r.min(or);
                if lo < hi {
                    total += hi - lo;
                }
            }
        }
        total
    }
}

impl fmt::Display for PieceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return f.write_str("∅");
        }
        for (k, (l, r)) in self.intervals.iter().enumerate() {
            if k > 0 {
                f.write_str(" ∪ ")?;
            }
            write!(f, "[{l},{r})")?;
        }
        Ok(())
    }
}

/// Exact length of a piece set.
pub fn measure(x: &PieceSet) -> Rational {
    x.measure()
}

/// Exact integral of `f` over `x`.
pub fn integrate(f: &PiecewiseDensity, x: &PieceSet) -> Rational {
    let mut total = Rational::zero();
    for (l, r) in &x.intervals {
        for s in &f.segments {
            let lo = l.max(&s.l);
            let hi = r.min(&s.r);
            if lo < hi {
                total += s.integral(lo, hi);
            }
        }
    }
    total
}

/// Cuts `x` into `k` crumbs of equal length and equal `f`-value.
///
/// Each constant stretch is cut into `k` equal slices dealt in order; each
/// linear stretch into `2k` slices with slices `j` and `2k-1-j` going to
/// crumb `j`, which pairs an arithmetic progression into equal sums.
pub fn split_equal(
    x: &PieceSet,
    f: &PiecewiseDensity,
    k: usize,
) -> Result<Vec<PieceSet>, CakeError> {
    if k < 2 {
        return Err(CakeError::CrumbCount(k));
    }
    let mut crumbs: Vec<Vec<(Rational, Rational)>> = vec![Vec::new(); k];
    for (l, r) in &x.intervals {
        for s in &f.segments {
            let lo = l.max(&s.l);
            let hi = r.min(&s.r);
            if lo >= hi {
                continue;
            }
            let slices = if s.b.is_zero() { k } else { 2 * k };
            let width = (hi - lo) / int(slices as i64);
            for q in 0..slices {
                let a = lo + &width * int(q as i64);
                let b = if q + 1 == slices {
                    hi.clone()
                } else {
                    &a + &width
                };
                let owner = if q < k { q } else { 2 * k - 1 - q };
                crumbs[owner].push((a, b));
            }
        }
    }
    Ok(crumbs
        .into_iter()
        .map(|mut c| {
            c.sort();
            PieceSet::merged(c)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CakeAllocation {
    pieces: Vec<PieceSet>,
}

impl CakeAllocation {
    /// Checks that the pieces are pairwise disjoint and cover `[0,1]`.
    pub fn new(pieces: Vec<PieceSet>) -> Result<Self, CakeError> {
        let mut all: Vec<(Rational, Rational)> = pieces
            .iter()
            .flat_map(|p| p.intervals.iter().cloned())
            .collect();
        all.sort();
        if all.windows(2).any(|w| w[0].1 > w[1].0) {
            return Err(CakeError::Overlap);
        }
        if PieceSet::merged(all) != PieceSet::full() {
            return Err(CakeError::NotAPartition);
        }
        Ok(Self { pieces })
    }

    pub fn pieces(&self) -> &[PieceSet] {
        &self.pieces
    }

    pub fn agents(&self) -> usize {
        self.pieces.len()
    }
}

/// Output of the incremental mechanism with per-arrival snapshots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IaOutcome {
    pub allocation: CakeAllocation,
    /// `trace[t]` holds the pieces of agents `0..=t` right after agent `t`
    /// arrived.
    pub trace: Vec<Vec<PieceSet>>,
    /// `picks[t][j]`: crumb index agent `t` took from agent `j`.
    pub picks: Vec<Vec<usize>>,
}

fn argmax_crumb(crumbs: &[PieceSet], f: &PiecewiseDensity) -> usize {
    let mut best = 0;
    let mut best_v = f.value(&crumbs[0]);
    for (k, c) in crumbs.iter().enumerate().skip(1) {
        let v = f.value(c);
        if v > best_v {
            best = k;
            best_v = v;
        }
    }
    best
}

/// One arrival: every current holder splits her piece into `pieces.len() + 1`
/// crumbs with her own density and the newcomer takes the crumb chosen by
/// `pick(owner, crumbs)` from each.
fn arrive(
    pieces: &mut Vec<PieceSet>,
    densities: &[PiecewiseDensity],
    mut pick: impl FnMut(usize, &[PieceSet]) -> usize,
) -> Vec<usize> {
    let t = pieces.len() + 1;
    let mut taken = Vec::new();
    let mut newcomer = Vec::new();
    let mut choices = Vec::with_capacity(pieces.len());
    for (j, piece) in pieces.iter_mut().enumerate() {
        let crumbs = split_equal(piece, &densities[j], t).expect("t >= 2");
        let k = pick(j, &crumbs);
        choices.push(k);
        *piece = piece.difference(&crumbs[k]);
        taken.push(crumbs[k].clone());
    }
    for c in taken {
        newcomer.extend(c.intervals);
    }
    newcomer.sort();
    pieces.push(PieceSet::merged(newcomer));
    choices
}

/// Agents arrive in order; each takes her favorite crumb (lowest index on
/// ties) from every earlier agent's equal split.
pub fn incremental_accommodation(reports: &[PiecewiseDensity]) -> Result<IaOutcome, CakeError> {
    if reports.is_empty() {
        return Err(CakeError::NoAgents);
    }
    let mut pieces = vec![PieceSet::full()];
    let mut trace = vec![pieces.clone()];
    let mut picks = vec![Vec::new()];
    for i in 1..reports.len() {
        let f = &reports[i];
        picks.push(arrive(&mut pieces, reports, |_, crumbs| {
            argmax_crumb(crumbs, f)
        }));
        trace.push(pieces.clone());
    }
    Ok(IaOutcome {
        allocation: CakeAllocation { pieces },
        trace,
        picks,
    })
}

/// Every agent gets at least `1/n` of the cake by her true density.
pub fn is_proportional(
    alloc: &CakeAllocation,
    truth: &[PiecewiseDensity],
) -> Result<AuditReport, CakeError> {
    let n = alloc.agents();
    if truth.len() != n {
        return Err(CakeError::AgentOutOfRange {
            agent: truth.len(),
            agents: n,
        });
    }
    let share = ratio(1, n as i64);
    for (i, (piece, f)) in alloc.pieces.iter().zip(truth).enumerate() {
        if f.value(piece) < share {
            return Ok(AuditReport::fail(
                Predicate::Proportional,
                Witness::Agent(i),
            ));
        }
    }
    Ok(AuditReport::pass(Predicate::Proportional))
}

/// Expected `f̂`-value kept by the owner of `x` when a newcomer takes one of
/// the `t` equal crumbs uniformly at random, next to `(t-1)/t · f̂(x)`.
pub fn expected_share_check(
    x: &PieceSet,
    f_owner: &PiecewiseDensity,
    f_hat: &PiecewiseDensity,
    t: usize,
) -> Result<(Rational, Rational), CakeError> {
    let crumbs = split_equal(x, f_owner, t)?;
    let tt = int(t as i64);
    let lhs = crumbs
        .iter()
        .map(|c| f_hat.value(&x.difference(c)))
        .sum::<Rational>()
        / &tt;
    let rhs = (&tt - int(1)) / &tt * f_hat.value(x);
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CakeBicAudit {
    pub agent: usize,
    pub agents: usize,
    /// Closed-form expected final utility of the truthful report.
    pub truthful: Rational,
    /// Same for each deviation, in input order.
    pub deviations: Vec<Rational>,
    /// Enumerated expectations (truthful first) when `n ≤ 3`.
    pub enumerated: Option<Vec<Rational>>,
    pub verdict: bool,
}

impl CakeBicAudit {
    /// Whether the enumeration, when run, matches the closed form.
    pub fn cross_check_ok(&self) -> bool {
        self.enumerated
            .as_ref()
            .is_none_or(|e| e.first() == Some(&self.truthful) && e[1..] == self.deviations[..])
    }
}

/// Largest `n` for which later arrivals are enumerated exhaustively.
const ENUMERATION_LIMIT: usize = 3;

/// Audits agent `agent`'s (0-based) report against deviations, with the
/// agents before her fixed and later arrivals picking uniformly among equal
/// crumbs.
pub fn cake_bic_audit(
    agent: usize,
    truth: &PiecewiseDensity,
    deviations: &[PiecewiseDensity],
    earlier: &[PiecewiseDensity],
    n: usize,
) -> Result<CakeBicAudit, CakeError> {
    if agent >= n {
        return Err(CakeError::AgentOutOfRange { agent, agents: n });
    }
    if earlier.len() != agent {
        return Err(CakeError::EarlierReports {
            expected: agent,
            got: earlier.len(),
        });
    }
    let reports: Vec<&PiecewiseDensity> = std::iter::once(truth).chain(deviations).collect();
    let mut closed = Vec::with_capacity(reports.len());
    let mut enumerated = Vec::with_capacity(reports.len());
    for r in &reports {
        let mut densities = earlier.to_vec();
        densities.push((*r).clone());
        let pieces = incremental_accommodation(&densities)?.allocation.pieces;
        let arrived = int(agent as i64 + 1);
        closed.push(arrived / int(n as i64) * truth.value(&pieces[agent]));
        if n <= ENUMERATION_LIMIT {
            enumerated.push(enumerate_later(pieces, &densities, truth, n));
        }
    }
    let truthful = closed.remove(0);
    let verdict = closed.iter().all(|d| *d <= truthful);
    Ok(CakeBicAudit {
        agent,
        agents: n,
        truthful,
        deviations: closed,
        enumerated: (n <= ENUMERATION_LIMIT).then_some(enumerated),
        verdict,
    })
}

/// Exact expectation of `truth` on the last tracked piece when each later
/// arrival picks every crumb of every tracked owner uniformly.
fn enumerate_later(
    pieces: Vec<PieceSet>,
    densities: &[PiecewiseDensity],
    truth: &PiecewiseDensity,
    n: usize,
) -> Rational {
    let me = pieces.len() - 1;
    let mut paths: Vec<(Vec<PieceSet>, Rational)> = vec![(pieces, int(1))];
    for t in me + 2..=n {
        let mut next = Vec::new();
        for (state, weight) in paths {
            let splits: Vec<Vec<PieceSet>> = state
                .iter()
                .zip(densities)
                .map(|(p, f)| split_equal(p, f, t).expect("t >= 2"))
                .collect();
            let combos = t.pow(state.len() as u32);
            let w = &weight / int(combos as i64);
            for code in 0..combos {
                let mut c = code;
                let updated = state
                    .iter()
                    .zip(&splits)
                    .map(|(p, crumbs)| {
                        let k = c % t;
                        c /= t;
                        p.difference(&crumbs[k])
                    })
                    .collect();
                next.push((updated, w.clone()));
            }
        }
        paths = next;
    }
    paths
        .iter()
        .map(|(state, w)| w * truth.value(&state[me]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(iv: &[(i64, i64, i64, i64)]) -> PieceSet {
        PieceSet::new(
            iv.iter()
                .map(|&(a, b, c, d)| (ratio(a, b), ratio(c, d)))
                .collect(),
        )
        .unwrap()
    }

    fn two_t() -> PiecewiseDensity {
        PiecewiseDensity::linear(int(0), int(2)).unwrap()
    }

    fn left_half() -> PiecewiseDensity {
        PiecewiseDensity::piecewise_constant(&[ratio(1, 2)], &[int(2), int(0)]).unwrap()
    }

    #[test]
    fn integrals() {
        let half = ps(&[(0, 1, 1, 2)]);
        assert_eq!(integrate(&PiecewiseDensity::uniform(), &half), ratio(1, 2));
        assert_eq!(integrate(&two_t(), &half), ratio(1, 4));
        assert_eq!(integrate(&two_t(), &PieceSet::empty()), int(0));
        assert_eq!(measure(&ps(&[(0, 1, 1, 4), (1, 2, 3, 4)])), ratio(1, 2));
    }

    #[test]
    fn density_validation() {
        assert_eq!(
            PiecewiseDensity::linear(int(2), int(0)),
            Err(CakeError::Unnormalized)
        );
        assert_eq!(
            PiecewiseDensity::linear(int(2), int(-4)),
            Err(CakeError::Negative(0))
        );
        let gap = vec![
            Segment::new(int(0), ratio(1, 2), int(1), int(0)),
            Segment::new(ratio(3, 4), int(1), int(1), int(0)),
        ];
        assert_eq!(PiecewiseDensity::new(gap), Err(CakeError::NotATiling(1)));
        assert!(PiecewiseDensity::linear(int(0), int(2)).is_ok());
    }

    #[test]
    fn piece_set_algebra() {
        let a = ps(&[(0, 1, 1, 2), (1, 2, 3, 4)]);
        assert_eq!(a, ps(&[(0, 1, 3, 4)]));
        assert_eq!(
            a.difference(&ps(&[(1, 4, 1, 2)])),
            ps(&[(0, 1, 1, 4), (1, 2, 3, 4)])
        );
        assert_eq!(
            PieceSet::new(vec![(int(0), ratio(1, 2)), (ratio(1, 4), int(1))]),
            Err(CakeError::Overlap)
        );
        assert!(a.is_disjoint(&ps(&[(3, 4, 1, 1)])));
        assert_eq!(a.to_string(), "[0,3/4)");
    }

    #[test]
    fn split_equal_examples() {
        let c = split_equal(&PieceSet::full(), &PiecewiseDensity::uniform(), 2).unwrap();
        assert_eq!(c, vec![ps(&[(0, 1, 1, 2)]), ps(&[(1, 2, 1, 1)])]);

        let c = split_equal(&PieceSet::full(), &two_t(), 2).unwrap();
        assert_eq!(
            c,
            vec![ps(&[(0, 1, 1, 4), (3, 4, 1, 1)]), ps(&[(1, 4, 3, 4)])]
        );
        for crumb in &c {
            assert_eq!(crumb.measure(), ratio(1, 2));
            assert_eq!(two_t().value(crumb), ratio(1, 2));
        }

        let c = split_equal(&PieceSet::full(), &left_half(), 2).unwrap();
        assert_eq!(
            c,
            vec![
                ps(&[(0, 1, 1, 4), (1, 2, 3, 4)]),
                ps(&[(1, 4, 1, 2), (3, 4, 1, 1)])
            ]
        );
        for crumb in &c {
            assert_eq!(crumb.measure(), ratio(1, 2));
            assert_eq!(left_half().value(crumb), ratio(1, 2));
        }
        assert_eq!(
            split_equal(&PieceSet::full(), &two_t(), 1),
            Err(CakeError::CrumbCount(1))
        );
    }

    #[test]
    fn ia_two_agents() {
        let out = incremental_accommodation(&[PiecewiseDensity::uniform(), left_half()]).unwrap();
        let p = out.allocation.pieces();
        assert_eq!(p[0], ps(&[(1, 2, 1, 1)]));
        assert_eq!(p[1], ps(&[(0, 1, 1, 2)]));
        assert_eq!(PiecewiseDensity::uniform().value(&p[0]), ratio(1, 2));
        assert_eq!(left_half().value(&p[1]), int(1));

        let u = PiecewiseDensity::uniform();
        let out = incremental_accommodation(&[u.clone(), u.clone()]).unwrap();
        assert_eq!(out.allocation.pieces()[1], ps(&[(0, 1, 1, 2)]));
        assert!(
            is_proportional(&out.allocation, &[u.clone(), u])
                .unwrap()
                .verdict
        );
    }

    #[test]
    fn ia_three_uniform_agents() {
        let u = PiecewiseDensity::uniform();
        let out = incremental_accommodation(&[u.clone(), u.clone(), u.clone()]).unwrap();
        let measures: Vec<Vec<Rational>> = out
            .trace
            .iter()
            .map(|s| s.iter().map(PieceSet::measure).collect())
            .collect();
        assert_eq!(measures[1], vec![ratio(1, 2), ratio(1, 2)]);
        assert_eq!(measures[2], vec![ratio(1, 3); 3]);
        let third = &out.allocation.pieces()[2];
        assert_eq!(third.intervals().len(), 2);
        assert!(CakeAllocation::new(out.allocation.pieces().to_vec()).is_ok());
    }

    #[test]
    fn proportionality_examples() {
        let u = PiecewiseDensity::uniform();
        let all_to_one = CakeAllocation::new(vec![PieceSet::full(), PieceSet::empty()]).unwrap();
        let r = is_proportional(&all_to_one, &[u.clone(), u.clone()]).unwrap();
        assert_eq!(r.witness, Some(Witness::Agent(1)));
        let single = CakeAllocation::new(vec![PieceSet::full()]).unwrap();
        assert!(is_proportional(&single, &[two_t()]).unwrap().verdict);
    }

    #[test]
    fn expected_share_examples() {
        let u = PiecewiseDensity::uniform();
        let (l, r) = expected_share_check(&PieceSet::full(), &u, &u, 2).unwrap();
        assert_eq!((l, r), (ratio(1, 2), ratio(1, 2)));
        let (l, r) = expected_share_check(&PieceSet::full(), &u, &left_half(), 3).unwrap();
        assert_eq!((l, r), (ratio(2, 3), ratio(2, 3)));
        let (l, r) = expected_share_check(&ps(&[(1, 2, 1, 1)]), &u, &left_half(), 4).unwrap();
        assert_eq!((l, r), (int(0), int(0)));
    }

    #[test]
    fn bic_audit_examples() {
        let u = PiecewiseDensity::uniform();
        // last arrival: expectation is the realized value
        let a = cake_bic_audit(
            1,
            &left_half(),
            &[u.clone(), two_t()],
            std::slice::from_ref(&u),
            2,
        )
        .unwrap();
        assert!(a.verdict && a.cross_check_ok());
        assert_eq!(a.truthful, int(1));

        let a = cake_bic_audit(
            1,
            &two_t(),
            &[u.clone(), left_half()],
            std::slice::from_ref(&u),
            3,
        )
        .unwrap();
        assert!(a.verdict && a.cross_check_ok());

        let a = cake_bic_audit(0, &u, &[two_t(), left_half()], &[], 2).unwrap();
        assert_eq!(a.truthful, ratio(1, 2));
        assert_eq!(a.deviations, vec![ratio(1, 2), ratio(1, 2)]);
        assert!(a.verdict && a.cross_check_ok());
    }
}
