//! Random instance generators shared by the replication suite and tests.
//! Every value is an exact rational with a small denominator.

use num_traits::Zero;
use rand::Rng;

use crate::cake::{PieceSet, PiecewiseDensity, Segment};
use crate::rational::{int, ratio};
use crate::{Profile, Rational};

/// Rational in `[0, 1]` with a small random denominator.
pub fn unit_rational(rng: &mut impl Rng) -> Rational {
    let q = rng.random_range(1..=12i64);
    ratio(rng.random_range(0..=q), q)
}

pub fn random_profile(rng: &mut impl Rng, n: usize, m: usize) -> Profile<Rational> {
    Profile::new(
        (0..n)
            .map(|_| (0..m).map(|_| unit_rational(rng)).collect())
            .collect(),
    )
    .expect("values lie in [0, 1]")
}

/// Sorted distinct rationals strictly inside `(0, 1)`.
fn interior_points(rng: &mut impl Rng, count: usize) -> Vec<Rational> {
    let mut pts: Vec<Rational> = Vec::new();
    while pts.len() < count {
        let q = rng.random_range(2..=24i64);
        let p = ratio(rng.random_range(1..q), q);
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    pts.sort();
    pts
}

/// Random normalized density. Segments are constant when `linear` is false,
/// otherwise each segment gets a random nonnegative linear piece.
pub fn random_density(rng: &mut impl Rng, linear: bool) -> PiecewiseDensity {
    let count = rng.random_range(0..=4);
    let breaks = interior_points(rng, count);
    let mut edges = vec![int(0)];
    edges.extend(breaks);
    edges.push(int(1));
    let segs: Vec<Segment> = edges
        .windows(2)
        .map(|w| {
            let (l, r) = (w[0].clone(), w[1].clone());
            let hl = int(rng.random_range(0..=5));
            let hr = if linear {
                int(rng.random_range(0..=5))
            } else {
                hl.clone()
            };
            // line through (l, hl) and (r, hr)
            let b = (&hr - &hl) / (&r - &l);
            let a = &hl - &b * &l;
            Segment::new(l, r, a, b)
        })
        .collect();
    let raw = PiecewiseDensity::unnormalized(segs.clone()).expect("nonnegative tiling");
    let total = raw.total();
    if total.is_zero() {
        return PiecewiseDensity::uniform();
    }
    let segs = segs
        .into_iter()
        .map(|s| Segment::new(s.l, s.r, s.a / &total, s.b / &total))
        .collect();
    PiecewiseDensity::new(segs).expect("unit mass after rescaling")
}

/// Random nonempty finite union of intervals inside `[0, 1)`.
pub fn random_piece(rng: &mut impl Rng) -> PieceSet {
    let count = 2 * rng.random_range(1..=3);
    let pts = interior_points(rng, count);
    let intervals = pts
        .chunks(2)
        .map(|c| (c[0].clone(), c[1].clone()))
        .collect();
    PieceSet::new(intervals).expect("sorted disjoint intervals")
}

/// Constant or linear pieces, chosen at random.
pub fn any_density(rng: &mut impl Rng) -> PiecewiseDensity {
    let linear = rng.random();
    random_density(rng, linear)
}
