//! Small dense linear programs over an ordered field.
//!
//! Standard form: maximize `c·x` subject to `A x = b`, `x ≥ 0`, `b ≥ 0`.
//! Exact for rationals; with floats comparisons are exact too, so only use
//! them for well-conditioned toy problems.

use itertools::Itertools;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T> {
    pub a: Vec<Vec<T>>,
    pub b: Vec<T>,
    pub c: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { x: Vec<T>, value: T },
    Infeasible,
    Unbounded,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(a: Vec<Vec<T>>, b: Vec<T>, c: Vec<T>) -> Self {
        assert_eq!(a.len(), b.len(), "row count mismatch");
        assert!(
            a.iter().all(|r| r.len() == c.len()),
            "column count mismatch"
        );
        assert!(
            b.iter().all(|v| *v >= T::zero()),
            "right-hand side must be nonnegative"
        );
        Self { a, b, c }
    }

    fn vars(&self) -> usize {
        self.c.len()
    }

    pub fn objective(&self, x: &[T]) -> T {
        dot(&self.c, x)
    }

    pub fn is_feasible(&self, x: &[T]) -> bool {
        x.len() == self.vars()
            && x.iter().all(|v| *v >= T::zero())
            && self
                .a
                .iter()
                .zip(&self.b)
                .all(|(row, rhs)| dot(row, x) == *rhs)
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    /// Reduced costs; the last entry is the current objective value.
    z: Vec<T>,
    basis: Vec<usize>,
}

impl<T: Scalar> Tableau<T> {
    fn width(&self) -> usize {
        self.z.len() - 1
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() / p.clone();
        }
        let pivot_row = self.rows[r].clone();
        let eliminate = |row: &mut Vec<T>| {
            let f = row[col].clone();
            if !f.is_zero() {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v = v.clone() - f.clone() * pv.clone();
                }
            }
        };
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.z);
        self.basis[r] = col;
    }

    /// Bland's rule: lowest-index improving column, ratio ties broken by the
    /// lowest basic variable. Returns false on unboundedness.
    fn optimize(&mut self, allowed: usize) -> bool {
        loop {
            let Some(col) = (0..allowed).find(|&j| self.z[j] < T::zero()) else {
                return true;
            };
            let w = self.width();
            let mut best: Option<(usize, T)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if row[col] <= T::zero() {
                    continue;
                }
                let ratio = row[w].clone() / row[col].clone();
                let better = match &best {
                    None => true,
                    Some((br, bv)) => {
                        ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br])
                    }
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, col),
                None => return false,
            }
        }
    }
}

/// Two-phase primal simplex.
pub fn simplex<T: Scalar>(lp: &LinearProgram<T>) -> LpOutcome<T> {
    let (m, n) = (lp.a.len(), lp.vars());
    let width = n + m;
    let mut rows = Vec::with_capacity(m);
    for (r, (arow, rhs)) in lp.a.iter().zip(&lp.b).enumerate() {
        let mut row = arow.clone();
        row.extend((0..m).map(|k| if k == r { T::one() } else { T::zero() }));
        row.push(rhs.clone());
        rows.push(row);
    }
    // phase 1: maximize -sum(artificials)
    let mut z = vec![T::zero(); width + 1];
    for row in &rows {
        for j in 0..n {
            z[j] = z[j].clone() - row[j].clone();
        }
        z[width] = z[width].clone() - row[width].clone();
    }
    let mut t = Tableau {
        rows,
        z,
        basis: (n..n + m).collect(),
    };
    t.optimize(width);
    if t.z[width] < T::zero() {
        return LpOutcome::Infeasible;
    }
    // drive zero-valued artificials out of the basis, dropping redundant rows
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= n {
            match (0..n).find(|&j| !t.rows[r][j].is_zero()) {
                Some(col) => t.pivot(r, col),
                None => {
                    t.rows.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }
    for row in t.rows.iter_mut() {
        row.drain(n..width);
    }
    // phase 2 reduced costs
    let mut z: Vec<T> = lp.c.iter().map(|c| -c.clone()).collect();
    z.push(T::zero());
    for (row, &bv) in t.rows.iter().zip(&t.basis) {
        let cb = lp.c[bv].clone();
        if !cb.is_zero() {
            for (zj, v) in z.iter_mut().zip(row) {
                *zj = zj.clone() + cb.clone() * v.clone();
            }
        }
    }
    t.z = z;
    if !t.optimize(n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![T::zero(); n];
    for (row, &bv) in t.rows.iter().zip(&t.basis) {
        x[bv] = row[n].clone();
    }
    let value = lp.objective(&x);
    LpOutcome::Optimal { x, value }
}

/// Solve a square system by Gauss-Jordan elimination; `None` if singular.
fn solve_square<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let k = b.len();
    for col in 0..k {
        let piv = (col..k).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let p = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v = v.clone() / p.clone();
        }
        b[col] = b[col].clone() / p;
        let pivot = a[col].clone();
        for r in 0..k {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for (x, p) in a[r].iter_mut().zip(&pivot) {
                *x = x.clone() - f.clone() * p.clone();
            }
            b[r] = b[r].clone() - f * b[col].clone();
        }
    }
    Some(b)
}

/// Indices of a maximal linearly independent subset of rows, or `None` if
/// the system `A x = b` is inconsistent.
fn independent_rows<T: Scalar>(a: &[Vec<T>], b: &[T]) -> Option<Vec<usize>> {
    let mut basis: Vec<(usize, Vec<T>)> = Vec::new(); // (pivot column, reduced augmented row)
    let mut keep = Vec::new();
    for (r, row) in a.iter().enumerate() {
        let mut v = row.clone();
        v.push(b[r].clone());
        for (pc, brow) in &basis {
            if !v[*pc].is_zero() {
                let f = v[*pc].clone() / brow[*pc].clone();
                for (x, y) in v.iter_mut().zip(brow) {
                    *x = x.clone() - f.clone() * y.clone();
                }
            }
        }
        match v[..row.len()].iter().position(|x| !x.is_zero()) {
            Some(pc) => {
                basis.push((pc, v));
                keep.push(r);
            }
            None if !v[row.len()].is_zero() => return None,
            None => {}
        }
    }
    Some(keep)
}

/// Enumerates every basic feasible solution and keeps the best (first on
/// ties). Exponential; meant as an independent check on tiny programs. A
/// bounded feasible region is assumed, so `Unbounded` is never returned.
pub fn vertex_enumeration<T: Scalar>(lp: &LinearProgram<T>) -> LpOutcome<T> {
    let Some(rows) = independent_rows(&lp.a, &lp.b) else {
        return LpOutcome::Infeasible;
    };
    let a: Vec<&Vec<T>> = rows.iter().map(|&r| &lp.a[r]).collect();
    let b: Vec<T> = rows.iter().map(|&r| lp.b[r].clone()).collect();
    let k = rows.len();
    let n = lp.vars();
    let mut best: Option<(Vec<T>, T)> = None;
    for cols in (0..n).combinations(k) {
        let square = a
            .iter()
            .map(|row| cols.iter().map(|&c| row[c].clone()).collect())
            .collect();
        let Some(xb) = solve_square(square, b.clone()) else {
            continue;
        };
        if xb.iter().any(|v| *v < T::zero()) {
            continue;
        }
        let mut x = vec![T::zero(); n];
        for (&c, v) in cols.iter().zip(xb) {
            x[c] = v;
        }
        let value = lp.objective(&x);
        if best.as_ref().is_none_or(|(_, bv)| value > *bv) {
            best = Some((x, value));
        }
    }
    match best {
        Some((x, value)) => LpOutcome::Optimal { x, value },
        None => LpOutcome::Infeasible,
    }
}
