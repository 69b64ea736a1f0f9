use super::{AuditError, AuditReport, Predicate, Witness};
use crate::lp::{simplex, vertex_enumeration, LinearProgram, LpOutcome};
use crate::model::{Allocation, Profile};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FpoMethod {
    /// Simplex, falling back to vertex enumeration on tiny instances.
    #[default]
    Auto,
    Simplex,
    VertexEnumeration,
}

/// Size limit (`n·m`) for the vertex-enumeration fallback.
const VERTEX_LIMIT: usize = 12;

/// Best fractional allocation weakly dominating `x`, maximizing total
/// utility. Variables are `z[i][j]` (row-major) followed by one surplus per
/// agent.
fn solve<T: Scalar>(
    profile: &Profile<T>,
    x: &Allocation,
    method: FpoMethod,
) -> Result<(Vec<Vec<T>>, T), AuditError> {
    x.check_against(profile)?;
    let (n, m) = (profile.agents(), profile.items());
    let vars = n * m + n;
    let mut a = Vec::with_capacity(m + n);
    let mut b = Vec::with_capacity(m + n);
    for j in 0..m {
        let mut row = vec![T::zero(); vars];
        for i in 0..n {
            row[i * m + j] = T::one();
        }
        a.push(row);
        b.push(T::one());
    }
    let base = profile.utilities(x);
    for (i, ui) in base.iter().enumerate() {
        let mut row = vec![T::zero(); vars];
        row[i * m..(i + 1) * m].clone_from_slice(profile.row(i));
        row[n * m + i] = -T::one();
        a.push(row);
        b.push(ui.clone());
    }
    let mut c: Vec<T> = profile.rows().iter().flatten().cloned().collect();
    c.extend((0..n).map(|_| T::zero()));
    let lp = LinearProgram::new(a, b, c);

    let outcome = match method {
        FpoMethod::Simplex => simplex(&lp),
        FpoMethod::VertexEnumeration => vertex_enumeration(&lp),
        FpoMethod::Auto => match simplex(&lp) {
            LpOutcome::Optimal { x, value } => LpOutcome::Optimal { x, value },
            _ if n * m <= VERTEX_LIMIT => vertex_enumeration(&lp),
            other => other,
        },
    };
    match outcome {
        LpOutcome::Optimal { x: z, value } => {
            let slack = value - base.into_iter().fold(T::zero(), |acc, u| acc + u);
            let shares = (0..n).map(|i| z[i * m..(i + 1) * m].to_vec()).collect();
            Ok((shares, slack))
        }
        // x itself is feasible and the region is a product of simplices
        other => Err(AuditError::Lp(format!("{other:?}"))),
    }
}

/// Largest achievable gain in total utility over `x` by fractional
/// allocations that leave nobody worse off. Zero iff `x` is fPO.
pub fn fpo_slack<T: Scalar>(
    profile: &Profile<T>,
    x: &Allocation,
    method: FpoMethod,
) -> Result<T, AuditError> {
    solve(profile, x, method).map(|(_, s)| s)
}

/// Fractional Pareto optimality: no fractional allocation makes someone
/// better off without hurting anyone.
pub fn is_fpo<T: Scalar>(
    profile: &Profile<T>,
    x: &Allocation,
) -> Result<AuditReport<T>, AuditError> {
    let (shares, slack) = solve(profile, x, FpoMethod::Auto)?;
    if slack <= T::zero() {
        return Ok(AuditReport::pass(Predicate::Fpo));
    }
    let utilities = shares
        .iter()
        .zip(profile.rows())
        .map(|(z, v)| {
            z.iter()
                .zip(v)
                .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
        })
        .collect();
    Ok(AuditReport::fail(
        Predicate::Fpo,
        Witness::Fractional { shares, utilities },
    ))
}
