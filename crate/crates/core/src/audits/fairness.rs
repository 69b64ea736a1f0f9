use super::{AuditError, AuditReport, Predicate, Witness};
use crate::model::{utility, Allocation, Profile};
use crate::scalar::Scalar;

fn envy_scan<T: Scalar>(
    profile: &Profile<T>,
    alloc: &Allocation,
    predicate: Predicate,
    up_to_one: bool,
) -> Result<AuditReport<T>, AuditError> {
    alloc.check_against(profile)?;
    let n = profile.agents();
    let bundles = alloc.bundles(n);
    for i in 0..n {
        let v = profile.row(i);
        let own = utility(v, &bundles[i]);
        for (j, other) in bundles.iter().enumerate() {
            if i == j || other.is_empty() {
                continue;
            }
            let mut theirs = utility(v, other);
            if up_to_one {
                // removing i's favorite item in the other bundle is the best case
                let best =
                    other
                        .iter()
                        .map(|g| v[g].clone())
                        .fold(T::zero(), |a, x| if x > a { x } else { a });
                theirs = theirs - best;
            }
            if own < theirs {
                return Ok(AuditReport::fail(
                    predicate,
                    Witness::EnvyPair {
                        envious: i,
                        envied: j,
                    },
                ));
            }
        }
    }
    Ok(AuditReport::pass(predicate))
}

/// Envy-freeness up to one good: any envy disappears after removing some
/// single item from the envied bundle.
pub fn is_ef1<T: Scalar>(
    profile: &Profile<T>,
    alloc: &Allocation,
) -> Result<AuditReport<T>, AuditError> {
    envy_scan(profile, alloc, Predicate::Ef1, true)
}

pub fn is_envy_free<T: Scalar>(
    profile: &Profile<T>,
    alloc: &Allocation,
) -> Result<AuditReport<T>, AuditError> {
    envy_scan(profile, alloc, Predicate::EnvyFree, false)
}

/// Every agent with at least `n` positively valued items gets positive
/// utility.
pub fn is_fulfilling<T: Scalar>(
    profile: &Profile<T>,
    alloc: &Allocation,
) -> Result<AuditReport<T>, AuditError> {
    alloc.check_against(profile)?;
    let n = profile.agents();
    for (i, u) in profile.utilities(alloc).iter().enumerate() {
        let positives = profile.row(i).iter().filter(|v| **v > T::zero()).count();
        if positives >= n && *u <= T::zero() {
            return Ok(AuditReport::fail(Predicate::Fulfilling, Witness::Agent(i)));
        }
    }
    Ok(AuditReport::pass(Predicate::Fulfilling))
}
