use super::AuditError;
use crate::scalar::Scalar;
use crate::welfare::{compare_welfare, WelfareFn};

/// `y` arises from `x` by moving utility from a richer agent `i` to a
/// poorer agent `j` without reversing their order; everyone else unchanged.
pub fn is_pigou_dalton_transfer<T: Scalar>(x: &[T], y: &[T]) -> bool {
    if x.len() != y.len() {
        return false;
    }
    let diff: Vec<usize> = (0..x.len()).filter(|&k| x[k] != y[k]).collect();
    let [a, b] = diff[..] else { return false };
    let (i, j) = if x[a] > x[b] { (a, b) } else { (b, a) };
    x[i].clone() + x[j].clone() == y[i].clone() + y[j].clone()
        && x[i] > x[j]
        && x[i] > y[i]
        && y[i] > x[j]
}

/// Whether `w` weakly prefers the less unequal vector `y` to `x`.
pub fn pdp_holds<T: Scalar>(w: &WelfareFn, x: &[T], y: &[T]) -> Result<bool, AuditError> {
    if !is_pigou_dalton_transfer(x, y) {
        return Err(AuditError::NotPigouDalton);
    }
    Ok(compare_welfare(w, x, y) != std::cmp::Ordering::Greater)
}
