//! The scalar shift `c(u)` that moves a field onto the constraint set.

use super::{in_constraint, ProblemSpec};
use crate::geometry::Field;
use crate::scalar::Scalar;

/// Returns `c` such that `u + c` lies on the constraint set.
///
/// For `q > 1` this is the root of the strictly increasing map
/// `c ↦ Σ_i w_i |u_i + c|^{q−2}(u_i + c)`, found by a bracketing
/// (Illinois) iteration on `[−max u, −min u]`. For `q = 1` it is minus the weighted median of `u`;
/// when the median is an interval the midpoint is used.
pub fn c_shift<T: Scalar>(spec: &ProblemSpec<'_, T>, u: &Field<T>) -> crate::Result<T> {
    spec.grid().check(u)?;
    if spec.is_sign_case() {
        Ok(median_shift(spec, u))
    } else {
        Ok(bracket_shift(spec, u))
    }
}

fn bracket_shift<T: Scalar>(spec: &ProblemSpec<'_, T>, u: &Field<T>) -> T {
    let w = spec.grid().weights();
    let q = spec.q();
    let balance = |c: T| -> (T, T) {
        let mut sum = T::zero();
        let mut scale = T::zero();
        for (&wi, &ui) in w.iter().zip(u.iter()) {
            let v = (ui + c).signed_pow(q);
            sum = sum + wi * v;
            scale = scale + wi * v.abs();
        }
        (sum, scale)
    };
    let (mut lo, mut hi) = (-u.max_value(), -u.min_value());
    if lo >= hi {
        return lo;
    }
    let tol = T::lit(1e-13);
    let (mut f_lo, mut f_hi) = (balance(lo).0, balance(hi).0);
    let mut best = if f_lo.abs() <= f_hi.abs() { (lo, f_lo.abs()) } else { (hi, f_hi.abs()) };
    // Illinois steps keep the root bracketed; a bisection step is taken
    // whenever the secant point fails to land strictly inside.
    let mut side = 0i8;
    for _ in 0..200 {
        let mut c = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(c > lo && c < hi) {
            c = lo + (hi - lo) / T::lit(2.0);
            if c <= lo || c >= hi {
                break;
            }
        }
        let (f, scale) = balance(c);
        if f.abs() < best.1 {
            best = (c, f.abs());
        }
        if f.abs() <= tol * scale {
            break;
        }
        if f > T::zero() {
            hi = c;
            f_hi = f;
            if side == 1 {
                f_lo = f_lo / T::lit(2.0);
            }
            side = 1;
        } else {
            lo = c;
            f_lo = f;
            if side == -1 {
                f_hi = f_hi / T::lit(2.0);
            }
            side = -1;
        }
    }
    best.0
}

/// `[lower, upper]` weighted median interval of `values`.
pub fn weighted_median_interval<T: Scalar>(values: &[T], weights: &[T]) -> (T, T) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
    let total: T = weights.iter().copied().sum();
    let half = total / T::lit(2.0);
    let tie = T::lit(1e-12) * total;
    let mut cum = T::zero();
    for (pos, &i) in order.iter().enumerate() {
        cum = cum + weights[i];
        if cum >= half - tie {
            let lower = values[i];
            if (cum - half).abs() <= tie && pos + 1 < order.len() {
                return (lower, values[order[pos + 1]]);
            }
            return (lower, lower);
        }
    }
    let last = values[*order.last().expect("nonempty field")];
    (last, last)
}

fn median_shift<T: Scalar>(spec: &ProblemSpec<'_, T>, u: &Field<T>) -> T {
    let (lo, hi) = weighted_median_interval(u, spec.grid().weights());
    let mid = lo + (hi - lo) / T::lit(2.0);
    // Rounding in the tie test can leave the midpoint just outside; the
    // interval endpoints put a node exactly at zero and always qualify.
    for candidate in [mid, lo, hi] {
        if in_constraint(spec, &u.shifted(-candidate)).member {
            return -candidate;
        }
    }
    -mid
}
