//! Bisection on monotone predicates.

/// Shrinks `[lo, hi]` around the switch point of a monotone predicate.
///
/// `above(x)` must be false at `lo`, true at `hi`, and monotone in between.
/// Stops when the bracket is narrower than `rel_tol * hi` or after 200 halvings.
/// Returns the final bracket.
pub fn bisect<F: FnMut(f64) -> bool>(
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
    mut above: F,
) -> (f64, f64) {
    for _ in 0..200 {
        if hi - lo <= rel_tol * hi.abs() {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if above(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}
