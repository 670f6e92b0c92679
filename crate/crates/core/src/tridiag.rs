//! Eigenvalues of real symmetric tridiagonal matrices by Sturm-sequence
//! bisection, including the cyclic (periodic) variant with one corner
//! coupling.

/// Number of eigenvalues strictly below `x` for the matrix with diagonal
/// `diag` and off-diagonal `off` (`off.len() == diag.len() - 1`).
///
/// Counts negative pivots of the LDLᵀ factorization of `T − xI`
/// (Sylvester's law of inertia).
pub fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    debug_assert_eq!(off.len() + 1, diag.len());
    let pivmin = f64::MIN_POSITIVE.sqrt().max(
        off.iter().map(|b| b * b).fold(0.0, f64::max) * f64::EPSILON,
    );
    let mut count = 0;
    let mut d = diag[0] - x;
    if d.abs() < pivmin {
        d = -pivmin;
    }
    if d < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        d = diag[i] - x - off[i - 1] * off[i - 1] / d;
        if d.abs() < pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Negative-pivot count of `T − xI` for the cyclic tridiagonal matrix with
/// diagonal `diag`, off-diagonal `off` (`off[i]` couples i and i+1) and
/// `corner` coupling the first and last rows.
///
/// Symmetric elimination only fills the last column, so the count stays
/// O(n): `fill` tracks the entry (i, n−1) and `tail` accumulates the Schur
/// complement of the last diagonal entry.
pub fn count_below_cyclic(diag: &[f64], off: &[f64], corner: f64, x: f64) -> usize {
    let n = diag.len();
    assert!(n >= 3, "cyclic matrices need at least 3 rows");
    debug_assert_eq!(off.len() + 1, n);
    let pivmin = f64::MIN_POSITIVE.sqrt().max(
        off.iter()
            .chain(std::iter::once(&corner))
            .map(|b| b * b)
            .fold(0.0, f64::max)
            * f64::EPSILON,
    );
    let guard = |d: f64| if d.abs() < pivmin { -pivmin } else { d };

    let mut count = 0;
    let mut d = guard(diag[0] - x);
    let mut fill = corner;
    let mut tail = diag[n - 1] - x - fill * fill / d;
    if d < 0.0 {
        count += 1;
    }
    for i in 1..n - 1 {
        let b = off[i - 1];
        let next_d = guard(diag[i] - x - b * b / d);
        let mut next_fill = -b * fill / d;
        if i == n - 2 {
            next_fill += off[n - 2];
        }
        d = next_d;
        fill = next_fill;
        tail -= fill * fill / d;
        if d < 0.0 {
            count += 1;
        }
    }
    if guard(tail) < 0.0 {
        count += 1;
    }
    count
}

/// The `index`-th smallest eigenvalue (0-based) of a cyclic tridiagonal matrix.
pub fn eigenvalue_cyclic(diag: &[f64], off: &[f64], corner: f64, index: usize) -> f64 {
    let n = diag.len();
    assert!(index < n);
    let (mut lo, mut hi) = gershgorin_bounds(diag, off);
    lo -= corner.abs();
    hi += corner.abs();
    let pad = f64::EPSILON * (lo.abs().max(hi.abs()) + 1.0);
    lo -= pad;
    hi += pad;
    bisect(lo, hi, |x| count_below_cyclic(diag, off, corner, x) > index)
}

fn bisect(mut lo: f64, mut hi: f64, above: impl Fn(f64) -> bool) -> f64 {
    loop {
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
    0.5 * (lo + hi)
}

/// Gershgorin interval containing the whole spectrum.
pub fn gershgorin_bounds(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    (lo, hi)
}

/// The `index`-th smallest eigenvalue (0-based), bisected until the
/// bracketing interval cannot shrink any further in double precision.
pub fn eigenvalue(diag: &[f64], off: &[f64], index: usize) -> f64 {
    assert!(!diag.is_empty() && index < diag.len());
    assert_eq!(off.len() + 1, diag.len());
    let (mut lo, mut hi) = gershgorin_bounds(diag, off);
    let pad = f64::EPSILON * (lo.abs().max(hi.abs()) + 1.0);
    lo -= pad;
    hi += pad;
    bisect(lo, hi, |x| count_below(diag, off, x) > index)
}

pub fn smallest_eigenvalue(diag: &[f64], off: &[f64]) -> f64 {
    eigenvalue(diag, off, 0)
}
