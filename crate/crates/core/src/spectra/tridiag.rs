use crate::hamiltonian::Tridiagonal1D;

/// Sturm count: number of eigenvalues of `t` strictly below `x`.
pub fn sturm_count(t: &Tridiagonal1D, x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0f64;
    for i in 0..t.diag.len() {
        let b2 = if i > 0 {
            t.off[i - 1] * t.off[i - 1]
        } else {
            0.0
        };
        q = t.diag[i] - x - if i > 0 { b2 / q } else { 0.0 };
        if q == 0.0 {
            q = -f64::EPSILON * (t.diag[i].abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th smallest eigenvalue (0-based) by bisection to absolute width `tol`.
pub fn kth_eigenvalue(t: &Tridiagonal1D, k: usize, tol: f64) -> f64 {
    assert!(k < t.dim(), "index {k} beyond dimension {}", t.dim());
    let (mut lo, mut hi) = t.gershgorin();
    lo -= 1e-12 * (lo.abs() + 1.0);
    hi += 1e-12 * (hi.abs() + 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(t, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The `count` smallest eigenvalues in ascending order.
pub fn lowest_eigenvalues(t: &Tridiagonal1D, count: usize, tol: f64) -> Vec<f64> {
    (0..count.min(t.dim()))
        .map(|k| kth_eigenvalue(t, k, tol))
        .collect()
}
