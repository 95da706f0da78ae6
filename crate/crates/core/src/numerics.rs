//! Shared finite-difference and quadrature kernels.
//!
//! Everything here operates on plain `&[f64]` samples over a uniform grid.
//! Centered stencils fall back to one-sided differences at the two boundary
//! nodes so callers get a full-length derivative vector.

/// Centered first derivative, one-sided second order at the ends.
pub fn derivative(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 3, "derivative needs at least 3 samples");
    let mut out = vec![0.0; n];
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
    }
    out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
    out
}

/// Second derivative, 3-point stencil; copies the adjacent interior value
/// at the boundary nodes (used only for diagnostics, never for stepping).
pub fn second_derivative(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 3);
    let mut out = vec![0.0; n];
    let dx2 = dx * dx;
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / dx2;
    }
    out[0] = out[1];
    out[n - 1] = out[n - 2];
    out
}

/// Trapezoid quadrature of samples on a uniform grid.
pub fn trapezoid(f: &[f64], dx: f64) -> f64 {
    let n = f.len();
    if n < 2 {
        return 0.0;
    }
    let mut sum = 0.5 * (f[0] + f[n - 1]);
    for v in &f[1..n - 1] {
        sum += v;
    }
    sum * dx
}

/// Trapezoid quadrature of a nodewise function without materializing it.
pub fn trapezoid_with<F: FnMut(usize) -> f64>(n: usize, dx: f64, mut f: F) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let mut sum = 0.5 * (f(0) + f(n - 1));
    for i in 1..n - 1 {
        sum += f(i);
    }
    sum * dx
}

/// Discrete L2 norm sqrt(∫ f² dξ) by trapezoid.
pub fn l2_norm(f: &[f64], dx: f64) -> f64 {
    trapezoid_with(f.len(), dx, |i| f[i] * f[i]).sqrt()
}

/// Discrete L1 norm ∫ |f| dξ by trapezoid.
pub fn l1_norm(f: &[f64], dx: f64) -> f64 {
    trapezoid_with(f.len(), dx, |i| f[i].abs())
}

/// Max norm.
pub fn linf_norm(f: &[f64]) -> f64 {
    f.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Solve a constant-coefficient tridiagonal system
/// `lower*x[i-1] + diag*x[i] + upper*x[i+1] = rhs[i]` for interior nodes,
/// with `x[0] = left`, `x[n-1] = right` pinned (Dirichlet). Thomas algorithm.
pub fn tridiagonal_dirichlet(
    lower: f64,
    diag: f64,
    upper: f64,
    rhs: &[f64],
    left: f64,
    right: f64,
) -> Vec<f64> {
    let n = rhs.len();
    assert!(n >= 3);
    let m = n - 2; // interior unknowns
    if m == 1 {
        let x1 = (rhs[1] - lower * left - upper * right) / diag;
        return vec![left, x1, right];
    }
    let mut c_prime = vec![0.0; m];
    let mut d_prime = vec![0.0; m];

    // Fold the pinned boundary values into the first/last interior rows.
    let mut denom = diag;
    c_prime[0] = upper / denom;
    d_prime[0] = (rhs[1] - lower * left) / denom;
    for k in 1..m {
        denom = diag - lower * c_prime[k - 1];
        c_prime[k] = upper / denom;
        let b = if k == m - 1 {
            rhs[k + 1] - upper * right
        } else {
            rhs[k + 1]
        };
        d_prime[k] = (b - lower * d_prime[k - 1]) / denom;
    }

    let mut x = vec![0.0; n];
    x[0] = left;
    x[n - 1] = right;
    x[m] = d_prime[m - 1];
    for k in (0..m - 1).rev() {
        x[k + 1] = d_prime[k] - c_prime[k] * x[k + 2];
    }
    x
}

/// Linear interpolation of uniform samples at position `x`, clamping to the
/// endpoint values outside `[x0, x0 + (n-1) dx]`.
pub fn interp_clamped(f: &[f64], x0: f64, dx: f64, x: f64) -> f64 {
    let n = f.len();
    let s = (x - x0) / dx;
    if s <= 0.0 {
        return f[0];
    }
    if s >= (n - 1) as f64 {
        return f[n - 1];
    }
    let i = s.floor() as usize;
    let w = s - i as f64;
    f[i] * (1.0 - w) + f[i + 1] * w
}

/// Golden-section minimization of `f` on `[a, b]` down to interval width `tol`.
/// Returns (argmin, min value). Assumes a unimodal landscape on the bracket;
/// callers bracket via a coarse scan first.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    let fm = f(mid);
    if f1 < f2 && f1 < fm {
        (x1, f1)
    } else if f2 <= f1 && f2 < fm {
        (x2, f2)
    } else {
        (mid, fm)
    }
}
