//! Floating-point comparison policy and small numeric helpers shared
//! across the crate.

/// Relative tolerance for rank/capacity comparisons.
pub const REL_TOL: f64 = 1e-9;

/// Absolute floor below which differences are ignored outright.
pub const ABS_TOL: f64 = 1e-12;

/// Equality within relative tolerance `REL_TOL` and absolute floor `ABS_TOL`.
///
/// Capacities come from user-input arithmetic, not iterative solves, so a
/// tight relative tolerance is appropriate.
pub fn nearly_equal(a: f64, b: f64) -> bool {
    let diff = (a - b).abs();
    diff <= ABS_TOL || diff <= REL_TOL * a.abs().max(b.abs())
}

/// `a <= b` up to the shared tolerance.
pub fn nearly_le(a: f64, b: f64) -> bool {
    a <= b || nearly_equal(a, b)
}

/// log(exp(a) + exp(b)) without leaving the log domain.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// log of the binomial coefficient C(n, k), via `ln_gamma`.
pub fn ln_choose(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// log(n!) by direct summation; exact enough for the n (< 10^4) used here.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}
