//! Shared test oracles: adaptive Simpson quadrature, independent of any
//! density code in the library.

/// Adaptive Simpson integration on a finite interval.
#[allow(dead_code)]
pub fn integrate<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, m: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, m: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let left = simpson(f, a, lm, m);
        let right = simpson(f, m, rm, b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, lm, m, left, tol / 2.0, depth - 1)
                + recurse(f, m, rm, b, right, tol / 2.0, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    recurse(&f, a, m, b, simpson(&f, a, m, b), tol, 40)
}

/// Integral over (a, ∞) via the substitution u = 1/x on the tail beyond
/// max(a, 1).
pub fn integrate_to_inf<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, tol: f64) -> f64 {
    let split = a.max(1.0);
    let head = if a < split { integrate(f, a, split, tol / 2.0) } else { 0.0 };
    let tail = integrate(move |u| f(1.0 / u) / (u * u), 1e-12, 1.0 / split, tol / 2.0);
    head + tail
}
