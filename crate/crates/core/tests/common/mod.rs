//! Independent oracles shared by the integration tests. Nothing here calls
//! into the crate's numerical paths.

use num_complex::Complex64;

/// Bessel function of the first kind J_n(x), by trapezoid quadrature of the
/// integral representation J_n(x) = (1/π) ∫₀^π cos(nθ − x sin θ) dθ. The
/// periodic extension of the integrand is smooth and even, so the rule
/// converges spectrally; 4096 panels give full double precision for the
/// n, x ranges used in tests.
pub fn bessel_j(n: i64, x: f64) -> f64 {
    let panels = 4096usize;
    let h = std::f64::consts::PI / panels as f64;
    let f = |theta: f64| (n as f64 * theta - x * theta.sin()).cos();
    let mut acc = 0.5 * (f(0.0) + f(std::f64::consts::PI));
    for j in 1..panels {
        acc += f(h * j as f64);
    }
    acc * h / std::f64::consts::PI
}

#[allow(dead_code)]
pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0f64, f64::max)
}

/// Normalize a complex vector to unit L2 norm.
#[allow(dead_code)]
pub fn unit_l2(v: &[Complex64]) -> Vec<Complex64> {
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.iter().map(|a| a / norm).collect()
}

/// Relative L2 distance ‖a − b‖ / ‖b‖.
#[allow(dead_code)]
pub fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

#[allow(dead_code)]
pub fn sanity() {
    // Reference values: Abramowitz & Stegun tables.
    assert!((bessel_j(0, 2.0) - 0.223_890_779_141_235_6).abs() < 1e-12);
    assert!((bessel_j(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-12);
}
