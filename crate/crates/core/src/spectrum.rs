//! Complex band structure of the lattice: dispersion relations with analytic
//! q-derivatives, the saddle-point expansion constants at q = ±π/2, and dense
//! finite-lattice spectra.

use num_complex::Complex64;

use crate::error::Error;
use crate::model::{LatticeParams, Operator};
use crate::Result;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest lattice accepted by the dense eigensolver.
pub const DENSE_SPECTRUM_CAP: usize = 2048;

/// Complex dispersion sample: E(q) together with its first two q-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint {
    pub q: f64,
    pub e: Complex64,
    pub de: Complex64,
    pub d2e: Complex64,
}

/// The six expansion constants of E(q) at the saddle wave numbers
/// q₁ = π/2 and q₂ = −π/2, where Im E(q) is maximal for κ > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleConstants {
    pub q1: f64,
    pub q2: f64,
    pub e1: Complex64,
    pub e2: Complex64,
    pub de1: Complex64,
    pub de2: Complex64,
    pub d2e1: Complex64,
    pub d2e2: Complex64,
}

/// Extended-zone dispersion of the equivalent chain,
/// E(q) = −iγ − 2iκ cos(2q) + 2ρ cos(q + Δφ), with analytic derivatives.
pub fn dispersion_chain(q: f64, params: &LatticeParams) -> DispersionPoint {
    let phase = params.delta_phi();
    let (kappa, rho, gamma) = (params.kappa, params.rho, params.gamma);
    let e = -I * gamma - 2.0 * I * kappa * (2.0 * q).cos() + 2.0 * rho * (q + phase).cos();
    let de = 4.0 * I * kappa * (2.0 * q).sin() - 2.0 * rho * (q + phase).sin();
    let d2e = 8.0 * I * kappa * (2.0 * q).cos() - 2.0 * rho * (q + phase).cos();
    DispersionPoint { q, e, de, d2e }
}

/// Two-miniband dispersion of the zigzag lattice in the reduced zone
/// q ∈ [−π/2, π/2]: E±(q) = −iγ − 2iκ cos(2q) ± 2ρ cos(q + Δφ).
pub fn dispersion_zigzag(q: f64, params: &LatticeParams) -> (Complex64, Complex64) {
    let phase = params.delta_phi();
    let common = -I * params.gamma - 2.0 * I * params.kappa * (2.0 * q).cos();
    let split = 2.0 * params.rho * (q + phase).cos();
    (common + split, common - split)
}

/// Saddle-point constants at q = ±π/2. Requires κ > 0; otherwise Im E(q) is
/// flat and the saddle points do not select the long-time dynamics.
pub fn saddle_constants(params: &LatticeParams) -> Result<SaddleConstants> {
    if params.kappa <= 0.0 {
        return Err(Error::Domain(
            "saddle constants need kappa > 0: without imaginary hopping there is no \
             imaginary-part selection and the long-time packet expansion is invalid"
                .into(),
        ));
    }
    let q1 = std::f64::consts::FRAC_PI_2;
    let q2 = -std::f64::consts::FRAC_PI_2;
    let p1 = dispersion_chain(q1, params);
    let p2 = dispersion_chain(q2, params);
    Ok(SaddleConstants {
        q1,
        q2,
        e1: p1.e,
        e2: p2.e,
        de1: p1.de,
        de2: p2.de,
        d2e1: p1.d2e,
        d2e2: p2.d2e,
    })
}

/// Uniform q-grid over [lo, hi], endpoints included.
pub fn q_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2, "q grid needs at least 2 points");
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|k| lo + step * k as f64).collect()
}

/// Eigenvalues of the dense matrix of `op`, sorted by (Re, Im).
///
/// Only intended for small lattices; sizes above [`DENSE_SPECTRUM_CAP`] are
/// rejected.
pub fn finite_spectrum(op: &dyn Operator) -> Result<Vec<Complex64>> {
    let n = op.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n > DENSE_SPECTRUM_CAP {
        return Err(Error::Resource(format!(
            "dense spectrum limited to {DENSE_SPECTRUM_CAP} sites (requested {n})"
        )));
    }
    let dense = op.to_dense();
    let eig = dense
        .eigenvalues()
        .ok_or_else(|| Error::Numerical("complex Schur decomposition did not converge".into()))?;
    let mut evs: Vec<Complex64> = eig.iter().copied().collect();
    evs.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .expect("eigenvalues must be finite")
    });
    Ok(evs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_chain, SiteField};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dispersion_hand_values() {
        let p = LatticeParams::non_hermitian(0.3, 1.0, 0.0);
        let at0 = dispersion_chain(0.0, &p);
        assert!((at0.e - c(2.0, -1.2)).norm() < 1e-14);
        // gamma = 2 kappa makes Im E vanish at the saddle points.
        let at_half = dispersion_chain(FRAC_PI_2, &p);
        assert!(at_half.e.norm() < 1e-14);
        let p45 = LatticeParams::non_hermitian(0.3, 1.0, FRAC_PI_4);
        let e1 = dispersion_chain(FRAC_PI_2, &p45).e;
        assert!((e1 - c(-(2.0f64).sqrt(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        // First derivative at h = 1e-5; the second uses a larger step because
        // the double difference loses ~1e-16/h^2 to cancellation.
        let p = LatticeParams::new(0.4, 1.3, 0.5, 0.7, -0.2).unwrap();
        for k in 0..50 {
            let q = -PI + 2.0 * PI * (k as f64 + 0.5) / 50.0;
            let point = dispersion_chain(q, &p);
            let h = 1e-5;
            let fd1 = (dispersion_chain(q + h, &p).e - dispersion_chain(q - h, &p).e) / (2.0 * h);
            assert!((point.de - fd1).norm() <= 1e-6 * point.de.norm().max(1.0));
            let h = 1e-4;
            let (ep, em) = (dispersion_chain(q + h, &p).e, dispersion_chain(q - h, &p).e);
            let fd2 = (ep - 2.0 * point.e + em) / (h * h);
            assert!((point.d2e - fd2).norm() <= 1e-6 * point.d2e.norm().max(1.0));
        }
    }

    #[test]
    fn zigzag_depends_on_delta_phi_only() {
        let p1 = LatticeParams::new(0.3, 1.0, 0.6, FRAC_PI_4, -FRAC_PI_4).unwrap();
        let p2 = LatticeParams::new(0.3, 1.0, 0.6, FRAC_PI_2, 0.0).unwrap();
        for k in 0..40 {
            let q = -FRAC_PI_2 + PI * k as f64 / 39.0;
            let (a1, b1) = dispersion_zigzag(q, &p1);
            let (a2, b2) = dispersion_zigzag(q, &p2);
            assert!((a1 - a2).norm() < 1e-15);
            assert!((b1 - b2).norm() < 1e-15);
        }
    }

    #[test]
    fn zigzag_at_zone_center() {
        let p = LatticeParams::new(0.3, 1.0, 0.6, 0.0, 0.0).unwrap();
        let (ep, em) = dispersion_zigzag(0.0, &p);
        assert!((ep - c(2.0, -1.2)).norm() < 1e-14);
        assert!((em - c(-2.0, -1.2)).norm() < 1e-14);
    }

    #[test]
    fn minibands_fold_into_extended_zone() {
        let p = LatticeParams::non_hermitian(0.3, 1.0, FRAC_PI_4);
        for k in 1..=100 {
            let q = FRAC_PI_2 * k as f64 / 100.0;
            let (ep, em) = dispersion_zigzag(q, &p);
            let chain_q = dispersion_chain(q, &p).e;
            let chain_shift = dispersion_chain(q - PI, &p).e;
            assert!((ep - chain_q).norm() < 1e-13);
            assert!((em - chain_shift).norm() < 1e-13);
        }
    }

    #[test]
    fn saddle_constants_paper_values() {
        let rt2 = (2.0f64).sqrt();
        let p = LatticeParams::non_hermitian(0.3, 1.0, FRAC_PI_4);
        let sc = saddle_constants(&p).unwrap();
        assert!((sc.de1 - c(-rt2, 0.0)).norm() < 1e-14);
        assert!((sc.de2 - c(rt2, 0.0)).norm() < 1e-14);
        assert!((sc.d2e1 - c(rt2, -2.4)).norm() < 1e-14);
        assert!((sc.d2e2 - c(-rt2, -2.4)).norm() < 1e-14);
        assert!((sc.d2e1.norm() - sc.d2e2.norm()).abs() < 1e-14);

        // phi = pi/2: group velocities vanish.
        let p2 = LatticeParams::non_hermitian(0.3, 1.0, FRAC_PI_2);
        let sc2 = saddle_constants(&p2).unwrap();
        assert!(sc2.de1.norm() < 1e-14);
        assert!(sc2.de2.norm() < 1e-14);

        // phi = 0: degenerate saddle energies.
        let p3 = LatticeParams::non_hermitian(0.3, 1.0, 0.0);
        let sc3 = saddle_constants(&p3).unwrap();
        assert!((sc3.e1 - sc3.e2).norm() < 1e-14);

        assert!(saddle_constants(&LatticeParams::hermitian(1.0)).is_err());
    }

    #[test]
    fn im_e_is_maximal_at_half_pi() {
        let p = LatticeParams::new(0.45, 1.0, 0.7, 0.3, -0.9).unwrap();
        let im_saddle = dispersion_chain(FRAC_PI_2, &p).e.im;
        for k in 0..10_000 {
            let q = -PI + 2.0 * PI * k as f64 / 9_999.0;
            assert!(dispersion_chain(q, &p).e.im <= im_saddle + 1e-12);
        }
    }

    #[test]
    fn flux_shifts_real_part_only() {
        let base = LatticeParams::non_hermitian(0.3, 1.0, 0.0);
        let shifted = LatticeParams::non_hermitian(0.3, 1.0, 0.6);
        for k in 0..200 {
            let q = -PI + 2.0 * PI * k as f64 / 199.0;
            let e0 = dispersion_chain(q, &base).e;
            let e1 = dispersion_chain(q, &shifted).e;
            assert!((e0.im - e1.im).abs() < 1e-14);
            // Re E(q; phi) = Re E(q + phi; 0) for the cosine band.
            let e0s = dispersion_chain(q + 0.6, &base).e;
            assert!((e1.re - e0s.re).abs() < 1e-12);
        }
    }

    #[test]
    fn single_site_spectrum_is_minus_i_gamma() {
        // Smallest chain the builder accepts; kappa = rho = 0 keeps it diagonal.
        let p = LatticeParams::new(0.0, 0.0, 0.7, 0.0, 0.0).unwrap();
        let op = build_chain(&p, &SiteField::clean(3), 3).unwrap();
        let evs = finite_spectrum(&op).unwrap();
        assert_eq!(evs.len(), 3);
        for e in evs {
            assert!((e - c(0.0, -0.7)).norm() < 1e-12);
        }
    }

    #[test]
    fn hermitian_spectrum_is_real_within_band() {
        let p = LatticeParams::hermitian(1.0);
        let op = build_chain(&p, &SiteField::clean(50), 50).unwrap();
        let evs = finite_spectrum(&op).unwrap();
        for e in &evs {
            assert!(e.im.abs() < 1e-10);
            assert!(e.re.abs() <= 2.0 + 1e-10);
        }
    }

    #[test]
    fn clean_spectrum_approaches_dispersion_curve() {
        // At phi = 0 the Bloch curve is a non-winding arc (Im E is a function
        // of Re E), so the open-chain eigenvalues converge onto it at O(1/N).
        // At generic flux the curve encloses area and the open-boundary
        // spectrum collapses onto interior arcs instead (skin effect), so no
        // such check is possible there.
        let p = LatticeParams::non_hermitian(0.3, 1.0, 0.0);
        let n = 200;
        let op = build_chain(&p, &SiteField::clean(n), n).unwrap();
        let evs = finite_spectrum(&op).unwrap();
        let curve: Vec<Complex64> = (0..4000)
            .map(|k| dispersion_chain(-PI + 2.0 * PI * k as f64 / 3999.0, &p).e)
            .collect();
        let tol = 2.0 / n as f64;
        for ev in &evs {
            let d = curve.iter().map(|c| (ev - c).norm()).fold(f64::INFINITY, f64::min);
            assert!(d < tol, "eigenvalue {ev} is {d} away from the dispersion curve");
        }
    }

    #[test]
    fn dense_cap_is_enforced() {
        let p = LatticeParams::hermitian(1.0);
        let op = build_chain(&p, &SiteField::clean(DENSE_SPECTRUM_CAP + 1), DENSE_SPECTRUM_CAP + 1)
            .unwrap();
        assert!(matches!(finite_spectrum(&op), Err(Error::Resource(_))));
    }
}
