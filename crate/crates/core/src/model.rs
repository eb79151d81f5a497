//! Lattice operators in the three equivalent representations of the
//! non-Hermitian zigzag model: the two-sublattice zigzag form, the
//! auxiliary-site realization with lossy sites, and the equivalent linear
//! chain with nearest- plus next-nearest-neighbor hopping.
//!
//! All operators are matrix-free banded stencils; `apply` computes the
//! energy action `H·ψ` and the equations of motion are `dψ/dt = −i H ψ`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::Error;
use crate::Result;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Physical parameters of the zigzag lattice.
///
/// `kappa` and `rho` are hopping magnitudes (signs and directions live in the
/// phases), `gamma` a uniform loss rate, `phi`/`phi_prime` the Peierls phases
/// of the lower and upper triangular plaquettes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeParams {
    pub kappa: f64,
    pub rho: f64,
    pub gamma: f64,
    pub phi: f64,
    pub phi_prime: f64,
}

impl LatticeParams {
    pub fn new(kappa: f64, rho: f64, gamma: f64, phi: f64, phi_prime: f64) -> Result<Self> {
        let p = Self { kappa, rho, gamma, phi, phi_prime };
        p.validate()?;
        Ok(p)
    }

    /// Hermitian limit: κ = γ = 0, zero flux.
    pub fn hermitian(rho: f64) -> Self {
        Self { kappa: 0.0, rho, gamma: 0.0, phi: 0.0, phi_prime: 0.0 }
    }

    /// Passive non-Hermitian lattice with γ = 2κ and the symmetric phase
    /// convention φ' = −φ (so the chain phase equals φ).
    pub fn non_hermitian(kappa: f64, rho: f64, phi: f64) -> Self {
        Self { kappa, rho, gamma: 2.0 * kappa, phi, phi_prime: -phi }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.kappa, self.rho, self.gamma, self.phi, self.phi_prime];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite lattice parameter".into()));
        }
        if self.kappa < 0.0 || self.rho < 0.0 {
            return Err(Error::Validation(format!(
                "hopping magnitudes must be non-negative (kappa={}, rho={})",
                self.kappa, self.rho
            )));
        }
        Ok(())
    }

    /// Flux difference Δφ = (φ − φ')/2; the only phase combination entering
    /// the band structure.
    pub fn delta_phi(&self) -> f64 {
        0.5 * (self.phi - self.phi_prime)
    }

    /// True iff γ ≥ 2κ, i.e. the lattice is purely dissipative (no mode has
    /// net gain). Diagnostic only; normalized dynamics does not depend on γ.
    pub fn dissipative(&self) -> bool {
        self.gamma >= 2.0 * self.kappa
    }

    /// Shift both plaquette phases by χ. Leaves Δφ (hence the spectrum)
    /// unchanged.
    pub fn gauge_shift(&self, chi: f64) -> Self {
        Self { phi: self.phi + chi, phi_prime: self.phi_prime + chi, ..*self }
    }
}

/// Parameters of the auxiliary-site realization of the imaginary hopping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxiliaryParams {
    /// Hermitian next-to-nearest hopping ε in the main sublattices.
    pub epsilon: f64,
    /// Hermitian coupling σ to the auxiliary sites.
    pub sigma: f64,
    /// Complex site energy U of the auxiliary sites, Im(U) < 0 for loss.
    pub u_site: Complex64,
}

impl AuxiliaryParams {
    pub fn new(epsilon: f64, sigma: f64, u_site: Complex64) -> Result<Self> {
        if sigma < 0.0 {
            return Err(Error::Validation(format!("sigma must be non-negative (got {sigma})")));
        }
        Ok(Self { epsilon, sigma, u_site })
    }

    /// Auxiliary parameters with U tuned so that the eliminated model has
    /// hopping exactly −iκ.
    pub fn tuned(epsilon: f64, kappa: f64, sigma: f64) -> Result<Self> {
        let u = tune_auxiliary_energy(epsilon, kappa, sigma)?;
        Self::new(epsilon, sigma, u)
    }
}

/// Adiabatic-elimination constants of the auxiliary model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    /// Effective intra-sublattice hopping κ_eff = ε − σ²/U.
    pub kappa_eff: Complex64,
    /// Complex on-site energy shift δ = −2σ²/U of the main sites.
    pub delta: Complex64,
    /// Elimination residual bound σ/|U|; the expansion is good when ≪ 1.
    pub elimination_ratio: f64,
}

/// Auxiliary site energy U = σ²(ε − iκ)/(ε² + κ²) for which the eliminated
/// hopping ε − σ²/U equals −iκ exactly.
pub fn tune_auxiliary_energy(epsilon: f64, kappa: f64, sigma: f64) -> Result<Complex64> {
    if epsilon == 0.0 && kappa == 0.0 {
        return Err(Error::Domain(
            "tune_auxiliary_energy requires (epsilon, kappa) != (0, 0)".into(),
        ));
    }
    if sigma <= 0.0 {
        return Err(Error::Domain(format!("sigma must be positive (got {sigma})")));
    }
    let denom = epsilon * epsilon + kappa * kappa;
    Ok(sigma * sigma * Complex64::new(epsilon, -kappa) / denom)
}

/// Constants of the adiabatic elimination of the auxiliary amplitudes.
pub fn effective_params(aux: &AuxiliaryParams) -> Result<EffectiveParams> {
    if aux.u_site == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("effective_params requires U != 0".into()));
    }
    let s2_over_u = aux.sigma * aux.sigma / aux.u_site;
    Ok(EffectiveParams {
        kappa_eff: aux.epsilon - s2_over_u,
        delta: -2.0 * s2_over_u,
        elimination_ratio: aux.sigma / aux.u_site.norm(),
    })
}

/// Kind of on-site potential carried by a [`SiteField`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldKind {
    Clean,
    UniformDisorder { delta: f64 },
    DefectPair { v0: f64, n1: usize, n2: usize },
    Custom,
}

/// Real on-site potential, one value per site (chain sites U_n or one
/// sublattice of the zigzag picture).
#[derive(Debug, Clone, PartialEq)]
pub struct SiteField {
    values: Vec<f64>,
    kind: FieldKind,
}

impl SiteField {
    pub fn clean(len: usize) -> Self {
        Self { values: vec![0.0; len], kind: FieldKind::Clean }
    }

    pub fn custom(values: Vec<f64>) -> Self {
        Self { values, kind: FieldKind::Custom }
    }

    /// Zero everywhere except sites `n1` and `n2`, which carry `v0`.
    pub fn defect_pair(len: usize, v0: f64, n1: usize, n2: usize) -> Result<Self> {
        if n1 >= n2 || n2 >= len {
            return Err(Error::Config(format!(
                "defect pair needs n1 < n2 < len (got n1={n1}, n2={n2}, len={len})"
            )));
        }
        let mut values = vec![0.0; len];
        values[n1] = v0;
        values[n2] = v0;
        Ok(Self { values, kind: FieldKind::DefectPair { v0, n1, n2 } })
    }

    pub(crate) fn from_parts(values: Vec<f64>, kind: FieldKind) -> Self {
        Self { values, kind }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Chain field U with U_{2n} = vA_n and U_{2n+1} = vB_n.
    pub fn interleave(v_a: &SiteField, v_b: &SiteField) -> Result<SiteField> {
        if v_a.len() != v_b.len() {
            return Err(Error::Config(format!(
                "sublattice fields differ in length ({} vs {})",
                v_a.len(),
                v_b.len()
            )));
        }
        let mut values = Vec::with_capacity(2 * v_a.len());
        for (a, b) in v_a.values.iter().zip(&v_b.values) {
            values.push(*a);
            values.push(*b);
        }
        let kind = if v_a.kind == FieldKind::Clean && v_b.kind == FieldKind::Clean {
            FieldKind::Clean
        } else {
            FieldKind::Custom
        };
        Ok(SiteField { values, kind })
    }

    /// Inverse of [`SiteField::interleave`]: split a chain field into the
    /// (A, B) sublattice fields.
    pub fn split(&self) -> Result<(SiteField, SiteField)> {
        if self.len() % 2 != 0 {
            return Err(Error::Config(format!(
                "chain field of odd length {} cannot be split into sublattices",
                self.len()
            )));
        }
        let a: Vec<f64> = self.values.iter().step_by(2).copied().collect();
        let b: Vec<f64> = self.values.iter().skip(1).step_by(2).copied().collect();
        Ok((SiteField::custom(a), SiteField::custom(b)))
    }
}

/// Matrix-free lattice operator `H` over a complex amplitude vector.
pub trait Operator: Sync {
    /// Number of amplitude slots in the state vector.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// out = H·state. `state` and `out` must both have length `self.len()`.
    fn apply(&self, state: &[Complex64], out: &mut [Complex64]);

    /// Amplitude slots per lattice cell (1 chain, 2 zigzag, 4 auxiliary).
    fn block_size(&self) -> usize;

    /// Upper bound on the spectral radius of H (max Gershgorin row sum),
    /// used for integrator step-size control.
    fn rate_bound(&self) -> f64;

    /// out = dstate/dt = −i·H·state.
    fn derivative(&self, state: &[Complex64], out: &mut [Complex64]) {
        self.apply(state, out);
        for v in out.iter_mut() {
            *v *= -I;
        }
    }

    /// Dense matrix of the operator, assembled column by column.
    fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.len();
        let mut basis = vec![Complex64::new(0.0, 0.0); n];
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        let mut dense = DMatrix::zeros(n, n);
        for j in 0..n {
            basis[j] = Complex64::new(1.0, 0.0);
            self.apply(&basis, &mut col);
            for (i, v) in col.iter().enumerate() {
                dense[(i, j)] = *v;
            }
            basis[j] = Complex64::new(0.0, 0.0);
        }
        dense
    }
}

/// Linear chain with nearest (ρe^{±iφ̄}) and next-nearest (−iκ) hopping and
/// on-site energies −iγ + U_n, open boundaries.
#[derive(Debug, Clone)]
pub struct ChainOperator {
    diag: Vec<Complex64>,
    nn_fwd: Complex64,
    nn_bwd: Complex64,
    nnn: Complex64,
}

impl ChainOperator {
    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[Complex64] {
        &self.diag
    }

    pub fn nn_fwd(&self) -> Complex64 {
        self.nn_fwd
    }

    pub fn nn_bwd(&self) -> Complex64 {
        self.nn_bwd
    }

    pub fn nnn(&self) -> Complex64 {
        self.nnn
    }
}

impl Operator for ChainOperator {
    fn len(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, state: &[Complex64], out: &mut [Complex64]) {
        let n = self.diag.len();
        debug_assert_eq!(state.len(), n);
        debug_assert_eq!(out.len(), n);
        for i in 0..n {
            let mut acc = self.diag[i] * state[i];
            if i + 1 < n {
                acc += self.nn_fwd * state[i + 1];
            }
            if i >= 1 {
                acc += self.nn_bwd * state[i - 1];
            }
            if i + 2 < n {
                acc += self.nnn * state[i + 2];
            }
            if i >= 2 {
                acc += self.nnn * state[i - 2];
            }
            out[i] = acc;
        }
    }

    fn block_size(&self) -> usize {
        1
    }

    fn rate_bound(&self) -> f64 {
        let d = self.diag.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        d + self.nn_fwd.norm() + self.nn_bwd.norm() + 2.0 * self.nnn.norm()
    }
}

/// The equivalent linear chain of the zigzag lattice. The chain phase is
/// Δφ = (φ − φ')/2, which reduces to φ in the convention φ' = −φ.
pub fn build_chain(params: &LatticeParams, u: &SiteField, size: usize) -> Result<ChainOperator> {
    params.validate()?;
    if size < 3 {
        return Err(Error::Config(format!("chain needs at least 3 sites (got {size})")));
    }
    if u.len() != size {
        return Err(Error::Config(format!(
            "on-site field length {} does not match chain size {size}",
            u.len()
        )));
    }
    let phase = params.delta_phi();
    let diag = u
        .values()
        .iter()
        .map(|&un| Complex64::new(un, -params.gamma))
        .collect();
    Ok(ChainOperator {
        diag,
        nn_fwd: Complex64::from_polar(params.rho, phase),
        nn_bwd: Complex64::from_polar(params.rho, -phase),
        nnn: -I * params.kappa,
    })
}

/// Two-sublattice zigzag operator. The state layout interleaves the
/// sublattices chain-style: `state[2n] = a_n`, `state[2n+1] = b_n`.
#[derive(Debug, Clone)]
pub struct ZigzagOperator {
    cells: usize,
    diag_a: Vec<Complex64>,
    diag_b: Vec<Complex64>,
    /// Intra-sublattice hopping coefficient: −iκ in the bare model, κ_eff in
    /// the eliminated auxiliary model, ε in the σ = 0 decoupling limit.
    intra: Complex64,
    rho_fwd: Complex64,
    rho_bwd: Complex64,
}

impl ZigzagOperator {
    pub fn cells(&self) -> usize {
        self.cells
    }
}

impl Operator for ZigzagOperator {
    fn len(&self) -> usize {
        2 * self.cells
    }

    fn apply(&self, state: &[Complex64], out: &mut [Complex64]) {
        let nc = self.cells;
        debug_assert_eq!(state.len(), 2 * nc);
        debug_assert_eq!(out.len(), 2 * nc);
        for n in 0..nc {
            let ia = 2 * n;
            let ib = 2 * n + 1;
            // a_n row: diag + intra (a_{n±1}) + ρe^{iφ} b_n + ρe^{iφ'} b_{n−1}
            let mut acc = self.diag_a[n] * state[ia];
            if n + 1 < nc {
                acc += self.intra * state[ia + 2];
            }
            if n >= 1 {
                acc += self.intra * state[ia - 2];
            }
            acc += self.rho_fwd * state[ib];
            if n >= 1 {
                acc += self.rho_bwd * state[ib - 2];
            }
            out[ia] = acc;
            // b_n row: diag + intra (b_{n±1}) + ρe^{−iφ} a_n + ρe^{−iφ'} a_{n+1}
            let mut acc = self.diag_b[n] * state[ib];
            if n + 1 < nc {
                acc += self.intra * state[ib + 2];
            }
            if n >= 1 {
                acc += self.intra * state[ib - 2];
            }
            acc += self.rho_fwd.conj() * state[ia];
            if n + 1 < nc {
                acc += self.rho_bwd.conj() * state[ia + 2];
            }
            out[ib] = acc;
        }
    }

    fn block_size(&self) -> usize {
        2
    }

    fn rate_bound(&self) -> f64 {
        let da = self.diag_a.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let db = self.diag_b.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        da.max(db) + 2.0 * self.intra.norm() + self.rho_fwd.norm() + self.rho_bwd.norm()
    }
}

fn build_zigzag_with(
    params: &LatticeParams,
    intra: Complex64,
    site_shift: Complex64,
    v_a: &SiteField,
    v_b: &SiteField,
    cells: usize,
) -> Result<ZigzagOperator> {
    params.validate()?;
    if cells < 2 {
        return Err(Error::Config(format!("zigzag lattice needs at least 2 cells (got {cells})")));
    }
    if v_a.len() != cells || v_b.len() != cells {
        return Err(Error::Config(format!(
            "sublattice field lengths ({}, {}) do not match cell count {cells}",
            v_a.len(),
            v_b.len()
        )));
    }
    let on_site = |v: f64| Complex64::new(v, -params.gamma) + site_shift;
    Ok(ZigzagOperator {
        cells,
        diag_a: v_a.values().iter().map(|&v| on_site(v)).collect(),
        diag_b: v_b.values().iter().map(|&v| on_site(v)).collect(),
        intra,
        rho_fwd: Complex64::from_polar(params.rho, params.phi),
        rho_bwd: Complex64::from_polar(params.rho, params.phi_prime),
    })
}

/// Zigzag operator with the bare imaginary intra-sublattice hopping −iκ.
pub fn build_zigzag(
    params: &LatticeParams,
    v_a: &SiteField,
    v_b: &SiteField,
    cells: usize,
) -> Result<ZigzagOperator> {
    build_zigzag_with(params, -I * params.kappa, Complex64::new(0.0, 0.0), v_a, v_b, cells)
}

/// Effective zigzag operator after adiabatic elimination of the auxiliary
/// sites: intra-sublattice hopping κ_eff and complex on-site shift δ.
pub fn build_effective(
    params: &LatticeParams,
    aux: &AuxiliaryParams,
    v_a: &SiteField,
    v_b: &SiteField,
    cells: usize,
) -> Result<ZigzagOperator> {
    let eff = effective_params(aux)?;
    build_zigzag_with(params, eff.kappa_eff, eff.delta, v_a, v_b, cells)
}

/// Four-field operator of the auxiliary-site lattice. State layout per cell:
/// `state[4n] = a_n`, `state[4n+1] = b_n`, `state[4n+2] = A_n`,
/// `state[4n+3] = B_n`.
#[derive(Debug, Clone)]
pub struct AuxiliaryOperator {
    cells: usize,
    diag_a: Vec<Complex64>,
    diag_b: Vec<Complex64>,
    u_site: Complex64,
    epsilon: f64,
    sigma: f64,
    rho_fwd: Complex64,
    rho_bwd: Complex64,
}

impl AuxiliaryOperator {
    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Main-lattice amplitudes (a_n, b_n) of a full state, in the interleaved
    /// chain layout used by [`ZigzagOperator`] and [`ChainOperator`].
    pub fn main_amplitudes(&self, state: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(state.len(), 4 * self.cells);
        let mut main = Vec::with_capacity(2 * self.cells);
        for n in 0..self.cells {
            main.push(state[4 * n]);
            main.push(state[4 * n + 1]);
        }
        main
    }
}

impl Operator for AuxiliaryOperator {
    fn len(&self) -> usize {
        4 * self.cells
    }

    fn apply(&self, state: &[Complex64], out: &mut [Complex64]) {
        let nc = self.cells;
        debug_assert_eq!(state.len(), 4 * nc);
        debug_assert_eq!(out.len(), 4 * nc);
        for n in 0..nc {
            let (ia, ib, iaa, ibb) = (4 * n, 4 * n + 1, 4 * n + 2, 4 * n + 3);
            // a_n: ε(a_{n±1}) + ρe^{iφ} b_n + ρe^{iφ'} b_{n−1} + σ(A_n + A_{n+1})
            let mut acc = self.diag_a[n] * state[ia];
            if n + 1 < nc {
                acc += self.epsilon * state[ia + 4];
            }
            if n >= 1 {
                acc += self.epsilon * state[ia - 4];
            }
            acc += self.rho_fwd * state[ib];
            if n >= 1 {
                acc += self.rho_bwd * state[ib - 4];
            }
            acc += self.sigma * state[iaa];
            if n + 1 < nc {
                acc += self.sigma * state[iaa + 4];
            }
            out[ia] = acc;
            // b_n: ε(b_{n±1}) + ρe^{−iφ} a_n + ρe^{−iφ'} a_{n+1} + σ(B_n + B_{n+1})
            let mut acc = self.diag_b[n] * state[ib];
            if n + 1 < nc {
                acc += self.epsilon * state[ib + 4];
            }
            if n >= 1 {
                acc += self.epsilon * state[ib - 4];
            }
            acc += self.rho_fwd.conj() * state[ia];
            if n + 1 < nc {
                acc += self.rho_bwd.conj() * state[ia + 4];
            }
            acc += self.sigma * state[ibb];
            if n + 1 < nc {
                acc += self.sigma * state[ibb + 4];
            }
            out[ib] = acc;
            // A_n: U A_n + σ(a_n + a_{n−1})
            let mut acc = self.u_site * state[iaa] + self.sigma * state[ia];
            if n >= 1 {
                acc += self.sigma * state[ia - 4];
            }
            out[iaa] = acc;
            // B_n: U B_n + σ(b_n + b_{n−1})
            let mut acc = self.u_site * state[ibb] + self.sigma * state[ib];
            if n >= 1 {
                acc += self.sigma * state[ib - 4];
            }
            out[ibb] = acc;
        }
    }

    fn block_size(&self) -> usize {
        4
    }

    fn rate_bound(&self) -> f64 {
        let da = self.diag_a.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let db = self.diag_b.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let main = da.max(db)
            + 2.0 * self.epsilon.abs()
            + self.rho_fwd.norm()
            + self.rho_bwd.norm()
            + 2.0 * self.sigma;
        let auxiliary = self.u_site.norm() + 2.0 * self.sigma;
        main.max(auxiliary)
    }
}

/// Full auxiliary-site operator over (a_n, b_n, A_n, B_n).
pub fn build_auxiliary(
    params: &LatticeParams,
    aux: &AuxiliaryParams,
    v_a: &SiteField,
    v_b: &SiteField,
    cells: usize,
) -> Result<AuxiliaryOperator> {
    params.validate()?;
    if aux.u_site.im >= 0.0 {
        return Err(Error::Validation(format!(
            "auxiliary sites must be lossy: Im(U) < 0 required (got U = {})",
            aux.u_site
        )));
    }
    if cells < 2 {
        return Err(Error::Config(format!("auxiliary lattice needs at least 2 cells (got {cells})")));
    }
    if v_a.len() != cells || v_b.len() != cells {
        return Err(Error::Config(format!(
            "sublattice field lengths ({}, {}) do not match cell count {cells}",
            v_a.len(),
            v_b.len()
        )));
    }
    let on_site = |v: f64| Complex64::new(v, -params.gamma);
    Ok(AuxiliaryOperator {
        cells,
        diag_a: v_a.values().iter().map(|&v| on_site(v)).collect(),
        diag_b: v_b.values().iter().map(|&v| on_site(v)).collect(),
        u_site: aux.u_site,
        epsilon: aux.epsilon,
        sigma: aux.sigma,
        rho_fwd: Complex64::from_polar(params.rho, params.phi),
        rho_bwd: Complex64::from_polar(params.rho, params.phi_prime),
    })
}

/// Zigzag operator in the σ = 0 decoupling limit of the auxiliary model:
/// Hermitian intra-sublattice hopping ε instead of −iκ.
pub fn build_zigzag_epsilon(
    params: &LatticeParams,
    epsilon: f64,
    v_a: &SiteField,
    v_b: &SiteField,
    cells: usize,
) -> Result<ZigzagOperator> {
    build_zigzag_with(
        params,
        Complex64::new(epsilon, 0.0),
        Complex64::new(0.0, 0.0),
        v_a,
        v_b,
        cells,
    )
}
