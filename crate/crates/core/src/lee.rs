//! The quantum-mechanical Lee model on a truncated Fock space.
//!
//! `H = m_θN_θ + m_V N_V + m_N N_N + ig(θ†N†V + V†Nθ)` is parity
//! pseudo-Hermitian. The only nontrivial dynamics lives in the two-state
//! sectors spanned by `|n,1,0⟩` and `|n+1,0,1⟩`, which are solved in closed
//! form here, together with the generators of their eigenstates, the
//! generator inverses, and the operator-valued metric obtained by replacing
//! `n → N_θ`.
//!
//! Kets in the closed forms are the raw ones, `(θ†)ⁿ|0⟩` with norm² `n!`.
//!
//! Sign convention: with the coupling `+ig` as written above, the sector
//! eigenvector of energy `E_n` satisfies `α/β = i(μ+s)/(2g)`. The textbook
//! expressions `α = (μ+s)β/(2ig)`, `β = 2g/√(2s(μ+s))` and the
//! operator-valued `q` are correct for the opposite sign of `g`, so every
//! closed form below is evaluated at `formula_coupling() = −g`. Energies and
//! `s = √(μ² − 4g²(n+1))` depend on `g²` only.
//!
//! The closed forms for `α`, `β`, generators, inverses and `q` need `μ > 0`;
//! for `μ ≤ 0` only the energies are available.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MetricError, Result};
use crate::fock::{basis_vector, ladder_matrix, number_operator, parity_matrix, FockBasis, Mode, Occupation};
use crate::generator::{GeneratorEntry, GeneratorFamily};
use crate::matrix::{norm, scaled, unit_vector, ComplexMatrix, C64, I, ONE, ZERO};
use crate::spectral::PseudoHermitianSystem;

#[derive(Deserialize, Serialize)]
struct LeeParamsJson {
    m_theta: f64,
    #[serde(rename = "m_V")]
    m_v: f64,
    #[serde(rename = "m_N")]
    m_n: f64,
    g: f64,
    n_max: usize,
    #[serde(default = "default_tol")]
    tol: f64,
}

fn default_tol() -> f64 {
    1e-10
}

/// Masses, coupling and boson cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LeeParamsJson", into = "LeeParamsJson")]
pub struct LeeParams {
    m_theta: f64,
    m_v: f64,
    m_n: f64,
    g: f64,
    n_max: usize,
    tol: f64,
    mu: f64,
}

impl TryFrom<LeeParamsJson> for LeeParams {
    type Error = MetricError;

    fn try_from(j: LeeParamsJson) -> Result<Self> {
        LeeParams::new(j.m_theta, j.m_v, j.m_n, j.g, j.n_max)?.with_tol(j.tol)
    }
}

impl From<LeeParams> for LeeParamsJson {
    fn from(p: LeeParams) -> Self {
        Self { m_theta: p.m_theta, m_v: p.m_v, m_n: p.m_n, g: p.g, n_max: p.n_max, tol: p.tol }
    }
}

impl LeeParams {
    pub fn new(m_theta: f64, m_v: f64, m_n: f64, g: f64, n_max: usize) -> Result<Self> {
        for (name, x) in [("m_theta", m_theta), ("m_V", m_v), ("m_N", m_n), ("g", g)] {
            if !x.is_finite() {
                return Err(MetricError::InvalidParameter(format!("{name} must be finite")));
            }
        }
        if n_max < 1 {
            return Err(MetricError::InvalidParameter("n_max must be at least 1".into()));
        }
        Ok(Self { m_theta, m_v, m_n, g, n_max, tol: default_tol(), mu: m_theta + m_n - m_v })
    }

    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol < 1e-2) {
            return Err(MetricError::InvalidParameter(format!("tol must lie in (0, 1e-2), got {tol}")));
        }
        self.tol = tol;
        Ok(self)
    }

    pub fn with_coupling(mut self, g: f64) -> Result<Self> {
        if !g.is_finite() {
            return Err(MetricError::InvalidParameter("g must be finite".into()));
        }
        self.g = g;
        Ok(self)
    }

    pub fn m_theta(&self) -> f64 {
        self.m_theta
    }

    pub fn m_v(&self) -> f64 {
        self.m_v
    }

    pub fn m_n(&self) -> f64 {
        self.m_n
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `μ = m_θ + m_N − m_V`.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Coupling at which the closed forms are evaluated, `−g`.
    pub fn formula_coupling(&self) -> f64 {
        -self.g
    }

    /// `μ² − 4g²(n+1)`.
    pub fn radicand(&self, n: usize) -> f64 {
        self.mu * self.mu - 4.0 * self.g * self.g * (n as f64 + 1.0)
    }

    pub fn basis(&self) -> Result<FockBasis> {
        FockBasis::new(self.n_max)
    }

    fn require_positive_mu(&self) -> Result<()> {
        if self.mu > 0.0 {
            Ok(())
        } else {
            Err(MetricError::InvalidParameter(format!("closed-form sector solution needs mu > 0, got {}", self.mu)))
        }
    }

    fn is_exceptional(&self, n: usize) -> bool {
        self.g != 0.0 && self.radicand(n).abs() <= self.tol * self.mu * self.mu
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn check_basis(params: &LeeParams, basis: &FockBasis) -> Result<()> {
    if basis.n_max() != params.n_max() {
        return Err(MetricError::DimensionMismatch { expected: params.n_max(), found: basis.n_max() });
    }
    Ok(())
}

pub fn build_hamiltonian(params: &LeeParams, basis: &FockBasis) -> Result<ComplexMatrix> {
    check_basis(params, basis)?;
    let n_t = number_operator(basis, Mode::Theta).scale(C64::new(params.m_theta, 0.0));
    let n_v = number_operator(basis, Mode::V).scale(C64::new(params.m_v, 0.0));
    let n_n = number_operator(basis, Mode::N).scale(C64::new(params.m_n, 0.0));
    let t = ladder_matrix(basis, Mode::Theta, false);
    let td = ladder_matrix(basis, Mode::Theta, true);
    let v = ladder_matrix(basis, Mode::V, false);
    let vd = ladder_matrix(basis, Mode::V, true);
    let nf = ladder_matrix(basis, Mode::N, false);
    let nd = ladder_matrix(basis, Mode::N, true);
    let hop = &(&(&td * &nd) * &v) + &(&(&vd * &nf) * &t);
    let h0 = &(&n_t + &n_v) + &n_n;
    Ok(&h0 + &hop.scale(I * params.g))
}

/// `H` with `S = P`.
pub fn lee_system(params: &LeeParams) -> Result<(FockBasis, PseudoHermitianSystem)> {
    let basis = params.basis()?;
    let h = build_hamiltonian(params, &basis)?;
    let sys = PseudoHermitianSystem::new(h, parity_matrix(&basis), params.tol)?;
    Ok((basis, sys))
}

/// Indices of `|n,1,0⟩` and `|n+1,0,1⟩`.
pub fn sector_indices(basis: &FockBasis, n: usize) -> Result<(usize, usize)> {
    if n >= basis.n_max() {
        return Err(MetricError::InvalidParameter(format!(
            "sector {n} is incomplete under the cutoff n_max = {}",
            basis.n_max()
        )));
    }
    let a = basis.index_of(Occupation::new(n, 1, 0)).expect("in range");
    let b = basis.index_of(Occupation::new(n + 1, 0, 1)).expect("in range");
    Ok((a, b))
}

/// `(E₋, E₊)` for sector `n`, valid for any `μ`; complex beyond the
/// critical coupling.
pub fn closed_form_energies(params: &LeeParams, n: usize) -> (C64, C64) {
    let center = 0.5 * ((2 * n + 1) as f64 * params.m_theta + params.m_n + params.m_v);
    let s = C64::new(params.radicand(n), 0.0).sqrt();
    (C64::new(center, 0.0) - 0.5 * s, C64::new(center, 0.0) + 0.5 * s)
}

/// Closed-form solution of one interacting sector.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SectorSolution {
    pub n: usize,
    #[serde(rename = "E_minus")]
    pub e_minus: C64,
    #[serde(rename = "E_plus")]
    pub e_plus: C64,
    pub alpha: C64,
    pub beta: C64,
    pub radicand: f64,
}

impl SectorSolution {
    /// `√(μ² − 4g²(n+1))`, imaginary in the broken regime.
    pub fn s(&self) -> C64 {
        C64::new(self.radicand, 0.0).sqrt()
    }

    pub fn is_real(&self) -> bool {
        self.radicand > 0.0
    }

    /// Raw coefficients of `|Ψ_{E_n}⟩` and `|Ψ_{E′_n}⟩` on
    /// `((θ†)ⁿV†|0⟩, (θ†)ⁿ⁺¹N†|0⟩)`.
    pub fn raw_coefficients(&self) -> [[C64; 2]; 2] {
        let np1 = (self.n + 1) as f64;
        [[self.alpha, self.beta], [self.beta.conj() * np1, self.alpha.conj()]]
    }
}

/// `α`, `β` at coupling `gf` (any sign), assuming `μ > 0`.
pub fn sector_coefficients(mu: f64, gf: f64, n: usize) -> (C64, C64) {
    if gf == 0.0 {
        return (-I, ZERO);
    }
    let s = C64::new(mu * mu - 4.0 * gf * gf * (n as f64 + 1.0), 0.0).sqrt();
    let mu_s = s + mu;
    let beta = C64::new(2.0 * gf, 0.0) / (s * mu_s * 2.0).sqrt();
    let alpha = mu_s / (I * 2.0 * gf) * beta;
    (alpha, beta)
}

pub fn closed_form_sector(params: &LeeParams, n: usize) -> Result<SectorSolution> {
    params.require_positive_mu()?;
    let radicand = params.radicand(n);
    if params.is_exceptional(n) {
        return Err(MetricError::ExceptionalPoint { n, radicand });
    }
    let (e_minus, e_plus) = closed_form_energies(params, n);
    let (alpha, beta) = sector_coefficients(params.mu, params.formula_coupling(), n);
    Ok(SectorSolution { n, e_minus, e_plus, alpha, beta, radicand })
}

/// Residuals of `|α|² + (n+1)|β|² = μ/s` and `βᾱ = ig/s` for `α`, `β` built
/// at coupling `gf`.
pub fn sector_identities(mu: f64, gf: f64, n: usize) -> (f64, f64) {
    let (alpha, beta) = sector_coefficients(mu, gf, n);
    let s = C64::new(mu * mu - 4.0 * gf * gf * (n as f64 + 1.0), 0.0).sqrt();
    let lhs = alpha.norm_sqr() + (n as f64 + 1.0) * beta.norm_sqr();
    let first = (C64::new(lhs, 0.0) - C64::new(mu, 0.0) / s).norm();
    let second = (beta * alpha.conj() - I * gf / s).norm();
    (first, second)
}

struct Ladders {
    td_n: ComplexMatrix,
    td_n1: ComplexMatrix,
    t_n: ComplexMatrix,
    t_n1: ComplexMatrix,
    v: ComplexMatrix,
    vd: ComplexMatrix,
    nf: ComplexMatrix,
    nd: ComplexMatrix,
}

impl Ladders {
    fn new(basis: &FockBasis, n: usize) -> Self {
        let t = ladder_matrix(basis, Mode::Theta, false);
        let td = ladder_matrix(basis, Mode::Theta, true);
        Self {
            td_n: td.pow(n),
            td_n1: td.pow(n + 1),
            t_n: t.pow(n),
            t_n1: t.pow(n + 1),
            v: ladder_matrix(basis, Mode::V, false),
            vd: ladder_matrix(basis, Mode::V, true),
            nf: ladder_matrix(basis, Mode::N, false),
            nd: ladder_matrix(basis, Mode::N, true),
        }
    }
}

/// `σ_{E_n} = α(θ†)ⁿV† + β(θ†)ⁿ⁺¹N†` and
/// `σ_{E′_n} = (n+1)β̄(θ†)ⁿV† + ᾱ(θ†)ⁿ⁺¹N†`.
pub fn closed_form_sigma(params: &LeeParams, basis: &FockBasis, n: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    check_basis(params, basis)?;
    sector_indices(basis, n)?;
    let sol = closed_form_sector(params, n)?;
    let l = Ladders::new(basis, n);
    let a = &l.td_n * &l.vd;
    let b = &l.td_n1 * &l.nd;
    let [[c00, c01], [c10, c11]] = sol.raw_coefficients();
    Ok((&a.scale(c00) + &b.scale(c01), &a.scale(c10) + &b.scale(c11)))
}

/// `σ⁻¹_{E_n} = (ᾱ/n!)θⁿV − (β̄/n!)θⁿ⁺¹N` and
/// `σ⁻¹_{E′_n} = −(β/n!)θⁿV + (α/(n+1)!)θⁿ⁺¹N`.
pub fn closed_form_sigma_inv(
    params: &LeeParams,
    basis: &FockBasis,
    n: usize,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    check_basis(params, basis)?;
    sector_indices(basis, n)?;
    let sol = closed_form_sector(params, n)?;
    let l = Ladders::new(basis, n);
    let a = &l.t_n * &l.v;
    let b = &l.t_n1 * &l.nf;
    let fn_ = factorial(n);
    let fn1 = factorial(n + 1);
    let (alpha, beta) = (sol.alpha, sol.beta);
    let minus = &a.scale(alpha.conj() / fn_) - &b.scale(beta.conj() / fn_);
    let plus = &b.scale(alpha / fn1) - &a.scale(beta / fn_);
    Ok((minus, plus))
}

fn diag_where(basis: &FockBasis, pick: impl Fn(Occupation) -> bool, f: impl Fn(usize) -> C64) -> ComplexMatrix {
    let d: Vec<C64> = basis.states().iter().map(|&o| if pick(o) { f(o.n) } else { ZERO }).collect();
    ComplexMatrix::from_diagonal(&d)
}

/// Operator-valued metric
///
/// ```text
/// 1 − N_N − N_V + N_N N_V + μN_V(1−N_N)/√(μ²−4g²(N_θ+1))
///   + μN_N(1−N_V)/√(μ²−4g²N_θ) + θNV†·2ig/√(μ²−4g²N_θ)
///   − 2ig/√(μ²−4g²N_θ)·θ†N†V
/// ```
///
/// with the functions of `N_θ` evaluated on the occupation diagonal and only
/// where their operator coefficient is nonzero.
pub fn closed_form_q(params: &LeeParams, basis: &FockBasis) -> Result<ComplexMatrix> {
    check_basis(params, basis)?;
    params.require_positive_mu()?;
    let mu = params.mu;
    let gf = params.formula_coupling();
    let n_max = basis.n_max();
    // Largest occupation entering either radical is N_θ + 1 = n_max + 1.
    let worst = params.radicand(n_max);
    if params.is_exceptional(n_max) {
        return Err(MetricError::ExceptionalPoint { n: n_max, radicand: worst });
    }
    if worst <= 0.0 {
        return Err(MetricError::BrokenRegime { n: n_max, radicand: worst });
    }
    let rad = |k: usize| (mu * mu - 4.0 * gf * gf * k as f64).sqrt();
    let only_v = |o: Occupation| o.v == 1 && o.nn == 0;
    let only_n = |o: Occupation| o.v == 0 && o.nn == 1;

    let id = ComplexMatrix::identity(basis.dim());
    let n_v = number_operator(basis, Mode::V);
    let n_n = number_operator(basis, Mode::N);
    let p0_like = &(&(&id - &n_n) - &n_v) + &(&n_n * &n_v);
    let a_v = &(&n_v * &(&id - &n_n)) * &diag_where(basis, only_v, |k| C64::new(mu / rad(k + 1), 0.0));
    let a_n = &(&n_n * &(&id - &n_v)) * &diag_where(basis, only_n, |k| C64::new(mu / rad(k), 0.0));
    let f = diag_where(basis, only_n, |k| I * (2.0 * gf / rad(k)));
    let t = ladder_matrix(basis, Mode::Theta, false);
    let td = ladder_matrix(basis, Mode::Theta, true);
    let v = ladder_matrix(basis, Mode::V, false);
    let vd = ladder_matrix(basis, Mode::V, true);
    let nf = ladder_matrix(basis, Mode::N, false);
    let nd = ladder_matrix(basis, Mode::N, true);
    let lower = &(&(&t * &nf) * &vd) * &f;
    let raise = &f * &(&(&td * &nd) * &v);
    Ok(&(&(&p0_like + &a_v) + &a_n) + &(&lower - &raise))
}

/// Basis indices with `n_V + n_N ≤ 1`; the closed-form `q` vanishes on the
/// remaining `|n,1,1⟩` states.
pub fn closed_form_domain(basis: &FockBasis) -> Vec<usize> {
    (0..basis.dim()).filter(|&k| basis.state(k).v as usize + basis.state(k).nn as usize <= 1).collect()
}

/// `C = q·P`.
pub fn c_operator(q: &ComplexMatrix, parity: &ComplexMatrix) -> Result<ComplexMatrix> {
    if q.dim() != parity.dim() {
        return Err(MetricError::DimensionMismatch { expected: q.dim(), found: parity.dim() });
    }
    Ok(q * parity)
}

/// Coupling at which sector `n` turns exceptional, `|μ|/(2√(n+1))`.
pub fn critical_coupling(params: &LeeParams, n: usize) -> Result<f64> {
    if params.mu == 0.0 {
        return Err(MetricError::InvalidParameter("mu = 0: every coupling is critical".into()));
    }
    Ok(params.mu.abs() / (2.0 * (n as f64 + 1.0).sqrt()))
}

/// Max entry deviation between `n!(σ⁻¹_{E_n})†σ⁻¹_{E_n} +
/// (n+1)!(σ⁻¹_{E′_n})†σ⁻¹_{E′_n}` and the closed-form `q` on sector `n`.
pub fn q_sector_reconstruction(params: &LeeParams, basis: &FockBasis, n: usize) -> Result<f64> {
    let (a, b) = sector_indices(basis, n)?;
    let (im, ip) = closed_form_sigma_inv(params, basis, n)?;
    let qn = &(&im.adjoint() * &im).scale(C64::new(factorial(n), 0.0))
        + &(&ip.adjoint() * &ip).scale(C64::new(factorial(n + 1), 0.0));
    let q = closed_form_q(params, basis)?;
    let idx = [a, b];
    Ok((&qn.submatrix(&idx) - &q.submatrix(&idx)).max_abs())
}

/// Generators for every eigenstate of the truncated `H`, reference
/// `ψ = φ = |0⟩`, `q₀ = 1`.
///
/// Interior sectors use the closed-form `σ` and `σ⁻¹` with weights `n!` and
/// `(n+1)!`. The states `|n,0,0⟩`, `|n,1,1⟩`, `|0,0,1⟩` and `|n_max,1,0⟩`
/// are exact eigenstates generated by monomials `M` with inverse
/// `M†/‖M|0⟩‖²` and weight `‖M|0⟩‖²`.
pub fn generator_family(params: &LeeParams, basis: &FockBasis) -> Result<GeneratorFamily> {
    check_basis(params, basis)?;
    let n_max = basis.n_max();
    let mut entries = Vec::with_capacity(basis.dim());
    for n in 0..n_max {
        let sol = closed_form_sector(params, n)?;
        if !sol.is_real() {
            return Err(MetricError::BrokenRegime { n, radicand: sol.radicand });
        }
        let (sm, sp) = closed_form_sigma(params, basis, n)?;
        let (im, ip) = closed_form_sigma_inv(params, basis, n)?;
        entries.push(GeneratorEntry::new(sol.e_minus, sm).with_inverse(im).with_weight(factorial(n)));
        entries.push(GeneratorEntry::new(sol.e_plus, sp).with_inverse(ip).with_weight(factorial(n + 1)));
    }
    let td = ladder_matrix(basis, Mode::Theta, true);
    let vd = ladder_matrix(basis, Mode::V, true);
    let nd = ladder_matrix(basis, Mode::N, true);
    let vac = unit_vector(basis.dim(), 0);
    let mut monomial = |m: ComplexMatrix, energy: f64| {
        let w = norm(&m.apply(&vac)).powi(2);
        let inv = m.adjoint().scale(C64::new(1.0 / w, 0.0));
        entries.push(GeneratorEntry::new(C64::new(energy, 0.0), m).with_inverse(inv).with_weight(w));
    };
    let (mt, mv, mn) = (params.m_theta, params.m_v, params.m_n);
    for n in 0..=n_max {
        let tn = td.pow(n);
        monomial(tn.clone(), n as f64 * mt);
        monomial(&(&tn * &vd) * &nd, n as f64 * mt + mv + mn);
    }
    monomial(nd, mn);
    monomial(&td.pow(n_max) * &vd, n_max as f64 * mt + mv);
    GeneratorFamily::new(entries, vac.clone(), vac, ComplexMatrix::identity(basis.dim()), params.tol)
}

/// `(|n,1,0⟩ + |n+1,0,1⟩)/√2`.
pub fn sector_state(basis: &FockBasis, n: usize) -> Result<Vec<C64>> {
    let (a, b) = sector_indices(basis, n)?;
    let mut v = vec![ZERO; basis.dim()];
    v[a] = ONE;
    v[b] = ONE;
    Ok(scaled(&v, C64::new(0.5f64.sqrt(), 0.0)))
}

/// Dirac-normalized random vector supported on the interior sectors, drawn
/// from ChaCha8 seeded with `seed`.
pub fn sector_superposition(basis: &FockBasis, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = vec![ZERO; basis.dim()];
    for n in 0..basis.n_max() {
        let (a, b) = sector_indices(basis, n).expect("interior sector");
        for k in [a, b] {
            v[k] = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    let nv = norm(&v);
    scaled(&v, C64::new(1.0 / nv, 0.0))
}

/// Raw `|Ψ_{E_n}⟩` and `|Ψ_{E′_n}⟩` as coordinate vectors.
pub fn raw_sector_states(params: &LeeParams, basis: &FockBasis, n: usize) -> Result<(Vec<C64>, Vec<C64>)> {
    let (sm, sp) = closed_form_sigma(params, basis, n)?;
    let vac = basis_vector(basis, Occupation::new(0, 0, 0)).expect("vacuum");
    Ok((sm.apply(&vac), sp.apply(&vac)))
}

/// Checks every interior sector for an exceptional point.
pub fn check_regime(params: &LeeParams) -> Result<()> {
    for n in 0..params.n_max {
        if params.is_exceptional(n) {
            return Err(MetricError::ExceptionalPoint { n, radicand: params.radicand(n) });
        }
    }
    Ok(())
}
