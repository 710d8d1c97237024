//! Metric construction from eigenvector generators.
//!
//! A generator `σ_E` maps a fixed reference `|ψ⟩` onto an eigenvector
//! `σ_E|ψ⟩` of `H`, while `σ_E†⁻¹|φ⟩` (with `|φ⟩ = q₀|ψ⟩`) is an eigenvector
//! of `H†` with the conjugate eigenvalue. The metric is then fixed by
//! `q·σ_E|ψ⟩ = w_E·σ_Ē†⁻¹|φ⟩`, with `w_E > 0` a per-entry weight (1 unless
//! the family says otherwise).
//!
//! `σ_E†⁻¹|φ⟩` is taken from an explicit inverse when the entry carries one,
//! and from the minimum-norm solution of `σ_E†·y = φ` otherwise. Singular
//! generators have many adjoint-inverses on `|φ⟩`, and the minimum-norm one
//! need not be an `H†` eigenvector, so families built from closed forms should
//! supply `sigma_inv`.

use serde::{Deserialize, Serialize};

use crate::error::{MetricError, Result};
use crate::matrix::{inner, min_norm_solve, norm, scaled, sub, ComplexMatrix, C64, ONE, ZERO};
use crate::spectral::SpectralData;

/// One generator `σ_E` for one eigenstate of energy `E`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorEntry {
    #[serde(rename = "E")]
    pub energy: C64,
    pub sigma: ComplexMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_inv: Option<ComplexMatrix>,
    #[serde(default = "unit_weight", skip_serializing_if = "is_unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

fn is_unit_weight(w: &f64) -> bool {
    *w == 1.0
}

impl GeneratorEntry {
    pub fn new(energy: C64, sigma: ComplexMatrix) -> Self {
        Self { energy, sigma, sigma_inv: None, weight: 1.0 }
    }

    pub fn with_inverse(mut self, sigma_inv: ComplexMatrix) -> Self {
        self.sigma_inv = Some(sigma_inv);
        self
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    /// `σ_E|ψ⟩`.
    pub fn eigenvector(&self, psi: &[C64]) -> Vec<C64> {
        self.sigma.apply(psi)
    }

    /// `σ_E†⁻¹|φ⟩` and the relative residual of `σ_E†y = φ`.
    pub fn adjoint_inverse(&self, phi: &[C64], tol: f64) -> Result<(Vec<C64>, f64)> {
        match &self.sigma_inv {
            Some(inv) => {
                let y = inv.adjoint().apply(phi);
                let r = norm(&sub(&self.sigma.adjoint().apply(&y), phi)) / norm(phi);
                Ok((y, r))
            }
            None => min_norm_solve(&self.sigma.adjoint(), phi, tol),
        }
    }
}

#[derive(Deserialize)]
struct FamilyJson {
    entries: Vec<GeneratorEntry>,
    psi_ref: Vec<C64>,
    phi_ref: Vec<C64>,
    q0: ComplexMatrix,
    #[serde(default = "default_tol")]
    tol: f64,
}

fn default_tol() -> f64 {
    1e-10
}

/// Validated generator family with reference pair `q₀|ψ⟩ = |φ⟩`,
/// `⟨ψ|φ⟩ = 1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "FamilyJson")]
pub struct GeneratorFamily {
    entries: Vec<GeneratorEntry>,
    psi_ref: Vec<C64>,
    phi_ref: Vec<C64>,
    q0: ComplexMatrix,
    tol: f64,
}

impl TryFrom<FamilyJson> for GeneratorFamily {
    type Error = MetricError;

    fn try_from(j: FamilyJson) -> Result<Self> {
        GeneratorFamily::new(j.entries, j.psi_ref, j.phi_ref, j.q0, j.tol)
    }
}

impl GeneratorFamily {
    /// Validates dimensions, `q₀ψ = φ` and `σ_Eψ ≠ 0`, then rescales `φ` and
    /// `q₀` so that `⟨ψ|φ⟩ = 1`.
    pub fn new(
        entries: Vec<GeneratorEntry>,
        psi_ref: Vec<C64>,
        phi_ref: Vec<C64>,
        q0: ComplexMatrix,
        tol: f64,
    ) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(MetricError::InvalidParameter(format!("tolerance must be positive, got {tol}")));
        }
        let dim = q0.dim();
        for len in [psi_ref.len(), phi_ref.len()] {
            if len != dim {
                return Err(MetricError::DimensionMismatch { expected: dim, found: len });
            }
        }
        let q0_psi = q0.apply(&psi_ref);
        let mismatch = norm(&sub(&q0_psi, &phi_ref));
        if mismatch > tol * (q0.frobenius_norm() * norm(&psi_ref)).max(norm(&phi_ref)) {
            return Err(MetricError::InvalidParameter(format!("q0·psi_ref differs from phi_ref by {mismatch:.3e}")));
        }
        let overlap = inner(&psi_ref, &phi_ref);
        if overlap.norm() <= tol * norm(&psi_ref) * norm(&phi_ref) {
            return Err(MetricError::ConditionViolated { condition: "ii", detail: "⟨ψ|φ⟩ = 0".into() });
        }
        let rescale = ONE / overlap;
        let phi_ref = scaled(&phi_ref, rescale);
        let q0 = q0.scale(rescale);
        for e in &entries {
            if e.sigma.dim() != dim {
                return Err(MetricError::DimensionMismatch { expected: dim, found: e.sigma.dim() });
            }
            if let Some(inv) = &e.sigma_inv {
                if inv.dim() != dim {
                    return Err(MetricError::DimensionMismatch { expected: dim, found: inv.dim() });
                }
            }
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(MetricError::InvalidParameter(format!("weight must be positive, got {}", e.weight)));
            }
            if !e.energy.is_finite() {
                return Err(MetricError::NonFinite("generator energy".into()));
            }
            if norm(&e.eigenvector(&psi_ref)) <= tol * e.sigma.frobenius_norm() * norm(&psi_ref) {
                return Err(MetricError::ConditionViolated {
                    condition: "i",
                    detail: format!("σ_E·ψ = 0 at E = {}", e.energy),
                });
            }
        }
        Ok(Self { entries, psi_ref, phi_ref, q0, tol })
    }

    pub fn entries(&self) -> &[GeneratorEntry] {
        &self.entries
    }

    pub fn psi_ref(&self) -> &[C64] {
        &self.psi_ref
    }

    pub fn phi_ref(&self) -> &[C64] {
        &self.phi_ref
    }

    pub fn q0(&self) -> &ComplexMatrix {
        &self.q0
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn dim(&self) -> usize {
        self.q0.dim()
    }

    /// Copy with `φ` (and `q₀`) multiplied by `factor`, skipping the
    /// normalization. Used to exercise the consistency check.
    pub fn rescaled_reference(&self, factor: C64) -> Self {
        let mut out = self.clone();
        out.phi_ref = scaled(&self.phi_ref, factor);
        out.q0 = self.q0.scale(factor);
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("generator family serializes")
    }
}

fn check_dims(h: &ComplexMatrix, entry: &GeneratorEntry, v: &[C64]) -> Result<()> {
    if h.dim() != entry.sigma.dim() || v.len() != h.dim() {
        return Err(MetricError::DimensionMismatch {
            expected: h.dim(),
            found: if v.len() != h.dim() { v.len() } else { entry.sigma.dim() },
        });
    }
    Ok(())
}

/// `‖(H − E)σ_Eψ‖ / ‖σ_Eψ‖`.
pub fn check_condition_i(h: &ComplexMatrix, entry: &GeneratorEntry, psi_ref: &[C64]) -> Result<f64> {
    check_dims(h, entry, psi_ref)?;
    let v = entry.eigenvector(psi_ref);
    let n = norm(&v);
    if n == 0.0 {
        return Err(MetricError::ConditionViolated { condition: "i", detail: "σ_E·ψ = 0".into() });
    }
    let r = sub(&h.apply(&v), &scaled(&v, entry.energy));
    Ok(norm(&r) / n)
}

/// Minimum-norm `y` with `σ†y = φ`; fails when the relative residual
/// exceeds `tol`.
pub fn adjoint_inverse_apply(sigma: &ComplexMatrix, phi: &[C64], tol: f64) -> Result<Vec<C64>> {
    let (y, r) = min_norm_solve(&sigma.adjoint(), phi, tol)?;
    if r > tol {
        return Err(MetricError::ConditionViolated {
            condition: "iii",
            detail: format!("φ not in the range of σ†: residual {r:.3e}"),
        });
    }
    Ok(y)
}

fn gated_adjoint_inverse(entry: &GeneratorEntry, phi: &[C64], tol: f64) -> Result<Vec<C64>> {
    let (y, r) = entry.adjoint_inverse(phi, tol)?;
    if r > tol.sqrt().min(1e3 * tol) {
        return Err(MetricError::ConditionViolated {
            condition: "iii",
            detail: format!("σ†y ≠ φ at E = {}: residual {r:.3e}", entry.energy),
        });
    }
    Ok(y)
}

/// `‖(H† − Ē)y‖ / ‖y‖` with `y = σ_E†⁻¹φ`.
pub fn check_condition_ii(h: &ComplexMatrix, entry: &GeneratorEntry, phi_ref: &[C64], tol: f64) -> Result<f64> {
    check_dims(h, entry, phi_ref)?;
    if norm(phi_ref) == 0.0 {
        return Err(MetricError::ConditionViolated { condition: "ii", detail: "φ = 0".into() });
    }
    let y = gated_adjoint_inverse(entry, phi_ref, tol)?;
    let n = norm(&y);
    if n == 0.0 {
        return Err(MetricError::ConditionViolated { condition: "ii", detail: "σ_E†⁻¹φ = 0".into() });
    }
    let r = sub(&h.adjoint().apply(&y), &scaled(&y, entry.energy.conj()));
    Ok(norm(&r) / n)
}

/// Residual of the inverses: `‖σ†y − φ‖/‖φ‖`, and when an explicit inverse
/// is present also `‖σ⁻¹σψ − ψ‖/‖ψ‖`. Returns the larger.
pub fn check_condition_iii(entry: &GeneratorEntry, psi_ref: &[C64], phi_ref: &[C64], tol: f64) -> Result<f64> {
    let (_, r_adj) = entry.adjoint_inverse(phi_ref, tol)?;
    let r_inv = match &entry.sigma_inv {
        Some(inv) => norm(&sub(&inv.apply(&entry.eigenvector(psi_ref)), psi_ref)) / norm(psi_ref),
        None => 0.0,
    };
    Ok(r_adj.max(r_inv))
}

/// Per-entry condition residuals.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionResiduals {
    #[serde(rename = "E")]
    pub energy: C64,
    pub i: f64,
    pub ii: f64,
    pub iii: f64,
}

/// Runs (i)–(iii) for every entry of the family.
pub fn check_family(h: &ComplexMatrix, family: &GeneratorFamily) -> Result<Vec<ConditionResiduals>> {
    family
        .entries()
        .iter()
        .map(|e| {
            Ok(ConditionResiduals {
                energy: e.energy,
                i: check_condition_i(h, e, family.psi_ref())?,
                ii: check_condition_ii(h, e, family.phi_ref(), family.tol())?,
                iii: check_condition_iii(e, family.psi_ref(), family.phi_ref(), family.tol())?,
            })
        })
        .collect()
}

fn energy_match(a: C64, b: C64, radius: f64, tol: f64) -> bool {
    (a - b).norm() <= radius.max(tol * (1.0 + a.norm().max(b.norm())))
}

/// Index of the partner entry for each entry: the entry at the conjugate
/// energy with the same rank among entries of that energy.
fn partner_entries(family: &GeneratorFamily, radius: f64) -> Result<Vec<usize>> {
    let es = family.entries();
    let tol = family.tol();
    let mut out = Vec::with_capacity(es.len());
    for (i, e) in es.iter().enumerate() {
        let rank = es[..i].iter().filter(|f| energy_match(f.energy, e.energy, radius, tol)).count();
        let partners: Vec<usize> =
            (0..es.len()).filter(|&j| energy_match(es[j].energy, e.energy.conj(), radius, tol)).collect();
        let same = es.iter().filter(|f| energy_match(f.energy, e.energy, radius, tol)).count();
        if partners.len() != same {
            return Err(MetricError::MissingGenerator {
                re: e.energy.re,
                im: -e.energy.im,
                needed: same,
                found: partners.len(),
            });
        }
        out.push(partners[rank]);
    }
    Ok(out)
}

/// Consistency of the conjugate partners: with `y_Ē = σ_Ē†⁻¹φ` fitted as
/// `c′_E·S·σ_Eψ`, returns `max_E |c′_E·⟨σ_Ēψ|S|σ_Eψ⟩ − 1|`, together with
/// the largest relative residual of the fit.
pub fn cprime_consistency(family: &GeneratorFamily, s: &ComplexMatrix) -> Result<(f64, f64)> {
    let partners = partner_entries(family, 0.0)?;
    let psi = family.psi_ref();
    let phi = family.phi_ref();
    let mut dev: f64 = 0.0;
    let mut fit: f64 = 0.0;
    for (j, e) in family.entries().iter().enumerate() {
        let p = &family.entries()[partners[j]];
        let v = e.eigenvector(psi);
        let sv = s.apply(&v);
        let (y, _) = p.adjoint_inverse(phi, family.tol())?;
        let c_prime = inner(&sv, &y) / inner(&sv, &sv);
        let resid = norm(&sub(&y, &scaled(&sv, c_prime))) / norm(&y).max(f64::MIN_POSITIVE);
        let t = c_prime * inner(&p.eigenvector(psi), &sv);
        dev = dev.max((t - ONE).norm());
        fit = fit.max(resid);
    }
    Ok((dev, fit))
}

/// Assembles `q` from the family over the physical eigenvalues of `sd`.
///
/// For each eigenvalue cluster `J` with generated eigenvectors `X = [σ_iψ]`
/// and partner images `Y = [w_i·y_{p(i)}]`, the contribution is
/// `Y·(χ_J†X)⁻¹·χ_J†`, so that `q·σ_iψ = w_i·y_{p(i)}` and `q` vanishes on
/// eigenvectors outside the spectrum.
pub fn build_q_generator(family: &GeneratorFamily, sd: &SpectralData) -> Result<ComplexMatrix> {
    let dim = family.dim();
    if sd.right_vectors().dim() != dim {
        return Err(MetricError::DimensionMismatch { expected: dim, found: sd.right_vectors().dim() });
    }
    let tol = family.tol();
    let radius = sd.radius();
    let partners = partner_entries(family, radius)?;
    let psi = family.psi_ref();
    let phi = family.phi_ref();
    let images: Vec<Vec<C64>> =
        family.entries().iter().map(|e| gated_adjoint_inverse(e, phi, tol)).collect::<Result<_>>()?;

    let mut q = ComplexMatrix::zeros(dim);
    let mut seen = vec![false; sd.len()];
    for k in sd.spect_indices() {
        if seen[sd.cluster(k)] {
            continue;
        }
        seen[sd.cluster(k)] = true;
        let members: Vec<usize> = sd.cluster_members(k).into_iter().filter(|&j| sd.in_spect(j)).collect();
        let center: C64 = members.iter().map(|&j| sd.eigenvalue(j)).sum::<C64>() / members.len() as f64;
        let supplied: Vec<usize> = (0..family.entries().len())
            .filter(|&i| energy_match(family.entries()[i].energy, center, radius, tol))
            .collect();
        if supplied.len() != members.len() {
            return Err(MetricError::MissingGenerator {
                re: center.re,
                im: center.im,
                needed: members.len(),
                found: supplied.len(),
            });
        }
        let d = members.len();
        // C = χ_J† X
        let xs: Vec<Vec<C64>> = supplied.iter().map(|&i| family.entries()[i].eigenvector(psi)).collect();
        let mut c = ComplexMatrix::zeros(d);
        for (a, &j) in members.iter().enumerate() {
            let chi = sd.dual(j);
            for (b, x) in xs.iter().enumerate() {
                c[(a, b)] = inner(&chi, x);
            }
        }
        let c_inv = c.inverse(tol).map_err(|_| MetricError::ConditionViolated {
            condition: "i",
            detail: format!("generated eigenvectors at E = {center} are linearly dependent"),
        })?;
        // q += Σ_b Σ_a w_b y_{p(b)} (C⁻¹)_{b a} ⟨χ_a|
        for (a, &j) in members.iter().enumerate() {
            let mut col = vec![ZERO; dim];
            for (b, &i) in supplied.iter().enumerate() {
                let w = c_inv[(b, a)] * family.entries()[i].weight;
                for (o, y) in col.iter_mut().zip(&images[partners[i]]) {
                    *o += w * y;
                }
            }
            q = &q + &crate::matrix::outer(&col, &sd.dual(j));
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{outer, unit_vector};
    use crate::spectral::{decompose, PseudoHermitianSystem};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn hermitian_fixture() -> (ComplexMatrix, Vec<Vec<C64>>, Vec<f64>) {
        let h = ComplexMatrix::from_rows(&[
            vec![c(2.0), C64::new(0.0, 1.0), ZERO],
            vec![C64::new(0.0, -1.0), c(2.0), ZERO],
            vec![ZERO, ZERO, c(5.0)],
        ])
        .unwrap();
        let (vals, vecs) = h.hermitian_eigen().unwrap();
        let cols = (0..3).map(|j| vecs.column(j)).collect();
        (h, cols, vals)
    }

    fn transfer_family(vecs: &[Vec<C64>], vals: &[f64], psi: &[C64]) -> GeneratorFamily {
        // σ_E = |e_E⟩⟨ψ| with ‖ψ‖ = 1: σψ = e_E and σ†⁻¹ψ = e_E.
        let entries = vecs.iter().zip(vals).map(|(v, &e)| GeneratorEntry::new(c(e), outer(v, psi))).collect();
        GeneratorFamily::new(entries, psi.to_vec(), psi.to_vec(), ComplexMatrix::identity(psi.len()), 1e-10).unwrap()
    }

    fn generic_unit(dim: usize) -> Vec<C64> {
        let v: Vec<C64> = (0..dim).map(|k| C64::new(1.0 + k as f64, 0.5 - k as f64)).collect();
        scaled(&v, c(1.0 / norm(&v)))
    }

    #[test]
    fn condition_i_on_projector() {
        let (h, vecs, vals) = hermitian_fixture();
        let p = outer(&vecs[0], &vecs[0]);
        let e = GeneratorEntry::new(c(vals[0]), p);
        assert!(check_condition_i(&h, &e, &generic_unit(3)).unwrap() < 1e-12);
        let id = GeneratorEntry::new(c(vals[0]), ComplexMatrix::identity(3));
        assert!(check_condition_i(&h, &id, &generic_unit(3)).unwrap() > 0.1);
        let zero = GeneratorEntry::new(ONE, ComplexMatrix::zeros(3));
        assert!(check_condition_i(&h, &zero, &generic_unit(3)).is_err());
    }

    #[test]
    fn adjoint_inverse_examples() {
        let u = ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]).unwrap();
        let phi = vec![C64::new(0.3, 0.1), C64::new(-1.0, 2.0)];
        let y = adjoint_inverse_apply(&u, &phi, 1e-12).unwrap();
        assert!(norm(&sub(&y, &u.apply(&phi))) < 1e-14);
        let d = ComplexMatrix::from_real_diagonal(&[2.0, 0.0]);
        let y = adjoint_inverse_apply(&d, &[ONE, ZERO], 1e-12).unwrap();
        assert!((y[0] - c(0.5)).norm() < 1e-15 && y[1].norm() < 1e-15);
        assert!(adjoint_inverse_apply(&d, &[ZERO, ONE], 1e-12).is_err());
    }

    #[test]
    fn condition_ii_hermitian() {
        let (h, vecs, vals) = hermitian_fixture();
        let psi = generic_unit(3);
        let fam = transfer_family(&vecs, &vals, &psi);
        for e in fam.entries() {
            assert!(check_condition_ii(&h, e, fam.phi_ref(), fam.tol()).unwrap() < 1e-12);
            assert!(check_condition_iii(e, fam.psi_ref(), fam.phi_ref(), fam.tol()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn family_validation() {
        let psi = vec![ONE, ZERO];
        let orth = vec![ZERO, ONE];
        let q0 = ComplexMatrix::from_rows(&[vec![ZERO, ZERO], vec![ONE, ZERO]]).unwrap();
        assert!(GeneratorFamily::new(vec![], psi.clone(), orth, q0, 1e-10).is_err());
        let e = GeneratorEntry::new(ONE, ComplexMatrix::from_real_diagonal(&[0.0, 1.0]));
        assert!(GeneratorFamily::new(vec![e], psi.clone(), psi.clone(), ComplexMatrix::identity(2), 1e-10).is_err());
        let bad_w = GeneratorEntry::new(ONE, ComplexMatrix::identity(2)).with_weight(-1.0);
        assert!(GeneratorFamily::new(vec![bad_w], psi.clone(), psi.clone(), ComplexMatrix::identity(2), 1e-10).is_err());
        let fam = GeneratorFamily::new(
            vec![],
            psi.clone(),
            scaled(&psi, c(3.0)),
            ComplexMatrix::identity(2).scale(c(3.0)),
            1e-10,
        )
        .unwrap();
        assert!((inner(fam.psi_ref(), fam.phi_ref()) - ONE).norm() < 1e-15);
    }

    #[test]
    fn hermitian_q_is_identity() {
        let (h, vecs, vals) = hermitian_fixture();
        let fam = transfer_family(&vecs, &vals, &generic_unit(3));
        let sys = PseudoHermitianSystem::new(h, ComplexMatrix::identity(3), 1e-10).unwrap();
        let sd = decompose(&sys).unwrap();
        let q = build_q_generator(&fam, &sd).unwrap();
        assert!((&q - &ComplexMatrix::identity(3)).max_abs() < 1e-12);
        let (dev, fit) = cprime_consistency(&fam, &ComplexMatrix::identity(3)).unwrap();
        assert!(dev < 1e-12 && fit < 1e-12);
        let (dev, _) = cprime_consistency(&fam.rescaled_reference(c(2.0)), &ComplexMatrix::identity(3)).unwrap();
        assert!((dev - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weights_and_missing_generators() {
        let (h, vecs, vals) = hermitian_fixture();
        let psi = generic_unit(3);
        let sys = PseudoHermitianSystem::new(h, ComplexMatrix::identity(3), 1e-10).unwrap();
        let sd = decompose(&sys).unwrap();
        let entries: Vec<GeneratorEntry> = vecs
            .iter()
            .zip(&vals)
            .enumerate()
            .map(|(k, (v, &e))| GeneratorEntry::new(c(e), outer(v, &psi)).with_weight(1.0 + k as f64))
            .collect();
        let fam =
            GeneratorFamily::new(entries.clone(), psi.clone(), psi.clone(), ComplexMatrix::identity(3), 1e-10).unwrap();
        let q = build_q_generator(&fam, &sd).unwrap();
        for (k, v) in vecs.iter().enumerate() {
            let r = inner(v, &q.apply(v));
            assert!((r - c(1.0 + k as f64)).norm() < 1e-12);
        }
        let short =
            GeneratorFamily::new(entries[..2].to_vec(), psi.clone(), psi, ComplexMatrix::identity(3), 1e-10).unwrap();
        assert!(matches!(build_q_generator(&short, &sd), Err(MetricError::MissingGenerator { .. })));
    }

    #[test]
    fn json_round_trip() {
        let psi = unit_vector(2, 0);
        let e = GeneratorEntry::new(C64::new(1.0, 0.5), ComplexMatrix::identity(2));
        let fam = GeneratorFamily::new(vec![e], psi.clone(), psi, ComplexMatrix::identity(2), 1e-10).unwrap();
        let s = serde_json::to_string(&fam).unwrap();
        assert!(s.contains("\"E\":[1.0,0.5]"));
        let back: GeneratorFamily = serde_json::from_str(&s).unwrap();
        assert_eq!(back.entries().len(), 1);
        assert_eq!(back.entries()[0].weight, 1.0);
    }
}
