//! Diagnostics shared by every metric construction: positivity on the
//! physical subspace, self-adjointness of `H` under `q`, norm conservation
//! under evolution, equivalence of metrics up to positive rescaling of each
//! eigenvector, and involution checks for `C = qP`.

use serde::Serialize;

use crate::error::{MetricError, Result};
use crate::matrix::{inner, norm, unit_vector, ComplexMatrix, C64, ZERO};
use crate::spectral::{PseudoHermitianSystem, SpectralData};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PositivityStatus {
    Positive,
    Indefinite,
    Degenerate,
    NotApplicableComplexSpectrum,
}

/// Positivity of the Hermitian part of `q` on a subspace.
#[derive(Clone, Debug, Serialize)]
pub struct PositivityReport {
    pub hermiticity_residual: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub kernel_dimension: usize,
    pub status: PositivityStatus,
}

/// `‖q − q†‖_F / ‖q‖_F`.
pub fn hermiticity_residual(q: &ComplexMatrix) -> f64 {
    let n = q.frobenius_norm();
    let r = (q - &q.adjoint()).frobenius_norm();
    if n > 0.0 {
        r / n
    } else {
        r
    }
}

/// `‖qH − H†q‖_F / (‖q‖_F‖H‖_F)`.
pub fn selfadjointness_residual(q: &ComplexMatrix, h: &ComplexMatrix) -> f64 {
    let r = (&(q * h) - &(&h.adjoint() * q)).frobenius_norm();
    let scale = q.frobenius_norm() * h.frobenius_norm();
    if scale > 0.0 {
        r / scale
    } else {
        r
    }
}

/// Orthonormal basis of the span of `vectors`.
fn orthonormal_span(vectors: &[Vec<C64>], dim: usize, tol: f64) -> Result<Vec<Vec<C64>>> {
    let mut cols: Vec<Vec<C64>> = vectors.to_vec();
    cols.resize(dim, vec![ZERO; dim]);
    let m = ComplexMatrix::from_columns(&cols)?;
    let (u, s, _) = m.svd()?;
    let cutoff = tol * s.first().copied().unwrap_or(0.0);
    Ok((0..dim).filter(|&k| s[k] > cutoff && s[k] > 0.0).map(|k| u.column(k)).collect())
}

/// Eigenvalues of `B†·herm(q)·B` for an orthonormal `B`; the subspace
/// kernel dimension counts eigenvalues within `tol·max|λ|` of zero.
pub fn positivity_on_subspace(q: &ComplexMatrix, basis: &[Vec<C64>], tol: f64) -> Result<PositivityReport> {
    let herm = q.hermitian_part();
    let k = basis.len();
    if k == 0 {
        return Err(MetricError::OutsidePhysicalSpace);
    }
    let images: Vec<Vec<C64>> = basis.iter().map(|b| herm.apply(b)).collect();
    let g = ComplexMatrix::from_fn(k, |i, j| inner(&basis[i], &images[j]));
    let (vals, _) = g.hermitian_eigen()?;
    let min = vals[0];
    let max = vals[k - 1];
    let zero_band = tol * max.abs().max(min.abs()).max(1.0);
    let kernel_dimension = vals.iter().filter(|v| v.abs() <= zero_band).count();
    let status = if min > zero_band {
        PositivityStatus::Positive
    } else if min >= -zero_band {
        PositivityStatus::Degenerate
    } else {
        PositivityStatus::Indefinite
    };
    Ok(PositivityReport {
        hermiticity_residual: hermiticity_residual(q),
        min_eigenvalue: min,
        max_eigenvalue: max,
        kernel_dimension,
        status,
    })
}

/// Orthonormal basis of `H′` from the spectral data.
pub fn physical_basis(sd: &SpectralData) -> Result<Vec<Vec<C64>>> {
    let vs: Vec<Vec<C64>> = sd.spect_indices().iter().map(|&k| sd.right(k)).collect();
    orthonormal_span(&vs, sd.right_vectors().dim(), sd.tol())
}

/// Positivity of `q` on `H′`. In the complex-spectrum regime the status is
/// not applicable, though the eigenvalues are still reported.
pub fn positivity_report(q: &ComplexMatrix, sd: &SpectralData, tol: f64) -> Result<PositivityReport> {
    let basis = physical_basis(sd)?;
    let mut rep = positivity_on_subspace(q, &basis, tol)?;
    rep.kernel_dimension += q.dim() - basis.len();
    if !sd.is_real_spectrum() {
        rep.status = PositivityStatus::NotApplicableComplexSpectrum;
    }
    Ok(rep)
}

/// Vectors with `⟨v|S|v⟩ > 0` and `< 0`: coordinate vectors when the
/// diagonal of `S` has both signs, eigenvectors of `S` otherwise.
pub fn s_indefiniteness_witness(s: &ComplexMatrix, tol: f64) -> Result<(Vec<C64>, Vec<C64>)> {
    let n = s.dim();
    let d = s.diagonal();
    let scale = s.max_abs().max(f64::MIN_POSITIVE);
    let plus = (0..n).find(|&k| d[k].re > tol * scale);
    let minus = (0..n).find(|&k| d[k].re < -tol * scale);
    if let (Some(p), Some(m)) = (plus, minus) {
        return Ok((unit_vector(n, p), unit_vector(n, m)));
    }
    let (vals, vecs) = s.hermitian_eigen()?;
    let lo = vals[0];
    let hi = vals[n - 1];
    let band = tol * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    if lo < -band && hi > band {
        Ok((vecs.column(n - 1), vecs.column(0)))
    } else {
        Err(MetricError::Semidefinite)
    }
}

/// One point of a norm time series.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NormSample {
    pub t: f64,
    pub dirac_norm: f64,
    pub q_norm: f64,
}

/// `⟨ψ(t)|ψ(t)⟩` and `Re⟨ψ(t)|q|ψ(t)⟩` for `ψ(t) = e^{−iHt}P_{H′}ψ`,
/// propagated through the eigendecomposition.
pub fn norm_series(sd: &SpectralData, q: &ComplexMatrix, state: &[C64], t_grid: &[f64]) -> Result<Vec<NormSample>> {
    let dim = sd.right_vectors().dim();
    if state.len() != dim || q.dim() != dim {
        return Err(MetricError::DimensionMismatch { expected: dim, found: state.len().max(q.dim()) });
    }
    let spect = sd.spect_indices();
    let coeffs: Vec<C64> = spect.iter().map(|&k| inner(&sd.dual(k), state)).collect();
    let projected_norm: f64 = {
        let mut v = vec![ZERO; dim];
        for (&k, a) in spect.iter().zip(&coeffs) {
            for (o, x) in v.iter_mut().zip(sd.right(k)) {
                *o += a * x;
            }
        }
        norm(&v)
    };
    if projected_norm <= sd.tol() * norm(state) {
        return Err(MetricError::OutsidePhysicalSpace);
    }
    let rights: Vec<Vec<C64>> = spect.iter().map(|&k| sd.right(k)).collect();
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if !t.is_finite() {
            return Err(MetricError::NonFinite("time grid".into()));
        }
        let mut v = vec![ZERO; dim];
        for ((&k, a), r) in spect.iter().zip(&coeffs).zip(&rights) {
            let phase = (C64::new(0.0, -t) * sd.eigenvalue(k)).exp() * a;
            for (o, x) in v.iter_mut().zip(r) {
                *o += phase * x;
            }
        }
        out.push(NormSample { t, dirac_norm: norm(&v).powi(2), q_norm: inner(&v, &q.apply(&v)).re });
    }
    Ok(out)
}

fn relative_drift(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let first = values.clone().next().unwrap_or(0.0);
    let scale = first.abs().max(f64::MIN_POSITIVE);
    values.map(|x| (x - first).abs() / scale).fold(0.0, f64::max)
}

/// Largest relative drift of `⟨ψ(t)|q|ψ(t)⟩` over the grid.
pub fn unitarity_check(sd: &SpectralData, q: &ComplexMatrix, state: &[C64], t_grid: &[f64]) -> Result<f64> {
    let series = norm_series(sd, q, state, t_grid)?;
    Ok(relative_drift(series.iter().map(|s| s.q_norm)))
}

/// Largest relative drift of the Dirac norm over the grid.
pub fn dirac_drift(series: &[NormSample]) -> f64 {
    relative_drift(series.iter().map(|s| s.dirac_norm))
}

/// Evenly spaced grid `0, t_max/(steps−1), …, t_max`.
pub fn time_grid(t_max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..steps).map(|k| t_max * k as f64 / (steps - 1) as f64).collect(),
    }
}

/// `G_jk = ⟨ψ_j|q|ψ_k⟩` over `selection`.
pub fn q_gram(q: &ComplexMatrix, sd: &SpectralData, selection: &[usize]) -> ComplexMatrix {
    let vs: Vec<Vec<C64>> = selection.iter().map(|&k| sd.right(k)).collect();
    let qv: Vec<Vec<C64>> = vs.iter().map(|v| q.apply(v)).collect();
    ComplexMatrix::from_fn(selection.len(), |i, j| inner(&vs[i], &qv[j]))
}

/// Largest Gram entry off the pairing permutation, and the largest
/// on-pairing entry.
pub fn gram_structure(q: &ComplexMatrix, sd: &SpectralData, selection: &[usize]) -> (f64, f64) {
    let g = q_gram(q, sd, selection);
    let mut off: f64 = 0.0;
    let mut on: f64 = 0.0;
    for (i, &j) in selection.iter().enumerate() {
        for (b, &k) in selection.iter().enumerate() {
            let x = g[(i, b)].norm();
            if sd.pairing(k) == j {
                on = on.max(x);
            } else {
                off = off.max(x);
            }
        }
    }
    (off, on)
}

#[derive(Clone, Debug, Serialize)]
pub struct Equivalence {
    pub is_equivalent: bool,
    /// `d_k = G₂(k̄,k)/G₁(k̄,k)` per selected eigenvector.
    pub scalars: Vec<f64>,
    pub max_off_pairing: f64,
    pub max_scalar_imag: f64,
}

/// Whether `q₂ = q₁·D` on the selected eigenvectors with `D` positive and
/// diagonal in the eigenbasis: both Grams must vanish off the pairing and
/// every ratio of paired entries must be real positive.
pub fn equivalence_up_to_positive_diagonal(
    q1: &ComplexMatrix,
    q2: &ComplexMatrix,
    sd: &SpectralData,
    selection: &[usize],
    tol: f64,
) -> Equivalence {
    let g1 = q_gram(q1, sd, selection);
    let g2 = q_gram(q2, sd, selection);
    let (off1, on1) = gram_structure(q1, sd, selection);
    let (off2, on2) = gram_structure(q2, sd, selection);
    let max_off = (off1 / on1.max(1.0)).max(off2 / on2.max(1.0));
    let pos = |k: usize| selection.iter().position(|&j| j == k);
    let mut scalars = Vec::with_capacity(selection.len());
    let mut max_imag: f64 = 0.0;
    let mut ok = max_off <= tol;
    for (b, &k) in selection.iter().enumerate() {
        match pos(sd.pairing(k)) {
            Some(a) => {
                let d = g2[(a, b)] / g1[(a, b)];
                let rel_imag = d.im.abs() / d.norm().max(f64::MIN_POSITIVE);
                max_imag = max_imag.max(rel_imag);
                ok &= d.is_finite() && d.re > 0.0 && rel_imag <= tol;
                scalars.push(d.re);
            }
            None => {
                ok = false;
                scalars.push(f64::NAN);
            }
        }
    }
    Equivalence { is_equivalent: ok, scalars, max_off_pairing: max_off, max_scalar_imag: max_imag }
}

/// `max_v ‖(C² − 1)v‖/‖v‖` over the selected eigenvectors.
pub fn involution_check(c: &ComplexMatrix, sd: &SpectralData, selection: &[usize]) -> f64 {
    selection
        .iter()
        .map(|&k| {
            let v = sd.right(k);
            let cv = c.apply(&c.apply(&v));
            let d: Vec<C64> = cv.iter().zip(&v).map(|(a, b)| a - b).collect();
            norm(&d) / norm(&v)
        })
        .fold(0.0, f64::max)
}

/// Summary written alongside every constructed metric.
#[derive(Clone, Debug, Serialize)]
pub struct MetricReport {
    pub method: String,
    pub convention: String,
    pub hermiticity_residual: f64,
    #[serde(rename = "min_q_eigenvalue_on_Hprime")]
    pub min_q_eigenvalue_on_hprime: f64,
    pub kernel_dimension: usize,
    pub selfadjointness_residual: f64,
    pub unitarity_drift: Option<f64>,
    pub positivity_status: PositivityStatus,
    pub gram_off_pairing: f64,
    pub sector_scalars: Option<Vec<f64>>,
    pub passed: bool,
    pub notes: Vec<String>,
}

/// Inputs of [`metric_report`] beyond the metric itself.
#[derive(Clone, Debug)]
pub struct ReportOptions<'a> {
    pub method: &'a str,
    pub convention: &'a str,
    pub tol: f64,
    /// Coordinate subspace to test positivity on instead of `H′`.
    pub domain: Option<&'a [usize]>,
    pub state: Option<&'a [C64]>,
    pub t_grid: &'a [f64],
    /// Reference metric and eigenvector selection for the scalar comparison.
    pub reference: Option<(&'a ComplexMatrix, &'a [usize])>,
    pub notes: Vec<String>,
}

/// Runs every applicable diagnostic. The report passes when `q` is
/// Hermitian and `H` self-adjoint under it to `10·tol`, and, for a real
/// spectrum, `q` is positive and the norm drift stays within `100·tol`.
pub fn metric_report(
    sys: &PseudoHermitianSystem,
    sd: &SpectralData,
    q: &ComplexMatrix,
    opts: &ReportOptions<'_>,
) -> Result<MetricReport> {
    if q.dim() != sys.dim() {
        return Err(MetricError::DimensionMismatch { expected: sys.dim(), found: q.dim() });
    }
    let tol = opts.tol;
    let pos = match opts.domain {
        Some(idx) => {
            let basis: Vec<Vec<C64>> = idx.iter().map(|&k| unit_vector(q.dim(), k)).collect();
            let mut rep = positivity_on_subspace(q, &basis, tol)?;
            rep.kernel_dimension += q.dim() - idx.len();
            if !sd.is_real_spectrum() {
                rep.status = PositivityStatus::NotApplicableComplexSpectrum;
            }
            rep
        }
        None => positivity_report(q, sd, tol)?,
    };
    let selfadj = selfadjointness_residual(q, sys.h());
    let drift = match opts.state {
        Some(state) => Some(unitarity_check(sd, q, state, opts.t_grid)?),
        None => None,
    };
    let (off, on) = gram_structure(q, sd, &sd.spect_indices());
    let gram_off = off / on.max(f64::MIN_POSITIVE);
    let scalars =
        opts.reference.map(|(q_ref, sel)| equivalence_up_to_positive_diagonal(q_ref, q, sd, sel, tol.sqrt()).scalars);
    let real = sd.is_real_spectrum();
    let mut passed = pos.hermiticity_residual <= 10.0 * tol && selfadj <= 10.0 * tol;
    if real {
        passed &= pos.status == PositivityStatus::Positive;
        if let Some(d) = drift {
            passed &= d <= 100.0 * tol;
        }
    }
    Ok(MetricReport {
        method: opts.method.to_string(),
        convention: opts.convention.to_string(),
        hermiticity_residual: pos.hermiticity_residual,
        min_q_eigenvalue_on_hprime: pos.min_eigenvalue,
        kernel_dimension: pos.kernel_dimension,
        selfadjointness_residual: selfadj,
        unitarity_drift: drift,
        positivity_status: pos.status,
        gram_off_pairing: gram_off,
        sector_scalars: scalars,
        passed,
        notes: opts.notes.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{I, ONE};
    use crate::spectral::spectral_metric;

    fn toy_pt() -> PseudoHermitianSystem {
        // eigenvalues 1.5 ± √0.1875, real; P-pseudo-Hermitian.
        let h = ComplexMatrix::from_rows(&[vec![ONE, I * 0.25], vec![I * 0.25, C64::new(2.0, 0.0)]]).unwrap();
        PseudoHermitianSystem::new(h, ComplexMatrix::from_real_diagonal(&[1.0, -1.0]), 1e-10).unwrap()
    }

    #[test]
    fn identity_is_positive() {
        let sys = toy_pt();
        let (sd, _) = spectral_metric(&sys).unwrap();
        let r = positivity_report(&ComplexMatrix::identity(2), &sd, 1e-10).unwrap();
        assert_eq!(r.status, PositivityStatus::Positive);
        assert!((r.min_eigenvalue - 1.0).abs() < 1e-14);
        let p = positivity_report(sys.s(), &sd, 1e-10).unwrap();
        assert_eq!(p.status, PositivityStatus::Indefinite);
    }

    #[test]
    fn spectral_q_is_positive_and_conserved() {
        let sys = toy_pt();
        let (sd, q) = spectral_metric(&sys).unwrap();
        let r = positivity_report(&q, &sd, 1e-10).unwrap();
        assert_eq!(r.status, PositivityStatus::Positive);
        let psi = vec![C64::new(0.3, 0.2), C64::new(-0.7, 0.1)];
        let grid = time_grid(10.0, 101);
        assert!(unitarity_check(&sd, &q, &psi, &grid).unwrap() < 1e-12);
        let series = norm_series(&sd, &q, &psi, &grid).unwrap();
        assert!(dirac_drift(&series) > 1e-6);
        assert_eq!(unitarity_check(&sd, &ComplexMatrix::identity(2), &psi, &[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn witnesses() {
        let p = ComplexMatrix::from_real_diagonal(&[1.0, -1.0, -1.0]);
        let (vp, vm) = s_indefiniteness_witness(&p, 1e-12).unwrap();
        assert_eq!(vp, unit_vector(3, 0));
        assert_eq!(vm, unit_vector(3, 1));
        assert!(matches!(s_indefiniteness_witness(&ComplexMatrix::identity(3), 1e-12), Err(MetricError::Semidefinite)));
        let d = ComplexMatrix::from_real_diagonal(&[1.0, -2.0]);
        let (vp, vm) = s_indefiniteness_witness(&d, 1e-12).unwrap();
        assert_eq!((vp, vm), (unit_vector(2, 0), unit_vector(2, 1)));
        // zero diagonal, indefinite through the off-diagonal
        let x = ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]).unwrap();
        let (vp, vm) = s_indefiniteness_witness(&x, 1e-12).unwrap();
        assert!(inner(&vp, &x.apply(&vp)).re > 0.5 && inner(&vm, &x.apply(&vm)).re < -0.5);
    }

    #[test]
    fn equivalence_scaling() {
        let sys = toy_pt();
        let (sd, q) = spectral_metric(&sys).unwrap();
        let all = sd.spect_indices();
        let same = equivalence_up_to_positive_diagonal(&q, &q, &sd, &all, 1e-10);
        assert!(same.is_equivalent && same.scalars.iter().all(|s| (s - 1.0).abs() < 1e-12));
        let twice = equivalence_up_to_positive_diagonal(&q, &q.scale(C64::new(2.0, 0.0)), &sd, &all, 1e-10);
        assert!(twice.is_equivalent && twice.scalars.iter().all(|s| (s - 2.0).abs() < 1e-12));
        let neg = equivalence_up_to_positive_diagonal(&q, &q.scale(C64::new(-1.0, 0.0)), &sd, &all, 1e-10);
        assert!(!neg.is_equivalent);
        let flat = equivalence_up_to_positive_diagonal(&q, &ComplexMatrix::identity(2), &sd, &all, 1e-10);
        assert!(!flat.is_equivalent);
    }

    #[test]
    fn parity_is_an_involution() {
        let sys = toy_pt();
        let (sd, _) = spectral_metric(&sys).unwrap();
        assert_eq!(involution_check(sys.s(), &sd, &[0, 1]), 0.0);
    }

    #[test]
    fn time_grid_points() {
        let g = time_grid(10.0, 101);
        assert_eq!(g.len(), 101);
        assert_eq!(g[100], 10.0);
        assert!((g[1] - 0.1).abs() < 1e-15);
        assert_eq!(time_grid(1.0, 1), vec![0.0]);
    }

    #[test]
    fn report_flags_dirac_metric() {
        let sys = toy_pt();
        let (sd, q) = spectral_metric(&sys).unwrap();
        let grid = time_grid(1.0, 11);
        let state = vec![ONE, ONE];
        let opts = ReportOptions {
            method: "spectral",
            convention: "dirac-normalized",
            tol: 1e-10,
            domain: None,
            state: Some(&state),
            t_grid: &grid,
            reference: None,
            notes: vec![],
        };
        assert!(metric_report(&sys, &sd, &q, &opts).unwrap().passed);
        assert!(!metric_report(&sys, &sd, &ComplexMatrix::identity(2), &opts).unwrap().passed);
    }
}
