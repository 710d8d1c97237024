//! Spectral construction of the metric: biorthogonal eigendecomposition of a
//! pseudo-Hermitian `H`, the S-quadratic form, spectrum filtering, phase
//! coefficients `c_E`, `A = Σ c_E P_E` and `q = S·A`.
//!
//! Eigenvectors are Dirac-normalized before any coefficient is computed, so
//! `q` is reproducible; metrics built under other normalizations agree with
//! it up to a positive scale per eigenvector.

use serde::Serialize;

use crate::error::{MetricError, Result};
use crate::matrix::{inner, norm, outer, scaled, ComplexMatrix, C64, ONE, ZERO};

/// `(H, S)` satisfying `H = S⁻¹H†S` with self-adjoint invertible `S`.
#[derive(Clone, Debug)]
pub struct PseudoHermitianSystem {
    h: ComplexMatrix,
    s: ComplexMatrix,
    tol: f64,
}

impl PseudoHermitianSystem {
    pub fn new(h: ComplexMatrix, s: ComplexMatrix, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(MetricError::InvalidParameter(format!("tolerance must be positive, got {tol}")));
        }
        if h.dim() != s.dim() {
            return Err(MetricError::DimensionMismatch { expected: h.dim(), found: s.dim() });
        }
        if !h.is_finite() || !s.is_finite() {
            return Err(MetricError::NonFinite("H or S".into()));
        }
        let s_norm = s.frobenius_norm();
        let asym = (&s - &s.adjoint()).frobenius_norm();
        if asym > tol * s_norm {
            return Err(MetricError::NotSelfAdjoint { residual: asym / s_norm.max(f64::MIN_POSITIVE) });
        }
        let ratio = s.inverse_condition()?;
        if ratio <= tol {
            return Err(MetricError::Singular { ratio });
        }
        let residual = similarity_residual(&h, &s);
        if residual > tol {
            return Err(MetricError::NotPseudoHermitian { residual });
        }
        Ok(Self { h, s, tol })
    }

    pub fn h(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn s(&self) -> &ComplexMatrix {
        &self.s
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn similarity_residual(&self) -> f64 {
        similarity_residual(&self.h, &self.s)
    }
}

/// `‖SH − H†S‖_F / (‖S‖_F‖H‖_F)`, zero exactly when `H = S⁻¹H†S`.
pub fn similarity_residual(h: &ComplexMatrix, s: &ComplexMatrix) -> f64 {
    let lhs = s * h;
    let rhs = &h.adjoint() * s;
    let scale = s.frobenius_norm() * h.frobenius_norm();
    let r = (&lhs - &rhs).frobenius_norm();
    if scale > 0.0 {
        r / scale
    } else {
        r
    }
}

/// `⟨φ|S|ψ⟩`.
pub fn s_form(s: &ComplexMatrix, phi: &[C64], psi: &[C64]) -> Result<C64> {
    if phi.len() != s.dim() || psi.len() != s.dim() {
        return Err(MetricError::DimensionMismatch {
            expected: s.dim(),
            found: if phi.len() != s.dim() { phi.len() } else { psi.len() },
        });
    }
    Ok(inner(phi, &s.apply(psi)))
}

/// `‖S⁻¹H†S − H‖_F / ‖H‖_F`: how far `H` is from being self-adjoint under
/// the S-form. Works on any pair, pseudo-Hermitian or not.
pub fn sharp_adjoint_residual(h: &ComplexMatrix, s: &ComplexMatrix, rcond: f64) -> Result<f64> {
    if h.dim() != s.dim() {
        return Err(MetricError::DimensionMismatch { expected: h.dim(), found: s.dim() });
    }
    let s_inv = s.inverse(rcond)?;
    let sharp = &(&s_inv * &h.adjoint()) * s;
    let hn = h.frobenius_norm();
    let r = (&sharp - h).frobenius_norm();
    Ok(if hn > 0.0 { r / hn } else { r })
}

/// Biorthogonal eigensystem of `H` together with the conjugation pairing,
/// spectrum membership and phase coefficients.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralData {
    eigenvalues: Vec<C64>,
    pairing: Vec<usize>,
    in_spect: Vec<bool>,
    c: Vec<C64>,
    right_vectors: ComplexMatrix,
    dual_vectors: ComplexMatrix,
    #[serde(skip)]
    clusters: Vec<usize>,
    #[serde(skip)]
    radius: f64,
    #[serde(skip)]
    tol: f64,
    #[serde(skip)]
    phases_assigned: bool,
}

impl SpectralData {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, k: usize) -> C64 {
        self.eigenvalues[k]
    }

    /// Dirac-unit right eigenvector `ψ_k`.
    pub fn right(&self, k: usize) -> Vec<C64> {
        self.right_vectors.column(k)
    }

    /// Dual vector `χ_k` with `⟨χ_j|ψ_k⟩ = δ_jk`.
    pub fn dual(&self, k: usize) -> Vec<C64> {
        self.dual_vectors.column(k)
    }

    pub fn right_vectors(&self) -> &ComplexMatrix {
        &self.right_vectors
    }

    pub fn dual_vectors(&self) -> &ComplexMatrix {
        &self.dual_vectors
    }

    pub fn pairing(&self, k: usize) -> usize {
        self.pairing[k]
    }

    pub fn pairings(&self) -> &[usize] {
        &self.pairing
    }

    pub fn in_spect(&self, k: usize) -> bool {
        self.in_spect[k]
    }

    pub fn coefficient(&self, k: usize) -> C64 {
        self.c[k]
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.c
    }

    pub fn phases_assigned(&self) -> bool {
        self.phases_assigned
    }

    /// Eigenvalue-cluster id of index `k`; indices in one cluster share an
    /// eigenvalue within [`Self::radius`].
    pub fn cluster(&self, k: usize) -> usize {
        self.clusters[k]
    }

    pub fn cluster_members(&self, k: usize) -> Vec<usize> {
        let id = self.clusters[k];
        (0..self.len()).filter(|&j| self.clusters[j] == id).collect()
    }

    /// Eigenvalue clustering radius, `tol·‖H‖_F`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// True when every member of the spectrum is paired with itself.
    pub fn is_real_spectrum(&self) -> bool {
        (0..self.len()).filter(|&k| self.in_spect[k]).all(|k| self.pairing[k] == k)
    }

    pub fn spect_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.in_spect[k]).collect()
    }

    /// `Σ_{k ∈ idx} |ψ_k⟩⟨χ_k|`.
    pub fn projector_onto(&self, idx: &[usize]) -> ComplexMatrix {
        let mut p = ComplexMatrix::zeros(self.right_vectors.dim());
        for &k in idx {
            p = &p + &outer(&self.right(k), &self.dual(k));
        }
        p
    }

    /// `P_E` for the eigenvalue of index `k`.
    pub fn eigenprojector(&self, k: usize) -> ComplexMatrix {
        self.projector_onto(&self.cluster_members(k))
    }

    /// `P_{H′}`, the sum of projectors over the spectrum.
    pub fn physical_projector(&self) -> ComplexMatrix {
        self.projector_onto(&self.spect_indices())
    }

    /// Indices whose eigenvalue lies within the cluster radius of `e`.
    pub fn indices_near(&self, e: C64) -> Vec<usize> {
        (0..self.len()).filter(|&k| (self.eigenvalues[k] - e).norm() <= self.radius).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("spectral data serializes")
    }
}

fn sort_key(a: &C64, b: &C64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Multiplies `v` by a phase making its largest-magnitude entry real positive.
fn fix_phase(v: &mut [C64]) {
    let mut best = 0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > v[best].norm() {
            best = i;
        }
    }
    let pivot = v[best];
    if pivot.norm() > 0.0 {
        let phase = pivot.conj() / pivot.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

fn normalized(v: &[C64]) -> Vec<C64> {
    let n = norm(v);
    scaled(v, C64::new(1.0 / n, 0.0))
}

/// Rectangular `A†·S·B` for column families `a`, `b`.
fn cross_gram(s: &ComplexMatrix, a: &[Vec<C64>], b: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let sb: Vec<Vec<C64>> = b.iter().map(|v| s.apply(v)).collect();
    a.iter().map(|ai| sb.iter().map(|sbj| inner(ai, sbj)).collect()).collect()
}

fn combine(cols: &[Vec<C64>], coeffs: &ComplexMatrix, j: usize) -> Vec<C64> {
    let dim = cols[0].len();
    let mut out = vec![ZERO; dim];
    for (i, col) in cols.iter().enumerate() {
        let w = coeffs[(i, j)];
        for (o, x) in out.iter_mut().zip(col) {
            *o += w * x;
        }
    }
    out
}

/// Orthonormal basis of the eigenspace for a cluster of `size` eigenvalues
/// near `center`, from the smallest right singular vectors of `H − center`.
fn cluster_eigenspace(h: &ComplexMatrix, center: C64, size: usize, radius: f64) -> Result<Vec<Vec<C64>>> {
    let shifted = h - &ComplexMatrix::identity(h.dim()).scale(center);
    let (_, s, v) = shifted.svd()?;
    let n = h.dim();
    let sigma_edge = s[n - size];
    if sigma_edge > 10.0 * radius {
        return Err(MetricError::Defective { ratio: sigma_edge });
    }
    Ok((n - size..n).map(|j| v.column(j)).collect())
}

struct Cluster {
    members: Vec<usize>,
    center: C64,
}

fn build_clusters(values: &[C64], order: &[usize], radius: f64) -> Vec<Cluster> {
    let mut id: Vec<usize> = (0..values.len()).collect();
    fn find(id: &mut [usize], mut x: usize) -> usize {
        while id[x] != x {
            id[x] = id[id[x]];
            x = id[x];
        }
        x
    }
    for a in 0..values.len() {
        for b in a + 1..values.len() {
            if (values[a] - values[b]).norm() <= radius {
                let (ra, rb) = (find(&mut id, a), find(&mut id, b));
                if ra != rb {
                    id[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut root_to_cluster = std::collections::BTreeMap::new();
    for &k in order {
        let r = find(&mut id, k);
        let slot = *root_to_cluster.entry(r).or_insert_with(|| {
            clusters.push(Cluster { members: Vec::new(), center: ZERO });
            clusters.len() - 1
        });
        clusters[slot].members.push(k);
    }
    for c in clusters.iter_mut() {
        let sum: C64 = c.members.iter().map(|&k| values[k]).sum();
        c.center = sum / c.members.len() as f64;
    }
    clusters
}

/// Biorthogonal decomposition of `H`.
///
/// Eigenvalues are clustered with radius `tol·‖H‖_F`. Each cluster is paired
/// with the unique cluster at its complex conjugate; within degenerate
/// clusters the basis is rotated so that the S-Gram matrix between a cluster
/// and its partner is diagonal, which fixes the pairing vector by vector.
/// Defective `H` (exceptional points) is rejected.
pub fn decompose(sys: &PseudoHermitianSystem) -> Result<SpectralData> {
    let h = sys.h();
    let s = sys.s();
    let tol = sys.tol();
    let n = h.dim();
    let h_norm = h.frobenius_norm();
    let radius = tol * h_norm.max(f64::MIN_POSITIVE);

    let (raw_values, raw_vectors) = h.eigen()?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sort_key(&raw_values[a], &raw_values[b]));
    let mut clusters = build_clusters(&raw_values, &order, radius);
    clusters.sort_by(|a, b| sort_key(&a.center, &b.center));

    // Orthonormal basis per cluster.
    let mut bases: Vec<Vec<Vec<C64>>> = Vec::with_capacity(clusters.len());
    for c in &clusters {
        if c.members.len() == 1 {
            bases.push(vec![normalized(&raw_vectors.column(c.members[0]))]);
        } else {
            bases.push(cluster_eigenspace(h, c.center, c.members.len(), radius)?);
        }
    }

    // Conjugate partner per cluster.
    let mut partner = vec![usize::MAX; clusters.len()];
    for (a, c) in clusters.iter().enumerate() {
        if c.center.im.abs() <= radius {
            partner[a] = a;
            continue;
        }
        let target = c.center.conj();
        let candidates: Vec<usize> =
            (0..clusters.len()).filter(|&b| b != a && (clusters[b].center - target).norm() <= radius).collect();
        match candidates.as_slice() {
            [] => return Err(MetricError::UnpairedEigenvalue { re: c.center.re, im: c.center.im }),
            [b] => {
                if clusters[*b].members.len() != c.members.len() {
                    return Err(MetricError::AmbiguousPairing {
                        re: c.center.re,
                        im: c.center.im,
                        candidates: clusters[*b].members.len(),
                    });
                }
                partner[a] = *b;
            }
            many => {
                return Err(MetricError::AmbiguousPairing { re: c.center.re, im: c.center.im, candidates: many.len() })
            }
        }
    }

    // Diagonalize the S-Gram within each degenerate cluster pair.
    for a in 0..clusters.len() {
        let b = partner[a];
        let size = bases[a].len();
        if size == 1 || b < a {
            continue;
        }
        if a == b {
            let g = cross_gram(s, &bases[a], &bases[a]);
            let g = ComplexMatrix::from_rows(&g)?;
            let (_, u) = g.hermitian_eigen()?;
            let rotated: Vec<Vec<C64>> = (0..size).map(|j| combine(&bases[a], &u, j)).collect();
            bases[a] = rotated;
        } else {
            // G = Ψ_b† S Ψ_a = U Σ V†  ⇒  (Ψ_b U)† S (Ψ_a V) = Σ.
            let g = ComplexMatrix::from_rows(&cross_gram(s, &bases[b], &bases[a]))?;
            let (u, _, v) = g.svd()?;
            let ra: Vec<Vec<C64>> = (0..size).map(|j| combine(&bases[a], &v, j)).collect();
            let rb: Vec<Vec<C64>> = (0..size).map(|j| combine(&bases[b], &u, j)).collect();
            bases[a] = ra;
            bases[b] = rb;
        }
    }

    // Flatten in cluster order.
    let mut offsets = Vec::with_capacity(clusters.len());
    let mut columns: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut cluster_ids = Vec::with_capacity(n);
    for (a, basis) in bases.iter().enumerate() {
        offsets.push(columns.len());
        for v in basis {
            let mut v = v.clone();
            fix_phase(&mut v);
            columns.push(v);
            cluster_ids.push(a);
        }
    }
    let mut pairing = vec![0; n];
    for a in 0..clusters.len() {
        let b = partner[a];
        for j in 0..bases[a].len() {
            pairing[offsets[a] + j] = offsets[b] + j;
        }
    }

    let eigenvalues: Vec<C64> = columns.iter().map(|v| inner(v, &h.apply(v))).collect();
    for (v, e) in columns.iter().zip(&eigenvalues) {
        let hv = h.apply(v);
        let resid = norm(&crate::matrix::sub(&hv, &scaled(v, *e)));
        if resid > tol * h_norm.max(1.0) {
            return Err(MetricError::InaccurateEigenpair { residual: resid });
        }
    }

    let right = ComplexMatrix::from_columns(&columns)?;
    let ratio = right.inverse_condition()?;
    if ratio < tol.sqrt() {
        return Err(MetricError::Defective { ratio });
    }
    let dual = right.inverse(0.0)?.adjoint();

    let s_op = s.singular_values()?.first().copied().unwrap_or(0.0);
    let in_spect: Vec<bool> = (0..n)
        .map(|k| {
            let g = inner(&columns[pairing[k]], &s.apply(&columns[k]));
            g.is_finite() && g.norm() > tol * s_op
        })
        .collect();

    Ok(SpectralData {
        eigenvalues,
        pairing,
        in_spect,
        c: vec![ZERO; n],
        right_vectors: right,
        dual_vectors: dual,
        clusters: cluster_ids,
        radius,
        tol,
        phases_assigned: false,
    })
}

/// `G_jk = ⟨ψ_j|S|ψ_k⟩` over the Dirac-unit eigenvectors.
pub fn s_gram(sd: &SpectralData, s: &ComplexMatrix) -> ComplexMatrix {
    let r = sd.right_vectors();
    &(&r.adjoint() * s) * r
}

/// Assigns `c_k = 1/⟨ψ_k̄|S|ψ_k⟩` on the spectrum and `c_k = 0` elsewhere.
/// Entries whose reciprocal is not finite are moved out of the spectrum.
pub fn phase_coefficients(sd: &SpectralData, s: &ComplexMatrix) -> Result<SpectralData> {
    if s.dim() != sd.right_vectors.dim() {
        return Err(MetricError::DimensionMismatch { expected: sd.right_vectors.dim(), found: s.dim() });
    }
    let mut out = sd.clone();
    for k in 0..sd.len() {
        if !sd.in_spect[k] {
            out.c[k] = ZERO;
            continue;
        }
        let g = s_form(s, &sd.right(sd.pairing[k]), &sd.right(k))?;
        let c = ONE / g;
        if c.is_finite() {
            out.c[k] = c;
        } else {
            out.in_spect[k] = false;
            out.c[k] = ZERO;
        }
    }
    out.phases_assigned = true;
    Ok(out)
}

/// `Σ_k f(E_k)|ψ_k⟩⟨χ_k|` over the spectrum.
pub fn function_of_h(sd: &SpectralData, f: impl Fn(C64) -> C64) -> Result<ComplexMatrix> {
    let dim = sd.right_vectors.dim();
    let mut out = ComplexMatrix::zeros(dim);
    for k in sd.spect_indices() {
        let w = f(sd.eigenvalues[k]);
        if !w.is_finite() {
            return Err(MetricError::NonFinite(format!("f(E) at E = {}", sd.eigenvalues[k])));
        }
        out = &out + &outer(&sd.right(k), &sd.dual(k)).scale(w);
    }
    Ok(out)
}

/// `A = Σ_k c_k |ψ_k⟩⟨χ_k|`.
pub fn build_a(sd: &SpectralData) -> Result<ComplexMatrix> {
    if !sd.phases_assigned {
        return Err(MetricError::InvalidParameter("phase coefficients not assigned".into()));
    }
    let dim = sd.right_vectors.dim();
    let mut a = ComplexMatrix::zeros(dim);
    for k in sd.spect_indices() {
        a = &a + &outer(&sd.right(k), &sd.dual(k)).scale(sd.c[k]);
    }
    Ok(a)
}

/// `q = S·A`.
pub fn build_q_spectral(sys: &PseudoHermitianSystem, sd: &SpectralData) -> Result<ComplexMatrix> {
    let a = build_a(sd)?;
    Ok(sys.s() * &a)
}

/// Decomposition, phases and `q` in one pass.
pub fn spectral_metric(sys: &PseudoHermitianSystem) -> Result<(SpectralData, ComplexMatrix)> {
    let sd = decompose(sys)?;
    let sd = phase_coefficients(&sd, sys.s())?;
    let q = build_q_spectral(sys, &sd)?;
    Ok((sd, q))
}
