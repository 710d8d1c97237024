//! Acceptance run on the Lee model at (m_θ, m_V, m_N, n_max) = (1, 1.5, 1, 8).
//!
//! One line per criterion; the process exits nonzero if any criterion fails.

use std::fs;
use std::path::Path;

use qmetric::cli::{cmd_build, cmd_evolve, interior_sector_indices, BuildArgs, CommonArgs, EvolveArgs, Method};
use qmetric::fock::{parity_matrix, FockBasis};
use qmetric::generator::{build_q_generator, check_family, cprime_consistency, GeneratorFamily};
use qmetric::lee::{self, LeeParams};
use qmetric::matrix::{inner, ComplexMatrix, C64, ONE};
use qmetric::spectral::{similarity_residual, spectral_metric, PseudoHermitianSystem, SpectralData};
use qmetric::verify::{
    dirac_drift, equivalence_up_to_positive_diagonal, hermiticity_residual, involution_check, norm_series,
    positivity_report, s_indefiniteness_witness, selfadjointness_residual, time_grid, unitarity_check,
    PositivityStatus,
};

const TOL: f64 = 1e-10;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn params(g: f64) -> LeeParams {
    LeeParams::new(1.0, 1.5, 1.0, g, 8).unwrap()
}

struct Model {
    params: LeeParams,
    basis: FockBasis,
    sys: PseudoHermitianSystem,
    sd: SpectralData,
    q: ComplexMatrix,
}

fn model(g: f64) -> Model {
    let params = params(g);
    let (basis, sys) = lee::lee_system(&params).unwrap();
    let (sd, q) = spectral_metric(&sys).unwrap();
    Model { params, basis, sys, sd, q }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Largest distance between two eigenvalue pairs under the better matching.
fn pair_distance(x: &[C64], y: [C64; 2]) -> f64 {
    let direct = (x[0] - y[0]).norm().max((x[1] - y[1]).norm());
    let swapped = (x[0] - y[1]).norm().max((x[1] - y[0]).norm());
    direct.min(swapped)
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn pseudo_hermiticity_gate() -> Check {
    let m = model(0.05);
    let r = similarity_residual(m.sys.h(), m.sys.s());
    let p = parity_matrix(&m.basis);
    let flip = (&(&(&p * &m.sys.h().adjoint()) * &p) - m.sys.h()).frobenius_norm();
    ensure(r <= 1e-12 && flip <= 1e-12, format!("‖SH − H†S‖ rel {r:.2e}, ‖PH†P − H‖ {flip:.2e}"))
}

fn eigenvalue_oracle() -> Check {
    let mut worst: f64 = 0.0;
    let mut without_shift: f64 = 0.0;
    for g in [0.0, 0.05, 0.1, 0.2] {
        let p = params(g);
        let basis = p.basis().unwrap();
        let h = lee::build_hamiltonian(&p, &basis).unwrap();
        for n in 0..=7 {
            let (a, b) = lee::sector_indices(&basis, n).unwrap();
            let block = h.submatrix(&[a, b]);
            let (vals, _) = block.eigen().unwrap();
            let (em, ep) = lee::closed_form_energies(&p, n);
            worst = worst.max(pair_distance(&vals, [em, ep]));
            // the radical without the (n+1) factor, for contrast
            let center = C64::new(0.5 * (em + ep).re, 0.0);
            let s0 = C64::new(p.mu() * p.mu() - 4.0 * g * g, 0.0).sqrt();
            without_shift = without_shift.max(pair_distance(&vals, [center - 0.5 * s0, center + 0.5 * s0]));
        }
    }
    ensure(
        worst <= 1e-12 && without_shift > 1e-3,
        format!("max |E_closed − E_2x2| {worst:.2e}; without (n+1) {without_shift:.2e}"),
    )
}

fn spectral_metric_check() -> Check {
    let m = model(0.05);
    let herm = hermiticity_residual(&m.q);
    let pos = positivity_report(&m.q, &m.sd, TOL).unwrap();
    let sa = selfadjointness_residual(&m.q, m.sys.h());
    ensure(
        herm <= 1e-10 && pos.status == PositivityStatus::Positive && pos.min_eigenvalue > 0.0 && sa <= 1e-10,
        format!("hermiticity {herm:.2e}, min eig on H′ {:.4}, ‖qH − H†q‖ rel {sa:.2e}", pos.min_eigenvalue),
    )
}

fn generator_metric_check() -> Check {
    let m = model(0.05);
    let fam: GeneratorFamily = lee::generator_family(&m.params, &m.basis).unwrap();
    let mut worst = [0.0f64; 3];
    for r in check_family(m.sys.h(), &fam).map_err(|e| e.to_string())? {
        worst = [worst[0].max(r.i), worst[1].max(r.ii), worst[2].max(r.iii)];
    }
    let (dev, _) = cprime_consistency(&fam, m.sys.s()).unwrap();
    let qg = build_q_generator(&fam, &m.sd).unwrap();
    let eq = equivalence_up_to_positive_diagonal(&m.q, &qg, &m.sd, &m.sd.spect_indices(), 1e-8);
    let positive = eq.scalars.iter().all(|&s| s > 0.0);
    ensure(
        worst.iter().all(|&w| w <= 1e-10) && dev <= 1e-8 && eq.is_equivalent && positive,
        format!(
            "conditions (i, ii, iii) ≤ ({:.1e}, {:.1e}, {:.1e}), c′ deviation {dev:.1e}, off-pairing {:.1e}",
            worst[0], worst[1], worst[2], eq.max_off_pairing
        ),
    )
}

fn closed_form_check() -> Check {
    let m = model(0.05);
    let qc = lee::closed_form_q(&m.params, &m.basis).unwrap();
    let interior = interior_sector_indices(&m.basis, &m.sd);
    let eq = equivalence_up_to_positive_diagonal(&m.q, &qc, &m.sd, &interior, 1e-8);
    let mut ident: f64 = 0.0;
    let mut norm_dev: f64 = 0.0;
    for n in 0..=7 {
        let (a, b) = lee::sector_identities(m.params.mu(), m.params.formula_coupling(), n);
        ident = ident.max(a).max(b);
        let (raw, _) = lee::raw_sector_states(&m.params, &m.basis, n).unwrap();
        let v = inner(&raw, &qc.apply(&raw));
        norm_dev = norm_dev.max((v - C64::new(factorial(n), 0.0)).norm() / factorial(n));
    }
    ensure(
        interior.len() == 16 && eq.is_equivalent && ident <= 1e-12 && norm_dev <= 1e-8,
        format!(
            "{} interior eigenvectors, off-pairing {:.1e}, identities {ident:.1e}, ⟨Ψ|q|Ψ⟩/n! − 1 ≤ {norm_dev:.1e}",
            interior.len(),
            eq.max_off_pairing
        ),
    )
}

fn involution_check_criterion() -> Check {
    let m = model(0.05);
    let qc = lee::closed_form_q(&m.params, &m.basis).unwrap();
    let c = lee::c_operator(&qc, m.sys.s()).unwrap();
    let interior = interior_sector_indices(&m.basis, &m.sd);
    let r = involution_check(&c, &m.sd, &interior);
    ensure(r <= 1e-8, format!("max ‖(C² − 1)v‖ {r:.2e} over {} eigenvectors", interior.len()))
}

fn unitarity_criterion() -> Check {
    let m = model(0.05);
    let qc = lee::closed_form_q(&m.params, &m.basis).unwrap();
    let grid = time_grid(10.0, 101);
    let mut q_drift: f64 = 0.0;
    let mut d_drift = f64::INFINITY;
    for seed in [1, 2, 3] {
        let state = lee::sector_superposition(&m.basis, seed);
        for q in [&m.q, &qc] {
            q_drift = q_drift.max(unitarity_check(&m.sd, q, &state, &grid).unwrap());
        }
        let series = norm_series(&m.sd, &m.q, &state, &grid).unwrap();
        d_drift = d_drift.min(dirac_drift(&series));
    }
    ensure(q_drift <= 1e-8 && d_drift >= 1e-6, format!("max q-norm drift {q_drift:.2e}, min Dirac drift {d_drift:.2e}"))
}

fn hermitian_limit() -> Check {
    let m = model(0.0);
    let fam = lee::generator_family(&m.params, &m.basis).unwrap();
    let qg = build_q_generator(&fam, &m.sd).unwrap();
    let qc = lee::closed_form_q(&m.params, &m.basis).unwrap();
    let dim = m.basis.dim();
    let id = ComplexMatrix::identity(dim);
    // every eigenvector is physical at g = 0, so H′ is the full space
    let full = m.sd.spect_indices().len() == dim;
    let e_spec = (&m.q - &id).max_abs();
    let e_gen = (&qg - &id).max_abs();
    let domain = lee::closed_form_domain(&m.basis);
    let e_closed = (&qc.submatrix(&domain) - &ComplexMatrix::identity(domain.len())).max_abs();
    let p = m.sys.s();
    let c_closed = (&lee::c_operator(&qc, p).unwrap().submatrix(&domain) - &p.submatrix(&domain)).max_abs();
    let c_spec = (&lee::c_operator(&m.q, p).unwrap() - p).max_abs();
    ensure(
        full && e_spec <= 1e-12 && e_gen <= 1e-12 && e_closed <= 1e-12 && c_closed == 0.0 && c_spec <= 1e-12,
        format!(
            "|q − 1|: spectral {e_spec:.1e}, generator {e_gen:.1e}, closed-form {e_closed:.1e} on n_V + n_N ≤ 1; \
             |C − P| closed-form {c_closed:.1e}, spectral {c_spec:.1e}"
        ),
    )
}

fn broken_regime() -> Check {
    let m = model(0.2);
    let mut pairs = 0;
    let mut diag: f64 = 0.0;
    let mut cross: f64 = 0.0;
    for n in 1..=7 {
        let (em, ep) = lee::closed_form_energies(&m.params, n);
        if em.im == 0.0 || (em - ep.conj()).norm() > 1e-14 {
            return Err(format!("sector {n} not a conjugate pair"));
        }
        for e in [em, ep] {
            let found: Vec<usize> = (0..m.sd.len()).filter(|&k| (m.sd.eigenvalue(k) - e).norm() < 1e-9).collect();
            let [k] = found[..] else {
                return Err(format!("sector {n}: eigenvalue {e} matched {} times", found.len()));
            };
            let kb = m.sd.pairing(k);
            if (m.sd.eigenvalue(kb) - e.conj()).norm() > 1e-9 {
                return Err(format!("sector {n}: partner of {e} is {}", m.sd.eigenvalue(kb)));
            }
            let v = m.sd.right(k);
            diag = diag.max(inner(&v, &m.q.apply(&v)).norm());
            cross = cross.max((inner(&m.sd.right(kb), &m.q.apply(&v)) - ONE).norm());
            pairs += 1;
        }
    }
    ensure(
        pairs == 14 && diag <= 1e-8 && cross <= 1e-8,
        format!("{} complex eigenvalues, max |⟨ψ_E|q|ψ_E⟩| {diag:.1e}, max |⟨ψ_Ē|q|ψ_E⟩ − 1| {cross:.1e}", pairs),
    )
}

fn indefiniteness_witness() -> Check {
    let basis = FockBasis::new(8).unwrap();
    let p = parity_matrix(&basis);
    let (vp, vm) = s_indefiniteness_witness(&p, TOL).map_err(|e| e.to_string())?;
    let sp = inner(&vp, &p.apply(&vp)).re;
    let sm = inner(&vm, &p.apply(&vm)).re;
    ensure(sp > 0.0 && sm < 0.0, format!("⟨v₊|P|v₊⟩ = {sp}, ⟨v₋|P|v₋⟩ = {sm}"))
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn determinism() -> Check {
    let work = tempfile::tempdir().unwrap();
    let cfg = work.path().join("lee.json");
    fs::write(&cfg, r#"{"model":"lee","m_theta":1.0,"m_V":1.5,"m_N":1.0,"g":0.05,"n_max":8}"#).unwrap();
    let common = CommonArgs { config: cfg, tol: None, seed: Some(11) };
    let mut runs = Vec::new();
    for run in ["a", "b"] {
        let out = work.path().join(run);
        let build = BuildArgs { common: common.clone(), method: Some(Method::All), out: Some(out.clone()) };
        let code = cmd_build(&build).map_err(|e| e.to_string())?.code;
        let evolve = EvolveArgs {
            common: common.clone(),
            q: None,
            method: Method::Spectral,
            state: "random".into(),
            t_max: 10.0,
            steps: 101,
            out: Some(out.clone()),
        };
        let code_e = cmd_evolve(&evolve).map_err(|e| e.to_string())?.code;
        if code != 0 || code_e != 0 {
            return Err(format!("run {run} exited {code}/{code_e}"));
        }
        runs.push(read_dir_bytes(&out));
    }
    let names: Vec<&str> = runs[0].iter().map(|(n, _)| n.as_str()).collect();
    ensure(
        runs[0] == runs[1] && names.len() == 9,
        format!("{} artifacts byte-identical: {}", names.len(), names.join(" ")),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("pseudo-Hermiticity gate", pseudo_hermiticity_gate),
        ("eigenvalue oracle", eigenvalue_oracle),
        ("spectral metric", spectral_metric_check),
        ("generator metric", generator_metric_check),
        ("closed-form metric", closed_form_check),
        ("involution", involution_check_criterion),
        ("unitarity", unitarity_criterion),
        ("Hermitian limit", hermitian_limit),
        ("broken regime", broken_regime),
        ("indefiniteness witness", indefiniteness_witness),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (tag, detail) = match std::panic::catch_unwind(check) {
            Ok(Ok(d)) => ("PASS", d),
            Ok(Err(d)) => ("FAIL", d),
            Err(_) => ("FAIL", "panicked".to_string()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("criterion {:>2} {tag} {name}: {detail}", i + 1);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
