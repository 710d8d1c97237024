//! Command-line driver.
//!
//! Exit codes: 0 success, 1 verification failure, 2 regime or parameter
//! error, 3 I/O error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MetricError, Result};
use crate::fock::FockBasis;
use crate::generator::{build_q_generator, check_family, cprime_consistency, GeneratorFamily};
use crate::io::{format_float, read_json, to_json_string, write_text};
use crate::lee::{self, LeeParams};
use crate::matrix::{norm, scaled, ComplexMatrix, C64};
use crate::spectral::{build_q_spectral, decompose, phase_coefficients, PseudoHermitianSystem, SpectralData};
use crate::verify::{
    dirac_drift, equivalence_up_to_positive_diagonal, involution_check, metric_report, norm_series,
    s_indefiniteness_witness, time_grid, Equivalence, MetricReport, ReportOptions,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_REGIME: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_SEED: u64 = 7;
const REPORT_T_MAX: f64 = 10.0;
const REPORT_STEPS: usize = 101;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Spectral,
    Generator,
    ClosedForm,
    All,
}

impl Method {
    fn expand(self) -> Vec<Method> {
        match self {
            Method::All => vec![Method::Spectral, Method::Generator, Method::ClosedForm],
            m => vec![m],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Spectral => "spectral",
            Method::Generator => "generator",
            Method::ClosedForm => "closed-form",
            Method::All => "all",
        }
    }

    fn file_stem(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            m => m.name(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelConfig {
    Lee(LeeParams),
    Custom {
        h: PathBuf,
        s: PathBuf,
        #[serde(default)]
        generators: Option<PathBuf>,
    },
}

/// Run configuration as read from `--config`.
#[derive(Clone, Debug, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub model: ModelConfig,
    #[serde(default)]
    pub method: Option<Method>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(name = "qmetric", version, about = "Metric operators for pseudo-Hermitian Hamiltonians")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build metrics and write matrices, spectral data and a report.
    Build(BuildArgs),
    /// Check a metric read from disk against the configured Hamiltonian.
    Verify(VerifyArgs),
    /// Propagate a state and write its Dirac and q norms as CSV.
    Evolve(EvolveArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Tolerance in (0, 1e-2); overrides the config.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Metric matrix to check.
    #[arg(long)]
    pub q: PathBuf,
    /// How the metric was built; `closed-form` tests positivity on the
    /// `n_V + n_N ≤ 1` states only.
    #[arg(long, value_enum, default_value = "spectral")]
    pub method: Method,
    /// `random`, `sector:N` or a path to a JSON vector.
    #[arg(long, default_value = "random")]
    pub state: String,
    /// Directory to write the report into.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Metric matrix; built with `--method` when absent.
    #[arg(long)]
    pub q: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "spectral")]
    pub method: Method,
    #[arg(long, default_value = "random")]
    pub state: String,
    #[arg(long, default_value_t = REPORT_T_MAX)]
    pub t_max: f64,
    #[arg(long, default_value_t = REPORT_STEPS)]
    pub steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Result of a subcommand: exit code plus the paths it wrote.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub written: Vec<PathBuf>,
}

/// Maps an error onto the exit-code contract.
pub fn exit_code(err: &MetricError) -> i32 {
    if err.is_io() {
        EXIT_IO
    } else if err.is_regime() {
        EXIT_REGIME
    } else {
        EXIT_VERIFY
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_REGIME } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Evolve(a) => cmd_evolve(a),
    };
    match result {
        Ok(outcome) => outcome.code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Everything the subcommands need from the config.
pub struct Loaded {
    pub model: ModelConfig,
    pub lee: Option<LeeParams>,
    pub basis: Option<FockBasis>,
    pub system: PseudoHermitianSystem,
    pub tol: f64,
    pub seed: u64,
    pub method: Method,
    pub output_dir: PathBuf,
    base_dir: PathBuf,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn validate_tol(tol: f64) -> Result<f64> {
    if tol > 0.0 && tol < 1e-2 {
        Ok(tol)
    } else {
        Err(MetricError::InvalidParameter(format!("tol must lie in (0, 1e-2), got {tol}")))
    }
}

/// Reads the config and builds the validated `(H, S)` pair.
pub fn load(common: &CommonArgs) -> Result<Loaded> {
    let cfg: RunConfig = read_json(&common.config)?;
    let base_dir = common.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let tol = validate_tol(common.tol.or(cfg.tol).unwrap_or(DEFAULT_TOL))?;
    let seed = common.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let method = cfg.method.unwrap_or(Method::All);
    let output_dir = cfg.output_dir.clone().map(|p| resolve(&base_dir, &p)).unwrap_or_else(|| PathBuf::from("out"));
    let (lee, basis, system) = match &cfg.model {
        ModelConfig::Lee(p) => {
            let p = p.with_tol(tol)?;
            lee::check_regime(&p)?;
            let (basis, sys) = lee::lee_system(&p)?;
            (Some(p), Some(basis), sys)
        }
        ModelConfig::Custom { h, s, .. } => {
            let h: ComplexMatrix = read_json(&resolve(&base_dir, h))?;
            let s: ComplexMatrix = read_json(&resolve(&base_dir, s))?;
            (None, None, PseudoHermitianSystem::new(h, s, tol)?)
        }
    };
    Ok(Loaded { model: cfg.model, lee, basis, system, tol, seed, method, output_dir, base_dir })
}

impl Loaded {
    pub fn spectral(&self) -> Result<SpectralData> {
        phase_coefficients(&decompose(&self.system)?, self.system.s())
    }

    /// Evolution state from `random`, `sector:N` or a JSON vector path.
    pub fn state(&self, spec: &str) -> Result<Vec<C64>> {
        let dim = self.system.dim();
        if spec == "random" {
            return Ok(match &self.basis {
                Some(b) => lee::sector_superposition(b, self.seed),
                None => random_state(dim, self.seed),
            });
        }
        if let Some(n) = spec.strip_prefix("sector:") {
            let n: usize =
                n.parse().map_err(|_| MetricError::InvalidParameter(format!("bad sector index in '{spec}'")))?;
            let basis = self
                .basis
                .as_ref()
                .ok_or_else(|| MetricError::InvalidParameter("sector states need the lee model".into()))?;
            return lee::sector_state(basis, n);
        }
        let v: Vec<C64> = read_json(&resolve(&self.base_dir, Path::new(spec)))?;
        if v.len() != dim {
            return Err(MetricError::DimensionMismatch { expected: dim, found: v.len() });
        }
        Ok(v)
    }

    fn family(&self) -> Result<GeneratorFamily> {
        match (&self.model, &self.lee, &self.basis) {
            (ModelConfig::Lee(_), Some(p), Some(b)) => lee::generator_family(p, b),
            (ModelConfig::Custom { generators: Some(path), .. }, _, _) => read_json(&resolve(&self.base_dir, path)),
            _ => Err(MetricError::InvalidParameter("generator method needs a generators file".into())),
        }
    }

    /// Builds `q` by `method` (not `All`), with method-specific diagnostics.
    pub fn build_q(&self, sd: &SpectralData, method: Method) -> Result<(ComplexMatrix, BTreeMap<String, f64>)> {
        let mut diag = BTreeMap::new();
        let q = match method {
            Method::Spectral => build_q_spectral(&self.system, sd)?,
            Method::Generator => {
                let family = self.family()?;
                let residuals = check_family(self.system.h(), &family)?;
                let mut worst = [0.0f64; 3];
                for r in &residuals {
                    worst[0] = worst[0].max(r.i);
                    worst[1] = worst[1].max(r.ii);
                    worst[2] = worst[2].max(r.iii);
                }
                for (name, w) in ["i", "ii", "iii"].iter().zip(worst) {
                    diag.insert(format!("condition_{name}_max"), w);
                    if w > 10.0 * self.tol {
                        return Err(MetricError::ConditionViolated {
                            condition: name,
                            detail: format!("largest residual {w:.3e}"),
                        });
                    }
                }
                let (dev, fit) = cprime_consistency(&family, self.system.s())?;
                diag.insert("cprime_deviation".into(), dev);
                diag.insert("cprime_fit_residual".into(), fit);
                build_q_generator(&family, sd)?
            }
            Method::ClosedForm => match (&self.lee, &self.basis) {
                (Some(p), Some(b)) => lee::closed_form_q(p, b)?,
                _ => return Err(MetricError::InvalidParameter("closed-form metric needs the lee model".into())),
            },
            Method::All => return Err(MetricError::InvalidParameter("build one method at a time".into())),
        };
        Ok((q, diag))
    }

    /// Eigenvector indices lying in the interior sectors (Lee model), or the
    /// whole spectrum otherwise.
    pub fn interior_selection(&self, sd: &SpectralData) -> Vec<usize> {
        match &self.basis {
            Some(b) => interior_sector_indices(b, sd),
            None => sd.spect_indices(),
        }
    }

    fn report_options<'a>(
        &'a self,
        method: Method,
        state: &'a [C64],
        grid: &'a [f64],
        reference: Option<(&'a ComplexMatrix, &'a [usize])>,
        domain: Option<&'a [usize]>,
    ) -> ReportOptions<'a> {
        let mut notes = Vec::new();
        let convention = match (method, self.lee.is_some()) {
            (Method::Spectral, _) => "dirac-normalized eigenvectors",
            (_, true) => "raw (theta^dagger)^n kets",
            (_, false) => "as supplied",
        };
        if self.lee.is_some() {
            notes.push(
                "sector energies use sqrt(mu^2 - 4 g^2 (n+1)); the form without (n+1) disagrees with direct diagonalization"
                    .into(),
            );
            if method != Method::Spectral {
                notes.push("closed-form alpha, beta, generators and q are evaluated at coupling -g".into());
            }
            if method == Method::ClosedForm {
                notes.push(
                    "closed-form q vanishes on the |n,1,1> states; positivity is tested on n_V + n_N <= 1".into(),
                );
            }
            if method == Method::Generator {
                notes.push("generator weights: n! for E_n, (n+1)! for E'_n, |M|0>|^2 for monomial states".into());
            }
        }
        ReportOptions {
            method: method.name(),
            convention,
            tol: self.tol,
            domain,
            state: Some(state),
            t_grid: grid,
            reference,
            notes,
        }
    }
}

fn random_state(dim: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<C64> = (0..dim).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    scaled(&v, C64::new(1.0 / norm(&v), 0.0))
}

/// Eigenvectors with at least `1 − tol` of their weight on interior sector
/// coordinates.
pub fn interior_sector_indices(basis: &FockBasis, sd: &SpectralData) -> Vec<usize> {
    let mut coords = Vec::new();
    for n in 0..basis.n_max() {
        let (a, b) = lee::sector_indices(basis, n).expect("interior sector");
        coords.push(a);
        coords.push(b);
    }
    sd.spect_indices()
        .into_iter()
        .filter(|&k| {
            let v = sd.right(k);
            let w: f64 = coords.iter().map(|&c| v[c].norm_sqr()).sum();
            w >= 1.0 - sd.tol().sqrt()
        })
        .collect()
}

#[derive(Serialize)]
struct Witness {
    v_plus: Vec<C64>,
    v_minus: Vec<C64>,
}

#[derive(Serialize)]
struct BuildReport {
    model: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<LeeParams>,
    dim: usize,
    tol: f64,
    seed: u64,
    similarity_residual: f64,
    real_spectrum: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    s_witness: Option<Witness>,
    methods: BTreeMap<String, MethodSection>,
    passed: bool,
}

#[derive(Serialize)]
struct MethodSection {
    report: MetricReport,
    diagnostics: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    equivalence_to_spectral: Option<Equivalence>,
    #[serde(skip_serializing_if = "Option::is_none")]
    involution_residual: Option<f64>,
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

/// `build`: writes `basis.json` (Lee only), `H.json`, `S.json`,
/// `spectral.json`, `q_<method>.json` and `report.json`.
pub fn cmd_build(args: &BuildArgs) -> Result<Outcome> {
    let loaded = load(&args.common)?;
    let method = args.method.unwrap_or(loaded.method);
    if method == Method::ClosedForm && loaded.lee.is_none() {
        return Err(MetricError::InvalidParameter("closed-form metric needs the lee model".into()));
    }
    let out = args.out.clone().unwrap_or_else(|| loaded.output_dir.clone());
    ensure_dir(&out)?;
    let mut written = Vec::new();
    let mut emit = |name: &str, text: String| -> Result<()> {
        let p = out.join(name);
        write_text(&p, &text)?;
        written.push(p);
        Ok(())
    };
    if let Some(b) = &loaded.basis {
        emit("basis.json", to_json_string(&b.to_json())?)?;
    }
    emit("H.json", to_json_string(loaded.system.h())?)?;
    emit("S.json", to_json_string(loaded.system.s())?)?;
    let sd = loaded.spectral()?;
    emit("spectral.json", to_json_string(&sd)?)?;

    let q_spec = build_q_spectral(&loaded.system, &sd)?;
    let state = loaded.state("random")?;
    let grid = time_grid(REPORT_T_MAX, REPORT_STEPS);
    let interior = loaded.interior_selection(&sd);
    let all = sd.spect_indices();
    let mut sections = BTreeMap::new();
    let mut passed = true;
    for m in method.expand() {
        let (q, diagnostics) =
            if m == Method::Spectral { (q_spec.clone(), BTreeMap::new()) } else { loaded.build_q(&sd, m)? };
        emit(&format!("q_{}.json", m.file_stem()), to_json_string(&q)?)?;
        let domain = match (m, &loaded.basis) {
            (Method::ClosedForm, Some(b)) => Some(lee::closed_form_domain(b)),
            _ => None,
        };
        let selection: &[usize] = if m == Method::Generator { &all } else { &interior };
        let reference = (m != Method::Spectral).then_some((&q_spec, selection));
        let opts = loaded.report_options(m, &state, &grid, reference, domain.as_deref());
        let report = metric_report(&loaded.system, &sd, &q, &opts)?;
        let equivalence = (m != Method::Spectral)
            .then(|| equivalence_up_to_positive_diagonal(&q_spec, &q, &sd, selection, loaded.tol.sqrt()));
        let involution = loaded.lee.as_ref().map(|_| involution_check(&(&q * loaded.system.s()), &sd, &interior));
        passed &= report.passed && equivalence.as_ref().is_none_or(|e| e.is_equivalent);
        sections.insert(
            m.name().to_string(),
            MethodSection {
                report,
                diagnostics,
                equivalence_to_spectral: equivalence,
                involution_residual: involution,
            },
        );
    }
    let witness = s_indefiniteness_witness(loaded.system.s(), loaded.tol)
        .ok()
        .map(|(v_plus, v_minus)| Witness { v_plus, v_minus });
    let report = BuildReport {
        model: if loaded.lee.is_some() { "lee" } else { "custom" },
        params: loaded.lee,
        dim: loaded.system.dim(),
        tol: loaded.tol,
        seed: loaded.seed,
        similarity_residual: loaded.system.similarity_residual(),
        real_spectrum: sd.is_real_spectrum(),
        s_witness: witness,
        methods: sections,
        passed,
    };
    emit("report.json", to_json_string(&report)?)?;
    if !passed {
        eprintln!("verification failed; see {}", out.join("report.json").display());
    }
    Ok(Outcome { code: if passed { EXIT_OK } else { EXIT_VERIFY }, written })
}

/// `verify`: runs the report on a metric read from `--q`.
pub fn cmd_verify(args: &VerifyArgs) -> Result<Outcome> {
    let loaded = load(&args.common)?;
    let q: ComplexMatrix = read_json(&args.q)?;
    if q.dim() != loaded.system.dim() {
        return Err(MetricError::DimensionMismatch { expected: loaded.system.dim(), found: q.dim() });
    }
    let sd = loaded.spectral()?;
    let state = loaded.state(&args.state)?;
    let grid = time_grid(REPORT_T_MAX, REPORT_STEPS);
    let domain = match (args.method, &loaded.basis) {
        (Method::ClosedForm, Some(b)) => Some(lee::closed_form_domain(b)),
        _ => None,
    };
    let opts = loaded.report_options(args.method, &state, &grid, None, domain.as_deref());
    let report = metric_report(&loaded.system, &sd, &q, &opts)?;
    let text = to_json_string(&report)?;
    let mut written = Vec::new();
    match &args.out {
        Some(dir) => {
            ensure_dir(dir)?;
            let p = dir.join("verify.json");
            write_text(&p, &text)?;
            written.push(p);
        }
        None => print!("{text}"),
    }
    Ok(Outcome { code: if report.passed { EXIT_OK } else { EXIT_VERIFY }, written })
}

/// `evolve`: writes `evolution.csv` with columns `t,dirac_norm,q_norm`.
pub fn cmd_evolve(args: &EvolveArgs) -> Result<Outcome> {
    let loaded = load(&args.common)?;
    if !(args.t_max.is_finite() && args.t_max >= 0.0) || args.steps == 0 {
        return Err(MetricError::InvalidParameter("t-max must be finite and nonnegative, steps positive".into()));
    }
    let sd = loaded.spectral()?;
    let q = match &args.q {
        Some(path) => {
            let q: ComplexMatrix = read_json(path)?;
            if q.dim() != loaded.system.dim() {
                return Err(MetricError::DimensionMismatch { expected: loaded.system.dim(), found: q.dim() });
            }
            q
        }
        None => {
            let m = if args.method == Method::All { Method::Spectral } else { args.method };
            loaded.build_q(&sd, m)?.0
        }
    };
    let state = loaded.state(&args.state)?;
    let grid = time_grid(args.t_max, args.steps);
    let series = norm_series(&sd, &q, &state, &grid)?;
    let mut csv = String::from("t,dirac_norm,q_norm\n");
    for s in &series {
        let _ = writeln!(csv, "{},{},{}", format_float(s.t), format_float(s.dirac_norm), format_float(s.q_norm));
    }
    let out = args.out.clone().unwrap_or_else(|| loaded.output_dir.clone());
    ensure_dir(&out)?;
    let path = out.join("evolution.csv");
    write_text(&path, &csv)?;
    let q0 = series[0].q_norm;
    let q_drift = series.iter().map(|s| (s.q_norm - q0).abs()).fold(0.0, f64::max) / q0.abs().max(f64::MIN_POSITIVE);
    eprintln!("q-norm drift {q_drift:.3e}, dirac-norm drift {:.3e}", dirac_drift(&series));
    let code = if !sd.is_real_spectrum() || q_drift <= 100.0 * loaded.tol { EXIT_OK } else { EXIT_VERIFY };
    if !sd.is_real_spectrum() {
        eprintln!("complex spectrum: q-norm is the pairing form, reported without pass/fail");
    }
    Ok(Outcome { code, written: vec![path] })
}
