//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 input or parse error, 3 numerical
//! guard (size limits, singular or non-unitary factors).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand};

use crate::circuit::{circuit_to_string, lcu_synthesize, UNITARY_TOL};
use crate::error::Error;
use crate::generators::{
    gram, load_csv_matrix, qft_matrix, random_matrix, rings_image, tfim_hamiltonian, vqc_build, CsvOptions,
    DistributionKind, RingsSpec, Rng, TfimSpec, Topology, VqcSpec,
};
use crate::circuit::circuit_unitary;
use crate::io::{
    format_complex, format_real, read_payload, read_terms, read_vector, terms_to_string, matrix_to_bytes,
    matrix_to_string, vector_to_string, Payload,
};
use crate::linalg::{unvec, vec, ComplexMatrix, ComplexVector};
use crate::report::{
    apply_cutoff, run_recipe, spectrum_comparison, spectrum_csv, write_histogram_csv, DecompositionReport, Recipe,
    RecipeOptions, RecipeStatus, DEFAULT_BINS,
};
use crate::terms::{
    entry_counted, invert_single_term, operator_sum_to_decomposition, operator_terms, split_term_into_unitaries,
    sum_apply, TensorTermOperator, TensorTermVector, TermSum,
};
use crate::tree::{decompose, CutoffPolicy, Decomposition, DecompositionMode, ThresholdSpec};

#[derive(Debug, Parser)]
#[command(name = "schmidt", version, about = "Tensor-product approximations by recursive Schmidt decomposition")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decompose a matrix or vector file into a TERMS file, report and histogram.
    Decompose(DecomposeArgs),
    /// Dense sum of a TERMS file.
    Reconstruct(ReconstructArgs),
    /// Apply an operator TERMS file to a vector.
    Apply(ApplyArgs),
    /// One entry of (Σ A_i)|ψ⟩ for a product state ψ.
    Entry(EntryArgs),
    /// Invert a single-term operator.
    Invert(InvertArgs),
    /// Linear-combination-of-unitaries circuit for an operator TERMS file.
    Synth(SynthArgs),
    /// Generate an input matrix.
    Gen(GenArgs),
    /// Eigenvalues of a reconstructed operator against the original.
    Spectrum(SpectrumArgs),
    /// Run an experiment recipe.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("cutoff").multiple(false)))]
struct CutoffArgs {
    /// Keep paths with coefficient² >= X.
    #[arg(long, value_name = "X", group = "cutoff")]
    cutoff_prob: Option<f64>,
    /// Keep paths with coefficient >= X.
    #[arg(long, value_name = "X", group = "cutoff")]
    cutoff_coeff: Option<f64>,
    /// Cut at the largest log10 gap between coefficients.
    #[arg(long, group = "cutoff")]
    gap_cutoff: bool,
    /// Cut at the midpoint of the probability range.
    #[arg(long, group = "cutoff")]
    midpoint_cutoff: bool,
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    input: PathBuf,
    #[arg(long, default_value = "vector")]
    mode: DecompositionMode,
    #[command(flatten)]
    cutoff: CutoffArgs,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    /// Directory for terms.txt, report.txt, histogram.csv and coefficients.csv.
    #[arg(long, short, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    terms: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
    /// Write a matrix with this many rows (operator terms are always square).
    #[arg(long)]
    rows: Option<usize>,
}

#[derive(Debug, Args)]
struct ApplyArgs {
    terms: PathBuf,
    psi: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("state").multiple(false)))]
struct EntryArgs {
    terms: PathBuf,
    #[arg(long)]
    index: usize,
    /// Product-state vector file.
    #[arg(long, group = "state")]
    psi: Option<PathBuf>,
    /// Computational basis state |k⟩ (default 0).
    #[arg(long, group = "state")]
    basis: Option<usize>,
}

#[derive(Debug, Args)]
struct InvertArgs {
    terms: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct SynthArgs {
    terms: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
    /// Split non-unitary factors into unitary pairs first.
    #[arg(long)]
    split: bool,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(subcommand)]
    kind: GenKind,
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Write the binary CMATB format.
    #[arg(long, global = true)]
    binary: bool,
}

#[derive(Debug, Subcommand)]
enum GenKind {
    /// Quantum Fourier transform unitary.
    Qft {
        #[arg(long, default_value_t = 3)]
        qubits: usize,
    },
    /// Transverse-field Ising Hamiltonian.
    Tfim {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        h: f64,
        #[arg(long = "J", visible_alias = "j", default_value_t = 0.5)]
        j: f64,
        /// Number of coupled sites.
        #[arg(long, default_value_t = 4)]
        c: usize,
        #[arg(long, default_value = "ring")]
        topology: Topology,
        /// Scale every field and coupling by a normal draw from this seed.
        #[arg(long, value_name = "SEED")]
        random_fields: Option<u64>,
    },
    /// Unitary of a random Ry / controlled-Ry circuit.
    Vqc {
        #[arg(long, default_value_t = 4)]
        qubits: usize,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Gram matrix XᵀX of random or CSV data.
    Gram {
        #[arg(long, default_value_t = 16)]
        rows: usize,
        #[arg(long, default_value_t = 16)]
        cols: usize,
        #[arg(long, default_value = "normal")]
        dist: DistributionKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Read X from a CSV file instead (one sample per row).
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        header: bool,
        #[arg(long)]
        take_rows: Option<usize>,
        #[arg(long)]
        normalize: bool,
        /// Use the CSV rows as the columns of X.
        #[arg(long)]
        samples_as_columns: bool,
    },
    /// Noisy concentric ring image.
    Rings {
        #[arg(long, default_value_t = 128)]
        side: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
    },
    /// Matrix of i.i.d. samples.
    Random {
        #[arg(long, default_value_t = 16)]
        rows: usize,
        #[arg(long, default_value_t = 16)]
        cols: usize,
        #[arg(long, default_value = "normal")]
        dist: DistributionKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    terms: PathBuf,
    /// The matrix the terms approximate.
    #[arg(long)]
    original: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// gram-distributions, qft-growth, vqc-depth, tfim, rings, iris or all.
    recipe: String,
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    /// Skip the dense eigensolves in the tfim recipe.
    #[arg(long)]
    skip_spectrum: bool,
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Exit code of a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::SizeGuard(_) | Error::SingularFactor { .. } | Error::NonUnitary(_) | Error::NotHermitian(_) => 3,
        _ => 2,
    }
}

/// Parses `argv` (program name first) and runs the command on the process
/// stdout and stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

pub fn run_with<I, T>(argv: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command, out, err)),
            Err(e) => Err(Failure::Usage(format!("--threads {n}: {e}"))),
        },
        None => dispatch(cli.command, out, err),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Lib(e)) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> CliResult<()> {
    match command {
        Command::Decompose(a) => cmd_decompose(a, out),
        Command::Reconstruct(a) => cmd_reconstruct(a, out),
        Command::Apply(a) => cmd_apply(a, out),
        Command::Entry(a) => cmd_entry(a, out),
        Command::Invert(a) => cmd_invert(a, out),
        Command::Synth(a) => cmd_synth(a, out),
        Command::Gen(a) => cmd_gen(a, out),
        Command::Spectrum(a) => cmd_spectrum(a, out),
        Command::Report(a) => cmd_report(a, out, err),
    }
}

fn context(path: &Path, e: Error) -> Error {
    match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    }
}

fn load_terms(path: &Path) -> CliResult<Decomposition> {
    read_terms(path).map_err(|e| context(path, e).into())
}

fn load_operator(path: &Path) -> CliResult<TermSum<TensorTermOperator>> {
    Ok(operator_terms(&load_terms(path)?)?)
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| context(path, Error::Io(e)).into())
}

fn threshold_of(c: &CutoffArgs) -> CliResult<(ThresholdSpec, Option<CutoffPolicy>)> {
    let spec = |r: crate::error::Result<ThresholdSpec>, flag: &str| {
        r.map_err(|e| Failure::Usage(format!("{flag}: {e}")))
    };
    Ok(match (c.cutoff_prob, c.cutoff_coeff) {
        (Some(p), _) => (spec(ThresholdSpec::probability(p), "--cutoff-prob")?, None),
        (_, Some(x)) => (spec(ThresholdSpec::coefficient(x), "--cutoff-coeff")?, None),
        _ if c.gap_cutoff => (ThresholdSpec::none(), Some(CutoffPolicy::LargestGap)),
        _ if c.midpoint_cutoff => (ThresholdSpec::none(), Some(CutoffPolicy::Midpoint)),
        _ => (ThresholdSpec::none(), None),
    })
}

fn cmd_decompose(a: DecomposeArgs, out: &mut (dyn Write + Send)) -> CliResult<()> {
    let (threshold, policy) = threshold_of(&a.cutoff)?;
    if a.bins == 0 {
        return Err(Failure::Usage("--bins must be at least 1".into()));
    }
    let payload = read_payload(&a.input).map_err(|e| context(&a.input, e))?;
    let v = match (a.mode, payload) {
        (DecompositionMode::Operator, Payload::Vector(_)) => {
            return Err(Error::InvalidArgument(format!(
                "{}: operator mode needs a matrix file",
                a.input.display()
            ))
            .into())
        }
        (_, Payload::Matrix(m)) => vec(&m),
        (_, Payload::Vector(v)) => v,
    };
    let start = Instant::now();
    let mut d = decompose(&v, a.mode, threshold)?;
    if let Some(policy) = policy {
        d = apply_cutoff(&d, policy)?.0;
    }
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let input = a.input.display().to_string();
    let report = DecompositionReport::new(input, &d, Some(&v), a.bins, elapsed)?;
    std::fs::create_dir_all(&a.out).map_err(|e| context(&a.out, Error::Io(e)))?;
    write_file(&a.out.join("terms.txt"), terms_to_string(&d))?;
    write_file(&a.out.join("report.txt"), report.to_text())?;
    if report.histogram.is_some() {
        write_histogram_csv(&report, a.out.join("histogram.csv"))?;
    }
    write!(out, "{}", report.to_text_with_timing())?;
    Ok(())
}

fn cmd_reconstruct(a: ReconstructArgs, out: &mut (dyn Write + Send)) -> CliResult<()> {
    let d = load_terms(&a.terms)?;
    let v = crate::tree::reconstruct(&d);
    let rows = match (d.mode(), a.rows) {
        (DecompositionMode::Operator, _) => Some(1usize << d.factor_count()),
        (DecompositionMode::Vector, r) => r,
    };
    let text = match rows {
        Some(r) if r == 0 || !v.dim().is_multiple_of(r) => {
            return Err(Failure::Usage(format!("--rows {r} does not divide dimension {}", v.dim())))
        }
        Some(r) => matrix_to_string(&unvec(&v, r, v.dim() / r)?),
        None => vector_to_string(&v),
    };
    write_file(&a.output, text)?;
    writeln!(out, "wrote {} ({} terms, dim {})", a.output.display(), d.terms().len(), v.dim())?;
    Ok(())
}

fn cmd_apply(a: ApplyArgs, out: &mut (dyn Write + Send)) -> CliResult<()> {
    let ops = load_operator(&a.terms)?;
    let psi = read_vector(&a.psi).map_err(|e| context(&a.psi, e))?;
    let y = sum_apply(&ops, &psi)?;
    write_file(&a.output, vector_to_string(&y))?;
    writeln!(out, "wrote {} (dim {}, norm {})", a.output.display(), y.dim(), format_real(y.norm()))?;
    Ok(())
}

fn product_state(psi: &ComplexVector) -> CliResult<TensorTermVector> {
    let d = decompose(psi, DecompositionMode::Vector, ThresholdSpec::none())?;
    match d.terms() {
        [t] => {
            let mut v = TensorTermVector::from_path_term(t)?;
            v.beta *= d.input_norm();
            Ok(v)
        }
        ts => Err(Error::InvalidArgument(format!("--psi is not a product state ({} Schmidt terms)", ts.len())).into()),
    }
}

fn cmd_entry(a: EntryArgs, out: &mut (dyn Write + Send)) -> CliResult<()> {
    let ops = load_operator(&a.terms)?;
    let n = ops.factor_count();
    let psi = match &a.psi {
        Some(path) => product_state(&read_vector(path).map_err(|e| context(path, e))?)?,
        None => {
            let k = a.basis.unwrap_or(0);
            if n >= usize::BITS as usize || k >> n != 0 {
                return Err(Failure::Usage(format!("--basis {k} out of range for {n} qubits")));
            }
            TensorTermVector::basis(n, k)
        }
    };
    let (z, mults) = entry_counted(&ops, &psi, a.index)?;
    writeln!(out, "entry[{}] = {}", a.index, format_complex(z))?;
    writeln!(out, "multiplications = {mults}")?;
    Ok(())
}

fn cmd_invert(a: InvertArgs, out: &mut (dyn Write + Send)) -> CliResult<()> {
    let ops = load_operator(&a.terms)?;
    let [t] = ops.terms() else {
        return Err(Error::InvalidArgument(format!(
            "{}: inversion needs exactly one term, found {}",
            a.terms.display(),
            ops.len()
        ))
        .into());
    };
    let inv = TermSum::new(vec![invert_single_term(t)?])?;
    write_file(&a.output, terms_to_string(&operator_sum_to_decomposition(&inv)?))?;
    writeln!(out, "wrote {}", a.output.display())?;
    Ok(())
}

fn cmd_synth(a: SynthArgs, out: &mut (dyn Write + Send)) -> CliResult<()> {
    let mut ops = load_operator(&a.terms)?;
    if a.split {
        let split = ops
            .terms()
            .iter()
            .map(|t| split_term_into_unitaries(t, UNITARY_TOL))
            .collect::<crate::error::Result<Vec<_>>>()?;
        ops = TermSum::new(split.into_iter().flatten().collect())?;
    }
    let lcu = lcu_synthesize(&ops)?;
    write_file(&a.output, circuit_to_string(&lcu.circuit))?;
    writeln!(
        out,
        "wrote {}: {} ancilla + {} system qubits, {} gates, scale {}",
        a.output.display(),
        lcu.n_ancilla,
        lcu.n_system,
        lcu.circuit.len(),
        format_real(lcu.scale)
    )?;
    Ok(())
}

fn gen_matrix(kind: GenKind) -> CliResult<ComplexMatrix> {
    Ok(match kind {
        GenKind::Qft { qubits } => qft_matrix(qubits)?,
        GenKind::Tfim {
            n,
            h,
            j,
            c,
            topology,
            random_fields,
        } => {
            let mut spec = TfimSpec::new(n, h, j, c).with_topology(topology);
            if let Some(seed) = random_fields {
                spec = spec.with_random_fields(seed);
            }
            tfim_hamiltonian(&spec)?
        }
        GenKind::Vqc { qubits, depth, seed } => circuit_unitary(&vqc_build(&VqcSpec::new(qubits, depth, seed))?)?,
        GenKind::Gram {
            rows,
            cols,
            dist,
            seed,
            csv,
            header,
            take_rows,
            normalize,
            samples_as_columns,
        } => {
            let x = match csv {
                Some(path) => {
                    let opts = CsvOptions {
                        has_header: header,
                        take_rows,
                        normalize,
                    };
                    load_csv_matrix(&path, opts).map_err(|e| context(&path, e))?
                }
                None => random_matrix(rows, cols, dist, &mut Rng::new(seed))?,
            };
            gram(&if samples_as_columns { x.transpose() } else { x })
        }
        GenKind::Rings { side, seed, noise } => {
            let mut spec = RingsSpec::new(side, seed);
            spec.noise_std = noise;
            rings_image(&spec)?
        }
        GenKind::Random { rows, cols, dist, seed } => random_matrix(rows, cols, dist, &mut Rng::new(seed))?,
    })
}

fn cmd_gen(a: GenArgs, out: &mut (dyn Write + Send)) -> CliResult<()> {
    let output = a.output.ok_or_else(|| Failure::Usage("gen needs --output FILE".into()))?;
    let m = gen_matrix(a.kind)?;
    if a.binary {
        write_file(&output, matrix_to_bytes(&m))?;
    } else {
        write_file(&output, matrix_to_string(&m))?;
    }
    writeln!(out, "wrote {} ({}x{})", output.display(), m.rows(), m.cols())?;
    Ok(())
}

fn cmd_spectrum(a: SpectrumArgs, out: &mut (dyn Write + Send)) -> CliResult<()> {
    let d = load_terms(&a.terms)?;
    let h = match read_payload(&a.original).map_err(|e| context(&a.original, e))? {
        Payload::Matrix(m) => m,
        Payload::Vector(_) => {
            return Err(Error::InvalidArgument(format!("{}: expected a matrix", a.original.display())).into())
        }
    };
    if !h.is_square() || d.input_dim() != h.rows() * h.cols() {
        return Err(Error::DimensionMismatch(format!(
            "terms of dimension {} do not match a {}x{} matrix",
            d.input_dim(),
            h.rows(),
            h.cols()
        ))
        .into());
    }
    let s = spectrum_comparison(&h, &d)?;
    write_file(&a.output, spectrum_csv(&s))?;
    writeln!(out, "wrote {} ({} eigenvalues)", a.output.display(), s.true_values.len())?;
    writeln!(out, "max |lambda - lambda_approx| = {}", format_real(s.max_deviation))?;
    writeln!(out, "||H - H_approx||_F = {}", format_real(s.bound))?;
    writeln!(out, "weyl bound holds = {}", s.weyl_holds())?;
    Ok(())
}

fn cmd_report(a: ReportArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> CliResult<()> {
    let recipes = if a.recipe == "all" {
        Recipe::ALL.to_vec()
    } else {
        vec![a.recipe.parse::<Recipe>().map_err(|e| Failure::Usage(e.to_string()))?]
    };
    if a.bins == 0 {
        return Err(Failure::Usage("--bins must be at least 1".into()));
    }
    let opts = RecipeOptions {
        out_dir: a.out,
        bins: a.bins,
        seed: a.seed,
        skip_spectrum: a.skip_spectrum,
    };
    let mut failed = 0;
    for r in recipes {
        let start = Instant::now();
        let outcome = run_recipe(r, &opts)?;
        write!(out, "{}", outcome.to_text())?;
        writeln!(err, "{}: {:.1} s", r.name(), start.elapsed().as_secs_f64())?;
        failed += usize::from(outcome.status == RecipeStatus::Fail);
    }
    if failed > 0 {
        writeln!(out, "{failed} recipe(s) failed")?;
    }
    Ok(())
}
