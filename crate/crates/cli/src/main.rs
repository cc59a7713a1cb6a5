//! `ttmax`: command-line front end for ttmax-core.
//!
//! Every subcommand reads an optional `key = value` file (`--config`); flags
//! given on the command line override keys from the file.

mod error;

use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ttmax_core::altproj::binary_search_epsilon_with_witness;
use ttmax_core::bounds::{coherence_error_bound_from_profile, rank_bound_matrix, rank_bound_tt, DEFAULT_C_D};
use ttmax_core::coherence::tt_core_coherences;
use ttmax_core::config::KeyValues;
use ttmax_core::experiment::{self, ExperimentGrid, RateFit};
use ttmax_core::generators::{identity_tensor, random_tt};
use ttmax_core::seed::derive_seed;
use ttmax_core::sketch::{compress, sketch_error_report};
use ttmax_core::tensor::io::{read_tnsr, write_tnsr};
use ttmax_core::{
    plot, tt_svd, verify, APConfig, DenseTensor, GeneratorKind, GeneratorSpec, SketchConfig,
    SketchDistribution, Truncation, TtTensor,
};

use error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "ttmax", version, about = "Tensor-train approximation in the entrywise maximum norm")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Tnsr,
}

#[derive(Args)]
struct Common {
    /// `key = value` file; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (a directory for `experiment`); stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct Source {
    /// TNSR v1 file, `-` for stdin
    #[arg(long)]
    input: Option<String>,
    /// Generate instead: identity, uniform or random_tt
    #[arg(long)]
    kind: Option<String>,
    /// Mode sizes of a generated tensor, e.g. `16,16,16`
    #[arg(long)]
    dims: Option<String>,
    /// TT rank of a random_tt tensor
    #[arg(long)]
    tt_rank: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Smallest max-norm error reached at a TT rank (alternating projections + bisection)
    Approx {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
    },
    /// Error statistics of the randomized TT compression
    Sketch {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        trials: Option<u64>,
        /// gaussian or rademacher
        #[arg(long)]
        distribution: Option<String>,
    },
    /// Core coherence profile and the coherence-based error bound
    Coherence {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        c_d: Option<f64>,
    },
    /// Rank sufficient for a relative max-norm error
    Bounds {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dims: Option<String>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        c_d: Option<f64>,
    },
    /// Run a parameter grid, or refit and replot an existing results CSV
    Experiment {
        #[command(flatten)]
        common: Common,
        /// Skip the runs and read rows from this CSV
        #[arg(long)]
        from_csv: Option<PathBuf>,
    },
    /// Index-algebra property suites
    Verify {
        #[command(flatten)]
        common: Common,
        /// Suites to run; all when empty
        suites: Vec<String>,
        /// Print the suite names and exit
        #[arg(long)]
        list: bool,
    },
}

const SOURCE_KEYS: &[&str] = &["seed", "input", "kind", "dims", "tt_rank"];
const AP_KEYS: &[&str] = &["rank", "restarts", "max_iter", "conv_tol", "slack", "max_bisections", "width_tol"];
const SKETCH_KEYS: &[&str] = &["rank", "trials", "distribution"];
const BOUND_KEYS: &[&str] = &["seed", "dims", "epsilon", "c_d"];

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ttmax: {e}");
            e.exit_code()
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Approx {
            common,
            source,
            rank,
            restarts,
        } => {
            let mut kv = settings(&common, &source)?;
            overlay(&mut kv, "rank", rank);
            overlay(&mut kv, "restarts", restarts);
            approx(&kv, &common)
        }
        Command::Sketch {
            common,
            source,
            rank,
            trials,
            distribution,
        } => {
            let mut kv = settings(&common, &source)?;
            overlay(&mut kv, "rank", rank);
            overlay(&mut kv, "trials", trials);
            overlay(&mut kv, "distribution", distribution);
            sketch(&kv, &common)
        }
        Command::Coherence {
            common,
            source,
            epsilon,
            c_d,
        } => {
            csv_only(&common, "coherence")?;
            let mut kv = settings(&common, &source)?;
            overlay(&mut kv, "epsilon", epsilon);
            overlay(&mut kv, "c_d", c_d);
            coherence(&kv, &common)
        }
        Command::Bounds {
            common,
            dims,
            epsilon,
            c_d,
        } => {
            csv_only(&common, "bounds")?;
            let mut kv = base_settings(&common)?;
            overlay(&mut kv, "dims", dims);
            overlay(&mut kv, "epsilon", epsilon);
            overlay(&mut kv, "c_d", c_d);
            bounds(&kv, &common)
        }
        Command::Experiment { common, from_csv } => {
            csv_only(&common, "experiment")?;
            experiment(&common, from_csv.as_deref())
        }
        Command::Verify { common, suites, list } => {
            csv_only(&common, "verify")?;
            if list {
                return emit(&common.out, (verify::suite_names().join("\n") + "\n").as_bytes());
            }
            verify_suites(&common, &suites)
        }
    }
}

fn base_settings(common: &Common) -> CliResult<KeyValues> {
    let mut kv = match &common.config {
        Some(path) => KeyValues::load(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
        None => KeyValues::default(),
    };
    overlay(&mut kv, "seed", common.seed);
    Ok(kv)
}

fn settings(common: &Common, source: &Source) -> CliResult<KeyValues> {
    let mut kv = base_settings(common)?;
    overlay(&mut kv, "input", source.input.clone());
    overlay(&mut kv, "kind", source.kind.clone());
    overlay(&mut kv, "dims", source.dims.clone());
    overlay(&mut kv, "tt_rank", source.tt_rank);
    Ok(kv)
}

fn overlay<T: ToString>(kv: &mut KeyValues, key: &str, value: Option<T>) {
    if let Some(v) = value {
        kv.set(key, v.to_string());
    }
}

fn known(kv: &KeyValues, groups: &[&[&str]]) -> CliResult<()> {
    Ok(kv.check_known(&groups.concat())?)
}

fn csv_only(common: &Common, command: &str) -> CliResult<()> {
    match common.format {
        Format::Csv => Ok(()),
        Format::Tnsr => Err(CliError::Config(format!("`{command}` only writes csv"))),
    }
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(path) => write_file(path, bytes),
        None => {
            io::stdout().lock().write_all(bytes)?;
            Ok(())
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn tnsr_bytes(tensor: &DenseTensor) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    write_tnsr(tensor, &mut buf)?;
    Ok(buf)
}

fn seed_of(kv: &KeyValues) -> CliResult<u64> {
    Ok(kv.get_or("seed", 0u64)?)
}

/// Generator requested through `kind`/`dims`, or `None` when reading `input`.
fn generator(kv: &KeyValues) -> CliResult<Option<GeneratorSpec>> {
    let kind: Option<GeneratorKind> = kv.get("kind")?;
    match (kv.raw("input"), kind) {
        (Some(_), Some(_)) => Err(CliError::Config("give either input or kind, not both".into())),
        (None, None) => Err(CliError::Config("no tensor given: set input or kind".into())),
        (Some(_), None) => Ok(None),
        (None, Some(kind)) => {
            let dims: Vec<usize> = kv
                .get_list("dims")?
                .ok_or_else(|| CliError::Config(format!("kind {kind} needs dims")))?;
            if dims.len() < 2 {
                return Err(CliError::Config(format!("need at least two modes, got dims {dims:?}")));
            }
            Ok(Some(GeneratorSpec {
                kind,
                dims,
                rank: kv.get("tt_rank")?,
                seed: derive_seed(seed_of(kv)?, &[0]),
            }))
        }
    }
}

fn read_input(path: &str) -> CliResult<DenseTensor> {
    if path == "-" {
        return Ok(read_tnsr(io::stdin().lock())?);
    }
    let file = fs::File::open(path).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
    Ok(read_tnsr(BufReader::new(file))?)
}

fn load_dense(kv: &KeyValues) -> CliResult<DenseTensor> {
    match generator(kv)? {
        Some(spec) => Ok(spec.generate()?),
        None => read_input(kv.raw("input").unwrap_or_default()),
    }
}

/// Identity and random_tt tensors keep their native factorization; anything
/// else goes through an exact TT-SVD.
fn load_tt(kv: &KeyValues) -> CliResult<TtTensor> {
    let spec = generator(kv)?;
    match &spec {
        Some(s) if s.kind == GeneratorKind::Identity => {
            s.generate()?;
            Ok(identity_tensor(s.dims[0], s.dims.len())?.1)
        }
        Some(s) if s.kind == GeneratorKind::RandomTt => {
            let r = s
                .rank
                .ok_or_else(|| CliError::Config("random_tt needs tt_rank".into()))?;
            Ok(random_tt(&s.dims, &vec![r; s.dims.len() - 1], s.seed)?)
        }
        _ => {
            let a = load_dense(kv)?;
            Ok(tt_svd(&a, &Truncation::exact())?)
        }
    }
}

fn approx(kv: &KeyValues, common: &Common) -> CliResult<()> {
    known(kv, &[SOURCE_KEYS, AP_KEYS])?;
    let a = load_dense(kv)?;
    let mut cfg = APConfig::new(kv.require("rank")?).with_seed(derive_seed(seed_of(kv)?, &[1]));
    cfg.max_iter = kv.get_or("max_iter", cfg.max_iter)?;
    cfg.conv_tol = kv.get_or("conv_tol", cfg.conv_tol)?;
    cfg.slack = kv.get_or("slack", cfg.slack)?;
    cfg.max_bisections = kv.get_or("max_bisections", cfg.max_bisections)?;
    cfg.width_tol = kv.get_or("width_tol", cfg.width_tol)?;
    let restarts = kv.get_or("restarts", 1usize)?;
    let found = binary_search_epsilon_with_witness(&a, &cfg, restarts)?;
    let rep = &found.report;
    match common.format {
        Format::Csv => {
            let text = format!(
                "rank,epsilon,residual_max,iterations,converged,restart,seed\n{},{:.16e},{:.16e},{},{},{},{}\n",
                rep.rank,
                rep.epsilon_achieved,
                rep.residual_max,
                rep.iterations_used,
                rep.converged,
                found.restart,
                rep.seed
            );
            emit(&common.out, text.as_bytes())
        }
        Format::Tnsr => {
            eprintln!("epsilon = {:.6e} at rank {}", rep.epsilon_achieved, rep.rank);
            emit(&common.out, &tnsr_bytes(&found.witness.to_dense()?)?)
        }
    }
}

fn sketch(kv: &KeyValues, common: &Common) -> CliResult<()> {
    known(kv, &[SOURCE_KEYS, SKETCH_KEYS])?;
    let tt = load_tt(kv)?;
    let distribution: SketchDistribution = kv.get_or("distribution", SketchDistribution::Gaussian)?;
    let cfg = SketchConfig::new(kv.require("rank")?, distribution, derive_seed(seed_of(kv)?, &[1]));
    match common.format {
        Format::Csv => {
            let report = sketch_error_report(&tt, &cfg, kv.get_or("trials", 100u64)?)?;
            eprintln!(
                "median implied epsilon {:.6e} over {} trials",
                report.median_implied_epsilon(),
                report.trials.len()
            );
            emit(&common.out, report.to_csv().as_bytes())
        }
        Format::Tnsr => emit(&common.out, &tnsr_bytes(&compress(&tt, &cfg)?.to_dense()?)?),
    }
}

fn coherence(kv: &KeyValues, common: &Common) -> CliResult<()> {
    known(kv, &[SOURCE_KEYS, &["epsilon", "c_d"]])?;
    let a = load_dense(kv)?;
    let epsilon = kv.get_or("epsilon", 0.1)?;
    let profile = tt_core_coherences(&a)?;
    let bound = coherence_error_bound_from_profile(&profile, epsilon, kv.get_or("c_d", DEFAULT_C_D)?)?;
    let scale = epsilon / a.dims().iter().map(|&n| n as f64).product::<f64>().sqrt();
    let mut text = String::from(
        "split,tt_rank,left_coherence,right_coherence,unfolding_norm,error_bound,target_rank,best\n",
    );
    for t in 1..a.order() {
        text.push_str(&format!(
            "{t},{},{:.16e},{:.16e},{:.16e},{:.16e},{},{}\n",
            profile.ranks[t - 1],
            profile.left[t - 1],
            profile.right[t - 1],
            profile.unfolding_spectral[t - 1],
            scale * bound.per_split[t - 1],
            bound.rank,
            t == bound.best_split
        ));
    }
    emit(&common.out, text.as_bytes())
}

fn bounds(kv: &KeyValues, common: &Common) -> CliResult<()> {
    known(kv, &[BOUND_KEYS])?;
    let dims: Vec<usize> = kv
        .get_list("dims")?
        .ok_or_else(|| CliError::Config("bounds needs dims".into()))?;
    let epsilon = kv.get_or("epsilon", 0.1)?;
    let c_d = kv.get_or("c_d", DEFAULT_C_D)?;
    let shape = dims.iter().map(|n| n.to_string()).collect::<Vec<_>>().join("x");
    let mut text = String::from("bound,dims,epsilon,c_d,rank\n");
    if let [n1, n2] = dims[..] {
        let r = rank_bound_matrix(n1, n2, epsilon)?;
        text.push_str(&format!("matrix,{shape},{epsilon},,{r}\n"));
    }
    let r = rank_bound_tt(&dims, epsilon, c_d)?;
    text.push_str(&format!("tt,{shape},{epsilon},{c_d},{r}\n"));
    emit(&common.out, text.as_bytes())
}

fn experiment(common: &Common, from_csv: Option<&Path>) -> CliResult<()> {
    let rows = match from_csv {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            experiment::parse_csv(&text)?
        }
        None => {
            let grid = ExperimentGrid::from_config(&base_settings(common)?)?;
            experiment::run_grid(&grid)?
        }
    };
    let fits = match experiment::fit_rates(&rows) {
        Ok(fits) => fits,
        Err(e) => {
            eprintln!("ttmax: no rate fit: {e}");
            Vec::new()
        }
    };
    let Some(dir) = &common.out else {
        for fit in &fits {
            eprintln!("{}", describe_fit(fit));
        }
        return emit(&None, experiment::to_csv(&rows).as_bytes());
    };
    fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))?;
    write_file(&dir.join("results.csv"), experiment::to_csv(&rows).as_bytes())?;
    write_file(&dir.join("fits.csv"), fits_csv(&fits).as_bytes())?;
    plot::emit_plots(&rows, dir)?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

fn fits_csv(fits: &[RateFit]) -> String {
    let mut text = String::from("kind,d,alpha,beta,log_constant,residual,points\n");
    for f in fits {
        text.push_str(&format!(
            "{},{},{},{},{:.16e},{:.16e},{}\n",
            f.kind,
            f.d,
            opt(f.alpha),
            opt(f.beta),
            f.log_constant,
            f.residual,
            f.points
        ));
    }
    text
}

fn describe_fit(f: &RateFit) -> String {
    let show = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into());
    format!(
        "{} d={}: alpha {} beta {} ({} points, residual {:.2e})",
        f.kind,
        f.d,
        show(f.alpha),
        show(f.beta),
        f.points,
        f.residual
    )
}

fn verify_suites(common: &Common, names: &[String]) -> CliResult<()> {
    let kv = base_settings(common)?;
    known(&kv, &[&["seed"]])?;
    let seed = seed_of(&kv)?;
    let reports = if names.is_empty() {
        verify::run_all(seed)?
    } else {
        names
            .iter()
            .map(|n| verify::run_suite(n, seed))
            .collect::<Result<Vec<_>, _>>()?
    };
    let mut text = String::from("suite,cases,max_violation,tolerance,passed\n");
    for r in &reports {
        text.push_str(&format!(
            "{},{},{:.3e},{:.0e},{}\n",
            r.name,
            r.cases,
            r.max_violation,
            r.tolerance,
            r.passed()
        ));
    }
    emit(&common.out, text.as_bytes())?;
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("failed suites: {}", failed.join(", "))))
    }
}
