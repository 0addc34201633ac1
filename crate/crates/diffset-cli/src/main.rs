//! Command-line front end: select differential sets on real data, estimate
//! entropies, replay the built-in simulation study, or run the exhaustive
//! oracle.
//!
//! Every command is a pure function of its inputs, flags and seed; delimited
//! and structured outputs are byte-identical across identical invocations.
//! Exit codes: 0 success, 1 input or validation failure, 2 internal
//! invariant violation.

mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use diffset::{
    conditional_entropy_once, estimate, exhaustive_empirical, exhaustive_exact, minimal_minimizers,
    run_experiment, select, Correction, Dataset, EstimatorConfig, ExperimentPlan,
    JointDistribution, SelectionConfig, SubsetEvaluation, VariableId,
};
use output::{
    join_names, render_ranking_delimited, render_ranking_human, render_trace_delimited,
    render_trace_human, round4, termination_label, to_json, Document,
};

const BUILTIN_DISTRIBUTION: &str = "paper-case-study";

#[derive(Parser)]
#[command(name = "diffset", version, about = "Confidence-guided differential-set selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select a differential set from a delimited dataset
    Select(SelectArgs),
    /// Estimate the conditional entropy of a variable subset
    Entropy(EntropyArgs),
    /// Run a replicated sampling experiment against a distribution
    Simulate(SimulateArgs),
    /// Rank every variable subset by exhaustive search
    Oracle(OracleArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Tables rounded to 4 decimals
    Human,
    /// Full-precision delimited rows
    Delimited,
    /// Full-precision self-describing JSON
    Structured,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum CorrectionArg {
    MillerMadow,
    None,
}

impl From<CorrectionArg> for Correction {
    fn from(value: CorrectionArg) -> Self {
        match value {
            CorrectionArg::MillerMadow => Correction::MillerMadow,
            CorrectionArg::None => Correction::None,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Seed for all randomness; echoed in every output
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stdout format
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Read and write tab-separated files instead of comma-separated
    #[arg(long)]
    tab: bool,
    /// Print extra diagnostics (progress, shapes) to stderr
    #[arg(short, long)]
    verbose: bool,
}

impl CommonArgs {
    fn delimiter_byte(&self) -> u8 {
        if self.tab {
            b'\t'
        } else {
            b','
        }
    }

    fn delimiter_char(&self) -> char {
        if self.tab {
            '\t'
        } else {
            ','
        }
    }
}

#[derive(Args)]
struct SelectArgs {
    /// Delimited dataset with a header row
    data: PathBuf,
    #[arg(long, default_value = "class")]
    class_column: String,
    /// Smallest acceptable k
    #[arg(long, default_value_t = 0.01)]
    k_min: f64,
    /// Smallest acceptable confidence in [0, 1); 0 disables
    #[arg(long, default_value_t = 0.0)]
    f_min: f64,
    /// Cap on the number of iterations
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Number of subsamples per estimate
    #[arg(long, default_value_t = 100)]
    n_sub: usize,
    #[arg(long, value_enum, default_value_t = CorrectionArg::MillerMadow)]
    correction: CorrectionArg,
    /// Write the structured trace to this path as well
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct EntropyArgs {
    /// Delimited dataset with a header row
    data: PathBuf,
    #[arg(long, default_value = "class")]
    class_column: String,
    /// Comma-separated variable names; empty for the unconditional class entropy
    #[arg(long, default_value = "")]
    vars: String,
    #[arg(long, default_value_t = 100)]
    n_sub: usize,
    #[arg(long, value_enum, default_value_t = CorrectionArg::MillerMadow)]
    correction: CorrectionArg,
    /// Write the structured estimate to this path as well
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Built-in distribution name or a delimited probability-table path
    #[arg(long, default_value = BUILTIN_DISTRIBUTION)]
    distribution: String,
    #[arg(long, default_value = "class")]
    class_column: String,
    /// Comma-separated sample sizes
    #[arg(long, default_value = "10,20,50")]
    sizes: String,
    /// Replicates per sample size
    #[arg(long, default_value_t = 2000)]
    replicates: usize,
    #[arg(long, default_value_t = 0.01)]
    k_min: f64,
    #[arg(long, default_value_t = 0.0)]
    f_min: f64,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long, default_value_t = 100)]
    n_sub: usize,
    #[arg(long, value_enum, default_value_t = CorrectionArg::MillerMadow)]
    correction: CorrectionArg,
    /// Directory for report.json and the three tables
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct OracleArgs {
    /// Rank subsets by plug-in entropy on this dataset
    #[arg(long, conflicts_with = "distribution", required_unless_present = "distribution")]
    data: Option<PathBuf>,
    /// Rank subsets exactly on a distribution (built-in name or path)
    #[arg(long)]
    distribution: Option<String>,
    #[arg(long, default_value = "class")]
    class_column: String,
    /// Write the structured ranking to this path as well
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

enum CliError {
    Input(String),
    Internal(String),
}

impl From<diffset::Error> for CliError {
    fn from(e: diffset::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Internal(m) => write!(f, "internal invariant violation: {m}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Select(args) => cmd_select(args),
        Command::Entropy(args) => cmd_entropy(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Oracle(args) => cmd_oracle(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Input(_) => ExitCode::from(1),
                CliError::Internal(_) => ExitCode::from(2),
            }
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

#[derive(Serialize)]
struct SelectEcho {
    data: PathBuf,
    class_column: String,
    k_min: f64,
    f_min: f64,
    max_iterations: Option<usize>,
    n_sub: usize,
    correction: CorrectionArg,
    tab: bool,
}

fn cmd_select(args: SelectArgs) -> Result<(), CliError> {
    let dataset = Dataset::load(&args.data, &args.class_column, args.common.delimiter_byte())?;
    if args.common.verbose {
        eprintln!(
            "loaded {} (m={}, variables={})",
            args.data.display(),
            dataset.m(),
            dataset.n_variables()
        );
    }
    let cfg = SelectionConfig {
        k_min: args.k_min,
        f_min: args.f_min,
        max_iterations: args.max_iterations,
        estimator: EstimatorConfig {
            n_sub: args.n_sub,
            correction: args.correction.into(),
            seed: args.common.seed,
        },
    };
    let trace = select(&dataset, &cfg)?;
    check_trace(&trace)?;

    let doc = Document {
        command: "select",
        generator: diffset::rng::GENERATOR_ID,
        seed: args.common.seed,
        config: SelectEcho {
            data: args.data.clone(),
            class_column: args.class_column.clone(),
            k_min: args.k_min,
            f_min: args.f_min,
            max_iterations: args.max_iterations,
            n_sub: args.n_sub,
            correction: args.correction,
            tab: args.common.tab,
        },
        result: &trace,
    };
    if let Some(path) = &args.output {
        write_file(path, &to_json(&doc))?;
    }
    match args.common.format {
        Format::Human => {
            println!("seed: {}   generator: {}", args.common.seed, diffset::rng::GENERATOR_ID);
            println!(
                "dataset: {} (m={}, variables={})",
                args.data.display(),
                dataset.m(),
                dataset.n_variables()
            );
            print!("{}", render_trace_human(&trace));
        }
        Format::Delimited => {
            println!(
                "# command=select seed={} generator={} k_min={} f_min={} n_sub={} correction={} termination={}",
                args.common.seed,
                diffset::rng::GENERATOR_ID,
                args.k_min,
                args.f_min,
                args.n_sub,
                correction_label(args.correction),
                termination_label(trace.termination),
            );
            print!("{}", render_trace_delimited(&trace, args.common.delimiter_char()));
        }
        Format::Structured => print!("{}", to_json(&doc)),
    }
    Ok(())
}

fn correction_label(c: CorrectionArg) -> &'static str {
    match c {
        CorrectionArg::MillerMadow => "miller_madow",
        CorrectionArg::None => "none",
    }
}

fn check_trace(trace: &diffset::SelectionTrace) -> Result<(), CliError> {
    for (i, step) in trace.steps.iter().enumerate() {
        if step.iteration != i + 1 {
            return Err(CliError::Internal(format!(
                "trace iterations not consecutive at step {}",
                i + 1
            )));
        }
        let max_k = step.candidates.iter().map(|c| c.k).fold(f64::NEG_INFINITY, f64::max);
        if step.k_star != max_k {
            return Err(CliError::Internal(format!(
                "recorded k_star {} is not the candidate maximum {max_k}",
                step.k_star
            )));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct EntropyEcho {
    data: PathBuf,
    class_column: String,
    vars: Vec<String>,
    n_sub: usize,
    correction: CorrectionArg,
    tab: bool,
}

#[derive(Serialize)]
struct EntropyResult {
    m: usize,
    estimate: diffset::EntropyEstimate,
    /// Full-sample plug-in entropy without correction, for comparison.
    plug_in: f64,
}

fn cmd_entropy(args: EntropyArgs) -> Result<(), CliError> {
    let dataset = Dataset::load(&args.data, &args.class_column, args.common.delimiter_byte())?;
    let names: Vec<String> = if args.vars.trim().is_empty() {
        Vec::new()
    } else {
        args.vars.split(',').map(|s| s.trim().to_string()).collect()
    };
    let mut vars: Vec<VariableId> = Vec::with_capacity(names.len());
    for name in &names {
        let id = dataset
            .variable_named(name)
            .ok_or_else(|| diffset::Error::UnknownVariable(name.clone()))?;
        vars.push(id);
    }
    let cfg = EstimatorConfig {
        n_sub: args.n_sub,
        correction: args.correction.into(),
        seed: args.common.seed,
    };
    let est = estimate(&dataset, &vars, &cfg)?;
    let plug_in = conditional_entropy_once(&dataset.project(&vars)?, Correction::None);

    let subset_names: Vec<String> = est
        .subset
        .iter()
        .map(|v| dataset.variable_name(*v).to_string())
        .collect();
    let doc = Document {
        command: "entropy",
        generator: diffset::rng::GENERATOR_ID,
        seed: args.common.seed,
        config: EntropyEcho {
            data: args.data.clone(),
            class_column: args.class_column.clone(),
            vars: subset_names.clone(),
            n_sub: args.n_sub,
            correction: args.correction,
            tab: args.common.tab,
        },
        result: EntropyResult {
            m: dataset.m(),
            estimate: est.clone(),
            plug_in,
        },
    };
    if let Some(path) = &args.output {
        write_file(path, &to_json(&doc))?;
    }
    match args.common.format {
        Format::Human => {
            println!("seed: {}   generator: {}", args.common.seed, diffset::rng::GENERATOR_ID);
            println!("subset: {} (m={})", join_names(&subset_names), dataset.m());
            println!(
                "h_est = {} ± {}   (n_sub = {}, correction = {})",
                round4(est.h_est),
                round4(est.sigma_est),
                est.n_sub_used,
                correction_label(args.correction),
            );
            println!("plug-in (full sample, no correction) = {}", round4(plug_in));
        }
        Format::Delimited => {
            println!(
                "# command=entropy seed={} generator={}",
                args.common.seed,
                diffset::rng::GENERATOR_ID
            );
            let d = args.common.delimiter_char();
            println!("variables{d}m{d}n_sub{d}correction{d}h_est{d}sigma_est{d}plug_in");
            println!(
                "{}{d}{}{d}{}{d}{}{d}{}{d}{}{d}{}",
                subset_names.join("+"),
                dataset.m(),
                est.n_sub_used,
                correction_label(args.correction),
                est.h_est,
                est.sigma_est,
                plug_in,
            );
        }
        Format::Structured => print!("{}", to_json(&doc)),
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulateEcho {
    distribution: String,
    sizes: Vec<usize>,
    replicates: usize,
    k_min: f64,
    f_min: f64,
    max_iterations: Option<usize>,
    n_sub: usize,
    correction: CorrectionArg,
}

fn load_distribution(
    source: &str,
    class_column: &str,
    delimiter: u8,
) -> Result<JointDistribution, CliError> {
    if source == BUILTIN_DISTRIBUTION {
        Ok(JointDistribution::case_study())
    } else {
        Ok(JointDistribution::load(source, class_column, delimiter)?)
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let distribution =
        load_distribution(&args.distribution, &args.class_column, args.common.delimiter_byte())?;
    let sizes: Vec<usize> = args
        .sizes
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::Input(format!("invalid sample size {:?}", s.trim())))
        })
        .collect::<Result<_, _>>()?;
    let plan = ExperimentPlan {
        distribution,
        sample_sizes: sizes.clone(),
        replicates: args.replicates,
        selection: SelectionConfig {
            k_min: args.k_min,
            f_min: args.f_min,
            max_iterations: args.max_iterations,
            estimator: EstimatorConfig {
                n_sub: args.n_sub,
                correction: args.correction.into(),
                seed: 0,
            },
        },
        master_seed: args.common.seed,
    };
    let verbose = args.common.verbose;
    let report = run_experiment(&plan, |p| {
        if verbose && (p.completed % (p.total / 10).max(1) == 0 || p.completed == p.total) {
            eprintln!("m={}: {}/{} replicates", p.sample_size, p.completed, p.total);
        }
    })?;
    report
        .check_bookkeeping()
        .map_err(|e| CliError::Internal(e.to_string()))?;

    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", args.out_dir.display())))?;
    let doc = Document {
        command: "simulate",
        generator: diffset::rng::GENERATOR_ID,
        seed: args.common.seed,
        config: SimulateEcho {
            distribution: args.distribution.clone(),
            sizes: sizes.clone(),
            replicates: args.replicates,
            k_min: args.k_min,
            f_min: args.f_min,
            max_iterations: args.max_iterations,
            n_sub: args.n_sub,
            correction: args.correction,
        },
        result: &report,
    };
    let d = args.common.delimiter_char();
    write_file(&args.out_dir.join("report.json"), &to_json(&doc))?;
    write_file(&args.out_dir.join("frequencies.csv"), &report.frequency_table(d))?;
    write_file(&args.out_dir.join("stops.csv"), &report.stop_table(d))?;
    write_file(&args.out_dir.join("moments.csv"), &report.moments_table(d))?;

    match args.common.format {
        Format::Human => {
            println!("seed: {}   generator: {}", args.common.seed, diffset::rng::GENERATOR_ID);
            println!(
                "distribution: {}   sizes: {:?}   replicates: {}   n_sub: {}",
                args.distribution, sizes, args.replicates, args.n_sub
            );
            for size in &report.per_size {
                let names = &report.variables;
                println!("m = {}", size.sample_size);
                print!("  iteration 1 selection %:");
                for (v, name) in names.iter().enumerate() {
                    print!("  {}={}", name, round4(size.selection_frequency[0][v]));
                }
                println!();
                let stops: Vec<String> = size.stop_rate.iter().map(|s| round4(*s)).collect();
                println!("  cumulative stop % by iteration: {}", stops.join(", "));
            }
            println!(
                "wrote report.json, frequencies.csv, stops.csv, moments.csv to {}",
                args.out_dir.display()
            );
            println!("wall time: {:.3}s", report.wall_time.as_secs_f64());
        }
        Format::Delimited => {
            println!(
                "# command=simulate seed={} generator={} replicates={} n_sub={}",
                args.common.seed,
                diffset::rng::GENERATOR_ID,
                args.replicates,
                args.n_sub
            );
            print!("{}", report.frequency_table(d));
        }
        Format::Structured => print!("{}", to_json(&doc)),
    }
    Ok(())
}

#[derive(Serialize)]
struct OracleEcho {
    data: Option<PathBuf>,
    distribution: Option<String>,
    class_column: String,
    tab: bool,
}

#[derive(Serialize)]
struct OracleResult {
    variables: Vec<String>,
    evaluations: Vec<SubsetEvaluation>,
    /// Minimal-cardinality subsets attaining the minimum entropy (1e-12).
    minimal_optimal: Vec<Vec<usize>>,
}

fn cmd_oracle(args: OracleArgs) -> Result<(), CliError> {
    let (evaluations, names) = if let Some(path) = &args.data {
        let dataset = Dataset::load(path, &args.class_column, args.common.delimiter_byte())?;
        (exhaustive_empirical(&dataset)?, dataset.variable_names().to_vec())
    } else {
        let source = args.distribution.as_deref().expect("clap enforces one source");
        let distribution =
            load_distribution(source, &args.class_column, args.common.delimiter_byte())?;
        (exhaustive_exact(&distribution)?, distribution.variable_names().to_vec())
    };
    let minimal: Vec<Vec<usize>> = minimal_minimizers(&evaluations, 1e-12)
        .into_iter()
        .map(|e| e.subset.iter().map(|v| v.index()).collect())
        .collect();

    let doc = Document {
        command: "oracle",
        generator: diffset::rng::GENERATOR_ID,
        seed: args.common.seed,
        config: OracleEcho {
            data: args.data.clone(),
            distribution: args.distribution.clone(),
            class_column: args.class_column.clone(),
            tab: args.common.tab,
        },
        result: OracleResult {
            variables: names.clone(),
            evaluations: evaluations.clone(),
            minimal_optimal: minimal.clone(),
        },
    };
    if let Some(path) = &args.output {
        write_file(path, &to_json(&doc))?;
    }
    match args.common.format {
        Format::Human => {
            println!("seed: {}   generator: {}", args.common.seed, diffset::rng::GENERATOR_ID);
            print!("{}", render_ranking_human(&evaluations, &names, &minimal));
        }
        Format::Delimited => {
            println!(
                "# command=oracle seed={} generator={}",
                args.common.seed,
                diffset::rng::GENERATOR_ID
            );
            print!(
                "{}",
                render_ranking_delimited(&evaluations, &names, &minimal, args.common.delimiter_char())
            );
        }
        Format::Structured => print!("{}", to_json(&doc)),
    }
    Ok(())
}
