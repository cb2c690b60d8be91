use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::config::{ExperimentConfig, ModelSpec, Pipeline, Statistic, TransformSpec};
use super::experiment::run_experiment;
use super::figures::figure_configs;
use super::oracle::standard_checks;
use crate::error::{Error, Result};
use crate::model::Sample;
use crate::stats::p_value;
use crate::transforms::DEFAULT_MESH;

#[derive(Debug, Parser)]
#[command(
    name = "khmrotate",
    version,
    about = "Distribution-free goodness-of-fit tests by unitary rotation of empirical processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test one data file (one number per line) against a hypothesis.
    Test(TestArgs),
    /// Run a Monte Carlo experiment and write its ECDF table as CSV.
    Simulate(SimulateArgs),
    /// Reproduce one of the preset studies (1-4).
    Figure(FigureArgs),
    /// Compare every transform's Gaussian limit with its target covariance.
    Check(CheckArgs),
}

/// Options naming a transform, shared by `test` and `simulate`.
#[derive(Debug, Args)]
struct TransformArgs {
    /// Hypothesized model, e.g. `beta(3,3)` or `uniform`.
    #[arg(long)]
    model: Option<String>,
    /// Parametric family (`normal-location`, `normal`, `exponential`); selects the parametric
    /// transform, with `--model` then only naming the law `simulate` draws from.
    #[arg(long)]
    family: Option<String>,
    /// Parameters of the family, e.g. the known σ of `normal-location`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    family_params: Vec<f64>,
    /// simple | standard-bridge | motion-uniform-eta | motion-conditional-eta | motion-integrated | parametric
    #[arg(long)]
    transform: Option<String>,
    /// Target law of `simple` (a model), or of `parametric` (`canonical`, `hermite`, `legendre`, `laguerre`).
    #[arg(long, alias = "target-density")]
    target: Option<String>,
    /// `Δ` of the Brownian-motion transforms (`A = [0, Δ]`).
    #[arg(long)]
    delta: Option<f64>,
    /// Lower end of `A`, with `--a-hi`, instead of `--delta`.
    #[arg(long, requires = "a_hi")]
    a_lo: Option<f64>,
    #[arg(long, requires = "a_lo")]
    a_hi: Option<f64>,
    /// ks | cvm | motion-sup
    #[arg(long)]
    statistic: Option<String>,
    /// Number of deterministic mesh points added to the sample points.
    #[arg(long, default_value_t = DEFAULT_MESH)]
    mesh: usize,
}

impl TransformArgs {
    /// The hypothesized model spec and the transform spec these flags describe.
    fn resolve(&self) -> Result<(Option<ModelSpec>, TransformSpec)> {
        let model = self.model.as_deref().map(ModelSpec::parse).transpose()?;
        let name = match (&self.transform, &self.family, &self.target) {
            (Some(t), _, _) => t.clone(),
            (None, Some(_), _) => "parametric".into(),
            (None, None, Some(_)) => "simple".into(),
            (None, None, None) => "standard-bridge".into(),
        };
        let mut spec = TransformSpec::new(name.clone());
        if let Some(t) = &self.target {
            spec = spec.with("target", t.clone());
        }
        if let Some(d) = self.delta {
            spec = spec.with("delta", d);
        }
        if let (Some(lo), Some(hi)) = (self.a_lo, self.a_hi) {
            spec = spec.with("a_lo", lo).with("a_hi", hi);
        }
        if let Some(f) = &self.family {
            spec = spec.with("family", f.clone());
        }
        if !self.family_params.is_empty() {
            spec = spec.with("family_params", self.family_params.clone());
        }
        Ok((model, spec))
    }

    fn statistic_or_default(&self, transform: &str) -> String {
        self.statistic.clone().unwrap_or_else(|| {
            if transform.starts_with("motion") {
                "motion-sup".into()
            } else {
                "ks".into()
            }
        })
    }
}

#[derive(Debug, Args)]
struct TestArgs {
    /// Data file: one number per line; blank lines and `#` comments are skipped.
    data: PathBuf,
    #[command(flatten)]
    transform: TransformArgs,
    /// Write the transformed path as CSV.
    #[arg(long)]
    dump_path: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// JSON experiment config; flags are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    transform: TransformArgs,
    /// Law to draw samples from, when different from `--model`.
    #[arg(long)]
    sample_model: Option<String>,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 2000)]
    reps: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output CSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FigureArgs {
    /// 1: K-S, 2: omega-squared, 3: motion with uniform eta, 4: integrated motion.
    which: u8,
    #[arg(long, default_value_t = 2000)]
    reps: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Directory receiving one CSV per model.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long, default_value_t = 20_000)]
    reps: usize,
    /// Grid size of the Gaussian oracle (at most 128).
    #[arg(long, default_value_t = 16)]
    m: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Tolerance in standard errors.
    #[arg(long, default_value_t = 3.0)]
    k_se: f64,
}

/// Runs the command line `args` (including the program name) and returns
/// the process exit code: 0 on success, 2 for usage or configuration
/// errors, 3 for numerical failures.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                2
            } else {
                3
            }
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Test(args) => run_test(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Figure(args) => run_figure(args),
        Command::Check(args) => run_check(args),
    }
}

fn read_data(path: &Path) -> Result<Sample> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    Sample::parse(&text)
}

fn run_test(args: TestArgs) -> Result<i32> {
    let sample = read_data(&args.data)?;
    let (model, spec) = args.transform.resolve()?;
    let statistic_name = args.transform.statistic_or_default(&spec.name);
    let statistic = Statistic::from_name(&statistic_name)?;
    let f = match model {
        Some(m) => m.build()?,
        None if spec.name == "parametric" => crate::model::ContinuousModel::standard_normal(),
        None => return Err(Error::Config("--model is required".into())),
    };
    // Report data outside the support against the file before anything else.
    sample.check_support(&f)?;
    let pipeline = Pipeline::build(&spec, &f)?;
    let path = pipeline.path(&sample, args.transform.mesh)?;
    let value = pipeline.statistic(statistic, &path)?;
    println!("transform: {}", path.meta_value("transform").unwrap_or(&spec.name));
    if let Some(theta) = path.meta_value("theta_hat") {
        println!("theta_hat: {theta}");
    }
    println!("n: {}", sample.n());
    println!("statistic ({}): {value}", statistic.name());
    match pipeline.limit_law(statistic) {
        Some(law) => println!("p-value ({law}): {}", p_value(law, value)),
        None => println!("p-value: unavailable (no tabulated limit law for this combination)"),
    }
    if let Some(out) = &args.dump_path {
        path.write_csv(out)?;
    }
    Ok(0)
}

fn run_simulate(args: SimulateArgs) -> Result<i32> {
    let config = match &args.config {
        Some(file) => {
            let text = std::fs::read_to_string(file)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", file.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        None => {
            let (model, spec) = args.transform.resolve()?;
            let model = model.ok_or_else(|| Error::Config("--model is required".into()))?;
            let config = ExperimentConfig {
                model,
                sample_model: args
                    .sample_model
                    .as_deref()
                    .map(ModelSpec::parse)
                    .transpose()?,
                statistic: args.transform.statistic_or_default(&spec.name),
                transform: spec,
                n: args.n,
                reps: args.reps,
                seed: args.seed,
                mesh: args.transform.mesh,
            };
            config.validate()?;
            config
        }
    };
    let table = run_experiment(&config)?;
    match &args.out {
        Some(out) => table.write_csv(out)?,
        None => print!("{}", table.to_csv()),
    }
    if let Some(d) = table.distance_to_limit() {
        eprintln!("sup |ECDF - limit| = {d:.4}");
    }
    Ok(0)
}

fn run_figure(args: FigureArgs) -> Result<i32> {
    let configs = figure_configs(args.which, args.reps, args.seed)?;
    std::fs::create_dir_all(&args.out_dir)?;
    for (tag, config) in configs {
        let table = run_experiment(&config)?;
        let file = args.out_dir.join(format!("{tag}.csv"));
        table.write_csv(&file)?;
        match table.distance_to_limit() {
            Some(d) => println!("{}: sup |ECDF - limit| = {d:.4}", file.display()),
            None => println!("{}", file.display()),
        }
    }
    Ok(0)
}

fn run_check(args: CheckArgs) -> Result<i32> {
    if args.m < 2 || args.m > 128 {
        return Err(Error::Config(format!("--m must be in 2..=128, got {}", args.m)));
    }
    let outcomes = standard_checks(args.m, args.reps, args.seed, args.k_se)?;
    let mut all = true;
    for o in &outcomes {
        all &= o.passed;
        println!(
            "{} {:<44} max|dev| = {:.3e}  max dev/SE = {:.2}",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.max_abs_deviation,
            o.max_standardized_deviation
        );
    }
    Ok(if all { 0 } else { 3 })
}
