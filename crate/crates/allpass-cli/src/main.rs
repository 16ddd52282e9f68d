//! Batch command-line interface for all-pass model estimation.

mod io;

use allpass::asymptotics::{asymptotic_covariance, efficiency_report, scalar_multiple_r};
use allpass::estimation::{fit, FitOptions, FitResult, KernelKind};
use allpass::noise::NoiseModel;
use allpass::order::{select_order, OrderReport, OrderSelection};
use allpass::pipeline::{deconv_identify, diagnose, prefit_ar, AcfDiagnostics};
use allpass::residuals::AllPassParams;
use allpass::simulate::{replicate_rng, simulate_allpass, simulate_allpass_with_rng, simulate_ar};
use allpass::weights::WeightFunction;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "allpass",
    version,
    about = "Rank-based estimation for all-pass time series models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a causal all-pass (or AR) series to CSV.
    Simulate(SimulateArgs),
    /// Fit an all-pass model of fixed order to a series.
    Fit(FitArgs),
    /// Select the all-pass model order up to a maximum.
    OrderSelect(OrderArgs),
    /// Print asymptotic relative efficiency tables.
    AreTable(AreArgs),
    /// Autocorrelation diagnostics of a residual series.
    Diagnose(DiagnoseArgs),
    /// Identify the all-pass order of prefit residuals end to end.
    Deconv(DeconvArgs),
    /// Monte Carlo study of the estimator or the order-selection rule.
    McStudy(McArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    Allpass,
    Ar,
}

#[derive(Args, Debug)]
struct NoiseArgs {
    /// Noise family: laplace | logistic | gaussian | mixture | t
    #[arg(long, default_value = "laplace")]
    noise: String,
    /// Noise variance (ignored by the fixed mixture).
    #[arg(long, default_value_t = 1.0)]
    var: f64,
    /// Degrees of freedom for Student-t noise.
    #[arg(long)]
    df: Option<f64>,
}

impl NoiseArgs {
    fn build(&self) -> Result<NoiseModel, String> {
        parse_noise(&self.noise, self.var, self.df)
    }
}

fn parse_noise(name: &str, var: f64, df: Option<f64>) -> Result<NoiseModel, String> {
    let lower = name.to_ascii_lowercase();
    let model = match lower.as_str() {
        "laplace" => NoiseModel::laplace(var),
        "logistic" => NoiseModel::logistic(var),
        "gaussian" | "normal" => NoiseModel::gaussian(var),
        "mixture" => Ok(NoiseModel::normal_mixture()),
        "t" | "student-t" => {
            let df = df.ok_or("Student-t noise needs --df")?;
            NoiseModel::student_t(df, var)
        }
        other => {
            // Accept t3 / t(3) shorthands, as in the efficiency tables.
            let trimmed = other
                .strip_prefix("t(")
                .and_then(|s| s.strip_suffix(')'))
                .or_else(|| other.strip_prefix('t'));
            match trimmed.and_then(|s| s.parse::<f64>().ok()) {
                Some(df) => NoiseModel::student_t(df, var),
                None => return Err(format!("unknown noise family {name:?}")),
            }
        }
    };
    model.map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
struct WeightArgs {
    /// Weight function: wilcoxon | arctan | vdw
    #[arg(long = "weights", default_value = "wilcoxon")]
    weights: String,
    /// Steepness for the arctan weight.
    #[arg(long, default_value_t = 500.0)]
    arctan_m: f64,
}

impl WeightArgs {
    fn build(&self) -> Result<WeightFunction, String> {
        match self.weights.to_ascii_lowercase().as_str() {
            "wilcoxon" => Ok(WeightFunction::wilcoxon()),
            "arctan" => WeightFunction::arctan(self.arctan_m).map_err(|e| e.to_string()),
            "vdw" | "van-der-waerden" => Ok(WeightFunction::van_der_waerden()),
            other => Err(format!("unknown weight function {other:?}")),
        }
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Comma-separated coefficients phi_1,...,phi_p.
    #[arg(long, value_delimiter = ',', required = true)]
    phi: Vec<f64>,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, short = 'n')]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Burn-in length; defaults to 500 + 50 p.
    #[arg(long)]
    burnin: Option<usize>,
    /// Process kind to simulate.
    #[arg(long, value_enum, default_value_t = ModelKind::Allpass)]
    model: ModelKind,
    #[arg(short = 'o', long, required = true)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(short = 'i', long)]
    input: PathBuf,
    /// Model order.
    #[arg(long)]
    p: usize,
    #[command(flatten)]
    weight: WeightArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    starts: usize,
    #[arg(long, default_value_t = 12)]
    refine: usize,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OrderArgs {
    #[arg(short = 'i', long)]
    input: PathBuf,
    #[arg(long = "max-order", short = 'P')]
    max_order: usize,
    #[command(flatten)]
    weight: WeightArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    starts: usize,
    #[arg(long, default_value_t = 12)]
    refine: usize,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AreArgs {
    #[command(flatten)]
    weight: WeightArgs,
    /// Comma-separated noise families (t3, t(6), laplace, ...) or "all" for
    /// the nine standard rows.
    #[arg(long, default_value = "all", value_delimiter = ',')]
    noise: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    var: f64,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DiagnoseArgs {
    #[arg(short = 'i', long)]
    input: PathBuf,
    #[arg(long = "max-lag", default_value_t = 40)]
    max_lag: usize,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DeconvArgs {
    /// Residual series, or a raw series when --prefit-ar is given.
    #[arg(short = 'i', long)]
    input: PathBuf,
    #[arg(long = "max-order", short = 'P')]
    max_order: usize,
    /// First fit a causal AR of this order and analyze its residuals.
    #[arg(long = "prefit-ar")]
    prefit_ar: Option<usize>,
    #[command(flatten)]
    weight: WeightArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    starts: usize,
    #[arg(long, default_value_t = 12)]
    refine: usize,
    #[arg(long = "max-lag", default_value_t = 40)]
    max_lag: usize,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
    /// Where to write the final-residual ACF diagnostics CSV.
    #[arg(long = "diag-out")]
    diag_out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum StudyMode {
    Estimation,
    Order,
}

#[derive(Args, Debug)]
struct McArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    phi: Vec<f64>,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, short = 'n')]
    n: usize,
    #[arg(long, default_value_t = 200)]
    replicates: usize,
    #[command(flatten)]
    weight: WeightArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = StudyMode::Estimation)]
    mode: StudyMode,
    /// Maximum order for the order-selection study.
    #[arg(long = "max-order", default_value_t = 5)]
    max_order: usize,
    #[arg(long, default_value_t = 1000)]
    starts: usize,
    #[arg(long, default_value_t = 12)]
    refine: usize,
    #[arg(long)]
    burnin: Option<usize>,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    configure_threads();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            if e.use_stderr() {
                eprint!("{e}");
                eprintln!("error: invalid usage");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let outcome = match cli.command {
        Command::Simulate(args) => run_simulate(args),
        Command::Fit(args) => run_fit(args),
        Command::OrderSelect(args) => run_order(args),
        Command::AreTable(args) => run_are(args),
        Command::Diagnose(args) => run_diagnose(args),
        Command::Deconv(args) => run_deconv(args),
        Command::McStudy(args) => run_mc(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// ALLPASS_THREADS caps the worker count; results do not depend on it.
fn configure_threads() {
    if let Ok(raw) = std::env::var("ALLPASS_THREADS") {
        if let Ok(k) = raw.trim().parse::<usize>() {
            if k >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global();
            }
        }
    }
}

enum CliError {
    /// Bad flags, unreadable files, malformed input: exit 1.
    Usage(String),
    /// The computation itself failed: exit 2.
    Numeric(String),
}

impl From<allpass::AllPassError> for CliError {
    fn from(e: allpass::AllPassError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn run_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let noise = args.noise.build().map_err(usage)?;
    let params = AllPassParams::new(args.phi.clone())?;
    let sim = match args.model {
        ModelKind::Allpass => simulate_allpass(&params, &noise, args.n, args.seed, args.burnin)?,
        ModelKind::Ar => simulate_ar(&params, &noise, args.n, args.seed, args.burnin)?,
    };
    let config = format!(
        "simulate --model {:?} --phi {} --noise {} --var {} --n {} --burnin {}",
        args.model,
        join(&args.phi),
        noise.name(),
        noise.variance(),
        args.n,
        sim.burnin,
    );
    io::write_series(&args.output, "x", &sim.x, &config, Some(args.seed)).map_err(usage)
}

fn fit_report_lines(result: &FitResult) -> Vec<String> {
    let mut lines = Vec::new();
    let p = result.p;
    for j in 0..p {
        lines.push(format!(
            "phi_hat_{} = {}",
            j + 1,
            result.phi_hat.coeffs()[j]
        ));
    }
    for j in 0..p {
        let se = result
            .std_errors
            .as_ref()
            .map_or("unavailable".to_string(), |s| s[j].to_string());
        lines.push(format!("std_error_{} = {se}", j + 1));
    }
    for j in 0..p {
        let (lo, hi) = result
            .ci
            .as_ref()
            .map_or(("unavailable".into(), "unavailable".into()), |ci| {
                (ci[j].0.to_string(), ci[j].1.to_string())
            });
        lines.push(format!("ci_lower_{} = {lo}", j + 1));
        lines.push(format!("ci_upper_{} = {hi}", j + 1));
    }
    lines.push(format!(
        "tau_hat = {}",
        result
            .tau_hat
            .map_or("unavailable (in-sample A5 violation)".to_string(), |t| t
                .to_string())
    ));
    lines.push(format!("s_hat = {}", result.s_hat));
    lines.push(format!("K_hat_z = {}", result.k_hat_z));
    lines.push(format!("L_hat_z = {}", result.l_hat_z));
    lines.push(format!("objective = {}", result.objective));
    lines.push(format!("n = {}", result.n));
    lines.push(format!("p = {}", result.p));
    lines.push(format!("weight = {}", result.weight_name));
    lines.push(format!("seed = {}", result.seed));
    lines.push(format!("starts_used = {}", result.starts_used));
    lines.push(format!("converged = {}", result.converged));
    lines
}

fn run_fit(args: FitArgs) -> Result<(), CliError> {
    let x = io::read_series(&args.input).map_err(usage)?;
    let w = args.weight.build().map_err(usage)?;
    let opts = FitOptions {
        n_starts: args.starts,
        n_refine: args.refine,
        seed: args.seed,
        kernel: KernelKind::Gaussian,
    };
    let result = fit(&x, args.p, &w, &opts)?;
    let config = format!(
        "fit -i {} --p {} --weights {} --starts {} --refine {}",
        args.input.display(),
        args.p,
        w.name(),
        args.starts,
        args.refine,
    );
    io::write_report(
        args.output.as_deref(),
        &fit_report_lines(&result),
        &config,
        Some(args.seed),
    )
    .map_err(usage)
}

fn order_report_lines(report: &OrderReport) -> Vec<String> {
    let mut lines = Vec::new();
    lines.push(format!("tau_hat = {}", report.tau_hat));
    lines.push(format!("n = {}", report.n));
    lines.push(format!("max_order = {}", report.max_order));
    for rec in &report.records {
        lines.push(format!(
            "order {}: coeff = {:>12.6}, threshold = {:.6}, significant = {}",
            rec.p, rec.top_coeff, rec.threshold, rec.significant
        ));
    }
    lines.push(match report.selection {
        OrderSelection::Order(r) => format!("selected_order = {r}"),
        OrderSelection::Undetermined => "selected_order = undetermined (increase P)".to_string(),
    });
    lines
}

fn run_order(args: OrderArgs) -> Result<(), CliError> {
    let x = io::read_series(&args.input).map_err(usage)?;
    let w = args.weight.build().map_err(usage)?;
    let opts = FitOptions {
        n_starts: args.starts,
        n_refine: args.refine,
        seed: args.seed,
        kernel: KernelKind::Gaussian,
    };
    let report = select_order(&x, args.max_order, &w, &opts)?;
    let config = format!(
        "order-select -i {} --max-order {} --weights {} --starts {} --refine {}",
        args.input.display(),
        args.max_order,
        w.name(),
        args.starts,
        args.refine,
    );
    io::write_report(
        args.output.as_deref(),
        &order_report_lines(&report),
        &config,
        Some(args.seed),
    )
    .map_err(usage)
}

fn run_are(args: AreArgs) -> Result<(), CliError> {
    let w = args.weight.build().map_err(usage)?;
    let vdw = WeightFunction::van_der_waerden();
    let names: Vec<String> = if args.noise.len() == 1 && args.noise[0] == "all" {
        [
            "laplace", "logistic", "t3", "t6", "t9", "t12", "t15", "t20", "t30",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    } else {
        args.noise.clone()
    };
    let mut rows = Vec::new();
    for name in &names {
        let noise = parse_noise(name, args.var, None).map_err(usage)?;
        let report = efficiency_report(&w, &noise)?;
        let are_vdw = scalar_multiple_r(&vdw, &noise)? / report.multiple_r;
        rows.push(format!(
            "{},{:.4},{:.4},{:.4},{:.3},{:.3},{:.3}",
            noise.name(),
            report.multiple_r,
            report.multiple_lad,
            report.multiple_ml,
            report.are_r_lad,
            report.are_r_ml,
            are_vdw,
        ));
    }
    let config = format!(
        "are-table --weights {} --noise {} --var {}",
        w.name(),
        names.join(","),
        args.var
    );
    io::write_table(
        args.output.as_deref(),
        "noise,multiple_R,multiple_LAD,multiple_ML,ARE_R_to_LAD,ARE_R_to_ML,ARE_R_to_vdW",
        &rows,
        &config,
        None,
    )
    .map_err(usage)
}

fn diagnostics_rows(diag: &AcfDiagnostics) -> Vec<String> {
    (0..diag.max_lag)
        .map(|i| {
            format!(
                "{},{},{},{},{}",
                i + 1,
                diag.acf[i],
                diag.acf_squares[i],
                diag.acf_abs[i],
                diag.bound
            )
        })
        .collect()
}

fn run_diagnose(args: DiagnoseArgs) -> Result<(), CliError> {
    let x = io::read_series(&args.input).map_err(usage)?;
    let diag = diagnose(&x, args.max_lag)?;
    let config = format!(
        "diagnose -i {} --max-lag {}",
        args.input.display(),
        args.max_lag
    );
    io::write_table(
        args.output.as_deref(),
        "lag,acf_w,acf_w2,acf_absw,bound",
        &diagnostics_rows(&diag),
        &config,
        None,
    )
    .map_err(usage)
}

fn run_deconv(args: DeconvArgs) -> Result<(), CliError> {
    let series = io::read_series(&args.input).map_err(usage)?;
    let w = args.weight.build().map_err(usage)?;
    let residual_series = match args.prefit_ar {
        Some(p) => {
            let (_, res) = prefit_ar(&series, p)?;
            res
        }
        None => series,
    };
    let opts = FitOptions {
        n_starts: args.starts,
        n_refine: args.refine,
        seed: args.seed,
        kernel: KernelKind::Gaussian,
    };
    let report = deconv_identify(&residual_series, args.max_order, &w, &opts, args.max_lag)?;
    let config = format!(
        "deconv -i {} --max-order {} --weights {} --prefit-ar {:?} --max-lag {}",
        args.input.display(),
        args.max_order,
        w.name(),
        args.prefit_ar,
        args.max_lag,
    );

    let mut lines = order_report_lines(&report.order_report);
    if let Some(fitted) = &report.fit {
        lines.push(String::new());
        lines.push("# all-pass fit at the selected order".to_string());
        lines.extend(fit_report_lines(fitted));
    }
    lines.push(String::new());
    lines.push(format!(
        "# final-residual diagnostics: bound {:.6}, exceedances (levels/squares/abs) {}/{}/{}",
        report.diagnostics.bound,
        report.diagnostics.exceed,
        report.diagnostics.exceed_squares,
        report.diagnostics.exceed_abs,
    ));
    io::write_report(args.output.as_deref(), &lines, &config, Some(args.seed)).map_err(usage)?;

    if let Some(diag_path) = &args.diag_out {
        io::write_table(
            Some(diag_path),
            "lag,acf_w,acf_w2,acf_absw,bound",
            &diagnostics_rows(&report.diagnostics),
            &config,
            Some(args.seed),
        )
        .map_err(usage)?;
    }
    Ok(())
}

fn run_mc(args: McArgs) -> Result<(), CliError> {
    let noise = args.noise.build().map_err(usage)?;
    let w = args.weight.build().map_err(usage)?;
    let params = AllPassParams::new(args.phi.clone())?;
    if args.replicates == 0 {
        return Err(usage("need at least one replicate"));
    }
    match args.mode {
        StudyMode::Estimation => mc_estimation(&args, &params, &noise, &w),
        StudyMode::Order => mc_order(&args, &params, &noise, &w),
    }
}

fn replicate_fit_seed(master: u64, replicate: usize) -> u64 {
    master
        .wrapping_add(1)
        .wrapping_mul(31)
        .wrapping_add(replicate as u64)
}

fn mc_estimation(
    args: &McArgs,
    params: &AllPassParams,
    noise: &NoiseModel,
    w: &WeightFunction,
) -> Result<(), CliError> {
    let p = params.order();
    let truth = params.coeffs();

    // Replicates run in parallel on independent streams; aggregation walks
    // the results in replicate order.
    let fits: Vec<FitResult> = (0..args.replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(args.seed, i as u64);
            let sim = simulate_allpass_with_rng(params, noise, args.n, &mut rng, args.burnin)?;
            let opts = FitOptions {
                n_starts: args.starts,
                n_refine: args.refine,
                seed: replicate_fit_seed(args.seed, i),
                kernel: KernelKind::Gaussian,
            };
            fit(&sim.x, p, w, &opts)
        })
        .collect::<allpass::Result<Vec<_>>>()?;

    let multiple = scalar_multiple_r(w, noise)?;
    let asym = asymptotic_covariance(params, multiple, args.n)?;

    let mut rows = Vec::new();
    for j in 0..p {
        let estimates: Vec<f64> = fits.iter().map(|f| f.phi_hat.coeffs()[j]).collect();
        let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
        let sd = (estimates
            .iter()
            .map(|e| (e - mean) * (e - mean))
            .sum::<f64>()
            / (estimates.len() - 1).max(1) as f64)
            .sqrt();
        let mut covered = 0usize;
        let mut with_ci = 0usize;
        for f in &fits {
            if let Some(ci) = &f.ci {
                with_ci += 1;
                if ci[j].0 <= truth[j] && truth[j] <= ci[j].1 {
                    covered += 1;
                }
            }
        }
        let coverage = if with_ci == 0 {
            f64::NAN
        } else {
            100.0 * covered as f64 / with_ci as f64
        };
        rows.push(format!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.1}",
            j + 1,
            truth[j],
            asym[(j, j)].sqrt(),
            mean,
            sd,
            mean - truth[j],
            coverage,
        ));
    }
    let config = mc_config(args, noise, w);
    io::write_table(
        args.output.as_deref(),
        "coef,truth,asymptotic_sd,empirical_mean,empirical_sd,bias,coverage_pct",
        &rows,
        &config,
        Some(args.seed),
    )
    .map_err(usage)
}

fn mc_order(
    args: &McArgs,
    params: &AllPassParams,
    noise: &NoiseModel,
    w: &WeightFunction,
) -> Result<(), CliError> {
    let reports: Vec<OrderReport> = (0..args.replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(args.seed, i as u64);
            let sim = simulate_allpass_with_rng(params, noise, args.n, &mut rng, args.burnin)?;
            let opts = FitOptions {
                n_starts: args.starts,
                n_refine: args.refine,
                seed: replicate_fit_seed(args.seed, i),
                kernel: KernelKind::Gaussian,
            };
            select_order(&sim.x, args.max_order, w, &opts)
        })
        .collect::<allpass::Result<Vec<_>>>()?;

    let mut freq = vec![0usize; args.max_order + 1];
    for r in &reports {
        freq[r.selected_or_max()] += 1;
    }
    let rows: Vec<String> = freq
        .iter()
        .enumerate()
        .map(|(order, count)| format!("{order},{count}"))
        .collect();
    let config = mc_config(args, noise, w);
    io::write_table(
        args.output.as_deref(),
        "order,frequency",
        &rows,
        &config,
        Some(args.seed),
    )
    .map_err(usage)
}

fn mc_config(args: &McArgs, noise: &NoiseModel, w: &WeightFunction) -> String {
    format!(
        "mc-study --mode {:?} --phi {} --noise {} --var {} --n {} --replicates {} --weights {} --max-order {} --starts {} --refine {}",
        args.mode,
        join(&args.phi),
        noise.name(),
        noise.variance(),
        args.n,
        args.replicates,
        w.name(),
        args.max_order,
        args.starts,
        args.refine,
    )
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
