//! `copoly`: analyze, simulate, compare, and sweep the copolymerization
//! chain from the command line.

mod config;
mod errors;
mod manifest;
mod output;
mod svg;
mod sweep;

use clap::{Args, Parser, Subcommand};
use config::ConfigFile;
use copoly::analysis::{self, CompareOptions};
use copoly::theory;
use copoly::{RateSet, RegimeClass, SimConfig, StopRule, Trajectory};
use errors::CliError;
use manifest::RunManifest;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use sweep::VarySpec;

#[derive(Parser)]
#[command(
    name = "copoly",
    version,
    about = "Copolymerization chain: closed-form growth laws and exact stochastic simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print every closed-form quantity for a rate set as JSON.
    Analyze(AnalyzeArgs),
    /// Run one realization and write its event log as CSV.
    Simulate(SimulateArgs),
    /// Simulate replicas and compare empirical observables against theory.
    Compare(CompareArgs),
    /// Evaluate the closed forms over a grid of one or two rate parameters.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct RateArgs {
    /// Comma-separated attachment rates, one per monomer type (e.g. 1,1.2).
    #[arg(long = "k-plus", value_name = "LIST")]
    k_plus: Option<String>,
    /// Comma-separated detachment rates, one per monomer type.
    #[arg(long = "k-minus", value_name = "LIST")]
    k_minus: Option<String>,
    /// JSON config file; explicit flags override its values. Run manifests
    /// are accepted here.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

impl RateArgs {
    fn load(&self) -> Result<(ConfigFile, RateSet), CliError> {
        let file = match &self.config {
            Some(path) => config::load(path)?,
            None => ConfigFile::default(),
        };
        let rates = config::resolve_rates(self.k_plus.as_deref(), self.k_minus.as_deref(), &file)?;
        Ok((file, rates))
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    rates: RateArgs,
    /// Absolute tolerance on g(m) - 1 for the root solve.
    #[arg(long, value_name = "TOL")]
    tol: Option<f64>,
    /// Fail with exit code 3 unless the rate set is transient.
    #[arg(long)]
    require_transient: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    rates: RateArgs,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Simulate up to this time.
    #[arg(long = "t-max", value_name = "REAL")]
    t_max: Option<f64>,
    /// Record exactly this many jumps.
    #[arg(long = "max-jumps", value_name = "N")]
    max_jumps: Option<u64>,
    /// Event CSV path; a manifest is written alongside it.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Snapshot stride in events.
    #[arg(long = "record-stride", value_name = "N")]
    record_stride: Option<u64>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    rates: RateArgs,
    /// Number of replicas; replica i runs with seed + i.
    #[arg(long, value_name = "N")]
    replicas: Option<u64>,
    /// Base seed.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long = "t-max", value_name = "REAL")]
    t_max: Option<f64>,
    #[arg(long = "max-jumps", value_name = "N")]
    max_jumps: Option<u64>,
    /// Number of sample times in the report series.
    #[arg(long, value_name = "N")]
    grid: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Also render static SVG line plots.
    #[arg(long)]
    svg: bool,
    /// Restrict the report to root occupation (required in the recurrent
    /// regimes, where sigma and velocity have no limit values).
    #[arg(long)]
    root_only: bool,
    /// Burn-in fraction for the velocity estimate.
    #[arg(long = "burn-in", value_name = "FRAC")]
    burn_in: Option<f64>,
    /// Trailing jumps treated as provisional in the boundary extraction;
    /// defaults to max(1000, 5% of the jump count).
    #[arg(long = "tail-guard", value_name = "N")]
    tail_guard: Option<u64>,
    #[arg(long, value_name = "TOL")]
    tol: Option<f64>,
    #[arg(long = "record-stride", value_name = "N")]
    record_stride: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    rates: RateArgs,
    /// Swept parameter, `k_plus[i]=start:stop:step` (1-based index); may be
    /// given twice for a two-parameter grid.
    #[arg(long, value_name = "SPEC")]
    vary: Vec<String>,
    /// CSV path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "TOL")]
    tol: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // clap exits 2 on usage errors and 0 for --help/--version.
        Err(err) => err.exit(),
    };
    let result = match cli.command {
        Command::Analyze(args) => cmd_analyze(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Compare(args) => cmd_compare(&args),
        Command::Sweep(args) => cmd_sweep(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            err.exit_code()
        }
    }
}

/// Worker pool capped by COPOLY_THREADS (0 or unset = automatic).
fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let requested = std::env::var("COPOLY_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if requested > 0 {
        builder = builder.num_threads(requested);
    }
    builder
        .build()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))
}

fn resolve_tol(flag: Option<f64>, file: &ConfigFile) -> f64 {
    flag.or(file.tol).unwrap_or(theory::DEFAULT_TOL)
}

fn resolve_stride(flag: Option<u64>, file: &ConfigFile) -> Result<NonZeroUsize, CliError> {
    let stride = flag.or(file.record_stride).unwrap_or(1000);
    NonZeroUsize::new(stride as usize)
        .ok_or_else(|| CliError::Usage("--record-stride must be >= 1".into()))
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let (file, rates) = args.rates.load()?;
    let tol = resolve_tol(args.tol, &file);
    let summary =
        theory::summarize(&rates, tol).map_err(|e| CliError::Internal(e.to_string()))?;
    if args.require_transient && summary.regime != RegimeClass::Transient {
        return Err(CliError::Regime(format!(
            "--require-transient set but the rate set is {} (alpha = {})",
            summary.regime.as_str(),
            summary.alpha
        )));
    }
    println!("{}", output::summary_json(&summary)?);
    Ok(())
}

fn manifest_sibling(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let (file, rates) = args.rates.load()?;
    let seed = args
        .seed
        .or(file.seed)
        .ok_or_else(|| CliError::Usage("--seed is required (flag or config)".into()))?;
    let stop = config::resolve_stop(args.t_max, args.max_jumps, &file)?;
    let stride = resolve_stride(args.record_stride, &file)?;

    let sim_config = SimConfig::new(rates.clone(), seed, stop).with_record_stride(stride);
    let trajectory = copoly::simulate(&sim_config);
    output::write_event_csv(&args.out, &trajectory)?;

    let mut manifest = RunManifest::new("simulate", &rates).with_stop(stop);
    manifest.seed = Some(seed);
    manifest.record_stride = Some(stride.get() as u64);
    manifest.outputs = vec![file_name(&args.out)];
    manifest.write(&manifest_sibling(&args.out))?;

    eprintln!(
        "simulate: {} events over horizon {}, final length {} -> {}",
        trajectory.num_jumps(),
        trajectory.horizon(),
        trajectory.final_state().len(),
        args.out.display()
    );
    Ok(())
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn run_replicas(
    rates: &RateSet,
    base_seed: u64,
    replicas: u64,
    stop: StopRule,
    stride: NonZeroUsize,
) -> Result<Vec<Trajectory>, CliError> {
    use rayon::prelude::*;
    let pool = thread_pool()?;
    // Replica i gets seed base + i; results are gathered in replica order
    // regardless of completion order.
    Ok(pool.install(|| {
        (0..replicas)
            .into_par_iter()
            .map(|i| {
                let cfg = SimConfig::new(rates.clone(), base_seed + i, stop)
                    .with_record_stride(stride);
                copoly::simulate(&cfg)
            })
            .collect()
    }))
}

fn format_vec(values: &[f64]) -> String {
    let inner: Vec<String> = values.iter().map(|v| format!("{v:.4}")).collect();
    format!("[{}]", inner.join(", "))
}

fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let (file, rates) = args.rates.load()?;
    let tol = resolve_tol(args.tol, &file);
    let seed = args.seed.or(file.seed).unwrap_or(1);
    let replicas = args.replicas.or(file.replicas).unwrap_or(10).max(1);
    let grid_points = args.grid.or(file.grid).unwrap_or(200).max(1);
    let burn_in = args.burn_in.or(file.burn_in).unwrap_or(0.2);
    let tail_guard = args.tail_guard.or(file.tail_guard);
    let root_only = args.root_only || file.root_only.unwrap_or(false);
    let use_svg = args.svg || file.svg.unwrap_or(false);
    let stop = config::resolve_stop(args.t_max, args.max_jumps, &file)?;
    let stride = resolve_stride(args.record_stride, &file)?;

    let summary =
        theory::summarize(&rates, tol).map_err(|e| CliError::Internal(e.to_string()))?;
    if summary.regime != RegimeClass::Transient && !root_only {
        return Err(CliError::Regime(format!(
            "sigma/velocity comparisons are undefined in the {} regime (alpha = {}); pass --root-only for the root-occupation report",
            summary.regime.as_str(),
            summary.alpha
        )));
    }

    std::fs::create_dir_all(&args.out).map_err(errors::io_at(&args.out))?;
    let trajectories = run_replicas(&rates, seed, replicas, stop, stride)?;

    // Sample grid over the shortest replica horizon.
    let horizon = trajectories
        .iter()
        .map(|t| t.horizon())
        .fold(f64::INFINITY, f64::min);
    let grid: Vec<f64> = (1..=grid_points)
        .map(|j| j as f64 * horizon / grid_points as f64)
        .collect();

    let options = CompareOptions {
        tail_guard: tail_guard.map(|g| g as usize),
        burn_in,
    };
    let report = analysis::compare(&trajectories, &summary, &grid, &options)
        .map_err(|e| CliError::Internal(e.to_string()))?;

    let mut outputs = Vec::new();
    if let (Some(growth), false) = (&report.growth, root_only) {
        let report_path = args.out.join("report.csv");
        output::write_report_csv(&report_path, &grid, growth)?;
        outputs.push("report.csv".to_string());

        let boundary_path = args.out.join("boundary.csv");
        output::write_boundary_csv(&boundary_path, &growth.boundary)?;
        outputs.push("boundary.csv".to_string());

        let cone_path = args.out.join("cone_matrix.json");
        output::write_cone_json(&cone_path, &growth.cone_empirical)?;
        outputs.push("cone_matrix.json".to_string());

        if use_svg {
            let d = growth.sigma_theory.len();
            let mut series = Vec::new();
            let mut point_sets: Vec<Vec<(f64, f64)>> = Vec::new();
            for i in 0..d {
                point_sets.push(
                    grid.iter()
                        .enumerate()
                        .map(|(g, &t)| (t, growth.sigma_mean[g][i]))
                        .collect(),
                );
                point_sets.push(grid.iter().map(|&t| (t, growth.sigma_theory[i])).collect());
            }
            let labels: Vec<String> = (0..d)
                .flat_map(|i| {
                    [
                        format!("sigma_{} empirical", i + 1),
                        format!("sigma_{} limit", i + 1),
                    ]
                })
                .collect();
            for i in 0..d {
                series.push(svg::Series {
                    label: &labels[2 * i],
                    points: &point_sets[2 * i],
                    color: svg::PALETTE[i % svg::PALETTE.len()],
                    dashed: false,
                });
                series.push(svg::Series {
                    label: &labels[2 * i + 1],
                    points: &point_sets[2 * i + 1],
                    color: svg::THEORY_COLOR,
                    dashed: true,
                });
            }
            let chart = svg::line_chart(
                "Monomer fractions vs limiting composition",
                "t",
                "sigma_i(t)",
                &series,
            );
            std::fs::write(args.out.join("sigma.svg"), chart)
                .map_err(errors::io_at(&args.out))?;
            outputs.push("sigma.svg".to_string());

            let vel_emp: Vec<(f64, f64)> = grid
                .iter()
                .enumerate()
                .map(|(g, &t)| (t, growth.velocity_mean[g]))
                .collect();
            let vel_theory: Vec<(f64, f64)> =
                grid.iter().map(|&t| (t, growth.velocity_theory)).collect();
            let chart = svg::line_chart(
                "Growth velocity |X(t)|/t vs limit",
                "t",
                "|X(t)|/t",
                &[
                    svg::Series {
                        label: "empirical mean",
                        points: &vel_emp,
                        color: svg::PALETTE[0],
                        dashed: false,
                    },
                    svg::Series {
                        label: "v",
                        points: &vel_theory,
                        color: svg::THEORY_COLOR,
                        dashed: true,
                    },
                ],
            );
            std::fs::write(args.out.join("velocity.svg"), chart)
                .map_err(errors::io_at(&args.out))?;
            outputs.push("velocity.svg".to_string());
        }
    }
    let root_path = args.out.join("root.csv");
    output::write_root_csv(&root_path, &report.root)?;
    outputs.push("root.csv".to_string());

    let mut manifest = RunManifest::new("compare", &rates).with_stop(stop);
    manifest.seed = Some(seed);
    manifest.tol = Some(tol);
    manifest.record_stride = Some(stride.get() as u64);
    manifest.replicas = Some(replicas);
    manifest.grid = Some(grid_points);
    manifest.burn_in = Some(burn_in);
    manifest.tail_guard = tail_guard;
    manifest.svg = Some(use_svg);
    manifest.root_only = Some(root_only);
    manifest.outputs = outputs;
    manifest.write(&args.out.join("manifest.json"))?;

    eprintln!(
        "compare: regime {} (alpha = {}), {} replicas, horizon {}",
        report.regime.as_str(),
        summary.alpha,
        replicas,
        horizon
    );
    if let Some(growth) = &report.growth {
        let final_sigma = growth.sigma_mean.last().expect("non-empty grid");
        eprintln!(
            "  sigma at horizon {} vs limit {} (max dev {:.4})",
            format_vec(final_sigma),
            format_vec(&growth.sigma_theory),
            growth.final_sigma_dev
        );
        eprintln!(
            "  velocity at horizon {:.5} vs v = {:.5} (dev {:.5}); burn-in estimates mean {:.5}",
            growth.velocity_mean.last().expect("non-empty grid"),
            growth.velocity_theory,
            growth.final_velocity_dev,
            growth.velocity_estimates.iter().sum::<f64>() / growth.velocity_estimates.len() as f64
        );
        eprintln!(
            "  level fractions {} vs {} (max dev {:.4})",
            format_vec(&growth.level_fraction_mean),
            format_vec(&growth.level_fraction_theory),
            growth.level_dev
        );
        eprintln!("  cone-chain rows, max entry dev {:.4}", growth.cone_dev);
    }
    eprintln!(
        "  root occupation {:.4} vs {:.4}",
        report.root.mean, report.root.theory
    );
    eprintln!("  wrote {} file(s) in {}", manifest.outputs.len() + 1, args.out.display());
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    use rayon::prelude::*;
    let (file, rates) = args.rates.load()?;
    let tol = resolve_tol(args.tol, &file);
    let vary_texts: Vec<String> = if args.vary.is_empty() {
        file.vary.clone().unwrap_or_default()
    } else {
        args.vary.clone()
    };
    if vary_texts.is_empty() || vary_texts.len() > 2 {
        return Err(CliError::Usage(
            "sweep needs one or two --vary specs (`k_plus[i]=start:stop:step`)".into(),
        ));
    }
    let specs: Vec<VarySpec> = vary_texts
        .iter()
        .map(|text| VarySpec::parse(text, rates.dim()))
        .collect::<Result<_, _>>()?;

    let mut cells: Vec<(f64, Option<f64>)> = Vec::new();
    match specs.as_slice() {
        [one] => {
            for &v in &one.values {
                cells.push((v, None));
            }
        }
        [one, two] => {
            for &v1 in &one.values {
                for &v2 in &two.values {
                    cells.push((v1, Some(v2)));
                }
            }
        }
        _ => unreachable!(),
    }

    let pool = thread_pool()?;
    let rows: Result<Vec<sweep::SweepRow>, CliError> = pool.install(|| {
        cells
            .par_iter()
            .map(|&values| sweep::evaluate_cell(&rates, &specs, values, tol))
            .collect()
    });
    let csv = sweep::render_csv(&rows?, rates.dim());

    match &args.out {
        Some(path) => {
            std::fs::write(path, &csv).map_err(errors::io_at(path))?;
            let mut manifest = RunManifest::new("sweep", &rates);
            manifest.tol = Some(tol);
            manifest.vary = Some(vary_texts);
            manifest.outputs = vec![file_name(path)];
            manifest.write(&manifest_sibling(path))?;
            eprintln!("sweep: {} rows -> {}", cells.len(), path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}
