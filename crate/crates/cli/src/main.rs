use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use canoma::channel::ScenarioInstance;
use canoma::montecarlo::{
    evaluate_instance, run_instance, trend_statistics, ExperimentConfig, InstanceRecord,
};
use canoma::report::{emit_figures, load_config, read_summary, write_run};
use canoma::{
    run_experiment_with_workers, ChannelGains, NormalizedPowers, TargetKind, WeightsCase,
};

#[derive(Parser)]
#[command(
    name = "canoma",
    version,
    about = "Comparative-advantage power allocation for two-cell NOMA"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte Carlo experiment and write fig1..fig5 CSVs, summary.json and manifest.json.
    #[command(visible_alias = "sweep")]
    Simulate(SimulateArgs),
    /// Print one instance: gains, selected edges, alpha, oracle and method results.
    Instance(InstanceArgs),
    /// Re-emit figure CSVs from a saved summary.json.
    Figures(FiguresArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightsArg {
    Equal,
    TwoToOne,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Static,
    Dynamic,
}

#[derive(Args)]
struct Overrides {
    /// JSON experiment config; missing fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed for per-instance random streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Receiver noise power(s) in watts, comma separated.
    #[arg(long, value_delimiter = ',')]
    noise: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    weights: Option<WeightsArg>,
    /// Grid sizes as POINTS_2D[,POINTS_EDGE].
    #[arg(long, value_delimiter = ',', num_args = 1)]
    grid: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    target: Option<TargetArg>,
}

impl Overrides {
    fn apply(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                load_config(path).with_context(|| format!("loading config {}", path.display()))?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.base_seed = seed;
        }
        if let Some(noise) = &self.noise {
            cfg.noise_levels_w = noise.clone();
        }
        if let Some(w) = self.weights {
            cfg.weights_case = match w {
                WeightsArg::Equal => WeightsCase::Equal,
                WeightsArg::TwoToOne => WeightsCase::TwoToOne,
            };
        }
        if let Some(grid) = &self.grid {
            match grid.as_slice() {
                [n2] => cfg.grid.grid_points_2d = *n2,
                [n2, ne] => {
                    cfg.grid.grid_points_2d = *n2;
                    cfg.grid.grid_points_edge = *ne;
                }
                _ => bail!("--grid takes POINTS_2D or POINTS_2D,POINTS_EDGE"),
            }
        }
        if let Some(t) = self.target {
            cfg.target_kind = match t {
                TargetArg::Static => TargetKind::Static,
                TargetArg::Dynamic => TargetKind::Dynamic,
            };
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads (defaults to all cores); results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct InstanceArgs {
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long, default_value_t = 0)]
    index: u64,
    /// Hand-made gains g11,g12,g21,g22 instead of a random draw.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    gains: Option<Vec<f64>>,
    /// Emit the record as JSON instead of the text block.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct FiguresArgs {
    #[arg(long)]
    summary: PathBuf,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut cfg = args.overrides.apply()?;
    if let Some(n) = args.instances {
        cfg.n_instances = n;
    }
    cfg.validate()?;
    let summary = run_experiment_with_workers(&cfg, args.workers)?;
    let manifest = write_run(&summary, &args.out_dir)
        .with_context(|| format!("writing outputs to {}", args.out_dir.display()))?;

    println!(
        "{:>12} {:>10} {:>10} {:>12} {:>10} {:>10}",
        "noise_w", "global", "edge_cond", "degr_pct", "alpha_g", "alpha_s"
    );
    for l in &summary.levels {
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
        println!(
            "{:>12.3e} {:>10.4} {:>10} {:>12.6} {:>10} {:>10}",
            l.noise_w,
            l.pct_global,
            opt(l.pct_edge_conditional),
            l.mean_degradation_pct,
            opt(l.alpha_global.mean),
            opt(l.alpha_subopt.mean)
        );
    }
    if let Ok(trend) = trend_statistics(&summary) {
        println!(
            "trend: rank correlation {:.3}, {:?}, endpoint gain {:.4} (se {:.4})",
            trend.rank_correlation, trend.direction, trend.endpoint_gain, trend.endpoint_se
        );
    }
    if let Some(rule) = &summary.alpha_rule {
        println!(
            "alpha > {} at {:.1e} W: accuracy {:.4}, majority baseline {:.4}",
            rule.threshold, rule.noise_w, rule.accuracy, rule.majority_baseline
        );
    }
    println!(
        "wrote {} files to {}",
        manifest.outputs.len() + 1,
        args.out_dir.display()
    );
    Ok(())
}

fn print_record(r: &InstanceRecord) {
    let [[g11, g12], [g21, g22]] = r.gains;
    println!(
        "instance {} (base seed {}), noise {:e} W",
        r.index, r.base_seed, r.noise_w
    );
    for (i, p) in r.user_positions.iter().enumerate() {
        println!("  user {} at ({:.3}, {:.3}) m", i + 1, p.x, p.y);
    }
    println!("  gains      g11={g11:e} g12={g12:e} g21={g21:e} g22={g22:e}");
    println!("  powers     p1={:e} p2={:e}", r.powers[0], r.powers[1]);
    let edges = canoma::EdgeSubspace::for_branch(r.branch).edges;
    println!(
        "  edges      {} and {} ({:?})",
        edges[0], edges[1], r.branch
    );
    println!("  alpha      {}", r.alpha);
    for (name, res) in [("oracle", &r.oracle), ("method", &r.method)] {
        println!(
            "  {name:<10} f11={} f12={} value={} order={} on_edge={} evaluations={}",
            res.f11, res.f12, res.value, res.order, res.on_edge, res.evaluations
        );
    }
    println!("  rel_gap    {}  global={}", r.rel_gap, r.is_global);
}

fn instance(args: InstanceArgs) -> Result<()> {
    let cfg = args.overrides.apply()?;
    cfg.validate()?;
    let noise = *cfg.noise_levels_w.first().context("no noise level")?;
    let noise = if args.overrides.noise.is_some() {
        noise
    } else {
        cfg.scenario.radio.noise_power_w
    };
    let record = match &args.gains {
        Some(g) => {
            let [g11, g12, g21, g22] = g.as_slice() else {
                bail!("--gains takes exactly four values g11,g12,g21,g22");
            };
            let gains = ChannelGains::two_by_two([[*g11, *g12], [*g21, *g22]])?;
            let tx = cfg.scenario.radio.tx_power_per_bs_w;
            let powers = NormalizedPowers::from_watts(&[tx, tx], noise)?;
            let inst = ScenarioInstance {
                user_positions: Vec::new(),
                gains,
                powers,
                seed_record: cfg.base_seed,
            };
            evaluate_instance(&cfg, &inst, args.index, noise)?
        }
        None => run_instance(&cfg, args.index, noise)?,
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&record)?);
    } else {
        print_record(&record);
    }
    Ok(())
}

fn figures(args: FiguresArgs) -> Result<()> {
    let summary = read_summary(&args.summary)
        .with_context(|| format!("reading {}", args.summary.display()))?;
    let written = emit_figures(&summary, &args.out_dir)
        .with_context(|| format!("writing figures to {}", args.out_dir.display()))?;
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Instance(a) => instance(a),
        Command::Figures(a) => figures(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
