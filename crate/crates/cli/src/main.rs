use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use uavcov::analysis::{DEFAULT_N0_DBM, DEFAULT_P_TX_DBM};
use uavcov::channel::los_probability;
use uavcov::experiments::{
    format_sig6, run_sweep, validate_engines, write_csv, BoundSelection, Engines, SweepConfig, DEFAULT_SEED,
    DEFAULT_TRIALS, ORACLE_TOLERANCE,
};
use uavcov::units::{db_to_linear, dbm_to_mw};
use uavcov::Preset;

#[derive(Parser)]
#[command(
    name = "uavcov",
    version,
    about = "Coverage probability and area spectral efficiency of UAV networks"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the LoS probability against 3D distance.
    LosProb(LosProbArgs),
    /// Coverage probability at one operating point.
    Coverage(PointArgs),
    /// Area spectral efficiency at one operating point.
    Ase(PointArgs),
    /// Run a density sweep and write CSV.
    Sweep(SweepArgs),
    /// Check the analytical bounds against Monte Carlo on a grid.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct LosProbArgs {
    #[arg(long, value_parser = parse_model)]
    model: Preset,
    /// UAV height, km.
    #[arg(long, default_value_t = 0.05)]
    h: f64,
    /// Distances in km; if absent a log grid from --r-min to --r-max is used.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    r: Vec<f64>,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    r_max: f64,
    #[arg(long, default_value_t = 50)]
    points: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundArg {
    Lower,
    Upper,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Analytical,
    Montecarlo,
    Both,
}

#[derive(Args)]
struct PointArgs {
    #[arg(long, value_parser = parse_model)]
    model: Preset,
    /// UAV height, km.
    #[arg(long, default_value_t = 0.05)]
    h: f64,
    /// UAVs per km².
    #[arg(long)]
    density: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    gamma_db: f64,
    #[arg(long, default_value_t = DEFAULT_P_TX_DBM, allow_negative_numbers = true)]
    p_dbm: f64,
    #[arg(long, default_value_t = DEFAULT_N0_DBM, allow_negative_numbers = true)]
    n0_dbm: f64,
    #[arg(long, value_enum, default_value = "both")]
    bound: BoundArg,
    #[arg(long, value_enum, default_value = "analytical")]
    engine: EngineArg,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML sweep description.
    #[arg(long, env = "UAVCOV_CONFIG")]
    config: Option<PathBuf>,
    /// Named preset (fig3 … fig8), used when no config file is given.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    #[arg(long, value_enum)]
    engine: Option<EngineArg>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Overrides the config's output path; stdout if neither is set.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// TOML sweep description; defaults to all models, h ∈ {0.05, 0.1} km and
    /// the standard density grid.
    #[arg(long, env = "UAVCOV_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn runtime(e: impl ToString) -> Failure {
    Failure::Runtime(e.to_string())
}

fn parse_model(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: uavcov::Error| e.to_string())
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match path {
        Some(p) => Ok(Box::new(
            File::create(p).map_err(|e| runtime(format!("{}: {e}", p.display())))?,
        )),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn los_prob(args: LosProbArgs) -> Result<ExitCode, Failure> {
    let model = args.model.los_model();
    let grid = if args.r.is_empty() {
        let lo = args.r_min.unwrap_or(args.h);
        if !(lo > 0.0 && args.r_max > lo && args.points >= 2) {
            return Err(usage("need 0 < --r-min < --r-max and --points >= 2"));
        }
        let (a, b) = (lo.ln(), args.r_max.ln());
        (0..args.points)
            .map(|i| (a + (b - a) * i as f64 / (args.points - 1) as f64).exp())
            .collect()
    } else {
        args.r.clone()
    };
    let mut rows = Vec::with_capacity(grid.len());
    for r in grid {
        let p = los_probability(&model, r, args.h).map_err(usage)?;
        rows.push((r, p));
    }
    let mut out = sink(args.output.as_deref())?;
    let mut text = String::from("r_km,los_probability\n");
    for (r, p) in rows {
        text += &format!("{},{p}\n", format_sig6(r));
    }
    out.write_all(text.as_bytes()).map_err(runtime)?;
    Ok(ExitCode::SUCCESS)
}

fn point(args: PointArgs, ase: bool) -> Result<ExitCode, Failure> {
    let bound = match args.bound {
        BoundArg::Lower => BoundSelection::Lower,
        BoundArg::Upper => BoundSelection::Upper,
        BoundArg::Both => BoundSelection::Both,
    };
    let cfg = SweepConfig {
        models: vec![args.model.into()],
        heights: vec![args.h],
        densities: vec![args.density],
        gamma_db: args.gamma_db,
        gamma: db_to_linear(args.gamma_db),
        bound,
        engines: engines(args.engine),
        ase,
        output: None,
        seed: args.seed,
        trials: args.trials,
        p_tx: dbm_to_mw(args.p_dbm),
        n0: dbm_to_mw(args.n0_dbm),
    };
    cfg.validate().map_err(usage)?;
    let rows = run_sweep(&cfg).map_err(runtime)?;
    write_rows(&rows, args.output.as_deref())
}

fn engines(e: EngineArg) -> Engines {
    match e {
        EngineArg::Analytical => Engines::Analytical,
        EngineArg::Montecarlo => Engines::Montecarlo,
        EngineArg::Both => Engines::Both,
    }
}

fn write_rows(rows: &[uavcov::experiments::SweepRow], path: Option<&Path>) -> Result<ExitCode, Failure> {
    let mut failed = false;
    for r in rows {
        for d in &r.diagnostics {
            eprintln!("{} h={} λ={}: {d}", r.model, r.h_km, r.lambda_per_km2);
            failed = true;
        }
    }
    write_csv(rows, sink(path)?).map_err(runtime)?;
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn load(config: Option<&Path>) -> Result<Option<SweepConfig>, Failure> {
    config.map(|p| SweepConfig::from_path(p).map_err(usage)).transpose()
}

fn sweep(args: SweepArgs) -> Result<ExitCode, Failure> {
    let mut cfg = match (load(args.config.as_deref())?, &args.preset) {
        (Some(c), _) => c,
        (None, Some(p)) => SweepConfig::preset(p).map_err(usage)?,
        (None, None) => SweepConfig::default(),
    };
    if let Some(e) = args.engine {
        cfg.engines = engines(e);
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if args.output.is_some() {
        cfg.output = args.output;
    }
    cfg.validate().map_err(usage)?;
    let rows = run_sweep(&cfg).map_err(runtime)?;
    write_rows(&rows, cfg.output.as_deref())
}

fn validate(args: ValidateArgs) -> Result<ExitCode, Failure> {
    let mut cfg = match load(args.config.as_deref())? {
        Some(c) => c,
        None => SweepConfig {
            heights: vec![0.05, 0.1],
            bound: BoundSelection::Both,
            ..SweepConfig::default()
        },
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    cfg.validate().map_err(usage)?;
    if cfg.trials < 10_000 {
        eprintln!(
            "warning: {} trials give confidence halfwidths well above the {ORACLE_TOLERANCE} tolerance",
            cfg.trials
        );
    }
    let cells = validate_engines(&cfg).map_err(runtime)?;
    let mut text = String::from("model,h_km,lambda_per_km2,bound,analytical,montecarlo,halfwidth,difference,status\n");
    let mut passed = 0;
    for c in &cells {
        let ok = c.passes();
        passed += ok as usize;
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        text += &format!(
            "{},{},{},{},{},{:.6},{:.6},{},{}\n",
            c.model,
            c.h_km,
            c.lambda_per_km2,
            c.bound,
            fmt(c.analytical),
            c.montecarlo.value,
            c.montecarlo.halfwidth,
            fmt(c.difference()),
            if ok { "pass" } else { "FAIL" }
        );
        if let Some(e) = &c.error {
            eprintln!("{} h={} λ={} {}: {e}", c.model, c.h_km, c.lambda_per_km2, c.bound);
        }
    }
    sink(args.output.as_deref())?
        .write_all(text.as_bytes())
        .map_err(runtime)?;
    eprintln!("{passed}/{} cells within {ORACLE_TOLERANCE} + halfwidth", cells.len());
    Ok(if passed == cells.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::LosProb(a) => los_prob(a),
        Command::Coverage(a) => point(a, false),
        Command::Ase(a) => point(a, true),
        Command::Sweep(a) => sweep(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
