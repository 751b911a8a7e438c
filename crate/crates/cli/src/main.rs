use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use subradiant_cli::config::{parse_beam, Command};
use subradiant_cli::{run, RunConfig, RunError, CHECK_FAILED};

#[derive(Parser)]
#[command(name = "subradiant", version, about = "Subradiant states of finite planar emitter arrays")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, env = "SUBRADIANT_OUTPUT_DIR")]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, env = "SUBRADIANT_THREADS")]
    threads: Option<usize>,
    /// Exit with code 4 when a built-in check fails.
    #[arg(long, global = true)]
    check: bool,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// All eigenstates sorted by decay rate.
    Spectrum(Flags),
    /// Selected states with their site amplitudes.
    Modes(Flags),
    /// Band along a high-symmetry path.
    Dispersion(Flags),
    /// Band over the irreducible Brillouin-zone quadrant.
    DispersionMap(Flags),
    /// Period where the band at M turns flat.
    FlatBand(Flags),
    /// Minimal decay against array size.
    Scaling(Flags),
    /// Period minimizing the decay of one branch.
    OptimizePeriod(Flags),
    /// Beam scattering spectrum with modal decomposition.
    Scatter(Flags),
    /// Rectangular deformation of a square array.
    Deform(Flags),
    /// Closed-form corner amplitudes against size.
    CornerAsymptotics(Flags),
}

#[derive(Args, Default)]
struct Flags {
    #[arg(long)]
    geometry: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    n_y: Option<usize>,
    #[arg(long)]
    period: Option<f64>,
    #[arg(long)]
    period_y: Option<f64>,
    #[arg(long)]
    pol: Option<String>,
    #[arg(long)]
    dump_matrix: bool,
    /// Irrep filter for `modes`.
    #[arg(long)]
    irrep: Option<String>,
    #[arg(long)]
    max_decay: Option<f64>,
    #[arg(long)]
    limit: Option<usize>,
    /// Symmetry points, e.g. `GXMG`.
    #[arg(long)]
    path: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
    /// Damped direct lattice sum for every polarization.
    #[arg(long)]
    direct: bool,
    /// Comma-separated side counts.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// `any`, `checkerboard`, `edge-antisymmetric` or irreps like `A2/B1`.
    #[arg(long)]
    branch: Option<String>,
    /// `fixed` or `optimized`.
    #[arg(long)]
    period_mode: Option<String>,
    /// `lo:hi` period or ratio range.
    #[arg(long, allow_hyphen_values = true)]
    range: Option<String>,
    /// `l=9,s=1` with optional `na=` and `beta=`.
    #[arg(long)]
    beam: Option<String>,
    /// `lo:hi:count`.
    #[arg(long, allow_hyphen_values = true)]
    detunings: Option<String>,
    #[arg(long)]
    top_k: Option<usize>,
}

fn parse_pair(text: &str, field: &str) -> Result<[f64; 2], RunError> {
    let bad = |m: String| RunError::Config { field: field.into(), message: m };
    let (a, b) = text.split_once(':').ok_or_else(|| bad(format!("expected lo:hi, got `{text}`")))?;
    let lo = a.trim().parse::<f64>().map_err(|e| bad(e.to_string()))?;
    let hi = b.trim().parse::<f64>().map_err(|e| bad(e.to_string()))?;
    Ok([lo, hi])
}

fn resolve(cli: &Cli) -> Result<RunConfig, RunError> {
    let (command, f) = match &cli.command {
        Sub::Spectrum(f) => (Command::Spectrum, f),
        Sub::Modes(f) => (Command::Modes, f),
        Sub::Dispersion(f) => (Command::Dispersion, f),
        Sub::DispersionMap(f) => (Command::DispersionMap, f),
        Sub::FlatBand(f) => (Command::FlatBand, f),
        Sub::Scaling(f) => (Command::Scaling, f),
        Sub::OptimizePeriod(f) => (Command::OptimizePeriod, f),
        Sub::Scatter(f) => (Command::Scatter, f),
        Sub::Deform(f) => (Command::Deform, f),
        Sub::CornerAsymptotics(f) => (Command::CornerAsymptotics, f),
    };
    let mut c = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    c.command = command;
    if let Some(v) = &cli.out {
        c.output_dir = v.clone();
    }
    if let Some(v) = &f.geometry {
        c.geometry = v.clone();
    }
    if let Some(v) = f.n {
        c.n = v;
    }
    if f.n_y.is_some() {
        c.n_y = f.n_y;
    }
    if let Some(v) = f.period {
        c.period = v;
    }
    if f.period_y.is_some() {
        c.period_y = f.period_y;
    }
    if let Some(v) = &f.pol {
        c.polarization = v.clone();
    }
    c.dump_matrix |= f.dump_matrix;
    if f.irrep.is_some() {
        c.modes.irrep = f.irrep.clone();
    }
    if f.max_decay.is_some() {
        c.modes.max_decay = f.max_decay;
    }
    if let Some(v) = f.limit {
        c.modes.limit = v;
    }
    if let Some(v) = &f.path {
        c.dispersion.path = v.clone();
    }
    if let Some(v) = f.samples {
        c.dispersion.samples = v;
        c.sweep.samples = v;
    }
    if let Some(v) = f.grid {
        c.dispersion.grid = v;
    }
    c.dispersion.direct |= f.direct;
    if let Some(v) = &f.sizes {
        c.sweep.sizes = v.clone();
    }
    if let Some(v) = &f.branch {
        c.sweep.branch = v.clone();
    }
    if let Some(v) = &f.period_mode {
        c.sweep.period_mode = v.clone();
    }
    if let Some(v) = &f.range {
        let pair = parse_pair(v, "range")?;
        match command {
            Command::FlatBand => c.flat_band.range = pair,
            Command::Deform => c.sweep.ratio_range = pair,
            _ => c.sweep.range = pair,
        }
    }
    if let Some(v) = &f.beam {
        parse_beam(v, &mut c.scatter).map_err(|m| RunError::Config { field: "scatter".into(), message: m })?;
    }
    if let Some(v) = &f.detunings {
        c.scatter.detunings = v.clone();
    }
    if let Some(v) = f.top_k {
        c.scatter.top_k = v;
    }
    Ok(c)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            log::warn!("thread pool already initialized: {e}");
        }
    }
    let result = resolve(&cli).and_then(|c| run(&c));
    match result {
        Ok(manifest) => {
            println!("{}", serde_json::to_string_pretty(&manifest.summary).unwrap_or_default());
            let failed: Vec<_> = manifest.checks.iter().filter(|c| !c.passed).collect();
            for c in &manifest.checks {
                eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if cli.check && !failed.is_empty() {
                return ExitCode::from(CHECK_FAILED as u8);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
