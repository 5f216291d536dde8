//! `fockprep`: spectra, statistics and sweeps for sudden trap reduction of a
//! Tonks–Girardeau gas. Every subcommand writes a versioned CSV table.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use fockprep_core::scenario::{build_combined_scenario, occupied_from_filling, Family, Strength};
use fockprep_core::sweep::{
    evaluate_scenario, lifetime_table, oracle_statistics, recipe_table, run_sweep, spectrum_table, stats_table, Mode,
    OracleSettings, SweepConfig, SweepRow,
};
use fockprep_core::table::Table;
use fockprep_core::units::{PhysicalUnits, SODIUM_23_MASS};
use fockprep_core::{capacity, Error, Result, Trap};

#[derive(Parser)]
#[command(name = "fockprep", version, about)]
struct Cli {
    #[command(flatten)]
    io: Io,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Io {
    /// JSON file supplying any of the subcommand's options; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV path (standard output when absent or `-`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Bound spectrum of one trap.
    Spectrum(SpectrumArgs),
    /// Asymptotic statistics of one trap reduction.
    Stats(StatsArgs),
    /// Sweep over fillings and width ratios.
    Sweep(SweepArgs),
    /// Fidelity F_n along a family of growing initial traps.
    Fidelity(FidelityArgs),
    /// Fock-state recipe check for one trap reduction.
    Recipe(RecipeArgs),
    /// Semiclassical lifetime of the final trap in SI units.
    Lifetime(LifetimeArgs),
}

/// Strengths accept plain numbers or multiples of π² such as `1e4pi2`.
#[derive(Args, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SpectrumArgs {
    /// Dimensionless strength U = 2mL²V/ħ².
    #[arg(long)]
    u: Option<Strength>,
    /// Trap width in internal length units.
    #[arg(long)]
    width: Option<f64>,
}

#[derive(Args, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct StatsArgs {
    /// Initial strength U_i (initial width is 1).
    #[arg(long = "u-i")]
    u_i: Option<Strength>,
    /// Final strength U_f.
    #[arg(long = "u-f")]
    u_f: Option<Strength>,
    /// Final to initial width ratio L_f/L_i.
    #[arg(long)]
    ratio: Option<f64>,
    /// Fraction of initial levels occupied.
    #[arg(long)]
    filling: Option<f64>,
    /// Append P(0..C_f).
    #[arg(long)]
    #[serde(default)]
    distribution: bool,
    /// Cross-check against direct grid integration of the density kernel.
    #[arg(long)]
    #[serde(default)]
    oracle: bool,
    /// Window margin r in L₊ = L_f + r·ξ.
    #[arg(long = "r-window")]
    r_window: Option<f64>,
    /// Oracle grid step in units of L_i.
    #[arg(long = "grid-step")]
    grid_step: Option<f64>,
}

#[derive(Args, Default)]
struct SweepArgs {
    /// Initial strength U_i (initial width is 1).
    #[arg(long = "u-i")]
    u_i: Option<Strength>,
    /// Final strength U_f.
    #[arg(long = "u-f")]
    u_f: Option<Strength>,
    /// weakening | squeezing | combined | fidelity_vs_Ci
    #[arg(long)]
    mode: Option<Mode>,
    /// Filling factors, comma separated.
    #[arg(long, value_delimiter = ',')]
    fillings: Option<Vec<f64>>,
    /// Width ratios L_f/L_i, comma separated.
    #[arg(long, value_delimiter = ',')]
    ratios: Option<Vec<f64>>,
    /// Window margin r in L₊ = L_f + r·ξ.
    #[arg(long = "r-window")]
    r_window: Option<f64>,
    /// Append P(0..C_f).
    #[arg(long)]
    distribution: bool,
    /// Final level n for fidelity_vs_Ci.
    #[arg(long)]
    level: Option<usize>,
    /// weakening | squeezing, for fidelity_vs_Ci.
    #[arg(long)]
    family: Option<Family>,
    /// Initial capacities C_i.
    #[arg(long = "ci-list", value_delimiter = ',')]
    ci_list: Option<Vec<usize>>,
}

#[derive(Args, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FidelityArgs {
    /// Final strength U_f.
    #[arg(long = "u-f")]
    u_f: Option<Strength>,
    /// Final level n (1-based).
    #[arg(long)]
    n: Option<usize>,
    /// weakening | squeezing
    #[arg(long)]
    family: Option<Family>,
    /// Initial capacities C_i.
    #[arg(long = "ci-list", value_delimiter = ',')]
    ci_list: Option<Vec<usize>>,
}

#[derive(Args, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RecipeArgs {
    /// Initial strength U_i (initial width is 1).
    #[arg(long = "u-i")]
    u_i: Option<Strength>,
    /// Final strength U_f.
    #[arg(long = "u-f")]
    u_f: Option<Strength>,
    /// Final to initial width ratio L_f/L_i.
    #[arg(long)]
    ratio: Option<f64>,
    /// Fraction of initial levels occupied.
    #[arg(long)]
    filling: Option<f64>,
}

#[derive(Args, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct LifetimeArgs {
    /// Final strength U_f.
    #[arg(long = "u-f", conflicts_with = "depth_j")]
    u_f: Option<Strength>,
    /// Final depth in J, instead of --u-f.
    #[arg(long = "depth-j")]
    depth_j: Option<f64>,
    /// Final width in micrometres.
    #[arg(long = "width-um")]
    width_um: Option<f64>,
    /// Particle mass in kg (²³Na when absent).
    #[arg(long = "mass-kg")]
    mass_kg: Option<f64>,
}

fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn required<T>(value: Option<T>, name: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("--{name} is required")))
}

fn emit(table: &Table, out: Option<&Path>) -> Result<()> {
    match out.filter(|p| *p != Path::new("-")) {
        Some(path) => table.write_to_path(path),
        None => table.write(std::io::stdout().lock()).map_err(|source| Error::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn spectrum(args: SpectrumArgs, file: SpectrumArgs) -> Result<Table> {
    let u = required(args.u.or(file.u), "u")?;
    let width = args.width.or(file.width).unwrap_or(1.0);
    spectrum_table(&Trap::from_strength(width, u.0)?)
}

fn stats(args: StatsArgs, file: StatsArgs) -> Result<Table> {
    let ui = required(args.u_i.or(file.u_i), "u-i")?.0;
    let uf = required(args.u_f.or(file.u_f), "u-f")?.0;
    let ratio = required(args.ratio.or(file.ratio), "ratio")?;
    let filling = args.filling.or(file.filling).unwrap_or(1.0);
    let distribution = args.distribution || file.distribution;
    let scenario = build_combined_scenario(ui, uf, ratio, filling)?;
    let stats = evaluate_scenario(&scenario, distribution)?;
    let oracle = if args.oracle || file.oracle {
        let defaults = OracleSettings::default();
        let settings = OracleSettings {
            window_factor: args.r_window.or(file.r_window).unwrap_or(defaults.window_factor),
            step: args.grid_step.or(file.grid_step).unwrap_or(defaults.step),
        };
        Some(oracle_statistics(&scenario, settings)?)
    } else {
        None
    };
    let row = SweepRow {
        initial_strength: ui,
        final_strength: uf,
        filling,
        ratio: scenario.final_trap.width(),
        final_capacity: capacity(&scenario.final_trap),
        scenario,
        stats,
    };
    Ok(stats_table(&row, oracle.as_ref(), distribution))
}

fn sweep(args: SweepArgs, config: Option<&Path>) -> Result<(Table, Option<PathBuf>)> {
    let mut c = match config {
        Some(path) => SweepConfig::from_path(path)?,
        None => SweepConfig::new(required(args.mode, "mode")?),
    };
    if let Some(mode) = args.mode {
        c.mode = mode;
    }
    if let Some(u) = args.u_i {
        c.initial_strength = Some(u.0);
    }
    if let Some(u) = args.u_f {
        c.final_strength = Some(u.0);
    }
    if let Some(f) = args.fillings {
        c.filling_factors = f;
    }
    if let Some(r) = args.ratios {
        c.ratio_grid = Some(r);
    }
    if let Some(r) = args.r_window {
        c.r_window = r;
    }
    c.emit_distribution |= args.distribution;
    c.level = args.level.or(c.level);
    c.family = args.family.or(c.family);
    c.ci_list = args.ci_list.or(c.ci_list);
    Ok((run_sweep(&c)?, c.output_path.clone()))
}

fn fidelity(args: FidelityArgs, file: FidelityArgs) -> Result<Table> {
    let uf = required(args.u_f.or(file.u_f), "u-f")?.0;
    let n = required(args.n.or(file.n), "n")?;
    let family = required(args.family.or(file.family), "family")?;
    let list = required(args.ci_list.or(file.ci_list), "ci-list")?;
    fockprep_core::sweep::run_fidelity_sweep(uf, n, family, &list)
}

fn recipe(args: RecipeArgs, file: RecipeArgs) -> Result<Table> {
    let ui = required(args.u_i.or(file.u_i), "u-i")?.0;
    let uf = required(args.u_f.or(file.u_f), "u-f")?.0;
    let ratio = required(args.ratio.or(file.ratio), "ratio")?;
    let filling = args.filling.or(file.filling).unwrap_or(1.0);
    let scenario = build_combined_scenario(ui, uf, ratio, filling)?;
    let occupied = occupied_from_filling(&scenario.initial, filling)?;
    recipe_table(&scenario.final_trap, &scenario.initial, occupied)
}

fn lifetime(args: LifetimeArgs, file: LifetimeArgs) -> Result<Table> {
    let width_um = args.width_um.or(file.width_um).unwrap_or(50.0);
    let mass = args.mass_kg.or(file.mass_kg).unwrap_or(SODIUM_23_MASS);
    let units = PhysicalUnits::new(mass, width_um * 1e-6)?;
    let trap = match (args.u_f.or(file.u_f), args.depth_j.or(file.depth_j)) {
        (Some(u), None) => Trap::from_strength(1.0, u.0)?,
        (None, Some(depth)) => Trap::new(1.0, depth / units.energy_scale())?,
        (Some(_), Some(_)) => return Err(Error::Config("give either --u-f or --depth-j, not both".into())),
        (None, None) => return Err(Error::Config("--u-f or --depth-j is required".into())),
    };
    Ok(lifetime_table(&trap, &units))
}

fn run(cli: Cli) -> Result<()> {
    let io = cli.io;
    let config = io.config.as_deref();
    let mut out = io.out.clone();
    let table = match cli.command {
        Command::Spectrum(a) => spectrum(a, load(config)?)?,
        Command::Stats(a) => stats(a, load(config)?)?,
        Command::Sweep(a) => {
            let (table, path) = sweep(a, config)?;
            out = out.or(path);
            table
        }
        Command::Fidelity(a) => fidelity(a, load(config)?)?,
        Command::Recipe(a) => recipe(a, load(config)?)?,
        Command::Lifetime(a) => lifetime(a, load(config)?)?,
    };
    emit(&table, out.as_deref())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
