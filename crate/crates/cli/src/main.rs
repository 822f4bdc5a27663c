use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use replicator_core::export::{self, json_string};
use replicator_core::phase::simplex_lattice;
use replicator_core::svg::{self, Portrait};
use replicator_core::sweep::parse_range;
use replicator_core::tables::table_report_matrix;
use replicator_core::{
    basins, build, converge, enumerate_fixed_points, integrate, phase_field, sweep, table_report,
    BaseGame, Error, ImitationProcess, ModelSpec, PayoffMatrix, Population, Result, SimplexState,
};

#[derive(Parser)]
#[command(name = "replicator", version, about = "Replicator dynamics for binary-opinion games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fixed points with spectra, existence and stability
    Tables(TablesArgs),
    /// Integrate one trajectory
    Simulate(SimulateArgs),
    /// Sample the vector field on the simplex
    Phase(PhaseArgs),
    /// Map lattice points to the attractor they reach
    Basins(BasinsArgs),
    /// Fixed-point tables over a grid of r and delta
    Sweep(SweepArgs),
    /// Finite-population imitation process
    Abm(AbmArgs),
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Base game
    #[arg(long, value_parser = parse_base)]
    base: Option<BaseGame>,
    /// Equivocator similarity r (a start:end:step range for sweep)
    #[arg(long)]
    equivocator: Option<String>,
    /// Preferred opinion (defaults to A when --delta is given)
    #[arg(long)]
    prefer: Option<String>,
    /// Preference bonus delta (a start:end:step range for sweep)
    #[arg(long)]
    delta: Option<String>,
    /// Payoff matrix file: labels on the first line, then one row per line
    #[arg(long, conflicts_with_all = ["base", "equivocator", "prefer", "delta", "config"])]
    matrix: Option<PathBuf>,
    /// Model config file with key=value lines (base, r, delta, preferred)
    #[arg(long, conflicts_with_all = ["base", "equivocator", "prefer", "delta"])]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct OutArgs {
    /// Output file; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Args)]
struct TablesArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Initial state as comma-separated shares; uniform when absent
    #[arg(long)]
    x0: Option<String>,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    #[arg(long, default_value_t = 100.0)]
    t_end: f64,
    /// Stop once the field's max-norm falls below this (runs up to --max-t)
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 1e4)]
    max_t: f64,
}

#[derive(Args)]
struct PhaseArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    out: OutArgs,
    #[arg(long, default_value_t = 0.05)]
    resolution: f64,
}

#[derive(Args)]
struct BasinsArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    out: OutArgs,
    #[arg(long, default_value_t = 0.05)]
    resolution: f64,
    #[arg(long, default_value_t = 1e4)]
    max_t: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    out: OutArgs,
    /// CSV with one row per fixed point instead of one per grid point
    #[arg(long)]
    rows: bool,
}

#[derive(Args)]
struct AbmArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Population size N
    #[arg(long, default_value_t = 1000)]
    pop: u64,
    /// Initial shares, rounded to counts; uniform when absent
    #[arg(long)]
    x0: Option<String>,
    #[arg(long, default_value_t = 100_000)]
    steps: u64,
    /// Snapshot interval in steps
    #[arg(long, default_value_t = 1000)]
    every: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_base(s: &str) -> std::result::Result<BaseGame, String> {
    s.parse::<BaseGame>().map_err(|e| e.to_string())
}

fn single(flag: &str, s: &str) -> Result<f64> {
    match parse_range(s)?.as_slice() {
        [v] => Ok(*v),
        _ => Err(Error::InvalidArgument(format!("--{flag} takes a single value here"))),
    }
}

/// Model spec from flags or config; ranges collapse to their first value
/// and are returned separately for sweeps.
fn spec_with_ranges(m: &ModelArgs) -> Result<(ModelSpec, Vec<f64>, Vec<f64>)> {
    if let Some(path) = &m.config {
        let spec = ModelSpec::from_config(&fs::read_to_string(path)?)?;
        spec.validate()?;
        return Ok((spec, vec![], vec![]));
    }
    let base = m
        .base
        .ok_or_else(|| Error::InvalidArgument("give --base, --config or --matrix".into()))?;
    let mut spec = ModelSpec::new(base);
    let rs = m.equivocator.as_deref().map(parse_range).transpose()?.unwrap_or_default();
    let ds = m.delta.as_deref().map(parse_range).transpose()?.unwrap_or_default();
    if let Some(r) = rs.first() {
        spec = spec.with_equivocator(*r);
    }
    match (&m.prefer, ds.first()) {
        (Some(p), Some(d)) => spec = spec.with_preference(p.clone(), *d),
        (None, Some(d)) => spec = spec.with_preference("A", *d),
        (Some(_), None) => return Err(Error::InvalidArgument("--prefer needs --delta".into())),
        (None, None) => {}
    }
    spec.validate()?;
    Ok((spec, rs, ds))
}

fn spec_of(m: &ModelArgs) -> Result<ModelSpec> {
    if let Some(r) = &m.equivocator {
        single("equivocator", r)?;
    }
    if let Some(d) = &m.delta {
        single("delta", d)?;
    }
    Ok(spec_with_ranges(m)?.0)
}

/// The game plus a display name.
fn game_of(m: &ModelArgs) -> Result<(PayoffMatrix, Option<ModelSpec>)> {
    if let Some(path) = &m.matrix {
        return Ok((PayoffMatrix::parse_text(&fs::read_to_string(path)?)?, None));
    }
    let spec = spec_of(m)?;
    Ok((build(&spec)?, Some(spec)))
}

fn name_of(spec: &Option<ModelSpec>) -> String {
    spec.as_ref().map_or_else(|| "custom".into(), ModelSpec::name)
}

fn parse_shares(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("{t:?} is not a number")))
        })
        .collect()
}

fn emit(out: &OutArgs, body: Vec<u8>) -> Result<()> {
    match &out.out {
        Some(path) => fs::write(path, body)?,
        None => io::stdout().lock().write_all(&body)?,
    }
    Ok(())
}

fn no_svg(cmd: &str) -> Error {
    Error::InvalidArgument(format!("{cmd} does not support --format svg"))
}

fn cmd_tables(a: &TablesArgs) -> Result<Vec<u8>> {
    let (game, spec) = game_of(&a.model)?;
    let rows = match &spec {
        Some(s) => table_report(s)?,
        None => table_report_matrix(&game)?,
    };
    let labels = export::labels(&game);
    let mut buf = Vec::new();
    match a.out.format {
        Format::Csv => export::table_csv(&mut buf, &rows)?,
        Format::Json => buf = json_string(&export::table_json(&name_of(&spec), &labels, &rows)).into(),
        Format::Svg => {
            let points: Vec<_> = rows.into_iter().map(|r| r.point).collect();
            buf = svg::render(&Portrait {
                labels,
                points: &points,
                title: Some(name_of(&spec)),
                ..Default::default()
            })?
            .into();
        }
    }
    Ok(buf)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<Vec<u8>> {
    let (game, _) = game_of(&a.model)?;
    let x0 = match &a.x0 {
        Some(s) => SimplexState::new(parse_shares(s)?)?,
        None => SimplexState::uniform(game.n()),
    };
    let tr = match a.tol {
        Some(tol) => converge(&game, &x0, a.step, tol, a.max_t)?,
        None => integrate(&game, &x0, a.step, a.t_end)?,
    };
    let labels = export::labels(&game);
    let mut buf = Vec::new();
    match a.out.format {
        Format::Csv => export::trajectory_csv(&mut buf, &labels, &tr)?,
        Format::Json => buf = json_string(&export::trajectory_json(&labels, &tr)).into(),
        Format::Svg => return Err(no_svg("simulate")),
    }
    Ok(buf)
}

fn cmd_phase(a: &PhaseArgs) -> Result<Vec<u8>> {
    let (game, spec) = game_of(&a.model)?;
    let field = phase_field(&game, a.resolution)?;
    let labels = export::labels(&game);
    let mut buf = Vec::new();
    match a.out.format {
        Format::Csv => export::field_csv(&mut buf, &labels, &field)?,
        Format::Json => buf = json_string(&export::field_json(&labels, &field)).into(),
        Format::Svg => {
            let points = enumerate_fixed_points(&game, 1e-9)?;
            buf = svg::render(&Portrait {
                labels,
                points: &points,
                field: &field,
                title: Some(name_of(&spec)),
                ..Default::default()
            })?
            .into();
        }
    }
    Ok(buf)
}

fn cmd_basins(a: &BasinsArgs) -> Result<Vec<u8>> {
    let (game, _) = game_of(&a.model)?;
    let map = match basins(&game, a.resolution, a.max_t) {
        Err(Error::NoAttractor) => {
            // keep the documented diagnostics: every lattice point is unresolved
            let points = simplex_lattice(game.n(), a.resolution)?.len();
            eprintln!("all {points} lattice points unresolved");
            return Err(Error::NoAttractor);
        }
        other => other?,
    };
    let labels = export::labels(&game);
    let mut buf = Vec::new();
    match a.out.format {
        Format::Csv => export::basins_csv(&mut buf, &labels, &map)?,
        Format::Json => buf = json_string(&export::basins_json(&labels, &map)).into(),
        Format::Svg => return Err(no_svg("basins")),
    }
    Ok(buf)
}

fn cmd_sweep(a: &SweepArgs) -> Result<Vec<u8>> {
    if a.model.matrix.is_some() {
        return Err(Error::InvalidArgument("sweep needs a named model, not --matrix".into()));
    }
    let (template, rs, ds) = spec_with_ranges(&a.model)?;
    let res = sweep(&template, &rs, &ds)?;
    let mut buf = Vec::new();
    match a.out.format {
        Format::Csv if a.rows => export::sweep_csv(&mut buf, &res)?,
        Format::Csv => export::sweep_counts_csv(&mut buf, &res)?,
        Format::Json => buf = json_string(&export::sweep_json(&res)).into(),
        Format::Svg => {
            let game = build(&template)?;
            let points = enumerate_fixed_points(&game, 1e-9)?;
            let loci = res
                .moving_loci()
                .into_iter()
                .map(|l| l.path.iter().flatten().cloned().collect())
                .collect();
            buf = svg::render(&Portrait {
                labels: export::labels(&game),
                points: &points,
                loci,
                title: Some(res.model.clone()),
                ..Default::default()
            })?
            .into();
        }
    }
    Ok(buf)
}

fn cmd_abm(a: &AbmArgs) -> Result<Vec<u8>> {
    let (game, _) = game_of(&a.model)?;
    let shares = match &a.x0 {
        Some(s) => parse_shares(s)?,
        None => vec![1.0; game.n()],
    };
    let pop = Population::from_frequencies(&shares, a.pop)?;
    let snaps = ImitationProcess::new(&game).run(&pop, a.steps, a.every, a.seed)?;
    let labels = export::labels(&game);
    let mut buf = Vec::new();
    match a.out.format {
        Format::Csv => export::snapshots_csv(&mut buf, &labels, &snaps)?,
        Format::Json => buf = json_string(&export::snapshots_json(&labels, &snaps)).into(),
        Format::Svg => return Err(no_svg("abm")),
    }
    Ok(buf)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Tables(a) => cmd_tables(a).and_then(|b| emit(&a.out, b)),
        Command::Simulate(a) => cmd_simulate(a).and_then(|b| emit(&a.out, b)),
        Command::Phase(a) => cmd_phase(a).and_then(|b| emit(&a.out, b)),
        Command::Basins(a) => cmd_basins(a).and_then(|b| emit(&a.out, b)),
        Command::Sweep(a) => cmd_sweep(a).and_then(|b| emit(&a.out, b)),
        Command::Abm(a) => cmd_abm(a).and_then(|b| emit(&a.out, b)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(if e.is_numeric() { 3 } else { 2 })
        }
    }
}
