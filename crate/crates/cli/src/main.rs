//! `uwjam`: sweeps, solves and evaluates the underwater jamming game.
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O or table file error,
//! 4 consistency error (table does not match the scenario, or a failed
//! verification).

mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use uwjam_core::analysis::{analyse, sensitivity_sweep, simulate, SensitivitySpec};
use uwjam_core::channel_model::{ErrorModel, PerMode};
use uwjam_core::game_solver::{
    export_table, load_table, solve_full_game, verify_equilibrium, JammerKind, StrategyTable, TableOrigin,
};
use uwjam_core::scenario::ScenarioConfig;
use uwjam_core::Error;

use report::{config_diff, num, Csv, ReportRow};

/// Seed used when `--seed` is not given.
const DEFAULT_SEED: u64 = 20_240_611;

#[derive(Parser)]
#[command(name = "uwjam", version, about = "Energy-depleting underwater jamming game")]
struct Cli {
    /// Scenario JSON; defaults to the reference scenario.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; CSV commands default to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Packet error model, overriding the scenario.
    #[arg(long, global = true)]
    per_mode: Option<PerMode>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clear and jammed packet error rates over the distance sweep.
    PerSweep,
    /// Solves the game for one jammer distance and writes the strategy table.
    Solve {
        /// Jammer-receiver distance, m; defaults to the first sweep distance.
        #[arg(long)]
        distance: Option<f64>,
    },
    /// Expected lifetime and success probability per distance.
    Evaluate {
        /// Solved tables to evaluate instead of solving the sweep.
        #[arg(long)]
        table: Vec<PathBuf>,
    },
    /// Monte Carlo play-out of complete games per distance.
    Simulate {
        #[arg(long)]
        table: Vec<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        runs: u64,
    },
    /// Monte Carlo with Gaussian-perturbed error probabilities.
    Sensitivity {
        #[arg(long)]
        table: Vec<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        runs: u64,
        /// Comma-separated standard deviations.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.05, 0.1])]
        sigma: Vec<f64>,
    },
    /// Solves under one error model and evaluates under another.
    Mismatch {
        #[arg(long)]
        solve_model: PerMode,
        #[arg(long)]
        true_model: PerMode,
        /// Jammer behaviour the strategies are solved against.
        #[arg(long, value_parser = parse_jammer)]
        jammer: Option<JammerKind>,
    },
    /// Writes a strategy table as CSV.
    ExportTable {
        #[arg(long)]
        table: PathBuf,
    },
    /// Summarises a strategy table, optionally re-checking the equilibrium.
    InspectTable {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        verify: bool,
    },
}

fn parse_jammer(s: &str) -> Result<JammerKind, String> {
    match s {
        "equilibrium" => Ok(JammerKind::Equilibrium),
        "dummy" => Ok(JammerKind::Dummy),
        _ => Err(format!("unknown jammer '{s}' (equilibrium|dummy)")),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Domain(_) => 2,
        Error::Io(_) | Error::Table(_) => 3,
        Error::Consistency(_) | Error::Internal(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("uwjam: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

struct Context {
    scenario: ScenarioConfig,
    mode: PerMode,
    out: Option<PathBuf>,
    seed: u64,
}

impl Context {
    fn emit(&self, bytes: &[u8]) -> Result<(), Error> {
        match &self.out {
            Some(path) => std::fs::write(path, bytes)?,
            None => std::io::stdout().lock().write_all(bytes)?,
        }
        Ok(())
    }

    /// Table solved for the scenario at `distance_m`.
    fn solve_at(&self, distance_m: f64, mode: PerMode) -> Result<(StrategyTable, ErrorModel), Error> {
        let model = self.scenario.per_model(mode)?;
        let errors = self.scenario.error_model(distance_m, &model)?;
        let table = solve_full_game(&self.scenario.game_config(&errors))?
            .with_origin(TableOrigin { distance_m, per_mode: mode });
        Ok((table, errors))
    }

    /// Loads a table and checks it was solved for this scenario.
    fn load_checked(&self, path: &Path) -> Result<(StrategyTable, ErrorModel), Error> {
        let table = load_table(path)?;
        let origin = table
            .origin()
            .cloned()
            .ok_or_else(|| Error::Consistency(format!("{}: table has no scenario origin", path.display())))?;
        if origin.per_mode != self.mode {
            return Err(Error::Consistency(format!(
                "{}: table solved with per_mode {}, scenario uses {}",
                path.display(),
                origin.per_mode,
                self.mode
            )));
        }
        let errors = self.scenario.error_model(origin.distance_m, &self.scenario.per_model(self.mode)?)?;
        let expected = self.scenario.game_config(&errors);
        let diff = config_diff(&expected, table.config());
        if !diff.is_empty() {
            return Err(Error::Consistency(format!(
                "{}: table does not match the scenario at {} m: {}",
                path.display(),
                origin.distance_m,
                diff.join("; ")
            )));
        }
        Ok((table, errors))
    }

    /// Tables for the given files, or freshly solved ones over the sweep.
    fn targets(&self, tables: &[PathBuf]) -> Result<Vec<(f64, StrategyTable, ErrorModel)>, Error> {
        if tables.is_empty() {
            self.scenario.sweep_m.iter().map(|&d| self.solve_at(d, self.mode).map(|(t, e)| (d, t, e))).collect()
        } else {
            tables
                .iter()
                .map(|p| {
                    let (t, e) = self.load_checked(p)?;
                    Ok((t.origin().expect("checked").distance_m, t, e))
                })
                .collect()
        }
    }

    fn csv(&self, command: &str) -> Csv {
        Csv::new(command, &self.scenario, self.mode)
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut scenario = match &cli.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(mode) = cli.per_mode {
        scenario.per_mode = mode;
        scenario.validate()?;
    }
    let uses_seed = matches!(cli.command, Command::Simulate { .. } | Command::Sensitivity { .. });
    let seed = cli.seed.unwrap_or_else(|| {
        if uses_seed {
            eprintln!("uwjam: no --seed given, using {DEFAULT_SEED}");
        }
        DEFAULT_SEED
    });
    let ctx = Context { mode: scenario.per_mode, scenario, out: cli.out, seed };

    match cli.command {
        Command::PerSweep => per_sweep(&ctx),
        Command::Solve { distance } => solve(&ctx, distance),
        Command::Evaluate { table } => evaluate(&ctx, &table),
        Command::Simulate { table, runs } => run_simulation(&ctx, &table, runs, None),
        Command::Sensitivity { table, runs, sigma } => run_simulation(&ctx, &table, runs, Some(&sigma)),
        Command::Mismatch { solve_model, true_model, jammer } => mismatch(ctx, solve_model, true_model, jammer),
        Command::ExportTable { table } => export_csv(&ctx, &table),
        Command::InspectTable { table, verify } => inspect(&table, verify),
    }
}

fn per_sweep(ctx: &Context) -> Result<(), Error> {
    let model = ctx.scenario.per_model(ctx.mode)?;
    let mut csv = ctx.csv("per-sweep");
    csv.header(&["distance_m", "p_clear", "p_blocked"]);
    for &d in &ctx.scenario.sweep_m {
        let em = ctx.scenario.error_model(d, &model)?;
        csv.row(&[num(d), num(em.p_clear), num(em.p_blocked)]);
    }
    ctx.emit(csv.finish().as_bytes())
}

fn solve(ctx: &Context, distance: Option<f64>) -> Result<(), Error> {
    let out = ctx.out.as_ref().ok_or_else(|| Error::Config("solve needs --out for the table file".into()))?;
    let distance = distance.unwrap_or(ctx.scenario.sweep_m[0]);
    let start = Instant::now();
    let (table, errors) = ctx.solve_at(distance, ctx.mode)?;
    let elapsed = start.elapsed();
    export_table(&table, out)?;
    let init = table.initial();
    println!("distance_m: {distance}");
    println!("per_mode: {}", ctx.mode);
    println!("p_clear: {}", errors.p_clear);
    println!("p_blocked: {}", errors.p_blocked);
    println!("states: {}", table.len());
    println!("wall_time_s: {:.3}", elapsed.as_secs_f64());
    println!("initial_value: {}", init.value_t);
    println!("initial_strategy_t: {:?}", init.strategy_t.probs);
    println!("initial_strategy_j: {:?}", init.strategy_j.probs);
    println!("table: {}", out.display());
    Ok(())
}

fn evaluate(ctx: &Context, tables: &[PathBuf]) -> Result<(), Error> {
    let mut csv = ctx.csv("evaluate");
    csv.header(ReportRow::COLUMNS);
    for (d, table, errors) in ctx.targets(tables)? {
        let r = analyse(&table, &errors)?;
        csv.row(&ReportRow::analytic(d, ctx.mode, ctx.mode, &r).cells());
    }
    ctx.emit(csv.finish().as_bytes())
}

fn run_simulation(ctx: &Context, tables: &[PathBuf], runs: u64, sigmas: Option<&[f64]>) -> Result<(), Error> {
    let name = if sigmas.is_some() { "sensitivity" } else { "simulate" };
    let mut csv = ctx.csv(name);
    csv.comment(&format!("seed: {}", ctx.seed));
    csv.comment(&format!("runs: {runs}"));
    csv.header(ReportRow::COLUMNS);
    for (d, table, errors) in ctx.targets(tables)? {
        let analytic = analyse(&table, &errors)?;
        match sigmas {
            None => {
                let sim = simulate(&table, &errors, runs, ctx.seed)?;
                csv.row(&ReportRow::simulated(d, ctx.mode, &analytic, &sim).cells());
            }
            Some(sigmas) => {
                for &sigma in sigmas {
                    let sim = sensitivity_sweep(&table, &errors, &SensitivitySpec { sigma, runs }, ctx.seed)?;
                    csv.row(&ReportRow::simulated(d, ctx.mode, &analytic, &sim).cells());
                }
            }
        }
    }
    ctx.emit(csv.finish().as_bytes())
}

fn mismatch(
    mut ctx: Context,
    solve_model: PerMode,
    true_model: PerMode,
    jammer: Option<JammerKind>,
) -> Result<(), Error> {
    if let Some(j) = jammer {
        ctx.scenario.game.jammer = j;
    }
    let solve_per = ctx.scenario.per_model(solve_model)?;
    let true_per = ctx.scenario.per_model(true_model)?;
    let mut csv = Csv::new("mismatch", &ctx.scenario, solve_model);
    let g = &ctx.scenario.game;
    match g.jammer {
        JammerKind::Dummy => csv.comment(&format!(
            "jammer: dummy, n_j = min(K+1, 2K-1, b_j) = {} at full battery",
            (g.k_info + 1).min(2 * g.k_info - 1).min(g.b_j0)
        )),
        JammerKind::Equilibrium => csv.comment("jammer: equilibrium"),
    }
    csv.header(ReportRow::COLUMNS);
    for &d in &ctx.scenario.sweep_m {
        let solve_errors = ctx.scenario.error_model(d, &solve_per)?;
        let truth = ctx.scenario.error_model(d, &true_per)?;
        let table = solve_full_game(&ctx.scenario.game_config(&solve_errors))?;
        let r = analyse(&table, &truth)?;
        csv.row(&ReportRow::analytic(d, solve_model, true_model, &r).cells());
    }
    ctx.emit(csv.finish().as_bytes())
}

fn export_csv(ctx: &Context, path: &Path) -> Result<(), Error> {
    let table = load_table(path)?;
    let c = table.config();
    let mut csv = Csv::bare();
    csv.comment(&format!("uwjam export-table {}", path.display()));
    csv.comment(&format!("config: {}", serde_json::to_string(c).expect("config serialises")));
    let mut cols = vec!["b_t".to_string(), "b_j".to_string(), "value_t".to_string()];
    cols.extend((c.k_info..=2 * c.k_info).map(|a| format!("pt_{a}")));
    cols.extend((0..2 * c.k_info).map(|a| format!("pj_{a}")));
    csv.header(&cols.iter().map(String::as_str).collect::<Vec<_>>());
    for e in table.entries() {
        let mut cells = vec![e.state.b_t.to_string(), e.state.b_j.to_string(), num(e.value_t)];
        cells.extend((c.k_info..=2 * c.k_info).map(|a| num(e.strategy_t.prob_of(a))));
        cells.extend((0..2 * c.k_info).map(|a| num(e.strategy_j.prob_of(a))));
        csv.row(&cells);
    }
    ctx.emit(csv.finish().as_bytes())
}

fn inspect(path: &Path, verify: bool) -> Result<(), Error> {
    let table = load_table(path)?;
    let c = table.config();
    println!("table: {}", path.display());
    println!("config: {}", serde_json::to_string(c).expect("config serialises"));
    match table.origin() {
        Some(o) => println!("origin: {} m, per_mode {}", o.distance_m, o.per_mode),
        None => println!("origin: none"),
    }
    println!("states: {}", table.len());
    let init = table.initial();
    println!("initial_value_t: {}", init.value_t);
    println!("initial_strategy_t: {:?} over {:?}", init.strategy_t.probs, init.strategy_t.support);
    println!("initial_strategy_j: {:?} over {:?}", init.strategy_j.probs, init.strategy_j.support);
    if verify {
        let chk = verify_equilibrium(&table)?;
        println!("max_transmitter_gain: {:e}", chk.transmitter_gain);
        println!("max_jammer_gain: {:e}", chk.jammer_gain);
        println!("max_value_error: {:e}", chk.value_error);
        let jammer_checked = c.jammer == JammerKind::Equilibrium;
        let gain = if jammer_checked { chk.max_gain() } else { chk.transmitter_gain };
        if gain > 1e-6 || chk.value_error > 1e-9 {
            return Err(Error::Consistency(format!(
                "equilibrium check failed at ({}, {})",
                chk.worst_state.b_t, chk.worst_state.b_j
            )));
        }
        println!("verify: ok");
    }
    Ok(())
}
