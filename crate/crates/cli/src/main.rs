//! Command-line experiments: closed-form analysis, Monte-Carlo simulation,
//! access-parameter optimization, parameter sweeps, and mechanism comparison,
//! all emitting plot-ready CSV/JSON.

mod output;
mod resolve;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use aoi_probe::{
    analytic_aoi, approx_aoi, grid_search, run_replications, sweep, AoiResult, Error, GridSpec,
    Mechanism, Objective, SimControls, SimStats, SweepParameter, ValidatedConfig,
};
use output::{num, opt_num, Format, Report};
use resolve::ConfigArgs;

#[derive(Debug)]
pub enum CliError {
    /// Bad input: malformed config, out-of-range field, unknown flag value.
    Invalid(String),
    /// Numerical failure: non-convergence, degenerate chain, empty grid.
    Numerical(String),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) | CliError::Numerical(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig { .. } | Error::InvalidGrid(_) => CliError::Invalid(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "aoi-probe",
    about = "Network-average AoI of probing-based energy-harvesting random access",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct SimArgs {
    /// Rounds per replication
    #[arg(long, default_value_t = 100_000)]
    horizon: u64,

    /// Independent replications (seeded base_seed..base_seed+replications)
    #[arg(long, default_value_t = 100)]
    replications: u32,

    /// Base seed for the replication streams
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl SimArgs {
    fn seeds(&self) -> Vec<u64> {
        (0..self.replications as u64).map(|i| self.seed + i).collect()
    }
    fn controls(&self) -> SimControls {
        SimControls {
            horizon: self.horizon,
            replications: self.replications,
            base_seed: self.seed,
        }
    }
    fn validate(&self) -> Result<(), CliError> {
        if self.horizon == 0 {
            return Err(CliError::Invalid("horizon must be >= 1".into()));
        }
        if self.replications == 0 {
            return Err(CliError::Invalid("replications must be >= 1".into()));
        }
        Ok(())
    }
    /// One replication runs a plain episode (no confidence interval);
    /// several run in parallel and aggregate.
    fn run(&self, config: &ValidatedConfig) -> Result<aoi_probe::SimStats, CliError> {
        self.validate()?;
        if self.replications == 1 {
            Ok(aoi_probe::run_episode(config, self.seed, self.horizon))
        } else {
            run_replications(config, &self.seeds(), self.horizon).map_err(CliError::from)
        }
    }
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Write the result table to this file
    #[arg(long)]
    output: Option<PathBuf>,

    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    Exact,
    Approx,
    Simulated,
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// Grid resolution for q and eta
    #[arg(long, default_value_t = 0.01)]
    grid_step: f64,

    /// Objective minimized over the grid
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Exact)]
    objective: ObjectiveArg,
}

impl GridArgs {
    fn spec(&self, sim: &SimArgs) -> Result<GridSpec, CliError> {
        if !(self.grid_step > 0.0 && self.grid_step <= 0.5) {
            return Err(CliError::Invalid(format!(
                "grid-step must be in (0, 0.5], got {}",
                self.grid_step
            )));
        }
        let objective = match self.objective {
            ObjectiveArg::Exact => Objective::AnalyticExact,
            ObjectiveArg::Approx => Objective::AnalyticApprox,
            ObjectiveArg::Simulated => {
                sim.validate()?;
                if sim.replications < 2 {
                    return Err(CliError::Invalid(
                        "the simulated objective needs at least 2 replications".into(),
                    ));
                }
                Objective::Simulated(sim.controls())
            }
        };
        Ok(GridSpec::uniform(self.grid_step, objective))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form analysis of one configuration
    Analyze {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Seeded Monte-Carlo simulation of one configuration
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Grid search over the access parameters
    Optimize {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Re-optimize along a swept parameter and tabulate the results
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Parameter to sweep: n | xi | delta
        #[arg(long)]
        parameter: String,
        /// Comma-separated list of values, e.g. 10,20,50,100
        #[arg(long)]
        values: String,
        /// Skip the per-point simulation column
        #[arg(long)]
        no_sim: bool,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Optimize, analyze and simulate every mechanism side by side
    Compare {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Analyze { config, out } => cmd_analyze(&resolve::resolve(&config)?, &out),
        Command::Simulate { config, sim, out } => {
            cmd_simulate(&resolve::resolve(&config)?, &sim, &out)
        }
        Command::Optimize {
            config,
            grid,
            sim,
            out,
        } => cmd_optimize(&resolve::resolve(&config)?, &grid, &sim, &out),
        Command::Sweep {
            config,
            parameter,
            values,
            no_sim,
            grid,
            sim,
            out,
        } => cmd_sweep(
            &resolve::resolve(&config)?,
            &parameter,
            &values,
            no_sim,
            &grid,
            &sim,
            &out,
        ),
        Command::Compare {
            config,
            grid,
            sim,
            out,
        } => cmd_compare(&resolve::resolve(&config)?, &grid, &sim, &out),
    }
}

const ANALYZE_COLUMNS: &[&str] = &[
    "mechanism", "n", "xi", "m", "delta", "q", "eta", "regime", "p_a", "z", "p_ac", "p_cs",
    "p_t", "p_s", "e_ta", "e_ta2", "e_te", "e_te2", "e_t", "e_t2", "aoi_rounds",
    "aoi_approx_rounds", "aoi_physical",
];

fn analyze_row(config: &ValidatedConfig, r: &AoiResult) -> Vec<String> {
    let c = config.as_config();
    let m = r.moments.as_ref();
    vec![
        c.mechanism.to_string(),
        c.n.to_string(),
        num(c.xi),
        c.m.to_string(),
        num(c.delta),
        num(c.q),
        num(c.eta),
        r.regime.to_string(),
        num(r.p_a),
        opt_num(r.z),
        num(r.probabilities.p_ac),
        num(r.probabilities.p_cs),
        num(r.probabilities.p_t),
        num(r.probabilities.p_s),
        opt_num(m.map(|m| m.e_ta)),
        opt_num(m.map(|m| m.e_ta2)),
        opt_num(m.map(|m| m.e_te)),
        opt_num(m.map(|m| m.e_te2)),
        opt_num(m.map(|m| m.e_t)),
        opt_num(m.map(|m| m.e_t2)),
        num(r.aoi_rounds),
        opt_num(r.approx_aoi_rounds),
        num(r.aoi_physical),
    ]
}

fn cmd_analyze(config: &ValidatedConfig, out: &OutputArgs) -> Result<(), CliError> {
    let result = analytic_aoi(config)?;
    println!(
        "{} n={} xi={} M={} delta={}  q={} eta={}",
        config.mechanism(),
        config.n(),
        config.xi(),
        config.m(),
        config.delta(),
        config.q(),
        config.eta()
    );
    println!(
        "regime {}  p_a {:.6}  z {}",
        result.regime,
        result.p_a,
        result.z.map_or("-".into(), |z| format!("{z:.6}")),
    );
    println!(
        "p_T {:.6}  p_s {:.6}",
        result.probabilities.p_t, result.probabilities.p_s
    );
    if let Some(m) = &result.moments {
        println!(
            "E[T_A] {:.4}  E[T_E] {:.4}  E[T] {:.4}  E[T^2] {:.4}",
            m.e_ta, m.e_te, m.e_t, m.e_t2
        );
    }
    println!(
        "AoI rounds {:.6}  approx {}  physical {:.6}",
        result.aoi_rounds,
        result
            .approx_aoi_rounds
            .map_or("-".into(), |a| format!("{a:.6}")),
        result.aoi_physical
    );

    if let Some(path) = &out.output {
        let mut report = Report::new(*config, ANALYZE_COLUMNS.to_vec());
        report.push_row(analyze_row(config, &result));
        report.write(path, out.format)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

const SIMULATE_COLUMNS: &[&str] = &[
    "mechanism", "n", "xi", "m", "delta", "q", "eta", "horizon", "replications",
    "burn_in_rounds", "mean_aoi_rounds", "mean_aoi_physical", "ci95", "empirical_p_a",
    "empirical_p_t", "empirical_p_s", "attempts", "successes", "collisions", "probes",
    "energy_consumption_rate", "deficit_histogram",
];

fn simulate_row(config: &ValidatedConfig, s: &SimStats) -> Vec<String> {
    let c = config.as_config();
    let histogram = s
        .deficit_histogram
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(";");
    vec![
        c.mechanism.to_string(),
        c.n.to_string(),
        num(c.xi),
        c.m.to_string(),
        num(c.delta),
        num(c.q),
        num(c.eta),
        s.horizon.to_string(),
        s.replications.to_string(),
        s.burn_in_rounds.to_string(),
        num(s.mean_aoi_rounds),
        num(s.mean_aoi_physical),
        num(s.ci95),
        num(s.empirical_p_a),
        num(s.empirical_p_t),
        num(s.empirical_p_s),
        s.attempts.to_string(),
        s.successes.to_string(),
        s.collisions.to_string(),
        s.probes.to_string(),
        num(s.energy_consumption_rate),
        histogram,
    ]
}

fn cmd_simulate(
    config: &ValidatedConfig,
    sim: &SimArgs,
    out: &OutputArgs,
) -> Result<(), CliError> {
    let seeds = sim.seeds();
    let stats = sim.run(config)?;
    println!(
        "{} n={}: {} replications x {} rounds (burn-in {})",
        config.mechanism(),
        config.n(),
        stats.replications,
        stats.horizon,
        stats.burn_in_rounds
    );
    println!(
        "mean AoI {:.4} rounds ({:.4} physical), ci95 {:.4}",
        stats.mean_aoi_rounds, stats.mean_aoi_physical, stats.ci95
    );
    println!(
        "p_a {:.6}  p_T {:.6}  p_s {:.6}  energy rate {:.6}",
        stats.empirical_p_a, stats.empirical_p_t, stats.empirical_p_s,
        stats.energy_consumption_rate
    );

    if let Some(path) = &out.output {
        let mut report = Report::new(*config, SIMULATE_COLUMNS.to_vec());
        report.seeds = Some(seeds);
        report.push_row(simulate_row(config, &stats));
        report.write(path, out.format)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_optimize(
    config: &ValidatedConfig,
    grid: &GridArgs,
    sim: &SimArgs,
    out: &OutputArgs,
) -> Result<(), CliError> {
    let spec = grid.spec(sim)?;
    let result = grid_search(config, &spec)?;
    println!(
        "{}: q* = {}, eta* = {}, AoI* = {:.6} rounds ({})",
        config.mechanism(),
        result.q_star,
        result.eta_star,
        result.aoi_star,
        result.regime_star
    );

    if let Some(path) = &out.output {
        let mut report = Report::new(*config, vec!["q", "eta", "aoi_rounds", "note"]);
        if matches!(spec.objective, Objective::Simulated(_)) {
            report.seeds = Some(sim.seeds());
        }
        report.notes.push(format!(
            "optimum: q={} eta={} aoi={}",
            result.q_star, result.eta_star, result.aoi_star
        ));
        for p in &result.table {
            report.push_row(vec![
                num(p.q),
                num(p.eta),
                opt_num(p.aoi),
                p.note.clone().unwrap_or_default(),
            ]);
        }
        report.write(path, out.format)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

const SWEEP_COLUMNS: &[&str] = &[
    "parameter", "value", "q_star", "eta_star", "regime", "aoi_exact", "aoi_approx",
    "aoi_physical", "aoi_simulated", "aoi_simulated_physical", "sim_ci95",
];

fn cmd_sweep(
    config: &ValidatedConfig,
    parameter: &str,
    values: &str,
    no_sim: bool,
    grid: &GridArgs,
    sim: &SimArgs,
    out: &OutputArgs,
) -> Result<(), CliError> {
    let parameter: SweepParameter = parameter.parse().map_err(CliError::from)?;
    let values: Vec<f64> = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Invalid(format!("values: not a number: {v:?}")))
        })
        .collect::<Result<_, _>>()?;
    let spec = grid.spec(sim)?;
    if !no_sim {
        sim.validate()?;
        if sim.replications < 2 {
            return Err(CliError::Invalid(
                "sweep simulation needs at least 2 replications (or pass --no-sim)".into(),
            ));
        }
    }
    let controls = sim.controls();
    let rows = sweep(
        config,
        parameter,
        &values,
        &spec,
        if no_sim { None } else { Some(&controls) },
    )?;

    for row in &rows {
        println!(
            "{}={}: q*={} eta*={} ({}) exact {:.4} approx {} physical {:.4} simulated {}",
            parameter.as_str(),
            row.value,
            row.q_star,
            row.eta_star,
            row.regime,
            row.aoi_exact,
            row.aoi_approx
                .map_or("-".into(), |a| format!("{a:.4}")),
            row.aoi_physical,
            row.aoi_simulated
                .map_or("-".into(), |a| format!("{a:.4}")),
        );
    }

    if let Some(path) = &out.output {
        let mut report = Report::new(*config, SWEEP_COLUMNS.to_vec());
        if !no_sim {
            report.seeds = Some(sim.seeds());
        }
        for row in &rows {
            report.push_row(vec![
                row.parameter.as_str().to_string(),
                num(row.value),
                num(row.q_star),
                num(row.eta_star),
                row.regime.to_string(),
                num(row.aoi_exact),
                opt_num(row.aoi_approx),
                num(row.aoi_physical),
                opt_num(row.aoi_simulated),
                opt_num(row.aoi_simulated_physical),
                opt_num(row.sim_ci95),
            ]);
        }
        report.write(path, out.format)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

const COMPARE_COLUMNS: &[&str] = &[
    "mechanism", "q_star", "eta_star", "regime", "aoi_theory_rounds", "aoi_theory_physical",
    "aoi_approx_rounds", "aoi_sim_rounds", "aoi_sim_physical", "sim_ci95", "p_a_theory",
    "p_a_sim", "p_t_theory", "p_t_sim", "p_s_theory", "p_s_sim", "energy_rate_sim",
];

fn cmd_compare(
    config: &ValidatedConfig,
    grid: &GridArgs,
    sim: &SimArgs,
    out: &OutputArgs,
) -> Result<(), CliError> {
    let spec = grid.spec(sim)?;
    let seeds = sim.seeds();
    let mut report = Report::new(*config, COMPARE_COLUMNS.to_vec());
    report.seeds = Some(seeds.clone());

    println!(
        "{:>5} {:>6} {:>6} {:>6} {:>12} {:>12} {:>12} {:>10}",
        "mech", "q*", "eta*", "regime", "theory", "simulated", "approx", "ci95"
    );
    for mechanism in Mechanism::ALL {
        let base = config
            .with_mechanism(mechanism)
            .map_err(CliError::from)?;
        let best = grid_search(&base, &spec)?;
        let at_best = base
            .with_access(best.q_star, best.eta_star)
            .map_err(CliError::from)?;
        let theory = analytic_aoi(&at_best)?;
        let approx = match mechanism {
            Mechanism::SaBaseline => None,
            _ => Some(approx_aoi(&at_best)?),
        };
        let stats = sim.run(&at_best)?;

        println!(
            "{:>5} {:>6} {:>6} {:>6} {:>12.4} {:>12.4} {:>12} {:>10.4}",
            mechanism.to_string(),
            best.q_star,
            best.eta_star,
            theory.regime.to_string(),
            theory.aoi_rounds,
            stats.mean_aoi_rounds,
            approx.map_or("-".into(), |a| format!("{a:.4}")),
            stats.ci95
        );
        report.push_row(vec![
            mechanism.to_string(),
            num(best.q_star),
            num(best.eta_star),
            theory.regime.to_string(),
            num(theory.aoi_rounds),
            num(theory.aoi_physical),
            opt_num(approx),
            num(stats.mean_aoi_rounds),
            num(stats.mean_aoi_physical),
            num(stats.ci95),
            num(theory.p_a),
            num(stats.empirical_p_a),
            num(theory.probabilities.p_t),
            num(stats.empirical_p_t),
            num(theory.probabilities.p_s),
            num(stats.empirical_p_s),
            num(stats.energy_consumption_rate),
        ]);
    }

    if let Some(path) = &out.output {
        report.write(path, out.format)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
