//! Command-line front end for the three-channel retail pricing model.
//!
//! Subcommands: `solve` (equilibrium with diagnostics), `demand` (split at
//! explicit prices), `verify` (independent checks of an equilibrium),
//! `mc` (Monte Carlo demand estimate), `sweep` (one-factor sensitivity
//! series). Every command reads a JSON scenario file and emits a
//! deterministic artifact to stdout or `--out`; warnings and findings go
//! to stderr so the artifact stays byte-stable.
//!
//! Exit status: 0 on success, 1 on input errors (bad flags, malformed or
//! out-of-contract scenario files, invalid sweep ranges), 2 on numerical
//! degeneracy (vanishing denominators, singular systems, exact
//! classification ties). Feasibility findings never affect the exit
//! status: they are results, not failures.

mod output;
mod scenario;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use output::{document, sweep_csv, sweep_payload, write_output, RunMeta};
use scenario::{parse_scenario, ScenarioFile};
use trimarket::{
    closed_form_prices, concavity_check, demand, demand_triple_raw, foc_residuals,
    indifference_points, mc_comparison_valid, monte_carlo_demand, nash_deviation_check,
    sign_summary, solve_equilibrium, solve_foc_system, ChannelSet, MarketParams, PriceVector,
    SweepMode, SweepParam, SweepSpec, DEFAULT_SWEEP_STEPS, MC_RNG_NAME,
};

// ============================================================================
// Command line definition
// ============================================================================

#[derive(Parser)]
#[command(
    name = "trimarket",
    version,
    about = "Demand, profit, and price-equilibrium calculations for a three-channel retail market"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the price equilibrium and report demands, profits, and checks
    Solve {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Demand split and regime at explicit prices
    Demand {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        prices: PriceArgs,
        /// Offered channels: uoe, uo, ue, or oe
        #[arg(long, default_value = "uoe")]
        channels: String,
    },
    /// Independent verification: residuals, solver cross-check, deviation
    /// scan, and Monte Carlo comparison where defined
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        prices: PriceArgs,
        /// Relative half-width of the deviation grid around each price
        #[arg(long, default_value_t = 0.5)]
        rel_range: f64,
        /// Number of deviation grid points per channel (odd keeps the
        /// incumbent price on the grid)
        #[arg(long, default_value_t = 1001)]
        grid_steps: u32,
        /// Monte Carlo draws for the demand comparison
        #[arg(long, default_value_t = 1_000_000)]
        n: u64,
        /// Monte Carlo seed
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Monte Carlo demand estimate
    Mc {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        prices: PriceArgs,
        /// Offered channels: uoe, uo, ue, or oe
        #[arg(long, default_value = "uoe")]
        channels: String,
        /// Number of simulated consumers
        #[arg(long, default_value_t = 1_000_000)]
        n: u64,
        /// Sampling seed
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// One-factor-at-a-time sweep producing a plot-ready series
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Parameter to vary: alpha, theta, t, x, beta, m, mu1, mu2, c1, c2, c3
        #[arg(long)]
        param: String,
        /// Range start
        #[arg(long)]
        min: f64,
        /// Range end
        #[arg(long)]
        max: f64,
        /// Grid points (in random mode: number of draws)
        #[arg(long, default_value_t = DEFAULT_SWEEP_STEPS)]
        steps: u32,
        /// Point placement: grid or random
        #[arg(long, default_value = "grid")]
        mode: String,
        /// Seed for random mode
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario file (JSON)
    #[arg(long)]
    scenario: PathBuf,
    /// Write the artifact to this path instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; sweep defaults to csv, everything else to structured
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Reject unknown scenario fields and out-of-range sweep requests
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct PriceArgs {
    /// Unorganized channel price (overrides the scenario's stored price)
    #[arg(long)]
    p1: Option<f64>,
    /// Organized channel price
    #[arg(long)]
    p2: Option<f64>,
    /// Online channel price
    #[arg(long)]
    p3: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Structured,
}

// ============================================================================
// Error handling and exit codes
// ============================================================================

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn numeric(e: impl std::fmt::Display) -> CliError {
    CliError::Numeric(e.to_string())
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

// ============================================================================
// Shared plumbing
// ============================================================================

fn load(common: &CommonArgs) -> Result<(ScenarioFile, RunMeta), CliError> {
    let scn = parse_scenario(&common.scenario, common.strict).map_err(input)?;
    for w in &scn.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(notes) = &scn.notes {
        eprintln!("scenario note: {notes}");
    }
    let meta = RunMeta {
        scenario_sha256: scn.sha256.clone(),
        label: scn.label.clone(),
        seed: None,
        rng: None,
    };
    Ok((scn, meta))
}

/// Rejects csv for the single-result commands, where no series exists.
fn structured_only(common: &CommonArgs, command: &str) -> Result<(), CliError> {
    if common.format == Some(OutputFormat::Csv) {
        return Err(CliError::Input(format!(
            "csv output is only available for sweep, not {command}"
        )));
    }
    Ok(())
}

/// Evaluation prices: explicit flags override the scenario's stored
/// prices, which override the closed-form equilibrium.
fn resolve_prices(
    scn: &ScenarioFile,
    flags: &PriceArgs,
) -> Result<(PriceVector, String), CliError> {
    let (mut prices, base_source) = match scn.prices {
        Some(p) => (p, "scenario"),
        None => (
            closed_form_prices(&scn.params).map_err(numeric)?,
            "closed_form",
        ),
    };
    let overridden = flags.p1.is_some() || flags.p2.is_some() || flags.p3.is_some();
    if let Some(p1) = flags.p1 {
        prices.p1 = p1;
    }
    if let Some(p2) = flags.p2 {
        prices.p2 = p2;
    }
    if let Some(p3) = flags.p3 {
        prices.p3 = p3;
    }
    let source = if overridden {
        format!("{base_source}+flags")
    } else {
        base_source.to_string()
    };
    Ok((prices, source))
}

fn parse_channel_set(tag: &str) -> Result<ChannelSet, CliError> {
    ChannelSet::parse(tag).ok_or_else(|| {
        CliError::Input(format!(
            "unknown channel set {tag:?}; expected uoe, uo, ue, or oe"
        ))
    })
}

fn params_value(params: &MarketParams) -> serde_json::Value {
    serde_json::to_value(params).unwrap()
}

// ============================================================================
// Commands
// ============================================================================

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Solve { common } => cmd_solve(&common),
        Command::Demand {
            common,
            prices,
            channels,
        } => cmd_demand(&common, &prices, &channels),
        Command::Verify {
            common,
            prices,
            rel_range,
            grid_steps,
            n,
            seed,
        } => cmd_verify(&common, &prices, rel_range, grid_steps, n, seed),
        Command::Mc {
            common,
            prices,
            channels,
            n,
            seed,
        } => cmd_mc(&common, &prices, &channels, n, seed),
        Command::Sweep {
            common,
            param,
            min,
            max,
            steps,
            mode,
            seed,
        } => cmd_sweep(&common, &param, min, max, steps, &mode, seed),
    }
}

fn cmd_solve(common: &CommonArgs) -> Result<(), CliError> {
    structured_only(common, "solve")?;
    let (scn, meta) = load(common)?;
    let eq = solve_equilibrium(&scn.params).map_err(numeric)?;
    for check in eq.feasibility.failed() {
        eprintln!("finding: {}: {}", check.name, check.note);
    }
    let text = document(
        "solve",
        &meta,
        params_value(&scn.params),
        json!({ "result": eq }),
    );
    emit(common, &text)
}

fn cmd_demand(
    common: &CommonArgs,
    price_flags: &PriceArgs,
    channels: &str,
) -> Result<(), CliError> {
    structured_only(common, "demand")?;
    let (scn, meta) = load(common)?;
    let channel_set = parse_channel_set(channels)?;
    let (prices, price_source) = resolve_prices(&scn, price_flags)?;
    let (split, regime, diagnostics) =
        demand(&scn.params, &prices, channel_set).map_err(numeric)?;
    let points = indifference_points(&scn.params, &prices).map_err(numeric)?;
    if !diagnostics.clean() {
        eprintln!(
            "finding: demand split leaves [0, 1] or oversubscribes the population; see diagnostics"
        );
    }
    let text = document(
        "demand",
        &meta,
        params_value(&scn.params),
        json!({
            "prices": prices,
            "price_source": price_source,
            "channel_set": channel_set,
            "demand": split,
            "regime": regime,
            "diagnostics": diagnostics,
            "thresholds": points,
        }),
    );
    emit(common, &text)
}

fn cmd_verify(
    common: &CommonArgs,
    price_flags: &PriceArgs,
    rel_range: f64,
    grid_steps: u32,
    n: u64,
    seed: u64,
) -> Result<(), CliError> {
    structured_only(common, "verify")?;
    if grid_steps < 3 {
        return Err(CliError::Input(format!(
            "--grid-steps must be at least 3, got {grid_steps}"
        )));
    }
    if !(rel_range > 0.0) {
        return Err(CliError::Input(format!(
            "--rel-range must be positive, got {rel_range}"
        )));
    }
    if n == 0 {
        return Err(CliError::Input("--n must be at least 1".into()));
    }
    let (scn, mut meta) = load(common)?;
    meta.seed = Some(seed);
    meta.rng = Some(MC_RNG_NAME);
    let params = &scn.params;

    let star = closed_form_prices(params).map_err(numeric)?;
    let (prices, price_source) = resolve_prices(&scn, price_flags)?;
    let residuals = foc_residuals(params, &prices).map_err(numeric)?;
    let solved = solve_foc_system(params).map_err(numeric)?;
    let max_rel_delta = star
        .as_array()
        .into_iter()
        .zip(solved.prices.as_array())
        .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
        .fold(0.0, f64::max);
    let concavity = concavity_check(params);
    let scan = nash_deviation_check(params, &prices, rel_range, grid_steps).map_err(numeric)?;
    let max_gain = scan.iter().map(|r| r.profit_gain).fold(0.0, f64::max);

    let analytic = demand_triple_raw(params, &prices).map_err(numeric)?;
    let mc_comparison = if mc_comparison_valid(&analytic) {
        let est = monte_carlo_demand(params, &prices, ChannelSet::Uoe, n, seed);
        let diffs = [
            est.d_hat.d_u - analytic.d_u,
            est.d_hat.d_o - analytic.d_o,
            est.d_hat.d_e - analytic.d_e,
        ];
        let within: Vec<bool> = diffs
            .iter()
            .zip(est.std_err)
            .map(|(diff, se)| diff.abs() <= 3.0 * se)
            .collect();
        json!({
            "valid": true,
            "estimate": est,
            "analytic": analytic,
            "within_3se": within,
            "all_within": within.iter().all(|w| *w),
        })
    } else {
        json!({
            "valid": false,
            "analytic": analytic,
            "note": "analytic demand leaves [0, 1] at these prices; a sampled \
                     population cannot match an extrapolated fraction",
        })
    };

    for report in &scan {
        if report.profit_gain > 0.0 {
            eprintln!(
                "finding: {:?} can gain {:.6e} by moving to {:.12e}",
                report.channel, report.profit_gain, report.best_deviation_price
            );
        }
    }

    let text = document(
        "verify",
        &meta,
        params_value(params),
        json!({
            "prices": prices,
            "price_source": price_source,
            "foc_residuals": residuals,
            "solver_cross_check": {
                "closed_form": star,
                "linear_solve": solved.prices,
                "condition": solved.condition,
                "max_rel_delta": max_rel_delta,
            },
            "concavity": concavity,
            "deviation_scan": {
                "rel_range": rel_range,
                "grid_steps": grid_steps,
                "reports": scan,
                "max_gain": max_gain,
            },
            "mc_comparison": mc_comparison,
        }),
    );
    emit(common, &text)
}

fn cmd_mc(
    common: &CommonArgs,
    price_flags: &PriceArgs,
    channels: &str,
    n: u64,
    seed: u64,
) -> Result<(), CliError> {
    structured_only(common, "mc")?;
    if n == 0 {
        return Err(CliError::Input("--n must be at least 1".into()));
    }
    let (scn, mut meta) = load(common)?;
    meta.seed = Some(seed);
    meta.rng = Some(MC_RNG_NAME);
    let channel_set = parse_channel_set(channels)?;
    let (prices, price_source) = resolve_prices(&scn, price_flags)?;

    let estimate = monte_carlo_demand(&scn.params, &prices, channel_set, n, seed);
    // The analytic counterpart: all-active formulas for the full market,
    // classified-case formulas for pairwise settings.
    let analytic = match channel_set {
        ChannelSet::Uoe => Some(demand_triple_raw(&scn.params, &prices).map_err(numeric)?),
        _ => demand(&scn.params, &prices, channel_set)
            .map(|(split, _, _)| split)
            .ok(),
    };
    let comparison_valid = analytic.as_ref().is_some_and(mc_comparison_valid);

    let text = document(
        "mc",
        &meta,
        params_value(&scn.params),
        json!({
            "prices": prices,
            "price_source": price_source,
            "channel_set": channel_set,
            "estimate": estimate,
            "analytic": analytic,
            "comparison_valid": comparison_valid,
        }),
    );
    emit(common, &text)
}

fn cmd_sweep(
    common: &CommonArgs,
    param: &str,
    min: f64,
    max: f64,
    steps: u32,
    mode: &str,
    seed: u64,
) -> Result<(), CliError> {
    let param = SweepParam::parse(param).map_err(input)?;
    let mode = match mode {
        "grid" => SweepMode::Grid,
        "random" => SweepMode::Random { seed, n: steps },
        other => {
            return Err(CliError::Input(format!(
                "unknown sweep mode {other:?}; expected grid or random"
            )))
        }
    };
    let (scn, mut meta) = load(common)?;
    if let SweepMode::Random { .. } = mode {
        meta.seed = Some(seed);
        meta.rng = Some(MC_RNG_NAME);
    }
    let spec = SweepSpec {
        base: scn.params,
        param,
        lo: min,
        hi: max,
        steps,
        mode,
    };
    let result = trimarket::ofat_sweep(&spec, common.strict).map_err(input)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    let failed = result.rows.iter().filter(|r| !r.evaluated()).count();
    if failed > 0 {
        eprintln!(
            "finding: {failed} of {} points could not be evaluated and carry error codes",
            result.rows.len()
        );
    }

    let text = match common.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => sweep_csv(&spec, &result, &meta),
        OutputFormat::Structured => {
            let trends = sign_summary(&result).ok();
            document(
                "sweep",
                &meta,
                params_value(&scn.params),
                sweep_payload(&spec, &result, trends.as_ref().map(|t| t.as_slice())),
            )
        }
    };
    emit(common, &text)
}

fn emit(common: &CommonArgs, content: &str) -> Result<(), CliError> {
    write_output(common.out.as_deref(), content).map_err(|e| {
        CliError::Input(format!(
            "cannot write output{}: {e}",
            common
                .out
                .as_ref()
                .map(|p| format!(" to {}", p.display()))
                .unwrap_or_default()
        ))
    })?;
    if let Some(path) = &common.out {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}
