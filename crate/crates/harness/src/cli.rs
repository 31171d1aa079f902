//! The `cfmm-privacy` command line.
//!
//! Exit codes: 0 on success, 1 for usage and validation errors, 2 when a
//! solver fails to converge or finds no solution.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use cfmm_privacy_core::analysis::{self, GeometryReport};
use cfmm_privacy_core::attack::{self, AttackSettings, ProbeSettings, PublicParams};
use cfmm_privacy_core::{Metered, PoolOracle, PoolState, PriceVector, Trade, TradingFunctionSpec};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::format::{self, sig, sig_list};
use crate::{config, experiment, report, HarnessError, Result};

#[derive(Debug, Parser)]
#[command(name = "cfmm-privacy", version, about = "Reserve-reconstruction attacks on constant function market makers")]
pub struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,

    /// Significant digits in text output
    #[arg(long, global = true, default_value_t = format::DEFAULT_DIGITS)]
    pub precision: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recover hidden reserves from a marginal price and one feasible trade
    RecoverReserves(RecoverReservesArgs),
    /// Recover a hidden trade from pool snapshots before and after it
    RecoverTrade(RecoverTradeArgs),
    /// Estimate the marginal price of a pool using trade checks only
    EstimatePrice(EstimatePriceArgs),
    /// Check the ray and scale-sign properties behind unique recovery
    VerifyGeometry(VerifyGeometryArgs),
    /// Run a seeded attack experiment from a scenario file
    Simulate(SimulateArgs),
}

fn parse_spec(s: &str) -> std::result::Result<TradingFunctionSpec, String> {
    s.parse().map_err(|e: cfmm_privacy_core::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct RecoverReservesArgs {
    /// Trading function: cp, cs, cm:w1,w2,..., curve:alpha,beta[,n], optional ^p
    #[arg(long, value_parser = parse_spec)]
    pub spec: TradingFunctionSpec,
    /// Marginal price, comma separated
    #[arg(long, allow_hyphen_values = true)]
    pub price: String,
    /// Feasible trade, comma separated (positive = paid to the pool)
    #[arg(long, allow_hyphen_values = true)]
    pub trade: String,
    #[arg(long, default_value_t = 1.0)]
    pub fee: f64,
    /// Use the two-asset constant-product linear solve
    #[arg(long)]
    pub closed_form: bool,
}

#[derive(Debug, Args)]
pub struct RecoverTradeArgs {
    /// JSON file with the hidden pool states {"before": ..., "after": ...}
    #[arg(long)]
    pub fixture: PathBuf,
    /// First probe input Eve tries
    #[arg(long, default_value_t = 1.0)]
    pub probe_size: f64,
    /// Reserve accuracy for constant-sum pools
    #[arg(long, default_value_t = 1e-9)]
    pub epsilon: f64,
}

#[derive(Debug, Args)]
pub struct EstimatePriceArgs {
    #[arg(long, value_parser = parse_spec)]
    pub spec: TradingFunctionSpec,
    /// Hidden reserves, comma separated
    #[arg(long)]
    pub reserves: String,
    #[arg(long, default_value_t = 1.0)]
    pub fee: f64,
    /// Input amount of each probe trade
    #[arg(long, default_value_t = 1e-4)]
    pub probe_size: f64,
}

#[derive(Debug, Args)]
pub struct VerifyGeometryArgs {
    #[arg(long, value_parser = parse_spec)]
    pub spec: TradingFunctionSpec,
    #[arg(long)]
    pub reserves: String,
    /// Scales for the ray check (default: 50 log-spaced points in [0.1, 10])
    #[arg(long)]
    pub scales: Option<String>,
    /// A trade feasible at the reserves; enables the scale-sign scan
    #[arg(long, allow_hyphen_values = true)]
    pub trade: Option<String>,
    /// Scales for the sign scan (default as for --scales)
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario file (TOML)
    #[arg(long)]
    pub config: PathBuf,
    /// Report path; defaults to report-<seed>.json in $CFMM_PRIVACY_OUT_DIR
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides master_seed from the config
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write a per-trial CSV next to the report
    #[arg(long)]
    pub csv: bool,
}

/// Hidden states for `recover-trade`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TradeFixture {
    pub before: PoolState,
    pub after: PoolState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceEstimate {
    pub price: PriceVector,
    pub queries: u64,
}

fn usage(msg: impl Into<String>) -> HarnessError {
    HarnessError::Usage(msg.into())
}

fn list(flag: &str, s: &str) -> Result<Vec<f64>> {
    format::parse_list(s).map_err(|e| usage(format!("--{flag}: {e}")))
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

struct Ctx<'a> {
    format: OutputFormat,
    digits: usize,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn line(&mut self, s: impl AsRef<str>) -> Result<()> {
        writeln!(self.out, "{}", s.as_ref()).map_err(|e| HarnessError::Io { path: "<stdout>".into(), source: e })
    }

    fn note(&mut self, s: impl AsRef<str>) {
        let _ = writeln!(self.err, "{}", s.as_ref());
    }
}

fn recover_reserves(ctx: &mut Ctx, a: &RecoverReservesArgs) -> Result<()> {
    let price = PriceVector::normalize(&list("price", &a.price)?)?;
    let trade = Trade::new(list("trade", &a.trade)?)?;
    let result = if a.closed_form {
        if a.fee != 1.0 || a.spec != TradingFunctionSpec::constant_product(2)? {
            return Err(usage("--closed-form needs a fee-less two-asset cp spec"));
        }
        attack::recover_reserves_cp_closed_form(&price, &trade)?
    } else {
        attack::recover_reserves(&a.spec, &price, &trade, a.fee)?
    };
    match ctx.format {
        OutputFormat::Json => ctx.line(json(&result)?),
        OutputFormat::Text => {
            let d = ctx.digits;
            ctx.line(format!("reserves: {}", sig_list(&result.reserves, d)))?;
            ctx.line(format!("lambda: {}", sig(result.lambda, d)))?;
            ctx.line(format!("residual_price: {}", sig(result.residual_price, d)))?;
            ctx.line(format!("residual_trade: {}", sig(result.residual_trade, d)))?;
            ctx.line(format!("unique: {}", result.unique))
        }
    }
}

fn recover_trade(ctx: &mut Ctx, a: &RecoverTradeArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.fixture).map_err(|e| HarnessError::io(&a.fixture, e))?;
    let fixture: TradeFixture = serde_json::from_str(&text)?;
    if fixture.before.spec() != fixture.after.spec() || fixture.before.fee() != fixture.after.fee() {
        return Err(usage("fixture snapshots must share the trading function and fee"));
    }
    let public = PublicParams::new(fixture.before.spec().clone(), fixture.before.fee())?;
    let settings = AttackSettings {
        probe: ProbeSettings { initial_input: a.probe_size, ..ProbeSettings::default() },
        cs_epsilon: a.epsilon,
    };
    let recovered = attack::recover_trade(
        &mut PoolOracle::new(fixture.before),
        &mut PoolOracle::new(fixture.after),
        &public,
        &settings,
    )?;
    match ctx.format {
        OutputFormat::Json => ctx.line(json(&recovered)?),
        OutputFormat::Text => {
            let d = ctx.digits;
            ctx.line(format!("trade: {}", sig_list(recovered.trade.as_slice(), d)))?;
            ctx.line(format!("reserves_before: {}", sig_list(&recovered.before.reserves, d)))?;
            ctx.line(format!("reserves_after: {}", sig_list(&recovered.after.reserves, d)))
        }
    }
}

fn estimate_price(ctx: &mut Ctx, a: &EstimatePriceArgs) -> Result<()> {
    let state = PoolState::new(a.spec.clone(), list("reserves", &a.reserves)?, a.fee)?;
    let mut oracle = Metered::new(PoolOracle::new(state));
    let price = attack::estimate_price_from_trades(&mut oracle, a.probe_size)?;
    let est = PriceEstimate { price, queries: oracle.queries() };
    match ctx.format {
        OutputFormat::Json => ctx.line(json(&est)?),
        OutputFormat::Text => {
            ctx.line(format!("price: {}", sig_list(est.price.as_slice(), ctx.digits)))?;
            ctx.line(format!("queries: {}", est.queries))
        }
    }
}

fn verify_geometry(ctx: &mut Ctx, a: &VerifyGeometryArgs) -> Result<()> {
    let reserves = list("reserves", &a.reserves)?;
    let scales = match &a.scales {
        Some(s) => list("scales", s)?,
        None => analysis::default_grid(),
    };
    let mut reports: Vec<GeometryReport> = vec![analysis::verify_ray_invariance(&a.spec, &reserves, &scales)?];
    if let Some(t) = &a.trade {
        let trade = Trade::new(list("trade", t)?)?;
        let grid = match &a.grid {
            Some(g) => list("grid", g)?,
            None => analysis::default_grid(),
        };
        reports.push(analysis::scan_scale_sign(&a.spec, &reserves, &trade, &grid)?);
    }
    match ctx.format {
        OutputFormat::Json => ctx.line(json(&reports)?),
        OutputFormat::Text => {
            for r in &reports {
                let property = match r.property {
                    analysis::GeometryProperty::RayInvariance => "ray_invariance",
                    analysis::GeometryProperty::ScaleSignPattern => "scale_sign_pattern",
                };
                ctx.line(format!(
                    "{property} {}: {} (max_violation {}, tolerance {}, samples {})",
                    r.spec_id,
                    if r.pass { "pass" } else { "FAIL" },
                    sig(r.max_violation, ctx.digits),
                    sig(r.tolerance, ctx.digits),
                    r.samples
                ))?;
            }
            Ok(())
        }
    }
}

fn opt(x: Option<f64>, digits: usize) -> String {
    x.map(|v| sig(v, digits)).unwrap_or_else(|| "n/a".into())
}

fn simulate(ctx: &mut Ctx, a: &SimulateArgs) -> Result<()> {
    let mut cfg = config::load_config(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.master_seed = seed;
    }
    let report = experiment::run_experiment(&cfg)?;
    let path = a.out.clone().unwrap_or_else(|| report::default_report_path(cfg.master_seed));
    let written = report::persist(&report, &path, a.csv)?;
    ctx.note(format!("wall time: {:.3} s", report.wall_time.as_secs_f64()));
    match ctx.format {
        OutputFormat::Json => ctx.line(report::to_json(&report)?.trim_end()),
        OutputFormat::Text => {
            let d = ctx.digits;
            let agg = &report.aggregate;
            ctx.line(format!("trials: {}", agg.trials))?;
            ctx.line(format!("failures: {}", agg.failures))?;
            ctx.line(format!("median_error: {}", opt(agg.median_error, d)))?;
            ctx.line(format!("p90_error: {}", opt(agg.p90_error, d)))?;
            ctx.line(format!("max_error: {}", opt(agg.max_error, d)))?;
            ctx.line(format!("success_rate: {}", sig(agg.success_rate, d)))?;
            for p in written {
                ctx.line(format!("wrote: {}", p.display()))?;
            }
            Ok(())
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    let mut ctx = Ctx { format: cli.format, digits: cli.precision.max(1), out, err };
    let outcome = match &cli.command {
        Command::RecoverReserves(a) => recover_reserves(&mut ctx, a),
        Command::RecoverTrade(a) => recover_trade(&mut ctx, a),
        Command::EstimatePrice(a) => estimate_price(&mut ctx, a),
        Command::VerifyGeometry(a) => verify_geometry(&mut ctx, a),
        Command::Simulate(a) => simulate(&mut ctx, a),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            ctx.note(format!("error: {e}"));
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["cfmm-privacy"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn recover_reserves_text() {
        let (code, out, _) = call(&["recover-reserves", "--spec", "cp", "--price", "2.25,1", "--trade", "2,-3"]);
        assert_eq!(code, 0);
        assert!(out.contains("reserves: 4, 9"), "{out}");
        assert!(out.contains("lambda: 0.333333333333"), "{out}");
    }

    #[test]
    fn closed_form_flag() {
        let (code, out, _) =
            call(&["recover-reserves", "--spec", "cp", "--price", "1,1", "--trade", "3,-2", "--closed-form"]);
        assert_eq!(code, 0);
        assert!(out.contains("reserves: 6, 6"), "{out}");
        let (code, _, _) = call(&["recover-reserves", "--spec", "cp", "--price", "1,1", "--trade", "1,-1", "--closed-form"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn zero_trade_is_validation_error() {
        let (code, _, err) = call(&["recover-reserves", "--spec", "cp", "--price", "1,1", "--trade", "0,0"]);
        assert_eq!(code, 1);
        assert!(err.contains("trade must be nonzero"), "{err}");
    }

    #[test]
    fn unknown_flag_and_bad_spec() {
        assert_eq!(call(&["recover-reserves", "--bogus"]).0, 1);
        assert_eq!(call(&["recover-reserves", "--spec", "xyz", "--price", "1,1", "--trade", "1,-1"]).0, 1);
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn estimate_price_json() {
        let (code, out, _) =
            call(&["--format", "json", "estimate-price", "--spec", "cp", "--reserves", "4,9", "--probe-size", "1e-4"]);
        assert_eq!(code, 0);
        let est: PriceEstimate = serde_json::from_str(&out).unwrap();
        assert!((est.price.as_slice()[0] - 2.25).abs() < 2.25e-3);
    }

    #[test]
    fn geometry_text() {
        let (code, out, _) = call(&["verify-geometry", "--spec", "curve:1,1", "--reserves", "1,4", "--scales", "2"]);
        assert_eq!(code, 0);
        assert!(out.contains("ray_invariance") && out.contains("FAIL"), "{out}");
    }
}
