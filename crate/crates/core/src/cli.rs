//! Command-line front end: argument model, validation and execution.

use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::branch::JcParams;
use crate::calibrate::{calibrate, sweep_csv, sweep_regime, CalibrationResult, Regime};
use crate::duality::{duality_report, DualityReport};
use crate::error::{Error, Result};
use crate::fock::{
    coherent_state, fock_state, thermal_state, CavityState, DEFAULT_EPS_TRUNC, MIN_DIM,
};
use crate::format::fmt_f64;
use crate::ramsey::fringe_scan;
use crate::selfcheck;

/// Environment variable holding the worker count for sweeps.
pub const WORKERS_ENV: &str = "RAMSEY_WORKERS";

pub const DEFAULT_POINTS: usize = 721;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Report,
    Fringe,
    Calibrate,
    Sweep,
    Selfcheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Initial cavity field given on the command line as `coherent:NBAR`,
/// `fock:N` or `thermal:NBAR`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StateSpec {
    Coherent(f64),
    Fock(usize),
    Thermal(f64),
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Config(format!(
                "bad state spec {s:?}; use coherent:NBAR, fock:N or thermal:NBAR"
            ))
        };
        let (kind, value) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim().to_ascii_lowercase().as_str() {
            "coherent" => Ok(StateSpec::Coherent(
                value.trim().parse().map_err(|_| bad())?,
            )),
            "fock" => Ok(StateSpec::Fock(value.trim().parse().map_err(|_| bad())?)),
            "thermal" => Ok(StateSpec::Thermal(value.trim().parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

impl StateSpec {
    pub fn build(&self, eps_trunc: f64) -> Result<CavityState> {
        match *self {
            StateSpec::Coherent(nbar) => coherent_state(nbar, eps_trunc),
            StateSpec::Fock(n) => fock_state(n, (n + 2).max(MIN_DIM)),
            StateSpec::Thermal(nbar) => thermal_state(nbar, eps_trunc),
        }
    }
}

/// `start:stop:step` (inclusive) or a comma-separated list; values must be >= 0.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let num = |t: &str| -> Result<f64> {
        let x: f64 = t
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad number {t:?} in grid {spec:?}")))?;
        if !x.is_finite() {
            return Err(Error::Config(format!("non-finite value in grid {spec:?}")));
        }
        Ok(x)
    };
    let values = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(Error::Config(format!(
                "range grid must be start:stop:step, got {spec:?}"
            )));
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if step <= 0.0 {
            return Err(Error::Config(format!(
                "grid step must be positive, got {step}"
            )));
        }
        if stop < start {
            return Err(Error::Config(format!("empty grid {spec:?}: stop < start")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=count).map(|k| start + k as f64 * step).collect()
    } else {
        spec.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if let Some(x) = values.iter().find(|x| **x < 0.0) {
        return Err(Error::Config(format!("negative grid value {x}")));
    }
    Ok(values)
}

/// Validated description of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub state_spec: Option<StateSpec>,
    pub theta: Option<f64>,
    pub lambda: f64,
    pub regime: Option<Regime>,
    pub nbar_grid: Option<Vec<f64>>,
    pub n_points: Option<usize>,
    pub eps_trunc: f64,
    pub output_format: OutputFormat,
    pub output_path: Option<String>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn new(command: CommandKind) -> Self {
        let output_format = match command {
            CommandKind::Fringe | CommandKind::Sweep => OutputFormat::Csv,
            _ => OutputFormat::Json,
        };
        Self {
            command,
            state_spec: None,
            theta: None,
            lambda: 0.0,
            regime: None,
            nbar_grid: None,
            n_points: None,
            eps_trunc: DEFAULT_EPS_TRUNC,
            output_format,
            output_path: None,
            seed: None,
        }
    }

    /// Checks that exactly the fields the command needs are set.
    pub fn validate(&self) -> Result<()> {
        use CommandKind::*;
        let needs = |present: bool, required: bool, field: &str| -> Result<()> {
            match (present, required) {
                (false, true) => Err(Error::Config(format!(
                    "{:?} requires {field}",
                    self.command
                ))),
                (true, false) => Err(Error::Config(format!(
                    "{field} is not used by {:?}",
                    self.command
                ))),
                _ => Ok(()),
            }
        };
        let c = self.command;
        needs(
            self.state_spec.is_some(),
            matches!(c, Report | Fringe | Calibrate),
            "a state",
        )?;
        needs(self.theta.is_some(), matches!(c, Report | Fringe), "theta")?;
        needs(
            self.regime.is_some(),
            matches!(c, Calibrate | Sweep),
            "a regime",
        )?;
        needs(self.nbar_grid.is_some(), c == Sweep, "an nbar grid")?;
        if self.n_points.is_some() && c != Fringe {
            return Err(Error::Config(format!("n_points is not used by {c:?}")));
        }
        if self.seed.is_some() && c != Selfcheck {
            return Err(Error::Config(format!("seed is not used by {c:?}")));
        }
        if let Some(theta) = self.theta {
            JcParams::new(theta, self.lambda)?;
        }
        if !self.lambda.is_finite() {
            return Err(Error::Config("lambda must be finite".into()));
        }
        if !(self.eps_trunc > 0.0 && self.eps_trunc < 1.0) {
            return Err(Error::Config(format!(
                "eps_trunc must lie in (0, 1), got {}",
                self.eps_trunc
            )));
        }
        if let Some(n) = self.n_points {
            if n < 3 {
                return Err(Error::Config(format!("n_points must be >= 3, got {n}")));
            }
        }
        if let Some(grid) = &self.nbar_grid {
            if grid.is_empty() || grid.iter().any(|x| x.is_nan() || *x < 0.0) {
                return Err(Error::Config(
                    "nbar grid must be nonempty and nonnegative".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Text produced by a run, plus whether the run counts as a success.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub text: String,
    pub failure: Option<Error>,
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn report_csv(r: &DualityReport) -> String {
    let values = [
        fmt_f64(r.w_plus),
        fmt_f64(r.w_minus),
        fmt_f64(r.p),
        fmt_f64(r.v),
        fmt_f64(r.v_internal),
        fmt_f64(r.q),
        fmt_f64(r.d),
        opt(r.residual_eq3),
        opt(r.residual_dqp),
        fmt_f64(r.lhs_eq2),
    ];
    format!(
        "w_plus,w_minus,P,V,V_internal,Q,D,residual_eq3,residual_dqp,lhs_eq2\n{}\n",
        values.join(",")
    )
}

fn calibration_csv(c: &CalibrationResult) -> String {
    format!(
        "theta_star,achieved_P,target,residual,evaluations\n{},{},{:?},{},{}\n",
        fmt_f64(c.theta_star),
        fmt_f64(c.achieved_p),
        c.target,
        fmt_f64(c.residual),
        c.evaluations
    )
}

fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(WORKERS_ENV) {
        let n: usize = value.trim().parse().map_err(|_| {
            Error::Config(format!(
                "{WORKERS_ENV} must be a positive integer, got {value:?}"
            ))
        })?;
        if n == 0 {
            return Err(Error::Config(format!("{WORKERS_ENV} must be positive")));
        }
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Config(e.to_string()))
}

pub fn run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let format = config.output_format;
    let state = || {
        config
            .state_spec
            .expect("validated")
            .build(config.eps_trunc)
    };
    let params = || JcParams::new(config.theta.expect("validated"), config.lambda);
    let ok = |text: String| {
        Ok(RunOutput {
            text,
            failure: None,
        })
    };
    match config.command {
        CommandKind::Report => {
            let report = duality_report(&state()?, params()?)?;
            ok(match format {
                OutputFormat::Json => json(&report),
                OutputFormat::Csv => report_csv(&report),
            })
        }
        CommandKind::Fringe => {
            let scan = fringe_scan(
                &state()?,
                params()?,
                config.n_points.unwrap_or(DEFAULT_POINTS),
            )?;
            ok(match format {
                OutputFormat::Json => json(&scan),
                OutputFormat::Csv => scan.to_csv(),
            })
        }
        CommandKind::Calibrate => {
            let result = calibrate(&state()?, config.lambda, config.regime.expect("validated"))?;
            ok(match format {
                OutputFormat::Json => json(&result),
                OutputFormat::Csv => calibration_csv(&result),
            })
        }
        CommandKind::Sweep => {
            let grid = config.nbar_grid.as_deref().expect("validated");
            let regime = config.regime.expect("validated");
            let rows = worker_pool()?
                .install(|| sweep_regime(regime, grid, config.lambda, config.eps_trunc));
            let text = match format {
                OutputFormat::Json => json(&rows),
                OutputFormat::Csv => sweep_csv(&rows),
            };
            let failed: Vec<String> = rows
                .iter()
                .filter_map(|r| r.error.as_ref().map(|e| format!("nbar {}: {e}", r.nbar)))
                .collect();
            let failure = (!failed.is_empty()).then(|| Error::Calibration(failed.join("; ")));
            Ok(RunOutput { text, failure })
        }
        CommandKind::Selfcheck => {
            let outcomes = selfcheck::run_all(config.seed.unwrap_or(20_031_021));
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            let text = match format {
                OutputFormat::Json => json(&serde_json::json!({
                    "passed": outcomes.len() - failed,
                    "failed": failed,
                    "checks": outcomes,
                })),
                OutputFormat::Csv => {
                    let mut s = String::new();
                    for o in &outcomes {
                        let tag = if o.passed { "PASS" } else { "FAIL" };
                        s.push_str(&format!("{tag} {}: {}\n", o.name, o.detail));
                    }
                    s.push_str(&format!(
                        "{} passed, {failed} failed\n",
                        outcomes.len() - failed
                    ));
                    s
                }
            };
            let failure =
                (failed > 0).then(|| Error::Undefined(format!("{failed} self-checks failed")));
            Ok(RunOutput { text, failure })
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ramsey-duality",
    version,
    about = "Duality quantities of a cavity-QED Ramsey interferometer"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// P, Q, D, V and identity residuals for one configuration
    Report(ReportArgs),
    /// Output probability p_a over one period of the Ramsey phase
    Fringe(FringeArgs),
    /// Tune the Rabi phase for symmetric or maximally asymmetric splitting
    Calibrate(CalibrateArgs),
    /// Calibrated duality quantities over coherent-state intensities
    Sweep(SweepArgs),
    /// Run the invariant suites
    Selfcheck(SelfcheckArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Detuning normalized to twice the Rabi frequency
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub lambda: f64,
    /// Photon-number tail tolerance for truncation
    #[arg(long, default_value_t = DEFAULT_EPS_TRUNC)]
    pub eps_trunc: f64,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Write to this file instead of stdout
    #[arg(long, short)]
    pub output: Option<String>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ThetaArg {
    /// Rabi phase θ = Ωτ in radians
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Rabi phase as a multiple of π
    #[arg(long = "theta-pi", allow_hyphen_values = true)]
    pub theta_pi: Option<f64>,
}

impl ThetaArg {
    fn radians(&self) -> Option<f64> {
        self.theta
            .or(self.theta_pi.map(|x| x * std::f64::consts::PI))
    }
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// coherent:NBAR, fock:N or thermal:NBAR
    #[arg(long)]
    pub state: String,
    #[command(flatten)]
    pub theta: ThetaArg,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct FringeArgs {
    /// coherent:NBAR, fock:N or thermal:NBAR
    #[arg(long)]
    pub state: String,
    #[command(flatten)]
    pub theta: ThetaArg,
    /// Number of phase samples on [0, 2π]
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    pub points: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// coherent:NBAR, fock:N or thermal:NBAR
    #[arg(long)]
    pub state: String,
    /// symmetric or asymmetric
    #[arg(long)]
    pub regime: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// symmetric or asymmetric
    #[arg(long)]
    pub regime: String,
    /// start:stop:step or a comma list of mean photon numbers
    #[arg(long)]
    pub nbar: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SelfcheckArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// json, or csv for one PASS/FAIL line per check
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long, short)]
    pub output: Option<String>,
}

impl TryFrom<Cli> for RunConfig {
    type Error = Error;

    fn try_from(cli: Cli) -> Result<Self> {
        let apply = |cfg: &mut RunConfig, common: Common| {
            cfg.lambda = common.lambda;
            cfg.eps_trunc = common.eps_trunc;
            if let Some(f) = common.format {
                cfg.output_format = f;
            }
            cfg.output_path = common.output;
        };
        let cfg = match cli.command {
            CliCommand::Report(a) => {
                let mut cfg = RunConfig::new(CommandKind::Report);
                cfg.state_spec = Some(a.state.parse()?);
                cfg.theta = a.theta.radians();
                apply(&mut cfg, a.common);
                cfg
            }
            CliCommand::Fringe(a) => {
                let mut cfg = RunConfig::new(CommandKind::Fringe);
                cfg.state_spec = Some(a.state.parse()?);
                cfg.theta = a.theta.radians();
                cfg.n_points = Some(a.points);
                apply(&mut cfg, a.common);
                cfg
            }
            CliCommand::Calibrate(a) => {
                let mut cfg = RunConfig::new(CommandKind::Calibrate);
                cfg.state_spec = Some(a.state.parse()?);
                cfg.regime = Some(a.regime.parse()?);
                apply(&mut cfg, a.common);
                cfg
            }
            CliCommand::Sweep(a) => {
                let mut cfg = RunConfig::new(CommandKind::Sweep);
                cfg.regime = Some(a.regime.parse()?);
                cfg.nbar_grid = Some(parse_grid(&a.nbar)?);
                apply(&mut cfg, a.common);
                cfg
            }
            CliCommand::Selfcheck(a) => {
                let mut cfg = RunConfig::new(CommandKind::Selfcheck);
                cfg.seed = a.seed;
                cfg.output_format = a.format.unwrap_or(OutputFormat::Csv);
                cfg.output_path = a.output;
                cfg
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(
            parse_grid("0:100:25").unwrap(),
            vec![0.0, 25.0, 50.0, 75.0, 100.0]
        );
        assert_eq!(parse_grid("0,1,5").unwrap(), vec![0.0, 1.0, 5.0]);
        assert_eq!(parse_grid("0:1:0.1").unwrap().len(), 11);
        assert!(parse_grid("5:0:1").is_err());
        assert!(parse_grid("0:5:0").is_err());
        assert!(parse_grid("0:5:-1").is_err());
        assert!(parse_grid("-1,2").is_err());
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn state_specs() {
        assert_eq!(
            "coherent:2.5".parse::<StateSpec>().unwrap(),
            StateSpec::Coherent(2.5)
        );
        assert_eq!("fock:3".parse::<StateSpec>().unwrap(), StateSpec::Fock(3));
        assert_eq!(
            "thermal:1".parse::<StateSpec>().unwrap(),
            StateSpec::Thermal(1.0)
        );
        assert!("squeezed:1".parse::<StateSpec>().is_err());
        assert!("fock:-1".parse::<StateSpec>().is_err());
        assert!("coherent".parse::<StateSpec>().is_err());
    }

    #[test]
    fn validation_rejects_missing_and_extra_fields() {
        let mut cfg = RunConfig::new(CommandKind::Report);
        assert!(cfg.validate().is_err());
        cfg.state_spec = Some(StateSpec::Coherent(0.0));
        cfg.theta = Some(1.0);
        assert!(cfg.validate().is_ok());
        cfg.nbar_grid = Some(vec![1.0]);
        assert!(cfg.validate().is_err());

        let mut cfg = RunConfig::new(CommandKind::Sweep);
        cfg.regime = Some(Regime::Symmetric);
        assert!(cfg.validate().is_err());
        cfg.nbar_grid = Some(vec![0.0, 1.0]);
        assert!(cfg.validate().is_ok());
        cfg.theta = Some(0.5);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn run_report_vacuum() {
        let mut cfg = RunConfig::new(CommandKind::Report);
        cfg.state_spec = Some(StateSpec::Coherent(0.0));
        cfg.theta = Some(std::f64::consts::FRAC_PI_4);
        let out = run(&cfg).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.text).unwrap();
        assert!(v["P"].as_f64().unwrap().abs() < 1e-12);
        assert!((v["Q"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        cfg.output_format = OutputFormat::Csv;
        let out = run(&cfg).unwrap();
        assert!(out.text.starts_with("w_plus,w_minus,P,V,V_internal,Q,D,"));
    }

    #[test]
    fn sweep_failures_are_flagged() {
        let mut cfg = RunConfig::new(CommandKind::Sweep);
        cfg.regime = Some(Regime::Symmetric);
        cfg.nbar_grid = Some(vec![0.0, 0.5]);
        cfg.lambda = 3.0;
        let out = run(&cfg).unwrap();
        assert!(matches!(out.failure, Some(Error::Calibration(_))));
        assert_eq!(out.text.lines().count(), 3);
    }
}
