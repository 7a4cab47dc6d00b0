//! Command line front end. [`run`] returns the process exit code: 0 on
//! success, 1 for usage and domain errors, 2 for I/O failures.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use super::experiments::{
    draw_instance, run_conditioning, run_identification, run_phase_transition, run_random_phase,
    tabulate_bounds,
};
use super::io::{write_csv, write_csv_to, write_json, write_manifest, CsvRow, Manifest};
use super::{configure_threads, ExperimentKind, ExperimentSpec, Magnitudes, OutputFormat};
use crate::bounds::recovery_constants;
use crate::bp_solver::{basis_pursuit, relative_error, BPConfig};
use crate::error::{Error, Result};
use crate::gram_analysis::{coherence, extremal_eigenvalues, gram_submatrix};
use crate::rng::{trial_rng, Role};
use crate::tf_core::{GaborOperator, SupportSet, TFIndex, Window, WindowKind};

#[derive(Debug, Parser)]
#[command(
    name = "gaborcs",
    version,
    about = "Sparse recovery in Gabor systems: operators, Basis Pursuit, experiments and bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WindowArg {
    Alltop,
    Steinhaus,
}

impl From<WindowArg> for WindowKind {
    fn from(w: WindowArg) -> Self {
        match w {
            WindowArg::Alltop => WindowKind::Alltop,
            WindowArg::Steinhaus => WindowKind::Steinhaus,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MagnitudesArg {
    Unit,
    Gaussian,
}

impl From<MagnitudesArg> for Magnitudes {
    fn from(m: MagnitudesArg) -> Self {
        match m {
            MagnitudesArg::Unit => Magnitudes::Unit,
            MagnitudesArg::Gaussian => Magnitudes::Gaussian,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    /// The three constants of the certificate-based recovery guarantee.
    #[value(name = "recovery-constants", alias = "remark22")]
    RecoveryConstants,
}

#[derive(Debug, Clone, Args, Serialize)]
struct Common {
    /// Signal length.
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, value_enum, default_value = "steinhaus")]
    #[serde(skip)]
    window: WindowArg,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; results go to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    #[serde(skip)]
    format: FormatArg,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Relative error declaring a recovery successful.
    #[arg(long)]
    tol: Option<f64>,
}

impl Common {
    fn window_kind(&self) -> WindowKind {
        self.window.into()
    }

    fn output_format(&self) -> OutputFormat {
        match self.format {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }

    fn solver(&self) -> BPConfig {
        let mut config = BPConfig::for_dimension(self.n.max(1));
        if let Some(tol) = self.tol {
            config.recovery_tol = tol;
        }
        config
    }

    fn spec(&self, kind: ExperimentKind) -> ExperimentSpec {
        ExperimentSpec {
            window_kind: self.window_kind(),
            trials: self.trials,
            master_seed: self.seed,
            solver_config: self.solver(),
            output_path: self.out.clone(),
            output_format: self.output_format(),
            ..ExperimentSpec::new(kind, self.n)
        }
    }

    fn build_window(&self) -> Result<Window> {
        match self.window {
            WindowArg::Alltop => Window::alltop(self.n),
            WindowArg::Steinhaus => Window::steinhaus(self.n, self.seed),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print or save the window samples.
    Window(WindowCmd),
    /// Coherence of the Gabor system generated by the window.
    Coherence(CoherenceCmd),
    /// Extremal eigenvalues of a Gram submatrix.
    Gram(GramCmd),
    /// Recover one random sparse vector by Basis Pursuit.
    Recover(RecoverCmd),
    /// Identify random sparse channels from a single probe each.
    Identify(IdentifyCmd),
    /// Success rate of Basis Pursuit across a sparsity range.
    Phase(PhaseCmd),
    /// Failure rate under uniformly random phases, with the closed-form bound.
    RandomPhase(RandomPhaseCmd),
    /// Conditioning failure rate of random Gram submatrices, with its bound.
    Conditioning(ConditioningCmd),
    /// Tabulate the bound evaluators.
    Bounds(BoundsCmd),
}

#[derive(Debug, Args)]
struct WindowCmd {
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct CoherenceCmd {
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct GramCmd {
    #[command(flatten)]
    common: Common,
    /// Comma-separated `k:l` indices; a uniform support of size `--s` when absent.
    #[arg(long)]
    support: Option<String>,
    #[arg(long, default_value_t = 4)]
    s: usize,
}

#[derive(Debug, Args)]
struct RecoverCmd {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 4)]
    s: usize,
    #[arg(long, value_enum, default_value = "unit")]
    magnitudes: MagnitudesArg,
}

#[derive(Debug, Args)]
struct IdentifyCmd {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 3)]
    s: usize,
    #[arg(long, value_enum, default_value = "unit")]
    magnitudes: MagnitudesArg,
}

#[derive(Debug, Args)]
struct PhaseCmd {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1)]
    s_min: usize,
    #[arg(long, default_value_t = 16)]
    s_max: usize,
    #[arg(long, default_value_t = 1)]
    s_step: usize,
    #[arg(long, value_enum, default_value = "unit")]
    magnitudes: MagnitudesArg,
}

#[derive(Debug, Args)]
struct RandomPhaseCmd {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 4)]
    s: usize,
    /// Coherence exponent of the closed-form bound; must exceed 8.
    #[arg(long, default_value_t = 9.0)]
    sigma: f64,
    /// Comma-separated `k:l` indices used by every trial instead of a fresh draw.
    #[arg(long)]
    support: Option<String>,
}

#[derive(Debug, Args)]
struct ConditioningCmd {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1)]
    s_min: usize,
    #[arg(long, default_value_t = 8)]
    s_max: usize,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
}

#[derive(Debug, Args)]
struct BoundsCmd {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long, default_value_t = 1)]
    s_min: usize,
    #[arg(long, default_value_t = 8)]
    s_max: usize,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, default_value_t = 9.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.47)]
    beta: f64,
    #[arg(long, default_value_t = 40)]
    m_max: usize,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let outcome = configure_threads().and_then(|_| execute(cli.command));
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<()> {
    let started = Instant::now();
    let started_at = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    let mut stdout = std::io::stdout().lock();
    let out = |w: &mut dyn Write, text: String| -> Result<()> {
        writeln!(w, "{text}").map_err(|e| Error::io("<stdout>", e))
    };
    let (name, common, params) = match command {
        Command::Window(cmd) => {
            let window = cmd.common.build_window()?;
            let rows: Vec<WindowSample> = window
                .values()
                .iter()
                .enumerate()
                .map(|(q, v)| WindowSample { q, re: v.re, im: v.im })
                .collect();
            emit(&cmd.common, &rows, &rows, &mut stdout)?;
            ("window", cmd.common, serde_json::Value::Null)
        }
        Command::Coherence(cmd) => {
            let mu = coherence(&GaborOperator::new(cmd.common.build_window()?))?;
            out(&mut stdout, format!("{mu:.10}"))?;
            if let Some(path) = &cmd.common.out {
                write_json(path, &serde_json::json!({ "n": cmd.common.n, "coherence": mu }))?;
            }
            ("coherence", cmd.common, serde_json::Value::Null)
        }
        Command::Gram(cmd) => {
            let n = cmd.common.n;
            let support = match &cmd.support {
                Some(text) => parse_support(text, n)?,
                None => SupportSet::random(n, cmd.s, &mut trial_rng(cmd.common.seed, 0, Role::Support))?,
            };
            let op = GaborOperator::new(cmd.common.build_window()?);
            let report = extremal_eigenvalues(&gram_submatrix(&op, &support)?)?;
            out(
                &mut stdout,
                format!(
                    "lambda_min {:.12}\nlambda_max {:.12}\nop_norm_h {:.12}\nfrobenius_h {:.12}",
                    report.lambda_min, report.lambda_max, report.op_norm_h, report.frobenius_h
                ),
            )?;
            if let Some(path) = &cmd.common.out {
                write_json(path, &report)?;
            }
            let params = serde_json::json!({ "support": support.columns() });
            ("gram", cmd.common, params)
        }
        Command::Recover(cmd) => {
            let c = &cmd.common;
            let (window, truth) = draw_instance(
                c.n,
                cmd.s,
                c.window_kind(),
                cmd.magnitudes.into(),
                None,
                c.seed,
                0,
            )?;
            let op = GaborOperator::new(window);
            let y = op.synthesize_sparse(&truth)?;
            let config = c.solver();
            let result = basis_pursuit(&op, &y, &config)?;
            let err = relative_error(&truth, &result.coefficients)?;
            let summary = RecoverSummary {
                n: c.n,
                s: cmd.s,
                success: err <= config.recovery_tol,
                relative_error: err,
                residual: result.residual,
                iterations: result.iterations,
                converged: result.converged,
                certified: result.certified,
            };
            out(&mut stdout, serde_json::to_string_pretty(&summary).expect("serialisable"))?;
            if let Some(path) = &c.out {
                let peak = result.coefficients.iter().map(|v| v.norm()).fold(0.0, f64::max);
                let estimate = result.sparse(c.n, config.recovery_tol * peak);
                write_json(path, &serde_json::json!({ "summary": summary, "estimate": estimate }))?;
            }
            let params = serde_json::json!({ "s": cmd.s, "magnitudes": Magnitudes::from(cmd.magnitudes) });
            ("recover", cmd.common, params)
        }
        Command::Identify(cmd) => {
            let spec = ExperimentSpec {
                sparsity_grid: vec![cmd.s],
                magnitudes: cmd.magnitudes.into(),
                ..cmd.common.spec(ExperimentKind::Identify)
            };
            let report = run_identification(&spec)?;
            out(
                &mut stdout,
                format!(
                    "n {} S {} trials {} successes {} rate {} wilson [{:.6}, {:.6}]",
                    report.n, report.s, report.trials, report.successes, report.rate,
                    report.wilson_lo, report.wilson_hi
                ),
            )?;
            emit(&cmd.common, &report.records, &report, &mut std::io::sink())?;
            ("identify", cmd.common, spec_params(&spec))
        }
        Command::Phase(cmd) => {
            if cmd.s_step == 0 || cmd.s_min > cmd.s_max {
                return Err(Error::Domain("need s-step >= 1 and s-min <= s-max".into()));
            }
            let spec = ExperimentSpec {
                sparsity_grid: (cmd.s_min..=cmd.s_max).step_by(cmd.s_step).collect(),
                magnitudes: cmd.magnitudes.into(),
                ..cmd.common.spec(ExperimentKind::PhaseTransition)
            };
            let pt = run_phase_transition(&spec)?;
            emit(&cmd.common, &pt.rows, &pt, &mut stdout)?;
            ("phase", cmd.common, spec_params(&spec))
        }
        Command::RandomPhase(cmd) => {
            let n = cmd.common.n;
            let fixed_support = cmd.support.as_deref().map(|t| parse_support(t, n)).transpose()?;
            let spec = ExperimentSpec {
                sparsity_grid: if fixed_support.is_some() { Vec::new() } else { vec![cmd.s] },
                fixed_support,
                sigma: cmd.sigma,
                ..cmd.common.spec(ExperimentKind::RandomPhase)
            };
            let report = run_random_phase(&spec)?;
            out(
                &mut stdout,
                format!(
                    "n {} S {} trials {} failures {} rate {} wilson [{:.6}, {:.6}] bound {:.6e}{}",
                    report.n, report.s, report.trials, report.failures, report.failure_rate,
                    report.wilson_lo, report.wilson_hi, report.bound,
                    if report.bound >= 1.0 { " (vacuous)" } else { "" }
                ),
            )?;
            emit(&cmd.common, &report.records, &report, &mut std::io::sink())?;
            ("random-phase", cmd.common, spec_params(&spec))
        }
        Command::Conditioning(cmd) => {
            if cmd.s_min == 0 || cmd.s_min > cmd.s_max {
                return Err(Error::Domain("need 1 <= s-min <= s-max".into()));
            }
            let spec = ExperimentSpec {
                sparsity_grid: (cmd.s_min..=cmd.s_max).collect(),
                delta: cmd.delta,
                ..cmd.common.spec(ExperimentKind::Conditioning)
            };
            let rows = run_conditioning(&spec)?;
            emit(&cmd.common, &rows, &rows, &mut stdout)?;
            ("conditioning", cmd.common, spec_params(&spec))
        }
        Command::Bounds(cmd) => {
            if let Some(Preset::RecoveryConstants) = cmd.preset {
                let (c1, c2, c3) = recovery_constants();
                out(&mut stdout, format!("C1 {c1:.4}\nC2 {c2:.4}\nC3 {c3:.4}"))?;
                if let Some(path) = &cmd.common.out {
                    write_json(path, &serde_json::json!({ "C1": c1, "C2": c2, "C3": c3 }))?;
                }
                ("bounds", cmd.common, serde_json::json!({ "preset": "recovery-constants" }))
            } else {
                if cmd.s_min > cmd.s_max {
                    return Err(Error::Domain("need s-min <= s-max".into()));
                }
                let spec = ExperimentSpec {
                    sparsity_grid: (cmd.s_min..=cmd.s_max).collect(),
                    delta: cmd.delta,
                    sigma: cmd.sigma,
                    beta: cmd.beta,
                    m_max: cmd.m_max,
                    ..cmd.common.spec(ExperimentKind::BoundsTable)
                };
                let rows = tabulate_bounds(&spec)?;
                emit(&cmd.common, &rows, &rows, &mut stdout)?;
                ("bounds", cmd.common, spec_params(&spec))
            }
        }
    };
    if let Some(path) = &common.out {
        let manifest = Manifest {
            command: name.to_string(),
            params: serde_json::json!({
                "common": &common,
                "window": WindowKind::from(common.window),
                "format": common.output_format(),
                "command": params,
            }),
            seed: common.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_at,
            duration_s: started.elapsed().as_secs_f64(),
        };
        write_manifest(path, &manifest)?;
    }
    Ok(())
}

#[derive(Debug, Serialize, serde::Deserialize)]
struct WindowSample {
    q: usize,
    re: f64,
    im: f64,
}

impl CsvRow for WindowSample {
    const HEADER: &'static [&'static str] = &["q", "re", "im"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.q.to_string(),
            super::io::format_float(self.re),
            super::io::format_float(self.im),
        ]
    }
}

#[derive(Debug, Serialize)]
struct RecoverSummary {
    n: usize,
    #[serde(rename = "S")]
    s: usize,
    success: bool,
    relative_error: f64,
    residual: f64,
    iterations: usize,
    converged: bool,
    certified: bool,
}

fn spec_params(spec: &ExperimentSpec) -> serde_json::Value {
    serde_json::to_value(spec).expect("serialisable")
}

/// Writes `rows` as CSV or `full` as JSON to `--out`, or CSV rows to `console`.
fn emit<R: CsvRow, F: Serialize + ?Sized>(
    common: &Common,
    rows: &[R],
    full: &F,
    console: &mut dyn Write,
) -> Result<()> {
    match (&common.out, common.format) {
        (Some(path), FormatArg::Csv) => write_csv(path, rows),
        (Some(path), FormatArg::Json) => write_json(path, full),
        (None, _) => write_csv_to(console, rows, Path::new("<stdout>")),
    }
}

fn parse_support(text: &str, n: usize) -> Result<SupportSet> {
    let indices = text
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let parse = |part: Option<&str>| part.and_then(|p| p.trim().parse::<usize>().ok());
            let mut parts = t.split(':');
            match (parse(parts.next()), parse(parts.next()), parts.next()) {
                (Some(k), Some(l), None) if k < n && l < n => Ok(TFIndex { k, l }),
                _ => Err(Error::InvalidInput(format!(
                    "support entry {t:?} is not k:l with 0 <= k, l < {n}"
                ))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    SupportSet::new(indices, n)
}
