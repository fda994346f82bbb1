//! Command-line front end. Every command reads JSON files and writes a JSON
//! report to `--output` or standard output.
//!
//! Exit codes: 0 success or pass, 1 check failed, 2 input error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nalgebra::DVector;
use serde::Serialize;

use crate::augment::{augment, reduce};
use crate::io::{
    self, named, parse_json, read_system, to_json, AugmentationFile, CheckReportFile,
    CompletionFile, RealizationFile, SystemFile, SystemInput, TrajectoryFile, TransformReportFile,
    SCHEMA_VERSION,
};
use crate::matkit::ops::diag_j;
use crate::matkit::symplectic_complete;
use crate::moments::{default_sigma0, simulate, skew_drift};
use crate::realizability::{
    check_general, check_quantum, check_standard, check_standard_partitioned, DEFAULT_CHECK_TOL,
};
use crate::synthesis::{close_loop, generate_realizable, reconstruction_errors, synthesize};
use crate::sysmodel::{Dimensions, GeneralSystem, StandardSystem};
use crate::transform::{default_samples, to_standard, transfer_equiv_check};
use crate::{Error, Result};

/// Environment variable overriding the default tolerance.
pub const TOL_ENV: &str = "MIXSYNTH_TOL";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "mixsynth",
    version,
    about = "Realizability checks and synthesis for mixed quantum-classical linear systems"
)]
pub struct Cli {
    /// Tolerance (overrides the input file and the MIXSYNTH_TOL variable).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the report here instead of standard output.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Suppress the one-line summary on standard error.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the realizability conditions of a system file.
    Check {
        input: PathBuf,
        /// Require the file to have this form (standard, general, quantum).
        #[arg(long)]
        form: Option<String>,
    },
    /// Convert a general-form system to standard form.
    ToStandard { input: PathBuf },
    /// Synthesize a realization of a standard-form system.
    Synthesize { input: PathBuf },
    /// Close the loop of a realization and compare with a reference system.
    VerifyRealization {
        realization: PathBuf,
        #[arg(long)]
        reference: PathBuf,
    },
    /// Integrate first and second moments of a standard-form system.
    Simulate {
        input: PathBuf,
        #[arg(long, default_value_t = 5.0)]
        t_final: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
    },
    /// Complete the quantum output rows D_q to a symplectic matrix.
    CompleteSymplectic { input: PathBuf },
    /// Build the augmented and reduced systems of a standard-form system.
    Augment { input: PathBuf },
    /// Write a random realizable standard-form system.
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n_q: usize,
        #[arg(long)]
        n_c: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n_yq: usize,
        #[arg(long)]
        n_yc: usize,
        #[arg(long, default_value_t = 0)]
        n_w1: usize,
    },
}

/// Result of a command: the report to write, the exit code and a summary.
struct Outcome {
    report: String,
    code: i32,
    summary: String,
}

impl Outcome {
    fn new<T: Serialize>(value: &T, passed: bool, summary: String) -> Self {
        Self {
            report: to_json(value),
            code: if passed { EXIT_OK } else { EXIT_FAILED },
            summary,
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotRealizable(_) | Error::Inconsistent { .. } | Error::NonFinite { .. } => {
            EXIT_FAILED
        }
        _ => EXIT_INPUT,
    }
}

fn env_tol() -> Result<Option<f64>> {
    match std::env::var(TOL_ENV) {
        Ok(s) => s
            .trim()
            .parse::<f64>()
            .map(Some)
            .map_err(|_| Error::Parse(format!("{TOL_ENV}: not a number: {s:?}"))),
        Err(_) => Ok(None),
    }
}

struct Ctx {
    flag_tol: Option<f64>,
}

impl Ctx {
    fn tol(&self, file_tol: Option<f64>) -> Result<f64> {
        let tol = match self.flag_tol.or(file_tol) {
            Some(t) => t,
            None => env_tol()?.unwrap_or(DEFAULT_CHECK_TOL),
        };
        if !tol.is_finite() || tol <= 0.0 {
            return Err(Error::Invalid(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        Ok(tol)
    }

    fn standard(&self, path: &Path) -> Result<(StandardSystem, f64)> {
        match read_system(path)? {
            (SystemInput::Standard(s), t) => {
                if let Some(v) = s.validate().into_iter().next() {
                    return Err(Error::Invalid(v.to_string()));
                }
                Ok((s, self.tol(t)?))
            }
            (other, _) => Err(Error::Invalid(format!(
                "expected a standard-form system, found form {}",
                other.form()
            ))),
        }
    }
}

fn cmd_check(ctx: &Ctx, input: &Path, form: Option<&str>) -> Result<Outcome> {
    let (sys, file_tol) = read_system(input)?;
    if let Some(f) = form {
        if f != sys.form() {
            return Err(Error::Invalid(format!(
                "expected form {f}, found {}",
                sys.form()
            )));
        }
    }
    let tol = ctx.tol(file_tol)?;
    let (report, partitioned) = match &sys {
        SystemInput::Standard(s) => {
            if let Some(v) = s.validate().into_iter().next() {
                return Err(Error::Invalid(v.to_string()));
            }
            (
                check_standard(s, tol),
                Some(check_standard_partitioned(s, tol)),
            )
        }
        SystemInput::General(g) => {
            if let Some(v) = g.validate().into_iter().next() {
                return Err(Error::Invalid(v.to_string()));
            }
            (check_general(g, tol), None)
        }
        SystemInput::Quantum(q) => {
            if let Some(v) = q
                .validate()
                .into_iter()
                .find(|v| !matches!(v, crate::sysmodel::Violation::DForm { .. }))
            {
                return Err(Error::Invalid(v.to_string()));
            }
            (check_quantum(q, tol), None)
        }
        SystemInput::Dq { .. } => {
            return Err(Error::Invalid(
                "form dq has no realizability conditions".into(),
            ))
        }
    };
    let passed = report.passed();
    let summary = format!(
        "check ({}): {} (worst: {})",
        sys.form(),
        if passed { "pass" } else { "fail" },
        report.worst.as_deref().unwrap_or("none")
    );
    let file = CheckReportFile {
        schema_version: SCHEMA_VERSION,
        form: sys.form().into(),
        tol,
        report,
        partitioned,
    };
    Ok(Outcome::new(&file, passed, summary))
}

fn cmd_to_standard(ctx: &Ctx, input: &Path) -> Result<Outcome> {
    let (g, tol) = match read_system(input)? {
        (SystemInput::General(g), t) => (g, ctx.tol(t)?),
        (SystemInput::Standard(s), t) => (GeneralSystem::from_standard(&s), ctx.tol(t)?),
        (other, _) => {
            return Err(Error::Invalid(format!(
                "cannot convert form {} to standard form",
                other.form()
            )))
        }
    };
    let tw = to_standard(&g, tol)?;
    let deviation = transfer_equiv_check(&g, &tw, &default_samples())?;
    let identity = tw.identity_residuals(&g);
    let summary = format!("to-standard: transfer deviation {deviation:e}");
    Ok(Outcome::new(
        &TransformReportFile::new(&tw, &identity, deviation, tol),
        true,
        summary,
    ))
}

fn cmd_synthesize(ctx: &Ctx, input: &Path) -> Result<Outcome> {
    let (sys, tol) = ctx.standard(input)?;
    let r = match synthesize(&sys, tol) {
        Ok(r) => r,
        Err(Error::NotRealizable(report)) => {
            let summary = format!(
                "synthesize: input not realizable (failing: {})",
                report.failing().join(", ")
            );
            let file = CheckReportFile {
                schema_version: SCHEMA_VERSION,
                form: "standard".into(),
                tol,
                report: *report,
                partitioned: None,
            };
            return Ok(Outcome::new(&file, false, summary));
        }
        Err(e) => return Err(e),
    };
    let errors = reconstruction_errors(&r, &sys);
    let relative = crate::synthesis::relative_reconstruction_error(&r, &sys);
    let mut file = RealizationFile::new(&r);
    file.tol = Some(tol);
    file.reconstruction_errors = named(&errors);
    file.relative_reconstruction_error = Some(relative);
    let passed = relative <= tol;
    Ok(Outcome::new(
        &file,
        passed,
        format!("synthesize: r = {}, reconstruction error {relative:e}", r.r),
    ))
}

#[derive(Serialize)]
struct VerificationFile {
    schema_version: u32,
    tol: f64,
    passed: bool,
    reconstruction_errors: Vec<io::NamedResidual>,
    relative_reconstruction_error: f64,
}

fn cmd_verify(ctx: &Ctx, realization: &Path, reference: &Path) -> Result<Outcome> {
    let (sys, tol) = ctx.standard(reference)?;
    let file: RealizationFile = parse_json(
        &io::read_text(realization)?,
        &realization.display().to_string(),
    )?;
    let r = file.into_realization()?;
    if r.dims != sys.dims {
        return Err(Error::Invalid(format!(
            "realization dims {:?} differ from reference dims {:?}",
            r.dims, sys.dims
        )));
    }
    let rebuilt = close_loop(&r);
    let errors = reconstruction_errors(&r, &sys);
    let relative = [
        (&rebuilt.a, &sys.a),
        (&rebuilt.b, &sys.b),
        (&rebuilt.c, &sys.c),
        (&rebuilt.d, &sys.d),
    ]
    .iter()
    .map(|(x, y)| (*x - *y).norm() / (1.0 + y.norm()))
    .fold(0.0, f64::max);
    let passed = relative <= tol;
    let out = VerificationFile {
        schema_version: SCHEMA_VERSION,
        tol,
        passed,
        reconstruction_errors: named(&errors),
        relative_reconstruction_error: relative,
    };
    Ok(Outcome::new(
        &out,
        passed,
        format!("verify-realization: error {relative:e}"),
    ))
}

fn cmd_simulate(ctx: &Ctx, input: &Path, t_final: f64, dt: f64) -> Result<Outcome> {
    let (sys, _) = ctx.standard(input)?;
    let theta = sys.structure().theta_n;
    let traj = simulate(
        &sys,
        &default_sigma0(&theta),
        &DVector::zeros(sys.dims.n()),
        t_final,
        dt,
    )?;
    let drift = skew_drift(&traj, &theta);
    Ok(Outcome::new(
        &TrajectoryFile::new(&traj, t_final, dt, drift),
        true,
        format!("simulate: skew drift {drift:e}"),
    ))
}

fn cmd_complete(ctx: &Ctx, input: &Path) -> Result<Outcome> {
    let (d_q, theta_w, tol) = match read_system(input)? {
        (SystemInput::Dq { d_q, theta_w }, t) => (d_q, theta_w, ctx.tol(t)?),
        (SystemInput::Standard(s), t) => (s.d_q(), diag_j(s.dims.m), ctx.tol(t)?),
        (other, _) => {
            return Err(Error::Invalid(format!(
                "cannot complete form {}",
                other.form()
            )))
        }
    };
    let completion = symplectic_complete(&d_q, &theta_w, tol)?;
    let stacked = completion.stacked(&d_q);
    let residual = (&stacked * &theta_w * stacked.transpose() - &theta_w).norm();
    let file = CompletionFile {
        schema_version: SCHEMA_VERSION,
        d_q_prime: io::rows_of(&completion.n_mat),
        stacked: io::rows_of(&stacked),
        symplectic_residual: residual,
    };
    Ok(Outcome::new(
        &file,
        true,
        format!("complete-symplectic: residual {residual:e}"),
    ))
}

fn cmd_augment(ctx: &Ctx, input: &Path) -> Result<Outcome> {
    let (sys, tol) = ctx.standard(input)?;
    let aug = augment(&sys, tol)?;
    let red = reduce(&aug, &diag_j(sys.dims.m));
    let report = check_quantum(&red.to_quantum(), tol);
    let passed = report.passed();
    let file = AugmentationFile {
        schema_version: SCHEMA_VERSION,
        tol,
        a_tilde: io::rows_of(&aug.a_tilde),
        b_tilde: io::rows_of(&aug.b_tilde),
        c_tilde: io::rows_of(&aug.c_tilde),
        d_tilde: io::rows_of(&aug.d_tilde),
        theta_tilde: io::rows_of(&aug.theta_tilde),
        c_bar: io::rows_of(&red.c_bar),
        relation_residuals: named(&aug.relation_residuals(&sys)),
        reduced_check: report,
    };
    Ok(Outcome::new(
        &file,
        passed,
        format!(
            "augment: reduced system {}",
            if passed { "pass" } else { "fail" }
        ),
    ))
}

fn cmd_generate(dims: Dimensions, seed: u64) -> Result<Outcome> {
    let sys = generate_realizable(dims, seed)?;
    Ok(Outcome::new(
        &SystemFile::from_standard(&sys),
        true,
        format!("generate: seed {seed}"),
    ))
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let ctx = Ctx { flag_tol: cli.tol };
    match &cli.command {
        Command::Check { input, form } => cmd_check(&ctx, input, form.as_deref()),
        Command::ToStandard { input } => cmd_to_standard(&ctx, input),
        Command::Synthesize { input } => cmd_synthesize(&ctx, input),
        Command::VerifyRealization {
            realization,
            reference,
        } => cmd_verify(&ctx, realization, reference),
        Command::Simulate { input, t_final, dt } => cmd_simulate(&ctx, input, *t_final, *dt),
        Command::CompleteSymplectic { input } => cmd_complete(&ctx, input),
        Command::Augment { input } => cmd_augment(&ctx, input),
        Command::Generate {
            seed,
            n_q,
            n_c,
            m,
            n_yq,
            n_yc,
            n_w1,
        } => cmd_generate(
            Dimensions::new(*n_q, *n_c, *m, *n_yq, *n_yc).with_w_split(*n_w1),
            *seed,
        ),
    }
}

/// Runs the command line `args` (including the program name), writing the
/// report to `out` (unless `--output` is given) and diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let outcome = match dispatch(&cli) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let Error::NotRealizable(report) = &e {
                let _ = out.write_all(to_json(report.as_ref()).as_bytes());
            }
            return exit_code(&e);
        }
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &outcome.report)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => out
            .write_all(outcome.report.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        let _ = writeln!(err, "error: {msg}");
        return EXIT_INPUT;
    }
    if !cli.quiet {
        let _ = writeln!(err, "{}", outcome.summary);
    }
    outcome.code
}

/// Runs with the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}
