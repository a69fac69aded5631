//! Batch driver behind the `ssmlab` binary.
//!
//! Exit codes: 0 when every residual and asserted bound passes, 1 when a
//! verification fails (outputs are still written), 2 on configuration,
//! I/O or precondition errors.

use crate::dissipative::{dissipative_koplienko_verify, dissipative_krein_verify};
use crate::error::{Error, Result};
use crate::functions::ScalarFunction;
use crate::generators::{gen, random_rational, random_trig, Instance, InstanceSpec};
use crate::io::{read_json, write_json, write_measure_csv, FunctionDoc, PathDoc, ReportDoc, SimplexMeasureDoc};
use crate::linalg::trace_norm;
use crate::perturb::PerturbationPath;
use crate::report::{BoundCheck, VerificationReport};
use crate::rng::SplitMix64;
use crate::ssm::{koplienko_ssm, koplienko_verify, krein_ssm, krein_verify, KOPLIENKO_DEFAULT_Q, KREIN_DEFAULT_Q};
use crate::suite::{run_suite, SuiteConfig};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "ssmlab", version, about = "Spectral shift measure verification driver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Verify the first-order trace formula on a self-adjoint path.
    VerifyKrein,
    /// Verify the second-order trace formula on a self-adjoint path.
    VerifyKoplienko,
    /// Verify both trace identities on a dissipative path.
    VerifyDissipative,
    /// Export the spectral shift measures of a self-adjoint path.
    ComputeSsm,
    /// Run the acceptance matrix.
    Suite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Report plus measure CSVs.
    Csv,
    /// Report only.
    Report,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Options {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides the seed of the instance, the function and the suite.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Gauss-Legendre order in the path variable.
    #[arg(long = "quad-q", global = true)]
    pub quad_q: Option<usize>,
    /// Relative residual tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, value_enum, global = true, default_value = "report")]
    pub format: Format,
}

/// Run configuration document. Relative file paths are resolved against
/// the directory of the configuration file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub instance: Option<InstanceSpec>,
    /// File holding a base and a direction tuple.
    #[serde(default)]
    pub path_file: Option<PathBuf>,
    #[serde(default)]
    pub function: Option<FunctionDoc>,
    #[serde(default)]
    pub function_file: Option<PathBuf>,
    #[serde(default)]
    pub quad_q: Option<usize>,
    #[serde(default)]
    pub koplienko_q: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub suite: Option<SuiteConfig>,
}

struct Context {
    config: RunConfig,
    base_dir: PathBuf,
    opts: Options,
}

impl Context {
    fn load(opts: Options) -> Result<Self> {
        let (config, base_dir) = match &opts.config {
            Some(p) => {
                if !p.is_file() {
                    return Err(Error::Io(format!("config file {} does not exist", p.display())));
                }
                let dir = p.parent().map(Path::to_path_buf).unwrap_or_default();
                (read_json::<RunConfig>(p)?, dir)
            }
            None => (RunConfig::default(), PathBuf::new()),
        };
        if let Some(t) = opts.tol.or(config.tol) {
            if !(t > 0.0) {
                return Err(Error::InvalidSpec(format!("tolerance {t} must be positive")));
            }
        }
        if opts.quad_q.or(config.quad_q) == Some(0) {
            return Err(Error::InvalidSpec("quadrature order must be positive".into()));
        }
        Ok(Self { config, base_dir, opts })
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn out_dir(&self) -> Result<PathBuf> {
        let dir = match (&self.opts.out, &self.config.out) {
            (Some(d), _) => d.clone(),
            (None, Some(d)) => self.resolve(d),
            (None, None) => PathBuf::from("ssmlab-out"),
        };
        fs::create_dir_all(&dir)?;
        Ok(dir)
    }

    fn seed(&self) -> Option<u64> {
        self.opts.seed
    }

    fn q(&self, default: usize) -> usize {
        self.opts.quad_q.or(self.config.quad_q).unwrap_or(default)
    }

    fn koplienko_q(&self) -> usize {
        self.opts.quad_q.or(self.config.koplienko_q).or(self.config.quad_q).unwrap_or(KOPLIENKO_DEFAULT_Q)
    }

    fn tol(&self, default: f64) -> f64 {
        self.opts.tol.or(self.config.tol).unwrap_or(default)
    }

    fn instance(&self) -> Result<Instance> {
        if let Some(spec) = &self.config.instance {
            let mut spec = spec.clone();
            if let Some(s) = self.seed() {
                spec.seed = s;
            }
            return gen(&spec);
        }
        let Some(p) = &self.config.path_file else {
            return Err(Error::InvalidSpec("config needs an instance spec or a path file".into()));
        };
        read_json::<PathDoc>(&self.resolve(p))?.to_instance()
    }

    /// Configured function, or a seeded random one of the requested kind.
    fn function(&self, arity: usize, kind: DefaultFunction) -> Result<ScalarFunction> {
        let doc = match (&self.config.function, &self.config.function_file) {
            (Some(d), _) => Some(d.clone()),
            (None, Some(p)) => Some(read_json::<FunctionDoc>(&self.resolve(p))?),
            (None, None) => None,
        };
        if let Some(doc) = doc {
            return doc.to_function();
        }
        let seed = self.seed().or(self.config.instance.as_ref().map(|s| s.seed)).unwrap_or(0);
        let mut rng = SplitMix64::new(seed).fork(0xF00D);
        match kind {
            DefaultFunction::Trig => random_trig(arity, 8, &mut rng),
            DefaultFunction::Rational => random_rational(arity, 3, false, &mut rng),
            DefaultFunction::LowerRational => random_rational(arity, 3, true, &mut rng),
        }
    }
}

#[derive(Clone, Copy)]
enum DefaultFunction {
    Trig,
    Rational,
    LowerRational,
}

fn write_report(dir: &Path, name: &str, r: &VerificationReport) -> Result<()> {
    write_json(&dir.join(name), &ReportDoc::from_report(r))
}

fn write_krein_measures(dir: &Path, path: &PerturbationPath, q: usize) -> Result<Vec<BoundCheck>> {
    let m = krein_ssm(path, q)?;
    let mut checks = Vec::new();
    for (j, mu) in m.quadrature.iter().enumerate() {
        write_measure_csv(fs::File::create(dir.join(format!("mu_{}.csv", j + 1)))?, mu)?;
        let bound = trace_norm(path.direction()[j].matrix());
        checks.push(BoundCheck::new(format!("measure_total_variation[{}]", j + 1), bound, mu.total_variation()));
    }
    Ok(checks)
}

fn write_koplienko_measures(dir: &Path, path: &PerturbationPath, f: &ScalarFunction, q: usize) -> Result<()> {
    for ((i, j), nu) in koplienko_ssm(path, f, q)? {
        write_json(&dir.join(format!("nu_{}_{}.json", i + 1, j + 1)), &SimplexMeasureDoc::from_measure(&nu))?;
    }
    Ok(())
}

fn summarize(out: &mut dyn Write, r: &VerificationReport) -> Result<()> {
    writeln!(
        out,
        "{}: rel residual {:.3e} (tol {:.1e}), {} bound checks, {}",
        r.identity,
        r.rel_residual,
        r.tolerance,
        r.bound_checks.len(),
        if r.passed() { "PASS" } else { "FAIL" }
    )?;
    for c in r.failures() {
        writeln!(out, "  failed {}: {:.6e} > {:.6e}", c.name, c.attained, c.bound)?;
    }
    Ok(())
}

fn run(cmd: &Command, ctx: &Context, stdout: &mut dyn Write) -> Result<bool> {
    let csv = ctx.opts.format == Format::Csv;
    match cmd {
        Command::VerifyKrein => {
            let path = ctx.instance()?.hermitian()?;
            let f = ctx.function(path.arity(), DefaultFunction::Trig)?;
            let q = ctx.q(KREIN_DEFAULT_Q);
            let r = krein_verify(&path, &f, q, ctx.tol(1e-8))?;
            let dir = ctx.out_dir()?;
            write_report(&dir, "krein_report.json", &r)?;
            if csv {
                write_krein_measures(&dir, &path, q)?;
            }
            summarize(stdout, &r)?;
            Ok(r.passed())
        }
        Command::VerifyKoplienko => {
            let path = ctx.instance()?.hermitian()?;
            let f = ctx.function(path.arity(), DefaultFunction::Rational)?;
            let q = ctx.koplienko_q();
            let r = koplienko_verify(&path, &f, q, ctx.tol(1e-7))?;
            let dir = ctx.out_dir()?;
            write_report(&dir, "koplienko_report.json", &r)?;
            if csv {
                write_koplienko_measures(&dir, &path, &f, q)?;
            }
            summarize(stdout, &r)?;
            Ok(r.passed())
        }
        Command::VerifyDissipative => {
            let path = ctx.instance()?.dissipative()?;
            let f = ctx.function(path.arity(), DefaultFunction::LowerRational)?;
            let tol = ctx.tol(1e-7);
            let k = dissipative_krein_verify(&path, &f, ctx.q(KREIN_DEFAULT_Q), tol)?;
            let kp = dissipative_koplienko_verify(&path, &f, ctx.koplienko_q(), tol)?;
            let dir = ctx.out_dir()?;
            write_report(&dir, "dissipative_krein_report.json", &k)?;
            write_report(&dir, "dissipative_koplienko_report.json", &kp)?;
            summarize(stdout, &k)?;
            summarize(stdout, &kp)?;
            Ok(k.passed() && kp.passed())
        }
        Command::ComputeSsm => {
            let path = ctx.instance()?.hermitian()?;
            let dir = ctx.out_dir()?;
            let checks = write_krein_measures(&dir, &path, ctx.q(KREIN_DEFAULT_Q))?;
            let f = ctx.function(path.arity(), DefaultFunction::Rational)?;
            if matches!(f, ScalarFunction::Rational(_)) {
                write_koplienko_measures(&dir, &path, &f, ctx.koplienko_q())?;
            }
            let docs: Vec<_> = checks.iter().map(crate::io::BoundCheckDoc::from_check).collect();
            write_json(&dir.join("ssm_report.json"), &docs)?;
            for c in &checks {
                writeln!(stdout, "{}: {:.6e} <= {:.6e} {}", c.name, c.attained, c.bound, if c.pass { "PASS" } else { "FAIL" })?;
            }
            Ok(checks.iter().all(|c| c.pass))
        }
        Command::Suite => {
            let mut cfg = ctx.config.suite.clone().unwrap_or_else(|| SuiteConfig::new(0));
            if let Some(s) = ctx.seed() {
                cfg.seed = s;
            }
            if let Some(q) = ctx.opts.quad_q {
                cfg.krein_q = q;
                cfg.koplienko_q = q;
            }
            let dir = ctx.out_dir()?;
            let summary = run_suite(&cfg, Some(&dir))?;
            for c in &summary.criteria {
                writeln!(
                    stdout,
                    "criterion {:>2} {:<26} {}  worst {:.3e} over {} instances",
                    c.id,
                    c.name,
                    if c.pass { "PASS" } else { "FAIL" },
                    c.worst,
                    c.instances
                )?;
            }
            Ok(summary.pass)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return ExitCode::from(2);
            }
            let _ = write!(stdout, "{e}");
            return ExitCode::SUCCESS;
        }
    };
    let outcome = Context::load(cli.opts.clone()).and_then(|ctx| run(&cli.command, &ctx, stdout));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            ExitCode::from(2)
        }
    }
}
