//! The `polydensity` command-line front end.
//!
//! Every command reads one JSON document (or every `*.json` file of a
//! directory with `--batch`) and writes one JSON report. Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0  | success |
//! | 2  | unreadable input, malformed JSON, bad flag value (including `Im λ ≤ 0`) |
//! | 3  | invalid measure |
//! | 4  | operators are not Hermitian/unitary or do not commute |
//! | 5  | family is not cyclic |
//! | 6  | model residuals above tolerance |
//! | 10 | polynomials not dense |
//! | 11 | not canonical |

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::json::{parse, to_pretty};
use crate::kernel::Tolerances;
use crate::l2space::{density_test, DensityReport};
use crate::measures::{Measure, MeasureJson};
use crate::moments::{matrix_moments, strip_moments, MomentsJson};
use crate::resolvents::{cayley_power_check, default_lambdas, verify_canonical_hamburger, verify_canonical_strip, CanonicalReport, CayleyReport};
use crate::spectral::{cyclicity_check, model_unitary, random_su_set, spectral_multiplicity, ModelResiduals, SuSetJson};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INVALID_MEASURE: i32 = 3;
pub const EXIT_NOT_COMMUTING: i32 = 4;
pub const EXIT_NON_CYCLIC: i32 = 5;
pub const EXIT_MODEL_RESIDUAL: i32 = 6;
pub const EXIT_NOT_DENSE: i32 = 10;
pub const EXIT_NOT_CANONICAL: i32 = 11;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Domain(_) | Error::Window(_) => EXIT_PARSE,
        Error::InvalidMeasure(_) | Error::DegenerateAtom(_) | Error::Positivity(_) | Error::Dimension(_) => {
            EXIT_INVALID_MEASURE
        }
        Error::NotCommuting(_) => EXIT_NOT_COMMUTING,
        Error::NonCyclic(_) => EXIT_NON_CYCLIC,
        Error::WellDefinedness(_) => EXIT_MODEL_RESIDUAL,
    }
}

#[derive(Debug, Parser)]
#[command(name = "polydensity", version, about = "Moment, density and canonicality checks for atomic measures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Moments S_0..S_n of a matrix measure, or s_{m,n} of a strip measure.
    Moments(Common),
    /// Density of polynomials in L²(M).
    Density(Common),
    /// Unitary model of a commuting SU-set with a cyclic family.
    ModelVerify(Common),
    /// Resolvent canonicality checks.
    Canonical(Common),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Input JSON document.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Report destination (stdout when absent; a directory with --batch).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub tol_psd: Option<f64>,
    #[arg(long)]
    pub tol_rank: Option<f64>,
    #[arg(long)]
    pub tol_res: Option<f64>,
    /// Degree window n for matrix measures.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub mmax: Option<usize>,
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Spectral parameter such as "i", "2i" or "1+1i"; repeatable.
    #[arg(long = "lambda", value_parser = parse_lambda)]
    pub lambdas: Vec<Complex64>,
    /// Seed for a generated SU-set when no input is given.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Dimension of a generated SU-set.
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
    /// Number of Hermitian operators of a generated SU-set.
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    /// Number of unitary operators of a generated SU-set.
    #[arg(long, default_value_t = 1)]
    pub l: usize,
    /// Process every *.json file of a directory.
    #[arg(long)]
    pub batch: Option<PathBuf>,
}

fn parse_lambda(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let t = match t.as_str() {
        "i" | "+i" => "1i".to_string(),
        "-i" => "-1i".to_string(),
        _ => t.replace("+i", "+1i").replace("-i", "-1i"),
    };
    Complex64::from_str(&t).map_err(|_| format!("cannot parse {s:?} as a complex number"))
}

impl Common {
    pub fn tolerances(&self) -> Result<Tolerances, Error> {
        let mut tol = Tolerances::default();
        if let Some(v) = self.tol_psd {
            tol.psd_eps = v;
        }
        if let Some(v) = self.tol_rank {
            tol.rank_eps = v;
        }
        if let Some(v) = self.tol_res {
            tol.residual_eps = v;
        }
        tol.validate()?;
        Ok(tol)
    }
}

/// A report together with the exit code it implies.
pub struct Outcome {
    pub code: i32,
    pub json: String,
}

impl Outcome {
    fn ok<T: Serialize>(value: &T, pass: bool, fail_code: i32) -> Self {
        Outcome { code: if pass { EXIT_OK } else { fail_code }, json: to_pretty(value) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalOutput {
    #[serde(flatten)]
    pub report: CanonicalReport,
    pub density: DensityReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cayley: Option<CayleyReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOutput {
    pub n: usize,
    pub order: (usize, usize),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub multiplicity: usize,
    pub family_size: usize,
    pub cyclic: bool,
    pub ok: bool,
    pub max_residual: f64,
    pub residuals: ModelResiduals,
}

fn read_input(path: Option<&Path>) -> Result<String, Error> {
    let path = path.ok_or_else(|| Error::Parse("--input is required".into()))?;
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_measure(text: &str, tol: &Tolerances) -> Result<Measure, Error> {
    parse::<MeasureJson>(text)?.into_measure(tol)
}

pub fn cmd_moments(text: &str, c: &Common) -> Result<Outcome, Error> {
    let tol = c.tolerances()?;
    let out = match load_measure(text, &tol)? {
        Measure::Matrix(m) => MomentsJson::from(&matrix_moments(&m, c.window.unwrap_or(2 * m.len()))),
        Measure::Strip(s) => MomentsJson::from(&strip_moments(&s, c.mmax.unwrap_or(s.len()), c.nmax.unwrap_or(s.len()))),
    };
    Ok(Outcome::ok(&out, true, EXIT_OK))
}

pub fn cmd_density(text: &str, c: &Common) -> Result<Outcome, Error> {
    let tol = c.tolerances()?;
    let report = density_test(&load_measure(text, &tol)?, &tol)?;
    Ok(Outcome::ok(&report, report.dense, EXIT_NOT_DENSE))
}

pub fn cmd_canonical(text: &str, c: &Common) -> Result<Outcome, Error> {
    let tol = c.tolerances()?;
    let lambdas = if c.lambdas.is_empty() { default_lambdas() } else { c.lambdas.clone() };
    if let Some(bad) = lambdas.iter().find(|l| !(l.im > 0.0)) {
        return Err(Error::Domain(format!("λ = {bad} must have positive imaginary part")));
    }
    let measure = load_measure(text, &tol)?;
    let density = density_test(&measure, &tol)?;
    let out = match &measure {
        Measure::Matrix(m) => CanonicalOutput {
            report: verify_canonical_hamburger(m, &lambdas, c.window, &tol)?,
            density,
            cayley: None,
        },
        Measure::Strip(s) => {
            let window = match (c.mmax, c.nmax) {
                (None, None) => None,
                (m, n) => Some((m.unwrap_or(s.len()), n.unwrap_or(s.len()))),
            };
            let mut report = verify_canonical_strip(s, &lambdas, window, &tol)?;
            let cayley_window = window.map(|(m, n)| (m, n.max(3)));
            let cayley = cayley_power_check(s, (-3, 3), (-3, 3), cayley_window, &tol)?;
            if cayley.max_deviation > tol.residual_eps * s.total_mass().max(1.0) {
                report.canonical = false;
                report.flags.push(format!("Cayley power deviation {:e}", cayley.max_deviation));
            }
            CanonicalOutput { report, density, cayley: Some(cayley) }
        }
    };
    Ok(Outcome::ok(&out, out.report.canonical, EXIT_NOT_CANONICAL))
}

pub fn cmd_model_verify(text: Option<&str>, c: &Common) -> Result<Outcome, Error> {
    let tol = c.tolerances()?;
    let (set, family, seed) = match text {
        Some(text) => {
            let (set, family) = parse::<SuSetJson>(text)?.into_parts(&tol)?;
            let family = family.ok_or_else(|| Error::Parse("SU-set input has no \"family\"".into()))?;
            (set, family, None)
        }
        None => {
            let seed = c.seed.ok_or_else(|| Error::Parse("either --input or --seed is required".into()))?;
            let g = random_su_set(c.dim, (c.r, c.l), seed).map_err(|e| Error::Parse(e.to_string()))?;
            (g.set, g.family, Some(seed))
        }
    };
    if !cyclicity_check(&set, &family, &tol)? {
        return Err(Error::NonCyclic(format!(
            "{} vector(s) do not generate the {}-dimensional space",
            family.len(),
            set.dim()
        )));
    }
    let model = model_unitary(&set, &family, &tol)?;
    let max_residual = model.residuals.max();
    let ok = max_residual <= tol.residual_eps;
    let out = ModelOutput {
        n: set.dim(),
        order: set.order(),
        seed,
        multiplicity: spectral_multiplicity(&set, &tol),
        family_size: family.len(),
        cyclic: true,
        ok,
        max_residual,
        residuals: model.residuals,
    };
    Ok(Outcome::ok(&out, ok, EXIT_MODEL_RESIDUAL))
}

fn dispatch(command: &Command, input: Option<&Path>) -> Result<Outcome, Error> {
    match command {
        Command::Moments(c) => cmd_moments(&read_input(input)?, c),
        Command::Density(c) => cmd_density(&read_input(input)?, c),
        Command::Canonical(c) => cmd_canonical(&read_input(input)?, c),
        Command::ModelVerify(c) => match input {
            Some(p) => cmd_model_verify(Some(&read_input(Some(p))?), c),
            None => cmd_model_verify(None, c),
        },
    }
}

fn common(command: &Command) -> &Common {
    match command {
        Command::Moments(c) | Command::Density(c) | Command::ModelVerify(c) | Command::Canonical(c) => c,
    }
}

#[derive(Debug, Serialize)]
struct ErrorReport<'a> {
    error: String,
    exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<&'a str>,
}

fn write_or_print(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Parse(format!("{}: {e}", p.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Error::Parse(e.to_string())),
    }
}

fn run_single(command: &Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let c = common(command);
    match dispatch(command, c.input.as_deref()) {
        Ok(outcome) => match write_or_print(c.output.as_deref(), &outcome.json, stdout) {
            Ok(()) => outcome.code,
            Err(e) => {
                let _ = writeln!(stderr, "polydensity: {e}");
                EXIT_PARSE
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "polydensity: {e}");
            exit_code(&e)
        }
    }
}

/// Each `*.json` file in the directory is processed in name order. Reports
/// go to `<output>/<stem>.report.json` (errors as `{"error", "exit_code"}`);
/// the exit code is that of the first file that did not succeed.
fn run_batch(command: &Command, dir: &Path, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let c = common(command);
    let mut files: Vec<PathBuf> = match fs::read_dir(dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect(),
        Err(e) => {
            let _ = writeln!(stderr, "polydensity: {}: {e}", dir.display());
            return EXIT_PARSE;
        }
    };
    files.sort();
    if let Some(out) = &c.output {
        if let Err(e) = fs::create_dir_all(out) {
            let _ = writeln!(stderr, "polydensity: {}: {e}", out.display());
            return EXIT_PARSE;
        }
    }
    let mut first_failure = EXIT_OK;
    for file in &files {
        let name = file.file_name().and_then(|n| n.to_str()).unwrap_or("");
        let (code, json) = match dispatch(command, Some(file)) {
            Ok(o) => (o.code, o.json),
            Err(e) => {
                let code = exit_code(&e);
                (code, to_pretty(&ErrorReport { error: e.to_string(), exit_code: code, input: Some(name) }))
            }
        };
        if first_failure == EXIT_OK {
            first_failure = code;
        }
        let target = c.output.as_ref().map(|o| {
            let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or("input");
            o.join(format!("{stem}.report.json"))
        });
        if let Err(e) = write_or_print(target.as_deref(), &json, stdout) {
            let _ = writeln!(stderr, "polydensity: {e}");
            return EXIT_PARSE;
        }
    }
    first_failure
}

/// Parse arguments (including the program name) and run; returns the exit
/// code instead of exiting.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = stdout.write_all(rendered.as_bytes());
            } else {
                let _ = stderr.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match &common(&cli.command).batch {
        Some(dir) => run_batch(&cli.command, dir, stdout, stderr),
        None => run_single(&cli.command, stdout, stderr),
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::c64;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with(std::iter::once("polydensity").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn lambda_syntax() {
        assert_eq!(parse_lambda("i").unwrap(), c64(0.0, 1.0));
        assert_eq!(parse_lambda("2i").unwrap(), c64(0.0, 2.0));
        assert_eq!(parse_lambda("1+i").unwrap(), c64(1.0, 1.0));
        assert_eq!(parse_lambda("1+1i").unwrap(), c64(1.0, 1.0));
        assert_eq!(parse_lambda("0.5-2i").unwrap(), c64(0.5, -2.0));
        assert_eq!(parse_lambda("3").unwrap(), c64(3.0, 0.0));
        assert!(parse_lambda("abc").is_err());
    }

    #[test]
    fn exit_code_vocabulary() {
        assert_eq!(exit_code(&Error::Parse(String::new())), 2);
        assert_eq!(exit_code(&Error::InvalidMeasure(String::new())), 3);
        assert_eq!(exit_code(&Error::NotCommuting(String::new())), 4);
        assert_eq!(exit_code(&Error::NonCyclic(String::new())), 5);
        assert_eq!(exit_code(&Error::WellDefinedness(1.0)), 6);
    }

    #[test]
    fn missing_input_is_a_parse_error() {
        let (code, _, err) = run_capture(&["density"]);
        assert_eq!(code, 2);
        assert!(err.contains("--input"));
    }

    #[test]
    fn unknown_flag_is_a_parse_error() {
        assert_eq!(run_capture(&["density", "--bogus"]).0, 2);
    }

    #[test]
    fn seeded_model_verify_succeeds() {
        let (code, out, _) = run_capture(&["model-verify", "--seed", "1", "--dim", "8", "--r", "1", "--l", "1"]);
        assert_eq!(code, 0, "{out}");
        let report: ModelOutput = serde_json::from_str(&out).unwrap();
        assert!(report.ok && report.max_residual <= 1e-9);
    }
}
