//! `l2lab`: command-line front end for the l2lab library.
//!
//! Exit status: 0 when every check passes, 1 when an identity check fails
//! (or, with `--strict`, a determinant-class or fit check), 2 for malformed
//! input, 3 when a numerical layer does not converge.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use l2lab::analytic_1d::{
    free_term_extract, interval_morse_system, small_torsion_prediction, torsion_report, witten_sweep, OneDSystem, WittenConfig, WittenRow,
};
use l2lab::hilbert_complex::CohomologyReport;
use l2lab::relative_anomaly::{run_theorem_suite, Outcome, SuiteConfig, TheoremCheck};
use l2lab::schema::{ComplexSchema, MorseSchema, OneDSchema, OperatorSchema};
use l2lab::tol;
use l2lab::vn_core::{fk_det_with, spectral_density_with, Alpha, SpectralConfig};
use l2lab::Error;
use serde_json::{json, Value};

const DEFAULT_TS: [f64; 7] = [40.0, 60.0, 90.0, 135.0, 200.0, 300.0, 400.0];
const DEFAULT_CELLS: usize = 4000;
const FREE_TERM_REL_TOL: f64 = 0.05;

#[derive(Parser, Debug)]
#[command(name = "l2lab", version, about = "L2-invariants at desk scale")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON input file.
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Output file (stdout when omitted; for fk-det, the spectral density CSV).
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Quadrature base cells (fk-det, torsion) or grid cells (witten).
    #[arg(long, global = true)]
    grid: Option<usize>,

    /// Maximal bisection depth of the adaptive quadrature.
    #[arg(long, global = true)]
    refine: Option<u32>,

    /// Eigenvalue band rejected by the Witten split, as `lo,hi`.
    #[arg(long, global = true, value_parser = parse_band)]
    guard_band: Option<(f64, f64)>,

    /// Kernel threshold (fk-det, torsion), check tolerance (verify) or
    /// split-identity tolerance (witten).
    #[arg(long, global = true)]
    tolerance: Option<f64>,

    /// Treat determinant-class failures, out-of-scope checks and free-term
    /// mismatches as failures.
    #[arg(long, global = true)]
    strict: bool,

    /// Seed of the randomized suites.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fuglede-Kadison determinant and Novikov-Shubin invariant of an operator.
    FkDet,
    /// L2-torsion and cohomology of a complex, Morse system or 1-D system.
    Torsion,
    /// Evaluate the identity suite.
    Verify {
        #[arg(long, value_enum, conflicts_with_all = ["suite"])]
        example: Option<Example>,
        #[arg(long, value_enum)]
        suite: Option<Suite>,
    },
    /// Witten deformation sweep on an interval system.
    Witten {
        /// Deformation parameters, comma separated.
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Example {
    Interval,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Suite {
    Combinatorial,
    Full,
}

#[derive(Debug)]
enum Failure {
    Check(String),
    Input(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Input(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Input(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Run = Result<(), Failure>;

fn parse_band(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(format!("need 0 < lo < hi, got {lo},{hi}"));
    }
    Ok((lo, hi))
}

impl Cli {
    fn check_ranges(&self) -> Run {
        if let Some(g) = self.grid {
            if !(2..=10_000_000).contains(&g) {
                return Err(Failure::Input(format!("--grid {g} outside [2, 10^7]")));
            }
        }
        if let Some(r) = self.refine {
            if r > 60 {
                return Err(Failure::Input(format!("--refine {r} above 60")));
            }
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t < 1.0) {
                return Err(Failure::Input(format!("--tolerance {t} outside (0, 1)")));
            }
        }
        Ok(())
    }

    fn spectral_config(&self) -> SpectralConfig {
        let mut cfg = SpectralConfig::default();
        if let Some(t) = self.tolerance {
            cfg.tau = t;
        }
        if let Some(g) = self.grid {
            cfg.quad.base_cells = g;
        }
        if let Some(r) = self.refine {
            cfg.quad.max_depth = r;
        }
        cfg
    }

    fn read_input<T: serde::de::DeserializeOwned>(&self) -> Result<T, Failure> {
        let path = self.input.as_ref().ok_or_else(|| Failure::Input("--input is required".into()))?;
        read_json(path)
    }

    /// Writes `text` to `--output` or stdout.
    fn emit(&self, text: &str) -> Run {
        match &self.output {
            Some(p) => fs::write(p, text)?,
            None => io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    parse_json(path, &read_text(path)?)
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Input(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of ASCII numbers"))
}

/// Shortest round-trip form; `-0.0` prints as `0.0`.
fn num(x: f64) -> String {
    format!("{:?}", x + 0.0)
}

fn alpha_text(a: Option<f64>) -> String {
    match a {
        Some(v) if v.is_infinite() => "inf+".into(),
        Some(v) => num(v),
        None => "unresolved".into(),
    }
}

fn alpha_note(a: &Alpha) -> String {
    match a {
        Alpha::Exponent { residual, .. } => format!("fit residual {residual:.3e}"),
        Alpha::Gap { gap } => format!("spectral gap {gap:.6e}"),
        Alpha::Unresolved { reason } => reason.clone(),
    }
}

fn alpha_json(a: Option<f64>) -> Value {
    match a {
        Some(v) if v.is_infinite() => json!("inf+"),
        Some(v) => json!(v),
        None => Value::Null,
    }
}

fn fk_det_cmd(cli: &Cli) -> Run {
    let schema: OperatorSchema = cli.read_input()?;
    let op = schema.build()?;
    let cfg = cli.spectral_config();
    let det = fk_det_with(&op, &cfg)?;
    let sd = spectral_density_with(&op, None, &cfg)?;
    let alpha = sd.alpha.value();
    if let Some(p) = &cli.output {
        let rows = sd.samples.iter().map(|&(l, f)| vec![num(l), num(f)]);
        fs::write(p, csv_string(&["lambda", "F"], rows)?)?;
    }
    let out = match cli.format {
        None => format!("det={} alpha={} class={}\n", num(det.det()), alpha_text(alpha), det.determinant_class),
        Some(Format::Json) => pretty(&json!({
            "det": det.det(),
            "log_det": det.log_det,
            "determinant_class": det.determinant_class,
            "error_estimate": det.error_estimate,
            "alpha": alpha_json(alpha),
            "alpha_note": alpha_note(&sd.alpha),
            "kernel_dim": sd.kernel_dim,
            "tau": cfg.tau,
        })),
        Some(Format::Csv) => csv_string(
            &["det", "log_det", "alpha", "determinant_class", "error_estimate"],
            [vec![num(det.det()), num(det.log_det), alpha_text(alpha), det.determinant_class.to_string(), num(det.error_estimate)]],
        )?,
    };
    io::stdout().write_all(out.as_bytes())?;
    if cli.strict && !det.determinant_class {
        return Err(Failure::Check("operator is not of determinant class".into()));
    }
    Ok(())
}

fn cohomology_json(r: &CohomologyReport, tau: f64) -> Value {
    json!({
        "log_torsion": r.log_torsion,
        "euler_characteristic": r.euler_characteristic,
        "kernel_tau": tau,
        "degrees": r.degrees.iter().map(|d| json!({
            "degree": d.degree,
            "rank": d.rank,
            "betti": d.betti,
            "alpha": alpha_json(d.alpha),
            "alpha_note": d.alpha_note,
            "determinant_class": d.determinant_class,
            "log_det": d.log_det,
        })).collect::<Vec<_>>(),
    })
}

fn torsion_cmd(cli: &Cli) -> Run {
    let path = cli.input.as_deref().ok_or_else(|| Failure::Input("--input is required".into()))?;
    let text = read_text(path)?;
    let raw: Value = parse_json(path, &text)?;
    let cfg = cli.spectral_config();
    let (report, degrees, strict_ok) = if raw.get("base").is_some() {
        let sys = parse_json::<OneDSchema>(path, &text)?.build()?;
        let r = torsion_report(&sys)?;
        let v = serde_json::to_value(&r).expect("report serializes");
        (v, None, true)
    } else {
        let (complex, morse) = if raw.get("orbits").is_some() {
            let ms = parse_json::<MorseSchema>(path, &text)?.build()?;
            (ms.build_ms_complex()?, true)
        } else {
            (parse_json::<ComplexSchema>(path, &text)?.build()?, false)
        };
        let r = complex.cohomology_with(&cfg)?;
        let mut v = cohomology_json(&r, cfg.tau);
        if morse {
            v["log_t_ms"] = json!(r.log_torsion.map(|t| -t));
        }
        let ok = r.log_torsion.is_some();
        (v, Some(r), ok)
    };
    let text = match (cli.format, &degrees) {
        (Some(Format::Csv), Some(r)) => csv_string(
            &["degree", "rank", "betti", "alpha", "determinant_class", "log_det"],
            r.degrees.iter().map(|d| {
                vec![
                    d.degree.to_string(),
                    d.rank.to_string(),
                    num(d.betti),
                    alpha_text(d.alpha),
                    d.determinant_class.to_string(),
                    num(d.log_det),
                ]
            }),
        )?,
        (Some(Format::Csv), None) => {
            let obj = report.as_object().expect("report is an object");
            let keys: Vec<&str> = obj.keys().filter(|k| obj[*k].is_number()).map(String::as_str).collect();
            let row = keys.iter().map(|k| obj[*k].to_string()).collect();
            csv_string(&keys, [row])?
        }
        _ => pretty(&report),
    };
    cli.emit(&text)?;
    if cli.strict && !strict_ok {
        return Err(Failure::Check("complex is not of determinant class".into()));
    }
    Ok(())
}

fn suite_config(cli: &Cli, example: Option<Example>, suite: Option<Suite>) -> Result<SuiteConfig, Failure> {
    let mut cfg = match (example, suite, &cli.input) {
        (Some(Example::Interval), _, _) => SuiteConfig::interval_example(),
        (None, Some(Suite::Combinatorial), _) => SuiteConfig::combinatorial(0),
        (None, Some(Suite::Full), _) => SuiteConfig::default(),
        (None, None, Some(p)) => read_json(p)?,
        (None, None, None) => return Err(Failure::Input("verify needs --example, --suite or --input".into())),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    for (i, s) in cfg.systems.iter().enumerate() {
        s.build().map_err(|e| Failure::Input(format!("system {i}: {e}")))?;
    }
    Ok(cfg)
}

fn verify_cmd(cli: &Cli, example: Option<Example>, suite: Option<Suite>) -> Run {
    let cfg = suite_config(cli, example, suite)?;
    let mut checks = run_theorem_suite(&cfg);
    if let Some(t) = cli.tolerance {
        for c in checks.iter_mut().filter(|c| matches!(c.outcome, Outcome::Pass | Outcome::Fail)) {
            c.tolerance = t;
            c.pass = c.residual <= t;
            c.outcome = if c.pass { Outcome::Pass } else { Outcome::Fail };
        }
    }
    let text = match cli.format {
        None => table(&checks),
        Some(Format::Json) => pretty(&serde_json::to_value(&checks).expect("checks serialize")),
        Some(Format::Csv) => csv_string(
            &["id", "case", "lhs", "rhs", "residual", "tolerance", "outcome", "digest"],
            checks.iter().map(|c| {
                vec![
                    c.id.name().to_string(),
                    c.case.clone(),
                    num(c.lhs),
                    num(c.rhs),
                    num(c.residual),
                    num(c.tolerance),
                    outcome_name(c.outcome).to_string(),
                    c.digest.clone(),
                ]
            }),
        )?,
    };
    cli.emit(&text)?;
    let count = |o: Outcome| checks.iter().filter(|c| c.outcome == o).count();
    let (fail, err, oos) = (count(Outcome::Fail), count(Outcome::Error), count(Outcome::OutOfScope));
    if fail > 0 || (cli.strict && oos > 0) {
        return Err(Failure::Check(format!("{} of {} checks failed", fail + if cli.strict { oos } else { 0 }, checks.len())));
    }
    if err > 0 {
        return Err(Failure::Numeric(format!("{err} of {} checks could not be evaluated", checks.len())));
    }
    Ok(())
}

fn outcome_name(o: Outcome) -> &'static str {
    match o {
        Outcome::Pass => "pass",
        Outcome::Fail => "FAIL",
        Outcome::OutOfScope => "out_of_scope",
        Outcome::Error => "error",
    }
}

fn table(checks: &[TheoremCheck]) -> String {
    let mut s = String::new();
    for c in checks {
        s.push_str(&format!(
            "{:<12} {:<20} {:<48} residual {:>9.2e}  tol {:.0e}",
            outcome_name(c.outcome),
            c.id.name(),
            c.case,
            c.residual,
            c.tolerance
        ));
        if let Some(n) = &c.note {
            s.push_str(&format!("  ({n})"));
        }
        s.push('\n');
    }
    let pass = checks.iter().filter(|c| c.pass).count();
    s.push_str(&format!("{pass} of {} checks pass\n", checks.len()));
    s
}

fn witten_cmd(cli: &Cli, ts: &[f64]) -> Run {
    let sys = match &cli.input {
        Some(p) => read_json::<OneDSchema>(p)?.build()?,
        None => OneDSystem::interval(0.0, 1.0),
    };
    let ts = if ts.is_empty() { DEFAULT_TS.to_vec() } else { ts.to_vec() };
    if let Some(t) = ts.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Failure::Input(format!("deformation parameter {t} must be finite and nonnegative")));
    }
    let n = cli.grid.unwrap_or(DEFAULT_CELLS);
    let mut wcfg = WittenConfig::default();
    if let Some(b) = cli.guard_band {
        wcfg.guard_band = b;
    }
    let rows = witten_sweep(&sys, &ts, n, &wcfg)?;
    let summary = free_term_summary(&sys, &rows)?;
    let text = match cli.format {
        Some(Format::Json) => pretty(&json!({ "rows": rows, "free_term": summary })),
        _ => csv_string(
            &["t", "logT_sm", "logT_la", "logT_an", "residual", "small_rank", "log_vol"],
            rows.iter().map(|r| {
                vec![
                    num(r.t),
                    num(r.log_t_sm),
                    num(r.log_t_la),
                    num(r.log_t_an),
                    num(r.residual),
                    r.small_rank.to_string(),
                    r.log_vol.map(num).unwrap_or_default(),
                ]
            }),
        )?,
    };
    cli.emit(&text)?;
    if cli.format != Some(Format::Json) {
        let line = format!("free term: {}\n", serde_json::to_string(&summary).expect("summary serializes"));
        if cli.output.is_some() {
            io::stdout().write_all(line.as_bytes())?;
        } else {
            io::stderr().write_all(line.as_bytes())?;
        }
    }
    let tol = cli.tolerance.unwrap_or(1e-10);
    if let Some(r) = rows.iter().find(|r| r.residual > tol * (1.0 + r.log_t_an.abs())) {
        return Err(Failure::Check(format!("split identity residual {:e} at t = {}", r.residual, r.t)));
    }
    if cli.strict && summary["within_tolerance"] == json!(false) {
        return Err(Failure::Check("free term differs from the small-torsion prediction".into()));
    }
    Ok(())
}

/// Fit of `log T^Sm(t) − log Vol(t)` against the constant term predicted
/// from the Morse complex; `null` fields when fewer than six samples exist.
fn free_term_summary(sys: &OneDSystem, rows: &[WittenRow]) -> Result<Value, Failure> {
    let samples: Vec<(f64, f64)> = rows.iter().filter(|r| r.t > 0.0).filter_map(|r| r.log_vol.map(|v| (r.t, r.log_t_sm - v))).collect();
    let ms = interval_morse_system(sys)?.ms_torsion()?;
    let predicted = small_torsion_prediction(ms, &sys.critical_points(), sys.fiber_dim, 1);
    let fit = match free_term_extract(&samples) {
        Ok(f) => f,
        Err(e @ Error::IllConditioned { .. }) => return Err(Failure::Numeric(e.to_string())),
        Err(e) => {
            return Ok(json!({ "fitted": null, "predicted": predicted, "note": e.to_string() }));
        }
    };
    let rel = ((fit.free_term - predicted) / predicted).abs();
    Ok(json!({
        "fitted": fit.free_term,
        "predicted": predicted,
        "relative_error": rel,
        "tolerance": FREE_TERM_REL_TOL,
        "within_tolerance": rel < FREE_TERM_REL_TOL,
        "fit_residual": fit.residual,
        "condition": fit.condition,
        "condition_max": tol::FIT_CONDITION_MAX,
    }))
}

fn run(cli: &Cli) -> Run {
    cli.check_ranges()?;
    match &cli.command {
        Command::FkDet => fk_det_cmd(cli),
        Command::Torsion => torsion_cmd(cli),
        Command::Verify { example, suite } => verify_cmd(cli, *example, *suite),
        Command::Witten { t } => witten_cmd(cli, t),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("l2lab: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
