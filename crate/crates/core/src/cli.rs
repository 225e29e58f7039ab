//! Command-line front end. Every command prints a JSON report (CSV for
//! `scan`) carrying its run manifest; `--out` also writes the files.
//!
//! Exit codes: 0 success, 1 numeric or verification failure, 2 usage error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::asymptotics::recession_report;
use crate::curvature::{
    analyze_point, commutation_residual, fundamental_forms, ricci_coordinate, ricci_from_shape,
    shape_spectrum,
};
use crate::error::Error;
use crate::grid::{GridFunction, GridSpec};
use crate::height_field::{default_step, fd_validate_jet, HeightField, SurfaceDescriptor, SurfaceKind};
use crate::inequalities::{key_factors, regime_report, scan_grid};
use crate::linalg::{max_abs, max_abs_diff};
use crate::plap::{solve_p_harmonic, viscosity_probe, SolverConfig};
use crate::report::{to_json_string, write_scan_csv, Envelope, RunManifest};
use crate::rigidity::{classify_field, flat_direction_check, ClassifyOptions, GlobalAnalysis, VerdictRecord};
use crate::verify::{run_suite, Suite, ToleranceProfile};

#[derive(Debug, Parser)]
#[command(name = "hyperlab", version, about = "Curvature and asymptotics of graphs in the upper half-space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Point report: metric, second fundamental form, spectrum, Ricci, regime.
    Analyze(AnalyzeArgs),
    /// Per-node CSV of spectrum, Ricci minimum, key factors, density, regime.
    Scan(ScanArgs),
    /// Verdict from the constancy scan and the sublevel analysis.
    Classify(ClassifyArgs),
    /// p-harmonic Dirichlet solve.
    Solve(SolveArgs),
    /// Viscosity comparison probe for log f on a box.
    Probe(ProbeArgs),
    /// Sublevel components and asymptotic boundary count.
    Boundary(BoundaryArgs),
    /// Acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct SurfaceArg {
    /// Surface descriptor JSON file.
    #[arg(long)]
    pub surface: PathBuf,
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Directory for report files.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub surface: SurfaceArg,
    /// Comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    pub point: String,
    #[arg(long, default_value = "strict")]
    pub tolerance_profile: String,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub surface: SurfaceArg,
    /// `lo1,..,lon:hi1,..,hin:spacing` or a grid header JSON file.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub surface: SurfaceArg,
    #[arg(long, default_value = "1,2,3,4")]
    pub levels: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Boundary data `log f` from a surface; needs `--grid`.
    #[arg(long)]
    pub surface: Option<PathBuf>,
    /// Box spec or grid header JSON.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    /// Node CSV with boundary data; `--grid` is then the header.
    #[arg(long)]
    pub values: Option<PathBuf>,
    #[arg(long, default_value_t = 3.0)]
    pub p: f64,
    #[arg(long, default_value_t = 20_000)]
    pub max_iterations: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub surface: SurfaceArg,
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    /// Defaults to the surface dimension.
    #[arg(long)]
    pub p: Option<f64>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct BoundaryArgs {
    #[command(flatten)]
    pub surface: SurfaceArg,
    #[arg(long, default_value = "1,2,3,4")]
    pub levels: String,
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// `all` or a criterion number 1..8.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArg,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Failure(e)
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

type CliResult<T> = std::result::Result<T, CliError>;

pub fn parse_list(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| usage(format!("bad number {t:?}: {e}")))
        })
        .collect()
}

/// Box form `lo:hi:spacing` or a path to a grid header JSON.
pub fn parse_grid(text: &str) -> CliResult<GridSpec> {
    if text.ends_with(".json") {
        let raw = fs::read_to_string(text).map_err(|e| usage(format!("{text}: {e}")))?;
        let spec: GridSpec = serde_json::from_str(&raw).map_err(|e| usage(format!("{text}: {e}")))?;
        return GridSpec::new(spec.dims, spec.spacing, spec.origin).map_err(usage);
    }
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, h] = parts.as_slice() else {
        return Err(usage(format!("grid {text:?} is not lo:hi:spacing")));
    };
    let lo = parse_list(lo)?;
    let hi = parse_list(hi)?;
    let h = h
        .trim()
        .parse::<f64>()
        .map_err(|e| usage(format!("bad spacing {h:?}: {e}")))?;
    if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| a >= b) {
        return Err(usage(format!("grid {text:?} does not describe a box")));
    }
    GridSpec::covering(&lo, &hi, h).map_err(usage)
}

pub fn load_surface(path: &Path) -> CliResult<HeightField> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let desc = SurfaceDescriptor::from_json(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    desc.build().map_err(|e| match e {
        Error::Parameter(_) | Error::Json(_) | Error::Io(_) | Error::Data(_) | Error::Csv(_) => usage(e),
        other => CliError::Failure(other),
    })
}

fn emit<T: Serialize>(manifest: RunManifest, body: T, out: Option<&Path>, name: &str) -> CliResult<String> {
    let mut manifest = manifest;
    if let Some(dir) = out {
        manifest.outputs.push(dir.join(format!("{name}.json")).display().to_string());
    }
    let text = to_json_string(&Envelope { manifest, body })?;
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(Error::from)?;
        fs::write(dir.join(format!("{name}.json")), &text).map_err(Error::from)?;
    }
    Ok(text)
}

fn manifest(command: &str, inputs: Vec<String>, config: serde_json::Value, seed: Option<u64>) -> RunManifest {
    let mut m = RunManifest::new(command);
    m.inputs = inputs;
    m.config = config;
    m.seed = seed;
    m
}

/// Runs a parsed command and returns the text for stdout plus the exit code.
pub fn execute(cli: Cli) -> CliResult<(String, i32)> {
    match cli.command {
        Command::Analyze(a) => analyze(a).map(|s| (s, 0)),
        Command::Scan(a) => scan(a).map(|s| (s, 0)),
        Command::Classify(a) => classify(a).map(|s| (s, 0)),
        Command::Solve(a) => solve(a).map(|s| (s, 0)),
        Command::Probe(a) => probe(a).map(|s| (s, 0)),
        Command::Boundary(a) => boundary(a).map(|s| (s, 0)),
        Command::Verify(a) => verify(a),
    }
}

fn analyze(a: AnalyzeArgs) -> CliResult<String> {
    let field = load_surface(&a.surface.surface)?;
    let x = parse_list(&a.point)?;
    if x.len() != field.dim() {
        return Err(usage(format!("point has {} coordinates, surface has n = {}", x.len(), field.dim())));
    }
    let profile: ToleranceProfile = a.tolerance_profile.parse().map_err(usage)?;
    let step = default_step(&x);
    let point = analyze_point(&field, &x, step * 10.0)?;
    let jet = field.eval_jet(&x)?;
    let forms = fundamental_forms(&jet);
    let spec = shape_spectrum(&jet, &forms)?;
    let ric = ricci_coordinate(&jet, &forms);
    let two_route = max_abs_diff(&ric, &ricci_from_shape(&spec, &forms, jet.dim())) / max_abs(&ric).max(1.0);
    let commutation = commutation_residual(&ric, &forms.g, &spec.shape)?;
    let regime = regime_report(&jet)?;
    let factors = key_factors(&jet)?;
    let flat = if jet.dim() >= 3 { flat_direction_check(&jet).ok() } else { None };
    let jet_residual = match field.kind() {
        SurfaceKind::Catalog(_) => fd_validate_jet(&field, &x, step).ok().map(|r| r.max()),
        SurfaceKind::SampledGrid { .. } => None,
    };
    let fd_ok = [point.residuals.codazzi, point.residuals.gauss]
        .iter()
        .flatten()
        .all(|r| *r <= profile.fd_residual);
    let body = json!({
        "point": point,
        "regime": regime,
        "key_factors": factors,
        "flat_direction": flat,
        "checks": {
            "profile": profile.name,
            "ricci_two_route_deviation": two_route,
            "commutation_residual": commutation,
            "jet_fd_residual": jet_residual,
            "passed": two_route <= profile.ricci_agreement
                && commutation <= profile.ricci_agreement
                && fd_ok
                && jet_residual.is_none_or(|r| r <= profile.jet_residual),
        },
    });
    let m = manifest(
        "analyze",
        vec![a.surface.surface.display().to_string()],
        json!({"point": x, "fd_step": step * 10.0, "tolerance_profile": profile}),
        None,
    );
    emit(m, body, a.out.out.as_deref(), "analyze")
}

fn scan(a: ScanArgs) -> CliResult<String> {
    let field = load_surface(&a.surface.surface)?;
    let spec = parse_grid(&a.grid)?;
    if spec.ndim() != field.dim() {
        return Err(usage("grid and surface dimensions differ"));
    }
    let rows = scan_grid(&field, &spec)?;
    let mut csv = Vec::new();
    write_scan_csv(field.dim(), &rows, &mut csv)?;
    let csv = String::from_utf8(csv).expect("CSV writer emits UTF-8");
    if let Some(dir) = a.out.out.as_deref() {
        let mut m = manifest(
            "scan",
            vec![a.surface.surface.display().to_string()],
            json!({"grid": spec}),
            None,
        );
        m.outputs.push(dir.join("scan.csv").display().to_string());
        emit(m, json!({"rows": rows.len()}), Some(dir), "scan")?;
        fs::write(dir.join("scan.csv"), &csv).map_err(Error::from)?;
    }
    Ok(csv)
}

fn classify(a: ClassifyArgs) -> CliResult<String> {
    let field = load_surface(&a.surface.surface)?;
    let grid = a.grid.as_deref().map(parse_grid).transpose()?;
    let opts = ClassifyOptions {
        samples: a.samples,
        seed: a.seed,
        levels: parse_list(&a.levels)?,
        grid,
    };
    if opts.samples == 0 {
        return Err(usage("--samples must be positive"));
    }
    let analysis = classify_field(&field, &opts)?;
    let verdict = analysis.verdict_json();
    let m = manifest(
        "classify",
        vec![a.surface.surface.display().to_string()],
        json!({"levels": opts.levels, "samples": opts.samples, "grid": opts.grid}),
        Some(a.seed),
    );
    #[derive(Serialize)]
    struct Body {
        #[serde(flatten)]
        verdict: VerdictRecord,
        details: GlobalAnalysis,
    }
    let body = Body {
        verdict,
        details: analysis,
    };
    emit(m, body, a.out.out.as_deref(), "classify")
}

fn solve(a: SolveArgs) -> CliResult<String> {
    let (data, inputs) = match (&a.surface, &a.values) {
        (Some(s), None) => {
            let field = load_surface(s)?;
            let spec = parse_grid(&a.grid)?;
            let hole = |x: &[f64]| field.domain().in_box(x) && field.is_masked(x);
            let values = (0..spec.len())
                .map(|i| {
                    let x = spec.node_point(i);
                    if hole(&x) {
                        Ok(0.0)
                    } else {
                        field.log_height(&x)
                    }
                })
                .collect::<crate::Result<Vec<f64>>>()?;
            let mut g = GridFunction::new(spec, values)?;
            g.excise_where(hole);
            (g, vec![s.display().to_string()])
        }
        (None, Some(v)) => {
            let g = GridFunction::load(Path::new(&a.grid), v).map_err(usage)?;
            (g, vec![a.grid.clone(), v.display().to_string()])
        }
        _ => return Err(usage("solve needs either --surface with a box --grid, or --grid header with --values")),
    };
    let mut config = SolverConfig::new(a.p);
    config.max_iterations = a.max_iterations;
    config.validate().map_err(usage)?;
    let out = solve_p_harmonic(&data, &config)?;
    let mut m = manifest("solve", inputs, json!({"solver": config, "grid": data.spec()}), None);
    if let Some(dir) = a.out.out.as_deref() {
        fs::create_dir_all(dir).map_err(Error::from)?;
        out.solution.save(&dir.join("solution.json"), &dir.join("solution.csv"))?;
        out.write_trace_csv(fs::File::create(dir.join("trace.csv")).map_err(Error::from)?)?;
        for f in ["solution.json", "solution.csv", "trace.csv"] {
            m.outputs.push(dir.join(f).display().to_string());
        }
    }
    let body = json!({
        "converged": out.converged,
        "stop": out.stop,
        "iterations": out.iterations,
        "residual": out.residual,
        "initial_energy": out.trace.first().map(|r| r.energy),
        "final_energy": out.trace.last().map(|r| r.energy),
        "monotone": out.trace_is_monotone(),
        "excised_nodes": data.excised_count(),
    });
    let text = emit(m, body, a.out.out.as_deref(), "solve")?;
    if !out.converged {
        return Err(CliError::Failure(Error::Numeric(format!(
            "no convergence after {} iterations\n{text}",
            out.iterations
        ))));
    }
    Ok(text)
}

fn probe(a: ProbeArgs) -> CliResult<String> {
    let field = load_surface(&a.surface.surface)?;
    let spec = parse_grid(&a.grid)?;
    let config = SolverConfig::new(a.p.unwrap_or(field.dim() as f64));
    let upper = spec.upper();
    let report = viscosity_probe(&field, &spec.origin, &upper, spec.spacing, &config).map_err(|e| match e {
        Error::Parameter(_) => usage(e),
        other => CliError::Failure(other),
    })?;
    let m = manifest(
        "probe",
        vec![a.surface.surface.display().to_string()],
        json!({"box": {"lower": spec.origin, "upper": upper, "spacing": spec.spacing}, "solver": config}),
        None,
    );
    emit(m, report, a.out.out.as_deref(), "probe")
}

fn boundary(a: BoundaryArgs) -> CliResult<String> {
    let field = load_surface(&a.surface.surface)?;
    let levels = parse_list(&a.levels)?;
    let grid = a.grid.as_deref().map(parse_grid).transpose()?;
    let report = recession_report(&field, &levels, grid.as_ref()).map_err(|e| match e {
        Error::Parameter(_) => usage(e),
        other => CliError::Failure(other),
    })?;
    let mut config = json!({"levels": levels, "grid": grid});
    if matches!(field.kind(), SurfaceKind::SampledGrid { .. }) {
        config["assumption"] = json!("domain convexity of a sampled field is not checked");
    }
    let m = manifest("boundary", vec![a.surface.surface.display().to_string()], config, None);
    emit(m, report, a.out.out.as_deref(), "boundary")
}

fn verify(a: VerifyArgs) -> CliResult<(String, i32)> {
    let suite: Suite = a.suite.parse().map_err(usage)?;
    let outcomes = run_suite(suite, a.seed);
    let passed = outcomes.iter().all(|o| o.passed);
    let mut text: String = outcomes.iter().map(|o| format!("{o}\n")).collect();
    if let Some(dir) = a.out.out.as_deref() {
        let m = manifest("verify", Vec::new(), json!({"suite": a.suite}), Some(a.seed));
        emit(m, json!({"passed": passed, "criteria": outcomes}), Some(dir), "verify")?;
    }
    text.push_str(if passed { "all criteria passed\n" } else { "some criteria failed\n" });
    Ok((text, if passed { 0 } else { 1 }))
}

/// Entry point used by the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok((text, code)) => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            // A closed pipe (e.g. `| head`) is not an error of the run.
            let _ = stdout.write_all(text.as_bytes());
            if !text.ends_with('\n') {
                let _ = stdout.write_all(b"\n");
            }
            code
        }
        Err(e) => {
            match &e {
                CliError::Usage(msg) => eprintln!("usage error: {msg}"),
                CliError::Failure(err) => eprintln!("error: {err}"),
            }
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_box_parsing() {
        let g = parse_grid("-1,-1:1,1:0.5").unwrap();
        assert_eq!(g.dims, vec![5, 5]);
        assert!(matches!(parse_grid("0,0:1:0.1"), Err(CliError::Usage(_))));
        assert!(matches!(parse_grid("1,1:0,0:0.1"), Err(CliError::Usage(_))));
    }

    #[test]
    fn list_parsing() {
        assert_eq!(parse_list("1, 2.5,-3").unwrap(), vec![1.0, 2.5, -3.0]);
        assert!(parse_list("1,x").is_err());
    }
}
