//! Command-line front end for the dephasing library: curve emission, figure
//! data reproduction, oracle cross-validation, literature comparison, and
//! regime classification, with deterministic CSV/JSON output.
//!
//! Exit codes: 0 success, 1 tolerance violation, 2 bad input, 3 I/O failure.
//! Option precedence: flags > config file (`key = value` lines, `#` comments)
//! > built-in defaults; the output directory additionally honors the
//! `ACSTARK_OUT_DIR` environment variable below flags and config.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use acstark::{
    classify_regime, cross_validate_with, extract_dephasing_rate, gamma_ac, gamma_markovian,
    lindblad_evolve, naive_ac_rate, sample_closed_form, sample_closed_form_ac, sample_physical,
    sample_reference_exponential, vacchini_rho_ee, vacchini_weak_limit, AcStarkError, CurveMeta,
    DecoherenceCurve, DimensionlessParams, GridScale, GridSpec, OracleOptions, OracleReport,
    PhysicalParams, ThreeLevelState, TimeUnit, VacchiniParams,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");
const OUT_DIR_ENV: &str = "ACSTARK_OUT_DIR";

// ---------------------------------------------------------------------------
// Errors and exit codes
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum CliError {
    /// Invalid parameters, malformed config, unknown keys → exit 2.
    BadInput(String),
    /// A numerical route failed to meet its tolerance → exit 1.
    Tolerance(String),
    /// Filesystem failure → exit 3.
    Io(String),
}

impl CliError {
    fn message(&self) -> &str {
        match self {
            CliError::BadInput(m) | CliError::Tolerance(m) | CliError::Io(m) => m,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Tolerance(_) => 1,
            CliError::BadInput(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

fn is_bad_input(e: &AcStarkError) -> bool {
    match e {
        AcStarkError::InvalidParameter(_) | AcStarkError::Domain(_) => true,
        AcStarkError::OracleMethod { source, .. } => is_bad_input(source),
        _ => false,
    }
}

impl From<AcStarkError> for CliError {
    fn from(e: AcStarkError) -> Self {
        if is_bad_input(&e) {
            CliError::BadInput(e.to_string())
        } else {
            CliError::Tolerance(e.to_string())
        }
    }
}

fn io_err(context: &str, e: std::io::Error) -> CliError {
    CliError::Io(format!("{context}: {e}"))
}

// ---------------------------------------------------------------------------
// Config file: `key = value` lines, `#` comments, unknown keys are errors
// ---------------------------------------------------------------------------

#[derive(Default)]
struct ConfigReader {
    entries: HashMap<String, String>,
}

impl ConfigReader {
    fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| io_err(&format!("cannot read config {}", path.display()), e))?;
        let mut entries = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::BadInput(format!(
                    "{}:{}: expected `key = value`, got `{line}`",
                    path.display(),
                    idx + 1
                )));
            };
            let (key, value) = (k.trim().to_string(), v.trim().to_string());
            if key.is_empty() || value.is_empty() {
                return Err(CliError::BadInput(format!(
                    "{}:{}: empty key or value",
                    path.display(),
                    idx + 1
                )));
            }
            if entries.insert(key.clone(), value).is_some() {
                return Err(CliError::BadInput(format!(
                    "{}:{}: duplicate config key `{key}`",
                    path.display(),
                    idx + 1
                )));
            }
        }
        Ok(ConfigReader { entries })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    fn take_f64(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        self.take(key)
            .map(|v| {
                v.parse::<f64>().map_err(|_| {
                    CliError::BadInput(format!("config key `{key}`: `{v}` is not a number"))
                })
            })
            .transpose()
    }

    fn take_usize(&mut self, key: &str) -> Result<Option<usize>, CliError> {
        self.take(key)
            .map(|v| {
                v.parse::<usize>().map_err(|_| {
                    CliError::BadInput(format!("config key `{key}`: `{v}` is not a count"))
                })
            })
            .transpose()
    }

    fn take_u64(&mut self, key: &str) -> Result<Option<u64>, CliError> {
        self.take(key)
            .map(|v| {
                v.parse::<u64>().map_err(|_| {
                    CliError::BadInput(format!("config key `{key}`: `{v}` is not an integer"))
                })
            })
            .transpose()
    }

    fn take_bool(&mut self, key: &str) -> Result<Option<bool>, CliError> {
        self.take(key)
            .map(|v| match v.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(CliError::BadInput(format!(
                    "config key `{key}`: `{v}` is not true/false"
                ))),
            })
            .transpose()
    }

    fn take_f64_list(&mut self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.take(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim().parse::<f64>().map_err(|_| {
                            CliError::BadInput(format!(
                                "config key `{key}`: `{s}` is not a number"
                            ))
                        })
                    })
                    .collect::<Result<Vec<f64>, CliError>>()
            })
            .transpose()
    }

    /// Errors out when any key was never consumed: unknown keys are errors.
    fn finish(&mut self) -> Result<(), CliError> {
        if self.entries.is_empty() {
            return Ok(());
        }
        let mut keys: Vec<String> = self.entries.keys().cloned().collect();
        keys.sort();
        Err(CliError::BadInput(format!(
            "unknown config key(s): {}",
            keys.join(", ")
        )))
    }
}

fn pick_f64(
    flag: Option<f64>,
    cfg: &mut ConfigReader,
    key: &str,
) -> Result<Option<f64>, CliError> {
    let from_cfg = cfg.take_f64(key)?;
    Ok(flag.or(from_cfg))
}

fn pick_usize(
    flag: Option<usize>,
    cfg: &mut ConfigReader,
    key: &str,
) -> Result<Option<usize>, CliError> {
    let from_cfg = cfg.take_usize(key)?;
    Ok(flag.or(from_cfg))
}

fn pick_u64(
    flag: Option<u64>,
    cfg: &mut ConfigReader,
    key: &str,
) -> Result<Option<u64>, CliError> {
    let from_cfg = cfg.take_u64(key)?;
    Ok(flag.or(from_cfg))
}

fn pick_string(
    flag: Option<String>,
    cfg: &mut ConfigReader,
    key: &str,
) -> Result<Option<String>, CliError> {
    let from_cfg = cfg.take(key);
    Ok(flag.or(from_cfg))
}

fn pick_list(
    flag: Option<Vec<f64>>,
    cfg: &mut ConfigReader,
    key: &str,
) -> Result<Option<Vec<f64>>, CliError> {
    let from_cfg = cfg.take_f64_list(key)?;
    Ok(flag.or(from_cfg))
}

fn pick_bool(flag: bool, cfg: &mut ConfigReader, key: &str) -> Result<bool, CliError> {
    let from_cfg = cfg.take_bool(key)?;
    Ok(flag || from_cfg.unwrap_or(false))
}

// ---------------------------------------------------------------------------
// Output plumbing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum OutputFormat {
    /// CSV data file plus a JSON sidecar with provenance.
    Csv,
    /// Single JSON file carrying both provenance and rows.
    Json,
}

struct OutputCtx {
    dir: PathBuf,
    format: OutputFormat,
}

/// 17 significant digits: lossless f64 round trip.
fn fmt_g(x: f64) -> String {
    format!("{x:.16e}")
}

/// File-name token for a numeric parameter value.
fn num_token(x: f64) -> String {
    format!("{x}").replace('.', "p").replace('-', "m")
}

#[derive(Serialize)]
struct TableDoc<'a, P: Serialize> {
    command: &'a str,
    version: &'a str,
    params: P,
    columns: &'a [&'a str],
    #[serde(skip_serializing_if = "Option::is_none")]
    data_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rows: Option<&'a Vec<Vec<f64>>>,
}

fn write_json<T: Serialize>(path: &Path, doc: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(doc)
        .map_err(|e| CliError::Io(format!("serialization failed: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(&format!("cannot write {}", path.display()), e))
}

/// Writes one numeric table in the selected format and returns the data file
/// name (CSV mode also writes the JSON sidecar next to it).
fn emit_table<P: Serialize>(
    ctx: &OutputCtx,
    stem: &str,
    command: &str,
    params: P,
    columns: &[&str],
    rows: &Vec<Vec<f64>>,
) -> Result<String, CliError> {
    fs::create_dir_all(&ctx.dir)
        .map_err(|e| io_err(&format!("cannot create {}", ctx.dir.display()), e))?;
    match ctx.format {
        OutputFormat::Csv => {
            let csv_name = format!("{stem}.csv");
            let csv_path = ctx.dir.join(&csv_name);
            let mut text = String::with_capacity(rows.len() * columns.len() * 26);
            text.push_str(&columns.join(","));
            text.push('\n');
            for row in rows {
                let cells: Vec<String> = row.iter().map(|&x| fmt_g(x)).collect();
                text.push_str(&cells.join(","));
                text.push('\n');
            }
            fs::write(&csv_path, text)
                .map_err(|e| io_err(&format!("cannot write {}", csv_path.display()), e))?;
            let doc = TableDoc {
                command,
                version: VERSION,
                params,
                columns,
                data_file: Some(csv_name.clone()),
                rows: None,
            };
            write_json(&ctx.dir.join(format!("{stem}.json")), &doc)?;
            println!("wrote {}", csv_path.display());
            Ok(csv_name)
        }
        OutputFormat::Json => {
            let name = format!("{stem}.json");
            let path = ctx.dir.join(&name);
            let doc = TableDoc {
                command,
                version: VERSION,
                params,
                columns,
                data_file: None,
                rows: Some(rows),
            };
            write_json(&path, &doc)?;
            println!("wrote {}", path.display());
            Ok(name)
        }
    }
}

// ---------------------------------------------------------------------------
// Command line definition
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(name = "acstark", version, about = "Non-Markovian ac Stark dephasing curves, oracles, and comparisons")]
struct Cli {
    /// Config file with `key = value` lines; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides config and ACSTARK_OUT_DIR)
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Data file format
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample the closed-form decoherence curve on a time grid
    Curve(CurveArgs),
    /// Emit the four-panel reference data sets (one file per Q per panel)
    Figure(FigureArgs),
    /// Cross-validate closed form, quadrature, discrete bath, and Fock routes
    Oracle(OracleArgs),
    /// Exact non-Markovian decay vs weak-coupling limit and naive rate table
    Compare(CompareArgs),
    /// Classify (Q, R) into a dynamical regime
    Classify(ClassifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScaleArg {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RescaleArg {
    /// τ = Γ_M t units
    Markovian,
    /// τ' = Γ_ac t units
    Ac,
}

#[derive(Args)]
struct CurveArgs {
    /// Quality factor Q = ω₀/λ (dimensionless route)
    #[arg(long)]
    q: Option<f64>,
    /// Linewidth-to-rate ratio R = λ/Γ_M (dimensionless route)
    #[arg(long)]
    r: Option<f64>,
    /// Spontaneous decay rate Γ_s [rad/s] (physical route)
    #[arg(long)]
    gamma_s: Option<f64>,
    /// Rabi frequency Ω [rad/s] (physical route)
    #[arg(long)]
    omega: Option<f64>,
    /// Detuning Δ [rad/s] (physical route)
    #[arg(long)]
    delta: Option<f64>,
    /// Laser center frequency ω₀ [rad/s] (physical route)
    #[arg(long)]
    omega0: Option<f64>,
    /// Laser linewidth λ (Lorentzian HWHM) [rad/s] (physical route)
    #[arg(long)]
    lambda: Option<f64>,
    /// Peak photon-number intensity |α₀|² (physical route)
    #[arg(long)]
    alpha0_sq: Option<f64>,
    /// Grid start (τ, τ', or seconds depending on route and rescale)
    #[arg(long)]
    tau_min: Option<f64>,
    /// Grid end
    #[arg(long)]
    tau_max: Option<f64>,
    /// Number of grid points
    #[arg(long)]
    n_points: Option<usize>,
    /// Grid spacing
    #[arg(long, value_enum)]
    scale: Option<ScaleArg>,
    /// Time axis of the dimensionless route
    #[arg(long, value_enum)]
    rescale: Option<RescaleArg>,
    /// Output file stem
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct FigureArgs {
    /// Panel to emit (a, b, c, or d); omit for all four
    #[arg(long)]
    panel: Option<String>,
    /// Override the panel's Q family (comma-separated)
    #[arg(long, value_delimiter = ',')]
    q_set: Option<Vec<f64>>,
    /// Override the panel's fixed R
    #[arg(long)]
    r: Option<f64>,
    /// Grid end in the panel's time unit
    #[arg(long)]
    tau_max: Option<f64>,
    /// Points per curve
    #[arg(long)]
    n_points: Option<usize>,
}

#[derive(Args)]
struct OracleArgs {
    /// Q values of the validation grid (comma-separated)
    #[arg(long, value_delimiter = ',')]
    q_set: Option<Vec<f64>>,
    /// R values of the validation grid (comma-separated)
    #[arg(long, value_delimiter = ',')]
    r_set: Option<Vec<f64>>,
    /// Explicit τ sample points (comma-separated; overrides the τ grid flags)
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    /// τ grid start
    #[arg(long)]
    tau_min: Option<f64>,
    /// τ grid end
    #[arg(long)]
    tau_max: Option<f64>,
    /// τ grid points
    #[arg(long)]
    n_points: Option<usize>,
    /// Discrete-bath mode count (default: alias-free automatic choice)
    #[arg(long)]
    n_modes: Option<usize>,
    /// Bath sampling window half-width in linewidths
    #[arg(long)]
    cutoff_widths: Option<f64>,
    /// Quadrature relative tolerance
    #[arg(long)]
    quad_tol: Option<f64>,
    /// Per-mode Fock truncation
    #[arg(long)]
    fock_truncation: Option<usize>,
    /// Append this many randomized (Q, R) pairs to the grid
    #[arg(long)]
    randomize: Option<usize>,
    /// RNG seed for --randomize
    #[arg(long)]
    seed: Option<u64>,
    /// Output file stem
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct CompareArgs {
    /// Laser linewidth λ [rad/s]
    #[arg(long)]
    lambda: Option<f64>,
    /// Excited-state decay rates Γ_s to compare (comma-separated)
    #[arg(long, value_delimiter = ',')]
    gamma_s_set: Option<Vec<f64>>,
    /// Rabi frequency Ω for the rate table
    #[arg(long)]
    omega: Option<f64>,
    /// Detuning Δ for the rate table
    #[arg(long)]
    delta: Option<f64>,
    /// Laser center frequency ω₀ for the rate table
    #[arg(long)]
    omega0: Option<f64>,
    /// Curve end in λt units
    #[arg(long)]
    t_max: Option<f64>,
    /// Points per curve
    #[arg(long)]
    n_points: Option<usize>,
    /// Also run the three-level master equation and fit the dephasing rate
    #[arg(long)]
    with_lindblad: bool,
    /// Output file stem
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Quality factor Q = ω₀/λ
    #[arg(long)]
    q: Option<f64>,
    /// Linewidth-to-rate ratio R = λ/Γ_M
    #[arg(long)]
    r: Option<f64>,
}

// ---------------------------------------------------------------------------
// curve
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CurveSidecar {
    q: Option<f64>,
    r: Option<f64>,
    gamma_s: Option<f64>,
    omega_rabi: Option<f64>,
    detuning: Option<f64>,
    omega0: Option<f64>,
    lambda_lw: Option<f64>,
    alpha0_sq: Option<f64>,
    grid: GridSpec,
    meta: CurveMeta,
}

fn time_column(unit: TimeUnit) -> &'static str {
    match unit {
        TimeUnit::MarkovianTau => "tau",
        TimeUnit::AcTauPrime => "tau_prime",
        TimeUnit::Seconds => "t",
    }
}

fn curve_rows(curve: &DecoherenceCurve) -> Vec<Vec<f64>> {
    curve
        .times
        .iter()
        .zip(curve.gamma.iter())
        .zip(curve.coherence.iter())
        .map(|((&t, &g), &c)| vec![t, g, c])
        .collect()
}

fn cmd_curve(args: CurveArgs, cfg: &mut ConfigReader, ctx: &OutputCtx) -> Result<ExitCode, CliError> {
    let q = pick_f64(args.q, cfg, "q")?;
    let r = pick_f64(args.r, cfg, "r")?;
    let gamma_s = pick_f64(args.gamma_s, cfg, "gamma_s")?;
    let omega = pick_f64(args.omega, cfg, "omega")?;
    let delta = pick_f64(args.delta, cfg, "delta")?;
    let omega0 = pick_f64(args.omega0, cfg, "omega0")?;
    let lambda = pick_f64(args.lambda, cfg, "lambda")?;
    let alpha0_sq = pick_f64(args.alpha0_sq, cfg, "alpha0_sq")?;
    let tau_min = pick_f64(args.tau_min, cfg, "tau_min")?.unwrap_or(0.0);
    let tau_max = pick_f64(args.tau_max, cfg, "tau_max")?.unwrap_or(5.0);
    let n_points = pick_usize(args.n_points, cfg, "n_points")?.unwrap_or(201);
    let scale = match args.scale {
        Some(s) => Some(s),
        None => cfg
            .take("scale")
            .map(|v| match v.as_str() {
                "linear" => Ok(ScaleArg::Linear),
                "log" => Ok(ScaleArg::Log),
                _ => Err(CliError::BadInput(format!(
                    "config key `scale`: `{v}` is not linear/log"
                ))),
            })
            .transpose()?,
    }
    .unwrap_or(ScaleArg::Linear);
    let rescale = match args.rescale {
        Some(s) => Some(s),
        None => cfg
            .take("rescale")
            .map(|v| match v.as_str() {
                "markovian" => Ok(RescaleArg::Markovian),
                "ac" => Ok(RescaleArg::Ac),
                _ => Err(CliError::BadInput(format!(
                    "config key `rescale`: `{v}` is not markovian/ac"
                ))),
            })
            .transpose()?,
    };
    let out = pick_string(args.out, cfg, "out")?.unwrap_or_else(|| "curve".to_string());
    cfg.finish()?;

    let physical_given = [gamma_s, omega, delta, omega0, lambda]
        .iter()
        .any(Option::is_some);
    let dimensionless_given = q.is_some() || r.is_some();
    if physical_given && dimensionless_given {
        return Err(CliError::BadInput(
            "give either (q, r) or the physical parameter set, not both".into(),
        ));
    }

    let grid_scale = match scale {
        ScaleArg::Linear => GridScale::Linear,
        ScaleArg::Log => GridScale::Log,
    };
    let grid = GridSpec::new(tau_min, tau_max, n_points, grid_scale)?;

    let (curve, sidecar) = if physical_given {
        if rescale == Some(RescaleArg::Ac) {
            return Err(CliError::BadInput(
                "--rescale ac applies to the dimensionless route only".into(),
            ));
        }
        let (Some(gs), Some(om), Some(de), Some(w0), Some(lw)) =
            (gamma_s, omega, delta, omega0, lambda)
        else {
            return Err(CliError::BadInput(
                "physical route needs gamma_s, omega, delta, omega0, and lambda".into(),
            ));
        };
        let p = PhysicalParams::new(gs, om, de, w0, lw, alpha0_sq.unwrap_or(1.0))?;
        let curve = sample_physical(&p, &grid);
        let sidecar = CurveSidecar {
            q: None,
            r: None,
            gamma_s: Some(p.gamma_s),
            omega_rabi: Some(p.omega_rabi),
            detuning: Some(p.detuning),
            omega0: Some(p.omega0),
            lambda_lw: Some(p.lambda_lw),
            alpha0_sq: Some(p.alpha0_sq),
            grid,
            meta: curve.meta.clone(),
        };
        (curve, sidecar)
    } else {
        let (Some(qv), Some(rv)) = (q, r) else {
            return Err(CliError::BadInput(
                "dimensionless route needs both q and r".into(),
            ));
        };
        let d = DimensionlessParams::new(qv, rv)?;
        let curve = match rescale.unwrap_or(RescaleArg::Markovian) {
            RescaleArg::Markovian => sample_closed_form(&d, &grid),
            RescaleArg::Ac => sample_closed_form_ac(&d, &grid)?,
        };
        let sidecar = CurveSidecar {
            q: Some(qv),
            r: Some(rv),
            gamma_s: None,
            omega_rabi: None,
            detuning: None,
            omega0: None,
            lambda_lw: None,
            alpha0_sq: None,
            grid,
            meta: curve.meta.clone(),
        };
        (curve, sidecar)
    };

    let columns = [time_column(curve.meta.time_unit), "gamma", "coherence"];
    emit_table(ctx, &out, "curve", sidecar, &columns, &curve_rows(&curve))?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// figure
// ---------------------------------------------------------------------------

struct PanelSpec {
    name: &'static str,
    r: f64,
    q_set: &'static [f64],
    unit: TimeUnit,
}

/// Default panel families. R values follow the reference presentation; the Q
/// families are this artifact's choices and are overridable via --q-set.
const PANELS: [PanelSpec; 4] = [
    PanelSpec {
        name: "a",
        r: 100.0,
        q_set: &[0.0, 1.0, 3.0, 10.0],
        unit: TimeUnit::MarkovianTau,
    },
    PanelSpec {
        name: "b",
        r: 0.01,
        q_set: &[0.0, 1.0, 3.0, 10.0],
        unit: TimeUnit::MarkovianTau,
    },
    PanelSpec {
        name: "c",
        r: 0.01,
        q_set: &[10.0, 30.0, 100.0],
        unit: TimeUnit::AcTauPrime,
    },
    PanelSpec {
        name: "d",
        r: 1e-5,
        q_set: &[100.0, 1000.0],
        unit: TimeUnit::AcTauPrime,
    },
];

#[derive(Serialize)]
struct FigureSidecar {
    panel: &'static str,
    q: f64,
    r: f64,
    time_unit: TimeUnit,
    grid: GridSpec,
    reference: &'static str,
}

fn cmd_figure(
    args: FigureArgs,
    cfg: &mut ConfigReader,
    ctx: &OutputCtx,
) -> Result<ExitCode, CliError> {
    let panel = pick_string(args.panel, cfg, "panel")?;
    let q_set = pick_list(args.q_set, cfg, "q_set")?;
    let r_override = pick_f64(args.r, cfg, "r")?;
    let tau_max = pick_f64(args.tau_max, cfg, "tau_max")?.unwrap_or(5.0);
    let n_points = pick_usize(args.n_points, cfg, "n_points")?.unwrap_or(401);
    cfg.finish()?;

    let selected: Vec<&PanelSpec> = match panel.as_deref() {
        None => PANELS.iter().collect(),
        Some(name) => {
            let Some(p) = PANELS.iter().find(|p| p.name == name) else {
                return Err(CliError::BadInput(format!(
                    "unknown panel `{name}` (expected a, b, c, or d)"
                )));
            };
            vec![p]
        }
    };

    let grid = GridSpec::new(0.0, tau_max, n_points, GridScale::Linear)?;
    for panel in selected {
        let r = r_override.unwrap_or(panel.r);
        let qs: &[f64] = q_set.as_deref().unwrap_or(panel.q_set);
        let reference = sample_reference_exponential(&grid, panel.unit);
        for &q in qs {
            let d = DimensionlessParams::new(q, r)?;
            let curve = match panel.unit {
                TimeUnit::MarkovianTau => sample_closed_form(&d, &grid),
                TimeUnit::AcTauPrime => sample_closed_form_ac(&d, &grid)?,
                TimeUnit::Seconds => unreachable!("panels use dimensionless units"),
            };
            let rows: Vec<Vec<f64>> = curve
                .times
                .iter()
                .zip(curve.gamma.iter())
                .zip(curve.coherence.iter())
                .zip(reference.coherence.iter())
                .map(|(((&t, &g), &c), &refc)| vec![t, g, c, refc])
                .collect();
            let columns = [time_column(panel.unit), "gamma", "coherence", "reference"];
            let sidecar = FigureSidecar {
                panel: panel.name,
                q,
                r,
                time_unit: panel.unit,
                grid,
                reference: "exp(-t) in the panel's time unit",
            };
            let stem = format!("figure_{}_q{}", panel.name, num_token(q));
            emit_table(ctx, &stem, "figure", sidecar, &columns, &rows)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct OracleComboDoc {
    q: f64,
    r: f64,
    all_within_tolerance: bool,
    report: OracleReport,
}

#[derive(Serialize)]
struct OracleDoc<'a> {
    command: &'a str,
    version: &'a str,
    /// The (Q, R) grid is embedded at Γ_M = 1, so t ≡ τ.
    gamma_m: f64,
    times: &'a [f64],
    options: &'a OracleOptions,
    n_randomized: usize,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    data_file: Option<String>,
    combos: Vec<OracleComboDoc>,
}

/// Unit-rate embedding of (Q, R): Γ_M = 1 so the physical t axis is τ.
fn params_from_qr(q: f64, r: f64) -> Result<PhysicalParams, CliError> {
    Ok(PhysicalParams::new(1.0, 1.0, 1.0, q * r, r, 1.0)?)
}

fn cmd_oracle(
    args: OracleArgs,
    cfg: &mut ConfigReader,
    ctx: &OutputCtx,
) -> Result<ExitCode, CliError> {
    let q_set =
        pick_list(args.q_set, cfg, "q_set")?.unwrap_or_else(|| vec![0.001, 1.0, 10.0, 100.0]);
    let r_set = pick_list(args.r_set, cfg, "r_set")?.unwrap_or_else(|| vec![1e-5, 0.01, 100.0]);
    let times_flag = pick_list(args.times, cfg, "times")?;
    let tau_min = pick_f64(args.tau_min, cfg, "tau_min")?.unwrap_or(0.1);
    let tau_max = pick_f64(args.tau_max, cfg, "tau_max")?.unwrap_or(5.0);
    let n_points = pick_usize(args.n_points, cfg, "n_points")?.unwrap_or(9);
    let n_modes = pick_usize(args.n_modes, cfg, "n_modes")?;
    let cutoff_widths = pick_f64(args.cutoff_widths, cfg, "cutoff_widths")?;
    let quad_tol = pick_f64(args.quad_tol, cfg, "quad_tol")?;
    let fock_truncation = pick_usize(args.fock_truncation, cfg, "fock_truncation")?;
    let n_randomized = pick_usize(args.randomize, cfg, "randomize")?.unwrap_or(0);
    let seed = pick_u64(args.seed, cfg, "seed")?.unwrap_or(0);
    let out = pick_string(args.out, cfg, "out")?.unwrap_or_else(|| "oracle".to_string());
    cfg.finish()?;

    let times = match times_flag {
        Some(ts) => ts,
        None => GridSpec::new(tau_min, tau_max, n_points, GridScale::Linear)?.build(),
    };

    let mut opts = OracleOptions::default();
    opts.n_modes = n_modes;
    if let Some(c) = cutoff_widths {
        opts.cutoff_widths = c;
    }
    if let Some(t) = quad_tol {
        opts.quad_tol = t;
    }
    if let Some(f) = fock_truncation {
        opts.fock_truncation = f;
    }

    let mut combos: Vec<(f64, f64)> = Vec::new();
    for &q in &q_set {
        for &r in &r_set {
            combos.push((q, r));
        }
    }
    if n_randomized > 0 {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..n_randomized {
            let q = rng.gen_range((1e-3f64).ln()..(1e2f64).ln()).exp();
            let r = rng.gen_range((1e-4f64).ln()..(1e2f64).ln()).exp();
            combos.push((q, r));
        }
    }

    let mut docs = Vec::with_capacity(combos.len());
    let mut n_violations = 0usize;
    for &(q, r) in &combos {
        let p = params_from_qr(q, r)?;
        let report = cross_validate_with(&p, &times, &opts)?;
        let ok = report.all_within_tolerance();
        if ok {
            println!("q = {q}  r = {r}  OK");
        } else {
            n_violations += 1;
            println!("q = {q}  r = {r}  VIOLATION");
            for pair in report.pairwise.iter().filter(|p| p.within_tolerance == Some(false)) {
                println!(
                    "  {} vs {}: max_rel = {}  (tolerance {})",
                    pair.a,
                    pair.b,
                    pair.max_rel,
                    pair.tolerance.unwrap_or(f64::NAN)
                );
            }
        }
        docs.push(OracleComboDoc {
            q,
            r,
            all_within_tolerance: ok,
            report,
        });
    }

    fs::create_dir_all(&ctx.dir)
        .map_err(|e| io_err(&format!("cannot create {}", ctx.dir.display()), e))?;
    let data_file = if ctx.format == OutputFormat::Csv {
        let csv_name = format!("{out}.csv");
        let csv_path = ctx.dir.join(&csv_name);
        let mut text = String::new();
        text.push_str("q,r,route_a,route_b,metric,max_abs,max_rel,tolerance,within_tolerance\n");
        for doc in &docs {
            for pair in &doc.report.pairwise {
                let metric = serde_json::to_value(pair.metric)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default();
                text.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    fmt_g(doc.q),
                    fmt_g(doc.r),
                    pair.a,
                    pair.b,
                    metric,
                    fmt_g(pair.max_abs),
                    fmt_g(pair.max_rel),
                    pair.tolerance.map(fmt_g).unwrap_or_default(),
                    pair.within_tolerance
                        .map(|b| b.to_string())
                        .unwrap_or_default(),
                ));
            }
        }
        fs::write(&csv_path, text)
            .map_err(|e| io_err(&format!("cannot write {}", csv_path.display()), e))?;
        println!("wrote {}", csv_path.display());
        Some(csv_name)
    } else {
        None
    };

    let doc = OracleDoc {
        command: "oracle",
        version: VERSION,
        gamma_m: 1.0,
        times: &times,
        options: &opts,
        n_randomized,
        seed,
        data_file,
        combos: docs,
    };
    let json_path = ctx.dir.join(format!("{out}.json"));
    write_json(&json_path, &doc)?;
    println!("wrote {}", json_path.display());

    if n_violations > 0 {
        eprintln!(
            "tolerance violation in {n_violations} of {} parameter sets",
            combos.len()
        );
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct VacchiniSidecar {
    lambda_lw: f64,
    gamma_s: f64,
    rho_ee0: f64,
    omega_nm: f64,
    regime_warning: bool,
    grid: GridSpec,
}

#[derive(Serialize)]
struct CompareEntry {
    gamma_s: f64,
    omega_nm: f64,
    regime_warning: bool,
    data_file: String,
}

#[derive(Serialize)]
struct RateRow {
    gamma_s: f64,
    gamma_m: f64,
    q: f64,
    naive_rate: f64,
    gamma_ac: f64,
    naive_over_ac: f64,
}

#[derive(Serialize)]
struct ExponentFit {
    omega: f64,
    delta: f64,
    gamma_s: f64,
}

#[derive(Serialize)]
struct LindbladBlock {
    omega_rabi: f64,
    detuning: f64,
    gamma_s: f64,
    fitted_rate: f64,
    gamma_m: f64,
    rate_over_gamma_m: f64,
    residual_flag: bool,
    /// Fitted power-law exponents of the rate in Ω, Δ, Γ_s (expected 2, −2, 1).
    exponents: ExponentFit,
}

#[derive(Serialize)]
struct CompareDoc<'a> {
    command: &'a str,
    version: &'a str,
    lambda_lw: f64,
    omega_rabi: f64,
    detuning: f64,
    omega0: f64,
    t_max_lambda_units: f64,
    n_points: usize,
    entries: Vec<CompareEntry>,
    rate_table: Vec<RateRow>,
    rate_table_file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    lindblad: Option<LindbladBlock>,
}

/// Evolves the driven three-level system and fits the ground-coherence decay
/// rate, windowing past the adiabatic transient to ≥2 decades of decay.
fn lindblad_fitted_rate(omega: f64, delta: f64, gamma_s: f64) -> Result<(f64, bool), CliError> {
    let gamma_m = gamma_s * omega * omega / (delta * delta);
    let rate_pred = 0.25 * gamma_m;
    let t_end = 10.0 / delta.abs() + 2.4 * (10f64).ln() / rate_pred;
    let grid: Vec<f64> = (0..=80).map(|i| t_end * i as f64 / 80.0).collect();
    let traj = lindblad_evolve(
        &ThreeLevelState::ground_superposition(),
        omega,
        delta,
        gamma_s,
        &grid,
    )?;
    let fit = extract_dephasing_rate(&traj)?;
    Ok((fit.rate, fit.residual_flag))
}

fn cmd_compare(
    args: CompareArgs,
    cfg: &mut ConfigReader,
    ctx: &OutputCtx,
) -> Result<ExitCode, CliError> {
    let lambda = pick_f64(args.lambda, cfg, "lambda")?.unwrap_or(1.0);
    let gamma_s_set = pick_list(args.gamma_s_set, cfg, "gamma_s_set")?
        .unwrap_or_else(|| vec![0.0, 0.001, 1.0, 1000.0]);
    let omega = pick_f64(args.omega, cfg, "omega")?.unwrap_or(0.1);
    let delta = pick_f64(args.delta, cfg, "delta")?.unwrap_or(10.0);
    let omega0 = pick_f64(args.omega0, cfg, "omega0")?.unwrap_or(100.0);
    let t_max = pick_f64(args.t_max, cfg, "t_max")?.unwrap_or(5.0);
    let n_points = pick_usize(args.n_points, cfg, "n_points")?.unwrap_or(201);
    let with_lindblad = pick_bool(args.with_lindblad, cfg, "with_lindblad")?;
    let out = pick_string(args.out, cfg, "out")?.unwrap_or_else(|| "compare".to_string());
    cfg.finish()?;

    let grid = GridSpec::new(0.0, t_max, n_points, GridScale::Linear)?;
    let lts = grid.build();

    let mut entries = Vec::new();
    for &gs in &gamma_s_set {
        let v = VacchiniParams::new(lambda, gs)?;
        let mut rows = Vec::with_capacity(lts.len());
        let mut warning = false;
        for &lt in &lts {
            let t = lt / lambda;
            let rho = vacchini_rho_ee(t, &v, 1.0)?;
            let weak = vacchini_weak_limit(t, &v, 1.0)?;
            warning = weak.regime_warning;
            rows.push(vec![lt, rho, weak.value]);
        }
        let sidecar = VacchiniSidecar {
            lambda_lw: lambda,
            gamma_s: gs,
            rho_ee0: 1.0,
            omega_nm: v.omega_nm(),
            regime_warning: warning,
            grid,
        };
        let stem = format!("{out}_vacchini_gs{}", num_token(gs));
        let columns = ["lambda_t", "rho_ee", "weak_limit"];
        let file = emit_table(ctx, &stem, "compare", sidecar, &columns, &rows)?;
        entries.push(CompareEntry {
            gamma_s: gs,
            omega_nm: v.omega_nm(),
            regime_warning: warning,
            data_file: file,
        });
    }

    let mut rate_table = Vec::new();
    for &gs in &gamma_s_set {
        if gs <= 0.0 {
            continue;
        }
        let p = PhysicalParams::new(gs, omega, delta, omega0, lambda, 1.0)?;
        let gm = gamma_markovian(&p);
        let q = omega0 / lambda;
        let naive = naive_ac_rate(lambda, omega, delta)?;
        let gac = gamma_ac(gm, q)?;
        rate_table.push(RateRow {
            gamma_s: gs,
            gamma_m: gm,
            q,
            naive_rate: naive,
            gamma_ac: gac,
            naive_over_ac: naive / gac,
        });
    }
    let rate_rows: Vec<Vec<f64>> = rate_table
        .iter()
        .map(|r| vec![r.gamma_s, r.gamma_m, r.q, r.naive_rate, r.gamma_ac, r.naive_over_ac])
        .collect();
    let rate_columns = ["gamma_s", "gamma_m", "q", "naive_rate", "gamma_ac", "naive_over_ac"];
    #[derive(Serialize)]
    struct RateSidecar {
        lambda_lw: f64,
        omega_rabi: f64,
        detuning: f64,
        omega0: f64,
    }
    let rate_table_file = emit_table(
        ctx,
        &format!("{out}_rates"),
        "compare",
        RateSidecar {
            lambda_lw: lambda,
            omega_rabi: omega,
            detuning: delta,
            omega0,
        },
        &rate_columns,
        &rate_rows,
    )?;

    let lindblad = if with_lindblad {
        let gs = gamma_s_set
            .iter()
            .copied()
            .find(|&g| g > 0.0)
            .unwrap_or(0.001);
        let (rate0, flag) = lindblad_fitted_rate(omega, delta, gs)?;
        let (rate_w, _) = lindblad_fitted_rate(2.0 * omega, delta, gs)?;
        let (rate_d, _) = lindblad_fitted_rate(omega, 2.0 * delta, gs)?;
        let (rate_g, _) = lindblad_fitted_rate(omega, delta, 2.0 * gs)?;
        let gm = gs * omega * omega / (delta * delta);
        Some(LindbladBlock {
            omega_rabi: omega,
            detuning: delta,
            gamma_s: gs,
            fitted_rate: rate0,
            gamma_m: gm,
            rate_over_gamma_m: rate0 / gm,
            residual_flag: flag,
            exponents: ExponentFit {
                omega: (rate_w / rate0).ln() / 2f64.ln(),
                delta: (rate_d / rate0).ln() / 2f64.ln(),
                gamma_s: (rate_g / rate0).ln() / 2f64.ln(),
            },
        })
    } else {
        None
    };

    let doc = CompareDoc {
        command: "compare",
        version: VERSION,
        lambda_lw: lambda,
        omega_rabi: omega,
        detuning: delta,
        omega0,
        t_max_lambda_units: t_max,
        n_points,
        entries,
        rate_table,
        rate_table_file,
        lindblad,
    };
    let path = ctx.dir.join(format!("{out}.json"));
    write_json(&path, &doc)?;
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

fn cmd_classify(args: ClassifyArgs, cfg: &mut ConfigReader) -> Result<ExitCode, CliError> {
    let q = pick_f64(args.q, cfg, "q")?;
    let r = pick_f64(args.r, cfg, "r")?;
    cfg.finish()?;
    let (Some(q), Some(r)) = (q, r) else {
        return Err(CliError::BadInput("classify needs both q and r".into()));
    };
    let d = DimensionlessParams::new(q, r)?;
    let label = classify_regime(&d);
    println!("{}", label.label);
    println!(
        "q = {}  r = {}  rq2 = {}  rq3 = {}",
        label.q, label.r, label.rq2, label.rq3
    );
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

fn resolve_out_dir(
    flag: Option<PathBuf>,
    cfg: &mut ConfigReader,
) -> Result<PathBuf, CliError> {
    if let Some(dir) = flag {
        cfg.take("out_dir");
        return Ok(dir);
    }
    if let Some(dir) = cfg.take("out_dir") {
        return Ok(PathBuf::from(dir));
    }
    if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
        return Ok(PathBuf::from(dir));
    }
    Ok(PathBuf::from("."))
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ConfigReader::load(path)?,
        None => ConfigReader::default(),
    };
    let dir = resolve_out_dir(cli.out_dir, &mut cfg)?;
    let format = match cli.format {
        Some(f) => f,
        None => cfg
            .take("format")
            .map(|v| match v.as_str() {
                "csv" => Ok(OutputFormat::Csv),
                "json" => Ok(OutputFormat::Json),
                _ => Err(CliError::BadInput(format!(
                    "config key `format`: `{v}` is not csv/json"
                ))),
            })
            .transpose()?
            .unwrap_or(OutputFormat::Csv),
    };
    let ctx = OutputCtx { dir, format };
    match cli.cmd {
        Cmd::Curve(a) => cmd_curve(a, &mut cfg, &ctx),
        Cmd::Figure(a) => cmd_figure(a, &mut cfg, &ctx),
        Cmd::Oracle(a) => cmd_oracle(a, &mut cfg, &ctx),
        Cmd::Compare(a) => cmd_compare(a, &mut cfg, &ctx),
        Cmd::Classify(a) => cmd_classify(a, &mut cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reader_from(text: &str) -> ConfigReader {
        let dir = std::env::temp_dir().join(format!("acstark-cli-test-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("test.conf");
        fs::write(&path, text).unwrap();
        ConfigReader::load(&path).unwrap()
    }

    #[test]
    fn config_parses_comments_and_values() {
        let mut cfg = reader_from("# full-line comment\nq = 10 # trailing\n\nr = 1e-2\n");
        assert_eq!(cfg.take_f64("q").unwrap(), Some(10.0));
        assert_eq!(cfg.take_f64("r").unwrap(), Some(0.01));
        assert!(cfg.finish().is_ok());
    }

    #[test]
    fn unknown_config_key_is_an_error() {
        let mut cfg = reader_from("qq = 3\n");
        let err = cfg.finish().unwrap_err();
        assert!(matches!(err, CliError::BadInput(_)));
        assert!(err.message().contains("qq"));
    }

    #[test]
    fn flags_override_config_values() {
        let mut cfg = reader_from("q = 1\n");
        assert_eq!(pick_f64(Some(7.0), &mut cfg, "q").unwrap(), Some(7.0));
        assert!(cfg.finish().is_ok(), "overridden key still counts as known");
    }

    #[test]
    fn malformed_config_lines_are_rejected()  {
        let dir = std::env::temp_dir().join(format!("acstark-cli-bad-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.conf");
        fs::write(&path, "just words\n").unwrap();
        assert!(ConfigReader::load(&path).is_err());
        fs::write(&path, "q = 1\nq = 2\n").unwrap();
        assert!(ConfigReader::load(&path).is_err(), "duplicate keys rejected");
    }

    #[test]
    fn formatted_floats_round_trip() {
        for &x in &[0.0, 1.0, 1.0 / 3.0, 6.564e-3, 1e300, -2.5e-308] {
            assert_eq!(fmt_g(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn numeric_file_tokens_are_path_safe() {
        assert_eq!(num_token(0.0), "0");
        assert_eq!(num_token(1000.0), "1000");
        assert_eq!(num_token(0.01), "0p01");
        assert_eq!(num_token(1e-7), "0p0000001");
        assert_eq!(num_token(-3.5), "m3p5");
    }

    #[test]
    fn panel_table_matches_declared_families() {
        assert_eq!(PANELS.len(), 4);
        assert_eq!(PANELS[0].r, 100.0);
        assert_eq!(PANELS[1].r, 0.01);
        assert_eq!(PANELS[2].r, 0.01);
        assert_eq!(PANELS[3].r, 1e-5);
        assert!(PANELS[..2].iter().all(|p| p.unit == TimeUnit::MarkovianTau));
        assert!(PANELS[2..].iter().all(|p| p.unit == TimeUnit::AcTauPrime));
    }
}
