//! Batch front-end for `polyapprox`.
//!
//! Exit codes: 0 on success, 1 for configuration errors, 2 for numerical
//! failures (envelope violations, degenerate hulls after retry, unmet error
//! caps, shrink factors outside (0, 1)).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod plot;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use polyapprox::affine;
use polyapprox::deviation::{surface_deviation, volume_deviation, DeviationParams};
use polyapprox::experiments::{
    bp_check_2d, run_construction, scaling_study, verify_identities, verify_prop21, BpParams,
    ConstructionParams, ConstructionResult, IdentityReport, ShrinkChoice,
};
use polyapprox::geometry::validate_body;
use polyapprox::hull::{convex_hull_seeded, Polytope};
use polyapprox::integration::{
    body_volume, surface_area, BoundarySampler, DensitySpec, IntegrationMethod,
};
use polyapprox::{rng, SCHEMA_VERSION};
use serde::Serialize;
use serde_json::json;

pub use config::{
    parse_body, parse_density, BodyArg, DensityArg, Format, RunConfig, ShrinkArg, DEFAULT_SEED,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Library(#[from] polyapprox::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Library(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "polyapprox",
    version,
    about = "Random polytope approximation of smooth convex bodies"
)]
struct Cli {
    /// Master seed; every trial seed is derived from it.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads (defaults to all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output format; tables default to csv, records to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct BodyOpt {
    /// ball:r=<f>,n=<int> | ellipsoid:a=<f>,b=<f>[,c=<f>,...] | curve2d:<path.json>
    #[arg(long, value_parser = parse_body)]
    body: BodyArg,
}

#[derive(Args, Debug)]
struct ShrinkOpt {
    /// Shrink factor: pilot hulls up to 5000 points (auto), always pilots, or the asymptotic formula.
    #[arg(long, value_enum, default_value = "auto")]
    shrink: ShrinkArg,
    /// Pilot hulls for the empirical shrink factor.
    #[arg(long, default_value_t = affine::DEFAULT_PILOTS)]
    pilots: usize,
    /// Initial facet-sample budget of each deviation estimate.
    #[arg(long, default_value_t = 200_000)]
    samples: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Surface area, volume, affine invariants and deficit constants of a body.
    Bodyinfo(BodyOpt),
    /// p-affine surface area.
    Asp {
        #[command(flatten)]
        body: BodyOpt,
        /// Exponent p (any real except -n; inf and -inf allowed).
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        /// Monte Carlo samples; deterministic quadrature when absent (n <= 3).
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Surface-area (and optionally volume) deviation between lambda*K and a polytope.
    Deviate {
        #[command(flatten)]
        body: BodyOpt,
        /// Polytope in the hull JSON format.
        #[arg(long, conflicts_with = "hull_points")]
        polytope: Option<PathBuf>,
        /// Use the hull of this many uniform boundary samples instead.
        #[arg(long)]
        hull_points: Option<usize>,
        /// The lambda of lambda*K.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        /// Also estimate the volume deviation.
        #[arg(long)]
        volume: bool,
    },
    /// Shrink-and-hull construction at a single N.
    Construct {
        #[command(flatten)]
        body: BodyOpt,
        #[arg(long, value_parser = parse_density, default_value = "fn")]
        density: DensityArg,
        #[arg(long)]
        n_points: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[command(flatten)]
        shrink: ShrinkOpt,
        /// Write the best trial polytope here.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Construction over a schedule of N with a log-log slope fit.
    Scaling {
        #[command(flatten)]
        body: BodyOpt,
        #[arg(long, value_parser = parse_density, default_value = "fn")]
        density: DensityArg,
        #[arg(long, value_delimiter = ',', required = true)]
        schedule: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[command(flatten)]
        shrink: ShrinkOpt,
        /// Write an SVG convergence plot here.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Integral-geometric identity suite.
    Verify(BodyOpt),
    /// Planar chord-integral identity (n = 2 only).
    Bpcheck {
        #[command(flatten)]
        body: BodyOpt,
        #[arg(long, default_value_t = 400_000)]
        samples: usize,
    },
    /// Mean hull surface-area deficit against its asymptotic constant.
    Deficit {
        #[command(flatten)]
        body: BodyOpt,
        #[arg(long, value_parser = parse_density, default_value = "uniform")]
        density: DensityArg,
        #[arg(long, value_delimiter = ',', required = true)]
        schedule: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.to_string();
            let line = text
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments");
            eprintln!("{line}");
            return 1;
        }
    };
    let result = match cli.workers {
        Some(0) => Err(CliError::Config("--workers must be at least 1".into())),
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(CliError::Config(format!("--workers: {e}"))),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn csv_bytes<R: Serialize>(rows: &[R]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

fn json_bytes(config: &RunConfig, result: impl Serialize) -> Result<Vec<u8>, CliError> {
    let value = json!({
        "schema_version": SCHEMA_VERSION,
        "command": config.command,
        "config": config,
        "result": result,
    });
    let mut bytes = serde_json::to_vec_pretty(&value).map_err(polyapprox::Error::from)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn record_only(cli: &Cli, command: &str) -> Result<Format, CliError> {
    match cli.format {
        Some(Format::Csv) => Err(CliError::Config(format!(
            "--format csv is not available for {command}; use json"
        ))),
        _ => Ok(Format::Json),
    }
}

fn shrink_choice(opt: &ShrinkOpt) -> ShrinkChoice {
    match opt.shrink {
        ShrinkArg::Auto => ShrinkChoice::Auto,
        ShrinkArg::Asymptotic => ShrinkChoice::Asymptotic,
        ShrinkArg::Empirical => ShrinkChoice::Empirical { pilots: opt.pilots },
    }
}

fn construction_params(trials: usize, seed: u64, opt: &ShrinkOpt) -> ConstructionParams {
    let mut p = ConstructionParams::new(trials, seed);
    p.shrink = shrink_choice(opt);
    p.deviation.samples = opt.samples;
    p.deviation.max_samples = p.deviation.max_samples.max(8 * opt.samples);
    p
}

fn base_config(cli: &Cli, command: &str, format: Format, body: &BodyArg) -> RunConfig {
    let mut c = RunConfig::new(command, cli.seed, format);
    c.body = Some(body.text.clone());
    c.out = cli.out.clone();
    c
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Bodyinfo(b) => bodyinfo(cli, b),
        Command::Asp { body, p, samples } => asp(cli, body, p, *samples),
        Command::Deviate {
            body,
            polytope,
            hull_points,
            scale,
            samples,
            volume,
        } => deviate(
            cli,
            body,
            polytope.as_deref(),
            *hull_points,
            *scale,
            *samples,
            *volume,
        ),
        Command::Construct {
            body,
            density,
            n_points,
            trials,
            shrink,
            witness,
        } => construct(
            cli,
            body,
            density,
            *n_points,
            *trials,
            shrink,
            witness.as_deref(),
        ),
        Command::Scaling {
            body,
            density,
            schedule,
            trials,
            shrink,
            plot,
        } => scaling(
            cli,
            body,
            density,
            schedule,
            *trials,
            shrink,
            plot.as_deref(),
        ),
        Command::Verify(b) => {
            let report = verify_identities(&b.body.body)?;
            identity_output(cli, "verify", &b.body, report)
        }
        Command::Bpcheck { body, samples } => {
            let row = bp_check_2d(
                &body.body.body,
                &BpParams {
                    samples: *samples,
                    seed: cli.seed,
                    ..Default::default()
                },
            )?;
            let report = IdentityReport {
                schema_version: SCHEMA_VERSION,
                body: body.body.body.label(),
                rows: vec![row],
            };
            identity_output_with(cli, "bpcheck", &body.body, report, |c| {
                c.samples = Some(*samples)
            })
        }
        Command::Deficit {
            body,
            density,
            schedule,
            trials,
        } => deficit(cli, body, density, schedule, *trials),
    }
}

fn bodyinfo(cli: &Cli, b: &BodyOpt) -> Result<(), CliError> {
    let format = record_only(cli, "bodyinfo")?;
    let body = &b.body.body;
    let n = body.dim();
    let quad = IntegrationMethod::deterministic_default(n);
    let report = validate_body(body)?;
    let as1 = affine::p_affine_surface_area(body, 1.0, quad)?.value;
    let asn = affine::p_affine_surface_area(body, n as f64, quad)?.value;
    let uniform = affine::deficit_coefficient(body, &DensitySpec::uniform(body))?;
    let fn_density = affine::fn_density(body)?;
    let affine_optimal = affine::deficit_coefficient(body, &fn_density)?;
    let info = json!({
        "label": body.label(),
        "dim": n,
        "surface_area": surface_area(body),
        "volume": body_volume(body),
        "affine_surface_area": as1,
        "as_n": asn,
        "isoperimetric_ratio_p1": affine::affine_isoperimetric_ratio(body, 1.0, quad)?,
        "validation": report,
        "reitzner_constant": affine::reitzner_constant(n),
        "deficit_coefficient_uniform": uniform,
        "deficit_coefficient_fn": affine_optimal,
    });
    emit(
        &cli.out,
        &json_bytes(&base_config(cli, "bodyinfo", format, &b.body), info)?,
    )
}

fn asp(cli: &Cli, b: &BodyOpt, p_text: &str, samples: Option<usize>) -> Result<(), CliError> {
    let format = record_only(cli, "asp")?;
    let p: f64 = p_text
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("--p: '{p_text}' is not a number")))?;
    let body = &b.body.body;
    let method = match samples {
        Some(s) => IntegrationMethod::MonteCarlo {
            samples: s,
            seed: cli.seed,
        },
        None => IntegrationMethod::deterministic_default(body.dim()),
    };
    let r = match affine::p_affine_surface_area(body, p, method) {
        Err(polyapprox::Error::Contract(m)) => return Err(CliError::Config(format!("--p: {m}"))),
        other => other?,
    };
    let mut config = base_config(cli, "asp", format, &b.body);
    config.p = Some(p_text.to_string());
    config.samples = samples;
    let result = json!({ "p": p_text, "value": r.value.value, "std_error": r.value.std_error, "samples": r.value.samples, "seed": r.value.seed });
    emit(&cli.out, &json_bytes(&config, result)?)
}

fn deviate(
    cli: &Cli,
    b: &BodyOpt,
    polytope: Option<&Path>,
    hull_points: Option<usize>,
    scale: f64,
    samples: usize,
    volume: bool,
) -> Result<(), CliError> {
    let format = record_only(cli, "deviate")?;
    let body = &b.body.body;
    let p: Polytope = match (polytope, hull_points) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("--polytope: cannot read {}: {e}", path.display()))
            })?;
            Polytope::from_json(&text).map_err(|e| CliError::Config(format!("--polytope: {e}")))?
        }
        (None, Some(m)) => {
            let sampler = BoundarySampler::new(body, DensitySpec::uniform(body));
            let mut r = rng::stream(cli.seed, &[m as u64]);
            let pts: Vec<_> = sampler
                .sample_points(&mut r, m)?
                .into_iter()
                .map(|x| x.x)
                .collect();
            convex_hull_seeded(&pts, body.dim(), cli.seed)?
        }
        (None, None) => {
            return Err(CliError::Config(
                "deviate needs --polytope or --hull-points".into(),
            ))
        }
    };
    if p.dim != body.dim() {
        return Err(CliError::Config(format!(
            "--polytope has dimension {}, --body has {}",
            p.dim,
            body.dim()
        )));
    }
    if !(scale > 0.0) {
        return Err(CliError::Config(format!(
            "--scale must be positive, got {scale}"
        )));
    }
    let params = DeviationParams {
        samples,
        seed: cli.seed,
        max_samples: 8 * samples,
        ..Default::default()
    };
    let surface = surface_deviation(body, scale, &p, &params)?;
    let vol = if volume {
        Some(volume_deviation(body, scale, &p, &params)?)
    } else {
        None
    };
    let mut config = base_config(cli, "deviate", format, &b.body);
    config.scale = Some(scale);
    config.samples = Some(samples);
    config.n_points = hull_points;
    let result = json!({
        "surface": surface,
        "volume": vol,
        "polytope_vertices": p.vertex_count(),
        "polytope_facets": p.facets.len(),
    });
    emit(&cli.out, &json_bytes(&config, result)?)
}

#[derive(Serialize)]
struct ConstructionSummary<'a> {
    n_points: usize,
    trials: usize,
    shrink_c: f64,
    mean_delta_s: f64,
    stderr: f64,
    min_delta_s: f64,
    rescaled_mean: f64,
    bound_ratio_max: f64,
    bound_ratios: &'a [f64],
    origin_outside: usize,
    min_vertices: usize,
    max_vertices: usize,
    seed: u64,
}

impl<'a> From<&'a ConstructionResult> for ConstructionSummary<'a> {
    fn from(r: &'a ConstructionResult) -> Self {
        ConstructionSummary {
            n_points: r.n_points,
            trials: r.trials,
            shrink_c: r.shrink_c,
            mean_delta_s: r.mean_delta_s,
            stderr: r.stderr,
            min_delta_s: r.min_delta_s,
            rescaled_mean: r.rescaled_mean,
            bound_ratio_max: r
                .bound_ratios
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max),
            bound_ratios: &r.bound_ratios,
            origin_outside: r.origin_outside,
            min_vertices: r.min_vertices,
            max_vertices: r.max_vertices,
            seed: r.seed,
        }
    }
}

fn construct(
    cli: &Cli,
    b: &BodyOpt,
    density: &DensityArg,
    n_points: usize,
    trials: usize,
    shrink: &ShrinkOpt,
    witness: Option<&Path>,
) -> Result<(), CliError> {
    let format = record_only(cli, "construct")?;
    let body = &b.body.body;
    let d = density.build(body)?;
    let params = construction_params(trials, cli.seed, shrink);
    let r = run_construction(body, &d, n_points, &params).map_err(contract_as_config)?;
    if let Some(path) = witness {
        std::fs::write(path, r.witness.to_json() + "\n")?;
    }
    let mut config = base_config(cli, "construct", format, &b.body);
    config.density = Some(density.label());
    config.n_points = Some(n_points);
    config.trials = Some(trials);
    config.shrink = Some(shrink.shrink);
    config.pilots = Some(shrink.pilots);
    config.samples = Some(shrink.samples);
    emit(
        &cli.out,
        &json_bytes(&config, ConstructionSummary::from(&r))?,
    )
}

fn contract_as_config(e: polyapprox::Error) -> CliError {
    match e {
        polyapprox::Error::Contract(m) => CliError::Config(m),
        other => CliError::Library(other),
    }
}

fn scaling(
    cli: &Cli,
    b: &BodyOpt,
    density: &DensityArg,
    schedule: &[usize],
    trials: usize,
    shrink: &ShrinkOpt,
    plot: Option<&Path>,
) -> Result<(), CliError> {
    let format = cli.format.unwrap_or(Format::Csv);
    let body = &b.body.body;
    let d = density.build(body)?;
    let params = construction_params(trials, cli.seed, shrink);
    let report = scaling_study(body, &d, schedule, &params).map_err(contract_as_config)?;
    log::info!(
        "slope {:.4} ± {:.4} (expected {:.4}); bound-ratio trend {:.4}",
        report.slope.slope,
        report.slope.half_width,
        report.expected_slope,
        report.bound_ratio_trend
    );
    if let Some(path) = plot {
        std::fs::write(path, plot::scaling_svg(&report))?;
    }
    let mut config = base_config(cli, "scaling", format, &b.body);
    config.density = Some(density.label());
    config.schedule = schedule.to_vec();
    config.trials = Some(trials);
    config.shrink = Some(shrink.shrink);
    config.pilots = Some(shrink.pilots);
    config.samples = Some(shrink.samples);
    config.plot = plot.map(Path::to_path_buf);
    let bytes = match format {
        Format::Csv => csv_bytes(&report.rows)?,
        Format::Json => json_bytes(&config, &report)?,
    };
    emit(&cli.out, &bytes)
}

fn identity_output(
    cli: &Cli,
    command: &str,
    body: &BodyArg,
    report: IdentityReport,
) -> Result<(), CliError> {
    identity_output_with(cli, command, body, report, |_| {})
}

fn identity_output_with(
    cli: &Cli,
    command: &str,
    body: &BodyArg,
    report: IdentityReport,
    adjust: impl FnOnce(&mut RunConfig),
) -> Result<(), CliError> {
    let format = cli.format.unwrap_or(Format::Csv);
    let failed = report.rows.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        log::warn!(
            "{failed} of {} identities outside tolerance",
            report.rows.len()
        );
    }
    let bytes = match format {
        Format::Csv => csv_bytes(&report.rows)?,
        Format::Json => {
            let mut config = base_config(cli, command, format, body);
            adjust(&mut config);
            json_bytes(&config, &report)?
        }
    };
    emit(&cli.out, &bytes)
}

fn deficit(
    cli: &Cli,
    b: &BodyOpt,
    density: &DensityArg,
    schedule: &[usize],
    trials: usize,
) -> Result<(), CliError> {
    let format = cli.format.unwrap_or(Format::Csv);
    let body = &b.body.body;
    let d = density.build(body)?;
    let rows = verify_prop21(body, &d, schedule, trials, cli.seed).map_err(contract_as_config)?;
    let bytes = match format {
        Format::Csv => csv_bytes(&rows)?,
        Format::Json => {
            let mut config = base_config(cli, "deficit", format, &b.body);
            config.density = Some(density.label());
            config.schedule = schedule.to_vec();
            config.trials = Some(trials);
            json_bytes(&config, &rows)?
        }
    };
    emit(&cli.out, &bytes)
}
