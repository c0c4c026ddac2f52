//! Command-line value parsing and the serializable run configuration.

use std::path::{Path, PathBuf};

use polyapprox::geometry::SupportCurve;
use polyapprox::integration::{CustomWeight, DensitySpec};
use polyapprox::{affine, Body};
use serde::{Deserialize, Serialize};

/// Master seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 1729;

/// A parsed `--body` value together with its original text.
#[derive(Clone, Debug)]
pub struct BodyArg {
    pub text: String,
    pub body: Body,
}

fn key_values(spec: &str) -> Result<Vec<(String, f64)>, String> {
    spec.split(',')
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got '{kv}'"))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| format!("'{v}' is not a number"))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

/// `ball:r=<f>,n=<int>` | `ellipsoid:a=<f>,b=<f>[,c=<f>,...]` | `curve2d:<path.json>`.
pub fn parse_body(text: &str) -> Result<BodyArg, String> {
    let (kind, rest) = text.split_once(':').ok_or("expected <kind>:<parameters>")?;
    let body = match kind {
        "ball" => {
            let kv = key_values(rest)?;
            let (mut r, mut n) = (None, None);
            for (k, v) in kv {
                match k.as_str() {
                    "r" => r = Some(v),
                    "n" => n = Some(v),
                    _ => return Err(format!("unknown ball parameter '{k}'")),
                }
            }
            let r = r.ok_or("ball needs r")?;
            let n = n.ok_or("ball needs n")?;
            if n.fract() != 0.0 || n < 2.0 {
                return Err(format!("n must be an integer >= 2, got {n}"));
            }
            Body::ball(r, n as usize).map_err(|e| e.to_string())?
        }
        "ellipsoid" => {
            let kv = key_values(rest)?;
            let mut axes = Vec::new();
            for (i, (k, v)) in kv.into_iter().enumerate() {
                let expected = (b'a' + i as u8) as char;
                if k.len() != 1 || !k.starts_with(expected) {
                    return Err(format!(
                        "ellipsoid semi-axes are named a, b, c, ... in order; got '{k}'"
                    ));
                }
                axes.push(v);
            }
            Body::ellipsoid(&axes).map_err(|e| e.to_string())?
        }
        "curve2d" => {
            let json =
                std::fs::read_to_string(rest).map_err(|e| format!("cannot read {rest}: {e}"))?;
            let curve = SupportCurve::from_json(&json).map_err(|e| e.to_string())?;
            Body::curve(curve).map_err(|e| e.to_string())?
        }
        other => {
            return Err(format!(
                "unknown body kind '{other}' (ball, ellipsoid, curve2d)"
            ))
        }
    };
    Ok(BodyArg {
        text: text.to_string(),
        body,
    })
}

/// A `--density` value: `uniform`, `fn` or `custom:<file.json>`.
#[derive(Clone, Debug, PartialEq)]
pub enum DensityArg {
    Uniform,
    AffineOptimal,
    Custom(PathBuf),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomFile {
    curvature_exponent: f64,
    support_exponent: f64,
}

pub fn parse_density(text: &str) -> Result<DensityArg, String> {
    match text {
        "uniform" => Ok(DensityArg::Uniform),
        "fn" => Ok(DensityArg::AffineOptimal),
        _ => match text.strip_prefix("custom:") {
            Some(path) if !path.is_empty() => Ok(DensityArg::Custom(PathBuf::from(path))),
            _ => Err(format!(
                "unknown density '{text}' (uniform, fn, custom:<file>)"
            )),
        },
    }
}

impl DensityArg {
    pub fn label(&self) -> String {
        match self {
            DensityArg::Uniform => "uniform".into(),
            DensityArg::AffineOptimal => "fn".into(),
            DensityArg::Custom(p) => format!("custom:{}", p.display()),
        }
    }

    pub fn build(&self, body: &Body) -> Result<DensitySpec, crate::CliError> {
        Ok(match self {
            DensityArg::Uniform => DensitySpec::uniform(body),
            DensityArg::AffineOptimal => affine::fn_density(body)?,
            DensityArg::Custom(path) => {
                let w = read_custom(path)?;
                DensitySpec::custom(
                    body,
                    CustomWeight::CurvaturePower {
                        curvature_exponent: w.curvature_exponent,
                        support_exponent: w.support_exponent,
                    },
                )?
            }
        })
    }
}

fn read_custom(path: &Path) -> Result<CustomFile, crate::CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        crate::CliError::Config(format!("--density: cannot read {}: {e}", path.display()))
    })?;
    serde_json::from_str(&text)
        .map_err(|e| crate::CliError::Config(format!("--density: {}: {e}", path.display())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ShrinkArg {
    Auto,
    Asymptotic,
    Empirical,
}

/// Everything that determines a run's output. `workers` is deliberately
/// absent: results do not depend on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<String>,
    pub seed: u64,
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot: Option<PathBuf>,
    /// Kept as text so that `inf` and `-inf` survive JSON.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub schedule: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shrink: Option<ShrinkArg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pilots: Option<usize>,
}

impl RunConfig {
    pub fn new(command: &str, seed: u64, format: Format) -> Self {
        RunConfig {
            command: command.to_string(),
            body: None,
            density: None,
            seed,
            format,
            out: None,
            plot: None,
            p: None,
            n_points: None,
            trials: None,
            schedule: Vec::new(),
            samples: None,
            scale: None,
            shrink: None,
            pilots: None,
        }
    }
}
