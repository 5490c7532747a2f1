//! Sweep configuration: one JSON document (path or standard input), flag
//! overrides on top, per-command defaults underneath, and a canonical hash
//! that stamps every output file.

use std::io::Read;
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Which evaluation path drives an information sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Closed-form curves; any environment size.
    ClosedForm,
    /// Branching-state ensembles measured numerically; fragments up to 10.
    Numeric,
    /// Full joint-state evolution; environments up to 12 components.
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutFormat {
    Csv,
    Json,
}

/// How a deficit `delta` translates into an information threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdChoice {
    Linear,
    Entropic,
}

impl ThresholdChoice {
    pub fn to_core(self) -> qdarwin::redundancy::ThresholdMode {
        match self {
            ThresholdChoice::Linear => qdarwin::redundancy::ThresholdMode::Linear,
            ThresholdChoice::Entropic => qdarwin::redundancy::ThresholdMode::Entropic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    InfoCurve,
    Redundancy,
    OracleCheck,
    FitExponent,
}

/// Flags shared by every subcommand; each overrides the matching config
/// field. `--gamma`/`--angle` replace the whole component spec.
#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// JSON config document: a path, or `-` for standard input
    #[arg(long)]
    pub config: Option<String>,
    /// Probability of the first pointer state
    #[arg(long)]
    pub p1: Option<f64>,
    /// Homogeneous per-component record overlap, in [0, 1]
    #[arg(long, conflicts_with = "angle")]
    pub gamma: Option<f64>,
    /// Homogeneous conditional-rotation angle; the overlap is sin(angle)
    #[arg(long)]
    pub angle: Option<f64>,
    /// Number of environment components
    #[arg(long)]
    pub env_size: Option<usize>,
    /// Sweep fragment sizes 1..=N
    #[arg(long)]
    pub frag_max: Option<usize>,
    /// Information deficit; repeat the flag for a list
    #[arg(long = "delta")]
    pub deltas: Vec<f64>,
    /// Evaluation path: closed-form, numeric, or oracle
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Output format: csv or json
    #[arg(long, value_enum)]
    pub format: Option<OutFormat>,
    /// Output path; standard output when absent
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    p1: Option<f64>,
    components: Option<RawComponents>,
    fragment_sizes: Option<RawFragmentSizes>,
    deltas: Option<Vec<f64>>,
    mode: Option<Mode>,
    format: Option<OutFormat>,
    output: Option<PathBuf>,
    threshold: Option<ThresholdChoice>,
    window: Option<(usize, usize)>,
    grid_resolution: Option<usize>,
}

/// Either a homogeneous spec (`gamma` or `angle`, plus `count`) or an
/// explicit per-component `gammas` list.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponents {
    gamma: Option<f64>,
    angle: Option<f64>,
    count: Option<usize>,
    gammas: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawFragmentSizes {
    List(Vec<usize>),
    Range { start: usize, end: usize },
}

/// A fully resolved sweep. Serialization of this struct (minus the output
/// path, which does not affect the data) is what gets hashed into the
/// metadata header.
#[derive(Debug, Clone, Serialize)]
pub struct SweepConfig {
    pub p1: f64,
    /// Per-component record overlaps; fragments take leading components.
    pub gammas: Vec<f64>,
    pub fragment_sizes: Vec<usize>,
    pub deltas: Vec<f64>,
    pub mode: Mode,
    pub threshold: ThresholdChoice,
    pub grid_resolution: usize,
    pub window: Option<(usize, usize)>,
    pub format: OutFormat,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

impl SweepConfig {
    pub fn env_size(&self) -> usize {
        self.gammas.len()
    }

    /// The single overlap value when all components share it.
    pub fn homogeneous_gamma(&self) -> Option<f64> {
        let first = *self.gammas.first()?;
        self.gammas.iter().all(|&g| g == first).then_some(first)
    }

    pub fn sha256(&self) -> String {
        let canon = serde_json::to_string(self).expect("resolved config serializes");
        Sha256::digest(canon.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

struct Defaults {
    env_size: usize,
    frag_hi: usize,
    mode: Mode,
}

fn defaults(kind: CommandKind) -> Defaults {
    match kind {
        CommandKind::InfoCurve => Defaults {
            env_size: 60,
            frag_hi: 60,
            mode: Mode::ClosedForm,
        },
        CommandKind::Redundancy => Defaults {
            env_size: 10_000,
            frag_hi: 1,
            mode: Mode::ClosedForm,
        },
        CommandKind::OracleCheck => Defaults {
            env_size: 8,
            frag_hi: 2,
            mode: Mode::Oracle,
        },
        CommandKind::FitExponent => Defaults {
            env_size: 80,
            frag_hi: 80,
            mode: Mode::ClosedForm,
        },
    }
}

pub fn load(args: &CommonArgs, kind: CommandKind) -> Result<SweepConfig, CliError> {
    let raw = match &args.config {
        None => RawConfig::default(),
        Some(source) => parse_raw(&read_source(source)?)?,
    };
    let cfg = resolve(args, raw, kind)?;
    validate(&cfg, kind)?;
    Ok(cfg)
}

fn read_source(source: &str) -> Result<String, CliError> {
    if source == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text).map_err(|e| {
            CliError::config(format!("cannot read config from standard input: {e}"))
        })?;
        Ok(text)
    } else {
        std::fs::read_to_string(source)
            .map_err(|e| CliError::config(format!("cannot read config {source}: {e}")))
    }
}

fn parse_raw(text: &str) -> Result<RawConfig, CliError> {
    // serde_json reports the offending line and column.
    serde_json::from_str(text).map_err(|e| CliError::config(format!("config parse error: {e}")))
}

fn angle_to_gamma(a: f64) -> Result<f64, CliError> {
    let g = a.sin();
    if !(0.0..=1.0).contains(&g) {
        return Err(CliError::config(format!(
            "angle {a}: record overlap sin(angle) = {g} outside [0, 1]"
        )));
    }
    Ok(g)
}

fn resolve(args: &CommonArgs, raw: RawConfig, kind: CommandKind) -> Result<SweepConfig, CliError> {
    let d = defaults(kind);
    let comp = raw.components.unwrap_or_default();
    if comp.gammas.is_some()
        && (comp.gamma.is_some() || comp.angle.is_some() || comp.count.is_some())
    {
        return Err(CliError::config(
            "config field components: an explicit gammas list excludes gamma, angle, and count",
        ));
    }
    if comp.gamma.is_some() && comp.angle.is_some() {
        return Err(CliError::config(
            "config field components: give exactly one of gamma or angle",
        ));
    }

    let flag_gamma = match (args.gamma, args.angle) {
        (Some(_), Some(_)) => {
            return Err(CliError::config("give exactly one of --gamma or --angle"))
        }
        (Some(g), None) => Some(g),
        (None, Some(a)) => Some(angle_to_gamma(a)?),
        (None, None) => None,
    };

    let gammas = if let Some(g) = flag_gamma {
        let count = args
            .env_size
            .or(comp.count)
            .or(comp.gammas.as_ref().map(Vec::len))
            .unwrap_or(d.env_size);
        vec![g; count]
    } else if let Some(list) = comp.gammas {
        if args.env_size.is_some() {
            return Err(CliError::config(
                "--env-size cannot resize an explicit gammas list; override --gamma or --angle too",
            ));
        }
        list
    } else {
        let g = match (comp.gamma, comp.angle) {
            (Some(g), None) => g,
            (None, Some(a)) => angle_to_gamma(a)?,
            (None, None) => 0.875,
            (Some(_), Some(_)) => unreachable!("rejected above"),
        };
        vec![g; args.env_size.or(comp.count).unwrap_or(d.env_size)]
    };

    let fragment_sizes = if let Some(hi) = args.frag_max {
        (1..=hi).collect()
    } else {
        match raw.fragment_sizes {
            Some(RawFragmentSizes::List(mut list)) => {
                list.sort_unstable();
                list.dedup();
                list
            }
            Some(RawFragmentSizes::Range { start, end }) => {
                if start > end {
                    return Err(CliError::config(format!(
                        "config field fragment_sizes: range start {start} exceeds end {end}"
                    )));
                }
                (start..=end).collect()
            }
            // The default range follows the environment down, so shrinking
            // the environment alone never yields an impossible fragment.
            None => (1..=d.frag_hi.min(gammas.len())).collect(),
        }
    };

    let deltas = if args.deltas.is_empty() {
        raw.deltas.unwrap_or_else(|| vec![1e-1, 1e-2, 1e-3, 1e-4])
    } else {
        args.deltas.clone()
    };

    Ok(SweepConfig {
        p1: args.p1.or(raw.p1).unwrap_or(0.25),
        gammas,
        fragment_sizes,
        deltas,
        mode: args.mode.or(raw.mode).unwrap_or(d.mode),
        threshold: raw.threshold.unwrap_or(ThresholdChoice::Linear),
        grid_resolution: raw.grid_resolution.unwrap_or(128),
        window: raw.window,
        format: args.format.or(raw.format).unwrap_or(OutFormat::Csv),
        output: args.output.clone().or(raw.output),
    })
}

fn validate(cfg: &SweepConfig, kind: CommandKind) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&cfg.p1) {
        return Err(CliError::config(format!(
            "config field p1: {} outside [0, 1]",
            cfg.p1
        )));
    }
    if cfg.gammas.is_empty() {
        return Err(CliError::config(
            "config field components: at least one environment component needed",
        ));
    }
    for &g in &cfg.gammas {
        if !(0.0..=1.0).contains(&g) {
            return Err(CliError::config(format!(
                "config field components: overlap {g} outside [0, 1]"
            )));
        }
    }
    if cfg.grid_resolution < 8 {
        return Err(CliError::config(format!(
            "config field grid_resolution: {} below the minimum of 8",
            cfg.grid_resolution
        )));
    }
    if let Some((lo, hi)) = cfg.window {
        if lo < 1 || lo >= hi {
            return Err(CliError::config(format!(
                "config field window: [{lo}, {hi}] must satisfy 1 <= lo < hi"
            )));
        }
    }

    if matches!(
        kind,
        CommandKind::InfoCurve | CommandKind::OracleCheck | CommandKind::FitExponent
    ) {
        if cfg.fragment_sizes.is_empty() {
            return Err(CliError::config(
                "config field fragment_sizes: at least one size needed",
            ));
        }
        if cfg.fragment_sizes[0] == 0 {
            return Err(CliError::config(
                "config field fragment_sizes: sizes are positive component counts",
            ));
        }
        let max = *cfg.fragment_sizes.last().expect("nonempty");
        if max > cfg.env_size() {
            return Err(CliError::config(format!(
                "fragment size {max} exceeds the {}-component environment",
                cfg.env_size()
            )));
        }
    }

    let oracle_path = kind == CommandKind::OracleCheck
        || (kind == CommandKind::InfoCurve && cfg.mode == Mode::Oracle);
    if oracle_path && cfg.env_size() > 12 {
        return Err(CliError::config(format!(
            "full-state evolution caps the environment at 12 components, got {}",
            cfg.env_size()
        )));
    }
    if kind == CommandKind::InfoCurve && cfg.mode == Mode::Numeric {
        let max = *cfg.fragment_sizes.last().expect("nonempty");
        if max > 10 {
            return Err(CliError::config(format!(
                "numeric mode caps fragments at 10 components (discrimination dimension 2^10), got {max}"
            )));
        }
    }

    if kind == CommandKind::Redundancy {
        if cfg.deltas.is_empty() {
            return Err(CliError::config(
                "config field deltas: at least one deficit needed",
            ));
        }
        for &delta in &cfg.deltas {
            let ok = match cfg.threshold {
                ThresholdChoice::Linear => delta > 0.0 && delta < 1.0,
                ThresholdChoice::Entropic => delta > 0.0 && delta <= 1.0,
            };
            if !ok {
                return Err(CliError::config(format!(
                    "config field deltas: {delta} outside the {} threshold domain",
                    match cfg.threshold {
                        ThresholdChoice::Linear => "(0, 1) linear",
                        ThresholdChoice::Entropic => "(0, 1] entropic",
                    }
                )));
            }
        }
        if cfg.homogeneous_gamma().is_none() {
            return Err(CliError::config(
                "redundancy sweeps need a homogeneous environment (uniform overlaps)",
            ));
        }
    }

    if kind == CommandKind::FitExponent {
        match cfg.homogeneous_gamma() {
            None => {
                return Err(CliError::config(
                    "exponent fits need a homogeneous environment (uniform overlaps)",
                ))
            }
            Some(g) if g <= 0.0 || g >= 1.0 => {
                return Err(CliError::config(format!(
                    "exponent fits need an overlap strictly inside (0, 1), got {g}"
                )))
            }
            Some(_) => {}
        }
    }
    Ok(())
}
