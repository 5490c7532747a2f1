//! Redundancy of pointer information across the environment: the smallest
//! fragment delivering all but a deficit `delta` of the plateau, and the
//! number of such disjoint fragments the environment supplies.

use crate::error::{Error, Result};
use crate::numerics::binary_entropy;

/// Forward-scan limit; beyond this, the threshold search switches to
/// bisection on the monotone measure.
pub const SCAN_BISECTION_THRESHOLD: usize = 1_000_000;

/// How the information deficit `delta` converts into a threshold on the
/// measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMode {
    /// Pass at `measure >= H_S * (1 - delta)`.
    Linear,
    /// Pass at `measure >= H_S - h(delta)`, reading the deficit as an
    /// entropic quantity.
    Entropic,
}

impl ThresholdMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ThresholdMode::Linear => "linear",
            ThresholdMode::Entropic => "entropic",
        }
    }

    /// The information level a fragment must reach. `delta = 0` is rejected
    /// in both modes (perfect knowledge needs unbounded fragments whenever
    /// records are imperfect); `delta >= 1` is additionally rejected in
    /// linear mode, where the threshold would be trivial or negative.
    pub fn threshold(&self, hs: f64, delta: f64) -> Result<f64> {
        let domain_err = |domain| Error::Domain {
            name: "delta",
            value: delta,
            domain,
        };
        match self {
            ThresholdMode::Linear => {
                if !(delta > 0.0 && delta < 1.0) {
                    return Err(domain_err("(0, 1)"));
                }
                Ok(hs * (1.0 - delta))
            }
            ThresholdMode::Entropic => {
                if !(delta > 0.0 && delta <= 1.0) {
                    return Err(domain_err("(0, 1]"));
                }
                Ok(hs - binary_entropy(delta)?)
            }
        }
    }
}

impl std::fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Redundancy at one deficit level.
#[derive(Debug, Clone, PartialEq)]
pub struct RedundancyResult {
    pub delta: f64,
    /// Smallest fragment size reaching the threshold.
    pub f_delta: usize,
    /// `env_size / f_delta`.
    pub r_delta: f64,
    /// The asymptotic estimate `env_size * xi / ln(1/delta)`.
    pub r_asymptotic: f64,
}

impl RedundancyResult {
    pub fn new(delta: f64, f_delta: usize, env_size: usize, r_asymptotic: f64) -> Result<Self> {
        let r_delta = redundancy(env_size, f_delta)?;
        Ok(Self {
            delta,
            f_delta,
            r_delta,
            r_asymptotic,
        })
    }

    /// `|r_delta - r_asymptotic| / r_asymptotic`.
    pub fn relative_gap(&self) -> f64 {
        (self.r_delta - self.r_asymptotic).abs() / self.r_asymptotic
    }
}

/// Smallest fragment size whose information reaches the `delta` threshold.
///
/// `measure` must be monotone non-decreasing in the fragment size. Sizes are
/// scanned forward up to [`SCAN_BISECTION_THRESHOLD`]; environments larger
/// than that fall back to bisection on the monotone measure.
pub fn min_fragment_size<F>(
    measure: F,
    hs: f64,
    delta: f64,
    mode: ThresholdMode,
    env_size: usize,
) -> Result<usize>
where
    F: Fn(usize) -> Result<f64>,
{
    if env_size == 0 {
        return Err(Error::InsufficientEnvironment(
            "no environment components".into(),
        ));
    }
    let threshold = mode.threshold(hs, delta)?;
    let scan_cap = env_size.min(SCAN_BISECTION_THRESHOLD);
    let mut best_seen = f64::NEG_INFINITY;
    for f in 1..=scan_cap {
        let v = measure(f)?;
        best_seen = best_seen.max(v);
        if v >= threshold {
            return Ok(f);
        }
    }
    if env_size <= SCAN_BISECTION_THRESHOLD {
        return Err(Error::InsufficientEnvironment(format!(
            "no fragment of up to {env_size} components reaches the threshold \
             {threshold:.6} (best seen {best_seen:.6}, delta = {delta}, {mode} mode)"
        )));
    }
    if measure(env_size)? < threshold {
        return Err(Error::InsufficientEnvironment(format!(
            "even the whole environment of {env_size} components stays below the \
             threshold {threshold:.6} (delta = {delta}, {mode} mode)"
        )));
    }
    // Invariant: `lo` fails the threshold, `hi` passes it.
    let (mut lo, mut hi) = (scan_cap, env_size);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if measure(mid)? >= threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `R_delta = env_size / f_delta`: how many disjoint sufficient fragments the
/// environment holds.
pub fn redundancy(env_size: usize, f_delta: usize) -> Result<f64> {
    if f_delta == 0 {
        return Err(Error::Domain {
            name: "f_delta",
            value: 0.0,
            domain: "integers >= 1",
        });
    }
    if f_delta > env_size {
        return Err(Error::InsufficientEnvironment(format!(
            "f_delta = {f_delta} exceeds the environment size {env_size}"
        )));
    }
    Ok(env_size as f64 / f_delta as f64)
}

/// Leading-order redundancy `env_size * xi / ln(1/delta)` with
/// `xi = -ln(gamma_sq)`.
///
/// `delta` is capped at 0.5: toward `delta -> 1` the expression diverges and
/// the expansion it comes from loses meaning.
pub fn asymptotic_redundancy(env_size: usize, gamma_sq: f64, delta: f64) -> Result<f64> {
    if !(gamma_sq > 0.0 && gamma_sq < 1.0) {
        return Err(Error::Domain {
            name: "gamma_sq",
            value: gamma_sq,
            domain: "(0, 1)",
        });
    }
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::Domain {
            name: "delta",
            value: delta,
            domain: "(0, 0.5]",
        });
    }
    Ok(env_size as f64 * (-gamma_sq.ln()) / (1.0 / delta).ln())
}
