//! Information a fragment carries about the pointer observable: Holevo
//! quantities, Helstrom discrimination error, the accessible-information
//! identity for pure binary branches, Fano bounds, and quantum mutual
//! information.
//!
//! Closed forms take the aggregate squared overlap `Gamma` of the fragment,
//! so homogeneous and inhomogeneous environments share one code path; numeric
//! paths exist for validation and assemble states explicitly.

use crate::error::{Error, Result};
use crate::model::BranchingState;
use crate::numerics::{
    binary_entropy, partial_trace, trace_norm, von_neumann_entropy, DensityMatrix,
};

/// Dimension cap on the numeric (explicit-state) measure paths.
pub const MEASURE_DIM_CAP: usize = 1 << 10;
/// Dimension cap on quantum mutual information inputs.
pub const QMI_DIM_CAP: usize = 1 << 13;
/// Binary discrimination errors may exceed 1/2 (or fall below 0) by at most
/// this much before clamping turns into a hard error.
pub const PE_CLAMP_SLACK: f64 = 1e-12;

/// Which information measure a curve column or threshold scan refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    /// Holevo information of the pointer ensemble seen by the fragment.
    HolevoPointer,
    /// Accessible information (equals `H_S - h(P_e)` for pure binary branches).
    Accessible,
    /// Quantum-Chernoff-bound information `H_S - h(C * Gamma)`.
    Qcb,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 3] = [
        MeasureKind::HolevoPointer,
        MeasureKind::Accessible,
        MeasureKind::Qcb,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MeasureKind::HolevoPointer => "holevo_pointer",
            MeasureKind::Accessible => "accessible_info",
            MeasureKind::Qcb => "qcb_info",
        }
    }
}

impl std::fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One row of an information-vs-fragment-size curve. Information values are
/// in bits; deficits are distances below the plateau `H_S`, computed by
/// cancellation-safe expressions where that matters.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoPoint {
    pub fragment_size: usize,
    /// Aggregate squared overlap of the fragment between the two branches.
    pub gamma_eff: f64,
    pub holevo_pointer: f64,
    pub accessible_info: f64,
    pub qcb_info: Option<f64>,
    pub qmi: Option<f64>,
    pub pe_helstrom: f64,
    pub pe_qcb: Option<f64>,
    pub deficit_holevo: f64,
    pub deficit_accessible: f64,
    pub deficit_qcb: Option<f64>,
}

impl InfoPoint {
    /// Checks the ranges every measure must satisfy against the plateau:
    /// information values in `[0, hs + 1e-9]`, binary discrimination errors
    /// in `[0, 1/2 + 1e-12]`.
    pub fn validate(&self, hs: f64) -> Result<()> {
        let infos = [
            Some(self.holevo_pointer),
            Some(self.accessible_info),
            self.qcb_info,
            self.qmi,
        ];
        for v in infos.into_iter().flatten() {
            if !(0.0..=hs + 1e-9).contains(&v) {
                return Err(Error::Domain {
                    name: "information value",
                    value: v,
                    domain: "[0, H_S + 1e-9]",
                });
            }
        }
        for pe in [Some(self.pe_helstrom), self.pe_qcb].into_iter().flatten() {
            if !(0.0..=0.5 + PE_CLAMP_SLACK).contains(&pe) {
                return Err(Error::Domain {
                    name: "error probability",
                    value: pe,
                    domain: "[0, 1/2 + 1e-12]",
                });
            }
        }
        Ok(())
    }

    pub fn info(&self, which: MeasureKind) -> Option<f64> {
        match which {
            MeasureKind::HolevoPointer => Some(self.holevo_pointer),
            MeasureKind::Accessible => Some(self.accessible_info),
            MeasureKind::Qcb => self.qcb_info,
        }
    }

    pub fn deficit(&self, which: MeasureKind) -> Option<f64> {
        match which {
            MeasureKind::HolevoPointer => Some(self.deficit_holevo),
            MeasureKind::Accessible => Some(self.deficit_accessible),
            MeasureKind::Qcb => self.deficit_qcb,
        }
    }
}

/// An information curve over fragment sizes, with the model parameters the
/// rows were generated from.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoCurve {
    pub p1: f64,
    /// Per-component squared overlap when the environment is homogeneous.
    pub gamma_sq: Option<f64>,
    /// The Chernoff prefactor `C` used for the qcb columns.
    pub prefactor: f64,
    pub points: Vec<InfoPoint>,
}

/// Enforces the documented clamp policy on binary discrimination errors:
/// values within [`PE_CLAMP_SLACK`] outside `[0, 1/2]` clamp silently,
/// anything farther out is an error.
pub fn clamp_error_probability(pe: f64) -> Result<f64> {
    if !pe.is_finite() || !(-PE_CLAMP_SLACK..=0.5 + PE_CLAMP_SLACK).contains(&pe) {
        return Err(Error::Domain {
            name: "pe",
            value: pe,
            domain: "[0, 1/2] (within 1e-12)",
        });
    }
    Ok(pe.clamp(0.0, 0.5))
}

/// Plateau deficits are binary entropies, so they live in [0, 1]; tolerate
/// float dust above 1 before handing them to the inverse entropy.
pub(crate) fn binary_entropy_deficit_guard(deficit: f64) -> Result<f64> {
    if !deficit.is_finite() || deficit > 1.0 + 1e-9 {
        return Err(Error::Domain {
            name: "deficit",
            value: deficit,
            domain: "[0, 1]",
        });
    }
    Ok(deficit.min(1.0))
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain {
            name,
            value: p,
            domain: "[0, 1]",
        });
    }
    Ok(())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain {
            name: "Gamma",
            value: gamma,
            domain: "[0, 1]",
        });
    }
    Ok(())
}

/// Holevo information of the ensemble `{(p_s, rho_{F|s})}` computed from
/// explicitly assembled conditional product states:
/// `H(sum_s p_s rho_s) - sum_s p_s H(rho_s)`.
///
/// This is the brute-force validation path; it refuses fragments larger than
/// [`MEASURE_DIM_CAP`], for which the closed form is the intended route.
pub fn holevo_pointer_numeric(b: &BranchingState) -> Result<f64> {
    let dim = b.fragment_dim();
    if dim > MEASURE_DIM_CAP {
        return Err(Error::DimensionCap {
            dim,
            cap: MEASURE_DIM_CAP,
            context: "holevo_pointer_numeric (use holevo_pointer_closed_form instead)",
        });
    }
    let probs = b.pointer().probabilities();
    let mut avg = crate::numerics::CMatrix::zeros(dim, dim);
    let mut conditional = 0.0;
    for (s, &p) in probs.iter().enumerate() {
        let rho = b.conditional_product(s)?;
        if p > 0.0 {
            conditional += p * von_neumann_entropy(&rho)?;
        }
        avg += rho.as_matrix().scale(p);
    }
    let chi = von_neumann_entropy(&DensityMatrix::new(avg)?)? - conditional;
    Ok(chi.max(0.0))
}

/// Holevo information of the pointer ensemble in the good-decoherence limit,
/// for a binary pointer with pure conditional states:
/// `h[(1 + sqrt(1 - 4 p1 p2 (1 - Gamma))) / 2]`.
///
/// `Gamma` is the fragment's aggregate squared overlap. Rises from 0 (at
/// `Gamma = 1`, no records) to the plateau `H_S` (at `Gamma = 0`).
pub fn holevo_pointer_closed_form(p1: f64, gamma: f64) -> Result<f64> {
    check_probability("p1", p1)?;
    check_gamma(gamma)?;
    if p1 == 0.0 || p1 == 1.0 {
        return Ok(0.0);
    }
    if gamma == 0.0 {
        return binary_entropy(p1);
    }
    let p2 = 1.0 - p1;
    let x = (1.0 - 4.0 * p1 * p2 * (1.0 - gamma)).max(0.0).sqrt();
    binary_entropy((1.0 + x) / 2.0)
}

/// Accessible information about the pointer value for a binary pointer with
/// pure conditional states: `H_S - h[(1 + sqrt(1 - 4 p1 p2 Gamma)) / 2]`,
/// which coincides with `H_S - h(P_e)` at the Helstrom error.
pub fn accessible_info_closed_form(p1: f64, gamma: f64) -> Result<f64> {
    check_probability("p1", p1)?;
    check_gamma(gamma)?;
    if p1 == 0.0 || p1 == 1.0 || gamma == 1.0 {
        return Ok(0.0);
    }
    if gamma == 0.0 {
        return binary_entropy(p1);
    }
    let p2 = 1.0 - p1;
    let x = (1.0 - 4.0 * p1 * p2 * gamma).max(0.0).sqrt();
    let hs = binary_entropy(p1)?;
    Ok((hs - binary_entropy((1.0 + x) / 2.0)?).max(0.0))
}

/// Minimal error probability for discriminating `rho1` (prior `p1`) from
/// `rho2` (prior `1 - p1`): `(1 - ||p1 rho1 - p2 rho2||_tr) / 2`.
pub fn helstrom_error_numeric(p1: f64, rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    check_probability("p1", p1)?;
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch(format!(
            "cannot discriminate states of dimension {} and {}",
            rho1.dim(),
            rho2.dim()
        )));
    }
    if rho1.dim() > MEASURE_DIM_CAP {
        return Err(Error::DimensionCap {
            dim: rho1.dim(),
            cap: MEASURE_DIM_CAP,
            context: "helstrom_error_numeric",
        });
    }
    let p2 = 1.0 - p1;
    let diff = rho1.as_matrix().scale(p1) - rho2.as_matrix().scale(p2);
    clamp_error_probability((1.0 - trace_norm(&diff)?) / 2.0)
}

/// Helstrom error for a binary pointer with pure conditional product states,
/// in terms of the fragment's aggregate squared overlap:
/// `(1 - sqrt(1 - 4 p1 p2 Gamma)) / 2`.
pub fn helstrom_error_pure_product(p1: f64, gamma: f64) -> Result<f64> {
    check_probability("p1", p1)?;
    check_gamma(gamma)?;
    let p2 = 1.0 - p1;
    let x = (1.0 - 4.0 * p1 * p2 * gamma).max(0.0).sqrt();
    clamp_error_probability((1.0 - x) / 2.0)
}

/// `H_S - h(P_e)`: the accessible information of a binary pure-state ensemble
/// expressed through its Helstrom error.
pub fn accessible_info_from_pe(hs: f64, pe: f64) -> Result<f64> {
    let pe = clamp_error_probability(pe)?;
    Ok(hs - binary_entropy(pe)?)
}

/// Logarithm base for the conditional-entropy correction term in
/// [`fano_lower_bound`]. Bits keeps all terms in the same unit; the nats
/// variant reproduces a mixed-unit form some references print.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FanoLogBase {
    Bits,
    Nats,
}

/// Fano lower bound on the information about a `D`-valued pointer given an
/// error probability: `hs - h(pe) - pe * log(D - 1)`.
pub fn fano_lower_bound(hs: f64, pe: f64, d: usize, base: FanoLogBase) -> Result<f64> {
    if d < 2 {
        return Err(Error::Domain {
            name: "D",
            value: d as f64,
            domain: "integers >= 2",
        });
    }
    let max_pe = 1.0 - 1.0 / d as f64;
    if !(0.0..=max_pe).contains(&pe) {
        return Err(Error::Domain {
            name: "pe",
            value: pe,
            domain: "[0, 1 - 1/D]",
        });
    }
    let log_term = match base {
        FanoLogBase::Bits => ((d - 1) as f64).log2(),
        FanoLogBase::Nats => ((d - 1) as f64).ln(),
    };
    Ok(hs - binary_entropy(pe)? - pe * log_term)
}

/// Quantum mutual information `H(A) + H(B) - H(AB)` in bits across the split
/// of `rho_joint`'s tensor factors into `side_a` and its complement.
pub fn qmi(rho_joint: &DensityMatrix, factor_dims: &[usize], side_a: &[usize]) -> Result<f64> {
    if rho_joint.dim() > QMI_DIM_CAP {
        return Err(Error::DimensionCap {
            dim: rho_joint.dim(),
            cap: QMI_DIM_CAP,
            context: "qmi",
        });
    }
    let side_b: Vec<usize> = (0..factor_dims.len())
        .filter(|f| !side_a.contains(f))
        .collect();
    if side_a.is_empty() || side_b.is_empty() {
        return Err(Error::DimensionMismatch(
            "qmi needs a nontrivial split: both sides must contain a factor".into(),
        ));
    }
    let rho_a = partial_trace(rho_joint, factor_dims, side_a)?;
    let rho_b = partial_trace(rho_joint, factor_dims, &side_b)?;
    let mi = von_neumann_entropy(&rho_a)? + von_neumann_entropy(&rho_b)?
        - von_neumann_entropy(rho_joint)?;
    debug_assert!(mi > -1e-9, "qmi fell below the negativity slack: {mi}");
    Ok(mi.max(0.0))
}
