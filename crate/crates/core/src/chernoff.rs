//! Quantum Chernoff bound machinery: generalized overlaps, optimization of
//! the Chernoff exponent parameter, the QCB information measure, decay
//! exponents, and cancellation-safe deficit curves.
//!
//! For a binary hypothesis pair with priors `(p1, p2)` and product
//! conditional states, the error-probability bound is
//! `min_c p1^c p2^(1-c) prod_k tr[rho_{k|1}^c rho_{k|2}^(1-c)]` over
//! `c` in [0, 1]; the log-objective is convex, so a golden-section search
//! plus a boundary comparison finds the minimum.

use crate::error::{Error, Result};
use crate::measures::{
    accessible_info_closed_form, binary_entropy_deficit_guard, clamp_error_probability,
    helstrom_error_pure_product, holevo_pointer_closed_form, InfoCurve, InfoPoint, MeasureKind,
};
use crate::numerics::{
    binary_entropy, hermitian_eig, inv_binary_entropy, psd_power, DensityMatrix, SUPPORT_EPS,
};

/// Absolute tolerance (in `c`) of the golden-section minimization.
pub const GOLDEN_TOL: f64 = 1e-10;
/// Iteration cap of the golden-section minimization.
pub const GOLDEN_MAX_ITER: usize = 200;
/// A state counts as pure when its purity is at least `1 - PURITY_SLACK`.
pub const PURITY_SLACK: f64 = 1e-10;
/// Below this aggregate overlap, plateau deficits switch from direct
/// subtraction to the leading-order expressions; the relative error of the
/// switched branch is O(Gamma log 1/Gamma) ~ 1e-9 at the threshold.
pub const DEFICIT_SWITCHOVER_GAMMA: f64 = 1e-10;
/// Default decay-fit window: fragment sizes whose aggregate overlap lies in
/// `[FIT_WINDOW_GAMMA_LO, FIT_WINDOW_GAMMA_HI]`.
pub const FIT_WINDOW_GAMMA_LO: f64 = 1e-8;
pub const FIT_WINDOW_GAMMA_HI: f64 = 1e-2;

/// Outcome of minimizing the Chernoff objective.
#[derive(Debug, Clone, PartialEq)]
pub struct ChernoffResult {
    /// The minimizing exponent parameter.
    pub c_star: f64,
    /// The minimized error-probability bound.
    pub pe_bound: f64,
    /// The prefactor `C` in `pe_bound ~ C * Gamma`: `min(p1, p2)` when every
    /// conditional state is pure, `sqrt(p1 p2)` otherwise.
    pub prefactor: f64,
    /// Mean decay rate, `-ln(product of overlaps at c_star) / #F`, in nats
    /// per component; infinite for perfectly distinguishable pairs.
    pub exponent_per_component: f64,
}

/// The two prefactor conventions for `pe ~ C * Gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prefactor {
    /// `min(p1, p2)`: exact for pure conditional states.
    MinProbability,
    /// `sqrt(p1 p2)`: the bound's prefactor for mixed conditional states.
    GeometricMean,
}

impl Prefactor {
    pub fn value(&self, p1: f64) -> f64 {
        let p2 = 1.0 - p1;
        match self {
            Prefactor::MinProbability => p1.min(p2),
            Prefactor::GeometricMean => (p1 * p2).sqrt(),
        }
    }
}

/// `tr[rho1^c rho2^(1-c)]`, the generalized overlap entering the Chernoff
/// bound. Any imaginary residue (below 1e-12 by construction) is discarded
/// and the result clamped to [0, 1].
pub fn generalized_overlap(rho1: &DensityMatrix, rho2: &DensityMatrix, c: f64) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch(format!(
            "overlap of states with dimensions {} and {}",
            rho1.dim(),
            rho2.dim()
        )));
    }
    let a = psd_power(rho1, c)?;
    let b = psd_power(rho2, 1.0 - c)?;
    let t = (a * b).trace();
    debug_assert!(t.im.abs() <= 1e-12, "overlap imaginary residue {}", t.im);
    Ok(t.re.clamp(0.0, 1.0))
}

/// Joint spectral data of a state pair, letting the overlap be re-evaluated
/// at many `c` values without repeating the eigendecompositions:
/// `tr[rho1^c rho2^(1-c)] = sum_ij l1_i^c l2_j^(1-c) |<u_i|v_j>|^2`,
/// restricted to the supports (eigenvalues above the dust threshold).
struct OverlapSpectra {
    lambda1: Vec<f64>,
    lambda2: Vec<f64>,
    /// `weights[i * lambda2.len() + j] = |<u_i|v_j>|^2`.
    weights: Vec<f64>,
}

impl OverlapSpectra {
    fn new(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<Self> {
        if rho1.dim() != rho2.dim() {
            return Err(Error::DimensionMismatch(format!(
                "overlap of states with dimensions {} and {}",
                rho1.dim(),
                rho2.dim()
            )));
        }
        let e1 = hermitian_eig(rho1.as_matrix())?;
        let e2 = hermitian_eig(rho2.as_matrix())?;
        let support = |vals: &[f64]| -> Result<Vec<(usize, f64)>> {
            let mut kept = Vec::new();
            for (i, &l) in vals.iter().enumerate() {
                if l < crate::numerics::EIG_CLIP_FLOOR {
                    return Err(Error::NegativeEigenvalue(l));
                }
                if l > SUPPORT_EPS {
                    kept.push((i, l));
                }
            }
            Ok(kept)
        };
        let s1 = support(&e1.eigenvalues)?;
        let s2 = support(&e2.eigenvalues)?;
        let mut weights = Vec::with_capacity(s1.len() * s2.len());
        for &(i, _) in &s1 {
            let u = e1.eigenvectors.column(i);
            for &(j, _) in &s2 {
                let v = e2.eigenvectors.column(j);
                weights.push(u.dotc(&v).norm_sqr());
            }
        }
        Ok(Self {
            lambda1: s1.into_iter().map(|(_, l)| l).collect(),
            lambda2: s2.into_iter().map(|(_, l)| l).collect(),
            weights,
        })
    }

    fn eval(&self, c: f64) -> f64 {
        let pow2: Vec<f64> = self.lambda2.iter().map(|l| l.powf(1.0 - c)).collect();
        let mut total = 0.0;
        for (i, &l1) in self.lambda1.iter().enumerate() {
            let l1c = l1.powf(c);
            let row = &self.weights[i * pow2.len()..(i + 1) * pow2.len()];
            for (w, p2) in row.iter().zip(&pow2) {
                total += l1c * p2 * w;
            }
        }
        total.clamp(0.0, 1.0)
    }
}

/// Minimizes the Chernoff error bound over the exponent parameter for a list
/// of per-component conditional-state pairs with priors `(p1, 1 - p1)`.
///
/// The log-objective is convex in `c`; a golden-section search (tolerance
/// [`GOLDEN_TOL`], at most [`GOLDEN_MAX_ITER`] iterations) is compared
/// against both boundaries, and an exact tie between boundaries resolves
/// toward the one whose prior prefactor is `min(p1, p2)`.
pub fn qcb_error_bound(
    p1: f64,
    comps: &[(DensityMatrix, DensityMatrix)],
) -> Result<ChernoffResult> {
    if !(0.0..=1.0).contains(&p1) {
        return Err(Error::Domain {
            name: "p1",
            value: p1,
            domain: "[0, 1]",
        });
    }
    if comps.is_empty() {
        return Err(Error::InvalidModel(
            "the Chernoff bound needs at least one conditional-state pair".into(),
        ));
    }
    let p2 = 1.0 - p1;
    let all_pure = comps
        .iter()
        .all(|(a, b)| a.purity() >= 1.0 - PURITY_SLACK && b.purity() >= 1.0 - PURITY_SLACK);
    let prefactor = if all_pure {
        Prefactor::MinProbability.value(p1)
    } else {
        Prefactor::GeometricMean.value(p1)
    };
    let spectra: Vec<OverlapSpectra> = comps
        .iter()
        .map(|(a, b)| OverlapSpectra::new(a, b))
        .collect::<Result<_>>()?;

    let overlap_product = |c: f64| -> f64 { spectra.iter().map(|s| s.eval(c)).product() };
    let pe_at = |c: f64| -> f64 { p1.powf(c) * p2.powf(1.0 - c) * overlap_product(c) };

    // A certain prior: the bound degenerates to 0 in the limit toward the
    // certain hypothesis' boundary.
    if p1 == 0.0 || p1 == 1.0 {
        let c_star = if p1 == 1.0 { 1.0 } else { 0.0 };
        let q = overlap_product(c_star);
        return Ok(ChernoffResult {
            c_star,
            pe_bound: 0.0,
            prefactor: 0.0,
            exponent_per_component: -q.ln() / comps.len() as f64,
        });
    }

    let objective = |c: f64| -> f64 { c * p1.ln() + (1.0 - c) * p2.ln() + overlap_product(c).ln() };

    // Golden-section on the convex log-objective.
    let gr = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut c1 = b - gr * (b - a);
    let mut c2 = a + gr * (b - a);
    let mut f1 = objective(c1);
    let mut f2 = objective(c2);
    for _ in 0..GOLDEN_MAX_ITER {
        if b - a < GOLDEN_TOL {
            break;
        }
        if f1 <= f2 {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - gr * (b - a);
            f1 = objective(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + gr * (b - a);
            f2 = objective(c2);
        }
    }
    let interior = 0.5 * (a + b);

    // Boundary comparison; fold order encodes the tie-break priority.
    let (near, far) = if p1 <= p2 { (1.0, 0.0) } else { (0.0, 1.0) };
    let mut c_star = near;
    let mut best = objective(near);
    for cand in [far, interior] {
        let val = objective(cand);
        if val < best {
            best = val;
            c_star = cand;
        }
    }

    let q = overlap_product(c_star);
    Ok(ChernoffResult {
        c_star,
        pe_bound: clamp_error_probability(pe_at(c_star))?,
        prefactor,
        exponent_per_component: -q.ln() / comps.len() as f64,
    })
}

/// QCB information `H_S - h(C * Gamma)`: the plateau minus the binary entropy
/// of the Chernoff error bound. `C * Gamma` passes through the standard
/// error-probability clamp.
pub fn qcb_info(hs: f64, c_prefactor: f64, gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain {
            name: "Gamma",
            value: gamma,
            domain: "[0, 1]",
        });
    }
    if c_prefactor < 0.0 {
        return Err(Error::Domain {
            name: "C",
            value: c_prefactor,
            domain: "[0, inf)",
        });
    }
    let pe = clamp_error_probability(c_prefactor * gamma)?;
    Ok(hs - binary_entropy(pe)?)
}

/// The universal per-component decay rate `xi = -ln(gamma_sq)` in nats.
pub fn analytic_exponent(gamma_sq: f64) -> Result<f64> {
    if !(gamma_sq > 0.0 && gamma_sq < 1.0) {
        return Err(Error::Domain {
            name: "gamma_sq",
            value: gamma_sq,
            domain: "(0, 1)",
        });
    }
    Ok(-gamma_sq.ln())
}

/// Leading-order plateau deficit `H_S - X` at aggregate overlap `Gamma`,
/// valid as `Gamma -> 0`:
///
/// - holevo: `p1 p2 log2(p2/p1) / (p2 - p1) * Gamma`
///   (limit `Gamma / (2 ln 2)` at `p1 = p2 = 1/2`)
/// - accessible: `p1 p2 log2(e / (p1 p2 Gamma)) * Gamma`
/// - qcb: `C log2(e / (C Gamma)) * Gamma`
pub fn leading_order_deficit_at_gamma(
    which: MeasureKind,
    p1: f64,
    gamma: f64,
    c_prefactor: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&p1) {
        return Err(Error::Domain {
            name: "p1",
            value: p1,
            domain: "[0, 1]",
        });
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain {
            name: "Gamma",
            value: gamma,
            domain: "[0, 1]",
        });
    }
    let p2 = 1.0 - p1;
    if gamma == 0.0 || p1 * p2 == 0.0 {
        return Ok(0.0);
    }
    Ok(match which {
        MeasureKind::HolevoPointer => {
            if p1 == p2 {
                gamma / (2.0 * std::f64::consts::LN_2)
            } else {
                p1 * p2 * (p2 / p1).log2() / (p2 - p1) * gamma
            }
        }
        MeasureKind::Accessible => {
            p1 * p2 * gamma * (std::f64::consts::E / (p1 * p2 * gamma)).log2()
        }
        MeasureKind::Qcb => {
            if c_prefactor == 0.0 {
                0.0
            } else {
                c_prefactor * gamma * (std::f64::consts::E / (c_prefactor * gamma)).log2()
            }
        }
    })
}

/// [`leading_order_deficit_at_gamma`] for a homogeneous fragment of `f`
/// components with per-component squared overlap `gamma_sq`.
pub fn leading_order_deficit(
    which: MeasureKind,
    p1: f64,
    gamma_sq: f64,
    f: usize,
    c_prefactor: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma_sq) {
        return Err(Error::Domain {
            name: "gamma_sq",
            value: gamma_sq,
            domain: "[0, 1]",
        });
    }
    leading_order_deficit_at_gamma(which, p1, gamma_sq.powi(f as i32), c_prefactor)
}

/// One closed-form curve row at aggregate overlap `gamma_eff`, using the
/// given Chernoff prefactor for the qcb columns. Deficits switch from direct
/// subtraction to the leading-order expressions once
/// `gamma_eff < DEFICIT_SWITCHOVER_GAMMA`.
pub fn closed_form_point(
    p1: f64,
    gamma_eff: f64,
    fragment_size: usize,
    prefactor: Prefactor,
) -> Result<InfoPoint> {
    let hs = binary_entropy(p1)?;
    let c = prefactor.value(p1);
    let holevo_pointer = holevo_pointer_closed_form(p1, gamma_eff)?;
    let accessible_info = accessible_info_closed_form(p1, gamma_eff)?;
    let pe_helstrom = helstrom_error_pure_product(p1, gamma_eff)?;
    let pe_qcb = clamp_error_probability(c * gamma_eff)?;
    let qcb = qcb_info(hs, c, gamma_eff)?;
    let (deficit_holevo, deficit_accessible, deficit_qcb) = if gamma_eff < DEFICIT_SWITCHOVER_GAMMA
    {
        (
            leading_order_deficit_at_gamma(MeasureKind::HolevoPointer, p1, gamma_eff, c)?,
            leading_order_deficit_at_gamma(MeasureKind::Accessible, p1, gamma_eff, c)?,
            leading_order_deficit_at_gamma(MeasureKind::Qcb, p1, gamma_eff, c)?,
        )
    } else {
        (
            (hs - holevo_pointer).max(0.0),
            (hs - accessible_info).max(0.0),
            (hs - qcb).max(0.0),
        )
    };
    Ok(InfoPoint {
        fragment_size,
        gamma_eff,
        holevo_pointer,
        accessible_info,
        qcb_info: Some(qcb),
        qmi: None,
        pe_helstrom,
        pe_qcb: Some(pe_qcb),
        deficit_holevo,
        deficit_accessible,
        deficit_qcb: Some(deficit_qcb),
    })
}

/// Closed-form information curve for a homogeneous environment with
/// per-component squared overlap `gamma_sq`, one row per fragment size.
pub fn closed_form_curve(
    p1: f64,
    gamma_sq: f64,
    fragment_sizes: &[usize],
    prefactor: Prefactor,
) -> Result<InfoCurve> {
    if !(0.0..=1.0).contains(&gamma_sq) {
        return Err(Error::Domain {
            name: "gamma_sq",
            value: gamma_sq,
            domain: "[0, 1]",
        });
    }
    let points = fragment_sizes
        .iter()
        .map(|&f| closed_form_point(p1, gamma_sq.powi(f as i32), f, prefactor))
        .collect::<Result<_>>()?;
    Ok(InfoCurve {
        p1,
        gamma_sq: Some(gamma_sq),
        prefactor: prefactor.value(p1),
        points,
    })
}

/// The default fit window: the inclusive fragment-size range whose rows have
/// `gamma_eff` within `[FIT_WINDOW_GAMMA_LO, FIT_WINDOW_GAMMA_HI]`.
pub fn fit_window(curve: &InfoCurve) -> Result<(usize, usize)> {
    let sizes: Vec<usize> = curve
        .points
        .iter()
        .filter(|p| (FIT_WINDOW_GAMMA_LO..=FIT_WINDOW_GAMMA_HI).contains(&p.gamma_eff))
        .map(|p| p.fragment_size)
        .collect();
    match (sizes.iter().min(), sizes.iter().max()) {
        (Some(&lo), Some(&hi)) if lo < hi => Ok((lo, hi)),
        _ => Err(Error::FitWindow(format!(
            "no fragment-size range with aggregate overlap in [{FIT_WINDOW_GAMMA_LO:.0e}, \
             {FIT_WINDOW_GAMMA_HI:.0e}]; extend the curve"
        ))),
    }
}

/// Least-squares estimate of the decay exponent (nats per component) of one
/// measure's plateau deficit over the inclusive fragment-size `window`.
///
/// Each deficit is first linearized: the holevo deficit decays as
/// `K e^(-xi F)` with constant prefactor, so `-ln(deficit)` is fitted
/// directly; the accessible and qcb deficits are `h(q)` for
/// `q(1-q) = p1 p2 Gamma` resp. `q = C Gamma`, so `q` is recovered with the
/// inverse binary entropy and `-ln(q(1-q))` resp. `-ln q` is fitted, which
/// removes the `log(1/Gamma)`-dependent prefactor exactly.
pub fn decay_exponent_fit(
    curve: &InfoCurve,
    which: MeasureKind,
    window: (usize, usize),
) -> Result<f64> {
    let (lo, hi) = window;
    if lo >= hi {
        return Err(Error::FitWindow(format!(
            "window [{lo}, {hi}] must contain at least two fragment sizes"
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for p in &curve.points {
        if p.fragment_size < lo || p.fragment_size > hi {
            continue;
        }
        let deficit = p
            .deficit(which)
            .ok_or_else(|| Error::FitWindow(format!("curve has no {which} deficit column")))?;
        if deficit <= 0.0 || deficit.is_nan() {
            return Err(Error::FitWindow(format!(
                "deficit of {which} at fragment size {} is not positive ({deficit}); \
                 the plateau is reached to machine precision, shrink the window",
                p.fragment_size
            )));
        }
        let y = match which {
            MeasureKind::HolevoPointer => -deficit.ln(),
            MeasureKind::Accessible => {
                let q = inv_binary_entropy(binary_entropy_deficit_guard(deficit)?)?;
                -(q * (1.0 - q)).ln()
            }
            MeasureKind::Qcb => {
                let q = inv_binary_entropy(binary_entropy_deficit_guard(deficit)?)?;
                -q.ln()
            }
        };
        xs.push(p.fragment_size as f64);
        ys.push(y);
    }
    if xs.len() < 2 {
        return Err(Error::FitWindow(format!(
            "window [{lo}, {hi}] covers {} curve point(s); at least 2 needed",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}
