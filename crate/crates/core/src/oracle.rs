//! Brute-force validation path: evolve the full system-plus-environment
//! state at small environment sizes and recompute every information measure
//! directly from it, with no closed-form shortcuts.
//!
//! Evolution is branch-wise: the interaction is diagonal in the pointer
//! basis, so each pointer value drives one product of component propagators.
//! The cost is a handful of Kronecker products per pointer-branch pair, never
//! an exponential of the global Hamiltonian.

use crate::chernoff::{generalized_overlap, qcb_error_bound};
use crate::error::{Error, Result};
use crate::measures::{clamp_error_probability, helstrom_error_numeric, qmi, InfoPoint};
use crate::model::{DecoherenceModel, FragmentSpec, LocalState};
use crate::numerics::{
    binary_entropy, partial_trace, partial_trace_pure, trace_norm, von_neumann_entropy, CMatrix,
    CVector, DensityMatrix, PureState, C64,
};

/// Cap on the full system-plus-environment dimension.
pub const FULL_DIM_CAP: usize = 1 << 13;

/// Coarsest measurement grid accepted by [`grid_accessible_lower_bound`].
pub const MIN_GRID_RESOLUTION: usize = 8;

/// A state of the whole system-plus-environment, kept as a vector whenever
/// everything is pure.
#[derive(Debug, Clone)]
pub enum GlobalState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

/// The full state plus its tensor-factor layout: factor 0 is the system,
/// factors `1..` are the environment components in model order.
#[derive(Debug, Clone)]
pub struct FullState {
    state: GlobalState,
    factor_dims: Vec<usize>,
}

impl FullState {
    pub fn new(state: GlobalState, factor_dims: Vec<usize>) -> Result<Self> {
        let dim = match &state {
            GlobalState::Pure(psi) => psi.dim(),
            GlobalState::Mixed(rho) => rho.dim(),
        };
        let prod: usize = factor_dims.iter().product();
        if factor_dims.len() < 2 || prod != dim {
            return Err(Error::DimensionMismatch(format!(
                "factor dims {factor_dims:?} do not describe a state of dimension {dim}"
            )));
        }
        Ok(Self { state, factor_dims })
    }

    pub fn state(&self) -> &GlobalState {
        &self.state
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    pub fn system_dim(&self) -> usize {
        self.factor_dims[0]
    }

    pub fn env_size(&self) -> usize {
        self.factor_dims.len() - 1
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.state, GlobalState::Pure(_))
    }

    pub fn to_density(&self) -> DensityMatrix {
        match &self.state {
            GlobalState::Pure(psi) => psi.to_density(),
            GlobalState::Mixed(rho) => rho.clone(),
        }
    }
}

/// Evolves the initial product state under the controlled dynamics: pointer
/// value `s` applies the product of the components' `s`-conditioned
/// propagators, and the system's own evolution contributes the per-branch
/// phases. Mixed inputs (system or components) produce the evolved global
/// density assembled block by pointer-branch pair, which reduces to a convex
/// combination of branch evolutions for diagonal system states.
pub fn evolve_full(model: &DecoherenceModel, initial_system: &LocalState) -> Result<FullState> {
    let d = model.pointer().dim();
    if initial_system.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "system state has dimension {} but the pointer observable has {d} values",
            initial_system.dim()
        )));
    }
    let mut factor_dims = Vec::with_capacity(1 + model.env_size());
    factor_dims.push(d);
    factor_dims.extend(model.components().iter().map(|c| c.dim()));
    let sub: usize = factor_dims[1..].iter().product();
    let full_dim = d * sub;
    if full_dim > FULL_DIM_CAP {
        return Err(Error::DimensionCap {
            dim: full_dim,
            cap: FULL_DIM_CAP,
            context: "full-state evolution",
        });
    }
    let phases = model.system_self_phases();
    let all_pure = initial_system.is_pure()
        && model
            .components()
            .iter()
            .all(|c| c.initial_state().is_pure());

    if all_pure {
        let psi_s = match initial_system {
            LocalState::Pure(psi) => psi.as_vector(),
            LocalState::Mixed(_) => unreachable!(),
        };
        let mut full = CVector::zeros(full_dim);
        for s in 0..d {
            let amp = psi_s[s] * phases[s];
            if amp.norm() == 0.0 {
                continue;
            }
            let mut branch = CVector::from_element(1, C64::new(1.0, 0.0));
            for comp in model.components() {
                let cond = match comp.conditional_state(s)? {
                    LocalState::Pure(psi) => psi,
                    LocalState::Mixed(_) => unreachable!(),
                };
                branch = branch.kronecker(cond.as_vector());
            }
            full.rows_mut(s * sub, sub).copy_from(&(branch * amp));
        }
        return FullState::new(GlobalState::Pure(PureState::new(full)?), factor_dims);
    }

    let rho_s = initial_system.to_density();
    let mut full = CMatrix::zeros(full_dim, full_dim);
    for s in 0..d {
        for t in 0..d {
            let scale = rho_s.as_matrix()[(s, t)] * phases[s] * phases[t].conj();
            if scale.norm() == 0.0 {
                continue;
            }
            let mut block = CMatrix::identity(1, 1);
            for comp in model.components() {
                let cross = match comp.initial_state() {
                    LocalState::Pure(_) => {
                        let vs = match comp.conditional_state(s)? {
                            LocalState::Pure(psi) => psi,
                            LocalState::Mixed(_) => unreachable!(),
                        };
                        let vt = match comp.conditional_state(t)? {
                            LocalState::Pure(psi) => psi,
                            LocalState::Mixed(_) => unreachable!(),
                        };
                        vs.as_vector() * vt.as_vector().adjoint()
                    }
                    LocalState::Mixed(rho) => {
                        comp.propagator(s)? * rho.as_matrix() * comp.propagator(t)?.adjoint()
                    }
                };
                block = block.kronecker(&cross);
            }
            full.view_mut((s * sub, t * sub), (sub, sub))
                .copy_from(&(block * scale));
        }
    }
    FullState::new(GlobalState::Mixed(DensityMatrix::new(full)?), factor_dims)
}

/// Reduced density matrix over the given factor indices (0 = system).
/// Indices may arrive in any order; the kept factors stay in ascending
/// position order.
pub fn reduced_state(full: &FullState, subsystems: &[usize]) -> Result<DensityMatrix> {
    let mut keep = subsystems.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.len() != subsystems.len() {
        return Err(Error::DimensionMismatch(
            "subsystem indices must be distinct".into(),
        ));
    }
    match &full.state {
        GlobalState::Pure(psi) => partial_trace_pure(psi, &full.factor_dims, &keep),
        GlobalState::Mixed(rho) => partial_trace(rho, &full.factor_dims, &keep),
    }
}

/// The system-plus-fragment reduction: factor 0 plus the fragment's
/// components.
fn system_fragment_state(full: &FullState, frag: &FragmentSpec) -> Result<DensityMatrix> {
    frag.validate_for(full.env_size())?;
    let mut keep = Vec::with_capacity(1 + frag.size());
    keep.push(0);
    keep.extend(frag.indices().iter().map(|&k| k + 1));
    reduced_state(full, &keep)
}

/// Trace distance between the system-fragment state and its dephasing in the
/// pointer basis, `|| rho_SF - sum_s |s><s| rho_SF |s><s| ||_tr`.
///
/// Zero exactly when the state already has the branching form; for a pure
/// global state built from one-qubit records it equals twice the initial
/// pointer coherence times the product of the left-out components' overlaps,
/// so it shrinks geometrically as components are added outside the fragment.
pub fn good_decoherence_residual(full: &FullState, frag: &FragmentSpec) -> Result<f64> {
    let rho_sf = system_fragment_state(full, frag)?;
    let d = full.system_dim();
    let sub = rho_sf.dim() / d;
    let mut off_diag = rho_sf.into_matrix();
    for s in 0..d {
        off_diag
            .view_mut((s * sub, s * sub), (sub, sub))
            .fill(C64::new(0.0, 0.0));
    }
    trace_norm(&off_diag)
}

/// All measures recomputed directly from the evolved state for a binary
/// pointer observable: quantum mutual information of the system-fragment
/// reduction, the Holevo bound of the ensemble a pointer-basis measurement
/// of the system leaves on the fragment, the exact Helstrom error between
/// the two conditional fragment states, and the Chernoff bound on it.
///
/// The returned point reports what was measured; in particular `qmi` may
/// legitimately exceed the plateau when the fragment is more than half of a
/// pure environment, so [`InfoPoint::validate`] is only meaningful for
/// plateau-regime configurations.
pub fn oracle_measures(full: &FullState, frag: &FragmentSpec) -> Result<InfoPoint> {
    let d = full.system_dim();
    if d != 2 {
        return Err(Error::InvalidModel(format!(
            "direct measure extraction discriminates two conditional states; \
             the pointer observable has {d} values"
        )));
    }
    let rho_sf = system_fragment_state(full, frag)?;
    let sub = rho_sf.dim() / 2;
    let qmi_val = qmi(&rho_sf, &[2, sub], &[0])?;

    let m = rho_sf.as_matrix();
    let block = |s: usize| m.view((s * sub, s * sub), (sub, sub)).into_owned();
    let b0 = block(0);
    let b1 = block(1);
    let p0 = b0.trace().re.clamp(0.0, 1.0);
    let hs = binary_entropy(p0)?;

    let zero_point = |gamma_eff: f64| InfoPoint {
        fragment_size: frag.size(),
        gamma_eff,
        holevo_pointer: 0.0,
        accessible_info: 0.0,
        qcb_info: Some(0.0),
        qmi: Some(qmi_val),
        pe_helstrom: 0.0,
        pe_qcb: Some(0.0),
        deficit_holevo: hs,
        deficit_accessible: hs,
        deficit_qcb: Some(hs),
    };
    // One pointer branch carries no weight: nothing to discriminate.
    if !(1e-14..=1.0 - 1e-14).contains(&p0) {
        return Ok(zero_point(1.0));
    }

    let cond0 = DensityMatrix::new(b0.clone() / C64::new(p0, 0.0))?;
    let cond1 = DensityMatrix::new(b1.clone() / C64::new(1.0 - p0, 0.0))?;
    let rho_f = DensityMatrix::new(b0 + b1)?;

    let holevo = (von_neumann_entropy(&rho_f)?
        - p0 * von_neumann_entropy(&cond0)?
        - (1.0 - p0) * von_neumann_entropy(&cond1)?)
    .max(0.0);

    let pe = helstrom_error_numeric(p0, &cond0, &cond1)?;
    let gamma_eff = generalized_overlap(&cond0, &cond1, 0.5)?;
    let deficit_accessible = binary_entropy(clamp_error_probability(pe)?)?;

    let chernoff = qcb_error_bound(p0, &[(cond0, cond1)])?;
    let deficit_qcb = binary_entropy(clamp_error_probability(chernoff.prefactor * gamma_eff)?)?;

    Ok(InfoPoint {
        fragment_size: frag.size(),
        gamma_eff,
        holevo_pointer: holevo,
        accessible_info: (hs - deficit_accessible).max(0.0),
        qcb_info: Some((hs - deficit_qcb).max(0.0)),
        qmi: Some(qmi_val),
        pe_helstrom: pe,
        pe_qcb: Some(chernoff.pe_bound),
        deficit_holevo: hs - holevo,
        deficit_accessible,
        deficit_qcb: Some(deficit_qcb),
    })
}

/// Best classical mutual information between the system's pointer-basis
/// outcomes and a projective measurement of a one-qubit fragment, maximized
/// over a deterministic direction grid. A lower bound on the accessible
/// information by construction.
///
/// The grid is equal-area in `cos(theta)` with both poles included (so the
/// pointer-aligned measurement is always available) and uniform in `phi`.
pub fn grid_accessible_lower_bound(
    full: &FullState,
    frag: &FragmentSpec,
    grid_resolution: usize,
) -> Result<f64> {
    if frag.size() != 1 {
        return Err(Error::InvalidModel(format!(
            "the measurement grid searches a single component, got a fragment of {}",
            frag.size()
        )));
    }
    if grid_resolution < MIN_GRID_RESOLUTION {
        return Err(Error::Domain {
            name: "grid_resolution",
            value: grid_resolution as f64,
            domain: ">= 8",
        });
    }
    let rho_sf = system_fragment_state(full, frag)?;
    let d = full.system_dim();
    let sub = rho_sf.dim() / d;
    if sub != 2 {
        return Err(Error::InvalidModel(format!(
            "the measurement grid needs a qubit fragment, got dimension {sub}"
        )));
    }

    // Unnormalized conditional blocks: p(s) = tr B_s, and the joint outcome
    // weight with projector P is tr(P B_s).
    let m = rho_sf.as_matrix();
    let blocks: Vec<[C64; 2]> = (0..d)
        .map(|s| [m[(s * sub, s * sub)], m[(s * sub, s * sub + 1)]])
        .collect();
    let diag1: Vec<f64> = (0..d).map(|s| m[(s * sub + 1, s * sub + 1)].re).collect();
    let p_sys: Vec<f64> = (0..d).map(|s| blocks[s][0].re + diag1[s]).collect();

    let mut best = 0.0f64;
    let r = grid_resolution;
    for j in 0..r {
        let z = -1.0 + 2.0 * j as f64 / (r - 1) as f64;
        let radial = (1.0 - z * z).max(0.0).sqrt();
        for i in 0..r {
            let phi = 2.0 * std::f64::consts::PI * i as f64 / r as f64;
            let (nx, ny) = (radial * phi.cos(), radial * phi.sin());
            // tr(P_+ B) for P_+ = (I + n.sigma)/2 with Hermitian B.
            let mut joint = vec![[0.0f64; 2]; d];
            let mut p_out = [0.0f64; 2];
            for s in 0..d {
                let b00 = blocks[s][0].re;
                let b01 = blocks[s][1];
                let q = (0.5 * ((1.0 + z) * b00 + (1.0 - z) * diag1[s]) + nx * b01.re
                    - ny * b01.im)
                    .clamp(0.0, p_sys[s]);
                joint[s] = [q, p_sys[s] - q];
                p_out[0] += q;
                p_out[1] += p_sys[s] - q;
            }
            let mut mi = 0.0;
            for s in 0..d {
                for o in 0..2 {
                    let w = joint[s][o];
                    if w > 0.0 {
                        mi += w * (w / (p_sys[s] * p_out[o])).log2();
                    }
                }
            }
            if mi > best {
                best = mi;
            }
        }
    }
    Ok(best)
}
