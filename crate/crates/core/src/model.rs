//! Pure-decoherence models: a system whose pointer observable is conserved,
//! monitored by independent environment components.
//!
//! Each environment component starts in a fixed local state and evolves under
//! a propagator conditioned on the system's pointer value. The component
//! therefore acquires one conditional state per pointer value; the overlap of
//! those conditional states is the decoherence factor, and products of
//! overlaps over a fragment control everything downstream.

use crate::error::{Error, Result};
use crate::numerics::{
    max_hermiticity_deviation, psd_power, CMatrix, DensityMatrix, PureState, C64,
};

/// Unitarity tolerance on stored conditional propagators, `max |U^dag U - I|`.
pub const PROPAGATOR_UNITARITY_TOL: f64 = 1e-10;
/// Tolerance on the commutator of the system self-Hamiltonian with the
/// pointer observable.
pub const COMMUTATION_TOL: f64 = 1e-10;
/// Tolerance on `|sum p - 1|` for pointer probabilities.
pub const PROBABILITY_SUM_TOL: f64 = 1e-12;

/// The system's pointer observable: its eigenvalues and the probabilities of
/// finding the system in each pointer state.
#[derive(Debug, Clone, PartialEq)]
pub struct PointerModel {
    pointer_values: Vec<f64>,
    probabilities: Vec<f64>,
}

impl PointerModel {
    pub fn new(pointer_values: Vec<f64>, probabilities: Vec<f64>) -> Result<Self> {
        if pointer_values.len() < 2 {
            return Err(Error::InvalidModel(format!(
                "pointer observable needs at least 2 values, got {}",
                pointer_values.len()
            )));
        }
        if pointer_values.len() != probabilities.len() {
            return Err(Error::InvalidModel(format!(
                "{} pointer values but {} probabilities",
                pointer_values.len(),
                probabilities.len()
            )));
        }
        if !pointer_values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidModel("pointer values must be finite".into()));
        }
        for i in 0..pointer_values.len() {
            for j in i + 1..pointer_values.len() {
                if pointer_values[i] == pointer_values[j] {
                    return Err(Error::InvalidModel(format!(
                        "pointer values must be distinct (value {} repeats)",
                        pointer_values[i]
                    )));
                }
            }
        }
        for &p in &probabilities {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain {
                    name: "probability",
                    value: p,
                    domain: "[0, 1]",
                });
            }
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(Error::InvalidModel(format!(
                "pointer probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(Self {
            pointer_values,
            probabilities,
        })
    }

    /// Two pointer values 0 and 1 with probabilities `(p1, 1 - p1)`.
    pub fn binary(p1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p1) {
            return Err(Error::Domain {
                name: "p1",
                value: p1,
                domain: "[0, 1]",
            });
        }
        Self::new(vec![0.0, 1.0], vec![p1, 1.0 - p1])
    }

    /// Number of pointer values.
    pub fn dim(&self) -> usize {
        self.pointer_values.len()
    }

    pub fn pointer_values(&self) -> &[f64] {
        &self.pointer_values
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Shannon entropy of the pointer distribution in bits: the missing
    /// information about the system, and the plateau every information curve
    /// climbs toward. Summed in ascending probability order.
    pub fn missing_information(&self) -> f64 {
        let mut probs = self.probabilities.clone();
        probs.sort_by(f64::total_cmp);
        probs
            .iter()
            .map(|&p| if p == 0.0 { 0.0 } else { -p * p.log2() })
            .sum()
    }
}

/// Initial local state of one environment component.
#[derive(Debug, Clone, PartialEq)]
pub enum LocalState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl LocalState {
    pub fn dim(&self) -> usize {
        match self {
            LocalState::Pure(psi) => psi.dim(),
            LocalState::Mixed(rho) => rho.dim(),
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, LocalState::Pure(_))
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            LocalState::Pure(psi) => psi.to_density(),
            LocalState::Mixed(rho) => rho.clone(),
        }
    }
}

fn unitarity_deviation(u: &CMatrix) -> f64 {
    let n = u.nrows();
    let gram = u.adjoint() * u;
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((gram[(i, j)] - C64::new(expect, 0.0)).norm());
        }
    }
    dev
}

/// One environment degree of freedom: an initial state and one unitary
/// propagator per pointer value.
#[derive(Debug, Clone)]
pub struct EnvComponent {
    initial_state: LocalState,
    propagators: Vec<CMatrix>,
}

impl EnvComponent {
    pub fn new(initial_state: LocalState, propagators: Vec<CMatrix>) -> Result<Self> {
        if propagators.len() < 2 {
            return Err(Error::InvalidModel(format!(
                "a component needs one propagator per pointer value (at least 2), got {}",
                propagators.len()
            )));
        }
        let dim = initial_state.dim();
        for u in &propagators {
            if u.nrows() != u.ncols() {
                return Err(Error::NotSquare {
                    rows: u.nrows(),
                    cols: u.ncols(),
                });
            }
            if u.nrows() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "propagator is {}x{} but the component state has dimension {dim}",
                    u.nrows(),
                    u.ncols()
                )));
            }
            if !u.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite);
            }
            let dev = unitarity_deviation(u);
            if dev > PROPAGATOR_UNITARITY_TOL {
                return Err(Error::NotUnitary {
                    dev,
                    tol: PROPAGATOR_UNITARITY_TOL,
                });
            }
        }
        let comp = Self {
            initial_state,
            propagators,
        };
        // Unitarity already guarantees valid conditional states; materialize
        // them once so any surprise surfaces here, not deep in a sweep.
        for s in 0..comp.propagators.len() {
            comp.conditional_density(s)?;
        }
        Ok(comp)
    }

    pub fn dim(&self) -> usize {
        self.initial_state.dim()
    }

    pub fn initial_state(&self) -> &LocalState {
        &self.initial_state
    }

    pub fn num_pointer_values(&self) -> usize {
        self.propagators.len()
    }

    pub fn propagator(&self, s: usize) -> Result<&CMatrix> {
        self.propagators.get(s).ok_or(Error::PointerIndex {
            index: s,
            dim: self.propagators.len(),
        })
    }

    /// The state this component holds once the system's pointer value is `s`.
    pub fn conditional_state(&self, s: usize) -> Result<LocalState> {
        let u = self.propagator(s)?;
        Ok(match &self.initial_state {
            LocalState::Pure(psi) => LocalState::Pure(PureState::new(u * psi.as_vector())?),
            LocalState::Mixed(rho) => {
                LocalState::Mixed(DensityMatrix::new(u * rho.as_matrix() * u.adjoint())?)
            }
        })
    }

    pub fn conditional_density(&self, s: usize) -> Result<DensityMatrix> {
        Ok(self.conditional_state(s)?.to_density())
    }
}

/// A qubit prepared in `|0>` whose target bit rotates by angle `a` when the
/// system's pointer value is 1 and is left alone when it is 0.
///
/// The conditional propagator for pointer value 1 is the reflection
/// `sin a |0><0| + cos a (|0><1| + |1><0|) - sin a |1><1|`, so the two
/// conditional states overlap by `gamma = sin a`: `a = 0` writes a perfect
/// record, `a = pi/2` writes none.
pub fn cmaybe_component(a: f64) -> EnvComponent {
    let (s, c) = a.sin_cos();
    cmaybe_reflection(s, c)
}

/// [`cmaybe_component`] parametrized directly by the decoherence factor
/// `gamma = sin a` in [0, 1], avoiding the `asin`/`sin` round trip.
pub fn cmaybe_from_gamma(gamma: f64) -> Result<EnvComponent> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain {
            name: "gamma",
            value: gamma,
            domain: "[0, 1]",
        });
    }
    Ok(cmaybe_reflection(gamma, (1.0 - gamma * gamma).sqrt()))
}

fn cmaybe_reflection(s: f64, c: f64) -> EnvComponent {
    let re = |x: f64| C64::new(x, 0.0);
    let u0 = CMatrix::identity(2, 2);
    let u1 = CMatrix::from_row_slice(2, 2, &[re(s), re(c), re(c), re(-s)]);
    EnvComponent::new(LocalState::Pure(PureState::basis(2, 0)), vec![u0, u1])
        .expect("the reflection is unitary by construction")
}

/// A pointer observable plus the environment components monitoring it.
///
/// The system's own evolution must commute with the pointer observable, so it
/// can only contribute a phase per pointer branch; it is stored for
/// validation and for the full-state evolution in the oracle.
#[derive(Debug, Clone)]
pub struct DecoherenceModel {
    pointer: PointerModel,
    components: Vec<EnvComponent>,
    system_self_hamiltonian: Option<CMatrix>,
}

impl DecoherenceModel {
    pub fn new(pointer: PointerModel, components: Vec<EnvComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidModel(
                "the environment needs at least one component".into(),
            ));
        }
        for comp in &components {
            if comp.num_pointer_values() != pointer.dim() {
                return Err(Error::InvalidModel(format!(
                    "component has {} propagators but the pointer observable has {} values",
                    comp.num_pointer_values(),
                    pointer.dim()
                )));
            }
        }
        Ok(Self {
            pointer,
            components,
            system_self_hamiltonian: None,
        })
    }

    /// Replicates one component across an environment of `n` identical parts.
    pub fn homogeneous(pointer: PointerModel, component: EnvComponent, n: usize) -> Result<Self> {
        Self::new(pointer, vec![component; n])
    }

    /// Attach a system self-Hamiltonian. In the pointer basis it must be
    /// Hermitian and commute with the pointer observable `diag(pointer
    /// values)`, which (the values being distinct) forces it diagonal; its
    /// only effect is a phase per pointer branch.
    pub fn with_system_self_hamiltonian(mut self, h: CMatrix) -> Result<Self> {
        let d = self.pointer.dim();
        if h.nrows() != d || h.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "self-Hamiltonian is {}x{} but the pointer observable has {d} values",
                h.nrows(),
                h.ncols()
            )));
        }
        if !h.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let herm_dev = max_hermiticity_deviation(&h);
        if herm_dev > COMMUTATION_TOL {
            return Err(Error::NotHermitian {
                dev: herm_dev,
                tol: COMMUTATION_TOL,
            });
        }
        let pointer_obs = CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(self.pointer.pointer_values()[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let comm = &pointer_obs * &h - &h * pointer_obs;
        let dev = comm.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        if dev > COMMUTATION_TOL {
            return Err(Error::InvalidModel(format!(
                "self-Hamiltonian does not commute with the pointer observable \
                 (max commutator entry {dev:.3e}, tolerance {COMMUTATION_TOL:.3e})"
            )));
        }
        self.system_self_hamiltonian = Some(h);
        Ok(self)
    }

    pub fn pointer(&self) -> &PointerModel {
        &self.pointer
    }

    pub fn components(&self) -> &[EnvComponent] {
        &self.components
    }

    pub fn env_size(&self) -> usize {
        self.components.len()
    }

    /// The phase `exp(-i h_ss)` the system's own evolution puts on each
    /// pointer branch (unit time; identity when no self-Hamiltonian is set).
    pub fn system_self_phases(&self) -> Vec<C64> {
        match &self.system_self_hamiltonian {
            None => vec![C64::new(1.0, 0.0); self.pointer.dim()],
            Some(h) => (0..self.pointer.dim())
                .map(|s| (C64::new(0.0, -1.0) * h[(s, s)].re).exp())
                .collect(),
        }
    }
}

/// A subset of environment components, stored as sorted distinct indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentSpec {
    indices: Vec<usize>,
}

impl FragmentSpec {
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidModel(
                "fragment indices must be distinct".into(),
            ));
        }
        Ok(Self { indices })
    }

    pub fn empty() -> Self {
        Self {
            indices: Vec::new(),
        }
    }

    /// The first `n` components, `0..n`.
    pub fn leading(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn size(&self) -> usize {
        self.indices.len()
    }

    pub fn validate_for(&self, env_size: usize) -> Result<()> {
        match self.indices.last() {
            Some(&max) if max >= env_size => Err(Error::InvalidModel(format!(
                "fragment index {max} out of range for {env_size} components"
            ))),
            _ => Ok(()),
        }
    }
}

/// The ensemble a fragment sees in the good-decoherence limit: one product
/// conditional state per pointer value, kept in factored form.
#[derive(Debug, Clone)]
pub struct BranchingState {
    pointer: PointerModel,
    /// `conditional_factors[s][k]` is the state of the fragment's k-th
    /// component given pointer value `s`.
    conditional_factors: Vec<Vec<DensityMatrix>>,
}

impl BranchingState {
    pub fn new(
        pointer: PointerModel,
        conditional_factors: Vec<Vec<DensityMatrix>>,
    ) -> Result<Self> {
        if conditional_factors.len() != pointer.dim() {
            return Err(Error::InvalidModel(format!(
                "{} conditional products for {} pointer values",
                conditional_factors.len(),
                pointer.dim()
            )));
        }
        let sizes: Vec<usize> = conditional_factors[0].iter().map(|f| f.dim()).collect();
        for factors in &conditional_factors[1..] {
            let this: Vec<usize> = factors.iter().map(|f| f.dim()).collect();
            if this != sizes {
                return Err(Error::DimensionMismatch(
                    "conditional products must share factor dimensions across pointer values"
                        .into(),
                ));
            }
        }
        Ok(Self {
            pointer,
            conditional_factors,
        })
    }

    pub fn pointer(&self) -> &PointerModel {
        &self.pointer
    }

    pub fn num_factors(&self) -> usize {
        self.conditional_factors[0].len()
    }

    pub fn conditional_factors(&self, s: usize) -> Result<&[DensityMatrix]> {
        self.conditional_factors
            .get(s)
            .map(Vec::as_slice)
            .ok_or(Error::PointerIndex {
                index: s,
                dim: self.conditional_factors.len(),
            })
    }

    /// Total Hilbert dimension of the fragment (1 for an empty fragment).
    pub fn fragment_dim(&self) -> usize {
        self.conditional_factors[0]
            .iter()
            .map(DensityMatrix::dim)
            .product()
    }

    /// Assemble the explicit tensor product of the conditional factors for
    /// pointer value `s`; the empty product is the trivial 1x1 state.
    pub fn conditional_product(&self, s: usize) -> Result<DensityMatrix> {
        let factors = self.conditional_factors(s)?;
        let mut out = CMatrix::identity(1, 1);
        for f in factors {
            out = out.kronecker(f.as_matrix());
        }
        DensityMatrix::new(out)
    }
}

/// `tr[rho1^(1/2) rho2^(1/2)]`: the mixed-state overlap at symmetric exponent.
fn overlap_half(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    let a = psd_power(rho1, 0.5)?;
    let b = psd_power(rho2, 0.5)?;
    Ok((a * b).trace().re.clamp(0.0, 1.0))
}

/// Overlap of the two conditional states a component acquires under pointer
/// values `s1` and `s2`.
///
/// For a pure initial state this is the magnitude `|<psi_s1|psi_s2>|` (the
/// phase never enters any downstream formula); for a mixed initial state it
/// is the symmetric generalized overlap `tr[rho_s1^(1/2) rho_s2^(1/2)]`,
/// which already plays the role the *squared* pure overlap plays.
pub fn decoherence_factor(comp: &EnvComponent, s1: usize, s2: usize) -> Result<f64> {
    if s1 == s2 {
        return Err(Error::InvalidModel(format!(
            "decoherence factor needs two distinct pointer values, got {s1} and {s2}"
        )));
    }
    let c1 = comp.conditional_state(s1)?;
    let c2 = comp.conditional_state(s2)?;
    Ok(match (&c1, &c2) {
        (LocalState::Pure(a), LocalState::Pure(b)) => a.inner(b).norm().clamp(0.0, 1.0),
        _ => overlap_half(&c1.to_density(), &c2.to_density())?,
    })
}

/// Aggregate squared overlap of a fragment between pointer branches `s1` and
/// `s2`: the product over fragment components of `|gamma_k|^2` (pure) or the
/// generalized overlap (mixed). Empty fragments give 1.
pub fn fragment_overlap(
    model: &DecoherenceModel,
    frag: &FragmentSpec,
    s1: usize,
    s2: usize,
) -> Result<f64> {
    frag.validate_for(model.env_size())?;
    let mut product = 1.0;
    for &k in frag.indices() {
        let comp = &model.components()[k];
        let d = decoherence_factor(comp, s1, s2)?;
        product *= if comp.initial_state().is_pure() {
            d * d
        } else {
            d
        };
    }
    Ok(product)
}

/// The conditional product states a fragment holds in each pointer branch.
pub fn branching_state(model: &DecoherenceModel, frag: &FragmentSpec) -> Result<BranchingState> {
    frag.validate_for(model.env_size())?;
    let mut conditional_factors = Vec::with_capacity(model.pointer().dim());
    for s in 0..model.pointer().dim() {
        let mut factors = Vec::with_capacity(frag.size());
        for &k in frag.indices() {
            factors.push(model.components()[k].conditional_density(s)?);
        }
        conditional_factors.push(factors);
    }
    BranchingState::new(model.pointer().clone(), conditional_factors)
}
