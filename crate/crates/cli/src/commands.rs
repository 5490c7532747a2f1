//! The four sweep commands. Grid points are independent, so rows may be
//! evaluated on several workers (THREADS variable), but assembly is ordered
//! and single-writer: output is byte-identical at any worker count.

use qdarwin::chernoff::{
    analytic_exponent, closed_form_curve, closed_form_point, decay_exponent_fit, fit_window,
    qcb_error_bound, Prefactor,
};
use qdarwin::measures::{
    accessible_info_closed_form, helstrom_error_numeric, helstrom_error_pure_product,
    holevo_pointer_closed_form, holevo_pointer_numeric, InfoPoint, MeasureKind,
};
use qdarwin::model::{
    branching_state, cmaybe_from_gamma, fragment_overlap, DecoherenceModel, FragmentSpec,
    LocalState, PointerModel,
};
use qdarwin::numerics::{binary_entropy, CVector, DensityMatrix, PureState, C64};
use qdarwin::oracle::{
    evolve_full, good_decoherence_residual, grid_accessible_lower_bound, oracle_measures, FullState,
};
use qdarwin::redundancy::{asymptotic_redundancy, min_fragment_size, redundancy, RedundancyResult};

use crate::config::{Mode, SweepConfig};
use crate::table::{sig12, Cell, Table};
use crate::{core_err, CliError};

const INFO_COLUMNS: &[&str] = &[
    "fragment_size",
    "gamma_eff",
    "holevo_pointer",
    "accessible_info",
    "qcb_info",
    "pe_helstrom",
    "pe_qcb",
    "deficit_holevo",
    "deficit_accessible",
    "deficit_qcb",
];

const REDUNDANCY_COLUMNS: &[&str] = &[
    "measure",
    "delta",
    "f_delta",
    "r_delta",
    "r_asymptotic",
    "relative_gap",
    "status",
];

const CHECK_COLUMNS: &[&str] = &[
    "fragment_size",
    "check",
    "value",
    "reference",
    "difference",
    "tolerance",
    "status",
];

const FIT_COLUMNS: &[&str] = &[
    "measure",
    "fitted_exponent",
    "analytic_exponent",
    "abs_difference",
];

/// Aggregate squared overlap of the given components.
fn aggregate_overlap(gammas: &[f64]) -> f64 {
    gammas.iter().map(|g| g * g).product()
}

fn build_model(cfg: &SweepConfig) -> Result<DecoherenceModel, CliError> {
    let comps = cfg
        .gammas
        .iter()
        .map(|&g| cmaybe_from_gamma(g))
        .collect::<qdarwin::Result<Vec<_>>>()
        .map_err(core_err)?;
    DecoherenceModel::new(PointerModel::binary(cfg.p1).map_err(core_err)?, comps).map_err(core_err)
}

/// Full joint state of the configured model, started from the pointer-basis
/// superposition with populations `(p1, 1 - p1)`.
fn evolve(cfg: &SweepConfig) -> Result<FullState, CliError> {
    let model = build_model(cfg)?;
    let system = PureState::new(CVector::from_vec(vec![
        C64::new(cfg.p1.sqrt(), 0.0),
        C64::new((1.0 - cfg.p1).sqrt(), 0.0),
    ]))
    .map_err(core_err)?;
    evolve_full(&model, &LocalState::Pure(system)).map_err(core_err)
}

pub fn info_curve(cfg: &SweepConfig) -> Result<Table, CliError> {
    let threads = threads_from_env()?;
    let points = match cfg.mode {
        Mode::ClosedForm => run_rows(cfg, threads, |f| {
            closed_form_point(
                cfg.p1,
                aggregate_overlap(&cfg.gammas[..f]),
                f,
                Prefactor::MinProbability,
            )
        })?,
        Mode::Numeric => {
            let model = build_model(cfg)?;
            let hs = binary_entropy(cfg.p1).map_err(core_err)?;
            run_rows(cfg, threads, |f| numeric_point(&model, cfg.p1, hs, f))?
        }
        Mode::Oracle => {
            let full = evolve(cfg)?;
            run_rows(cfg, threads, |f| {
                oracle_measures(&full, &FragmentSpec::leading(f))
            })?
        }
    };
    let mut t = Table::new(INFO_COLUMNS);
    t.meta("config_sha256", cfg.sha256());
    for p in &points {
        t.row(vec![
            Cell::Int(p.fragment_size),
            Cell::Float(p.gamma_eff),
            Cell::Float(p.holevo_pointer),
            Cell::Float(p.accessible_info),
            Cell::opt(p.qcb_info),
            Cell::Float(p.pe_helstrom),
            Cell::opt(p.pe_qcb),
            Cell::Float(p.deficit_holevo),
            Cell::Float(p.deficit_accessible),
            Cell::opt(p.deficit_qcb),
        ]);
    }
    Ok(t)
}

fn run_rows<F>(cfg: &SweepConfig, threads: usize, point: F) -> Result<Vec<InfoPoint>, CliError>
where
    F: Fn(usize) -> qdarwin::Result<InfoPoint> + Sync,
{
    ordered_map(cfg.fragment_sizes.clone(), threads, point)
        .into_iter()
        .collect::<qdarwin::Result<Vec<_>>>()
        .map_err(core_err)
}

/// Measure one fragment size on the branching-state ensemble instead of the
/// closed forms: Holevo from conditional spectra, the discrimination error
/// from the exact two-hypothesis test, and the Chernoff bound from the
/// per-component overlap spectra.
fn numeric_point(
    model: &DecoherenceModel,
    p1: f64,
    hs: f64,
    f: usize,
) -> qdarwin::Result<InfoPoint> {
    let frag = FragmentSpec::leading(f);
    let gamma_eff = fragment_overlap(model, &frag, 0, 1)?;
    let b = branching_state(model, &frag)?;
    let holevo = holevo_pointer_numeric(&b)?;
    let pe = helstrom_error_numeric(p1, &b.conditional_product(0)?, &b.conditional_product(1)?)?;
    let deficit_accessible = binary_entropy(pe)?;
    let pairs = frag
        .indices()
        .iter()
        .map(|&k| {
            let comp = &model.components()[k];
            Ok((comp.conditional_density(0)?, comp.conditional_density(1)?))
        })
        .collect::<qdarwin::Result<Vec<(DensityMatrix, DensityMatrix)>>>()?;
    let qcb = qcb_error_bound(p1, &pairs)?;
    let deficit_qcb = binary_entropy(qcb.pe_bound)?;
    Ok(InfoPoint {
        fragment_size: f,
        gamma_eff,
        holevo_pointer: holevo,
        accessible_info: (hs - deficit_accessible).max(0.0),
        qcb_info: Some((hs - deficit_qcb).max(0.0)),
        qmi: None,
        pe_helstrom: pe,
        pe_qcb: Some(qcb.pe_bound),
        deficit_holevo: (hs - holevo).max(0.0),
        deficit_accessible,
        deficit_qcb: Some(deficit_qcb),
    })
}

pub fn redundancy_scan(cfg: &SweepConfig) -> Result<Table, CliError> {
    let gamma = cfg
        .homogeneous_gamma()
        .expect("validation guarantees a homogeneous environment");
    let gamma_sq = gamma * gamma;
    let env = cfg.env_size();
    let hs = binary_entropy(cfg.p1).map_err(core_err)?;
    let c_prefactor = cfg.p1.min(1.0 - cfg.p1);

    let mut t = Table::new(REDUNDANCY_COLUMNS);
    t.meta("config_sha256", cfg.sha256());
    for m in MeasureKind::ALL {
        for &delta in &cfg.deltas {
            let measure = |f: usize| -> qdarwin::Result<f64> {
                let g = gamma_sq.powi(f as i32);
                match m {
                    MeasureKind::HolevoPointer => holevo_pointer_closed_form(cfg.p1, g),
                    MeasureKind::Accessible => accessible_info_closed_form(cfg.p1, g),
                    MeasureKind::Qcb => qdarwin::chernoff::qcb_info(hs, c_prefactor, g),
                }
            };
            match min_fragment_size(measure, hs, delta, cfg.threshold.to_core(), env) {
                Ok(f_delta) => match asymptotic_redundancy(env, gamma_sq, delta) {
                    Ok(ra) => {
                        let res =
                            RedundancyResult::new(delta, f_delta, env, ra).map_err(core_err)?;
                        t.row(vec![
                            Cell::Text(m.as_str()),
                            Cell::Float(delta),
                            Cell::Int(res.f_delta),
                            Cell::Float(res.r_delta),
                            Cell::Float(res.r_asymptotic),
                            Cell::Float(res.relative_gap()),
                            Cell::Text("ok"),
                        ]);
                    }
                    Err(_) => {
                        let r_delta = redundancy(env, f_delta).map_err(core_err)?;
                        t.row(vec![
                            Cell::Text(m.as_str()),
                            Cell::Float(delta),
                            Cell::Int(f_delta),
                            Cell::Float(r_delta),
                            Cell::Empty,
                            Cell::Empty,
                            Cell::Text("asymptotic_out_of_domain"),
                        ]);
                    }
                },
                Err(qdarwin::Error::InsufficientEnvironment(_)) => {
                    t.row(vec![
                        Cell::Text(m.as_str()),
                        Cell::Float(delta),
                        Cell::Empty,
                        Cell::Empty,
                        Cell::Empty,
                        Cell::Empty,
                        Cell::Text("insufficient_environment"),
                    ]);
                }
                Err(e) => return Err(core_err(e)),
            }
        }
    }
    Ok(t)
}

/// Full-evolution cross-checks; returns the table and the number of failed
/// checks. Skipped rows never count as failures.
pub fn oracle_check(cfg: &SweepConfig) -> Result<(Table, usize), CliError> {
    let full = evolve(cfg)?;
    let superposed = cfg.p1 > 0.0 && cfg.p1 < 1.0;
    let spread = 2.0 * (cfg.p1 * (1.0 - cfg.p1)).sqrt();

    let mut t = Table::new(CHECK_COLUMNS);
    t.meta("config_sha256", cfg.sha256());
    let mut failed = 0;
    for &f in &cfg.fragment_sizes {
        let frag = FragmentSpec::leading(f);
        let gamma_closed = aggregate_overlap(&cfg.gammas[..f]);
        let residual = good_decoherence_residual(&full, &frag).map_err(core_err)?;
        let law = spread * cfg.gammas[f..].iter().product::<f64>();
        check_eq(
            &mut t,
            &mut failed,
            f,
            "residual_vs_record_overlap_law",
            residual,
            law,
            1e-9,
        );

        let point = oracle_measures(&full, &frag).map_err(core_err)?;
        let tol = (2.0 * residual).max(1e-6);
        let holevo_closed = holevo_pointer_closed_form(cfg.p1, gamma_closed).map_err(core_err)?;
        check_eq(
            &mut t,
            &mut failed,
            f,
            "holevo_vs_closed_form",
            point.holevo_pointer,
            holevo_closed,
            tol,
        );
        let pe_closed = helstrom_error_pure_product(cfg.p1, gamma_closed).map_err(core_err)?;
        check_eq(
            &mut t,
            &mut failed,
            f,
            "error_probability_vs_closed_form",
            point.pe_helstrom,
            pe_closed,
            tol,
        );

        if superposed {
            check_eq(
                &mut t,
                &mut failed,
                f,
                "record_overlap_vs_component_product",
                point.gamma_eff,
                gamma_closed,
                1e-9,
            );
        } else {
            // A pointer eigenstate leaves a single branch: there is no pair
            // of conditional states whose overlap could be measured.
            check_skip(
                &mut t,
                f,
                "record_overlap_vs_component_product",
                point.gamma_eff,
                gamma_closed,
                "skip_degenerate_system",
            );
        }

        // The joint mutual information converges on the Holevo value only
        // once the unobserved rest of the environment has dephased the
        // system; with nothing left outside the fragment it cannot.
        let qmi = point.qmi.unwrap_or(f64::NAN);
        if f == cfg.env_size() && superposed {
            check_skip(
                &mut t,
                f,
                "mutual_information_convergence",
                qmi,
                holevo_closed,
                "skip_expected_fail",
            );
        } else {
            check_eq(
                &mut t,
                &mut failed,
                f,
                "mutual_information_convergence",
                qmi,
                holevo_closed,
                (5.0 * residual).max(1e-9),
            );
        }

        if f == 1 {
            let grid =
                grid_accessible_lower_bound(&full, &frag, cfg.grid_resolution).map_err(core_err)?;
            let acc_closed = accessible_info_closed_form(cfg.p1, gamma_closed).map_err(core_err)?;
            check_eq(
                &mut t,
                &mut failed,
                f,
                "measurement_grid_vs_accessible_closed_form",
                grid,
                acc_closed,
                5e-3,
            );
            check_le(
                &mut t,
                &mut failed,
                f,
                "measurement_grid_below_holevo",
                grid,
                point.holevo_pointer,
                1e-9,
            );
        }
    }
    Ok((t, failed))
}

/// Equality check: passes when `|value - reference| <= tolerance`.
fn check_eq(
    t: &mut Table,
    failed: &mut usize,
    f: usize,
    name: &'static str,
    value: f64,
    reference: f64,
    tolerance: f64,
) {
    let difference = (value - reference).abs();
    let pass = difference <= tolerance;
    if !pass {
        *failed += 1;
    }
    t.row(vec![
        Cell::Int(f),
        Cell::Text(name),
        Cell::Float(value),
        Cell::Float(reference),
        Cell::Float(difference),
        Cell::Float(tolerance),
        Cell::Text(if pass { "pass" } else { "fail" }),
    ]);
}

/// One-sided check: passes when `value <= reference + tolerance`; the
/// difference column carries the signed excess.
fn check_le(
    t: &mut Table,
    failed: &mut usize,
    f: usize,
    name: &'static str,
    value: f64,
    reference: f64,
    tolerance: f64,
) {
    let excess = value - reference;
    let pass = excess <= tolerance;
    if !pass {
        *failed += 1;
    }
    t.row(vec![
        Cell::Int(f),
        Cell::Text(name),
        Cell::Float(value),
        Cell::Float(reference),
        Cell::Float(excess),
        Cell::Float(tolerance),
        Cell::Text(if pass { "pass" } else { "fail" }),
    ]);
}

fn check_skip(
    t: &mut Table,
    f: usize,
    name: &'static str,
    value: f64,
    reference: f64,
    status: &'static str,
) {
    t.row(vec![
        Cell::Int(f),
        Cell::Text(name),
        Cell::Float(value),
        Cell::Float(reference),
        Cell::Float((value - reference).abs()),
        Cell::Empty,
        Cell::Text(status),
    ]);
}

pub fn fit_exponent(cfg: &SweepConfig) -> Result<Table, CliError> {
    let gamma = cfg
        .homogeneous_gamma()
        .expect("validation guarantees a homogeneous environment");
    let gamma_sq = gamma * gamma;
    let curve = closed_form_curve(
        cfg.p1,
        gamma_sq,
        &cfg.fragment_sizes,
        Prefactor::MinProbability,
    )
    .map_err(core_err)?;
    let window = match cfg.window {
        Some(w) => {
            warn_if_outside_validity(gamma_sq, w);
            w
        }
        None => fit_window(&curve).map_err(core_err)?,
    };
    let analytic = analytic_exponent(gamma_sq).map_err(core_err)?;

    let mut t = Table::new(FIT_COLUMNS);
    t.meta("config_sha256", cfg.sha256());
    t.meta("fit_window", format!("{}..{}", window.0, window.1));
    for m in MeasureKind::ALL {
        let fitted = decay_exponent_fit(&curve, m, window).map_err(core_err)?;
        t.row(vec![
            Cell::Text(m.as_str()),
            Cell::Float(fitted),
            Cell::Float(analytic),
            Cell::Float((fitted - analytic).abs()),
        ]);
    }
    Ok(t)
}

fn warn_if_outside_validity(gamma_sq: f64, (lo, hi): (usize, usize)) {
    let top = gamma_sq.powi(lo as i32);
    let bottom = gamma_sq.powi(hi as i32);
    if top > 1e-2 || bottom < 1e-8 {
        eprintln!(
            "warning: window override {lo}..{hi} spans aggregate overlaps [{}, {}], outside \
             the validity range [1e-8, 1e-2]; the fit may be biased by non-asymptotic or \
             cancellation-dominated points",
            sig12(bottom),
            sig12(top),
        );
    }
}

/// Worker count from the optional THREADS variable; absent means 1.
fn threads_from_env() -> Result<usize, CliError> {
    match std::env::var("THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(1),
        Err(e) => Err(CliError::config(format!("THREADS: {e}"))),
        Ok(s) => parse_threads(&s),
    }
}

fn parse_threads(s: &str) -> Result<usize, CliError> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(CliError::config(format!(
            "THREADS must be a positive integer, got {s:?}"
        ))),
    }
}

/// Evaluate independent items on up to `threads` workers; results come back
/// in input order regardless of scheduling.
fn ordered_map<T, R, F>(items: Vec<T>, threads: usize, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync,
{
    if threads <= 1 || items.len() <= 1 {
        return items.into_iter().map(f).collect();
    }
    let workers = threads.min(items.len());
    let total = items.len();
    let mut buckets: Vec<Vec<(usize, T)>> = (0..workers).map(|_| Vec::new()).collect();
    for (i, item) in items.into_iter().enumerate() {
        buckets[i % workers].push((i, item));
    }
    let mut slots: Vec<Option<R>> = Vec::new();
    slots.resize_with(total, || None);
    std::thread::scope(|scope| {
        let f = &f;
        let handles: Vec<_> = buckets
            .into_iter()
            .map(|bucket| {
                scope.spawn(move || {
                    bucket
                        .into_iter()
                        .map(|(i, item)| (i, f(item)))
                        .collect::<Vec<(usize, R)>>()
                })
            })
            .collect();
        for handle in handles {
            for (i, r) in handle.join().expect("sweep worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect()
}
