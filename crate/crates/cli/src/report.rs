//! Executes a validated configuration and assembles the run report.

use std::time::Instant;

use ionsqueeze::analysis::{
    covariance, mode_entanglement_entropy, optimal_epr_variance, squeezing_db, EprOptimum,
};
use ionsqueeze::dynamics::{rwa_point, ExpansionOrder, PhysicalParams};
use ionsqueeze::propagators::EffectiveCoupling;
use ionsqueeze::protocols::{
    convention_self_test, general_squeezed_protocol, initial_squeeze_state, internal_state_deviation,
    squeezed_vacuum_protocol, superposition_coefficients, superposition_protocol, ConventionReport,
    ProtocolResult, StageRecord, WeightList, TARGET_INFIDELITY_TOL,
};
use ionsqueeze::{make_space, MotionalState, SpaceDescriptor, Tolerances, C64};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Command, Displacement, ProtocolConfig, Squeezing, Sweep, DEFAULT_CUTOFF};

/// Largest infidelity of a post-selected superposition against its expansion.
pub const SUPERPOSITION_INFIDELITY_TOL: f64 = 1e-8;
/// Largest gap between the exact probability and formula times product norm.
pub const PROBABILITY_AUDIT_TOL: f64 = 1e-10;
/// Allowed deviation of the minimal EPR variance from `e^{-2r}/2`.
pub const EPR_VARIANCE_TOL: f64 = 1e-4;
/// Allowed deviation of the conjugate EPR variance product from 1/4.
pub const VARIANCE_PRODUCT_TOL: f64 = 1e-6;
/// Allowed change of the internal reduced state during squeezing.
pub const INTERNAL_DEVIATION_TOL: f64 = 1e-10;
/// Allowed mismatch between expm and the closed-form squeezed vacuum.
pub const ANCHOR_TOL: f64 = 1e-8;

/// Defaults echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct Defaults {
    pub n_c_cut: i64,
    pub n_r_cut: i64,
    pub tolerances: Tolerances,
    pub target_infidelity: f64,
    pub superposition_infidelity: f64,
    pub probability_audit: f64,
    pub epr_variance: f64,
    pub variance_product: f64,
    pub internal_deviation: f64,
    pub norm_drift: f64,
}

impl Default for Defaults {
    fn default() -> Self {
        Self {
            n_c_cut: DEFAULT_CUTOFF,
            n_r_cut: DEFAULT_CUTOFF,
            tolerances: Tolerances::default(),
            target_infidelity: TARGET_INFIDELITY_TOL,
            superposition_infidelity: SUPERPOSITION_INFIDELITY_TOL,
            probability_audit: PROBABILITY_AUDIT_TOL,
            epr_variance: EPR_VARIANCE_TOL,
            variance_product: VARIANCE_PRODUCT_TOL,
            internal_deviation: INTERNAL_DEVIATION_TOL,
            norm_drift: ionsqueeze::dynamics::NORM_DRIFT_TOL,
        }
    }
}

/// A numeric output together with the tolerance it was checked against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// `value <= tolerance`.
    fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            target: None,
            tolerance,
            passed: value <= tolerance,
        }
    }

    /// `|value - target| <= tolerance`.
    fn near(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            target: Some(target),
            tolerance,
            passed: (value - target).abs() <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Epr {
    pub phi: f64,
    pub minus: f64,
    pub plus: f64,
    pub minus_db: f64,
    pub product: f64,
}

impl From<EprOptimum> for Epr {
    fn from(e: EprOptimum) -> Self {
        Self {
            phi: e.phi,
            minus: e.minus,
            plus: e.plus,
            minus_db: squeezing_db(e.minus).unwrap_or(f64::NAN),
            product: e.minus * e.plus,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SqueezeResults {
    pub g: [f64; 2],
    pub squeezing_factor: f64,
    pub squeeze_sign: i8,
    pub tmsv_fidelity: f64,
    pub purity: f64,
    pub internal_state_deviation: f64,
    pub epr: Epr,
    pub symplectic_eigenvalues: [f64; 2],
    pub entropy_bits: f64,
    pub tail_mass: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuperposeResults {
    pub g: [f64; 2],
    pub cycles: usize,
    pub coefficients: Vec<[f64; 2]>,
    pub per_cycle_probability: Vec<f64>,
    pub cumulative_probability: f64,
    pub formula_probability: f64,
    /// `"expected"` when the exact probability differs from the formula.
    pub formula_mismatch: &'static str,
    pub probability_audit: Vec<f64>,
    pub prediction_fidelity: f64,
    pub purity: f64,
    pub epr: Epr,
    pub entropy_bits: f64,
    pub tail_mass: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneralResults {
    pub g: [f64; 2],
    pub beta_c: [f64; 2],
    pub beta_r: [f64; 2],
    pub squeezing_factor: f64,
    pub stages: Vec<StageRecord>,
    pub target_fidelity: f64,
    pub convention_report: ConventionReport,
    pub epr: Epr,
    pub entropy_bits: f64,
    pub tail_mass: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RwaRow {
    pub index: usize,
    pub eta: f64,
    pub eta_r: f64,
    pub omega_over_nu: f64,
    pub omega: f64,
    pub nu: f64,
    pub t_final: f64,
    pub infidelity: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub norm_drift: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RwaResults {
    pub order: ExpansionOrder,
    pub r: f64,
    /// Laser frequencies `omega_0 -+ (mu + nu)` of the first point.
    pub laser_frequencies: [f64; 2],
    pub rows: Vec<RwaRow>,
    pub monotone_non_increasing: bool,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Results {
    Squeeze(SqueezeResults),
    Superpose(SuperposeResults),
    General(GeneralResults),
    ValidateRwa(RwaResults),
    Conventions(ConventionReport),
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Command,
    pub seedless: bool,
    pub defaults: Defaults,
    pub config: ProtocolConfig,
    pub results: Results,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl RunReport {
    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub seedless: bool,
    pub timings: bool,
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn complex(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

fn space(config: &ProtocolConfig) -> ionsqueeze::Result<SpaceDescriptor> {
    make_space(config.n_c_cut, config.n_r_cut)
}

fn squeezing_g(config: &ProtocolConfig) -> C64 {
    match config.squeezing.expect("validated config has squeezing") {
        Squeezing::Direct { g } => complex(g),
        Squeezing::Physical { omega, eta, eta_r, t } => EffectiveCoupling { omega, eta, eta_r, t }.g(),
    }
}

fn displacements(config: &ProtocolConfig) -> (C64, C64) {
    match config.displacement.expect("validated config has displacement") {
        Displacement::Direct { beta_c, beta_r } => (complex(beta_c), complex(beta_r)),
        Displacement::Timed { t_c, t_r } => match config.squeezing {
            Some(Squeezing::Physical { omega, eta, eta_r, .. }) => {
                (C64::new(0.0, eta * omega * t_c), C64::new(0.0, eta_r * omega * t_r))
            }
            _ => unreachable!("validated config pairs timed displacements with a physical coupling"),
        },
    }
}

fn moments(motion: &MotionalState, tol: &Tolerances) -> ionsqueeze::Result<(Epr, [f64; 2], f64)> {
    let cov = covariance(motion, &tol.guard())?;
    let (s1, s2) = cov.symplectic_eigenvalues();
    let entropy = mode_entanglement_entropy(motion)?;
    Ok((optimal_epr_variance(&cov).into(), [s1, s2], entropy))
}

fn purity_checks(stages: &[StageRecord], tol: &Tolerances, checks: &mut Vec<Check>) {
    for s in stages {
        checks.push(Check::near(format!("purity:{}", s.stage), s.purity, 1.0, tol.purity));
    }
}

fn epr_checks(epr: &Epr, r: f64, checks: &mut Vec<Check>) {
    checks.push(Check::near("epr_min_variance", epr.minus, (-2.0 * r).exp() / 2.0, EPR_VARIANCE_TOL));
    checks.push(Check::near("epr_variance_product", epr.product, 0.25, VARIANCE_PRODUCT_TOL));
}

fn run_squeeze(config: &ProtocolConfig, checks: &mut Vec<Check>) -> ionsqueeze::Result<Results> {
    let tol = &config.tolerances;
    let sp = space(config)?;
    let g = squeezing_g(config);
    let result = squeezed_vacuum_protocol(sp, g, tol)?;
    let deviation = internal_state_deviation(&result.final_state, &initial_squeeze_state(sp))?;
    let (epr, symplectic, entropy) = moments(&result.motion, tol)?;
    let r = 2.0 * g.norm();

    checks.push(Check::at_most("tmsv_infidelity", 1.0 - result.target_fidelity, TARGET_INFIDELITY_TOL));
    purity_checks(&result.stages, tol, checks);
    checks.push(Check::at_most("internal_state_deviation", deviation, INTERNAL_DEVIATION_TOL));
    epr_checks(&epr, r, checks);
    checks.push(Check::at_most("tail_mass", result.tail_mass, tol.tail_budget));

    Ok(Results::Squeeze(SqueezeResults {
        g: pair(g),
        squeezing_factor: r,
        squeeze_sign: result.conventions.squeeze_sign.unwrap_or(1),
        tmsv_fidelity: result.target_fidelity,
        purity: result.stages[0].purity,
        internal_state_deviation: deviation,
        epr,
        symplectic_eigenvalues: symplectic,
        entropy_bits: entropy,
        tail_mass: result.tail_mass,
    }))
}

fn run_superpose(config: &ProtocolConfig, checks: &mut Vec<Check>) -> ionsqueeze::Result<Results> {
    let tol = &config.tolerances;
    let sp = space(config)?;
    let g = squeezing_g(config);
    let weights: Vec<C64> = config.weights.as_ref().expect("validated").iter().map(|&p| complex(p)).collect();
    let list = WeightList::new(weights.clone())?;
    let result: ProtocolResult = superposition_protocol(sp, g, &list, tol)?;
    let (epr, _, entropy) = moments(&result.motion, tol)?;
    let formula = result.formula_probability.expect("post-selected run");
    let audit_max = result.probability_audit.iter().copied().fold(0.0, f64::max);

    checks.push(Check::at_most(
        "superposition_infidelity",
        1.0 - result.target_fidelity,
        SUPERPOSITION_INFIDELITY_TOL,
    ));
    checks.push(Check::at_most("probability_audit", audit_max, PROBABILITY_AUDIT_TOL));
    purity_checks(&result.stages, tol, checks);
    checks.push(Check::at_most("tail_mass", result.tail_mass, tol.tail_budget));

    let mismatch = (result.cumulative_probability - formula).abs() > PROBABILITY_AUDIT_TOL;
    Ok(Results::Superpose(SuperposeResults {
        g: pair(g),
        cycles: list.cycles(),
        coefficients: superposition_coefficients(&weights).into_iter().map(pair).collect(),
        per_cycle_probability: result.per_cycle_probability.clone(),
        cumulative_probability: result.cumulative_probability,
        formula_probability: formula,
        formula_mismatch: if mismatch { "expected" } else { "none" },
        probability_audit: result.probability_audit.clone(),
        prediction_fidelity: result.target_fidelity,
        purity: result.stages[0].purity,
        epr,
        entropy_bits: entropy,
        tail_mass: result.tail_mass,
    }))
}

fn run_general(config: &ProtocolConfig, checks: &mut Vec<Check>) -> ionsqueeze::Result<Results> {
    let tol = &config.tolerances;
    let sp = space(config)?;
    let g = squeezing_g(config);
    let (beta_c, beta_r) = displacements(config);
    let result = general_squeezed_protocol(sp, g, beta_c, beta_r, tol)?;
    let (epr, _, entropy) = moments(&result.motion, tol)?;
    let r = 2.0 * g.norm();

    checks.push(Check::at_most("target_infidelity", 1.0 - result.target_fidelity, TARGET_INFIDELITY_TOL));
    purity_checks(&result.stages, tol, checks);
    epr_checks(&epr, r, checks);
    checks.push(Check::at_most("tail_mass", result.tail_mass, tol.tail_budget));

    Ok(Results::General(GeneralResults {
        g: pair(g),
        beta_c: pair(beta_c),
        beta_r: pair(beta_r),
        squeezing_factor: r,
        stages: result.stages.clone(),
        target_fidelity: result.target_fidelity,
        convention_report: result.conventions.clone(),
        epr,
        entropy_bits: entropy,
        tail_mass: result.tail_mass,
    }))
}

/// Parameter points of a sweep, in configuration order.
pub fn sweep_points(base: &PhysicalParams, sweep: Option<&Sweep>) -> Vec<PhysicalParams> {
    let relabel = |eta: f64, eta_r: Option<f64>, omega: f64| {
        PhysicalParams::with_lamb_dicke(base.mass, base.mu, base.nu, base.omega0, omega, eta, eta_r)
    };
    match sweep {
        None => vec![*base],
        Some(Sweep::Eta(values)) => values.iter().map(|&e| relabel(e, Some(e), base.omega)).collect(),
        Some(Sweep::OmegaOverNu(values)) => values
            .iter()
            .map(|&x| {
                let mut p = *base;
                p.omega = x * base.nu;
                p
            })
            .collect(),
    }
}

fn run_validate_rwa(config: &ProtocolConfig, checks: &mut Vec<Check>) -> ionsqueeze::Result<Results> {
    let tol = config.tolerances;
    let sp = space(config)?;
    let physical = config.physical.expect("validated config has physical block");
    let points = sweep_points(&physical.params, config.sweep.as_ref());
    let computed: Vec<_> = points
        .par_iter()
        .map(|p| rwa_point(p, sp, physical.r, physical.order, &tol))
        .collect::<ionsqueeze::Result<_>>()?;
    let rows: Vec<RwaRow> = computed
        .iter()
        .enumerate()
        .map(|(index, pt)| RwaRow {
            index,
            eta: pt.eta,
            eta_r: pt.eta_r,
            omega_over_nu: pt.omega / pt.nu,
            omega: pt.omega,
            nu: pt.nu,
            t_final: pt.t_final,
            infidelity: pt.infidelity,
            accepted_steps: pt.stats.accepted_steps,
            rejected_steps: pt.stats.rejected_steps,
            norm_drift: pt.stats.norm_drift,
        })
        .collect();
    for row in &rows {
        checks.push(Check::at_most(
            format!("norm_drift:{}", row.index),
            row.norm_drift,
            ionsqueeze::dynamics::NORM_DRIFT_TOL,
        ));
    }
    let worst_increase = rows
        .windows(2)
        .map(|w| w[1].infidelity - w[0].infidelity)
        .fold(0.0, f64::max);
    if rows.len() > 1 {
        checks.push(Check::at_most("rwa_monotone_increase", worst_increase, 0.0));
    }
    let (w1, w2) = points[0].laser_frequencies();
    Ok(Results::ValidateRwa(RwaResults {
        order: physical.order,
        r: physical.r,
        laser_frequencies: [w1, w2],
        monotone_non_increasing: worst_increase <= 0.0,
        rows,
    }))
}

fn run_conventions(config: &ProtocolConfig, checks: &mut Vec<Check>) -> ionsqueeze::Result<Results> {
    let report = convention_self_test(&config.tolerances)?;
    checks.push(Check::at_most(
        "tmsv_anchor_deviation",
        report.tmsv_anchor_deviation.unwrap_or(f64::INFINITY),
        ANCHOR_TOL,
    ));
    Ok(Results::Conventions(report))
}

/// Runs `config`; core errors propagate, check failures are recorded in the report.
pub fn run(config: &ProtocolConfig, options: RunOptions) -> ionsqueeze::Result<RunReport> {
    let start = Instant::now();
    let mut checks = Vec::new();
    let results = match config.command {
        Command::Squeeze => run_squeeze(config, &mut checks)?,
        Command::Superpose => run_superpose(config, &mut checks)?,
        Command::General => run_general(config, &mut checks)?,
        Command::ValidateRwa => run_validate_rwa(config, &mut checks)?,
        Command::Conventions => run_conventions(config, &mut checks)?,
    };
    Ok(RunReport {
        tool: "ionsqueeze",
        version: env!("CARGO_PKG_VERSION"),
        command: config.command,
        seedless: options.seedless,
        defaults: Defaults::default(),
        config: config.clone(),
        results,
        checks,
        timings: options.timings.then(|| Timings {
            total_seconds: start.elapsed().as_secs_f64(),
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn zero_squeezing_superposition_reports_formula_mismatch() {
        let cfg = parse_config(
            "[space]\nn_c_cut = 4\nn_r_cut = 4\n[squeezing]\ng = 0.0\n[superpose]\nweights = [1.0, 1.0]\n",
            Command::Superpose,
        )
        .unwrap();
        let report = run(&cfg, RunOptions::default()).unwrap();
        let Results::Superpose(res) = &report.results else { panic!() };
        assert_eq!(res.cumulative_probability, 0.25);
        assert_eq!(res.formula_probability, 1.0 / 64.0);
        assert_eq!(res.formula_mismatch, "expected");
        assert_eq!(report.failed_checks().count(), 0);
    }

    #[test]
    fn sweep_points_follow_axis() {
        let base = PhysicalParams::default();
        let pts = sweep_points(&base, Some(&Sweep::Eta(vec![0.15, 0.05])));
        assert_eq!((pts[1].eta, pts[1].eta_r), (0.05, 0.05));
        let pts = sweep_points(&base, Some(&Sweep::OmegaOverNu(vec![0.02])));
        assert!((pts[0].omega / pts[0].nu - 0.02).abs() < 1e-15);
        assert_eq!(pts[0].eta, base.eta);
    }

    #[test]
    fn physical_coupling_gives_expected_g() {
        let cfg = parse_config(
            "[squeezing]\nomega = 2.0\neta = 0.1\neta_r = 0.05\nt = 10.0\n",
            Command::Squeeze,
        )
        .unwrap();
        assert!((squeezing_g(&cfg) - C64::new(0.0, -0.1)).norm() < 1e-15);
    }
}
