//! Preparation sequences: two-mode squeezed vacuum, superpositions of
//! squeezed states by repeated post-selection, and displaced two-mode
//! squeezed states.
//!
//! "No fluorescence" is modeled as projection of both ions onto the dark
//! level `|e>`. Post-selection probabilities are exact projection norms; the
//! product formula `prod_i 1/4 (1 + |p_i|^2)^-1` is reported next to them for
//! comparison only. The two agree only up to the squared norm of the
//! unnormalized conditioned motional state.

use serde::Serialize;

use crate::MaxModulus;
use crate::analysis::tail_mass;
use crate::error::{Error, Result};
use crate::operator::Operator;
use crate::operators::{apply_motional, displace, two_mode_squeeze};
use crate::propagators::{u_carrier, u_ce, u_flip1, u_re, u_squeeze};
use crate::space::{Level, SpaceDescriptor, Subsystem};
use crate::state::{internal_purity, project_internal, MotionalState, StateVector};
use crate::{Tolerances, C64};

/// Largest tolerated infidelity between a protocol output and its closed-form
/// target before the run is rejected.
pub const TARGET_INFIDELITY_TOL: f64 = 1e-6;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Weights `p_1 .. p_2m` of the internal levels, consumed two per cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightList(Vec<C64>);

impl WeightList {
    pub fn new(weights: Vec<C64>) -> Result<Self> {
        if weights.is_empty() || weights.len() % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "weights must hold 2m >= 2 entries, got {}",
                weights.len()
            )));
        }
        if weights.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(Error::InvalidArgument("weights must be finite".into()));
        }
        Ok(Self(weights))
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn cycles(&self) -> usize {
        self.0.len() / 2
    }

    pub fn pairs(&self) -> impl Iterator<Item = (C64, C64)> + '_ {
        self.0.chunks_exact(2).map(|p| (p[0], p[1]))
    }
}

/// Sign conventions realized by the implementation.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct ConventionReport {
    /// `s` in the motional output `S(s 2G)|00>` of the squeezing step.
    pub squeeze_sign: Option<i8>,
    /// `sigma_y` eigenstates (`"+y"`/`"-y"`) of the two ions after the carrier pulse.
    pub carrier_eigenstates: Option<[String; 2]>,
    /// `sigma_y` eigenstates after the ion-1 flip.
    pub flipped_eigenstates: Option<[String; 2]>,
    /// `s_c` in `D(s_c 2 beta_c)`.
    pub displacement_sign_c: Option<i8>,
    /// `s_r` in `D(s_r 2 beta_r)`.
    pub displacement_sign_r: Option<i8>,
    /// `max_n |c_n(expm) - c_n(closed form)|` of the squeezed-vacuum anchor test.
    pub tmsv_anchor_deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRecord {
    pub stage: String,
    /// Purity of the motional reduced state.
    pub purity: f64,
}

/// Outcome of one protocol run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult {
    pub final_state: StateVector,
    /// Normalized motional factor of the final state.
    pub motion: MotionalState,
    pub per_cycle_probability: Vec<f64>,
    pub cumulative_probability: f64,
    /// `prod_i 1/4 (1 + |p_i|^2)^-1`, for post-selected runs.
    pub formula_probability: Option<f64>,
    /// Per cycle, `|exact - formula * ||product state||^2|` (see [`product_form_superposition`]).
    pub probability_audit: Vec<f64>,
    pub tail_mass: f64,
    /// `|<target|motion>|^2` against the closed-form motional target.
    pub target_fidelity: f64,
    pub stages: Vec<StageRecord>,
    pub conventions: ConventionReport,
}

const SQUEEZE_INTERNAL: [f64; 4] = [0.5, 0.5, -0.5, -0.5];

/// `1/2 (|e> - |g>)_1 (|e> + |g>)_2 |0>_c |0>_r`.
pub fn initial_squeeze_state(space: SpaceDescriptor) -> StateVector {
    let internal = SQUEEZE_INTERNAL.map(|x| c(x, 0.0));
    StateVector::product(&internal, &MotionalState::vacuum(space))
}

/// Normalized internal vector `N0 (|e> + p1 |g>)_1 (|e> - p2 |g>)_2`.
pub fn weighted_internal(p1: C64, p2: C64) -> [C64; 4] {
    let n0 = 1.0 / ((1.0 + p1.norm_sqr()) * (1.0 + p2.norm_sqr())).sqrt();
    let one = c(1.0, 0.0);
    [one, -p2, p1, -p1 * p2].map(|x| x * n0)
}

/// `N0 (|e> + p1 |g>)_1 (|e> - p2 |g>)_2 |00>`.
pub fn initial_weighted_state(space: SpaceDescriptor, p1: C64, p2: C64) -> StateVector {
    StateVector::product(&weighted_internal(p1, p2), &MotionalState::vacuum(space))
}

fn checked_stage(state: &StateVector, stage: &str, tol: &Tolerances) -> Result<StageRecord> {
    let purity = internal_purity(state);
    if (purity - 1.0).abs() > tol.purity {
        return Err(Error::Factorization {
            stage: stage.to_string(),
            purity,
            tolerance: tol.purity,
        });
    }
    Ok(StageRecord {
        stage: stage.to_string(),
        purity,
    })
}

fn split(state: &StateVector, stage: &str, tol: &Tolerances) -> Result<(StageRecord, [C64; 4], MotionalState)> {
    let record = checked_stage(state, stage, tol)?;
    let (internal, motion) = state.factorize(tol.purity)?;
    Ok((record, internal, motion))
}

/// `|<a|b>|^2` without normalization checks; used against truncated closed
/// forms whose norm falls short of 1 by at most the tail budget.
fn overlap_sq(a: &MotionalState, b: &MotionalState) -> f64 {
    a.inner(b).expect("same space").norm_sqr()
}

fn vacuum_image(op: &Operator) -> Result<MotionalState> {
    apply_motional(op, &MotionalState::vacuum(op.space()))
}

/// Squeezes the motion from the product initial state with a single
/// application of [`u_squeeze`]; the internal state is left unchanged.
pub fn squeezed_vacuum_protocol(space: SpaceDescriptor, g: C64, tol: &Tolerances) -> Result<ProtocolResult> {
    let psi0 = initial_squeeze_state(space);
    let u = u_squeeze(space, g, tol)?;
    let psi1 = u.apply(&psi0)?;
    let (record, _, motion) = split(&psi1, "squeeze", tol)?;

    let plus = vacuum_image(&two_mode_squeeze(space, g * 2.0, tol)?)?;
    let minus = vacuum_image(&two_mode_squeeze(space, -g * 2.0, tol)?)?;
    let (f_plus, f_minus) = (overlap_sq(&plus, &motion), overlap_sq(&minus, &motion));
    let squeeze_sign = if f_plus >= f_minus { 1 } else { -1 };
    let analytic = crate::operators::tmsv_state(space, g * 2.0 * squeeze_sign as f64);
    let target_fidelity = overlap_sq(&analytic, &motion);

    Ok(ProtocolResult {
        tail_mass: tail_mass(&motion, tol.tail_margin),
        final_state: psi1,
        motion,
        per_cycle_probability: Vec::new(),
        cumulative_probability: 1.0,
        formula_probability: None,
        probability_audit: Vec::new(),
        target_fidelity,
        stages: vec![record],
        conventions: ConventionReport {
            squeeze_sign: Some(squeeze_sign),
            ..Default::default()
        },
    })
}

/// Max deviation between the internal reduced states of two composite states.
pub fn internal_state_deviation(a: &StateVector, b: &StateVector) -> Result<f64> {
    let keep = [Subsystem::Ion1, Subsystem::Ion2];
    let ra = crate::state::partial_trace(a, &keep)?;
    let rb = crate::state::partial_trace(b, &keep)?;
    Ok((ra.matrix() - rb.matrix()).max_modulus())
}

/// One post-selection cycle with a prebuilt squeezing propagator: re-prepare
/// the internal levels with `pair`, evolve, and keep the `|e e>` outcome.
///
/// Returns the normalized conditioned state and the outcome probability.
pub fn conditional_cycle_with(
    u: &Operator,
    state: &StateVector,
    pair: (C64, C64),
    cycle: usize,
    tol: &Tolerances,
) -> Result<(StateVector, f64)> {
    let (_, motion) = state.factorize(tol.purity)?;
    let prepared = StateVector::product(&weighted_internal(pair.0, pair.1), &motion);
    let evolved = u.apply(&prepared)?;
    let (projected, probability) = project_internal(&evolved, Level::E, Level::E);
    if !(probability > f64::MIN_POSITIVE) {
        return Err(Error::ZeroProbability { cycle });
    }
    Ok((projected.normalized()?, probability))
}

pub fn conditional_cycle(
    state: &StateVector,
    g: C64,
    pair: (C64, C64),
    tol: &Tolerances,
) -> Result<(StateVector, f64)> {
    let u = u_squeeze(state.space(), g, tol)?;
    conditional_cycle_with(&u, state, pair, 1, tol)
}

/// Coefficients `C_k`, `k = 0..=2m`: the sum over all `k`-subsets of
/// `prod_{i in subset}(1 - p_i) prod_{j not in subset}(1 + p_j)`.
///
/// Computed as the coefficients of `prod_i [(1 - p_i) x + (1 + p_i)]`.
pub fn superposition_coefficients(weights: &[C64]) -> Vec<C64> {
    let one = c(1.0, 0.0);
    let mut poly = vec![one];
    for &p in weights {
        let mut next = vec![c(0.0, 0.0); poly.len() + 1];
        for (k, &a) in poly.iter().enumerate() {
            next[k] += a * (one + p);
            next[k + 1] += a * (one - p);
        }
        poly = next;
    }
    poly
}

/// Unnormalized `sum_k C_k S[2(k - m)G]|00>`.
pub fn predicted_superposition(
    space: SpaceDescriptor,
    g: C64,
    weights: &WeightList,
    tol: &Tolerances,
) -> Result<MotionalState> {
    let m = weights.cycles() as i64;
    let coeffs = superposition_coefficients(weights.as_slice());
    let mut acc = nalgebra::DMatrix::zeros(space.dim_c(), space.dim_r());
    for (k, ck) in coeffs.iter().enumerate() {
        let factor = 2.0 * (k as i64 - m) as f64;
        let s = two_mode_squeeze(space, g * factor, tol)?;
        acc += vacuum_image(&s)?.amplitudes() * *ck;
    }
    MotionalState::new(space, acc)
}

/// Unnormalized `prod_i [(1 - p_i) S(G) + (1 + p_i) S(-G)] |00>`, applied
/// factor by factor. Also returns the squared norm after each cycle.
pub fn product_form_superposition(
    space: SpaceDescriptor,
    g: C64,
    weights: &WeightList,
    tol: &Tolerances,
) -> Result<(MotionalState, Vec<f64>)> {
    let s_plus = two_mode_squeeze(space, g, tol)?;
    let s_minus = two_mode_squeeze(space, -g, tol)?;
    let one = c(1.0, 0.0);
    let mut motion = MotionalState::vacuum(space);
    let mut norms = Vec::with_capacity(weights.cycles());
    for (p1, p2) in weights.pairs() {
        for p in [p1, p2] {
            let a = apply_motional(&s_plus, &motion)?;
            let b = apply_motional(&s_minus, &motion)?;
            motion = MotionalState::new(space, a.amplitudes() * (one - p) + b.amplitudes() * (one + p))?;
        }
        norms.push(motion.norm_sq());
    }
    Ok((motion, norms))
}

/// `prod_i 1/4 (1 + |p_i|^2)^-1`.
pub fn formula_success_probability(weights: &[C64]) -> f64 {
    weights.iter().map(|p| 0.25 / (1.0 + p.norm_sqr())).product()
}

/// Runs `m` post-selected squeezing cycles and compares the conditioned
/// motion against the coefficient expansion.
pub fn superposition_protocol(
    space: SpaceDescriptor,
    g: C64,
    weights: &WeightList,
    tol: &Tolerances,
) -> Result<ProtocolResult> {
    let m = weights.cycles();
    // guard the largest squeezing the superposition can contain
    two_mode_squeeze(space, g * (2 * m) as f64, tol)?;

    let u = u_squeeze(space, g, tol)?;
    let (p1, p2) = weights.pairs().next().expect("at least one cycle");
    let mut state = initial_weighted_state(space, p1, p2);
    let mut per_cycle = Vec::with_capacity(m);
    for (j, pair) in weights.pairs().enumerate() {
        let (next, p) = conditional_cycle_with(&u, &state, pair, j + 1, tol)?;
        per_cycle.push(p);
        state = next;
    }

    let (_, product_norms) = product_form_superposition(space, g, weights, tol)?;
    let mut audit = Vec::with_capacity(m);
    let mut cumulative = 1.0;
    for (j, (&p, &norm_sq)) in per_cycle.iter().zip(&product_norms).enumerate() {
        cumulative *= p;
        let formula = formula_success_probability(&weights.as_slice()[..2 * (j + 1)]);
        audit.push((cumulative - formula * norm_sq).abs());
    }

    let (record, _, motion) = split(&state, "post-selected", tol)?;
    let predicted = predicted_superposition(space, g, weights, tol)?.normalized()?;
    let target_fidelity = overlap_sq(&predicted, &motion);

    Ok(ProtocolResult {
        tail_mass: tail_mass(&motion, tol.tail_margin),
        final_state: state,
        motion,
        per_cycle_probability: per_cycle,
        cumulative_probability: cumulative,
        formula_probability: Some(formula_success_probability(weights.as_slice())),
        probability_audit: audit,
        target_fidelity,
        stages: vec![record],
        conventions: ConventionReport::default(),
    })
}

/// Labels a single-ion state as a `sigma_y` eigenstate.
fn sigma_y_label(amps: [C64; 2]) -> String {
    // <sigma_y> = 2 Im(conj(e) g)
    let sy = 2.0 * (amps[0].conj() * amps[1]).im / (amps[0].norm_sqr() + amps[1].norm_sqr());
    if sy > 1.0 - 1e-9 {
        "+y".into()
    } else if sy < -1.0 + 1e-9 {
        "-y".into()
    } else {
        format!("<sy>={sy:.6}")
    }
}

/// Splits a product internal vector `ee, eg, ge, gg` into single-ion factors.
fn ion_factors(internal: &[C64; 4]) -> ([C64; 2], [C64; 2]) {
    let row0 = internal[0].norm_sqr() + internal[1].norm_sqr();
    let row1 = internal[2].norm_sqr() + internal[3].norm_sqr();
    let ion2 = if row0 >= row1 {
        [internal[0], internal[1]]
    } else {
        [internal[2], internal[3]]
    };
    let n2 = (ion2[0].norm_sqr() + ion2[1].norm_sqr()).sqrt();
    let ion2 = ion2.map(|x| x / n2);
    let ion1 = [
        ion2[0].conj() * internal[0] + ion2[1].conj() * internal[1],
        ion2[0].conj() * internal[2] + ion2[1].conj() * internal[3],
    ];
    (ion1, ion2)
}

/// Squeeze, carrier pulse, center-of-mass displacement, ion-1 flip, and
/// breathing-mode displacement, checking factorization after every stage.
///
/// The displacement signs realized by the sequence are determined by
/// comparison with the four candidates `D(+-2 beta_c) D(+-2 beta_r) S(2G)|00>`
/// and recorded in the convention report.
pub fn general_squeezed_protocol(
    space: SpaceDescriptor,
    g: C64,
    beta_c: C64,
    beta_r: C64,
    tol: &Tolerances,
) -> Result<ProtocolResult> {
    let squeezed = squeezed_vacuum_protocol(space, g, tol)?;
    let mut conventions = squeezed.conventions.clone();
    let mut stages = squeezed.stages.clone();

    let carrier = u_carrier(space)?.apply(&squeezed.final_state)?;
    let (record, internal, _) = split(&carrier, "carrier", tol)?;
    stages.push(record);
    let (i1, i2) = ion_factors(&internal);
    conventions.carrier_eigenstates = Some([sigma_y_label(i1), sigma_y_label(i2)]);

    let displaced_c = u_ce(space, beta_c, tol)?.apply(&carrier)?;
    stages.push(split(&displaced_c, "displace_c", tol)?.0);

    let flipped = u_flip1(space)?.apply(&displaced_c)?;
    let (record, internal, _) = split(&flipped, "flip_ion1", tol)?;
    stages.push(record);
    let (i1, i2) = ion_factors(&internal);
    conventions.flipped_eigenstates = Some([sigma_y_label(i1), sigma_y_label(i2)]);

    let displaced_r = u_re(space, beta_r, tol)?.apply(&flipped)?;
    let (record, _, motion) = split(&displaced_r, "displace_r", tol)?;
    stages.push(record);

    let squeeze_sign = conventions.squeeze_sign.unwrap_or(1) as f64;
    let squeezed_motion = vacuum_image(&two_mode_squeeze(space, g * 2.0 * squeeze_sign, tol)?)?;
    let mut best = (f64::NEG_INFINITY, 1i8, 1i8);
    for s_c in [1i8, -1] {
        let dc = displace(space, Subsystem::ModeC, beta_c * 2.0 * s_c as f64, tol)?;
        let after_c = apply_motional(&dc, &squeezed_motion)?;
        for s_r in [1i8, -1] {
            let dr = displace(space, Subsystem::ModeR, beta_r * 2.0 * s_r as f64, tol)?;
            let target = apply_motional(&dr, &after_c)?;
            let f = overlap_sq(&target, &motion);
            // ties (zero displacements) keep the first, positive candidate
            if f > best.0 + 1e-12 {
                best = (f, s_c, s_r);
            }
        }
    }
    let (target_fidelity, s_c, s_r) = best;
    if 1.0 - target_fidelity > TARGET_INFIDELITY_TOL {
        return Err(Error::Convention(format!(
            "final motion matches no displaced squeezed vacuum (best fidelity {target_fidelity})"
        )));
    }
    conventions.displacement_sign_c = Some(s_c);
    conventions.displacement_sign_r = Some(s_r);

    Ok(ProtocolResult {
        tail_mass: tail_mass(&motion, tol.tail_margin),
        final_state: displaced_r,
        motion,
        per_cycle_probability: Vec::new(),
        cumulative_probability: 1.0,
        formula_probability: None,
        probability_audit: Vec::new(),
        target_fidelity,
        stages,
        conventions,
    })
}

/// Anchors the closed-form squeezed-vacuum expansion to the exponential of
/// the squeezing generator, then runs the displaced-squeezing sequence at
/// small parameters to record the realized sign conventions.
pub fn convention_self_test(tol: &Tolerances) -> Result<ConventionReport> {
    let space = SpaceDescriptor::new(20, 20)?;
    let g = C64::from_polar(0.2, -std::f64::consts::FRAC_PI_2);
    let numeric = vacuum_image(&two_mode_squeeze(space, g, tol)?)?;
    let closed = crate::operators::tmsv_state(space, g);
    let deviation = (numeric.amplitudes() - closed.amplitudes()).max_modulus();
    if deviation > 1e-8 {
        return Err(Error::Convention(format!(
            "squeezed vacuum expansion deviates from exp(G* ab - G a^dag b^dag) by {deviation:e}"
        )));
    }
    let run = general_squeezed_protocol(space, g * 0.5, c(0.0, 0.2), c(0.0, 0.15), tol)?;
    let mut report = run.conventions;
    report.tmsv_anchor_deviation = Some(deviation);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::make_space;

    #[test]
    fn initial_states() {
        let space = make_space(3, 3).unwrap();
        let psi = initial_squeeze_state(space);
        assert!(psi.is_normalized());
        assert_eq!(
            initial_weighted_state(space, c(0.0, 0.0), c(0.0, 0.0)),
            crate::state::basis_state(space, Level::E, Level::E, 0, 0).unwrap()
        );
        let w = weighted_internal(c(1.0, 0.0), c(1.0, 0.0));
        assert!((w[0] - c(0.5, 0.0)).norm() < 1e-15);
        let p1 = c(0.3, -0.7);
        let w = weighted_internal(p1, c(0.2, 0.1));
        // <g|_1 amplitude over <e|_1 amplitude at fixed ion-2 level
        assert!((w[2] / w[0] - p1).norm() < 1e-15);
        assert!((w.iter().map(|x| x.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn weight_list_validation() {
        assert!(WeightList::new(vec![c(1.0, 0.0)]).is_err());
        assert!(WeightList::new(vec![]).is_err());
        assert!(WeightList::new(vec![c(f64::NAN, 0.0), c(0.0, 0.0)]).is_err());
        assert_eq!(WeightList::new(vec![c(1.0, 0.0); 4]).unwrap().cycles(), 2);
    }

    #[test]
    fn coefficients_special_cases() {
        let zeros = vec![c(0.0, 0.0); 6];
        let binom = [1.0, 6.0, 15.0, 20.0, 15.0, 6.0, 1.0];
        for (k, ck) in superposition_coefficients(&zeros).iter().enumerate() {
            assert_eq!(*ck, c(binom[k], 0.0));
        }
        let ones = vec![c(1.0, 0.0); 4];
        let coeffs = superposition_coefficients(&ones);
        assert_eq!(coeffs[0], c(16.0, 0.0));
        assert!(coeffs[1..].iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn formula_probability_values() {
        assert_eq!(formula_success_probability(&[c(0.0, 0.0), c(0.0, 0.0)]), 1.0 / 16.0);
        assert_eq!(formula_success_probability(&[c(1.0, 0.0), c(1.0, 0.0)]), 1.0 / 64.0);
    }

    #[test]
    fn sigma_y_labels() {
        let s = 0.5f64.sqrt();
        assert_eq!(sigma_y_label([c(s, 0.0), c(0.0, s)]), "+y");
        assert_eq!(sigma_y_label([c(s, 0.0), c(0.0, -s)]), "-y");
    }
}
