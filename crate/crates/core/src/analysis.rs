//! Fidelities, quadrature statistics, EPR variances, entanglement entropy and
//! truncation diagnostics.
//!
//! Quadratures use `hbar = 1` with `X = (a + a^dag)/sqrt(2)` and
//! `P = (a - a^dag)/(i sqrt(2))`, so the vacuum variance is 1/2.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, Matrix2, Matrix4, Vector4};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::TruncationGuard;
use crate::space::SpaceDescriptor;
use crate::state::{entropy_bits, hermitian_eigenvalues, MotionalState, StateVector, NORMALIZATION_TOL};
use crate::C64;

/// Vacuum variance of a single quadrature.
pub const VACUUM_VARIANCE: f64 = 0.5;

fn require_unit(norm_sq: f64) -> Result<()> {
    if (norm_sq - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { norm_sq });
    }
    Ok(())
}

/// `|<a|b>|^2` for normalized states.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    a.require_normalized()?;
    b.require_normalized()?;
    let overlap = crate::state::inner(a, b)?;
    Ok(overlap.norm_sqr().min(1.0))
}

/// `|<a|b>|^2` for normalized motional states.
pub fn motional_fidelity(a: &MotionalState, b: &MotionalState) -> Result<f64> {
    require_unit(a.norm_sq())?;
    require_unit(b.norm_sq())?;
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// Number of top Fock levels counted as the tail of a mode of dimension `dim`.
fn tail_levels(dim: usize, margin: f64) -> usize {
    ((margin * dim as f64).ceil() as usize).clamp(1, dim)
}

/// Population with either mode in the top `margin` fraction of its Fock levels.
pub fn tail_mass(state: &MotionalState, margin: f64) -> f64 {
    let space = state.space();
    let pops = state.populations();
    tail_mass_of_populations(space, &pops, margin)
}

fn tail_mass_of_populations(space: SpaceDescriptor, pops: &DMatrix<f64>, margin: f64) -> f64 {
    let c_start = space.dim_c() - tail_levels(space.dim_c(), margin);
    let r_start = space.dim_r() - tail_levels(space.dim_r(), margin);
    let mut mass = 0.0;
    for n_c in 0..space.dim_c() {
        for n_r in 0..space.dim_r() {
            if n_c >= c_start || n_r >= r_start {
                mass += pops[(n_c, n_r)];
            }
        }
    }
    mass
}

/// Tail mass of a composite state, summed over internal configurations.
pub fn tail_mass_of_state(state: &StateVector, margin: f64) -> f64 {
    let space = state.space();
    let m = space.motional_dim();
    let dr = space.dim_r();
    let mut pops = DMatrix::zeros(space.dim_c(), dr);
    for (i, a) in state.amplitudes().iter().enumerate() {
        let j = i % m;
        pops[(j / dr, j % dr)] += a.norm_sqr();
    }
    tail_mass_of_populations(space, &pops, margin)
}

fn lower_c(psi: &DMatrix<C64>) -> DMatrix<C64> {
    let (dc, dr) = psi.shape();
    DMatrix::from_fn(dc, dr, |n, m| {
        if n + 1 < dc {
            psi[(n + 1, m)] * ((n + 1) as f64).sqrt()
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

fn lower_r(psi: &DMatrix<C64>) -> DMatrix<C64> {
    let (dc, dr) = psi.shape();
    DMatrix::from_fn(dc, dr, |n, m| {
        if m + 1 < dr {
            psi[(n, m + 1)] * ((m + 1) as f64).sqrt()
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Second moments over `(X_c, P_c, X_r, P_r)` with the first moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix {
    pub matrix: Matrix4<f64>,
    pub means: Vector4<f64>,
}

impl CovarianceMatrix {
    /// Symplectic eigenvalues `(nu_-, nu_+)` of the two-mode covariance matrix.
    pub fn symplectic_eigenvalues(&self) -> (f64, f64) {
        let s = &self.matrix;
        let a = Matrix2::new(s[(0, 0)], s[(0, 1)], s[(1, 0)], s[(1, 1)]);
        let b = Matrix2::new(s[(2, 2)], s[(2, 3)], s[(3, 2)], s[(3, 3)]);
        let c = Matrix2::new(s[(0, 2)], s[(0, 3)], s[(1, 2)], s[(1, 3)]);
        let delta = a.determinant() + b.determinant() + 2.0 * c.determinant();
        let det = s.determinant();
        let disc = (delta * delta - 4.0 * det).max(0.0).sqrt();
        let minus = ((delta - disc) / 2.0).max(0.0).sqrt();
        let plus = ((delta + disc) / 2.0).max(0.0).sqrt();
        (minus, plus)
    }

    /// `u^T sigma u`.
    pub fn variance_along(&self, u: &Vector4<f64>) -> f64 {
        (u.transpose() * self.matrix * u)[(0, 0)]
    }
}

/// Quadrature covariance matrix of a normalized motional state.
///
/// Moments use the canonical commutator `[a, a^dag] = 1`, which is only
/// trustworthy while the guard keeps the top Fock levels empty.
pub fn covariance(state: &MotionalState, guard: &TruncationGuard) -> Result<CovarianceMatrix> {
    require_unit(state.norm_sq())?;
    guard.check(state)?;
    let psi = state.amplitudes();
    let a_psi = lower_c(psi);
    let b_psi = lower_r(psi);
    let alpha = psi.dotc(&a_psi);
    let beta = psi.dotc(&b_psi);
    let aa = psi.dotc(&lower_c(&a_psi));
    let bb = psi.dotc(&lower_r(&b_psi));
    let ab = psi.dotc(&lower_c(&b_psi));
    let n_a = a_psi.norm_squared();
    let n_b = b_psi.norm_squared();
    let adag_b = a_psi.dotc(&b_psi);
    let one = C64::new(1.0, 0.0);

    // moments[p][q] = <L_p L_q> with L = (a, a^dag, b, b^dag)
    let moments = [
        [aa, one * (n_a + 1.0), ab, adag_b.conj()],
        [one * n_a, aa.conj(), adag_b, ab.conj()],
        [ab, adag_b, bb, one * (n_b + 1.0)],
        [adag_b.conj(), ab.conj(), one * n_b, bb.conj()],
    ];
    let firsts = [alpha, alpha.conj(), beta, beta.conj()];
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let i = C64::new(0.0, FRAC_1_SQRT_2);
    let z = C64::new(0.0, 0.0);
    let quad = [
        [s, s, z, z],
        [-i, i, z, z],
        [z, z, s, s],
        [z, z, -i, i],
    ];
    let mut means = Vector4::zeros();
    for j in 0..4 {
        means[j] = (0..4).map(|p| quad[j][p] * firsts[p]).sum::<C64>().re;
    }
    let mut matrix = Matrix4::zeros();
    for j in 0..4 {
        for k in 0..4 {
            let mut second = C64::new(0.0, 0.0);
            for p in 0..4 {
                for q in 0..4 {
                    second += quad[j][p] * quad[k][q] * moments[p][q];
                }
            }
            matrix[(j, k)] = second.re - means[j] * means[k];
        }
    }
    let matrix = (matrix + matrix.transpose()) * 0.5;
    Ok(CovarianceMatrix { matrix, means })
}

fn epr_directions(phi: f64) -> (Vector4<f64>, Vector4<f64>) {
    let (s, c) = phi.sin_cos();
    let minus = Vector4::new(c, s, -c, -s) * FRAC_1_SQRT_2;
    let plus = Vector4::new(c, s, c, s) * FRAC_1_SQRT_2;
    (minus, plus)
}

/// Variances of `(X_c(phi) -+ X_r(phi)) / sqrt(2)`, where
/// `X(phi) = X cos(phi) + P sin(phi)`; returned as `(minus, plus)`.
pub fn epr_variance_from(cov: &CovarianceMatrix, phi: f64) -> (f64, f64) {
    let (minus, plus) = epr_directions(phi);
    (cov.variance_along(&minus), cov.variance_along(&plus))
}

pub fn epr_variance(state: &MotionalState, phi: f64, guard: &TruncationGuard) -> Result<(f64, f64)> {
    Ok(epr_variance_from(&covariance(state, guard)?, phi))
}

/// The EPR pair at the quadrature angle minimizing the `minus` variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EprOptimum {
    pub phi: f64,
    pub minus: f64,
    pub plus: f64,
}

/// Golden-section tolerance on the quadrature angle.
pub const PHI_TOL: f64 = 1e-6;

/// Minimizes the `minus` EPR variance over `phi in [0, pi)`.
///
/// The variance is smooth and `pi`-periodic, so a coarse scan brackets the
/// minimum before golden-section refinement.
pub fn optimal_epr_variance(cov: &CovarianceMatrix) -> EprOptimum {
    let f = |phi: f64| epr_variance_from(cov, phi).0;
    const GRID: usize = 64;
    let h = PI / GRID as f64;
    let k = (0..GRID)
        .map(|k| (k, f(k as f64 * h)))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc })
        .0;
    let (mut lo, mut hi) = (k as f64 * h - h, k as f64 * h + h);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > PHI_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    let phi = (0.5 * (lo + hi)).rem_euclid(PI);
    let (minus, plus) = epr_variance_from(cov, phi);
    EprOptimum { phi, minus, plus }
}

/// Noise reduction relative to the vacuum level, in dB.
pub fn squeezing_db(variance: f64) -> Result<f64> {
    if !(variance > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "squeezing needs a positive variance, got {variance}"
        )));
    }
    Ok(-10.0 * (variance / VACUUM_VARIANCE).log10())
}

/// Entanglement entropy (bits) between the two modes of a pure motional state.
pub fn mode_entanglement_entropy(state: &MotionalState) -> Result<f64> {
    require_unit(state.norm_sq())?;
    let rho = state.reduced_mode_c();
    Ok(entropy_bits(&hermitian_eigenvalues(&rho)))
}

/// Mode entanglement entropy of the motional factor of a composite state;
/// fails when the motion is entangled with the internal levels.
pub fn mode_entanglement_entropy_of_state(state: &StateVector, purity_tol: f64) -> Result<f64> {
    let (_, motion) = state.factorize(purity_tol)?;
    mode_entanglement_entropy(&motion)
}
