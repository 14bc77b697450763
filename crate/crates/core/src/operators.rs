//! Ladder and Pauli matrices, two-mode squeezing and displacement operators,
//! and the analytic Fock expansion of the two-mode squeezed vacuum.
//!
//! `S(G) = exp(G* a b - G a^dag b^dag)` and `D(beta) = exp(beta a^dag - beta* a)`
//! are exponentials of the *truncated* generators, so they are exactly unitary
//! on the truncated space; truncation shows up only as population in the top
//! Fock levels, which [`TruncationGuard`] turns into an error.

use nalgebra::DMatrix;
use nalgebra_sparse::CsrMatrix;
use serde::{Deserialize, Serialize};

use crate::analysis::tail_mass;
use crate::error::{Error, Result};
use crate::expm::expm_antihermitian;
use crate::operator::{dense_to_csr, kron, LocalOperator, Operator};
use crate::space::{SpaceDescriptor, Subsystem};
use crate::state::{MotionalState, StateVector};
use crate::{Tolerances, C64};

/// `<n-1|a|n> = sqrt(n)` on a Fock space of dimension `dim`.
pub fn annihilation(dim: usize) -> Result<LocalOperator> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!(
            "ladder operator needs dimension >= 2, got {dim}"
        )));
    }
    Ok(DMatrix::from_fn(dim, dim, |r, c| {
        if c == r + 1 {
            C64::new((c as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

pub fn creation(dim: usize) -> Result<LocalOperator> {
    Ok(annihilation(dim)?.adjoint())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PauliAxis {
    X,
    Y,
    Z,
    /// `sigma_+ = (sigma_x + i sigma_y) / 2`, raising `|g> -> |e>`.
    Plus,
    /// `sigma_- = (sigma_x - i sigma_y) / 2`.
    Minus,
}

/// Pauli matrix in the `(|e>, |g>)` basis.
pub fn pauli(axis: PauliAxis) -> LocalOperator {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let entries = match axis {
        PauliAxis::X => [z, one, one, z],
        PauliAxis::Y => [z, -i, i, z],
        PauliAxis::Z => [one, z, z, -one],
        PauliAxis::Plus => [z, one, z, z],
        PauliAxis::Minus => [z, z, one, z],
    };
    DMatrix::from_row_slice(2, 2, &entries)
}

/// Two-ion operator `A (x) B` on the internal configurations `ee, eg, ge, gg`.
pub fn two_ion(ion1: &LocalOperator, ion2: &LocalOperator) -> LocalOperator {
    ion1.kronecker(ion2)
}

/// Rejects states with too much population in the top Fock levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationGuard {
    /// Fraction of the Fock levels of each mode that counts as the tail.
    pub margin: f64,
    /// Largest tolerated tail population.
    pub budget: f64,
}

impl Default for TruncationGuard {
    fn default() -> Self {
        Self {
            margin: 0.1,
            budget: 1e-6,
        }
    }
}

impl TruncationGuard {
    pub fn check(&self, state: &MotionalState) -> Result<f64> {
        let mass = tail_mass(state, self.margin);
        if mass > self.budget {
            return Err(Error::TailMass {
                mass,
                budget: self.budget,
                margin: self.margin,
            });
        }
        Ok(mass)
    }
}

/// Annihilation operator of one mode on the motional space `mode_c (x) mode_r`.
pub fn mode_annihilation(space: SpaceDescriptor, mode: Subsystem) -> Result<CsrMatrix<C64>> {
    let (dc, dr) = (space.dim_c(), space.dim_r());
    match mode {
        Subsystem::ModeC => Ok(kron(&dense_to_csr(&annihilation(dc)?), &CsrMatrix::identity(dr))),
        Subsystem::ModeR => Ok(kron(&CsrMatrix::identity(dc), &dense_to_csr(&annihilation(dr)?))),
        other => Err(Error::InvalidArgument(format!("{other} is not a motional mode"))),
    }
}

pub(crate) fn adjoint_csr(m: &CsrMatrix<C64>) -> CsrMatrix<C64> {
    let mut t = m.transpose();
    for v in t.values_mut() {
        *v = v.conj();
    }
    t
}

/// `G* a b - G a^dag b^dag` on the motional space.
pub fn squeeze_generator(space: SpaceDescriptor, g: C64) -> CsrMatrix<C64> {
    let a = mode_annihilation(space, Subsystem::ModeC).expect("mode");
    let b = mode_annihilation(space, Subsystem::ModeR).expect("mode");
    let ab = &a * &b;
    let ab_dag = adjoint_csr(&ab);
    let mut lower = ab;
    for v in lower.values_mut() {
        *v *= g.conj();
    }
    let mut upper = ab_dag;
    for v in upper.values_mut() {
        *v *= -g;
    }
    &lower + &upper
}

/// `beta c^dag - beta* c` for the named mode on the motional space.
pub fn displacement_generator(
    space: SpaceDescriptor,
    mode: Subsystem,
    beta: C64,
) -> Result<CsrMatrix<C64>> {
    let lowering = mode_annihilation(space, mode)?;
    let raising = adjoint_csr(&lowering);
    let mut down = lowering;
    for v in down.values_mut() {
        *v *= -beta.conj();
    }
    let mut up = raising;
    for v in up.values_mut() {
        *v *= beta;
    }
    Ok(&up + &down)
}

fn vacuum_image(op: &Operator) -> MotionalState {
    let space = op.space();
    let m = space.motional_dim();
    // column of |e e 0 0> restricted to the |e e> block
    let mut flat = nalgebra::DVector::zeros(m);
    for j in 0..m {
        flat[j] = op.get(j, 0);
    }
    MotionalState::from_flat(space, flat)
}

/// Tail mass of `op |00>`, checked against the guard.
pub(crate) fn guard_vacuum_image(op: &Operator, guard: &TruncationGuard) -> Result<f64> {
    guard.check(&vacuum_image(op))
}

/// Two-mode squeezing operator `S(G)` embedded in the composite space.
///
/// Errors when `S(G)|00>` leaks more than the guard's budget into the top
/// Fock levels.
pub fn two_mode_squeeze(space: SpaceDescriptor, g: C64, tol: &Tolerances) -> Result<Operator> {
    let generator = Operator::motional(space, &squeeze_generator(space, g))?;
    let s = expm_antihermitian(&generator, tol.expm)?;
    guard_vacuum_image(&s, &tol.guard())?;
    Ok(s)
}

/// Displacement operator `D(beta)` on `mode`, identity elsewhere.
pub fn displace(
    space: SpaceDescriptor,
    mode: Subsystem,
    beta: C64,
    tol: &Tolerances,
) -> Result<Operator> {
    let generator = Operator::motional(space, &displacement_generator(space, mode, beta)?)?;
    let d = expm_antihermitian(&generator, tol.expm)?;
    guard_vacuum_image(&d, &tol.guard())?;
    Ok(d)
}

/// Coefficients `c_n` of `|n, n>` in `S(G)|00>` for `n = 0..=cutoff`:
/// `c_n = sech(r) (-e^{i theta} tanh r)^n` with `G = r e^{i theta}`.
pub fn tmsv_amplitudes(g: C64, cutoff: usize) -> Vec<C64> {
    let (r, theta) = g.to_polar();
    let ratio = -C64::from_polar(r.tanh(), theta);
    let mut c = C64::new(1.0 / r.cosh(), 0.0);
    let mut out = Vec::with_capacity(cutoff + 1);
    for _ in 0..=cutoff {
        out.push(c);
        c *= ratio;
    }
    out
}

/// Analytic `S(G)|00>` truncated to the space (not renormalized).
pub fn tmsv_state(space: SpaceDescriptor, g: C64) -> MotionalState {
    let cutoff = space.n_c_cut().min(space.n_r_cut());
    let coeffs = tmsv_amplitudes(g, cutoff);
    let mut amps = DMatrix::zeros(space.dim_c(), space.dim_r());
    for (n, c) in coeffs.into_iter().enumerate() {
        amps[(n, n)] = c;
    }
    MotionalState::new(space, amps).expect("shape")
}

/// Motional factor of `op` applied to `|e e> (x) motion`, read from the
/// `|e e>` block (valid for operators acting only on the motion).
pub fn apply_motional(op: &Operator, motion: &MotionalState) -> Result<MotionalState> {
    let psi = StateVector::product(&[C64::new(1.0, 0.0), C64::default(), C64::default(), C64::default()], motion);
    let out = op.apply(&psi)?;
    Ok(out.internal_component(crate::space::Level::E, crate::space::Level::E))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::MaxModulus;
    use crate::space::make_space;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn annihilation_elements() {
        let a2 = annihilation(2).unwrap();
        assert_eq!(a2.iter().filter(|x| x.norm() > 0.0).count(), 1);
        assert_eq!(a2[(0, 1)], c(1.0, 0.0));
        let a = annihilation(6).unwrap();
        let vac = nalgebra::DVector::from_fn(6, |i, _| if i == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        assert_eq!((&a * vac).max_modulus(), 0.0);
        assert!(annihilation(1).is_err());
    }

    #[test]
    fn truncated_commutator_defect() {
        let dim = 7;
        let a = annihilation(dim).unwrap();
        let comm = &a * a.adjoint() - a.adjoint() * &a;
        let mut expected = DMatrix::<C64>::identity(dim, dim);
        expected[(dim - 1, dim - 1)] -= c(dim as f64, 0.0);
        assert!((comm - expected).max_modulus() < 1e-14);
    }

    #[test]
    fn pauli_conventions() {
        let sx = pauli(PauliAxis::X);
        assert!((&sx * &sx - DMatrix::<C64>::identity(2, 2)).max_modulus() < 1e-15);
        let g = nalgebra::DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        let e = nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(pauli(PauliAxis::Plus) * &g, e);
        let plus = (pauli(PauliAxis::X) + pauli(PauliAxis::Y) * c(0.0, 1.0)) * c(0.5, 0.0);
        assert_eq!(plus, pauli(PauliAxis::Plus));

        // sigma_y eigenvectors (|e> +- i|g>)/sqrt(2) with eigenvalues +-1
        let sy = pauli(PauliAxis::Y);
        let s = 0.5f64.sqrt();
        for sign in [1.0, -1.0] {
            let v = nalgebra::DVector::from_vec(vec![c(s, 0.0), c(0.0, sign * s)]);
            assert!((&sy * &v - v.scale(sign)).max_modulus() < 1e-15);
        }
    }

    #[test]
    fn squeeze_of_zero_is_identity() {
        let space = make_space(3, 3).unwrap();
        let s = two_mode_squeeze(space, c(0.0, 0.0), &Tolerances::default()).unwrap();
        assert!(s.max_abs_diff(&Operator::identity(space)) < 1e-15);
        let d = displace(space, Subsystem::ModeR, c(0.0, 0.0), &Tolerances::default()).unwrap();
        assert!(d.max_abs_diff(&Operator::identity(space)) < 1e-15);
    }

    #[test]
    fn tmsv_partial_norm_is_geometric() {
        let r: f64 = 0.7;
        for cutoff in [1usize, 5, 12] {
            let sum: f64 = tmsv_amplitudes(c(r, 0.0), cutoff).iter().map(|x| x.norm_sqr()).sum();
            let expected = 1.0 - r.tanh().powi(2 * (cutoff as i32 + 1));
            assert!((sum - expected).abs() < 1e-14);
        }
        assert_eq!(tmsv_amplitudes(c(0.0, 0.0), 3), vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn guard_fires_on_strong_squeezing() {
        let space = make_space(10, 10).unwrap();
        let err = two_mode_squeeze(space, c(2.0, 0.0), &Tolerances::default()).unwrap_err();
        assert!(matches!(err, Error::TailMass { .. }));
        assert_eq!(err.guard(), "tail_mass");
    }
}
