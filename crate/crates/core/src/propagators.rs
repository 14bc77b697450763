//! Closed-form evolution operators of the sideband drives and the carrier
//! pulses, assembled literally as polynomials in `S`, `D` and embedded Pauli
//! matrices.
//!
//! Block actions in the `sigma_x` (squeezing) or `sigma_y` (displacement)
//! eigenbasis of the two ions:
//!
//! | propagator  | equal eigenvalues      | `(+1, -1)`      | `(-1, +1)`     |
//! |-------------|------------------------|-----------------|----------------|
//! | `u_squeeze` | identity               | `S(-2G)`        | `S(2G)`        |
//! | `u_ce`      | `D(+-2 beta_c)`        | identity        | identity       |
//! | `u_re`      | identity               | `D(-2 beta_r)`  | `D(2 beta_r)`  |

use serde::Serialize;

use crate::error::Result;
use crate::operator::{LocalOperator, Operator};
use crate::operators::{
    displace, guard_vacuum_image, pauli, squeeze_generator, two_ion, two_mode_squeeze, PauliAxis,
};
use crate::space::{SpaceDescriptor, Subsystem};
use crate::{Tolerances, C64};

/// Parameters of the two-sideband drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveCoupling {
    /// Rabi frequency (rad/s).
    pub omega: f64,
    /// Lamb-Dicke parameter of the center-of-mass mode.
    pub eta: f64,
    /// Lamb-Dicke parameter of the breathing mode.
    pub eta_r: f64,
    /// Interaction time (s).
    pub t: f64,
}

impl EffectiveCoupling {
    /// Squeezing parameter `G = -i Omega eta eta_r t`.
    pub fn g(&self) -> C64 {
        C64::new(0.0, -self.omega * self.eta * self.eta_r * self.t)
    }

    /// `r = 2 |G|`, the squeezing factor of the realized `S(2G)`.
    pub fn squeezing_factor(&self) -> f64 {
        2.0 * self.g().norm()
    }
}

fn identity2() -> LocalOperator {
    LocalOperator::identity(2, 2)
}

fn ion_op(space: SpaceDescriptor, axis: PauliAxis, ion: Subsystem) -> Result<Operator> {
    let local = match ion {
        Subsystem::Ion1 => two_ion(&pauli(axis), &identity2()),
        _ => two_ion(&identity2(), &pauli(axis)),
    };
    Operator::internal(space, &local)
}

/// `Omega eta eta_r (a b + a^dag b^dag)(sigma_x1 - sigma_x2)`.
pub fn h_eff_squeeze(space: SpaceDescriptor, omega: f64, eta: f64, eta_r: f64) -> Result<Operator> {
    // -i (G* ab - G a^dag b^dag) with G = -i is ab + a^dag b^dag
    let mut pair = squeeze_generator(space, C64::new(0.0, -1.0));
    for v in pair.values_mut() {
        *v *= C64::new(0.0, -1.0);
    }
    let spin = two_ion(&pauli(PauliAxis::X), &identity2()) - two_ion(&identity2(), &pauli(PauliAxis::X));
    Ok(Operator::internal_motional(space, &spin, &pair)?.scale(C64::new(omega * eta * eta_r, 0.0)))
}

/// Two-mode squeezing propagator
/// `1/4 {[S^dag + S]^2 - sx1 sx2 [S^dag - S]^2 + (sx1 - sx2)[S^dag + S][S^dag - S]}`
/// with `S = S(G)`.
pub fn u_squeeze(space: SpaceDescriptor, g: C64, tol: &Tolerances) -> Result<Operator> {
    let s = two_mode_squeeze(space, g, tol)?;
    guard_vacuum_image(&(&s * &s), &tol.guard())?;
    let s_dag = s.adjoint();
    let sum = &s_dag + &s;
    let diff = &s_dag - &s;
    let sx1 = ion_op(space, PauliAxis::X, Subsystem::Ion1)?;
    let sx2 = ion_op(space, PauliAxis::X, Subsystem::Ion2)?;
    let first = &sum * &sum;
    let second = &(&sx1 * &sx2) * &(&diff * &diff);
    let third = &(&sx1 - &sx2) * &(&sum * &diff);
    Ok((&(&first - &second) + &third).scale(C64::new(0.25, 0.0)))
}

/// Center-of-mass displacement propagator, a product over both ions of
/// `1/2 {[D^dag + D] - sigma_yi [D^dag - D]}` with `D = D(beta_c)` on `mode_c`.
///
/// The per-ion factor carries 1/2 so that the product is unitary.
pub fn u_ce(space: SpaceDescriptor, beta_c: C64, tol: &Tolerances) -> Result<Operator> {
    let d = displace(space, Subsystem::ModeC, beta_c, tol)?;
    guard_vacuum_image(&(&d * &d), &tol.guard())?;
    let d_dag = d.adjoint();
    let sum = &d_dag + &d;
    let diff = &d_dag - &d;
    let half = C64::new(0.5, 0.0);
    let factor = |ion| -> Result<Operator> {
        let sy = ion_op(space, PauliAxis::Y, ion)?;
        Ok((&sum - &(&sy * &diff)).scale(half))
    };
    let f1 = factor(Subsystem::Ion1)?;
    let f2 = factor(Subsystem::Ion2)?;
    Ok(&f1 * &f2)
}

/// Breathing-mode displacement propagator
/// `1/4 {[D^dag + D]^2 - sy1 sy2 [D^dag - D]^2 + (sy1 - sy2)[D^dag + D][D^dag - D]}`
/// with `D = D(beta_r)` on `mode_r`.
pub fn u_re(space: SpaceDescriptor, beta_r: C64, tol: &Tolerances) -> Result<Operator> {
    let d = displace(space, Subsystem::ModeR, beta_r, tol)?;
    guard_vacuum_image(&(&d * &d), &tol.guard())?;
    let d_dag = d.adjoint();
    let sum = &d_dag + &d;
    let diff = &d_dag - &d;
    let sy1 = ion_op(space, PauliAxis::Y, Subsystem::Ion1)?;
    let sy2 = ion_op(space, PauliAxis::Y, Subsystem::Ion2)?;
    let first = &sum * &sum;
    let second = &(&sy1 * &sy2) * &(&diff * &diff);
    let third = &(&sy1 - &sy2) * &(&sum * &diff);
    Ok((&(&first - &second) + &third).scale(C64::new(0.25, 0.0)))
}

/// Internal part of the carrier pulse
/// `1/4 (1 - i sx1 + i sy1 + i sz1)(1 - i sx2 - i sy2 - i sz2)`.
pub fn carrier_internal() -> LocalOperator {
    let i = C64::new(0.0, 1.0);
    let ion1 = (identity2() - pauli(PauliAxis::X) * i + pauli(PauliAxis::Y) * i + pauli(PauliAxis::Z) * i)
        * C64::new(0.5, 0.0);
    let ion2 = (identity2() - pauli(PauliAxis::X) * i - pauli(PauliAxis::Y) * i - pauli(PauliAxis::Z) * i)
        * C64::new(0.5, 0.0);
    two_ion(&ion1, &ion2)
}

pub fn u_carrier(space: SpaceDescriptor) -> Result<Operator> {
    Operator::internal(space, &carrier_internal())
}

/// `-sigma_z` on ion 1.
pub fn u_flip1(space: SpaceDescriptor) -> Result<Operator> {
    Ok(ion_op(space, PauliAxis::Z, Subsystem::Ion1)?.scale(C64::new(-1.0, 0.0)))
}
