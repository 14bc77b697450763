//! State vectors on the composite space, motional factors, and reduced
//! density matrices.

use nalgebra::{DMatrix, DVector};

use crate::MaxModulus;
use crate::error::{Error, Result};
use crate::space::{BasisLabel, Level, SpaceDescriptor, Subsystem, INTERNAL_DIM};
use crate::C64;

/// Tolerance on `|<psi|psi> - 1|` for a state to count as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Complex amplitudes over the composite basis.
///
/// The squared norm is computed once at construction and carried along, so an
/// unnormalized state (for instance the output of a projection) always knows
/// its weight.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: SpaceDescriptor,
    amplitudes: DVector<C64>,
    norm_sq: f64,
}

impl StateVector {
    pub fn from_amplitudes(space: SpaceDescriptor, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: amplitudes.len(),
            });
        }
        let norm_sq = amplitudes.norm_squared();
        Ok(Self {
            space,
            amplitudes,
            norm_sq,
        })
    }

    pub fn zeros(space: SpaceDescriptor) -> Self {
        Self {
            space,
            amplitudes: DVector::zeros(space.dim()),
            norm_sq: 0.0,
        }
    }

    /// Product of a two-ion internal vector (ordered `ee, eg, ge, gg`) and a
    /// motional factor.
    pub fn product(internal: &[C64; 4], motion: &MotionalState) -> Self {
        let space = motion.space();
        let m = space.motional_dim();
        let flat = motion.flat();
        let mut amps = DVector::zeros(space.dim());
        for (q, &c) in internal.iter().enumerate() {
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            amps.rows_mut(q * m, m).axpy(c, &flat, C64::new(0.0, 0.0));
        }
        let norm_sq = amps.norm_squared();
        Self {
            space,
            amplitudes: amps,
            norm_sq,
        }
    }

    pub fn space(&self) -> SpaceDescriptor {
        self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amplitudes
    }

    pub fn amplitude(&self, label: BasisLabel) -> Result<C64> {
        Ok(self.amplitudes[self.space.index(label)?])
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq.sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sq - 1.0).abs() <= NORMALIZATION_TOL
    }

    pub fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized {
                norm_sq: self.norm_sq,
            })
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        if self.norm_sq == 0.0 {
            return Err(Error::NotNormalized { norm_sq: 0.0 });
        }
        let amps = self.amplitudes.unscale(self.norm_sq.sqrt());
        Self::from_amplitudes(self.space, amps)
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            space: self.space,
            amplitudes: self.amplitudes.map(|a| a * c),
            norm_sq: self.norm_sq * c.norm_sqr(),
        }
    }

    /// Motional amplitudes attached to one internal configuration.
    pub fn internal_component(&self, s1: Level, s2: Level) -> MotionalState {
        let m = self.space.motional_dim();
        let q = SpaceDescriptor::internal_index(s1, s2);
        MotionalState::from_flat(self.space, self.amplitudes.rows(q * m, m).into_owned())
    }

    /// The `4 x M` coefficient matrix with internal rows and motional columns.
    pub(crate) fn internal_by_motional(&self) -> DMatrix<C64> {
        let m = self.space.motional_dim();
        DMatrix::from_fn(INTERNAL_DIM, m, |q, j| self.amplitudes[q * m + j])
    }

    /// Splits a product state into its internal and motional factors.
    ///
    /// Fails when the purity of the internal reduced state is further than
    /// `tolerance` from 1. The motional factor is normalized and carries the
    /// phase convention that its largest internal component is real-positive.
    pub fn factorize(&self, tolerance: f64) -> Result<([C64; 4], MotionalState)> {
        self.require_normalized()?;
        let purity = internal_purity(self);
        if (purity - 1.0).abs() > tolerance {
            return Err(Error::ImpureMotion { purity });
        }
        let coeffs = self.internal_by_motional();
        let (q_max, _) = (0..INTERNAL_DIM)
            .map(|q| (q, coeffs.row(q).norm_squared()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let row = coeffs.row(q_max).transpose();
        let row_norm = row.norm();
        let motion_flat = row.unscale(row_norm);
        let mut internal = [C64::new(0.0, 0.0); 4];
        for (q, slot) in internal.iter_mut().enumerate() {
            *slot = motion_flat.dotc(&coeffs.row(q).transpose());
        }
        Ok((internal, MotionalState::from_flat(self.space, motion_flat)))
    }
}

/// Unit vector `|s1, s2, n_c, n_r>`.
pub fn basis_state(
    space: SpaceDescriptor,
    s1: Level,
    s2: Level,
    n_c: usize,
    n_r: usize,
) -> Result<StateVector> {
    let index = space.index(BasisLabel { s1, s2, n_c, n_r })?;
    let mut amps = DVector::zeros(space.dim());
    amps[index] = C64::new(1.0, 0.0);
    StateVector::from_amplitudes(space, amps)
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner(a: &StateVector, b: &StateVector) -> Result<C64> {
    a.space.check_same(&b.space)?;
    Ok(a.amplitudes.dotc(&b.amplitudes))
}

pub fn norm(state: &StateVector) -> f64 {
    state.norm()
}

/// Projects onto the internal configuration `|s1, s2>`.
///
/// Returns the unnormalized projected state and its squared norm, which is
/// the outcome probability for a normalized input.
pub fn project_internal(state: &StateVector, s1: Level, s2: Level) -> (StateVector, f64) {
    let space = state.space;
    let m = space.motional_dim();
    let q = SpaceDescriptor::internal_index(s1, s2);
    let mut amps = DVector::zeros(space.dim());
    amps.rows_mut(q * m, m)
        .copy_from(&state.amplitudes.rows(q * m, m));
    let projected = StateVector::from_amplitudes(space, amps).expect("same dimension");
    let p = projected.norm_sq;
    (projected, p)
}

/// Pure state of the two motional modes, stored as an `(n_c, n_r)` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionalState {
    space: SpaceDescriptor,
    amplitudes: DMatrix<C64>,
}

impl MotionalState {
    pub fn new(space: SpaceDescriptor, amplitudes: DMatrix<C64>) -> Result<Self> {
        if amplitudes.shape() != (space.dim_c(), space.dim_r()) {
            return Err(Error::DimensionMismatch {
                expected: space.motional_dim(),
                found: amplitudes.len(),
            });
        }
        Ok(Self { space, amplitudes })
    }

    pub fn vacuum(space: SpaceDescriptor) -> Self {
        Self::fock(space, 0, 0).expect("vacuum is in range")
    }

    pub fn fock(space: SpaceDescriptor, n_c: usize, n_r: usize) -> Result<Self> {
        space.check_fock(Subsystem::ModeC, n_c)?;
        space.check_fock(Subsystem::ModeR, n_r)?;
        let mut amps = DMatrix::zeros(space.dim_c(), space.dim_r());
        amps[(n_c, n_r)] = C64::new(1.0, 0.0);
        Ok(Self {
            space,
            amplitudes: amps,
        })
    }

    /// Builds from amplitudes indexed by `n_c * (n_r_cut + 1) + n_r`.
    pub fn from_flat(space: SpaceDescriptor, flat: DVector<C64>) -> Self {
        assert_eq!(flat.len(), space.motional_dim());
        let dr = space.dim_r();
        let amplitudes = DMatrix::from_fn(space.dim_c(), dr, |c, r| flat[c * dr + r]);
        Self { space, amplitudes }
    }

    pub fn flat(&self) -> DVector<C64> {
        let dr = self.space.dim_r();
        DVector::from_fn(self.space.motional_dim(), |j, _| {
            self.amplitudes[(j / dr, j % dr)]
        })
    }

    pub fn space(&self) -> SpaceDescriptor {
        self.space
    }

    /// Amplitude matrix, rows indexed by `n_c`, columns by `n_r`.
    pub fn amplitudes(&self) -> &DMatrix<C64> {
        &self.amplitudes
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sq();
        if n == 0.0 {
            return Err(Error::NotNormalized { norm_sq: 0.0 });
        }
        Ok(Self {
            space: self.space,
            amplitudes: self.amplitudes.unscale(n.sqrt()),
        })
    }

    pub fn inner(&self, other: &MotionalState) -> Result<C64> {
        self.space.check_same(&other.space)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Reduced density matrix of the center-of-mass mode.
    pub fn reduced_mode_c(&self) -> DMatrix<C64> {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    /// Population of each `(n_c, n_r)` level.
    pub fn populations(&self) -> DMatrix<f64> {
        self.amplitudes.map(|a| a.norm_sqr())
    }
}

/// Reduced density matrix over a subset of the factors.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    subsystems: Vec<Subsystem>,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Checks unit trace, Hermiticity and a nonnegative spectrum.
    pub fn new(subsystems: Vec<Subsystem>, matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidArgument("density matrix must be square".into()));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "density matrix trace {trace} differs from 1"
            )));
        }
        let herm = (&matrix - matrix.adjoint()).max_modulus();
        if herm > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "density matrix not Hermitian (defect {herm:e})"
            )));
        }
        let rho = Self { subsystems, matrix };
        if rho.eigenvalues().iter().any(|&l| l < -1e-10) {
            return Err(Error::InvalidArgument(
                "density matrix has a negative eigenvalue".into(),
            ));
        }
        Ok(rho)
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `Tr rho^2`, evaluated as the squared Frobenius norm of a Hermitian matrix.
    pub fn purity(&self) -> f64 {
        self.matrix.norm_squared()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.eigenvalues())
    }
}

pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// `-sum p log2 p` over the positive part of a spectrum.
pub fn entropy_bits(spectrum: &[f64]) -> f64 {
    spectrum
        .iter()
        .filter(|&&p| p > 1e-300)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Reduced density matrix over `keep`, in the declared factor order.
pub fn partial_trace(state: &StateVector, keep: &[Subsystem]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::EmptyKeep);
    }
    state.require_normalized()?;
    let space = state.space;
    let mut kept: Vec<Subsystem> = keep.to_vec();
    kept.sort();
    kept.dedup();
    let dims = space.dims();
    let is_kept = |k: usize| kept.iter().any(|s| s.position() == k);
    let d_keep: usize = (0..4).filter(|&k| is_kept(k)).map(|k| dims[k]).product();
    let d_rest = space.dim() / d_keep;

    let mut psi = DMatrix::<C64>::zeros(d_keep, d_rest);
    for (index, &amp) in state.amplitudes.iter().enumerate() {
        let digits = space.digits(index);
        let (mut row, mut col) = (0, 0);
        for k in 0..4 {
            if is_kept(k) {
                row = row * dims[k] + digits[k];
            } else {
                col = col * dims[k] + digits[k];
            }
        }
        psi[(row, col)] = amp;
    }
    let rho = &psi * psi.adjoint();
    // Symmetrize away rounding so the Hermiticity invariant holds exactly.
    let rho = (&rho + rho.adjoint()).scale(0.5);
    DensityMatrix::new(kept, rho)
}

/// Purity of the two-ion reduced state; equals the motional purity for a
/// pure composite state.
pub fn internal_purity(state: &StateVector) -> f64 {
    let c = state.internal_by_motional();
    let rho = &c * c.adjoint();
    rho.norm_squared() / (state.norm_sq * state.norm_sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::make_space;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn basis_state_spike() {
        let space = make_space(3, 2).unwrap();
        let s = basis_state(space, Level::E, Level::E, 0, 0).unwrap();
        assert!(s.is_normalized());
        assert_eq!(s.amplitudes().iter().filter(|a| a.norm() > 0.0).count(), 1);
        let edge = basis_state(space, Level::G, Level::E, 3, 0).unwrap();
        assert!(edge.is_normalized());
        assert!(matches!(
            basis_state(space, Level::E, Level::E, 4, 0),
            Err(Error::FockIndexOutOfRange { index: 4, cutoff: 3, .. })
        ));
    }

    #[test]
    fn projection_probabilities() {
        let space = make_space(2, 2).unwrap();
        let ee = basis_state(space, Level::E, Level::E, 0, 0).unwrap();
        assert_eq!(project_internal(&ee, Level::E, Level::E).1, 1.0);
        assert_eq!(project_internal(&ee, Level::G, Level::G).1, 0.0);

        let h = 0.5;
        let internal = [c(h, 0.0), c(h, 0.0), c(-h, 0.0), c(-h, 0.0)];
        let psi = StateVector::product(&internal, &MotionalState::vacuum(space));
        assert!(psi.is_normalized());
        let (proj, p) = project_internal(&psi, Level::E, Level::E);
        assert!((p - 0.25).abs() < 1e-15);
        assert!((proj.norm_sq() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn partial_trace_of_product_is_pure() {
        let space = make_space(3, 3).unwrap();
        let mut amps = DMatrix::zeros(4, 4);
        amps[(0, 0)] = c(0.6, 0.0);
        amps[(1, 2)] = c(0.0, 0.8);
        let motion = MotionalState::new(space, amps).unwrap();
        let s = 0.5f64.sqrt();
        let psi = StateVector::product(&[c(s, 0.0), c(0.0, s), c(0.0, 0.0), c(0.0, 0.0)], &motion);
        for keep in [
            vec![Subsystem::Ion1],
            vec![Subsystem::Ion2],
            vec![Subsystem::ModeC, Subsystem::ModeR],
        ] {
            let rho = partial_trace(&psi, &keep).unwrap();
            assert!((rho.trace().re - 1.0).abs() < 1e-12);
            if keep.len() == 2 {
                assert!((rho.purity() - 1.0).abs() < 1e-10);
            }
        }
        // mode_c alone is entangled with mode_r here
        let rho_c = partial_trace(&psi, &[Subsystem::ModeC]).unwrap();
        assert!((rho_c.purity() - (0.36f64.powi(2) + 0.64f64.powi(2))).abs() < 1e-12);
    }

    #[test]
    fn keep_everything_is_projector() {
        let space = make_space(1, 1).unwrap();
        let amps = DVector::from_fn(space.dim(), |i, _| c(i as f64, 1.0));
        let psi = StateVector::from_amplitudes(space, amps).unwrap().normalized().unwrap();
        let rho = partial_trace(&psi, &Subsystem::ALL).unwrap();
        let projector = psi.amplitudes() * psi.amplitudes().adjoint();
        assert!((rho.matrix() - projector).max_modulus() < 1e-14);
        assert!(matches!(partial_trace(&psi, &[]), Err(Error::EmptyKeep)));
    }

    #[test]
    fn factorize_recovers_factors() {
        let space = make_space(2, 2).unwrap();
        let motion = MotionalState::fock(space, 1, 2).unwrap();
        let internal = [c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0), c(0.0, -0.5)];
        let psi = StateVector::product(&internal, &motion);
        let (int2, mot2) = psi.factorize(1e-9).unwrap();
        let overlap = mot2.inner(&motion).unwrap().norm();
        assert!((overlap - 1.0).abs() < 1e-14);
        let recon = StateVector::product(&int2, &mot2);
        assert!((recon.amplitudes() - psi.amplitudes()).max_modulus() < 1e-14);
    }
}
