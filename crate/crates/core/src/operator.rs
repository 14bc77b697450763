//! Operators on the composite space.
//!
//! Matrices are kept in compressed sparse row form. Ladder, Pauli, squeezing
//! and displacement operators embedded in the composite space have a few
//! nonzeros per row, and their exponentials decompose into small dense
//! blocks, so the composite dimension (several thousand at cutoffs 30-35)
//! never has to be materialized densely.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use crate::error::{Error, Result};
use crate::space::{SpaceDescriptor, Subsystem, INTERNAL_DIM};
use crate::state::StateVector;
use crate::C64;

/// Small dense matrix acting on a single factor (or on the two-ion block).
pub type LocalOperator = DMatrix<C64>;

#[derive(Debug, Clone)]
pub struct Operator {
    space: SpaceDescriptor,
    matrix: CsrMatrix<C64>,
}

impl PartialEq for Operator {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.max_abs_diff(other) == 0.0
    }
}

impl Operator {
    pub fn from_csr(space: SpaceDescriptor, matrix: CsrMatrix<C64>) -> Result<Self> {
        let n = space.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { space, matrix })
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        space: SpaceDescriptor,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Self {
        let n = space.dim();
        let mut coo = CooMatrix::new(n, n);
        for (r, c, v) in triplets {
            if v != C64::new(0.0, 0.0) {
                coo.push(r, c, v);
            }
        }
        Self {
            space,
            matrix: CsrMatrix::from(&coo),
        }
    }

    pub fn identity(space: SpaceDescriptor) -> Self {
        Self {
            space,
            matrix: CsrMatrix::identity(space.dim()),
        }
    }

    pub fn zero(space: SpaceDescriptor) -> Self {
        Self {
            space,
            matrix: CsrMatrix::zeros(space.dim(), space.dim()),
        }
    }

    /// `internal (x) motional`, with `internal` a 4x4 matrix over the two-ion
    /// configurations `ee, eg, ge, gg` and `motional` an `M x M` matrix over
    /// `mode_c (x) mode_r`.
    pub fn internal_motional(
        space: SpaceDescriptor,
        internal: &LocalOperator,
        motional: &CsrMatrix<C64>,
    ) -> Result<Self> {
        let m = space.motional_dim();
        if internal.shape() != (INTERNAL_DIM, INTERNAL_DIM) {
            return Err(Error::DimensionMismatch {
                expected: INTERNAL_DIM,
                found: internal.nrows(),
            });
        }
        if motional.nrows() != m || motional.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: motional.nrows(),
            });
        }
        let mut triplets = Vec::new();
        for p in 0..INTERNAL_DIM {
            for q in 0..INTERNAL_DIM {
                let x = internal[(p, q)];
                if x == C64::new(0.0, 0.0) {
                    continue;
                }
                for (r, c, &v) in motional.triplet_iter() {
                    triplets.push((p * m + r, q * m + c, x * v));
                }
            }
        }
        Ok(Self::from_triplets(space, triplets))
    }

    /// `I_internal (x) motional`.
    pub fn motional(space: SpaceDescriptor, motional: &CsrMatrix<C64>) -> Result<Self> {
        Self::internal_motional(space, &LocalOperator::identity(4, 4), motional)
    }

    /// `internal (x) I_motional`.
    pub fn internal(space: SpaceDescriptor, internal: &LocalOperator) -> Result<Self> {
        Self::internal_motional(space, internal, &CsrMatrix::identity(space.motional_dim()))
    }

    pub fn space(&self) -> SpaceDescriptor {
        self.space
    }

    pub fn csr(&self) -> &CsrMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix
            .get_entry(row, col)
            .map(|e| e.into_value())
            .unwrap_or_default()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut d = DMatrix::zeros(self.dim(), self.dim());
        for (r, c, &v) in self.matrix.triplet_iter() {
            d[(r, c)] += v;
        }
        d
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut matrix = self.matrix.clone();
        for v in matrix.values_mut() {
            *v *= c;
        }
        Self {
            space: self.space,
            matrix,
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut matrix = self.matrix.transpose();
        for v in matrix.values_mut() {
            *v = v.conj();
        }
        Self {
            space: self.space,
            matrix,
        }
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        &(self * other) - &(other * self)
    }

    /// `max |A_ij|`.
    pub fn max_abs(&self) -> f64 {
        self.matrix
            .values()
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// `max |A_ij - B_ij|`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.space, other.space, "operators on different spaces");
        (self - other).max_abs()
    }

    /// `max |U^dag U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let product = &self.adjoint() * self;
        product.max_abs_diff(&Operator::identity(self.space))
    }

    /// `max |A - A^dag|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// `max |A + A^dag|`.
    pub fn anti_hermiticity_defect(&self) -> f64 {
        (self + &self.adjoint()).max_abs()
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        self.space.check_same(&state.space())?;
        let out = self.apply_vec(state.amplitudes());
        StateVector::from_amplitudes(self.space, out)
    }

    pub(crate) fn apply_vec(&self, v: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::zeros(v.len());
        spmv(&self.matrix, v, &mut out);
        out
    }
}

/// `out = A v` for a CSR matrix.
pub(crate) fn spmv(a: &CsrMatrix<C64>, v: &DVector<C64>, out: &mut DVector<C64>) {
    for (i, row) in a.row_iter().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (&j, &x) in row.col_indices().iter().zip(row.values()) {
            acc += x * v[j];
        }
        out[i] = acc;
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;

    fn mul(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "operators on different spaces");
        Operator {
            space: self.space,
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;

    fn add(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "operators on different spaces");
        Operator {
            space: self.space,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;

    fn sub(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "operators on different spaces");
        Operator {
            space: self.space,
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

/// Embeds a single-factor operator, acting as the identity on the other three
/// factors.
pub fn tensor_embed(
    space: SpaceDescriptor,
    local_op: &LocalOperator,
    subsystem: Subsystem,
) -> Result<Operator> {
    let d = space.subsystem_dim(subsystem);
    if local_op.nrows() != d || local_op.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: local_op.nrows().max(local_op.ncols()),
        });
    }
    let stride = space.stride(subsystem);
    let pos = subsystem.position();
    let mut triplets = Vec::new();
    for col in 0..space.dim() {
        let digit = space.digits(col)[pos];
        let base = col - digit * stride;
        for row_digit in 0..d {
            let v = local_op[(row_digit, digit)];
            if v != C64::new(0.0, 0.0) {
                triplets.push((base + row_digit * stride, col, v));
            }
        }
    }
    Ok(Operator::from_triplets(space, triplets))
}

/// Sparse form of a dense matrix, dropping exact zeros.
pub(crate) fn dense_to_csr(m: &DMatrix<C64>) -> CsrMatrix<C64> {
    let mut coo = CooMatrix::new(m.nrows(), m.ncols());
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let v = m[(r, c)];
            if v != C64::new(0.0, 0.0) {
                coo.push(r, c, v);
            }
        }
    }
    CsrMatrix::from(&coo)
}

/// Kronecker product of two sparse matrices.
pub(crate) fn kron(a: &CsrMatrix<C64>, b: &CsrMatrix<C64>) -> CsrMatrix<C64> {
    let (br, bc) = (b.nrows(), b.ncols());
    let mut coo = CooMatrix::new(a.nrows() * br, a.ncols() * bc);
    for (i, j, &x) in a.triplet_iter() {
        for (k, l, &y) in b.triplet_iter() {
            coo.push(i * br + k, j * bc + l, x * y);
        }
    }
    CsrMatrix::from(&coo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::MaxModulus;
    use crate::space::{make_space, Level};
    use crate::state::basis_state;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ladder(dim: usize) -> LocalOperator {
        DMatrix::from_fn(dim, dim, |r, col| {
            if col == r + 1 {
                c((col as f64).sqrt(), 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
    }

    #[test]
    fn identity_embeds_to_identity() {
        let space = make_space(2, 3).unwrap();
        for s in Subsystem::ALL {
            let d = space.subsystem_dim(s);
            let e = tensor_embed(space, &LocalOperator::identity(d, d), s).unwrap();
            assert_eq!(e.max_abs_diff(&Operator::identity(space)), 0.0);
        }
    }

    #[test]
    fn sigma_z_on_ion1_has_plus_one_on_excited() {
        let space = make_space(1, 2).unwrap();
        let sz = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        let op = tensor_embed(space, &sz, Subsystem::Ion1).unwrap();
        for s2 in [Level::E, Level::G] {
            for n_c in 0..=1 {
                let e = basis_state(space, Level::E, s2, n_c, 2).unwrap();
                let out = op.apply(&e).unwrap();
                assert!((out.amplitudes() - e.amplitudes()).max_modulus() < 1e-15);
            }
        }
    }

    #[test]
    fn embedded_ladder_elements() {
        let space = make_space(4, 2).unwrap();
        let a = tensor_embed(space, &ladder(5), Subsystem::ModeC).unwrap();
        for n in 1..=4 {
            let col = basis_state(space, Level::G, Level::E, n, 1).unwrap();
            let out = a.apply(&col).unwrap();
            let row = basis_state(space, Level::G, Level::E, n - 1, 1).unwrap();
            let elem = crate::state::inner(&row, &out).unwrap();
            assert!((elem - c((n as f64).sqrt(), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn embedding_is_homomorphism_and_distinct_factors_commute() {
        let space = make_space(3, 3).unwrap();
        let a = ladder(4);
        let b = a.adjoint() + &a * c(0.0, 0.3);
        let ea = tensor_embed(space, &a, Subsystem::ModeR).unwrap();
        let eb = tensor_embed(space, &b, Subsystem::ModeR).unwrap();
        let eab = tensor_embed(space, &(&a * &b), Subsystem::ModeR).unwrap();
        assert!((&ea * &eb).max_abs_diff(&eab) < 1e-14);

        let sx = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let ex = tensor_embed(space, &sx, Subsystem::Ion2).unwrap();
        let ec = tensor_embed(space, &a, Subsystem::ModeC).unwrap();
        assert!(ex.commutator(&ea).max_abs() <= 1e-12);
        assert!(ec.commutator(&ea).max_abs() <= 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let space = make_space(3, 3).unwrap();
        assert!(matches!(
            tensor_embed(space, &ladder(3), Subsystem::ModeC),
            Err(Error::DimensionMismatch { expected: 4, .. })
        ));
        let other = make_space(2, 3).unwrap();
        let psi = basis_state(other, Level::E, Level::E, 0, 0).unwrap();
        assert!(matches!(
            Operator::identity(space).apply(&psi),
            Err(Error::SpaceMismatch)
        ));
    }
}
