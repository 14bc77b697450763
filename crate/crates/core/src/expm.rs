//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (Higham 2005), plus a block-decomposing driver for sparse anti-Hermitian
//! generators.
//!
//! Generators built from ladder operators couple only a few basis states to
//! each other (the two-mode squeezing generator, for instance, conserves
//! `n_c - n_r`). The driver finds the connected components of the sparsity
//! graph and exponentiates each component as an independent dense block.

use nalgebra::DMatrix;

use crate::MaxModulus;
use crate::error::{Error, Result};
use crate::operator::Operator;
use crate::C64;

/// Largest tolerated `max |A + A^dag|` for a generator.
pub const ANTI_HERMITIAN_TOL: f64 = 1e-12;

const THETA: [(usize, f64); 4] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068),
];
const THETA_13: f64 = 5.371_920_351_148_152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

fn one_norm(a: &DMatrix<C64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled_sum(terms: &[(&DMatrix<C64>, f64)], n: usize) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(n, n);
    for (m, b) in terms {
        out.zip_apply(*m, |o, x| *o += x * *b);
    }
    out
}

/// Solves `(V - U) X = V + U` for the Padé approximant.
fn pade_quotient(u: DMatrix<C64>, v: DMatrix<C64>) -> DMatrix<C64> {
    let p = &v + &u;
    let q = &v - &u;
    q.lu().solve(&p).expect("Padé denominator is nonsingular inside theta_m")
}

fn pade_low(a: &DMatrix<C64>, b: &[f64]) -> DMatrix<C64> {
    let n = a.nrows();
    let identity = DMatrix::<C64>::identity(n, n);
    let a2 = a * a;
    let mut powers = vec![identity, a2.clone()];
    while powers.len() * 2 < b.len() {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let odd: Vec<(&DMatrix<C64>, f64)> = powers
        .iter()
        .enumerate()
        .filter(|(k, _)| 2 * k + 1 < b.len())
        .map(|(k, p)| (p, b[2 * k + 1]))
        .collect();
    let even: Vec<(&DMatrix<C64>, f64)> = powers
        .iter()
        .enumerate()
        .filter(|(k, _)| 2 * k < b.len())
        .map(|(k, p)| (p, b[2 * k]))
        .collect();
    let u = a * scaled_sum(&odd, n);
    let v = scaled_sum(&even, n);
    pade_quotient(u, v)
}

fn pade13(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    let b = &B13;
    let identity = DMatrix::<C64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u_inner = &a6 * scaled_sum(&[(&a6, b[13]), (&a4, b[11]), (&a2, b[9])], n)
        + scaled_sum(
            &[(&a6, b[7]), (&a4, b[5]), (&a2, b[3]), (&identity, b[1])],
            n,
        );
    let u = a * u_inner;
    let v = &a6 * scaled_sum(&[(&a6, b[12]), (&a4, b[10]), (&a2, b[8])], n)
        + scaled_sum(
            &[(&a6, b[6]), (&a4, b[4]), (&a2, b[2]), (&identity, b[0])],
            n,
        );
    pade_quotient(u, v)
}

/// `exp(A)` for a dense square matrix.
pub fn expm_dense(a: &DMatrix<C64>) -> DMatrix<C64> {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let norm = one_norm(a);
    for &(m, theta) in &THETA {
        if norm <= theta {
            let b: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            return pade_low(a, b);
        }
    }
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.unscale(2f64.powi(s));
    let mut x = pade13(&scaled);
    for _ in 0..s {
        x = &x * &x;
    }
    x
}

/// Connected components of the symmetric sparsity graph of `op`.
pub(crate) fn components(op: &Operator) -> Vec<Vec<usize>> {
    let n = op.dim();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (r, c, v) in op.csr().triplet_iter() {
        if *v == C64::new(0.0, 0.0) || r == c {
            continue;
        }
        let (a, b) = (find(&mut parent, r), find(&mut parent, c));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

/// Exponential of an anti-Hermitian generator, unitary on the truncated space.
///
/// `tol` bounds `max |U^dag U - I|` of every dense block; a block that misses
/// it is reported rather than returned.
pub fn expm_antihermitian(generator: &Operator, tol: f64) -> Result<Operator> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "expm tolerance must be positive, got {tol}"
        )));
    }
    let defect = generator.anti_hermiticity_defect();
    if defect > ANTI_HERMITIAN_TOL {
        return Err(Error::NotAntiHermitian {
            defect,
            tolerance: ANTI_HERMITIAN_TOL,
        });
    }
    let space = generator.space();
    let mut triplets = Vec::new();
    for block in components(generator) {
        let k = block.len();
        let mut dense = DMatrix::<C64>::zeros(k, k);
        for (a, &row) in block.iter().enumerate() {
            let r = generator.csr().row(row);
            for (&col, &v) in r.col_indices().iter().zip(r.values()) {
                let b = block.binary_search(&col).expect("column in same component");
                dense[(a, b)] += v;
            }
        }
        let e = expm_dense(&dense);
        let unitarity = (e.adjoint() * &e - DMatrix::<C64>::identity(k, k)).max_modulus();
        if unitarity > tol {
            return Err(Error::NotUnitary {
                defect: unitarity,
                tolerance: tol,
            });
        }
        for (a, &row) in block.iter().enumerate() {
            for (b, &col) in block.iter().enumerate() {
                triplets.push((row, col, e[(a, b)]));
            }
        }
    }
    Ok(Operator::from_triplets(space, triplets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::make_space;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Truncated Taylor series with many terms; independent reference for
    /// small-norm matrices.
    fn taylor(a: &DMatrix<C64>, terms: usize) -> DMatrix<C64> {
        let n = a.nrows();
        let mut sum = DMatrix::<C64>::identity(n, n);
        let mut term = DMatrix::<C64>::identity(n, n);
        for k in 1..terms {
            term = &term * a / c(k as f64, 0.0);
            sum += &term;
        }
        sum
    }

    #[test]
    fn every_pade_degree_matches_taylor() {
        let base = DMatrix::from_fn(5, 5, |i, j| c((i + 2 * j) as f64 * 0.1 - 0.3, (i * j) as f64 * 0.05));
        let base_norm = one_norm(&base);
        for target in [0.01, 0.2, 0.9, 2.0, 4.0, 9.0] {
            let a = base.scale(target / base_norm);
            let reference = if target < 3.0 {
                taylor(&a, 60)
            } else {
                // exp(A) = exp(A/8)^8 keeps the Taylor reference well conditioned
                let mut x = taylor(&a.unscale(8.0), 60);
                for _ in 0..3 {
                    x = &x * &x;
                }
                x
            };
            let got = expm_dense(&a);
            let err = (&got - &reference).max_modulus() / reference.max_modulus();
            assert!(err < 1e-13, "norm {target}: relative error {err:e}");
        }
    }

    #[test]
    fn zero_generator_gives_identity() {
        let space = make_space(2, 2).unwrap();
        let u = expm_antihermitian(&Operator::zero(space), 1e-12).unwrap();
        assert_eq!(u.max_abs_diff(&Operator::identity(space)), 0.0);
    }

    #[test]
    fn rejects_hermitian_generator() {
        let space = make_space(1, 1).unwrap();
        let h = Operator::from_triplets(space, [(0, 1, c(1.0, 0.0)), (1, 0, c(1.0, 0.0))]);
        assert!(matches!(
            expm_antihermitian(&h, 1e-12),
            Err(Error::NotAntiHermitian { .. })
        ));
        assert!(expm_antihermitian(&Operator::zero(space), 0.0).is_err());
    }

    #[test]
    fn components_split_independent_blocks() {
        let space = make_space(1, 1).unwrap();
        let a = Operator::from_triplets(
            space,
            [
                (0, 5, c(0.0, 1.0)),
                (5, 0, c(0.0, 1.0)),
                (5, 9, c(1.0, 0.0)),
                (9, 5, c(-1.0, 0.0)),
            ],
        );
        let comps = components(&a);
        assert_eq!(comps.len(), 16 - 2);
        assert!(comps.contains(&vec![0, 5, 9]));
    }
}
