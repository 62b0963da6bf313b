//! Independent oracles shared by the integration suites.
//!
//! Everything here is built from first principles (full truncated matrices,
//! explicit projections, combinatorial counting) and deliberately avoids the
//! graded per-degree composition paths it is used to check.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use dalab_core::essnorm::GradedModule;
use dalab_core::fock::{enumerate_degree, monomial_norm_squared_f64, MultiIndex};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Coordinate layout of the truncation `H_0 + ... + H_N`.
pub struct Truncation {
    pub d: usize,
    pub max_degree: u32,
    pub offsets: Vec<usize>,
    pub sizes: Vec<usize>,
    pub total: usize,
}

impl Truncation {
    pub fn new(d: usize, max_degree: u32) -> Self {
        let mut offsets = Vec::with_capacity(max_degree as usize + 1);
        let mut sizes = Vec::with_capacity(max_degree as usize + 1);
        let mut total = 0usize;
        for n in 0..=max_degree {
            offsets.push(total);
            let size = enumerate_degree(d, n).len();
            sizes.push(size);
            total += size;
        }
        Self { d, max_degree, offsets, sizes, total }
    }
}

/// Full matrix of `S_i` on the truncation, assembled entrywise from the
/// rational weight ratios (not from the library's shift blocks).
pub fn full_shift_matrix(tr: &Truncation, i: usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(tr.total, tr.total);
    for n in 0..tr.max_degree {
        let src = enumerate_degree(tr.d, n);
        let tgt = enumerate_degree(tr.d, n + 1);
        let tgt_pos = |a: &MultiIndex| tgt.iter().position(|b| b == a).unwrap();
        for (col, a) in src.iter().enumerate() {
            let raised = a.raised(i);
            let w = (monomial_norm_squared_f64(&raised) / monomial_norm_squared_f64(a)).sqrt();
            let row = tr.offsets[n as usize + 1] + tgt_pos(&raised);
            m[(row, tr.offsets[n as usize] + col)] = c(w, 0.0);
        }
    }
    m
}

/// Full projection onto the module pieces, embedded degree by degree.
pub fn full_projection(tr: &Truncation, module: &GradedModule) -> DMatrix<Complex64> {
    let mut p = DMatrix::zeros(tr.total, tr.total);
    for n in 0..=tr.max_degree {
        let piece = module.piece(n).unwrap();
        let gram = piece.basis() * piece.basis().adjoint();
        let off = tr.offsets[n as usize];
        let size = tr.sizes[n as usize];
        p.view_mut((off, off), (size, size)).copy_from(&gram);
    }
    p
}

/// Brute-force block of `[T_i^*, T_j]` on the degree-`n` piece, computed from
/// the full truncated matrices with an explicit projection, then expressed in
/// the piece's own basis.
pub fn brute_commutator_block(
    tr: &Truncation,
    module: &GradedModule,
    i: usize,
    j: usize,
    n: u32,
) -> DMatrix<Complex64> {
    let p = full_projection(tr, module);
    let ti = &p * full_shift_matrix(tr, i) * &p;
    let tj = &p * full_shift_matrix(tr, j) * &p;
    let comm = ti.adjoint() * &tj - &tj * ti.adjoint();

    let piece = module.piece(n).unwrap();
    let mut lifted = DMatrix::zeros(tr.total, piece.dim());
    let off = tr.offsets[n as usize];
    for col in 0..piece.dim() {
        for row in 0..piece.ambient_dim() {
            lifted[(off + row, col)] = piece.basis()[(row, col)];
        }
    }
    lifted.adjoint() * comm * lifted
}

/// Counting oracle for monomial ideals: degree-`n` monomials divisible by at
/// least one generator exponent.
pub fn count_divisible(d: usize, n: u32, generators: &[Vec<u32>]) -> usize {
    enumerate_degree(d, n)
        .into_iter()
        .filter(|a| {
            generators
                .iter()
                .any(|g| g.iter().zip(a.exponents()).all(|(ge, ae)| ge <= ae))
        })
        .count()
}

/// Counting oracle for the graded pieces of a sum of monomial ideals.
pub fn count_sum(d: usize, n: u32, gens_a: &[Vec<u32>], gens_b: &[Vec<u32>]) -> usize {
    let mut all: Vec<Vec<u32>> = gens_a.to_vec();
    all.extend_from_slice(gens_b);
    count_divisible(d, n, &all)
}

/// Counting oracle for the graded pieces of an intersection of monomial ideals.
pub fn count_intersection(d: usize, n: u32, gens_a: &[Vec<u32>], gens_b: &[Vec<u32>]) -> usize {
    enumerate_degree(d, n)
        .into_iter()
        .filter(|a| {
            let div = |gens: &[Vec<u32>]| {
                gens.iter()
                    .any(|g| g.iter().zip(a.exponents()).all(|(ge, ae)| ge <= ae))
            };
            div(gens_a) && div(gens_b)
        })
        .count()
}

/// Max-norm of the difference of two complex matrices.
pub fn entrywise_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    assert_eq!(a.nrows(), b.nrows());
    assert_eq!(a.ncols(), b.ncols());
    (a - b).iter().map(|v| v.norm()).fold(0.0f64, f64::max)
}

/// Horner-free naive evaluation used as the reproducing-property oracle.
pub fn naive_evaluate(
    terms: &[(Vec<u32>, Complex64)],
    point: &[Complex64],
) -> Complex64 {
    let mut acc = c(0.0, 0.0);
    for (exps, coeff) in terms {
        let mut t = *coeff;
        for (j, &e) in exps.iter().enumerate() {
            for _ in 0..e {
                t *= point[j];
            }
        }
        acc += t;
    }
    acc
}

/// Deterministic unit vector for seeded tests.
pub fn seeded_unit(rng: &mut impl rand::Rng, d: usize) -> DVector<Complex64> {
    let v = DVector::from_fn(d, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let norm = v.norm();
    v / c(norm, 0.0)
}
