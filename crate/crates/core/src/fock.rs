//! The weighted monomial model of the Drury-Arveson space on the unit ball of C^d.
//!
//! Degree-n polynomials carry the inner product `<z^a, z^b> = delta_{a,b} a! / |a|!`,
//! making `eps_a = z^a / sqrt(a!/|a|!)` an orthonormal basis of the degree-n piece.
//! All operator blocks produced here are expressed in that basis, so adjoints are
//! conjugate transposes. The basis order is graded lexicographic: within a degree,
//! exponent tuples are listed in descending lexicographic order, e.g. for d = 2,
//! n = 2: (2,0), (1,1), (0,2). This order is fixed and identical across runs.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigUint;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{CoreError, Result};

/// Exponent tuple of a monomial `z^a = z_1^{a_1} ... z_d^{a_d}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    exps: Vec<u32>,
}

impl MultiIndex {
    pub fn new(exps: Vec<u32>) -> Self {
        Self { exps }
    }

    pub fn zero(d: usize) -> Self {
        Self { exps: vec![0; d] }
    }

    /// `e_i` scaled by `k`, in `d` variables (`i` is zero-based).
    pub fn axis(d: usize, i: usize, k: u32) -> Self {
        let mut exps = vec![0; d];
        exps[i] = k;
        Self { exps }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.exps[i]
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    /// Index with the `i`-th exponent raised by one.
    pub fn raised(&self, i: usize) -> Self {
        let mut exps = self.exps.clone();
        exps[i] += 1;
        Self { exps }
    }

    /// Index with the `i`-th exponent lowered by one, if positive.
    pub fn lowered(&self, i: usize) -> Option<Self> {
        if self.exps[i] == 0 {
            return None;
        }
        let mut exps = self.exps.clone();
        exps[i] -= 1;
        Some(Self { exps })
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, e) in self.exps.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Exact number of degree-`n` monomials in `d` variables: binomial(n+d-1, d-1).
pub fn graded_dim(d: usize, n: usize) -> u128 {
    binomial(n as u128 + d as u128 - 1, d as u128 - 1)
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) / (j + 1);
    }
    acc
}

/// All degree-`n` multi-indices in `d` variables, in descending lexicographic order.
pub fn enumerate_degree(d: usize, n: u32) -> Vec<MultiIndex> {
    assert!(d >= 1, "ambient dimension must be positive");
    let mut out = Vec::with_capacity(graded_dim(d, n as usize) as usize);
    let mut current = vec![0u32; d];
    fill_indices(d, n, 0, &mut current, &mut out);
    out
}

fn fill_indices(d: usize, remaining: u32, pos: usize, current: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if pos == d - 1 {
        current[pos] = remaining;
        out.push(MultiIndex::new(current.clone()));
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        fill_indices(d, remaining - e, pos + 1, current, out);
    }
}

/// Cached enumeration of one graded piece with position lookup.
#[derive(Debug, Clone)]
pub struct MonomialBasis {
    d: usize,
    degree: u32,
    indices: Vec<MultiIndex>,
    positions: HashMap<MultiIndex, usize>,
}

impl MonomialBasis {
    pub fn new(d: usize, degree: u32) -> Self {
        let indices = enumerate_degree(d, degree);
        let positions = indices
            .iter()
            .enumerate()
            .map(|(k, a)| (a.clone(), k))
            .collect();
        Self { d, degree, indices, positions }
    }

    pub fn ambient(&self) -> usize {
        self.indices.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn position(&self, a: &MultiIndex) -> Option<usize> {
        self.positions.get(a).copied()
    }
}

/// `a_1! ... a_d! / (a_1 + ... + a_d)!` as an exact rational.
pub fn monomial_norm_squared(a: &MultiIndex) -> BigRational {
    let mut num = BigUint::one();
    for &e in a.exponents() {
        num *= factorial(e);
    }
    let den = factorial(a.degree());
    BigRational::new(num.into(), den.into())
}

/// Floating-point value of [`monomial_norm_squared`].
pub fn monomial_norm_squared_f64(a: &MultiIndex) -> f64 {
    // Evaluated as a product of ratios to stay in range for large degrees.
    let mut value = 1.0f64;
    let mut consumed = 0u32;
    for &e in a.exponents() {
        for k in 1..=e {
            consumed += 1;
            value *= k as f64 / consumed as f64;
        }
    }
    value
}

fn factorial(n: u32) -> BigUint {
    let mut acc = BigUint::one();
    for k in 2..=n as u64 {
        acc *= BigUint::from(k);
    }
    acc
}

/// A point of C^d used for kernel and evaluation operations.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<Complex64>,
}

impl Point {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Self { coords }
    }

    pub fn real(coords: &[f64]) -> Self {
        Self {
            coords: coords.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn d(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn as_vector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.coords)
    }

    /// Image under a (rows x d) matrix.
    pub fn apply(&self, m: &DMatrix<Complex64>) -> Result<Point> {
        if m.ncols() != self.d() {
            return Err(CoreError::ShapeMismatch {
                expected: format!("matrix with {} columns", self.d()),
                got: format!("{}x{}", m.nrows(), m.ncols()),
            });
        }
        Ok(Point {
            coords: (m * self.as_vector()).iter().copied().collect(),
        })
    }
}

/// Homogeneous polynomial held as raw monomial coefficients `p = sum p_a z^a`.
///
/// The zero polynomial is the empty coefficient map. Every stored index has the
/// declared degree.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousPolynomial {
    d: usize,
    degree: u32,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl HomogeneousPolynomial {
    pub fn zero(d: usize, degree: u32) -> Self {
        Self { d, degree, coeffs: BTreeMap::new() }
    }

    pub fn monomial(d: usize, index: MultiIndex, coeff: Complex64) -> Result<Self> {
        if index.len() != d {
            return Err(CoreError::DimensionMismatch { left: index.len(), right: d });
        }
        let mut p = Self::zero(d, index.degree());
        p.add_term(index, coeff)?;
        Ok(p)
    }

    /// The coordinate function `z_i` (zero-based `i`).
    pub fn coordinate(d: usize, i: usize) -> Self {
        let mut p = Self::zero(d, 1);
        p.coeffs.insert(MultiIndex::axis(d, i, 1), Complex64::new(1.0, 0.0));
        p
    }

    /// The linear form `sum_j c_j z_j`.
    pub fn linear_form(coeffs: &[Complex64]) -> Self {
        let d = coeffs.len();
        let mut p = Self::zero(d, 1);
        for (j, &c) in coeffs.iter().enumerate() {
            if c != Complex64::zero() {
                p.coeffs.insert(MultiIndex::axis(d, j, 1), c);
            }
        }
        p
    }

    pub fn add_term(&mut self, index: MultiIndex, coeff: Complex64) -> Result<()> {
        if index.len() != self.d {
            return Err(CoreError::DimensionMismatch { left: index.len(), right: self.d });
        }
        if index.degree() != self.degree {
            return Err(CoreError::DegreeMismatch {
                left: index.degree() as usize,
                right: self.degree as usize,
            });
        }
        let entry = self.coeffs.entry(index.clone()).or_insert_with(Complex64::zero);
        *entry += coeff;
        if entry.norm() == 0.0 {
            self.coeffs.remove(&index);
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, index: &MultiIndex) -> Complex64 {
        self.coeffs.get(index).copied().unwrap_or_else(Complex64::zero)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        if s == Complex64::zero() {
            out.coeffs.clear();
            return out;
        }
        for v in out.coeffs.values_mut() {
            *v *= s;
        }
        out
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.d != other.d {
            return Err(CoreError::DimensionMismatch { left: self.d, right: other.d });
        }
        if self.degree != other.degree && !self.is_zero() && !other.is_zero() {
            return Err(CoreError::DegreeMismatch {
                left: self.degree as usize,
                right: other.degree as usize,
            });
        }
        let mut out = self.clone();
        for (a, &c) in other.terms() {
            out.add_term(a.clone(), c)?;
        }
        Ok(out)
    }

    /// Raw product of homogeneous polynomials (degrees add, exponents shift).
    pub fn times(&self, other: &Self) -> Result<Self> {
        if self.d != other.d {
            return Err(CoreError::DimensionMismatch { left: self.d, right: other.d });
        }
        let mut out = Self::zero(self.d, self.degree + other.degree);
        for (a, &ca) in self.terms() {
            for (b, &cb) in other.terms() {
                out.add_term(a.add(b), ca * cb)?;
            }
        }
        Ok(out)
    }

    /// Multiplication by the monomial `z^b`.
    pub fn shifted(&self, b: &MultiIndex) -> Result<Self> {
        if b.len() != self.d {
            return Err(CoreError::DimensionMismatch { left: b.len(), right: self.d });
        }
        let mut out = Self::zero(self.d, self.degree + b.degree());
        for (a, &c) in self.terms() {
            out.add_term(a.add(b), c)?;
        }
        Ok(out)
    }

    /// `|p|^2` in the ambient inner product, via the weight formula.
    pub fn norm_squared(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|(a, c)| c.norm_sqr() * monomial_norm_squared_f64(a))
            .sum()
    }

    /// Coordinates in the orthonormal basis `eps_a` of the given graded piece.
    pub fn to_coords(&self, basis: &MonomialBasis) -> Result<DVector<Complex64>> {
        if basis.d() != self.d {
            return Err(CoreError::DimensionMismatch { left: basis.d(), right: self.d });
        }
        if !self.is_zero() && basis.degree() != self.degree {
            return Err(CoreError::DegreeMismatch {
                left: basis.degree() as usize,
                right: self.degree as usize,
            });
        }
        let mut v = DVector::zeros(basis.ambient());
        for (a, &c) in self.terms() {
            let pos = basis.position(a).expect("index enumerated for its degree");
            v[pos] = c * Complex64::new(monomial_norm_squared_f64(a).sqrt(), 0.0);
        }
        Ok(v)
    }

    /// Inverse of [`to_coords`]: raw coefficients from orthonormal coordinates.
    pub fn from_coords(basis: &MonomialBasis, v: &DVector<Complex64>) -> Self {
        assert_eq!(v.len(), basis.ambient());
        let mut p = Self::zero(basis.d(), basis.degree());
        for (pos, a) in basis.indices().iter().enumerate() {
            let c = v[pos];
            if c != Complex64::zero() {
                let w = monomial_norm_squared_f64(a).sqrt();
                p.coeffs.insert(a.clone(), c / Complex64::new(w, 0.0));
            }
        }
        p
    }
}

/// `<p, q> = sum_a p_a conj(q_a) a!/|a|!`; zero across distinct degrees.
pub fn inner_product(p: &HomogeneousPolynomial, q: &HomogeneousPolynomial) -> Result<Complex64> {
    if p.d() != q.d() {
        return Err(CoreError::DimensionMismatch { left: p.d(), right: q.d() });
    }
    if p.degree() != q.degree() {
        return Ok(Complex64::zero());
    }
    let mut acc = Complex64::zero();
    for (a, &c) in p.terms() {
        let qc = q.coeff(a);
        if qc != Complex64::zero() {
            acc += c * qc.conj() * monomial_norm_squared_f64(a);
        }
    }
    Ok(acc)
}

/// `p(z) = sum_a p_a z^a`.
pub fn evaluate(p: &HomogeneousPolynomial, z: &Point) -> Result<Complex64> {
    if p.d() != z.d() {
        return Err(CoreError::DimensionMismatch { left: p.d(), right: z.d() });
    }
    let mut acc = Complex64::zero();
    for (a, &c) in p.terms() {
        let mut term = c;
        for (j, &e) in a.exponents().iter().enumerate() {
            term *= z.coords()[j].powu(e);
        }
        acc += term;
    }
    Ok(acc)
}

/// A dense matrix between two graded pieces, columns indexing the source
/// orthonormal basis and rows the target one.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBlock {
    pub source_degree: u32,
    pub target_degree: u32,
    pub matrix: DMatrix<Complex64>,
}

impl OperatorBlock {
    pub fn new(source_degree: u32, target_degree: u32, matrix: DMatrix<Complex64>) -> Self {
        Self { source_degree, target_degree, matrix }
    }

    pub fn operator_norm(&self) -> f64 {
        crate::linalg::operator_norm(&self.matrix)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn singular_values(&self) -> Vec<f64> {
        crate::linalg::singular_values(&self.matrix)
    }
}

/// Shift weight `sqrt((a_i + 1)/(n + 1))` for the column indexed by `a`.
fn shift_weight(a: &MultiIndex, i: usize) -> f64 {
    let n = a.degree();
    ((a.exponent(i) as f64 + 1.0) / (n as f64 + 1.0)).sqrt()
}

/// Matrix of `S_i : H_n -> H_{n+1}`, `S_i eps_a = sqrt((a_i+1)/(n+1)) eps_{a+e_i}`.
pub fn shift_block(d: usize, i: usize, n: u32) -> OperatorBlock {
    let src = MonomialBasis::new(d, n);
    let tgt = MonomialBasis::new(d, n + 1);
    let mut m = DMatrix::zeros(tgt.ambient(), src.ambient());
    for (col, a) in src.indices().iter().enumerate() {
        let row = tgt.position(&a.raised(i)).expect("raised index has degree n+1");
        m[(row, col)] = Complex64::new(shift_weight(a, i), 0.0);
    }
    OperatorBlock::new(n, n + 1, m)
}

/// Apply `S_i : H_n -> H_{n+1}` to orthonormal coordinates without forming the matrix.
pub fn apply_shift(
    src: &MonomialBasis,
    tgt: &MonomialBasis,
    i: usize,
    v: &DVector<Complex64>,
) -> DVector<Complex64> {
    debug_assert_eq!(tgt.degree(), src.degree() + 1);
    debug_assert_eq!(v.len(), src.ambient());
    let mut out = DVector::zeros(tgt.ambient());
    for (col, a) in src.indices().iter().enumerate() {
        let c = v[col];
        if c != Complex64::zero() {
            let row = tgt.position(&a.raised(i)).expect("raised index in target");
            out[row] += c * shift_weight(a, i);
        }
    }
    out
}

/// Apply `S_i^* : H_{n+1} -> H_n` to orthonormal coordinates.
pub fn apply_shift_adjoint(
    src: &MonomialBasis,
    tgt: &MonomialBasis,
    i: usize,
    w: &DVector<Complex64>,
) -> DVector<Complex64> {
    debug_assert_eq!(tgt.degree(), src.degree() + 1);
    debug_assert_eq!(w.len(), tgt.ambient());
    let mut out = DVector::zeros(src.ambient());
    for (col, a) in src.indices().iter().enumerate() {
        let row = tgt.position(&a.raised(i)).expect("raised index in target");
        let c = w[row];
        if c != Complex64::zero() {
            out[col] = c * shift_weight(a, i);
        }
    }
    out
}

/// Block of `[S_i^*, S_j]` on `H_n`, assembled from shift blocks. The second
/// term is absent at `n = 0`.
pub fn full_commutator_block(d: usize, i: usize, j: usize, n: u32) -> OperatorBlock {
    let up_i = shift_block(d, i, n);
    let up_j = shift_block(d, j, n);
    let mut m = up_i.matrix.adjoint() * &up_j.matrix;
    if n > 0 {
        let dn_i = shift_block(d, i, n - 1);
        let dn_j = shift_block(d, j, n - 1);
        m -= &dn_j.matrix * dn_i.matrix.adjoint();
    }
    OperatorBlock::new(n, n, m)
}

/// Operator norm of `[S_i^*, S_j]` on `H_n`, using the one-entry-per-column
/// structure of the block: every `eps_a` is mapped to a multiple of the single
/// index `a - e_i + e_j`, and those targets are distinct, so the singular
/// values are the entry magnitudes.
pub fn shift_commutator_norm(d: usize, i: usize, j: usize, n: u32) -> f64 {
    let nf = n as f64;
    let mut best = 0.0f64;
    for a in enumerate_degree(d, n) {
        let ai = a.exponent(i) as f64;
        let aj = a.exponent(j) as f64;
        let entry = if i == j {
            (ai + 1.0) / (nf + 1.0) - if n > 0 { ai / nf } else { 0.0 }
        } else if a.exponent(i) > 0 {
            (ai * (aj + 1.0)).sqrt() * (1.0 / (nf + 1.0) - if n > 0 { 1.0 / nf } else { 0.0 })
        } else {
            0.0
        };
        best = best.max(entry.abs());
    }
    best
}

/// Degree-`n` piece of the kernel function at `p`: the polynomial
/// `z -> <z, p>^n`, with raw coefficient `(n!/a!) conj(p)^a` on `z^a`.
pub fn kernel_vector(p: &Point, n: u32) -> HomogeneousPolynomial {
    let d = p.d();
    let mut out = HomogeneousPolynomial::zero(d, n);
    for a in enumerate_degree(d, n) {
        // n!/a! = 1 / monomial_norm_squared(a)
        let weight = 1.0 / monomial_norm_squared_f64(&a);
        let mut c = Complex64::new(weight, 0.0);
        for (jv, &e) in a.exponents().iter().enumerate() {
            c *= p.coords()[jv].conj().powu(e);
        }
        if c != Complex64::zero() {
            out.coeffs.insert(a, c);
        }
    }
    out
}

/// Orthonormal coordinates of [`kernel_vector`]: `sqrt(n!/a!) conj(p)^a` on `eps_a`.
pub fn kernel_vector_coords(p: &Point, basis: &MonomialBasis) -> DVector<Complex64> {
    let mut v = DVector::zeros(basis.ambient());
    for (pos, a) in basis.indices().iter().enumerate() {
        let weight = (1.0 / monomial_norm_squared_f64(a)).sqrt();
        let mut c = Complex64::new(weight, 0.0);
        for (jv, &e) in a.exponents().iter().enumerate() {
            c *= p.coords()[jv].conj().powu(e);
        }
        v[pos] = c;
    }
    v
}

/// The polynomial `z -> p(Bz)` for `p` in `d'` variables and `B` of shape `d' x d`.
pub fn compose_linear(
    p: &HomogeneousPolynomial,
    b: &DMatrix<Complex64>,
) -> Result<HomogeneousPolynomial> {
    if b.nrows() != p.d() {
        return Err(CoreError::ShapeMismatch {
            expected: format!("matrix with {} rows", p.d()),
            got: format!("{}x{}", b.nrows(), b.ncols()),
        });
    }
    let d_out = b.ncols();
    let n = p.degree();
    let mut out = HomogeneousPolynomial::zero(d_out, n);
    if p.is_zero() {
        return Ok(out);
    }

    // Rows of B become linear forms in the output variables.
    let rows: Vec<HomogeneousPolynomial> = (0..p.d())
        .map(|k| {
            let coeffs: Vec<Complex64> = (0..d_out).map(|j| b[(k, j)]).collect();
            HomogeneousPolynomial::linear_form(&coeffs)
        })
        .collect();

    // Cache powers of each row form up to the largest exponent used.
    let mut powers: Vec<Vec<HomogeneousPolynomial>> = rows
        .iter()
        .map(|r| vec![HomogeneousPolynomial::monomial(d_out, MultiIndex::zero(d_out), Complex64::one()).unwrap(), r.clone()])
        .collect();
    for (a, _) in p.terms() {
        for (k, &e) in a.exponents().iter().enumerate() {
            while powers[k].len() <= e as usize {
                let next = powers[k].last().unwrap().times(&rows[k])?;
                powers[k].push(next);
            }
        }
    }

    for (a, &c) in p.terms() {
        let mut term = HomogeneousPolynomial::monomial(d_out, MultiIndex::zero(d_out), c).unwrap();
        for (k, &e) in a.exponents().iter().enumerate() {
            if e > 0 {
                term = term.times(&powers[k][e as usize])?;
            }
        }
        for (idx, &tc) in term.terms() {
            out.add_term(idx.clone(), tc)?;
        }
    }
    Ok(out)
}

/// Exact rational check value used by tests: `monomial_norm_squared` times its
/// reciprocal is one.
pub fn norm_squared_reciprocal(a: &MultiIndex) -> BigRational {
    monomial_norm_squared(a).recip()
}

/// Convert an exact rational to `f64` (used for cross-checks).
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("rational within f64 range")
}
