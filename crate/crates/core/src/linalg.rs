//! Dense complex helpers shared by the graded modules: SVD-based
//! orthonormalization, principal angles, complements and norms.
//!
//! Rank decisions use a relative singular-value cutoff; intersection detection
//! uses a separate threshold on principal cosines. Both are carried in
//! [`Thresholds`] and are independently configurable.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Numerical cutoffs used across the crate.
#[derive(Debug, Clone, Copy)]
pub struct Thresholds {
    /// Singular values below `rank_rel * sigma_max` count as zero.
    pub rank_rel: f64,
    /// Principal cosines within `intersection` of 1 select intersection directions.
    pub intersection: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { rank_rel: 1e-10, intersection: 1e-8 }
    }
}

pub fn operator_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let svd = nalgebra::SVD::new(m.clone(), false, false);
    svd.singular_values.iter().copied().fold(0.0, f64::max)
}

pub fn frobenius_norm(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let svd = nalgebra::SVD::new(m.clone(), false, false);
    svd.singular_values.iter().copied().collect()
}

pub fn smallest_singular_value(m: &DMatrix<Complex64>) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// Smallest singular value of `m` as an operator on its full column domain:
/// a matrix with more columns than rows has a kernel, hence 0.
pub fn operator_sigma_min(m: &DMatrix<Complex64>) -> f64 {
    if m.ncols() == 0 {
        return 0.0;
    }
    if m.ncols() > m.nrows() {
        return 0.0;
    }
    smallest_singular_value(m)
}

/// Orthonormal basis of the column span, via SVD with the relative rank cutoff.
/// Columns of the result are the left singular vectors kept, in singular-value
/// order, which makes the output deterministic.
pub fn orthonormalize(m: &DMatrix<Complex64>, thresholds: &Thresholds) -> DMatrix<Complex64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = nalgebra::SVD::new(m.clone(), true, false);
    let u = svd.u.expect("requested U");
    let sigma = &svd.singular_values;
    let cutoff = sigma.iter().copied().fold(0.0f64, f64::max) * thresholds.rank_rel;
    let rank = sigma.iter().filter(|&&s| s > cutoff && s > 0.0).count();
    u.columns(0, rank).into_owned()
}

/// Like [`orthonormalize`], also returning the combination matrix `X` with
/// `m * X = Q` (columns of `Q` as combinations of the input columns).
pub fn orthonormalize_with_combination(
    m: &DMatrix<Complex64>,
    thresholds: &Thresholds,
) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    if m.ncols() == 0 || m.nrows() == 0 {
        return (DMatrix::zeros(m.nrows(), 0), DMatrix::zeros(m.ncols(), 0));
    }
    let svd = nalgebra::SVD::new(m.clone(), true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^H");
    let sigma = &svd.singular_values;
    let cutoff = sigma.iter().copied().fold(0.0f64, f64::max) * thresholds.rank_rel;
    let rank = sigma.iter().filter(|&&s| s > cutoff && s > 0.0).count();
    let q = u.columns(0, rank).into_owned();
    let mut x = vt.rows(0, rank).adjoint();
    for k in 0..rank {
        let scale = Complex64::new(1.0 / sigma[k], 0.0);
        for r in 0..x.nrows() {
            x[(r, k)] *= scale;
        }
    }
    (q, x)
}

/// Rank with the relative cutoff.
pub fn rank(m: &DMatrix<Complex64>, thresholds: &Thresholds) -> usize {
    let sigma = singular_values(m);
    let cutoff = sigma.first().copied().unwrap_or(0.0) * thresholds.rank_rel;
    sigma.iter().filter(|&&s| s > cutoff && s > 0.0).count()
}

/// Orthonormal basis of the orthogonal complement of `basis` (assumed to have
/// orthonormal columns) inside the full ambient space.
pub fn complement(basis: &DMatrix<Complex64>, thresholds: &Thresholds) -> DMatrix<Complex64> {
    let ambient = basis.nrows();
    if basis.ncols() == 0 {
        return DMatrix::identity(ambient, ambient);
    }
    let mut residual = DMatrix::identity(ambient, ambient);
    residual -= basis * basis.adjoint();
    let svd = nalgebra::SVD::new(residual, true, false);
    let u = svd.u.expect("requested U");
    // Singular values here are 0 or 1 up to roundoff.
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0.5)
        .map(|(k, _)| k)
        .collect();
    let _ = thresholds;
    let mut out = DMatrix::zeros(ambient, keep.len());
    for (dst, src) in keep.iter().enumerate() {
        out.set_column(dst, &u.column(*src));
    }
    out
}

/// Principal cosines between two orthonormal column spans: the singular values
/// of `A^H B`, descending, clamped into [0, 1].
pub fn principal_cosines(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Vec<f64> {
    if a.ncols() == 0 || b.ncols() == 0 {
        return Vec::new();
    }
    singular_values(&(a.adjoint() * b))
        .into_iter()
        .map(|s| s.clamp(0.0, 1.0))
        .collect()
}

/// Orthonormal basis of the intersection of two orthonormal column spans.
/// Directions are the principal vectors whose cosines are within
/// `thresholds.intersection` of one.
pub fn intersection_basis(
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
    thresholds: &Thresholds,
) -> DMatrix<Complex64> {
    if a.ncols() == 0 || b.ncols() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let svd = nalgebra::SVD::new(a.adjoint() * b, true, false);
    let u = svd.u.expect("requested U");
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s >= 1.0 - thresholds.intersection)
        .map(|(k, _)| k)
        .collect();
    if keep.is_empty() {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let mut combo = DMatrix::zeros(a.ncols(), keep.len());
    for (dst, src) in keep.iter().enumerate() {
        combo.set_column(dst, &u.column(*src));
    }
    // a * combo already has nearly orthonormal columns; clean up.
    orthonormalize(&(a * combo), thresholds)
}

/// Orthonormal basis of `span(m) minus k`: project out `k` (orthonormal
/// columns) and re-orthonormalize.
pub fn complement_within(
    m: &DMatrix<Complex64>,
    k: &DMatrix<Complex64>,
    thresholds: &Thresholds,
) -> DMatrix<Complex64> {
    if k.ncols() == 0 {
        return m.clone();
    }
    let projected = m - k * (k.adjoint() * m);
    orthonormalize(&projected, thresholds)
}

/// Operator-norm distance between the orthogonal projections onto two
/// orthonormal column spans. Equal ranks give `max sin(theta_k)`; unequal
/// ranks give exactly 1.
pub fn projection_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    if a.ncols() != b.ncols() {
        return if a.ncols() == 0 && b.ncols() == 0 { 0.0 } else { 1.0 };
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    let cosines = principal_cosines(a, b);
    let min_cos = cosines.last().copied().unwrap_or(1.0);
    (1.0 - min_cos * min_cos).max(0.0).sqrt()
}

/// Least-squares solve via SVD pseudo-inverse with the relative rank cutoff.
pub fn pseudo_solve(
    m: &DMatrix<Complex64>,
    rhs: &DVector<Complex64>,
    thresholds: &Thresholds,
) -> DVector<Complex64> {
    if m.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = nalgebra::SVD::new(m.clone(), true, true);
    let u = svd.u.as_ref().expect("requested U");
    let vt = svd.v_t.as_ref().expect("requested V^H");
    let sigma = &svd.singular_values;
    let cutoff = sigma.iter().copied().fold(0.0f64, f64::max) * thresholds.rank_rel;
    let mut y = u.adjoint() * rhs;
    for (k, &s) in sigma.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            y[k] /= Complex64::new(s, 0.0);
        } else {
            y[k] = Complex64::new(0.0, 0.0);
        }
    }
    vt.adjoint() * y
}

/// Inverse of a small well-conditioned square matrix via SVD.
pub fn svd_inverse(m: &DMatrix<Complex64>, thresholds: &Thresholds) -> Option<DMatrix<Complex64>> {
    if m.nrows() != m.ncols() {
        return None;
    }
    let svd = nalgebra::SVD::new(m.clone(), true, true);
    let u = svd.u.as_ref()?;
    let vt = svd.v_t.as_ref()?;
    let sigma = &svd.singular_values;
    let max = sigma.iter().copied().fold(0.0f64, f64::max);
    if sigma.iter().any(|&s| s <= max * thresholds.rank_rel || s == 0.0) {
        return None;
    }
    let mut inv_sigma = DMatrix::zeros(m.ncols(), m.nrows());
    for (k, &s) in sigma.iter().enumerate() {
        inv_sigma[(k, k)] = Complex64::new(1.0 / s, 0.0);
    }
    Some(vt.adjoint() * inv_sigma * u.adjoint())
}

/// Largest absolute deviation of `B^H B` from the identity.
pub fn isometry_deviation(b: &DMatrix<Complex64>) -> f64 {
    let gram = b.adjoint() * b;
    let mut dev = 0.0f64;
    for r in 0..gram.nrows() {
        for c in 0..gram.ncols() {
            let expected = if r == c { 1.0 } else { 0.0 };
            dev = dev.max((gram[(r, c)] - Complex64::new(expected, 0.0)).norm());
        }
    }
    dev
}
