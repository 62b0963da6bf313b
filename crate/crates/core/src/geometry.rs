//! Friedrichs angles, subspace arithmetic, tensor-power angle decay and
//! quantitative closedness witnesses for sums of graded pieces.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::linalg::{self, Thresholds};
use crate::variety::{GradedSubspace, PowerTower, SubspaceComponent};

/// Outcome of a Friedrichs-angle computation.
#[derive(Debug, Clone, Serialize)]
pub struct AngleReport {
    pub cos: f64,
    pub intersection_dim: usize,
}

/// Orthonormal basis of `M ∩ N` via principal vectors: cosines within the
/// intersection threshold of 1 select intersection directions.
pub fn intersect(m: &GradedSubspace, n: &GradedSubspace, thresholds: &Thresholds) -> Result<GradedSubspace> {
    check_compatible(m, n)?;
    let k = linalg::intersection_basis(m.basis(), n.basis(), thresholds);
    Ok(GradedSubspace::new_unchecked(m.degree(), k))
}

/// Friedrichs cosine `cos(M, N)`: the largest principal cosine after removing
/// `M ∩ N` from both sides. An empty complement yields 0 (empty supremum).
pub fn friedrichs_cos(m: &GradedSubspace, n: &GradedSubspace, thresholds: &Thresholds) -> Result<AngleReport> {
    check_compatible(m, n)?;
    Ok(friedrichs_cos_matrices(m.basis(), n.basis(), thresholds))
}

/// Matrix-level Friedrichs cosine, shared by graded pieces and ambient
/// component spans.
pub fn friedrichs_cos_matrices(
    m: &DMatrix<Complex64>,
    n: &DMatrix<Complex64>,
    thresholds: &Thresholds,
) -> AngleReport {
    let k = linalg::intersection_basis(m, n, thresholds);
    let m_red = linalg::complement_within(m, &k, thresholds);
    let n_red = linalg::complement_within(n, &k, thresholds);
    if m_red.ncols() == 0 || n_red.ncols() == 0 {
        return AngleReport { cos: 0.0, intersection_dim: k.ncols() };
    }
    let cos = linalg::principal_cosines(&m_red, &n_red)
        .first()
        .copied()
        .unwrap_or(0.0);
    AngleReport { cos, intersection_dim: k.ncols() }
}

/// The constant `c = max cos(L_i, L_j)` over unordered pairs, with a
/// certificate that all pairwise intersections vanish.
#[derive(Debug, Clone, Serialize)]
pub struct PairwiseCosReport {
    pub c: f64,
    pub all_intersections_trivial: bool,
}

pub fn max_pairwise_cos(bases: &[DMatrix<Complex64>], thresholds: &Thresholds) -> Result<PairwiseCosReport> {
    if bases.len() < 2 {
        return Err(CoreError::InvalidSpec("need at least two components".into()));
    }
    let mut c = 0.0f64;
    let mut trivial = true;
    for i in 0..bases.len() {
        for j in i + 1..bases.len() {
            let report = friedrichs_cos_matrices(&bases[i], &bases[j], thresholds);
            c = c.max(report.cos);
            if report.intersection_dim > 0 {
                trivial = false;
            }
        }
    }
    Ok(PairwiseCosReport { c, all_intersections_trivial: trivial })
}

fn check_compatible(m: &GradedSubspace, n: &GradedSubspace) -> Result<()> {
    if m.degree() != n.degree() {
        return Err(CoreError::DegreeMismatch {
            left: m.degree() as usize,
            right: n.degree() as usize,
        });
    }
    if m.ambient_dim() != n.ambient_dim() {
        return Err(CoreError::DimensionMismatch {
            left: m.ambient_dim(),
            right: n.ambient_dim(),
        });
    }
    Ok(())
}

fn require_disjoint_spans(components: &[SubspaceComponent], thresholds: &Thresholds) -> Result<()> {
    for i in 0..components.len() {
        for j in i + 1..components.len() {
            let k = linalg::intersection_basis(
                components[i].basis(),
                components[j].basis(),
                thresholds,
            );
            if k.ncols() > 0 {
                return Err(CoreError::SpansNotDisjoint { i, j });
            }
        }
    }
    Ok(())
}

/// One degree of the tensor-power angle table for a component pair.
#[derive(Debug, Clone, Serialize)]
pub struct DecayRow {
    pub power: u32,
    pub cos: f64,
    /// `c_ij^k`, the tensor-power bound for this pair.
    pub bound: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairDecay {
    pub i: usize,
    pub j: usize,
    pub c_pair: f64,
    pub rows: Vec<DecayRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TensorDecayReport {
    pub c: f64,
    pub pairs: Vec<PairDecay>,
}

/// Per-pair, per-power Friedrichs cosines of `V_i^k` against `V_j^k`,
/// checked against the decay bound `c_ij^k` (tolerance 1e-9).
pub fn tensor_angle_decay(
    components: &[SubspaceComponent],
    k_max: u32,
    thresholds: &Thresholds,
) -> Result<TensorDecayReport> {
    require_disjoint_spans(components, thresholds)?;
    let bases: Vec<DMatrix<Complex64>> = components.iter().map(|c| c.basis().clone()).collect();
    let global = max_pairwise_cos(&bases, thresholds)?;
    let towers: Vec<PowerTower> = components
        .iter()
        .map(|c| PowerTower::build(c, k_max))
        .collect();
    let mut pairs = Vec::new();
    for i in 0..components.len() {
        for j in i + 1..components.len() {
            let c_pair = friedrichs_cos_matrices(&bases[i], &bases[j], thresholds).cos;
            let mut rows = Vec::with_capacity(k_max as usize);
            for k in 1..=k_max {
                let pi = towers[i].piece(k);
                let pj = towers[j].piece(k);
                let cos = friedrichs_cos(pi, pj, thresholds)?.cos;
                let bound = c_pair.powi(k as i32);
                rows.push(DecayRow {
                    power: k,
                    cos,
                    bound,
                    within_bound: cos <= bound + 1e-9,
                });
            }
            pairs.push(PairDecay { i, j, c_pair, rows });
        }
    }
    Ok(TensorDecayReport { c: global.c, pairs })
}

/// Decomposition of a vector of `V^n` along the component pieces, with the
/// two-sided norm comparison `(1 - k c^n) |v|^2 <= sum |v_i|^2 <= (1 + k c^n) |v|^2`.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub degree: u32,
    pub k: usize,
    pub c: f64,
    pub norm_sq: f64,
    pub component_norms_sq: Vec<f64>,
    pub sum_component_sq: f64,
    pub lower: f64,
    pub upper: f64,
    /// The inequality is asserted only where `1 - k c^n > 0`.
    pub bound_applicable: bool,
    pub within_bounds: bool,
    /// Residual `|v - sum v_i|`.
    pub reconstruction_residual: f64,
}

/// Threshold below which the concatenated component basis counts as dependent.
const DEPENDENCE_TOL: f64 = 1e-8;

pub fn component_decomposition(
    v: &DVector<Complex64>,
    component_pieces: &[GradedSubspace],
    c: f64,
    thresholds: &Thresholds,
) -> Result<DecompositionReport> {
    if component_pieces.is_empty() {
        return Err(CoreError::InvalidSpec("need component pieces".into()));
    }
    let degree = component_pieces[0].degree();
    let ambient = component_pieces[0].ambient_dim();
    let total: usize = component_pieces.iter().map(|p| p.dim()).sum();
    let mut stacked = DMatrix::zeros(ambient, total);
    let mut at = 0;
    for p in component_pieces {
        stacked.view_mut((0, at), (ambient, p.dim())).copy_from(p.basis());
        at += p.dim();
    }
    let sigma_min = linalg::operator_sigma_min(&stacked);
    if sigma_min <= DEPENDENCE_TOL {
        return Err(CoreError::DependentComponents { sigma_min });
    }
    let solution = linalg::pseudo_solve(&stacked, v, thresholds);
    let mut component_norms_sq = Vec::with_capacity(component_pieces.len());
    let mut reconstruction = DVector::zeros(ambient);
    let mut at = 0;
    for p in component_pieces {
        let x = solution.rows(at, p.dim()).into_owned();
        let vi = p.basis() * &x;
        component_norms_sq.push(vi.norm_squared());
        reconstruction += vi;
        at += p.dim();
    }
    let norm_sq = v.norm_squared();
    let sum_component_sq: f64 = component_norms_sq.iter().sum();
    let k = component_pieces.len();
    let factor = k as f64 * c.powi(degree as i32);
    let lower = (1.0 - factor) * norm_sq;
    let upper = (1.0 + factor) * norm_sq;
    let bound_applicable = 1.0 - factor > 0.0;
    let within_bounds = !bound_applicable
        || (sum_component_sq >= lower - 1e-9 && sum_component_sq <= upper + 1e-9);
    Ok(DecompositionReport {
        degree,
        k,
        c,
        norm_sq,
        component_norms_sq,
        sum_component_sq,
        lower,
        upper,
        bound_applicable,
        within_bounds,
        reconstruction_residual: (reconstruction - v).norm(),
    })
}

/// One degree of the closedness witness.
#[derive(Debug, Clone, Serialize)]
pub struct ClosednessRow {
    pub degree: u32,
    pub sigma_min: f64,
    /// `sqrt(max(0, 1 - c^k (m-1)))`.
    pub bound: f64,
    /// Set where the bound is positive; vacuous degrees pass by convention.
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosednessReport {
    pub c: f64,
    pub component_count: usize,
    pub rows: Vec<ClosednessRow>,
}

/// Smallest singular value of the concatenation map
/// `T_k : V_1^k ⊕ ... ⊕ V_m^k -> H_k` per degree, against the lower bound
/// `sigma_min^2 >= 1 - c^k (m - 1)` wherever the right side is positive.
pub fn closedness_witness(
    components: &[SubspaceComponent],
    n_max: u32,
    thresholds: &Thresholds,
) -> Result<ClosednessReport> {
    if components.len() < 2 {
        return Err(CoreError::InvalidSpec("need at least two components".into()));
    }
    require_disjoint_spans(components, thresholds)?;
    let bases: Vec<DMatrix<Complex64>> = components.iter().map(|c| c.basis().clone()).collect();
    let c = max_pairwise_cos(&bases, thresholds)?.c;
    let m = components.len();
    let towers: Vec<PowerTower> = components
        .iter()
        .map(|c| PowerTower::build(c, n_max))
        .collect();
    let mut rows = Vec::with_capacity(n_max as usize);
    for k in 1..=n_max {
        let powers: Vec<&GradedSubspace> = towers.iter().map(|t| t.piece(k)).collect();
        let total: usize = powers.iter().map(|p| p.dim()).sum();
        let ambient = powers[0].ambient_dim();
        let mut stacked = DMatrix::zeros(ambient, total);
        let mut at = 0;
        for p in &powers {
            stacked.view_mut((0, at), (ambient, p.dim())).copy_from(p.basis());
            at += p.dim();
        }
        let sigma_min = linalg::operator_sigma_min(&stacked);
        let bound_sq = 1.0 - c.powi(k as i32) * (m as f64 - 1.0);
        let bound = bound_sq.max(0.0).sqrt();
        let pass = if bound_sq > 0.0 {
            sigma_min * sigma_min >= bound_sq - 1e-9
        } else {
            true
        };
        rows.push(ClosednessRow { degree: k, sigma_min, bound, pass });
    }
    Ok(ClosednessReport { c, component_count: m, rows })
}

/// One degree of the subspace-sum check (components may overlap).
#[derive(Debug, Clone, Serialize)]
pub struct SumCheckRow {
    pub degree: u32,
    /// Smallest singular value of the sum map restricted to the orthogonal
    /// complement of its kernel (the smallest positive singular value).
    pub sigma_min_positive: f64,
    pub kernel_dim: usize,
}

/// Degreewise floor for the sum map of linear-subspace pieces. A uniform
/// positive floor over the computed degrees is a finite-truncation witness
/// consistent with closedness of the algebraic sum.
pub fn subspace_sum_check(
    components: &[SubspaceComponent],
    n_max: u32,
    thresholds: &Thresholds,
) -> Result<Vec<SumCheckRow>> {
    if components.is_empty() {
        return Err(CoreError::InvalidSpec("need components".into()));
    }
    let towers: Vec<PowerTower> = components
        .iter()
        .map(|c| PowerTower::build(c, n_max))
        .collect();
    let mut rows = Vec::with_capacity(n_max as usize);
    for k in 1..=n_max {
        let powers: Vec<&GradedSubspace> = towers.iter().map(|t| t.piece(k)).collect();
        let total: usize = powers.iter().map(|p| p.dim()).sum();
        let ambient = powers[0].ambient_dim();
        let mut stacked = DMatrix::zeros(ambient, total);
        let mut at = 0;
        for p in &powers {
            stacked.view_mut((0, at), (ambient, p.dim())).copy_from(p.basis());
            at += p.dim();
        }
        let sigma = linalg::singular_values(&stacked);
        let cutoff = sigma.first().copied().unwrap_or(0.0) * thresholds.rank_rel;
        let positive: Vec<f64> = sigma.iter().copied().filter(|&s| s > cutoff).collect();
        rows.push(SumCheckRow {
            degree: k,
            sigma_min_positive: positive.last().copied().unwrap_or(0.0),
            kernel_dim: total - positive.len(),
        });
    }
    Ok(rows)
}
