//! Compressed shifts on quotient pieces, commutator blocks, the projection
//! commutator identity, and Schatten partial-sum diagnostics.
//!
//! All blocks are degree-indexed. A block at degree `n` built from shifts needs
//! pieces at `n+1`, so a module computed through `max_degree` carries commutator
//! blocks through `max_degree - 1`, with the last two degrees marked
//! boundary-affected; fits skip them.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::fock::{
    apply_shift, apply_shift_adjoint, graded_dim, MonomialBasis, OperatorBlock,
};
use crate::linalg::{self, Thresholds};
use crate::variety::{
    quotient_graded_piece, variety_graded_pieces, GradedSubspace, IdealSpec, VarietySpec,
};

/// What to build the quotient pieces from.
#[derive(Debug, Clone)]
pub enum ModuleSpec {
    /// The full space (zero ideal): `F_n = H_n`.
    Full { d: usize },
    Ideal(IdealSpec),
    Variety(VarietySpec),
}

impl ModuleSpec {
    pub fn d(&self) -> usize {
        match self {
            ModuleSpec::Full { d } => *d,
            ModuleSpec::Ideal(i) => i.d(),
            ModuleSpec::Variety(v) => v.d(),
        }
    }

    fn pieces(&self, n_max: u32, thresholds: &Thresholds) -> Vec<GradedSubspace> {
        match self {
            ModuleSpec::Full { d } => (0..=n_max)
                .map(|n| {
                    let ambient = graded_dim(*d, n as usize) as usize;
                    GradedSubspace::new_unchecked(n, DMatrix::identity(ambient, ambient))
                })
                .collect(),
            ModuleSpec::Ideal(i) => (0..=n_max)
                .map(|n| quotient_graded_piece(i, n, thresholds))
                .collect(),
            ModuleSpec::Variety(v) => variety_graded_pieces(v, n_max, thresholds),
        }
    }
}

/// Graded pieces `F_0, ..., F_N` of one quotient module, with cached ambient
/// monomial bases.
#[derive(Debug, Clone)]
pub struct GradedModule {
    d: usize,
    pieces: Vec<GradedSubspace>,
    ambient: Vec<MonomialBasis>,
}

impl GradedModule {
    pub fn build(spec: &ModuleSpec, max_degree: u32, thresholds: &Thresholds) -> Self {
        let d = spec.d();
        let pieces = spec.pieces(max_degree, thresholds);
        let ambient = (0..=max_degree).map(|n| MonomialBasis::new(d, n)).collect();
        Self { d, pieces, ambient }
    }

    /// Assemble a module from externally produced (e.g. cached) pieces; the
    /// piece at index `n` must be the degree-`n` basis.
    pub fn from_pieces(d: usize, pieces: Vec<GradedSubspace>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(CoreError::InvalidSpec("need at least the degree-0 piece".into()));
        }
        for (n, piece) in pieces.iter().enumerate() {
            if piece.degree() as usize != n {
                return Err(CoreError::DegreeMismatch { left: piece.degree() as usize, right: n });
            }
            let expected = graded_dim(d, n) as usize;
            if piece.ambient_dim() != expected {
                return Err(CoreError::DimensionMismatch {
                    left: piece.ambient_dim(),
                    right: expected,
                });
            }
        }
        let ambient = (0..pieces.len()).map(|n| MonomialBasis::new(d, n as u32)).collect();
        Ok(Self { d, pieces, ambient })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn max_degree(&self) -> u32 {
        (self.pieces.len() - 1) as u32
    }

    pub fn piece(&self, n: u32) -> Result<&GradedSubspace> {
        self.pieces.get(n as usize).ok_or(CoreError::DegreeOutOfRange {
            degree: n as usize,
            max: self.pieces.len() - 1,
        })
    }

    pub fn ambient_basis(&self, n: u32) -> Result<&MonomialBasis> {
        self.ambient.get(n as usize).ok_or(CoreError::DegreeOutOfRange {
            degree: n as usize,
            max: self.ambient.len() - 1,
        })
    }

    /// `S_i` applied to the columns of `F_n`, in ambient degree-(n+1) coordinates.
    fn shifted_piece(&self, i: usize, n: u32) -> Result<DMatrix<Complex64>> {
        let src = self.ambient_basis(n)?;
        let tgt = self.ambient_basis(n + 1)?;
        let f = self.piece(n)?;
        let mut out = DMatrix::zeros(tgt.ambient(), f.dim());
        for col in 0..f.dim() {
            let v: DVector<Complex64> = f.basis().column(col).into_owned();
            out.set_column(col, &apply_shift(src, tgt, i, &v));
        }
        Ok(out)
    }
}

/// `T_i^{(n)} = P_{F_{n+1}} S_i |_{F_n}` in the orthonormal bases of the pieces.
pub fn compressed_shift_block(module: &GradedModule, i: usize, n: u32) -> Result<OperatorBlock> {
    let shifted = module.shifted_piece(i, n)?;
    let tgt = module.piece(n + 1)?;
    Ok(OperatorBlock::new(n, n + 1, tgt.basis().adjoint() * shifted))
}

/// Block of `[T_i^*, T_j]` on `F_n`; the degree-(n-1) term is absent at `n = 0`.
pub fn commutator_block(module: &GradedModule, i: usize, j: usize, n: u32) -> Result<OperatorBlock> {
    let ti = compressed_shift_block(module, i, n)?;
    let tj = compressed_shift_block(module, j, n)?;
    let mut m = ti.matrix.adjoint() * &tj.matrix;
    if n > 0 {
        let ti_dn = compressed_shift_block(module, i, n - 1)?;
        let tj_dn = compressed_shift_block(module, j, n - 1)?;
        m -= &tj_dn.matrix * ti_dn.matrix.adjoint();
    }
    Ok(OperatorBlock::new(n, n, m))
}

/// Block of `[P, S_i] : H_n -> H_{n+1}` in ambient coordinates:
/// `P_{F_{n+1}} S_i - S_i P_{F_n}`.
pub fn projection_commutator_block(module: &GradedModule, i: usize, n: u32) -> Result<OperatorBlock> {
    let src = module.ambient_basis(n)?;
    let tgt = module.ambient_basis(n + 1)?;
    let f_n = module.piece(n)?;
    let f_n1 = module.piece(n + 1)?;

    // columns of S_i on the ambient basis, one entry per column
    let mut s_cols = DMatrix::zeros(tgt.ambient(), src.ambient());
    for col in 0..src.ambient() {
        let mut e = DVector::zeros(src.ambient());
        e[col] = Complex64::new(1.0, 0.0);
        s_cols.set_column(col, &apply_shift(src, tgt, i, &e));
    }
    let p_s = f_n1.basis() * (f_n1.basis().adjoint() * &s_cols);
    let s_p = &s_cols * (f_n.basis() * f_n.basis().adjoint());
    Ok(OperatorBlock::new(n, n + 1, p_s - s_p))
}

/// Frobenius deviation at degree `n` of
/// `[T_i^*, T_j] = P [S_i^*, S_j] P - [P, S_i]^* [P, S_j]`,
/// assembled in the `F_n` basis.
pub fn lemma_identity_residual(module: &GradedModule, i: usize, j: usize, n: u32) -> Result<f64> {
    let lhs = commutator_block(module, i, j, n)?.matrix;

    let src = module.ambient_basis(n)?;
    let tgt = module.ambient_basis(n + 1)?;
    let f_n = module.piece(n)?;
    let f_n1 = module.piece(n + 1)?;
    let r = f_n.dim();
    let ambient_up = tgt.ambient();

    // P [S_i^*, S_j] P in the F_n basis, by sparse application to the columns.
    let mut up_j = DMatrix::zeros(ambient_up, r);
    let mut up_i = DMatrix::zeros(ambient_up, r);
    for col in 0..r {
        let v: DVector<Complex64> = f_n.basis().column(col).into_owned();
        up_j.set_column(col, &apply_shift(src, tgt, j, &v));
        up_i.set_column(col, &apply_shift(src, tgt, i, &v));
    }
    let mut k_f = DMatrix::zeros(src.ambient(), r);
    for col in 0..r {
        let w: DVector<Complex64> = up_j.column(col).into_owned();
        k_f.set_column(col, &apply_shift_adjoint(src, tgt, i, &w));
    }
    if n > 0 {
        let dn_basis = module.ambient_basis(n - 1)?;
        for col in 0..r {
            let v: DVector<Complex64> = f_n.basis().column(col).into_owned();
            let down = apply_shift_adjoint(dn_basis, src, i, &v);
            let back = apply_shift(dn_basis, src, j, &down);
            let mut updated: DVector<Complex64> = k_f.column(col).into_owned();
            updated -= back;
            k_f.set_column(col, &updated);
        }
    }
    let term1 = f_n.basis().adjoint() * k_f;

    // [P, S_i] F_n = -(1 - P_{F_{n+1}}) S_i F_n
    let defect = |m: &DMatrix<Complex64>| -> DMatrix<Complex64> {
        m - f_n1.basis() * (f_n1.basis().adjoint() * m)
    };
    let b_i = defect(&up_i);
    let b_j = defect(&up_j);
    let term2 = b_i.adjoint() * b_j;

    let residual = lhs - (term1 - term2);
    Ok(linalg::frobenius_norm(&residual))
}

/// One degree of a commutator series.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesRow {
    pub degree: u32,
    pub norm: f64,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// Last two computed degrees feel the truncation; fits skip them.
    pub boundary: bool,
}

/// Per-degree blocks of `[T_i^*, T_j]` with their singular values.
#[derive(Debug, Clone, Serialize)]
pub struct CommutatorSeries {
    pub i: usize,
    pub j: usize,
    pub rows: Vec<SeriesRow>,
}

pub fn build_commutator_series(
    module: &GradedModule,
    i: usize,
    j: usize,
    thresholds: &Thresholds,
) -> Result<CommutatorSeries> {
    if module.max_degree() == 0 {
        return Err(CoreError::DegreeOutOfRange { degree: 1, max: 0 });
    }
    let last = module.max_degree() - 1;
    let mut rows = Vec::with_capacity(last as usize + 1);
    for n in 0..=last {
        let block = commutator_block(module, i, j, n)?;
        let singular_values = block.singular_values();
        let top = singular_values.first().copied().unwrap_or(0.0);
        let rank = singular_values
            .iter()
            .filter(|&&s| s > top * thresholds.rank_rel && s > 0.0)
            .count();
        rows.push(SeriesRow {
            degree: n,
            norm: top,
            singular_values,
            rank,
            boundary: n + 2 > last,
        });
    }
    Ok(CommutatorSeries { i, j, rows })
}

/// Convergence classification for truncated Schatten sums. Never a proof; the
/// rule is: increments over the last quarter of degrees below 1e-6 and a
/// fitted contribution exponent below -1 read as converging, an exponent
/// above -0.9 as diverging, anything else as inconclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConvergenceFlag {
    Converging,
    Diverging,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchattenRow {
    pub degree: u32,
    /// `sum_k s_k(C_n)^p`.
    pub contribution: f64,
    pub partial_sum: f64,
    pub boundary: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchattenReport {
    pub p: f64,
    pub rows: Vec<SchattenRow>,
    pub total: f64,
    pub convergence: ConvergenceFlag,
    /// Log-log slope of per-degree contributions over the fit window.
    pub contribution_exponent: Option<f64>,
    pub max_tail_increment: f64,
}

/// Truncated sums `sum_{n<=N} sum_k s_k(C_n)^p` with the convergence heuristic.
pub fn schatten_partial_sum(series: &CommutatorSeries, p: f64, upto: u32) -> Result<SchattenReport> {
    if p < 1.0 {
        return Err(CoreError::InvalidSpec(format!("Schatten exponent {p} below 1")));
    }
    let rows_in: Vec<&SeriesRow> = series.rows.iter().filter(|r| r.degree <= upto).collect();
    if rows_in.is_empty() {
        return Err(CoreError::DegreeOutOfRange { degree: upto as usize, max: 0 });
    }
    let mut rows = Vec::with_capacity(rows_in.len());
    let mut acc = 0.0f64;
    for r in &rows_in {
        let contribution: f64 = r.singular_values.iter().map(|s| s.powf(p)).sum();
        acc += contribution;
        rows.push(SchattenRow {
            degree: r.degree,
            contribution,
            partial_sum: acc,
            boundary: r.boundary,
        });
    }

    let quarter_start = rows.len() - (rows.len() / 4).max(1);
    let max_tail_increment = rows[quarter_start..]
        .iter()
        .map(|r| r.contribution)
        .fold(0.0f64, f64::max);

    let fit_rows: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| !r.boundary && r.degree >= 1 && r.contribution > 0.0)
        .map(|r| ((r.degree as f64).ln(), r.contribution.ln()))
        .collect();
    let contribution_exponent = least_squares_slope(&fit_rows);

    let tail_is_zero = rows[quarter_start..].iter().all(|r| r.contribution == 0.0);
    let convergence = if max_tail_increment < 1e-6
        && (tail_is_zero || contribution_exponent.map(|e| e < -1.0).unwrap_or(false))
    {
        ConvergenceFlag::Converging
    } else if contribution_exponent.map(|e| e > -0.9).unwrap_or(false) {
        ConvergenceFlag::Diverging
    } else {
        ConvergenceFlag::Inconclusive
    };

    Ok(SchattenReport {
        p,
        total: acc,
        rows,
        convergence,
        contribution_exponent,
        max_tail_increment,
    })
}

/// Truncations of the full-space majorant `sum_n 2^p dim H_n / (n+1)^p`.
pub fn schatten_majorant(d: usize, p: f64, upto: u32) -> Vec<f64> {
    let mut acc = 0.0;
    (0..=upto)
        .map(|n| {
            acc += 2.0f64.powf(p) * graded_dim(d, n as usize) as f64 / (n as f64 + 1.0).powf(p);
            acc
        })
        .collect()
}

/// Power-law fit of a commutator series: `gamma` from `log |C_n|` against
/// `log n`, `delta` from `log rank(C_n)` against `log n`, both over the top
/// half of the non-boundary degree range, and the heuristic transition
/// exponent `p* = (1 + delta) / gamma`. Always a heuristic.
#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub gamma: f64,
    pub delta: f64,
    /// `None` when the norm fit does not decay (`gamma <= 0`).
    pub p_star: Option<f64>,
    pub window: (u32, u32),
    pub points_used: usize,
}

pub fn decay_fit(series: &CommutatorSeries) -> Result<DecayFit> {
    let interior: Vec<&SeriesRow> = series.rows.iter().filter(|r| !r.boundary).collect();
    let nonzero: Vec<&&SeriesRow> = interior.iter().filter(|r| r.norm > 0.0).collect();
    if nonzero.len() < 10 {
        return Err(CoreError::UndefinedFit(format!(
            "need at least 10 degrees with nonzero norms, found {}",
            nonzero.len()
        )));
    }
    let max_degree = interior.last().unwrap().degree;
    let half = max_degree / 2;
    let window: Vec<&&SeriesRow> = interior
        .iter()
        .filter(|r| r.degree >= half.max(1) && r.norm > 0.0)
        .collect();
    if window.len() < 3 {
        return Err(CoreError::UndefinedFit(
            "fewer than 3 usable degrees in the fit window".into(),
        ));
    }
    let norm_pts: Vec<(f64, f64)> = window
        .iter()
        .map(|r| ((r.degree as f64).ln(), r.norm.ln()))
        .collect();
    let rank_pts: Vec<(f64, f64)> = window
        .iter()
        .filter(|r| r.rank > 0)
        .map(|r| ((r.degree as f64).ln(), (r.rank as f64).ln()))
        .collect();
    let gamma = -least_squares_slope(&norm_pts).ok_or_else(|| {
        CoreError::UndefinedFit("degenerate norm fit".into())
    })?;
    let delta = least_squares_slope(&rank_pts).unwrap_or(0.0);
    let p_star = (gamma > 0.0).then(|| (1.0 + delta) / gamma);
    Ok(DecayFit {
        gamma,
        delta,
        p_star,
        window: (window.first().unwrap().degree, window.last().unwrap().degree),
        points_used: window.len(),
    })
}

fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let var: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if var == 0.0 {
        return None;
    }
    let cov: f64 = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    Some(cov / var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{full_commutator_block, HomogeneousPolynomial, MultiIndex};
    use crate::variety::SubspaceComponent;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn thr() -> Thresholds {
        Thresholds::default()
    }

    fn mono(d: usize, exps: Vec<u32>) -> HomogeneousPolynomial {
        HomogeneousPolynomial::monomial(d, MultiIndex::new(exps), c(1.0, 0.0)).unwrap()
    }

    fn z1z2_module(max_degree: u32) -> GradedModule {
        let spec = ModuleSpec::Ideal(IdealSpec::new(2, vec![mono(2, vec![1, 1])], true).unwrap());
        GradedModule::build(&spec, max_degree, &thr())
    }

    fn two_line_module(cos: f64, max_degree: u32) -> GradedModule {
        let u = SubspaceComponent::line(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let v = SubspaceComponent::line(&[c(cos, 0.0), c((1.0 - cos * cos).sqrt(), 0.0)]).unwrap();
        let spec = ModuleSpec::Variety(VarietySpec::components(vec![u, v]).unwrap());
        GradedModule::build(&spec, max_degree, &thr())
    }

    #[test]
    fn full_space_compression_is_the_shift() {
        let module = GradedModule::build(&ModuleSpec::Full { d: 2 }, 6, &thr());
        for n in 0..=5u32 {
            for i in 0..2 {
                let t = compressed_shift_block(&module, i, n).unwrap();
                let s = crate::fock::shift_block(2, i, n);
                let diff = (&t.matrix - &s.matrix)
                    .iter()
                    .map(|v| v.norm())
                    .fold(0.0f64, f64::max);
                assert!(diff < 1e-13);
                assert!(t.operator_norm() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn one_line_variety_is_the_one_variable_shift() {
        let line = SubspaceComponent::line(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let spec = ModuleSpec::Variety(VarietySpec::components(vec![line]).unwrap());
        let module = GradedModule::build(&spec, 10, &thr());
        for n in 0..=9u32 {
            let t1 = compressed_shift_block(&module, 0, n).unwrap();
            assert_eq!(t1.matrix.nrows(), 1);
            assert_eq!(t1.matrix.ncols(), 1);
            assert!((t1.matrix[(0, 0)].norm() - 1.0).abs() < 1e-12, "n={n}");
            let t2 = compressed_shift_block(&module, 1, n).unwrap();
            assert!(t2.matrix[(0, 0)].norm() < 1e-12);
        }
        // commutator: rank-one [1] at degree 0, zero afterwards
        let c0 = commutator_block(&module, 0, 0, 0).unwrap();
        assert!((c0.matrix[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
        for n in 1..=8u32 {
            let cn = commutator_block(&module, 0, 0, n).unwrap();
            assert!(cn.operator_norm() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn full_space_commutator_equals_ambient_formula() {
        let module = GradedModule::build(&ModuleSpec::Full { d: 2 }, 6, &thr());
        for n in 0..=5u32 {
            for i in 0..2 {
                for j in 0..2 {
                    let a = commutator_block(&module, i, j, n).unwrap();
                    let b = full_commutator_block(2, i, j, n);
                    let diff = (&a.matrix - &b.matrix)
                        .iter()
                        .map(|v| v.norm())
                        .fold(0.0f64, f64::max);
                    assert!(diff < 1e-13);
                }
            }
        }
        // the stated example: d=2, n=1, i=j=1 -> diag(0, 1/2)
        let blk = commutator_block(&module, 0, 0, 1).unwrap();
        assert!((blk.matrix[(1, 1)] - c(0.5, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn z1z2_commutators_vanish_beyond_degree_one() {
        // The axes quotient splits into two one-variable shifts, so every
        // cross-commutator is supported in degrees 0 and 1 only.
        let module = z1z2_module(16);
        for i in 0..2 {
            for j in 0..2 {
                for n in 2..=14u32 {
                    let blk = commutator_block(&module, i, j, n).unwrap();
                    assert!(
                        blk.operator_norm() < 1e-12,
                        "i={i} j={j} n={n}: {}",
                        blk.operator_norm()
                    );
                }
            }
        }
        let c01 = commutator_block(&module, 0, 1, 1).unwrap();
        assert!((c01.operator_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_commutator_cases() {
        // I = 0: [P, S_i] = 0
        let full = GradedModule::build(&ModuleSpec::Full { d: 2 }, 5, &thr());
        for n in 0..=4u32 {
            let b = projection_commutator_block(&full, 0, n).unwrap();
            assert!(linalg::frobenius_norm(&b.matrix) < 1e-13);
        }

        // I = (z1, z2): P is the degree-0 projection. Out of F_0 the block is
        // -S_i; at higher degrees both projections vanish.
        let max_ideal = ModuleSpec::Ideal(
            IdealSpec::new(2, vec![mono(2, vec![1, 0]), mono(2, vec![0, 1])], true).unwrap(),
        );
        let module = GradedModule::build(&max_ideal, 5, &thr());
        let b0 = projection_commutator_block(&module, 0, 0).unwrap();
        let s0 = crate::fock::shift_block(2, 0, 0);
        let diff = (&b0.matrix + &s0.matrix)
            .iter()
            .map(|v| v.norm())
            .fold(0.0f64, f64::max);
        assert!(diff < 1e-13);
        for n in 1..=4u32 {
            let b = projection_commutator_block(&module, 0, n).unwrap();
            assert!(linalg::frobenius_norm(&b.matrix) < 1e-13, "n={n}");
        }

        // (z1 z2): nonzero only where F and I mix
        let module = z1z2_module(8);
        let b = projection_commutator_block(&module, 0, 2).unwrap();
        assert!(linalg::frobenius_norm(&b.matrix) > 1e-3);
    }

    #[test]
    fn lemma_identity_exact_for_flagship_ideals() {
        let full = GradedModule::build(&ModuleSpec::Full { d: 2 }, 6, &thr());
        for n in 0..=5u32 {
            assert!(lemma_identity_residual(&full, 0, 1, n).unwrap() < 1e-13);
        }

        let module = z1z2_module(21);
        for n in 0..=20u32 {
            for i in 0..2 {
                for j in 0..2 {
                    let r = lemma_identity_residual(&module, i, j, n).unwrap();
                    assert!(r <= 1e-10, "i={i} j={j} n={n}: {r}");
                }
            }
        }
    }

    #[test]
    fn lemma_identity_on_seeded_monomial_ideals() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..6 {
            let d = 3;
            let gen_count = rng.gen_range(1..=3);
            let gens: Vec<HomogeneousPolynomial> = (0..gen_count)
                .map(|_| {
                    let deg = rng.gen_range(1..=3u32);
                    let mut exps = vec![0u32; d];
                    for _ in 0..deg {
                        exps[rng.gen_range(0..d)] += 1;
                    }
                    mono(d, exps)
                })
                .collect();
            let spec = ModuleSpec::Ideal(IdealSpec::new(d, gens, false).unwrap());
            let module = GradedModule::build(&spec, 12, &thr());
            for n in 0..=11u32 {
                for i in 0..d {
                    for j in 0..d {
                        let r = lemma_identity_residual(&module, i, j, n).unwrap();
                        assert!(r <= 1e-9, "i={i} j={j} n={n}: {r}");
                    }
                }
            }
        }
    }

    #[test]
    fn compressed_shift_respects_recomputation_invariant() {
        let module = z1z2_module(10);
        for n in 0..=9u32 {
            for i in 0..2 {
                let a = compressed_shift_block(&module, i, n).unwrap();
                let b = compressed_shift_block(&module, i, n).unwrap();
                let diff = (&a.matrix - &b.matrix)
                    .iter()
                    .map(|v| v.norm())
                    .fold(0.0f64, f64::max);
                assert!(diff < 1e-12);
                assert!(a.operator_norm() <= 1.0 + 1e-10);
            }
        }
    }

    #[test]
    fn commutator_norm_bound_from_identity() {
        let module = z1z2_module(12);
        for n in 0..=10u32 {
            for (i, j) in [(0usize, 0usize), (0, 1), (1, 1)] {
                let cn = commutator_block(&module, i, j, n).unwrap().operator_norm();
                let bi = projection_commutator_block(&module, i, n).unwrap().operator_norm();
                let bj = projection_commutator_block(&module, j, n).unwrap().operator_norm();
                let bound = 2.0 / (n as f64 + 1.0) + bi * bj;
                assert!(cn <= bound + 1e-10, "n={n} i={i} j={j}: {cn} vs {bound}");
            }
        }
    }

    #[test]
    fn order_convention_independence() {
        // singular values of [T_i^*, T_j] match those of its adjoint block
        let module = two_line_module(0.6, 14);
        for n in 1..=12u32 {
            let a = commutator_block(&module, 0, 1, n).unwrap();
            let b = OperatorBlock::new(n, n, a.matrix.adjoint());
            let sa = a.singular_values();
            let sb = b.singular_values();
            assert_eq!(sa.len(), sb.len());
            for (x, y) in sa.iter().zip(sb.iter()) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn schatten_one_line_totals_one() {
        let line = SubspaceComponent::line(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let spec = ModuleSpec::Variety(VarietySpec::components(vec![line]).unwrap());
        let module = GradedModule::build(&spec, 20, &thr());
        let series = build_commutator_series(&module, 0, 0, &thr()).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0] {
            let report = schatten_partial_sum(&series, p, 19).unwrap();
            assert!((report.total - 1.0).abs() < 1e-11, "p={p}: {}", report.total);
            assert_eq!(report.convergence, ConvergenceFlag::Converging);
        }
    }

    #[test]
    fn schatten_full_space_dominated_by_majorant() {
        let module = GradedModule::build(&ModuleSpec::Full { d: 2 }, 25, &thr());
        for (i, j) in [(0usize, 0usize), (0, 1)] {
            let series = build_commutator_series(&module, i, j, &thr()).unwrap();
            let report = schatten_partial_sum(&series, 3.0, 24).unwrap();
            let majorant = schatten_majorant(2, 3.0, 24);
            for (row, m) in report.rows.iter().zip(majorant.iter()) {
                assert!(row.partial_sum <= m + 1e-9, "degree {}", row.degree);
            }
        }
    }

    #[test]
    fn schatten_two_lines_cauchy_and_converging() {
        let module = two_line_module(0.6, 60);
        let series = build_commutator_series(&module, 0, 1, &thr()).unwrap();
        let report = schatten_partial_sum(&series, 1.5, 58).unwrap();
        assert_eq!(report.convergence, ConvergenceFlag::Converging);
        for w in report.rows.windows(2) {
            assert!(w[1].partial_sum >= w[0].partial_sum);
        }
        // increments beyond degree 45 are far below 1e-6
        for row in report.rows.iter().filter(|r| r.degree >= 45) {
            assert!(row.contribution < 1e-6);
        }
        assert!(report.total.is_finite());
    }

    #[test]
    fn full_space_decay_fit_matches_dimension_heuristic() {
        let module = GradedModule::build(&ModuleSpec::Full { d: 2 }, 60, &thr());
        let series = build_commutator_series(&module, 0, 0, &thr()).unwrap();
        let fit = decay_fit(&series).unwrap();
        assert!((fit.gamma - 1.0).abs() < 0.15, "gamma {}", fit.gamma);
        assert!((fit.delta - 1.0).abs() < 0.15, "delta {}", fit.delta);
        let p_star = fit.p_star.unwrap();
        assert!((p_star - 2.0).abs() < 0.3, "p* {p_star}");
    }

    #[test]
    fn eventually_zero_series_has_undefined_fit() {
        let line = SubspaceComponent::line(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let spec = ModuleSpec::Variety(VarietySpec::components(vec![line]).unwrap());
        let module = GradedModule::build(&spec, 30, &thr());
        let series = build_commutator_series(&module, 0, 0, &thr()).unwrap();
        assert!(matches!(
            decay_fit(&series),
            Err(CoreError::UndefinedFit(_))
        ));
    }

    #[test]
    fn two_line_commutators_decay_geometrically() {
        // For a union of two lines the compressed shifts are constant-weight
        // up to Gram corrections of size c^n, so the commutator norms decay
        // like c^n rather than any power of n.
        let cos = 0.6;
        let module = two_line_module(cos, 40);
        let series = build_commutator_series(&module, 0, 1, &thr()).unwrap();
        for row in series.rows.iter().filter(|r| r.degree >= 5 && r.degree <= 30) {
            let envelope = 6.0 * cos.powi(row.degree as i32 - 1);
            assert!(row.norm <= envelope, "n={}: {} vs {}", row.degree, row.norm, envelope);
        }
        // and the fitted p* is far below 1: the power-law heuristic reports a
        // steep pseudo-exponent on geometric data
        let fit = decay_fit(&series).unwrap();
        assert!(fit.gamma > 3.0, "gamma {}", fit.gamma);
        if let Some(p_star) = fit.p_star {
            assert!(p_star < 0.5, "p* {p_star}");
        }
    }
}
