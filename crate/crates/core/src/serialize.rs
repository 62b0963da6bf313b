//! Documented JSON layouts for specs and matrices.
//!
//! Complex scalars are `[re, im]` pairs. Matrices are stored row-major with
//! explicit `rows`/`cols` counts. Polynomial generators are term lists
//! `{exponents, re, im}`; subspace components are column lists of complex
//! pairs. Unknown fields are rejected everywhere.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::fock::{HomogeneousPolynomial, MultiIndex};
use crate::similarity::LinearMapSpec;
use crate::variety::{GradedSubspace, IdealSpec, SubspaceComponent, VarietySpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub exponents: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdealJson {
    pub d: usize,
    /// One term list per generator.
    pub generators: Vec<Vec<TermJson>>,
    pub radical: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentJson {
    /// Orthonormal columns; each column is a list of `[re, im]` pairs.
    pub columns: Vec<Vec<[f64; 2]>>,
}

/// A variety is either a union of subspace components or an ideal reference.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum VarietyJson {
    Components(Vec<ComponentJson>),
    Ideal(IdealJson),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MapJson {
    /// Row-major `d' x d` complex matrix, one row per list entry.
    pub matrix: Vec<Vec<[f64; 2]>>,
    pub source: Vec<ComponentJson>,
    pub target: Vec<ComponentJson>,
}

/// Row-major dense complex matrix, used for cached graded bases and blocks.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    /// `data[r * cols + c] = [re, im]`.
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &DMatrix<Complex64>) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                data.push([m[(r, c)].re, m[(r, c)].im]);
            }
        }
        Self { rows: m.nrows(), cols: m.ncols(), data }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        if self.data.len() != self.rows * self.cols {
            return Err(CoreError::ShapeMismatch {
                expected: format!("{} entries", self.rows * self.cols),
                got: format!("{}", self.data.len()),
            });
        }
        Ok(DMatrix::from_fn(self.rows, self.cols, |r, c| {
            let [re, im] = self.data[r * self.cols + c];
            Complex64::new(re, im)
        }))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GradedSubspaceJson {
    pub degree: u32,
    pub basis: MatrixJson,
}

impl GradedSubspaceJson {
    pub fn from_subspace(s: &GradedSubspace) -> Self {
        Self { degree: s.degree(), basis: MatrixJson::from_matrix(s.basis()) }
    }

    pub fn to_subspace(&self) -> Result<GradedSubspace> {
        GradedSubspace::new(self.degree, self.basis.to_matrix()?)
    }
}

pub fn ideal_from_json(json: &IdealJson) -> Result<IdealSpec> {
    let mut generators = Vec::with_capacity(json.generators.len());
    for terms in &json.generators {
        if terms.is_empty() {
            return Err(CoreError::InvalidSpec("generator with no terms".into()));
        }
        let degree = terms[0].exponents.iter().sum::<u32>();
        let mut p = HomogeneousPolynomial::zero(json.d, degree);
        for t in terms {
            if t.exponents.len() != json.d {
                return Err(CoreError::InvalidSpec(format!(
                    "term exponents length {} does not match d = {}",
                    t.exponents.len(),
                    json.d
                )));
            }
            p.add_term(MultiIndex::new(t.exponents.clone()), Complex64::new(t.re, t.im))?;
        }
        generators.push(p);
    }
    IdealSpec::new(json.d, generators, json.radical)
}

pub fn ideal_to_json(spec: &IdealSpec) -> IdealJson {
    IdealJson {
        d: spec.d(),
        generators: spec
            .generators()
            .iter()
            .map(|g| {
                g.terms()
                    .map(|(a, c)| TermJson {
                        exponents: a.exponents().to_vec(),
                        re: c.re,
                        im: c.im,
                    })
                    .collect()
            })
            .collect(),
        radical: spec.radical(),
    }
}

pub fn component_from_json(json: &ComponentJson) -> Result<SubspaceComponent> {
    if json.columns.is_empty() {
        return Err(CoreError::InvalidSpec("component with no columns".into()));
    }
    let d = json.columns[0].len();
    let mut m = DMatrix::zeros(d, json.columns.len());
    for (cidx, col) in json.columns.iter().enumerate() {
        if col.len() != d {
            return Err(CoreError::InvalidSpec("ragged component columns".into()));
        }
        for (ridx, &[re, im]) in col.iter().enumerate() {
            m[(ridx, cidx)] = Complex64::new(re, im);
        }
    }
    SubspaceComponent::new(m)
}

pub fn component_to_json(c: &SubspaceComponent) -> ComponentJson {
    ComponentJson {
        columns: (0..c.dim())
            .map(|col| (0..c.d()).map(|row| {
                let v = c.basis()[(row, col)];
                [v.re, v.im]
            }).collect())
            .collect(),
    }
}

pub fn variety_from_json(json: &VarietyJson) -> Result<VarietySpec> {
    match json {
        VarietyJson::Components(list) => {
            let comps: Result<Vec<SubspaceComponent>> =
                list.iter().map(component_from_json).collect();
            VarietySpec::components(comps?)
        }
        VarietyJson::Ideal(ideal) => VarietySpec::from_ideal(ideal_from_json(ideal)?),
    }
}

pub fn map_from_json(json: &MapJson) -> Result<LinearMapSpec> {
    if json.matrix.is_empty() {
        return Err(CoreError::InvalidSpec("empty map matrix".into()));
    }
    let rows = json.matrix.len();
    let cols = json.matrix[0].len();
    let mut m = DMatrix::zeros(rows, cols);
    for (r, row) in json.matrix.iter().enumerate() {
        if row.len() != cols {
            return Err(CoreError::InvalidSpec("ragged map matrix".into()));
        }
        for (c, &[re, im]) in row.iter().enumerate() {
            m[(r, c)] = Complex64::new(re, im);
        }
    }
    let source: Result<Vec<SubspaceComponent>> =
        json.source.iter().map(component_from_json).collect();
    let target: Result<Vec<SubspaceComponent>> =
        json.target.iter().map(component_from_json).collect();
    LinearMapSpec::new(m, source?, target?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let m = DMatrix::from_fn(3, 2, |r, c| Complex64::new(r as f64 + 0.5, c as f64 - 0.25));
        let json = MatrixJson::from_matrix(&m);
        let back = json.to_matrix().unwrap();
        assert_eq!(m, back);
        // explicit row-major order
        assert_eq!(json.data[1], [0.5, 0.75]);
    }

    #[test]
    fn ideal_round_trip() {
        let json = IdealJson {
            d: 2,
            generators: vec![vec![TermJson { exponents: vec![1, 1], re: 1.0, im: 0.0 }]],
            radical: true,
        };
        let spec = ideal_from_json(&json).unwrap();
        let back = ideal_to_json(&spec);
        let again = ideal_from_json(&back).unwrap();
        assert_eq!(again.d(), 2);
        assert!(again.radical());
        assert_eq!(again.generators().len(), 1);
    }

    #[test]
    fn variety_json_shapes() {
        let text = r#"{"components": [{"columns": [[[1.0, 0.0], [0.0, 0.0]]]}]}"#;
        let parsed: VarietyJson = serde_json::from_str(text).unwrap();
        let spec = variety_from_json(&parsed).unwrap();
        assert_eq!(spec.d(), 2);

        let text = r#"{"ideal": {"d": 2, "generators": [[{"exponents": [1,1], "re": 1.0, "im": 0.0}]], "radical": true}}"#;
        let parsed: VarietyJson = serde_json::from_str(text).unwrap();
        assert!(variety_from_json(&parsed).is_ok());

        // unknown fields rejected
        let text = r#"{"components": [{"columns": [[[1.0, 0.0]]], "extra": 1}]}"#;
        assert!(serde_json::from_str::<VarietyJson>(text).is_err());
    }

    #[test]
    fn inhomogeneous_generator_rejected() {
        let json = IdealJson {
            d: 2,
            generators: vec![vec![
                TermJson { exponents: vec![1, 1], re: 1.0, im: 0.0 },
                TermJson { exponents: vec![1, 0], re: 1.0, im: 0.0 },
            ]],
            radical: false,
        };
        assert!(ideal_from_json(&json).is_err());
    }
}
