//! JSON system and joining files.
//!
//! Matrices are arrays of rows and every entry is a `[re, im]` pair.

use std::collections::BTreeMap;
use std::path::Path;

use ncjoin_core::algebra::MatrixAlgebra;
use ncjoin_core::joining::JoiningFunctional;
use ncjoin_core::numerics::{CMatrix, C64};
use ncjoin_core::system::{validate_system_with_tol, DynamicalSystem, FiniteGroup, Group, GroupAction, QState};
use ncjoin_core::ValidationReport;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson, field: &str) -> Result<CMatrix, CliError> {
    let r: Vec<Vec<C64>> = rows
        .iter()
        .map(|row| row.iter().map(|[re, im]| C64::new(*re, *im)).collect())
        .collect();
    if r.is_empty() {
        return Err(CliError::Parse(format!("{field}: empty matrix")));
    }
    CMatrix::from_rows(&r).map_err(|e| CliError::Parse(format!("{field}: {e}")))
}

fn square(rows: &MatrixJson, d: usize, field: &str) -> Result<CMatrix, CliError> {
    let m = matrix_from_json(rows, field)?;
    if m.shape() != (d, d) {
        return Err(CliError::Parse(format!(
            "{field}: expected {d}x{d} matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(m)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GroupSpec {
    Finite {
        mult_table: Vec<Vec<usize>>,
        generators: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        unitaries: Option<BTreeMap<String, MatrixJson>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        superoperators: Option<BTreeMap<String, MatrixJson>>,
    },
    Z {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        unitary: Option<MatrixJson>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        superoperator: Option<MatrixJson>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub hilbert_dim: usize,
    pub algebra_generators: Vec<MatrixJson>,
    pub state_density: MatrixJson,
    /// Omitted: the trivial group.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JoiningFile {
    pub dim_a: usize,
    pub dim_b: usize,
    /// `values[p][r] = ω(a_p ⊗ b_r)` over the canonical bases.
    pub values: MatrixJson,
}

impl JoiningFile {
    pub fn from_functional(w: &JoiningFunctional) -> Self {
        let (dim_a, dim_b) = w.dims();
        Self {
            dim_a,
            dim_b,
            values: matrix_to_json(w.values()),
        }
    }

    pub fn to_functional(&self) -> Result<JoiningFunctional, CliError> {
        let m = matrix_from_json(&self.values, "values")?;
        if m.shape() != (self.dim_a, self.dim_b) {
            return Err(CliError::Parse(format!(
                "values: expected {}x{} table, got {}x{}",
                self.dim_a,
                self.dim_b,
                m.rows(),
                m.cols()
            )));
        }
        JoiningFunctional::new(m).map_err(|e| CliError::Parse(format!("values: {e}")))
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("file types serialize");
    std::fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn element_key(key: &str, order: usize, field: &str) -> Result<usize, CliError> {
    let g: usize = key
        .parse()
        .map_err(|_| CliError::Parse(format!("{field}: key {key:?} is not an element index")))?;
    if g >= order {
        return Err(CliError::Parse(format!("{field}: element {g} out of range")));
    }
    Ok(g)
}

/// A loaded system, or the report explaining why it is not one.
pub enum Loaded {
    Valid(Box<LoadedSystem>),
    Invalid(ValidationReport),
}

pub struct LoadedSystem {
    pub sys: DynamicalSystem,
    pub report: ValidationReport,
    /// The file's generators, addressable as `g<k>` in element names.
    pub generators: Vec<CMatrix>,
}

impl SystemFile {
    /// Builds the system and runs every validation at `tol`.
    pub fn load(&self, tol: f64) -> Result<Loaded, CliError> {
        let d = self.hilbert_dim;
        if d == 0 {
            return Err(CliError::Parse("hilbert_dim: must be positive".into()));
        }
        let gens = self
            .algebra_generators
            .iter()
            .enumerate()
            .map(|(i, g)| square(g, d, &format!("algebra_generators[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let algebra = MatrixAlgebra::from_generators(&gens, d).map_err(|e| CliError::Parse(e.to_string()))?;
        let rho = square(&self.state_density, d, "state_density")?;
        let state = QState::new(rho).map_err(|e| CliError::Parse(format!("state_density: {e}")))?;

        let action = match &self.group {
            None => GroupAction::identity(FiniteGroup::trivial().into(), algebra.dim()),
            Some(GroupSpec::Finite {
                mult_table,
                generators,
                unitaries,
                superoperators,
            }) => {
                let group = FiniteGroup::new(mult_table.clone(), generators.clone())
                    .map_err(|e| CliError::Parse(format!("group.mult_table: {e}")))?;
                let axioms = group.axioms_report();
                if !axioms.passed() {
                    let mut report = algebra.closure_report(tol);
                    report.extend(state.report(&algebra, tol));
                    report.extend(axioms);
                    return Ok(Loaded::Invalid(report));
                }
                let n = group.order();
                let built = match (unitaries, superoperators) {
                    (Some(us), None) => {
                        let given = us
                            .iter()
                            .map(|(k, m)| {
                                let field = format!("group.unitaries.{k}");
                                Ok((element_key(k, n, &field)?, square(m, d, &field)?))
                            })
                            .collect::<Result<Vec<_>, CliError>>()?;
                        GroupAction::finite_from_unitaries(group, &algebra, &given)
                    }
                    (None, Some(ops)) => {
                        let given = ops
                            .iter()
                            .map(|(k, m)| {
                                let field = format!("group.superoperators.{k}");
                                Ok((element_key(k, n, &field)?, square(m, algebra.dim(), &field)?))
                            })
                            .collect::<Result<Vec<_>, CliError>>()?;
                        GroupAction::finite_from_maps(group, algebra.dim(), &given)
                    }
                    (None, None) => Ok(GroupAction::identity(group.into(), algebra.dim())),
                    (Some(_), Some(_)) => {
                        return Err(CliError::Parse(
                            "group: give either unitaries or superoperators, not both".into(),
                        ))
                    }
                };
                built.map_err(|e| CliError::Parse(format!("group: {e}")))?
            }
            Some(GroupSpec::Z { unitary, superoperator }) => {
                let built = match (unitary, superoperator) {
                    (Some(u), None) => {
                        GroupAction::integers_from_unitary(&algebra, &square(u, d, "group.unitary")?)
                    }
                    (None, Some(m)) => {
                        GroupAction::integers_from_map(square(m, algebra.dim(), "group.superoperator")?)
                    }
                    _ => {
                        return Err(CliError::Parse(
                            "group: kind z needs exactly one of unitary or superoperator".into(),
                        ))
                    }
                };
                built.map_err(|e| CliError::Parse(format!("group: {e}")))?
            }
        };
        let sys = DynamicalSystem::new(algebra, state, action).map_err(|e| CliError::Parse(e.to_string()))?;
        let report = validate_system_with_tol(&sys, tol);
        if report.passed() {
            Ok(Loaded::Valid(Box::new(LoadedSystem {
                sys,
                report,
                generators: gens,
            })))
        } else {
            Ok(Loaded::Invalid(report))
        }
    }

    /// File for a system whose action is implemented by unitaries, given per
    /// generator (finite) or as the single generator of Z.
    pub fn from_unitaries(
        generators: &[CMatrix],
        rho: &CMatrix,
        group: &Group,
        unitaries: &[(usize, CMatrix)],
        description: Option<String>,
    ) -> Self {
        let spec = match group {
            Group::Finite(g) if g.order() == 1 => None,
            Group::Finite(g) => Some(GroupSpec::Finite {
                mult_table: g.table().to_vec(),
                generators: g.generators().to_vec(),
                unitaries: Some(
                    unitaries
                        .iter()
                        .map(|(k, u)| (k.to_string(), matrix_to_json(u)))
                        .collect(),
                ),
                superoperators: None,
            }),
            Group::Integers => Some(GroupSpec::Z {
                unitary: unitaries.first().map(|(_, u)| matrix_to_json(u)),
                superoperator: None,
            }),
        };
        Self {
            description,
            hilbert_dim: rho.rows(),
            algebra_generators: generators.iter().map(matrix_to_json).collect(),
            state_density: matrix_to_json(rho),
            group: spec,
        }
    }
}

/// Loads a system file; invalid systems are returned with their report.
pub fn load_system(path: &Path, tol: f64) -> Result<Loaded, CliError> {
    let file: SystemFile = read_json(path)?;
    file.load(tol)
}

/// Loads a system that must be valid.
pub fn load_valid(path: &Path, tol: f64) -> Result<LoadedSystem, CliError> {
    match load_system(path, tol)? {
        Loaded::Valid(loaded) => Ok(*loaded),
        Loaded::Invalid(report) => Err(CliError::Invalid(report)),
    }
}
