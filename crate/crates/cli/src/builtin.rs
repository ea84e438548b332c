//! Named example systems.

use ncerg::random::{pauli_z2z2, weyl_heisenberg};
use ncerg::serde_matrix;
use ncerg::{Algebra, Automorphism, GroupAction, GroupSpec};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::scenario::ScenarioError;

/// Names accepted by [`builtin_system`].
pub const BUILTIN_NAMES: &[&str] = &[
    "cyclic_shift",
    "permutation",
    "ad_unitary",
    "pauli_z2z2",
    "block_swap",
    "lattice_product",
    "identity",
    "two_orbit",
    "weyl_heisenberg",
];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SizeParams {
    n: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PermutationParams {
    p: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AdUnitaryParams {
    n: Option<usize>,
    u: Vec<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

/// One `Z`-factor of a lattice product.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Factor {
    builtin: String,
    #[serde(default)]
    params: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeParams {
    factors: Vec<Factor>,
}

fn params<T: DeserializeOwned>(value: &Value, path: &str) -> Result<T, ScenarioError> {
    let value = if value.is_null() {
        Value::Object(Default::default())
    } else {
        value.clone()
    };
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." {
            path.to_string()
        } else {
            format!("{path}.{inner}")
        };
        ScenarioError::Schema {
            path,
            message: e.into_inner().to_string(),
        }
    })
}

fn invalid(path: &str) -> impl FnOnce(ncerg::Error) -> ScenarioError + '_ {
    move |source| ScenarioError::Invalid {
        path: path.to_string(),
        source,
    }
}

fn integers(generator: Automorphism, path: &str) -> Result<GroupAction, ScenarioError> {
    GroupAction::integers(generator).map_err(invalid(path))
}

/// Builds a named system. `path` locates `params` for diagnostics.
///
/// - `cyclic_shift {n}`: `C^n` with the coordinate rotation `e_i ↦ e_{i+1}`.
/// - `permutation {p}`: `C^n` with `x ↦ x∘p`.
/// - `ad_unitary {n?, u}`: `M_n` with `Ad u`.
/// - `pauli_z2z2`: `Z_2 × Z_2` on `M_2` by `Ad σ_x` and `Ad σ_z`.
/// - `block_swap {n}`: `M_n ⊕ M_n` with the two blocks exchanged.
/// - `lattice_product {factors}`: `Z^d` generated by commuting `Z`-systems on
///   one algebra.
/// - `identity {n}`: the trivial `Z`-action on `C^n`.
/// - `two_orbit`: `C^4` with the permutation `(0 1)(2 3)`.
/// - `weyl_heisenberg {n}`: `Z_n × Z_n` on `M_n` by clock and shift.
pub fn builtin_system(name: &str, value: &Value, path: &str) -> Result<GroupAction, ScenarioError> {
    match name {
        "cyclic_shift" => {
            let p: SizeParams = params(value, path)?;
            integers(Automorphism::cyclic_shift(p.n).map_err(invalid(path))?, path)
        }
        "permutation" => {
            let p: PermutationParams = params(value, path)?;
            let alg = Algebra::diagonal(p.p.len()).map_err(invalid(path))?;
            let ppath = format!("{path}.p");
            integers(Automorphism::permutation(&alg, p.p).map_err(invalid(&ppath))?, path)
        }
        "ad_unitary" => {
            let p: AdUnitaryParams = params(value, path)?;
            let upath = format!("{path}.u");
            let u = serde_matrix::from_rows(&p.u).map_err(|message| ScenarioError::Schema {
                path: upath.clone(),
                message,
            })?;
            if let Some(n) = p.n {
                if n != u.nrows() || n != u.ncols() {
                    return Err(ScenarioError::Schema {
                        path: upath,
                        message: format!("expected a {n}x{n} matrix, got {}x{}", u.nrows(), u.ncols()),
                    });
                }
            }
            let alg = Algebra::new(vec![u.nrows()]).map_err(invalid(&upath))?;
            integers(Automorphism::inner(&alg, vec![u]).map_err(invalid(&upath))?, path)
        }
        "pauli_z2z2" => {
            params::<NoParams>(value, path)?;
            Ok(pauli_z2z2())
        }
        "block_swap" => {
            let p: SizeParams = params(value, path)?;
            let alg = Algebra::new(vec![p.n, p.n]).map_err(invalid(path))?;
            integers(Automorphism::permutation(&alg, vec![1, 0]).map_err(invalid(path))?, path)
        }
        "identity" => {
            let p: SizeParams = params(value, path)?;
            Ok(GroupAction::identity(&Algebra::diagonal(p.n).map_err(invalid(path))?))
        }
        "two_orbit" => {
            params::<NoParams>(value, path)?;
            let alg = Algebra::diagonal(4).expect("nonempty");
            integers(Automorphism::permutation(&alg, vec![1, 0, 3, 2]).expect("a permutation"), path)
        }
        "weyl_heisenberg" => {
            let p: SizeParams = params(value, path)?;
            if p.n < 2 {
                return Err(ScenarioError::Schema {
                    path: format!("{path}.n"),
                    message: "weyl_heisenberg needs n ≥ 2".into(),
                });
            }
            Ok(weyl_heisenberg(p.n))
        }
        "lattice_product" => {
            let p: LatticeParams = params(value, path)?;
            if p.factors.is_empty() {
                return Err(ScenarioError::Schema {
                    path: format!("{path}.factors"),
                    message: "at least one factor is required".into(),
                });
            }
            let mut gens = Vec::with_capacity(p.factors.len());
            for (i, f) in p.factors.iter().enumerate() {
                let fpath = format!("{path}.factors[{i}]");
                let act = builtin_system(&f.builtin, &f.params, &format!("{fpath}.params"))?;
                if *act.group() != GroupSpec::Integers {
                    return Err(ScenarioError::Schema {
                        path: fpath,
                        message: format!("factor must be a Z-system, got {}", act.group().name()),
                    });
                }
                gens.push(act.generators()[0].clone());
            }
            if let Some(i) = gens.iter().position(|g| g.algebra() != gens[0].algebra()) {
                return Err(ScenarioError::Schema {
                    path: format!("{path}.factors[{i}]"),
                    message: format!(
                        "factor acts on {:?}, factor 0 on {:?}",
                        gens[i].algebra().block_dims(),
                        gens[0].algebra().block_dims()
                    ),
                });
            }
            GroupAction::lattice(gens).map_err(invalid(path))
        }
        other => Err(ScenarioError::Schema {
            path: path.rsplit_once('.').map_or(path, |p| p.0).to_string(),
            message: format!("unknown builtin `{other}`; expected one of {}", BUILTIN_NAMES.join(", ")),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ncerg::fixed_dim;
    use serde_json::json;

    #[test]
    fn cyclic_shift_is_diagonal() {
        let act = builtin_system("cyclic_shift", &json!({"n": 3}), "action.params").unwrap();
        assert_eq!(act.algebra().block_dims(), &[1, 1, 1]);
        assert_eq!(fixed_dim(&act).unwrap(), 1);
    }

    #[test]
    fn pauli_has_scalar_fixed_algebra() {
        let act = builtin_system("pauli_z2z2", &Value::Null, "action.params").unwrap();
        assert_eq!(fixed_dim(&act).unwrap(), 1);
        assert_eq!(act.group().num_generators(), 2);
    }

    #[test]
    fn commuting_lattice_product() {
        let f = json!({"builtin": "cyclic_shift", "params": {"n": 4}});
        let act = builtin_system("lattice_product", &json!({"factors": [f.clone(), f]}), "action.params").unwrap();
        assert_eq!(act.group().num_generators(), 2);
    }

    #[test]
    fn non_commuting_lattice_product_is_rejected() {
        let a = json!({"builtin": "permutation", "params": {"p": [1, 0, 2]}});
        let b = json!({"builtin": "permutation", "params": {"p": [0, 2, 1]}});
        let err = builtin_system("lattice_product", &json!({"factors": [a, b]}), "action.params").unwrap_err();
        assert!(err.to_string().contains("do not commute"), "{err}");
    }

    #[test]
    fn unknown_parameter_names_the_path() {
        let err = builtin_system("cyclic_shift", &json!({"m": 3}), "action.params").unwrap_err();
        assert!(err.to_string().starts_with("action.params"), "{err}");
    }

    #[test]
    fn unknown_name() {
        let err = builtin_system("nope", &Value::Null, "action.params").unwrap_err();
        assert!(err.to_string().contains("unknown builtin"));
    }
}
