//! Command-line sessions: the JSON schema for algebra files, the built-in
//! fixture corpus, session configuration, and the subcommand implementations
//! behind the opmassey binary. Operad files use the schema in
//! [`crate::operad`]; every report is deterministic JSON with rationals as
//! [numerator, denominator] pairs.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraError, DgAlgebra};
use crate::linalg::{Mat, SVec};
use crate::operad::{OperadError, Presentation};
use crate::{rat, Rat};

/// Errors surfaced by the command-line layer.
#[derive(thiserror::Error, Debug)]
pub enum CliError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Operad(#[from] OperadError),
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

/// Bounds and plumbing shared by all subcommands.
#[derive(Clone, Debug)]
pub struct SessionConfig {
    pub max_arity: usize,
    pub max_weight: usize,
    pub cache_dir: Option<PathBuf>,
    pub seed: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            max_arity: 5,
            max_weight: 4,
            cache_dir: std::env::var_os("OPMASSEY_CACHE").map(PathBuf::from),
            seed: 0,
        }
    }
}

impl SessionConfig {
    pub fn checked(self) -> Result<Self, CliError> {
        if self.max_arity < 1 || self.max_weight < 1 {
            return Err(CliError::Invalid("bounds must be at least 1".to_string()));
        }
        Ok(self)
    }
}

/// On-disk algebra file: named graded basis, differential entries as
/// [source, target, numerator, denominator], and one action table per
/// generator with outputs as [name, numerator, denominator] triples.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraJson {
    pub operad: String,
    pub basis: Vec<BasisJson>,
    pub differential: Vec<(String, String, i64, i64)>,
    pub actions: BTreeMap<String, Vec<ActionJson>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisJson {
    pub name: String,
    pub degree: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ActionJson {
    pub inputs: Vec<String>,
    pub output: Vec<(String, i64, i64)>,
}

/// Names of the algebra fixtures shipped with the binary.
pub const BUILTIN_ALGEBRAS: [&str; 5] = [
    "triple-massey-ass",
    "lie-bracket-massey",
    "dual-numbers-staircase",
    "formal-zero-d",
    "poisson-weight2",
];

fn builtin_algebra_source(name: &str) -> Option<&'static str> {
    match name {
        "triple-massey-ass" => {
            Some(include_str!("../fixtures/algebras/triple-massey-ass.json"))
        }
        "lie-bracket-massey" => {
            Some(include_str!("../fixtures/algebras/lie-bracket-massey.json"))
        }
        "dual-numbers-staircase" => {
            Some(include_str!("../fixtures/algebras/dual-numbers-staircase.json"))
        }
        "formal-zero-d" => Some(include_str!("../fixtures/algebras/formal-zero-d.json")),
        "poisson-weight2" => Some(include_str!("../fixtures/algebras/poisson-weight2.json")),
        _ => None,
    }
}

/// Resolves a builtin presentation name or reads an operad file.
pub fn load_operad(spec: &str) -> Result<Presentation, CliError> {
    if let Ok(p) = Presentation::builtin(spec) {
        return Ok(p);
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|source| CliError::Io { path: spec.to_string(), source })?;
    Ok(Presentation::from_json_str(&text)?)
}

fn checked_rat(num: i64, den: i64, what: &str) -> Result<Rat, CliError> {
    if den == 0 {
        return Err(CliError::Invalid(format!("zero denominator in {what}")));
    }
    Ok(rat(num, den))
}

/// Builds an algebra from its JSON form, resolving the operad field as a
/// builtin name or a path.
pub fn algebra_from_json(json: &AlgebraJson) -> Result<DgAlgebra, CliError> {
    let operad = load_operad(&json.operad)?;
    operad.validate()?;
    let basis: Vec<(String, i64)> =
        json.basis.iter().map(|b| (b.name.clone(), b.degree)).collect();
    let index = |name: &str| -> Result<usize, CliError> {
        basis
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| CliError::Algebra(AlgebraError::UnknownBasis(name.to_string())))
    };
    let mut differential = Mat::zero(basis.len(), basis.len());
    for (src, dst, num, den) in &json.differential {
        let coeff = checked_rat(*num, *den, &format!("differential of {src}"))?;
        differential.add_to(index(dst)?, index(src)?, coeff);
    }
    let mut actions: BTreeMap<String, BTreeMap<Vec<usize>, SVec<Rat>>> = BTreeMap::new();
    for (gen, entries) in &json.actions {
        let table = actions.entry(gen.clone()).or_default();
        for entry in entries {
            let mut tuple = Vec::with_capacity(entry.inputs.len());
            for name in &entry.inputs {
                tuple.push(index(name)?);
            }
            let mut out = SVec::zero();
            for (name, num, den) in &entry.output {
                let coeff = checked_rat(*num, *den, &format!("{gen}({})", entry.inputs.join(","))) ?;
                out = out.add_scaled(&coeff, &SVec::unit(index(name)?));
            }
            if table.insert(tuple, out).is_some() {
                return Err(CliError::Invalid(format!(
                    "duplicate action entry for {gen}({})",
                    entry.inputs.join(",")
                )));
            }
        }
    }
    Ok(DgAlgebra::new(operad, basis, differential, actions)?)
}

pub fn algebra_from_json_str(text: &str) -> Result<DgAlgebra, CliError> {
    let json: AlgebraJson = serde_json::from_str(text)?;
    algebra_from_json(&json)
}

/// Resolves a builtin fixture name or reads an algebra file. Every loaded
/// algebra is validated; violations are errors.
pub fn load_algebra(spec: &str) -> Result<DgAlgebra, CliError> {
    let text = match builtin_algebra_source(spec) {
        Some(s) => s.to_string(),
        None => std::fs::read_to_string(spec)
            .map_err(|source| CliError::Io { path: spec.to_string(), source })?,
    };
    let algebra = algebra_from_json_str(&text)?;
    let report = algebra.validate();
    if !report.is_valid() {
        return Err(CliError::Invalid(format!("algebra {spec} fails validation:\n{report}")));
    }
    Ok(algebra)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_fixture_loads_and_validates() {
        for name in BUILTIN_ALGEBRAS {
            let algebra = load_algebra(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(algebra.dim() > 0, "{name} is nonempty");
            assert!(algebra.validate().is_valid(), "{name} revalidates");
        }
    }

    #[test]
    fn fixture_homology_matches_designed_classes() {
        let a = load_algebra("triple-massey-ass").expect("fixture");
        let (h, h_alg) = a.homology_of().expect("homology");
        let mut degs: Vec<i64> = h.h_basis.iter().map(|(_, d)| *d).collect();
        degs.sort_unstable();
        assert_eq!(degs, vec![1, 1, 1, 4]);
        assert!(h_alg.actions.values().all(|t| t.is_empty()), "all class products vanish");

        let lie = load_algebra("lie-bracket-massey").expect("fixture");
        let (h, h_alg) = lie.homology_of().expect("homology");
        let mut degs: Vec<i64> = h.h_basis.iter().map(|(_, d)| *d).collect();
        degs.sort_unstable();
        assert_eq!(degs, vec![1, 1, 1, 4]);
        assert!(h_alg.actions.values().all(|t| t.is_empty()));

        let stair = load_algebra("dual-numbers-staircase").expect("fixture");
        let (h, h_alg) = stair.homology_of().expect("homology");
        let mut degs: Vec<i64> = h.h_basis.iter().map(|(_, d)| *d).collect();
        degs.sort_unstable();
        assert_eq!(degs, vec![0, 0, 3, 5]);
        assert!(h_alg.actions.values().all(|t| t.is_empty()), "induced operator vanishes");
    }

    #[test]
    fn malformed_algebra_files_error() {
        assert!(matches!(algebra_from_json_str("{"), Err(CliError::Parse(_))));

        let unknown_name = r#"{
            "operad": "ass",
            "basis": [{"name": "x", "degree": 1}],
            "differential": [["x", "ghost", 1, 1]],
            "actions": {}
        }"#;
        assert!(matches!(
            algebra_from_json_str(unknown_name),
            Err(CliError::Algebra(AlgebraError::UnknownBasis(_)))
        ));

        let zero_den = r#"{
            "operad": "ass",
            "basis": [{"name": "x", "degree": 1}],
            "differential": [],
            "actions": {"mu": [{"inputs": ["x", "x"], "output": [["x", 1, 0]]}]}
        }"#;
        assert!(matches!(algebra_from_json_str(zero_den), Err(CliError::Invalid(_))));

        let missing_operad = r#"{
            "operad": "/nonexistent/path.json",
            "basis": [],
            "differential": [],
            "actions": {}
        }"#;
        assert!(matches!(algebra_from_json_str(missing_operad), Err(CliError::Io { .. })));
    }

    #[test]
    fn session_bounds_are_checked() {
        assert!(SessionConfig { max_arity: 0, ..Default::default() }.checked().is_err());
        let cfg = SessionConfig::default();
        assert_eq!((cfg.max_arity, cfg.max_weight), (5, 4));
    }
}
