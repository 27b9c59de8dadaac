//! The catalog of connected subgroups of SL3(R), as Lie subalgebras of sl3.
//!
//! Each entry is a parametric family with named strata, a basis given by
//! expression strings in the parameters, and metadata from the
//! classification tables.

mod fingerprint;
mod predicate;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fingerprint::{Fingerprint, SpectrumClass, WeightClass};

use crate::exact::{parse_constant, ExactError, ParamAssignment, Rat};
use crate::grassmann::Subalgebra;
use crate::lie::{is_subalgebra, Basis, LieError, Mat};

const BUILTIN: &str = include_str!("../../registry/catalog.json");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("unknown catalog id `{0}`")]
    UnknownId(String),
    #[error("parameters ({params}) lie in no stratum of {id}")]
    StratumViolation { id: String, params: String },
    #[error("{id} has no parameter `{name}`")]
    UnknownParameter { id: String, name: String },
    #[error("{id}: {source}")]
    Expression { id: String, source: ExactError },
    #[error("{id}: {source}")]
    Basis { id: String, source: LieError },
    #[error("invalid catalog: {0}")]
    Invalid(String),
    #[error("catalog JSON: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stratum {
    pub name: String,
    pub predicate: Vec<String>,
    /// Parameter points used as chart nodes.
    pub samples: Vec<ParamAssignment>,
    /// Further points used only by consistency audits.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_samples: Vec<ParamAssignment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalizer_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebraic: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub definable: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Properties {
    pub abelian: bool,
    pub algebraic: bool,
    pub definable: bool,
    pub nilpotent: bool,
    /// Normalizer as listed in the table; its leading subscript is the dimension.
    pub normalizer_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transpose_of: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub dim: usize,
    #[serde(default)]
    pub params: Vec<String>,
    pub strata: Vec<Stratum>,
    /// One 3x3 matrix of expression strings per basis element.
    pub basis: Vec<[[String; 3]; 3]>,
    pub properties: Properties,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CatalogFile {
    entries: Vec<CatalogEntry>,
}

/// A catalog id with concrete parameter values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InstanceRef {
    pub id: String,
    #[serde(default, skip_serializing_if = "ParamAssignment::is_empty")]
    pub params: ParamAssignment,
}

impl InstanceRef {
    pub fn new(id: &str, params: ParamAssignment) -> Self {
        InstanceRef {
            id: id.to_string(),
            params,
        }
    }

    pub fn plain(id: &str) -> Self {
        Self::new(id, ParamAssignment::new())
    }
}

impl fmt::Display for InstanceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.params.is_empty() {
            write!(f, "{}", self.id)
        } else {
            write!(f, "{}[{}]", self.id, self.params)
        }
    }
}

/// Leading subscript of an id such as `W4,6`.
pub fn id_dim(id: &str) -> Option<usize> {
    id.strip_prefix('W')?.split(',').next()?.parse().ok()
}

#[derive(Debug, Clone)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
    index: HashMap<String, usize>,
}

impl CatalogEntry {
    pub fn stratum_named(&self, name: &str) -> Option<&Stratum> {
        self.strata.iter().find(|s| s.name == name)
    }

    fn check_params(&self, params: &ParamAssignment) -> Result<(), CatalogError> {
        match params.names().find(|n| !self.params.iter().any(|p| p == n)) {
            Some(name) => Err(CatalogError::UnknownParameter {
                id: self.id.clone(),
                name: name.to_string(),
            }),
            None => Ok(()),
        }
    }

    /// The first stratum whose predicate holds at `params`.
    pub fn stratum_of(&self, params: &ParamAssignment) -> Result<&Stratum, CatalogError> {
        self.check_params(params)?;
        for s in &self.strata {
            let ok =
                predicate::holds(&s.predicate, params).map_err(|e| CatalogError::Expression {
                    id: self.id.clone(),
                    source: e,
                })?;
            if ok {
                return Ok(s);
            }
        }
        Err(CatalogError::StratumViolation {
            id: self.id.clone(),
            params: params.to_string(),
        })
    }

    pub fn basis_mats(&self, params: &ParamAssignment) -> Result<Vec<Mat<Rat>>, CatalogError> {
        let err = |e| CatalogError::Expression {
            id: self.id.clone(),
            source: e,
        };
        self.basis
            .iter()
            .map(|m| {
                let mut out = Mat::<Rat>::zero();
                for i in 0..3 {
                    for j in 0..3 {
                        out.0[i][j] = parse_constant(&m[i][j], params).map_err(err)?;
                    }
                }
                Ok(out)
            })
            .collect()
    }

    pub fn normalizer_id(&self, stratum: &Stratum) -> String {
        stratum
            .normalizer_id
            .clone()
            .unwrap_or_else(|| self.properties.normalizer_id.clone())
    }

    pub fn is_algebraic(&self, stratum: &Stratum) -> bool {
        stratum.algebraic.unwrap_or(self.properties.algebraic)
    }

    pub fn is_definable(&self, stratum: &Stratum) -> bool {
        stratum.definable.unwrap_or(self.properties.definable)
    }

    /// Sample points of every stratum, in file order.
    pub fn sample_refs(&self) -> Vec<InstanceRef> {
        self.strata
            .iter()
            .flat_map(|s| {
                s.samples
                    .iter()
                    .map(|p| InstanceRef::new(&self.id, p.clone()))
            })
            .collect()
    }
}

impl Catalog {
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN).expect("built-in catalog is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        let file: CatalogFile =
            serde_json::from_str(text).map_err(|e| CatalogError::Json(e.to_string()))?;
        Self::new(file.entries)
    }

    pub fn load(path: &Path) -> Result<Self, CatalogError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CatalogError::Json(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CatalogFile {
            entries: self.entries.clone(),
        })
        .expect("catalog serializes")
    }

    /// Validates ids, metadata references and every sample point.
    pub fn new(entries: Vec<CatalogEntry>) -> Result<Self, CatalogError> {
        let mut index = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            if index.insert(e.id.clone(), i).is_some() {
                return Err(CatalogError::Invalid(format!("duplicate id {}", e.id)));
            }
            if id_dim(&e.id) != Some(e.dim) || e.basis.len() != e.dim {
                return Err(CatalogError::Invalid(format!(
                    "{}: dimension mismatch",
                    e.id
                )));
            }
            if e.strata.is_empty() {
                return Err(CatalogError::Invalid(format!("{}: no strata", e.id)));
            }
        }
        let cat = Catalog { entries, index };
        for e in &cat.entries {
            let mut refs: Vec<&String> = vec![&e.properties.normalizer_id];
            refs.extend(e.strata.iter().filter_map(|s| s.normalizer_id.as_ref()));
            refs.extend(e.properties.transpose_of.iter());
            if let Some(r) = refs.iter().find(|r| id_dim(r).is_none()) {
                return Err(CatalogError::Invalid(format!(
                    "{}: bad reference {r}",
                    e.id
                )));
            }
            if let Some(t) = &e.properties.transpose_of {
                cat.entry(t)?;
            }
            for s in &e.strata {
                if s.samples.is_empty() {
                    return Err(CatalogError::Invalid(format!(
                        "{} {}: no samples",
                        e.id, s.name
                    )));
                }
                for p in s.samples.iter().chain(&s.extra_samples) {
                    if e.stratum_of(p)?.name != s.name {
                        return Err(CatalogError::Invalid(format!(
                            "{}: sample ({p}) is not in stratum {}",
                            e.id, s.name
                        )));
                    }
                    let sub = cat.instantiate(&e.id, p)?;
                    if !is_subalgebra(sub.basis()) {
                        return Err(CatalogError::Invalid(format!(
                            "{} ({p}) is not a subalgebra",
                            e.id
                        )));
                    }
                }
            }
        }
        Ok(cat)
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn entry(&self, id: &str) -> Result<&CatalogEntry, CatalogError> {
        self.index
            .get(id)
            .map(|&i| &self.entries[i])
            .ok_or_else(|| CatalogError::UnknownId(id.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// Ids of the given dimension with their stratum names, in table order.
    pub fn enumerate(&self, dim: usize) -> Vec<(String, Vec<String>)> {
        self.entries
            .iter()
            .filter(|e| e.dim == dim)
            .map(|e| {
                (
                    e.id.clone(),
                    e.strata.iter().map(|s| s.name.clone()).collect(),
                )
            })
            .collect()
    }

    /// Fills in omitted parameters from the first sample of the first stratum.
    pub fn resolve(&self, id: &str, given: &ParamAssignment) -> Result<InstanceRef, CatalogError> {
        let e = self.entry(id)?;
        let mut p = given.clone();
        let default = &e.strata[0].samples[0];
        for (k, v) in default.iter() {
            if p.get(k).is_none() {
                p.insert(k, v.clone());
            }
        }
        e.check_params(&p)?;
        Ok(InstanceRef::new(id, p))
    }

    pub fn stratum(&self, r: &InstanceRef) -> Result<&Stratum, CatalogError> {
        self.entry(&r.id)?.stratum_of(&r.params)
    }

    pub fn instantiate(
        &self,
        id: &str,
        params: &ParamAssignment,
    ) -> Result<Subalgebra, CatalogError> {
        let e = self.entry(id)?;
        e.stratum_of(params)?;
        let mats = e.basis_mats(params)?;
        let basis = Basis::new(mats).map_err(|source| CatalogError::Basis {
            id: id.to_string(),
            source,
        })?;
        Ok(Subalgebra::from_basis(&basis))
    }

    pub fn instantiate_ref(&self, r: &InstanceRef) -> Result<Subalgebra, CatalogError> {
        self.instantiate(&r.id, &r.params)
    }

    pub fn fingerprint(
        &self,
        id: &str,
        params: &ParamAssignment,
    ) -> Result<Fingerprint, CatalogError> {
        Ok(Fingerprint::of(&self.instantiate(id, params)?))
    }

    /// Sample instances of one dimension, in table order.
    pub fn samples(&self, dim: usize) -> Vec<InstanceRef> {
        self.entries
            .iter()
            .filter(|e| e.dim == dim)
            .flat_map(CatalogEntry::sample_refs)
            .collect()
    }

    /// Table normalizer dimension at an instance.
    pub fn table_normalizer_dim(&self, r: &InstanceRef) -> Result<usize, CatalogError> {
        let e = self.entry(&r.id)?;
        let s = e.stratum_of(&r.params)?;
        id_dim(&e.normalizer_id(s))
            .ok_or_else(|| CatalogError::Invalid(format!("{}: normalizer id", e.id)))
    }

    /// Entries grouped by dimension.
    pub fn by_dim(&self) -> BTreeMap<usize, Vec<&CatalogEntry>> {
        let mut out: BTreeMap<usize, Vec<&CatalogEntry>> = BTreeMap::new();
        for e in &self.entries {
            out.entry(e.dim).or_default().push(e);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;

    type M = Mat<Rat>;

    fn zz(zr: i64, zi: i64) -> ParamAssignment {
        ParamAssignment::new()
            .with("zr", int(zr))
            .with("zi", int(zi))
    }

    fn ab(a: i64, b: i64) -> ParamAssignment {
        ParamAssignment::new().with("a", int(a)).with("b", int(b))
    }

    #[test]
    fn instantiate_examples() {
        let cat = Catalog::builtin();
        let none = ParamAssignment::new();
        assert_eq!(
            cat.instantiate("W1,4", &none).unwrap(),
            Subalgebra::from_mats(&[M::unit(1, 2)]).unwrap()
        );
        let w210 = Subalgebra::from_mats(&[
            M::diag([int(1), int(0), int(-1)]),
            M::unit(1, 2).add(&M::unit(2, 3)),
        ])
        .unwrap();
        assert_eq!(cat.instantiate("W2,10", &none).unwrap(), w210);
        let w38 = Subalgebra::from_mats(&[
            M::from_ints([[1, 1, 0], [-1, 1, 0], [0, 0, -2]]),
            M::unit(1, 3),
            M::unit(2, 3),
        ])
        .unwrap();
        assert_eq!(cat.instantiate("W3,8", &zz(1, 1)).unwrap(), w38);
    }

    #[test]
    fn instantiate_errors() {
        let cat = Catalog::builtin();
        assert!(matches!(
            cat.instantiate("W1,1", &ab(0, 0)),
            Err(CatalogError::StratumViolation { .. })
        ));
        assert!(matches!(
            cat.instantiate("W9,1", &ab(1, 2)),
            Err(CatalogError::UnknownId(_))
        ));
        assert!(matches!(
            cat.instantiate("W1,4", &ab(1, 2)),
            Err(CatalogError::UnknownParameter { .. })
        ));
        assert!(matches!(
            cat.instantiate("W1,1", &ParamAssignment::new().with("a", int(1))),
            Err(CatalogError::Expression { .. })
        ));
    }

    #[test]
    fn enumerate_dims() {
        let cat = Catalog::builtin();
        let ids = |d| {
            cat.enumerate(d)
                .into_iter()
                .map(|(id, _)| id)
                .collect::<Vec<_>>()
        };
        assert_eq!(ids(5), vec!["W5,1", "W5,2", "W5,3"]);
        assert_eq!(ids(6), vec!["W6,1", "W6,2"]);
        assert!(ids(7).is_empty());
        assert_eq!(ids(8), vec!["W8,1"]);
        assert_eq!(ids(1).len(), 5);
        assert_eq!(ids(3).len(), 14);
    }

    #[test]
    fn fingerprint_examples() {
        let cat = Catalog::builtin();
        let none = ParamAssignment::new();
        let f = cat.fingerprint("W1,5", &none).unwrap();
        assert_eq!(
            (f.dim, f.normalizer_dim, f.abelian, f.all_nilpotent),
            (1, 3, true, true)
        );
        let f = cat.fingerprint("W2,2", &none).unwrap();
        assert_eq!(
            (f.normalizer_dim, f.abelian, f.all_nilpotent),
            (2, true, false)
        );
        assert_eq!(f.spectrum, SpectrumClass::Real);
        let f = cat.fingerprint("W3,13", &none).unwrap();
        assert_eq!((f.normalizer_dim, f.abelian), (3, false));
        assert_eq!(f.spectrum, SpectrumClass::Mixed);
        assert_eq!(
            cat.fingerprint("W3,14", &none).unwrap().spectrum,
            SpectrumClass::ComplexWitness
        );
    }

    #[test]
    fn resolve_defaults() {
        let cat = Catalog::builtin();
        let r = cat
            .resolve("W1,1", &ParamAssignment::new().with("b", int(5)))
            .unwrap();
        assert_eq!(r.params, ab(1, 5));
        assert_eq!(r.to_string(), "W1,1[a=1,b=5]");
    }

    #[test]
    fn invalid_files_rejected() {
        assert!(matches!(
            Catalog::from_json("{"),
            Err(CatalogError::Json(_))
        ));
        let mut entries = Catalog::builtin().entries().to_vec();
        entries[0].properties.transpose_of = Some("W9,9".into());
        assert!(Catalog::new(entries).is_err());
    }
}
