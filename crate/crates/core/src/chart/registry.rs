use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, CatalogError, InstanceRef};
use crate::exact::Rat;
use crate::lie::Mat;
use crate::limits::{ArrowSpec, ConjugatorFamily, LimitError};

const BUILTIN_SEQUENCES: &str = include_str!("../../registry/sequences.json");

/// Environment variable naming a directory with `catalog.json` and/or
/// `sequences.json` to use instead of the built-in registries.
pub const REGISTRY_DIR_VAR: &str = "CHABAUTY_REGISTRY_DIR";

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("sequences: {0}")]
    Json(String),
    #[error("arrow {index} ({source_ref} -> {target}): {error}")]
    Arrow {
        index: usize,
        source_ref: String,
        target: String,
        error: LimitError,
    },
    #[error(
        "arrow {index}: source dimension {source_dim} differs from target dimension {target_dim}"
    )]
    DimensionMismatch {
        index: usize,
        source_dim: usize,
        target_dim: usize,
    },
    #[error("{path}: {error}")]
    Io {
        path: PathBuf,
        error: std::io::Error,
    },
}

/// One conjugating sequence as stored on disk; `g` may mention the source
/// parameters and the sequence variable `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrowEntry {
    pub source: InstanceRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pre: Option<Mat<Rat>>,
    pub g: [[String; 3]; 3],
    pub target: InstanceRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post: Option<Mat<Rat>>,
    pub citation: String,
    /// Sequence to use when the primary one does not verify; the report
    /// flags the substitution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback: Option<FamilyEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pre: Option<Mat<Rat>>,
    pub g: [[String; 3]; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post: Option<Mat<Rat>>,
    pub citation: String,
}

/// A registered arrow with its parsed primary and fallback families.
#[derive(Debug, Clone)]
pub struct RegisteredArrow {
    pub spec: ArrowSpec,
    pub fallback: Option<ConjugatorFamily>,
}

/// A refutation proved by an argument the engine does not mechanize. A
/// missing parameter set matches every sample of that id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationEntry {
    pub source: InstanceRef,
    pub target: InstanceRef,
    pub reference: String,
}

impl CitationEntry {
    pub fn matches(&self, source: &InstanceRef, target: &InstanceRef) -> bool {
        let hit = |pat: &InstanceRef, r: &InstanceRef| {
            pat.id == r.id && (pat.params.is_empty() || pat.params == r.params)
        };
        hit(&self.source, source) && hit(&self.target, target)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SequenceFile {
    pub arrows: Vec<ArrowEntry>,
    #[serde(default)]
    pub citations: Vec<CitationEntry>,
}

#[derive(Debug, Clone)]
pub struct Registries {
    pub catalog: Catalog,
    pub arrows: Vec<RegisteredArrow>,
    pub citations: Vec<CitationEntry>,
}

impl Registries {
    pub fn builtin() -> Self {
        Self::from_parts(Catalog::builtin(), BUILTIN_SEQUENCES)
            .expect("built-in registries are valid")
    }

    pub fn from_parts(catalog: Catalog, sequences_json: &str) -> Result<Self, RegistryError> {
        let file: SequenceFile =
            serde_json::from_str(sequences_json).map_err(|e| RegistryError::Json(e.to_string()))?;
        let mut arrows = Vec::with_capacity(file.arrows.len());
        for (index, a) in file.arrows.iter().enumerate() {
            let wrap = |error: LimitError| RegistryError::Arrow {
                index,
                source_ref: a.source.to_string(),
                target: a.target.to_string(),
                error,
            };
            let source = catalog
                .resolve(&a.source.id, &a.source.params)
                .map_err(|e| wrap(e.into()))?;
            let target = catalog
                .resolve(&a.target.id, &a.target.params)
                .map_err(|e| wrap(e.into()))?;
            catalog.stratum(&source).map_err(|e| wrap(e.into()))?;
            catalog.stratum(&target).map_err(|e| wrap(e.into()))?;
            let (source_dim, target_dim) = (
                catalog.entry(&source.id)?.dim,
                catalog.entry(&target.id)?.dim,
            );
            if source_dim != target_dim {
                return Err(RegistryError::DimensionMismatch {
                    index,
                    source_dim,
                    target_dim,
                });
            }
            let family = ConjugatorFamily::from_text(
                a.pre.clone(),
                &a.g,
                a.post.clone(),
                &a.citation,
                &source.params,
            )
            .map_err(wrap)?;
            let fallback = a
                .fallback
                .as_ref()
                .map(|f| {
                    ConjugatorFamily::from_text(
                        f.pre.clone(),
                        &f.g,
                        f.post.clone(),
                        &f.citation,
                        &source.params,
                    )
                })
                .transpose()
                .map_err(wrap)?;
            arrows.push(RegisteredArrow {
                spec: ArrowSpec {
                    source,
                    family,
                    target,
                },
                fallback,
            });
        }
        for c in &file.citations {
            catalog.entry(&c.source.id)?;
            catalog.entry(&c.target.id)?;
        }
        Ok(Registries {
            catalog,
            arrows,
            citations: file.citations,
        })
    }

    /// Loads from explicit paths, falling back to the built-in files.
    pub fn load(
        catalog_path: Option<&Path>,
        sequences_path: Option<&Path>,
    ) -> Result<Self, RegistryError> {
        let catalog = match catalog_path {
            Some(p) => Catalog::load(p)?,
            None => Catalog::builtin(),
        };
        let sequences = match sequences_path {
            Some(p) => std::fs::read_to_string(p).map_err(|error| RegistryError::Io {
                path: p.to_path_buf(),
                error,
            })?,
            None => BUILTIN_SEQUENCES.to_string(),
        };
        Self::from_parts(catalog, &sequences)
    }

    /// Honors `CHABAUTY_REGISTRY_DIR`; files missing from that directory
    /// fall back to the built-in ones.
    pub fn from_env() -> Result<Self, RegistryError> {
        match std::env::var_os(REGISTRY_DIR_VAR) {
            Some(dir) => {
                let dir = PathBuf::from(dir);
                let cat = dir.join("catalog.json");
                let seq = dir.join("sequences.json");
                Self::load(
                    cat.exists().then_some(cat.as_path()),
                    seq.exists().then_some(seq.as_path()),
                )
            }
            None => Ok(Self::builtin()),
        }
    }

    pub fn arrows_of_dim(&self, dim: usize) -> Vec<&RegisteredArrow> {
        self.arrows
            .iter()
            .filter(|a| self.catalog.entry(&a.spec.source.id).map(|e| e.dim) == Ok(dim))
            .collect()
    }

    pub fn citation(&self, source: &InstanceRef, target: &InstanceRef) -> Option<&CitationEntry> {
        self.citations.iter().find(|c| c.matches(source, target))
    }

    /// Arrow keyed as `builtin:SOURCE->TARGET`, e.g. `builtin:W1,5->W1,4`.
    /// When several arrows share the ids the first registered one is used.
    pub fn builtin_key(&self, key: &str) -> Option<&RegisteredArrow> {
        let (s, t) = key.strip_prefix("builtin:")?.split_once("->")?;
        self.arrows
            .iter()
            .find(|a| a.spec.source.id == s && a.spec.target.id == t)
    }
}
