use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{RegisteredArrow, Registries};
use crate::catalog::{CatalogError, InstanceRef};
use crate::certificates::{
    refute_subalgebras, verify_arrow, ArrowFailure, Certificate, CertificateKind,
};
use crate::grassmann::Subalgebra;
use crate::lie::normalizer;
use crate::limits::ArrowSpec;

pub const MAX_DIM: usize = 6;

#[derive(Debug, Error)]
pub enum ChartError {
    #[error("dimension {0} outside 1..=6")]
    Dimension(usize),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// Wall-clock time of one item. Excluded from serialization and from
/// report equality so that reruns compare equal.
#[derive(Debug, Clone, Copy, Default)]
pub struct Elapsed(pub Duration);

impl PartialEq for Elapsed {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Elapsed {}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub instance: InstanceRef,
    pub stratum: String,
    /// Other instances whose subalgebra coincides with this node's.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<InstanceRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrowRecord {
    pub certificate: Certificate,
    #[serde(skip)]
    pub elapsed: Elapsed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub certificate: Certificate,
    #[serde(skip)]
    pub elapsed: Elapsed,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub nodes: usize,
    pub pairs: usize,
    pub verified: usize,
    pub substituted: usize,
    pub failed: usize,
    /// Distinct node pairs joined by a verified arrow.
    pub direct: usize,
    /// Pairs in the transitive closure that are not themselves registered arrows.
    pub implied: usize,
    pub refuted: BTreeMap<String, usize>,
    pub cited: usize,
    pub undecided: usize,
    pub audit_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartReport {
    pub dim: usize,
    pub nodes: Vec<Node>,
    pub arrows: Vec<ArrowRecord>,
    pub failures: Vec<ArrowFailure>,
    pub implied: Vec<(InstanceRef, InstanceRef)>,
    pub refutations: Vec<PairRecord>,
    pub audit: Vec<String>,
    pub summary: Summary,
}

impl ChartReport {
    pub fn passed(&self) -> bool {
        self.summary.failed == 0
            && self.summary.undecided == 0
            && self.summary.audit_violations == 0
    }

    pub fn undecided(&self) -> impl Iterator<Item = &Certificate> {
        self.refutations
            .iter()
            .map(|r| &r.certificate)
            .filter(|c| matches!(c.kind, CertificateKind::Undecided))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Graphviz rendering at the level of (id, stratum): instances sharing
    /// both are drawn as one node and parallel edges are merged. Solid edges
    /// are verified arrows, dashed edges arrows known only by citation.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"dim{}\" {{", self.dim);
        let mut seen = BTreeSet::new();
        for n in &self.nodes {
            let key = dot_key(&n.instance.id, &n.stratum);
            if seen.insert(key.clone()) {
                let label = format!("{}\\n{}", escape(&n.instance.id), escape(&n.stratum));
                let _ = writeln!(out, "  \"{}\" [label=\"{label}\"];", escape(&key));
            }
        }
        let stratum_of = |r: &InstanceRef| {
            self.nodes
                .iter()
                .find(|n| n.instance == *r || n.aliases.contains(r))
                .map_or("generic", |n| n.stratum.as_str())
        };
        let mut edges = BTreeSet::new();
        for a in &self.arrows {
            let c = &a.certificate;
            let dashed = matches!(c.kind, CertificateKind::Cited { .. });
            let s = dot_key(&c.source.id, stratum_of(&c.source));
            let t = dot_key(&c.target.id, stratum_of(&c.target));
            if edges.insert((s.clone(), t.clone())) {
                let style = if dashed { " [style=dashed]" } else { "" };
                let _ = writeln!(out, "  \"{}\" -> \"{}\"{style};", escape(&s), escape(&t));
            }
        }
        out.push_str("}\n");
        out
    }
}

fn dot_key(id: &str, stratum: &str) -> String {
    if stratum == "generic" {
        id.to_string()
    } else {
        format!("{id} {stratum}")
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

struct NodeSet {
    nodes: Vec<Node>,
    algebras: Vec<Subalgebra>,
}

impl NodeSet {
    fn index_of(&self, s: &Subalgebra) -> Option<usize> {
        self.algebras.iter().position(|a| a == s)
    }
}

fn collect_nodes(reg: &Registries, dim: usize) -> Result<NodeSet, CatalogError> {
    let cat = &reg.catalog;
    let mut refs: BTreeSet<InstanceRef> = cat.samples(dim).into_iter().collect();
    for a in reg.arrows_of_dim(dim) {
        refs.insert(a.spec.source.clone());
        refs.insert(a.spec.target.clone());
    }
    let mut set = NodeSet {
        nodes: Vec::new(),
        algebras: Vec::new(),
    };
    for r in refs {
        let s = cat.instantiate_ref(&r)?;
        match set.index_of(&s) {
            Some(i) => set.nodes[i].aliases.push(r),
            None => {
                set.nodes.push(Node {
                    stratum: cat.stratum(&r)?.name.clone(),
                    instance: r,
                    aliases: Vec::new(),
                });
                set.algebras.push(s);
            }
        }
    }
    Ok(set)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Elapsed) {
    let start = Instant::now();
    let out = f();
    (out, Elapsed(start.elapsed()))
}

/// Verifies a registered arrow, falling back to its substitute family when
/// the primary sequence does not reach the target. A substitution is
/// recorded in the certificate.
pub fn verify_registered(
    reg: &Registries,
    arrow: &RegisteredArrow,
) -> Result<Certificate, ArrowFailure> {
    let primary = match verify_arrow(&reg.catalog, &arrow.spec) {
        Ok(c) => return Ok(c),
        Err(f) => f,
    };
    let Some(family) = &arrow.fallback else {
        return Err(primary);
    };
    let alt = ArrowSpec {
        family: family.clone(),
        ..arrow.spec.clone()
    };
    let mut c = verify_arrow(&reg.catalog, &alt).map_err(|_| primary.clone())?;
    if let CertificateKind::Verified { substitution, .. } = &mut c.kind {
        *substitution = Some(format!("registered sequence failed: {}", primary.reason));
    }
    Ok(c)
}

fn transitive_closure(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut reach = vec![vec![false; n]; n];
    for &(a, b) in edges {
        reach[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    reach
}

/// Verifies every registered arrow of dimension `dim`, closes the verified
/// relation transitively, refutes every other ordered pair of nodes and
/// audits the closure against the mechanical obstructions.
pub fn run_chart(reg: &Registries, dim: usize) -> Result<ChartReport, ChartError> {
    if !(1..=MAX_DIM).contains(&dim) {
        return Err(ChartError::Dimension(dim));
    }
    let cat = &reg.catalog;
    let set = collect_nodes(reg, dim)?;
    let n = set.nodes.len();

    let registered = reg.arrows_of_dim(dim);
    let verified: Vec<_> = registered
        .par_iter()
        .map(|a| timed(|| verify_registered(reg, a)))
        .collect();

    let mut arrows = Vec::new();
    let mut failures = Vec::new();
    let mut edges = Vec::new();
    for (result, elapsed) in verified {
        match result {
            Ok(c) => {
                let lookup =
                    |r: &InstanceRef| cat.instantiate_ref(r).ok().and_then(|s| set.index_of(&s));
                if let (Some(i), Some(j)) = (lookup(&c.source), lookup(&c.target)) {
                    if i != j {
                        edges.push((i, j));
                    }
                }
                arrows.push(ArrowRecord {
                    certificate: c,
                    elapsed,
                });
            }
            Err(f) => failures.push(f),
        }
    }
    arrows.sort_by(|a, b| {
        (&a.certificate.source, &a.certificate.target)
            .cmp(&(&b.certificate.source, &b.certificate.target))
    });
    failures.sort_by(|a, b| (&a.source, &a.target).cmp(&(&b.source, &b.target)));

    let reach = transitive_closure(n, &edges);
    let direct: BTreeSet<(usize, usize)> = edges.iter().copied().collect();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();

    let outcomes: Vec<_> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (s, t) = (&set.nodes[i].instance, &set.nodes[j].instance);
            timed(|| {
                let kind = refute_subalgebras(&set.algebras[i], &set.algebras[j]);
                if reach[i][j] {
                    return (
                        i,
                        j,
                        kind.map(|k| Certificate {
                            source: s.clone(),
                            target: t.clone(),
                            kind: k,
                        }),
                    );
                }
                let kind = kind.unwrap_or_else(|| match reg.citation(s, t) {
                    Some(c) => CertificateKind::Cited {
                        reference: c.reference.clone(),
                    },
                    None => CertificateKind::Undecided,
                });
                (
                    i,
                    j,
                    Some(Certificate {
                        source: s.clone(),
                        target: t.clone(),
                        kind,
                    }),
                )
            })
        })
        .collect();

    let mut implied = Vec::new();
    let mut refutations = Vec::new();
    let mut audit = Vec::new();
    for ((i, j, cert), elapsed) in outcomes {
        let (s, t) = (&set.nodes[i].instance, &set.nodes[j].instance);
        if reach[i][j] {
            if let Some(c) = cert {
                audit.push(format!(
                    "{s} -> {t} is in the closure but refuted by {}",
                    c.summary()
                ));
            }
            if !direct.contains(&(i, j)) {
                implied.push((s.clone(), t.clone()));
            }
        } else if let Some(c) = cert {
            refutations.push(PairRecord {
                certificate: c,
                elapsed,
            });
        }
    }
    for &(i, j) in &direct {
        let (a, b) = (&set.algebras[i], &set.algebras[j]);
        let (na, nb) = (normalizer(a.basis()).dim(), normalizer(b.basis()).dim());
        if set.nodes[i].instance.id != set.nodes[j].instance.id && nb <= na {
            audit.push(format!(
                "{} -> {}: normalizer dimension {na} does not increase to {nb}",
                set.nodes[i].instance, set.nodes[j].instance
            ));
        }
        if crate::lie::is_abelian(a.basis()) && !crate::lie::is_abelian(b.basis()) {
            audit.push(format!(
                "{} -> {}: abelian source with non-abelian limit",
                set.nodes[i].instance, set.nodes[j].instance
            ));
        }
    }

    let mut summary = Summary {
        nodes: n,
        pairs: pairs.len(),
        verified: arrows.len(),
        substituted: arrows
            .iter()
            .filter(|a| {
                matches!(
                    &a.certificate.kind,
                    CertificateKind::Verified {
                        substitution: Some(_),
                        ..
                    }
                )
            })
            .count(),
        failed: failures.len(),
        direct: direct.len(),
        implied: implied.len(),
        audit_violations: audit.len(),
        ..Summary::default()
    };
    for r in &refutations {
        match r.certificate.kind {
            CertificateKind::Cited { .. } => summary.cited += 1,
            CertificateKind::Undecided => summary.undecided += 1,
            _ => {
                *summary
                    .refuted
                    .entry(r.certificate.name().to_string())
                    .or_default() += 1
            }
        }
    }

    Ok(ChartReport {
        dim,
        nodes: set.nodes,
        arrows,
        failures,
        implied,
        refutations,
        audit,
        summary,
    })
}
