//! Ad-orbit families of catalog subalgebras, their exact limits, and a
//! bounded template search for conjugating sequences.

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::catalog::{Catalog, CatalogError, InstanceRef};
use crate::exact::{parse_expr, ExactError, Field, ParamAssignment, Rat, RatFunc};
use crate::grassmann::{limit_subspace, GrassmannError, LimitResult, Subalgebra};
use crate::lie::{is_subalgebra, Mat};
use crate::linalg;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LimitError {
    #[error("conjugator determinant {0} is not a nonzero constant")]
    BadDeterminant(String),
    #[error("constant conjugator is singular")]
    SingularConstant,
    #[error("source has dimension {source_dim} but target has dimension {target_dim}")]
    DimensionMismatch {
        source_dim: usize,
        target_dim: usize,
    },
    #[error("limit is not closed under the bracket")]
    NotSubalgebra,
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// `n -> pre`, then `g(n)`, then the constant `post` applied to the limit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjugatorFamily {
    pub pre: Option<Mat<Rat>>,
    pub g: Mat<RatFunc>,
    pub post: Option<Mat<Rat>>,
    pub citation: String,
    g_inv: Mat<RatFunc>,
}

impl ConjugatorFamily {
    pub fn new(
        pre: Option<Mat<Rat>>,
        g: Mat<RatFunc>,
        post: Option<Mat<Rat>>,
        citation: &str,
    ) -> Result<Self, LimitError> {
        let det = g.det();
        let c = det
            .constant_value()
            .filter(|c| !Field::is_zero(c))
            .ok_or_else(|| LimitError::BadDeterminant(det.to_string()))?;
        for m in pre.iter().chain(post.iter()) {
            if Field::is_zero(&m.det()) {
                return Err(LimitError::SingularConstant);
            }
        }
        let g_inv = g.adjugate().scale(&RatFunc::constant(Rat::recip(&c)));
        Ok(ConjugatorFamily {
            pre,
            g,
            post,
            citation: citation.to_string(),
            g_inv,
        })
    }

    /// Parses `g` from registry expression strings, with parameters bound.
    pub fn from_text(
        pre: Option<Mat<Rat>>,
        g: &[[String; 3]; 3],
        post: Option<Mat<Rat>>,
        citation: &str,
        params: &ParamAssignment,
    ) -> Result<Self, LimitError> {
        let mut m = Mat::<RatFunc>::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = parse_expr(&g[i][j], params)?;
            }
        }
        Self::new(pre, m, post, citation)
    }

    pub fn g_inverse(&self) -> &Mat<RatFunc> {
        &self.g_inv
    }

    /// Conjugator of the transposed family: if this family carries `S` to
    /// `L`, the result carries `sigma(S)` to `sigma(L)`, where
    /// `sigma(X) = w0 X^T w0`.
    pub fn transposed(&self) -> Self {
        let flip_const = |m: &Mat<Rat>| {
            let inv = m.inverse().expect("checked nonsingular");
            antidiagonal_flip(&inv.transpose())
        };
        let g = antidiagonal_flip(&self.g_inv.transpose());
        Self::new(
            self.pre.as_ref().map(flip_const),
            g,
            self.post.as_ref().map(flip_const),
            &self.citation,
        )
        .expect("transpose keeps the determinant constant")
    }
}

/// `w0 X w0` with `w0` the antidiagonal permutation.
fn antidiagonal_flip<T: Field>(m: &Mat<T>) -> Mat<T> {
    Mat::from_fn(|i, j| m.0[2 - i][2 - j].clone())
}

/// The transpose involution `X -> w0 X^T w0` of sl3, which maps `E_ij` to
/// `E_{4-j,4-i}` and preserves upper triangularity.
pub fn sigma(m: &Mat<Rat>) -> Mat<Rat> {
    antidiagonal_flip(&m.transpose())
}

#[derive(Serialize, Deserialize)]
struct FamilyRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pre: Option<Mat<Rat>>,
    g: [[String; 3]; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    post: Option<Mat<Rat>>,
    citation: String,
}

impl Serialize for ConjugatorFamily {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        FamilyRepr {
            pre: self.pre.clone(),
            g: std::array::from_fn(|i| std::array::from_fn(|j| self.g.0[i][j].to_string())),
            post: self.post.clone(),
            citation: self.citation.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConjugatorFamily {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = FamilyRepr::deserialize(d)?;
        Self::from_text(r.pre, &r.g, r.post, &r.citation, &ParamAssignment::new())
            .map_err(serde::de::Error::custom)
    }
}

/// A claimed arrow: the family carries the source into the target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrowSpec {
    pub source: InstanceRef,
    pub family: ConjugatorFamily,
    pub target: InstanceRef,
}

/// Coordinate rows of `g(n) pre X pre^{-1} g(n)^{-1}` for each basis element `X`.
pub fn ad_family(s: &Subalgebra, f: &ConjugatorFamily) -> Vec<Vec<RatFunc>> {
    let pre = f
        .pre
        .as_ref()
        .map(|p| (p, p.inverse().expect("checked nonsingular")));
    s.mats()
        .iter()
        .map(|x| {
            let y = match &pre {
                Some((p, p_inv)) => x.conjugate_by(p, p_inv),
                None => x.clone(),
            };
            y.lift().conjugate_by(&f.g, &f.g_inv).coords().to_vec()
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct LimitOutcome {
    /// The limit after the constant `post` conjugation.
    pub limit: Subalgebra,
    pub details: LimitResult,
}

/// Limit of the Ad-orbit family of `s`.
pub fn family_limit(s: &Subalgebra, f: &ConjugatorFamily) -> Result<LimitOutcome, LimitError> {
    let details = limit_subspace(&ad_family(s, f))?;
    let limit = match &f.post {
        Some(p) => details
            .limit
            .conjugate(p)
            .ok_or(LimitError::SingularConstant)?,
        None => details.limit.clone(),
    };
    if !is_subalgebra(limit.basis()) {
        return Err(LimitError::NotSubalgebra);
    }
    Ok(LimitOutcome { limit, details })
}

pub fn exact_limit(cat: &Catalog, spec: &ArrowSpec) -> Result<LimitOutcome, LimitError> {
    let source = cat.instantiate_ref(&spec.source)?;
    let target_dim = cat.entry(&spec.target.id)?.dim;
    if source.dim() != target_dim {
        return Err(LimitError::DimensionMismatch {
            source_dim: source.dim(),
            target_dim,
        });
    }
    family_limit(&source, &spec.family)
}

/// One factor `I + c n^k E_ij` of a search template.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Shear {
    i: usize,
    j: usize,
    c: i64,
    k: i32,
}

impl Shear {
    fn cost(&self) -> usize {
        1 + self.k.unsigned_abs() as usize + (self.c.unsigned_abs() as usize - 1)
    }

    fn mat(&self) -> Mat<RatFunc> {
        let mut m = Mat::<RatFunc>::identity();
        m.0[self.i][self.j] = RatFunc::var_pow(self.k).scale(&Rat::from_integer(self.c.into()));
        m
    }
}

#[derive(Debug, Clone)]
struct Template {
    perm: [usize; 3],
    signs: [i64; 3],
    exps: [i32; 3],
    shears: Vec<Shear>,
}

impl Template {
    fn perm_mat<T: Field>(&self) -> Mat<T> {
        Mat::from_fn(|i, j| {
            if self.perm[i] == j {
                T::from_rat(&Rat::from_integer(self.signs[i].into()))
            } else {
                T::zero()
            }
        })
    }

    fn conjugator(&self) -> Mat<RatFunc> {
        let d = Mat::diag(self.exps.map(RatFunc::var_pow));
        self.shears
            .iter()
            .fold(self.perm_mat::<RatFunc>().mul(&d), |acc, s| {
                acc.mul(&s.mat())
            })
    }

    /// `g(n0)` and its inverse, computed factor by factor.
    fn at(&self, n0: &Rat) -> (Mat<Rat>, Mat<Rat>) {
        let pw = |e: i32| {
            Rat::from_integer(n0.numer().pow(e.unsigned_abs()))
                / Rat::from_integer(n0.denom().pow(e.unsigned_abs()))
        };
        let pow = |e: i32| if e >= 0 { pw(e) } else { Rat::recip(&pw(e)) };
        let p = self.perm_mat::<Rat>();
        let mut g = p.mul(&Mat::diag(self.exps.map(pow)));
        let mut inv = Mat::diag(self.exps.map(|e| pow(-e))).mul(&p.transpose());
        for s in &self.shears {
            let c = Rat::from_integer(s.c.into()) * pow(s.k);
            let mut u = Mat::<Rat>::identity();
            u.0[s.i][s.j] = c.clone();
            let mut u_inv = Mat::<Rat>::identity();
            u_inv.0[s.i][s.j] = -c;
            g = g.mul(&u);
            inv = u_inv.mul(&inv);
        }
        (g, inv)
    }
}

const PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];
// Sign patterns up to an overall sign, which does not change conjugation.
const SIGNS: [[i64; 3]; 4] = [[1, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1]];

fn shear_options() -> Vec<Shear> {
    let mut out = Vec::new();
    for k in [1, 0, 2, -1, 3, -2, -3] {
        for c in [1, -1, 2, -2, 3, -3] {
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        out.push(Shear { i, j, c, k });
                    }
                }
            }
        }
    }
    out
}

fn diag_options() -> Vec<([i32; 3], usize)> {
    let mut out = Vec::new();
    for e1 in -2..=2i32 {
        for e2 in -2..=2i32 {
            let e3 = -e1 - e2;
            if e3.abs() <= 2 {
                let cost = (e1.abs() + e2.abs() + e3.abs()) as usize / 2;
                out.push(([e1, e2, e3], cost));
            }
        }
    }
    out.sort_by_key(|&(e, c)| (c, std::cmp::Reverse(e)));
    out
}

/// Shear sequences of exactly the given cost, skipping repeated positions in
/// adjacent factors since those merge into one factor.
fn shear_sequences(
    opts: &[Shear],
    cost: usize,
    max_len: usize,
    out: &mut Vec<Vec<Shear>>,
    cur: &mut Vec<Shear>,
) {
    if cost == 0 {
        out.push(cur.clone());
        return;
    }
    if cur.len() == max_len {
        return;
    }
    for s in opts {
        if s.cost() > cost || cur.last().is_some_and(|l| (l.i, l.j) == (s.i, s.j)) {
            continue;
        }
        cur.push(*s);
        shear_sequences(opts, cost - s.cost(), max_len, out, cur);
        cur.pop();
    }
}

/// Templates `P D(n) U(n)` of exactly total cost `w`, in a fixed order.
fn templates_of_cost(w: usize) -> Vec<Template> {
    let shears = shear_options();
    let diags = diag_options();
    let mut by_cost: Vec<Option<Vec<Vec<Shear>>>> = vec![None; w + 1];
    let mut out = Vec::new();
    for (pi, perm) in PERMS.iter().enumerate() {
        for signs in SIGNS {
            let pcost = usize::from(pi != 0) + signs.iter().filter(|&&s| s < 0).count();
            for &(exps, dcost) in &diags {
                let Some(rest) = w.checked_sub(pcost + dcost) else {
                    continue;
                };
                let seqs = by_cost[rest].get_or_insert_with(|| {
                    let mut v = Vec::new();
                    shear_sequences(&shears, rest, 3, &mut v, &mut Vec::new());
                    v
                });
                for seq in seqs.iter().cloned() {
                    out.push(Template {
                        perm: *perm,
                        signs,
                        exps,
                        shears: seq,
                    });
                }
            }
        }
    }
    out
}

/// Largest template cost the grammar can produce.
const MAX_COST: usize = 3 + 2 + 3 * 6;

#[derive(Debug, Clone, Default)]
pub struct SearchOutcome {
    pub families: Vec<ConjugatorFamily>,
    /// Number of templates whose limit was computed.
    pub evaluated: usize,
}

/// Searches conjugator templates by increasing cost and returns every family
/// whose limit equals the target, cheapest first. At most `budget`
/// templates are evaluated.
pub fn propose_conjugators(
    cat: &Catalog,
    source: &InstanceRef,
    target: &InstanceRef,
    budget: usize,
) -> SearchOutcome {
    let (Ok(s), Ok(t)) = (cat.instantiate_ref(source), cat.instantiate_ref(target)) else {
        return SearchOutcome::default();
    };
    if s.dim() != t.dim() {
        return SearchOutcome::default();
    }
    let (ns, nt) = (
        crate::lie::normalizer(s.basis()).dim(),
        crate::lie::normalizer(t.basis()).dim(),
    );
    if nt < ns {
        return SearchOutcome::default();
    }
    search_templates(&s, &t, budget)
}

/// Cheap necessary test: at `n = 10^4` the orbit point, written in the
/// affine chart of the Grassmannian around the target, must already be
/// close to the target's chart coordinates.
fn near_at_large_n(s: &Subalgebra, tpl: &Template, t: &TargetChart) -> bool {
    let (g, g_inv) = tpl.at(&Rat::from_integer(10_000.into()));
    let rows: Vec<Vec<Rat>> = s
        .mats()
        .iter()
        .map(|x| x.conjugate_by(&g, &g_inv).coords().to_vec())
        .collect();
    let square: Vec<Vec<Rat>> = rows
        .iter()
        .map(|r| t.pivots.iter().map(|&c| r[c].clone()).collect())
        .collect();
    let Some(inv) = linalg::inverse(&square) else {
        return false;
    };
    let tol = Rat::new(1.into(), 10.into());
    let chart = linalg::mat_mul(&inv, &rows);
    chart.iter().zip(&t.rows).all(|(a, b)| {
        a.iter()
            .zip(b)
            .all(|(x, y)| crate::exact::abs(&(x - y)) < tol)
    })
}

struct TargetChart {
    rows: Vec<Vec<Rat>>,
    pivots: Vec<usize>,
}

impl TargetChart {
    fn new(t: &Subalgebra) -> Self {
        let rows = t.rows().to_vec();
        let pivots = rows
            .iter()
            .map(|r| {
                r.iter()
                    .position(|x| !Field::is_zero(x))
                    .expect("canonical rows are nonzero")
            })
            .collect();
        TargetChart { rows, pivots }
    }
}

pub(crate) fn search_templates(s: &Subalgebra, t: &Subalgebra, budget: usize) -> SearchOutcome {
    let chart = TargetChart::new(t);
    let mut evaluated = 0;
    let mut families = Vec::new();
    for w in 0..=MAX_COST {
        if evaluated >= budget {
            break;
        }
        let mut layer = templates_of_cost(w);
        layer.truncate(budget - evaluated);
        evaluated += layer.len();
        let hits: Vec<ConjugatorFamily> = layer
            .par_iter()
            .filter_map(|tpl| {
                if !near_at_large_n(s, tpl, &chart) {
                    return None;
                }
                let f = ConjugatorFamily::new(None, tpl.conjugator(), None, "derived").ok()?;
                let out = family_limit(s, &f).ok()?;
                (out.limit == *t).then_some(f)
            })
            .collect();
        families.extend(hits);
    }
    SearchOutcome {
        families,
        evaluated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;

    type M = Mat<Rat>;

    fn family(rows: [[&str; 3]; 3]) -> ConjugatorFamily {
        let g = rows.map(|r| r.map(String::from));
        ConjugatorFamily::from_text(None, &g, None, "test", &ParamAssignment::new()).unwrap()
    }

    fn span(m: &[M]) -> Subalgebra {
        Subalgebra::from_mats(m).unwrap()
    }

    fn rf(s: &str) -> RatFunc {
        parse_expr(s, &ParamAssignment::new()).unwrap()
    }

    #[test]
    fn ad_family_weight_scaling() {
        let w15 = span(&[M::unit(1, 2).add(&M::unit(2, 3))]);
        let f = family([["1/n", "0", "0"], ["0", "1/n", "0"], ["0", "0", "n^2"]]);
        let rows = ad_family(&w15, &f);
        let mut want = vec![RatFunc::zero(); 8];
        want[2] = RatFunc::one();
        want[4] = rf("1/n^3");
        assert_eq!(rows, vec![want]);
    }

    #[test]
    fn shear_flow_on_w312() {
        let h = M::diag([int(1), int(-1), int(0)]);
        let w312 = [M::unit(1, 2), M::unit(2, 1), h.clone()];
        let f = family([["1", "0", "n"], ["0", "1", "0"], ["0", "0", "1"]]);
        let rows = ad_family(&span(&w312), &f);
        let lim = limit_subspace(&rows).unwrap().limit;
        assert_eq!(lim, span(&[M::unit(1, 2), M::unit(1, 3), M::unit(2, 3)]));
        // Elementwise images, independent of the canonical basis.
        let n = Mat::<RatFunc>::from_fn(|i, j| {
            if (i, j) == (0, 2) {
                RatFunc::var()
            } else {
                RatFunc::zero()
            }
        });
        let g = Mat::<RatFunc>::identity().add(&n);
        let g_inv = Mat::<RatFunc>::identity().sub(&n);
        assert_eq!(
            M::unit(2, 1).lift().conjugate_by(&g, &g_inv),
            M::unit(2, 1)
                .lift()
                .sub(&M::unit(2, 3).lift().scale(&RatFunc::var()))
        );
        assert_eq!(
            h.lift().conjugate_by(&g, &g_inv),
            h.lift().sub(&M::unit(1, 3).lift().scale(&RatFunc::var()))
        );
    }

    #[test]
    fn rotation_to_w23() {
        let w21 = span(&[
            M::diag([int(1), int(1), int(-2)]),
            M::unit(1, 2).sub(&M::unit(2, 1)),
        ]);
        let f = family([["n", "0", "0"], ["0", "1", "0"], ["0", "0", "1/n"]]);
        let lim = family_limit(&w21, &f).unwrap().limit;
        assert_eq!(
            lim,
            span(&[M::diag([int(1), int(1), int(-2)]), M::unit(1, 2)])
        );
    }

    #[test]
    fn rejects_nonconstant_determinant() {
        let g = [["n", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]].map(|r| r.map(String::from));
        let err = ConjugatorFamily::from_text(None, &g, None, "x", &ParamAssignment::new());
        assert!(matches!(err, Err(LimitError::BadDeterminant(_))));
    }

    #[test]
    fn transposed_family_maps_transposed_limits() {
        let w26 = span(&[M::unit(1, 2).add(&M::unit(2, 3)), M::unit(1, 3)]);
        let f = family([["n", "0", "0"], ["0", "1/n^2", "0"], ["0", "0", "n"]]);
        let lim = family_limit(&w26, &f).unwrap().limit;
        assert_eq!(lim, span(&[M::unit(1, 2), M::unit(1, 3)]));
        let ft = f.transposed();
        let w26t = span(&w26.mats().iter().map(sigma).collect::<Vec<_>>());
        assert_eq!(w26t, w26);
        let lim_t = family_limit(&w26t, &ft).unwrap().limit;
        assert_eq!(lim_t, span(&[M::unit(2, 3), M::unit(1, 3)]));
    }

    #[test]
    fn serde_round_trip() {
        let f = family([["n", "0", "9/(1-n^3)"], ["0", "1", "0"], ["0", "0", "1/n"]]);
        let text = serde_json::to_string(&f).unwrap();
        let back: ConjugatorFamily = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
    }

    fn assert_found(s: &Subalgebra, t: &Subalgebra, budget: usize, g: [[&str; 3]; 3]) {
        let want = family(g).g;
        let out = search_templates(s, t, budget);
        for f in &out.families {
            assert_eq!(family_limit(s, f).unwrap().limit, *t);
        }
        assert!(
            out.families.iter().any(|f| f.g == want),
            "{} hits",
            out.families.len()
        );
    }

    #[test]
    fn search_finds_shear_product() {
        let w23 = span(&[M::diag([int(1), int(1), int(-2)]), M::unit(1, 2)]);
        let w26 = span(&[M::unit(1, 2).add(&M::unit(2, 3)), M::unit(1, 3)]);
        assert_found(
            &w23,
            &w26,
            12_000,
            [["1", "n", "n^2"], ["0", "1", "n"], ["0", "0", "1"]],
        );
    }

    #[test]
    fn search_finds_weight_scalings() {
        let w26 = span(&[M::unit(1, 2).add(&M::unit(2, 3)), M::unit(1, 3)]);
        let w24 = span(&[M::unit(1, 2), M::unit(1, 3)]);
        assert_found(
            &w26,
            &w24,
            500,
            [["n", "0", "0"], ["0", "1/n^2", "0"], ["0", "0", "n"]],
        );
        let so3 = span(&[
            M::unit(1, 2).sub(&M::unit(2, 1)),
            M::unit(1, 3).sub(&M::unit(3, 1)),
            M::unit(2, 3).sub(&M::unit(3, 2)),
        ]);
        let w38i = span(&[
            M::unit(1, 2).sub(&M::unit(2, 1)),
            M::unit(1, 3),
            M::unit(2, 3),
        ]);
        assert_found(
            &so3,
            &w38i,
            500,
            [["n", "0", "0"], ["0", "n", "0"], ["0", "0", "1/n^2"]],
        );
    }
}
