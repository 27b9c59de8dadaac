//! Subspaces of sl3 as points of a Grassmannian: canonical forms, the
//! projection distance, and exact limits of one-parameter families.

use std::cmp::Ordering;
use std::hash::{Hash, Hasher};
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::exact::{parse_rat, rat_to_string, AtInfinity, ExactError, Field, Rat, RatFunc};
use crate::lie::{Basis, Mat, BASIS_LABELS};
use crate::linalg;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrassmannError {
    #[error("family is rank deficient: every Plücker coordinate vanishes identically")]
    RankDeficient,
    #[error("lattice reduction did not terminate within {0} steps")]
    ReductionStalled(usize),
    #[error("limit disagrees with the leading Plücker coordinates")]
    PluckerMismatch,
    #[error("rows are linearly dependent")]
    Dependent,
    #[error("family drops rank at n = {0}")]
    DegenerateAt(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// A subspace of sl3 stored as its reduced row echelon coordinate matrix,
/// so that equality of subspaces is equality of values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subalgebra {
    basis: Basis,
}

impl Hash for Subalgebra {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.rows().hash(h);
    }
}

impl Ord for Subalgebra {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rows().cmp(other.rows())
    }
}

impl PartialOrd for Subalgebra {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Subalgebra {
    /// Canonical form of independent coordinate rows.
    pub fn canonicalize(rows: &[Vec<Rat>]) -> Result<Self, GrassmannError> {
        if rows.is_empty() {
            return Ok(Subalgebra {
                basis: Basis::from_coord_rows(Vec::new()),
            });
        }
        let (r, _) = linalg::rref(rows);
        if r.len() < rows.len() {
            return Err(GrassmannError::Dependent);
        }
        Ok(Subalgebra {
            basis: Basis::from_coord_rows(r),
        })
    }

    pub fn from_mats(mats: &[Mat<Rat>]) -> Result<Self, GrassmannError> {
        let rows: Vec<Vec<Rat>> = mats.iter().map(|m| m.coords().to_vec()).collect();
        Self::canonicalize(&rows)
    }

    pub fn from_basis(b: &Basis) -> Self {
        Self::canonicalize(b.coords()).expect("basis rows are independent")
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn rows(&self) -> &[Vec<Rat>] {
        self.basis.coords()
    }

    pub fn mats(&self) -> &[Mat<Rat>] {
        self.basis.mats()
    }

    pub fn contains(&self, x: &Mat<Rat>) -> bool {
        self.basis.contains(x)
    }

    pub fn is_contained_in(&self, other: &Subalgebra) -> bool {
        self.mats().iter().all(|m| other.contains(m))
    }

    /// Image under `X -> g X g^{-1}`.
    pub fn conjugate(&self, g: &Mat<Rat>) -> Option<Subalgebra> {
        let inv = g.inverse()?;
        let mats: Vec<Mat<Rat>> = self
            .mats()
            .iter()
            .map(|m| m.conjugate_by(g, &inv))
            .collect();
        Some(Self::from_mats(&mats).expect("conjugation is injective"))
    }

    /// Readable form such as `span{E12, E13 + 1/2*E23}`.
    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .rows()
            .iter()
            .map(|r| {
                let mut terms = Vec::new();
                for (c, label) in r.iter().zip(BASIS_LABELS) {
                    if c.is_zero() {
                        continue;
                    }
                    let label = if label.contains('-') {
                        format!("({label})")
                    } else {
                        label.to_string()
                    };
                    let term = if c.is_one() {
                        label
                    } else if *c == -Rat::one() {
                        format!("-{label}")
                    } else {
                        format!("{c}*{label}")
                    };
                    terms.push(term);
                }
                terms.join(" + ").replace("+ -", "- ")
            })
            .collect();
        format!("span{{{}}}", parts.join(", "))
    }
}

impl Serialize for Subalgebra {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = self
            .rows()
            .iter()
            .map(|r| r.iter().map(rat_to_string).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Subalgebra {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<String>> = Vec::deserialize(d)?;
        let rows = rows
            .iter()
            .map(|r| {
                if r.len() != 8 {
                    return Err(serde::de::Error::custom("expected 8 coordinates per row"));
                }
                r.iter()
                    .map(|x| parse_rat(x).map_err(serde::de::Error::custom))
                    .collect()
            })
            .collect::<Result<Vec<Vec<Rat>>, _>>()?;
        Subalgebra::canonicalize(&rows).map_err(serde::de::Error::custom)
    }
}

/// Gram matrix of the fixed basis under `<X, Y> = tr(X^T Y)`.
pub fn gram() -> &'static Vec<Vec<Rat>> {
    static G: OnceLock<Vec<Vec<Rat>>> = OnceLock::new();
    G.get_or_init(|| {
        let basis: Vec<Mat<Rat>> = (0..8)
            .map(|k| {
                let mut c = vec![Rat::zero(); 8];
                c[k] = Rat::one();
                Mat::from_coords(&c)
            })
            .collect();
        basis
            .iter()
            .map(|x| basis.iter().map(|y| x.transpose().mul(y).trace()).collect())
            .collect()
    })
}

/// Orthogonal projector onto the span of `b`, as an 8x8 matrix acting on
/// coordinate columns: `A^T (A G A^T)^{-1} A G`.
fn projector(b: &Subalgebra) -> Vec<Vec<Rat>> {
    if b.dim() == 0 {
        return vec![vec![Rat::zero(); 8]; 8];
    }
    let a = b.rows().to_vec();
    let g = gram();
    let ag = linalg::mat_mul(&a, g);
    let aga = linalg::mat_mul(&ag, &linalg::transpose(&a));
    let inv = linalg::inverse(&aga).expect("basis rows are independent");
    linalg::mat_mul(&linalg::mat_mul(&linalg::transpose(&a), &inv), &ag)
}

/// `||P_a - P_b||^2 = dim a + dim b - 2 tr(P_a P_b)`, exact.
pub fn projection_distance_sq(a: &Subalgebra, b: &Subalgebra) -> Rat {
    let pa = projector(a);
    let pb = projector(b);
    let mut tr = Rat::zero();
    for i in 0..8 {
        for j in 0..8 {
            if !pa[i][j].is_zero() && !pb[j][i].is_zero() {
                tr += &pa[i][j] * &pb[j][i];
            }
        }
    }
    Rat::from_integer(((a.dim() + b.dim()) as i64).into()) - tr * Rat::from_integer(2.into())
}

/// Span of the family at a finite parameter value.
pub fn eval_span_at(rows: &[Vec<RatFunc>], n0: &Rat) -> Result<Subalgebra, GrassmannError> {
    let vals = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|f| f.eval_at(n0))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Subalgebra::canonicalize(&vals).map_err(|_| GrassmannError::DegenerateAt(n0.to_string()))
}

#[derive(Debug, Clone)]
pub struct LimitResult {
    pub limit: Subalgebra,
    /// Largest degree in `n` among the Plücker coordinates of the family.
    pub plucker_degree: i64,
    pub reduction_steps: usize,
}

fn row_degree(row: &[RatFunc]) -> Option<i64> {
    row.iter().filter_map(RatFunc::degree).max()
}

/// Coefficient of `n^d` in the expansion at infinity, for `f` of degree at most `d`.
fn coeff_at_degree(f: &RatFunc, d: i64) -> Rat {
    match f.shift(-d).value_at_infinity() {
        AtInfinity::Finite(c) => c,
        AtInfinity::Zero => Rat::zero(),
        AtInfinity::Divergent => unreachable!("degree exceeds the expected bound"),
    }
}

/// Limit as `n -> infinity` of the span of the rows.
///
/// Rows are reduced until their leading coefficient vectors are independent;
/// those vectors then span the limit. The result is checked against the
/// leading Plücker coordinates of the original family, which determine the
/// limit point on their own.
pub fn limit_subspace(rows: &[Vec<RatFunc>]) -> Result<LimitResult, GrassmannError> {
    let k = rows.len();
    if k == 0 {
        return Ok(LimitResult {
            limit: Subalgebra::canonicalize(&[])?,
            plucker_degree: 0,
            reduction_steps: 0,
        });
    }
    let pl = linalg::plucker(rows);
    let top = pl
        .iter()
        .filter_map(RatFunc::degree)
        .max()
        .ok_or(GrassmannError::RankDeficient)?;
    let lead: Vec<Rat> = pl.iter().map(|f| coeff_at_degree(f, top)).collect();

    let mut cur: Vec<Vec<RatFunc>> = rows.to_vec();
    let mut degs: Vec<i64> = Vec::with_capacity(k);
    for r in &cur {
        degs.push(row_degree(r).ok_or(GrassmannError::RankDeficient)?);
    }
    let guard = 10 * (degs.iter().sum::<i64>() - top + 1).max(1) as usize;
    let mut steps = 0;
    loop {
        let leading: Vec<Vec<Rat>> = cur
            .iter()
            .zip(&degs)
            .map(|(r, &d)| r.iter().map(|f| coeff_at_degree(f, d)).collect())
            .collect();
        let dep = linalg::left_kernel(&leading);
        let Some(c) = dep.first() else {
            let minors = linalg::plucker(&leading);
            if !proportional(&minors, &lead) {
                return Err(GrassmannError::PluckerMismatch);
            }
            return Ok(LimitResult {
                limit: Subalgebra::canonicalize(&leading)?,
                plucker_degree: top,
                reduction_steps: steps,
            });
        };
        if steps >= guard {
            return Err(GrassmannError::ReductionStalled(steps));
        }
        steps += 1;
        // Replace the highest-degree row in the dependency by the combination,
        // which cancels its leading term.
        let pivot = (0..k)
            .filter(|&i| !c[i].is_zero())
            .max_by_key(|&i| (degs[i], i))
            .expect("nonzero dependency");
        let mut new_row = vec![RatFunc::zero(); 8];
        for j in (0..k).filter(|&j| !c[j].is_zero()) {
            let f = RatFunc::var_pow((degs[pivot] - degs[j]) as i32).scale(&c[j]);
            for (x, y) in new_row.iter_mut().zip(&cur[j]) {
                if !y.is_zero() {
                    *x = &*x + &(&f * y);
                }
            }
        }
        degs[pivot] = row_degree(&new_row).ok_or(GrassmannError::RankDeficient)?;
        cur[pivot] = new_row;
    }
}

fn proportional(a: &[Rat], b: &[Rat]) -> bool {
    let Some(i) = b.iter().position(|x| !x.is_zero()) else {
        return false;
    };
    if a[i].is_zero() {
        return false;
    }
    let lambda = &a[i] / &b[i];
    a.iter().zip(b).all(|(x, y)| *x == y * &lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, parse_expr, rat, ParamAssignment};

    type M = Mat<Rat>;

    fn rows(entries: &[&[&str]]) -> Vec<Vec<RatFunc>> {
        let none = ParamAssignment::new();
        entries
            .iter()
            .map(|r| r.iter().map(|e| parse_expr(e, &none).unwrap()).collect())
            .collect()
    }

    fn span(mats: &[M]) -> Subalgebra {
        Subalgebra::from_mats(mats).unwrap()
    }

    #[test]
    fn canonical_forms() {
        let a = span(&[M::unit(1, 2).add(&M::unit(1, 3)), M::unit(1, 3)]);
        assert_eq!(a, span(&[M::unit(1, 2), M::unit(1, 3)]));
        assert_eq!(
            span(&[M::unit(1, 2).scale(&int(2))]),
            span(&[M::unit(1, 2)])
        );
        let w26 = [M::unit(1, 2).add(&M::unit(2, 3)), M::unit(1, 3)];
        assert_eq!(span(&w26), span(&[w26[1].clone(), w26[0].clone()]));
        assert_ne!(span(&[M::unit(1, 2)]), span(&[M::unit(2, 1)]));
        assert_eq!(
            Subalgebra::from_mats(&[M::unit(1, 2), M::unit(1, 2)]).unwrap_err(),
            GrassmannError::Dependent
        );
    }

    #[test]
    fn describe_and_serde() {
        let s = span(&[
            M::unit(1, 2).sub(&M::unit(2, 3).scale(&rat(1, 2))),
            M::diag([int(1), int(-1), int(0)]),
        ]);
        assert_eq!(s.describe(), "span{(E11-E22), E12 - 1/2*E23}");
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<Subalgebra>(&json).unwrap(), s);
    }

    #[test]
    fn distance_examples() {
        let a = span(&[M::unit(1, 2)]);
        assert_eq!(projection_distance_sq(&a, &a), int(0));
        assert_eq!(projection_distance_sq(&a, &span(&[M::unit(1, 3)])), int(2));
        assert_eq!(
            projection_distance_sq(&a, &span(&[M::unit(1, 2).add(&M::unit(2, 3))])),
            int(1)
        );
        // H1 and E11-E33 span lines at 60 degrees: 2 sin^2 = 3/2
        let h1 = span(&[M::diag([int(1), int(-1), int(0)])]);
        let h = span(&[M::diag([int(1), int(0), int(-1)])]);
        assert_eq!(projection_distance_sq(&h1, &h), rat(3, 2));
    }

    #[test]
    fn limit_of_weight_scaled_line() {
        let r = rows(&[&["0", "0", "1", "0", "1/n^3", "0", "0", "0"]]);
        let l = limit_subspace(&r).unwrap();
        assert_eq!(l.limit, span(&[M::unit(1, 2)]));
        assert_eq!(l.plucker_degree, 0);
    }

    #[test]
    fn limit_needs_reduction() {
        // span(D - 2n E13, E12 + E23) -> span(E13, E12 + E23)
        let r = rows(&[
            &["1", "1", "0", "-2*n", "0", "0", "0", "0"],
            &["0", "0", "1", "0", "1", "0", "0", "0"],
        ]);
        let l = limit_subspace(&r).unwrap();
        assert_eq!(
            l.limit,
            span(&[M::unit(1, 3), M::unit(1, 2).add(&M::unit(2, 3))])
        );
        // span(E12 + n E13, E23 + n E13) -> span(E13, E12 - E23)
        let r = rows(&[
            &["0", "0", "1", "n", "0", "0", "0", "0"],
            &["0", "0", "0", "n", "1", "0", "0", "0"],
        ]);
        let l = limit_subspace(&r).unwrap();
        assert_eq!(l.reduction_steps, 1);
        assert_eq!(
            l.limit,
            span(&[M::unit(1, 3), M::unit(1, 2).sub(&M::unit(2, 3))])
        );
    }

    #[test]
    fn limit_with_poles() {
        let r = rows(&[&["1/(1-n^3)", "0", "n^2/(n+1)", "0", "0", "0", "0", "0"]]);
        assert_eq!(limit_subspace(&r).unwrap().limit, span(&[M::unit(1, 2)]));
    }

    #[test]
    fn rank_deficient_family() {
        let r = rows(&[
            &["0", "0", "1", "n", "0", "0", "0", "0"],
            &["0", "0", "2", "2*n", "0", "0", "0", "0"],
        ]);
        assert_eq!(
            limit_subspace(&r).unwrap_err(),
            GrassmannError::RankDeficient
        );
    }

    #[test]
    fn evaluation_at_finite_n() {
        let r = rows(&[&["0", "0", "1", "n", "0", "0", "0", "0"]]);
        let b = eval_span_at(&r, &int(2)).unwrap();
        assert!(b.contains(&M::unit(1, 2).add(&M::unit(1, 3).scale(&int(2)))));
        let r = rows(&[&["0", "0", "n-2", "0", "0", "0", "0", "0"]]);
        assert!(matches!(
            eval_span_at(&r, &int(2)),
            Err(GrassmannError::DegenerateAt(_))
        ));
    }
}
