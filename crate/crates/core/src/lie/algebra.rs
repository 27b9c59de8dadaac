use thiserror::Error;

use super::Mat;
use crate::exact::{Field, Rat};
use crate::linalg;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LieError {
    #[error("basis elements are linearly dependent")]
    Dependent,
    #[error("basis element {0} is not traceless")]
    NotTraceless(usize),
    #[error("basis element {0} is not upper triangular")]
    NotTriangular(usize),
}

/// An ordered list of independent traceless matrices together with their
/// coordinate rows in the fixed basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    mats: Vec<Mat<Rat>>,
    coords: Vec<Vec<Rat>>,
}

impl Basis {
    pub fn new(mats: Vec<Mat<Rat>>) -> Result<Self, LieError> {
        if let Some(i) = mats.iter().position(|m| !m.trace().is_zero()) {
            return Err(LieError::NotTraceless(i));
        }
        let coords: Vec<Vec<Rat>> = mats.iter().map(|m| m.coords().to_vec()).collect();
        if !coords.is_empty() && linalg::rank(&coords) != coords.len() {
            return Err(LieError::Dependent);
        }
        Ok(Basis { mats, coords })
    }

    /// Builds a basis from coordinate rows that are known to be independent.
    pub fn from_coord_rows(rows: Vec<Vec<Rat>>) -> Self {
        let mats = rows.iter().map(|r| Mat::from_coords(r)).collect();
        Basis { mats, coords: rows }
    }

    /// Span of arbitrary elements, dropping dependencies.
    pub fn span_of(mats: &[Mat<Rat>]) -> Self {
        let rows: Vec<Vec<Rat>> = mats.iter().map(|m| m.coords().to_vec()).collect();
        if rows.is_empty() {
            return Basis::from_coord_rows(Vec::new());
        }
        Basis::from_coord_rows(linalg::rref(&rows).0)
    }

    pub fn dim(&self) -> usize {
        self.mats.len()
    }

    pub fn mats(&self) -> &[Mat<Rat>] {
        &self.mats
    }

    pub fn coords(&self) -> &[Vec<Rat>] {
        &self.coords
    }

    pub fn contains(&self, x: &Mat<Rat>) -> bool {
        let v = x.coords();
        if self.coords.is_empty() {
            return v.iter().all(Field::is_zero);
        }
        linalg::solve_in_span(&self.coords, &v).is_some()
    }

    /// Coefficients of `x` in this basis, `None` when outside the span.
    pub fn coefficients(&self, x: &Mat<Rat>) -> Option<Vec<Rat>> {
        linalg::solve_in_span(&self.coords, &x.coords())
    }

    /// `sum c_i b_i`.
    pub fn element(&self, c: &[Rat]) -> Mat<Rat> {
        self.mats.iter().zip(c).fold(Mat::zero(), |acc, (m, ci)| {
            if ci.is_zero() {
                acc
            } else {
                acc.add(&m.scale(ci))
            }
        })
    }
}

pub fn is_subalgebra(s: &Basis) -> bool {
    let m = s.mats();
    (0..m.len()).all(|i| (i + 1..m.len()).all(|j| s.contains(&m[i].bracket(&m[j]))))
}

pub fn is_abelian(s: &Basis) -> bool {
    let m = s.mats();
    (0..m.len()).all(|i| (i + 1..m.len()).all(|j| m[i].bracket(&m[j]).is_zero()))
}

/// `{X in sl3 : [X, b] in span(S) for every basis element b}`, by one linear solve
/// in the eight coordinates of `X`.
pub fn normalizer(s: &Basis) -> Basis {
    let unit: Vec<Mat<Rat>> = (0..8)
        .map(|k| {
            let mut c = vec![Rat::zero(); 8];
            c[k] = Rat::one();
            Mat::from_coords(&c)
        })
        .collect();
    // Functionals vanishing on span(S).
    let annihilator = if s.dim() == 0 {
        unit.iter().map(|m| m.coords().to_vec()).collect()
    } else {
        linalg::kernel(s.coords(), 8)
    };
    let mut rows = Vec::new();
    for b in s.mats() {
        let images: Vec<[Rat; 8]> = unit.iter().map(|u| u.bracket(b).coords()).collect();
        for w in &annihilator {
            rows.push(
                images
                    .iter()
                    .map(|img| {
                        img.iter()
                            .zip(w)
                            .fold(Rat::zero(), |acc, (x, y)| acc + x * y)
                    })
                    .collect::<Vec<Rat>>(),
            );
        }
    }
    let ker = if rows.is_empty() {
        unit.iter().map(|m| m.coords().to_vec()).collect()
    } else {
        linalg::kernel(&rows, 8)
    };
    let ker = if ker.is_empty() {
        ker
    } else {
        linalg::rref(&ker).0
    };
    Basis::from_coord_rows(ker)
}

/// `[S, S]`.
pub fn derived_algebra(s: &Basis) -> Basis {
    let m = s.mats();
    let mut brackets = Vec::new();
    for i in 0..m.len() {
        for j in i + 1..m.len() {
            let b = m[i].bracket(&m[j]);
            if !b.is_zero() {
                brackets.push(b);
            }
        }
    }
    Basis::span_of(&brackets)
}

/// Dimensions of the derived series, stopping at zero or at the first repeat.
pub fn derived_series(s: &Basis) -> Vec<usize> {
    let mut dims = vec![s.dim()];
    let mut cur = s.clone();
    while cur.dim() > 0 {
        let next = derived_algebra(&cur);
        let d = next.dim();
        dims.push(d);
        if d == cur.dim() {
            break;
        }
        cur = next;
    }
    dims
}

/// `(dim of the common kernel, dim of the sum of images)` of a set of
/// matrices acting on R^3. Both numbers are invariant under conjugation.
pub fn kernel_image_profile(s: &Basis) -> (usize, usize) {
    if s.dim() == 0 {
        return (3, 0);
    }
    let stacked: Vec<Vec<Rat>> = s.mats().iter().flat_map(|m| m.rows()).collect();
    let common_kernel = 3 - linalg::rank(&stacked);
    let transposed: Vec<Vec<Rat>> = s.mats().iter().flat_map(|m| m.transpose().rows()).collect();
    let image = linalg::rank(&transposed);
    (common_kernel, image)
}

/// Traces of `S` on the layers of the invariant flag `0 < I <= K < R^3`, where
/// `I` is the sum of images and `K` the common kernel of `[S, S]`.
///
/// Defined when `[S, S]` is nonzero with `I` inside `K`. Returns the layer
/// dimensions (empty layers dropped) and the reduced span of the trace
/// vectors of the elements of `S`. Conjugation preserves both.
pub fn layer_traces(s: &Basis) -> Option<(Vec<usize>, Vec<Vec<Rat>>)> {
    let d = derived_algebra(s);
    if d.dim() == 0 {
        return None;
    }
    let stacked: Vec<Vec<Rat>> = d.mats().iter().flat_map(|m| m.rows()).collect();
    let kernel = linalg::kernel(&stacked, 3);
    let columns: Vec<Vec<Rat>> = d.mats().iter().flat_map(|m| m.transpose().rows()).collect();
    let image = linalg::rref(&columns).0;
    if image
        .iter()
        .any(|v| linalg::solve_in_span(&kernel, v).is_none())
    {
        return None;
    }
    // Adapted basis: I, then K, then R^3, extended greedily.
    let mut adapted: Vec<Vec<Rat>> = Vec::new();
    let mut dims = Vec::new();
    let standard = (0..3).map(|i| {
        (0..3)
            .map(|j| if i == j { Rat::one() } else { Rat::zero() })
            .collect()
    });
    let candidates: Vec<Vec<Vec<Rat>>> = vec![image.clone(), kernel.clone(), standard.collect()];
    for layer in candidates {
        let before = adapted.len();
        for v in layer {
            let mut trial = adapted.clone();
            trial.push(v.clone());
            if linalg::rank(&trial) == trial.len() {
                adapted = trial;
            }
        }
        if adapted.len() > before {
            dims.push(adapted.len() - before);
        }
    }
    let p = Mat::from_fn(|i, j| adapted[j][i].clone());
    let p_inv = p.inverse().expect("adapted basis is independent");
    let traces: Vec<Vec<Rat>> = s
        .mats()
        .iter()
        .map(|x| {
            let y = p_inv.mul(x).mul(&p);
            let mut start = 0;
            dims.iter()
                .map(|&k| {
                    let t = (start..start + k).fold(Rat::zero(), |acc, i| acc + y.get(i, i));
                    start += k;
                    t
                })
                .collect()
        })
        .collect();
    let span = linalg::rref(&traces).0;
    Some((dims, span))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;

    type M = Mat<Rat>;

    fn span(mats: Vec<M>) -> Basis {
        Basis::new(mats).unwrap()
    }

    fn h1() -> M {
        M::unit(1, 1).sub(&M::unit(2, 2))
    }

    fn heisenberg() -> Basis {
        span(vec![M::unit(1, 2), M::unit(1, 3), M::unit(2, 3)])
    }

    #[test]
    fn subalgebra_examples() {
        assert!(!is_subalgebra(&span(vec![M::unit(1, 2), M::unit(2, 3)])));
        assert!(is_subalgebra(&heisenberg()));
        assert!(is_subalgebra(&span(vec![M::diag([
            int(1),
            int(2),
            int(-3)
        ])])));
    }

    #[test]
    fn basis_rejects_bad_input() {
        assert_eq!(
            Basis::new(vec![M::unit(1, 1)]),
            Err(LieError::NotTraceless(0))
        );
        assert_eq!(
            Basis::new(vec![M::unit(1, 2), M::unit(1, 2).scale(&int(2))]),
            Err(LieError::Dependent)
        );
    }

    #[test]
    fn normalizer_examples() {
        let n = normalizer(&span(vec![M::unit(1, 2)]));
        assert_eq!(n.dim(), 5);
        let h2 = M::unit(2, 2).sub(&M::unit(3, 3));
        for x in [h1(), h2, M::unit(1, 2), M::unit(1, 3), M::unit(3, 2)] {
            assert!(n.contains(&x), "{x}");
        }
        assert_eq!(
            normalizer(&span(vec![M::unit(1, 2).add(&M::unit(2, 3))])).dim(),
            3
        );
        let cartan = span(vec![h1(), M::unit(2, 2).sub(&M::unit(3, 3))]);
        assert_eq!(normalizer(&cartan).dim(), 2);
    }

    #[test]
    fn derived_series_examples() {
        assert_eq!(derived_series(&heisenberg()), vec![3, 1, 0]);
        assert_eq!(
            derived_series(&span(vec![M::unit(1, 3), M::unit(2, 3)])),
            vec![2, 0]
        );
        let sl2 = span(vec![M::unit(1, 2), M::unit(2, 1), h1()]);
        assert_eq!(derived_series(&sl2), vec![3, 3]);
    }

    #[test]
    fn abelian_examples() {
        let w21 = span(vec![
            M::diag([int(1), int(1), int(-2)]),
            M::unit(1, 2).sub(&M::unit(2, 1)),
        ]);
        assert!(is_abelian(&w21));
        assert!(!is_abelian(&heisenberg()));
        assert!(is_abelian(&span(vec![M::unit(3, 1)])));
    }

    #[test]
    fn profiles_distinguish_transposed_pairs() {
        assert_eq!(
            kernel_image_profile(&span(vec![M::unit(1, 2), M::unit(1, 3)])),
            (1, 1)
        );
        assert_eq!(
            kernel_image_profile(&span(vec![M::unit(1, 3), M::unit(2, 3)])),
            (2, 2)
        );
    }
}
