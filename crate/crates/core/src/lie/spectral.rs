//! Characteristic polynomial data of traceless matrices and of subalgebras.
//!
//! For traceless `X`, `det(xI - X) = x^3 + p x - q` with `p = -tr(X^2)/2`
//! and `q = det X`. The discriminant `-4p^3 - 27q^2` is positive for three
//! distinct real eigenvalues, zero for a repeated one and negative for a
//! complex pair.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::{Basis, LieError, Mat};
use crate::exact::{int, Field, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharData {
    #[serde(with = "crate::exact::serde_rat")]
    pub p: Rat,
    #[serde(with = "crate::exact::serde_rat")]
    pub q: Rat,
    #[serde(with = "crate::exact::serde_rat")]
    pub disc: Rat,
}

pub fn char_data(x: &Mat<Rat>) -> CharData {
    let p = -x.mul(x).trace() / int(2);
    let q = x.det();
    let disc = discriminant(&p, &q);
    CharData { p, q, disc }
}

pub fn discriminant(p: &Rat, q: &Rat) -> Rat {
    -(int(4) * p * p * p) - int(27) * q * q
}

/// Integer grid points of `[-r, r]^k` ordered by L1 norm, then preferring
/// zeros and small positive entries coordinatewise.
fn grid(k: usize, lo: i64, hi: i64) -> Arc<Vec<Vec<i64>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, i64, i64), Arc<Vec<Vec<i64>>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(g) = cache.lock().unwrap().get(&(k, lo, hi)) {
        return g.clone();
    }
    let mut pts: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..k {
        pts = pts
            .into_iter()
            .flat_map(|p| {
                (lo..=hi).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    let rank = |v: i64| if v > 0 { 2 * v - 1 } else { -2 * v };
    pts.sort_by(|a, b| {
        let la: i64 = a.iter().map(|v| v.abs()).sum();
        let lb: i64 = b.iter().map(|v| v.abs()).sum();
        la.cmp(&lb)
            .then_with(|| a.iter().map(|&v| rank(v)).cmp(b.iter().map(|&v| rank(v))))
    });
    let g = Arc::new(pts);
    cache.lock().unwrap().insert((k, lo, hi), g.clone());
    g
}

/// Evaluates char data over integer combinations of a basis, in machine
/// integers when the basis has been cleared of denominators.
struct GridEval {
    scaled: Vec<Mat<Rat>>,
    ints: Vec<[[i128; 3]; 3]>,
}

impl GridEval {
    fn new(s: &Basis) -> Self {
        let scaled: Vec<Mat<Rat>> = s
            .mats()
            .iter()
            .map(|m| {
                let l =
                    m.0.iter()
                        .flatten()
                        .fold(BigInt::from(1), |acc, x| acc.lcm(x.denom()));
                m.scale(&Rat::from_integer(l))
            })
            .collect();
        let ints = scaled
            .iter()
            .map(|m| {
                let mut a = [[0i128; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        a[i][j] = m.0[i][j].numer().to_i128().unwrap_or(i128::MAX / 4);
                    }
                }
                a
            })
            .collect();
        GridEval { scaled, ints }
    }

    fn element(&self, c: &[i64]) -> Mat<Rat> {
        self.scaled
            .iter()
            .zip(c)
            .fold(Mat::zero(), |acc, (m, &ci)| {
                if ci == 0 {
                    acc
                } else {
                    acc.add(&m.scale(&int(ci)))
                }
            })
    }

    /// Sign of the discriminant of `sum c_i b_i`.
    fn disc_sign(&self, c: &[i64]) -> Ordering {
        self.disc_sign_int(c).unwrap_or_else(|| {
            let d = char_data(&self.element(c)).disc;
            d.cmp(&Rat::zero())
        })
    }

    fn disc_sign_int(&self, c: &[i64]) -> Option<Ordering> {
        let mut x = [[0i128; 3]; 3];
        for (m, &ci) in self.ints.iter().zip(c) {
            if ci == 0 {
                continue;
            }
            for i in 0..3 {
                for j in 0..3 {
                    x[i][j] = x[i][j].checked_add(m[i][j].checked_mul(ci as i128)?)?;
                }
            }
        }
        // 2p = -tr(X^2); sign(disc) = sign(-(2p)^3 - 54 q^2)
        let mut tr2: i128 = 0;
        for i in 0..3 {
            for j in 0..3 {
                tr2 = tr2.checked_add(x[i][j].checked_mul(x[j][i])?)?;
            }
        }
        let p2 = -tr2;
        let det = {
            let m = |a: usize, b: usize, c: usize, d: usize| -> Option<i128> {
                x[a][c]
                    .checked_mul(x[b][d])?
                    .checked_sub(x[a][d].checked_mul(x[b][c])?)
            };
            x[0][0]
                .checked_mul(m(1, 2, 1, 2)?)?
                .checked_sub(x[0][1].checked_mul(m(1, 2, 0, 2)?)?)?
                .checked_add(x[0][2].checked_mul(m(1, 2, 0, 1)?)?)?
        };
        let val = p2
            .checked_mul(p2)?
            .checked_mul(p2)?
            .checked_neg()?
            .checked_sub(det.checked_mul(det)?.checked_mul(54)?)?;
        Some(val.cmp(&0))
    }

    fn is_nilpotent_at(&self, c: &[i64]) -> bool {
        let d = char_data(&self.element(c));
        d.p.is_zero() && d.q.is_zero()
    }
}

/// True iff `p` and `q` vanish identically on `S`. Decided on the grid
/// `{0,1,2,3}^k`, which is enough since both are polynomials of degree at
/// most three in each coordinate.
pub fn all_nilpotent(s: &Basis) -> bool {
    let eval = GridEval::new(s);
    grid(s.dim(), 0, 3).iter().all(|c| eval.is_nilpotent_at(c))
}

/// First element on the integer grid of the given radius with negative
/// discriminant. Sound but not complete.
pub fn complex_spectrum_witness(s: &Basis, radius: i64) -> Option<Mat<Rat>> {
    let eval = GridEval::new(s);
    grid(s.dim(), -radius, radius)
        .iter()
        .find(|c| eval.disc_sign(c) == Ordering::Less)
        .map(|c| eval.element(c))
}

/// Grid search for elements with negative and with positive discriminant.
pub(crate) fn discriminant_signs(s: &Basis, radius: i64) -> (bool, bool) {
    let eval = GridEval::new(s);
    let (mut neg, mut pos) = (false, false);
    for c in grid(s.dim(), -radius, radius).iter() {
        match eval.disc_sign(c) {
            Ordering::Less => neg = true,
            Ordering::Greater => pos = true,
            Ordering::Equal => {}
        }
        if neg && pos {
            break;
        }
    }
    (neg, pos)
}

/// A basis of `S` orthogonal for the trace form `tr(XY)`, with the value
/// `tr(X^2)` of each vector. Vectors in the radical of the form come last
/// with value zero.
pub(crate) fn trace_form_directions(s: &Basis) -> Vec<(Mat<Rat>, Rat)> {
    let form = |x: &Mat<Rat>, y: &Mat<Rat>| x.mul(y).trace();
    let mut rest: Vec<Mat<Rat>> = s.mats().to_vec();
    let mut out = Vec::new();
    while !rest.is_empty() {
        let pivot = (0..rest.len())
            .find(|&i| !form(&rest[i], &rest[i]).is_zero())
            .or_else(|| {
                // Isotropic vectors only: a pair with nonzero pairing gives a
                // non-isotropic sum.
                let (i, j) = (0..rest.len())
                    .flat_map(|i| (i + 1..rest.len()).map(move |j| (i, j)))
                    .find(|&(i, j)| !form(&rest[i], &rest[j]).is_zero())?;
                rest[i] = rest[i].add(&rest[j]);
                Some(i)
            });
        let Some(p) = pivot else {
            out.extend(rest.drain(..).map(|x| (x, Rat::zero())));
            break;
        };
        let v = rest.remove(p);
        let q = form(&v, &v);
        for x in rest.iter_mut() {
            let c = form(x, &v) / &q;
            if !c.is_zero() {
                *x = x.sub(&v.scale(&c));
            }
        }
        out.push((v, q));
    }
    out
}

/// Elements on the grid of radius `radius`, in search order, skipping zero.
pub(crate) fn grid_elements(s: &Basis, radius: i64) -> impl Iterator<Item = Mat<Rat>> + '_ {
    let eval = GridEval::new(s);
    let pts = grid(s.dim(), -radius, radius);
    (0..pts.len())
        .filter(move |&i| pts[i].iter().any(|&v| v != 0))
        .map(move |i| eval.element(&grid(s.dim(), -radius, radius)[i]))
}

/// For a triangular `S` whose diagonal projection is at most a line, the
/// primitive integer weight triple spanning it (first nonzero entry positive),
/// or `(0,0,0)` when every element is nilpotent.
pub fn diag_weight_line(s: &Basis) -> Result<Option<[Rat; 3]>, LieError> {
    if let Some(i) = s.mats().iter().position(|m| !m.is_upper_triangular()) {
        return Err(LieError::NotTriangular(i));
    }
    let diags: Vec<Vec<Rat>> = s
        .mats()
        .iter()
        .map(|m| (0..3).map(|i| m.0[i][i].clone()).collect())
        .collect();
    let nonzero: Vec<&Vec<Rat>> = diags
        .iter()
        .filter(|d| d.iter().any(|x| !x.is_zero()))
        .collect();
    let Some(first) = nonzero.first() else {
        return Ok(Some([Rat::zero(), Rat::zero(), Rat::zero()]));
    };
    if crate::linalg::rank(&diags) > 1 {
        return Ok(None);
    }
    Ok(Some(primitive_triple(first)))
}

pub(crate) fn primitive_triple(v: &[Rat]) -> [Rat; 3] {
    let l = v.iter().fold(BigInt::from(1), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v
        .iter()
        .map(|x| (x * Rat::from_integer(l.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::from(0), |acc, x| acc.gcd(x));
    let zero = BigInt::from(0);
    let sign = if ints
        .iter()
        .find(|x| **x != zero)
        .is_some_and(|x| x.is_negative())
    {
        BigInt::from(-1)
    } else {
        BigInt::from(1)
    };
    let g = if g == zero { BigInt::from(1) } else { g * sign };
    [0, 1, 2].map(|i| Rat::from_integer(&ints[i] / &g))
}

/// The characteristic coefficient functions of a subalgebra as exact
/// polynomials in its basis coordinates: `p(c) = c^T Q c`, `q(c) = T(c,c,c)`.
#[derive(Debug, Clone)]
pub struct CharPolys {
    pub quad: Vec<Vec<Rat>>,
    pub cubic: Vec<Vec<Vec<Rat>>>,
}

/// Shape of the closure of `{char(X) : X in S}` in the `(p, q)` plane.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CharImage {
    /// `p` and `q` vanish identically.
    Nilpotent,
    /// `p = alpha l^2`, `q = beta l^3` for a linear form `l` on `S`; the image is
    /// the curve `t -> (alpha t^2, beta t^3)`.
    Curve {
        #[serde(with = "crate::exact::serde_rat")]
        alpha: Rat,
        #[serde(with = "crate::exact::serde_rat")]
        beta: Rat,
        #[serde(with = "crate::exact::serde_rat::vec")]
        form: Vec<Rat>,
    },
    /// Anything else.
    Spread,
}

impl CharPolys {
    pub fn new(s: &Basis) -> Self {
        let m = s.mats();
        let k = m.len();
        let half = Rat::new(BigInt::from(1), BigInt::from(2));
        let quad = (0..k)
            .map(|i| (0..k).map(|j| -(m[i].mul(&m[j]).trace() * &half)).collect())
            .collect();
        let mut cubic = vec![vec![vec![Rat::zero(); k]; k]; k];
        let sixth = Rat::new(BigInt::from(1), BigInt::from(6));
        for i in 0..k {
            for j in i..k {
                for l in j..k {
                    let perms = [
                        (i, j, l),
                        (i, l, j),
                        (j, i, l),
                        (j, l, i),
                        (l, i, j),
                        (l, j, i),
                    ];
                    let v = perms.iter().fold(Rat::zero(), |acc, &(a, b, c)| {
                        acc + mixed_det(&m[a], &m[b], &m[c])
                    }) * &sixth;
                    for &(a, b, c) in &perms {
                        cubic[a][b][c] = v.clone();
                    }
                }
            }
        }
        CharPolys { quad, cubic }
    }

    pub fn eval(&self, c: &[Rat]) -> (Rat, Rat) {
        let k = c.len();
        let mut p = Rat::zero();
        let mut q = Rat::zero();
        for i in 0..k {
            for j in 0..k {
                if c[i].is_zero() || c[j].is_zero() {
                    continue;
                }
                let cij = &c[i] * &c[j];
                p += &self.quad[i][j] * &cij;
                for l in 0..k {
                    if !c[l].is_zero() {
                        q += &self.cubic[i][j][l] * &cij * &c[l];
                    }
                }
            }
        }
        (p, q)
    }

    pub fn image(&self) -> CharImage {
        let k = self.quad.len();
        let quad_zero = self.quad.iter().flatten().all(Field::is_zero);
        let cubic_zero = self.cubic.iter().flatten().flatten().all(Field::is_zero);
        if quad_zero && cubic_zero {
            return CharImage::Nilpotent;
        }
        if k == 1 {
            return CharImage::Curve {
                alpha: self.quad[0][0].clone(),
                beta: self.cubic[0][0][0].clone(),
                form: vec![Rat::one()],
            };
        }
        let Some(i) = (0..k).find(|&i| !self.quad[i][i].is_zero()) else {
            return CharImage::Spread;
        };
        let alpha = self.quad[i][i].clone();
        let form: Vec<Rat> = (0..k).map(|j| &self.quad[i][j] / &alpha).collect();
        let beta = self.cubic[i][i][i].clone();
        for a in 0..k {
            for b in 0..k {
                if self.quad[a][b] != &alpha * &form[a] * &form[b] {
                    return CharImage::Spread;
                }
                for c in 0..k {
                    if self.cubic[a][b][c] != &beta * &form[a] * &form[b] * &form[c] {
                        return CharImage::Spread;
                    }
                }
            }
        }
        CharImage::Curve { alpha, beta, form }
    }
}

/// `sum_sigma sgn(sigma) A[0][s0] B[1][s1] C[2][s2]`, so that
/// `det(X) = sum_{ijl} c_i c_j c_l mixed_det(b_i, b_j, b_l)`.
fn mixed_det(a: &Mat<Rat>, b: &Mat<Rat>, c: &Mat<Rat>) -> Rat {
    const PERMS: [([usize; 3], i64); 6] = [
        ([0, 1, 2], 1),
        ([1, 2, 0], 1),
        ([2, 0, 1], 1),
        ([0, 2, 1], -1),
        ([2, 1, 0], -1),
        ([1, 0, 2], -1),
    ];
    PERMS.iter().fold(Rat::zero(), |acc, (s, sign)| {
        let t = &a.0[0][s[0]] * &b.0[1][s[1]] * &c.0[2][s[2]];
        if *sign > 0 {
            acc + t
        } else {
            acc - t
        }
    })
}

/// Whether `(p, q)` lies on the curve `t -> (alpha t^2, beta t^3)`, `t` real.
pub fn on_char_curve(alpha: &Rat, beta: &Rat, p: &Rat, q: &Rat) -> bool {
    if !alpha.is_zero() {
        if p.is_zero() {
            return q.is_zero();
        }
        let t2 = p / alpha;
        if t2.is_negative() {
            return false;
        }
        if beta.is_zero() {
            return q.is_zero();
        }
        if q.is_zero() {
            return false;
        }
        let t = (q / beta) / &t2;
        &t * &t == t2
    } else if !beta.is_zero() {
        p.is_zero()
    } else {
        p.is_zero() && q.is_zero()
    }
}
