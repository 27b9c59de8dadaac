use std::array;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::exact::{parse_rat, rat_to_string, Field, Rat, RatFunc};

/// Names of the fixed ordered basis of sl3 used for all coordinates.
pub const BASIS_LABELS: [&str; 8] = [
    "E11-E22", "E22-E33", "E12", "E13", "E23", "E21", "E31", "E32",
];

/// Off-diagonal positions in basis order, zero-based `(row, col)`.
const OFF_DIAG: [(usize, usize); 6] = [(0, 1), (0, 2), (1, 2), (1, 0), (2, 0), (2, 1)];

/// A 3x3 matrix over an exact scalar.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mat<T>(pub [[T; 3]; 3]);

impl<T: Field> Mat<T> {
    pub fn from_fn(f: impl Fn(usize, usize) -> T) -> Self {
        Mat(array::from_fn(|i| array::from_fn(|j| f(i, j))))
    }

    pub fn zero() -> Self {
        Self::from_fn(|_, _| T::zero())
    }

    pub fn identity() -> Self {
        Self::from_fn(|i, j| if i == j { T::one() } else { T::zero() })
    }

    /// Elementary matrix `E_ij` with one-based indices.
    pub fn unit(i: usize, j: usize) -> Self {
        Self::from_fn(|r, c| {
            if r + 1 == i && c + 1 == j {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    pub fn diag(d: [T; 3]) -> Self {
        Self::from_fn(|i, j| if i == j { d[i].clone() } else { T::zero() })
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.0[i][j]
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j].plus(&o.0[i][j]))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j].minus(&o.0[i][j]))
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::from_fn(|i, j| self.0[i][j].times(c))
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::from_fn(|i, j| {
            (0..3).fold(T::zero(), |acc, t| {
                let (a, b) = (&self.0[i][t], &o.0[t][j]);
                if a.is_zero() || b.is_zero() {
                    acc
                } else {
                    acc.plus(&a.times(b))
                }
            })
        })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i].clone())
    }

    pub fn trace(&self) -> T {
        self.0[0][0].plus(&self.0[1][1]).plus(&self.0[2][2])
    }

    pub fn det(&self) -> T {
        let m = &self.0;
        let minor = |r1: usize, r2: usize, c1: usize, c2: usize| {
            m[r1][c1]
                .times(&m[r2][c2])
                .minus(&m[r1][c2].times(&m[r2][c1]))
        };
        m[0][0]
            .times(&minor(1, 2, 1, 2))
            .minus(&m[0][1].times(&minor(1, 2, 0, 2)))
            .plus(&m[0][2].times(&minor(1, 2, 0, 1)))
    }

    /// Classical adjugate, so that `m * adj(m) = det(m) I`.
    pub fn adjugate(&self) -> Self {
        let m = &self.0;
        Self::from_fn(|i, j| {
            // cofactor of entry (j, i)
            let rows: Vec<usize> = (0..3).filter(|&r| r != j).collect();
            let cols: Vec<usize> = (0..3).filter(|&c| c != i).collect();
            let v = m[rows[0]][cols[0]]
                .times(&m[rows[1]][cols[1]])
                .minus(&m[rows[0]][cols[1]].times(&m[rows[1]][cols[0]]));
            if (i + j) % 2 == 0 {
                v
            } else {
                v.negated()
            }
        })
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det().recip()?;
        Some(self.adjugate().scale(&d))
    }

    /// `XY - YX`.
    pub fn bracket(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    /// `g X g^{-1}` given both `g` and its inverse.
    pub fn conjugate_by(&self, g: &Self, g_inv: &Self) -> Self {
        g.mul(self).mul(g_inv)
    }

    /// Coordinates in the fixed basis; assumes trace zero.
    pub fn coords(&self) -> [T; 8] {
        let mut out: [T; 8] = array::from_fn(|_| T::zero());
        out[0] = self.0[0][0].clone();
        out[1] = self.0[2][2].negated();
        for (k, &(i, j)) in OFF_DIAG.iter().enumerate() {
            out[k + 2] = self.0[i][j].clone();
        }
        out
    }

    pub fn from_coords(c: &[T]) -> Self {
        let mut m = Self::zero();
        m.0[0][0] = c[0].clone();
        m.0[1][1] = c[1].minus(&c[0]);
        m.0[2][2] = c[1].negated();
        for (k, &(i, j)) in OFF_DIAG.iter().enumerate() {
            m.0[i][j] = c[k + 2].clone();
        }
        m
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.0[1][0].is_zero() && self.0[2][0].is_zero() && self.0[2][1].is_zero()
    }

    pub fn is_lower_triangular(&self) -> bool {
        self.0[0][1].is_zero() && self.0[0][2].is_zero() && self.0[1][2].is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(Field::is_zero)
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.0.iter().map(|r| r.to_vec()).collect()
    }
}

impl Mat<Rat> {
    pub fn lift(&self) -> Mat<RatFunc> {
        Mat::from_fn(|i, j| RatFunc::constant(self.0[i][j].clone()))
    }

    pub fn from_ints(rows: [[i64; 3]; 3]) -> Self {
        Mat::from_fn(|i, j| crate::exact::int(rows[i][j]))
    }
}

impl Mat<RatFunc> {
    /// Exact evaluation at `n = n0`.
    pub fn eval_at(&self, n0: &Rat) -> Result<Mat<Rat>, crate::exact::ExactError> {
        let mut out = Mat::<Rat>::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = self.0[i][j].eval_at(n0)?;
            }
        }
        Ok(out)
    }
}

impl<T: Field> fmt::Display for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .0
            .iter()
            .map(|r| format!("[{}, {}, {}]", r[0], r[1], r[2]))
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

impl Serialize for Mat<Rat> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = self
            .0
            .iter()
            .map(|r| r.iter().map(rat_to_string).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mat<Rat> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<String>> = Vec::deserialize(d)?;
        if rows.len() != 3 || rows.iter().any(|r| r.len() != 3) {
            return Err(serde::de::Error::custom("expected a 3x3 array"));
        }
        let mut m = Mat::<Rat>::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = parse_rat(&rows[i][j]).map_err(serde::de::Error::custom)?;
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;

    type M = Mat<Rat>;

    #[test]
    fn bracket_examples() {
        let h = M::unit(1, 1).sub(&M::unit(2, 2));
        assert_eq!(M::unit(1, 2).bracket(&M::unit(2, 1)), h);
        let x = M::from_ints([[1, 2, 0], [3, -1, 4], [0, 5, 0]]);
        assert!(x.bracket(&x).is_zero());
        let d = M::diag([int(1), int(0), int(-1)]);
        assert_eq!(d.bracket(&M::unit(1, 2)), M::unit(1, 2));
    }

    #[test]
    fn coordinates_round_trip() {
        let x = M::from_ints([[2, 1, 7], [3, 1, -4], [5, 6, -3]]);
        let c = x.coords();
        assert_eq!(c[0], int(2));
        assert_eq!(c[1], int(3));
        assert_eq!(M::from_coords(&c), x);
        assert_eq!(M::from_coords(&M::unit(3, 1).coords()), M::unit(3, 1));
    }

    #[test]
    fn adjugate_inverse() {
        let g = M::from_ints([[1, 2, 0], [0, 1, 3], [1, 0, 1]]);
        let inv = g.inverse().unwrap();
        assert_eq!(g.mul(&inv), M::identity());
        assert_eq!(g.det(), int(7));
    }
}
