//! Row reduction over any exact [`Field`].

use crate::exact::Field;

/// Reduced row echelon form. Returns the nonzero rows and their pivot columns.
pub fn rref<T: Field>(rows: &[Vec<T>]) -> (Vec<Vec<T>>, Vec<usize>) {
    let mut m: Vec<Vec<T>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip().expect("nonzero pivot");
        if !inv.is_one() {
            m[r] = m[r].iter().map(|x| x.times(&inv)).collect();
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let pivot_row = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x = x.minus(&f.times(y));
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank<T: Field>(rows: &[Vec<T>]) -> usize {
    rref(rows).1.len()
}

/// Basis of `{x : A x = 0}` for `A` given by rows, one vector per free column.
pub fn kernel<T: Field>(rows: &[Vec<T>], ncols: usize) -> Vec<Vec<T>> {
    let (r, pivots) = if rows.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        rref(rows)
    };
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![T::zero(); ncols];
        v[free] = T::one();
        for (row, &pc) in r.iter().zip(&pivots) {
            v[pc] = row[free].negated();
        }
        out.push(v);
    }
    out
}

/// Coefficients `c` with `sum c_i rows[i] = 0`, one vector per dependency.
pub fn left_kernel<T: Field>(rows: &[Vec<T>]) -> Vec<Vec<T>> {
    let ncols = rows.first().map_or(0, Vec::len);
    let transposed: Vec<Vec<T>> = (0..ncols)
        .map(|c| rows.iter().map(|r| r[c].clone()).collect())
        .collect();
    kernel(&transposed, rows.len())
}

/// Solves `sum x_i basis[i] = v`; `None` when `v` is not in the span.
pub fn solve_in_span<T: Field>(basis: &[Vec<T>], v: &[T]) -> Option<Vec<T>> {
    let k = basis.len();
    // Augmented system: columns are basis vectors, last column is v.
    let rows: Vec<Vec<T>> = (0..v.len())
        .map(|c| {
            let mut row: Vec<T> = basis.iter().map(|b| b[c].clone()).collect();
            row.push(v[c].clone());
            row
        })
        .collect();
    let (r, pivots) = rref(&rows);
    if pivots.contains(&k) {
        return None;
    }
    let mut x = vec![T::zero(); k];
    for (row, &pc) in r.iter().zip(&pivots) {
        x[pc] = row[k].clone();
    }
    Some(x)
}

/// Determinant by elimination.
pub fn det<T: Field>(m: &[Vec<T>]) -> T {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = T::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return T::zero();
        };
        if p != c {
            a.swap(p, c);
            d = d.negated();
        }
        d = d.times(&a[c][c]);
        let inv = a[c][c].recip().expect("nonzero pivot");
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].times(&inv);
            let pivot_row = a[c].clone();
            for (x, y) in a[i].iter_mut().zip(&pivot_row).skip(c) {
                *x = x.minus(&f.times(y));
            }
        }
    }
    d
}

pub fn mat_mul<T: Field>(a: &[Vec<T>], b: &[Vec<T>]) -> Vec<Vec<T>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    (0..inner).fold(T::zero(), |acc, t| {
                        if row[t].is_zero() || b[t][j].is_zero() {
                            acc
                        } else {
                            acc.plus(&row[t].times(&b[t][j]))
                        }
                    })
                })
                .collect()
        })
        .collect()
}

pub fn transpose<T: Field>(a: &[Vec<T>]) -> Vec<Vec<T>> {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| a.iter().map(|r| r[j].clone()).collect())
        .collect()
}

/// Inverse by Gauss-Jordan; `None` when singular.
pub fn inverse<T: Field>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let aug: Vec<Vec<T>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { T::one() } else { T::zero() }));
            r
        })
        .collect();
    let (r, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(r.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Maximal minors of a `k x m` matrix, indexed by [`subsets`]`(m, k)`.
pub fn plucker<T: Field>(rows: &[Vec<T>]) -> Vec<T> {
    let k = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    subsets(m, k)
        .into_iter()
        .map(|cols| {
            let sub: Vec<Vec<T>> = rows
                .iter()
                .map(|r| cols.iter().map(|&c| r[c].clone()).collect())
                .collect();
            det(&sub)
        })
        .collect()
}
