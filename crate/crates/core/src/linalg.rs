//! Dense real linear algebra and the support-selection operators used by the
//! pursuit algorithms.
//!
//! Matrices are stored column-major so that selecting a column submatrix is a
//! sequence of contiguous copies. Index sets are 1-based throughout, matching
//! the way supports are reported to users.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Relative threshold on the triangular factor's diagonal below which a
/// column set is treated as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix with {cols} columns is rank deficient (rank < {cols}, {rows} rows)")]
    RankDeficient { rows: usize, cols: usize },
    #[error("index {index} out of range 1..={bound}")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("multiset has {distinct} distinct values, {requested} requested")]
    InsufficientDistinct { distinct: usize, requested: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite entry at position {0}")]
    NonFinite(usize),
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Dense column-major matrix of finite reals.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from column-major entries.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite(pos));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from a slice of rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = vec![0.0; nrows * ncols];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(LinalgError::DimensionMismatch {
                    expected: ncols,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                data[j * nrows + i] = v;
            }
        }
        Matrix::from_col_major(nrows, ncols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Column-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Zero-based column access.
    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "mul_vec dimension mismatch");
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.column(j)) {
                *o += a * xj;
            }
        }
        out
    }

    /// `Aᵀ r`.
    pub fn tr_mul_vec(&self, r: &[f64]) -> Vec<f64> {
        assert_eq!(r.len(), self.rows, "tr_mul_vec dimension mismatch");
        (0..self.cols).map(|j| dot(self.column(j), r)).collect()
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<f64> = (0..self.cols).map(|j| self.get(i, j)).collect();
            write!(f, "{row:?}")?;
        }
        write!(f, "]")
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    sq_norm(v).sqrt()
}

pub fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Sorted set of distinct 1-based indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new() -> Self {
        IndexSet(Vec::new())
    }

    /// Canonicalizes arbitrary 1-based indices: sorts and removes duplicates.
    /// Zero is not a valid index.
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut v: Vec<usize> = indices.into_iter().collect();
        assert!(v.iter().all(|&i| i >= 1), "index sets are 1-based");
        v.sort_unstable();
        v.dedup();
        IndexSet(v)
    }

    /// `{1, ..., n}`.
    pub fn full(n: usize) -> Self {
        IndexSet((1..=n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&x), Some(&&y)) => {
                    if x < y {
                        out.push(x);
                        a.next();
                    } else if y < x {
                        out.push(y);
                        b.next();
                    } else {
                        out.push(x);
                        a.next();
                        b.next();
                    }
                }
                (Some(&&x), None) => {
                    out.push(x);
                    a.next();
                }
                (None, Some(&&y)) => {
                    out.push(y);
                    b.next();
                }
                (None, None) => break,
            }
        }
        IndexSet(out)
    }

    pub fn is_superset(&self, other: &IndexSet) -> bool {
        other.iter().all(|i| self.contains(i))
    }

    pub fn check_bound(&self, bound: usize) -> Result<()> {
        match self.max() {
            Some(index) if index > bound => Err(LinalgError::IndexOutOfRange { index, bound }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, i) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        IndexSet::from_indices(iter)
    }
}

/// Multiset of 1-based indices, e.g. the concatenation of every node's local
/// support estimate.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IndexMultiset(Vec<usize>);

impl IndexMultiset {
    pub fn new(indices: Vec<usize>) -> Self {
        IndexMultiset(indices)
    }

    pub fn from_sets<'a, I: IntoIterator<Item = &'a IndexSet>>(sets: I) -> Self {
        IndexMultiset(sets.into_iter().flat_map(|s| s.iter()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// Householder QR of a tall matrix, kept in compact form.
struct Qr {
    rows: usize,
    cols: usize,
    /// Column-major; upper triangle holds R, below the diagonal the
    /// Householder vectors (with implicit leading entry stored in `vdiag`).
    packed: Vec<f64>,
    vdiag: Vec<f64>,
    rdiag: Vec<f64>,
}

impl Qr {
    fn factor(a: &Matrix) -> Qr {
        let (m, k) = (a.rows, a.cols);
        let mut packed = a.data.clone();
        let mut vdiag = vec![0.0; k];
        let mut rdiag = vec![0.0; k];
        for j in 0..k {
            let col = &packed[j * m..(j + 1) * m];
            let alpha = norm2(&col[j..]);
            if alpha == 0.0 {
                vdiag[j] = 0.0;
                rdiag[j] = 0.0;
                continue;
            }
            let x0 = col[j];
            let beta = if x0 >= 0.0 { -alpha } else { alpha };
            // v = x - beta e1, normalized so that ‖v‖² = 2 for the reflector I - v vᵀ.
            let v0 = x0 - beta;
            let vnorm = (v0 * v0 + sq_norm(&col[j + 1..])).sqrt();
            vdiag[j] = v0 / vnorm;
            for i in j + 1..m {
                packed[j * m + i] /= vnorm;
            }
            let scale = std::f64::consts::SQRT_2;
            vdiag[j] *= scale;
            for i in j + 1..m {
                packed[j * m + i] *= scale;
            }
            rdiag[j] = beta;
            for c in j + 1..k {
                let mut s = vdiag[j] * packed[c * m + j];
                for i in j + 1..m {
                    s += packed[j * m + i] * packed[c * m + i];
                }
                packed[c * m + j] -= s * vdiag[j];
                for i in j + 1..m {
                    packed[c * m + i] -= s * packed[j * m + i];
                }
            }
        }
        Qr {
            rows: m,
            cols: k,
            packed,
            vdiag,
            rdiag,
        }
    }

    fn full_rank(&self) -> bool {
        if self.cols == 0 {
            return true;
        }
        let largest = self.rdiag.iter().fold(0.0f64, |acc, r| acc.max(r.abs()));
        let smallest = self.rdiag.iter().fold(f64::INFINITY, |acc, r| acc.min(r.abs()));
        largest > 0.0 && smallest >= RANK_TOLERANCE * largest
    }

    /// Applies Qᵀ to `y` in place.
    fn apply_qt(&self, y: &mut [f64]) {
        let m = self.rows;
        for j in 0..self.cols {
            if self.vdiag[j] == 0.0 && self.rdiag[j] == 0.0 {
                continue;
            }
            let mut s = self.vdiag[j] * y[j];
            for i in j + 1..m {
                s += self.packed[j * m + i] * y[i];
            }
            y[j] -= s * self.vdiag[j];
            for i in j + 1..m {
                y[i] -= s * self.packed[j * m + i];
            }
        }
    }

    /// Solves R c = (Qᵀy)[..k].
    fn back_substitute(&self, qty: &[f64]) -> Vec<f64> {
        let (m, k) = (self.rows, self.cols);
        let mut c = vec![0.0; k];
        for j in (0..k).rev() {
            let mut s = qty[j];
            for l in j + 1..k {
                s -= self.packed[l * m + j] * c[l];
            }
            c[j] = s / self.rdiag[j];
        }
        c
    }
}

/// Projection coefficients of `y` onto the column space of `a`: the
/// minimizer of ‖y − a c‖₂, computed by Householder QR.
pub fn lstsq(a: &Matrix, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != a.rows {
        return Err(LinalgError::DimensionMismatch {
            expected: a.rows,
            got: y.len(),
        });
    }
    if a.cols > a.rows {
        return Err(LinalgError::RankDeficient {
            rows: a.rows,
            cols: a.cols,
        });
    }
    let qr = Qr::factor(a);
    if !qr.full_rank() {
        return Err(LinalgError::RankDeficient {
            rows: a.rows,
            cols: a.cols,
        });
    }
    let mut qty = y.to_vec();
    qr.apply_qt(&mut qty);
    Ok(qr.back_substitute(&qty))
}

/// Projection residual `y − a·lstsq(a, y)`.
pub fn resid(y: &[f64], a: &Matrix) -> Result<Vec<f64>> {
    let c = lstsq(a, y)?;
    let fit = a.mul_vec(&c);
    Ok(y.iter().zip(&fit).map(|(yi, fi)| yi - fi).collect())
}

/// Indices of the `k` largest-magnitude entries; ties go to the smaller index.
pub fn max_ind(v: &[f64], k: usize) -> IndexSet {
    assert!(k <= v.len(), "max_ind: k = {k} exceeds length {}", v.len());
    let mut order: Vec<usize> = (0..v.len()).collect();
    let by_magnitude = |a: &usize, b: &usize| {
        v[*b]
            .abs()
            .total_cmp(&v[*a].abs())
            .then_with(|| a.cmp(b))
    };
    if k < order.len() && k > 0 {
        order.select_nth_unstable_by(k - 1, by_magnitude);
    }
    order.truncate(k);
    IndexSet::from_indices(order.into_iter().map(|i| i + 1))
}

/// The `k` values with the highest multiplicity; ties go to the smaller index.
pub fn max_occ(m: &IndexMultiset, k: usize) -> Result<IndexSet> {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &i in m.as_slice() {
        *counts.entry(i).or_default() += 1;
    }
    if counts.len() < k {
        return Err(LinalgError::InsufficientDistinct {
            distinct: counts.len(),
            requested: k,
        });
    }
    let mut ranked: Vec<(usize, usize)> = counts.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ranked.into_iter().take(k).map(|(i, _)| i).collect())
}

/// Columns of `a` indexed by `s`, in ascending index order.
pub fn column_submatrix(a: &Matrix, s: &IndexSet) -> Result<Matrix> {
    s.check_bound(a.cols)?;
    let mut data = Vec::with_capacity(a.rows * s.len());
    for j in s.iter() {
        data.extend_from_slice(a.column(j - 1));
    }
    Ok(Matrix {
        rows: a.rows,
        cols: s.len(),
        data,
    })
}

/// Entrywise `|aᵀ r|`.
pub fn correlate(a: &Matrix, r: &[f64]) -> Vec<f64> {
    let mut c = a.tr_mul_vec(r);
    for v in &mut c {
        *v = v.abs();
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lcg_matrix(rows: usize, cols: usize, mut state: u64) -> Matrix {
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let data = (0..rows * cols).map(|_| next()).collect();
        Matrix::from_col_major(rows, cols, data).unwrap()
    }

    /// Normal-equations solve via Gauss-Jordan elimination on AᵀA.
    fn normal_equations(a: &Matrix, y: &[f64]) -> Vec<f64> {
        let k = a.cols();
        let mut g = vec![vec![0.0; k + 1]; k];
        for i in 0..k {
            for j in 0..k {
                g[i][j] = dot(a.column(i), a.column(j));
            }
            g[i][k] = dot(a.column(i), y);
        }
        for p in 0..k {
            let piv = (p..k)
                .max_by(|&x, &z| g[x][p].abs().total_cmp(&g[z][p].abs()))
                .unwrap();
            g.swap(p, piv);
            let d = g[p][p];
            for v in g[p].iter_mut() {
                *v /= d;
            }
            for r in 0..k {
                if r != p {
                    let f = g[r][p];
                    let row_p = g[p].clone();
                    for (v, pv) in g[r].iter_mut().zip(row_p) {
                        *v -= f * pv;
                    }
                }
            }
        }
        g.into_iter().map(|row| row[k]).collect()
    }

    #[test]
    fn lstsq_identity() {
        let a = Matrix::identity(3);
        let c = lstsq(&a, &[1.0, 2.0, 3.0]).unwrap();
        for (ci, ei) in c.iter().zip([1.0, 2.0, 3.0]) {
            assert!((ci - ei).abs() < 1e-14);
        }
    }

    #[test]
    fn lstsq_single_column_average() {
        let a = Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        let c = lstsq(&a, &[2.0, 2.0]).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn lstsq_matches_normal_equations() {
        let a = lcg_matrix(5, 3, 42);
        let y = [0.3, -1.2, 0.8, 2.0, -0.4];
        let qr = lstsq(&a, &y).unwrap();
        let ne = normal_equations(&a, &y);
        for (q, n) in qr.iter().zip(&ne) {
            assert!((q - n).abs() <= 1e-8 * n.abs().max(1.0), "{q} vs {n}");
        }
    }

    #[test]
    fn lstsq_rejects_rank_deficient() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]).unwrap();
        assert!(matches!(
            lstsq(&a, &[1.0, 1.0, 1.0]),
            Err(LinalgError::RankDeficient { .. })
        ));
        let wide = lcg_matrix(2, 3, 1);
        assert!(matches!(
            lstsq(&wide, &[1.0, 1.0]),
            Err(LinalgError::RankDeficient { .. })
        ));
    }

    #[test]
    fn resid_coordinate_projection() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let r = resid(&[3.0, 4.0, 5.0], &a).unwrap();
        for (ri, ei) in r.iter().zip([0.0, 0.0, 5.0]) {
            assert!((ri - ei).abs() < 1e-14);
        }
    }

    #[test]
    fn resid_vanishes_in_span() {
        let a = lcg_matrix(6, 3, 7);
        let y = a.mul_vec(&[1.5, -0.5, 2.0]);
        let r = resid(&y, &a).unwrap();
        assert!(norm2(&r) <= 1e-9 * norm2(&y));
    }

    #[test]
    fn resid_orthogonal_to_columns() {
        let a = lcg_matrix(5, 3, 99);
        let y = [1.0, -2.0, 0.5, 0.25, 3.0];
        let r = resid(&y, &a).unwrap();
        for v in a.tr_mul_vec(&r) {
            assert!(v.abs() < 1e-8);
        }
    }

    #[test]
    fn max_ind_examples() {
        assert_eq!(
            max_ind(&[0.1, -5.0, 2.0, 0.3], 2),
            IndexSet::from_indices([2, 3])
        );
        assert_eq!(max_ind(&[1.0, 1.0, 1.0], 2), IndexSet::from_indices([1, 2]));
        assert_eq!(max_ind(&[3.0, -1.0, 2.0], 3), IndexSet::full(3));
        assert_eq!(max_ind(&[3.0, -1.0, 2.0], 0), IndexSet::new());
    }

    #[test]
    fn max_occ_examples() {
        let m = IndexMultiset::new(vec![1, 1, 2, 3, 3, 3]);
        assert_eq!(max_occ(&m, 2).unwrap(), IndexSet::from_indices([1, 3]));
        let m = IndexMultiset::new(vec![4, 5]);
        assert_eq!(max_occ(&m, 2).unwrap(), IndexSet::from_indices([4, 5]));
        let m = IndexMultiset::new(vec![7, 7, 2, 2, 9]);
        assert_eq!(max_occ(&m, 2).unwrap(), IndexSet::from_indices([2, 7]));
        let m = IndexMultiset::new(vec![4, 4]);
        assert!(matches!(
            max_occ(&m, 2),
            Err(LinalgError::InsufficientDistinct { distinct: 1, requested: 2 })
        ));
    }

    #[test]
    fn column_submatrix_examples() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        let sub = column_submatrix(&a, &IndexSet::from_indices([3, 1])).unwrap();
        assert_eq!(sub, Matrix::from_rows(&[vec![1.0, 3.0], vec![4.0, 6.0]]).unwrap());
        assert_eq!(column_submatrix(&a, &IndexSet::full(3)).unwrap(), a);
        let row = Matrix::from_rows(&[vec![7.0, 8.0, 9.0]]).unwrap();
        let sub = column_submatrix(&row, &IndexSet::from_indices([2])).unwrap();
        assert_eq!(sub.as_slice(), &[8.0]);
        assert!(matches!(
            column_submatrix(&a, &IndexSet::from_indices([4])),
            Err(LinalgError::IndexOutOfRange { index: 4, bound: 3 })
        ));
    }

    #[test]
    fn correlate_examples() {
        assert_eq!(correlate(&Matrix::identity(2), &[-1.0, 2.0]), vec![1.0, 2.0]);
        let a = lcg_matrix(4, 6, 3);
        assert_eq!(correlate(&a, &[0.0; 4]), vec![0.0; 6]);
        let r = [0.5, -1.0, 2.0, 0.1];
        let c = correlate(&a, &r);
        for j in 0..6 {
            let mut naive = 0.0;
            for i in 0..4 {
                naive += a.get(i, j) * r[i];
            }
            assert!((c[j] - naive.abs()).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(
            Matrix::from_col_major(1, 2, vec![1.0, f64::NAN]),
            Err(LinalgError::NonFinite(1))
        ));
    }

    #[test]
    fn union_is_sorted_and_distinct() {
        let a = IndexSet::from_indices([1, 4, 9]);
        let b = IndexSet::from_indices([2, 4, 10]);
        assert_eq!(a.union(&b), IndexSet::from_indices([1, 2, 4, 9, 10]));
    }

    fn tall_matrix() -> impl Strategy<Value = (Matrix, Vec<f64>)> {
        (1usize..6, 0usize..5).prop_flat_map(|(k, extra)| {
            let m = k + extra;
            (
                prop::collection::vec(-3.0f64..3.0, m * k),
                prop::collection::vec(-3.0f64..3.0, m),
            )
                .prop_map(move |(data, y)| (Matrix::from_col_major(m, k, data).unwrap(), y))
        })
    }

    proptest! {
        #[test]
        fn orthogonality_and_decomposition((a, y) in tall_matrix()) {
            let Ok(c) = lstsq(&a, &y) else { return Ok(()); };
            let r = resid(&y, &a).unwrap();
            let bound = 1e-8 * a.frobenius_norm() * norm2(&y);
            for v in a.tr_mul_vec(&r) {
                prop_assert!(v.abs() <= bound.max(1e-300), "{} > {}", v.abs(), bound);
            }
            let fit = a.mul_vec(&c);
            for ((f, ri), yi) in fit.iter().zip(&r).zip(&y) {
                prop_assert!((f + ri - yi).abs() <= 1e-9 * norm2(&y).max(1e-300));
            }
        }

        #[test]
        fn max_ind_permutation_invariant(
            v in prop::collection::vec(-100.0f64..100.0, 1..30),
            seed in any::<u64>(),
            kfrac in 0.0f64..1.0,
        ) {
            let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
            mags.sort_by(f64::total_cmp);
            prop_assume!(mags.windows(2).all(|w| w[0] != w[1]));
            let k = ((v.len() as f64) * kfrac) as usize;
            // Deterministic shuffle.
            let mut perm: Vec<usize> = (0..v.len()).collect();
            let mut s = seed;
            for i in (1..perm.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            let permuted: Vec<f64> = perm.iter().map(|&p| v[p]).collect();
            let direct = max_ind(&v, k);
            let mapped: IndexSet = max_ind(&permuted, k).iter().map(|i| perm[i - 1] + 1).collect();
            prop_assert_eq!(direct, mapped);
        }

        #[test]
        fn selection_is_deterministic(
            v in prop::collection::vec(prop_oneof![Just(1.0f64), Just(-1.0), -2.0f64..2.0], 1..25),
            m in prop::collection::vec(1usize..8, 1..40),
        ) {
            let k = v.len() / 2;
            prop_assert_eq!(max_ind(&v, k), max_ind(&v, k));
            let ms = IndexMultiset::new(m);
            prop_assert_eq!(max_occ(&ms, 1), max_occ(&ms, 1));
            prop_assert!(correlate(&Matrix::identity(v.len()), &v).iter().all(|&c| c >= 0.0));
        }
    }
}
