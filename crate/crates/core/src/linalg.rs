//! Small dense complex matrices for multiplier-system images.
//!
//! Dimensions stay tiny (the multiplier dimension d, typically 1–4), so a
//! row-major `Vec<Complex64>` with O(d³) schoolbook operations is all that
//! is needed. Inverses of multiplier images are conjugate transposes
//! (unitarity), never LU solves.

use num::complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    pub dim: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(dim: usize) -> Self {
        CMat { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn scalar(z: Complex64) -> Self {
        CMat { dim: 1, data: vec![z] }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "rows must form a square matrix");
        CMat { dim, data: rows.iter().flatten().copied().collect() }
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m.set(i, i, z);
        }
        m
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, z: Complex64) {
        self.data[row * self.dim + col] = z;
    }

    /// Entry in the paper's `{M}_{ji}` convention: row j, column i.
    #[inline]
    pub fn entry_ji(&self, j: usize, i: usize) -> Complex64 {
        self.get(j, i)
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = CMat::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let aik = self.get(i, k);
                if aik.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..d {
                    let v = out.get(i, j) + aik * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Conjugate transpose. For unitary matrices this is the inverse.
    pub fn adjoint(&self) -> CMat {
        let d = self.dim;
        let mut out = CMat::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    /// Entrywise complex conjugate (the conjugate multiplier system).
    pub fn conj(&self) -> CMat {
        CMat { dim: self.dim, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, z: Complex64) -> CMat {
        CMat { dim: self.dim, data: self.data.iter().map(|w| w * z).collect() }
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!(self.dim, other.dim);
        CMat {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Column `i` as a vector (the image of the i-th basis vector).
    pub fn column(&self, i: usize) -> Vec<Complex64> {
        (0..self.dim).map(|j| self.get(j, i)).collect()
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|k| self.get(i, k) * v[k]).sum())
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.mul(&self.adjoint()).sub(&CMat::identity(self.dim)).max_abs() <= tol
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let d = self.dim;
        (0..d).all(|i| (0..d).all(|j| i == j || self.get(i, j).norm() <= tol))
    }

    pub fn block_diag(blocks: &[CMat]) -> CMat {
        let dim: usize = blocks.iter().map(|b| b.dim).sum();
        let mut out = CMat::zeros(dim);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.dim {
                for j in 0..b.dim {
                    out.set(off + i, off + j, b.get(i, j));
                }
            }
            off += b.dim;
        }
        out
    }
}

/// Rank of a (possibly rectangular) complex matrix given as rows, by Gaussian
/// elimination with partial pivoting; singular values below `tol` count as 0.
pub fn rank_with_tol(rows: &[Vec<Complex64>], tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let mut m: Vec<Vec<Complex64>> = rows.to_vec();
    let mut rank = 0;
    let mut col = 0;
    while rank < m.len() && col < ncols {
        // pivot: largest modulus in this column at or below `rank`
        let (pi, pv) = (rank..m.len())
            .map(|r| (r, m[r][col].norm()))
            .fold((rank, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if pv <= tol {
            col += 1;
            continue;
        }
        m.swap(rank, pi);
        let pivot = m[rank][col];
        for r in (rank + 1)..m.len() {
            let f = m[r][col] / pivot;
            if f.norm() == 0.0 {
                continue;
            }
            for c in col..ncols {
                let v = m[r][c] - f * m[rank][c];
                m[r][c] = v;
            }
        }
        rank += 1;
        col += 1;
    }
    rank
}
