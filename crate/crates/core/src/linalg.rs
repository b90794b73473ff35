//! Dense kernels for the factorization family.
//!
//! Everything here works on a row-major [`DenseMatrix`]: a cyclic Jacobi
//! eigensolver for symmetric matrices, a truncated SVD built on that solver,
//! LU with partial pivoting, and the Katz similarity matrix.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::graph::DiGraph;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(DenseMatrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// 0/1 adjacency matrix, W_ij = 1 iff (i, j) is an edge.
    pub fn adjacency(g: &DiGraph) -> Self {
        let n = g.node_count();
        let mut m = Self::zeros(n, n);
        for (s, d) in g.edges() {
            m[(s, d)] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in orow.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch("shape mismatch in subtraction".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, s: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Eigenpairs in ascending eigenvalue order; `vectors` holds one
/// eigenvector per column.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

const SYMMETRY_TOL: f64 = 1e-10;
const SIGN_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Flips `v` so its first component with magnitude above 1e-12 is positive.
fn fix_sign(v: &mut [f64]) {
    if let Some(&first) = v.iter().find(|x| x.abs() > SIGN_TOL) {
        if first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues ascending and eigenvectors as rows (row k pairs with
/// value k), each sign-normalised.
fn jacobi_eigen(a: &DenseMatrix) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.rows;
    let mut m = a.data.clone();
    // symmetrise exactly so the rotations see one consistent matrix
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[i * n + j] + m[j * n + i]);
            m[i * n + j] = avg;
            m[j * n + i] = avg;
        }
    }
    // rows of `vt` are the accumulated eigenvectors
    let mut vt = DenseMatrix::identity(n).data;
    let scale: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();

    for sweep in 0..MAX_SWEEPS {
        let (mut off2, mut off1) = (0.0, 0.0);
        for i in 0..n {
            for &x in &m[i * n + i + 1..(i + 1) * n] {
                off2 += x * x;
                off1 += x.abs();
            }
        }
        let off = off2.sqrt();
        if off <= 1e-15 * scale || off == 0.0 {
            break;
        }
        // early sweeps skip rotations that would barely move anything
        let skip_below = if sweep < 3 { 0.2 * off1 / (n * n) as f64 } else { 0.0 };
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 || apq.abs() < skip_below {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                // below the last bit of both diagonals: zero it outright
                let g = 100.0 * apq.abs();
                if sweep >= 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    m[p * n + q] = 0.0;
                    m[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // A <- Jᵀ A J. By symmetry only rows p and q are computed;
                // columns p and q are copied from them.
                {
                    let (head, tail) = m.split_at_mut(q * n);
                    let rp = &mut head[p * n..(p + 1) * n];
                    let rq = &mut tail[..n];
                    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
                        let (xp, xq) = (*x, *y);
                        *x = c * xp - s * xq;
                        *y = s * xp + c * xq;
                    }
                }
                for k in 0..n {
                    m[k * n + p] = m[p * n + k];
                    m[k * n + q] = m[q * n + k];
                }
                m[p * n + p] = app - t * apq;
                m[q * n + q] = aqq + t * apq;
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;

                let (head, tail) = vt.split_at_mut(q * n);
                let vp = &mut head[p * n..(p + 1) * n];
                let vq = &mut tail[..n];
                for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
                    let (xp, xq) = (*x, *y);
                    *x = c * xp - s * xq;
                    *y = s * xp + c * xq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps the deterministic rotation order on exact ties
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut v = vt[i * n..(i + 1) * n].to_vec();
            fix_sign(&mut v);
            v
        })
        .collect();
    (values, vectors)
}

/// Above this order cyclic Jacobi needs too many sweeps on the clustered
/// spectra of graph Laplacians; Householder reduction with implicit QL takes
/// over.
const JACOBI_MAX_ORDER: usize = 96;

fn symmetric_eigen(a: &DenseMatrix) -> (Vec<f64>, Vec<Vec<f64>>) {
    if a.rows <= JACOBI_MAX_ORDER {
        jacobi_eigen(a)
    } else {
        tridiagonal_ql_eigen(a)
    }
}

/// Householder tridiagonalisation followed by implicit QL with Wilkinson
/// shifts (the classic tred2/tql2 pair).
fn tridiagonal_ql_eigen(a: &DenseMatrix) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.rows;
    let mut v = a.data.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (v[i * n + j] + v[j * n + i]);
            v[i * n + j] = avg;
            v[j * n + i] = avg;
        }
    }
    let at = |r: usize, c: usize| r * n + c;
    let mut d: Vec<f64> = v[at(n - 1, 0)..at(n - 1, 0) + n].to_vec();
    let mut e = vec![0.0; n];

    for i in (1..n).rev() {
        let scale: f64 = d[..i].iter().map(|x| x.abs()).sum();
        let mut h = 0.0;
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for x in &mut d[..i] {
                *x /= scale;
                h += *x * *x;
            }
            let mut f = d[i - 1];
            let mut g = if f > 0.0 { -h.sqrt() } else { h.sqrt() };
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].iter_mut().for_each(|x| *x = 0.0);
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    // accumulate the reflections
    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;

    // rows of `w` are eigenvectors so the QL rotations stay contiguous
    let mut w = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            w[at(c, r)] = v[at(r, c)];
        }
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            for _ in 0..64 {
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for x in &mut d[l + 2..] {
                    *x -= h;
                }
                f += h;
                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (head, tail) = w.split_at_mut((i + 1) * n);
                    let wi = &mut head[i * n..];
                    let wi1 = &mut tail[..n];
                    for (x, y) in wi.iter_mut().zip(wi1.iter_mut()) {
                        let old = *y;
                        *y = s * *x + c * old;
                        *x = c * *x - s * old;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut x = w[i * n..(i + 1) * n].to_vec();
            fix_sign(&mut x);
            x
        })
        .collect();
    (values, vectors)
}

fn columns_to_matrix(cols: &[Vec<f64>], rows: usize) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(rows, cols.len());
    for (c, col) in cols.iter().enumerate() {
        for (r, &x) in col.iter().enumerate() {
            m[(r, c)] = x;
        }
    }
    m
}

/// The `k` smallest eigenpairs of a symmetric matrix.
pub fn sym_eig_smallest(a: &DenseMatrix, k: usize) -> Result<EigenResult> {
    sym_eig(a, k, false)
}

/// The `k` largest eigenpairs, still returned in ascending order.
pub fn sym_eig_largest(a: &DenseMatrix, k: usize) -> Result<EigenResult> {
    sym_eig(a, k, true)
}

fn sym_eig(a: &DenseMatrix, k: usize, largest: bool) -> Result<EigenResult> {
    if a.rows != a.cols {
        return Err(Error::DimensionMismatch(format!(
            "eigensolver needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    if k == 0 || k > a.rows {
        return Err(Error::InvalidArgument(format!(
            "k = {k} outside 1..={}",
            a.rows
        )));
    }
    if !a.is_finite() {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let asym = a.max_asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    let (values, vectors) = symmetric_eigen(a);
    let range = if largest { a.rows - k..a.rows } else { 0..k };
    Ok(EigenResult {
        values: values[range.clone()].to_vec(),
        vectors: columns_to_matrix(&vectors[range], a.rows),
    })
}

/// Top-`k` singular triplets from the eigendecomposition of AᵀA (or AAᵀ
/// when A is wide). Singular values are descending; left vectors for
/// numerically zero singular values are completed to an orthonormal set.
pub fn truncated_svd(a: &DenseMatrix, k: usize) -> Result<SvdResult> {
    let kmax = a.rows.min(a.cols);
    if k == 0 || k > kmax {
        return Err(Error::InvalidArgument(format!("k = {k} outside 1..={kmax}")));
    }
    if a.rows < a.cols {
        let t = truncated_svd(&a.transpose(), k)?;
        return Ok(SvdResult {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        });
    }
    let ata = a.transpose().matmul(a)?;
    let (values, vectors) = symmetric_eigen(&ata);
    let n = a.cols;
    let sigma_max = values.last().copied().unwrap_or(0.0).max(0.0).sqrt();
    let cutoff = sigma_max * 1e-12;

    let mut sigma = Vec::with_capacity(k);
    let mut vcols = Vec::with_capacity(k);
    let mut ucols: Vec<Option<Vec<f64>>> = Vec::with_capacity(k);
    for idx in (n - k..n).rev() {
        let s = values[idx].max(0.0).sqrt();
        let v = vectors[idx].clone();
        if s > cutoff && s > 0.0 {
            let mut u = vec![0.0; a.rows];
            for (r, ur) in u.iter_mut().enumerate() {
                *ur = a.row(r).iter().zip(&v).map(|(x, y)| x * y).sum::<f64>() / s;
            }
            sigma.push(s);
            ucols.push(Some(u));
        } else {
            sigma.push(0.0);
            ucols.push(None);
        }
        vcols.push(v);
    }
    let ucols = orthonormal_completion(ucols, a.rows);
    Ok(SvdResult {
        u: columns_to_matrix(&ucols, a.rows),
        sigma,
        v: columns_to_matrix(&vcols, n),
    })
}

/// Re-orthonormalises the given columns with two passes of modified
/// Gram-Schmidt and fills `None` slots from the standard basis.
fn orthonormal_completion(cols: Vec<Option<Vec<f64>>>, dim: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    let mut pending = Vec::new();
    let mut out: Vec<Option<Vec<f64>>> = vec![None; cols.len()];
    for (slot, c) in cols.into_iter().enumerate() {
        match c {
            Some(mut v) => {
                for _ in 0..2 {
                    for b in &basis {
                        let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                        v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
                    }
                }
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-8 {
                    v.iter_mut().for_each(|x| *x /= norm);
                    basis.push(v.clone());
                    out[slot] = Some(v);
                } else {
                    pending.push(slot);
                }
            }
            None => pending.push(slot),
        }
    }
    let mut e = 0;
    for slot in pending {
        loop {
            let mut v = vec![0.0; dim];
            v[e % dim] = 1.0;
            e += 1;
            for _ in 0..2 {
                for b in &basis {
                    let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                    v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-6 {
                v.iter_mut().for_each(|x| *x /= norm);
                basis.push(v.clone());
                out[slot] = Some(v);
                break;
            }
        }
    }
    out.into_iter().map(|c| c.expect("every slot filled")).collect()
}

/// Solves A X = B by LU decomposition with partial pivoting.
pub fn solve(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.rows;
    if a.cols != n || b.rows != n {
        return Err(Error::DimensionMismatch(format!(
            "solve with {}x{} system and {}x{} right-hand side",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut lu = a.data.clone();
    let mut x = b.clone();
    let m = b.cols;
    let scale = lu.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| lu[i * n + col].abs().total_cmp(&lu[j * n + col].abs()))
            .expect("non-empty range");
        if lu[pivot * n + col].abs() <= f64::EPSILON * scale * n as f64 {
            return Err(Error::Singular);
        }
        if pivot != col {
            for k in 0..n {
                lu.swap(col * n + k, pivot * n + k);
            }
            for k in 0..m {
                x.data.swap(col * m + k, pivot * m + k);
            }
        }
        let diag = lu[col * n + col];
        for r in (col + 1)..n {
            let f = lu[r * n + col] / diag;
            if f == 0.0 {
                continue;
            }
            lu[r * n + col] = f;
            for k in (col + 1)..n {
                lu[r * n + k] -= f * lu[col * n + k];
            }
            for k in 0..m {
                x.data[r * m + k] -= f * x.data[col * m + k];
            }
        }
    }
    for col in (0..n).rev() {
        let diag = lu[col * n + col];
        for k in 0..m {
            let mut acc = x.data[col * m + k];
            for j in (col + 1)..n {
                acc -= lu[col * n + j] * x.data[j * m + k];
            }
            x.data[col * m + k] = acc / diag;
        }
    }
    Ok(x)
}

/// Upper estimate of the spectral radius of a non-negative matrix:
/// the smaller of the max row/column sums, refined by the geometric growth
/// rate of repeated multiplication of the all-ones vector.
pub fn spectral_radius_estimate(a: &DenseMatrix) -> f64 {
    let n = a.rows;
    if n == 0 {
        return 0.0;
    }
    let row_bound = (0..n)
        .map(|r| a.row(r).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let col_bound = (0..n)
        .map(|c| (0..n).map(|r| a[(r, c)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let bound = row_bound.min(col_bound);
    const STEPS: usize = 64;
    let mut x = vec![1.0; n];
    let mut log_growth = 0.0;
    for _ in 0..STEPS {
        let mut y = vec![0.0; n];
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = a.row(r).iter().zip(&x).map(|(p, q)| p.abs() * q).sum();
        }
        let norm: f64 = y.iter().map(|v| v.abs()).sum();
        if norm == 0.0 {
            return 0.0;
        }
        let prev: f64 = x.iter().map(|v| v.abs()).sum();
        log_growth += (norm / prev).ln();
        x = y.into_iter().map(|v| v / norm).collect();
    }
    bound.min((log_growth / STEPS as f64).exp())
}

/// Katz similarity S = (I - βA)⁻¹ βA = Σ_{t≥1} βᵗAᵗ.
pub fn katz_similarity(g: &DiGraph, beta: f64) -> Result<DenseMatrix> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!("beta must be > 0, got {beta}")));
    }
    let n = g.node_count();
    let a = DenseMatrix::adjacency(g);
    if g.edge_count() == 0 {
        return Ok(DenseMatrix::zeros(n, n));
    }
    let radius = spectral_radius_estimate(&a);
    if beta * radius >= 1.0 {
        return Err(Error::KatzDivergence { beta, radius });
    }
    let ba = a.scale(beta);
    let system = DenseMatrix::identity(n).sub(&ba)?;
    let mut s = solve(&system, &ba)?;
    // the series has non-negative terms; only rounding can push below zero
    s.data.iter_mut().for_each(|x| {
        if *x < 0.0 {
            *x = 0.0
        }
    });
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn identity_eigenvalues() {
        let r = sym_eig_smallest(&DenseMatrix::identity(3), 2).unwrap();
        assert_eq!(r.values, vec![1.0, 1.0]);
    }

    #[test]
    fn diagonal_smallest_is_e2() {
        let r = sym_eig_smallest(&DenseMatrix::from_diag(&[3.0, 1.0, 2.0]), 1).unwrap();
        assert!(close(r.values[0], 1.0, 1e-15));
        assert_eq!(r.vectors.column(0), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn two_by_two_laplacian() {
        // characteristic polynomial (1-λ)² - 1 = λ(λ-2)
        let a = DenseMatrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let r = sym_eig_smallest(&a, 2).unwrap();
        assert!(close(r.values[0], 0.0, 1e-14));
        assert!(close(r.values[1], 2.0, 1e-14));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = r.vectors.column(0);
        let v1 = r.vectors.column(1);
        assert!(close(v0[0], h, 1e-14) && close(v0[1], h, 1e-14));
        assert!(close(v1[0], h, 1e-14) && close(v1[1], -h, 1e-14));
    }

    fn eig_residuals(a: &DenseMatrix, r: &EigenResult) -> (f64, f64) {
        let n = a.rows();
        let (mut res, mut orth) = (0.0f64, 0.0f64);
        for c in 0..r.values.len() {
            let v = r.vectors.column(c);
            for i in 0..n {
                let av: f64 = (0..n).map(|k| a[(i, k)] * v[k]).sum();
                res = res.max((av - r.values[c] * v[i]).abs());
            }
            for c2 in 0..r.values.len() {
                let w = r.vectors.column(c2);
                let ip: f64 = v.iter().zip(&w).map(|(x, y)| x * y).sum();
                orth = orth.max((ip - if c == c2 { 1.0 } else { 0.0 }).abs());
            }
        }
        (res, orth)
    }

    #[test]
    fn both_eigensolver_paths_agree_on_a_path_laplacian() {
        // path Laplacian eigenvalues are 2 - 2cos(pi k / n)
        for n in [40, 150] {
            let mut a = DenseMatrix::zeros(n, n);
            for i in 0..n {
                a[(i, i)] = if i == 0 || i == n - 1 { 1.0 } else { 2.0 };
                if i + 1 < n {
                    a[(i, i + 1)] = -1.0;
                    a[(i + 1, i)] = -1.0;
                }
            }
            let r = sym_eig_smallest(&a, n).unwrap();
            for (k, &l) in r.values.iter().enumerate() {
                let want = 2.0 - 2.0 * (std::f64::consts::PI * k as f64 / n as f64).cos();
                assert!(close(l, want, 1e-10), "n={n} k={k}: {l} vs {want}");
            }
            let (res, orth) = eig_residuals(&a, &r);
            assert!(res < 1e-10 && orth < 1e-10, "n={n}: {res} {orth}");
            for c in 0..n {
                let v = r.vectors.column(c);
                let first = v.iter().find(|x| x.abs() > 1e-12).unwrap();
                assert!(*first > 0.0);
            }
        }
    }

    #[test]
    fn eig_errors() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig_smallest(&a, 1), Err(Error::NotSymmetric(_))));
        assert!(sym_eig_smallest(&DenseMatrix::identity(2), 0).is_err());
        assert!(sym_eig_smallest(&DenseMatrix::identity(2), 3).is_err());
    }

    #[test]
    fn svd_examples() {
        let r = truncated_svd(&DenseMatrix::from_diag(&[5.0, 3.0, 1.0]), 2).unwrap();
        assert!(close(r.sigma[0], 5.0, 1e-12) && close(r.sigma[1], 3.0, 1e-12));

        let x = [1.0, 2.0, 2.0];
        let y = [3.0, 4.0];
        let outer: Vec<Vec<f64>> = x.iter().map(|a| y.iter().map(|b| a * b).collect()).collect();
        let r = truncated_svd(&DenseMatrix::from_rows(&outer).unwrap(), 1).unwrap();
        assert!(close(r.sigma[0], 15.0, 1e-12));

        // AᵀA = diag(0, 1e-4): σ = 0.01 with v = e1, u = A e1 / σ = e0
        let a = DenseMatrix::from_rows(&[vec![0.0, 0.01], vec![0.0, 0.0]]).unwrap();
        let r = truncated_svd(&a, 1).unwrap();
        assert!(close(r.sigma[0], 0.01, 1e-16));
        assert_eq!(r.u.column(0), vec![1.0, 0.0]);
        assert_eq!(r.v.column(0), vec![0.0, 1.0]);
        assert!(truncated_svd(&a, 3).is_err());
    }

    #[test]
    fn svd_of_wide_and_rank_deficient() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0, 1.0], vec![2.0, 0.0, 2.0]]).unwrap();
        let r = truncated_svd(&a, 2).unwrap();
        assert!(close(r.sigma[1], 0.0, 1e-12));
        let utu = r.u.transpose().matmul(&r.u).unwrap();
        assert!(utu.sub(&DenseMatrix::identity(2)).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn katz_examples() {
        let g = build_graph([("a", "b")]).unwrap();
        let s = katz_similarity(&g, 0.01).unwrap();
        assert!(close(s[(0, 1)], 0.01, 1e-18));
        assert_eq!((s[(0, 0)], s[(1, 0)], s[(1, 1)]), (0.0, 0.0, 0.0));

        let g = build_graph([("a", "b"), ("b", "a")]).unwrap();
        let s = katz_similarity(&g, 0.1).unwrap();
        // geometric series over odd/even powers of the 2-cycle
        let b = 0.1f64;
        assert!(close(s[(0, 1)], b / (1.0 - b * b), 1e-15));
        assert!(close(s[(1, 0)], b / (1.0 - b * b), 1e-15));
        assert!(close(s[(0, 0)], b * b / (1.0 - b * b), 1e-15));
        assert!(close(s[(1, 1)], b * b / (1.0 - b * b), 1e-15));

        let mut bld = crate::graph::GraphBuilder::new();
        bld.add_node("x").unwrap();
        bld.add_node("y").unwrap();
        let s = katz_similarity(&bld.build(), 0.01).unwrap();
        assert!(s.data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn katz_rejects_divergent_beta() {
        let g = build_graph([("a", "b"), ("b", "a")]).unwrap();
        let err = katz_similarity(&g, 1.5).unwrap_err();
        assert!(matches!(err, Error::KatzDivergence { .. }));
        assert!(err.to_string().contains("spectral radius"));
        assert!(katz_similarity(&g, 0.0).is_err());
    }

    #[test]
    fn solve_matches_known_system() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 2.0], vec![1.0, 1.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[vec![4.0], vec![3.0]]).unwrap();
        let x = solve(&a, &b).unwrap();
        assert!(close(x[(0, 0)], 1.0, 1e-15) && close(x[(1, 0)], 2.0, 1e-15));
        let sing = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(solve(&sing, &b), Err(Error::Singular)));
    }
}
