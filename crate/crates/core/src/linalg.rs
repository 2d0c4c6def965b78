//! Small dense linear algebra: complex least squares by pivoted Householder
//! QR, and the cyclic Jacobi eigenvalue method for real symmetric matrices.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Column-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[j * self.rows + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[j * self.rows + i] = v;
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for (j, &xj) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.column(j)) {
                *o += a * xj;
            }
        }
        out
    }
}

/// Solution of an overdetermined least-squares problem.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub solution: Vec<Complex64>,
    /// Ratio of the largest to the smallest pivot of the column-equilibrated
    /// pivoted QR factor.
    pub condition_estimate: f64,
}

/// Minimize `‖A x - b‖₂` for `rows ≥ cols`, after scaling columns to unit
/// norm. Fails with [`Error::IllConditioned`] when the condition estimate
/// exceeds `max_condition`.
pub fn least_squares(a: &CMatrix, b: &[Complex64], max_condition: f64) -> Result<LeastSquares> {
    let (m, n) = (a.rows, a.cols);
    if b.len() != m {
        return Err(Error::invalid("right-hand side length mismatch"));
    }
    if m < n || n == 0 {
        return Err(Error::invalid("least squares needs rows >= cols > 0"));
    }
    let mut r = a.clone();
    let mut scale = vec![1.0; n];
    for (j, s) in scale.iter_mut().enumerate() {
        let norm = column_norm(r.column(j));
        if norm == 0.0 {
            return Err(Error::IllConditioned(f64::INFINITY));
        }
        *s = norm;
        for v in r.column_mut(j) {
            *v /= norm;
        }
    }
    let mut rhs = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut diag = vec![0.0; n];

    for k in 0..n {
        // pivot on the largest remaining column norm
        let (p, _) =
            (k..n)
                .map(|j| (j, column_norm(&r.column(j)[k..])))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if p != k {
            perm.swap(k, p);
            for i in 0..m {
                let tmp = r.get(i, k);
                r.set(i, k, r.get(i, p));
                r.set(i, p, tmp);
            }
        }
        let col = &r.column(k)[k..];
        let alpha = column_norm(col);
        let x0 = col[0];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        // v = x + phase * |x| e_1 ; H = I - 2 v v^H / (v^H v)
        let mut v: Vec<Complex64> = col.to_vec();
        v[0] += phase * alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 > 0.0 {
            for j in k..n {
                let colj = &mut r.column_mut(j)[k..];
                let dot: Complex64 = v
                    .iter()
                    .zip(colj.iter())
                    .map(|(vi, ci)| vi.conj() * ci)
                    .sum();
                let f = dot * (2.0 / vnorm2);
                for (c, vi) in colj.iter_mut().zip(&v) {
                    *c -= vi * f;
                }
            }
            let dot: Complex64 = v.iter().zip(&rhs[k..]).map(|(vi, ci)| vi.conj() * ci).sum();
            let f = dot * (2.0 / vnorm2);
            for (c, vi) in rhs[k..].iter_mut().zip(&v) {
                *c -= vi * f;
            }
        }
        diag[k] = r.get(k, k).norm();
    }

    let smallest = diag[n - 1];
    let condition_estimate = if smallest == 0.0 {
        f64::INFINITY
    } else {
        diag[0] / smallest
    };
    if !(condition_estimate <= max_condition) {
        return Err(Error::IllConditioned(condition_estimate));
    }

    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        for j in i + 1..n {
            acc -= r.get(i, j) * y[j];
        }
        y[i] = acc / r.get(i, i);
    }
    let mut solution = vec![Complex64::new(0.0, 0.0); n];
    for (k, &col) in perm.iter().enumerate() {
        solution[col] = y[k] / scale[col];
    }
    Ok(LeastSquares {
        solution,
        condition_estimate,
    })
}

fn column_norm(col: &[Complex64]) -> f64 {
    col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Dense real symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Wrap row-major data without checking symmetry.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::invalid("matrix data length is not n*n"));
        }
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row_major(&self) -> &[f64] {
        &self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i + 1..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    fn off_diagonal_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    s += self.get(i, j).powi(2);
                }
            }
        }
        s.sqrt()
    }
}

/// Eigenvalues (descending) and matching eigenvectors (columns, row-major
/// `n × n`).
#[derive(Debug, Clone, PartialEq)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// `1e-12 ‖A‖_F`.
pub fn jacobi_eigen(a: &SymMatrix) -> Result<Eigen> {
    let n = a.n;
    let scale = a.frobenius_norm();
    let asym = a.asymmetry();
    if asym > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotSymmetric(asym));
    }
    let mut m = a.clone();
    let mut v = SymMatrix::zeros(n);
    for i in 0..n {
        v.set(i, i, 1.0);
    }
    let target = 1e-12 * scale;
    for _ in 0..MAX_SWEEPS {
        if m.off_diagonal_norm() <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m.get(k, p);
                    let akq = m.get(k, q);
                    m.set(k, p, c * akp - s * akq);
                    m.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = m.get(p, k);
                    let aqk = m.get(q, k);
                    m.set(p, k, c * apk - s * aqk);
                    m.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(j, j).total_cmp(&m.get(i, i)));
    let values = order.iter().map(|&i| m.get(i, i)).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + col] = v.get(row, src);
        }
    }
    Ok(Eigen { values, vectors })
}
