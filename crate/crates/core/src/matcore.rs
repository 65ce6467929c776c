//! Dense complex matrices and the Hermitian linear algebra used throughout.
//!
//! Matrices are small (at most a few dozen rows), so everything is stored
//! row-major in a flat `Vec` and diagonalized with cyclic complex Jacobi
//! rotations. Eigenvalues come back in descending order and every
//! eigenvector is phase-fixed so that its largest-magnitude component is
//! real and positive.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest entrywise change allowed when symmetrizing a supposedly Hermitian input.
pub const HERMITIAN_TOL: f64 = 1e-8;
/// Eigenvalues down to `-PSD_TOL` are treated as round-off and clamped to zero.
pub const PSD_TOL: f64 = 1e-10;
/// Relative threshold used by [`numerical_rank`].
pub const RANK_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 64;
const GAUGE_TIE: f64 = 1e-12;
const ROOT_FLOOR: f64 = 1e-14;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `e^{i phi}`.
pub fn cis(phi: f64) -> C64 {
    C64::from_polar(1.0, phi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cr(1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Self::from_fn(n, m, |i, j| cr(rows[i][j])))
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { cr(diag[i]) } else { cr(0.0) })
    }

    pub fn from_complex_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { cr(0.0) })
    }

    /// The projector `|v><v|` (no normalization).
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |i, j| v[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[C64]) {
        for (i, x) in v.iter().enumerate() {
            self[(i, j)] = *x;
        }
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(cr(s))
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().into_iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Entrywise max-norm of `self - other`. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise change made by replacing `self` with `(M + M^dagger)/2`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max(0.5 * (self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| 0.5 * (self[(i, j)] + self[(j, i)].conj()))
    }

    /// Max-norm of `U U^dagger - I`.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (self * &self.adjoint()).max_abs_diff(&Self::identity(self.rows))
    }

    /// `self * m * self^dagger`.
    pub fn conjugate(&self, m: &Self) -> Self {
        &(self * m) * &self.adjoint()
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "shape mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in product");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sum");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in difference");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (br, bc) = (b.rows, b.cols);
    CMatrix::from_fn(a.rows * br, a.cols * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Eigenvalues (descending) and the matching gauge-fixed eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    /// `V diag(values) V^dagger`.
    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::from_diag(&self.values);
        self.vectors.conjugate(&d)
    }
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("expected a square matrix, got {}x{}", m.rows, m.cols)));
    }
    let dev = m.hermitian_deviation();
    if dev > HERMITIAN_TOL || !dev.is_finite() {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// Diagonalizes a Hermitian matrix.
///
/// The input is symmetrized first; inputs whose symmetrization moves an entry
/// by more than [`HERMITIAN_TOL`] are rejected.
pub fn eig_hermitian(m: &CMatrix) -> Result<Eigen> {
    check_hermitian(m)?;
    Ok(jacobi(m.hermitian_part()))
}

fn jacobi(mut a: CMatrix) -> Eigen {
    let n = a.rows;
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Skip rotations that cannot change the diagonal in floating point.
                if mag < 1e-18 * (app.abs() + aqq.abs()) {
                    a[(p, q)] = cr(0.0);
                    a[(q, p)] = cr(0.0);
                    continue;
                }
                let phase = apq / mag;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                // U acts on columns p, q: [[c, s], [-s conj(phase), c conj(phase)]]
                let u_qp = -sn * phase.conj();
                let u_qq = cs * phase.conj();
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * cs + akq * u_qp;
                    a[(k, q)] = akp * sn + akq * u_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * cs + aqk * u_qp.conj();
                    a[(q, k)] = apk * sn + aqk * u_qq.conj();
                }
                a[(p, q)] = cr(0.0);
                a[(q, p)] = cr(0.0);
                a[(p, p)] = cr(a[(p, p)].re);
                a[(q, q)] = cr(a[(q, q)].re);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * cs + vkq * u_qp;
                    v[(k, q)] = vkp * sn + vkq * u_qq;
                }
            }
        }
    }

    let raw: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| raw[j].partial_cmp(&raw[i]).unwrap_or(std::cmp::Ordering::Equal));

    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        gauge_fix(&mut col);
        vectors.set_column(dst, &col);
    }
    Eigen { values: order.iter().map(|&i| raw[i]).collect(), vectors }
}

/// Rotates `v` so that its largest-magnitude component (lowest index on ties) is real and positive.
pub fn gauge_fix(v: &mut [C64]) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let k = v.iter().position(|z| z.norm() >= max - GAUGE_TIE).unwrap_or(0);
    let phase = v[k].conj() / v[k].norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
    v[k] = cr(v[k].re);
}

/// Principal square root of a positive semidefinite Hermitian matrix.
///
/// Eigenvalues in `[-PSD_TOL, 0)` are clamped to zero; anything more
/// negative is a domain error. Eigenvalues within round-off of zero
/// (below `ROOT_FLOOR` times the largest) are also zeroed so that exact
/// projectors map to themselves.
pub fn sqrt_psd(m: &CMatrix) -> Result<CMatrix> {
    let eig = eig_hermitian(m)?;
    let min = eig.values.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOL {
        return Err(Error::Domain(format!("sqrt of a matrix with eigenvalue {min:.3e}")));
    }
    let floor = ROOT_FLOOR * eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let roots: Vec<f64> = eig.values.iter().map(|&l| if l > floor { l.sqrt() } else { 0.0 }).collect();
    Ok(Eigen { values: roots, vectors: eig.vectors }.reconstruct())
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    Ok(eig_hermitian(m)?.values.iter().map(|l| l.abs()).sum())
}

/// Number of eigenvalues above `RANK_TOL * lambda_max`.
pub fn numerical_rank(m: &CMatrix) -> Result<usize> {
    Ok(rank_of_spectrum(&eig_hermitian(m)?.values, RANK_TOL))
}

/// Counts entries of a descending spectrum above `rel_tol` times its largest element.
pub fn rank_of_spectrum(values: &[f64], rel_tol: f64) -> usize {
    let top = values.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return 0;
    }
    values.iter().filter(|&&l| l > rel_tol * top).count()
}

/// Singular values (descending) of a square matrix.
///
/// Computed as the non-negative half of the spectrum of the Hermitian
/// dilation `[[0, A], [A^dagger, 0]]`, which keeps small singular values
/// accurate to working precision rather than to its square root.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    assert!(a.is_square(), "singular_values expects a square matrix");
    let n = a.rows;
    let h = CMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, false) => a[(i, j - n)],
        (false, true) => a[(j, i - n)].conj(),
        _ => cr(0.0),
    });
    let eig = jacobi(h);
    eig.values[..n].iter().map(|s| s.max(0.0)).collect()
}

/// Max-norm distance between two descending spectra of equal length.
pub fn spectrum_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "spectra of different length");
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn diagonal_eigenvalues_sorted_descending() {
        let e = eig_hermitian(&CMatrix::from_diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        let expected = CMatrix::from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0]]).unwrap();
        assert!(e.vectors.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn pauli_x_eigenvectors_gauge_fixed() {
        let sx = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let e = eig_hermitian(&sx).unwrap();
        assert!(close(e.values[0], 1.0, 1e-15) && close(e.values[1], -1.0, 1e-15));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = CMatrix::from_real_rows(&[&[h, h], &[h, -h]]).unwrap();
        assert!(e.vectors.max_abs_diff(&expected) < 1e-15, "{:?}", e.vectors);
    }

    #[test]
    fn complex_hermitian_reconstructs() {
        let m = CMatrix::from_vec(
            3,
            3,
            vec![cr(2.0), c(0.3, -0.7), c(-0.2, 0.1), c(0.3, 0.7), cr(-1.0), c(0.0, 0.4), c(-0.2, -0.1), c(0.0, -0.4), cr(0.5)],
        )
        .unwrap();
        let e = eig_hermitian(&m).unwrap();
        assert!(e.reconstruct().max_abs_diff(&m) < 1e-14);
        assert!(e.vectors.unitarity_deviation() < 1e-14);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn non_hermitian_rejected() {
        let ones = CMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(eig_hermitian(&ones), Err(Error::NotHermitian(_))));
        let rect = CMatrix::zeros(2, 3);
        assert!(matches!(eig_hermitian(&rect), Err(Error::Dimension(_))));
    }

    #[test]
    fn sqrt_psd_examples() {
        let s = sqrt_psd(&CMatrix::from_diag(&[4.0, 9.0])).unwrap();
        assert!(s.max_abs_diff(&CMatrix::from_diag(&[2.0, 3.0])) < 1e-15);
        let s = sqrt_psd(&CMatrix::from_diag(&[1.0, -1e-12])).unwrap();
        assert!(s.max_abs_diff(&CMatrix::from_diag(&[1.0, 0.0])) < 1e-15);
        assert!(matches!(sqrt_psd(&CMatrix::from_diag(&[1.0, -0.1])), Err(Error::Domain(_))));
    }

    #[test]
    fn kron_identity_pauli() {
        let sx = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let k = kron(&CMatrix::identity(2), &sx);
        let expected = CMatrix::from_real_rows(&[
            &[0.0, 1.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        assert_eq!(k, expected);
    }

    #[test]
    fn trace_norm_and_rank() {
        assert!(close(trace_norm(&CMatrix::from_diag(&[0.5, -0.5])).unwrap(), 1.0, 1e-15));
        assert_eq!(numerical_rank(&CMatrix::from_diag(&[0.7, 0.3, 1e-14, 0.0])).unwrap(), 2);
        assert_eq!(numerical_rank(&CMatrix::zeros(3, 3)).unwrap(), 0);
    }

    #[test]
    fn singular_values_match_known() {
        let a = CMatrix::from_vec(2, 2, vec![cr(0.0), c(0.0, 3.0), cr(-2.0), cr(0.0)]).unwrap();
        let s = singular_values(&a);
        assert!(close(s[0], 3.0, 1e-14) && close(s[1], 2.0, 1e-14));
    }

    #[test]
    fn gauge_prefers_lowest_index_on_ties() {
        let mut v = vec![c(0.0, 0.5), c(0.5, 0.0), cr(0.1)];
        gauge_fix(&mut v);
        assert!(close(v[0].re, 0.5, 1e-15) && v[0].im == 0.0);
    }
}
