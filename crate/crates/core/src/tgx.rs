//! True-generalized X (TGX) structure for any composition of subsystems.
//!
//! A full-matrix position `(i, j)` is *anti-X* when it feeds an off-diagonal
//! entry of some single-site reduction, which happens exactly when the
//! mixed-radix digits of `i` and `j` differ in one subsystem only. The TGX
//! mask keeps the diagonal and every other position.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{self, cr, CMatrix, C64};
use crate::measures::partial_trace;
use crate::qstates::DensityMatrix;

/// Symmetric set of marked `(row, col)` positions in an `n x n` matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementMask {
    n: usize,
    marked: Vec<bool>,
}

impl ElementMask {
    pub fn empty(n: usize) -> Self {
        Self { n, marked: vec![false; n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::empty(n);
        for i in 0..n {
            for j in i..n {
                if f(i, j) || f(j, i) {
                    m.mark(i, j);
                }
            }
        }
        m
    }

    /// Marks `(i, j)` and its mirror `(j, i)`.
    pub fn mark(&mut self, i: usize, j: usize) {
        self.marked[i * self.n + j] = true;
        self.marked[j * self.n + i] = true;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.marked[i * self.n + j]
    }

    pub fn count(&self) -> usize {
        self.marked.iter().filter(|&&b| b).count()
    }

    /// Marked positions in row-major order (0-based).
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| (0..self.n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.contains(i, j))
            .collect()
    }

    pub fn union(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "mask size mismatch");
        Self { n: self.n, marked: self.marked.iter().zip(&other.marked).map(|(a, b)| *a || *b).collect() }
    }

    /// One text row per matrix row: `X` for marked, `·` otherwise, space separated.
    pub fn to_ascii(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            let row: Vec<&str> = (0..self.n).map(|j| if self.contains(i, j) { "X" } else { "·" }).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses the format written by [`ElementMask::to_ascii`]; `.` is accepted for `·`.
    pub fn from_ascii(text: &str) -> Result<Self> {
        let rows: Vec<Vec<bool>> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| l.split_whitespace().map(|t| t == "X" || t == "x").collect())
            .collect();
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("mask text is not square".into()));
        }
        let mask = Self { n, marked: rows.concat() };
        if !mask.is_symmetric() {
            return Err(Error::Domain("mask text is not symmetric".into()));
        }
        Ok(mask)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.contains(i, j) == self.contains(j, i)))
    }
}

fn validate_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.iter().any(|&d| d < 2) {
        return Err(Error::Dimension(format!("invalid subsystem dimensions {dims:?}")));
    }
    Ok(dims.iter().product())
}

fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

/// Positions of the full matrix that feed off-diagonals of single-site reductions.
pub fn anti_x_mask(dims: &[usize]) -> Result<ElementMask> {
    let n = validate_dims(dims)?;
    let all: Vec<Vec<usize>> = (0..n).map(|i| digits(i, dims)).collect();
    Ok(ElementMask::from_fn(n, |i, j| all[i].iter().zip(&all[j]).filter(|(a, b)| a != b).count() == 1))
}

/// Diagonal plus every off-diagonal position outside [`anti_x_mask`].
pub fn tgx_mask(dims: &[usize]) -> Result<ElementMask> {
    let anti = anti_x_mask(dims)?;
    Ok(ElementMask::from_fn(anti.n(), |i, j| !anti.contains(i, j)))
}

/// Literal X pattern: main diagonal plus anti-diagonal.
pub fn literal_x_mask(n: usize) -> ElementMask {
    ElementMask::from_fn(n, |i, j| i == j || i + j == n - 1)
}

/// Zeroes the anti-X positions. The result is Hermitian with unit trace but need not be PSD.
pub fn project_tgx(rho: &DensityMatrix) -> Result<CMatrix> {
    let anti = anti_x_mask(rho.dims())?;
    let m = rho.matrix();
    Ok(CMatrix::from_fn(m.rows(), m.cols(), |i, j| if anti.contains(i, j) { cr(0.0) } else { m[(i, j)] }))
}

/// Whether a pure state is a *simple* maximally entangled state: zero on
/// every anti-X position and maximally mixed on the support of every
/// single-site reduction (with a support of at least two levels).
pub fn is_simple_me_state(psi: &DensityMatrix, tol: f64) -> Result<bool> {
    let rank = matcore::rank_of_spectrum(&psi.spectrum(), tol.max(matcore::RANK_TOL));
    if rank != 1 {
        return Err(Error::DegenerateRank { expected: 1, found: rank });
    }
    let anti = anti_x_mask(psi.dims())?;
    if anti.pairs().into_iter().any(|(i, j)| psi.get(i, j).norm() > tol) {
        return Ok(false);
    }
    for site in 0..psi.dims().len() {
        let red = partial_trace(psi, site)?;
        let support: Vec<f64> = red.spectrum().into_iter().filter(|&l| l > tol).collect();
        if support.len() < 2 {
            return Ok(false);
        }
        let (hi, lo) = (support[0], support[support.len() - 1]);
        if hi - lo > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Positions where any member of a simple maximally entangled family is nonzero.
pub fn meb_union_mask(states: &[DensityMatrix]) -> Result<ElementMask> {
    let first = states.first().ok_or_else(|| Error::Domain("empty state family".into()))?;
    let n = first.dim();
    let mut mask = ElementMask::empty(n);
    for (k, psi) in states.iter().enumerate() {
        if psi.dims() != first.dims() {
            return Err(Error::Dimension(format!("state {k} has dims {:?}", psi.dims())));
        }
        match is_simple_me_state(psi, 1e-10) {
            Ok(true) => {}
            Ok(false) | Err(_) => {
                return Err(Error::Domain(format!("state {k} is not a simple maximally entangled state")))
            }
        }
        for i in 0..n {
            for j in 0..n {
                if psi.get(i, j).norm() > 1e-12 {
                    mask.mark(i, j);
                }
            }
        }
    }
    Ok(mask)
}

/// Scale factor `c` making `c * sum_k |psi_k><psi_k|` closest to the identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub factor: f64,
    pub residual: f64,
    pub is_resolution: bool,
}

pub fn basis_resolution(states: &[DensityMatrix]) -> Result<Resolution> {
    let first = states.first().ok_or_else(|| Error::Domain("empty state family".into()))?;
    let n = first.dim();
    let mut sum = CMatrix::zeros(n, n);
    for psi in states {
        if psi.dims() != first.dims() {
            return Err(Error::Dimension("states with different dims".into()));
        }
        sum = &sum + psi.matrix();
    }
    let factor = n as f64 / sum.trace().re;
    let residual = sum.scale_real(factor).max_abs_diff(&CMatrix::identity(n));
    Ok(Resolution { factor, residual, is_resolution: residual <= 1e-10 })
}

fn ket_from_terms(dims: &[usize], terms: &[(&[usize], f64)]) -> DensityMatrix {
    let n: usize = dims.iter().product();
    let mut v = vec![cr(0.0); n];
    for (digits, amp) in terms {
        let idx = digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x);
        v[idx] += C64::new(*amp, 0.0);
    }
    DensityMatrix::from_ket(dims, &v).expect("catalog kets are nonzero")
}

fn pm_pairs(dims: &[usize], pairs: &[(&[usize], &[usize])]) -> Vec<DensityMatrix> {
    let h = FRAC_1_SQRT_2;
    pairs
        .iter()
        .flat_map(|(a, b)| [1.0, -1.0].map(|s| ket_from_terms(dims, &[(a, h), (b, s * h)])))
        .collect()
}

/// Qubit-qutrit `Phi_k^±` family on `{00,12}`, `{01,10}`, `{02,11}`.
pub fn catalog_2x3_phi() -> Vec<DensityMatrix> {
    pm_pairs(&[2, 3], &[(&[0, 0], &[1, 2]), (&[0, 1], &[1, 0]), (&[0, 2], &[1, 1])])
}

/// Qubit-qutrit `Psi_k^±` family on `{00,11}`, `{02,10}`, `{01,12}`.
pub fn catalog_2x3_psi() -> Vec<DensityMatrix> {
    pm_pairs(&[2, 3], &[(&[0, 0], &[1, 1]), (&[0, 2], &[1, 0]), (&[0, 1], &[1, 2])])
}

/// Three-qubit GHZ-type family `(|abc> ± |~a~b~c>)/sqrt 2`.
pub fn catalog_2x2x2_ghz() -> Vec<DensityMatrix> {
    pm_pairs(
        &[2, 2, 2],
        &[
            (&[0, 0, 0], &[1, 1, 1]),
            (&[0, 0, 1], &[1, 1, 0]),
            (&[0, 1, 0], &[1, 0, 1]),
            (&[0, 1, 1], &[1, 0, 0]),
        ],
    )
}

/// Three-qubit four-term family on even- and odd-parity strings, signs `+++, --+, -+-, +--`.
pub fn catalog_2x2x2_parity() -> Vec<DensityMatrix> {
    let signs = [[1.0, 1.0, 1.0], [-1.0, -1.0, 1.0], [-1.0, 1.0, -1.0], [1.0, -1.0, -1.0]];
    let even: [&[usize]; 4] = [&[0, 0, 0], &[0, 1, 1], &[1, 0, 1], &[1, 1, 0]];
    let odd: [&[usize]; 4] = [&[1, 1, 1], &[1, 0, 0], &[0, 1, 0], &[0, 0, 1]];
    let mut out = Vec::new();
    for strings in [even, odd] {
        for s in signs {
            let terms = [(strings[0], 0.5), (strings[1], 0.5 * s[0]), (strings[2], 0.5 * s[1]), (strings[3], 0.5 * s[2])];
            out.push(ket_from_terms(&[2, 2, 2], &terms));
        }
    }
    out
}

/// Two-qutrit three-term family for one choice of the sign pair `(a, b)`.
pub fn catalog_3x3(a: f64, b: f64) -> Vec<DensityMatrix> {
    let r = 1.0 / 3f64.sqrt();
    let triples: [[&[usize]; 3]; 6] = [
        [&[0, 0], &[1, 1], &[2, 2]],
        [&[0, 1], &[1, 2], &[2, 0]],
        [&[1, 0], &[2, 1], &[0, 2]],
        [&[0, 0], &[1, 2], &[2, 1]],
        [&[1, 1], &[0, 2], &[2, 0]],
        [&[2, 2], &[0, 1], &[1, 0]],
    ];
    triples
        .iter()
        .map(|t| ket_from_terms(&[3, 3], &[(t[0], r), (t[1], a * r), (t[2], b * r)]))
        .collect()
}

/// All 24 two-qutrit states over the four sign pairs.
pub fn catalog_3x3_all() -> Vec<DensityMatrix> {
    [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)].iter().flat_map(|&(a, b)| catalog_3x3(a, b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstates::{bell_phi_plus, meb_state_2x3, Meb2x3};
    use std::f64::consts::PI;

    #[test]
    fn two_qubit_masks() {
        let anti = anti_x_mask(&[2, 2]).unwrap();
        assert_eq!(anti.pairs(), vec![(0, 1), (0, 2), (1, 0), (1, 3), (2, 0), (2, 3), (3, 1), (3, 2)]);
        assert_eq!(tgx_mask(&[2, 2]).unwrap(), literal_x_mask(4));
    }

    #[test]
    fn ascii_round_trip() {
        let m = tgx_mask(&[2, 3]).unwrap();
        assert_eq!(ElementMask::from_ascii(&m.to_ascii()).unwrap(), m);
    }

    #[test]
    fn projection_leaves_x_states_alone() {
        let rho = bell_phi_plus();
        assert_eq!(&project_tgx(&rho).unwrap(), rho.matrix());
    }

    #[test]
    fn simple_states() {
        let phi1 = meb_state_2x3(Meb2x3::Phi1, PI / 4.0, 0.0);
        assert!(is_simple_me_state(&phi1, 1e-10).unwrap());
        let prod = DensityMatrix::from_ket(&[2, 2], &[cr(0.0), cr(1.0), cr(0.0), cr(0.0)]).unwrap();
        assert!(!is_simple_me_state(&prod, 1e-10).unwrap());
        let mixed = DensityMatrix::new(&[2, 2], CMatrix::identity(4).scale_real(0.25)).unwrap();
        assert!(matches!(is_simple_me_state(&mixed, 1e-10), Err(Error::DegenerateRank { .. })));
    }

    #[test]
    fn invalid_dims() {
        assert!(anti_x_mask(&[1, 2]).is_err());
        assert!(tgx_mask(&[]).is_err());
    }
}
