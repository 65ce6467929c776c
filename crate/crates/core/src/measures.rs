//! Entanglement and structure measures: concurrence (general and X-state
//! forms), the anti-X measure, purity, partial trace and transpose, the
//! qubit-qutrit negativity-type measure and the MEMS boundaries.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::matcore::{self, cr, CMatrix};
use crate::qstates::{self, DensityMatrix, Family};

/// Tolerance on the anti-X measure for a state to count as X-shaped.
pub const X_TOL: f64 = 1e-10;

fn require_dims(rho: &DensityMatrix, dims: &[usize]) -> Result<()> {
    if rho.dims() != dims {
        return Err(Error::Dimension(format!("expected dims {dims:?}, got {:?}", rho.dims())));
    }
    Ok(())
}

/// `sigma_y ⊗ sigma_y`, which is real: anti-diagonal `(-1, 1, 1, -1)`.
pub fn spin_flip_operator() -> CMatrix {
    let mut s = CMatrix::zeros(4, 4);
    s[(0, 3)] = cr(-1.0);
    s[(1, 2)] = cr(1.0);
    s[(2, 1)] = cr(1.0);
    s[(3, 0)] = cr(-1.0);
    s
}

/// Spin-flipped state `(sigma_y ⊗ sigma_y) rho^* (sigma_y ⊗ sigma_y)`.
pub fn spin_flip(rho: &DensityMatrix) -> Result<CMatrix> {
    require_dims(rho, &[2, 2])?;
    let s = spin_flip_operator();
    Ok(s.conjugate(&rho.matrix().conj()))
}

/// `R = sqrt(sqrt(rho) rho~ sqrt(rho))`.
pub fn r_matrix(rho: &DensityMatrix) -> Result<CMatrix> {
    let flipped = spin_flip(rho)?;
    let s = matcore::sqrt_psd(rho.matrix())?;
    matcore::sqrt_psd(&(&(&s * &flipped) * &s).hermitian_part())
}

/// Descending eigenvalues of the R matrix.
///
/// `sqrt(rho) rho~ sqrt(rho) = A A^dagger` with `A = sqrt(rho) S sqrt(rho)^*`,
/// so the eigenvalues of R are the singular values of `A`; taking them that
/// way avoids square-rooting round-off in the zero eigenvalues.
pub fn r_eigenvalues(rho: &DensityMatrix) -> Result<Vec<f64>> {
    require_dims(rho, &[2, 2])?;
    let s = matcore::sqrt_psd(rho.matrix())?;
    let a = &(&s * &spin_flip_operator()) * &s.conj();
    Ok(matcore::singular_values(&a))
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    let l = r_eigenvalues(rho)?;
    Ok((l[0] - l[1] - l[2] - l[3]).clamp(0.0, 1.0))
}

/// `4(|rho_21|^2 + |rho_31|^2 + |rho_42|^2 + |rho_43|^2)` on a 4x4 matrix.
pub fn anti_x_of(m: &CMatrix) -> f64 {
    4.0 * (m[(1, 0)].norm_sqr() + m[(2, 0)].norm_sqr() + m[(3, 1)].norm_sqr() + m[(3, 2)].norm_sqr())
}

pub fn anti_x_measure(rho: &DensityMatrix) -> Result<f64> {
    require_dims(rho, &[2, 2])?;
    Ok(anti_x_of(rho.matrix()))
}

/// X-state concurrence formula read straight off the matrix entries.
pub(crate) fn x_formula(m: &CMatrix) -> f64 {
    let d = |i: usize| m[(i, i)].re.max(0.0);
    let a = m[(2, 1)].norm() - (d(3) * d(0)).sqrt();
    let b = m[(3, 0)].norm() - (d(2) * d(1)).sqrt();
    (2.0 * a.max(b).max(0.0)).min(1.0)
}

/// Concurrence of an X-shaped two-qubit state from its entries alone.
pub fn concurrence_x(rho: &DensityMatrix) -> Result<f64> {
    let a = anti_x_measure(rho)?;
    if a > X_TOL {
        return Err(Error::Domain(format!("state is not X-shaped (anti-X measure {a:.3e})")));
    }
    Ok(x_formula(rho.matrix()))
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

fn from_digits(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// Reduction onto subsystem `keep` (0-based), tracing out every other subsystem.
pub fn partial_trace(rho: &DensityMatrix, keep: usize) -> Result<DensityMatrix> {
    let dims = rho.dims();
    if keep >= dims.len() {
        return Err(Error::Dimension(format!("subsystem {keep} out of range for dims {dims:?}")));
    }
    let d = dims[keep];
    let n = rho.dim();
    let mut out = CMatrix::zeros(d, d);
    for i in 0..n {
        let di = digits(i, dims);
        for j in 0..n {
            let dj = digits(j, dims);
            let rest_equal = di.iter().zip(&dj).enumerate().all(|(m, (a, b))| m == keep || a == b);
            if rest_equal {
                out[(di[keep], dj[keep])] += rho.get(i, j);
            }
        }
    }
    DensityMatrix::new(&[d], out)
}

/// Partial transpose over subsystem `sub` (0-based) of a bipartite state.
pub fn partial_transpose(rho: &DensityMatrix, sub: usize) -> Result<CMatrix> {
    let dims = rho.dims();
    if dims.len() != 2 {
        return Err(Error::Dimension(format!("partial transpose needs a bipartite state, got {dims:?}")));
    }
    if sub > 1 {
        return Err(Error::Dimension(format!("subsystem {sub} out of range for a bipartite state")));
    }
    let n = rho.dim();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        let di = digits(i, dims);
        for j in 0..n {
            let dj = digits(j, dims);
            let (mut a, mut b) = (di.clone(), dj.clone());
            std::mem::swap(&mut a[sub], &mut b[sub]);
            out[(from_digits(&a, dims), from_digits(&b, dims))] = rho.get(i, j);
        }
    }
    Ok(out)
}

/// `||rho^{T_1}||_1 - 1` for a qubit-qutrit state; 1 for maximally entangled states.
pub fn negativity_e(rho: &DensityMatrix) -> Result<f64> {
    require_dims(rho, &[2, 3])?;
    let pt = partial_transpose(rho, 0)?;
    let e = matcore::trace_norm(&pt)? - 1.0;
    Ok(e.clamp(0.0, 1.0 + 1e-9))
}

fn purity_in(p: f64, lo: f64) -> Result<f64> {
    if !(p.is_finite() && p >= lo - 1e-12 && p <= 1.0 + 1e-12) {
        return Err(Error::Domain(format!("purity {p} outside [{lo}, 1]")));
    }
    Ok(p.clamp(lo, 1.0))
}

/// Largest two-qubit concurrence attainable at purity `p`.
pub fn mems_boundary_2x2(p: f64) -> Result<f64> {
    let p = purity_in(p, 0.25)?;
    Ok(if p <= 1.0 / 3.0 {
        0.0
    } else if p < 5.0 / 9.0 {
        (2.0 * (p - 1.0 / 3.0)).sqrt()
    } else {
        (1.0 + (2.0 * p - 1.0).sqrt()) / 2.0
    })
}

const TABLE_POINTS: usize = 1000;

/// One branch of the tabulated curve, sampled uniformly in its natural
/// variable `t`: `p = a + (b - a) t^2` on the two lower branches (which grow
/// like a square root from their left end) and `p = a + (b - a) t` above.
struct Segment {
    a: f64,
    b: f64,
    quadratic: bool,
    e: Vec<f64>,
}

impl Segment {
    fn purity(&self, t: f64) -> f64 {
        self.a + (self.b - self.a) * if self.quadratic { t * t } else { t }
    }

    fn param(&self, p: f64) -> f64 {
        let u = ((p - self.a) / (self.b - self.a)).clamp(0.0, 1.0);
        if self.quadratic {
            u.sqrt()
        } else {
            u
        }
    }

    /// Cubic Lagrange interpolation through the four nearest nodes.
    fn eval(&self, p: f64) -> f64 {
        let k = self.e.len() - 1;
        let x = self.param(p) * k as f64;
        let j = (x.floor() as usize).saturating_sub(1).min(k - 3);
        let mut out = 0.0;
        for m in 0..4 {
            let mut w = 1.0;
            for n in (0..4).filter(|&n| n != m) {
                w *= (x - (j + n) as f64) / (m as f64 - n as f64);
            }
            out += w * self.e[j + m];
        }
        out
    }
}

struct BoundaryTable {
    segments: Vec<Segment>,
}

/// Branch points sit on nodes, so no interpolation stencil crosses a kink.
fn build_table() -> BoundaryTable {
    let breaks = [1.0 / 6.0, 0.2, 0.375, 1.0];
    let span = 1.0 - 1.0 / 6.0;
    let intervals = TABLE_POINTS - 1;
    let mut used = 0;
    let mut segments = Vec::new();
    for w in 0..3 {
        let (a, b) = (breaks[w], breaks[w + 1]);
        let k = if w == 2 { intervals - used } else { ((b - a) / span * intervals as f64).round() as usize };
        used += k;
        let mut seg = Segment { a, b, quadratic: w < 2, e: Vec::new() };
        seg.e = (0..=k).map(|s| mems_2x3_entanglement(if s == k { b } else { seg.purity(s as f64 / k as f64) })).collect();
        segments.push(seg);
    }
    BoundaryTable { segments }
}

fn table() -> &'static BoundaryTable {
    static TABLE: OnceLock<BoundaryTable> = OnceLock::new();
    TABLE.get_or_init(build_table)
}

/// Exact `E_T1` of the qubit-qutrit MEMS candidate at purity `p`.
pub fn mems_2x3_entanglement(p: f64) -> f64 {
    let rho = qstates::mems_2x3(p).expect("purity on the table grid");
    negativity_e(&rho).expect("qubit-qutrit state")
}

/// Qubit-qutrit MEMS boundary, interpolated on a 1000-node table.
pub fn mems_boundary_2x3(p: f64) -> Result<f64> {
    let p = purity_in(p, 1.0 / 6.0)?;
    let segs = &table().segments;
    let seg = segs.iter().find(|s| p < s.b).unwrap_or(&segs[segs.len() - 1]);
    Ok(seg.eval(p))
}

/// The tabulated `(purity, entanglement)` nodes of [`mems_boundary_2x3`], in increasing purity.
pub fn mems_boundary_2x3_nodes() -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for (i, seg) in table().segments.iter().enumerate() {
        let k = seg.e.len() - 1;
        for (s, &e) in seg.e.iter().enumerate().skip(usize::from(i > 0)) {
            out.push((if s == k { seg.b } else { seg.purity(s as f64 / k as f64) }, e));
        }
    }
    out
}

/// Pure state `cos(t)|00> + sin(t)|11>` with concurrence `c`.
pub fn pure_companion(c: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::Domain(format!("concurrence {c} outside [0, 1]")));
    }
    Ok(qstates::theta_state(Family::Phi, 0.5 * c.asin(), 0.0))
}

/// Purity of the two-qubit MEMS whose concurrence is `c`.
pub fn mems_purity_for(c: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::Domain(format!("concurrence {c} outside [0, 1]")));
    }
    Ok(if c <= 2.0 / 3.0 { c * c / 2.0 + 1.0 / 3.0 } else { ((2.0 * c - 1.0).powi(2) + 1.0) / 2.0 })
}

/// Two-qubit MEMS with concurrence `c`.
pub fn mems_companion(c: f64) -> Result<DensityMatrix> {
    qstates::mems_2x2(mems_purity_for(c)?)
}
