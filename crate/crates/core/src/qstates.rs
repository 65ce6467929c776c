//! Density matrices and the named state families: theta states, X-state
//! parameterizations, MEMS, H states, qubit-qutrit maximally entangled
//! basis states and random general states.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{self, c, cis, cr, CMatrix, Eigen, C64};

const TRACE_TOL: f64 = 1e-12;
const STATE_HERMITIAN_TOL: f64 = 1e-10;
const REGION_SLACK: f64 = 1e-12;

/// A validated density matrix together with its subsystem dimensions.
///
/// Invariants: Hermitian, trace one, eigenvalues at least `-1e-10`, and the
/// product of `dims` equals the matrix size.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn new(dims: &[usize], mat: CMatrix) -> Result<Self> {
        let n: usize = dims.iter().product();
        if dims.is_empty() || dims.iter().any(|&d| d < 2) {
            return Err(Error::Dimension(format!("invalid subsystem dimensions {dims:?}")));
        }
        if !mat.is_square() || mat.rows() != n {
            return Err(Error::Dimension(format!(
                "dims {dims:?} need a {n}x{n} matrix, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        let dev = mat.hermitian_deviation();
        if dev > STATE_HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let mat = mat.hermitian_part();
        let tr = mat.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::Domain(format!("trace {tr} is not 1")));
        }
        let min = *matcore::eig_hermitian(&mat)?.values.last().unwrap_or(&0.0);
        if min < -matcore::PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(Self { dims: dims.to_vec(), mat })
    }

    /// Skips validation; callers guarantee the invariants by construction.
    pub(crate) fn from_parts(dims: &[usize], mat: CMatrix) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), mat.rows());
        Self { dims: dims.to_vec(), mat }
    }

    /// `|psi><psi| / <psi|psi>`.
    pub fn from_ket(dims: &[usize], ket: &[C64]) -> Result<Self> {
        let n: usize = dims.iter().product();
        if ket.len() != n {
            return Err(Error::Dimension(format!("ket of length {} for dims {dims:?}", ket.len())));
        }
        let norm2: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 || !norm2.is_finite() {
            return Err(Error::Domain("zero or non-finite ket".into()));
        }
        Ok(Self::from_parts(dims, CMatrix::outer(ket).scale_real(1.0 / norm2)))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn eigen(&self) -> Eigen {
        matcore::eig_hermitian(&self.mat).expect("density matrices are Hermitian")
    }

    pub fn spectrum(&self) -> Vec<f64> {
        self.eigen().values
    }

    pub fn rank(&self) -> usize {
        matcore::rank_of_spectrum(&self.spectrum(), matcore::RANK_TOL)
    }

    /// `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        self.mat.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    /// `U rho U^dagger`, with `U` required to be unitary to 1e-10.
    pub fn transform(&self, u: &CMatrix) -> Result<Self> {
        if u.rows() != self.dim() || !u.is_square() {
            return Err(Error::Dimension("unitary size does not match the state".into()));
        }
        let dev = u.unitarity_deviation();
        if dev > 1e-10 {
            return Err(Error::Domain(format!("matrix is not unitary (deviation {dev:.3e})")));
        }
        Ok(Self::from_parts(&self.dims, u.conjugate(&self.mat).hermitian_part()))
    }

    /// Convex combination `sum_k w_k rho_k`; weights must be non-negative and sum to one.
    pub fn mixture(terms: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::Domain("empty mixture".into()))?;
        check_probabilities(&terms.iter().map(|t| t.0).collect::<Vec<_>>(), true)?;
        let dims = first.1.dims.clone();
        let mut acc = CMatrix::zeros(first.1.dim(), first.1.dim());
        for (w, rho) in terms {
            if rho.dims != dims {
                return Err(Error::Dimension("mixture of states with different dims".into()));
            }
            acc = &acc + &rho.mat.scale_real(*w);
        }
        Ok(Self::from_parts(&dims, acc))
    }
}

fn check_probabilities(p: &[f64], allow_zero: bool) -> Result<()> {
    if p.iter().any(|&x| !x.is_finite() || x < 0.0 || (!allow_zero && x == 0.0)) {
        return Err(Error::Domain(format!("probabilities must be positive, got {p:?}")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > TRACE_TOL {
        return Err(Error::Domain(format!("probabilities sum to {s}, not 1")));
    }
    Ok(())
}

/// `|k><k|` in an `n`-level space.
pub fn basis_projector(n: usize, k: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(k, k)] = cr(1.0);
    m
}

/// Ket `cos(theta)|a> + e^{i phi} sin(theta)|b>` in an `n`-level space.
pub fn two_level_ket(n: usize, a: usize, b: usize, theta: f64, phi: f64) -> Vec<C64> {
    let mut v = vec![cr(0.0); n];
    v[a] = cr(theta.cos());
    v[b] = cis(phi) * theta.sin();
    v
}

fn two_level_matrix(n: usize, a: usize, b: usize, theta: f64, phi: f64) -> CMatrix {
    CMatrix::outer(&two_level_ket(n, a, b, theta, phi))
}

/// Two-qubit Bell-type family: Phi lives on `{|00>, |11>}`, Psi on `{|01>, |10>}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Phi,
    Psi,
}

impl Family {
    fn levels(self) -> (usize, usize) {
        match self {
            Family::Phi => (0, 3),
            Family::Psi => (1, 2),
        }
    }
}

/// Pure two-qubit theta state `cos(theta)|a> + e^{i phi} sin(theta)|b>`.
pub fn theta_state(family: Family, theta: f64, phi: f64) -> DensityMatrix {
    let (a, b) = family.levels();
    DensityMatrix::from_parts(&[2, 2], two_level_matrix(4, a, b, theta, phi))
}

pub fn bell_phi_plus() -> DensityMatrix {
    theta_state(Family::Phi, PI / 4.0, 0.0)
}

/// Hyperspherical probabilities: `p_1 = c_1^2, p_2 = s_1^2 c_2^2, ...`, last term all sines.
pub fn hyperspherical_probs(angles: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(angles.len() + 1);
    let mut tail = 1.0;
    for a in angles {
        let (s, c) = a.sin_cos();
        out.push(tail * c * c);
        tail *= s * s;
    }
    out.push(tail);
    out
}

/// Parameters of the four-term X-state mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XParams {
    /// Superposition angles of the Phi, Phi, Psi, Psi constituents, in `[0, pi/2]`.
    pub theta: [f64; 4],
    /// Relative phases of the constituents, in `[0, 2pi)`.
    pub phi: [f64; 4],
    /// Hyperspherical probability angles, in `[0, pi/2]`.
    pub prob_angles: [f64; 3],
}

impl XParams {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut u = |hi: f64| rng.gen::<f64>() * hi;
        Self {
            theta: [u(PI / 2.0), u(PI / 2.0), u(PI / 2.0), u(PI / 2.0)],
            phi: [u(2.0 * PI), u(2.0 * PI), u(2.0 * PI), u(2.0 * PI)],
            prob_angles: [u(PI / 2.0), u(PI / 2.0), u(PI / 2.0)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum XMode {
    /// All eleven parameters.
    Full,
    /// Nine parameters: the first Phi and first Psi phases are pinned to zero.
    Reduced,
}

pub fn general_x_state(params: &XParams, mode: XMode) -> DensityMatrix {
    let p = hyperspherical_probs(&params.prob_angles);
    let mut phi = params.phi;
    if mode == XMode::Reduced {
        phi[0] = 0.0;
        phi[2] = 0.0;
    }
    let fams = [Family::Phi, Family::Phi, Family::Psi, Family::Psi];
    let mut m = CMatrix::zeros(4, 4);
    for k in 0..4 {
        let (a, b) = fams[k].levels();
        m = &m + &two_level_matrix(4, a, b, params.theta[k], phi[k]).scale_real(p[k]);
    }
    DensityMatrix::from_parts(&[2, 2], m)
}

/// One constituent of a rank-specific mixture: a two-level pure state on
/// levels `(a, b)` with relative phase `phase`.
#[derive(Debug, Clone, Copy)]
struct Term {
    a: usize,
    b: usize,
    phase: f64,
}

const fn term(a: usize, b: usize, phase: f64) -> Term {
    Term { a, b, phase }
}

fn mix_terms(dims: &[usize], terms: &[Term], thetas: &[f64], probs: &[f64]) -> Result<DensityMatrix> {
    let r = terms.len();
    if thetas.len() != r || probs.len() != r {
        return Err(Error::Domain(format!(
            "rank {r} needs {r} angles and {r} probabilities, got {} and {}",
            thetas.len(),
            probs.len()
        )));
    }
    check_probabilities(probs, false)?;
    let n: usize = dims.iter().product();
    let mut m = CMatrix::zeros(n, n);
    for ((t, th), p) in terms.iter().zip(thetas).zip(probs) {
        m = &m + &two_level_matrix(n, t.a, t.b, *th, t.phase).scale_real(*p);
    }
    let rho = DensityMatrix::from_parts(dims, m);
    let found = rho.rank();
    if found != r {
        return Err(Error::DegenerateRank { expected: r, found });
    }
    Ok(rho)
}

const PHI0: Term = term(0, 3, 0.0);
const PHI_PI: Term = term(0, 3, PI);
const PSI0: Term = term(1, 2, 0.0);
const PSI_PI: Term = term(1, 2, PI);

fn x_terms(rank: usize) -> Result<&'static [Term]> {
    const R1: [Term; 1] = [PHI0];
    const R2: [Term; 2] = [PHI0, PSI0];
    const R3: [Term; 3] = [PHI0, PHI_PI, PSI0];
    const R4: [Term; 4] = [PHI0, PHI_PI, PSI0, PSI_PI];
    match rank {
        1 => Ok(&R1),
        2 => Ok(&R2),
        3 => Ok(&R3),
        4 => Ok(&R4),
        _ => Err(Error::Domain(format!("two-qubit rank must be 1..=4, got {rank}"))),
    }
}

/// Real rank-specific X state.
///
/// Terms, in order: rank 1 `Phi+`; rank 2 `Phi+, Psi+`; rank 3
/// `Phi+, Phi-, Psi+`; rank 4 `Phi+, Phi-, Psi+, Psi-`. `thetas[k]` and
/// `probs[k]` belong to the k-th term.
pub fn rank_x_state(rank: usize, thetas: &[f64], probs: &[f64]) -> Result<DensityMatrix> {
    mix_terms(&[2, 2], x_terms(rank)?, thetas, probs)
}

/// The same mixture as [`rank_x_state`] without the rank check; used inside search loops.
pub(crate) fn rank_x_matrix(rank: usize, thetas: &[f64], probs: &[f64]) -> CMatrix {
    let terms = x_terms(rank).expect("rank validated by caller");
    let mut m = CMatrix::zeros(4, 4);
    for ((t, th), p) in terms.iter().zip(thetas).zip(probs) {
        m = &m + &two_level_matrix(4, t.a, t.b, *th, t.phase).scale_real(*p);
    }
    m
}

fn check_unit_interval(p: f64, lo: f64, what: &str) -> Result<()> {
    if !(p.is_finite() && p >= lo - REGION_SLACK && p <= 1.0 + REGION_SLACK) {
        return Err(Error::Domain(format!("{what} {p} outside [{lo}, 1]")));
    }
    Ok(())
}

/// Coefficient shared by the lowest-purity two-qubit MEMS branch and `H_I`;
/// chosen so that the state's purity is exactly `p`.
fn low_purity_b(p: f64) -> f64 {
    1.0 + ((4.0 / 3.0) * (4.0 * p - 1.0)).max(0.0).sqrt()
}

fn diag_state(dims: &[usize], diag: &[f64]) -> DensityMatrix {
    DensityMatrix::from_parts(dims, CMatrix::from_diag(diag))
}

/// Two-qubit maximally entangled mixed state of purity `p`, `p` in `[1/4, 1]`.
pub fn mems_2x2(p: f64) -> Result<DensityMatrix> {
    check_unit_interval(p, 0.25, "purity")?;
    let p = p.clamp(0.25, 1.0);
    let phi = bell_phi_plus();
    if p < 1.0 / 3.0 {
        let b = low_purity_b(p);
        let (x, y) = ((b + 1.0) / 8.0, (5.0 - 3.0 * b) / 8.0);
        Ok(diag_state(&[2, 2], &[x, x, y, x]))
    } else if p < 5.0 / 9.0 {
        let g = (2.0 * (p - 1.0 / 3.0)).sqrt();
        let e = 1.0 / 3.0 - ((p - 1.0 / 3.0) / 2.0).sqrt();
        let rest = CMatrix::from_diag(&[e, 1.0 / 3.0, 0.0, e]);
        Ok(DensityMatrix::from_parts(&[2, 2], &phi.mat.scale_real(g) + &rest))
    } else {
        let w = (1.0 + (2.0 * p - 1.0).sqrt()) / 2.0;
        let rest = CMatrix::from_diag(&[0.0, 1.0 - w, 0.0, 0.0]);
        Ok(DensityMatrix::from_parts(&[2, 2], &phi.mat.scale_real(w) + &rest))
    }
}

/// Real X state of concurrence `c` and purity `p`, for `p` in `[(1 + c^2)/2, 1]`.
pub fn closed_form_x(c_val: f64, p: f64) -> Result<DensityMatrix> {
    if !(c_val.is_finite() && (-REGION_SLACK..=1.0 + REGION_SLACK).contains(&c_val)) {
        return Err(Error::Domain(format!("concurrence {c_val} outside [0, 1]")));
    }
    let c_val = c_val.clamp(0.0, 1.0);
    let lo = 0.5 * (1.0 + c_val * c_val);
    if !(p.is_finite() && p >= lo - REGION_SLACK && p <= 1.0 + REGION_SLACK) {
        return Err(Error::Domain(format!("purity {p} outside [{lo}, 1] for concurrence {c_val}")));
    }
    let b = (2.0 * p - 1.0 - c_val * c_val).max(0.0).sqrt();
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = cr((1.0 + b) / 2.0);
    m[(3, 3)] = cr((1.0 - b) / 2.0);
    m[(0, 3)] = cr(c_val / 2.0);
    m[(3, 0)] = cr(c_val / 2.0);
    Ok(DensityMatrix::from_parts(&[2, 2], m))
}

/// Which of the three H-state forms covers a point of the concurrence-purity plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HBranch {
    I,
    II,
    III,
}

/// Classifies `(c, p)`; boundary points belong to the higher-purity branch.
pub fn h_branch(c_val: f64, p: f64) -> Result<HBranch> {
    let s = REGION_SLACK;
    if !(c_val.is_finite() && p.is_finite()) || c_val < -s || c_val > 1.0 + s || p > 1.0 + s {
        return Err(Error::Domain(format!("({c_val}, {p}) outside the unit square")));
    }
    let c2 = c_val * c_val;
    if p >= 0.5 * (1.0 + c2) - s {
        return Ok(HBranch::III);
    }
    let lower = if c_val < 2.0 / 3.0 {
        1.0 / 3.0 + c2 / 2.0
    } else {
        0.5 * (1.0 + (2.0 * c_val - 1.0).powi(2))
    };
    if p >= lower - s {
        return Ok(HBranch::II);
    }
    if c_val.abs() <= s && p >= 0.25 - s {
        return Ok(HBranch::I);
    }
    Err(Error::Domain(format!(
        "no H state with concurrence {c_val} and purity {p}: purity must be at least {lower}"
    )))
}

/// H state of concurrence `c` and purity `p`.
pub fn h_state(c_val: f64, p: f64) -> Result<DensityMatrix> {
    match h_branch(c_val, p)? {
        HBranch::I => {
            let b = low_purity_b(p.clamp(0.25, 1.0 / 3.0));
            let (x, y) = ((1.0 + b) / 8.0, (5.0 - 3.0 * b) / 8.0);
            Ok(diag_state(&[2, 2], &[x, x, y, x]))
        }
        HBranch::II => {
            let c_val = c_val.clamp(0.0, 1.0);
            let s = (6.0 * p - 2.0 - 3.0 * c_val * c_val).max(0.0).sqrt();
            let mut m = CMatrix::from_diag(&[(2.0 + s) / 6.0, (1.0 - s) / 3.0, 0.0, (2.0 + s) / 6.0]);
            m[(0, 3)] = cr(c_val / 2.0);
            m[(3, 0)] = cr(c_val / 2.0);
            Ok(DensityMatrix::from_parts(&[2, 2], m))
        }
        HBranch::III => closed_form_x(c_val, p.min(1.0)),
    }
}

/// Maximally entangled qubit-qutrit basis states and the separable `L2` state.
///
/// Basis order is `|00>, |01>, |02>, |10>, |11>, |12>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Meb2x3 {
    /// `{|00>, |12>}`
    Phi1,
    /// `{|01>, |10>}`
    Phi2,
    /// `{|02>, |11>}`
    Phi3,
    /// `{|00>, |11>}`
    Psi1,
    /// `{|02>, |10>}`
    Psi2,
    /// `{|01>, |12>}`
    Psi3,
    /// `{|01>, |11>}`, a product state for every angle.
    L2,
}

impl Meb2x3 {
    pub const ENTANGLED: [Meb2x3; 6] =
        [Meb2x3::Phi1, Meb2x3::Phi2, Meb2x3::Phi3, Meb2x3::Psi1, Meb2x3::Psi2, Meb2x3::Psi3];

    pub fn levels(self) -> (usize, usize) {
        match self {
            Meb2x3::Phi1 => (0, 5),
            Meb2x3::Phi2 => (1, 3),
            Meb2x3::Phi3 => (2, 4),
            Meb2x3::Psi1 => (0, 4),
            Meb2x3::Psi2 => (2, 3),
            Meb2x3::Psi3 => (1, 5),
            Meb2x3::L2 => (1, 4),
        }
    }
}

pub fn meb_state_2x3(kind: Meb2x3, theta: f64, phi: f64) -> DensityMatrix {
    let (a, b) = kind.levels();
    DensityMatrix::from_parts(&[2, 3], two_level_matrix(6, a, b, theta, phi))
}

fn t2x3(kind: Meb2x3, sign: f64) -> Term {
    let (a, b) = kind.levels();
    term(a, b, if sign < 0.0 { PI } else { 0.0 })
}

fn lx_terms(rank: usize) -> Result<Vec<Term>> {
    use Meb2x3::{Phi1 as L1, Psi2 as L3, L2};
    let layout: &[(Meb2x3, f64)] = match rank {
        1 => &[(L1, 1.0)],
        2 => &[(L1, 1.0), (L2, 1.0)],
        3 => &[(L1, 1.0), (L2, 1.0), (L2, -1.0)],
        4 => &[(L1, 1.0), (L1, -1.0), (L2, 1.0), (L2, -1.0)],
        5 => &[(L1, 1.0), (L2, 1.0), (L2, -1.0), (L3, 1.0), (L3, -1.0)],
        6 => &[(L1, 1.0), (L1, -1.0), (L2, 1.0), (L2, -1.0), (L3, 1.0), (L3, -1.0)],
        _ => return Err(Error::Domain(format!("qubit-qutrit rank must be 1..=6, got {rank}"))),
    };
    Ok(layout.iter().map(|&(k, s)| t2x3(k, s)).collect())
}

fn tgx_terms(rank: usize) -> Result<Vec<Term>> {
    use Meb2x3::*;
    let layout: &[(Meb2x3, f64)] = match rank {
        1 => &[(Phi1, 1.0)],
        2 => &[(Phi1, 1.0), (Phi2, 1.0)],
        3 => &[(Phi1, 1.0), (Phi2, 1.0), (Phi3, 1.0)],
        4 => &[(Phi1, 1.0), (Phi2, 1.0), (Phi3, 1.0), (Psi1, 1.0)],
        5 => &[(Phi1, 1.0), (Phi2, 1.0), (Phi3, 1.0), (Psi2, 1.0), (Psi2, -1.0)],
        6 => &[(Phi1, 1.0), (Phi2, 1.0), (Phi3, 1.0), (Psi1, 1.0), (Psi2, 1.0), (Psi3, 1.0)],
        _ => return Err(Error::Domain(format!("qubit-qutrit rank must be 1..=6, got {rank}"))),
    };
    Ok(layout.iter().map(|&(k, s)| t2x3(k, s)).collect())
}

/// Rank-specific literal-X qubit-qutrit state built from `L1 = Phi1`, `L2` and `L3 = Psi2`.
pub fn lx_rank_state(rank: usize, thetas: &[f64], probs: &[f64]) -> Result<DensityMatrix> {
    mix_terms(&[2, 3], &lx_terms(rank)?, thetas, probs)
}

/// Rank-specific TGX qubit-qutrit state built from the maximally entangled basis families.
pub fn tgx_rank_state(rank: usize, thetas: &[f64], probs: &[f64]) -> Result<DensityMatrix> {
    mix_terms(&[2, 3], &tgx_terms(rank)?, thetas, probs)
}

/// Qubit-qutrit MEMS candidate of purity `p`, `p` in `[1/6, 1]`.
pub fn mems_2x3(p: f64) -> Result<DensityMatrix> {
    check_unit_interval(p, 1.0 / 6.0, "purity")?;
    let p = p.clamp(1.0 / 6.0, 1.0);
    let phi1 = meb_state_2x3(Meb2x3::Phi1, PI / 4.0, 0.0).into_matrix();
    if p < 0.2 {
        let f = (30.0 * (p - 1.0 / 6.0)).max(0.0).sqrt();
        let a = (1.0 - f) / 6.0;
        let b = f / 5.0 + a;
        Ok(diag_state(&[2, 3], &[b, b, b, a, b, b]))
    } else if p < 0.375 {
        let g = ((10.0 / 7.0) * (p - 0.2)).max(0.0).sqrt();
        let hi = (1.0 + g / 2.0) / 5.0;
        let lo = (1.0 - 2.0 * g) / 5.0;
        let rest = CMatrix::from_diag(&[lo, hi, lo, 0.0, hi, lo]);
        Ok(DensityMatrix::from_parts(&[2, 3], &phi1.scale_real(g) + &rest))
    } else {
        let h = (6.0 * (p - 1.0 / 3.0)).max(0.0).sqrt();
        let w = (1.0 + h) / 3.0;
        let e = 0.5 * (1.0 - w);
        let rest = CMatrix::from_diag(&[0.0, e, 0.0, 0.0, e, 0.0]);
        Ok(DensityMatrix::from_parts(&[2, 3], &phi1.scale_real(w) + &rest))
    }
}

fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

/// Normalized ket with i.i.d. complex Gaussian amplitudes (Haar-distributed pure state).
pub fn random_ket<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n).map(|_| gaussian_c64(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

pub fn random_pure<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<DensityMatrix> {
    let n: usize = dims.iter().product();
    DensityMatrix::from_ket(dims, &random_ket(n, rng))
}

/// Random state of rank `rank`: `G G^dagger / tr(G G^dagger)` with `G` an `n x rank` Ginibre matrix.
pub fn random_mixed<R: Rng + ?Sized>(dims: &[usize], rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    let n: usize = dims.iter().product();
    if rank == 0 || rank > n {
        return Err(Error::Domain(format!("rank {rank} outside 1..={n}")));
    }
    loop {
        let g = CMatrix::from_fn(n, rank, |_, _| gaussian_c64(rng));
        let m = &g * &g.adjoint();
        let tr = m.trace().re;
        let rho = DensityMatrix::from_parts(dims, m.scale_real(1.0 / tr).hermitian_part());
        if rho.rank() == rank {
            return Ok(rho);
        }
    }
}

/// Product of single-site pure states.
pub fn random_product<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<DensityMatrix> {
    let mut ket = vec![cr(1.0)];
    for &d in dims {
        let part = random_ket(d, rng);
        ket = ket.iter().flat_map(|a| part.iter().map(move |b| a * b)).collect();
    }
    DensityMatrix::from_ket(dims, &ket)
}

/// Haar-random unitary from Gram-Schmidt on a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<C64> = (0..n).map(|_| gaussian_c64(rng)).collect();
        for u in &cols {
            let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= proj * y;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    CMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// `U_1 ⊗ U_2 ⊗ ...` with independent Haar factors.
pub fn random_local_unitary<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> CMatrix {
    dims.iter()
        .map(|&d| random_unitary(d, rng))
        .reduce(|a, b| matcore::kron(&a, &b))
        .unwrap_or_else(|| CMatrix::identity(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn bell_state_entries() {
        let rho = bell_phi_plus();
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((rho.get(i, j).re - 0.5).abs() < 1e-15);
        }
        assert!(rho.get(1, 1).norm() < 1e-15);
    }

    #[test]
    fn theta_state_phase_convention() {
        let rho = theta_state(Family::Psi, 0.3, 1.1);
        let expected = 0.3f64.cos() * 0.3f64.sin() * cis(-1.1);
        assert!((rho.get(1, 2) - expected).norm() < 1e-15);
        assert!((rho.get(1, 1).re - 0.3f64.cos().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn hyperspherical_eighth_angles() {
        let p = hyperspherical_probs(&[PI / 4.0; 3]);
        let expected = [0.5, 0.25, 0.125, 0.125];
        for (a, b) in p.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn rank_x_examples() {
        let q = PI / 4.0;
        let r1 = rank_x_state(1, &[q], &[1.0]).unwrap();
        assert!(r1.matrix().max_abs_diff(bell_phi_plus().matrix()) < 1e-15);
        let r4 = rank_x_state(4, &[q; 4], &[0.25; 4]).unwrap();
        assert!(r4.matrix().max_abs_diff(&CMatrix::identity(4).scale_real(0.25)) < 1e-15);
        let r2 = rank_x_state(2, &[q, q], &[0.5, 0.5]).unwrap();
        assert_eq!(r2.rank(), 2);
        assert!(matches!(rank_x_state(2, &[0.0, 0.0], &[1.0, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(rank_x_state(5, &[q; 5], &[0.2; 5]), Err(Error::Domain(_))));
        assert!(matches!(rank_x_state(3, &[q; 3], &[0.2, 0.2, 0.2]), Err(Error::Domain(_))));
    }

    #[test]
    fn rank_x_degenerate_angles() {
        // Phi+(0) and Phi-(0) are the same projector |00><00|.
        let err = rank_x_state(3, &[0.0, 0.0, 0.4], &[0.4, 0.3, 0.3]).unwrap_err();
        assert_eq!(err, Error::DegenerateRank { expected: 3, found: 2 });
    }

    #[test]
    fn mems_2x2_anchor_points() {
        assert!(mems_2x2(0.25).unwrap().matrix().max_abs_diff(&CMatrix::identity(4).scale_real(0.25)) < 1e-15);
        assert!(mems_2x2(1.0).unwrap().matrix().max_abs_diff(bell_phi_plus().matrix()) < 1e-15);
        assert!(matches!(mems_2x2(0.2), Err(Error::Domain(_))));
    }

    #[test]
    fn mems_2x2_lowest_branch_has_requested_purity() {
        for k in 0..=20 {
            let p = 0.25 + (1.0 / 3.0 - 0.25) * k as f64 / 20.0;
            assert!((mems_2x2(p).unwrap().purity() - p).abs() < 1e-12, "P = {p}");
        }
    }

    #[test]
    fn closed_form_examples() {
        let rho = closed_form_x(1.0, 1.0).unwrap();
        assert!(rho.matrix().max_abs_diff(bell_phi_plus().matrix()) < 1e-15);
        let rho = closed_form_x(0.0, 0.5).unwrap();
        assert!(rho.matrix().max_abs_diff(&CMatrix::from_diag(&[0.5, 0.0, 0.0, 0.5])) < 1e-15);
        assert!(matches!(closed_form_x(0.8, 0.6), Err(Error::Domain(_))));
    }

    #[test]
    fn h_branches() {
        assert_eq!(h_branch(0.0, 0.25).unwrap(), HBranch::I);
        assert_eq!(h_branch(0.0, 1.0 / 3.0).unwrap(), HBranch::II);
        assert_eq!(h_branch(0.4, 0.7).unwrap(), HBranch::III);
        assert_eq!(h_branch(0.5, 0.55).unwrap(), HBranch::II);
        assert!(h_branch(0.9, 0.3).is_err());
        let rho = h_state(0.0, 0.25).unwrap();
        assert!(rho.matrix().max_abs_diff(&CMatrix::identity(4).scale_real(0.25)) < 1e-15);
        let a = h_state(0.4, 0.7).unwrap();
        let b = closed_form_x(0.4, 0.7).unwrap();
        assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-15);
    }

    #[test]
    fn mems_2x3_endpoints() {
        let top = mems_2x3(1.0).unwrap();
        let phi1 = meb_state_2x3(Meb2x3::Phi1, PI / 4.0, 0.0);
        assert!(top.matrix().max_abs_diff(phi1.matrix()) < 1e-15);
        let bottom = mems_2x3(1.0 / 6.0).unwrap();
        assert!(bottom.matrix().max_abs_diff(&CMatrix::identity(6).scale_real(1.0 / 6.0)) < 1e-15);
    }

    #[test]
    fn qutrit_rank_families_have_requested_rank() {
        let mut rng = stream(11, 0);
        for rank in 1..=6 {
            let th: Vec<f64> = (0..rank).map(|_| 0.2 + rng.gen::<f64>()).collect();
            let p = vec![1.0 / rank as f64; rank];
            assert_eq!(lx_rank_state(rank, &th, &p).unwrap().rank(), rank);
            assert_eq!(tgx_rank_state(rank, &th, &p).unwrap().rank(), rank);
        }
    }

    #[test]
    fn random_states_are_valid() {
        let mut rng = stream(5, 1);
        for rank in 1..=4 {
            let rho = random_mixed(&[2, 2], rank, &mut rng).unwrap();
            let again = DensityMatrix::new(&[2, 2], rho.matrix().clone()).unwrap();
            assert_eq!(again.rank(), rank);
        }
        let u = random_unitary(5, &mut rng);
        assert!(u.unitarity_deviation() < 1e-13);
    }

    #[test]
    fn constructor_rejects_invalid() {
        assert!(matches!(DensityMatrix::new(&[2, 2], CMatrix::identity(3)), Err(Error::Dimension(_))));
        assert!(matches!(DensityMatrix::new(&[2, 2], CMatrix::identity(4)), Err(Error::Domain(_))));
        let neg = CMatrix::from_diag(&[1.2, -0.2, 0.0, 0.0]);
        assert!(matches!(DensityMatrix::new(&[2, 2], neg), Err(Error::NotPositive(_))));
    }
}
