//! Entanglement-preserving unitary (EPU) conversion of two-qubit states to
//! X states, the closed-form rank-≤2 conversion, and the supporting unitary
//! constructions (diagonal phases, X-preserving and two-level rotations,
//! local doubly-stochastic channels, H-state spectral matching).

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{self, cis, cr, CMatrix};
use crate::measures::{self, anti_x_of, concurrence, x_formula, X_TOL};
use crate::qstates::{self, hyperspherical_probs, DensityMatrix};

/// Spectra further apart than this cannot be related by a unitary.
pub const SPECTRUM_TOL: f64 = 1e-8;
/// Candidates evaluated between secant refinements.
pub const BATCH: usize = 256;
/// Paper default for the concurrence acceptance window.
pub const DEFAULT_TOL_C: f64 = 1e-3;

const PRESERVE_TOL: f64 = 1e-10;
const SECANT_STEPS: usize = 24;

#[derive(Debug, Clone)]
pub struct ConversionResult {
    pub converted: DensityMatrix,
    pub unitary: CMatrix,
    pub attempts: usize,
    pub delta_c: f64,
    pub anti_x: f64,
}

fn require_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dims() != [2, 2] {
        return Err(Error::Dimension(format!("expected a two-qubit state, got dims {:?}", rho.dims())));
    }
    Ok(())
}

/// `U = eps_X eps_G^dagger`, mapping `rho_g` onto the eigenframe of `rho_x`.
pub fn conversion_unitary(rho_g: &DensityMatrix, rho_x: &DensityMatrix) -> Result<CMatrix> {
    if rho_g.dims() != rho_x.dims() {
        return Err(Error::Dimension("states have different dims".into()));
    }
    let eg = rho_g.eigen();
    let ex = rho_x.eigen();
    let gap = matcore::spectrum_distance(&eg.values, &ex.values);
    if gap > SPECTRUM_TOL {
        return Err(Error::SpectralMismatch(gap));
    }
    Ok(&ex.vectors * &eg.vectors.adjoint())
}

struct Search<'a> {
    rho: &'a DensityMatrix,
    frame_g: CMatrix,
    spectrum: Vec<f64>,
    /// `eps_G^dagger rho eps_G`, diagonal up to round-off.
    lambda: CMatrix,
    target: f64,
    rank: usize,
    tol_c: f64,
}

#[derive(Debug, Clone)]
struct Candidate {
    thetas: Vec<f64>,
    prob_angles: Vec<f64>,
}

impl Candidate {
    fn random<R: Rng + ?Sized>(rank: usize, rng: &mut R) -> Self {
        Self {
            thetas: (0..rank).map(|_| rng.gen::<f64>() * FRAC_PI_2).collect(),
            prob_angles: (0..rank - 1).map(|_| rng.gen::<f64>() * FRAC_PI_2).collect(),
        }
    }
}

impl Search<'_> {
    /// Eigenframe of the candidate X state. Jacobi rotations only ever act
    /// inside the `{|00>,|11>}` and `{|01>,|10>}` planes of an X matrix, so
    /// every column stays supported on one plane even for degenerate spectra.
    fn frame(&self, cand: &Candidate) -> CMatrix {
        let probs = hyperspherical_probs(&cand.prob_angles);
        let x = qstates::rank_x_matrix(self.rank, &cand.thetas, &probs);
        matcore::eig_hermitian(&x).expect("X mixture is Hermitian").vectors
    }

    fn delta(&self, frame: &CMatrix) -> f64 {
        (x_formula(&frame.conjugate(&self.lambda)) - self.target).abs()
    }

    fn finish(&self, frame: &CMatrix, attempts: usize) -> Option<ConversionResult> {
        let unitary = frame * &self.frame_g.adjoint();
        let converted = unitary.conjugate(self.rho.matrix()).hermitian_part();
        let anti_x = anti_x_of(&converted);
        let delta_c = (x_formula(&converted) - self.target).abs();
        let out = DensityMatrix::from_parts(&[2, 2], converted);
        let drift = matcore::spectrum_distance(&out.spectrum(), &self.spectrum);
        (anti_x <= X_TOL && delta_c <= self.tol_c && drift <= PRESERVE_TOL)
            .then_some(ConversionResult { converted: out, unitary, attempts, delta_c, anti_x })
    }
}

/// Searches rank-matched real X states for one whose eigenframe carries
/// `rho` to an X state of the same concurrence.
///
/// Candidates are drawn in batches of [`BATCH`]; after each batch the best
/// candidate so far is refined by a secant search on its first angle.
pub fn find_x_equivalent<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    tol_c: f64,
    budget: usize,
    rng: &mut R,
) -> Result<ConversionResult> {
    require_two_qubit(rho)?;
    if tol_c.is_nan() || tol_c <= 0.0 || budget == 0 {
        return Err(Error::Domain(format!("need tol_c > 0 and budget >= 1, got {tol_c} and {budget}")));
    }
    let eig = rho.eigen();
    let rank = matcore::rank_of_spectrum(&eig.values, matcore::RANK_TOL).max(1);
    let search = Search {
        rho,
        lambda: eig.vectors.adjoint().conjugate(rho.matrix()),
        frame_g: eig.vectors,
        spectrum: eig.values,
        target: concurrence(rho)?,
        rank,
        tol_c,
    };

    let mut attempts = 0;
    let mut best: Option<(f64, Candidate)> = None;
    while attempts < budget {
        let batch = BATCH.min(budget - attempts);
        for _ in 0..batch {
            attempts += 1;
            let cand = Candidate::random(rank, rng);
            let frame = search.frame(&cand);
            let d = search.delta(&frame);
            if d <= tol_c {
                if let Some(done) = search.finish(&frame, attempts) {
                    return Ok(done);
                }
            }
            if best.as_ref().is_none_or(|(b, _)| d < *b) {
                best = Some((d, cand));
            }
        }
        let Some((_, seed)) = best.clone() else { continue };
        let eval = |theta: f64, attempts: &mut usize| {
            *attempts += 1;
            let mut cand = seed.clone();
            cand.thetas[0] = theta;
            let frame = search.frame(&cand);
            let signed = x_formula(&frame.conjugate(&search.lambda)) - search.target;
            (signed, frame, cand)
        };
        let mut x0 = seed.thetas[0];
        let mut x1 = if x0 + 0.05 <= FRAC_PI_2 { x0 + 0.05 } else { x0 - 0.05 };
        let (mut f0, _, _) = eval(x0, &mut attempts);
        for _ in 0..SECANT_STEPS {
            if attempts >= budget {
                break;
            }
            let (f1, frame, cand) = eval(x1, &mut attempts);
            if f1.abs() <= tol_c {
                if let Some(done) = search.finish(&frame, attempts) {
                    return Ok(done);
                }
            }
            if best.as_ref().is_none_or(|(b, _)| f1.abs() < *b) {
                best = Some((f1.abs(), cand));
            }
            if (f1 - f0).abs() < 1e-15 {
                break;
            }
            let next = (x1 - f1 * (x1 - x0) / (f1 - f0)).clamp(0.0, FRAC_PI_2);
            (x0, f0, x1) = (x1, f1, next);
        }
    }
    Err(Error::SearchExhausted { best_delta_c: best.map_or(f64::INFINITY, |b| b.0), attempts })
}

/// Eigenvector matrix of the closed-form X state with concurrence `c` and purity `p`.
///
/// Columns pair with eigenvalues `(1+A)/2, (1-A)/2, 0, 0`, `A = sqrt(2P-1)`.
pub fn closed_form_frame(c: f64, p: f64) -> CMatrix {
    let a = (2.0 * p - 1.0).max(0.0).sqrt();
    let b = (2.0 * p - 1.0 - c * c).max(0.0).sqrt();
    let a_minus_b = if a + b > 0.0 { c * c / (a + b) } else { 0.0 };
    let mut f = CMatrix::zeros(4, 4);
    let n1 = c.hypot(a_minus_b);
    if n1 > 0.0 {
        f[(0, 0)] = cr(c / n1);
        f[(3, 0)] = cr(a_minus_b / n1);
    } else {
        f[(0, 0)] = cr(1.0);
    }
    let n2 = c.hypot(a + b);
    if n2 > 0.0 {
        f[(0, 1)] = cr(c / n2);
        f[(3, 1)] = cr(-(a + b) / n2);
    } else {
        f[(3, 1)] = cr(-1.0);
    }
    f[(2, 2)] = cr(1.0);
    f[(1, 3)] = cr(1.0);
    f
}

/// Exact conversion of a rank-≤2 two-qubit state with `P >= (1 + C^2)/2`.
pub fn closed_form_conversion(rho_g: &DensityMatrix) -> Result<ConversionResult> {
    require_two_qubit(rho_g)?;
    let eig = rho_g.eigen();
    let rank = matcore::rank_of_spectrum(&eig.values, matcore::RANK_TOL);
    if rank > 2 {
        return Err(Error::RankMismatch { input: rank, candidates: vec![1, 2] });
    }
    let c = concurrence(rho_g)?;
    let p = rho_g.purity();
    let lo = 0.5 * (1.0 + c * c);
    if p < lo - 1e-9 {
        return Err(Error::Domain(format!(
            "purity {p} below (1 + C^2)/2 = {lo}; no closed-form X partner exists"
        )));
    }
    let unitary = &closed_form_frame(c, p) * &eig.vectors.adjoint();
    let converted = unitary.conjugate(rho_g.matrix()).hermitian_part();
    let anti_x = anti_x_of(&converted);
    let delta_c = (x_formula(&converted) - c).abs();
    Ok(ConversionResult { converted: DensityMatrix::from_parts(&[2, 2], converted), unitary, attempts: 1, delta_c, anti_x })
}

/// Phases `eta_1..eta_4` of a two-qubit diagonal unitary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagPhases(pub [f64; 4]);

pub fn diag_unitary(phases: &DiagPhases) -> CMatrix {
    CMatrix::from_complex_diag(&phases.0.map(cis))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorMode {
    /// Phases must equal `a_i + b_j` exactly.
    Exact,
    /// Phases compared modulo `2 pi`.
    ModGlobalPhase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    pub factorizable: bool,
    /// `(a1, a2, b1, b2)` with `eta = (a1+b1, a1+b2, a2+b1, a2+b2)`.
    pub witness: Option<[f64; 4]>,
    /// The two necessary conditions as `(lhs, rhs)`:
    /// `eta4 - eta3 = eta2 - eta1` and `eta4 - eta2 = eta3 - eta1`.
    pub conditions: [(f64, f64); 2],
}

/// Solves `m x = rhs` by Gaussian elimination, returning a solution when the
/// system is consistent (free variables set to zero).
fn solve_consistent(m: [[f64; 4]; 4], rhs: [f64; 4], tol: f64) -> Option<[f64; 4]> {
    let mut a: Vec<[f64; 5]> = (0..4).map(|i| [m[i][0], m[i][1], m[i][2], m[i][3], rhs[i]]).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..4 {
        let Some(p) = (row..4).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())) else { break };
        if a[p][col].abs() <= tol {
            continue;
        }
        a.swap(row, p);
        for r in 0..4 {
            if r != row {
                let f = a[r][col] / a[row][col];
                let pivot = a[row];
                for (x, y) in a[r][col..].iter_mut().zip(&pivot[col..]) {
                    *x -= f * y;
                }
            }
        }
        pivots.push((row, col));
        row += 1;
        if row == 4 {
            break;
        }
    }
    if a[row..].iter().any(|r| r[4].abs() > tol) {
        return None;
    }
    let mut x = [0.0; 4];
    for &(r, c) in &pivots {
        x[c] = a[r][4] / a[r][c];
    }
    Some(x)
}

pub fn diag_factorizable(phases: &DiagPhases, mode: FactorMode) -> Factorization {
    let [e1, e2, e3, e4] = phases.0;
    let conditions = [(e4 - e3, e2 - e1), (e4 - e2, e3 - e1)];
    let witness = match mode {
        FactorMode::Exact => {
            let m = [[1.0, 0.0, 1.0, 0.0], [1.0, 0.0, 0.0, 1.0], [0.0, 1.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]];
            let scale = phases.0.iter().fold(1.0f64, |s, x| s.max(x.abs()));
            solve_consistent(m, phases.0, 1e-12 * scale).map(|x| [x[0], x[1], x[2], x[3]])
        }
        FactorMode::ModGlobalPhase => {
            let d = e1 + e4 - e2 - e3;
            let wrapped = d - 2.0 * PI * (d / (2.0 * PI)).round();
            (wrapped.abs() <= 1e-12).then_some([0.0, e3 - e1, e1, e2])
        }
    };
    Factorization { factorizable: witness.is_some(), witness, conditions }
}

/// Angles of the nonlocal X-preserving unitary.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct XUnitaryParams {
    pub epsilon: f64,
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub phi: f64,
    pub chi: f64,
}

impl XUnitaryParams {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut u = |hi: f64| rng.gen::<f64>() * hi;
        Self {
            epsilon: u(FRAC_PI_2),
            theta: u(FRAC_PI_2),
            alpha: u(2.0 * PI),
            beta: u(2.0 * PI),
            phi: u(2.0 * PI),
            chi: u(2.0 * PI),
        }
    }
}

/// Unitary acting separately on the `{|00>,|11>}` and `{|01>,|10>}` planes.
pub fn x_preserving_unitary(p: &XUnitaryParams) -> CMatrix {
    let (se, ce) = p.epsilon.sin_cos();
    let (st, ct) = p.theta.sin_cos();
    let mut u = CMatrix::zeros(4, 4);
    u[(0, 0)] = cis(p.alpha) * ce;
    u[(0, 3)] = cis(p.beta) * se;
    u[(1, 1)] = cis(p.phi) * ct;
    u[(1, 2)] = cis(p.chi) * st;
    u[(2, 1)] = -cis(-p.chi) * st;
    u[(2, 2)] = cis(-p.phi) * ct;
    u[(3, 0)] = -cis(-p.beta) * se;
    u[(3, 3)] = cis(-p.alpha) * ce;
    u
}

/// Two-level rotation on levels `y < x` (0-based):
/// `U[y,y] = cos t e^{i phi}`, `U[y,x] = sin t`, `U[x,y] = -sin t`, `U[x,x] = cos t e^{-i phi}`.
pub fn subspace_rotation(n: usize, x: usize, y: usize, theta: f64, phi: f64) -> Result<CMatrix> {
    if y >= x || x >= n {
        return Err(Error::Dimension(format!("need y < x < n, got x = {x}, y = {y}, n = {n}")));
    }
    let (s, c) = theta.sin_cos();
    let mut u = CMatrix::identity(n);
    u[(y, y)] = cis(phi) * c;
    u[(y, x)] = cr(s);
    u[(x, y)] = cr(-s);
    u[(x, x)] = cis(-phi) * c;
    Ok(u)
}

/// One factor `(x, y, theta, phi)` of an EPU candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubspaceParam {
    pub x: usize,
    pub y: usize,
    pub theta: f64,
    pub phi: f64,
}

/// `(U_1 U_2 ... U_k)^dagger D^dagger` with `D = diag(e^{i eta})`.
pub fn epu_candidate(params: &[SubspaceParam], diag: &[f64]) -> Result<CMatrix> {
    let n = diag.len();
    let mut prod = CMatrix::identity(n);
    for sp in params {
        prod = &prod * &subspace_rotation(n, sp.x, sp.y, sp.theta, sp.phi)?;
    }
    let d = CMatrix::from_complex_diag(&diag.iter().map(|&e| cis(-e)).collect::<Vec<_>>());
    Ok(&prod.adjoint() * &d)
}

fn entanglement(rho: &DensityMatrix) -> Result<f64> {
    match rho.dims() {
        [2, 2] => concurrence(rho),
        [2, 3] => measures::negativity_e(rho),
        d => Err(Error::Dimension(format!("no entanglement measure for dims {d:?}"))),
    }
}

/// Whether `U` preserves the entanglement of `rho` to within `tol`.
pub fn is_epu_for(u: &CMatrix, rho: &DensityMatrix, tol: f64) -> Result<bool> {
    let out = rho.transform(u)?;
    Ok((entanglement(&out)? - entanglement(rho)?).abs() <= tol)
}

/// `U_X eps_G^dagger rho_G eps_G U_X^dagger`: always X-shaped, entanglement not preserved.
pub fn x_transform_unconstrained(rho_g: &DensityMatrix, params: &XUnitaryParams) -> Result<DensityMatrix> {
    require_two_qubit(rho_g)?;
    let eig = rho_g.eigen();
    let u = &x_preserving_unitary(params) * &eig.vectors.adjoint();
    rho_g.transform(&u)
}

/// One branch `p (U_1 ⊗ U_2) rho (U_1 ⊗ U_2)^dagger` of a local channel.
#[derive(Debug, Clone)]
pub struct LocalTerm {
    pub p: f64,
    pub u1: CMatrix,
    pub u2: CMatrix,
}

pub fn local_doubly_stochastic(rho: &DensityMatrix, terms: &[LocalTerm]) -> Result<DensityMatrix> {
    require_two_qubit(rho)?;
    let probs: Vec<f64> = terms.iter().map(|t| t.p).collect();
    if terms.is_empty() || probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("invalid probability vector {probs:?}")));
    }
    let mut acc = CMatrix::zeros(4, 4);
    for t in terms {
        if t.u1.rows() != 2 || t.u2.rows() != 2 {
            return Err(Error::Dimension("local factors must be 2x2".into()));
        }
        let u = matcore::kron(&t.u1, &t.u2);
        acc = &acc + &rho.transform(&u)?.matrix().scale_real(t.p);
    }
    Ok(DensityMatrix::from_parts(&[2, 2], acc.hermitian_part()))
}

/// Outcome of matching a state's spectrum against H states of equal purity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HMatch {
    /// Lowest grid concurrence attaining the best spectral residual.
    pub concurrence: f64,
    /// Max-norm spectral distance at the match.
    pub residual: f64,
    /// Range of grid concurrences whose residual ties the best within 1e-12.
    /// A wide range means the spectrum does not determine `C` on this branch.
    pub tied_range: (f64, f64),
}

pub const H_GRID: usize = 1000;

/// Estimates concurrence by scanning H states at the input's purity and
/// choosing the one whose spectrum best matches.
pub fn h_match(rho: &DensityMatrix) -> Result<HMatch> {
    require_two_qubit(rho)?;
    let spectrum = rho.spectrum();
    let rank = matcore::rank_of_spectrum(&spectrum, matcore::RANK_TOL);
    let p = rho.purity();
    let mut seen = Vec::new();
    let mut scored = Vec::new();
    for k in 0..=H_GRID {
        let c = k as f64 / H_GRID as f64;
        let Ok(h) = qstates::h_state(c, p) else { continue };
        let hs = h.spectrum();
        let r = matcore::rank_of_spectrum(&hs, matcore::RANK_TOL);
        if !seen.contains(&r) {
            seen.push(r);
        }
        if r == rank {
            scored.push((c, matcore::spectrum_distance(&hs, &spectrum)));
        }
    }
    if scored.is_empty() {
        seen.sort_unstable();
        return Err(Error::RankMismatch { input: rank, candidates: seen });
    }
    let best = scored.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let tied: Vec<f64> = scored.iter().filter(|s| s.1 <= best + 1e-12).map(|s| s.0).collect();
    Ok(HMatch { concurrence: tied[0], residual: best, tied_range: (tied[0], *tied.last().unwrap()) })
}
