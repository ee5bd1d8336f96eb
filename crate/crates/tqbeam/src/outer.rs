//! Statistics-only outer beamformer design.
//!
//! Four designs are provided for the per-group outer beamformer `V_g`
//! (an `M x M_g` matrix constrained to orthonormal columns):
//!
//! - [`solve_tqp`]: iterative trace-quotient maximization of
//!   `Tr(V^H R_{g,1} V) / Tr(V^H R_{g,2} V)`, the proposed design. Each
//!   iteration solves a trace-difference problem whose maximizer is the
//!   dominant eigenspace of the Hermitian matrix `R_{g,1} - rho_n R_{g,2}`,
//!   so the orthonormality constraint is free. The objective sequence is
//!   monotone non-decreasing and converges to the global maximum.
//! - [`solve_p3_generalized`]: the relaxed problem, solved by dominant
//!   generalized eigenvectors of the pencil `(R_{g,1}, R_{g,2})` followed by
//!   an SVD re-orthonormalization.
//! - [`solve_weighted_difference`]: dominant eigenvectors of
//!   `R_g - (1/w) * sum of interfering covariances` for a fixed weight `w`.
//! - [`solve_block_diagonalization`]: dominant eigenvectors of `R_g`
//!   projected onto the null space of the interfering groups' dominant
//!   eigenspaces.
//!
//! `R_{g,1}` and `R_{g,2}` are the signal and leakage statistics matrices
//! built by [`build_signal_matrix`] and [`build_leakage_matrix`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    generalized_eig_hpd, hermitian_eig, thin_svd, top_k_eigvecs, CMat, Cx, HermitianMatrix,
};

/// Iteration cap for the trace-quotient solver. Convergence takes a handful
/// of steps in practice; the cap only guards pathological inputs.
pub const DEFAULT_MAX_ITER: usize = 1000;

/// Stopping tolerance on successive objective values.
pub const DEFAULT_EPS: f64 = 1e-4;

/// Default fraction of an interfering group's covariance trace that its
/// retained dominant eigenvectors must capture in block diagonalization.
pub const DEFAULT_ENERGY_THRESHOLD: f64 = 0.95;

/// Outer beamformer design method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OuterMethod {
    #[serde(rename = "TQP")]
    Tqp,
    #[serde(rename = "P3_SVD")]
    P3Svd,
    #[serde(rename = "WEIGHTED_DIFF")]
    WeightedDiff,
    #[serde(rename = "BD")]
    Bd,
}

impl OuterMethod {
    pub const ALL: [OuterMethod; 4] = [
        OuterMethod::Tqp,
        OuterMethod::P3Svd,
        OuterMethod::WeightedDiff,
        OuterMethod::Bd,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            OuterMethod::Tqp => "TQP",
            OuterMethod::P3Svd => "P3_SVD",
            OuterMethod::WeightedDiff => "WEIGHTED_DIFF",
            OuterMethod::Bd => "BD",
        }
    }
}

impl std::fmt::Display for OuterMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for OuterMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "TQP" => Ok(OuterMethod::Tqp),
            "P3_SVD" => Ok(OuterMethod::P3Svd),
            "WEIGHTED_DIFF" => Ok(OuterMethod::WeightedDiff),
            "BD" => Ok(OuterMethod::Bd),
            other => Err(Error::Config(format!(
                "unknown method {other:?}; expected TQP, P3_SVD, WEIGHTED_DIFF, or BD"
            ))),
        }
    }
}

/// Per-group configuration inside a [`Scenario`].
#[derive(Debug, Clone)]
pub struct GroupConfig {
    /// Channel covariance `R_g`, `M x M`.
    pub covariance: HermitianMatrix,
    /// Number of served users `K_g`.
    pub users: usize,
    /// Outer beamformer dimension `M_g`.
    pub outer_dim: usize,
    /// Number of data streams `S_g` (defaults to `K_g`).
    pub streams: usize,
}

/// Full system description: per-group covariances and sizes, noise power,
/// and the total transmit power budget.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub antennas: usize,
    pub groups: Vec<GroupConfig>,
    /// Noise power sigma^2 (linear).
    pub noise_power: f64,
    /// Total transmit power P_T (linear).
    pub total_power: f64,
}

impl Scenario {
    pub fn new(
        antennas: usize,
        groups: Vec<GroupConfig>,
        noise_power: f64,
        total_power: f64,
    ) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::InvalidInput("scenario needs >= 1 group".into()));
        }
        if !(noise_power.is_finite() && noise_power > 0.0) {
            return Err(Error::InvalidInput(format!(
                "noise power {noise_power} must be positive"
            )));
        }
        if !(total_power.is_finite() && total_power > 0.0) {
            return Err(Error::InvalidInput(format!(
                "transmit power {total_power} must be positive"
            )));
        }
        for (g, grp) in groups.iter().enumerate() {
            if grp.covariance.dim() != antennas {
                return Err(Error::InvalidInput(format!(
                    "group {g}: covariance is {}x{} but the array has {antennas} antennas",
                    grp.covariance.dim(),
                    grp.covariance.dim()
                )));
            }
            if grp.users == 0 {
                return Err(Error::InvalidInput(format!("group {g}: needs >= 1 user")));
            }
            // K_g <= M_g keeps the ZF null space non-empty (N_g = M_g - K_g + 1 >= 1).
            if grp.users > grp.outer_dim {
                return Err(Error::InvalidInput(format!(
                    "group {g}: K_g = {} exceeds the outer dimension M_g = {}",
                    grp.users, grp.outer_dim
                )));
            }
            if grp.outer_dim > antennas {
                return Err(Error::InvalidInput(format!(
                    "group {g}: M_g = {} exceeds M = {antennas}",
                    grp.outer_dim
                )));
            }
            if grp.streams == 0 || grp.streams > grp.outer_dim {
                return Err(Error::InvalidInput(format!(
                    "group {g}: S_g = {} outside 1..=M_g = {}",
                    grp.streams, grp.outer_dim
                )));
            }
        }
        Ok(Self {
            antennas,
            groups,
            noise_power,
            total_power,
        })
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    /// Total user count `K = sum K_g`.
    pub fn total_users(&self) -> usize {
        self.groups.iter().map(|g| g.users).sum()
    }

    fn check_group(&self, g: usize) -> Result<()> {
        if g >= self.groups.len() {
            return Err(Error::InvalidInput(format!(
                "group index {g} out of range ({} groups)",
                self.groups.len()
            )));
        }
        Ok(())
    }
}

/// Outer beamformer `V_g` with solver diagnostics.
///
/// `rho_trace` holds the trace-quotient objective value of each iteration for
/// the TQP design; it is empty for the one-shot designs, whose `iterations`
/// count is zero.
#[derive(Debug, Clone)]
pub struct OuterBeamformer {
    /// `M x M_g`, orthonormal columns.
    pub matrix: CMat,
    pub rho_trace: Vec<f64>,
    pub iterations: usize,
    pub method: OuterMethod,
}

/// Leakage statistics matrix
/// `R_{g,2} = sum_{g' != g} K_{g'} R_{g'} + (sigma^2 / M_g) I`,
/// positive definite by construction.
pub fn build_leakage_matrix(s: &Scenario, g: usize) -> Result<HermitianMatrix> {
    s.check_group(g)?;
    let m = s.antennas;
    let mut acc = CMat::zeros(m, m);
    for (gp, grp) in s.groups.iter().enumerate() {
        if gp == g {
            continue;
        }
        acc += grp.covariance.as_matrix() * Cx::new(grp.users as f64, 0.0);
    }
    let ridge = s.noise_power / s.groups[g].outer_dim as f64;
    acc += CMat::identity(m, m) * Cx::new(ridge, 0.0);
    HermitianMatrix::new(acc)
}

/// Signal statistics matrix
/// `R_{g,1} = R_g - ((K_g - 1) / M_g) lambda_g I`, where `lambda_g` is the
/// largest eigenvalue of `R_g`. Hermitian, possibly indefinite; indefiniteness
/// is accepted as-is since only the leakage matrix must be definite.
pub fn build_signal_matrix(s: &Scenario, g: usize) -> Result<HermitianMatrix> {
    s.check_group(g)?;
    let grp = &s.groups[g];
    let lambda = hermitian_eig(&grp.covariance).values[0];
    let shift = (grp.users as f64 - 1.0) / grp.outer_dim as f64 * lambda;
    let m = s.antennas;
    let mat = grp.covariance.as_matrix() - CMat::identity(m, m) * Cx::new(shift, 0.0);
    HermitianMatrix::new(mat)
}

/// Trace quotient `Tr(V^H R1 V) / Tr(V^H R2 V)`.
pub fn trace_ratio(v: &CMat, r1: &HermitianMatrix, r2: &HermitianMatrix) -> Result<f64> {
    let num = (v.adjoint() * r1.as_matrix() * v).trace().re;
    let den = (v.adjoint() * r2.as_matrix() * v).trace().re;
    if den <= 0.0 {
        return Err(Error::NotPositiveDefinite(format!(
            "trace-quotient denominator {den} is not positive"
        )));
    }
    Ok(num / den)
}

fn difference_matrix(r1: &HermitianMatrix, r2: &HermitianMatrix, rho: f64) -> HermitianMatrix {
    let mat = r1.as_matrix() - r2.as_matrix() * Cx::new(rho, 0.0);
    HermitianMatrix::new(mat).expect("difference of Hermitian matrices is Hermitian")
}

/// Trace-quotient outer beamformer starting from the generalized-eigenvector
/// initialization (the re-orthonormalized relaxed solution).
pub fn solve_tqp(
    r1: &HermitianMatrix,
    r2: &HermitianMatrix,
    outer_dim: usize,
    eps: f64,
    max_iter: usize,
) -> Result<OuterBeamformer> {
    let init = solve_p3_generalized(r1, r2, outer_dim)?;
    solve_tqp_from(r1, r2, init.matrix, eps, max_iter)
}

/// Trace-quotient iteration from an explicit starting frame `v0` with
/// orthonormal columns.
///
/// Iteration `n` evaluates the quotient `rho_n` at the current frame, then
/// replaces the frame with the `M_g` dominant eigenvectors of
/// `R1 - rho_n R2`, stopping once `|rho_n - rho_{n-1}| < eps`. The first
/// comparison is against `rho_0 = -inf`, so it can never trigger at `n = 1`.
pub fn solve_tqp_from(
    r1: &HermitianMatrix,
    r2: &HermitianMatrix,
    v0: CMat,
    eps: f64,
    max_iter: usize,
) -> Result<OuterBeamformer> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidInput(format!(
            "stopping tolerance {eps} must be positive"
        )));
    }
    if max_iter == 0 {
        return Err(Error::InvalidInput("max_iter must be >= 1".into()));
    }
    let outer_dim = v0.ncols();
    if outer_dim == 0 || outer_dim > r1.dim() || v0.nrows() != r1.dim() {
        return Err(Error::InvalidInput(format!(
            "initial frame is {}x{} for a dimension-{} pencil",
            v0.nrows(),
            outer_dim,
            r1.dim()
        )));
    }

    let mut v = v0;
    let mut rho_prev = f64::NEG_INFINITY;
    let mut rho_trace = Vec::new();
    for n in 1..=max_iter {
        let rho = trace_ratio(&v, r1, r2)?;
        rho_trace.push(rho);
        v = top_k_eigvecs(&difference_matrix(r1, r2, rho), outer_dim)?;
        if (rho - rho_prev).abs() < eps {
            return Ok(OuterBeamformer {
                matrix: v,
                rho_trace,
                iterations: n,
                method: OuterMethod::Tqp,
            });
        }
        rho_prev = rho;
    }
    Err(Error::ConvergenceFailure { rho_trace })
}

/// Relaxed outer beamformer: stack the `M_g` dominant generalized
/// eigenvectors of the pencil `(R1, R2)` and re-orthonormalize them through a
/// thin SVD, keeping the left factor.
pub fn solve_p3_generalized(
    r1: &HermitianMatrix,
    r2: &HermitianMatrix,
    outer_dim: usize,
) -> Result<OuterBeamformer> {
    let (_, xi) = generalized_eig_hpd(r1, r2, outer_dim)?;
    let svd = thin_svd(&xi)?;
    Ok(OuterBeamformer {
        matrix: svd.u,
        rho_trace: Vec::new(),
        iterations: 0,
        method: OuterMethod::P3Svd,
    })
}

/// Fixed-weight baseline: the `M_g` dominant eigenvectors of
/// `R_g - (1/w) * sum_{g' != g} R_{g'}`.
pub fn solve_weighted_difference(s: &Scenario, g: usize, w: f64) -> Result<OuterBeamformer> {
    s.check_group(g)?;
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::InvalidInput(format!(
            "weighting factor {w} must be positive"
        )));
    }
    let m = s.antennas;
    let mut acc = CMat::zeros(m, m);
    for (gp, grp) in s.groups.iter().enumerate() {
        if gp != g {
            acc += grp.covariance.as_matrix();
        }
    }
    let mat = s.groups[g].covariance.as_matrix() - acc * Cx::new(1.0 / w, 0.0);
    let diff = HermitianMatrix::new(mat)?;
    Ok(OuterBeamformer {
        matrix: top_k_eigvecs(&diff, s.groups[g].outer_dim)?,
        rho_trace: Vec::new(),
        iterations: 0,
        method: OuterMethod::WeightedDiff,
    })
}

/// Block diagonalization baseline.
///
/// Per interfering group, the smallest set of dominant eigenvectors capturing
/// `energy_threshold` of the covariance trace is retained; the desired
/// group's `M_g` dominant eigenvectors are projected onto the orthogonal
/// complement of all retained vectors and re-orthonormalized. Returns
/// [`Error::InfeasibleBd`] when that complement has fewer than `M_g`
/// dimensions.
pub fn solve_block_diagonalization(
    s: &Scenario,
    g: usize,
    energy_threshold: f64,
) -> Result<OuterBeamformer> {
    s.check_group(g)?;
    if !(energy_threshold > 0.0 && energy_threshold <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "energy threshold {energy_threshold} outside (0, 1]"
        )));
    }
    let m = s.antennas;
    let outer_dim = s.groups[g].outer_dim;
    let desired = top_k_eigvecs(&s.groups[g].covariance, outer_dim)?;

    // Dominant eigenvectors of every interfering covariance.
    let mut retained: Vec<CMat> = Vec::new();
    for (gp, grp) in s.groups.iter().enumerate() {
        if gp == g {
            continue;
        }
        let eig = hermitian_eig(&grp.covariance);
        let total: f64 = eig.values.iter().sum();
        if total <= 0.0 {
            continue;
        }
        let mut captured = 0.0;
        let mut rank = 0;
        for &lam in &eig.values {
            captured += lam;
            rank += 1;
            if captured >= energy_threshold * total {
                break;
            }
        }
        retained.push(eig.vectors.columns(0, rank).into_owned());
    }

    if retained.is_empty() {
        // No interference: the null space is everything.
        return Ok(OuterBeamformer {
            matrix: desired,
            rho_trace: Vec::new(),
            iterations: 0,
            method: OuterMethod::Bd,
        });
    }

    let total_cols: usize = retained.iter().map(|u| u.ncols()).sum();
    let mut stack = CMat::zeros(m, total_cols);
    let mut offset = 0;
    for u in &retained {
        stack.columns_mut(offset, u.ncols()).copy_from(u);
        offset += u.ncols();
    }

    // Null space of the stacked interference eigenvectors, read off the
    // trailing eigenvectors of the projector stack * stack^H.
    let proj = HermitianMatrix::new(&stack * stack.adjoint())?;
    let eig = hermitian_eig(&proj);
    let tol = 1e-10 * eig.values[0].max(1.0);
    let null_dim = eig.values.iter().filter(|&&lam| lam <= tol).count();
    if null_dim < outer_dim {
        return Err(Error::InfeasibleBd {
            needed: outer_dim,
            available: null_dim,
        });
    }
    let null_basis = eig.vectors.columns(m - null_dim, null_dim).into_owned();

    // Project the desired eigenvectors into null-space coordinates and
    // orthonormalize there, which keeps the result exactly inside the null
    // space (and therefore orthogonal to every retained vector).
    let b = null_basis.adjoint() * desired;
    let svd = thin_svd(&b)?;
    Ok(OuterBeamformer {
        matrix: null_basis * svd.u,
        rho_trace: Vec::new(),
        iterations: 0,
        method: OuterMethod::Bd,
    })
}

/// Designs the outer beamformer of group `g` by the requested method.
pub fn design_outer(
    s: &Scenario,
    g: usize,
    method: OuterMethod,
    eps: f64,
    max_iter: usize,
    w: f64,
    energy_threshold: f64,
) -> Result<OuterBeamformer> {
    match method {
        OuterMethod::Tqp => {
            let r1 = build_signal_matrix(s, g)?;
            let r2 = build_leakage_matrix(s, g)?;
            solve_tqp(&r1, &r2, s.groups[g].outer_dim, eps, max_iter)
        }
        OuterMethod::P3Svd => {
            let r1 = build_signal_matrix(s, g)?;
            let r2 = build_leakage_matrix(s, g)?;
            solve_p3_generalized(&r1, &r2, s.groups[g].outer_dim)
        }
        OuterMethod::WeightedDiff => solve_weighted_difference(s, g, w),
        OuterMethod::Bd => solve_block_diagonalization(s, g, energy_threshold),
    }
}
