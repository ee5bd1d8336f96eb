//! Inner beamformers on the effective channel `H_g V_g`.
//!
//! The inner stage sees only the reduced `K_g x M_g` effective channel and
//! separates the users of one group. Both designs normalize every beam column
//! to unit 2-norm ("equal power allocation"); transmit power enters the link
//! through the per-stream symbol variance `p = P_T / K` instead, which makes
//! the total radiated power `p * Tr(V W W^H V^H) = P_T` exact for orthonormal
//! outer beamformers.

use serde::{Deserialize, Serialize};

use crate::channel::GroupChannel;
use crate::error::{Error, Result};
use crate::outer::Scenario;
use crate::spectral::{hermitian_eig, CMat, CVec, Cx, HermitianMatrix};

/// Relative singular-value threshold below which the effective channel is
/// declared rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// Inner beamformer family selectable in experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InnerKind {
    #[serde(rename = "ZF")]
    Zf,
    #[serde(rename = "RZF")]
    Rzf,
}

impl InnerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            InnerKind::Zf => "ZF",
            InnerKind::Rzf => "RZF",
        }
    }
}

impl std::fmt::Display for InnerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for InnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ZF" => Ok(InnerKind::Zf),
            "RZF" => Ok(InnerKind::Rzf),
            other => Err(Error::Config(format!(
                "unknown inner beamformer {other:?}; expected ZF or RZF"
            ))),
        }
    }
}

/// Inner beamformer `W_g` with unit-norm columns.
///
/// `per_user_gains[k]` is the diagonal entry of `H~_g W_g` for user `k`
/// (real and positive for ZF, where the product is exactly diagonal).
#[derive(Debug, Clone)]
pub struct InnerBeamformer {
    /// `M_g x K_g`, one unit-norm column per served user.
    pub matrix: CMat,
    pub per_user_gains: Vec<f64>,
}

/// Effective channel `H~_g = H_g V_g` seen by the inner beamformer.
pub fn effective_channel(h: &GroupChannel, v: &CMat) -> Result<CMat> {
    if h.antennas() != v.nrows() {
        return Err(Error::InvalidInput(format!(
            "channel has {} antennas but the outer beamformer has {} rows",
            h.antennas(),
            v.nrows()
        )));
    }
    if h.users() > v.ncols() {
        return Err(Error::InvalidInput(format!(
            "{} users exceed the outer dimension {}",
            h.users(),
            v.ncols()
        )));
    }
    Ok(h.as_matrix() * v)
}

fn check_full_row_rank(h_eff: &CMat) -> Result<()> {
    let sv = h_eff.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if max <= 0.0 || min / max < RANK_TOL {
        return Err(Error::SingularChannel);
    }
    Ok(())
}

fn normalize_columns(mut raw: CMat) -> Result<CMat> {
    for mut col in raw.column_iter_mut() {
        let norm = col.norm();
        if norm < 1e-300 {
            return Err(Error::SingularChannel);
        }
        col /= Cx::new(norm, 0.0);
    }
    Ok(raw)
}

fn diagonal_gains(h_eff: &CMat, w: &CMat) -> Vec<f64> {
    let prod = h_eff * w;
    (0..prod.nrows()).map(|k| prod[(k, k)].re).collect()
}

/// Zero-forcing inner beamformer with equal power allocation:
/// `W = H~^H (H~ H~^H)^{-1} P` with `P` diagonal, real, and positive, chosen
/// so that every column has unit norm. The product `H~ W` is then diagonal
/// with positive entries, i.e. intra-group interference is exactly nulled.
pub fn zf_inner(h: &GroupChannel, v: &CMat) -> Result<InnerBeamformer> {
    zf_from_effective(&effective_channel(h, v)?)
}

/// [`zf_inner`] on a precomputed effective channel.
pub fn zf_from_effective(h_eff: &CMat) -> Result<InnerBeamformer> {
    check_full_row_rank(h_eff)?;
    let gram = HermitianMatrix::new(h_eff * h_eff.adjoint())?;
    let gram_inv = gram
        .into_matrix()
        .try_inverse()
        .ok_or(Error::SingularChannel)?;
    let raw = h_eff.adjoint() * gram_inv;
    let w = normalize_columns(raw)?;
    let gains = diagonal_gains(h_eff, &w);
    Ok(InnerBeamformer {
        matrix: w,
        per_user_gains: gains,
    })
}

/// Zero-forcing beamformer built column by column from null-space
/// projections: user `k`'s beam is the normalized projection of their
/// effective channel onto the null space of the other users' effective
/// channels. Algebraically identical to [`zf_inner`]; kept as an independent
/// construction for cross-checks.
pub fn zf_via_projection(h: &GroupChannel, v: &CMat) -> Result<InnerBeamformer> {
    let h_eff = effective_channel(h, v)?;
    check_full_row_rank(&h_eff)?;
    let users = h_eff.nrows();
    let m_g = h_eff.ncols();
    let mut w = CMat::zeros(m_g, users);
    for k in 0..users {
        let basis = null_space_basis(&h_eff, k);
        // w_k ∝ U~ U~^H h~_k
        let h_k = CVec::from_iterator(m_g, h_eff.row(k).iter().map(|z| z.conj()));
        let coeff = basis.adjoint() * &h_k;
        let proj = &basis * coeff;
        let norm = proj.norm();
        if norm <= 1e-12 * h_k.norm().max(1e-300) {
            return Err(Error::SingularChannel);
        }
        let beam = proj / Cx::new(norm, 0.0);
        w.column_mut(k).copy_from(&beam);
    }
    let gains = diagonal_gains(&h_eff, &w);
    Ok(InnerBeamformer {
        matrix: w,
        per_user_gains: gains,
    })
}

/// Orthonormal basis `U~_{g_k}` (`M_g x (M_g - K_g + 1)`) of the null space
/// of the effective channel with user `k`'s row removed: the trailing
/// eigenvectors of the Gram matrix of the remaining rows.
pub fn null_space_basis(h_eff: &CMat, k: usize) -> CMat {
    let users = h_eff.nrows();
    let m_g = h_eff.ncols();
    if users == 1 {
        return CMat::identity(m_g, m_g);
    }
    let mut minus = CMat::zeros(users - 1, m_g);
    let mut row = 0;
    for j in 0..users {
        if j == k {
            continue;
        }
        minus.row_mut(row).copy_from(&h_eff.row(j));
        row += 1;
    }
    let gram = HermitianMatrix::new(minus.adjoint() * &minus)
        .expect("Gram matrix is square and finite");
    let eig = hermitian_eig(&gram);
    let null_dim = m_g - (users - 1);
    eig.vectors.columns(m_g - null_dim, null_dim).into_owned()
}

/// Regularized zero-forcing: raw columns of `H~^H (H~ H~^H + alpha I)^{-1}`,
/// each rescaled to unit norm. With `alpha = 0` and a full-rank effective
/// channel this reproduces [`zf_inner`] exactly.
pub fn rzf_inner(h: &GroupChannel, v: &CMat, alpha: f64) -> Result<InnerBeamformer> {
    rzf_from_effective(&effective_channel(h, v)?, alpha)
}

/// [`rzf_inner`] on a precomputed effective channel.
pub fn rzf_from_effective(h_eff: &CMat, alpha: f64) -> Result<InnerBeamformer> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "regularization factor {alpha} must be nonnegative"
        )));
    }
    if alpha == 0.0 {
        check_full_row_rank(h_eff)?;
    }
    let users = h_eff.nrows();
    let gram = h_eff * h_eff.adjoint() + CMat::identity(users, users) * Cx::new(alpha, 0.0);
    let gram_inv = gram.try_inverse().ok_or(Error::SingularChannel)?;
    let raw = h_eff.adjoint() * gram_inv;
    let w = normalize_columns(raw)?;
    let gains = diagonal_gains(h_eff, &w);
    Ok(InnerBeamformer {
        matrix: w,
        per_user_gains: gains,
    })
}

/// Relative rank check on an effective channel: smallest over largest
/// singular value must exceed [`RANK_TOL`].
pub fn is_full_row_rank(h_eff: &CMat) -> bool {
    check_full_row_rank(h_eff).is_ok()
}

/// Per-stream symbol power `p = P_T / K`: with unit-norm beam columns and
/// orthonormal outer beamformers the total radiated power is exactly `P_T`.
pub fn stream_power(s: &Scenario) -> f64 {
    s.total_power / s.total_users() as f64
}
