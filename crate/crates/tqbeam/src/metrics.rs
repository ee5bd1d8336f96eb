//! Per-realization link metrics: receiver-side SINR, transmitter-side SLNR,
//! sum rate, desired-signal and leakage powers, and the deterministic SLNR
//! lower bound that the outer beamformer design maximizes.
//!
//! Users are indexed group-major: group 0's users first, then group 1's, and
//! so on. All powers are linear.

use rand::Rng;

use crate::channel::{sample_channel, GroupChannel};
use crate::error::{Error, Result};
use crate::inner::{null_space_basis, zf_inner, InnerBeamformer};
use crate::outer::{solve_tqp, trace_ratio, Scenario, DEFAULT_MAX_ITER};
use crate::spectral::{hermitian_eig, hermitian_sqrt, CMat, HermitianMatrix};

/// Whether the SINR denominator carries the intra-group interference terms.
///
/// Zero-forcing inner beamforming nulls them exactly, so they are omitted;
/// regularized zero-forcing leaves residual intra-group interference, which
/// must be accumulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntraGroup {
    Omit,
    Include,
}

/// Metrics of a single channel realization.
#[derive(Debug, Clone)]
pub struct TrialMetrics {
    /// Receiver-side SINR per user, group-major order (linear).
    pub sinr: Vec<f64>,
    /// Transmitter-side SLNR per user, group-major order (linear).
    pub slnr: Vec<f64>,
    /// Sum rate over all users, bits/s/Hz.
    pub sum_rate: f64,
    /// Total desired-signal power (linear).
    pub signal_power: f64,
    /// Total inter-group leakage power (linear).
    pub leakage_power: f64,
}

impl TrialMetrics {
    /// Evaluates all metrics for one realization.
    pub fn evaluate(
        channels: &[GroupChannel],
        outers: &[CMat],
        inners: &[InnerBeamformer],
        sigma2: f64,
        p: f64,
        intra: IntraGroup,
    ) -> Result<Self> {
        let sinr = sinr_per_user(channels, outers, inners, sigma2, p, intra)?;
        let mut slnr = Vec::with_capacity(sinr.len());
        for g in 0..channels.len() {
            slnr.extend(slnr_per_user(channels, g, &outers[g], &inners[g], sigma2, p)?);
        }
        let sum_rate = sum_rate(&sinr)?;
        let (signal_power, leakage_power) = signal_and_leakage_powers(channels, outers, inners, p);
        Ok(Self {
            sinr,
            slnr,
            sum_rate,
            signal_power,
            leakage_power,
        })
    }
}

fn check_system(
    channels: &[GroupChannel],
    outers: &[CMat],
    inners: &[InnerBeamformer],
) -> Result<()> {
    if channels.len() != outers.len() || channels.len() != inners.len() {
        return Err(Error::InvalidInput(format!(
            "mismatched group counts: {} channels, {} outer, {} inner",
            channels.len(),
            outers.len(),
            inners.len()
        )));
    }
    for (g, ((h, v), w)) in channels.iter().zip(outers).zip(inners).enumerate() {
        if h.antennas() != v.nrows() || v.ncols() != w.matrix.nrows() || h.users() != w.matrix.ncols()
        {
            return Err(Error::InvalidInput(format!(
                "group {g}: inconsistent dimensions between channel, outer, and inner beamformer"
            )));
        }
    }
    Ok(())
}

/// Receiver-side SINR per user.
///
/// For user `k` of group `g`, the numerator is `p |h^H V_g w_{g_k}|^2`; the
/// denominator accumulates the inter-group streams `p |h^H V_{g'} w_{g'_j}|^2`
/// for every `g' != g`, the intra-group streams when `intra` says so, and the
/// noise power.
pub fn sinr_per_user(
    channels: &[GroupChannel],
    outers: &[CMat],
    inners: &[InnerBeamformer],
    sigma2: f64,
    p: f64,
    intra: IntraGroup,
) -> Result<Vec<f64>> {
    check_system(channels, outers, inners)?;
    let groups = channels.len();
    let mut out = Vec::new();
    for g in 0..groups {
        for k in 0..channels[g].users() {
            let h = channels[g].user_channel(k);
            let mut num = 0.0;
            let mut interference = 0.0;
            for gp in 0..groups {
                // Row vector h^H V_{g'}: the receive response to each beam.
                let response = h.adjoint() * &outers[gp];
                let gains = &response * &inners[gp].matrix;
                for (j, z) in gains.iter().enumerate() {
                    let power = p * z.norm_sqr();
                    if gp == g {
                        if j == k {
                            num = power;
                        } else if intra == IntraGroup::Include {
                            interference += power;
                        }
                    } else {
                        interference += power;
                    }
                }
            }
            out.push(num / (interference + sigma2));
        }
    }
    Ok(out)
}

/// Transmitter-side SLNR for every user of group `g`.
///
/// The numerator is the desired-user signal power; the denominator is the
/// power user `k`'s beam leaks onto every user of every other group, plus
/// noise. Depends only on group `g`'s own beamformers.
pub fn slnr_per_user(
    channels: &[GroupChannel],
    g: usize,
    v_g: &CMat,
    w_g: &InnerBeamformer,
    sigma2: f64,
    p: f64,
) -> Result<Vec<f64>> {
    if g >= channels.len() {
        return Err(Error::InvalidInput(format!(
            "group index {g} out of range ({} groups)",
            channels.len()
        )));
    }
    let users = channels[g].users();
    if v_g.ncols() != w_g.matrix.nrows() || w_g.matrix.ncols() != users {
        return Err(Error::InvalidInput(format!(
            "group {g}: inconsistent beamformer dimensions"
        )));
    }
    // Beams lifted back to antenna space: columns of V_g W_g.
    let beams = v_g * &w_g.matrix;
    let mut out = Vec::with_capacity(users);
    for k in 0..users {
        let beam = beams.column(k);
        let h = channels[g].user_channel(k);
        let num = p * (h.adjoint() * beam)[(0, 0)].norm_sqr();
        let mut leakage = 0.0;
        for (gp, other) in channels.iter().enumerate() {
            if gp == g {
                continue;
            }
            // Rows of H_{g'} are h_{g'_j}^H already.
            let responses = other.as_matrix() * beam;
            leakage += p * responses.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        out.push(num / (leakage + sigma2));
    }
    Ok(out)
}

/// Sum rate `sum_k log2(1 + sinr_k)` in bits/s/Hz.
pub fn sum_rate(sinr: &[f64]) -> Result<f64> {
    if let Some(bad) = sinr.iter().find(|&&s| !(s >= 0.0)) {
        return Err(Error::InvalidInput(format!(
            "SINR entries must be nonnegative, got {bad}"
        )));
    }
    Ok(sinr.iter().map(|&s| (1.0 + s).log2()).sum())
}

/// Total desired-group signal power and total inter-group leakage power,
/// summed over all groups and users.
pub fn signal_and_leakage_powers(
    channels: &[GroupChannel],
    outers: &[CMat],
    inners: &[InnerBeamformer],
    p: f64,
) -> (f64, f64) {
    let groups = channels.len();
    let mut signal = 0.0;
    let mut leakage = 0.0;
    for g in 0..groups {
        let beams = &outers[g] * &inners[g].matrix;
        // Responses of every group's users to group g's beams.
        for (gp, other) in channels.iter().enumerate() {
            let responses = other.as_matrix() * &beams;
            if gp == g {
                for k in 0..other.users() {
                    signal += p * responses[(k, k)].norm_sqr();
                }
            } else {
                leakage += p * responses.iter().map(|z| z.norm_sqr()).sum::<f64>();
            }
        }
    }
    (signal, leakage)
}

/// Deterministic lower bound on the average SLNR of group `g`:
/// `Tr(V^H R_{g,1} V) / Tr(V^H R_{g,2} V)`, evaluated with unit symbol power
/// (the bound's derivation carries no transmit-power scaling).
pub fn slnr_lower_bound(v_g: &CMat, r1: &HermitianMatrix, r2: &HermitianMatrix) -> Result<f64> {
    trace_ratio(v_g, r1, r2)
}

/// Outcome of the executable checks behind the average-signal-power bound.
///
/// - `l1`: the ZF beam gain identity `|h^H V w|^2 = h^H V U~ U~^H V^H h`,
///   reported as the largest absolute deviation seen.
/// - `l2`: conditional-mean check. With the other users' effective channels
///   frozen, the conditional mean of the beam gain equals
///   `Tr(U~^H V^H R_g V U~)`; each frozen draw is accepted when the empirical
///   mean of fresh resamples lands within three standard errors.
/// - `l4`: the deterministic inequality
///   `Tr(Sigma_{g_k}) >= Tr(V^H R_g V) - (K_g - 1) lambda_g`, counted over
///   every realization and user.
#[derive(Debug, Clone)]
pub struct LemmaReport {
    pub realizations: usize,
    pub l1_max_error: f64,
    pub l2_draws: usize,
    pub l2_within_3se: usize,
    pub l4_checks: usize,
    pub l4_violations: usize,
}

impl LemmaReport {
    pub fn l2_fraction(&self) -> f64 {
        if self.l2_draws == 0 {
            return 1.0;
        }
        self.l2_within_3se as f64 / self.l2_draws as f64
    }
}

/// Runs the appendix identity/inequality checks on a small scenario.
///
/// Outer beamformers come from the trace-quotient design; `realizations`
/// channel draws feed the L1/L4 checks, and `l2_draws` frozen interference
/// patterns with `l2_resamples` fresh desired-channel draws each feed the
/// conditional-mean check.
pub fn verify_appendix_lemmas<R: Rng + ?Sized>(
    rng: &mut R,
    scenario: &Scenario,
    realizations: usize,
    l2_draws: usize,
    l2_resamples: usize,
) -> Result<LemmaReport> {
    use crate::outer::{build_leakage_matrix, build_signal_matrix};

    let groups = scenario.group_count();
    let mut outers = Vec::with_capacity(groups);
    for g in 0..groups {
        let r1 = build_signal_matrix(scenario, g)?;
        let r2 = build_leakage_matrix(scenario, g)?;
        outers.push(solve_tqp(&r1, &r2, scenario.groups[g].outer_dim, 1e-6, DEFAULT_MAX_ITER)?.matrix);
    }
    let sqrts: Vec<CMat> = scenario
        .groups
        .iter()
        .map(|grp| hermitian_sqrt(&grp.covariance))
        .collect::<Result<_>>()?;

    let mut report = LemmaReport {
        realizations,
        l1_max_error: 0.0,
        l2_draws: 0,
        l2_within_3se: 0,
        l4_checks: 0,
        l4_violations: 0,
    };

    for g in 0..groups {
        let grp = &scenario.groups[g];
        let v = &outers[g];
        let lambda = hermitian_eig(&grp.covariance).values[0];
        // V^H R_g V and its trace feed both bounds.
        let vrv = HermitianMatrix::new(v.adjoint() * grp.covariance.as_matrix() * v)?;
        let bound = vrv.trace() - (grp.users as f64 - 1.0) * lambda;

        for _ in 0..realizations {
            let mut h_rows = CMat::zeros(grp.users, scenario.antennas);
            for k in 0..grp.users {
                let h = sample_channel(&sqrts[g], rng)?;
                for (j, z) in h.iter().enumerate() {
                    h_rows[(k, j)] = z.conj();
                }
            }
            let channel = GroupChannel::from_matrix(h_rows);
            let h_eff = channel.as_matrix() * v;
            let w = zf_inner(&channel, v)?;

            for k in 0..grp.users {
                let h_k = channel.user_channel(k);
                let basis = null_space_basis(&h_eff, k);
                // L1: |h^H V w|^2 equals the squared projection norm.
                let gain = (h_k.adjoint() * v * w.matrix.column(k))[(0, 0)].norm_sqr();
                let proj = (basis.adjoint() * v.adjoint() * &h_k).norm_squared();
                report.l1_max_error = report.l1_max_error.max((gain - proj).abs());

                // L4: Tr(Sigma_{g_k}) >= Tr(V^H R_g V) - (K_g - 1) lambda_g.
                let sigma_trace = (basis.adjoint() * vrv.as_matrix() * &basis).trace().re;
                report.l4_checks += 1;
                if sigma_trace < bound - 1e-10 * (1.0 + bound.abs()) {
                    report.l4_violations += 1;
                }
            }
        }

        // L2: freeze the interfering users, resample the desired channel.
        for _ in 0..l2_draws {
            let mut h_rows = CMat::zeros(grp.users, scenario.antennas);
            for k in 0..grp.users {
                let h = sample_channel(&sqrts[g], rng)?;
                for (j, z) in h.iter().enumerate() {
                    h_rows[(k, j)] = z.conj();
                }
            }
            let h_eff = GroupChannel::from_matrix(h_rows).as_matrix() * v;
            let k = 0;
            let basis = null_space_basis(&h_eff, k);
            let sigma = basis.adjoint() * vrv.as_matrix() * &basis;
            let target = sigma.trace().re;

            // Map a fresh antenna-space draw straight to U~^H V^H h.
            let lift = basis.adjoint() * v.adjoint();
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..l2_resamples {
                let h = sample_channel(&sqrts[g], rng)?;
                let s: f64 = (&lift * h).norm_squared();
                sum += s;
                sum_sq += s * s;
            }
            let n = l2_resamples as f64;
            let mean = sum / n;
            let var = (sum_sq - n * mean * mean).max(0.0) / (n - 1.0);
            let se = (var / n).sqrt();
            report.l2_draws += 1;
            if (mean - target).abs() <= 3.0 * se {
                report.l2_within_3se += 1;
            }
        }
    }
    Ok(report)
}
