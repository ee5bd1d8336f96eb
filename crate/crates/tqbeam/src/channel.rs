//! One-ring channel covariance construction and correlated Rayleigh channel
//! sampling, reproducibly seeded.
//!
//! A user surrounded by a ring of scatterers at azimuth `theta` with angle
//! spread `delta` sees the base-station ULA through the covariance
//!
//! ```text
//! [R]_{k,l} = (1 / 2 delta) * integral over [theta - delta, theta + delta]
//!             of exp(-i 2 pi (k - l) D sin(w)) dw
//! ```
//!
//! with `D` the antenna spacing in carrier wavelengths. Channel realizations
//! are `h = R^{1/2} g` with `g ~ CN(0, I)`.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::spectral::{hermitian_sqrt, CMat, CVec, Cx, HermitianMatrix};

/// One-ring scattering geometry for a single user group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneRingParams {
    /// Number of ULA antennas `M`.
    pub antennas: usize,
    /// Center azimuth of the scattering ring, radians, within (-pi/2, pi/2).
    pub theta: f64,
    /// Angle spread (half-width of the scattering interval), radians,
    /// within (0, pi/2).
    pub delta: f64,
    /// Antenna spacing in carrier wavelengths (D = spacing / lambda_c).
    pub spacing: f64,
}

impl OneRingParams {
    pub fn new(antennas: usize, theta: f64, delta: f64, spacing: f64) -> Result<Self> {
        if antennas == 0 {
            return Err(Error::InvalidInput("antenna count must be >= 1".into()));
        }
        if !(theta.is_finite() && theta.abs() < PI / 2.0) {
            return Err(Error::InvalidInput(format!(
                "center angle {theta} outside (-pi/2, pi/2)"
            )));
        }
        if !(delta.is_finite() && delta > 0.0 && delta < PI / 2.0) {
            return Err(Error::InvalidInput(format!(
                "angle spread {delta} outside (0, pi/2)"
            )));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidInput(format!(
                "antenna spacing {spacing} must be positive"
            )));
        }
        Ok(Self {
            antennas,
            theta,
            delta,
            spacing,
        })
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// Legendre recurrence with Chebyshev initial guesses.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = pk;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Roots come out in descending order; mirror for the symmetric half.
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        // Middle node of odd rules sits exactly at the origin.
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Node count for the covariance quadrature: the fastest-oscillating entry
/// (antenna lag `M - 1`) accrues about `4 pi D (M-1) delta` radians of phase
/// over the integration interval; this rule keeps at least 16 nodes per
/// oscillation period, with a floor of 128 nodes.
fn quadrature_nodes(p: &OneRingParams) -> usize {
    let oscillation = 32.0 * p.spacing * (p.antennas.saturating_sub(1)) as f64 * p.delta;
    (oscillation.ceil() as usize).max(128)
}

/// One-ring channel covariance matrix, `M x M` Hermitian Toeplitz with an
/// exactly unit diagonal.
pub fn one_ring_covariance(p: &OneRingParams) -> HermitianMatrix {
    let m = p.antennas;
    let n = quadrature_nodes(p);
    let (nodes, weights) = gauss_legendre(n);
    let half_width = p.delta;
    let center = p.theta;
    // Precompute sin(w) and quadrature weights mapped onto the interval;
    // the 1/(2 delta) prefactor cancels the interval length.
    let sin_w: Vec<f64> = nodes
        .iter()
        .map(|&t| (center + half_width * t).sin())
        .collect();
    let w_norm: Vec<f64> = weights.iter().map(|&w| w * 0.5).collect();

    // The integrand depends only on the antenna lag d = k - l.
    let mut lag = vec![Cx::new(0.0, 0.0); m];
    lag[0] = Cx::new(1.0, 0.0);
    for (d, entry) in lag.iter_mut().enumerate().skip(1) {
        let phase = -2.0 * PI * d as f64 * p.spacing;
        let mut acc = Cx::new(0.0, 0.0);
        for (s, w) in sin_w.iter().zip(w_norm.iter()) {
            let arg = phase * s;
            acc += Cx::new(w * arg.cos(), w * arg.sin());
        }
        *entry = acc;
    }

    let mat = CMat::from_fn(m, m, |k, l| {
        if k == l {
            Cx::new(1.0, 0.0)
        } else if k > l {
            lag[k - l]
        } else {
            lag[l - k].conj()
        }
    });
    HermitianMatrix::new(mat).expect("one-ring covariance is square and finite")
}

/// Channel matrix for the users of one group: row `k` is `h_{g_k}^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupChannel {
    matrix: CMat,
}

impl GroupChannel {
    pub fn from_matrix(matrix: CMat) -> Self {
        Self { matrix }
    }

    /// `K_g x M` stacked conjugate-transposed channels.
    pub fn as_matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn users(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn antennas(&self) -> usize {
        self.matrix.ncols()
    }

    /// Channel column vector `h_{g_k}` of user `k` (conjugate of row `k`).
    pub fn user_channel(&self, k: usize) -> CVec {
        CVec::from_iterator(
            self.matrix.ncols(),
            self.matrix.row(k).iter().map(|z| z.conj()),
        )
    }
}

/// Draws one correlated channel `h = sqrtR * g` with `g ~ CN(0, I)`: each
/// entry of `g` has independent `N(0, 1/2)` real and imaginary parts.
pub fn sample_channel<R: Rng + ?Sized>(sqrt_r: &CMat, rng: &mut R) -> Result<CVec> {
    if sqrt_r.nrows() != sqrt_r.ncols() {
        return Err(Error::InvalidInput(format!(
            "covariance square root must be square, got {}x{}",
            sqrt_r.nrows(),
            sqrt_r.ncols()
        )));
    }
    let m = sqrt_r.nrows();
    let g = CVec::from_fn(m, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Cx::new(re, im) * Cx::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
    });
    Ok(sqrt_r * g)
}

/// Draws correlated channels for a whole group from its covariance matrix.
///
/// The PSD square root is computed once at construction so that per-trial
/// sampling stays cheap.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    sqrt_r: CMat,
}

impl ChannelSampler {
    pub fn new(covariance: &HermitianMatrix) -> Result<Self> {
        Ok(Self {
            sqrt_r: hermitian_sqrt(covariance)?,
        })
    }

    pub fn antennas(&self) -> usize {
        self.sqrt_r.nrows()
    }

    /// `K_g` independent draws stacked as conjugate-transposed rows.
    pub fn sample_group<R: Rng + ?Sized>(&self, users: usize, rng: &mut R) -> Result<GroupChannel> {
        if users == 0 {
            return Err(Error::InvalidInput("group must serve >= 1 user".into()));
        }
        let m = self.antennas();
        let mut matrix = CMat::zeros(users, m);
        for k in 0..users {
            let h = sample_channel(&self.sqrt_r, rng)?;
            for (j, z) in h.iter().enumerate() {
                matrix[(k, j)] = z.conj();
            }
        }
        Ok(GroupChannel { matrix })
    }
}

fn splitmix64(z: u64) -> u64 {
    let mut x = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Counter-based substream for one `(trial, group)` cell of a Monte-Carlo
/// run. Distinct cells get statistically independent streams, and the
/// mapping depends only on the three integers, so trials can be executed in
/// any order and on any number of workers without changing the draws.
pub fn trial_substream(master_seed: u64, trial: u64, group: u64) -> ChaCha8Rng {
    let mut z = master_seed;
    z = splitmix64(z ^ splitmix64(trial));
    z = splitmix64(z ^ splitmix64(group));
    let mut key = [0u8; 32];
    let mut s = z;
    for chunk in key.chunks_exact_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
