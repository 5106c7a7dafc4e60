//! Relay precoding matrices.
//!
//! Three designs are analyzed: the all-zero (half-duplex) precoder, the
//! rank-1 precoder `sqrt(M) q q^H` that minimizes self-interference seen by
//! the relay's receiver, and the eigenbasis precoder `Psi^T = Q_RD^H E` that
//! diagonalizes the relay-destination channel.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{fix_phase, gram, hermitian_eigen, ComplexMatrix, C64};
use crate::randgen::{complex_gaussian_matrix, CodewordMatrix};
use crate::rates::{AllocationMode, SystemParams};

const DEGENERATE_RATIO: f64 = 1e-12;
const WATERFILL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrecoderDesign {
    HdZero,
    IsrMaxRank1,
    IrdMax,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    pub psi: ComplexMatrix,
    pub design: PrecoderDesign,
    /// Stream power fractions `|E_v|^2` (eigenbasis designs only).
    pub allocation: Option<Vec<f64>>,
    /// Unit vector `q` of a rank-1 design.
    pub direction: Option<Vec<C64>>,
}

impl Precoder {
    pub fn antennas(&self) -> usize {
        self.psi.rows()
    }

    /// `Psi Psi^H`.
    pub fn covariance(&self) -> ComplexMatrix {
        self.psi
            .matmul(&self.psi.adjoint())
            .expect("precoder is square")
    }

    /// `Trace(Psi Psi^H)`.
    pub fn power(&self) -> f64 {
        self.psi.frobenius_norm().powi(2)
    }

    /// Rescales an arbitrary nonzero `M x M` matrix to `Trace(Psi Psi^H) = M`.
    pub fn custom(psi: ComplexMatrix) -> Result<Self> {
        if !psi.is_square() {
            return Err(Error::invalid("precoder must be square"));
        }
        let norm = psi.frobenius_norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::invalid("custom precoder must be nonzero and finite"));
        }
        let m = psi.rows() as f64;
        Ok(Self {
            psi: psi.scale(m.sqrt() / norm),
            design: PrecoderDesign::Custom,
            allocation: None,
            direction: None,
        })
    }
}

/// Relay silent: `Psi = 0`.
pub fn hd_precoder(m: usize) -> Result<Precoder> {
    if m == 0 {
        return Err(Error::invalid("antenna count must be at least 1"));
    }
    Ok(Precoder {
        psi: ComplexMatrix::zeros(m, m),
        design: PrecoderDesign::HdZero,
        allocation: None,
        direction: None,
    })
}

/// Rank-1 precoder along the weakest direction of the relay codeword.
pub fn isr_max_precoder(x_r: &CodewordMatrix) -> Result<Precoder> {
    let m = x_r.streams();
    let eig = hermitian_eigen(&gram(&x_r.x))?;
    let (lo, hi) = (eig.min_value(), eig.max_value());
    if !(hi > 0.0) || lo < DEGENERATE_RATIO * hi {
        return Err(Error::DegenerateCodeword {
            ratio: if hi > 0.0 { lo / hi } else { 0.0 },
        });
    }
    let q = eig.min_vector();
    let scale = (m as f64).sqrt();
    let psi = ComplexMatrix::from_fn(m, m, |r, c| q[r] * q[c].conj() * scale);
    Ok(Precoder {
        psi,
        design: PrecoderDesign::IsrMaxRank1,
        allocation: None,
        direction: Some(q),
    })
}

/// Eigenbasis precoder for the relay-destination link.
///
/// With `H_RD^H H_RD = V diag(lambda) V^H` (so `Q_RD = V^H`), returns
/// `Psi = (V E)^T`, which makes `Q_RD Psi^T Psi^* Q_RD^H = E E^H` diagonal.
pub fn ird_max_precoder(
    h_rd: &ComplexMatrix,
    mode: AllocationMode,
    params: &SystemParams,
) -> Result<Precoder> {
    if !h_rd.is_square() {
        return Err(Error::invalid("relay-destination channel must be square"));
    }
    let m = h_rd.rows();
    let eig = hermitian_eigen(&gram(h_rd))?;
    let lambda: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    if lambda.iter().all(|&l| l == 0.0) {
        return Err(Error::DegenerateChannel);
    }
    let allocation = match mode {
        AllocationMode::Equal => vec![1.0; m],
        AllocationMode::Waterfill => waterfill(&lambda, params.p_r / params.kappa_d, m as f64),
    };
    let psi = ComplexMatrix::from_fn(m, m, |r, c| {
        // (V E)^T[r][c] = V[c][r] * E[r]
        eig.vectors[(c, r)] * allocation[r].sqrt()
    });
    Ok(Precoder {
        psi,
        design: PrecoderDesign::IrdMax,
        allocation: Some(allocation),
        direction: None,
    })
}

/// Water-filling fractions `max(0, mu - 1/(snr * lambda_v))` summing to `budget`.
pub fn waterfill(lambda: &[f64], snr: f64, budget: f64) -> Vec<f64> {
    let floors: Vec<f64> = lambda
        .iter()
        .map(|&l| {
            if l > 0.0 {
                1.0 / (snr * l)
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let fill = |mu: f64| -> f64 { floors.iter().map(|&f| (mu - f).max(0.0)).sum() };
    let finite_max = floors
        .iter()
        .copied()
        .filter(|f| f.is_finite())
        .fold(0.0, f64::max);
    let (mut lo, mut hi) = (0.0, budget + finite_max);
    while hi - lo > WATERFILL_TOL * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if fill(mid) > budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mu = 0.5 * (lo + hi);
    let mut alloc: Vec<f64> = floors.iter().map(|&f| (mu - f).max(0.0)).collect();
    // Absorb the bisection residue so the budget holds to rounding.
    let total: f64 = alloc.iter().sum();
    if total > 0.0 {
        for a in &mut alloc {
            *a *= budget / total;
        }
    }
    alloc
}

/// Picks the design whose bottleneck `min(I_SR, I_RD)` is larger; ties go
/// to the multi-stream design.
///
/// Each argument is `(I_SR, I_RD)` under that design.
pub fn select_precoder_maxmin(
    isr_max_rates: (f64, f64),
    ird_max_rates: (f64, f64),
) -> Result<PrecoderDesign> {
    let all = [
        isr_max_rates.0,
        isr_max_rates.1,
        ird_max_rates.0,
        ird_max_rates.1,
    ];
    if all.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::invalid(format!(
            "rates must be finite and non-negative, got {all:?}"
        )));
    }
    let isr = isr_max_rates.0.min(isr_max_rates.1);
    let ird = ird_max_rates.0.min(ird_max_rates.1);
    Ok(if isr > ird {
        PrecoderDesign::IsrMaxRank1
    } else {
        PrecoderDesign::IrdMax
    })
}

/// Random full-rank precoder with `Trace(Psi Psi^H) = M` (Gaussian direction).
pub fn random_precoder<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<Precoder> {
    Precoder::custom(complex_gaussian_matrix(m, m, 1.0, rng)?)
}

/// Random trace-normalized precoder of the given rank.
pub fn random_precoder_of_rank<R: Rng + ?Sized>(
    m: usize,
    rank: usize,
    rng: &mut R,
) -> Result<Precoder> {
    if rank == 0 || rank > m {
        return Err(Error::invalid(format!("rank must be in 1..={m}")));
    }
    let a = complex_gaussian_matrix(m, rank, 1.0, rng)?;
    let b = complex_gaussian_matrix(rank, m, 1.0, rng)?;
    Precoder::custom(a.matmul(&b)?)
}

/// Unit vector with the canonical phase (used for direction comparisons).
pub fn canonical(mut v: Vec<C64>) -> Vec<C64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    fix_phase(&mut v);
    v
}
