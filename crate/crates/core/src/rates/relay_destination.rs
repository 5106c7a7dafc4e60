use super::{log2_pos, RateRegime, RateReport, SystemParams};
use crate::error::{Error, Result};
use crate::linalg::{gram, log2_det, ComplexMatrix, C64};
use crate::precoders::Precoder;

/// Relay-destination rate `log2 det(I_M + P_R/kappa_D H^H H Psi^T Psi^*)`.
pub fn rate_rd(h_rd: &ComplexMatrix, psi: &Precoder, params: &SystemParams) -> Result<RateReport> {
    let m = h_rd.rows();
    if !h_rd.is_square() || psi.antennas() != m {
        return Err(Error::invalid(format!(
            "relay-destination channel {}x{} does not match {m}x{m} precoder",
            h_rd.rows(),
            h_rd.cols()
        )));
    }
    let inner = psi.psi.transpose().matmul(&psi.psi.conj())?;
    let mut a = gram(h_rd)
        .matmul(&inner)?
        .scale(params.p_r / params.kappa_d);
    for i in 0..m {
        a[(i, i)] += C64::new(1.0, 0.0);
    }
    let (log_abs, phase) = log2_det(&a)?;
    if !log_abs.is_finite() || (phase - 1.0).norm() > 1e-6 {
        return Err(Error::Numerical {
            message: "relay-destination determinant is not a positive real".into(),
            residual: (phase - 1.0).norm(),
        });
    }
    Ok(RateReport::exact(log_abs, RateRegime::Rd))
}

/// Eigenmode form `sum_v log2(1 + P_R/kappa_D lambda_v |E_v|^2)`, valid for
/// the eigenbasis precoder.
pub fn rate_rd_eigenmodes(lambda: &[f64], allocation: &[f64], params: &SystemParams) -> RateReport {
    let snr = params.p_r / params.kappa_d;
    let v = lambda
        .iter()
        .zip(allocation)
        .map(|(&l, &e)| log2_pos(1.0 + snr * l.max(0.0) * e))
        .sum();
    RateReport::exact(v, RateRegime::Rd)
}
