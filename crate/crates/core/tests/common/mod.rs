//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use fdrelay::linalg::{ComplexMatrix, C64};
use fdrelay::precoders::Precoder;
use fdrelay::queue::QueueChain;
use fdrelay::randgen::{ChannelRealization, CodewordMatrix};
use fdrelay::rates::SystemParams;
use nalgebra::DMatrix;

pub fn to_na(a: &ComplexMatrix) -> DMatrix<C64> {
    DMatrix::from_fn(a.rows(), a.cols(), |r, c| a[(r, c)])
}

pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    DMatrix::from_fn(ar * br, ac * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

pub fn log2_det(a: &DMatrix<C64>) -> f64 {
    a.clone().lu().determinant().norm().log2()
}

fn eye(n: usize) -> DMatrix<C64> {
    DMatrix::identity(n, n)
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Source-relay rate from the full `nM x nM` received covariance, with
/// interference operator `I_M kron (X Psi)`.
fn vectorized_rate(
    h_sr: &DMatrix<C64>,
    xpsi: &DMatrix<C64>,
    n: usize,
    params: &SystemParams,
) -> f64 {
    let m = h_sr.nrows();
    let signal = kron(&(h_sr * h_sr.adjoint()), &eye(n)) * re(params.p_s_tilde());
    let op = kron(&eye(m), xpsi);
    let interference = &op * op.adjoint() * re(params.sigma2_rr);
    let noise = eye(n * m) * re(params.kappa_r);
    let with_signal = &signal + &interference + &noise;
    let without = &interference + &noise;
    (log2_det(&with_signal) - log2_det(&without)) / n as f64
}

/// Slow-RSI rate built with explicit Kronecker products.
pub fn slow_rate_kronecker(
    ch: &ChannelRealization,
    x: &CodewordMatrix,
    psi: &Precoder,
    params: &SystemParams,
) -> f64 {
    let xpsi = to_na(&x.x) * to_na(&psi.psi);
    vectorized_rate(&to_na(&ch.h_sr), &xpsi, x.len(), params)
}

/// Fast-RSI rate built from the block-diagonal codeword
/// `diag(X(1), ..., X(n))` and the precoder `I_n kron Psi`.
pub fn fast_rate_block_diagonal(
    ch: &ChannelRealization,
    x: &CodewordMatrix,
    psi: &Precoder,
    params: &SystemParams,
) -> f64 {
    let n = x.len();
    let m = x.streams();
    let mut blocks = DMatrix::<C64>::zeros(n, n * m);
    for j in 0..n {
        for i in 0..m {
            blocks[(j, j * m + i)] = x.x[(j, i)];
        }
    }
    let psi_big = kron(&eye(n), &to_na(&psi.psi));
    vectorized_rate(&to_na(&ch.h_sr), &(blocks * psi_big), n, params)
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        // below roundoff the halved tolerance can never be met
        let floor = 64.0 * f64::EPSILON * (left + right).abs();
        if depth == 0 || diff.abs() <= (15.0 * tol).max(floor) {
            return left + right + diff / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// `E1(x)` by quadrature after substituting `u = x e^s`, which turns the
/// integral into `int_0^inf exp(-x e^s) ds`.
pub fn e1_quadrature(x: f64) -> f64 {
    let upper = (800.0 / x).ln().max(1.0);
    let f = move |s: f64| (-x * s.exp()).exp();
    let rough = adaptive_simpson(&f, 0.0, upper, 1e-6 * f(0.0));
    adaptive_simpson(&f, 0.0, upper, 1e-15 * rough)
}

/// Explicit `(Q+1) x (Q+1)` transition matrix of the buffer chain.
pub fn transition_matrix(chain: &QueueChain) -> DMatrix<f64> {
    let q = chain.q_max;
    let mut p = DMatrix::<f64>::zeros(q + 1, q + 1);
    for nu in 0..=q {
        let up = chain.up(nu);
        let down = chain.down(nu);
        if nu < q {
            p[(nu, nu + 1)] = up;
        }
        if nu > 0 {
            p[(nu, nu - 1)] = down;
        }
        p[(nu, nu)] = 1.0 - up - down;
    }
    p
}

/// Long-run distribution from an empty buffer, by power iteration with
/// repeated squaring of the transition matrix.
pub fn stationary_by_power_iteration(chain: &QueueChain) -> Vec<f64> {
    let mut p = transition_matrix(chain);
    let mut prev = p.row(0).transpose();
    for _ in 0..64 {
        p = &p * &p;
        // keep rows stochastic; rounding would otherwise compound
        for mut row in p.row_iter_mut() {
            let total: f64 = row.iter().sum();
            row /= total;
        }
        let row = p.row(0).transpose();
        let done = (&row - &prev).amax() < 1e-15;
        prev = row;
        if done {
            break;
        }
    }
    let total: f64 = prev.iter().sum();
    prev.iter().map(|v| v / total).collect()
}
