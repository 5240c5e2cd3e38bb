//! Upper bound on the key information leaked to an eavesdropper that sees
//! the key segment through its own channel `g`, and the matching lower
//! bound on normalized equivocation. All quantities are in bits.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest `E (ns - S)` accepted by [`leakage_logdet`].
pub const LOGDET_MAX_ROWS: usize = 4096;

/// Ascending eigenvalues of `C2^H C2`.
pub fn noise_gram_eigenvalues<T: Real>(noise_projection: &DMatrix<Complex<T>>) -> Vec<T> {
    let gram = noise_projection.adjoint() * noise_projection;
    let mut eig: Vec<T> = SymmetricEigen::new(gram).eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalue"));
    eig
}

/// `sum_j log2(1 + Pk |g|^2 / (s_e2 + Pa lambda_j |g|^2))`.
pub fn leakage_from_eigenvalues<T: Real>(g_norm2: T, eigenvalues: &[T], key_power: T, noise_power: T, sigma_e2: T) -> T {
    if key_power == T::zero() || g_norm2 == T::zero() {
        return T::zero();
    }
    eigenvalues.iter().fold(T::zero(), |acc, &lambda| {
        let snr = key_power * g_norm2 / (sigma_e2 + noise_power * lambda * g_norm2);
        acc + snr.ln_1p() / T::ln_2()
    })
}

/// Closed-form leakage through the eigenvalues of `C2^H C2`.
pub fn leakage_eigen<T: Real>(
    g: &DVector<Complex<T>>,
    noise_projection: &DMatrix<Complex<T>>,
    key_power: T,
    noise_power: T,
    sigma_e2: T,
) -> T {
    let eig = noise_gram_eigenvalues(noise_projection);
    leakage_from_eigenvalues(g.norm_squared(), &eig, key_power, noise_power, sigma_e2)
}

/// Leakage as `log2 det(S1 + S2) - log2 det(S1)` with the covariances built
/// explicitly from `Psi = I (x) g`:
/// `S1 = Pa Psi C2^H C2 Psi^H + s_e2 I` and `S2 = Pk Psi Psi^H`.
pub fn leakage_logdet<T: Real>(
    g: &DVector<Complex<T>>,
    noise_projection: &DMatrix<Complex<T>>,
    key_power: T,
    noise_power: T,
    sigma_e2: T,
) -> Result<T> {
    let e = g.len();
    let n = noise_projection.ncols();
    let rows = e * n;
    if rows > LOGDET_MAX_ROWS {
        return Err(Error::LeakageSize {
            rows,
            cap: LOGDET_MAX_ROWS,
        });
    }
    if key_power == T::zero() || g.norm_squared() == T::zero() {
        return Ok(T::zero());
    }
    let zero = Complex::new(T::zero(), T::zero());
    let mut psi = DMatrix::from_element(rows, n, zero);
    for j in 0..n {
        psi.view_mut((j * e, j), (e, 1)).copy_from(g);
    }
    let gram = noise_projection.adjoint() * noise_projection;
    let re = |x: T| Complex::new(x, T::zero());

    let mut s1 = &psi * gram * psi.adjoint() * re(noise_power);
    for i in 0..rows {
        s1[(i, i)] += re(sigma_e2);
    }
    let total = &s1 + &psi * psi.adjoint() * re(key_power);
    Ok((log2_det_hpd(total) - log2_det_hpd(s1)).max(T::zero()))
}

fn log2_det_hpd<T: Real>(m: DMatrix<Complex<T>>) -> T {
    let chol = m.cholesky().expect("covariance is positive definite");
    let l = chol.l_dirty();
    let two = T::lit(2.0);
    (0..l.nrows()).fold(T::zero(), |acc, i| acc + two * l[(i, i)].re.ln()) / T::ln_2()
}

/// `1 - leak / S`.
pub fn equivocation_lower<T: Real>(leak_bits: T, key_bits: usize) -> T {
    T::one() - leak_bits / T::count(key_bits)
}

/// Leakage summary across the active users of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakageReport<T: Real> {
    /// Mean leakage over users.
    pub leak_bits: T,
    /// `1 - leak_bits / S`. A lower bound: Eve is assumed interference free.
    pub zeta_e_lower: T,
    /// `|g_i|^2` per user.
    pub per_user: Vec<T>,
    /// Leakage per user.
    pub per_user_leak: Vec<T>,
}

pub fn leakage_report<T: Real>(
    eve_channels: &[DVector<Complex<T>>],
    eigenvalues: &[T],
    key_bits: usize,
    key_power: T,
    noise_power: T,
    sigma_e2: T,
) -> LeakageReport<T> {
    let per_user: Vec<T> = eve_channels.iter().map(|g| g.norm_squared()).collect();
    let per_user_leak: Vec<T> = per_user
        .iter()
        .map(|&n2| leakage_from_eigenvalues(n2, eigenvalues, key_power, noise_power, sigma_e2))
        .collect();
    let leak_bits = if per_user_leak.is_empty() {
        T::zero()
    } else {
        per_user_leak.iter().fold(T::zero(), |a, &b| a + b) / T::count(per_user_leak.len())
    };
    LeakageReport {
        leak_bits,
        zeta_e_lower: equivocation_lower(leak_bits, key_bits),
        per_user,
        per_user_leak,
    }
}

/// Nodes and normalized weights for `E[f(X)]`, `X ~ Gamma(shape, 1)`
/// (generalized Gauss-Laguerre via Golub-Welsch).
pub fn gamma_quadrature(shape: usize, nodes: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(shape >= 1 && nodes >= 1);
    let alpha = shape as f64 - 1.0;
    let jacobi = DMatrix::from_fn(nodes, nodes, |r, c| {
        if r == c {
            2.0 * r as f64 + alpha + 1.0
        } else if r + 1 == c || c + 1 == r {
            let i = r.max(c) as f64;
            (i * (i + alpha)).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..nodes)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    pairs.into_iter().map(|(x, w)| (x, w / total)).unzip()
}

/// Leakage averaged over `|g|^2 ~ Gamma(E, 1)`, i.e. `g ~ CN(0, I_E)`.
pub fn expected_leakage(eve_antennas: usize, eigenvalues: &[f64], key_power: f64, noise_power: f64, sigma_e2: f64) -> f64 {
    let (x, w) = gamma_quadrature(eve_antennas, 64);
    x.iter()
        .zip(&w)
        .map(|(&xi, &wi)| wi * leakage_from_eigenvalues(xi, eigenvalues, key_power, noise_power, sigma_e2))
        .sum()
}
