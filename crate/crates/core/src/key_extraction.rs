//! Secret-key extraction and key-segment construction on the user side.
//!
//! Sample variance is the biased estimator `mean |y_j - mean(y)|^2`, and
//! standardization divides by its square root.

use nalgebra::{Complex, DMatrix, DVector};

use crate::coding::{bpsk_map, LdpcCode};
use crate::error::{check_len, Error, Result};
use crate::scalar::Real;

/// Smallest sample variance accepted by [`standardize`].
pub const MIN_VARIANCE: f64 = 1e-30;

/// Standardized feedback, its projected features, and the derived key.
#[derive(Debug, Clone, PartialEq)]
pub struct PrivateObservation<T: Real> {
    pub y_bar: DVector<Complex<T>>,
    pub u: DVector<T>,
    pub key: Vec<u8>,
}

impl<T: Real> PrivateObservation<T> {
    pub fn from_feedback(y: &DVector<Complex<T>>, key_projection: &DMatrix<Complex<T>>) -> Result<Self> {
        let y_bar = standardize(y)?;
        let (u, key) = extract_key(&y_bar, key_projection)?;
        Ok(Self { y_bar, u, key })
    }
}

/// Key-segment symbols: BPSK parity `v`, artificial noise `v'`, and `v + v'`.
#[derive(Debug, Clone, PartialEq)]
pub struct KeySegment<T: Real> {
    pub parity_bits: Vec<u8>,
    pub v: DVector<Complex<T>>,
    pub v_prime: DVector<Complex<T>>,
    pub x_k: DVector<Complex<T>>,
}

pub fn sample_mean<T: Real>(y: &DVector<Complex<T>>) -> Complex<T> {
    let n = T::count(y.len());
    y.iter().fold(Complex::new(T::zero(), T::zero()), |acc, &z| acc + z) / Complex::new(n, T::zero())
}

/// Biased sample variance `mean |y_j - mean(y)|^2`.
pub fn sample_variance<T: Real>(y: &DVector<Complex<T>>) -> T {
    let mean = sample_mean(y);
    let n = T::count(y.len());
    y.iter().fold(T::zero(), |acc, &z| acc + (z - mean).norm_sqr()) / n
}

/// `(y - mean(y)) / sqrt(Var[y])`.
pub fn standardize<T: Real>(y: &DVector<Complex<T>>) -> Result<DVector<Complex<T>>> {
    let var = sample_variance(y);
    let v = var.to_f64_lossy();
    if v.is_nan() || v < MIN_VARIANCE {
        return Err(Error::Degenerate {
            variance: var.to_f64_lossy(),
        });
    }
    let mean = sample_mean(y);
    let scale = Complex::new(T::one() / var.sqrt(), T::zero());
    Ok(y.map(|z| (z - mean) * scale))
}

/// `u = [Re(y_bar C1), Im(y_bar C1)]`, `key = F(u)` with `F(x) = 0` for
/// `x < 0` and `1` otherwise.
pub fn extract_key<T: Real>(
    y_bar: &DVector<Complex<T>>,
    key_projection: &DMatrix<Complex<T>>,
) -> Result<(DVector<T>, Vec<u8>)> {
    check_len("extract_key: y_bar vs C1 rows", key_projection.nrows(), y_bar.len())?;
    let proj = key_projection.transpose() * y_bar;
    let half = proj.len();
    let u = DVector::from_fn(2 * half, |i, _| if i < half { proj[i].re } else { proj[i - half].im });
    let key = u.iter().map(|&x| quantize(x)).collect();
    Ok((u, key))
}

pub fn quantize<T: Real>(x: T) -> u8 {
    if x < T::zero() {
        0
    } else {
        1
    }
}

/// Artificial noise `v' = sqrt(Pa) y_bar C2`.
pub fn artificial_noise<T: Real>(
    y_bar: &DVector<Complex<T>>,
    noise_projection: &DMatrix<Complex<T>>,
    noise_power: T,
) -> Result<DVector<Complex<T>>> {
    check_len("artificial_noise: y_bar vs C2 rows", noise_projection.nrows(), y_bar.len())?;
    let scale = Complex::new(noise_power.sqrt(), T::zero());
    Ok(noise_projection.transpose() * y_bar * scale)
}

/// LDPC-encodes the key, keeps only the parity bits, BPSK-maps them at
/// power `Pk` and adds the artificial noise.
pub fn build_key_segment<T: Real>(
    key: &[u8],
    y_bar: &DVector<Complex<T>>,
    noise_projection: &DMatrix<Complex<T>>,
    key_power: T,
    noise_power: T,
    ldpc: &LdpcCode,
) -> Result<KeySegment<T>> {
    check_len("build_key_segment: key length", ldpc.k(), key.len())?;
    check_len(
        "build_key_segment: C2 columns",
        ldpc.parity_len(),
        noise_projection.ncols(),
    )?;
    let parity_bits = ldpc.parity(key);
    let v = bpsk_map(&parity_bits, key_power);
    let v_prime = artificial_noise(y_bar, noise_projection, noise_power)?;
    let x_k = &v + &v_prime;
    Ok(KeySegment {
        parity_bits,
        v,
        v_prime,
        x_k,
    })
}
