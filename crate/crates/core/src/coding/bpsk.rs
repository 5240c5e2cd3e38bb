use nalgebra::{Complex, DVector};

use crate::scalar::Real;

/// Maps bit 0 to `+sqrt(power)` and bit 1 to `-sqrt(power)`.
pub fn bpsk_map<T: Real>(bits: &[u8], power: T) -> DVector<Complex<T>> {
    let amp = power.sqrt();
    DVector::from_iterator(
        bits.len(),
        bits.iter().map(|&b| {
            let re = if b == 0 { amp } else { -amp };
            Complex::new(re, T::zero())
        }),
    )
}

/// True when `symbols` is a real BPSK sequence of the given power, i.e.
/// every entry is `+-sqrt(power)` with zero imaginary part.
pub fn bpsk_power_check<T: Real>(symbols: &DVector<Complex<T>>, power: T, tol: T) -> bool {
    let amp = power.sqrt();
    symbols
        .iter()
        .all(|s| s.im.abs() <= tol && (s.re.abs() - amp).abs() <= tol)
}
