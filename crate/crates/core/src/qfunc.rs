//! Gaussian tail function in the log domain.

use libm::erfc;

use crate::scalar::Real;

/// Beyond this magnitude `ln Q` switches to the asymptotic series.
pub const ASYMPTOTIC_CUTOFF: f64 = 8.0;

/// `ln Q(a)` where `Q(a) = P(N(0, 1) > a)`, finite for every finite `a`.
pub fn ln_q<T: Real>(a: T) -> T {
    T::lit(ln_q_f64(a.to_f64_lossy()))
}

/// `Q(a)`.
pub fn q<T: Real>(a: T) -> T {
    T::lit(ln_q_f64(a.to_f64_lossy()).exp())
}

/// `ln Q(a) - ln(1 - Q(a))`: the log-odds that a Gaussian centred at the
/// observation lies below zero, scaled so `a` is in noise standard
/// deviations. Odd in `a`; zero at `a = 0`.
pub fn tail_log_odds<T: Real>(a: T) -> T {
    let x = a.to_f64_lossy();
    T::lit(ln_q_f64(x) - ln_q_f64(-x))
}

fn ln_q_f64(a: f64) -> f64 {
    if a.is_nan() {
        return f64::NAN;
    }
    if a > ASYMPTOTIC_CUTOFF {
        // Q(a) = phi(a)/a * (1 - 1/a^2 + 3/a^4 - 15/a^6 + ...)
        let inv2 = 1.0 / (a * a);
        let mut term = 1.0;
        let mut series = 1.0;
        for k in 1..=8 {
            term *= -((2 * k - 1) as f64) * inv2;
            series += term;
        }
        -0.5 * a * a - (a * (2.0 * std::f64::consts::PI).sqrt()).ln() + series.ln()
    } else if a < -ASYMPTOTIC_CUTOFF {
        (-ln_q_f64(-a).exp()).ln_1p()
    } else {
        (0.5 * erfc(a / std::f64::consts::SQRT_2)).ln()
    }
}
