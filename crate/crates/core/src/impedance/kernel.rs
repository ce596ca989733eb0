//! Modified Bessel function `K0` and the screened 2D kernel pieces.

use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `K0(z) + ln(z/2)` for `0 ≤ z ≤ 2`, from the ascending series with the
/// logarithm split off so that the sum stays accurate as `z → 0`.
fn k0_plus_log_half(z: f64) -> f64 {
    let q = 0.25 * z * z;
    let ln_half = if z > 0.0 { (0.5 * z).ln() } else { 0.0 };
    // I0(z) - 1 and Σ (q^k/(k!)^2) H_k
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut i0_minus_one = 0.0;
    let mut series = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= q / (kf * kf);
        harmonic += 1.0 / kf;
        i0_minus_one += term;
        series += term * harmonic;
        if term < 1e-18 * (1.0 + series) {
            break;
        }
    }
    -ln_half * i0_minus_one - EULER_GAMMA * (1.0 + i0_minus_one) + series
}

/// Modified Bessel function of the second kind, order zero, for `z > 0`.
pub fn bessel_k0(z: f64) -> f64 {
    assert!(z > 0.0, "K0 needs a positive argument");
    if z <= 2.0 {
        return k0_plus_log_half(z) - (0.5 * z).ln();
    }
    // trapezoid rule on ∫_0^∞ exp(-z cosh t) dt, spectrally accurate
    let step = 0.125;
    let mut sum = 0.5 * (-z).exp();
    let mut k = 1;
    loop {
        let v = (-z * (k as f64 * step).cosh()).exp();
        sum += v;
        if v < 1e-18 * sum {
            break;
        }
        k += 1;
    }
    step * sum
}

/// `(1/2π) K0(r/δ)`.
pub fn screened_kernel(r: f64, delta: f64) -> f64 {
    bessel_k0(r / delta) / (2.0 * PI)
}

/// `(1/2π) (K0(r/δ) + ln r)`, continuous at `r = 0`.
pub fn screened_kernel_regular(r: f64, delta: f64) -> f64 {
    let z = r / delta;
    let v = if z <= 2.0 {
        k0_plus_log_half(z) + (2.0 * delta).ln()
    } else {
        bessel_k0(z) + r.ln()
    };
    v / (2.0 * PI)
}
