//! The double integral
//! `I(omega, k) = int_0^delta [int_r^inf e^{-k s^{1/omega}} s^{1/omega - 2} ds]^2 r dr`,
//! `delta = k^{-omega}`, whose growth `I = O(1/k^2)` bounds the corner
//! contribution to `eps_n`.

use rug::Float;

use crate::error::DiagnosticsError;
use crate::mp::{Precision, Real};
use crate::quadrature::tanh_sinh;

/// Inner integral after `t = k s^{1/omega}`:
/// `omega k^{omega-1} Gamma(1 - omega, k r^{1/omega})`.
fn inner(omega: &Real, k: u32, r: &Real, bits: u32) -> Real {
    let inv = Float::with_val(bits, omega.recip_ref());
    let x = Float::with_val(bits, r.pow_ref_f(&inv)) * k;
    let a = Float::with_val(bits, 1u32 - omega);
    let g = a.gamma_inc(&x);
    let kp = Float::with_val(
        bits,
        Float::with_val(bits, k).pow_ref_f(&Float::with_val(bits, omega - 1u32)),
    );
    g * kp * omega
}

trait PowF {
    fn pow_ref_f(&self, e: &Real) -> Real;
}

impl PowF for Real {
    fn pow_ref_f(&self, e: &Real) -> Real {
        use rug::ops::Pow;
        Float::with_val(self.prec(), self.pow(e))
    }
}

/// `k^2 I(omega, k)` by tanh–sinh in `r` over `[0, k^{-omega}]`.
pub fn corner_integral(omega: f64, k: u32, prec: Precision) -> Result<Real, DiagnosticsError> {
    if !(omega > 0.0 && omega <= 2.0) || k == 0 {
        return Err(DiagnosticsError::Quadrature(format!(
            "need 0 < omega <= 2 and k >= 1, got {omega}, {k}"
        )));
    }
    let bits = prec.bits();
    let om = prec.real(omega);
    let delta = Float::with_val(bits, Float::with_val(bits, k).pow_ref_f(&Float::with_val(bits, -&om)));
    let res = tanh_sinh(
        |r, _| {
            let v = inner(&om, k, r, bits);
            Float::with_val(bits, v.square_ref()) * r
        },
        &prec.zero(),
        &delta,
        prec,
        Precision::tenth_pow(prec.decimal_digits() as f64 / 2.0),
        12,
    )
    .map_err(|r| DiagnosticsError::Quadrature(format!("I({omega}, {k}): change {:e}", r.error_estimate)))?;
    Ok(res.value * k * k)
}

/// The same quantity reduced to one variable,
/// `omega^3 int_0^1 Gamma(1-omega, x)^2 x^{2 omega - 1} dx` (independent of `k`).
pub fn corner_integral_reduced(omega: f64, prec: Precision) -> Result<Real, DiagnosticsError> {
    let bits = prec.bits();
    let om = prec.real(omega);
    let a = Float::with_val(bits, 1u32 - &om);
    let e = Float::with_val(bits, &om * 2u32) - 1u32;
    let res = tanh_sinh(
        |x, _| {
            let g = a.clone().gamma_inc(x);
            Float::with_val(bits, g.square_ref()) * x.pow_ref_f(&e)
        },
        &prec.zero(),
        &prec.one(),
        prec,
        Precision::tenth_pow(prec.decimal_digits() as f64 / 2.0),
        12,
    )
    .map_err(|r| DiagnosticsError::Quadrature(format!("reduced I({omega}): change {:e}", r.error_estimate)))?;
    Ok(res.value * Float::with_val(bits, om.pow_ref_f(&prec.real(3.0))))
}
