//! `eps_n` through the w-plane transplant
//! `h(w) = G_n(Psi(w)) Psi'(w) - w^n = sum_{m>=2} c_m w^{-m}`, so that
//! `eps_n = (n+1) sum_{m>=2} |c_m|^2 / (m-1)`.

use rug::Float;

use crate::error::{ConformalError, DiagnosticsError, Error};
use crate::faber::FaberFamily;
use crate::geometry::DomainSpec;
use crate::mp::{Complex, Precision, Real};
use crate::series::LaurentAtInfinity;

/// Default relative tolerance on the tail-fit uncertainty.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct EpsilonValue {
    pub n: usize,
    pub value: Real,
    /// Estimated sum beyond the retained coefficients (already included in
    /// `value`).
    pub tail: f64,
    /// Disagreement between two tail models; zero for finite Laurent maps.
    pub uncertainty: f64,
    /// Deepest coefficient summed explicitly.
    pub depth: usize,
}

/// Precomputed `Psi^m Psi'` for `m <= N`, shared by every `n <= N`.
pub struct EpsilonEngine {
    prec: Precision,
    depth: usize,
    exact: bool,
    /// Decay exponent `s` of `|c_m|^2/(m-1) ~ m^{-s}` when known.
    exponent: Option<f64>,
    terms: Vec<LaurentAtInfinity>,
    pub tolerance: f64,
}

/// Retained depth for degree `n` out of a run up to `n_max`.
pub fn default_depth(n_max: usize) -> usize {
    (4 * n_max + 64).max(16 * (n_max + 1) + 128)
}

impl EpsilonEngine {
    pub fn new(spec: &DomainSpec, n_max: usize) -> Result<Self, Error> {
        let psi0 = spec.psi().ok_or(DiagnosticsError::NeedsMap)?;
        let exact = psi0.is_exact();
        let depth = default_depth(n_max);
        let psi = spec
            .psi_to_depth((depth + n_max + 2) as i64)
            .ok_or(ConformalError::NoExteriorMap)?;
        if !exact && psi.depth() < 8 {
            return Err(DiagnosticsError::TailNotConverged {
                uncertainty: f64::INFINITY,
                tolerance: DEFAULT_TAIL_TOLERANCE,
            }
            .into());
        }
        let dpsi = psi.differentiate();
        let mut terms = Vec::with_capacity(n_max + 1);
        let mut pow = LaurentAtInfinity::constant(spec.prec.cone(), spec.prec);
        for m in 0..=n_max {
            if m > 0 {
                pow = pow.mul(&psi)?;
            }
            terms.push(pow.mul(&dpsi)?);
        }
        // c_m ~ m^{-omega} at a corner of opening omega pi, so
        // |c_m|^2/(m-1) ~ m^{-(2 omega + 1)}
        let exponent = spec.generator().map(|g| 2.0 * g.omega().to_f64() + 1.0);
        Ok(EpsilonEngine {
            prec: spec.prec,
            depth,
            exact,
            exponent,
            terms,
            tolerance: DEFAULT_TAIL_TOLERANCE,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn max_degree(&self) -> usize {
        self.terms.len() - 1
    }

    /// Coefficients of `h` for powers `w^{top} .. w^{-depth}`, returned as
    /// `(power, c)`; powers `>= -1` should vanish up to rounding.
    pub fn h_coefficients(&self, fam: &FaberFamily, n: usize) -> Result<Vec<(i64, Complex)>, Error> {
        let g = &fam.g[n];
        let lowest = match self.exact {
            true => self.terms[..=n].iter().map(|t| t.depth()).max().unwrap_or(0),
            false => self.depth as i64,
        };
        let mut out = Vec::new();
        for power in (-lowest..=n as i64).rev() {
            let mut c = self.prec.czero();
            for (m, gm) in g.iter().enumerate() {
                let t = self.terms[m].coeff(power)?;
                crate::mp::fma_into(&mut c, gm, &t);
            }
            if power == n as i64 {
                c -= &self.prec.cone();
            }
            out.push((power, c));
        }
        Ok(out)
    }

    pub fn epsilon(&self, fam: &FaberFamily, n: usize) -> Result<EpsilonValue, Error> {
        let bits = self.prec.bits();
        let coeffs = self.h_coefficients(fam, n)?;
        let mut sum = self.prec.zero();
        let mut tail_data: Vec<(usize, f64)> = Vec::new();
        let mut deepest = 0usize;
        for (power, c) in &coeffs {
            let m = -power;
            if m < 2 {
                continue;
            }
            let t = Float::with_val(bits, c.norm_sqr() / (m - 1));
            let m = m as usize;
            deepest = deepest.max(m);
            if !t.is_zero() {
                tail_data.push((m, t.to_f64()));
            }
            sum += t;
        }
        let scale = self.prec.int(n as i64 + 1);
        if self.exact {
            return Ok(EpsilonValue {
                n,
                value: sum * scale,
                tail: 0.0,
                uncertainty: 0.0,
                depth: deepest,
            });
        }
        let k = self.depth;
        // drop rounding-level entries that sit on symmetry zeros
        let top = tail_data.iter().map(|(_, t)| *t).fold(0.0, f64::max);
        let window: Vec<(usize, f64)> = tail_data
            .into_iter()
            .filter(|(m, t)| 2 * m > k && *t > 1e-40 * top)
            .collect();
        let (tail, uncertainty) = tail_estimate(&window, k, self.exponent)?;
        let total = sum.to_f64() + tail;
        let value = (sum + tail) * &scale;
        let (n1, s1) = ((n + 1) as f64, total);
        if uncertainty > self.tolerance * s1.abs() {
            return Err(DiagnosticsError::TailNotConverged {
                uncertainty: uncertainty * n1,
                tolerance: self.tolerance,
            }
            .into());
        }
        Ok(EpsilonValue {
            n,
            value,
            tail: tail * n1,
            uncertainty: uncertainty * n1,
            depth: deepest,
        })
    }
}

/// Tail `sum_{m > K}` on the lattice of the window data, from least-squares
/// fits of `t_m m^s` as a polynomial in `1/m` of two orders.
fn tail_estimate(window: &[(usize, f64)], k: usize, exponent: Option<f64>) -> Result<(f64, f64), DiagnosticsError> {
    if window.len() < 8 {
        // everything beyond the window is numerically zero
        if window.iter().all(|(_, t)| *t == 0.0) {
            return Ok((0.0, 0.0));
        }
        return Err(DiagnosticsError::TailNotConverged {
            uncertainty: f64::INFINITY,
            tolerance: DEFAULT_TAIL_TOLERANCE,
        });
    }
    let s = exponent.unwrap_or_else(|| {
        let pts: Vec<(f64, f64)> = window.iter().map(|(m, t)| ((*m as f64).ln(), t.ln())).collect();
        -super::least_squares_line(&pts).0
    });
    let stride = window.windows(2).map(|w| w[1].0 - w[0].0).fold(0, gcd);
    let stride = stride.max(1);
    let first = window.last().map(|(m, _)| m + stride).unwrap_or(k + 1);
    let first = first + stride * ((k + 1).saturating_sub(first)).div_ceil(stride);
    let kf = k as f64;
    let u = |m: f64| 2.0 * kf / m - 3.0;
    let ys: Vec<(f64, f64)> = window
        .iter()
        .map(|(m, t)| (u(*m as f64), t * (*m as f64).powf(s)))
        .collect();
    let fit_tail = |order: usize| -> f64 {
        let a = poly_fit(&ys, order);
        let f = |m: f64| {
            let x = u(m);
            a.iter().rev().fold(0.0, |acc, c| acc * x + c) * m.powf(-s)
        };
        let limit = 400 * k;
        let mut total = 0.0;
        let mut m = first;
        while m <= limit {
            total += f(m as f64);
            m += stride;
        }
        // remainder: the fitted factor has settled at its m -> infinity value
        let a_inf = a.iter().rev().fold(0.0, |acc, c| acc * -3.0 + c);
        total + a_inf * (m as f64 - stride as f64 / 2.0).powf(1.0 - s) / ((s - 1.0) * stride as f64)
    };
    let t4 = fit_tail(4);
    let t5 = fit_tail(5);
    Ok((t5, (t5 - t4).abs()))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Least-squares polynomial coefficients (ascending) of the given order
/// (number of coefficients), by normal equations on `x in [-1, 1]`.
fn poly_fit(pts: &[(f64, f64)], order: usize) -> Vec<f64> {
    let mut a = vec![vec![0.0; order + 1]; order];
    for (x, y) in pts {
        let mut p = vec![1.0; order];
        for i in 1..order {
            p[i] = p[i - 1] * x;
        }
        for i in 0..order {
            for j in 0..order {
                a[i][j] += p[i] * p[j];
            }
            a[i][order] += p[i] * y;
        }
    }
    super::solve_dense(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::faber::faber_family;
    use crate::geometry::catalog;

    #[test]
    fn disk_has_no_singular_part() {
        let p = Precision::digits(40);
        let spec = catalog("disk", &[1.0], p).unwrap();
        let fam = faber_family(&spec, 6).unwrap();
        let eng = EpsilonEngine::new(&spec, 6).unwrap();
        for n in 0..=6 {
            assert!(eng.epsilon(&fam, n).unwrap().value.is_zero());
        }
    }

    #[test]
    fn hypocycloid_leading_tail_coefficient() {
        // H_n(z) = -b_{n+1} z^{-2} + ..., so c_2 = -b_{n+1} / b with b = 1
        let p = Precision::digits(40);
        let spec = catalog("hypocycloid", &[3.0], p).unwrap();
        let fam = faber_family(&spec, 4).unwrap();
        let eng = EpsilonEngine::new(&spec, 4).unwrap();
        let h = eng.h_coefficients(&fam, 2).unwrap();
        for (power, c) in &h {
            if *power >= -1 {
                assert!(c.abs_f64() < 1e-35, "power {power}");
            }
        }
        let c2 = &h.iter().find(|(pw, _)| *pw == -2).unwrap().1;
        assert!((c2.re.to_f64() + 1.0 / 3.0).abs() < 1e-35);
    }

    #[test]
    fn ellipse_is_exact_and_decays() {
        let p = Precision::digits(60);
        let spec = catalog("ellipse", &[1.0, 0.25], p).unwrap();
        let fam = faber_family(&spec, 12).unwrap();
        let eng = EpsilonEngine::new(&spec, 12).unwrap();
        let e: Vec<f64> = (1..=12).map(|n| eng.epsilon(&fam, n).unwrap().value.to_f64()).collect();
        assert!(e.iter().all(|v| *v > 0.0));
        for w in e.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn square_tail_model_matches_deep_sum() {
        // explicit sum at a much larger depth is the oracle for the tail fit
        let p = Precision::digits(40);
        let spec = catalog("square-map", &[1.0], p).unwrap();
        let fam = faber_family(&spec, 6).unwrap();
        let eng = EpsilonEngine::new(&spec, 6).unwrap();
        let e = eng.epsilon(&fam, 6).unwrap();
        assert!(e.tail > 0.0 && e.uncertainty < 1e-9 * e.value.to_f64());
        let mut deep = EpsilonEngine::new(&spec, 6).unwrap();
        deep.depth = 2500;
        let psi = spec.psi_to_depth(2510).unwrap();
        let dpsi = psi.differentiate();
        let mut pow = LaurentAtInfinity::constant(p.cone(), p);
        deep.terms.clear();
        for m in 0..=6 {
            if m > 0 {
                pow = pow.mul(&psi).unwrap();
            }
            deep.terms.push(pow.mul(&dpsi).unwrap());
        }
        let d = deep.epsilon(&fam, 6).unwrap();
        let rel = (e.value.to_f64() - d.value.to_f64()).abs() / d.value.to_f64();
        assert!(rel < 1e-10, "{rel:e}");
        let partial = e.value.to_f64() - e.tail;
        assert!((d.value.to_f64() - partial).abs() > 10.0 * (d.value.to_f64() - e.value.to_f64()).abs());
    }
}
