//! Polynomial roots by Aberth–Ehrlich simultaneous iteration with Newton
//! polishing.

use rug::Float;

use crate::mp::{Complex, Precision};

#[derive(Clone, Debug)]
pub struct RootReport {
    pub roots: Vec<Complex>,
    /// `|p(root)|` per root.
    pub residuals: Vec<f64>,
    /// Rounding floor `eps * sum |c_m| |root|^m` per root.
    pub floors: Vec<f64>,
    pub iterations: usize,
}

/// `(p(z), p'(z), sum |c_m| |z|^m)` for coefficients in ascending order.
pub fn horner(coeffs: &[Complex], z: &Complex) -> (Complex, Complex, f64) {
    let prec_bits = z.prec();
    let mut p = Complex::zero_bits(prec_bits);
    let mut dp = Complex::zero_bits(prec_bits);
    let az = z.abs_f64();
    let mut mag = 0.0;
    for c in coeffs.iter().rev() {
        dp = &(&dp * z) + &p;
        p = &(&p * z) + c;
        mag = mag * az + c.abs_f64();
    }
    (p, dp, mag)
}

/// All roots of `sum coeffs[m] z^m` (leading coefficient nonzero). Exact
/// zero low-order coefficients are factored out as roots at the origin.
pub fn aberth(coeffs: &[Complex], prec: Precision, start_radius: Option<f64>) -> RootReport {
    let mut deg = coeffs.len() - 1;
    while deg > 0 && coeffs[deg].is_zero() {
        deg -= 1;
    }
    let zeros_at_origin = coeffs.iter().take_while(|c| c.is_zero()).count().min(deg);
    let reduced: Vec<Complex> = coeffs[zeros_at_origin..=deg].to_vec();
    let n = reduced.len() - 1;
    let mut roots = vec![prec.czero(); zeros_at_origin];
    let mut iterations = 0;
    if n > 0 {
        let lead = reduced[n].abs_f64();
        let radius = start_radius.filter(|r| r.is_finite() && *r > 0.0).unwrap_or_else(|| {
            // Fujiwara-type bound, halved
            (0..n)
                .map(|m| (reduced[m].abs_f64() / lead).powf(1.0 / (n - m) as f64))
                .fold(0.0, f64::max)
                .max(1e-6)
        });
        let mut z: Vec<Complex> = (0..n)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n as f64 + 0.4;
                prec.complex(radius * t.cos(), radius * t.sin())
            })
            .collect();
        let tol = Precision::tenth_pow(prec.decimal_digits() as f64 - 6.0);
        let mut done = vec![false; n];
        for it in 0..(40 * n + 200) {
            iterations = it + 1;
            let mut max_step = 0.0f64;
            for k in 0..n {
                if done[k] {
                    continue;
                }
                let (p, dp, _) = horner(&reduced, &z[k]);
                if p.is_zero() {
                    done[k] = true;
                    continue;
                }
                let ratio = &p / &dp;
                let mut s = prec.czero();
                for j in 0..n {
                    if j != k {
                        s += &(&z[k] - &z[j]).recip();
                    }
                }
                let denom = &prec.cone() - &(&ratio * &s);
                let step = &ratio / &denom;
                let rel = step.abs_f64() / z[k].abs_f64().max(1.0);
                max_step = max_step.max(rel);
                if rel < tol {
                    done[k] = true;
                }
                z[k] -= &step;
            }
            if done.iter().all(|&d| d) || max_step < tol {
                break;
            }
        }
        // Newton polish
        for zk in z.iter_mut() {
            for _ in 0..3 {
                let (p, dp, _) = horner(&reduced, zk);
                if dp.is_zero() || p.is_zero() {
                    break;
                }
                *zk -= &(&p / &dp);
            }
        }
        roots.extend(z);
    }
    let eps = Float::with_val(prec.bits(), Float::i_exp(1, -(prec.bits() as i32))).to_f64();
    let mut residuals = Vec::with_capacity(roots.len());
    let mut floors = Vec::with_capacity(roots.len());
    for r in &roots {
        let (p, _, mag) = horner(coeffs, r);
        residuals.push(p.abs_f64());
        floors.push(eps * mag);
    }
    RootReport {
        roots,
        residuals,
        floors,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_roots(roots: &[Complex], prec: Precision) -> Vec<Complex> {
        let mut c = vec![prec.cone()];
        for r in roots {
            let mut next = vec![prec.czero(); c.len() + 1];
            for (i, x) in c.iter().enumerate() {
                next[i + 1] += x;
                next[i] -= &(x * r);
            }
            c = next;
        }
        c
    }

    #[test]
    fn recovers_known_roots() {
        let p = Precision::digits(50);
        let roots = vec![
            p.complex(0.3, 0.1),
            p.complex(-0.5, 0.2),
            p.complex(0.31, 0.1),
            p.complex(0.0, -0.7),
            p.complex(1.5, 0.0),
        ];
        let rep = aberth(&from_roots(&roots, p), p, None);
        for r in &roots {
            let best = rep
                .roots
                .iter()
                .map(|z| (z - r).abs_f64())
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-40, "{r}: {best:e}");
        }
    }

    #[test]
    fn monomial_roots_are_exactly_zero() {
        let p = Precision::digits(30);
        let mut c = vec![p.czero(); 6];
        c[5] = p.complex(2.0, 0.0);
        let rep = aberth(&c, p, None);
        assert_eq!(rep.roots.len(), 5);
        assert!(rep.roots.iter().all(|z| z.is_zero()));
    }
}
