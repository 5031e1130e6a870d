//! Closed-form exterior map of a regular `q`-gon centred at the origin,
//!
//! `Psi'(w) = b (1 + w^{-q})^{2/q}`,
//!
//! with prevertices at `e^{i pi (2j+1)/q}` so that one edge is vertical and
//! crosses the positive real axis (the square comes out axis-aligned). The
//! capacity `b` follows from Gauss's summation formula for the hypergeometric
//! form of `Psi` at a prevertex.
//!
//! Boundary points are never obtained from the Laurent series (which converges
//! only algebraically on `|w| = 1`): every edge is straight, so
//! `z(theta) = corner + direction * arclength`, and the arclength integral
//! becomes analytic after the substitution `tau = t s^m`.

use std::sync::Arc;

use rug::ops::Pow;
use rug::Float;

use crate::error::GeometryError;
use crate::mp::{Complex, Precision, Real};
use crate::quadrature::GaussLegendre;
use crate::series::LaurentAtInfinity;

/// Below this modulus `Psi` is obtained by radial integration of `Psi'`.
const SERIES_RADIUS: f64 = 1.1;

#[derive(Clone, Debug, PartialEq)]
pub struct RegularPolygonMap {
    q: u32,
    side: Real,
    b: Real,
    circumradius: Real,
    prec: Precision,
}

impl RegularPolygonMap {
    pub fn new(q: u32, side: &Real, prec: Precision) -> Result<Self, GeometryError> {
        if q < 3 {
            return Err(GeometryError::InvalidParams {
                name: "regular polygon".into(),
                reason: format!("needs at least 3 sides, got {q}"),
            });
        }
        if !(side.is_finite() && *side > 0) {
            return Err(GeometryError::InvalidParams {
                name: "regular polygon".into(),
                reason: "side length must be positive".into(),
            });
        }
        let bits = prec.bits();
        let side = Float::with_val(bits, side);
        let angle = prec.pi() / q;
        let circumradius = Float::with_val(bits, &side / 2u32) / angle.sin();
        // b = R Gamma(1+1/q) / (Gamma(1-1/q) Gamma(1+2/q))
        let inv_q = prec.ratio(1, q as i64);
        let g1 = Float::with_val(bits, prec.one() + &inv_q).gamma();
        let g2 = Float::with_val(bits, prec.one() - &inv_q).gamma();
        let g3 = Float::with_val(bits, prec.one() + Float::with_val(bits, &inv_q * 2u32)).gamma();
        let b = Float::with_val(bits, &circumradius * &g1) / (g2 * g3);
        Ok(RegularPolygonMap {
            q,
            side,
            b,
            circumradius,
            prec,
        })
    }

    pub fn sides(&self) -> u32 {
        self.q
    }

    pub fn side(&self) -> &Real {
        &self.side
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    /// Leading coefficient (the capacity).
    pub fn capacity(&self) -> &Real {
        &self.b
    }

    pub fn circumradius(&self) -> &Real {
        &self.circumradius
    }

    /// Exterior angle factor `omega = 1 + 2/q` at every corner.
    pub fn omega(&self) -> Real {
        self.prec.one() + self.prec.ratio(2, self.q as i64)
    }

    /// Same map carried at another precision.
    pub fn with_precision(&self, prec: Precision) -> Self {
        RegularPolygonMap::new(self.q, &self.side, prec).expect("parameters already validated")
    }

    /// Prevertex angle of corner `j`.
    pub fn prevertex_angle(&self, j: i64) -> Real {
        self.prec.pi() * Float::with_val(self.prec.bits(), 2 * j + 1) / self.q
    }

    /// Corner `j` (counterclockwise from the first quadrant).
    pub fn vertex(&self, j: i64) -> Complex {
        Complex::cis(&self.prevertex_angle(j)).mul_real(&self.circumradius)
    }

    pub fn vertices(&self) -> Vec<Complex> {
        (0..self.q as i64).map(|j| self.vertex(j)).collect()
    }

    /// `b_m`, the coefficient of `w^{-m}` (`m >= 0`); nonzero only for
    /// `m = q j - 1`.
    pub fn coefficient(&self, m: u64) -> Real {
        let q = self.q as u64;
        if (m + 1) % q != 0 {
            return self.prec.zero();
        }
        let j = (m + 1) / q;
        self.binom_coeffs(j as usize).pop().expect("nonempty")
    }

    /// `b * binom(2/q, j) / (1 - q j)` for `j = 0..=jmax` (index 0 is `b`).
    fn binom_coeffs(&self, jmax: usize) -> Vec<Real> {
        let bits = self.prec.bits();
        let a = self.prec.ratio(2, self.q as i64);
        let mut binom = self.prec.one();
        let mut out = Vec::with_capacity(jmax + 1);
        out.push(self.b.clone());
        for j in 1..=jmax {
            // binom(a, j) = binom(a, j-1) (a - j + 1) / j
            binom *= Float::with_val(bits, &a - (j as u32 - 1));
            binom /= j as u32;
            let denom = 1i64 - self.q as i64 * j as i64;
            out.push(Float::with_val(bits, &self.b * &binom) / denom);
        }
        out
    }

    /// The Laurent series of `Psi`, truncated at `w^{-depth}`.
    pub fn series(&self, depth: u64) -> LaurentAtInfinity {
        let q = self.q as u64;
        let jmax = ((depth + 1) / q) as usize;
        let coeffs = self.binom_coeffs(jmax);
        let mut out = vec![self.prec.czero(); depth as usize + 2];
        out[0] = Complex::from_real(coeffs[0].clone());
        for (j, c) in coeffs.iter().enumerate().skip(1) {
            let m = q as usize * j - 1;
            out[m + 1] = Complex::from_real(c.clone());
        }
        LaurentAtInfinity::new(1, out, self.prec, false)
    }

    /// `Psi'(w)` for `|w| >= 1`.
    pub fn psi_prime(&self, w: &Complex) -> Complex {
        let x = w.powi(-(self.q as i64));
        let base = &self.prec.cone().with_prec(w.prec()) + &x;
        let e = Float::with_val(w.prec(), 2) / self.q;
        base.powf(&e).mul_real(&self.b)
    }

    /// `Psi(w)` for `|w| >= 1`.
    pub fn psi(&self, w: &Complex) -> Complex {
        let bits = w.prec();
        let r = w.abs();
        if r >= SERIES_RADIUS {
            return self.psi_series(w);
        }
        let eps = Precision::tenth_pow(self.prec.decimal_digits() as f64 / 2.0);
        let theta = w.arg();
        if Float::with_val(bits, &r - 1u32).to_f64() <= eps {
            return self.boundary_point(&theta).0;
        }
        // Psi(w) = Psi(w1) - int_{|w|}^{r1} Psi'(rho e^{i theta}) e^{i theta} d rho
        let unit = Complex::cis(&theta);
        let r1 = Float::with_val(bits, SERIES_RADIUS);
        let w1 = unit.mul_real(&r1);
        let mut acc = self.psi_series(&w1);
        let n = (1.3 * self.prec.decimal_digits() as f64) as usize + 10;
        let rule = GaussLegendre::new(n, self.prec);
        let d = Float::with_val(bits, &r - 1u32);
        let mut hi = r1;
        loop {
            let width = Float::with_val(bits, &hi - &r);
            let lo = if width <= Float::with_val(bits, &d * 2u32) {
                r.clone()
            } else {
                Float::with_val(bits, &r + Float::with_val(bits, &width / 2u32))
            };
            let mut panel = self.prec.czero();
            for (x, wt) in rule.mapped(&lo, &hi) {
                let v = self.psi_prime(&unit.mul_real(&x));
                panel += &v.mul_real(&wt);
            }
            acc -= &(&panel * &unit);
            if lo == r {
                break;
            }
            hi = lo;
        }
        acc
    }

    fn psi_series(&self, w: &Complex) -> Complex {
        let bits = w.prec();
        let q = self.q as i64;
        let x = -w.powi(-q);
        let a = Float::with_val(bits, -2) / self.q;
        let bb = Float::with_val(bits, -1) / self.q;
        let c = Float::with_val(bits, 1u32) + &bb;
        let mut term = Complex::from_real(Float::with_val(bits, 1));
        let mut sum = term.clone();
        let tiny = Float::with_val(bits, Float::i_exp(1, -(bits as i32)));
        let mut j: u32 = 1;
        loop {
            let num = Float::with_val(bits, &a + (j - 1)) * Float::with_val(bits, &bb + (j - 1));
            let den = Float::with_val(bits, &c + (j - 1)) * j;
            term = (&term * &x).mul_real(&(num / den));
            sum += &term;
            if j > 8 && term.abs() < Float::with_val(bits, &tiny * sum.abs()) {
                break;
            }
            j += 1;
        }
        (w * &sum).mul_real(&self.b)
    }

    /// Arclength from a corner to the image of the prevertex angle offset
    /// `tau in [0, pi/q]`.
    pub fn arclength(&self, tau: &Real) -> Real {
        let bits = self.prec.bits();
        let m = self.substitution_power();
        let rule = GaussLegendre::new(self.quad_nodes(), self.prec);
        let zero = self.prec.zero();
        let one = self.prec.one();
        let mut acc = self.prec.zero();
        for (s, wt) in rule.mapped(&zero, &one) {
            acc += Float::with_val(bits, &wt * self.arclength_density(tau, &s, m));
        }
        Float::with_val(bits, &acc * tau) * &self.b * m
    }

    /// `(2 sin(q tau s^m / 2))^{2/q} s^{m-1}`.
    fn arclength_density(&self, tau: &Real, s: &Real, m: u32) -> Real {
        let bits = self.prec.bits();
        let sm = Float::with_val(bits, s.pow_ref_u(m));
        let arg = Float::with_val(bits, tau * &sm) * self.q / 2u32;
        let base = arg.sin() * 2u32;
        let e = Float::with_val(bits, 2) / self.q;
        let mut v = base.pow(&e);
        if m > 1 {
            v *= Float::with_val(bits, s.pow_ref_u(m - 1));
        }
        v
    }

    /// `m` in `tau = t s^m`: makes `(sin)^{2/q}` analytic in `s`.
    pub fn substitution_power(&self) -> u32 {
        self.q / gcd(self.q, 2)
    }

    fn quad_nodes(&self) -> usize {
        self.prec.decimal_digits() as usize + 20
    }

    /// `(z, dz/dtheta)` for `w = e^{i theta}`.
    pub fn boundary_point(&self, theta: &Real) -> (Complex, Complex) {
        let bits = self.prec.bits();
        let two_pi = prec_two_pi(self.prec);
        let span = Float::with_val(bits, &two_pi / self.q);
        let first = self.prevertex_angle(0);
        // phase relative to corner 0, reduced into [0, 2 pi)
        let mut rel = Float::with_val(bits, theta - &first);
        rel %= &two_pi;
        if rel < 0 {
            rel += &two_pi;
        }
        let j = Float::with_val(bits, &rel / &span).floor().to_f64() as i64;
        let j = j.clamp(0, self.q as i64 - 1);
        let phi = Float::with_val(bits, &rel - Float::with_val(bits, &span * j));
        let half = Float::with_val(bits, &span / 2u32);
        let v0 = self.vertex(j);
        let v1 = self.vertex(j + 1);
        let dir = (&v1 - &v0).div_real(&self.side);
        let z = if phi <= half {
            &v0 + &dir.mul_real(&self.arclength(&phi))
        } else {
            let back = Float::with_val(bits, &span - &phi);
            &v1 - &dir.mul_real(&self.arclength(&back))
        };
        // |Psi'| = b (2 sin(q phi / 2))^{2/q}
        let arg = Float::with_val(bits, &phi * self.q) / 2u32;
        let e = Float::with_val(bits, 2) / self.q;
        let speed = (arg.sin() * 2u32).pow(&e) * &self.b;
        (z, dir.mul_real(&speed))
    }

    /// Gauss–Legendre data for one half-edge in the variable `s`, where the
    /// prevertex offset is `tau = (pi/q) s^m`: returns `(weight, sigma(s),
    /// dsigma/ds)` per node, `sigma` being the arclength from the corner.
    pub fn half_edge_rule(&self, nodes: usize) -> Vec<(Real, Real, Real)> {
        let bits = self.prec.bits();
        let m = self.substitution_power();
        let t = Float::with_val(bits, prec_two_pi(self.prec) / (2 * self.q));
        let outer: Arc<GaussLegendre> = GaussLegendre::new(nodes, self.prec);
        let inner = GaussLegendre::new(self.quad_nodes().max(nodes), self.prec);
        let scale = Float::with_val(bits, &t * &self.b) * m;
        let zero = self.prec.zero();
        let one = self.prec.one();
        outer
            .mapped(&zero, &one)
            .into_iter()
            .map(|(s, wt)| {
                let f = Float::with_val(bits, &scale * self.arclength_density(&t, &s, m));
                let mut sigma = self.prec.zero();
                for (u, wu) in inner.mapped(&zero, &s) {
                    sigma += Float::with_val(bits, &wu * self.arclength_density(&t, &u, m));
                }
                sigma *= &scale;
                (wt, sigma, f)
            })
            .collect()
    }
}

fn prec_two_pi(prec: Precision) -> Real {
    prec.pi() * 2u32
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

trait PowRefU {
    fn pow_ref_u(&self, e: u32) -> Real;
}

impl PowRefU for Real {
    fn pow_ref_u(&self, e: u32) -> Real {
        use rug::ops::Pow;
        Float::with_val(self.prec(), self.pow(e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(digits: u32) -> RegularPolygonMap {
        let p = Precision::digits(digits);
        RegularPolygonMap::new(4, &p.one(), p).unwrap()
    }

    #[test]
    fn square_capacity_matches_gamma_quarter_formula() {
        // cap = Gamma(1/4)^2 / (4 pi^{3/2})
        let sq = square(50);
        let p = sq.precision();
        let g = Float::with_val(p.bits(), p.ratio(1, 4).gamma());
        let pi = p.pi();
        let expect = Float::with_val(p.bits(), &g * &g) / (Float::with_val(p.bits(), pi.clone().sqrt() * &pi) * 4u32);
        assert!(Float::with_val(p.bits(), sq.capacity() - &expect).abs().to_f64() < 1e-45);
        assert!((sq.capacity().to_f64() - 0.590_170_299_508_048_1).abs() < 1e-15);
    }

    #[test]
    fn vertices_form_axis_aligned_unit_square() {
        let sq = square(40);
        let v = sq.vertices();
        let expect = [(0.5, 0.5), (-0.5, 0.5), (-0.5, -0.5), (0.5, -0.5)];
        for (z, (x, y)) in v.iter().zip(expect) {
            assert!((z - &sq.precision().complex(x, y)).abs_f64() < 1e-35);
        }
    }

    #[test]
    fn boundary_hits_corners_and_edge_midpoints() {
        let sq = square(40);
        let p = sq.precision();
        let (z, _) = sq.boundary_point(&sq.prevertex_angle(0));
        assert!((z - p.complex(0.5, 0.5)).abs_f64() < 1e-30);
        // theta = 0 is the midpoint of the right edge
        let (z, dz) = sq.boundary_point(&p.zero());
        assert!((z - p.complex(0.5, 0.0)).abs_f64() < 1e-30);
        assert!(dz.re.to_f64().abs() < 1e-30 && dz.im > 0);
        let (z, _) = sq.boundary_point(&(p.pi() / 2u32));
        assert!((z - p.complex(0.0, 0.5)).abs_f64() < 1e-30);
    }

    #[test]
    fn series_and_closed_form_agree_off_the_circle() {
        let sq = square(40);
        let p = sq.precision();
        let s = sq.series(1200);
        let w = p.complex(1.3, 0.4);
        assert!((s.eval(&w) - sq.psi(&w)).abs_f64() < 1e-35);
        // radial-integration branch against the series (still convergent at 1.05)
        let w = Complex::cis(&p.real(0.3)).mul_real(&p.real(1.05));
        let s = sq.series(4000);
        assert!((s.eval(&w) - sq.psi(&w)).abs_f64() < 1e-30);
    }

    #[test]
    fn derivative_matches_series_derivative() {
        let sq = square(40);
        let p = sq.precision();
        let ds = sq.series(800).differentiate();
        let w = p.complex(-0.9, 1.1);
        assert!((ds.eval(&w) - sq.psi_prime(&w)).abs_f64() < 1e-35);
    }

    #[test]
    fn first_coefficients() {
        let sq = square(40);
        let b = sq.capacity().to_f64();
        // Psi' = b (1 + w^{-4})^{1/2}: b_3 = b (1/2)/(-3), b_7 = b (-1/8)/(-7)
        assert!((sq.coefficient(3).to_f64() + b / 6.0).abs() < 1e-16);
        assert!((sq.coefficient(7).to_f64() - b / 56.0).abs() < 1e-16);
        assert!(sq.coefficient(1).is_zero());
        assert!(sq.coefficient(4).is_zero());
    }
}
