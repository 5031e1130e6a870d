//! Truncated Laurent series at infinity, `sum_k c_k w^k` for `k <= top`.
//!
//! A series is either *exact* (a Laurent polynomial: every coefficient below
//! the stored ones is zero) or *truncated* at a known depth `M`: coefficients
//! of `w^{-m}` for `m > M` are unknown. Arithmetic propagates the known depth
//! so that no operation ever reports a coefficient it cannot vouch for.

use serde::{Deserialize, Serialize};

use crate::error::{ParseError, SeriesError};
use crate::mp::{fma_into, to_decimal, Complex, Precision};

#[derive(Clone, Debug, PartialEq)]
pub struct LaurentAtInfinity {
    top: i64,
    /// `coeffs[i]` multiplies `w^{top - i}`.
    coeffs: Vec<Complex>,
    exact: bool,
    prec: Precision,
}

impl LaurentAtInfinity {
    /// Series with coefficients for `w^top, w^{top-1}, ...`.
    pub fn new(top: i64, coeffs: Vec<Complex>, prec: Precision, exact: bool) -> Self {
        let mut s = LaurentAtInfinity {
            top,
            coeffs,
            exact,
            prec,
        };
        if s.coeffs.is_empty() {
            s.coeffs.push(prec.czero());
        }
        s.normalize_top();
        s
    }

    /// Exact Laurent polynomial from `(power, coefficient)` pairs.
    pub fn from_terms(terms: &[(i64, Complex)], prec: Precision) -> Self {
        let top = terms.iter().map(|t| t.0).max().unwrap_or(0);
        let bottom = terms.iter().map(|t| t.0).min().unwrap_or(0).min(0);
        let mut coeffs = vec![prec.czero(); (top - bottom + 1) as usize];
        for (p, c) in terms {
            coeffs[(top - p) as usize] += c;
        }
        LaurentAtInfinity::new(top, coeffs, prec, true)
    }

    /// The identity map `w`.
    pub fn identity(prec: Precision) -> Self {
        Self::from_terms(&[(1, prec.cone())], prec)
    }

    pub fn constant(c: Complex, prec: Precision) -> Self {
        Self::from_terms(&[(0, c)], prec)
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn top_power(&self) -> i64 {
        self.top
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// Lowest stored power is `w^{-depth}`.
    pub fn depth(&self) -> i64 {
        self.coeffs.len() as i64 - 1 - self.top
    }

    /// Known depth, `None` for an exact series.
    pub fn known_depth(&self) -> Option<i64> {
        if self.exact {
            None
        } else {
            Some(self.depth())
        }
    }

    pub fn coefficients(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn leading(&self) -> &Complex {
        &self.coeffs[0]
    }

    /// Coefficient of `w^power`.
    pub fn coeff(&self, power: i64) -> Result<Complex, SeriesError> {
        if power > self.top {
            return Ok(self.prec.czero());
        }
        let idx = (self.top - power) as usize;
        match self.coeffs.get(idx) {
            Some(c) => Ok(c.clone()),
            None if self.exact => Ok(self.prec.czero()),
            None => Err(SeriesError::BeyondDepth {
                index: -power,
                depth: self.depth(),
            }),
        }
    }

    fn normalize_top(&mut self) {
        // Strip exactly-zero leading terms; they only cost known depth in products.
        let lead_zeros = self
            .coeffs
            .iter()
            .take(self.coeffs.len() - 1)
            .take_while(|c| c.is_zero())
            .count();
        if lead_zeros > 0 {
            self.coeffs.drain(..lead_zeros);
            self.top -= lead_zeros as i64;
        }
        if self.exact {
            while self.coeffs.len() > 1 && self.coeffs.last().is_some_and(|c| c.is_zero()) && self.depth() > 0 {
                self.coeffs.pop();
            }
        }
    }

    fn check_prec(&self, other: &Self) -> Result<(), SeriesError> {
        if self.prec != other.prec {
            return Err(SeriesError::PrecisionMismatch {
                left: self.prec.decimal_digits(),
                right: other.prec.decimal_digits(),
            });
        }
        Ok(())
    }

    /// Drop every power below `w^{-depth}`. The result stays exact only if
    /// nothing nonzero was dropped.
    pub fn truncated(&self, depth: i64) -> Self {
        let keep = (self.top + depth + 1).max(1) as usize;
        if keep >= self.coeffs.len() {
            return self.clone();
        }
        let dropped_nonzero = self.coeffs[keep..].iter().any(|c| !c.is_zero());
        LaurentAtInfinity::new(
            self.top,
            self.coeffs[..keep].to_vec(),
            self.prec,
            self.exact && !dropped_nonzero,
        )
    }

    /// Exact series padded with zeros down to `w^{-depth}`; truncated series
    /// are returned unchanged.
    pub fn padded(&self, depth: i64) -> Self {
        if !self.exact || self.depth() >= depth {
            return self.clone();
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.resize((self.top + depth + 1) as usize, self.prec.czero());
        LaurentAtInfinity {
            top: self.top,
            coeffs,
            exact: true,
            prec: self.prec,
        }
    }

    pub fn scale(&self, c: &Complex) -> Self {
        LaurentAtInfinity::new(
            self.top,
            self.coeffs.iter().map(|x| x * c).collect(),
            self.prec,
            self.exact,
        )
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_prec(other)?;
        let top = self.top.max(other.top);
        let exact = self.exact && other.exact;
        let depth = match (self.known_depth(), other.known_depth()) {
            (None, None) => self.depth().max(other.depth()),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (Some(a), Some(b)) => a.min(b),
        };
        let len = (top + depth + 1).max(1) as usize;
        let mut coeffs = vec![self.prec.czero(); len];
        for (src_top, src) in [(self.top, &self.coeffs), (other.top, &other.coeffs)] {
            for (i, c) in src.iter().enumerate() {
                let idx = (top - src_top) as usize + i;
                if idx < len {
                    coeffs[idx] += c;
                }
            }
        }
        Ok(LaurentAtInfinity::new(top, coeffs, self.prec, exact))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.add(&other.scale(&(-self.prec.cone())))
    }

    /// Product. Known depth is `min(M_a - p_b, M_b - p_a)`: an unknown term
    /// of one factor times the top term of the other is the first unknown
    /// product term.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_prec(other)?;
        let top = self.top + other.top;
        let exact = self.exact && other.exact;
        let depth = match (self.known_depth(), other.known_depth()) {
            (None, None) => self.depth() + other.depth(),
            (Some(a), None) => a - other.top,
            (None, Some(b)) => b - self.top,
            (Some(a), Some(b)) => (a - other.top).min(b - self.top),
        };
        let len = (top + depth + 1).max(1) as usize;
        Ok(LaurentAtInfinity::new(
            top,
            mul_coeffs(&self.coeffs, &other.coeffs, len, self.prec),
            self.prec,
            exact,
        ))
    }

    /// `self^n` by repeated squaring.
    pub fn power(&self, n: u32) -> Result<Self, SeriesError> {
        let mut result = LaurentAtInfinity::constant(self.prec.cone(), self.prec);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// `1/self`, computed to depth `depth` (only meaningful as far as the
    /// operand's known depth allows; the result is clipped accordingly).
    pub fn reciprocal(&self, depth: i64) -> Result<Self, SeriesError> {
        let a0 = self.leading().clone();
        if a0.is_zero() {
            return Err(SeriesError::ZeroLeading);
        }
        let top = -self.top;
        let depth = match self.known_depth() {
            Some(m) => depth.min(m + 2 * self.top),
            None => depth,
        };
        let len = (top + depth + 1).max(1) as usize;
        let inv0 = a0.recip();
        let mut r: Vec<Complex> = Vec::with_capacity(len);
        r.push(inv0.clone());
        for k in 1..len {
            let mut acc = self.prec.czero();
            for i in 1..=k.min(self.coeffs.len() - 1) {
                fma_into(&mut acc, &self.coeffs[i], &r[k - i]);
            }
            r.push(-(&acc * &inv0));
        }
        Ok(LaurentAtInfinity::new(top, r, self.prec, false))
    }

    /// Evaluate the polynomial `sum_k p[k] x^k` at this series (Horner).
    pub fn compose_poly(&self, poly: &[Complex]) -> Result<Self, SeriesError> {
        let mut acc = LaurentAtInfinity::constant(poly.last().cloned().unwrap_or_else(|| self.prec.czero()), self.prec);
        for c in poly.iter().rev().skip(1) {
            acc = acc.mul(self)?;
            acc = acc.add(&LaurentAtInfinity::constant(c.clone(), self.prec))?;
        }
        Ok(acc)
    }

    /// Termwise derivative: the top power drops by one and, for a truncated
    /// series, the known depth grows by one.
    pub fn differentiate(&self) -> Self {
        let coeffs: Vec<Complex> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c.scale_i64(self.top - i as i64))
            .collect();
        // coefficient i now multiplies w^{top - i - 1}
        let mut s = LaurentAtInfinity {
            top: self.top - 1,
            coeffs,
            exact: self.exact,
            prec: self.prec,
        };
        s.normalize_top();
        s
    }

    /// Truncated sum at `w`.
    pub fn eval(&self, w: &Complex) -> Complex {
        // Horner in 1/w from the lowest power, then multiply by w^top.
        let inv = w.recip();
        let mut acc = self.prec.czero().with_prec(w.prec());
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &inv) + c;
        }
        // acc = sum c_i w^{-i}
        &acc * &w.powi(self.top)
    }

    /// Compositional inverse of `psi(w) = b w + b_0 + b_1/w + ...` at
    /// infinity, returned to the natural known depth of `psi` (exact inputs
    /// use their stored depth, at least 8).
    pub fn reversion(&self) -> Result<Reversion, SeriesError> {
        let d = match self.known_depth() {
            Some(m) => m,
            None => self.depth().max(8),
        };
        self.reversion_to(d)
    }

    /// Newton iteration `phi <- phi - (psi(phi) - z) / psi'(phi)` on series
    /// truncated at `z^{-depth}`; each step doubles the number of correct terms.
    pub fn reversion_to(&self, depth: i64) -> Result<Reversion, SeriesError> {
        if self.top != 1 {
            return Err(SeriesError::TopPower(self.top));
        }
        let b = self.coeff(1)?;
        if b.is_zero() {
            return Err(SeriesError::ZeroLeading);
        }
        let depth = match self.known_depth() {
            Some(m) => depth.min(m),
            None => depth,
        }
        .max(0);
        let prec = self.prec;
        let d = depth as usize;
        // Working arrays index 0 <-> z^1, index i <-> z^{1-i}; length d + 2.
        let len = d + 2;
        let tail: Vec<Complex> = (1..=depth)
            .map(|m| self.coeff(-m).unwrap_or_else(|_| prec.czero()))
            .collect();
        let b0 = self.coeff(0)?;
        let inv_b = b.recip();

        let mut phi = vec![prec.czero(); len];
        phi[0] = inv_b.clone();
        phi[1] = -(&b0 * &inv_b);

        let max_iter = 2 * (64 - (d as u64 + 2).leading_zeros() as usize) + 6;
        let tol = Precision::tenth_pow(prec.decimal_digits() as f64 - 4.0);
        let mut iter = 0;
        let residual = loop {
            let (value, deriv) = compose_psi(&b, &b0, &tail, &phi, d, prec);
            // value - z
            let mut r = value;
            r[0] -= &prec.cone();
            let residual = r.iter().map(|c| c.abs_f64()).fold(0.0, f64::max);
            if residual < tol || iter == max_iter {
                break residual;
            }
            iter += 1;
            // correction = r / deriv, deriv has top power 0 with leading b
            let deriv_inv = reciprocal_top0(&deriv, len, prec);
            let corr = mul_coeffs(&r, &deriv_inv, len, prec);
            for (p, c) in phi.iter_mut().zip(&corr) {
                *p -= c;
            }
        };
        let phi_series = LaurentAtInfinity::new(1, phi, prec, false);
        if residual > Precision::tenth_pow(prec.decimal_digits() as f64 - 10.0) {
            return Err(SeriesError::ReversionFailed { residual });
        }
        Ok(Reversion {
            phi: phi_series,
            residual,
        })
    }

    pub fn to_record(&self) -> SeriesRecord {
        SeriesRecord {
            top_power: self.top,
            coefficients: self
                .coeffs
                .iter()
                .map(|c| [to_decimal(&c.re), to_decimal(&c.im)])
                .collect(),
            precision_digits: self.prec.decimal_digits(),
            exact: self.exact,
        }
    }

    pub fn from_record(rec: &SeriesRecord) -> Result<Self, ParseError> {
        let prec = Precision::digits(rec.precision_digits);
        let coeffs = rec
            .coefficients
            .iter()
            .map(|[re, im]| prec.parse_complex(re, im))
            .collect::<Result<Vec<_>, _>>()?;
        if coeffs.is_empty() {
            return Err(ParseError::Config("series has no coefficients".into()));
        }
        Ok(LaurentAtInfinity::new(rec.top_power, coeffs, prec, rec.exact))
    }
}

/// Result of [`LaurentAtInfinity::reversion`].
#[derive(Clone, Debug)]
pub struct Reversion {
    pub phi: LaurentAtInfinity,
    /// Max coefficient of `psi(phi(z)) - z` through the retained depth.
    pub residual: f64,
}

/// Serialized series: top power, decimal-string coefficient pairs, precision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub top_power: i64,
    pub coefficients: Vec<[String; 2]>,
    pub precision_digits: u32,
    #[serde(default)]
    pub exact: bool,
}

/// Truncated product of coefficient arrays aligned at index 0.
fn mul_coeffs(a: &[Complex], b: &[Complex], len: usize, prec: Precision) -> Vec<Complex> {
    let mut out = vec![prec.czero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            if y.is_zero() {
                continue;
            }
            fma_into(&mut out[i + j], x, y);
        }
    }
    out
}

/// Reciprocal of an array whose index 0 is the (nonzero) leading term.
fn reciprocal_top0(a: &[Complex], len: usize, prec: Precision) -> Vec<Complex> {
    let inv0 = a[0].recip();
    let mut r: Vec<Complex> = Vec::with_capacity(len);
    r.push(inv0.clone());
    for k in 1..len {
        let mut acc = prec.czero();
        for i in 1..=k.min(a.len() - 1) {
            fma_into(&mut acc, &a[i], &r[k - i]);
        }
        r.push(-(&acc * &inv0));
    }
    r
}

/// `psi(phi)` and `psi'(phi)` for `phi` with top power 1 (arrays index 0 <->
/// z^1 for the value, index 0 <-> z^0 for the derivative).
fn compose_psi(
    b: &Complex,
    b0: &Complex,
    tail: &[Complex],
    phi: &[Complex],
    d: usize,
    prec: Precision,
) -> (Vec<Complex>, Vec<Complex>) {
    let len = d + 2;
    // u = 1/phi: phi = z * (phi[0] + phi[1]/z + ...), so u = z^{-1} * rec.
    let rec = reciprocal_top0(phi, len, prec);
    // u as array with index i <-> z^{-i} (index 0 is z^0, zero)
    let mut u = vec![prec.czero(); len + 1];
    for (i, c) in rec.iter().enumerate() {
        u[i + 1] = c.clone();
    }
    u.truncate(len + 1);
    let m_max = tail.iter().rposition(|c| !c.is_zero()).map_or(0, |i| i + 1);
    // sum_m b_m u^m and sum_m m b_m u^{m+1}, indices i <-> z^{-i}
    let mut sum = vec![prec.czero(); len + 1];
    let mut dsum = vec![prec.czero(); len + 1];
    if m_max > 0 {
        let mut acc = vec![prec.czero(); len + 1];
        let mut dacc = vec![prec.czero(); len + 1];
        acc[0] = tail[m_max - 1].clone();
        dacc[0] = tail[m_max - 1].scale_i64(m_max as i64);
        for m in (1..m_max).rev() {
            acc = mul_coeffs(&acc, &u, len + 1, prec);
            acc[0] += &tail[m - 1];
            dacc = mul_coeffs(&dacc, &u, len + 1, prec);
            dacc[0] += &tail[m - 1].scale_i64(m as i64);
        }
        sum = mul_coeffs(&acc, &u, len + 1, prec);
        let u2 = mul_coeffs(&u, &u, len + 1, prec);
        dsum = mul_coeffs(&dacc, &u2, len + 1, prec);
    }
    // value: index 0 <-> z^1
    let mut value: Vec<Complex> = phi.iter().map(|c| b * c).collect();
    value.resize(len, prec.czero());
    value[1] += b0;
    for i in 0..len - 1 {
        // sum index i <-> z^{-i} <-> value index i + 1
        value[i + 1] += &sum[i];
    }
    // derivative: index i <-> z^{-i}
    let mut deriv = vec![prec.czero(); len];
    deriv[0] = b.clone();
    for i in 0..len {
        deriv[i] -= &dsum[i];
    }
    (value, deriv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> Precision {
        Precision::digits(50)
    }

    fn c(x: f64) -> Complex {
        p().complex(x, 0.0)
    }

    fn max_diff(a: &LaurentAtInfinity, b: &LaurentAtInfinity, depth: i64) -> f64 {
        let top = a.top_power().max(b.top_power());
        (-depth..=top)
            .map(|k| (a.coeff(k).unwrap() - b.coeff(k).unwrap()).abs_f64())
            .fold(0.0, f64::max)
    }

    #[test]
    fn products_of_simple_series() {
        let w = LaurentAtInfinity::identity(p());
        let w2 = w.mul(&w).unwrap();
        assert_eq!(w2.top_power(), 2);
        assert_eq!(w2.coeff(2).unwrap(), c(1.0));
        assert!(w2.coeff(1).unwrap().is_zero());

        let a = LaurentAtInfinity::from_terms(&[(1, c(1.0)), (-1, c(1.0))], p());
        let b = LaurentAtInfinity::from_terms(&[(1, c(1.0)), (-1, c(-1.0))], p());
        let prod = a.mul(&b).unwrap();
        let expect = LaurentAtInfinity::from_terms(&[(2, c(1.0)), (-2, c(-1.0))], p());
        assert!(max_diff(&prod, &expect, 4) == 0.0);
    }

    #[test]
    fn ellipse_times_its_derivative() {
        // (a w + b/w)(a - b/w^2) = a^2 w - b^2/w^3
        let (a, b) = (1.5, 0.25);
        let s = LaurentAtInfinity::from_terms(&[(1, c(a)), (-1, c(b))], p());
        let ds = s.differentiate();
        assert_eq!(ds.coeff(0).unwrap(), c(a));
        assert_eq!(ds.coeff(-2).unwrap(), c(-b));
        let prod = s.mul(&ds).unwrap();
        let expect = LaurentAtInfinity::from_terms(&[(1, c(a * a)), (-3, c(-b * b))], p());
        assert!(max_diff(&prod, &expect, 5) < 1e-45);
    }

    #[test]
    fn truncated_product_depth() {
        // psi truncated at depth 5: psi^2 is known to depth 4
        let coeffs: Vec<Complex> = (0..7).map(|i| c(1.0 / (i as f64 + 1.0))).collect();
        let s = LaurentAtInfinity::new(1, coeffs, p(), false);
        assert_eq!(s.depth(), 5);
        let sq = s.mul(&s).unwrap();
        assert_eq!(sq.known_depth(), Some(4));
        assert!(sq.coeff(-5).is_err());
    }

    #[test]
    fn powers() {
        let w = LaurentAtInfinity::identity(p());
        let w5 = w.power(5).unwrap();
        assert_eq!(w5.top_power(), 5);
        assert_eq!(w5.coefficients().len(), 6);
        let s = LaurentAtInfinity::from_terms(&[(1, c(1.0)), (-1, c(1.0))], p());
        let s2 = s.power(2).unwrap();
        let expect = LaurentAtInfinity::from_terms(&[(2, c(1.0)), (0, c(2.0)), (-2, c(1.0))], p());
        assert!(max_diff(&s2, &expect, 3) == 0.0);
        assert_eq!(s.power(0).unwrap().coeff(0).unwrap(), c(1.0));
    }

    #[test]
    fn derivative_examples() {
        let w2 = LaurentAtInfinity::from_terms(&[(2, c(1.0))], p());
        let d = w2.differentiate();
        assert_eq!(d.coeff(1).unwrap(), c(2.0));
        let inv = LaurentAtInfinity::from_terms(&[(-1, c(1.0))], p());
        assert_eq!(inv.differentiate().coeff(-2).unwrap(), c(-1.0));
        let hypo = LaurentAtInfinity::from_terms(&[(1, c(1.0)), (-3, p().ratio(1, 3).into_complex())], p());
        let dh = hypo.differentiate();
        assert_eq!(dh.coeff(0).unwrap(), c(1.0));
        assert!((dh.coeff(-4).unwrap() - c(-1.0)).abs_f64() < 1e-45);
    }

    #[test]
    fn reversion_examples() {
        let w = LaurentAtInfinity::identity(p());
        let r = w.reversion().unwrap();
        assert!((r.phi.coeff(1).unwrap() - c(1.0)).abs_f64() < 1e-45);
        assert!(r.phi.coeff(-3).unwrap().is_zero() || r.phi.coeff(-3).unwrap().abs_f64() < 1e-45);

        let two_w = LaurentAtInfinity::from_terms(&[(1, c(2.0))], p());
        let r = two_w.reversion().unwrap();
        assert!((r.phi.coeff(1).unwrap() - c(0.5)).abs_f64() < 1e-45);

        // w + 0.25/w: phi(z) = (z + sqrt(z^2 - 1))/2 = z - 1/(4z) - 1/(16 z^3) - 1/(32 z^5) - ...
        let ell = LaurentAtInfinity::from_terms(&[(1, c(1.0)), (-1, c(0.25))], p());
        let r = ell.reversion_to(12).unwrap();
        assert!((r.phi.coeff(1).unwrap() - c(1.0)).abs_f64() < 1e-45);
        assert!(r.phi.coeff(0).unwrap().abs_f64() < 1e-45);
        assert!((r.phi.coeff(-1).unwrap() - c(-0.25)).abs_f64() < 1e-45);
        assert!((r.phi.coeff(-3).unwrap() - c(-0.0625)).abs_f64() < 1e-45);
        assert!((r.phi.coeff(-5).unwrap() - c(-1.0 / 32.0)).abs_f64() < 1e-45);
        assert!(r.residual < 1e-45);
    }

    #[test]
    fn reversion_rejects_bad_input() {
        let z = LaurentAtInfinity::from_terms(&[(0, c(1.0)), (-1, c(1.0))], p());
        assert!(matches!(z.reversion(), Err(SeriesError::TopPower(0))));
        let mismatch = LaurentAtInfinity::identity(Precision::digits(30));
        assert!(matches!(z.add(&mismatch), Err(SeriesError::PrecisionMismatch { .. })));
    }

    #[test]
    fn compose_poly_examples() {
        let s = LaurentAtInfinity::from_terms(&[(1, c(1.0)), (-1, c(1.0))], p());
        let sq = s.compose_poly(&[c(0.0), c(0.0), c(1.0)]).unwrap();
        let expect = LaurentAtInfinity::from_terms(&[(2, c(1.0)), (0, c(2.0)), (-2, c(1.0))], p());
        assert!(max_diff(&sq, &expect, 3) == 0.0);
        let k = s.compose_poly(&[c(3.0)]).unwrap();
        assert_eq!(k.top_power(), 0);
        assert_eq!(k.coeff(0).unwrap(), c(3.0));
    }

    #[test]
    fn eval_matches_direct_sum() {
        let s = LaurentAtInfinity::from_terms(&[(2, c(1.0)), (0, c(-0.5)), (-3, c(0.125))], p());
        let w = p().complex(1.2, 0.7);
        let direct = &(&w.powi(2) - &c(0.5)) + &w.powi(-3).mul_real(&p().real(0.125));
        assert!((s.eval(&w) - direct).abs_f64() < 1e-45);
    }

    #[test]
    fn record_round_trip() {
        let s = LaurentAtInfinity::from_terms(&[(1, c(0.59)), (-3, p().complex(-0.1, 1.0 / 3.0))], p());
        let back = LaurentAtInfinity::from_record(&s.to_record()).unwrap();
        assert_eq!(s, back);
    }

    trait IntoComplex {
        fn into_complex(self) -> Complex;
    }
    impl IntoComplex for crate::mp::Real {
        fn into_complex(self) -> Complex {
            Complex::from_real(self)
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn power_is_additive(m in 0u32..5, n in 0u32..5,
                             coeffs in proptest::collection::vec(-1.0f64..1.0, 4..8)) {
            let cs: Vec<Complex> = std::iter::once(c(1.0)).chain(coeffs.iter().map(|&x| c(x))).collect();
            let s = LaurentAtInfinity::new(1, cs, p(), false);
            let lhs = s.power(m + n).unwrap();
            let rhs = s.power(m).unwrap().mul(&s.power(n).unwrap()).unwrap();
            let depth = lhs.known_depth().unwrap_or(8).min(rhs.known_depth().unwrap_or(8));
            prop_assert!(max_diff(&lhs, &rhs, depth) < 1e-42);
        }

        #[test]
        fn reversion_round_trip(b in 0.3f64..2.0, tail in proptest::collection::vec(-0.2f64..0.2, 1..6)) {
            let mut terms = vec![(1, c(b))];
            for (i, &t) in tail.iter().enumerate() {
                terms.push((-(i as i64) - 1, c(t)));
            }
            let psi = LaurentAtInfinity::from_terms(&terms, p());
            let r = psi.reversion_to(16).unwrap();
            prop_assert!(r.residual < 1e-42);
            prop_assert!((r.phi.coeff(1).unwrap() - c(b).recip()).abs_f64() < 1e-42);
        }
    }
}
