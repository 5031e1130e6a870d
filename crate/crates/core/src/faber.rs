//! Faber polynomials of the first (`F_n`) and second (`G_n`) kind.

use crate::bergman::horner;
use crate::error::{ConformalError, Error, SeriesError};
use crate::geometry::DomainSpec;
use crate::linalg::CMatrix;
use crate::mp::{to_decimal, Complex, Precision, Real};
use crate::series::LaurentAtInfinity;

#[derive(Clone, Debug)]
pub struct FaberFamily {
    pub degree: usize,
    /// `f[n][m]`: coefficient of `z^m` in `F_n`, `n <= degree + 1`.
    pub f: CMatrix,
    /// `g[n][m]`: coefficient of `z^m` in `G_n = F'_{n+1}/(n+1)`, `n <= degree`.
    pub g: CMatrix,
    /// `gamma = 1/b`.
    pub gamma: Real,
    pub prec: Precision,
}

/// `b_{-1} = b, b_0, b_1, ..., b_{n}` as a vector indexed by `m + 1`.
fn psi_coefficients(psi: &LaurentAtInfinity, n: usize) -> Result<Vec<Complex>, SeriesError> {
    if psi.top_power() != 1 {
        return Err(SeriesError::TopPower(psi.top_power()));
    }
    (-1..=n as i64).map(|m| psi.coeff(-m)).collect()
}

/// `b F_{m+1} = (z - b_0) F_m - sum_{k=1}^{m} b_k F_{m-k} - m b_m`, `F_0 = 1`.
pub fn faber_recurrence(psi: &LaurentAtInfinity, n: usize) -> Result<FaberFamily, SeriesError> {
    let prec = psi.precision();
    let b = psi_coefficients(psi, n + 1)?;
    let lead = &b[0];
    if lead.is_zero() {
        return Err(SeriesError::ZeroLeading);
    }
    let inv = lead.recip();
    let bk = |k: usize| &b[k + 1];
    let mut f: CMatrix = vec![vec![prec.cone()]];
    for m in 0..=n {
        let mut next = vec![prec.czero(); m + 2];
        for (i, c) in f[m].iter().enumerate() {
            next[i + 1] += c;
            next[i] -= &(bk(0) * c);
        }
        for k in 1..=m {
            if bk(k).is_zero() {
                continue;
            }
            for (i, c) in f[m - k].iter().enumerate() {
                next[i] -= &(bk(k) * c);
            }
        }
        next[0] -= &bk(m).scale_i64(m as i64);
        for c in next.iter_mut() {
            *c = &*c * &inv;
        }
        f.push(next);
    }
    Ok(family_from_f(f, n, lead, prec))
}

fn family_from_f(f: CMatrix, n: usize, lead: &Complex, prec: Precision) -> FaberFamily {
    let g = (0..=n)
        .map(|k| {
            let row = &f[k + 1];
            (1..row.len())
                .map(|m| row[m].scale_i64(m as i64).div_real(&prec.int(k as i64 + 1)))
                .collect()
        })
        .collect();
    FaberFamily {
        degree: n,
        f,
        g,
        gamma: lead.re.clone().recip(),
        prec,
    }
}

/// Independent route: `F_k` is the polynomial part of `Phi^k`, with `Phi`
/// the series reversion of `psi`.
pub fn faber_oracle(psi: &LaurentAtInfinity, n: usize) -> Result<FaberFamily, SeriesError> {
    let prec = psi.precision();
    let phi = psi.reversion_to(n as i64 + 2)?.phi;
    let mut f: CMatrix = vec![vec![prec.cone()]];
    let mut pow = LaurentAtInfinity::constant(prec.cone(), prec);
    for k in 1..=n + 1 {
        pow = pow.mul(&phi)?;
        f.push((0..=k as i64).map(|m| pow.coeff(m)).collect::<Result<_, _>>()?);
    }
    Ok(family_from_f(f, n, psi.leading(), prec))
}

/// The family for a map-defined domain, coefficients regenerated to the
/// needed depth.
pub fn faber_family(spec: &DomainSpec, n: usize) -> Result<FaberFamily, Error> {
    let psi = spec.psi_to_depth(n as i64 + 4).ok_or(ConformalError::NoExteriorMap)?;
    Ok(faber_recurrence(&psi, n)?)
}

/// `b_m` (`m = -1` gives `b`).
pub fn laurent_coefficient(spec: &DomainSpec, m: i64) -> Result<Complex, SeriesError> {
    spec.laurent_coefficient(m)
}

impl FaberFamily {
    pub fn eval_f(&self, n: usize, z: &Complex) -> Complex {
        horner(&self.f[n], z)
    }

    pub fn eval_g(&self, n: usize, z: &Complex) -> Complex {
        horner(&self.g[n], z)
    }

    /// Max coefficientwise difference over `F_0..F_{N+1}` and `G_0..G_N`.
    pub fn max_difference(&self, other: &FaberFamily) -> f64 {
        let rows = |a: &CMatrix, b: &CMatrix| {
            a.iter()
                .zip(b)
                .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs_f64()))
                .fold(0.0, f64::max)
        };
        rows(&self.f, &other.f).max(rows(&self.g, &other.g))
    }

    /// CSV rows `kind,n,m,re,im` with `kind` = `F` or `G`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("kind,n,m,re,im\n");
        for (kind, table) in [("F", &self.f), ("G", &self.g)] {
            for (n, row) in table.iter().enumerate() {
                for (m, c) in row.iter().enumerate() {
                    s.push_str(&format!("{kind},{n},{m},{},{}\n", to_decimal(&c.re), to_decimal(&c.im)));
                }
            }
        }
        s
    }
}

/// `E_n(z) = F_n(z) - Phi(z)^n` and `H_n(z) = G_n(z) - Phi(z)^n Phi'(z)`.
pub fn singular_parts(fam: &FaberFamily, w: &Complex, dphi: &Complex, n: usize, z: &Complex) -> (Complex, Complex) {
    let wn = w.powi(n as i64);
    let e = &fam.eval_f(n, z) - &wn;
    let h = &fam.eval_g(n, z) - &(&wn * dphi);
    (e, h)
}
