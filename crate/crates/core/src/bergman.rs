//! Bergman polynomials: orthonormalization of the monomials against the
//! moment matrix, evaluation, kernel sums, the Hessenberg (recurrence) matrix
//! and zeros.

use rug::Float;

use crate::error::BergmanError;
use crate::linalg::{self, CMatrix};
use crate::moments::MomentMatrix;
use crate::mp::{fma_conj_into, fma_into, to_decimal, Complex, Precision, Real};
use crate::roots;

#[derive(Clone, Debug)]
pub struct OrthonormalBasis {
    pub degree: usize,
    /// `coeffs[n][m]` multiplies `z^m` in `p_n`, `m <= n`.
    pub coeffs: CMatrix,
    /// `lambda_n = coeffs[n][n] > 0`.
    pub lambdas: Vec<Real>,
    pub prec: Precision,
    /// `max |C M C* - I|`.
    pub gram_residual: f64,
}

/// `C = L^{-1}` where `M = L L*`; row `n` of `C` is `p_n`.
pub fn orthonormalize(m: &MomentMatrix) -> Result<OrthonormalBasis, BergmanError> {
    let prec = m.prec;
    let l = linalg::cholesky(&m.entries, prec).map_err(|index| BergmanError::CholeskyBreakdown {
        index,
        required_digits: required_digits(m, index),
    })?;
    let c = linalg::lower_inverse(&l, prec);
    let lambdas = (0..=m.degree).map(|n| c[n][n].re.clone()).collect();
    let gram_residual = linalg::gram_residual(&c, &m.entries, prec);
    Ok(OrthonormalBasis {
        degree: m.degree,
        coeffs: c.into_iter().enumerate().map(|(n, row)| row[..=n].to_vec()).collect(),
        lambdas,
        prec,
        gram_residual,
    })
}

/// Digits lost to cancellation grow roughly linearly in the index: fit the
/// loss `log10(M_ii / L_ii^2)` over the successful pivots and extrapolate.
fn required_digits(m: &MomentMatrix, failed: usize) -> u32 {
    let prec = m.prec;
    let lead = m.leading(failed.saturating_sub(1));
    let losses: Vec<f64> = match linalg::cholesky(&lead.entries, prec) {
        Ok(l) => (0..l.len())
            .map(|i| (m.entries[i][i].re.to_f64() / l[i][i].re.to_f64().powi(2)).log10())
            .collect(),
        Err(_) => vec![],
    };
    let per_index = if losses.len() >= 2 {
        (losses[losses.len() - 1] - losses[0]) / (losses.len() - 1) as f64
    } else {
        3.0
    };
    let needed = per_index.max(1.0) * m.degree as f64 + 20.0;
    (needed.ceil() as u32).max(prec.decimal_digits() + 10)
}

impl OrthonormalBasis {
    fn check(&self, n: usize) -> Result<(), BergmanError> {
        if n > self.degree {
            return Err(BergmanError::DegreeOutOfRange { n, max: self.degree });
        }
        Ok(())
    }

    pub fn row(&self, n: usize) -> &[Complex] {
        &self.coeffs[n]
    }

    /// `p_n(z)` by Horner.
    pub fn evaluate(&self, n: usize, z: &Complex) -> Result<Complex, BergmanError> {
        self.check(n)?;
        Ok(horner(&self.coeffs[n], z))
    }

    /// `p_0(z), ..., p_N(z)`.
    pub fn evaluate_all(&self, z: &Complex) -> Vec<Complex> {
        let mut powers = Vec::with_capacity(self.degree + 1);
        powers.push(self.prec.cone());
        for m in 1..=self.degree {
            let next = &powers[m - 1] * z;
            powers.push(next);
        }
        self.coeffs
            .iter()
            .map(|row| {
                let mut s = self.prec.czero();
                for (c, zp) in row.iter().zip(&powers) {
                    fma_into(&mut s, c, zp);
                }
                s
            })
            .collect()
    }

    /// `K_N(z, zeta) = sum_{n <= N} p_n(z) conj(p_n(zeta))`.
    pub fn kernel(&self, z: &Complex, zeta: &Complex, n: usize) -> Result<Complex, BergmanError> {
        self.check(n)?;
        let a = self.evaluate_all(z);
        let b = self.evaluate_all(zeta);
        let mut s = self.prec.czero();
        for i in 0..=n {
            fma_conj_into(&mut s, &a[i], &b[i]);
        }
        Ok(s)
    }

    /// All zeros of `p_n`, Newton-polished.
    pub fn zeros(&self, n: usize) -> Result<Vec<Complex>, BergmanError> {
        self.check(n)?;
        if n == 0 {
            return Ok(vec![]);
        }
        let row = &self.coeffs[n];
        let lam = self.lambdas[n].to_f64();
        let c0 = row[0].abs_f64();
        let start = if c0 > 0.0 {
            Some((c0 / lam).powf(1.0 / n as f64))
        } else {
            None
        };
        let rep = roots::aberth(row, self.prec, start);
        let tol = Precision::tenth_pow(self.prec.decimal_digits() as f64 - 10.0);
        for (i, (r, (res, floor))) in rep.roots.iter().zip(rep.residuals.iter().zip(&rep.floors)).enumerate() {
            let bound = tol * lam * r.abs_f64().max(1.0).powi(n as i32);
            // the evaluation itself cannot beat its rounding floor
            if *res > bound.max(1e3 * floor) {
                return Err(BergmanError::RootsNotConverged {
                    index: i,
                    residual: *res,
                });
            }
        }
        let mut out = rep.roots;
        sort_roots(&mut out);
        Ok(out)
    }

    /// CSV rows `n,m,re,im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,m,re,im\n");
        for (n, row) in self.coeffs.iter().enumerate() {
            for (m, c) in row.iter().enumerate() {
                s.push_str(&format!("{n},{m},{},{}\n", to_decimal(&c.re), to_decimal(&c.im)));
            }
        }
        s
    }
}

/// Deterministic order: by real part, then imaginary part.
pub fn sort_roots(r: &mut [Complex]) {
    r.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

/// CSV rows `n,index,re,im` for several degrees.
pub fn zeros_csv(zeros: &[(usize, Vec<Complex>)]) -> String {
    let mut s = String::from("n,index,re,im\n");
    for (n, list) in zeros {
        for (i, z) in list.iter().enumerate() {
            s.push_str(&format!("{n},{i},{},{}\n", to_decimal(&z.re), to_decimal(&z.im)));
        }
    }
    s
}

pub fn horner(coeffs: &[Complex], z: &Complex) -> Complex {
    let mut acc = Complex::zero_bits(z.prec());
    for c in coeffs.iter().rev() {
        acc = &(&acc * z) + c;
    }
    acc
}

/// `a[k][n] = <z p_n, p_k>`, for `n < N` and `k <= n + 1`.
#[derive(Clone, Debug)]
pub struct HessenbergMatrix {
    pub entries: CMatrix,
}

impl HessenbergMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, k: usize, n: usize) -> &Complex {
        &self.entries[k][n]
    }

    /// Eigenvalues of the leading `n x n` block (the zeros of `p_n`).
    pub fn leading_eigenvalues(&self, n: usize, prec: Precision) -> Option<Vec<Complex>> {
        let block: CMatrix = self.entries[..n].iter().map(|r| r[..n].to_vec()).collect();
        let mut e = linalg::hessenberg_eigenvalues(&block, prec)?;
        sort_roots(&mut e);
        Some(e)
    }
}

/// `a[k][n] = sum_{i,l} c[n][i] conj(c[k][l]) M[i+1][l]`; needs moments of
/// degree `n + 1`, so the matrix is `N x N` for a degree-`N` basis.
pub fn hessenberg(m: &MomentMatrix, basis: &OrthonormalBasis) -> HessenbergMatrix {
    use rayon::prelude::*;
    let prec = basis.prec;
    let size = basis.degree.min(m.degree);
    let cols: Vec<Vec<Complex>> = (0..size)
        .into_par_iter()
        .map(|n| {
            // t[l] = sum_i c[n][i] M[i+1][l]
            let t: Vec<Complex> = (0..=size)
                .map(|l| {
                    let mut s = prec.czero();
                    for (i, c) in basis.coeffs[n].iter().enumerate() {
                        fma_into(&mut s, c, &m.entries[i + 1][l]);
                    }
                    s
                })
                .collect();
            (0..size)
                .map(|k| {
                    if k > n + 1 {
                        return prec.czero();
                    }
                    let mut s = prec.czero();
                    for (l, c) in basis.coeffs[k].iter().enumerate() {
                        fma_conj_into(&mut s, &t[l], c);
                    }
                    s
                })
                .collect()
        })
        .collect();
    let mut entries = linalg::zeros(size, size, prec);
    for (n, col) in cols.into_iter().enumerate() {
        for (k, v) in col.into_iter().enumerate() {
            entries[k][n] = v;
        }
    }
    HessenbergMatrix { entries }
}

/// `|lambda_n - expected|` helper used by the exactness checks.
pub fn lambda_error(basis: &OrthonormalBasis, n: usize, expected: &Real) -> f64 {
    Float::with_val(basis.prec.bits(), &basis.lambdas[n] - expected)
        .abs()
        .to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::catalog;
    use crate::moments::gram_matrix;
    use crate::quadrature::GaussLegendre;

    fn basis_for(name: &str, params: &[f64], n: usize, digits: u32) -> (MomentMatrix, OrthonormalBasis) {
        let p = Precision::digits(digits);
        let spec = catalog(name, params, p).unwrap();
        let m = gram_matrix(&spec, n, None).unwrap();
        let b = orthonormalize(&m).unwrap();
        (m, b)
    }

    #[test]
    fn disk_basis_is_scaled_monomials() {
        let (_, b) = basis_for("disk", &[1.0], 3, 50);
        let p = b.prec;
        for n in 0..=3 {
            let expect = (p.int(n as i64 + 1) / p.pi()).sqrt();
            assert!(lambda_error(&b, n, &expect) < 1e-45);
            for m in 0..n {
                assert!(b.coeffs[n][m].is_zero());
            }
        }
        let v = b.evaluate(1, &p.cone()).unwrap();
        assert!((v.re.to_f64() - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-15);
        let z0 = b.evaluate(0, &p.complex(0.3, 0.7)).unwrap();
        assert!((z0.re.to_f64() - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn square_gram_residual() {
        let (_, b) = basis_for("square", &[1.0], 20, 120);
        assert!(b.gram_residual < 1e-30, "{:e}", b.gram_residual);
        assert!(b.lambdas.iter().all(|l| *l > 0));
    }

    #[test]
    fn evaluation_matches_reordered_sum() {
        let (_, b) = basis_for("square", &[1.0], 10, 60);
        let p = b.prec;
        let z = p.complex(2.0, 0.0);
        let horner_v = b.evaluate(10, &z).unwrap();
        let mut direct = p.czero();
        for (m, c) in b.row(10).iter().enumerate() {
            direct += &(c * &z.powi(m as i64));
        }
        let rel = (&horner_v - &direct).abs_f64() / horner_v.abs_f64();
        assert!(rel < 1e-50);
        let all = b.evaluate_all(&z);
        assert!((&all[10] - &horner_v).abs_f64() / horner_v.abs_f64() < 1e-50);
    }

    #[test]
    fn ellipse_basis_matches_gram_schmidt_oracle() {
        // modified Gram-Schmidt over a 2-D quadrature of the ellipse interior
        let p = Precision::digits(60);
        let (_, b) = basis_for("ellipse", &[1.0, 0.25], 10, 60);
        let rule = GaussLegendre::new(24, p);
        let nt = 96;
        let mut nodes: Vec<(Complex, Real)> = Vec::new();
        for (r, wr) in rule.mapped(&p.zero(), &p.one()) {
            for i in 0..nt {
                let t = p.pi() * 2u32 * p.ratio(i, nt);
                let z = Complex::new(
                    Float::with_val(p.bits(), &r * t.clone().cos()) * 1.25f64,
                    Float::with_val(p.bits(), &r * t.sin()) * 0.75f64,
                );
                let w = Float::with_val(p.bits(), &r * &wr) * (1.25 * 0.75) * p.pi() * 2u32 / nt as u32;
                nodes.push((z, w));
            }
        }
        let inner = |f: &[Complex], g: &[Complex]| -> Complex {
            // polynomials as coefficient vectors
            let mut s = p.czero();
            for (z, w) in &nodes {
                let fv = horner(f, z);
                let gv = horner(g, z);
                s += &(&fv * &gv.conj()).mul_real(w);
            }
            s
        };
        let mut basis: Vec<Vec<Complex>> = Vec::new();
        for n in 0..=10usize {
            let mut v = vec![p.czero(); n + 1];
            v[n] = p.cone();
            for q in &basis {
                let proj = inner(&v, q);
                for (i, c) in q.iter().enumerate() {
                    v[i] -= &(&proj * c);
                }
            }
            let norm = inner(&v, &v).re.sqrt();
            for c in v.iter_mut() {
                *c = c.div_real(&norm);
            }
            basis.push(v);
        }
        for n in 0..=10 {
            for m in 0..=n {
                assert!((&basis[n][m] - &b.coeffs[n][m]).abs_f64() < 1e-20, "{n} {m}");
            }
        }
    }

    #[test]
    fn kernel_examples() {
        let (_, b) = basis_for("disk", &[1.0], 30, 50);
        let p = b.prec;
        let k0 = b.kernel(&p.czero(), &p.czero(), 30).unwrap();
        assert!((k0.re.to_f64() - 1.0 / std::f64::consts::PI).abs() < 1e-15);
        // sum (n+1) r^{2n} / pi over n <= 30
        let r: f64 = 0.5;
        let kr = b.kernel(&p.complex(r, 0.0), &p.complex(r, 0.0), 30).unwrap();
        let partial: f64 = (0..=30).map(|n| (n as f64 + 1.0) * r.powi(2 * n)).sum::<f64>() / std::f64::consts::PI;
        assert!((kr.re.to_f64() - partial).abs() < 1e-12);
        let closed = 1.0 / (std::f64::consts::PI * (1.0 - r * r).powi(2));
        assert!((kr.re.to_f64() - closed).abs() < 1e-6);
        let (_, sq) = basis_for("square", &[1.0], 8, 60);
        let (z, w) = (p.complex(0.1, 0.2), p.complex(-0.3, 0.05));
        let a = sq.kernel(&z, &w, 8).unwrap();
        let bb = sq.kernel(&w, &z, 8).unwrap();
        assert!((a - bb.conj()).abs_f64() < 1e-50);
    }

    #[test]
    fn hessenberg_structure() {
        let (m, b) = basis_for("disk", &[1.0], 6, 50);
        let h = hessenberg(&m, &b);
        for n in 0..h.size() {
            for k in 0..h.size() {
                let v = h.get(k, n).abs_f64();
                if k == n + 1 {
                    assert!((v - ((n as f64 + 1.0) / (n as f64 + 2.0)).sqrt()).abs() < 1e-15);
                } else {
                    assert!(v < 1e-40);
                }
            }
        }
        let (m, b) = basis_for("ellipse", &[1.0, 0.25], 12, 80);
        let h = hessenberg(&m, &b);
        for n in 0..h.size() {
            for k in 0..n.saturating_sub(1) {
                assert!(h.get(k, n).abs_f64() < 1e-40);
            }
        }
        let (m, b) = basis_for("square", &[1.0], 15, 80);
        let h = hessenberg(&m, &b);
        // fourfold symmetry: a[k][n] vanishes unless k = n + 1 (mod 4)
        for n in 0..h.size() {
            for k in 0..=n {
                if (n + 1 - k) % 4 != 0 {
                    assert!(h.get(k, n).abs_f64() < 1e-40);
                }
            }
        }
        assert!((3..h.size()).all(|n| h.get(n - 3, n).abs_f64() > 1e-6));
    }

    #[test]
    fn zeros_examples() {
        let (_, b) = basis_for("disk", &[1.0], 6, 40);
        assert!(b.zeros(6).unwrap().iter().all(|z| z.is_zero()));

        let (m, b) = basis_for("square", &[1.0], 11, 80);
        let z = b.zeros(10).unwrap();
        assert_eq!(z.len(), 10);
        for r in &z {
            let (x, y) = r.to_f64();
            assert!(x.abs() <= 0.5 && y.abs() <= 0.5, "{r}");
        }
        // cross-check against the recurrence-matrix eigenvalues
        let h = hessenberg(&m, &b);
        let eig = h.leading_eigenvalues(10, b.prec).unwrap();
        for r in &z {
            let best = eig.iter().map(|e| (e - r).abs_f64()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-15, "{best:e}");
        }

        let (_, b) = basis_for("ellipse", &[1.0, 0.25], 10, 60);
        for r in b.zeros(10).unwrap() {
            let (x, y) = r.to_f64();
            // focal segment [-2 sqrt(ab), 2 sqrt(ab)] = [-1, 1]
            assert!(y.abs() < 1e-20 && x.abs() <= 1.0 + 1e-12, "{r}");
        }
    }
}
