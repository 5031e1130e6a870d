//! Exterior map `Phi` by Newton inversion of `Psi`, capacity and exterior-map
//! estimates from the Bergman basis, and the interior (kernel) map.

use rug::Float;

use crate::bergman::OrthonormalBasis;
use crate::error::{BergmanError, ConformalError};
use crate::geometry::{point_segment_distance, DomainSpec, BOUNDARY_SAMPLES};
use crate::mp::{fma_conj_into, fma_into, Complex, Precision, Real};

#[derive(Clone, Debug)]
pub struct ExteriorPointValue {
    pub z: Complex,
    /// `Phi(z)`.
    pub w: Complex,
    /// `Phi'(z) = 1 / Psi'(w)`.
    pub dphi: Complex,
    /// `|w|`.
    pub level: f64,
}

impl ExteriorPointValue {
    /// Point given through its preimage: `z = Psi(w)`, no inversion needed.
    pub fn from_preimage(spec: &DomainSpec, w: &Complex) -> Result<Self, ConformalError> {
        let z = spec.psi_eval(w).ok_or(ConformalError::NoExteriorMap)?;
        let dpsi = spec.psi_prime_eval(w).ok_or(ConformalError::NoExteriorMap)?;
        Ok(ExteriorPointValue {
            level: w.abs_f64(),
            dphi: dpsi.recip(),
            w: w.clone(),
            z,
        })
    }
}

fn show(z: &Complex) -> String {
    let (x, y) = z.to_f64();
    format!("{x:.12e}{y:+.12e}i")
}

/// Newton on `Psi(w) = z` from `w_0 = z / b`, damped so iterates stay outside
/// the unit circle.
pub fn invert_exterior_map(spec: &DomainSpec, z: &Complex) -> Result<ExteriorPointValue, ConformalError> {
    let prec = spec.prec;
    let b = spec
        .laurent_coefficient(-1)
        .map_err(|_| ConformalError::NoExteriorMap)?;
    let tol = Precision::tenth_pow(prec.decimal_digits() as f64 - 10.0) * (1.0 + z.abs_f64());
    let floor = 1.0 + Precision::tenth_pow(prec.decimal_digits() as f64 / 2.0);
    let mut w = z / &b;
    if w.abs_f64() < 1.05 {
        let r = w.abs_f64().max(1e-300);
        w = w.mul_real(&prec.real(1.05 / r));
        if w.is_zero() {
            w = prec.complex(1.05, 0.0);
        }
    }
    for _ in 0..50 {
        let f = &spec.psi_eval(&w).ok_or(ConformalError::NoExteriorMap)? - z;
        let dpsi = spec.psi_prime_eval(&w).ok_or(ConformalError::NoExteriorMap)?;
        if f.abs_f64() < tol {
            let level = w.abs_f64();
            if level <= floor {
                return Err(ConformalError::NotExterior { modulus: level });
            }
            return Ok(ExteriorPointValue {
                z: z.clone(),
                dphi: dpsi.recip(),
                w,
                level,
            });
        }
        let step = &f / &dpsi;
        let mut next = &w - &step;
        let mut damp = 0;
        // halve toward w while the iterate falls inside the unit circle
        while next.abs_f64() <= 1.0 && damp < 60 {
            next = (&next + &w).div_real(&prec.int(2));
            damp += 1;
        }
        w = next;
    }
    Err(ConformalError::NotConverged { z: show(z) })
}

/// `(gamma_hat_n, cap_hat_n, sigma_n)` with
/// `gamma_hat_n = sqrt((n+1)/(n+2)) lambda_{n+1} / lambda_n` and
/// `sigma_n = gamma_hat_n - gamma` when `gamma` is known.
#[derive(Clone, Debug)]
pub struct CapacityEstimate {
    pub n: usize,
    pub gamma_hat: Real,
    pub cap_hat: Real,
    pub sigma: Option<Real>,
}

pub fn capacity_from_ratio(
    basis: &OrthonormalBasis,
    n: usize,
    known_capacity: Option<&Real>,
) -> Result<CapacityEstimate, BergmanError> {
    if n + 1 > basis.degree {
        return Err(BergmanError::DegreeOutOfRange {
            n: n + 1,
            max: basis.degree,
        });
    }
    let p = basis.prec;
    let scale = (p.int(n as i64 + 1) / p.int(n as i64 + 2)).sqrt();
    let gamma_hat = scale * &basis.lambdas[n + 1] / &basis.lambdas[n];
    let cap_hat = gamma_hat.clone().recip();
    let sigma = known_capacity.map(|c| Float::with_val(p.bits(), &gamma_hat - c.clone().recip()));
    Ok(CapacityEstimate {
        n,
        gamma_hat,
        cap_hat,
        sigma,
    })
}

/// `sqrt((n+1)/(n+2)) p_{n+1}(z) / p_n(z)`, an estimate of `Phi(z)`.
pub fn phi_from_ratio(basis: &OrthonormalBasis, n: usize, z: &Complex) -> Result<Complex, crate::Error> {
    if n + 1 > basis.degree {
        return Err(BergmanError::DegreeOutOfRange {
            n: n + 1,
            max: basis.degree,
        }
        .into());
    }
    let p = basis.prec;
    let pn = basis.evaluate(n, z)?;
    let guard = Precision::tenth_pow(p.decimal_digits() as f64 - 10.0)
        * basis.lambdas[n].to_f64()
        * z.abs_f64().max(1.0).powi(n as i32);
    if pn.abs_f64() <= guard {
        return Err(ConformalError::NearZero { z: show(z) }.into());
    }
    let pn1 = basis.evaluate(n + 1, z)?;
    let scale = (p.int(n as i64 + 1) / p.int(n as i64 + 2)).sqrt();
    Ok((&pn1 / &pn).mul_real(&scale))
}

/// Interior map by the kernel method,
/// `f_N(z) = sqrt(pi / K_N(z0, z0)) int_{z0}^{z} K_N(t, z0) dt`.
///
/// `K_N(., z0)` is a polynomial, so the integral is taken termwise and is
/// path independent; only the endpoints need to lie in the domain.
pub fn interior_map_bkm(
    spec: &DomainSpec,
    basis: &OrthonormalBasis,
    n: usize,
    z0: &Complex,
    z: &Complex,
) -> Result<Complex, crate::Error> {
    for pt in [z0, z] {
        if !spec.contains(pt) {
            return Err(ConformalError::NotInterior { z: show(pt) }.into());
        }
    }
    let coeffs = kernel_polynomial(basis, n, z0)?;
    let p = basis.prec;
    let k00 = crate::bergman::horner(&coeffs, z0);
    // antiderivative sum a_m (z^{m+1} - z0^{m+1}) / (m+1)
    let mut acc = p.czero();
    let mut zp = z.clone();
    let mut z0p = z0.clone();
    for (m, a) in coeffs.iter().enumerate() {
        let d = (&zp - &z0p).div_real(&p.int(m as i64 + 1));
        fma_into(&mut acc, a, &d);
        zp = &zp * z;
        z0p = &z0p * z0;
    }
    let scale = (p.pi() / k00.re).sqrt();
    Ok(acc.mul_real(&scale))
}

/// Coefficients of `t -> K_N(t, z0)`.
pub fn kernel_polynomial(basis: &OrthonormalBasis, n: usize, z0: &Complex) -> Result<Vec<Complex>, BergmanError> {
    if n > basis.degree {
        return Err(BergmanError::DegreeOutOfRange { n, max: basis.degree });
    }
    let p = basis.prec;
    let vals = basis.evaluate_all(z0);
    let mut out = vec![p.czero(); n + 1];
    for (k, row) in basis.coeffs.iter().enumerate().take(n + 1) {
        for (m, c) in row.iter().enumerate() {
            fma_conj_into(&mut out[m], c, &vals[k]);
        }
    }
    Ok(out)
}

/// `dist(z, Gamma)`: exact segment distances for polygons, dense sampling
/// plus one Newton step on the boundary parameter for map domains.
#[derive(Clone, Debug)]
pub struct BoundaryDistance {
    spec: DomainSpec,
    samples: Vec<(f64, f64)>,
}

impl BoundaryDistance {
    pub fn new(spec: &DomainSpec) -> Self {
        let low = spec.at_precision(Precision::digits(20));
        let samples = if spec.is_polygon() {
            vec![]
        } else {
            low.boundary_samples(BOUNDARY_SAMPLES)
        };
        BoundaryDistance { spec: low, samples }
    }

    pub fn distance(&self, z: &Complex) -> f64 {
        if let Some(v) = self.spec.vertices() {
            let zl = z.with_prec(self.spec.prec.bits());
            let n = v.len();
            return (0..n)
                .map(|i| point_segment_distance(&zl, &v[i], &v[(i + 1) % n]))
                .fold(f64::INFINITY, f64::min);
        }
        let (x, y) = z.to_f64();
        let d2 = |p: &(f64, f64)| (p.0 - x).powi(2) + (p.1 - y).powi(2);
        let (idx, best) = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, p)| (i, d2(p)))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        let p = self.spec.prec;
        let m = self.samples.len();
        let theta = std::f64::consts::TAU * idx as f64 / m as f64;
        let Some((zb, dz)) = self.spec.boundary_point(&p.real(theta)) else {
            return best.sqrt();
        };
        let (bx, by) = zb.to_f64();
        let (tx, ty) = dz.to_f64();
        let t2 = tx * tx + ty * ty;
        if t2 < 1e-24 {
            return best.sqrt();
        }
        // Gauss-Newton step on |z(theta) - z|^2
        let step = ((x - bx) * tx + (y - by) * ty) / t2;
        let h = std::f64::consts::TAU / m as f64;
        let step = step.clamp(-h, h);
        let refined = self
            .spec
            .boundary_point(&p.real(theta + step))
            .map(|(zr, _)| {
                let (rx, ry) = zr.to_f64();
                ((rx - x).powi(2) + (ry - y).powi(2)).sqrt()
            })
            .unwrap_or(f64::INFINITY);
        refined.min(best.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bergman::orthonormalize;
    use crate::geometry::catalog;
    use crate::moments::gram_matrix;

    fn basis(name: &str, params: &[f64], n: usize, digits: u32) -> (DomainSpec, OrthonormalBasis) {
        let p = Precision::digits(digits);
        let spec = catalog(name, params, p).unwrap();
        let m = gram_matrix(&spec, n, None).unwrap();
        (spec.clone(), orthonormalize(&m).unwrap())
    }

    #[test]
    fn disk_and_ellipse_inversion() {
        let p = Precision::digits(50);
        let tol = Precision::tenth_pow(40.0);
        let disk = catalog("disk", &[1.0], p).unwrap();
        let v = invert_exterior_map(&disk, &p.complex(2.0, 0.0)).unwrap();
        assert!((&v.w - &p.complex(2.0, 0.0)).abs_f64() < tol);
        assert!((&v.dphi - &p.cone()).abs_f64() < tol);

        // a w + b / w = z  =>  w = (z + sqrt(z^2 - 4ab)) / (2a)
        let ell = catalog("ellipse", &[1.0, 0.25], p).unwrap();
        let z = p.complex(2.0, 0.0);
        let v = invert_exterior_map(&ell, &z).unwrap();
        let closed = (&z + &(&(&z * &z) - &p.complex(1.0, 0.0)).sqrt()).div_real(&p.int(2));
        assert!((&v.w - &closed).abs_f64() < tol);

        let hyp = catalog("hypocycloid", &[3.0], p).unwrap();
        let v = invert_exterior_map(&hyp, &z).unwrap();
        assert!(v.level > 1.0);
        assert!((&hyp.psi_eval(&v.w).unwrap() - &z).abs_f64() < tol);
    }

    #[test]
    fn inversion_round_trip_on_circles() {
        let p = Precision::digits(40);
        let tol = Precision::tenth_pow(40.0 - 12.0);
        for name in ["ellipse", "square-map", "fourfold"] {
            let params: &[f64] = match name {
                "ellipse" => &[1.0, 0.25],
                "fourfold" => &[0.2],
                _ => &[1.0],
            };
            let spec = catalog(name, params, p).unwrap();
            for r in [1.1, 1.5, 3.0] {
                for k in 0..7 {
                    let t = 0.3 + k as f64 * 0.9;
                    let w = p.complex(r * t.cos(), r * t.sin());
                    let z = spec.psi_eval(&w).unwrap();
                    let v = invert_exterior_map(&spec, &z).unwrap();
                    assert!((&v.w - &w).abs_f64() < tol, "{name} r={r}: {:e}", (&v.w - &w).abs_f64());
                }
            }
        }
    }

    #[test]
    fn interior_point_is_rejected() {
        let p = Precision::digits(30);
        let spec = catalog("ellipse", &[1.0, 0.25], p).unwrap();
        assert!(invert_exterior_map(&spec, &p.complex(0.2, 0.1)).is_err());
    }

    #[test]
    fn capacity_examples() {
        let (disk, b) = basis("disk", &[1.0], 5, 40);
        let c = capacity_from_ratio(&b, 3, disk.known_capacity.as_ref()).unwrap();
        assert!((c.gamma_hat.to_f64() - 1.0).abs() < 1e-35);
        assert!(c.sigma.unwrap().to_f64().abs() < 1e-35);

        let (ell, b) = basis("ellipse", &[1.0, 0.25], 20, 60);
        let s10 = capacity_from_ratio(&b, 10, ell.known_capacity.as_ref())
            .unwrap()
            .sigma
            .unwrap();
        let s19 = capacity_from_ratio(&b, 19, ell.known_capacity.as_ref())
            .unwrap()
            .sigma
            .unwrap();
        assert!(s19.to_f64().abs() < s10.to_f64().abs() * 1e-3);
    }

    #[test]
    fn phi_ratio_examples() {
        let (_, b) = basis("disk", &[1.0], 4, 40);
        let p = b.prec;
        let v = phi_from_ratio(&b, 2, &p.complex(2.0, 0.0)).unwrap();
        assert!((&v - &p.complex(2.0, 0.0)).abs_f64() < 1e-35);

        let (ell, b) = basis("ellipse", &[1.0, 0.25], 51, 100);
        let w = b.prec.complex(1.5, 0.0);
        let z = ell.psi_eval(&w).unwrap();
        let est = phi_from_ratio(&b, 50, &z).unwrap();
        assert!((&est - &w).abs_f64() < 0.05 * 1.5);
    }

    #[test]
    fn kernel_map_examples() {
        let (disk, b) = basis("disk", &[1.0], 6, 40);
        let p = b.prec;
        let z = p.complex(0.3, -0.4);
        let f = interior_map_bkm(&disk, &b, 6, &p.czero(), &z).unwrap();
        assert!((&f - &z).abs_f64() < 1e-35);

        let (ell, b) = basis("ellipse", &[1.0, 0.25], 20, 60);
        let p = b.prec;
        let mut last = 0.0;
        for x in [0.1, 0.3, 0.5, 0.8, 1.1] {
            let f = interior_map_bkm(&ell, &b, 20, &p.czero(), &p.complex(x, 0.0)).unwrap();
            let a = f.abs_f64();
            assert!(a > last && a < 1.0);
            last = a;
        }
        assert!(interior_map_bkm(&ell, &b, 20, &p.czero(), &p.complex(1.3, 0.0)).is_err());
    }

    #[test]
    fn boundary_distance() {
        let p = Precision::digits(30);
        let sq = catalog("square", &[1.0], p).unwrap();
        let d = BoundaryDistance::new(&sq);
        assert!((d.distance(&p.complex(1.0, 0.0)) - 0.5).abs() < 1e-15);
        assert!((d.distance(&p.complex(1.0, 1.0)) - 0.5f64.hypot(0.5)).abs() < 1e-15);
        let sm = catalog("square-map", &[1.0], p).unwrap();
        let d = BoundaryDistance::new(&sm);
        assert!((d.distance(&p.complex(1.0, 0.1)) - 0.5).abs() < 1e-6);
        let ell = catalog("ellipse", &[1.0, 0.25], p).unwrap();
        let d = BoundaryDistance::new(&ell);
        assert!((d.distance(&p.complex(0.0, 2.0)) - 1.25).abs() < 1e-6);
    }
}
