//! Area moments `<z^j, z^k> = int_G z^j conj(z)^k dA`, reduced by Green's
//! formula to `(1 / (2i(k+1))) \oint z^j conj(z)^{k+1} dz`.

mod cache;

use rayon::prelude::*;
use rug::Float;
use sha2::{Digest, Sha256};

pub use cache::MomentCache;

use crate::error::{Error, MomentError};
use crate::geometry::{DomainConfig, DomainKind, DomainSpec, RegularPolygonMap};
use crate::linalg::{self, CMatrix};
use crate::mp::{binomial_row, fma_into, Complex, Precision};
use crate::series::LaurentAtInfinity;

const MAX_REFINEMENTS: usize = 8;

#[derive(Clone, Debug)]
pub struct MomentMatrix {
    /// Maximum degree `N`; the matrix is `(N+1) x (N+1)`.
    pub degree: usize,
    pub entries: CMatrix,
    pub digest: String,
    pub prec: Precision,
    /// Entries computed in this call (zero on a cache hit).
    pub recomputed: usize,
}

impl MomentMatrix {
    /// Leading `(n+1) x (n+1)` block.
    pub fn leading(&self, n: usize) -> MomentMatrix {
        MomentMatrix {
            degree: n,
            entries: self.entries[..=n].iter().map(|r| r[..=n].to_vec()).collect(),
            digest: self.digest.clone(),
            prec: self.prec,
            recomputed: 0,
        }
    }

    pub fn get(&self, j: usize, k: usize) -> &Complex {
        &self.entries[j][k]
    }

    /// `||P||^2` for the polynomial with monomial coefficients `v`.
    pub fn norm_sqr(&self, v: &[Complex]) -> Float {
        linalg::quad_form(&self.entries, v, self.prec)
    }
}

/// Content hash of the domain description and precision.
pub fn domain_digest(spec: &DomainSpec) -> String {
    let mut h = Sha256::new();
    h.update(b"bergman-moments/1\n");
    h.update(DomainConfig::from_spec(spec).to_toml().as_bytes());
    h.update(format!("\nprecision={}\n", spec.prec.decimal_digits()).as_bytes());
    hex::encode(h.finalize())
}

/// Extra working bits that absorb the cancellation in the binomial expansion.
fn polygon_guard_bits(vertices: &[Complex], degree: usize) -> u32 {
    let n = vertices.len();
    let mut ratio: f64 = 1.0;
    let scale = vertices.iter().map(|v| v.abs_f64()).fold(0.0, f64::max).max(1e-300);
    for i in 0..n {
        let d = (&vertices[(i + 1) % n] - &vertices[i]).abs_f64();
        ratio = ratio.max((vertices[i].abs_f64() + d) / scale);
    }
    ((2 * degree + 4) as f64 * ratio.log2().max(1.0)).ceil() as u32 + 32
}

/// Exact moment of a simple counterclockwise polygon, by binomial expansion
/// of the integrand along each edge `z = A + tD`:
/// `D sum_{a,c} C(j,a) C(k+1,c) A^{j-a} D^a conj(A)^{k+1-c} conj(D)^c / (a+c+1)`.
pub fn polygon_moment(vertices: &[Complex], j: usize, k: usize, prec: Precision) -> Result<Complex, MomentError> {
    let m = polygon_moments_impl(vertices, j.max(k), prec, Some((j, k)))?;
    Ok(m[j][k].clone())
}

/// All moments up to degree `n`.
pub fn polygon_moments(vertices: &[Complex], n: usize, prec: Precision) -> Result<CMatrix, MomentError> {
    polygon_moments_impl(vertices, n, prec, None)
}

fn polygon_moments_impl(
    vertices: &[Complex],
    n: usize,
    prec: Precision,
    only: Option<(usize, usize)>,
) -> Result<CMatrix, MomentError> {
    let nv = vertices.len();
    for i in 0..nv {
        if vertices[i] == vertices[(i + 1) % nv] {
            return Err(MomentError::DegenerateEdge(i));
        }
    }
    let work = Precision::digits(
        prec.decimal_digits() + (polygon_guard_bits(vertices, n) as f64 / std::f64::consts::LOG2_10).ceil() as u32,
    );
    let wb = work.bits();
    let binoms: Vec<Vec<Float>> = (0..=n + 1).map(|r| binomial_row(work, r)).collect();
    let inv: Vec<Float> = (0..=2 * n + 2)
        .map(|s| Float::with_val(wb, 1) / (s as u32 + 1))
        .collect();

    let edges: Vec<CMatrix> = (0..nv)
        .into_par_iter()
        .map(|i| {
            let a = vertices[i].with_prec(wb);
            let d = &vertices[(i + 1) % nv].with_prec(wb) - &a;
            let ac = a.conj();
            let dc = d.conj();
            let pow = |x: &Complex, e: usize| -> Vec<Complex> {
                let mut out = Vec::with_capacity(e + 1);
                out.push(work.cone());
                for t in 1..=e {
                    let next = &out[t - 1] * x;
                    out.push(next);
                }
                out
            };
            let (pa, pd) = (pow(&a, n + 1), pow(&d, n + 1));
            let (pac, pdc) = (pow(&ac, n + 1), pow(&dc, n + 1));
            // w[k][a] = sum_c C(k+1,c) conj(A)^{k+1-c} conj(D)^c / (a+c+1)
            let ks: Vec<usize> = match only {
                Some((_, k)) => vec![k],
                None => (0..=n).collect(),
            };
            let js: Vec<usize> = match only {
                Some((j, _)) => vec![j],
                None => (0..=n).collect(),
            };
            let mut out = linalg::zeros(n + 1, n + 1, work);
            let mut w = vec![vec![work.czero(); n + 1]; n + 1];
            for &k in &ks {
                for (aa, slot) in w[k].iter_mut().enumerate() {
                    let mut s = work.czero();
                    for c in 0..=k + 1 {
                        let term = (&pac[k + 1 - c] * &pdc[c])
                            .mul_real(&binoms[k + 1][c])
                            .mul_real(&inv[aa + c]);
                        s += &term;
                    }
                    *slot = s;
                }
            }
            for &j in &js {
                let u: Vec<Complex> = (0..=j)
                    .map(|aa| (&pa[j - aa] * &pd[aa]).mul_real(&binoms[j][aa]))
                    .collect();
                for &k in &ks {
                    if only.is_none() && k < j {
                        continue;
                    }
                    let mut s = work.czero();
                    for (aa, ua) in u.iter().enumerate() {
                        fma_into(&mut s, ua, &w[k][aa]);
                    }
                    out[j][k] = &s * &d;
                }
            }
            out
        })
        .collect();
    let mut m = linalg::zeros(n + 1, n + 1, prec);
    let two_i = work.complex(0.0, 2.0);
    for j in 0..=n {
        for k in 0..=n {
            let wanted = match only {
                Some(jk) => (j, k) == jk,
                None => k >= j,
            };
            if !wanted {
                continue;
            }
            let mut s = work.czero();
            for e in &edges {
                s += &e[j][k];
            }
            let v = &s / &two_i.scale_i64(k as i64 + 1);
            m[j][k] = v.with_prec(prec.bits());
        }
    }
    if only.is_none() {
        mirror(&mut m);
    }
    Ok(m)
}

fn mirror(m: &mut CMatrix) {
    let n = m.len();
    for j in 0..n {
        m[j][j].im = Float::new(m[j][j].re.prec());
        for k in 0..j {
            m[j][k] = m[k][j].conj();
        }
    }
}

/// Boundary nodes `(z, weight * dz)` for one quadrature level.
type Nodes = Vec<Vec<(Complex, Complex)>>;

/// Moments of a map-defined domain up to degree `n` by boundary quadrature,
/// refined until successive levels agree to `10^{-(P-10)}` (relative to
/// `sqrt(|M_jj M_kk|)`).
pub fn map_moments(spec: &DomainSpec, n: usize) -> Result<CMatrix, MomentError> {
    let prec = spec.prec;
    let (psi, generator) = match &spec.kind {
        DomainKind::MapDefined { psi, generator } => (psi, generator.as_ref()),
        DomainKind::Polygon { .. } => unreachable!("map_moments called on a polygon"),
    };
    if generator.is_none() && psi.is_exact() {
        return Ok(residue_moments(psi, n));
    }
    let tol = Precision::tenth_pow(prec.decimal_digits() as f64 - 10.0);
    let mut level_nodes = match generator {
        Some(_) => prec.decimal_digits() as usize + 2 * n + 20,
        None => 64.max(2 * (n + 2) * psi.coefficients().len()),
    };
    let mut prev: Option<CMatrix> = None;
    let mut last_change = f64::INFINITY;
    for _ in 0..MAX_REFINEMENTS {
        let nodes = match generator {
            Some(g) => polygon_map_nodes(g, level_nodes),
            None => trapezoid_nodes(psi, level_nodes, prec),
        };
        let m = accumulate(&nodes, n, prec);
        if let Some(p) = &prev {
            last_change = max_scaled_change(p, &m);
            if last_change <= tol {
                return Ok(m);
            }
        }
        prev = Some(m);
        level_nodes = match generator {
            Some(_) => level_nodes * 3 / 2,
            None => level_nodes * 2,
        };
    }
    Err(MomentError::NotConverged {
        levels: MAX_REFINEMENTS,
        change: last_change,
    })
}

/// Single map moment (computes the block up to `max(j, k)`).
pub fn map_moment(spec: &DomainSpec, j: usize, k: usize) -> Result<Complex, MomentError> {
    Ok(map_moments(spec, j.max(k))?[j][k].clone())
}

/// Exact moments of a Laurent-polynomial map: on `|w| = 1`,
/// `conj(Psi(w)) = Psi^*(w) := sum conj(c_p) w^{-p}`, so the boundary integral
/// is `2 pi i` times the `w^{-1}` coefficient of `Psi^j (Psi^*)^{k+1} Psi'`.
/// (This is what the trapezoid rule returns once it has more nodes than the
/// trigonometric degree of the integrand.)
fn residue_moments(psi: &LaurentAtInfinity, n: usize) -> CMatrix {
    let prec = psi.precision();
    let top = psi.top_power();
    let star_terms: Vec<(i64, Complex)> = psi
        .coefficients()
        .iter()
        .enumerate()
        .map(|(i, c)| (i as i64 - top, c.conj()))
        .collect();
    let star = LaurentAtInfinity::from_terms(&star_terms, prec);
    let dpsi = psi.differentiate();
    let mut left = vec![LaurentAtInfinity::constant(prec.cone(), prec)];
    for j in 1..=n {
        left.push(left[j - 1].mul(psi).expect("same precision"));
    }
    let mut right = Vec::with_capacity(n + 1);
    let mut acc = star.mul(&dpsi).expect("same precision");
    for _ in 0..=n {
        right.push(acc.clone());
        acc = acc.mul(&star).expect("same precision");
    }
    let mut m = linalg::zeros(n + 1, n + 1, prec);
    for j in 0..=n {
        for k in j..=n {
            // coefficient of w^{-1} in left[j] * right[k]
            let (a, b) = (&left[j], &right[k]);
            let mut s = prec.czero();
            for (i, x) in a.coefficients().iter().enumerate() {
                let p = a.top_power() - i as i64;
                let idx = b.top_power() - (-1 - p);
                if idx >= 0 && (idx as usize) < b.coefficients().len() {
                    fma_into(&mut s, x, &b.coefficients()[idx as usize]);
                }
            }
            // (1/(2i(k+1))) * 2 pi i * s = pi s / (k+1)
            m[j][k] = s.mul_real(&(prec.pi() / (k as u32 + 1)));
        }
    }
    mirror(&mut m);
    m
}

fn max_scaled_change(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.len();
    let mut worst = 0.0f64;
    for j in 0..n {
        for k in j..n {
            let scale = (b[j][j].abs_f64() * b[k][k].abs_f64()).sqrt().max(f64::MIN_POSITIVE);
            worst = worst.max((&a[j][k] - &b[j][k]).abs_f64() / scale);
        }
    }
    worst
}

/// Half-edge nodes of the closed-form regular polygon: each half-edge is
/// integrated in `s` with the prevertex offset `(pi/q) s^m`, which makes the
/// integrand analytic.
fn polygon_map_nodes(g: &RegularPolygonMap, nodes: usize) -> Nodes {
    let rule = g.half_edge_rule(nodes);
    let q = g.sides() as i64;
    let verts = g.vertices();
    let side = g.side();
    let mut out = Vec::with_capacity(2 * q as usize);
    for c in 0..q as usize {
        let v = &verts[c];
        let next = &verts[(c + 1) % q as usize];
        let prev = &verts[(c + q as usize - 1) % q as usize];
        let fwd = (next - v).div_real(side);
        let back = (v - prev).div_real(side);
        // forward half-edge leaves the corner; the backward one arrives at it,
        // and both integrate as  int_0^1 g(z(s)) u f(s) ds  with u the ccw direction
        for (dir, sign) in [(&fwd, 1i64), (&back, -1i64)] {
            let half: Vec<(Complex, Complex)> = rule
                .iter()
                .map(|(wt, sigma, f)| {
                    let z = v + &dir.mul_real(sigma).scale_i64(sign);
                    let wdz = dir.mul_real(&Float::with_val(g.precision().bits(), wt * f));
                    (z, wdz)
                })
                .collect();
            out.push(half);
        }
    }
    out
}

fn trapezoid_nodes(psi: &LaurentAtInfinity, nodes: usize, prec: Precision) -> Nodes {
    let dpsi = psi.differentiate();
    let h = prec.pi() * 2u32 / nodes as u32;
    let chunk = nodes.div_ceil(16).max(1);
    (0..nodes)
        .collect::<Vec<_>>()
        .chunks(chunk)
        .map(|c| c.to_vec())
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|idx| {
            idx.into_iter()
                .map(|i| {
                    let theta = Float::with_val(prec.bits(), &h * i as u32);
                    let w = Complex::cis(&theta);
                    let z = psi.eval(&w);
                    let dz = (&dpsi.eval(&w) * &w).mul_i().mul_real(&h);
                    (z, dz)
                })
                .collect()
        })
        .collect()
}

/// `(1/(2i(k+1))) sum z^j conj(z)^{k+1} wdz` over all nodes, upper triangle
/// mirrored. Chunks are summed in a fixed order, so results are reproducible.
fn accumulate(nodes: &Nodes, n: usize, prec: Precision) -> CMatrix {
    let parts: Vec<CMatrix> = nodes
        .par_iter()
        .map(|chunk| {
            let mut acc = linalg::zeros(n + 1, n + 1, prec);
            let mut zp = vec![prec.czero(); n + 1];
            let mut cp = vec![prec.czero(); n + 1];
            for (z, wdz) in chunk {
                zp[0] = wdz.clone();
                for j in 1..=n {
                    zp[j] = &zp[j - 1] * z;
                }
                let zc = z.conj();
                cp[0] = zc.clone();
                for k in 1..=n {
                    cp[k] = &cp[k - 1] * &zc;
                }
                for j in 0..=n {
                    for k in j..=n {
                        fma_into(&mut acc[j][k], &zp[j], &cp[k]);
                    }
                }
            }
            acc
        })
        .collect();
    let mut m = linalg::zeros(n + 1, n + 1, prec);
    for part in &parts {
        for j in 0..=n {
            for k in j..=n {
                m[j][k] += &part[j][k];
            }
        }
    }
    for j in 0..=n {
        for k in j..=n {
            let d = prec.complex(0.0, 2.0 * (k as f64 + 1.0));
            m[j][k] = &m[j][k] / &d;
        }
    }
    mirror(&mut m);
    m
}

/// Gram matrix up to degree `n`, consulting and updating `cache` if given.
pub fn gram_matrix(spec: &DomainSpec, n: usize, cache: Option<&MomentCache>) -> Result<MomentMatrix, Error> {
    let digest = domain_digest(spec);
    if let Some(c) = cache {
        if let Some(m) = c.load(&digest, spec.prec, n)? {
            return Ok(MomentMatrix {
                degree: n,
                entries: m,
                digest,
                prec: spec.prec,
                recomputed: 0,
            });
        }
    }
    let entries = match &spec.kind {
        DomainKind::Polygon { vertices } => polygon_moments(vertices, n, spec.prec)?,
        DomainKind::MapDefined { .. } => map_moments(spec, n)?,
    };
    if let Some(c) = cache {
        c.store(&digest, spec.prec, &entries)?;
    }
    Ok(MomentMatrix {
        degree: n,
        entries,
        digest,
        prec: spec.prec,
        recomputed: (n + 1) * (n + 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::catalog;
    use crate::quadrature::GaussLegendre;

    /// Brute-force tensor Gauss–Legendre over an axis-aligned rectangle.
    fn rect_oracle(x0: f64, x1: f64, y0: f64, y1: f64, j: u32, k: u32, nodes: usize, p: Precision) -> Complex {
        let rule = GaussLegendre::new(nodes, p);
        let xs = rule.mapped(&p.real(x0), &p.real(x1));
        let ys = rule.mapped(&p.real(y0), &p.real(y1));
        let mut acc = p.czero();
        for (x, wx) in &xs {
            for (y, wy) in &ys {
                let z = Complex::new(x.clone(), y.clone());
                let v = &z.powi(j as i64) * &z.conj().powi(k as i64);
                acc += &v.mul_real(&Float::with_val(p.bits(), wx * wy));
            }
        }
        acc
    }

    #[test]
    fn unit_square_examples() {
        let p = Precision::digits(50);
        let sq = catalog("square", &[1.0], p).unwrap();
        let v = sq.vertices().unwrap();
        assert!((polygon_moment(v, 0, 0, p).unwrap() - p.cone()).abs_f64() < 1e-45);
        let m11 = polygon_moment(v, 1, 1, p).unwrap();
        assert!((m11 - Complex::from_real(p.ratio(1, 6))).abs_f64() < 1e-45);
        assert!(polygon_moment(v, 1, 0, p).unwrap().abs_f64() < 1e-45);
        let oracle = rect_oracle(-0.5, 0.5, -0.5, 0.5, 4, 2, 40, p);
        assert!((polygon_moment(v, 4, 2, p).unwrap() - oracle).abs_f64() < 1e-40);
    }

    #[test]
    fn polygon_matrix_matches_tensor_oracle() {
        // square and L-shape (three unit squares), all j, k <= 6
        let p = Precision::digits(40);
        let sq = catalog("square", &[1.0], p).unwrap();
        let m = polygon_moments(sq.vertices().unwrap(), 6, p).unwrap();
        let l = catalog("l-shape", &[], p).unwrap();
        let ml = polygon_moments(l.vertices().unwrap(), 6, p).unwrap();
        for j in 0..=6u32 {
            for k in 0..=6u32 {
                let o = rect_oracle(-0.5, 0.5, -0.5, 0.5, j, k, 12, p);
                assert!((&m[j as usize][k as usize] - &o).abs_f64() < 1e-20);
                let ol = &(&rect_oracle(0.0, 1.0, 0.0, 1.0, j, k, 12, p)
                    + &rect_oracle(1.0, 2.0, 0.0, 1.0, j, k, 12, p))
                    + &rect_oracle(0.0, 1.0, 1.0, 2.0, j, k, 12, p);
                assert!((&ml[j as usize][k as usize] - &ol).abs_f64() < 1e-20 * ol.abs_f64().max(1.0));
            }
        }
    }

    #[test]
    fn single_entry_matches_matrix() {
        let p = Precision::digits(40);
        let l = catalog("l-shape", &[], p).unwrap();
        let m = polygon_moments(l.vertices().unwrap(), 5, p).unwrap();
        assert_eq!(polygon_moment(l.vertices().unwrap(), 3, 5, p).unwrap(), m[3][5]);
        assert_eq!(
            polygon_moment(l.vertices().unwrap(), 5, 2, p)
                .unwrap()
                .with_prec(p.bits()),
            m[5][2]
        );
    }

    #[test]
    fn disk_moments() {
        let p = Precision::digits(40);
        let disk = catalog("disk", &[1.0], p).unwrap();
        let m = map_moments(&disk, 3).unwrap();
        for j in 0..=3 {
            for k in 0..=3 {
                let expect = if j == k {
                    p.pi().to_f64() / (j as f64 + 1.0)
                } else {
                    0.0
                };
                assert!((&m[j][k] - &p.complex(expect, 0.0)).abs_f64() < 1e-15);
            }
        }
        let g = gram_matrix(&disk, 2, None).unwrap();
        let pi = p.pi();
        assert!(
            Float::with_val(p.bits(), &g.entries[2][2].re - Float::with_val(p.bits(), &pi / 3u32))
                .abs()
                .to_f64()
                < 1e-35
        );
    }

    #[test]
    fn ellipse_matches_area_oracle() {
        // interior parametrization z = (a+b) r cos t + i (a-b) r sin t, Jacobian (a^2-b^2) r
        let p = Precision::digits(40);
        let e = catalog("ellipse", &[1.0, 0.25], p).unwrap();
        let m = map_moments(&e, 2).unwrap();
        let rule = GaussLegendre::new(12, p);
        let n_t = 64;
        let mut acc = p.czero();
        for (r, wr) in rule.mapped(&p.zero(), &p.one()) {
            for i in 0..n_t {
                let t = p.pi() * 2u32 * p.ratio(i, n_t);
                let z = Complex::new(
                    Float::with_val(p.bits(), &r * t.clone().cos()) * 1.25f64,
                    Float::with_val(p.bits(), &r * t.sin()) * 0.75f64,
                );
                let v = &z * &z.conj();
                let jac = Float::with_val(p.bits(), &r * &wr) * (1.25 * 0.75) * p.pi() * 2u32 / n_t as u32;
                acc += &v.mul_real(&jac);
            }
        }
        assert!((&m[1][1] - &acc).abs_f64() < 1e-30);
    }

    #[test]
    fn square_two_ways() {
        let p = Precision::digits(60);
        let poly = gram_matrix(&catalog("square", &[1.0], p).unwrap(), 8, None).unwrap();
        let map = gram_matrix(&catalog("square-map", &[1.0], p).unwrap(), 8, None).unwrap();
        for j in 0..=8 {
            for k in 0..=8 {
                assert!((&poly.entries[j][k] - &map.entries[j][k]).abs_f64() < 1e-20, "{j} {k}");
                if (j as i64 - k as i64) % 4 != 0 {
                    assert!(poly.entries[j][k].abs_f64() < 1e-50);
                    assert!(map.entries[j][k].abs_f64() < 1e-50);
                }
            }
        }
        assert!(linalg::cholesky(&poly.entries, p).is_ok());
    }

    #[test]
    fn residue_route_matches_trapezoid() {
        let p = Precision::digits(40);
        let h = catalog("hypocycloid", &[3.0], p).unwrap();
        let exact = map_moments(&h, 6).unwrap();
        let psi = h.psi().unwrap();
        let quad = accumulate(&trapezoid_nodes(psi, 256, p), 6, p);
        assert!(max_scaled_change(&exact, &quad) < 1e-35);
        // disk: off-diagonal entries vanish exactly
        let d = map_moments(&catalog("disk", &[1.0], p).unwrap(), 4).unwrap();
        assert!(d[1][3].is_zero() && d[0][4].is_zero());
    }

    #[test]
    fn ellipse_symmetry_zeros() {
        let p = Precision::digits(40);
        let m = map_moments(&catalog("ellipse", &[1.0, 0.25], p).unwrap(), 6).unwrap();
        for j in 0..=6usize {
            for k in 0..=6usize {
                if (j + k) % 2 == 1 {
                    assert!(m[j][k].abs_f64() < 1e-30);
                }
            }
        }
    }

    #[test]
    fn degenerate_edge_rejected() {
        let p = Precision::digits(30);
        let v = vec![p.complex(0.0, 0.0), p.complex(0.0, 0.0), p.complex(1.0, 1.0)];
        assert!(matches!(
            polygon_moment(&v, 0, 0, p),
            Err(MomentError::DegenerateEdge(0))
        ));
    }
}
