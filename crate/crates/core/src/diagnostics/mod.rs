//! Strong-asymptotic error quantities, the identity and inequality checks,
//! and decay-rate fits.

pub mod corner_integral;
pub mod epsilon;
pub mod report;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;
use serde::Serialize;

use crate::bergman::{horner, OrthonormalBasis};
use crate::conformal::{invert_exterior_map, BoundaryDistance, ExteriorPointValue};
use crate::error::{ConformalError, DiagnosticsError, Error};
use crate::faber::FaberFamily;
use crate::geometry::{DomainSpec, RegularPolygonMap};
use crate::linalg;
use crate::moments::MomentMatrix;
use crate::mp::{Complex, Precision, Real};

pub use corner_integral::{corner_integral, corner_integral_reduced};
pub use epsilon::{EpsilonEngine, EpsilonValue};
pub use report::{build_report, report_from, DiagnosticsReport, ReportOptions};

/// Level sets `|Phi| = R` used for pointwise checks.
pub const DEFAULT_LEVELS: [f64; 5] = [1.1, 1.25, 1.5, 2.0, 3.0];

/// `gamma = 1/cap`, from the domain metadata or the map's leading coefficient.
pub fn gamma_of(spec: &DomainSpec) -> Option<Real> {
    if let Some(c) = &spec.known_capacity {
        return Some(c.clone().recip());
    }
    spec.laurent_coefficient(-1).ok().map(|b| b.abs().recip())
}

/// A map-defined description of the same set: the domain itself if it has
/// one, or the closed-form map when a polygon is a catalog regular polygon.
pub fn exterior_map_domain(spec: &DomainSpec) -> Option<DomainSpec> {
    if spec.psi().is_some() {
        return Some(spec.clone());
    }
    let v = spec.vertices()?;
    let q = v.len() as u32;
    let side = (&v[1] - &v[0]).abs();
    let gen = RegularPolygonMap::new(q, &side, spec.prec).ok()?;
    let gv = gen.vertices();
    let scale = side.to_f64();
    let same = v.iter().all(|a| gv.iter().any(|b| (a - b).abs_f64() < 1e-12 * scale));
    if !same {
        return None;
    }
    if q == 4 {
        let args = [crate::mp::to_decimal(&side)];
        return crate::geometry::catalog_str("square-map", &args, spec.prec).ok();
    }
    None
}

/// `alpha_n = 1 - (n+1)/pi gamma^{2(n+1)} / lambda_n^2`.
pub fn alpha(basis: &OrthonormalBasis, gamma: Option<&Real>, n: usize) -> Result<Real, DiagnosticsError> {
    let gamma = gamma.ok_or(DiagnosticsError::CapacityUnavailable)?;
    let p = basis.prec;
    let g = Float::with_val(p.bits(), gamma.pow_ref_u(2 * (n as u32 + 1)));
    let lam2 = Float::with_val(p.bits(), basis.lambdas[n].square_ref());
    Ok(p.one() - p.int(n as i64 + 1) / p.pi() * g / lam2)
}

/// `xi_n` from `lambda_n / gamma^{n+1} = sqrt((n+1)/pi) (1 + xi_n)`.
pub fn xi(basis: &OrthonormalBasis, gamma: &Real, n: usize) -> Real {
    let p = basis.prec;
    let g = Float::with_val(p.bits(), gamma.pow_ref_u(n as u32 + 1));
    let s = (p.int(n as i64 + 1) / p.pi()).sqrt();
    Float::with_val(p.bits(), &basis.lambdas[n] / g) / s - 1u32
}

trait PowU {
    fn pow_ref_u(&self, e: u32) -> Real;
}

impl PowU for Real {
    fn pow_ref_u(&self, e: u32) -> Real {
        use rug::ops::Pow;
        Float::with_val(self.prec(), self.pow(e))
    }
}

/// `q_{n-1} = G_n - (gamma^{n+1} / lambda_n) p_n` as coefficients (degree
/// `< n` up to rounding).
pub fn q_coefficients(basis: &OrthonormalBasis, fam: &FaberFamily, n: usize) -> Vec<Complex> {
    let p = basis.prec;
    let ratio = Float::with_val(p.bits(), fam.gamma.pow_ref_u(n as u32 + 1)) / &basis.lambdas[n];
    fam.g[n]
        .iter()
        .zip(&basis.coeffs[n])
        .map(|(g, c)| g - &c.mul_real(&ratio))
        .collect()
}

/// `beta_n = (n+1)/pi ||q_{n-1}||^2`.
pub fn beta(basis: &OrthonormalBasis, fam: &FaberFamily, m: &MomentMatrix, n: usize) -> Real {
    let p = basis.prec;
    let q = q_coefficients(basis, fam, n);
    let norm = linalg::quad_form(&m.entries, &q, p);
    p.int(n as i64 + 1) / p.pi() * norm
}

/// `||G_n||^2` through the moment quadratic form.
pub fn norm_g_squared(fam: &FaberFamily, m: &MomentMatrix, n: usize) -> Real {
    linalg::quad_form(&m.entries, &fam.g[n], fam.prec)
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub pass: bool,
    pub residual: f64,
    pub tolerance: f64,
}

/// `|alpha_n - (beta_n + eps_n)| <= tol max(alpha_n, floor)`.
pub fn check_sum_identity(alpha: &Real, beta: &Real, eps: &Real, tol: f64, floor: f64) -> IdentityCheck {
    let diff = Float::with_val(alpha.prec(), alpha - beta) - eps;
    let scale = alpha.to_f64().max(floor);
    let residual = diff.abs().to_f64() / scale;
    IdentityCheck {
        pass: residual <= tol,
        residual,
        tolerance: tol,
    }
}

/// Relative gap between `||G_n||^2` and `pi/(n+1) (1 - eps_n)`.
pub fn norm_identity_residual(fam: &FaberFamily, m: &MomentMatrix, eps: &Real, n: usize) -> f64 {
    let p = fam.prec;
    let lhs = norm_g_squared(fam, m, n);
    let rhs = p.pi() / p.int(n as i64 + 1) * (p.one() - eps);
    (Float::with_val(p.bits(), &lhs - &rhs) / rhs).abs().to_f64()
}

/// `A_n(z) = p_n(z) / (sqrt((n+1)/pi) Phi^n Phi') - 1`.
pub fn pointwise_a(basis: &OrthonormalBasis, pt: &ExteriorPointValue, n: usize) -> Result<Complex, Error> {
    let p = basis.prec;
    let pn = basis.evaluate(n, &pt.z)?;
    let s = (p.int(n as i64 + 1) / p.pi()).sqrt();
    let model = (&pt.w.powi(n as i64) * &pt.dphi).mul_real(&s);
    Ok(&(&pn / &model) - &p.cone())
}

/// `B_n(z)` from `sqrt((n+1)/(n+2)) p_{n+1}/p_n = Phi (1 + B_n)`.
pub fn pointwise_b(basis: &OrthonormalBasis, pt: &ExteriorPointValue, n: usize) -> Result<Complex, Error> {
    let est = crate::conformal::phi_from_ratio(basis, n, &pt.z)?;
    Ok(&(&est / &pt.w) - &basis.prec.cone())
}

/// Points on the level sets `|Phi| = R`, equi-angular in `w`, given through
/// their preimages (so `Phi` is exact there).
pub fn level_grid(
    spec: &DomainSpec,
    levels: &[f64],
    per_level: usize,
) -> Result<Vec<ExteriorPointValue>, ConformalError> {
    let p = spec.prec;
    let mut out = Vec::with_capacity(levels.len() * per_level);
    for &r in levels {
        for k in 0..per_level {
            // offset keeps nodes off the symmetry axes through the corners
            let theta = p.pi() * 2u32 * (p.int(2 * k as i64 + 1) / p.int(2 * per_level as i64));
            let w = Complex::cis(&theta).mul_real(&p.real(r));
            out.push(ExteriorPointValue::from_preimage(spec, &w)?);
        }
    }
    Ok(out)
}

/// `max_z n dist(z, Gamma) |H_n(z)|` over the points.
pub fn h_bound(fam: &FaberFamily, pts: &[ExteriorPointValue], dists: &[f64], n: usize) -> f64 {
    pts.iter()
        .zip(dists)
        .map(|(pt, d)| {
            let (_, h) = crate::faber::singular_parts(fam, &pt.w, &pt.dphi, n, &pt.z);
            n as f64 * d * h.abs_f64()
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthResult {
    pub n: usize,
    pub draws: usize,
    /// `max |P| dist / (sqrt((n+1)/pi) ||P||_2 |Phi|^{n+1})`.
    pub max_scaled: f64,
    /// `max |P| / (||P||_inf |Phi|^n)` with the sup norm sampled on the boundary.
    pub max_bernstein_walsh: f64,
}

/// Random polynomials `P = sum a_k p_k` (uniform complex `a_k` from a seeded
/// stream) against the growth bound and the Bernstein–Walsh inequality.
#[allow(clippy::too_many_arguments)]
pub fn growth_check(
    m: &MomentMatrix,
    basis: &OrthonormalBasis,
    pts: &[ExteriorPointValue],
    dists: &[f64],
    boundary: &[(f64, f64)],
    n: usize,
    draws: usize,
    seed: u64,
) -> GrowthResult {
    let p = basis.prec;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let s = (p.int(n as i64 + 1) / p.pi()).sqrt().to_f64();
    let mut worst = 0.0f64;
    let mut worst_bw = 0.0f64;
    for _ in 0..draws {
        let mut coeffs = vec![p.czero(); n + 1];
        for k in 0..=n {
            let a = p.complex(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            for (j, c) in basis.coeffs[k].iter().enumerate() {
                coeffs[j] += &(&a * c);
            }
        }
        let l2 = linalg::quad_form(&m.entries, &coeffs, p).sqrt().to_f64();
        let fc: Vec<(f64, f64)> = coeffs.iter().map(|c| c.to_f64()).collect();
        let sup = boundary.iter().map(|z| horner_f64(&fc, *z)).fold(0.0, f64::max);
        for (pt, d) in pts.iter().zip(dists) {
            let v = horner(&coeffs, &pt.z).abs_f64();
            let lvl = pt.level;
            worst = worst.max(v * d / (s * l2 * lvl.powi(n as i32 + 1)));
            worst_bw = worst_bw.max(v / (sup * lvl.powi(n as i32)));
        }
    }
    GrowthResult {
        n,
        draws,
        max_scaled: worst,
        max_bernstein_walsh: worst_bw,
    }
}

fn horner_f64(c: &[(f64, f64)], z: (f64, f64)) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for &(a, b) in c.iter().rev() {
        let r = re * z.0 - im * z.1 + a;
        im = re * z.1 + im * z.0 + b;
        re = r;
    }
    re.hypot(im)
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerBound {
    pub n: usize,
    /// `pi (1 - k^2) / A (n+1) |b_{n+1}|^2`.
    pub bound: f64,
    pub alpha: f64,
    pub epsilon: Option<f64>,
    pub alpha_pass: bool,
    pub epsilon_pass: Option<bool>,
}

pub fn lower_bound_check(
    alpha: &Real,
    eps: Option<&Real>,
    b_next: &Complex,
    area: &Real,
    k: Option<f64>,
    n: usize,
) -> Result<LowerBound, DiagnosticsError> {
    let k = k.ok_or(DiagnosticsError::ReflectionFactorMissing)?;
    let bound = std::f64::consts::PI * (1.0 - k * k) / area.to_f64() * (n as f64 + 1.0) * b_next.abs_f64().powi(2);
    // rounding slack for the exact-zero cases
    let slack = 1e-30;
    let a = alpha.to_f64();
    let e = eps.map(|e| e.to_f64());
    Ok(LowerBound {
        n,
        bound,
        alpha: a,
        epsilon: e,
        alpha_pass: a + slack >= bound,
        epsilon_pass: e.map(|e| e + slack >= bound),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMode {
    /// `log v` against `log n`.
    Algebraic,
    /// `log v` against `n`.
    Geometric,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateFit {
    pub mode: FitMode,
    pub slope: f64,
    pub intercept: f64,
    /// RMS residual of the fit in log space.
    pub residual: f64,
    pub n_from: usize,
    pub n_to: usize,
}

pub fn rate_fit(values: &[(usize, f64)], mode: FitMode) -> Result<RateFit, DiagnosticsError> {
    if values.len() < 2 {
        return Err(DiagnosticsError::TooFewPoints);
    }
    let mut pts = Vec::with_capacity(values.len());
    for &(n, v) in values {
        if !(v > 0.0) {
            return Err(DiagnosticsError::NonPositive { n, value: v });
        }
        let x = match mode {
            FitMode::Algebraic => (n as f64).ln(),
            FitMode::Geometric => n as f64,
        };
        pts.push((x, v.ln()));
    }
    let (slope, intercept) = least_squares_line(&pts);
    let residual = (pts
        .iter()
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / pts.len() as f64)
        .sqrt();
    Ok(RateFit {
        mode,
        slope,
        intercept,
        residual,
        n_from: values.first().map(|v| v.0).unwrap_or(0),
        n_to: values.last().map(|v| v.0).unwrap_or(0),
    })
}

/// `(slope, intercept)` of the least-squares line.
pub(crate) fn least_squares_line(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
pub(crate) fn solve_dense(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        a.swap(col, piv);
        let d = a[col][col];
        if d == 0.0 {
            continue;
        }
        for row in col + 1..n {
            let f = a[row][col] / d;
            for k in col..=n {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = if a[i][i] == 0.0 { 0.0 } else { (a[i][n] - s) / a[i][i] };
    }
    x
}

/// Convex hull (counterclockwise, monotone chain).
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

pub fn in_convex_hull(hull: &[(f64, f64)], z: (f64, f64), tol: f64) -> bool {
    let n = hull.len();
    (0..n).all(|i| {
        let a = hull[i];
        let b = hull[(i + 1) % n];
        let len = (b.0 - a.0).hypot(b.1 - a.1);
        (b.0 - a.0) * (z.1 - a.1) - (b.1 - a.1) * (z.0 - a.0) >= -tol * len
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroSummary {
    pub n: usize,
    pub all_in_hull: bool,
    /// Zeros outside the closed domain.
    pub exterior_count: usize,
    /// `max |Phi(zero)|` over the exterior zeros.
    pub max_exterior_level: Option<f64>,
    /// `(|Phi(z)|, | |p_n(z)|^{1/n} - |Phi(z)| | / |Phi(z)|)` per grid point.
    pub weak_gaps: Vec<(f64, f64)>,
}

pub fn zero_diagnostics(
    domain: &DomainSpec,
    map_domain: Option<&DomainSpec>,
    basis: &OrthonormalBasis,
    zeros: &[Complex],
    grid: &[ExteriorPointValue],
    n: usize,
) -> ZeroSummary {
    let outline: Vec<(f64, f64)> = match domain.vertices() {
        Some(v) => v.iter().map(|z| z.to_f64()).collect(),
        None => domain.boundary_samples(crate::geometry::BOUNDARY_SAMPLES),
    };
    let hull = convex_hull(&outline);
    let all_in_hull = zeros.iter().all(|z| in_convex_hull(&hull, z.to_f64(), 1e-12));
    let mut exterior_count = 0;
    let mut max_level: Option<f64> = None;
    for z in zeros {
        if domain.contains(z) {
            continue;
        }
        exterior_count += 1;
        if let Some(md) = map_domain {
            // zeros hugging the boundary fail the exterior test; count them at level 1
            let lvl = invert_exterior_map(md, z).map(|v| v.level).unwrap_or(1.0);
            max_level = Some(max_level.map_or(lvl, |m: f64| m.max(lvl)));
        }
    }
    let weak_gaps = grid
        .iter()
        .map(|pt| {
            let v = basis.evaluate(n, &pt.z).map(|x| x.abs_f64()).unwrap_or(0.0);
            let root = v.powf(1.0 / n as f64);
            (pt.level, (root - pt.level).abs() / pt.level)
        })
        .collect();
    ZeroSummary {
        n,
        all_in_hull,
        exterior_count,
        max_exterior_level: max_level,
        weak_gaps,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DistortionResult {
    pub nodes: usize,
    pub skipped: usize,
    /// `max (|Phi| - 1) / (4 dist |Phi'|)`; the inequality holds iff `<= 1`.
    pub worst_ratio: f64,
    pub pass: bool,
}

/// `dist(Phi(z), unit circle) <= 4 dist(z, Gamma) |Phi'(z)|` on a `g x g`
/// grid over the box `1.5` times the boundary's extent, exterior nodes only.
pub fn distortion_check(spec: &DomainSpec, g: usize) -> Result<DistortionResult, Error> {
    let map = exterior_map_domain(spec).ok_or(DiagnosticsError::NeedsMap)?;
    let outline = map.boundary_samples(crate::geometry::BOUNDARY_SAMPLES);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in &outline {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let (hx, hy) = (0.75 * (x1 - x0), 0.75 * (y1 - y0));
    let dist = BoundaryDistance::new(spec);
    let p = spec.prec;
    let mut nodes = 0;
    let mut skipped = 0;
    let mut worst = 0.0f64;
    for i in 0..g {
        for j in 0..g {
            let x = cx - hx + 2.0 * hx * i as f64 / (g - 1) as f64;
            let y = cy - hy + 2.0 * hy * j as f64 / (g - 1) as f64;
            let z = p.complex(x, y);
            if spec.contains(&z) {
                skipped += 1;
                continue;
            }
            let v = invert_exterior_map(&map, &z)?;
            let d = dist.distance(&z);
            let lhs = v.level - 1.0;
            let rhs = 4.0 * d * v.dphi.abs_f64();
            worst = worst.max(lhs / rhs);
            nodes += 1;
        }
    }
    Ok(DistortionResult {
        nodes,
        skipped,
        worst_ratio: worst,
        pass: worst <= 1.0,
    })
}

/// Boundary-distance for each point.
pub fn distances(spec: &DomainSpec, pts: &[ExteriorPointValue]) -> Vec<f64> {
    let d = BoundaryDistance::new(spec);
    pts.iter().map(|pt| d.distance(&pt.z)).collect()
}

pub(crate) fn digits_floor(prec: Precision, frac: f64) -> f64 {
    Precision::tenth_pow(prec.decimal_digits() as f64 * frac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bergman::orthonormalize;
    use crate::faber::faber_family;
    use crate::geometry::catalog;
    use crate::moments::gram_matrix;

    fn setup(name: &str, params: &[f64], n: usize, digits: u32) -> (DomainSpec, MomentMatrix, OrthonormalBasis) {
        let p = Precision::digits(digits);
        let spec = catalog(name, params, p).unwrap();
        let m = gram_matrix(&spec, n, None).unwrap();
        let b = orthonormalize(&m).unwrap();
        (spec, m, b)
    }

    #[test]
    fn disk_quantities_vanish() {
        let (spec, m, b) = setup("disk", &[1.0], 8, 60);
        let g = gamma_of(&spec);
        let fam = faber_family(&spec, 7).unwrap();
        let eng = EpsilonEngine::new(&spec, 7).unwrap();
        for n in 0..=7 {
            assert!(alpha(&b, g.as_ref(), n).unwrap().to_f64().abs() < 1e-50);
            assert!(beta(&b, &fam, &m, n).to_f64().abs() < 1e-50);
            assert!(eng.epsilon(&fam, n).unwrap().value.is_zero());
        }
        let pts = level_grid(&spec, &[1.5], 8).unwrap();
        for pt in &pts {
            assert!(pointwise_a(&b, pt, 5).unwrap().abs_f64() < 1e-50);
        }
    }

    #[test]
    fn alpha_refuses_without_gamma() {
        let (_, _, b) = setup("l-shape", &[], 4, 40);
        assert!(matches!(alpha(&b, None, 2), Err(DiagnosticsError::CapacityUnavailable)));
    }

    #[test]
    fn ellipse_sum_and_norm_identities() {
        let (spec, m, b) = setup("ellipse", &[1.0, 0.25], 16, 80);
        let g = gamma_of(&spec);
        let fam = faber_family(&spec, 16).unwrap();
        let eng = EpsilonEngine::new(&spec, 16).unwrap();
        for n in 1..=15 {
            let a = alpha(&b, g.as_ref(), n).unwrap();
            let be = beta(&b, &fam, &m, n);
            let e = eng.epsilon(&fam, n).unwrap().value;
            let chk = check_sum_identity(&a, &be, &e, 1e-6, 1e-30);
            assert!(chk.pass, "n={n}: {}", chk.residual);
            assert!(norm_identity_residual(&fam, &m, &e, n) < 1e-10);
        }
    }

    #[test]
    fn rate_fit_examples() {
        let v: Vec<(usize, f64)> = (1..=20).map(|n| (n, 1.0 / n as f64)).collect();
        let f = rate_fit(&v, FitMode::Algebraic).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12 && f.residual < 1e-12);
        let rho: f64 = 0.5;
        let v: Vec<(usize, f64)> = (1..=20).map(|n| (n, rho.powi(2 * n as i32))).collect();
        let f = rate_fit(&v, FitMode::Geometric).unwrap();
        assert!((f.slope - 2.0 * rho.ln()).abs() < 1e-12);
        assert!(matches!(
            rate_fit(&[(1, 1.0), (2, 0.0)], FitMode::Algebraic),
            Err(DiagnosticsError::NonPositive { n: 2, .. })
        ));
    }

    #[test]
    fn lower_bounds() {
        let (spec, _, b) = setup("disk", &[1.0], 4, 40);
        let area = crate::geometry::area(&spec).unwrap().value;
        let a = alpha(&b, gamma_of(&spec).as_ref(), 2).unwrap();
        let b3 = spec.laurent_coefficient(3).unwrap();
        let lb = lower_bound_check(&a, None, &b3, &area, spec.reflection_factor_k, 2).unwrap();
        assert!(lb.alpha_pass && lb.bound == 0.0);

        // psi = w + 0.2/w^3; a circle-like curve, k supplied generously
        let (spec, m, b) = setup("fourfold", &[0.2], 6, 60);
        let fam = faber_family(&spec, 6).unwrap();
        let eng = EpsilonEngine::new(&spec, 6).unwrap();
        let area = crate::geometry::area(&spec).unwrap().value;
        let a = alpha(&b, gamma_of(&spec).as_ref(), 2).unwrap();
        let e = eng.epsilon(&fam, 2).unwrap().value;
        let b3 = spec.laurent_coefficient(3).unwrap();
        let lb = lower_bound_check(&a, Some(&e), &b3, &area, Some(0.6), 2).unwrap();
        assert!(lb.bound > 0.0 && lb.alpha_pass && lb.epsilon_pass == Some(true));
        let _ = m;
        assert!(matches!(
            lower_bound_check(&a, None, &b3, &area, None, 2),
            Err(DiagnosticsError::ReflectionFactorMissing)
        ));
    }

    #[test]
    fn hull_membership() {
        let h = convex_hull(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.5, 0.5)]);
        assert_eq!(h.len(), 4);
        assert!(in_convex_hull(&h, (0.5, 0.2), 0.0));
        assert!(in_convex_hull(&h, (1.0, 0.5), 1e-12));
        assert!(!in_convex_hull(&h, (1.1, 0.5), 1e-12));
    }

    #[test]
    fn square_polygon_has_map_companion() {
        let p = Precision::digits(30);
        let sq = catalog("square", &[1.0], p).unwrap();
        let m = exterior_map_domain(&sq).unwrap();
        assert!(m.generator().is_some());
        assert!(exterior_map_domain(&catalog("l-shape", &[], p).unwrap()).is_none());
    }

    #[test]
    fn growth_on_the_disk() {
        let (spec, m, b) = setup("disk", &[1.0], 6, 40);
        let pts = level_grid(&spec, &[1.1, 2.0, 10.0], 12).unwrap();
        let d = distances(&spec, &pts);
        let boundary = spec.boundary_samples(1024);
        let g = growth_check(&m, &b, &pts, &d, &boundary, 6, 10, 7);
        assert!(g.max_scaled <= 1.0 && g.max_bernstein_walsh <= 1.0 + 1e-6);
    }
}
