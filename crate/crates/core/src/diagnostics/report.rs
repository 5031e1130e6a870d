//! Assembling every diagnostic for one domain into a serializable report.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{
    alpha, beta, check_sum_identity, distances, exterior_map_domain, gamma_of, level_grid, norm_identity_residual,
    pointwise_a, pointwise_b, rate_fit, xi, EpsilonEngine, FitMode, RateFit, DEFAULT_LEVELS,
};
use crate::bergman::{orthonormalize, OrthonormalBasis};
use crate::conformal::capacity_from_ratio;
use crate::error::Error;
use crate::faber::{faber_family, singular_parts};
use crate::geometry::DomainSpec;
use crate::moments::{gram_matrix, MomentCache, MomentMatrix};
use crate::mp::{to_decimal_sig, Complex, Real};

/// Significant digits written for report values.
const SIG: usize = 20;

#[derive(Clone, Debug)]
pub struct ReportOptions {
    pub n_max: usize,
    pub levels: Vec<f64>,
    pub per_level: usize,
    pub sum_tolerance: f64,
    pub tail_tolerance: f64,
    /// Lowest degree used in the rate fits.
    pub fit_from: usize,
    pub pointwise: bool,
}

impl ReportOptions {
    pub fn new(n_max: usize) -> Self {
        ReportOptions {
            n_max,
            levels: DEFAULT_LEVELS.to_vec(),
            per_level: 20,
            sum_tolerance: 1e-6,
            tail_tolerance: super::epsilon::DEFAULT_TAIL_TOLERANCE,
            fit_from: 10,
            pointwise: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PerDegree {
    pub n: usize,
    pub lambda: String,
    pub alpha: Option<String>,
    pub beta: Option<String>,
    pub epsilon: Option<String>,
    pub epsilon_tail: Option<String>,
    pub epsilon_uncertainty: Option<String>,
    pub xi: Option<String>,
    pub sigma: Option<String>,
    pub sum_residual: Option<String>,
    pub norm_residual: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointRow {
    pub n: usize,
    pub level: f64,
    pub z: [String; 2],
    pub a: [String; 2],
    pub b: Option<[String; 2]>,
    pub h: Option<[String; 2]>,
    pub e: Option<[String; 2]>,
    pub dist: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct NamedFit {
    pub quantity: String,
    #[serde(flatten)]
    pub fit: RateFit,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticsReport {
    pub domain: String,
    pub precision_digits: u32,
    pub n_max: usize,
    pub gram_residual: String,
    pub per_n: Vec<PerDegree>,
    pub pointwise: Vec<PointRow>,
    pub fits: Vec<NamedFit>,
    pub tolerances: BTreeMap<String, String>,
    /// Quantities skipped and why (e.g. capacity unknown).
    pub notes: Vec<String>,
}

fn dec(x: &Real) -> String {
    to_decimal_sig(x, SIG)
}

fn cdec(z: &Complex) -> [String; 2] {
    [dec(&z.re), dec(&z.im)]
}

fn fdec(x: f64) -> String {
    format!("{x:.6e}")
}

/// Moments, basis (degree `n_max + 1`) and every quantity available for the
/// domain; map-dependent parts use the domain's exterior map, or a
/// closed-form companion map for a catalog regular polygon.
pub fn build_report(
    spec: &DomainSpec,
    opts: &ReportOptions,
    cache: Option<&MomentCache>,
) -> Result<(DiagnosticsReport, MomentMatrix, OrthonormalBasis), Error> {
    let m = gram_matrix(spec, opts.n_max + 1, cache)?;
    let basis = orthonormalize(&m)?;
    let report = report_from(spec, opts, &m, &basis)?;
    Ok((report, m, basis))
}

/// As [`build_report`] with precomputed moments and basis, both of degree at
/// least `n_max + 1`.
pub fn report_from(
    spec: &DomainSpec,
    opts: &ReportOptions,
    m: &MomentMatrix,
    basis: &OrthonormalBasis,
) -> Result<DiagnosticsReport, Error> {
    let n_max = opts.n_max;
    if basis.degree < n_max + 1 || m.degree < n_max + 1 {
        return Err(crate::error::BergmanError::DegreeOutOfRange {
            n: n_max + 1,
            max: basis.degree.min(m.degree),
        }
        .into());
    }
    let prec = spec.prec;
    let gamma = gamma_of(spec);
    let map = exterior_map_domain(spec);
    let mut notes = Vec::new();
    if gamma.is_none() {
        notes.push("capacity unknown: alpha, xi and sigma skipped".to_string());
    }
    let fam = match &map {
        Some(md) => Some(faber_family(md, n_max)?),
        None => {
            notes.push("no exterior map: beta, epsilon and pointwise quantities skipped".to_string());
            None
        }
    };
    let engine = match &map {
        Some(md) => {
            let mut e = EpsilonEngine::new(md, n_max)?;
            e.tolerance = opts.tail_tolerance;
            Some(e)
        }
        None => None,
    };
    let floor = super::digits_floor(prec, 0.5);
    let mut per_n = Vec::with_capacity(n_max + 1);
    let mut alphas = Vec::new();
    for n in 0..=n_max {
        let a = gamma.as_ref().map(|g| alpha(basis, Some(g), n)).transpose()?;
        let x = gamma.as_ref().map(|g| xi(basis, g, n));
        let sigma = capacity_from_ratio(basis, n, spec.known_capacity.as_ref())?.sigma;
        let (b, e) = match (&fam, &engine) {
            (Some(f), Some(eng)) => (Some(beta(basis, f, m, n)), Some(eng.epsilon(f, n)?)),
            _ => (None, None),
        };
        let sum_residual = match (&a, &b, &e) {
            (Some(a), Some(b), Some(e)) => Some(check_sum_identity(a, b, &e.value, opts.sum_tolerance, floor).residual),
            _ => None,
        };
        let norm_residual = match (&fam, &e) {
            (Some(f), Some(e)) => Some(norm_identity_residual(f, m, &e.value, n)),
            _ => None,
        };
        if let Some(a) = &a {
            alphas.push((n, a.to_f64()));
        }
        per_n.push(PerDegree {
            n,
            lambda: dec(&basis.lambdas[n]),
            alpha: a.as_ref().map(dec),
            beta: b.as_ref().map(dec),
            epsilon: e.as_ref().map(|e| dec(&e.value)),
            epsilon_tail: e.as_ref().map(|e| fdec(e.tail)),
            epsilon_uncertainty: e.as_ref().map(|e| fdec(e.uncertainty)),
            xi: x.as_ref().map(dec),
            sigma: sigma.as_ref().map(dec),
            sum_residual: sum_residual.map(fdec),
            norm_residual: norm_residual.map(fdec),
        });
    }

    let mut pointwise = Vec::new();
    if let (true, Some(md), Some(f)) = (opts.pointwise, &map, &fam) {
        let grid = level_grid(md, &opts.levels, opts.per_level)?;
        let dists = distances(spec, &grid);
        let degrees: Vec<usize> = (1..=n_max).filter(|n| n % 5 == 0 || *n == n_max).collect();
        let rows: Vec<Result<Vec<PointRow>, Error>> = degrees
            .par_iter()
            .map(|&n| {
                grid.iter()
                    .zip(&dists)
                    .map(|(pt, d)| {
                        let a = pointwise_a(basis, pt, n)?;
                        let b = pointwise_b(basis, pt, n).ok();
                        let (e, h) = singular_parts(f, &pt.w, &pt.dphi, n, &pt.z);
                        Ok(PointRow {
                            n,
                            level: pt.level,
                            z: cdec(&pt.z),
                            a: cdec(&a),
                            b: b.as_ref().map(cdec),
                            h: Some(cdec(&h)),
                            e: Some(cdec(&e)),
                            dist: fdec(*d),
                        })
                    })
                    .collect()
            })
            .collect();
        for r in rows {
            pointwise.extend(r?);
        }
    }

    let mut fits = Vec::new();
    let window =
        |v: &[(usize, f64)]| -> Vec<(usize, f64)> { v.iter().copied().filter(|(n, _)| *n >= opts.fit_from).collect() };
    for (name, values, mode) in [("alpha", window(&alphas), FitMode::Algebraic)] {
        match rate_fit(&values, mode) {
            Ok(fit) => fits.push(NamedFit {
                quantity: name.to_string(),
                fit,
            }),
            Err(e) => notes.push(format!("{name} fit skipped: {e}")),
        }
    }

    let mut tolerances = BTreeMap::new();
    tolerances.insert("sum_identity_relative".to_string(), fdec(opts.sum_tolerance));
    tolerances.insert("sum_identity_floor".to_string(), fdec(floor));
    tolerances.insert("epsilon_tail_relative".to_string(), fdec(opts.tail_tolerance));
    if let Some(eng) = &engine {
        tolerances.insert("epsilon_depth".to_string(), eng.depth().to_string());
    }
    let report = DiagnosticsReport {
        domain: spec.name.clone(),
        precision_digits: prec.decimal_digits(),
        n_max,
        gram_residual: fdec(basis.gram_residual),
        per_n,
        pointwise,
        fits,
        tolerances,
        notes,
    };
    Ok(report)
}

fn opt(s: &Option<String>) -> &str {
    s.as_deref().unwrap_or("")
}

impl DiagnosticsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// `(file name, contents)` for each table.
    pub fn to_csv_tables(&self) -> Vec<(String, String)> {
        let mut per = String::from(
            "n,lambda,alpha,beta,epsilon,epsilon_tail,epsilon_uncertainty,xi,sigma,sum_residual,norm_residual\n",
        );
        for r in &self.per_n {
            per.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                r.n,
                r.lambda,
                opt(&r.alpha),
                opt(&r.beta),
                opt(&r.epsilon),
                opt(&r.epsilon_tail),
                opt(&r.epsilon_uncertainty),
                opt(&r.xi),
                opt(&r.sigma),
                opt(&r.sum_residual),
                opt(&r.norm_residual)
            ));
        }
        let mut pts = String::from("n,level,z_re,z_im,a_re,a_im,b_re,b_im,h_re,h_im,e_re,e_im,dist\n");
        let pair = |p: &Option<[String; 2]>| match p {
            Some([a, b]) => format!("{a},{b}"),
            None => ",".to_string(),
        };
        for r in &self.pointwise {
            pts.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.n,
                r.level,
                r.z[0],
                r.z[1],
                format_args!("{},{}", r.a[0], r.a[1]),
                pair(&r.b),
                pair(&r.h),
                pair(&r.e),
                r.dist
            ));
        }
        let mut fits = String::from("quantity,mode,slope,intercept,residual,n_from,n_to\n");
        for f in &self.fits {
            fits.push_str(&format!(
                "{},{},{:.9e},{:.9e},{:.3e},{},{}\n",
                f.quantity,
                match f.fit.mode {
                    FitMode::Algebraic => "algebraic",
                    FitMode::Geometric => "geometric",
                },
                f.fit.slope,
                f.fit.intercept,
                f.fit.residual,
                f.fit.n_from,
                f.fit.n_to
            ));
        }
        vec![
            ("per_n.csv".to_string(), per),
            ("pointwise.csv".to_string(), pts),
            ("fits.csv".to_string(), fits),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::catalog;
    use crate::mp::Precision;

    #[test]
    fn disk_report_is_deterministic_and_exact() {
        let p = Precision::digits(60);
        let spec = catalog("disk", &[1.0], p).unwrap();
        let mut opts = ReportOptions::new(10);
        opts.per_level = 4;
        let (r1, _, _) = build_report(&spec, &opts, None).unwrap();
        let (r2, _, _) = build_report(&spec, &opts, None).unwrap();
        assert_eq!(r1.to_json(), r2.to_json());
        for row in &r1.per_n {
            let a: f64 = row.alpha.as_ref().unwrap().parse().unwrap();
            assert!(a.abs() < 1e-40);
        }
        assert!(r1.to_csv_tables()[0].1.lines().count() == 12);
    }

    #[test]
    fn polygon_without_capacity_skips_alpha() {
        let p = Precision::digits(40);
        let spec = catalog("l-shape", &[], p).unwrap();
        let (r, _, _) = build_report(&spec, &ReportOptions::new(4), None).unwrap();
        assert!(r.per_n.iter().all(|row| row.alpha.is_none() && row.beta.is_none()));
        assert_eq!(r.notes.len(), 3);
    }
}
