//! Jordan domains: polygons and exterior-map-defined domains, their corner
//! data, and the built-in catalog.

mod config;
mod polygon_map;

use rug::Float;

pub use config::{DomainConfig, GeneratorConfig};
pub use polygon_map::RegularPolygonMap;

use crate::error::GeometryError;
use crate::mp::{Complex, Precision, Real};
use crate::series::LaurentAtInfinity;

/// Samples used for the winding-number and boundary-distance checks.
pub const BOUNDARY_SAMPLES: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct Corner {
    pub position: Complex,
    /// Exterior angle is `omega * pi`.
    pub omega: Real,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DomainKind {
    /// Counterclockwise vertex list.
    Polygon { vertices: Vec<Complex> },
    /// Exterior map `Psi`; `generator` supplies exact coefficients and
    /// boundary points when the map is known in closed form.
    MapDefined {
        psi: LaurentAtInfinity,
        generator: Option<RegularPolygonMap>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DomainSpec {
    pub name: String,
    pub kind: DomainKind,
    pub corners: Vec<Corner>,
    pub known_capacity: Option<Real>,
    pub reflection_factor_k: Option<f64>,
    pub prec: Precision,
}

/// Area with the truncation bound of the series formula (zero when exact).
#[derive(Clone, Debug)]
pub struct AreaValue {
    pub value: Real,
    pub truncation_bound: f64,
}

pub struct CatalogEntry {
    pub name: &'static str,
    pub params: &'static str,
    pub notes: &'static str,
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "disk",
        params: "[r]",
        notes: "disk of radius r (default 1); Psi(w) = r w, k = 0",
    },
    CatalogEntry {
        name: "ellipse",
        params: "[a, b]",
        notes: "Psi(w) = a w + b/w, a > b > 0; semi-axes a + b and a - b",
    },
    CatalogEntry {
        name: "square",
        params: "[side]",
        notes: "axis-aligned square centred at 0 as a polygon; capacity from the closed form",
    },
    CatalogEntry {
        name: "square-map",
        params: "[side]",
        notes: "same square through its exterior Schwarz-Christoffel map Psi' = b (1 + w^-4)^(1/2)",
    },
    CatalogEntry {
        name: "hypocycloid",
        params: "[n]",
        notes: "Psi(w) = w + 1/(n w^n), n >= 2; n+1 inward cusps (not recorded as corners)",
    },
    CatalogEntry {
        name: "fourfold",
        params: "[c]",
        notes: "Psi(w) = w + c/w^3, 0 < c < 1/3; analytic boundary with fourfold symmetry",
    },
    CatalogEntry {
        name: "l-shape",
        params: "[side]",
        notes: "L-shaped hexagon (0,0),(2,0),(2,1),(1,1),(1,2),(0,2) scaled by side/2",
    },
];

fn param(params: &[f64], i: usize, default: f64) -> f64 {
    params.get(i).copied().unwrap_or(default)
}

fn invalid(name: &str, reason: impl Into<String>) -> GeometryError {
    GeometryError::InvalidParams {
        name: name.to_string(),
        reason: reason.into(),
    }
}

/// Build a catalog domain at precision `prec`.
pub fn catalog(name: &str, params: &[f64], prec: Precision) -> Result<DomainSpec, GeometryError> {
    let params_str: Vec<String> = params.iter().map(|x| format!("{x}")).collect();
    catalog_str(name, &params_str, prec)
}

/// As [`catalog`], with parameters given as decimal strings (parsed at full
/// precision).
pub fn catalog_str(name: &str, params: &[String], prec: Precision) -> Result<DomainSpec, GeometryError> {
    let parsed: Vec<Real> = params
        .iter()
        .map(|s| prec.parse(s).map_err(|e| invalid(name, e.to_string())))
        .collect::<Result<_, _>>()?;
    let get = |i: usize, default: f64| -> Real { parsed.get(i).cloned().unwrap_or_else(|| prec.real(default)) };
    let fparams: Vec<f64> = parsed.iter().map(|x| x.to_f64()).collect();
    let spec = match name {
        "disk" => {
            let r = get(0, 1.0);
            if !(r > 0) {
                return Err(invalid(name, "radius must be positive"));
            }
            let psi = LaurentAtInfinity::from_terms(&[(1, Complex::from_real(r.clone()))], prec);
            DomainSpec {
                name: name.into(),
                kind: DomainKind::MapDefined { psi, generator: None },
                corners: vec![],
                known_capacity: Some(r),
                reflection_factor_k: Some(0.0),
                prec,
            }
        }
        "ellipse" => {
            if parsed.len() != 2 {
                return Err(invalid(name, "expects [a, b]"));
            }
            let (a, b) = (get(0, 1.0), get(1, 0.25));
            if !(b > 0 && a > b) {
                return Err(invalid(name, format!("need a > b > 0, got a = {a}, b = {b}")));
            }
            let psi =
                LaurentAtInfinity::from_terms(&[(1, Complex::from_real(a.clone())), (-1, Complex::from_real(b))], prec);
            DomainSpec {
                name: name.into(),
                kind: DomainKind::MapDefined { psi, generator: None },
                corners: vec![],
                known_capacity: Some(a),
                reflection_factor_k: None,
                prec,
            }
        }
        "square" | "square-map" => {
            let side = get(0, 1.0);
            let gen = RegularPolygonMap::new(4, &side, prec).map_err(|e| match e {
                GeometryError::InvalidParams { reason, .. } => invalid(name, reason),
                other => other,
            })?;
            let cap = gen.capacity().clone();
            if name == "square" {
                DomainSpec::polygon(name, gen.vertices(), prec)?.with_capacity(cap)
            } else {
                let corners = gen
                    .vertices()
                    .into_iter()
                    .map(|position| Corner {
                        position,
                        omega: gen.omega(),
                    })
                    .collect();
                DomainSpec {
                    name: name.into(),
                    kind: DomainKind::MapDefined {
                        psi: gen.series(512),
                        generator: Some(gen),
                    },
                    corners,
                    known_capacity: Some(cap),
                    reflection_factor_k: None,
                    prec,
                }
            }
        }
        "hypocycloid" => {
            let n = param(&fparams, 0, 2.0);
            if n.fract() != 0.0 || n < 2.0 {
                return Err(invalid(name, "n must be an integer >= 2"));
            }
            let n = n as i64;
            let psi =
                LaurentAtInfinity::from_terms(&[(1, prec.cone()), (-n, Complex::from_real(prec.ratio(1, n)))], prec);
            DomainSpec {
                name: name.into(),
                kind: DomainKind::MapDefined { psi, generator: None },
                corners: vec![],
                known_capacity: Some(prec.one()),
                reflection_factor_k: None,
                prec,
            }
        }
        "fourfold" => {
            let c = get(0, 0.2);
            if !(c > 0 && c < prec.ratio(1, 3)) {
                return Err(invalid(name, "need 0 < c < 1/3 for a univalent map"));
            }
            let psi = LaurentAtInfinity::from_terms(&[(1, prec.cone()), (-3, Complex::from_real(c))], prec);
            DomainSpec {
                name: name.into(),
                kind: DomainKind::MapDefined { psi, generator: None },
                corners: vec![],
                known_capacity: Some(prec.one()),
                reflection_factor_k: None,
                prec,
            }
        }
        "l-shape" => {
            let side = get(0, 2.0);
            if !(side > 0) {
                return Err(invalid(name, "side must be positive"));
            }
            let h = Float::with_val(prec.bits(), &side / 2u32);
            let pts = [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)];
            let vertices = pts
                .iter()
                .map(|&(x, y)| {
                    Complex::new(
                        Float::with_val(prec.bits(), &h * x),
                        Float::with_val(prec.bits(), &h * y),
                    )
                })
                .collect();
            DomainSpec::polygon(name, vertices, prec)?
        }
        _ => return Err(GeometryError::UnknownDomain(name.to_string())),
    };
    spec.validate()?;
    Ok(spec)
}

impl DomainSpec {
    /// Polygon with corners derived from the vertex turning angles.
    pub fn polygon(name: &str, vertices: Vec<Complex>, prec: Precision) -> Result<DomainSpec, GeometryError> {
        let corners = polygon_corners(&vertices, prec)?;
        let spec = DomainSpec {
            name: name.to_string(),
            kind: DomainKind::Polygon { vertices },
            corners,
            known_capacity: None,
            reflection_factor_k: None,
            prec,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Domain given by an exterior-map series.
    pub fn map_defined(
        name: &str,
        psi: LaurentAtInfinity,
        corners: Vec<Corner>,
        prec: Precision,
    ) -> Result<DomainSpec, GeometryError> {
        let known_capacity = Some(psi.leading().re.clone());
        let spec = DomainSpec {
            name: name.to_string(),
            kind: DomainKind::MapDefined { psi, generator: None },
            corners,
            known_capacity,
            reflection_factor_k: None,
            prec,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_capacity(mut self, cap: Real) -> Self {
        self.known_capacity = Some(cap);
        self
    }

    pub fn with_reflection_factor(mut self, k: f64) -> Result<Self, GeometryError> {
        if !(0.0..1.0).contains(&k) {
            return Err(invalid(
                &self.name,
                format!("reflection factor must lie in [0, 1), got {k}"),
            ));
        }
        self.reflection_factor_k = Some(k);
        Ok(self)
    }

    pub fn is_polygon(&self) -> bool {
        matches!(self.kind, DomainKind::Polygon { .. })
    }

    pub fn psi(&self) -> Option<&LaurentAtInfinity> {
        match &self.kind {
            DomainKind::MapDefined { psi, .. } => Some(psi),
            DomainKind::Polygon { .. } => None,
        }
    }

    pub fn generator(&self) -> Option<&RegularPolygonMap> {
        match &self.kind {
            DomainKind::MapDefined { generator, .. } => generator.as_ref(),
            DomainKind::Polygon { .. } => None,
        }
    }

    pub fn vertices(&self) -> Option<&[Complex]> {
        match &self.kind {
            DomainKind::Polygon { vertices } => Some(vertices),
            DomainKind::MapDefined { .. } => None,
        }
    }

    /// `Psi` to depth `depth`: regenerated from the closed form when one is
    /// available, padded if exact, otherwise the stored series (possibly
    /// shallower than requested).
    pub fn psi_to_depth(&self, depth: i64) -> Option<LaurentAtInfinity> {
        match &self.kind {
            DomainKind::MapDefined { generator: Some(g), .. } => Some(g.series(depth.max(0) as u64)),
            DomainKind::MapDefined { psi, .. } => Some(if psi.is_exact() {
                psi.padded(depth)
            } else {
                psi.truncated(depth)
            }),
            DomainKind::Polygon { .. } => None,
        }
    }

    /// Laurent coefficient `b_m` of `w^{-m}` (`m = -1` gives `b`).
    pub fn laurent_coefficient(&self, m: i64) -> Result<Complex, crate::error::SeriesError> {
        match &self.kind {
            DomainKind::MapDefined { generator: Some(g), .. } if m >= 0 => {
                Ok(Complex::from_real(g.coefficient(m as u64)))
            }
            DomainKind::MapDefined { psi, .. } => psi.coeff(-m),
            DomainKind::Polygon { .. } => Err(crate::error::SeriesError::BeyondDepth { index: m, depth: -1 }),
        }
    }

    /// `Psi(w)` pointwise (`|w| >= 1`).
    pub fn psi_eval(&self, w: &Complex) -> Option<Complex> {
        match &self.kind {
            DomainKind::MapDefined { generator: Some(g), .. } => Some(g.psi(w)),
            DomainKind::MapDefined { psi, .. } => Some(psi.eval(w)),
            DomainKind::Polygon { .. } => None,
        }
    }

    /// `Psi'(w)` pointwise.
    pub fn psi_prime_eval(&self, w: &Complex) -> Option<Complex> {
        match &self.kind {
            DomainKind::MapDefined { generator: Some(g), .. } => Some(g.psi_prime(w)),
            DomainKind::MapDefined { psi, .. } => Some(psi.differentiate().eval(w)),
            DomainKind::Polygon { .. } => None,
        }
    }

    /// Boundary point and `dz/dtheta` at `w = e^{i theta}` (map domains).
    pub fn boundary_point(&self, theta: &Real) -> Option<(Complex, Complex)> {
        match &self.kind {
            DomainKind::MapDefined { generator: Some(g), .. } => Some(g.boundary_point(theta)),
            DomainKind::MapDefined { psi, .. } => {
                let w = Complex::cis(theta);
                let z = psi.eval(&w);
                let dz = psi.differentiate().eval(&w) * w.mul_i();
                Some((z, dz))
            }
            DomainKind::Polygon { .. } => None,
        }
    }

    /// A point inside the domain: the vertex centroid for polygons with a
    /// winding check, the constant coefficient for maps.
    pub fn interior_point(&self) -> Complex {
        match &self.kind {
            DomainKind::Polygon { vertices } => {
                let c = polygon_area_centroid(vertices, self.prec);
                if polygon_contains(vertices, &c) {
                    return c;
                }
                // non-convex fallback: nudge from the first convex corner inwards
                let n = vertices.len();
                for i in 0..n {
                    let a = &vertices[(i + n - 1) % n];
                    let b = &vertices[i];
                    let d = &vertices[(i + 1) % n];
                    let mid = (&(a + d) + &b.scale_i64(2)).div_real(&self.prec.real(4.0));
                    if polygon_contains(vertices, &mid) {
                        return mid;
                    }
                }
                c
            }
            DomainKind::MapDefined { psi, .. } => psi.coeff(0).unwrap_or_else(|_| self.prec.czero()),
        }
    }

    /// Closed boundary polyline at `samples` points (f64 accuracy suffices).
    pub fn boundary_samples(&self, samples: usize) -> Vec<(f64, f64)> {
        match &self.kind {
            DomainKind::Polygon { vertices } => {
                let per = (samples / vertices.len()).max(1);
                let n = vertices.len();
                let mut out = Vec::with_capacity(per * n);
                for i in 0..n {
                    let a = vertices[i].to_f64();
                    let b = vertices[(i + 1) % n].to_f64();
                    for k in 0..per {
                        let t = k as f64 / per as f64;
                        out.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
                    }
                }
                out
            }
            DomainKind::MapDefined { .. } => {
                let low = self.at_precision(Precision::digits(20));
                let p = low.prec;
                (0..samples)
                    .map(|i| {
                        let theta = p.pi() * 2u32 * p.ratio(i as i64, samples as i64);
                        low.boundary_point(&theta).expect("map domain").0.to_f64()
                    })
                    .collect()
            }
        }
    }

    /// Same domain rebuilt at another precision (values rounded).
    pub fn at_precision(&self, prec: Precision) -> DomainSpec {
        let bits = prec.bits();
        let cc = |z: &Complex| z.with_prec(bits);
        let kind = match &self.kind {
            DomainKind::Polygon { vertices } => DomainKind::Polygon {
                vertices: vertices.iter().map(cc).collect(),
            },
            DomainKind::MapDefined { psi, generator } => DomainKind::MapDefined {
                psi: LaurentAtInfinity::new(
                    psi.top_power(),
                    psi.coefficients().iter().map(cc).collect(),
                    prec,
                    psi.is_exact(),
                ),
                generator: generator.as_ref().map(|g| g.with_precision(prec)),
            },
        };
        DomainSpec {
            name: self.name.clone(),
            kind,
            corners: self
                .corners
                .iter()
                .map(|c| Corner {
                    position: cc(&c.position),
                    omega: Float::with_val(bits, &c.omega),
                })
                .collect(),
            known_capacity: self.known_capacity.as_ref().map(|c| Float::with_val(bits, c)),
            reflection_factor_k: self.reflection_factor_k,
            prec,
        }
    }

    /// Check the structural invariants.
    pub fn validate(&self) -> Result<(), GeometryError> {
        for c in &self.corners {
            if !(c.omega > 0 && c.omega < 2) {
                return Err(GeometryError::InvalidParams {
                    name: self.name.clone(),
                    reason: format!("corner omega {} outside (0, 2)", c.omega.to_f64()),
                });
            }
        }
        if let Some(k) = self.reflection_factor_k {
            if !(0.0..1.0).contains(&k) {
                return Err(invalid(&self.name, "reflection factor must lie in [0, 1)"));
            }
        }
        if let Some(cap) = &self.known_capacity {
            if !(*cap > 0) {
                return Err(invalid(&self.name, "known capacity must be positive"));
            }
        }
        match &self.kind {
            DomainKind::Polygon { vertices } => validate_polygon(vertices, self.prec),
            DomainKind::MapDefined { psi, .. } => {
                if psi.top_power() != 1 {
                    return Err(GeometryError::InvalidMap(format!(
                        "top power must be 1, got {}",
                        psi.top_power()
                    )));
                }
                let b = psi.leading();
                if !(b.im.is_zero() && b.re > 0) {
                    return Err(GeometryError::InvalidMap(
                        "leading coefficient must be real and positive".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Winding number of the sampled boundary about the interior point.
    pub fn winding_number(&self) -> i64 {
        let z0 = self.interior_point().to_f64();
        let pts = self.boundary_samples(BOUNDARY_SAMPLES);
        winding(&pts, z0)
    }

    /// Is `z` strictly inside the domain? Exact for polygons; sampled
    /// boundary for maps.
    pub fn contains(&self, z: &Complex) -> bool {
        match &self.kind {
            DomainKind::Polygon { vertices } => polygon_contains(vertices, z),
            DomainKind::MapDefined { generator: Some(g), .. } => polygon_contains(&g.vertices(), z),
            DomainKind::MapDefined { .. } => {
                let pts = self.boundary_samples(BOUNDARY_SAMPLES);
                winding(&pts, z.to_f64()) != 0
            }
        }
    }
}

pub(crate) fn winding(pts: &[(f64, f64)], z0: (f64, f64)) -> i64 {
    let mut total = 0.0;
    let n = pts.len();
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let a1 = (a.1 - z0.1).atan2(a.0 - z0.0);
        let b1 = (b.1 - z0.1).atan2(b.0 - z0.0);
        let mut d = b1 - a1;
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        total += d;
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i64
}

/// Signed shoelace area (positive for counterclockwise order).
pub fn polygon_signed_area(vertices: &[Complex], prec: Precision) -> Real {
    let n = vertices.len();
    let mut acc = prec.zero();
    for i in 0..n {
        let a = &vertices[i];
        let b = &vertices[(i + 1) % n];
        acc += Float::with_val(prec.bits(), &a.re * &b.im);
        acc -= Float::with_val(prec.bits(), &a.im * &b.re);
    }
    acc / 2u32
}

fn polygon_area_centroid(vertices: &[Complex], prec: Precision) -> Complex {
    let n = vertices.len();
    let bits = prec.bits();
    let (mut cx, mut cy) = (prec.zero(), prec.zero());
    let area = polygon_signed_area(vertices, prec);
    for i in 0..n {
        let a = &vertices[i];
        let b = &vertices[(i + 1) % n];
        let cross = Float::with_val(bits, &a.re * &b.im) - Float::with_val(bits, &a.im * &b.re);
        cx += Float::with_val(bits, &a.re + &b.re) * &cross;
        cy += Float::with_val(bits, &a.im + &b.im) * &cross;
    }
    let six_a = area * 6u32;
    Complex::new(cx / &six_a, cy / &six_a)
}

/// Even-odd point-in-polygon test (points on the boundary count as outside).
pub fn polygon_contains(vertices: &[Complex], z: &Complex) -> bool {
    let n = vertices.len();
    let mut inside = false;
    for i in 0..n {
        let a = &vertices[i];
        let b = &vertices[(i + 1) % n];
        if point_segment_distance(z, a, b) == 0.0 {
            return false;
        }
        let (ay, by) = (&a.im, &b.im);
        if (*ay > z.im) != (*by > z.im) {
            // x coordinate of the crossing
            let t = Float::with_val(z.prec(), &z.im - ay) / Float::with_val(z.prec(), by - ay);
            let x = Float::with_val(z.prec(), &b.re - &a.re) * t + &a.re;
            if z.re < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Euclidean distance from `z` to the segment `[a, b]` (f64 result).
pub fn point_segment_distance(z: &Complex, a: &Complex, b: &Complex) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    let rel = z - a;
    let t = if len2.is_zero() {
        Float::with_val(z.prec(), 0)
    } else {
        let dot = Float::with_val(z.prec(), &rel.re * &d.re) + Float::with_val(z.prec(), &rel.im * &d.im);
        (dot / len2).clamp(&0, &1)
    };
    let proj = a + &d.mul_real(&t);
    (z - &proj).abs_f64()
}

fn polygon_corners(vertices: &[Complex], prec: Precision) -> Result<Vec<Corner>, GeometryError> {
    let n = vertices.len();
    if n < 3 {
        return Err(GeometryError::InvalidPolygon("needs at least 3 vertices".into()));
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let prev = &vertices[(i + n - 1) % n];
        let cur = &vertices[i];
        let next = &vertices[(i + 1) % n];
        let e_in = cur - prev;
        let e_out = next - cur;
        if e_in.is_zero() || e_out.is_zero() {
            return Err(GeometryError::InvalidPolygon(format!("repeated vertex at index {i}")));
        }
        // turning angle arg(e_out / e_in), left turns positive
        let turn = (&e_out * &e_in.conj()).arg();
        let omega = prec.one() + turn / prec.pi();
        out.push(Corner {
            position: cur.clone(),
            omega,
        });
    }
    Ok(out)
}

fn validate_polygon(vertices: &[Complex], prec: Precision) -> Result<(), GeometryError> {
    let n = vertices.len();
    if n < 3 {
        return Err(GeometryError::InvalidPolygon("needs at least 3 vertices".into()));
    }
    for i in 0..n {
        for j in i + 1..n {
            if vertices[i] == vertices[j] {
                return Err(GeometryError::InvalidPolygon(format!("vertices {i} and {j} coincide")));
            }
        }
    }
    // non-adjacent edges must not meet
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_intersect(
                &vertices[i],
                &vertices[(i + 1) % n],
                &vertices[j],
                &vertices[(j + 1) % n],
            ) {
                return Err(GeometryError::InvalidPolygon(format!("edges {i} and {j} intersect")));
            }
        }
    }
    if !(polygon_signed_area(vertices, prec) > 0) {
        return Err(GeometryError::InvalidPolygon(
            "vertices must be in counterclockwise order".into(),
        ));
    }
    Ok(())
}

fn orient(a: &Complex, b: &Complex, c: &Complex) -> std::cmp::Ordering {
    let ab = b - a;
    let ac = c - a;
    let cross = Float::with_val(a.prec(), &ab.re * &ac.im) - Float::with_val(a.prec(), &ab.im * &ac.re);
    cross.partial_cmp(&0).unwrap_or(std::cmp::Ordering::Equal)
}

fn segments_intersect(p1: &Complex, p2: &Complex, q1: &Complex, q2: &Complex) -> bool {
    use std::cmp::Ordering::Equal;
    let o1 = orient(p1, p2, q1);
    let o2 = orient(p1, p2, q2);
    let o3 = orient(q1, q2, p1);
    let o4 = orient(q1, q2, p2);
    if o1 != o2 && o3 != o4 && o1 != Equal && o2 != Equal && o3 != Equal && o4 != Equal {
        return true;
    }
    let on = |a: &Complex, b: &Complex, c: &Complex| point_segment_distance(c, a, b) == 0.0;
    (o1 == Equal && on(p1, p2, q1))
        || (o2 == Equal && on(p1, p2, q2))
        || (o3 == Equal && on(q1, q2, p1))
        || (o4 == Equal && on(q1, q2, p2))
}

/// Area of the domain.
pub fn area(spec: &DomainSpec) -> Result<AreaValue, GeometryError> {
    let prec = spec.prec;
    let bits = prec.bits();
    match &spec.kind {
        DomainKind::Polygon { vertices } => Ok(AreaValue {
            value: polygon_signed_area(vertices, prec),
            truncation_bound: 0.0,
        }),
        DomainKind::MapDefined { generator: Some(g), .. } => {
            // exact: q R^2 sin(2 pi / q) / 2
            let q = g.sides();
            let r2 = Float::with_val(bits, g.circumradius() * g.circumradius());
            let s = (prec.pi() * 2u32 / q).sin();
            Ok(AreaValue {
                value: r2 * s * q / 2u32,
                truncation_bound: 0.0,
            })
        }
        DomainKind::MapDefined { psi, .. } => {
            // pi (|b|^2 - sum_{m>=1} m |b_m|^2)
            let mut acc = psi.leading().norm_sqr();
            let depth = psi.depth();
            let mut tail_terms: Vec<(f64, f64)> = Vec::new();
            for m in 1..=depth {
                let c = psi.coeff(-m).expect("within depth");
                if c.is_zero() {
                    continue;
                }
                acc -= c.norm_sqr() * m as u32;
                tail_terms.push((m as f64, c.abs_f64()));
            }
            let value = acc * prec.pi();
            if !(value > 0) {
                return Err(GeometryError::NonPositiveArea { value: value.to_f64() });
            }
            let truncation_bound = if psi.is_exact() {
                0.0
            } else {
                series_area_tail(&tail_terms, depth as f64) * std::f64::consts::PI
            };
            Ok(AreaValue {
                value,
                truncation_bound,
            })
        }
    }
}

/// Estimate `sum_{m > M} m |b_m|^2` from a power-law fit `|b_m| ~ C m^{-a}`
/// over the last decade of nonzero coefficients.
fn series_area_tail(terms: &[(f64, f64)], depth: f64) -> f64 {
    let tail: Vec<&(f64, f64)> = terms.iter().filter(|(m, _)| *m > depth / 10.0).collect();
    if tail.len() < 2 {
        return 0.0;
    }
    let n = tail.len() as f64;
    let (sx, sy, sxx, sxy) = tail.iter().fold((0.0, 0.0, 0.0, 0.0), |acc, (m, c)| {
        let (x, y) = (m.ln(), c.ln());
        (acc.0 + x, acc.1 + y, acc.2 + x * x, acc.3 + x * y)
    });
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let a = -slope;
    let logc = (sy - slope * sx) / n;
    if a <= 1.0 {
        return f64::INFINITY;
    }
    let c2 = (2.0 * logc).exp();
    // density correction: only a fraction of indices carry nonzero terms
    let density = n / (depth - depth / 10.0).max(1.0);
    density * c2 * depth.powf(2.0 - 2.0 * a) / (2.0 * a - 2.0)
}
