//! Structured text form of a domain (TOML). All numbers are decimal strings
//! so that high-precision values round-trip exactly.

use serde::{Deserialize, Serialize};

use super::{catalog_str, Corner, DomainKind, DomainSpec, RegularPolygonMap};
use crate::error::{Error, GeometryError, ParseError};
use crate::mp::{to_decimal, Complex, Precision};
use crate::series::{LaurentAtInfinity, SeriesRecord};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainConfig {
    Catalog {
        name: String,
        #[serde(default)]
        params: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reflection_factor_k: Option<String>,
    },
    Polygon {
        #[serde(default)]
        name: Option<String>,
        vertices: Vec<[String; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        known_capacity: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reflection_factor_k: Option<String>,
    },
    Map {
        #[serde(default)]
        name: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        series: Option<SeriesRecord>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generator: Option<GeneratorConfig>,
        #[serde(default)]
        corners: Vec<CornerConfig>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        known_capacity: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reflection_factor_k: Option<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    /// Only `"regular-polygon"` is understood.
    #[serde(rename = "type")]
    pub kind: String,
    pub sides: u32,
    pub side: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CornerConfig {
    pub position: [String; 2],
    pub omega: String,
}

fn cfg_err(msg: impl Into<String>) -> Error {
    ParseError::Config(msg.into()).into()
}

fn parse_k(k: &Option<String>) -> Result<Option<f64>, Error> {
    k.as_ref()
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| cfg_err(format!("reflection_factor_k {s:?}: {e}")))
        })
        .transpose()
}

impl DomainConfig {
    pub fn from_toml(text: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| cfg_err(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("domain config serializes")
    }

    /// Build the domain at precision `prec`.
    pub fn build(&self, prec: Precision) -> Result<DomainSpec, Error> {
        let spec = match self {
            DomainConfig::Catalog {
                name,
                params,
                reflection_factor_k,
            } => {
                let spec = catalog_str(name, params, prec)?;
                match parse_k(reflection_factor_k)? {
                    Some(k) => spec.with_reflection_factor(k)?,
                    None => spec,
                }
            }
            DomainConfig::Polygon {
                name,
                vertices,
                known_capacity,
                reflection_factor_k,
            } => {
                let verts = vertices
                    .iter()
                    .map(|[re, im]| prec.parse_complex(re, im))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut spec = DomainSpec::polygon(name.as_deref().unwrap_or("polygon"), verts, prec)?;
                if let Some(c) = known_capacity {
                    spec.known_capacity = Some(prec.parse(c)?);
                }
                spec.reflection_factor_k = parse_k(reflection_factor_k)?;
                spec.validate()?;
                spec
            }
            DomainConfig::Map {
                name,
                series,
                generator,
                corners,
                known_capacity,
                reflection_factor_k,
            } => {
                let name = name.as_deref().unwrap_or("map");
                let corners = corners
                    .iter()
                    .map(|c| {
                        Ok(Corner {
                            position: prec.parse_complex(&c.position[0], &c.position[1])?,
                            omega: prec.parse(&c.omega)?,
                        })
                    })
                    .collect::<Result<Vec<_>, ParseError>>()?;
                let (psi, gen) = match (series, generator) {
                    (_, Some(g)) => {
                        if g.kind != "regular-polygon" {
                            return Err(cfg_err(format!("unknown generator type {:?}", g.kind)));
                        }
                        let gen = RegularPolygonMap::new(g.sides, &prec.parse(&g.side)?, prec)?;
                        (gen.series(512), Some(gen))
                    }
                    (Some(rec), None) => {
                        let s = LaurentAtInfinity::from_record(rec)?;
                        // carry the coefficients at the run precision
                        let s = LaurentAtInfinity::new(
                            s.top_power(),
                            s.coefficients().iter().map(|c| c.with_prec(prec.bits())).collect(),
                            prec,
                            s.is_exact(),
                        );
                        (s, None)
                    }
                    (None, None) => return Err(cfg_err("map domain needs `series` or `generator`")),
                };
                let known_capacity = match known_capacity {
                    Some(c) => Some(prec.parse(c)?),
                    None => Some(match &gen {
                        Some(g) => g.capacity().clone(),
                        None => psi.leading().re.clone(),
                    }),
                };
                let spec = DomainSpec {
                    name: name.to_string(),
                    kind: DomainKind::MapDefined { psi, generator: gen },
                    corners,
                    known_capacity,
                    reflection_factor_k: parse_k(reflection_factor_k)?,
                    prec,
                };
                spec.validate()?;
                spec
            }
        };
        Ok(spec)
    }

    /// Full (non-catalog) description of a built domain.
    pub fn from_spec(spec: &DomainSpec) -> DomainConfig {
        let pair = |z: &Complex| [to_decimal(&z.re), to_decimal(&z.im)];
        let known_capacity = spec.known_capacity.as_ref().map(to_decimal);
        let reflection_factor_k = spec.reflection_factor_k.map(|k| format!("{k}"));
        match &spec.kind {
            DomainKind::Polygon { vertices } => DomainConfig::Polygon {
                name: Some(spec.name.clone()),
                vertices: vertices.iter().map(pair).collect(),
                known_capacity,
                reflection_factor_k,
            },
            DomainKind::MapDefined { psi, generator } => DomainConfig::Map {
                name: Some(spec.name.clone()),
                series: if generator.is_some() {
                    None
                } else {
                    Some(psi.to_record())
                },
                generator: generator.as_ref().map(|g| GeneratorConfig {
                    kind: "regular-polygon".into(),
                    sides: g.sides(),
                    side: to_decimal(g.side()),
                }),
                corners: spec
                    .corners
                    .iter()
                    .map(|c| CornerConfig {
                        position: pair(&c.position),
                        omega: to_decimal(&c.omega),
                    })
                    .collect(),
                known_capacity,
                reflection_factor_k,
            },
        }
    }
}

impl From<GeometryError> for ParseError {
    fn from(e: GeometryError) -> Self {
        ParseError::Config(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::catalog;

    #[test]
    fn round_trip_through_toml() {
        let p = Precision::digits(40);
        for (name, params) in [
            ("square", vec![1.0]),
            ("square-map", vec![1.0]),
            ("ellipse", vec![1.0, 0.25]),
            ("l-shape", vec![]),
        ] {
            let spec = catalog(name, &params, p).unwrap();
            let text = DomainConfig::from_spec(&spec).to_toml();
            let back = DomainConfig::from_toml(&text).unwrap().build(p).unwrap();
            assert_eq!(spec, back, "{name}");
        }
    }

    #[test]
    fn catalog_reference_with_k() {
        let text =
            "kind = \"catalog\"\nname = \"ellipse\"\nparams = [\"1\", \"0.25\"]\nreflection_factor_k = \"0.3\"\n";
        let spec = DomainConfig::from_toml(text)
            .unwrap()
            .build(Precision::digits(30))
            .unwrap();
        assert_eq!(spec.reflection_factor_k, Some(0.3));
        let bad = "kind = \"catalog\"\nname = \"ellipse\"\nparams = [\"1\", \"0.25\"]\nreflection_factor_k = \"1.5\"\n";
        assert!(DomainConfig::from_toml(bad)
            .unwrap()
            .build(Precision::digits(30))
            .is_err());
    }

    #[test]
    fn map_from_series_text() {
        let text = r#"
kind = "map"
name = "fourfold"
[series]
top_power = 1
coefficients = [["1", "0"], ["0", "0"], ["0", "0"], ["0", "0"], ["0.2", "0"]]
precision_digits = 30
exact = true
"#;
        let spec = DomainConfig::from_toml(text)
            .unwrap()
            .build(Precision::digits(30))
            .unwrap();
        assert_eq!(spec.laurent_coefficient(3).unwrap().re.to_f64(), 0.2);
        assert_eq!(spec.known_capacity.unwrap().to_f64(), 1.0);
    }
}
