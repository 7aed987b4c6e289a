//! Surface specifications: `kind:key=value,...` shorthand or JSON files.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use minsurf::chart::{Chart, ExprChart};
use minsurf::congruence::SurfaceInput;
use minsurf::families::{self, Degree6Coeffs, FamilySurface};
use minsurf::weierstrass::{chart_real, WeierstrassPair};
use minsurf::C64;
use serde::{Deserialize, Serialize};

/// One surface source. JSON form is externally tagged, e.g.
/// `{"family": {"name": "r1", "params": {"a1": 1, "i1": 500}}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceSpec {
    Weierstrass {
        f: String,
        g: String,
        #[serde(default)]
        z0: [f64; 2],
    },
    Family {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
        /// Coefficients for `degree6`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coeffs: Option<Degree6Coeffs>,
    },
    Chart {
        x: String,
        y: String,
        z: String,
    },
}

/// A resolved surface.
pub enum Surface {
    Pair(WeierstrassPair),
    Family(FamilySurface),
    Expr(ExprChart),
}

impl Surface {
    pub fn chart(&self) -> Arc<dyn Chart> {
        match self {
            Surface::Pair(p) => Arc::new(chart_real(p)),
            Surface::Family(s) => Arc::new(s.chart()),
            Surface::Expr(c) => Arc::new(c.clone()),
        }
    }

    pub fn input(&self) -> SurfaceInput {
        match self {
            Surface::Pair(p) => SurfaceInput::Pair(p.clone()),
            _ => SurfaceInput::Chart(self.chart(), (0.0, 0.0)),
        }
    }

    pub fn family(&self) -> Option<&FamilySurface> {
        match self {
            Surface::Family(s) => Some(s),
            _ => None,
        }
    }
}

/// Split `a=1,f=exp(z),g=z^2` on commas that start a new `key=` item.
fn key_values(body: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = vec![];
    for piece in body.split(',') {
        match piece.split_once('=') {
            Some((k, v)) if !k.is_empty() && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') => {
                out.push((k.trim().to_string(), v.trim().to_string()))
            }
            _ => match out.last_mut() {
                Some((_, v)) => {
                    v.push(',');
                    v.push_str(piece);
                }
                None if piece.trim().is_empty() => {}
                None => bail!("expected key=value, got `{piece}`"),
            },
        }
    }
    Ok(out)
}

fn parse_complex(s: &str) -> Result<C64> {
    let e = minsurf::analytic::parse(s).map_err(|e| anyhow!("{e}"))?;
    e.eval(C64::new(0.0, 0.0)).map(|j| j.value).map_err(|e| anyhow!("{e}"))
}

impl SurfaceSpec {
    /// Parse shorthand (`r1:a1=1,i1=500`, `weierstrass:f=1,g=z`,
    /// `chart:x=u,y=v,z=0`) or read a JSON file (`@path` or `*.json`).
    pub fn parse(text: &str) -> Result<Self> {
        let path = text.strip_prefix('@').or_else(|| text.ends_with(".json").then_some(text));
        if let Some(path) = path {
            return Self::from_file(Path::new(path));
        }
        let (kind, body) = text.split_once(':').unwrap_or((text, ""));
        let kv = key_values(body)?;
        let get = |k: &str| kv.iter().find(|(key, _)| key == k).map(|(_, v)| v.clone());
        match kind {
            "weierstrass" | "w" => {
                let z0 = get("z0").map(|s| parse_complex(&s)).transpose()?.unwrap_or_default();
                Ok(SurfaceSpec::Weierstrass {
                    f: get("f").context("weierstrass spec needs f=")?,
                    g: get("g").context("weierstrass spec needs g=")?,
                    z0: [z0.re, z0.im],
                })
            }
            "chart" => Ok(SurfaceSpec::Chart {
                x: get("x").context("chart spec needs x=")?,
                y: get("y").context("chart spec needs y=")?,
                z: get("z").context("chart spec needs z=")?,
            }),
            "degree6" => {
                let file = get("file").context("degree6 spec needs file=<coefficients.json>")?;
                let text = std::fs::read_to_string(&file).with_context(|| format!("reading {file}"))?;
                let coeffs: Degree6Coeffs = serde_json::from_str(&text).with_context(|| format!("parsing {file}"))?;
                Ok(SurfaceSpec::Family { name: "degree6".into(), params: BTreeMap::new(), coeffs: Some(coeffs) })
            }
            name => {
                let mut params = BTreeMap::new();
                for (k, v) in &kv {
                    let x = minsurf::analytic::parse(v)
                        .and_then(|e| e.eval(C64::new(0.0, 0.0)).map(|j| j.value))
                        .map_err(|e| anyhow!("parameter {k}: {e}"))?;
                    if x.im != 0.0 {
                        bail!("parameter {k} must be real");
                    }
                    params.insert(k.clone(), x.re);
                }
                Ok(SurfaceSpec::Family { name: name.to_string(), params, coeffs: None })
            }
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn resolve(&self) -> Result<Surface> {
        match self {
            SurfaceSpec::Weierstrass { f, g, z0 } => {
                let p = WeierstrassPair::parse(f, g, C64::new(z0[0], z0[1])).map_err(|e| anyhow!("{e}"))?;
                p.validate().map_err(|e| anyhow!("{e}"))?;
                Ok(Surface::Pair(p))
            }
            SurfaceSpec::Chart { x, y, z } => {
                Ok(Surface::Expr(ExprChart::parse([x.as_str(), y.as_str(), z.as_str()]).map_err(|e| anyhow!("{e}"))?))
            }
            SurfaceSpec::Family { name, params, coeffs } => {
                let p = |k: &str| params.get(k).copied().ok_or_else(|| anyhow!("family {name} needs parameter {k}"));
                let p0 = |k: &str| params.get(k).copied().unwrap_or(0.0);
                check_family_params(name, params)?;
                let s = match name.as_str() {
                    "r1" => families::r1(p("a1")?, p("i1")?),
                    "r2" => families::r2(p("a2")?, p("i2")?),
                    "assoc" => families::assoc_family(p("a1")?, p("i1")?, p0("t")),
                    "s" => families::s_family(p0("a1"), p0("a2"), p0("c3"), p0("d3")),
                    "s1" => families::s1(p("a1")?, p("c3")?),
                    "s2" => families::s2(p("a2")?, p("d3")?),
                    "degree6" => {
                        let c = coeffs.ok_or_else(|| anyhow!("degree6 needs coefficients"))?;
                        FamilySurface::from_coeffs("degree6", c)
                    }
                    other => bail!("unknown surface kind `{other}` (expected weierstrass, chart, r1, r2, assoc, s, s1, s2, degree6)"),
                };
                Ok(Surface::Family(s))
            }
        }
    }
}

fn check_family_params(name: &str, params: &BTreeMap<String, f64>) -> Result<()> {
    let allowed: &[&str] = match name {
        "r1" => &["a1", "i1"],
        "assoc" => &["a1", "i1", "t"],
        "r2" => &["a2", "i2"],
        "s" => &["a1", "a2", "c3", "d3"],
        "s1" => &["a1", "c3"],
        "s2" => &["a2", "d3"],
        _ => &[],
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        bail!("family {name} has no parameter {k}");
    }
    if name == "assoc" && params.get("a1").copied().unwrap_or(0.0) * params.get("i1").copied().unwrap_or(0.0) == 0.0 {
        bail!("assoc needs a1*i1 != 0");
    }
    let get = |k: &str| params.get(k).copied().unwrap_or(0.0);
    if matches!(name, "s" | "s1" | "s2") && get("a1").hypot(get("a2")) == 0.0 {
        bail!("{name} needs a1^2 + a2^2 > 0");
    }
    if let Some((k, _)) = params.iter().find(|(_, v)| !v.is_finite()) {
        bail!("parameter {k} is not finite");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthand_forms() {
        assert_eq!(
            SurfaceSpec::parse("r1:a1=1,i1=500").unwrap(),
            SurfaceSpec::Family { name: "r1".into(), params: [("a1".into(), 1.0), ("i1".into(), 500.0)].into(), coeffs: None }
        );
        match SurfaceSpec::parse("weierstrass:f=exp(z),g=exp(-z),z0=1+i").unwrap() {
            SurfaceSpec::Weierstrass { f, g, z0 } => {
                assert_eq!((f.as_str(), g.as_str(), z0), ("exp(z)", "exp(-z)", [1.0, 1.0]));
            }
            other => panic!("{other:?}"),
        }
        assert!(SurfaceSpec::parse("r1:a1=1").unwrap().resolve().is_err());
        assert!(SurfaceSpec::parse("s1:a1=1,x=2").unwrap().resolve().is_err());
        assert!(SurfaceSpec::parse("assoc:a1=1,i1=500,t=pi/2").unwrap().resolve().is_ok());
    }

    #[test]
    fn json_round_trip() {
        let s = SurfaceSpec::Chart { x: "u".into(), y: "v".into(), z: "u^2".into() };
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<SurfaceSpec>(&text).unwrap(), s);
    }
}
