//! Flat `key = value` experiment files and the textual surface syntax.
//!
//! Surfaces are written `kind[:key=value,...]`:
//!
//! - `sphere[:r=R]`
//! - `cylinder[:r=R,half_height=H]`
//! - `torus:big_r=R,r=r`
//! - `graph:field=quadratic,a=..,b=..,c=..,d=..,e=..,f=..,x0=..,x1=..,y0=..,y1=..`
//!   with `field` one of `quadratic`, `trig` (`amp`, `kx`, `ky`) or `cap` (`rho`);
//!   the domain defaults to the unit square.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use super::HarnessError;
use crate::surfaces::{AnalyticSurface, HeightField, Rect};

fn cfg(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

/// Parses the surface syntax described in the module docs.
pub fn parse_surface(spec: &str) -> Result<AnalyticSurface, HarnessError> {
    let (kind, rest) = spec.trim().split_once(':').unwrap_or((spec.trim(), ""));
    let mut params: BTreeMap<&str, &str> = BTreeMap::new();
    for kv in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| cfg(format!("surface parameter {kv:?} is not key=value")))?;
        params.insert(k.trim(), v.trim());
    }
    let num = |params: &mut BTreeMap<&str, &str>, key: &str, default: Option<f64>| -> Result<f64, HarnessError> {
        match params.remove(key) {
            Some(v) => v.parse().map_err(|_| cfg(format!("surface parameter {key} = {v:?} is not a number"))),
            None => default.ok_or_else(|| cfg(format!("surface parameter {key} is required"))),
        }
    };
    let surface = match kind {
        "sphere" => AnalyticSurface::Sphere {
            r: num(&mut params, "r", Some(1.0))?,
        },
        "cylinder" => AnalyticSurface::Cylinder {
            r: num(&mut params, "r", Some(1.0))?,
            half_height: num(&mut params, "half_height", Some(1.0))?,
        },
        "torus" => AnalyticSurface::Torus {
            big_r: num(&mut params, "big_r", None)?,
            r: num(&mut params, "r", None)?,
        },
        "graph" => {
            let field = params.remove("field").unwrap_or("quadratic");
            let h = match field {
                "quadratic" => HeightField::Quadratic {
                    a: num(&mut params, "a", Some(0.0))?,
                    b: num(&mut params, "b", Some(0.0))?,
                    c: num(&mut params, "c", Some(0.0))?,
                    d: num(&mut params, "d", Some(0.0))?,
                    e: num(&mut params, "e", Some(0.0))?,
                    f: num(&mut params, "f", Some(0.0))?,
                },
                "trig" => HeightField::Trig {
                    amp: num(&mut params, "amp", None)?,
                    kx: num(&mut params, "kx", None)?,
                    ky: num(&mut params, "ky", None)?,
                },
                "cap" => HeightField::SphericalCap {
                    rho: num(&mut params, "rho", None)?,
                },
                other => return Err(cfg(format!("unknown height field {other:?}"))),
            };
            let domain = Rect::new(
                num(&mut params, "x0", Some(0.0))?,
                num(&mut params, "x1", Some(1.0))?,
                num(&mut params, "y0", Some(0.0))?,
                num(&mut params, "y1", Some(1.0))?,
            );
            AnalyticSurface::Graph { h, domain }
        }
        other => return Err(cfg(format!("unknown surface kind {other:?}"))),
    };
    if let Some(k) = params.keys().next() {
        return Err(cfg(format!("unknown surface parameter {k:?} for {kind}")));
    }
    surface.validate()?;
    Ok(surface)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Converge,
    Counterexample,
    Certify,
    Energy,
    VerifyLemmas,
}

impl FromStr for ExperimentKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "converge" => Self::Converge,
            "counterexample" => Self::Counterexample,
            "certify" => Self::Certify,
            "energy" => Self::Energy,
            "verify-lemmas" => Self::VerifyLemmas,
            _ => return Err(cfg(format!("unknown experiment kind {s:?}"))),
        })
    }
}

/// Mesh family of a sweep and what its levels mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    /// Levels are subdivision levels.
    Icosphere,
    /// Levels are `j` with `ε = 2^-j`; the surface must be a graph.
    ThetaGrid { theta: f64 },
    /// Levels are `m` with `s = 2π/m`, at fixed `ε = 2^-j`.
    Counterexample { j: u32 },
    /// Levels are target covering radii `ε`.
    Protected { delta: f64 },
}

impl GeneratorKind {
    /// Whether levels must increase (otherwise decrease).
    fn increasing(&self) -> bool {
        !matches!(self, GeneratorKind::Protected { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub surface: Option<AnalyticSurface>,
    pub generator: Option<GeneratorKind>,
    pub levels: Vec<f64>,
    pub mesh: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub trials: usize,
    pub zeta: Option<f64>,
    pub protect: Option<f64>,
}

impl ExperimentSpec {
    /// Parses a config file. `#` starts a comment; keys may not repeat.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut map: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| HarnessError::Parse {
                line: i + 1,
                msg: "expected key = value".into(),
            })?;
            let k = k.trim().to_string();
            if map.insert(k.clone(), (i + 1, v.trim().to_string())).is_some() {
                return Err(HarnessError::Parse {
                    line: i + 1,
                    msg: format!("duplicate key {k:?}"),
                });
            }
        }
        let mut take = |key: &str| map.remove(key);
        let parse_at = |(line, v): (usize, String), what: &str| -> Result<f64, HarnessError> {
            v.parse().map_err(|_| HarnessError::Parse {
                line,
                msg: format!("{what} = {v:?} is not a number"),
            })
        };

        let kind: ExperimentKind = take("kind").ok_or_else(|| cfg("missing key kind"))?.1.parse()?;
        let surface = take("surface").map(|(_, v)| parse_surface(&v)).transpose()?;
        let theta = take("theta").map(|v| parse_at(v, "theta")).transpose()?;
        let j = take("j").map(|v| parse_at(v, "j")).transpose()?;
        let delta = take("delta").map(|v| parse_at(v, "delta")).transpose()?;
        let generator = match take("generator") {
            None if kind == ExperimentKind::Counterexample => Some(GeneratorKind::Counterexample {
                j: j.map_or(7, |j| j as u32),
            }),
            None => None,
            Some((line, g)) => Some(match g.as_str() {
                "icosphere" => GeneratorKind::Icosphere,
                "theta_grid" => GeneratorKind::ThetaGrid {
                    theta: theta.ok_or_else(|| cfg("theta_grid needs theta"))?,
                },
                "counterexample" => GeneratorKind::Counterexample {
                    j: j.map_or(7, |j| j as u32),
                },
                "protected" => GeneratorKind::Protected {
                    delta: delta.unwrap_or(0.5),
                },
                other => {
                    return Err(HarnessError::Parse {
                        line,
                        msg: format!("unknown generator {other:?}"),
                    })
                }
            }),
        };
        let levels = match take("levels") {
            None => Vec::new(),
            Some((line, v)) => v
                .split(',')
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(|s| parse_at((line, s.to_string()), "level"))
                .collect::<Result<_, _>>()?,
        };
        let seed = take("seed").map(|v| parse_at(v, "seed")).transpose()?.unwrap_or(0.0);
        let trials = take("trials").map(|v| parse_at(v, "trials")).transpose()?.unwrap_or(100.0);
        let zeta = take("zeta").map(|v| parse_at(v, "zeta")).transpose()?;
        let protect = take("protect").map(|v| parse_at(v, "protect")).transpose()?;
        let mesh = take("mesh").map(|(_, v)| PathBuf::from(v));
        let output = take("output").map(|(_, v)| PathBuf::from(v));
        if let Some((k, (line, _))) = map.into_iter().next() {
            return Err(HarnessError::Parse {
                line,
                msg: format!("unknown key {k:?}"),
            });
        }
        let spec = ExperimentSpec {
            kind,
            surface,
            generator,
            levels,
            mesh,
            output,
            seed: seed as u64,
            trials: trials as usize,
            zeta,
            protect,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        match self.kind {
            ExperimentKind::Converge | ExperimentKind::Counterexample => {
                let g = self.generator.ok_or_else(|| cfg("a sweep needs a generator"))?;
                if self.levels.is_empty() {
                    return Err(cfg("a sweep needs levels"));
                }
                let ordered = self.levels.windows(2).all(|w| {
                    if g.increasing() {
                        w[0] < w[1]
                    } else {
                        w[0] > w[1]
                    }
                });
                if !ordered {
                    return Err(cfg(if g.increasing() {
                        "levels must be strictly increasing"
                    } else {
                        "levels (eps) must be strictly decreasing"
                    }));
                }
                match g {
                    GeneratorKind::ThetaGrid { .. } if !matches!(self.surface, Some(AnalyticSurface::Graph { .. })) => {
                        return Err(cfg("theta_grid needs a graph surface"))
                    }
                    GeneratorKind::Protected { .. } if self.surface.is_none() => {
                        return Err(cfg("protected needs a surface"))
                    }
                    GeneratorKind::Icosphere | GeneratorKind::ThetaGrid { .. } | GeneratorKind::Counterexample { .. } => {
                        if self.levels.iter().any(|l| l.fract() != 0.0 || *l < 0.0) {
                            return Err(cfg("levels must be non-negative integers"));
                        }
                    }
                    GeneratorKind::Protected { .. } => {
                        if self.levels.iter().any(|l| !(*l > 0.0)) {
                            return Err(cfg("eps levels must be positive"));
                        }
                    }
                }
            }
            ExperimentKind::Certify => {
                if self.mesh.is_none() || self.surface.is_none() {
                    return Err(cfg("certify needs mesh and surface"));
                }
            }
            ExperimentKind::Energy => {
                if self.mesh.is_none() {
                    return Err(cfg("energy needs mesh"));
                }
            }
            ExperimentKind::VerifyLemmas => {}
        }
        Ok(())
    }
}
