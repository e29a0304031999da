//! JSON measure specs.
//!
//! ```json
//! {"type":"discrete","dim":1,"atoms":[{"x":[1.0],"w":[0.0,1.0]}]}
//! {"type":"grid","dim":1,"origin":[-8.0],"spacing":[0.015625],"shape":[1024],"density":[[1.0,0.0], ...]}
//! {"type":"phi_delta","dim":1,"m":2,"delta":0.5,"moments":[{"beta":[0],"value":[1.0,0.0]}, ...]}
//! {"type":"gaussian","dim":1,"mean":[0.0],"cov":[[1.0]],"weight":[1.0,0.0]}
//! ```
//!
//! Complex numbers are `[re, im]`. Unknown fields are rejected. Parse errors
//! carry the path of the offending field, e.g. `atoms[0].w`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::counterexample::PhiDeltaFamily;
use crate::measure::{Atom, ComplexMeasure, DiscreteMeasure, Gaussian, GridDensity, GridSpec, MomentSpec};
use crate::multiindex::MultiIndex;
use crate::C64;

#[derive(Debug, thiserror::Error)]
#[error("{field}: {message}")]
pub struct SpecError {
    pub field: String,
    pub message: String,
}

impl SpecError {
    fn new(field: impl Into<String>, message: impl ToString) -> Self {
        Self {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

type SpecResult<T> = std::result::Result<T, SpecError>;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomRaw {
    x: Vec<f64>,
    w: [f64; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiscreteRaw {
    #[serde(rename = "type")]
    kind: String,
    dim: usize,
    atoms: Vec<AtomRaw>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridRaw {
    #[serde(rename = "type")]
    kind: String,
    dim: usize,
    origin: Vec<f64>,
    spacing: Vec<f64>,
    shape: Vec<usize>,
    density: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MomentRaw {
    beta: Vec<u32>,
    value: [f64; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhiDeltaRaw {
    #[serde(rename = "type")]
    kind: String,
    dim: usize,
    m: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    moments: Vec<MomentRaw>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianRaw {
    #[serde(rename = "type")]
    kind: String,
    dim: usize,
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
    weight: [f64; 2],
}

/// A parsed spec. `PhiDelta` keeps `delta` optional so the same schema serves
/// as a moment-spec file.
#[derive(Clone, Debug)]
pub enum MeasureSpec {
    Discrete(DiscreteMeasure),
    Grid(GridDensity),
    PhiDelta { moments: MomentSpec, delta: Option<f64> },
    Gaussian(Gaussian),
}

impl MeasureSpec {
    pub fn dim(&self) -> usize {
        match self {
            Self::Discrete(d) => d.dim(),
            Self::Grid(g) => g.dim(),
            Self::PhiDelta { moments, .. } => moments.dim(),
            Self::Gaussian(g) => g.mean().len(),
        }
    }

    pub fn into_measure(self) -> crate::Result<ComplexMeasure> {
        match self {
            Self::Discrete(d) => Ok(d.into()),
            Self::Grid(g) => Ok(g.into()),
            Self::PhiDelta { moments, delta } => {
                let delta = delta.ok_or_else(|| {
                    crate::Error::InvalidParameter("delta: required to build a measure".into())
                })?;
                PhiDeltaFamily::new(moments, delta)?.make_measure()
            }
            Self::Gaussian(g) => g.into_measure(),
        }
    }
}

impl From<&PhiDeltaFamily> for MeasureSpec {
    fn from(fam: &PhiDeltaFamily) -> Self {
        Self::PhiDelta {
            moments: fam.moments().clone(),
            delta: Some(fam.delta()),
        }
    }
}

fn complex(v: [f64; 2]) -> C64 {
    C64::new(v[0], v[1])
}

fn pair(c: C64) -> [f64; 2] {
    [c.re, c.im]
}

fn typed<T: DeserializeOwned>(value: serde_json::Value) -> SpecResult<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { "spec".to_string() } else { path };
        SpecError::new(field, e.into_inner())
    })
}

fn check_len(field: &str, dim: usize, got: usize) -> SpecResult<()> {
    if got == dim {
        Ok(())
    } else {
        Err(SpecError::new(field, format!("expected {dim} entries, got {got}")))
    }
}

pub fn parse_spec(text: &str) -> SpecResult<MeasureSpec> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| SpecError::new("spec", format!("invalid JSON: {e}")))?;
    let kind = value
        .get("type")
        .ok_or_else(|| SpecError::new("type", "missing"))?
        .as_str()
        .ok_or_else(|| SpecError::new("type", "expected a string"))?
        .to_owned();
    match kind.as_str() {
        "discrete" => {
            let raw: DiscreteRaw = typed(value)?;
            let mut atoms = Vec::with_capacity(raw.atoms.len());
            for (k, a) in raw.atoms.into_iter().enumerate() {
                check_len(&format!("atoms[{k}].x"), raw.dim, a.x.len())?;
                atoms.push(Atom {
                    x: a.x,
                    w: complex(a.w),
                });
            }
            DiscreteMeasure::new(raw.dim, atoms)
                .map(MeasureSpec::Discrete)
                .map_err(|e| SpecError::new("dim", e))
        }
        "grid" => {
            let raw: GridRaw = typed(value)?;
            check_len("origin", raw.dim, raw.origin.len())?;
            check_len("spacing", raw.dim, raw.spacing.len())?;
            check_len("shape", raw.dim, raw.shape.len())?;
            let grid = GridSpec::new(raw.origin, raw.spacing, raw.shape).map_err(|e| SpecError::new("spacing", e))?;
            check_len("density", grid.len(), raw.density.len())?;
            let density = raw.density.into_iter().map(complex).collect();
            GridDensity::new(grid, density)
                .map(MeasureSpec::Grid)
                .map_err(|e| SpecError::new("density", e))
        }
        "phi_delta" => {
            let raw: PhiDeltaRaw = typed(value)?;
            let mut values = BTreeMap::new();
            for (k, entry) in raw.moments.into_iter().enumerate() {
                let field = format!("moments[{k}].beta");
                check_len(&field, raw.dim, entry.beta.len())?;
                let beta = MultiIndex::new(entry.beta).map_err(|e| SpecError::new(&field, e))?;
                if beta.order() > raw.m {
                    return Err(SpecError::new(field, format!("order {} exceeds m = {}", beta.order(), raw.m)));
                }
                if values.insert(beta.clone(), complex(entry.value)).is_some() {
                    return Err(SpecError::new(field, format!("duplicate beta={beta}")));
                }
            }
            let moments = MomentSpec::new(raw.dim, raw.m, values).map_err(|e| SpecError::new("moments", e))?;
            if let Some(delta) = raw.delta {
                if !(delta >= 0.0 && delta.is_finite()) {
                    return Err(SpecError::new("delta", format!("must be finite and ≥ 0, got {delta}")));
                }
            }
            if raw.m < 2 {
                return Err(SpecError::new("m", format!("must be ≥ 2, got {}", raw.m)));
            }
            Ok(MeasureSpec::PhiDelta {
                moments,
                delta: raw.delta,
            })
        }
        "gaussian" => {
            let raw: GaussianRaw = typed(value)?;
            check_len("mean", raw.dim, raw.mean.len())?;
            check_len("cov", raw.dim, raw.cov.len())?;
            for (k, row) in raw.cov.iter().enumerate() {
                check_len(&format!("cov[{k}]"), raw.dim, row.len())?;
            }
            Gaussian::new(raw.mean, raw.cov, complex(raw.weight))
                .map(MeasureSpec::Gaussian)
                .map_err(|e| SpecError::new("cov", e))
        }
        other => Err(SpecError::new(
            "type",
            format!("unknown variant `{other}`, expected one of discrete, grid, phi_delta, gaussian"),
        )),
    }
}

pub fn load_spec(path: &Path) -> SpecResult<MeasureSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SpecError::new("spec", format!("cannot read {}: {e}", path.display())))?;
    parse_spec(&text)
}

pub fn to_json(spec: &MeasureSpec) -> String {
    let value = match spec {
        MeasureSpec::Discrete(d) => serde_json::to_value(DiscreteRaw {
            kind: "discrete".into(),
            dim: d.dim(),
            atoms: d
                .atoms()
                .iter()
                .map(|a| AtomRaw {
                    x: a.x.clone(),
                    w: pair(a.w),
                })
                .collect(),
        }),
        MeasureSpec::Grid(g) => serde_json::to_value(GridRaw {
            kind: "grid".into(),
            dim: g.dim(),
            origin: g.grid().origin.clone(),
            spacing: g.grid().spacing.clone(),
            shape: g.grid().shape.clone(),
            density: g.density().iter().map(|&c| pair(c)).collect(),
        }),
        MeasureSpec::PhiDelta { moments, delta } => serde_json::to_value(PhiDeltaRaw {
            kind: "phi_delta".into(),
            dim: moments.dim(),
            m: moments.order(),
            delta: *delta,
            moments: moments
                .iter()
                .map(|(b, v)| MomentRaw {
                    beta: b.entries().to_vec(),
                    value: pair(v),
                })
                .collect(),
        }),
        MeasureSpec::Gaussian(g) => serde_json::to_value(GaussianRaw {
            kind: "gaussian".into(),
            dim: g.mean().len(),
            mean: g.mean().to_vec(),
            cov: g.cov().to_vec(),
            weight: pair(g.weight()),
        }),
    };
    value.expect("plain data serializes").to_string()
}
