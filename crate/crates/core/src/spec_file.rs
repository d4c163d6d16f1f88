//! The network-spec JSON file format.
//!
//! A spec file declares a network kind (`rbm`, `dbm` or `ffnn`), its
//! complex parameters as nested `[re, im]` arrays with 0/1 adjacency
//! masks, alphabets per layer, an optional lattice, an optional locality
//! radius `epsilon`, and optional per-neuron position overrides in lattice
//! units (half-integers allowed). See `docs/network_spec.md` for the full
//! schema.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::{Boundary, DoubledCoord, LatticeGeometry, LatticeKind};
use crate::neural::{
    Activation, DbmSpec, FeedForwardSpec, FfnnLayer, NetworkSpec, RbmSpec, WeightMatrix,
};
use crate::state::Alphabet;
use crate::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
pub struct SpecFile {
    pub kind: String,
    pub n_visible: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub alphabets: AlphabetsFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visible_bias: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_bias: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<Vec<u8>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shallow_bias: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deep_bias: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights_visible_shallow: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_visible_shallow: Option<Vec<Vec<u8>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights_shallow_deep: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_shallow_deep: Option<Vec<Vec<u8>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<Vec<LayerFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<PositionsFile>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LatticeFile {
    pub kind: LatticeKind,
    pub dims: Vec<usize>,
    pub boundary: Boundary,
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct AlphabetsFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visible: Option<Alphabet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden: Option<Alphabet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shallow: Option<Alphabet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deep: Option<Alphabet>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LayerFile {
    pub weights: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<Vec<u8>>>,
    pub biases: Vec<[f64; 2]>,
    pub activations: Vec<ActivationFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ActivationFile {
    Name(String),
    Polynomial { polynomial: Vec<[f64; 2]> },
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PositionsFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shallow: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deep: Option<Vec<Vec<f64>>>,
}

fn pair(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn complex_vec(field: &str, v: &Option<Vec<[f64; 2]>>, len: usize) -> Result<Vec<Complex64>> {
    match v {
        None => Ok(vec![Complex64::default(); len]),
        Some(v) => {
            if v.len() != len {
                return Err(Error::Format(format!(
                    "{field}: expected {len} entries, found {}",
                    v.len()
                )));
            }
            Ok(v.iter().copied().map(pair).collect())
        }
    }
}

fn weight_matrix(
    field: &str,
    weights: &Option<Vec<Vec<[f64; 2]>>>,
    mask: &Option<Vec<Vec<u8>>>,
    rows: usize,
    cols: usize,
) -> Result<WeightMatrix> {
    let weights = weights
        .as_ref()
        .ok_or_else(|| Error::Format(format!("{field}: missing weight matrix")))?;
    if weights.len() != rows || weights.iter().any(|r| r.len() != cols) {
        return Err(Error::Format(format!(
            "{field}: expected a {rows} x {cols} matrix"
        )));
    }
    let mut flat = Vec::with_capacity(rows * cols);
    for row in weights {
        flat.extend(row.iter().copied().map(pair));
    }
    let mask_flat: Vec<bool> = match mask {
        None => flat.iter().map(|w| *w != Complex64::default()).collect(),
        Some(m) => {
            if m.len() != rows || m.iter().any(|r| r.len() != cols) {
                return Err(Error::Format(format!(
                    "{field}.mask: expected a {rows} x {cols} matrix"
                )));
            }
            m.iter().flatten().map(|&b| b != 0).collect()
        }
    };
    WeightMatrix::new(rows, cols, flat, mask_flat)
        .map_err(|e| Error::Format(format!("{field}: {e}")))
}

fn positions(field: &str, raw: &Option<Vec<Vec<f64>>>) -> Result<Option<Vec<DoubledCoord>>> {
    let Some(raw) = raw else { return Ok(None) };
    let mut out = Vec::with_capacity(raw.len());
    for (i, p) in raw.iter().enumerate() {
        if p.is_empty() || p.len() > 2 {
            return Err(Error::Format(format!(
                "{field}[{i}]: positions are [x] or [x, y] in lattice units"
            )));
        }
        let mut coord = [0i64; 2];
        for (axis, &value) in p.iter().enumerate() {
            let doubled = value * 2.0;
            if (doubled - doubled.round()).abs() > 1e-9 {
                return Err(Error::Format(format!(
                    "{field}[{i}]: coordinate {value} is not a half-integer"
                )));
            }
            coord[axis] = doubled.round() as i64;
        }
        out.push(coord);
    }
    Ok(Some(out))
}

fn activation(field: &str, a: &ActivationFile) -> Result<Activation> {
    Ok(match a {
        ActivationFile::Name(name) => match name.as_str() {
            "cos" => Activation::Cos,
            "cosh" => Activation::Cosh,
            "exp" => Activation::Exp,
            "tanh" => Activation::Tanh,
            other => {
                return Err(Error::Config(format!(
                    "{field}: unknown activation {other:?} \
                     (allowed: cos, cosh, exp, tanh, polynomial)"
                )))
            }
        },
        ActivationFile::Polynomial { polynomial } => {
            Activation::Polynomial(polynomial.iter().copied().map(pair).collect())
        }
    })
}

/// Parses a spec file into a network and its optional lattice geometry.
pub fn parse_spec(json: &str) -> Result<(NetworkSpec, Option<LatticeGeometry>, Option<f64>)> {
    let file: SpecFile =
        serde_json::from_str(json).map_err(|e| Error::Format(format!("spec json: {e}")))?;
    let geometry = file
        .lattice
        .as_ref()
        .map(|l| LatticeGeometry::from_parts(l.kind, &l.dims, l.boundary))
        .transpose()?;
    let n = file.n_visible;
    if n == 0 {
        return Err(Error::Format("n_visible: must be positive".into()));
    }
    let visible_alphabet = file.alphabets.visible.unwrap_or(Alphabet::PlusMinus);
    let spec = match file.kind.as_str() {
        "rbm" => {
            let hidden_bias = file
                .hidden_bias
                .as_ref()
                .ok_or_else(|| Error::Format("hidden_bias: required for rbm".into()))?;
            let m = hidden_bias.len();
            let mut spec = RbmSpec::new(
                complex_vec("visible_bias", &file.visible_bias, n)?,
                complex_vec("hidden_bias", &file.hidden_bias, m)?,
                weight_matrix("weights", &file.weights, &file.mask, n, m)?,
                visible_alphabet,
                file.alphabets.hidden.unwrap_or(Alphabet::PlusMinus),
            )?;
            if let Some(p) = &file.positions {
                if let Some(coords) = positions("positions.hidden", &p.hidden)? {
                    spec = spec.with_hidden_positions(coords);
                }
            }
            NetworkSpec::Rbm(spec)
        }
        "dbm" => {
            let shallow = file
                .shallow_bias
                .as_ref()
                .ok_or_else(|| Error::Format("shallow_bias: required for dbm".into()))?
                .len();
            let deep = file
                .deep_bias
                .as_ref()
                .ok_or_else(|| Error::Format("deep_bias: required for dbm".into()))?
                .len();
            let mut spec = DbmSpec::new(
                complex_vec("visible_bias", &file.visible_bias, n)?,
                complex_vec("shallow_bias", &file.shallow_bias, shallow)?,
                complex_vec("deep_bias", &file.deep_bias, deep)?,
                weight_matrix(
                    "weights_visible_shallow",
                    &file.weights_visible_shallow,
                    &file.mask_visible_shallow,
                    n,
                    shallow,
                )?,
                weight_matrix(
                    "weights_shallow_deep",
                    &file.weights_shallow_deep,
                    &file.mask_shallow_deep,
                    shallow,
                    deep,
                )?,
                visible_alphabet,
                file.alphabets.shallow.unwrap_or(Alphabet::ZeroOne),
                file.alphabets.deep.unwrap_or(Alphabet::ZeroOne),
            )?;
            if let Some(p) = &file.positions {
                if let Some(coords) = positions("positions.shallow", &p.shallow)? {
                    spec = spec.with_shallow_positions(coords);
                }
                if let Some(coords) = positions("positions.deep", &p.deep)? {
                    spec = spec.with_deep_positions(coords);
                }
            }
            NetworkSpec::Dbm(spec)
        }
        "ffnn" => {
            let layers_file = file
                .layers
                .as_ref()
                .ok_or_else(|| Error::Format("layers: required for ffnn".into()))?;
            let mut prev = n;
            let mut layers = Vec::with_capacity(layers_file.len());
            for (li, layer) in layers_file.iter().enumerate() {
                let cols = layer.biases.len();
                let weights = weight_matrix(
                    &format!("layers[{li}].weights"),
                    &Some(layer.weights.clone()),
                    &layer.mask,
                    prev,
                    cols,
                )?;
                let activations = layer
                    .activations
                    .iter()
                    .map(|a| activation(&format!("layers[{li}].activations"), a))
                    .collect::<Result<Vec<_>>>()?;
                layers.push(FfnnLayer {
                    weights,
                    biases: layer.biases.iter().copied().map(pair).collect(),
                    activations,
                });
                prev = cols;
            }
            NetworkSpec::Ffnn(FeedForwardSpec::new(n, layers, visible_alphabet)?)
        }
        other => {
            return Err(Error::Format(format!(
                "kind: {other:?} is not one of rbm, dbm, ffnn"
            )))
        }
    };
    Ok((spec, geometry, file.epsilon))
}

pub fn read_spec(path: &Path) -> Result<(NetworkSpec, Option<LatticeGeometry>, Option<f64>)> {
    parse_spec(&std::fs::read_to_string(path)?)
}
