//! Complex-weight neural-network states: restricted Boltzmann machines,
//! feed-forward networks, and two-hidden-layer deep Boltzmann machines.
//!
//! Amplitudes follow the tracing-out convention: hidden layers with a
//! closed-form sum are factorized analytically (`Gamma` factors per hidden
//! unit), while the deep layer of a DBM is summed by exact brute force.
//! Exponents are accumulated in log space with a global max-subtraction
//! when a full dense vector is materialized, so large weights do not
//! overflow before normalization.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::geometry::DoubledCoord;
use crate::quasi_product::{ClusterCover, LocalCluster};
use crate::state::{check_site_budget, Alphabet, Bipartition, DenseState, SpinConfiguration};
use crate::{Error, Result, DEFAULT_MAX_DEEP};

// ---------------------------------------------------------------------------
// masked weights
// ---------------------------------------------------------------------------

/// Complex weights between two layers with an explicit adjacency mask.
/// Rows index the lower (input-side) layer, columns the upper layer.
/// Masked-out entries are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    rows: usize,
    cols: usize,
    weights: Vec<Complex64>,
    mask: Vec<bool>,
}

impl WeightMatrix {
    pub fn new(rows: usize, cols: usize, weights: Vec<Complex64>, mask: Vec<bool>) -> Result<Self> {
        if weights.len() != rows * cols || mask.len() != rows * cols {
            return Err(Error::Input(format!(
                "weight matrix needs {rows} x {cols} = {} entries",
                rows * cols
            )));
        }
        for (k, (w, m)) in weights.iter().zip(&mask).enumerate() {
            if !m && *w != Complex64::default() {
                return Err(Error::Config(format!(
                    "masked-out weight at flat index {k} is {w}, must be exactly zero"
                )));
            }
        }
        Ok(Self {
            rows,
            cols,
            weights,
            mask,
        })
    }

    /// Dense matrix; the mask marks exact zeros as absent connections
    /// ("when weights are zero there is no connection").
    pub fn dense(rows: usize, cols: usize, weights: Vec<Complex64>) -> Result<Self> {
        let mask = weights.iter().map(|w| *w != Complex64::default()).collect();
        Self::new(rows, cols, weights, mask)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.weights[row * self.cols + col]
    }

    #[inline]
    pub fn connected(&self, row: usize, col: usize) -> bool {
        self.mask[row * self.cols + col]
    }

    /// Connected rows of one column, ascending.
    pub fn column_inputs(&self, col: usize) -> Vec<(usize, Complex64)> {
        (0..self.rows)
            .filter(|&r| self.connected(r, col))
            .map(|r| (r, self.get(r, col)))
            .collect()
    }

    /// Connected columns of one row, ascending.
    pub fn row_outputs(&self, row: usize) -> Vec<(usize, Complex64)> {
        (0..self.cols)
            .filter(|&c| self.connected(row, c))
            .map(|c| (c, self.get(row, c)))
            .collect()
    }

    pub fn connections(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.connected(r, c) {
                    out.push((r, c));
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// stable log factors
// ---------------------------------------------------------------------------

/// `ln(2 cosh z)` without overflow; `None` when the factor is exactly zero.
pub(crate) fn ln_two_cosh(z: Complex64) -> Option<Complex64> {
    let z = if z.re >= 0.0 { z } else { -z };
    let tail = Complex64::new(1.0, 0.0) + (-2.0 * z).exp();
    if tail == Complex64::default() {
        return None;
    }
    Some(z + tail.ln())
}

/// `ln(1 + e^z)` without overflow; `None` when the factor is exactly zero.
pub(crate) fn ln_one_plus_exp(z: Complex64) -> Option<Complex64> {
    if z.re > 0.0 {
        let tail = Complex64::new(1.0, 0.0) + (-z).exp();
        if tail == Complex64::default() {
            return None;
        }
        Some(z + tail.ln())
    } else {
        let tail = Complex64::new(1.0, 0.0) + z.exp();
        if tail == Complex64::default() {
            return None;
        }
        Some(tail.ln())
    }
}

/// `ln Gamma(z)` for a traced-out hidden unit of the given alphabet:
/// `Gamma = 2 cosh z` for ±1 units, `Gamma = 1 + e^z` for {0,1} units.
pub(crate) fn ln_gamma(alphabet: Alphabet, z: Complex64) -> Option<Complex64> {
    match alphabet {
        Alphabet::PlusMinus => ln_two_cosh(z),
        Alphabet::ZeroOne => ln_one_plus_exp(z),
    }
}

fn gamma(alphabet: Alphabet, z: Complex64) -> Complex64 {
    ln_gamma(alphabet, z)
        .map(Complex64::exp)
        .unwrap_or_default()
}

/// Materializes a log-amplitude function as a dense state, subtracting the
/// global max real part before exponentiation. The result differs from the
/// literal amplitudes by the positive factor `e^{-max}`, which drops out
/// after normalization.
fn evaluate_log_amplitudes<F>(
    n_sites: usize,
    alphabet: Alphabet,
    max_sites: usize,
    log_amp: F,
) -> Result<DenseState>
where
    F: Fn(&SpinConfiguration) -> Option<Complex64> + Sync,
{
    check_site_budget(n_sites, max_sites)?;
    let len = 1usize << n_sites;
    let logs: Vec<Option<Complex64>> = (0..len)
        .into_par_iter()
        .with_min_len(64)
        .map(|i| {
            let cfg =
                SpinConfiguration::from_index(n_sites, i as u64, alphabet).expect("index in range");
            log_amp(&cfg)
        })
        .collect();
    let max_re = logs
        .iter()
        .flatten()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let amplitudes = logs
        .into_iter()
        .map(|z| match z {
            Some(z) if max_re.is_finite() => (z - max_re).exp(),
            _ => Complex64::default(),
        })
        .collect();
    DenseState::new(n_sites, amplitudes)
}

// ---------------------------------------------------------------------------
// restricted Boltzmann machine
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct RbmSpec {
    visible_bias: Vec<Complex64>,
    hidden_bias: Vec<Complex64>,
    weights: WeightMatrix,
    visible_alphabet: Alphabet,
    hidden_alphabet: Alphabet,
    hidden_positions: Option<Vec<DoubledCoord>>,
}

impl RbmSpec {
    pub fn new(
        visible_bias: Vec<Complex64>,
        hidden_bias: Vec<Complex64>,
        weights: WeightMatrix,
        visible_alphabet: Alphabet,
        hidden_alphabet: Alphabet,
    ) -> Result<Self> {
        if weights.rows() != visible_bias.len() || weights.cols() != hidden_bias.len() {
            return Err(Error::Input(format!(
                "weights are {} x {} but biases have {} visible / {} hidden entries",
                weights.rows(),
                weights.cols(),
                visible_bias.len(),
                hidden_bias.len()
            )));
        }
        if visible_bias.is_empty() {
            return Err(Error::Input("RBM needs at least one visible neuron".into()));
        }
        Ok(Self {
            visible_bias,
            hidden_bias,
            weights,
            visible_alphabet,
            hidden_alphabet,
            hidden_positions: None,
        })
    }

    pub fn with_hidden_positions(mut self, positions: Vec<DoubledCoord>) -> Self {
        self.hidden_positions = Some(positions);
        self
    }

    pub fn n_visible(&self) -> usize {
        self.visible_bias.len()
    }

    pub fn n_hidden(&self) -> usize {
        self.hidden_bias.len()
    }

    pub fn visible_bias(&self) -> &[Complex64] {
        &self.visible_bias
    }

    pub fn hidden_bias(&self) -> &[Complex64] {
        &self.hidden_bias
    }

    pub fn weights(&self) -> &WeightMatrix {
        &self.weights
    }

    pub fn visible_alphabet(&self) -> Alphabet {
        self.visible_alphabet
    }

    pub fn hidden_alphabet(&self) -> Alphabet {
        self.hidden_alphabet
    }

    pub fn hidden_positions(&self) -> Option<&[DoubledCoord]> {
        self.hidden_positions.as_deref()
    }

    fn check_config(&self, v: &SpinConfiguration) -> Result<()> {
        if v.n_sites() != self.n_visible() {
            return Err(Error::Input(format!(
                "configuration has {} sites, RBM has {} visible neurons",
                v.n_sites(),
                self.n_visible()
            )));
        }
        if v.alphabet() != self.visible_alphabet {
            return Err(Error::Input(
                "configuration alphabet does not match RBM".into(),
            ));
        }
        Ok(())
    }

    /// `e^{sum_i a_i v_i} prod_j Gamma_j(b_j + sum_i W_ij v_i)`.
    pub fn amplitude(&self, v: &SpinConfiguration) -> Result<Complex64> {
        self.check_config(v)?;
        Ok(match self.log_amplitude_unchecked(v) {
            Some(log) => log.exp(),
            None => Complex64::default(),
        })
    }

    /// Complex log of the amplitude; `None` when some factor is exactly zero.
    pub fn log_amplitude(&self, v: &SpinConfiguration) -> Result<Option<Complex64>> {
        self.check_config(v)?;
        Ok(self.log_amplitude_unchecked(v))
    }

    fn log_amplitude_unchecked(&self, v: &SpinConfiguration) -> Option<Complex64> {
        let mut log = Complex64::default();
        for (i, a) in self.visible_bias.iter().enumerate() {
            log += a * v.value(i);
        }
        for (j, b) in self.hidden_bias.iter().enumerate() {
            let mut z = *b;
            for (i, w) in self.weights.column_inputs(j) {
                z += w * v.value(i);
            }
            log += ln_gamma(self.hidden_alphabet, z)?;
        }
        Some(log)
    }

    /// Dense state over all visible configurations (unnormalized, scaled by
    /// `e^{-max}` for stability).
    pub fn evaluate(&self, max_sites: usize) -> Result<DenseState> {
        evaluate_log_amplitudes(self.n_visible(), self.visible_alphabet, max_sites, |cfg| {
            self.log_amplitude_unchecked(cfg)
        })
    }

    /// Rewrites the RBM as a quasi-product cover: one cluster per hidden
    /// unit over its connected visibles (table of `Gamma` values), one
    /// single-site cluster per visible bias. Hidden units without
    /// connections contribute a constant folded into the first cluster.
    /// The cover's amplitude equals [`RbmSpec::amplitude`] pointwise.
    pub fn to_cluster_cover(&self) -> Result<ClusterCover> {
        let mut clusters = Vec::with_capacity(self.n_visible() + self.n_hidden());
        for (i, a) in self.visible_bias.iter().enumerate() {
            let table = vec![
                (a * self.visible_alphabet.value(0)).exp(),
                (a * self.visible_alphabet.value(1)).exp(),
            ];
            clusters.push(LocalCluster::new(vec![i], table)?);
        }
        let mut constant = Complex64::new(1.0, 0.0);
        for (j, b) in self.hidden_bias.iter().enumerate() {
            let inputs = self.weights.column_inputs(j);
            if inputs.is_empty() {
                constant *= gamma(self.hidden_alphabet, *b);
                continue;
            }
            let sites: Vec<usize> = inputs.iter().map(|(i, _)| *i).collect();
            let table = (0..1usize << sites.len())
                .map(|m| {
                    let mut z = *b;
                    for (t, (_, w)) in inputs.iter().enumerate() {
                        z += w * self.visible_alphabet.value(((m >> t) & 1) as u8);
                    }
                    gamma(self.hidden_alphabet, z)
                })
                .collect();
            clusters.push(LocalCluster::new(sites, table)?);
        }
        let mut cover = ClusterCover::new(self.n_visible(), self.visible_alphabet, clusters)?;
        if constant != Complex64::new(1.0, 0.0) {
            cover = cover.scaled_first_cluster(constant);
        }
        Ok(cover)
    }
}

// ---------------------------------------------------------------------------
// feed-forward network
// ---------------------------------------------------------------------------

/// Closed whitelist of complex activations; arbitrary user functions are
/// rejected so that amplitude evaluation stays pure and serializable.
#[derive(Debug, Clone, PartialEq)]
pub enum Activation {
    Cos,
    Cosh,
    Exp,
    Tanh,
    /// `p(z) = c_0 + c_1 z + c_2 z^2 + ...`
    Polynomial(Vec<Complex64>),
}

impl Activation {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Activation::Cos => z.cos(),
            Activation::Cosh => z.cosh(),
            Activation::Exp => z.exp(),
            Activation::Tanh => z.tanh(),
            Activation::Polynomial(coeffs) => {
                let mut acc = Complex64::default();
                for c in coeffs.iter().rev() {
                    acc = acc * z + c;
                }
                acc
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FfnnLayer {
    /// Rows index the previous layer, columns this layer.
    pub weights: WeightMatrix,
    pub biases: Vec<Complex64>,
    pub activations: Vec<Activation>,
}

/// Layered McCulloch-Pitts network with complex weights; neuron output is
/// `F(sum_i w_i x_i - b)` and the state amplitude is the product of the
/// output-layer values. Only adjacent layers connect.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedForwardSpec {
    n_visible: usize,
    layers: Vec<FfnnLayer>,
    visible_alphabet: Alphabet,
    layer_positions: Vec<Option<Vec<DoubledCoord>>>,
}

impl FeedForwardSpec {
    pub fn new(
        n_visible: usize,
        layers: Vec<FfnnLayer>,
        visible_alphabet: Alphabet,
    ) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Input(
                "feed-forward network needs at least one layer".into(),
            ));
        }
        let mut prev = n_visible;
        for (li, layer) in layers.iter().enumerate() {
            if layer.weights.rows() != prev {
                return Err(Error::Input(format!(
                    "layer {li}: weights have {} input rows, previous layer has {prev}",
                    layer.weights.rows()
                )));
            }
            let width = layer.weights.cols();
            if layer.biases.len() != width || layer.activations.len() != width {
                return Err(Error::Input(format!(
                    "layer {li}: {width} neurons need {width} biases and activations"
                )));
            }
            prev = width;
        }
        let n_layers = layers.len();
        Ok(Self {
            n_visible,
            layers,
            visible_alphabet,
            layer_positions: vec![None; n_layers],
        })
    }

    pub fn with_layer_positions(mut self, layer: usize, positions: Vec<DoubledCoord>) -> Self {
        self.layer_positions[layer] = Some(positions);
        self
    }

    pub fn n_visible(&self) -> usize {
        self.n_visible
    }

    pub fn layers(&self) -> &[FfnnLayer] {
        &self.layers
    }

    pub fn visible_alphabet(&self) -> Alphabet {
        self.visible_alphabet
    }

    /// Values of the output layer for one input configuration.
    pub fn forward(&self, v: &SpinConfiguration) -> Result<Vec<Complex64>> {
        if v.n_sites() != self.n_visible {
            return Err(Error::Input(format!(
                "configuration has {} sites, network input has {}",
                v.n_sites(),
                self.n_visible
            )));
        }
        if v.alphabet() != self.visible_alphabet {
            return Err(Error::Input(
                "configuration alphabet does not match network".into(),
            ));
        }
        let mut values: Vec<Complex64> = (0..self.n_visible)
            .map(|i| Complex64::new(v.value(i), 0.0))
            .collect();
        for layer in &self.layers {
            values = (0..layer.weights.cols())
                .map(|c| {
                    let mut z = -layer.biases[c];
                    for (r, w) in layer.weights.column_inputs(c) {
                        z += w * values[r];
                    }
                    layer.activations[c].eval(z)
                })
                .collect();
        }
        Ok(values)
    }

    pub fn amplitude(&self, v: &SpinConfiguration) -> Result<Complex64> {
        Ok(self.forward(v)?.into_iter().product())
    }

    pub fn evaluate(&self, max_sites: usize) -> Result<DenseState> {
        check_site_budget(self.n_visible, max_sites)?;
        crate::state::evaluate_all(self.n_visible, self.visible_alphabet, max_sites, |cfg| {
            self.amplitude(cfg).expect("validated dimensions")
        })
    }
}

// ---------------------------------------------------------------------------
// deep Boltzmann machine
// ---------------------------------------------------------------------------

/// Two-hidden-layer DBM. The shallow layer is traced out analytically via
/// `Gamma` factors; the deep layer is summed by exact enumeration, so its
/// width is capped.
#[derive(Debug, Clone, PartialEq)]
pub struct DbmSpec {
    visible_bias: Vec<Complex64>,
    shallow_bias: Vec<Complex64>,
    deep_bias: Vec<Complex64>,
    /// visible <-> shallow hidden
    vh: WeightMatrix,
    /// shallow hidden <-> deep hidden
    hg: WeightMatrix,
    visible_alphabet: Alphabet,
    shallow_alphabet: Alphabet,
    deep_alphabet: Alphabet,
    shallow_positions: Option<Vec<DoubledCoord>>,
    deep_positions: Option<Vec<DoubledCoord>>,
}

impl DbmSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        visible_bias: Vec<Complex64>,
        shallow_bias: Vec<Complex64>,
        deep_bias: Vec<Complex64>,
        vh: WeightMatrix,
        hg: WeightMatrix,
        visible_alphabet: Alphabet,
        shallow_alphabet: Alphabet,
        deep_alphabet: Alphabet,
    ) -> Result<Self> {
        if vh.rows() != visible_bias.len() || vh.cols() != shallow_bias.len() {
            return Err(Error::Input(format!(
                "visible-shallow weights are {} x {}, biases are {} / {}",
                vh.rows(),
                vh.cols(),
                visible_bias.len(),
                shallow_bias.len()
            )));
        }
        if hg.rows() != shallow_bias.len() || hg.cols() != deep_bias.len() {
            return Err(Error::Input(format!(
                "shallow-deep weights are {} x {}, biases are {} / {}",
                hg.rows(),
                hg.cols(),
                shallow_bias.len(),
                deep_bias.len()
            )));
        }
        if deep_bias.len() > DEFAULT_MAX_DEEP {
            return Err(Error::Resource(format!(
                "deep layer of {} units exceeds the brute-force cap of {DEFAULT_MAX_DEEP}",
                deep_bias.len()
            )));
        }
        if visible_bias.is_empty() {
            return Err(Error::Input("DBM needs at least one visible neuron".into()));
        }
        Ok(Self {
            visible_bias,
            shallow_bias,
            deep_bias,
            vh,
            hg,
            visible_alphabet,
            shallow_alphabet,
            deep_alphabet,
            shallow_positions: None,
            deep_positions: None,
        })
    }

    pub fn with_shallow_positions(mut self, positions: Vec<DoubledCoord>) -> Self {
        self.shallow_positions = Some(positions);
        self
    }

    pub fn with_deep_positions(mut self, positions: Vec<DoubledCoord>) -> Self {
        self.deep_positions = Some(positions);
        self
    }

    pub fn n_visible(&self) -> usize {
        self.visible_bias.len()
    }

    pub fn n_shallow(&self) -> usize {
        self.shallow_bias.len()
    }

    pub fn n_deep(&self) -> usize {
        self.deep_bias.len()
    }

    pub fn vh(&self) -> &WeightMatrix {
        &self.vh
    }

    pub fn hg(&self) -> &WeightMatrix {
        &self.hg
    }

    pub fn visible_bias(&self) -> &[Complex64] {
        &self.visible_bias
    }

    pub fn shallow_bias(&self) -> &[Complex64] {
        &self.shallow_bias
    }

    pub fn deep_bias(&self) -> &[Complex64] {
        &self.deep_bias
    }

    pub fn visible_alphabet(&self) -> Alphabet {
        self.visible_alphabet
    }

    pub fn shallow_alphabet(&self) -> Alphabet {
        self.shallow_alphabet
    }

    pub fn deep_alphabet(&self) -> Alphabet {
        self.deep_alphabet
    }

    fn check_config(&self, v: &SpinConfiguration) -> Result<()> {
        if v.n_sites() != self.n_visible() {
            return Err(Error::Input(format!(
                "configuration has {} sites, DBM has {} visible neurons",
                v.n_sites(),
                self.n_visible()
            )));
        }
        if v.alphabet() != self.visible_alphabet {
            return Err(Error::Input(
                "configuration alphabet does not match DBM".into(),
            ));
        }
        Ok(())
    }

    /// Analytic shallow sum, explicit enumeration over the `2^n_deep` deep
    /// configurations, accumulated as a log-sum-exp.
    pub fn amplitude(&self, v: &SpinConfiguration) -> Result<Complex64> {
        self.check_config(v)?;
        Ok(match self.log_amplitude_unchecked(v) {
            Some(log) => log.exp(),
            None => Complex64::default(),
        })
    }

    pub fn log_amplitude(&self, v: &SpinConfiguration) -> Result<Option<Complex64>> {
        self.check_config(v)?;
        Ok(self.log_amplitude_unchecked(v))
    }

    fn log_amplitude_unchecked(&self, v: &SpinConfiguration) -> Option<Complex64> {
        let m = self.n_shallow();
        let l = self.n_deep();
        let mut visible_part = Complex64::default();
        for (i, a) in self.visible_bias.iter().enumerate() {
            visible_part += a * v.value(i);
        }
        // alpha_j = b_j + sum_i W_ij v_i
        let alpha: Vec<Complex64> = (0..m)
            .map(|j| {
                let mut z = self.shallow_bias[j];
                for (i, w) in self.vh.column_inputs(j) {
                    z += w * v.value(i);
                }
                z
            })
            .collect();
        let deep_columns: Vec<Vec<(usize, Complex64)>> =
            (0..l).map(|k| self.hg.column_inputs(k)).collect();

        // Log of each deep term, then a max-subtracted sum.
        let mut logs: Vec<Complex64> = Vec::with_capacity(1 << l);
        let mut z = vec![Complex64::default(); m];
        for g in 0..1u64 << l {
            z.copy_from_slice(&alpha);
            let mut deep_part = Complex64::default();
            for (k, column) in deep_columns.iter().enumerate() {
                let val = self.deep_alphabet.value(((g >> k) & 1) as u8);
                if val == 0.0 {
                    continue;
                }
                deep_part += self.deep_bias[k] * val;
                for &(j, w) in column {
                    z[j] += w * val;
                }
            }
            let mut log = deep_part;
            let mut dead = false;
            for &zj in &z {
                match ln_gamma(self.shallow_alphabet, zj) {
                    Some(g) => log += g,
                    None => {
                        dead = true;
                        break;
                    }
                }
            }
            if !dead {
                logs.push(log);
            }
        }
        if logs.is_empty() {
            return None;
        }
        let max_re = logs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let sum: Complex64 = logs.iter().map(|z| (z - max_re).exp()).sum();
        if sum == Complex64::default() {
            return None;
        }
        Some(visible_part + max_re + sum.ln())
    }

    pub fn evaluate(&self, max_sites: usize) -> Result<DenseState> {
        evaluate_log_amplitudes(self.n_visible(), self.visible_alphabet, max_sites, |cfg| {
            self.log_amplitude_unchecked(cfg)
        })
    }

    /// Classifies visible and deep neurons into the six boundary groups
    /// induced by a visible bipartition, with the deep layer split by the
    /// duplicated-geometry copy of the same bipartition, and returns the
    /// constructive Schmidt-rank bound.
    ///
    /// A shallow hidden unit is a boundary unit when its combined support
    /// (connected visibles plus connected deep units) touches both sides;
    /// the bound exponent is the total size of the boundary units' support.
    pub fn boundary_analysis(&self, part: &Bipartition) -> Result<DbmBoundary> {
        if part.n_sites() != self.n_visible() {
            return Err(Error::Input(format!(
                "bipartition is over {} sites, DBM has {} visibles",
                part.n_sites(),
                self.n_visible()
            )));
        }
        if self.n_deep() > self.n_visible() {
            return Err(Error::Config(
                "deep layer is wider than the visible layer; the duplicated-geometry \
                 bipartition of the deep layer is undefined"
                    .into(),
            ));
        }
        let m = self.n_shallow();
        let deep_in_b = |k: usize| part.contains(k);

        let vis_support: Vec<Vec<usize>> = (0..m)
            .map(|j| {
                self.vh
                    .column_inputs(j)
                    .into_iter()
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        let deep_support: Vec<Vec<usize>> = (0..m)
            .map(|j| self.hg.row_outputs(j).into_iter().map(|(k, _)| k).collect())
            .collect();

        let mut boundary_hidden = Vec::new();
        let mut visible_boundary = BTreeSet::new();
        let mut deep_boundary = BTreeSet::new();
        for j in 0..m {
            let touches_a = vis_support[j].iter().any(|&i| part.contains(i))
                || deep_support[j].iter().any(|&k| deep_in_b(k));
            let touches_ac = vis_support[j].iter().any(|&i| !part.contains(i))
                || deep_support[j].iter().any(|&k| !deep_in_b(k));
            if touches_a && touches_ac {
                boundary_hidden.push(j);
                visible_boundary.extend(vis_support[j].iter().copied());
                deep_boundary.extend(deep_support[j].iter().copied());
            }
        }
        let log2_bound = visible_boundary.len() + deep_boundary.len();

        // Six groups per layer: frontier sites reach the other side through
        // one hidden unit, buffer sites reach a frontier site through one
        // hidden unit, interior is the rest of the side.
        let visible_a_sites: Vec<usize> = part.region_a().to_vec();
        let visible_ac_sites: Vec<usize> = part.complement();
        let deep_b_sites: Vec<usize> = (0..self.n_deep()).filter(|&k| deep_in_b(k)).collect();
        let deep_bc_sites: Vec<usize> = (0..self.n_deep()).filter(|&k| !deep_in_b(k)).collect();
        let groups = SixGroupReport {
            visible_a: classify_side(&visible_a_sites, &|i| part.contains(i), &vis_support),
            visible_ac: classify_side(&visible_ac_sites, &|i| !part.contains(i), &vis_support),
            deep_b: classify_side(&deep_b_sites, &|k| deep_in_b(k), &deep_support),
            deep_bc: classify_side(&deep_bc_sites, &|k| !deep_in_b(k), &deep_support),
        };
        Ok(DbmBoundary {
            boundary_hidden,
            visible_boundary,
            deep_boundary,
            groups,
            log2_bound,
        })
    }
}

fn classify_side(
    side_sites: &[usize],
    in_this_side: &dyn Fn(usize) -> bool,
    support: &[Vec<usize>],
) -> SideGroups {
    let mut frontier = BTreeSet::new();
    for supp in support {
        if supp.iter().any(|&s| !in_this_side(s)) {
            frontier.extend(supp.iter().copied().filter(|&s| in_this_side(s)));
        }
    }
    let mut buffer = BTreeSet::new();
    for supp in support {
        if supp
            .iter()
            .any(|&s| in_this_side(s) && frontier.contains(&s))
        {
            for &s in supp {
                if in_this_side(s) && !frontier.contains(&s) {
                    buffer.insert(s);
                }
            }
        }
    }
    let interior = side_sites
        .iter()
        .copied()
        .filter(|s| !frontier.contains(s) && !buffer.contains(s))
        .collect();
    SideGroups {
        interior,
        buffer: buffer.into_iter().collect(),
        frontier: frontier.into_iter().collect(),
    }
}

/// Frontier / buffer / interior split of one side of one layer.
#[derive(Debug, Clone)]
pub struct SideGroups {
    pub interior: Vec<usize>,
    pub buffer: Vec<usize>,
    pub frontier: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SixGroupReport {
    pub visible_a: SideGroups,
    pub visible_ac: SideGroups,
    pub deep_b: SideGroups,
    pub deep_bc: SideGroups,
}

/// Boundary data of a DBM bipartition; `log2_bound` is the constructive
/// Schmidt-rank exponent (boundary support of the straddling hidden units).
#[derive(Debug, Clone)]
pub struct DbmBoundary {
    pub boundary_hidden: Vec<usize>,
    pub visible_boundary: BTreeSet<usize>,
    pub deep_boundary: BTreeSet<usize>,
    pub groups: SixGroupReport,
    pub log2_bound: usize,
}

// ---------------------------------------------------------------------------
// spec enum and random generators
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum NetworkSpec {
    Rbm(RbmSpec),
    Ffnn(FeedForwardSpec),
    Dbm(DbmSpec),
}

/// One adjacent-layer connection set, for locality validation.
pub struct LayerPairView {
    pub name: String,
    pub lower_len: usize,
    pub upper_len: usize,
    pub lower_positions: Option<Vec<DoubledCoord>>,
    pub upper_positions: Option<Vec<DoubledCoord>>,
    /// The physical layer does not count toward K.
    pub lower_is_physical: bool,
    /// `(lower, upper)` index pairs with nonzero weight.
    pub connections: Vec<(usize, usize)>,
}

impl NetworkSpec {
    pub fn n_visible(&self) -> usize {
        match self {
            NetworkSpec::Rbm(s) => s.n_visible(),
            NetworkSpec::Ffnn(s) => s.n_visible(),
            NetworkSpec::Dbm(s) => s.n_visible(),
        }
    }

    pub fn amplitude(&self, v: &SpinConfiguration) -> Result<Complex64> {
        match self {
            NetworkSpec::Rbm(s) => s.amplitude(v),
            NetworkSpec::Ffnn(s) => s.amplitude(v),
            NetworkSpec::Dbm(s) => s.amplitude(v),
        }
    }

    pub fn evaluate(&self, max_sites: usize) -> Result<DenseState> {
        match self {
            NetworkSpec::Rbm(s) => s.evaluate(max_sites),
            NetworkSpec::Ffnn(s) => s.evaluate(max_sites),
            NetworkSpec::Dbm(s) => s.evaluate(max_sites),
        }
    }

    pub fn layer_pairs(&self) -> Vec<LayerPairView> {
        match self {
            NetworkSpec::Rbm(s) => vec![LayerPairView {
                name: "visible-hidden".into(),
                lower_len: s.n_visible(),
                upper_len: s.n_hidden(),
                lower_positions: None,
                upper_positions: s.hidden_positions.clone(),
                lower_is_physical: true,
                connections: s.weights.connections(),
            }],
            NetworkSpec::Dbm(s) => vec![
                LayerPairView {
                    name: "visible-shallow".into(),
                    lower_len: s.n_visible(),
                    upper_len: s.n_shallow(),
                    lower_positions: None,
                    upper_positions: s.shallow_positions.clone(),
                    lower_is_physical: true,
                    connections: s.vh.connections(),
                },
                LayerPairView {
                    name: "shallow-deep".into(),
                    lower_len: s.n_shallow(),
                    upper_len: s.n_deep(),
                    lower_positions: s.shallow_positions.clone(),
                    upper_positions: s.deep_positions.clone(),
                    lower_is_physical: false,
                    connections: s.hg.connections(),
                },
            ],
            NetworkSpec::Ffnn(s) => {
                let mut prev = s.n_visible();
                let mut prev_positions: Option<Vec<DoubledCoord>> = None;
                s.layers
                    .iter()
                    .enumerate()
                    .map(|(li, layer)| {
                        let pair = LayerPairView {
                            name: format!("layer-{li}-{}", li + 1),
                            lower_len: prev,
                            upper_len: layer.weights.cols(),
                            lower_positions: prev_positions.clone(),
                            upper_positions: s.layer_positions[li].clone(),
                            lower_is_physical: li == 0,
                            connections: layer.weights.connections(),
                        };
                        prev = layer.weights.cols();
                        prev_positions = s.layer_positions[li].clone();
                        pair
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Locality {
    /// Sliding window of `k` consecutive neurons on a periodic chain.
    Local {
        k: usize,
    },
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomKind {
    Rbm,
    Dbm,
}

fn draw(rng: &mut ChaCha8Rng, scale: f64) -> Complex64 {
    // Independent real and imaginary parts, uniform in [-scale, scale].
    let re = rng.gen_range(-scale..=scale);
    let im = rng.gen_range(-scale..=scale);
    Complex64::new(re, im)
}

fn window_mask(n: usize, m: usize, k: usize) -> Vec<bool> {
    let mut mask = vec![false; n * m];
    let half = (k - 1) / 2;
    for j in 0..m {
        for d in 0..k {
            let i = (j + n + d - half) % n;
            mask[i * m + j] = true;
        }
    }
    mask
}

fn random_weights(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
    mask: Vec<bool>,
    scale: f64,
) -> WeightMatrix {
    let mut weights = vec![Complex64::default(); rows * cols];
    // Column-major draw order (hidden unit by hidden unit) keeps streams
    // reproducible regardless of how the mask was produced.
    for j in 0..cols {
        for i in 0..rows {
            if mask[i * cols + j] {
                weights[i * cols + j] = draw(rng, scale);
            }
        }
    }
    WeightMatrix::new(rows, cols, weights, mask).expect("mask and weights agree by construction")
}

/// Seeded random RBM with `m = n` hidden units over ±1 visibles and ±1
/// hiddens; bit-exact reproducible for a given seed.
pub fn random_rbm(n: usize, locality: Locality, seed: u64, scale: f64) -> RbmSpec {
    random_rbm_with_alphabets(
        n,
        locality,
        seed,
        scale,
        Alphabet::PlusMinus,
        Alphabet::PlusMinus,
    )
}

pub fn random_rbm_with_alphabets(
    n: usize,
    locality: Locality,
    seed: u64,
    scale: f64,
    visible: Alphabet,
    hidden: Alphabet,
) -> RbmSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let visible_bias = (0..n).map(|_| draw(&mut rng, scale)).collect();
    let hidden_bias = (0..n).map(|_| draw(&mut rng, scale)).collect();
    let mask = match locality {
        Locality::Local { k } => window_mask(n, n, k),
        Locality::Dense => vec![true; n * n],
    };
    let weights = random_weights(&mut rng, n, n, mask, scale);
    RbmSpec::new(visible_bias, hidden_bias, weights, visible, hidden)
        .expect("generated dimensions agree")
}

/// Seeded random DBM with `m = l = n`, ±1 visibles and {0,1} hidden layers.
pub fn random_dbm(n: usize, locality: Locality, seed: u64, scale: f64) -> DbmSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let visible_bias: Vec<Complex64> = (0..n).map(|_| draw(&mut rng, scale)).collect();
    let shallow_bias: Vec<Complex64> = (0..n).map(|_| draw(&mut rng, scale)).collect();
    let deep_bias: Vec<Complex64> = (0..n).map(|_| draw(&mut rng, scale)).collect();
    let (mask_vh, mask_hg) = match locality {
        Locality::Local { k } => (window_mask(n, n, k), window_mask(n, n, k)),
        Locality::Dense => (vec![true; n * n], vec![true; n * n]),
    };
    let vh = random_weights(&mut rng, n, n, mask_vh, scale);
    let hg = random_weights(&mut rng, n, n, mask_hg, scale);
    DbmSpec::new(
        visible_bias,
        shallow_bias,
        deep_bias,
        vh,
        hg,
        Alphabet::PlusMinus,
        Alphabet::ZeroOne,
        Alphabet::ZeroOne,
    )
    .expect("generated dimensions agree")
}

/// Seeded random network; weights and biases have independent real and
/// imaginary parts uniform in `[-scale, scale]`.
pub fn random_network(
    kind: RandomKind,
    n: usize,
    locality: Locality,
    seed: u64,
    scale: f64,
) -> NetworkSpec {
    match kind {
        RandomKind::Rbm => NetworkSpec::Rbm(random_rbm(n, locality, seed, scale)),
        RandomKind::Dbm => NetworkSpec::Dbm(random_dbm(n, locality, seed, scale)),
    }
}
