//! Classifiers: the logit-producing trait used by the risk engine, linear
//! softmax members for classifier families, and a small dense MLP with ReLU
//! hidden layers and inverted dropout.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::loss::{loss_grad_logits, loss_value, LossKind};
use crate::math::softmax;
use crate::rng::Rng;

/// Anything that maps a feature point to one logit per class.
pub trait Classifier {
    fn input_dim(&self) -> usize;
    fn classes(&self) -> usize;
    fn logits(&self, x: ArrayView1<'_, f64>) -> Array1<f64>;
}

/// Affine scores `W x + b` with `W` of shape `(classes, input_dim)`.
#[derive(Debug, Clone)]
pub struct LinearSoftmax {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl LinearSoftmax {
    pub fn new(weights: Array2<f64>, bias: Array1<f64>) -> Result<Self> {
        if weights.nrows() != bias.len() {
            return Err(Error::DimensionMismatch {
                what: "weight rows vs bias entries",
                expected: weights.nrows(),
                actual: bias.len(),
            });
        }
        if weights.nrows() < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 classes, got {}",
                weights.nrows()
            )));
        }
        Ok(Self { weights, bias })
    }

    /// Gaussian weights and biases of the given scale.
    pub fn random(input_dim: usize, classes: usize, scale: f64, rng: &mut Rng) -> Self {
        let weights = Array2::from_shape_fn((classes, input_dim), |_| scale * rng.normal());
        let bias = Array1::from_shape_fn(classes, |_| scale * rng.normal());
        Self { weights, bias }
    }

    /// Linear classifier whose argmax is the nearest class mean:
    /// score_c(x) = sharpness * (2 x . mu_c - |mu_c|^2), which orders
    /// classes by -|x - mu_c|^2. Large `sharpness` drives the softmax to a
    /// one-hot vector on the predicted class.
    pub fn nearest_mean(means: &Array2<f64>, sharpness: f64) -> Self {
        let k = means.nrows();
        let d = means.ncols();
        let mut weights = Array2::zeros((k, d));
        let mut bias = Array1::zeros(k);
        for c in 0..k {
            let mu = means.row(c);
            let norm_sq: f64 = mu.iter().map(|m| m * m).sum();
            for j in 0..d {
                weights[[c, j]] = sharpness * 2.0 * mu[j];
            }
            bias[c] = -sharpness * norm_sq;
        }
        Self { weights, bias }
    }
}

impl Classifier for LinearSoftmax {
    fn input_dim(&self) -> usize {
        self.weights.ncols()
    }

    fn classes(&self) -> usize {
        self.weights.nrows()
    }

    fn logits(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        self.weights.dot(&x) + &self.bias
    }
}

// ============================ MLP =====================================

/// Architecture of a dense ReLU network. `hidden` empty means a plain
/// linear softmax model. `dropout[l]` is the drop rate applied to hidden
/// layer `l` during training.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub classes: usize,
    pub dropout: Vec<f64>,
    pub init_seed: u64,
}

impl MlpSpec {
    pub fn new(input_dim: usize, hidden: Vec<usize>, classes: usize, init_seed: u64) -> Self {
        let dropout = vec![0.0; hidden.len()];
        Self { input_dim, hidden, classes, dropout, init_seed }
    }

    pub fn with_dropout(mut self, rates: Vec<f64>) -> Self {
        self.dropout = rates;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::InvalidInput("input dimension must be positive".into()));
        }
        if self.classes < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 classes, got {}",
                self.classes
            )));
        }
        if self.hidden.iter().any(|&h| h == 0) {
            return Err(Error::InvalidInput("hidden layer sizes must be positive".into()));
        }
        if self.dropout.len() != self.hidden.len() {
            return Err(Error::DimensionMismatch {
                what: "dropout rates vs hidden layers",
                expected: self.hidden.len(),
                actual: self.dropout.len(),
            });
        }
        if self.dropout.iter().any(|&r| !r.is_finite() || !(0.0..1.0).contains(&r)) {
            return Err(Error::InvalidInput("dropout rates must lie in [0, 1)".into()));
        }
        Ok(())
    }

    /// Layer widths from input to output.
    fn widths(&self) -> Vec<usize> {
        let mut w = Vec::with_capacity(self.hidden.len() + 2);
        w.push(self.input_dim);
        w.extend_from_slice(&self.hidden);
        w.push(self.classes);
        w
    }
}

/// Dense network. Layer `l` stores weights of shape `(in_l, out_l)` so a
/// batch forward step is `a.dot(w) + b`.
#[derive(Debug, Clone)]
pub struct Mlp {
    spec: MlpSpec,
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
}

/// Per-layer parameter gradients (or any same-shaped accumulator, e.g. the
/// momentum buffer).
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl Gradients {
    pub fn zeros_like(model: &Mlp) -> Self {
        Self {
            weights: model.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            biases: model.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
        }
    }
}

/// Cached intermediates of a training-mode forward pass, consumed by
/// [`Mlp::backward`]. Dropout masks are stored so the backward pass reuses
/// exactly the units that were active.
pub struct ForwardTrace {
    input: Array2<f64>,
    pre_activations: Vec<Array2<f64>>,
    activations: Vec<Array2<f64>>,
    masks: Vec<Option<Array2<f64>>>,
    pub logits: Array2<f64>,
}

impl Mlp {
    /// Glorot-uniform initialization: layer weights drawn uniformly from
    /// `[-s, s]` with `s = sqrt(6 / (fan_in + fan_out))`, biases zero. The
    /// draw order is fixed, so the result is bit-identical for a seed.
    pub fn init(spec: MlpSpec) -> Result<Self> {
        spec.validate()?;
        let widths = spec.widths();
        let mut rng = Rng::new(spec.init_seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..widths.len() - 1 {
            let (fan_in, fan_out) = (widths[l], widths[l + 1]);
            let s = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let w = Array2::from_shape_fn((fan_in, fan_out), |_| rng.uniform_in(-s, s));
            weights.push(w);
            biases.push(Array1::zeros(fan_out));
        }
        Ok(Self { spec, weights, biases })
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn layer_count(&self) -> usize {
        self.weights.len()
    }

    pub fn layers(&self) -> (&[Array2<f64>], &[Array1<f64>]) {
        (&self.weights, &self.biases)
    }

    /// Batch logits without dropout (inference mode).
    pub fn forward_eval(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut a = x.to_owned();
        for l in 0..self.weights.len() {
            let mut z = a.dot(&self.weights[l]) + &self.biases[l];
            if l + 1 < self.weights.len() {
                z.mapv_inplace(|v| v.max(0.0));
            }
            a = z;
        }
        a
    }

    /// Training-mode forward pass with inverted dropout: each hidden unit
    /// is kept with probability `1 - rate` and scaled by `1 / (1 - rate)`,
    /// so the expected activation matches evaluation mode. No draws are
    /// consumed for layers with rate 0.
    pub fn forward_train(&self, x: ArrayView2<'_, f64>, rng: &mut Rng) -> ForwardTrace {
        let n_layers = self.weights.len();
        let mut pre_activations = Vec::with_capacity(n_layers.saturating_sub(1));
        let mut activations = Vec::with_capacity(n_layers.saturating_sub(1));
        let mut masks = Vec::with_capacity(n_layers.saturating_sub(1));
        let input = x.to_owned();
        let mut a = input.clone();
        for l in 0..n_layers - 1 {
            let z = a.dot(&self.weights[l]) + &self.biases[l];
            let mut h = z.mapv(|v| v.max(0.0));
            let rate = self.spec.dropout[l];
            let mask = if rate > 0.0 {
                let keep = 1.0 - rate;
                let m = Array2::from_shape_fn(h.dim(), |_| {
                    if rng.uniform() < keep {
                        1.0 / keep
                    } else {
                        0.0
                    }
                });
                h *= &m;
                Some(m)
            } else {
                None
            };
            pre_activations.push(z);
            activations.push(h.clone());
            masks.push(mask);
            a = h;
        }
        let logits = a.dot(&self.weights[n_layers - 1]) + &self.biases[n_layers - 1];
        ForwardTrace { input, pre_activations, activations, masks, logits }
    }

    /// Batch-mean gradients of the loss at the trace, reusing its dropout
    /// masks, together with the batch-mean loss value.
    pub fn backward(
        &self,
        trace: &ForwardTrace,
        labels: &[usize],
        kind: LossKind,
    ) -> Result<(Gradients, f64)> {
        let n = trace.logits.nrows();
        if labels.len() != n {
            return Err(Error::DimensionMismatch {
                what: "labels vs batch rows",
                expected: n,
                actual: labels.len(),
            });
        }
        if n == 0 {
            return Err(Error::InvalidInput("empty batch".into()));
        }
        let k = self.spec.classes;
        let scale = 1.0 / n as f64;

        let mut delta = Array2::zeros((n, k));
        let mut total_loss = 0.0;
        for (row, &y) in labels.iter().enumerate() {
            let logit_row: Vec<f64> = trace.logits.row(row).to_vec();
            let u = softmax(&logit_row)?;
            total_loss += loss_value(kind, &u, y)?;
            let g = loss_grad_logits(kind, &u, y)?;
            for j in 0..k {
                delta[[row, j]] = g[j] * scale;
            }
        }
        let mean_loss = total_loss * scale;

        let n_layers = self.weights.len();
        let mut grads = Gradients::zeros_like(self);
        let mut upstream = delta;
        for l in (0..n_layers).rev() {
            let below: &Array2<f64> = if l == 0 { &trace.input } else { &trace.activations[l - 1] };
            grads.weights[l] = below.t().dot(&upstream);
            grads.biases[l] = upstream.sum_axis(ndarray::Axis(0));
            if l > 0 {
                let mut h = upstream.dot(&self.weights[l].t());
                if let Some(mask) = &trace.masks[l - 1] {
                    h *= mask;
                }
                let relu_gate = trace.pre_activations[l - 1].mapv(|z| if z > 0.0 { 1.0 } else { 0.0 });
                h *= &relu_gate;
                upstream = h;
            }
        }
        Ok((grads, mean_loss))
    }

    /// Mean loss over a batch in evaluation mode.
    pub fn mean_loss(&self, x: ArrayView2<'_, f64>, labels: &[usize], kind: LossKind) -> Result<f64> {
        let logits = self.forward_eval(x);
        let mut total = 0.0;
        for (row, &y) in labels.iter().enumerate() {
            let logit_row: Vec<f64> = logits.row(row).to_vec();
            total += loss_value(kind, &softmax(&logit_row)?, y)?;
        }
        Ok(total / labels.len() as f64)
    }

    // ----- flat parameter view (checkpoints, gradient checking) --------

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// Flat parameter order: per layer, weights row-major then the bias.
    pub fn get_param(&self, mut idx: usize) -> f64 {
        for l in 0..self.weights.len() {
            let wl = self.weights[l].len();
            if idx < wl {
                return *self.weights[l].as_slice().expect("standard layout").get(idx).unwrap();
            }
            idx -= wl;
            let bl = self.biases[l].len();
            if idx < bl {
                return self.biases[l][idx];
            }
            idx -= bl;
        }
        panic!("parameter index out of range");
    }

    pub fn set_param(&mut self, mut idx: usize, value: f64) {
        for l in 0..self.weights.len() {
            let wl = self.weights[l].len();
            if idx < wl {
                self.weights[l].as_slice_mut().expect("standard layout")[idx] = value;
                return;
            }
            idx -= wl;
            let bl = self.biases[l].len();
            if idx < bl {
                self.biases[l][idx] = value;
                return;
            }
            idx -= bl;
        }
        panic!("parameter index out of range");
    }

    pub(crate) fn layers_mut(&mut self) -> (&mut Vec<Array2<f64>>, &mut Vec<Array1<f64>>) {
        (&mut self.weights, &mut self.biases)
    }

    // ------------------------- checkpoints ------------------------------
    //
    // Text format: a fixed header naming the architecture, then `params N`
    // and N parameter values, one per line, at 17 significant digits (flat
    // order as above). Loading restores every bit.

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "mlp-checkpoint v1")?;
        writeln!(w, "input_dim {}", self.spec.input_dim)?;
        writeln!(w, "classes {}", self.spec.classes)?;
        let hidden: Vec<String> = self.spec.hidden.iter().map(|h| h.to_string()).collect();
        writeln!(w, "hidden {}", hidden.join(" "))?;
        let dropout: Vec<String> = self.spec.dropout.iter().map(|r| format!("{r:.16e}")).collect();
        writeln!(w, "dropout {}", dropout.join(" "))?;
        writeln!(w, "init_seed {}", self.spec.init_seed)?;
        writeln!(w, "params {}", self.param_count())?;
        for idx in 0..self.param_count() {
            writeln!(w, "{:.16e}", self.get_param(idx))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let mut lines = reader.lines().enumerate();
        let mut next_line = |expect: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, line)) => Ok((i + 1, line?)),
                None => Err(Error::parse(path, 0, format!("missing {expect}"))),
            }
        };

        let (no, magic) = next_line("header")?;
        if magic.trim() != "mlp-checkpoint v1" {
            return Err(Error::parse(path, no, format!("bad header '{}'", magic.trim())));
        }
        let mut field = |name: &str| -> Result<(usize, String)> {
            let (no, line) = next_line(name)?;
            let rest = line
                .strip_prefix(name)
                .ok_or_else(|| Error::parse(path, no, format!("expected '{name} ...', got '{line}'")))?;
            Ok((no, rest.trim().to_string()))
        };

        let (no, v) = field("input_dim")?;
        let input_dim: usize = v.parse().map_err(|_| Error::parse(path, no, "bad input_dim"))?;
        let (no, v) = field("classes")?;
        let classes: usize = v.parse().map_err(|_| Error::parse(path, no, "bad classes"))?;
        let (no, v) = field("hidden")?;
        let hidden: Vec<usize> = v
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::parse(path, no, format!("bad hidden size '{t}'"))))
            .collect::<Result<_>>()?;
        let (no, v) = field("dropout")?;
        let dropout: Vec<f64> = v
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::parse(path, no, format!("bad dropout rate '{t}'"))))
            .collect::<Result<_>>()?;
        let (no, v) = field("init_seed")?;
        let init_seed: u64 = v.parse().map_err(|_| Error::parse(path, no, "bad init_seed"))?;
        let (no, v) = field("params")?;
        let count: usize = v.parse().map_err(|_| Error::parse(path, no, "bad parameter count"))?;

        let spec = MlpSpec { input_dim, hidden, classes, dropout, init_seed };
        spec.validate()
            .map_err(|e| Error::parse(path, no, format!("invalid architecture: {e}")))?;
        let mut model = Mlp::init(spec)?;
        if model.param_count() != count {
            return Err(Error::parse(
                path,
                no,
                format!("parameter count {count} does not match architecture ({})", model.param_count()),
            ));
        }
        for idx in 0..count {
            let (no, line) = next_line("parameter value")?;
            let v: f64 = line
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, no, format!("bad parameter value '{}'", line.trim())))?;
            model.set_param(idx, v);
        }
        Ok(model)
    }
}

impl Classifier for Mlp {
    fn input_dim(&self) -> usize {
        self.spec.input_dim
    }

    fn classes(&self) -> usize {
        self.spec.classes
    }

    fn logits(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        let batch = x.insert_axis(ndarray::Axis(0));
        self.forward_eval(batch).row(0).to_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::argmax_tiebreak;
    use ndarray::array;

    fn small_spec() -> MlpSpec {
        MlpSpec::new(2, vec![8], 3, 42)
    }

    #[test]
    fn init_is_deterministic_and_glorot_bounded() {
        let a = Mlp::init(small_spec()).unwrap();
        let b = Mlp::init(small_spec()).unwrap();
        for idx in 0..a.param_count() {
            assert_eq!(a.get_param(idx).to_bits(), b.get_param(idx).to_bits());
        }
        let (weights, biases) = a.layers();
        let s0 = (6.0 / (2.0 + 8.0)).sqrt();
        assert!(weights[0].iter().all(|&w| w.abs() <= s0));
        let s1 = (6.0 / (8.0 + 3.0)).sqrt();
        assert!(weights[1].iter().all(|&w| w.abs() <= s1));
        assert!(biases.iter().all(|b| b.iter().all(|&x| x == 0.0)));
        // Different seeds change the draw.
        let mut other = small_spec();
        other.init_seed = 43;
        let c = Mlp::init(other).unwrap();
        assert!((0..a.param_count()).any(|i| a.get_param(i) != c.get_param(i)));
    }

    #[test]
    fn empty_hidden_is_a_linear_model() {
        let mut model = Mlp::init(MlpSpec::new(2, vec![], 3, 1)).unwrap();
        for idx in 0..model.param_count() {
            model.set_param(idx, 0.1 * (idx as f64 + 1.0));
        }
        let x = array![[1.0, -2.0]];
        let logits = model.forward_eval(x.view());
        let (weights, biases) = model.layers();
        for j in 0..3 {
            let expect = weights[0][[0, j]] * 1.0 + weights[0][[1, j]] * (-2.0) + biases[0][j];
            assert!((logits[[0, j]] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn eval_and_train_agree_without_dropout() {
        let model = Mlp::init(MlpSpec::new(3, vec![5, 4], 2, 7)).unwrap();
        let x = Array2::from_shape_fn((6, 3), |(i, j)| (i as f64 - j as f64) / 3.0);
        let mut rng = Rng::new(0);
        let trace = model.forward_train(x.view(), &mut rng);
        let eval = model.forward_eval(x.view());
        for (a, b) in trace.logits.iter().zip(eval.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn dropout_expectation_matches_eval_mode() {
        let spec = MlpSpec::new(2, vec![16], 2, 3).with_dropout(vec![0.4]);
        let model = Mlp::init(spec).unwrap();
        let x = array![[0.7, -1.3]];
        let eval_hidden = {
            // Recompute the hidden layer by hand for the eval reference.
            let (weights, biases) = model.layers();
            let z = x.dot(&weights[0]) + &biases[0];
            z.mapv(|v| v.max(0.0))
        };
        let mut rng = Rng::new(99);
        let trials = 10_000;
        let mut sums = vec![0.0; 16];
        let mut sq_sums = vec![0.0; 16];
        for _ in 0..trials {
            let trace = model.forward_train(x.view(), &mut rng);
            for j in 0..16 {
                let v = trace.activations[0][[0, j]];
                sums[j] += v;
                sq_sums[j] += v * v;
            }
        }
        for j in 0..16 {
            let mean = sums[j] / trials as f64;
            let var = sq_sums[j] / trials as f64 - mean * mean;
            let se = (var / trials as f64).sqrt();
            let expect = eval_hidden[[0, j]];
            assert!(
                (mean - expect).abs() <= 3.0 * se.max(1e-12),
                "unit {j}: mean {mean} vs eval {expect} (se {se})"
            );
        }
    }

    #[test]
    fn output_bias_shift_preserves_predictions() {
        let model = Mlp::init(MlpSpec::new(2, vec![6], 4, 11)).unwrap();
        let mut shifted = model.clone();
        {
            let (_, biases) = shifted.layers_mut();
            let last = biases.len() - 1;
            biases[last] += 10.0;
        }
        let x = Array2::from_shape_fn((20, 2), |(i, j)| ((i * 3 + j) as f64).sin());
        let a = model.forward_eval(x.view());
        let b = shifted.forward_eval(x.view());
        for row in 0..20 {
            let pa = argmax_tiebreak(&a.row(row).to_vec()).unwrap();
            let pb = argmax_tiebreak(&b.row(row).to_vec()).unwrap();
            assert_eq!(pa, pb);
        }
    }

    #[test]
    fn zero_weight_linear_cce_bias_gradient_is_the_frequency_gap() {
        // With all-zero parameters the softmax is uniform, so the bias
        // gradient is u - mean(e_y): zero for a class-balanced batch.
        let mut model = Mlp::init(MlpSpec::new(2, vec![], 3, 5)).unwrap();
        for idx in 0..model.param_count() {
            model.set_param(idx, 0.0);
        }
        let x = Array2::from_shape_fn((6, 2), |(i, j)| (i + j) as f64);
        let y = vec![0, 1, 2, 0, 1, 2];
        let mut rng = Rng::new(0);
        let trace = model.forward_train(x.view(), &mut rng);
        let (grads, loss) = model.backward(&trace, &y, LossKind::Cce).unwrap();
        assert!((loss - (3f64).ln()).abs() < 1e-12);
        for j in 0..3 {
            assert!(grads.biases[0][j].abs() < 1e-15, "bias grad {}", grads.biases[0][j]);
        }
        // Unbalanced batch: gradient = 1/3 - empirical frequency.
        let y = vec![0, 0, 0, 0, 1, 2];
        let trace = model.forward_train(x.view(), &mut rng);
        let (grads, _) = model.backward(&trace, &y, LossKind::Cce).unwrap();
        let freq = [4.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0];
        for j in 0..3 {
            assert!((grads.biases[0][j] - (1.0 / 3.0 - freq[j])).abs() < 1e-15);
        }
    }

    #[test]
    fn duplicating_the_batch_leaves_mean_gradients_unchanged() {
        let model = Mlp::init(MlpSpec::new(3, vec![5], 3, 13)).unwrap();
        let x = Array2::from_shape_fn((4, 3), |(i, j)| ((i + 2 * j) as f64).cos());
        let y = vec![0, 2, 1, 1];
        let x2 = ndarray::concatenate![ndarray::Axis(0), x, x];
        let y2: Vec<usize> = y.iter().chain(y.iter()).copied().collect();
        let mut rng = Rng::new(0);
        let (g1, l1) = model
            .backward(&model.forward_train(x.view(), &mut rng), &y, LossKind::Mse)
            .unwrap();
        let (g2, l2) = model
            .backward(&model.forward_train(x2.view(), &mut rng), &y2, LossKind::Mse)
            .unwrap();
        assert!((l1 - l2).abs() < 1e-14);
        for (a, b) in g1.weights.iter().zip(g2.weights.iter()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn backward_rejects_mismatched_labels_and_zero_one() {
        let model = Mlp::init(small_spec()).unwrap();
        let x = Array2::zeros((3, 2));
        let mut rng = Rng::new(0);
        let trace = model.forward_train(x.view(), &mut rng);
        assert!(model.backward(&trace, &[0, 1], LossKind::Cce).is_err());
        assert!(matches!(
            model.backward(&trace, &[0, 1, 2], LossKind::ZeroOne),
            Err(Error::UnsupportedGradient(_))
        ));
    }

    #[test]
    fn checkpoint_round_trip_is_exact() {
        let spec = MlpSpec::new(3, vec![7, 5], 4, 21).with_dropout(vec![0.25, 0.5]);
        let model = Mlp::init(spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.txt");
        model.save(&path).unwrap();
        let back = Mlp::load(&path).unwrap();
        assert_eq!(back.spec(), model.spec());
        for idx in 0..model.param_count() {
            assert_eq!(model.get_param(idx).to_bits(), back.get_param(idx).to_bits());
        }
    }

    #[test]
    fn checkpoint_errors_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");

        std::fs::write(&path, "not a checkpoint\n").unwrap();
        let err = Mlp::load(&path).unwrap_err().to_string();
        assert!(err.contains(":1:"), "{err}");

        std::fs::write(
            &path,
            "mlp-checkpoint v1\ninput_dim 2\nclasses 3\nhidden\ndropout\ninit_seed 1\nparams 9\n1.0\n2.0\n",
        )
        .unwrap();
        let err = Mlp::load(&path).unwrap_err().to_string();
        assert!(err.contains("missing"), "{err}");

        std::fs::write(
            &path,
            "mlp-checkpoint v1\ninput_dim 2\nclasses 3\nhidden\ndropout\ninit_seed 1\nparams 9\n1.0\n2.0\noops\n3into the void\n4\n5\n6\n7\n8\n",
        )
        .unwrap();
        let err = Mlp::load(&path).unwrap_err().to_string();
        assert!(err.contains(":10:"), "{err}");
    }

    #[test]
    fn nearest_mean_classifier_orders_by_distance() {
        let means = array![[0.0, 0.0], [4.0, 0.0], [0.0, 4.0]];
        let clf = LinearSoftmax::nearest_mean(&means, 1.0);
        let cases = [
            (array![0.5, 0.5], 0usize),
            (array![3.6, 0.2], 1usize),
            (array![0.3, 3.1], 2usize),
        ];
        for (x, want) in cases {
            let logits = clf.logits(x.view());
            assert_eq!(argmax_tiebreak(&logits.to_vec()).unwrap(), want);
        }
    }

    #[test]
    fn spec_validation() {
        assert!(MlpSpec::new(0, vec![], 2, 1).validate().is_err());
        assert!(MlpSpec::new(2, vec![], 1, 1).validate().is_err());
        assert!(MlpSpec::new(2, vec![0], 2, 1).validate().is_err());
        assert!(MlpSpec::new(2, vec![4], 2, 1).with_dropout(vec![]).validate().is_err());
        assert!(MlpSpec::new(2, vec![4], 2, 1).with_dropout(vec![1.0]).validate().is_err());
        assert!(MlpSpec::new(2, vec![4], 2, 1).with_dropout(vec![0.5]).validate().is_ok());
    }
}
