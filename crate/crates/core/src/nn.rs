//! A small dense-network engine: dense layers with ELU, ReLU or linear
//! activation, affine-free batch normalization, MSE and softmax
//! cross-entropy losses, Adam, and finite-difference gradient checking.

use ndarray::{Array1, Array2, Axis, Zip};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("batch normalization needs at least 2 examples in training mode")]
    BatchTooSmall,
    #[error("non-finite loss")]
    NonFinite,
    #[error("weights file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Linear,
    Elu,
    Relu,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Linear => z,
            Activation::Elu => {
                if z > 0.0 {
                    z
                } else {
                    z.exp_m1()
                }
            }
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative given the pre-activation `z` and output `a`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Elu => {
                if z > 0.0 {
                    1.0
                } else {
                    a + 1.0
                }
            }
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    /// `in × out`.
    pub w: Array2<f64>,
    pub b: Array1<f64>,
    pub activation: Activation,
}

impl Dense {
    /// Uniform initialization scaled by fan-in (He for ELU/ReLU, LeCun for
    /// linear), zero bias.
    pub fn new<R: Rng>(inputs: usize, outputs: usize, activation: Activation, rng: &mut R) -> Dense {
        let gain = match activation {
            Activation::Linear => 3.0,
            _ => 6.0,
        };
        let limit = (gain / inputs as f64).sqrt();
        Dense {
            w: Array2::from_shape_simple_fn((inputs, outputs), || rng.random_range(-limit..limit)),
            b: Array1::zeros(outputs),
            activation,
        }
    }
}

/// Batch normalization without scale or shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchNorm {
    pub running_mean: Array1<f64>,
    pub running_var: Array1<f64>,
    pub eps: f64,
    pub momentum: f64,
}

impl BatchNorm {
    pub fn new(width: usize) -> BatchNorm {
        BatchNorm {
            running_mean: Array1::zeros(width),
            running_var: Array1::ones(width),
            eps: 1e-5,
            momentum: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Dense(Dense),
    BatchNorm(BatchNorm),
}

impl Layer {
    fn inputs(&self) -> usize {
        match self {
            Layer::Dense(d) => d.w.nrows(),
            Layer::BatchNorm(b) => b.running_mean.len(),
        }
    }

    fn outputs(&self) -> usize {
        match self {
            Layer::Dense(d) => d.w.ncols(),
            Layer::BatchNorm(b) => b.running_mean.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Batch statistics, running statistics updated.
    Train,
    /// Running statistics.
    Infer,
}

#[derive(Debug, Clone)]
enum LayerCache {
    Dense { input: Array2<f64>, z: Array2<f64>, a: Array2<f64> },
    BatchNorm { xhat: Array2<f64>, inv_std: Array1<f64> },
    Frozen,
}

/// What [`Net::backward`] needs from a training-mode forward pass.
#[derive(Debug, Clone)]
pub struct Cache {
    layers: Vec<LayerCache>,
}

/// Parameter gradients, one `(dw, db)` per dense layer in order.
#[derive(Debug, Clone, PartialEq)]
pub struct Grads {
    pub dense: Vec<(Array2<f64>, Array1<f64>)>,
}

impl Grads {
    pub fn add(&mut self, other: &Grads) {
        for ((w, b), (ow, ob)) in self.dense.iter_mut().zip(&other.dense) {
            *w += ow;
            *b += ob;
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        self.dense
            .iter()
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.flat().iter().fold(0.0, |m, g| m.max(g.abs()))
    }
}

/// A stack of layers applied in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub layers: Vec<Layer>,
}

impl Net {
    pub fn new(layers: Vec<Layer>) -> Result<Net, NnError> {
        for pair in layers.windows(2) {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(NnError::Shape(format!(
                    "layer with {} outputs feeds a layer with {} inputs",
                    pair[0].outputs(),
                    pair[1].inputs()
                )));
            }
        }
        Ok(Net { layers })
    }

    /// Dense layers of the given widths, `acts[i]` after layer `i`.
    pub fn mlp<R: Rng>(widths: &[usize], acts: &[Activation], rng: &mut R) -> Net {
        assert_eq!(widths.len(), acts.len() + 1);
        let layers = widths
            .windows(2)
            .zip(acts)
            .map(|(w, &a)| Layer::Dense(Dense::new(w[0], w[1], a, rng)))
            .collect();
        Net { layers }
    }

    pub fn inputs(&self) -> usize {
        self.layers.first().map_or(0, Layer::inputs)
    }

    pub fn outputs(&self) -> usize {
        self.layers.last().map_or(0, Layer::outputs)
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                Layer::Dense(d) => d.w.len() + d.b.len(),
                Layer::BatchNorm(_) => 0,
            })
            .sum()
    }

    pub fn params(&self) -> Vec<f64> {
        self.dense().flat_map(|d| d.w.iter().chain(d.b.iter()).copied()).collect()
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.param_count());
        let mut it = p.iter();
        for d in self.dense_mut() {
            for v in d.w.iter_mut().chain(d.b.iter_mut()) {
                *v = *it.next().expect("length checked");
            }
        }
    }

    fn dense(&self) -> impl Iterator<Item = &Dense> {
        self.layers.iter().filter_map(|l| match l {
            Layer::Dense(d) => Some(d),
            Layer::BatchNorm(_) => None,
        })
    }

    fn dense_mut(&mut self) -> impl Iterator<Item = &mut Dense> {
        self.layers.iter_mut().filter_map(|l| match l {
            Layer::Dense(d) => Some(d),
            Layer::BatchNorm(_) => None,
        })
    }

    /// Forward pass. Training mode also returns what `backward` needs and
    /// updates the batch-norm running statistics.
    pub fn forward(&mut self, x: &Array2<f64>, mode: Mode) -> Result<(Array2<f64>, Cache), NnError> {
        if x.ncols() != self.inputs() {
            return Err(NnError::Shape(format!(
                "input has {} columns, net expects {}",
                x.ncols(),
                self.inputs()
            )));
        }
        let has_bn = self.layers.iter().any(|l| matches!(l, Layer::BatchNorm(_)));
        if mode == Mode::Train && has_bn && x.nrows() < 2 {
            return Err(NnError::BatchTooSmall);
        }
        let mut h = x.to_owned();
        let mut caches = Vec::with_capacity(self.layers.len());
        for layer in &mut self.layers {
            let (next, cache) = match layer {
                Layer::Dense(d) => {
                    let z = h.dot(&d.w) + &d.b;
                    let a = z.mapv(|v| d.activation.apply(v));
                    let cache = if mode == Mode::Train {
                        LayerCache::Dense { input: h, z, a: a.clone() }
                    } else {
                        LayerCache::Frozen
                    };
                    (a, cache)
                }
                Layer::BatchNorm(bn) => match mode {
                    Mode::Train => {
                        let n = h.nrows() as f64;
                        let mean = h.mean_axis(Axis(0)).expect("non-empty batch");
                        let centered = &h - &mean;
                        let var = centered.mapv(|v| v * v).mean_axis(Axis(0)).expect("non-empty batch");
                        let inv_std = var.mapv(|v| 1.0 / (v + bn.eps).sqrt());
                        let xhat = &centered * &inv_std;
                        let m = bn.momentum;
                        bn.running_mean = &bn.running_mean * (1.0 - m) + &mean * m;
                        bn.running_var = &bn.running_var * (1.0 - m) + &var * (m * n / (n - 1.0));
                        (xhat.clone(), LayerCache::BatchNorm { xhat, inv_std })
                    }
                    Mode::Infer => {
                        let inv_std = bn.running_var.mapv(|v| 1.0 / (v + bn.eps).sqrt());
                        (((&h - &bn.running_mean) * &inv_std), LayerCache::Frozen)
                    }
                },
            };
            h = next;
            caches.push(cache);
        }
        Ok((h, Cache { layers: caches }))
    }

    /// Inference-mode forward pass.
    pub fn infer(&self, x: &Array2<f64>) -> Result<Array2<f64>, NnError> {
        if x.ncols() != self.inputs() {
            return Err(NnError::Shape(format!(
                "input has {} columns, net expects {}",
                x.ncols(),
                self.inputs()
            )));
        }
        let mut h = x.to_owned();
        for layer in &self.layers {
            h = match layer {
                Layer::Dense(d) => {
                    let act = d.activation;
                    (h.dot(&d.w) + &d.b).mapv_into(|v| act.apply(v))
                }
                Layer::BatchNorm(bn) => {
                    let inv_std = bn.running_var.mapv(|v| 1.0 / (v + bn.eps).sqrt());
                    (&h - &bn.running_mean) * &inv_std
                }
            };
        }
        Ok(h)
    }

    /// Gradients of the loss with respect to the parameters and the input,
    /// given its gradient with respect to the output.
    pub fn backward(&self, cache: &Cache, grad_out: &Array2<f64>) -> Result<(Grads, Array2<f64>), NnError> {
        if cache.layers.len() != self.layers.len() {
            return Err(NnError::Shape("cache does not belong to this net".into()));
        }
        let mut g = grad_out.to_owned();
        let mut dense = Vec::new();
        for (layer, lc) in self.layers.iter().zip(&cache.layers).rev() {
            g = match (layer, lc) {
                (Layer::Dense(d), LayerCache::Dense { input, z, a }) => {
                    if g.dim() != z.dim() {
                        return Err(NnError::Shape("gradient does not match the cached batch".into()));
                    }
                    let mut dz = g;
                    Zip::from(&mut dz)
                        .and(z)
                        .and(a)
                        .for_each(|g, &z, &a| *g *= d.activation.derivative(z, a));
                    dense.push((input.t().dot(&dz), dz.sum_axis(Axis(0))));
                    dz.dot(&d.w.t())
                }
                (Layer::BatchNorm(_), LayerCache::BatchNorm { xhat, inv_std }) => {
                    let n = g.nrows() as f64;
                    let sum_g = g.sum_axis(Axis(0));
                    let sum_gx = (&g * xhat).sum_axis(Axis(0));
                    ((&g * n - &sum_g) - &(xhat * &sum_gx)) * &(inv_std / n)
                }
                _ => return Err(NnError::Shape("cache is not from a training-mode pass".into())),
            };
        }
        dense.reverse();
        Ok((Grads { dense }, g))
    }

    pub fn zero_grads(&self) -> Grads {
        Grads {
            dense: self
                .dense()
                .map(|d| (Array2::zeros(d.w.raw_dim()), Array1::zeros(d.b.len())))
                .collect(),
        }
    }
}

/// Mean squared error over all entries, and its gradient.
pub fn loss_mse(pred: &Array2<f64>, target: &Array2<f64>) -> Result<(f64, Array2<f64>), NnError> {
    if pred.dim() != target.dim() {
        return Err(NnError::Shape(format!("prediction {:?} vs target {:?}", pred.dim(), target.dim())));
    }
    let diff = pred - target;
    let n = diff.len() as f64;
    let loss = diff.iter().map(|d| d * d).sum::<f64>() / n;
    Ok((loss, diff * (2.0 / n)))
}

pub fn softmax(logits: &Array2<f64>) -> Array2<f64> {
    let mut p = logits.to_owned();
    for mut row in p.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let s = row.sum();
        row /= s;
    }
    p
}

/// Mean softmax cross-entropy over the batch, and its gradient.
pub fn loss_softmax_ce(logits: &Array2<f64>, labels: &[usize]) -> Result<(f64, Array2<f64>), NnError> {
    if logits.nrows() != labels.len() {
        return Err(NnError::Shape(format!("{} rows vs {} labels", logits.nrows(), labels.len())));
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= logits.ncols()) {
        return Err(NnError::Shape(format!("label {l} with {} classes", logits.ncols())));
    }
    let n = labels.len() as f64;
    let mut grad = softmax(logits);
    let mut loss = 0.0;
    for (mut row, &l) in grad.rows_mut().into_iter().zip(labels) {
        loss -= row[l].max(f64::MIN_POSITIVE).ln();
        row[l] -= 1.0;
        row /= n;
    }
    Ok((loss / n, grad))
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(lr: f64) -> Adam {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    /// Updates `params` in place from `grads` of the same length.
    pub fn update(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), grads.len());
        if self.m.len() != params.len() {
            self.m = vec![0.0; params.len()];
            self.v = vec![0.0; params.len()];
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let mhat = self.m[i] / c1;
            let vhat = self.v[i] / c2;
            params[i] -= self.lr * mhat / (vhat.sqrt() + self.eps);
        }
    }

    /// One step on a net's parameters.
    pub fn step_net(&mut self, net: &mut Net, grads: &Grads) {
        let mut p = net.params();
        self.update(&mut p, &grads.flat());
        net.set_params(&p);
    }
}

/// Largest relative difference between the analytic gradient of `loss` and
/// central differences with step `h`, over every parameter. `loss` returns
/// the loss at the given flat parameters and, when asked, the analytic
/// gradient. Entries where both are below `floor` in magnitude are compared
/// against `floor` instead.
pub fn grad_check(
    params: &[f64],
    mut loss: impl FnMut(&[f64], bool) -> (f64, Option<Vec<f64>>),
    h: f64,
    floor: f64,
) -> f64 {
    let (_, analytic) = loss(params, true);
    let analytic = analytic.expect("gradient requested");
    assert_eq!(analytic.len(), params.len());
    let mut p = params.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..p.len() {
        let orig = p[i];
        p[i] = orig + h;
        let up = loss(&p, false).0;
        p[i] = orig - h;
        let down = loss(&p, false).0;
        p[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        let scale = analytic[i].abs().max(numeric.abs()).max(floor);
        worst = worst.max((analytic[i] - numeric).abs() / scale);
    }
    worst
}

/// [`grad_check`] for a single net under a loss on its training-mode output.
pub fn grad_check_net(
    net: &Net,
    x: &Array2<f64>,
    loss: impl Fn(&Array2<f64>) -> (f64, Array2<f64>),
) -> f64 {
    let mut work = net.clone();
    grad_check(
        &net.params(),
        |p, want_grad| {
            work.set_params(p);
            let (out, cache) = work.forward(x, Mode::Train).expect("shapes fixed");
            let (l, g) = loss(&out);
            let grad = want_grad.then(|| work.backward(&cache, &g).expect("same cache").0.flat());
            (l, grad)
        },
        1e-4,
        1e-6,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    fn random(rows: usize, cols: usize, r: &mut ChaCha8Rng) -> Array2<f64> {
        Array2::from_shape_simple_fn((rows, cols), || r.random_range(-1.0..1.0))
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let mut net = Net::new(vec![Layer::Dense(Dense {
            w: Array2::eye(3),
            b: Array1::zeros(3),
            activation: Activation::Linear,
        })])
        .unwrap();
        let x = array![[1.0, -2.0, 3.0], [0.5, 0.0, -1.0]];
        assert_eq!(net.forward(&x, Mode::Train).unwrap().0, x);
        assert_eq!(net.infer(&x).unwrap(), x);
    }

    #[test]
    fn batch_norm_standardizes_columns() {
        let mut r = rng();
        let mut net = Net::new(vec![Layer::BatchNorm(BatchNorm::new(4))]).unwrap();
        let x = random(32, 4, &mut r) * 3.0 + 2.0;
        let (y, _) = net.forward(&x, Mode::Train).unwrap();
        for col in y.columns() {
            assert!(col.mean().unwrap().abs() < 1e-12);
            let var = col.mapv(|v| v * v).mean().unwrap();
            assert!((var - 1.0).abs() < 1e-3, "{var}");
        }
    }

    #[test]
    fn elu_shape() {
        assert_eq!(Activation::Elu.apply(0.0), 0.0);
        assert!((Activation::Elu.apply(-50.0) + 1.0).abs() < 1e-12);
        assert_eq!(Activation::Elu.apply(2.5), 2.5);
    }

    #[test]
    fn single_example_batch_norm_training_is_an_error() {
        let mut net = Net::new(vec![Layer::BatchNorm(BatchNorm::new(2))]).unwrap();
        let x = array![[1.0, 2.0]];
        assert_eq!(net.forward(&x, Mode::Train).unwrap_err(), NnError::BatchTooSmall);
        assert!(net.forward(&x, Mode::Infer).is_ok());
        assert!(matches!(net.forward(&array![[1.0]], Mode::Infer), Err(NnError::Shape(_))));
    }

    #[test]
    fn losses_at_their_minimum() {
        let p = array![[1.0, 2.0], [3.0, 4.0]];
        let (l, g) = loss_mse(&p, &p).unwrap();
        assert_eq!(l, 0.0);
        assert!(g.iter().all(|&v| v == 0.0));
        let (ce, g) = loss_softmax_ce(&Array2::zeros((3, 5)), &[0, 4, 2]).unwrap();
        assert!((ce - 5f64.ln()).abs() < 1e-12);
        assert!((g[[0, 0]] - (0.2 - 1.0) / 3.0).abs() < 1e-15);
        assert!((g[[0, 1]] - 0.2 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_output_gradient_gives_zero_parameter_gradients() {
        let mut r = rng();
        let mut net = Net::mlp(&[4, 6, 3], &[Activation::Elu, Activation::Linear], &mut r);
        let x = random(5, 4, &mut r);
        let (y, cache) = net.forward(&x, Mode::Train).unwrap();
        let (g, _) = net.backward(&cache, &Array2::zeros(y.raw_dim())).unwrap();
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn adam_ignores_zero_gradients_and_tends_to_lr_steps() {
        let mut a = Adam::new(0.01);
        let mut p = vec![1.0, -2.0];
        a.update(&mut p, &[0.0, 0.0]);
        assert_eq!(p, vec![1.0, -2.0]);
        let mut a = Adam::new(0.01);
        let mut p = vec![0.0, 0.0];
        for _ in 0..2000 {
            let before = p.clone();
            a.update(&mut p, &[0.3, -7.0]);
            if a.step > 1000 {
                assert!(((before[0] - p[0]) - 0.01).abs() < 1e-6);
                assert!(((p[1] - before[1]) - 0.01).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn linear_net_gradients_are_exact() {
        let mut r = rng();
        let net = Net::mlp(&[5, 3], &[Activation::Linear], &mut r);
        let x = random(6, 5, &mut r);
        let t = random(6, 3, &mut r);
        let err = grad_check_net(&net, &x, |out| loss_mse(out, &t).unwrap());
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn batch_norm_net_gradients_match_finite_differences() {
        let mut r = rng();
        let mut layers = Net::mlp(&[6, 5, 4], &[Activation::Elu, Activation::Linear], &mut r).layers;
        layers.push(Layer::BatchNorm(BatchNorm::new(4)));
        layers.push(Layer::Dense(Dense::new(4, 3, Activation::Relu, &mut r)));
        let net = Net::new(layers).unwrap();
        let x = random(8, 6, &mut r);
        let t = random(8, 3, &mut r);
        let err = grad_check_net(&net, &x, |out| loss_mse(out, &t).unwrap());
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn softmax_head_gradients_match_finite_differences() {
        let mut r = rng();
        let net = Net::mlp(&[7, 8, 4], &[Activation::Relu, Activation::Linear], &mut r);
        let x = random(9, 7, &mut r);
        let labels = [0, 1, 2, 3, 0, 1, 2, 3, 3];
        let err = grad_check_net(&net, &x, |out| loss_softmax_ce(out, &labels).unwrap());
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn duplicating_the_batch_keeps_mean_loss_gradients() {
        let mut r = rng();
        let mut layers = Net::mlp(&[4, 6, 3], &[Activation::Elu, Activation::Linear], &mut r).layers;
        layers.push(Layer::BatchNorm(BatchNorm::new(3)));
        let mut net = Net::new(layers).unwrap();
        let x = random(5, 4, &mut r);
        let t = random(5, 3, &mut r);
        let grads = |net: &mut Net, x: &Array2<f64>, t: &Array2<f64>| {
            let (y, c) = net.forward(x, Mode::Train).unwrap();
            let (_, g) = loss_mse(&y, t).unwrap();
            net.backward(&c, &g).unwrap().0.flat()
        };
        let once = grads(&mut net, &x, &t);
        let xx = ndarray::concatenate![Axis(0), x, x];
        let tt = ndarray::concatenate![Axis(0), t, t];
        let twice = grads(&mut net, &xx, &tt);
        for (a, b) in once.iter().zip(&twice) {
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn running_statistics_converge() {
        let mut r = rng();
        let mut net = Net::new(vec![Layer::BatchNorm(BatchNorm::new(3))]).unwrap();
        let draw = |r: &mut ChaCha8Rng, n| random(n, 3, r) * array![1.0, 4.0, 0.5] + array![3.0, -1.0, 10.0];
        for _ in 0..200 {
            let x = draw(&mut r, 512);
            net.forward(&x, Mode::Train).unwrap();
        }
        let y = net.infer(&draw(&mut r, 20_000)).unwrap();
        for col in y.columns() {
            let mean = col.mean().unwrap();
            let std = col.std(0.0);
            assert!(mean.abs() < 0.05 && (std - 1.0).abs() < 0.05, "{mean} {std}");
        }
    }

    #[test]
    fn weights_round_trip_through_json() {
        let mut r = rng();
        let mut layers = Net::mlp(&[3, 4], &[Activation::Relu], &mut r).layers;
        layers.push(Layer::BatchNorm(BatchNorm::new(4)));
        let net = Net::new(layers).unwrap();
        let text = serde_json::to_string(&net).unwrap();
        assert_eq!(serde_json::from_str::<Net>(&text).unwrap(), net);
    }
}
