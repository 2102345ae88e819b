use super::adam::AdamState;
use super::matrix::DenseMatrix;
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, serde::Serialize)]
pub struct NetConfig {
    pub hidden: usize,
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            hidden: 100,
            lr: 0.01,
            epochs: 200,
            seed: 0,
        }
    }
}

/// One-hidden-layer network mapping a lemma vector to a target-tense vector:
/// `out = tanh(x·w1 + b1)·w2 + b2`.
#[derive(Debug, Clone)]
pub struct TranslationNet {
    w1: DenseMatrix, // input_dim x hidden
    b1: Vec<f64>,
    w2: DenseMatrix, // hidden x input_dim
    b2: Vec<f64>,
}

impl TranslationNet {
    /// Seeded uniform init in ±1/√fan_in, drawn in a fixed order (w1, b1,
    /// w2, b2) so a seed pins every weight.
    pub fn init(dim: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let in_bound = 1.0 / (dim as f64).sqrt();
        let hid_bound = 1.0 / (hidden as f64).sqrt();
        let mut draw = |n: usize, bound: f64| -> Vec<f64> {
            (0..n).map(|_| rng.gen_range(-bound..bound)).collect()
        };
        let w1 = DenseMatrix::from_vec(dim, hidden, draw(dim * hidden, in_bound)).unwrap();
        let b1 = draw(hidden, in_bound);
        let w2 = DenseMatrix::from_vec(hidden, dim, draw(hidden * dim, hid_bound)).unwrap();
        let b2 = draw(dim, hid_bound);
        TranslationNet { w1, b1, w2, b2 }
    }

    pub fn from_parts(w1: DenseMatrix, b1: Vec<f64>, w2: DenseMatrix, b2: Vec<f64>) -> Result<Self> {
        if w1.cols() != b1.len() || w2.rows() != b1.len() || w2.cols() != b2.len() {
            return Err(Error::Dimension(format!(
                "inconsistent layer shapes: w1 {}x{}, b1 {}, w2 {}x{}, b2 {}",
                w1.rows(),
                w1.cols(),
                b1.len(),
                w2.rows(),
                w2.cols(),
                b2.len()
            )));
        }
        Ok(TranslationNet { w1, b1, w2, b2 })
    }

    pub fn input_dim(&self) -> usize {
        self.w1.rows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.b1.len()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (_, out) = self.forward_cached(x)?;
        Ok(out)
    }

    fn forward_cached(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "net expects {}-dim input, got {}",
                self.input_dim(),
                x.len()
            )));
        }
        let mut hidden = self.w1.vecmat(x)?;
        for (h, &b) in hidden.iter_mut().zip(&self.b1) {
            *h = (*h + b).tanh();
        }
        let mut out = self.w2.vecmat(&hidden)?;
        for (o, &b) in out.iter_mut().zip(&self.b2) {
            *o += b;
        }
        Ok((hidden, out))
    }

    /// All parameters flattened in the fixed order w1, b1, w2, b2.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.param_count());
        p.extend_from_slice(self.w1.data());
        p.extend_from_slice(&self.b1);
        p.extend_from_slice(self.w2.data());
        p.extend_from_slice(&self.b2);
        p
    }

    pub fn param_count(&self) -> usize {
        let (d, h) = (self.input_dim(), self.hidden_dim());
        d * h + h + h * d + d
    }

    fn set_params(&mut self, flat: &[f64]) {
        let (d, h) = (self.input_dim(), self.hidden_dim());
        debug_assert_eq!(flat.len(), self.param_count());
        let (w1, rest) = flat.split_at(d * h);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(h * d);
        self.w1 = DenseMatrix::from_vec(d, h, w1.to_vec()).unwrap();
        self.b1 = b1.to_vec();
        self.w2 = DenseMatrix::from_vec(h, d, w2.to_vec()).unwrap();
        self.b2 = b2.to_vec();
    }
}

fn validate_pairs(pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<usize> {
    let Some((first_x, first_y)) = pairs.first() else {
        return Err(Error::InvalidInput("no training pairs".into()));
    };
    let dim = first_x.len();
    if first_y.len() != dim {
        return Err(Error::Dimension(format!(
            "input dim {dim} but target dim {}",
            first_y.len()
        )));
    }
    for (i, (x, y)) in pairs.iter().enumerate() {
        if x.len() != dim || y.len() != dim {
            return Err(Error::Dimension(format!(
                "pair {i} has dims {}/{} but the first pair has {dim}",
                x.len(),
                y.len()
            )));
        }
    }
    Ok(dim)
}

/// Mean squared error over every output element of every pair.
pub fn mse_loss(net: &TranslationNet, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
    let dim = validate_pairs(pairs)?;
    let mut total = 0.0;
    for (x, y) in pairs {
        let out = net.forward(x)?;
        for (o, t) in out.iter().zip(y) {
            let r = o - t;
            total += r * r;
        }
    }
    Ok(total / (pairs.len() * dim) as f64)
}

/// Loss and flattened analytic gradient (same layout as [`TranslationNet::params`]).
fn loss_and_gradient(net: &TranslationNet, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<(f64, Vec<f64>)> {
    let d = validate_pairs(pairs)?;
    let h = net.hidden_dim();
    let scale = 1.0 / (pairs.len() * d) as f64;

    let mut loss = 0.0;
    let mut gw1 = vec![0.0; d * h];
    let mut gb1 = vec![0.0; h];
    let mut gw2 = vec![0.0; h * d];
    let mut gb2 = vec![0.0; d];

    for (x, y) in pairs {
        let (hidden, out) = net.forward_cached(x)?;
        let mut delta_out = vec![0.0; d];
        for k in 0..d {
            let r = out[k] - y[k];
            loss += r * r;
            delta_out[k] = 2.0 * r * scale;
        }
        let mut delta_hidden = vec![0.0; h];
        for j in 0..h {
            let row = net.w2.row(j);
            let mut acc = 0.0;
            for k in 0..d {
                gw2[j * d + k] += hidden[j] * delta_out[k];
                acc += row[k] * delta_out[k];
            }
            delta_hidden[j] = acc * (1.0 - hidden[j] * hidden[j]);
            gb1[j] += delta_hidden[j];
        }
        for (k, &dk) in delta_out.iter().enumerate() {
            gb2[k] += dk;
        }
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for j in 0..h {
                gw1[i * h + j] += xi * delta_hidden[j];
            }
        }
    }

    let mut flat = Vec::with_capacity(net.param_count());
    flat.extend_from_slice(&gw1);
    flat.extend_from_slice(&gb1);
    flat.extend_from_slice(&gw2);
    flat.extend_from_slice(&gb2);
    Ok((loss * scale, flat))
}

/// Full-batch Adam training of the translation network.
pub fn train_translation_net(
    pairs: &[(Vec<f64>, Vec<f64>)],
    config: &NetConfig,
) -> Result<TranslationNet> {
    let dim = validate_pairs(pairs)?;
    if config.hidden == 0 {
        return Err(Error::Config("hidden layer size must be at least 1".into()));
    }
    let mut net = TranslationNet::init(dim, config.hidden, config.seed);
    let mut params = net.params();
    let mut adam = AdamState::new(params.len(), config.lr);
    for _ in 0..config.epochs {
        let (_, grads) = loss_and_gradient(&net, pairs)?;
        adam.step(&mut params, &grads)?;
        net.set_params(&params);
    }
    Ok(net)
}

/// Central-difference check of the analytic gradient. Returns the maximum
/// relative error over all parameters, with the usual guard against dividing
/// by a vanishing gradient magnitude.
pub fn gradient_check(
    net: &TranslationNet,
    samples: &[(Vec<f64>, Vec<f64>)],
    epsilon: f64,
) -> Result<f64> {
    if epsilon <= 0.0 {
        return Err(Error::Config("epsilon must be positive".into()));
    }
    let (_, analytic) = loss_and_gradient(net, samples)?;
    let mut probe = net.clone();
    let base = net.params();
    let mut worst = 0.0f64;
    for i in 0..base.len() {
        let mut params = base.clone();
        params[i] = base[i] + epsilon;
        probe.set_params(&params);
        let plus = mse_loss(&probe, samples)?;
        params[i] = base[i] - epsilon;
        probe.set_params(&params);
        let minus = mse_loss(&probe, samples)?;
        let numeric = (plus - minus) / (2.0 * epsilon);
        // The floor keeps truncation noise in the numeric estimate from
        // dominating the ratio when the true gradient is essentially zero.
        let denom = analytic[i].abs().max(numeric.abs()).max(1e-4);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    Ok(worst)
}
