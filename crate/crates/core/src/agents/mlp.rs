//! A 1-hidden-layer Q-network trained with plain minibatch SGD.
//!
//! The network maps the raw observation (observed factor, plus the opponent's
//! reputation bit when reputation is enabled) through a ReLU layer of width 4
//! to one Q-value per action:
//!
//! ```text
//! Q(x) = W2 · relu(W1 · x + b1) + b2
//! ```

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Observation, QFunction, Transition};
use crate::error::{Error, Result};

pub const HIDDEN: usize = 4;
pub const OUTPUTS: usize = 2;
pub const MAX_INPUTS: usize = 2;

/// Multi-layer perceptron `d_in -> 4 (ReLU) -> 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    d_in: usize,
    w1: [[f64; MAX_INPUTS]; HIDDEN],
    b1: [f64; HIDDEN],
    w2: [[f64; HIDDEN]; OUTPUTS],
    b2: [f64; OUTPUTS],
}

/// One training example with its target held fixed for the step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub input: [f64; MAX_INPUTS],
    pub action: usize,
    pub target: f64,
}

impl Mlp {
    pub fn zeros(d_in: usize) -> Result<Self> {
        if !(1..=MAX_INPUTS).contains(&d_in) {
            return Err(Error::InvalidArgument(format!(
                "input width must be 1 or 2, got {d_in}"
            )));
        }
        Ok(Mlp {
            d_in,
            w1: [[0.0; MAX_INPUTS]; HIDDEN],
            b1: [0.0; HIDDEN],
            w2: [[0.0; HIDDEN]; OUTPUTS],
            b2: [0.0; OUTPUTS],
        })
    }

    /// Every parameter drawn uniformly from `[-scale, scale]`.
    pub fn random<R: Rng + ?Sized>(d_in: usize, scale: f64, rng: &mut R) -> Result<Self> {
        let mut net = Mlp::zeros(d_in)?;
        let params: Vec<f64> = (0..net.num_params())
            .map(|_| rng.random_range(-scale..=scale))
            .collect();
        net.set_params(&params)?;
        Ok(net)
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn num_params(&self) -> usize {
        HIDDEN * self.d_in + HIDDEN + OUTPUTS * HIDDEN + OUTPUTS
    }

    /// Flat parameter vector, layer-major and row-major:
    /// `W1 (4 x d_in), b1 (4), W2 (2 x 4), b2 (2)`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.num_params());
        for row in &self.w1 {
            p.extend_from_slice(&row[..self.d_in]);
        }
        p.extend_from_slice(&self.b1);
        for row in &self.w2 {
            p.extend_from_slice(row);
        }
        p.extend_from_slice(&self.b2);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.num_params() {
            return Err(Error::InvalidArgument(format!(
                "expected {} parameters, got {}",
                self.num_params(),
                p.len()
            )));
        }
        let mut it = p.iter().copied();
        for row in &mut self.w1 {
            for w in &mut row[..self.d_in] {
                *w = it.next().unwrap();
            }
        }
        for b in &mut self.b1 {
            *b = it.next().unwrap();
        }
        for row in &mut self.w2 {
            for w in row.iter_mut() {
                *w = it.next().unwrap();
            }
        }
        for b in &mut self.b2 {
            *b = it.next().unwrap();
        }
        Ok(())
    }

    /// Whitespace-separated parameters in [`Mlp::params`] order, preceded
    /// by the input width.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.d_in);
        for (i, v) in self.params().iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            write!(s, "{v:e}").unwrap();
        }
        s.push('\n');
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let d_in: usize = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::InvalidArgument("missing input width".into()))?;
        let params = tokens
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("bad parameter {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut net = Mlp::zeros(d_in)?;
        net.set_params(&params)?;
        Ok(net)
    }

    pub fn encode(&self, obs: &Observation) -> Result<[f64; MAX_INPUTS]> {
        let width = 1 + obs.opponent_rep.is_some() as usize;
        if width != self.d_in {
            return Err(Error::InvalidArgument(format!(
                "observation has width {width}, network expects {}",
                self.d_in
            )));
        }
        Ok([obs.f_obs, obs.opponent_rep.map_or(0.0, |r| r.value())])
    }

    pub fn forward(&self, input: &[f64]) -> Result<[f64; OUTPUTS]> {
        if input.len() != self.d_in {
            return Err(Error::InvalidArgument(format!(
                "input has width {}, network expects {}",
                input.len(),
                self.d_in
            )));
        }
        let mut x = [0.0; MAX_INPUTS];
        x[..self.d_in].copy_from_slice(input);
        Ok(self.forward_raw(&x).0)
    }

    #[inline]
    fn forward_raw(&self, x: &[f64; MAX_INPUTS]) -> ([f64; OUTPUTS], [f64; HIDDEN]) {
        let mut h = [0.0; HIDDEN];
        for (k, hk) in h.iter_mut().enumerate() {
            let mut z = self.b1[k];
            for (w, xi) in self.w1[k][..self.d_in].iter().zip(x) {
                z += w * xi;
            }
            *hk = z.max(0.0);
        }
        let mut out = self.b2;
        for (o, q) in out.iter_mut().enumerate() {
            for (w, hk) in self.w2[o].iter().zip(&h) {
                *q += w * hk;
            }
        }
        (out, h)
    }

    /// Mean squared TD error over `batch` and its gradient in
    /// [`Mlp::params`] order. Targets are constants.
    pub fn loss_and_grad(&self, batch: &[Sample]) -> (f64, Vec<f64>) {
        let mut g_w1 = [[0.0; MAX_INPUTS]; HIDDEN];
        let mut g_b1 = [0.0; HIDDEN];
        let mut g_w2 = [[0.0; HIDDEN]; OUTPUTS];
        let mut g_b2 = [0.0; OUTPUTS];
        let mut loss = 0.0;
        let scale = 1.0 / batch.len() as f64;
        for s in batch {
            let (q, h) = self.forward_raw(&s.input);
            let err = q[s.action] - s.target;
            loss += err * err * scale;
            let dq = 2.0 * err * scale;
            g_b2[s.action] += dq;
            for k in 0..HIDDEN {
                g_w2[s.action][k] += dq * h[k];
                if h[k] > 0.0 {
                    let dz = dq * self.w2[s.action][k];
                    g_b1[k] += dz;
                    for i in 0..self.d_in {
                        g_w1[k][i] += dz * s.input[i];
                    }
                }
            }
        }
        let grad = Mlp {
            d_in: self.d_in,
            w1: g_w1,
            b1: g_b1,
            w2: g_w2,
            b2: g_b2,
        }
        .params();
        (loss, grad)
    }

    /// Mean squared TD error over `batch` (targets held fixed).
    pub fn loss(&self, batch: &[Sample]) -> f64 {
        let scale = 1.0 / batch.len() as f64;
        batch
            .iter()
            .map(|s| {
                let err = self.forward_raw(&s.input).0[s.action] - s.target;
                err * err * scale
            })
            .sum()
    }

    #[cfg(test)]
    fn sgd_step(&mut self, batch: &[Sample], alpha: f64) {
        let (_, grad) = self.loss_and_grad(batch);
        self.apply(&grad, alpha, &mut Optimizer::Sgd);
    }

    fn apply(&mut self, grad: &[f64], alpha: f64, opt: &mut Optimizer) {
        let mut params = self.params();
        opt.step(&mut params, grad, alpha);
        self.set_params(&params).expect("parameter count is fixed");
    }
}

/// Update rule applied to the gradient of each minibatch.
#[derive(Debug, Clone, PartialEq)]
pub enum Optimizer {
    /// `p <- p - alpha * g`.
    Sgd,
    /// Adam with bias correction; moment buffers persist across updates.
    Adam(AdamState),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    pub fn new(num_params: usize) -> Self {
        AdamState {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, num_params: usize) -> Self {
        match kind {
            OptimizerKind::Sgd => Optimizer::Sgd,
            OptimizerKind::Adam => Optimizer::Adam(AdamState::new(num_params)),
        }
    }

    pub fn kind(&self) -> OptimizerKind {
        match self {
            Optimizer::Sgd => OptimizerKind::Sgd,
            Optimizer::Adam(_) => OptimizerKind::Adam,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], alpha: f64) {
        match self {
            Optimizer::Sgd => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p -= alpha * g;
                }
            }
            Optimizer::Adam(s) => {
                s.t += 1;
                let c1 = 1.0 - s.beta1.powi(s.t as i32);
                let c2 = 1.0 - s.beta2.powi(s.t as i32);
                for i in 0..params.len() {
                    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * grad[i];
                    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
                    let m_hat = s.m[i] / c1;
                    let v_hat = s.v[i] / c2;
                    params[i] -= alpha * m_hat / (v_hat.sqrt() + s.eps);
                }
            }
        }
    }
}

impl QFunction for Mlp {
    fn q_values(&self, obs: &Observation) -> Result<[f64; 2]> {
        let x = self.encode(obs)?;
        Ok(self.forward_raw(&x).0)
    }
}

/// Learning hyperparameters of the Q-network update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DqnParams {
    pub alpha: f64,
    pub gamma: f64,
    pub batch_size: usize,
}

/// One shuffled pass of minibatch gradient descent over the interaction buffer.
///
/// For each minibatch the bootstrap targets
/// `r + gamma * max_a' Q(s', a') * (1 - terminal)` are computed with the
/// weights current at that step and held fixed; the final partial batch is
/// included.
pub fn dqn_update<R: Rng + ?Sized>(
    net: &mut Mlp,
    opt: &mut Optimizer,
    buffer: &[Transition],
    params: DqnParams,
    rng: &mut R,
) -> Result<()> {
    if buffer.is_empty() {
        return Ok(());
    }
    if params.batch_size == 0 {
        return Err(Error::InvalidArgument("batch size must be positive".into()));
    }
    let encoded = buffer
        .iter()
        .map(|t| Ok((net.encode(&t.obs)?, net.encode(&t.next_obs)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..buffer.len()).collect();
    order.shuffle(rng);

    let mut batch = Vec::with_capacity(params.batch_size);
    for chunk in order.chunks(params.batch_size) {
        batch.clear();
        for &i in chunk {
            let t = &buffer[i];
            let (x, x_next) = encoded[i];
            let bootstrap = if t.terminal {
                0.0
            } else {
                let q = net.forward_raw(&x_next).0;
                q[0].max(q[1])
            };
            batch.push(Sample {
                input: x,
                action: t.action.index(),
                target: t.reward + params.gamma * bootstrap,
            });
        }
        let (_, grad) = net.loss_and_grad(&batch);
        net.apply(&grad, params.alpha, opt);
    }
    Ok(())
}
