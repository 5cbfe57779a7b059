//! Q-networks: three linear layers with ReLU between them, in a plain and a
//! noisy variant. The online and target networks of a run are two instances
//! of the same variant.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::nn::{relu, relu_backward, AdamState, DenseLayer, Parameterized};
use crate::noisy::NoisyLinear;

/// Plain three-layer MLP.
#[derive(Debug, Clone)]
pub struct DenseNet {
    pub layers: [DenseLayer; 3],
    preact1: Vec<f64>,
    preact2: Vec<f64>,
}

/// Noisy three-layer MLP; every linear layer carries factorised noise.
#[derive(Debug, Clone)]
pub struct NoisyNet {
    pub layers: [NoisyLinear; 3],
    preact1: Vec<f64>,
    preact2: Vec<f64>,
}

/// A Q-value network; output dimension equals the action count.
#[derive(Debug, Clone)]
pub enum QNetwork {
    Dense(DenseNet),
    Noisy(NoisyNet),
}

/// Per-layer gradient tensors, mirroring the parameter layout.
#[derive(Debug, Clone)]
pub enum NetGrads {
    Dense(Vec<(Matrix, Vec<f64>)>),
    Noisy(Vec<NoisyLayerGrads>),
}

#[derive(Debug, Clone)]
pub struct NoisyLayerGrads {
    pub mu_w: Matrix,
    pub sigma_w: Matrix,
    pub mu_b: Vec<f64>,
    pub sigma_b: Vec<f64>,
}

/// Weights and biases under the current noise draw, materialized once per
/// batch so the per-sample passes run at plain dense cost.
pub struct EffectiveParams {
    pub w: Vec<Matrix>,
    pub b: Vec<Vec<f64>>,
}

/// Activations of one forward pass through effective parameters.
pub struct ForwardTrace {
    pub preact1: Vec<f64>,
    pub act1: Vec<f64>,
    pub preact2: Vec<f64>,
    pub act2: Vec<f64>,
    pub q: Vec<f64>,
}

impl QNetwork {
    pub fn new_dense(input_dim: usize, hidden_dim: usize, actions: usize, rng: &mut impl Rng) -> Self {
        QNetwork::Dense(DenseNet {
            layers: [
                DenseLayer::init(input_dim, hidden_dim, rng),
                DenseLayer::init(hidden_dim, hidden_dim, rng),
                DenseLayer::init(hidden_dim, actions, rng),
            ],
            preact1: Vec::new(),
            preact2: Vec::new(),
        })
    }

    pub fn new_noisy(
        input_dim: usize,
        hidden_dim: usize,
        actions: usize,
        sigma_0: f64,
        rng: &mut impl Rng,
    ) -> Self {
        QNetwork::Noisy(NoisyNet {
            layers: [
                NoisyLinear::init(input_dim, hidden_dim, sigma_0, rng),
                NoisyLinear::init(hidden_dim, hidden_dim, sigma_0, rng),
                NoisyLinear::init(hidden_dim, actions, sigma_0, rng),
            ],
            preact1: Vec::new(),
            preact2: Vec::new(),
        })
    }

    pub fn input_dim(&self) -> usize {
        match self {
            QNetwork::Dense(n) => n.layers[0].input_dim(),
            QNetwork::Noisy(n) => n.layers[0].input_dim(),
        }
    }

    pub fn num_actions(&self) -> usize {
        match self {
            QNetwork::Dense(n) => n.layers[2].output_dim(),
            QNetwork::Noisy(n) => n.layers[2].output_dim(),
        }
    }

    pub fn is_noisy(&self) -> bool {
        matches!(self, QNetwork::Noisy(_))
    }

    /// Resample factorised noise in every noisy layer; no-op for the plain
    /// variant.
    pub fn sample_noise(&mut self, rng: &mut impl Rng) {
        if let QNetwork::Noisy(n) = self {
            for layer in n.layers.iter_mut() {
                layer.sample_noise(rng);
            }
        }
    }

    pub fn zero_noise(&mut self) {
        if let QNetwork::Noisy(n) = self {
            for layer in n.layers.iter_mut() {
                layer.zero_noise();
            }
        }
    }

    /// Output-layer noise level (the stability measure); 0 for plain nets.
    pub fn noise_level(&self) -> f64 {
        match self {
            QNetwork::Dense(_) => 0.0,
            QNetwork::Noisy(n) => n.layers[2].noise_level(),
        }
    }

    pub fn output_layer(&self) -> Option<&NoisyLinear> {
        match self {
            QNetwork::Dense(_) => None,
            QNetwork::Noisy(n) => Some(&n.layers[2]),
        }
    }

    /// Forward pass through the layers' own (noise-aware) paths; caches the
    /// hidden preactivations for `backward`.
    pub fn forward(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            QNetwork::Dense(n) => {
                n.preact1 = n.layers[0].forward(x)?;
                let a1 = relu(&n.preact1);
                n.preact2 = n.layers[1].forward(&a1)?;
                let a2 = relu(&n.preact2);
                n.layers[2].forward(&a2)
            }
            QNetwork::Noisy(n) => {
                n.preact1 = n.layers[0].forward(x)?;
                let a1 = relu(&n.preact1);
                n.preact2 = n.layers[1].forward(&a1)?;
                let a2 = relu(&n.preact2);
                n.layers[2].forward(&a2)
            }
        }
    }

    /// Gradients for the most recent `forward`.
    pub fn backward(&self, upstream: &[f64]) -> Result<NetGrads> {
        match self {
            QNetwork::Dense(n) => {
                let (w2, b2, gx2) = n.layers[2].backward(upstream)?;
                let u2 = relu_backward(&n.preact2, &gx2);
                let (w1, b1, gx1) = n.layers[1].backward(&u2)?;
                let u1 = relu_backward(&n.preact1, &gx1);
                let (w0, b0, _) = n.layers[0].backward(&u1)?;
                Ok(NetGrads::Dense(vec![(w0, b0), (w1, b1), (w2, b2)]))
            }
            QNetwork::Noisy(n) => {
                let g2 = n.layers[2].backward(upstream)?;
                let u2 = relu_backward(&n.preact2, &g2.input);
                let g1 = n.layers[1].backward(&u2)?;
                let u1 = relu_backward(&n.preact1, &g1.input);
                let g0 = n.layers[0].backward(&u1)?;
                Ok(NetGrads::Noisy(
                    [g0, g1, g2]
                        .into_iter()
                        .map(|g| NoisyLayerGrads {
                            mu_w: g.mu_w,
                            sigma_w: g.sigma_w,
                            mu_b: g.mu_b,
                            sigma_b: g.sigma_b,
                        })
                        .collect(),
                ))
            }
        }
    }

    /// Copy all learnable parameters from `source`; noise stays untouched.
    pub fn sync_from(&mut self, source: &QNetwork) -> Result<()> {
        match (self, source) {
            (QNetwork::Dense(dst), QNetwork::Dense(src)) => {
                for (d, s) in dst.layers.iter_mut().zip(src.layers.iter()) {
                    d.weights.check_same_shape(&s.weights, "target sync")?;
                    d.weights = s.weights.clone();
                    d.bias = s.bias.clone();
                }
                Ok(())
            }
            (QNetwork::Noisy(dst), QNetwork::Noisy(src)) => {
                for (d, s) in dst.layers.iter_mut().zip(src.layers.iter()) {
                    d.mu_w.check_same_shape(&s.mu_w, "target sync")?;
                    d.mu_w = s.mu_w.clone();
                    d.sigma_w = s.sigma_w.clone();
                    d.mu_b = s.mu_b.clone();
                    d.sigma_b = s.sigma_b.clone();
                }
                Ok(())
            }
            _ => Err(Error::Shape("target sync across network variants".into())),
        }
    }

    /// Materialize the weights/biases seen under the current noise draw.
    pub fn effective_params(&self) -> EffectiveParams {
        match self {
            QNetwork::Dense(n) => EffectiveParams {
                w: n.layers.iter().map(|l| l.weights.clone()).collect(),
                b: n.layers.iter().map(|l| l.bias.clone()).collect(),
            },
            QNetwork::Noisy(n) => EffectiveParams {
                w: n.layers.iter().map(|l| l.effective_weights()).collect(),
                b: n.layers.iter().map(|l| l.effective_bias()).collect(),
            },
        }
    }

    pub fn zeroed_grads(&self) -> NetGrads {
        match self {
            QNetwork::Dense(n) => NetGrads::Dense(
                n.layers
                    .iter()
                    .map(|l| {
                        (
                            Matrix::zeros(l.output_dim(), l.input_dim()),
                            vec![0.0; l.output_dim()],
                        )
                    })
                    .collect(),
            ),
            QNetwork::Noisy(n) => NetGrads::Noisy(
                n.layers
                    .iter()
                    .map(|l| NoisyLayerGrads {
                        mu_w: Matrix::zeros(l.output_dim(), l.input_dim()),
                        sigma_w: Matrix::zeros(l.output_dim(), l.input_dim()),
                        mu_b: vec![0.0; l.output_dim()],
                        sigma_b: vec![0.0; l.output_dim()],
                    })
                    .collect(),
            ),
        }
    }

    /// Backprop one sample through `eff` (which must have been materialized
    /// from this network under the current noise), accumulating parameter
    /// gradients into `grads`. σ gradients pick up the layer's noise factors.
    pub fn accumulate_grads(
        &self,
        eff: &EffectiveParams,
        input: &[f64],
        trace: &ForwardTrace,
        upstream: &[f64],
        grads: &mut NetGrads,
    ) {
        let u3 = upstream;
        let u2 = {
            let gx = eff.w[2].matvec_transpose(u3);
            relu_backward(&trace.preact2, &gx)
        };
        let u1 = {
            let gx = eff.w[1].matvec_transpose(&u2);
            relu_backward(&trace.preact1, &gx)
        };
        let inputs: [&[f64]; 3] = [input, &trace.act1, &trace.act2];
        let upstreams: [&[f64]; 3] = [&u1, &u2, u3];
        match (self, grads) {
            (QNetwork::Dense(_), NetGrads::Dense(acc)) => {
                for l in 0..3 {
                    acc[l].0.add_outer(upstreams[l], inputs[l]);
                    for (b, &u) in acc[l].1.iter_mut().zip(upstreams[l]) {
                        *b += u;
                    }
                }
            }
            (QNetwork::Noisy(net), NetGrads::Noisy(acc)) => {
                for l in 0..3 {
                    let eps_w = &net.layers[l].eps_w;
                    let eps_b = &net.layers[l].eps_b;
                    let x = inputs[l];
                    for (j, &u) in upstreams[l].iter().enumerate() {
                        let gm = acc[l].mu_w.row_mut(j);
                        for (i, &xi) in x.iter().enumerate() {
                            gm[i] += u * xi;
                        }
                        let gs = acc[l].sigma_w.row_mut(j);
                        let ep = eps_w.row(j);
                        for (i, &xi) in x.iter().enumerate() {
                            gs[i] += u * xi * ep[i];
                        }
                        acc[l].mu_b[j] += u;
                        acc[l].sigma_b[j] += u * eps_b[j];
                    }
                }
            }
            _ => unreachable!("gradient container does not match network variant"),
        }
    }
}

impl EffectiveParams {
    /// Full forward pass keeping activations for a later backward pass.
    pub fn forward(&self, x: &[f64]) -> ForwardTrace {
        let mut preact1 = vec![0.0; self.b[0].len()];
        self.w[0].matvec_into(x, &mut preact1);
        add_in_place(&mut preact1, &self.b[0]);
        let act1 = relu(&preact1);

        let mut preact2 = vec![0.0; self.b[1].len()];
        self.w[1].matvec_into(&act1, &mut preact2);
        add_in_place(&mut preact2, &self.b[1]);
        let act2 = relu(&preact2);

        let mut q = vec![0.0; self.b[2].len()];
        self.w[2].matvec_into(&act2, &mut q);
        add_in_place(&mut q, &self.b[2]);
        ForwardTrace { preact1, act1, preact2, act2, q }
    }

    /// Q-values only.
    pub fn forward_q(&self, x: &[f64]) -> Vec<f64> {
        self.forward(x).q
    }
}

fn add_in_place(y: &mut [f64], b: &[f64]) {
    for (yi, bi) in y.iter_mut().zip(b) {
        *yi += bi;
    }
}

impl NetGrads {
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        match self {
            NetGrads::Dense(layers) => {
                for (w, b) in layers {
                    out.extend_from_slice(w.as_slice());
                    out.extend_from_slice(b);
                }
            }
            NetGrads::Noisy(layers) => {
                for g in layers {
                    out.extend_from_slice(g.mu_w.as_slice());
                    out.extend_from_slice(g.sigma_w.as_slice());
                    out.extend_from_slice(&g.mu_b);
                    out.extend_from_slice(&g.sigma_b);
                }
            }
        }
        out
    }
}

impl Parameterized for QNetwork {
    fn param_count(&self) -> usize {
        match self {
            QNetwork::Dense(n) => n.layers.iter().map(|l| l.param_count()).sum(),
            QNetwork::Noisy(n) => n.layers.iter().map(|l| l.param_count()).sum(),
        }
    }

    fn flatten_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        match self {
            QNetwork::Dense(n) => {
                for l in &n.layers {
                    out.extend(l.flatten_params());
                }
            }
            QNetwork::Noisy(n) => {
                for l in &n.layers {
                    out.extend(l.flatten_params());
                }
            }
        }
        out
    }

    fn load_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::Shape(format!(
                "network load: {} params vs {}",
                flat.len(),
                self.param_count()
            )));
        }
        let mut offset = 0;
        match self {
            QNetwork::Dense(n) => {
                for l in n.layers.iter_mut() {
                    let c = l.param_count();
                    l.load_params(&flat[offset..offset + c])?;
                    offset += c;
                }
            }
            QNetwork::Noisy(n) => {
                for l in n.layers.iter_mut() {
                    let c = l.param_count();
                    l.load_params(&flat[offset..offset + c])?;
                    offset += c;
                }
            }
        }
        Ok(())
    }
}

/// One Adam state per parameter tensor, in the network's flatten order.
pub struct AdamSet {
    groups: Vec<AdamState>,
}

impl AdamSet {
    pub fn for_network(net: &QNetwork, alpha: f64, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        let mut groups = Vec::new();
        let mut add = |len: usize| groups.push(AdamState::new(len, alpha, beta1, beta2, epsilon));
        match net {
            QNetwork::Dense(n) => {
                for l in &n.layers {
                    add(l.weights.as_slice().len());
                    add(l.bias.len());
                }
            }
            QNetwork::Noisy(n) => {
                for l in &n.layers {
                    add(l.mu_w.as_slice().len());
                    add(l.sigma_w.as_slice().len());
                    add(l.mu_b.len());
                    add(l.sigma_b.len());
                }
            }
        }
        Self { groups }
    }

    /// Apply one optimizer step per parameter group.
    pub fn apply(&mut self, net: &mut QNetwork, grads: &NetGrads) -> Result<()> {
        let mut it = self.groups.iter_mut();
        let mut next = |params: &mut [f64], g: &[f64]| -> Result<()> {
            it.next()
                .ok_or_else(|| Error::Shape("adam group count mismatch".into()))?
                .step(params, g)
        };
        match (net, grads) {
            (QNetwork::Dense(n), NetGrads::Dense(gl)) => {
                for (l, (gw, gb)) in n.layers.iter_mut().zip(gl) {
                    next(l.weights.as_mut_slice(), gw.as_slice())?;
                    next(&mut l.bias, gb)?;
                }
                Ok(())
            }
            (QNetwork::Noisy(n), NetGrads::Noisy(gl)) => {
                for (l, g) in n.layers.iter_mut().zip(gl) {
                    next(l.mu_w.as_mut_slice(), g.mu_w.as_slice())?;
                    next(l.sigma_w.as_mut_slice(), g.sigma_w.as_slice())?;
                    next(&mut l.mu_b, &g.mu_b)?;
                    next(&mut l.sigma_b, &g.sigma_b)?;
                }
                Ok(())
            }
            _ => Err(Error::Shape("gradients do not match network variant".into())),
        }
    }
}
