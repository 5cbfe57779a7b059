//! Factorised-Gaussian noisy linear layers and the output-layer noise level
//! used as the stability term in the augmented loss.
//!
//! A noisy layer computes `y = (μ_w + σ_w ⊙ ε_w)·x + (μ_b + σ_b ⊙ ε_b)`.
//! The weight noise is rank-1: `ε_w[j,i] = f(ε_out[j])·f(ε_in[i])` with
//! `f(x) = sgn(x)·√|x|`, built from `p` input and `q` output unit Gaussians.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::nn::Parameterized;

/// `sgn(x)·√|x|`, the factorised-noise transform.
pub fn factorise(x: f64) -> f64 {
    x.signum() * x.abs().sqrt()
}

/// Gradients of a noisy layer for one backward pass.
#[derive(Debug, Clone)]
pub struct NoisyGrads {
    pub mu_w: Matrix,
    pub sigma_w: Matrix,
    pub mu_b: Vec<f64>,
    pub sigma_b: Vec<f64>,
    pub input: Vec<f64>,
}

/// Linear layer with learnable noise scales.
///
/// `eps_w`/`eps_b` hold the most recently sampled noise and are reused until
/// the next `sample_noise`/`zero_noise` call.
#[derive(Debug, Clone)]
pub struct NoisyLinear {
    pub mu_w: Matrix,
    pub sigma_w: Matrix,
    pub mu_b: Vec<f64>,
    pub sigma_b: Vec<f64>,
    pub eps_w: Matrix,
    pub eps_b: Vec<f64>,
    cached_input: Option<Vec<f64>>,
}

impl NoisyLinear {
    /// μ uniform in ±1/√p; weight σ = σ₀/√p, bias σ = σ₀/√q; noise zeroed.
    pub fn init(input_dim: usize, output_dim: usize, sigma_0: f64, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (input_dim as f64).sqrt();
        let mu_w = Matrix::from_fn(output_dim, input_dim, |_, _| rng.random_range(-bound..bound));
        let mu_b: Vec<f64> = (0..output_dim).map(|_| rng.random_range(-bound..bound)).collect();
        let mut sigma_w = Matrix::zeros(output_dim, input_dim);
        sigma_w.fill(sigma_0 * bound);
        let sigma_b = sigma_0 / (output_dim as f64).sqrt();
        Self {
            mu_w,
            sigma_w,
            mu_b,
            sigma_b: vec![sigma_b; output_dim],
            eps_w: Matrix::zeros(output_dim, input_dim),
            eps_b: vec![0.0; output_dim],
            cached_input: None,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.mu_w.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.mu_w.rows()
    }

    /// Install a factorised draw: `eps_w[j,i] = f(eps_out[j])·f(eps_in[i])`
    /// and `eps_b[j] = f(eps_out[j])`.
    pub fn apply_noise_draw(&mut self, eps_in: &[f64], eps_out: &[f64]) {
        debug_assert_eq!(eps_in.len(), self.input_dim());
        debug_assert_eq!(eps_out.len(), self.output_dim());
        let f_in: Vec<f64> = eps_in.iter().map(|&v| factorise(v)).collect();
        for (j, &out) in eps_out.iter().enumerate() {
            let f_out = factorise(out);
            for (w, &fi) in self.eps_w.row_mut(j).iter_mut().zip(f_in.iter()) {
                *w = f_out * fi;
            }
            self.eps_b[j] = f_out;
        }
    }

    /// Draw fresh factorised noise from the run's generator (p input unit
    /// Gaussians, then q output unit Gaussians).
    pub fn sample_noise(&mut self, rng: &mut impl Rng) {
        let eps_in: Vec<f64> = (0..self.input_dim()).map(|_| rng.sample(StandardNormal)).collect();
        let eps_out: Vec<f64> = (0..self.output_dim()).map(|_| rng.sample(StandardNormal)).collect();
        self.apply_noise_draw(&eps_in, &eps_out);
    }

    /// Clear the noise; the layer then behaves as a plain `μ` layer.
    pub fn zero_noise(&mut self) {
        self.eps_w.fill(0.0);
        self.eps_b.fill(0.0);
    }

    /// Effective weight `μ_w + σ_w ⊙ ε_w` under the current draw.
    pub fn effective_weights(&self) -> Matrix {
        let mut w = self.mu_w.clone();
        for ((wi, &si), &ei) in w
            .as_mut_slice()
            .iter_mut()
            .zip(self.sigma_w.as_slice())
            .zip(self.eps_w.as_slice())
        {
            *wi += si * ei;
        }
        w
    }

    /// Effective bias `μ_b + σ_b ⊙ ε_b` under the current draw.
    pub fn effective_bias(&self) -> Vec<f64> {
        self.mu_b
            .iter()
            .zip(&self.sigma_b)
            .zip(&self.eps_b)
            .map(|((&m, &s), &e)| m + s * e)
            .collect()
    }

    /// Forward pass under the current noise draw; caches the input.
    pub fn forward(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "noisy forward: input {} vs layer {}",
                x.len(),
                self.input_dim()
            )));
        }
        let q = self.output_dim();
        let mut y = vec![0.0; q];
        for j in 0..q {
            let mu = self.mu_w.row(j);
            let sg = self.sigma_w.row(j);
            let ep = self.eps_w.row(j);
            let mut acc = 0.0;
            for i in 0..x.len() {
                acc += (mu[i] + sg[i] * ep[i]) * x[i];
            }
            y[j] = acc + self.mu_b[j] + self.sigma_b[j] * self.eps_b[j];
        }
        self.cached_input = Some(x.to_vec());
        Ok(y)
    }

    /// Gradients for the most recent forward pass under the cached noise:
    /// `grad_μw = u ⊗ x`, `grad_σw = (u ⊗ x) ⊙ ε_w`, `grad_μb = u`,
    /// `grad_σb = u ⊙ ε_b`, `grad_x = (μ_w + σ_w ⊙ ε_w)ᵀ·u`.
    pub fn backward(&self, upstream: &[f64]) -> Result<NoisyGrads> {
        let x = self
            .cached_input
            .as_ref()
            .ok_or_else(|| Error::State("noisy backward before forward".into()))?;
        if upstream.len() != self.output_dim() {
            return Err(Error::Shape(format!(
                "noisy backward: upstream {} vs layer {}",
                upstream.len(),
                self.output_dim()
            )));
        }
        let (p, q) = (self.input_dim(), self.output_dim());
        let mut grads = NoisyGrads {
            mu_w: Matrix::zeros(q, p),
            sigma_w: Matrix::zeros(q, p),
            mu_b: upstream.to_vec(),
            sigma_b: upstream.iter().zip(&self.eps_b).map(|(&u, &e)| u * e).collect(),
            input: vec![0.0; p],
        };
        for j in 0..q {
            let u = upstream[j];
            let mu = self.mu_w.row(j);
            let sg = self.sigma_w.row(j);
            let ep = self.eps_w.row(j);
            let gm = grads.mu_w.row_mut(j);
            for i in 0..p {
                gm[i] = u * x[i];
                grads.input[i] += (mu[i] + sg[i] * ep[i]) * u;
            }
            let gs = grads.sigma_w.row_mut(j);
            for i in 0..p {
                gs[i] = u * x[i] * ep[i];
            }
        }
        Ok(grads)
    }

    pub fn cached_input(&self) -> Option<&[f64]> {
        self.cached_input.as_deref()
    }

    /// Mean absolute noise scale of this layer:
    /// `(Σ|σ_w| + Σ|σ_b|) / ((p+1)·q)`.
    ///
    /// Applied to the output layer this is the stability measure that the
    /// augmented loss drives down.
    pub fn noise_level(&self) -> f64 {
        let (p, q) = (self.input_dim(), self.output_dim());
        let sum_w: f64 = self.sigma_w.as_slice().iter().map(|v| v.abs()).sum();
        let sum_b: f64 = self.sigma_b.iter().map(|v| v.abs()).sum();
        (sum_w + sum_b) / ((p + 1) as f64 * q as f64)
    }

    /// Gradient of `noise_level` w.r.t. σ: `sgn(σ) / ((p+1)·q)` elementwise,
    /// 0 at σ = 0. μ parameters have zero gradient.
    pub fn noise_level_grad(&self) -> (Matrix, Vec<f64>) {
        let (p, q) = (self.input_dim(), self.output_dim());
        let scale = 1.0 / ((p + 1) as f64 * q as f64);
        let mut gw = Matrix::zeros(q, p);
        for (g, &s) in gw.as_mut_slice().iter_mut().zip(self.sigma_w.as_slice()) {
            *g = sign_or_zero(s) * scale;
        }
        let gb = self.sigma_b.iter().map(|&s| sign_or_zero(s) * scale).collect();
        (gw, gb)
    }
}

fn sign_or_zero(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl Parameterized for NoisyLinear {
    fn param_count(&self) -> usize {
        2 * self.mu_w.as_slice().len() + 2 * self.mu_b.len()
    }

    fn flatten_params(&self) -> Vec<f64> {
        let mut out = self.mu_w.as_slice().to_vec();
        out.extend_from_slice(self.sigma_w.as_slice());
        out.extend_from_slice(&self.mu_b);
        out.extend_from_slice(&self.sigma_b);
        out
    }

    fn load_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::Shape(format!(
                "noisy load: {} params vs {}",
                flat.len(),
                self.param_count()
            )));
        }
        let nw = self.mu_w.as_slice().len();
        let nb = self.mu_b.len();
        self.mu_w.as_mut_slice().copy_from_slice(&flat[..nw]);
        self.sigma_w.as_mut_slice().copy_from_slice(&flat[nw..2 * nw]);
        self.mu_b.copy_from_slice(&flat[2 * nw..2 * nw + nb]);
        self.sigma_b.copy_from_slice(&flat[2 * nw + nb..]);
        Ok(())
    }
}
