//! Minimal dense-network engine: plain linear layers, ReLU, the Adam
//! optimizer, and a finite-difference gradient checker.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Anything whose trainable parameters can be flattened into one vector.
///
/// The flattening order is fixed per type and shared with the corresponding
/// gradient containers, so analytic and numeric gradients line up index by
/// index.
pub trait Parameterized {
    fn param_count(&self) -> usize;
    fn flatten_params(&self) -> Vec<f64>;
    fn load_params(&mut self, flat: &[f64]) -> Result<()>;
}

/// Fully connected layer `y = w·x + b` with `q` outputs and `p` inputs.
#[derive(Debug, Clone)]
pub struct DenseLayer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    cached_input: Option<Vec<f64>>,
}

impl DenseLayer {
    pub fn new(weights: Matrix, bias: Vec<f64>) -> Self {
        assert_eq!(weights.rows(), bias.len(), "bias length must equal rows");
        Self { weights, bias, cached_input: None }
    }

    /// Weights uniform in ±1/√p (p = fan-in), bias zero.
    pub fn init(input_dim: usize, output_dim: usize, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (input_dim as f64).sqrt();
        let weights = Matrix::from_fn(output_dim, input_dim, |_, _| {
            rng.random_range(-bound..bound)
        });
        Self::new(weights, vec![0.0; output_dim])
    }

    pub fn input_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.rows()
    }

    /// Forward pass; caches the input for the next backward pass.
    pub fn forward(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "dense forward: input {} vs layer {}",
                x.len(),
                self.input_dim()
            )));
        }
        let mut y = self.weights.matvec(x);
        for (yi, bi) in y.iter_mut().zip(self.bias.iter()) {
            *yi += bi;
        }
        self.cached_input = Some(x.to_vec());
        Ok(y)
    }

    /// Gradients for the most recent forward pass:
    /// `grad_w = upstream ⊗ x`, `grad_b = upstream`, `grad_x = wᵀ·upstream`.
    pub fn backward(&self, upstream: &[f64]) -> Result<(Matrix, Vec<f64>, Vec<f64>)> {
        let x = self
            .cached_input
            .as_ref()
            .ok_or_else(|| Error::State("dense backward before forward".into()))?;
        if upstream.len() != self.output_dim() {
            return Err(Error::Shape(format!(
                "dense backward: upstream {} vs layer {}",
                upstream.len(),
                self.output_dim()
            )));
        }
        let mut grad_w = Matrix::zeros(self.output_dim(), self.input_dim());
        grad_w.add_outer(upstream, x);
        let grad_b = upstream.to_vec();
        let grad_x = self.weights.matvec_transpose(upstream);
        Ok((grad_w, grad_b, grad_x))
    }

    pub fn cached_input(&self) -> Option<&[f64]> {
        self.cached_input.as_deref()
    }
}

impl Parameterized for DenseLayer {
    fn param_count(&self) -> usize {
        self.weights.as_slice().len() + self.bias.len()
    }

    fn flatten_params(&self) -> Vec<f64> {
        let mut out = self.weights.as_slice().to_vec();
        out.extend_from_slice(&self.bias);
        out
    }

    fn load_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::Shape(format!(
                "dense load: {} params vs {}",
                flat.len(),
                self.param_count()
            )));
        }
        let nw = self.weights.as_slice().len();
        self.weights.as_mut_slice().copy_from_slice(&flat[..nw]);
        self.bias.copy_from_slice(&flat[nw..]);
        Ok(())
    }
}

/// Elementwise `max(0, x)`.
pub fn relu(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| v.max(0.0)).collect()
}

/// Backward mask for ReLU: upstream where the preactivation was strictly
/// positive, zero elsewhere (subgradient 0 at exactly 0).
pub fn relu_backward(preactivation: &[f64], upstream: &[f64]) -> Vec<f64> {
    debug_assert_eq!(preactivation.len(), upstream.len());
    preactivation
        .iter()
        .zip(upstream.iter())
        .map(|(&z, &u)| if z > 0.0 { u } else { 0.0 })
        .collect()
}

/// Adam with bias correction over one flat parameter tensor.
///
/// Epsilon defaults to 0; a coordinate whose bias-corrected second moment is
/// exactly zero receives no update instead of 0/0.
#[derive(Debug, Clone)]
pub struct AdamState {
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
    step_count: u64,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(param_len: usize, alpha: f64, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        Self {
            first_moment: vec![0.0; param_len],
            second_moment: vec![0.0; param_len],
            step_count: 0,
            alpha,
            beta1,
            beta2,
            epsilon,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// One Adam update in place.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.first_moment.len() || grads.len() != params.len() {
            return Err(Error::Shape(format!(
                "adam step: params {} grads {} state {}",
                params.len(),
                grads.len(),
                self.first_moment.len()
            )));
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let m_corr = 1.0 - self.beta1.powi(t);
        let v_corr = 1.0 - self.beta2.powi(t);
        for i in 0..params.len() {
            let g = grads[i];
            self.first_moment[i] = self.beta1 * self.first_moment[i] + (1.0 - self.beta1) * g;
            self.second_moment[i] = self.beta2 * self.second_moment[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.first_moment[i] / m_corr;
            let v_hat = self.second_moment[i] / v_corr;
            let denom = v_hat.sqrt() + self.epsilon;
            if denom > 0.0 {
                params[i] -= self.alpha * m_hat / denom;
            }
        }
        Ok(())
    }
}

/// Max over parameters of the relative error between the analytic gradient
/// and a central finite difference of `loss`.
///
/// Relative error is `|a − n| / max(1e-8, |a| + |n|)`. The subject's
/// parameters are restored afterwards. A non-finite loss is a numeric error.
pub fn finite_diff_check<T, F>(
    subject: &mut T,
    mut loss: F,
    analytic: &[f64],
    step: f64,
) -> Result<f64>
where
    T: Parameterized,
    F: FnMut(&mut T) -> Result<f64>,
{
    let base = subject.flatten_params();
    if analytic.len() != base.len() {
        return Err(Error::Shape(format!(
            "gradient check: {} analytic entries vs {} params",
            analytic.len(),
            base.len()
        )));
    }
    let mut probe = base.clone();
    let mut worst = 0.0f64;
    for i in 0..base.len() {
        probe[i] = base[i] + step;
        subject.load_params(&probe)?;
        let plus = loss(subject)?;
        probe[i] = base[i] - step;
        subject.load_params(&probe)?;
        let minus = loss(subject)?;
        probe[i] = base[i];
        if !plus.is_finite() || !minus.is_finite() {
            subject.load_params(&base)?;
            return Err(Error::Numeric(format!(
                "non-finite loss while probing parameter {i}"
            )));
        }
        let numeric = (plus - minus) / (2.0 * step);
        let denom = (analytic[i].abs() + numeric.abs()).max(1e-8);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    subject.load_params(&base)?;
    Ok(worst)
}
