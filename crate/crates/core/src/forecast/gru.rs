//! Single-layer GRU with a dense regression head, forward and
//! backpropagation through time.
//!
//! ```text
//! z  = σ(W_z x + U_z h_prev + b_z)
//! r  = σ(W_r x + U_r h_prev + b_r)
//! h~ = tanh(W_h x + U_h (r ⊙ h_prev) + b_h)
//! h  = (1 - z) ⊙ h_prev + z ⊙ h~
//! y  = w_out · h_K + b_out
//! ```
//!
//! Matrices are stored row-major: `W[i * cols + j]`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ForecastError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GruParameters {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub w_z: Vec<f64>,
    pub w_r: Vec<f64>,
    pub w_h: Vec<f64>,
    pub u_z: Vec<f64>,
    pub u_r: Vec<f64>,
    pub u_h: Vec<f64>,
    pub b_z: Vec<f64>,
    pub b_r: Vec<f64>,
    pub b_h: Vec<f64>,
    pub w_out: Vec<f64>,
    pub b_out: f64,
}

/// Names of the tensors returned by [`GruParameters::tensors`], in order.
pub const TENSOR_NAMES: [&str; 11] = [
    "w_z", "w_r", "w_h", "u_z", "u_r", "u_h", "b_z", "b_r", "b_h", "w_out", "b_out",
];

impl GruParameters {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        let wi = vec![0.0; hidden_dim * input_dim];
        let wh = vec![0.0; hidden_dim * hidden_dim];
        let b = vec![0.0; hidden_dim];
        GruParameters {
            input_dim,
            hidden_dim,
            w_z: wi.clone(),
            w_r: wi.clone(),
            w_h: wi,
            u_z: wh.clone(),
            u_r: wh.clone(),
            u_h: wh,
            b_z: b.clone(),
            b_r: b.clone(),
            b_h: b.clone(),
            w_out: b,
            b_out: 0.0,
        }
    }

    /// Every entry drawn uniformly from `[-s, s]` with `s = 1/sqrt(hidden_dim)`.
    pub fn init_uniform<R: Rng>(input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        let s = 1.0 / (hidden_dim as f64).sqrt();
        let mut p = Self::zeros(input_dim, hidden_dim);
        for t in p.tensors_mut() {
            for v in t.iter_mut() {
                *v = rng.random_range(-s..=s);
            }
        }
        p
    }

    /// All parameter tensors in a fixed order (`b_out` as a 1-element slice).
    pub fn tensors(&self) -> [&[f64]; 11] {
        [
            &self.w_z,
            &self.w_r,
            &self.w_h,
            &self.u_z,
            &self.u_r,
            &self.u_h,
            &self.b_z,
            &self.b_r,
            &self.b_h,
            &self.w_out,
            std::slice::from_ref(&self.b_out),
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 11] {
        [
            &mut self.w_z,
            &mut self.w_r,
            &mut self.w_h,
            &mut self.u_z,
            &mut self.u_r,
            &mut self.u_h,
            &mut self.b_z,
            &mut self.b_r,
            &mut self.b_h,
            &mut self.w_out,
            std::slice::from_mut(&mut self.b_out),
        ]
    }

    pub fn len(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Checks tensor sizes against the declared dimensions and that every
    /// entry is finite.
    pub fn check(&self) -> Result<(), ForecastError> {
        let (i, h) = (self.input_dim, self.hidden_dim);
        let expected = [h * i, h * i, h * i, h * h, h * h, h * h, h, h, h, h, 1];
        for ((t, want), name) in self.tensors().iter().zip(expected).zip(TENSOR_NAMES) {
            if t.len() != want {
                return Err(ForecastError::DimensionMismatch {
                    what: name,
                    expected: want,
                    got: t.len(),
                });
            }
            if t.iter().any(|v| !v.is_finite()) {
                return Err(ForecastError::NonFinite(name));
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, c: f64) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= c);
        }
    }

    pub fn add_assign(&mut self, other: &GruParameters) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<(), ForecastError> {
        if x.len() != self.input_dim {
            return Err(ForecastError::DimensionMismatch {
                what: "input",
                expected: self.input_dim,
                got: x.len(),
            });
        }
        Ok(())
    }
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// `out = M v + out` for a row-major `rows × v.len()` matrix.
fn matvec_acc(m: &[f64], v: &[f64], out: &mut [f64]) {
    let cols = v.len();
    for (o, row) in out.iter_mut().zip(m.chunks_exact(cols)) {
        *o += row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// `out += Mᵀ v` for a row-major `v.len() × out.len()` matrix.
fn matvec_t_acc(m: &[f64], v: &[f64], out: &mut [f64]) {
    let cols = out.len();
    for (vi, row) in v.iter().zip(m.chunks_exact(cols)) {
        if *vi != 0.0 {
            out.iter_mut().zip(row).for_each(|(o, a)| *o += vi * a);
        }
    }
}

/// `M += a bᵀ`.
fn outer_acc(m: &mut [f64], a: &[f64], b: &[f64]) {
    let cols = b.len();
    for (ai, row) in a.iter().zip(m.chunks_exact_mut(cols)) {
        if *ai != 0.0 {
            row.iter_mut().zip(b).for_each(|(r, bj)| *r += ai * bj);
        }
    }
}

/// Intermediate values of one cell step, kept for the backward pass.
#[derive(Debug, Clone)]
struct StepCache {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    z: Vec<f64>,
    r: Vec<f64>,
    rh: Vec<f64>,
    h_tilde: Vec<f64>,
}

fn step_cached(p: &GruParameters, x: &[f64], h_prev: &[f64]) -> (Vec<f64>, StepCache) {
    let hd = p.hidden_dim;
    let mut z = p.b_z.clone();
    matvec_acc(&p.w_z, x, &mut z);
    matvec_acc(&p.u_z, h_prev, &mut z);
    z.iter_mut().for_each(|v| *v = sigmoid(*v));

    let mut r = p.b_r.clone();
    matvec_acc(&p.w_r, x, &mut r);
    matvec_acc(&p.u_r, h_prev, &mut r);
    r.iter_mut().for_each(|v| *v = sigmoid(*v));

    let rh: Vec<f64> = r.iter().zip(h_prev).map(|(a, b)| a * b).collect();
    let mut h_tilde = p.b_h.clone();
    matvec_acc(&p.w_h, x, &mut h_tilde);
    matvec_acc(&p.u_h, &rh, &mut h_tilde);
    h_tilde.iter_mut().for_each(|v| *v = v.tanh());

    let h: Vec<f64> = (0..hd)
        .map(|i| (1.0 - z[i]) * h_prev[i] + z[i] * h_tilde[i])
        .collect();
    let cache = StepCache {
        x: x.to_vec(),
        h_prev: h_prev.to_vec(),
        z,
        r,
        rh,
        h_tilde,
    };
    (h, cache)
}

/// One GRU cell update.
pub fn gru_step(p: &GruParameters, x: &[f64], h_prev: &[f64]) -> Result<Vec<f64>, ForecastError> {
    p.check_input(x)?;
    if h_prev.len() != p.hidden_dim {
        return Err(ForecastError::DimensionMismatch {
            what: "hidden state",
            expected: p.hidden_dim,
            got: h_prev.len(),
        });
    }
    Ok(step_cached(p, x, h_prev).0)
}

/// Runs the cell over `inputs` from a zero state and returns the final
/// hidden state.
pub fn final_hidden(p: &GruParameters, inputs: &[Vec<f64>]) -> Result<Vec<f64>, ForecastError> {
    let mut h = vec![0.0; p.hidden_dim];
    for x in inputs {
        h = gru_step(p, x, &h)?;
    }
    Ok(h)
}

/// Head output on a window of input vectors (no dropout).
pub fn predict(p: &GruParameters, inputs: &[Vec<f64>]) -> Result<f64, ForecastError> {
    let h = final_hidden(p, inputs)?;
    Ok(head(p, &h, None))
}

fn head(p: &GruParameters, h: &[f64], mask: Option<&[f64]>) -> f64 {
    let dot: f64 = match mask {
        Some(m) => p
            .w_out
            .iter()
            .zip(h)
            .zip(m)
            .map(|((w, h), m)| w * h * m)
            .sum(),
        None => p.w_out.iter().zip(h).map(|(w, h)| w * h).sum(),
    };
    dot + p.b_out
}

/// Gradient of one window's loss together with the forward results.
#[derive(Debug, Clone)]
pub struct WindowGradient {
    pub prediction: f64,
    /// `(prediction - target)²`
    pub squared_error: f64,
    pub grads: GruParameters,
}

/// Analytic BPTT gradient of `(y - target)²`. `mask` multiplies the final
/// hidden state before the head (dropout).
pub fn gradients_masked(
    p: &GruParameters,
    inputs: &[Vec<f64>],
    target: f64,
    mask: Option<&[f64]>,
) -> Result<WindowGradient, ForecastError> {
    let mut grads = GruParameters::zeros(p.input_dim, p.hidden_dim);
    let mut caches = Vec::with_capacity(inputs.len());
    let mut h = vec![0.0; p.hidden_dim];
    for x in inputs {
        p.check_input(x)?;
        let (next, cache) = step_cached(p, x, &h);
        caches.push(cache);
        h = next;
    }
    let prediction = head(p, &h, mask);
    let residual = prediction - target;
    accumulate_backward(p, &caches, &h, mask, 2.0 * residual, &mut grads);
    Ok(WindowGradient {
        prediction,
        squared_error: residual * residual,
        grads,
    })
}

pub fn gradients(
    p: &GruParameters,
    inputs: &[Vec<f64>],
    target: f64,
) -> Result<WindowGradient, ForecastError> {
    gradients_masked(p, inputs, target, None)
}

/// Backpropagates `dy = ∂L/∂y` through head and cell, adding into `g`.
fn accumulate_backward(
    p: &GruParameters,
    caches: &[StepCache],
    h_last: &[f64],
    mask: Option<&[f64]>,
    dy: f64,
    g: &mut GruParameters,
) {
    let hd = p.hidden_dim;
    g.b_out += dy;
    let mut dh: Vec<f64> = (0..hd)
        .map(|i| {
            let m = mask.map_or(1.0, |m| m[i]);
            g.w_out[i] += dy * m * h_last[i];
            dy * m * p.w_out[i]
        })
        .collect();

    let mut da_z = vec![0.0; hd];
    let mut da_r = vec![0.0; hd];
    let mut da_h = vec![0.0; hd];
    let mut d_rh = vec![0.0; hd];
    for c in caches.iter().rev() {
        let mut dh_prev = vec![0.0; hd];
        for i in 0..hd {
            let dz = dh[i] * (c.h_tilde[i] - c.h_prev[i]);
            let dht = dh[i] * c.z[i];
            dh_prev[i] = dh[i] * (1.0 - c.z[i]);
            da_h[i] = dht * (1.0 - c.h_tilde[i] * c.h_tilde[i]);
            da_z[i] = dz * c.z[i] * (1.0 - c.z[i]);
        }
        outer_acc(&mut g.w_h, &da_h, &c.x);
        outer_acc(&mut g.u_h, &da_h, &c.rh);
        g.b_h.iter_mut().zip(&da_h).for_each(|(b, d)| *b += d);

        d_rh.iter_mut().for_each(|v| *v = 0.0);
        matvec_t_acc(&p.u_h, &da_h, &mut d_rh);
        for i in 0..hd {
            let dr = d_rh[i] * c.h_prev[i];
            dh_prev[i] += d_rh[i] * c.r[i];
            da_r[i] = dr * c.r[i] * (1.0 - c.r[i]);
        }

        outer_acc(&mut g.w_z, &da_z, &c.x);
        outer_acc(&mut g.u_z, &da_z, &c.h_prev);
        g.b_z.iter_mut().zip(&da_z).for_each(|(b, d)| *b += d);
        matvec_t_acc(&p.u_z, &da_z, &mut dh_prev);

        outer_acc(&mut g.w_r, &da_r, &c.x);
        outer_acc(&mut g.u_r, &da_r, &c.h_prev);
        g.b_r.iter_mut().zip(&da_r).for_each(|(b, d)| *b += d);
        matvec_t_acc(&p.u_r, &da_r, &mut dh_prev);

        dh = dh_prev;
    }
}
