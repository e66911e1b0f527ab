//! Minimal dense/convolution layers with hand-written backpropagation.
//!
//! Everything is f64 and explicit loops; layers return parameter gradients in
//! the same layout as their parameter vectors so the finite-difference checks
//! can compare element by element.
//!
//! Convolutions are fixed at kernel 3, stride 2, "same"-style padding (no
//! leading pad, one trailing pad row/column), which exactly halves even
//! spatial sizes. Transposed convolutions are the exact adjoint and exactly
//! double them.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

pub const KERNEL: usize = 3;
pub const STRIDE: usize = 2;

/// Channel-major (c, y, x) tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self {
            channels,
            height,
            width,
            data: vec![0.0; channels * height * width],
        }
    }

    pub fn from_data(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), channels * height * width);
        Self {
            channels,
            height,
            width,
            data,
        }
    }

    #[inline]
    pub fn plane(&self, c: usize) -> &[f64] {
        let size = self.height * self.width;
        &self.data[c * size..(c + 1) * size]
    }

    #[inline]
    pub fn plane_mut(&mut self, c: usize) -> &mut [f64] {
        let size = self.height * self.width;
        &mut self.data[c * size..(c + 1) * size]
    }
}

pub fn relu(tensor: &Tensor) -> Tensor {
    let mut out = tensor.clone();
    for v in out.data.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    out
}

/// Propagate `grad_out` through the rectifier that produced `pre` -> relu.
pub fn relu_backward(pre: &Tensor, grad_out: &Tensor) -> Tensor {
    let mut grad = grad_out.clone();
    for (g, z) in grad.data.iter_mut().zip(pre.data.iter()) {
        if *z <= 0.0 {
            *g = 0.0;
        }
    }
    grad
}

pub fn sigmoid_slice(z: &[f64]) -> Vec<f64> {
    z.iter().map(|&v| 1.0 / (1.0 + libm::exp(-v))).collect()
}

/// d(sigmoid)/dz given the sigmoid output `s`.
pub fn sigmoid_backward(s: &[f64], grad_out: &[f64]) -> Vec<f64> {
    s.iter()
        .zip(grad_out.iter())
        .map(|(&s, &g)| g * s * (1.0 - s))
        .collect()
}

fn uniform_fan_in<R: Rng>(rng: &mut R, fan_in: usize, count: usize) -> Vec<f64> {
    let a = libm::sqrt(1.0 / fan_in as f64);
    (0..count).map(|_| (rng.random::<f64>() * 2.0 - 1.0) * a).collect()
}

/// 3x3 stride-2 convolution halving the spatial size.
/// Weight layout: `[out_ch][in_ch][ky][kx]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv2d {
    pub in_channels: usize,
    pub out_channels: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Conv2d {
    pub fn init<R: Rng>(in_channels: usize, out_channels: usize, rng: &mut R) -> Self {
        let fan_in = in_channels * KERNEL * KERNEL;
        Self {
            in_channels,
            out_channels,
            weights: uniform_fan_in(rng, fan_in, out_channels * fan_in),
            bias: vec![0.0; out_channels],
        }
    }

    #[inline]
    fn w(&self, oc: usize, ic: usize, ky: usize, kx: usize) -> f64 {
        self.weights[((oc * self.in_channels + ic) * KERNEL + ky) * KERNEL + kx]
    }

    pub fn forward(&self, input: &Tensor) -> Tensor {
        debug_assert_eq!(input.channels, self.in_channels);
        let (oh, ow) = (input.height / STRIDE, input.width / STRIDE);
        let mut out = Tensor::zeros(self.out_channels, oh, ow);
        for oc in 0..self.out_channels {
            out.plane_mut(oc).fill(self.bias[oc]);
            for ic in 0..self.in_channels {
                let in_plane = input.plane(ic);
                for ky in 0..KERNEL {
                    for kx in 0..KERNEL {
                        let w = self.w(oc, ic, ky, kx);
                        if w == 0.0 {
                            continue;
                        }
                        let out_plane = out.plane_mut(oc);
                        for oy in 0..oh {
                            let iy = STRIDE * oy + ky;
                            if iy >= input.height {
                                break;
                            }
                            let in_row = &in_plane[iy * input.width..(iy + 1) * input.width];
                            let out_row = &mut out_plane[oy * ow..(oy + 1) * ow];
                            let usable = if kx == 0 { ow } else { (input.width - kx).div_ceil(STRIDE).min(ow) };
                            for ox in 0..usable {
                                out_row[ox] += w * in_row[STRIDE * ox + kx];
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Returns (grad wrt input, grad wrt weights, grad wrt bias).
    pub fn backward(&self, input: &Tensor, grad_out: &Tensor) -> (Tensor, Vec<f64>, Vec<f64>) {
        let mut grad_in = Tensor::zeros(input.channels, input.height, input.width);
        let mut grad_w = vec![0.0; self.weights.len()];
        let mut grad_b = vec![0.0; self.bias.len()];
        let (oh, ow) = (grad_out.height, grad_out.width);
        for oc in 0..self.out_channels {
            let go_plane = grad_out.plane(oc);
            grad_b[oc] += go_plane.iter().sum::<f64>();
            for ic in 0..self.in_channels {
                let in_plane = input.plane(ic);
                for ky in 0..KERNEL {
                    for kx in 0..KERNEL {
                        let w = self.w(oc, ic, ky, kx);
                        let mut gw = 0.0;
                        let gi_plane = grad_in.plane_mut(ic);
                        for oy in 0..oh {
                            let iy = STRIDE * oy + ky;
                            if iy >= input.height {
                                break;
                            }
                            let go_row = &go_plane[oy * ow..(oy + 1) * ow];
                            for ox in 0..ow {
                                let ix = STRIDE * ox + kx;
                                if ix >= input.width {
                                    break;
                                }
                                let g = go_row[ox];
                                gw += g * in_plane[iy * input.width + ix];
                                gi_plane[iy * input.width + ix] += g * w;
                            }
                        }
                        grad_w[((oc * self.in_channels + ic) * KERNEL + ky) * KERNEL + kx] += gw;
                    }
                }
            }
        }
        (grad_in, grad_w, grad_b)
    }
}

/// 3x3 stride-2 transposed convolution doubling the spatial size; the exact
/// adjoint of [`Conv2d`]. Weight layout: `[in_ch][out_ch][ky][kx]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvTranspose2d {
    pub in_channels: usize,
    pub out_channels: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl ConvTranspose2d {
    pub fn init<R: Rng>(in_channels: usize, out_channels: usize, rng: &mut R) -> Self {
        let fan_in = in_channels * KERNEL * KERNEL;
        Self {
            in_channels,
            out_channels,
            weights: uniform_fan_in(rng, fan_in, in_channels * out_channels * KERNEL * KERNEL),
            bias: vec![0.0; out_channels],
        }
    }

    #[inline]
    fn w(&self, ic: usize, oc: usize, ky: usize, kx: usize) -> f64 {
        self.weights[((ic * self.out_channels + oc) * KERNEL + ky) * KERNEL + kx]
    }

    pub fn forward(&self, input: &Tensor) -> Tensor {
        debug_assert_eq!(input.channels, self.in_channels);
        let (oh, ow) = (input.height * STRIDE, input.width * STRIDE);
        let mut out = Tensor::zeros(self.out_channels, oh, ow);
        for oc in 0..self.out_channels {
            out.plane_mut(oc).fill(self.bias[oc]);
            for ic in 0..self.in_channels {
                let in_plane = input.plane(ic);
                for ky in 0..KERNEL {
                    for kx in 0..KERNEL {
                        let w = self.w(ic, oc, ky, kx);
                        if w == 0.0 {
                            continue;
                        }
                        let out_plane = out.plane_mut(oc);
                        for y in 0..input.height {
                            let oy = STRIDE * y + ky;
                            if oy >= oh {
                                break;
                            }
                            let in_row = &in_plane[y * input.width..(y + 1) * input.width];
                            let out_row = &mut out_plane[oy * ow..(oy + 1) * ow];
                            for (x, &v) in in_row.iter().enumerate() {
                                let ox = STRIDE * x + kx;
                                if ox >= ow {
                                    break;
                                }
                                out_row[ox] += w * v;
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn backward(&self, input: &Tensor, grad_out: &Tensor) -> (Tensor, Vec<f64>, Vec<f64>) {
        let mut grad_in = Tensor::zeros(input.channels, input.height, input.width);
        let mut grad_w = vec![0.0; self.weights.len()];
        let mut grad_b = vec![0.0; self.bias.len()];
        let (oh, ow) = (grad_out.height, grad_out.width);
        for oc in 0..self.out_channels {
            let go_plane = grad_out.plane(oc);
            grad_b[oc] += go_plane.iter().sum::<f64>();
            for ic in 0..self.in_channels {
                let in_plane = input.plane(ic);
                for ky in 0..KERNEL {
                    for kx in 0..KERNEL {
                        let w = self.w(ic, oc, ky, kx);
                        let mut gw = 0.0;
                        let gi_plane = grad_in.plane_mut(ic);
                        for y in 0..input.height {
                            let oy = STRIDE * y + ky;
                            if oy >= oh {
                                break;
                            }
                            let go_row = &go_plane[oy * ow..(oy + 1) * ow];
                            for x in 0..input.width {
                                let ox = STRIDE * x + kx;
                                if ox >= ow {
                                    break;
                                }
                                let g = go_row[ox];
                                gw += g * in_plane[y * input.width + x];
                                gi_plane[y * input.width + x] += g * w;
                            }
                        }
                        grad_w[((ic * self.out_channels + oc) * KERNEL + ky) * KERNEL + kx] += gw;
                    }
                }
            }
        }
        (grad_in, grad_w, grad_b)
    }
}

/// Fully connected layer, weights `[out][in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn init<R: Rng>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        Self {
            in_dim,
            out_dim,
            weights: uniform_fan_in(rng, in_dim, out_dim * in_dim),
            bias: vec![0.0; out_dim],
        }
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        debug_assert_eq!(input.len(), self.in_dim);
        let mut out = self.bias.clone();
        for (o, out_v) in out.iter_mut().enumerate() {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let mut acc = 0.0;
            for (w, x) in row.iter().zip(input.iter()) {
                acc += w * x;
            }
            *out_v += acc;
        }
        out
    }

    pub fn backward(&self, input: &[f64], grad_out: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut grad_in = vec![0.0; self.in_dim];
        let mut grad_w = vec![0.0; self.weights.len()];
        let grad_b = grad_out.to_vec();
        for (o, &g) in grad_out.iter().enumerate() {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let grad_row = &mut grad_w[o * self.in_dim..(o + 1) * self.in_dim];
            for i in 0..self.in_dim {
                grad_in[i] += g * row[i];
                grad_row[i] += g * input[i];
            }
        }
        (grad_in, grad_w, grad_b)
    }
}
