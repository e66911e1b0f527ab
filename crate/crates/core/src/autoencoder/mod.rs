//! Convolutional autoencoder for data-driven niche descriptors.
//!
//! Encoder: two 3x3 stride-2 convolutions with 8 filters each (64 -> 32 ->
//! 16) and a linear projection to the latent code. Decoder: linear expansion
//! to 4x4x8 followed by four 3x3 stride-2 transposed convolutions
//! (4 -> 8 -> 16 -> 32 -> 64) and a logistic output. Hidden activations are
//! rectifiers; training is mini-batch ADAM on mean squared reconstruction
//! error.
//!
//! [`autove_run`] wires the model into the Voronoi-Elites loop: train on the
//! initial phenotypes, niche on normalized latent coordinates for half the
//! generations, retrain on the elite phenotypes, re-encode the archive and
//! finish the run.

pub mod nn;

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::archive::VeArchive;
use crate::geometry::{Bitmap, Solution, BITMAP_DIM, BITMAP_PIXELS};
use crate::optimizers::{self, DescriptorMode, OptimizerError, VeConfig, VeOutcome};
use crate::sampling::initial_population;
use nn::{Conv2d, ConvTranspose2d, Dense, Tensor};

const FILTERS: usize = 8;
const ENC_FLAT: usize = 16 * 16 * FILTERS;
const DEC_SEED_SIDE: usize = 4;
const DEC_FLAT: usize = DEC_SEED_SIDE * DEC_SEED_SIDE * FILTERS;
/// Magic bytes of the weight serialization format.
pub const WEIGHTS_MAGIC: &[u8; 4] = b"CAE1";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AeError {
    #[error("training diverged (non-finite loss) at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("dataset of {got} samples is smaller than the batch size {batch_size}")]
    DatasetTooSmall { got: usize, batch_size: usize },
    #[error("invalid train config: {0}")]
    InvalidConfig(&'static str),
    #[error("weight blob malformed: {0}")]
    BadWeights(&'static str),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
}

impl From<crate::archive::ArchiveError> for AeError {
    fn from(err: crate::archive::ArchiveError) -> Self {
        AeError::Optimizer(OptimizerError::Archive(err))
    }
}

/// ADAM hyperparameters and schedule for reconstruction training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl TrainConfig {
    pub fn standard(seed: u64) -> Self {
        Self {
            learning_rate: 0.001,
            epochs: 350,
            batch_size: 32,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed,
        }
    }

    fn validate(&self) -> Result<(), AeError> {
        if self.epochs == 0 {
            return Err(AeError::InvalidConfig("epochs must be at least 1"));
        }
        if !(self.learning_rate >= 0.0) {
            return Err(AeError::InvalidConfig("learning rate must be non-negative"));
        }
        if self.batch_size == 0 {
            return Err(AeError::InvalidConfig("batch size must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaeModel {
    pub latent_dim: usize,
    pub conv1: Conv2d,
    pub conv2: Conv2d,
    pub enc_fc: Dense,
    pub dec_fc: Dense,
    pub tconv1: ConvTranspose2d,
    pub tconv2: ConvTranspose2d,
    pub tconv3: ConvTranspose2d,
    pub tconv4: ConvTranspose2d,
}

/// Initialize a model with scaled-uniform fan-in weights.
pub fn cae_init(latent_dim: usize, seed: u64) -> CaeModel {
    assert!(latent_dim >= 1, "latent dimension must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CaeModel {
        latent_dim,
        conv1: Conv2d::init(1, FILTERS, &mut rng),
        conv2: Conv2d::init(FILTERS, FILTERS, &mut rng),
        enc_fc: Dense::init(ENC_FLAT, latent_dim, &mut rng),
        dec_fc: Dense::init(latent_dim, DEC_FLAT, &mut rng),
        tconv1: ConvTranspose2d::init(FILTERS, FILTERS, &mut rng),
        tconv2: ConvTranspose2d::init(FILTERS, FILTERS, &mut rng),
        tconv3: ConvTranspose2d::init(FILTERS, FILTERS, &mut rng),
        tconv4: ConvTranspose2d::init(FILTERS, 1, &mut rng),
    }
}

/// Bitmap as a 1x64x64 tensor of {0, 1} reals.
pub fn bitmap_tensor(bitmap: &Bitmap) -> Tensor {
    let mut data = Vec::with_capacity(BITMAP_PIXELS);
    for y in 0..BITMAP_DIM {
        for x in 0..BITMAP_DIM {
            data.push(if bitmap.get(x, y) { 1.0 } else { 0.0 });
        }
    }
    Tensor::from_data(1, BITMAP_DIM, BITMAP_DIM, data)
}

struct ForwardCache {
    input: Tensor,
    z1: Tensor,
    a1: Tensor,
    z2: Tensor,
    a2: Tensor,
    latent: Vec<f64>,
    zd: Vec<f64>,
    ad: Vec<f64>,
    zt1: Tensor,
    at1: Tensor,
    zt2: Tensor,
    at2: Tensor,
    zt3: Tensor,
    at3: Tensor,
    recon: Vec<f64>,
}

impl CaeModel {
    /// Latent code of a raster.
    pub fn encode(&self, bitmap: &Bitmap) -> Vec<f64> {
        let input = bitmap_tensor(bitmap);
        let a1 = nn::relu(&self.conv1.forward(&input));
        let a2 = nn::relu(&self.conv2.forward(&a1));
        self.enc_fc.forward(&a2.data)
    }

    /// Reconstruction (4096 values in (0,1)) from a latent code.
    pub fn decode(&self, latent: &[f64]) -> Vec<f64> {
        debug_assert_eq!(latent.len(), self.latent_dim);
        let ad: Vec<f64> = self
            .dec_fc
            .forward(latent)
            .into_iter()
            .map(|v| v.max(0.0))
            .collect();
        let seed = Tensor::from_data(FILTERS, DEC_SEED_SIDE, DEC_SEED_SIDE, ad);
        let t1 = nn::relu(&self.tconv1.forward(&seed));
        let t2 = nn::relu(&self.tconv2.forward(&t1));
        let t3 = nn::relu(&self.tconv3.forward(&t2));
        let z4 = self.tconv4.forward(&t3);
        nn::sigmoid_slice(&z4.data)
    }

    fn forward_cached(&self, bitmap: &Bitmap) -> ForwardCache {
        let input = bitmap_tensor(bitmap);
        let z1 = self.conv1.forward(&input);
        let a1 = nn::relu(&z1);
        let z2 = self.conv2.forward(&a1);
        let a2 = nn::relu(&z2);
        let latent = self.enc_fc.forward(&a2.data);
        let zd = self.dec_fc.forward(&latent);
        let ad: Vec<f64> = zd.iter().map(|&v| v.max(0.0)).collect();
        let seed = Tensor::from_data(FILTERS, DEC_SEED_SIDE, DEC_SEED_SIDE, ad.clone());
        let zt1 = self.tconv1.forward(&seed);
        let at1 = nn::relu(&zt1);
        let zt2 = self.tconv2.forward(&at1);
        let at2 = nn::relu(&zt2);
        let zt3 = self.tconv3.forward(&at2);
        let at3 = nn::relu(&zt3);
        let zt4 = self.tconv4.forward(&at3);
        let recon = nn::sigmoid_slice(&zt4.data);
        ForwardCache {
            input,
            z1,
            a1,
            z2,
            a2,
            latent,
            zd,
            ad,
            zt1,
            at1,
            zt2,
            at2,
            zt3,
            at3,
            recon,
        }
    }

    // Per-sample loss and parameter gradients of the mean-pixel MSE.
    fn backward(&self, cache: &ForwardCache) -> (f64, Gradients) {
        let n = BITMAP_PIXELS as f64;
        let mut loss = 0.0;
        let mut grad_recon = vec![0.0; BITMAP_PIXELS];
        for i in 0..BITMAP_PIXELS {
            let diff = cache.recon[i] - cache.input.data[i];
            loss += diff * diff;
            grad_recon[i] = 2.0 * diff / n;
        }
        loss /= n;

        let gz4 = nn::sigmoid_backward(&cache.recon, &grad_recon);
        let gz4 = Tensor::from_data(1, BITMAP_DIM, BITMAP_DIM, gz4);
        let (gat3, t4_w, t4_b) = self.tconv4.backward(&cache.at3, &gz4);
        let gzt3 = nn::relu_backward(&cache.zt3, &gat3);
        let (gat2, t3_w, t3_b) = self.tconv3.backward(&cache.at2, &gzt3);
        let gzt2 = nn::relu_backward(&cache.zt2, &gat2);
        let (gat1, t2_w, t2_b) = self.tconv2.backward(&cache.at1, &gzt2);
        let gzt1 = nn::relu_backward(&cache.zt1, &gat1);
        let seed = Tensor::from_data(FILTERS, DEC_SEED_SIDE, DEC_SEED_SIDE, cache.ad.clone());
        let (gseed, t1_w, t1_b) = self.tconv1.backward(&seed, &gzt1);
        let gzd: Vec<f64> = gseed
            .data
            .iter()
            .zip(cache.zd.iter())
            .map(|(&g, &z)| if z > 0.0 { g } else { 0.0 })
            .collect();
        let (glatent, dec_w, dec_b) = self.dec_fc.backward(&cache.latent, &gzd);
        let (ga2, enc_w, enc_b) = self.enc_fc.backward(&cache.a2.data, &glatent);
        let ga2 = Tensor::from_data(FILTERS, 16, 16, ga2);
        let gz2 = nn::relu_backward(&cache.z2, &ga2);
        let (ga1, c2_w, c2_b) = self.conv2.backward(&cache.a1, &gz2);
        let gz1 = nn::relu_backward(&cache.z1, &ga1);
        let (_, c1_w, c1_b) = self.conv1.backward(&cache.input, &gz1);

        let grads = Gradients {
            parts: vec![
                c1_w, c1_b, c2_w, c2_b, enc_w, enc_b, dec_w, dec_b, t1_w, t1_b, t2_w, t2_b,
                t3_w, t3_b, t4_w, t4_b,
            ],
        };
        (loss, grads)
    }

    /// Parameter vectors in serialization order.
    pub fn params(&self) -> Vec<&[f64]> {
        vec![
            &self.conv1.weights,
            &self.conv1.bias,
            &self.conv2.weights,
            &self.conv2.bias,
            &self.enc_fc.weights,
            &self.enc_fc.bias,
            &self.dec_fc.weights,
            &self.dec_fc.bias,
            &self.tconv1.weights,
            &self.tconv1.bias,
            &self.tconv2.weights,
            &self.tconv2.bias,
            &self.tconv3.weights,
            &self.tconv3.bias,
            &self.tconv4.weights,
            &self.tconv4.bias,
        ]
    }

    /// Mutable parameter vectors in the same order as [`CaeModel::params`].
    pub fn params_mut(&mut self) -> Vec<&mut Vec<f64>> {
        vec![
            &mut self.conv1.weights,
            &mut self.conv1.bias,
            &mut self.conv2.weights,
            &mut self.conv2.bias,
            &mut self.enc_fc.weights,
            &mut self.enc_fc.bias,
            &mut self.dec_fc.weights,
            &mut self.dec_fc.bias,
            &mut self.tconv1.weights,
            &mut self.tconv1.bias,
            &mut self.tconv2.weights,
            &mut self.tconv2.bias,
            &mut self.tconv3.weights,
            &mut self.tconv3.bias,
            &mut self.tconv4.weights,
            &mut self.tconv4.bias,
        ]
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    /// Flat weight blob: magic bytes then every parameter vector in layer
    /// order as little-endian f32.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + 4 * self.param_count());
        out.extend_from_slice(WEIGHTS_MAGIC);
        for part in self.params() {
            for &v in part {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        out
    }

    /// Rebuild a model from [`CaeModel::to_bytes`] output. The latent
    /// dimension comes from the sidecar manifest.
    pub fn from_bytes(bytes: &[u8], latent_dim: usize) -> Result<Self, AeError> {
        if bytes.len() < 4 || &bytes[..4] != WEIGHTS_MAGIC {
            return Err(AeError::BadWeights("missing CAE1 magic"));
        }
        let mut model = cae_init(latent_dim, 0);
        let expected = 4 + 4 * model.param_count();
        if bytes.len() != expected {
            return Err(AeError::BadWeights("length does not match architecture"));
        }
        let mut offset = 4;
        for part in model.params_mut() {
            for v in part.iter_mut() {
                let raw: [u8; 4] = bytes[offset..offset + 4].try_into().unwrap();
                *v = f32::from_le_bytes(raw) as f64;
                offset += 4;
            }
        }
        Ok(model)
    }

    /// Sidecar manifest describing the architecture.
    pub fn manifest(&self, seed: u64) -> alloc::string::String {
        alloc::format!(
            "format=CAE1\nlatent_dim={}\ninput=64x64x1\n\
             encoder=conv3x3s2f8,conv3x3s2f8,dense{}\n\
             decoder=dense{},tconv3x3s2f8,tconv3x3s2f8,tconv3x3s2f8,tconv3x3s2f1\n\
             params={}\nseed={}\n",
            self.latent_dim,
            self.latent_dim,
            DEC_FLAT,
            self.param_count(),
            seed
        )
    }
}

/// Latent code plus reconstruction of one raster.
pub fn forward(model: &CaeModel, bitmap: &Bitmap) -> (Vec<f64>, Vec<f64>) {
    let latent = model.encode(bitmap);
    let recon = model.decode(&latent);
    (latent, recon)
}

struct Gradients {
    parts: Vec<Vec<f64>>,
}

impl Gradients {
    fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.parts.iter_mut().zip(other.parts.iter()) {
            for (x, y) in a.iter_mut().zip(b.iter()) {
                *x += y;
            }
        }
    }

    fn scale(&mut self, factor: f64) {
        for part in self.parts.iter_mut() {
            for v in part.iter_mut() {
                *v *= factor;
            }
        }
    }
}

struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: u64,
}

impl Adam {
    fn new(model: &CaeModel) -> Self {
        let shapes: Vec<Vec<f64>> = model.params().iter().map(|p| vec![0.0; p.len()]).collect();
        Self {
            m: shapes.clone(),
            v: shapes,
            t: 0,
        }
    }

    fn step(&mut self, model: &mut CaeModel, grads: &Gradients, cfg: &TrainConfig) {
        self.t += 1;
        let bias1 = 1.0 - libm::pow(cfg.beta1, self.t as f64);
        let bias2 = 1.0 - libm::pow(cfg.beta2, self.t as f64);
        for ((param, grad), (m, v)) in model
            .params_mut()
            .into_iter()
            .zip(grads.parts.iter())
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            for i in 0..param.len() {
                let g = grad[i];
                m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
                v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
                let m_hat = m[i] / bias1;
                let v_hat = v[i] / bias2;
                param[i] -= cfg.learning_rate * m_hat / (libm::sqrt(v_hat) + cfg.epsilon);
            }
        }
    }
}

fn batch_losses_and_grads(model: &CaeModel, batch: &[&Bitmap]) -> Vec<(f64, Gradients)> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        batch
            .par_iter()
            .map(|bitmap| {
                let cache = model.forward_cached(bitmap);
                model.backward(&cache)
            })
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        batch
            .iter()
            .map(|bitmap| {
                let cache = model.forward_cached(bitmap);
                model.backward(&cache)
            })
            .collect()
    }
}

/// Mini-batch ADAM on mean squared reconstruction error. Returns the
/// per-epoch mean loss history; bit-identical for a fixed seed (batch
/// gradients are reduced in sample order even in parallel mode).
pub fn train(
    model: &mut CaeModel,
    data: &[Bitmap],
    cfg: &TrainConfig,
) -> Result<Vec<f64>, AeError> {
    cfg.validate()?;
    if data.len() < cfg.batch_size {
        return Err(AeError::DatasetTooSmall {
            got: data.len(),
            batch_size: cfg.batch_size,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(model);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&Bitmap> = chunk.iter().map(|&i| &data[i]).collect();
            let results = batch_losses_and_grads(model, &batch);
            let mut iter = results.into_iter();
            let (first_loss, mut grads) = iter.next().expect("batches are non-empty");
            let mut batch_loss = first_loss;
            for (loss, g) in iter {
                batch_loss += loss;
                grads.add_assign(&g);
            }
            epoch_loss += batch_loss;
            grads.scale(1.0 / batch.len() as f64);
            adam.step(model, &grads, cfg);
        }
        let mean = epoch_loss / data.len() as f64;
        if !mean.is_finite() {
            return Err(AeError::Diverged { epoch });
        }
        history.push(mean);
    }
    Ok(history)
}

/// Per-dimension min/max scaling of latent codes to [0, 1], fitted on the
/// current training corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentNormalizer {
    mins: Vec<f64>,
    maxs: Vec<f64>,
}

impl LatentNormalizer {
    pub fn fit(latents: &[Vec<f64>]) -> Self {
        assert!(!latents.is_empty(), "normalizer needs at least one code");
        let dim = latents[0].len();
        let mut mins = vec![f64::INFINITY; dim];
        let mut maxs = vec![f64::NEG_INFINITY; dim];
        for code in latents {
            for (d, &v) in code.iter().enumerate() {
                mins[d] = mins[d].min(v);
                maxs[d] = maxs[d].max(v);
            }
        }
        Self { mins, maxs }
    }

    /// Normalize a code; out-of-range coordinates clamp to [0, 1] and
    /// degenerate dimensions (max == min) sit at 0.5.
    pub fn normalize(&self, latent: &[f64]) -> Vec<f64> {
        latent
            .iter()
            .enumerate()
            .map(|(d, &v)| {
                let range = self.maxs[d] - self.mins[d];
                if range > 0.0 {
                    ((v - self.mins[d]) / range).clamp(0.0, 1.0)
                } else {
                    0.5
                }
            })
            .collect()
    }
}

/// Normalized latent descriptor of a raster.
pub fn latent_descriptor(
    model: &CaeModel,
    normalizer: &LatentNormalizer,
    bitmap: &Bitmap,
) -> Vec<f64> {
    normalizer.normalize(&model.encode(bitmap))
}

#[derive(Debug, Clone)]
pub struct AutoVeOutcome {
    pub archive: VeArchive,
    pub evaluations: u64,
    /// Loss histories of the initial training and the elite retraining.
    pub loss_histories: (Vec<f64>, Vec<f64>),
    pub model: CaeModel,
    pub normalizer: LatentNormalizer,
}

fn encode_batch(
    model: &CaeModel,
    normalizer: &LatentNormalizer,
    solutions: &[Solution],
) -> Vec<Vec<f64>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        solutions
            .par_iter()
            .map(|s| latent_descriptor(model, normalizer, &s.bitmap))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        solutions
            .iter()
            .map(|s| latent_descriptor(model, normalizer, &s.bitmap))
            .collect()
    }
}

/// Voronoi-Elites with autoencoder descriptors.
///
/// Pipeline: Sobol genomes are expressed and rasterized; the autoencoder
/// trains on those phenotypes; VE runs half its generations niching on
/// normalized latent coordinates; the autoencoder retrains (fine-tunes) on
/// the elite phenotypes; the archive is re-encoded and re-pruned; VE finishes
/// the remaining generations.
pub fn autove_run(cfg: &VeConfig, train_cfg: &TrainConfig) -> Result<AutoVeOutcome, AeError> {
    cfg.validate().map_err(AeError::from)?;
    let DescriptorMode::Latent { dim } = cfg.descriptor_mode else {
        return Err(AeError::from(OptimizerError::InvalidConfig(
            "autove_run requires a latent descriptor mode",
        )));
    };
    let bounds = cfg.bounds_case.bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut evaluations = 0u64;

    let init = initial_population(cfg.archive_capacity, &bounds);
    evaluations += init.len() as u64;
    let init_solutions = optimizers::evaluate_batch(&init, &bounds);
    let corpus: Vec<Bitmap> = init_solutions.iter().map(|s| s.bitmap).collect();

    let mut model = cae_init(dim, train_cfg.seed);
    let history_initial = train(&mut model, &corpus, train_cfg)?;
    let codes: Vec<Vec<f64>> = corpus.iter().map(|b| model.encode(b)).collect();
    let mut normalizer = LatentNormalizer::fit(&codes);

    let mut archive = VeArchive::new(cfg.archive_capacity, dim);
    let descriptors = encode_batch(&model, &normalizer, &init_solutions);
    optimizers::ingest(&mut archive, init_solutions, descriptors)?;
    archive.prune_to_capacity();

    let first_half = cfg.generations / 2;
    let second_half = cfg.generations - first_half;
    optimizers::run_generations(
        &mut archive,
        &mut rng,
        first_half,
        cfg.archive_capacity,
        cfg.mutation_sigma_fraction,
        &bounds,
        &mut evaluations,
        |solutions| encode_batch(&model, &normalizer, solutions),
    )?;

    // retrain on what the archive discovered, then re-encode the elites
    let elite_bitmaps: Vec<Bitmap> = archive.elites().iter().map(|e| e.bitmap).collect();
    let mut retrain_cfg = *train_cfg;
    retrain_cfg.batch_size = retrain_cfg.batch_size.min(elite_bitmaps.len().max(1));
    let history_retrain = train(&mut model, &elite_bitmaps, &retrain_cfg)?;
    let elite_codes: Vec<Vec<f64>> = elite_bitmaps.iter().map(|b| model.encode(b)).collect();
    normalizer = LatentNormalizer::fit(&elite_codes);
    archive.remap_descriptors(|elite| latent_descriptor(&model, &normalizer, &elite.bitmap))?;
    archive.prune_to_capacity();

    optimizers::run_generations(
        &mut archive,
        &mut rng,
        second_half,
        cfg.archive_capacity,
        cfg.mutation_sigma_fraction,
        &bounds,
        &mut evaluations,
        |solutions| encode_batch(&model, &normalizer, solutions),
    )?;

    Ok(AutoVeOutcome {
        archive,
        evaluations,
        loss_histories: (history_initial, history_retrain),
        model,
        normalizer,
    })
}

/// Outcome shim so callers can treat AutoVE like the other VE modes.
impl From<AutoVeOutcome> for VeOutcome {
    fn from(outcome: AutoVeOutcome) -> Self {
        VeOutcome {
            archive: outcome.archive,
            evaluations: outcome.evaluations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_weights() {
        let a = cae_init(2, 9);
        let b = cae_init(2, 9);
        assert_eq!(a, b);
        let c = cae_init(2, 10);
        assert_ne!(a, c);
    }

    #[test]
    fn encoder_output_dimension_matches() {
        let model = cae_init(2, 1);
        let latent = model.encode(&Bitmap::empty());
        assert_eq!(latent.len(), 2);
    }

    #[test]
    fn zero_image_forward_is_finite_and_squashed() {
        let model = cae_init(5, 3);
        let (latent, recon) = forward(&model, &Bitmap::empty());
        assert!(latent.iter().all(|v| v.is_finite()));
        assert_eq!(recon.len(), BITMAP_PIXELS);
        assert!(recon.iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn identical_bitmaps_identical_latents() {
        let model = cae_init(3, 4);
        let bitmap = Bitmap::empty().complement();
        assert_eq!(model.encode(&bitmap), model.encode(&bitmap));
    }

    #[test]
    fn zero_learning_rate_keeps_weights() {
        let mut model = cae_init(2, 5);
        let before = model.clone();
        let mut cfg = TrainConfig::standard(5);
        cfg.learning_rate = 0.0;
        cfg.epochs = 2;
        cfg.batch_size = 1;
        let history = train(&mut model, &[Bitmap::empty()], &cfg).unwrap();
        assert_eq!(model, before);
        assert_eq!(history[0], history[1]);
    }

    #[test]
    fn train_rejects_small_dataset() {
        let mut model = cae_init(2, 5);
        let cfg = TrainConfig::standard(5);
        let err = train(&mut model, &[Bitmap::empty()], &cfg).unwrap_err();
        assert!(matches!(err, AeError::DatasetTooSmall { got: 1, batch_size: 32 }));
    }

    #[test]
    fn weight_bytes_round_trip() {
        let model = cae_init(2, 11);
        let bytes = model.to_bytes();
        assert_eq!(&bytes[..4], WEIGHTS_MAGIC);
        let restored = CaeModel::from_bytes(&bytes, 2).unwrap();
        // f32 round trip loses precision; compare at f32 resolution
        for (a, b) in model.params().iter().zip(restored.params().iter()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert_eq!(*x as f32, *y as f32);
            }
        }
        assert!(CaeModel::from_bytes(&bytes[..10], 2).is_err());
    }

    #[test]
    fn normalizer_endpoints_and_degenerate_rule() {
        let norm = LatentNormalizer::fit(&[vec![0.0, 7.0], vec![2.0, 7.0]]);
        assert_eq!(norm.normalize(&[0.0, 7.0]), vec![0.0, 0.5]);
        assert_eq!(norm.normalize(&[2.0, 7.0]), vec![1.0, 0.5]);
        assert_eq!(norm.normalize(&[-5.0, 7.0]), vec![0.0, 0.5]);
        assert_eq!(norm.normalize(&[9.0, 7.0]), vec![1.0, 0.5]);
    }
}
