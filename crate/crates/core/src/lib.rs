//! Structured color-noise masks for masked-modeling pretraining.
//!
//! * [`noise`]: white noise and Gaussian-filtered red, blue and green variants
//!   in 2D and 3D.
//! * [`masking`]: exact-ratio binarization of noise (η) and tube masks.
//! * [`optim_blue`]: greedy optimization of K masks with well-separated
//!   visible patches.
//! * [`bank`]: precomputed banks, their on-disk format, and augmented sampling.
//! * [`spectrum`] and [`verify`]: spectral and geometric oracles.
//!
//! Masks use `true` = masked everywhere except inside [`optim_blue`].

pub mod augment;
pub mod bank;
pub mod error;
pub mod exec;
pub mod grid;
pub mod masking;
pub mod noise;
pub mod npy;
pub mod optim_blue;
pub mod rng;
pub mod spectrum;
pub mod verify;

pub use bank::{
    build_bank, pair_sample, read_bank, sample_mask, write_bank, AugmentSpec, BankColor,
    GenConfig, MaskBank,
};
pub use error::{Error, Result};
pub use exec::Parallelism;
pub use grid::GridShape;
pub use masking::{eta, masked_count, partition, tube_mask, MaskRatio, MaskTensor};
pub use noise::{color_noise, filter_gaussian, gaussian_kernel, normalize, white_noise, Color, NoiseTensor, SigmaPolicy};
pub use optim_blue::{clustering_score, export_mask, optimize_blue, MaskSet, OptimBlueConfig};
pub use spectrum::{classify_color, radial_profile, temporal_smoothness, uniformity, SpectralClass, SpectrumProfile};
