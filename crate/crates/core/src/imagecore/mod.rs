//! Image numerics shared by every solver: the image/kernel types, circular
//! convolution, integer-factor resampling, noise, metrics, and file I/O.
//!
//! Boundaries are circular everywhere.

mod conv;
mod image;
mod io;
mod kernel;
mod metrics;
mod noise;
mod resample;

pub use conv::{apply_spectrum, circ_conv, kernel_to_grid, Fft2};
pub use image::Image;
pub use io::{decode, encode_pfm, encode_pgm, read_image, write_image};
pub use kernel::Kernel;
pub use metrics::{mse, psnr, PSNR_IDENTICAL};
pub use noise::add_gaussian_noise;
pub use resample::{downsample, replicate, upsample};
