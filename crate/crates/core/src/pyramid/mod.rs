//! Steerable (frequency-domain) and Laplacian (spatial-domain) pyramids.

pub mod fft;
pub mod filters;
pub mod laplacian;
pub mod steerable;

pub use filters::FilterBank;
pub use laplacian::{build_laplacian, reconstruct_laplacian, LaplacianPyramid};
pub use steerable::{build_steerable, reconstruct_steerable, SteerablePyramid};

/// Smallest edge length a subband may have.
pub const MIN_SUBBAND_SIZE: usize = 4;

/// Deepest decomposition a `width x height` raster supports.
///
/// Every stage halves both dimensions, so both must stay integral, and the
/// coarsest subband must keep at least [`MIN_SUBBAND_SIZE`] pixels per edge.
pub fn max_levels(width: usize, height: usize) -> usize {
    let mut levels = 0;
    let (mut w, mut h) = (width, height);
    while w % 2 == 0 && h % 2 == 0 && w / 2 >= MIN_SUBBAND_SIZE && h / 2 >= MIN_SUBBAND_SIZE {
        w /= 2;
        h /= 2;
        levels += 1;
    }
    levels
}
