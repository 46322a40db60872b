//! Texture production: pairwise fusion in the steerable-pyramid domain.
//!
//! Each pair of corresponding subbands is itself split with a Laplacian
//! pyramid, the two Laplacian pyramids are merged coefficient-wise by
//! absolute-value-maximum selection, and the merged subband is rebuilt.

use ndarray::{Array2, Zip};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{check_array_dims, check_dims, RainGrid};
use crate::pyramid::{
    build_laplacian, max_levels, reconstruct_laplacian, steerable, FilterBank, LaplacianPyramid,
};

/// How missing pixels are filled before the transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FillPolicy {
    /// Missing pixels become 0 mm/hr.
    #[default]
    Zero,
    /// Missing pixels take the other image's value where it is valid, 0 otherwise.
    Cross,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionConfig {
    pub levels: usize,
    pub orientations: usize,
    /// Laplacian depth used inside each subband, capped by the subband size.
    pub inner_depth: usize,
    pub missing_fill: FillPolicy,
    /// Interpolated intensity above which the shape marks rain as possible.
    pub rain_threshold: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            levels: 4,
            orientations: 16,
            inner_depth: 2,
            missing_fill: FillPolicy::Zero,
            rain_threshold: 0.0,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        let max = max_levels(width, height);
        if self.levels > max {
            return Err(Error::Depth {
                requested: self.levels,
                max,
                width,
                height,
            });
        }
        if self.orientations == 0 {
            return Err(Error::Param("orientations must be >= 1".into()));
        }
        if !(self.rain_threshold.is_finite() && self.rain_threshold >= 0.0) {
            return Err(Error::Param(format!(
                "rain threshold must be finite and >= 0, got {}",
                self.rain_threshold
            )));
        }
        Ok(())
    }
}

/// Absolute-value-maximum selection of one coefficient pair; ties keep `a`.
#[inline]
pub fn avms(a: f64, b: f64) -> f64 {
    if a.abs() >= b.abs() {
        a
    } else {
        b
    }
}

/// Element-wise [`avms`] over two equally shaped arrays.
pub fn avms_merge(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    check_array_dims(a, b)?;
    Ok(Zip::from(a).and(b).map_collect(|&x, &y| avms(x, y)))
}

/// Fuses two subimages through their Laplacian pyramids.
pub fn fuse_subimage_pair(a: &Array2<f64>, b: &Array2<f64>, inner_depth: usize) -> Result<Array2<f64>> {
    check_array_dims(a, b)?;
    let pa = build_laplacian(a, inner_depth)?;
    let pb = build_laplacian(b, inner_depth)?;
    let details = pa
        .details
        .iter()
        .zip(&pb.details)
        .map(|(x, y)| avms_merge(x, y))
        .collect::<Result<Vec<_>>>()?;
    let base = avms_merge(&pa.base, &pb.base)?;
    reconstruct_laplacian(&LaplacianPyramid { details, base })
}

fn prefill(a: &RainGrid, b: &RainGrid, policy: FillPolicy) -> (Array2<f64>, Array2<f64>) {
    match policy {
        FillPolicy::Zero => (a.filled(0.0), b.filled(0.0)),
        FillPolicy::Cross => {
            let fa = b.filled(0.0);
            let fb = a.filled(0.0);
            let mut xa = a.filled(0.0);
            let mut xb = b.filled(0.0);
            Zip::from(&mut xa).and(a.mask()).and(&fa).for_each(|v, &ok, &f| {
                if !ok {
                    *v = f;
                }
            });
            Zip::from(&mut xb).and(b.mask()).and(&fb).for_each(|v, &ok, &f| {
                if !ok {
                    *v = f;
                }
            });
            (xa, xb)
        }
    }
}

/// Gap-free fused intensity field of two grids. May contain small negative values.
pub fn produce_texture(a: &RainGrid, b: &RainGrid, cfg: &FusionConfig) -> Result<Array2<f64>> {
    check_dims(a.meta(), b.meta())?;
    let (width, height) = (a.width(), a.height());
    cfg.validate(width, height)?;

    let (xa, xb) = prefill(a, b, cfg.missing_fill);
    let bank = FilterBank::new(width, height, cfg.levels, cfg.orientations)?;
    let pa = steerable::build_with(&bank, &xa)?;
    let pb = steerable::build_with(&bank, &xb)?;

    let pairs: Vec<_> = pa.bands().into_iter().zip(pb.bands()).collect();
    let fused = pairs
        .into_par_iter()
        .map(|(x, y)| {
            let depth = cfg.inner_depth.min(max_levels(x.ncols(), x.nrows()));
            fuse_subimage_pair(x, y, depth)
        })
        .collect::<Result<Vec<_>>>()?;

    steerable::reconstruct_with(&bank, &pa.with_bands(fused)?)
}
