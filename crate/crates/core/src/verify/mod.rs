//! Detection scores, intensity distributions and the two-sample KS test.

mod contingency;
mod distribution;
mod ks;

pub use contingency::{contingency, far, pod, ts, ContingencyTable, DetectionScores};
pub use distribution::{score_cdf, EmpiricalDistribution, Histogram, ScoreCdf};
pub use ks::{critical_coefficient, ks_statistic, ks_two_sample, KsResult};

use crate::error::{Error, Result};
use crate::grid::{check_array_dims, Mask, RainGrid};

/// Default rain/no-rain cut for detection scores, mm/hr.
pub const DEFAULT_RAIN_THRESHOLD: f64 = 0.0;

/// Default KS significance level.
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Default intensity histogram bin width, mm/hr.
pub const DEFAULT_BIN_WIDTH: f64 = 0.5;

/// Whether KS compares pixels pooled over all images or image by image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KsMode {
    #[default]
    Pooled,
    PerImage,
}

/// One sample list per grid, gathered at the masked pixels in row-major order.
pub fn intensity_samples(grids: &[&RainGrid], mask: &Mask) -> Result<Vec<Vec<f64>>> {
    grids
        .iter()
        .enumerate()
        .map(|(i, g)| {
            check_array_dims(g.mask(), mask)?;
            mask.indexed_iter()
                .filter(|(_, &m)| m)
                .map(|((r, c), _)| {
                    g.get(r, c).ok_or_else(|| {
                        Error::Input(format!("mask selects missing pixel ({r}, {c}) of grid {i}"))
                    })
                })
                .collect()
        })
        .collect()
}
