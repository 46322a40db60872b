//! Shape production: the rain-support mask built from a linear
//! interpolation of the two inputs.

use ndarray::{Array2, Zip};

use crate::error::{Error, Result};
use crate::grid::{check_dims, RainGrid, ShapeGrid, Support};

/// Equal-weight interpolation of two grids.
///
/// Both valid: mean. One valid: that value. Neither: missing.
pub fn interpolate_pair(a: &RainGrid, b: &RainGrid) -> Result<RainGrid> {
    check_dims(a.meta(), b.meta())?;
    let (va, vb) = (a.filled(0.0), b.filled(0.0));
    let mut values = Array2::zeros(a.meta().shape());
    let mut valid = Array2::from_elem(a.meta().shape(), false);
    Zip::from(&mut values)
        .and(&mut valid)
        .and(&va)
        .and(a.mask())
        .and(&vb)
        .and(b.mask())
        .for_each(|v, ok, &x, &xa, &y, &yb| {
            (*v, *ok) = match (xa, yb) {
                (true, true) => (0.5 * (x + y), true),
                (true, false) => (x, true),
                (false, true) => (y, true),
                (false, false) => (0.0, false),
            };
        });
    RainGrid::new(*a.meta(), values, valid)
}

/// Ternary support: -1 where both inputs are missing, otherwise 1 when the
/// interpolated intensity exceeds `rain_threshold` and 0 when it does not.
pub fn produce_shape(a: &RainGrid, b: &RainGrid, rain_threshold: f64) -> Result<ShapeGrid> {
    if !(rain_threshold.is_finite() && rain_threshold >= 0.0) {
        return Err(Error::Param(format!(
            "rain threshold must be finite and >= 0, got {rain_threshold}"
        )));
    }
    let merged = interpolate_pair(a, b)?;
    let codes = Array2::from_shape_fn(merged.meta().shape(), |(r, c)| match merged.get(r, c) {
        None => Support::Missing,
        Some(v) if v > rain_threshold => Support::Rain,
        Some(_) => Support::Dry,
    });
    ShapeGrid::new(*merged.meta(), codes)
}
