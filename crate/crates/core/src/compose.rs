//! Final product (texture masked by shape) and the two reference fusers.

use ndarray::{Array2, Zip};

use crate::error::Result;
use crate::fusion::{produce_texture, FusionConfig};
use crate::grid::{check_array_dims, check_dims, GridMeta, RainGrid, ShapeGrid, Support};
use crate::shape::{interpolate_pair, produce_shape};

/// Applies a shape to a texture: rain -> `max(texture, 0)`, dry -> 0, missing -> missing.
pub fn produce_fused(texture: &Array2<f64>, shape: &ShapeGrid) -> Result<RainGrid> {
    check_array_dims(texture, shape.codes())?;
    let mut values = Array2::zeros(texture.dim());
    let mut valid = Array2::from_elem(texture.dim(), false);
    Zip::from(&mut values)
        .and(&mut valid)
        .and(texture)
        .and(shape.codes())
        .for_each(|v, ok, &t, &s| {
            (*v, *ok) = match s {
                Support::Rain => (t.max(0.0), true),
                Support::Dry => (0.0, true),
                Support::Missing => (0.0, false),
            };
        });
    RainGrid::new(*shape.meta(), values, valid)
}

/// Texture and shape branches combined into the fused grid.
pub fn run_pipeline(a: &RainGrid, b: &RainGrid, cfg: &FusionConfig) -> Result<RainGrid> {
    check_dims(a.meta(), b.meta())?;
    cfg.validate(a.width(), a.height())?;
    let shape = produce_shape(a, b, cfg.rain_threshold)?;
    let texture = produce_texture(a, b, cfg)?;
    produce_fused(&texture, &shape)
}

/// Reference fuser: plain interpolation.
pub fn baseline_interpolation(a: &RainGrid, b: &RainGrid) -> Result<RainGrid> {
    interpolate_pair(a, b)
}

/// A texture clamped at 0 and valid everywhere, with no shape applied.
pub fn produce_unconstrained(texture: &Array2<f64>, meta: &GridMeta) -> Result<RainGrid> {
    RainGrid::from_values(*meta, texture.mapv(|v| v.max(0.0)))
}

/// Reference fuser: pyramid texture with no shape constraint.
pub fn baseline_pyramid(a: &RainGrid, b: &RainGrid, cfg: &FusionConfig) -> Result<RainGrid> {
    produce_unconstrained(&produce_texture(a, b, cfg)?, a.meta())
}
