//! Merging of two gap-ridden rainfall rasters.
//!
//! The fused product combines two branches:
//!
//! * **texture**: both inputs are decomposed with a steerable pyramid, every
//!   pair of subbands is fused through a Laplacian pyramid with
//!   absolute-value-maximum selection, and the result is synthesized back
//!   ([`fusion::produce_texture`]);
//! * **shape**: a ternary rain-support mask from a linear interpolation of
//!   the inputs ([`shape::produce_shape`]).
//!
//! The texture is kept where the shape allows rain, zeroed where it does
//! not, and left missing where both inputs were missing
//! ([`compose::run_pipeline`]). [`verify`] holds the detection scores and
//! distribution tests used to evaluate products against a truth field, and
//! [`synth`] generates synthetic truth/observation pairs.

pub mod compose;
pub mod error;
pub mod fusion;
pub mod grid;
pub mod io;
pub mod pyramid;
pub mod shape;
pub mod synth;
pub mod verify;

pub use compose::{
    baseline_interpolation, baseline_pyramid, produce_fused, produce_unconstrained, run_pipeline,
};
pub use error::{Error, Result};
pub use fusion::{avms_merge, fuse_subimage_pair, produce_texture, FillPolicy, FusionConfig};
pub use grid::{
    common_valid_mask, valid_pixel_count, GridMeta, Mask, RainGrid, ShapeGrid, Support,
    MIN_VALID_PIXELS,
};
pub use pyramid::{max_levels, FilterBank, LaplacianPyramid, SteerablePyramid};
pub use shape::{interpolate_pair, produce_shape};
