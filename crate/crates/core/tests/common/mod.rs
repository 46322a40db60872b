#![allow(dead_code)]

use gapfuse::{GridMeta, RainGrid};
use ndarray::Array2;
use proptest::prelude::*;

/// Intensity in mm/hr with a healthy share of exact zeros.
pub fn intensity() -> impl Strategy<Value = f64> {
    prop_oneof![1 => Just(0.0), 3 => 0.0..20.0f64]
}

fn pixel(p_missing: f64) -> impl Strategy<Value = Option<f64>> {
    let w_missing = (p_missing * 100.0).round() as u32;
    prop_oneof![
        w_missing.max(1) => Just(None),
        (100 - w_missing).max(1) => intensity().prop_map(Some),
    ]
}

pub fn grid_of(w: usize, h: usize, p_missing: f64) -> impl Strategy<Value = RainGrid> {
    proptest::collection::vec(pixel(p_missing), w * h).prop_map(move |px| {
        RainGrid::from_options(GridMeta::with_size(w, h).unwrap(), &px).unwrap()
    })
}

pub fn dims(max: usize) -> impl Strategy<Value = (usize, usize)> {
    (1..=max, 1..=max)
}

/// Two grids of one random size.
pub fn grid_pair(max: usize) -> impl Strategy<Value = (RainGrid, RainGrid)> {
    dims(max).prop_flat_map(|(w, h)| (grid_of(w, h, 0.3), grid_of(w, h, 0.3)))
}

pub fn gap_free(w: usize, h: usize) -> impl Strategy<Value = RainGrid> {
    grid_of(w, h, 0.0).prop_map(|g| {
        RainGrid::from_values(*g.meta(), g.filled(0.0)).unwrap()
    })
}

pub fn image(rows: usize, cols: usize) -> impl Strategy<Value = Array2<f64>> {
    proptest::collection::vec(-10.0..10.0f64, rows * cols)
        .prop_map(move |v| Array2::from_shape_vec((rows, cols), v).unwrap())
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn range(a: &Array2<f64>) -> f64 {
    let lo = a.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// Deterministic pseudo-random image without going through proptest.
pub fn lcg_image(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    Array2::from_shape_fn((rows, cols), |_| {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((s >> 11) as f64 / (1u64 << 53) as f64) * 10.0
    })
}
