//! Seeded, reproducible sample points.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fields::{DomainBox, Point};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` pairs drawn uniformly from the two boxes shrunk by `margin`.
pub fn interior_pairs(
    source: &DomainBox,
    target: &DomainBox,
    margin: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<(Point, Point)>> {
    let src = source.shrink(margin)?;
    let tgt = target.shrink(margin)?;
    let mut r = rng(seed);
    Ok((0..count)
        .map(|_| (src.sample(&mut r), tgt.sample(&mut r)))
        .collect())
}

/// `count` points drawn uniformly from the box shrunk by `margin`.
pub fn interior_points(
    domain: &DomainBox,
    margin: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<Point>> {
    let inner = domain.shrink(margin)?;
    let mut r = rng(seed);
    Ok((0..count).map(|_| inner.sample(&mut r)).collect())
}
