//! Seeded random inputs shared by the experiment suites.
//!
//! All generators draw from [`ChaCha8Rng`] seeded with a `u64`, so identical
//! seeds reproduce identical sample streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::cone::ConePoint;
use crate::moebius::{DiscPoint, Su11Element, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point of the disc of the given radius.
pub fn disc_point<R: Rng>(rng: &mut R, radius: f64) -> DiscPoint {
    let r = radius * rng.random::<f64>().sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    DiscPoint::new(C64::from_polar(r, theta)).expect("radius below one")
}

/// `R(phi) T(l) R(psi)` with `l` uniform in `[0, max_length]`.
pub fn su11<R: Rng>(rng: &mut R, max_length: f64) -> Su11Element {
    let l = max_length * rng.random::<f64>();
    let phi = 2.0 * PI * rng.random::<f64>();
    let psi = 2.0 * PI * rng.random::<f64>();
    Su11Element::rotation(phi)
        .compose(&Su11Element::translation(l))
        .compose(&Su11Element::rotation(psi))
}

/// Cone point `[z1, z2, t]` with `|z2| / |z1| <= max_ratio` and `t > 0`.
pub fn cone_point<R: Rng>(rng: &mut R, max_ratio: f64) -> ConePoint {
    let ratio = max_ratio * rng.random::<f64>();
    let a = C64::from_polar(1.0, 2.0 * PI * rng.random::<f64>());
    let b = C64::from_polar(ratio, 2.0 * PI * rng.random::<f64>());
    let t = (1.0 - ratio * ratio).sqrt();
    ConePoint::new(a, b, t).expect("sampled on the cone")
}

/// Cone point with `t = 0`: `|z1| = |z2|` with independent phases.
pub fn null_cone_point<R: Rng>(rng: &mut R) -> ConePoint {
    let a = C64::from_polar(1.0, 2.0 * PI * rng.random::<f64>());
    let b = C64::from_polar(1.0, 2.0 * PI * rng.random::<f64>());
    ConePoint::new(a, b, 0.0).expect("sampled on the cone")
}

/// Uniform point of the unit sphere in `C^n` (or `R^n` when `real`).
pub fn sphere<R: Rng>(rng: &mut R, n: usize, real: bool) -> Vec<C64> {
    use rand_distr::StandardNormal;
    loop {
        let v: Vec<C64> = (0..n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = if real {
                    0.0
                } else {
                    rng.sample(StandardNormal)
                };
                C64::new(re, im)
            })
            .collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}
