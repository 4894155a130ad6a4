#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stationfit::geometry::{hesse_normalize, LineCoefficients, Point2};
use stationfit::wls::{assemble, condition_number, LineSystem, WeightVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random line with uniformly distributed direction and offset in [-10, 10].
pub fn random_line(rng: &mut impl Rng) -> LineCoefficients {
    let theta = rng.random_range(0.0..std::f64::consts::PI);
    let c = rng.random_range(-10.0..10.0);
    let scale = rng.random_range(0.1..10.0);
    LineCoefficients::new(scale * theta.cos(), scale * theta.sin(), scale * c)
}

/// Random system of 3–10 lines with weights in [0, 1] whose weighted normal
/// matrix has condition number at most `max_condition`.
pub fn random_weighted_system(
    rng: &mut impl Rng,
    max_condition: f64,
) -> (LineSystem, WeightVector) {
    loop {
        let n = rng.random_range(3..=10);
        let lines = (0..n)
            .map(|_| hesse_normalize(random_line(rng)).unwrap())
            .collect();
        let system = assemble(lines).unwrap();
        let weights =
            WeightVector::new((0..n).map(|_| rng.random_range(0.0..1.0)).collect()).unwrap();
        match condition_number(&system, &weights) {
            Ok(k) if k <= max_condition => return (system, weights),
            _ => continue,
        }
    }
}

/// Weighted objective written out directly from the rows, independent of the
/// library's evaluator.
pub fn direct_objective<'a>(
    system: &'a LineSystem,
    weights: &'a WeightVector,
) -> impl Fn(Point2) -> f64 + 'a {
    move |p: Point2| {
        system
            .rows()
            .iter()
            .zip(weights.values())
            .map(|(l, w)| {
                let d = l.nx * p.x + l.ny * p.y - l.d;
                w * w * d * d
            })
            .sum()
    }
}

pub fn random_point(rng: &mut impl Rng, half_width: f64) -> Point2 {
    Point2::new(
        rng.random_range(-half_width..half_width),
        rng.random_range(-half_width..half_width),
    )
}
