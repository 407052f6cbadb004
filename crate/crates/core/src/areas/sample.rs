use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::jacobian::{jacobian, AreaDef, Seminorm};
use super::polygonal::PolygonalNorm;
use crate::geom::Vec2;
use crate::{par, Result};

/// Seed of the norm sampler used by [`q_estimate`].
pub const NORM_SAMPLER_SEED: u64 = 0x5eed_a2ea;

/// `count` norms: the sup-norm and ℓ1 balls first, then random centrally
/// symmetric polygons with 4–32 vertices and radii in `[1/4, 4]`.
pub fn sample_norms(count: usize, seed: u64) -> Vec<PolygonalNorm> {
    let mut out = Vec::with_capacity(count);
    out.push(PolygonalNorm::sup_norm());
    out.push(PolygonalNorm::l1_norm());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < count {
        let half = rng.random_range(2..=16usize);
        let mut pts: Vec<Vec2> = (0..half)
            .map(|_| {
                let t = rng.random_range(0.0..std::f64::consts::PI);
                let r = rng.random_range(0.25..=4.0);
                Vec2::new(r * t.cos(), r * t.sin())
            })
            .collect();
        pts.sort_by(|a, b| a.y.atan2(a.x).total_cmp(&b.y.atan2(b.x)));
        if let Ok(p) = PolygonalNorm::from_symmetric_points(&pts) {
            out.push(p);
        }
    }
    out.truncate(count);
    out
}

/// Minimum of `J^μ / J^{μ^i}` over sampled norms, with the attaining sample.
#[derive(Clone, Debug)]
pub struct QEstimate {
    pub value: f64,
    pub argmin: usize,
    pub samples: usize,
}

/// Empirical comparison constant `q(μ)` over `samples` seeded norms.
pub fn q_estimate(mu: AreaDef, samples: usize) -> Result<QEstimate> {
    let norms = sample_norms(samples.max(1), NORM_SAMPLER_SEED);
    let ratios = par::map_range(norms.len(), |i| -> Result<f64> {
        let s = Seminorm::Polygonal(norms[i].clone());
        if mu == AreaDef::InscribedRiemannian {
            return Ok(1.0);
        }
        Ok(jacobian(&s, mu)? / jacobian(&s, AreaDef::InscribedRiemannian)?)
    });
    let mut best = QEstimate {
        value: f64::INFINITY,
        argmin: 0,
        samples: norms.len(),
    };
    for (i, r) in ratios.into_iter().enumerate() {
        let r = r?;
        if r < best.value {
            best.value = r;
            best.argmin = i;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sampler_is_deterministic_and_prepends_extremals() {
        let a = sample_norms(50, 7);
        let b = sample_norms(50, 7);
        assert_eq!(a, b);
        assert_eq!(a[0], PolygonalNorm::sup_norm());
        assert_eq!(a[1], PolygonalNorm::l1_norm());
        for p in &a {
            let n = p.vertices().len();
            assert!((4..=32).contains(&n), "{n}");
        }
    }

    #[test]
    fn inscribed_riemannian_q_is_exactly_one() {
        assert_eq!(q_estimate(AreaDef::InscribedRiemannian, 1000).unwrap().value, 1.0);
    }

    #[test]
    fn holmes_thompson_q_attained_by_sup_norm() {
        let q = q_estimate(AreaDef::HolmesThompson, 200).unwrap();
        assert!((q.value - 2.0 / PI).abs() < 1e-9, "{}", q.value);
    }

    #[test]
    fn busemann_q_in_range() {
        let q = q_estimate(AreaDef::BusemannHausdorff, 200).unwrap().value;
        assert!(q >= PI / 4.0 - 1e-6 && q <= 1.0, "{q}");
    }
}
