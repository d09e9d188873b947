//! The invariant measure `(2|∂Q|)⁻¹ cos φ dφ ds` on the collision space:
//! sampling, hole measure and one-step invariance diagnostics.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{next_collision, CollisionFlag, PhasePoint};
use crate::geometry::{Hole, Table};
use crate::stats::ks_statistic;

/// Work unit for parallel sampling; chunk `k` always draws from stream `k`.
pub const CHUNK: usize = 4096;

/// Deterministic generator for `(seed, stream)`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Run `work(chunk, len)` over `n` items split into fixed chunks and
/// concatenate in chunk order, so results do not depend on scheduling.
pub fn par_chunks<T, F>(n: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, usize) -> Vec<T> + Sync + Send,
{
    (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .flat_map_iter(|chunk| work(chunk as u64, CHUNK.min(n - chunk * CHUNK)))
        .collect()
}

/// Angle law used when drawing `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleLaw {
    /// Density `cos φ / 2`, the invariant one.
    #[default]
    Cosine,
    /// Uniform on `(-π/2, π/2)`; only useful as a negative control.
    Uniform,
}

impl AngleLaw {
    pub fn draw(self, u: f64) -> f64 {
        match self {
            AngleLaw::Cosine => (2.0 * u - 1.0).asin(),
            AngleLaw::Uniform => (2.0 * u - 1.0) * FRAC_PI_2,
        }
    }
}

/// CDF of `cos φ / 2` on `(-π/2, π/2)`.
pub fn phi_cdf(phi: f64) -> f64 {
    0.5 * (1.0 + phi.clamp(-FRAC_PI_2, FRAC_PI_2).sin())
}

/// Stream of points distributed by the invariant measure.
#[derive(Debug, Clone)]
pub struct SrbSampler<'a> {
    table: &'a Table,
    seed: u64,
    stream: u64,
    law: AngleLaw,
    rng: ChaCha8Rng,
}

impl<'a> SrbSampler<'a> {
    pub fn new(table: &'a Table, seed: u64, stream: u64) -> Self {
        Self::with_law(table, seed, stream, AngleLaw::Cosine)
    }

    pub fn with_law(table: &'a Table, seed: u64, stream: u64, law: AngleLaw) -> Self {
        Self {
            table,
            seed,
            stream,
            law,
            rng: rng_for(seed, stream),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn sample(&mut self) -> PhasePoint {
        let s = self.rng.random::<f64>() * self.table.perimeter();
        let phi = self.law.draw(self.rng.random::<f64>());
        PhasePoint::new(s.min(self.table.perimeter().next_down()), phi)
    }

    /// Point of the invariant measure conditioned on the hole.
    pub fn sample_in_hole(&mut self, hole: &Hole) -> PhasePoint {
        let u: f64 = self.rng.random();
        let local = hole.local_center + hole.radius * (2.0 * u - 1.0);
        let s = self.table.global_s(hole.component, local);
        PhasePoint::new(s, self.law.draw(self.rng.random::<f64>()))
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

pub fn sample_srb(sampler: &mut SrbSampler<'_>, n: usize) -> Vec<PhasePoint> {
    (0..n).map(|_| sampler.sample()).collect()
}

/// `μ(B_r(q) × S¹) = 2r / |∂Q|`.
pub fn hole_measure(t: &Table, h: &Hole) -> f64 {
    2.0 * h.radius / t.perimeter()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub n: usize,
    pub ks_phi: f64,
    pub ks_s: f64,
    pub censored_fraction: f64,
}

/// Push `n` samples one step forward and compare both marginals with the
/// invariant ones.
pub fn invariance_defect(t: &Table, n: usize, seed: u64) -> InvarianceReport {
    invariance_defect_with(t, n, seed, AngleLaw::Cosine)
}

pub fn invariance_defect_with(t: &Table, n: usize, seed: u64, law: AngleLaw) -> InvarianceReport {
    let images = par_chunks(n, |chunk, len| {
        let mut sampler = SrbSampler::with_law(t, seed, chunk, law);
        (0..len)
            .map(|_| {
                let r = next_collision(t, sampler.sample());
                (r.flag == CollisionFlag::Ok).then_some(r.next)
            })
            .collect()
    });
    let kept: Vec<PhasePoint> = images.into_iter().flatten().collect();
    let censored_fraction = 1.0 - kept.len() as f64 / n as f64;
    let mut phis: Vec<f64> = kept.iter().map(|p| p.phi).collect();
    let mut ss: Vec<f64> = kept.iter().map(|p| p.s).collect();
    let per = t.perimeter();
    let ks_phi = ks_statistic(&mut phis, phi_cdf).unwrap_or(1.0);
    let ks_s = ks_statistic(&mut ss, |s| (s / per).clamp(0.0, 1.0)).unwrap_or(1.0);
    InvarianceReport {
        n,
        ks_phi,
        ks_s,
        censored_fraction,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_table, make_hole, TableSpec, Vec2};
    use crate::stats::{mean, variance};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn sinai() -> Table {
        build_table(&TableSpec::SinaiTorus {
            centers: vec![Vec2::new(0.5, 0.5)],
            radii: vec![0.2],
        })
        .unwrap()
    }

    fn stadium() -> Table {
        build_table(&TableSpec::Stadium {
            flat_length: 2.0,
            half_height: None,
        })
        .unwrap()
    }

    fn within_3_sigma(x: &[f64], target: f64) -> bool {
        let sigma = (variance(x) / x.len() as f64).sqrt();
        (mean(x) - target).abs() < 3.0 * sigma
    }

    #[test]
    fn angle_moments() {
        let t = sinai();
        let pts = sample_srb(&mut SrbSampler::new(&t, 7, 0), 1_000_000);
        let phi: Vec<f64> = pts.iter().map(|p| p.phi).collect();
        assert!(within_3_sigma(&phi, 0.0));
        let sin2: Vec<f64> = phi.iter().map(|p| p.sin().powi(2)).collect();
        assert!(within_3_sigma(&sin2, 1.0 / 3.0));
        assert!(phi.iter().all(|p| p.abs() <= FRAC_PI_2));
    }

    #[test]
    fn arclength_marginal_is_uniform() {
        let t = stadium();
        let pts = sample_srb(&mut SrbSampler::new(&t, 11, 3), 200_000);
        let (a, b) = (1.0, 2.5);
        let ind: Vec<f64> = pts
            .iter()
            .map(|p| f64::from(u8::from((a..b).contains(&p.s))))
            .collect();
        assert!(within_3_sigma(&ind, (b - a) / t.perimeter()));
        assert!(pts.iter().all(|p| (0.0..t.perimeter()).contains(&p.s)));
    }

    #[test]
    fn equal_seed_and_stream_repeat() {
        let t = sinai();
        let a = sample_srb(&mut SrbSampler::new(&t, 42, 5), 100);
        let b = sample_srb(&mut SrbSampler::new(&t, 42, 5), 100);
        let c = sample_srb(&mut SrbSampler::new(&t, 42, 6), 100);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn hole_measure_is_normalized_length() {
        let t = sinai();
        let h = make_hole(&t, 0.0, 0.05).unwrap();
        assert_abs_diff_eq!(hole_measure(&t, &h), 0.1 / (0.4 * PI), epsilon = 1e-15);
        assert_abs_diff_eq!(hole_measure(&t, &h), 0.0795775, epsilon = 1e-7);
        let t = stadium();
        let h = make_hole(&t, 1.0, 0.1).unwrap();
        assert_abs_diff_eq!(hole_measure(&t, &h), 0.0194493, epsilon = 1e-7);
        let half = make_hole(&t, 1.0, 0.05).unwrap();
        assert_abs_diff_eq!(hole_measure(&t, &half) * 2.0, hole_measure(&t, &h), epsilon = 1e-15);
    }

    #[test]
    fn hole_samples_stay_in_the_hole() {
        let t = sinai();
        let h = make_hole(&t, 0.0, 0.05).unwrap();
        let mut sampler = SrbSampler::new(&t, 1, 0);
        for _ in 0..1000 {
            assert!(h.contains(sampler.sample_in_hole(&h).s));
        }
    }

    #[test]
    fn pushforward_is_invariant_at_moderate_n() {
        let r = invariance_defect(&sinai(), 100_000, 3);
        assert!(r.ks_phi < 0.01 && r.ks_s < 0.01, "{r:?}");
        assert!(r.censored_fraction < 1e-3);
    }

    #[test]
    fn uniform_angles_are_detected() {
        let r = invariance_defect_with(&stadium(), 100_000, 3, AngleLaw::Uniform);
        assert!(r.ks_phi > 0.05, "{r:?}");
    }
}
