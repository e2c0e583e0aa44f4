//! Synthetic noisy image for the ROF problem.
//!
//! The noise generator is SplitMix64 with the state initialized to the seed:
//!
//! ```text
//! state = state + 0x9E3779B97F4A7C15          (wrapping)
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9     (wrapping)
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB     (wrapping)
//! output z ^ (z >> 31)
//! ```
//!
//! A draw in `[0, 1)` is `(output >> 11) * 2^-53`, and the noise value at a
//! node of the level 3 mesh (in lexicographic node order) is
//! `-0.1 + 0.2 * draw`.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::error::Error;
use crate::fem::{interpolate, prolongate};
use crate::mesh::build_mesh;

/// Level on which the noise is sampled.
pub const NOISE_LEVEL: u32 = 3;
pub const NOISE_AMPLITUDE: f64 = 0.1;
pub const DISK_CENTER: [f64; 2] = [0.5, 0.5];
pub const DISK_RADIUS: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct RofData {
    /// Noisy datum `g = g_clean + noise`.
    pub g: Vec<f64>,
    pub g_clean: Vec<f64>,
    pub noise: Vec<f64>,
}

/// Indicator of the closed disk, interpolated on level `level`, plus
/// uniform noise sampled on level 3 and prolongated.
pub fn make_rof_data(level: u32, seed: u64) -> Result<RofData, Error> {
    if level < NOISE_LEVEL {
        return Err(Error::InvalidParameter(format!(
            "ROF data needs level >= {NOISE_LEVEL}, got {level}"
        )));
    }
    let mesh = build_mesh(level)?;
    let g_clean = interpolate(&mesh, |x| {
        let (dx, dy) = (x[0] - DISK_CENTER[0], x[1] - DISK_CENTER[1]);
        if dx * dx + dy * dy <= DISK_RADIUS * DISK_RADIUS {
            1.0
        } else {
            0.0
        }
    });
    let coarse_n = build_mesh(NOISE_LEVEL)?.n_nodes();
    let mut rng = SplitMix64::seed_from_u64(seed);
    let coarse: Vec<f64> = (0..coarse_n)
        .map(|_| -NOISE_AMPLITUDE + 2.0 * NOISE_AMPLITUDE * unit_draw(&mut rng))
        .collect();
    let noise = prolongate(&coarse, NOISE_LEVEL, level)?;
    let g = g_clean.iter().zip(&noise).map(|(a, b)| a + b).collect();
    Ok(RofData { g, g_clean, noise })
}

fn unit_draw(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn splitmix_reference(state: &mut u64) -> u64 {
        *state = state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = *state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    #[test]
    fn generator_matches_documented_recurrence() {
        for seed in [0u64, 1, 42, u64::MAX] {
            let mut rng = SplitMix64::seed_from_u64(seed);
            let mut state = seed;
            for _ in 0..100 {
                assert_eq!(rng.next_u64(), splitmix_reference(&mut state));
            }
        }
        let mut rng = SplitMix64::seed_from_u64(0);
        assert_eq!(rng.next_u64(), 0xE220A8397B1DCDAF);
    }

    #[test]
    fn deterministic() {
        assert_eq!(make_rof_data(5, 3).unwrap(), make_rof_data(5, 3).unwrap());
        assert_ne!(make_rof_data(4, 3).unwrap().g, make_rof_data(4, 4).unwrap().g);
    }

    #[test]
    fn noise_range() {
        for seed in 0..20 {
            let d = make_rof_data(4, seed).unwrap();
            assert!(d.noise.iter().all(|x| x.abs() <= 0.1));
            assert!(d.g.iter().all(|x| x.abs() <= 1.1));
        }
    }

    #[test]
    fn disk_values() {
        for level in 3..=6 {
            let mesh = build_mesh(level).unwrap();
            let d = make_rof_data(level, 0).unwrap();
            let center = mesh.nodes().iter().position(|x| *x == [0.5, 0.5]).unwrap();
            assert_eq!(d.g_clean[center], 1.0);
            assert_eq!(d.g_clean[0], 0.0);
            assert_eq!(mesh.nodes()[0], [0.0, 0.0]);
        }
    }

    #[test]
    fn noise_is_coarse_interpolant() {
        let d3 = make_rof_data(3, 9).unwrap();
        let d5 = make_rof_data(5, 9).unwrap();
        assert_eq!(prolongate(&d3.noise, 3, 5).unwrap(), d5.noise);
    }

    #[test]
    fn rejects_coarse_levels() {
        assert!(make_rof_data(2, 0).is_err());
    }
}
