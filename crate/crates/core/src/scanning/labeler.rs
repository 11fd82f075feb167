use rand::Rng;

use super::classes::{is_human, ClassId, HUMAN_CLASSES};
use crate::raster::FrameBuffer;
use crate::seed::SeedStream;

/// Per-pixel human parser applied to a rendered view.
pub trait Labeler: Sync {
    /// One class id per pixel. `seed` is specific to the view.
    fn label(&self, view: &FrameBuffer, seed: SeedStream) -> Vec<ClassId>;
}

/// Reads the rendered semantic channel back unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleLabeler;

impl Labeler for OracleLabeler {
    fn label(&self, view: &FrameBuffer, _seed: SeedStream) -> Vec<ClassId> {
        view.semantic.clone()
    }
}

/// The oracle with each human pixel replaced, with probability `rho`, by a
/// uniformly chosen different human class.
#[derive(Debug, Clone, Copy)]
pub struct NoisyLabeler {
    pub rho: f64,
}

impl Labeler for NoisyLabeler {
    fn label(&self, view: &FrameBuffer, seed: SeedStream) -> Vec<ClassId> {
        let mut rng = seed.rng();
        view.semantic
            .iter()
            .map(|&c| if is_human(c) && rng.random::<f64>() < self.rho { flip(c, &mut rng) } else { c })
            .collect()
    }
}

/// A human class other than `c`, uniformly.
pub fn flip(c: ClassId, rng: &mut impl Rng) -> ClassId {
    let k = rng.random_range(0..HUMAN_CLASSES.len() - 1);
    let other = HUMAN_CLASSES.iter().copied().filter(|&h| h != c).nth(k);
    other.expect("five alternatives")
}
