//! Virtual scanning: label an avatar's texture atlas by rendering it in a
//! T-pose from a ring of views, labeling each view per pixel and voting
//! through the UV channels.

pub mod classes;
mod labeler;
mod texture;
mod votes;

pub use classes::{ClassId, ClassSet};
pub use labeler::{flip, Labeler, NoisyLabeler, OracleLabeler};
pub use texture::{sidecar_path, LabelTexture, TEXTURE_SIZE};
pub use votes::{aggregate_votes, scan_view, VoteGrid};

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::body_model::{AvatarTemplate, PoseParams, ShapeParams};
use crate::pnm::PnmError;
use crate::raster::render;
use crate::scene::{make_dome_cameras, AvatarInstance, RingConfig, SceneError, SceneGraph};
use crate::seed::SeedStream;

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("label texture: {0}")]
    Texture(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Pnm(#[from] PnmError),
    #[error(transparent)]
    Scene(#[from] SceneError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub views: usize,
    pub radius: f64,
    /// Camera heights alternate between these two (m).
    pub heights: (f64, f64),
    pub target: [f64; 3],
    pub focal: f64,
    pub width: u32,
    pub height: u32,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            views: 16,
            radius: 2.5,
            heights: (0.4, 2.2),
            target: [0.0, 0.0, 0.9],
            focal: 450.0,
            width: 512,
            height: 512,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanOutput {
    pub texture: LabelTexture,
    pub votes: VoteGrid,
    /// Votes cast by each view.
    pub votes_per_view: Vec<usize>,
}

/// Scans the T-posed avatar whose true appearance is `ground_truth`. The
/// labeler sees renders of the ground truth and never the texture itself.
pub fn virtual_scan(
    template: &Arc<AvatarTemplate>,
    shape: &ShapeParams,
    ground_truth: &Arc<LabelTexture>,
    labeler: &dyn Labeler,
    config: &ScanConfig,
    seed: SeedStream,
) -> Result<ScanOutput, ScanError> {
    if config.views == 0 {
        return Err(ScanError::Argument("at least one view is required".into()));
    }
    let cameras = make_dome_cameras(&RingConfig {
        count: config.views,
        radius: config.radius,
        height_range: config.heights,
        target: config.target,
        focal: config.focal,
        width: config.width,
        height: config.height,
    })?;
    let avatar = AvatarInstance {
        instance_id: 1,
        template: Arc::clone(template),
        shape: shape.clone(),
        pose: PoseParams::identity(template.joint_count()),
        labels: Arc::clone(ground_truth),
    };
    let scene = SceneGraph::new(None, vec![avatar])?;
    let per_view: Vec<(VoteGrid, usize)> = cameras
        .par_iter()
        .enumerate()
        .map(|(k, camera)| {
            let view = render(&scene, camera);
            let labels = labeler.label(&view, seed.child(k as u64));
            let mut votes = VoteGrid::new();
            let cast = scan_view(&view, &labels, &mut votes)?;
            Ok((votes, cast))
        })
        .collect::<Result<_, ScanError>>()?;
    let mut votes = VoteGrid::new();
    let mut votes_per_view = Vec::with_capacity(per_view.len());
    for (grid, cast) in &per_view {
        votes.merge(grid);
        votes_per_view.push(*cast);
    }
    Ok(ScanOutput { texture: aggregate_votes(&votes), votes, votes_per_view })
}
