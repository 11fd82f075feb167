//! Ground-truth data generation for multi-person scenes.
//!
//! The pipeline retargets observed 3D skeletons onto a parametric humanoid,
//! renders annotated frames with a software rasterizer, labels avatar
//! textures by multi-view voting, composites renders onto background plates
//! and evaluates dense predictions against the rendered ground truth.

pub mod body_model;
pub mod compose;
pub mod dataset;
pub mod eval;
pub mod motion;
pub mod pnm;
pub mod raster;
pub mod retarget;
pub mod scanning;
pub mod scene;
pub mod seed;

pub use body_model::{AvatarTemplate, PoseParams, PosedMesh, ShapeParams};
