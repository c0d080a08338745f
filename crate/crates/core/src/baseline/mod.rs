//! Classical reference fusion: per-pixel quality weights and
//! multi-resolution blending.

mod mertens;
mod pyramid;

pub use mertens::{fuse_mertens, mertens_quality, mertens_weights, mertens_weights_frames, MertensConfig};
pub use pyramid::{
    default_levels, gaussian_pyramid, laplacian_pyramid, max_levels, pyramid_blend, pyramid_expand, pyramid_reduce,
};
