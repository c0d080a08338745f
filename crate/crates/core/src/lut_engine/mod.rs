//! Deployment path: LUT query, weight normalization, guided-filter
//! upsampling, luma blending, chroma merging and frame-count adaptation.

mod adapt;
mod blend;
mod gfu;
mod pipeline;
mod weights;

pub use adapt::{adapt_frame_count, group_sizes};
pub use blend::{blend_y, merge_uv, BLEND_SUM_TOLERANCE};
pub use gfu::{box_mean, gfu_upsample, guided_coefficients, guided_filter};
pub use pipeline::{
    fuse, fuse_detailed, fuse_frames, fuse_with, lowres_luma, FusionConfig, FusionOutput, Upsample, WeightPredictor,
};
pub use weights::{normalize_weights, quantize_planes, query_weights, query_weights_unit, WeightMaps};
