//! Image data model, color conversion, resampling, sequence ingestion and
//! the LUT file format.

mod color;
mod files;
mod lut;
mod plane;
mod resample;

pub use color::{rgb_to_yuv, yuv_to_rgb, yuv_to_rgb_unit};
pub use files::{
    load_image, load_sequence, load_sequence_dir, read_manifest, save_image, save_plane, save_sequence_dir,
    MANIFEST_NAME,
};
pub use lut::{read_lut, write_lut, LutMatrix, LUT_MAGIC, LUT_SIZE, LUT_VERSION};
pub use plane::{quantize_u8, unit_to_u8, ExposureStack, Plane8, PlaneR, YuvImage};
pub use resample::{choose_rate, downsample_bilinear, resize_bilinear};
