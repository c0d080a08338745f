//! PNG / binary PNM reading and writing, plus sequence ingestion.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat};

use super::plane::{ExposureStack, Plane8, YuvImage};
use crate::error::{Error, Result};

/// Name of the per-sequence manifest: one `filename<TAB>ev` line per frame.
pub const MANIFEST_NAME: &str = "manifest.tsv";

/// Decodes an 8-bit RGB or grayscale file. Grayscale gets neutral chroma.
pub fn load_image(path: impl AsRef<Path>) -> Result<YuvImage> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|e| annotate(path, e.into()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(_) | DynamicImage::ImageLumaA8(_) | DynamicImage::ImageLuma16(_) | DynamicImage::ImageLumaA16(_) => {
            Ok(YuvImage::from_luma(Plane8::new(w, h, img.to_luma8().into_raw())?))
        }
        other => YuvImage::from_rgb8(w, h, &other.to_rgb8().into_raw()),
    }
}

fn annotate(path: &Path, err: Error) -> Error {
    match err {
        Error::Io(e) => Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))),
        other => other,
    }
}

/// Loads frames in the given order and tags them with `evs`.
pub fn load_sequence<P: AsRef<Path>>(paths: &[P], evs: &[f64]) -> Result<ExposureStack> {
    if paths.len() != evs.len() {
        return Err(Error::Metadata(format!("{} inputs but {} exposure values", paths.len(), evs.len())));
    }
    if evs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Metadata(format!("exposure values must be strictly increasing: {evs:?}")));
    }
    let frames = paths.iter().map(load_image).collect::<Result<Vec<_>>>()?;
    ExposureStack::new(frames, evs.to_vec())
}

/// Parses a manifest into `(file, ev)` pairs, relative paths resolved against `dir`.
pub fn read_manifest(dir: impl AsRef<Path>) -> Result<Vec<(PathBuf, f64)>> {
    let dir = dir.as_ref();
    let text = fs::read_to_string(dir.join(MANIFEST_NAME))?;
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, ev) = line
            .split_once('\t')
            .ok_or_else(|| Error::Metadata(format!("manifest line {}: expected `file<TAB>ev`", lineno + 1)))?;
        let ev: f64 = ev
            .trim()
            .parse()
            .map_err(|_| Error::Metadata(format!("manifest line {}: bad ev {ev:?}", lineno + 1)))?;
        entries.push((dir.join(name), ev));
    }
    Ok(entries)
}

/// Loads a sequence directory described by its manifest.
pub fn load_sequence_dir(dir: impl AsRef<Path>) -> Result<ExposureStack> {
    let entries = read_manifest(dir)?;
    let (paths, evs): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
    load_sequence(&paths, &evs)
}

/// Writes a sequence directory with manifest; frames are stored as PNG.
pub fn save_sequence_dir(stack: &ExposureStack, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut manifest = String::new();
    for (i, (frame, ev)) in stack.frames().iter().zip(stack.evs()).enumerate() {
        let name = format!("frame_{i:02}.png");
        save_image(frame, dir.join(&name))?;
        manifest.push_str(&format!("{name}\t{ev}\n"));
    }
    fs::write(dir.join(MANIFEST_NAME), manifest)?;
    Ok(())
}

fn is_pnm(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref(),
        Some("ppm" | "pgm" | "pnm")
    )
}

fn write_buffer(path: &Path, bytes: &[u8], w: usize, h: usize, color: ExtendedColorType) -> Result<()> {
    if is_pnm(path) {
        let subtype = if color == ExtendedColorType::L8 {
            PnmSubtype::Graymap(SampleEncoding::Binary)
        } else {
            PnmSubtype::Pixmap(SampleEncoding::Binary)
        };
        let out = BufWriter::new(File::create(path)?);
        PnmEncoder::new(out).with_subtype(subtype).write_image(bytes, w as u32, h as u32, color)?;
    } else {
        image::save_buffer_with_format(path, bytes, w as u32, h as u32, color, ImageFormat::Png)?;
    }
    Ok(())
}

/// Saves a YUV image as RGB PNG, or binary PPM when the extension says so.
pub fn save_image(img: &YuvImage, path: impl AsRef<Path>) -> Result<()> {
    let (w, h) = img.dims();
    write_buffer(path.as_ref(), &img.to_rgb8(), w, h, ExtendedColorType::Rgb8)
}

/// Saves one 8-bit plane as grayscale PNG or PGM.
pub fn save_plane(plane: &Plane8, path: impl AsRef<Path>) -> Result<()> {
    let (w, h) = plane.dims();
    write_buffer(path.as_ref(), plane.data(), w, h, ExtendedColorType::L8)
}
