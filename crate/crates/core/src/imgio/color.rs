//! Full-range BT.601 (JFIF) RGB <-> YUV conversion on 8-bit triplets.
//!
//! Chroma is offset by 128 and scaled so that the full RGB cube maps into
//! `[0,255]` without clipping.

use super::plane::quantize_u8;

const KR: f64 = 0.299;
const KG: f64 = 0.587;
const KB: f64 = 0.114;
// 0.5 / (1 - KB) and 0.5 / (1 - KR)
const U_SCALE: f64 = 0.5 / (1.0 - KB);
const V_SCALE: f64 = 0.5 / (1.0 - KR);

pub fn rgb_to_yuv(r: u8, g: u8, b: u8) -> (u8, u8, u8) {
    let (r, g, b) = (r as f64, g as f64, b as f64);
    let y = KR * r + KG * g + KB * b;
    let u = (b - y) * U_SCALE + 128.0;
    let v = (r - y) * V_SCALE + 128.0;
    (quantize_u8(y), quantize_u8(u), quantize_u8(v))
}

pub fn yuv_to_rgb(y: u8, u: u8, v: u8) -> (u8, u8, u8) {
    let (r, g, b) = yuv_to_rgb_unit(y as f64 / 255.0, u as f64 / 255.0, v as f64 / 255.0);
    (quantize_u8(r * 255.0), quantize_u8(g * 255.0), quantize_u8(b * 255.0))
}

/// Unclamped inverse on `[0,1]`-scaled values (chroma centered at 128/255).
pub fn yuv_to_rgb_unit(y: f64, u: f64, v: f64) -> (f64, f64, f64) {
    let cb = u - 128.0 / 255.0;
    let cr = v - 128.0 / 255.0;
    let r = y + cr / V_SCALE;
    let b = y + cb / U_SCALE;
    let g = (y - KR * r - KB * b) / KG;
    (r, g, b)
}
