//! Full-reference and stack-based quality metrics plus a TSV report.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::imgio::{ExposureStack, PlaneR, YuvImage};
use crate::training::{mef_ssim_score, DEFAULT_STABILITY_C, DEFAULT_WINDOW};

pub const PSNR_CAP_DB: f64 = 100.0;
pub const SSIM_C1: f64 = 0.01 * 0.01;
pub const SSIM_C2: f64 = 0.03 * 0.03;

fn same_dims(a: &PlaneR, b: &PlaneR) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::Shape(format!("planes are {:?} and {:?}", a.dims(), b.dims())));
    }
    Ok(())
}

/// PSNR after removing each image's mean brightness, capped at 100 dB.
pub fn psnr_brightness_sub(a: &PlaneR, b: &PlaneR) -> Result<f64> {
    same_dims(a, b)?;
    let (ma, mb) = (a.mean(), b.mean());
    let n = a.data().len() as f64;
    let mse = a.data().iter().zip(b.data()).map(|(x, y)| ((x - ma) - (y - mb)).powi(2)).sum::<f64>() / n;
    if mse < 1e-10 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (1.0 / mse).log10()).min(PSNR_CAP_DB))
}

/// Summed-area table with a zero row and column in front.
fn integral(w: usize, h: usize, f: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut t = vec![0.0; (w + 1) * (h + 1)];
    for y in 0..h {
        let mut row = 0.0;
        for x in 0..w {
            row += f(y * w + x);
            t[(y + 1) * (w + 1) + x + 1] = t[y * (w + 1) + x + 1] + row;
        }
    }
    t
}

fn window_sum(t: &[f64], w: usize, x: usize, y: usize, win: usize) -> f64 {
    let s = w + 1;
    t[(y + win) * s + x + win] - t[y * s + x + win] - t[(y + win) * s + x] + t[y * s + x]
}

/// Mean SSIM over all `window x window` patches (uniform weights, stride 1).
pub fn ssim(a: &PlaneR, b: &PlaneR, window: usize) -> Result<f64> {
    same_dims(a, b)?;
    let (w, h) = a.dims();
    if window == 0 || window > w || window > h {
        return Err(Error::Shape(format!("SSIM window {window} does not fit {w}x{h}")));
    }
    let (da, db) = (a.data(), b.data());
    let sa = integral(w, h, |i| da[i]);
    let sb = integral(w, h, |i| db[i]);
    let saa = integral(w, h, |i| da[i] * da[i]);
    let sbb = integral(w, h, |i| db[i] * db[i]);
    let sab = integral(w, h, |i| da[i] * db[i]);
    let n = (window * window) as f64;
    let mut total = 0.0;
    let (pw, ph) = (w - window + 1, h - window + 1);
    for y in 0..ph {
        for x in 0..pw {
            let ma = window_sum(&sa, w, x, y, window) / n;
            let mb = window_sum(&sb, w, x, y, window) / n;
            let va = (window_sum(&saa, w, x, y, window) / n - ma * ma).max(0.0);
            let vb = (window_sum(&sbb, w, x, y, window) / n - mb * mb).max(0.0);
            let cov = window_sum(&sab, w, x, y, window) / n - ma * mb;
            total += (2.0 * ma * mb + SSIM_C1) * (2.0 * cov + SSIM_C2)
                / ((ma * ma + mb * mb + SSIM_C1) * (va + vb + SSIM_C2));
        }
    }
    Ok(total / (pw * ph) as f64)
}

/// One evaluated image.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub name: String,
    pub psnr_db: Option<f64>,
    pub ssim: Option<f64>,
    pub mef_ssim: f64,
}

/// Scores `fused` luma against the stack and, when given, a reference.
pub fn evaluate(name: &str, fused: &YuvImage, reference: Option<&YuvImage>, stack: &ExposureStack) -> Result<EvalRow> {
    if fused.dims() != (stack.width(), stack.height()) {
        return Err(Error::Shape(format!(
            "fused image {:?} does not match stack {:?}",
            fused.dims(),
            (stack.width(), stack.height())
        )));
    }
    let y = fused.y.to_unit();
    let (psnr_db, ssim_v) = match reference {
        Some(r) => {
            let ry = r.y.to_unit();
            (Some(psnr_brightness_sub(&y, &ry)?), Some(ssim(&y, &ry, DEFAULT_WINDOW)?))
        }
        None => (None, None),
    };
    let mef_ssim = mef_ssim_score(&stack.luma_unit(), &y, DEFAULT_WINDOW, DEFAULT_STABILITY_C)?;
    Ok(EvalRow { name: name.to_string(), psnr_db, ssim: ssim_v, mef_ssim })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".into())
}

impl EvalReport {
    pub fn push(&mut self, row: EvalRow) {
        self.rows.push(row);
    }

    pub fn mean_psnr(&self) -> Option<f64> {
        mean_of(self.rows.iter().filter_map(|r| r.psnr_db))
    }

    pub fn mean_ssim(&self) -> Option<f64> {
        mean_of(self.rows.iter().filter_map(|r| r.ssim))
    }

    pub fn mean_mef_ssim(&self) -> Option<f64> {
        mean_of(self.rows.iter().map(|r| r.mef_ssim))
    }

    /// Header, one row per image, then a `mean` row. Missing values are `-`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("name\tpsnr_db\tssim\tmef_ssim\n");
        for r in &self.rows {
            let _ = writeln!(out, "{}\t{}\t{}\t{:.6}", r.name, cell(r.psnr_db), cell(r.ssim), r.mef_ssim);
        }
        let _ = writeln!(
            out,
            "mean\t{}\t{}\t{}",
            cell(self.mean_psnr()),
            cell(self.mean_ssim()),
            cell(self.mean_mef_ssim())
        );
        out
    }

    pub fn write_tsv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_tsv())?;
        Ok(())
    }
}
