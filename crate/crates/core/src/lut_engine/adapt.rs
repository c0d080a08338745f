//! Matching an exposure stack to the number of LUT rows.

use crate::error::{Error, Result};
use crate::imgio::{quantize_u8, ExposureStack, Plane8, YuvImage};

/// Contiguous group sizes for splitting `n` items into `groups`, larger groups first.
pub fn group_sizes(n: usize, groups: usize) -> Vec<usize> {
    let (base, rem) = (n / groups, n % groups);
    (0..groups).map(|g| base + usize::from(g < rem)).collect()
}

fn average_planes(planes: &[&Plane8]) -> Plane8 {
    let (w, h) = planes[0].dims();
    let n = planes.len() as f64;
    let data = (0..w * h)
        .map(|i| {
            let sum: u32 = planes.iter().map(|p| p.data()[i] as u32).sum();
            quantize_u8(sum as f64 / n)
        })
        .collect();
    Plane8::new(w, h, data).expect("dims taken from an existing plane")
}

fn average_frames(frames: &[YuvImage]) -> YuvImage {
    let pick = |f: fn(&YuvImage) -> &Plane8| average_planes(&frames.iter().map(f).collect::<Vec<_>>());
    YuvImage { y: pick(|f| &f.y), u: pick(|f| &f.u), v: pick(|f| &f.v) }
}

/// Brings a stack of `K` frames to exactly `k_lut` frames.
///
/// More frames than rows: EV-ordered contiguous groups are averaged
/// pixelwise. Fewer: frames are duplicated, earliest first, so each output
/// slot takes the nearest source frame in EV order.
pub fn adapt_frame_count(stack: &ExposureStack, k_lut: usize) -> Result<ExposureStack> {
    if stack.is_empty() {
        return Err(Error::StackShape("cannot adapt an empty stack".into()));
    }
    if k_lut == 0 {
        return Err(Error::StackShape("target frame count must be >= 1".into()));
    }
    let k = stack.len();
    if k == k_lut {
        return Ok(stack.clone());
    }
    let (frames, evs) = (stack.frames(), stack.evs());
    if k > k_lut {
        let mut out_frames = Vec::with_capacity(k_lut);
        let mut out_evs = Vec::with_capacity(k_lut);
        let mut start = 0;
        for size in group_sizes(k, k_lut) {
            let group = &frames[start..start + size];
            out_frames.push(average_frames(group));
            out_evs.push(evs[start..start + size].iter().sum::<f64>() / size as f64);
            start += size;
        }
        ExposureStack::from_parts(out_frames, out_evs)
    } else {
        let src: Vec<usize> = (0..k_lut).map(|j| j * k / k_lut).collect();
        ExposureStack::from_parts(
            src.iter().map(|&i| frames[i].clone()).collect(),
            src.iter().map(|&i| evs[i]).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stack(values: &[u8]) -> ExposureStack {
        let frames = values
            .iter()
            .map(|&v| YuvImage::from_luma(Plane8::filled(3, 2, v).unwrap()))
            .collect();
        let evs = (0..values.len()).map(|i| i as f64 - 1.0).collect();
        ExposureStack::new(frames, evs).unwrap()
    }

    #[test]
    fn six_into_three_averages_pairs() {
        let s = adapt_frame_count(&stack(&[10, 20, 30, 41, 50, 60]), 3).unwrap();
        let ys: Vec<u8> = s.frames().iter().map(|f| f.y.data()[0]).collect();
        assert_eq!(ys, vec![15, 36, 55]); // 35.5 rounds half-up
        assert_eq!(s.evs(), &[-0.5, 1.5, 3.5]);
    }

    #[test]
    fn uneven_groups_put_remainder_first() {
        assert_eq!(group_sizes(7, 3), vec![3, 2, 2]);
        assert_eq!(group_sizes(5, 3), vec![2, 2, 1]);
    }

    #[test]
    fn identity_and_duplication() {
        let s = stack(&[1, 2, 3]);
        assert_eq!(adapt_frame_count(&s, 3).unwrap(), s);
        let d = adapt_frame_count(&stack(&[5, 9]), 3).unwrap();
        let ys: Vec<u8> = d.frames().iter().map(|f| f.y.data()[0]).collect();
        assert_eq!(ys, vec![5, 5, 9]);
    }

    proptest! {
        #[test]
        fn output_has_target_count_and_sorted_evs(k in 1usize..9, k_lut in 1usize..7) {
            let values: Vec<u8> = (0..k).map(|i| (i * 25) as u8).collect();
            let out = adapt_frame_count(&stack(&values), k_lut).unwrap();
            prop_assert_eq!(out.len(), k_lut);
            prop_assert!(out.evs().windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
