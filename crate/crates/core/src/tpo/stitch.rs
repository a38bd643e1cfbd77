use crate::model::{Frame, VideoClip};

use super::TpoError;

/// Stack clips top to bottom, frame by frame.
///
/// Shorter clips repeat their last frame; narrower clips are centred on a
/// black background. The flag reports whether any padding was applied.
pub fn stitch_vertical(clips: &[VideoClip]) -> Result<(VideoClip, bool), TpoError> {
    if clips.is_empty() {
        return Err(TpoError::Precondition("no clips to stitch".into()));
    }
    let len = clips.iter().map(VideoClip::len).max().unwrap_or(0);
    let width = clips.iter().map(|c| c.dims().0).max().unwrap_or(0);
    let height: u32 = clips.iter().map(|c| c.dims().1).sum();
    let padded = clips.iter().any(|c| c.len() != len || c.dims().0 != width);

    let mut frames = Vec::with_capacity(len);
    for i in 0..len {
        let mut px = vec![0u8; width as usize * height as usize * 3];
        let mut top = 0usize;
        for c in clips {
            let f = &c.frames()[i.min(c.len() - 1)];
            let (w, h) = f.dims();
            let left = ((width - w) / 2) as usize;
            for y in 0..h as usize {
                let src = &f.pixels()[y * w as usize * 3..(y + 1) * w as usize * 3];
                let off = ((top + y) * width as usize + left) * 3;
                px[off..off + src.len()].copy_from_slice(src);
            }
            top += h as usize;
        }
        frames.push(Frame::new(width, height, px).map_err(|e| TpoError::Precondition(e.to_string()))?);
    }
    let clip = VideoClip::new(frames, clips[0].fps()).map_err(|e| TpoError::Precondition(e.to_string()))?;
    Ok((clip, padded))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clip(n: usize, w: u32, h: u32, base: u8) -> VideoClip {
        let frames = (0..n).map(|i| Frame::filled(w, h, [base, i as u8, 0])).collect();
        VideoClip::new(frames, 8.0).unwrap()
    }

    #[test]
    fn stacks_and_pads() {
        let (s, padded) = stitch_vertical(&[clip(16, 4, 3, 10), clip(12, 4, 2, 20)]).unwrap();
        assert!(padded);
        assert_eq!(s.len(), 16);
        assert_eq!(s.dims(), (4, 5));
        assert_eq!(s.frames()[14].get(0, 0), [10, 14, 0]);
        assert_eq!(s.frames()[14].get(0, 4), [20, 11, 0]);
    }

    #[test]
    fn narrow_clip_is_centred() {
        let (s, padded) = stitch_vertical(&[clip(2, 6, 1, 10), clip(2, 2, 1, 20)]).unwrap();
        assert!(padded);
        assert_eq!(s.frames()[0].get(0, 1), [0, 0, 0]);
        assert_eq!(s.frames()[0].get(2, 1), [20, 0, 0]);
        assert_eq!(s.frames()[0].get(4, 1), [0, 0, 0]);
    }

    #[test]
    fn empty_list_rejected() {
        assert!(stitch_vertical(&[]).is_err());
    }
}
