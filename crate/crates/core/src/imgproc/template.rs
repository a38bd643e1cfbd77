use super::{GrayImage, ImgError};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TemplateMatch {
    pub score: f64,
    pub x: u32,
    pub y: u32,
}

/// Zero-mean normalized cross-correlation of two equal-size buffers. A
/// flat window scores 0.
pub fn ncc(a: &[u8], b: &[u8]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().map(|&v| v as f64).sum::<f64>() / n;
    let mb = b.iter().map(|&v| v as f64).sum::<f64>() / n;
    let (mut num, mut da, mut db) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (p, q) = (x as f64 - ma, y as f64 - mb);
        num += p * q;
        da += p * p;
        db += q * q;
    }
    if da <= 0.0 || db <= 0.0 {
        return 0.0;
    }
    (num / (da * db).sqrt()).clamp(-1.0, 1.0)
}

/// Exhaustive NCC over every placement of `tmpl` in `img`. The first
/// maximum in row-major order wins.
pub fn match_template(img: &GrayImage, tmpl: &GrayImage) -> Result<TemplateMatch, ImgError> {
    if tmpl.width > img.width || tmpl.height > img.height {
        return Err(ImgError::TemplateTooLarge {
            template: (tmpl.width, tmpl.height),
            image: (img.width, img.height),
        });
    }
    let n = tmpl.data.len() as f64;
    let mt = tmpl.data.iter().map(|&v| v as f64).sum::<f64>() / n;
    let t: Vec<f64> = tmpl.data.iter().map(|&v| v as f64 - mt).collect();
    let tt: f64 = t.iter().map(|v| v * v).sum();
    if tt <= 0.0 {
        return Err(ImgError::FlatTemplate);
    }
    let (tw, th) = (tmpl.width as usize, tmpl.height as usize);
    let iw = img.width as usize;
    let mut best = TemplateMatch {
        score: f64::NEG_INFINITY,
        x: 0,
        y: 0,
    };
    for y in 0..=(img.height as usize - th) {
        for x in 0..=(iw - tw) {
            let (mut s, mut ss, mut st) = (0.0, 0.0, 0.0);
            for j in 0..th {
                let row = (y + j) * iw + x;
                for i in 0..tw {
                    let v = img.data[row + i] as f64;
                    s += v;
                    ss += v * v;
                    st += v * t[j * tw + i];
                }
            }
            let var = ss - s * s / n;
            let score = if var <= 1e-9 {
                0.0
            } else {
                (st / (var * tt).sqrt()).clamp(-1.0, 1.0)
            };
            if score > best.score {
                best = TemplateMatch {
                    score,
                    x: x as u32,
                    y: y as u32,
                };
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BBox;

    #[test]
    fn verbatim_crop_scores_one() {
        let img = GrayImage::new(20, 16, (0..320u64).map(|i| ((i.wrapping_mul(2654435761) >> 13) & 255) as u8).collect()).unwrap();
        let t = img.crop(BBox::new(7, 5, 6, 4)).unwrap();
        let m = match_template(&img, &t).unwrap();
        assert!((m.score - 1.0).abs() < 1e-9);
        assert_eq!((m.x, m.y), (7, 5));
    }

    #[test]
    fn flat_template_rejected() {
        let img = GrayImage::filled(10, 10, 3);
        assert_eq!(
            match_template(&img, &GrayImage::filled(3, 3, 9)),
            Err(ImgError::FlatTemplate)
        );
    }
}
