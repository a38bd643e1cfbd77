use super::{GrayImage, ImgError};

pub const WINDOW: u32 = 8;
pub const STRIDE: u32 = 4;
const C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

/// Mean SSIM over 8×8 windows placed every 4 pixels (population statistics).
pub fn ssim(a: &GrayImage, b: &GrayImage) -> Result<f64, ImgError> {
    if (a.width, a.height) != (b.width, b.height) {
        return Err(ImgError::DimensionMismatch {
            a: (a.width, a.height),
            b: (b.width, b.height),
        });
    }
    if a.width < WINDOW || a.height < WINDOW {
        return Err(ImgError::TooSmall {
            need: (WINDOW, WINDOW),
            got: (a.width, a.height),
        });
    }
    let n = (WINDOW * WINDOW) as f64;
    let w = a.width as usize;
    let mut total = 0.0;
    let mut count = 0usize;
    let mut y = 0;
    while y + WINDOW <= a.height {
        let mut x = 0;
        while x + WINDOW <= a.width {
            let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0u64, 0u64, 0u64, 0u64, 0u64);
            for yy in y..y + WINDOW {
                let row = yy as usize * w;
                for xx in x..x + WINDOW {
                    let va = a.data[row + xx as usize] as u64;
                    let vb = b.data[row + xx as usize] as u64;
                    sa += va;
                    sb += vb;
                    saa += va * va;
                    sbb += vb * vb;
                    sab += va * vb;
                }
            }
            let ma = sa as f64 / n;
            let mb = sb as f64 / n;
            let va = saa as f64 / n - ma * ma;
            let vb = sbb as f64 / n - mb * mb;
            let cov = sab as f64 / n - ma * mb;
            total += ((2.0 * ma * mb + C1) * (2.0 * cov + C2))
                / ((ma * ma + mb * mb + C1) * (va + vb + C2));
            count += 1;
            x += STRIDE;
        }
        y += STRIDE;
    }
    Ok(total / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_similarity_is_one() {
        let img = GrayImage::new(16, 16, (0..256).map(|i| (i * 37 % 251) as u8).collect()).unwrap();
        assert!((ssim(&img, &img).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn inverted_checker_is_dissimilar() {
        let img = GrayImage::new(32, 32, (0..1024).map(|i| if ((i % 32) / 4 + (i / 32) / 4) % 2 == 0 { 0 } else { 255 }).collect()).unwrap();
        assert!(ssim(&img, &img.invert()).unwrap() < 0.2);
    }

    #[test]
    fn mismatch() {
        assert!(matches!(
            ssim(&GrayImage::filled(8, 8, 0), &GrayImage::filled(9, 8, 0)),
            Err(ImgError::DimensionMismatch { .. })
        ));
    }
}
