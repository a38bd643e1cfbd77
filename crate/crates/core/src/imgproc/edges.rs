use super::{GrayImage, ImgError};

/// Sobel 3×3 gradient magnitude with replicated borders, rounded and
/// clamped to 255.
pub fn edge_map(img: &GrayImage) -> Result<GrayImage, ImgError> {
    if img.width < 3 || img.height < 3 {
        return Err(ImgError::TooSmall {
            need: (3, 3),
            got: (img.width, img.height),
        });
    }
    let (w, h) = (img.width as i64, img.height as i64);
    let mut data = Vec::with_capacity(img.data.len());
    for y in 0..h {
        for x in 0..w {
            let p = |dx: i64, dy: i64| img.get_clamped(x + dx, y + dy) as i32;
            let gx = (p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1));
            let gy = (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1));
            let mag = ((gx * gx + gy * gy) as f64).sqrt().round();
            data.push(mag.min(255.0) as u8);
        }
    }
    Ok(GrayImage {
        width: img.width,
        height: img.height,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_zero() {
        let e = edge_map(&GrayImage::filled(10, 10, 77)).unwrap();
        assert!(e.data.iter().all(|&v| v == 0));
    }

    #[test]
    fn vertical_step() {
        let c = 6u32;
        let img = GrayImage::new(12, 5, (0..60).map(|i| if i % 12 >= c { 255 } else { 0 }).collect()).unwrap();
        let e = edge_map(&img).unwrap();
        for y in 0..5 {
            for x in 0..12 {
                let v = e.get(x, y);
                if x == c - 1 || x == c {
                    assert_eq!(v, 255);
                } else {
                    assert_eq!(v, 0);
                }
            }
        }
    }

    #[test]
    fn too_small() {
        assert!(edge_map(&GrayImage::filled(2, 5, 0)).is_err());
    }
}
