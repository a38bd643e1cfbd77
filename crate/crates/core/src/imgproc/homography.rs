use nalgebra::{Matrix3, SMatrix, SVector, Vector3};

use crate::model::Frame;

use super::{Canvas, ImgError};

/// Projective map, normalized so `m[(2,2)] == 1`. Maps source coordinates to
/// destination coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Homography {
    m: Matrix3<f64>,
}

impl Homography {
    pub fn new(m: Matrix3<f64>) -> Result<Self, ImgError> {
        let s = m[(2, 2)];
        if s.abs() < 1e-12 || !m.iter().all(|v| v.is_finite()) {
            return Err(ImgError::Singular);
        }
        let m = m / s;
        if m.determinant().abs() <= 1e-9 {
            return Err(ImgError::Singular);
        }
        Ok(Homography { m })
    }

    pub fn identity() -> Self {
        Homography {
            m: Matrix3::identity(),
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    pub fn inverse(&self) -> Result<Homography, ImgError> {
        let inv = self.m.try_inverse().ok_or(ImgError::Singular)?;
        Homography::new(inv)
    }

    /// `None` for points mapped to infinity.
    pub fn apply(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        let v = self.m * Vector3::new(x, y, 1.0);
        if v.z.abs() < 1e-12 {
            return None;
        }
        Some((v.x / v.z, v.y / v.z))
    }
}

fn collinear(p: &[(f64, f64); 4]) -> bool {
    let scale = p
        .iter()
        .flat_map(|q| [q.0.abs(), q.1.abs()])
        .fold(1.0f64, f64::max);
    for i in 0..4 {
        for j in i + 1..4 {
            for k in j + 1..4 {
                let (a, b, c) = (p[i], p[j], p[k]);
                let cr = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
                if cr.abs() <= 1e-9 * scale * scale {
                    return true;
                }
            }
        }
    }
    false
}

/// Translate to the centroid and scale so the mean distance is sqrt(2).
fn conditioner(p: &[(f64, f64); 4]) -> Matrix3<f64> {
    let cx = p.iter().map(|q| q.0).sum::<f64>() / 4.0;
    let cy = p.iter().map(|q| q.1).sum::<f64>() / 4.0;
    let d = p
        .iter()
        .map(|q| ((q.0 - cx).powi(2) + (q.1 - cy).powi(2)).sqrt())
        .sum::<f64>()
        / 4.0;
    let s = std::f64::consts::SQRT_2 / d;
    Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0)
}

fn apply_m(m: &Matrix3<f64>, p: (f64, f64)) -> (f64, f64) {
    let v = m * Vector3::new(p.0, p.1, 1.0);
    (v.x / v.z, v.y / v.z)
}

/// Direct linear transform with `h33 = 1` on conditioned coordinates.
pub fn homography_from_points(
    src: &[(f64, f64); 4],
    dst: &[(f64, f64); 4],
) -> Result<Homography, ImgError> {
    if collinear(src) || collinear(dst) {
        return Err(ImgError::Collinear);
    }
    let ts = conditioner(src);
    let td = conditioner(dst);
    let mut a = SMatrix::<f64, 8, 8>::zeros();
    let mut b = SVector::<f64, 8>::zeros();
    for i in 0..4 {
        let (x, y) = apply_m(&ts, src[i]);
        let (u, v) = apply_m(&td, dst[i]);
        let r = 2 * i;
        a.set_row(
            r,
            &nalgebra::RowSVector::<f64, 8>::from_row_slice(&[x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]),
        );
        a.set_row(
            r + 1,
            &nalgebra::RowSVector::<f64, 8>::from_row_slice(&[0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]),
        );
        b[r] = u;
        b[r + 1] = v;
    }
    let h = a.lu().solve(&b).ok_or(ImgError::Singular)?;
    let hn = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], 1.0);
    let td_inv = td.try_inverse().ok_or(ImgError::Singular)?;
    Homography::new(td_inv * hn * ts)
}

/// Bilinear read with pixel centers at integer coordinates; neighbors
/// outside the image contribute black.
#[inline]
fn sample(frame: &Frame, x: f64, y: f64) -> [u8; 3] {
    let (w, h) = (frame.width() as i64, frame.height() as i64);
    if !(x > -1.0 && y > -1.0 && x < w as f64 && y < h as f64) {
        return [0, 0, 0];
    }
    let x0 = x.floor() as i64;
    let y0 = y.floor() as i64;
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let px = frame.pixels();
    let mut acc = [0.0f64; 3];
    for (dx, dy, wgt) in [
        (0, 0, (1.0 - fx) * (1.0 - fy)),
        (1, 0, fx * (1.0 - fy)),
        (0, 1, (1.0 - fx) * fy),
        (1, 1, fx * fy),
    ] {
        if wgt == 0.0 {
            continue;
        }
        let (sx, sy) = (x0 + dx, y0 + dy);
        if sx < 0 || sy < 0 || sx >= w || sy >= h {
            continue;
        }
        let i = ((sy * w + sx) * 3) as usize;
        for c in 0..3 {
            acc[c] += wgt * px[i + c] as f64;
        }
    }
    acc.map(|v| v.round().clamp(0.0, 255.0) as u8)
}

/// Output pixel `p` takes the source value at `h⁻¹(p)`.
pub fn warp_perspective(frame: &Frame, h: &Homography, out_w: u32, out_h: u32) -> Frame {
    let inv = match h.inverse() {
        Ok(i) => i,
        Err(_) => return Frame::filled(out_w, out_h, [0, 0, 0]),
    };
    let mut out = Vec::with_capacity(out_w as usize * out_h as usize * 3);
    for y in 0..out_h {
        for x in 0..out_w {
            let p = match inv.apply(x as f64, y as f64) {
                Some((sx, sy)) => sample(frame, sx, sy),
                None => [0, 0, 0],
            };
            out.extend_from_slice(&p);
        }
    }
    Frame::new(out_w, out_h, out).expect("warp output buffer sized by construction")
}

/// Paint `src` warped by `h` onto `dst`, touching only output pixels whose
/// preimage falls inside `src`.
pub fn warp_onto(dst: &mut Canvas, src: &Frame, h: &Homography) {
    let Ok(inv) = h.inverse() else { return };
    let (mw, mh) = (src.width() as f64 - 1.0, src.height() as f64 - 1.0);
    for y in 0..dst.height {
        for x in 0..dst.width {
            if let Some((sx, sy)) = inv.apply(x as f64, y as f64) {
                if sx >= 0.0 && sy >= 0.0 && sx <= mw && sy <= mh {
                    dst.set(x as i64, y as i64, sample(src, sx, sy));
                }
            }
        }
    }
}

/// Bilinear resize mapping pixel centers: `src = (dst + 0.5) * scale - 0.5`,
/// clamped at the border.
pub fn resize_bilinear(frame: &Frame, w: u32, h: u32) -> Frame {
    if (w, h) == frame.dims() {
        return frame.clone();
    }
    let sx = frame.width() as f64 / w as f64;
    let sy = frame.height() as f64 / h as f64;
    let maxx = frame.width() as f64 - 1.0;
    let maxy = frame.height() as f64 - 1.0;
    let mut out = Vec::with_capacity(w as usize * h as usize * 3);
    for y in 0..h {
        let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, maxy);
        for x in 0..w {
            let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, maxx);
            out.extend_from_slice(&sample(frame, fx, fy));
        }
    }
    Frame::new(w, h, out).expect("resize output buffer sized by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_from_equal_points() {
        let p = [(10.0, 10.0), (200.0, 15.0), (190.0, 220.0), (5.0, 180.0)];
        let h = homography_from_points(&p, &p).unwrap();
        let id = Matrix3::<f64>::identity();
        assert!((h.matrix() - id).abs().max() < 1e-9);
    }

    #[test]
    fn scale_two() {
        let src = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        let dst = [(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)];
        let h = homography_from_points(&src, &dst).unwrap();
        let want = Matrix3::new(2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0);
        assert!((h.matrix() - want).abs().max() < 1e-9);
    }

    #[test]
    fn collinear_rejected() {
        let src = [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (0.0, 1.0)];
        let dst = [(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)];
        assert_eq!(homography_from_points(&src, &dst), Err(ImgError::Collinear));
    }

    #[test]
    fn identity_warp_is_exact() {
        let px: Vec<u8> = (0..30 * 20 * 3).map(|i| (i * 7 % 256) as u8).collect();
        let f = Frame::new(30, 20, px).unwrap();
        let out = warp_perspective(&f, &Homography::identity(), 30, 20);
        assert_eq!(out, f);
    }

    #[test]
    fn out_of_bounds_reads_black() {
        let f = Frame::filled(10, 10, [255, 255, 255]);
        let shift = Homography::new(Matrix3::new(1.0, 0.0, 20.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0)).unwrap();
        let out = warp_perspective(&f, &shift, 10, 10);
        assert!(out.pixels().iter().all(|&v| v == 0));
    }
}
