use super::{label_components, ImgError, Mask};

type Pt = (f64, f64);

fn cross(o: Pt, a: Pt, b: Pt) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Monotone-chain hull, counter-clockwise in image coordinates (y down),
/// collinear points dropped.
pub fn convex_hull(mut pts: Vec<Pt>) -> Vec<Pt> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Pt> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Pt> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn line_intersection(p1: Pt, p2: Pt, p3: Pt, p4: Pt) -> Option<Pt> {
    let d = (p1.0 - p2.0) * (p3.1 - p4.1) - (p1.1 - p2.1) * (p3.0 - p4.0);
    if d.abs() < 1e-12 {
        return None;
    }
    let a = p1.0 * p2.1 - p1.1 * p2.0;
    let b = p3.0 * p4.1 - p3.1 * p4.0;
    Some((
        (a * (p3.0 - p4.0) - (p1.0 - p2.0) * b) / d,
        (a * (p3.1 - p4.1) - (p1.1 - p2.1) * b) / d,
    ))
}

fn polygon_area(p: &[Pt]) -> f64 {
    let n = p.len();
    (0..n)
        .map(|i| p[i].0 * p[(i + 1) % n].1 - p[(i + 1) % n].0 * p[i].1)
        .sum::<f64>()
        .abs()
        / 2.0
}

/// Reduce a convex polygon to 4 vertices by repeatedly removing the edge
/// whose removal (extending both neighbors to their intersection) adds the
/// least area. The result encloses the input.
pub fn reduce_to_quad(mut poly: Vec<Pt>) -> Result<Vec<Pt>, ImgError> {
    if poly.len() < 4 {
        return Err(ImgError::Degenerate(format!("hull has {} vertices", poly.len())));
    }
    // Orientation: make sure the intersection test below sees the outside
    // consistently regardless of winding.
    let orient = {
        let n = poly.len();
        (0..n)
            .map(|i| poly[i].0 * poly[(i + 1) % n].1 - poly[(i + 1) % n].0 * poly[i].1)
            .sum::<f64>()
            .signum()
    };
    while poly.len() > 4 {
        let n = poly.len();
        let mut best: Option<(usize, Pt, f64)> = None;
        for i in 0..n {
            let prev = poly[(i + n - 1) % n];
            let a = poly[i];
            let b = poly[(i + 1) % n];
            let next = poly[(i + 2) % n];
            let Some(p) = line_intersection(prev, a, b, next) else {
                continue;
            };
            // The new vertex must lie beyond edge a-b (outside the polygon).
            if cross(a, b, p) * orient > 0.0 {
                continue;
            }
            let added = cross(a, p, b).abs() / 2.0;
            if best.is_none_or(|(_, _, s)| added < s) {
                best = Some((i, p, added));
            }
        }
        let Some((i, p, _)) = best else {
            return Err(ImgError::Degenerate("no removable hull edge".into()));
        };
        let j = (i + 1) % n;
        poly[i] = p;
        poly.remove(j);
    }
    Ok(poly)
}

/// Order 4 corners TL, TR, BR, BL: by angle around the centroid (clockwise
/// on screen), rotated to start at the corner with the smallest `x + y`.
pub fn order_corners(pts: &[Pt]) -> [Pt; 4] {
    let cx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let cy = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let mut v: Vec<Pt> = pts.to_vec();
    v.sort_by(|a, b| {
        let ta = (a.1 - cy).atan2(a.0 - cx);
        let tb = (b.1 - cy).atan2(b.0 - cx);
        ta.partial_cmp(&tb).unwrap()
    });
    let start = (0..4)
        .min_by(|&i, &j| (v[i].0 + v[i].1).partial_cmp(&(v[j].0 + v[j].1)).unwrap())
        .unwrap();
    [v[start], v[(start + 1) % 4], v[(start + 2) % 4], v[(start + 3) % 4]]
}

/// Enclosing quadrilateral of the largest 4-connected component.
pub fn find_quad(mask: &Mask) -> Result<[Pt; 4], ImgError> {
    let lab = label_components(mask);
    let Some(comp) = lab.components.first() else {
        return Err(ImgError::Degenerate("empty mask".into()));
    };
    let want = comp.id as u32 + 1;
    let w = mask.width as usize;
    let mut pts = Vec::new();
    for y in comp.bbox.y..comp.bbox.bottom() {
        let row = &lab.labels[y as usize * w..(y as usize + 1) * w];
        let xs = comp.bbox.x as usize..comp.bbox.right() as usize;
        let first = xs.clone().find(|&x| row[x] == want);
        let last = xs.rev().find(|&x| row[x] == want);
        if let (Some(a), Some(b)) = (first, last) {
            pts.push((a as f64, y as f64));
            pts.push((b as f64, y as f64));
        }
    }
    let hull = convex_hull(pts);
    if hull.len() < 3 || polygon_area(&hull) < 1.0 {
        return Err(ImgError::Degenerate("collinear hull".into()));
    }
    let quad = reduce_to_quad(hull)?;
    if polygon_area(&quad) < 1.0 {
        return Err(ImgError::Degenerate("zero-area quad".into()));
    }
    Ok(order_corners(&quad))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Pt, b: Pt, tol: f64) -> bool {
        (a.0 - b.0).abs() <= tol && (a.1 - b.1).abs() <= tol
    }

    #[test]
    fn axis_aligned_square() {
        let m = Mask::from_fn(400, 400, |x, y| (100..=300).contains(&x) && (100..=300).contains(&y));
        let q = find_quad(&m).unwrap();
        let want = [(100.0, 100.0), (300.0, 100.0), (300.0, 300.0), (100.0, 300.0)];
        for (a, b) in q.iter().zip(want) {
            assert!(close(*a, b, 1.0), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn rotated_square() {
        let (cx, cy, r) = (200.0f64, 200.0f64, 100.0f64);
        let th = 30f64.to_radians();
        let corners: Vec<Pt> = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
            .iter()
            .map(|&(u, v): &(f64, f64)| {
                let (x, y) = (u * r, v * r);
                (cx + x * th.cos() - y * th.sin(), cy + x * th.sin() + y * th.cos())
            })
            .collect();
        let inside = |x: f64, y: f64| {
            (0..4).all(|i| cross(corners[i], corners[(i + 1) % 4], (x, y)) >= 0.0)
        };
        let m = Mask::from_fn(400, 400, |x, y| inside(x as f64, y as f64));
        let q = find_quad(&m).unwrap();
        let want = order_corners(&corners);
        for (a, b) in q.iter().zip(want) {
            assert!(close(*a, b, 2.0), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn single_pixel_is_degenerate() {
        let m = Mask::from_fn(10, 10, |x, y| x == 4 && y == 4);
        assert!(matches!(find_quad(&m), Err(ImgError::Degenerate(_))));
    }

    #[test]
    fn line_is_degenerate() {
        let m = Mask::from_fn(20, 20, |x, y| y == 5 && x > 2);
        assert!(find_quad(&m).is_err());
    }
}
