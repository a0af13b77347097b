use scenemine_core::geometry::Point;
use scenemine_core::TrackBox;

/// Footprint corners, counter-clockwise.
fn footprint(b: &TrackBox) -> [Point; 4] {
    let (s, c) = b.yaw.sin_cos();
    let (hl, hw) = (b.size[0] / 2.0, b.size[1] / 2.0);
    let [x, y, _] = b.translation;
    [(hl, -hw), (hl, hw), (-hl, hw), (-hl, -hw)].map(|(u, v)| [x + c * u - s * v, y + s * u + c * v])
}

fn area(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        a[0] * b[1] - b[0] * a[1]
    })
    .sum::<f64>()
        / 2.0
}

/// Sutherland-Hodgman clip of a polygon against a convex counter-clockwise one.
fn clip(subject: &[Point], clipper: &[Point]) -> Vec<Point> {
    let side = |a: Point, b: Point, p: Point| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    let mut out = subject.to_vec();
    for i in 0..clipper.len() {
        if out.is_empty() {
            break;
        }
        let (a, b) = (clipper[i], clipper[(i + 1) % clipper.len()]);
        let input = std::mem::take(&mut out);
        for j in 0..input.len() {
            let (p, q) = (input[j], input[(j + 1) % input.len()]);
            let (sp, sq) = (side(a, b, p), side(a, b, q));
            if sp >= 0.0 {
                out.push(p);
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                let t = sp / (sp - sq);
                out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
    }
    out
}

/// Bird's-eye intersection area of two oriented boxes.
pub fn bev_intersection(a: &TrackBox, b: &TrackBox) -> f64 {
    let poly = clip(&footprint(a), &footprint(b));
    if poly.len() < 3 {
        0.0
    } else {
        area(&poly).max(0.0)
    }
}

/// Volume IoU of two yaw-oriented boxes.
pub fn box_iou_3d(a: &TrackBox, b: &TrackBox) -> f64 {
    let z = |t: &TrackBox| (t.translation[2] - t.size[2] / 2.0, t.translation[2] + t.size[2] / 2.0);
    let ((a0, a1), (b0, b1)) = (z(a), z(b));
    let height = (a1.min(b1) - a0.max(b0)).max(0.0);
    if height == 0.0 {
        return 0.0;
    }
    let inter = bev_intersection(a, b) * height;
    let vol = |t: &TrackBox| t.size[0] * t.size[1] * t.size[2];
    let union = vol(a) + vol(b) - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}
