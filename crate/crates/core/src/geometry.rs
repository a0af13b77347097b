//! Planar geometry helpers shared by the map and the predicates.

pub type Point = [f64; 2];

/// Distance below which a point counts as lying on a polygon boundary.
pub const BOUNDARY_EPS: f64 = 1e-9;

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn scale(a: Point, k: f64) -> Point {
    [a[0] * k, a[1] * k]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

/// Unit vector, or `None` for the zero vector.
pub fn unit(a: Point) -> Option<Point> {
    let n = norm(a);
    (n > 0.0).then(|| scale(a, 1.0 / n))
}

/// Rotates `p` into a frame whose +x axis points along `yaw`.
#[inline]
pub fn to_local(p: Point, origin: Point, yaw: f64) -> Point {
    let d = sub(p, origin);
    let (s, c) = yaw.sin_cos();
    [c * d[0] + s * d[1], -s * d[0] + c * d[1]]
}

/// Unsigned angle between two non-zero vectors, radians in [0, pi].
pub fn angle_between(a: Point, b: Point) -> f64 {
    cross(a, b).atan2(dot(a, b)).abs()
}

/// Closest point on segment `ab` to `p`, with its parameter in [0, 1].
pub fn project_on_segment(p: Point, a: Point, b: Point) -> (Point, f64) {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    if len2 == 0.0 {
        return (a, 0.0);
    }
    let u = (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0);
    (add(a, scale(ab, u)), u)
}

pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    dist(p, project_on_segment(p, a, b).0)
}

/// Distance from `p` to the closed boundary ring of `poly`.
pub fn boundary_distance(p: Point, poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| segment_distance(p, poly[i], poly[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Even-odd containment, strict interior only.
fn crossing_number_inside(p: Point, poly: &[Point]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Closed-polygon containment: boundary points (within [`BOUNDARY_EPS`]) count as inside.
pub fn polygon_contains(poly: &[Point], p: Point) -> bool {
    if poly.len() < 3 {
        return false;
    }
    crossing_number_inside(p, poly) || boundary_distance(p, poly) <= BOUNDARY_EPS
}

/// 0 inside or on the boundary, otherwise distance to the boundary.
pub fn polygon_distance(poly: &[Point], p: Point) -> f64 {
    if poly.len() < 3 {
        return f64::INFINITY;
    }
    if crossing_number_inside(p, poly) {
        return 0.0;
    }
    let d = boundary_distance(p, poly);
    if d <= BOUNDARY_EPS {
        0.0
    } else {
        d
    }
}

pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| cross(poly[i], poly[(i + 1) % n])).sum::<f64>() * 0.5
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o = |p: Point, q: Point, r: Point| cross(sub(q, p), sub(r, p));
    let d1 = o(c, d, a);
    let d2 = o(c, d, b);
    let d3 = o(a, b, c);
    let d4 = o(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |p: Point, q: Point, r: Point| {
        r[0] >= p[0].min(q[0]) && r[0] <= p[0].max(q[0]) && r[1] >= p[1].min(q[1]) && r[1] <= p[1].max(q[1])
    };
    (d1 == 0.0 && on(c, d, a)) || (d2 == 0.0 && on(c, d, b)) || (d3 == 0.0 && on(a, b, c)) || (d4 == 0.0 && on(a, b, d))
}

/// True when no two non-adjacent edges of the ring touch.
pub fn is_simple(poly: &[Point]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in (i + 1)..n {
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

pub fn polyline_length(line: &[Point]) -> f64 {
    line.windows(2).map(|w| dist(w[0], w[1])).sum()
}

/// Point at arclength `s` along the polyline (clamped to its ends).
pub fn point_at_arclength(line: &[Point], s: f64) -> Point {
    if s <= 0.0 {
        return line[0];
    }
    let mut acc = 0.0;
    for w in line.windows(2) {
        let len = dist(w[0], w[1]);
        if acc + len >= s && len > 0.0 {
            let u = (s - acc) / len;
            return add(w[0], scale(sub(w[1], w[0]), u));
        }
        acc += len;
    }
    line[line.len() - 1]
}

/// Resamples a polyline into `count` points spaced uniformly in arclength.
pub fn resample_uniform(line: &[Point], count: usize) -> Vec<Point> {
    let total = polyline_length(line);
    if count < 2 {
        return vec![line[0]];
    }
    (0..count)
        .map(|i| {
            if i == count - 1 {
                line[line.len() - 1]
            } else {
                point_at_arclength(line, total * i as f64 / (count - 1) as f64)
            }
        })
        .collect()
}

/// Arclength of the projection of `p` onto the polyline.
pub fn project_arclength(line: &[Point], p: Point) -> f64 {
    let mut best = (f64::INFINITY, 0.0);
    let mut acc = 0.0;
    for w in line.windows(2) {
        let (q, u) = project_on_segment(p, w[0], w[1]);
        let len = dist(w[0], w[1]);
        let d = dist(p, q);
        if d < best.0 {
            best = (d, acc + u * len);
        }
        acc += len;
    }
    best.1
}

pub fn polyline_distance(line: &[Point], p: Point) -> f64 {
    line.windows(2)
        .map(|w| segment_distance(p, w[0], w[1]))
        .fold(f64::INFINITY, f64::min)
}

/// A planar rigid motion: rotation by `yaw` followed by translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rigid2 {
    pub yaw: f64,
    pub translation: Point,
}

impl Rigid2 {
    pub fn new(yaw: f64, translation: Point) -> Self {
        Rigid2 { yaw, translation }
    }

    pub fn apply(&self, p: Point) -> Point {
        let (s, c) = self.yaw.sin_cos();
        [c * p[0] - s * p[1] + self.translation[0], s * p[0] + c * p[1] + self.translation[1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: [Point; 4] = [[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]];

    #[test]
    fn containment_is_closed() {
        assert!(polygon_contains(&SQUARE, [1.0, 1.0]));
        assert!(polygon_contains(&SQUARE, [2.0, 1.0]));
        assert!(polygon_contains(&SQUARE, [0.0, 0.0]));
        assert!(!polygon_contains(&SQUARE, [2.1, 1.0]));
    }

    #[test]
    fn distance_outside() {
        assert_eq!(polygon_distance(&SQUARE, [1.0, 1.0]), 0.0);
        assert!((polygon_distance(&SQUARE, [5.0, 1.0]) - 3.0).abs() < 1e-12);
        assert!((polygon_distance(&SQUARE, [5.0, 6.0]) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn simplicity() {
        assert!(is_simple(&SQUARE));
        let bowtie = [[0.0, 0.0], [2.0, 2.0], [2.0, 0.0], [0.0, 2.0]];
        assert!(!is_simple(&bowtie));
    }

    #[test]
    fn resample_keeps_ends() {
        let line = [[0.0, 0.0], [10.0, 0.0]];
        let r = resample_uniform(&line, 21);
        assert_eq!(r.len(), 21);
        assert_eq!(r[10], [5.0, 0.0]);
        assert_eq!(r[20], [10.0, 0.0]);
    }

    #[test]
    fn local_frame() {
        let p = to_local([0.0, 1.0], [0.0, 0.0], std::f64::consts::FRAC_PI_2);
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12);
    }
}
