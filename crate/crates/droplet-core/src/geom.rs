//! Planar primitives: points, simple polygons, polylines, Hausdorff distance.

use alloc::vec::Vec;

use crate::{Error, Result};

#[cfg(not(feature = "std"))]
use num_traits::Float;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product.
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    pub fn normalized(self) -> Point2 {
        let n = self.norm();
        Point2::new(self.x / n, self.y / n)
    }

    /// Counterclockwise quarter turn.
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn lerp(self, o: Point2, t: f64) -> Point2 {
        self + (o - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl core::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl core::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl core::ops::Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl core::ops::Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Signed polygon area (shoelace; positive for counterclockwise orientation).
pub fn signed_area(pts: &[Point2]) -> f64 {
    let n = pts.len();
    if n < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        twice += a.cross(b);
    }
    0.5 * twice
}

pub fn perimeter(pts: &[Point2]) -> f64 {
    let n = pts.len();
    let mut p = 0.0;
    for i in 0..n {
        p += pts[i].dist(pts[(i + 1) % n]);
    }
    p
}

pub fn diameter(pts: &[Point2]) -> f64 {
    let mut d2 = 0.0f64;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            d2 = d2.max((pts[i] - pts[j]).norm2());
        }
    }
    d2.sqrt()
}

/// Area centroid of a simple polygon.
pub fn centroid(pts: &[Point2]) -> Point2 {
    let n = pts.len();
    let mut cx = 0.0;
    let mut cy = 0.0;
    let mut twice = 0.0;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let w = a.cross(b);
        twice += w;
        cx += (a.x + b.x) * w;
        cy += (a.y + b.y) * w;
    }
    Point2::new(cx / (3.0 * twice), cy / (3.0 * twice))
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    orient(a, b, p) == 0.0
        && p.x >= a.x.min(b.x)
        && p.x <= a.x.max(b.x)
        && p.y >= a.y.min(b.y)
        && p.y <= a.y.max(b.y)
}

/// Proper or improper intersection of closed segments [a,b] and [c,d].
pub fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// Whether the closed polygon is simple (no non-adjacent edges touch, no
/// adjacent edges fold back onto each other).
pub fn is_simple(pts: &[Point2]) -> bool {
    let n = pts.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        if a == b {
            return false;
        }
        let (lox, hix) = (a.x.min(b.x), a.x.max(b.x));
        let (loy, hiy) = (a.y.min(b.y), a.y.max(b.y));
        for j in (i + 1)..n {
            let (c, d) = (pts[j], pts[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // shared endpoint is fine; a fold-back is not
                let (shared, e1, e2) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                if orient(e1, shared, e2) == 0.0 && (e1 - shared).dot(e2 - shared) > 0.0 {
                    return false;
                }
                continue;
            }
            if c.x.max(d.x) < lox || c.x.min(d.x) > hix || c.y.max(d.y) < loy || c.y.min(d.y) > hiy
            {
                continue;
            }
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Validated area of a simple counterclockwise polygon.
pub fn polygon_area(pts: &[Point2]) -> Result<f64> {
    if pts.len() < 3 {
        return Err(Error::EmptyGeometry);
    }
    if !is_simple(pts) {
        return Err(Error::SelfIntersection);
    }
    let a = signed_area(pts);
    if a <= 0.0 {
        return Err(Error::NotCounterClockwise);
    }
    Ok(a)
}

pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let l2 = ab.norm2();
    if l2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / l2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Distance from a point to an open polyline.
pub fn point_polyline_distance(p: Point2, line: &[Point2]) -> f64 {
    if line.len() == 1 {
        return p.dist(line[0]);
    }
    let mut best = f64::INFINITY;
    for w in line.windows(2) {
        best = best.min(point_segment_distance(p, w[0], w[1]));
    }
    best
}

/// Crossing-parity point-in-polygon test (points on the boundary may land on
/// either side; callers needing boundary awareness should test distance too).
pub fn point_in_polygon(p: Point2, pts: &[Point2]) -> bool {
    let n = pts.len();
    let mut inside = false;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

// Upper bound for max over [p, q] of dist(., b): along a line the distance
// to one segment of b is convex, so its maximum sits at an endpoint; the
// minimum of those per-segment endpoint maxima bounds the pointwise minimum.
fn segment_sup_bound(p: Point2, q: Point2, b: &[Point2]) -> f64 {
    if b.len() == 1 {
        return p.dist(b[0]).max(q.dist(b[0]));
    }
    let mut bound = f64::INFINITY;
    for w in b.windows(2) {
        let m = point_segment_distance(p, w[0], w[1]).max(point_segment_distance(q, w[0], w[1]));
        bound = bound.min(m);
    }
    bound
}

fn directed_hausdorff(a: &[Point2], b: &[Point2], tol: f64) -> f64 {
    let mut best = 0.0f64;
    if a.len() == 1 {
        return point_polyline_distance(a[0], b);
    }
    let mut stack: Vec<(Point2, Point2, f64, f64)> = Vec::new();
    for w in a.windows(2) {
        let dp = point_polyline_distance(w[0], b);
        let dq = point_polyline_distance(w[1], b);
        best = best.max(dp.max(dq));
        stack.push((w[0], w[1], dp, dq));
    }
    // dist(., b) is 1-Lipschitz, so on a segment of length L with endpoint
    // values dp, dq the maximum is at most (dp + dq + L) / 2; where that is
    // loose (flat stretches) the convex per-segment bound prunes instead
    while let Some((p, q, dp, dq)) = stack.pop() {
        let len = p.dist(q);
        if len < 1e-15 * (1.0 + best) {
            continue;
        }
        let lipschitz = 0.5 * (dp + dq + len);
        if lipschitz <= best + tol {
            continue;
        }
        if segment_sup_bound(p, q, b) <= best + tol {
            continue;
        }
        let m = p.lerp(q, 0.5);
        let dm = point_polyline_distance(m, b);
        best = best.max(dm);
        stack.push((p, m, dp, dm));
        stack.push((m, q, dm, dq));
    }
    best
}

/// Hausdorff distance between two polylines (as point sets: unions of their
/// segments), certified to absolute accuracy `1e-12 * (1 + scale)`.
pub fn hausdorff_distance(a: &[Point2], b: &[Point2]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyGeometry);
    }
    let scale = diameter(a).max(diameter(b)).max(1.0);
    let tol = 1e-12 * scale;
    Ok(directed_hausdorff(a, b, tol).max(directed_hausdorff(b, a, tol)))
}

/// Polygonal droplet: counterclockwise simple polygon whose vertices are
/// classified as wall-contact or free. Contact vertices carry the arc-length
/// parameter of the wall point they sit on ([`f64::NAN`] on free vertices).
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PolyDroplet {
    vertices: Vec<Point2>,
    contact: Vec<bool>,
    params: Vec<f64>,
}

impl PolyDroplet {
    /// Validates: >= 3 finite vertices, simple, positive orientation, and the
    /// contact flags forming at most one contiguous circular run (with at
    /// least one free vertex left).
    pub fn new(vertices: Vec<Point2>, contact: Vec<bool>, params: Vec<f64>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::TooFewVertices(vertices.len()));
        }
        if vertices.len() != contact.len() || vertices.len() != params.len() {
            return Err(Error::BadBoundaryData("flag/param length mismatch"));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadBoundaryData("non-finite vertex"));
        }
        if contact.iter().all(|&c| c) {
            return Err(Error::FullyWetted);
        }
        let runs = contact
            .iter()
            .zip(contact.iter().cycle().skip(1))
            .filter(|(&prev, &cur)| !prev && cur)
            .count();
        if runs > 1 {
            return Err(Error::WettedNotContiguous);
        }
        if !is_simple(&vertices) {
            return Err(Error::SelfIntersection);
        }
        if signed_area(&vertices) <= 0.0 {
            return Err(Error::NotCounterClockwise);
        }
        Ok(PolyDroplet {
            vertices,
            contact,
            params,
        })
    }

    /// Droplet with no wall contact.
    pub fn interior(vertices: Vec<Point2>) -> Result<Self> {
        let n = vertices.len();
        PolyDroplet::new(vertices, alloc::vec![false; n], alloc::vec![f64::NAN; n])
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn contact_flags(&self) -> &[bool] {
        &self.contact
    }

    /// Wall arc-length parameter of vertex `i`, if it is a contact vertex.
    pub fn param(&self, i: usize) -> Option<f64> {
        self.contact[i].then_some(self.params[i])
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        perimeter(&self.vertices)
    }

    pub fn diameter(&self) -> f64 {
        diameter(&self.vertices)
    }

    pub fn has_contact(&self) -> bool {
        self.contact.iter().any(|&c| c)
    }

    /// Start index and length of the circular run of contact vertices.
    pub fn contact_run(&self) -> Option<(usize, usize)> {
        let n = self.len();
        let start = (0..n).find(|&i| self.contact[i] && !self.contact[(i + n - 1) % n])?;
        let len = (0..n).take_while(|k| self.contact[(start + k) % n]).count();
        Some((start, len))
    }

    /// Free boundary as an open polyline, from the last contact vertex around
    /// the free side to the first contact vertex (the whole closed polygon,
    /// first vertex repeated, when there is no contact).
    pub fn free_polyline(&self) -> Vec<Point2> {
        let n = self.len();
        match self.contact_run() {
            Some((start, len)) => {
                let from = (start + len - 1) % n; // last contact vertex
                let count = n - len + 2;
                (0..count).map(|k| self.vertices[(from + k) % n]).collect()
            }
            None => {
                let mut line = self.vertices.clone();
                line.push(self.vertices[0]);
                line
            }
        }
    }

    /// Indices `(i, j)` of edges joining consecutive contact vertices.
    pub fn wetted_edge_indices(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        match self.contact_run() {
            Some((start, len)) if len >= 2 => (0..len - 1)
                .map(|k| ((start + k) % n, (start + k + 1) % n))
                .collect(),
            _ => Vec::new(),
        }
    }
}
