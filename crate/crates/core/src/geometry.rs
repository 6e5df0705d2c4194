//! Small planar kernel for operating-point polygons in the unit square.

use std::ops::{Add, Sub};

/// Absolute tolerance for orientation and coincidence tests.
pub const GEOMETRY_EPS: f64 = 1e-12;

/// A point in (fpr, tpr) space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn scale(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    /// `self + t * (o - self)`.
    pub fn lerp(self, o: Point, t: f64) -> Point {
        self + (o - self).scale(t)
    }
}

impl Add for Point {
    type Output = Point;

    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;

    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

/// z-component of `(a - o) x (b - o)`; positive when `o, a, b` turn left.
pub fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let d = b - a;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    p.dist(a.lerp(b, t))
}

/// Convex polygon with counter-clockwise vertices. May degenerate to a
/// segment or a single point.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    /// Caller guarantees counter-clockwise convex order.
    pub fn from_ccw(vertices: Vec<Point>) -> Self {
        ConvexPolygon {
            vertices: dedup_ring(vertices),
        }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        self.edges()
            .map(|(a, b)| a.x * b.y - a.y * b.x)
            .sum::<f64>()
            * 0.5
    }

    /// Distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        match self.vertices.len() {
            0 => f64::INFINITY,
            1 => p.dist(self.vertices[0]),
            _ => self
                .edges()
                .map(|(a, b)| segment_distance(p, a, b))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Containment with tolerance `eps`, including degenerate polygons.
    pub fn contains(&self, p: Point, eps: f64) -> bool {
        match self.vertices.len() {
            0 => false,
            1 | 2 => self.boundary_distance(p) <= eps,
            _ => self.edges().all(|(a, b)| {
                let len = a.dist(b);
                len == 0.0 || cross(a, b, p) / len >= -eps
            }),
        }
    }

    /// Keeps the part of the polygon left of the directed line `a -> b`.
    pub fn clip_left_of(&self, a: Point, b: Point, eps: f64) -> ConvexPolygon {
        let n = self.vertices.len();
        let len = a.dist(b);
        if n == 0 || len == 0.0 {
            return self.clone();
        }
        let side = |p: Point| cross(a, b, p) / len;
        let mut out = Vec::with_capacity(n + 1);
        for i in 0..n {
            let cur = self.vertices[i];
            let next = self.vertices[(i + 1) % n];
            let sc = side(cur);
            let sn = side(next);
            let cur_in = sc >= -eps;
            let next_in = sn >= -eps;
            if cur_in {
                out.push(cur);
            }
            if cur_in != next_in && (sc.abs() > eps || sn.abs() > eps) {
                // crossing strictly through the line
                if (sc > eps && sn < -eps) || (sc < -eps && sn > eps) {
                    let t = sc / (sc - sn);
                    out.push(cur.lerp(next, t));
                }
            }
        }
        ConvexPolygon::from_ccw(out)
    }

    /// Intersection with another convex polygon (Sutherland-Hodgman).
    pub fn intersect(&self, clip: &ConvexPolygon, eps: f64) -> ConvexPolygon {
        match clip.vertices.len() {
            0 => ConvexPolygon { vertices: vec![] },
            1 => {
                let p = clip.vertices[0];
                if self.contains(p, eps) {
                    ConvexPolygon { vertices: vec![p] }
                } else {
                    ConvexPolygon { vertices: vec![] }
                }
            }
            _ => {
                let mut acc = self.clone();
                for (a, b) in clip.edges() {
                    acc = acc.clip_left_of(a, b, eps);
                    if acc.is_empty() {
                        break;
                    }
                }
                acc
            }
        }
    }
}

/// Drops repeated (within tolerance) consecutive vertices of a closed ring.
fn dedup_ring(mut v: Vec<Point>) -> Vec<Point> {
    v.dedup_by(|b, a| a.dist(*b) <= GEOMETRY_EPS);
    while v.len() > 1 && v[0].dist(*v.last().unwrap()) <= GEOMETRY_EPS {
        v.pop();
    }
    v
}
