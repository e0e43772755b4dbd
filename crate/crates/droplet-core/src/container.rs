//! Planar containers: a closed C^{1,1} wall with an adhesion coefficient on it
//! and a bulk potential inside, plus normal-coordinate wall charts.
//!
//! The wall is carried as a uniform arc-length station table (point, unit
//! tangent, outward normal, signed curvature, sigma per station) backed by an
//! analytic shape (disk, ellipse, stadium) or by dense user samples. Between
//! stations sigma is linearly interpolated; geometry queries go through the
//! analytic shape where one exists.

use alloc::vec::Vec;

use crate::geom::{self, Point2, PolyDroplet};
use crate::{Error, Result};

#[cfg(not(feature = "std"))]
use num_traits::Float;

use core::f64::consts::PI;

pub const MIN_STATIONS: usize = 256;
/// Contact vertices must sit within `SNAP_REL * diam(A)` of the wall.
pub const SNAP_REL: f64 = 1e-9;

/// One row of the wall table.
#[derive(Clone, Copy, Debug)]
pub struct Station {
    pub s: f64,
    pub point: Point2,
    pub tangent: Point2,
    /// Outward unit normal (tangent rotated clockwise for a CCW wall).
    pub normal: Point2,
    pub curvature: f64,
    pub sigma: f64,
}

/// Adhesion coefficient field on the wall, sampled onto the stations.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SigmaField {
    Constant(f64),
    /// `base + amplitude * (1 - cos(2 pi s / L - phase))`.
    Cosine {
        base: f64,
        amplitude: f64,
        phase: f64,
    },
    /// One value per station.
    Table(Vec<f64>),
}

/// Bulk potential `g`.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Potential {
    Zero,
    Linear {
        gx: f64,
        gy: f64,
    },
    /// Bilinear interpolation on a uniform grid; queries outside the grid are
    /// clamped to its edge.
    Grid {
        x0: f64,
        y0: f64,
        dx: f64,
        dy: f64,
        nx: usize,
        ny: usize,
        values: Vec<f64>,
    },
}

impl Potential {
    pub fn eval(&self, p: Point2) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Linear { gx, gy } => gx * p.x + gy * p.y,
            Potential::Grid {
                x0,
                y0,
                dx,
                dy,
                nx,
                ny,
                values,
            } => {
                let fx = ((p.x - x0) / dx).clamp(0.0, (*nx - 1) as f64);
                let fy = ((p.y - y0) / dy).clamp(0.0, (*ny - 1) as f64);
                let ix = (fx as usize).min(nx - 2);
                let iy = (fy as usize).min(ny - 2);
                let (tx, ty) = (fx - ix as f64, fy - iy as f64);
                let v = |i: usize, j: usize| values[j * nx + i];
                let lo = v(ix, iy) * (1.0 - tx) + v(ix + 1, iy) * tx;
                let hi = v(ix, iy + 1) * (1.0 - tx) + v(ix + 1, iy + 1) * tx;
                lo * (1.0 - ty) + hi * ty
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Potential::Zero)
    }
}

/// Wall shape to build a [`Container`] from.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BoundaryShape {
    Disk {
        radius: f64,
        center: Point2,
    },
    Ellipse {
        a: f64,
        b: f64,
        center: Point2,
    },
    /// Rectangle of half-length `half_length` and half-height `radius` with
    /// semicircular caps; the top and bottom walls are exactly flat.
    Stadium {
        half_length: f64,
        radius: f64,
        center: Point2,
    },
    /// Dense closed counterclockwise sample loop (interpolated by cubic
    /// Hermite segments after arc-length resampling).
    Samples(Vec<Point2>),
}

// Ellipse parameter <-> arc-length conversion table (uniform in t).
#[derive(Clone, Debug)]
struct EllipseTable {
    t: Vec<f64>,
    s: Vec<f64>,
    length: f64,
}

#[derive(Clone, Debug)]
enum Shape {
    Disk {
        radius: f64,
        center: Point2,
    },
    Ellipse {
        a: f64,
        b: f64,
        center: Point2,
        table: EllipseTable,
    },
    Stadium {
        half_length: f64,
        radius: f64,
        center: Point2,
    },
    /// Sample loop with chord-difference tangents, interpolated by cubic
    /// Hermite segments in the cumulative-chord parameter.
    Sampled {
        pts: Vec<Point2>,
        /// cumulative chord length; `cum[0] = 0`, `cum[n] = length`
        cum: Vec<f64>,
        tans: Vec<Point2>,
        curv: Vec<f64>,
        length: f64,
    },
}

fn ellipse_speed(a: f64, b: f64, t: f64) -> f64 {
    let (st, ct) = t.sin_cos();
    (a * a * st * st + b * b * ct * ct).sqrt()
}

impl EllipseTable {
    fn build(a: f64, b: f64) -> EllipseTable {
        const M: usize = 16384;
        let mut t = Vec::with_capacity(M + 1);
        let mut s = Vec::with_capacity(M + 1);
        t.push(0.0);
        s.push(0.0);
        let h = 2.0 * PI / M as f64;
        let mut acc = 0.0;
        for j in 0..M {
            let t0 = j as f64 * h;
            // Simpson on [t0, t0 + h]
            acc += h / 6.0
                * (ellipse_speed(a, b, t0)
                    + 4.0 * ellipse_speed(a, b, t0 + 0.5 * h)
                    + ellipse_speed(a, b, t0 + h));
            t.push(t0 + h);
            s.push(acc);
        }
        EllipseTable {
            t,
            s,
            length: acc,
        }
    }

    fn t_of_s(&self, s: f64) -> f64 {
        let s = s.rem_euclid(self.length);
        let mut lo = 0;
        let mut hi = self.s.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.s[mid] <= s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let w = (s - self.s[lo]) / (self.s[hi] - self.s[lo]);
        self.t[lo] + w * (self.t[hi] - self.t[lo])
    }

    fn s_of_t(&self, t: f64) -> f64 {
        let t = t.rem_euclid(2.0 * PI);
        let step = self.t[1];
        let j = ((t / step) as usize).min(self.t.len() - 2);
        let w = (t - self.t[j]) / step;
        self.s[j] + w * (self.s[j + 1] - self.s[j])
    }
}

impl Shape {
    fn length(&self) -> f64 {
        match self {
            Shape::Disk { radius, .. } => 2.0 * PI * radius,
            Shape::Ellipse { table, .. } => table.length,
            Shape::Stadium {
                half_length,
                radius,
                ..
            } => 4.0 * half_length + 2.0 * PI * radius,
            Shape::Sampled { length, .. } => *length,
        }
    }

    /// (point, tangent, outward normal, curvature) at arc length s.
    fn frame(&self, s: f64) -> (Point2, Point2, Point2, f64) {
        match self {
            Shape::Disk { radius, center } => {
                let th = s / radius;
                let (sn, cs) = th.sin_cos();
                let n = Point2::new(cs, sn);
                (
                    *center + n * *radius,
                    Point2::new(-sn, cs),
                    n,
                    1.0 / radius,
                )
            }
            Shape::Ellipse {
                a,
                b,
                center,
                table,
            } => {
                let t = table.t_of_s(s);
                let (st, ct) = t.sin_cos();
                let speed = ellipse_speed(*a, *b, t);
                let tan = Point2::new(-a * st / speed, b * ct / speed);
                let curv = a * b / (speed * speed * speed);
                (
                    *center + Point2::new(a * ct, b * st),
                    tan,
                    Point2::new(tan.y, -tan.x),
                    curv,
                )
            }
            Shape::Stadium {
                half_length,
                radius,
                center,
            } => {
                let (l, r) = (*half_length, *radius);
                let s = s.rem_euclid(4.0 * l + 2.0 * PI * r);
                let (p, tan, n, k) = if s < 2.0 * l {
                    (
                        Point2::new(-l + s, -r),
                        Point2::new(1.0, 0.0),
                        Point2::new(0.0, -1.0),
                        0.0,
                    )
                } else if s < 2.0 * l + PI * r {
                    let phi = (s - 2.0 * l) / r - 0.5 * PI;
                    let (sn, cs) = phi.sin_cos();
                    (
                        Point2::new(l + r * cs, r * sn),
                        Point2::new(-sn, cs),
                        Point2::new(cs, sn),
                        1.0 / r,
                    )
                } else if s < 4.0 * l + PI * r {
                    let x = l - (s - 2.0 * l - PI * r);
                    (
                        Point2::new(x, r),
                        Point2::new(-1.0, 0.0),
                        Point2::new(0.0, 1.0),
                        0.0,
                    )
                } else {
                    let phi = (s - 4.0 * l - PI * r) / r + 0.5 * PI;
                    let (sn, cs) = phi.sin_cos();
                    (
                        Point2::new(-l + r * cs, r * sn),
                        Point2::new(-sn, cs),
                        Point2::new(cs, sn),
                        1.0 / r,
                    )
                };
                (*center + p, tan, n, k)
            }
            Shape::Sampled {
                pts,
                cum,
                tans,
                curv,
                length,
            } => {
                let n = pts.len();
                let s = s.rem_euclid(*length);
                // segment j with cum[j] <= s < cum[j+1]
                let mut lo = 0usize;
                let mut hi = n;
                while hi - lo > 1 {
                    let mid = (lo + hi) / 2;
                    if cum[mid] <= s {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let i = lo;
                let j = (i + 1) % n;
                let h = cum[i + 1] - cum[i];
                let u = (s - cum[i]) / h;
                // cubic Hermite with tangents scaled to the segment
                let (p0, p1) = (pts[i], pts[j]);
                let (m0, m1) = (tans[i] * h, tans[j] * h);
                let (u2, u3) = (u * u, u * u * u);
                let p = p0 * (2.0 * u3 - 3.0 * u2 + 1.0)
                    + m0 * (u3 - 2.0 * u2 + u)
                    + p1 * (-2.0 * u3 + 3.0 * u2)
                    + m1 * (u3 - u2);
                let d = p0 * (6.0 * u2 - 6.0 * u)
                    + m0 * (3.0 * u2 - 4.0 * u + 1.0)
                    + p1 * (6.0 * u - 6.0 * u2)
                    + m1 * (3.0 * u2 - 2.0 * u);
                let tan = d.normalized();
                let k = curv[i] * (1.0 - u) + curv[j] * u;
                (p, tan, Point2::new(tan.y, -tan.x), k)
            }
        }
    }

    /// Project a point onto the wall: returns (arc length, signed inside
    /// distance; positive inside the container).
    fn project(&self, p: Point2) -> (f64, f64) {
        match self {
            Shape::Disk { radius, center } => {
                let d = p - *center;
                let rho = d.norm();
                let th = d.y.atan2(d.x).rem_euclid(2.0 * PI);
                (th * radius, radius - rho)
            }
            Shape::Ellipse {
                a,
                b,
                center,
                table,
            } => {
                let q = p - *center;
                let mut t = (q.y * a).atan2(q.x * b);
                for _ in 0..40 {
                    let (st, ct) = t.sin_cos();
                    let e = Point2::new(a * ct, b * st);
                    let dq = Point2::new(-a * st, b * ct);
                    let ddq = Point2::new(-a * ct, -b * st);
                    let f = (q - e).dot(dq);
                    let fp = (q - e).dot(ddq) - dq.norm2();
                    let step = f / fp;
                    t -= step;
                    if step.abs() < 1e-15 {
                        break;
                    }
                }
                let (st, ct) = t.sin_cos();
                let e = Point2::new(a * ct, b * st);
                let dist = (q - e).norm();
                let inside = (q.x / a) * (q.x / a) + (q.y / b) * (q.y / b) <= 1.0;
                (
                    table.s_of_t(t),
                    if inside { dist } else { -dist },
                )
            }
            Shape::Stadium {
                half_length,
                radius,
                center,
            } => {
                let (l, r) = (*half_length, *radius);
                let q = p - *center;
                let inside = (q.x.abs() <= l && q.y.abs() <= r)
                    || (q - Point2::new(l, 0.0)).norm() <= r
                    || (q - Point2::new(-l, 0.0)).norm() <= r;
                // candidate (s, euclidean distance) per piece
                let mut best = (0.0, f64::INFINITY);
                let xb = q.x.clamp(-l, l);
                let db = (q - Point2::new(xb, -r)).norm();
                if db < best.1 {
                    best = (xb + l, db);
                }
                let dt = (q - Point2::new(xb, r)).norm();
                if dt < best.1 {
                    best = (2.0 * l + PI * r + (l - xb), dt);
                }
                let dr = q - Point2::new(l, 0.0);
                if q.x > l || dr.norm() < r {
                    let phi = dr.y.atan2(dr.x); // in (-pi, pi]
                    if phi.abs() <= 0.5 * PI {
                        let d = (dr.norm() - r).abs();
                        if d < best.1 {
                            best = (2.0 * l + (phi + 0.5 * PI) * r, d);
                        }
                    }
                }
                let dl = q - Point2::new(-l, 0.0);
                if q.x < -l || dl.norm() < r {
                    let phi = dl.y.atan2(dl.x);
                    if phi.abs() >= 0.5 * PI {
                        let d = (dl.norm() - r).abs();
                        if d < best.1 {
                            let ang = if phi >= 0.5 * PI {
                                phi - 0.5 * PI
                            } else {
                                phi + 1.5 * PI
                            };
                            best = (4.0 * l + PI * r + ang * r, d);
                        }
                    }
                }
                (best.0, if inside { best.1 } else { -best.1 })
            }
            Shape::Sampled {
                pts, cum, length, ..
            } => {
                let mut bi = 0;
                let mut bd = f64::INFINITY;
                for (i, q) in pts.iter().enumerate() {
                    let d = (p - *q).norm2();
                    if d < bd {
                        bd = d;
                        bi = i;
                    }
                }
                // refine on the Hermite curve around the best sample
                let step_cap = (cum[bi + 1] - cum[bi]).max(if bi > 0 {
                    cum[bi] - cum[bi - 1]
                } else {
                    *length - cum[pts.len() - 1]
                });
                let mut s = cum[bi];
                for _ in 0..30 {
                    let (q, tan, _, k) = self.frame(s);
                    let f = (p - q).dot(tan);
                    let fp = -1.0 + (p - q).dot(Point2::new(-tan.y, tan.x)) * k;
                    let step = (f / fp).clamp(-step_cap, step_cap);
                    s = (s - step).rem_euclid(*length);
                    if step.abs() < 1e-14 {
                        break;
                    }
                }
                let (q, tan, _, _) = self.frame(s);
                let rel = p - q;
                let side = tan.cross(rel); // positive = interior side (CCW)
                (s, if side >= 0.0 { rel.norm() } else { -rel.norm() })
            }
        }
    }
}

/// A closed planar container: wall station table, adhesion field, potential.
#[derive(Clone, Debug)]
pub struct Container {
    shape: Shape,
    stations: Vec<Station>,
    // prefix integrals of the interpolated sigma: sigma_cum[i] = ∫₀^{sᵢ} σ ds
    sigma_cum: Vec<f64>,
    length: f64,
    spacing: f64,
    potential: Potential,
    sigma_lipschitz: f64,
    curvature_bound: f64,
    injectivity: f64,
    area: f64,
    diam: f64,
    min_sigma: f64,
    min_sigma_station: usize,
}

impl Container {
    pub fn new(
        shape: BoundaryShape,
        station_count: usize,
        sigma: SigmaField,
        potential: Potential,
    ) -> Result<Container> {
        if station_count < MIN_STATIONS {
            return Err(Error::TooFewStations(station_count));
        }
        let shape = match shape {
            BoundaryShape::Disk { radius, center } => {
                if !(radius > 0.0) {
                    return Err(Error::BadBoundaryData("radius must be positive"));
                }
                Shape::Disk { radius, center }
            }
            BoundaryShape::Ellipse { a, b, center } => {
                if !(a > 0.0 && b > 0.0) {
                    return Err(Error::BadBoundaryData("semi-axes must be positive"));
                }
                let table = EllipseTable::build(a, b);
                Shape::Ellipse {
                    a,
                    b,
                    center,
                    table,
                }
            }
            BoundaryShape::Stadium {
                half_length,
                radius,
                center,
            } => {
                if !(half_length > 0.0 && radius > 0.0) {
                    return Err(Error::BadBoundaryData("stadium dimensions must be positive"));
                }
                Shape::Stadium {
                    half_length,
                    radius,
                    center,
                }
            }
            BoundaryShape::Samples(raw) => build_sampled(&raw)?,
        };
        let length = shape.length();
        let n = station_count;
        let spacing = length / n as f64;

        let mut stations: Vec<Station> = (0..n)
            .map(|i| {
                let s = i as f64 * spacing;
                let (point, tangent, normal, curvature) = shape.frame(s);
                Station {
                    s,
                    point,
                    tangent,
                    normal,
                    curvature,
                    sigma: 0.0,
                }
            })
            .collect();

        // adhesion field onto the stations
        match &sigma {
            SigmaField::Constant(v) => {
                for st in &mut stations {
                    st.sigma = *v;
                }
            }
            SigmaField::Cosine {
                base,
                amplitude,
                phase,
            } => {
                for st in &mut stations {
                    st.sigma = base + amplitude * (1.0 - (2.0 * PI * st.s / length - phase).cos());
                }
            }
            SigmaField::Table(vals) => {
                if vals.len() != n {
                    return Err(Error::BadBoundaryData("sigma table length != station count"));
                }
                for (st, v) in stations.iter_mut().zip(vals) {
                    st.sigma = *v;
                }
            }
        }
        for st in &stations {
            if !(st.sigma > -1.0 && st.sigma < 1.0) {
                return Err(Error::SigmaOutOfRange(st.sigma));
            }
        }

        // closure/simplicity and tangent consistency
        let poly: Vec<Point2> = stations.iter().map(|st| st.point).collect();
        if geom::signed_area(&poly) <= 0.0 {
            return Err(Error::BadBoundaryData("wall is not counterclockwise"));
        }
        if !geom::is_simple(&poly) {
            return Err(Error::BadBoundaryData("wall polyline self-intersects"));
        }
        for i in 0..n {
            let a = &stations[i];
            let b = &stations[(i + 1) % n];
            let chord = b.point - a.point;
            let clen = chord.norm();
            if clen > spacing * (1.0 + 1e-6) || clen < spacing * 0.5 {
                return Err(Error::BadBoundaryData("station spacing inconsistent"));
            }
            let kappa = a.curvature.abs().max(b.curvature.abs());
            let max_angle = 0.75 * kappa * spacing + 1e-6;
            let dir = chord * (1.0 / clen);
            if a.tangent.dot(dir) < (max_angle.min(1.5)).cos() {
                return Err(Error::BadBoundaryData("tangents inconsistent with spacing"));
            }
        }

        let curvature_bound = stations
            .iter()
            .map(|st| st.curvature.abs())
            .fold(0.0, f64::max);
        let sigma_lipschitz = (0..n)
            .map(|i| (stations[(i + 1) % n].sigma - stations[i].sigma).abs() / spacing)
            .fold(0.0, f64::max);

        // injectivity estimate: closest non-local approach of the wall to itself
        let curve_reach = if curvature_bound > 0.0 {
            0.5 / curvature_bound
        } else {
            f64::INFINITY
        };
        let mut injectivity = curve_reach;
        for i in 0..n {
            for j in (i + 1)..n {
                let arc = ((j - i) as f64 * spacing).min(length - (j - i) as f64 * spacing);
                if arc >= 2.0 * curve_reach.min(0.25 * length) {
                    let d = 0.5 * stations[i].point.dist(stations[j].point);
                    if d < injectivity {
                        injectivity = d;
                    }
                }
            }
        }

        let area = match &shape {
            Shape::Disk { radius, .. } => PI * radius * radius,
            Shape::Ellipse { a, b, .. } => PI * a * b,
            Shape::Stadium {
                half_length,
                radius,
                ..
            } => 4.0 * half_length * radius + PI * radius * radius,
            Shape::Sampled { .. } => geom::signed_area(&poly),
        };
        let diam = geom::diameter(&poly);
        let (min_sigma_station, min_sigma) = stations
            .iter()
            .enumerate()
            .map(|(i, st)| (i, st.sigma))
            .fold((0, f64::INFINITY), |acc, (i, v)| {
                if v < acc.1 {
                    (i, v)
                } else {
                    acc
                }
            });

        let mut sigma_cum = Vec::with_capacity(n + 1);
        sigma_cum.push(0.0);
        for i in 0..n {
            let seg = 0.5 * spacing * (stations[i].sigma + stations[(i + 1) % n].sigma);
            sigma_cum.push(sigma_cum[i] + seg);
        }

        Ok(Container {
            shape,
            stations,
            sigma_cum,
            length,
            spacing,
            potential,
            sigma_lipschitz,
            curvature_bound,
            injectivity,
            area,
            diam,
            min_sigma,
            min_sigma_station,
        })
    }

    pub fn disk(radius: f64, station_count: usize, sigma: SigmaField, g: Potential) -> Result<Self> {
        Container::new(
            BoundaryShape::Disk {
                radius,
                center: Point2::new(0.0, 0.0),
            },
            station_count,
            sigma,
            g,
        )
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn station_count(&self) -> usize {
        self.stations.len()
    }

    pub fn stations(&self) -> &[Station] {
        &self.stations
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn diam(&self) -> f64 {
        self.diam
    }

    pub fn snap_tol(&self) -> f64 {
        SNAP_REL * self.diam
    }

    pub fn sigma_lipschitz(&self) -> f64 {
        self.sigma_lipschitz
    }

    pub fn curvature_bound(&self) -> f64 {
        self.curvature_bound
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn g_at(&self, p: Point2) -> f64 {
        self.potential.eval(p)
    }

    /// Minimum station sigma and the station index attaining it.
    pub fn min_sigma(&self) -> (f64, usize) {
        (self.min_sigma, self.min_sigma_station)
    }

    /// Station indices sorted by (sigma, index); the first `k` are the
    /// preferred wetting sites.
    pub fn ranked_sigma_stations(&self, k: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.stations.len()).collect();
        idx.sort_by(|&i, &j| {
            (self.stations[i].sigma, i)
                .partial_cmp(&(self.stations[j].sigma, j))
                .unwrap()
        });
        idx.truncate(k);
        idx
    }

    pub fn wrap(&self, s: f64) -> f64 {
        s.rem_euclid(self.length)
    }

    /// Signed arc difference `a - b`, normalized to `(-L/2, L/2]`.
    pub fn arc_delta(&self, a: f64, b: f64) -> f64 {
        let mut d = (a - b).rem_euclid(self.length);
        if d > 0.5 * self.length {
            d -= self.length;
        }
        d
    }

    pub fn point_at(&self, s: f64) -> Point2 {
        self.shape.frame(self.wrap(s)).0
    }

    pub fn tangent_at(&self, s: f64) -> Point2 {
        self.shape.frame(self.wrap(s)).1
    }

    pub fn normal_at(&self, s: f64) -> Point2 {
        self.shape.frame(self.wrap(s)).2
    }

    pub fn curvature_at(&self, s: f64) -> f64 {
        self.shape.frame(self.wrap(s)).3
    }

    /// Linearly interpolated sigma at arc length `s`.
    pub fn sigma_at(&self, s: f64) -> f64 {
        let n = self.stations.len();
        let x = self.wrap(s) / self.spacing;
        let i = (x as usize).min(n - 1);
        let u = x - i as f64;
        self.stations[i].sigma * (1.0 - u) + self.stations[(i + 1) % n].sigma * u
    }

    // ∫₀^s of the interpolant for s in [0, length)
    fn sigma_cum_at(&self, s: f64) -> f64 {
        let n = self.stations.len();
        let x = s / self.spacing;
        let i = (x as usize).min(n - 1);
        let u = x - i as f64;
        let lo = self.stations[i].sigma;
        let hi = self.stations[(i + 1) % n].sigma;
        let val = lo * (1.0 - u) + hi * u;
        self.sigma_cum[i] + 0.5 * (s - i as f64 * self.spacing) * (lo + val)
    }

    /// Integral of sigma along the wall from `s0` to `s1` (in increasing-arc
    /// direction; `s1 - s0` need not be reduced). Exact for the interpolated
    /// field, so its endpoint derivatives are `sigma_at` to rounding.
    pub fn sigma_arc_integral(&self, s0: f64, s1: f64) -> f64 {
        let span = s1 - s0;
        if span == 0.0 {
            return 0.0;
        }
        if span < 0.0 {
            return -self.sigma_arc_integral(s1, s0);
        }
        let total = *self.sigma_cum.last().unwrap();
        let laps = (span / self.length).floor();
        let a = self.wrap(s0);
        let b = self.wrap(s1);
        let mut acc = laps * total + self.sigma_cum_at(b) - self.sigma_cum_at(a);
        // the reduced interval crosses the seam when wrap reorders the ends
        if b < a || (b == a && laps * self.length < span) {
            acc += total;
        }
        acc
    }

    /// Project onto the wall: `(arc length, signed inside distance)`.
    pub fn project(&self, p: Point2) -> (f64, f64) {
        self.shape.project(p)
    }

    /// Signed inside distance (positive inside).
    pub fn inside_distance(&self, p: Point2) -> f64 {
        self.project(p).1
    }

    /// Normal-coordinate chart of the wall based at arc length `base_s`.
    pub fn chart_at(&self, base_s: f64) -> Result<BoundaryChart<'_>> {
        let reach = self.injectivity;
        if !(reach > 10.0 * self.snap_tol()) {
            return Err(Error::ReachTooSmall);
        }
        Ok(BoundaryChart {
            container: self,
            base_s: self.wrap(base_s),
            reach,
        })
    }

    pub fn chart_at_point(&self, y: Point2) -> Result<BoundaryChart<'_>> {
        let (s, _) = self.project(y);
        self.chart_at(s)
    }
}

fn build_sampled(raw: &[Point2]) -> Result<Shape> {
    if raw.len() < 16 {
        return Err(Error::BadBoundaryData("need at least 16 samples"));
    }
    if raw.iter().any(|p| !p.is_finite()) {
        return Err(Error::BadBoundaryData("non-finite sample"));
    }
    let n = raw.len();
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(0.0);
    for i in 0..n {
        let d = raw[i].dist(raw[(i + 1) % n]);
        if d == 0.0 {
            return Err(Error::BadBoundaryData("repeated sample point"));
        }
        cum.push(cum[i] + d);
    }
    let length = *cum.last().unwrap();
    // symmetric chord differences: exact tangent direction on arcs sampled
    // near-uniformly, O(spacing^2) in general
    let mut tans = Vec::with_capacity(n);
    let mut curv = Vec::with_capacity(n);
    for i in 0..n {
        let prev = raw[(i + n - 1) % n];
        let next = raw[(i + 1) % n];
        tans.push((next - prev).normalized());
        let v1 = raw[i] - prev;
        let v2 = next - raw[i];
        let turn = v1.cross(v2).atan2(v1.dot(v2));
        curv.push(2.0 * turn / (v1.norm() + v2.norm()));
    }
    Ok(Shape::Sampled {
        pts: raw.to_vec(),
        cum,
        tans,
        curv,
        length,
    })
}

/// Normal-coordinate chart: maps a tubular neighbourhood of the wall near the
/// base point onto the upper half-plane, sending the wall itself to `{y = 0}`
/// (x = signed arc length from the base, y = inside normal distance) and the
/// inward normal at the base to `+e_2`.
#[derive(Clone, Copy)]
pub struct BoundaryChart<'a> {
    container: &'a Container,
    base_s: f64,
    reach: f64,
}

impl<'a> BoundaryChart<'a> {
    pub fn base_s(&self) -> f64 {
        self.base_s
    }

    pub fn base_point(&self) -> Point2 {
        self.container.point_at(self.base_s)
    }

    pub fn reach(&self) -> f64 {
        self.reach
    }

    /// Container point -> chart coordinates.
    pub fn to_halfplane(&self, p: Point2) -> Result<Point2> {
        let (s, d) = self.container.project(p);
        let snap = self.container.snap_tol();
        if d < -snap || d > self.reach {
            return Err(Error::ChartReachExceeded);
        }
        let u = self.container.arc_delta(s, self.base_s);
        if u.abs() > self.container.length() / 3.0 {
            return Err(Error::ChartReachExceeded);
        }
        Ok(Point2::new(u, d.max(0.0)))
    }

    /// Chart coordinates -> container point.
    pub fn from_halfplane(&self, q: Point2) -> Result<Point2> {
        let snap = self.container.snap_tol();
        if q.y < -snap || q.y > self.reach || q.x.abs() > self.container.length() / 3.0 {
            return Err(Error::ChartReachExceeded);
        }
        let s = self.base_s + q.x;
        let p = self.container.point_at(s);
        let n = self.container.normal_at(s);
        Ok(p - n * q.y.max(0.0))
    }
}

/// Free and wetted perimeter of a droplet in a container. Free edges are
/// measured as chords; the wetted part is measured along the wall between the
/// contact parameters. Contact vertices are validated against the wall to the
/// snapping tolerance.
pub fn split_perimeter(p: &PolyDroplet, c: &Container) -> Result<(f64, f64)> {
    let snap = c.snap_tol();
    for i in 0..p.len() {
        if let Some(s) = p.param(i) {
            let dist = c.point_at(s).dist(p.vertices()[i]);
            if dist > snap {
                return Err(Error::ContactOffBoundary { dist });
            }
        }
    }
    let wetted_pairs = p.wetted_edge_indices();
    let mut wetted = 0.0;
    for (i, j) in &wetted_pairs {
        let si = p.param(*i).unwrap();
        let sj = p.param(*j).unwrap();
        wetted += c.arc_delta(sj, si).abs();
    }
    let mut free = 0.0;
    let n = p.len();
    let verts = p.vertices();
    let is_wetted_edge =
        |i: usize| -> bool { wetted_pairs.iter().any(|&(a, _)| a == i) };
    for i in 0..n {
        if !is_wetted_edge(i) {
            free += verts[i].dist(verts[(i + 1) % n]);
        }
    }
    Ok((free, wetted))
}

/// Rescaled chart image of a droplet: every vertex is mapped through the
/// chart and divided by `scale`. Contact vertices land exactly on `{y = 0}`
/// (their chart parameter is the signed arc distance from the base).
pub fn blow_up(p: &PolyDroplet, chart: &BoundaryChart<'_>, scale: f64) -> Result<PolyDroplet> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::BadMass(scale));
    }
    let c = chart.container;
    let mut verts = Vec::with_capacity(p.len());
    let mut params = Vec::with_capacity(p.len());
    for i in 0..p.len() {
        match p.param(i) {
            Some(s) => {
                let u = c.arc_delta(s, chart.base_s) / scale;
                verts.push(Point2::new(u, 0.0));
                params.push(u);
            }
            None => {
                let q = chart.to_halfplane(p.vertices()[i])?;
                verts.push(q * (1.0 / scale));
                params.push(f64::NAN);
            }
        }
    }
    PolyDroplet::new(verts, p.contact_flags().to_vec(), params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn disk1() -> Container {
        Container::disk(1.0, 512, SigmaField::Constant(0.3), Potential::Zero).unwrap()
    }

    #[test]
    fn disk_table_and_queries() {
        let c = disk1();
        assert!((c.length() - 2.0 * PI).abs() < 1e-12);
        assert!((c.area() - PI).abs() < 1e-12);
        assert_eq!(c.curvature_bound(), 1.0);
        assert_eq!(c.sigma_lipschitz(), 0.0);
        assert!((c.diam() - 2.0).abs() < 1e-4);
        let p = c.point_at(0.5 * PI);
        assert!(p.dist(Point2::new(0.0, 1.0)) < 1e-14);
        assert!(c.tangent_at(0.0).dist(Point2::new(0.0, 1.0)) < 1e-14);
        assert!(c.normal_at(0.0).dist(Point2::new(1.0, 0.0)) < 1e-14);
        let (s, d) = c.project(Point2::new(0.0, 0.25));
        assert!((s - 0.5 * PI).abs() < 1e-12 && (d - 0.75).abs() < 1e-12);
        assert!(c.inside_distance(Point2::new(2.0, 0.0)) < -0.99);
    }

    #[test]
    fn station_count_validation() {
        let r = Container::disk(1.0, 64, SigmaField::Constant(0.0), Potential::Zero);
        assert_eq!(r.unwrap_err(), Error::TooFewStations(64));
        let r = Container::disk(1.0, 512, SigmaField::Constant(1.0), Potential::Zero);
        assert_eq!(r.unwrap_err(), Error::SigmaOutOfRange(1.0));
    }

    #[test]
    fn cosine_sigma_and_ranking() {
        let c = Container::disk(
            1.0,
            1024,
            SigmaField::Cosine {
                base: 0.3,
                amplitude: 0.2,
                phase: 0.0,
            },
            Potential::Zero,
        )
        .unwrap();
        let (s0, at) = c.min_sigma();
        assert!((s0 - 0.3).abs() < 1e-12);
        assert_eq!(at, 0);
        assert!((c.sigma_at(PI) - 0.7).abs() < 1e-5);
        let top = c.ranked_sigma_stations(8);
        // stations cluster around theta = 0, i.e. indices near 0 and N-1
        for i in &top {
            let th = 2.0 * PI * *i as f64 / 1024.0;
            let dist = th.min(2.0 * PI - th);
            assert!(dist < 0.05, "station {i} at angle {th}");
        }
    }

    #[test]
    fn ellipse_consistency() {
        let c = Container::new(
            BoundaryShape::Ellipse {
                a: 1.5,
                b: 1.0,
                center: Point2::new(0.2, -0.1),
            },
            512,
            SigmaField::Constant(0.0),
            Potential::Zero,
        )
        .unwrap();
        assert!((c.area() - PI * 1.5).abs() < 1e-10);
        // perimeter of a 1.5 x 1 ellipse (independent: Gauss-Kronrod on speed)
        let per = crate::quad::integrate(|t| ellipse_speed(1.5, 1.0, t), 0.0, 2.0 * PI, 1e-12);
        assert!((c.length() - per).abs() < 1e-7, "{} vs {per}", c.length());
        // walk the table: point_at(s) must advance at unit speed
        let mut prev = c.point_at(0.0);
        let h = c.length() / 4096.0;
        for i in 1..=4096 {
            let p = c.point_at(i as f64 * h);
            let step = p.dist(prev);
            assert!((step - h).abs() < 1e-3 * h, "step {i}: {step} vs {h}");
            prev = p;
        }
        // curvature extremes: a/b^2 at the major axis ends, b/a^2 at the minor
        assert!((c.curvature_at(0.0) - 1.5).abs() < 1e-6);
        assert!((c.curvature_bound() - 1.5).abs() < 1e-6);
    }

    #[test]
    fn stadium_flat_walls() {
        let c = Container::new(
            BoundaryShape::Stadium {
                half_length: 2.0,
                radius: 1.0,
                center: Point2::new(0.0, 0.0),
            },
            1024,
            SigmaField::Constant(-0.2),
            Potential::Zero,
        )
        .unwrap();
        assert!((c.length() - (8.0 + 2.0 * PI)).abs() < 1e-12);
        assert!((c.area() - (8.0 + PI)).abs() < 1e-12);
        let p = c.point_at(1.0);
        assert!(p.dist(Point2::new(-1.0, -1.0)) < 1e-14);
        assert_eq!(c.curvature_at(1.0), 0.0);
        assert!(c.normal_at(1.0).dist(Point2::new(0.0, -1.0)) < 1e-14);
        let (s, d) = c.project(Point2::new(0.5, -0.8));
        assert!((s - 2.5).abs() < 1e-12 && (d - 0.2).abs() < 1e-12);
        // right cap
        let (s, d) = c.project(Point2::new(3.5, 0.0));
        assert!((s - (4.0 + 0.5 * PI)).abs() < 1e-12);
        assert!((d + 0.5).abs() < 1e-12); // outside
    }

    #[test]
    fn sampled_circle_matches_disk() {
        let m = 4096;
        let raw: Vec<Point2> = (0..m)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / m as f64;
                Point2::new(2.0 * th.cos(), 2.0 * th.sin())
            })
            .collect();
        let c = Container::new(
            BoundaryShape::Samples(raw),
            512,
            SigmaField::Constant(0.0),
            Potential::Zero,
        )
        .unwrap();
        assert!((c.length() - 4.0 * PI).abs() < 1e-3);
        assert!((c.curvature_bound() - 0.5).abs() < 1e-3);
        let (s, d) = c.project(Point2::new(1.5, 0.0));
        assert!((d - 0.5).abs() < 1e-4, "d = {d}");
        assert!(s < 1e-3 || (c.length() - s) < 1e-3);
    }

    #[test]
    fn chart_roundtrip_disk() {
        let c = disk1();
        let chart = c.chart_at(0.0).unwrap();
        assert!((chart.reach() - 0.48).abs() < 0.02);
        // interior points near the base: p = q(s) - d n(s)
        for &(u, v) in &[(0.0, 0.0), (0.1, 0.05), (-0.3, 0.2), (0.45, 0.4)] {
            let p = chart.from_halfplane(Point2::new(u, v)).unwrap();
            let q = chart.to_halfplane(p).unwrap();
            assert!(
                (q.x - u).abs() < 1e-9 && (q.y - v).abs() < 1e-9,
                "({u},{v}) -> ({},{})",
                q.x,
                q.y
            );
        }
        // boundary arc maps onto y = 0
        for &u in &[-0.2, 0.05, 0.3] {
            let q = chart.to_halfplane(c.point_at(u)).unwrap();
            assert!((q.x - u).abs() < 1e-9 && q.y.abs() < 1e-12);
        }
        // orientation: the inward normal at the base maps to +e2
        let p = chart.from_halfplane(Point2::new(0.0, 0.2)).unwrap();
        assert!(p.dist(Point2::new(0.8, 0.0)) < 1e-12);
        assert!(chart.to_halfplane(Point2::new(-0.9, 0.0)).is_err());
    }

    #[test]
    fn chart_roundtrip_ellipse_and_stadium() {
        let e = Container::new(
            BoundaryShape::Ellipse {
                a: 1.5,
                b: 1.0,
                center: Point2::new(0.0, 0.0),
            },
            512,
            SigmaField::Constant(0.0),
            Potential::Zero,
        )
        .unwrap();
        let chart = e.chart_at(1.0).unwrap();
        for &(u, v) in &[(0.0, 0.1), (0.2, 0.02), (-0.25, 0.15)] {
            let p = chart.from_halfplane(Point2::new(u, v)).unwrap();
            let q = chart.to_halfplane(p).unwrap();
            assert!((q.x - u).abs() < 1e-9 && (q.y - v).abs() < 1e-9, "({u},{v})");
        }
        let st = Container::new(
            BoundaryShape::Stadium {
                half_length: 2.0,
                radius: 1.0,
                center: Point2::new(0.0, 0.0),
            },
            1024,
            SigmaField::Constant(0.0),
            Potential::Zero,
        )
        .unwrap();
        let chart = st.chart_at(2.0).unwrap(); // on the flat bottom
        for &(u, v) in &[(0.0, 0.0), (0.5, 0.3), (-1.2, 0.1)] {
            let p = chart.from_halfplane(Point2::new(u, v)).unwrap();
            let q = chart.to_halfplane(p).unwrap();
            assert!((q.x - u).abs() < 1e-9 && (q.y - v).abs() < 1e-9, "({u},{v})");
        }
        // flat wall chart is a rigid motion
        let p = chart.from_halfplane(Point2::new(0.7, 0.25)).unwrap();
        assert!(p.dist(Point2::new(0.7, -0.75)) < 1e-12);
    }

    #[test]
    fn split_perimeter_cases() {
        let c = disk1();
        // interior square, no contact
        let sq = PolyDroplet::interior(vec![
            Point2::new(-0.1, -0.1),
            Point2::new(0.1, -0.1),
            Point2::new(0.1, 0.1),
            Point2::new(-0.1, 0.1),
        ])
        .unwrap();
        let (f, w) = split_perimeter(&sq, &c).unwrap();
        assert_eq!((f, w), (0.8, 0.0));

        // two contact vertices at angles 0 and 0.2: wetted length is the arc
        let s1 = 0.0;
        let s2 = 0.2;
        let tri = PolyDroplet::new(
            vec![c.point_at(s1), c.point_at(s2), Point2::new(0.7, 0.3)],
            vec![true, true, false],
            vec![s1, s2, f64::NAN],
        )
        .unwrap();
        let (f, w) = split_perimeter(&tri, &c).unwrap();
        assert!((w - 0.2).abs() < 1e-12);
        let chord = c.point_at(s1).dist(Point2::new(0.7, 0.3))
            + c.point_at(s2).dist(Point2::new(0.7, 0.3));
        assert!((f - chord).abs() < 1e-12);
        assert!(w > c.point_at(s1).dist(c.point_at(s2))); // arc beats chord

        // off-wall contact vertex is rejected
        let bad = PolyDroplet::new(
            vec![
                Point2::new(0.9, 0.0),
                Point2::new(0.95, 0.3),
                c.point_at(0.4),
            ],
            vec![true, false, true],
            vec![0.0, f64::NAN, 0.4],
        )
        .unwrap();
        assert!(matches!(
            split_perimeter(&bad, &c),
            Err(Error::ContactOffBoundary { .. })
        ));
    }

    #[test]
    fn blow_up_flat_wall_is_rigid() {
        let st = Container::new(
            BoundaryShape::Stadium {
                half_length: 2.0,
                radius: 1.0,
                center: Point2::new(0.0, 0.0),
            },
            1024,
            SigmaField::Constant(0.0),
            Potential::Zero,
        )
        .unwrap();
        let chart = st.chart_at(2.0).unwrap();
        // a little tent sitting on the bottom wall near the chart base
        let t = 0.1;
        let tent = PolyDroplet::new(
            vec![
                Point2::new(t, -1.0),
                Point2::new(0.0, -1.0 + t),
                Point2::new(-t, -1.0),
            ],
            vec![true, false, true],
            vec![2.0 + t, f64::NAN, 2.0 - t],
        )
        .unwrap();
        let up = blow_up(&tent, &chart, t).unwrap();
        assert!(up.vertices()[0].dist(Point2::new(1.0, 0.0)) < 1e-9);
        assert!(up.vertices()[1].dist(Point2::new(0.0, 1.0)) < 1e-9);
        assert!(up.vertices()[2].dist(Point2::new(-1.0, 0.0)) < 1e-9);
        assert_eq!(up.vertices()[0].y, 0.0);
        // area scaling: |blow_up| = |E| / t^2 exactly here (flat wall)
        assert!((up.area() - tent.area() / (t * t)).abs() < 1e-12);
    }

    #[test]
    fn blow_up_respects_reach() {
        let c = disk1();
        let chart = c.chart_at(0.0).unwrap();
        let big = PolyDroplet::interior(vec![
            Point2::new(-0.5, -0.5),
            Point2::new(0.5, -0.5),
            Point2::new(0.0, 0.5),
        ])
        .unwrap();
        assert!(blow_up(&big, &chart, 1.0).is_err()); // deep interior, beyond reach
    }

    #[test]
    fn potential_eval() {
        let g = Potential::Linear { gx: 0.0, gy: 10.0 };
        assert_eq!(g.eval(Point2::new(3.0, 0.25)), 2.5);
        let grid = Potential::Grid {
            x0: 0.0,
            y0: 0.0,
            dx: 1.0,
            dy: 1.0,
            nx: 3,
            ny: 2,
            values: vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
        };
        assert_eq!(grid.eval(Point2::new(0.0, 0.0)), 0.0);
        assert_eq!(grid.eval(Point2::new(2.0, 1.0)), 5.0);
        assert_eq!(grid.eval(Point2::new(1.5, 0.5)), 3.0); // bilinear midpoint
        assert_eq!(grid.eval(Point2::new(-5.0, 0.0)), 0.0); // clamped
    }
}
