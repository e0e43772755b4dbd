//! Volume-constrained local minimization of the container capillary energy
//! over polygonal droplets, with the contact points sliding along the wall.
//!
//! The descent state is (wall interval [s_a, s_b], free vertex chain); the
//! wetted side of the polygon is slaved to the wall between the contact
//! parameters. Steps are projected-gradient trials in the H¹(ds) metric of
//! the free chain — an edge-weighted chain Laplacian solved by banded
//! Cholesky, with the contact parameters entering as tangent-constrained
//! boundary unknowns — plus dedicated 1D line searches along the two contact
//! modes (span breathing, tangential slide), whose response under the
//! Laplacian alone would shrink with the mesh. Each trial is Armijo-tested
//! after an exact volume restoration (Newton on a uniform outward-normal
//! offset of the free vertices). Everything runs in physical coordinates;
//! wall charts are used only to place seeds.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clip;
use crate::container::Container;
use crate::energy::{gauss_energy, EnergyBreakdown};
use crate::geom::{self, Point2, PolyDroplet};
use crate::sessile::{ideal_droplet_boundary, CapGeometry, IdealDroplet};
use crate::{Error, Result};

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Starting droplet for one descent run.
#[derive(Clone, Copy, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SeedSpec {
    /// Cap seed attached to the wall at arc length `s`; `tau_guess` defaults
    /// to σ(s).
    Wall { s: f64, tau_guess: Option<f64> },
    /// Detached disk seed centered at `center`.
    Interior { center: Point2 },
}

#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MinimizeConfig {
    /// Free-boundary resolution: number of polygon vertices on the cap seed
    /// (the wetted chain adds a few more). At least 32.
    pub vertex_count: usize,
    /// Prescribed droplet area; must be positive and below the container area.
    pub m: f64,
    /// Initial backtracking step; `None` picks a step that moves vertices by
    /// a fraction of an edge length.
    pub init_step: Option<f64>,
    /// Stop when the projected gradient ∞-norm drops below this; `None`
    /// defaults to 1e−8·ψ(min σ).
    pub grad_tol: Option<f64>,
    pub max_iters: usize,
    /// Resample the free arc to equal edge lengths every this many accepted
    /// steps.
    pub remesh_interval: usize,
    /// Seed list; empty selects the default set (wall seeds at the 8
    /// lowest-σ stations plus one interior disk when it fits).
    pub seeds: Vec<SeedSpec>,
    pub rng_seed: u64,
}

impl MinimizeConfig {
    pub fn new(m: f64) -> Self {
        MinimizeConfig {
            vertex_count: 256,
            m,
            init_step: None,
            grad_tol: None,
            max_iters: 50_000,
            remesh_interval: 20,
            seeds: Vec::new(),
            rng_seed: 0,
        }
    }

    fn validate(&self, c: &Container) -> Result<()> {
        if self.vertex_count < 32 {
            return Err(Error::TooFewVertices(self.vertex_count));
        }
        if !(self.m > 0.0) || !self.m.is_finite() || self.m >= c.area() {
            return Err(Error::BadMass(self.m));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MinimizeResult {
    pub droplet: PolyDroplet,
    pub energy: EnergyBreakdown,
    /// Wetted-arc midpoint on the wall (`None` for detached droplets).
    pub p_m: Option<Point2>,
    /// Contact interval `(s_a, s_b)` in wall arc length, `s_a < s_b`
    /// unreduced.
    pub contact: Option<(f64, f64)>,
    /// |ν_A·ν_E − σ| at each contact endpoint (empty when detached).
    pub young_residuals: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub seed_index: usize,
}

// ---------------------------------------------------------------------------
// descent state

#[derive(Clone)]
struct State {
    /// `Some((s_a, s_b))` with `s_b > s_a` (unreduced span) when attached.
    contact: Option<(f64, f64)>,
    /// Free vertices ordered from the `s_b` junction back to the `s_a`
    /// junction (the whole polygon for a detached droplet).
    free: Vec<Point2>,
    /// Wall sample count between the contact points, frozen between
    /// remeshes so the energy stays smooth in (s_a, s_b).
    n_chain: usize,
}

impl State {
    fn span(&self) -> f64 {
        self.contact.map(|(a, b)| b - a).unwrap_or(0.0)
    }

    fn free_polyline_len(&self, c: &Container) -> f64 {
        match self.contact {
            Some((s_a, s_b)) => {
                let mut l = c.point_at(s_b).dist(self.free[0]);
                for w in self.free.windows(2) {
                    l += w[0].dist(w[1]);
                }
                l + self.free[self.free.len() - 1].dist(c.point_at(s_a))
            }
            None => {
                let n = self.free.len();
                (0..n)
                    .map(|i| self.free[i].dist(self.free[(i + 1) % n]))
                    .sum()
            }
        }
    }

    fn chain_positions(&self, _c: &Container) -> Vec<f64> {
        let Some((s_a, s_b)) = self.contact else {
            return Vec::new();
        };
        let span = s_b - s_a;
        (1..=self.n_chain)
            .map(|j| s_a + span * j as f64 / (self.n_chain + 1) as f64)
            .collect()
    }

    fn rescale_chain(&mut self, c: &Container) {
        let target = self.free_polyline_len(c) / (self.free.len() + 1) as f64;
        self.n_chain = if target > 0.0 {
            ((self.span() / target) as usize).min(4 * self.free.len())
        } else {
            0
        };
    }

    /// Polygon vertices: wall part from `s_a` to `s_b` (sampling the wall),
    /// then the free chain.
    fn polygon(&self, c: &Container) -> Vec<Point2> {
        match self.contact {
            Some((s_a, s_b)) => {
                let chain = self.chain_positions(c);
                let mut poly = Vec::with_capacity(2 + chain.len() + self.free.len());
                poly.push(c.point_at(s_a));
                for s in &chain {
                    poly.push(c.point_at(*s));
                }
                poly.push(c.point_at(s_b));
                poly.extend_from_slice(&self.free);
                poly
            }
            None => self.free.clone(),
        }
    }

    fn area(&self, c: &Container) -> f64 {
        geom::signed_area(&self.polygon(c))
    }

    fn energy(&self, c: &Container) -> f64 {
        let mut e = self.free_polyline_len(c);
        if let Some((s_a, s_b)) = self.contact {
            e += c.sigma_arc_integral(s_a, s_b);
        }
        if !c.potential().is_zero() {
            e += crate::energy::bulk_integral(&self.polygon(c), c.potential());
        }
        e
    }

    fn feasible(&self, c: &Container) -> bool {
        let snap = c.snap_tol();
        if let Some((s_a, s_b)) = self.contact {
            let span = s_b - s_a;
            if !(span > 4.0 * snap) || span >= 0.9 * c.length() {
                return false;
            }
        }
        for v in &self.free {
            if !v.is_finite() || c.inside_distance(*v) < -snap {
                return false;
            }
        }
        true
    }

    /// Restore the area to `m` by a uniform offset of the free vertices
    /// along their outward vertex normals (wetted part pinned).
    fn project_volume(&mut self, c: &Container, m: f64) -> Result<()> {
        let normals = self.vertex_normals(c);
        let base = self.free.clone();
        let mut offset = 0.0;
        for _ in 0..40 {
            let area = self.area(c);
            let err = area - m;
            if err.abs() <= 1e-12 * m {
                return Ok(());
            }
            let grads = self.area_gradients(c);
            let mut slope = 0.0;
            for (gv, nv) in grads.iter().zip(&normals) {
                slope += gv.dot(*nv);
            }
            if slope.abs() < 1e-300 {
                break;
            }
            offset -= err / slope;
            for ((v, b), nv) in self.free.iter_mut().zip(&base).zip(&normals) {
                *v = *b + *nv * offset;
            }
        }
        if (self.area(c) - m).abs() <= 1e-10 * m {
            Ok(())
        } else {
            Err(Error::NumericalFailure("volume projection did not converge"))
        }
    }

    // outward unit normal per free vertex (area gradient direction)
    fn vertex_normals(&self, c: &Container) -> Vec<Point2> {
        self.area_gradients(c)
            .into_iter()
            .map(|g| {
                let n = g.norm();
                if n > 0.0 {
                    g * (1.0 / n)
                } else {
                    Point2::new(0.0, 0.0)
                }
            })
            .collect()
    }

    // ∂(area)/∂v for each free vertex: half the perp of the neighbor chord
    fn area_gradients(&self, c: &Container) -> Vec<Point2> {
        let k = self.free.len();
        let mut out = Vec::with_capacity(k);
        for i in 0..k {
            let prev = self.free_neighbor_prev(i, c);
            let next = self.free_neighbor_next(i, c);
            let d = next - prev;
            out.push(Point2::new(0.5 * d.y, -0.5 * d.x));
        }
        out
    }

    // polygon neighbor before free vertex i (free[0]'s predecessor is the
    // s_b junction)
    fn free_neighbor_prev(&self, i: usize, c: &Container) -> Point2 {
        if i == 0 {
            match self.contact {
                Some((_, s_b)) => c.point_at(s_b),
                None => self.free[self.free.len() - 1],
            }
        } else {
            self.free[i - 1]
        }
    }

    fn free_neighbor_next(&self, i: usize, c: &Container) -> Point2 {
        if i + 1 == self.free.len() {
            match self.contact {
                Some((s_a, _)) => c.point_at(s_a),
                None => self.free[0],
            }
        } else {
            self.free[i + 1]
        }
    }

    fn to_droplet(&self, c: &Container) -> Result<PolyDroplet> {
        match self.contact {
            Some((s_a, s_b)) => {
                let chain = self.chain_positions(c);
                let n_wall = chain.len() + 2;
                let mut verts = Vec::with_capacity(n_wall + self.free.len());
                let mut flags = vec![true; n_wall];
                let mut params = Vec::with_capacity(n_wall + self.free.len());
                verts.push(c.point_at(s_a));
                params.push(c.wrap(s_a));
                for s in &chain {
                    verts.push(c.point_at(*s));
                    params.push(c.wrap(*s));
                }
                verts.push(c.point_at(s_b));
                params.push(c.wrap(s_b));
                verts.extend_from_slice(&self.free);
                flags.extend(core::iter::repeat(false).take(self.free.len()));
                params.extend(core::iter::repeat(f64::NAN).take(self.free.len()));
                PolyDroplet::new(verts, flags, params)
            }
            None => PolyDroplet::interior(self.free.clone()),
        }
    }

    /// Resample the free polyline (junction to junction) to equal chords,
    /// keeping the vertex count.
    fn remesh(&mut self, c: &Container) {
        self.resample_free(c, self.free.len());
    }

    /// Equal-chord resampling of the free chain to `k` vertices.
    fn resample_free(&mut self, c: &Container, k: usize) {
        let mut pts: Vec<Point2> = Vec::with_capacity(self.free.len() + 2);
        match self.contact {
            Some((s_a, s_b)) => {
                pts.push(c.point_at(s_b));
                pts.extend_from_slice(&self.free);
                pts.push(c.point_at(s_a));
                let mut cum = vec![0.0];
                for w in pts.windows(2) {
                    cum.push(cum[cum.len() - 1] + w[0].dist(w[1]));
                }
                let total = *cum.last().unwrap();
                let mut out = Vec::with_capacity(k);
                let mut seg = 0usize;
                for j in 1..=k {
                    let target = total * j as f64 / (k + 1) as f64;
                    while seg + 1 < cum.len() - 1 && cum[seg + 1] < target {
                        seg += 1;
                    }
                    let h = cum[seg + 1] - cum[seg];
                    let u = if h > 0.0 { (target - cum[seg]) / h } else { 0.0 };
                    out.push(pts[seg].lerp(pts[seg + 1], u));
                }
                self.free = out;
            }
            None => {
                let n = self.free.len();
                let mut cum = vec![0.0];
                for i in 0..n {
                    cum.push(cum[i] + self.free[i].dist(self.free[(i + 1) % n]));
                }
                let total = *cum.last().unwrap();
                let mut out = Vec::with_capacity(k);
                let mut seg = 0usize;
                for j in 0..k {
                    let target = total * j as f64 / k as f64;
                    while seg + 1 < n && cum[seg + 1] < target {
                        seg += 1;
                    }
                    let h = cum[seg + 1] - cum[seg];
                    let u = if h > 0.0 { (target - cum[seg]) / h } else { 0.0 };
                    out.push(self.free[seg].lerp(self.free[(seg + 1) % n], u));
                }
                self.free = out;
            }
        }
    }

    // smallest distance between non-adjacent free vertices
    fn free_self_distance(&self) -> f64 {
        let k = self.free.len();
        let mut best = f64::INFINITY;
        for i in 0..k {
            for j in (i + 2)..k {
                if self.contact.is_none() && i == 0 && j == k - 1 {
                    continue;
                }
                best = best.min(self.free[i].dist(self.free[j]));
            }
        }
        best
    }
}

// full gradient: per-free-vertex force, endpoint scalar forces, area
// gradients, preconditioner weights
struct Gradient {
    vertex: Vec<Point2>,
    vertex_area: Vec<Point2>,
    // (dE/ds_a, dE/ds_b, dA/ds_a, dA/ds_b)
    endpoint: Option<(f64, f64, f64, f64)>,
}

// d/dv of ∫_E g for the vertex v of a counterclockwise polygon with
// neighbors `prev` and `next`: boundary transport with hat-function shape
// velocity, exact for affine g (matching the bulk quadrature)
fn bulk_vertex_gradient(c: &Container, prev: Point2, v: Point2, next: Point2) -> Point2 {
    let rot = |e: Point2| Point2::new(e.y, -e.x);
    let gv = c.g_at(v);
    let w1 = (c.g_at(prev) + 2.0 * gv) / 6.0;
    let w2 = (2.0 * gv + c.g_at(next)) / 6.0;
    rot(v - prev) * w1 + rot(next - v) * w2
}

fn compute_gradient(state: &State, c: &Container) -> Gradient {
    let k = state.free.len();
    let has_g = !c.potential().is_zero();
    let mut vertex = Vec::with_capacity(k);
    let vertex_area = state.area_gradients(c);
    for i in 0..k {
        let v = state.free[i];
        let prev = state.free_neighbor_prev(i, c);
        let next = state.free_neighbor_next(i, c);
        let e1 = v - prev;
        let e2 = v - next;
        let (l1, l2) = (e1.norm(), e2.norm());
        let mut g = Point2::new(0.0, 0.0);
        if l1 > 0.0 {
            g = g + e1 * (1.0 / l1);
        }
        if l2 > 0.0 {
            g = g + e2 * (1.0 / l2);
        }
        if has_g {
            g = g + bulk_vertex_gradient(c, prev, v, next);
        }
        vertex.push(g);
    }
    let endpoint = state.contact.map(|(s_a, s_b)| {
        let v_a = c.point_at(s_a);
        let v_b = c.point_at(s_b);
        let t_a = c.tangent_at(s_a);
        let t_b = c.tangent_at(s_b);
        let f_first = state.free[0];
        let f_last = state.free[k - 1];
        // polygon neighbors of the endpoint vertices
        let chain = state.chain_positions(c);
        let after_a = chain
            .first()
            .map(|s| c.point_at(*s))
            .unwrap_or(v_b);
        let before_b = chain
            .last()
            .map(|s| c.point_at(*s))
            .unwrap_or(v_a);
        let grad_area = |prev: Point2, next: Point2| {
            let d = next - prev;
            Point2::new(0.5 * d.y, -0.5 * d.x)
        };
        let ga = grad_area(f_last, after_a);
        let gb = grad_area(before_b, f_first);
        let chord_a = (v_a - f_last).norm().max(1e-300);
        let chord_b = (v_b - f_first).norm().max(1e-300);
        let mut de_a = -c.sigma_at(s_a) + (v_a - f_last).dot(t_a) / chord_a;
        let mut de_b = c.sigma_at(s_b) + (v_b - f_first).dot(t_b) / chord_b;
        if has_g {
            de_a += bulk_vertex_gradient(c, f_last, v_a, after_a).dot(t_a);
            de_b += bulk_vertex_gradient(c, before_b, v_b, f_first).dot(t_b);
        }
        (de_a, de_b, ga.dot(t_a), gb.dot(t_b))
    });
    Gradient {
        vertex,
        vertex_area,
        endpoint,
    }
}

// Thomas solve of a symmetric tridiagonal system with Point2 right-hand
// sides; `lower[i]` couples unknowns i and i+1
fn solve_tridiag(diag: &[f64], off: &[f64], rhs: &[Point2]) -> Vec<Point2> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![Point2::new(0.0, 0.0); n];
    let mut denom = diag[0];
    c[0] = if n > 1 { off[0] / denom } else { 0.0 };
    d[0] = rhs[0] * (1.0 / denom);
    for i in 1..n {
        denom = diag[i] - off[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = off[i] / denom;
        }
        d[i] = (rhs[i] - d[i - 1] * off[i - 1]) * (1.0 / denom);
    }
    for i in (0..n - 1).rev() {
        d[i] = d[i] - d[i + 1] * c[i];
    }
    d
}

// cyclic variant (corner coupling `corner` between unknowns 0 and n−1) via
// the Sherman–Morrison correction
fn solve_cyclic(diag: &[f64], off: &[f64], corner: f64, rhs: &[Point2]) -> Vec<Point2> {
    let n = diag.len();
    let gamma = -diag[0];
    let mut diag_mod = diag.to_vec();
    diag_mod[0] -= gamma;
    diag_mod[n - 1] -= corner * corner / gamma;
    let y = solve_tridiag(&diag_mod, off, rhs);
    let mut u = vec![Point2::new(0.0, 0.0); n];
    u[0] = Point2::new(gamma, gamma);
    u[n - 1] = Point2::new(corner, corner);
    let z = solve_tridiag(&diag_mod, off, &u);
    // componentwise Sherman–Morrison with v = e_0 + (corner/gamma) e_{n−1}
    let correct = |yc: &dyn Fn(Point2) -> f64| {
        let vy = yc(y[0]) + corner / gamma * yc(y[n - 1]);
        let vz = yc(z[0]) + corner / gamma * yc(z[n - 1]);
        (vy, 1.0 + vz)
    };
    let (vy_x, vz_x) = correct(&|p: Point2| p.x);
    let (vy_y, vz_y) = correct(&|p: Point2| p.y);
    let (fx, fy) = (vy_x / vz_x, vy_y / vz_y);
    y.iter()
        .zip(&z)
        .map(|(yi, zi)| Point2::new(yi.x - zi.x * fx, yi.y - zi.y * fy))
        .collect()
}

// symmetric positive-definite banded Cholesky; band[d][r] holds A[r][r+d]
struct Banded {
    band: Vec<Vec<f64>>,
    n: usize,
    w: usize,
}

impl Banded {
    fn new(n: usize, w: usize) -> Self {
        Banded {
            band: vec![vec![0.0; n]; w + 1],
            n,
            w,
        }
    }

    fn add(&mut self, r: usize, c: usize, v: f64) {
        let (lo, hi) = if r <= c { (r, c) } else { (c, r) };
        self.band[hi - lo][lo] += v;
    }

    fn factor(&mut self) {
        for col in 0..self.n {
            let mut s = self.band[0][col];
            for e in 1..=self.w.min(col) {
                s -= self.band[e][col - e] * self.band[e][col - e];
            }
            let l0 = s.max(1e-300).sqrt();
            self.band[0][col] = l0;
            for d in 1..=self.w {
                if col + d >= self.n {
                    break;
                }
                let mut s = self.band[d][col];
                for e in (d + 1)..=self.w {
                    if e > col + d {
                        break;
                    }
                    let j = col + d - e;
                    s -= self.band[e][j] * self.band[e - d][j];
                }
                self.band[d][col] = s / l0;
            }
        }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        for r in 0..self.n {
            let mut s = x[r];
            for e in 1..=self.w.min(r) {
                s -= self.band[e][r - e] * x[r - e];
            }
            x[r] = s / self.band[0][r];
        }
        for r in (0..self.n).rev() {
            let mut s = x[r];
            for e in 1..=self.w {
                if r + e >= self.n {
                    break;
                }
                s -= self.band[e][r] * x[r + e];
            }
            x[r] = s / self.band[0][r];
        }
        x
    }
}

// H¹(ds)-preconditioned projected direction: D = −K⁻¹(G − μ∇a) with K the
// edge-weighted chain Laplacian and μ the volume-tangency multiplier in the
// K⁻¹ metric. For attached droplets the contact parameters join the chain as
// boundary unknowns moving along the wall tangents; detached droplets use
// the periodic chain with a translation-regularizing diagonal. Returns
// (vertex direction, endpoint direction (ds_a, ds_b), Armijo decrease,
// projected-gradient ∞-norm).
fn project_direction(
    state: &State,
    c: &Container,
    g: &Gradient,
) -> (Vec<Point2>, Option<(f64, f64)>, f64, f64) {
    let k = state.free.len();
    match (state.contact, g.endpoint) {
        (Some((s_a, s_b)), Some((de_a, de_b, da_a, da_b))) => {
            // unknown order: ξ_b, x_1 .. x_k (two components each), ξ_a
            let n = 2 * k + 2;
            let t_b = c.tangent_at(s_b);
            let t_a = c.tangent_at(s_a);
            let mut h = Vec::with_capacity(k + 1);
            h.push(c.point_at(s_b).dist(state.free[0]).max(1e-300));
            for w in state.free.windows(2) {
                h.push(w[0].dist(w[1]).max(1e-300));
            }
            h.push(state.free[k - 1].dist(c.point_at(s_a)).max(1e-300));

            let mut mat = Banded::new(n, 3);
            let xi = |i: usize, comp: usize| 1 + 2 * i + comp;
            // rigid-slide regularization: on a flat wall the pure chain form
            // is singular along the tangential translation mode
            let reg = 1.0 / state.free_polyline_len(c).max(1e-300);
            mat.add(0, 0, reg);
            mat.add(n - 1, n - 1, reg);
            mat.add(0, 0, 1.0 / h[0]);
            mat.add(0, xi(0, 0), -t_b.x / h[0]);
            mat.add(0, xi(0, 1), -t_b.y / h[0]);
            for i in 0..k {
                let d = 1.0 / h[i] + 1.0 / h[i + 1];
                mat.add(xi(i, 0), xi(i, 0), d);
                mat.add(xi(i, 1), xi(i, 1), d);
                if i + 1 < k {
                    mat.add(xi(i, 0), xi(i + 1, 0), -1.0 / h[i + 1]);
                    mat.add(xi(i, 1), xi(i + 1, 1), -1.0 / h[i + 1]);
                }
            }
            mat.add(xi(k - 1, 0), n - 1, -t_a.x / h[k]);
            mat.add(xi(k - 1, 1), n - 1, -t_a.y / h[k]);
            mat.add(n - 1, n - 1, 1.0 / h[k]);
            mat.factor();

            let pack = |end_b: f64, field: &[Point2], end_a: f64| -> Vec<f64> {
                let mut r = Vec::with_capacity(n);
                r.push(end_b);
                for p in field {
                    r.push(p.x);
                    r.push(p.y);
                }
                r.push(end_a);
                r
            };
            let rhs_grad = pack(de_b, &g.vertex, de_a);
            let rhs_area = pack(da_b, &g.vertex_area, da_a);
            let x_grad = mat.solve(&rhs_grad);
            let x_area = mat.solve(&rhs_area);

            let dotv = |a: &[f64], b: &[f64]| -> f64 {
                a.iter().zip(b).map(|(x, y)| x * y).sum()
            };
            let den = dotv(&rhs_area, &x_area);
            let mu = if den.abs() > 0.0 {
                dotv(&rhs_area, &x_grad) / den
            } else {
                0.0
            };

            let mut norm = 0.0f64;
            let mut decrease = 0.0;
            let mut dir = Vec::with_capacity(k);
            for j in 0..n {
                let p = rhs_grad[j] - mu * rhs_area[j];
                let d = x_grad[j] - mu * x_area[j];
                norm = norm.max(p.abs());
                decrease += p * d;
            }
            for i in 0..k {
                dir.push(Point2::new(
                    -(x_grad[xi(i, 0)] - mu * x_area[xi(i, 0)]),
                    -(x_grad[xi(i, 1)] - mu * x_area[xi(i, 1)]),
                ));
            }
            let dir_end = Some((
                -(x_grad[n - 1] - mu * x_area[n - 1]),
                -(x_grad[0] - mu * x_area[0]),
            ));
            (dir, dir_end, decrease.max(0.0), norm)
        }
        _ => {
            let inv_edge: Vec<f64> = (0..k)
                .map(|i| 1.0 / state.free[i].dist(state.free[(i + 1) % k]).max(1e-300))
                .collect();
            let reg = 1.0 / state.free_polyline_len(c).max(1e-300);
            let diag: Vec<f64> = (0..k)
                .map(|i| inv_edge[(i + k - 1) % k] + inv_edge[i] + reg)
                .collect();
            let off: Vec<f64> = (0..k - 1).map(|i| -inv_edge[i]).collect();
            let x_grad = solve_cyclic(&diag, &off, -inv_edge[k - 1], &g.vertex);
            let x_area = solve_cyclic(&diag, &off, -inv_edge[k - 1], &g.vertex_area);
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..k {
                num += g.vertex_area[i].dot(x_grad[i]);
                den += g.vertex_area[i].dot(x_area[i]);
            }
            let mu = if den.abs() > 0.0 { num / den } else { 0.0 };
            let mut dir = Vec::with_capacity(k);
            let mut decrease = 0.0;
            let mut norm = 0.0f64;
            for i in 0..k {
                let p = g.vertex[i] - g.vertex_area[i] * mu;
                let d = x_grad[i] - x_area[i] * mu;
                norm = norm.max(p.x.abs()).max(p.y.abs());
                decrease += p.dot(d);
                dir.push(d * -1.0);
            }
            (dir, None, decrease.max(0.0), norm)
        }
    }
}

// bracketed 1D minimization of the energy along one contact mode
// (ds_a, ds_b) = δ·(wa, wb), volume-projected; returns the accepted δ.
// `rigid` transports the free chain with the contact frame, which turns the
// slide mode into a soft rigid motion instead of a junction-stretching one —
// the field step alone would need O(1/h) iterations to carry the droplet
// along the wall
fn relax_contact_mode(
    state: &mut State,
    c: &Container,
    m: f64,
    energy: &mut f64,
    (wa, wb): (f64, f64),
    rigid: bool,
    window: &mut f64,
    cap: f64,
) -> f64 {
    let Some((s_a, s_b)) = state.contact else {
        return 0.0;
    };
    let eval = |delta: f64| -> Option<(State, f64)> {
        let mut trial = state.clone();
        trial.contact = Some((s_a + delta * wa, s_b + delta * wb));
        if rigid {
            let mid0 = 0.5 * (s_a + s_b);
            let mid1 = mid0 + 0.5 * delta * (wa + wb);
            let p0 = c.point_at(mid0);
            let p1 = c.point_at(mid1);
            let t0 = c.tangent_at(mid0);
            let t1 = c.tangent_at(mid1);
            let (cosr, sinr) = (t0.dot(t1), t0.cross(t1));
            for v in trial.free.iter_mut() {
                let d = *v - p0;
                *v = p1 + Point2::new(cosr * d.x - sinr * d.y, sinr * d.x + cosr * d.y);
            }
        }
        if !trial.feasible(c) || trial.project_volume(c, m).is_err() || !trial.feasible(c) {
            return None;
        }
        let e = trial.energy(c);
        Some((trial, e))
    };
    let mut lo = -*window;
    let mut hi = *window;
    let mut best = (0.0, *energy);
    for _ in 0..3 {
        let step = (hi - lo) / 4.0;
        for j in 0..=4 {
            let d = lo + step * j as f64;
            if d == 0.0 {
                continue;
            }
            if let Some((_, e)) = eval(d) {
                if e < best.1 {
                    best = (d, e);
                }
            }
        }
        lo = best.0 - step;
        hi = best.0 + step;
    }
    if best.0 != 0.0 {
        if let Some((trial, e)) = eval(best.0) {
            debug_assert!(e <= *energy);
            *state = trial;
            *energy = e;
            *window = (best.0.abs() * 4.0).max(*window * 0.5).min(cap);
            return best.0;
        }
    }
    *window = (*window * 0.5).max(1e-14 * cap);
    0.0
}

fn step_trial(
    state: &State,
    c: &Container,
    m: f64,
    dir: &[Point2],
    dir_end: Option<(f64, f64)>,
    t: f64,
) -> Option<(State, f64)> {
    let mut trial = state.clone();
    for (v, d) in trial.free.iter_mut().zip(dir) {
        *v = *v + *d * t;
    }
    if let (Some((s_a, s_b)), Some((da, db))) = (trial.contact, dir_end) {
        trial.contact = Some((s_a + t * da, s_b + t * db));
    }
    if trial.feasible(c) && trial.project_volume(c, m).is_ok() && trial.feasible(c) {
        let e = trial.energy(c);
        Some((trial, e))
    } else {
        None
    }
}

struct DescentOutcome {
    state: State,
    converged: bool,
    iterations: usize,
}

fn descend(mut state: State, c: &Container, cfg: &MinimizeConfig) -> Result<DescentOutcome> {
    state.project_volume(c, cfg.m)?;
    let mut energy = state.energy(c);
    let sigma0 = c.min_sigma().0;
    let psi_scale = CapGeometry::new(2, sigma0)?.scalars().psi;
    let grad_tol = cfg.grad_tol.unwrap_or(1e-8 * psi_scale);

    // the H¹ direction is length-scaled, so the step is dimensionless
    let step0 = cfg.init_step.unwrap_or(1.0);
    let mut step = step0;
    let step_floor = 1e-16;

    let mut converged = false;
    let mut iterations = 0usize;
    let mut since_remesh = 0usize;
    let mut flat_iters = 0usize;
    let mut span_window = 0.2 * state.span();
    let mut slide_window = 0.5 * state.span();

    while iterations < cfg.max_iters {
        iterations += 1;
        let energy_at_start = energy;
        // the H¹ metric moves concentrated contact forces only O(edge) per
        // step, so the two contact modes (interval breathing and tangential
        // slide) get their own bracketed line searches
        if state.contact.is_some() {
            let span_cap = 0.25 * state.span();
            relax_contact_mode(
                &mut state,
                c,
                cfg.m,
                &mut energy,
                (-0.5, 0.5),
                false,
                &mut span_window,
                span_cap,
            );
            // slide reach stays at the droplet scale: it accelerates the
            // soft transport mode, while basin selection belongs to seeding
            let slide_cap = (2.0 * state.span()).min(c.length() / 8.0);
            relax_contact_mode(
                &mut state,
                c,
                cfg.m,
                &mut energy,
                (1.0, 1.0),
                true,
                &mut slide_window,
                slide_cap,
            );
        }
        let grad = compute_gradient(&state, c);
        let (dir, dir_end, decrease, norm) = project_direction(&state, c, &grad);
        if norm < grad_tol {
            converged = true;
            break;
        }
        // the model decrease bounds the recoverable energy; once it sinks
        // below the energy's own f64 resolution there is nothing left to take
        let resolution = 64.0 * f64::EPSILON * (1.0 + energy.abs());
        if decrease < resolution {
            converged = true;
            break;
        }

        let mut accepted = None;
        let mut t = step;
        for _ in 0..40 {
            if let Some((trial, e_new)) = step_trial(&state, c, cfg.m, &dir, dir_end, t) {
                if e_new <= energy - 1e-4 * t * decrease {
                    debug_assert!(e_new <= energy + 1e-9 * (1.0 + energy.abs()));
                    accepted = Some((trial, e_new));
                    break;
                }
            }
            t *= 0.5;
            if t < step_floor {
                break;
            }
        }
        // a full step accepted with the model decrease intact means the
        // minimum along this ray lies beyond t=1 — the metric overestimates
        // the stiffness of soft modes (rigid transport, long-wave drift).
        // Forward-track within the iteration; the persistent step stays
        // capped at step0, so no limit cycle can form across iterations.
        if accepted.is_some() && t == step0 {
            let mut t2 = 2.0 * step0;
            while t2 <= 1024.0 * step0 {
                let (_, e_best) = *accepted.as_ref().unwrap();
                match step_trial(&state, c, cfg.m, &dir, dir_end, t2) {
                    Some((tr2, e2)) if e2 <= energy - 1e-4 * t2 * decrease && e2 < e_best => {
                        accepted = Some((tr2, e2));
                        t2 *= 2.0;
                    }
                    _ => break,
                }
            }
        }
        match accepted {
            Some((trial, e_new)) => {
                state = trial;
                energy = e_new;
            }
            None => {
                // the floating-point resolution of the energy can be hit
                // before grad_tol; a stall with a decrease prediction below
                // that resolution is stationarity as far as f64 can certify
                let resolution = 64.0 * f64::EPSILON * (1.0 + energy.abs());
                converged = norm < 10.0 * grad_tol || 1e-4 * step * decrease < resolution;
                break;
            }
        }
        // K approximates the length Hessian in the H¹ sense, so unit steps
        // are the natural ceiling for the persistent step
        step = (t * 2.0).min(step0);

        // residual stuck in modes stiffer than the energy's f64 resolution
        // can keep the norm above tolerance while nothing moves; certify
        // stationarity once whole iterations stop producing progress
        if energy_at_start - energy <= 16.0 * f64::EPSILON * (1.0 + energy.abs()) {
            flat_iters += 1;
            if flat_iters >= 3 {
                converged = true;
                break;
            }
        } else {
            flat_iters = 0;
        }

        since_remesh += 1;
        if since_remesh >= cfg.remesh_interval {
            since_remesh = 0;
            flat_iters = 0;
            state.remesh(c);
            state.rescale_chain(c);
            state.project_volume(c, cfg.m)?;
            energy = state.energy(c);
            let edge_now = state.free_polyline_len(c) / (state.free.len() + 1) as f64;
            if state.free_self_distance() < edge_now / 10.0 {
                return Err(Error::PinchOff {
                    iteration: iterations,
                });
            }
        }
    }

    Ok(DescentOutcome {
        state,
        converged,
        iterations,
    })
}

// ---------------------------------------------------------------------------
// seeding

fn wall_seed_state(
    c: &Container,
    s: f64,
    tau_guess: Option<f64>,
    m: f64,
    k: usize,
) -> Result<State> {
    let tau = tau_guess.unwrap_or_else(|| c.sigma_at(s));
    let geometry = CapGeometry::new(2, tau)?;
    let cap = ideal_droplet_boundary(
        &IdealDroplet {
            geometry,
            r: m.sqrt(),
            z: 0.0,
        },
        k.max(4) - 1,
    )?;
    let chart = c.chart_at(s)?;
    let verts = cap.vertices();
    // cap polygon: vertex 0 = right contact, then the free arc, vertex n−1 =
    // left contact
    let n = verts.len();
    let s_b = s + verts[0].x;
    let s_a = s + verts[n - 1].x;
    let mut free = Vec::with_capacity(n - 2);
    for v in &verts[1..n - 1] {
        free.push(chart.from_halfplane(*v)?);
    }
    let mut state = State {
        contact: Some((s_a, s_b)),
        free,
        n_chain: 0,
    };
    state.rescale_chain(c);
    state.project_volume(c, m)?;
    Ok(state)
}

fn interior_seed_state(c: &Container, center: Point2, m: f64, k: usize) -> Result<State> {
    let r = (m / core::f64::consts::PI).sqrt();
    let depth = c.inside_distance(center);
    if depth < r {
        return Err(Error::OutsideContainer { dist: r - depth });
    }
    let free: Vec<Point2> = (0..k)
        .map(|i| {
            let th = 2.0 * core::f64::consts::PI * i as f64 / k as f64;
            center + Point2::new(r * th.cos(), r * th.sin())
        })
        .collect();
    let mut state = State {
        contact: None,
        free,
        n_chain: 0,
    };
    state.project_volume(c, m)?;
    Ok(state)
}

/// Cap-shaped droplet attached to the wall nearest `x`: the chart image of
/// the ideal droplet of area `m` and contact angle from `tau_guess` (σ at the
/// attachment point when `None`), with `k` vertices and the area renormalized
/// to `m` exactly.
pub fn seed_droplet(
    c: &Container,
    x: Point2,
    tau_guess: Option<f64>,
    m: f64,
    k: usize,
) -> Result<PolyDroplet> {
    if !(m > 0.0) || !m.is_finite() || m >= c.area() {
        return Err(Error::BadMass(m));
    }
    if k < 32 {
        return Err(Error::TooFewVertices(k));
    }
    let (s, _) = c.project(x);
    wall_seed_state(c, s, tau_guess, m, k)?.to_droplet(c)
}

/// Seed set used when the config lists none: wall seeds at the 8 lowest-σ
/// stations, plus a detached disk at the centroid when it fits.
pub fn default_seeds(c: &Container, m: f64) -> Vec<SeedSpec> {
    let mut seeds: Vec<SeedSpec> = c
        .ranked_sigma_stations(8)
        .into_iter()
        .map(|i| SeedSpec::Wall {
            s: c.stations()[i].s,
            tau_guess: None,
        })
        .collect();
    let centroid = {
        let pts: Vec<Point2> = c.stations().iter().map(|st| st.point).collect();
        geom::centroid(&pts)
    };
    let r = (m / core::f64::consts::PI).sqrt();
    if c.inside_distance(centroid) > 2.0 * r {
        seeds.push(SeedSpec::Interior { center: centroid });
    }
    seeds
}

/// Run the descent from one seed.
pub fn minimize_seed(
    c: &Container,
    cfg: &MinimizeConfig,
    seed: &SeedSpec,
    seed_index: usize,
) -> Result<MinimizeResult> {
    cfg.validate(c)?;
    let state = match seed {
        SeedSpec::Wall { s, tau_guess } => {
            wall_seed_state(c, *s, *tau_guess, cfg.m, cfg.vertex_count)?
        }
        SeedSpec::Interior { center } => {
            interior_seed_state(c, *center, cfg.m, cfg.vertex_count)?
        }
    };
    let out = descend(state, c, cfg)?;
    finish(out, c, seed_index)
}

fn finish(out: DescentOutcome, c: &Container, seed_index: usize) -> Result<MinimizeResult> {
    let droplet = out.state.to_droplet(c)?;
    let energy = gauss_energy(&droplet, c)?;
    let contact = out.state.contact;
    let p_m = contact.map(|(a, b)| c.point_at(0.5 * (a + b)));
    let young_residuals = young_residual_droplet(&droplet, c);
    Ok(MinimizeResult {
        droplet,
        energy,
        p_m,
        contact,
        young_residuals,
        converged: out.converged,
        iterations: out.iterations,
        seed_index,
    })
}

/// Descent seeded from a previously minimized droplet rescaled to the new
/// mass in `cfg`: a similarity about the contact midpoint (the centroid when
/// detached) shrinks the free chain and the contact interval together, then
/// the chain is resampled to `cfg.vertex_count` and the volume re-projected.
pub fn minimize_rescaled(
    c: &Container,
    cfg: &MinimizeConfig,
    prev: &MinimizeResult,
    seed_index: usize,
) -> Result<MinimizeResult> {
    cfg.validate(c)?;
    let m_prev = prev.droplet.area();
    if !(m_prev > 0.0) || !m_prev.is_finite() {
        return Err(Error::BadMass(m_prev));
    }
    let ratio = (cfg.m / m_prev).sqrt();
    let verts = prev.droplet.vertices();
    let n = prev.droplet.len();
    let free_run: Vec<Point2> = match prev.droplet.contact_run() {
        Some((start, len)) => (0..n - len).map(|j| verts[(start + len + j) % n]).collect(),
        None => verts.to_vec(),
    };
    let mut state = match prev.contact {
        Some((s_a, s_b)) => {
            let mid = 0.5 * (s_a + s_b);
            let pivot = c.point_at(mid);
            let half = 0.5 * (s_b - s_a) * ratio;
            State {
                contact: Some((mid - half, mid + half)),
                free: free_run
                    .iter()
                    .map(|v| pivot + (*v - pivot) * ratio)
                    .collect(),
                n_chain: 0,
            }
        }
        None => {
            let cen = geom::centroid(&free_run);
            State {
                contact: None,
                free: free_run.iter().map(|v| cen + (*v - cen) * ratio).collect(),
                n_chain: 0,
            }
        }
    };
    let target = match state.contact {
        Some(_) => cfg.vertex_count.max(4) - 2,
        None => cfg.vertex_count,
    };
    state.resample_free(c, target);
    state.rescale_chain(c);
    state.project_volume(c, cfg.m)?;
    let out = descend(state, c, cfg)?;
    finish(out, c, seed_index)
}

/// Multi-start minimization: runs every seed and returns the best converged
/// energy (ties within 1e−9 go to the smallest seed index).
pub fn minimize(c: &Container, cfg: &MinimizeConfig) -> Result<MinimizeResult> {
    cfg.validate(c)?;
    let seeds = if cfg.seeds.is_empty() {
        default_seeds(c, cfg.m)
    } else {
        cfg.seeds.clone()
    };
    let mut best: Option<MinimizeResult> = None;
    let mut last_err: Option<Error> = None;
    for (idx, seed) in seeds.iter().enumerate() {
        match minimize_seed(c, cfg, seed, idx) {
            Ok(r) => {
                let better = match &best {
                    None => true,
                    Some(b) => r.energy.total < b.energy.total - 1e-9,
                };
                if better {
                    best = Some(r);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some(r) => Ok(r),
        None => Err(last_err.unwrap_or(Error::NumericalFailure("no seed produced a droplet"))),
    }
}

// |ν_A·ν_E − σ| at the wetted-arc endpoints
fn young_residual_droplet(p: &PolyDroplet, c: &Container) -> Vec<f64> {
    let Some((start, len)) = p.contact_run() else {
        return Vec::new();
    };
    let n = p.len();
    let verts = p.vertices();
    let mut out = Vec::with_capacity(2);
    // first contact vertex: its predecessor is free (the arc arrives here)
    let first = start;
    let last = (start + len - 1) % n;
    for &(idx, free_neighbor) in &[(first, (first + n - 1) % n), (last, (last + 1) % n)] {
        let s = match p.param(idx) {
            Some(s) => s,
            None => continue,
        };
        let e = verts[free_neighbor] - verts[idx];
        let l = e.norm();
        if l == 0.0 {
            continue;
        }
        let e = e * (1.0 / l);
        // outward droplet normal on the adjacent free edge
        let nu_e = match idx == first {
            // edge (free_neighbor -> first): outward = cw perp of (first - neighbor)
            true => Point2::new(-e.y, e.x),
            false => Point2::new(e.y, -e.x),
        };
        let nu_a = c.normal_at(s);
        out.push((nu_a.dot(nu_e) - c.sigma_at(s)).abs());
    }
    out
}

/// Young's-law residuals of a minimization result.
pub fn young_residual(r: &MinimizeResult, c: &Container) -> Vec<f64> {
    young_residual_droplet(&r.droplet, c)
}

// exact |E Δ E′| for a single-vertex move: the two triangles over the shared
// neighbor base
fn single_vertex_sym_diff(prev: Point2, old: Point2, new: Point2, next: Point2) -> f64 {
    let t_old = [prev, old, next];
    let t_new = [prev, new, next];
    let orient = |t: &[Point2; 3]| geom::signed_area(t);
    let (a_old, a_new) = (orient(&t_old), orient(&t_new));
    let ccw = |t: &[Point2; 3], a: f64| -> Vec<Point2> {
        if a >= 0.0 {
            t.to_vec()
        } else {
            vec![t[2], t[1], t[0]]
        }
    };
    if a_old.abs() < 1e-300 {
        return a_new.abs();
    }
    if a_new.abs() < 1e-300 {
        return a_old.abs();
    }
    if a_old.signum() != a_new.signum() {
        // the moved vertex crossed the base: the lobes are disjoint
        return a_old.abs() + a_new.abs();
    }
    let p_old = ccw(&t_old, a_old);
    let p_new = ccw(&t_new, a_new);
    let inter = clip::intersection_area(&p_old, &p_new).unwrap_or(0.0);
    (a_old.abs() + a_new.abs() - 2.0 * inter).max(0.0)
}

/// Empirical almost-minimality constant: max over random single-vertex
/// competitors E′ of (E(F) − E(F′)) / |F Δ F′|, clipped below at zero.
/// Competitors do not preserve volume and are confined to balls of radius
/// `rho0` around a free vertex.
pub fn almost_minimality_probe(
    r: &MinimizeResult,
    c: &Container,
    trials: usize,
    rho0: f64,
    rng_seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::NoSamples);
    }
    let base = &r.droplet;
    let e_base = gauss_energy(base, c)?.total;
    let n = base.len();
    let verts = base.vertices();
    let flags = base.contact_flags();
    let free_idx: Vec<usize> = (0..n).filter(|&i| !flags[i]).collect();
    if free_idx.is_empty() {
        return Err(Error::NoSamples);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut lambda = 0.0f64;
    let snap = c.snap_tol();
    for _ in 0..trials {
        let i = free_idx[rng.gen_range(0..free_idx.len())];
        let prev = verts[(i + n - 1) % n];
        let next = verts[(i + 1) % n];
        let local = prev.dist(next);
        let radius = rho0.min(local).max(1e-12);
        let th = rng.gen_range(0.0..2.0 * core::f64::consts::PI);
        let rr = radius * rng.gen_range(0.1f64..1.0);
        let moved = verts[i] + Point2::new(rr * th.cos(), rr * th.sin());
        if c.inside_distance(moved) < -snap {
            continue;
        }
        let mut new_verts = verts.to_vec();
        new_verts[i] = moved;
        if !geom::is_simple(&new_verts) || geom::signed_area(&new_verts) <= 0.0 {
            continue;
        }
        let competitor = PolyDroplet::new(
            new_verts,
            flags.to_vec(),
            (0..n)
                .map(|j| base.param(j).unwrap_or(f64::NAN))
                .collect(),
        );
        let Ok(competitor) = competitor else { continue };
        let Ok(e_new) = gauss_energy(&competitor, c) else {
            continue;
        };
        let diff = single_vertex_sym_diff(prev, verts[i], moved, next);
        if diff < 1e-18 {
            continue;
        }
        lambda = lambda.max((e_base - e_new.total) / diff);
    }
    Ok(lambda.max(0.0))
}
