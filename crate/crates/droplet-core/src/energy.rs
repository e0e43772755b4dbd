//! Capillary energy of polygonal droplets: the container energy (free
//! surface + adhesion + bulk potential) and the half-space stability
//! functionals (deficit and asymmetry against the ideal cap).

use alloc::vec::Vec;

use crate::clip;
use crate::container::{split_perimeter, Container, Potential};
use crate::geom::{Point2, PolyDroplet};
use crate::sessile::{ideal_droplet_boundary, CapGeometry, IdealDroplet};
use crate::{Error, Result};

#[cfg(not(feature = "std"))]
use num_traits::Float;

#[derive(Clone, Copy, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnergyBreakdown {
    pub free_surface: f64,
    /// Adhesion term ∫σ ds over the wetted wall arc; carries the sign of σ.
    pub wetted: f64,
    pub bulk: f64,
    pub total: f64,
    /// Curvature-based multiplier estimate (mean over free vertices of
    /// turning-angle/length + g). Diagnostic; meaningful post-minimization.
    pub lagrange_multiplier: f64,
}

/// Deficit/asymmetry of a half-space droplet against the ideal cap.
#[derive(Clone, Copy, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StabilityReport {
    pub deficit: f64,
    pub asymmetry: f64,
    /// Horizontal shift of the comparison cap minimizing the mismatch.
    pub optimal_shift: f64,
}

/// ∫_E g over the polygon by fan triangulation with the 3-point edge-midpoint
/// rule per triangle (exact for quadratic g, hence for affine g).
pub fn bulk_integral(vertices: &[Point2], g: &Potential) -> f64 {
    if g.is_zero() || vertices.len() < 3 {
        return 0.0;
    }
    let v0 = vertices[0];
    let mut acc = 0.0;
    for i in 1..vertices.len() - 1 {
        let (a, b) = (vertices[i], vertices[i + 1]);
        let tri_area = 0.5 * (a - v0).cross(b - v0);
        let m1 = (v0 + a) * 0.5;
        let m2 = (a + b) * 0.5;
        let m3 = (b + v0) * 0.5;
        acc += tri_area * (g.eval(m1) + g.eval(m2) + g.eval(m3)) / 3.0;
    }
    acc
}

/// Gauss free energy of a droplet sitting in a container.
pub fn gauss_energy(p: &PolyDroplet, c: &Container) -> Result<EnergyBreakdown> {
    let snap = c.snap_tol();
    for v in p.vertices() {
        let d = c.inside_distance(*v);
        if d < -snap {
            return Err(Error::OutsideContainer { dist: -d });
        }
    }
    let (free_surface, _) = split_perimeter(p, c)?;
    let mut wetted = 0.0;
    for (i, j) in p.wetted_edge_indices() {
        let si = p.param(i).unwrap();
        let sj = p.param(j).unwrap();
        let span = c.arc_delta(sj, si);
        wetted += if span >= 0.0 {
            c.sigma_arc_integral(si, si + span)
        } else {
            c.sigma_arc_integral(si + span, si)
        };
    }
    let bulk = bulk_integral(p.vertices(), c.potential());
    let lagrange_multiplier = multiplier_estimate(p, c);
    Ok(EnergyBreakdown {
        free_surface,
        wetted,
        bulk,
        total: free_surface + wetted + bulk,
        lagrange_multiplier,
    })
}

// Mean over free vertices of (turning angle / dual edge length) + g.
fn multiplier_estimate(p: &PolyDroplet, c: &Container) -> f64 {
    let n = p.len();
    let verts = p.vertices();
    let flags = p.contact_flags();
    let mut acc = 0.0;
    let mut count = 0usize;
    for i in 0..n {
        if flags[i] {
            continue;
        }
        let prev = verts[(i + n - 1) % n];
        let cur = verts[i];
        let next = verts[(i + 1) % n];
        let e1 = cur - prev;
        let e2 = next - cur;
        let (l1, l2) = (e1.norm(), e2.norm());
        if l1 == 0.0 || l2 == 0.0 {
            continue;
        }
        let turning = e1.cross(e2).atan2(e1.dot(e2));
        acc += turning / (0.5 * (l1 + l2)) + c.g_at(cur);
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        acc / count as f64
    }
}

// Half-space droplet validation: all vertices in the closed upper half-plane
// (to tolerance), wetted edges on the axis.
fn validate_halfspace(p: &PolyDroplet) -> Result<f64> {
    let tol = 1e-9 * p.diameter().max(1e-300);
    for v in p.vertices() {
        if v.y < -tol {
            return Err(Error::BadBoundaryData("vertex below the half-plane axis"));
        }
    }
    for (i, j) in p.wetted_edge_indices() {
        if p.vertices()[i].y.abs() > tol || p.vertices()[j].y.abs() > tol {
            return Err(Error::ContactOffBoundary {
                dist: p.vertices()[i].y.abs().max(p.vertices()[j].y.abs()),
            });
        }
    }
    Ok(tol)
}

/// Half-space capillary energy: free edge length + τ × wetted axis length.
pub fn halfspace_energy(p: &PolyDroplet, tau: f64) -> Result<f64> {
    CapGeometry::new(2, tau)?;
    validate_halfspace(p)?;
    let verts = p.vertices();
    let n = p.len();
    let wetted_pairs = p.wetted_edge_indices();
    let mut wetted = 0.0;
    for (i, j) in &wetted_pairs {
        wetted += (verts[*j].x - verts[*i].x).abs();
    }
    let mut free = 0.0;
    for i in 0..n {
        if !wetted_pairs.iter().any(|&(a, _)| a == i) {
            free += verts[i].dist(verts[(i + 1) % n]);
        }
    }
    Ok(free + tau * wetted)
}

/// Scale-invariant energy deficit against the ideal cap:
/// energy / (ψ(τ) √area) − 1.
pub fn deficit(p: &PolyDroplet, tau: f64) -> Result<f64> {
    let geometry = CapGeometry::new(2, tau)?;
    let energy = halfspace_energy(p, tau)?;
    let psi = geometry.scalars().psi;
    Ok(energy / (psi * p.area().sqrt()) - 1.0)
}

const ASYMMETRY_SEGMENTS: usize = 4096;

/// Deficit plus asymmetry: the minimal relative symmetric-difference area
/// between the droplet and a horizontal translate of the equal-area cap.
pub fn asymmetry(p: &PolyDroplet, tau: f64) -> Result<StabilityReport> {
    asymmetry_with_segments(p, tau, ASYMMETRY_SEGMENTS)
}

pub fn asymmetry_with_segments(
    p: &PolyDroplet,
    tau: f64,
    segments: usize,
) -> Result<StabilityReport> {
    let geometry = CapGeometry::new(2, tau)?;
    let d = deficit(p, tau)?;
    let area = p.area();
    let r = area.sqrt();
    let cap = ideal_droplet_boundary(
        &IdealDroplet {
            geometry,
            r,
            z: 0.0,
        },
        segments,
    )?;
    let cap_pts = cap.vertices();
    let f_pts = p.vertices();

    let mut shifted: Vec<Point2> = cap_pts.to_vec();
    let mut eval = |z: f64| -> Result<f64> {
        for (s, c) in shifted.iter_mut().zip(cap_pts) {
            *s = Point2::new(c.x + z, c.y);
        }
        Ok(clip::sym_diff_area(f_pts, &shifted)? / area)
    };

    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in f_pts {
        xmin = xmin.min(v.x);
        xmax = xmax.max(v.x);
    }
    let (lo, hi) = (xmin - 2.0 * r, xmax + 2.0 * r);
    let tol = 1e-6 * r.max(1.0);

    let (mut z_best, mut d_best) = golden_min(&mut eval, lo, hi, tol)?;

    // guard against non-unimodal landscapes with a coarse scan
    let mut grid_best = (lo, f64::INFINITY);
    for k in 0..=40 {
        let z = lo + (hi - lo) * k as f64 / 40.0;
        let v = eval(z)?;
        if v < grid_best.1 {
            grid_best = (z, v);
        }
    }
    if grid_best.1 < d_best - 1e-3 {
        let step = (hi - lo) / 40.0;
        let (z2, d2) = golden_min(&mut eval, grid_best.0 - step, grid_best.0 + step, tol)?;
        if d2 < d_best {
            z_best = z2;
            d_best = d2;
        }
    }

    Ok(StabilityReport {
        deficit: d,
        asymmetry: d_best,
        optimal_shift: z_best,
    })
}

/// Golden-section search for the minimum of a unimodal function on [a, b].
pub fn golden_min<E>(
    f: &mut dyn FnMut(f64) -> core::result::Result<f64, E>,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> core::result::Result<(f64, f64), E> {
    const INV_PHI: f64 = 0.618033988749894848;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a) > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x)?;
    if fx <= fc && fx <= fd {
        Ok((x, fx))
    } else if fc <= fd {
        Ok((c, fc))
    } else {
        Ok((d, fd))
    }
}
