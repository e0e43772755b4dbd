//! Small-mass experiments on top of the minimizer: mass sweeps with
//! warm-started descents, least-squares fits of the energy expansion and of
//! decay rates, and stability probes that bound the energy excess from below
//! by the squared distance to the ideal cap.
//!
//! A sweep runs the minimizer over a descending list of masses, seeding each
//! run from the previous droplet rescaled, and records per mass the energy,
//! the contact point, the droplet diameter, and how far the blow-up at the
//! contact point is from the ideal cap of the least-adhesion coefficient.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clip;
use crate::container::{blow_up, Container};
use crate::energy::{golden_min, halfspace_energy};
use crate::geom::{self, Point2, PolyDroplet};
use crate::minimize::{minimize, minimize_rescaled, MinimizeConfig, MinimizeResult};
use crate::sessile::{anisotropic_energy, ideal_droplet_boundary, CapGeometry, IdealDroplet};
use crate::{Error, Result};

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Resolution of the reference cap arc the blow-ups are compared against.
const BLOWUP_SEGMENTS: usize = 4096;

/// One mass point of a sweep.
#[derive(Clone, Copy, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepRecord {
    pub m: f64,
    /// Minimal energy found.
    pub gamma: f64,
    /// `gamma / sqrt(m)`.
    pub normalized_gamma: f64,
    /// Contact midpoint on the wall (nearest wall point when detached).
    pub p_m: Point2,
    /// `sigma(p_m)` minus the global minimum of sigma.
    pub sigma_gap: f64,
    pub diameter: f64,
    /// Hausdorff distance between the free arc of the droplet blown up at
    /// `p_m` by `1/sqrt(m)` and the ideal unit-mass cap arc, minimized over
    /// the reflection across the contact normal.
    pub hd_blowup: f64,
    /// Largest contact-angle residual of the run.
    pub young_max: f64,
    pub converged: bool,
}

/// Least-squares fit summary.
#[derive(Clone, Copy, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitReport {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
    pub pass: bool,
}

/// Numeric column of a [`SweepRecord`], for rate fits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SweepField {
    NormalizedGamma,
    Diameter,
    HdBlowup,
    SigmaGap,
    YoungMax,
}

impl SweepField {
    pub fn value(self, r: &SweepRecord) -> f64 {
        match self {
            SweepField::NormalizedGamma => r.normalized_gamma,
            SweepField::Diameter => r.diameter,
            SweepField::HdBlowup => r.hd_blowup,
            SweepField::SigmaGap => r.sigma_gap,
            SweepField::YoungMax => r.young_max,
        }
    }
}

/// Minimize over a strictly descending list of masses, warm-starting each
/// run from the previous minimizer rescaled. Non-converged runs are recorded
/// with `converged = false`, not dropped.
pub fn sweep(c: &Container, masses: &[f64], cfg: &MinimizeConfig) -> Result<Vec<SweepRecord>> {
    if masses.is_empty() {
        return Err(Error::TooFewRecords { need: 1, got: 0 });
    }
    let limit = 0.25 * c.area();
    for &m in masses {
        if !(m > 0.0) || !(m < limit) || !m.is_finite() {
            return Err(Error::BadMass(m));
        }
    }
    for w in masses.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::BadMass(w[1]));
        }
    }
    let (sigma0, _) = c.min_sigma();
    let geometry = CapGeometry::new(2, sigma0)?;
    let reference = ideal_droplet_boundary(
        &IdealDroplet {
            geometry,
            r: 1.0,
            z: 0.0,
        },
        BLOWUP_SEGMENTS,
    )?;
    let reference_arc = reference.free_polyline();

    let mut out = Vec::with_capacity(masses.len());
    let mut prev: Option<MinimizeResult> = None;
    for &m in masses {
        let mut cm = cfg.clone();
        cm.m = m;
        let r = match &prev {
            None => minimize(c, &cm)?,
            Some(p) => minimize_rescaled(c, &cm, p, 0)?,
        };
        out.push(make_record(c, &r, m, sigma0, &reference_arc)?);
        prev = Some(r);
    }
    Ok(out)
}

fn make_record(
    c: &Container,
    r: &MinimizeResult,
    m: f64,
    sigma0: f64,
    reference_arc: &[Point2],
) -> Result<SweepRecord> {
    let s_pm = match r.contact {
        Some((a, b)) => c.wrap(0.5 * (a + b)),
        None => c.project(geom::centroid(r.droplet.vertices())).0,
    };
    let p_m = c.point_at(s_pm);
    let chart = c.chart_at(s_pm)?;
    let blown = blow_up(&r.droplet, &chart, m.sqrt())?;
    let arc = blown.free_polyline();
    let hd_id = geom::hausdorff_distance(&arc, reference_arc)?;
    let flipped: Vec<Point2> = arc.iter().map(|p| Point2::new(-p.x, p.y)).collect();
    let hd_fl = geom::hausdorff_distance(&flipped, reference_arc)?;
    Ok(SweepRecord {
        m,
        gamma: r.energy.total,
        normalized_gamma: r.energy.total / m.sqrt(),
        p_m,
        sigma_gap: c.sigma_at(s_pm) - sigma0,
        diameter: r.droplet.diameter(),
        hd_blowup: hd_id.min(hd_fl),
        young_max: r.young_residuals.iter().fold(0.0f64, |a, b| a.max(*b)),
        converged: r.converged,
    })
}

// intercept, slope, r² of ordinary least squares; an exact or degenerate fit
// reports r² = 1
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let e = y - intercept - slope * x;
        ss_res += e * e;
        ss_tot += (y - my) * (y - my);
    }
    let r2 = if ss_tot > f64::MIN_POSITIVE {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (intercept, slope, r2)
}

/// Fit `normalized_gamma = intercept + slope * sqrt(m)` over the converged
/// records; passes when the intercept lands within 3% of `psi_ref` with
/// r² ≥ 0.9.
pub fn fit_gamma_expansion(records: &[SweepRecord], psi_ref: f64) -> Result<FitReport> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter(|r| r.converged)
        .map(|r| (r.m.sqrt(), r.normalized_gamma))
        .unzip();
    if xs.len() < 4 {
        return Err(Error::TooFewRecords {
            need: 4,
            got: xs.len(),
        });
    }
    let (intercept, slope, r_squared) = linear_fit(&xs, &ys);
    Ok(FitReport {
        intercept,
        slope,
        r_squared,
        pass: (intercept - psi_ref).abs() <= 0.03 * psi_ref.abs() && r_squared >= 0.9,
    })
}

/// Log-log fit of a record field against mass. `slope` is the decay
/// exponent, `intercept` the prefactor; passes when the exponent is at least
/// `exponent - 0.1` (faster decay than the target rate is fine).
pub fn scaling_check(
    records: &[SweepRecord],
    field: SweepField,
    exponent: f64,
) -> Result<FitReport> {
    let converged: Vec<&SweepRecord> = records.iter().filter(|r| r.converged).collect();
    if converged.len() < 4 {
        return Err(Error::TooFewRecords {
            need: 4,
            got: converged.len(),
        });
    }
    let mut xs = Vec::with_capacity(converged.len());
    let mut ys = Vec::with_capacity(converged.len());
    for r in &converged {
        let v = field.value(r);
        if !(v > 0.0) {
            return Err(Error::NonPositiveField(v));
        }
        xs.push(r.m.ln());
        ys.push(v.ln());
    }
    let (a, slope, r_squared) = linear_fit(&xs, &ys);
    Ok(FitReport {
        intercept: a.exp(),
        slope,
        r_squared,
        pass: slope >= exponent - 0.1,
    })
}

/// Random one-parameter perturbations of the polygonal ideal cap.
#[derive(Clone, Copy, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PerturbationFamily {
    /// Area-preserving stretches `(x, y) -> (λx, y/λ)` or the transpose,
    /// with λ drawn uniformly from `[lambda_min, lambda_max]`; the lower
    /// bound must stay strictly above 1 so the identity is excluded.
    Stretch { lambda_min: f64, lambda_max: f64 },
    /// Radial bumps `amp · sin(π u)` along the free arc (u the arc index
    /// fraction, so the ends are pinned), amplitude drawn uniformly from
    /// `[amp_min, amp_max]` with a random sign, area renormalized.
    Bump { amp_min: f64, amp_max: f64 },
}

impl PerturbationFamily {
    fn validate(&self) -> Result<()> {
        match *self {
            PerturbationFamily::Stretch {
                lambda_min,
                lambda_max,
            } => {
                if !(lambda_min > 1.0) || !(lambda_max >= lambda_min) || !(lambda_max <= 4.0) {
                    return Err(Error::BadFamilyMember(
                        "stretch bounds must satisfy 1 < min <= max <= 4",
                    ));
                }
            }
            PerturbationFamily::Bump { amp_min, amp_max } => {
                if !(amp_min > 0.0) || !(amp_max >= amp_min) || !(amp_max <= 0.25) {
                    return Err(Error::BadFamilyMember(
                        "bump amplitudes must satisfy 0 < min <= max <= 0.25",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Worst ratios of energy excess to squared cap distance over a perturbation
/// family.
#[derive(Clone, Copy, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StabilityOutcome {
    /// min over members of (capillary energy − ψ√area) / (horizontal-shift
    /// symmetric difference to the equal-area cap)².
    pub min_sessile_ratio: f64,
    /// min over members of (anisotropic energy excess) / (plane-shift
    /// symmetric difference to the equal-area cap)².
    pub min_wulff_ratio: f64,
    pub accepted: usize,
    /// Members rejected for leaving the admissible class (half-cap
    /// containment or the upper half-plane).
    pub rejected: usize,
}

/// Evaluate the two quadratic stability ratios over `samples` random members
/// of `family` built on the `segments`-gon ideal cap of coefficient `tau`.
/// Members must contain the half-scale cap; violators are counted in
/// `rejected` and skipped.
pub fn stability_probe(
    tau: f64,
    family: &PerturbationFamily,
    samples: usize,
    segments: usize,
    rng_seed: u64,
) -> Result<StabilityOutcome> {
    if samples == 0 {
        return Err(Error::NoSamples);
    }
    family.validate()?;
    let geometry = CapGeometry::new(2, tau)?;
    let scalars = geometry.scalars();
    let cap = ideal_droplet_boundary(
        &IdealDroplet {
            geometry,
            r: 1.0,
            z: 0.0,
        },
        segments.max(64),
    )?;
    let cap_verts = cap.vertices().to_vec();
    let cap_area = cap.area();
    let phi_cap = anisotropic_energy(geometry, &cap_verts)?;
    // circle center of the unit-mass cap, for radial bump directions
    let center = Point2::new(0.0, tau / scalars.volume.sqrt());
    let half_cap: Vec<Point2> = cap_verts.iter().map(|p| *p * 0.5).collect();
    let half_area = geom::signed_area(&half_cap);

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut min_sessile = f64::INFINITY;
    let mut min_wulff = f64::INFINITY;
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let n = cap_verts.len();

    for _ in 0..samples {
        let member: Vec<Point2> = match *family {
            PerturbationFamily::Stretch {
                lambda_min,
                lambda_max,
            } => {
                let l = rng.gen_range(lambda_min..=lambda_max);
                let wide: bool = rng.gen();
                let (sx, sy) = if wide { (l, 1.0 / l) } else { (1.0 / l, l) };
                cap_verts
                    .iter()
                    .map(|p| Point2::new(sx * p.x, sy * p.y))
                    .collect()
            }
            PerturbationFamily::Bump { amp_min, amp_max } => {
                let amp = rng.gen_range(amp_min..=amp_max)
                    * if rng.gen::<bool>() { 1.0 } else { -1.0 };
                let mut pts = cap_verts.clone();
                for (i, p) in pts.iter_mut().enumerate().take(n - 1).skip(1) {
                    let u = i as f64 / (n - 1) as f64;
                    let radial = *p - center;
                    let len = radial.norm();
                    if len > 0.0 {
                        *p = *p
                            + radial * (amp * (core::f64::consts::PI * u).sin() / len);
                    }
                }
                let a = geom::signed_area(&pts);
                if !(a > 0.0) {
                    rejected += 1;
                    continue;
                }
                let sc = (cap_area / a).sqrt();
                for p in &mut pts {
                    *p = *p * sc;
                }
                pts
            }
        };
        if member.iter().any(|p| p.y < 0.0) {
            rejected += 1;
            continue;
        }
        if clip::intersection_area(&member, &half_cap)? < half_area - 1e-9 {
            rejected += 1;
            continue;
        }
        let flags = cap.contact_flags().to_vec();
        let params: Vec<f64> = member
            .iter()
            .zip(&flags)
            .map(|(v, f)| if *f { v.x } else { f64::NAN })
            .collect();
        let droplet = PolyDroplet::new(member.clone(), flags, params)
            .map_err(|_| Error::BadFamilyMember("perturbed polygon is degenerate"))?;
        let area = droplet.area();
        let scale = (area / cap_area).sqrt();
        let scaled_cap: Vec<Point2> = cap_verts.iter().map(|p| *p * scale).collect();

        let excess = halfspace_energy(&droplet, tau)? - scalars.psi * area.sqrt();
        let alpha = min_shift_sym_diff(&member, &scaled_cap, false)?;
        if alpha > 0.0 {
            min_sessile = min_sessile.min(excess / (alpha * alpha));
        }

        let wulff_excess = anisotropic_energy(geometry, &member)? - phi_cap * scale;
        let beta = min_shift_sym_diff(&member, &scaled_cap, true)?;
        if beta > 0.0 {
            min_wulff = min_wulff.min(wulff_excess / (beta * beta));
        }
        accepted += 1;
    }
    if accepted == 0 {
        return Err(Error::NoSamples);
    }
    Ok(StabilityOutcome {
        min_sessile_ratio: min_sessile,
        min_wulff_ratio: min_wulff,
        accepted,
        rejected,
    })
}

// Minimal |f Δ (g + w)| over translations w of the convex polygon `g`:
// horizontal only, or alternating golden-section passes on both axes.
fn min_shift_sym_diff(f: &[Point2], g: &[Point2], both_axes: bool) -> Result<f64> {
    let d = geom::diameter(f).max(geom::diameter(g));
    let tol = 1e-4 * d;
    let window = 0.5 * d;
    let eval = |wx: f64, wy: f64| -> Result<f64> {
        let shifted: Vec<Point2> = g.iter().map(|p| Point2::new(p.x + wx, p.y + wy)).collect();
        clip::sym_diff_area(f, &shifted)
    };
    let mut wx = 0.0;
    let mut wy = 0.0;
    let mut best = eval(wx, wy)?;
    let rounds = if both_axes { 3 } else { 1 };
    for _ in 0..rounds {
        let (zx, vx) = golden_min(
            &mut |z: f64| eval(z, wy),
            wx - window,
            wx + window,
            tol,
        )?;
        if vx < best {
            best = vx;
            wx = zx;
        }
        if both_axes {
            let (zy, vy) = golden_min(
                &mut |z: f64| eval(wx, z),
                wy - window,
                wy + window,
                tol,
            )?;
            if vy < best {
                best = vy;
                wy = zy;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::container::{Container, Potential, SigmaField};
    use crate::minimize::SeedSpec;

    fn sweep_config(k: usize) -> MinimizeConfig {
        let mut cfg = MinimizeConfig::new(1e-2);
        cfg.vertex_count = k;
        cfg.max_iters = 6000;
        cfg.seeds = vec![SeedSpec::Wall {
            s: 0.0,
            tau_guess: None,
        }];
        cfg
    }

    fn sigma_disk(sigma: SigmaField, stations: usize, g: Potential) -> Container {
        Container::disk(1.0, stations, sigma, g).unwrap()
    }

    fn synthetic_record(m: f64, normalized_gamma: f64, diameter: f64) -> SweepRecord {
        SweepRecord {
            m,
            gamma: normalized_gamma * m.sqrt(),
            normalized_gamma,
            p_m: Point2::new(1.0, 0.0),
            sigma_gap: 0.0,
            diameter,
            hd_blowup: diameter,
            young_max: 1e-2,
            converged: true,
        }
    }

    const MASSES: [f64; 5] = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4];

    #[test]
    fn sweep_rejects_bad_mass_lists() {
        let c = sigma_disk(SigmaField::Constant(0.5), 256, Potential::Zero);
        let cfg = sweep_config(48);
        assert!(matches!(
            sweep(&c, &[], &cfg),
            Err(Error::TooFewRecords { need: 1, got: 0 })
        ));
        // not strictly descending
        assert!(matches!(sweep(&c, &[1e-2, 1e-2], &cfg), Err(Error::BadMass(_))));
        assert!(matches!(sweep(&c, &[1e-3, 1e-2], &cfg), Err(Error::BadMass(_))));
        // more than a quarter of the container
        assert!(matches!(sweep(&c, &[1.0], &cfg), Err(Error::BadMass(_))));
        assert!(matches!(sweep(&c, &[0.0], &cfg), Err(Error::BadMass(_))));
        assert!(matches!(sweep(&c, &[f64::NAN], &cfg), Err(Error::BadMass(_))));
    }

    #[test]
    fn disk_sweep_follows_cap_asymptotics() {
        let c = sigma_disk(SigmaField::Constant(0.5), 512, Potential::Zero);
        let recs = sweep(&c, &MASSES, &sweep_config(128)).unwrap();
        assert_eq!(recs.len(), MASSES.len());
        let psi = CapGeometry::new(2, 0.5).unwrap().scalars().psi;
        for r in &recs {
            assert!(r.converged, "m = {}", r.m);
            assert!(r.sigma_gap.abs() < 1e-12);
            assert!(r.young_max < 2.5e-2, "young {}", r.young_max);
            // the wall curves around the droplet, so the confined energy
            // stays below the half-space value at every finite mass
            assert!(r.normalized_gamma < psi);
        }
        for w in recs.windows(2) {
            assert!(w[1].normalized_gamma > w[0].normalized_gamma);
            assert!(w[1].diameter < w[0].diameter);
            assert!(w[1].hd_blowup < w[0].hd_blowup);
        }
        // lower bound gamma/sqrt(m) >= psi (1 - C diam) with C frozen at the
        // largest mass; the deficit-per-diameter ratio shrinks with m, so the
        // first record dominates the rest
        let c_low = (1.0 - recs[0].normalized_gamma / psi) / recs[0].diameter;
        assert!(c_low > 0.0 && c_low < 1.0, "c_low {c_low}");
        for r in &recs[1..] {
            assert!(
                r.normalized_gamma >= psi * (1.0 - 1.02 * c_low * r.diameter),
                "m {} gamma_n {} bound {}",
                r.m,
                r.normalized_gamma,
                psi * (1.0 - 1.02 * c_low * r.diameter)
            );
        }
        let fit = fit_gamma_expansion(&recs, psi).unwrap();
        assert!(fit.pass);
        assert!(
            (fit.intercept - psi).abs() < 3e-3 * psi,
            "intercept {} vs {psi}",
            fit.intercept
        );
        assert!(fit.r_squared > 0.999, "r2 {}", fit.r_squared);
        let sd = scaling_check(&recs, SweepField::Diameter, 0.5).unwrap();
        assert!(sd.pass && (sd.slope - 0.5).abs() < 0.05, "diameter slope {}", sd.slope);
        let sh = scaling_check(&recs, SweepField::HdBlowup, 0.125).unwrap();
        assert!(sh.pass && sh.slope > 0.4, "blow-up slope {}", sh.slope);
        // constant sigma: the gap column is identically zero
        assert!(matches!(
            scaling_check(&recs, SweepField::SigmaGap, 0.5),
            Err(Error::NonPositiveField(_))
        ));
        // the warm-started tail lands where a cold start lands
        let mut cold_cfg = sweep_config(128);
        cold_cfg.m = *MASSES.last().unwrap();
        let cold = minimize(&c, &cold_cfg).unwrap();
        let warm_gamma = recs.last().unwrap().gamma;
        assert!(
            (cold.energy.total - warm_gamma).abs() <= 1e-6 * warm_gamma,
            "cold {} warm {}",
            cold.energy.total,
            warm_gamma
        );
    }

    #[test]
    fn cosine_sweep_localizes_at_sigma_minimum() {
        let c = sigma_disk(
            SigmaField::Cosine {
                base: 0.3,
                amplitude: 0.2,
                phase: 0.0,
            },
            1024,
            Potential::Zero,
        );
        let mut cfg = sweep_config(128);
        cfg.seeds = Vec::new(); // multi-start on the first mass
        let recs = sweep(&c, &MASSES, &cfg).unwrap();
        for r in &recs {
            assert!(r.converged, "m = {}", r.m);
            let angle = r.p_m.y.atan2(r.p_m.x);
            assert!(angle.abs() < 1e-3, "m {} angle {angle}", r.m);
            assert!(
                r.sigma_gap >= 0.0 && r.sigma_gap <= 1e-6 * r.m.sqrt(),
                "m {} gap {}",
                r.m,
                r.sigma_gap
            );
            assert!(r.young_max < 2.5e-2);
        }
        let psi = CapGeometry::new(2, 0.3).unwrap().scalars().psi;
        let fit = fit_gamma_expansion(&recs, psi).unwrap();
        assert!(fit.pass);
        assert!(
            (fit.intercept - psi).abs() < 3e-3 * psi,
            "intercept {} vs {psi}",
            fit.intercept
        );
        assert!(fit.r_squared > 0.999);
    }

    #[test]
    fn linear_potential_does_not_select_the_contact_point() {
        let sig = SigmaField::Cosine {
            base: 0.3,
            amplitude: 0.2,
            phase: 0.0,
        };
        let c0 = sigma_disk(sig.clone(), 1024, Potential::Zero);
        let cg = sigma_disk(sig, 1024, Potential::Linear { gx: 0.0, gy: 10.0 });
        let mut forced_angles = Vec::new();
        for m in [1e-4, 1e-6] {
            let mut cfg = sweep_config(96);
            cfg.m = m;
            cfg.seeds = Vec::new();
            let r0 = minimize(&c0, &cfg).unwrap();
            let rg = minimize(&cg, &cfg).unwrap();
            assert!(r0.converged && rg.converged, "m = {m}");
            let p0 = r0.p_m.unwrap();
            let pg = rg.p_m.unwrap();
            assert!(p0.y.atan2(p0.x).abs() < 1e-4);
            // gravity can only help once the droplet is allowed to sag
            assert!(rg.energy.total <= r0.energy.total + 1e-12);
            forced_angles.push(pg.y.atan2(pg.x).abs());
        }
        // the displacement the forcing buys decays like sqrt(m): a factor
        // 100 in mass knocks it down by 10
        assert!(
            forced_angles[1] < 0.2 * forced_angles[0],
            "angles {forced_angles:?}"
        );
        assert!(forced_angles[1] < 0.06, "angles {forced_angles:?}");
    }

    #[test]
    fn gamma_fit_recovers_synthetic_expansion() {
        let psi = 3.0;
        let recs: Vec<SweepRecord> = MASSES
            .iter()
            .map(|&m| synthetic_record(m, psi + 0.25 * m.sqrt(), 2.0 * m.sqrt()))
            .collect();
        let fit = fit_gamma_expansion(&recs, psi).unwrap();
        assert!((fit.intercept - psi).abs() < 1e-12);
        assert!((fit.slope - 0.25).abs() < 1e-10);
        assert!(fit.r_squared > 1.0 - 1e-12);
        assert!(fit.pass);
        // a reference off by more than 3% fails the gate
        assert!(!fit_gamma_expansion(&recs, 1.05 * psi).unwrap().pass);
        // constant column: degenerate fit reports r² = 1
        let flat: Vec<SweepRecord> = MASSES
            .iter()
            .map(|&m| synthetic_record(m, psi, 1.0))
            .collect();
        let f2 = fit_gamma_expansion(&flat, psi).unwrap();
        assert!(f2.pass && f2.slope.abs() < 1e-12 && f2.r_squared == 1.0);
        // non-converged records are excluded, and four are required
        let mut few = recs.clone();
        few[0].converged = false;
        few[1].converged = false;
        assert!(matches!(
            fit_gamma_expansion(&few, psi),
            Err(Error::TooFewRecords { need: 4, got: 3 })
        ));
    }

    #[test]
    fn scaling_check_recovers_synthetic_exponent() {
        let recs: Vec<SweepRecord> = MASSES
            .iter()
            .map(|&m| synthetic_record(m, 3.0, 2.0 * m.sqrt()))
            .collect();
        let s = scaling_check(&recs, SweepField::Diameter, 0.5).unwrap();
        assert!((s.slope - 0.5).abs() < 1e-12);
        assert!((s.intercept - 2.0).abs() < 1e-12);
        assert!(s.pass && s.r_squared > 1.0 - 1e-12);
        // demanding a faster decay than the data shows must fail
        assert!(!scaling_check(&recs, SweepField::Diameter, 0.7).unwrap().pass);
        // a zero column cannot enter a log fit
        assert!(matches!(
            scaling_check(&recs, SweepField::SigmaGap, 0.5),
            Err(Error::NonPositiveField(_))
        ));
    }

    #[test]
    fn stretch_probe_ratios_concentrate_across_seeds() {
        let mut sessile = Vec::new();
        for seed in 0..3u64 {
            let o = stability_probe(
                0.0,
                &PerturbationFamily::Stretch {
                    lambda_min: 1.01,
                    lambda_max: 1.3,
                },
                16,
                256,
                seed,
            )
            .unwrap();
            assert_eq!(o.accepted, 16);
            assert_eq!(o.rejected, 0);
            assert!(o.min_sessile_ratio > 0.0 && o.min_wulff_ratio > 0.0);
            assert!(
                o.min_sessile_ratio > 1.10 && o.min_sessile_ratio < 1.25,
                "sessile {}",
                o.min_sessile_ratio
            );
            assert!(
                o.min_wulff_ratio > 1.10 && o.min_wulff_ratio < 1.25,
                "wulff {}",
                o.min_wulff_ratio
            );
            sessile.push(o.min_sessile_ratio);
        }
        let mean = sessile.iter().sum::<f64>() / sessile.len() as f64;
        for s in &sessile {
            assert!((s - mean).abs() <= 0.2 * mean, "spread {sessile:?}");
        }
    }

    #[test]
    fn near_identity_stretch_matches_second_variation() {
        // analytic limit of both ratios for the flat cap under infinitesimal
        // stretch: sqrt(2π)·(3/4) / (4/π)² = 1.15968…
        let o = stability_probe(
            0.0,
            &PerturbationFamily::Stretch {
                lambda_min: 1.02,
                lambda_max: 1.0200001,
            },
            1,
            1024,
            7,
        )
        .unwrap();
        assert!(
            o.min_sessile_ratio > 1.10 && o.min_sessile_ratio < 1.22,
            "sessile {}",
            o.min_sessile_ratio
        );
        assert!(
            o.min_wulff_ratio > 1.10 && o.min_wulff_ratio < 1.22,
            "wulff {}",
            o.min_wulff_ratio
        );
    }

    #[test]
    fn stability_ratios_stay_positive_for_tilted_caps() {
        for tau in [-0.4, 0.3, 0.6] {
            let o = stability_probe(
                tau,
                &PerturbationFamily::Stretch {
                    lambda_min: 1.01,
                    lambda_max: 1.3,
                },
                16,
                256,
                11,
            )
            .unwrap();
            assert_eq!(o.accepted, 16, "tau {tau}");
            assert_eq!(o.rejected, 0, "tau {tau}");
            assert!(
                o.min_sessile_ratio > 1.0 && o.min_sessile_ratio < 1.3,
                "tau {tau} sessile {}",
                o.min_sessile_ratio
            );
            assert!(
                o.min_wulff_ratio > 1.0 && o.min_wulff_ratio < 1.3,
                "tau {tau} wulff {}",
                o.min_wulff_ratio
            );
        }
    }

    #[test]
    fn bump_probe_ratios_stay_positive() {
        for seed in 0..2u64 {
            let b = stability_probe(
                0.0,
                &PerturbationFamily::Bump {
                    amp_min: 0.05,
                    amp_max: 0.2,
                },
                8,
                256,
                seed,
            )
            .unwrap();
            assert_eq!(b.accepted, 8);
            assert_eq!(b.rejected, 0);
            assert!(b.min_sessile_ratio > 1.0, "sessile {}", b.min_sessile_ratio);
            assert!(b.min_wulff_ratio > 1.0, "wulff {}", b.min_wulff_ratio);
        }
    }

    #[test]
    fn extreme_stretches_leave_the_admissible_class() {
        // λ ≈ 3 squashes the cap below the half-cap containment test
        let out = stability_probe(
            0.0,
            &PerturbationFamily::Stretch {
                lambda_min: 2.8,
                lambda_max: 3.0,
            },
            8,
            256,
            0,
        );
        assert!(matches!(out, Err(Error::NoSamples)));
    }

    #[test]
    fn probe_validates_inputs() {
        let stretch = PerturbationFamily::Stretch {
            lambda_min: 1.1,
            lambda_max: 1.2,
        };
        assert!(matches!(
            stability_probe(0.0, &stretch, 0, 256, 0),
            Err(Error::NoSamples)
        ));
        for family in [
            PerturbationFamily::Stretch {
                lambda_min: 1.0,
                lambda_max: 1.2,
            },
            PerturbationFamily::Stretch {
                lambda_min: 1.2,
                lambda_max: 1.1,
            },
            PerturbationFamily::Stretch {
                lambda_min: 1.1,
                lambda_max: 5.0,
            },
            PerturbationFamily::Bump {
                amp_min: 0.0,
                amp_max: 0.1,
            },
            PerturbationFamily::Bump {
                amp_min: 0.05,
                amp_max: 0.5,
            },
        ] {
            assert!(matches!(
                stability_probe(0.0, &family, 4, 256, 0),
                Err(Error::BadFamilyMember(_))
            ));
        }
    }
}
