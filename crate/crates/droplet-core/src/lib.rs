//! Sessile-droplet reference quantities and a planar capillary energy minimizer.
//!
//! The crate has two halves. [`sessile`] computes exact reference data for a
//! droplet sitting on the wall of a half-space in any dimension `n >= 2`: cap
//! volume and areas, the normalized wall energy `psi(tau)` and its derivative,
//! and the support-function calibration that bounds the wall energy from below.
//! The planar half ([`container`], [`energy`], [`minimize`], [`asymptotics`])
//! discretizes a 2-d droplet inside a smooth container as a polygon, evaluates
//! its free/wetted/bulk energy, minimizes it under an area constraint with a
//! projected-gradient descent, and provides sweep-and-fit harnesses for the
//! small-volume regime.
//!
//! `no_std` compatible (requires `alloc`); float intrinsics come from `libm`
//! via `num-traits` when the default `std` feature is disabled.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod asymptotics;
pub mod clip;
pub mod container;
pub mod energy;
pub mod geom;
pub mod minimize;
pub mod quad;
pub mod sessile;

pub use geom::{Point2, PolyDroplet};

use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Error type shared by every module of the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Relative adhesion coefficient outside the open interval (-1, 1).
    TauOutOfRange(f64),
    /// Ambient dimension below 2.
    DimensionTooSmall(usize),
    /// Direction vector is not unit length (or has the wrong dimension).
    NonUnitDirection,
    /// Too few segments/vertices requested for a discretization.
    TooFewVertices(usize),
    /// Polygon edges cross each other.
    SelfIntersection,
    /// Polygon has non-positive signed area (wrong orientation or degenerate).
    NotCounterClockwise,
    /// Empty polyline or polygon where points were required.
    EmptyGeometry,
    /// A vertex flagged as a contact vertex lies off the container wall.
    ContactOffBoundary { dist: f64 },
    /// Contact vertices do not form a single contiguous run.
    WettedNotContiguous,
    /// Every vertex is a contact vertex; the droplet has no free boundary.
    FullyWetted,
    /// A droplet vertex lies outside the container.
    OutsideContainer { dist: f64 },
    /// A point falls outside the normal-coordinate chart of the wall.
    ChartReachExceeded,
    /// Chart reach collapsed below the snapping tolerance.
    ReachTooSmall,
    /// Station count below the supported minimum.
    TooFewStations(usize),
    /// Per-station adhesion coefficient outside (-1, 1).
    SigmaOutOfRange(f64),
    /// Supplied boundary samples are inconsistent (open curve, bad spacing, ...).
    BadBoundaryData(&'static str),
    /// Prescribed droplet area is not attainable in this container.
    BadMass(f64),
    /// The free boundary self-approached below the pinch-off threshold.
    PinchOff { iteration: usize },
    /// A probe or fit was asked to run with no samples.
    NoSamples,
    /// Fewer records than the fit requires.
    TooFewRecords { need: usize, got: usize },
    /// Log-log fit input contains a non-positive value.
    NonPositiveField(f64),
    /// A perturbation-family member violated its admissibility constraints.
    BadFamilyMember(&'static str),
    /// An internal iteration failed to converge.
    NumericalFailure(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::TauOutOfRange(t) => write!(f, "tau = {t} outside (-1, 1)"),
            Error::DimensionTooSmall(n) => write!(f, "dimension n = {n}, need n >= 2"),
            Error::NonUnitDirection => write!(f, "direction is not a unit vector"),
            Error::TooFewVertices(k) => write!(f, "{k} vertices is too few"),
            Error::SelfIntersection => write!(f, "polygon is self-intersecting"),
            Error::NotCounterClockwise => {
                write!(f, "polygon is not counterclockwise (or has zero area)")
            }
            Error::EmptyGeometry => write!(f, "empty polyline/polygon"),
            Error::ContactOffBoundary { dist } => {
                write!(f, "contact vertex {dist:e} away from the wall")
            }
            Error::WettedNotContiguous => write!(f, "wetted vertices not contiguous"),
            Error::FullyWetted => write!(f, "polygon has no free boundary"),
            Error::OutsideContainer { dist } => {
                write!(f, "vertex outside the container by {dist:e}")
            }
            Error::ChartReachExceeded => write!(f, "point outside chart reach"),
            Error::ReachTooSmall => write!(f, "chart reach below snapping tolerance"),
            Error::TooFewStations(n) => write!(f, "{n} boundary stations, need >= 256"),
            Error::SigmaOutOfRange(s) => write!(f, "sigma = {s} outside (-1, 1)"),
            Error::BadBoundaryData(msg) => write!(f, "bad boundary samples: {msg}"),
            Error::BadMass(m) => write!(f, "droplet area {m} not attainable"),
            Error::PinchOff { iteration } => {
                write!(f, "free boundary pinch-off at iteration {iteration}")
            }
            Error::NoSamples => write!(f, "no samples/trials requested"),
            Error::TooFewRecords { need, got } => {
                write!(f, "fit needs {need} records, got {got}")
            }
            Error::NonPositiveField(v) => {
                write!(f, "log-log fit requires positive values, got {v}")
            }
            Error::BadFamilyMember(msg) => write!(f, "inadmissible family member: {msg}"),
            Error::NumericalFailure(msg) => write!(f, "iteration failed: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
