//! Strict JSON run configuration and its mapping onto core types. Unknown
//! keys are rejected so a typo fails loudly instead of silently falling back
//! to a default.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use droplet_core::container::{BoundaryShape, Container, Potential, SigmaField};
use droplet_core::minimize::{MinimizeConfig, SeedSpec};
use droplet_core::Point2;

use crate::{io, CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// One experiment: a container, minimizer settings, and (for sweeps) a
/// descending mass list.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub container: ContainerSpec,
    #[serde(default)]
    pub minimize: MinimizeSpec,
    /// Mass list for `sweep`, strictly descending.
    #[serde(default)]
    pub masses: Vec<f64>,
    #[serde(default)]
    pub rng_seed: u64,
    /// Default output locations; command-line flags take precedence.
    #[serde(default)]
    pub outputs: OutputPaths,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    pub fn hash(&self) -> String {
        io::config_hash(self)
    }

    pub fn build_container(&self) -> CliResult<Container> {
        let c = &self.container;
        let shape = match &c.shape {
            ShapeSpec::Disk { radius, center } => BoundaryShape::Disk {
                radius: *radius,
                center: point(center),
            },
            ShapeSpec::Ellipse { a, b, center } => BoundaryShape::Ellipse {
                a: *a,
                b: *b,
                center: point(center),
            },
            ShapeSpec::Stadium {
                half_length,
                radius,
                center,
            } => BoundaryShape::Stadium {
                half_length: *half_length,
                radius: *radius,
                center: point(center),
            },
            ShapeSpec::Samples { points } => {
                BoundaryShape::Samples(points.iter().map(point).collect())
            }
        };
        let sigma = match &c.sigma {
            SigmaSpec::Constant(v) => SigmaField::Constant(*v),
            SigmaSpec::Cosine {
                base,
                amplitude,
                phase,
            } => SigmaField::Cosine {
                base: *base,
                amplitude: *amplitude,
                phase: *phase,
            },
            SigmaSpec::Table(values) => SigmaField::Table(values.clone()),
        };
        let g = match &c.g {
            PotentialSpec::Zero => Potential::Zero,
            PotentialSpec::Linear { gx, gy } => Potential::Linear { gx: *gx, gy: *gy },
            PotentialSpec::Grid {
                x0,
                y0,
                dx,
                dy,
                nx,
                ny,
                values,
            } => Potential::Grid {
                x0: *x0,
                y0: *y0,
                dx: *dx,
                dy: *dy,
                nx: *nx,
                ny: *ny,
                values: values.clone(),
            },
        };
        Container::new(shape, c.stations, sigma, g)
            .map_err(|e| CliError::Validation(format!("container: {e}")))
    }

    /// `m_override` substitutes for `minimize.m` (the sweep sets it per
    /// mass); missing both is an error.
    pub fn build_minimize(&self, m_override: Option<f64>) -> CliResult<MinimizeConfig> {
        let m = m_override.or(self.minimize.m).ok_or_else(|| {
            CliError::Validation("minimize.m missing in config".into())
        })?;
        Ok(MinimizeConfig {
            vertex_count: self.minimize.vertex_count,
            m,
            init_step: self.minimize.init_step,
            grad_tol: self.minimize.grad_tol,
            max_iters: self.minimize.max_iters,
            remesh_interval: self.minimize.remesh_interval,
            seeds: self.minimize.seeds.iter().map(SeedSpecJson::to_core).collect(),
            rng_seed: self.rng_seed,
        })
    }
}

fn point(p: &[f64; 2]) -> Point2 {
    Point2::new(p[0], p[1])
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContainerSpec {
    pub shape: ShapeSpec,
    #[serde(default = "default_stations")]
    pub stations: usize,
    pub sigma: SigmaSpec,
    #[serde(default)]
    pub g: PotentialSpec,
}

fn default_stations() -> usize {
    1024
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum ShapeSpec {
    Disk {
        radius: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    Ellipse {
        a: f64,
        b: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    Stadium {
        half_length: f64,
        radius: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    Samples {
        points: Vec<[f64; 2]>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum SigmaSpec {
    Constant(f64),
    Cosine {
        base: f64,
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    Table(Vec<f64>),
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum PotentialSpec {
    #[default]
    Zero,
    Linear {
        #[serde(default)]
        gx: f64,
        #[serde(default)]
        gy: f64,
    },
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

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimizeSpec {
    /// Droplet area for a single `minimize` run; `sweep` uses `masses`.
    #[serde(default)]
    pub m: Option<f64>,
    #[serde(default = "default_vertex_count")]
    pub vertex_count: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_remesh_interval")]
    pub remesh_interval: usize,
    #[serde(default)]
    pub grad_tol: Option<f64>,
    #[serde(default)]
    pub init_step: Option<f64>,
    /// Empty selects the default seed set (lowest-σ wall stations plus an
    /// interior disk when it fits).
    #[serde(default)]
    pub seeds: Vec<SeedSpecJson>,
}

impl Default for MinimizeSpec {
    fn default() -> Self {
        MinimizeSpec {
            m: None,
            vertex_count: default_vertex_count(),
            max_iters: default_max_iters(),
            remesh_interval: default_remesh_interval(),
            grad_tol: None,
            init_step: None,
            seeds: Vec::new(),
        }
    }
}

fn default_vertex_count() -> usize {
    256
}

fn default_max_iters() -> usize {
    50_000
}

fn default_remesh_interval() -> usize {
    20
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum SeedSpecJson {
    Wall {
        s: f64,
        #[serde(default)]
        tau_guess: Option<f64>,
    },
    Interior {
        center: [f64; 2],
    },
}

impl SeedSpecJson {
    fn to_core(&self) -> SeedSpec {
        match self {
            SeedSpecJson::Wall { s, tau_guess } => SeedSpec::Wall {
                s: *s,
                tau_guess: *tau_guess,
            },
            SeedSpecJson::Interior { center } => SeedSpec::Interior {
                center: point(center),
            },
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default)]
    pub droplet: Option<PathBuf>,
    #[serde(default)]
    pub result: Option<PathBuf>,
    #[serde(default)]
    pub svg: Option<PathBuf>,
    #[serde(default)]
    pub table: Option<PathBuf>,
}
