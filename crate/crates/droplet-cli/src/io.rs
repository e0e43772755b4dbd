//! File plumbing: atomic writes, config hashing, the CSV droplet format, and
//! the JSON schemas of the result files.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use droplet_core::container::Container;
use droplet_core::energy::EnergyBreakdown;
use droplet_core::minimize::MinimizeResult;
use droplet_core::{Point2, PolyDroplet};

use crate::config::RunConfig;
use crate::{CliError, CliResult};

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Hash of the canonical JSON serialization, stamped into every output file.
pub fn config_hash<T: Serialize>(v: &T) -> String {
    let canon = serde_json::to_string(v).expect("config serializes");
    format!("fnv1a64:{:016x}", fnv1a64(canon.as_bytes()))
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output serializes");
    s.push('\n');
    s
}

/// Write through a temp file in the target directory, then rename over the
/// destination, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Validation(format!("{}: not a file path", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp.{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let io_err = |e: std::io::Error| CliError::Validation(format!("{}: {e}", path.display()));
    let mut f = fs::File::create(&tmp).map_err(io_err)?;
    f.write_all(bytes)
        .and_then(|_| f.flush())
        .and_then(|_| fs::rename(&tmp, path))
        .map_err(|e| {
            let _ = fs::remove_file(&tmp);
            io_err(e)
        })
}

// ---------------------------------------------------------------------------
// droplet CSV

/// Columns `x,y,contact,param`; `param` is the wall arc length of a contact
/// vertex and empty on free vertices.
pub fn write_droplet_csv(
    path: &Path,
    d: &PolyDroplet,
    hash: &str,
    rng_seed: u64,
) -> CliResult<()> {
    let mut s = format!("# config {hash} rng_seed {rng_seed}\n");
    s.push_str("x,y,contact,param\n");
    for (i, v) in d.vertices().iter().enumerate() {
        match d.param(i) {
            Some(p) => s.push_str(&format!("{},{},1,{p}\n", v.x, v.y)),
            None => s.push_str(&format!("{},{},0,\n", v.x, v.y)),
        }
    }
    write_atomic(path, s.as_bytes())
}

/// Read a droplet polygon; `#` lines and the header are skipped. A contact
/// vertex with an empty `param` gets the arc length of its wall projection.
pub fn read_droplet_csv(path: &Path, c: &Container) -> CliResult<PolyDroplet> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let bad = |lineno: usize, msg: String| {
        CliError::Validation(format!("{}:{}: {msg}", path.display(), lineno + 1))
    };
    let mut verts = Vec::new();
    let mut flags = Vec::new();
    let mut params = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields[0] == "x" {
            continue;
        }
        if fields.len() < 3 || fields.len() > 4 {
            return Err(bad(lineno, format!("{} fields, expected x,y,contact,param", fields.len())));
        }
        let x: f64 = fields[0]
            .parse()
            .map_err(|_| bad(lineno, format!("bad x '{}'", fields[0])))?;
        let y: f64 = fields[1]
            .parse()
            .map_err(|_| bad(lineno, format!("bad y '{}'", fields[1])))?;
        let contact = match fields[2] {
            "0" => false,
            "1" => true,
            other => return Err(bad(lineno, format!("bad contact flag '{other}', expected 0 or 1"))),
        };
        let v = Point2::new(x, y);
        let param = match fields.get(3).copied().filter(|f| !f.is_empty()) {
            Some(f) => f
                .parse()
                .map_err(|_| bad(lineno, format!("bad param '{f}'")))?,
            None if contact => c.project(v).0,
            None => f64::NAN,
        };
        verts.push(v);
        flags.push(contact);
        params.push(param);
    }
    PolyDroplet::new(verts, flags, params)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// JSON file schemas

/// JSON-safe droplet: free vertices carry `null` instead of a NaN param.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DropletJson {
    pub vertices: Vec<[f64; 2]>,
    pub contact: Vec<bool>,
    pub params: Vec<Option<f64>>,
}

impl DropletJson {
    pub fn from_droplet(d: &PolyDroplet) -> Self {
        let n = d.len();
        DropletJson {
            vertices: d.vertices().iter().map(|p| [p.x, p.y]).collect(),
            contact: d.contact_flags().to_vec(),
            params: (0..n).map(|i| d.param(i)).collect(),
        }
    }

    pub fn to_droplet(&self) -> CliResult<PolyDroplet> {
        let verts = self.vertices.iter().map(|p| Point2::new(p[0], p[1])).collect();
        let params = self.params.iter().map(|p| p.unwrap_or(f64::NAN)).collect();
        PolyDroplet::new(verts, self.contact.clone(), params)
            .map_err(|e| CliError::Validation(format!("result droplet: {e}")))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimizeJson {
    pub energy: EnergyBreakdown,
    pub p_m: Option<[f64; 2]>,
    pub contact: Option<[f64; 2]>,
    pub young_residuals: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub seed_index: usize,
    pub area: f64,
    pub diameter: f64,
    pub droplet: DropletJson,
}

impl MinimizeJson {
    pub fn from_result(r: &MinimizeResult) -> Self {
        MinimizeJson {
            energy: r.energy,
            p_m: r.p_m.map(|p| [p.x, p.y]),
            contact: r.contact.map(|(a, b)| [a, b]),
            young_residuals: r.young_residuals.clone(),
            converged: r.converged,
            iterations: r.iterations,
            seed_index: r.seed_index,
            area: r.droplet.area(),
            diameter: r.droplet.diameter(),
            droplet: DropletJson::from_droplet(&r.droplet),
        }
    }

    pub fn to_result(&self) -> CliResult<MinimizeResult> {
        Ok(MinimizeResult {
            droplet: self.droplet.to_droplet()?,
            energy: self.energy,
            p_m: self.p_m.map(|p| Point2::new(p[0], p[1])),
            contact: self.contact.map(|c| (c[0], c[1])),
            young_residuals: self.young_residuals.clone(),
            converged: self.converged,
            iterations: self.iterations,
            seed_index: self.seed_index,
        })
    }
}

/// `minimize --out-result` document; `probe` reads it back.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResultFile {
    pub schema_version: u32,
    pub config_hash: String,
    pub rng_seed: u64,
    pub config: RunConfig,
    pub result: MinimizeJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnergyFile {
    pub schema_version: u32,
    pub config_hash: String,
    pub rng_seed: u64,
    pub area: f64,
    pub diameter: f64,
    pub breakdown: EnergyBreakdown,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityFile {
    pub schema_version: u32,
    pub config_hash: String,
    pub rng_seed: u64,
    pub tau: f64,
    pub family: droplet_core::asymptotics::PerturbationFamily,
    pub samples: usize,
    pub segments: usize,
    pub outcome: droplet_core::asymptotics::StabilityOutcome,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeFile {
    pub schema_version: u32,
    pub config_hash: String,
    pub rng_seed: u64,
    pub trials: usize,
    pub rho0: f64,
    pub lambda_hat: f64,
}
