//! Synthetic organ-like surfaces and the defects applied to them.
//!
//! A good shape is a UV-tessellated ellipsoid with low-frequency radial bumps,
//! placed so that its lowest vertex sits in a narrow band around
//! [`GOOD_MIN_Z_ANCHOR`]. Defects are applied to the good shape generated from
//! the same seed.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh_io::{Point3, TriangleMesh};
use crate::rng::{derive_seed, rng_from_seed};

/// Semi-axes before the ±20 % per-axis jitter.
pub const BASE_SEMI_AXES: [f64; 3] = [75.0, 50.0, 40.0];
pub const AXIS_JITTER: f64 = 0.2;
/// Summed amplitude of the radial bumps never exceeds this fraction.
pub const MAX_BUMP: f64 = 0.1;
pub const GOOD_CENTER_XY: [f64; 2] = [-70.0, 30.0];
pub const CENTER_JITTER: f64 = 4.0;
pub const GOOD_MIN_Z_ANCHOR: f64 = -150.0;
pub const MIN_Z_JITTER: f64 = 3.0;

const N_RINGS: usize = 40;
const N_SEGMENTS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectKind {
    TruncateInferior,
    Fragment,
    Spikes,
    ScaleAnomaly,
    SlabNonorgan,
}

impl DefectKind {
    pub const ALL: [DefectKind; 5] = [
        DefectKind::TruncateInferior,
        DefectKind::Fragment,
        DefectKind::Spikes,
        DefectKind::ScaleAnomaly,
        DefectKind::SlabNonorgan,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DefectKind::TruncateInferior => "truncate_inferior",
            DefectKind::Fragment => "fragment",
            DefectKind::Spikes => "spikes",
            DefectKind::ScaleAnomaly => "scale_anomaly",
            DefectKind::SlabNonorgan => "slab_nonorgan",
        }
    }

    /// Accepts the full names plus the short forms `truncate`, `scale` and `slab`.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "truncate_inferior" | "truncate" => Some(DefectKind::TruncateInferior),
            "fragment" => Some(DefectKind::Fragment),
            "spikes" => Some(DefectKind::Spikes),
            "scale_anomaly" | "scale" => Some(DefectKind::ScaleAnomaly),
            "slab_nonorgan" | "slab" => Some(DefectKind::SlabNonorgan),
            _ => None,
        }
    }

    /// Magnitude range the corpus generator draws from for this kind.
    pub fn corpus_magnitude_range(self) -> (f64, f64) {
        match self {
            DefectKind::TruncateInferior => (0.15, 0.45),
            DefectKind::Fragment => (0.25, 0.7),
            DefectKind::Spikes => (0.3, 1.0),
            DefectKind::ScaleAnomaly => (0.1, 1.0),
            DefectKind::SlabNonorgan => (0.05, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectSpec {
    pub kind: DefectKind,
    pub magnitude: f64,
    pub seed: u64,
}

impl DefectSpec {
    pub fn new(kind: DefectKind, magnitude: f64, seed: u64) -> Result<Self> {
        let spec = Self {
            kind,
            magnitude,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.magnitude > 0.0 && self.magnitude <= 1.0) {
            return Err(Error::InvalidSpec(format!(
                "defect magnitude {} outside (0, 1]",
                self.magnitude
            )));
        }
        if self.kind == DefectKind::TruncateInferior && self.magnitude >= 1.0 {
            return Err(Error::InvalidSpec(
                "truncate_inferior with magnitude 1 removes the whole shape".into(),
            ));
        }
        Ok(())
    }
}

/// Good shape for `seed`, or that shape transformed by `defect`.
pub fn generate_shape(good: bool, defect: Option<&DefectSpec>, seed: u64) -> Result<TriangleMesh> {
    match (good, defect) {
        (true, None) => Ok(good_shape(seed)),
        (true, Some(_)) => Err(Error::InvalidSpec("a good shape cannot carry a defect".into())),
        (false, None) => Err(Error::InvalidSpec("a bad shape needs a defect".into())),
        (false, Some(d)) => {
            d.validate()?;
            apply_defect(&good_shape(seed), d)
        }
    }
}

struct Bump {
    amp: f64,
    lat_freq: f64,
    lon_freq: f64,
    lat_phase: f64,
    lon_phase: f64,
}

pub fn good_shape(seed: u64) -> TriangleMesh {
    let mut rng = rng_from_seed(derive_seed(seed, 0x5348_4150));
    let axes = BASE_SEMI_AXES.map(|a| a * rng.random_range(1.0 - AXIS_JITTER..1.0 + AXIS_JITTER));
    let bumps: Vec<Bump> = (0..3)
        .map(|_| Bump {
            amp: rng.random_range(0.01..MAX_BUMP / 3.0),
            lat_freq: f64::from(rng.random_range(1..=3u32)),
            lon_freq: f64::from(rng.random_range(1..=3u32)),
            lat_phase: rng.random_range(0.0..2.0 * PI),
            lon_phase: rng.random_range(0.0..2.0 * PI),
        })
        .collect();
    let cx = GOOD_CENTER_XY[0] + rng.random_range(-CENTER_JITTER..CENTER_JITTER);
    let cy = GOOD_CENTER_XY[1] + rng.random_range(-CENTER_JITTER..CENTER_JITTER);
    let min_z = GOOD_MIN_Z_ANCHOR + rng.random_range(-MIN_Z_JITTER..MIN_Z_JITTER);

    let radial = |theta: f64, phi: f64| {
        1.0 + bumps
            .iter()
            .map(|b| {
                b.amp * (b.lat_freq * theta + b.lat_phase).cos() * (b.lon_freq * phi + b.lon_phase).cos()
            })
            .sum::<f64>()
    };
    let position = |theta: f64, phi: f64| -> Point3 {
        let r = radial(theta, phi);
        [
            r * axes[0] * theta.sin() * phi.cos(),
            r * axes[1] * theta.sin() * phi.sin(),
            r * axes[2] * theta.cos(),
        ]
    };

    let mut vertices = Vec::with_capacity(2 + (N_RINGS - 1) * N_SEGMENTS);
    vertices.push(position(0.0, 0.0));
    for ring in 1..N_RINGS {
        let theta = PI * ring as f64 / N_RINGS as f64;
        for seg in 0..N_SEGMENTS {
            let phi = 2.0 * PI * seg as f64 / N_SEGMENTS as f64;
            vertices.push(position(theta, phi));
        }
    }
    vertices.push(position(PI, 0.0));
    let bottom = vertices.len() - 1;
    let ring_start = |ring: usize| 1 + (ring - 1) * N_SEGMENTS;

    let mut faces = Vec::with_capacity(2 * N_RINGS * N_SEGMENTS);
    for seg in 0..N_SEGMENTS {
        let next = (seg + 1) % N_SEGMENTS;
        faces.push([0, ring_start(1) + seg, ring_start(1) + next]);
    }
    for ring in 1..N_RINGS - 1 {
        let (a0, b0) = (ring_start(ring), ring_start(ring + 1));
        for seg in 0..N_SEGMENTS {
            let next = (seg + 1) % N_SEGMENTS;
            faces.push([a0 + seg, b0 + seg, b0 + next]);
            faces.push([a0 + seg, b0 + next, a0 + next]);
        }
    }
    let last = ring_start(N_RINGS - 1);
    for seg in 0..N_SEGMENTS {
        let next = (seg + 1) % N_SEGMENTS;
        faces.push([last + seg, bottom, last + next]);
    }

    let lowest = vertices.iter().map(|v| v[2]).fold(f64::INFINITY, f64::min);
    for v in &mut vertices {
        v[0] += cx;
        v[1] += cy;
        v[2] += min_z - lowest;
    }
    TriangleMesh::new(vertices, faces).expect("tessellation indices are in range")
}

pub fn apply_defect(parent: &TriangleMesh, defect: &DefectSpec) -> Result<TriangleMesh> {
    defect.validate()?;
    let (lo, hi) = parent.bounds().ok_or(Error::EmptyMesh)?;
    let m = defect.magnitude;
    let mut rng = rng_from_seed(defect.seed);
    match defect.kind {
        DefectKind::TruncateInferior => truncate_below(parent, lo[2] + m * (hi[2] - lo[2])),
        DefectKind::Fragment => {
            let h = hi[2] - lo[2];
            let center = lo[2] + h * rng.random_range(0.35..0.65);
            let max_extent = parent
                .faces()
                .iter()
                .map(|f| {
                    let z = f.map(|i| parent.vertices()[i][2]);
                    z[0].max(z[1]).max(z[2]) - z[0].min(z[1]).min(z[2])
                })
                .fold(0.0, f64::max);
            let width = (0.6 * m * h).max(2.5 * max_extent);
            remove_band(parent, center - width / 2.0, center + width / 2.0)
        }
        DefectKind::Spikes => {
            let n_v = parent.vertices().len();
            let count = ((m * 0.01 * n_v as f64).round() as usize).max(1);
            let centroid = centroid(parent.vertices());
            let bound_r = parent
                .vertices()
                .iter()
                .map(|v| dist(*v, centroid))
                .fold(0.0, f64::max);
            let mut vertices = parent.vertices().to_vec();
            let chosen = rand::seq::index::sample(&mut rng, n_v, count.min(n_v));
            for i in chosen.iter() {
                let v = vertices[i];
                let dir = unit([v[0] - centroid[0], v[1] - centroid[1], v[2] - centroid[2]]);
                let d = 0.5 * bound_r * rng.random_range(0.5..=1.0);
                vertices[i] = [v[0] + d * dir[0], v[1] + d * dir[1], v[2] + d * dir[2]];
            }
            TriangleMesh::new(vertices, parent.faces().to_vec())
        }
        DefectKind::ScaleAnomaly => {
            let s = 1.0 + 3.0 * m;
            let vertices = parent.vertices().iter().map(|v| v.map(|c| c * s)).collect();
            TriangleMesh::new(vertices, parent.faces().to_vec())
        }
        DefectKind::SlabNonorgan => {
            let thickness = 2.0 + 18.0 * m;
            let c = centroid(parent.vertices());
            let size = [
                200.0 * rng.random_range(0.8..1.2),
                150.0 * rng.random_range(0.8..1.2),
                thickness,
            ];
            Ok(box_mesh(c, size))
        }
    }
}

fn centroid(vs: &[Point3]) -> Point3 {
    let n = vs.len().max(1) as f64;
    let s = vs.iter().fold([0.0; 3], |a, v| [a[0] + v[0], a[1] + v[1], a[2] + v[2]]);
    s.map(|c| c / n)
}

fn dist(a: Point3, b: Point3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn unit(v: Point3) -> Point3 {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if n > 0.0 {
        v.map(|c| c / n)
    } else {
        [0.0, 0.0, 1.0]
    }
}

/// Axis-aligned box centred at `c`.
pub fn box_mesh(c: Point3, size: [f64; 3]) -> TriangleMesh {
    let h = size.map(|s| s / 2.0);
    let vertices: Vec<Point3> = (0..8)
        .map(|i| {
            [
                c[0] + if i & 1 == 0 { -h[0] } else { h[0] },
                c[1] + if i & 2 == 0 { -h[1] } else { h[1] },
                c[2] + if i & 4 == 0 { -h[2] } else { h[2] },
            ]
        })
        .collect();
    let faces = vec![
        [0, 2, 1],
        [1, 2, 3],
        [4, 5, 6],
        [5, 7, 6],
        [0, 1, 4],
        [1, 5, 4],
        [2, 6, 3],
        [3, 6, 7],
        [0, 4, 2],
        [2, 4, 6],
        [1, 3, 5],
        [3, 7, 5],
    ];
    TriangleMesh::new(vertices, faces).expect("box indices are in range")
}

/// Drops unreferenced vertices and renumbers faces.
fn compact(vertices: &[Point3], faces: Vec<[usize; 3]>) -> Result<TriangleMesh> {
    let mut remap = vec![usize::MAX; vertices.len()];
    let mut kept = Vec::new();
    let faces = faces
        .into_iter()
        .map(|f| {
            f.map(|i| {
                if remap[i] == usize::MAX {
                    remap[i] = kept.len();
                    kept.push(vertices[i]);
                }
                remap[i]
            })
        })
        .collect::<Vec<_>>();
    if faces.is_empty() {
        return Err(Error::EmptyMesh);
    }
    TriangleMesh::new(kept, faces)
}

fn remove_band(mesh: &TriangleMesh, lo: f64, hi: f64) -> Result<TriangleMesh> {
    let faces = mesh
        .faces()
        .iter()
        .copied()
        .filter(|f| {
            let z = f.iter().map(|&i| mesh.vertices()[i][2]).sum::<f64>() / 3.0;
            !(lo..=hi).contains(&z)
        })
        .collect();
    compact(mesh.vertices(), faces)
}

/// Removes everything below `z = cut` and closes the hole with a fan cap.
pub fn truncate_below(mesh: &TriangleMesh, cut: f64) -> Result<TriangleMesh> {
    let mut cut = cut;
    // keep the plane off the vertices so every crossing edge has a proper intersection
    while mesh.vertices().iter().any(|v| v[2] == cut) {
        cut = cut.next_up();
    }
    let mut vertices: Vec<Point3> = mesh.vertices().to_vec();
    let mut crossing: HashMap<(usize, usize), usize> = HashMap::new();
    let mut faces = Vec::new();
    let mut rim: Vec<(usize, usize)> = Vec::new();
    let above = |i: usize, vs: &[Point3]| vs[i][2] > cut;

    for f in mesh.faces() {
        let inside = f.map(|i| above(i, &vertices));
        match inside.iter().filter(|&&b| b).count() {
            3 => {
                faces.push(*f);
                continue;
            }
            0 => continue,
            _ => {}
        }
        let mut poly = Vec::with_capacity(4);
        let mut exit = usize::MAX;
        let mut enter = usize::MAX;
        for k in 0..3 {
            let (p, q) = (f[k], f[(k + 1) % 3]);
            let (pin, qin) = (inside[k], inside[(k + 1) % 3]);
            if pin {
                poly.push(p);
            }
            if pin != qin {
                let key = (p.min(q), p.max(q));
                let idx = *crossing.entry(key).or_insert_with(|| {
                    let (a, b) = (vertices[key.0], vertices[key.1]);
                    let t = (cut - a[2]) / (b[2] - a[2]);
                    vertices.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), cut]);
                    vertices.len() - 1
                });
                poly.push(idx);
                if pin {
                    exit = idx;
                } else {
                    enter = idx;
                }
            }
        }
        for k in 1..poly.len() - 1 {
            faces.push([poly[0], poly[k], poly[k + 1]]);
        }
        rim.push((exit, enter));
    }
    if faces.is_empty() {
        return Err(Error::EmptyMesh);
    }
    if !rim.is_empty() {
        let mut ids: Vec<usize> = rim.iter().flat_map(|&(a, b)| [a, b]).collect();
        ids.sort_unstable();
        ids.dedup();
        let c = centroid(&ids.iter().map(|&i| vertices[i]).collect::<Vec<_>>());
        vertices.push([c[0], c[1], cut]);
        let hub = vertices.len() - 1;
        for (exit, enter) in rim {
            faces.push([hub, enter, exit]);
        }
    }
    compact(&vertices, faces)
}
