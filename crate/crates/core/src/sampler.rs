//! Area-weighted uniform sampling of triangle-mesh surfaces.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh_io::{PointCloud, TriangleMesh};
use crate::rng::rng_from_seed;

pub const DEFAULT_POINTS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n_points: usize,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(n_points: usize, seed: u64) -> Result<Self> {
        if n_points == 0 {
            return Err(Error::InvalidSpec("n_points must be at least 1".into()));
        }
        Ok(Self { n_points, seed })
    }
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n_points: DEFAULT_POINTS,
            seed: 0,
        }
    }
}

/// One sampled point together with the face it came from and its barycentric weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample {
    pub face: usize,
    pub weights: [f64; 3],
    pub point: [f64; 3],
}

/// Samples `cfg.n_points` points uniformly with respect to surface area.
///
/// Faces are picked by binary search over the cumulative area table; inside a
/// face the weights are `u = 1 - sqrt(r1)`, `v = r2 * sqrt(r1)`, `w = 1 - u - v`.
/// Zero-area faces are never picked.
pub fn sample_surface(mesh: &TriangleMesh, cfg: &SamplerConfig) -> Result<PointCloud> {
    let samples = sample_surface_detailed(mesh, cfg)?;
    PointCloud::new(samples.into_iter().map(|s| s.point).collect())
}

pub fn sample_surface_detailed(
    mesh: &TriangleMesh,
    cfg: &SamplerConfig,
) -> Result<Vec<SurfaceSample>> {
    if mesh.faces().is_empty() {
        return Err(Error::EmptyMesh);
    }
    if cfg.n_points == 0 {
        return Err(Error::InvalidSpec("n_points must be at least 1".into()));
    }
    let mut cumulative = Vec::with_capacity(mesh.faces().len());
    let mut total = 0.0;
    for f in 0..mesh.faces().len() {
        total += mesh.triangle_area(f);
        cumulative.push(total);
    }
    if !(total > 0.0) {
        return Err(Error::DegenerateMesh);
    }

    let mut rng = rng_from_seed(cfg.seed);
    let mut out = Vec::with_capacity(cfg.n_points);
    for _ in 0..cfg.n_points {
        let target = rng.random::<f64>() * total;
        // first face whose cumulative area exceeds the target; zero-area faces
        // share their predecessor's cumulative value and are skipped
        let face = cumulative
            .partition_point(|&c| c <= target)
            .min(cumulative.len() - 1);
        let r1: f64 = rng.random();
        let r2: f64 = rng.random();
        let s = r1.sqrt();
        let u = 1.0 - s;
        let v = r2 * s;
        let w = 1.0 - u - v;
        let [a, b, c] = mesh.triangle(face);
        let point = [
            u * a[0] + v * b[0] + w * c[0],
            u * a[1] + v * b[1] + w * c[1],
            u * a[2] + v * b[2] + w * c[2],
        ];
        out.push(SurfaceSample {
            face,
            weights: [u, v, w],
            point,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_triangle() -> TriangleMesh {
        TriangleMesh::new(
            vec![[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]],
            vec![[0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn points_lie_on_plane() {
        // plane x + y/2 + z/3 = 1
        let cloud = sample_surface(&single_triangle(), &SamplerConfig::new(1000, 3).unwrap())
            .unwrap();
        assert_eq!(cloud.count(), 1000);
        for p in cloud.points() {
            assert!((p[0] + p[1] / 2.0 + p[2] / 3.0 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn deterministic() {
        let cfg = SamplerConfig::new(500, 11).unwrap();
        let a = sample_surface(&single_triangle(), &cfg).unwrap();
        let b = sample_surface(&single_triangle(), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_and_empty() {
        let flat = TriangleMesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let cfg = SamplerConfig::default();
        assert!(matches!(sample_surface(&flat, &cfg), Err(Error::DegenerateMesh)));
        let empty = TriangleMesh::new(vec![[0.0; 3]], vec![]).unwrap();
        assert!(matches!(sample_surface(&empty, &cfg), Err(Error::EmptyMesh)));
        assert!(SamplerConfig::new(0, 1).is_err());
    }

    #[test]
    fn zero_area_faces_are_skipped() {
        let mesh = TriangleMesh::new(
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [2.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
            ],
            vec![[0, 1, 2], [0, 1, 3], [0, 1, 2]],
        )
        .unwrap();
        let s = sample_surface_detailed(&mesh, &SamplerConfig::new(2000, 5).unwrap()).unwrap();
        assert!(s.iter().all(|p| p.face == 1));
    }
}
