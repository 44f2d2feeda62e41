//! Computes the 14 features for a mesh or point-cloud file, or for the unit
//! cube's corners when no file is given.
//!
//! cargo run --example extract_features -- [path] [n_points]

use std::path::Path;

use shapeqc::mesh_io::{load_mesh, load_point_cloud, CloudFormat, MeshFormat};
use shapeqc::sampler::{sample_surface, SamplerConfig, DEFAULT_POINTS};
use shapeqc::{extract_features, PointCloud, FEATURE_NAMES};

fn main() -> shapeqc::Result<()> {
    let mut args = std::env::args().skip(1);
    let cloud = match args.next() {
        Some(path) => {
            let path = Path::new(&path);
            let n = args.next().and_then(|a| a.parse().ok()).unwrap_or(DEFAULT_POINTS);
            match MeshFormat::from_path(path) {
                Ok(fmt) => sample_surface(&load_mesh(path, fmt)?, &SamplerConfig::new(n, 42)?)?,
                Err(_) => load_point_cloud(path, CloudFormat::from_path(path)?)?,
            }
        }
        None => {
            let corners = (0..8).map(|i| [(i & 1) as f64, (i >> 1 & 1) as f64, (i >> 2 & 1) as f64]);
            PointCloud::new(corners.collect())?
        }
    };
    let f = extract_features(&cloud)?;
    println!("{} points", cloud.count());
    for (name, v) in FEATURE_NAMES.iter().zip(f.values()) {
        println!("{name:>12} {v:>14.6}");
    }
    Ok(())
}
