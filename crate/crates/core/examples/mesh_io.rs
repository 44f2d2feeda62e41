//! Parses a small OBJ with a quad face, samples it and writes the cloud in
//! each ascii point format, then reads every file back.
//!
//! cargo run --example mesh_io -- [out_dir]

use std::path::PathBuf;

use shapeqc::mesh_io::{load_point_cloud, parse_obj, save_point_cloud, CloudFormat};
use shapeqc::sampler::{sample_surface, SamplerConfig};

const SQUARE_PYRAMID: &str = "\
v 0 0 0
v 2 0 0
v 2 2 0
v 0 2 0
v 1 1 1.5
f 1 2 3 4
f 1 2 5
f 2 3 5
f 3 4 5
f 4 1 5
";

fn main() -> shapeqc::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let mesh = parse_obj(SQUARE_PYRAMID)?;
    println!("{} vertices, {} triangles, area {:.4}", mesh.vertices().len(), mesh.faces().len(), mesh.surface_area());

    let cloud = sample_surface(&mesh, &SamplerConfig::new(1000, 7)?)?;
    for format in [CloudFormat::Xyz, CloudFormat::Ply, CloudFormat::Csv] {
        let path = out.join(format!("pyramid.{}", format.extension()));
        save_point_cloud(&cloud, &path, format)?;
        let back = load_point_cloud(&path, format)?;
        let max_delta = cloud
            .points()
            .iter()
            .zip(back.points())
            .flat_map(|(p, q)| (0..3).map(move |a| (p[a] - q[a]).abs()))
            .fold(0.0f64, f64::max);
        println!("{}: {} points, max delta {max_delta:e}", path.display(), back.count());
    }
    Ok(())
}
