//! Samples a mesh made of two coplanar triangles with areas 3 and 1 and
//! reports how often each was hit.
//!
//! cargo run --example sample_mesh -- [n_points seed]

use shapeqc::sampler::{sample_surface_detailed, SamplerConfig};
use shapeqc::TriangleMesh;

fn main() -> shapeqc::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (n, seed) = match args[..] {
        [n, s, ..] => (n as usize, s),
        _ => (20_000, 7),
    };
    let mesh = TriangleMesh::new(
        vec![[0.0, 0.0, 0.0], [3.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, -2.0 / 3.0, 0.0]],
        vec![[0, 1, 2], [0, 3, 1]],
    )?;
    let areas: Vec<f64> = (0..2).map(|f| mesh.triangle_area(f)).collect();
    let samples = sample_surface_detailed(&mesh, &SamplerConfig::new(n, seed)?)?;
    let on_large = samples.iter().filter(|s| s.face == 0).count();
    let frac = on_large as f64 / n as f64;
    let sigma = (0.75f64 * 0.25 / n as f64).sqrt();
    println!("areas {:?}", areas);
    println!("{on_large} of {n} points on the larger face: {frac:.4} (expected 0.75, sigma {sigma:.4})");
    Ok(())
}
