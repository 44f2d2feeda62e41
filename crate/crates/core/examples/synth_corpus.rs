//! Generates a few shapes of every kind, writes them as OBJ files and prints
//! the min_z each one samples to.
//!
//! cargo run --example synth_corpus -- [out_dir]

use std::path::PathBuf;

use shapeqc::corpus::{generate_shape, map_label, DefectKind, DefectSpec, SourceCategory};
use shapeqc::mesh_io::{save_mesh, MeshFormat};
use shapeqc::sampler::{sample_surface, SamplerConfig};
use shapeqc::extract_features;

fn main() -> shapeqc::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let kinds = [
        None,
        Some(DefectKind::TruncateInferior),
        Some(DefectKind::Fragment),
        Some(DefectKind::Spikes),
        Some(DefectKind::ScaleAnomaly),
        Some(DefectKind::SlabNonorgan),
    ];
    for (i, kind) in kinds.into_iter().enumerate() {
        let seed = 1000 + i as u64;
        let defect = kind.map(|k| DefectSpec::new(k, 0.3, seed)).transpose()?;
        let mesh = generate_shape(defect.is_none(), defect.as_ref(), seed)?;
        let category = kind.map_or(SourceCategory::Usable, SourceCategory::for_defect);
        let name = kind.map_or("good", DefectKind::as_str);
        let path = out.join(format!("{name}.obj"));
        save_mesh(&mesh, &path, MeshFormat::Obj)?;
        let f = extract_features(&sample_surface(&mesh, &SamplerConfig::new(20_000, seed)?)?)?;
        println!(
            "{name:>18} {:>5} faces  {category:?} -> {}  min_z {:8.2}  mean_radius {:7.2}  {}",
            mesh.faces().len(),
            map_label(category),
            f.min()[2],
            f.mean_radius(),
            path.display()
        );
    }
    Ok(())
}
