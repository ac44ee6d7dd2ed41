//! Writes the built-in arm as a robot config plus one mesh file per link.
//!
//! cargo run --example export_default_robot -- configs/robot

use std::path::PathBuf;

use proxavoid::robot::{ur10e_like, JointConfig, RobotConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "configs/robot".into()));
    std::fs::create_dir_all(dir.join("meshes"))?;
    let model = ur10e_like();
    let mut joints = Vec::new();
    for (j, l) in model.joints().iter().zip(model.links()) {
        let mesh = PathBuf::from("meshes").join(format!("{}.obj", l.name));
        std::fs::write(dir.join(&mesh), l.mesh.to_obj_string())?;
        joints.push(JointConfig {
            name: l.name.clone(),
            translation: j.parent_offset.translation.vector.into(),
            rotation: j.parent_offset.rotation.scaled_axis().into(),
            axis: j.axis.into_inner().into(),
            mesh,
        });
    }
    let ee = model.ee_offset();
    let cfg = RobotConfig {
        name: model.name().to_string(),
        ee_translation: ee.translation.vector.into(),
        ee_rotation: ee.rotation.scaled_axis().into(),
        joints,
    };
    let path = dir.join("ur10e_like.toml");
    std::fs::write(&path, toml::to_string(&cfg)?)?;
    println!("wrote {}", path.display());
    Ok(())
}
