#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use hsac::pipeline::{synthetic_scene, Scene};
use hsac::scene_ingest::{write_cube, DataType, Interleave, SceneMetadata};

/// Scene metadata rendered in the XML layout the ingest stage reads.
pub fn metadata_xml(m: &SceneMetadata) -> String {
    let g = &m.geometry;
    let mut xml = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<scene>\n");
    let _ = writeln!(xml, "  <sceneId>{}</sceneId>", m.scene_id);
    let _ = writeln!(xml, "  <acquisitionDate>{}</acquisitionDate>", m.acquisition_date);
    let _ = writeln!(xml, "  <acquisitionTime>{}Z</acquisitionTime>", m.acquisition_time);
    let _ = writeln!(
        xml,
        "  <sunZenith>{:?}</sunZenith><sunAzimuth>{:?}</sunAzimuth><viewZenith>{:?}</viewZenith><viewAzimuth>{:?}</viewAzimuth>",
        g.sza, g.saa, g.vza, g.vaa
    );
    for (name, v) in [("aod550", m.aod550), ("tcwv", m.tcwv), ("tco3", m.tco3)] {
        if let Some(v) = v {
            let _ = writeln!(xml, "  <{name}>{v:?}</{name}>");
        }
    }
    if let Some(b) = &m.bbox {
        let _ = writeln!(xml, "  <boundingBox>{} {} {} {}</boundingBox>", b.west, b.south, b.east, b.north);
    }
    xml.push_str("  <bandCharacterisation>\n");
    for (b, s) in m.bands.iter().zip(&m.band_scaling) {
        let _ = writeln!(
            xml,
            "    <band index=\"{}\"><centerWavelength>{:?}</centerWavelength><fwhm>{:?}</fwhm><gain>{:?}</gain><offset>{:?}</offset></band>",
            b.index, b.center_wavelength, b.fwhm, s.gain, s.offset
        );
    }
    xml.push_str("  </bandCharacterisation>\n</scene>\n");
    xml
}

/// Writes metadata XML plus an f32 BSQ raster into `dir`.
pub fn write_scene_dir(scene: &Scene, dir: &Path) {
    fs::create_dir_all(dir).unwrap();
    fs::write(dir.join("scene.xml"), metadata_xml(&scene.metadata)).unwrap();
    let (header, payload) = write_cube(&scene.cube, DataType::Float32, Interleave::Bsq, None, None).unwrap();
    fs::write(dir.join("radiance.hdr"), header).unwrap();
    fs::write(dir.join("radiance.bsq"), payload).unwrap();
}

/// Synthetic scene written to `dir`; returns the in-memory scene.
pub fn synthetic_scene_dir(rows: usize, cols: usize, dir: &Path) -> Scene {
    let (scene, _, _) = synthetic_scene(rows, cols, Some(1)).unwrap();
    write_scene_dir(&scene, dir);
    scene
}

pub fn read(path: &Path) -> Vec<u8> {
    fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
