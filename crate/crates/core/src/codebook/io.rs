//! JSON codebook documents.
//!
//! Each beam carries its level, index, centre angle (degrees for reading,
//! radians for exact reload), sinc width and the non-zero weights as
//! `[row, col, re, im]` tuples, row being the vertical and col the
//! horizontal element index. Floats are written in shortest round-trip form,
//! so export followed by import reproduces the codebook bit for bit.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::array::{ArrayGeometry, WeightMatrix};
use crate::{Error, Result};

use super::{BeamSpec, CodebookLevel, HierarchicalCodebook, LevelSpec};

const FORMAT: &str = "hbf-bm/codebook";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    format: String,
    version: u32,
    geometry: ArrayGeometry,
    levels: Vec<LevelDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelDoc {
    spec: LevelSpec,
    beams: Vec<BeamDoc>,
    children: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BeamDoc {
    level: usize,
    index: usize,
    center_azimuth_deg: f64,
    center_azimuth_rad: f64,
    width_param: Option<f64>,
    truncation: f64,
    weights: Vec<(usize, usize, f64, f64)>,
}

pub fn export_codebook(cb: &HierarchicalCodebook) -> String {
    let levels = cb
        .levels()
        .iter()
        .map(|l| LevelDoc {
            spec: l.spec.clone(),
            beams: l.beams.iter().map(beam_doc).collect(),
            children: l.children.clone(),
        })
        .collect();
    let doc = Document {
        format: FORMAT.into(),
        version: VERSION,
        geometry: *cb.geometry(),
        levels,
    };
    serde_json::to_string_pretty(&doc).expect("codebook serializes")
}

fn beam_doc(b: &BeamSpec) -> BeamDoc {
    let w = &b.weights;
    let mut weights = Vec::with_capacity(w.active_count());
    for h in 0..w.n_h() {
        for v in 0..w.n_v() {
            let e = w.get(h, v);
            if e != Complex64::new(0.0, 0.0) {
                weights.push((v, h, e.re, e.im));
            }
        }
    }
    BeamDoc {
        level: b.level,
        index: b.index,
        center_azimuth_deg: b.center_azimuth.to_degrees(),
        center_azimuth_rad: b.center_azimuth,
        width_param: b.width_param,
        truncation: b.truncation,
        weights,
    }
}

pub fn import_codebook(text: &str) -> Result<HierarchicalCodebook> {
    let doc: Document =
        serde_json::from_str(text).map_err(|e| Error::Format(format!("codebook: {e}")))?;
    if doc.format != FORMAT || doc.version != VERSION {
        return Err(Error::Format(format!(
            "expected {FORMAT} v{VERSION}, found {} v{}",
            doc.format, doc.version
        )));
    }
    let geom = doc.geometry;
    let levels = doc
        .levels
        .into_iter()
        .map(|l| {
            let beams = l
                .beams
                .into_iter()
                .map(|b| {
                    let mut entries = vec![Complex64::new(0.0, 0.0); geom.len()];
                    for (row, col, re, im) in b.weights {
                        if row >= geom.n_v() || col >= geom.n_h() {
                            return Err(Error::Format(format!(
                                "beam ({}, {}): element ({row}, {col}) outside the array",
                                b.level, b.index
                            )));
                        }
                        entries[col * geom.n_v() + row] = Complex64::new(re, im);
                    }
                    Ok(BeamSpec {
                        level: b.level,
                        index: b.index,
                        center_azimuth: b.center_azimuth_rad,
                        width_param: b.width_param,
                        truncation: b.truncation,
                        weights: WeightMatrix::new(geom.n_h(), geom.n_v(), entries)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(CodebookLevel {
                spec: l.spec,
                beams,
                children: l.children,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    HierarchicalCodebook::from_levels(geom, levels)
}

pub fn write_codebook(cb: &HierarchicalCodebook, path: &Path) -> Result<()> {
    fs::write(path, export_codebook(cb)).map_err(|e| Error::io(path, e))
}

pub fn read_codebook(path: &Path) -> Result<HierarchicalCodebook> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    import_codebook(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::build_codebook;

    #[test]
    fn round_trip_is_exact() {
        let g = ArrayGeometry::ura(16, 16, 0.5).unwrap();
        let cb = build_codebook(&g, &LevelSpec::default_levels()).unwrap();
        let text = export_codebook(&cb);
        let back = import_codebook(&text).unwrap();
        assert_eq!(back, cb);
        assert_eq!(export_codebook(&back), text);
    }

    #[test]
    fn rejects_foreign_documents() {
        assert!(import_codebook("{}").is_err());
        let g = ArrayGeometry::ura(4, 4, 0.5).unwrap();
        let spec = LevelSpec { count: 2, width: 1.0, span_deg: [-20.0, 20.0], truncation: 0.0 };
        let cb = build_codebook(&g, &[spec]).unwrap();
        let text = export_codebook(&cb).replace("hbf-bm/codebook", "other");
        assert!(matches!(import_codebook(&text), Err(Error::Format(_))));
    }
}
