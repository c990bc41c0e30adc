//! Manifold files, the analysis pipeline and report emission.

pub mod pipeline;
pub mod report;
pub mod spec;

use crsing::Complex64;

pub use pipeline::{run_pipeline, Depth, PipelineError, PipelineOptions, Stage};
pub use report::AnalysisReport;
pub use spec::{emit_spec, parse_spec, to_embedding, ManifoldSpec, SpecError};

/// Point cloud from CSV rows of 2n reals (x1, y1, x2, y2, ...). A header
/// row is skipped when it does not parse as numbers.
pub fn read_cloud(text: &str) -> Result<Vec<Vec<Complex64>>, SpecError> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out: Vec<Vec<Complex64>> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| SpecError::Syntax {
            line: e.position().map_or(0, |p| p.line() as usize),
            column: 0,
            message: e.to_string(),
        })?;
        let vals: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let vals = match vals {
            Ok(v) => v,
            Err(_) if i == 0 => continue,
            Err(e) => {
                return Err(SpecError::Field {
                    path: format!("row {}", i + 1),
                    message: e.to_string(),
                })
            }
        };
        if vals.len() % 2 != 0 || vals.is_empty() {
            return Err(SpecError::Field {
                path: format!("row {}", i + 1),
                message: format!("expected an even number of coordinates, got {}", vals.len()),
            });
        }
        let z: Vec<Complex64> = vals.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
        if let Some(first) = out.first() {
            if first.len() != z.len() {
                return Err(SpecError::Field {
                    path: format!("row {}", i + 1),
                    message: format!("expected {} coordinates, got {}", 2 * first.len(), vals.len()),
                });
            }
        }
        out.push(z);
    }
    Ok(out)
}
