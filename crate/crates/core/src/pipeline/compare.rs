use std::fs;

use serde::Serialize;

use crate::metrics::{compare_spectra, parse_reference_spectrum, ComparisonReport, MetricsError, SpectrumSample};

use super::cli::CompareArgs;
use super::error::{AtStage, PipelineError, Stage, StageError};
use super::export::{load_product_spectrum, REPORT_FILE};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonSet {
    pub per_reference: Vec<ComparisonReport>,
    /// Unweighted mean over references.
    pub aggregate: ComparisonReport,
}

/// Unweighted mean of each statistic; `n` is the total pair count.
pub fn aggregate(reports: &[ComparisonReport], window: (f64, f64)) -> Option<ComparisonReport> {
    if reports.is_empty() {
        return None;
    }
    let k = reports.len() as f64;
    let mean = |f: fn(&ComparisonReport) -> f64| reports.iter().map(f).sum::<f64>() / k;
    Some(ComparisonReport {
        label: "aggregate".into(),
        sam_deg: mean(|r| r.sam_deg),
        rmse: mean(|r| r.rmse),
        bias: mean(|r| r.bias),
        std: mean(|r| r.std),
        n: reports.iter().map(|r| r.n).sum(),
        window,
    })
}

pub fn compare_against_reference(
    derived: &SpectrumSample,
    references: &[SpectrumSample],
    window: (f64, f64),
) -> Result<ComparisonSet, MetricsError> {
    let per_reference = references
        .iter()
        .map(|r| compare_spectra(derived, r, window))
        .collect::<Result<Vec<_>, _>>()?;
    let aggregate = aggregate(&per_reference, window).ok_or(MetricsError::InvalidSpectrum("no reference spectra".into()))?;
    Ok(ComparisonSet {
        per_reference,
        aggregate,
    })
}

/// `compare` subcommand: extracts the pixel spectrum from a product, compares
/// it with every reference file and records the result in the product report.
pub fn run_compare(args: &CompareArgs) -> Result<ComparisonSet, PipelineError> {
    let stage = Stage::Compare;
    let (row, col) = args.pixel;
    let derived = load_product_spectrum(&args.product, row, col, args.quantity).at(stage)?;
    let mut references = Vec::with_capacity(args.reference.len());
    for path in &args.reference {
        let text = fs::read_to_string(path).map_err(|e| StageError::io(path, e)).at(stage)?;
        let label = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        references.push(parse_reference_spectrum(&text, &label).at(stage)?);
    }
    let set = compare_against_reference(&derived, &references, args.window).at(stage)?;

    let report_path = args.product.join(REPORT_FILE);
    let mut report: serde_json::Value = match fs::read_to_string(&report_path) {
        Ok(text) => serde_json::from_str(&text)
            .map_err(|e| StageError::Config(format!("{}: {e}", report_path.display())))
            .at(stage)?,
        Err(_) => serde_json::json!({}),
    };
    let serialized = serde_json::to_value(&set).map_err(|e| StageError::Config(e.to_string())).at(stage)?;
    match report.as_object_mut() {
        Some(obj) => {
            obj.insert("comparisons".into(), serialized);
        }
        None => return Err(StageError::Config(format!("{} is not a JSON object", report_path.display()))).at(stage),
    }
    let text = serde_json::to_string_pretty(&report).map_err(|e| StageError::Config(e.to_string())).at(stage)?;
    fs::write(&report_path, text).map_err(|e| StageError::io(&report_path, e)).at(stage)?;
    Ok(set)
}
