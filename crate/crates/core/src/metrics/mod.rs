//! Layout and motion metrics: FMD, Overlap, maximum IoU and failure rate.

mod layout;
mod motion;

pub use layout::*;
pub use motion::*;

use rayon::prelude::*;
use serde::Serialize;

use crate::st::VideoSt;
use crate::validate::{failure_rate, ValidationReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("need at least 2 motion vectors, got {n}")]
    InsufficientSamples { n: usize },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("no documents to evaluate")]
    EmptyInput,
}

/// One generated output paired with the real layout for the same prompt.
#[derive(Debug, Clone)]
pub struct EvalPair {
    /// The decoded generated document; `None` when it failed validation.
    pub gen: Option<VideoSt>,
    pub real: VideoSt,
    pub report: ValidationReport,
}

/// The four headline numbers over a paired corpus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    /// `None` when either side has fewer than two motion vectors.
    pub fmd: Option<f64>,
    pub overlap: f64,
    pub miou: f64,
    pub failure_rate: f64,
    pub n: usize,
}

/// Overlap and mIoU average over the valid generated documents; FMD pools motion over
/// all real documents versus all valid generated ones.
pub fn evaluate(pairs: &[EvalPair], opts: OverlapOptions) -> Result<EvalReport, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let reports: Vec<ValidationReport> = pairs.iter().map(|p| p.report.clone()).collect();
    let failure = failure_rate(&reports).map_err(|_| MetricsError::EmptyInput)?;
    let valid: Vec<(&VideoSt, &VideoSt)> = pairs
        .iter()
        .filter_map(|p| p.gen.as_ref().map(|g| (g, &p.real)))
        .collect();
    let per_pair: Vec<(f64, f64)> = valid
        .par_iter()
        .map(|(g, r)| (overlap_with(g, opts), max_iou(g, r)))
        .collect();
    let mean = |f: fn(&(f64, f64)) -> f64| {
        if per_pair.is_empty() {
            0.0
        } else {
            per_pair.iter().map(f).sum::<f64>() / per_pair.len() as f64
        }
    };
    let real_vectors = corpus_motion_vectors(pairs.iter().map(|p| &p.real));
    let gen_vectors = corpus_motion_vectors(valid.iter().map(|(g, _)| *g));
    let fmd_value = match (gaussian_stats(&real_vectors), gaussian_stats(&gen_vectors)) {
        (Ok(r), Ok(g)) => Some(fmd(&r, &g)?),
        (r, g) => {
            log::warn!(
                "FMD undefined: {} real and {} generated motion vectors",
                r.map_or(real_vectors.len(), |s| s.n),
                g.map_or(gen_vectors.len(), |s| s.n)
            );
            None
        }
    };
    Ok(EvalReport {
        fmd: fmd_value,
        overlap: mean(|p| p.0),
        miou: mean(|p| p.1),
        failure_rate: failure,
        n: pairs.len(),
    })
}
