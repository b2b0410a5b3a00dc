//! Ground-truth labels and detection metrics.

mod labels;
mod metrics;

pub use labels::{format_obb_labels, parse_obb_labels, read_obb_labels, GroundTruthBox};
pub use metrics::{
    accuracy, average_precision, average_precision_images, map_range, map_range_images,
    match_detections, precision, recall, ClassReport, ConfusionCounts, DetectionMatch, EvalImage,
    MapReport, MatchResult, PrCurve, IOU_THRESHOLDS,
};
