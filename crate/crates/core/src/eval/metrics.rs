use std::fmt::Write as _;

use super::GroundTruthBox;
use crate::error::{Error, Result};
use crate::obb::rotated_iou;
use crate::pipeline::{CrosswalkClass, Detection};

/// IoU thresholds 0.50, 0.55, ..., 0.95.
pub const IOU_THRESHOLDS: [f64; 10] = [0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    /// Only known when the caller supplies an explicit negative set.
    pub tn: Option<u64>,
}

impl ConfusionCounts {
    pub fn precision_defined(&self) -> bool {
        self.tp + self.fp > 0
    }

    pub fn recall_defined(&self) -> bool {
        self.tp + self.fn_ > 0
    }

    fn add(&mut self, other: &ConfusionCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn = match (self.tn, other.tn) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
    }
}

/// TP / (TP + FP); 0 when there are no detections.
pub fn precision(c: &ConfusionCounts) -> f64 {
    if c.precision_defined() {
        c.tp as f64 / (c.tp + c.fp) as f64
    } else {
        0.0
    }
}

/// TP / (TP + FN); 0 when there is no ground truth.
pub fn recall(c: &ConfusionCounts) -> f64 {
    if c.recall_defined() {
        c.tp as f64 / (c.tp + c.fn_) as f64
    } else {
        0.0
    }
}

pub fn accuracy(c: &ConfusionCounts) -> Result<f64> {
    let tn = c
        .tn
        .ok_or_else(|| Error::Unsupported("accuracy needs a true-negative count".into()))?;
    let total = c.tp + c.fp + c.fn_ + tn;
    if total == 0 {
        return Ok(0.0);
    }
    Ok((c.tp + tn) as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionMatch {
    pub det_index: usize,
    pub gt_index: Option<usize>,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub counts: ConfusionCounts,
    /// One entry per detection, in processing (score) order.
    pub matches: Vec<DetectionMatch>,
}

/// Detection indices by descending score, ties kept in input order.
fn score_order(dets: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score.total_cmp(&dets[a].score));
    order
}

/// Greedy one-to-one matching. Detections are visited by descending score and
/// each takes the unmatched same-class ground truth with the highest IoU, if
/// that IoU reaches `iou_threshold`. Ties go to the lower ground-truth index.
pub fn match_detections(dets: &[Detection], gts: &[GroundTruthBox], iou_threshold: f64) -> MatchResult {
    let mut taken = vec![false; gts.len()];
    let mut matches = Vec::with_capacity(dets.len());
    let mut counts = ConfusionCounts::default();
    for di in score_order(dets) {
        let det = &dets[di];
        let mut best: Option<(usize, f64)> = None;
        for (gi, gt) in gts.iter().enumerate() {
            if taken[gi] || gt.class != det.class {
                continue;
            }
            let iou = rotated_iou(&det.bbox, &gt.bbox);
            if iou >= iou_threshold && best.map_or(true, |(_, b)| iou > b) {
                best = Some((gi, iou));
            }
        }
        match best {
            Some((gi, iou)) => {
                taken[gi] = true;
                counts.tp += 1;
                matches.push(DetectionMatch { det_index: di, gt_index: Some(gi), iou });
            }
            None => {
                counts.fp += 1;
                matches.push(DetectionMatch { det_index: di, gt_index: None, iou: 0.0 });
            }
        }
    }
    counts.fn_ = taken.iter().filter(|t| !**t).count() as u64;
    MatchResult { counts, matches }
}

/// One image's detections and labels.
#[derive(Debug, Clone, Copy)]
pub struct EvalImage<'a> {
    pub detections: &'a [Detection],
    pub ground_truth: &'a [GroundTruthBox],
}

/// Precision / recall after each detection in ranked order.
#[derive(Debug, Clone, PartialEq)]
pub struct PrCurve {
    pub recall: Vec<f64>,
    pub precision: Vec<f64>,
    pub gt_count: usize,
}

impl PrCurve {
    /// `outcomes` are (score, is_tp) pairs; they are ranked here by score.
    fn from_outcomes(mut outcomes: Vec<(f64, bool)>, gt_count: usize) -> Self {
        outcomes.sort_by(|a, b| b.0.total_cmp(&a.0));
        let (mut tp, mut fp) = (0usize, 0usize);
        let mut recall = Vec::with_capacity(outcomes.len());
        let mut precision = Vec::with_capacity(outcomes.len());
        for (_, hit) in outcomes {
            if hit {
                tp += 1;
            } else {
                fp += 1;
            }
            recall.push(if gt_count == 0 { 0.0 } else { tp as f64 / gt_count as f64 });
            precision.push(tp as f64 / (tp + fp) as f64);
        }
        Self { recall, precision, gt_count }
    }

    /// Area under the monotone precision envelope. `None` without ground truth.
    pub fn average_precision(&self) -> Option<f64> {
        if self.gt_count == 0 {
            return None;
        }
        let mut envelope = self.precision.clone();
        for i in (0..envelope.len().saturating_sub(1)).rev() {
            envelope[i] = envelope[i].max(envelope[i + 1]);
        }
        let mut ap = 0.0;
        let mut prev_recall = 0.0;
        for (r, p) in self.recall.iter().zip(&envelope) {
            ap += (r - prev_recall) * p;
            prev_recall = *r;
        }
        Some(ap.clamp(0.0, 1.0))
    }
}

fn class_curve(images: &[EvalImage<'_>], class: CrosswalkClass, iou_threshold: f64) -> (PrCurve, ConfusionCounts) {
    let mut outcomes = Vec::new();
    let mut gt_count = 0;
    let mut counts = ConfusionCounts::default();
    for img in images {
        let dets: Vec<Detection> = img.detections.iter().filter(|d| d.class == class).copied().collect();
        let gts: Vec<GroundTruthBox> = img.ground_truth.iter().filter(|g| g.class == class).copied().collect();
        gt_count += gts.len();
        let m = match_detections(&dets, &gts, iou_threshold);
        counts.add(&m.counts);
        outcomes.extend(m.matches.iter().map(|dm| (dets[dm.det_index].score, dm.gt_index.is_some())));
    }
    (PrCurve::from_outcomes(outcomes, gt_count), counts)
}

/// AP of one class at one IoU threshold over several images.
pub fn average_precision_images(images: &[EvalImage<'_>], class: CrosswalkClass, iou_threshold: f64) -> Option<f64> {
    class_curve(images, class, iou_threshold).0.average_precision()
}

/// AP for a single image. Detections and labels of every class are pooled,
/// matching still requires equal classes.
pub fn average_precision(dets: &[Detection], gts: &[GroundTruthBox], iou_threshold: f64) -> Option<f64> {
    let m = match_detections(dets, gts, iou_threshold);
    let outcomes = m.matches.iter().map(|dm| (dets[dm.det_index].score, dm.gt_index.is_some())).collect();
    PrCurve::from_outcomes(outcomes, gts.len()).average_precision()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub class: CrosswalkClass,
    pub gt_count: usize,
    pub det_count: usize,
    pub ap50: f64,
    pub ap50_95: f64,
    /// Counts at IoU 0.5.
    pub counts: ConfusionCounts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapReport {
    pub map50: f64,
    pub map50_95: f64,
    pub counts: ConfusionCounts,
    /// Classes that have ground truth; others are left out of the means.
    pub classes: Vec<ClassReport>,
    pub images: usize,
}

impl MapReport {
    pub fn precision(&self) -> f64 {
        precision(&self.counts)
    }

    pub fn recall(&self) -> f64 {
        recall(&self.counts)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let flag = |defined: bool| if defined { "" } else { " (undefined, reported as 0)" };
        let _ = writeln!(s, "images: {}", self.images);
        let _ = writeln!(s, "map50: {:.6}", self.map50);
        let _ = writeln!(s, "map50_95: {:.6}", self.map50_95);
        let _ = writeln!(s, "precision: {:.6}{}", self.precision(), flag(self.counts.precision_defined()));
        let _ = writeln!(s, "recall: {:.6}{}", self.recall(), flag(self.counts.recall_defined()));
        let _ = writeln!(s, "tp: {}", self.counts.tp);
        let _ = writeln!(s, "fp: {}", self.counts.fp);
        let _ = writeln!(s, "fn: {}", self.counts.fn_);
        s.push_str("class,gt,detections,ap50,ap50_95,precision,recall\n");
        for c in &self.classes {
            let _ = writeln!(
                s,
                "{},{},{},{:.6},{:.6},{:.6},{:.6}",
                c.class.name(),
                c.gt_count,
                c.det_count,
                c.ap50,
                c.ap50_95,
                precision(&c.counts),
                recall(&c.counts)
            );
        }
        s
    }
}

/// mAP@0.5 and mAP@[0.5:0.95] over several images.
pub fn map_range_images(images: &[EvalImage<'_>]) -> Result<MapReport> {
    let mut classes = Vec::new();
    let mut counts = ConfusionCounts::default();
    for class in CrosswalkClass::ALL {
        let mut aps = Vec::with_capacity(IOU_THRESHOLDS.len());
        let mut class_counts = ConfusionCounts::default();
        let mut gt_count = 0;
        for (i, &t) in IOU_THRESHOLDS.iter().enumerate() {
            let (curve, c) = class_curve(images, class, t);
            gt_count = curve.gt_count;
            if i == 0 {
                class_counts = c;
            }
            if let Some(ap) = curve.average_precision() {
                aps.push(ap);
            }
        }
        if gt_count == 0 {
            // detections of an unlabelled class are still false positives
            let fp: u64 = images
                .iter()
                .map(|img| img.detections.iter().filter(|d| d.class == class).count() as u64)
                .sum();
            counts.fp += fp;
            continue;
        }
        counts.add(&class_counts);
        classes.push(ClassReport {
            class,
            gt_count,
            det_count: (class_counts.tp + class_counts.fp) as usize,
            ap50: aps[0],
            ap50_95: aps.iter().sum::<f64>() / aps.len() as f64,
            counts: class_counts,
        });
    }
    if classes.is_empty() {
        return Err(Error::Validation("no ground-truth boxes to evaluate against".into()));
    }
    let n = classes.len() as f64;
    Ok(MapReport {
        map50: classes.iter().map(|c| c.ap50).sum::<f64>() / n,
        map50_95: classes.iter().map(|c| c.ap50_95).sum::<f64>() / n,
        counts,
        classes,
        images: images.len(),
    })
}

pub fn map_range(dets: &[Detection], gts: &[GroundTruthBox]) -> Result<MapReport> {
    map_range_images(&[EvalImage { detections: dets, ground_truth: gts }])
}
