use super::detection::Detection;
use crate::obb::rotated_iou;

/// Indices of the detections kept by greedy rotated NMS, in keep order.
///
/// Candidates are visited by descending score; equal scores keep input
/// order. A candidate is suppressed when its IoU with an already kept
/// detection reaches `iou_thresh` (and, unless `class_agnostic`, the classes
/// match).
pub fn nms_indices(dets: &[Detection], iou_thresh: f64, class_agnostic: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score.total_cmp(&dets[a].score));
    let mut suppressed = vec![false; dets.len()];
    let mut keep = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if suppressed[i] {
            continue;
        }
        keep.push(i);
        for &j in &order[pos + 1..] {
            if suppressed[j] || (!class_agnostic && dets[j].class != dets[i].class) {
                continue;
            }
            if rotated_iou(&dets[i].bbox, &dets[j].bbox) >= iou_thresh {
                suppressed[j] = true;
            }
        }
    }
    keep
}

pub fn rotated_nms(dets: &[Detection], iou_thresh: f64, class_agnostic: bool) -> Vec<Detection> {
    nms_indices(dets, iou_thresh, class_agnostic)
        .into_iter()
        .map(|i| dets[i])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obb::OrientedBox;
    use crate::pipeline::CrosswalkClass;
    use proptest::prelude::*;

    fn det(cx: f64, w: f64, score: f64, class: CrosswalkClass) -> Detection {
        Detection::new(OrientedBox::new(cx, 0.0, w, 1.0, 0.0).unwrap(), class, score).unwrap()
    }

    #[test]
    fn single_and_duplicate() {
        let a = det(0.0, 2.0, 0.9, CrosswalkClass::Striped);
        assert_eq!(rotated_nms(&[a], 0.5, true), vec![a]);
        let b = det(0.0, 2.0, 0.8, CrosswalkClass::Striped);
        assert_eq!(rotated_nms(&[b, a], 0.5, true), vec![a]);
    }

    #[test]
    fn chain_keeps_ends() {
        // IoU(a,b) = IoU(b,c) = 0.6, IoU(a,c) = 0.25
        let a = det(0.0, 8.0, 0.9, CrosswalkClass::Striped);
        let b = det(2.0, 8.0, 0.8, CrosswalkClass::Striped);
        let c = det(4.0, 8.0, 0.7, CrosswalkClass::Striped);
        assert!((rotated_iou(&a.bbox, &b.bbox) - 0.6).abs() < 1e-12);
        assert!(rotated_iou(&a.bbox, &c.bbox) < 0.5);
        assert_eq!(rotated_nms(&[c, b, a], 0.55, true), vec![a, c]);
    }

    #[test]
    fn class_aware_keeps_other_class() {
        let a = det(0.0, 2.0, 0.9, CrosswalkClass::Striped);
        let b = det(0.0, 2.0, 0.8, CrosswalkClass::ParallelLines);
        assert_eq!(rotated_nms(&[a, b], 0.5, true), vec![a]);
        assert_eq!(rotated_nms(&[a, b], 0.5, false), vec![a, b]);
    }

    #[test]
    fn ties_keep_input_order() {
        let a = det(0.0, 2.0, 0.5, CrosswalkClass::Striped);
        let b = det(0.1, 2.0, 0.5, CrosswalkClass::Striped);
        assert_eq!(rotated_nms(&[b, a], 0.5, true), vec![b]);
        assert_eq!(rotated_nms(&[a, b], 0.5, true), vec![a]);
    }

    fn arb_dets() -> impl Strategy<Value = Vec<Detection>> {
        prop::collection::vec(
            (0.0..40.0f64, 0.0..40.0f64, 2.0..15.0f64, 2.0..15.0f64, -1.6..1.6f64, 0.0..=1.0f64, 0u32..2),
            0..30,
        )
        .prop_map(|v| {
            v.into_iter()
                .map(|(x, y, w, h, t, s, c)| {
                    Detection::new(OrientedBox::new(x, y, w, h, t).unwrap(), CrosswalkClass::from_id(c).unwrap(), s).unwrap()
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn output_is_independent_and_idempotent(dets in arb_dets(), tau in 0.2..0.8f64, agnostic: bool) {
            let kept = rotated_nms(&dets, tau, agnostic);
            for (i, a) in kept.iter().enumerate() {
                for b in &kept[i + 1..] {
                    if agnostic || a.class == b.class {
                        prop_assert!(rotated_iou(&a.bbox, &b.bbox) < tau);
                    }
                }
            }
            prop_assert_eq!(rotated_nms(&kept, tau, agnostic), kept.clone());
        }

        #[test]
        fn suppressed_have_stronger_cover(dets in arb_dets(), tau in 0.2..0.8f64) {
            let keep = nms_indices(&dets, tau, true);
            for (i, d) in dets.iter().enumerate() {
                if keep.contains(&i) { continue; }
                prop_assert!(keep.iter().any(|&k| dets[k].score >= d.score && rotated_iou(&dets[k].bbox, &d.bbox) >= tau));
            }
        }
    }
}
