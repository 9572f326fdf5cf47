mod common;

use animlayout::st::{iou, parse_document, parse_st, serialize_document, BBox, StError, StStage, ViolationKind};
use common::strategies::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn parse_inverts_serialize(doc in document()) {
        let text = serialize_document(&doc);
        let back = parse_document(&text).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(&back, &doc);
        // canonical text is a fixed point
        prop_assert_eq!(serialize_document(&back), text);
    }

    #[test]
    fn canonical_text_ignores_key_order_and_spacing(doc in document()) {
        let text = serialize_document(&doc);
        let compact = serde_json::to_string(&serde_json::from_str::<serde_json::Value>(&text).unwrap()).unwrap();
        let reparsed = parse_st(&compact, StStage::Full).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(animlayout::st::serialize_st(&reparsed), text);
    }

    #[test]
    fn out_of_canvas_boxes_are_rejected_not_clamped(
        mut doc in document(),
        dx in 1.0f64..500.0,
        pick in any::<prop::sample::Index>(),
    ) {
        prop_assume!(!doc.foreground.is_empty());
        let i = pick.index(doc.foreground.len());
        let b = doc.foreground[i].bbox;
        doc.foreground[i].bbox = BBox::new(W - b.w + dx, b.y1, b.w, b.h);
        match parse_document(&serialize_document(&doc)) {
            Err(StError::SchemaViolation(vs)) => {
                prop_assert!(vs.iter().any(|v| v.kind == ViolationKind::Invariant && v.path.contains("foreground")));
            }
            other => prop_assert!(false, "expected a schema violation, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn iou_is_symmetric_and_reflexive(a in canvas_box(), b in canvas_box()) {
        prop_assert_eq!(iou(&a, &b), iou(&b, &a));
        prop_assert!((0.0..=1.0).contains(&iou(&a, &b)));
        prop_assert_eq!(iou(&a, &a), 1.0);
    }
}
