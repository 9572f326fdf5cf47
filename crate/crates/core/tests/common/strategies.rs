//! proptest generators for valid documents on the default canvas.

use animlayout::st::{
    Animation, BBox, Background, Banner, BannerPosition, Canvas, Color, Keyframe, LayoutObject, ObjectAnimation,
    TextboxColor, VideoSt,
};
use proptest::prelude::*;

pub const W: f64 = 1920.0;
pub const H: f64 = 1080.0;

pub fn color() -> impl Strategy<Value = Color> {
    any::<[u8; 3]>().prop_map(|[r, g, b]| Color::rgb(r, g, b))
}

/// Box inside `outer`, on a quarter-pixel grid.
pub fn bbox_in(outer: BBox) -> impl Strategy<Value = BBox> {
    let (qw, qh) = ((outer.w * 4.0) as u32, (outer.h * 4.0) as u32);
    (0..qw.max(1), 0..qh.max(1), 1..=qw.max(1), 1..=qh.max(1)).prop_map(move |(x, y, w, h)| {
        let x1 = f64::from(x) / 4.0;
        let y1 = f64::from(y) / 4.0;
        let w = (f64::from(w) / 4.0).min(outer.w - x1);
        let h = (f64::from(h) / 4.0).min(outer.h - y1);
        BBox::new(outer.x1 + x1, outer.y1 + y1, w, h)
    })
}

pub fn canvas_box() -> BoxedStrategy<BBox> {
    bbox_in(BBox::new(0.0, 0.0, W, H)).boxed()
}

pub fn text() -> impl Strategy<Value = String> {
    "[A-Za-z][A-Za-z0-9 !&'-]{0,18}"
}

pub fn object_in(outer: BBox) -> impl Strategy<Value = LayoutObject> {
    let textbox = prop_oneof![Just(TextboxColor::Transparent), color().prop_map(TextboxColor::Solid)];
    prop_oneof![
        bbox_in(outer).prop_map(LayoutObject::logo),
        (bbox_in(outer), text(), color(), textbox).prop_map(|(b, t, c, tb)| LayoutObject::text(b, t, c, tb)),
    ]
}

pub fn banner_geometry(position: BannerPosition) -> BBox {
    match position {
        BannerPosition::Bottom => BBox::new(0.0, H - 100.0, W, 100.0),
        BannerPosition::TopLeft => BBox::new(0.0, 0.0, 600.0, 90.0),
        BannerPosition::TopRight => BBox::new(W - 600.0, 0.0, 600.0, 90.0),
    }
}

pub fn banners() -> impl Strategy<Value = Vec<Banner>> {
    let positions = [BannerPosition::Bottom, BannerPosition::TopLeft, BannerPosition::TopRight];
    proptest::sample::subsequence(positions.to_vec(), 0..=3).prop_flat_map(|ps| {
        ps.into_iter()
            .map(|p| {
                let b = banner_geometry(p);
                (color(), prop::collection::vec(object_in(b), 0..=2)).prop_map(move |(c, objects)| Banner {
                    position: p,
                    bbox: b,
                    color: c,
                    objects,
                })
            })
            .collect::<Vec<_>>()
    })
}

pub fn background() -> impl Strategy<Value = Background> {
    prop_oneof![
        color().prop_map(Background::SolidColor),
        "[a-z][a-z ]{2,30}".prop_map(|caption| Background::Image { caption }),
    ]
}

/// Keyframes with strictly increasing frames below `duration`.
pub fn keyframes(duration: u32) -> impl Strategy<Value = Vec<Keyframe>> {
    prop::collection::btree_set(0..duration, 1..=4usize).prop_flat_map(|frames| {
        let frames: Vec<u32> = frames.into_iter().collect();
        prop::collection::vec(canvas_box(), frames.len())
            .prop_map(move |boxes| frames.iter().zip(boxes).map(|(&f, b)| Keyframe::new(f, b)).collect())
    })
}

pub fn animation(objects: usize) -> impl Strategy<Value = Animation> {
    (1..=90u32, prop::collection::vec(any::<bool>(), objects)).prop_flat_map(|(duration, animated)| {
        let tracks: Vec<_> = animated
            .iter()
            .enumerate()
            .filter(|(_, a)| **a)
            .map(|(i, _)| keyframes(duration).prop_map(move |keyframes| ObjectAnimation { object_index: i, keyframes }))
            .collect();
        tracks.prop_map(move |tracks| Animation { duration, tracks })
    })
}

pub fn document() -> impl Strategy<Value = VideoSt> {
    (banners(), prop::collection::vec(object_in(BBox::new(0.0, 0.0, W, H)), 0..=4), background()).prop_flat_map(
        |(banners, foreground, background)| {
            let n = foreground.len();
            animation(n).prop_map(move |animation| VideoSt {
                canvas: Canvas::default(),
                banners: banners.clone(),
                foreground: foreground.clone(),
                background: background.clone(),
                animation,
            })
        },
    )
}
