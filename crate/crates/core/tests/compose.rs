mod common;

use proptest::prelude::*;
use synthcrowd::compose::{composite, feather_band, ratio_image, BackgroundPlate, MAX_RATIO};
use synthcrowd::raster::{render, render_with, FrameBuffer, RenderOptions};
use synthcrowd::scanning::classes::FLOOR;
use synthcrowd::seed::SeedStream;

use common::{random_scene, template};

#[test]
fn empty_scene_with_unit_ratio_reproduces_the_plate() {
    let t = template();
    let (scene, camera) = random_scene(&t, SeedStream::new(3), 160, 120);
    let empty = render(&scene.environment_only(), &camera);
    let plate = BackgroundPlate::procedural("cam", 160, 120, SeedStream::new(4));
    let out = composite(&plate, &empty, &vec![1.0; empty.pixel_count()]).unwrap();
    assert_eq!(out, plate.rgb);
    // the ratio of a render to itself is 1 wherever it is defined
    let ratios = ratio_image(&empty, &empty.rgb).unwrap();
    assert!(ratios.iter().all(|&r| r == 1.0));
}

#[test]
fn unit_ratio_keeps_the_plate_outside_the_band() {
    let t = template();
    for s in 0..5 {
        let (scene, camera) = random_scene(&t, SeedStream::new(50).child(s), 160, 120);
        let fb = render(&scene, &camera);
        let plate = BackgroundPlate::procedural("cam", 160, 120, SeedStream::new(s));
        let out = composite(&plate, &fb, &vec![1.0; fb.pixel_count()]).unwrap();
        let band = feather_band(&fb);
        for i in 0..fb.pixel_count() {
            let px = &out[3 * i..3 * i + 3];
            if fb.instance[i] > 0 {
                assert_eq!(px, &fb.rgb[3 * i..3 * i + 3]);
            } else if !band[i] {
                assert_eq!(px, &plate.rgb[3 * i..3 * i + 3]);
            }
        }
    }
}

#[test]
fn shadow_ratios_follow_the_channel_quotients() {
    let t = template();
    let (scene, camera) = random_scene(&t, SeedStream::new(8), 200, 150);
    let full = render(&scene, &camera);
    let bg = render_with(&scene.environment_only(), &camera, &RenderOptions::default());
    let ratios = ratio_image(&full, &bg.rgb).unwrap();
    let plate = BackgroundPlate::procedural("cam", 200, 150, SeedStream::new(9));
    let out = composite(&plate, &full, &ratios).unwrap();
    let band = feather_band(&full);
    let mut shadowed = 0;
    for i in 0..full.pixel_count() {
        if full.instance[i] > 0 {
            continue;
        }
        // empty background channels (outside the room) count as unchanged
        let q: Vec<f64> = (0..3)
            .map(|c| if bg.rgb[3 * i + c] == 0 { 1.0 } else { full.rgb[3 * i + c] as f64 / bg.rgb[3 * i + c] as f64 })
            .collect();
        let expected = (q[0] + q[1] + q[2]) / 3.0;
        assert!((ratios[i] - expected.min(MAX_RATIO)).abs() < 1e-6);
        if expected < 1.0 {
            assert_eq!(full.semantic[i], FLOOR);
            shadowed += 1;
            if !band[i] {
                for c in 0..3 {
                    let want = (plate.rgb[3 * i + c] as f64 * expected).round();
                    assert_eq!(out[3 * i + c] as f64, want);
                }
            }
        }
    }
    assert!(shadowed > 50, "{shadowed} shadowed pixels");
}

fn arb_case() -> impl Strategy<Value = (FrameBuffer, Vec<u8>, Vec<f64>)> {
    (2u32..9, 2u32..9).prop_flat_map(|(w, h)| {
        let n = (w * h) as usize;
        (
            proptest::collection::vec(any::<u8>(), 3 * n),
            proptest::collection::vec(prop_oneof![3 => Just(0u8), 1 => 1u8..4], n),
            proptest::collection::vec(any::<u8>(), 3 * n),
            proptest::collection::vec(0.0..MAX_RATIO, n),
        )
            .prop_map(move |(rgb, instance, plate, ratios)| {
                let mut fb = FrameBuffer::empty(w, h);
                fb.rgb = rgb;
                fb.instance = instance;
                (fb, plate, ratios)
            })
    })
}

proptest! {
    #[test]
    fn compositing_rules((fb, plate_rgb, ratios) in arb_case()) {
        let (w, h) = (fb.width as usize, fb.height as usize);
        let plate = BackgroundPlate::new("c", fb.width, fb.height, plate_rgb.clone()).unwrap();
        let out = composite(&plate, &fb, &ratios).unwrap();
        let band = feather_band(&fb);
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                for c in 0..3 {
                    let base = (plate_rgb[3 * i + c] as f64 * ratios[i]).round().min(255.0);
                    let got = out[3 * i + c] as f64;
                    if fb.instance[i] > 0 {
                        prop_assert_eq!(out[3 * i + c], fb.rgb[3 * i + c]);
                    } else if band[i] {
                        let fg: Vec<f64> = (y.saturating_sub(1)..(y + 2).min(h))
                            .flat_map(|ny| (x.saturating_sub(1)..(x + 2).min(w)).map(move |nx| ny * w + nx))
                            .filter(|&j| fb.instance[j] > 0)
                            .map(|j| fb.rgb[3 * j + c] as f64)
                            .collect();
                        let mean = fg.iter().sum::<f64>() / fg.len() as f64;
                        prop_assert_eq!(got, (0.5 * base + 0.5 * mean).round());
                    } else {
                        prop_assert_eq!(got, base);
                    }
                }
            }
        }
    }

    #[test]
    fn ratios_are_bounded(full in proptest::collection::vec(any::<u8>(), 48), bg in proptest::collection::vec(any::<u8>(), 48)) {
        let mut fb = FrameBuffer::empty(4, 4);
        fb.rgb = full;
        for r in ratio_image(&fb, &bg).unwrap() {
            prop_assert!((0.0..=MAX_RATIO).contains(&r));
        }
    }
}
