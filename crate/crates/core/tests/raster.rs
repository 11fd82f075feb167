mod common;

use std::sync::Arc;

use nalgebra::Vector3;
use synthcrowd::body_model::{PoseParams, ShapeParams};
use synthcrowd::raster::{
    dequantize_uv, joint_visibility, quantize_uv, render, render_with, DepthQuantizer, RenderOptions,
};
use synthcrowd::scanning::classes::{FLOOR, WALL};
use synthcrowd::scanning::LabelTexture;
use synthcrowd::scene::{AvatarInstance, Camera, Environment, EnvironmentConfig, SceneGraph};
use synthcrowd::seed::SeedStream;

use common::{random_scene, template, RayCaster};

const NEAR: f64 = 0.05;

#[test]
fn depth_and_uv_match_ray_casting() {
    let t = template();
    let q = DepthQuantizer::default();
    let (mut pixels, mut uv_exact) = (0usize, 0usize);
    for s in 0..12 {
        let (scene, camera) = random_scene(&t, SeedStream::new(900).child(s), 128, 96);
        let fb = render(&scene, &camera);
        fb.check_invariants(&q).unwrap();
        let caster = RayCaster::new(&scene);
        for y in 0..fb.height as usize {
            for x in 0..fb.width as usize {
                let i = y * fb.width as usize + x;
                let hit = caster.cast(&camera, x as f64 + 0.5, y as f64 + 0.5, NEAR);
                let Some(hit) = hit else {
                    assert_eq!(fb.depth_m[i], 0.0, "pixel ({x},{y}) has depth but the ray misses");
                    continue;
                };
                assert!(
                    (fb.depth_m[i] - hit.depth).abs() < 1e-4,
                    "depth at ({x},{y}): {} vs {}",
                    fb.depth_m[i],
                    hit.depth
                );
                assert_eq!(fb.instance[i], hit.instance, "owner at ({x},{y})");
                if hit.instance > 0 {
                    pixels += 1;
                    let uv = t.uv_coords[hit.triangle];
                    let u = (0..3).map(|k| hit.bary[k] * uv[k][0]).sum::<f64>();
                    let v = (0..3).map(|k| hit.bary[k] * uv[k][1]).sum::<f64>();
                    let (eu, ev) = (quantize_uv(u.clamp(0.0, 1.0)).unwrap(), quantize_uv(v.clamp(0.0, 1.0)).unwrap());
                    assert!((fb.u_q[i] as i32 - eu as i32).abs() <= 1 && (fb.v_q[i] as i32 - ev as i32).abs() <= 1);
                    uv_exact += usize::from(fb.u_q[i] == eu && fb.v_q[i] == ev);
                }
            }
        }
    }
    assert!(pixels > 5_000);
    // off-by-one codes only where the interpolated value sits on a bin edge
    assert!(uv_exact as f64 > 0.99 * pixels as f64, "{uv_exact} of {pixels}");
}

#[test]
fn invariants_hold_on_fuzzed_scenes() {
    let t = template();
    let q = DepthQuantizer::default();
    for s in 0..50 {
        let (scene, camera) = random_scene(&t, SeedStream::new(31).child(s), 160, 120);
        let fb = render(&scene, &camera);
        fb.check_invariants(&q).unwrap_or_else(|e| panic!("scene {s}: {e}"));
        assert_eq!(fb.avatars.len(), scene.avatars().len());
        assert!(fb.instance.iter().any(|&i| i > 0), "scene {s} shows nobody");
    }
}

#[test]
fn rendering_is_deterministic() {
    let t = template();
    for s in 0..3 {
        let (a, cam) = random_scene(&t, SeedStream::new(5).child(s), 200, 150);
        let (b, _) = random_scene(&t, SeedStream::new(5).child(s), 200, 150);
        let (fa, fb) = (render(&a, &cam), render(&b, &cam));
        assert_eq!(fa, fb);
    }
}

fn standing(t: &Arc<synthcrowd::body_model::AvatarTemplate>, id: u8, x: f64, y: f64) -> AvatarInstance {
    let mut pose = PoseParams::identity(t.joint_count());
    pose.root_translation = [x, y, 0.0];
    AvatarInstance {
        instance_id: id,
        template: Arc::clone(t),
        shape: ShapeParams::zeros(t.shape_count()),
        pose,
        labels: Arc::new(LabelTexture::ground_truth(t)),
    }
}

fn front_camera(distance: f64) -> Camera {
    Camera::look_at(
        "front",
        Vector3::new(0.0, -distance, 1.0),
        Vector3::new(0.0, 0.0, 0.9),
        Vector3::z(),
        300.0,
        320,
        240,
    )
    .unwrap()
}

#[test]
fn nearer_avatar_occludes_the_farther_one() {
    let t = template();
    let near = standing(&t, 1, 0.0, 0.0);
    let far = standing(&t, 2, 0.0, 1.0);
    let scene = SceneGraph::new(None, vec![far, near]).unwrap();
    let camera = front_camera(3.0);
    let fb = render(&scene, &camera);
    let count = |id: u8| fb.instance.iter().filter(|&&i| i == id).count();
    assert!(count(1) > 1000);
    // only the wider-spread parts of the farther body show
    assert!(count(2) < count(1) / 4, "{} vs {}", count(2), count(1));
    let alone = render(&SceneGraph::new(None, vec![standing(&t, 2, 0.0, 1.0)]).unwrap(), &camera);
    let visible_alone = alone.avatars[0].joints.iter().filter(|j| j.visible).count();
    let visible_behind =
        fb.avatars.iter().find(|a| a.instance_id == 2).unwrap().joints.iter().filter(|j| j.visible).count();
    assert!(visible_behind < visible_alone);
    let depth_of = |f: &synthcrowd::raster::FrameBuffer, id: u8| {
        let d: Vec<f64> = (0..f.pixel_count()).filter(|&i| f.instance[i] == id).map(|i| f.depth_m[i]).collect();
        d.iter().sum::<f64>() / d.len() as f64
    };
    let gap = depth_of(&alone, 2) - depth_of(&fb, 1);
    assert!((gap - 1.0).abs() < 0.1, "mean depth gap {gap}");
}

#[test]
fn walls_hide_avatars_outside_the_room() {
    let t = template();
    let env = Environment::octagon(&EnvironmentConfig::default()).unwrap();
    let outside = standing(&t, 1, 0.0, 7.0);
    let scene = SceneGraph::new(Some(env), vec![outside]).unwrap();
    let camera =
        Camera::look_at("c", Vector3::new(0.0, 0.0, 1.0), Vector3::new(0.0, 7.0, 0.9), Vector3::z(), 300.0, 320, 240)
            .unwrap();
    let fb = render(&scene, &camera);
    assert!(fb.instance.iter().all(|&i| i == 0));
    assert!(fb.semantic.iter().all(|&c| c == WALL || c == FLOOR));
    assert!(fb.avatars[0].joints.iter().all(|j| !j.visible));
    assert!(fb.avatars[0].joints.iter().any(|j| j.pixel.is_some()));
    let without = render(&scene.without_environment(), &camera);
    assert!(without.instance.iter().any(|&i| i == 1));
}

#[test]
fn visibility_recomputes_from_the_frame() {
    let t = template();
    let (scene, camera) = random_scene(&t, SeedStream::new(77), 200, 150);
    let fb = render(&scene, &camera);
    let vis = joint_visibility(&scene, &camera, &fb);
    for (a, v) in fb.avatars.iter().zip(&vis) {
        assert_eq!(&a.joints.iter().map(|j| j.visible).collect::<Vec<_>>(), v);
    }
}

#[test]
fn shadows_only_darken_the_floor() {
    let t = template();
    let env = Environment::octagon(&EnvironmentConfig::default()).unwrap();
    let scene = SceneGraph::new(Some(env), vec![standing(&t, 1, 0.0, 0.0)]).unwrap();
    let camera = front_camera(3.0);
    let lit = render_with(&scene, &camera, &RenderOptions { shadows: false, ..Default::default() });
    let shaded = render_with(&scene, &camera, &RenderOptions::default());
    let mut darker = 0;
    for i in 0..lit.pixel_count() {
        let (a, b) = (&lit.rgb[3 * i..3 * i + 3], &shaded.rgb[3 * i..3 * i + 3]);
        if a != b {
            assert_eq!(lit.semantic[i], FLOOR);
            assert!(b.iter().zip(a).all(|(s, l)| s <= l));
            darker += 1;
        }
    }
    assert!(darker > 100);
    assert_eq!(lit.depth_m, shaded.depth_m);
}

#[test]
fn uv_codes_survive_dequantization() {
    for q in 1..=255u8 {
        assert_eq!(quantize_uv(dequantize_uv(q).unwrap()).unwrap(), q);
    }
}
