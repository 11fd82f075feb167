mod common;

use proptest::prelude::*;
use rand::Rng;
use synthcrowd::eval::{
    depth_metrics, evaluate_frame_against, extract_joints_2d, match_skeletons, pck, pck_from_errors, skeleton_distance,
    EvalConfig, GroundTruthSkeleton, JointTextureMap, MatchResult, Prediction, Skeleton2d, DEFAULT_DISC_RADIUS,
};
use synthcrowd::raster::render;
use synthcrowd::seed::SeedStream;

use common::{random_scene, template};

fn random_skeleton(rng: &mut impl Rng, id: u8, joints: usize, spread: f64) -> Skeleton2d {
    let cx = rng.random_range(0.0..spread);
    let cy = rng.random_range(0.0..spread);
    Skeleton2d {
        id,
        joints: (0..joints)
            .map(|_| {
                rng.random_bool(0.8).then(|| [cx + rng.random_range(-20.0..20.0), cy + rng.random_range(-20.0..20.0)])
            })
            .collect(),
    }
}

/// Best `(pairs, cost)` over every partial one-to-one assignment.
fn brute_force(pred: &[Skeleton2d], gt: &[Skeleton2d], threshold: f64) -> (usize, f64) {
    fn go(
        i: usize,
        pred: &[Skeleton2d],
        gt: &[Skeleton2d],
        used: &mut Vec<bool>,
        thr: f64,
        acc: (usize, f64),
        best: &mut (usize, f64),
    ) {
        if i == pred.len() {
            if acc.0 > best.0 || (acc.0 == best.0 && acc.1 < best.1) {
                *best = acc;
            }
            return;
        }
        go(i + 1, pred, gt, used, thr, acc, best);
        for j in 0..gt.len() {
            if used[j] {
                continue;
            }
            if let Some(d) = skeleton_distance(&pred[i], &gt[j]).filter(|&d| d <= thr) {
                used[j] = true;
                go(i + 1, pred, gt, used, thr, (acc.0 + 1, acc.1 + d), best);
                used[j] = false;
            }
        }
    }
    let mut best = (0, 0.0);
    go(0, pred, gt, &mut vec![false; gt.len()], threshold, (0, 0.0), &mut best);
    best
}

#[test]
fn matching_equals_brute_force() {
    let mut rng = SeedStream::new(12).rng();
    for case in 0..600 {
        let (np, ng) = (rng.random_range(0..=5), rng.random_range(0..=5));
        let joints = rng.random_range(1..6);
        let spread = if case % 2 == 0 { 60.0 } else { 300.0 };
        let pred: Vec<_> = (0..np).map(|k| random_skeleton(&mut rng, k as u8 + 1, joints, spread)).collect();
        let gt: Vec<_> = (0..ng).map(|k| random_skeleton(&mut rng, k as u8 + 1, joints, spread)).collect();
        let threshold = rng.random_range(5.0..40.0);
        let m = match_skeletons(&pred, &gt, threshold);
        let (count, cost) = brute_force(&pred, &gt, threshold);
        assert_eq!(m.pairs.len(), count, "case {case}");
        assert!((m.cost - cost).abs() < 1e-9, "case {case}: {} vs {cost}", m.cost);
        assert_eq!(m.unmatched_predicted.len() + count, np);
        assert_eq!(m.unmatched_ground_truth.len() + count, ng);
        for &(p, g) in &m.pairs {
            let d = skeleton_distance(&pred[p as usize - 1], &gt[g as usize - 1]).unwrap();
            assert!(d <= threshold);
        }
    }
}

#[test]
fn pck_equals_a_recount() {
    let mut rng = SeedStream::new(13).rng();
    for _ in 0..1000 {
        let n = rng.random_range(1..200);
        // integer-valued errors put many of them exactly on a threshold
        let errors: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(0.3) { rng.random_range(0..25) as f64 } else { rng.random_range(0.0..25.0) })
            .collect();
        let thresholds: Vec<f64> = (0..rng.random_range(1..10)).map(|_| rng.random_range(0..25) as f64).collect();
        let curve = pck_from_errors(&errors, &thresholds).unwrap();
        let mut sorted = errors.clone();
        sorted.sort_by(f64::total_cmp);
        for (t, v) in thresholds.iter().zip(&curve.values) {
            let at_or_below = sorted.partition_point(|e| e <= t);
            assert_eq!(*v, at_or_below as f64 / n as f64);
        }
        assert_eq!(curve.count, n);
    }
}

#[test]
fn pck_over_matched_pairs_only() {
    let a = Skeleton2d { id: 1, joints: vec![Some([0.0, 0.0]), Some([10.0, 0.0]), None] };
    let b = Skeleton2d { id: 2, joints: vec![Some([3.0, 4.0]), Some([10.0, 1.0]), Some([5.0, 5.0])] };
    let m = MatchResult {
        pairs: vec![(1, 2)],
        unmatched_predicted: vec![],
        unmatched_ground_truth: vec![],
        detection_rate: 1.0,
        cost: 3.0,
    };
    let curve = pck(&[a], &[b], &m, &[1.0, 5.0]).unwrap();
    assert_eq!(curve.count, 2);
    assert_eq!(curve.values, vec![0.5, 1.0]);
}

#[test]
fn relative_depth_ignores_a_global_shift() {
    let t = template();
    for s in 0..5 {
        let (scene, camera) = random_scene(&t, SeedStream::new(70).child(s), 200, 150);
        let fb = render(&scene, &camera);
        let gts: Vec<GroundTruthSkeleton> = fb
            .avatars
            .iter()
            .map(|a| GroundTruthSkeleton {
                id: a.instance_id,
                joints: a.joints.iter().map(|j| j.position).collect(),
                visible: a.joints.iter().map(|j| j.visible).collect(),
            })
            .collect();
        let m = MatchResult {
            pairs: gts.iter().map(|g| (g.id, g.id)).collect(),
            unmatched_predicted: vec![],
            unmatched_ground_truth: vec![],
            detection_rate: 1.0,
            cost: 0.0,
        };
        let base = depth_metrics(&fb.depth_m, fb.width, fb.height, &gts, &camera, &m).unwrap();
        for shift in [0.125, -0.3, 1.0] {
            let moved: Vec<f64> = fb.depth_m.iter().map(|&d| if d > 0.0 { d + shift } else { 0.0 }).collect();
            let other = depth_metrics(&moved, fb.width, fb.height, &gts, &camera, &m).unwrap();
            assert_eq!(base.relative_errors(), other.relative_errors());
            for (a, b) in base.skeletons.iter().zip(&other.skeletons) {
                assert!(((b.com_abs_error - a.com_abs_error).abs() - shift.abs()).abs() < 0.2);
            }
        }
    }
}

#[test]
fn identical_channels_score_perfectly_against_extracted_references() {
    let t = template();
    let map = JointTextureMap::from_template(&t, DEFAULT_DISC_RADIUS).unwrap();
    let config = EvalConfig::default();
    for s in 0..10 {
        let (scene, camera) = random_scene(&t, SeedStream::new(81).child(s), 240, 180);
        let fb = render(&scene, &camera);
        let gts: Vec<GroundTruthSkeleton> = fb
            .avatars
            .iter()
            .map(|a| GroundTruthSkeleton {
                id: a.instance_id,
                joints: a.joints.iter().map(|j| j.position).collect(),
                visible: a.joints.iter().map(|j| j.visible).collect(),
            })
            .collect();
        let extracted = extract_joints_2d(fb.width, fb.height, &fb.u_q, &fb.v_q, &fb.instance, &map).unwrap();
        let reference: Vec<Skeleton2d> = gts
            .iter()
            .map(|g| {
                extracted
                    .iter()
                    .find(|e| e.id == g.id)
                    .cloned()
                    .unwrap_or(Skeleton2d { id: g.id, joints: vec![None; g.joints.len()] })
            })
            .collect();
        let prediction = Prediction {
            width: fb.width,
            height: fb.height,
            u_q: &fb.u_q,
            v_q: &fb.v_q,
            instance: &fb.instance,
            depth_m: &fb.depth_m,
        };
        let e = evaluate_frame_against(&prediction, &reference, &gts, &camera, &map, &config).unwrap();
        assert!(e.joint_errors.iter().all(|&d| d == 0.0));
        assert_eq!(e.matched, extracted.len());
    }
}

#[test]
fn instance_relabeling_permutes_skeletons() {
    let t = template();
    let map = JointTextureMap::from_template(&t, DEFAULT_DISC_RADIUS).unwrap();
    let (scene, camera) = random_scene(&t, SeedStream::new(90), 240, 180);
    let fb = render(&scene, &camera);
    let relabel = |i: u8| if i == 0 { 0 } else { 200 - i };
    let swapped: Vec<u8> = fb.instance.iter().map(|&i| relabel(i)).collect();
    let a = extract_joints_2d(fb.width, fb.height, &fb.u_q, &fb.v_q, &fb.instance, &map).unwrap();
    let b = extract_joints_2d(fb.width, fb.height, &fb.u_q, &fb.v_q, &swapped, &map).unwrap();
    assert_eq!(a.len(), b.len());
    for s in &a {
        let other = b.iter().find(|o| o.id == relabel(s.id)).unwrap();
        assert_eq!(s.joints, other.joints);
    }
}

proptest! {
    #[test]
    fn matching_is_one_to_one_and_within_threshold(seed in any::<u64>(), threshold in 1.0..50.0f64) {
        let mut rng = SeedStream::new(seed).rng();
        let pred: Vec<_> = (0..rng.random_range(0..7)).map(|k| random_skeleton(&mut rng, k as u8 + 1, 4, 120.0)).collect();
        let gt: Vec<_> = (0..rng.random_range(0..7)).map(|k| random_skeleton(&mut rng, k as u8 + 1, 4, 120.0)).collect();
        let m = match_skeletons(&pred, &gt, threshold);
        let mut p: Vec<u8> = m.pairs.iter().map(|x| x.0).collect();
        let mut g: Vec<u8> = m.pairs.iter().map(|x| x.1).collect();
        p.sort_unstable();
        p.dedup();
        g.sort_unstable();
        g.dedup();
        prop_assert_eq!(p.len(), m.pairs.len());
        prop_assert_eq!(g.len(), m.pairs.len());
        if !gt.is_empty() {
            prop_assert!((m.detection_rate - m.pairs.len() as f64 / gt.len() as f64).abs() < 1e-15);
        }
        for &(a, b) in &m.pairs {
            let d = skeleton_distance(&pred[a as usize - 1], &gt[b as usize - 1]);
            prop_assert!(d.is_some_and(|d| d <= threshold));
        }
    }
}
