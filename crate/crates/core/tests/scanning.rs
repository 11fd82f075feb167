mod common;

use std::sync::Arc;

use rand::Rng;
use synthcrowd::body_model::ShapeParams;
use synthcrowd::raster::FrameBuffer;
use synthcrowd::scanning::classes::{ClassId, HUMAN_CLASSES, SKIN, UNLABELED};
use synthcrowd::scanning::{
    aggregate_votes, scan_view, virtual_scan, LabelTexture, NoisyLabeler, OracleLabeler, ScanConfig, ScanOutput,
    VoteGrid, TEXTURE_SIZE,
};
use synthcrowd::seed::SeedStream;

use common::template;

fn scan(views: usize, rho: Option<f64>, seed: u64) -> (ScanOutput, LabelTexture) {
    let t = template();
    let truth = Arc::new(LabelTexture::ground_truth(&t));
    let shape = ShapeParams::new(vec![0.5, -0.3, 0.2, 0.0]).unwrap();
    let config = ScanConfig { views, ..ScanConfig::default() };
    let out = match rho {
        None => virtual_scan(&t, &shape, &truth, &OracleLabeler, &config, SeedStream::new(seed)),
        Some(rho) => virtual_scan(&t, &shape, &truth, &NoisyLabeler { rho }, &config, SeedStream::new(seed)),
    };
    (out.unwrap(), (*truth).clone())
}

/// `(voted texels, correctly labeled among them)` over texels with at least
/// `min_votes` votes.
fn accuracy(out: &ScanOutput, truth: &LabelTexture, min_votes: u32) -> (usize, usize) {
    let (mut n, mut ok) = (0, 0);
    for y in 0..TEXTURE_SIZE {
        for x in 0..TEXTURE_SIZE {
            if out.votes.texel_total(x, y) >= min_votes.max(1) {
                n += 1;
                ok += usize::from(out.texture.texel(x, y) == truth.texel(x, y));
            }
        }
    }
    (n, ok)
}

#[test]
fn oracle_scan_recovers_every_voted_texel() {
    let (out, truth) = scan(16, None, 1);
    let (n, ok) = accuracy(&out, &truth, 1);
    assert!(n > 5_000);
    assert_eq!(n, ok);
    for y in 0..TEXTURE_SIZE {
        for x in 0..TEXTURE_SIZE {
            assert_eq!(out.votes.texel_total(x, y) == 0, out.texture.texel(x, y) == UNLABELED);
        }
    }
}

#[test]
fn zero_noise_equals_the_oracle() {
    let (noisy, _) = scan(16, Some(0.0), 2);
    let (oracle, _) = scan(16, None, 3);
    assert_eq!(noisy.texture, oracle.texture);
    assert_eq!(noisy.votes, oracle.votes);
}

#[test]
fn votes_are_conserved() {
    let (out, _) = scan(8, Some(0.3), 4);
    let per_view: u64 = out.votes_per_view.iter().map(|&v| v as u64).sum();
    assert_eq!(out.votes.total(), per_view);
    let texels: u64 = (0..TEXTURE_SIZE)
        .flat_map(|y| (0..TEXTURE_SIZE).map(move |x| (x, y)))
        .map(|(x, y)| u64::from(out.votes.texel_total(x, y)))
        .sum();
    assert_eq!(texels, per_view);
}

fn random_view(seed: SeedStream) -> (FrameBuffer, Vec<ClassId>) {
    let mut rng = seed.rng();
    let mut fb = FrameBuffer::empty(40, 30);
    let mut labels = vec![0; fb.pixel_count()];
    for i in 0..fb.pixel_count() {
        if rng.random_bool(0.6) {
            fb.u_q[i] = rng.random_range(1..=255);
            fb.v_q[i] = rng.random_range(1..=255);
            labels[i] = HUMAN_CLASSES[rng.random_range(0..HUMAN_CLASSES.len())];
        } else {
            labels[i] = rng.random_range(0..=8);
        }
    }
    (fb, labels)
}

#[test]
fn merging_is_order_independent() {
    let views: Vec<_> = (0..6).map(|k| random_view(SeedStream::new(10).child(k))).collect();
    let grids: Vec<VoteGrid> = views
        .iter()
        .map(|(fb, labels)| {
            let mut g = VoteGrid::new();
            let cast = scan_view(fb, labels, &mut g).unwrap();
            let expected =
                (0..fb.pixel_count()).filter(|&i| fb.u_q[i] > 0 && HUMAN_CLASSES.contains(&labels[i])).count();
            assert_eq!(cast, expected);
            g
        })
        .collect();
    let mut forward = VoteGrid::new();
    for g in &grids {
        forward.merge(g);
    }
    let mut backward = VoteGrid::new();
    for g in grids.iter().rev() {
        backward.merge(g);
    }
    let mut sequential = VoteGrid::new();
    for (fb, labels) in views.iter().rev() {
        scan_view(fb, labels, &mut sequential).unwrap();
    }
    assert_eq!(forward, backward);
    assert_eq!(forward, sequential);
    assert_eq!(aggregate_votes(&forward), aggregate_votes(&sequential));
}

#[test]
fn ties_go_to_the_smallest_class() {
    let mut g = VoteGrid::new();
    g.add(3, 4, HUMAN_CLASSES[4]);
    g.add(3, 4, HUMAN_CLASSES[2]);
    assert_eq!(aggregate_votes(&g).texel(3, 4), HUMAN_CLASSES[2]);
    g.add(3, 4, SKIN);
    assert_eq!(aggregate_votes(&g).texel(3, 4), SKIN);
}

#[test]
fn accuracy_falls_with_noise() {
    let mut last = f64::INFINITY;
    for (k, rho) in [0.0, 0.3, 0.5, 0.7].into_iter().enumerate() {
        let (out, truth) = scan(8, Some(rho), 20 + k as u64);
        let (n, ok) = accuracy(&out, &truth, 1);
        let acc = ok as f64 / n as f64;
        assert!(acc <= last, "accuracy {acc} at rho {rho} above {last}");
        last = acc;
    }
    assert!(last < 0.9);
}

#[test]
fn one_view_leaves_the_far_side_unlabeled() {
    let (one, truth) = scan(1, None, 5);
    let (all, _) = scan(16, None, 5);
    let labeled = |t: &LabelTexture| t.labeled_count();
    assert!(labeled(&one.texture) * 2 < labeled(&all.texture));
    for y in 0..TEXTURE_SIZE {
        for x in 0..TEXTURE_SIZE {
            let c = one.texture.texel(x, y);
            if c != UNLABELED {
                assert_eq!(c, truth.texel(x, y));
                assert_eq!(all.texture.texel(x, y), c);
            }
        }
    }
    // the front camera sees no texel half way around the torso
    let t = template();
    let torso = t.atlas.charts.iter().find(|c| c.name == "torso_mid").unwrap();
    let [u0, v0, u1, v1] = torso.surface;
    let x = (((u0 + u1) / 2.0) * 255.0) as usize;
    let rows = ((v0 * 255.0) as usize + 1)..((v1 * 255.0) as usize);
    assert!(rows.clone().all(|y| one.texture.texel(x, y) == UNLABELED));
    assert!(rows.filter(|&y| all.texture.texel(x, y) != UNLABELED).count() > 0);
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    fn vote() -> impl Strategy<Value = (usize, usize, ClassId, usize)> {
        (0..TEXTURE_SIZE, 0..TEXTURE_SIZE, 0..HUMAN_CLASSES.len(), 0..3usize)
            .prop_map(|(x, y, c, g)| (x, y, HUMAN_CLASSES[c], g))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn split_votes_merge_to_the_whole(votes in proptest::collection::vec(vote(), 0..400), flip_order in any::<bool>()) {
            let mut whole = VoteGrid::new();
            let mut parts = vec![VoteGrid::new(), VoteGrid::new(), VoteGrid::new()];
            for &(x, y, c, g) in &votes {
                whole.add(x, y, c);
                parts[g].add(x, y, c);
            }
            if flip_order {
                parts.reverse();
            }
            let mut merged = VoteGrid::new();
            for p in &parts {
                merged.merge(p);
            }
            prop_assert_eq!(merged.total(), votes.len() as u64);
            prop_assert_eq!(&merged, &whole);
            let texture = aggregate_votes(&merged);
            for &(x, y, _, _) in &votes {
                let tally = merged.texel_votes(x, y);
                let best = *tally.iter().max().unwrap();
                let winner = HUMAN_CLASSES[tally.iter().position(|&n| n == best).unwrap()];
                prop_assert_eq!(texture.texel(x, y), winner);
            }
        }
    }
}
