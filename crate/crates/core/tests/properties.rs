mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use housenav::audit::audit;
use housenav::checks::dataset_violations;
use housenav::generator::{build_dataset, candidate_sets, split_sizes, GenConfig, SplitRatio};
use housenav::ground_truth::{aggregate_gt, trajectory_ground_truth, FrameGT};
use housenav::oracle::{random_bindings, random_world, SmallPools};
use housenav::question::{builtin_templates, execute, ExecContext, Outcome, TagName};
use housenav::rng::{derive_seed, derive_stream};
use housenav::scene::{adjacent_rooms, validate_house, Cell, House, Lexicon, ObjectId, RoomId};
use housenav::synth::{synth_house, SynthConfig};
use housenav::trajectory::{
    path_to_trajectory, sample_endpoints, shortest_path, Heading, Pose, TrajectoryError, MAX_TRAJECTORY_LEN,
};
use housenav::visibility::{visible_objects, FovConfig};

fn house(seed: u64) -> House {
    synth_house(&SynthConfig::default(), &Lexicon::default(), seed, "h").unwrap()
}

fn random_pose<R: Rng>(h: &House, rng: &mut R) -> Pose {
    let cells: Vec<Cell> = h.grid.cells().filter(|&c| h.grid.is_walkable(c)).collect();
    Pose { cell: cells[rng.random_range(0..cells.len())], heading: Heading::ALL[rng.random_range(0..4)] }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn synthesized_houses_are_valid_and_reproducible(seed in any::<u64>()) {
        let a = house(seed);
        prop_assert_eq!(validate_house(&a), vec![]);
        prop_assert_eq!(validate_house(&a), validate_house(&a));
        let b = house(seed);
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn adjacency_is_symmetric_and_irreflexive(seed in any::<u64>()) {
        let h = house(seed);
        for r in &h.rooms {
            let adj = adjacent_rooms(&h, r.id).unwrap();
            prop_assert!(!adj.contains(&r.id));
            for o in &adj {
                prop_assert!(adjacent_rooms(&h, *o).unwrap().contains(&r.id));
            }
        }
    }

    #[test]
    fn bfs_matches_uniform_cost_search(seed in any::<u64>(), density in 0.0f64..0.5) {
        let mut h = house(seed);
        let mut rng = derive_stream(seed, &["rubble"]);
        let cells: Vec<Cell> = h.grid.cells().filter(|&c| h.grid.is_walkable(c)).collect();
        for &c in &cells {
            if rng.random_bool(density) {
                h.grid.set_walkable(c, false);
            }
        }
        let open: Vec<Cell> = cells.into_iter().filter(|&c| h.grid.is_walkable(c)).collect();
        prop_assume!(!open.is_empty());
        for _ in 0..5 {
            let (a, b) = (open[rng.random_range(0..open.len())], open[rng.random_range(0..open.len())]);
            match (shortest_path(&h, a, b), common::ucs_distance(&h, a, b)) {
                (Ok(p), Some(d)) => prop_assert_eq!(p.len(), d + 1),
                (Err(TrajectoryError::NoPath(..)), None) => {}
                (x, y) => prop_assert!(false, "BFS {:?} vs UCS {:?}", x, y),
            }
        }
    }

    #[test]
    fn trajectories_are_capped_and_continuous(seed in any::<u64>()) {
        let h = house(seed);
        let mut rng = derive_stream(seed, &["endpoints"]);
        let (a, b) = sample_endpoints(&h, &mut rng).unwrap();
        let path = shortest_path(&h, a, b).unwrap();
        match path_to_trajectory(&h, "v", &path) {
            Ok(t) => {
                prop_assert!(t.len() <= MAX_TRAJECTORY_LEN);
                prop_assert_eq!(t.poses[0].cell, a);
                prop_assert_eq!(t.poses[t.len() - 1].cell, b);
                for w in t.poses.windows(2) {
                    let step = w[0].heading == w[1].heading && Heading::between(w[0].cell, w[1].cell) == Some(w[1].heading);
                    let turn = w[0].cell == w[1].cell && w[0].heading != w[1].heading;
                    prop_assert!(step || turn);
                }
            }
            Err(TrajectoryError::TooLong(n)) => prop_assert!(n > MAX_TRAJECTORY_LEN),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn wider_view_never_hides_objects(seed in any::<u64>(), near in 1.0f64..10.0, extra in 0.0f64..10.0) {
        let h = house(seed);
        let mut rng = derive_stream(seed, &["pose"]);
        for _ in 0..10 {
            let p = random_pose(&h, &mut rng);
            let small = visible_objects(&h, &p, &FovConfig { max_distance: near, ..FovConfig::default() });
            let big = visible_objects(&h, &p, &FovConfig { max_distance: near + extra, ..FovConfig::default() });
            prop_assert!(small.is_subset(&big));
            prop_assert_eq!(&big, &common::brute_force_visible(&h, &p, &FovConfig { max_distance: near + extra, ..FovConfig::default() }));
        }
    }

    #[test]
    fn frames_link_only_current_or_adjacent_rooms(seed in any::<u64>()) {
        let h = house(seed);
        let mut rng = derive_stream(seed, &["endpoints"]);
        let (a, b) = sample_endpoints(&h, &mut rng).unwrap();
        let Ok(t) = path_to_trajectory(&h, "v", &shortest_path(&h, a, b).unwrap()) else { return Ok(()) };
        let gt = trajectory_ground_truth(&h, &t, &FovConfig::default()).unwrap();
        prop_assert_eq!(&gt, &trajectory_ground_truth(&h, &t, &FovConfig::default()).unwrap());
        for f in &gt.frames {
            let mut allowed = adjacent_rooms(&h, f.current_room).unwrap();
            allowed.insert(f.current_room);
            prop_assert!(f.linked_rooms.is_subset(&allowed));
            for o in &f.visible_objects {
                prop_assert!(f.linked_rooms.contains(&h.object(*o).unwrap().room_id));
            }
        }
        prop_assert!(!gt.seen_rooms.is_empty());
    }

    #[test]
    fn aggregation_matches_a_naive_union(frames in prop::collection::vec(
        (0u32..4, prop::collection::btree_set(0u32..12, 0..5)), 1..30)
    ) {
        let frames: Vec<FrameGT> = frames
            .into_iter()
            .enumerate()
            .map(|(i, (room, objs))| FrameGT {
                index: i,
                current_room: RoomId(room),
                visible_objects: objs.into_iter().map(ObjectId).collect(),
                linked_rooms: [RoomId(room)].into(),
            })
            .collect();
        let gt = aggregate_gt("h", "v", frames.clone()).unwrap();
        let mut union = BTreeSet::new();
        for f in &frames {
            union.extend(f.visible_objects.iter().copied());
        }
        prop_assert_eq!(&gt.seen_objects, &union);
        for o in &union {
            let hits: Vec<usize> = frames.iter().filter(|f| f.visible_objects.contains(o)).map(|f| f.index).collect();
            let span = gt.object_spans[o];
            prop_assert_eq!((span.first, span.last), (hits[0], hits[hits.len() - 1]));
        }
        let rooms: BTreeSet<RoomId> = frames.iter().map(|f| f.current_room).collect();
        prop_assert_eq!(&gt.seen_rooms, &rooms);
    }

    #[test]
    fn answers_are_deterministic_and_in_vocabulary(seed in any::<u64>()) {
        let lexicon = Lexicon::default();
        let vocab = lexicon.answer_vocabulary();
        let pools = SmallPools::default();
        let mut rng = derive_stream(seed, &["world"]);
        let (h, gt) = random_world(&mut rng, &pools);
        let ctx = ExecContext { house: &h, gt: &gt, lexicon: &lexicon };
        for t in builtin_templates() {
            let b = random_bindings(t, &mut rng, &pools);
            let first = execute(&t.program, ctx, &b);
            prop_assert_eq!(&first, &execute(&t.program, ctx, &b));
            if let Ok(Outcome::Answer(a)) = first {
                prop_assert!(vocab.contains(&a), "{} not in vocabulary", a);
            }
        }
    }

    #[test]
    fn candidates_are_attested_in_ground_truth(seed in any::<u64>()) {
        let lexicon = Lexicon::default();
        let mut rng = derive_stream(seed, &["world"]);
        let (h, gt) = random_world(&mut rng, &SmallPools::default());
        let seen: Vec<_> = h.objects.iter().filter(|o| gt.seen_objects.contains(&o.id)).collect();
        for t in builtin_templates() {
            for (tag, values) in candidate_sets(t, &gt, &h, &lexicon) {
                for v in values {
                    let attested = match tag.name {
                        TagName::ObjType => seen.iter().any(|o| o.obj_type == v),
                        TagName::Color => seen.iter().any(|o| o.color == v),
                        TagName::Attr => seen.iter().any(|o| o.color == v || o.extra_attrs.contains(&v)),
                        TagName::RoomType => h.rooms.iter().any(|r| gt.seen_rooms.contains(&r.id) && r.room_type == v),
                        TagName::Rel => lexicon.relations.contains(&v),
                        TagName::Comp => v == "more" || v == "fewer",
                        TagName::CompRel => v == "bigger" || v == "smaller",
                        TagName::Art => false,
                    };
                    prop_assert!(attested, "template {} {:?} = {}", t.id, tag, v);
                }
            }
        }
    }

    #[test]
    fn split_sizes_cover_every_house(n in 3usize..2000, a in 0u32..100, b in 0u32..100, c in 1u32..100) {
        let s = split_sizes(n, &SplitRatio { train: a, validation: b, test: c }).unwrap();
        prop_assert_eq!(s.iter().sum::<usize>(), n);
        prop_assert!(s.iter().all(|&k| k >= 1));
    }

    #[test]
    fn seed_derivation_is_pure(master in any::<u64>(), label in "[a-z]{1,8}", k in 0u32..1000) {
        let k = k.to_string();
        prop_assert_eq!(derive_seed(master, &[&label, &k]), derive_seed(master, &[&label, &k]));
        prop_assert_ne!(derive_seed(master, &[&label, &k]), derive_seed(master, &[k.as_str(), &label]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn generated_datasets_have_no_violations(seed in any::<u64>(), houses in 3usize..6) {
        let cfg = GenConfig { houses, videos_per_house: 10, ..GenConfig::default() };
        let d = build_dataset(&cfg, seed, 0).unwrap();
        prop_assert_eq!(dataset_violations(&d), vec![]);
        for h in &d.houses {
            prop_assert!(h.videos.len() <= 150);
        }
    }

    #[test]
    fn audit_ignores_record_order(seed in any::<u64>()) {
        let cfg = GenConfig { houses: 4, videos_per_house: 12, ..GenConfig::default() };
        let d = build_dataset(&cfg, seed, 1).unwrap();
        let r = audit(&d).unwrap();
        let mut shuffled = d.clone();
        let mut rng = derive_stream(seed, &["shuffle"]);
        shuffled.houses.shuffle(&mut rng);
        for h in &mut shuffled.houses {
            h.questions.shuffle(&mut rng);
            h.videos.shuffle(&mut rng);
        }
        prop_assert_eq!(&r, &audit(&shuffled).unwrap());
        for b in r.baselines.values() {
            prop_assert!(b.train_per_template_majority.correct >= b.train_global_majority.correct);
        }
    }
}

#[test]
fn every_lexicon_type_appears_across_seeds() {
    let lexicon = Lexicon::default();
    let (mut rooms, mut objects) = (BTreeSet::new(), BTreeSet::new());
    for seed in 0..300 {
        let h = house(seed);
        rooms.extend(h.rooms.iter().map(|r| r.room_type.clone()));
        objects.extend(h.objects.iter().map(|o| o.obj_type.clone()));
    }
    let want_rooms: BTreeSet<String> = lexicon.room_types.iter().cloned().collect();
    let want_objects: BTreeSet<String> = lexicon.object_types.iter().map(|n| n.singular.clone()).collect();
    assert_eq!(rooms, want_rooms);
    assert_eq!(objects, want_objects);
}

#[test]
fn ten_thousand_records_re_execute() {
    let cfg = GenConfig { houses: 3, videos_per_house: 150, ..GenConfig::default() };
    let mut total = 0;
    let mut by_template: BTreeMap<u8, usize> = BTreeMap::new();
    for seed in 0..23 {
        let d = build_dataset(&cfg, seed, 0).unwrap();
        for h in &d.houses {
            let gts: BTreeMap<&str, _> = h.videos.iter().map(|v| (v.video_id(), &v.gt)).collect();
            for q in &h.questions {
                let t = housenav::question::template_by_id(q.template_id).unwrap();
                let ctx = ExecContext { house: &h.house, gt: gts[q.video_id.as_str()], lexicon: &d.config.lexicon };
                assert_eq!(execute(&t.program, ctx, &q.bindings).unwrap(), Outcome::Answer(q.answer.clone()));
                *by_template.entry(q.template_id).or_default() += 1;
                total += 1;
            }
        }
    }
    assert!(total >= 10_000, "{total}");
    assert_eq!(by_template.len(), 28);
}
