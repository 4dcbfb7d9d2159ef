//! Whole-dataset invariant checks.

use std::collections::{BTreeMap, BTreeSet};

use crate::generator::{Dataset, SplitName, VideoRecord};
use crate::ground_truth::trajectory_ground_truth;
use crate::question::{realize_text, template_by_id, tokenize, Outcome, TagName, MAX_QUESTION_TOKENS};
use crate::scene::{validate_house, House, Lexicon, Violation};
use crate::trajectory::{Heading, MAX_TRAJECTORY_LEN, SUBSAMPLE_CHUNK};
use crate::visibility::FovConfig;

fn check_trajectory(house: &House, v: &VideoRecord, out: &mut Vec<Violation>) {
    let id = v.video_id();
    let poses = &v.trajectory.poses;
    if poses.is_empty() || poses.len() > MAX_TRAJECTORY_LEN {
        out.push(Violation::new("trajectory-length", id, format!("{} poses", poses.len())));
        return;
    }
    for (i, w) in poses.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let step = a.heading == b.heading && Heading::between(a.cell, b.cell) == Some(b.heading);
        let turn = a.cell == b.cell && a.heading != b.heading;
        if !step && !turn {
            out.push(Violation::new("trajectory-continuity", id, format!("poses {i} and {}", i + 1)));
        }
    }
    for p in poses {
        if !house.grid.is_walkable(p.cell) {
            out.push(Violation::new("trajectory-walkable", id, format!("({},{})", p.cell.x, p.cell.y)));
        }
    }
    let (first, last) = (house.room_at(poses[0].cell), house.room_at(poses[poses.len() - 1].cell));
    if first.is_none() || last.is_none() || first == last {
        out.push(Violation::new("trajectory-rooms", id, "start and goal must lie in two different rooms"));
    }
    if let Some(idx) = &v.subsample {
        let ok = idx.len() == poses.len().div_ceil(SUBSAMPLE_CHUNK)
            && idx.iter().enumerate().all(|(k, &i)| i / SUBSAMPLE_CHUNK == k && i < poses.len());
        if !ok {
            out.push(Violation::new("subsample-chunks", id, "indices do not pick one frame per chunk of four"));
        }
    }
}

/// Every dataset-level invariant the dataset violates. Empty means valid.
pub fn dataset_violations(d: &Dataset) -> Vec<Violation> {
    let mut out = Vec::new();
    let lexicon: &Lexicon = &d.config.lexicon;
    let fov: &FovConfig = &d.config.fov;
    let vocab = lexicon.answer_vocabulary();

    let mut owner: BTreeMap<&str, SplitName> = BTreeMap::new();
    for (split, ids) in &d.splits {
        for id in ids {
            if let Some(prev) = owner.insert(id, *split) {
                out.push(Violation::new(
                    "split-disjoint",
                    id,
                    format!("in both {} and {}", prev.as_str(), split.as_str()),
                ));
            }
        }
    }
    for split in SplitName::ALL {
        if d.splits.get(&split).is_none_or(|v| v.is_empty()) && d.houses.len() >= 3 {
            out.push(Violation::new("split-nonempty", split.as_str(), "no houses"));
        }
    }

    let mut house_ids = BTreeSet::new();
    for h in &d.houses {
        let hid = h.house.id.as_str();
        if !house_ids.insert(hid) {
            out.push(Violation::new("house-id-unique", hid, "duplicate house"));
        }
        if !owner.contains_key(hid) {
            out.push(Violation::new("split-cover", hid, "house is in no split"));
        }
        out.extend(validate_house(&h.house));
        if h.videos.len() > d.config.quota.video_cap {
            out.push(Violation::new("video-cap", hid, format!("{} videos", h.videos.len())));
        }

        let mut videos: BTreeMap<&str, &VideoRecord> = BTreeMap::new();
        for v in &h.videos {
            if videos.insert(v.video_id(), v).is_some() {
                out.push(Violation::new("video-id-unique", v.video_id(), "duplicate video"));
            }
            if v.trajectory.house_id != hid || v.gt.house_id != hid || v.gt.video_id != v.video_id() {
                out.push(Violation::new("video-provenance", v.video_id(), "house or video id mismatch"));
            }
            check_trajectory(&h.house, v, &mut out);
            match trajectory_ground_truth(&h.house, &v.trajectory, fov) {
                Ok(gt) if gt == v.gt => {}
                Ok(_) => out.push(Violation::new("gt-recompute", v.video_id(), "stored ground truth differs")),
                Err(e) => out.push(Violation::new("gt-recompute", v.video_id(), e.to_string())),
            }
        }

        let mut qids = BTreeSet::new();
        for q in &h.questions {
            let qid = q.question_id.as_str();
            if !qids.insert(qid) {
                out.push(Violation::new("question-id-unique", qid, "duplicate question"));
            }
            let Some(v) = videos.get(q.video_id.as_str()) else {
                out.push(Violation::new("question-video", qid, format!("unknown video {}", q.video_id)));
                continue;
            };
            if q.house_id != hid {
                out.push(Violation::new("question-house", qid, "house id mismatch"));
            }
            let Some(t) = template_by_id(q.template_id) else {
                out.push(Violation::new("question-template", qid, format!("unknown template {}", q.template_id)));
                continue;
            };
            if t.category != q.category {
                out.push(Violation::new("question-category", qid, "category does not match template"));
            }
            if !vocab.contains(&q.answer) {
                out.push(Violation::new("answer-vocabulary", qid, format!("{:?} not in vocabulary", q.answer)));
            }
            let ctx = crate::question::ExecContext { house: &h.house, gt: &v.gt, lexicon };
            match crate::question::execute(&t.program, ctx, &q.bindings) {
                Ok(Outcome::Answer(a)) if a == q.answer => {}
                Ok(o) => out.push(Violation::new("answer-reexecute", qid, format!("stored {:?}, got {o}", q.answer))),
                Err(e) => out.push(Violation::new("answer-reexecute", qid, e.to_string())),
            }
            match realize_text(t, &q.bindings, lexicon) {
                Ok(text) if text == q.question => {}
                Ok(text) => out.push(Violation::new("question-text", qid, format!("realizes as {text:?}"))),
                Err(e) => out.push(Violation::new("question-text", qid, e.to_string())),
            }
            let n = tokenize(&q.question).len();
            if n > MAX_QUESTION_TOKENS {
                out.push(Violation::new("question-length", qid, format!("{n} tokens")));
            }
            let seen: Vec<_> = v.gt.seen_objects.iter().filter_map(|&o| h.house.object(o)).collect();
            for (key, value) in &q.bindings.0 {
                let attested = match key.name {
                    TagName::ObjType => seen.iter().any(|o| &o.obj_type == value),
                    TagName::Color => seen.iter().any(|o| &o.color == value),
                    TagName::Attr => seen.iter().any(|o| o.has_attr(value)),
                    TagName::RoomType => v.gt.seen_rooms.iter().any(|&r| h.house.room_type(r) == Some(value.as_str())),
                    TagName::Rel => lexicon.relations.contains(value),
                    TagName::Comp => value == "more" || value == "fewer",
                    TagName::CompRel => value == "bigger" || value == "smaller",
                    TagName::Art => false,
                };
                if !attested {
                    out.push(Violation::new("binding-attested", qid, format!("{key} = {value:?} not in ground truth")));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{build_dataset, GenConfig};

    #[test]
    fn generated_dataset_is_clean_and_tampering_is_caught() {
        let cfg = GenConfig { houses: 3, videos_per_house: 8, ..Default::default() };
        let mut d = build_dataset(&cfg, 5, 1).unwrap();
        assert_eq!(dataset_violations(&d), vec![]);

        let q = &mut d.houses[0].questions[0];
        q.answer = if q.answer == "yes" { "no".into() } else { "yes".into() };
        let v = dataset_violations(&d);
        assert!(v.iter().any(|v| v.invariant == "answer-reexecute"), "{v:?}");

        let id = d.houses[1].house.id.clone();
        d.splits.get_mut(&SplitName::Test).unwrap().push(id);
        assert!(dataset_violations(&d).iter().any(|v| v.invariant == "split-disjoint"));
    }
}
