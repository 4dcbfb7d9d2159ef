//! Question instantiation, quota tracking and dataset assembly.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ground_truth::{trajectory_ground_truth, GroundTruthError, TrajectoryGroundTruth};
use crate::question::{
    builtin_templates, execute, realize_text, template_by_id, Bindings, Category, ExecContext, Outcome,
    QuestionTemplate, SlotKey, Tag, TagName,
};
use crate::rng::{derive_seed, stream_from_seed};
use crate::scene::{House, Lexicon};
use crate::synth::{synth_house, SynthConfig, SynthError};
use crate::trajectory::{
    path_to_trajectory, sample_endpoints, shortest_path, subsample_indices, Trajectory, TrajectoryError,
};
use crate::visibility::FovConfig;

/// Endpoint pairs tried per video slot before the slot is skipped.
pub const ENDPOINT_ATTEMPTS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QARecord {
    pub question_id: String,
    pub house_id: String,
    pub video_id: String,
    pub template_id: u8,
    pub category: Category,
    pub question: String,
    pub bindings: Bindings,
    pub answer: String,
    /// Seed of the stream that drew the bindings.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuotaPlan {
    /// Relative weight per template, indexed by template id - 1. Defaults to
    /// the published per-template question counts.
    pub weights: Vec<f64>,
    pub video_cap: usize,
    pub questions_per_video: usize,
    /// Random assignments tried per template before rejecting it for a video.
    pub retry_budget: usize,
    /// Distinct templates tried per requested question.
    pub template_draws: usize,
}

impl Default for QuotaPlan {
    fn default() -> Self {
        Self {
            weights: builtin_templates().iter().map(|t| t.reference_count as f64).collect(),
            video_cap: 150,
            questions_per_video: 1,
            retry_budget: 30,
            template_draws: 6,
        }
    }
}

impl QuotaPlan {
    pub fn validate(&self) -> Result<(), String> {
        let n = builtin_templates().len();
        if self.weights.len() != n {
            return Err(format!("quota needs {n} weights, got {}", self.weights.len()));
        }
        if self.weights.iter().any(|w| !w.is_finite() || *w < 0.0) || self.weights.iter().sum::<f64>() <= 0.0 {
            return Err("quota weights must be non-negative with a positive sum".into());
        }
        if self.video_cap == 0 {
            return Err("video_cap must be at least 1".into());
        }
        if self.questions_per_video == 0 || self.retry_budget == 0 || self.template_draws == 0 {
            return Err("questions_per_video, retry_budget and template_draws must be positive".into());
        }
        Ok(())
    }

    /// Target share per template; sums to 1.
    pub fn proportions(&self) -> Vec<f64> {
        let total: f64 = self.weights.iter().sum();
        self.weights.iter().map(|w| w / total).collect()
    }
}

/// Running per-template targets and realized counts for one house.
///
/// Draw weights are paced: a template's remaining quota is measured against
/// its share of the questions produced so far (plus one), so templates that
/// keep getting rejected are drawn more often until they catch up.
#[derive(Debug, Clone)]
pub struct QuotaTracker {
    pub proportions: Vec<f64>,
    pub targets: Vec<f64>,
    pub realized: Vec<usize>,
}

impl QuotaTracker {
    pub fn new(plan: &QuotaPlan, planned_questions: usize) -> Self {
        let proportions = plan.proportions();
        let targets = proportions.iter().map(|p| p * planned_questions as f64).collect();
        Self { proportions, targets, realized: vec![0; plan.weights.len()] }
    }

    /// Remaining quota against the full plan.
    pub fn deficit(&self, index: usize) -> f64 {
        (self.targets[index] - self.realized[index] as f64).max(0.0)
    }

    /// Remaining quota against the share of questions produced so far.
    pub fn paced_deficit(&self, index: usize) -> f64 {
        if self.deficit(index) <= 0.0 {
            return 0.0;
        }
        let produced: usize = self.realized.iter().sum();
        (self.proportions[index] * (produced + 1) as f64 - self.realized[index] as f64).max(0.0)
    }

    pub fn exhausted(&self) -> bool {
        (0..self.targets.len()).all(|i| self.deficit(i) <= 0.0)
    }

    pub fn record(&mut self, index: usize) {
        self.realized[index] += 1;
    }

    /// Picks a template index with probability proportional to its paced
    /// deficit (falling back to the plain deficit), skipping `excluded`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, excluded: &BTreeSet<usize>) -> Option<usize> {
        let pick = |weights: Vec<f64>, rng: &mut R| -> Option<usize> {
            let total: f64 = weights.iter().sum();
            if total <= 0.0 {
                return None;
            }
            let mut x = rng.random::<f64>() * total;
            let mut last = None;
            for (i, w) in weights.iter().enumerate() {
                if *w <= 0.0 {
                    continue;
                }
                last = Some(i);
                if x < *w {
                    return Some(i);
                }
                x -= w;
            }
            last
        };
        let n = self.targets.len();
        let masked = |f: &dyn Fn(usize) -> f64| (0..n).map(|i| if excluded.contains(&i) { 0.0 } else { f(i) }).collect();
        pick(masked(&|i| self.paced_deficit(i)), rng).or_else(|| pick(masked(&|i| self.deficit(i)), rng))
    }
}

/// Values each pattern tag may take on this video. Group tags appear once.
pub fn candidate_sets(
    template: &QuestionTemplate,
    gt: &TrajectoryGroundTruth,
    house: &House,
    lexicon: &Lexicon,
) -> BTreeMap<Tag, BTreeSet<String>> {
    let seen: Vec<_> = gt.seen_objects.iter().filter_map(|&o| house.object(o)).collect();
    let mut out = BTreeMap::new();
    for tag in template.pattern.tags() {
        let values: BTreeSet<String> = match tag.name {
            TagName::Art => continue,
            TagName::RoomType => gt.seen_rooms.iter().filter_map(|&r| house.room_type(r)).map(String::from).collect(),
            TagName::ObjType => seen.iter().map(|o| o.obj_type.clone()).collect(),
            TagName::Color => seen.iter().map(|o| o.color.clone()).collect(),
            TagName::Attr => {
                let color_free = !tag.in_group && template.color_free.contains(&tag.slot(None));
                let mut v: BTreeSet<String> = seen.iter().flat_map(|o| o.extra_attrs.iter().cloned()).collect();
                if !color_free {
                    v.extend(seen.iter().map(|o| o.color.clone()));
                }
                v
            }
            TagName::Rel => lexicon.relations.iter().cloned().collect(),
            TagName::Comp => ["more", "fewer"].map(String::from).into(),
            TagName::CompRel => ["bigger", "smaller"].map(String::from).into(),
        };
        out.insert(tag, values);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    EmptyCandidates,
    Exhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instantiation {
    pub bindings: Bindings,
    pub question: String,
    pub answer: String,
    pub attempts: usize,
}

/// Paired operands that name the same thing, or repeated set elements.
fn degenerate(template: &QuestionTemplate, b: &Bindings) -> bool {
    let get = |k: &str| b.0.get(&k.parse::<SlotKey>().unwrap()).cloned();
    let same = |x: &str, y: &str| get(x).is_some() && get(x) == get(y);
    if same("room_type1", "room_type2") {
        return true;
    }
    if get("obj_type1").is_some() && same("obj_type1", "obj_type2") && same("attr1", "attr2") {
        return true;
    }
    // one shared type, two attributes
    if get("obj_type").is_some() && same("attr1", "attr2") {
        return true;
    }
    if template.has_set_group() {
        let arity = b.group_arity();
        let mut elems = BTreeSet::new();
        for i in 0..arity {
            let e: Vec<Option<&String>> = [TagName::Attr, TagName::ObjType, TagName::RoomType]
                .iter()
                .map(|&n| b.0.get(&SlotKey::element(n, i)))
                .collect();
            if !elems.insert(e) {
                return true;
            }
        }
    }
    false
}

/// Draws up to `budget` random assignments from the candidate sets and keeps
/// the first whose program yields an answer.
pub fn instantiate<R: Rng + ?Sized>(
    template: &QuestionTemplate,
    gt: &TrajectoryGroundTruth,
    house: &House,
    lexicon: &Lexicon,
    rng: &mut R,
    budget: usize,
) -> Result<Instantiation, Rejection> {
    let cands = candidate_sets(template, gt, house, lexicon);
    if cands.values().any(|v| v.is_empty()) {
        return Err(Rejection::EmptyCandidates);
    }
    let cands: BTreeMap<Tag, Vec<&String>> = cands.iter().map(|(t, v)| (*t, v.iter().collect())).collect();
    let ctx = ExecContext { house, gt, lexicon };
    for attempt in 1..=budget {
        let arity = if template.has_set_group() { rng.random_range(2..=3u8) } else { 0 };
        let mut b = Bindings::default();
        for tag in template.pattern.tags() {
            let Some(values) = cands.get(&tag) else { continue };
            let elements: Vec<Option<u8>> = if tag.in_group { (0..arity).map(Some).collect() } else { vec![None] };
            for e in elements {
                let key = tag.slot(e);
                if !b.0.contains_key(&key) {
                    b.insert(key, values.choose(rng).unwrap().as_str());
                }
            }
        }
        if degenerate(template, &b) {
            continue;
        }
        let Ok(Outcome::Answer(answer)) = execute(&template.program, ctx, &b) else { continue };
        let Ok(question) = realize_text(template, &b, lexicon) else { continue };
        return Ok(Instantiation { bindings: b, question, answer, attempts: attempt });
    }
    Err(Rejection::Exhausted)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Telemetry {
    pub video_slots: usize,
    pub videos_kept: usize,
    pub slots_without_trajectory: usize,
    pub videos_below_visibility_guard: usize,
    pub videos_without_questions: usize,
    pub template_draws: usize,
    pub rejected_empty_candidates: usize,
    pub rejected_exhausted: usize,
    /// Rejections per template id.
    pub rejections_by_template: BTreeMap<u8, usize>,
}

impl Telemetry {
    pub fn merge(&mut self, o: &Telemetry) {
        self.video_slots += o.video_slots;
        self.videos_kept += o.videos_kept;
        self.slots_without_trajectory += o.slots_without_trajectory;
        self.videos_below_visibility_guard += o.videos_below_visibility_guard;
        self.videos_without_questions += o.videos_without_questions;
        self.template_draws += o.template_draws;
        self.rejected_empty_candidates += o.rejected_empty_candidates;
        self.rejected_exhausted += o.rejected_exhausted;
        for (k, v) in &o.rejections_by_template {
            *self.rejections_by_template.entry(*k).or_default() += v;
        }
    }
}

/// Up to `plan.questions_per_video` records for one video. Templates are drawn
/// by remaining quota, without replacement within the video.
pub fn generate_for_video(
    gt: &TrajectoryGroundTruth,
    house: &House,
    lexicon: &Lexicon,
    plan: &QuotaPlan,
    quota: &mut QuotaTracker,
    seed: u64,
    telemetry: &mut Telemetry,
) -> Vec<QARecord> {
    let templates = builtin_templates();
    let mut select = stream_from_seed(derive_seed(seed, &["select"]));
    let mut tried = BTreeSet::new();
    let mut out = Vec::new();
    for draw in 0..plan.questions_per_video * plan.template_draws {
        if out.len() == plan.questions_per_video {
            break;
        }
        let Some(index) = quota.draw(&mut select, &tried) else { break };
        tried.insert(index);
        telemetry.template_draws += 1;
        let t = &templates[index];
        let qseed = derive_seed(seed, &["draw", &draw.to_string()]);
        match instantiate(t, gt, house, lexicon, &mut stream_from_seed(qseed), plan.retry_budget) {
            Ok(inst) => {
                quota.record(index);
                out.push(QARecord {
                    question_id: format!("{}-q{}", gt.video_id, out.len()),
                    house_id: house.id.clone(),
                    video_id: gt.video_id.clone(),
                    template_id: t.id,
                    category: t.category,
                    question: inst.question,
                    bindings: inst.bindings,
                    answer: inst.answer,
                    seed: qseed,
                });
            }
            Err(r) => {
                match r {
                    Rejection::EmptyCandidates => telemetry.rejected_empty_candidates += 1,
                    Rejection::Exhausted => telemetry.rejected_exhausted += 1,
                }
                *telemetry.rejections_by_template.entry(t.id).or_default() += 1;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub trajectory: Trajectory,
    /// Frame indices kept by four-to-one sub-sampling, if enabled.
    pub subsample: Option<Vec<usize>>,
    pub gt: TrajectoryGroundTruth,
}

impl VideoRecord {
    pub fn video_id(&self) -> &str {
        &self.trajectory.video_id
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseOutput {
    pub house: House,
    pub videos: Vec<VideoRecord>,
    pub questions: Vec<QARecord>,
    pub telemetry: Telemetry,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitRatio {
    pub train: u32,
    pub validation: u32,
    pub test: u32,
}

impl Default for SplitRatio {
    fn default() -> Self {
        Self { train: 622, validation: 65, test: 56 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitName {
    Train,
    Validation,
    Test,
}

impl SplitName {
    pub const ALL: [SplitName; 3] = [SplitName::Train, SplitName::Validation, SplitName::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::Validation => "validation",
            SplitName::Test => "test",
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("{0} houses cannot fill three non-empty splits (need at least 3)")]
    TooFewHouses(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("house {house}: {source}")]
    Synth { house: String, source: SynthError },
    #[error("video {video}: {source}")]
    GroundTruth { video: String, source: GroundTruthError },
}

/// Split sizes by largest remainder, each at least one.
pub fn split_sizes(n: usize, ratio: &SplitRatio) -> Result<[usize; 3], GenError> {
    if n < 3 {
        return Err(GenError::TooFewHouses(n));
    }
    let r = [ratio.train as u64, ratio.validation as u64, ratio.test as u64];
    let total: u64 = r.iter().sum();
    if total == 0 {
        return Err(GenError::Config("split ratio sums to zero".into()));
    }
    let mut sizes = [0usize; 3];
    let mut rems = [(0u64, 0usize); 3];
    for i in 0..3 {
        let num = n as u64 * r[i];
        sizes[i] = (num / total) as usize;
        rems[i] = (num % total, i);
    }
    let mut left = n - sizes.iter().sum::<usize>();
    rems.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in rems.iter().cycle() {
        if left == 0 {
            break;
        }
        sizes[i] += 1;
        left -= 1;
    }
    for i in 0..3 {
        while sizes[i] == 0 {
            let donor = (0..3).max_by_key(|&j| (sizes[j], std::cmp::Reverse(j))).unwrap();
            sizes[donor] -= 1;
            sizes[i] += 1;
        }
    }
    Ok(sizes)
}

/// Everything that determines a generated dataset besides the master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub houses: usize,
    pub videos_per_house: usize,
    pub subsample: bool,
    pub synth: SynthConfig,
    pub quota: QuotaPlan,
    pub fov: FovConfig,
    pub splits: SplitRatio,
    pub lexicon: Lexicon,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            houses: 20,
            videos_per_house: 130,
            subsample: true,
            synth: SynthConfig::default(),
            quota: QuotaPlan::default(),
            fov: FovConfig::default(),
            splits: SplitRatio::default(),
            lexicon: Lexicon::default(),
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        self.lexicon.validate().map_err(|e| GenError::Config(e.to_string()))?;
        self.synth.validate().map_err(|e| GenError::Config(e.to_string()))?;
        self.quota.validate().map_err(GenError::Config)?;
        if self.videos_per_house == 0 || self.videos_per_house > self.quota.video_cap {
            return Err(GenError::Config(format!(
                "videos_per_house {} must be between 1 and the cap {}",
                self.videos_per_house, self.quota.video_cap
            )));
        }
        if !(self.fov.fov_degrees > 0.0 && self.fov.fov_degrees <= 360.0 && self.fov.max_distance >= 0.0) {
            return Err(GenError::Config("fov must be in (0, 360] with a non-negative distance".into()));
        }
        split_sizes(self.houses, &self.splits).map(|_| ())
    }
}

pub fn house_id(index: usize) -> String {
    format!("house-{index:04}")
}

pub fn video_id(house_id: &str, index: usize) -> String {
    format!("{house_id}-v{index:03}")
}

fn plan_trajectory(house: &House, id: &str, seed: u64) -> Option<Trajectory> {
    let mut rng = stream_from_seed(seed);
    for _ in 0..ENDPOINT_ATTEMPTS {
        let Ok((start, goal)) = sample_endpoints(house, &mut rng) else { return None };
        let path = match shortest_path(house, start, goal) {
            Ok(p) => p,
            Err(TrajectoryError::NoPath(..)) => continue,
            Err(_) => return None,
        };
        match path_to_trajectory(house, id, &path) {
            Ok(t) => return Some(t),
            Err(TrajectoryError::TooLong(_)) => continue,
            Err(_) => return None,
        }
    }
    None
}

/// One house and all of its videos and questions. Pure in (config, master, index).
pub fn generate_house(cfg: &GenConfig, master: u64, index: usize) -> Result<HouseOutput, GenError> {
    let id = house_id(index);
    let house = synth_house(&cfg.synth, &cfg.lexicon, derive_seed(master, &["house", &id]), &id)
        .map_err(|source| GenError::Synth { house: id.clone(), source })?;
    let mut telemetry = Telemetry::default();
    let mut quota = QuotaTracker::new(&cfg.quota, cfg.videos_per_house * cfg.quota.questions_per_video);
    let mut videos = Vec::new();
    let mut questions = Vec::new();
    for v in 0..cfg.videos_per_house {
        telemetry.video_slots += 1;
        let vid = video_id(&id, v);
        let Some(trajectory) = plan_trajectory(&house, &vid, derive_seed(master, &["trajectory", &vid])) else {
            telemetry.slots_without_trajectory += 1;
            continue;
        };
        let gt = trajectory_ground_truth(&house, &trajectory, &cfg.fov)
            .map_err(|source| GenError::GroundTruth { video: vid.clone(), source })?;
        if !gt.passes_visibility_guard() {
            telemetry.videos_below_visibility_guard += 1;
            continue;
        }
        let qs = generate_for_video(
            &gt,
            &house,
            &cfg.lexicon,
            &cfg.quota,
            &mut quota,
            derive_seed(master, &["questions", &vid]),
            &mut telemetry,
        );
        if qs.is_empty() {
            telemetry.videos_without_questions += 1;
            continue;
        }
        let subsample = cfg.subsample.then(|| {
            let mut rng = stream_from_seed(derive_seed(master, &["subsample", &vid]));
            subsample_indices(trajectory.len(), &mut rng).expect("trajectory is non-empty")
        });
        telemetry.videos_kept += 1;
        videos.push(VideoRecord { trajectory, subsample, gt });
        questions.extend(qs);
    }
    Ok(HouseOutput { house, videos, questions, telemetry })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub master_seed: u64,
    pub config: GenConfig,
    /// House outputs in house-id order.
    pub houses: Vec<HouseOutput>,
    /// House ids per split, sorted.
    pub splits: BTreeMap<SplitName, Vec<String>>,
    pub telemetry: Telemetry,
}

impl Dataset {
    pub fn questions(&self) -> impl Iterator<Item = &QARecord> {
        self.houses.iter().flat_map(|h| h.questions.iter())
    }

    pub fn split_of(&self, house_id: &str) -> Option<SplitName> {
        self.splits.iter().find(|(_, ids)| ids.iter().any(|i| i == house_id)).map(|(s, _)| *s)
    }

    pub fn split_questions(&self, split: SplitName) -> Vec<&QARecord> {
        let ids: BTreeSet<&str> = self.splits.get(&split).into_iter().flatten().map(String::as_str).collect();
        self.questions().filter(|q| ids.contains(q.house_id.as_str())).collect()
    }

    /// Realized question count per template id, all 28 ids present.
    pub fn template_counts(&self) -> BTreeMap<u8, usize> {
        let mut m: BTreeMap<u8, usize> = builtin_templates().iter().map(|t| (t.id, 0)).collect();
        for q in self.questions() {
            *m.entry(q.template_id).or_default() += 1;
        }
        m
    }
}

/// Assigns house ids to splits: a seeded shuffle, then contiguous blocks.
pub fn assign_splits(ids: &[String], ratio: &SplitRatio, master: u64) -> Result<BTreeMap<SplitName, Vec<String>>, GenError> {
    use rand::seq::SliceRandom;
    let sizes = split_sizes(ids.len(), ratio)?;
    let mut order = ids.to_vec();
    order.shuffle(&mut stream_from_seed(derive_seed(master, &["splits"])));
    let mut out = BTreeMap::new();
    let mut start = 0;
    for (split, n) in SplitName::ALL.into_iter().zip(sizes) {
        let mut part = order[start..start + n].to_vec();
        part.sort();
        out.insert(split, part);
        start += n;
    }
    Ok(out)
}

/// Generates the whole dataset. `jobs` = 1 runs serially; any other value uses
/// a pool of that many threads (0 = rayon default). Output is identical either way.
pub fn build_dataset(cfg: &GenConfig, master: u64, jobs: usize) -> Result<Dataset, GenError> {
    cfg.validate()?;
    let houses: Vec<HouseOutput> = if jobs == 1 {
        (0..cfg.houses).map(|i| generate_house(cfg, master, i)).collect::<Result<_, _>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| GenError::Config(format!("thread pool: {e}")))?;
        pool.install(|| (0..cfg.houses).into_par_iter().map(|i| generate_house(cfg, master, i)).collect::<Result<_, _>>())?
    };
    let ids: Vec<String> = houses.iter().map(|h| h.house.id.clone()).collect();
    let splits = assign_splits(&ids, &cfg.splits, master)?;
    let mut telemetry = Telemetry::default();
    for h in &houses {
        telemetry.merge(&h.telemetry);
    }
    Ok(Dataset { master_seed: master, config: cfg.clone(), houses, splits, telemetry })
}

/// Re-executes a stored record on its video's ground truth.
pub fn reexecute(record: &QARecord, house: &House, gt: &TrajectoryGroundTruth, lexicon: &Lexicon) -> Option<Outcome> {
    let t = template_by_id(record.template_id)?;
    execute(&t.program, ExecContext { house, gt, lexicon }, &record.bindings).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground_truth::{aggregate_gt, FrameGT};
    use crate::scene::fixtures::{object, row_house};
    use crate::scene::{Cell, RoomId};

    fn see_all(h: &House) -> TrajectoryGroundTruth {
        let frame = FrameGT {
            index: 0,
            current_room: RoomId(0),
            visible_objects: h.objects.iter().map(|o| o.id).collect(),
            linked_rooms: h.rooms.iter().map(|r| r.id).collect(),
        };
        aggregate_gt(&h.id, "fixture-v000", vec![frame]).unwrap()
    }

    #[test]
    fn room_candidates_are_the_seen_rooms() {
        let h = row_house(&["kitchen", "living room"], 3, 3, true);
        let gt = see_all(&h);
        let t = template_by_id(17).unwrap();
        let c = candidate_sets(t, &gt, &h, &Lexicon::default());
        let rooms: Vec<&BTreeSet<String>> =
            c.iter().filter(|(k, _)| k.name == TagName::RoomType).map(|(_, v)| v).collect();
        assert_eq!(rooms, vec![&BTreeSet::from(["kitchen".to_string(), "living room".to_string()])]);
    }

    #[test]
    fn no_seen_objects_means_no_types() {
        let h = row_house(&["kitchen"], 3, 3, false);
        let gt = see_all(&h);
        let c = candidate_sets(template_by_id(16).unwrap(), &gt, &h, &Lexicon::default());
        assert!(c.iter().any(|(k, v)| k.name == TagName::ObjType && v.is_empty()));
        let mut rng = stream_from_seed(0);
        let r = instantiate(template_by_id(16).unwrap(), &gt, &h, &Lexicon::default(), &mut rng, 30);
        assert_eq!(r, Err(Rejection::EmptyCandidates));
    }

    #[test]
    fn color_slot_excludes_colors() {
        let mut h = row_house(&["kitchen"], 4, 4, false);
        h.objects.push(object(0, "table", "gray", &["large"], Cell::new(1, 1), 3.0, 0));
        let gt = see_all(&h);
        let c = candidate_sets(template_by_id(23).unwrap(), &gt, &h, &Lexicon::default());
        let attr = c.iter().find(|(k, _)| k.name == TagName::Attr).unwrap().1;
        assert_eq!(attr, &BTreeSet::from(["large".to_string()]));
    }

    #[test]
    fn singleton_candidates_succeed_first_try() {
        let mut h = row_house(&["kitchen"], 4, 4, false);
        h.objects.push(object(0, "table", "gray", &["large"], Cell::new(1, 1), 3.0, 0));
        let gt = see_all(&h);
        let mut rng = stream_from_seed(9);
        let r = instantiate(template_by_id(23).unwrap(), &gt, &h, &Lexicon::default(), &mut rng, 30).unwrap();
        assert_eq!(r.attempts, 1);
        assert_eq!(r.answer, "gray");
        assert_eq!(r.question, "What color is the large table?");
    }

    #[test]
    fn duplicated_pair_is_rejected() {
        let mut h = row_house(&["kitchen"], 4, 4, false);
        h.objects.push(object(0, "table", "gray", &["large"], Cell::new(1, 1), 3.0, 0));
        h.objects.push(object(1, "table", "red", &["large"], Cell::new(2, 1), 3.0, 0));
        let gt = see_all(&h);
        let mut rng = stream_from_seed(9);
        let r = instantiate(template_by_id(23).unwrap(), &gt, &h, &Lexicon::default(), &mut rng, 30);
        assert_eq!(r, Err(Rejection::Exhausted));
    }

    #[test]
    fn exhausted_quota_yields_nothing() {
        let mut h = row_house(&["kitchen"], 4, 4, false);
        h.objects.push(object(0, "table", "gray", &["large"], Cell::new(1, 1), 3.0, 0));
        let gt = see_all(&h);
        let plan = QuotaPlan::default();
        let mut q = QuotaTracker::new(&plan, 0);
        assert!(q.exhausted());
        let mut tel = Telemetry::default();
        assert!(generate_for_video(&gt, &h, &Lexicon::default(), &plan, &mut q, 1, &mut tel).is_empty());
    }

    #[test]
    fn ten_houses_split_eight_one_one() {
        assert_eq!(split_sizes(10, &SplitRatio::default()).unwrap(), [8, 1, 1]);
        assert_eq!(split_sizes(3, &SplitRatio::default()).unwrap(), [1, 1, 1]);
        assert_eq!(split_sizes(743, &SplitRatio::default()).unwrap(), [622, 65, 56]);
        assert_eq!(split_sizes(2, &SplitRatio::default()), Err(GenError::TooFewHouses(2)));
        let ids: Vec<String> = (0..10).map(house_id).collect();
        let s = assign_splits(&ids, &SplitRatio::default(), 4).unwrap();
        let all: BTreeSet<&String> = s.values().flatten().collect();
        assert_eq!(all.len(), 10);
        assert_eq!(s[&SplitName::Train].len(), 8);
    }

    #[test]
    fn proportions_sum_to_one() {
        let p = QuotaPlan::default().proportions();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((p[15] - 4122.0 / 101_332.0).abs() < 1e-12);
    }

    #[test]
    fn small_dataset_records_reexecute() {
        let cfg = GenConfig { houses: 3, videos_per_house: 12, ..Default::default() };
        let d = build_dataset(&cfg, 17, 1).unwrap();
        assert!(d.questions().count() > 10);
        let lex = &cfg.lexicon;
        for h in &d.houses {
            assert!(h.videos.len() <= cfg.quota.video_cap);
            for q in &h.questions {
                let v = h.videos.iter().find(|v| v.video_id() == q.video_id).unwrap();
                assert_eq!(reexecute(q, &h.house, &v.gt, lex), Some(Outcome::Answer(q.answer.clone())));
                assert!(lex.answer_vocabulary().contains(&q.answer));
            }
        }
        assert_eq!(build_dataset(&cfg, 17, 3).unwrap(), d);
    }
}
