//! On-disk dataset layout.
//!
//! ```text
//! <dir>/manifest.json            ids, counts, telemetry, per-file digests
//! <dir>/config.json              resolved generation config
//! <dir>/lexicon.json
//! <dir>/templates.json           template table
//! <dir>/houses/<house>.json
//! <dir>/<split>/questions.jsonl  one QARecord per line
//! <dir>/<split>/videos/<video>.jsonl
//!     header line (trajectory, sub-sample indices), one line per frame, aggregate line
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checks::dataset_violations;
use crate::config::{canonical_json, config_digest, sha256_hex};
use crate::generator::{Dataset, GenConfig, HouseOutput, QARecord, SplitName, Telemetry, VideoRecord};
use crate::ground_truth::{aggregate_gt, FrameGT, SeenSpan};
use crate::question::{builtin_templates, TemplateRecord};
use crate::scene::{House, Lexicon, ObjectId, RoomId, Violation};
use crate::trajectory::Trajectory;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Schema { path: PathBuf, line: usize, message: String },
    #[error("{path}: format version {found}, expected {FORMAT_VERSION}")]
    Version { path: PathBuf, found: u32 },
    #[error("missing file {0}")]
    Missing(PathBuf),
    #[error("{path}: {message}")]
    Inconsistent { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitListing {
    pub houses: Vec<String>,
    pub videos: Vec<String>,
    pub questions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub master_seed: u64,
    pub config_digest: String,
    pub splits: BTreeMap<SplitName, SplitListing>,
    pub template_counts: BTreeMap<u8, usize>,
    pub telemetry: Telemetry,
    pub house_telemetry: BTreeMap<String, Telemetry>,
    /// sha256 per file, keyed by path relative to the dataset directory.
    pub files: BTreeMap<String, String>,
    /// sha256 over the `files` table; one hash identifies the whole dataset.
    pub content_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum VideoLine {
    Header {
        format_version: u32,
        trajectory: Trajectory,
        subsample: Option<Vec<usize>>,
    },
    Frame(FrameGT),
    Aggregate {
        seen_objects: BTreeSet<ObjectId>,
        seen_rooms: BTreeSet<RoomId>,
        object_spans: BTreeMap<ObjectId, SeenSpan>,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            IoError::Missing(path.to_path_buf())
        } else {
            IoError::Io { path: path.to_path_buf(), source }
        }
    }
}

fn json_line<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string(v).expect("record serializes");
    s.push('\n');
    s
}

fn json_doc<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("document serializes");
    s.push('\n');
    s
}

pub fn video_path(split: SplitName, video_id: &str) -> String {
    format!("{}/videos/{video_id}.jsonl", split.as_str())
}

pub fn house_path(house_id: &str) -> String {
    format!("houses/{house_id}.json")
}

fn video_file(v: &VideoRecord) -> String {
    let mut s = json_line(&VideoLine::Header {
        format_version: FORMAT_VERSION,
        trajectory: v.trajectory.clone(),
        subsample: v.subsample.clone(),
    });
    for f in &v.gt.frames {
        s.push_str(&json_line(&VideoLine::Frame(f.clone())));
    }
    s.push_str(&json_line(&VideoLine::Aggregate {
        seen_objects: v.gt.seen_objects.clone(),
        seen_rooms: v.gt.seen_rooms.clone(),
        object_spans: v.gt.object_spans.clone(),
    }));
    s
}

/// Every file of the dataset except the manifest, keyed by relative path.
fn render_files(d: &Dataset) -> BTreeMap<String, String> {
    let mut files = BTreeMap::new();
    files.insert("config.json".into(), canonical_json(&d.config));
    files.insert("lexicon.json".into(), json_doc(&d.config.lexicon));
    let table: Vec<TemplateRecord> = builtin_templates().iter().map(|t| t.record()).collect();
    files.insert("templates.json".into(), json_doc(&table));
    for h in &d.houses {
        files.insert(house_path(&h.house.id), json_doc(&h.house));
    }
    for split in SplitName::ALL {
        let mut questions = String::new();
        for h in d.houses.iter().filter(|h| d.split_of(&h.house.id) == Some(split)) {
            for v in &h.videos {
                files.insert(video_path(split, v.video_id()), video_file(v));
            }
            for q in &h.questions {
                questions.push_str(&json_line(q));
            }
        }
        files.insert(format!("{}/questions.jsonl", split.as_str()), questions);
    }
    files
}

fn digest_table(files: &BTreeMap<String, String>) -> String {
    let mut s = String::new();
    for (path, digest) in files {
        s.push_str(path);
        s.push('\0');
        s.push_str(digest);
        s.push('\n');
    }
    sha256_hex(s.as_bytes())
}

/// The manifest `write_dataset` would write, without touching the disk.
pub fn build_manifest(d: &Dataset) -> Manifest {
    let files: BTreeMap<String, String> =
        render_files(d).into_iter().map(|(p, body)| (p, sha256_hex(body.as_bytes()))).collect();
    manifest_with(d, files)
}

fn manifest_with(d: &Dataset, files: BTreeMap<String, String>) -> Manifest {
    let mut splits = BTreeMap::new();
    for split in SplitName::ALL {
        let mut l = SplitListing::default();
        for h in d.houses.iter().filter(|h| d.split_of(&h.house.id) == Some(split)) {
            l.houses.push(h.house.id.clone());
            l.videos.extend(h.videos.iter().map(|v| v.video_id().to_string()));
            l.questions.extend(h.questions.iter().map(|q| q.question_id.clone()));
        }
        splits.insert(split, l);
    }
    Manifest {
        format_version: FORMAT_VERSION,
        master_seed: d.master_seed,
        config_digest: config_digest(&d.config),
        splits,
        template_counts: d.template_counts(),
        telemetry: d.telemetry.clone(),
        house_telemetry: d.houses.iter().map(|h| (h.house.id.clone(), h.telemetry.clone())).collect(),
        content_digest: digest_table(&files),
        files,
    }
}

/// Writes the dataset under `dir` (created if needed) and returns its manifest.
pub fn write_dataset(d: &Dataset, dir: &Path) -> Result<Manifest, IoError> {
    let rendered = render_files(d);
    let mut digests = BTreeMap::new();
    for (rel, body) in &rendered {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        fs::write(&path, body).map_err(io_err(&path))?;
        digests.insert(rel.clone(), sha256_hex(body.as_bytes()));
    }
    let manifest = manifest_with(d, digests);
    let path = dir.join("manifest.json");
    fs::write(&path, json_doc(&manifest)).map_err(io_err(&path))?;
    Ok(manifest)
}

fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn read_doc<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| IoError::Schema { path: path.to_path_buf(), line: e.line(), message: e.to_string() })
}

fn read_lines<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, IoError> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(line).map_err(|e| IoError::Schema {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Reads one per-video ground-truth file.
pub fn read_video(path: &Path) -> Result<VideoRecord, IoError> {
    let lines: Vec<VideoLine> = read_lines(path)?;
    let bad = |message: &str| IoError::Inconsistent { path: path.to_path_buf(), message: message.into() };
    let mut it = lines.into_iter();
    let Some(VideoLine::Header { format_version, trajectory, subsample }) = it.next() else {
        return Err(bad("first line must be the header"));
    };
    if format_version != FORMAT_VERSION {
        return Err(IoError::Version { path: path.to_path_buf(), found: format_version });
    }
    let mut frames = Vec::new();
    let mut aggregate = None;
    for line in it {
        match line {
            VideoLine::Frame(f) if aggregate.is_none() => frames.push(f),
            VideoLine::Aggregate { seen_objects, seen_rooms, object_spans } if aggregate.is_none() => {
                aggregate = Some((seen_objects, seen_rooms, object_spans));
            }
            _ => return Err(bad("frames must precede a single trailing aggregate line")),
        }
    }
    let (seen_objects, seen_rooms, object_spans) = aggregate.ok_or_else(|| bad("missing aggregate line"))?;
    let gt = aggregate_gt(&trajectory.house_id, &trajectory.video_id, frames).map_err(|e| bad(&e.to_string()))?;
    if gt.seen_objects != seen_objects || gt.seen_rooms != seen_rooms || gt.object_spans != object_spans {
        return Err(bad("aggregate line disagrees with the frames"));
    }
    Ok(VideoRecord { trajectory, subsample, gt })
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, IoError> {
    let path = dir.join("manifest.json");
    let m: Manifest = read_doc(&path)?;
    if m.format_version != FORMAT_VERSION {
        return Err(IoError::Version { path, found: m.format_version });
    }
    Ok(m)
}

/// Reads a dataset written by `write_dataset`.
pub fn read_dataset(dir: &Path) -> Result<Dataset, IoError> {
    let manifest = read_manifest(dir)?;
    let config: GenConfig = read_doc(&dir.join("config.json"))?;
    if config_digest(&config) != manifest.config_digest {
        return Err(IoError::Inconsistent {
            path: dir.join("config.json"),
            message: "config digest does not match the manifest".into(),
        });
    }
    let lexicon: Lexicon = read_doc(&dir.join("lexicon.json"))?;
    if lexicon != config.lexicon {
        return Err(IoError::Inconsistent { path: dir.join("lexicon.json"), message: "differs from config lexicon".into() });
    }
    let mut houses = Vec::new();
    let mut splits = BTreeMap::new();
    for (split, listing) in &manifest.splits {
        let qpath = dir.join(format!("{}/questions.jsonl", split.as_str()));
        let questions: Vec<QARecord> = read_lines(&qpath)?;
        let listed: Vec<&str> = questions.iter().map(|q| q.question_id.as_str()).collect();
        if listed != listing.questions.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(IoError::Inconsistent { path: qpath, message: "question ids differ from the manifest".into() });
        }
        let mut by_house: BTreeMap<&str, Vec<QARecord>> = BTreeMap::new();
        for q in &questions {
            by_house.entry(q.house_id.as_str()).or_default().push(q.clone());
        }
        for hid in &listing.houses {
            let house: House = read_doc(&dir.join(house_path(hid)))?;
            let prefix = format!("{hid}-");
            let mut videos = Vec::new();
            for vid in listing.videos.iter().filter(|v| v.starts_with(&prefix)) {
                videos.push(read_video(&dir.join(video_path(*split, vid)))?);
            }
            let telemetry = manifest.house_telemetry.get(hid).cloned().unwrap_or_default();
            let questions = by_house.remove(hid.as_str()).unwrap_or_default();
            houses.push(HouseOutput { house, videos, questions, telemetry });
        }
        if let Some(stray) = by_house.keys().next() {
            return Err(IoError::Inconsistent {
                path: qpath,
                message: format!("questions for house {stray}, which is not in this split"),
            });
        }
        splits.insert(*split, listing.houses.clone());
    }
    houses.sort_by(|a, b| a.house.id.cmp(&b.house.id));
    Ok(Dataset { master_seed: manifest.master_seed, config, houses, splits, telemetry: manifest.telemetry })
}

/// Schema, digest and invariant check of a dataset directory. Errors mean the
/// directory could not be read at all; violations are returned as data.
pub fn validate_dir(dir: &Path) -> Result<Vec<Violation>, IoError> {
    let manifest = read_manifest(dir)?;
    let d = read_dataset(dir)?;
    let mut out = Vec::new();
    for (rel, digest) in &manifest.files {
        let path = dir.join(rel);
        match fs::read(&path) {
            Ok(bytes) if &sha256_hex(&bytes) == digest => {}
            Ok(_) => out.push(Violation::new("file-digest", rel, "content changed since generation")),
            Err(_) => out.push(Violation::new("file-present", rel, "listed in manifest but missing")),
        }
    }
    let expected = build_manifest(&d);
    if expected.files.keys().ne(manifest.files.keys()) {
        out.push(Violation::new("manifest-files", "manifest.json", "file table does not match dataset contents"));
    }
    if manifest.content_digest != digest_table(&manifest.files) {
        out.push(Violation::new("manifest-digest", "manifest.json", "content digest does not match file table"));
    }
    if manifest.template_counts != d.template_counts() {
        out.push(Violation::new("manifest-counts", "manifest.json", "template counts differ from questions"));
    }
    let mut sum = Telemetry::default();
    for t in manifest.house_telemetry.values() {
        sum.merge(t);
    }
    if sum != manifest.telemetry {
        out.push(Violation::new("manifest-telemetry", "manifest.json", "house telemetry does not sum to the total"));
    }
    out.extend(dataset_violations(&d));
    Ok(out)
}

/// Top-down map of a house with a trajectory drawn on it. `S`/`G` mark the
/// endpoints, `*` the path, `o` objects, `+` doorways, `#` walls.
pub fn render_ascii(house: &House, trajectory: Option<&Trajectory>) -> String {
    let (w, h) = (house.grid.width(), house.grid.height());
    let mut rows: Vec<Vec<char>> = house.grid.to_rows().iter().map(|r| r.chars().collect()).collect();
    let mut put = |x: i32, y: i32, c: char| {
        if x >= 0 && y >= 0 && x < w && y < h {
            rows[y as usize][x as usize] = c;
        }
    };
    for d in &house.doorways {
        put(d.cell.x, d.cell.y, '+');
    }
    for o in &house.objects {
        put(o.cell.x, o.cell.y, 'o');
    }
    if let Some(t) = trajectory {
        for p in &t.poses {
            put(p.cell.x, p.cell.y, '*');
        }
        if let (Some(a), Some(b)) = (t.poses.first(), t.poses.last()) {
            put(a.cell.x, a.cell.y, 'S');
            put(b.cell.x, b.cell.y, 'G');
        }
    }
    let mut s = String::new();
    for r in rows {
        s.extend(r);
        s.push('\n');
    }
    for room in &house.rooms {
        s.push_str(&format!("{} {} at ({},{}) {}x{}\n", room.id, room.room_type, room.bbox.x, room.bbox.y, room.bbox.w, room.bbox.h));
    }
    s
}
