//! Per-frame and per-trajectory ground truth: what was seen, and where.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{adjacent_rooms, Cell, House, ObjectId, RoomId};
use crate::trajectory::{Pose, Trajectory};
use crate::visibility::{visible_objects, FovConfig};

/// Videos seeing fewer distinct objects than this are discarded.
pub const MIN_SEEN_OBJECTS: usize = 2;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroundTruthError {
    #[error("no frames to aggregate")]
    Empty,
    #[error("pose at ({},{}) is neither in a room nor on a doorway", .0.x, .0.y)]
    OffGrid(Cell),
    #[error("trajectory starts outside every room at ({},{})", .0.x, .0.y)]
    StartOutsideRoom(Cell),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameGT {
    pub index: usize,
    pub current_room: RoomId,
    pub visible_objects: BTreeSet<ObjectId>,
    pub linked_rooms: BTreeSet<RoomId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeenSpan {
    pub first: usize,
    pub last: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryGroundTruth {
    pub house_id: String,
    pub video_id: String,
    pub frames: Vec<FrameGT>,
    pub seen_objects: BTreeSet<ObjectId>,
    pub seen_rooms: BTreeSet<RoomId>,
    pub object_spans: BTreeMap<ObjectId, SeenSpan>,
}

impl TrajectoryGroundTruth {
    pub fn passes_visibility_guard(&self) -> bool {
        self.seen_objects.len() >= MIN_SEEN_OBJECTS
    }
}

/// Room the agent occupies at `cell`; doorway cells keep `last_room`.
pub fn resolve_room(house: &House, cell: Cell, last_room: Option<RoomId>) -> Result<RoomId, GroundTruthError> {
    match house.room_at(cell) {
        Some(r) => Ok(r),
        None if house.is_doorway(cell) => last_room.ok_or(GroundTruthError::StartOutsideRoom(cell)),
        None => Err(GroundTruthError::OffGrid(cell)),
    }
}

/// Visible objects restricted to the current room and its neighbours.
pub fn frame_ground_truth(house: &House, pose: &Pose, index: usize, current_room: RoomId, fov: &FovConfig) -> FrameGT {
    let mut allowed = adjacent_rooms(house, current_room).unwrap_or_default();
    allowed.insert(current_room);
    let visible: BTreeSet<ObjectId> = visible_objects(house, pose, fov)
        .into_iter()
        .filter(|id| house.object(*id).is_some_and(|o| allowed.contains(&o.room_id)))
        .collect();
    let mut linked_rooms: BTreeSet<RoomId> = visible.iter().filter_map(|id| house.object(*id)).map(|o| o.room_id).collect();
    linked_rooms.insert(current_room);
    FrameGT { index, current_room, visible_objects: visible, linked_rooms }
}

pub fn aggregate_gt(house_id: &str, video_id: &str, frames: Vec<FrameGT>) -> Result<TrajectoryGroundTruth, GroundTruthError> {
    if frames.is_empty() {
        return Err(GroundTruthError::Empty);
    }
    let mut seen_objects = BTreeSet::new();
    let mut seen_rooms = BTreeSet::new();
    let mut object_spans: BTreeMap<ObjectId, SeenSpan> = BTreeMap::new();
    for f in &frames {
        seen_rooms.extend(f.linked_rooms.iter().copied());
        seen_rooms.insert(f.current_room);
        for &o in &f.visible_objects {
            seen_objects.insert(o);
            object_spans
                .entry(o)
                .and_modify(|s| {
                    s.first = s.first.min(f.index);
                    s.last = s.last.max(f.index);
                })
                .or_insert(SeenSpan { first: f.index, last: f.index });
        }
    }
    Ok(TrajectoryGroundTruth {
        house_id: house_id.to_string(),
        video_id: video_id.to_string(),
        frames,
        seen_objects,
        seen_rooms,
        object_spans,
    })
}

pub fn trajectory_ground_truth(
    house: &House,
    traj: &Trajectory,
    fov: &FovConfig,
) -> Result<TrajectoryGroundTruth, GroundTruthError> {
    let start = traj.poses.first().ok_or(GroundTruthError::Empty)?.cell;
    let mut last = Some(house.room_at(start).ok_or(GroundTruthError::StartOutsideRoom(start))?);
    let mut frames = Vec::with_capacity(traj.poses.len());
    for (i, pose) in traj.poses.iter().enumerate() {
        let room = resolve_room(house, pose.cell, last)?;
        last = Some(room);
        frames.push(frame_ground_truth(house, pose, i, room, fov));
    }
    aggregate_gt(&traj.house_id, &traj.video_id, frames)
}
