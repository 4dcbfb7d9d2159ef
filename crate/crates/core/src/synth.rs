//! Procedural house generation.
//!
//! Layout is a guillotine partition of the grid interior into rectangular
//! rooms separated by one-cell walls. Doorways are opened on shared walls
//! along a random spanning tree of the room adjacency graph, plus a few extra.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{stream_from_seed, Stream};
use crate::scene::{doorway_sides, Cell, Doorway, Grid, House, Lexicon, ObjectId, ObjectInstance, Rect, Room, RoomId};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    Config(String),
    #[error("could not place {rooms} rooms after {attempts} attempts; grid too small for the configuration")]
    Placement { rooms: u32, attempts: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub width: i32,
    pub height: i32,
    /// Inclusive room-count range.
    pub rooms: (u32, u32),
    /// Inclusive objects-per-room range.
    pub objects_per_room: (u32, u32),
    pub min_room_size: i32,
    /// Chance that an object carries one non-color attribute.
    pub extra_attr_probability: f64,
    /// Chance, per house, of cloning one object (same type and attributes) within its room.
    pub duplicate_probability: f64,
    /// Chance of opening a doorway between adjacent rooms beyond the spanning tree.
    pub extra_door_probability: f64,
    pub max_attempts: u32,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            width: 24,
            height: 24,
            rooms: (4, 8),
            objects_per_room: (3, 10),
            min_room_size: 3,
            extra_attr_probability: 0.6,
            duplicate_probability: 0.25,
            extra_door_probability: 0.3,
            max_attempts: 64,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Config(m));
        if self.rooms.0 == 0 || self.rooms.0 > self.rooms.1 {
            return bad(format!("room range {:?} is empty or starts at zero", self.rooms));
        }
        if self.objects_per_room.0 > self.objects_per_room.1 {
            return bad(format!("objects-per-room range {:?} is empty", self.objects_per_room));
        }
        if self.min_room_size < 1 {
            return bad("min_room_size must be at least 1".into());
        }
        for (name, p) in [
            ("extra_attr_probability", self.extra_attr_probability),
            ("duplicate_probability", self.duplicate_probability),
            ("extra_door_probability", self.extra_door_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be positive".into());
        }
        // A regular tiling of min-size rooms must fit the interior.
        let per_row = (self.width - 1) / (self.min_room_size + 1);
        let per_col = (self.height - 1) / (self.min_room_size + 1);
        if (per_row.max(0) as i64) * (per_col.max(0) as i64) < self.rooms.1 as i64 {
            return bad(format!(
                "{}x{} grid cannot hold {} rooms of size {}",
                self.width, self.height, self.rooms.1, self.min_room_size
            ));
        }
        Ok(())
    }
}

fn split(rng: &mut Stream, r: Rect, m: i32) -> Option<(Rect, Rect)> {
    let can_x = r.w > 2 * m;
    let can_y = r.h > 2 * m;
    let vertical = match (can_x, can_y) {
        (false, false) => return None,
        (true, false) => true,
        (false, true) => false,
        (true, true) if r.w != r.h => r.w > r.h,
        (true, true) => rng.random_bool(0.5),
    };
    if vertical {
        let at = rng.random_range(m..=r.w - m - 1);
        Some((Rect::new(r.x, r.y, at, r.h), Rect::new(r.x + at + 1, r.y, r.w - at - 1, r.h)))
    } else {
        let at = rng.random_range(m..=r.h - m - 1);
        Some((Rect::new(r.x, r.y, r.w, at), Rect::new(r.x, r.y + at + 1, r.w, r.h - at - 1)))
    }
}

fn partition(rng: &mut Stream, cfg: &SynthConfig, n: u32) -> Option<Vec<Rect>> {
    let m = cfg.min_room_size;
    let mut rects = vec![Rect::new(1, 1, cfg.width - 2, cfg.height - 2)];
    while (rects.len() as u32) < n {
        let splittable: Vec<usize> =
            (0..rects.len()).filter(|&i| rects[i].w > 2 * m || rects[i].h > 2 * m).collect();
        let &pick = splittable.choose_weighted(rng, |&i| rects[i].area() as f64).ok()?;
        let (a, b) = split(rng, rects[pick], m)?;
        rects[pick] = a;
        rects.push(b);
    }
    Some(rects)
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut i = i;
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Builds a house from `(config, seed)`. The result always passes `validate_house`.
pub fn synth_house(cfg: &SynthConfig, lexicon: &Lexicon, seed: u64, id: &str) -> Result<House, SynthError> {
    cfg.validate()?;
    let mut rng = stream_from_seed(seed);
    let n = rng.random_range(cfg.rooms.0..=cfg.rooms.1);
    let rects = (0..cfg.max_attempts)
        .find_map(|_| partition(&mut rng, cfg, n))
        .ok_or(SynthError::Placement { rooms: n, attempts: cfg.max_attempts })?;

    let mut grid = Grid::new(cfg.width, cfg.height);
    let rooms: Vec<Room> = rects
        .iter()
        .enumerate()
        .map(|(i, r)| {
            for c in r.cells() {
                grid.set_walkable(c, true);
            }
            let room_type = lexicon.room_types.choose(&mut rng).expect("non-empty room types").clone();
            Room::new(RoomId(i as u32), room_type, *r)
        })
        .collect();
    let mut house = House { id: id.to_string(), grid, rooms, doorways: Vec::new(), objects: Vec::new() };

    let mut candidates: BTreeMap<(RoomId, RoomId), Vec<Cell>> = BTreeMap::new();
    for y in 1..cfg.height - 1 {
        for x in 1..cfg.width - 1 {
            let c = Cell::new(x, y);
            if house.grid.is_walkable(c) {
                continue;
            }
            if let Some((a, b)) = doorway_sides(&house, c) {
                candidates.entry((a.min(b), a.max(b))).or_default().push(c);
            }
        }
    }
    let mut pairs: Vec<(RoomId, RoomId)> = candidates.keys().copied().collect();
    pairs.shuffle(&mut rng);
    let mut parent: Vec<usize> = (0..house.rooms.len()).collect();
    let mut doors = Vec::new();
    for &(a, b) in &pairs {
        let (ra, rb) = (find(&mut parent, a.0 as usize), find(&mut parent, b.0 as usize));
        let in_tree = ra != rb;
        if in_tree {
            parent[ra] = rb;
        }
        if in_tree || rng.random_bool(cfg.extra_door_probability) {
            let cell = *candidates[&(a, b)].choose(&mut rng).expect("candidate list is non-empty");
            doors.push(Doorway { rooms: (a, b), cell });
        }
    }
    doors.sort_by_key(|d| (d.rooms, d.cell));
    for d in &doors {
        house.grid.set_walkable(d.cell, true);
    }
    house.doorways = doors;

    let mut objects = Vec::new();
    for room in &house.rooms {
        let want = rng.random_range(cfg.objects_per_room.0..=cfg.objects_per_room.1).min(room.area_cells);
        let cells: Vec<Cell> = room.bbox.cells().collect();
        for &cell in cells.choose_multiple(&mut rng, want as usize) {
            let obj_type = lexicon.object_types.choose(&mut rng).expect("non-empty object types").singular.clone();
            let color = lexicon.colors.choose(&mut rng).expect("non-empty colors").clone();
            let mut extra_attrs = BTreeSet::new();
            if !lexicon.extra_attrs.is_empty() && rng.random_bool(cfg.extra_attr_probability) {
                extra_attrs.insert(lexicon.extra_attrs.choose(&mut rng).unwrap().clone());
            }
            let size = (rng.random_range(0.2..8.0f64) * 100.0).round() / 100.0;
            objects.push(ObjectInstance {
                id: ObjectId(objects.len() as u32),
                obj_type,
                color,
                extra_attrs,
                cell,
                size,
                room_id: room.id,
            });
        }
    }

    if !objects.is_empty() && rng.random_bool(cfg.duplicate_probability) {
        let src = objects.choose(&mut rng).unwrap().clone();
        let bbox = house.room(src.room_id).unwrap().bbox;
        let free: Vec<Cell> = bbox.cells().filter(|c| objects.iter().all(|o| o.cell != *c)).collect();
        if let Some(&cell) = free.choose(&mut rng) {
            let size = (rng.random_range(0.2..8.0f64) * 100.0).round() / 100.0;
            objects.push(ObjectInstance { id: ObjectId(objects.len() as u32), cell, size, ..src });
        }
    }
    house.objects = objects;
    Ok(house)
}
