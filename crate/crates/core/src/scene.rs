//! Environment data model: lexicon, rooms, objects and houses.
//!
//! A house is a walkable grid partitioned into rectangular rooms separated by
//! one-cell walls. Doorways are wall cells opened between two rooms.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SceneError {
    #[error("unknown room id {0}")]
    UnknownRoom(RoomId),
    #[error("unknown object id {0}")]
    UnknownObject(ObjectId),
    #[error("invalid lexicon: {0}")]
    Lexicon(String),
}

macro_rules! string_id {
    ($name:ident, $prefix:literal) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                s.strip_prefix($prefix)
                    .and_then(|n| n.parse().ok())
                    .map($name)
                    .ok_or_else(|| format!(concat!("expected id of the form ", $prefix, "<n>, got {:?}"), s))
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(D::Error::custom)
            }
        }
    };
}

string_id!(RoomId, "r");
string_id!(ObjectId, "o");

/// Grid position; `y` grows southward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn offset(self, dx: i32, dy: i32) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }

    pub fn chebyshev(self, other: Cell) -> i32 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}

/// Axis-aligned cell rectangle; covers `x..x+w` by `y..y+h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x: i32,
    pub y: i32,
    pub w: i32,
    pub h: i32,
}

impl Rect {
    pub fn new(x: i32, y: i32, w: i32, h: i32) -> Self {
        Self { x, y, w, h }
    }

    pub fn is_empty(&self) -> bool {
        self.w <= 0 || self.h <= 0
    }

    pub fn area(&self) -> u32 {
        if self.is_empty() {
            0
        } else {
            (self.w * self.h) as u32
        }
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.x >= self.x && c.x < self.x + self.w && c.y >= self.y && c.y < self.y + self.h
    }

    pub fn intersects(&self, o: &Rect) -> bool {
        self.x < o.x + o.w && o.x < self.x + self.w && self.y < o.y + o.h && o.y < self.y + self.h
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (self.y..self.y + self.h).flat_map(move |y| (self.x..self.x + self.w).map(move |x| Cell::new(x, y)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Noun {
    pub singular: String,
    pub plural: String,
}

impl Noun {
    pub fn new(singular: &str, plural: &str) -> Self {
        Self { singular: singular.into(), plural: plural.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicon {
    pub object_types: Vec<Noun>,
    pub room_types: Vec<String>,
    pub colors: Vec<String>,
    pub extra_attrs: Vec<String>,
    pub relations: Vec<String>,
    /// Inclusive range of count answers.
    pub count_answers: (u32, u32),
    /// (positive, negative)
    pub binary_answers: (String, String),
}

const DEFAULT_OBJECTS: &[(&str, &str)] = &[
    ("table", "tables"),
    ("chair", "chairs"),
    ("sofa", "sofas"),
    ("bed", "beds"),
    ("desk", "desks"),
    ("shelf", "shelves"),
    ("television", "televisions"),
    ("lamp", "lamps"),
    ("plant", "plants"),
    ("mirror", "mirrors"),
    ("toilet", "toilets"),
    ("sink", "sinks"),
    ("bathtub", "bathtubs"),
    ("shower", "showers"),
    ("refrigerator", "refrigerators"),
    ("oven", "ovens"),
    ("stove", "stoves"),
    ("microwave", "microwaves"),
    ("dishwasher", "dishwashers"),
    ("washing machine", "washing machines"),
    ("dresser", "dressers"),
    ("wardrobe", "wardrobes"),
    ("cabinet", "cabinets"),
    ("bookshelf", "bookshelves"),
    ("piano", "pianos"),
    ("computer", "computers"),
    ("fireplace", "fireplaces"),
    ("rug", "rugs"),
    ("curtain", "curtains"),
    ("ottoman", "ottomans"),
    ("stool", "stools"),
    ("bench", "benches"),
    ("clock", "clocks"),
    ("vase", "vases"),
    ("painting", "paintings"),
    ("fan", "fans"),
    ("heater", "heaters"),
    ("speaker", "speakers"),
    ("guitar", "guitars"),
    ("trash can", "trash cans"),
    ("laptop", "laptops"),
    ("printer", "printers"),
    ("armchair", "armchairs"),
    ("nightstand", "nightstands"),
];

const DEFAULT_ROOMS: &[&str] = &[
    "kitchen",
    "living room",
    "bedroom",
    "bathroom",
    "dining room",
    "office",
    "garage",
    "hallway",
    "laundry room",
    "storage room",
];

const DEFAULT_COLORS: &[&str] = &["black", "white", "gray", "red", "orange", "yellow", "green", "blue"];

impl Default for Lexicon {
    fn default() -> Self {
        Self {
            object_types: DEFAULT_OBJECTS.iter().map(|(s, p)| Noun::new(s, p)).collect(),
            room_types: DEFAULT_ROOMS.iter().map(|s| s.to_string()).collect(),
            colors: DEFAULT_COLORS.iter().map(|s| s.to_string()).collect(),
            extra_attrs: vec!["small".into(), "large".into()],
            relations: ["next to", "left of", "right of", "above", "below"].iter().map(|s| s.to_string()).collect(),
            count_answers: (0, 5),
            binary_answers: ("yes".into(), "no".into()),
        }
    }
}

impl Lexicon {
    /// Checks name uniqueness within and across categories and plural presence.
    pub fn validate(&self) -> Result<(), SceneError> {
        let mut seen: HashSet<String> = HashSet::new();
        let mut names: Vec<(&str, &str)> = Vec::new();
        for n in &self.object_types {
            if n.plural.trim().is_empty() {
                return Err(SceneError::Lexicon(format!("object type {:?} has no plural form", n.singular)));
            }
            names.push(("object type", &n.singular));
        }
        names.extend(self.room_types.iter().map(|s| ("room type", s.as_str())));
        names.extend(self.colors.iter().map(|s| ("color", s.as_str())));
        names.extend(self.extra_attrs.iter().map(|s| ("attribute", s.as_str())));
        names.extend(self.relations.iter().map(|s| ("relation", s.as_str())));
        names.push(("binary answer", &self.binary_answers.0));
        names.push(("binary answer", &self.binary_answers.1));
        for (kind, name) in names {
            if name.trim().is_empty() {
                return Err(SceneError::Lexicon(format!("empty {kind} name")));
            }
            if !seen.insert(name.to_string()) {
                return Err(SceneError::Lexicon(format!("{kind} {name:?} is not unique")));
            }
        }
        let (lo, hi) = self.count_answers;
        if lo > hi {
            return Err(SceneError::Lexicon(format!("empty count range {lo}..={hi}")));
        }
        for c in lo..=hi {
            if !seen.insert(c.to_string()) {
                return Err(SceneError::Lexicon(format!("count answer {c} collides with another name")));
            }
        }
        if self.object_types.is_empty() || self.room_types.is_empty() || self.colors.is_empty() {
            return Err(SceneError::Lexicon("object types, room types and colors must be non-empty".into()));
        }
        Ok(())
    }

    /// Every string an answer may take.
    pub fn answer_vocabulary(&self) -> BTreeSet<String> {
        let mut v = BTreeSet::new();
        v.insert(self.binary_answers.0.clone());
        v.insert(self.binary_answers.1.clone());
        for c in self.count_answers.0..=self.count_answers.1 {
            v.insert(c.to_string());
        }
        v.extend(self.colors.iter().cloned());
        v.extend(self.room_types.iter().cloned());
        v.extend(self.object_types.iter().map(|n| n.singular.clone()));
        v
    }

    pub fn plural_of(&self, singular: &str) -> Option<&str> {
        self.object_types.iter().find(|n| n.singular == singular).map(|n| n.plural.as_str())
    }

    pub fn is_color(&self, s: &str) -> bool {
        self.colors.iter().any(|c| c == s)
    }

    pub fn yes(&self) -> &str {
        &self.binary_answers.0
    }

    pub fn no(&self) -> &str {
        &self.binary_answers.1
    }

    pub fn binary(&self, b: bool) -> String {
        if b { self.yes() } else { self.no() }.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Room {
    pub id: RoomId,
    pub room_type: String,
    pub bbox: Rect,
    pub area_cells: u32,
}

impl Room {
    pub fn new(id: RoomId, room_type: impl Into<String>, bbox: Rect) -> Self {
        Self { id, room_type: room_type.into(), bbox, area_cells: bbox.area() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub id: ObjectId,
    pub obj_type: String,
    pub color: String,
    pub extra_attrs: BTreeSet<String>,
    pub cell: Cell,
    pub size: f64,
    pub room_id: RoomId,
}

impl ObjectInstance {
    /// True when `attr` is the object's color or one of its extra attributes.
    pub fn has_attr(&self, attr: &str) -> bool {
        self.color == attr || self.extra_attrs.contains(attr)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Doorway {
    pub rooms: (RoomId, RoomId),
    pub cell: Cell,
}

/// Walkable/wall grid, serialized as rows of `.` (walkable) and `#` (wall).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    width: i32,
    height: i32,
    walkable: Vec<bool>,
}

impl Grid {
    pub fn new(width: i32, height: i32) -> Self {
        Self { width, height, walkable: vec![false; (width.max(0) * height.max(0)) as usize] }
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && c.x < self.width && c.y < self.height
    }

    fn index(&self, c: Cell) -> usize {
        (c.y * self.width + c.x) as usize
    }

    pub fn is_walkable(&self, c: Cell) -> bool {
        self.in_bounds(c) && self.walkable[self.index(c)]
    }

    /// Out-of-bounds cells count as walls.
    pub fn is_wall(&self, c: Cell) -> bool {
        !self.is_walkable(c)
    }

    pub fn set_walkable(&mut self, c: Cell, walkable: bool) {
        let i = self.index(c);
        self.walkable[i] = walkable;
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| Cell::new(x, y)))
    }

    pub fn to_rows(&self) -> Vec<String> {
        (0..self.height)
            .map(|y| (0..self.width).map(|x| if self.is_walkable(Cell::new(x, y)) { '.' } else { '#' }).collect())
            .collect()
    }

    pub fn from_rows(rows: &[String]) -> Result<Self, String> {
        let height = rows.len() as i32;
        let width = rows.first().map(|r| r.chars().count()).unwrap_or(0) as i32;
        let mut g = Grid::new(width, height);
        for (y, row) in rows.iter().enumerate() {
            if row.chars().count() as i32 != width {
                return Err(format!("grid row {y} has length {} (expected {width})", row.chars().count()));
            }
            for (x, ch) in row.chars().enumerate() {
                let walkable = match ch {
                    '.' => true,
                    '#' => false,
                    other => return Err(format!("unexpected grid character {other:?} at ({x}, {y})")),
                };
                g.set_walkable(Cell::new(x as i32, y as i32), walkable);
            }
        }
        Ok(g)
    }
}

impl Serialize for Grid {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<String>::deserialize(d)?;
        Grid::from_rows(&rows).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct House {
    pub id: String,
    pub grid: Grid,
    pub rooms: Vec<Room>,
    pub doorways: Vec<Doorway>,
    pub objects: Vec<ObjectInstance>,
}

impl House {
    pub fn room(&self, id: RoomId) -> Option<&Room> {
        self.rooms.iter().find(|r| r.id == id)
    }

    pub fn object(&self, id: ObjectId) -> Option<&ObjectInstance> {
        self.objects.iter().find(|o| o.id == id)
    }

    /// Room whose bbox contains `c`; `None` for walls and doorway cells.
    pub fn room_at(&self, c: Cell) -> Option<RoomId> {
        self.rooms.iter().find(|r| r.bbox.contains(c)).map(|r| r.id)
    }

    pub fn is_doorway(&self, c: Cell) -> bool {
        self.doorways.iter().any(|d| d.cell == c)
    }

    pub fn room_type(&self, id: RoomId) -> Option<&str> {
        self.room(id).map(|r| r.room_type.as_str())
    }
}

/// One failed house invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub invariant: String,
    pub entity: String,
    pub detail: String,
}

impl Violation {
    pub fn new(invariant: &str, entity: impl fmt::Display, detail: impl Into<String>) -> Self {
        Self { invariant: invariant.into(), entity: entity.to_string(), detail: detail.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.invariant, self.entity, self.detail)
    }
}

/// For a doorway cell, the pair of rooms on opposite sides (west/east, then north/south).
pub fn doorway_sides(house: &House, c: Cell) -> Option<(RoomId, RoomId)> {
    let pairs = [(c.offset(-1, 0), c.offset(1, 0)), (c.offset(0, -1), c.offset(0, 1))];
    pairs.iter().find_map(|&(a, b)| match (house.room_at(a), house.room_at(b)) {
        (Some(ra), Some(rb)) if ra != rb => Some((ra, rb)),
        _ => None,
    })
}

/// Lists every structural invariant the house breaks. Empty means valid.
pub fn validate_house(house: &House) -> Vec<Violation> {
    let mut out = Vec::new();
    let grid = &house.grid;

    let mut room_ids = HashSet::new();
    for r in &house.rooms {
        if !room_ids.insert(r.id) {
            out.push(Violation::new("room-id-unique", r.id, "duplicate room id"));
        }
        if r.bbox.is_empty() {
            out.push(Violation::new("room-bbox-nonempty", r.id, "empty bounding box"));
            continue;
        }
        if r.area_cells != r.bbox.area() {
            out.push(Violation::new(
                "room-area",
                r.id,
                format!("area_cells {} != {}x{}", r.area_cells, r.bbox.w, r.bbox.h),
            ));
        }
        if let Some(c) = r.bbox.cells().find(|&c| !grid.is_walkable(c)) {
            out.push(Violation::new("room-walkable", r.id, format!("cell ({}, {}) is a wall or out of bounds", c.x, c.y)));
        }
    }
    for (i, a) in house.rooms.iter().enumerate() {
        for b in &house.rooms[i + 1..] {
            if a.bbox.intersects(&b.bbox) {
                out.push(Violation::new("room-disjoint", a.id, format!("bbox overlaps room {}", b.id)));
            }
        }
    }

    let door_cells: HashSet<Cell> = house.doorways.iter().map(|d| d.cell).collect();
    for (i, d) in house.doorways.iter().enumerate() {
        let entity = format!("doorway#{i}");
        let (a, b) = d.rooms;
        if a == b {
            out.push(Violation::new("doorway-distinct-rooms", &entity, format!("joins {a} to itself")));
        }
        for r in [a, b] {
            if house.room(r).is_none() {
                out.push(Violation::new("doorway-room-exists", &entity, format!("unknown room {r}")));
            }
        }
        if !grid.is_walkable(d.cell) {
            out.push(Violation::new("doorway-walkable", &entity, "doorway cell is a wall"));
        }
        if house.room_at(d.cell).is_some() {
            out.push(Violation::new("doorway-in-wall", &entity, "doorway cell lies inside a room"));
        }
        match doorway_sides(house, d.cell) {
            Some((x, y)) if (x, y) == (a, b) || (y, x) == (a, b) => {}
            _ => out.push(Violation::new(
                "doorway-adjacent",
                &entity,
                format!("cell ({}, {}) does not separate edge-adjacent rooms {a} and {b}", d.cell.x, d.cell.y),
            )),
        }
    }

    for c in grid.cells() {
        if grid.is_walkable(c) && house.room_at(c).is_none() && !door_cells.contains(&c) {
            out.push(Violation::new("walkable-owned", format!("cell({},{})", c.x, c.y), "walkable cell outside every room"));
        }
    }

    if !house.rooms.is_empty() {
        let start = house.rooms[0].id;
        let mut reached = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(r) = queue.pop_front() {
            for d in &house.doorways {
                let next = match d.rooms {
                    (a, b) if a == r => b,
                    (a, b) if b == r => a,
                    _ => continue,
                };
                if reached.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        for r in &house.rooms {
            if !reached.contains(&r.id) {
                out.push(Violation::new("rooms-connected", r.id, format!("not reachable from {start}")));
            }
        }
    }

    let mut object_ids = HashSet::new();
    let mut occupied: BTreeMap<Cell, ObjectId> = BTreeMap::new();
    for o in &house.objects {
        if !object_ids.insert(o.id) {
            out.push(Violation::new("object-id-unique", o.id, "duplicate object id"));
        }
        if let Some(prev) = occupied.insert(o.cell, o.id) {
            out.push(Violation::new("object-cell-unique", o.id, format!("shares its cell with {prev}")));
        }
        if !(o.size.is_finite() && o.size > 0.0) {
            out.push(Violation::new("object-size", o.id, format!("size {} is not positive", o.size)));
        }
        if o.extra_attrs.contains(&o.color) {
            out.push(Violation::new("object-color-attr", o.id, format!("color {:?} listed as an extra attribute", o.color)));
        }
        match house.room(o.room_id) {
            None => out.push(Violation::new("object-room", o.id, format!("unknown room {}", o.room_id))),
            Some(r) if !r.bbox.contains(o.cell) => out.push(Violation::new(
                "object-in-room",
                o.id,
                format!("cell ({}, {}) outside room {}", o.cell.x, o.cell.y, r.id),
            )),
            Some(_) => {}
        }
        if let Some(actual) = house.room_at(o.cell) {
            if actual != o.room_id {
                out.push(Violation::new("object-room-match", o.id, format!("cell lies in {actual}, not {}", o.room_id)));
            }
        }
    }
    out
}

/// Rooms sharing a doorway with `room`.
pub fn adjacent_rooms(house: &House, room: RoomId) -> Result<BTreeSet<RoomId>, SceneError> {
    if house.room(room).is_none() {
        return Err(SceneError::UnknownRoom(room));
    }
    Ok(house
        .doorways
        .iter()
        .filter_map(|d| match d.rooms {
            (a, b) if a == room && b != room => Some(b),
            (a, b) if b == room && a != room => Some(a),
            _ => None,
        })
        .collect())
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Rooms laid out left to right, each `w`x`h`, separated by one-cell walls,
    /// with a doorway between each consecutive pair at the middle row.
    pub fn row_house(types: &[&str], w: i32, h: i32, doors: bool) -> House {
        let n = types.len() as i32;
        let mut grid = Grid::new(n * (w + 1) + 1, h + 2);
        let mut rooms = Vec::new();
        for (i, t) in types.iter().enumerate() {
            let bbox = Rect::new(1 + i as i32 * (w + 1), 1, w, h);
            for c in bbox.cells() {
                grid.set_walkable(c, true);
            }
            rooms.push(Room::new(RoomId(i as u32), *t, bbox));
        }
        let mut doorways = Vec::new();
        if doors {
            for i in 1..n {
                let cell = Cell::new(i * (w + 1), 1 + h / 2);
                grid.set_walkable(cell, true);
                doorways.push(Doorway { rooms: (RoomId(i as u32 - 1), RoomId(i as u32)), cell });
            }
        }
        House { id: "fixture".into(), grid, rooms, doorways, objects: Vec::new() }
    }

    pub fn object(id: u32, obj_type: &str, color: &str, attrs: &[&str], cell: Cell, size: f64, room: u32) -> ObjectInstance {
        ObjectInstance {
            id: ObjectId(id),
            obj_type: obj_type.into(),
            color: color.into(),
            extra_attrs: attrs.iter().map(|s| s.to_string()).collect(),
            cell,
            size,
            room_id: RoomId(room),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn default_lexicon_has_seventy_answers() {
        let lex = Lexicon::default();
        lex.validate().unwrap();
        assert_eq!(lex.object_types.len(), 44);
        assert_eq!(lex.answer_vocabulary().len(), 70);
    }

    #[test]
    fn lexicon_rejects_cross_category_duplicates() {
        let mut lex = Lexicon::default();
        lex.extra_attrs.push("red".into());
        assert!(lex.validate().is_err());
        let mut lex = Lexicon::default();
        lex.object_types[0].plural.clear();
        assert!(lex.validate().is_err());
    }

    #[test]
    fn single_room_house_is_valid() {
        let h = row_house(&["kitchen"], 4, 3, false);
        assert_eq!(validate_house(&h), vec![]);
    }

    #[test]
    fn object_outside_its_room_is_reported() {
        let mut h = row_house(&["kitchen", "bedroom"], 3, 3, true);
        h.objects.push(object(7, "table", "red", &[], Cell::new(6, 2), 1.0, 0));
        let v = validate_house(&h);
        assert!(!v.is_empty());
        assert!(v.iter().all(|v| v.entity == "o7"), "{v:?}");
    }

    #[test]
    fn disconnected_rooms_are_reported() {
        let h = row_house(&["kitchen", "bedroom"], 3, 3, false);
        let v = validate_house(&h);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].invariant, "rooms-connected");
        assert_eq!(v[0].entity, "r1");
    }

    #[test]
    fn adjacency_two_rooms() {
        let h = row_house(&["kitchen", "bedroom"], 3, 3, true);
        assert_eq!(adjacent_rooms(&h, RoomId(0)).unwrap(), BTreeSet::from([RoomId(1)]));
        assert_eq!(adjacent_rooms(&h, RoomId(1)).unwrap(), BTreeSet::from([RoomId(0)]));
        assert_eq!(adjacent_rooms(&h, RoomId(9)), Err(SceneError::UnknownRoom(RoomId(9))));
    }

    #[test]
    fn adjacency_without_doorways_is_empty() {
        let h = row_house(&["kitchen", "bedroom"], 3, 3, false);
        assert!(adjacent_rooms(&h, RoomId(0)).unwrap().is_empty());
    }

    #[test]
    fn ids_serialize_as_strings() {
        assert_eq!(serde_json::to_string(&RoomId(3)).unwrap(), "\"r3\"");
        assert_eq!(serde_json::from_str::<ObjectId>("\"o12\"").unwrap(), ObjectId(12));
        assert!(serde_json::from_str::<ObjectId>("\"r12\"").is_err());
    }

    #[test]
    fn grid_rows_round_trip() {
        let h = row_house(&["kitchen", "bedroom", "office"], 3, 2, true);
        let rows = h.grid.to_rows();
        assert_eq!(Grid::from_rows(&rows).unwrap(), h.grid);
        assert!(Grid::from_rows(&["..".into(), "x.".into()]).is_err());
    }
}
