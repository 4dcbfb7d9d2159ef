//! Reference answers computed straight from each template's meaning, by
//! enumeration over the seen sets. Shares no evaluation code with the program
//! executor, so agreement between the two is a meaningful check.

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::Serialize;

use crate::ground_truth::{aggregate_gt, FrameGT, TrajectoryGroundTruth};
use crate::question::{builtin_templates, execute, Bindings, ExecContext, QuestionTemplate, SlotKey, TagName};
use crate::rng::derive_stream;
use crate::scene::{Cell, Grid, House, Lexicon, ObjectId, ObjectInstance, Rect, Room, RoomId};

fn carries(o: &ObjectInstance, attr: &str) -> bool {
    o.color == attr || o.extra_attrs.iter().any(|a| a == attr)
}

fn related(rel: &str, s: &ObjectInstance, r: &ObjectInstance) -> bool {
    if s.id == r.id || s.room_id != r.room_id {
        return false;
    }
    let (dx, dy) = (s.cell.x - r.cell.x, s.cell.y - r.cell.y);
    match rel {
        "next to" => dx.abs() <= 1 && dy.abs() <= 1,
        "left of" => dx < 0,
        "right of" => dx > 0,
        "above" => dy < 0,
        "below" => dy > 0,
        _ => false,
    }
}

/// `None` marks an unanswerable instantiation.
type Answer = Option<String>;

struct World<'a> {
    house: &'a House,
    objects: Vec<&'a ObjectInstance>,
    rooms: Vec<&'a Room>,
    lexicon: &'a Lexicon,
    b: &'a Bindings,
}

impl<'a> World<'a> {
    fn v(&self, key: &str) -> &'a str {
        let k: SlotKey = key.parse().expect("oracle slot key");
        self.b.0.get(&k).map(String::as_str).unwrap_or("")
    }

    fn yn(&self, x: bool) -> Answer {
        Some(self.lexicon.binary(x))
    }

    fn room_type_of(&self, o: &ObjectInstance) -> &'a str {
        self.house.rooms.iter().find(|r| r.id == o.room_id).map(|r| r.room_type.as_str()).unwrap_or("")
    }

    fn all(&self, t: Option<&str>, a: Option<&str>) -> Vec<&'a ObjectInstance> {
        self.objects
            .iter()
            .copied()
            .filter(|o| t.is_none_or(|t| o.obj_type == t) && a.is_none_or(|a| carries(o, a)))
            .collect()
    }

    fn the(&self, t: Option<&str>, a: Option<&str>) -> Option<&'a ObjectInstance> {
        match self.all(t, a).as_slice() {
            [one] => Some(one),
            _ => None,
        }
    }

    fn two(&self, t1: &str, a1: &str, t2: &str, a2: &str) -> Option<(&'a ObjectInstance, &'a ObjectInstance)> {
        let x = self.the(Some(t1), Some(a1))?;
        let y = self.the(Some(t2), Some(a2))?;
        (x.id != y.id).then_some((x, y))
    }

    fn count(&self, n: usize) -> Answer {
        let (lo, hi) = self.lexicon.count_answers;
        (n >= lo as usize && n <= hi as usize).then(|| n.to_string())
    }

    fn group(&self, name: &str) -> Vec<&'a str> {
        (0..)
            .map(|i| format!("{name}{{{i}}}"))
            .map_while(|k| self.b.0.get(&k.parse::<SlotKey>().unwrap()).map(String::as_str))
            .collect()
    }

    /// Every ordered tuple of distinct objects from `pool`, one per group element.
    fn tuple_exists(&self, pool: &[&ObjectInstance], types: &[&str], attrs: &[&str]) -> bool {
        fn go(pool: &[&ObjectInstance], types: &[&str], attrs: &[&str], chosen: &mut Vec<ObjectId>) -> bool {
            let i = chosen.len();
            if i == types.len() {
                return true;
            }
            pool.iter().any(|o| {
                if chosen.contains(&o.id) || o.obj_type != types[i] || !carries(o, attrs[i]) {
                    return false;
                }
                chosen.push(o.id);
                let ok = go(pool, types, attrs, chosen);
                chosen.pop();
                ok
            })
        }
        go(pool, types, attrs, &mut Vec::new())
    }

    fn in_room(&self, r: RoomId) -> Vec<&'a ObjectInstance> {
        self.objects.iter().copied().filter(|o| o.room_id == r).collect()
    }

    fn related_to_second(&self) -> Option<Vec<&'a ObjectInstance>> {
        let anchor = self.the(Some(self.v("obj_type2")), Some(self.v("attr2")))?;
        let rel = self.v("rel");
        Some(self.objects.iter().copied().filter(|o| related(rel, o, anchor)).collect())
    }

    fn answer(&self, id: u8) -> Answer {
        let v = |k| self.v(k);
        match id {
            1 => {
                let s = self.all(Some(v("obj_type")), Some(v("attr")));
                if s.is_empty() { None } else { self.yn(s.iter().all(|o| o.color == v("color"))) }
            }
            2 => {
                let s = self.all(Some(v("obj_type")), Some(v("attr")));
                if s.is_empty() { None } else { self.yn(s.iter().all(|o| self.room_type_of(o) == v("room_type"))) }
            }
            3 => {
                let s = self.all(None, Some(v("attr")));
                if s.is_empty() { None } else { self.yn(s.iter().all(|o| o.obj_type == v("obj_type"))) }
            }
            4 => {
                let (x, y) = self.two(v("obj_type1"), v("attr1"), v("obj_type2"), v("attr2"))?;
                self.yn(x.color == v("color") && y.color == v("color"))
            }
            5 => {
                let (x, y) = self.two(v("obj_type1"), v("attr1"), v("obj_type2"), v("attr2"))?;
                self.yn(self.room_type_of(x) == v("room_type") && self.room_type_of(y) == v("room_type"))
            }
            6 => {
                let (x, y) = self.two(v("obj_type1"), v("attr1"), v("obj_type2"), v("attr2"))?;
                self.yn(x.color == y.color)
            }
            7 => {
                let near: Vec<_> = self.related_to_second()?.into_iter().filter(|o| carries(o, v("attr1"))).collect();
                match near.as_slice() {
                    [one] => self.yn(one.obj_type == v("obj_type1")),
                    _ => None,
                }
            }
            8 => {
                let anchor = self.the(Some(v("obj_type2")), Some(v("attr2")))?;
                let n = self
                    .all(Some(v("obj_type1")), Some(v("attr1")))
                    .iter()
                    .filter(|o| o.room_id == anchor.room_id && o.id != anchor.id)
                    .count();
                self.count(n)
            }
            9 => {
                let n = self
                    .all(Some(v("obj_type")), Some(v("attr")))
                    .iter()
                    .filter(|o| self.room_type_of(o) == v("room_type"))
                    .count();
                self.count(n)
            }
            10 => self.count(self.all(Some(v("obj_type")), Some(v("attr"))).len()),
            11 => {
                let hits: BTreeSet<RoomId> =
                    self.all(Some(v("obj_type")), Some(v("attr"))).iter().map(|o| o.room_id).collect();
                self.count(self.rooms.iter().filter(|r| hits.contains(&r.id)).count())
            }
            12 | 13 => {
                let a = self.all(Some(v("obj_type1")), Some(v("attr1"))).len();
                let b = self.all(Some(v("obj_type2")), Some(v("attr2"))).len();
                if id == 13 {
                    return self.yn(a == b);
                }
                match v("comp") {
                    "more" => self.yn(a > b),
                    "fewer" => self.yn(a < b),
                    _ => None,
                }
            }
            14 => {
                let (x, y) = self.two(v("obj_type"), v("attr1"), v("obj_type"), v("attr2"))?;
                self.size_answer(x.size, y.size)
            }
            15 => {
                let of = |t: &str| -> Option<&Room> {
                    let m: Vec<_> = self.rooms.iter().filter(|r| r.room_type == t).collect();
                    if m.len() == 1 { Some(m[0]) } else { None }
                };
                let (x, y) = (of(v("room_type1"))?, of(v("room_type2"))?);
                if x.id == y.id {
                    return None;
                }
                self.size_answer(x.area_cells as f64, y.area_cells as f64)
            }
            16 => self.yn(!self.all(Some(v("obj_type")), Some(v("attr"))).is_empty()),
            17 => self.yn(self.rooms.iter().any(|r| r.room_type == v("room_type"))),
            18..=20 => {
                let (types, attrs) = (self.group("obj_type"), self.group("attr"));
                if types.is_empty() {
                    return None;
                }
                let found = match id {
                    20 => self.tuple_exists(&self.objects, &types, &attrs),
                    _ => self.rooms.iter().any(|r| {
                        (id == 18 || r.room_type == v("room_type"))
                            && self.tuple_exists(&self.in_room(r.id), &types, &attrs)
                    }),
                };
                self.yn(found)
            }
            21 => {
                let types = self.group("room_type");
                if types.is_empty() {
                    return None;
                }
                // ordered tuples of distinct seen rooms
                fn go(rooms: &[&Room], types: &[&str], used: &mut Vec<RoomId>) -> bool {
                    let Some((first, rest)) = types.split_first() else { return true };
                    rooms.iter().any(|r| {
                        if used.contains(&r.id) || r.room_type != *first {
                            return false;
                        }
                        used.push(r.id);
                        let ok = go(rooms, rest, used);
                        used.pop();
                        ok
                    })
                }
                self.yn(go(&self.rooms, &types, &mut Vec::new()))
            }
            22 | 24 | 27 => {
                let near: Vec<_> = self
                    .related_to_second()?
                    .into_iter()
                    .filter(|o| carries(o, v("attr1")) && (id == 24 || o.obj_type == v("obj_type1")))
                    .collect();
                let [one] = near.as_slice() else { return None };
                Some(match id {
                    22 => one.color.clone(),
                    24 => one.obj_type.clone(),
                    _ => self.room_type_of(one).to_string(),
                })
            }
            23 | 28 => {
                let one = self.the(Some(v("obj_type")), Some(v("attr")))?;
                Some(if id == 23 { one.color.clone() } else { self.room_type_of(one).to_string() })
            }
            25 => self.the(None, Some(v("attr"))).map(|o| o.obj_type.clone()),
            26 => {
                let (types, attrs) = (self.group("obj_type"), self.group("attr"));
                if types.is_empty() {
                    return None;
                }
                let rooms: Vec<_> =
                    self.rooms.iter().filter(|r| self.tuple_exists(&self.in_room(r.id), &types, &attrs)).collect();
                match rooms.as_slice() {
                    [one] => Some(one.room_type.clone()),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    fn size_answer(&self, a: f64, b: f64) -> Answer {
        match self.v("comp_rel") {
            "bigger" => self.yn(a > b),
            "smaller" => self.yn(a < b),
            _ => None,
        }
    }
}

/// The oracle's answer for template `id`, or `None` when unanswerable.
pub fn oracle_answer(
    id: u8,
    house: &House,
    gt: &TrajectoryGroundTruth,
    lexicon: &Lexicon,
    bindings: &Bindings,
) -> Option<String> {
    let objects = gt.seen_objects.iter().filter_map(|&o| house.objects.iter().find(|x| x.id == o)).collect();
    let rooms = gt.seen_rooms.iter().filter_map(|&r| house.rooms.iter().find(|x| x.id == r)).collect();
    World { house, objects, rooms, lexicon, b: bindings }.answer(id)
}

/// Value pools for random small worlds; kept tiny so that values collide.
pub struct SmallPools {
    pub obj_types: Vec<&'static str>,
    pub colors: Vec<&'static str>,
    pub extra_attrs: Vec<&'static str>,
    pub room_types: Vec<&'static str>,
    pub relations: Vec<&'static str>,
}

impl Default for SmallPools {
    fn default() -> Self {
        Self {
            obj_types: vec!["table", "chair", "sofa"],
            colors: vec!["red", "blue", "orange"],
            extra_attrs: vec!["small", "large"],
            room_types: vec!["kitchen", "bedroom", "office"],
            relations: vec!["next to", "left of", "right of", "above", "below"],
        }
    }
}

/// A house of 1 to 4 small rooms with a few objects, plus a ground truth that
/// sees a random subset of them.
pub fn random_world<R: Rng + ?Sized>(rng: &mut R, pools: &SmallPools) -> (House, TrajectoryGroundTruth) {
    let n_rooms = rng.random_range(1..=4);
    let (w, h) = (4, 4);
    let mut grid = Grid::new(n_rooms * (w + 1) + 1, h + 2);
    let mut rooms = Vec::new();
    for i in 0..n_rooms {
        let bbox = Rect::new(1 + i * (w + 1), 1, rng.random_range(2..=w), rng.random_range(2..=h));
        for c in bbox.cells() {
            grid.set_walkable(c, true);
        }
        rooms.push(Room::new(RoomId(i as u32), *pools.room_types.choose(rng).unwrap(), bbox));
    }
    let n_objects = rng.random_range(0..=9);
    let mut objects = Vec::new();
    for i in 0..n_objects {
        let room = rooms.choose(rng).unwrap();
        let b = room.bbox;
        let mut extra_attrs = BTreeSet::new();
        if rng.random_bool(0.6) {
            extra_attrs.insert(pools.extra_attrs.choose(rng).unwrap().to_string());
        }
        objects.push(ObjectInstance {
            id: ObjectId(i),
            obj_type: pools.obj_types.choose(rng).unwrap().to_string(),
            color: pools.colors.choose(rng).unwrap().to_string(),
            extra_attrs,
            cell: Cell::new(rng.random_range(b.x..b.x + b.w), rng.random_range(b.y..b.y + b.h)),
            size: rng.random_range(1..=3) as f64,
            room_id: room.id,
        });
    }
    let visible: BTreeSet<ObjectId> = objects.iter().filter(|_| rng.random_bool(0.75)).map(|o| o.id).collect();
    let mut linked: BTreeSet<RoomId> =
        objects.iter().filter(|o| visible.contains(&o.id)).map(|o| o.room_id).collect();
    for r in &rooms {
        if rng.random_bool(0.5) {
            linked.insert(r.id);
        }
    }
    let current = linked.iter().next().copied().unwrap_or(RoomId(0));
    linked.insert(current);
    let house = House { id: "oracle".into(), grid, rooms, doorways: Vec::new(), objects };
    let frame = FrameGT { index: 0, current_room: current, visible_objects: visible, linked_rooms: linked };
    let gt = aggregate_gt(&house.id, "oracle-v000", vec![frame]).expect("one frame");
    (house, gt)
}

/// Random values for every slot of `template`, drawn from the pools.
pub fn random_bindings<R: Rng + ?Sized>(template: &QuestionTemplate, rng: &mut R, pools: &SmallPools) -> Bindings {
    let arity = if template.has_set_group() { rng.random_range(2..=3) } else { 0 };
    let mut b = Bindings::default();
    for key in template.slot_keys(arity) {
        let color_free = template.color_free.contains(&key);
        let value = match key.name {
            TagName::Attr if color_free => *pools.extra_attrs.choose(rng).unwrap(),
            TagName::Attr => {
                let all: Vec<&str> = pools.colors.iter().chain(&pools.extra_attrs).copied().collect();
                *all.choose(rng).unwrap()
            }
            TagName::ObjType => *pools.obj_types.choose(rng).unwrap(),
            TagName::RoomType => *pools.room_types.choose(rng).unwrap(),
            TagName::Color => *pools.colors.choose(rng).unwrap(),
            TagName::Rel => *pools.relations.choose(rng).unwrap(),
            TagName::Comp => *["more", "fewer"].choose(rng).unwrap(),
            TagName::CompRel => *["bigger", "smaller"].choose(rng).unwrap(),
            TagName::Art => continue,
        };
        b.insert(key, value);
    }
    b
}

#[derive(Debug, Clone, Serialize)]
pub struct Disagreement {
    pub world: usize,
    pub template: u8,
    pub bindings: Bindings,
    pub executor: String,
    pub oracle: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct AgreementReport {
    pub worlds: usize,
    /// Worlds on which every template agreed.
    pub agreeing_worlds: usize,
    pub checks: usize,
    /// Per template id (index 0 is template 1): how many checks produced an answer.
    pub answered: Vec<usize>,
    pub disagreements: Vec<Disagreement>,
}

impl AgreementReport {
    pub fn all_agree(&self) -> bool {
        self.disagreements.is_empty() && self.agreeing_worlds == self.worlds
    }
}

/// Runs every template on `n` random worlds, comparing executor and oracle.
pub fn run_agreement(n: usize, seed: u64) -> AgreementReport {
    let lexicon = Lexicon::default();
    let pools = SmallPools::default();
    let templates = builtin_templates();
    let mut report = AgreementReport { worlds: n, answered: vec![0; templates.len()], ..Default::default() };
    for world in 0..n {
        let mut rng = derive_stream(seed, &["oracle", &world.to_string()]);
        let (house, gt) = random_world(&mut rng, &pools);
        let ctx = ExecContext { house: &house, gt: &gt, lexicon: &lexicon };
        let mut ok = true;
        for t in templates {
            let b = random_bindings(t, &mut rng, &pools);
            let exec = match execute(&t.program, ctx, &b) {
                Ok(o) => o.answer().map(str::to_string),
                Err(e) => Some(format!("error: {e}")),
            };
            let want = oracle_answer(t.id, &house, &gt, &lexicon, &b);
            report.checks += 1;
            if want.is_some() {
                report.answered[t.id as usize - 1] += 1;
            }
            if exec != want {
                ok = false;
                let show = |a: &Option<String>| a.clone().unwrap_or_else(|| "Invalid".into());
                report.disagreements.push(Disagreement {
                    world,
                    template: t.id,
                    bindings: b,
                    executor: show(&exec),
                    oracle: show(&want),
                });
            }
        }
        report.agreeing_worlds += ok as usize;
    }
    report
}
