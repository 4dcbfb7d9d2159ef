//! Functional programs over trajectory ground truth.
//!
//! A program is a linear pipeline: source ops produce a set of seen objects or
//! rooms, filters narrow it, and a terminal op yields an answer. Some ops take
//! reference selections (an object spec that must resolve to exactly one seen
//! object) instead of reading the pipeline value.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::template::{SlotKey, TagName};
use crate::ground_truth::TrajectoryGroundTruth;
use crate::scene::{House, Lexicon, ObjectId, ObjectInstance, RoomId};

/// Concrete values for a template's slots.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bindings(pub BTreeMap<SlotKey, String>);

impl Bindings {
    pub fn get(&self, key: SlotKey) -> Result<&str, ExecError> {
        self.0.get(&key).map(String::as_str).ok_or(ExecError::MissingBinding(key))
    }

    pub fn insert(&mut self, key: SlotKey, value: impl Into<String>) {
        self.0.insert(key, value.into());
    }

    /// Number of set-group elements bound.
    pub fn group_arity(&self) -> u8 {
        self.0.keys().filter_map(|k| k.element).map(|e| e + 1).max().unwrap_or(0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExecError {
    #[error("type error at op {index} ({op}): {message}")]
    TypeCheck { index: usize, op: String, message: String },
    #[error("missing binding for {0}")]
    MissingBinding(SlotKey),
    #[error("bad binding: {0}")]
    BadBinding(String),
    #[error("ground truth references unknown object {0}")]
    UnknownObject(ObjectId),
    #[error("ground truth references unknown room {0}")]
    UnknownRoom(RoomId),
}

/// Why an instantiation cannot be answered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvalidReason {
    NotUnique,
    ReferenceNotUnique,
    SameReferent,
    CountOutOfRange,
    MissingOperand,
    EmptyForAll,
    EmptyGroup,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Answer(String),
    Invalid(InvalidReason),
}

impl Outcome {
    pub fn answer(&self) -> Option<&str> {
        match self {
            Outcome::Answer(a) => Some(a),
            Outcome::Invalid(_) => None,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Answer(a) => f.write_str(a),
            Outcome::Invalid(r) => write!(f, "Invalid ({r:?})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerKind {
    Binary,
    Count,
    Color,
    RoomType,
    ObjType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttrKind {
    Color,
    RoomType,
    ObjType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    NextTo,
    LeftOf,
    RightOf,
    Above,
    Below,
}

impl Relation {
    pub fn lookup(s: &str) -> Option<Relation> {
        Some(match s {
            "next to" => Relation::NextTo,
            "left of" => Relation::LeftOf,
            "right of" => Relation::RightOf,
            "above" => Relation::Above,
            "below" => Relation::Below,
            _ => return None,
        })
    }

    /// Whether `subject` stands in this relation to `reference`. Only objects in
    /// the same room relate; directions are in grid coordinates (north is above).
    pub fn holds(self, subject: &ObjectInstance, reference: &ObjectInstance) -> bool {
        if subject.id == reference.id || subject.room_id != reference.room_id {
            return false;
        }
        let (s, r) = (subject.cell, reference.cell);
        match self {
            Relation::NextTo => s.chebyshev(r) <= 1,
            Relation::LeftOf => s.x < r.x,
            Relation::RightOf => s.x > r.x,
            Relation::Above => s.y < r.y,
            Relation::Below => s.y > r.y,
        }
    }
}

/// Object selection by optional type and attribute slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObjSpec {
    pub obj_type: Option<SlotKey>,
    pub attr: Option<SlotKey>,
}

impl ObjSpec {
    pub const fn new(obj_type: Option<SlotKey>, attr: Option<SlotKey>) -> Self {
        Self { obj_type, attr }
    }

    pub const fn group_element(i: u8) -> Self {
        Self::new(Some(SlotKey::element(TagName::ObjType, i)), Some(SlotKey::element(TagName::Attr, i)))
    }
}

impl fmt::Display for ObjSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = [self.attr, self.obj_type].iter().flatten().map(|k| k.to_string()).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predicate {
    HasColor(SlotKey),
    InRoomType(SlotKey),
    IsType(SlotKey),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetScope {
    Anywhere,
    OneRoom,
    NamedRoom(SlotKey),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountComparison {
    /// `more` / `fewer`, read from a `comp` slot.
    Bound(SlotKey),
    AsMany,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeOperands {
    Objects(ObjSpec, ObjSpec),
    Rooms(SlotKey, SlotKey),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Op {
    InputObjects,
    InputRooms,
    /// Resolves each reference; the pipeline value is the set of referents.
    SelectUnique(Vec<ObjSpec>),
    FilterType(SlotKey),
    FilterAttr(SlotKey),
    FilterColor(SlotKey),
    FilterRoomType(SlotKey),
    /// Objects sharing the reference's room, the reference itself excluded.
    FilterInRoomOf(ObjSpec),
    Relate { rel: SlotKey, reference: ObjSpec },
    /// Rooms holding distinct seen objects matching every set-group element.
    FilterRoomsWith,
    Unique,
    Exist,
    Count,
    CountRoomsWith(ObjSpec),
    ForAll(Predicate),
    GetAttr(AttrKind),
    SameAttr { kind: AttrKind, a: ObjSpec, b: ObjSpec },
    CompareCount { mode: CountComparison, a: ObjSpec, b: ObjSpec },
    CompareSize { comp: SlotKey, operands: SizeOperands },
    /// Distinct seen objects match every set-group element, within the scope.
    SetExist(SetScope),
    /// Distinct seen rooms match every set-group room type.
    SetExistRooms,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = |k: &AttrKind| match k {
            AttrKind::Color => "color",
            AttrKind::RoomType => "room_type",
            AttrKind::ObjType => "obj_type",
        };
        match self {
            Op::InputObjects => write!(f, "INPUT_OBJECTS"),
            Op::InputRooms => write!(f, "INPUT_ROOMS"),
            Op::SelectUnique(refs) => {
                let r: Vec<String> = refs.iter().map(|s| s.to_string()).collect();
                write!(f, "SELECT_UNIQUE({})", r.join(", "))
            }
            Op::FilterType(k) => write!(f, "FILTER_TYPE({k})"),
            Op::FilterAttr(k) => write!(f, "FILTER_ATTR({k})"),
            Op::FilterColor(k) => write!(f, "FILTER_COLOR({k})"),
            Op::FilterRoomType(k) => write!(f, "FILTER_ROOM_TYPE({k})"),
            Op::FilterInRoomOf(s) => write!(f, "FILTER_IN_ROOM_OF({s})"),
            Op::Relate { rel, reference } => write!(f, "RELATE({rel}, {reference})"),
            Op::FilterRoomsWith => write!(f, "FILTER_ROOMS_WITH(set)"),
            Op::Unique => write!(f, "UNIQUE"),
            Op::Exist => write!(f, "EXIST"),
            Op::Count => write!(f, "COUNT"),
            Op::CountRoomsWith(s) => write!(f, "COUNT_ROOMS_WITH({s})"),
            Op::ForAll(p) => match p {
                Predicate::HasColor(k) => write!(f, "FOR_ALL(color = {k})"),
                Predicate::InRoomType(k) => write!(f, "FOR_ALL(room_type = {k})"),
                Predicate::IsType(k) => write!(f, "FOR_ALL(obj_type = {k})"),
            },
            Op::GetAttr(k) => write!(f, "GET_ATTR({})", kind(k)),
            Op::SameAttr { kind: k, a, b } => write!(f, "SAME_ATTR({}, {a}, {b})", kind(k)),
            Op::CompareCount { mode, a, b } => match mode {
                CountComparison::Bound(k) => write!(f, "COMPARE_COUNT({k}, {a}, {b})"),
                CountComparison::AsMany => write!(f, "COMPARE_COUNT(as_many, {a}, {b})"),
            },
            Op::CompareSize { comp, operands } => match operands {
                SizeOperands::Objects(a, b) => write!(f, "COMPARE_SIZE({comp}, {a}, {b})"),
                SizeOperands::Rooms(a, b) => write!(f, "COMPARE_SIZE({comp}, {a}, {b})"),
            },
            Op::SetExist(scope) => match scope {
                SetScope::Anywhere => write!(f, "SET_EXIST(set, anywhere)"),
                SetScope::OneRoom => write!(f, "SET_EXIST(set, one_room)"),
                SetScope::NamedRoom(k) => write!(f, "SET_EXIST(set, {k})"),
            },
            Op::SetExistRooms => write!(f, "SET_EXIST_ROOMS(set)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Start,
    Objects,
    Rooms,
    Object,
    Room,
    Answer(AnswerKind),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub ops: Vec<Op>,
}

impl Program {
    pub fn new(ops: Vec<Op>) -> Self {
        Self { ops }
    }

    /// Slots the program reads, given the bound set-group arity.
    pub fn referenced_slots(&self, arity: u8) -> BTreeSet<SlotKey> {
        let mut out = BTreeSet::new();
        let spec = |s: &ObjSpec, out: &mut BTreeSet<SlotKey>| out.extend(s.obj_type.into_iter().chain(s.attr));
        let group_objects = |out: &mut BTreeSet<SlotKey>| {
            for i in 0..arity {
                out.insert(SlotKey::element(TagName::ObjType, i));
                out.insert(SlotKey::element(TagName::Attr, i));
            }
        };
        for op in &self.ops {
            match op {
                Op::InputObjects | Op::InputRooms | Op::Unique | Op::Exist | Op::Count | Op::GetAttr(_) => {}
                Op::SelectUnique(refs) => refs.iter().for_each(|r| spec(r, &mut out)),
                Op::FilterType(k) | Op::FilterAttr(k) | Op::FilterColor(k) | Op::FilterRoomType(k) => {
                    out.insert(*k);
                }
                Op::FilterInRoomOf(s) | Op::CountRoomsWith(s) => spec(s, &mut out),
                Op::Relate { rel, reference } => {
                    out.insert(*rel);
                    spec(reference, &mut out);
                }
                Op::FilterRoomsWith | Op::SetExist(SetScope::Anywhere | SetScope::OneRoom) => group_objects(&mut out),
                Op::SetExist(SetScope::NamedRoom(k)) => {
                    out.insert(*k);
                    group_objects(&mut out);
                }
                Op::ForAll(Predicate::HasColor(k) | Predicate::InRoomType(k) | Predicate::IsType(k)) => {
                    out.insert(*k);
                }
                Op::SameAttr { a, b, .. } => {
                    spec(a, &mut out);
                    spec(b, &mut out);
                }
                Op::CompareCount { mode, a, b } => {
                    if let CountComparison::Bound(k) = mode {
                        out.insert(*k);
                    }
                    spec(a, &mut out);
                    spec(b, &mut out);
                }
                Op::CompareSize { comp, operands } => {
                    out.insert(*comp);
                    match operands {
                        SizeOperands::Objects(a, b) => {
                            spec(a, &mut out);
                            spec(b, &mut out);
                        }
                        SizeOperands::Rooms(a, b) => {
                            out.insert(*a);
                            out.insert(*b);
                        }
                    }
                }
                Op::SetExistRooms => out.extend((0..arity).map(|i| SlotKey::element(TagName::RoomType, i))),
            }
        }
        out
    }

    /// Checks the pipeline and returns the kind of answer it produces.
    pub fn type_check(&self) -> Result<AnswerKind, ExecError> {
        let mut kind = Kind::Start;
        for (index, op) in self.ops.iter().enumerate() {
            use Kind::*;
            let next = match (op, kind) {
                (Op::InputObjects | Op::SelectUnique(_), Start) => Some(Objects),
                (Op::InputRooms, Start) => Some(Rooms),
                (
                    Op::SameAttr { .. } | Op::CompareCount { .. } | Op::CompareSize { .. } | Op::SetExist(_) | Op::SetExistRooms,
                    Start,
                ) => Some(Answer(AnswerKind::Binary)),
                (
                    Op::FilterType(_) | Op::FilterAttr(_) | Op::FilterColor(_) | Op::FilterInRoomOf(_) | Op::Relate { .. },
                    Objects,
                ) => Some(Objects),
                (Op::FilterRoomType(_), Objects) => Some(Objects),
                (Op::FilterRoomType(_) | Op::FilterRoomsWith, Rooms) => Some(Rooms),
                (Op::Unique, Objects) => Some(Object),
                (Op::Unique, Rooms) => Some(Room),
                (Op::Exist, Objects | Rooms) => Some(Answer(AnswerKind::Binary)),
                (Op::Count, Objects | Rooms) => Some(Answer(AnswerKind::Count)),
                (Op::CountRoomsWith(_), Rooms) => Some(Answer(AnswerKind::Count)),
                (Op::ForAll(_), Objects | Object) => Some(Answer(AnswerKind::Binary)),
                (Op::GetAttr(AttrKind::Color), Object) => Some(Answer(AnswerKind::Color)),
                (Op::GetAttr(AttrKind::ObjType), Object) => Some(Answer(AnswerKind::ObjType)),
                (Op::GetAttr(AttrKind::RoomType), Object | Room) => Some(Answer(AnswerKind::RoomType)),
                _ => None,
            };
            kind = next.ok_or_else(|| ExecError::TypeCheck {
                index,
                op: op.to_string(),
                message: format!("cannot apply to {kind:?}"),
            })?;
        }
        match kind {
            Kind::Answer(a) => Ok(a),
            other => Err(ExecError::TypeCheck {
                index: self.ops.len(),
                op: "<end>".into(),
                message: format!("program ends with {other:?}, not an answer"),
            }),
        }
    }
}

/// Everything a program reads.
#[derive(Clone, Copy)]
pub struct ExecContext<'a> {
    pub house: &'a House,
    pub gt: &'a TrajectoryGroundTruth,
    pub lexicon: &'a Lexicon,
}

enum Value<'a> {
    Objects(Vec<&'a ObjectInstance>),
    Rooms(BTreeSet<RoomId>),
    Object(&'a ObjectInstance),
    Room(RoomId),
}

/// Early exit from execution: either a real error or an invalid instantiation.
enum Stop {
    Error(ExecError),
    Invalid(InvalidReason),
}

impl From<ExecError> for Stop {
    fn from(e: ExecError) -> Self {
        Stop::Error(e)
    }
}

struct Runner<'a> {
    ctx: ExecContext<'a>,
    bindings: &'a Bindings,
    seen: Vec<&'a ObjectInstance>,
}

impl<'a> Runner<'a> {
    fn value(&self, k: SlotKey) -> Result<&'a str, Stop> {
        Ok(self.bindings.get(k)?)
    }

    fn matches(&self, o: &ObjectInstance, spec: &ObjSpec) -> Result<bool, Stop> {
        if let Some(t) = spec.obj_type {
            if o.obj_type != self.value(t)? {
                return Ok(false);
            }
        }
        if let Some(a) = spec.attr {
            if !o.has_attr(self.value(a)?) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn resolve(&self, spec: &ObjSpec) -> Result<&'a ObjectInstance, Stop> {
        let mut found = None;
        for &o in &self.seen {
            if self.matches(o, spec)? {
                if found.is_some() {
                    return Err(Stop::Invalid(InvalidReason::ReferenceNotUnique));
                }
                found = Some(o);
            }
        }
        found.ok_or(Stop::Invalid(InvalidReason::ReferenceNotUnique))
    }

    fn resolve_pair(&self, a: &ObjSpec, b: &ObjSpec) -> Result<(&'a ObjectInstance, &'a ObjectInstance), Stop> {
        let (x, y) = (self.resolve(a)?, self.resolve(b)?);
        if x.id == y.id {
            return Err(Stop::Invalid(InvalidReason::SameReferent));
        }
        Ok((x, y))
    }

    fn room_type(&self, r: RoomId) -> Result<&'a str, Stop> {
        Ok(self.ctx.house.room_type(r).ok_or(ExecError::UnknownRoom(r))?)
    }

    fn count_matching(&self, spec: &ObjSpec) -> Result<usize, Stop> {
        let mut n = 0;
        for &o in &self.seen {
            if self.matches(o, spec)? {
                n += 1;
            }
        }
        Ok(n)
    }

    fn group_specs(&self) -> Result<Vec<ObjSpec>, Stop> {
        let k = self.bindings.group_arity();
        if k == 0 {
            return Err(Stop::Invalid(InvalidReason::EmptyGroup));
        }
        Ok((0..k).map(ObjSpec::group_element).collect())
    }

    /// Whether distinct objects from `pool` can be assigned to every spec.
    fn distinct_match(&self, pool: &[&'a ObjectInstance], specs: &[ObjSpec]) -> Result<bool, Stop> {
        let mut table = Vec::with_capacity(specs.len());
        for s in specs {
            let mut row = Vec::with_capacity(pool.len());
            for o in pool {
                row.push(self.matches(o, s)?);
            }
            table.push(row);
        }
        fn assign(table: &[Vec<bool>], used: &mut Vec<bool>, i: usize) -> bool {
            if i == table.len() {
                return true;
            }
            for j in 0..used.len() {
                if table[i][j] && !used[j] {
                    used[j] = true;
                    if assign(table, used, i + 1) {
                        return true;
                    }
                    used[j] = false;
                }
            }
            false
        }
        Ok(assign(&table, &mut vec![false; pool.len()], 0))
    }

    fn in_room(&self, r: RoomId) -> Vec<&'a ObjectInstance> {
        self.seen.iter().copied().filter(|o| o.room_id == r).collect()
    }

    fn unique_room_of_type(&self, k: SlotKey) -> Result<RoomId, Stop> {
        let t = self.value(k)?;
        let mut found = None;
        for &r in &self.ctx.gt.seen_rooms {
            if self.room_type(r)? == t {
                if found.is_some() {
                    return Err(Stop::Invalid(InvalidReason::ReferenceNotUnique));
                }
                found = Some(r);
            }
        }
        found.ok_or(Stop::Invalid(InvalidReason::MissingOperand))
    }

    fn attr_of(&self, o: &ObjectInstance, kind: AttrKind) -> Result<&'a str, Stop> {
        Ok(match kind {
            AttrKind::Color => self.seen.iter().find(|s| s.id == o.id).map(|s| s.color.as_str()).unwrap_or(""),
            AttrKind::ObjType => self.seen.iter().find(|s| s.id == o.id).map(|s| s.obj_type.as_str()).unwrap_or(""),
            AttrKind::RoomType => self.room_type(o.room_id)?,
        })
    }

    fn predicate(&self, o: &ObjectInstance, p: &Predicate) -> Result<bool, Stop> {
        Ok(match *p {
            Predicate::HasColor(k) => o.color == self.value(k)?,
            Predicate::IsType(k) => o.obj_type == self.value(k)?,
            Predicate::InRoomType(k) => self.room_type(o.room_id)? == self.value(k)?,
        })
    }

    fn count_answer(&self, n: usize) -> Result<String, Stop> {
        let (lo, hi) = self.ctx.lexicon.count_answers;
        if (n as u64) < lo as u64 || (n as u64) > hi as u64 {
            return Err(Stop::Invalid(InvalidReason::CountOutOfRange));
        }
        Ok(n.to_string())
    }

    fn run(&self, program: &Program) -> Result<String, Stop> {
        let yes_no = |b: bool| self.ctx.lexicon.binary(b);
        let mut value: Option<Value<'a>> = None;
        let mut answer: Option<String> = None;
        for op in &program.ops {
            let cur = value.take();
            let mismatch =
                || Stop::Error(ExecError::TypeCheck { index: 0, op: op.to_string(), message: "unexpected input kind".into() });
            match op {
                Op::InputObjects => value = Some(Value::Objects(self.seen.clone())),
                Op::InputRooms => value = Some(Value::Rooms(self.ctx.gt.seen_rooms.clone())),
                Op::SelectUnique(refs) => {
                    let mut out: Vec<&ObjectInstance> = Vec::new();
                    for r in refs {
                        let o = self.resolve(r)?;
                        if out.iter().any(|p| p.id == o.id) {
                            return Err(Stop::Invalid(InvalidReason::SameReferent));
                        }
                        out.push(o);
                    }
                    value = Some(Value::Objects(out));
                }
                Op::FilterType(_) | Op::FilterAttr(_) | Op::FilterColor(_) | Op::FilterInRoomOf(_) | Op::Relate { .. } => {
                    let Some(Value::Objects(objs)) = cur else { return Err(mismatch()) };
                    let mut keep = Vec::new();
                    match op {
                        Op::FilterType(k) => {
                            let t = self.value(*k)?;
                            keep.extend(objs.into_iter().filter(|o| o.obj_type == t));
                        }
                        Op::FilterAttr(k) => {
                            let a = self.value(*k)?;
                            keep.extend(objs.into_iter().filter(|o| o.has_attr(a)));
                        }
                        Op::FilterColor(k) => {
                            let c = self.value(*k)?;
                            keep.extend(objs.into_iter().filter(|o| o.color == c));
                        }
                        Op::FilterInRoomOf(spec) => {
                            let r = self.resolve(spec)?;
                            keep.extend(objs.into_iter().filter(|o| o.room_id == r.room_id && o.id != r.id));
                        }
                        Op::Relate { rel, reference } => {
                            let name = self.value(*rel)?;
                            let relation = Relation::lookup(name)
                                .ok_or_else(|| ExecError::BadBinding(format!("unknown relation {name:?}")))?;
                            let r = self.resolve(reference)?;
                            keep.extend(objs.into_iter().filter(|o| relation.holds(o, r)));
                        }
                        _ => unreachable!(),
                    }
                    value = Some(Value::Objects(keep));
                }
                Op::FilterRoomType(k) => {
                    let t = self.value(*k)?;
                    value = Some(match cur {
                        Some(Value::Objects(objs)) => {
                            let mut keep = Vec::new();
                            for o in objs {
                                if self.room_type(o.room_id)? == t {
                                    keep.push(o);
                                }
                            }
                            Value::Objects(keep)
                        }
                        Some(Value::Rooms(rooms)) => {
                            let mut keep = BTreeSet::new();
                            for r in rooms {
                                if self.room_type(r)? == t {
                                    keep.insert(r);
                                }
                            }
                            Value::Rooms(keep)
                        }
                        _ => return Err(mismatch()),
                    });
                }
                Op::FilterRoomsWith => {
                    let Some(Value::Rooms(rooms)) = cur else { return Err(mismatch()) };
                    let specs = self.group_specs()?;
                    let mut keep = BTreeSet::new();
                    for r in rooms {
                        if self.distinct_match(&self.in_room(r), &specs)? {
                            keep.insert(r);
                        }
                    }
                    value = Some(Value::Rooms(keep));
                }
                Op::Unique => {
                    value = Some(match cur {
                        Some(Value::Objects(objs)) if objs.len() == 1 => Value::Object(objs[0]),
                        Some(Value::Rooms(rooms)) if rooms.len() == 1 => Value::Room(*rooms.iter().next().unwrap()),
                        Some(Value::Objects(_) | Value::Rooms(_)) => return Err(Stop::Invalid(InvalidReason::NotUnique)),
                        _ => return Err(mismatch()),
                    });
                }
                Op::Exist => {
                    answer = Some(match cur {
                        Some(Value::Objects(objs)) => yes_no(!objs.is_empty()),
                        Some(Value::Rooms(rooms)) => yes_no(!rooms.is_empty()),
                        _ => return Err(mismatch()),
                    });
                }
                Op::Count => {
                    let n = match cur {
                        Some(Value::Objects(objs)) => objs.len(),
                        Some(Value::Rooms(rooms)) => rooms.len(),
                        _ => return Err(mismatch()),
                    };
                    answer = Some(self.count_answer(n)?);
                }
                Op::CountRoomsWith(spec) => {
                    let Some(Value::Rooms(rooms)) = cur else { return Err(mismatch()) };
                    let mut n = 0;
                    for r in rooms {
                        let mut any = false;
                        for o in self.in_room(r) {
                            if self.matches(o, spec)? {
                                any = true;
                                break;
                            }
                        }
                        n += any as usize;
                    }
                    answer = Some(self.count_answer(n)?);
                }
                Op::ForAll(p) => {
                    let objs = match cur {
                        Some(Value::Objects(objs)) => objs,
                        Some(Value::Object(o)) => vec![o],
                        _ => return Err(mismatch()),
                    };
                    if objs.is_empty() {
                        return Err(Stop::Invalid(InvalidReason::EmptyForAll));
                    }
                    let mut all = true;
                    for o in objs {
                        all &= self.predicate(o, p)?;
                    }
                    answer = Some(yes_no(all));
                }
                Op::GetAttr(kind) => {
                    answer = Some(match (cur, kind) {
                        (Some(Value::Object(o)), k) => self.attr_of(o, *k)?.to_string(),
                        (Some(Value::Room(r)), AttrKind::RoomType) => self.room_type(r)?.to_string(),
                        _ => return Err(mismatch()),
                    });
                }
                Op::SameAttr { kind, a, b } => {
                    let (x, y) = self.resolve_pair(a, b)?;
                    answer = Some(yes_no(self.attr_of(x, *kind)? == self.attr_of(y, *kind)?));
                }
                Op::CompareCount { mode, a, b } => {
                    let (ca, cb) = (self.count_matching(a)?, self.count_matching(b)?);
                    let holds = match mode {
                        CountComparison::AsMany => ca == cb,
                        CountComparison::Bound(k) => match self.value(*k)? {
                            "more" => ca > cb,
                            "fewer" => ca < cb,
                            other => return Err(ExecError::BadBinding(format!("comp must be more/fewer, got {other:?}")).into()),
                        },
                    };
                    answer = Some(yes_no(holds));
                }
                Op::CompareSize { comp, operands } => {
                    let (sa, sb) = match operands {
                        SizeOperands::Objects(a, b) => {
                            let (x, y) = self.resolve_pair(a, b).map_err(|e| match e {
                                Stop::Invalid(InvalidReason::ReferenceNotUnique) => Stop::Invalid(InvalidReason::MissingOperand),
                                other => other,
                            })?;
                            (x.size, y.size)
                        }
                        SizeOperands::Rooms(a, b) => {
                            let (x, y) = (self.unique_room_of_type(*a)?, self.unique_room_of_type(*b)?);
                            if x == y {
                                return Err(Stop::Invalid(InvalidReason::SameReferent));
                            }
                            let area = |r: RoomId| self.ctx.house.room(r).map(|r| r.area_cells as f64).unwrap_or(0.0);
                            (area(x), area(y))
                        }
                    };
                    let holds = match self.value(*comp)? {
                        "bigger" => sa > sb,
                        "smaller" => sa < sb,
                        other => return Err(ExecError::BadBinding(format!("comp_rel must be bigger/smaller, got {other:?}")).into()),
                    };
                    answer = Some(yes_no(holds));
                }
                Op::SetExist(scope) => {
                    let specs = self.group_specs()?;
                    let found = match scope {
                        SetScope::Anywhere => self.distinct_match(&self.seen, &specs)?,
                        SetScope::OneRoom | SetScope::NamedRoom(_) => {
                            let wanted = match scope {
                                SetScope::NamedRoom(k) => Some(self.value(*k)?),
                                _ => None,
                            };
                            let mut any = false;
                            for &r in &self.ctx.gt.seen_rooms {
                                if wanted.is_some_and(|t| self.room_type(r).map(|rt| rt != t).unwrap_or(true)) {
                                    continue;
                                }
                                if self.distinct_match(&self.in_room(r), &specs)? {
                                    any = true;
                                    break;
                                }
                            }
                            any
                        }
                    };
                    answer = Some(yes_no(found));
                }
                Op::SetExistRooms => {
                    let k = self.bindings.group_arity();
                    if k == 0 {
                        return Err(Stop::Invalid(InvalidReason::EmptyGroup));
                    }
                    let mut types = Vec::new();
                    for i in 0..k {
                        types.push(self.value(SlotKey::element(TagName::RoomType, i))?);
                    }
                    let rooms: Vec<&str> =
                        self.ctx.gt.seen_rooms.iter().map(|&r| self.room_type(r)).collect::<Result<_, _>>()?;
                    answer = Some(yes_no(distinct_room_match(&rooms, &types)));
                }
            }
        }
        answer.ok_or_else(|| {
            Stop::Error(ExecError::TypeCheck { index: program.ops.len(), op: "<end>".into(), message: "no answer produced".into() })
        })
    }
}

fn distinct_room_match(rooms: &[&str], wanted: &[&str]) -> bool {
    fn go(rooms: &[&str], wanted: &[&str], used: &mut Vec<bool>) -> bool {
        let Some((first, rest)) = wanted.split_first() else { return true };
        for i in 0..rooms.len() {
            if !used[i] && rooms[i] == *first {
                used[i] = true;
                if go(rooms, rest, used) {
                    return true;
                }
                used[i] = false;
            }
        }
        false
    }
    go(rooms, wanted, &mut vec![false; rooms.len()])
}

/// Runs `program` on the ground truth. `Invalid` marks an unanswerable
/// instantiation; `Err` marks a malformed program or incomplete bindings.
pub fn execute(program: &Program, ctx: ExecContext<'_>, bindings: &Bindings) -> Result<Outcome, ExecError> {
    program.type_check()?;
    let mut seen = Vec::with_capacity(ctx.gt.seen_objects.len());
    for &id in &ctx.gt.seen_objects {
        seen.push(ctx.house.object(id).ok_or(ExecError::UnknownObject(id))?);
    }
    let runner = Runner { ctx, bindings, seen };
    match runner.run(program) {
        Ok(a) => Ok(Outcome::Answer(a)),
        Err(Stop::Invalid(r)) => Ok(Outcome::Invalid(r)),
        Err(Stop::Error(e)) => Err(e),
    }
}
