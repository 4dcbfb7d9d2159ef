//! The 28 built-in templates.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::program::{
    AnswerKind, AttrKind, CountComparison, ObjSpec, Op, Predicate, Program, SetScope, SizeOperands,
};
use super::template::{parse_template, SlotKey, TagName, TemplatePattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "Equals_attr")]
    EqualsAttr,
    Count,
    #[serde(rename = "Compare_count")]
    CompareCount,
    #[serde(rename = "Compare_size")]
    CompareSize,
    Exist,
    #[serde(rename = "Query_color")]
    QueryColor,
    #[serde(rename = "Query_obj_type")]
    QueryObjType,
    #[serde(rename = "Query_room_location")]
    QueryRoomLocation,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::EqualsAttr,
        Category::Count,
        Category::CompareCount,
        Category::CompareSize,
        Category::Exist,
        Category::QueryColor,
        Category::QueryObjType,
        Category::QueryRoomLocation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::EqualsAttr => "Equals_attr",
            Category::Count => "Count",
            Category::CompareCount => "Compare_count",
            Category::CompareSize => "Compare_size",
            Category::Exist => "Exist",
            Category::QueryColor => "Query_color",
            Category::QueryObjType => "Query_obj_type",
            Category::QueryRoomLocation => "Query_room_location",
        }
    }

    /// Categories whose answers are yes/no.
    pub fn is_binary(self) -> bool {
        matches!(self, Category::EqualsAttr | Category::CompareCount | Category::CompareSize | Category::Exist)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct QuestionTemplate {
    pub id: u8,
    pub category: Category,
    pub text: &'static str,
    pub pattern: TemplatePattern,
    pub program: Program,
    pub answer_kind: AnswerKind,
    /// Attribute slots that must not be bound to a color.
    pub color_free: Vec<SlotKey>,
    /// Published number of questions for this template; quota weights derive from it.
    pub reference_count: u32,
}

impl QuestionTemplate {
    pub fn has_set_group(&self) -> bool {
        self.pattern.has_set_group()
    }

    /// Slots needing a bound value for the given group arity (articles excluded).
    pub fn slot_keys(&self, arity: u8) -> Vec<SlotKey> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for tag in self.pattern.tags() {
            if tag.name == TagName::Art {
                continue;
            }
            let keys: Vec<SlotKey> =
                if tag.in_group { (0..arity).map(|i| tag.slot(Some(i))).collect() } else { vec![tag.slot(None)] };
            for k in keys {
                if seen.insert(k) {
                    out.push(k);
                }
            }
        }
        out
    }

    pub fn record(&self) -> TemplateRecord {
        TemplateRecord {
            id: self.id,
            category: self.category,
            pattern: self.text.to_string(),
            answer_kind: self.answer_kind,
            program: self.program.ops.iter().map(|op| op.to_string()).collect(),
            reference_count: self.reference_count,
        }
    }
}

/// Exportable description of a template.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateRecord {
    pub id: u8,
    pub category: Category,
    pub pattern: String,
    pub answer_kind: AnswerKind,
    pub program: Vec<String>,
    pub reference_count: u32,
}

const fn plain(n: TagName) -> SlotKey {
    SlotKey::plain(n)
}

const fn nth(n: TagName, i: u8) -> SlotKey {
    SlotKey::nth(n, i)
}

use TagName::{Attr, Color, Comp, CompRel, ObjType, Rel, RoomType};

const ATTR: SlotKey = plain(Attr);
const OBJ: SlotKey = plain(ObjType);
const ROOM: SlotKey = plain(RoomType);
const ATTR1: SlotKey = nth(Attr, 1);
const ATTR2: SlotKey = nth(Attr, 2);
const OBJ1: SlotKey = nth(ObjType, 1);
const OBJ2: SlotKey = nth(ObjType, 2);
const REL: SlotKey = plain(Rel);

const fn spec(t: SlotKey, a: SlotKey) -> ObjSpec {
    ObjSpec::new(Some(t), Some(a))
}

const FIRST: ObjSpec = spec(OBJ1, ATTR1);
const SECOND: ObjSpec = spec(OBJ2, ATTR2);

struct Def {
    category: Category,
    text: &'static str,
    ops: Vec<Op>,
    color_free: Vec<SlotKey>,
    count: u32,
}

fn def(category: Category, text: &'static str, count: u32, ops: Vec<Op>) -> Def {
    Def { category, text, ops, color_free: Vec::new(), count }
}

fn definitions() -> Vec<Def> {
    use Category::*;
    let relate = Op::Relate { rel: REL, reference: SECOND };
    vec![
        Def {
            color_free: vec![ATTR],
            ..def(EqualsAttr, "Are all <attr> <obj_type-pl> <color>?", 4014, vec![
                Op::InputObjects,
                Op::FilterType(OBJ),
                Op::FilterAttr(ATTR),
                Op::ForAll(Predicate::HasColor(plain(Color))),
            ])
        },
        def(EqualsAttr, "Are all <attr> <obj_type-pl> in the <room_type>?", 3811, vec![
            Op::InputObjects,
            Op::FilterType(OBJ),
            Op::FilterAttr(ATTR),
            Op::ForAll(Predicate::InRoomType(ROOM)),
        ]),
        def(EqualsAttr, "Are all <attr> things <obj_type-pl>?", 3539, vec![
            Op::InputObjects,
            Op::FilterAttr(ATTR),
            Op::ForAll(Predicate::IsType(OBJ)),
        ]),
        Def {
            color_free: vec![ATTR1, ATTR2],
            ..def(
                EqualsAttr,
                "Are both the <attr1> <obj_type1> and the <attr2> <obj_type2> <color>?",
                3968,
                vec![Op::SelectUnique(vec![FIRST, SECOND]), Op::ForAll(Predicate::HasColor(plain(Color)))],
            )
        },
        def(
            EqualsAttr,
            "Are both the <attr1> <obj_type1> and the <attr2> <obj_type2> in the <room_type>?",
            3804,
            vec![Op::SelectUnique(vec![FIRST, SECOND]), Op::ForAll(Predicate::InRoomType(ROOM))],
        ),
        Def {
            color_free: vec![ATTR1, ATTR2],
            ..def(
                EqualsAttr,
                "Are the <attr1> <obj_type1> and the <attr2> <obj_type2> the same color?",
                4018,
                vec![Op::SameAttr { kind: AttrKind::Color, a: FIRST, b: SECOND }],
            )
        },
        def(EqualsAttr, "Is the <attr1> thing <rel> the <attr2> <obj_type2> <art> <obj_type1>?", 3315, vec![
            Op::InputObjects,
            relate.clone(),
            Op::FilterAttr(ATTR1),
            Op::Unique,
            Op::ForAll(Predicate::IsType(OBJ1)),
        ]),
        def(
            Count,
            "How many <attr1> <obj_type1-pl> are in the room containing the <attr2> <obj_type2>?",
            3999,
            vec![
                Op::InputObjects,
                Op::FilterInRoomOf(SECOND),
                Op::FilterType(OBJ1),
                Op::FilterAttr(ATTR1),
                Op::Count,
            ],
        ),
        def(Count, "How many <attr> <obj_type-pl> are in the <room_type>?", 3763, vec![
            Op::InputObjects,
            Op::FilterRoomType(ROOM),
            Op::FilterType(OBJ),
            Op::FilterAttr(ATTR),
            Op::Count,
        ]),
        def(Count, "How many <obj_type-pl> are <attr>?", 4120, vec![
            Op::InputObjects,
            Op::FilterType(OBJ),
            Op::FilterAttr(ATTR),
            Op::Count,
        ]),
        def(Count, "How many rooms have <attr> <obj_type-pl>?", 3834, vec![
            Op::InputRooms,
            Op::CountRoomsWith(spec(OBJ, ATTR)),
        ]),
        def(
            CompareCount,
            "Are there <comp> <attr1> <obj_type1-pl> than <attr2> <obj_type2-pl>?",
            4058,
            vec![Op::CompareCount { mode: CountComparison::Bound(plain(Comp)), a: FIRST, b: SECOND }],
        ),
        def(
            CompareCount,
            "Are there as many <attr1> <obj_type1-pl> as there are <attr2> <obj_type2-pl>?",
            4100,
            vec![Op::CompareCount { mode: CountComparison::AsMany, a: FIRST, b: SECOND }],
        ),
        def(CompareSize, "Is the <attr1> <obj_type> <comp_rel> than the <attr2> one?", 3272, vec![Op::CompareSize {
            comp: plain(CompRel),
            operands: SizeOperands::Objects(spec(OBJ, ATTR1), spec(OBJ, ATTR2)),
        }]),
        def(CompareSize, "Is the <room_type1> <comp_rel> than the <room_type2>?", 3148, vec![Op::CompareSize {
            comp: plain(CompRel),
            operands: SizeOperands::Rooms(nth(RoomType, 1), nth(RoomType, 2)),
        }]),
        def(Exist, "Is there <art> <attr> <obj_type>?", 4122, vec![
            Op::InputObjects,
            Op::FilterType(OBJ),
            Op::FilterAttr(ATTR),
            Op::Exist,
        ]),
        def(Exist, "Is there <art> <room_type>?", 3335, vec![Op::InputRooms, Op::FilterRoomType(ROOM), Op::Exist]),
        def(Exist, "Is there a room that has set(<art> <attr{}> <obj_type{}>)?", 3877, vec![Op::SetExist(
            SetScope::OneRoom,
        )]),
        def(Exist, "Is there set(<art> <attr{}> <obj_type{}>) in the <room_type>?", 4025, vec![Op::SetExist(
            SetScope::NamedRoom(ROOM),
        )]),
        def(Exist, "Is there set(<art> <attr{}> <obj_type{}>)?", 4107, vec![Op::SetExist(SetScope::Anywhere)]),
        def(Exist, "Is there set(<art> <room_type{}>)?", 3750, vec![Op::SetExistRooms]),
        Def {
            color_free: vec![ATTR1],
            ..def(
                QueryColor,
                "What color is the <attr1> <obj_type1> <rel> the <attr2> <obj_type2>?",
                2178,
                vec![
                    Op::InputObjects,
                    relate.clone(),
                    Op::FilterType(OBJ1),
                    Op::FilterAttr(ATTR1),
                    Op::Unique,
                    Op::GetAttr(AttrKind::Color),
                ],
            )
        },
        Def {
            color_free: vec![ATTR],
            ..def(QueryColor, "What color is the <attr> <obj_type>?", 3592, vec![
                Op::InputObjects,
                Op::FilterType(OBJ),
                Op::FilterAttr(ATTR),
                Op::Unique,
                Op::GetAttr(AttrKind::Color),
            ])
        },
        def(QueryObjType, "What is the <attr1> thing <rel> the <attr2> <obj_type2>?", 3119, vec![
            Op::InputObjects,
            relate.clone(),
            Op::FilterAttr(ATTR1),
            Op::Unique,
            Op::GetAttr(AttrKind::ObjType),
        ]),
        def(QueryObjType, "What is the <attr> thing?", 2883, vec![
            Op::InputObjects,
            Op::FilterAttr(ATTR),
            Op::Unique,
            Op::GetAttr(AttrKind::ObjType),
        ]),
        def(QueryRoomLocation, "Where are the set(<attr{}> <obj_type{}>)?", 3816, vec![
            Op::InputRooms,
            Op::FilterRoomsWith,
            Op::Unique,
            Op::GetAttr(AttrKind::RoomType),
        ]),
        def(QueryRoomLocation, "Where is the <attr1> <obj_type1> <rel> the <attr2> <obj_type2>?", 2284, vec![
            Op::InputObjects,
            relate,
            Op::FilterType(OBJ1),
            Op::FilterAttr(ATTR1),
            Op::Unique,
            Op::GetAttr(AttrKind::RoomType),
        ]),
        def(QueryRoomLocation, "Where is the <attr> <obj_type>?", 3481, vec![
            Op::InputObjects,
            Op::FilterType(OBJ),
            Op::FilterAttr(ATTR),
            Op::Unique,
            Op::GetAttr(AttrKind::RoomType),
        ]),
    ]
}

/// All templates, ids 1 to 28, grouped by category.
pub fn builtin_templates() -> &'static [QuestionTemplate] {
    static TEMPLATES: OnceLock<Vec<QuestionTemplate>> = OnceLock::new();
    TEMPLATES.get_or_init(|| {
        definitions()
            .into_iter()
            .enumerate()
            .map(|(i, d)| {
                let program = Program::new(d.ops);
                let answer_kind = program.type_check().expect("built-in program must type-check");
                QuestionTemplate {
                    id: i as u8 + 1,
                    category: d.category,
                    text: d.text,
                    pattern: parse_template(d.text).expect("built-in pattern must parse"),
                    program,
                    answer_kind,
                    color_free: d.color_free,
                    reference_count: d.count,
                }
            })
            .collect()
    })
}

pub fn template_by_id(id: u8) -> Option<&'static QuestionTemplate> {
    builtin_templates().get((id as usize).checked_sub(1)?)
}
