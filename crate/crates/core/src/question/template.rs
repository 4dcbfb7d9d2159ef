//! Template text patterns: `<tag>` slots, ordinals, `-pl` plurals and
//! `set(...)` groups whose element tags are written `<tag{}>`.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("malformed tag {text:?} at byte {pos}")]
    Malformed { pos: usize, text: String },
    #[error("unbalanced set(...) at byte {pos}")]
    UnbalancedSet { pos: usize },
    #[error("nested set(...) at byte {pos}")]
    NestedSet { pos: usize },
    #[error("unknown tag name {0:?}")]
    UnknownTag(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TagName {
    Attr,
    ObjType,
    RoomType,
    Color,
    Rel,
    Comp,
    CompRel,
    Art,
}

impl TagName {
    pub const ALL: [TagName; 8] = [
        TagName::Attr,
        TagName::ObjType,
        TagName::RoomType,
        TagName::Color,
        TagName::Rel,
        TagName::Comp,
        TagName::CompRel,
        TagName::Art,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TagName::Attr => "attr",
            TagName::ObjType => "obj_type",
            TagName::RoomType => "room_type",
            TagName::Color => "color",
            TagName::Rel => "rel",
            TagName::Comp => "comp",
            TagName::CompRel => "comp_rel",
            TagName::Art => "art",
        }
    }

    pub fn lookup(s: &str) -> Option<TagName> {
        TagName::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

impl fmt::Display for TagName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A slot as written in a pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag {
    pub name: TagName,
    pub ordinal: Option<u8>,
    pub plural: bool,
    /// Inside a `set(...)` group; instantiated once per group element.
    pub in_group: bool,
}

impl Tag {
    pub const fn new(name: TagName, ordinal: Option<u8>) -> Self {
        Self { name, ordinal, plural: false, in_group: false }
    }

    /// Binding key for this tag; `element` is required for group tags.
    pub fn slot(&self, element: Option<u8>) -> SlotKey {
        SlotKey { name: self.name, ordinal: self.ordinal, element: if self.in_group { element } else { None } }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}", self.name)?;
        if let Some(n) = self.ordinal {
            write!(f, "{n}")?;
        }
        if self.in_group && self.name != TagName::Art {
            f.write_str("{}")?;
        }
        if self.plural {
            f.write_str("-pl")?;
        }
        f.write_str(">")
    }
}

/// Binding key: tag name, ordinal, and group element index (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlotKey {
    pub name: TagName,
    pub ordinal: Option<u8>,
    pub element: Option<u8>,
}

impl SlotKey {
    pub const fn plain(name: TagName) -> Self {
        Self { name, ordinal: None, element: None }
    }

    pub const fn nth(name: TagName, ordinal: u8) -> Self {
        Self { name, ordinal: Some(ordinal), element: None }
    }

    pub const fn element(name: TagName, element: u8) -> Self {
        Self { name, ordinal: None, element: Some(element) }
    }
}

impl fmt::Display for SlotKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name.as_str())?;
        if let Some(n) = self.ordinal {
            write!(f, "{n}")?;
        }
        if let Some(e) = self.element {
            write!(f, "{{{e}}}")?;
        }
        Ok(())
    }
}

impl FromStr for SlotKey {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || ParseError::Malformed { pos: 0, text: s.to_string() };
        let (head, element) = match s.find('{') {
            Some(i) => {
                let inner = s[i..].strip_prefix('{').and_then(|r| r.strip_suffix('}')).ok_or_else(malformed)?;
                (&s[..i], Some(inner.parse::<u8>().map_err(|_| malformed())?))
            }
            None => (s, None),
        };
        let (name, ordinal) = split_ordinal(head).ok_or_else(malformed)?;
        let name = TagName::lookup(name).ok_or_else(|| ParseError::UnknownTag(name.to_string()))?;
        Ok(SlotKey { name, ordinal, element })
    }
}

impl Serialize for SlotKey {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SlotKey {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

fn split_ordinal(s: &str) -> Option<(&str, Option<u8>)> {
    let digits = s.len() - s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    let (name, num) = s.split_at(s.len() - digits);
    if name.is_empty() {
        return None;
    }
    Some((name, if num.is_empty() { None } else { Some(num.parse().ok()?) }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    Text(String),
    Tag(Tag),
    Set(Vec<Segment>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplatePattern {
    pub segments: Vec<Segment>,
}

impl TemplatePattern {
    /// Tags in textual order; group tags appear once.
    pub fn tags(&self) -> Vec<Tag> {
        fn walk(segs: &[Segment], out: &mut Vec<Tag>) {
            for s in segs {
                match s {
                    Segment::Text(_) => {}
                    Segment::Tag(t) => out.push(*t),
                    Segment::Set(inner) => walk(inner, out),
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.segments, &mut out);
        out
    }

    pub fn has_set_group(&self) -> bool {
        self.segments.iter().any(|s| matches!(s, Segment::Set(_)))
    }
}

impl fmt::Display for TemplatePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn write(segs: &[Segment], f: &mut fmt::Formatter<'_>) -> fmt::Result {
            for s in segs {
                match s {
                    Segment::Text(t) => f.write_str(t)?,
                    Segment::Tag(t) => write!(f, "{t}")?,
                    Segment::Set(inner) => {
                        f.write_str("set(")?;
                        write(inner, f)?;
                        f.write_str(")")?;
                    }
                }
            }
            Ok(())
        }
        write(&self.segments, f)
    }
}

fn parse_tag(body: &str, pos: usize, in_group: bool) -> Result<Tag, ParseError> {
    let malformed = || ParseError::Malformed { pos, text: format!("<{body}>") };
    if body.is_empty() || !body.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '{' | '}')) {
        return Err(malformed());
    }
    let (body, plural) = match body.strip_suffix("-pl") {
        Some(b) => (b, true),
        None => (body, false),
    };
    let (body, braces) = match body.strip_suffix("{}") {
        Some(b) => (b, true),
        None => (body, false),
    };
    if body.contains(['-', '{', '}']) {
        return Err(malformed());
    }
    let (name, ordinal) = split_ordinal(body).ok_or_else(malformed)?;
    let name = TagName::lookup(name).ok_or_else(|| ParseError::UnknownTag(name.to_string()))?;
    if plural && name != TagName::ObjType {
        return Err(malformed());
    }
    // Group element tags carry `{}`, except articles which follow their noun phrase.
    let wants_braces = in_group && name != TagName::Art;
    if braces != wants_braces {
        return Err(malformed());
    }
    Ok(Tag { name, ordinal, plural, in_group })
}

/// Parses template text into literal text, tags and set groups.
pub fn parse_template(spec: &str) -> Result<TemplatePattern, ParseError> {
    let mut top: Vec<Segment> = Vec::new();
    let mut group: Option<(usize, Vec<Segment>)> = None;
    let mut text = String::new();
    let mut i = 0;

    fn flush(text: &mut String, into: &mut Vec<Segment>) {
        if !text.is_empty() {
            into.push(Segment::Text(std::mem::take(text)));
        }
    }

    while i < spec.len() {
        let rest = &spec[i..];
        if rest.starts_with("set(") {
            if group.is_some() {
                return Err(ParseError::NestedSet { pos: i });
            }
            flush(&mut text, &mut top);
            group = Some((i, Vec::new()));
            i += 4;
            continue;
        }
        let ch = rest.chars().next().expect("non-empty remainder");
        match ch {
            '<' => {
                let end = rest.find('>').ok_or(ParseError::Malformed { pos: i, text: rest.to_string() })?;
                let body = &rest[1..end];
                if body.contains('<') {
                    return Err(ParseError::Malformed { pos: i, text: rest[..=end].to_string() });
                }
                let tag = parse_tag(body, i, group.is_some())?;
                match group.as_mut() {
                    Some((_, g)) => {
                        flush(&mut text, g);
                        g.push(Segment::Tag(tag));
                    }
                    None => {
                        flush(&mut text, &mut top);
                        top.push(Segment::Tag(tag));
                    }
                }
                i += end + 1;
            }
            '>' => return Err(ParseError::Malformed { pos: i, text: ">".into() }),
            ')' if group.is_some() => {
                let (_, mut g) = group.take().unwrap();
                flush(&mut text, &mut g);
                top.push(Segment::Set(g));
                i += 1;
            }
            '(' | ')' => return Err(ParseError::UnbalancedSet { pos: i }),
            c => {
                text.push(c);
                i += c.len_utf8();
            }
        }
    }
    if let Some((pos, _)) = group {
        return Err(ParseError::UnbalancedSet { pos });
    }
    flush(&mut text, &mut top);
    Ok(TemplatePattern { segments: top })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(p: &TemplatePattern) -> Vec<TagName> {
        p.tags().iter().map(|t| t.name).collect()
    }

    #[test]
    fn simple_exist_pattern() {
        let p = parse_template("Is there <art> <attr> <obj_type>?").unwrap();
        assert_eq!(names(&p), vec![TagName::Art, TagName::Attr, TagName::ObjType]);
    }

    #[test]
    fn plural_flag() {
        let p = parse_template("How many <attr> <obj_type-pl> are in the <room_type>?").unwrap();
        let tags = p.tags();
        assert!(tags[1].plural && tags[1].name == TagName::ObjType);
        assert!(!tags[0].plural && !tags[2].plural);
    }

    #[test]
    fn ordinals_and_groups() {
        let p = parse_template("Is there set(<art> <attr{}> <obj_type{}>) in the <room_type>?").unwrap();
        let tags = p.tags();
        assert_eq!(tags.len(), 4);
        assert!(tags[..3].iter().all(|t| t.in_group));
        assert!(!tags[3].in_group);
        let p = parse_template("Are there <comp> <attr1> <obj_type1-pl> than <attr2> <obj_type2-pl>?").unwrap();
        assert_eq!(p.tags()[2], Tag { name: TagName::ObjType, ordinal: Some(1), plural: true, in_group: false });
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_template("<bad tag>"), Err(ParseError::Malformed { .. })));
        assert!(matches!(parse_template("Is there <art"), Err(ParseError::Malformed { .. })));
        assert_eq!(parse_template("What is <foo>?"), Err(ParseError::UnknownTag("foo".into())));
        assert!(matches!(parse_template("Is there set(<art> <attr{}>?"), Err(ParseError::UnbalancedSet { .. })));
        assert!(matches!(parse_template("Is there x)?"), Err(ParseError::UnbalancedSet { .. })));
        assert!(matches!(parse_template("set(set(<art>))"), Err(ParseError::NestedSet { .. })));
        assert!(matches!(parse_template("<attr-pl>"), Err(ParseError::Malformed { .. })));
        assert!(matches!(parse_template("<attr{}>"), Err(ParseError::Malformed { .. })));
        assert!(matches!(parse_template("set(<attr>)"), Err(ParseError::Malformed { .. })));
    }

    #[test]
    fn slot_keys_round_trip() {
        for s in ["attr", "obj_type1", "room_type{2}", "comp_rel", "attr2"] {
            assert_eq!(s.parse::<SlotKey>().unwrap().to_string(), s);
        }
        assert!("colour".parse::<SlotKey>().is_err());
        assert!("attr{x}".parse::<SlotKey>().is_err());
    }
}
