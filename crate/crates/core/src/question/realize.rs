//! Natural-language realization of bound templates.

use thiserror::Error;

use super::builtin::QuestionTemplate;
use super::program::Bindings;
use super::template::{Segment, SlotKey, TagName};
use crate::scene::Lexicon;

pub const MAX_QUESTION_TOKENS: usize = 56;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RealizeError {
    #[error("missing binding for {0}")]
    MissingBinding(SlotKey),
    #[error("no plural form for {0:?}")]
    MissingPlural(String),
    #[error("set group needs at least one bound element")]
    EmptyGroup,
    #[error("question has {0} tokens, more than the maximum of {MAX_QUESTION_TOKENS}")]
    TooLong(usize),
}

/// Words and punctuation. `?` and `,` are tokens of their own.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let mut cur = String::new();
        for ch in word.chars() {
            if matches!(ch, '?' | ',') {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(ch.to_string());
            } else {
                cur.push(ch);
            }
        }
        if !cur.is_empty() {
            out.push(cur);
        }
    }
    out
}

enum Chunk {
    Text(String),
    Art,
}

fn render(
    segs: &[Segment],
    element: Option<u8>,
    bindings: &Bindings,
    lexicon: &Lexicon,
    out: &mut Vec<Chunk>,
) -> Result<(), RealizeError> {
    for seg in segs {
        match seg {
            Segment::Text(t) => out.push(Chunk::Text(t.clone())),
            Segment::Tag(tag) if tag.name == TagName::Art => out.push(Chunk::Art),
            Segment::Tag(tag) => {
                let key = tag.slot(element);
                let value = bindings.0.get(&key).ok_or(RealizeError::MissingBinding(key))?;
                let word = if tag.plural {
                    lexicon.plural_of(value).ok_or_else(|| RealizeError::MissingPlural(value.clone()))?.to_string()
                } else {
                    value.clone()
                };
                out.push(Chunk::Text(word));
            }
            Segment::Set(inner) => {
                let arity = bindings.group_arity();
                if arity == 0 {
                    return Err(RealizeError::EmptyGroup);
                }
                for i in 0..arity {
                    if i > 0 {
                        out.push(Chunk::Text(" and ".into()));
                    }
                    render(inner, Some(i), bindings, lexicon, out)?;
                }
            }
        }
    }
    Ok(())
}

fn article_for(next: &str) -> &'static str {
    match next.trim_start().chars().next() {
        Some(c) if "aeiouAEIOU".contains(c) => "an",
        _ => "a",
    }
}

/// Substitutes bindings into the pattern, choosing articles and plurals.
pub fn realize_text(template: &QuestionTemplate, bindings: &Bindings, lexicon: &Lexicon) -> Result<String, RealizeError> {
    let mut chunks = Vec::new();
    render(&template.pattern.segments, None, bindings, lexicon, &mut chunks)?;
    let mut text = String::new();
    for (i, c) in chunks.iter().enumerate() {
        match c {
            Chunk::Text(t) => text.push_str(t),
            Chunk::Art => {
                let rest: String = chunks[i + 1..]
                    .iter()
                    .map(|c| match c {
                        Chunk::Text(t) => t.as_str(),
                        Chunk::Art => "",
                    })
                    .collect();
                text.push_str(article_for(&rest));
            }
        }
    }
    let n = tokenize(&text).len();
    if n > MAX_QUESTION_TOKENS {
        return Err(RealizeError::TooLong(n));
    }
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::question::builtin::{builtin_templates, template_by_id};

    fn bind(pairs: &[(&str, &str)]) -> Bindings {
        let mut b = Bindings::default();
        for (k, v) in pairs {
            b.insert(k.parse().unwrap(), *v);
        }
        b
    }

    #[test]
    fn exist_substitution() {
        let lex = Lexicon::default();
        let t = template_by_id(16).unwrap();
        let q = realize_text(t, &bind(&[("attr", "large"), ("obj_type", "table")]), &lex).unwrap();
        assert_eq!(q, "Is there a large table?");
        let q = realize_text(t, &bind(&[("attr", "orange"), ("obj_type", "table")]), &lex).unwrap();
        assert_eq!(q, "Is there an orange table?");
    }

    #[test]
    fn plurals_and_groups() {
        let lex = Lexicon::default();
        let q = realize_text(
            template_by_id(9).unwrap(),
            &bind(&[("attr", "red"), ("obj_type", "chair"), ("room_type", "kitchen")]),
            &lex,
        )
        .unwrap();
        assert_eq!(q, "How many red chairs are in the kitchen?");
        let q = realize_text(
            template_by_id(20).unwrap(),
            &bind(&[("attr{0}", "orange"), ("obj_type{0}", "sofa"), ("attr{1}", "small"), ("obj_type{1}", "table")]),
            &lex,
        )
        .unwrap();
        assert_eq!(q, "Is there an orange sofa and a small table?");
        let q = realize_text(
            template_by_id(7).unwrap(),
            &bind(&[
                ("attr1", "red"),
                ("rel", "next to"),
                ("attr2", "large"),
                ("obj_type2", "bed"),
                ("obj_type1", "armchair"),
            ]),
            &lex,
        )
        .unwrap();
        assert_eq!(q, "Is the red thing next to the large bed an armchair?");
    }

    #[test]
    fn errors() {
        let lex = Lexicon::default();
        let t = template_by_id(10).unwrap();
        assert_eq!(
            realize_text(t, &bind(&[("obj_type", "spaceship"), ("attr", "red")]), &lex),
            Err(RealizeError::MissingPlural("spaceship".into()))
        );
        assert!(matches!(realize_text(t, &Bindings::default(), &lex), Err(RealizeError::MissingBinding(_))));
        assert_eq!(realize_text(template_by_id(21).unwrap(), &Bindings::default(), &lex), Err(RealizeError::EmptyGroup));
    }

    #[test]
    fn tokenizer_splits_punctuation() {
        assert_eq!(tokenize("Is there a large table?"), vec!["Is", "there", "a", "large", "table", "?"]);
        assert_eq!(tokenize("a, b"), vec!["a", ",", "b"]);
    }

    /// Longest possible realization: every slot filled by the longest lexicon
    /// word of its kind, groups at the maximum arity.
    #[test]
    fn longest_default_realization_fits() {
        let lex = Lexicon::default();
        let words = |v: &[String]| v.iter().map(|s| tokenize(s).len()).max().unwrap();
        let longest = |v: &[String]| v.iter().max_by_key(|s| (tokenize(s).len(), s.len())).unwrap().clone();
        let types: Vec<String> = lex.object_types.iter().map(|n| n.singular.clone()).collect();
        let plurals: Vec<String> = lex.object_types.iter().map(|n| n.plural.clone()).collect();
        let attrs: Vec<String> = lex.colors.iter().chain(&lex.extra_attrs).cloned().collect();
        let mut max = 0;
        for t in builtin_templates() {
            let arity = if t.has_set_group() { 3 } else { 0 };
            let mut b = Bindings::default();
            for k in t.slot_keys(arity) {
                let v = match k.name {
                    TagName::Attr => longest(&attrs),
                    TagName::ObjType => {
                        // plural and singular forms may differ in token count
                        if words(&plurals) > words(&types) { longest(&plurals) } else { longest(&types) }
                    }
                    TagName::RoomType => longest(&lex.room_types),
                    TagName::Color => longest(&lex.colors),
                    TagName::Rel => longest(&lex.relations),
                    TagName::Comp => "fewer".into(),
                    TagName::CompRel => "smaller".into(),
                    TagName::Art => unreachable!(),
                };
                b.insert(k, v);
            }
            let obj = lex.object_types.iter().max_by_key(|n| tokenize(&n.plural).len().max(tokenize(&n.singular).len()));
            for k in t.slot_keys(arity).into_iter().filter(|k| k.name == TagName::ObjType) {
                b.insert(k, obj.unwrap().singular.clone());
            }
            let q = realize_text(t, &b, &lex).unwrap();
            max = max.max(tokenize(&q).len());
        }
        assert!(max <= MAX_QUESTION_TOKENS, "{max}");
    }
}
