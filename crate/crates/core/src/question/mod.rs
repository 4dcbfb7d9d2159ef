//! Question templates, their functional programs, and text realization.

pub mod builtin;
pub mod program;
pub mod realize;
pub mod template;

pub use builtin::{builtin_templates, template_by_id, Category, QuestionTemplate, TemplateRecord};
pub use program::{execute, AnswerKind, Bindings, ExecContext, ExecError, InvalidReason, Outcome, Program};
pub use realize::{realize_text, tokenize, RealizeError, MAX_QUESTION_TOKENS};
pub use template::{parse_template, ParseError, SlotKey, Tag, TagName, TemplatePattern};
