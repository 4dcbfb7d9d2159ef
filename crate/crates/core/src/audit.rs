//! Dataset statistics and answer-frequency baselines.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::{Dataset, QARecord, SplitName};
use crate::question::{builtin_templates, template_by_id, tokenize, Category};

/// Binary share of the published per-template counts.
pub fn reference_binary_fraction() -> f64 {
    let t = builtin_templates();
    let total: u32 = t.iter().map(|q| q.reference_count).sum();
    let binary: u32 = t.iter().filter(|q| q.category.is_binary()).map(|q| q.reference_count).sum();
    binary as f64 / total as f64
}

/// Binary share as stated in prose alongside the published counts.
pub const STATED_BINARY_FRACTION: f64 = 0.66;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AuditError {
    #[error("dataset has no questions")]
    Empty,
    #[error("{0} split has no questions")]
    EmptySplit(&'static str),
}

fn category_of(q: &QARecord) -> Category {
    template_by_id(q.template_id).map(|t| t.category).unwrap_or(q.category)
}

/// Fraction of records from yes/no categories.
pub fn binary_fraction(records: &[&QARecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    records.iter().filter(|q| category_of(q).is_binary()).count() as f64 / records.len() as f64
}

/// Most frequent answer; ties go to the lexicographically smallest.
fn majority<'a>(answers: impl Iterator<Item = &'a str>) -> Option<&'a str> {
    let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
    for a in answers {
        *freq.entry(a).or_default() += 1;
    }
    // BTreeMap iterates in answer order, so the first maximum wins ties.
    let mut best: Option<(&str, usize)> = None;
    for (a, n) in freq {
        if best.is_none_or(|(_, m)| n > m) {
            best = Some((a, n));
        }
    }
    best.map(|(a, _)| a)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub correct: usize,
    pub total: usize,
}

impl Accuracy {
    pub fn value(&self) -> f64 {
        if self.total == 0 { 0.0 } else { self.correct as f64 / self.total as f64 }
    }

    fn add(&mut self, ok: bool) {
        self.total += 1;
        self.correct += ok as usize;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub train_majority: String,
    pub global_majority: Accuracy,
    pub per_template_majority: Accuracy,
    /// Same two predictors scored on the training split itself.
    pub train_global_majority: Accuracy,
    pub train_per_template_majority: Accuracy,
    pub per_category: BTreeMap<Category, (Accuracy, Accuracy)>,
    /// Eval records whose template never occurs in train (scored with the global majority).
    pub fallbacks: usize,
}

/// Global and per-template majority-answer predictors fit on `train`, scored on `eval`.
pub fn majority_baseline(train: &[&QARecord], eval: &[&QARecord]) -> Result<BaselineReport, AuditError> {
    if train.is_empty() {
        return Err(AuditError::EmptySplit("train"));
    }
    if eval.is_empty() {
        return Err(AuditError::EmptySplit("eval"));
    }
    let global = majority(train.iter().map(|q| q.answer.as_str())).unwrap().to_string();
    let mut by_template: BTreeMap<u8, Vec<&str>> = BTreeMap::new();
    for q in train {
        by_template.entry(q.template_id).or_default().push(&q.answer);
    }
    let fit: BTreeMap<u8, String> =
        by_template.into_iter().map(|(t, a)| (t, majority(a.into_iter()).unwrap().to_string())).collect();

    let score = |records: &[&QARecord]| {
        let mut g = Accuracy::default();
        let mut p = Accuracy::default();
        let mut cats: BTreeMap<Category, (Accuracy, Accuracy)> = BTreeMap::new();
        let mut fallbacks = 0;
        for q in records {
            let per = match fit.get(&q.template_id) {
                Some(a) => a.as_str(),
                None => {
                    fallbacks += 1;
                    global.as_str()
                }
            };
            g.add(q.answer == global);
            p.add(q.answer == per);
            let c = cats.entry(category_of(q)).or_default();
            c.0.add(q.answer == global);
            c.1.add(q.answer == per);
        }
        (g, p, cats, fallbacks)
    };
    let (tg, tp, _, _) = score(train);
    let (g, p, per_category, fallbacks) = score(eval);
    Ok(BaselineReport {
        train_majority: global,
        global_majority: g,
        per_template_majority: p,
        train_global_majority: tg,
        train_per_template_majority: tp,
        per_category,
        fallbacks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub questions: usize,
    pub videos: usize,
    pub category_proportions: BTreeMap<Category, f64>,
    pub template_counts: BTreeMap<u8, usize>,
    /// Tokens per question, question count.
    pub question_lengths: BTreeMap<usize, usize>,
    /// Poses per video, video count.
    pub video_lengths: BTreeMap<usize, usize>,
    pub answer_frequencies: BTreeMap<String, usize>,
    pub binary_fraction: f64,
    pub reference_binary_fraction: f64,
    pub stated_binary_fraction: f64,
    /// Baselines fit on train and scored on each of the other splits.
    pub baselines: BTreeMap<SplitName, BaselineReport>,
}

impl AuditReport {
    pub fn max_question_length(&self) -> usize {
        self.question_lengths.keys().next_back().copied().unwrap_or(0)
    }

    pub fn max_video_length(&self) -> usize {
        self.video_lengths.keys().next_back().copied().unwrap_or(0)
    }
}

/// Distribution statistics over a set of records and video lengths.
pub fn dataset_stats(records: &[&QARecord], video_lengths: &[usize]) -> Result<AuditReport, AuditError> {
    if records.is_empty() {
        return Err(AuditError::Empty);
    }
    let n = records.len() as f64;
    let mut cats: BTreeMap<Category, usize> = BTreeMap::new();
    let mut template_counts: BTreeMap<u8, usize> = builtin_templates().iter().map(|t| (t.id, 0)).collect();
    let mut question_lengths = BTreeMap::new();
    let mut answer_frequencies = BTreeMap::new();
    for q in records {
        *cats.entry(category_of(q)).or_default() += 1;
        *template_counts.entry(q.template_id).or_default() += 1;
        *question_lengths.entry(tokenize(&q.question).len()).or_default() += 1;
        *answer_frequencies.entry(q.answer.clone()).or_default() += 1;
    }
    let mut vl = BTreeMap::new();
    for &l in video_lengths {
        *vl.entry(l).or_default() += 1;
    }
    Ok(AuditReport {
        questions: records.len(),
        videos: video_lengths.len(),
        category_proportions: cats.into_iter().map(|(c, k)| (c, k as f64 / n)).collect(),
        template_counts,
        question_lengths,
        video_lengths: vl,
        answer_frequencies,
        binary_fraction: binary_fraction(records),
        reference_binary_fraction: reference_binary_fraction(),
        stated_binary_fraction: STATED_BINARY_FRACTION,
        baselines: BTreeMap::new(),
    })
}

/// Full audit of a dataset: statistics over all records, baselines per eval split.
pub fn audit(d: &Dataset) -> Result<AuditReport, AuditError> {
    let records: Vec<&QARecord> = d.questions().collect();
    let lengths: Vec<usize> = d.houses.iter().flat_map(|h| h.videos.iter()).map(|v| v.trajectory.len()).collect();
    let mut report = dataset_stats(&records, &lengths)?;
    let train = d.split_questions(SplitName::Train);
    for split in [SplitName::Validation, SplitName::Test] {
        let eval = d.split_questions(split);
        if !train.is_empty() && !eval.is_empty() {
            report.baselines.insert(split, majority_baseline(&train, &eval)?);
        }
    }
    Ok(report)
}

/// Human-readable summary table.
pub fn render_table(r: &AuditReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "questions {}  videos {}", r.questions, r.videos);
    let _ = writeln!(s, "max question length {} tokens, max video length {} poses", r.max_question_length(), r.max_video_length());
    let _ = writeln!(
        s,
        "binary fraction {:.4}  (reference from published counts {:.4}, stated {:.2})",
        r.binary_fraction, r.reference_binary_fraction, r.stated_binary_fraction
    );
    let _ = writeln!(s, "\n{:<22} {:>9}", "category", "share");
    for (c, p) in &r.category_proportions {
        let _ = writeln!(s, "{:<22} {:>9.4}", c.as_str(), p);
    }
    let _ = writeln!(s, "\n{:<4} {:>7}", "tmpl", "count");
    for (t, n) in &r.template_counts {
        let _ = writeln!(s, "{t:<4} {n:>7}");
    }
    let mut answers: Vec<(&String, &usize)> = r.answer_frequencies.iter().collect();
    answers.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
    let _ = writeln!(s, "\n{:<16} {:>7}", "answer", "count");
    for (a, n) in answers.iter().take(15) {
        let _ = writeln!(s, "{a:<16} {n:>7}");
    }
    for (split, b) in &r.baselines {
        let _ = writeln!(s, "\nbaselines, train -> {} (train majority {:?})", split.as_str(), b.train_majority);
        let _ = writeln!(
            s,
            "  global majority       {:.4} ({}/{})",
            b.global_majority.value(),
            b.global_majority.correct,
            b.global_majority.total
        );
        let _ = writeln!(
            s,
            "  per-template majority {:.4} ({}/{}), {} fallbacks",
            b.per_template_majority.value(),
            b.per_template_majority.correct,
            b.per_template_majority.total,
            b.fallbacks
        );
        for (c, (g, p)) in &b.per_category {
            let _ = writeln!(s, "    {:<22} {:.4} {:.4}", c.as_str(), g.value(), p.value());
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::question::Bindings;

    fn rec(template: u8, answer: &str) -> QARecord {
        QARecord {
            question_id: format!("q{template}-{answer}"),
            house_id: "h".into(),
            video_id: "v".into(),
            template_id: template,
            category: template_by_id(template).unwrap().category,
            question: "Is there a large table?".into(),
            bindings: Bindings::default(),
            answer: answer.into(),
            seed: 0,
        }
    }

    #[test]
    fn single_record_has_full_share() {
        let r = rec(16, "yes");
        let a = dataset_stats(&[&r], &[10]).unwrap();
        assert_eq!(a.category_proportions, BTreeMap::from([(Category::Exist, 1.0)]));
        assert_eq!(a.binary_fraction, 1.0);
        assert_eq!(dataset_stats(&[], &[]), Err(AuditError::Empty));
    }

    #[test]
    fn reference_fraction_from_counts() {
        let expected = (26469.0 + 8158.0 + 6420.0 + 23216.0) / 101332.0;
        assert!((reference_binary_fraction() - expected).abs() < 1e-12);
    }

    #[test]
    fn majority_ties_break_lexicographically() {
        assert_eq!(majority(["yes", "no"].into_iter()), Some("no"));
        assert_eq!(majority(["3", "yes", "yes", "3", "2"].into_iter()), Some("3"));
    }

    #[test]
    fn baselines() {
        let train = [rec(16, "yes"), rec(16, "yes"), rec(23, "red"), rec(23, "red"), rec(23, "red")];
        let eval = [rec(16, "yes"), rec(23, "red"), rec(10, "2")];
        let t: Vec<&QARecord> = train.iter().collect();
        let e: Vec<&QARecord> = eval.iter().collect();
        let b = majority_baseline(&t, &e).unwrap();
        assert_eq!(b.train_majority, "red");
        assert_eq!(b.global_majority, Accuracy { correct: 1, total: 3 });
        assert_eq!(b.per_template_majority, Accuracy { correct: 2, total: 3 });
        assert_eq!(b.fallbacks, 1);
        assert!(b.train_per_template_majority.value() >= b.train_global_majority.value());

        let all_red = [rec(23, "red"), rec(23, "red")];
        let e: Vec<&QARecord> = all_red.iter().collect();
        assert_eq!(majority_baseline(&t, &e).unwrap().global_majority.value(), 1.0);
        assert_eq!(majority_baseline(&[], &e), Err(AuditError::EmptySplit("train")));
    }
}
