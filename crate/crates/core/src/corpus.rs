//! Forum data model and the canonical Thread JSON Lines format.
//!
//! One thread per line:
//!
//! ```text
//! {"question": {"id", "subject", "body", "category", "timestamp", "user_id"},
//!  "answers": [{"id", "body", "timestamp", "user_id", "thread_position",
//!               "goodness", "fact_label"}]}
//! ```
//!
//! Timestamps are RFC 3339 and stored in UTC. Answers without a fact label
//! (and non-Good answers) stay in their thread: thread-level features need
//! the full set of Good answers, but only fact-labelled answers become
//! train/test instances.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Goodness {
    Good,
    Bad,
    PotentiallyUseful,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FactLabel {
    FactTrue,
    FactFalse,
    PartiallyTrue,
    ConditionallyTrue,
    ResponderUnsure,
    NonFactual,
}

impl FactLabel {
    pub const ALL: [FactLabel; 6] = [
        FactLabel::FactTrue,
        FactLabel::FactFalse,
        FactLabel::PartiallyTrue,
        FactLabel::ConditionallyTrue,
        FactLabel::ResponderUnsure,
        FactLabel::NonFactual,
    ];

    /// `FactTrue` is the positive class; every other label is negative.
    pub fn binary(self) -> BinaryLabel {
        match self {
            FactLabel::FactTrue => BinaryLabel::Positive,
            _ => BinaryLabel::Negative,
        }
    }
}

impl fmt::Display for FactLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            FactLabel::FactTrue => "Factual - True",
            FactLabel::FactFalse => "Factual - False",
            FactLabel::PartiallyTrue => "Factual - Partially True",
            FactLabel::ConditionallyTrue => "Factual - Conditionally True",
            FactLabel::ResponderUnsure => "Factual - Responder Unsure",
            FactLabel::NonFactual => "NonFactual",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BinaryLabel {
    Positive,
    Negative,
}

impl BinaryLabel {
    pub fn is_positive(self) -> bool {
        self == BinaryLabel::Positive
    }

    /// +1 / -1 encoding used by the SVM.
    pub fn sign(self) -> f64 {
        match self {
            BinaryLabel::Positive => 1.0,
            BinaryLabel::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Question {
    pub id: String,
    pub subject: String,
    pub body: String,
    pub category: String,
    pub timestamp: DateTime<Utc>,
    pub user_id: String,
}

impl Question {
    /// Subject followed by body, the text every content feature sees.
    pub fn full_text(&self) -> String {
        join_nonempty(&self.subject, &self.body)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Answer {
    pub id: String,
    pub body: String,
    pub timestamp: DateTime<Utc>,
    pub user_id: String,
    pub thread_position: u32,
    pub goodness: Goodness,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fact_label: Option<FactLabel>,
}

impl Answer {
    pub fn binary_label(&self) -> Option<BinaryLabel> {
        self.fact_label.map(FactLabel::binary)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thread {
    pub question: Question,
    pub answers: Vec<Answer>,
}

impl Thread {
    pub fn labeled_answers(&self) -> impl Iterator<Item = (usize, &Answer)> {
        self.answers
            .iter()
            .enumerate()
            .filter(|(_, a)| a.fact_label.is_some())
    }

    /// Checks per-thread invariants and sorts answers by position.
    fn normalize(&mut self) -> std::result::Result<(), String> {
        if self.question.id.trim().is_empty() {
            return Err("question id is empty".into());
        }
        self.answers.sort_by_key(|a| a.thread_position);
        for (i, answer) in self.answers.iter().enumerate() {
            if answer.id.trim().is_empty() {
                return Err(format!("answer #{} has an empty id", i + 1));
            }
            if answer.thread_position as usize != i + 1 {
                return Err(format!(
                    "thread_position values must be unique and contiguous from 1; answer `{}` has position {} where {} was expected",
                    answer.id,
                    answer.thread_position,
                    i + 1
                ));
            }
            if answer.fact_label.is_some() && answer.goodness != Goodness::Good {
                return Err(format!(
                    "answer `{}` carries a fact label but its goodness is {:?}; only Good answers are fact-annotated",
                    answer.id, answer.goodness
                ));
            }
        }
        Ok(())
    }
}

pub fn join_nonempty(first: &str, second: &str) -> String {
    match (first.trim().is_empty(), second.trim().is_empty()) {
        (true, _) => second.to_string(),
        (false, true) => first.to_string(),
        (false, false) => format!("{first}\n{second}"),
    }
}

/// A fact-labelled answer: one train/test instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceRef {
    pub thread: usize,
    pub answer: usize,
    pub label: BinaryLabel,
}

/// Every fact-labelled answer in dataset order.
pub fn labeled_instances(threads: &[Thread]) -> Vec<InstanceRef> {
    threads
        .iter()
        .enumerate()
        .flat_map(|(ti, thread)| {
            thread.labeled_answers().map(move |(ai, answer)| InstanceRef {
                thread: ti,
                answer: ai,
                label: answer.binary_label().expect("labeled"),
            })
        })
        .collect()
}

pub fn load_dataset(path: &Path) -> Result<Vec<Thread>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(BufReader::new(file), &path.display().to_string())
}

/// Parses Thread JSON Lines. Blank lines are skipped; errors name the line.
pub fn parse_dataset(reader: impl BufRead, source_name: &str) -> Result<Vec<Thread>> {
    let mut threads = Vec::new();
    let mut question_ids = HashSet::new();
    let mut answer_ids = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            source_name: source_name.to_string(),
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            source_name: source_name.to_string(),
            line: line_no,
            message,
        };
        let mut thread: Thread =
            serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        thread.normalize().map_err(parse_err)?;
        if !question_ids.insert(thread.question.id.clone()) {
            return Err(Error::DuplicateId {
                kind: "question",
                id: thread.question.id.clone(),
            });
        }
        for answer in &thread.answers {
            if !answer_ids.insert(answer.id.clone()) {
                return Err(Error::DuplicateId {
                    kind: "answer",
                    id: answer.id.clone(),
                });
            }
        }
        threads.push(thread);
    }
    Ok(threads)
}

pub fn write_dataset(threads: &[Thread], mut writer: impl Write) -> std::io::Result<()> {
    for thread in threads {
        serde_json::to_writer(&mut writer, thread)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn save_dataset(threads: &[Thread], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_dataset(threads, &mut buf).map_err(|e| Error::io(path, e))?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Checks an in-memory dataset against the same invariants the loader enforces.
pub fn validate_threads(threads: &mut [Thread]) -> Result<()> {
    let mut question_ids = HashSet::new();
    let mut answer_ids = HashSet::new();
    for thread in threads.iter_mut() {
        thread.normalize().map_err(Error::Invalid)?;
        if !question_ids.insert(thread.question.id.clone()) {
            return Err(Error::DuplicateId {
                kind: "question",
                id: thread.question.id.clone(),
            });
        }
        for answer in &thread.answers {
            if !answer_ids.insert(answer.id.clone()) {
                return Err(Error::DuplicateId {
                    kind: "answer",
                    id: answer.id.clone(),
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub n_questions: usize,
    pub n_annotated_answers: usize,
    pub n_positive: usize,
    pub n_negative: usize,
    pub per_label: BTreeMap<FactLabel, usize>,
}

pub fn validate_stats(threads: &[Thread]) -> DatasetStats {
    let mut per_label: BTreeMap<FactLabel, usize> =
        FactLabel::ALL.iter().map(|l| (*l, 0)).collect();
    let mut n_positive = 0;
    let mut n_negative = 0;
    for thread in threads {
        for (_, answer) in thread.labeled_answers() {
            let label = answer.fact_label.expect("labeled");
            *per_label.entry(label).or_default() += 1;
            match label.binary() {
                BinaryLabel::Positive => n_positive += 1,
                BinaryLabel::Negative => n_negative += 1,
            }
        }
    }
    DatasetStats {
        n_questions: threads.len(),
        n_annotated_answers: n_positive + n_negative,
        n_positive,
        n_negative,
        per_label,
    }
}

/// One quantity that differs from the published label distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatMismatch {
    pub quantity: String,
    pub expected: usize,
    pub actual: usize,
}

impl fmt::Display for StatMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: expected {}, found {}",
            self.quantity, self.expected, self.actual
        )
    }
}

/// Label distribution of the released CQA-QL-2016-fact dataset.
pub const PUBLISHED_STATS: PublishedStats = PublishedStats {
    n_questions: 71,
    n_annotated_answers: 249,
    n_positive: 128,
    n_negative: 121,
    per_label: [
        (FactLabel::FactTrue, 128),
        (FactLabel::FactFalse, 22),
        (FactLabel::PartiallyTrue, 38),
        (FactLabel::ConditionallyTrue, 16),
        (FactLabel::ResponderUnsure, 26),
        (FactLabel::NonFactual, 19),
    ],
};

pub struct PublishedStats {
    pub n_questions: usize,
    pub n_annotated_answers: usize,
    pub n_positive: usize,
    pub n_negative: usize,
    pub per_label: [(FactLabel, usize); 6],
}

impl DatasetStats {
    pub fn compare_with_published(&self) -> Vec<StatMismatch> {
        let p = &PUBLISHED_STATS;
        let mut out = Vec::new();
        let mut check = |quantity: String, expected: usize, actual: usize| {
            if expected != actual {
                out.push(StatMismatch {
                    quantity,
                    expected,
                    actual,
                });
            }
        };
        check("questions".into(), p.n_questions, self.n_questions);
        check(
            "annotated answers".into(),
            p.n_annotated_answers,
            self.n_annotated_answers,
        );
        check("positive".into(), p.n_positive, self.n_positive);
        check("negative".into(), p.n_negative, self.n_negative);
        for (label, expected) in p.per_label {
            let actual = self.per_label.get(&label).copied().unwrap_or(0);
            check(label.to_string(), expected, actual);
        }
        out
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("questions           {}\n", self.n_questions));
        s.push_str(&format!("annotated answers   {}\n", self.n_annotated_answers));
        s.push_str(&format!("  + Positive        {}\n", self.n_positive));
        s.push_str(&format!("  - Negative        {}\n", self.n_negative));
        for (label, count) in &self.per_label {
            s.push_str(&format!("  {:<32}{}\n", label.to_string(), count));
        }
        s
    }
}
