//! User-profile features: what categories a user posts in, how good their
//! answers look to an auxiliary Good/Bad classifier, and when and how much
//! they post.
//!
//! Profiles aggregate every post of a user across the annotated dataset
//! and the optional forum dump (threads present in both are counted once).
//! Time features use forum-local time. Day buckets: working hours 07-15,
//! after work 15-21, night 21-04 and early morning 04-07 partition the day;
//! before noon (07-12) overlaps working hours.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::OnceLock;

use chrono::{DateTime, Datelike, FixedOffset, NaiveDate, Timelike, Utc, Weekday};
use serde::{Deserialize, Serialize};

use crate::corpus::{BinaryLabel, Goodness, Thread};
use crate::error::{Error, Result};
use crate::features::{FeatureGroup, FeatureVector};
use crate::model::{fit, probability, LinearModel, TrainConfig};

pub const FIRST_K: [u32; 5] = [1, 3, 5, 10, 20];

/// Ordered category names; names not in the list fall into the last slot.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryList {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl CategoryList {
    pub fn parse(text: &str) -> Result<Self> {
        let names: Vec<String> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect();
        Self::from_names(names)
    }

    pub fn from_names(names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::Config("category list is empty".into()));
        }
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.to_lowercase(), i).is_some() {
                return Err(Error::Config(format!("duplicate category `{n}`")));
            }
        }
        Ok(CategoryList { names, index })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// The 197 forum categories shipped with the crate.
    pub fn bundled() -> &'static CategoryList {
        static LIST: OnceLock<CategoryList> = OnceLock::new();
        LIST.get_or_init(|| {
            CategoryList::parse(include_str!("../data/categories.txt")).expect("bundled categories")
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> usize {
        self.index
            .get(&name.trim().to_lowercase())
            .copied()
            .unwrap_or(self.names.len() - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActivityConfig {
    pub offset: FixedOffset,
    pub weekend: Vec<Weekday>,
    pub jobs_category: String,
    pub classifieds_category: String,
}

impl Default for ActivityConfig {
    fn default() -> Self {
        ActivityConfig {
            offset: FixedOffset::east_opt(3 * 3600).expect("valid offset"),
            weekend: vec![Weekday::Fri, Weekday::Sat],
            jobs_category: "Jobs".into(),
            classifieds_category: "Classifieds".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub answer_id: String,
    pub question_id: String,
    pub timestamp: DateTime<Utc>,
    pub thread_position: u32,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct UserProfile {
    pub user_id: String,
    pub category_counts: Vec<u32>,
    pub questions_asked: u32,
    pub jobs_posts: u32,
    pub classifieds_posts: u32,
    pub first_post: Option<DateTime<Utc>>,
    pub active_days: BTreeSet<NaiveDate>,
    pub answers: Vec<AnswerRecord>,
}

impl UserProfile {
    fn empty(user_id: &str, n_categories: usize) -> Self {
        UserProfile {
            user_id: user_id.to_string(),
            category_counts: vec![0; n_categories],
            ..Default::default()
        }
    }

    pub fn n_answers(&self) -> usize {
        self.answers.len()
    }

    pub fn distinct_categories(&self) -> usize {
        self.category_counts.iter().filter(|c| **c > 0).count()
    }

    pub fn distinct_questions(&self) -> usize {
        self.answers
            .iter()
            .map(|a| a.question_id.as_str())
            .collect::<HashSet<_>>()
            .len()
    }

    fn note_post(&mut self, at: DateTime<Utc>, offset: &FixedOffset) {
        self.first_post = Some(self.first_post.map_or(at, |f| f.min(at)));
        self.active_days.insert(at.with_timezone(offset).date_naive());
    }
}

/// Profiles of every user seen in the given thread collections.
#[derive(Debug, Clone)]
pub struct ProfileIndex {
    profiles: HashMap<String, UserProfile>,
    n_categories: usize,
    /// Latest timestamp in the data; "now" for days-since-registration.
    pub reference_time: Option<DateTime<Utc>>,
    config: ActivityConfig,
}

impl ProfileIndex {
    pub fn build<'a>(
        sources: impl IntoIterator<Item = &'a [Thread]>,
        categories: &CategoryList,
        config: &ActivityConfig,
    ) -> Self {
        let n_categories = categories.len();
        let mut profiles: HashMap<String, UserProfile> = HashMap::new();
        let mut seen_q = HashSet::new();
        let mut seen_a = HashSet::new();
        let mut reference: Option<DateTime<Utc>> = None;
        let mut bump = |t: DateTime<Utc>| reference = Some(reference.map_or(t, |r| r.max(t)));
        let jobs = categories.index_of(&config.jobs_category);
        let classifieds = categories.index_of(&config.classifieds_category);
        for threads in sources {
            for thread in threads {
                let q = &thread.question;
                let cat = categories.index_of(&q.category);
                let is_jobs = q.category.eq_ignore_ascii_case(&config.jobs_category) && cat == jobs;
                let is_classifieds =
                    q.category.eq_ignore_ascii_case(&config.classifieds_category) && cat == classifieds;
                if seen_q.insert(q.id.clone()) {
                    bump(q.timestamp);
                    let p = profiles
                        .entry(q.user_id.clone())
                        .or_insert_with(|| UserProfile::empty(&q.user_id, n_categories));
                    p.questions_asked += 1;
                    p.jobs_posts += is_jobs as u32;
                    p.classifieds_posts += is_classifieds as u32;
                    p.note_post(q.timestamp, &config.offset);
                }
                for a in &thread.answers {
                    if !seen_a.insert(a.id.clone()) {
                        continue;
                    }
                    bump(a.timestamp);
                    let p = profiles
                        .entry(a.user_id.clone())
                        .or_insert_with(|| UserProfile::empty(&a.user_id, n_categories));
                    p.category_counts[cat] += 1;
                    p.jobs_posts += is_jobs as u32;
                    p.classifieds_posts += is_classifieds as u32;
                    p.note_post(a.timestamp, &config.offset);
                    p.answers.push(AnswerRecord {
                        answer_id: a.id.clone(),
                        question_id: q.id.clone(),
                        timestamp: a.timestamp,
                        thread_position: a.thread_position,
                    });
                }
            }
        }
        ProfileIndex {
            profiles,
            n_categories,
            reference_time: reference,
            config: config.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn get(&self, user_id: &str) -> Option<&UserProfile> {
        self.profiles.get(user_id)
    }

    /// The user's profile, or an empty one for an unknown user.
    pub fn profile(&self, user_id: &str) -> UserProfile {
        self.profiles
            .get(user_id)
            .cloned()
            .unwrap_or_else(|| UserProfile::empty(user_id, self.n_categories))
    }

    pub fn config(&self) -> &ActivityConfig {
        &self.config
    }
}

/// Raw counts, counts over N, N and the number of distinct categories.
pub fn extract_categories(profile: &UserProfile) -> FeatureVector {
    let g = FeatureGroup::UserCategories;
    let k = profile.category_counts.len();
    let n = profile.n_answers();
    let mut out = FeatureVector::with_capacity(2 * k + 2);
    for (i, c) in profile.category_counts.iter().enumerate() {
        out.push(g, format!("user_cat.count.{i:03}"), *c as f64);
    }
    for (i, c) in profile.category_counts.iter().enumerate() {
        let v = if n == 0 { 0.0 } else { *c as f64 / n as f64 };
        out.push(g, format!("user_cat.share.{i:03}"), v);
    }
    out.push(g, "user_cat.answers", n as f64);
    out.push(g, "user_cat.distinct", profile.distinct_categories() as f64);
    out
}

/// Probability of Good per answer id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QualityScores {
    pub p_good: BTreeMap<String, f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ScoreLine {
    answer_id: String,
    p_good: f64,
}

impl QualityScores {
    pub fn get(&self, answer_id: &str) -> Option<f64> {
        self.p_good.get(answer_id).copied()
    }

    pub fn predicted_good(&self, answer_id: &str) -> Option<bool> {
        self.get(answer_id).map(|p| p >= 0.5)
    }

    pub fn parse(reader: impl BufRead, source_name: &str) -> Result<Self> {
        let mut p_good = BTreeMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(source_name, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let perr = |message: String| Error::Parse {
                source_name: source_name.to_string(),
                line: i + 1,
                message,
            };
            let rec: ScoreLine = serde_json::from_str(&line).map_err(|e| perr(e.to_string()))?;
            if !(0.0..=1.0).contains(&rec.p_good) {
                return Err(perr(format!("p_good {} outside [0, 1]", rec.p_good)));
            }
            if p_good.insert(rec.answer_id.clone(), rec.p_good).is_some() {
                return Err(Error::DuplicateId {
                    kind: "answer",
                    id: rec.answer_id,
                });
            }
        }
        Ok(QualityScores { p_good })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(std::io::BufReader::new(file), &path.display().to_string())
    }

    pub fn write(&self, mut writer: impl Write) -> std::io::Result<()> {
        for (id, p) in &self.p_good {
            let line = serde_json::to_string(&ScoreLine {
                answer_id: id.clone(),
                p_good: *p,
            })?;
            writeln!(writer, "{line}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write(&mut buf).map_err(|e| Error::io(path, e))?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

/// Good vs. not-Good classifier; PotentiallyUseful counts as Bad.
pub fn train_goodness_model(
    examples: &[(FeatureVector, Goodness)],
    config: &TrainConfig,
) -> Result<LinearModel> {
    let Some((first, _)) = examples.first() else {
        return Err(Error::SingleClass);
    };
    let names = first.names().to_vec();
    let rows: Vec<Vec<f64>> = examples.iter().map(|(fv, _)| fv.values().to_vec()).collect();
    let labels: Vec<BinaryLabel> = examples
        .iter()
        .map(|(_, g)| {
            if *g == Goodness::Good {
                BinaryLabel::Positive
            } else {
                BinaryLabel::Negative
            }
        })
        .collect();
    fit(&rows, &labels, &names, config)
}

pub fn score_goodness<'a>(
    model: &LinearModel,
    answers: impl IntoIterator<Item = (&'a str, &'a FeatureVector)>,
) -> Result<QualityScores> {
    let mut p_good = BTreeMap::new();
    for (id, fv) in answers {
        let (_, margin) = model.predict_named(fv)?;
        p_good.insert(id.to_string(), probability(margin));
    }
    Ok(QualityScores { p_good })
}

pub const QUALITY_FEATURE_NAMES: [&str; 12] = [
    "user_quality.good",
    "user_quality.bad",
    "user_quality.total",
    "user_quality.good_share",
    "user_quality.bad_share",
    "user_quality.sum_p_good",
    "user_quality.sum_p_bad",
    "user_quality.sum_p_predicted",
    "user_quality.avg_p_good",
    "user_quality.avg_p_bad",
    "user_quality.max_p_good",
    "user_quality.max_p_bad",
];

/// Answers of the profile that have no score.
pub fn missing_scores(profile: &UserProfile, scores: &QualityScores) -> usize {
    profile
        .answers
        .iter()
        .filter(|a| scores.get(&a.answer_id).is_none())
        .count()
}

/// Aggregates over the user's scored answers; unscored answers are skipped.
pub fn extract_quality(profile: &UserProfile, scores: &QualityScores) -> FeatureVector {
    let ps: Vec<f64> = profile
        .answers
        .iter()
        .filter_map(|a| scores.get(&a.answer_id))
        .collect();
    let total = ps.len() as f64;
    let good = ps.iter().filter(|p| **p >= 0.5).count() as f64;
    let bad = total - good;
    let sum_good: f64 = ps.iter().sum();
    let sum_bad: f64 = ps.iter().map(|p| 1.0 - p).sum();
    let sum_pred: f64 = ps.iter().map(|p| p.max(1.0 - p)).sum();
    let share = |x: f64| if total > 0.0 { x / total } else { 0.0 };
    let max_good = ps.iter().copied().fold(0.0, f64::max);
    let max_bad = ps.iter().map(|p| 1.0 - p).fold(0.0, f64::max);
    let values = [
        good,
        bad,
        total,
        share(good),
        share(bad),
        sum_good,
        sum_bad,
        sum_pred,
        share(sum_good),
        share(sum_bad),
        max_good,
        max_bad,
    ];
    let mut out = FeatureVector::with_capacity(12);
    for (n, v) in QUALITY_FEATURE_NAMES.iter().zip(values) {
        out.push(FeatureGroup::UserQuality, *n, v);
    }
    out
}

pub const ACTIVITY_FEATURE_NAMES: [&str; 19] = [
    "user_act.answers",
    "user_act.questions_answered",
    "user_act.questions_asked",
    "user_act.jobs_posts",
    "user_act.classifieds_posts",
    "user_act.days_registered",
    "user_act.active_days",
    "user_act.working_hours",
    "user_act.after_work",
    "user_act.night",
    "user_act.early_morning",
    "user_act.before_noon",
    "user_act.weekday",
    "user_act.weekend",
    "user_act.first_1",
    "user_act.first_3",
    "user_act.first_5",
    "user_act.first_10",
    "user_act.first_20",
];

/// Index of the partition bucket (working, after work, night, early
/// morning) for a local hour.
pub fn day_bucket(hour: u32) -> usize {
    match hour {
        7..=14 => 0,
        15..=20 => 1,
        4..=6 => 3,
        _ => 2,
    }
}

pub fn extract_activity(
    profile: &UserProfile,
    config: &ActivityConfig,
    reference_time: Option<DateTime<Utc>>,
) -> FeatureVector {
    let mut v = [0.0f64; 19];
    v[0] = profile.n_answers() as f64;
    v[1] = profile.distinct_questions() as f64;
    v[2] = profile.questions_asked as f64;
    v[3] = profile.jobs_posts as f64;
    v[4] = profile.classifieds_posts as f64;
    if let (Some(first), Some(now)) = (profile.first_post, reference_time) {
        v[5] = ((now - first).num_seconds().max(0) / 86_400) as f64;
    }
    v[6] = profile.active_days.len() as f64;
    for a in &profile.answers {
        let local = a.timestamp.with_timezone(&config.offset);
        let hour = local.hour();
        v[7 + day_bucket(hour)] += 1.0;
        if (7..12).contains(&hour) {
            v[11] += 1.0;
        }
        if config.weekend.contains(&local.weekday()) {
            v[13] += 1.0;
        } else {
            v[12] += 1.0;
        }
        for (j, k) in FIRST_K.iter().enumerate() {
            if a.thread_position <= *k {
                v[14 + j] += 1.0;
            }
        }
    }
    let mut out = FeatureVector::with_capacity(19);
    for (n, x) in ACTIVITY_FEATURE_NAMES.iter().zip(v) {
        out.push(FeatureGroup::UserActivity, *n, x);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Answer, Question};
    use chrono::TimeZone;
    use proptest::prelude::*;

    fn at(y: i32, mo: u32, d: u32, h: u32) -> DateTime<Utc> {
        FixedOffset::east_opt(3 * 3600)
            .unwrap()
            .with_ymd_and_hms(y, mo, d, h, 0, 0)
            .unwrap()
            .with_timezone(&Utc)
    }

    fn thread(qid: &str, category: &str, asker: &str, answers: &[(&str, &str, DateTime<Utc>)]) -> Thread {
        Thread {
            question: Question {
                id: qid.into(),
                subject: "s".into(),
                body: "b".into(),
                category: category.into(),
                timestamp: at(2015, 1, 1, 9),
                user_id: asker.into(),
            },
            answers: answers
                .iter()
                .enumerate()
                .map(|(i, (id, user, ts))| Answer {
                    id: (*id).into(),
                    body: "x".into(),
                    timestamp: *ts,
                    user_id: (*user).into(),
                    thread_position: i as u32 + 1,
                    goodness: Goodness::Good,
                    fact_label: None,
                })
                .collect(),
        }
    }

    #[test]
    fn bundled_categories() {
        let c = CategoryList::bundled();
        assert_eq!(c.len(), 197);
        assert_eq!(c.index_of("visas and permits"), c.names().iter().position(|n| n == "Visas and Permits").unwrap());
        assert_eq!(c.index_of("no such category"), 196);
    }

    #[test]
    fn category_features() {
        let cats = CategoryList::bundled();
        let ts = at(2015, 1, 6, 8);
        let threads: Vec<Thread> = (0..4)
            .map(|i| thread(&format!("q{i}"), "Education", "asker", &[(&format!("a{i}"), "u", ts)]))
            .collect();
        let idx = ProfileIndex::build([threads.as_slice()], cats, &ActivityConfig::default());
        let v = extract_categories(&idx.profile("u"));
        assert_eq!(v.len(), 396);
        let e = cats.index_of("Education");
        assert_eq!(v.values()[e], 4.0);
        assert_eq!(v.values()[197 + e], 1.0);
        assert_eq!(v.get("user_cat.answers"), Some(4.0));
        assert_eq!(v.get("user_cat.distinct"), Some(1.0));
        let empty = extract_categories(&idx.profile("nobody"));
        assert!(empty.values().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn quality_features() {
        let mut p = UserProfile::empty("u", 3);
        p.answers.push(AnswerRecord {
            answer_id: "a1".into(),
            question_id: "q".into(),
            timestamp: at(2015, 1, 1, 1),
            thread_position: 1,
        });
        p.answers.push(AnswerRecord {
            answer_id: "a2".into(),
            question_id: "q".into(),
            timestamp: at(2015, 1, 1, 1),
            thread_position: 2,
        });
        let mut scores = QualityScores::default();
        assert!(extract_quality(&p, &scores).values().iter().all(|x| *x == 0.0));
        scores.p_good.insert("a1".into(), 0.8);
        let v = extract_quality(&p, &scores);
        assert_eq!(v.len(), 12);
        assert_eq!(v.get("user_quality.good"), Some(1.0));
        assert_eq!(v.get("user_quality.good_share"), Some(1.0));
        assert_eq!(v.get("user_quality.sum_p_good"), Some(0.8));
        assert_eq!(v.get("user_quality.max_p_good"), Some(0.8));
        assert_eq!(missing_scores(&p, &scores), 1);
    }

    #[test]
    fn activity_buckets() {
        // 2015-01-06 is a Tuesday.
        let threads = vec![thread("q", "Education", "asker", &[("a", "u", at(2015, 1, 6, 8))])];
        let cfg = ActivityConfig::default();
        let idx = ProfileIndex::build([threads.as_slice()], CategoryList::bundled(), &cfg);
        let v = extract_activity(&idx.profile("u"), &cfg, idx.reference_time);
        assert_eq!(v.len(), 19);
        assert_eq!(v.get("user_act.working_hours"), Some(1.0));
        assert_eq!(v.get("user_act.before_noon"), Some(1.0));
        assert_eq!(v.get("user_act.weekday"), Some(1.0));
        assert_eq!(v.get("user_act.weekend"), Some(0.0));
        for k in FIRST_K {
            assert_eq!(v.get(&format!("user_act.first_{k}")), Some(1.0));
        }
        let empty = extract_activity(&idx.profile("nobody"), &cfg, idx.reference_time);
        assert!(empty.values().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn duplicated_threads_count_once() {
        let t = vec![thread("q", "Jobs", "asker", &[("a", "u", at(2015, 1, 9, 22))])];
        let idx = ProfileIndex::build([t.as_slice(), t.as_slice()], CategoryList::bundled(), &ActivityConfig::default());
        let u = idx.profile("u");
        assert_eq!(u.n_answers(), 1);
        assert_eq!(u.jobs_posts, 1);
        assert_eq!(idx.profile("asker").questions_asked, 1);
        let v = extract_activity(&u, idx.config(), idx.reference_time);
        // Friday 22:00 local.
        assert_eq!(v.get("user_act.night"), Some(1.0));
        assert_eq!(v.get("user_act.weekend"), Some(1.0));
    }

    #[test]
    fn goodness_model_separable() {
        let mut examples = Vec::new();
        for i in 0..10 {
            let mut g = FeatureVector::new();
            g.push(FeatureGroup::Lexical, "x", 1.0 + i as f64);
            examples.push((g, Goodness::Good));
            let mut b = FeatureVector::new();
            b.push(FeatureGroup::Lexical, "x", -1.0 - i as f64);
            examples.push((b, if i % 2 == 0 { Goodness::Bad } else { Goodness::PotentiallyUseful }));
        }
        let model = train_goodness_model(&examples, &TrainConfig::default()).unwrap();
        let ids: Vec<String> = (0..examples.len()).map(|i| format!("a{i}")).collect();
        let scores = score_goodness(&model, ids.iter().map(String::as_str).zip(examples.iter().map(|(f, _)| f))).unwrap();
        for (i, (_, g)) in examples.iter().enumerate() {
            let p = scores.get(&ids[i]).unwrap();
            assert!((0.0..=1.0).contains(&p));
            assert_eq!(p >= 0.5, *g == Goodness::Good);
        }
        let only_good: Vec<_> = examples.iter().filter(|(_, g)| *g == Goodness::Good).cloned().collect();
        assert!(matches!(train_goodness_model(&only_good, &TrainConfig::default()), Err(Error::SingleClass)));
    }

    #[test]
    fn scores_file_round_trip() {
        let mut s = QualityScores::default();
        s.p_good.insert("a1".into(), 0.25);
        s.p_good.insert("a2".into(), 1.0);
        let mut buf = Vec::new();
        s.write(&mut buf).unwrap();
        assert_eq!(QualityScores::parse(buf.as_slice(), "mem").unwrap(), s);
        assert!(QualityScores::parse(r#"{"answer_id":"a","p_good":1.5}"#.as_bytes(), "mem").is_err());
    }

    proptest! {
        #[test]
        fn activity_partitions(hours in proptest::collection::vec((0u32..24, 1u32..30, 1u32..28), 0..25)) {
            let answers: Vec<(String, String, DateTime<Utc>)> = hours
                .iter()
                .enumerate()
                .map(|(i, (h, _, d))| (format!("a{i}"), "u".to_string(), at(2015, 2, *d, *h)))
                .collect();
            let mut threads = Vec::new();
            for (i, (id, user, ts)) in answers.iter().enumerate() {
                let pos = hours[i].1;
                let mut t = thread(&format!("q{i}"), "Cars", "asker", &[(id, user, *ts)]);
                t.answers[0].thread_position = pos;
                threads.push(t);
            }
            let cfg = ActivityConfig::default();
            let idx = ProfileIndex::build([threads.as_slice()], CategoryList::bundled(), &cfg);
            let v = extract_activity(&idx.profile("u"), &cfg, idx.reference_time);
            let get = |n: &str| v.get(n).unwrap();
            let partition = get("user_act.working_hours") + get("user_act.after_work") + get("user_act.night") + get("user_act.early_morning");
            prop_assert_eq!(partition, get("user_act.answers"));
            prop_assert_eq!(get("user_act.weekday") + get("user_act.weekend"), get("user_act.answers"));
            let ks: Vec<f64> = FIRST_K.iter().map(|k| get(&format!("user_act.first_{k}"))).collect();
            for w in ks.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
            prop_assert!(ks[4] <= get("user_act.answers"));
            let cats = extract_categories(&idx.profile("u"));
            if !answers.is_empty() {
                let share: f64 = cats.values()[197..394].iter().sum();
                prop_assert!((share - 1.0).abs() < 1e-9);
            }
        }
    }
}
