//! Converter from the SemEval-2016 Task 3 XML layout to canonical threads.
//!
//! Threads are read from every `<Thread>` element regardless of nesting
//! (subtask A files list them at top level, subtask B/C files nest them in
//! `<OrgQuestion>`). Recognised markup:
//!
//! ```text
//! <Thread THREAD_SEQUENCE="Q1_R1">
//!   <RelQuestion RELQ_ID RELQ_CATEGORY RELQ_DATE RELQ_USERID ...>
//!     <RelQSubject/> <RelQBody/>
//!   </RelQuestion>
//!   <RelComment RELC_ID RELC_DATE RELC_USERID RELC_RELEVANCE2RELQ RELC_FACT_LABEL?>
//!     <RelCText/>
//!   </RelComment>
//! </Thread>
//! ```
//!
//! Dates are forum-local wall-clock times and are converted to UTC with the
//! supplied offset.

use std::collections::HashSet;

use chrono::{DateTime, FixedOffset, NaiveDateTime, TimeZone, Utc};

use crate::corpus::{Answer, FactLabel, Goodness, Question, Thread};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub name: String,
    pub attributes: Vec<(String, String)>,
    pub children: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Element(Element),
    Text(String),
}

impl Element {
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attributes
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn child_elements(&self) -> impl Iterator<Item = &Element> {
        self.children.iter().filter_map(|n| match n {
            Node::Element(e) => Some(e),
            Node::Text(_) => None,
        })
    }

    pub fn child(&self, name: &str) -> Option<&Element> {
        self.child_elements().find(|e| e.name == name)
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        for node in &self.children {
            match node {
                Node::Text(t) => out.push_str(t),
                Node::Element(e) => out.push_str(&e.text()),
            }
        }
        out
    }

    fn collect<'a>(&'a self, name: &str, out: &mut Vec<&'a Element>) {
        for child in self.child_elements() {
            if child.name == name {
                out.push(child);
            } else {
                child.collect(name, out);
            }
        }
    }
}

/// Minimal XML reader: elements, attributes, text, CDATA, comments,
/// processing instructions, DOCTYPE (skipped) and the predefined and
/// numeric character entities. No namespaces, no DTD expansion.
pub fn parse_xml(input: &str) -> Result<Element> {
    let mut parser = XmlParser { src: input, pos: 0 };
    let mut root = Element {
        name: String::new(),
        attributes: Vec::new(),
        children: Vec::new(),
    };
    let mut stack: Vec<Element> = Vec::new();
    loop {
        if parser.pos >= input.len() {
            break;
        }
        if parser.rest().starts_with("<?") {
            parser.skip_past("?>")?;
        } else if parser.rest().starts_with("<!--") {
            parser.skip_past("-->")?;
        } else if parser.rest().starts_with("<![CDATA[") {
            parser.pos += "<![CDATA[".len();
            let start = parser.pos;
            parser.skip_past("]]>")?;
            let text = &input[start..parser.pos - 3];
            push_node(&mut stack, &mut root, Node::Text(text.to_string()));
        } else if parser.rest().starts_with("<!") {
            parser.skip_past(">")?;
        } else if parser.rest().starts_with("</") {
            parser.pos += 2;
            let name = parser.read_name()?;
            parser.skip_ws();
            parser.expect(">")?;
            let elem = stack.pop().ok_or_else(|| parser.err("unexpected closing tag"))?;
            if elem.name != name {
                return Err(parser.err(&format!(
                    "closing tag </{name}> does not match <{}>",
                    elem.name
                )));
            }
            push_node(&mut stack, &mut root, Node::Element(elem));
        } else if parser.rest().starts_with('<') {
            parser.pos += 1;
            let name = parser.read_name()?;
            let mut attributes = Vec::new();
            loop {
                parser.skip_ws();
                if parser.rest().starts_with("/>") {
                    parser.pos += 2;
                    push_node(
                        &mut stack,
                        &mut root,
                        Node::Element(Element {
                            name,
                            attributes,
                            children: Vec::new(),
                        }),
                    );
                    break;
                }
                if parser.rest().starts_with('>') {
                    parser.pos += 1;
                    stack.push(Element {
                        name,
                        attributes,
                        children: Vec::new(),
                    });
                    break;
                }
                let key = parser.read_name()?;
                parser.skip_ws();
                parser.expect("=")?;
                parser.skip_ws();
                let quote = parser
                    .rest()
                    .chars()
                    .next()
                    .filter(|c| *c == '"' || *c == '\'')
                    .ok_or_else(|| parser.err("expected quoted attribute value"))?;
                parser.pos += 1;
                let end = parser.rest().find(quote).ok_or_else(|| parser.err("unterminated attribute"))?;
                let raw = &input[parser.pos..parser.pos + end];
                parser.pos += end + 1;
                attributes.push((key, decode_entities(raw)));
            }
        } else {
            let end = parser.rest().find('<').unwrap_or(parser.rest().len());
            let raw = &input[parser.pos..parser.pos + end];
            parser.pos += end;
            if !stack.is_empty() {
                push_node(&mut stack, &mut root, Node::Text(decode_entities(raw)));
            }
        }
    }
    if let Some(open) = stack.last() {
        return Err(parser.err(&format!("unclosed element <{}>", open.name)));
    }
    Ok(root)
}

fn push_node(stack: &mut [Element], root: &mut Element, node: Node) {
    match stack.last_mut() {
        Some(parent) => parent.children.push(node),
        None => root.children.push(node),
    }
}

struct XmlParser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> XmlParser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn err(&self, message: &str) -> Error {
        Error::Xml {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_past(&mut self, marker: &str) -> Result<()> {
        match self.rest().find(marker) {
            Some(i) => {
                self.pos += i + marker.len();
                Ok(())
            }
            None => Err(self.err(&format!("missing `{marker}`"))),
        }
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.rest().starts_with(s) {
            self.pos += s.len();
            Ok(())
        } else {
            Err(self.err(&format!("expected `{s}`")))
        }
    }

    fn read_name(&mut self) -> Result<String> {
        let len = self
            .rest()
            .find(|c: char| !(c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':')))
            .unwrap_or(self.rest().len());
        if len == 0 {
            return Err(self.err("expected a name"));
        }
        let name = self.rest()[..len].to_string();
        self.pos += len;
        Ok(name)
    }
}

pub fn decode_entities(raw: &str) -> String {
    if !raw.contains('&') {
        return raw.to_string();
    }
    let mut out = String::with_capacity(raw.len());
    let mut rest = raw;
    while let Some(i) = rest.find('&') {
        out.push_str(&rest[..i]);
        rest = &rest[i..];
        let decoded = rest.find(';').filter(|&j| j <= 10).and_then(|j| {
            let entity = &rest[1..j];
            let ch = match entity {
                "amp" => Some('&'),
                "lt" => Some('<'),
                "gt" => Some('>'),
                "quot" => Some('"'),
                "apos" => Some('\''),
                _ if entity.starts_with("#x") || entity.starts_with("#X") => {
                    u32::from_str_radix(&entity[2..], 16).ok().and_then(char::from_u32)
                }
                _ if entity.starts_with('#') => entity[1..].parse().ok().and_then(char::from_u32),
                _ => None,
            };
            ch.map(|c| (c, j))
        });
        match decoded {
            Some((c, j)) => {
                out.push(c);
                rest = &rest[j + 1..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

pub fn parse_goodness(raw: &str) -> Option<Goodness> {
    match normalize_label(raw).as_str() {
        "good" => Some(Goodness::Good),
        "bad" => Some(Goodness::Bad),
        "potentiallyuseful" => Some(Goodness::PotentiallyUseful),
        _ => None,
    }
}

/// Accepts the published label names ("Factual - True", "NonFactual", ...)
/// and the enum spellings. Empty and not-applicable markers map to `None`.
pub fn parse_fact_label(raw: &str) -> std::result::Result<Option<FactLabel>, String> {
    let key = normalize_label(raw);
    let label = match key.as_str() {
        "" | "na" | "notapplicable" | "none" | "null" => return Ok(None),
        "factualtrue" | "facttrue" | "true" => FactLabel::FactTrue,
        "factualfalse" | "factfalse" | "false" => FactLabel::FactFalse,
        "factualpartiallytrue" | "partiallytrue" => FactLabel::PartiallyTrue,
        "factualconditionallytrue" | "conditionallytrue" => FactLabel::ConditionallyTrue,
        "factualresponderunsure" | "responderunsure" => FactLabel::ResponderUnsure,
        "nonfactual" | "notfactual" => FactLabel::NonFactual,
        _ => return Err(format!("unrecognised fact label `{raw}`")),
    };
    Ok(Some(label))
}

fn normalize_label(raw: &str) -> String {
    raw.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

pub fn parse_forum_date(raw: &str, offset: FixedOffset) -> std::result::Result<DateTime<Utc>, String> {
    let raw = raw.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Ok(dt.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(raw, fmt) {
            return offset
                .from_local_datetime(&naive)
                .single()
                .map(|dt| dt.with_timezone(&Utc))
                .ok_or_else(|| format!("ambiguous local time `{raw}`"));
        }
    }
    Err(format!("unparseable date `{raw}`"))
}

/// Converts a SemEval XML document into threads. A thread id seen twice is
/// kept once (the first occurrence).
pub fn convert_semeval(xml: &str, offset: FixedOffset) -> Result<Vec<Thread>> {
    let root = parse_xml(xml)?;
    let mut elems = Vec::new();
    root.collect("Thread", &mut elems);
    let mut seen = HashSet::new();
    let mut threads = Vec::new();
    for elem in elems {
        let thread = convert_thread(elem, offset).map_err(Error::Invalid)?;
        if seen.insert(thread.question.id.clone()) {
            threads.push(thread);
        } else {
            log::warn!("skipping repeated thread {}", thread.question.id);
        }
    }
    Ok(threads)
}

fn required<'a>(elem: &'a Element, attr: &str) -> std::result::Result<&'a str, String> {
    elem.attr(attr)
        .ok_or_else(|| format!("<{}> is missing attribute {attr}", elem.name))
}

fn convert_thread(elem: &Element, offset: FixedOffset) -> std::result::Result<Thread, String> {
    let q = elem
        .child("RelQuestion")
        .ok_or("<Thread> without <RelQuestion>")?;
    let qid = required(q, "RELQ_ID")?.to_string();
    let question = Question {
        id: qid.clone(),
        subject: q.child("RelQSubject").map(|e| e.text()).unwrap_or_default().trim().to_string(),
        body: q.child("RelQBody").map(|e| e.text()).unwrap_or_default().trim().to_string(),
        category: q.attr("RELQ_CATEGORY").unwrap_or_default().to_string(),
        timestamp: parse_forum_date(required(q, "RELQ_DATE")?, offset)
            .map_err(|e| format!("{qid}: {e}"))?,
        user_id: q.attr("RELQ_USERID").unwrap_or_default().to_string(),
    };
    let mut answers = Vec::new();
    for (i, c) in elem
        .child_elements()
        .filter(|e| e.name == "RelComment")
        .enumerate()
    {
        let cid = required(c, "RELC_ID")?.to_string();
        let goodness_raw = required(c, "RELC_RELEVANCE2RELQ")?;
        let goodness = parse_goodness(goodness_raw)
            .ok_or_else(|| format!("{cid}: unrecognised goodness `{goodness_raw}`"))?;
        let fact_label = match c.attr("RELC_FACT_LABEL") {
            Some(raw) => parse_fact_label(raw).map_err(|e| format!("{cid}: {e}"))?,
            None => None,
        };
        answers.push(Answer {
            id: cid.clone(),
            body: c
                .child("RelCText")
                .map(|e| e.text())
                .unwrap_or_default()
                .trim()
                .to_string(),
            timestamp: parse_forum_date(required(c, "RELC_DATE")?, offset)
                .map_err(|e| format!("{cid}: {e}"))?,
            user_id: c.attr("RELC_USERID").unwrap_or_default().to_string(),
            thread_position: (i + 1) as u32,
            goodness,
            fact_label,
        });
    }
    Ok(Thread { question, answers })
}
