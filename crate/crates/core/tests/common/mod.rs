#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use collabnet::model::{Dataset, Format, InteractionRecord, ProjectSpec, Subtask, TeamRoster};

pub fn study_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/study")
}

pub fn study_dataset() -> Dataset {
    Dataset::load(study_dir(), Format::Csv).expect("bundled fixture loads")
}

/// A project with the given (type, points) subtasks, ids `X01`, `X02`, ...
pub fn project(id: &str, subtasks: &[(&str, u32)]) -> ProjectSpec {
    let subtasks = subtasks
        .iter()
        .enumerate()
        .map(|(i, (t, p))| Subtask {
            project_id: id.into(),
            subtask_id: format!("X{:02}", i + 1),
            task_type: (*t).into(),
            points: *p,
        })
        .collect();
    ProjectSpec::new(id, subtasks).unwrap()
}

pub fn roster(project_id: &str, team_id: &str, members: &[&str], leader: Option<&str>) -> TeamRoster {
    TeamRoster {
        team_id: team_id.into(),
        project_id: project_id.into(),
        members: members.iter().map(|s| s.to_string()).collect(),
        leader: leader.map(str::to_string),
    }
}

pub fn event(roster: &TeamRoster, student: &str, subtask: &str) -> InteractionRecord {
    InteractionRecord {
        project_id: roster.project_id.clone(),
        team_id: roster.team_id.clone(),
        student_id: student.into(),
        subtask_id: subtask.into(),
        timestamp: None,
    }
}

// ---------------------------------------------------------------------------
// Minimal DOT reader: undirected graphs with node, edge, attribute and
// subgraph statements, enough to check what the exporter emits.

#[derive(Debug, Default)]
pub struct DotSubgraph {
    pub name: String,
    pub attrs: BTreeMap<String, String>,
    pub nodes: Vec<String>,
}

#[derive(Debug, Default)]
pub struct DotGraph {
    pub name: String,
    pub graph_attrs: BTreeMap<String, String>,
    pub nodes: BTreeMap<String, BTreeMap<String, String>>,
    pub edges: Vec<(String, String)>,
    pub subgraphs: Vec<DotSubgraph>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Id(String),
    Punct(char),
    EdgeOp,
}

fn dot_tokens(text: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if "{}[];,=".contains(c) {
            out.push(Tok::Punct(c));
            i += 1;
        } else if c == '-' && chars.get(i + 1) == Some(&'-') {
            out.push(Tok::EdgeOp);
            i += 2;
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            return Err("directed edge in an undirected graph".into());
        } else if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err("unterminated string".into()),
                    Some('"') => break,
                    Some('\\') => {
                        match chars.get(i + 1) {
                            Some('n') => s.push('\n'),
                            Some(&e) => s.push(e),
                            None => return Err("dangling escape".into()),
                        }
                        i += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            i += 1;
            out.push(Tok::Id(s));
        } else if c.is_alphanumeric() || c == '_' || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                i += 1;
            }
            out.push(Tok::Id(chars[start..i].iter().collect()));
        } else {
            return Err(format!("unexpected character {c:?}"));
        }
    }
    Ok(out)
}

struct DotParser {
    toks: Vec<Tok>,
    pos: usize,
}

impl DotParser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Result<Tok, String> {
        let t = self.toks.get(self.pos).cloned().ok_or("unexpected end of input")?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, c: char) -> Result<(), String> {
        match self.next()? {
            Tok::Punct(p) if p == c => Ok(()),
            other => Err(format!("expected {c:?}, found {other:?}")),
        }
    }

    fn id(&mut self) -> Result<String, String> {
        match self.next()? {
            Tok::Id(s) => Ok(s),
            other => Err(format!("expected identifier, found {other:?}")),
        }
    }

    fn attr_list(&mut self) -> Result<BTreeMap<String, String>, String> {
        let mut attrs = BTreeMap::new();
        self.expect('[')?;
        loop {
            match self.peek() {
                Some(Tok::Punct(']')) => {
                    self.pos += 1;
                    return Ok(attrs);
                }
                Some(Tok::Punct(',')) | Some(Tok::Punct(';')) => self.pos += 1,
                _ => {
                    let key = self.id()?;
                    self.expect('=')?;
                    let value = self.id()?;
                    if attrs.insert(key.clone(), value).is_some() {
                        return Err(format!("attribute {key} repeated"));
                    }
                }
            }
        }
    }

    fn stmts(&mut self, graph: &mut DotGraph, mut sub: Option<&mut DotSubgraph>) -> Result<(), String> {
        loop {
            match self.peek() {
                Some(Tok::Punct('}')) => {
                    self.pos += 1;
                    return Ok(());
                }
                Some(Tok::Punct(';')) => self.pos += 1,
                None => return Err("missing closing brace".into()),
                _ => {
                    let head = self.id()?;
                    match head.as_str() {
                        "graph" | "node" | "edge" => {
                            let attrs = self.attr_list()?;
                            if head == "graph" {
                                graph.graph_attrs.extend(attrs);
                            }
                        }
                        "subgraph" => {
                            if sub.is_some() {
                                return Err("nested subgraph".into());
                            }
                            let mut s = DotSubgraph {
                                name: self.id()?,
                                ..Default::default()
                            };
                            self.expect('{')?;
                            self.stmts(graph, Some(&mut s))?;
                            graph.subgraphs.push(s);
                        }
                        _ => match self.peek() {
                            Some(Tok::Punct('=')) => {
                                self.pos += 1;
                                let value = self.id()?;
                                match sub.as_deref_mut() {
                                    Some(s) => s.attrs.insert(head, value),
                                    None => graph.graph_attrs.insert(head, value),
                                };
                            }
                            Some(Tok::EdgeOp) => {
                                let mut from = head;
                                while let Some(Tok::EdgeOp) = self.peek() {
                                    self.pos += 1;
                                    let to = self.id()?;
                                    graph.edges.push((from, to.clone()));
                                    from = to;
                                }
                                if let Some(Tok::Punct('[')) = self.peek() {
                                    self.attr_list()?;
                                }
                            }
                            _ => {
                                let attrs = if let Some(Tok::Punct('[')) = self.peek() {
                                    self.attr_list()?
                                } else {
                                    BTreeMap::new()
                                };
                                if graph.nodes.insert(head.clone(), attrs).is_some() {
                                    return Err(format!("node {head} declared twice"));
                                }
                                if let Some(s) = sub.as_deref_mut() {
                                    s.nodes.push(head);
                                }
                            }
                        },
                    }
                }
            }
        }
    }
}

pub fn parse_dot(text: &str) -> Result<DotGraph, String> {
    let mut p = DotParser {
        toks: dot_tokens(text)?,
        pos: 0,
    };
    let kind = p.id()?;
    if kind != "graph" {
        return Err(format!("expected `graph`, found `{kind}`"));
    }
    let mut graph = DotGraph {
        name: p.id()?,
        ..Default::default()
    };
    p.expect('{')?;
    p.stmts(&mut graph, None)?;
    if p.pos != p.toks.len() {
        return Err("trailing tokens after the graph".into());
    }
    let declared: BTreeSet<&String> = graph.nodes.keys().collect();
    for (a, b) in &graph.edges {
        if !declared.contains(a) || !declared.contains(b) {
            return Err(format!("edge {a} -- {b} uses an undeclared node"));
        }
    }
    Ok(graph)
}

// ---------------------------------------------------------------------------
// Minimal XML reader for the SVG exporter: prolog, comments, elements,
// quoted attributes and the predefined entities.

#[derive(Debug, Default, Clone)]
pub struct Element {
    pub name: String,
    pub attrs: BTreeMap<String, String>,
    pub children: Vec<Element>,
    pub text: String,
}

impl Element {
    pub fn descendants(&self) -> Vec<&Element> {
        let mut out = Vec::new();
        for c in &self.children {
            out.push(c);
            out.extend(c.descendants());
        }
        out
    }

    pub fn find_all(&self, name: &str) -> Vec<&Element> {
        self.descendants().into_iter().filter(|e| e.name == name).collect()
    }

    pub fn has_class(&self, class: &str) -> bool {
        self.attrs
            .get("class")
            .is_some_and(|c| c.split_whitespace().any(|x| x == class))
    }
}

fn decode_entities(raw: &str) -> Result<String, String> {
    let mut out = String::new();
    let mut rest = raw;
    while let Some(i) = rest.find('&') {
        out.push_str(&rest[..i]);
        let end = rest[i..].find(';').ok_or("unterminated entity")? + i;
        let name = &rest[i + 1..end];
        out.push(match name {
            "amp" => '&',
            "lt" => '<',
            "gt" => '>',
            "quot" => '"',
            "apos" => '\'',
            n if n.starts_with('#') => {
                let code = if let Some(hex) = n.strip_prefix("#x") {
                    u32::from_str_radix(hex, 16)
                } else {
                    n[1..].parse()
                }
                .map_err(|_| format!("bad character reference &{n};"))?;
                char::from_u32(code).ok_or("invalid code point")?
            }
            n => return Err(format!("unknown entity &{n};")),
        });
        rest = &rest[end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '-' | '_' | ':' | '.')
}

struct XmlParser<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> XmlParser<'a> {
    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.s.len() - trimmed.len();
    }

    fn skip_misc(&mut self) -> Result<(), String> {
        loop {
            self.skip_ws();
            if self.rest().starts_with("<?") {
                let end = self.rest().find("?>").ok_or("unterminated processing instruction")?;
                self.pos += end + 2;
            } else if self.rest().starts_with("<!--") {
                let end = self.rest().find("-->").ok_or("unterminated comment")?;
                self.pos += end + 3;
            } else {
                return Ok(());
            }
        }
    }

    fn name(&mut self) -> Result<String, String> {
        let len = self.rest().find(|c: char| !is_name_char(c)).unwrap_or(self.rest().len());
        if len == 0 {
            return Err(format!("expected a name at byte {}", self.pos));
        }
        let n = self.rest()[..len].to_string();
        self.pos += len;
        Ok(n)
    }

    fn element(&mut self) -> Result<Element, String> {
        if !self.rest().starts_with('<') {
            return Err(format!("expected '<' at byte {}", self.pos));
        }
        self.pos += 1;
        let mut el = Element {
            name: self.name()?,
            ..Default::default()
        };
        loop {
            self.skip_ws();
            if self.rest().starts_with("/>") {
                self.pos += 2;
                return Ok(el);
            }
            if self.rest().starts_with('>') {
                self.pos += 1;
                break;
            }
            let key = self.name()?;
            self.skip_ws();
            if !self.rest().starts_with('=') {
                return Err(format!("attribute {key} without value"));
            }
            self.pos += 1;
            self.skip_ws();
            let quote = self.rest().chars().next().ok_or("eof in attribute")?;
            if quote != '"' && quote != '\'' {
                return Err(format!("unquoted attribute {key}"));
            }
            self.pos += 1;
            let end = self.rest().find(quote).ok_or("unterminated attribute")?;
            let raw = &self.rest()[..end];
            if raw.contains('<') {
                return Err(format!("'<' inside attribute {key}"));
            }
            let value = decode_entities(raw)?;
            self.pos += end + 1;
            if el.attrs.insert(key.clone(), value).is_some() {
                return Err(format!("duplicate attribute {key} on <{}>", el.name));
            }
        }
        loop {
            let next = self.rest().find('<').ok_or_else(|| format!("<{}> is never closed", el.name))?;
            el.text.push_str(&decode_entities(&self.rest()[..next])?);
            self.pos += next;
            if self.rest().starts_with("</") {
                self.pos += 2;
                let name = self.name()?;
                if name != el.name {
                    return Err(format!("</{name}> closes <{}>", el.name));
                }
                self.skip_ws();
                if !self.rest().starts_with('>') {
                    return Err("malformed closing tag".into());
                }
                self.pos += 1;
                return Ok(el);
            }
            if self.rest().starts_with("<!--") {
                let end = self.rest().find("-->").ok_or("unterminated comment")?;
                self.pos += end + 3;
                continue;
            }
            el.children.push(self.element()?);
        }
    }
}

pub fn parse_xml(text: &str) -> Result<Element, String> {
    let mut p = XmlParser { s: text, pos: 0 };
    p.skip_misc()?;
    let root = p.element()?;
    p.skip_misc()?;
    if p.pos != text.len() {
        return Err("content after the root element".into());
    }
    Ok(root)
}

/// `translate(x,y)` of a glyph group.
pub fn translate_of(el: &Element) -> (f64, f64) {
    let t = el.attrs.get("transform").expect("transform attribute");
    let inner = t
        .strip_prefix("translate(")
        .and_then(|s| s.strip_suffix(')'))
        .expect("translate transform");
    let (x, y) = inner.split_once(',').expect("two coordinates");
    (x.parse().unwrap(), y.parse().unwrap())
}
