use std::collections::{BTreeMap, BTreeSet};

use super::{check_event_link, Initiator, Link, SpecError, SystemSpec, Topology};
use crate::flow_model::{
    ComponentId, Event, Flow, FlowId, Marking, PlaceId, Transition, TransitionId,
};
use crate::ids::{IdentError, LinkId};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok<'a> {
    Word(&'a str),
    Open,
    Close,
    Comma,
}

#[derive(Debug, Clone)]
struct Token<'a> {
    tok: Tok<'a>,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> SpecError {
    SpecError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn tokenize(line_no: usize, line: &str) -> Result<Vec<Token<'_>>, SpecError> {
    let content = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let mut chars = content.char_indices().peekable();
    let mut column = 0;
    while let Some((i, c)) = chars.next() {
        column += 1;
        if !c.is_ascii() {
            return Err(syntax(
                line_no,
                column,
                format!("non-ASCII character {c:?}"),
            ));
        }
        match c {
            c if c.is_ascii_whitespace() => {}
            '{' => out.push(Token {
                tok: Tok::Open,
                column,
            }),
            '}' => out.push(Token {
                tok: Tok::Close,
                column,
            }),
            ',' => out.push(Token {
                tok: Tok::Comma,
                column,
            }),
            _ => {
                let start_col = column;
                let mut end = i + c.len_utf8();
                while let Some(&(j, d)) = chars.peek() {
                    if d.is_ascii_whitespace() || matches!(d, '{' | '}' | ',') {
                        break;
                    }
                    if !d.is_ascii() {
                        return Err(syntax(
                            line_no,
                            column + 1,
                            format!("non-ASCII character {d:?}"),
                        ));
                    }
                    chars.next();
                    column += 1;
                    end = j + d.len_utf8();
                }
                out.push(Token {
                    tok: Tok::Word(&content[i..end]),
                    column: start_col,
                });
            }
        }
    }
    Ok(out)
}

struct Cursor<'a, 't> {
    line: usize,
    tokens: &'t [Token<'a>],
    pos: usize,
    eol_column: usize,
}

impl<'a, 't> Cursor<'a, 't> {
    fn new(line: usize, text: &str, tokens: &'t [Token<'a>]) -> Self {
        Self {
            line,
            tokens,
            pos: 0,
            eol_column: text.len() + 1,
        }
    }

    fn column(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map_or(self.eol_column, |t| t.column)
    }

    fn err(&self, message: impl Into<String>) -> SpecError {
        syntax(self.line, self.column(), message)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek_word(&self) -> Option<&'a str> {
        match self.tokens.get(self.pos) {
            Some(Token {
                tok: Tok::Word(w), ..
            }) => Some(w),
            _ => None,
        }
    }

    fn word(&mut self, what: &str) -> Result<(&'a str, usize), SpecError> {
        match self.tokens.get(self.pos) {
            Some(Token {
                tok: Tok::Word(w),
                column,
            }) => {
                self.pos += 1;
                Ok((w, *column))
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), SpecError> {
        match self.peek_word() {
            Some(w) if w == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected '{kw}'"))),
        }
    }

    fn ident<T>(
        &mut self,
        what: &str,
        make: impl Fn(String) -> Result<T, IdentError>,
    ) -> Result<T, SpecError> {
        let (w, column) = self.word(what)?;
        make(w.to_string()).map_err(|e| syntax(self.line, column, format!("{what}: {}", e.reason)))
    }

    fn punct(&mut self, want: Tok<'static>, what: &str) -> Result<(), SpecError> {
        match self.tokens.get(self.pos) {
            Some(t) if t.tok == want => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    /// `{a, b, ...}` with at least one element.
    fn set<T: Ord>(
        &mut self,
        what: &str,
        make: impl Fn(String) -> Result<T, IdentError>,
    ) -> Result<BTreeSet<T>, SpecError> {
        self.punct(Tok::Open, "'{'")?;
        let mut out = BTreeSet::new();
        loop {
            let column = self.column();
            let item = self.ident(what, &make)?;
            if !out.insert(item) {
                return Err(syntax(
                    self.line,
                    column,
                    format!("duplicate {what} in set"),
                ));
            }
            match self.tokens.get(self.pos).map(|t| &t.tok) {
                Some(Tok::Comma) => self.pos += 1,
                Some(Tok::Close) => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return Err(self.err("expected ',' or '}'")),
            }
        }
    }

    fn finish(&self) -> Result<(), SpecError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }
}

struct RawTransition {
    line: usize,
    id: TransitionId,
    pre: BTreeSet<PlaceId>,
    post: BTreeSet<PlaceId>,
    event: Event,
    link: LinkId,
}

struct RawFlow {
    line: usize,
    id: FlowId,
    places: Vec<(usize, PlaceId, bool, bool)>,
    transitions: Vec<RawTransition>,
}

struct RawDoc {
    name: String,
    components: Vec<(usize, ComponentId)>,
    links: Vec<(usize, Link)>,
    flows: Vec<RawFlow>,
    initiators: Vec<(usize, ComponentId, BTreeSet<FlowId>)>,
}

fn parse_event(cur: &mut Cursor<'_, '_>) -> Result<Event, SpecError> {
    let (w, column) = cur.word("event <src>:<dest>:<cmd>")?;
    w.parse::<Event>()
        .map_err(|e| syntax(cur.line, column, e.to_string()))
}

fn parse_raw(text: &str) -> Result<RawDoc, SpecError> {
    let mut doc: Option<RawDoc> = None;

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let tokens = tokenize(line_no, line)?;
        if tokens.is_empty() {
            continue;
        }
        let mut cur = Cursor::new(line_no, line, &tokens);
        let (kw, kw_col) = cur.word("a declaration")?;

        let Some(doc) = doc.as_mut() else {
            if kw != "system" {
                return Err(syntax(line_no, kw_col, "expected 'system' header"));
            }
            let (name, column) = cur.word("system name")?;
            crate::ids::check_ident(name)
                .map_err(|r| syntax(line_no, column, format!("system name: {r}")))?;
            cur.finish()?;
            doc = Some(RawDoc {
                name: name.to_string(),
                components: Vec::new(),
                links: Vec::new(),
                flows: Vec::new(),
                initiators: Vec::new(),
            });
            continue;
        };

        match kw {
            "system" => return Err(syntax(line_no, kw_col, "duplicate 'system' header")),
            "component" => {
                if cur.at_end() {
                    return Err(cur.err("expected component id"));
                }
                while !cur.at_end() {
                    let id = cur.ident("component id", ComponentId::new)?;
                    doc.components.push((line_no, id));
                }
            }
            "link" => {
                let id = cur.ident("link id", LinkId::new)?;
                let src = cur.ident("source component", ComponentId::new)?;
                cur.keyword("->")?;
                let dest = cur.ident("destination component", ComponentId::new)?;
                let mut channel = 0;
                if !cur.at_end() {
                    cur.keyword("channel")?;
                    let (n, column) = cur.word("channel number")?;
                    channel = n.parse::<u32>().map_err(|_| {
                        syntax(line_no, column, format!("invalid channel number {n:?}"))
                    })?;
                }
                cur.finish()?;
                doc.links.push((
                    line_no,
                    Link {
                        id,
                        src,
                        dest,
                        channel,
                    },
                ));
            }
            "flow" => {
                let id = cur.ident("flow id", FlowId::new)?;
                cur.finish()?;
                doc.flows.push(RawFlow {
                    line: line_no,
                    id,
                    places: Vec::new(),
                    transitions: Vec::new(),
                });
            }
            "place" => {
                let flow = doc
                    .flows
                    .last_mut()
                    .ok_or_else(|| syntax(line_no, kw_col, "'place' outside of a flow block"))?;
                if cur.at_end() {
                    return Err(cur.err("expected place id"));
                }
                while !cur.at_end() {
                    let id = cur.ident("place id", PlaceId::new)?;
                    let (mut initial, mut end) = (false, false);
                    loop {
                        match cur.peek_word() {
                            Some("initial") => initial = true,
                            Some("end") => end = true,
                            _ => break,
                        }
                        cur.pos += 1;
                    }
                    flow.places.push((line_no, id, initial, end));
                }
            }
            "transition" => {
                let flow = doc.flows.last_mut().ok_or_else(|| {
                    syntax(line_no, kw_col, "'transition' outside of a flow block")
                })?;
                let id = cur.ident("transition id", TransitionId::new)?;
                cur.keyword("pre")?;
                let pre = cur.set("place id", PlaceId::new)?;
                cur.keyword("post")?;
                let post = cur.set("place id", PlaceId::new)?;
                cur.keyword("event")?;
                let event = parse_event(&mut cur)?;
                cur.keyword("on")?;
                let link = cur.ident("link id", LinkId::new)?;
                cur.finish()?;
                flow.transitions.push(RawTransition {
                    line: line_no,
                    id,
                    pre,
                    post,
                    event,
                    link,
                });
            }
            "initiator" => {
                let component = cur.ident("component id", ComponentId::new)?;
                cur.keyword("flows")?;
                let flows = cur.set("flow id", FlowId::new)?;
                cur.finish()?;
                doc.initiators.push((line_no, component, flows));
            }
            other => {
                return Err(syntax(
                    line_no,
                    kw_col,
                    format!("unknown declaration '{other}'"),
                ));
            }
        }
    }

    doc.ok_or_else(|| syntax(1, 1, "expected 'system' header"))
}

fn resolve(doc: RawDoc) -> Result<SystemSpec, SpecError> {
    let mut components = BTreeSet::new();
    for (line, c) in &doc.components {
        if !components.insert(c.clone()) {
            return Err(SpecError::semantic(
                Some(*line),
                c,
                format!("duplicate component {c}"),
            ));
        }
    }

    let mut links: BTreeMap<LinkId, Link> = BTreeMap::new();
    for (line, link) in &doc.links {
        for end in [&link.src, &link.dest] {
            if !components.contains(end) {
                return Err(SpecError::semantic(
                    Some(*line),
                    end,
                    format!("undeclared component {end} in link {}", link.id),
                ));
            }
        }
        if links.insert(link.id.clone(), link.clone()).is_some() {
            return Err(SpecError::semantic(
                Some(*line),
                &link.id,
                format!("duplicate link {}", link.id),
            ));
        }
    }

    let mut event_links: BTreeMap<Event, (LinkId, usize)> = BTreeMap::new();
    let mut flows = Vec::new();
    for raw in doc.flows {
        let mut places = BTreeSet::new();
        let (mut initial, mut end) = (Vec::new(), Vec::new());
        for (line, p, is_initial, is_end) in raw.places {
            if !places.insert(p.clone()) {
                return Err(SpecError::semantic(
                    Some(line),
                    &p,
                    format!("duplicate place {p} in flow {}", raw.id),
                ));
            }
            if is_initial {
                initial.push(p.clone());
            }
            if is_end {
                end.push(p);
            }
        }
        let mut transitions = Vec::new();
        for t in raw.transitions {
            check_event_link(&components, &links, &t.event, &t.link, Some(t.line))?;
            if let Some((prev, prev_line)) = event_links.get(&t.event) {
                if prev != &t.link {
                    return Err(SpecError::semantic(
                        Some(t.line),
                        &t.event,
                        format!(
                            "event {} is on link {} here but on link {prev} at line {prev_line}",
                            t.event, t.link
                        ),
                    ));
                }
            } else {
                event_links.insert(t.event.clone(), (t.link.clone(), t.line));
            }
            for p in t.pre.iter().chain(t.post.iter()) {
                if !places.contains(p) {
                    return Err(SpecError::semantic(
                        Some(t.line),
                        p,
                        format!("transition {} uses undeclared place {p}", t.id),
                    ));
                }
            }
            transitions.push(Transition::new(t.id, t.pre, t.post, t.event));
        }
        let flow = Flow::new(
            raw.id.clone(),
            places,
            transitions,
            Marking::new(initial),
            Marking::new(end),
        )
        .map_err(|e| SpecError::semantic(Some(raw.line), &raw.id, e.to_string()))?;
        flows.push((raw.line, flow));
    }

    let mut seen_flows = BTreeSet::new();
    for (line, f) in &flows {
        if !seen_flows.insert(f.id().clone()) {
            return Err(SpecError::semantic(
                Some(*line),
                f.id(),
                format!("duplicate flow {}", f.id()),
            ));
        }
    }
    for (line, c, fs) in &doc.initiators {
        if !components.contains(c) {
            return Err(SpecError::semantic(
                Some(*line),
                c,
                format!("undeclared initiator component {c}"),
            ));
        }
        if let Some(f) = fs.iter().find(|f| !seen_flows.contains(*f)) {
            return Err(SpecError::semantic(
                Some(*line),
                f,
                format!("unknown flow {f}"),
            ));
        }
    }

    let topology = Topology::new(
        components,
        links.into_values(),
        event_links.into_iter().map(|(e, (l, _))| (e, l)),
    )?;
    let initiators = doc
        .initiators
        .into_iter()
        .map(|(_, component, flows)| Initiator { component, flows });
    SystemSpec::new(
        doc.name,
        topology,
        flows.into_iter().map(|(_, f)| f),
        initiators,
    )
}

/// Parses and cross-checks a document without running flow validation.
pub fn parse_document(text: &str) -> Result<SystemSpec, SpecError> {
    resolve(parse_raw(text)?)
}

/// Parses a document and validates every flow.
pub fn parse_system(text: &str) -> Result<SystemSpec, SpecError> {
    let spec = parse_document(text)?;
    let reports = spec.validate_flows();
    if reports.is_empty() {
        Ok(spec)
    } else {
        Err(SpecError::Invalid { reports })
    }
}
