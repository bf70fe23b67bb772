//! `{{placeholder}}` templates. Substitution is a single pass over the parsed
//! template, so substituted values are never re-scanned for placeholders.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Placeholder {
    NbestBlock,
    Domain,
    DemoNbestBlock,
    DemoTranscription,
    N,
    DemoN,
}

impl Placeholder {
    pub const ALL: [Placeholder; 6] = [
        Placeholder::NbestBlock,
        Placeholder::Domain,
        Placeholder::DemoNbestBlock,
        Placeholder::DemoTranscription,
        Placeholder::N,
        Placeholder::DemoN,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Placeholder::NbestBlock => "nbest_block",
            Placeholder::Domain => "domain",
            Placeholder::DemoNbestBlock => "demo_nbest_block",
            Placeholder::DemoTranscription => "demo_transcription",
            Placeholder::N => "n",
            Placeholder::DemoN => "demo_n",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }
}

impl fmt::Display for Placeholder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("template {template}: unknown placeholder {{{{{name}}}}} at byte {offset}")]
    UnknownPlaceholder { template: String, name: String, offset: usize },
    #[error("template {template}: unclosed `{{{{` at byte {offset}")]
    Unclosed { template: String, offset: usize },
    #[error("no template named {0}")]
    MissingTemplate(String),
    #[error("template {template}: no value supplied for {{{{{placeholder}}}}}")]
    MissingValue { template: String, placeholder: Placeholder },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Literal(String),
    Slot(Placeholder),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    name: String,
    segments: Vec<Segment>,
}

/// Values available for substitution.
#[derive(Debug, Clone, Default)]
pub struct Values<'a> {
    slots: Vec<(Placeholder, &'a str)>,
}

impl<'a> Values<'a> {
    pub fn new() -> Self {
        Values::default()
    }

    pub fn set(mut self, p: Placeholder, value: &'a str) -> Self {
        self.slots.retain(|(q, _)| *q != p);
        self.slots.push((p, value));
        self
    }

    fn get(&self, p: Placeholder) -> Option<&'a str> {
        self.slots.iter().find(|(q, _)| *q == p).map(|(_, v)| *v)
    }
}

impl Template {
    pub fn parse(name: &str, text: &str) -> Result<Template, TemplateError> {
        let mut segments = Vec::new();
        let mut rest = text;
        let mut offset = 0;
        while let Some(open) = rest.find("{{") {
            if open > 0 {
                segments.push(Segment::Literal(rest[..open].to_string()));
            }
            let after = &rest[open + 2..];
            let close = after.find("}}").ok_or_else(|| TemplateError::Unclosed {
                template: name.to_string(),
                offset: offset + open,
            })?;
            let key = after[..close].trim();
            let slot = Placeholder::from_name(key).ok_or_else(|| TemplateError::UnknownPlaceholder {
                template: name.to_string(),
                name: key.to_string(),
                offset: offset + open,
            })?;
            segments.push(Segment::Slot(slot));
            let consumed = open + 2 + close + 2;
            offset += consumed;
            rest = &rest[consumed..];
        }
        if !rest.is_empty() {
            segments.push(Segment::Literal(rest.to_string()));
        }
        Ok(Template { name: name.to_string(), segments })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn placeholders(&self) -> impl Iterator<Item = Placeholder> + '_ {
        self.segments.iter().filter_map(|s| match s {
            Segment::Slot(p) => Some(*p),
            Segment::Literal(_) => None,
        })
    }

    pub fn render(&self, values: &Values<'_>) -> Result<String, TemplateError> {
        let mut out = String::new();
        for seg in &self.segments {
            match seg {
                Segment::Literal(s) => out.push_str(s),
                Segment::Slot(p) => out.push_str(values.get(*p).ok_or_else(|| TemplateError::MissingValue {
                    template: self.name.clone(),
                    placeholder: *p,
                })?),
            }
        }
        Ok(out)
    }
}
