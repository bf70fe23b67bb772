use std::sync::OnceLock;

use super::{Template, TemplateError};

pub const TEMPLATE_VERSION: &str = "v1";

macro_rules! builtin {
    ($name:literal) => {
        ($name, include_str!(concat!("../../templates/v1/", $name, ".txt")))
    };
}

const BUILTIN: [(&str, &str); 15] = [
    builtin!("system"),
    builtin!("domain_hint"),
    builtin!("task_scores"),
    builtin!("task_selection"),
    builtin!("task_correction"),
    builtin!("reasoning"),
    builtin!("demo_query"),
    builtin!("demo_answer"),
    builtin!("tap_q1"),
    builtin!("tap_q2"),
    builtin!("tap_q3"),
    builtin!("tap_q4"),
    builtin!("tap_r1"),
    builtin!("tap_r2"),
    builtin!("tap_r3"),
];

#[derive(Debug, Clone)]
pub struct TemplateSet {
    pub system: Template,
    pub domain_hint: Template,
    pub task_scores: Template,
    pub task_selection: Template,
    pub task_correction: Template,
    pub reasoning: Template,
    pub demo_query: Template,
    pub demo_answer: Template,
    pub tap_queries: [Template; 4],
    pub tap_replies: [Template; 3],
}

fn strip_final_newline(s: &str) -> &str {
    s.strip_suffix('\n').map(|s| s.strip_suffix('\r').unwrap_or(s)).unwrap_or(s)
}

impl TemplateSet {
    /// Builds a set from `(name, text)` pairs; every builtin name must be present.
    pub fn from_sources<'a>(sources: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self, TemplateError> {
        let sources: Vec<(&str, &str)> = sources.into_iter().collect();
        let get = |name: &str| -> Result<Template, TemplateError> {
            let text = sources
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, t)| *t)
                .ok_or_else(|| TemplateError::MissingTemplate(name.to_string()))?;
            Template::parse(name, strip_final_newline(text))
        };
        Ok(TemplateSet {
            system: get("system")?,
            domain_hint: get("domain_hint")?,
            task_scores: get("task_scores")?,
            task_selection: get("task_selection")?,
            task_correction: get("task_correction")?,
            reasoning: get("reasoning")?,
            demo_query: get("demo_query")?,
            demo_answer: get("demo_answer")?,
            tap_queries: [get("tap_q1")?, get("tap_q2")?, get("tap_q3")?, get("tap_q4")?],
            tap_replies: [get("tap_r1")?, get("tap_r2")?, get("tap_r3")?],
        })
    }

    /// Templates compiled into the crate.
    pub fn builtin() -> &'static TemplateSet {
        static SET: OnceLock<TemplateSet> = OnceLock::new();
        SET.get_or_init(|| TemplateSet::from_sources(BUILTIN).expect("builtin templates parse"))
    }
}
