use std::fmt;

/// An error paired with the process exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub const USAGE: u8 = 1;
pub const INPUT: u8 = 2;
pub const BACKEND: u8 = 3;

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: USAGE, message: message.into() }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Failure { code: INPUT, message: message.into() }
    }

    pub fn backend(message: impl Into<String>) -> Self {
        Failure { code: BACKEND, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<nbest_rescore::pipeline::PipelineError> for Failure {
    fn from(e: nbest_rescore::pipeline::PipelineError) -> Self {
        use nbest_rescore::pipeline::PipelineError as E;
        match e {
            E::Prompt(_) | E::Config(_) => Failure::usage(e.to_string()),
            E::Wer(_) | E::Score(_) => Failure::input(e.to_string()),
            E::Activation(_) => Failure::backend(e.to_string()),
        }
    }
}
