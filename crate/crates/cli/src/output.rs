use serde::Serialize;

use crate::{CmdResult, Failure};

/// Version of the JSON report layout.
pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

/// A command result that can be shown as text or JSON.
pub trait Report: Serialize {
    fn text(&self) -> String;
}

#[derive(Serialize)]
struct Envelope<'a, R> {
    schema: u32,
    command: &'a str,
    #[serde(flatten)]
    body: &'a R,
}

pub struct Output {
    pub format: Format,
    pub verbose: u8,
}

impl Output {
    pub fn render<R: Report>(&self, command: &str, report: &R) -> Result<String, Failure> {
        match self.format {
            Format::Text => Ok(report.text()),
            Format::Json => serde_json::to_string_pretty(&Envelope { schema: SCHEMA, command, body: report })
                .map(|s| s + "\n")
                .map_err(|e| Failure::new(crate::exit::CORRUPT, format!("cannot serialize report: {e}"))),
        }
    }

    pub fn emit<R: Report>(&self, command: &str, report: &R) -> CmdResult {
        print!("{}", self.render(command, report)?);
        Ok(())
    }

    pub fn note(&self, msg: impl AsRef<str>) {
        if self.verbose > 0 {
            eprintln!("{}", msg.as_ref());
        }
    }
}

/// `None` for infinite or NaN values, which JSON cannot carry.
pub fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

pub fn percent(v: f64) -> String {
    format!("{:.2}%", 100.0 * v)
}
