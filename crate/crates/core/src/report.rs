//! Versioned JSON envelope shared by every report the tool writes.
//!
//! The layout is described by the JSON schema in `schema/report.schema.json`,
//! also available as [`SCHEMA`]. Bumping [`SCHEMA_VERSION`] is required for
//! any change that removes or retypes a field.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::FieldDef;

pub const SCHEMA_VERSION: u32 = 1;
pub const SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Verification,
    Classification,
    Liouville,
    Hamiltonian,
    HamiltonianGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub version: String,
}

impl Default for Generator {
    fn default() -> Self {
        Self { name: env!("CARGO_PKG_NAME").into(), version: env!("CARGO_PKG_VERSION").into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSummary {
    pub name: String,
    pub analytic: bool,
    /// Field file text that reproduces the field.
    pub definition: String,
}

impl From<&FieldDef> for FieldSummary {
    fn from(f: &FieldDef) -> Self {
        Self { name: f.name.clone(), analytic: f.analytic, definition: f.to_config() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema_version: u32,
    pub kind: ReportKind,
    pub generator: Generator,
    /// Seconds since the Unix epoch; omitted in reproducible runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
    pub field: FieldSummary,
    pub data: &'a T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(kind: ReportKind, field: &FieldDef, data: &'a T) -> Self {
        Self { schema_version: SCHEMA_VERSION, kind, generator: Generator::default(), generated_at_unix: None, field: field.into(), data }
    }

    pub fn stamped(mut self) -> Self {
        self.generated_at_unix = SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs());
        self
    }

    /// Pretty JSON with a trailing newline. Non-finite numbers become `null`.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}
