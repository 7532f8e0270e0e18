use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::error::CliResult;
use crate::io::write_json;

pub const SCHEMA_VERSION: &str = "1";

/// Machine-readable record of one CLI invocation.
#[derive(Debug, Serialize)]
pub struct RunReport<C: Serialize, S: Serialize> {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub argv: Vec<String>,
    pub config: C,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<&'static str, f64>,
    pub summary: S,
    pub outputs: BTreeMap<&'static str, String>,
}

impl<C: Serialize, S: Serialize> RunReport<C, S> {
    pub fn write(&self, path: &Path) -> CliResult<()> {
        write_json(path, self)
    }
}

/// Named stage timer.
#[derive(Debug, Default)]
pub struct Stopwatch {
    laps: BTreeMap<&'static str, f64>,
}

impl Stopwatch {
    pub fn time<T>(&mut self, stage: &'static str, f: impl FnOnce() -> T) -> T {
        let started = Instant::now();
        let out = f();
        *self.laps.entry(stage).or_default() += started.elapsed().as_secs_f64();
        out
    }

    pub fn finish(self) -> BTreeMap<&'static str, f64> {
        self.laps
    }
}
