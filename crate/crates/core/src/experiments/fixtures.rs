//! Frozen constants for inequalities whose constant is not given explicitly.
//!
//! A calibration run measures each constant with the naive oracle, adds a
//! [`MARGIN`] and stores it as one JSON file per constant. Verification runs
//! only read these files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::GeneratorSequence;
use crate::io::write_atomic;

use super::group_tag;

/// Multiplicative headroom applied to measured constants.
pub const MARGIN: f64 = 1.1;
/// Version string of [`super::oracle`]; bump when the oracle changes.
pub const ORACLE_VERSION: &str = "naive-v1";
/// Overrides the fixture directory.
pub const FIXTURE_DIR_ENV: &str = "VILENKIN_FIXTURES";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub experiment_id: String,
    pub constant_name: String,
    pub value: f64,
    pub oracle_version: String,
}

impl Fixture {
    /// Freezes a measured constant with the standard margin.
    pub fn freeze(experiment_id: &str, constant_name: &str, measured: f64) -> Self {
        Self {
            experiment_id: experiment_id.to_string(),
            constant_name: constant_name.to_string(),
            value: measured * MARGIN,
            oracle_version: ORACLE_VERSION.to_string(),
        }
    }
}

/// Constant name qualified by the group it was measured on.
pub fn constant_name(base: &str, g: &GeneratorSequence) -> String {
    format!("{base}_{}", group_tag(g))
}

/// Directory of fixture files.
#[derive(Debug, Clone)]
pub struct FixtureStore {
    dir: PathBuf,
}

impl FixtureStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// The directory named by `VILENKIN_FIXTURES`, else the fixtures shipped
    /// with this crate.
    pub fn from_env() -> Self {
        match std::env::var_os(FIXTURE_DIR_ENV) {
            Some(dir) => Self::new(dir),
            None => Self::shipped(),
        }
    }

    pub fn shipped() -> Self {
        Self::new(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, experiment_id: &str, constant_name: &str) -> PathBuf {
        self.dir
            .join(format!("{experiment_id}.{constant_name}.json"))
    }

    pub fn load(&self, experiment_id: &str, constant_name: &str) -> Result<Fixture> {
        let path = self.path(experiment_id, constant_name);
        let text = std::fs::read_to_string(&path).map_err(|e| {
            Error::Fixture(format!(
                "cannot read {} ({e}); run the calibrate command for this experiment",
                path.display()
            ))
        })?;
        let fixture: Fixture = serde_json::from_str(&text)?;
        if fixture.oracle_version != ORACLE_VERSION {
            return Err(Error::Fixture(format!(
                "{} was produced by oracle {}, expected {ORACLE_VERSION}",
                path.display(),
                fixture.oracle_version
            )));
        }
        Ok(fixture)
    }

    pub fn save(&self, fixture: &Fixture) -> Result<PathBuf> {
        let path = self.path(&fixture.experiment_id, &fixture.constant_name);
        let mut text = serde_json::to_string_pretty(fixture)?;
        text.push('\n');
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}
