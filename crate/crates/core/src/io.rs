//! Step functions on disk: a `cylinder_index,re,im` CSV plus a JSON sidecar
//! holding the group, `{"m": [...], "N": ...}`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GeneratorSequence, GroupSpec};
use crate::step::StepFunction;

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    cylinder_index: usize,
    re: f64,
    im: f64,
}

/// Sidecar path for a CSV file: same stem, `.json` extension.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Writes `path` and its sidecar, each through a temporary file in the same
/// directory that is renamed into place.
pub fn write_step_function(f: &StepFunction, path: &Path) -> Result<()> {
    let mut csv = csv::Writer::from_writer(Vec::new());
    for (i, v) in f.values().iter().enumerate() {
        csv.serialize(Row {
            cylinder_index: i,
            re: v.re,
            im: v.im,
        })?;
    }
    let body = csv.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_atomic(path, &body)?;
    let spec = GroupSpec {
        m: f.group().radices()[..f.rank().max(1)].to_vec(),
        n: f.rank(),
    };
    write_atomic(
        &sidecar_path(path),
        serde_json::to_string_pretty(&spec)?.as_bytes(),
    )
}

pub fn read_step_function(path: &Path) -> Result<StepFunction> {
    let spec: GroupSpec = serde_json::from_reader(File::open(sidecar_path(path))?)?;
    let rank = spec.n;
    let g = GeneratorSequence::new(&spec.m, rank.max(1))?;
    let mut values = vec![None; g.size(rank)];
    for row in csv::Reader::from_path(path)?.deserialize() {
        let row: Row = row?;
        let slot = values.get_mut(row.cylinder_index).ok_or_else(|| {
            Error::Parse(format!("cylinder index {} beyond M_N", row.cylinder_index))
        })?;
        if slot.is_some() {
            return Err(Error::Parse(format!(
                "duplicate cylinder index {}",
                row.cylinder_index
            )));
        }
        *slot = Some(Complex64::new(row.re, row.im));
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| Error::Parse(format!("missing cylinder index {i}"))))
        .collect::<Result<Vec<_>>>()?;
    StepFunction::new(&g, rank, values)
}

/// Writes `bytes` to a temporary file next to `path`, then renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        w.write_all(bytes)?;
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let g = GeneratorSequence::periodic(&[2, 3], 6).unwrap();
        let f = StepFunction::from_index_fn(&g, 4, |i| {
            Complex64::new((i as f64 * 0.123).sin() * 1e3, 1.0 / (i as f64 + 3.0))
        })
        .unwrap();
        write_step_function(&f, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("cylinder_index,re,im\n"));
        let sidecar: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(sidecar_path(&path)).unwrap()).unwrap();
        assert_eq!(sidecar["m"], serde_json::json!([2, 3, 2, 3]));
        assert_eq!(sidecar["N"], 4);
        let back = read_step_function(&path).unwrap();
        assert_eq!(back.rank(), 4);
        assert!(back.sup_distance(&f).unwrap() <= 1e-12);
    }

    #[test]
    fn rejects_gaps_and_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        std::fs::write(sidecar_path(&path), r#"{"m":[2,2],"N":2}"#).unwrap();
        std::fs::write(&path, "cylinder_index,re,im\n0,1,0\n1,1,0\n2,0,0\n").unwrap();
        assert!(matches!(read_step_function(&path), Err(Error::Parse(_))));
        std::fs::write(&path, "cylinder_index,re,im\n0,1,0\n1,1,0\n2,0,0\n2,0,0\n").unwrap();
        assert!(matches!(read_step_function(&path), Err(Error::Parse(_))));
        std::fs::write(&path, "cylinder_index,re,im\n0,1,0\n1,1,0\n2,0,0\n3,0,0\n").unwrap();
        assert_eq!(read_step_function(&path).unwrap().len(), 4);
    }
}
