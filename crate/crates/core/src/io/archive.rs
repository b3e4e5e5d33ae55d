//! Versioned JSON archive files.
//!
//! ```json
//! {"schema_version":1,"representation":"binary","dim":3,"creation_seed":7,
//!  "entries":[{"kind":"bernoulli","p":[0.5,0.25,0.75],"meta":{"category":"KP_sc_ac","related":true}}]}
//! ```
//!
//! Gaussian entries carry `"mean"` and a row-major `"cov"` instead of `"p"`.
//! Floats are written in shortest round-trip form, so loading reproduces
//! every parameter bit for bit.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{SourceArchive, SourceMeta};
use crate::error::{Error, Result};
use crate::models::{BernoulliModel, GaussianModel, SearchModel};
use crate::types::Representation;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArchiveFile {
    schema_version: u32,
    representation: Representation,
    dim: usize,
    creation_seed: u64,
    entries: Vec<Entry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum Entry {
    Bernoulli {
        p: Vec<f64>,
        meta: SourceMeta,
    },
    Gaussian {
        mean: Vec<f64>,
        cov: Vec<f64>,
        meta: SourceMeta,
    },
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: Option<u32>,
}

pub fn archive_to_vec(archive: &SourceArchive) -> Result<Vec<u8>> {
    let entries = archive
        .models()
        .iter()
        .zip(archive.meta())
        .map(|(m, meta)| match m {
            SearchModel::Bernoulli(b) => Entry::Bernoulli {
                p: b.probs().to_vec(),
                meta: meta.clone(),
            },
            SearchModel::Gaussian(g) => Entry::Gaussian {
                mean: g.mean().to_vec(),
                cov: g.cov().transpose().as_slice().to_vec(),
                meta: meta.clone(),
            },
        })
        .collect();
    let file = ArchiveFile {
        schema_version: SCHEMA_VERSION,
        representation: archive.representation(),
        dim: archive.dim(),
        creation_seed: archive.creation_seed(),
        entries,
    };
    Ok(serde_json::to_vec(&file)?)
}

/// Parses and validates an archive document.
pub fn archive_from_slice(bytes: &[u8]) -> Result<SourceArchive> {
    let probe: VersionProbe = serde_json::from_slice(bytes)?;
    match probe.schema_version {
        Some(SCHEMA_VERSION) => {}
        Some(found) => {
            return Err(Error::SchemaVersion {
                expected: SCHEMA_VERSION,
                found,
            })
        }
        None => return Err(Error::Archive("missing schema_version".into())),
    }
    let file: ArchiveFile = serde_json::from_slice(bytes)?;
    let mut archive = SourceArchive::empty(file.representation, file.dim, file.creation_seed);
    for (k, entry) in file.entries.into_iter().enumerate() {
        let (model, meta) = match entry {
            Entry::Bernoulli { p, meta } => (SearchModel::Bernoulli(BernoulliModel::from_probs(p)?), meta),
            Entry::Gaussian { mean, cov, meta } => {
                let d = mean.len();
                if d.checked_mul(d) != Some(cov.len()) {
                    return Err(Error::Archive(format!(
                        "entry {k}: covariance has {} values for dimension {d}",
                        cov.len()
                    )));
                }
                let cov = DMatrix::from_row_slice(d, d, &cov);
                (SearchModel::Gaussian(GaussianModel::new(mean, cov)?), meta)
            }
        };
        archive
            .push(model, meta)
            .map_err(|e| Error::Archive(format!("entry {k}: {e}")))?;
    }
    Ok(archive)
}

pub fn save_archive(archive: &SourceArchive, path: &Path) -> Result<()> {
    let bytes = archive_to_vec(archive)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_archive(path: &Path) -> Result<SourceArchive> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    archive_from_slice(&bytes)
}
