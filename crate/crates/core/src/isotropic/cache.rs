use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{isotropize, IsotropizeConfig};
use crate::bodies::{self, Body};
use crate::error::{Error, Result};
use crate::numkit::matrix::{matrix_to_rows, rows_to_matrix};
use crate::numkit::{Matrix, RngStream, Vector};

/// A stored whitening `x ↦ map·(x − shift)` for a named body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CachedWhitening {
    pub name: String,
    pub n: usize,
    pub seed: u64,
    pub samples: usize,
    pub map: Vec<Vec<f64>>,
    pub shift: Vec<f64>,
}

impl CachedWhitening {
    pub fn apply(&self) -> Result<Body> {
        let map: Matrix = rows_to_matrix(&self.map)?;
        let shift = Vector::from_vec(self.shift.clone());
        bodies::named(&self.name, self.n)?.translate(&-shift)?.linear_image(&map)
    }
}

/// JSON file of whitening maps keyed by `(name, n, seed)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WhiteningCache {
    #[serde(skip)]
    path: Option<PathBuf>,
    entries: Vec<CachedWhitening>,
}

impl WhiteningCache {
    pub fn in_memory() -> Self {
        WhiteningCache::default()
    }

    /// Opens the cache at `path`; a missing file is an empty cache.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut cache = match fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str::<WhiteningCache>(&text)
                .map_err(|e| Error::Parse(format!("whitening cache {}: {e}", path.display())))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => WhiteningCache::default(),
            Err(e) => return Err(Error::Parse(format!("whitening cache {}: {e}", path.display()))),
        };
        cache.path = Some(path);
        Ok(cache)
    }

    pub fn entries(&self) -> &[CachedWhitening] {
        &self.entries
    }

    pub fn get(&self, name: &str, n: usize, seed: u64) -> Option<&CachedWhitening> {
        self.entries.iter().find(|e| e.name == name && e.n == n && e.seed == seed)
    }

    pub fn insert(&mut self, entry: CachedWhitening) {
        self.entries.retain(|e| !(e.name == entry.name && e.n == entry.n && e.seed == entry.seed));
        self.entries.push(entry);
        self.entries.sort_by(|a, b| (&a.name, a.n, a.seed).cmp(&(&b.name, b.n, b.seed)));
    }

    pub fn save(&self) -> Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))?;
        fs::write(path, text).map_err(|e| Error::Parse(format!("whitening cache {}: {e}", path.display())))
    }

    /// The isotropic version of a named body, whitened by Monte Carlo with
    /// the given seed. Reuses a stored map when one exists, otherwise computes
    /// it, stores it and writes the file back.
    pub fn isotropic(&mut self, name: &str, n: usize, seed: u64, cfg: &IsotropizeConfig) -> Result<Body> {
        if let Some(entry) = self.get(name, n, seed) {
            return entry.apply();
        }
        let body = bodies::named(name, n)?;
        let (iso, report) = isotropize(&body, cfg, &RngStream::new(seed, 0))?;
        self.insert(CachedWhitening {
            name: name.to_string(),
            n,
            seed,
            samples: report.samples,
            map: matrix_to_rows(&report.map),
            shift: report.shift.iter().copied().collect(),
        });
        self.save()?;
        Ok(iso)
    }
}
