//! Symmetric distance matrices, their evaluation, and the on-disk cache.
//!
//! Matrices store the lower triangle (diagonal included) row-major, so an
//! `n`-point space costs `n(n+1)/2` doubles. Evaluation may run in
//! parallel over rows; every entry is produced by exactly one task, so the
//! result is bit-identical to a sequential evaluation.
//!
//! # Cache file layout (version 1)
//!
//! All integers little-endian:
//!
//! ```text
//! offset  size  field
//! 0       8     magic "SCALENTD"
//! 8       4     format version, u32 (currently 1)
//! 12      4     reserved, u32, must be 0
//! 16      8     point count n, u64
//! 24      8     declared bound B, f64
//! 32      -     n(n+1)/2 matrix entries, f64, lower triangle row-major
//! ```
//!
//! Readers reject files whose magic, version, or length do not match.
//! Cache keys are a SHA-256 digest over the canonical serialization of the
//! generating (provenance, semimetric) pair, so a cache hit implies both
//! the space and the semimetric agree with the writer's.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::semimetric::{scan_table, Semimetric, Violation};
use crate::space::{Provenance, SampledSpace};

const CACHE_MAGIC: &[u8; 8] = b"SCALENTD";
const CACHE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    bound: f64,
    /// Lower triangle including the diagonal, row-major:
    /// entry `(i, j)` with `j <= i` lives at `i(i+1)/2 + j`.
    tri: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_triangle(n: usize, bound: f64, tri: Vec<f64>) -> Result<Self> {
        if tri.len() != n * (n + 1) / 2 {
            return Err(Error::MatrixSizeMismatch {
                n,
                expected: tri.len(),
            });
        }
        Ok(DistanceMatrix { n, bound, tri })
    }

    /// Builds a matrix from a symmetric function of index pairs.
    pub fn from_fn(n: usize, bound: f64, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut tri = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in 0..=i {
                tri.push(f(i, j));
            }
        }
        DistanceMatrix { n, bound, tri }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i >= j { (i, j) } else { (j, i) };
        self.tri[a * (a + 1) / 2 + b]
    }

    pub fn triangle(&self) -> &[f64] {
        &self.tri
    }

    /// Entrywise scaling by `c > 0`; the declared bound scales along.
    pub fn scale(&self, c: f64) -> DistanceMatrix {
        DistanceMatrix {
            n: self.n,
            bound: self.bound * c,
            tri: self.tri.iter().map(|&v| c * v).collect(),
        }
    }

    /// Largest entry; 0 for a single point.
    pub fn max_entry(&self) -> f64 {
        self.tri.iter().cloned().fold(0.0, f64::max)
    }

    /// Mean distance under the product weighting, `sum_ij w_i w_j d(i, j)`.
    /// Diagonal terms contribute zero by the semimetric axioms.
    pub fn weighted_mean(&self, weights: &[f64]) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n {
            for j in 0..i {
                total += 2.0 * weights[i] * weights[j] * self.get(i, j);
            }
        }
        total
    }

    /// Axiom scan on the stored entries; symmetric by construction, so
    /// only nonnegativity, diagonal, and triangle checks can fire.
    pub fn check(&self, tol: f64) -> Vec<Violation> {
        scan_table(self.n, &|i, j| self.get(i, j), tol)
    }

    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(32 + self.tri.len() * 8);
        buf.extend_from_slice(CACHE_MAGIC);
        buf.extend_from_slice(&CACHE_VERSION.to_le_bytes());
        buf.extend_from_slice(&0u32.to_le_bytes());
        buf.extend_from_slice(&(self.n as u64).to_le_bytes());
        buf.extend_from_slice(&self.bound.to_le_bytes());
        for &v in &self.tri {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        // Write to a sibling temp file and rename so readers never observe
        // a partial matrix.
        let tmp = path.with_extension("tmp");
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&buf)?;
        f.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn read_cache(path: &Path) -> Result<DistanceMatrix> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        if bytes.len() < 32 {
            return Err(Error::CacheFormat(format!(
                "file is {} bytes, shorter than the 32-byte header",
                bytes.len()
            )));
        }
        if &bytes[0..8] != CACHE_MAGIC {
            return Err(Error::CacheFormat("bad magic".into()));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != CACHE_VERSION {
            return Err(Error::CacheFormat(format!(
                "unknown format version {version}, this reader supports {CACHE_VERSION}"
            )));
        }
        let n = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
        let bound = f64::from_le_bytes(bytes[24..32].try_into().unwrap());
        let want = n * (n + 1) / 2;
        if bytes.len() != 32 + want * 8 {
            return Err(Error::CacheFormat(format!(
                "expected {} entries for n = {n}, file holds {}",
                want,
                (bytes.len() - 32) / 8
            )));
        }
        let tri = bytes[32..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(DistanceMatrix { n, bound, tri })
    }
}

/// Evaluates `rho` over all unordered pairs of `space`. Rows are computed
/// in parallel; assembly is by index, so the output does not depend on the
/// thread count.
pub fn eval_matrix(space: &SampledSpace, rho: &Semimetric) -> Result<DistanceMatrix> {
    let n = space.len();
    let rows: Vec<Result<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..=i)
                .map(|j| rho.eval(space.point(i), space.point(j)))
                .collect()
        })
        .collect();
    let mut tri = Vec::with_capacity(n * (n + 1) / 2);
    for row in rows {
        tri.extend(row?);
    }
    Ok(DistanceMatrix {
        n,
        bound: rho.bound(),
        tri,
    })
}

/// Sequential twin of `eval_matrix`, kept for the bit-identity check.
pub fn eval_matrix_sequential(space: &SampledSpace, rho: &Semimetric) -> Result<DistanceMatrix> {
    let n = space.len();
    let mut tri = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in 0..=i {
            tri.push(rho.eval(space.point(i), space.point(j))?);
        }
    }
    Ok(DistanceMatrix {
        n,
        bound: rho.bound(),
        tri,
    })
}

/// Cache key: SHA-256 over the canonical serialization of the generating
/// pair, hex-encoded. Two runs agree on the key exactly when they agree on
/// the space provenance and the semimetric.
pub fn cache_key(provenance: &Provenance, rho: &Semimetric) -> String {
    let blob = serde_json::to_vec(&(provenance, rho)).expect("serializable inputs");
    let digest = Sha256::digest(&blob);
    digest[..16].iter().map(|b| format!("{b:02x}")).collect()
}

pub fn cache_path(dir: &Path, provenance: &Provenance, rho: &Semimetric) -> PathBuf {
    dir.join(format!("{}.dmx", cache_key(provenance, rho)))
}
