//! Profile computation with an on-disk matrix cache.
//!
//! The expensive step of a profile run is evaluating the averaged
//! distance matrices, so those are what get cached. A matrix is keyed by
//! the space provenance (system, sample count, seed, enumeration mode),
//! the base semimetric, and the averaging depth; entropy parameters stay
//! out of the key because the matrix does not depend on them. Cached
//! bytes round-trip bit for bit, so a hit reproduces the uncached grid
//! exactly.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

use scalent_core::{
    averaged_matrix_stream, profile_from_matrices, DistanceMatrix, Estimator, GridProvenance,
    ProfileGrid, Provenance, Semimetric, System, SystemSpec,
};

/// All inputs of one profile run after config and flag merging.
pub struct ProfileRun<'a> {
    pub spec: &'a SystemSpec,
    pub rho: &'a Semimetric,
    pub n_grid: &'a [usize],
    pub eps_grid: &'a [f64],
    pub sample_n: usize,
    pub seed: u64,
    pub enumerate: bool,
    pub estimator: Estimator,
    pub oracle_limit: usize,
}

pub fn matrix_cache_name(provenance: &Provenance, rho: &Semimetric, depth: usize) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_string(provenance).expect("provenance serializes"));
    hasher.update([0u8]);
    hasher.update(serde_json::to_string(rho).expect("semimetric serializes"));
    hasher.update([0u8]);
    hasher.update(depth.to_le_bytes());
    let digest = hasher.finalize();
    let mut name = String::with_capacity(36);
    for byte in &digest[..16] {
        name.push_str(&format!("{byte:02x}"));
    }
    name.push_str(".dmx");
    name
}

/// Computes the profile grid, reading every averaged matrix from
/// `cache_dir` when all depths are present and writing them back after a
/// miss. `None` disables the cache entirely.
pub fn profile_with_cache(run: &ProfileRun, cache_dir: Option<&Path>) -> Result<ProfileGrid> {
    let depth = *run
        .n_grid
        .last()
        .context("n_grid: must be nonempty")?;
    let system = System::build(run.spec, run.sample_n, run.seed, run.enumerate, depth)?;
    let mats = matrices_for(run, &system, cache_dir)?;
    let provenance = GridProvenance {
        system: run.spec.canonical_name(),
        semimetric: serde_json::to_string(run.rho).context("serializing semimetric")?,
        sample_n: system.space.len(),
        seed: run.seed,
        enumerated: run.enumerate,
        oracle_limit: run.oracle_limit,
    };
    let grid = profile_from_matrices(
        &mats,
        system.space.weights(),
        run.n_grid,
        run.eps_grid,
        run.estimator,
        run.oracle_limit,
        provenance,
    )?;
    Ok(grid)
}

fn matrices_for(
    run: &ProfileRun,
    system: &System,
    cache_dir: Option<&Path>,
) -> Result<Vec<DistanceMatrix>> {
    let Some(dir) = cache_dir else {
        return Ok(averaged_matrix_stream(
            &system.space,
            &system.orbit,
            run.rho,
            run.n_grid,
        )?);
    };
    let paths: Vec<PathBuf> = run
        .n_grid
        .iter()
        .map(|&n| dir.join(matrix_cache_name(system.space.provenance(), run.rho, n)))
        .collect();
    if let Some(mats) = read_all(&paths, system.space.len()) {
        return Ok(mats);
    }
    let mats = averaged_matrix_stream(&system.space, &system.orbit, run.rho, run.n_grid)?;
    fs::create_dir_all(dir).with_context(|| format!("creating cache dir {}", dir.display()))?;
    for (mat, path) in mats.iter().zip(&paths) {
        write_matrix_atomic(mat, path)?;
    }
    Ok(mats)
}

/// All-or-nothing read: a single missing or stale entry voids the hit so the
/// grid never mixes cached and fresh matrices.
fn read_all(paths: &[PathBuf], n_points: usize) -> Option<Vec<DistanceMatrix>> {
    let mut mats = Vec::with_capacity(paths.len());
    for path in paths {
        let mat = DistanceMatrix::read_cache(path).ok()?;
        if mat.len() != n_points {
            return None;
        }
        mats.push(mat);
    }
    Some(mats)
}

fn write_matrix_atomic(mat: &DistanceMatrix, path: &Path) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let tmp = tempfile::Builder::new()
        .prefix(".scalent-dmx-")
        .tempfile_in(dir)
        .with_context(|| format!("creating temp file in {}", dir.display()))?;
    mat.write_cache(tmp.path())?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use scalent_core::compute_profile;

    fn demo_run<'a>(
        spec: &'a SystemSpec,
        rho: &'a Semimetric,
        n_grid: &'a [usize],
        eps_grid: &'a [f64],
    ) -> ProfileRun<'a> {
        ProfileRun {
            spec,
            rho,
            n_grid,
            eps_grid,
            sample_n: 5,
            seed: 0,
            enumerate: true,
            estimator: Estimator::Exact,
            oracle_limit: 15,
        }
    }

    #[test]
    fn cache_roundtrip_matches_direct_computation() {
        let spec = SystemSpec::CyclicRotation { q: 5, step: 1 };
        let rho = Semimetric::Arc;
        let n_grid = [1usize, 2];
        let eps_grid = [0.4, 0.2];
        let run = demo_run(&spec, &rho, &n_grid, &eps_grid);
        let direct =
            compute_profile(&spec, &rho, &n_grid, &eps_grid, 5, 0, true, Estimator::Exact, 15)
                .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let cold = profile_with_cache(&run, Some(dir.path())).unwrap();
        let warm = profile_with_cache(&run, Some(dir.path())).unwrap();
        let bypass = profile_with_cache(&run, None).unwrap();
        assert_eq!(direct, cold);
        assert_eq!(cold, warm);
        assert_eq!(cold, bypass);
        let entries = fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(entries, 2);
    }

    #[test]
    fn cache_names_separate_depths_and_seeds() {
        let rho = Semimetric::Arc;
        let p1 = Provenance::Sampled {
            system: "s".into(),
            n: 8,
            seed: 1,
        };
        let p2 = Provenance::Sampled {
            system: "s".into(),
            n: 8,
            seed: 2,
        };
        assert_ne!(matrix_cache_name(&p1, &rho, 3), matrix_cache_name(&p1, &rho, 4));
        assert_ne!(matrix_cache_name(&p1, &rho, 3), matrix_cache_name(&p2, &rho, 3));
        assert_eq!(matrix_cache_name(&p1, &rho, 3), matrix_cache_name(&p1, &rho, 3));
    }
}
