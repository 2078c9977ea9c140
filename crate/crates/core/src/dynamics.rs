//! The system zoo: specs, transformations, sampling, enumeration, orbits,
//! and averaged semimetrics.
//!
//! A `SystemSpec` describes a measure-preserving system; `System::build`
//! turns it into a `SampledSpace` plus an `OrbitTable` of forward
//! iterates. Systems split into two families:
//!
//! * finite exact: the transformation is a weight-preserving permutation
//!   of finitely many atoms (cyclic rotation, cyclic word shift, products
//!   of those). These support exact enumeration and an explicit
//!   `Transformation` value.
//! * sampled-only: the circle rotation (infinitely many atoms), the
//!   windowed word shift, and substitution windows. Windowed systems have
//!   no pointwise map on their finite windows; their orbits come from
//!   longer underlying symbol paths cut at shifted offsets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;
use crate::point::{wrap_unit, Point};
use crate::rng::{draw_index, stream_rng};
use crate::semimetric::Semimetric;
use crate::space::{Provenance, SampledSpace};

use rand::Rng;
use rayon::prelude::*;

/// Hard cap on enumeration size.
pub const ENUM_MAX: u128 = 1 << 20;

/// Position range for substitution window sampling; the fixed-point
/// prefix is grown past this so that window starts are depth-independent.
const SUBSTITUTION_RANGE: u64 = 1 << 16;

/// Default irrational rotation angle, (sqrt 5 - 1) / 2.
pub fn golden_alpha() -> f64 {
    (5.0_f64.sqrt() - 1.0) / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Transformation {
    /// Rotation of the `q`-point grid `{j/q}` by `step/q`. Exact: the
    /// point is snapped to its grid index, stepped in integers, and
    /// re-divided, so `q` applications reproduce the input bitwise.
    GridRotation { q: u64, step: u64 },
    /// Rotation of the circle by `step`, reduced into `[0, 1)`.
    CircleRotation { step: f64 },
    /// Cyclic left shift of a word by one symbol.
    CyclicShift,
    /// Componentwise application to product points.
    Product(Vec<Transformation>),
}

impl Transformation {
    pub fn apply(&self, p: &Point) -> Result<Point> {
        match self {
            Transformation::GridRotation { q, step } => {
                let x = p.as_torus()?;
                let i = (x * *q as f64).round() as u64 % q;
                Ok(Point::Torus(((i + step) % q) as f64 / *q as f64))
            }
            Transformation::CircleRotation { step } => {
                Ok(Point::Torus(wrap_unit(p.as_torus()? + step)))
            }
            Transformation::CyclicShift => {
                let w = p.as_word()?;
                if w.is_empty() {
                    return Ok(Point::Word(Vec::new()));
                }
                let mut out = Vec::with_capacity(w.len());
                out.extend_from_slice(&w[1..]);
                out.push(w[0]);
                Ok(Point::Word(out))
            }
            Transformation::Product(parts) => {
                let coords = p.as_product()?;
                if coords.len() != parts.len() {
                    return Err(Error::ArityMismatch {
                        components: parts.len(),
                        arity: coords.len(),
                    });
                }
                let mapped: Result<Vec<Point>> = parts
                    .iter()
                    .zip(coords)
                    .map(|(t, c)| t.apply(c))
                    .collect();
                Ok(Point::Product(mapped?))
            }
        }
    }

    pub fn apply_iter(&self, p: &Point, times: usize) -> Result<Point> {
        let mut cur = p.clone();
        for _ in 0..times {
            cur = self.apply(&cur)?;
        }
        Ok(cur)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemSpec {
    /// Rotation by `step` on the `q`-point cyclic group; `step` coprime
    /// to `q`.
    CyclicRotation { q: u64, step: u64 },
    /// Rotation of the circle by the irrational `alpha`.
    TorusRotation { alpha: f64 },
    /// Shift over words of length `word_len` with i.i.d. symbol weights.
    /// `cyclic: true` closes the word into a ring, making the shift an
    /// exact permutation of the `alphabet^word_len` atoms; `cyclic: false`
    /// slides a window along a longer sampled path.
    BernoulliShift {
        alphabet: usize,
        probs: Vec<f64>,
        word_len: usize,
        cyclic: bool,
    },
    /// Windows of the substitution fixed point generated from symbol 0.
    /// `rules[s]` is the image of symbol `s`.
    SubstitutionShift { rules: Vec<Vec<u8>>, word_len: usize },
    Product { components: Vec<SystemSpec> },
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl SystemSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            SystemSpec::CyclicRotation { q, step } => {
                if *q == 0 {
                    return Err(Error::InvalidSystem("cyclic rotation needs q >= 1".into()));
                }
                if gcd(step % q.max(&1), *q) != 1 && *q > 1 {
                    return Err(Error::InvalidSystem(format!(
                        "step {step} is not coprime to q = {q}"
                    )));
                }
                Ok(())
            }
            SystemSpec::TorusRotation { alpha } => {
                if !alpha.is_finite() {
                    return Err(Error::InvalidSystem(format!(
                        "rotation angle must be finite, got {alpha}"
                    )));
                }
                Ok(())
            }
            SystemSpec::BernoulliShift {
                alphabet,
                probs,
                word_len,
                ..
            } => {
                if *alphabet == 0 || *alphabet > 256 {
                    return Err(Error::InvalidSystem(format!(
                        "alphabet size {alphabet} outside 1..=256"
                    )));
                }
                if probs.len() != *alphabet {
                    return Err(Error::InvalidSystem(format!(
                        "{} probabilities for alphabet of size {alphabet}",
                        probs.len()
                    )));
                }
                for (index, &p) in probs.iter().enumerate() {
                    if !(p > 0.0) || !p.is_finite() {
                        return Err(Error::NonPositiveWeight { index, value: p });
                    }
                }
                let sum: f64 = probs.iter().sum();
                if (sum - 1.0).abs() > crate::space::WEIGHT_SUM_TOL {
                    return Err(Error::WeightSum {
                        sum,
                        tol: crate::space::WEIGHT_SUM_TOL,
                    });
                }
                if *word_len == 0 {
                    return Err(Error::InvalidSystem("word length must be >= 1".into()));
                }
                Ok(())
            }
            SystemSpec::SubstitutionShift { rules, word_len } => {
                if rules.is_empty() || rules.len() > 256 {
                    return Err(Error::InvalidSystem(format!(
                        "{} substitution rules outside 1..=256",
                        rules.len()
                    )));
                }
                for (s, rule) in rules.iter().enumerate() {
                    if rule.is_empty() {
                        return Err(Error::InvalidSystem(format!(
                            "rule for symbol {s} is empty"
                        )));
                    }
                    for &t in rule {
                        if t as usize >= rules.len() {
                            return Err(Error::InvalidSystem(format!(
                                "rule for symbol {s} uses symbol {t} outside the alphabet"
                            )));
                        }
                    }
                }
                // The fixed point grows from symbol 0, so its rule must be
                // prolongable: start with 0 and strictly expand.
                if rules[0].first() != Some(&0) || rules[0].len() < 2 {
                    return Err(Error::InvalidSystem(
                        "rule for symbol 0 must start with 0 and have length >= 2".into(),
                    ));
                }
                if *word_len == 0 {
                    return Err(Error::InvalidSystem("window length must be >= 1".into()));
                }
                Ok(())
            }
            SystemSpec::Product { components } => {
                if components.len() < 2 {
                    return Err(Error::InvalidSystem(format!(
                        "product needs >= 2 components, got {}",
                        components.len()
                    )));
                }
                for c in components {
                    c.validate()?;
                }
                Ok(())
            }
        }
    }

    /// True when the transformation is a weight-preserving permutation of
    /// finitely many atoms.
    pub fn finite_exact(&self) -> bool {
        match self {
            SystemSpec::CyclicRotation { .. } => true,
            SystemSpec::BernoulliShift { cyclic, .. } => *cyclic,
            SystemSpec::Product { components } => {
                components.iter().all(SystemSpec::finite_exact)
            }
            _ => false,
        }
    }

    pub fn atom_count(&self) -> Result<u128> {
        let count = match self {
            SystemSpec::CyclicRotation { q, .. } => *q as u128,
            SystemSpec::BernoulliShift {
                alphabet,
                word_len,
                cyclic,
                ..
            } => {
                if !cyclic {
                    return Err(Error::NotEnumerable(
                        "windowed shift over an unbounded path".into(),
                    ));
                }
                let mut c: u128 = 1;
                for _ in 0..*word_len {
                    c = c.checked_mul(*alphabet as u128).ok_or(Error::AtomLimit {
                        atoms: u128::MAX,
                        limit: ENUM_MAX,
                    })?;
                    if c > ENUM_MAX {
                        return Err(Error::AtomLimit {
                            atoms: c,
                            limit: ENUM_MAX,
                        });
                    }
                }
                c
            }
            SystemSpec::Product { components } => {
                let mut c: u128 = 1;
                for comp in components {
                    c = c.checked_mul(comp.atom_count()?).ok_or(Error::AtomLimit {
                        atoms: u128::MAX,
                        limit: ENUM_MAX,
                    })?;
                    if c > ENUM_MAX {
                        return Err(Error::AtomLimit {
                            atoms: c,
                            limit: ENUM_MAX,
                        });
                    }
                }
                c
            }
            SystemSpec::TorusRotation { .. } => {
                return Err(Error::NotEnumerable("circle rotation".into()))
            }
            SystemSpec::SubstitutionShift { .. } => {
                return Err(Error::NotEnumerable("substitution windows".into()))
            }
        };
        if count > ENUM_MAX {
            return Err(Error::AtomLimit {
                atoms: count,
                limit: ENUM_MAX,
            });
        }
        Ok(count)
    }

    /// The pointwise map, for systems that have one. Windowed systems
    /// return None: their orbits exist only through the underlying path.
    pub fn transformation(&self) -> Option<Transformation> {
        match self {
            SystemSpec::CyclicRotation { q, step } => {
                Some(Transformation::GridRotation { q: *q, step: *step })
            }
            SystemSpec::TorusRotation { alpha } => {
                Some(Transformation::CircleRotation { step: *alpha })
            }
            SystemSpec::BernoulliShift { cyclic: true, .. } => Some(Transformation::CyclicShift),
            SystemSpec::BernoulliShift { cyclic: false, .. } => None,
            SystemSpec::SubstitutionShift { .. } => None,
            SystemSpec::Product { components } => {
                let parts: Option<Vec<Transformation>> =
                    components.iter().map(SystemSpec::transformation).collect();
                parts.map(Transformation::Product)
            }
        }
    }

    /// Canonical name used in provenance records and cache keys.
    pub fn canonical_name(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }
}

/// Forward iterates `T^k x_i` for `k < depth`, one column per power.
#[derive(Debug, Clone)]
pub struct OrbitTable {
    /// `iterates[k][i] = T^k x_i`; `iterates[0]` is the sample itself.
    iterates: Vec<Vec<Point>>,
}

impl OrbitTable {
    pub fn depth(&self) -> usize {
        self.iterates.len()
    }

    pub fn column(&self, k: usize) -> &[Point] {
        &self.iterates[k]
    }

    pub fn require_depth(&self, need: usize) -> Result<()> {
        if self.depth() < need {
            return Err(Error::OrbitDepth {
                need,
                have: self.depth(),
            });
        }
        Ok(())
    }

    fn from_map(points: &[Point], map: &Transformation, depth: usize) -> Result<OrbitTable> {
        let mut iterates = Vec::with_capacity(depth.max(1));
        iterates.push(points.to_vec());
        for k in 1..depth.max(1) {
            let prev = &iterates[k - 1];
            let next: Result<Vec<Point>> = prev.iter().map(|p| map.apply(p)).collect();
            iterates.push(next?);
        }
        Ok(OrbitTable { iterates })
    }
}

/// A realized system: the sampled or enumerated space plus its orbit.
#[derive(Debug, Clone)]
pub struct System {
    pub spec: SystemSpec,
    pub space: SampledSpace,
    pub orbit: OrbitTable,
}

/// Per-point orbit rows of one component before weights are attached:
/// `rows[i][k] = T^k x_i`.
type OrbitRows = Vec<Vec<Point>>;

/// Draws `n` orbit rows of depth `depth` for one spec node. `stream`
/// numbers sampling sites depth-first so product components consume
/// independent, order-independent randomness.
fn sample_rows(
    spec: &SystemSpec,
    n: usize,
    seed: u64,
    depth: usize,
    stream: &mut u64,
) -> Result<OrbitRows> {
    let depth = depth.max(1);
    match spec {
        SystemSpec::CyclicRotation { q, step } => {
            let mut rng = stream_rng(seed, *stream);
            *stream += 1;
            let map = Transformation::GridRotation { q: *q, step: *step };
            (0..n)
                .map(|_| {
                    let i = rng.gen_range(0..*q);
                    orbit_row(Point::Torus(i as f64 / *q as f64), &map, depth)
                })
                .collect()
        }
        SystemSpec::TorusRotation { alpha } => {
            let mut rng = stream_rng(seed, *stream);
            *stream += 1;
            let map = Transformation::CircleRotation { step: *alpha };
            (0..n)
                .map(|_| orbit_row(Point::Torus(rng.gen::<f64>()), &map, depth))
                .collect()
        }
        SystemSpec::BernoulliShift {
            probs,
            word_len,
            cyclic,
            ..
        } => {
            let mut rng = stream_rng(seed, *stream);
            *stream += 1;
            if *cyclic {
                (0..n)
                    .map(|_| {
                        let w: Vec<u8> =
                            (0..*word_len).map(|_| draw_index(&mut rng, probs) as u8).collect();
                        orbit_row(Point::Word(w), &Transformation::CyclicShift, depth)
                    })
                    .collect()
            } else {
                // A window of length L shifted depth - 1 times needs
                // L + depth - 1 underlying symbols.
                let path_len = word_len + depth - 1;
                Ok((0..n)
                    .map(|_| {
                        let path: Vec<u8> =
                            (0..path_len).map(|_| draw_index(&mut rng, probs) as u8).collect();
                        (0..depth)
                            .map(|k| Point::Word(path[k..k + word_len].to_vec()))
                            .collect()
                    })
                    .collect())
            }
        }
        SystemSpec::SubstitutionShift { rules, word_len } => {
            let mut rng = stream_rng(seed, *stream);
            *stream += 1;
            let need = SUBSTITUTION_RANGE as usize + word_len + depth;
            let prefix = substitution_prefix(rules, need)?;
            Ok((0..n)
                .map(|_| {
                    let p = rng.gen_range(0..SUBSTITUTION_RANGE) as usize;
                    (0..depth)
                        .map(|k| Point::Word(prefix[p + k..p + k + word_len].to_vec()))
                        .collect()
                })
                .collect())
        }
        SystemSpec::Product { components } => {
            let per_component: Result<Vec<OrbitRows>> = components
                .iter()
                .map(|c| sample_rows(c, n, seed, depth, stream))
                .collect();
            let per_component = per_component?;
            Ok((0..n)
                .map(|i| {
                    (0..depth)
                        .map(|k| {
                            Point::Product(
                                per_component.iter().map(|rows| rows[i][k].clone()).collect(),
                            )
                        })
                        .collect()
                })
                .collect())
        }
    }
}

fn orbit_row(start: Point, map: &Transformation, depth: usize) -> Result<Vec<Point>> {
    let mut row = Vec::with_capacity(depth);
    row.push(start);
    for k in 1..depth {
        let next = map.apply(&row[k - 1])?;
        row.push(next);
    }
    Ok(row)
}

/// Fixed-point prefix of the substitution, at least `need` symbols.
fn substitution_prefix(rules: &[Vec<u8>], need: usize) -> Result<Vec<u8>> {
    let mut word = vec![0u8];
    while word.len() < need {
        let before = word.len();
        let mut next = Vec::with_capacity(word.len() * 2);
        for &s in &word {
            next.extend_from_slice(&rules[s as usize]);
        }
        word = next;
        if word.len() == before {
            return Err(Error::InvalidSystem(
                "substitution does not grow; fixed point is finite".into(),
            ));
        }
    }
    Ok(word)
}

/// Enumerated atoms and exact weights of a finite exact system.
fn enumerate_atoms(spec: &SystemSpec) -> Result<(Vec<Point>, Vec<f64>)> {
    match spec {
        SystemSpec::CyclicRotation { q, .. } => {
            let w = 1.0 / *q as f64;
            Ok((
                (0..*q).map(|i| Point::Torus(i as f64 / *q as f64)).collect(),
                vec![w; *q as usize],
            ))
        }
        SystemSpec::BernoulliShift {
            alphabet,
            probs,
            word_len,
            cyclic,
        } => {
            if !cyclic {
                return Err(Error::NotEnumerable(
                    "windowed shift over an unbounded path".into(),
                ));
            }
            let count = spec.atom_count()? as usize;
            let a = *alphabet;
            let l = *word_len;
            let mut points = Vec::with_capacity(count);
            let mut weights = Vec::with_capacity(count);
            for idx in 0..count {
                let mut word = vec![0u8; l];
                let mut rest = idx;
                // Big-endian digits: word[0] is the most significant.
                for pos in (0..l).rev() {
                    word[pos] = (rest % a) as u8;
                    rest /= a;
                }
                weights.push(word_weight(&word, probs, l));
                points.push(Point::Word(word));
            }
            Ok((points, weights))
        }
        SystemSpec::Product { components } => {
            let parts: Result<Vec<(Vec<Point>, Vec<f64>)>> =
                components.iter().map(enumerate_atoms).collect();
            let parts = parts?;
            let count = spec.atom_count()? as usize;
            let mut points = Vec::with_capacity(count);
            let mut weights = Vec::with_capacity(count);
            let mut index = vec![0usize; parts.len()];
            loop {
                let mut coords = Vec::with_capacity(parts.len());
                let mut w = 1.0;
                for (c, (pts, ws)) in parts.iter().enumerate() {
                    coords.push(pts[index[c]].clone());
                    w *= ws[index[c]];
                }
                points.push(Point::Product(coords));
                weights.push(w);
                // Row-major advance: last component fastest.
                let mut c = parts.len();
                loop {
                    if c == 0 {
                        return Ok((points, weights));
                    }
                    c -= 1;
                    index[c] += 1;
                    if index[c] < parts[c].0.len() {
                        break;
                    }
                    index[c] = 0;
                }
            }
        }
        other => Err(Error::NotEnumerable(other.canonical_name())),
    }
}

/// Weight of a word under i.i.d. symbol probabilities, computed from
/// symbol counts so that words with equal counts get bitwise equal
/// weights (cyclic shifts in particular).
fn word_weight(word: &[u8], probs: &[f64], _len: usize) -> f64 {
    let mut counts = vec![0u32; probs.len()];
    for &s in word {
        counts[s as usize] += 1;
    }
    let mut w = 1.0;
    for (s, &c) in counts.iter().enumerate() {
        for _ in 0..c {
            w *= probs[s];
        }
    }
    w
}

/// Draws `n` i.i.d. points from the invariant measure. Enumerate mode
/// instead returns every atom of a finite exact system with its exact
/// weight, provided `n` does not exceed the atom count.
pub fn sample_space(
    spec: &SystemSpec,
    n: usize,
    seed: u64,
    enumerate: bool,
) -> Result<SampledSpace> {
    Ok(System::build(spec, n, seed, enumerate, 1)?.space)
}

impl System {
    /// Realizes the system: validates the spec, samples or enumerates the
    /// space, and fills the orbit table to `depth` columns.
    pub fn build(
        spec: &SystemSpec,
        n: usize,
        seed: u64,
        enumerate: bool,
        depth: usize,
    ) -> Result<System> {
        spec.validate()?;
        let depth = depth.max(1);
        if enumerate {
            let atoms = spec.atom_count()?;
            if n as u128 > atoms {
                return Err(Error::EnumerationSize {
                    requested: n,
                    atoms: atoms as usize,
                });
            }
            let (points, weights) = enumerate_atoms(spec)?;
            let provenance = Provenance::Enumerated {
                system: spec.canonical_name(),
            };
            let space = SampledSpace::new(points, weights, provenance)?;
            let map = spec
                .transformation()
                .expect("finite exact systems have a map");
            let orbit = OrbitTable::from_map(space.points(), &map, depth)?;
            return Ok(System {
                spec: spec.clone(),
                space,
                orbit,
            });
        }
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        let mut stream = 0u64;
        let rows = sample_rows(spec, n, seed, depth, &mut stream)?;
        let points: Vec<Point> = rows.iter().map(|r| r[0].clone()).collect();
        let provenance = Provenance::Sampled {
            system: spec.canonical_name(),
            n,
            seed,
        };
        let space = SampledSpace::uniform(points, provenance)?;
        let mut iterates = Vec::with_capacity(depth);
        for k in 0..depth {
            iterates.push(rows.iter().map(|r| r[k].clone()).collect());
        }
        Ok(System {
            spec: spec.clone(),
            space,
            orbit: OrbitTable { iterates },
        })
    }
}

/// `(1/n) sum_{k<n} rho(T^k x, T^k y)` as a semimetric value.
pub fn averaged_semimetric(rho: Semimetric, map: Transformation, n: usize) -> Semimetric {
    Semimetric::Averaged {
        base: Box::new(rho),
        map,
        depth: n,
    }
}

/// `rho(T^j x, T^j y)` as a semimetric value.
pub fn shifted_semimetric(rho: Semimetric, map: Transformation, j: usize) -> Semimetric {
    Semimetric::Shifted {
        base: Box::new(rho),
        map,
        offset: j,
    }
}

/// Averaged distance matrices for every `n` in `n_grid`, computed in one
/// pass over the orbit: per-pair sums accumulate in ascending `k` and are
/// divided at each requested depth, so entry `(i, j)` is bit-identical to
/// evaluating the averaged semimetric directly along the same orbit.
pub fn averaged_matrix_stream(
    space: &SampledSpace,
    orbit: &OrbitTable,
    base: &Semimetric,
    n_grid: &[usize],
) -> Result<Vec<DistanceMatrix>> {
    let &max_n = n_grid.iter().max().ok_or(Error::EmptySpace)?;
    if n_grid.iter().any(|&n| n == 0) {
        return Err(Error::InvalidSystem("averaging depth 0 requested".into()));
    }
    orbit.require_depth(max_n)?;
    let n_points = space.len();
    let tri_len = n_points * (n_points + 1) / 2;
    let mut acc = vec![0.0f64; tri_len];
    let mut out = Vec::with_capacity(n_grid.len());
    let mut sorted: Vec<usize> = n_grid.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut next = 0usize;
    for k in 0..max_n {
        let col = orbit.column(k);
        let deltas: Vec<Result<Vec<f64>>> = (0..n_points)
            .into_par_iter()
            .map(|i| (0..=i).map(|j| base.eval(&col[i], &col[j])).collect())
            .collect();
        let mut idx = 0usize;
        for row in deltas {
            for v in row? {
                acc[idx] += v;
                idx += 1;
            }
        }
        while next < sorted.len() && sorted[next] == k + 1 {
            let n = sorted[next];
            let tri: Vec<f64> = acc.iter().map(|&s| s / n as f64).collect();
            out.push(DistanceMatrix::from_triangle(n_points, base.bound(), tri)?);
            next += 1;
        }
    }
    // Emit in the caller's grid order.
    let by_n: std::collections::HashMap<usize, DistanceMatrix> =
        sorted.iter().cloned().zip(out).collect();
    Ok(n_grid.iter().map(|n| by_n[n].clone()).collect())
}
