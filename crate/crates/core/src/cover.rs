//! Epsilon-entropy of a finite weighted semimetric space.
//!
//! A cover splits the points into an error cell 0 of mass strictly below
//! `epsilon` and cells `1..=k` of diameter strictly below `epsilon`; the
//! entropy is `log2` of the minimal `k`. Comparisons are exactly strict on
//! the stored doubles, with no tolerance slack.
//!
//! The exact oracle rewrites minimality as an outlier-budgeted clique
//! cover of the compatibility graph (edges where distance < epsilon):
//!
//! 1. collapse points with entrywise identical matrix rows (moving such a
//!    point between cells never changes a diameter, so the minimum is
//!    preserved);
//! 2. split the graph into connected components, solve each by a subset
//!    DP over clique covers, and combine per-component outlier/cell
//!    trade-offs with a small knapsack;
//! 3. when a component is too large for the DP, fall back to iterative
//!    deepening over the global cell count with clique branching.
//!
//! Mass decisions that feed strict budget comparisons go through
//! `mass_of` so every caller sums weights in one canonical order; search
//! internals may use faster running sums, but any cover accepted as final
//! is re-confirmed canonically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;
use crate::space::mass_of;

/// Default cap on post-collapse instance size for the exact oracle.
pub const DEFAULT_ORACLE_LIMIT: usize = 15;
/// Absolute cap; above this the search space is out of desk range.
pub const HARD_ORACLE_LIMIT: usize = 64;
/// Components up to this size go through the subset DP.
const DP_COMPONENT_CAP: usize = 16;
/// Node budget shared by one exact call's deepening searches.
const SEARCH_NODE_BUDGET: u64 = 50_000_000;
/// Infeasibility prunes keep this slack so float drift cannot cut a
/// feasible branch.
const PRUNE_SLACK: f64 = 1e-9;
/// Greedy ball radius shrink factor per retry.
const RADIUS_SHRINK: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Exact,
    Greedy,
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Estimator::Exact => "exact",
            Estimator::Greedy => "greedy",
        })
    }
}

/// Cell assignment: `assignment[i] = 0` puts point `i` in the error cell,
/// values `1..=k` name the diameter-bounded cells. Cells may be empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cover {
    pub assignment: Vec<usize>,
    pub k: usize,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyValue {
    pub k: usize,
    pub h_bits: f64,
    pub estimator: Estimator,
    pub cover: Cover,
}

impl EntropyValue {
    fn new(k: usize, estimator: Estimator, cover: Cover) -> EntropyValue {
        EntropyValue {
            k,
            h_bits: (k as f64).log2(),
            estimator,
            cover,
        }
    }
}

/// Strict validity: error mass < epsilon and every positive cell has all
/// pairwise distances < epsilon. Assignment length and cell range are
/// part of validity.
pub fn is_valid_cover(
    cover: &Cover,
    matrix: &DistanceMatrix,
    weights: &[f64],
    epsilon: f64,
) -> bool {
    let n = matrix.len();
    if cover.assignment.len() != n || weights.len() != n {
        return false;
    }
    if cover.assignment.iter().any(|&c| c > cover.k) {
        return false;
    }
    let error_cell: Vec<usize> = (0..n).filter(|&i| cover.assignment[i] == 0).collect();
    if !(mass_of(weights, error_cell) < epsilon) {
        return false;
    }
    for cell in 1..=cover.k {
        let members: Vec<usize> = (0..n).filter(|&i| cover.assignment[i] == cell).collect();
        for a in 0..members.len() {
            for b in a + 1..members.len() {
                if !(matrix.get(members[a], members[b]) < epsilon) {
                    return false;
                }
            }
        }
    }
    true
}

fn check_inputs(matrix: &DistanceMatrix, weights: &[f64], epsilon: f64) -> Result<()> {
    if weights.len() != matrix.len() {
        return Err(Error::MatrixSizeMismatch {
            n: matrix.len(),
            expected: weights.len(),
        });
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    Ok(())
}

/// Points with entrywise equal matrix rows, grouped. Such points are
/// interchangeable in any cover: every distance to every third point
/// agrees, so moving one to its classmates' cell changes no diameter and
/// never increases the error mass.
struct Collapsed {
    /// Original indices per class, each ascending; classes ordered by
    /// their smallest member.
    members: Vec<Vec<usize>>,
    /// Canonical mass per class.
    class_w: Vec<f64>,
    /// Representative index per class.
    reps: Vec<usize>,
}

fn collapse(matrix: &DistanceMatrix, weights: &[f64]) -> Collapsed {
    let n = matrix.len();
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut reps: Vec<usize> = Vec::new();
    'outer: for i in 0..n {
        for (c, &r) in reps.iter().enumerate() {
            if (0..n).all(|z| matrix.get(i, z) == matrix.get(r, z)) {
                members[c].push(i);
                continue 'outer;
            }
        }
        reps.push(i);
        members.push(vec![i]);
    }
    let class_w = members
        .iter()
        .map(|m| mass_of(weights, m.iter().cloned()))
        .collect();
    Collapsed {
        members,
        class_w,
        reps,
    }
}

/// Per-class solution: 0 for the error cell, `1..=k` for cells.
struct ClassCover {
    cells: Vec<usize>,
    k: usize,
}

pub fn exact_entropy(
    matrix: &DistanceMatrix,
    weights: &[f64],
    epsilon: f64,
) -> Result<EntropyValue> {
    exact_entropy_limited(matrix, weights, epsilon, DEFAULT_ORACLE_LIMIT)
}

pub fn exact_entropy_limited(
    matrix: &DistanceMatrix,
    weights: &[f64],
    epsilon: f64,
    oracle_limit: usize,
) -> Result<EntropyValue> {
    check_inputs(matrix, weights, epsilon)?;
    let collapsed = collapse(matrix, weights);
    let m = collapsed.reps.len();
    let effective_limit = oracle_limit.min(HARD_ORACLE_LIMIT);
    if m > effective_limit {
        return Err(Error::OracleLimit {
            effective: m,
            limit: effective_limit,
        });
    }

    // Compatibility graph on classes: edge iff distance < epsilon.
    let adj: Vec<u64> = (0..m)
        .map(|a| {
            let mut mask = 0u64;
            for b in 0..m {
                if b != a && matrix.get(collapsed.reps[a], collapsed.reps[b]) < epsilon {
                    mask |= 1 << b;
                }
            }
            mask
        })
        .collect();

    let components = connected_components(m, &adj);
    let solution = if components.iter().all(|c| c.len() <= DP_COMPONENT_CAP) {
        solve_by_components(&collapsed, &adj, &components, weights, epsilon)?
    } else {
        solve_by_search(&collapsed, &adj, weights, epsilon)?
    };

    let mut assignment = vec![0usize; matrix.len()];
    for (class, cell) in solution.cells.iter().enumerate() {
        for &i in &collapsed.members[class] {
            assignment[i] = *cell;
        }
    }
    let k = solution.k.max(1);
    let cover = Cover {
        assignment,
        k,
        epsilon,
    };
    debug_assert!(is_valid_cover(&cover, matrix, weights, epsilon));
    Ok(EntropyValue::new(k, Estimator::Exact, cover))
}

fn connected_components(m: usize, adj: &[u64]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; m];
    let mut out = Vec::new();
    for start in 0..m {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let mut comp = Vec::new();
        while let Some(v) = stack.pop() {
            comp.push(v);
            for u in 0..m {
                if adj[v] >> u & 1 == 1 && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Outlier trade-off of one component: for each cell budget `k`, the
/// lightest class set whose removal leaves a graph coverable by `k`
/// cliques.
struct Frontier {
    /// `sets[k]` = original indices (ascending) of the outliers chosen
    /// for cell budget `k`.
    sets: Vec<Vec<usize>>,
}

fn component_frontier(
    comp: &[usize],
    adj: &[u64],
    collapsed: &Collapsed,
) -> (Frontier, CliqueTables) {
    let s = comp.len();
    let full: usize = (1usize << s) - 1;
    // Local adjacency restricted to the component.
    let local: Vec<usize> = comp
        .iter()
        .map(|&v| {
            let mut mask = 0usize;
            for (bj, &u) in comp.iter().enumerate() {
                if adj[v] >> u & 1 == 1 {
                    mask |= 1 << bj;
                }
            }
            mask
        })
        .collect();
    let tables = clique_cover_tables(s, &local);

    // Class-weight sums per subset, summed in ascending-bit order by
    // peeling the highest bit. Used only to pick frontier candidates;
    // final budget checks re-sum canonically.
    let mut wsum = vec![0.0f64; full + 1];
    for mask in 1..=full {
        let high = usize::BITS - 1 - mask.leading_zeros();
        wsum[mask] = wsum[mask & !(1 << high)] + collapsed.class_w[comp[high as usize]];
    }

    let mut best_mass = vec![f64::INFINITY; s + 1];
    let mut best_mask = vec![usize::MAX; s + 1];
    for outliers in 0..=full {
        let k = tables.cc[full & !outliers] as usize;
        let mass = wsum[outliers];
        if mass < best_mass[k] || (mass == best_mass[k] && outliers < best_mask[k]) {
            best_mass[k] = mass;
            best_mask[k] = outliers;
        }
    }
    // A budget of k cells also admits any cover needing fewer cells.
    for k in 1..=s {
        if best_mass[k - 1] < best_mass[k]
            || (best_mass[k - 1] == best_mass[k] && best_mask[k - 1] < best_mask[k])
        {
            best_mass[k] = best_mass[k - 1];
            best_mask[k] = best_mask[k - 1];
        }
    }
    let sets = (0..=s)
        .map(|k| {
            let mut idx: Vec<usize> = (0..s)
                .filter(|b| best_mask[k] >> b & 1 == 1)
                .flat_map(|b| collapsed.members[comp[b]].iter().cloned())
                .collect();
            idx.sort_unstable();
            idx
        })
        .collect();
    (Frontier { sets }, tables)
}

struct CliqueTables {
    cliq: Vec<bool>,
    cc: Vec<u8>,
}

/// Subset DP over one component: `cc[mask]` is the minimal number of
/// cliques covering `mask`, built by always covering the lowest vertex.
fn clique_cover_tables(s: usize, local: &[usize]) -> CliqueTables {
    let full: usize = (1usize << s) - 1;
    let mut cliq = vec![false; full + 1];
    cliq[0] = true;
    for mask in 1..=full {
        let v = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        cliq[mask] = cliq[rest] && rest & !local[v] == 0;
    }
    let mut cc = vec![u8::MAX; full + 1];
    cc[0] = 0;
    for mask in 1..=full {
        let v = mask.trailing_zeros() as usize;
        let nv = mask & local[v];
        let mut best = u8::MAX;
        let mut sub = nv;
        loop {
            let cell = sub | (1 << v);
            if cliq[cell] {
                best = best.min(cc[mask & !cell]);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & nv;
        }
        cc[mask] = best + 1;
    }
    CliqueTables { cliq, cc }
}

/// Walks the cc table, emitting the cliques of one minimal cover of
/// `mask` in a fixed order.
fn extract_cliques(local: &[usize], tables: &CliqueTables, mask: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut rest = mask;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        let nv = rest & local[v];
        let target = tables.cc[rest] - 1;
        let mut sub = nv;
        let chosen = loop {
            let cell = sub | (1 << v);
            if tables.cliq[cell] && tables.cc[rest & !cell] == target {
                break cell;
            }
            if sub == 0 {
                unreachable!("cc table admits a cover");
            }
            sub = (sub - 1) & nv;
        };
        out.push(chosen);
        rest &= !chosen;
    }
    out
}

fn solve_by_components(
    collapsed: &Collapsed,
    adj: &[u64],
    components: &[Vec<usize>],
    weights: &[f64],
    epsilon: f64,
) -> Result<ClassCover> {
    let m = collapsed.reps.len();
    let mut frontiers = Vec::with_capacity(components.len());
    let mut all_tables = Vec::with_capacity(components.len());
    for comp in components {
        let (f, t) = component_frontier(comp, adj, collapsed);
        frontiers.push(f);
        all_tables.push(t);
    }

    // Knapsack over components: dp[k] = lightest outlier set achievable
    // with k cells total, compared by the canonical mass.
    #[derive(Clone)]
    struct State {
        set: Vec<usize>,
        allocs: Vec<usize>,
    }
    let mut dp: Vec<Option<State>> = vec![None; m + 1];
    dp[0] = Some(State {
        set: Vec::new(),
        allocs: Vec::new(),
    });
    for (c, frontier) in frontiers.iter().enumerate() {
        let cap = components[c].len();
        let mut next: Vec<Option<State>> = vec![None; m + 1];
        for k in 0..=m {
            let Some(prev) = &dp[k] else { continue };
            for kc in 0..=cap.min(m - k) {
                let mut set = prev.set.clone();
                set.extend_from_slice(&frontier.sets[kc]);
                set.sort_unstable();
                let mass = mass_of(weights, set.iter().cloned());
                let slot = &mut next[k + kc];
                let better = match slot {
                    None => true,
                    Some(cur) => {
                        let cur_mass = mass_of(weights, cur.set.iter().cloned());
                        mass < cur_mass || (mass == cur_mass && set < cur.set)
                    }
                };
                if better {
                    let mut allocs = prev.allocs.clone();
                    allocs.push(kc);
                    *slot = Some(State { set, allocs });
                }
            }
        }
        dp = next;
    }

    for k in 0..=m {
        let Some(state) = &dp[k] else { continue };
        if !(mass_of(weights, state.set.iter().cloned()) < epsilon) {
            continue;
        }
        // Feasible: rebuild the per-component cells.
        let mut cells = vec![0usize; m];
        let mut next_cell = 1usize;
        for (c, comp) in components.iter().enumerate() {
            let s = comp.len();
            let full = (1usize << s) - 1;
            let kc = state.allocs[c];
            let local: Vec<usize> = comp
                .iter()
                .map(|&v| {
                    let mut mask = 0usize;
                    for (bj, &u) in comp.iter().enumerate() {
                        if adj[v] >> u & 1 == 1 {
                            mask |= 1 << bj;
                        }
                    }
                    mask
                })
                .collect();
            // Recover the chosen outlier mask from its index set.
            let mut outlier_mask = 0usize;
            for (b, &v) in comp.iter().enumerate() {
                if frontiers[c].sets[kc]
                    .binary_search(&collapsed.members[v][0])
                    .is_ok()
                {
                    outlier_mask |= 1 << b;
                }
            }
            for clique in extract_cliques(&local, &all_tables[c], full & !outlier_mask) {
                for b in 0..s {
                    if clique >> b & 1 == 1 {
                        cells[comp[b]] = next_cell;
                    }
                }
                next_cell += 1;
            }
        }
        return Ok(ClassCover {
            cells,
            k: next_cell - 1,
        });
    }
    unreachable!("k = m with every class a singleton cell is always feasible");
}

/// Node budget for the exact max-clique bound before falling back to
/// the coloring bound.
const CLIQUE_BOUND_BUDGET: u64 = 2_000_000;

/// Sound upper bound on clique mass by greedy partition into
/// independent sets: a clique meets each set at most once, so its mass
/// is at most the sum of per-set maxima.
fn clique_mass_coloring_bound(m: usize, adj: &[u64], class_w: &[f64]) -> f64 {
    let mut avail = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let mut bound = 0.0;
    while avail != 0 {
        let mut set_max = 0.0f64;
        let mut blocked = 0u64;
        let mut rest = avail;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if blocked >> v & 1 == 0 {
                set_max = set_max.max(class_w[v]);
                avail &= !(1u64 << v);
                blocked |= adj[v];
            }
        }
        bound += set_max;
    }
    bound
}

/// Upper bound on clique mass over class-weight sums: exact branch and
/// bound within a node budget, otherwise the coloring bound. Soundness
/// as an upper bound is what the prunes rely on.
fn max_clique_mass(m: usize, adj: &[u64], class_w: &[f64]) -> f64 {
    fn total(mask: u64, class_w: &[f64]) -> f64 {
        let mut t = 0.0;
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            t += class_w[v];
            rest &= rest - 1;
        }
        t
    }
    fn bb(
        cand: u64,
        cur: f64,
        best: &mut f64,
        adj: &[u64],
        class_w: &[f64],
        nodes: &mut u64,
    ) -> bool {
        if *nodes >= CLIQUE_BOUND_BUDGET {
            return false;
        }
        *nodes += 1;
        if cur > *best {
            *best = cur;
        }
        let mut rest = cand;
        while rest != 0 {
            if cur + total(rest, class_w) <= *best {
                return true;
            }
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if !bb(rest & adj[v], cur + class_w[v], best, adj, class_w, nodes) {
                return false;
            }
        }
        true
    }
    let mut best = 0.0;
    let mut nodes = 0u64;
    let all = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    if bb(all, 0.0, &mut best, adj, class_w, &mut nodes) {
        best
    } else {
        clique_mass_coloring_bound(m, adj, class_w)
    }
}

/// Lower bound on the cell count: members of an independent set must
/// occupy distinct cells except for those the error budget absorbs.
fn independent_set_bound(
    m: usize,
    adj: &[u64],
    collapsed: &Collapsed,
    weights: &[f64],
    epsilon: f64,
) -> usize {
    let mut avail = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let mut indep: Vec<usize> = Vec::new();
    while avail != 0 {
        let v = avail.trailing_zeros() as usize;
        indep.push(v);
        avail &= !(adj[v] | (1 << v));
    }
    let mut by_weight = indep.clone();
    by_weight.sort_by(|a, b| {
        collapsed.class_w[*a]
            .partial_cmp(&collapsed.class_w[*b])
            .unwrap()
            .then(a.cmp(b))
    });
    let mut removed = 0usize;
    let mut pool: Vec<usize> = Vec::new();
    for &v in &by_weight {
        let mut candidate = pool.clone();
        candidate.extend(collapsed.members[v].iter().cloned());
        candidate.sort_unstable();
        if mass_of(weights, candidate.iter().cloned()) < epsilon {
            pool = candidate;
            removed += 1;
        } else {
            break;
        }
    }
    indep.len().saturating_sub(removed)
}

struct SearchCtx<'a> {
    adj: &'a [u64],
    collapsed: &'a Collapsed,
    weights: &'a [f64],
    epsilon: f64,
    mstar: f64,
    nodes: u64,
}

impl<'a> SearchCtx<'a> {
    fn orig_mass(&self, class_mask: u64) -> f64 {
        let mut idx: Vec<usize> = Vec::new();
        let mut rest = class_mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            idx.extend(self.collapsed.members[v].iter().cloned());
        }
        idx.sort_unstable();
        mass_of(self.weights, idx)
    }

    /// Feasibility of covering `remaining` with at most `k_left` cells
    /// given outliers so far; on success fills `cells` and the final
    /// outlier mask.
    fn search(
        &mut self,
        remaining: u64,
        k_left: usize,
        out_mask: u64,
        out_sum: f64,
        rem_sum: f64,
        cells: &mut Vec<u64>,
        final_out: &mut u64,
    ) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > SEARCH_NODE_BUDGET {
            return Err(Error::SearchBudget {
                component: self.adj.len(),
            });
        }
        // Running sums steer the search; the canonical sum decides.
        if out_sum + rem_sum < self.epsilon + PRUNE_SLACK
            && self.orig_mass(out_mask | remaining) < self.epsilon
        {
            *final_out = out_mask | remaining;
            return Ok(true);
        }
        if k_left == 0 {
            return Ok(false);
        }
        let bound = k_left as f64 * self.mstar + (self.epsilon - out_sum);
        if rem_sum > bound + PRUNE_SLACK {
            return Ok(false);
        }
        if rem_sum > bound - PRUNE_SLACK {
            // Near-tie: covered mass can reach the bound only without
            // the strict margin the budget demands, so the canonical
            // sum decides.
            let om = self.orig_mass(out_mask | remaining);
            if om - k_left as f64 * self.mstar >= self.epsilon {
                return Ok(false);
            }
        }
        let v = remaining.trailing_zeros() as usize;
        if self.branch_cliques(
            1u64 << v,
            self.adj[v] & remaining,
            0,
            remaining,
            k_left,
            out_mask,
            out_sum,
            rem_sum,
            cells,
            final_out,
        )? {
            return Ok(true);
        }
        // Outlier branch for the pivot class.
        let out2 = out_mask | (1 << v);
        let w = self.collapsed.class_w[v];
        if out_sum + w < self.epsilon + PRUNE_SLACK && self.orig_mass(out2) < self.epsilon {
            if self.search(
                remaining & !(1 << v),
                k_left,
                out2,
                out_sum + w,
                rem_sum - w,
                cells,
                final_out,
            )? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Bron-Kerbosch with a pivot over maximal cliques containing the
    /// lowest remaining class, interleaved with the cover search: each
    /// clique is tried as the next cell the moment it completes, so
    /// dense graphs never materialize their clique lists.
    #[allow(clippy::too_many_arguments)]
    fn branch_cliques(
        &mut self,
        r: u64,
        mut p: u64,
        mut x: u64,
        remaining: u64,
        k_left: usize,
        out_mask: u64,
        out_sum: f64,
        rem_sum: f64,
        cells: &mut Vec<u64>,
        final_out: &mut u64,
    ) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > SEARCH_NODE_BUDGET {
            return Err(Error::SearchBudget {
                component: self.adj.len(),
            });
        }
        if p == 0 && x == 0 {
            let mut removed = 0.0;
            let mut rest = r;
            while rest != 0 {
                let u = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                removed += self.collapsed.class_w[u];
            }
            cells.push(r);
            if self.search(
                remaining & !r,
                k_left - 1,
                out_mask,
                out_sum,
                rem_sum - removed,
                cells,
                final_out,
            )? {
                return Ok(true);
            }
            cells.pop();
            return Ok(false);
        }
        if p == 0 {
            return Ok(false);
        }
        let pivot = (p | x).trailing_zeros() as usize;
        let mut branch = p & !self.adj[pivot];
        if branch == 0 {
            branch = p;
        }
        while branch != 0 {
            let w = branch.trailing_zeros() as usize;
            branch &= branch - 1;
            let bit = 1u64 << w;
            if self.branch_cliques(
                r | bit,
                p & self.adj[w],
                x & self.adj[w],
                remaining,
                k_left,
                out_mask,
                out_sum,
                rem_sum,
                cells,
                final_out,
            )? {
                return Ok(true);
            }
            p &= !bit;
            x |= bit;
        }
        Ok(false)
    }
}

fn solve_by_search(
    collapsed: &Collapsed,
    adj: &[u64],
    weights: &[f64],
    epsilon: f64,
) -> Result<ClassCover> {
    let m = collapsed.reps.len();
    let full = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let mstar = max_clique_mass(m, adj, &collapsed.class_w);
    let all_indices: Vec<usize> = (0..weights.len()).collect();
    let total = mass_of(weights, all_indices);
    let mass_bound = if total > epsilon && mstar > 0.0 {
        let q = (total - epsilon) / mstar;
        let r = q.round();
        if (q - r).abs() <= PRUNE_SLACK {
            // k cells can cover at most k * mstar; a clean multiple
            // cannot strictly beat total - epsilon, so one more cell
            // is forced.
            let k = r.max(0.0) as usize;
            if k as f64 * mstar > total - epsilon {
                k
            } else {
                k + 1
            }
        } else {
            ((q - PRUNE_SLACK).ceil()).max(0.0) as usize
        }
    } else {
        0
    };
    let indep_bound = independent_set_bound(m, adj, collapsed, weights, epsilon);
    let start = mass_bound.max(indep_bound);

    let mut ctx = SearchCtx {
        adj,
        collapsed,
        weights,
        epsilon,
        mstar,
        nodes: 0,
    };
    for k in start..=m {
        let mut cells: Vec<u64> = Vec::new();
        let mut final_out = 0u64;
        let rem_sum: f64 = collapsed.class_w.iter().sum();
        if ctx.search(full, k, 0, 0.0, rem_sum, &mut cells, &mut final_out)? {
            let mut out = vec![0usize; m];
            for (i, clique) in cells.iter().enumerate() {
                for b in 0..m {
                    if clique >> b & 1 == 1 {
                        out[b] = i + 1;
                    }
                }
            }
            let mut rest = final_out;
            while rest != 0 {
                let v = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                out[v] = 0;
            }
            return Ok(ClassCover {
                cells: out,
                k: cells.len(),
            });
        }
    }
    unreachable!("k = m is always feasible");
}

pub fn greedy_entropy(
    matrix: &DistanceMatrix,
    weights: &[f64],
    epsilon: f64,
) -> Result<EntropyValue> {
    check_inputs(matrix, weights, epsilon)?;
    let n = matrix.len();
    let mut radius = epsilon / 2.0 * RADIUS_SHRINK;
    for _attempt in 0..4 {
        let cover = greedy_pass(matrix, weights, epsilon, radius);
        if is_valid_cover(&cover, matrix, weights, epsilon) {
            return Ok(EntropyValue::new(cover.k, Estimator::Greedy, cover));
        }
        radius *= RADIUS_SHRINK;
    }
    // Strictness kept failing; split every over-wide cell into
    // singletons, which are valid for any epsilon > 0.
    let base = greedy_pass(matrix, weights, epsilon, radius);
    let mut cells: Vec<Vec<usize>> = Vec::new();
    for cell in 1..=base.k {
        let members: Vec<usize> = (0..n).filter(|&i| base.assignment[i] == cell).collect();
        let wide = members.iter().enumerate().any(|(a, &i)| {
            members[a + 1..]
                .iter()
                .any(|&j| !(matrix.get(i, j) < epsilon))
        });
        if wide {
            for &i in &members {
                cells.push(vec![i]);
            }
        } else {
            cells.push(members);
        }
    }
    let mut assignment = vec![0usize; n];
    for (id, cell) in cells.iter().enumerate() {
        for &i in cell {
            assignment[i] = id + 1;
        }
    }
    let cover = Cover {
        assignment,
        k: cells.len().max(1),
        epsilon,
    };
    debug_assert!(is_valid_cover(&cover, matrix, weights, epsilon));
    Ok(EntropyValue::new(cover.k, Estimator::Greedy, cover))
}

/// One greedy sweep: repeatedly open the ball of radius `radius` covering
/// the most remaining weight (ties to the lowest center index) until the
/// remaining mass fits the error budget.
fn greedy_pass(matrix: &DistanceMatrix, weights: &[f64], epsilon: f64, radius: f64) -> Cover {
    let n = matrix.len();
    let mut remaining: Vec<bool> = vec![true; n];
    let mut gains: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| matrix.get(i, j) <= radius)
                .map(|j| weights[j])
                .sum()
        })
        .collect();
    let mut assignment = vec![0usize; n];
    let mut cell = 0usize;
    loop {
        let live: Vec<usize> = (0..n).filter(|&i| remaining[i]).collect();
        if mass_of(weights, live.iter().cloned()) < epsilon {
            break;
        }
        let center = live
            .iter()
            .cloned()
            .max_by(|a, b| gains[*a].partial_cmp(&gains[*b]).unwrap().then(b.cmp(a)))
            .expect("remaining mass above budget implies a live point");
        cell += 1;
        let ball: Vec<usize> = live
            .iter()
            .cloned()
            .filter(|&j| matrix.get(center, j) <= radius)
            .collect();
        for &j in &ball {
            assignment[j] = cell;
            remaining[j] = false;
            for i in 0..n {
                if remaining[i] && matrix.get(i, j) <= radius {
                    gains[i] -= weights[j];
                }
            }
        }
    }
    Cover {
        assignment,
        k: cell.max(1),
        epsilon,
    }
}

/// Entropy along a strictly decreasing epsilon grid.
pub fn entropy_curve(
    matrix: &DistanceMatrix,
    weights: &[f64],
    eps_grid: &[f64],
    estimator: Estimator,
    oracle_limit: usize,
) -> Result<Vec<EntropyValue>> {
    validate_eps_grid(eps_grid)?;
    eps_grid
        .iter()
        .map(|&eps| match estimator {
            Estimator::Exact => exact_entropy_limited(matrix, weights, eps, oracle_limit),
            Estimator::Greedy => greedy_entropy(matrix, weights, eps),
        })
        .collect()
}

pub fn validate_eps_grid(eps_grid: &[f64]) -> Result<()> {
    for (index, pair) in eps_grid.windows(2).enumerate() {
        if !(pair[1] < pair[0]) {
            return Err(Error::EpsilonOrder {
                index: index + 1,
                prev: pair[0],
                next: pair[1],
            });
        }
    }
    if let Some(&last) = eps_grid.last() {
        if !(last > 0.0) {
            return Err(Error::InvalidEpsilon(last));
        }
    }
    Ok(())
}

/// Exhaustive decision search, independent of the oracle's clique-cover
/// machinery: can the instance be covered with at most `cells_allowed`
/// cells? Intended as a test oracle for small instances.
pub fn exists_cover(
    matrix: &DistanceMatrix,
    weights: &[f64],
    epsilon: f64,
    cells_allowed: usize,
) -> bool {
    fn place(
        i: usize,
        n: usize,
        cells: &mut Vec<Vec<usize>>,
        outliers: &mut Vec<usize>,
        matrix: &DistanceMatrix,
        weights: &[f64],
        epsilon: f64,
        cells_allowed: usize,
    ) -> bool {
        if i == n {
            return true;
        }
        outliers.push(i);
        if mass_of(weights, outliers.iter().cloned()) < epsilon
            && place(i + 1, n, cells, outliers, matrix, weights, epsilon, cells_allowed)
        {
            return true;
        }
        outliers.pop();
        for c in 0..cells.len() {
            if cells[c].iter().all(|&j| matrix.get(i, j) < epsilon) {
                cells[c].push(i);
                if place(i + 1, n, cells, outliers, matrix, weights, epsilon, cells_allowed) {
                    return true;
                }
                cells[c].pop();
            }
        }
        if cells.len() < cells_allowed {
            cells.push(vec![i]);
            if place(i + 1, n, cells, outliers, matrix, weights, epsilon, cells_allowed) {
                return true;
            }
            cells.pop();
        }
        false
    }
    place(
        0,
        matrix.len(),
        &mut Vec::new(),
        &mut Vec::new(),
        matrix,
        weights,
        epsilon,
        cells_allowed,
    )
}

/// True when `k` is minimal: some `k`-cover exists and no `(k-1)`-cover
/// does, by the exhaustive search.
pub fn confirm_minimal(matrix: &DistanceMatrix, weights: &[f64], epsilon: f64, k: usize) -> bool {
    exists_cover(matrix, weights, epsilon, k)
        && (k <= 1 || !exists_cover(matrix, weights, epsilon, k - 1))
}
