//! Cuts, erasure models, and exact/heuristic minimum cut-set capacities.
//!
//! For a cut with source side `V_S`, the broadcast value is
//! `Σ_{u ∈ V_S*} (1 − Π_{v:(u,v) crosses} γ_uv)` where `V_S*` are the
//! source-side nodes with at least one cut edge; the multicast value is
//! `Σ (1 − γ_uv)` over the cut edges. The network capacity is the minimum
//! over all cuts keeping every source on the source side and every
//! destination on the other side.
//!
//! Exact minimization enumerates the free (non-source, non-destination)
//! nodes, which is limited to 2^24 cuts. Beyond that, a heuristic combining
//! axis sweep cuts, the two extreme cuts and a greedy local search provides
//! an upper bound on the exact minimum.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::Error;
use crate::geometry::GeoGraph;
use crate::Result;

/// Enumeration budget for exact mode: at most `2^24` cuts.
pub const EXACT_BUDGET_BITS: u32 = 24;

/// Whether each node may send distinct signals on distinct outgoing links
/// (multicast) or one shared signal (broadcast).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Broadcast,
    Multicast,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Broadcast => write!(f, "broadcast"),
            Mode::Multicast => write!(f, "multicast"),
        }
    }
}

/// A cut, represented by its source-side membership. Always a nonempty
/// proper subset of the nodes. Serializes as the sorted member list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    in_source: Vec<bool>,
}

impl Cut {
    /// Builds a cut from the source-side member list over `n` nodes.
    pub fn from_source_side(n: usize, members: &[u32]) -> Result<Cut> {
        let mut in_source = vec![false; n];
        for &v in members {
            if v as usize >= n {
                return Err(Error::InvalidInstance(format!(
                    "cut member {v} out of range for {n} nodes"
                )));
            }
            in_source[v as usize] = true;
        }
        Cut::from_membership(in_source)
    }

    /// Builds a cut from a membership vector (`true` = source side).
    pub fn from_membership(in_source: Vec<bool>) -> Result<Cut> {
        let k = in_source.iter().filter(|&&b| b).count();
        if k == 0 || k == in_source.len() {
            return Err(Error::InvalidInstance(
                "cut source side must be a nonempty proper subset".into(),
            ));
        }
        Ok(Cut { in_source })
    }

    pub fn n(&self) -> usize {
        self.in_source.len()
    }

    pub fn contains(&self, v: u32) -> bool {
        self.in_source[v as usize]
    }

    /// Source-side size `|V_S|`.
    pub fn source_len(&self) -> usize {
        self.in_source.iter().filter(|&&b| b).count()
    }

    /// Sorted source-side members.
    pub fn source_side(&self) -> Vec<u32> {
        (0..self.n() as u32).filter(|&v| self.contains(v)).collect()
    }

    pub(crate) fn membership(&self) -> &[bool] {
        &self.in_source
    }
}

impl Serialize for Cut {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let members = self.source_side();
        let mut seq = serializer.serialize_seq(Some(members.len()))?;
        for v in members {
            seq.serialize_element(&v)?;
        }
        seq.end()
    }
}

/// Named erasure-probability distribution for i.i.d. per-link sampling.
/// Serialized as `{"name": ..., "params": [...]}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "snake_case")]
pub enum GammaDistribution {
    /// Uniform on `[a, b)`.
    Uniform(f64, f64),
    /// Takes value `lo` with probability `p`, else `hi`.
    TwoPoint(f64, f64, f64),
}

impl GammaDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GammaDistribution::Uniform(a, b) => {
                if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || !(a < b) {
                    return Err(Error::InvalidInstance(format!(
                        "uniform erasure distribution needs 0 <= a < b <= 1, got [{a}, {b}]"
                    )));
                }
            }
            GammaDistribution::TwoPoint(lo, hi, p) => {
                if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
                    return Err(Error::InvalidInstance(format!(
                        "two-point erasure values must satisfy 0 <= lo <= hi <= 1, got ({lo}, {hi})"
                    )));
                }
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::invalid("p", p, "must lie in [0, 1]"));
                }
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            GammaDistribution::Uniform(a, b) => rng.random_range(a..b),
            GammaDistribution::TwoPoint(lo, hi, p) => {
                if rng.random::<f64>() < p {
                    lo
                } else {
                    hi
                }
            }
        }
    }

    /// Mean erasure probability.
    pub fn mean(&self) -> f64 {
        match *self {
            GammaDistribution::Uniform(a, b) => 0.5 * (a + b),
            GammaDistribution::TwoPoint(lo, hi, p) => p * lo + (1.0 - p) * hi,
        }
    }
}

/// Per-link erasure probabilities: one constant, an explicit per-edge map,
/// or an i.i.d. sample from a named distribution (materialized
/// deterministically from its seed).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErasureModel {
    /// One erasure probability shared by every link.
    Constant(f64),
    /// Explicit `(u, v, γ_uv)` triples covering every directed edge.
    PerLink(Vec<(u32, u32, f64)>),
    /// I.i.d. per-link probabilities drawn from `dist` with `seed`.
    Distribution {
        #[serde(flatten)]
        dist: GammaDistribution,
        seed: u64,
    },
}

impl ErasureModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            ErasureModel::Constant(g) => {
                if !(0.0..=1.0).contains(g) {
                    return Err(Error::invalid("gamma", *g, "must lie in [0, 1]"));
                }
            }
            ErasureModel::PerLink(links) => {
                for &(u, v, g) in links {
                    if !(0.0..=1.0).contains(&g) {
                        return Err(Error::InvalidInstance(format!(
                            "gamma for edge ({u}, {v}) is {g}, outside [0, 1]"
                        )));
                    }
                }
            }
            ErasureModel::Distribution { dist, .. } => dist.validate()?,
        }
        Ok(())
    }

    /// Resolves a `Distribution` model into an explicit `PerLink` map for
    /// `graph`, deterministically from the stored seed.
    ///
    /// One value is drawn per undirected pair `(u, v)` with `u < v` (pairs
    /// visited in ascending order) and assigned to both directions, matching
    /// the symmetric-erasure convention. `Constant` and `PerLink` models are
    /// returned unchanged.
    pub fn materialize(&self, graph: &GeoGraph) -> Result<ErasureModel> {
        self.validate()?;
        match self {
            ErasureModel::Distribution { dist, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut links = Vec::with_capacity(graph.edge_count());
                for (u, v) in graph.edges() {
                    if u < v {
                        let g = dist.sample(&mut rng);
                        links.push((u, v, g));
                        links.push((v, u, g));
                    }
                }
                links.sort_unstable_by_key(|&(u, v, _)| (u, v));
                Ok(ErasureModel::PerLink(links))
            }
            other => Ok(other.clone()),
        }
    }
}

/// An evaluation-ready erasure assignment: constant or a fully validated
/// per-edge map covering the paired graph.
pub(crate) enum GammaView {
    Constant(f64),
    Map(HashMap<(u32, u32), f64>),
}

impl GammaView {
    pub(crate) fn resolve(model: &ErasureModel, graph: &GeoGraph) -> Result<Self> {
        model.validate()?;
        match model {
            ErasureModel::Constant(g) => Ok(GammaView::Constant(*g)),
            ErasureModel::PerLink(links) => {
                let map: HashMap<(u32, u32), f64> =
                    links.iter().map(|&(u, v, g)| ((u, v), g)).collect();
                for (u, v) in graph.edges() {
                    if !map.contains_key(&(u, v)) {
                        return Err(Error::ModelMismatch(u, v));
                    }
                }
                Ok(GammaView::Map(map))
            }
            ErasureModel::Distribution { .. } => {
                let materialized = model.materialize(graph)?;
                GammaView::resolve(&materialized, graph)
            }
        }
    }

    #[inline]
    pub(crate) fn gamma(&self, u: u32, v: u32) -> f64 {
        match self {
            GammaView::Constant(g) => *g,
            GammaView::Map(m) => m[&(u, v)],
        }
    }
}

/// Sources and destinations with their node fractions.
#[derive(Debug, Clone, Serialize)]
pub struct SdSpec {
    sources: Vec<u32>,
    destinations: Vec<u32>,
    n: usize,
}

impl SdSpec {
    pub fn new(mut sources: Vec<u32>, mut destinations: Vec<u32>, n: usize) -> Result<SdSpec> {
        sources.sort_unstable();
        sources.dedup();
        destinations.sort_unstable();
        destinations.dedup();
        if sources.is_empty() || destinations.is_empty() {
            return Err(Error::InvalidInstance(
                "sources and destinations must both be nonempty".into(),
            ));
        }
        for &v in sources.iter().chain(destinations.iter()) {
            if v as usize >= n {
                return Err(Error::InvalidInstance(format!(
                    "node index {v} out of range for {n} nodes"
                )));
            }
        }
        let dset: Vec<bool> = {
            let mut m = vec![false; n];
            for &d in &destinations {
                m[d as usize] = true;
            }
            m
        };
        if sources.iter().any(|&s| dset[s as usize]) {
            return Err(Error::InvalidInstance(
                "sources and destinations must be disjoint".into(),
            ));
        }
        Ok(SdSpec {
            sources,
            destinations,
            n,
        })
    }

    pub fn sources(&self) -> &[u32] {
        &self.sources
    }

    pub fn destinations(&self) -> &[u32] {
        &self.destinations
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `|S| / n`.
    pub fn alpha1(&self) -> f64 {
        self.sources.len() as f64 / self.n as f64
    }

    /// `|D| / n`.
    pub fn alpha2(&self) -> f64 {
        self.destinations.len() as f64 / self.n as f64
    }
}

/// Result of a minimum-cut search.
#[derive(Debug, Clone, Serialize)]
pub struct MinCutResult {
    /// Minimum cut value found (bits per channel use).
    pub value: f64,
    /// The minimizing cut (ties broken by lexicographically smallest
    /// source-side membership). Serialized as the sorted member list.
    #[serde(rename = "argmin_source_side")]
    pub argmin_cut: Cut,
    /// Number of candidate cuts evaluated.
    pub cuts_examined: u64,
    pub mode: Mode,
    /// True when produced by exhaustive enumeration.
    pub exact: bool,
}

/// The cut-set edges of `cut`: exactly the edges from the source side to the
/// destination side, in ascending `(source, target)` order.
pub fn cut_edges(graph: &GeoGraph, cut: &Cut) -> Vec<(u32, u32)> {
    let mut edges = Vec::new();
    for u in 0..graph.n() as u32 {
        if cut.contains(u) {
            for &v in graph.neighbors(u) {
                if !cut.contains(v) {
                    edges.push((u, v));
                }
            }
        }
    }
    edges
}

/// The boundary sources `V_S*`: source-side nodes with at least one
/// outgoing edge in the cut-set, ascending.
pub fn boundary_sources(graph: &GeoGraph, cut: &Cut) -> Vec<u32> {
    (0..graph.n() as u32)
        .filter(|&u| {
            cut.contains(u) && graph.neighbors(u).iter().any(|&v| !cut.contains(v))
        })
        .collect()
}

/// Number of factors above which per-node erasure products are accumulated
/// as summed logarithms to avoid underflow.
const LOG_DOMAIN_FACTORS: usize = 64;

fn node_broadcast_term(graph: &GeoGraph, gam: &GammaView, cut_membership: &[bool], u: u32) -> f64 {
    let nbrs = graph.neighbors(u);
    let k = nbrs
        .iter()
        .filter(|&&v| !cut_membership[v as usize])
        .count();
    if k == 0 {
        return 0.0;
    }
    let prod = if k <= LOG_DOMAIN_FACTORS {
        let mut p = 1.0f64;
        for &v in nbrs {
            if !cut_membership[v as usize] {
                p *= gam.gamma(u, v);
            }
        }
        p
    } else {
        let mut s = 0.0f64;
        for &v in nbrs {
            if !cut_membership[v as usize] {
                s += gam.gamma(u, v).ln();
            }
        }
        s.exp()
    };
    1.0 - prod
}

pub(crate) fn broadcast_value(graph: &GeoGraph, gam: &GammaView, membership: &[bool]) -> f64 {
    (0..graph.n() as u32)
        .filter(|&u| membership[u as usize])
        .map(|u| node_broadcast_term(graph, gam, membership, u))
        .sum()
}

pub(crate) fn multicast_value(graph: &GeoGraph, gam: &GammaView, membership: &[bool]) -> f64 {
    let mut total = 0.0;
    for u in 0..graph.n() as u32 {
        if membership[u as usize] {
            for &v in graph.neighbors(u) {
                if !membership[v as usize] {
                    total += 1.0 - gam.gamma(u, v);
                }
            }
        }
    }
    total
}

pub(crate) fn cut_value(graph: &GeoGraph, gam: &GammaView, membership: &[bool], mode: Mode) -> f64 {
    match mode {
        Mode::Broadcast => broadcast_value(graph, gam, membership),
        Mode::Multicast => multicast_value(graph, gam, membership),
    }
}

/// Broadcast cut-set value `Σ_{u ∈ V_S*} (1 − Π γ_uv)` of a single cut.
///
/// Per-node products are computed by direct multiplication up to 64 factors
/// and by summed logarithms beyond that. The result lies in `[0, |V_S*|]`.
pub fn broadcast_cut_capacity(graph: &GeoGraph, model: &ErasureModel, cut: &Cut) -> Result<f64> {
    check_cut(graph, cut)?;
    let gam = GammaView::resolve(model, graph)?;
    Ok(broadcast_value(graph, &gam, cut.membership()))
}

/// Multicast cut-set value: the sum of per-edge success probabilities
/// `Σ (1 − γ_uv)` over the cut-set.
pub fn multicast_cut_capacity(graph: &GeoGraph, model: &ErasureModel, cut: &Cut) -> Result<f64> {
    check_cut(graph, cut)?;
    let gam = GammaView::resolve(model, graph)?;
    Ok(multicast_value(graph, &gam, cut.membership()))
}

fn check_cut(graph: &GeoGraph, cut: &Cut) -> Result<()> {
    if cut.n() != graph.n() {
        return Err(Error::InvalidInstance(format!(
            "cut over {} nodes paired with graph of {} nodes",
            cut.n(),
            graph.n()
        )));
    }
    Ok(())
}

/// Descriptor of the multi-source/multi-destination reduction: a virtual
/// super-source connected to every source and a virtual super-destination
/// fed by every destination, both via incapacitated error-free links.
///
/// Cuts through incapacitated links can never be minimal, so the reduction
/// is realized as the enumeration constraint `S ⊆ V_S`, `D ⊆ V_D`; only the
/// listed free nodes may change sides.
#[derive(Debug, Clone, Serialize)]
pub struct AugmentedInstance {
    pub sources: Vec<u32>,
    pub destinations: Vec<u32>,
    /// Nodes on neither side, ascending; the enumeration space is every
    /// subset of this list.
    pub free_nodes: Vec<u32>,
}

/// Builds the super-node reduction descriptor for `sd`.
pub fn supernode_reduction(graph: &GeoGraph, sd: &SdSpec) -> Result<AugmentedInstance> {
    if sd.n() != graph.n() {
        return Err(Error::InvalidInstance(format!(
            "source/destination spec over {} nodes paired with graph of {} nodes",
            sd.n(),
            graph.n()
        )));
    }
    let mut fixed = vec![false; graph.n()];
    for &s in sd.sources() {
        fixed[s as usize] = true;
    }
    for &d in sd.destinations() {
        fixed[d as usize] = true;
    }
    let free_nodes = (0..graph.n() as u32)
        .filter(|&v| !fixed[v as usize])
        .collect();
    Ok(AugmentedInstance {
        sources: sd.sources().to_vec(),
        destinations: sd.destinations().to_vec(),
        free_nodes,
    })
}

/// True iff the sorted full-membership list induced by free-node mask `a`
/// is lexicographically smaller than that of `b`. The fixed sources are
/// part of every membership; `free` is ascending and disjoint from them.
///
/// Lists sharing a prefix compare by the next element, and a strict prefix
/// is smaller than its extension (so `{s}` beats `{s, w}` on a tie).
fn mask_lex_less(a: u64, b: u64, free: &[u32], max_source: u32) -> bool {
    if a == b {
        return false;
    }
    let diff = a ^ b;
    let i = diff.trailing_zeros();
    let w = free[i as usize];
    // Members below `w` coincide; the side holding `w` is smaller unless
    // the other side has no member beyond `w` at all (prefix case).
    let beyond = |mask: u64| max_source > w || (mask >> (i + 1)) != 0;
    if a & (1u64 << i) != 0 {
        beyond(b)
    } else {
        !beyond(a)
    }
}

/// Incremental cut-value state over one graph/erasure pairing. Supports
/// flipping one node across the cut in `O(deg)` and exact recomputation.
struct FlipState<'g> {
    graph: &'g GeoGraph,
    gam: &'g GammaView,
    mode: Mode,
    membership: Vec<bool>,
    /// Per source-side node: count of cut edges.
    cut_deg: Vec<u32>,
    /// Per source-side node: product of γ over cut edges with γ above the
    /// tiny-γ guard; `zero_deg` counts the rest.
    prod: Vec<f64>,
    zero_deg: Vec<u32>,
    total: f64,
    flips_since_sync: u32,
}

/// γ below this is treated as an exact zero factor in incremental products
/// (a division by it would destroy precision). Exact re-evaluations are
/// unaffected: they never divide.
const TINY_GAMMA: f64 = 1e-9;

const RESYNC_INTERVAL: u32 = 4096;

impl<'g> FlipState<'g> {
    fn new(graph: &'g GeoGraph, gam: &'g GammaView, mode: Mode, membership: Vec<bool>) -> Self {
        let n = graph.n();
        let mut st = FlipState {
            graph,
            gam,
            mode,
            membership,
            cut_deg: vec![0; n],
            prod: vec![1.0; n],
            zero_deg: vec![0; n],
            total: 0.0,
            flips_since_sync: 0,
        };
        st.resync();
        st
    }

    /// Recomputes all incremental state exactly from the membership.
    fn resync(&mut self) {
        self.flips_since_sync = 0;
        self.total = 0.0;
        for u in 0..self.graph.n() as u32 {
            let ui = u as usize;
            self.cut_deg[ui] = 0;
            self.prod[ui] = 1.0;
            self.zero_deg[ui] = 0;
            if !self.membership[ui] {
                continue;
            }
            for &v in self.graph.neighbors(u) {
                if !self.membership[v as usize] {
                    self.add_edge_stat_for(u, v);
                }
            }
            if self.mode == Mode::Broadcast {
                self.total += self.node_term(u);
            }
        }
        if self.mode == Mode::Multicast {
            self.total = multicast_value(self.graph, self.gam, &self.membership);
        }
    }

    #[inline]
    fn add_edge_stat(&mut self, u: u32, gamma: f64) {
        let ui = u as usize;
        self.cut_deg[ui] += 1;
        if gamma < TINY_GAMMA {
            self.zero_deg[ui] += 1;
        } else {
            self.prod[ui] *= gamma;
        }
    }

    #[inline]
    fn add_edge_stat_rm(&mut self, u: u32, gamma: f64) {
        let ui = u as usize;
        self.cut_deg[ui] -= 1;
        if gamma < TINY_GAMMA {
            self.zero_deg[ui] -= 1;
        } else {
            self.prod[ui] /= gamma;
        }
    }

    #[inline]
    fn add_edge_stat_for(&mut self, u: u32, v: u32) {
        self.add_edge_stat(u, self.gam.gamma(u, v));
    }

    #[inline]
    fn add_edge_stat_rm_for(&mut self, u: u32, v: u32) {
        self.add_edge_stat_rm(u, self.gam.gamma(u, v));
    }

    #[inline]
    fn node_term(&self, u: u32) -> f64 {
        let ui = u as usize;
        if self.cut_deg[ui] == 0 {
            0.0
        } else if self.zero_deg[ui] > 0 {
            1.0
        } else {
            1.0 - self.prod[ui]
        }
    }

    /// Moves node `w` to the other side, updating the running value.
    fn flip(&mut self, w: u32) {
        let wi = w as usize;
        let entering_source = !self.membership[wi];
        match self.mode {
            Mode::Broadcast => {
                if entering_source {
                    // Source-side neighbors lose the cut edge (u, w).
                    for &u in self.graph.neighbors(w) {
                        if self.membership[u as usize] {
                            self.total -= self.node_term(u);
                            self.add_edge_stat_rm_for(u, w);
                            self.total += self.node_term(u);
                        }
                    }
                    self.membership[wi] = true;
                    // w gains its own term over destination-side neighbors.
                    self.cut_deg[wi] = 0;
                    self.prod[wi] = 1.0;
                    self.zero_deg[wi] = 0;
                    for &v in self.graph.neighbors(w) {
                        if !self.membership[v as usize] {
                            self.add_edge_stat_for(w, v);
                        }
                    }
                    self.total += self.node_term(w);
                } else {
                    self.total -= self.node_term(w);
                    self.membership[wi] = false;
                    for &u in self.graph.neighbors(w) {
                        if self.membership[u as usize] {
                            self.total -= self.node_term(u);
                            self.add_edge_stat_for(u, w);
                            self.total += self.node_term(u);
                        }
                    }
                }
            }
            Mode::Multicast => {
                if entering_source {
                    for &u in self.graph.neighbors(w) {
                        if self.membership[u as usize] {
                            self.total -= 1.0 - self.gam.gamma(u, w);
                        }
                    }
                    self.membership[wi] = true;
                    for &v in self.graph.neighbors(w) {
                        if !self.membership[v as usize] {
                            self.total += 1.0 - self.gam.gamma(w, v);
                        }
                    }
                } else {
                    for &v in self.graph.neighbors(w) {
                        if !self.membership[v as usize] {
                            self.total -= 1.0 - self.gam.gamma(w, v);
                        }
                    }
                    self.membership[wi] = false;
                    for &u in self.graph.neighbors(w) {
                        if self.membership[u as usize] {
                            self.total += 1.0 - self.gam.gamma(u, w);
                        }
                    }
                }
            }
        }
        self.flips_since_sync += 1;
        if self.flips_since_sync >= RESYNC_INTERVAL {
            self.resync();
        }
    }

    /// Exact value of the current membership, recomputed from scratch.
    fn exact_value(&self) -> f64 {
        cut_value(self.graph, self.gam, &self.membership, self.mode)
    }
}

/// Exact minimum cut over all cuts with every source on the source side and
/// every destination on the other, by Gray-code enumeration of the free
/// nodes. Ties are broken by lexicographically smallest source-side
/// membership. Fails with a budget error beyond `2^24` cuts.
pub fn min_cut_bruteforce(
    graph: &GeoGraph,
    model: &ErasureModel,
    sd: &SdSpec,
    mode: Mode,
) -> Result<MinCutResult> {
    let aug = supernode_reduction(graph, sd)?;
    let f = aug.free_nodes.len();
    if f > EXACT_BUDGET_BITS as usize {
        return Err(Error::BudgetExceeded {
            free_nodes: f,
            budget_bits: EXACT_BUDGET_BITS,
        });
    }
    let gam = GammaView::resolve(model, graph)?;

    let mut membership = vec![false; graph.n()];
    for &s in &aug.sources {
        membership[s as usize] = true;
    }
    let mut state = FlipState::new(graph, &gam, mode, membership);

    // Guard margin for accepting incremental values as candidate minima;
    // candidates are re-evaluated exactly before adoption.
    const GUARD: f64 = 1e-7;

    let max_source = *aug.sources.iter().max().expect("sources are nonempty");
    let mut best_value = state.exact_value();
    let mut best_mask: u64 = 0;
    let mut current_mask: u64 = 0;

    let total_masks: u64 = 1u64 << f;
    for i in 1..total_masks {
        let bit = i.trailing_zeros() as usize;
        current_mask ^= 1u64 << bit;
        state.flip(aug.free_nodes[bit]);
        if state.total <= best_value + GUARD {
            let exact = state.exact_value();
            if exact < best_value
                || (exact == best_value
                    && mask_lex_less(current_mask, best_mask, &aug.free_nodes, max_source))
            {
                best_value = exact;
                best_mask = current_mask;
            }
        }
    }

    let mut in_source = vec![false; graph.n()];
    for &s in &aug.sources {
        in_source[s as usize] = true;
    }
    for (b, &w) in aug.free_nodes.iter().enumerate() {
        if best_mask & (1u64 << b) != 0 {
            in_source[w as usize] = true;
        }
    }
    Ok(MinCutResult {
        value: best_value,
        argmin_cut: Cut::from_membership(in_source)?,
        cuts_examined: total_masks,
        mode,
        exact: true,
    })
}

/// Sweep axis for threshold cuts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
}

fn coord_on(graph: &GeoGraph, axis: Axis, v: u32) -> f64 {
    let p = graph.points().points()[v as usize];
    match axis {
        Axis::X => p.x,
        Axis::Y => p.y,
    }
}

/// The admissible axis sweep cuts: for each distinct node coordinate `t` on
/// the axis, the cut `V_S = {v : coord(v) ≤ t}`, kept only when it contains
/// every source and no destination. An empty family is a distinct error.
pub fn sweep_cut_family(graph: &GeoGraph, axis: Axis, sd: &SdSpec) -> Result<Vec<Cut>> {
    if sd.n() != graph.n() {
        return Err(Error::InvalidInstance(
            "source/destination spec does not match graph size".into(),
        ));
    }
    let max_source = sd
        .sources()
        .iter()
        .map(|&s| coord_on(graph, axis, s))
        .fold(f64::NEG_INFINITY, f64::max);
    let min_dest = sd
        .destinations()
        .iter()
        .map(|&d| coord_on(graph, axis, d))
        .fold(f64::INFINITY, f64::min);

    let mut thresholds: Vec<f64> = (0..graph.n() as u32)
        .map(|v| coord_on(graph, axis, v))
        .filter(|&t| t >= max_source && t < min_dest)
        .collect();
    thresholds.sort_unstable_by(f64::total_cmp);
    thresholds.dedup();

    let mut cuts = Vec::with_capacity(thresholds.len());
    for t in thresholds {
        let membership: Vec<bool> = (0..graph.n() as u32)
            .map(|v| coord_on(graph, axis, v) <= t)
            .collect();
        cuts.push(Cut::from_membership(membership)?);
    }
    if cuts.is_empty() {
        return Err(Error::EmptySweepFamily);
    }
    Ok(cuts)
}

/// Heuristic minimum cut: the best of both axis sweep families, the two
/// extreme cuts (`V_S = S` and `V_D = D`), and a greedy local search from
/// that best cut (single-node moves of free nodes, first improvement,
/// deterministic ascending node order, at most `5n` accepted moves).
///
/// The returned value is the exact evaluation of the final cut, hence an
/// upper bound on the exact minimum. `exact` is always `false`.
pub fn heuristic_min_cut(
    graph: &GeoGraph,
    model: &ErasureModel,
    sd: &SdSpec,
    mode: Mode,
) -> Result<MinCutResult> {
    let aug = supernode_reduction(graph, sd)?;
    let gam = GammaView::resolve(model, graph)?;
    let n = graph.n();

    let base_membership = |extra: &dyn Fn(u32) -> bool| -> Vec<bool> {
        let mut m = vec![false; n];
        for &s in &aug.sources {
            m[s as usize] = true;
        }
        for &w in &aug.free_nodes {
            if extra(w) {
                m[w as usize] = true;
            }
        }
        m
    };

    let mut cuts_examined: u64 = 0;
    let mut best: Option<(f64, Vec<bool>)> = None;
    let consider = |value: f64, membership: &[bool], best: &mut Option<(f64, Vec<bool>)>| {
        let better = match best {
            None => true,
            Some((bv, bm)) => {
                value < *bv || (value == *bv && membership_lex_less(membership, bm))
            }
        };
        if better {
            *best = Some((value, membership.to_vec()));
        }
    };

    // Extreme cuts.
    for membership in [
        base_membership(&|_| false),
        base_membership(&|_| true),
    ] {
        let value = cut_value(graph, &gam, &membership, mode);
        cuts_examined += 1;
        consider(value, &membership, &mut best);
    }

    // Axis sweeps, evaluated incrementally along the threshold walk.
    for axis in [Axis::X, Axis::Y] {
        let max_source = aug
            .sources
            .iter()
            .map(|&s| coord_on(graph, axis, s))
            .fold(f64::NEG_INFINITY, f64::max);
        let min_dest = aug
            .destinations
            .iter()
            .map(|&d| coord_on(graph, axis, d))
            .fold(f64::INFINITY, f64::min);
        if max_source >= min_dest {
            continue; // no admissible threshold on this axis
        }
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_unstable_by(|&a, &b| {
            coord_on(graph, axis, a)
                .total_cmp(&coord_on(graph, axis, b))
                .then(a.cmp(&b))
        });
        let mut state = FlipState::new(graph, &gam, mode, vec![false; n]);
        let mut in_state = vec![false; n];
        let mut idx = 0usize;
        while idx < n {
            let t = coord_on(graph, axis, order[idx]);
            // Move every node with this coordinate into the source side.
            while idx < n && coord_on(graph, axis, order[idx]) == t {
                state.flip(order[idx]);
                in_state[order[idx] as usize] = true;
                idx += 1;
            }
            if t >= max_source && t < min_dest {
                cuts_examined += 1;
                let exact = state.exact_value();
                consider(exact, &in_state, &mut best);
            }
            if t >= min_dest {
                break;
            }
        }
    }

    let (_, membership) = best.expect("extreme cuts always provide a candidate");

    // Greedy local search: move single free nodes across the cut while the
    // value improves, first improvement, ascending node order, cyclically.
    let mut state = FlipState::new(graph, &gam, mode, membership);
    let move_cap = 5 * n;
    let mut moves = 0usize;
    if !aug.free_nodes.is_empty() {
        let mut improved = true;
        while improved && moves < move_cap {
            improved = false;
            for &w in &aug.free_nodes {
                if moves >= move_cap {
                    break;
                }
                let before = state.total;
                state.flip(w);
                if state.total < before - 1e-12 {
                    moves += 1;
                    cuts_examined += 1;
                    improved = true;
                } else {
                    state.flip(w); // revert
                }
            }
        }
    }

    let value = state.exact_value();
    Ok(MinCutResult {
        value,
        argmin_cut: Cut::from_membership(state.membership.clone())?,
        cuts_examined,
        mode,
        exact: false,
    })
}

/// Lexicographic order on the sorted member lists of two membership
/// vectors; a strict prefix is smaller than its extension.
fn membership_lex_less(a: &[bool], b: &[bool]) -> bool {
    let n = a.len();
    let mut i = 0;
    while i < n && a[i] == b[i] {
        i += 1;
    }
    if i == n {
        return false;
    }
    if a[i] {
        b[i + 1..].iter().any(|&x| x)
    } else {
        !a[i + 1..].iter().any(|&x| x)
    }
}

/// Closed-form ceiling for the balanced left/right sweep cut:
/// `(1/r)·n·r²·(1+ε)·(1 − γ^{3(1+ε)·n·r²})`.
pub fn tightness_upper_bound(n: usize, r: f64, eps: f64, gamma: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::invalid("r", r, "must lie in (0, 1]"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid("eps", eps, "must lie in (0, 1)"));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::invalid("gamma", gamma, "must lie in [0, 1]"));
    }
    let nf = n as f64;
    Ok((1.0 / r) * nf * r * r * (1.0 + eps) * (1.0 - gamma.powf(3.0 * (1.0 + eps) * nf * r * r)))
}
