//! Point sampling, L∞ geometric graphs, cell dissection and connectivity.
//!
//! Nodes live in the unit square `[0,1]²`. Two distinct nodes are connected
//! (in both directions) when their L∞ distance is at most the transmission
//! radius `r`. The square is dissected into `4⌈1/r⌉²` cells of side
//! `1/(2⌈1/r⌉)`; any two nodes in the same or 8-neighboring cells are then
//! guaranteed to be connected, which is what makes the dissection useful for
//! occupancy ("niceness") arguments.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// A point in the unit square. Serialized as a `[x, y]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point { x: v[0], y: v[1] }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// L∞ (Chebyshev) distance between two points.
pub fn linf_distance(p: Point, q: Point) -> f64 {
    (p.x - q.x).abs().max((p.y - q.y).abs())
}

/// An ordered list of node coordinates in the unit square, together with the
/// RNG seed that produced it (when sampled rather than given explicitly).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    points: Vec<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl PointSet {
    /// Wraps explicit coordinates. Every coordinate must be finite and lie in `[0,1]`.
    pub fn from_points(points: Vec<Point>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            let ok = |c: f64| c.is_finite() && (0.0..=1.0).contains(&c);
            if !ok(p.x) || !ok(p.y) {
                return Err(Error::InvalidInstance(format!(
                    "point {i} = ({}, {}) is outside the unit square",
                    p.x, p.y
                )));
            }
        }
        Ok(PointSet { points, seed: None })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Writes the set as CSV (`index,x,y`, 17 significant digits) so the
    /// exact coordinates can be reproduced by other tools.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "index,x,y")?;
        for (i, p) in self.points.iter().enumerate() {
            writeln!(w, "{i},{},{}", format_coord(p.x), format_coord(p.y))?;
        }
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }

    /// Reads a CSV produced by [`PointSet::write_csv`].
    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let reader = BufReader::new(r);
        let mut points = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            if lineno == 0 {
                if line.trim() != "index,x,y" {
                    return Err(Error::Parse(format!("unexpected CSV header `{line}`")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let _idx = fields.next();
            let x = parse_coord(fields.next(), lineno)?;
            let y = parse_coord(fields.next(), lineno)?;
            points.push(Point { x, y });
        }
        PointSet::from_points(points)
    }
}

fn format_coord(c: f64) -> String {
    // 17 significant digits (scientific): round-trips f64 exactly.
    format!("{c:.16e}")
}

fn parse_coord(field: Option<&str>, lineno: usize) -> Result<f64> {
    field
        .ok_or_else(|| Error::Parse(format!("line {lineno}: missing coordinate field")))?
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("line {lineno}: {e}")))
}

/// Samples `n` points i.i.d. uniform on `[0,1)²`.
///
/// The generator is ChaCha8 keyed via `seed_from_u64` (a SplitMix64
/// expansion of the seed), drawing `x` then `y` for each point through the
/// standard 53-bit uniform `f64` construction. The same `(n, seed)` always
/// reproduces the identical list, bit for bit.
pub fn sample_uniform_points(n: usize, seed: u64) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::invalid("n", 0.0, "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            let x: f64 = rng.random();
            let y: f64 = rng.random();
            Point { x, y }
        })
        .collect();
    Ok(PointSet {
        points,
        seed: Some(seed),
    })
}

/// The critical connectivity radius scale `c·√(log n / n)`, capped at 1.
pub fn critical_radius(n: usize, c: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("n", n as f64, "must be at least 2"));
    }
    if !(c > 0.0) {
        return Err(Error::invalid("c", c, "must be positive"));
    }
    let n = n as f64;
    Ok((c * (n.ln() / n).sqrt()).min(1.0))
}

/// A directed geometric graph: `(u, v)` is an edge iff `u ≠ v` and
/// `‖u − v‖∞ ≤ r`. The edge relation is symmetric by construction.
#[derive(Debug, Clone)]
pub struct GeoGraph {
    points: PointSet,
    radius: f64,
    adjacency: Vec<Vec<u32>>,
}

impl GeoGraph {
    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn n(&self) -> usize {
        self.points.n()
    }

    /// Out-neighbors of `v`, in ascending index order.
    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adjacency[v as usize]
    }

    pub fn out_degree(&self, v: u32) -> usize {
        self.adjacency[v as usize].len()
    }

    /// Number of directed edges.
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    /// Directed edges in ascending `(source, target)` order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().map(move |&v| (u as u32, v)))
    }
}

/// Builds the L∞ geometric graph of radius `r` over `points`.
///
/// Neighbor search is grid-bucketed (buckets of side `r`, each node compared
/// against its 3×3 bucket neighborhood), so construction costs
/// `O(n + number of candidate pairs)` rather than the all-pairs `O(n²)`;
/// the produced edge set is exactly the all-pairs one.
pub fn build_rgg(points: &PointSet, r: f64) -> Result<GeoGraph> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::invalid("r", r, "must lie in (0, 1]"));
    }
    let n = points.n();
    let pts = points.points();

    // Bucket side r: all neighbors of a node lie in its 3x3 bucket block.
    let b = (1.0 / r).ceil().max(1.0) as usize;
    let bucket_of = |c: f64| ((c / r) as usize).min(b - 1);
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); b * b];
    for (i, p) in pts.iter().enumerate() {
        buckets[bucket_of(p.y) * b + bucket_of(p.x)].push(i as u32);
    }

    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (i, p) in pts.iter().enumerate() {
        let (bx, by) = (bucket_of(p.x), bucket_of(p.y));
        let nbrs = &mut adjacency[i];
        for cy in by.saturating_sub(1)..=(by + 1).min(b - 1) {
            for cx in bx.saturating_sub(1)..=(bx + 1).min(b - 1) {
                for &j in &buckets[cy * b + cx] {
                    if j as usize != i && linf_distance(*p, pts[j as usize]) <= r {
                        nbrs.push(j);
                    }
                }
            }
        }
        nbrs.sort_unstable();
    }

    Ok(GeoGraph {
        points: points.clone(),
        radius: r,
        adjacency,
    })
}

/// Reference all-pairs construction; used to validate the bucketed one.
pub fn build_rgg_all_pairs(points: &PointSet, r: f64) -> Result<GeoGraph> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::invalid("r", r, "must lie in (0, 1]"));
    }
    let pts = points.points();
    let n = pts.len();
    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j && linf_distance(pts[i], pts[j]) <= r {
                adjacency[i].push(j as u32);
            }
        }
    }
    Ok(GeoGraph {
        points: points.clone(),
        radius: r,
        adjacency,
    })
}

/// True iff a path exists between every ordered pair of nodes. Since the
/// edge relation is symmetric, a single traversal from node 0 suffices.
pub fn is_connected(graph: &GeoGraph) -> bool {
    let n = graph.n();
    if n == 0 {
        return false;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0u32];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &v in graph.neighbors(u) {
            if !seen[v as usize] {
                seen[v as usize] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == n
}

/// The cell dissection of the unit square used by occupancy arguments:
/// `4k²` square cells of side `1/(2k)` with `k = ⌈1/r⌉`.
///
/// Cells are half-open (`[i·side, (i+1)·side)` per axis); a coordinate of
/// exactly 1.0 is clamped into the last row/column.
#[derive(Debug, Clone)]
pub struct CellGrid {
    k: usize,
    side: f64,
    n: usize,
    r: f64,
    cell_members: Vec<Vec<u32>>,
}

impl CellGrid {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Cells per axis (`2k`).
    pub fn dim(&self) -> usize {
        2 * self.k
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    /// Total number of cells, `4k²`.
    pub fn cell_count(&self) -> usize {
        self.cell_members.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Node indices in cell `(cx, cy)`, ascending.
    pub fn members(&self, cx: usize, cy: usize) -> &[u32] {
        &self.cell_members[cy * self.dim() + cx]
    }

    /// Node indices of the cell with row-major index `idx`.
    pub fn members_by_index(&self, idx: usize) -> &[u32] {
        &self.cell_members[idx]
    }

    /// Cell coordinates of a point.
    pub fn cell_of(&self, p: Point) -> (usize, usize) {
        let d = self.dim();
        let clamp = |c: f64| ((c / self.side) as usize).min(d - 1);
        (clamp(p.x), clamp(p.y))
    }

    /// Row-major cell index of a point.
    pub fn cell_index_of(&self, p: Point) -> usize {
        let (cx, cy) = self.cell_of(p);
        cy * self.dim() + cx
    }

    /// Per-cell node counts, row-major.
    pub fn counts(&self) -> Vec<usize> {
        self.cell_members.iter().map(Vec::len).collect()
    }
}

/// Dissects the unit square for radius `r` and assigns every node of
/// `points` to its cell.
pub fn build_cell_grid(points: &PointSet, r: f64) -> Result<CellGrid> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::invalid("r", r, "must lie in (0, 1]"));
    }
    let k = (1.0 / r).ceil() as usize;
    let d = 2 * k;
    let side = 1.0 / d as f64;
    let mut cell_members: Vec<Vec<u32>> = vec![Vec::new(); d * d];
    let clamp = |c: f64| ((c / side) as usize).min(d - 1);
    for (i, p) in points.points().iter().enumerate() {
        cell_members[clamp(p.y) * d + clamp(p.x)].push(i as u32);
    }
    Ok(CellGrid {
        k,
        side,
        n: points.n(),
        r,
        cell_members,
    })
}

/// Outcome of an occupancy check: whether every cell of the dissection holds
/// between `(1−ε)·(1/4)·n·r²` and `(1+ε)·(1/4)·n·r²` nodes.
#[derive(Debug, Clone, Serialize)]
pub struct NicenessReport {
    pub eps: f64,
    /// `(1−ε)·(1/4)·n·r²`.
    pub lower: f64,
    /// `(1+ε)·(1/4)·n·r²`.
    pub upper: f64,
    pub per_cell_counts: Vec<usize>,
    pub is_nice: bool,
    /// Row-major indices of cells whose count falls outside `[lower, upper]`.
    pub violating_cells: Vec<usize>,
}

/// Checks the per-cell occupancy bounds for tolerance `eps`.
///
/// The thresholds are computed as real numbers and compared directly against
/// the integer counts; they are never rounded to integers first.
pub fn check_eps_nice(grid: &CellGrid, n: usize, r: f64, eps: f64) -> Result<NicenessReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid("eps", eps, "must lie in (0, 1)"));
    }
    let mean = 0.25 * n as f64 * r * r;
    let lower = (1.0 - eps) * mean;
    let upper = (1.0 + eps) * mean;
    let per_cell_counts = grid.counts();
    let violating_cells: Vec<usize> = per_cell_counts
        .iter()
        .enumerate()
        .filter(|&(_, &c)| (c as f64) < lower || (c as f64) > upper)
        .map(|(i, _)| i)
        .collect();
    Ok(NicenessReport {
        eps,
        lower,
        upper,
        per_cell_counts,
        is_nice: violating_cells.is_empty(),
        violating_cells,
    })
}
