//! Orthogonality graphs of 3-D directions and their {0, 1} colorings.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::{Error, Result};

pub type Vec3 = [f64; 3];

/// Directions whose `|dot|` is at least this close to 1 are one ray.
pub const DUPLICATE_TOL: f64 = 1e-9;
/// Default orthogonality tolerance for graph construction.
pub const ORTHO_TOL: f64 = 1e-6;

pub const PERES33: &str = include_str!("../../data/peres33.txt");
pub const AXES: &str = include_str!("../../data/axes.txt");

/// Parses a direction file: three whitespace-separated components per line,
/// `#` starts a comment. Vectors are normalized.
pub fn parse_directions(text: &str) -> Result<Vec<Vec3>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::InvalidInput(format!(
                "line {}: expected 3 components, found {}",
                lineno + 1,
                parts.len()
            )));
        }
        let mut v = [0.0; 3];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p.parse().map_err(|_| {
                Error::InvalidInput(format!("line {}: cannot parse {p:?}", lineno + 1))
            })?;
        }
        let n = norm(&v);
        if !n.is_finite() || n < 1e-12 {
            return Err(Error::InvalidInput(format!("line {}: zero vector", lineno + 1)));
        }
        out.push(v.map(|x| x / n));
    }
    if out.is_empty() {
        return Err(Error::InvalidInput("no directions".into()));
    }
    Ok(out)
}

pub fn peres33() -> Vec<Vec3> {
    parse_directions(PERES33).expect("bundled data parses")
}

pub fn axes() -> Vec<Vec3> {
    parse_directions(AXES).expect("bundled data parses")
}

/// The orthogonal triple used to show the octant coloring fails, in exact
/// radical form.
pub fn octant_counterexample_triple() -> [Vec3; 3] {
    let r = std::f64::consts::SQRT_2;
    [
        [0.5, 0.5, -r / 2.0],
        [-(2.0 - r) / 4.0, (2.0 + r) / 4.0, 0.5],
        [(2.0 + r) / 4.0, -(2.0 - r) / 4.0, 0.5],
    ]
}

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Picks the representative of `{v, −v}` whose first nonzero coordinate is
/// positive.
pub fn canonicalize(v: &Vec3) -> Vec3 {
    let n = norm(v);
    let u = v.map(|x| x / n);
    match u.iter().find(|x| x.abs() > 1e-12) {
        Some(&x) if x < 0.0 => u.map(|y| -y),
        _ => u,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TriadGraph {
    pub directions: Vec<Vec3>,
    pub triads: Vec<[usize; 3]>,
    /// Every orthogonal pair, including those inside triads.
    pub pairs: Vec<[usize; 2]>,
}

pub fn build_triad_graph(directions: &[Vec3], tol: f64) -> TriadGraph {
    let mut dirs: Vec<Vec3> = Vec::new();
    for d in directions {
        let c = canonicalize(d);
        if !dirs.iter().any(|e| dot(e, &c).abs() >= 1.0 - DUPLICATE_TOL) {
            dirs.push(c);
        }
    }
    let n = dirs.len();
    let ortho = |i: usize, j: usize| dot(&dirs[i], &dirs[j]).abs() <= tol;
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if ortho(i, j) {
                pairs.push([i, j]);
            }
        }
    }
    let mut triads = Vec::new();
    for &[i, j] in &pairs {
        for k in (j + 1)..n {
            if ortho(i, k) && ortho(j, k) {
                triads.push([i, j, k]);
            }
        }
    }
    TriadGraph {
        directions: dirs,
        triads,
        pairs,
    }
}

impl TriadGraph {
    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Index of the direction matching `v` up to sign.
    pub fn find(&self, v: &Vec3) -> Option<usize> {
        let c = canonicalize(v);
        self.directions
            .iter()
            .position(|e| dot(e, &c).abs() >= 1.0 - DUPLICATE_TOL)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Coloring {
    pub values: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KsOutcome {
    Colorable { coloring: Coloring, nodes: u64 },
    Uncolorable { nodes: u64 },
}

impl KsOutcome {
    pub fn coloring(&self) -> Option<&Coloring> {
        match self {
            KsOutcome::Colorable { coloring, .. } => Some(coloring),
            KsOutcome::Uncolorable { .. } => None,
        }
    }

    pub fn nodes(&self) -> u64 {
        match self {
            KsOutcome::Colorable { nodes, .. } | KsOutcome::Uncolorable { nodes } => *nodes,
        }
    }
}

/// Triads whose coloring does not have exactly one 0.
pub fn verify_coloring(g: &TriadGraph, c: &Coloring) -> Result<Vec<[usize; 3]>> {
    if c.values.len() != g.len() {
        return Err(Error::DimMismatch(format!(
            "coloring has {} values for {} directions",
            c.values.len(),
            g.len()
        )));
    }
    Ok(g.triads
        .iter()
        .filter(|t| t.iter().filter(|&&i| c.values[i] == 0).count() != 1)
        .copied()
        .collect())
}

/// Orthogonal pairs colored 0 at both ends.
pub fn pair_violations(g: &TriadGraph, c: &Coloring) -> Vec<[usize; 2]> {
    g.pairs
        .iter()
        .filter(|p| c.values[p[0]] == 0 && c.values[p[1]] == 0)
        .copied()
        .collect()
}

/// Octant scheme: a ray is 0 iff one of its two unit vectors lies in the
/// closed first octant with `z > 0` (the pole and the 0° and 90° meridians
/// included, the equator excluded), otherwise 1.
pub fn octant_color(d: &Vec3) -> u8 {
    const EPS: f64 = 1e-12;
    let inside = |v: &Vec3| v[0] >= -EPS && v[1] >= -EPS && v[2] > EPS;
    let neg = d.map(|x| -x);
    if inside(d) || inside(&neg) {
        0
    } else {
        1
    }
}

pub fn octant_coloring(g: &TriadGraph) -> Coloring {
    Coloring {
        values: g.directions.iter().map(octant_color).collect(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ColoringCertificate {
    pub directions: Vec<Vec3>,
    pub values: Vec<u8>,
    pub violations: Vec<[usize; 3]>,
}

impl ColoringCertificate {
    pub fn new(g: &TriadGraph, c: &Coloring) -> Result<Self> {
        Ok(Self {
            directions: g.directions.clone(),
            values: c.values.clone(),
            violations: verify_coloring(g, c)?,
        })
    }
}

// ---- backtracking search ----

struct Model {
    triads: Vec<[usize; 3]>,
    var_triads: Vec<Vec<usize>>,
    neighbors: Vec<Vec<usize>>,
}

impl Model {
    fn new(g: &TriadGraph) -> Self {
        let n = g.len();
        let mut var_triads = vec![Vec::new(); n];
        for (t, tri) in g.triads.iter().enumerate() {
            for &i in tri {
                var_triads[i].push(t);
            }
        }
        let mut neighbors = vec![Vec::new(); n];
        for &[i, j] in &g.pairs {
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        Self {
            triads: g.triads.clone(),
            var_triads,
            neighbors,
        }
    }
}

#[derive(Clone)]
struct State {
    values: Vec<Option<u8>>,
}

impl State {
    /// Assigns and propagates to a fixpoint. Returns false on conflict.
    fn assign(&mut self, m: &Model, var: usize, val: u8) -> bool {
        let mut queue = vec![(var, val)];
        while let Some((v, x)) = queue.pop() {
            match self.values[v] {
                Some(y) if y == x => continue,
                Some(_) => return false,
                None => self.values[v] = Some(x),
            }
            if x == 0 {
                for &w in &m.neighbors[v] {
                    queue.push((w, 1));
                }
            }
            for &t in &m.var_triads[v] {
                let tri = m.triads[t];
                let zeros = tri.iter().filter(|&&i| self.values[i] == Some(0)).count();
                let ones = tri.iter().filter(|&&i| self.values[i] == Some(1)).count();
                if zeros > 1 || ones == 3 {
                    return false;
                }
                for &i in &tri {
                    if self.values[i].is_none() {
                        if zeros == 1 {
                            queue.push((i, 1));
                        } else if ones == 2 {
                            queue.push((i, 0));
                        }
                    }
                }
            }
        }
        true
    }

    /// Unassigned direction touching the most constraints that already
    /// involve an assigned direction; ties broken by total degree, then
    /// index.
    fn choose(&self, m: &Model) -> Option<usize> {
        let mut best: Option<(usize, usize, usize)> = None;
        for v in 0..self.values.len() {
            if self.values[v].is_some() {
                continue;
            }
            let active = m.var_triads[v]
                .iter()
                .filter(|&&t| m.triads[t].iter().any(|&i| self.values[i].is_some()))
                .count()
                + m.neighbors[v]
                    .iter()
                    .filter(|&&w| self.values[w].is_some())
                    .count();
            let degree = m.var_triads[v].len() + m.neighbors[v].len();
            let better = match best {
                None => true,
                Some((_, a, d)) => (active, degree) > (a, d),
            };
            if better {
                best = Some((v, active, degree));
            }
        }
        best.map(|b| b.0)
    }
}

/// Depth-first search; `nodes` counts every state visited.
fn search(m: &Model, st: State, nodes: &mut u64, cancel: &dyn Fn() -> bool) -> Option<State> {
    *nodes += 1;
    let Some(v) = st.choose(m) else {
        return Some(st);
    };
    for val in [0u8, 1] {
        if cancel() {
            return None;
        }
        let mut next = st.clone();
        if next.assign(m, v, val) {
            if let Some(done) = search(m, next, nodes, cancel) {
                return Some(done);
            }
        }
    }
    None
}

/// Open subtrees after `depth` decisions, in the order sequential search
/// would visit them.
fn frontier(m: &Model, st: State, depth: usize, nodes: &mut u64, out: &mut Vec<State>) {
    if depth == 0 {
        out.push(st);
        return;
    }
    *nodes += 1;
    let Some(v) = st.choose(m) else {
        // fully assigned before reaching the split depth: a leaf subtree
        *nodes -= 1;
        out.push(st);
        return;
    };
    for val in [0u8, 1] {
        let mut next = st.clone();
        if next.assign(m, v, val) {
            frontier(m, next, depth - 1, nodes, out);
        }
    }
}

fn finish(values: Vec<Option<u8>>) -> Coloring {
    Coloring {
        values: values.into_iter().map(|v| v.unwrap_or(1)).collect(),
    }
}

/// Deterministic backtracking search for a coloring with exactly one 0 per
/// triad and no two orthogonal 0s.
pub fn ks_color(g: &TriadGraph) -> KsOutcome {
    let m = Model::new(g);
    let mut nodes = 0;
    let st = State {
        values: vec![None; g.len()],
    };
    match search(&m, st, &mut nodes, &|| false) {
        Some(s) => KsOutcome::Colorable {
            coloring: finish(s.values),
            nodes,
        },
        None => KsOutcome::Uncolorable { nodes },
    }
}

/// Parallel variant: the first `split_depth` decision levels are expanded
/// and the resulting subtrees searched concurrently. The coloring from the
/// lowest-indexed successful subtree is returned, so the result matches
/// [`ks_color`]. The node count is exact for uncolorable graphs; for
/// colorable ones it depends on scheduling.
pub fn ks_color_parallel(g: &TriadGraph, workers: usize) -> KsOutcome {
    let m = Model::new(g);
    let split_depth = workers.max(1).next_power_of_two().trailing_zeros() as usize + 1;
    let mut nodes = 0;
    let mut roots = Vec::new();
    frontier(
        &m,
        State {
            values: vec![None; g.len()],
        },
        split_depth,
        &mut nodes,
        &mut roots,
    );
    let best = AtomicUsize::new(usize::MAX);
    let run = || {
        roots
            .par_iter()
            .enumerate()
            .map(|(k, st)| {
                let mut n = 0;
                let cancel = || best.load(Ordering::Relaxed) < k;
                let found = search(&m, st.clone(), &mut n, &cancel);
                if found.is_some() {
                    best.fetch_min(k, Ordering::Relaxed);
                }
                (found, n)
            })
            .collect::<Vec<_>>()
    };
    let results = match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    };
    nodes += results.iter().map(|r| r.1).sum::<u64>();
    match results.into_iter().find_map(|r| r.0) {
        Some(s) => KsOutcome::Colorable {
            coloring: finish(s.values),
            nodes,
        },
        None => KsOutcome::Uncolorable { nodes },
    }
}
