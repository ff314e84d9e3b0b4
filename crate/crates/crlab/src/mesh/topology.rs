//! Nearly-critical vertices, their classification, fans and the
//! step-by-step extension sequence.

use super::{Point, Triangulation};
use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

/// Absolute slack on `Theta(z) <= eta`, so that exactly critical vertices
/// are still detected at `eta = 0` despite round-off in the angles.
pub const THETA_TOL: f64 = 1e-12;

/// Default `eta` used by the command-line driver.
pub const DEFAULT_ETA: f64 = 0.01;

/// Angles at `z` of its patch triangles, in patch order.
pub fn patch_angles(m: &Triangulation, z: usize) -> Vec<f64> {
    m.patches[z].iter().map(|&t| m.angle(t, z)).collect()
}

/// `Theta(z)`: the largest `|sin(w_i + w_{i+1})|` over consecutive patch
/// angles (cyclic for interior vertices).
pub fn theta(m: &Triangulation, z: usize) -> f64 {
    let w = patch_angles(m, z);
    let n = w.len();
    if m.on_boundary[z] {
        (0..n.saturating_sub(1)).map(|i| (w[i] + w[i + 1]).sin().abs()).fold(0.0, f64::max)
    } else {
        (0..n).map(|i| (w[i] + w[(i + 1) % n]).sin().abs()).fold(0.0, f64::max)
    }
}

/// Upper limit for `eta` given the minimal angle `phi` of the mesh.
pub fn eta0(phi: f64) -> f64 {
    let c1 = if phi <= PI / 8.0 {
        (2.0 * phi).sin().min((2.0 * PI - 4.0 * phi).sin().abs())
    } else if phi <= PI / 4.0 {
        (2.0 * phi).sin()
    } else {
        1.0
    };
    0.5f64.min(c1).min(3.0 * phi / PI).min(phi.sin())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalKind {
    Inner,
    Acute,
    Flat,
    Concave,
}

impl CriticalKind {
    pub fn is_obtuse(self) -> bool {
        self != CriticalKind::Acute
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CriticalClasses {
    pub inner: Vec<usize>,
    pub acute: Vec<usize>,
    pub flat: Vec<usize>,
    pub concave: Vec<usize>,
}

/// Per-vertex `Theta` values and the classification of eta-critical vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub eta: f64,
    pub theta: Vec<f64>,
    pub kind: Vec<Option<CriticalKind>>,
}

impl Classification {
    pub fn is_critical(&self, z: usize) -> bool {
        self.kind[z].is_some()
    }

    pub fn critical(&self) -> Vec<usize> {
        (0..self.kind.len()).filter(|&z| self.kind[z].is_some()).collect()
    }

    pub fn obtuse(&self) -> Vec<usize> {
        (0..self.kind.len()).filter(|&z| self.kind[z].is_some_and(|k| k.is_obtuse())).collect()
    }

    pub fn classes(&self) -> CriticalClasses {
        let mut c = CriticalClasses::default();
        for (z, k) in self.kind.iter().enumerate() {
            match k {
                Some(CriticalKind::Inner) => c.inner.push(z),
                Some(CriticalKind::Acute) => c.acute.push(z),
                Some(CriticalKind::Flat) => c.flat.push(z),
                Some(CriticalKind::Concave) => c.concave.push(z),
                None => {}
            }
        }
        c
    }

    /// Smallest `Theta` over non-critical vertices.
    pub fn theta_min(&self) -> Option<f64> {
        (0..self.theta.len())
            .filter(|&z| self.kind[z].is_none())
            .map(|z| self.theta[z])
            .fold(None, |m, t| Some(m.map_or(t, |m: f64| m.min(t))))
    }
}

/// Classifies every vertex with `Theta(z) <= eta`.
pub fn classify_critical(m: &Triangulation, eta: f64) -> Result<Classification> {
    if !(eta >= 0.0) {
        return Err(Error::InvalidInput(format!("eta must be non-negative, got {eta}")));
    }
    let phi = super::shape::shape_report(m).phi;
    let e0 = eta0(phi);
    if eta >= e0 {
        return Err(Error::EtaTooLarge { eta, eta0: e0 });
    }
    let theta: Vec<f64> = (0..m.n_vertices()).map(|z| theta(m, z)).collect();
    let mut kind = vec![None; m.n_vertices()];
    for z in 0..m.n_vertices() {
        let mz = m.patches[z].len();
        if m.on_boundary[z] && mz == 1 {
            kind[z] = Some(CriticalKind::Acute);
            continue;
        }
        if theta[z] > eta + THETA_TOL {
            continue;
        }
        kind[z] = Some(match (m.on_boundary[z], mz) {
            (false, 4) => CriticalKind::Inner,
            (true, 2) => CriticalKind::Flat,
            (true, 3) => CriticalKind::Concave,
            _ => return Err(Error::UnclassifiableCritical(z)),
        });
    }
    Ok(Classification { eta, theta, kind })
}

/// One fan: obtuse critical vertices `z_1..z_n` around a common apex, ordered
/// counterclockwise about the apex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fan {
    pub apex: usize,
    pub members: Vec<usize>,
    /// Chosen interior edge `[z_j, apex]` per member.
    pub edges: Vec<usize>,
    /// Unit normal per member: `apex - z_j` rotated by +90 degrees.
    pub normals: Vec<Point>,
    /// `K_1 .. K_{n+1}`; `K_j` has vertices `z_{j-1}, apex, z_j`.
    pub triangles: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FanDecomposition {
    pub fans: Vec<Fan>,
}

impl FanDecomposition {
    /// Fan index and position of an obtuse critical vertex.
    pub fn locate(&self, z: usize) -> Option<(usize, usize)> {
        self.fans
            .iter()
            .enumerate()
            .find_map(|(l, f)| f.members.iter().position(|&y| y == z).map(|j| (l, j)))
    }

    /// Triangles adjacent to the chosen edges of fan `l`.
    pub fn support(&self, m: &Triangulation, l: usize) -> BTreeSet<usize> {
        self.fans[l].edges.iter().flat_map(|&e| m.edges[e].tris.iter().copied()).collect()
    }

    pub fn supports_disjoint(&self, m: &Triangulation) -> bool {
        let s: Vec<_> = (0..self.fans.len()).map(|l| self.support(m, l)).collect();
        for a in 0..s.len() {
            for b in a + 1..s.len() {
                if s[a].intersection(&s[b]).next().is_some() {
                    return false;
                }
            }
        }
        true
    }
}

/// The chosen edge for an obtuse critical vertex: the interior edge whose
/// far endpoint has the largest `Theta`, ties broken by lowest index.
pub fn chosen_edge(m: &Triangulation, c: &Classification, z: usize) -> usize {
    let cand: Vec<usize> = m.vertex_edges(z).into_iter().filter(|&e| !m.edges[e].is_boundary()).collect();
    let mut best = cand[0];
    for &e in &cand[1..] {
        let a = m.edges[e].other_vertex(z);
        let b = m.edges[best].other_vertex(z);
        if c.theta[a] > c.theta[b] || (c.theta[a] == c.theta[b] && a < b) {
            best = e;
        }
    }
    best
}

fn find(p: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while p[r] != r {
        r = p[r];
    }
    let mut y = x;
    while p[y] != r {
        let n = p[y];
        p[y] = r;
        y = n;
    }
    r
}

/// Triangle with vertices `apex, a, b` where `a` follows `apex`
/// counterclockwise.
fn ccw_triangle(m: &Triangulation, apex: usize, a: usize, b: usize) -> Option<usize> {
    m.patches[apex].iter().copied().find(|&t| {
        let j = m.local_index(t, apex).unwrap();
        m.triangles[t][(j + 1) % 3] == a && m.triangles[t][(j + 2) % 3] == b
    })
}

pub fn fan_decomposition(m: &Triangulation, c: &Classification) -> Result<FanDecomposition> {
    let obtuse = c.obtuse();
    let mut chosen = BTreeMap::new();
    for &z in &obtuse {
        let e = chosen_edge(m, c, z);
        let apex = m.edges[e].other_vertex(z);
        if c.is_critical(apex) {
            return Err(Error::ApexCritical { vertex: z, apex });
        }
        chosen.insert(z, (e, apex));
    }
    let used: BTreeSet<usize> = chosen.values().map(|x| x.0).collect();
    if used.len() != chosen.len() {
        return Err(Error::PreconditionViolated("chosen edges are not distinct".into()));
    }

    let mut parent: Vec<usize> = (0..m.n_vertices()).collect();
    for &a in &obtuse {
        for &b in &obtuse {
            if a < b && chosen[&a].1 == chosen[&b].1 && m.edge_between(a, b).is_some() {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &z in &obtuse {
        let r = find(&mut parent, z);
        groups.entry(r).or_default().push(z);
    }

    let mut fans = Vec::new();
    for (_, g) in groups {
        let apex = chosen[&g[0]].1;
        let members = if g.len() == 1 {
            g.clone()
        } else {
            // successor of a in counterclockwise order around the apex
            let next = |a: usize| g.iter().copied().find(|&b| b != a && ccw_triangle(m, apex, a, b).is_some());
            let prev = |a: usize| g.iter().copied().find(|&b| b != a && ccw_triangle(m, apex, b, a).is_some());
            let start = g.iter().copied().find(|&a| prev(a).is_none()).ok_or_else(|| {
                Error::PreconditionViolated(format!("fan around apex {apex} is closed"))
            })?;
            let mut path = vec![start];
            while let Some(n) = next(*path.last().unwrap()) {
                if path.contains(&n) {
                    break;
                }
                path.push(n);
            }
            if path.len() != g.len() {
                return Err(Error::PreconditionViolated(format!("fan around apex {apex} is not a path")));
            }
            path
        };
        let n = members.len();
        let edges: Vec<usize> = members.iter().map(|z| chosen[z].0).collect();
        let normals = members
            .iter()
            .map(|&z| {
                let d = super::sub(m.vertices[apex], m.vertices[z]);
                let l = super::norm(d);
                [-d[1] / l, d[0] / l]
            })
            .collect();
        let mut triangles = Vec::with_capacity(n + 1);
        let before = |z: usize| {
            m.patches[apex].iter().copied().find(|&t| {
                let j = m.local_index(t, apex).unwrap();
                m.triangles[t][(j + 2) % 3] == z
            })
        };
        let after = |z: usize| {
            m.patches[apex].iter().copied().find(|&t| {
                let j = m.local_index(t, apex).unwrap();
                m.triangles[t][(j + 1) % 3] == z
            })
        };
        let missing = || Error::PreconditionViolated(format!("fan around apex {apex} lacks an outer triangle"));
        triangles.push(before(members[0]).ok_or_else(missing)?);
        for j in 1..n {
            triangles.push(ccw_triangle(m, apex, members[j - 1], members[j]).ok_or_else(missing)?);
        }
        triangles.push(after(members[n - 1]).ok_or_else(missing)?);
        fans.push(Fan { apex, members, edges, normals, triangles });
    }
    let d = FanDecomposition { fans };
    if !d.supports_disjoint(m) {
        return Err(Error::PreconditionViolated("fan supports overlap".into()));
    }
    Ok(d)
}

/// Patch of `z` ordered for the alternating functional. With an anchor
/// edge, the first two triangles share it; otherwise the stored
/// counterclockwise patch order is used.
pub fn functional_order(m: &Triangulation, z: usize, anchor: Option<usize>) -> Vec<usize> {
    let p = m.patches[z].clone();
    let Some(e) = anchor else { return p };
    let other = m.edges[e].other_vertex(z);
    let shared = |t: usize| {
        let j = m.local_index(t, z).unwrap();
        m.triangles[t][(j + 2) % 3]
    };
    let n = p.len();
    if m.on_boundary[z] {
        if n >= 2 && shared(p[0]) == other {
            p
        } else {
            p.into_iter().rev().collect()
        }
    } else {
        let i = (0..n).find(|&i| shared(p[i]) == other).unwrap_or(0);
        (0..n).map(|s| p[(i + s) % n]).collect()
    }
}

/// `T_1` plus the number of attachment steps needed to reach the whole mesh.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionSequence {
    pub levels: Vec<Vec<usize>>,
}

impl ExtensionSequence {
    pub fn steps(&self) -> usize {
        self.levels.len() - 1
    }
}

fn has_lonely_vertex(m: &Triangulation, set: &BTreeSet<usize>) -> bool {
    let mut count: BTreeMap<usize, usize> = BTreeMap::new();
    for &t in set {
        for &v in &m.triangles[t] {
            *count.entry(v).or_default() += 1;
        }
    }
    count.values().any(|&c| c == 1)
}

pub fn extension_sequence(m: &Triangulation) -> Result<ExtensionSequence> {
    let z = *m.interior_vertices().first().ok_or(Error::NoInnerVertex)?;
    let mut set: BTreeSet<usize> = m.patches[z].iter().copied().collect();
    loop {
        let mut grown = false;
        let cand: BTreeSet<usize> = set.iter().flat_map(|&t| m.neighbours(t)).filter(|t| !set.contains(t)).collect();
        for t in cand {
            set.insert(t);
            if has_lonely_vertex(m, &set) {
                set.remove(&t);
            } else {
                grown = true;
            }
        }
        if !grown {
            break;
        }
    }
    let mut levels = vec![set.iter().copied().collect::<Vec<_>>()];
    while set.len() < m.n_triangles() {
        let edges: BTreeSet<usize> = set.iter().flat_map(|&t| m.tri_edges[t]).collect();
        let next: BTreeSet<usize> =
            (0..m.n_triangles()).filter(|&t| m.tri_edges[t].iter().any(|e| edges.contains(e))).collect();
        if next.len() == set.len() {
            return Err(Error::NotExhaustive);
        }
        set = next;
        levels.push(set.iter().copied().collect());
    }
    Ok(ExtensionSequence { levels })
}

/// Serializable summary of the topology analysis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopologyReport {
    pub theta: Vec<f64>,
    pub eta: f64,
    pub eta0: f64,
    pub classes: CriticalClasses,
    pub theta_min: Option<f64>,
    pub fans: FanDecomposition,
    #[serde(rename = "extension_L")]
    pub extension_l: Option<usize>,
}

pub fn analyze(m: &Triangulation, eta: f64) -> Result<TopologyReport> {
    let c = classify_critical(m, eta)?;
    let fans = fan_decomposition(m, &c)?;
    let extension_l = match extension_sequence(m) {
        Ok(s) => Some(s.steps()),
        Err(Error::NoInnerVertex) => None,
        Err(e) => return Err(e),
    };
    Ok(TopologyReport {
        theta: c.theta.clone(),
        eta,
        eta0: eta0(super::shape::shape_report(m).phi),
        classes: c.classes(),
        theta_min: c.theta_min(),
        fans,
        extension_l,
    })
}
