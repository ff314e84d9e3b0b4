//! Equispaced Lagrange basis of degree `k` on a triangle, written in
//! barycentric coordinates, with quadrature tabulations on the reference
//! element.

use super::quadrature::{quad_rule, QuadRule};

/// Factor `R_a(l) = prod_{j<a} (k l - j) / (j + 1)` and its derivative.
fn silvester(k: usize, a: usize, l: f64) -> (f64, f64) {
    let kf = k as f64;
    let mut v = 1.0;
    let mut d = 0.0;
    for j in 0..a {
        let f = (kf * l - j as f64) / (j as f64 + 1.0);
        let df = kf / (j as f64 + 1.0);
        d = d * f + v * df;
        v *= f;
    }
    (v, d)
}

/// Multi-indices `(a0, a1, a2)` with `a0 + a1 + a2 = k`; node position is
/// `a / k` in barycentric coordinates. Vertices come first, then edge nodes
/// (edge opposite vertex `i` for `i = 0, 1, 2`), then interior nodes.
pub fn lattice(k: usize) -> Vec<[usize; 3]> {
    let mut all = Vec::new();
    for a0 in (0..=k).rev() {
        for a1 in (0..=k - a0).rev() {
            all.push([a0, a1, k - a0 - a1]);
        }
    }
    let zeros = |a: &[usize; 3]| a.iter().filter(|&&x| x == 0).count();
    let mut out: Vec<[usize; 3]> = Vec::with_capacity(all.len());
    if k == 0 {
        return vec![[0, 0, 0]];
    }
    for i in 0..3 {
        let mut v = [0; 3];
        v[i] = k;
        out.push(v);
    }
    for i in 0..3 {
        let j = (i + 1) % 3;
        // edge opposite i, ordered by increasing a_{i+2}
        for p in 1..k {
            let mut v = [0; 3];
            v[(i + 2) % 3] = p;
            v[j] = k - p;
            out.push(v);
        }
    }
    out.extend(all.into_iter().filter(|a| zeros(a) == 0));
    out
}

#[derive(Debug, Clone)]
pub struct LagrangeElement {
    pub k: usize,
    pub nodes: Vec<[usize; 3]>,
}

impl LagrangeElement {
    pub fn new(k: usize) -> Self {
        Self { k, nodes: lattice(k) }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_bary(&self, a: usize) -> [f64; 3] {
        if self.k == 0 {
            return [1.0 / 3.0; 3];
        }
        let n = self.nodes[a];
        let k = self.k as f64;
        [n[0] as f64 / k, n[1] as f64 / k, n[2] as f64 / k]
    }

    /// Index of the node with the given multi-index.
    pub fn index_of(&self, a: [usize; 3]) -> Option<usize> {
        self.nodes.iter().position(|&n| n == a)
    }

    /// Local index of vertex node `i`.
    pub fn vertex_node(&self, i: usize) -> usize {
        if self.k == 0 {
            0
        } else {
            i
        }
    }

    pub fn values(&self, l: [f64; 3]) -> Vec<f64> {
        self.nodes
            .iter()
            .map(|a| (0..3).map(|i| silvester(self.k, a[i], l[i]).0).product())
            .collect()
    }

    /// Derivatives with respect to `l_0, l_1, l_2` (treated as independent).
    pub fn bary_derivatives(&self, l: [f64; 3]) -> [Vec<f64>; 3] {
        let mut out = [vec![0.0; self.len()], vec![0.0; self.len()], vec![0.0; self.len()]];
        for (n, a) in self.nodes.iter().enumerate() {
            let r: Vec<(f64, f64)> = (0..3).map(|i| silvester(self.k, a[i], l[i])).collect();
            out[0][n] = r[0].1 * r[1].0 * r[2].0;
            out[1][n] = r[0].0 * r[1].1 * r[2].0;
            out[2][n] = r[0].0 * r[1].0 * r[2].1;
        }
        out
    }

    /// Physical gradients given the constant barycentric gradients.
    pub fn gradients(&self, l: [f64; 3], grad_l: &[[f64; 2]; 3]) -> Vec<[f64; 2]> {
        let d = self.bary_derivatives(l);
        (0..self.len())
            .map(|n| {
                let mut g = [0.0; 2];
                for i in 0..3 {
                    g[0] += d[i][n] * grad_l[i][0];
                    g[1] += d[i][n] * grad_l[i][1];
                }
                g
            })
            .collect()
    }
}

/// Quadrature tabulation on the reference triangle.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub element: LagrangeElement,
    pub rule: QuadRule,
    pub bary: Vec<[f64; 3]>,
    /// `values[q][a]`
    pub values: Vec<Vec<f64>>,
    /// `dl[i][q][a]`: derivative with respect to `l_i`.
    pub dl: [Vec<Vec<f64>>; 3],
}

impl Tabulation {
    pub fn new(k: usize, degree: usize) -> Self {
        let element = LagrangeElement::new(k);
        let rule = quad_rule(degree);
        let bary = rule.barycentric();
        let values = bary.iter().map(|&l| element.values(l)).collect();
        let mut dl: [Vec<Vec<f64>>; 3] = Default::default();
        for &l in &bary {
            let d = element.bary_derivatives(l);
            for i in 0..3 {
                dl[i].push(d[i].clone());
            }
        }
        Self { element, rule, bary, values, dl }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_layout() {
        for k in 1..8 {
            let n = lattice(k);
            assert_eq!(n.len(), (k + 1) * (k + 2) / 2);
            assert_eq!(n[0], [k, 0, 0]);
            let mut s = n.clone();
            s.sort();
            s.dedup();
            assert_eq!(s.len(), n.len());
            for e in 0..3 {
                for p in 0..k.saturating_sub(1) {
                    assert_eq!(n[3 + e * (k - 1) + p][e], 0);
                }
            }
        }
    }

    #[test]
    fn kronecker_and_partition() {
        for k in 0..7 {
            let el = LagrangeElement::new(k);
            for a in 0..el.len() {
                let v = el.values(el.node_bary(a));
                for (b, x) in v.iter().enumerate() {
                    assert!((x - if a == b { 1.0 } else { 0.0 }).abs() < 1e-12);
                }
            }
            let l = [0.2, 0.3, 0.5];
            assert!((el.values(l).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn derivatives_by_finite_differences() {
        let el = LagrangeElement::new(5);
        let l = [0.21, 0.33, 0.46];
        let d = el.bary_derivatives(l);
        let h = 1e-6;
        for i in 0..3 {
            let mut lp = l;
            let mut lm = l;
            lp[i] += h;
            lm[i] -= h;
            let (vp, vm) = (el.values(lp), el.values(lm));
            for a in 0..el.len() {
                assert!(((vp[a] - vm[a]) / (2.0 * h) - d[i][a]).abs() < 1e-5);
            }
        }
    }
}
