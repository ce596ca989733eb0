//! Galerkin matrix of the 2D screened hypersingular form
//! `a ∫∫ G(x,y) (p'(x) q'(y) + δ⁻² τ(x)·τ(y) p(x) q(y))` on closed polylines,
//! `G = K0(|x−y|/δ) / 2π`, P1 basis.

use super::kernel::{screened_kernel, screened_kernel_regular};
use crate::mesh::{dist, Point};
use nalgebra::DMatrix;
use std::f64::consts::PI;

const GAUSS_X: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GAUSS_W: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

fn gauss01() -> impl Iterator<Item = (f64, f64)> {
    GAUSS_X.iter().zip(GAUSS_W.iter()).map(|(&x, &w)| (0.5 * (x + 1.0), 0.5 * w))
}

struct Seg {
    a: Point,
    b: Point,
    len: f64,
    tan: Point,
}

impl Seg {
    fn new(a: Point, b: Point) -> Self {
        let len = dist(a, b);
        Seg { a, b, len, tan: [(b[0] - a[0]) / len, (b[1] - a[1]) / len] }
    }

    fn at(&self, t: f64) -> Point {
        [self.a[0] + t * (self.b[0] - self.a[0]), self.a[1] + t * (self.b[1] - self.a[1])]
    }
}

/// `∫_0^1 ln|x − y(t)| (1−t, t) dt` for `y` running over the segment.
fn log_moments(x: Point, seg: &Seg) -> [f64; 2] {
    let u = (x[0] - seg.a[0]) * seg.tan[0] + (x[1] - seg.a[1]) * seg.tan[1];
    let d = ((x[0] - seg.a[0]) * seg.tan[1] - (x[1] - seg.a[1]) * seg.tan[0]).abs();
    let d = if d < 1e-14 * seg.len { 0.0 } else { d };
    let xlog = |s: f64| {
        let r2 = s * s + d * d;
        if r2 == 0.0 { 0.0 } else { r2.ln() }
    };
    // antiderivatives in s of ln r and s ln r, r² = s² + d²
    let f0 = |s: f64| {
        let at = if d > 0.0 { 2.0 * d * (s / d).atan() } else { 0.0 };
        0.5 * (s * xlog(s) - 2.0 * s + at)
    };
    let f1 = |s: f64| 0.25 * ((s * s + d * d) * xlog(s) - s * s);
    let (s0, s1) = (-u, seg.len - u);
    let i0 = (f0(s1) - f0(s0)) / seg.len;
    let i1 = ((f1(s1) - f1(s0)) + u * (f0(s1) - f0(s0))) / (seg.len * seg.len);
    [i0 - i1, i1]
}

/// `∫_e ∫_f G(x,y) φ_a(x) φ_b(y)` for the two P1 hats of each segment.
fn kernel_moments(e: &Seg, f: &Seg, delta: f64, near: bool) -> [[f64; 2]; 2] {
    let mut m = [[0.0; 2]; 2];
    for (s, ws) in gauss01() {
        let x = e.at(s);
        let phi_x = [1.0 - s, s];
        if near {
            let lm = log_moments(x, f);
            for a in 0..2 {
                for b in 0..2 {
                    m[a][b] -= ws * phi_x[a] * lm[b] / (2.0 * PI);
                }
            }
        }
        for (t, wt) in gauss01() {
            let r = dist(x, f.at(t));
            let g = if near { screened_kernel_regular(r, delta) } else { screened_kernel(r, delta) };
            let phi_y = [1.0 - t, t];
            for a in 0..2 {
                for b in 0..2 {
                    m[a][b] += ws * wt * g * phi_x[a] * phi_y[b];
                }
            }
        }
    }
    let scale = e.len * f.len;
    for row in &mut m {
        for v in row.iter_mut() {
            *v *= scale;
        }
    }
    m
}

fn find(parent: &mut [usize], mut v: usize) -> usize {
    while parent[v] != v {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    v
}

/// Connected component label of each edge, edges linked through shared nodes.
pub(crate) fn edge_components(num_nodes: usize, edges: &[[usize; 2]]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..num_nodes).collect();
    for e in edges {
        let (ra, rb) = (find(&mut parent, e[0]), find(&mut parent, e[1]));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    edges.iter().map(|e| find(&mut parent, e[0])).collect()
}

/// Assembles the form over `edges` (oriented node pairs into `points`).
/// Edge pairs on different connected curves do not interact.
pub fn hypersingular_matrix(points: &[Point], edges: &[[usize; 2]], a: f64, delta: f64) -> DMatrix<f64> {
    let n = points.len();
    let segs: Vec<Seg> = edges.iter().map(|e| Seg::new(points[e[0]], points[e[1]])).collect();
    let comp = edge_components(n, edges);
    let inv_d2 = 1.0 / (delta * delta);
    let mut t = DMatrix::<f64>::zeros(n, n);
    for (ie, e) in segs.iter().enumerate() {
        let de = [-1.0 / e.len, 1.0 / e.len];
        for (jf, f) in segs.iter().enumerate() {
            if comp[ie] != comp[jf] {
                continue;
            }
            let mid_gap = dist(e.at(0.5), f.at(0.5));
            let near = mid_gap < 1.5 * (e.len + f.len);
            let m = kernel_moments(e, f, delta, near);
            let total: f64 = m.iter().flatten().sum();
            let df = [-1.0 / f.len, 1.0 / f.len];
            let tt = e.tan[0] * f.tan[0] + e.tan[1] * f.tan[1];
            for k in 0..2 {
                for l in 0..2 {
                    let v = a * (de[k] * df[l] * total + inv_d2 * tt * m[k][l]);
                    t[(edges[ie][k], edges[jf][l])] += v;
                }
            }
        }
    }
    let tt = t.transpose();
    (t + tt) * 0.5
}
