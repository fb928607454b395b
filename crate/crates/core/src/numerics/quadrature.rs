//! Double-exponential and Gauss–Kronrod quadrature.

use std::f64::consts::FRAC_PI_2;

/// One node of a tanh-sinh rule on the unit interval.
///
/// `u` is the node position measured from the left end and `v = 1 - u` from
/// the right end; both are stored so nodes crowding an endpoint keep full
/// relative precision.
#[derive(Clone, Copy, Debug)]
pub struct DeNode {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    /// True when the node also belongs to the rule with step `2h`.
    pub coarse: bool,
}

/// Tanh-sinh rule on `[0, 1]` with step `h`.
#[derive(Clone, Debug)]
pub struct TanhSinh {
    pub h: f64,
    pub nodes: Vec<DeNode>,
}

impl TanhSinh {
    pub fn new(h: f64) -> Self {
        let mut nodes = Vec::new();
        // k = 0 node
        nodes.push(DeNode { u: 0.5, v: 0.5, w: 0.5 * h * FRAC_PI_2, coarse: true });
        let mut k = 1usize;
        loop {
            let s = k as f64 * h;
            let a = FRAC_PI_2 * s.sinh();
            let e = (-2.0 * a).exp();
            // g = 1 - tanh(a) = 2 e / (1 + e), measured from the far end
            let g = 2.0 * e / (1.0 + e);
            let ch = a.cosh();
            let w = 0.5 * h * FRAC_PI_2 * s.cosh() / (ch * ch);
            // stop once even an inverse-square-root endpoint singularity
            // contributes below double precision
            if w / g.sqrt() < 1e-17 || g < 1e-300 {
                break;
            }
            let coarse = k % 2 == 0;
            let half_g = 0.5 * g;
            nodes.push(DeNode { u: 1.0 - half_g, v: half_g, w, coarse });
            nodes.push(DeNode { u: half_g, v: 1.0 - half_g, w, coarse });
            k += 1;
        }
        Self { h, nodes }
    }

    /// Integrates `f` over `[a, b]`; returns `(I_h, I_2h)`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> (f64, f64) {
        self.integrate_with_distances(a, b, |x, _, _| f(x))
    }

    /// As [`TanhSinh::integrate`], but `f(x, x - a, b - x)` also receives the
    /// endpoint distances at full relative precision.
    pub fn integrate_with_distances<F: FnMut(f64, f64, f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> (f64, f64) {
        let len = b - a;
        let (mut fine, mut coarse) = (0.0, 0.0);
        for n in &self.nodes {
            let (dl, dr) = (len * n.u, len * n.v);
            let x = if n.u <= 0.5 { a + dl } else { b - dr };
            let y = f(x, dl, dr) * n.w;
            fine += y;
            if n.coarse {
                coarse += y;
            }
        }
        (fine * len, 2.0 * coarse * len)
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of a vector-valued adaptive integration.
#[derive(Clone, Debug)]
pub struct QuadResult {
    pub values: Vec<f64>,
    /// Per-component error estimate.
    pub errors: Vec<f64>,
    pub intervals: usize,
    pub converged: bool,
}

impl QuadResult {
    pub fn max_error(&self) -> f64 {
        self.errors.iter().fold(0.0, |m: f64, e| m.max(*e))
    }
}

struct Piece {
    a: f64,
    b: f64,
    val: Vec<f64>,
    err: Vec<f64>,
    key: f64,
}

fn gk15_vec<F: FnMut(f64, &mut [f64])>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [f64]) -> (Vec<f64>, Vec<f64>) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    f(c, buf);
    for i in 0..dim {
        k[i] = WGK[7] * buf[i];
        g[i] = WG[3] * buf[i];
    }
    for j in 0..7 {
        let dx = h * XGK[j];
        for x in [c - dx, c + dx] {
            f(x, buf);
            for i in 0..dim {
                k[i] += WGK[j] * buf[i];
                if j % 2 == 1 {
                    g[i] += WG[j / 2] * buf[i];
                }
            }
        }
    }
    let val: Vec<f64> = k.iter().map(|v| v * h).collect();
    let err: Vec<f64> = k.iter().zip(&g).map(|(kv, gv)| ((kv - gv) * h).abs()).collect();
    (val, err)
}

/// Adaptive Gauss–Kronrod (7/15) integration of a vector-valued function.
///
/// `f(x, out)` writes `dim` components. The interval is first cut into
/// `n_init` equal pieces; the piece with the largest error is bisected until
/// the summed error of every component is below `abs_tol + rel_tol * |I|`
/// or `max_intervals` is reached. Bisection order depends only on the
/// integrand, so results are reproducible.
pub fn gauss_kronrod_vec<F>(
    mut f: F,
    dim: usize,
    a: f64,
    b: f64,
    n_init: usize,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> QuadResult
where
    F: FnMut(f64, &mut [f64]),
{
    let mut buf = vec![0.0; dim];
    let n_init = n_init.max(1);
    let step = (b - a) / n_init as f64;
    let mut pieces: Vec<Piece> = (0..n_init)
        .map(|i| {
            let lo = a + step * i as f64;
            let hi = if i + 1 == n_init { b } else { lo + step };
            let (val, err) = gk15_vec(&mut f, lo, hi, dim, &mut buf);
            let key = err.iter().fold(0.0, |m: f64, e| m.max(*e));
            Piece { a: lo, b: hi, val, err, key }
        })
        .collect();
    loop {
        let mut total = vec![0.0; dim];
        let mut errs = vec![0.0; dim];
        for p in &pieces {
            for i in 0..dim {
                total[i] += p.val[i];
                errs[i] += p.err[i];
            }
        }
        let ok = (0..dim).all(|i| errs[i] <= abs_tol + rel_tol * total[i].abs());
        if ok || pieces.len() >= max_intervals {
            return QuadResult { values: total, errors: errs, intervals: pieces.len(), converged: ok };
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, bk), (i, p)| if p.key > bk { (i, p.key) } else { (bi, bk) });
        let p = pieces.swap_remove(idx);
        let mid = 0.5 * (p.a + p.b);
        for (lo, hi) in [(p.a, mid), (mid, p.b)] {
            let (val, err) = gk15_vec(&mut f, lo, hi, dim, &mut buf);
            let key = err.iter().fold(0.0, |m: f64, e| m.max(*e));
            pieces.push(Piece { a: lo, b: hi, val, err, key });
        }
        // keep a canonical order so summation order does not depend on history
        pieces.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap());
    }
}

/// Scalar convenience wrapper around [`gauss_kronrod_vec`].
pub fn gauss_kronrod<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> (f64, f64) {
    let r = gauss_kronrod_vec(|x, out| out[0] = f(x), 1, a, b, 1, abs_tol, rel_tol, 2000);
    (r.values[0], r.errors[0])
}

/// Fixed composite rule for integrands with algebraic singularities at
/// known breakpoints.
///
/// Every panel between consecutive breakpoints is cut into pieces no longer
/// than `max_len`. Pieces touching a breakpoint use tanh-sinh, the others
/// 15-point Kronrod; `coarse` holds the weights of the embedded lower-order
/// rule (step `2h`, resp. 7-point Gauss) at the same nodes.
#[derive(Clone, Debug)]
pub struct PanelRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub coarse: Vec<f64>,
}

impl PanelRule {
    pub fn new(breaks: &[f64], max_len: f64, h: f64) -> Self {
        let ts = TanhSinh::new(h);
        let mut rule = PanelRule { nodes: Vec::new(), weights: Vec::new(), coarse: Vec::new() };
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let m = ((b - a) / max_len).ceil().max(1.0) as usize;
            let step = (b - a) / m as f64;
            for i in 0..m {
                let lo = a + step * i as f64;
                let hi = if i + 1 == m { b } else { lo + step };
                if i == 0 || i + 1 == m {
                    rule.push_tanh_sinh(&ts, lo, hi);
                } else {
                    rule.push_kronrod(lo, hi);
                }
            }
        }
        rule
    }

    fn push_tanh_sinh(&mut self, ts: &TanhSinh, a: f64, b: f64) {
        let len = b - a;
        for n in &ts.nodes {
            self.nodes.push(if n.u <= 0.5 { a + len * n.u } else { b - len * n.v });
            self.weights.push(n.w * len);
            self.coarse.push(if n.coarse { 2.0 * n.w * len } else { 0.0 });
        }
    }

    fn push_kronrod(&mut self, a: f64, b: f64) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes.push(c);
        self.weights.push(WGK[7] * h);
        self.coarse.push(WG[3] * h);
        for j in 0..7 {
            let g = if j % 2 == 1 { WG[j / 2] * h } else { 0.0 };
            for x in [c - h * XGK[j], c + h * XGK[j]] {
                self.nodes.push(x);
                self.weights.push(WGK[j] * h);
                self.coarse.push(g);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the fine and coarse rules to sampled values; sums are
    /// pairwise so the result does not depend on how samples were computed.
    pub fn apply<T>(&self, values: &[T]) -> (T, T)
    where
        T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + num_traits::Zero,
    {
        let fine: Vec<T> = values.iter().zip(&self.weights).map(|(&v, &w)| v * w).collect();
        let coarse: Vec<T> = values.iter().zip(&self.coarse).map(|(&v, &w)| v * w).collect();
        (crate::scalar::pairwise_sum(&fine), crate::scalar::pairwise_sum(&coarse))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        let rule = TanhSinh::new(1.0 / 16.0);
        let (fine, coarse) = rule.integrate(0.0, 1.0, |x| 1.0 / x.sqrt());
        assert!((fine - 2.0).abs() < 1e-12, "{fine}");
        assert!((coarse - 2.0).abs() < 1e-6);
        let (v, _) = rule.integrate_with_distances(-1.0, 1.0, |_, dl, dr| 1.0 / (dl * dr).sqrt());
        assert!((v - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn kronrod_polynomial_and_oscillatory() {
        let (v, e) = gauss_kronrod(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, 1e-14, 0.0);
        assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-12 && e < 1e-12);
        let (v, _) = gauss_kronrod(|x| (20.0 * x).cos(), 0.0, 10.0, 1e-13, 0.0);
        assert!((v - (200.0f64).sin() / 20.0).abs() < 1e-12);
    }

    #[test]
    fn vector_components_share_subdivision() {
        let r = gauss_kronrod_vec(
            |x, out| {
                out[0] = x.exp();
                out[1] = (x * x).sin();
            },
            2,
            0.0,
            3.0,
            4,
            1e-13,
            0.0,
            500,
        );
        assert!(r.converged);
        assert!((r.values[0] - (3f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn panel_rule_with_interior_singularities() {
        // |x - 1/3|^(1/2) on [0, 1] with a breakpoint at 1/3
        let rule = PanelRule::new(&[0.0, 1.0 / 3.0, 1.0], 0.1, 1.0 / 8.0);
        let vals: Vec<f64> = rule.nodes.iter().map(|x| (x - 1.0 / 3.0f64).abs().sqrt()).collect();
        let (fine, coarse) = rule.apply(&vals);
        let exact = 2.0 / 3.0 * ((1.0f64 / 3.0).powf(1.5) + (2.0f64 / 3.0).powf(1.5));
        assert!((fine - exact).abs() < 1e-13, "{}", fine - exact);
        assert!((coarse - exact).abs() < 1e-6);
    }
}
