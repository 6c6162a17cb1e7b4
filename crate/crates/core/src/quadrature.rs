//! One-dimensional Gauss–Legendre rules, composite and adaptive variants,
//! and compensated summation.

use crate::error::{Error, Result};

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut acc = Neumaier::default();
    for v in it {
        acc.add(v);
    }
    acc.value()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// `n`-point rule; nodes by Newton iteration on the three-term
    /// recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        neumaier_sum(self.mapped(a, b).map(|(x, w)| w * f(x)).collect::<Vec<_>>())
    }

    /// `∫ f` together with the same rule applied to `|f|`.
    pub fn integrate_with_abs<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> (f64, f64) {
        let terms: Vec<f64> = self.mapped(a, b).map(|(x, w)| w * f(x)).collect();
        (neumaier_sum(terms.iter().copied()), neumaier_sum(terms.iter().map(|t| t.abs())))
    }

    /// Nodes and weights of the composite rule over `panels` equal panels.
    pub fn composite_nodes(&self, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        let h = (b - a) / panels as f64;
        (0..panels).flat_map(|k| self.mapped(a + k as f64 * h, a + (k + 1) as f64 * h).collect::<Vec<_>>()).collect()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Adaptive Gauss–Legendre quadrature: a panel is accepted when the rule
/// on it agrees with the sum of the rule on its two halves. Relative
/// tolerances refer to `∫|f|`, so cancelling integrands do not force
/// refinement to round-off.
#[derive(Clone, Debug)]
pub struct Adaptive {
    rule: GaussRule,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: usize,
}

impl Default for Adaptive {
    fn default() -> Self {
        Adaptive { rule: GaussRule::new(10), abs_tol: 1e-13, rel_tol: 1e-11, max_depth: 40 }
    }
}

impl Adaptive {
    pub fn new(order: usize, abs_tol: f64, rel_tol: f64) -> Self {
        Adaptive { rule: GaussRule::new(order), abs_tol, rel_tol, max_depth: 40 }
    }

    /// Integrates over `[a, b]` split at the given interior breakpoints.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64, breaks: &[f64]) -> Result<Estimate> {
        let mut pts = vec![a];
        pts.extend(breaks.iter().copied().filter(|x| *x > a && *x < b));
        pts.push(b);
        pts.sort_by(f64::total_cmp);
        let mut total = Neumaier::default();
        let mut err = 0.0;
        let mut evals = 0;
        let mut failed = false;
        let mut l1 = 0.0;
        for w in pts.windows(2) {
            let (coarse, scale_hint) = self.rule.integrate_with_abs(&mut f, w[0], w[1]);
            evals += self.rule.len();
            l1 += scale_hint;
            let mut stack = vec![(w[0], w[1], coarse, 0usize)];
            while let Some((lo, hi, whole, depth)) = stack.pop() {
                let mid = 0.5 * (lo + hi);
                let left = self.rule.integrate(&mut f, lo, mid);
                let right = self.rule.integrate(&mut f, mid, hi);
                evals += 2 * self.rule.len();
                let diff = (left + right - whole).abs();
                let width = (hi - lo) / (w[1] - w[0]);
                let allowed = (self.abs_tol + self.rel_tol * scale_hint) * width.max(1e-3);
                if diff <= allowed || depth >= self.max_depth {
                    if diff > allowed {
                        failed = true;
                    }
                    total.add(left + right);
                    err += diff;
                } else {
                    stack.push((mid, hi, right, depth + 1));
                    stack.push((lo, mid, left, depth + 1));
                }
            }
        }
        let value = total.value();
        let budget = self.abs_tol + self.rel_tol * l1.max(value.abs());
        if failed && err > budget {
            return Err(Error::ToleranceNotMet { estimate: err, tol: budget });
        }
        Ok(Estimate { value, error: err, evaluations: evals })
    }
}
