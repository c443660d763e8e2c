//! Gauss-Legendre nodes and weights on [-1, 1].
//!
//! Roots of P_n are found by Newton iteration from the Chebyshev-like
//! initial guess cos(pi (i - 1/4) / (n + 1/2)); weights follow from
//! w_i = 2 / ((1 - x_i^2) P_n'(x_i)^2). This stays accurate and fast up
//! to the orders needed here (tens of thousands), where eigenvalue-based
//! constructions become prohibitively slow.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// A Gauss-Legendre rule of fixed order.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Rules already solved this process, keyed by order. High orders cost
/// seconds to construct and are requested repeatedly (one per gain
/// context), so they are shared.
static RULE_CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();

/// Evaluates (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0; // P_0
    let mut p = x; // P_1
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
    let dp = (n as f64) * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

impl GaussLegendre {
    pub fn new(order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::invalid("order", "quadrature order must be >= 1"));
        }
        if order == 1 {
            return Ok(GaussLegendre {
                nodes: vec![0.0],
                weights: vec![2.0],
            });
        }
        let n = order;
        let half = n / 2;
        // roots come in +/- pairs; solve the positive half
        let mut pos: Vec<(f64, f64)> = (0..half)
            .into_par_iter()
            .map(|i| {
                let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                let mut dp = 0.0;
                for _ in 0..100 {
                    let (p, d) = legendre_with_derivative(n, x);
                    dp = d;
                    let dx = p / d;
                    x -= dx;
                    if dx.abs() <= 1e-15 * x.abs().max(1e-3) {
                        let (p2, d2) = legendre_with_derivative(n, x);
                        dp = d2;
                        x -= p2 / d2;
                        break;
                    }
                }
                let w = 2.0 / ((1.0 - x * x) * dp * dp);
                (x, w)
            })
            .collect();
        pos.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for &(x, w) in pos.iter().rev() {
            nodes.push(-x);
            weights.push(w);
        }
        if n % 2 == 1 {
            let (_, dp) = legendre_with_derivative(n, 0.0);
            nodes.push(0.0);
            weights.push(2.0 / (dp * dp));
        }
        for &(x, w) in &pos {
            nodes.push(x);
            weights.push(w);
        }
        Ok(GaussLegendre { nodes, weights })
    }

    /// Like [`GaussLegendre::new`] but shares previously solved rules.
    pub fn cached(order: usize) -> Result<Arc<GaussLegendre>> {
        let cache = RULE_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(rule) = cache.lock().unwrap().get(&order) {
            return Ok(Arc::clone(rule));
        }
        let rule = Arc::new(GaussLegendre::new(order)?);
        cache
            .lock()
            .unwrap()
            .entry(order)
            .or_insert_with(|| Arc::clone(&rule));
        Ok(rule)
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes in ascending order on [-1, 1].
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over [a, b].
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let scale = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + scale * x))
            .sum::<f64>()
            * scale
    }
}
