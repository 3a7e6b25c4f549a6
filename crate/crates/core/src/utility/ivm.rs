//! Informative-vector-machine utility over feature vectors:
//! f(S) = 1/2 * log det(I + sigma^-2 * K_S,S) with a squared-exponential
//! kernel. The Cholesky factor of I + sigma^-2 * K grows by one row per
//! insertion, so a marginal gain costs one triangular solve.

use std::sync::Arc;

use crate::element::{Element, Payload};
use crate::oracle::{BoxedOracle, UtilityOracle};

pub const DEFAULT_SIGMA: f64 = 1.0;
pub const DEFAULT_BANDWIDTH: f64 = 0.75;

/// Pivots at or below this are treated as numerical rank deficiency
/// (e.g. near-duplicate points): the element adds no information.
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct IvmOracle {
    inv_sigma_sq: f64,
    inv_bandwidth_sq: f64,
    members: Vec<Arc<Vec<f64>>>,
    /// Lower-triangular factor of I + sigma^-2 * K; row i holds i+1 entries.
    factor: Vec<Vec<f64>>,
    /// Running 1/2 * log det = sum of ln of the factor diagonal.
    total: f64,
}

impl IvmOracle {
    pub fn new(sigma: f64, bandwidth: f64) -> Self {
        assert!(sigma > 0.0, "sigma must be positive");
        assert!(bandwidth > 0.0, "bandwidth must be positive");
        Self {
            inv_sigma_sq: 1.0 / (sigma * sigma),
            inv_bandwidth_sq: 1.0 / (bandwidth * bandwidth),
            members: Vec::new(),
            factor: Vec::new(),
            total: 0.0,
        }
    }

    pub fn with_defaults() -> Self {
        Self::new(DEFAULT_SIGMA, DEFAULT_BANDWIDTH)
    }

    fn features(element: &Element) -> &Arc<Vec<f64>> {
        match element.payload() {
            Payload::Features(v) => v,
            other => panic!("IVM utility expects a feature payload, got {other:?}"),
        }
    }

    fn kernel(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len(), "feature dimensions differ");
        let sq_dist: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        (-sq_dist * self.inv_bandwidth_sq).exp()
    }

    /// New row of the factor for point `v`: the solved off-diagonal part and
    /// the squared pivot dvv - z'z (before the rank check).
    fn extend_row(&self, v: &[f64]) -> (Vec<f64>, f64) {
        let n = self.members.len();
        let mut rhs: Vec<f64> = (0..n)
            .map(|i| self.inv_sigma_sq * self.kernel(&self.members[i], v))
            .collect();
        // Forward substitution: factor * z = rhs.
        for i in 0..n {
            let row = &self.factor[i];
            let dot: f64 = row[..i].iter().zip(&rhs[..i]).map(|(l, z)| l * z).sum();
            rhs[i] = (rhs[i] - dot) / row[i];
        }
        let dvv = 1.0 + self.inv_sigma_sq * self.kernel(v, v);
        let pivot_sq = dvv - rhs.iter().map(|z| z * z).sum::<f64>();
        (rhs, pivot_sq)
    }

    /// From-scratch factorization of I + sigma^-2 * K over the current
    /// members. Pivots that collapse numerically are floored at 1, the exact
    /// lower bound the identity part guarantees for the true matrix.
    fn refactorize(&mut self) {
        let n = self.members.len();
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = vec![0.0; i + 1];
            for j in 0..=i {
                let mut a = self.inv_sigma_sq * self.kernel(&self.members[i], &self.members[j]);
                if i == j {
                    a += 1.0;
                }
                let mut sum = a;
                for k in 0..j {
                    sum -= row[k] * rows[j][k];
                }
                if i == j {
                    row[j] = if sum <= RANK_TOL { 1.0 } else { sum.sqrt() };
                } else {
                    row[j] = sum / rows[j][j];
                }
            }
            rows.push(row);
        }
        self.total = rows.iter().enumerate().map(|(i, r)| r[i].ln()).sum();
        self.factor = rows;
    }
}

impl UtilityOracle for IvmOracle {
    fn utility(&self) -> f64 {
        self.total
    }

    fn gain(&self, element: &Element) -> f64 {
        let (_, pivot_sq) = self.extend_row(Self::features(element));
        if pivot_sq <= RANK_TOL {
            0.0
        } else {
            0.5 * pivot_sq.ln()
        }
    }

    fn insert(&mut self, element: &Element) {
        let v = Self::features(element).clone();
        let (mut row, pivot_sq) = self.extend_row(&v);
        self.members.push(v);
        if pivot_sq <= RANK_TOL {
            // Numerically rank deficient: rebuild the whole factor.
            self.refactorize();
            return;
        }
        let pivot = pivot_sq.sqrt();
        row.push(pivot);
        self.factor.push(row);
        self.total += pivot.ln();
    }

    fn reset(&mut self) {
        self.members.clear();
        self.factor.clear();
        self.total = 0.0;
    }

    fn boxed_clone(&self) -> BoxedOracle {
        Box::new(self.clone())
    }
}
