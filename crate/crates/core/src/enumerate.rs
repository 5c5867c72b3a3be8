//! Exact lattice-point enumeration in ellipsoids `x^T G x <= B` for a
//! positive definite rational Gram matrix (Fincke–Pohst).

use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::num::{floor, int, is_positive_definite, small_first, to_f64, Integer, RatMatrix, Rational};

/// Default cap on visited lattice points.
pub const DEFAULT_BUDGET: u64 = 1 << 20;

/// Environment variable overriding the enumeration budget.
pub const BUDGET_ENV: &str = "BRIDGELAND_BUDGET";

/// `BRIDGELAND_BUDGET` if set and parseable, else `fallback`.
pub fn budget_from_env(fallback: u64) -> u64 {
    std::env::var(BUDGET_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(fallback)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    /// Points passing the filter, sorted small first.
    pub points: Vec<Vec<Integer>>,
    /// Lattice points of the ellipsoid that were visited.
    pub visited: u64,
}

/// Upper-triangular data with `Q(x) = sum_i q_ii (x_i + sum_{j>i} q_ij x_j)^2`.
fn decompose(g: &RatMatrix) -> RatMatrix {
    let n = g.len();
    let mut q = g.clone();
    for i in 0..n {
        for j in i + 1..n {
            q[j][i] = q[i][j].clone();
            q[i][j] = &q[i][j] / &q[i][i];
        }
        for k in i + 1..n {
            for l in k..n {
                let t = &q[k][i] * &q[i][l];
                q[k][l] -= t;
            }
        }
    }
    q
}

/// Largest integer `k` with `k <= c + sqrt(r)`, for `r >= 0`.
fn floor_plus_sqrt(c: &Rational, r: &Rational) -> Integer {
    let ok = |k: &Integer| {
        let d = Rational::from_integer(k.clone()) - c;
        !d.is_positive() || &d * &d <= *r
    };
    let approx = to_f64(c) + to_f64(r).sqrt();
    let mut k = if approx.is_finite() {
        int(approx.floor() as i64)
    } else {
        floor(c)
    };
    while !ok(&k) {
        k -= 1;
    }
    loop {
        let next = &k + 1;
        if ok(&next) {
            k = next;
        } else {
            return k;
        }
    }
}

/// Smallest integer `k` with `k >= c - sqrt(r)`.
fn ceil_minus_sqrt(c: &Rational, r: &Rational) -> Integer {
    -floor_plus_sqrt(&-c, r)
}

struct Walker<'a, F> {
    q: &'a RatMatrix,
    budget: u64,
    visited: &'a AtomicU64,
    filter: &'a F,
}

impl<F: Fn(&[Integer]) -> bool + Sync> Walker<'_, F> {
    /// Fills coordinates `0..=i` given `x[i+1..]` and remaining budget `rem`.
    fn walk(&self, i: usize, x: &mut Vec<Integer>, rem: &Rational, out: &mut Vec<Vec<Integer>>) -> Result<()> {
        let n = self.q.len();
        let mut c = Rational::zero();
        for j in i + 1..n {
            if !x[j].is_zero() {
                c -= &self.q[i][j] * Rational::from_integer(x[j].clone());
            }
        }
        let r = rem / &self.q[i][i];
        let lo = ceil_minus_sqrt(&c, &r);
        let hi = floor_plus_sqrt(&c, &r);
        let mut k = lo;
        while k <= hi {
            let d = Rational::from_integer(k.clone()) - &c;
            let left = rem - &self.q[i][i] * &d * &d;
            x[i] = k.clone();
            if i == 0 {
                let seen = self.visited.fetch_add(1, AtomicOrdering::Relaxed) + 1;
                if seen > self.budget {
                    return Err(Error::BudgetExceeded {
                        budget: self.budget,
                        bound: String::new(),
                    });
                }
                if (self.filter)(x) {
                    out.push(x.clone());
                }
            } else {
                self.walk(i - 1, x, &left, out)?;
            }
            k += 1;
        }
        Ok(())
    }
}

/// All integer `x` with `x^T G x <= bound` that satisfy `filter`.
///
/// Fails when `G` is not positive definite or when more than `budget`
/// lattice points would have to be visited.
pub fn enumerate_ellipsoid<F>(g: &RatMatrix, bound: &Rational, budget: u64, filter: F) -> Result<Enumeration>
where
    F: Fn(&[Integer]) -> bool + Sync,
{
    let n = g.len();
    if n == 0 {
        return Ok(Enumeration {
            points: if filter(&[]) { vec![vec![]] } else { vec![] },
            visited: 1,
        });
    }
    if !is_positive_definite(g) {
        return Err(Error::InvalidInput("ellipsoid form is not positive definite".into()));
    }
    if bound.is_negative() {
        return Ok(Enumeration {
            points: vec![],
            visited: 0,
        });
    }
    let q = decompose(g);
    let visited = AtomicU64::new(0);
    let walker = Walker {
        q: &q,
        budget,
        visited: &visited,
        filter: &filter,
    };
    let last = n - 1;
    let r = bound / &q[last][last];
    let zero = Rational::zero();
    let lo = ceil_minus_sqrt(&zero, &r);
    let hi = floor_plus_sqrt(&zero, &r);
    let mut outer = Vec::new();
    let mut k = lo;
    while k <= hi {
        outer.push(k.clone());
        k += 1;
    }
    let slabs: Vec<Result<Vec<Vec<Integer>>>> = outer
        .into_par_iter()
        .map(|k| {
            let mut x = vec![Integer::zero(); n];
            let d = Rational::from_integer(k.clone());
            let left = bound - &q[last][last] * &d * &d;
            x[last] = k;
            let mut out = Vec::new();
            if last == 0 {
                let seen = visited.fetch_add(1, AtomicOrdering::Relaxed) + 1;
                if seen > budget {
                    return Err(Error::BudgetExceeded {
                        budget,
                        bound: String::new(),
                    });
                }
                if filter(&x) {
                    out.push(x);
                }
            } else {
                walker.walk(last - 1, &mut x, &left, &mut out)?;
            }
            Ok(out)
        })
        .collect();
    let mut points = Vec::new();
    for s in slabs {
        match s {
            Ok(p) => points.extend(p),
            Err(Error::BudgetExceeded { budget, .. }) => {
                return Err(Error::BudgetExceeded {
                    budget,
                    bound: bound.to_string(),
                })
            }
            Err(e) => return Err(e),
        }
    }
    points.sort_by(|a, b| small_first(a, b));
    Ok(Enumeration {
        points,
        visited: visited.load(AtomicOrdering::Relaxed),
    })
}

/// Integer box bound implied by `x^T G x <= bound`: `|x_i| <= sqrt(bound (G^{-1})_ii)`.
pub fn coordinate_bounds(g: &RatMatrix, bound: &Rational) -> Option<Vec<Integer>> {
    let inv = crate::num::inverse(g)?;
    Some(
        (0..g.len())
            .map(|i| floor_plus_sqrt(&Rational::zero(), &(bound * &inv[i][i]).max(Rational::zero())))
            .collect(),
    )
}
