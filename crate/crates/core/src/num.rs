//! Exact scalar and matrix helpers over `BigInt` / `BigRational`.

use num_bigint::{BigInt, Sign};
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

use crate::error::{Error, Result};

pub type Integer = BigInt;
pub type Rational = BigRational;
pub type RatMatrix = Vec<Vec<Rational>>;

pub fn int(n: i64) -> Integer {
    BigInt::from(n)
}

pub fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_rat(n: &Integer) -> Rational {
    BigRational::from_integer(n.clone())
}

pub fn to_rats(v: &[Integer]) -> Vec<Rational> {
    v.iter().map(to_rat).collect()
}

/// Returns the integer value of `q` if it has denominator one.
pub fn as_integer(q: &Rational) -> Option<Integer> {
    q.is_integer().then(|| q.to_integer())
}

/// Parses `"3/2"`, `"-4"` or a finite decimal such as `"0.1"` or `"-2.50"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("not a rational number: `{s}`"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, fractional)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), fractional);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let mut n: BigInt = digits.parse().map_err(|_| bad())?;
        if negative {
            n = -n;
        }
        let d = num_traits::pow(BigInt::from(10), fractional.len());
        return Ok(BigRational::new(n, d));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

pub fn parse_integer(s: &str) -> Result<Integer> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("not an integer: `{s}`")))
}

/// `Some(r)` with `r >= 0` and `r*r == n` when `n` is a perfect square.
pub fn exact_sqrt(n: &Integer) -> Option<Integer> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Exact square root of a nonnegative rational, if it is rational.
pub fn exact_sqrt_rational(q: &Rational) -> Option<Rational> {
    let n = exact_sqrt(q.numer())?;
    let d = exact_sqrt(q.denom())?;
    Some(BigRational::new(n, d))
}

/// Decimal expansion of `sqrt(q)` truncated to `digits` places after the point.
pub fn sqrt_decimal(q: &Rational, digits: usize) -> String {
    assert!(!q.is_negative(), "square root of a negative rational");
    let scale = num_traits::pow(BigInt::from(10), 2 * digits);
    let scaled = (q.numer() * scale) / q.denom();
    let root = scaled.sqrt();
    let s = root.to_str_radix(10);
    let s = if s.len() <= digits {
        format!("{}{}", "0".repeat(digits + 1 - s.len()), s)
    } else {
        s
    };
    let (int_part, frac_part) = s.split_at(s.len() - digits);
    if digits == 0 {
        int_part.to_string()
    } else {
        format!("{int_part}.{frac_part}")
    }
}

pub fn floor(q: &Rational) -> Integer {
    q.floor().to_integer()
}

pub fn ceil(q: &Rational) -> Integer {
    q.ceil().to_integer()
}

pub fn to_f64(q: &Rational) -> f64 {
    // Scale both parts down together so that very large numerators do not
    // overflow to infinity on their own.
    let n = q.numer();
    let d = q.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    if shift == 0 {
        return n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN);
    }
    let n = n >> shift;
    let d = d >> shift;
    n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
}

pub fn gcd_all<'a>(values: impl IntoIterator<Item = &'a Integer>) -> Integer {
    values
        .into_iter()
        .fold(BigInt::zero(), |acc, x| acc.gcd(x))
}

/// Extended Euclid: returns `(g, x, y)` with `a*x + b*y = g >= 0`.
pub fn ext_gcd(a: &Integer, b: &Integer) -> (Integer, Integer, Integer) {
    let e = a.extended_gcd(b);
    if e.gcd.sign() == Sign::Minus {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn identity(n: usize) -> RatMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { rat(1) } else { rat(0) }).collect())
        .collect()
}

pub fn transpose(m: &RatMatrix) -> RatMatrix {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len())
        .map(|j| m.iter().map(|row| row[j].clone()).collect())
        .collect()
}

pub fn mat_mul(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            assert_eq!(row.len(), inner);
            (0..cols)
                .map(|j| (0..inner).map(|k| &row[k] * &b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &RatMatrix, v: &[Rational]) -> Vec<Rational> {
    a.iter().map(|row| dot(row, v)).collect()
}

/// `x^T m y`.
pub fn bilinear(m: &RatMatrix, x: &[Rational], y: &[Rational]) -> Rational {
    dot(x, &mat_vec(m, y))
}

pub fn int_matrix_to_rat(m: &[Vec<Integer>]) -> RatMatrix {
    m.iter().map(|row| to_rats(row)).collect()
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut RatMatrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let delta = &f * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &RatMatrix) -> usize {
    let mut m = m.clone();
    rref(&mut m).len()
}

/// Basis of the right null space `{x : m x = 0}`, one vector per free column.
pub fn nullspace(m: &RatMatrix, cols: usize) -> Vec<Vec<Rational>> {
    let mut r = m.clone();
    let pivots = rref(&mut r);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![rat(0); cols];
            x[f] = rat(1);
            for (row, &p) in pivots.iter().enumerate() {
                x[p] = -r[row][f].clone();
            }
            x
        })
        .collect()
}

/// Solves `m x = b` for square invertible `m`.
pub fn solve(m: &RatMatrix, b: &[Rational]) -> Option<Vec<Rational>> {
    let n = m.len();
    let mut aug: RatMatrix = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() != n || pivots.iter().any(|&p| p >= n) {
        return None;
    }
    Some(aug.into_iter().map(|row| row[n].clone()).collect())
}

pub fn inverse(m: &RatMatrix) -> Option<RatMatrix> {
    let n = m.len();
    let mut aug: RatMatrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { rat(1) } else { rat(0) }));
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() != n || pivots.iter().any(|&p| p >= n) {
        return None;
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn determinant(m: &RatMatrix) -> Rational {
    let n = m.len();
    let mut a = m.clone();
    let mut det = rat(1);
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return rat(0);
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= &a[c][c];
        for i in c + 1..n {
            if !a[i][c].is_zero() {
                let f = &a[i][c] / &a[c][c];
                for j in c..n {
                    let delta = &f * &a[c][j];
                    a[i][j] -= delta;
                }
            }
        }
    }
    det
}

/// Leading principal minors `d_1, ..., d_n`.
pub fn leading_minors(m: &RatMatrix) -> Vec<Rational> {
    (1..=m.len())
        .map(|k| {
            let sub: RatMatrix = m[..k].iter().map(|row| row[..k].to_vec()).collect();
            determinant(&sub)
        })
        .collect()
}

/// Sylvester inertia `(positive, negative, zero)` of a symmetric matrix,
/// computed by exact congruence diagonalization.
pub fn inertia(m: &RatMatrix) -> (usize, usize, usize) {
    let n = m.len();
    let mut a = m.clone();
    let (mut pos, mut neg) = (0, 0);
    let mut k = 0;
    while k < n {
        if a[k][k].is_zero() {
            if let Some(j) = (k + 1..n).find(|&j| !a[j][j].is_zero()) {
                a.swap(k, j);
                for row in a.iter_mut() {
                    row.swap(k, j);
                }
            } else if let Some(j) = (k + 1..n).find(|&j| !a[k][j].is_zero()) {
                // row_k += row_j, col_k += col_j makes the pivot 2 a_kj.
                for c in 0..n {
                    let v = a[j][c].clone();
                    a[k][c] += v;
                }
                for r in 0..n {
                    let v = a[r][j].clone();
                    a[r][k] += v;
                }
            } else {
                k += 1;
                continue;
            }
        }
        let pivot = a[k][k].clone();
        if pivot.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        // Schur complement on the trailing block keeps the matrix symmetric.
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &pivot;
            for j in k + 1..n {
                let delta = &f * &a[k][j];
                a[i][j] -= delta;
            }
        }
        for r in k + 1..n {
            a[k][r] = rat(0);
            a[r][k] = rat(0);
        }
        k += 1;
    }
    let zero = n - pos - neg;
    (pos, neg, zero)
}

/// Negative definiteness via leading principal minors: `(-1)^k d_k > 0`.
pub fn is_negative_definite(m: &RatMatrix) -> bool {
    leading_minors(m)
        .iter()
        .enumerate()
        .all(|(i, d)| if i % 2 == 0 { d.is_negative() } else { d.is_positive() })
}

pub fn is_positive_definite(m: &RatMatrix) -> bool {
    leading_minors(m).iter().all(|d| d.is_positive())
}

/// Orders integer vectors by `(max |x_i|, lexicographic)`; used to pick
/// small deterministic representatives.
pub fn small_first(a: &[Integer], b: &[Integer]) -> Ordering {
    let norm = |v: &[Integer]| v.iter().map(|x| x.abs()).max().unwrap_or_default();
    norm(a).cmp(&norm(b)).then_with(|| a.cmp(b))
}
