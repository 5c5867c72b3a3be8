//! Support-property machinery: the kernel of a charge, definiteness tests,
//! the norm form `S` with `(v,v) = Z(v)^T S Z(v) - |||p(v)|||^2`, the minimal
//! root norm, the form `Q_Z`, and an exact replay of the equivalence between
//! the quadratic-form and norm formulations of the support condition.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::charge::{ChargeMap, ChargeParams};
use crate::enumerate::{enumerate_ellipsoid, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::lattice::NsLattice;
use crate::num::{
    bilinear, determinant, gcd_all, int, inverse, is_negative_definite, is_positive_definite, mat_mul, mat_vec,
    nullspace, rank, rat, solve, to_f64, to_rats, transpose, Integer, RatMatrix, Rational,
};

/// A quadratic form `Q(v) = v^T G v` on the coordinate lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RatMatrixRepr", into = "RatMatrixRepr")]
pub struct QuadraticForm {
    gram: RatMatrix,
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct RatMatrixRepr(#[serde(with = "crate::serde_util::rational_matrix")] RatMatrix);

impl TryFrom<RatMatrixRepr> for QuadraticForm {
    type Error = Error;
    fn try_from(r: RatMatrixRepr) -> Result<Self> {
        QuadraticForm::new(r.0)
    }
}

impl From<QuadraticForm> for RatMatrixRepr {
    fn from(q: QuadraticForm) -> Self {
        RatMatrixRepr(q.gram)
    }
}

impl QuadraticForm {
    pub fn new(gram: RatMatrix) -> Result<Self> {
        let n = gram.len();
        if gram.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("quadratic form must be square".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::InvalidInput("quadratic form must be symmetric".into()));
                }
            }
        }
        Ok(Self { gram })
    }

    /// The Mukai pairing of `lattice`.
    pub fn mukai(lattice: &NsLattice) -> Self {
        Self {
            gram: lattice.mukai_gram_rat(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            gram: crate::num::identity(n),
        }
    }

    pub fn gram(&self) -> &RatMatrix {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.gram.len()
    }

    pub fn eval(&self, v: &[Rational]) -> Rational {
        bilinear(&self.gram, v, v)
    }

    pub fn eval_int(&self, v: &[Integer]) -> Rational {
        let r = to_rats(v);
        self.eval(&r)
    }

    pub fn pair(&self, a: &[Rational], b: &[Rational]) -> Rational {
        bilinear(&self.gram, a, b)
    }

    /// Gram matrix of the restriction to the span of `basis`.
    pub fn restrict(&self, basis: &[Vec<Rational>]) -> RatMatrix {
        basis
            .iter()
            .map(|x| basis.iter().map(|y| self.pair(x, y)).collect())
            .collect()
    }
}

fn check_dim(z: &ChargeMap, q: &QuadraticForm) -> Result<()> {
    if z.dim() != q.dim() {
        return Err(Error::dims(q.dim(), z.dim()));
    }
    Ok(())
}

/// `[Re Z; Im Z]` as a 2 x n matrix.
fn charge_rows(z: &ChargeMap) -> RatMatrix {
    vec![z.re_row(), z.im_row()]
}

/// Scales a rational vector to a primitive integral one with positive first nonzero entry.
fn primitive_direction(v: &[Rational]) -> Vec<Rational> {
    let lcm = v
        .iter()
        .fold(Integer::one(), |acc, x| num_integer::Integer::lcm(&acc, x.denom()));
    let ints: Vec<Integer> = v.iter().map(|x| (x * Rational::from_integer(lcm.clone())).to_integer()).collect();
    let g = gcd_all(&ints);
    let sign = if ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        -Integer::one()
    } else {
        Integer::one()
    };
    ints.iter().map(|x| Rational::from_integer(x * &sign / &g)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChargeKernel {
    #[serde(with = "crate::serde_util::rational_matrix")]
    pub basis: Vec<Vec<Rational>>,
    /// Projection onto `Ker Z` along its orthogonal complement for the pairing.
    #[serde(with = "crate::serde_util::rational_matrix")]
    pub projector: RatMatrix,
}

/// Kernel of `Z` and the pairing-orthogonal projection onto it.
pub fn charge_kernel(z: &ChargeMap, pairing: &QuadraticForm) -> Result<ChargeKernel> {
    check_dim(z, pairing)?;
    let n = z.dim();
    let rows = charge_rows(z);
    if rank(&rows) < 2 {
        return Err(Error::Degenerate(
            "real and imaginary parts of Z are linearly dependent".into(),
        ));
    }
    let basis: Vec<Vec<Rational>> = nullspace(&rows, n).iter().map(|b| primitive_direction(b)).collect();
    if basis.is_empty() {
        return Ok(ChargeKernel {
            basis,
            projector: vec![vec![rat(0); n]; n],
        });
    }
    let gk = pairing.restrict(&basis);
    let gk_inv = inverse(&gk).ok_or_else(|| {
        Error::Degenerate("pairing is degenerate on Ker Z; projection undefined".into())
    })?;
    // p = B (B^T M B)^{-1} B^T M
    let bmat = transpose(&basis);
    let bt_m = mat_mul(&basis, &pairing.gram);
    let projector = mat_mul(&mat_mul(&bmat, &gk_inv), &bt_m);
    Ok(ChargeKernel { basis, projector })
}

impl ChargeKernel {
    pub fn project(&self, v: &[Rational]) -> Vec<Rational> {
        mat_vec(&self.projector, v)
    }
}

/// Exact test via leading principal minors of the restricted Gram matrix.
pub fn is_negative_definite_on(q: &QuadraticForm, basis: &[Vec<Rational>]) -> Result<bool> {
    if basis.is_empty() {
        return Ok(true);
    }
    if basis.iter().any(|b| b.len() != q.dim()) {
        return Err(Error::dims(q.dim(), basis[0].len()));
    }
    if rank(&basis.to_vec()) < basis.len() {
        return Err(Error::InvalidInput("subspace basis is linearly dependent".into()));
    }
    Ok(is_negative_definite(&q.restrict(basis)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassVerdict {
    #[serde(with = "crate::serde_util::integer_vec")]
    pub class: Vec<Integer>,
    #[serde(with = "crate::serde_util::rational")]
    pub q_value: Rational,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportReport {
    pub kernel_negative_definite: bool,
    pub classes: Vec<ClassVerdict>,
    pub all_pass: bool,
}

/// Checks that `Q` is negative definite on `Ker Z` and `Q(v) >= 0` on every
/// supplied class (declared by the caller to be classes of semistable objects).
pub fn support_check(q: &QuadraticForm, z: &ChargeMap, classes: &[Vec<Integer>]) -> Result<SupportReport> {
    check_dim(z, q)?;
    let kernel = nullspace(&charge_rows(z), z.dim());
    let kernel_negative_definite = is_negative_definite_on(q, &kernel)?;
    let mut verdicts = Vec::with_capacity(classes.len());
    for c in classes {
        if c.len() != q.dim() {
            return Err(Error::dims(q.dim(), c.len()));
        }
        let q_value = q.eval_int(c);
        verdicts.push(ClassVerdict {
            class: c.clone(),
            pass: !q_value.is_negative(),
            q_value,
        });
    }
    let all_pass = kernel_negative_definite && verdicts.iter().all(|v| v.pass);
    Ok(SupportReport {
        kernel_negative_definite,
        classes: verdicts,
        all_pass,
    })
}

/// A basis of the pairing-orthogonal complement of `Ker Z`.
fn kernel_complement(kernel: &ChargeKernel, form: &QuadraticForm) -> Vec<Vec<Rational>> {
    let n = form.dim();
    if kernel.basis.is_empty() {
        return crate::num::identity(n);
    }
    let bt_m = mat_mul(&kernel.basis, &form.gram);
    nullspace(&bt_m, n)
}

/// The positive 2 x 2 form `S` with `(v,v) = Z(v)^T S Z(v) - |||p(v)|||^2`,
/// where `|||k|||^2 = -(k,k)` on `Ker Z`.
pub fn charge_norm_form(z: &ChargeMap, kernel: &ChargeKernel, pairing: &QuadraticForm) -> Result<RatMatrix> {
    check_dim(z, pairing)?;
    if !is_negative_definite_on(pairing, &kernel.basis)? {
        return Err(Error::Degenerate(
            "pairing is not negative definite on Ker Z".into(),
        ));
    }
    let comp = kernel_complement(kernel, pairing);
    if comp.len() != 2 {
        return Err(Error::Degenerate(format!(
            "complement of Ker Z has dimension {}, expected 2",
            comp.len()
        )));
    }
    // Z restricted to the complement, as a 2 x 2 matrix in the basis `comp`
    let zm = mat_mul(&charge_rows(z), &transpose(&comp));
    let zm_inv = inverse(&zm).ok_or_else(|| Error::Degenerate("Z is not injective on the complement of its kernel".into()))?;
    let g = pairing.restrict(&comp);
    let s = mat_mul(&mat_mul(&transpose(&zm_inv), &g), &zm_inv);
    if !is_positive_definite(&s) {
        return Err(Error::Degenerate(
            "norm form is not positive definite: Z is outside the positive-plane locus".into(),
        ));
    }
    Ok(s)
}

/// `||Z(v)||_S^2` as a Gram matrix on the lattice: `R^T S R`.
pub fn charge_norm_gram(z: &ChargeMap, s: &RatMatrix) -> RatMatrix {
    let rows = charge_rows(z);
    mat_mul(&mat_mul(&transpose(&rows), s), &rows)
}

/// `|||p(v)|||^2 = -(p v, p v)` as a Gram matrix: `-P^T M P`.
pub fn projection_norm_gram(kernel: &ChargeKernel, pairing: &QuadraticForm) -> RatMatrix {
    let p = &kernel.projector;
    let m = mat_mul(&mat_mul(&transpose(p), &pairing.gram), p);
    m.into_iter().map(|r| r.into_iter().map(|x| -x).collect()).collect()
}

/// The auxiliary positive definite form `||Z(v)||_S^2 + |||p(v)|||^2`.
pub fn auxiliary_gram(z: &ChargeMap, kernel: &ChargeKernel, s: &RatMatrix, pairing: &QuadraticForm) -> RatMatrix {
    let a = charge_norm_gram(z, s);
    let b = projection_norm_gram(kernel, pairing);
    a.iter()
        .zip(&b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect())
        .collect()
}

/// Iterative-deepening schedule for the root search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootSearch {
    #[serde(with = "crate::serde_util::rational")]
    pub initial_bound: Rational,
    #[serde(with = "crate::serde_util::rational")]
    pub max_bound: Rational,
    pub budget: u64,
}

impl Default for RootSearch {
    fn default() -> Self {
        Self {
            initial_bound: rat(8),
            max_bound: rat(1 << 16),
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootNorm {
    /// Minimal `||Z(delta)||_S^2` over roots, or `None` if no root has
    /// norm at most `bound`.
    #[serde(with = "opt_rational")]
    pub c_squared: Option<Rational>,
    #[serde(with = "opt_integer_vec")]
    pub witness: Option<Vec<Integer>>,
    /// Last value of `B` searched: all roots with `||Z||_S^2 <= B` were enumerated.
    #[serde(with = "crate::serde_util::rational")]
    pub bound: Rational,
    pub visited: u64,
}

mod opt_rational {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match q {
            Some(q) => s.serialize_str(&q.to_string()),
            None => s.serialize_str("none"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rational>, D::Error> {
        let t = String::deserialize(d)?;
        if t == "none" {
            return Ok(None);
        }
        crate::num::parse_rational(&t).map(Some).map_err(serde::de::Error::custom)
    }
}

mod opt_integer_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vec<Integer>>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(v) => crate::serde_util::integer_vec::serialize(v, s),
            None => s.serialize_str("none"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<Integer>>, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Vec(#[serde(with = "crate::serde_util::integer_vec")] Vec<Integer>),
            Tag(serde::de::IgnoredAny),
        }
        match Repr::deserialize(d)? {
            Repr::Vec(v) => Ok(Some(v)),
            Repr::Tag(_) => Ok(None),
        }
    }
}

/// Minimizes `||Z(delta)||_S^2` over roots `(delta, delta) = -2`.
///
/// Every root satisfies `|||p(delta)|||^2 = 2 + ||Z(delta)||_S^2`, so the
/// roots with `||Z||_S^2 <= B` lie in the ellipsoid `Q_aux <= 2B + 2`; the
/// bound `B` doubles until a root is found or `max_bound` is passed.
pub fn min_root_norm(
    z: &ChargeMap,
    kernel: &ChargeKernel,
    s: &RatMatrix,
    pairing: &QuadraticForm,
    search: &RootSearch,
) -> Result<RootNorm> {
    check_dim(z, pairing)?;
    let aux = auxiliary_gram(z, kernel, s, pairing);
    let zn = charge_norm_gram(z, s);
    let m_int: Vec<Vec<Integer>> = pairing
        .gram
        .iter()
        .map(|r| {
            r.iter()
                .map(|x| if x.is_integer() { Ok(x.to_integer()) } else { Err(()) })
                .collect::<std::result::Result<Vec<_>, ()>>()
        })
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidInput("root search needs an integral pairing".into()))?;
    let is_root = |x: &[Integer]| {
        let mut acc = Integer::zero();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, xj) in x.iter().enumerate() {
                acc += &m_int[i][j] * xi * xj;
            }
        }
        acc == int(-2)
    };
    let mut bound = search.initial_bound.clone();
    let mut visited = 0;
    loop {
        let ellipsoid = rat(2) * &bound + rat(2);
        let e = enumerate_ellipsoid(&aux, &ellipsoid, search.budget, is_root)?;
        visited += e.visited;
        let mut best: Option<(Rational, Vec<Integer>)> = None;
        for p in e.points {
            let pr = to_rats(&p);
            let val = bilinear(&zn, &pr, &pr);
            let better = match &best {
                None => true,
                Some((b, w)) => val < *b || (val == *b && p < *w),
            };
            if better {
                best = Some((val, p));
            }
        }
        if let Some((val, w)) = best {
            return Ok(RootNorm {
                c_squared: Some(val),
                witness: Some(w),
                bound,
                visited,
            });
        }
        if bound >= search.max_bound {
            return Ok(RootNorm {
                c_squared: None,
                witness: None,
                bound,
                visited,
            });
        }
        bound = (bound * rat(2)).min(search.max_bound.clone());
    }
}

/// `Q_Z(v) = (v,v) + (2/C^2) ||Z(v)||_S^2`.
pub fn build_q_z(z: &ChargeMap, s: &RatMatrix, pairing: &QuadraticForm, c_squared: &Rational) -> Result<QuadraticForm> {
    check_dim(z, pairing)?;
    if !c_squared.is_positive() {
        return Err(Error::InvalidInput("C^2 must be positive".into()));
    }
    let k = rat(2) / c_squared;
    let zn = charge_norm_gram(z, s);
    let gram = pairing
        .gram
        .iter()
        .zip(&zn)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + &k * y).collect())
        .collect();
    QuadraticForm::new(gram)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundtripVerdict {
    #[serde(with = "crate::serde_util::integer_vec")]
    pub class: Vec<Integer>,
    /// `None` for classes with `Q(v) < 0`, which the statement does not cover.
    pub pass: Option<bool>,
    #[serde(with = "crate::serde_util::rational")]
    pub z_abs_sq: Rational,
    #[serde(with = "crate::serde_util::rational")]
    pub norm_sq: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundtripReport {
    /// `K > 0` with `K Q(b) <= |Z(b)|^2` on the complement of the kernel.
    #[serde(with = "crate::serde_util::rational")]
    pub k: Rational,
    /// `C^2 = K / (1 + K)`.
    #[serde(with = "crate::serde_util::rational")]
    pub c_squared: Rational,
    pub checked: usize,
    pub skipped: usize,
    pub all_pass: bool,
    pub classes: Vec<RoundtripVerdict>,
}

/// A rational `K > 0` with `N - K G` positive semidefinite, for 2 x 2 forms
/// with `N` positive definite. Uses `1 / lambda_max` (generalized eigenvalue)
/// when it is rational, otherwise a slightly smaller rational; `K = 1` when
/// `G` is negative semidefinite relative to `N`.
fn admissible_k(n: &RatMatrix, g: &RatMatrix) -> Rational {
    let psd = |k: &Rational| {
        let m: RatMatrix = n
            .iter()
            .zip(g)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - k * y).collect())
            .collect();
        !m[0][0].is_negative() && !m[1][1].is_negative() && !determinant(&m).is_negative()
    };
    // det(G - l N) = a l^2 + b l + c
    let a = determinant(n);
    let b = -(&g[0][0] * &n[1][1] + &g[1][1] * &n[0][0] - rat(2) * &g[0][1] * &n[0][1]);
    let c = determinant(g);
    let disc = &b * &b - rat(4) * &a * &c;
    let mut k = match crate::num::exact_sqrt_rational(&disc) {
        Some(root) => {
            let lmax = (-&b + root) / (rat(2) * &a);
            if lmax.is_positive() {
                rat(1) / lmax
            } else {
                rat(1)
            }
        }
        None => {
            let lmax = (-to_f64(&b) + to_f64(&disc).max(0.0).sqrt()) / (2.0 * to_f64(&a));
            if lmax > 0.0 && lmax.is_finite() {
                let scale = 1u64 << 30;
                let num = ((0.999 / lmax) * scale as f64).floor();
                if num >= 1.0 {
                    Rational::new(Integer::from(num as u64), Integer::from(scale))
                } else {
                    Rational::from_float(0.999 / lmax).unwrap_or_else(|| rat(1))
                }
            } else {
                rat(1)
            }
        }
    };
    while !psd(&k) {
        k /= rat(2);
    }
    k
}

/// Replays the constructive direction of the equivalence between the two
/// formulations of the support property: from `Q`, negative definite on
/// `Ker Z`, builds the norm `||a + b||^2 = -Q(a) + |Z(b)|^2` (`a` in the
/// kernel, `b` in its `Q`-orthogonal complement) and `C^2 = K/(1+K)`, then
/// checks `|Z(v)|^2 >= C^2 ||v||^2` for every class with `Q(v) >= 0`.
pub fn equivalent_support_roundtrip(q: &QuadraticForm, z: &ChargeMap, classes: &[Vec<Integer>]) -> Result<RoundtripReport> {
    check_dim(z, q)?;
    let n = z.dim();
    let rows = charge_rows(z);
    if rank(&rows) < 2 {
        return Err(Error::Degenerate(
            "real and imaginary parts of Z are linearly dependent".into(),
        ));
    }
    let kernel = nullspace(&rows, n);
    if !is_negative_definite_on(q, &kernel)? {
        return Err(Error::InvalidInput("Q is not negative definite on Ker Z".into()));
    }
    let comp = if kernel.is_empty() {
        crate::num::identity(n)
    } else {
        nullspace(&mat_mul(&kernel, &q.gram), n)
    };
    if comp.len() != 2 {
        return Err(Error::Degenerate("complement of Ker Z is not a plane".into()));
    }
    // |Z(b)|^2 and Q(b) on the complement
    let zc = mat_mul(&rows, &transpose(&comp));
    let nz = mat_mul(&transpose(&zc), &zc);
    let gq = q.restrict(&comp);
    let k = admissible_k(&nz, &gq);
    let c_squared = &k / (rat(1) + &k);
    // coordinates in kernel ⊕ complement
    let mut full_basis = kernel.clone();
    full_basis.extend(comp.iter().cloned());
    let bmat = transpose(&full_basis);
    let mut verdicts = Vec::with_capacity(classes.len());
    let (mut checked, mut skipped, mut all_pass) = (0, 0, true);
    for c in classes {
        if c.len() != n {
            return Err(Error::dims(n, c.len()));
        }
        let v = to_rats(c);
        let zv = z.eval_rat(&v);
        let z_abs_sq = zv.norm_sqr();
        let coeffs = solve(&bmat, &v).expect("kernel and complement span the space");
        let a: Vec<Rational> = (0..n)
            .map(|i| {
                kernel
                    .iter()
                    .zip(&coeffs)
                    .map(|(b, x)| &b[i] * x)
                    .fold(rat(0), |acc, t| acc + t)
            })
            .collect();
        let norm_sq = -q.eval(&a) + &z_abs_sq;
        let pass = if q.eval(&v).is_negative() {
            skipped += 1;
            None
        } else {
            checked += 1;
            let ok = z_abs_sq >= &c_squared * &norm_sq;
            all_pass &= ok;
            Some(ok)
        };
        verdicts.push(RoundtripVerdict {
            class: c.clone(),
            pass,
            z_abs_sq,
            norm_sq,
        });
    }
    Ok(RoundtripReport {
        k,
        c_squared,
        checked,
        skipped,
        all_pass,
        classes: verdicts,
    })
}

/// Classes with `Q_Z(v) >= 0` and `|Z(v)|^2 <= radius_sq`. The list is
/// finite: on such classes `|||p(v)|||^2 <= (1 + 2/C^2) ||Z(v)||_S^2`, so
/// they lie in the ellipsoid `Q_aux <= (2 + 2/C^2) tr(S) radius_sq`.
pub fn support_discreteness(
    z: &ChargeMap,
    kernel: &ChargeKernel,
    s: &RatMatrix,
    pairing: &QuadraticForm,
    c_squared: &Rational,
    radius_sq: &Rational,
    budget: u64,
) -> Result<Vec<Vec<Integer>>> {
    let qz = build_q_z(z, s, pairing, c_squared)?;
    let aux = auxiliary_gram(z, kernel, s, pairing);
    let trace = &s[0][0] + &s[1][1];
    let bound = (rat(2) + rat(2) / c_squared) * trace * radius_sq;
    let e = enumerate_ellipsoid(&aux, &bound, budget, |x| {
        let zv = z.eval(x);
        !qz.eval_int(x).is_negative() && zv.norm_sqr() <= *radius_sq
    })?;
    Ok(e.points)
}

/// Kernel, norm form, minimal root norm and `Q_Z` for a K3 charge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportAnalysis {
    pub charge: ChargeMap,
    pub kernel: ChargeKernel,
    pub kernel_negative_definite: bool,
    #[serde(with = "crate::serde_util::rational_matrix")]
    pub norm_form: RatMatrix,
    pub root_norm: RootNorm,
    pub q_z: Option<QuadraticForm>,
    pub q_z_negative_definite_on_kernel: Option<bool>,
}

pub fn analyze(params: &ChargeParams, search: &RootSearch) -> Result<SupportAnalysis> {
    let z = ChargeMap::from_params(params)?;
    let pairing = QuadraticForm::mukai(params.lattice());
    let kernel = charge_kernel(&z, &pairing)?;
    let kernel_negative_definite = is_negative_definite_on(&pairing, &kernel.basis)?;
    let s = charge_norm_form(&z, &kernel, &pairing)?;
    let root_norm = min_root_norm(&z, &kernel, &s, &pairing, search)?;
    let (q_z, q_z_negative_definite_on_kernel) = match &root_norm.c_squared {
        Some(c2) => {
            let q = build_q_z(&z, &s, &pairing, c2)?;
            let nd = is_negative_definite_on(&q, &kernel.basis)?;
            (Some(q), Some(nd))
        }
        None => (None, None),
    };
    Ok(SupportAnalysis {
        charge: z,
        kernel,
        kernel_negative_definite,
        norm_form: s,
        root_norm,
        q_z,
        q_z_negative_definite_on_kernel,
    })
}
