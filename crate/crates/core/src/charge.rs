//! Central charges, exact phase comparison, slopes, heart membership, the
//! action of the universal cover of `GL_2^+(R)`, and the large-volume limit.
//!
//! Phases are never materialized: every comparison is decided by signs of
//! exact rational expressions.

use std::cmp::Ordering;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::GaussianRational;
use crate::lattice::{twist_chern, ChernCharacter, MukaiVector, NsLattice};
use crate::num::{frac, rat, to_f64, to_rat, to_rats, Integer, Rational};

/// Stability parameters `(beta, omega)` in Néron–Severi coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ChargeParamsRepr", into = "ChargeParamsRepr")]
pub struct ChargeParams {
    lattice: NsLattice,
    beta: Vec<Rational>,
    omega: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct ChargeParamsRepr {
    #[serde(with = "crate::serde_util::rational_vec")]
    beta: Vec<Rational>,
    #[serde(with = "crate::serde_util::rational_vec")]
    omega: Vec<Rational>,
    lattice: NsLattice,
}

impl TryFrom<ChargeParamsRepr> for ChargeParams {
    type Error = Error;
    fn try_from(r: ChargeParamsRepr) -> Result<Self> {
        ChargeParams::new(r.lattice, r.beta, r.omega)
    }
}

impl From<ChargeParams> for ChargeParamsRepr {
    fn from(p: ChargeParams) -> Self {
        ChargeParamsRepr {
            beta: p.beta,
            omega: p.omega,
            lattice: p.lattice,
        }
    }
}

impl ChargeParams {
    /// Requires `omega^2 > 0`; amplitude of `omega` is the caller's claim.
    pub fn new(lattice: NsLattice, beta: Vec<Rational>, omega: Vec<Rational>) -> Result<Self> {
        lattice.check_len(beta.len())?;
        lattice.check_len(omega.len())?;
        if !lattice.dot(&omega, &omega).is_positive() {
            return Err(Error::InvalidInput("omega must have positive square".into()));
        }
        Ok(Self { lattice, beta, omega })
    }

    /// `beta = b H`, `omega = t H` for the lattice's ample class `H`.
    pub fn along_ample(lattice: NsLattice, b: Rational, t: Rational) -> Result<Self> {
        let h = to_rats(lattice.ample());
        let beta = h.iter().map(|x| x * &b).collect();
        let omega = h.iter().map(|x| x * &t).collect();
        Self::new(lattice, beta, omega)
    }

    pub fn lattice(&self) -> &NsLattice {
        &self.lattice
    }

    pub fn beta(&self) -> &[Rational] {
        &self.beta
    }

    pub fn omega(&self) -> &[Rational] {
        &self.omega
    }

    pub fn omega_square(&self) -> Rational {
        self.lattice.dot(&self.omega, &self.omega)
    }

    /// On a K3 surface the tilted heart carries a stability condition only
    /// when `omega^2 > 2`.
    pub fn require_heart_backed(&self) -> Result<()> {
        if self.lattice.is_k3() && self.omega_square() <= rat(2) {
            return Err(Error::InvalidInput(format!(
                "K3 charges need omega^2 > 2, got {}",
                self.omega_square()
            )));
        }
        Ok(())
    }
}

/// `Z(A) = -deg A + i rk A` on a curve.
pub fn curve_charge(degree: &Integer, rank: &Integer) -> GaussianRational {
    GaussianRational::new(-to_rat(degree), to_rat(rank))
}

/// `Z_{omega,beta}(A) = (rk omega^2 / 2 - ch_2^beta) + i omega.ch_1^beta` (general surfaces).
pub fn surface_charge(ch: &ChernCharacter, params: &ChargeParams) -> Result<GaussianRational> {
    let l = &params.lattice;
    let t = twist_chern(ch, &params.beta, l)?;
    let re = frac(1, 2) * &t.ch0 * params.omega_square() - &t.ch2;
    let im = l.dot(&params.omega, &t.ch1);
    Ok(GaussianRational::new(re, im))
}

/// K3 charge `(exp(beta + i omega), v) = (beta + i omega).c - s - r (beta + i omega)^2 / 2`.
pub fn k3_charge(v: &MukaiVector, params: &ChargeParams) -> Result<GaussianRational> {
    let l = &params.lattice;
    l.check_len(v.c.len())?;
    let c = to_rats(&v.c);
    let r = to_rat(&v.r);
    let (beta, omega) = (&params.beta, &params.omega);
    // (beta + i omega)^2 = beta^2 - omega^2 + 2 i beta.omega
    let sq_re = l.dot(beta, beta) - l.dot(omega, omega);
    let sq_im = rat(2) * l.dot(beta, omega);
    let re = l.dot(beta, &c) - to_rat(&v.s) - &r * sq_re / rat(2);
    let im = l.dot(omega, &c) - &r * sq_im / rat(2);
    Ok(GaussianRational::new(re, im))
}

/// Charge of a lattice class under the convention selected by the lattice:
/// the K3 (Mukai vector) charge, or the surface charge of `ch = (r, c, s)`.
pub fn class_charge(v: &MukaiVector, params: &ChargeParams) -> Result<GaussianRational> {
    if params.lattice.is_k3() {
        k3_charge(v, params)
    } else {
        let ch = ChernCharacter::new(to_rat(&v.r), to_rats(&v.c), to_rat(&v.s));
        surface_charge(&ch, params)
    }
}

/// True iff `z` lies in the upper half-plane or on the negative real axis.
pub fn phase_valid(z: &GaussianRational) -> bool {
    z.im.is_positive() || (z.im.is_zero() && z.re.is_negative())
}

/// Exact comparison of phases in `(0, 1]`.
pub fn phase_compare(z1: &GaussianRational, z2: &GaussianRational) -> Result<Ordering> {
    for z in [z1, z2] {
        if !phase_valid(z) {
            return Err(Error::InvalidPhase(z.to_string()));
        }
    }
    let neg1 = z1.im.is_zero();
    let neg2 = z2.im.is_zero();
    Ok(match (neg1, neg2) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        (false, false) => {
            // re1 im2 - im1 re2 > 0 means z2 is counterclockwise from z1.
            let cross = &z1.re * &z2.im - &z1.im * &z2.re;
            0.cmp(&cross.signum_i32())
        }
    })
}

trait SignumI32 {
    fn signum_i32(&self) -> i32;
}

impl SignumI32 for Rational {
    fn signum_i32(&self) -> i32 {
        if self.is_positive() {
            1
        } else if self.is_negative() {
            -1
        } else {
            0
        }
    }
}

/// A `mu_{omega,beta}` slope; torsion classes have slope `+inf`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Slope {
    Finite(Rational),
    Infinite,
}

impl PartialOrd for Slope {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Slope {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Slope::Infinite, Slope::Infinite) => Ordering::Equal,
            (Slope::Infinite, _) => Ordering::Greater,
            (_, Slope::Infinite) => Ordering::Less,
            (Slope::Finite(a), Slope::Finite(b)) => a.cmp(b),
        }
    }
}

impl std::fmt::Display for Slope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Slope::Finite(q) => write!(f, "{q}"),
            Slope::Infinite => write!(f, "inf"),
        }
    }
}

impl Slope {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "+inf" | "infinity" | "+infinity" => Ok(Slope::Infinite),
            other => Ok(Slope::Finite(crate::num::parse_rational(other)?)),
        }
    }
}

impl Serialize for Slope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Slope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Slope::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// `mu_{omega,beta}(A) = omega.(ch1 - ch0 beta) / ch0`, or `+inf` in rank zero.
pub fn slope(ch: &ChernCharacter, params: &ChargeParams) -> Result<Slope> {
    let l = &params.lattice;
    l.check_len(ch.ch1.len())?;
    if ch.ch0.is_negative() {
        return Err(Error::InvalidInput(format!(
            "negative rank {} is not a sheaf class",
            ch.ch0
        )));
    }
    if ch.ch0.is_zero() {
        return Ok(Slope::Infinite);
    }
    let t = twist_chern(ch, &params.beta, l)?;
    Ok(Slope::Finite(l.dot(&params.omega, &t.ch1) / &ch.ch0))
}

/// Harder–Narasimhan slopes `mu+ = mu_1 > ... > mu_n = mu-` of a sheaf.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Slope>", into = "Vec<Slope>")]
pub struct SlopeProfile {
    slopes: Vec<Slope>,
}

impl TryFrom<Vec<Slope>> for SlopeProfile {
    type Error = Error;
    fn try_from(slopes: Vec<Slope>) -> Result<Self> {
        SlopeProfile::new(slopes)
    }
}

impl From<SlopeProfile> for Vec<Slope> {
    fn from(p: SlopeProfile) -> Self {
        p.slopes
    }
}

impl SlopeProfile {
    pub fn new(slopes: Vec<Slope>) -> Result<Self> {
        if slopes.is_empty() {
            return Err(Error::InvalidInput("slope profile is empty".into()));
        }
        if slopes.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidInput(
                "slope profile must be strictly decreasing (+inf only first)".into(),
            ));
        }
        Ok(Self { slopes })
    }

    pub fn max(&self) -> &Slope {
        &self.slopes[0]
    }

    pub fn min(&self) -> &Slope {
        self.slopes.last().expect("nonempty")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HeartPosition {
    /// `mu- > 0`: the sheaf is in the torsion part and in the heart.
    InT,
    /// `mu+ <= 0`: the sheaf is torsion free part; its shift lies in the heart.
    InF,
    Mixed,
}

pub fn heart_position(profile: &SlopeProfile) -> HeartPosition {
    let zero = Slope::Finite(rat(0));
    if *profile.min() > zero {
        HeartPosition::InT
    } else if *profile.max() <= zero {
        HeartPosition::InF
    } else {
        HeartPosition::Mixed
    }
}

type Vec2 = [Rational; 2];

/// `y > 0`, or `y = 0` and `x < 0`: principal argument in `(0, 1]` (units of pi).
fn upper_half(v: &Vec2) -> bool {
    v[1].is_positive() || (v[1].is_zero() && v[0].is_negative())
}

/// Exact comparison of principal arguments in `(-1, 1]`.
fn arg_cmp(u: &Vec2, v: &Vec2) -> Ordering {
    match (upper_half(u), upper_half(v)) {
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        _ => {
            let cross = &u[0] * &v[1] - &u[1] * &v[0];
            0.cmp(&cross.signum_i32())
        }
    }
}

fn neg2(v: &Vec2) -> Vec2 {
    [-v[0].clone(), -v[1].clone()]
}

/// Element `(a, g)` of the universal cover of `GL_2^+(R)`.
///
/// The increasing map `a` with `a(phi + 1) = a(phi) + 1` is pinned by
/// `a(0) = arg(g e_1)/pi + 2 winding`, where `arg` is the principal value in
/// `(-1, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftedGl2 {
    #[serde(with = "crate::serde_util::rational_matrix")]
    m: Vec<Vec<Rational>>,
    winding: i64,
}

impl LiftedGl2 {
    pub fn new(m: [[Rational; 2]; 2], winding: i64) -> Result<Self> {
        let det = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
        if !det.is_positive() {
            return Err(Error::InvalidInput(format!(
                "matrix must have positive determinant, got {det}"
            )));
        }
        Ok(Self {
            m: m.into_iter().map(Vec::from).collect(),
            winding,
        })
    }

    pub fn identity() -> Self {
        Self::new([[rat(1), rat(0)], [rat(0), rat(1)]], 0).expect("det 1")
    }

    /// The shift `[k]`: matrix `(-1)^k I` with `a(phi) = phi + k`.
    pub fn shift(k: i64) -> Self {
        let sign = if k.rem_euclid(2) == 0 { 1 } else { -1 };
        Self::new(
            [[rat(sign), rat(0)], [rat(0), rat(sign)]],
            k.div_euclid(2),
        )
        .expect("det 1")
    }

    /// Rotation by a quarter turn with `a(phi) = phi + 1/2`.
    pub fn quarter_turn() -> Self {
        Self::new([[rat(0), rat(-1)], [rat(1), rat(0)]], 0).expect("det 1")
    }

    pub fn matrix(&self) -> [[Rational; 2]; 2] {
        [
            [self.m[0][0].clone(), self.m[0][1].clone()],
            [self.m[1][0].clone(), self.m[1][1].clone()],
        ]
    }

    pub fn winding(&self) -> i64 {
        self.winding
    }

    fn apply(&self, v: &Vec2) -> Vec2 {
        [
            &self.m[0][0] * &v[0] + &self.m[0][1] * &v[1],
            &self.m[1][0] * &v[0] + &self.m[1][1] * &v[1],
        ]
    }

    fn mat_mul(&self, o: &Self) -> [[Rational; 2]; 2] {
        let a = &self.m;
        let b = &o.m;
        let e = |i: usize, j: usize| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j];
        [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
    }

    /// `self ∘ other`: matrices multiply, angle maps compose.
    pub fn compose(&self, other: &Self) -> Self {
        let e1: Vec2 = [rat(1), rat(0)];
        let u = self.apply(&e1);
        let m = self.mat_mul(other);
        let product = LiftedGl2::new(m, 0).expect("product of positive determinants");
        let p = product.apply(&e1);
        // a_self(theta_other) lies in (a_self(0) - 1, a_self(0) + 1] and is
        // congruent to arg(p) mod 2; pick its representative relative to arg(u).
        let k = if upper_half(&u) {
            if arg_cmp(&p, &neg2(&u)) != Ordering::Greater {
                self.winding + 1
            } else {
                self.winding
            }
        } else if arg_cmp(&p, &neg2(&u)) == Ordering::Greater {
            self.winding - 1
        } else {
            self.winding
        };
        LiftedGl2 {
            m: product.m,
            winding: k + other.winding,
        }
    }

    /// Right action on charges: `Z . g = g^{-1} ∘ Z` under `C = R^2`.
    pub fn act_on_charge(&self, z: &GaussianRational) -> GaussianRational {
        let [[a, b], [c, d]] = self.matrix();
        let det = &a * &d - &b * &c;
        let x = (&d * &z.re - &b * &z.im) / &det;
        let y = (-&c * &z.re + &a * &z.im) / &det;
        GaussianRational::new(x, y)
    }

    /// Approximate value of the angle map `a(phi)` (double precision).
    pub fn eval_angle(&self, phi: f64) -> f64 {
        let pi = std::f64::consts::PI;
        let m: Vec<Vec<f64>> = self.m.iter().map(|r| r.iter().map(to_f64).collect()).collect();
        let arg_of = |x: f64, y: f64| {
            let (gx, gy) = (m[0][0] * x + m[0][1] * y, m[1][0] * x + m[1][1] * y);
            let t = gy.atan2(gx) / pi;
            if t <= -1.0 {
                t + 2.0
            } else {
                t
            }
        };
        let a0 = arg_of(1.0, 0.0) + 2.0 * self.winding as f64;
        // reduce phi to (-1, 1]
        let k = ((phi + 1.0) / 2.0).ceil() - 1.0;
        let phi0 = phi - 2.0 * k;
        let mut t = arg_of((pi * phi0).cos(), (pi * phi0).sin());
        while t <= a0 - 1.0 {
            t += 2.0;
        }
        while t > a0 + 1.0 {
            t -= 2.0;
        }
        t + 2.0 * k
    }
}

/// Applies `g` to a single charge: `gl2_act_on_charge(g, z) = g^{-1} z`.
pub fn gl2_act_on_charge(g: &LiftedGl2, z: &GaussianRational) -> GaussianRational {
    g.act_on_charge(z)
}

pub fn gl2_compose(g1: &LiftedGl2, g2: &LiftedGl2) -> LiftedGl2 {
    g1.compose(g2)
}

fn trim_poly(p: &[Rational]) -> &[Rational] {
    let len = p.iter().rposition(|c| !c.is_zero()).map_or(0, |i| i + 1);
    &p[..len]
}

/// Compares reduced (monic) Hilbert polynomials for all large `n`.
/// Coefficients are given constant term first.
pub fn gieseker_compare(pa: &[Rational], pb: &[Rational]) -> Result<Ordering> {
    let pa = trim_poly(pa);
    let pb = trim_poly(pb);
    for p in [pa, pb] {
        match p.last() {
            None => return Err(Error::InvalidInput("zero polynomial".into())),
            Some(lead) if lead.is_negative() => {
                return Err(Error::InvalidInput(
                    "leading coefficient must be positive".into(),
                ))
            }
            _ => {}
        }
    }
    if pa.len() != pb.len() {
        return Ok(pa.len().cmp(&pb.len()));
    }
    let la = pa.last().expect("nonempty");
    let lb = pb.last().expect("nonempty");
    for k in (0..pa.len()).rev() {
        let o = (&pa[k] / la).cmp(&(&pb[k] / lb));
        if o != Ordering::Equal {
            return Ok(o);
        }
    }
    Ok(Ordering::Equal)
}

/// `P_{omega,A}(X) = ∫ e^{X omega} ch(A) td_X` with `td = (1, -K/2, chi(O_X))`,
/// as coefficients `[c0, c1, c2]`.
pub fn hilbert_polynomial(ch: &ChernCharacter, params: &ChargeParams) -> Result<Vec<Rational>> {
    let l = &params.lattice;
    l.check_len(ch.ch1.len())?;
    let omega = &params.omega;
    let td1: Vec<Rational> = l.canonical().iter().map(|k| -to_rat(k) / rat(2)).collect();
    let td2 = to_rat(l.chi());
    // (ch . td) = (r, c + r td1, ch2 + c.td1 + r td2)
    let c_td: Vec<Rational> = ch.ch1.iter().zip(&td1).map(|(c, t)| c + &ch.ch0 * t).collect();
    let deg2 = &ch.ch2 + l.dot(&ch.ch1, &td1) + &ch.ch0 * td2;
    Ok(vec![
        deg2,
        l.dot(omega, &c_td),
        &ch.ch0 * l.dot(omega, omega) / rat(2),
    ])
}

/// `-i P(i n)` for a polynomial `P` given constant term first.
pub fn large_volume_charge(poly: &[Rational], n: &Rational) -> GaussianRational {
    let i_n = GaussianRational::new(rat(0), n.clone());
    let mut power = GaussianRational::from_ints(1, 0);
    let mut value = GaussianRational::zero();
    for c in poly {
        value += &power.scale(c);
        power = &power * &i_n;
    }
    // -i (x + i y) = y - i x
    GaussianRational::new(value.im, -value.re)
}

/// `W_{n omega}(A) = -i P_{omega,A}(i n)`.
pub fn large_volume_phase(ch: &ChernCharacter, params: &ChargeParams, n: &Rational) -> Result<GaussianRational> {
    if !ch.ch0.is_positive() {
        return Err(Error::InvalidInput("large-volume charge needs positive rank".into()));
    }
    if !n.is_positive() {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    Ok(large_volume_charge(&hilbert_polynomial(ch, params)?, n))
}

/// A linear map from a coordinate lattice to the Gaussian rationals, stored
/// as the images of the standard basis vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChargeMap {
    pub columns: Vec<GaussianRational>,
}

impl ChargeMap {
    pub fn new(columns: Vec<GaussianRational>) -> Self {
        Self { columns }
    }

    /// The charge of `params` on Mukai coordinates `(r, c..., s)`.
    pub fn from_params(params: &ChargeParams) -> Result<Self> {
        let n = params.lattice.mukai_rank();
        let columns = (0..n)
            .map(|i| {
                let mut e = vec![Integer::zero(); n];
                e[i] = Integer::from(1);
                class_charge(&MukaiVector::from_coords(&e)?, params)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { columns })
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn eval(&self, v: &[Integer]) -> GaussianRational {
        self.eval_rat(&to_rats(v))
    }

    pub fn eval_rat(&self, v: &[Rational]) -> GaussianRational {
        debug_assert_eq!(v.len(), self.columns.len());
        let mut re = rat(0);
        let mut im = rat(0);
        for (x, z) in v.iter().zip(&self.columns) {
            if x.is_zero() {
                continue;
            }
            re += x * &z.re;
            im += x * &z.im;
        }
        GaussianRational::new(re, im)
    }

    pub fn eval_vector(&self, v: &MukaiVector) -> GaussianRational {
        self.eval(&v.coords())
    }

    pub fn re_row(&self) -> Vec<Rational> {
        self.columns.iter().map(|z| z.re.clone()).collect()
    }

    pub fn im_row(&self) -> Vec<Rational> {
        self.columns.iter().map(|z| z.im.clone()).collect()
    }

    /// `w ↦ lambda Z(w)`.
    pub fn scaled(&self, lambda: &GaussianRational) -> Self {
        Self::new(self.columns.iter().map(|z| lambda * z).collect())
    }

    /// `w ↦ g^{-1} Z(w)`.
    pub fn acted_on(&self, g: &LiftedGl2) -> Self {
        Self::new(self.columns.iter().map(|z| g.act_on_charge(z)).collect())
    }
}
