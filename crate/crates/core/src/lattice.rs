//! Néron–Severi lattices, Mukai vectors, Chern characters and the Mukai pairing.
//!
//! Coordinates of a Mukai vector are ordered `(r, c_1, ..., c_rho, s)`; every
//! matrix over the Mukai lattice in this crate uses that order.

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{Signed, Zero};
use serde::de::Error as _;
use serde::ser::SerializeTuple;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::num::{
    as_integer, frac, gcd_all, inertia, int_matrix_to_rat, rat, to_rat, to_rats, Integer,
    RatMatrix, Rational,
};

/// Néron–Severi lattice of a surface together with a designated ample class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NsLattice {
    gram: Vec<Vec<Integer>>,
    ample: Vec<Integer>,
    k3: bool,
    canonical: Vec<Integer>,
    chi: Integer,
}

#[derive(Serialize, Deserialize)]
struct NsLatticeRepr {
    #[serde(with = "crate::serde_util::count")]
    rank: usize,
    #[serde(with = "crate::serde_util::integer_matrix")]
    gram: Vec<Vec<Integer>>,
    #[serde(with = "crate::serde_util::integer_vec")]
    ample: Vec<Integer>,
    #[serde(default)]
    k3: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    canonical: Option<CanonicalRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[serde(with = "opt_integer")]
    chi: Option<Integer>,
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct CanonicalRepr(#[serde(with = "crate::serde_util::integer_vec")] Vec<Integer>);

mod opt_integer {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<Integer>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(n) => crate::serde_util::integer::serialize(n, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Integer>, D::Error> {
        #[derive(Deserialize)]
        struct W(#[serde(with = "crate::serde_util::integer")] Integer);
        Ok(Option::<W>::deserialize(d)?.map(|w| w.0))
    }
}

impl Serialize for NsLattice {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let default_td = self.k3 && self.canonical.iter().all(Zero::is_zero) && self.chi == BigInt::from(2);
        NsLatticeRepr {
            rank: self.rank(),
            gram: self.gram.clone(),
            ample: self.ample.clone(),
            k3: self.k3,
            canonical: (!default_td).then(|| CanonicalRepr(self.canonical.clone())),
            chi: (!default_td).then(|| self.chi.clone()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for NsLattice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = NsLatticeRepr::deserialize(d)?;
        if repr.gram.len() != repr.rank {
            return Err(D::Error::custom(format!(
                "rank {} does not match a {}-row gram matrix",
                repr.rank,
                repr.gram.len()
            )));
        }
        let mut lattice = NsLattice::new(repr.gram, repr.ample, repr.k3).map_err(D::Error::custom)?;
        if let Some(CanonicalRepr(k)) = repr.canonical {
            lattice = lattice.with_canonical(k).map_err(D::Error::custom)?;
        }
        if let Some(chi) = repr.chi {
            lattice.chi = chi;
        }
        Ok(lattice)
    }
}

impl NsLattice {
    /// Validates symmetry, Hodge-index signature `(1, rho - 1)`, positivity of
    /// the ample class, and evenness for K3 lattices.
    pub fn new(gram: Vec<Vec<Integer>>, ample: Vec<Integer>, k3: bool) -> Result<Self> {
        let rho = gram.len();
        if rho == 0 {
            return Err(Error::InvalidLattice("rank must be positive".into()));
        }
        if gram.iter().any(|row| row.len() != rho) {
            return Err(Error::InvalidLattice("gram matrix is not square".into()));
        }
        if ample.len() != rho {
            return Err(Error::dims(rho, ample.len()));
        }
        for i in 0..rho {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::InvalidLattice(format!(
                        "gram matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let (pos, neg, zero) = inertia(&int_matrix_to_rat(&gram));
        if pos != 1 || neg != rho - 1 || zero != 0 {
            return Err(Error::InvalidLattice(format!(
                "signature is ({pos}, {neg}) with {zero} null directions; expected (1, {})",
                rho - 1
            )));
        }
        if k3 && gram.iter().enumerate().any(|(i, row)| row[i].is_odd()) {
            return Err(Error::InvalidLattice(
                "a K3 Néron–Severi lattice must be even".into(),
            ));
        }
        let lattice = NsLattice {
            canonical: vec![BigInt::zero(); rho],
            chi: BigInt::from(if k3 { 2 } else { 1 }),
            gram,
            ample,
            k3,
        };
        if !lattice.dot_int(&lattice.ample, &lattice.ample).is_positive() {
            return Err(Error::InvalidLattice("ample class must have positive square".into()));
        }
        Ok(lattice)
    }

    /// Rank-one lattice `Z H` with `H^2 = degree`.
    pub fn rank_one(degree: i64, k3: bool) -> Result<Self> {
        Self::new(vec![vec![BigInt::from(degree)]], vec![BigInt::from(1)], k3)
    }

    /// Sets the canonical class used by the Todd class `(1, -K/2, chi)`.
    pub fn with_canonical(mut self, canonical: Vec<Integer>) -> Result<Self> {
        if canonical.len() != self.rank() {
            return Err(Error::dims(self.rank(), canonical.len()));
        }
        self.canonical = canonical;
        Ok(self)
    }

    pub fn with_chi(mut self, chi: Integer) -> Self {
        self.chi = chi;
        self
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vec<Integer>] {
        &self.gram
    }

    pub fn ample(&self) -> &[Integer] {
        &self.ample
    }

    pub fn is_k3(&self) -> bool {
        self.k3
    }

    pub fn canonical(&self) -> &[Integer] {
        &self.canonical
    }

    pub fn chi(&self) -> &Integer {
        &self.chi
    }

    pub fn dot_int(&self, a: &[Integer], b: &[Integer]) -> Integer {
        let mut acc = BigInt::zero();
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                acc += ai * &self.gram[i][j] * bj;
            }
        }
        acc
    }

    pub fn dot(&self, a: &[Rational], b: &[Rational]) -> Rational {
        let mut acc = rat(0);
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                acc += ai * to_rat(&self.gram[i][j]) * bj;
            }
        }
        acc
    }

    pub fn ample_square(&self) -> Integer {
        self.dot_int(&self.ample, &self.ample)
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len == self.rank() {
            Ok(())
        } else {
            Err(Error::dims(self.rank(), len))
        }
    }

    /// Dimension `rho + 2` of the Mukai lattice.
    pub fn mukai_rank(&self) -> usize {
        self.rank() + 2
    }

    /// Gram matrix of the Mukai pairing in `(r, c, s)` coordinates.
    pub fn mukai_gram(&self) -> Vec<Vec<Integer>> {
        let n = self.mukai_rank();
        let mut m = vec![vec![BigInt::zero(); n]; n];
        m[0][n - 1] = BigInt::from(-1);
        m[n - 1][0] = BigInt::from(-1);
        for i in 0..self.rank() {
            for j in 0..self.rank() {
                m[i + 1][j + 1] = self.gram[i][j].clone();
            }
        }
        m
    }

    pub fn mukai_gram_rat(&self) -> RatMatrix {
        int_matrix_to_rat(&self.mukai_gram())
    }
}

/// Integral Mukai vector `(r, c, s)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MukaiVector {
    pub r: Integer,
    pub c: Vec<Integer>,
    pub s: Integer,
}

impl MukaiVector {
    pub fn new(r: Integer, c: Vec<Integer>, s: Integer) -> Self {
        Self { r, c, s }
    }

    pub fn from_i64(r: i64, c: &[i64], s: i64) -> Self {
        Self::new(
            BigInt::from(r),
            c.iter().map(|&x| BigInt::from(x)).collect(),
            BigInt::from(s),
        )
    }

    /// Splits a flat coordinate vector `(r, c..., s)`.
    pub fn from_coords(coords: &[Integer]) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidInput(
                "a Mukai vector needs at least two coordinates".into(),
            ));
        }
        let n = coords.len();
        Ok(Self::new(
            coords[0].clone(),
            coords[1..n - 1].to_vec(),
            coords[n - 1].clone(),
        ))
    }

    pub fn coords(&self) -> Vec<Integer> {
        let mut v = Vec::with_capacity(self.c.len() + 2);
        v.push(self.r.clone());
        v.extend(self.c.iter().cloned());
        v.push(self.s.clone());
        v
    }

    pub fn coords_rat(&self) -> Vec<Rational> {
        to_rats(&self.coords())
    }

    pub fn zero(rho: usize) -> Self {
        Self::new(BigInt::zero(), vec![BigInt::zero(); rho], BigInt::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.r.is_zero() && self.s.is_zero() && self.c.iter().all(Zero::is_zero)
    }

    /// gcd of all coordinates.
    pub fn content(&self) -> Integer {
        gcd_all(&self.coords())
    }

    pub fn is_primitive(&self) -> bool {
        self.content() == BigInt::from(1)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_coords(
            &self
                .coords()
                .iter()
                .zip(o.coords())
                .map(|(a, b)| a + b)
                .collect::<Vec<_>>(),
        )
        .expect("same length")
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&BigInt::from(-1)))
    }

    pub fn scale(&self, k: &Integer) -> Self {
        Self::new(
            &self.r * k,
            self.c.iter().map(|x| x * k).collect(),
            &self.s * k,
        )
    }

    pub fn neg(&self) -> Self {
        self.scale(&BigInt::from(-1))
    }

    /// True when `self` and `o` are linearly dependent over the rationals.
    pub fn is_proportional(&self, o: &Self) -> bool {
        let a = self.coords();
        let b = o.coords();
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                if &a[i] * &b[j] != &a[j] * &b[i] {
                    return false;
                }
            }
        }
        true
    }

    /// Comma separated `r,c1,...,s`, the form accepted on the command line.
    pub fn to_flat_string(&self) -> String {
        self.coords()
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse_flat(s: &str) -> Result<Self> {
        let coords = s
            .split(',')
            .map(crate::num::parse_integer)
            .collect::<Result<Vec<_>>>()?;
        Self::from_coords(&coords)
    }
}

impl std::fmt::Display for MukaiVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let c: Vec<String> = self.c.iter().map(ToString::to_string).collect();
        write!(f, "({}, [{}], {})", self.r, c.join(", "), self.s)
    }
}

impl Serialize for MukaiVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let c: Vec<String> = self.c.iter().map(ToString::to_string).collect();
        let mut t = s.serialize_tuple(3)?;
        t.serialize_element(&self.r.to_string())?;
        t.serialize_element(&c)?;
        t.serialize_element(&self.s.to_string())?;
        t.end()
    }
}

impl<'de> Deserialize<'de> for MukaiVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr(
            #[serde(with = "crate::serde_util::integer")] Integer,
            #[serde(with = "crate::serde_util::integer_vec")] Vec<Integer>,
            #[serde(with = "crate::serde_util::integer")] Integer,
        );
        let Repr(r, c, s) = Repr::deserialize(d)?;
        Ok(MukaiVector::new(r, c, s))
    }
}

/// Rational Chern character `(ch0, ch1, ch2)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChernCharacter {
    #[serde(with = "crate::serde_util::rational")]
    pub ch0: Rational,
    #[serde(with = "crate::serde_util::rational_vec")]
    pub ch1: Vec<Rational>,
    #[serde(with = "crate::serde_util::rational")]
    pub ch2: Rational,
}

impl ChernCharacter {
    pub fn new(ch0: Rational, ch1: Vec<Rational>, ch2: Rational) -> Self {
        Self { ch0, ch1, ch2 }
    }

    pub fn from_i64(ch0: i64, ch1: &[i64], ch2: i64) -> Self {
        Self::new(rat(ch0), ch1.iter().map(|&x| rat(x)).collect(), rat(ch2))
    }

    /// The Chern character whose Mukai vector is `v` (the inverse of
    /// [`mukai_vector_of`]).
    pub fn of_mukai_vector(v: &MukaiVector, lattice: &NsLattice) -> Self {
        let r = to_rat(&v.r);
        let ch2 = if lattice.is_k3() {
            to_rat(&v.s) - &r
        } else {
            to_rat(&v.s)
        };
        Self::new(r, to_rats(&v.c), ch2)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(
            &self.ch0 + &o.ch0,
            self.ch1.iter().zip(&o.ch1).map(|(a, b)| a + b).collect(),
            &self.ch2 + &o.ch2,
        )
    }
}

fn check_mukai(v: &MukaiVector, lattice: &NsLattice) -> Result<()> {
    lattice.check_len(v.c.len())
}

/// `(v, w) = c.c' - r s' - r' s`.
pub fn mukai_pairing(v: &MukaiVector, w: &MukaiVector, lattice: &NsLattice) -> Result<Integer> {
    check_mukai(v, lattice)?;
    check_mukai(w, lattice)?;
    Ok(lattice.dot_int(&v.c, &w.c) - &v.r * &w.s - &w.r * &v.s)
}

/// `(v, v)`.
pub fn mukai_square(v: &MukaiVector, lattice: &NsLattice) -> Result<Integer> {
    mukai_pairing(v, v, lattice)
}

/// Mukai pairing on rational coordinate vectors `(r, c..., s)`.
pub fn mukai_pairing_rat(a: &[Rational], b: &[Rational], lattice: &NsLattice) -> Rational {
    let n = a.len();
    let rho = lattice.rank();
    debug_assert_eq!(n, rho + 2);
    lattice.dot(&a[1..=rho], &b[1..=rho]) - &a[0] * &b[n - 1] - &b[0] * &a[n - 1]
}

/// `chi(v, w) = -(v, w)`.
pub fn euler_pairing(v: &MukaiVector, w: &MukaiVector, lattice: &NsLattice) -> Result<Integer> {
    Ok(-mukai_pairing(v, w, lattice)?)
}

/// `v = ch * sqrt(td)`; on a K3 `sqrt(td) = (1, 0, 1)` so `v = (ch0, ch1, ch0 + ch2)`.
/// Non-K3 lattices use the plain Chern character.
pub fn mukai_vector_of(ch: &ChernCharacter, lattice: &NsLattice) -> Result<MukaiVector> {
    lattice.check_len(ch.ch1.len())?;
    let s = if lattice.is_k3() {
        &ch.ch0 + &ch.ch2
    } else {
        ch.ch2.clone()
    };
    let not_integral = || Error::NotIntegral(format!("({}, {:?}, {})", ch.ch0, ch.ch1, s));
    let r = as_integer(&ch.ch0).ok_or_else(not_integral)?;
    let c = ch
        .ch1
        .iter()
        .map(as_integer)
        .collect::<Option<Vec<_>>>()
        .ok_or_else(not_integral)?;
    let s = as_integer(&s).ok_or_else(not_integral)?;
    Ok(MukaiVector::new(r, c, s))
}

/// `ch^beta = e^{-beta} ch`.
pub fn twist_chern(ch: &ChernCharacter, beta: &[Rational], lattice: &NsLattice) -> Result<ChernCharacter> {
    lattice.check_len(ch.ch1.len())?;
    lattice.check_len(beta.len())?;
    let ch1: Vec<Rational> = ch.ch1.iter().zip(beta).map(|(c, b)| c - &ch.ch0 * b).collect();
    let ch2 = &ch.ch2 - lattice.dot(beta, &ch.ch1) + frac(1, 2) * lattice.dot(beta, beta) * &ch.ch0;
    Ok(ChernCharacter::new(ch.ch0.clone(), ch1, ch2))
}

/// `(ch1^beta)^2 - 2 ch0 ch2^beta`, nonnegative for slope-semistable sheaves.
pub fn bogomolov_discriminant(ch: &ChernCharacter, beta: &[Rational], lattice: &NsLattice) -> Result<Rational> {
    let t = twist_chern(ch, beta, lattice)?;
    Ok(lattice.dot(&t.ch1, &t.ch1) - rat(2) * &t.ch0 * &t.ch2)
}

/// Integer combination `sum_i coeffs[i] * vectors[i]`.
pub fn combine(coeffs: &[Integer], vectors: &[MukaiVector]) -> MukaiVector {
    let n = vectors[0].coords().len();
    let mut out = vec![BigInt::zero(); n];
    for (k, v) in coeffs.iter().zip(vectors) {
        for (o, x) in out.iter_mut().zip(v.coords()) {
            *o += k * x;
        }
    }
    MukaiVector::from_coords(&out).expect("length >= 2")
}
