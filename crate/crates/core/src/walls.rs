//! Numerical walls for a fixed class `v` in the slice `beta = beta0 + b H`,
//! `omega = t H` of stability parameters.
//!
//! On this slice `Im(Z(w) conj Z(v)) / t = A (b^2 + t^2) + B b + D` exactly,
//! so every potential wall is a semicircle centred on the `b`-axis or a
//! vertical line.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charge::{class_charge, ChargeParams};
use crate::error::{Error, Result};
use crate::gaussian::GaussianRational;
use crate::lattice::{mukai_pairing, MukaiVector, NsLattice};
use crate::num::{exact_sqrt_rational, int, rat, small_first, sqrt_decimal, to_rat, to_rats, Integer, Rational};

/// Two-parameter family `beta = beta0 + b H`, `omega = t H`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SliceRepr", into = "SliceRepr")]
pub struct SliceParams {
    lattice: NsLattice,
    beta0: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct SliceRepr {
    lattice: NsLattice,
    #[serde(with = "crate::serde_util::rational_vec")]
    beta0: Vec<Rational>,
    #[serde(default, with = "opt_rational_vec", skip_serializing_if = "Option::is_none")]
    direction: Option<Vec<Rational>>,
}

mod opt_rational_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vec<Rational>>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(v) => crate::serde_util::rational_vec::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<Rational>>, D::Error> {
        crate::serde_util::rational_vec::deserialize(d).map(Some)
    }
}

impl TryFrom<SliceRepr> for SliceParams {
    type Error = Error;
    fn try_from(r: SliceRepr) -> Result<Self> {
        SliceParams::new(r.lattice, r.beta0, r.direction)
    }
}

impl From<SliceParams> for SliceRepr {
    fn from(s: SliceParams) -> Self {
        let direction = Some(s.direction());
        SliceRepr {
            lattice: s.lattice,
            beta0: s.beta0,
            direction,
        }
    }
}

impl SliceParams {
    /// `direction`, when given, must be the ample class: the conic shape of
    /// walls relies on moving `beta` along the same class that scales `omega`.
    pub fn new(lattice: NsLattice, beta0: Vec<Rational>, direction: Option<Vec<Rational>>) -> Result<Self> {
        lattice.check_len(beta0.len())?;
        if let Some(d) = direction {
            lattice.check_len(d.len())?;
            if d != to_rats(lattice.ample()) {
                return Err(Error::InvalidInput(
                    "slice direction must equal the ample class H".into(),
                ));
            }
        }
        Ok(Self { lattice, beta0 })
    }

    pub fn lattice(&self) -> &NsLattice {
        &self.lattice
    }

    pub fn beta0(&self) -> &[Rational] {
        &self.beta0
    }

    pub fn direction(&self) -> Vec<Rational> {
        to_rats(self.lattice.ample())
    }

    /// Charge parameters at `(b, t)`.
    pub fn params_at(&self, b: &Rational, t: &Rational) -> Result<ChargeParams> {
        if !t.is_positive() {
            return Err(Error::InvalidInput("t must be positive".into()));
        }
        let h = self.direction();
        let beta = self.beta0.iter().zip(&h).map(|(x, y)| x + b * y).collect();
        let omega = h.iter().map(|y| y * t).collect();
        ChargeParams::new(self.lattice.clone(), beta, omega)
    }

    pub fn charge_at(&self, v: &MukaiVector, b: &Rational, t: &Rational) -> Result<GaussianRational> {
        class_charge(v, &self.params_at(b, t)?)
    }

    /// `(alpha, K)` with `Re Z = K + alpha b - (r d / 2)(b^2 - t^2)` and
    /// `Im Z = t (alpha - r d b)`, `d = H^2`.
    fn slice_coefficients(&self, v: &MukaiVector) -> Result<(Rational, Rational)> {
        let l = &self.lattice;
        l.check_len(v.c.len())?;
        let h = self.direction();
        let c = to_rats(&v.c);
        let r = to_rat(&v.r);
        let alpha = l.dot(&h, &c) - &r * l.dot(&h, &self.beta0);
        let k = l.dot(&self.beta0, &c) - to_rat(&v.s) - &r * l.dot(&self.beta0, &self.beta0) / rat(2);
        Ok((alpha, k))
    }
}

/// `a (b^2 + t^2) + bb b + c t + d = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Conic {
    #[serde(with = "crate::serde_util::rational")]
    pub a: Rational,
    #[serde(with = "crate::serde_util::rational")]
    pub b: Rational,
    #[serde(with = "crate::serde_util::rational")]
    pub c: Rational,
    #[serde(with = "crate::serde_util::rational")]
    pub d: Rational,
}

impl Conic {
    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    pub fn eval(&self, b: &Rational, t: &Rational) -> Rational {
        &self.a * (b * b + t * t) + &self.b * b + &self.c * t + &self.d
    }

    /// Scaled so that the first nonzero coefficient is 1; equal normal forms
    /// mean equal zero sets.
    pub fn normalized(&self) -> Conic {
        let lead = [&self.a, &self.b, &self.c, &self.d]
            .into_iter()
            .find(|x| !x.is_zero())
            .cloned();
        match lead {
            None => self.clone(),
            Some(l) => Conic {
                a: &self.a / &l,
                b: &self.b / &l,
                c: &self.c / &l,
                d: &self.d / &l,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WallKind {
    Semicircle {
        #[serde(with = "crate::serde_util::rational")]
        center: Rational,
        #[serde(with = "crate::serde_util::rational")]
        radius_sq: Rational,
    },
    VerticalLine {
        #[serde(with = "crate::serde_util::rational")]
        b: Rational,
    },
    Empty,
    Degenerate,
}

impl WallKind {
    fn rank(&self) -> u8 {
        match self {
            WallKind::VerticalLine { .. } => 0,
            WallKind::Semicircle { .. } => 1,
            WallKind::Empty => 2,
            WallKind::Degenerate => 3,
        }
    }

    /// Deterministic order: vertical lines by position, then semicircles by
    /// centre and radius.
    pub fn sort_cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (WallKind::VerticalLine { b: x }, WallKind::VerticalLine { b: y }) => x.cmp(y),
            (
                WallKind::Semicircle { center: c1, radius_sq: r1 },
                WallKind::Semicircle { center: c2, radius_sq: r2 },
            ) => c1.cmp(c2).then_with(|| r1.cmp(r2)),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WallLocus {
    pub v: MukaiVector,
    pub w: MukaiVector,
    pub conic: Conic,
    #[serde(flatten)]
    pub kind: WallKind,
}

fn classify(conic: &Conic) -> WallKind {
    debug_assert!(conic.c.is_zero());
    if conic.is_zero() {
        return WallKind::Degenerate;
    }
    if conic.a.is_zero() {
        if conic.b.is_zero() {
            return WallKind::Empty;
        }
        return WallKind::VerticalLine {
            b: -&conic.d / &conic.b,
        };
    }
    let center = -&conic.b / (rat(2) * &conic.a);
    let radius_sq = &center * &center - &conic.d / &conic.a;
    if radius_sq.is_positive() {
        WallKind::Semicircle { center, radius_sq }
    } else {
        WallKind::Empty
    }
}

/// The locus in `t > 0` where `Z(w)/Z(v)` is real.
pub fn wall_locus(v: &MukaiVector, w: &MukaiVector, slice: &SliceParams) -> Result<WallLocus> {
    let d = to_rat(&slice.lattice.ample_square());
    let (av, kv) = slice.slice_coefficients(v)?;
    let (aw, kw) = slice.slice_coefficients(w)?;
    let (rv, rw) = (to_rat(&v.r), to_rat(&w.r));
    let conic = Conic {
        a: &d * (&rv * &aw - &rw * &av) / rat(2),
        b: &d * (&rv * &kw - &rw * &kv),
        c: rat(0),
        d: &aw * &kv - &av * &kw,
    };
    let kind = classify(&conic);
    Ok(WallLocus {
        v: v.clone(),
        w: w.clone(),
        conic,
        kind,
    })
}

/// Closed box `[b_min, b_max] x [t_min, t_max]` with `t_min > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    #[serde(with = "crate::serde_util::rational")]
    pub b_min: Rational,
    #[serde(with = "crate::serde_util::rational")]
    pub b_max: Rational,
    #[serde(with = "crate::serde_util::rational")]
    pub t_min: Rational,
    #[serde(with = "crate::serde_util::rational")]
    pub t_max: Rational,
}

impl Region {
    pub fn new(b_min: Rational, b_max: Rational, t_min: Rational, t_max: Rational) -> Result<Self> {
        if !t_min.is_positive() {
            return Err(Error::InvalidInput(
                "t_min must be positive: walls accumulate at t = 0".into(),
            ));
        }
        if b_min > b_max || t_min > t_max {
            return Err(Error::InvalidInput("empty region".into()));
        }
        Ok(Self {
            b_min,
            b_max,
            t_min,
            t_max,
        })
    }
}

/// True iff the wall has a point in the closed region.
pub fn meets_region(kind: &WallKind, region: &Region) -> bool {
    match kind {
        WallKind::VerticalLine { b } => &region.b_min <= b && b <= &region.b_max,
        WallKind::Semicircle { center, radius_sq } => {
            // range of (b - center)^2 + t^2 over the box
            let (lo_b, hi_b) = (&region.b_min - center, &region.b_max - center);
            let min_b_sq = if lo_b.is_positive() {
                &lo_b * &lo_b
            } else if hi_b.is_negative() {
                &hi_b * &hi_b
            } else {
                rat(0)
            };
            let max_b_sq = (&lo_b * &lo_b).max(&hi_b * &hi_b);
            let min = min_b_sq + &region.t_min * &region.t_min;
            let max = max_b_sq + &region.t_max * &region.t_max;
            &min <= radius_sq && radius_sq <= &max
        }
        WallKind::Empty | WallKind::Degenerate => false,
    }
}

fn box_vectors(n: usize, bound: i64) -> impl Iterator<Item = Vec<Integer>> {
    let side = (2 * bound + 1) as u64;
    let total = side.pow(n as u32);
    (0..total).map(move |mut idx| {
        let mut x = Vec::with_capacity(n);
        for _ in 0..n {
            x.push(int((idx % side) as i64 - bound));
            idx /= side;
        }
        x.reverse();
        x
    })
}

/// Classes `w` with coordinates in `[-bound, bound]`, `(w,w) >= -2`,
/// `(v-w,v-w) >= -2`, `span(v, w)` hyperbolic and `w` not proportional to `v`.
pub fn lattice_candidates(v: &MukaiVector, lattice: &NsLattice, bound: i64) -> Result<Vec<MukaiVector>> {
    lattice.check_len(v.c.len())?;
    if bound <= 0 {
        return Err(Error::InvalidInput("search bound must be positive".into()));
    }
    let n = lattice.mukai_rank();
    let v2 = mukai_pairing(v, v, lattice)?;
    let minus_two = int(-2);
    let first: Vec<i64> = (-bound..=bound).collect();
    let per_first: Vec<Vec<MukaiVector>> = first
        .par_iter()
        .map(|&x0| {
            let mut out = Vec::new();
            for rest in box_vectors(n - 1, bound) {
                let mut coords = Vec::with_capacity(n);
                coords.push(int(x0));
                coords.extend(rest);
                let w = MukaiVector::from_coords(&coords).expect("n >= 2");
                if w.is_zero() || w.is_proportional(v) {
                    continue;
                }
                let w2 = mukai_pairing(&w, &w, lattice).expect("checked length");
                if w2 < minus_two {
                    continue;
                }
                let u = v.sub(&w);
                if mukai_pairing(&u, &u, lattice).expect("checked length") < minus_two {
                    continue;
                }
                let vw = mukai_pairing(v, &w, lattice).expect("checked length");
                if &vw * &vw <= &v2 * &w2 {
                    continue;
                }
                out.push(w);
            }
            out
        })
        .collect();
    Ok(per_first.into_iter().flatten().collect())
}

/// A potential wall: one conic, with all box classes defining it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wall {
    pub id: String,
    pub status: String,
    pub locus: WallLocus,
    pub classes: Vec<MukaiVector>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WallScan {
    pub v: MukaiVector,
    pub slice: SliceParams,
    pub region: Region,
    pub bound: i64,
    pub candidate_count: usize,
    pub walls: Vec<Wall>,
}

/// Potential walls for `v` meeting `region`, one per distinct conic, sorted.
pub fn scan_walls(v: &MukaiVector, slice: &SliceParams, region: &Region, bound: i64) -> Result<WallScan> {
    let candidates = lattice_candidates(v, &slice.lattice, bound)?;
    let loci: Vec<WallLocus> = candidates
        .par_iter()
        .map(|w| wall_locus(v, w, slice))
        .collect::<Result<_>>()?;
    let mut groups: BTreeMap<Conic, (WallLocus, Vec<MukaiVector>)> = BTreeMap::new();
    for locus in loci {
        if !meets_region(&locus.kind, region) {
            continue;
        }
        let key = locus.conic.normalized();
        let w = locus.w.clone();
        groups
            .entry(key)
            .and_modify(|(rep, members)| {
                if small_first(&w.coords(), &rep.w.coords()) == Ordering::Less {
                    *rep = locus.clone();
                }
                members.push(w.clone());
            })
            .or_insert_with(|| (locus.clone(), vec![w]));
    }
    let mut walls: Vec<(WallLocus, Vec<MukaiVector>)> = groups.into_values().collect();
    walls.sort_by(|a, b| a.0.kind.sort_cmp(&b.0.kind));
    let walls = walls
        .into_iter()
        .enumerate()
        .map(|(i, (locus, mut classes))| {
            classes.sort_by(|a, b| small_first(&a.coords(), &b.coords()));
            Wall {
                id: format!("W{}", i + 1),
                status: "potential".into(),
                locus,
                classes,
            }
        })
        .collect();
    Ok(WallScan {
        v: v.clone(),
        slice: slice.clone(),
        region: region.clone(),
        bound,
        candidate_count: candidates.len(),
        walls,
    })
}

/// One representative class per potential wall meeting `region`.
pub fn candidate_classes(v: &MukaiVector, slice: &SliceParams, region: &Region, bound: i64) -> Result<Vec<MukaiVector>> {
    Ok(scan_walls(v, slice, region, bound)?
        .walls
        .into_iter()
        .map(|w| w.locus.w)
        .collect())
}

/// A value `t` given by its exact square.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SqrtValue {
    #[serde(with = "crate::serde_util::rational")]
    pub t_squared: Rational,
    /// Exact value when `t_squared` is a rational square.
    #[serde(default, with = "opt_rational", skip_serializing_if = "Option::is_none")]
    pub exact: Option<Rational>,
    pub decimal: String,
}

mod opt_rational {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match q {
            Some(q) => s.serialize_str(&q.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rational>, D::Error> {
        crate::serde_util::rational::deserialize(d).map(Some)
    }
}

impl SqrtValue {
    pub fn from_square(t_squared: Rational) -> Self {
        Self {
            exact: exact_sqrt_rational(&t_squared),
            decimal: sqrt_decimal(&t_squared, 30),
            t_squared,
        }
    }

    pub fn from_value(t: &Rational) -> Self {
        Self::from_square(t * t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crossing {
    pub t: SqrtValue,
    pub walls: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chamber {
    pub lower: SqrtValue,
    pub upper: SqrtValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChamberReport {
    #[serde(with = "crate::serde_util::rational")]
    pub b: Rational,
    pub crossings: Vec<Crossing>,
    pub chambers: Vec<Chamber>,
    /// Walls met at an endpoint of the path.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub endpoint_walls: Vec<String>,
    /// Set when the path runs inside a vertical wall and was moved to `b + epsilon`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbed: Option<String>,
}

/// Crossings of the vertical path `b = b*`, `t in [t0, t1]` with `walls`,
/// sorted by `t`, and the chambers between them. The top chamber is
/// labelled Gieseker when no wall meets the path above `t1`.
pub fn chambers_along_path(b_star: &Rational, t0: &Rational, t1: &Rational, walls: &[Wall]) -> Result<ChamberReport> {
    if !t0.is_positive() || t0 >= t1 {
        return Err(Error::InvalidInput("path needs 0 < t0 < t1".into()));
    }
    let (t0_sq, t1_sq) = (t0 * t0, t1 * t1);
    let mut inside: BTreeMap<Rational, Vec<String>> = BTreeMap::new();
    let mut endpoint_walls = Vec::new();
    let mut perturbed = None;
    let mut above = false;
    for w in walls {
        match &w.locus.kind {
            WallKind::Semicircle { center, radius_sq } => {
                let db = b_star - center;
                let t_sq = radius_sq - &db * &db;
                if !t_sq.is_positive() {
                    continue;
                }
                if t_sq > t1_sq {
                    above = true;
                } else if t_sq == t0_sq || t_sq == t1_sq {
                    endpoint_walls.push(w.id.clone());
                    if t_sq == t1_sq {
                        above = true;
                    }
                } else if t_sq > t0_sq {
                    inside.entry(t_sq).or_default().push(w.id.clone());
                }
            }
            WallKind::VerticalLine { b } if b == b_star => {
                perturbed = Some(format!(
                    "path lies on vertical wall {}; evaluated at b = {} + epsilon",
                    w.id, b_star
                ));
            }
            _ => {}
        }
    }
    let crossings: Vec<Crossing> = inside
        .into_iter()
        .map(|(t_sq, walls)| Crossing {
            t: SqrtValue::from_square(t_sq),
            walls,
        })
        .collect();
    let mut cuts = vec![SqrtValue::from_value(t0)];
    cuts.extend(crossings.iter().map(|c| c.t.clone()));
    cuts.push(SqrtValue::from_value(t1));
    let n = cuts.len() - 1;
    let chambers = (0..n)
        .map(|i| Chamber {
            lower: cuts[i].clone(),
            upper: cuts[i + 1].clone(),
            label: (i == n - 1 && !above).then(|| "gieseker".to_string()),
        })
        .collect();
    Ok(ChamberReport {
        b: b_star.clone(),
        crossings,
        chambers,
        endpoint_walls,
        perturbed,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NestingFinding {
    pub first: String,
    pub second: String,
    pub relation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NestingReport {
    pub pairs_checked: usize,
    pub violations: Vec<NestingFinding>,
    pub touching: Vec<NestingFinding>,
}

/// Relation between two walls: "nested", "disjoint", "touching at boundary"
/// or "crossing".
pub fn wall_relation(a: &WallKind, b: &WallKind) -> Option<&'static str> {
    match (a, b) {
        (
            WallKind::Semicircle { center: c1, radius_sq: r1 },
            WallKind::Semicircle { center: c2, radius_sq: r2 },
        ) => {
            let dc = c1 - c2;
            let x = r1 + r2 - &dc * &dc;
            let prod = rat(4) * r1 * r2;
            let sq = &x * &x;
            Some(if x.is_positive() && sq > prod {
                "nested"
            } else if x.is_negative() && sq > prod {
                "disjoint"
            } else if sq == prod {
                "touching at boundary"
            } else {
                "crossing"
            })
        }
        (WallKind::Semicircle { center, radius_sq }, WallKind::VerticalLine { b })
        | (WallKind::VerticalLine { b }, WallKind::Semicircle { center, radius_sq }) => {
            let d = b - center;
            let d2 = &d * &d;
            Some(match d2.cmp(radius_sq) {
                Ordering::Greater => "disjoint",
                Ordering::Equal => "touching at boundary",
                Ordering::Less => "crossing",
            })
        }
        (WallKind::VerticalLine { .. }, WallKind::VerticalLine { .. }) => Some("disjoint"),
        _ => None,
    }
}

/// Checks that the walls are pairwise nested or disjoint.
pub fn nesting_check(walls: &[Wall]) -> NestingReport {
    let mut report = NestingReport {
        pairs_checked: 0,
        violations: vec![],
        touching: vec![],
    };
    for (i, a) in walls.iter().enumerate() {
        for b in &walls[i + 1..] {
            let Some(rel) = wall_relation(&a.locus.kind, &b.locus.kind) else {
                continue;
            };
            report.pairs_checked += 1;
            let finding = NestingFinding {
                first: a.id.clone(),
                second: b.id.clone(),
                relation: rel.to_string(),
            };
            match rel {
                "crossing" => report.violations.push(finding),
                "touching at boundary" => report.touching.push(finding),
                _ => {}
            }
        }
    }
    report
}

/// Charge columns at a grid point as integers over a common positive denominator.
struct ScaledCharge {
    re: Vec<i128>,
    im: Vec<i128>,
}

/// Points `lo + k (hi - lo) / (n - 1)` written as `num_k / den`.
fn grid_axis_scaled(lo: &Rational, hi: &Rational, n: usize) -> Option<(Vec<i128>, i128)> {
    let step = (hi - lo) / Rational::from_integer(int((n.max(2) - 1) as i64));
    let den = num_integer::Integer::lcm(lo.denom(), step.denom());
    let d = Rational::from_integer(den.clone());
    let lo_n = i128::try_from(&(lo * &d).to_integer()).ok()?;
    let step_n = i128::try_from(&(&step * &d).to_integer()).ok()?;
    let nums = (0..n as i128)
        .map(|k| lo_n.checked_add(step_n.checked_mul(k)?))
        .collect::<Option<Vec<_>>>()?;
    Some((nums, i128::try_from(&den).ok()?))
}

/// Integer evaluation of the charge columns on the grid, scaled by the
/// positive factor `2 Dβ^2 Dt^2`. Uses
/// `Z(r, c, s) = (β + iω)·c - s - r (β + iω)^2 / 2` directly.
struct GridCharges {
    gram: Vec<Vec<i128>>,
    h: Vec<i128>,
    h_sq: i128,
    rho: usize,
}

impl GridCharges {
    fn dot(&self, a: &[i128], b: &[i128]) -> Option<i128> {
        let mut acc: i128 = 0;
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                acc = acc.checked_add(self.gram[i][j].checked_mul(*x)?.checked_mul(*y)?)?;
            }
        }
        Some(acc)
    }

    /// `beta = bn / db`, `omega = (nt / dt) H`.
    fn columns(&self, bn: &[i128], db: i128, nt: i128, dt: i128) -> Option<ScaledCharge> {
        let m = |a: i128, b: i128| a.checked_mul(b);
        let db2 = m(db, db)?;
        let dt2 = m(dt, dt)?;
        let scale = m(2, m(db2, dt2)?)?;
        let b_sq = self.dot(bn, bn)?;
        let b_h = self.dot(bn, &self.h)?;
        let omega_part = m(m(db2, m(nt, nt)?)?, self.h_sq)?;
        // square term (β + iω)^2 scaled by db^2 dt^2
        let sq_re = m(dt2, b_sq)?.checked_sub(omega_part)?;
        let sq_im = m(2, m(m(db, dt)?, m(nt, b_h)?)?)?;
        let mut re = Vec::with_capacity(self.rho + 2);
        let mut im = Vec::with_capacity(self.rho + 2);
        re.push(-sq_re);
        im.push(-sq_im);
        for k in 0..self.rho {
            let mut e = vec![0i128; self.rho];
            e[k] = 1;
            re.push(m(m(2, db)?, m(dt2, self.dot(bn, &e)?)?)?);
            im.push(m(m(2, db2)?, m(m(dt, nt)?, self.dot(&self.h, &e)?)?)?);
        }
        re.push(-scale);
        im.push(0);
        Some(ScaledCharge { re, im })
    }
}

fn grid_charges(slice: &SliceParams, region: &Region, grid: usize) -> Option<Vec<ScaledCharge>> {
    let lattice = &slice.lattice;
    let conv = |x: &Integer| i128::try_from(x).ok();
    let gram = lattice
        .gram()
        .iter()
        .map(|row| row.iter().map(conv).collect::<Option<Vec<_>>>())
        .collect::<Option<Vec<_>>>()?;
    let h = lattice.ample().iter().map(conv).collect::<Option<Vec<_>>>()?;
    let gc = GridCharges {
        h_sq: conv(&lattice.ample_square())?,
        gram,
        h,
        rho: lattice.rank(),
    };
    let (b_nums, d1) = grid_axis_scaled(&region.b_min, &region.b_max, grid)?;
    let (t_nums, d2) = grid_axis_scaled(&region.t_min, &region.t_max, grid)?;
    let mut l = Integer::from(1);
    for q in &slice.beta0 {
        l = num_integer::Integer::lcm(&l, q.denom());
    }
    let l_rat = Rational::from_integer(l.clone());
    let b0 = slice
        .beta0
        .iter()
        .map(|q| i128::try_from(&(q * &l_rat).to_integer()).ok())
        .collect::<Option<Vec<_>>>()?;
    let l = conv(&l)?;
    let db = l.checked_mul(d1)?;
    b_nums
        .par_iter()
        .flat_map_iter(|&nb| {
            let bn: Option<Vec<i128>> = b0
                .iter()
                .zip(&gc.h)
                .map(|(x, y)| x.checked_mul(d1)?.checked_add(l.checked_mul(nb)?.checked_mul(*y)?))
                .collect();
            let gc = &gc;
            t_nums
                .iter()
                .map(move |&nt| gc.columns(bn.as_ref()?, db, nt, d2))
                .collect::<Vec<_>>()
        })
        .collect()
}

fn combine_i128(coeffs: &[i128], w: &[i64]) -> Option<i128> {
    let mut acc: i128 = 0;
    for (c, x) in coeffs.iter().zip(w) {
        acc = acc.checked_add(c.checked_mul(*x as i128)?)?;
    }
    Some(acc)
}

/// A wall as seen by the sampling oracle: classes sharing one sign pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleWall {
    pub classes: Vec<MukaiVector>,
    /// Adjacent grid pairs with opposite signs.
    pub sign_changes: usize,
    /// Grid points where the charges are exactly aligned.
    pub zeros: usize,
}

/// Independent check of [`scan_walls`]: evaluates the exact sign of
/// `Im(Z(w) conj Z(v))` on a `grid x grid` lattice of points for every
/// candidate `w`, keeps the classes with a sign change or a zero, and
/// clusters them by their sign pattern up to a global sign.
pub fn sampling_oracle(v: &MukaiVector, slice: &SliceParams, region: &Region, grid: usize, bound: i64) -> Result<Vec<OracleWall>> {
    if grid < 2 {
        return Err(Error::InvalidInput("grid needs at least two points per axis".into()));
    }
    let candidates = lattice_candidates(v, &slice.lattice, bound)?;
    if candidates.is_empty() {
        return Ok(vec![]);
    }
    let charges = grid_charges(slice, region, grid)
        .ok_or_else(|| Error::InvalidInput("grid charges exceed 128-bit range".into()))?;
    let small = |m: &MukaiVector| -> Result<Vec<i64>> {
        m.coords()
            .iter()
            .map(|x| i64::try_from(x).map_err(|_| Error::InvalidInput("class too large for the oracle".into())))
            .collect()
    };
    let vs = small(v)?;
    let zv: Vec<(i128, i128)> = charges
        .iter()
        .map(|c| Some((combine_i128(&c.re, &vs)?, combine_i128(&c.im, &vs)?)))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::InvalidInput("overflow in oracle".into()))?;
    let patterns: Vec<Option<(Vec<i8>, usize, usize)>> = candidates
        .par_iter()
        .map(|w| -> Result<Option<(Vec<i8>, usize, usize)>> {
            let ws = small(w)?;
            let mut signs = Vec::with_capacity(charges.len());
            for (c, (vr, vi)) in charges.iter().zip(&zv) {
                let wr = combine_i128(&c.re, &ws);
                let wi = combine_i128(&c.im, &ws);
                let cross = match (wr, wi) {
                    (Some(wr), Some(wi)) => wi
                        .checked_mul(*vr)
                        .zip(wr.checked_mul(*vi))
                        .and_then(|(p, q)| p.checked_sub(q)),
                    _ => None,
                };
                let cross = cross.ok_or_else(|| Error::InvalidInput("overflow in oracle".into()))?;
                signs.push(cross.signum() as i8);
            }
            let zeros = signs.iter().filter(|&&s| s == 0).count();
            let mut changes = 0;
            for i in 0..grid {
                for j in 0..grid {
                    let s = signs[i * grid + j];
                    if i + 1 < grid && s * signs[(i + 1) * grid + j] < 0 {
                        changes += 1;
                    }
                    if j + 1 < grid && s * signs[i * grid + j + 1] < 0 {
                        changes += 1;
                    }
                }
            }
            if zeros == 0 && changes == 0 {
                return Ok(None);
            }
            if signs.iter().find(|&&s| s != 0).is_some_and(|&s| s < 0) {
                for s in signs.iter_mut() {
                    *s = -*s;
                }
            }
            Ok(Some((signs, changes, zeros)))
        })
        .collect::<Result<_>>()?;
    let mut clusters: BTreeMap<Vec<i8>, OracleWall> = BTreeMap::new();
    for (w, p) in candidates.iter().zip(patterns) {
        if let Some((signs, changes, zeros)) = p {
            let e = clusters.entry(signs).or_insert_with(|| OracleWall {
                classes: vec![],
                sign_changes: changes,
                zeros,
            });
            e.classes.push(w.clone());
        }
    }
    let mut out: Vec<OracleWall> = clusters.into_values().collect();
    for o in out.iter_mut() {
        o.classes.sort_by(|a, b| small_first(&a.coords(), &b.coords()));
    }
    out.sort_by(|a, b| small_first(&a.classes[0].coords(), &b.classes[0].coords()));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub equal: bool,
    /// Enumerated walls whose class set is not an oracle cluster.
    pub only_enumerated: Vec<String>,
    /// Oracle clusters (by smallest class) not matching an enumerated wall.
    pub only_oracle: Vec<MukaiVector>,
}

/// Compares enumerated walls with oracle clusters as partitions of classes.
pub fn compare_with_oracle(scan: &WallScan, oracle: &[OracleWall]) -> OracleComparison {
    use std::collections::BTreeSet;
    let key = |classes: &[MukaiVector]| classes.iter().cloned().collect::<BTreeSet<_>>();
    let oracle_sets: Vec<BTreeSet<MukaiVector>> = oracle.iter().map(|o| key(&o.classes)).collect();
    let scan_sets: Vec<BTreeSet<MukaiVector>> = scan.walls.iter().map(|w| key(&w.classes)).collect();
    let only_enumerated: Vec<String> = scan
        .walls
        .iter()
        .zip(&scan_sets)
        .filter(|(_, s)| !oracle_sets.contains(s))
        .map(|(w, _)| w.id.clone())
        .collect();
    let only_oracle: Vec<MukaiVector> = oracle
        .iter()
        .zip(&oracle_sets)
        .filter(|(_, s)| !scan_sets.contains(s))
        .map(|(o, _)| o.classes[0].clone())
        .collect();
    OracleComparison {
        equal: only_enumerated.is_empty() && only_oracle.is_empty(),
        only_enumerated,
        only_oracle,
    }
}
