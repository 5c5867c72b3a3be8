//! Divisor-class data attached to a stability condition and a class `v`:
//! the class `Omega` in `v^perp`, its square, wall lattices `H_W` and
//! square-zero classes.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_integer::Integer as _;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charge::ChargeMap;
use crate::error::{Error, Result};
use crate::lattice::{mukai_pairing, MukaiVector, NsLattice};
use crate::num::{gcd_all, int, mat_vec, small_first, solve, Integer, Rational};
use crate::rank2::{is_hyperbolic, minor_content, rank2_isotropic, rank2_roots, saturate_rank2, Rank2Lattice};
use crate::walls::{wall_locus, SliceParams, WallKind, WallLocus};

/// The charge and class an [`OmegaClass`] was computed from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChargeRef {
    pub v: MukaiVector,
    pub charge: ChargeMap,
    pub lattice: NsLattice,
}

/// `Omega` with `(Omega, w) = Im(Z(w) / Z(v))` for all `w`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmegaClass {
    #[serde(with = "crate::serde_util::rational_vec")]
    pub coords: Vec<Rational>,
    pub charge_ref: ChargeRef,
}

pub fn omega_class(v: &MukaiVector, z: &ChargeMap, lattice: &NsLattice) -> Result<OmegaClass> {
    let n = lattice.mukai_rank();
    lattice.check_len(v.c.len())?;
    if z.dim() != n {
        return Err(Error::dims(n, z.dim()));
    }
    let zv = z.eval_vector(v);
    if zv.is_zero() {
        return Err(Error::Degenerate(format!("Z({v}) = 0")));
    }
    let y: Vec<Rational> = z
        .columns
        .iter()
        .map(|c| c.checked_div(&zv).expect("nonzero").im)
        .collect();
    let m = lattice.mukai_gram_rat();
    let coords = solve(&m, &y).ok_or_else(|| Error::Degenerate("Mukai form is degenerate".into()))?;
    // replay on the whole basis
    if mat_vec(&m, &coords) != y {
        return Err(Error::Degenerate("Omega does not satisfy its defining equations".into()));
    }
    Ok(OmegaClass {
        coords,
        charge_ref: ChargeRef {
            v: v.clone(),
            charge: z.clone(),
            lattice: lattice.clone(),
        },
    })
}

/// `(Omega, Omega)` under the Mukai form.
pub fn bb_square(omega: &OmegaClass) -> Rational {
    let m = omega.charge_ref.lattice.mukai_gram_rat();
    crate::num::bilinear(&m, &omega.coords, &omega.coords)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuliDimension {
    #[serde(with = "crate::serde_util::integer")]
    pub dimension: Integer,
    #[serde(with = "crate::serde_util::integer")]
    pub v_squared: Integer,
    /// `v^2 = -2`: a single rigid point.
    pub rigid: bool,
    /// `v^2 = 0`: a surface.
    pub isotropic: bool,
}

pub fn moduli_dimension(v: &MukaiVector, lattice: &NsLattice) -> Result<ModuliDimension> {
    let v2 = mukai_pairing(v, v, lattice)?;
    if v2 < int(-2) {
        return Err(Error::EmptyModuli(v2.to_string()));
    }
    let content = v.content();
    if content != int(1) {
        return Err(Error::NotPrimitive(content.to_string()));
    }
    Ok(ModuliDimension {
        dimension: &v2 + 2,
        rigid: v2 == int(-2),
        isotropic: v2.is_zero(),
        v_squared: v2,
    })
}

/// A decomposition `v = a_1 + ... + a_m` inside `H_W`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub parts: Vec<MukaiVector>,
    pub m: usize,
    /// `v^2 - 2(m - 1) - sum a_i^2`.
    #[serde(with = "crate::serde_util::integer")]
    pub slack: Integer,
}

/// Multisets `{a_1, ..., a_m}` of nonzero classes of `hw` with `m <= max_m`,
/// `sum a_i = v`, `a_i^2 >= -2` and nonnegative slack. For `m >= 2` the
/// parts have `hw`-coordinates in `[-part_bound, part_bound]` and satisfy
/// `filter` when one is given; the trivial decomposition `{v}` is always
/// listed when `v^2 >= -2`.
pub fn decomposition_scan(
    v: &MukaiVector,
    hw: &Rank2Lattice,
    max_m: usize,
    part_bound: i64,
    filter: Option<&(dyn Fn(&MukaiVector) -> bool + Sync)>,
) -> Result<Vec<Decomposition>> {
    if max_m == 0 {
        return Err(Error::InvalidInput("max_m must be at least 1".into()));
    }
    if part_bound < 0 {
        return Err(Error::InvalidInput("part bound must be nonnegative".into()));
    }
    let vc = hw
        .coords_of(v)
        .ok_or_else(|| Error::InvalidInput(format!("{v} does not lie in the wall lattice")))?;
    let form = hw.form();
    let v2 = form.eval(&vc);
    let mut out = Vec::new();
    if v2 < int(-2) {
        return Ok(out);
    }
    out.push(Decomposition {
        parts: vec![v.clone()],
        m: 1,
        slack: int(0),
    });
    // every part has -2 <= a^2 <= v^2
    let mut parts: Vec<[Integer; 2]> = Vec::new();
    for x in -part_bound..=part_bound {
        for y in -part_bound..=part_bound {
            if x == 0 && y == 0 {
                continue;
            }
            let a = [int(x), int(y)];
            let a2 = form.eval(&a);
            if a2 < int(-2) || a2 > v2 {
                continue;
            }
            if let Some(f) = filter {
                if !f(&hw.vector(&a)) {
                    continue;
                }
            }
            parts.push(a);
        }
    }
    parts.sort_by(|a, b| small_first(a, b));
    let squares: Vec<Integer> = parts.iter().map(|a| form.eval(a)).collect();
    let index = |a: &[Integer; 2]| parts.binary_search_by(|p| small_first(p, a)).ok();

    struct Search<'a, F: Fn(&[Integer; 2]) -> Option<usize>> {
        parts: &'a [[Integer; 2]],
        squares: &'a [Integer],
        index: F,
        m: usize,
        cap: Integer,
    }

    impl<F: Fn(&[Integer; 2]) -> Option<usize>> Search<'_, F> {
        /// `chosen` parts so far with the given remainder and sum of squares.
        fn go(&self, chosen: &mut Vec<usize>, rest: [Integer; 2], sq: Integer, out: &mut Vec<Vec<usize>>) {
            let left = self.m - chosen.len();
            let start = *chosen.last().expect("first part fixed");
            if left == 1 {
                if let Some(j) = (self.index)(&rest) {
                    if j >= start && sq + &self.squares[j] <= self.cap {
                        chosen.push(j);
                        out.push(chosen.clone());
                        chosen.pop();
                    }
                }
                return;
            }
            for j in start..self.parts.len() {
                let s = &sq + &self.squares[j];
                // the remaining left - 1 parts contribute at least -2 each
                if s.clone() - 2 * (left as i64 - 1) > self.cap {
                    continue;
                }
                let a = &self.parts[j];
                chosen.push(j);
                self.go(chosen, [&rest[0] - &a[0], &rest[1] - &a[1]], s, out);
                chosen.pop();
            }
        }
    }

    for m in 2..=max_m {
        let cap = &v2 - 2 * (m as i64 - 1);
        let search = Search {
            parts: &parts,
            squares: &squares,
            index,
            m,
            cap: cap.clone(),
        };
        let found: Vec<Vec<Vec<usize>>> = (0..parts.len())
            .into_par_iter()
            .map(|i| {
                let mut res = Vec::new();
                if squares[i].clone() - 2 * (m as i64 - 1) > cap {
                    return res;
                }
                let a = &parts[i];
                let mut chosen = vec![i];
                search.go(&mut chosen, [&vc[0] - &a[0], &vc[1] - &a[1]], squares[i].clone(), &mut res);
                res
            })
            .collect();
        for idx in found.into_iter().flatten() {
            let sum_sq: Integer = idx.iter().map(|&j| &squares[j]).sum();
            out.push(Decomposition {
                parts: idx.iter().map(|&j| hw.vector(&parts[j])).collect(),
                m,
                slack: &cap - sum_sq,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationHints {
    pub has_isotropic: bool,
    pub has_root: bool,
    pub admits_totally_semistable_candidate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WallReportOptions {
    /// Bound on `|(delta, v)|` for roots; `max(v^2, 2)` when unset.
    #[serde(default, with = "opt_integer")]
    pub root_bound: Option<Integer>,
    pub max_m: usize,
    pub part_bound: i64,
}

impl Default for WallReportOptions {
    fn default() -> Self {
        Self {
            root_bound: None,
            max_m: 3,
            part_bound: 10,
        }
    }
}

mod opt_integer {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Integer>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.serialize_str(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Integer>, D::Error> {
        let s: Option<String> = Option::deserialize(d)?;
        s.map(|s| s.trim().parse().map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WallReport {
    pub wall: WallLocus,
    pub hw: Rank2Lattice,
    /// Whether `Z(w)/Z(v)` is real for the supplied charge.
    pub on_wall: bool,
    pub roots: Vec<MukaiVector>,
    pub isotropic: Option<Vec<MukaiVector>>,
    pub decompositions: Vec<Decomposition>,
    pub classification_hints: ClassificationHints,
    pub note: String,
}

/// Lattice-theoretic data of the wall defined by `(v, w)`. Decomposition
/// parts are restricted to classes whose charge under `z_on_wall` points
/// into the open half-plane around `Z(v)`, which on the wall is the ray of
/// `Z(v)` itself.
pub fn wall_report(
    v: &MukaiVector,
    w: &MukaiVector,
    slice: &SliceParams,
    z_on_wall: &ChargeMap,
    opts: &WallReportOptions,
) -> Result<WallReport> {
    let lattice = slice.lattice();
    let wall = wall_locus(v, w, slice)?;
    if wall.kind == WallKind::Degenerate {
        return Err(Error::Degenerate(format!("the wall of {v} and {w} is the whole slice")));
    }
    if z_on_wall.dim() != lattice.mukai_rank() {
        return Err(Error::dims(lattice.mukai_rank(), z_on_wall.dim()));
    }
    let hw = saturate_rank2(v, w, lattice)?;
    if !is_hyperbolic(&hw) {
        return Err(Error::Degenerate(format!(
            "H_W has gram determinant {} and is not hyperbolic",
            hw.det()
        )));
    }
    let v2 = mukai_pairing(v, v, lattice)?;
    let bound = opts.root_bound.clone().unwrap_or_else(|| v2.clone().max(int(2)));
    let roots = rank2_roots(&hw, v, &bound)?;
    let iso = rank2_isotropic(&hw)?;
    let zv = z_on_wall.eval_vector(v);
    let zw = z_on_wall.eval_vector(w);
    let on_wall = zw.ratio_is_real(&zv);
    let positive = |a: &MukaiVector| (&z_on_wall.eval_vector(a) * &zv.conj()).re.is_positive();
    let decompositions = decomposition_scan(v, &hw, opts.max_m, opts.part_bound, Some(&positive))?;
    let has_root = !roots.is_empty();
    let has_isotropic = !iso.is_empty();
    let hints = ClassificationHints {
        has_isotropic,
        has_root,
        admits_totally_semistable_candidate: decompositions.iter().any(|d| d.m >= 2) && (has_root || has_isotropic),
    };
    Ok(WallReport {
        wall,
        hw,
        on_wall,
        roots,
        isotropic: has_isotropic.then_some(iso),
        decompositions,
        classification_hints: hints,
        note: "hints are advisory; divisorial, flopping and fake walls are not distinguished".into(),
    })
}

fn sign_normalized(u: Vec<Integer>) -> Vec<Integer> {
    match u.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => u.into_iter().map(|x| -x).collect(),
        _ => u,
    }
}

/// Representative of `u + Z v` with the first nonzero coordinate of `v`
/// reduced into `[0, |v_q|)`, up to sign.
fn coset_rep(u: &[Integer], v: &[Integer]) -> Vec<Integer> {
    let q = v.iter().position(|x| !x.is_zero()).expect("v nonzero");
    let reduce = |u: &[Integer]| -> Vec<Integer> {
        let k = u[q].div_floor(&v[q]);
        u.iter().zip(v).map(|(a, b)| a - &k * b).collect()
    };
    let plus = reduce(u);
    let minus = reduce(&u.iter().map(|x| -x).collect::<Vec<_>>());
    match small_first(&plus, &minus) {
        Ordering::Greater => minus,
        _ => plus,
    }
}

/// Primitive isotropic `u` in `v^perp` with coordinates in `[-bound, bound]`,
/// up to sign. For `v^2 = 0` the classes live in `v^perp / <v>` and are
/// returned as coset representatives.
pub fn lagrangian_candidates(v: &MukaiVector, lattice: &NsLattice, bound: i64) -> Result<Vec<MukaiVector>> {
    let v2 = mukai_pairing(v, v, lattice)?;
    if v2.is_negative() {
        return Err(Error::InvalidInput(format!("v^2 = {v2} is negative")));
    }
    let content = v.content();
    if content != int(1) {
        return Err(Error::NotPrimitive(content.to_string()));
    }
    if bound < 0 {
        return Err(Error::InvalidInput("bound must be nonnegative".into()));
    }
    let n = lattice.mukai_rank();
    let gram = lattice.mukai_gram();
    let vc = v.coords();
    let f: Vec<Integer> = gram
        .iter()
        .map(|row| row.iter().zip(&vc).map(|(a, b)| a * b).sum())
        .collect();
    let p = f
        .iter()
        .position(|x| !x.is_zero())
        .ok_or_else(|| Error::Degenerate("v pairs to zero with everything".into()))?;
    let quotient = v2.is_zero();
    let big = int(bound);
    let side = (2 * bound + 1) as u64;
    let total = side.pow((n - 1) as u32);
    let found: BTreeSet<Vec<Integer>> = (0..total)
        .into_par_iter()
        .filter_map(|mut idx| {
            let mut u = vec![Integer::zero(); n];
            let mut acc = Integer::zero();
            for (i, ui) in u.iter_mut().enumerate() {
                if i == p {
                    continue;
                }
                *ui = int((idx % side) as i64 - bound);
                idx /= side;
                acc += &f[i] * &*ui;
            }
            let (up, r) = (-acc).div_rem(&f[p]);
            if !r.is_zero() || up.abs() > big {
                return None;
            }
            u[p] = up;
            if u.iter().all(|x| x.is_zero()) {
                return None;
            }
            let mu = MukaiVector::from_coords(&u).expect("length >= 2");
            if !mukai_pairing(&mu, &mu, lattice).expect("same lattice").is_zero() {
                return None;
            }
            if quotient {
                if minor_content(&mu, v) != int(1) {
                    return None;
                }
                Some(coset_rep(&u, &vc))
            } else {
                (gcd_all(&u) == int(1)).then(|| sign_normalized(u))
            }
        })
        .collect();
    let mut out: Vec<Vec<Integer>> = found.into_iter().collect();
    out.sort_by(|a, b| small_first(a, b));
    Ok(out
        .iter()
        .map(|u| MukaiVector::from_coords(u).expect("length >= 2"))
        .collect())
}

/// Rational vector `Omega` as a Mukai-coordinate list, for display.
pub fn omega_pairings(omega: &OmegaClass) -> Vec<Rational> {
    let m = omega.charge_ref.lattice.mukai_gram_rat();
    mat_vec(&m, &omega.coords)
}
