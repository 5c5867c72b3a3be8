//! Harder–Narasimhan and Jordan–Hölder filtrations over finitely presented
//! abelian categories.
//!
//! A presentation lists objects with their classes and the subobject
//! relation as explicit edges `sub ⊂ ambient` with named quotient. The edges
//! `0 ⊂ A` (quotient `A`) and `A ⊂ A` (quotient `0`) are implicit.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::charge::{phase_compare, phase_valid, ChargeMap};
use crate::error::{Error, Result};
use crate::gaussian::GaussianRational;
use crate::num::Integer;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub id: String,
    #[serde(with = "crate::serde_util::integer_vec")]
    pub class: Vec<Integer>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub sub: String,
    pub ambient: String,
    pub quotient: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryPresentation {
    pub objects: Vec<ObjectSpec>,
    pub edges: Vec<EdgeSpec>,
    pub zero: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub kind: String,
    pub detail: String,
}

impl Violation {
    fn new(kind: &str, detail: impl Into<String>) -> Self {
        Self {
            kind: kind.to_string(),
            detail: detail.into(),
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.kind, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filtration {
    /// `0 = A_0 ⊂ A_1 ⊂ ... ⊂ A_n = A`.
    pub steps: Vec<String>,
    /// Ids of the quotients `A_{i+1}/A_i`.
    pub factors: Vec<String>,
    #[serde(with = "crate::serde_util::integer_matrix")]
    pub factor_classes: Vec<Vec<Integer>>,
    pub factor_charges: Vec<GaussianRational>,
    /// Steps where the smallest-id tie-break had to choose between
    /// incomparable maximal destabilizers.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ambiguities: Vec<String>,
}

/// Indexed view of a presentation with implicit edges added.
struct Index<'a> {
    cat: &'a CategoryPresentation,
    charge: &'a ChargeMap,
    class: BTreeMap<&'a str, &'a [Integer]>,
    /// (sub, ambient) -> quotient
    quotient: BTreeMap<(&'a str, &'a str), &'a str>,
}

impl<'a> Index<'a> {
    fn build(cat: &'a CategoryPresentation, charge: &'a ChargeMap) -> Self {
        let mut class = BTreeMap::new();
        for o in &cat.objects {
            class.entry(o.id.as_str()).or_insert(o.class.as_slice());
        }
        let mut quotient = BTreeMap::new();
        for id in class.keys() {
            quotient.insert((cat.zero.as_str(), *id), *id);
            quotient.insert((*id, *id), cat.zero.as_str());
        }
        for e in &cat.edges {
            quotient
                .entry((e.sub.as_str(), e.ambient.as_str()))
                .or_insert(e.quotient.as_str());
        }
        Self {
            cat,
            charge,
            class,
            quotient,
        }
    }

    fn require(&self, id: &str) -> Result<()> {
        if self.class.contains_key(id) {
            Ok(())
        } else {
            Err(Error::UnknownObject(id.to_string()))
        }
    }

    fn z(&self, id: &str) -> GaussianRational {
        self.charge.eval(self.class[id])
    }

    fn is_zero(&self, id: &str) -> bool {
        id == self.cat.zero
    }

    /// Subobjects of `a`, including `0` and `a`.
    fn subobjects(&self, a: &str) -> Vec<&'a str> {
        self.quotient
            .keys()
            .filter(|(_, amb)| *amb == a)
            .map(|(sub, _)| *sub)
            .collect()
    }

    fn is_sub(&self, b: &str, a: &str) -> bool {
        self.quotient.contains_key(&(b, a))
    }

    fn cmp_phase(&self, z1: &GaussianRational, z2: &GaussianRational) -> Result<Ordering> {
        phase_compare(z1, z2)
    }
}

/// All invariant violations of a presentation under `charge`; empty iff valid.
pub fn validate(cat: &CategoryPresentation, charge: &ChargeMap) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for o in &cat.objects {
        if !seen.insert(o.id.as_str()) {
            out.push(Violation::new("duplicate-id", format!("object `{}` listed twice", o.id)));
        }
        if o.class.len() != charge.dim() {
            out.push(Violation::new(
                "dimension",
                format!("object `{}` has {} coordinates, charge expects {}", o.id, o.class.len(), charge.dim()),
            ));
        }
    }
    if !out.is_empty() {
        return out;
    }
    let idx = Index::build(cat, charge);
    match idx.class.get(cat.zero.as_str()) {
        None => out.push(Violation::new("zero", format!("zero object `{}` is not listed", cat.zero))),
        Some(c) if c.iter().any(|x| !x.is_zero()) => {
            out.push(Violation::new("zero", format!("zero object `{}` has nonzero class", cat.zero)))
        }
        _ => {}
    }
    for o in &cat.objects {
        if idx.is_zero(&o.id) {
            continue;
        }
        let z = idx.z(&o.id);
        if !phase_valid(&z) {
            out.push(Violation::new(
                "phase",
                format!("charge {z} of `{}` lies outside the upper half-plane union the negative reals", o.id),
            ));
        }
    }
    let mut declared: BTreeMap<(&str, &str), &str> = BTreeMap::new();
    for e in &cat.edges {
        let names = [&e.sub, &e.ambient, &e.quotient];
        let unknown: Vec<&String> = names.into_iter().filter(|n| !idx.class.contains_key(n.as_str())).collect();
        if !unknown.is_empty() {
            for n in unknown {
                out.push(Violation::new("unknown-id", format!("edge refers to unknown object `{n}`")));
            }
            continue;
        }
        if let Some(q) = declared.insert((&e.sub, &e.ambient), &e.quotient) {
            if q != e.quotient {
                out.push(Violation::new(
                    "conflict",
                    format!("`{}` ⊂ `{}` declared with quotients `{q}` and `{}`", e.sub, e.ambient, e.quotient),
                ));
            }
        }
        let implicit = if e.sub == cat.zero {
            Some(e.ambient.as_str())
        } else if e.sub == e.ambient {
            Some(cat.zero.as_str())
        } else {
            None
        };
        if let Some(q) = implicit {
            if e.quotient != q {
                out.push(Violation::new(
                    "conflict",
                    format!("edge `{}` ⊂ `{}` must have quotient `{q}`", e.sub, e.ambient),
                ));
            }
        }
        let (a, b, c) = (idx.class[e.ambient.as_str()], idx.class[e.sub.as_str()], idx.class[e.quotient.as_str()]);
        if a.iter().zip(b).zip(c).any(|((a, b), c)| a != &(b + c)) {
            out.push(Violation::new(
                "additivity",
                format!("class(`{}`) != class(`{}`) + class(`{}`)", e.ambient, e.sub, e.quotient),
            ));
        }
    }
    // partial order: antisymmetry and transitivity of the subobject relation
    let pairs: Vec<(&str, &str)> = idx.quotient.keys().copied().collect();
    for &(b, a) in &pairs {
        if b != a && idx.is_sub(a, b) {
            if b < a {
                out.push(Violation::new("antisymmetry", format!("`{b}` ⊂ `{a}` and `{a}` ⊂ `{b}`")));
            }
            continue;
        }
        for &(c, b2) in &pairs {
            if b2 == b && !idx.is_sub(c, a) {
                out.push(Violation::new(
                    "transitivity",
                    format!("`{c}` ⊂ `{b}` ⊂ `{a}` but `{c}` ⊂ `{a}` is not listed"),
                ));
            }
        }
    }
    out
}

fn checked_index<'a>(cat: &'a CategoryPresentation, charge: &'a ChargeMap, a: &str) -> Result<Index<'a>> {
    let v = validate(cat, charge);
    if let Some(first) = v.first() {
        return Err(Error::InvalidInput(format!(
            "presentation has {} violation(s), first: {first}",
            v.len()
        )));
    }
    let idx = Index::build(cat, charge);
    idx.require(a)?;
    if idx.is_zero(a) {
        return Err(Error::InvalidInput("the zero object has no phase".into()));
    }
    Ok(idx)
}

fn semistable_in(idx: &Index, a: &str) -> Result<bool> {
    let za = idx.z(a);
    for b in idx.subobjects(a) {
        if b == a || idx.is_zero(b) {
            continue;
        }
        if idx.cmp_phase(&idx.z(b), &za)? == Ordering::Greater {
            return Ok(false);
        }
    }
    Ok(true)
}

/// No strict nonzero subobject has larger phase.
pub fn is_semistable(cat: &CategoryPresentation, charge: &ChargeMap, a: &str) -> Result<bool> {
    let idx = checked_index(cat, charge, a)?;
    semistable_in(&idx, a)
}

/// The Harder–Narasimhan filtration, built greedily from maximal destabilizing
/// subobjects: maximal phase of `Z(B') - Z(B)`, then maximal under
/// inclusion, then smallest id.
pub fn hn_filtration(cat: &CategoryPresentation, charge: &ChargeMap, a: &str) -> Result<Filtration> {
    let idx = checked_index(cat, charge, a)?;
    let subs = idx.subobjects(a);
    let zero = cat.zero.as_str();
    let mut current = zero;
    let mut f = Filtration {
        steps: vec![zero.to_string()],
        factors: vec![],
        factor_classes: vec![],
        factor_charges: vec![],
        ambiguities: vec![],
    };
    while current != a {
        let zc = idx.z(current);
        let above: Vec<&str> = subs
            .iter()
            .copied()
            .filter(|&b| b != current && idx.is_sub(current, b))
            .collect();
        // maximal phase of Z(B') - Z(B)
        let mut best: Vec<&str> = Vec::new();
        let mut best_z: Option<GaussianRational> = None;
        for &b in &above {
            let dz = &idx.z(b) - &zc;
            match &best_z {
                None => {
                    best = vec![b];
                    best_z = Some(dz);
                }
                Some(bz) => match idx.cmp_phase(&dz, bz)? {
                    Ordering::Greater => {
                        best = vec![b];
                        best_z = Some(dz);
                    }
                    Ordering::Equal => best.push(b),
                    Ordering::Less => {}
                },
            }
        }
        if best.is_empty() {
            return Err(Error::InconsistentPresentation(format!(
                "`{current}` ⊂ `{a}` has no strictly larger subobject"
            )));
        }
        let maximal: Vec<&str> = best
            .iter()
            .copied()
            .filter(|&b| !best.iter().any(|&o| o != b && idx.is_sub(b, o)))
            .collect();
        let next = *maximal.iter().min().expect("finite poset has maximal elements");
        if maximal.len() > 1 {
            f.ambiguities.push(format!(
                "above `{current}`: incomparable maximal destabilizers {}",
                maximal.iter().map(|m| format!("`{m}`")).collect::<Vec<_>>().join(", ")
            ));
        }
        let q = idx.quotient[&(current, next)];
        f.factors.push(q.to_string());
        f.factor_classes.push(idx.class[q].to_vec());
        f.factor_charges.push(idx.z(q));
        f.steps.push(next.to_string());
        current = next;
    }
    for w in f.factor_charges.windows(2) {
        if idx.cmp_phase(&w[0], &w[1])? != Ordering::Greater {
            return Err(Error::InconsistentPresentation(
                "greedy filtration does not have strictly decreasing phases".into(),
            ));
        }
    }
    for q in &f.factors {
        if !semistable_in(&idx, q)? {
            return Err(Error::InconsistentPresentation(format!(
                "HN factor `{q}` is not semistable"
            )));
        }
    }
    Ok(f)
}

const MAX_CHAINS: usize = 100_000;

/// Jordan–Hölder factor classes of a semistable object, in the order of the
/// chain whose step ids are lexicographically smallest. All maximal chains
/// of same-phase subobjects are checked to give the same factor multiset.
pub fn jh_factors(cat: &CategoryPresentation, charge: &ChargeMap, a: &str) -> Result<Vec<Vec<Integer>>> {
    let idx = checked_index(cat, charge, a)?;
    if !semistable_in(&idx, a)? {
        return Err(Error::NotSemistable(a.to_string()));
    }
    let za = idx.z(a);
    let mut level: Vec<&str> = vec![cat.zero.as_str()];
    for b in idx.subobjects(a) {
        if !idx.is_zero(b) && idx.cmp_phase(&idx.z(b), &za)? == Ordering::Equal {
            level.push(b);
        }
    }
    level.sort();
    level.dedup();
    // cover relation inside the same-phase poset
    let covers = |x: &str| -> Vec<&str> {
        let ups: Vec<&str> = level.iter().copied().filter(|&y| y != x && idx.is_sub(x, y)).collect();
        ups.iter()
            .copied()
            .filter(|&y| !ups.iter().any(|&m| m != y && idx.is_sub(m, y)))
            .collect()
    };
    let mut chains: Vec<Vec<&str>> = Vec::new();
    let mut stack: Vec<Vec<&str>> = vec![vec![cat.zero.as_str()]];
    while let Some(chain) = stack.pop() {
        let last = *chain.last().expect("nonempty");
        if last == a {
            chains.push(chain);
            if chains.len() > MAX_CHAINS {
                return Err(Error::BudgetExceeded {
                    budget: MAX_CHAINS as u64,
                    bound: "Jordan–Hölder chains".into(),
                });
            }
            continue;
        }
        let mut next = covers(last);
        next.sort_unstable_by(|x, y| y.cmp(x));
        for n in next {
            let mut c = chain.clone();
            c.push(n);
            stack.push(c);
        }
    }
    chains.sort();
    let factor_classes = |chain: &[&str]| -> Vec<Vec<Integer>> {
        chain
            .windows(2)
            .map(|w| idx.class[idx.quotient[&(w[0], w[1])]].to_vec())
            .collect()
    };
    let first = chains.first().ok_or_else(|| {
        Error::InconsistentPresentation(format!("no chain of same-phase subobjects reaches `{a}`"))
    })?;
    let result = factor_classes(first);
    let mut reference = result.clone();
    reference.sort();
    for c in &chains[1..] {
        let mut fc = factor_classes(c);
        fc.sort();
        if fc != reference {
            return Err(Error::InconsistentPresentation(format!(
                "Jordan–Hölder factors of `{a}` depend on the chain"
            )));
        }
    }
    Ok(result)
}

/// For every edge `B ⊂ A` with quotient `C`, all nonzero, checks
/// `φ(B) ≤ φ(A) ⟺ φ(C) ≥ φ(A)` and its strict form.
pub fn seesaw_check(cat: &CategoryPresentation, charge: &ChargeMap) -> Vec<Violation> {
    let idx = Index::build(cat, charge);
    let mut out = Vec::new();
    for e in &cat.edges {
        let ids = [e.sub.as_str(), e.ambient.as_str(), e.quotient.as_str()];
        if ids.iter().any(|i| idx.is_zero(i) || !idx.class.contains_key(i)) {
            continue;
        }
        let (zb, za, zc) = (idx.z(ids[0]), idx.z(ids[1]), idx.z(ids[2]));
        match (phase_compare(&zb, &za), phase_compare(&zc, &za)) {
            (Ok(ob), Ok(oc)) if ob == oc.reverse() => {}
            (Ok(ob), Ok(oc)) => out.push(Violation::new(
                "seesaw",
                format!(
                    "`{}` ⊂ `{}` → `{}`: φ(sub) {:?} φ(ambient) but φ(quotient) {:?} φ(ambient)",
                    e.sub, e.ambient, e.quotient, ob, oc
                ),
            )),
            _ => out.push(Violation::new(
                "phase",
                format!("edge `{}` ⊂ `{}` involves an invalid charge", e.sub, e.ambient),
            )),
        }
    }
    out
}
