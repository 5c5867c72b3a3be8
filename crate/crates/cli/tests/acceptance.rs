//! Acceptance criteria 1-9. Run with
//! `cargo test -p bridgeland-cli --test acceptance -- --nocapture`
//! to see one line per criterion.

#[path = "../../core/tests/common/hn_gen.rs"]
mod hn_gen;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use bridgeland_core::charge::{
    gieseker_compare, hilbert_polynomial, k3_charge, large_volume_phase, phase_compare, ChargeMap, ChargeParams,
};
use bridgeland_core::hn::{hn_filtration, is_semistable, seesaw_check, validate};
use bridgeland_core::lattice::mukai_pairing;
use bridgeland_core::mmp::{bb_square, decomposition_scan, moduli_dimension, omega_class};
use bridgeland_core::num::{int, rat, Integer, Rational};
use bridgeland_core::rank2::Rank2Lattice;
use bridgeland_core::support::{
    analyze, charge_kernel, charge_norm_form, equivalent_support_roundtrip, min_root_norm, QuadraticForm, RootSearch,
};
use bridgeland_core::walls::{compare_with_oracle, nesting_check, sampling_oracle, scan_walls, Region, SliceParams, WallKind};
use bridgeland_core::{ChernCharacter, GaussianRational, MukaiVector, NsLattice};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

// Pinned tolerances and sizes.
const C1_LATTICES: usize = 20;
const C1_VECTORS: usize = 10_000;
const C1_LIMIT: Duration = Duration::from_secs(5);
const C2_CASES: usize = 1_000;
const C2_LIMIT: Duration = Duration::from_secs(5);
const C3_PAIRS: usize = 10_000;
const C3_TRIPLES: usize = 10_000;
const C3_DIGITS: u32 = 100;
const C3_MARGIN_EXP: u32 = 50;
const C4_PRESENTATIONS: u64 = 100;
const C4_MAX_OBJECTS: usize = 12;
const C4_PERMUTATIONS: usize = 10;
const C4_LIMIT: Duration = Duration::from_secs(30);
const C5_BOX: i64 = 40;
const C5_CLASSES: usize = 200;
const C5_LIMIT: Duration = Duration::from_secs(60);
const C6_GRID: usize = 400;
const C6_BOUND: i64 = 8;
const C6_LIMIT: Duration = Duration::from_secs(120);
const C7_SAMPLES: usize = 100;
const C7_MAX_M: usize = 3;
const C7_BOX: i64 = 10;
const C7_LIMIT: Duration = Duration::from_secs(60);
const C8_PAIRS: usize = 1_000;
const C8_EXTRA_N: i64 = 20;
const C8_LIMIT: Duration = Duration::from_secs(10);
const C9_RUNS: usize = 3;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(int(n), int(d))
}

fn random_rational<R: Rng>(rng: &mut R, num: i64, den: i64) -> Rational {
    q(rng.gen_range(-num..=num), rng.gen_range(1..=den))
}

/// Rejection-sampled even lattice of rank 1..=3 with signature (1, rho - 1)
/// and a class of positive square.
fn random_k3_lattice<R: Rng>(rng: &mut R) -> NsLattice {
    loop {
        let rho = rng.gen_range(1..=3usize);
        let mut g = vec![vec![0i64; rho]; rho];
        for i in 0..rho {
            g[i][i] = 2 * rng.gen_range(-4..=4);
            for j in i + 1..rho {
                let x = rng.gen_range(-3..=3);
                g[i][j] = x;
                g[j][i] = x;
            }
        }
        let h: Vec<i64> = (0..rho).map(|_| rng.gen_range(-2..=2)).collect();
        let gram = g.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        if let Ok(l) = NsLattice::new(gram, h.iter().map(|&x| int(x)).collect(), true) {
            return l;
        }
    }
}

fn random_vector<R: Rng>(rng: &mut R, rho: usize, bound: i64) -> MukaiVector {
    let c: Vec<Integer> = (0..rho + 2).map(|_| int(rng.gen_range(-bound..=bound))).collect();
    MukaiVector::from_coords(&c).unwrap()
}

fn gram_i128(l: &NsLattice) -> Vec<Vec<i128>> {
    l.gram()
        .iter()
        .map(|r| r.iter().map(|x| i128::try_from(x).unwrap()).collect())
        .collect()
}

/// `c.c - 2 r s`, in machine integers.
fn mukai_square_i128(g: &[Vec<i128>], v: &[i128]) -> i128 {
    let n = v.len();
    let (r, s) = (v[0], v[n - 1]);
    let c = &v[1..n - 1];
    let mut cc = 0;
    for i in 0..c.len() {
        for j in 0..c.len() {
            cc += g[i][j] * c[i] * c[j];
        }
    }
    cc - 2 * r * s
}

fn criterion_1() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let lattices: Vec<NsLattice> = (0..C1_LATTICES).map(|_| random_k3_lattice(&mut rng)).collect();
    let per = C1_VECTORS / C1_LATTICES;
    let mut checked = 0;
    for l in &lattices {
        let g = gram_i128(l);
        for _ in 0..per {
            let coords: Vec<i128> = (0..l.mukai_rank()).map(|_| rng.gen_range(-1_000_000..=1_000_000)).collect();
            let v = MukaiVector::from_coords(&coords.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>()).unwrap();
            let sq = mukai_pairing(&v, &v, l).unwrap();
            ensure(sq.clone() % int(2) == Integer::zero(), || format!("odd square {sq} for {v}"))?;
            let expect = mukai_square_i128(&g, &coords);
            ensure(sq == BigInt::from(expect), || format!("{v}: {sq} != {expect}"))?;
            checked += 1;
        }
    }
    let k3 = NsLattice::rank_one(2, true).unwrap();
    let one = MukaiVector::from_i64(1, &[0], 1);
    let p = mukai_pairing(&one, &one, &k3).unwrap();
    ensure(p == int(-2), || format!("((1,0,1),(1,0,1)) = {p}"))?;
    for n in 0..=50i64 {
        let v = MukaiVector::from_i64(1, &[0], 1 - n);
        let sq = mukai_pairing(&v, &v, &k3).unwrap();
        ensure(&sq + 2 == int(2 * n), || format!("n = {n}: v^2 + 2 = {}", &sq + 2))?;
        let d = moduli_dimension(&v, &k3).unwrap();
        ensure(d.dimension == int(2 * n), || format!("n = {n}: dimension {}", d.dimension))?;
    }
    Ok(format!("{checked} squares even and equal to c.c - 2rs; anchors exact"))
}

/// `-∫ e^{-β-iω} ch √td` with `√td = (1, 0, 1)`, expanded degree by degree:
/// the degree-2 part of `(1 - x + x²/2)(ch0, ch1, ch2 + ch0)` with `x = β + iω`.
fn integral_expansion(r: &Rational, c: &[Rational], ch2: &Rational, beta: &[Rational], omega: &[Rational], l: &NsLattice) -> GaussianRational {
    let dot = |a: &[Rational], b: &[Rational]| l.dot(a, b);
    let x2 = GaussianRational::new(dot(beta, beta) - dot(omega, omega), rat(2) * dot(beta, omega));
    let deg2_from_e0 = GaussianRational::real(ch2 + r);
    let deg2_from_e1 = GaussianRational::new(-dot(beta, c), -dot(omega, c));
    let deg2_from_e2 = x2.scale(&(r / rat(2)));
    -(&(&deg2_from_e0 + &deg2_from_e1) + &deg2_from_e2)
}

/// Chern character of a K3 Mukai vector: `v = ch √td` gives `ch2 = s - r`.
fn k3_ch(v: &MukaiVector) -> (Rational, Vec<Rational>, Rational) {
    let r = Rational::from_integer(v.r.clone());
    let c = v.c.iter().map(|x| Rational::from_integer(x.clone())).collect();
    let s = Rational::from_integer(v.s.clone());
    (r.clone(), c, s - r)
}

fn random_params<R: Rng>(rng: &mut R, l: &NsLattice, min_square: &Rational) -> ChargeParams {
    loop {
        let beta: Vec<Rational> = (0..l.rank()).map(|_| random_rational(rng, 9, 7)).collect();
        let t = q(rng.gen_range(1..=12), rng.gen_range(1..=3));
        let omega: Vec<Rational> = l
            .ample()
            .iter()
            .map(|h| &t * Rational::from_integer(h.clone()) + random_rational(rng, 1, 5))
            .collect();
        if let Ok(p) = ChargeParams::new(l.clone(), beta, omega) {
            if p.omega_square() > *min_square {
                return p;
            }
        }
    }
}

fn criterion_2() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..C2_CASES {
        let l = random_k3_lattice(&mut rng);
        let p = random_params(&mut rng, &l, &rat(0));
        let v = random_vector(&mut rng, l.rank(), 40);
        let (r, c, ch2) = k3_ch(&v);
        let expect = integral_expansion(&r, &c, &ch2, p.beta(), p.omega(), &l);
        let got = k3_charge(&v, &p).unwrap();
        ensure(got == expect, || format!("case {i}: v = {v}: {got} != {expect}"))?;
    }
    Ok(format!("{C2_CASES} exact matches"))
}

/// Fixed-point reals with `GUARD` extra digits over the requested precision.
struct Fixed {
    scale: BigInt,
    pi: BigInt,
}

impl Fixed {
    const GUARD: u32 = 20;

    fn new(digits: u32) -> Self {
        let scale = num_traits::pow(BigInt::from(10), (digits + Self::GUARD) as usize);
        let mut f = Fixed {
            scale,
            pi: BigInt::zero(),
        };
        // Machin: pi = 16 atan(1/5) - 4 atan(1/239)
        let a = f.atan_series(&(&f.scale / 5));
        let b = f.atan_series(&(&f.scale / 239));
        f.pi = a * 16 - b * 4;
        f
    }

    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b / &self.scale
    }

    /// Taylor series, for `|x|` well below one.
    fn atan_series(&self, x: &BigInt) -> BigInt {
        let x2 = self.mul(x, x);
        let mut power = x.clone();
        let mut sum = BigInt::zero();
        let mut k = 0u64;
        while !power.is_zero() {
            let term = &power / (2 * k + 1);
            if k % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
            power = self.mul(&power, &x2);
            k += 1;
        }
        sum
    }

    /// `atan(x)` for `|x| <= 1` via two half-angle reductions.
    fn atan_unit(&self, x: &BigInt) -> BigInt {
        let mut y = x.clone();
        for _ in 0..2 {
            let root = (&self.scale * &self.scale + &y * &y).sqrt();
            y = &y * &self.scale / (&self.scale + root);
        }
        self.atan_series(&y) * 4
    }

    fn atan_rational(&self, num: &BigInt, den: &BigInt) -> BigInt {
        debug_assert!(den.is_positive());
        if num.abs() <= *den {
            self.atan_unit(&(num * &self.scale / den))
        } else {
            let half_pi: BigInt = &self.pi / 2;
            let inner = self.atan_unit(&(den * &self.scale / num));
            if num.is_positive() {
                half_pi - inner
            } else {
                -half_pi - inner
            }
        }
    }

    /// Principal argument in `(0, pi]` of `x + i y` with `y > 0`, or `y = 0 > x`.
    fn arg(&self, z: &GaussianRational) -> BigInt {
        if z.im.is_zero() {
            return self.pi.clone();
        }
        // arg = pi/2 - atan(x / y)
        let ratio = &z.re / &z.im;
        &self.pi / 2 - self.atan_rational(ratio.numer(), ratio.denom())
    }
}

fn random_valid_charge<R: Rng>(rng: &mut R) -> GaussianRational {
    loop {
        let re = q(rng.gen_range(-1_000_000..=1_000_000), rng.gen_range(1..=1000));
        let im = if rng.gen_bool(0.05) {
            rat(0)
        } else {
            q(rng.gen_range(0..=1_000_000), rng.gen_range(1..=1000))
        };
        let z = GaussianRational::new(re, im);
        if z.im.is_positive() || (z.im.is_zero() && z.re.is_negative()) {
            return z;
        }
    }
}

fn criterion_3() -> Check {
    let fixed = Fixed::new(C3_DIGITS);
    let margin = num_traits::pow(BigInt::from(10), (C3_DIGITS + Fixed::GUARD - C3_MARGIN_EXP) as usize);
    let pi_ref = "3.14159265358979323846264338327950288419716939937510";
    let pi_digits = (&fixed.pi / num_traits::pow(BigInt::from(10), (C3_DIGITS + Fixed::GUARD - 50) as usize)).to_string();
    ensure(pi_digits == pi_ref.replace('.', ""), || format!("pi oracle is off: {pi_digits}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut decisive, mut close) = (0, 0);
    for i in 0..C3_PAIRS {
        let a = random_valid_charge(&mut rng);
        let b = match i % 5 {
            // same ray, and tiny perturbations of it
            0 => a.scale(&q(rng.gen_range(1..=1000), rng.gen_range(1..=1000))),
            1 => GaussianRational::new(&a.re + q(1, 1_000_000_007), a.im.clone()),
            _ => random_valid_charge(&mut rng),
        };
        if !(b.im.is_positive() || (b.im.is_zero() && b.re.is_negative())) {
            continue;
        }
        let got = phase_compare(&a, &b).unwrap();
        let diff = fixed.arg(&a) - fixed.arg(&b);
        if diff.abs() > margin {
            decisive += 1;
            let expect = if diff.is_positive() { Ordering::Greater } else { Ordering::Less };
            ensure(got == expect, || format!("{a} vs {b}: exact {got:?}, float {expect:?}"))?;
        } else {
            // inputs of this height cannot have distinct phases this close
            ensure(got == Ordering::Equal, || format!("{a} vs {b}: within the margin but {got:?}"))?;
            close += 1;
        }
    }

    // small pool so that ties are frequent
    let pool: Vec<GaussianRational> = (0..40)
        .map(|_| {
            let base = GaussianRational::from_ints(rng.gen_range(-4..=4), rng.gen_range(0..=4));
            let base = if base.im.is_zero() { GaussianRational::from_ints(-rng.gen_range(1..=4), 0) } else { base };
            base.scale(&q(rng.gen_range(1..=6), rng.gen_range(1..=6)))
        })
        .collect();
    let mut violations = 0;
    for _ in 0..C3_TRIPLES {
        let [a, b, c] = [0, 0, 0].map(|_| &pool[rng.gen_range(0..pool.len())]);
        let ab = phase_compare(a, b).unwrap();
        let bc = phase_compare(b, c).unwrap();
        let ac = phase_compare(a, c).unwrap();
        let ba = phase_compare(b, a).unwrap();
        let bad = ba != ab.reverse()
            || (ab != Ordering::Greater && bc != Ordering::Greater && ac == Ordering::Greater)
            || (ab == Ordering::Less && bc != Ordering::Greater && ac != Ordering::Less)
            || (ab == Ordering::Equal && bc == Ordering::Equal && ac != Ordering::Equal);
        if bad {
            violations += 1;
        }
    }
    ensure(violations == 0, || format!("{violations} transitivity violations"))?;
    Ok(format!(
        "{decisive} decisive pairs agree with {C3_DIGITS}-digit atan2 ({close} within 1e-{C3_MARGIN_EXP}, all exactly equal); 0 transitivity violations in {C3_TRIPLES} triples"
    ))
}

fn criterion_4() -> Check {
    let z = hn_gen::slope_charge();
    let mut objects = 0;
    let mut multi = 0;
    for seed in 0..C4_PRESENTATIONS {
        let mut rng = ChaCha8Rng::seed_from_u64(4_000 + seed);
        let cat = hn_gen::random_presentation(&mut rng, C4_MAX_OBJECTS, false);
        ensure(cat.objects.len() <= C4_MAX_OBJECTS, || format!("seed {seed}: too many objects"))?;
        ensure(validate(&cat, &z).is_empty(), || format!("seed {seed}: invalid presentation"))?;
        let seesaw = seesaw_check(&cat, &z);
        ensure(seesaw.is_empty(), || format!("seed {seed}: seesaw {seesaw:?}"))?;
        let perms: Vec<_> = (0..C4_PERMUTATIONS).map(|_| hn_gen::shuffled(&cat, &mut rng)).collect();
        for o in cat.objects.iter().filter(|o| o.id != cat.zero) {
            objects += 1;
            let f = hn_filtration(&cat, &z, &o.id).unwrap();
            if f.factors.len() > 1 {
                multi += 1;
            }
            for w in f.factor_charges.windows(2) {
                ensure(phase_compare(&w[0], &w[1]).unwrap() == Ordering::Greater, || {
                    format!("seed {seed}, {}: phases not strictly decreasing", o.id)
                })?;
            }
            for id in &f.factors {
                ensure(is_semistable(&cat, &z, id).unwrap(), || format!("seed {seed}: factor {id} unstable"))?;
            }
            let mut sum = vec![Integer::zero(); o.class.len()];
            for c in &f.factor_classes {
                for (s, x) in sum.iter_mut().zip(c) {
                    *s += x;
                }
            }
            ensure(sum == o.class, || format!("seed {seed}, {}: classes do not add up", o.id))?;
            let total: GaussianRational = f.factor_charges.iter().cloned().sum();
            ensure(total == z.eval(&o.class), || format!("seed {seed}, {}: charges do not add up", o.id))?;
            for p in &perms {
                ensure(hn_filtration(p, &z, &o.id).unwrap() == f, || {
                    format!("seed {seed}, {}: filtration depends on input order", o.id)
                })?;
            }
        }
    }
    Ok(format!(
        "{C4_PRESENTATIONS} presentations, {objects} objects ({multi} with several factors), {C4_PERMUTATIONS} permutations each"
    ))
}

fn worked_example() -> (NsLattice, ChargeParams) {
    let l = NsLattice::rank_one(2, true).unwrap();
    let p = ChargeParams::along_ample(l.clone(), rat(0), rat(2)).unwrap();
    (l, p)
}

/// Nonzero classes with `Q(v) >= 0`, smallest first, from the box `[-3, 3]^3`.
fn roundtrip_classes(qz: &QuadraticForm) -> Vec<Vec<Integer>> {
    let mut all: Vec<Vec<Integer>> = Vec::new();
    for a in -3..=3i64 {
        for b in -3..=3i64 {
            for c in -3..=3i64 {
                let v = vec![int(a), int(b), int(c)];
                if (a, b, c) != (0, 0, 0) && !qz.eval_int(&v).is_negative() {
                    all.push(v);
                }
            }
        }
    }
    all.sort_by(|x, y| bridgeland_core::num::small_first(x, y));
    all.truncate(C5_CLASSES);
    all
}

fn criterion_5() -> Check {
    let (l, p) = worked_example();
    let z = ChargeMap::from_params(&p).unwrap();
    let m = QuadraticForm::mukai(&l);
    let k = charge_kernel(&z, &m).unwrap();
    let expect = vec![vec![rat(1), rat(0), rat(4)]];
    ensure(k.basis == expect, || format!("kernel basis {:?}", k.basis))?;
    let restricted = m.restrict(&k.basis);
    ensure(restricted == vec![vec![rat(-8)]], || format!("restricted form {restricted:?}"))?;

    // brute force over the box: Z(x) = 4r - s + 4ci here, and ||Z||_S^2 = Z^T S Z
    let s = charge_norm_form(&z, &k, &m).unwrap();
    let got = min_root_norm(&z, &k, &s, &m, &RootSearch::default()).unwrap();
    let mut best: Option<Rational> = None;
    let mut best_x = None;
    for r in -C5_BOX..=C5_BOX {
        for c in -C5_BOX..=C5_BOX {
            for t in -C5_BOX..=C5_BOX {
                if 2 * c * c - 2 * r * t != -2 {
                    continue;
                }
                let (re, im) = (rat(4 * r - t), rat(4 * c));
                let val = &s[0][0] * &re * &re + rat(2) * &s[0][1] * &re * &im + &s[1][1] * &im * &im;
                if best.as_ref().map_or(true, |b| val < *b) {
                    best = Some(val);
                    best_x = Some((r, c, t));
                }
            }
        }
    }
    let best = best.ok_or("no root in the box")?;
    let c2 = got.c_squared.clone().ok_or("min_root_norm found no root")?;
    ensure(c2 == best, || format!("min_root_norm {c2} vs brute force {best} at {best_x:?}"))?;

    let a = analyze(&p, &RootSearch::default()).unwrap();
    let qz = a.q_z.clone().ok_or("no Q_Z")?;
    // leading minors of Q_Z restricted to the kernel alternate in sign, starting negative
    let kb = &k.basis;
    let g = qz.gram();
    let mut restricted = vec![vec![rat(0); kb.len()]; kb.len()];
    for i in 0..kb.len() {
        for j in 0..kb.len() {
            for a_ in 0..3 {
                for b_ in 0..3 {
                    restricted[i][j] += &kb[i][a_] * &g[a_][b_] * &kb[j][b_];
                }
            }
        }
    }
    ensure(kb.len() == 1 && restricted[0][0].is_negative(), || {
        format!("Q_Z on the kernel: {restricted:?}")
    })?;

    let classes = roundtrip_classes(&qz);
    ensure(classes.len() == C5_CLASSES, || format!("only {} classes", classes.len()))?;
    let report = equivalent_support_roundtrip(&qz, &z, &classes).unwrap();
    ensure(report.checked == C5_CLASSES && report.all_pass, || {
        format!("roundtrip: checked {}, all_pass {}", report.checked, report.all_pass)
    })?;
    Ok(format!(
        "kernel (1,0,4) with value -8; min root norm {c2} matches box {C5_BOX}; Q_Z|ker = {}; roundtrip on {} classes",
        restricted[0][0], report.checked
    ))
}

fn wall_setup() -> (MukaiVector, SliceParams, Region) {
    let s = SliceParams::new(NsLattice::rank_one(2, true).unwrap(), vec![rat(0)], None).unwrap();
    let r = Region::new(rat(-3), rat(0), q(1, 10), rat(4)).unwrap();
    (MukaiVector::from_i64(1, &[0], -1), s, r)
}

fn criterion_6() -> Check {
    let (v, s, region) = wall_setup();
    // by hand: Z(1,0,-1) = 1 - b^2 + t^2 - 2ibt and Z(0,0,1) = -1 on this slice,
    // so the two are aligned exactly on b = 0
    for t in [q(1, 10), rat(1), rat(4)] {
        let zv = s.charge_at(&v, &rat(0), &t).unwrap();
        let zw = s.charge_at(&MukaiVector::from_i64(0, &[0], 1), &rat(0), &t).unwrap();
        ensure(zv == GaussianRational::new(rat(1) + &t * &t, rat(0)) && zw == GaussianRational::from_ints(-1, 0), || {
            format!("hand-derived charges differ at t = {t}")
        })?;
    }
    let scan = scan_walls(&v, &s, &region, C6_BOUND).unwrap();
    let oracle = sampling_oracle(&v, &s, &region, C6_GRID, C6_BOUND).unwrap();
    let cmp = compare_with_oracle(&scan, &oracle);
    ensure(cmp.equal, || {
        format!(
            "scan and oracle differ: {} only enumerated, {} only oracle",
            cmp.only_enumerated.len(),
            cmp.only_oracle.len()
        )
    })?;
    let w = MukaiVector::from_i64(0, &[0], 1);
    let vertical = scan.walls.iter().find(|wall| {
        wall.locus.kind == (WallKind::VerticalLine { b: rat(0) }) && wall.classes.iter().any(|c| *c == w)
    });
    ensure(vertical.is_some(), || "no vertical wall b = 0 from w = (0,0,1)".into())?;
    let nesting = nesting_check(&scan.walls);
    ensure(nesting.violations.is_empty(), || format!("{} nesting violations", nesting.violations.len()))?;
    Ok(format!(
        "{} walls, equal to the {C6_GRID}x{C6_GRID} oracle; vertical wall b = 0 present; {} pairs nested or disjoint",
        scan.walls.len(),
        nesting.pairs_checked
    ))
}

/// Mukai Gram matrix built directly from the NS Gram matrix.
fn mukai_gram(l: &NsLattice) -> Vec<Vec<Rational>> {
    let n = l.rank() + 2;
    let mut m = vec![vec![rat(0); n]; n];
    m[0][n - 1] = rat(-1);
    m[n - 1][0] = rat(-1);
    for i in 0..l.rank() {
        for j in 0..l.rank() {
            m[i + 1][j + 1] = Rational::from_integer(l.gram()[i][j].clone());
        }
    }
    m
}

fn pair(m: &[Vec<Rational>], a: &[Rational], b: &[Rational]) -> Rational {
    let mut acc = rat(0);
    for i in 0..a.len() {
        for j in 0..b.len() {
            acc += &a[i] * &m[i][j] * &b[j];
        }
    }
    acc
}

type Multiset = Vec<[i64; 2]>;

fn brute_decompositions(g: [[i64; 2]; 2], v: [i64; 2], r: i64) -> BTreeSet<Multiset> {
    let qf = |a: [i64; 2]| g[0][0] * a[0] * a[0] + 2 * g[0][1] * a[0] * a[1] + g[1][1] * a[1] * a[1];
    let v2 = qf(v);
    let mut out = BTreeSet::new();
    if v2 >= -2 {
        out.insert(vec![v]);
    }
    let inside = |a: [i64; 2]| a[0].abs() <= r && a[1].abs() <= r && a != [0, 0];
    let ok = |parts: &[[i64; 2]]| {
        let m = parts.len() as i64;
        parts.iter().all(|&a| qf(a) >= -2) && v2 - 2 * (m - 1) - parts.iter().map(|&a| qf(a)).sum::<i64>() >= 0
    };
    let boxed: Vec<[i64; 2]> = (-r..=r).flat_map(|x| (-r..=r).map(move |y| [x, y])).filter(|&a| inside(a)).collect();
    for &a in &boxed {
        let b = [v[0] - a[0], v[1] - a[1]];
        if inside(b) && ok(&[a, b]) {
            let mut p = vec![a, b];
            p.sort();
            out.insert(p);
        }
        for &b in &boxed {
            let c = [v[0] - a[0] - b[0], v[1] - a[1] - b[1]];
            if inside(c) && ok(&[a, b, c]) {
                let mut p = vec![a, b, c];
                p.sort();
                out.insert(p);
            }
        }
    }
    out
}

fn criterion_7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut samples = 0;
    let mut min_bb: Option<Rational> = None;
    while samples < C7_SAMPLES {
        let l = random_k3_lattice(&mut rng);
        let p = random_params(&mut rng, &l, &rat(2));
        let v = random_vector(&mut rng, l.rank(), 8);
        let n = l.mukai_rank();
        // charges of the basis vectors from the integral expansion, not the library
        let cols: Vec<GaussianRational> = (0..n)
            .map(|i| {
                let mut e = vec![Integer::zero(); n];
                e[i] = Integer::one();
                let (r, c, ch2) = k3_ch(&MukaiVector::from_coords(&e).unwrap());
                integral_expansion(&r, &c, &ch2, p.beta(), p.omega(), &l)
            })
            .collect();
        let zv = v.coords().iter().zip(&cols).fold(GaussianRational::zero(), |acc, (x, z)| {
            &acc + &z.scale(&Rational::from_integer(x.clone()))
        });
        if zv.is_zero() {
            continue;
        }
        samples += 1;
        let z = ChargeMap::from_params(&p).unwrap();
        let o = omega_class(&v, &z, &l).unwrap();
        let m = mukai_gram(&l);
        for (i, zi) in cols.iter().enumerate() {
            let mut e = vec![rat(0); n];
            e[i] = rat(1);
            // Im(a / b) = (Im a Re b - Re a Im b) / |b|^2
            let expect = (&zi.im * &zv.re - &zi.re * &zv.im) / (&zv.re * &zv.re + &zv.im * &zv.im);
            let got = pair(&m, &o.coords, &e);
            ensure(got == expect, || format!("sample {samples}, basis {i}: {got} != {expect}"))?;
        }
        let vq: Vec<Rational> = v.coords().iter().map(|x| Rational::from_integer(x.clone())).collect();
        ensure(pair(&m, &o.coords, &vq).is_zero(), || format!("(Omega, v) != 0 for {v}"))?;
        let bb = bb_square(&o);
        ensure(bb == pair(&m, &o.coords, &o.coords), || "bb_square is not (Omega, Omega)".into())?;
        ensure(bb.is_positive(), || format!("bb_square {bb} <= 0 for {v}"))?;
        if min_bb.as_ref().map_or(true, |b| bb < *b) {
            min_bb = Some(bb);
        }
    }

    let g = [[2, -1], [-1, 0]];
    let hw = Rank2Lattice::from_gram_i64(g).unwrap();
    let mut vs = 0;
    for x in -2..=2i64 {
        for y in -2..=2i64 {
            if (x, y) == (0, 0) {
                continue;
            }
            let vv = hw.vector(&[int(x), int(y)]);
            let got: BTreeSet<Multiset> = decomposition_scan(&vv, &hw, C7_MAX_M, C7_BOX, None)
                .unwrap()
                .iter()
                .map(|d| {
                    let mut p: Multiset = d
                        .parts
                        .iter()
                        .map(|a| {
                            let c = hw.coords_of(a).unwrap();
                            [i64::try_from(&c[0]).unwrap(), i64::try_from(&c[1]).unwrap()]
                        })
                        .collect();
                    p.sort();
                    p
                })
                .collect();
            let expect = brute_decompositions(g, [x, y], C7_BOX);
            ensure(got == expect, || format!("decompositions of ({x},{y}) differ from brute force"))?;
            vs += 1;
        }
    }
    Ok(format!(
        "{samples} omega classes verified on full bases, min bb_square {}; decompositions match brute force for {vs} classes",
        min_bb.unwrap()
    ))
}

/// Smallest `n >= 1` with `n^2 > max(c, c', |b'c - bc'| / |b - b'|)` for the
/// reduced polynomials `X^2 + bX + c`. Past it the difference of the two
/// large-volume charges no longer changes sign.
fn gieseker_threshold(pa: &[Rational], pb: &[Rational]) -> i64 {
    let (b, c) = (&pa[1] / &pa[2], &pa[0] / &pa[2]);
    let (b2, c2) = (&pb[1] / &pb[2], &pb[0] / &pb[2]);
    let mut m = c.clone().max(c2.clone());
    if b != b2 {
        m = m.max(((&b2 * &c - &b * &c2) / (&b - &b2)).abs());
    }
    let mut n = 1i64;
    while rat(n * n) <= m {
        n += 1;
    }
    n
}

fn criterion_8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut pairs = 0;
    let mut max_n = 0;
    while pairs < C8_PAIRS {
        let degree = 2 * rng.gen_range(1..=4);
        let l = NsLattice::rank_one(degree, true).unwrap();
        let t = q(rng.gen_range(1..=8), rng.gen_range(1..=3));
        let p = ChargeParams::along_ample(l, rat(0), t).unwrap();
        let ch = |rng: &mut ChaCha8Rng| {
            ChernCharacter::from_i64(rng.gen_range(1..=5), &[rng.gen_range(-8..=8)], rng.gen_range(-12..=12))
        };
        let (a, b) = (ch(&mut rng), ch(&mut rng));
        let pa = hilbert_polynomial(&a, &p).unwrap();
        let pb = hilbert_polynomial(&b, &p).unwrap();
        if !(pa[1].is_positive() && pb[1].is_positive()) {
            continue;
        }
        pairs += 1;
        let n0 = gieseker_threshold(&pa, &pb);
        max_n = max_n.max(n0);
        let g = gieseker_compare(&pa, &pb).unwrap();
        let ns = (n0..n0 + C8_EXTRA_N).chain([n0 * 1000, 1_000_000_007]);
        for n in ns {
            let wa = large_volume_phase(&a, &p, &rat(n)).unwrap();
            let wb = large_volume_phase(&b, &p, &rat(n)).unwrap();
            // larger reduced Hilbert polynomial <=> smaller phase of W
            let w = phase_compare(&wa, &wb).unwrap();
            ensure(w == g.reverse(), || format!("pair {pairs}, n = {n}: gieseker {g:?}, W {w:?}"))?;
        }
    }
    Ok(format!("{pairs} pairs agree for n in [N, N+{C8_EXTRA_N}) and two large n (max N = {max_n})"))
}

fn bridgeland() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bridgeland"))
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = bridgeland().args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?} exited with {}: {}",
            out.status,
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn without_timestamp(path: &Path) -> Result<Value, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let mut v: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    v["manifest"]
        .as_object_mut()
        .ok_or("no manifest")?
        .remove("timestamp")
        .ok_or("no timestamp")?;
    Ok(v)
}

fn criterion_9() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let lattice = dir.path().join("k3d2.json");
    std::fs::write(&lattice, r#"{"rank": 1, "gram": [["2"]], "ample": ["1"], "k3": true}"#).unwrap();
    let (_, p) = worked_example();
    let qz = analyze(&p, &RootSearch::default()).unwrap().q_z.unwrap();
    let classes: Vec<Vec<String>> = roundtrip_classes(&qz)
        .iter()
        .map(|c| c.iter().map(ToString::to_string).collect())
        .collect();
    let classes_path = dir.path().join("classes.json");
    std::fs::write(&classes_path, serde_json::to_string(&classes).unwrap()).unwrap();
    let l = lattice.to_str().unwrap();
    let c = classes_path.to_str().unwrap();
    let grid = C6_GRID.to_string();
    let bound = C6_BOUND.to_string();
    let commands: Vec<Vec<&str>> = vec![
        vec!["support", "--lattice", l, "--beta", "0", "--omega", "2", "--classes", c],
        vec![
            "walls", "--lattice", l, "--v", "1,0,-1", "--beta0", "0", "--b", "-3:0", "--t", "0.1:4", "--bound", &bound,
            "--grid", &grid,
        ],
        vec!["nef", "--lattice", l, "--v", "1,0,-1", "--beta", "0", "--omega", "2"],
        vec!["classify-wall", "--lattice", l, "--v", "1,0,-1", "--w", "0,0,1", "--point", "0,1"],
    ];
    for cmd in &commands {
        let first = run_cli(cmd)?;
        serde_json::from_slice::<Value>(&first).map_err(|e| format!("{}: not JSON: {e}", cmd[0]))?;
        for _ in 1..C9_RUNS {
            ensure(run_cli(cmd)? == first, || format!("{}: stdout differs between runs", cmd[0]))?;
        }
        let out = dir.path().join(format!("{}.json", cmd[0]));
        let mut with_out = cmd.clone();
        with_out.extend(["--out", out.to_str().unwrap()]);
        run_cli(&with_out)?;
        let base = without_timestamp(&out)?;
        ensure(base["result"] == serde_json::from_slice::<Value>(&first).unwrap(), || {
            format!("{}: --out result differs from stdout", cmd[0])
        })?;
        for _ in 1..C9_RUNS {
            run_cli(&with_out)?;
            ensure(without_timestamp(&out)? == base, || format!("{}: --out differs between runs", cmd[0]))?;
        }
    }
    Ok(format!("{} commands byte-identical over {C9_RUNS} runs", commands.len()))
}

#[test]
fn acceptance() {
    let criteria: Vec<(&str, fn() -> Check, Option<Duration>)> = vec![
        ("Mukai arithmetic", criterion_1, Some(C1_LIMIT)),
        ("charge identity", criterion_2, Some(C2_LIMIT)),
        ("phase comparator", criterion_3, None),
        ("HN engine", criterion_4, Some(C4_LIMIT)),
        ("support kit", criterion_5, Some(C5_LIMIT)),
        ("wall scan", criterion_6, Some(C6_LIMIT)),
        ("divisor layer", criterion_7, Some(C7_LIMIT)),
        ("Gieseker / large volume", criterion_8, Some(C8_LIMIT)),
        ("CLI determinism", criterion_9, None),
    ];
    let mut failed = Vec::new();
    for (i, (name, f, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(l)) if elapsed > l => Err(format!("took {elapsed:.2?}, limit {l:?}")),
            (o, _) => o,
        };
        let timing = match limit {
            Some(l) => format!("{elapsed:.2?} / {l:?}"),
            None => format!("{elapsed:.2?}"),
        };
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} [{timing}] {detail}", i + 1),
            Err(detail) => {
                println!("criterion {}: FAIL  {name} [{timing}] {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
