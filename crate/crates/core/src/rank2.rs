//! Rank-2 sublattices of the Mukai lattice: saturation, roots and isotropic
//! rays of the restricted binary form.

use std::collections::BTreeSet;

use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{combine, mukai_pairing, MukaiVector, NsLattice};
use crate::num::{exact_sqrt, ext_gcd, gcd_all, int, small_first, Integer};

/// `a x^2 + 2 b x y + c y^2`, Gram matrix `[[a, b], [b, c]]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryForm {
    pub a: Integer,
    pub b: Integer,
    pub c: Integer,
}

impl BinaryForm {
    pub fn new(a: Integer, b: Integer, c: Integer) -> Self {
        Self { a, b, c }
    }

    pub fn from_gram(g: &[[Integer; 2]; 2]) -> Result<Self> {
        if g[0][1] != g[1][0] {
            return Err(Error::InvalidInput("gram2 must be symmetric".into()));
        }
        Ok(Self::new(g[0][0].clone(), g[0][1].clone(), g[1][1].clone()))
    }

    pub fn gram(&self) -> [[Integer; 2]; 2] {
        [
            [self.a.clone(), self.b.clone()],
            [self.b.clone(), self.c.clone()],
        ]
    }

    pub fn det(&self) -> Integer {
        &self.a * &self.c - &self.b * &self.b
    }

    pub fn pair(&self, x: &[Integer; 2], y: &[Integer; 2]) -> Integer {
        &self.a * &x[0] * &y[0] + &self.b * (&x[0] * &y[1] + &x[1] * &y[0]) + &self.c * &x[1] * &y[1]
    }

    pub fn eval(&self, x: &[Integer; 2]) -> Integer {
        self.pair(x, x)
    }

    /// All `x` with `Q(x) = -2` and `|B(x, v)| <= bound`, sorted small first.
    pub fn roots(&self, v: &[Integer; 2], bound: &Integer) -> Result<Vec<[Integer; 2]>> {
        let alpha = &self.a * &v[0] + &self.b * &v[1];
        let beta = &self.b * &v[0] + &self.c * &v[1];
        let mut found = BTreeSet::new();
        if alpha.is_zero() && beta.is_zero() {
            // pairing with v is identically zero; only a definite form keeps this finite
            if self.det().is_positive() {
                if self.a.is_negative() {
                    self.definite_values(&int(-2), &mut found);
                }
            } else {
                return Err(Error::Degenerate(
                    "v pairs trivially with an indefinite rank-2 lattice".into(),
                ));
            }
        } else {
            let (g, x0, y0) = ext_gcd(&alpha, &beta);
            let e = [&beta / &g, -(&alpha / &g)];
            let qe = self.eval(&e);
            let mut d = -bound.clone();
            while &d <= bound {
                if d.is_multiple_of(&g) {
                    let m = &d / &g;
                    let p0 = [&x0 * &m, &y0 * &m];
                    self.roots_on_line(&p0, &e, &qe, &mut found)?;
                }
                d += 1;
            }
        }
        let mut out: Vec<[Integer; 2]> = found.into_iter().collect();
        out.sort_by(|x, y| small_first(x, y));
        Ok(out)
    }

    /// Points `p0 + k e` with `Q = -2`.
    fn roots_on_line(
        &self,
        p0: &[Integer; 2],
        e: &[Integer; 2],
        qe: &Integer,
        out: &mut BTreeSet<[Integer; 2]>,
    ) -> Result<()> {
        let bpe = self.pair(p0, e);
        let rhs: Integer = self.eval(p0) + 2;
        let at = |k: &Integer| [&p0[0] + k * &e[0], &p0[1] + k * &e[1]];
        if qe.is_zero() {
            // 2 B k + (Q(p0) + 2) = 0
            if bpe.is_zero() {
                if rhs.is_zero() {
                    return Err(Error::Degenerate(
                        "infinitely many roots on an isotropic line".into(),
                    ));
                }
                return Ok(());
            }
            let num = -rhs;
            let den = int(2) * bpe;
            if num.is_multiple_of(&den) {
                out.insert(at(&(num / den)));
            }
            return Ok(());
        }
        // qe k^2 + 2 bpe k + rhs = 0
        let disc = &bpe * &bpe - qe * &rhs;
        if disc.is_negative() {
            return Ok(());
        }
        if let Some(s) = exact_sqrt(&disc) {
            for num in [-&bpe + &s, -&bpe - &s] {
                if num.is_multiple_of(qe) {
                    out.insert(at(&(num / qe)));
                }
            }
        }
        Ok(())
    }

    /// All `x` with `Q(x) = target` for a definite form.
    fn definite_values(&self, target: &Integer, out: &mut BTreeSet<[Integer; 2]>) {
        // (a x + b y)^2 + det y^2 = a target
        let det = self.det();
        let at = &self.a * target;
        if at.is_negative() {
            return;
        }
        let ymax = (&at / &det).sqrt();
        let mut y = -ymax.clone();
        while y <= ymax {
            let rest = &at - &det * &y * &y;
            if let Some(s) = exact_sqrt(&rest) {
                for u in [s.clone(), -s.clone()] {
                    let num = u - &self.b * &y;
                    if num.is_multiple_of(&self.a) {
                        out.insert([num / &self.a, y.clone()]);
                    }
                }
            }
            y += 1;
        }
    }

    /// Primitive isotropic rays, normalized with positive first nonzero
    /// coordinate. Exists iff `-det` is a perfect square.
    pub fn isotropic_rays(&self) -> Result<Vec<[Integer; 2]>> {
        let disc = -self.det();
        if disc.is_negative() {
            return Ok(Vec::new());
        }
        let s = match exact_sqrt(&disc) {
            Some(s) => s,
            None => return Ok(Vec::new()),
        };
        let candidates: Vec<[Integer; 2]> = if !self.a.is_zero() {
            vec![
                [-&self.b + &s, self.a.clone()],
                [-&self.b - &s, self.a.clone()],
            ]
        } else if self.b.is_zero() && self.c.is_zero() {
            return Err(Error::Degenerate("zero binary form".into()));
        } else {
            vec![[int(1), int(0)], [-self.c.clone(), int(2) * &self.b]]
        };
        let mut out = BTreeSet::new();
        for x in candidates {
            if x[0].is_zero() && x[1].is_zero() {
                continue;
            }
            out.insert(normalize_ray(x));
        }
        let mut out: Vec<_> = out.into_iter().collect();
        out.sort_by(|x, y| small_first(x, y));
        Ok(out)
    }
}

fn normalize_ray(x: [Integer; 2]) -> [Integer; 2] {
    let g = x[0].gcd(&x[1]);
    let mut y = [&x[0] / &g, &x[1] / &g];
    let first = if y[0].is_zero() { &y[1] } else { &y[0] };
    if first.is_negative() {
        y = [-&y[0], -&y[1]];
    }
    y
}

/// A saturated rank-2 sublattice with a primitive basis and its Gram matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rank2Lattice {
    basis: [MukaiVector; 2],
    #[serde(with = "gram2_serde")]
    gram2: [[Integer; 2]; 2],
}

mod gram2_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(g: &[[Integer; 2]; 2], s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Integer>> = g.iter().map(|r| r.to_vec()).collect();
        crate::serde_util::integer_matrix::serialize(&rows, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<[[Integer; 2]; 2], D::Error> {
        let rows = crate::serde_util::integer_matrix::deserialize(d)?;
        let bad = || serde::de::Error::custom("gram2 must be 2x2");
        if rows.len() != 2 || rows.iter().any(|r| r.len() != 2) {
            return Err(bad());
        }
        Ok([
            [rows[0][0].clone(), rows[0][1].clone()],
            [rows[1][0].clone(), rows[1][1].clone()],
        ])
    }
}

impl Rank2Lattice {
    /// Wraps an explicit basis, checking saturation and computing the Gram matrix.
    pub fn from_basis(basis: [MukaiVector; 2], lattice: &NsLattice) -> Result<Self> {
        if basis[0].is_proportional(&basis[1]) {
            return Err(Error::Proportional);
        }
        if !minor_content(&basis[0], &basis[1]).is_one() {
            return Err(Error::InvalidInput("basis does not span a saturated sublattice".into()));
        }
        let p = |x: &MukaiVector, y: &MukaiVector| mukai_pairing(x, y, lattice);
        let gram2 = [
            [p(&basis[0], &basis[0])?, p(&basis[0], &basis[1])?],
            [p(&basis[1], &basis[0])?, p(&basis[1], &basis[1])?],
        ];
        Ok(Self { basis, gram2 })
    }

    /// An abstract rank-2 lattice `Z^2` with the given form; basis vectors
    /// are the two-coordinate unit vectors.
    pub fn from_gram(gram2: [[Integer; 2]; 2]) -> Result<Self> {
        BinaryForm::from_gram(&gram2)?;
        let basis = [
            MukaiVector::new(int(1), vec![], int(0)),
            MukaiVector::new(int(0), vec![], int(1)),
        ];
        Ok(Self { basis, gram2 })
    }

    pub fn from_gram_i64(g: [[i64; 2]; 2]) -> Result<Self> {
        Self::from_gram([[int(g[0][0]), int(g[0][1])], [int(g[1][0]), int(g[1][1])]])
    }

    pub fn basis(&self) -> &[MukaiVector; 2] {
        &self.basis
    }

    pub fn gram2(&self) -> &[[Integer; 2]; 2] {
        &self.gram2
    }

    pub fn form(&self) -> BinaryForm {
        BinaryForm::from_gram(&self.gram2).expect("symmetric by construction")
    }

    pub fn det(&self) -> Integer {
        self.form().det()
    }

    pub fn vector(&self, x: &[Integer; 2]) -> MukaiVector {
        combine(x, &self.basis)
    }

    /// Integer coordinates of `v` in the basis, or `None` when `v` is not in the lattice.
    pub fn coords_of(&self, v: &MukaiVector) -> Option<[Integer; 2]> {
        let e0 = self.basis[0].coords();
        let e1 = self.basis[1].coords();
        let x = v.coords();
        if x.len() != e0.len() {
            return None;
        }
        // pick a nonzero 2x2 minor and solve by Cramer's rule
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                let det = &e0[i] * &e1[j] - &e0[j] * &e1[i];
                if det.is_zero() {
                    continue;
                }
                let na = &x[i] * &e1[j] - &x[j] * &e1[i];
                let nb = &e0[i] * &x[j] - &e0[j] * &x[i];
                if !na.is_multiple_of(&det) || !nb.is_multiple_of(&det) {
                    return None;
                }
                let c = [na / &det, nb / &det];
                return (self.vector(&c) == *v).then_some(c);
            }
        }
        None
    }
}

/// gcd of the 2x2 minors of the matrix with rows `v`, `w`.
pub fn minor_content(v: &MukaiVector, w: &MukaiVector) -> Integer {
    let a = v.coords();
    let b = w.coords();
    let mut minors = Vec::new();
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            minors.push(&a[i] * &b[j] - &a[j] * &b[i]);
        }
    }
    gcd_all(&minors)
}

/// Saturation of `span(v, w)`.
///
/// Basis convention: the first vector is `v / content(v)`; the second `u`
/// completes it to a basis and is reduced modulo `v'` so that its coordinate
/// at the first nonzero position `p` of `v'` lies in `[0, |v'_p|)`. Of the two
/// such choices `u`, `-u` (after reduction) the one with positive first
/// nonzero coordinate wins, then the smaller one. The basis depends only on
/// the plane, not on `w`.
pub fn saturate_rank2(v: &MukaiVector, w: &MukaiVector, lattice: &NsLattice) -> Result<Rank2Lattice> {
    lattice.check_len(v.c.len())?;
    lattice.check_len(w.c.len())?;
    if v.is_proportional(w) {
        return Err(Error::Proportional);
    }
    let (s0, s1) = saturated_basis(v, w);
    let vp = v.coords();
    let g = gcd_all(&vp);
    let vp: Vec<Integer> = vp.iter().map(|x| x / &g).collect();
    let vp = MukaiVector::from_coords(&vp)?;

    let sat = Rank2Lattice {
        basis: [s0, s1],
        gram2: [[int(0), int(0)], [int(0), int(0)]],
    };
    let [a, b] = sat.coords_of(&vp).expect("v lies in its saturation");
    // a d - b c = 1
    let (gg, x, y) = ext_gcd(&a, &b);
    debug_assert!(gg.is_one());
    let (c, d) = (-y, x);
    let u = combine(&[c, d], &sat.basis);
    let vc = vp.coords();
    let p = vc.iter().position(|x| !x.is_zero()).expect("v nonzero");
    let reduce = |u: MukaiVector| {
        let q = u.coords()[p].div_floor(&vc[p].abs());
        let shift = if vc[p].is_negative() { -q } else { q };
        u.sub(&vp.scale(&shift))
    };
    let mut options = [reduce(u.clone()), reduce(u.neg())];
    let key = |x: &MukaiVector| {
        let c = x.coords();
        let negative = c.iter().find(|a| !a.is_zero()).is_some_and(|a| a.is_negative());
        (negative, c)
    };
    options.sort_by(|a, b| {
        let (na, ca) = key(a);
        let (nb, cb) = key(b);
        na.cmp(&nb).then_with(|| small_first(&ca, &cb))
    });
    let [u, _] = options;
    Rank2Lattice::from_basis([vp, u], lattice)
}

/// Some basis of `(Q v + Q w) ∩ Z^n`, via unimodular column reduction of the
/// matrix with rows `v`, `w`.
fn saturated_basis(v: &MukaiVector, w: &MukaiVector) -> (MukaiVector, MukaiVector) {
    let mut m = [v.coords(), w.coords()];
    let n = m[0].len();
    // rows of `inv` track U^{-1}, where m_current = m_original U
    let mut inv: Vec<Vec<Integer>> = (0..n)
        .map(|i| (0..n).map(|j| int((i == j) as i64)).collect())
        .collect();
    for row in 0..2 {
        let start = row;
        loop {
            let nz: Vec<usize> = (start..n).filter(|&j| !m[row][j].is_zero()).collect();
            if nz.len() <= 1 {
                if let Some(&j) = nz.first() {
                    if j != start {
                        for r in m.iter_mut() {
                            r.swap(j, start);
                        }
                        inv.swap(j, start);
                    }
                }
                break;
            }
            let piv = *nz
                .iter()
                .min_by(|&&i, &&j| m[row][i].abs().cmp(&m[row][j].abs()))
                .expect("nonempty");
            for &j in &nz {
                if j == piv {
                    continue;
                }
                let q = m[row][j].div_floor(&m[row][piv]);
                // column j -= q column piv  <=>  inv row piv += q inv row j
                for r in m.iter_mut() {
                    let t = &r[piv] * &q;
                    r[j] -= t;
                }
                let rowj = inv[j].clone();
                for (x, y) in inv[piv].iter_mut().zip(&rowj) {
                    *x += &q * y;
                }
            }
        }
    }
    let mk = |r: &Vec<Integer>| MukaiVector::from_coords(r).expect("length >= 2");
    (mk(&inv[0]), mk(&inv[1]))
}

pub fn is_hyperbolic(h: &Rank2Lattice) -> bool {
    h.det().is_negative()
}

/// Roots `delta` of `h` with `|(delta, v)| <= pairing_bound`.
pub fn rank2_roots(h: &Rank2Lattice, v: &MukaiVector, pairing_bound: &Integer) -> Result<Vec<MukaiVector>> {
    if pairing_bound.is_negative() {
        return Err(Error::InvalidInput("pairing bound must be nonnegative".into()));
    }
    let vc = h
        .coords_of(v)
        .ok_or_else(|| Error::InvalidInput(format!("{v} does not lie in the rank-2 lattice")))?;
    Ok(h.form()
        .roots(&vc, pairing_bound)?
        .iter()
        .map(|x| h.vector(x))
        .collect())
}

/// Primitive isotropic rays of `h` (empty means none).
pub fn rank2_isotropic(h: &Rank2Lattice) -> Result<Vec<MukaiVector>> {
    Ok(h.form()
        .isotropic_rays()?
        .iter()
        .map(|x| h.vector(x))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> NsLattice {
        NsLattice::rank_one(2, true).unwrap()
    }

    fn mv(r: i64, c: i64, s: i64) -> MukaiVector {
        MukaiVector::from_i64(r, &[c], s)
    }

    fn gram_i64(h: &Rank2Lattice) -> [[i64; 2]; 2] {
        let g = h.gram2();
        let f = |x: &Integer| i64::try_from(x).unwrap();
        [[f(&g[0][0]), f(&g[0][1])], [f(&g[1][0]), f(&g[1][1])]]
    }

    #[test]
    fn saturation_examples() {
        let h = saturate_rank2(&mv(2, 0, 0), &mv(0, 0, 2), &k3()).unwrap();
        assert_eq!(h.basis(), &[mv(1, 0, 0), mv(0, 0, 1)]);
        assert_eq!(gram_i64(&h), [[0, -1], [-1, 0]]);

        let h = saturate_rank2(&mv(1, 0, -1), &mv(0, 0, 1), &k3()).unwrap();
        assert_eq!(gram_i64(&h), [[2, -1], [-1, 0]]);

        assert!(matches!(
            saturate_rank2(&mv(1, 1, 1), &mv(-2, -2, -2), &k3()),
            Err(Error::Proportional)
        ));
    }

    #[test]
    fn saturation_finds_hidden_vectors() {
        // span of (1,1,0) and (1,-1,0) has index 2; (1,0,0) is in the saturation
        let h = saturate_rank2(&mv(1, 1, 0), &mv(1, -1, 0), &k3()).unwrap();
        assert!(h.coords_of(&mv(1, 0, 0)).is_some());
        assert!(h.coords_of(&mv(1, 1, 0)).is_some());
        assert!(h.coords_of(&mv(0, 0, 1)).is_none());
    }

    #[test]
    fn hyperbolicity() {
        let h = |g| is_hyperbolic(&Rank2Lattice::from_gram_i64(g).unwrap());
        assert!(h([[2, 0], [0, -2]]));
        assert!(!h([[-2, 0], [0, -2]]));
        assert!(h([[2, -1], [-1, 0]]));
    }

    #[test]
    fn root_examples() {
        let h = Rank2Lattice::from_gram_i64([[-2, 0], [0, -2]]).unwrap();
        let v = h.vector(&[int(1), int(1)]);
        let roots: Vec<_> = rank2_roots(&h, &v, &int(10))
            .unwrap()
            .into_iter()
            .map(|x| x.coords())
            .collect();
        assert_eq!(
            roots,
            vec![
                vec![int(-1), int(0)],
                vec![int(0), int(-1)],
                vec![int(0), int(1)],
                vec![int(1), int(0)]
            ]
        );
        let h = Rank2Lattice::from_gram_i64([[2, 0], [0, 2]]).unwrap();
        assert!(rank2_roots(&h, &h.vector(&[int(1), int(0)]), &int(10)).unwrap().is_empty());
    }

    #[test]
    fn isotropic_examples() {
        let rays = |g| {
            let h = Rank2Lattice::from_gram_i64(g).unwrap();
            rank2_isotropic(&h)
                .unwrap()
                .into_iter()
                .map(|x| x.coords())
                .collect::<Vec<_>>()
        };
        assert_eq!(rays([[2, 0], [0, -2]]), vec![vec![int(1), int(-1)], vec![int(1), int(1)]]);
        assert!(rays([[2, 1], [1, -2]]).is_empty());
        assert_eq!(rays([[0, -1], [-1, 0]]), vec![vec![int(0), int(1)], vec![int(1), int(0)]]);
    }
}
