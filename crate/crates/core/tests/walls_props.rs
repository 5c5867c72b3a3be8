mod common;

use bridgeland_core::charge::{gl2_act_on_charge, LiftedGl2};
use bridgeland_core::num::{frac, rat, Rational};
use bridgeland_core::walls::{
    chambers_along_path, compare_with_oracle, nesting_check, sampling_oracle, scan_walls, wall_locus, Region,
    SliceParams, WallKind,
};
use bridgeland_core::NsLattice;
use common::*;
use num_traits::Zero;
use proptest::prelude::*;

fn k3_slice(degree: i64) -> SliceParams {
    SliceParams::new(NsLattice::rank_one(degree, true).unwrap(), vec![rat(0)], None).unwrap()
}

fn region() -> Region {
    Region::new(rat(-3), rat(0), frac(1, 10), rat(4)).unwrap()
}

proptest! {
    #[test]
    fn conic_is_the_imaginary_part(
        (l, vs) in lattice_with_vectors(2, 6),
        beta0 in rat_vec(2, 5, 3),
        b in rational(12, 5),
        t in positive_rational(12, 5),
    ) {
        let s = SliceParams::new(l.clone(), beta0[..l.rank()].to_vec(), None).unwrap();
        let (v, w) = (&vs[0], &vs[1]);
        let locus = wall_locus(v, w, &s).unwrap();
        let zv = s.charge_at(v, &b, &t).unwrap();
        let zw = s.charge_at(w, &b, &t).unwrap();
        prop_assert_eq!((&zw * &zv.conj()).im, &t * locus.conic.eval(&b, &t));
    }

    #[test]
    fn wall_depends_only_on_the_plane(
        (l, vs) in k3_lattice_with_vectors(2, 6),
        k in -4i64..=4,
    ) {
        let s = SliceParams::new(l.clone(), vec![rat(0); l.rank()], None).unwrap();
        let (v, w) = (&vs[0], &vs[1]);
        let base = wall_locus(v, w, &s).unwrap();
        let shifted = wall_locus(v, &w.add(&v.scale(&k.into())), &s).unwrap();
        let flipped = wall_locus(v, &v.sub(w), &s).unwrap();
        if !base.conic.is_zero() {
            prop_assert_eq!(base.conic.normalized(), shifted.conic.normalized());
            prop_assert_eq!(base.conic.normalized(), flipped.conic.normalized());
        }
        prop_assert_eq!(&base.kind, &shifted.kind);
        prop_assert_eq!(&base.kind, &flipped.kind);
    }

    #[test]
    fn realness_survives_gl2_action(
        vs in prop::collection::vec(mukai(1, 5), 2),
        b in rational(20, 7),
        t in positive_rational(20, 7),
        m in prop::array::uniform4(-5i64..=5),
        on_wall in any::<bool>(),
    ) {
        let s = k3_slice(2);
        let Ok(g) = LiftedGl2::new([[rat(m[0]), rat(m[1])], [rat(m[2]), rat(m[3])]], 0) else { return Ok(()); };
        // the vertical wall b = 0 of v = (1, 0, -1) and w = (0, 0, 1) when `on_wall`
        let (v, w, b) = if on_wall { (mv(1, 0, -1), mv(0, 0, 1), rat(0)) } else { (vs[0].clone(), vs[1].clone(), b) };
        let zv = s.charge_at(&v, &b, &t).unwrap();
        let zw = s.charge_at(&w, &b, &t).unwrap();
        prop_assume!(!zv.is_zero());
        let before = zw.ratio_is_real(&zv);
        let after = gl2_act_on_charge(&g, &zw).ratio_is_real(&gl2_act_on_charge(&g, &zv));
        prop_assert_eq!(before, after);
        if on_wall {
            prop_assert!(before);
        }
    }
}

#[test]
fn walls_for_fixed_v_are_nested() {
    for degree in [2, 4] {
        let s = k3_slice(degree);
        for v in [mv(1, 0, -1), mv(2, 1, 0), mv(1, 1, 0), mv(0, 1, 1), mv(3, 1, -1)] {
            let scan = scan_walls(&v, &s, &region(), 6).unwrap();
            let report = nesting_check(&scan.walls);
            assert!(report.violations.is_empty(), "v = {v}, degree {degree}: {:?}", report.violations);
        }
    }
}

#[test]
fn enlarging_the_bound_keeps_walls() {
    let s = k3_slice(2);
    let v = mv(1, 0, -1);
    let small = scan_walls(&v, &s, &region(), 6).unwrap();
    let large = scan_walls(&v, &s, &region(), 9).unwrap();
    for w in &small.walls {
        assert!(
            large.walls.iter().any(|x| x.locus.conic.normalized() == w.locus.conic.normalized()),
            "{} lost",
            w.id
        );
    }
    let closure = Region::new(rat(-4), rat(1), frac(1, 20), rat(5)).unwrap();
    let wide = scan_walls(&v, &s, &closure, 6).unwrap();
    for w in &small.walls {
        assert!(wide
            .walls
            .iter()
            .any(|x| x.locus.conic.normalized() == w.locus.conic.normalized()));
    }
}

#[test]
fn oracle_agrees_on_small_grids() {
    let s = k3_slice(2);
    let r = Region::new(rat(-2), rat(1), frac(1, 4), rat(3)).unwrap();
    for v in [mv(1, 0, -1), mv(0, 1, 1)] {
        let scan = scan_walls(&v, &s, &r, 4).unwrap();
        let oracle = sampling_oracle(&v, &s, &r, 150, 4).unwrap();
        let cmp = compare_with_oracle(&scan, &oracle);
        assert!(cmp.equal, "v = {v}: {cmp:?}");
    }
}

#[test]
fn chambers_are_sorted_and_wall_free() {
    let s = k3_slice(2);
    let v = mv(1, 0, -1);
    let scan = scan_walls(&v, &s, &region(), 8).unwrap();
    for b in [frac(-1, 1), frac(-5, 2), frac(-3, 10)] {
        let report = chambers_along_path(&b, &frac(1, 10), &rat(4), &scan.walls).unwrap();
        let ts: Vec<&Rational> = report.crossings.iter().map(|c| &c.t.t_squared).collect();
        assert!(ts.windows(2).all(|w| w[0] < w[1]));
        for c in &report.crossings {
            for id in &c.walls {
                let wall = scan.walls.iter().find(|w| &w.id == id).unwrap();
                let WallKind::Semicircle { center, radius_sq } = &wall.locus.kind else { panic!() };
                assert_eq!(&(&b - center) * &(&b - center) + &c.t.t_squared, *radius_sq);
            }
        }
        // no wall passes through a rational point strictly inside a chamber
        for ch in &report.chambers {
            let lo = ch.lower.t_squared.clone();
            let hi = ch.upper.t_squared.clone();
            let mid_sq = (&lo + &hi) / rat(2);
            for w in &scan.walls {
                let value = &w.locus.conic.a * (&b * &b + &mid_sq) + &w.locus.conic.b * &b + &w.locus.conic.d;
                assert!(!value.is_zero() || matches!(w.locus.kind, WallKind::VerticalLine { .. }));
            }
        }
        assert_eq!(report.chambers.last().unwrap().label.as_deref().is_some(), !scan.walls.iter().any(|w| match &w.locus.kind {
            WallKind::Semicircle { center, radius_sq } => radius_sq - (&b - center) * (&b - center) >= rat(16),
            _ => false,
        }));
    }
}

#[test]
fn region_requires_positive_t() {
    assert!(Region::new(rat(-1), rat(0), rat(0), rat(1)).is_err());
    assert!(Region::new(rat(-1), rat(0), rat(-1), rat(1)).is_err());
}
