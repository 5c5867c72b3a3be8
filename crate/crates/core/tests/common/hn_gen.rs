//! Random finite presentations: thin representations of a random poset on
//! at most four simples. Objects are convex subsets, subobjects are the
//! down-sets of an object and quotients the complementary up-sets.

use bridgeland_core::charge::ChargeMap;
use bridgeland_core::hn::{CategoryPresentation, EdgeSpec, ObjectSpec};
use bridgeland_core::num::int;
use bridgeland_core::GaussianRational;
use rand::seq::SliceRandom;
use rand::Rng;

/// Classes `(r, d)` with `Z = -d + i r`.
pub fn slope_charge() -> ChargeMap {
    ChargeMap::new(vec![GaussianRational::from_ints(0, 1), GaussianRational::from_ints(-1, 0)])
}

fn is_convex(mask: u32, less: &[Vec<bool>]) -> bool {
    let n = less.len();
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let inside = |i: usize| mask >> i & 1 == 1;
                if inside(x) && inside(z) && less[x][y] && less[y][z] && !inside(y) {
                    return false;
                }
            }
        }
    }
    true
}

/// Down-sets of `mask` (within `mask`), excluding the empty set and `mask`.
fn proper_down_sets(mask: u32, less: &[Vec<bool>]) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = mask;
    loop {
        d = (d.wrapping_sub(1)) & mask;
        if d == 0 {
            break;
        }
        let closed = (0..less.len()).all(|y| {
            d >> y & 1 == 0 || (0..less.len()).all(|x| !(mask >> x & 1 == 1 && less[x][y]) || d >> x & 1 == 1)
        });
        if closed {
            out.push(d);
        }
    }
    out
}

fn id(mask: u32) -> String {
    format!("M{mask}")
}

/// A presentation with at most `max_objects` objects (zero included) and
/// simple classes drawn so that every charge has a valid phase. With
/// `single_ray` all simples share one ray.
pub fn random_presentation<R: Rng>(rng: &mut R, max_objects: usize, single_ray: bool) -> CategoryPresentation {
    loop {
        let n = rng.gen_range(1..=4usize);
        let mut less = vec![vec![false; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                less[i][j] = rng.gen_bool(0.5);
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if less[i][k] && less[k][j] {
                        less[i][j] = true;
                    }
                }
            }
        }
        let convex: Vec<u32> = (1..1u32 << n).filter(|&m| is_convex(m, &less)).collect();
        let mut objects: Vec<u32> = Vec::new();
        let seeds = rng.gen_range(1..=3);
        for _ in 0..seeds {
            let m = *convex.choose(rng).unwrap();
            if !objects.contains(&m) {
                objects.push(m);
            }
        }
        // close under subobjects and quotients
        let mut i = 0;
        while i < objects.len() {
            let m = objects[i];
            for d in proper_down_sets(m, &less) {
                for x in [d, m & !d] {
                    if !objects.contains(&x) {
                        objects.push(x);
                    }
                }
            }
            i += 1;
        }
        if objects.len() + 1 > max_objects {
            continue;
        }
        let classes: Vec<(i64, i64)> = (0..n)
            .map(|_| {
                if single_ray {
                    let k = rng.gen_range(1..=3);
                    (k, k)
                } else {
                    let r = rng.gen_range(0..=3);
                    let d = if r == 0 { rng.gen_range(1..=5) } else { rng.gen_range(-5..=5) };
                    (r, d)
                }
            })
            .collect();
        let class_of = |m: u32| {
            let (mut r, mut d) = (0, 0);
            for (k, c) in classes.iter().enumerate() {
                if m >> k & 1 == 1 {
                    r += c.0;
                    d += c.1;
                }
            }
            vec![int(r), int(d)]
        };
        let mut objs = vec![ObjectSpec {
            id: "0".into(),
            class: vec![int(0), int(0)],
        }];
        let mut edges = Vec::new();
        for &m in &objects {
            objs.push(ObjectSpec {
                id: id(m),
                class: class_of(m),
            });
            for d in proper_down_sets(m, &less) {
                edges.push(EdgeSpec {
                    sub: id(d),
                    ambient: id(m),
                    quotient: id(m & !d),
                });
            }
        }
        return CategoryPresentation {
            objects: objs,
            edges,
            zero: "0".into(),
        };
    }
}

/// The same presentation with objects and edges shuffled.
pub fn shuffled<R: Rng>(cat: &CategoryPresentation, rng: &mut R) -> CategoryPresentation {
    let mut c = cat.clone();
    c.objects.shuffle(rng);
    c.edges.shuffle(rng);
    c
}
