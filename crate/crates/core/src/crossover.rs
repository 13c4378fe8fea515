//! Order-based crossovers on row permutations.
//!
//! Every operator takes two permutations of `0..m` and returns two children
//! that are again permutations of `0..m`.

use rand::Rng;

use crate::genome::CrossoverKind;

pub type Children = (Vec<usize>, Vec<usize>);

/// Keeps `base[i]` wherever `keep[i]` is set and fills the other positions,
/// left to right, with the missing genes in the order they appear in `donor`.
fn order_fill(base: &[usize], keep: &[bool], donor: &[usize]) -> Vec<usize> {
    let mut used = vec![false; base.len()];
    for (&g, _) in base.iter().zip(keep).filter(|(_, &k)| k) {
        used[g] = true;
    }
    let mut fill = donor.iter().copied().filter(|&g| !used[g]);
    base.iter()
        .zip(keep)
        .map(|(&g, &k)| if k { g } else { fill.next().expect("donor holds every missing gene") })
        .collect()
}

/// One-point order crossover with the cut after position `k`.
///
/// The first child copies `p1[..k]` and takes the remaining genes in `p2`'s
/// order; the second child mirrors this.
pub fn one_point_at(p1: &[usize], p2: &[usize], k: usize) -> Children {
    let keep: Vec<bool> = (0..p1.len()).map(|i| i < k).collect();
    (order_fill(p1, &keep, p2), order_fill(p2, &keep, p1))
}

pub fn one_point<R: Rng + ?Sized>(p1: &[usize], p2: &[usize], rng: &mut R) -> Children {
    let m = p1.len();
    if m < 2 {
        return (p1.to_vec(), p2.to_vec());
    }
    one_point_at(p1, p2, rng.random_range(1..m))
}

/// Partially mapped crossover with the segment `start..end` copied from the
/// first parent (and, for the second child, from the second parent).
pub fn pmx_segment(p1: &[usize], p2: &[usize], start: usize, end: usize) -> Children {
    (pmx_child(p1, p2, start, end), pmx_child(p2, p1, start, end))
}

fn pmx_child(segment_parent: &[usize], other: &[usize], start: usize, end: usize) -> Vec<usize> {
    let m = segment_parent.len();
    let mut pos = vec![0; m];
    for (i, &g) in segment_parent.iter().enumerate() {
        pos[g] = i;
    }
    let in_segment = |g: usize| (start..end).contains(&pos[g]);
    let mut child = other.to_vec();
    child[start..end].copy_from_slice(&segment_parent[start..end]);
    for i in (0..start).chain(end..m) {
        let mut g = other[i];
        while in_segment(g) {
            g = other[pos[g]];
        }
        child[i] = g;
    }
    child
}

pub fn pmx<R: Rng + ?Sized>(p1: &[usize], p2: &[usize], rng: &mut R) -> Children {
    let m = p1.len();
    if m < 2 {
        return (p1.to_vec(), p2.to_vec());
    }
    let cuts = rand::seq::index::sample(rng, m + 1, 2);
    let (a, b) = (cuts.index(0), cuts.index(1));
    pmx_segment(p1, p2, a.min(b), a.max(b))
}

/// Permutation uniform-like crossover with an explicit mask.
///
/// The first child keeps `p1` at masked positions and fills the rest in
/// `p2`'s relative order; the second child applies the same mask to `p2`.
pub fn pux_with_mask(p1: &[usize], p2: &[usize], mask: &[bool]) -> Children {
    (order_fill(p1, mask, p2), order_fill(p2, mask, p1))
}

/// PUX with every position kept independently with probability `bias`.
pub fn pux<R: Rng + ?Sized>(p1: &[usize], p2: &[usize], bias: f64, rng: &mut R) -> Children {
    let mask: Vec<bool> = (0..p1.len()).map(|_| rng.random_bool(bias)).collect();
    pux_with_mask(p1, p2, &mask)
}

pub fn crossover<R: Rng + ?Sized>(
    kind: CrossoverKind,
    p1: &[usize],
    p2: &[usize],
    pux_bias: f64,
    rng: &mut R,
) -> Children {
    debug_assert_eq!(p1.len(), p2.len());
    match kind {
        CrossoverKind::OnePoint => one_point(p1, p2, rng),
        CrossoverKind::Pux => pux(p1, p2, pux_bias, rng),
        CrossoverKind::Pmx => pmx(p1, p2, rng),
    }
}
