#![allow(dead_code)]

use std::collections::BTreeSet;

use num_integer::Integer;
use proptest::prelude::*;

use orbimirror::stacky_fan::StackyFan;

/// Complete simplicial fan in the plane: rays sorted by angle, consecutive pairs as cones.
pub fn planar_fan(dirs: &[(i64, i64)], labels: &[i64]) -> Option<StackyFan> {
    let mut prim: Vec<(i64, i64)> = dirs
        .iter()
        .filter(|(x, y)| (*x, *y) != (0, 0))
        .map(|&(x, y)| {
            let g = x.gcd(&y);
            (x / g, y / g)
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if prim.len() < 3 {
        return None;
    }
    prim.sort_by(|a, b| (a.1 as f64).atan2(a.0 as f64).total_cmp(&(b.1 as f64).atan2(b.0 as f64)));
    let k = prim.len();
    if (0..k).any(|i| {
        let (a, b) = (prim[i], prim[(i + 1) % k]);
        a.0 * b.1 - a.1 * b.0 <= 0
    }) {
        return None;
    }
    let rays: Vec<Vec<i64>> = prim.iter().zip(labels.iter().cycle()).map(|(&(x, y), c)| vec![x * c, y * c]).collect();
    let ray_refs: Vec<&[i64]> = rays.iter().map(Vec::as_slice).collect();
    let cones: Vec<Vec<usize>> = (0..k).map(|i| vec![i, (i + 1) % k]).collect();
    let cone_refs: Vec<&[usize]> = cones.iter().map(Vec::as_slice).collect();
    Some(StackyFan::from_i64(2, &ray_refs, &cone_refs))
}

pub fn directions() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-3i64..=3, -3i64..=3), 3..7)
}

pub fn labels(max: i64) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(1i64..=max, 1..4)
}

pub fn p112() -> StackyFan {
    StackyFan::from_i64(2, &[&[1, 0], &[-1, 2], &[0, -1]], &[&[0, 1], &[1, 2], &[2, 0]])
}

pub fn f2() -> StackyFan {
    StackyFan::from_i64(2, &[&[1, 0], &[-1, 2], &[0, -1], &[0, 1]], &[&[0, 3], &[3, 1], &[1, 2], &[2, 0]])
}

pub fn p2() -> StackyFan {
    StackyFan::from_i64(2, &[&[1, 0], &[0, 1], &[-1, -1]], &[&[0, 1], &[1, 2], &[2, 0]])
}

pub fn p1_35() -> StackyFan {
    StackyFan::from_i64(1, &[&[3], &[-5]], &[&[0], &[1]])
}
