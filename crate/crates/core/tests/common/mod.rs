#![allow(dead_code)]

use std::collections::BTreeMap;

use engel_core::algebra::EngelConstants;
use engel_core::classify::{build_family, Family};
use rand::Rng;

/// Invariants of `family` with free parameters drawn from `[-2, 2]`
/// (`|T1| ∈ [0.5, 2]` for family V).
pub fn sample_family<R: Rng>(rng: &mut R, family: Family) -> EngelConstants {
    let params: BTreeMap<usize, f64> = family
        .free_params()
        .iter()
        .map(|&i| {
            let v = if family == Family::V && i == 1 {
                let m = rng.gen_range(0.5..2.0);
                if rng.gen_bool(0.5) {
                    m
                } else {
                    -m
                }
            } else {
                rng.gen_range(-2.0..2.0)
            };
            (i, v)
        })
        .collect();
    build_family(family, &params).expect("valid parameters")
}

pub fn random_valid_t<R: Rng>(rng: &mut R) -> EngelConstants {
    let family = Family::ALL[rng.gen_range(0..5)];
    sample_family(rng, family)
}

/// The structure equations written out in terms of
/// `A = T1 T4`, `B = T2 T5 − T3 T4`, `C = T1 T2 T4 / 2 − T3 T6`.
pub fn explicit_table(t: &EngelConstants) -> [[[f64; 4]; 4]; 4] {
    let [t1, t2, t3, t4, t5, t6] = t.0;
    let a = t1 * t4;
    let b = t2 * t5 - t3 * t4;
    let c = 0.5 * t1 * t2 * t4 - t3 * t6;
    let mut table = [[[0.0; 4]; 4]; 4];
    let mut set = |i: usize, j: usize, v: [f64; 4]| {
        table[i - 1][j - 1] = v;
        table[j - 1][i - 1] = v.map(|x| -x);
    };
    set(1, 2, [0.0, 0.0, 1.0, 0.0]);
    set(1, 3, [0.0, 0.0, 0.0, 1.0]);
    set(1, 4, [a / 2.0, t5, t3, t1]);
    set(2, 3, [t6, t4, t2, 0.0]);
    set(2, 4, [0.0, 0.0, t4, t2]);
    set(3, 4, [c, b, -a / 2.0, t4]);
    table
}
