//! The three small instances used throughout the docs and tests.

use crate::model::Instance;
use crate::numeric::{exact_int, Exact};

fn build(raw: &[(&str, i64, i64)]) -> Instance<Exact> {
    Instance::new(raw.iter().map(|&(id, t, w)| (id, exact_int(t), exact_int(w))))
        .expect("fixture is valid")
}

/// `{A: t=1, w=5}`.
pub fn i1() -> Instance<Exact> {
    build(&[("A", 1, 5)])
}

/// `{A: (1, 3), B: (2, 4)}`, value rates (3, 2).
pub fn i2() -> Instance<Exact> {
    build(&[("A", 1, 3), ("B", 2, 4)])
}

/// `{A: (1, 3), B: (2, 4), C: (1, 1)}`, value rates (3, 2, 1).
pub fn i3() -> Instance<Exact> {
    build(&[("A", 1, 3), ("B", 2, 4), ("C", 1, 1)])
}
