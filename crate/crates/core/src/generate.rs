//! Seeded random instances.
//!
//! Generation produces [`Literal`]s so the same draw can be materialized in
//! either arithmetic. Exact draws are small integers or eighths, which keeps
//! ties between value rates common enough to exercise tie handling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, LogNormal};
use serde::{Deserialize, Serialize};

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::Result;
use crate::model::Instance;
use crate::numeric::{Literal, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    Uniform,
    Lognormal,
}

/// Whether generated parameters are exact literals or floats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Exact,
    Float,
}

/// Raw `(id, t, w)` triples; ids are `P1..Pn`.
pub fn generate(n: usize, seed: u64, dist: Distribution, precision: Precision) -> Vec<(String, Literal, Literal)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lognormal = LogNormal::new(0.0, 0.75).expect("valid parameters");
    let draw = |rng: &mut ChaCha8Rng, hi: u32| -> Literal {
        match (dist, precision) {
            (Distribution::Uniform, Precision::Exact) => {
                Literal::Integer(BigInt::from(rng.random_range(1..=hi)))
            }
            (Distribution::Uniform, Precision::Float) => {
                Literal::Float(rng.random_range(0.1..f64::from(hi)))
            }
            (Distribution::Lognormal, Precision::Exact) => {
                let x: f64 = lognormal.sample(rng);
                let eighths = (x * 8.0).round().max(1.0) as i64;
                Literal::Ratio(BigRational::new(BigInt::from(eighths), BigInt::from(8)))
            }
            (Distribution::Lognormal, Precision::Float) => Literal::Float(lognormal.sample(rng)),
        }
    };
    (1..=n)
        .map(|i| {
            let t = draw(&mut rng, 6);
            let w = draw(&mut rng, 12);
            (format!("P{i}"), t, w)
        })
        .collect()
}

pub fn random_instance<T: Scalar>(n: usize, seed: u64, dist: Distribution) -> Result<Instance<T>> {
    let precision = if T::EXACT { Precision::Exact } else { Precision::Float };
    let raw = generate(n, seed, dist, precision)
        .into_iter()
        .map(|(id, t, w)| Ok((id, T::from_literal(&t)?, T::from_literal(&w)?)))
        .collect::<Result<Vec<_>>>()?;
    Instance::new(raw)
}
