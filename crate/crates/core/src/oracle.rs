//! Brute-force ground truth for small instances.
//!
//! Orderings are enumerated exhaustively. For each ordering the oracle
//! enumerates bid vectors from a finite grid that are non-increasing along
//! the ordering and keeps those that survive the deviation check of
//! [`is_equilibrium_with_order`]. The closed forms elsewhere in the crate are
//! tested against what this module finds.
//!
//! Grids. On a fixed ordering the equilibrium bids form a polytope cut out
//! by constraints that are linear in the bids, and revenue is linear and
//! non-decreasing in every bid, so both revenue extremes sit at vertices
//! whose coordinates are window endpoints.
//!
//! * VCG: every window endpoint is a value rate, zero, or unbounded, so the
//!   grid `{0} U {v_i} U {max v + 1}` is shared by all orderings and does not
//!   depend on any window derivation.
//! * GSP: endpoints are sums of `v * t` products. Each position gets its own
//!   two candidates, the componentwise minimum and maximum of the feasible
//!   bids on that ordering. The front bid has no maximum; its second
//!   candidate is one above the smallest front bid that still holds
//!   everyone else back when they all bid their maximum.
//!
//! Refinement `r` splits every gap between neighbouring candidates into
//! `2^(r-1)` equal parts, so grids of successive refinements are nested.
//! Interior points cannot move an extreme; they exist to catch mistakes in
//! the endpoint derivations.

use itertools::Itertools;
use rayon::prelude::*;

use crate::equilibrium::{gsp_envelope, gsp_front_floor, is_equilibrium_with_order};
use crate::error::{Error, Result};
use crate::mechanisms::{payments, MechanismKind};
use crate::model::{is_efficient, Instance, QueueOrder};
use crate::numeric::{max_of, Scalar};

/// Environment variable that raises (or lowers) the equilibrium cap.
pub const LIMIT_ENV: &str = "QUEUECTION_ORACLE_LIMIT";

/// Largest instance sizes the oracle accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    /// Cap for equilibrium enumeration.
    pub equilibria: usize,
    /// Cap for plain ordering search.
    pub orderings: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { equilibria: 5, orderings: 8 }
    }
}

impl OracleLimits {
    /// Defaults, with the equilibrium cap taken from [`LIMIT_ENV`] when set.
    /// The ordering cap never drops below its default.
    pub fn from_env() -> Self {
        let mut limits = OracleLimits::default();
        if let Some(n) = std::env::var(LIMIT_ENV).ok().and_then(|s| s.trim().parse().ok()) {
            limits.equilibria = n;
            limits.orderings = limits.orderings.max(n);
        }
        limits
    }
}

fn check_size(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::SizeLimitExceeded { n, limit });
    }
    Ok(())
}

fn all_orderings(n: usize) -> Vec<QueueOrder> {
    (0..n)
        .permutations(n)
        .map(|p| QueueOrder::new(p).expect("permutation"))
        .collect()
}

/// Exhaustive minimum of total weighted waiting; ties go to the
/// lexicographically smallest ordering.
///
/// Orderings are walked depth-first in lexicographic order, so the cost of a
/// shared prefix is computed once.
pub fn oracle_optimal_ordering<T: Scalar>(
    inst: &Instance<T>,
    limits: &OracleLimits,
) -> Result<(QueueOrder, T)> {
    let n = inst.len();
    check_size(n, limits.orderings)?;
    let mut search = OrderSearch {
        inst,
        prefix: Vec::with_capacity(n),
        used: vec![false; n],
        best: None,
    };
    search.descend(T::zero(), T::zero());
    let (order, cost) = search.best.expect("at least one ordering");
    Ok((QueueOrder::new(order)?, cost))
}

struct OrderSearch<'a, T> {
    inst: &'a Instance<T>,
    prefix: Vec<usize>,
    used: Vec<bool>,
    best: Option<(Vec<usize>, T)>,
}

impl<T: Scalar> OrderSearch<'_, T> {
    fn descend(&mut self, cost: T, elapsed: T) {
        let n = self.inst.len();
        if self.prefix.len() == n {
            if self.best.as_ref().is_none_or(|(_, c)| cost < *c) {
                self.best = Some((self.prefix.clone(), cost));
            }
            return;
        }
        for p in 0..n {
            if self.used[p] {
                continue;
            }
            self.used[p] = true;
            self.prefix.push(p);
            let next = cost.clone() + self.inst.w(p) * elapsed.clone();
            self.descend(next, elapsed.clone() + self.inst.t(p));
            self.prefix.pop();
            self.used[p] = false;
        }
    }
}

/// One equilibrium found by the oracle. `bids` is indexed by participant.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleEntry<T> {
    pub order: QueueOrder,
    pub bids: Vec<T>,
    pub revenue: T,
    /// Whether `order` is efficient (value rates non-increasing).
    pub efficient: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchMeta {
    pub kind: MechanismKind,
    pub n: usize,
    pub refinement: u32,
    pub grid: String,
    pub orderings: usize,
    /// Orderings that contributed at least one equilibrium.
    pub orderings_with_equilibria: usize,
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSet<T> {
    /// Ordered by ordering (lexicographic), then by enumeration order.
    pub entries: Vec<OracleEntry<T>>,
    pub meta: SearchMeta,
}

/// Split each gap of a sorted, deduplicated list into `2^(refinement-1)`
/// parts.
fn refine<T: Scalar>(points: Vec<T>, refinement: u32) -> Vec<T> {
    let parts = 1i64 << refinement.saturating_sub(1).min(20);
    let mut out = Vec::with_capacity(points.len() * parts as usize);
    for pair in points.windows(2) {
        let step = (pair[1].clone() - pair[0].clone()) / T::from_int(parts);
        for k in 0..parts {
            out.push(pair[0].clone() + step.clone() * T::from_int(k));
        }
    }
    out.extend(points.last().cloned());
    out
}

fn sorted_unique<T: Scalar>(mut values: Vec<T>) -> Vec<T> {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    values.dedup();
    values
}

/// Visit every non-increasing choice `c[0] >= c[1] >= ...` where position
/// `p` picks from the ascending list `choices[p]`.
fn for_each_non_increasing<T: Scalar>(choices: &[Vec<T>], mut visit: impl FnMut(&[T])) {
    fn rec<T: Scalar>(choices: &[Vec<T>], cur: &mut Vec<T>, visit: &mut dyn FnMut(&[T])) {
        let p = cur.len();
        if p == choices.len() {
            visit(cur);
            return;
        }
        for c in &choices[p] {
            if cur.last().is_some_and(|prev| c > prev) {
                break;
            }
            cur.push(c.clone());
            rec(choices, cur, visit);
            cur.pop();
        }
    }
    rec(choices, &mut Vec::with_capacity(choices.len()), &mut visit);
}

struct OrderingResult<T> {
    entries: Vec<OracleEntry<T>>,
    candidates: usize,
}

/// Relative tolerance of the float pre-filter. Far above rounding error, so
/// a candidate it rejects has a strictly profitable deviation.
const SHADOW_TOLERANCE: f64 = 1e-7;

fn search_ordering<T: Scalar>(
    inst: &Instance<T>,
    shadow: Option<&Instance<f64>>,
    kind: MechanismKind,
    order: &QueueOrder,
    choices: &[Vec<T>],
    tol: &T,
) -> OrderingResult<T> {
    let efficient = is_efficient(inst, order);
    let mut entries = Vec::new();
    let mut candidates = 0;
    let mut bids = vec![T::zero(); inst.len()];
    let mut fast = vec![0.0; inst.len()];
    for_each_non_increasing(choices, |by_position| {
        candidates += 1;
        for (pos, b) in by_position.iter().enumerate() {
            bids[order.participant_at(pos)] = b.clone();
        }
        if let Some(shadow) = shadow {
            for (f, b) in fast.iter_mut().zip(&bids) {
                *f = b.to_f64();
            }
            if !is_equilibrium_with_order(kind, shadow, &fast, order, &SHADOW_TOLERANCE) {
                return;
            }
        }
        if is_equilibrium_with_order(kind, inst, &bids, order, tol) {
            let revenue = payments(kind, inst, &bids, order)
                .into_iter()
                .fold(T::zero(), |a, b| a + b);
            entries.push(OracleEntry { order: order.clone(), bids: bids.clone(), revenue, efficient });
        }
    });
    OrderingResult { entries, candidates }
}

fn gsp_choices<T: Scalar>(
    inst: &Instance<T>,
    order: &QueueOrder,
    refinement: u32,
    tol: &T,
) -> Option<Vec<Vec<T>>> {
    let env = gsp_envelope(inst, order, tol)?;
    let highest: Vec<T> = env.upper.iter().map(|u| u.clone().unwrap_or_else(T::zero)).collect();
    let behind = gsp_front_floor(inst, order, &highest);
    Some(
        env.lower
            .iter()
            .zip(&env.upper)
            .map(|(lo, hi)| {
                let hi = hi.clone().unwrap_or_else(|| max_of(lo.clone(), behind.clone()) + T::one());
                refine(sorted_unique(vec![lo.clone(), max_of(lo.clone(), hi)]), refinement)
            })
            .collect(),
    )
}

/// All equilibria on the grid described in the module docs.
pub fn enumerate_equilibria<T: Scalar>(
    inst: &Instance<T>,
    kind: MechanismKind,
    refinement: u32,
    limits: &OracleLimits,
) -> Result<EquilibriumSet<T>> {
    let n = inst.len();
    check_size(n, limits.equilibria)?;
    let refinement = refinement.max(1);
    let tol = T::default_tolerance();
    let orderings = all_orderings(n);
    // exact searches screen candidates in floating point first
    let shadow = if T::EXACT { Some(inst.map(|x| x.to_f64())?) } else { None };
    let shadow = shadow.as_ref();

    let (results, grid): (Vec<OrderingResult<T>>, String) = match kind {
        MechanismKind::Vcg => {
            let v = inst.value_rates();
            let top = v.iter().cloned().fold(T::zero(), max_of) + T::one();
            let mut base = v;
            base.push(T::zero());
            base.push(top);
            let grid = refine(sorted_unique(base), refinement);
            let choices = vec![grid.clone(); n];
            let results = orderings
                .par_iter()
                .map(|o| search_ordering(inst, shadow, kind, o, &choices, &tol))
                .collect();
            (results, format!("shared: {} values from {{0}} + value rates + {{max+1}}", grid.len()))
        }
        MechanismKind::Gsp => {
            let results = orderings
                .par_iter()
                .map(|o| match gsp_choices(inst, o, refinement, &tol) {
                    Some(choices) => search_ordering(inst, shadow, kind, o, &choices, &tol),
                    None => OrderingResult { entries: Vec::new(), candidates: 0 },
                })
                .collect();
            (results, "per position: feasible min and max bid".to_owned())
        }
    };

    let orderings_with_equilibria = results.iter().filter(|r| !r.entries.is_empty()).count();
    let candidates = results.iter().map(|r| r.candidates).sum();
    let entries: Vec<OracleEntry<T>> = results.into_iter().flat_map(|r| r.entries).collect();
    Ok(EquilibriumSet {
        entries,
        meta: SearchMeta {
            kind,
            n,
            refinement,
            grid,
            orderings: orderings.len(),
            orderings_with_equilibria,
            candidates,
        },
    })
}

/// Minimum and maximum revenue of a set of entries, each with the first
/// entry attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct RevenueExtremes<T> {
    pub min: T,
    pub max: T,
    pub argmin: OracleEntry<T>,
    pub argmax: OracleEntry<T>,
}

impl<T: Scalar> RevenueExtremes<T> {
    fn of<'a>(entries: impl IntoIterator<Item = &'a OracleEntry<T>>) -> Option<Self> {
        let mut it = entries.into_iter();
        let first = it.next()?;
        let (mut lo, mut hi) = (first, first);
        for e in it {
            if e.revenue < lo.revenue {
                lo = e;
            }
            if e.revenue > hi.revenue {
                hi = e;
            }
        }
        Some(RevenueExtremes {
            min: lo.revenue.clone(),
            max: hi.revenue.clone(),
            argmin: lo.clone(),
            argmax: hi.clone(),
        })
    }
}

/// Revenue extremes over all equilibria and over those on efficient orders.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleExtremes<T> {
    pub overall: RevenueExtremes<T>,
    pub efficient: RevenueExtremes<T>,
    pub meta: SearchMeta,
}

pub fn extremes_of<T: Scalar>(set: &EquilibriumSet<T>) -> Result<OracleExtremes<T>> {
    let missing = || Error::Internal("oracle found no equilibrium on an efficient order".into());
    Ok(OracleExtremes {
        overall: RevenueExtremes::of(&set.entries).ok_or_else(missing)?,
        efficient: RevenueExtremes::of(set.entries.iter().filter(|e| e.efficient))
            .ok_or_else(missing)?,
        meta: set.meta.clone(),
    })
}

pub fn oracle_revenue_extremes<T: Scalar>(
    inst: &Instance<T>,
    kind: MechanismKind,
    refinement: u32,
    limits: &OracleLimits,
) -> Result<OracleExtremes<T>> {
    extremes_of(&enumerate_equilibria(inst, kind, refinement, limits)?)
}
