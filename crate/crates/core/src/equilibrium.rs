//! Nash-equilibrium verification for both queue auctions.
//!
//! Two independent routes are provided. The deviation route moves a
//! participant to every other position, evaluates the mechanism's payment
//! rule on the resulting queue and compares total losses. The window route
//! checks closed-form inequalities on bids and value rates. Both accept an
//! explicit allocation so that equilibria whose bids tie can be examined with
//! any tie order; the `*_vcg` / `*_gsp` wrappers use [`rank_by_bids`].
//!
//! Equilibrium is weak: a deviation that leaves the loss unchanged is not a
//! violation.

use std::fmt;

use crate::error::{Error, Result};
use crate::mechanisms::{is_consistent, payment_at, rank_by_bids, BidProfile, MechanismKind};
use crate::model::{smith_order, Instance, QueueOrder};
use crate::numeric::{le_tol, max_of, min_of, Scalar};

/// A profitable unilateral move found by deviation enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation<T> {
    pub participant: usize,
    pub from: usize,
    pub target: usize,
    pub gain: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport<T> {
    pub equilibrium: bool,
    /// Sorted by `(from, target)`.
    pub violations: Vec<Violation<T>>,
}

/// Which way the constraint guards: `Upper` rules out profitable moves
/// towards the front, `Lower` rules out profitable moves towards the back.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

/// A window constraint `lhs <= rhs` that does not hold.
#[derive(Debug, Clone, PartialEq)]
pub struct FailedConstraint<T> {
    pub kind: MechanismKind,
    /// Position of the participant whose incentive is violated.
    pub position: usize,
    /// Target position of the deviation the constraint guards (GSP only;
    /// VCG constraints only involve neighbours).
    pub target: Option<usize>,
    pub side: Side,
    pub lhs: T,
    pub rhs: T,
}

impl<T: Scalar> fmt::Display for FailedConstraint<T> {
    /// Positions are printed 1-based. VCG constraints are shown both in the
    /// neighbour-bid form and in the equivalent per-bid form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.position + 1;
        match (self.kind, self.side) {
            (MechanismKind::Vcg, Side::Lower) => write!(
                f,
                "b[{}] <= v[{k}] fails: {} > {} (per-bid form: b[{}] <= v[{k}])",
                k + 1,
                self.lhs,
                self.rhs,
                k + 1
            ),
            (MechanismKind::Vcg, Side::Upper) => write!(
                f,
                "v[{k}] <= b[{}] fails: {} > {} (per-bid form: v[{k}] <= b[{}])",
                k - 1,
                self.lhs,
                self.rhs,
                k - 1
            ),
            (MechanismKind::Gsp, side) => {
                let j = self.target.map_or(0, |j| j + 1);
                let dir = if side == Side::Upper { "up" } else { "down" };
                write!(f, "position {k} moving {dir} to {j}: {} > {}", self.lhs, self.rhs)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowReport<T> {
    pub satisfied: bool,
    pub failed_constraints: Vec<FailedConstraint<T>>,
}

impl<T> WindowReport<T> {
    fn from_failures(failed_constraints: Vec<FailedConstraint<T>>) -> Self {
        WindowReport { satisfied: failed_constraints.is_empty(), failed_constraints }
    }
}

/// A bid profile together with the allocation it is meant to induce.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumProfile<T> {
    pub order: QueueOrder,
    pub profile: BidProfile<T>,
}

fn prefix_times<T: Scalar>(inst: &Instance<T>, order: &QueueOrder) -> Vec<T> {
    let mut s = Vec::with_capacity(order.len() + 1);
    s.push(T::zero());
    for &p in order.as_slice() {
        let last = s.last().cloned().unwrap_or_else(T::zero);
        s.push(last + inst.t(p));
    }
    s
}

fn check_inputs<T: Scalar>(
    inst: &Instance<T>,
    profile: &BidProfile<T>,
    kind: MechanismKind,
    order: &QueueOrder,
) -> Result<()> {
    profile.check_against(inst, kind)?;
    if order.len() != inst.len() {
        return Err(Error::InvalidOrdering(inst.len()));
    }
    if !is_consistent(profile.bids(), order) {
        return Err(Error::InconsistentOrdering);
    }
    Ok(())
}

/// Total loss of whoever stands at `position` of `order`: waiting cost plus
/// the mechanism's payment, evaluated directly.
fn loss_at<T: Scalar>(
    kind: MechanismKind,
    inst: &Instance<T>,
    bids: &[T],
    order: &QueueOrder,
    position: usize,
) -> T {
    let ord = order.as_slice();
    let ahead = ord[..position].iter().fold(T::zero(), |a, &q| a + inst.t(q));
    inst.w(ord[position]) * ahead + payment_at(kind, inst, bids, order, position)
}

fn gain_unchecked<T: Scalar>(
    kind: MechanismKind,
    inst: &Instance<T>,
    bids: &[T],
    order: &QueueOrder,
    from: usize,
    to: usize,
) -> (T, T) {
    let current = loss_at(kind, inst, bids, order, from);
    if from == to {
        return (T::zero(), current);
    }
    let deviated = loss_at(kind, inst, bids, &order.moved(from, to), to);
    (current.clone() - deviated, current)
}

/// Loss reduction for the participant at position `from` if it rebids so as
/// to occupy position `to`, all other bids fixed. Positive means profitable.
pub fn deviation_gain_with_order<T: Scalar>(
    inst: &Instance<T>,
    profile: &BidProfile<T>,
    order: &QueueOrder,
    from: usize,
    to: usize,
) -> Result<T> {
    check_inputs(inst, profile, profile.kind, order)?;
    let n = inst.len();
    for position in [from, to] {
        if position >= n {
            return Err(Error::PositionOutOfRange { position, len: n });
        }
    }
    Ok(gain_unchecked(profile.kind, inst, profile.bids(), order, from, to).0)
}

pub fn vcg_deviation_gain<T: Scalar>(
    inst: &Instance<T>,
    profile: &BidProfile<T>,
    from: usize,
    to: usize,
) -> Result<T> {
    profile.check_against(inst, MechanismKind::Vcg)?;
    deviation_gain_with_order(inst, profile, &rank_by_bids(profile.bids()), from, to)
}

pub fn gsp_deviation_gain<T: Scalar>(
    inst: &Instance<T>,
    profile: &BidProfile<T>,
    from: usize,
    to: usize,
) -> Result<T> {
    profile.check_against(inst, MechanismKind::Gsp)?;
    deviation_gain_with_order(inst, profile, &rank_by_bids(profile.bids()), from, to)
}

/// Enumerate every `(from, to)` deviation.
pub fn deviation_report_with_order<T: Scalar>(
    inst: &Instance<T>,
    profile: &BidProfile<T>,
    order: &QueueOrder,
    tol: &T,
) -> Result<DeviationReport<T>> {
    check_inputs(inst, profile, profile.kind, order)?;
    let n = inst.len();
    let mut violations = Vec::new();
    for from in 0..n {
        for to in (0..n).filter(|&to| to != from) {
            let (gain, current) = gain_unchecked(profile.kind, inst, profile.bids(), order, from, to);
            let deviated = current.clone() - gain.clone();
            if !le_tol(&current, &deviated, tol) {
                violations.push(Violation {
                    participant: order.participant_at(from),
                    from,
                    target: to,
                    gain,
                });
            }
        }
    }
    Ok(DeviationReport { equilibrium: violations.is_empty(), violations })
}

/// Early-exit variant used by the oracle's inner loop.
pub fn is_equilibrium_with_order<T: Scalar>(
    kind: MechanismKind,
    inst: &Instance<T>,
    bids: &[T],
    order: &QueueOrder,
    tol: &T,
) -> bool {
    let n = inst.len();
    (0..n).all(|from| {
        (0..n).filter(|&to| to != from).all(|to| {
            let (gain, current) = gain_unchecked(kind, inst, bids, order, from, to);
            le_tol(&current, &(current.clone() - gain), tol)
        })
    })
}

pub fn is_nash_vcg<T: Scalar>(
    inst: &Instance<T>,
    profile: &BidProfile<T>,
    tol: &T,
) -> Result<DeviationReport<T>> {
    profile.check_against(inst, MechanismKind::Vcg)?;
    deviation_report_with_order(inst, profile, &rank_by_bids(profile.bids()), tol)
}

pub fn is_nash_gsp<T: Scalar>(
    inst: &Instance<T>,
    profile: &BidProfile<T>,
    tol: &T,
) -> Result<DeviationReport<T>> {
    profile.check_against(inst, MechanismKind::Gsp)?;
    deviation_report_with_order(inst, profile, &rank_by_bids(profile.bids()), tol)
}

/// VCG windows on the allocation `order`: for every position `k`,
/// `b[k+1] <= v[k] <= b[k-1]`, with `b[-1] = +inf` and `b[N] = 0`.
pub fn vcg_window_check_with_order<T: Scalar>(
    inst: &Instance<T>,
    profile: &BidProfile<T>,
    order: &QueueOrder,
    tol: &T,
) -> Result<WindowReport<T>> {
    check_inputs(inst, profile, MechanismKind::Vcg, order)?;
    let ord = order.as_slice();
    let bid = |pos: usize| profile.bid(ord[pos]).clone();
    let mut failed = Vec::new();
    for k in 0..ord.len() {
        let v = inst.value_rate(ord[k]);
        if k + 1 < ord.len() && !le_tol(&bid(k + 1), &v, tol) {
            failed.push(FailedConstraint {
                kind: MechanismKind::Vcg,
                position: k,
                target: None,
                side: Side::Lower,
                lhs: bid(k + 1),
                rhs: v.clone(),
            });
        }
        if k >= 1 && !le_tol(&v, &bid(k - 1), tol) {
            failed.push(FailedConstraint {
                kind: MechanismKind::Vcg,
                position: k,
                target: None,
                side: Side::Upper,
                lhs: v,
                rhs: bid(k - 1),
            });
        }
    }
    Ok(WindowReport::from_failures(failed))
}

pub fn vcg_window_check<T: Scalar>(
    inst: &Instance<T>,
    profile: &BidProfile<T>,
    tol: &T,
) -> Result<WindowReport<T>> {
    profile.check_against(inst, MechanismKind::Vcg)?;
    vcg_window_check_with_order(inst, profile, &rank_by_bids(profile.bids()), tol)
}

/// GSP pairwise conditions on the allocation `order`, with `B[N] = 0` and
/// `S` the prefix sums of service times:
///
/// * no move up, all `j < k`: `v[k] (S[k] - S[j]) <= B[j] - B[k+1]`;
/// * no move down, all `j > k`: `B[k+1] - B[j+1] <= v[k] (S[j+1] - S[k+1])`.
pub fn gsp_window_check_with_order<T: Scalar>(
    inst: &Instance<T>,
    profile: &BidProfile<T>,
    order: &QueueOrder,
    tol: &T,
) -> Result<WindowReport<T>> {
    check_inputs(inst, profile, MechanismKind::Gsp, order)?;
    let ord = order.as_slice();
    let n = ord.len();
    let s = prefix_times(inst, order);
    let level = |pos: usize| if pos < n { profile.bid(ord[pos]).clone() } else { T::zero() };
    let mut failed = Vec::new();
    for k in 0..n {
        let v = inst.value_rate(ord[k]);
        for j in 0..k {
            let lhs = v.clone() * (s[k].clone() - s[j].clone());
            let rhs = level(j) - level(k + 1);
            if !le_tol(&lhs, &rhs, tol) {
                failed.push(FailedConstraint {
                    kind: MechanismKind::Gsp,
                    position: k,
                    target: Some(j),
                    side: Side::Upper,
                    lhs,
                    rhs,
                });
            }
        }
        for j in k + 1..n {
            let lhs = level(k + 1) - level(j + 1);
            let rhs = v.clone() * (s[j + 1].clone() - s[k + 1].clone());
            if !le_tol(&lhs, &rhs, tol) {
                failed.push(FailedConstraint {
                    kind: MechanismKind::Gsp,
                    position: k,
                    target: Some(j),
                    side: Side::Lower,
                    lhs,
                    rhs,
                });
            }
        }
    }
    Ok(WindowReport::from_failures(failed))
}

pub fn gsp_window_check<T: Scalar>(
    inst: &Instance<T>,
    profile: &BidProfile<T>,
    tol: &T,
) -> Result<WindowReport<T>> {
    profile.check_against(inst, MechanismKind::Gsp)?;
    gsp_window_check_with_order(inst, profile, &rank_by_bids(profile.bids()), tol)
}

/// Window check for whichever mechanism the profile is for.
pub fn window_check_with_order<T: Scalar>(
    inst: &Instance<T>,
    profile: &BidProfile<T>,
    order: &QueueOrder,
    tol: &T,
) -> Result<WindowReport<T>> {
    match profile.kind {
        MechanismKind::Vcg => vcg_window_check_with_order(inst, profile, order, tol),
        MechanismKind::Gsp => gsp_window_check_with_order(inst, profile, order, tol),
    }
}

/// Componentwise bounds on equilibrium bids for a fixed allocation, indexed
/// by position. `upper[p] = None` means unbounded (only ever the front bid).
/// Revenue is non-decreasing in every bid, so `lower` and `upper` are the
/// revenue-minimizing and revenue-maximizing equilibria on this allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct BidEnvelope<T> {
    pub lower: Vec<T>,
    pub upper: Vec<Option<T>>,
}

/// VCG envelope: `lower[p] = max_{i > p} v[i]`, `upper[p] = min_{i < p} v[i]`.
/// `None` when no equilibrium induces `order`.
pub fn vcg_envelope<T: Scalar>(inst: &Instance<T>, order: &QueueOrder) -> Option<BidEnvelope<T>> {
    let v: Vec<T> = order.as_slice().iter().map(|&p| inst.value_rate(p)).collect();
    let n = v.len();
    let mut lower = vec![T::zero(); n];
    for p in (0..n.saturating_sub(1)).rev() {
        lower[p] = max_of(lower[p + 1].clone(), v[p + 1].clone());
    }
    let mut upper: Vec<Option<T>> = vec![None; n];
    for p in 1..n {
        let prev = upper[p - 1].clone();
        upper[p] = Some(match prev {
            Some(u) => min_of(u, v[p - 1].clone()),
            None => v[p - 1].clone(),
        });
    }
    let feasible = lower
        .iter()
        .zip(&upper)
        .all(|(lo, hi)| hi.as_ref().is_none_or(|hi| lo <= hi));
    feasible.then_some(BidEnvelope { lower, upper })
}

/// GSP envelope from the pairwise conditions of [`gsp_window_check`], which
/// are all difference constraints `x_a - x_b <= c` over the position bids and
/// the anchor `x_N = 0`. Shortest paths from the anchor give the upper
/// bounds and shortest paths into it the lower bounds.
pub fn gsp_envelope<T: Scalar>(
    inst: &Instance<T>,
    order: &QueueOrder,
    tol: &T,
) -> Option<BidEnvelope<T>> {
    let ord = order.as_slice();
    let n = ord.len();
    let anchor = n;
    let s = prefix_times(inst, order);
    let mut sys = DifferenceSystem::new(n + 1);
    for p in 0..n {
        // bids non-increasing down the queue, and x_{n-1} >= x_n = 0
        sys.add(p + 1, p, T::zero());
    }
    for k in 0..n {
        let v = inst.value_rate(ord[k]);
        for j in 0..k {
            sys.add(k + 1, j, -(v.clone() * (s[k].clone() - s[j].clone())));
        }
        for j in k + 1..n {
            sys.add(k + 1, j + 1, v.clone() * (s[j + 1].clone() - s[k + 1].clone()));
        }
    }
    let dist = sys.close(tol)?;
    let lower = (0..n)
        .map(|p| dist[p][anchor].clone().map_or_else(T::zero, |d| -d))
        .collect();
    let upper = (0..n).map(|p| dist[anchor][p].clone()).collect();
    Some(BidEnvelope { lower, upper })
}

pub fn envelope<T: Scalar>(
    kind: MechanismKind,
    inst: &Instance<T>,
    order: &QueueOrder,
    tol: &T,
) -> Option<BidEnvelope<T>> {
    match kind {
        MechanismKind::Vcg => vcg_envelope(inst, order),
        MechanismKind::Gsp => gsp_envelope(inst, order, tol),
    }
}

/// Constraints `x_a - x_b <= c`, closed with Floyd-Warshall.
struct DifferenceSystem<T> {
    dist: Vec<Vec<Option<T>>>,
}

impl<T: Scalar> DifferenceSystem<T> {
    fn new(nodes: usize) -> Self {
        let mut dist = vec![vec![None; nodes]; nodes];
        for (i, row) in dist.iter_mut().enumerate() {
            row[i] = Some(T::zero());
        }
        DifferenceSystem { dist }
    }

    fn add(&mut self, a: usize, b: usize, c: T) {
        let slot = &mut self.dist[b][a];
        if slot.as_ref().is_none_or(|old| c < *old) {
            *slot = Some(c);
        }
    }

    /// `None` if the system is infeasible (negative cycle).
    fn close(mut self, tol: &T) -> Option<Vec<Vec<Option<T>>>> {
        let n = self.dist.len();
        for k in 0..n {
            for i in 0..n {
                let Some(ik) = self.dist[i][k].clone() else { continue };
                for j in 0..n {
                    let Some(kj) = self.dist[k][j].clone() else { continue };
                    let via = ik.clone() + kj;
                    if self.dist[i][j].as_ref().is_none_or(|d| via < *d) {
                        self.dist[i][j] = Some(via);
                    }
                }
            }
        }
        let feasible = (0..n).all(|i| {
            self.dist[i][i]
                .as_ref()
                .is_none_or(|d| le_tol(&T::zero(), d, tol))
        });
        feasible.then_some(self.dist)
    }
}

/// Whether every inversion of value rates along `order` is between
/// neighbours: `v[i] >= v[j]` whenever `j > i + 1`.
pub fn near_sorted_check<T: Scalar>(inst: &Instance<T>, order: &QueueOrder) -> bool {
    let v: Vec<T> = order.as_slice().iter().map(|&p| inst.value_rate(p)).collect();
    // suffix maximum from position i + 2 onwards
    let n = v.len();
    let mut suffix_max: Option<T> = None;
    for i in (0..n).rev() {
        if i + 2 < n {
            let cand = v[i + 2].clone();
            suffix_max = Some(match suffix_max {
                Some(m) => max_of(m, cand),
                None => cand,
            });
        }
        if let Some(m) = &suffix_max {
            if v[i] < *m {
                return false;
            }
        }
    }
    true
}

/// Efficient order used for revenue maxima: value rate descending, then
/// service time descending, then index. Among efficient orders this one puts
/// the longest job first inside each group of equal value rates, which is
/// what maximizes the revenue of the top-of-window bids.
pub fn revenue_max_order<T: Scalar>(inst: &Instance<T>) -> QueueOrder {
    let v = inst.value_rates();
    let mut order: Vec<usize> = (0..inst.len()).collect();
    order.sort_by(|&a, &b| {
        v[b].partial_cmp(&v[a])
            .expect("validated values are comparable")
            .then_with(|| inst.t(b).partial_cmp(&inst.t(a)).expect("comparable"))
            .then(a.cmp(&b))
    });
    QueueOrder::new(order).expect("permutation")
}

fn profile_from_positions<T: Scalar>(
    kind: MechanismKind,
    order: &QueueOrder,
    by_position: Vec<T>,
) -> EquilibriumProfile<T> {
    let mut bids = vec![T::zero(); order.len()];
    for (pos, bid) in by_position.into_iter().enumerate() {
        bids[order.participant_at(pos)] = bid;
    }
    EquilibriumProfile {
        order: order.clone(),
        profile: BidProfile::new(kind, bids).expect("constructed bids are non-negative"),
    }
}

/// Highest VCG equilibrium bids on the efficient order: each bid equals the
/// value rate of the participant directly ahead; the front bid is that
/// participant's own value rate plus one.
pub fn max_equilibrium_bids_vcg<T: Scalar>(inst: &Instance<T>) -> EquilibriumProfile<T> {
    let order = revenue_max_order(inst);
    let v: Vec<T> = order.as_slice().iter().map(|&p| inst.value_rate(p)).collect();
    let bids = (0..v.len())
        .map(|k| if k == 0 { v[0].clone() + T::one() } else { v[k - 1].clone() })
        .collect();
    profile_from_positions(MechanismKind::Vcg, &order, bids)
}

/// Lowest VCG equilibrium bids on the efficient order: each bid equals the
/// value rate of the participant directly behind, the last bid is zero.
pub fn min_equilibrium_bids_vcg<T: Scalar>(inst: &Instance<T>) -> EquilibriumProfile<T> {
    let order = smith_order(inst);
    let v: Vec<T> = order.as_slice().iter().map(|&p| inst.value_rate(p)).collect();
    let bids = (0..v.len())
        .map(|k| v.get(k + 1).cloned().unwrap_or_else(T::zero))
        .collect();
    profile_from_positions(MechanismKind::Vcg, &order, bids)
}

/// Highest GSP equilibrium bids on the efficient order: the adjacent
/// no-move-down conditions held at equality and telescoped from the back,
/// `B[p] = sum_{i >= p} v[i-1] t[i]` for `p >= 1`. The front bid is one
/// above [`gsp_front_floor`].
pub fn max_equilibrium_bids_gsp<T: Scalar>(inst: &Instance<T>) -> EquilibriumProfile<T> {
    let order = revenue_max_order(inst);
    let ord = order.as_slice();
    let n = ord.len();
    let mut bids = vec![T::zero(); n];
    let mut acc = T::zero();
    for p in (1..n).rev() {
        acc = acc + inst.value_rate(ord[p - 1]) * inst.t(ord[p]);
        bids[p] = acc.clone();
    }
    bids[0] = gsp_front_floor(inst, &order, &bids) + T::one();
    profile_from_positions(MechanismKind::Gsp, &order, bids)
}

/// Smallest GSP front bid that keeps everyone else from jumping to the
/// front, given the bids at positions `1..` (`by_position[0]` is ignored):
/// `max(B[1], max_{k >= 1} B[k+1] + v[k] S[k])`.
pub fn gsp_front_floor<T: Scalar>(inst: &Instance<T>, order: &QueueOrder, by_position: &[T]) -> T {
    let ord = order.as_slice();
    let level = |p: usize| by_position.get(p).cloned().unwrap_or_else(T::zero);
    let mut floor = level(1);
    let mut ahead = inst.t(ord[0]);
    for (k, &p) in ord.iter().enumerate().skip(1) {
        let need = level(k + 1) + inst.value_rate(p) * ahead.clone();
        floor = max_of(floor, need);
        ahead = ahead + inst.t(p);
    }
    floor
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{i1, i2, i3};
    use crate::numeric::{exact_int, ratio, Exact};
    use num_traits::Zero;

    fn profile(kind: MechanismKind, bids: &[Exact]) -> BidProfile<Exact> {
        BidProfile::new(kind, bids.to_vec()).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<Exact> {
        v.iter().map(|&x| exact_int(x)).collect()
    }

    fn zero() -> Exact {
        Exact::zero()
    }

    #[test]
    fn vcg_gain_examples() {
        let truthful = profile(MechanismKind::Vcg, &ints(&[3, 2]));
        let inst = i2();
        assert_eq!(vcg_deviation_gain(&inst, &truthful, 1, 1).unwrap(), zero());
        assert_eq!(vcg_deviation_gain(&inst, &truthful, 1, 0).unwrap(), exact_int(-2));
        assert_eq!(vcg_deviation_gain(&inst, &truthful, 0, 1).unwrap(), exact_int(-2));
        assert_eq!(
            vcg_deviation_gain(&inst, &truthful, 0, 2).unwrap_err(),
            Error::PositionOutOfRange { position: 2, len: 2 }
        );
    }

    #[test]
    fn vcg_nash_examples() {
        let report = is_nash_vcg(&i2(), &profile(MechanismKind::Vcg, &ints(&[3, 2])), &zero()).unwrap();
        assert!(report.equilibrium);
        let off = profile(MechanismKind::Vcg, &[exact_int(3), ratio(7, 2), exact_int(2)]);
        let report = is_nash_vcg(&i3(), &off, &zero()).unwrap();
        assert!(!report.equilibrium);
        assert!(!report.violations.is_empty());
        assert!(is_nash_vcg(&i1(), &profile(MechanismKind::Vcg, &ints(&[7])), &zero()).unwrap().equilibrium);
    }

    #[test]
    fn vcg_window_examples() {
        let inst = i3();
        assert!(vcg_window_check(&inst, &profile(MechanismKind::Vcg, &ints(&[3, 2, 1])), &zero()).unwrap().satisfied);
        // every constraint holds, two of them at equality
        assert!(vcg_window_check(&inst, &profile(MechanismKind::Vcg, &ints(&[4, 3, 2])), &zero()).unwrap().satisfied);
        let off = profile(MechanismKind::Vcg, &[exact_int(3), ratio(7, 2), exact_int(2)]);
        let report = vcg_window_check(&inst, &off, &zero()).unwrap();
        assert!(!report.satisfied);
        assert_eq!(report.failed_constraints[0].position, 0);
        assert_eq!(report.failed_constraints[0].side, Side::Lower);
        assert!(vcg_window_check(&i1(), &profile(MechanismKind::Vcg, &ints(&[0])), &zero()).unwrap().satisfied);
    }

    #[test]
    fn gsp_gain_examples() {
        let inst = i2();
        let bids = profile(MechanismKind::Gsp, &ints(&[5, 2]));
        assert_eq!(gsp_deviation_gain(&inst, &bids, 1, 0).unwrap(), exact_int(-6));
        assert_eq!(gsp_deviation_gain(&inst, &bids, 0, 1).unwrap(), exact_int(-4));
        assert_eq!(gsp_deviation_gain(&inst, &bids, 0, 0).unwrap(), zero());
    }

    #[test]
    fn gsp_nash_examples() {
        let inst = i2();
        assert!(is_nash_gsp(&inst, &profile(MechanismKind::Gsp, &ints(&[5, 2])), &zero()).unwrap().equilibrium);
        assert!(is_nash_gsp(&inst, &profile(MechanismKind::Gsp, &ints(&[5, 4])), &zero()).unwrap().equilibrium);
        let cheap = profile(MechanismKind::Gsp, &[exact_int(1), ratio(1, 2)]);
        let report = is_nash_gsp(&inst, &cheap, &zero()).unwrap();
        assert!(!report.equilibrium);
        assert_eq!(report.violations[0].participant, 1);
        assert_eq!(report.violations[0].target, 0);
        assert_eq!(report.violations[0].gain, exact_int(2));
        assert!(is_nash_gsp(&i1(), &profile(MechanismKind::Gsp, &ints(&[1])), &zero()).unwrap().equilibrium);
    }

    #[test]
    fn gsp_window_examples() {
        assert!(gsp_window_check(&i2(), &profile(MechanismKind::Gsp, &ints(&[5, 2])), &zero()).unwrap().satisfied);
        assert!(gsp_window_check(&i3(), &profile(MechanismKind::Gsp, &ints(&[9, 8, 2])), &zero()).unwrap().satisfied);
        assert!(gsp_window_check(&i1(), &profile(MechanismKind::Gsp, &ints(&[3])), &zero()).unwrap().satisfied);
        let cheap = profile(MechanismKind::Gsp, &[exact_int(1), ratio(1, 2)]);
        assert!(!gsp_window_check(&i2(), &cheap, &zero()).unwrap().satisfied);
    }

    #[test]
    fn constructors() {
        let max = max_equilibrium_bids_vcg(&i3());
        assert_eq!(max.profile.bids(), &ints(&[4, 3, 2])[..]);
        let max = max_equilibrium_bids_vcg(&i2());
        assert_eq!(max.profile.bid(1), &exact_int(3));
        let min = min_equilibrium_bids_vcg(&i3());
        assert_eq!(min.profile.bids(), &ints(&[2, 1, 0])[..]);
        let min = min_equilibrium_bids_vcg(&i2());
        assert_eq!(min.profile.bids(), &ints(&[2, 0])[..]);
        let gsp = max_equilibrium_bids_gsp(&i3());
        assert_eq!(gsp.profile.bids(), &ints(&[9, 8, 2])[..]);
        let gsp = max_equilibrium_bids_gsp(&i2());
        assert_eq!(gsp.profile.bid(1), &exact_int(6));
        for inst in [i1(), i2(), i3()] {
            for eq in [
                max_equilibrium_bids_vcg(&inst),
                min_equilibrium_bids_vcg(&inst),
                max_equilibrium_bids_gsp(&inst),
            ] {
                let report = deviation_report_with_order(&inst, &eq.profile, &eq.order, &zero()).unwrap();
                assert!(report.equilibrium, "{eq:?}");
            }
        }
    }

    #[test]
    fn near_sorted_examples() {
        let inst = i3();
        assert!(near_sorted_check(&inst, &QueueOrder::new(vec![0, 1, 2]).unwrap()));
        assert!(near_sorted_check(&inst, &QueueOrder::new(vec![1, 0, 2]).unwrap()));
        assert!(!near_sorted_check(&inst, &QueueOrder::new(vec![1, 2, 0]).unwrap()));
        assert!(near_sorted_check(&i1(), &QueueOrder::identity(1)));
    }

    #[test]
    fn envelopes_on_i3() {
        let inst = i3();
        let sorted = QueueOrder::identity(3);
        let env = vcg_envelope(&inst, &sorted).unwrap();
        assert_eq!(env.lower, ints(&[2, 1, 0]));
        assert_eq!(env.upper, vec![None, Some(exact_int(3)), Some(exact_int(2))]);
        assert!(vcg_envelope(&inst, &QueueOrder::new(vec![1, 2, 0]).unwrap()).is_none());
        let env = gsp_envelope(&inst, &sorted, &zero()).unwrap();
        assert_eq!(env.upper[1], Some(exact_int(8)));
        assert_eq!(env.upper[2], Some(exact_int(2)));
        assert_eq!(env.upper[0], None);
    }

    #[test]
    fn explicit_order_must_be_consistent() {
        let bids = profile(MechanismKind::Vcg, &ints(&[3, 2, 1]));
        let order = QueueOrder::new(vec![1, 0, 2]).unwrap();
        assert_eq!(
            deviation_report_with_order(&i3(), &bids, &order, &zero()).unwrap_err(),
            Error::InconsistentOrdering
        );
        // ties may be split either way
        let tied = profile(MechanismKind::Vcg, &ints(&[2, 2, 1]));
        assert!(deviation_report_with_order(&i3(), &tied, &order, &zero()).is_ok());
    }
}
