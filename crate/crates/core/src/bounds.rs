//! Organizer revenue across the equilibrium set.
//!
//! Upper bounds come from explicit constructions on the efficient order.
//! The VCG lower bound is an exact minimum over every equilibrium, computed
//! by a dynamic program over the near-sorted orders; the GSP lower bound has
//! no known polynomial algorithm and is delegated to the oracle.

use crate::equilibrium::{
    max_equilibrium_bids_gsp, max_equilibrium_bids_vcg, revenue_max_order, vcg_envelope,
    EquilibriumProfile,
};
use crate::error::{Error, Result};
use crate::mechanisms::{outcome_with_order, BidProfile, MechanismKind};
use crate::model::{smith_order, total_weighted_waiting, Instance, QueueOrder};
use crate::numeric::Scalar;
use crate::oracle::{oracle_revenue_extremes, OracleLimits};

/// A revenue value together with an equilibrium that attains it.
#[derive(Debug, Clone, PartialEq)]
pub struct RevenueBound<T> {
    pub revenue: T,
    pub witness: EquilibriumProfile<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowerMethod {
    DynamicProgram,
    Oracle,
}

impl LowerMethod {
    pub fn name(self) -> &'static str {
        match self {
            LowerMethod::DynamicProgram => "dp",
            LowerMethod::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RevenueBounds<T> {
    pub mechanism: MechanismKind,
    pub lower: RevenueBound<T>,
    pub upper: RevenueBound<T>,
    /// `sum_{i<j} t[i] t[j] v[j]` on the efficient order: the same pair sum
    /// as `upper` but weighting each pair by the later participant's own
    /// value rate instead of its predecessor's. Reported next to `upper`
    /// because the two are easily confused; it equals the optimal total
    /// waiting cost and is generally smaller than `upper`.
    pub own_rate_sum: T,
    pub lower_method: LowerMethod,
}

fn witness_revenue<T: Scalar>(inst: &Instance<T>, witness: &EquilibriumProfile<T>) -> T {
    outcome_with_order(inst, &witness.profile, &witness.order)
        .expect("constructed witness is consistent")
        .revenue
}

fn bound_from<T: Scalar>(inst: &Instance<T>, witness: EquilibriumProfile<T>) -> RevenueBound<T> {
    RevenueBound { revenue: witness_revenue(inst, &witness), witness }
}

/// Largest VCG equilibrium revenue over efficient orders:
/// `sum_{i<j} t[i] t[j] v[j-1]` along the order of [`revenue_max_order`].
pub fn vcg_revenue_upper<T: Scalar>(inst: &Instance<T>) -> RevenueBound<T> {
    bound_from(inst, max_equilibrium_bids_vcg(inst))
}

/// Largest GSP equilibrium revenue over efficient orders. Coincides with
/// [`vcg_revenue_upper`].
pub fn gsp_revenue_upper<T: Scalar>(inst: &Instance<T>) -> RevenueBound<T> {
    bound_from(inst, max_equilibrium_bids_gsp(inst))
}

/// `sum_{i<j} t[i] t[j] v[j]` along the efficient order.
pub fn own_rate_sum<T: Scalar>(inst: &Instance<T>) -> T {
    total_weighted_waiting(inst, &revenue_max_order(inst)).expect("order matches instance")
}

struct Group<T> {
    members: Vec<usize>,
    rate: T,
    total: T,
    squares: T,
    /// Total service time of all earlier groups.
    before: T,
}

fn groups<T: Scalar>(inst: &Instance<T>) -> Vec<Group<T>> {
    let order = smith_order(inst);
    let mut out: Vec<Group<T>> = Vec::new();
    for &p in order.as_slice() {
        let v = inst.value_rate(p);
        let t = inst.t(p);
        match out.last_mut() {
            Some(g) if g.rate == v => {
                g.members.push(p);
                g.total = g.total.clone() + t.clone();
                g.squares = g.squares.clone() + t.clone() * t.clone();
            }
            _ => {
                let before = out.last().map_or_else(T::zero, |g| g.before.clone() + g.total.clone());
                out.push(Group { members: vec![p], rate: v, total: t.clone(), squares: t.clone() * t, before });
            }
        }
    }
    out
}

/// Back-pointer for one incoming state of a group: which element of the
/// previous group was swapped up into it (`from_slot`, 0 for none) and
/// which element closed the previous group (`last`).
#[derive(Clone, Copy)]
struct Back {
    from_slot: usize,
    last: Option<usize>,
}

fn relax<T: Scalar>(slot: &mut Option<(T, Back)>, cost: T, back: Back) {
    if slot.as_ref().is_none_or(|(c, _)| cost < *c) {
        *slot = Some((cost, back));
    }
}

/// Exact minimum VCG equilibrium revenue over every ordering.
///
/// Only near-sorted orders support a VCG equilibrium, and on a fixed order
/// the cheapest equilibrium sets each bid to the largest value rate behind
/// it, `b[p] = max(v[p+1], v[p+2])`. Revenue is then `sum_p t[p] S[p] b[p]`
/// with `S[p]` the service time ahead of position `p`.
///
/// A near-sorted order is the efficient sequence of equal-rate groups, each
/// group in any internal order, with optional disjoint swaps between the
/// last element of a group and the first element of the next. The program
/// walks the groups front to back. The state entering a group is the element
/// it lends to the previous group through a swap, if any. Inside a group the
/// remaining elements other than the closing one all see bid `rate`, so
/// their cost only depends on which two elements are pulled out; this makes
/// each group quadratic in its own size and the whole program `O(N^2)`
/// worst case, `O(N)` when all rates differ.
pub fn vcg_revenue_lower_dp<T: Scalar>(inst: &Instance<T>) -> RevenueBound<T> {
    let gs = groups(inst);
    let m = gs.len();
    let rate = |a: usize| gs.get(a).map_or_else(T::zero, |g| g.rate.clone());
    let t = |p: usize| inst.t(p);

    // incoming[a][s]: cheapest cost of groups < a when slot s of group a was
    // lent forward (s = 0: nothing lent, s = i + 1: member i).
    let mut incoming: Vec<Vec<Option<(T, Back)>>> = Vec::with_capacity(m + 1);
    let mut first = vec![None; gs[0].members.len() + 1];
    first[0] = Some((T::zero(), Back { from_slot: 0, last: None }));
    incoming.push(first);

    for a in 0..m {
        let g = &gs[a];
        let size = g.members.len();
        let after = g.before.clone() + g.total.clone();
        let mut close: Vec<Option<(T, usize)>> = vec![None; size];
        let mut lent_alone: Option<(T, usize)> = None;
        for (slot, state) in incoming[a].iter().enumerate() {
            let Some((base, _)) = state else { continue };
            let lent = slot.checked_sub(1);
            if lent.is_some() && size == 1 {
                if lent_alone.as_ref().is_none_or(|(c, _)| base < c) {
                    lent_alone = Some((base.clone(), slot));
                }
                continue;
            }
            let t_f = lent.map_or_else(T::zero, |i| t(g.members[i]));
            for (li, &l) in g.members.iter().enumerate() {
                if Some(li) == lent {
                    continue;
                }
                let t_l = t(l);
                let mid_total = g.total.clone() - t_f.clone() - t_l.clone();
                let mid_start = g.before.clone() + t_f.clone();
                let mid_squares =
                    g.squares.clone() - t_f.clone() * t_f.clone() - t_l.clone() * t_l.clone();
                let pairs = (mid_total.clone() * mid_total.clone() - mid_squares).half();
                let cost = base.clone() + g.rate.clone() * (mid_total * mid_start + pairs);
                if close[li].as_ref().is_none_or(|(c, _)| cost < *c) {
                    close[li] = Some((cost, slot));
                }
            }
        }

        let next_size = gs.get(a + 1).map_or(0, |h| h.members.len());
        let mut next: Vec<Option<(T, Back)>> = vec![None; next_size + 1];
        if let Some((cost, slot)) = lent_alone {
            relax(&mut next[0], cost, Back { from_slot: slot, last: None });
        }
        // bid faced by the closing element when it is swapped behind the
        // first element of the next group
        let swapped_bid = if next_size >= 2 { rate(a + 1) } else { rate(a + 2) };
        for (li, entry) in close.iter().enumerate() {
            let Some((cost, slot)) = entry else { continue };
            let l = g.members[li];
            let t_l = t(l);
            let ahead_l = after.clone() - t_l.clone();
            let back = Back { from_slot: *slot, last: Some(li) };
            let plain = cost.clone() + t_l.clone() * ahead_l.clone() * rate(a + 1);
            relax(&mut next[0], plain, back);
            if let Some(h) = gs.get(a + 1) {
                for (xi, &x) in h.members.iter().enumerate() {
                    let t_x = t(x);
                    let swap = cost.clone()
                        + t_x.clone() * ahead_l.clone() * g.rate.clone()
                        + t_l.clone() * (ahead_l.clone() + t_x) * swapped_bid.clone();
                    relax(&mut next[xi + 1], swap, back);
                }
            }
        }
        incoming.push(next);
    }

    let (best, _) = incoming[m][0].clone().expect("the efficient order is always reachable");

    // Walk the back-pointers from the end, emitting each group's block.
    let mut blocks: Vec<Vec<usize>> = Vec::with_capacity(m);
    let mut slot = 0;
    for a in (0..m).rev() {
        let (_, back) = incoming[a + 1][slot].clone().expect("reachable state");
        let g = &gs[a];
        let lent = back.from_slot.checked_sub(1);
        let mut block: Vec<usize> = g
            .members
            .iter()
            .enumerate()
            .filter(|&(i, _)| Some(i) != lent && Some(i) != back.last)
            .map(|(_, &p)| p)
            .collect();
        block.sort_unstable();
        if slot > 0 {
            block.push(gs[a + 1].members[slot - 1]);
        }
        if let Some(li) = back.last {
            block.push(g.members[li]);
        }
        blocks.push(block);
        slot = back.from_slot;
    }
    let order = QueueOrder::new(blocks.into_iter().rev().flatten().collect())
        .expect("blocks partition the participants");
    let env = vcg_envelope(inst, &order).expect("near-sorted order has an envelope");
    let mut bids = vec![T::zero(); inst.len()];
    for (pos, bid) in env.lower.into_iter().enumerate() {
        bids[order.participant_at(pos)] = bid;
    }
    let witness = EquilibriumProfile {
        order,
        profile: BidProfile::new(MechanismKind::Vcg, bids).expect("envelope bids are non-negative"),
    };
    let bound = bound_from(inst, witness);
    if T::EXACT {
        debug_assert!(bound.revenue == best, "dp value {best} != witness {}", bound.revenue);
    }
    bound
}

/// Lower and upper revenue bounds with witnesses.
///
/// The GSP lower bound is the oracle minimum over all equilibria and fails
/// with [`Error::OracleLimitExceeded`] when the instance is too large.
pub fn revenue_bounds<T: Scalar>(
    inst: &Instance<T>,
    kind: MechanismKind,
    limits: &OracleLimits,
) -> Result<RevenueBounds<T>> {
    let own = own_rate_sum(inst);
    match kind {
        MechanismKind::Vcg => Ok(RevenueBounds {
            mechanism: kind,
            lower: vcg_revenue_lower_dp(inst),
            upper: vcg_revenue_upper(inst),
            own_rate_sum: own,
            lower_method: LowerMethod::DynamicProgram,
        }),
        MechanismKind::Gsp => {
            if inst.len() > limits.equilibria {
                return Err(Error::OracleLimitExceeded { n: inst.len(), limit: limits.equilibria });
            }
            let extremes = oracle_revenue_extremes(inst, kind, 1, limits)?;
            let entry = extremes.overall.argmin;
            let profile = BidProfile::new(kind, entry.bids)?;
            Ok(RevenueBounds {
                mechanism: kind,
                lower: RevenueBound {
                    revenue: entry.revenue,
                    witness: EquilibriumProfile { order: entry.order, profile },
                },
                upper: gsp_revenue_upper(inst),
                own_rate_sum: own,
                lower_method: LowerMethod::Oracle,
            })
        }
    }
}
