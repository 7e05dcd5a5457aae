//! Allocation and payment rules of the two queue auctions.
//!
//! Both mechanisms rank participants by bid, highest first, and differ only
//! in what each participant pays:
//!
//! * VCG: a rate bid `b`; the participant at position `i` pays
//!   `t[i] * sum_{j > i} t[j] * b[j]`, the bid-valued delay it imposes on
//!   everyone behind it.
//! * GSP: a level bid `B`; the participant at position `i` pays
//!   `B[i + 1] * t[i]`, the next bid down times its own service time.
//!
//! The last participant pays nothing under either rule.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{waiting_costs, Instance, QueueOrder};
use crate::numeric::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MechanismKind {
    Vcg,
    Gsp,
}

impl MechanismKind {
    pub fn name(self) -> &'static str {
        match self {
            MechanismKind::Vcg => "vcg",
            MechanismKind::Gsp => "gsp",
        }
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One non-negative bid per participant, indexed by participant.
#[derive(Debug, Clone, PartialEq)]
pub struct BidProfile<T> {
    pub kind: MechanismKind,
    bids: Vec<T>,
}

impl<T: Scalar> BidProfile<T> {
    pub fn new(kind: MechanismKind, bids: Vec<T>) -> Result<Self> {
        for (i, b) in bids.iter().enumerate() {
            if !b.is_finite() {
                return Err(Error::NonFiniteBid(format!("#{i}")));
            }
            if *b < T::zero() {
                return Err(Error::NegativeBid(format!("#{i}")));
            }
        }
        Ok(BidProfile { kind, bids })
    }

    /// Build from `(id, bid)` pairs; every participant of `inst` must bid
    /// exactly once.
    pub fn from_ids<'a, I>(inst: &Instance<T>, kind: MechanismKind, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, T)>,
    {
        let mut bids: Vec<Option<T>> = vec![None; inst.len()];
        let mut got = 0;
        for (id, bid) in pairs {
            got += 1;
            let idx = inst.index_of(id)?;
            if !bid.is_finite() {
                return Err(Error::NonFiniteBid(id.to_owned()));
            }
            if bid < T::zero() {
                return Err(Error::NegativeBid(id.to_owned()));
            }
            bids[idx] = Some(bid);
        }
        let bids: Option<Vec<T>> = bids.into_iter().collect();
        match bids {
            Some(bids) if got == inst.len() => Ok(BidProfile { kind, bids }),
            _ => Err(Error::BidCountMismatch { expected: inst.len(), got }),
        }
    }

    pub fn bids(&self) -> &[T] {
        &self.bids
    }

    pub fn bid(&self, participant: usize) -> &T {
        &self.bids[participant]
    }

    pub fn len(&self) -> usize {
        self.bids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bids.is_empty()
    }

    /// Same profile with one participant's bid replaced.
    pub fn with_bid(&self, participant: usize, bid: T) -> Self {
        let mut bids = self.bids.clone();
        bids[participant] = bid;
        BidProfile { kind: self.kind, bids }
    }

    pub(crate) fn check_against(&self, inst: &Instance<T>, kind: MechanismKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::MechanismMismatch { expected: kind.name(), got: self.kind.name() });
        }
        if self.bids.len() != inst.len() {
            return Err(Error::BidCountMismatch { expected: inst.len(), got: self.bids.len() });
        }
        Ok(())
    }
}

/// Result of running a mechanism. Per-participant vectors are indexed by
/// participant, not by position.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<T> {
    pub kind: MechanismKind,
    pub order: QueueOrder,
    pub payments: Vec<T>,
    pub waiting_costs: Vec<T>,
    pub total_losses: Vec<T>,
    pub revenue: T,
}

/// Positions sorted by bid, highest first; ties go to the lower index.
pub fn rank_by_bids<T: Scalar>(bids: &[T]) -> QueueOrder {
    let mut order: Vec<usize> = (0..bids.len()).collect();
    order.sort_by(|&a, &b| {
        bids[b]
            .partial_cmp(&bids[a])
            .expect("validated bids are comparable")
            .then(a.cmp(&b))
    });
    QueueOrder::new(order).expect("sorted indices form a permutation")
}

/// Whether bids are non-increasing along `order`. Any such order is a valid
/// allocation; [`rank_by_bids`] is the canonical one.
pub fn is_consistent<T: Scalar>(bids: &[T], order: &QueueOrder) -> bool {
    order.len() == bids.len()
        && order
            .as_slice()
            .windows(2)
            .all(|p| bids[p[0]] >= bids[p[1]])
}

/// Payment of whoever stands at `position` of `order`.
pub fn payment_at<T: Scalar>(
    kind: MechanismKind,
    inst: &Instance<T>,
    bids: &[T],
    order: &QueueOrder,
    position: usize,
) -> T {
    let ord = order.as_slice();
    let payer = ord[position];
    match kind {
        MechanismKind::Vcg => {
            let behind = ord[position + 1..]
                .iter()
                .fold(T::zero(), |acc, &q| acc + inst.t(q) * bids[q].clone());
            inst.t(payer) * behind
        }
        MechanismKind::Gsp => match ord.get(position + 1) {
            Some(&next) => bids[next].clone() * inst.t(payer),
            None => T::zero(),
        },
    }
}

/// All payments for a fixed order, indexed by participant. Linear time.
pub fn payments<T: Scalar>(
    kind: MechanismKind,
    inst: &Instance<T>,
    bids: &[T],
    order: &QueueOrder,
) -> Vec<T> {
    let ord = order.as_slice();
    let mut out = vec![T::zero(); inst.len()];
    match kind {
        MechanismKind::Vcg => {
            let mut behind = T::zero();
            for &p in ord.iter().rev() {
                out[p] = inst.t(p) * behind.clone();
                behind = behind + inst.t(p) * bids[p].clone();
            }
        }
        MechanismKind::Gsp => {
            for pair in ord.windows(2) {
                out[pair[0]] = bids[pair[1]].clone() * inst.t(pair[0]);
            }
        }
    }
    out
}

/// Run a mechanism with an explicit allocation. `order` must be consistent
/// with the bids (see [`is_consistent`]).
pub fn outcome_with_order<T: Scalar>(
    inst: &Instance<T>,
    profile: &BidProfile<T>,
    order: &QueueOrder,
) -> Result<Outcome<T>> {
    profile.check_against(inst, profile.kind)?;
    if order.len() != inst.len() {
        return Err(Error::InvalidOrdering(inst.len()));
    }
    if !is_consistent(profile.bids(), order) {
        return Err(Error::InconsistentOrdering);
    }
    let payments = payments(profile.kind, inst, profile.bids(), order);
    let waiting_costs = waiting_costs(inst, order);
    let total_losses = waiting_costs
        .iter()
        .zip(&payments)
        .map(|(w, p)| w.clone() + p.clone())
        .collect();
    let revenue = payments.iter().fold(T::zero(), |a, p| a + p.clone());
    Ok(Outcome {
        kind: profile.kind,
        order: order.clone(),
        payments,
        waiting_costs,
        total_losses,
        revenue,
    })
}

/// Run whichever mechanism the profile is for, ranking by bids.
pub fn outcome<T: Scalar>(inst: &Instance<T>, profile: &BidProfile<T>) -> Result<Outcome<T>> {
    profile.check_against(inst, profile.kind)?;
    outcome_with_order(inst, profile, &rank_by_bids(profile.bids()))
}

pub fn vcg_outcome<T: Scalar>(inst: &Instance<T>, profile: &BidProfile<T>) -> Result<Outcome<T>> {
    profile.check_against(inst, MechanismKind::Vcg)?;
    outcome(inst, profile)
}

pub fn gsp_outcome<T: Scalar>(inst: &Instance<T>, profile: &BidProfile<T>) -> Result<Outcome<T>> {
    profile.check_against(inst, MechanismKind::Gsp)?;
    outcome(inst, profile)
}

/// Organizer profit of VCG written as a double sum over ordered pairs,
/// `sum_{i < j} t[i] t[j] b[j]`. Quadratic; used to cross-check [`payments`].
pub fn vcg_pairwise_revenue<T: Scalar>(inst: &Instance<T>, bids: &[T], order: &QueueOrder) -> T {
    let ord = order.as_slice();
    let mut total = T::zero();
    for i in 0..ord.len() {
        for j in i + 1..ord.len() {
            total = total + inst.t(ord[i]) * inst.t(ord[j]) * bids[ord[j]].clone();
        }
    }
    total
}

/// The normal-form game a mechanism induces on an instance.
///
/// Types are the participants' `(t, w)`, actions are non-negative bids,
/// alternatives are queue orders, the valuation of an alternative is minus
/// the participant's waiting cost, the outcome rule is [`rank_by_bids`] and
/// the payment rule is the mechanism's. Utility is valuation minus payment.
#[derive(Debug, Clone, Copy)]
pub struct GameDescription<'a, T> {
    pub instance: &'a Instance<T>,
    pub kind: MechanismKind,
}

impl<'a, T: Scalar> GameDescription<'a, T> {
    pub fn new(instance: &'a Instance<T>, kind: MechanismKind) -> Self {
        GameDescription { instance, kind }
    }

    pub fn type_space(&self) -> &'static str {
        "service time t > 0 and value of time w > 0"
    }

    pub fn action_space(&self) -> &'static str {
        match self.kind {
            MechanismKind::Vcg => "rate bid b >= 0 (money per time unit)",
            MechanismKind::Gsp => "level bid B >= 0 (money)",
        }
    }

    pub fn alternatives(&self) -> &'static str {
        "permutations of the participants (queue orders)"
    }

    pub fn outcome_rule(&self, profile: &BidProfile<T>) -> QueueOrder {
        rank_by_bids(profile.bids())
    }

    /// `V_i(type, alternative)`: minus the waiting cost under `order`.
    pub fn valuation(&self, participant: usize, order: &QueueOrder) -> T {
        -waiting_costs(self.instance, order)[participant].clone()
    }

    pub fn payment(&self, participant: usize, profile: &BidProfile<T>) -> T {
        let order = self.outcome_rule(profile);
        payments(self.kind, self.instance, profile.bids(), &order)[participant].clone()
    }

    /// `u_i = V_i - p_i`.
    pub fn utility(&self, participant: usize, profile: &BidProfile<T>) -> Result<T> {
        profile.check_against(self.instance, self.kind)?;
        if participant >= self.instance.len() {
            return Err(Error::UnknownParticipant(format!("#{participant}")));
        }
        let order = self.outcome_rule(profile);
        Ok(self.valuation(participant, &order) - self.payment(participant, profile))
    }
}

/// Utility of participant `id` in the induced game; always minus its total
/// loss.
pub fn induced_utility<T: Scalar>(
    game: &GameDescription<'_, T>,
    profile: &BidProfile<T>,
    id: &str,
) -> Result<T> {
    let idx = game.instance.index_of(id)?;
    game.utility(idx, profile)
}
