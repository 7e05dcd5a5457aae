//! Best-response dynamics.
//!
//! One participant at a time replaces their bid by a best response to the
//! others. Nothing guarantees convergence; traces are recorded either way.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::equilibrium::is_equilibrium_with_order;
use crate::error::{Error, Result};
use crate::mechanisms::{payment_at, rank_by_bids, BidProfile};
use crate::model::Instance;
use crate::numeric::{le_tol, Scalar};

/// Where inside the interval of bids that reach a position a new bid goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Placement {
    /// Midpoint of the interval (one above the top bid for the front), so
    /// the mover never ties with anyone.
    #[default]
    Midpoint,
    /// The bid of the participant directly behind, which reaches the
    /// position whenever the index tie-break favours the mover.
    MinimalWinning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rotation {
    RoundRobin,
    Random(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse<T> {
    pub bid: T,
    /// Position the response leads to, 0-based.
    pub position: usize,
    pub loss: T,
    /// `false` when no position beats the current loss beyond tolerance,
    /// in which case `bid` is the current bid.
    pub changed: bool,
}

fn loss_of<T: Scalar>(inst: &Instance<T>, profile: &BidProfile<T>, participant: usize) -> (usize, T) {
    let order = rank_by_bids(profile.bids());
    let pos = order.positions()[participant];
    let ahead = order.as_slice()[..pos]
        .iter()
        .fold(T::zero(), |a, &q| a + inst.t(q));
    let loss = inst.w(participant) * ahead
        + payment_at(profile.kind, inst, profile.bids(), &order, pos);
    (pos, loss)
}

/// Candidate bids that place `participant` at each reachable position.
fn candidate_bids<T: Scalar>(
    profile: &BidProfile<T>,
    participant: usize,
    placement: Placement,
) -> Vec<T> {
    let mut others: Vec<T> = profile
        .bids()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != participant)
        .map(|(_, b)| b.clone())
        .collect();
    others.sort_by(|a, b| b.partial_cmp(a).expect("validated bids are comparable"));
    let mut midpoints = Vec::with_capacity(others.len() + 1);
    let mut floors = Vec::new();
    for j in 0..=others.len() {
        let lo = others.get(j).cloned().unwrap_or_else(T::zero);
        match j.checked_sub(1) {
            None => midpoints.push(lo.clone() + T::one()),
            Some(i) => midpoints.push((lo.clone() + others[i].clone()).half()),
        }
        floors.push(lo);
    }
    match placement {
        Placement::Midpoint => midpoints,
        // a floor bid may lose the tie and land one position lower, so the
        // midpoints stay in as fallbacks; earlier candidates win ties
        Placement::MinimalWinning => floors.into_iter().chain(midpoints).collect(),
    }
}

/// A loss-minimizing bid for `participant` against the other bids.
pub fn best_response<T: Scalar>(
    inst: &Instance<T>,
    profile: &BidProfile<T>,
    participant: usize,
    placement: Placement,
    tol: &T,
) -> Result<BestResponse<T>> {
    profile.check_against(inst, profile.kind)?;
    if participant >= inst.len() {
        return Err(Error::UnknownParticipant(format!("#{participant}")));
    }
    let (position, current) = loss_of(inst, profile, participant);
    let mut best = BestResponse {
        bid: profile.bid(participant).clone(),
        position,
        loss: current.clone(),
        changed: false,
    };
    for bid in candidate_bids(profile, participant, placement) {
        let trial = profile.with_bid(participant, bid.clone());
        let (pos, loss) = loss_of(inst, &trial, participant);
        if loss < best.loss && !le_tol(&current, &loss, tol) {
            best = BestResponse { bid, position: pos, loss, changed: true };
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step<T> {
    pub step: usize,
    pub mover: usize,
    pub old_bid: T,
    pub new_bid: T,
    pub revenue: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace<T> {
    pub steps: Vec<Step<T>>,
    /// No participant has an improving response and the final profile
    /// passes the deviation check.
    pub converged: bool,
    pub final_profile: BidProfile<T>,
}

fn revenue_of<T: Scalar>(inst: &Instance<T>, profile: &BidProfile<T>) -> T {
    let order = rank_by_bids(profile.bids());
    (0..inst.len()).fold(T::zero(), |a, pos| {
        a + payment_at(profile.kind, inst, profile.bids(), &order, pos)
    })
}

fn is_stable<T: Scalar>(
    inst: &Instance<T>,
    profile: &BidProfile<T>,
    placement: Placement,
    tol: &T,
) -> Result<bool> {
    for p in 0..inst.len() {
        if best_response(inst, profile, p, placement, tol)?.changed {
            return Ok(false);
        }
    }
    let order = rank_by_bids(profile.bids());
    Ok(is_equilibrium_with_order(profile.kind, inst, profile.bids(), &order, tol))
}

/// Apply best responses until the profile is stable or `max_steps` moves
/// have been made.
pub fn run_dynamics<T: Scalar>(
    inst: &Instance<T>,
    initial: &BidProfile<T>,
    max_steps: usize,
    rotation: Rotation,
    placement: Placement,
    tol: &T,
) -> Result<Trace<T>> {
    initial.check_against(inst, initial.kind)?;
    let n = inst.len();
    let mut rng = match rotation {
        Rotation::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        Rotation::RoundRobin => None,
    };
    let mut profile = initial.clone();
    let mut steps = Vec::new();
    let mut converged = is_stable(inst, &profile, placement, tol)?;
    let mut step = 0;
    while !converged && step < max_steps {
        let mover = match rng.as_mut() {
            Some(rng) => rng.random_range(0..n),
            None => step % n,
        };
        step += 1;
        let response = best_response(inst, &profile, mover, placement, tol)?;
        if !response.changed {
            continue;
        }
        let old_bid = profile.bid(mover).clone();
        profile = profile.with_bid(mover, response.bid.clone());
        steps.push(Step {
            step,
            mover,
            old_bid,
            new_bid: response.bid,
            revenue: revenue_of(inst, &profile),
        });
        converged = is_stable(inst, &profile, placement, tol)?;
    }
    Ok(Trace { steps, converged, final_profile: profile })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::is_nash_vcg;
    use crate::fixtures::{i1, i2, i3};
    use crate::mechanisms::MechanismKind;
    use crate::numeric::{exact_int, ratio, Exact};
    use num_traits::Zero;

    fn vcg(bids: Vec<Exact>) -> BidProfile<Exact> {
        BidProfile::new(MechanismKind::Vcg, bids).unwrap()
    }

    #[test]
    fn truthful_is_kept() {
        let profile = vcg(vec![exact_int(3), exact_int(2)]);
        let br = best_response(&i2(), &profile, 0, Placement::Midpoint, &Exact::zero()).unwrap();
        assert!(!br.changed);
        assert_eq!(br.bid, exact_int(3));
        let trace =
            run_dynamics(&i2(), &profile, 10, Rotation::RoundRobin, Placement::Midpoint, &Exact::zero())
                .unwrap();
        assert!(trace.converged);
        assert!(trace.steps.is_empty());
    }

    #[test]
    fn single_participant() {
        let profile = vcg(vec![exact_int(4)]);
        let br = best_response(&i1(), &profile, 0, Placement::Midpoint, &Exact::zero()).unwrap();
        assert!(!br.changed);
        let trace = run_dynamics(&i1(), &profile, 5, Rotation::Random(3), Placement::Midpoint, &Exact::zero())
            .unwrap();
        assert!(trace.converged);
    }

    #[test]
    fn low_bidder_moves_up() {
        let profile = vcg(vec![ratio(1, 10), exact_int(2)]);
        let br = best_response(&i2(), &profile, 0, Placement::Midpoint, &Exact::zero()).unwrap();
        assert!(br.changed);
        assert_eq!(br.position, 0);
        assert!(br.bid > exact_int(2));
    }

    #[test]
    fn zero_start_on_i3() {
        let profile = vcg(vec![Exact::zero(); 3]);
        let trace = run_dynamics(&i3(), &profile, 50, Rotation::RoundRobin, Placement::Midpoint, &Exact::zero())
            .unwrap();
        if trace.converged {
            assert!(is_nash_vcg(&i3(), &trace.final_profile, &Exact::zero()).unwrap().equilibrium);
        }
    }
}
