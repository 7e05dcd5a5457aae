//! Participants, instances, queue orderings and waiting-cost accounting.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::numeric::Scalar;

/// One queue participant: service time `t` and value of time `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct Participant<T> {
    pub id: String,
    pub t: T,
    pub w: T,
}

impl<T: Scalar> Participant<T> {
    /// `w / t`, the quantity that governs the efficient ordering.
    pub fn value_rate(&self) -> T {
        self.w.clone() / self.t.clone()
    }
}

/// A validated, non-empty set of participants. The index of a participant in
/// [`Instance::participants`] is its canonical index.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<T> {
    participants: Vec<Participant<T>>,
}

impl<T: Scalar> Instance<T> {
    /// Validate raw `(id, t, w)` triples. Indices are assigned in input order.
    pub fn new<I, S>(raw: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, T, T)>,
        S: Into<String>,
    {
        let mut participants = Vec::new();
        let mut seen = HashSet::new();
        for (id, t, w) in raw {
            let id = id.into();
            for (field, value) in [("t", &t), ("w", &w)] {
                if !value.is_finite() {
                    return Err(Error::NonFiniteParameter { id, field });
                }
                if *value <= T::zero() {
                    return Err(Error::NonPositiveParameter { id, field });
                }
            }
            if !seen.insert(id.clone()) {
                return Err(Error::DuplicateId(id));
            }
            participants.push(Participant { id, t, w });
        }
        if participants.is_empty() {
            return Err(Error::EmptyInstance);
        }
        Ok(Instance { participants })
    }

    pub fn participants(&self) -> &[Participant<T>] {
        &self.participants
    }

    pub fn participant(&self, index: usize) -> &Participant<T> {
        &self.participants[index]
    }

    pub fn len(&self) -> usize {
        self.participants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.participants.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.participants
            .iter()
            .position(|p| p.id == id)
            .ok_or_else(|| Error::UnknownParticipant(id.to_owned()))
    }

    pub fn t(&self, index: usize) -> T {
        self.participants[index].t.clone()
    }

    pub fn w(&self, index: usize) -> T {
        self.participants[index].w.clone()
    }

    pub fn value_rate(&self, index: usize) -> T {
        self.participants[index].value_rate()
    }

    pub fn value_rates(&self) -> Vec<T> {
        self.participants.iter().map(Participant::value_rate).collect()
    }

    /// Apply `f` to every parameter, e.g. to rescale or to switch arithmetic.
    pub fn map<U: Scalar>(&self, mut f: impl FnMut(&T) -> U) -> Result<Instance<U>> {
        Instance::new(
            self.participants
                .iter()
                .map(|p| (p.id.clone(), f(&p.t), f(&p.w)))
                .collect::<Vec<_>>(),
        )
    }
}

/// Queue order: `order[position] = participant index`, positions 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QueueOrder(Vec<usize>);

impl QueueOrder {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &p in &order {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidOrdering(n));
            }
        }
        Ok(QueueOrder(order))
    }

    pub fn identity(n: usize) -> Self {
        QueueOrder((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn participant_at(&self, position: usize) -> usize {
        self.0[position]
    }

    /// Inverse permutation: `positions()[participant] = position`.
    pub fn positions(&self) -> Vec<usize> {
        let mut inv = vec![0; self.0.len()];
        for (pos, &p) in self.0.iter().enumerate() {
            inv[p] = pos;
        }
        inv
    }

    /// The order obtained when the participant at `from` is taken out and
    /// reinserted at `to`; everyone in between shifts by one.
    pub fn moved(&self, from: usize, to: usize) -> QueueOrder {
        let mut v = self.0.clone();
        let p = v.remove(from);
        v.insert(to, p);
        QueueOrder(v)
    }

    pub fn ids<'a, T>(&self, inst: &'a Instance<T>) -> Vec<&'a str> {
        self.0.iter().map(|&p| inst.participants[p].id.as_str()).collect()
    }
}

fn check_order<T: Scalar>(inst: &Instance<T>, ord: &QueueOrder) -> Result<()> {
    if ord.len() != inst.len() {
        return Err(Error::InvalidOrdering(inst.len()));
    }
    Ok(())
}

/// Waiting cost of whoever stands at `position`: their `w` times the service
/// time of everyone ahead of them. Their own service time is not counted.
pub fn waiting_cost<T: Scalar>(inst: &Instance<T>, ord: &QueueOrder, position: usize) -> Result<T> {
    check_order(inst, ord)?;
    if position >= ord.len() {
        return Err(Error::PositionOutOfRange { position, len: ord.len() });
    }
    let ahead = ord.0[..position]
        .iter()
        .fold(T::zero(), |acc, &p| acc + inst.t(p));
    Ok(inst.w(ord.0[position]) * ahead)
}

/// Waiting cost of every participant, indexed by participant.
pub fn waiting_costs<T: Scalar>(inst: &Instance<T>, ord: &QueueOrder) -> Vec<T> {
    let mut out = vec![T::zero(); inst.len()];
    let mut ahead = T::zero();
    for &p in ord.as_slice() {
        out[p] = inst.w(p) * ahead.clone();
        ahead = ahead + inst.t(p);
    }
    out
}

pub fn total_weighted_waiting<T: Scalar>(inst: &Instance<T>, ord: &QueueOrder) -> Result<T> {
    check_order(inst, ord)?;
    Ok(waiting_costs(inst, ord).into_iter().fold(T::zero(), |a, b| a + b))
}

/// Sort by non-ascending `w / t`, breaking ties by ascending index.
pub fn smith_order<T: Scalar>(inst: &Instance<T>) -> QueueOrder {
    let v = inst.value_rates();
    let mut order: Vec<usize> = (0..inst.len()).collect();
    order.sort_by(|&a, &b| {
        v[b].partial_cmp(&v[a])
            .expect("validated values are comparable")
            .then(a.cmp(&b))
    });
    QueueOrder(order)
}

/// Whether `w / t` is non-increasing along `ord`.
pub fn is_efficient<T: Scalar>(inst: &Instance<T>, ord: &QueueOrder) -> bool {
    ord.as_slice()
        .windows(2)
        .all(|pair| inst.value_rate(pair[0]) >= inst.value_rate(pair[1]))
}
