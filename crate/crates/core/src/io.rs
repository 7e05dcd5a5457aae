//! Instance and bid files.
//!
//! Files are read into raw literals first so the arithmetic can be chosen
//! after looking at every number involved.

use std::collections::HashSet;

use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

use crate::bounds::{RevenueBound, RevenueBounds};
use crate::error::{Error, Result};
use crate::mechanisms::{BidProfile, MechanismKind};
use crate::model::Instance;
use crate::numeric::{Literal, Scalar};

/// Arithmetic requested on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Arithmetic {
    /// Exact when every input literal is exact, floating otherwise.
    #[default]
    Auto,
    Exact,
    Float,
}

impl Arithmetic {
    /// Whether to compute exactly, given every literal that will be used.
    pub fn resolve<'a>(self, literals: impl IntoIterator<Item = &'a Literal>) -> bool {
        match self {
            Arithmetic::Exact => true,
            Arithmetic::Float => false,
            Arithmetic::Auto => literals.into_iter().all(Literal::is_exact),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawParticipant {
    pub id: String,
    pub t: Literal,
    pub w: Literal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawInstance {
    pub participants: Vec<RawParticipant>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawBids {
    pub kind: MechanismKind,
    /// In file order.
    pub bids: Vec<(String, Literal)>,
}

fn parse_json(text: &str, what: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, what: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::Parse(format!("{what}: missing field {key:?}")))
}

fn literal(value: &Value, what: &str) -> Result<Literal> {
    Literal::from_json(value).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

impl RawInstance {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let root = parse_json(text, "instance")?;
        let list = root
            .as_object()
            .and_then(|o| o.get("participants"))
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("instance: expected {\"participants\": [...]}".into()))?;
        let participants = list
            .iter()
            .enumerate()
            .map(|(i, entry)| {
                let what = format!("participant #{}", i + 1);
                let obj = entry
                    .as_object()
                    .ok_or_else(|| Error::Parse(format!("{what}: expected an object")))?;
                let id = match field(obj, "id", &what)? {
                    Value::String(s) => s.clone(),
                    Value::Number(n) => n.to_string(),
                    _ => return Err(Error::Parse(format!("{what}: id must be a string"))),
                };
                Ok(RawParticipant {
                    t: literal(field(obj, "t", &what)?, &what)?,
                    w: literal(field(obj, "w", &what)?, &what)?,
                    id,
                })
            })
            .collect::<Result<_>>()?;
        Ok(RawInstance { participants })
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.participants.iter().flat_map(|p| [&p.t, &p.w])
    }

    pub fn to_instance<T: Scalar>(&self) -> Result<Instance<T>> {
        let raw = self
            .participants
            .iter()
            .map(|p| Ok((p.id.clone(), T::from_literal(&p.t)?, T::from_literal(&p.w)?)))
            .collect::<Result<Vec<_>>>()?;
        Instance::new(raw)
    }

    pub fn to_json(&self) -> Value {
        let list: Vec<Value> = self
            .participants
            .iter()
            .map(|p| json!({"id": p.id, "t": literal_json(&p.t), "w": literal_json(&p.w)}))
            .collect();
        json!({ "participants": list })
    }
}

impl RawBids {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let root = parse_json(text, "bids")?;
        let obj = root
            .as_object()
            .ok_or_else(|| Error::Parse("bids: expected an object".into()))?;
        let kind: MechanismKind = serde_json::from_value(field(obj, "kind", "bids")?.clone())
            .map_err(|_| Error::Parse("bids: kind must be \"vcg\" or \"gsp\"".into()))?;
        let map = field(obj, "bids", "bids")?
            .as_object()
            .ok_or_else(|| Error::Parse("bids: \"bids\" must map ids to numbers".into()))?;
        let bids = map
            .iter()
            .map(|(id, v)| Ok((id.clone(), literal(v, &format!("bid of {id:?}"))?)))
            .collect::<Result<_>>()?;
        Ok(RawBids { kind, bids })
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.bids.iter().map(|(_, l)| l)
    }

    pub fn to_profile<T: Scalar>(&self, inst: &Instance<T>) -> Result<BidProfile<T>> {
        let mut seen = HashSet::new();
        let mut pairs = Vec::with_capacity(self.bids.len());
        for (id, lit) in &self.bids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
            pairs.push((id.as_str(), T::from_literal(lit)?));
        }
        BidProfile::from_ids(inst, self.kind, pairs)
    }
}

/// Integers as JSON numbers, exact fractions as `"p/q"`, floats as numbers.
pub fn literal_json(lit: &Literal) -> Value {
    match lit {
        Literal::Integer(i) => i.to_i64().map_or_else(|| Value::String(i.to_string()), Value::from),
        Literal::Ratio(r) if r.is_integer() => literal_json(&Literal::Integer(r.to_integer())),
        Literal::Ratio(r) => Value::String(r.to_string()),
        Literal::Float(f) => serde_json::Number::from_f64(*f).map_or(Value::Null, Value::Number),
    }
}

/// A bid file for `profile`, readable by [`RawBids::from_json_str`].
pub fn profile_json<T: Scalar>(inst: &Instance<T>, profile: &BidProfile<T>) -> Value {
    let bids: Map<String, Value> = inst
        .participants()
        .iter()
        .zip(profile.bids())
        .map(|(p, b)| (p.id.clone(), b.to_json()))
        .collect();
    json!({ "kind": profile.kind, "bids": bids })
}

/// Bounds report. Each witness is itself a bid file, extended with its
/// ordering and revenue.
pub fn bounds_json<T: Scalar>(inst: &Instance<T>, b: &RevenueBounds<T>) -> Value {
    let witness = |bound: &RevenueBound<T>| {
        let mut v = profile_json(inst, &bound.witness.profile);
        let obj = v.as_object_mut().expect("profile json is an object");
        obj.insert("order".into(), json!(bound.witness.order.ids(inst)));
        obj.insert("revenue".into(), bound.revenue.to_json());
        v
    };
    json!({
        "mechanism": b.mechanism,
        "lower": b.lower.revenue.to_json(),
        "upper": b.upper.revenue.to_json(),
        "upper_own_rate_sum": b.own_rate_sum.to_json(),
        "lower_method": b.lower_method.name(),
        "witness_lower": witness(&b.lower),
        "witness_upper": witness(&b.upper),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{exact_int, ratio, Exact};

    const I2: &str = r#"{"participants": [{"id": "A", "t": 1, "w": 3}, {"id": "B", "t": "2", "w": "4/1"}]}"#;

    #[test]
    fn reads_instances() {
        let raw = RawInstance::from_json_str(I2).unwrap();
        assert!(Arithmetic::Auto.resolve(raw.literals()));
        let inst: Instance<Exact> = raw.to_instance().unwrap();
        assert_eq!(inst.value_rates(), vec![exact_int(3), exact_int(2)]);
        let floaty = RawInstance::from_json_str(r#"{"participants": [{"id": "A", "t": 0.5, "w": 3}]}"#)
            .unwrap();
        assert!(!Arithmetic::Auto.resolve(floaty.literals()));
        assert!(Arithmetic::Exact.resolve(floaty.literals()));
    }

    #[test]
    fn malformed_files_are_parse_errors() {
        for text in ["{", "[]", r#"{"participants": [{"id": "A", "t": 1}]}"#, r#"{"participants": [{"id": "A", "t": "x", "w": 1}]}"#] {
            assert!(matches!(RawInstance::from_json_str(text), Err(Error::Parse(_))), "{text}");
        }
        assert!(matches!(RawBids::from_json_str(r#"{"kind": "vickrey", "bids": {}}"#), Err(Error::Parse(_))));
    }

    #[test]
    fn bids_round_trip() {
        let inst: Instance<Exact> = RawInstance::from_json_str(I2).unwrap().to_instance().unwrap();
        let raw = RawBids::from_json_str(r#"{"kind": "gsp", "bids": {"B": "1/2", "A": 5}}"#).unwrap();
        let profile = raw.to_profile(&inst).unwrap();
        assert_eq!(profile.bids(), &[exact_int(5), ratio(1, 2)]);
        let text = profile_json(&inst, &profile).to_string();
        let again = RawBids::from_json_str(&text).unwrap().to_profile(&inst).unwrap();
        assert_eq!(again, profile);
    }

    #[test]
    fn instance_round_trip() {
        let raw = RawInstance::from_json_str(I2).unwrap();
        let again = RawInstance::from_json_str(&raw.to_json().to_string()).unwrap();
        let a: Instance<Exact> = raw.to_instance().unwrap();
        let b: Instance<Exact> = again.to_instance().unwrap();
        assert_eq!(a, b);
    }
}
