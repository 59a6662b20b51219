use std::collections::BTreeMap;

use crate::pth::PthParams;
use crate::signature::TypeId;

/// The factors making up a structure's probability, kept as counts.
///
/// Evaluation always visits the factors in key order, so the result does
/// not depend on the order in which they were recorded.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Weight {
    pub transitions: BTreeMap<(TypeId, TypeId), u64>,
    pub equated: BTreeMap<TypeId, u64>,
    pub inequated: BTreeMap<TypeId, u64>,
}

impl Weight {
    pub fn add_transition(&mut self, from: TypeId, to: TypeId) {
        *self.transitions.entry((from, to)).or_default() += 1;
    }

    pub fn add_pair(&mut self, ty: TypeId, equal: bool) {
        let table = if equal {
            &mut self.equated
        } else {
            &mut self.inequated
        };
        *table.entry(ty).or_default() += 1;
    }

    pub fn merge(&mut self, other: &Weight) {
        for (k, v) in &other.transitions {
            *self.transitions.entry(*k).or_default() += v;
        }
        for (k, v) in &other.equated {
            *self.equated.entry(*k).or_default() += v;
        }
        for (k, v) in &other.inequated {
            *self.inequated.entry(*k).or_default() += v;
        }
    }

    pub fn transition_log_prob(&self, params: &PthParams) -> f64 {
        let mut acc = 0.0;
        for (&(from, to), &n) in &self.transitions {
            acc += log_power(params.transition(from, to), n);
        }
        acc
    }

    /// Natural log of the product of all recorded factors.
    pub fn log_prob(&self, params: &PthParams) -> f64 {
        let mut acc = self.transition_log_prob(params);
        for (&t, &n) in &self.equated {
            acc += log_power(params.equate(t), n);
        }
        for (&t, &n) in &self.inequated {
            acc += log_power(1.0 - params.equate(t), n);
        }
        acc
    }

    pub fn prob(&self, params: &PthParams) -> f64 {
        self.log_prob(params).exp()
    }

    /// Product of the factors computed directly in linear space, in key
    /// order.
    pub fn linear_product(&self, params: &PthParams) -> f64 {
        let mut acc = 1.0;
        for (&(from, to), &n) in &self.transitions {
            acc *= params.transition(from, to).powi(n as i32);
        }
        for (&t, &n) in &self.equated {
            acc *= params.equate(t).powi(n as i32);
        }
        for (&t, &n) in &self.inequated {
            acc *= (1.0 - params.equate(t)).powi(n as i32);
        }
        acc
    }
}

fn log_power(p: f64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        n as f64 * p.ln()
    }
}
