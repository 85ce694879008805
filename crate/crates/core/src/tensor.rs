//! Dense tensors at a point with explicit variance bookkeeping.
//!
//! Slot variances are carried with the data so contraction and raising /
//! lowering can refuse mismatched requests instead of silently producing
//! garbage. Entries are row-major over the slot order.

use crate::error::{GeometryError, Result};
use crate::linalg;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variance {
    /// Contravariant (vector-like) slot.
    Up,
    /// Covariant (form-like) slot.
    Down,
}

impl Variance {
    fn name(self) -> &'static str {
        match self {
            Variance::Up => "up",
            Variance::Down => "down",
        }
    }
}

/// Direction for [`TensorValue::metric_adjust`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Adjust {
    /// Raise a Down slot with the inverse metric.
    Raise,
    /// Lower an Up slot with the metric.
    Lower,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TensorValue {
    dim: usize,
    slots: Vec<Variance>,
    entries: Vec<f64>,
}

impl TensorValue {
    pub fn zeros(dim: usize, slots: &[Variance]) -> Self {
        let len = dim.pow(slots.len() as u32);
        TensorValue {
            dim,
            slots: slots.to_vec(),
            entries: vec![0.0; len],
        }
    }

    pub fn from_entries(dim: usize, slots: &[Variance], entries: Vec<f64>) -> Self {
        assert_eq!(entries.len(), dim.pow(slots.len() as u32));
        TensorValue {
            dim,
            slots: slots.to_vec(),
            entries,
        }
    }

    pub fn scalar(v: f64) -> Self {
        TensorValue {
            dim: 0,
            slots: Vec::new(),
            entries: vec![v],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[Variance] {
        &self.slots
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        let mut o = 0;
        for &i in idx {
            debug_assert!(i < self.dim);
            o = o * self.dim + i;
        }
        o
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.entries[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.entries[o] = v;
    }

    pub fn add_at(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.entries[o] += v;
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut r = self.clone();
        for x in r.entries.iter_mut() {
            *x *= c;
        }
        r
    }

    pub fn add(&self, rhs: &TensorValue) -> TensorValue {
        assert_eq!(self.dim, rhs.dim);
        assert_eq!(self.slots, rhs.slots, "cannot add tensors of different type");
        let mut r = self.clone();
        for (x, y) in r.entries.iter_mut().zip(rhs.entries.iter()) {
            *x += y;
        }
        r
    }

    pub fn sub(&self, rhs: &TensorValue) -> TensorValue {
        self.add(&rhs.scale(-1.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Natural pairing trace over slots `a` (Up) and `b` (Down), in either
    /// order. Refuses same-variance pairs: those need a metric first.
    pub fn contract(&self, a: usize, b: usize) -> Result<TensorValue> {
        let rank = self.rank();
        if a >= rank {
            return Err(GeometryError::SlotOutOfRange { slot: a, rank });
        }
        if b >= rank {
            return Err(GeometryError::SlotOutOfRange { slot: b, rank });
        }
        assert_ne!(a, b, "contraction slots must differ");
        if self.slots[a] == self.slots[b] {
            return Err(GeometryError::VarianceMismatch {
                slot: b,
                found: self.slots[b].name(),
                required: if self.slots[a] == Variance::Up {
                    "down"
                } else {
                    "up"
                },
            });
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let out_slots: Vec<Variance> = self
            .slots
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != lo && *i != hi)
            .map(|(_, v)| *v)
            .collect();
        let mut out = TensorValue::zeros(self.dim, &out_slots);
        let mut idx = vec![0usize; out_slots.len()];
        loop {
            let mut full = Vec::with_capacity(rank);
            let mut it = idx.iter();
            for s in 0..rank {
                if s == lo || s == hi {
                    full.push(0);
                } else {
                    full.push(*it.next().unwrap());
                }
            }
            let mut sum = 0.0;
            for m in 0..self.dim {
                full[lo] = m;
                full[hi] = m;
                sum += self.get(&full);
            }
            let o = out.offset(&idx);
            out.entries[o] = sum;
            if !advance(&mut idx, self.dim) {
                break;
            }
        }
        Ok(out)
    }

    /// Raises or lowers slot `s`, keeping slot order. Lowering contracts
    /// with `g`, raising with `g^{-1}`; a singular metric surfaces as a
    /// [`GeometryError::SingularMetric`] carrying a condition estimate.
    pub fn metric_adjust(&self, s: usize, g: &TensorValue, dir: Adjust) -> Result<TensorValue> {
        let rank = self.rank();
        if s >= rank {
            return Err(GeometryError::SlotOutOfRange { slot: s, rank });
        }
        assert_eq!(g.rank(), 2, "metric must be rank 2");
        assert_eq!(g.dim, self.dim);
        let (required, mat): (Variance, Vec<f64>) = match dir {
            Adjust::Lower => (Variance::Up, g.entries.clone()),
            Adjust::Raise => {
                let (inv, _cond) = linalg::invert(&g.entries, g.dim, &[])?;
                (Variance::Down, inv)
            }
        };
        if self.slots[s] != required {
            return Err(GeometryError::VarianceMismatch {
                slot: s,
                found: self.slots[s].name(),
                required: required.name(),
            });
        }
        let mut out_slots = self.slots.clone();
        out_slots[s] = match required {
            Variance::Up => Variance::Down,
            Variance::Down => Variance::Up,
        };
        let mut out = TensorValue::zeros(self.dim, &out_slots);
        let mut idx = vec![0usize; rank];
        loop {
            let mut sum = 0.0;
            let a = idx[s];
            let mut probe = idx.clone();
            for m in 0..self.dim {
                probe[s] = m;
                sum += mat[a * self.dim + m] * self.get(&probe);
            }
            let o = out.offset(&idx);
            out.entries[o] = sum;
            if !advance(&mut idx, self.dim) {
                break;
            }
        }
        Ok(out)
    }

    /// Full inner pairing of a rank-1 Up tensor against a rank-1 Down one.
    pub fn pair(&self, other: &TensorValue) -> f64 {
        assert_eq!(self.rank(), 1);
        assert_eq!(other.rank(), 1);
        assert_ne!(self.slots[0], other.slots[0]);
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// Odometer increment over `idx` with every digit in `0..dim`. Returns
/// false once the index space is exhausted.
pub fn advance(idx: &mut [usize], dim: usize) -> bool {
    for d in (0..idx.len()).rev() {
        idx[d] += 1;
        if idx[d] < dim {
            return true;
        }
        idx[d] = 0;
    }
    false
}

/// Visits every multi-index of the given rank.
pub fn for_each_index(dim: usize, rank: usize, mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; rank];
    if rank == 0 {
        f(&idx);
        return;
    }
    loop {
        f(&idx);
        if !advance(&mut idx, dim) {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn identity(dim: usize) -> TensorValue {
        let mut t = TensorValue::zeros(dim, &[Variance::Up, Variance::Down]);
        for i in 0..dim {
            t.set(&[i, i], 1.0);
        }
        t
    }

    #[test]
    fn trace_of_identity() {
        let t = identity(3);
        let tr = t.contract(0, 1).unwrap();
        assert_eq!(tr.rank(), 0);
        assert_eq!(tr.entries()[0], 3.0);
    }

    #[test]
    fn contract_rejects_same_variance() {
        let g = TensorValue::zeros(3, &[Variance::Down, Variance::Down]);
        assert!(matches!(
            g.contract(0, 1),
            Err(GeometryError::VarianceMismatch { .. })
        ));
    }

    #[test]
    fn metric_raise_then_contract_gives_dimension() {
        // g^{ab} g_{bc} summed over the diagonal = dim.
        let g = TensorValue::from_entries(
            2,
            &[Variance::Down, Variance::Down],
            vec![2.0, 0.3, 0.3, 1.0],
        );
        let up = g.metric_adjust(0, &g, Adjust::Raise).unwrap();
        // up has slots (Up, Down) = g^{a}{}_{c} = delta.
        let tr = up.contract(0, 1).unwrap();
        assert!((tr.entries()[0] - 2.0).abs() < 1e-13);
    }

    #[test]
    fn adjust_rejects_wrong_variance() {
        let g = identity(2)
            .metric_adjust(0, &identity_metric(2), Adjust::Lower)
            .unwrap();
        // g now (Down, Down); lowering again must fail.
        assert!(matches!(
            g.metric_adjust(0, &identity_metric(2), Adjust::Lower),
            Err(GeometryError::VarianceMismatch { .. })
        ));
    }

    #[test]
    fn slot_out_of_range() {
        let t = TensorValue::zeros(2, &[Variance::Up]);
        assert!(matches!(
            t.contract(0, 5),
            Err(GeometryError::SlotOutOfRange { .. })
        ));
    }

    fn identity_metric(dim: usize) -> TensorValue {
        let mut t = TensorValue::zeros(dim, &[Variance::Down, Variance::Down]);
        for i in 0..dim {
            t.set(&[i, i], 1.0);
        }
        t
    }

    fn arb_metric(dim: usize) -> impl Strategy<Value = TensorValue> {
        // Random SPD metric: A A^T + dim * I.
        proptest::collection::vec(-1.0f64..1.0, dim * dim).prop_map(move |a| {
            let mut g = vec![0.0; dim * dim];
            for i in 0..dim {
                for j in 0..dim {
                    let mut s = if i == j { dim as f64 } else { 0.0 };
                    for k in 0..dim {
                        s += a[i * dim + k] * a[j * dim + k];
                    }
                    g[i * dim + j] = s;
                }
            }
            TensorValue::from_entries(dim, &[Variance::Down, Variance::Down], g)
        })
    }

    proptest! {
        #[test]
        fn lower_then_raise_round_trips(
            g in arb_metric(3),
            v in proptest::collection::vec(-5.0f64..5.0, 3),
        ) {
            let x = TensorValue::from_entries(3, &[Variance::Up], v);
            let down = x.metric_adjust(0, &g, Adjust::Lower).unwrap();
            let back = down.metric_adjust(0, &g, Adjust::Raise).unwrap();
            for i in 0..3 {
                prop_assert!((back.get(&[i]) - x.get(&[i])).abs() < 1e-12);
            }
        }

        #[test]
        fn contraction_is_linear(
            a in proptest::collection::vec(-2.0f64..2.0, 8),
            b in proptest::collection::vec(-2.0f64..2.0, 8),
            c in -3.0f64..3.0,
        ) {
            let slots = [Variance::Up, Variance::Down, Variance::Up];
            let ta = TensorValue::from_entries(2, &slots, a);
            let tb = TensorValue::from_entries(2, &slots, b);
            let lhs = ta.scale(c).add(&tb).contract(0, 1).unwrap();
            let rhs = ta.contract(0, 1).unwrap().scale(c).add(&tb.contract(0, 1).unwrap());
            for i in 0..2 {
                prop_assert!((lhs.get(&[i]) - rhs.get(&[i])).abs() < 1e-12);
            }
        }
    }
}
