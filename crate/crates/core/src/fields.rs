//! Analytic fields on a chart: closures from seeded coordinate jets to
//! component jets. Evaluating a field through [`Jet::seed`] yields every
//! partial derivative the caller asked for in one pass.

use std::sync::Arc;

use crate::error::{GeometryError, Result};
use crate::jet::Jet;
use crate::tensor::{TensorValue, Variance};

pub type FieldFn = Arc<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>;

/// A tensor field: `f` returns `dim^rank` component jets in row-major slot
/// order when handed the seeded coordinates.
#[derive(Clone)]
pub struct TensorField {
    dim: usize,
    slots: Vec<Variance>,
    f: FieldFn,
}

impl TensorField {
    pub fn new(dim: usize, slots: &[Variance], f: FieldFn) -> Self {
        TensorField {
            dim,
            slots: slots.to_vec(),
            f,
        }
    }

    pub fn scalar(dim: usize, f: impl Fn(&[Jet]) -> Jet + Send + Sync + 'static) -> Self {
        TensorField {
            dim,
            slots: Vec::new(),
            f: Arc::new(move |p| vec![f(p)]),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn slots(&self) -> &[Variance] {
        &self.slots
    }

    /// Component jets at `p`, tracked to `order`.
    pub fn eval_jets(&self, p: &[f64], order: usize) -> Vec<Jet> {
        assert_eq!(p.len(), self.dim, "point dimension mismatch");
        (self.f)(&Jet::seed(p, order))
    }

    /// Component jets from caller-supplied coordinate jets. This is what
    /// makes fields composable: the coordinates may themselves be the
    /// output of another jet computation (pulled-back charts, nested
    /// derivatives).
    pub fn eval_at_jets(&self, coords: &[Jet]) -> Vec<Jet> {
        (self.f)(coords)
    }

    /// Component values at `p`.
    pub fn eval(&self, p: &[f64]) -> Result<TensorValue> {
        let jets = self.eval_jets(p, 0);
        let entries: Vec<f64> = jets.iter().map(|j| j.value()).collect();
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(GeometryError::NonFiniteField { point: p.to_vec() });
        }
        Ok(TensorValue::from_entries(self.dim, &self.slots, entries))
    }
}

/// First, second, or third derivatives of a scalar field at a point,
/// packed as a fully covariant [`TensorValue`] of the requested order.
pub fn differentiate_field(field: &TensorField, p: &[f64], order: usize) -> Result<TensorValue> {
    assert!(field.slots().is_empty(), "differentiate_field takes a scalar field");
    assert!((1..=3).contains(&order), "order must be 1, 2, or 3");
    let jets = field.eval_jets(p, order);
    let f = &jets[0];
    let d = field.dim();
    let slots = vec![Variance::Down; order];
    let mut out = TensorValue::zeros(d, &slots);
    match order {
        1 => {
            for i in 0..d {
                out.set(&[i], f.d1(i));
            }
        }
        2 => {
            for i in 0..d {
                for j in 0..d {
                    out.set(&[i, j], f.d2(i, j));
                }
            }
        }
        _ => {
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        out.set(&[i, j, k], f.d3(i, j, k));
                    }
                }
            }
        }
    }
    if out.entries().iter().any(|x| !x.is_finite()) {
        return Err(GeometryError::NonFiniteField { point: p.to_vec() });
    }
    Ok(out)
}
