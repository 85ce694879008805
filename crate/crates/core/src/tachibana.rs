//! The operator algebra on the second fundamental form: curvature and
//! concircular operators acting as derivations, and the `Q` operator
//! built from metric-like wedges. All functions are finite algebra
//! over a [`PointGeometry`].

use crate::error::{GeometryError, Result};
use crate::geometry::PointGeometry;
use crate::tensor::{TensorValue, Variance};

/// Value space for `Q`-operator expressions: scalar, tangent vector, or
/// normal-component vector.
#[derive(Clone, Debug)]
pub enum AlgValue {
    Scalar(f64),
    Vector(TensorValue),
    Normal(Vec<f64>),
}

impl AlgValue {
    pub fn zero_like(&self) -> AlgValue {
        match self {
            AlgValue::Scalar(_) => AlgValue::Scalar(0.0),
            AlgValue::Vector(v) => {
                AlgValue::Vector(TensorValue::zeros(v.dim(), &[Variance::Up]))
            }
            AlgValue::Normal(w) => AlgValue::Normal(vec![0.0; w.len()]),
        }
    }

    pub fn add(&self, rhs: &AlgValue) -> AlgValue {
        match (self, rhs) {
            (AlgValue::Scalar(a), AlgValue::Scalar(b)) => AlgValue::Scalar(a + b),
            (AlgValue::Vector(a), AlgValue::Vector(b)) => AlgValue::Vector(a.add(b)),
            (AlgValue::Normal(a), AlgValue::Normal(b)) => {
                AlgValue::Normal(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            _ => panic!("mixed algebra value kinds"),
        }
    }

    pub fn scale(&self, c: f64) -> AlgValue {
        match self {
            AlgValue::Scalar(a) => AlgValue::Scalar(a * c),
            AlgValue::Vector(v) => AlgValue::Vector(v.scale(c)),
            AlgValue::Normal(w) => AlgValue::Normal(w.iter().map(|x| x * c).collect()),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            AlgValue::Scalar(a) => a.abs(),
            AlgValue::Vector(v) => v.max_abs(),
            AlgValue::Normal(w) => w.iter().fold(0.0f64, |m, x| m.max(x.abs())),
        }
    }
}

/// The symmetric form that drives a wedge: the metric, the Ricci form,
/// or the second fundamental form (one wedge per normal component).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WedgeForm {
    Metric,
    RicciForm,
    Sigma,
}

/// Scalar components of the wedge form on a pair of vectors: one entry
/// for the scalar-valued forms, one per normal component for sigma.
pub fn form_components(
    pg: &PointGeometry,
    form: WedgeForm,
    x: &TensorValue,
    y: &TensorValue,
) -> Vec<f64> {
    match form {
        WedgeForm::Metric => vec![pg.inner(x, y)],
        WedgeForm::RicciForm => vec![pg.ricci_of(x, y)],
        WedgeForm::Sigma => pg.sigma_of(x, y),
    }
}

/// `(X wedge_E Y) Z = E(Y, Z) X - E(X, Z) Y`, componentwise in `E`.
pub fn wedge(
    pg: &PointGeometry,
    form: WedgeForm,
    x: &TensorValue,
    y: &TensorValue,
    z: &TensorValue,
) -> Vec<TensorValue> {
    let eyz = form_components(pg, form, y, z);
    let exz = form_components(pg, form, x, z);
    eyz.iter()
        .zip(&exz)
        .map(|(a, b)| x.scale(*a).add(&y.scale(-*b)))
        .collect()
}

/// `Q(E, T)(args; X, Y) = - sum_i T(..., (X wedge_E Y) args_i, ...)`,
/// one output per scalar component of `E`.
pub fn q_operator(
    pg: &PointGeometry,
    form: WedgeForm,
    t: &dyn Fn(&[TensorValue]) -> AlgValue,
    args: &[TensorValue],
    x: &TensorValue,
    y: &TensorValue,
) -> Vec<AlgValue> {
    let comps = match form {
        WedgeForm::Sigma => pg.rank,
        _ => 1,
    };
    let probe = t(args);
    let mut out = vec![probe.zero_like(); comps];
    let mut slot_args: Vec<TensorValue> = args.to_vec();
    for i in 0..args.len() {
        let wedged = wedge(pg, form, x, y, &args[i]);
        for (c, w) in wedged.into_iter().enumerate() {
            slot_args[i] = w;
            out[c] = out[c].add(&t(&slot_args).scale(-1.0));
        }
        slot_args[i] = args[i].clone();
    }
    out
}

/// `(R(X,Y) . sigma)(U, V)`: the normal curvature acts on the value and
/// the tangent curvature is subtracted from each slot.
pub fn r_dot_sigma(
    pg: &PointGeometry,
    x: &TensorValue,
    y: &TensorValue,
    u: &TensorValue,
    v: &TensorValue,
) -> Vec<f64> {
    let mut out = pg.rperp_apply(x, y, &pg.sigma_of(u, v));
    let su = pg.sigma_of(&pg.curve(x, y, u), v);
    let sv = pg.sigma_of(u, &pg.curve(x, y, v));
    for nu in 0..pg.rank {
        out[nu] -= su[nu] + sv[nu];
    }
    out
}

/// `(R(X,Y) . nabla sigma)(U, V, W)` with
/// `(nabla sigma)(U, V, W) = (nabla_U sigma)(V, W)`.
pub fn r_dot_nabla_sigma(
    pg: &PointGeometry,
    x: &TensorValue,
    y: &TensorValue,
    u: &TensorValue,
    v: &TensorValue,
    w: &TensorValue,
) -> Vec<f64> {
    let mut out = pg.rperp_apply(x, y, &pg.nabla_sigma_of(u, v, w));
    let tu = pg.nabla_sigma_of(&pg.curve(x, y, u), v, w);
    let tv = pg.nabla_sigma_of(u, &pg.curve(x, y, v), w);
    let tw = pg.nabla_sigma_of(u, v, &pg.curve(x, y, w));
    for nu in 0..pg.rank {
        out[nu] -= tu[nu] + tv[nu] + tw[nu];
    }
    out
}

/// `(C(X,Y) . sigma)(U, V)` for the concircular operator; the normal
/// part of the action stays the normal curvature.
pub fn c_dot_sigma(
    pg: &PointGeometry,
    x: &TensorValue,
    y: &TensorValue,
    u: &TensorValue,
    v: &TensorValue,
) -> Vec<f64> {
    let mut out = pg.rperp_apply(x, y, &pg.sigma_of(u, v));
    let su = pg.sigma_of(&pg.concircular(x, y, u), v);
    let sv = pg.sigma_of(u, &pg.concircular(x, y, v));
    for nu in 0..pg.rank {
        out[nu] -= su[nu] + sv[nu];
    }
    out
}

/// `(C(X,Y) . nabla sigma)(U, V, W)`.
pub fn c_dot_nabla_sigma(
    pg: &PointGeometry,
    x: &TensorValue,
    y: &TensorValue,
    u: &TensorValue,
    v: &TensorValue,
    w: &TensorValue,
) -> Vec<f64> {
    let mut out = pg.rperp_apply(x, y, &pg.nabla_sigma_of(u, v, w));
    let tu = pg.nabla_sigma_of(&pg.concircular(x, y, u), v, w);
    let tv = pg.nabla_sigma_of(u, &pg.concircular(x, y, v), w);
    let tw = pg.nabla_sigma_of(u, v, &pg.concircular(x, y, w));
    for nu in 0..pg.rank {
        out[nu] -= tu[nu] + tv[nu] + tw[nu];
    }
    out
}

fn q_two_slot_sigma(
    pg: &PointGeometry,
    form: WedgeForm,
    u: &TensorValue,
    v: &TensorValue,
    x: &TensorValue,
    y: &TensorValue,
) -> Vec<f64> {
    let t = |args: &[TensorValue]| AlgValue::Normal(pg.sigma_of(&args[0], &args[1]));
    let out = q_operator(pg, form, &t, &[u.clone(), v.clone()], x, y);
    match &out[0] {
        AlgValue::Normal(w) => w.clone(),
        _ => unreachable!(),
    }
}

/// `Q(g, sigma)(U, V; X, Y)` in normal components.
pub fn q_g_sigma(
    pg: &PointGeometry,
    u: &TensorValue,
    v: &TensorValue,
    x: &TensorValue,
    y: &TensorValue,
) -> Vec<f64> {
    q_two_slot_sigma(pg, WedgeForm::Metric, u, v, x, y)
}

/// `Q(S, sigma)(U, V; X, Y)` in normal components.
pub fn q_ricci_sigma(
    pg: &PointGeometry,
    u: &TensorValue,
    v: &TensorValue,
    x: &TensorValue,
    y: &TensorValue,
) -> Vec<f64> {
    q_two_slot_sigma(pg, WedgeForm::RicciForm, u, v, x, y)
}

pub const PARALLELISM_KINDS: [&str; 7] = [
    "parallel",
    "semi",
    "2-semi",
    "pseudo",
    "ricci-pseudo",
    "concircular-semi",
    "concircular-2-semi",
];

/// Pointwise defect of one parallelism condition on the given vectors.
/// Slot usage: `parallel` reads `(x, u, v)`; the `2-semi` kinds read all
/// five; the rest read `(x, y, u, v)`. `l1` enters only the pseudo
/// kinds.
#[allow(clippy::too_many_arguments)]
pub fn parallelism_residual(
    pg: &PointGeometry,
    kind: &str,
    l1: f64,
    x: &TensorValue,
    y: &TensorValue,
    u: &TensorValue,
    v: &TensorValue,
    w: &TensorValue,
) -> Result<f64> {
    let sup = |vals: Vec<f64>| vals.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    match kind {
        "parallel" => Ok(sup(pg.nabla_sigma_of(x, u, v))),
        "semi" => Ok(sup(r_dot_sigma(pg, x, y, u, v))),
        "2-semi" => Ok(sup(r_dot_nabla_sigma(pg, x, y, u, v, w))),
        "pseudo" => {
            let lhs = r_dot_sigma(pg, x, y, u, v);
            let q = q_g_sigma(pg, u, v, x, y);
            Ok(sup(
                lhs.iter().zip(&q).map(|(a, b)| a - l1 * b).collect(),
            ))
        }
        "ricci-pseudo" => {
            let lhs = r_dot_sigma(pg, x, y, u, v);
            let q = q_ricci_sigma(pg, u, v, x, y);
            Ok(sup(
                lhs.iter().zip(&q).map(|(a, b)| a - l1 * b).collect(),
            ))
        }
        "concircular-semi" => Ok(sup(c_dot_sigma(pg, x, y, u, v))),
        "concircular-2-semi" => Ok(sup(c_dot_nabla_sigma(pg, x, y, u, v, w))),
        _ => Err(GeometryError::UnknownKind {
            name: kind.to_string(),
            available: PARALLELISM_KINDS.join(", "),
        }),
    }
}
