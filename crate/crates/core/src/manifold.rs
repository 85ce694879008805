//! Levi-Civita machinery for an analytic metric on a single chart:
//! Christoffel symbols, the curvature stack, covariant derivatives of
//! arbitrary tensor fields, and Lie brackets.
//!
//! Curvature sign convention: `R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]`,
//! stored as `riemann13[l, i, j, k] = (R(d_i, d_j) d_k)^l` and
//! `riemann04[i, j, k, w] = g(R(d_i, d_j) d_k, d_w)`. A space of constant
//! curvature `c` then satisfies `R(X,Y)Z = c (g(Y,Z) X - g(X,Z) Y)`.
//!
//! Everything is computed fresh per point from jets of the metric; no
//! caching, no precomputed tables.

use crate::error::Result;
use crate::fields::TensorField;
use crate::jet::Jet;
use crate::linalg;
use crate::tensor::{for_each_index, TensorValue, Variance};

#[derive(Clone)]
pub struct MetricModel {
    pub name: String,
    pub dim: usize,
    pub components: TensorField,
    /// Per-coordinate sampling interval for seeded random checks.
    pub sample_box: Vec<(f64, f64)>,
}

impl MetricModel {
    pub fn new(name: &str, dim: usize, components: TensorField, sample_box: Vec<(f64, f64)>) -> Self {
        assert_eq!(components.dim(), dim);
        assert_eq!(components.slots(), &[Variance::Down, Variance::Down]);
        assert_eq!(sample_box.len(), dim);
        MetricModel {
            name: name.to_string(),
            dim,
            components,
            sample_box,
        }
    }

    pub fn metric_at(&self, p: &[f64]) -> Result<TensorValue> {
        self.components.eval(p)
    }

    pub fn inverse_metric_at(&self, p: &[f64]) -> Result<TensorValue> {
        let g = self.components.eval(p)?;
        let (inv, _) = linalg::invert(g.entries(), self.dim, p)?;
        Ok(TensorValue::from_entries(
            self.dim,
            &[Variance::Up, Variance::Up],
            inv,
        ))
    }
}

/// Christoffel symbols as jets of the requested order, from arbitrary
/// (typically seeded) coordinate jets. `coords` must carry at least
/// `order + 1` derivative orders.
pub fn christoffel_jets_at(m: &MetricModel, coords: &[Jet], point: &[f64]) -> Result<Vec<Jet>> {
    let d = m.dim;
    let g: Vec<Jet> = m.components.eval_at_jets(coords);
    let ginv = linalg::invert_jets(&g, d, point)?;
    // dg[l][i][j] = d_l g_ij as a jet one order lower than g.
    let mut dg = Vec::with_capacity(d * d * d);
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                dg.push(g[i * d + j].partial(l));
            }
        }
    }
    let idx = |l: usize, i: usize, j: usize| (l * d + i) * d + j;
    let mut gamma = Vec::with_capacity(d * d * d);
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut acc = Jet::constant(coords[0].dim(), 0.0);
                for l in 0..d {
                    let term = dg[idx(i, j, l)].add(&dg[idx(j, i, l)]).sub(&dg[idx(l, i, j)]);
                    acc = acc.add(&ginv[k * d + l].mul(&term));
                }
                gamma.push(acc.scale(0.5));
            }
        }
    }
    Ok(gamma)
}

fn christoffel_jets(m: &MetricModel, p: &[f64], order: usize) -> Result<Vec<Jet>> {
    christoffel_jets_at(m, &Jet::seed(p, order + 1), p)
}

/// `Gamma^k_{ij}` at `p`, indexed `[k, i, j]`.
pub fn christoffel(m: &MetricModel, p: &[f64]) -> Result<TensorValue> {
    let jets = christoffel_jets(m, p, 0)?;
    Ok(TensorValue::from_entries(
        m.dim,
        &[Variance::Up, Variance::Down, Variance::Down],
        jets.iter().map(|j| j.value()).collect(),
    ))
}

/// Checks that `coords` is a plain coordinate seed of its own chart.
/// Derived fields re-seed internally to recover the derivative orders
/// their construction consumes, which is only valid on seeds.
pub(crate) fn debug_assert_plain_seed(coords: &[Jet]) {
    if cfg!(debug_assertions) && coords[0].order() >= 1 {
        for (i, c) in coords.iter().enumerate() {
            for j in 0..c.dim() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_eq!(c.d1(j), expect, "derived field evaluated off-seed");
            }
        }
    }
}

/// The Christoffel symbols as an analytic (1,2) field on the model's own
/// chart. Consumes one derivative order internally, so the closure
/// re-seeds one order higher than the caller's request; only valid on
/// plain coordinate seeds (nested covariant derivatives, Bianchi checks).
pub fn christoffel_field(m: &MetricModel) -> TensorField {
    let m = m.clone();
    let dim = m.dim;
    TensorField::new(
        dim,
        &[Variance::Up, Variance::Down, Variance::Down],
        std::sync::Arc::new(move |coords| {
            debug_assert_plain_seed(coords);
            let p: Vec<f64> = coords.iter().map(|c| c.value()).collect();
            let seeds = Jet::seed(&p, coords[0].order() + 1);
            christoffel_jets_at(&m, &seeds, &p).expect("singular metric inside christoffel_field")
        }),
    )
}

pub struct CurvatureBundle {
    /// `Gamma^k_{ij}`, indexed `[k, i, j]`.
    pub gamma: TensorValue,
    /// `(R(d_i, d_j) d_k)^l`, indexed `[l, i, j, k]`.
    pub riemann13: TensorValue,
    /// `g(R(d_i, d_j) d_k, d_w)`, indexed `[i, j, k, w]`.
    pub riemann04: TensorValue,
    /// `Ric(d_j, d_k) = sum_l (R(d_l, d_j) d_k)^l`, indexed `[j, k]`.
    pub ricci: TensorValue,
    /// `g^{jk} Ric_{jk}`.
    pub scalar: f64,
}

pub fn curvature_bundle(m: &MetricModel, p: &[f64]) -> Result<CurvatureBundle> {
    let d = m.dim;
    let gj = christoffel_jets(m, p, 1)?;
    let idx = |k: usize, i: usize, j: usize| (k * d + i) * d + j;
    let gamma = TensorValue::from_entries(
        d,
        &[Variance::Up, Variance::Down, Variance::Down],
        gj.iter().map(|j| j.value()).collect(),
    );

    // R^l_{ijk} = d_i G^l_{jk} - d_j G^l_{ik} + G^l_{im} G^m_{jk} - G^l_{jm} G^m_{ik}
    let mut r13 = TensorValue::zeros(d, &[Variance::Up, Variance::Down, Variance::Down, Variance::Down]);
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut v = gj[idx(l, j, k)].d1(i) - gj[idx(l, i, k)].d1(j);
                    for mm in 0..d {
                        v += gj[idx(l, i, mm)].value() * gj[idx(mm, j, k)].value()
                            - gj[idx(l, j, mm)].value() * gj[idx(mm, i, k)].value();
                    }
                    r13.set(&[l, i, j, k], v);
                }
            }
        }
    }

    let g = m.metric_at(p)?;
    let mut r04 = TensorValue::zeros(d, &[Variance::Down; 4]);
    for_each_index(d, 4, |ix| {
        let (i, j, k, w) = (ix[0], ix[1], ix[2], ix[3]);
        let mut v = 0.0;
        for l in 0..d {
            v += g.get(&[l, w]) * r13.get(&[l, i, j, k]);
        }
        r04.set(ix, v);
    });

    let mut ricci = TensorValue::zeros(d, &[Variance::Down, Variance::Down]);
    for j in 0..d {
        for k in 0..d {
            let mut v = 0.0;
            for l in 0..d {
                v += r13.get(&[l, l, j, k]);
            }
            ricci.set(&[j, k], v);
        }
    }

    let ginv = m.inverse_metric_at(p)?;
    let mut scalar = 0.0;
    for j in 0..d {
        for k in 0..d {
            scalar += ginv.get(&[j, k]) * ricci.get(&[j, k]);
        }
    }

    Ok(CurvatureBundle {
        gamma,
        riemann13: r13,
        riemann04: r04,
        ricci,
        scalar,
    })
}

/// Covariant derivative of an analytic tensor field at `p`. The derivative
/// slot is prepended: `out[c, A...] = (nabla_c T)_A`.
pub fn covariant_derivative(field: &TensorField, m: &MetricModel, p: &[f64]) -> Result<TensorValue> {
    let d = m.dim;
    assert_eq!(field.dim(), d);
    let rank = field.slots().len();
    let jets = field.eval_jets(p, 1);
    let gamma = christoffel(m, p)?;

    let mut out_slots = vec![Variance::Down];
    out_slots.extend_from_slice(field.slots());
    let mut out = TensorValue::zeros(d, &out_slots);

    let stride = |a: &[usize]| -> usize {
        let mut o = 0;
        for &i in a {
            o = o * d + i;
        }
        o
    };

    let slots = field.slots().to_vec();
    for_each_index(d, rank, |a| {
        for c in 0..d {
            let mut v = jets[stride(a)].d1(c);
            for (s, var) in slots.iter().enumerate() {
                let mut swapped = a.to_vec();
                for mm in 0..d {
                    swapped[s] = mm;
                    let t = jets[stride(&swapped)].value();
                    match var {
                        Variance::Up => v += gamma.get(&[a[s], c, mm]) * t,
                        Variance::Down => v -= gamma.get(&[mm, c, a[s]]) * t,
                    }
                }
            }
            let mut full = Vec::with_capacity(rank + 1);
            full.push(c);
            full.extend_from_slice(a);
            out.set(&full, v);
        }
    });
    if out.entries().iter().any(|x| !x.is_finite()) {
        return Err(crate::error::GeometryError::NonFiniteField { point: p.to_vec() });
    }
    Ok(out)
}

/// Seeded uniform samples from a per-coordinate box. Deterministic for a
/// fixed seed; every randomized check in the workspace funnels through
/// this so reports are reproducible.
pub fn sample_points(sample_box: &[(f64, f64)], count: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::distributions::{Distribution, Uniform};
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dists: Vec<Uniform<f64>> = sample_box
        .iter()
        .map(|&(lo, hi)| Uniform::new_inclusive(lo, hi))
        .collect();
    (0..count)
        .map(|_| dists.iter().map(|d| d.sample(&mut rng)).collect())
        .collect()
}

/// `[X, Y]^k = X^m d_m Y^k - Y^m d_m X^k` for two analytic vector fields.
pub fn lie_bracket(x: &TensorField, y: &TensorField, p: &[f64]) -> Result<TensorValue> {
    let d = x.dim();
    assert_eq!(x.slots(), &[Variance::Up]);
    assert_eq!(y.slots(), &[Variance::Up]);
    let xj = x.eval_jets(p, 1);
    let yj = y.eval_jets(p, 1);
    let mut out = TensorValue::zeros(d, &[Variance::Up]);
    for k in 0..d {
        let mut v = 0.0;
        for mm in 0..d {
            v += xj[mm].value() * yj[k].d1(mm) - yj[mm].value() * xj[k].d1(mm);
        }
        out.set(&[k], v);
    }
    Ok(out)
}

/// The full (1,3) curvature as an analytic field (entries `[l, i, j, k]`
/// as in [`CurvatureBundle::riemann13`]); feeds second-Bianchi checks and
/// anything else that differentiates curvature. Consumes two derivative
/// orders internally; same plain-seed restriction as [`christoffel_field`].
pub fn riemann_field(m: &MetricModel) -> TensorField {
    let m = m.clone();
    let d = m.dim;
    TensorField::new(
        d,
        &[Variance::Up, Variance::Down, Variance::Down, Variance::Down],
        std::sync::Arc::new(move |coords| {
            debug_assert_plain_seed(coords);
            let p: Vec<f64> = coords.iter().map(|c| c.value()).collect();
            let seeds = Jet::seed(&p, coords[0].order() + 2);
            let gj = christoffel_jets_at(&m, &seeds, &p).expect("singular metric in riemann_field");
            let idx = |k: usize, i: usize, j: usize| (k * d + i) * d + j;
            let mut out = Vec::with_capacity(d * d * d * d);
            for l in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        for k in 0..d {
                            let mut v = gj[idx(l, j, k)]
                                .partial(i)
                                .sub(&gj[idx(l, i, k)].partial(j));
                            for mm in 0..d {
                                v = v
                                    .add(&gj[idx(l, i, mm)].mul(&gj[idx(mm, j, k)]))
                                    .sub(&gj[idx(l, j, mm)].mul(&gj[idx(mm, i, k)]));
                            }
                            out.push(v);
                        }
                    }
                }
            }
            out
        }),
    )
}
