//! Embedded submanifolds of a model space: induced metric and contact
//! structure, adapted frames, second fundamental form, shape operator,
//! and the invariance test (`xi` tangent, `phi` preserving the tangent
//! spaces).
//!
//! Everything runs in the jet ring so that derived objects (normal
//! connection, curvature of the induced metric, derivatives of the
//! second fundamental form) come out of the same pipeline.

use std::sync::Arc;

use crate::contact::{ContactStructure, ModelSpace};
use crate::error::{GeometryError, Result};
use crate::fields::TensorField;
use crate::jet::Jet;
use crate::linalg;
use crate::manifold::MetricModel;
use crate::tensor::{TensorValue, Variance};

pub type EmbedFn = Arc<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>;

#[derive(Clone)]
pub struct EmbeddingModel {
    pub name: String,
    pub ambient: ModelSpace,
    /// Submanifold chart dimension.
    pub dim: usize,
    pub map: EmbedFn,
    pub sample_box: Vec<(f64, f64)>,
}

impl std::fmt::Debug for EmbeddingModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EmbeddingModel")
            .field("name", &self.name)
            .field("ambient", &self.ambient.name)
            .field("dim", &self.dim)
            .finish()
    }
}

impl EmbeddingModel {
    /// Ambient chart dimension.
    pub fn ambient_dim(&self) -> usize {
        self.ambient.dim()
    }

    /// Normal bundle rank.
    pub fn normal_rank(&self) -> usize {
        self.ambient_dim() - self.dim
    }

    pub fn map_point(&self, q: &[f64]) -> Vec<f64> {
        (self.map)(&Jet::seed(q, 0)).iter().map(|j| j.value()).collect()
    }
}

pub const EMBEDDING_NAMES: [&str; 5] = [
    "r3-in-r5-sasakian",
    "h3-in-h5-kenmotsu",
    "slice-anti-invariant",
    "circle-calibration",
    "identity-flat-3",
];

pub fn builtin_embedding(name: &str) -> Result<EmbeddingModel> {
    let make = |ambient: &str, dim: usize, sample_box: Vec<(f64, f64)>, f: EmbedFn| -> Result<EmbeddingModel> {
        Ok(EmbeddingModel {
            name: name.to_string(),
            ambient: crate::catalog::builtin_space(ambient)?,
            dim,
            map: f,
            sample_box,
        })
    };
    match name {
        // (x, y, z) -> (x, y, 0, 0, z): the first Sasakian block.
        "r3-in-r5-sasakian" => make(
            "sasakian-r5",
            3,
            vec![(-1.0, 1.0); 3],
            Arc::new(|c: &[Jet]| {
                let zero = Jet::constant(c[0].dim(), 0.0);
                vec![c[0].clone(), c[1].clone(), zero.clone(), zero, c[2].clone()]
            }),
        ),
        // (t, x, y) -> (t, x, y, 0, 0): the first warped block.
        "h3-in-h5-kenmotsu" => make(
            "kenmotsu-h5",
            3,
            vec![(-1.0, 1.0); 3],
            Arc::new(|c: &[Jet]| {
                let zero = Jet::constant(c[0].dim(), 0.0);
                vec![c[0].clone(), c[1].clone(), c[2].clone(), zero.clone(), zero]
            }),
        ),
        // (x1, z) -> (x1, 0, 0, 0, z): phi of the x1 direction leaves the
        // tangent space, so this slice is not invariant.
        "slice-anti-invariant" => make(
            "sasakian-r5",
            2,
            vec![(-1.0, 1.0); 2],
            Arc::new(|c: &[Jet]| {
                let zero = Jet::constant(c[0].dim(), 0.0);
                vec![c[0].clone(), zero.clone(), zero.clone(), zero, c[1].clone()]
            }),
        ),
        // Unit circle in the flat (x, y) plane; calibration case with
        // |sigma(T, T)| = 1 for unit tangent T.
        "circle-calibration" => make(
            "cosymplectic-flat-3",
            1,
            vec![(-3.0, 3.0)],
            Arc::new(|c: &[Jet]| {
                let zero = Jet::constant(c[0].dim(), 0.0);
                vec![c[0].cos(), c[0].sin(), zero]
            }),
        ),
        // Identity chart of the flat model; zero-rank normal bundle.
        "identity-flat-3" => make(
            "cosymplectic-flat-3",
            3,
            vec![(-1.0, 1.0); 3],
            Arc::new(|c: &[Jet]| c.to_vec()),
        ),
        _ => Err(GeometryError::UnknownEmbedding {
            name: name.to_string(),
            available: EMBEDDING_NAMES.join(", "),
        }),
    }
}

/// Tangent and normal frames along the embedding in the jet ring.
/// `tangents[a][A]` are the raw Jacobian columns; `onb_tangents` their
/// Gram-Schmidt orthonormalization; `normals[nu][A]` an orthonormal
/// normal frame picked from the ambient coordinate directions in index
/// order (deterministic).
pub struct FrameJets {
    pub image: Vec<Jet>,
    pub ambient_metric: Vec<Jet>,
    pub tangents: Vec<Vec<Jet>>,
    pub onb_tangents: Vec<Vec<Jet>>,
    pub normals: Vec<Vec<Jet>>,
}

impl FrameJets {
    pub fn ambient_dim(&self) -> usize {
        self.image.len()
    }

    fn metric_entry(&self, a: usize, b: usize) -> &Jet {
        &self.ambient_metric[a * self.ambient_dim() + b]
    }

    /// Ambient inner product of two component-jet vectors.
    pub fn inner(&self, u: &[Jet], v: &[Jet]) -> Jet {
        let d = self.ambient_dim();
        let mut acc = Jet::constant(u[0].dim(), 0.0);
        for a in 0..d {
            for b in 0..d {
                acc = acc.add(&self.metric_entry(a, b).mul(&u[a]).mul(&v[b]));
            }
        }
        acc
    }

    /// Value-level inner product.
    pub fn inner_val(&self, u: &[f64], v: &[f64]) -> f64 {
        let d = self.ambient_dim();
        let mut acc = 0.0;
        for a in 0..d {
            for b in 0..d {
                acc += self.metric_entry(a, b).value() * u[a] * v[b];
            }
        }
        acc
    }
}

fn scale_sub(u: &[Jet], v: &[Jet], c: &Jet) -> Vec<Jet> {
    u.iter().zip(v).map(|(ui, vi)| ui.sub(&c.mul(vi))).collect()
}

/// Builds the adapted frame at `q` with jets of the given coordinate
/// order. Fails with an immersion error when the Jacobian loses rank.
pub fn frame_jets(e: &EmbeddingModel, q: &[f64], order: usize) -> Result<FrameJets> {
    let seeds = Jet::seed(q, order + 1);
    let image: Vec<Jet> = (e.map)(&seeds);
    let dd = e.ambient_dim();
    assert_eq!(image.len(), dd, "embedding image dimension mismatch");
    let ambient_metric = e.ambient.structure.metric.components.eval_at_jets(&image);

    let tangents: Vec<Vec<Jet>> = (0..e.dim)
        .map(|a| image.iter().map(|x| x.partial(a)).collect())
        .collect();

    let mut fr = FrameJets {
        image,
        ambient_metric,
        tangents,
        onb_tangents: Vec::new(),
        normals: Vec::new(),
    };

    // Modified Gram-Schmidt over the jet ring; pivot decisions are made
    // on values, so the frame is analytic wherever the pivot pattern is
    // locally constant.
    for a in 0..e.dim {
        let mut v = fr.tangents[a].clone();
        for t in &fr.onb_tangents {
            let c = fr.inner(&v, t);
            v = scale_sub(&v, t, &c);
        }
        let n2 = fr.inner(&v, &v);
        if n2.value() <= 1e-14 {
            return Err(GeometryError::ImmersionFailure {
                point: q.to_vec(),
                rank: a,
                need: e.dim,
            });
        }
        let inv_norm = n2.sqrt().recip();
        fr.onb_tangents.push(v.iter().map(|x| x.mul(&inv_norm)).collect());
    }

    let rank = e.normal_rank();
    for basis_index in 0..dd {
        if fr.normals.len() == rank {
            break;
        }
        let mut v: Vec<Jet> = (0..dd)
            .map(|a| Jet::constant(seeds[0].dim(), if a == basis_index { 1.0 } else { 0.0 }))
            .collect();
        for t in fr.onb_tangents.iter().chain(fr.normals.iter()) {
            let c = fr.inner(&v, t);
            v = scale_sub(&v, t, &c);
        }
        let n2 = fr.inner(&v, &v);
        if n2.value() > 1e-12 {
            let inv_norm = n2.sqrt().recip();
            fr.normals.push(v.iter().map(|x| x.mul(&inv_norm)).collect());
        }
    }
    if fr.normals.len() != rank {
        return Err(GeometryError::Unsupported(format!(
            "could not complete a normal frame at {q:?}: found {} of {rank}",
            fr.normals.len()
        )));
    }
    Ok(fr)
}

/// `J[a][A] = d(image^A)/d(q^a)` as plain values.
pub fn jacobian(e: &EmbeddingModel, q: &[f64]) -> Result<Vec<Vec<f64>>> {
    let fr = frame_jets(e, q, 0)?;
    Ok(fr
        .tangents
        .iter()
        .map(|t| t.iter().map(|j| j.value()).collect())
        .collect())
}

/// Pullback metric `G_ab = g(T_a, T_b)` at `q`.
pub fn induced_metric(e: &EmbeddingModel, q: &[f64]) -> Result<TensorValue> {
    let fr = frame_jets(e, q, 0)?;
    let mut out = TensorValue::zeros(e.dim, &[Variance::Down, Variance::Down]);
    for a in 0..e.dim {
        for b in 0..e.dim {
            out.set(&[a, b], fr.inner(&fr.tangents[a], &fr.tangents[b]).value());
        }
    }
    let (_, _cond) = linalg::invert(out.entries(), e.dim, q)?;
    crate::linalg::check_positive_definite(out.entries(), e.dim, q)?;
    Ok(out)
}

/// The pullback metric as a model of its own, so every chart-level
/// operation (Christoffel symbols, curvature, covariant derivatives)
/// applies to the submanifold unchanged. The component closure re-seeds
/// internally (plain-seed restriction, as with the other derived fields).
pub fn induced_metric_model(e: &EmbeddingModel) -> MetricModel {
    let em = e.clone();
    let m = e.dim;
    let components = TensorField::new(
        m,
        &[Variance::Down, Variance::Down],
        Arc::new(move |coords: &[Jet]| {
            crate::manifold::debug_assert_plain_seed(coords);
            let q: Vec<f64> = coords.iter().map(|c| c.value()).collect();
            let fr = frame_jets(&em, &q, coords[0].order())
                .expect("immersion failure inside induced metric");
            let mut out = Vec::with_capacity(m * m);
            for a in 0..m {
                for b in 0..m {
                    out.push(fr.inner(&fr.tangents[a], &fr.tangents[b]));
                }
            }
            out
        }),
    );
    MetricModel::new(
        &format!("{}-induced", e.name),
        m,
        components,
        e.sample_box.clone(),
    )
}

/// Second fundamental form data at a point, expressed in the
/// deterministic normal frame, together with the frame and the ambient
/// acceleration it was split from.
pub struct SecondFundamentalForm {
    /// `sigma[a][b][nu] = g(H_ab, N_nu)`.
    pub frame_components: Vec<Vec<Vec<f64>>>,
    /// Ambient components of `sigma(d_a, d_b)`.
    pub ambient_components: Vec<Vec<Vec<f64>>>,
    /// Worst deviation of `H_ab - sigma_ab` from the induced-connection
    /// tangential part (the Gauss split cross-check).
    pub gauss_split_residual: f64,
}

/// Ambient Christoffel symbols along the image, as order-1 jets in the
/// submanifold chart. The ambient jets live in the ambient chart, so
/// they are pushed through the embedding by the chain rule rather than
/// evaluated at composed jets.
fn ambient_christoffel_along(e: &EmbeddingModel, fr: &FrameJets) -> Result<Vec<Jet>> {
    let dd = e.ambient_dim();
    let p: Vec<f64> = fr.image.iter().map(|j| j.value()).collect();
    let amb = crate::manifold::christoffel_jets_at(
        &e.ambient.structure.metric,
        &Jet::seed(&p, 2),
        &p,
    )?;
    Ok(amb
        .iter()
        .map(|aj| {
            let mut grad = vec![0.0; e.dim];
            for (a, ga) in grad.iter_mut().enumerate() {
                for cap_a in 0..dd {
                    *ga += aj.d1(cap_a) * fr.image[cap_a].d1(a);
                }
            }
            Jet::linear(e.dim, aj.value(), &grad)
        })
        .collect())
}

/// Ambient acceleration `H_ab = dd(image) + ambient Christoffel terms`,
/// as order-1 jets, from a frame of order 2.
fn acceleration_jets(e: &EmbeddingModel, fr: &FrameJets) -> Result<Vec<Vec<Vec<Jet>>>> {
    let dd = e.ambient_dim();
    let gamma = ambient_christoffel_along(e, fr)?;
    let idx = |k: usize, i: usize, j: usize| (k * dd + i) * dd + j;
    let mut out = Vec::with_capacity(e.dim);
    for a in 0..e.dim {
        let mut row = Vec::with_capacity(e.dim);
        for b in 0..e.dim {
            let mut h = Vec::with_capacity(dd);
            for cap_a in 0..dd {
                let mut acc = fr.image[cap_a].partial(a).partial(b);
                for cap_b in 0..dd {
                    for cap_c in 0..dd {
                        acc = acc.add(
                            &gamma[idx(cap_a, cap_b, cap_c)]
                                .mul(&fr.tangents[a][cap_b])
                                .mul(&fr.tangents[b][cap_c]),
                        );
                    }
                }
                h.push(acc);
            }
            row.push(h);
        }
        out.push(row);
    }
    Ok(out)
}

pub fn second_fundamental_form(e: &EmbeddingModel, q: &[f64]) -> Result<SecondFundamentalForm> {
    let fr = frame_jets(e, q, 2)?;
    let acc = acceleration_jets(e, &fr)?;
    let dd = e.ambient_dim();
    let rank = e.normal_rank();

    let mut frame_components = vec![vec![vec![0.0; rank]; e.dim]; e.dim];
    let mut ambient_components = vec![vec![vec![0.0; dd]; e.dim]; e.dim];
    for a in 0..e.dim {
        for b in 0..e.dim {
            let h: Vec<f64> = acc[a][b].iter().map(|j| j.value()).collect();
            for nu in 0..rank {
                let nval: Vec<f64> = fr.normals[nu].iter().map(|j| j.value()).collect();
                let c = fr.inner_val(&h, &nval);
                frame_components[a][b][nu] = c;
                for cap_a in 0..dd {
                    ambient_components[a][b][cap_a] += c * nval[cap_a];
                }
            }
        }
    }

    // Gauss split: H_ab minus its normal part must equal the induced
    // Levi-Civita connection applied to the coordinate fields.
    let model = induced_metric_model(e);
    let gamma_m = crate::manifold::christoffel(&model, q)?;
    let mut worst: f64 = 0.0;
    for a in 0..e.dim {
        for b in 0..e.dim {
            for cap_a in 0..dd {
                let mut tangential = acc[a][b][cap_a].value() - ambient_components[a][b][cap_a];
                for c in 0..e.dim {
                    tangential -= gamma_m.get(&[c, a, b]) * fr.tangents[c][cap_a].value();
                }
                worst = worst.max(tangential.abs());
            }
        }
    }

    Ok(SecondFundamentalForm {
        frame_components,
        ambient_components,
        gauss_split_residual: worst,
    })
}

/// Everything the normal bundle contributes at one point: second
/// fundamental form components and their chart derivatives in the
/// deterministic normal frame, the normal connection coefficients, its
/// curvature, and the ambient `phi` action on the frame.
pub struct SigmaBundle {
    /// `sigma[a][b][nu]`.
    pub sigma: Vec<Vec<Vec<f64>>>,
    /// `d_sigma[c][a][b][nu] = d_c sigma[a][b][nu]` (plain chart
    /// derivative of the frame components).
    pub d_sigma: Vec<Vec<Vec<Vec<f64>>>>,
    /// `omega[c][nu][mu]`: normal connection, `D_c N_mu = omega[c][nu][mu] N_nu`
    /// up to tangential parts.
    pub omega: Vec<Vec<Vec<f64>>>,
    /// `rperp[c][d][nu][mu]`: curvature of the normal connection.
    pub rperp: Vec<Vec<Vec<Vec<f64>>>>,
    /// `j_normal[nu][mu] = g(phi N_mu, N_nu)`; on an invariant
    /// submanifold this is a complex structure of the normal bundle.
    pub j_normal: Vec<Vec<f64>>,
}

pub fn sigma_bundle(e: &EmbeddingModel, q: &[f64]) -> Result<SigmaBundle> {
    let fr = frame_jets(e, q, 2)?;
    let acc = acceleration_jets(e, &fr)?;
    let dd = e.ambient_dim();
    let m = e.dim;
    let rank = e.normal_rank();

    let mut sigma = vec![vec![vec![0.0; rank]; m]; m];
    let mut d_sigma = vec![vec![vec![vec![0.0; rank]; m]; m]; m];
    for a in 0..m {
        for b in 0..m {
            for nu in 0..rank {
                let s = fr.inner(&acc[a][b], &fr.normals[nu]);
                sigma[a][b][nu] = s.value();
                for c in 0..m {
                    d_sigma[c][a][b][nu] = s.d1(c);
                }
            }
        }
    }

    // Normal connection from the frame derivative: the ambient covariant
    // derivative of N_mu along d_c, paired with N_nu.
    let gamma = ambient_christoffel_along(e, &fr)?;
    let gidx = |k: usize, i: usize, j: usize| (k * dd + i) * dd + j;
    let mut omega_jets: Vec<Vec<Vec<Jet>>> = Vec::with_capacity(m);
    for c in 0..m {
        let mut per_mu = Vec::with_capacity(rank);
        for mu in 0..rank {
            let mut dn = Vec::with_capacity(dd);
            for cap_a in 0..dd {
                let mut acc_j = fr.normals[mu][cap_a].partial(c);
                for cap_b in 0..dd {
                    for cap_c in 0..dd {
                        acc_j = acc_j.add(
                            &gamma[gidx(cap_a, cap_b, cap_c)]
                                .mul(&fr.tangents[c][cap_b])
                                .mul(&fr.normals[mu][cap_c]),
                        );
                    }
                }
                dn.push(acc_j);
            }
            per_mu.push(dn);
        }
        omega_jets.push(per_mu);
    }
    let mut omega = vec![vec![vec![0.0; rank]; rank]; m];
    let mut d_omega = vec![vec![vec![vec![0.0; rank]; rank]; m]; m];
    for c in 0..m {
        for nu in 0..rank {
            for mu in 0..rank {
                let w = fr.inner(&omega_jets[c][mu], &fr.normals[nu]);
                omega[c][nu][mu] = w.value();
                for d in 0..m {
                    d_omega[d][c][nu][mu] = w.d1(d);
                }
            }
        }
    }

    let mut rperp = vec![vec![vec![vec![0.0; rank]; rank]; m]; m];
    for c in 0..m {
        for d in 0..m {
            for nu in 0..rank {
                for mu in 0..rank {
                    let mut v = d_omega[c][d][nu][mu] - d_omega[d][c][nu][mu];
                    for rho in 0..rank {
                        v += omega[c][nu][rho] * omega[d][rho][mu]
                            - omega[d][nu][rho] * omega[c][rho][mu];
                    }
                    rperp[c][d][nu][mu] = v;
                }
            }
        }
    }

    let p: Vec<f64> = fr.image.iter().map(|j| j.value()).collect();
    let s = e.ambient.structure.at(&p)?;
    let mut j_normal = vec![vec![0.0; rank]; rank];
    for mu in 0..rank {
        let nval: Vec<f64> = fr.normals[mu].iter().map(|j| j.value()).collect();
        let mut ph = vec![0.0; dd];
        for i in 0..dd {
            for jj in 0..dd {
                ph[i] += s.phi.get(&[i, jj]) * nval[jj];
            }
        }
        for nu in 0..rank {
            let nv: Vec<f64> = fr.normals[nu].iter().map(|j| j.value()).collect();
            j_normal[nu][mu] = fr.inner_val(&ph, &nv);
        }
    }

    Ok(SigmaBundle {
        sigma,
        d_sigma,
        omega,
        rperp,
        j_normal,
    })
}

/// `A_N` on the tangent space: `g(A_N X, Y) = g(sigma(X, Y), N)`.
/// `n_ambient` must be normal at `q` (tangential part below `1e-8`
/// relative to its norm).
pub fn shape_operator(e: &EmbeddingModel, n_ambient: &[f64], q: &[f64]) -> Result<TensorValue> {
    let fr = frame_jets(e, q, 1)?;
    let nn = fr.inner_val(n_ambient, n_ambient).max(0.0).sqrt();
    let mut tangential: f64 = 0.0;
    for t in &fr.onb_tangents {
        let tv: Vec<f64> = t.iter().map(|j| j.value()).collect();
        tangential = tangential.max(fr.inner_val(n_ambient, &tv).abs());
    }
    if tangential > 1e-8 * nn.max(1e-300) {
        return Err(GeometryError::NotNormal { tangential });
    }

    let sff = second_fundamental_form(e, q)?;
    let g = induced_metric(e, q)?;
    let (ginv, _) = linalg::invert(g.entries(), e.dim, q)?;
    let mut out = TensorValue::zeros(e.dim, &[Variance::Up, Variance::Down]);
    for a in 0..e.dim {
        for b in 0..e.dim {
            let mut v = 0.0;
            for c in 0..e.dim {
                let s_n = fr.inner_val(&sff.ambient_components[c][b], n_ambient);
                v += ginv[a * e.dim + c] * s_n;
            }
            out.set(&[a, b], v);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct InvarianceReport {
    pub xi_normal: f64,
    pub phi_normal: f64,
    pub invariant: bool,
}

/// Measures whether `xi` is tangent and `phi` preserves the tangent
/// space at `q`; both residuals are norms of normal components.
pub fn check_invariant(e: &EmbeddingModel, q: &[f64]) -> Result<InvarianceReport> {
    let fr = frame_jets(e, q, 0)?;
    let p: Vec<f64> = fr.image.iter().map(|j| j.value()).collect();
    let s = e.ambient.structure.at(&p)?;
    let dd = e.ambient_dim();

    let normal_part_norm = |v: &[f64]| -> f64 {
        let mut acc = 0.0f64;
        for nrm in &fr.normals {
            let nval: Vec<f64> = nrm.iter().map(|j| j.value()).collect();
            let c = fr.inner_val(v, &nval);
            acc += c * c;
        }
        acc.sqrt()
    };

    let xi_vec: Vec<f64> = (0..dd).map(|a| s.xi.get(&[a])).collect();
    let xi_normal = normal_part_norm(&xi_vec);

    let mut phi_normal: f64 = 0.0;
    for t in &fr.tangents {
        let tv: Vec<f64> = t.iter().map(|j| j.value()).collect();
        let mut ph = vec![0.0; dd];
        for i in 0..dd {
            for j in 0..dd {
                ph[i] += s.phi.get(&[i, j]) * tv[j];
            }
        }
        phi_normal = phi_normal.max(normal_part_norm(&ph));
    }

    Ok(InvarianceReport {
        xi_normal,
        phi_normal,
        invariant: xi_normal < 1e-8 && phi_normal < 1e-8,
    })
}

/// `true` iff the second fundamental form stays below `tol` at `samples`
/// seeded points.
pub fn is_totally_geodesic(e: &EmbeddingModel, samples: usize, tol: f64) -> Result<bool> {
    for q in crate::manifold::sample_points(&e.sample_box, samples, 42) {
        let sff = second_fundamental_form(e, &q)?;
        for row in &sff.frame_components {
            for s in row {
                for &v in s {
                    if v.abs() >= tol {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// The induced almost contact metric structure of an invariant
/// submanifold: pullback metric, tangential projection of `phi`,
/// tangential coordinates of `xi`, pullback of `eta`. Fields are
/// analytic closures over the submanifold chart (plain-seed
/// restriction, as with the induced metric).
pub fn induced_contact_structure(e: &EmbeddingModel) -> ContactStructure {
    let m = e.dim;
    let metric = induced_metric_model(e);

    // Shared per-call assembly: tangential coordinates of an ambient
    // vector field along the image, via the induced-metric inverse.
    let tangential_coordinates = {
        let em = e.clone();
        move |coords: &[Jet], ambient_vec: &dyn Fn(&FrameJets) -> Vec<Vec<Jet>>| -> Vec<Vec<Jet>> {
            let q: Vec<f64> = coords.iter().map(|c| c.value()).collect();
            let fr = frame_jets(&em, &q, coords[0].order())
                .expect("immersion failure inside induced structure");
            let mut gram = Vec::with_capacity(m * m);
            for a in 0..m {
                for b in 0..m {
                    gram.push(fr.inner(&fr.tangents[a], &fr.tangents[b]));
                }
            }
            let ginv = linalg::invert_jets(&gram, m, &q).expect("degenerate induced metric");
            let vecs = ambient_vec(&fr);
            vecs.iter()
                .map(|v| {
                    let proj: Vec<Jet> = (0..m).map(|a| fr.inner(v, &fr.tangents[a])).collect();
                    (0..m)
                        .map(|a| {
                            let mut acc = Jet::constant(coords[0].dim(), 0.0);
                            for b in 0..m {
                                acc = acc.add(&ginv[a * m + b].mul(&proj[b]));
                            }
                            acc
                        })
                        .collect()
                })
                .collect()
        }
    };

    let phi = {
        let em = e.clone();
        let tc = tangential_coordinates.clone();
        TensorField::new(
            m,
            &[Variance::Up, Variance::Down],
            Arc::new(move |coords: &[Jet]| {
                let phi_field = em.ambient.structure.phi.clone();
                let dd = em.ambient_dim();
                let cols = tc(coords, &|fr: &FrameJets| {
                    let phi_jets = phi_field.eval_at_jets(&fr.image);
                    (0..em.dim)
                        .map(|b| {
                            (0..dd)
                                .map(|i| {
                                    let mut acc = Jet::constant(coords[0].dim(), 0.0);
                                    for j in 0..dd {
                                        acc = acc
                                            .add(&phi_jets[i * dd + j].mul(&fr.tangents[b][j]));
                                    }
                                    acc
                                })
                                .collect()
                        })
                        .collect()
                });
                let mut out = Vec::with_capacity(m * m);
                for a in 0..m {
                    for b in 0..m {
                        out.push(cols[b][a].clone());
                    }
                }
                out
            }),
        )
    };

    let xi = {
        let em = e.clone();
        let tc = tangential_coordinates.clone();
        TensorField::new(
            m,
            &[Variance::Up],
            Arc::new(move |coords: &[Jet]| {
                let xi_field = em.ambient.structure.xi.clone();
                let cols = tc(coords, &|fr: &FrameJets| {
                    vec![xi_field.eval_at_jets(&fr.image)]
                });
                cols[0].clone()
            }),
        )
    };

    let eta = {
        let em = e.clone();
        TensorField::new(
            m,
            &[Variance::Down],
            Arc::new(move |coords: &[Jet]| {
                let q: Vec<f64> = coords.iter().map(|c| c.value()).collect();
                let fr = frame_jets(&em, &q, coords[0].order())
                    .expect("immersion failure inside induced structure");
                let eta_jets = em.ambient.structure.eta.eval_at_jets(&fr.image);
                (0..em.dim)
                    .map(|a| {
                        let mut acc = Jet::constant(coords[0].dim(), 0.0);
                        for i in 0..em.ambient_dim() {
                            acc = acc.add(&eta_jets[i].mul(&fr.tangents[a][i]));
                        }
                        acc
                    })
                    .collect()
            }),
        )
    };

    ContactStructure::new(metric, phi, xi, eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::sample_points;

    #[test]
    fn unknown_embedding_lists_catalog() {
        let err = builtin_embedding("moebius").unwrap_err().to_string();
        assert!(err.contains("circle-calibration"), "{err}");
    }

    #[test]
    fn identity_embedding_restricts_ambient_metric() {
        let e = builtin_embedding("identity-flat-3").unwrap();
        let q = [0.3, -0.2, 0.5];
        let g = induced_metric(&e, &q).unwrap();
        let ambient = e.ambient.structure.metric.metric_at(&q).unwrap();
        assert!(g.sub(&ambient).max_abs() < 1e-14);
    }

    #[test]
    fn sasakian_block_pullback_matches_small_model() {
        let e = builtin_embedding("r3-in-r5-sasakian").unwrap();
        let small = crate::catalog::builtin_space("sasakian-r3").unwrap();
        for q in sample_points(&e.sample_box, 10, 5) {
            let g = induced_metric(&e, &q).unwrap();
            let expect = small.structure.metric.metric_at(&q).unwrap();
            assert!(g.sub(&expect).max_abs() < 1e-13, "at {q:?}");
        }
    }

    #[test]
    fn warped_strip_pullback_hand_values() {
        // (t, x) -> (t, x, 0) into the 3-dimensional warped model:
        // induced metric dt^2 + e^{2t} dx^2.
        let e = EmbeddingModel {
            name: "strip".into(),
            ambient: crate::catalog::builtin_space("kenmotsu-h3").unwrap(),
            dim: 2,
            map: Arc::new(|c: &[Jet]| {
                vec![c[0].clone(), c[1].clone(), Jet::constant(c[0].dim(), 0.0)]
            }),
            sample_box: vec![(-1.0, 1.0); 2],
        };
        let q = [0.4, -0.7];
        let g = induced_metric(&e, &q).unwrap();
        assert!((g.get(&[0, 0]) - 1.0).abs() < 1e-14);
        assert!((g.get(&[1, 1]) - (2.0 * q[0]).exp()).abs() < 1e-12);
        assert!(g.get(&[0, 1]).abs() < 1e-14);
    }

    #[test]
    fn rank_deficient_jacobian_is_an_immersion_failure() {
        let e = EmbeddingModel {
            name: "cusp".into(),
            ambient: crate::catalog::builtin_space("cosymplectic-flat-3").unwrap(),
            dim: 1,
            map: Arc::new(|c: &[Jet]| {
                let zero = Jet::constant(c[0].dim(), 0.0);
                vec![c[0].mul(&c[0]), zero.clone(), zero]
            }),
            sample_box: vec![(-1.0, 1.0)],
        };
        let err = induced_metric(&e, &[0.0]).unwrap_err();
        assert!(matches!(err, GeometryError::ImmersionFailure { .. }));
    }

    #[test]
    fn totally_geodesic_pairs_have_vanishing_sigma() {
        for name in ["r3-in-r5-sasakian", "h3-in-h5-kenmotsu"] {
            let e = builtin_embedding(name).unwrap();
            for q in sample_points(&e.sample_box, 10, 7) {
                let sff = second_fundamental_form(&e, &q).unwrap();
                let mut worst: f64 = 0.0;
                for row in &sff.frame_components {
                    for s in row {
                        for &v in s {
                            worst = worst.max(v.abs());
                        }
                    }
                }
                assert!(worst < 1e-8, "{name} sigma {worst} at {q:?}");
                assert!(sff.gauss_split_residual < 1e-10, "{name} gauss split");
            }
            assert!(is_totally_geodesic(&e, 20, 1e-8).unwrap());
        }
    }

    #[test]
    fn identity_embedding_sigma_is_exactly_zero() {
        let e = builtin_embedding("identity-flat-3").unwrap();
        let sff = second_fundamental_form(&e, &[0.1, 0.2, 0.3]).unwrap();
        assert!(sff.frame_components.iter().all(|r| r.iter().all(|s| s.is_empty())));
        for row in &sff.ambient_components {
            for s in row {
                assert!(s.iter().all(|&v| v == 0.0));
            }
        }
        assert!(is_totally_geodesic(&e, 5, 1e-12).unwrap());
    }

    #[test]
    fn circle_curvature_calibration() {
        let e = builtin_embedding("circle-calibration").unwrap();
        for q in sample_points(&e.sample_box, 10, 11) {
            let sff = second_fundamental_form(&e, &q).unwrap();
            // The tangent d_theta is unit, so |sigma(T, T)| is the
            // classical curvature of the unit circle.
            let fr = frame_jets(&e, &q, 0).unwrap();
            let s = &sff.ambient_components[0][0];
            let norm = fr.inner_val(s, s).sqrt();
            assert!((norm - 1.0).abs() < 1e-10, "curvature {norm} at {q:?}");
            assert!(sff.gauss_split_residual < 1e-10);
            assert!(!is_totally_geodesic(&e, 5, 1e-3).unwrap());
        }
    }

    #[test]
    fn circle_shape_operator_is_plus_minus_identity() {
        let e = builtin_embedding("circle-calibration").unwrap();
        let q = [0.7];
        let fr = frame_jets(&e, &q, 0).unwrap();
        let n: Vec<f64> = fr.normals[0].iter().map(|j| j.value()).collect();
        let a = shape_operator(&e, &n, &q).unwrap();
        assert!((a.get(&[0, 0]).abs() - 1.0).abs() < 1e-10, "A = {}", a.get(&[0, 0]));
    }

    #[test]
    fn shape_operator_compatible_with_sigma() {
        let e = builtin_embedding("circle-calibration").unwrap();
        for q in sample_points(&e.sample_box, 5, 3) {
            let fr = frame_jets(&e, &q, 0).unwrap();
            let sff = second_fundamental_form(&e, &q).unwrap();
            let g = induced_metric(&e, &q).unwrap();
            for nu in 0..e.normal_rank() {
                let n: Vec<f64> = fr.normals[nu].iter().map(|j| j.value()).collect();
                let a = shape_operator(&e, &n, &q).unwrap();
                for x in 0..e.dim {
                    for y in 0..e.dim {
                        let lhs = fr.inner_val(&sff.ambient_components[x][y], &n);
                        let mut rhs = 0.0;
                        for c in 0..e.dim {
                            rhs += g.get(&[c, y]) * a.get(&[c, x]);
                        }
                        assert!((lhs - rhs).abs() < 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn shape_operator_rejects_tangential_vector() {
        let e = builtin_embedding("circle-calibration").unwrap();
        let q = [0.4];
        let fr = frame_jets(&e, &q, 0).unwrap();
        let t: Vec<f64> = fr.tangents[0].iter().map(|j| j.value()).collect();
        let err = shape_operator(&e, &t, &q).unwrap_err();
        assert!(matches!(err, GeometryError::NotNormal { .. }));
    }

    #[test]
    fn invariance_classification() {
        for (name, expect) in [
            ("r3-in-r5-sasakian", true),
            ("h3-in-h5-kenmotsu", true),
            ("slice-anti-invariant", false),
            ("identity-flat-3", true),
        ] {
            let e = builtin_embedding(name).unwrap();
            for q in sample_points(&e.sample_box, 5, 13) {
                let rep = check_invariant(&e, &q).unwrap();
                assert_eq!(rep.invariant, expect, "{name} at {q:?}: {rep:?}");
            }
        }
    }

    #[test]
    fn normal_frames_are_orthonormal_and_normal() {
        for name in ["r3-in-r5-sasakian", "h3-in-h5-kenmotsu", "circle-calibration"] {
            let e = builtin_embedding(name).unwrap();
            for q in sample_points(&e.sample_box, 5, 17) {
                let fr = frame_jets(&e, &q, 0).unwrap();
                for (i, ni) in fr.normals.iter().enumerate() {
                    let niv: Vec<f64> = ni.iter().map(|j| j.value()).collect();
                    for t in &fr.tangents {
                        let tv: Vec<f64> = t.iter().map(|j| j.value()).collect();
                        assert!(fr.inner_val(&niv, &tv).abs() < 1e-10);
                    }
                    for (j, nj) in fr.normals.iter().enumerate() {
                        let njv: Vec<f64> = nj.iter().map(|j| j.value()).collect();
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert!((fr.inner_val(&niv, &njv) - expect).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn induced_structures_satisfy_contact_axioms() {
        for name in ["r3-in-r5-sasakian", "h3-in-h5-kenmotsu"] {
            let e = builtin_embedding(name).unwrap();
            let cs = induced_contact_structure(&e);
            for q in sample_points(&e.sample_box, 8, 19) {
                let res = cs.axiom_residual(&q).unwrap();
                assert!(res < 1e-10, "{name} induced axioms {res} at {q:?}");
            }
        }
    }

    #[test]
    fn normal_connection_is_metric_and_rperp_matches_ambient_curvature() {
        // With sigma = 0 the ambient curvature paired on two normals is
        // exactly the curvature of the normal connection; independent
        // route through the ambient curvature stack.
        for name in ["r3-in-r5-sasakian", "h3-in-h5-kenmotsu"] {
            let e = builtin_embedding(name).unwrap();
            let rank = e.normal_rank();
            for q in sample_points(&e.sample_box, 5, 23) {
                let sb = sigma_bundle(&e, &q).unwrap();
                for c in 0..e.dim {
                    for nu in 0..rank {
                        for mu in 0..rank {
                            assert!(
                                (sb.omega[c][nu][mu] + sb.omega[c][mu][nu]).abs() < 1e-9,
                                "{name} omega not antisymmetric"
                            );
                        }
                    }
                }

                let fr = frame_jets(&e, &q, 0).unwrap();
                let p: Vec<f64> = fr.image.iter().map(|j| j.value()).collect();
                let amb = crate::manifold::curvature_bundle(&e.ambient.structure.metric, &p)
                    .unwrap();
                let dd = e.ambient_dim();
                for c in 0..e.dim {
                    for d in 0..e.dim {
                        for nu in 0..rank {
                            for mu in 0..rank {
                                let mut rv = vec![0.0; dd];
                                for l in 0..dd {
                                    for i in 0..dd {
                                        for j in 0..dd {
                                            for k in 0..dd {
                                                rv[l] += amb.riemann13.get(&[l, i, j, k])
                                                    * fr.tangents[c][i].value()
                                                    * fr.tangents[d][j].value()
                                                    * fr.normals[mu][k].value();
                                            }
                                        }
                                    }
                                }
                                let nv: Vec<f64> =
                                    fr.normals[nu].iter().map(|j| j.value()).collect();
                                let expect = fr.inner_val(&rv, &nv);
                                assert!(
                                    (sb.rperp[c][d][nu][mu] - expect).abs() < 1e-7,
                                    "{name} rperp[{c}][{d}][{nu}][{mu}] = {} vs ambient {expect}",
                                    sb.rperp[c][d][nu][mu]
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn normal_phi_action_squares_to_minus_identity_when_invariant() {
        for name in ["r3-in-r5-sasakian", "h3-in-h5-kenmotsu"] {
            let e = builtin_embedding(name).unwrap();
            let rank = e.normal_rank();
            for q in sample_points(&e.sample_box, 5, 29) {
                let sb = sigma_bundle(&e, &q).unwrap();
                for i in 0..rank {
                    for j in 0..rank {
                        let mut v = 0.0;
                        for k in 0..rank {
                            v += sb.j_normal[i][k] * sb.j_normal[k][j];
                        }
                        let expect = if i == j { -1.0 } else { 0.0 };
                        assert!((v - expect).abs() < 1e-10, "{name} J^2 at {q:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn sigma_derivatives_match_finite_differences_on_ellipse() {
        let e = EmbeddingModel {
            name: "ellipse".into(),
            ambient: crate::catalog::builtin_space("cosymplectic-flat-3").unwrap(),
            dim: 1,
            map: Arc::new(|c: &[Jet]| {
                vec![c[0].cos().scale(2.0), c[0].sin(), Jet::constant(c[0].dim(), 0.0)]
            }),
            sample_box: vec![(-1.0, 1.0)],
        };
        let h = 1e-5;
        for q in sample_points(&e.sample_box, 6, 31) {
            let sb = sigma_bundle(&e, &q).unwrap();
            let plus = sigma_bundle(&e, &[q[0] + h]).unwrap();
            let minus = sigma_bundle(&e, &[q[0] - h]).unwrap();
            for nu in 0..e.normal_rank() {
                let fd = (plus.sigma[0][0][nu] - minus.sigma[0][0][nu]) / (2.0 * h);
                assert!(
                    (sb.d_sigma[0][0][0][nu] - fd).abs() < 1e-6,
                    "d_sigma {} vs fd {fd} at {q:?}",
                    sb.d_sigma[0][0][0][nu]
                );
            }
            assert!(sigma_bundle(&e, &q).unwrap().sigma[0][0].iter().any(|&v| v.abs() > 0.05));
        }
    }

    #[test]
    fn sigma_bundle_values_match_second_fundamental_form() {
        let e = builtin_embedding("circle-calibration").unwrap();
        for q in sample_points(&e.sample_box, 5, 37) {
            let sb = sigma_bundle(&e, &q).unwrap();
            let sff = second_fundamental_form(&e, &q).unwrap();
            for a in 0..e.dim {
                for b in 0..e.dim {
                    for nu in 0..e.normal_rank() {
                        assert!(
                            (sb.sigma[a][b][nu] - sff.frame_components[a][b][nu]).abs() < 1e-12
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn induced_curvature_of_warped_block_is_constant() {
        let e = builtin_embedding("h3-in-h5-kenmotsu").unwrap();
        let model = induced_metric_model(&e);
        let q = [0.3, -0.4, 0.6];
        let b = crate::manifold::curvature_bundle(&model, &q).unwrap();
        assert!((b.scalar - (-6.0)).abs() < 1e-9, "scalar {}", b.scalar);
    }
}
