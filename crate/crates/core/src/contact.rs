//! Almost contact metric structures and the three-coefficient curvature
//! ansatz of a generalized Sasakian space form:
//!
//! ```text
//! R(X,Y)Z = f1 { g(Y,Z)X - g(X,Z)Y }
//!         + f2 { g(X,phiZ)phiY - g(Y,phiZ)phiX + 2 g(X,phiY)phiZ }
//!         + f3 { eta(X)eta(Z)Y - eta(Y)eta(Z)X
//!              + g(X,Z)eta(Y)xi - g(Y,Z)eta(X)xi }
//! ```
//!
//! A model space couples a concrete chart realization (metric, phi, xi,
//! eta) with its (f1, f2, f3); validation measures how far the numeric
//! geometry is from every identity the ansatz implies.

use serde::Serialize;

use crate::error::{GeometryError, Result};
use crate::fields::TensorField;
use crate::manifold::{self, MetricModel};
use crate::tensor::{TensorValue, Variance};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GssfParams {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

impl GssfParams {
    pub fn new(f1: f64, f2: f64, f3: f64) -> Self {
        GssfParams { f1, f2, f3 }
    }

    /// The coefficient `f1 - f3` that governs every Reeb-direction
    /// identity; zero exactly for the cosymplectic case.
    pub fn reeb_coefficient(&self) -> f64 {
        self.f1 - self.f3
    }

    /// Scalar curvature the ansatz forces in dimension `2n + 1`.
    pub fn scalar_curvature(&self, n: usize) -> f64 {
        let n = n as f64;
        2.0 * n * ((2.0 * n + 1.0) * self.f1 + 3.0 * self.f2 - 2.0 * self.f3)
    }
}

/// An almost contact metric structure on a single chart of dimension
/// `2n + 1`: a (1,1) field `phi`, its Reeb vector `xi`, the dual 1-form
/// `eta`, all compatible with the metric.
#[derive(Clone)]
pub struct ContactStructure {
    pub metric: MetricModel,
    /// `phi[i, j] = (phi d_j)^i`.
    pub phi: TensorField,
    pub xi: TensorField,
    pub eta: TensorField,
    pub n: usize,
}

impl ContactStructure {
    pub fn new(metric: MetricModel, phi: TensorField, xi: TensorField, eta: TensorField) -> Self {
        let dim = metric.dim;
        assert!(dim % 2 == 1 && dim >= 3, "need odd dimension >= 3");
        assert_eq!(phi.slots(), &[Variance::Up, Variance::Down]);
        assert_eq!(xi.slots(), &[Variance::Up]);
        assert_eq!(eta.slots(), &[Variance::Down]);
        ContactStructure {
            metric,
            phi,
            xi,
            eta,
            n: (dim - 1) / 2,
        }
    }

    pub fn dim(&self) -> usize {
        self.metric.dim
    }

    /// All structure fields evaluated at one point.
    pub fn at(&self, p: &[f64]) -> Result<StructureAtPoint> {
        Ok(StructureAtPoint {
            g: self.metric.metric_at(p)?,
            phi: self.phi.eval(p)?,
            xi: self.xi.eval(p)?,
            eta: self.eta.eval(p)?,
        })
    }

    /// Worst deviation from the defining algebra at `p`:
    /// `eta(xi) = 1`, `phi xi = 0`, `eta . phi = 0`,
    /// `phi^2 = -I + eta (x) xi`, `g(phi X, phi Y) = g(X,Y) - eta(X)eta(Y)`,
    /// and `eta(X) = g(X, xi)`.
    pub fn axiom_residual(&self, p: &[f64]) -> Result<f64> {
        let s = self.at(p)?;
        let d = s.g.dim();
        let mut worst: f64 = (s.eta_of(&s.xi) - 1.0).abs();
        let phi_xi = s.apply_phi(&s.xi);
        worst = worst.max(phi_xi.max_abs());
        for j in 0..d {
            let ej = basis_vector(d, j);
            let phi_ej = s.apply_phi(&ej);
            worst = worst.max(s.eta_of(&phi_ej).abs());
            // phi^2 e_j + e_j - eta(e_j) xi = 0
            let mut sq = s.apply_phi(&phi_ej);
            sq = sq.add(&ej).sub(&s.xi.scale(s.eta_of(&ej)));
            worst = worst.max(sq.max_abs());
            // eta(e_j) = g(e_j, xi)
            worst = worst.max((s.eta_of(&ej) - s.inner(&ej, &s.xi)).abs());
            for k in 0..d {
                let ek = basis_vector(d, k);
                let phi_ek = s.apply_phi(&ek);
                let lhs = s.inner(&phi_ej, &phi_ek);
                let rhs = s.inner(&ej, &ek) - s.eta_of(&ej) * s.eta_of(&ek);
                worst = worst.max((lhs - rhs).abs());
            }
        }
        Ok(worst)
    }
}

/// Evaluated structure data at a point; all the ansatz algebra happens
/// against this.
pub struct StructureAtPoint {
    pub g: TensorValue,
    pub phi: TensorValue,
    pub xi: TensorValue,
    pub eta: TensorValue,
}

impl StructureAtPoint {
    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn apply_phi(&self, x: &TensorValue) -> TensorValue {
        apply_matrix(&self.phi, x)
    }

    pub fn eta_of(&self, x: &TensorValue) -> f64 {
        let d = self.dim();
        (0..d).map(|i| self.eta.get(&[i]) * x.get(&[i])).sum()
    }

    pub fn inner(&self, x: &TensorValue, y: &TensorValue) -> f64 {
        let d = self.dim();
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += self.g.get(&[i, j]) * x.get(&[i]) * y.get(&[j]);
            }
        }
        acc
    }

    pub fn norm(&self, x: &TensorValue) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }
}

/// `y^i = m[i, j] x^j` for a (1,1) value.
pub fn apply_matrix(m: &TensorValue, x: &TensorValue) -> TensorValue {
    let d = m.dim();
    let mut out = TensorValue::zeros(d, &[Variance::Up]);
    for i in 0..d {
        let mut v = 0.0;
        for j in 0..d {
            v += m.get(&[i, j]) * x.get(&[j]);
        }
        out.set(&[i], v);
    }
    out
}

pub fn basis_vector(dim: usize, i: usize) -> TensorValue {
    let mut v = TensorValue::zeros(dim, &[Variance::Up]);
    v.set(&[i], 1.0);
    v
}

/// A named chart realization together with its ansatz coefficients.
#[derive(Clone)]
pub struct ModelSpace {
    pub structure: ContactStructure,
    pub params: GssfParams,
    pub name: String,
}

impl std::fmt::Debug for ModelSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModelSpace")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("params", &self.params)
            .finish()
    }
}

impl ModelSpace {
    pub fn dim(&self) -> usize {
        self.structure.dim()
    }

    pub fn sample_box(&self) -> &[(f64, f64)] {
        &self.structure.metric.sample_box
    }
}

/// The ansatz right-hand side against already-evaluated structure data.
pub fn ansatz_at(
    params: &GssfParams,
    s: &StructureAtPoint,
    x: &TensorValue,
    y: &TensorValue,
    z: &TensorValue,
) -> TensorValue {
    let phi_x = s.apply_phi(x);
    let phi_y = s.apply_phi(y);
    let phi_z = s.apply_phi(z);
    let (ex, ey, ez) = (s.eta_of(x), s.eta_of(y), s.eta_of(z));

    // f1 { g(Y,Z) X - g(X,Z) Y }
    let mut out = x
        .scale(s.inner(y, z))
        .sub(&y.scale(s.inner(x, z)))
        .scale(params.f1);

    // f2 { g(X,phiZ) phiY - g(Y,phiZ) phiX + 2 g(X,phiY) phiZ }
    let block2 = phi_y
        .scale(s.inner(x, &phi_z))
        .sub(&phi_x.scale(s.inner(y, &phi_z)))
        .add(&phi_z.scale(2.0 * s.inner(x, &phi_y)));
    out = out.add(&block2.scale(params.f2));

    // f3 { eta(X)eta(Z) Y - eta(Y)eta(Z) X + g(X,Z)eta(Y) xi - g(Y,Z)eta(X) xi }
    let block3 = y
        .scale(ex * ez)
        .sub(&x.scale(ey * ez))
        .add(&s.xi.scale(s.inner(x, z) * ey - s.inner(y, z) * ex));
    out.add(&block3.scale(params.f3))
}

/// The ansatz curvature vector `R(X,Y)Z` at `p`.
pub fn gssf_ansatz(
    params: &GssfParams,
    cs: &ContactStructure,
    x: &TensorValue,
    y: &TensorValue,
    z: &TensorValue,
    p: &[f64],
) -> Result<TensorValue> {
    Ok(ansatz_at(params, &cs.at(p)?, x, y, z))
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualRow {
    pub check: String,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub rows: Vec<ResidualRow>,
    pub max_residual: f64,
    pub pass: bool,
}

impl ValidationReport {
    pub fn from_rows(rows: Vec<ResidualRow>, tol: f64) -> Self {
        let max_residual = rows.iter().fold(0.0f64, |m, r| m.max(r.residual));
        ValidationReport {
            rows,
            max_residual,
            pass: max_residual < tol,
        }
    }

    pub fn row(&self, check: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.check == check).map(|r| r.residual)
    }
}

/// Frame for residual sweeps: every coordinate vector, the Reeb vector,
/// and one phi-image to cover a generic non-coordinate direction.
fn residual_frame(s: &StructureAtPoint) -> Vec<TensorValue> {
    let d = s.dim();
    let mut frame: Vec<TensorValue> = (0..d).map(|j| basis_vector(d, j)).collect();
    frame.push(s.xi.clone());
    for j in 0..d {
        let img = s.apply_phi(&basis_vector(d, j));
        if img.max_abs() > 1e-8 {
            frame.push(img);
            break;
        }
    }
    frame
}

/// Measures every identity the ansatz implies against the numeric
/// geometry at `p`. Rows:
///
/// * `contact-axioms`: the defining algebra of the structure;
/// * `curvature-ansatz`: `R(X,Y)Z` versus the three-block formula over
///   all frame triples;
/// * `covariant-phi`: `(nabla_X phi)Y = (f1-f3)[g(X,Y) xi - eta(Y) X]`;
/// * `covariant-xi`: `nabla_X xi = -(f1-f3) phi X`;
/// * `ricci-form`: `S = (2n f1 + 3 f2 - f3) g - (3 f2 + (2n-1) f3) eta (x) eta`;
/// * `curvature-reeb`: `R(X,Y) xi = (f1-f3){eta(Y) X - eta(X) Y}`;
/// * `reeb-curvature-reeb`: `R(xi,X) xi = (f1-f3){eta(X) xi - X}`;
/// * `ricci-reeb`: `S(xi, xi) = 2n (f1-f3)`.
///
/// The two covariant rows hold for the Sasakian and cosymplectic models
/// but not for the warped-product ones, whose Reeb flow is not an
/// isometry of the transverse structure; their rows then report the true
/// defect rather than being skipped.
pub fn validate_gssf(space: &ModelSpace, p: &[f64], tol: f64) -> Result<ValidationReport> {
    let cs = &space.structure;
    let params = &space.params;
    let d = cs.dim();
    let n = cs.n as f64;
    let c = params.reeb_coefficient();
    let s = cs.at(p)?;
    let frame = residual_frame(&s);
    let bundle = manifold::curvature_bundle(&cs.metric, p)?;

    let curve = |x: &TensorValue, y: &TensorValue, z: &TensorValue| -> TensorValue {
        let mut out = TensorValue::zeros(d, &[Variance::Up]);
        for l in 0..d {
            let mut v = 0.0;
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        v += bundle.riemann13.get(&[l, i, j, k])
                            * x.get(&[i])
                            * y.get(&[j])
                            * z.get(&[k]);
                    }
                }
            }
            out.set(&[l], v);
        }
        out
    };
    let ricci_of = |x: &TensorValue, y: &TensorValue| -> f64 {
        let mut v = 0.0;
        for i in 0..d {
            for j in 0..d {
                v += bundle.ricci.get(&[i, j]) * x.get(&[i]) * y.get(&[j]);
            }
        }
        v
    };

    let mut rows = Vec::new();
    rows.push(ResidualRow {
        check: "contact-axioms".into(),
        residual: cs.axiom_residual(p)?,
    });

    let mut worst: f64 = 0.0;
    for x in &frame {
        for y in &frame {
            for z in &frame {
                let dev = curve(x, y, z).sub(&ansatz_at(params, &s, x, y, z));
                worst = worst.max(dev.max_abs());
            }
        }
    }
    rows.push(ResidualRow {
        check: "curvature-ansatz".into(),
        residual: worst,
    });

    let nabla_phi = manifold::covariant_derivative(&cs.phi, &cs.metric, p)?;
    let mut worst: f64 = 0.0;
    for x in &frame {
        for y in &frame {
            // (nabla_X phi) Y, components over l.
            let mut lhs = TensorValue::zeros(d, &[Variance::Up]);
            for l in 0..d {
                let mut v = 0.0;
                for cc in 0..d {
                    for j in 0..d {
                        v += nabla_phi.get(&[cc, l, j]) * x.get(&[cc]) * y.get(&[j]);
                    }
                }
                lhs.set(&[l], v);
            }
            let rhs = s
                .xi
                .scale(s.inner(x, y))
                .sub(&x.scale(s.eta_of(y)))
                .scale(c);
            worst = worst.max(lhs.sub(&rhs).max_abs());
        }
    }
    rows.push(ResidualRow {
        check: "covariant-phi".into(),
        residual: worst,
    });

    let nabla_xi = manifold::covariant_derivative(&cs.xi, &cs.metric, p)?;
    let mut worst: f64 = 0.0;
    for x in &frame {
        let mut lhs = TensorValue::zeros(d, &[Variance::Up]);
        for l in 0..d {
            let mut v = 0.0;
            for cc in 0..d {
                v += nabla_xi.get(&[cc, l]) * x.get(&[cc]);
            }
            lhs.set(&[l], v);
        }
        let rhs = s.apply_phi(x).scale(-c);
        worst = worst.max(lhs.sub(&rhs).max_abs());
    }
    rows.push(ResidualRow {
        check: "covariant-xi".into(),
        residual: worst,
    });

    let lead = 2.0 * n * params.f1 + 3.0 * params.f2 - params.f3;
    let tail = 3.0 * params.f2 + (2.0 * n - 1.0) * params.f3;
    let mut worst: f64 = 0.0;
    for x in &frame {
        for y in &frame {
            let rhs = lead * s.inner(x, y) - tail * s.eta_of(x) * s.eta_of(y);
            worst = worst.max((ricci_of(x, y) - rhs).abs());
        }
    }
    rows.push(ResidualRow {
        check: "ricci-form".into(),
        residual: worst,
    });

    let mut worst: f64 = 0.0;
    for x in &frame {
        for y in &frame {
            let lhs = curve(x, y, &s.xi);
            let rhs = x
                .scale(s.eta_of(y))
                .sub(&y.scale(s.eta_of(x)))
                .scale(c);
            worst = worst.max(lhs.sub(&rhs).max_abs());
        }
    }
    rows.push(ResidualRow {
        check: "curvature-reeb".into(),
        residual: worst,
    });

    let mut worst: f64 = 0.0;
    for x in &frame {
        let lhs = curve(&s.xi, x, &s.xi);
        let rhs = s.xi.scale(s.eta_of(x)).sub(x).scale(c);
        worst = worst.max(lhs.sub(&rhs).max_abs());
    }
    rows.push(ResidualRow {
        check: "reeb-curvature-reeb".into(),
        residual: worst,
    });

    rows.push(ResidualRow {
        check: "ricci-reeb".into(),
        residual: (ricci_of(&s.xi, &s.xi) - 2.0 * n * c).abs(),
    });

    Ok(ValidationReport::from_rows(rows, tol))
}

/// Sectional curvature of the plane spanned by `X` and `phi X`. `X` is
/// projected off the Reeb direction and unit-normalized internally; a
/// direction whose phi-image (after normalization) has norm below `1e-8`
/// spans no plane and errors out.
pub fn phi_sectional_curvature(space: &ModelSpace, x: &TensorValue, p: &[f64]) -> Result<f64> {
    let cs = &space.structure;
    let s = cs.at(p)?;
    let nx = s.norm(x);
    if nx < 1e-13 {
        return Err(GeometryError::DegeneratePlane { norm: nx });
    }
    let unit = x.scale(1.0 / nx);
    let phi_unit = s.apply_phi(&unit);
    let pn = s.norm(&phi_unit);
    if pn < 1e-8 {
        return Err(GeometryError::DegeneratePlane { norm: pn });
    }
    let u = unit.sub(&s.xi.scale(s.eta_of(&unit)));
    let u = u.scale(1.0 / s.norm(&u));
    let v = s.apply_phi(&u);

    let bundle = manifold::curvature_bundle(&cs.metric, p)?;
    let d = cs.dim();
    let mut num = 0.0;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for w in 0..d {
                    num += bundle.riemann04.get(&[i, j, k, w])
                        * u.get(&[i])
                        * v.get(&[j])
                        * v.get(&[k])
                        * u.get(&[w]);
                }
            }
        }
    }
    let den = s.inner(&u, &u) * s.inner(&v, &v) - s.inner(&u, &v).powi(2);
    if den.abs() < 1e-12 {
        return Err(GeometryError::DegeneratePlane { norm: den.abs() });
    }
    Ok(num / den)
}
