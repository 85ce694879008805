//! Built-in model spaces, one global chart each:
//!
//! * `cosymplectic-flat-3`: flat product metric on R^3, coefficients
//!   (0, 0, 0);
//! * `kenmotsu-h3`, `kenmotsu-h5`: hyperbolic space `dt^2 + e^{2t}(flat)`
//!   in horospherical coordinates with `xi = d_t`, coefficients
//!   (-1, 0, 0);
//! * `sasakian-r3`, `sasakian-r5`: the standard Sasakian structure on
//!   R^{2n+1} with `eta = (dz - sum y_i dx_i)/2`, `xi = 2 d_z`,
//!   `g = eta (x) eta + (1/4) sum(dx_i^2 + dy_i^2)`, coefficients
//!   (0, -1, -1) (constant phi-sectional curvature -3).

use std::sync::Arc;

use crate::contact::{ContactStructure, GssfParams, ModelSpace};
use crate::error::{GeometryError, Result};
use crate::fields::TensorField;
use crate::jet::Jet;
use crate::manifold::MetricModel;
use crate::tensor::Variance;

pub const BUILTIN_NAMES: [&str; 5] = [
    "cosymplectic-flat-3",
    "kenmotsu-h3",
    "kenmotsu-h5",
    "sasakian-r3",
    "sasakian-r5",
];

pub fn builtin_space(name: &str) -> Result<ModelSpace> {
    match name {
        "cosymplectic-flat-3" => Ok(cosymplectic_flat_3()),
        "kenmotsu-h3" => Ok(kenmotsu(1)),
        "kenmotsu-h5" => Ok(kenmotsu(2)),
        "sasakian-r3" => Ok(sasakian(1)),
        "sasakian-r5" => Ok(sasakian(2)),
        _ => Err(GeometryError::UnknownSpace {
            name: name.to_string(),
            available: BUILTIN_NAMES.join(", "),
        }),
    }
}

fn constant_field(dim: usize, slots: &[Variance], entries: Vec<f64>) -> TensorField {
    TensorField::new(
        dim,
        slots,
        Arc::new(move |c: &[Jet]| {
            entries
                .iter()
                .map(|&v| Jet::constant(c[0].dim(), v))
                .collect()
        }),
    )
}

/// Flat R^3 with `xi = d_z`; phi rotates the (x, y) plane.
fn cosymplectic_flat_3() -> ModelSpace {
    let d = 3;
    let mut g = vec![0.0; 9];
    for i in 0..3 {
        g[i * 3 + i] = 1.0;
    }
    let metric = MetricModel::new(
        "cosymplectic-flat-3",
        d,
        constant_field(d, &[Variance::Down, Variance::Down], g),
        vec![(-1.0, 1.0); d],
    );
    let mut phi = vec![0.0; 9];
    phi[1 * 3 + 0] = -1.0; // phi d_x = -d_y
    phi[0 * 3 + 1] = 1.0; // phi d_y = d_x
    let mut xi = vec![0.0; 3];
    xi[2] = 1.0;
    let mut eta = vec![0.0; 3];
    eta[2] = 1.0;
    ModelSpace {
        structure: ContactStructure::new(
            metric,
            constant_field(d, &[Variance::Up, Variance::Down], phi),
            constant_field(d, &[Variance::Up], xi),
            constant_field(d, &[Variance::Down], eta),
        ),
        params: GssfParams::new(0.0, 0.0, 0.0),
        name: "cosymplectic-flat-3".into(),
    }
}

/// Hyperbolic space `dt^2 + e^{2t} (dx_i^2 + dy_i^2)`, coordinates
/// `(t, x_1, y_1, ..., x_n, y_n)`; constant curvature -1.
fn kenmotsu(n: usize) -> ModelSpace {
    let d = 2 * n + 1;
    let name = format!("kenmotsu-h{d}");
    let metric = MetricModel::new(
        &name,
        d,
        TensorField::new(
            d,
            &[Variance::Down, Variance::Down],
            Arc::new(move |c: &[Jet]| {
                let e2t = c[0].scale(2.0).exp();
                let zero = Jet::constant(c[0].dim(), 0.0);
                let mut out = vec![zero; d * d];
                out[0] = Jet::constant(c[0].dim(), 1.0);
                for j in 1..d {
                    out[j * d + j] = e2t.clone();
                }
                out
            }),
        ),
        vec![(-1.0, 1.0); d],
    );
    let mut phi = vec![0.0; d * d];
    for i in 0..n {
        let (x, y) = (1 + 2 * i, 2 + 2 * i);
        phi[y * d + x] = -1.0; // phi d_x = -d_y
        phi[x * d + y] = 1.0; // phi d_y = d_x
    }
    let mut xi = vec![0.0; d];
    xi[0] = 1.0;
    let mut eta = vec![0.0; d];
    eta[0] = 1.0;
    ModelSpace {
        structure: ContactStructure::new(
            metric,
            constant_field(d, &[Variance::Up, Variance::Down], phi),
            constant_field(d, &[Variance::Up], xi),
            constant_field(d, &[Variance::Down], eta),
        ),
        params: GssfParams::new(-1.0, 0.0, 0.0),
        name,
    }
}

/// The standard Sasakian structure on R^{2n+1}, coordinates
/// `(x_1, y_1, ..., x_n, y_n, z)`:
/// `eta = (dz - sum y_i dx_i)/2`, `xi = 2 d_z`,
/// `g = eta (x) eta + (1/4) sum (dx_i^2 + dy_i^2)`,
/// `phi d_x = -d_y`, `phi d_y = d_x + y d_z`.
fn sasakian(n: usize) -> ModelSpace {
    let d = 2 * n + 1;
    let z = 2 * n;
    let name = format!("sasakian-r{d}");

    // eta components as jets: eta_{x_i} = -y_i / 2, eta_z = 1/2.
    let eta_jets = move |c: &[Jet]| -> Vec<Jet> {
        let zero = Jet::constant(c[0].dim(), 0.0);
        let mut eta = vec![zero; d];
        for i in 0..n {
            eta[2 * i] = c[2 * i + 1].scale(-0.5);
        }
        eta[z] = Jet::constant(c[0].dim(), 0.5);
        eta
    };

    let metric = MetricModel::new(
        &name,
        d,
        TensorField::new(
            d,
            &[Variance::Down, Variance::Down],
            Arc::new(move |c: &[Jet]| {
                let eta = eta_jets(c);
                let mut out = Vec::with_capacity(d * d);
                for j in 0..d {
                    for k in 0..d {
                        let mut v = eta[j].mul(&eta[k]);
                        if j == k && j < z {
                            v = v.add_scalar(0.25);
                        }
                        out.push(v);
                    }
                }
                out
            }),
        ),
        vec![(-1.0, 1.0); d],
    );

    let phi = TensorField::new(
        d,
        &[Variance::Up, Variance::Down],
        Arc::new(move |c: &[Jet]| {
            let zero = Jet::constant(c[0].dim(), 0.0);
            let mut out = vec![zero; d * d];
            for i in 0..n {
                let (x, y) = (2 * i, 2 * i + 1);
                out[y * d + x] = Jet::constant(c[0].dim(), -1.0);
                out[x * d + y] = Jet::constant(c[0].dim(), 1.0);
                out[z * d + y] = c[y].clone();
            }
            out
        }),
    );

    let mut xi = vec![0.0; d];
    xi[z] = 2.0;
    let eta = TensorField::new(
        d,
        &[Variance::Down],
        Arc::new(move |c: &[Jet]| eta_jets(c)),
    );

    ModelSpace {
        structure: ContactStructure::new(
            metric,
            phi,
            constant_field(d, &[Variance::Up], xi),
            eta,
        ),
        params: GssfParams::new(0.0, -1.0, -1.0),
        name,
    }
}
