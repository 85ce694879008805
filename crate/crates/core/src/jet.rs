//! Truncated multivariate Taylor arithmetic ("jets") up to third order.
//!
//! A [`Jet`] carries the value of a scalar expression together with its
//! partial derivatives up to `order` (at most 3) with respect to `dim`
//! chart coordinates. Arithmetic propagates derivatives exactly (Leibniz /
//! Faa di Bruno truncated at the carried order), so every derivative the
//! engine consumes downstream is exact to machine precision rather than a
//! finite-difference estimate.
//!
//! Mixed partials are stored densely but written only from canonical
//! (sorted) index combinations and then mirrored, so Schwarz symmetry holds
//! bit-for-bit by construction.

/// Highest derivative order the engine ever needs: metric jets feed
/// Christoffel symbols (one derivative), curvature (two), and derivatives
/// of curvature-corrected fields (three).
pub const MAX_ORDER: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    dim: usize,
    order: usize,
    v: f64,
    d1: Vec<f64>,
    d2: Vec<f64>,
    d3: Vec<f64>,
}

impl Jet {
    /// A constant: all partials vanish identically, so a constant never
    /// limits the order of an expression it participates in.
    pub fn constant(dim: usize, c: f64) -> Self {
        Jet {
            dim,
            order: MAX_ORDER,
            v: c,
            d1: vec![0.0; dim],
            d2: vec![0.0; dim * dim],
            d3: vec![0.0; dim * dim * dim],
        }
    }

    /// The coordinate function `x^i` seeded at `p`, tracked to `order`.
    pub fn variable(p: &[f64], i: usize, order: usize) -> Self {
        let dim = p.len();
        assert!(i < dim, "coordinate index {i} out of range for dim {dim}");
        assert!(order <= MAX_ORDER);
        let mut j = Jet::constant(dim, p[i]);
        j.order = order;
        j.d1[i] = 1.0;
        j
    }

    /// Seeds the full coordinate tuple at `p`.
    pub fn seed(p: &[f64], order: usize) -> Vec<Jet> {
        (0..p.len()).map(|i| Jet::variable(p, i, order)).collect()
    }

    /// An order-1 jet with prescribed value and gradient. Used for
    /// chain-rule composition through a map when only first derivatives
    /// of the outer expression are available.
    pub fn linear(dim: usize, v: f64, grad: &[f64]) -> Self {
        assert_eq!(grad.len(), dim);
        let mut j = Jet::constant(dim, v);
        j.order = 1;
        j.d1.copy_from_slice(grad);
        j
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.v
    }

    #[inline]
    fn i2(&self, i: usize, j: usize) -> usize {
        i * self.dim + j
    }

    #[inline]
    fn i3(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dim + j) * self.dim + k
    }

    /// First partial `∂_i`.
    pub fn d1(&self, i: usize) -> f64 {
        assert!(self.order >= 1, "jet carries no first derivatives");
        self.d1[i]
    }

    /// Second partial `∂_i ∂_j`.
    pub fn d2(&self, i: usize, j: usize) -> f64 {
        assert!(self.order >= 2, "jet carries no second derivatives");
        self.d2[self.i2(i, j)]
    }

    /// Third partial `∂_i ∂_j ∂_k`.
    pub fn d3(&self, i: usize, j: usize, k: usize) -> f64 {
        assert!(self.order >= 3, "jet carries no third derivatives");
        self.d3[self.i3(i, j, k)]
    }

    /// The derivative field `∂_i f` as a jet one order lower.
    pub fn partial(&self, i: usize) -> Jet {
        assert!(self.order >= 1, "cannot lower a zeroth-order jet");
        let dim = self.dim;
        let mut r = Jet::constant(dim, self.d1[i]);
        r.order = self.order - 1;
        if r.order >= 1 {
            for j in 0..dim {
                r.d1[j] = self.d2[self.i2(i, j)];
            }
        }
        if r.order >= 2 {
            for j in 0..dim {
                for k in 0..dim {
                    r.d2[j * dim + k] = self.d3[self.i3(i, j, k)];
                }
            }
        }
        r
    }

    fn zero_like(a: &Jet, b: &Jet) -> Jet {
        assert_eq!(a.dim, b.dim, "jet dimension mismatch");
        let mut r = Jet::constant(a.dim, 0.0);
        r.order = a.order.min(b.order);
        r
    }

    pub fn add(&self, rhs: &Jet) -> Jet {
        let mut r = Jet::zero_like(self, rhs);
        r.v = self.v + rhs.v;
        if r.order >= 1 {
            for i in 0..r.dim {
                r.d1[i] = self.d1[i] + rhs.d1[i];
            }
        }
        if r.order >= 2 {
            for i in 0..r.dim * r.dim {
                r.d2[i] = self.d2[i] + rhs.d2[i];
            }
        }
        if r.order >= 3 {
            for i in 0..r.dim * r.dim * r.dim {
                r.d3[i] = self.d3[i] + rhs.d3[i];
            }
        }
        r
    }

    pub fn sub(&self, rhs: &Jet) -> Jet {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Jet {
        self.scale(-1.0)
    }

    pub fn scale(&self, c: f64) -> Jet {
        let mut r = self.clone();
        r.v *= c;
        for x in r.d1.iter_mut() {
            *x *= c;
        }
        for x in r.d2.iter_mut() {
            *x *= c;
        }
        for x in r.d3.iter_mut() {
            *x *= c;
        }
        r
    }

    pub fn add_scalar(&self, c: f64) -> Jet {
        let mut r = self.clone();
        r.v += c;
        r
    }

    /// Leibniz product. Canonical index combinations are computed once and
    /// mirrored, keeping mixed partials exactly symmetric.
    pub fn mul(&self, rhs: &Jet) -> Jet {
        let mut r = Jet::zero_like(self, rhs);
        let d = r.dim;
        let (a, b) = (self, rhs);
        r.v = a.v * b.v;
        if r.order >= 1 {
            for i in 0..d {
                r.d1[i] = a.d1[i] * b.v + a.v * b.d1[i];
            }
        }
        if r.order >= 2 {
            for i in 0..d {
                for j in i..d {
                    let val = a.d2[a.i2(i, j)] * b.v
                        + a.d1[i] * b.d1[j]
                        + a.d1[j] * b.d1[i]
                        + a.v * b.d2[b.i2(i, j)];
                    r.d2[i * d + j] = val;
                    r.d2[j * d + i] = val;
                }
            }
        }
        if r.order >= 3 {
            for i in 0..d {
                for j in i..d {
                    for k in j..d {
                        let val = a.d3[a.i3(i, j, k)] * b.v
                            + a.d2[a.i2(i, j)] * b.d1[k]
                            + a.d2[a.i2(i, k)] * b.d1[j]
                            + a.d2[a.i2(j, k)] * b.d1[i]
                            + b.d2[b.i2(i, j)] * a.d1[k]
                            + b.d2[b.i2(i, k)] * a.d1[j]
                            + b.d2[b.i2(j, k)] * a.d1[i]
                            + a.v * b.d3[b.i3(i, j, k)];
                        for (x, y, z) in permutations3(i, j, k) {
                            r.d3[(x * d + y) * d + z] = val;
                        }
                    }
                }
            }
        }
        r
    }

    /// Composition with a univariate analytic map given its derivatives
    /// `[h(u), h'(u), h''(u), h'''(u)]` at the jet's value.
    pub fn compose(&self, h: [f64; 4]) -> Jet {
        let mut r = Jet::constant(self.dim, h[0]);
        r.order = self.order;
        let d = self.dim;
        let u = self;
        if r.order >= 1 {
            for i in 0..d {
                r.d1[i] = h[1] * u.d1[i];
            }
        }
        if r.order >= 2 {
            for i in 0..d {
                for j in i..d {
                    let val = h[2] * u.d1[i] * u.d1[j] + h[1] * u.d2[u.i2(i, j)];
                    r.d2[i * d + j] = val;
                    r.d2[j * d + i] = val;
                }
            }
        }
        if r.order >= 3 {
            for i in 0..d {
                for j in i..d {
                    for k in j..d {
                        let val = h[3] * u.d1[i] * u.d1[j] * u.d1[k]
                            + h[2]
                                * (u.d2[u.i2(i, j)] * u.d1[k]
                                    + u.d2[u.i2(i, k)] * u.d1[j]
                                    + u.d2[u.i2(j, k)] * u.d1[i])
                            + h[1] * u.d3[u.i3(i, j, k)];
                        for (x, y, z) in permutations3(i, j, k) {
                            r.d3[(x * d + y) * d + z] = val;
                        }
                    }
                }
            }
        }
        r
    }

    pub fn exp(&self) -> Jet {
        let e = self.v.exp();
        self.compose([e, e, e, e])
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.v.sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.v.sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn sqrt(&self) -> Jet {
        let s = self.v.sqrt();
        self.compose([s, 0.5 / s, -0.25 / (s * self.v), 0.375 / (s * self.v * self.v)])
    }

    /// `1/u`. The caller guards against zero values (matrix inversion
    /// pivots before dividing); a zero value propagates infinities.
    pub fn recip(&self) -> Jet {
        let w = 1.0 / self.v;
        self.compose([w, -w * w, 2.0 * w * w * w, -6.0 * w * w * w * w])
    }

    pub fn div(&self, rhs: &Jet) -> Jet {
        self.mul(&rhs.recip())
    }
}

fn permutations3(i: usize, j: usize, k: usize) -> [(usize, usize, usize); 6] {
    [
        (i, j, k),
        (i, k, j),
        (j, i, k),
        (j, k, i),
        (k, i, j),
        (k, j, i),
    ]
}

macro_rules! jet_binop {
    ($trait:ident, $fn:ident) => {
        impl std::ops::$trait<&Jet> for &Jet {
            type Output = Jet;
            fn $fn(self, rhs: &Jet) -> Jet {
                Jet::$fn(self, rhs)
            }
        }
        impl std::ops::$trait<Jet> for Jet {
            type Output = Jet;
            fn $fn(self, rhs: Jet) -> Jet {
                Jet::$fn(&self, &rhs)
            }
        }
        impl std::ops::$trait<&Jet> for Jet {
            type Output = Jet;
            fn $fn(self, rhs: &Jet) -> Jet {
                Jet::$fn(&self, rhs)
            }
        }
        impl std::ops::$trait<Jet> for &Jet {
            type Output = Jet;
            fn $fn(self, rhs: Jet) -> Jet {
                Jet::$fn(self, &rhs)
            }
        }
    };
}

jet_binop!(Add, add);
jet_binop!(Sub, sub);
jet_binop!(Mul, mul);
jet_binop!(Div, div);

impl std::ops::Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::neg(self)
    }
}

impl std::ops::Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::neg(&self)
    }
}
