//! The chart `(ξ, η)` on the space of oriented lines, the Euclidean action on
//! it, and pointwise evaluation of the symplectic form Ω and the neutral
//! metric G.
//!
//! `ξ` is the stereographic coordinate of the line's direction (projected
//! from the south pole) and `η` the fibre coordinate of `TS²`. The chart
//! misses the south pole; anything mapped to `|ξ| > 1e8` is reported as a
//! chart exit.
//!
//! The complex structure acts diagonally in this chart (`J ∂ξ = i ∂ξ`,
//! `J ∂η = i ∂η`) so it has no separate representation here.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{finite_c, Error, Result};

/// Largest `|ξ|` accepted as an output of a chart operation.
pub const CHART_LIMIT: f64 = 1e8;

/// Smallest rotation denominator `|−ᾱ₃ξ + ᾱ₂|` accepted.
pub const DENOMINATOR_FLOOR: f64 = 1e-14;

const REAL_PART_TOL: f64 = 1e-12;

/// A point of `L`: an oriented line in chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexPair {
    #[serde(with = "crate::serde_complex")]
    pub xi: Complex64,
    #[serde(with = "crate::serde_complex")]
    pub eta: Complex64,
}

impl ComplexPair {
    pub fn new(xi: Complex64, eta: Complex64) -> Result<Self> {
        let p = Self { xi, eta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        finite_c(self.xi, "xi")?;
        finite_c(self.eta, "eta")?;
        Ok(())
    }

    fn approx_eq(&self, other: &Self) -> bool {
        let scale = 1.0 + self.xi.norm() + self.eta.norm();
        (self.xi - other.xi).norm() + (self.eta - other.eta).norm() <= 1e-12 * scale
    }
}

fn check_chart(xi: Complex64) -> Result<Complex64> {
    if xi.norm() > CHART_LIMIT {
        Err(Error::ChartExit(format!(
            "|xi| = {:e} exceeds {CHART_LIMIT:e}",
            xi.norm()
        )))
    } else {
        Ok(xi)
    }
}

/// A tangent vector `dξ ∂ξ + dη ∂η + c.c.` at a point of `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub base: ComplexPair,
    #[serde(with = "crate::serde_complex")]
    pub dxi: Complex64,
    #[serde(with = "crate::serde_complex")]
    pub deta: Complex64,
}

impl TangentVector {
    pub fn new(base: ComplexPair, dxi: Complex64, deta: Complex64) -> Result<Self> {
        base.validate()?;
        finite_c(dxi, "dxi")?;
        finite_c(deta, "deta")?;
        Ok(Self { base, dxi, deta })
    }

    /// Builds a vector from real components in the basis
    /// `(∂/∂Re ξ, ∂/∂Im ξ, ∂/∂Re η, ∂/∂Im η)`.
    pub fn from_real(base: ComplexPair, v: [f64; 4]) -> Result<Self> {
        Self::new(base, Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3]))
    }
}

/// A translation of R³ acting on lines: `η ↦ η + α₁ − a₁ξ − ᾱ₁ξ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Translation {
    #[serde(with = "crate::serde_complex")]
    pub alpha1: Complex64,
    pub a1: f64,
}

impl Translation {
    pub fn new(alpha1: Complex64, a1: f64) -> Result<Self> {
        finite_c(alpha1, "alpha1")?;
        crate::error::finite(a1, "a1")?;
        Ok(Self { alpha1, a1 })
    }

    pub fn identity() -> Self {
        Self {
            alpha1: Complex64::new(0.0, 0.0),
            a1: 0.0,
        }
    }

    pub fn apply(&self, p: &ComplexPair) -> Result<ComplexPair> {
        p.validate()?;
        let xi = p.xi;
        let eta = p.eta + self.alpha1 - self.a1 * xi - self.alpha1.conj() * xi * xi;
        ComplexPair::new(xi, eta)
    }

    /// Push-forward through the exact Jacobian of the action.
    pub fn push_forward(&self, v: &TangentVector) -> Result<TangentVector> {
        let base = self.apply(&v.base)?;
        let shear = self.a1 + 2.0 * self.alpha1.conj() * v.base.xi;
        TangentVector::new(base, v.dxi, v.deta - shear * v.dxi)
    }
}

/// A rotation of R³ acting on lines through the SU(2) Möbius map
/// `ξ ↦ (α₂ξ + α₃)/(−ᾱ₃ξ + ᾱ₂)`, `η ↦ η/(−ᾱ₃ξ + ᾱ₂)²`.
///
/// Always normalized: `|α₂|² + |α₃|² = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRotation")]
pub struct Rotation {
    #[serde(with = "crate::serde_complex")]
    alpha2: Complex64,
    #[serde(with = "crate::serde_complex")]
    alpha3: Complex64,
}

#[derive(Deserialize)]
struct RawRotation {
    #[serde(with = "crate::serde_complex")]
    alpha2: Complex64,
    #[serde(with = "crate::serde_complex")]
    alpha3: Complex64,
}

impl TryFrom<RawRotation> for Rotation {
    type Error = Error;
    fn try_from(r: RawRotation) -> Result<Self> {
        Rotation::new(r.alpha2, r.alpha3)
    }
}

impl Rotation {
    /// Normalizes `(α₂, α₃)` onto the unit 3-sphere. Pairs already of unit
    /// norm to within roundoff are kept bit-for-bit.
    pub fn new(alpha2: Complex64, alpha3: Complex64) -> Result<Self> {
        finite_c(alpha2, "alpha2")?;
        finite_c(alpha3, "alpha3")?;
        let n = (alpha2.norm_sqr() + alpha3.norm_sqr()).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Domain(format!("rotation parameters have norm {n}")));
        }
        if (n - 1.0).abs() <= 1e-15 {
            return Ok(Self { alpha2, alpha3 });
        }
        Ok(Self {
            alpha2: alpha2 / n,
            alpha3: alpha3 / n,
        })
    }

    pub fn identity() -> Self {
        Self {
            alpha2: Complex64::new(1.0, 0.0),
            alpha3: Complex64::new(0.0, 0.0),
        }
    }

    /// Half-turn about a horizontal axis: `ξ ↦ −1/ξ`.
    pub fn half_turn() -> Self {
        Self {
            alpha2: Complex64::new(0.0, 0.0),
            alpha3: Complex64::new(1.0, 0.0),
        }
    }

    /// Rotation by `angle` about the vertical axis: `ξ ↦ e^{i·angle} ξ`.
    pub fn about_pole(angle: f64) -> Self {
        Self {
            alpha2: Complex64::from_polar(1.0, 0.5 * angle),
            alpha3: Complex64::new(0.0, 0.0),
        }
    }

    pub fn alpha2(&self) -> Complex64 {
        self.alpha2
    }

    pub fn alpha3(&self) -> Complex64 {
        self.alpha3
    }

    pub fn inverse(&self) -> Self {
        Self {
            alpha2: self.alpha2.conj(),
            alpha3: -self.alpha3,
        }
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &Rotation) -> Self {
        let (a2, a3) = (self.alpha2, self.alpha3);
        let (b2, b3) = (first.alpha2, first.alpha3);
        Self {
            alpha2: a2 * b2 - a3 * b3.conj(),
            alpha3: a2 * b3 + a3 * b2.conj(),
        }
    }

    /// `−ᾱ₃ξ + ᾱ₂`.
    pub fn denominator(&self, xi: Complex64) -> Complex64 {
        -self.alpha3.conj() * xi + self.alpha2.conj()
    }

    fn checked_denominator(&self, xi: Complex64) -> Result<Complex64> {
        let d = self.denominator(xi);
        if d.norm() < DENOMINATOR_FLOOR {
            Err(Error::ChartExit(format!("rotation sends xi = {xi} to the south pole")))
        } else {
            Ok(d)
        }
    }

    /// The Möbius action on directions alone.
    pub fn map_xi(&self, xi: Complex64) -> Result<Complex64> {
        finite_c(xi, "xi")?;
        let d = self.checked_denominator(xi)?;
        check_chart((self.alpha2 * xi + self.alpha3) / d)
    }

    pub fn apply(&self, p: &ComplexPair) -> Result<ComplexPair> {
        p.validate()?;
        let d = self.checked_denominator(p.xi)?;
        let xi = check_chart((self.alpha2 * p.xi + self.alpha3) / d)?;
        ComplexPair::new(xi, p.eta / (d * d))
    }

    /// Push-forward through the exact Jacobian of the action:
    /// `dξ' = dξ/D²`, `dη' = dη/D² + 2ηᾱ₃ dξ/D³`.
    pub fn push_forward(&self, v: &TangentVector) -> Result<TangentVector> {
        let base = self.apply(&v.base)?;
        let d = self.denominator(v.base.xi);
        let d2 = d * d;
        let dxi = v.dxi / d2;
        let deta = v.deta / d2 + 2.0 * v.base.eta * self.alpha3.conj() * v.dxi / (d2 * d);
        TangentVector::new(base, dxi, deta)
    }
}

/// Either generator of the Euclidean action on `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EuclideanMotion {
    Translation(Translation),
    Rotation(Rotation),
}

impl EuclideanMotion {
    pub fn apply(&self, p: &ComplexPair) -> Result<ComplexPair> {
        match self {
            Self::Translation(t) => t.apply(p),
            Self::Rotation(r) => r.apply(p),
        }
    }

    pub fn push_forward(&self, v: &TangentVector) -> Result<TangentVector> {
        match self {
            Self::Translation(t) => t.push_forward(v),
            Self::Rotation(r) => r.push_forward(v),
        }
    }
}

fn shared_base(u: &TangentVector, v: &TangentVector) -> Result<ComplexPair> {
    u.base.validate()?;
    v.base.validate()?;
    if u.base.approx_eq(&v.base) {
        Ok(u.base)
    } else {
        Err(Error::BasePointMismatch)
    }
}

/// Conformal factor `1/(1+ξξ̄)²` times 2, and the twist coefficient
/// `2(ξη̄ − ξ̄η)/(1+ξξ̄)` (purely imaginary).
fn coefficients(p: &ComplexPair) -> (f64, Complex64) {
    let r = p.xi.norm_sqr();
    let conformal = 2.0 / ((1.0 + r) * (1.0 + r));
    let twist = 2.0 * (p.xi * p.eta.conj() - p.xi.conj() * p.eta) / (1.0 + r);
    (conformal, twist)
}

fn take_real(z: Complex64, scale: f64) -> f64 {
    debug_assert!(
        z.im.abs() <= REAL_PART_TOL * scale.max(1.0),
        "imaginary residue {} on a real-valued form (scale {scale})",
        z.im
    );
    z.re
}

/// Ω(u, v) with `a∧b (u, v) = a(u)b(v) − a(v)b(u)`.
pub fn symplectic_form(u: &TangentVector, v: &TangentVector) -> Result<f64> {
    let base = shared_base(u, v)?;
    let (conformal, twist) = coefficients(&base);
    let wedge = |au: Complex64, av: Complex64, bu: Complex64, bv: Complex64| au * bv - av * bu;
    let terms = [
        wedge(u.deta, v.deta, u.dxi.conj(), v.dxi.conj()),
        wedge(u.deta.conj(), v.deta.conj(), u.dxi, v.dxi),
        twist * wedge(u.dxi, v.dxi, u.dxi.conj(), v.dxi.conj()),
    ];
    let scale = conformal * terms.iter().map(|t| t.norm()).sum::<f64>();
    let sum: Complex64 = terms.iter().sum();
    Ok(take_real(conformal * sum, scale))
}

/// G(u, v), the symmetrization of
/// `2i/(1+ξξ̄)² (dη⊗dξ̄ − dη̄⊗dξ + twist·dξ⊗dξ̄)`.
pub fn metric(u: &TangentVector, v: &TangentVector) -> Result<f64> {
    let base = shared_base(u, v)?;
    let (conformal, twist) = coefficients(&base);
    let i = Complex64::i();
    let half = |a: &TangentVector, b: &TangentVector| {
        [
            a.deta * b.dxi.conj(),
            -(a.deta.conj() * b.dxi),
            twist * a.dxi * b.dxi.conj(),
        ]
    };
    let terms: Vec<Complex64> = half(u, v).into_iter().chain(half(v, u)).collect();
    let scale = conformal * terms.iter().map(|t| t.norm()).sum::<f64>();
    let sum: Complex64 = terms.iter().sum();
    Ok(take_real(0.5 * i * conformal * sum, scale))
}

fn component_matrix(
    base: &ComplexPair,
    form: fn(&TangentVector, &TangentVector) -> Result<f64>,
) -> Result<[[f64; 4]; 4]> {
    let mut basis = [[0.0; 4]; 4];
    for (k, row) in basis.iter_mut().enumerate() {
        row[k] = 1.0;
    }
    let vecs = basis
        .iter()
        .map(|e| TangentVector::from_real(*base, *e))
        .collect::<Result<Vec<_>>>()?;
    let mut m = [[0.0; 4]; 4];
    for (a, u) in vecs.iter().enumerate() {
        for (b, v) in vecs.iter().enumerate() {
            m[a][b] = form(u, v)?;
        }
    }
    Ok(m)
}

/// Components of G in the real basis `(Re ξ, Im ξ, Re η, Im η)`.
pub fn metric_matrix(base: &ComplexPair) -> Result<[[f64; 4]; 4]> {
    component_matrix(base, metric)
}

/// Components of Ω in the real basis `(Re ξ, Im ξ, Re η, Im η)`.
pub fn symplectic_matrix(base: &ComplexPair) -> Result<[[f64; 4]; 4]> {
    component_matrix(base, symplectic_form)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pair(xi: Complex64, eta: Complex64) -> ComplexPair {
        ComplexPair::new(xi, eta).unwrap()
    }

    #[test]
    fn translation_examples() {
        let p = pair(c(1.0, 1.0), c(2.0, 0.0));
        assert_eq!(Translation::identity().apply(&p).unwrap(), p);

        let t = Translation::new(c(1.0, 0.0), 0.0).unwrap();
        let q = t.apply(&pair(c(0.0, 0.0), c(0.0, 0.0))).unwrap();
        assert_eq!(q, pair(c(0.0, 0.0), c(1.0, 0.0)));

        let t = Translation::new(c(1.0, 1.0), 2.0).unwrap();
        let q = t.apply(&pair(c(1.0, 0.0), c(0.0, 0.0))).unwrap();
        assert_eq!(q.xi, c(1.0, 0.0));
        assert!((q.eta - c(-2.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn rotation_examples() {
        let p = pair(c(0.3, -2.0), c(1.5, 0.25));
        assert_eq!(Rotation::identity().apply(&p).unwrap(), p);

        let q = Rotation::half_turn().apply(&pair(c(1.0, 0.0), c(1.0, 0.0))).unwrap();
        assert!((q.xi - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((q.eta - c(1.0, 0.0)).norm() < 1e-15);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = Rotation::new(c(s, 0.0), c(-s, 0.0)).unwrap();
        let q = r.apply(&pair(c(1.0, 0.0), c(0.0, 0.0))).unwrap();
        assert!(q.xi.norm() < 1e-15);
        assert_eq!(q.eta, c(0.0, 0.0));
    }

    #[test]
    fn rotation_is_normalized() {
        let r = Rotation::new(c(3.0, 1.0), c(-2.0, 0.5)).unwrap();
        assert!((r.alpha2().norm_sqr() + r.alpha3().norm_sqr() - 1.0).abs() < 1e-12);
        assert!(Rotation::new(c(0.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn south_pole_is_a_chart_exit() {
        // half turn sends ξ = 0 to ∞
        let err = Rotation::half_turn()
            .apply(&pair(c(0.0, 0.0), c(1.0, 0.0)))
            .unwrap_err();
        assert!(matches!(err, Error::ChartExit(_)));
        let err = Rotation::half_turn().map_xi(c(1e-10, 0.0)).unwrap_err();
        assert!(matches!(err, Error::ChartExit(_)));
    }

    #[test]
    fn non_finite_inputs_rejected() {
        assert!(ComplexPair::new(c(f64::NAN, 0.0), c(0.0, 0.0)).is_err());
        let bad = ComplexPair {
            xi: c(f64::INFINITY, 0.0),
            eta: c(0.0, 0.0),
        };
        assert!(matches!(Translation::identity().apply(&bad), Err(Error::NonFinite(_))));
        assert!(Translation::new(c(0.0, 0.0), f64::NAN).is_err());
    }

    // At ξ = η = 0 the forms reduce to Ω = 4(dp∧dx + dq∧dy) and
    // G = −2(dq⊗dx + dx⊗dq) + 2(dp⊗dy + dy⊗dp), with ξ = x+iy, η = p+iq.
    #[test]
    fn forms_at_origin_match_hand_expansion() {
        let o = pair(c(0.0, 0.0), c(0.0, 0.0));
        let w = symplectic_matrix(&o).unwrap();
        let g = metric_matrix(&o).unwrap();
        let mut w_expected = [[0.0; 4]; 4];
        w_expected[2][0] = 4.0;
        w_expected[0][2] = -4.0;
        w_expected[3][1] = 4.0;
        w_expected[1][3] = -4.0;
        let mut g_expected = [[0.0; 4]; 4];
        g_expected[0][3] = -2.0;
        g_expected[3][0] = -2.0;
        g_expected[1][2] = 2.0;
        g_expected[2][1] = 2.0;
        for a in 0..4 {
            for b in 0..4 {
                assert!((w[a][b] - w_expected[a][b]).abs() < 1e-15, "Ω[{a}][{b}]");
                assert!((g[a][b] - g_expected[a][b]).abs() < 1e-15, "G[{a}][{b}]");
            }
        }
        let u = TangentVector::new(o, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let v = TangentVector::new(o, c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(symplectic_form(&u, &v).unwrap(), -4.0);
        assert_eq!(symplectic_form(&u, &u).unwrap(), 0.0);
    }

    #[test]
    fn section_pullback_of_forms() {
        // tangent frame of η = ciξ: ∂x ↦ (1, ci), ∂y ↦ (i, ci·i)
        let cc = 1.7;
        for xi in [c(0.0, 0.0), c(0.3, 0.4), c(-1.2, 0.5), c(0.6, 0.8)] {
            let base = pair(xi, c(0.0, cc) * xi);
            let ex = TangentVector::new(base, c(1.0, 0.0), c(0.0, cc)).unwrap();
            let ey = TangentVector::new(base, c(0.0, 1.0), c(-cc, 0.0)).unwrap();
            let r = xi.norm_sqr();
            let defect = 4.0 * cc * (1.0 - r) / (1.0 + r).powi(3);
            // Ω|Σ = defect · i dξ∧dξ̄, and i dξ∧dξ̄ (∂x, ∂y) = 2
            let w = symplectic_form(&ex, &ey).unwrap();
            assert!((w - 2.0 * defect).abs() < 1e-13, "{w} vs {}", 2.0 * defect);
            let g = metric(&ex, &ex).unwrap();
            assert!((g + defect).abs() < 1e-13);
            assert!(metric(&ex, &ey).unwrap().abs() < 1e-13);
        }
        let base = pair(c(0.0, 0.0), c(0.0, 0.0));
        let ex = TangentVector::new(base, c(1.0, 0.0), c(0.0, cc)).unwrap();
        let ey = TangentVector::new(base, c(0.0, 1.0), c(-cc, 0.0)).unwrap();
        assert!((symplectic_form(&ex, &ey).unwrap() - 8.0 * cc).abs() < 1e-14);
    }

    #[test]
    fn mismatched_bases_rejected() {
        let u = TangentVector::new(pair(c(0.0, 0.0), c(0.0, 0.0)), c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let v = TangentVector::new(pair(c(0.1, 0.0), c(0.0, 0.0)), c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(metric(&u, &v), Err(Error::BasePointMismatch));
        assert_eq!(symplectic_form(&u, &v), Err(Error::BasePointMismatch));
    }

    #[test]
    fn compose_matches_sequential_application() {
        let a = Rotation::new(c(0.3, 0.4), c(-0.2, 0.8)).unwrap();
        let b = Rotation::new(c(-0.5, 0.1), c(0.7, 0.2)).unwrap();
        let p = pair(c(0.4, -0.3), c(1.0, 2.0));
        let seq = a.apply(&b.apply(&p).unwrap()).unwrap();
        let ab = a.compose(&b).apply(&p).unwrap();
        assert!((seq.xi - ab.xi).norm() < 1e-12);
        assert!((seq.eta - ab.eta).norm() < 1e-12);
        let back = a.inverse().apply(&a.apply(&p).unwrap()).unwrap();
        assert!((back.xi - p.xi).norm() < 1e-12 && (back.eta - p.eta).norm() < 1e-12);
    }
}
