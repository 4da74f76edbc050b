//! Global holomorphic sections `η = β₁ + β₂ξ + β₃ξ²`, their reduction to the
//! standard form `η = c·i·ξ`, and the geometry the neutral structure induces
//! on a standard sphere.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{finite, finite_c, Error, Result};
use crate::line_space::{metric, ComplexPair, Rotation, TangentVector, Translation};

/// Below this `|γ|` the section is already standard after translation.
pub const GAMMA_FLOOR: f64 = 1e-13;

/// `η(ξ) = β₁ + β₂ξ + β₃ξ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticSection {
    #[serde(with = "crate::serde_complex")]
    pub beta1: Complex64,
    #[serde(with = "crate::serde_complex")]
    pub beta2: Complex64,
    #[serde(with = "crate::serde_complex")]
    pub beta3: Complex64,
}

impl QuadraticSection {
    pub fn new(beta1: Complex64, beta2: Complex64, beta3: Complex64) -> Result<Self> {
        let s = Self { beta1, beta2, beta3 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        finite_c(self.beta1, "beta1")?;
        finite_c(self.beta2, "beta2")?;
        finite_c(self.beta3, "beta3")?;
        Ok(())
    }

    pub fn eta(&self, xi: Complex64) -> Complex64 {
        self.beta1 + (self.beta2 + self.beta3 * xi) * xi
    }

    /// The line of the section over direction `xi`.
    pub fn evaluate(&self, xi: Complex64) -> Result<ComplexPair> {
        self.validate()?;
        finite_c(xi, "xi")?;
        ComplexPair::new(xi, self.eta(xi))
    }

    /// Image of the section under a translation, coefficient-wise.
    pub fn translate(&self, t: &Translation) -> Self {
        Self {
            beta1: self.beta1 + t.alpha1,
            beta2: self.beta2 - t.a1,
            beta3: self.beta3 - t.alpha1.conj(),
        }
    }

    /// Image of the section under a rotation, coefficient-wise.
    ///
    /// With `ξ = N/M`, `N = ᾱ₂ξ' − α₃`, `M = ᾱ₃ξ' + α₂` the rotated fibre
    /// coordinate is `η' = β₁M² + β₂NM + β₃N²`, again quadratic in `ξ'`.
    pub fn rotate(&self, r: &Rotation) -> Self {
        let (a2, a3) = (r.alpha2(), r.alpha3());
        let (b1, b2, b3) = (self.beta1, self.beta2, self.beta3);
        Self {
            beta1: b1 * a2 * a2 - b2 * a3 * a2 + b3 * a3 * a3,
            beta2: 2.0 * b1 * a3.conj() * a2 + b2 * (a2.norm_sqr() - a3.norm_sqr()) - 2.0 * b3 * a2.conj() * a3,
            beta3: b1 * a3.conj() * a3.conj() + b2 * a2.conj() * a3.conj() + b3 * a2.conj() * a2.conj(),
        }
    }

    /// Fits a quadratic through `(ξ, η)` samples.
    ///
    /// The first three samples fix the coefficients exactly; the remaining
    /// ones are used to report the worst mismatch.
    pub fn fit(samples: &[(Complex64, Complex64)]) -> Result<(Self, f64)> {
        if samples.len() < 3 {
            return Err(Error::Domain("a quadratic fit needs at least 3 samples".into()));
        }
        let (x0, y0) = samples[0];
        let (x1, y1) = samples[1];
        let (x2, y2) = samples[2];
        if (x0 - x1).norm() == 0.0 || (x0 - x2).norm() == 0.0 || (x1 - x2).norm() == 0.0 {
            return Err(Error::Domain("fit nodes must be distinct".into()));
        }
        // Newton divided differences.
        let d01 = (y1 - y0) / (x1 - x0);
        let d12 = (y2 - y1) / (x2 - x1);
        let d012 = (d12 - d01) / (x2 - x0);
        let beta3 = d012;
        let beta2 = d01 - d012 * (x0 + x1);
        let beta1 = y0 - d01 * x0 + d012 * x0 * x1;
        let fitted = Self::new(beta1, beta2, beta3)?;
        let residual = samples[3..]
            .iter()
            .map(|&(x, y)| (fitted.eta(x) - y).norm())
            .fold(0.0, f64::max);
        Ok((fitted, residual))
    }
}

/// The standard sphere `η = c·i·ξ`, `c ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardSphere {
    pub c: f64,
}

impl StandardSphere {
    pub fn new(c: f64) -> Result<Self> {
        finite(c, "c")?;
        if c < 0.0 {
            return Err(Error::Domain(format!("standard form needs c >= 0, got {c}")));
        }
        Ok(Self { c })
    }

    pub fn is_lagrangian(&self) -> bool {
        self.c == 0.0
    }

    pub fn as_section(&self) -> QuadraticSection {
        let zero = Complex64::new(0.0, 0.0);
        QuadraticSection {
            beta1: zero,
            beta2: Complex64::new(0.0, self.c),
            beta3: zero,
        }
    }

    /// Coefficient of `i dξ∧dξ̄` in the pulled-back symplectic form.
    pub fn lagrangian_defect(&self, xi: Complex64) -> f64 {
        let r = xi.norm_sqr();
        4.0 * self.c * (1.0 - r) / (1.0 + r).powi(3)
    }

    /// `g` in the induced metric `ds² = g dξ⊗dξ̄`.
    pub fn induced_metric_factor(&self, xi: Complex64) -> f64 {
        let r = xi.norm_sqr();
        -4.0 * self.c * (1.0 - r) / (1.0 + r).powi(3)
    }

    /// `|g_closed − g_pullback|`, with the pullback taken by evaluating the
    /// ambient metric on the section's tangent vector `(dξ, dη) = (1, ci)`.
    pub fn pullback_consistency_check(&self, xi: Complex64) -> Result<f64> {
        let base = self.as_section().evaluate(xi)?;
        let u = TangentVector::new(base, Complex64::new(1.0, 0.0), Complex64::new(0.0, self.c))?;
        let pulled = metric(&u, &u)?;
        Ok((pulled - self.induced_metric_factor(xi)).abs())
    }
}

pub fn lagrangian_defect(s: &StandardSphere, xi: Complex64) -> f64 {
    s.lagrangian_defect(xi)
}

pub fn induced_metric_factor(s: &StandardSphere, xi: Complex64) -> f64 {
    s.induced_metric_factor(xi)
}

/// Record of one reduction to standard form: translate, then rotate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationCertificate {
    pub translation: Translation,
    pub rotation: Rotation,
    pub result: StandardSphere,
    /// `γ = ½(β₁ + β̄₃)` of the translated section `γ + ciξ + γ̄ξ²`.
    #[serde(with = "crate::serde_complex")]
    pub intermediate_gamma: Complex64,
    /// `c = Im β₂` of the translated section.
    pub intermediate_c: f64,
}

impl NormalizationCertificate {
    /// The section after both motions, by coefficient algebra.
    pub fn transform(&self, s: &QuadraticSection) -> QuadraticSection {
        s.translate(&self.translation).rotate(&self.rotation)
    }
}

/// Reduces a quadratic section to `η = c·i·ξ`.
///
/// The translation `α₁ = ½(β̄₃ − β₁)`, `a₁ = Re β₂` leaves
/// `γ + ciξ + γ̄ξ²`; the rotation through `ξ₀ = (c − √(c²+4|γ|²))/(2iγ̄)`,
/// `α₂ = (1+|ξ₀|²)^{-1/2}`, `α₃ = −ξ₀ α₂` then yields `c' = √(c²+4|γ|²)`.
pub fn normalize(s: &QuadraticSection) -> Result<NormalizationCertificate> {
    s.validate()?;
    let translation = Translation::new(0.5 * (s.beta3.conj() - s.beta1), s.beta2.re)?;
    let gamma = 0.5 * (s.beta1 + s.beta3.conj());
    let c = s.beta2.im;
    let (rotation, c_final) = if gamma.norm() < GAMMA_FLOOR {
        if c < 0.0 {
            (Rotation::half_turn(), -c)
        } else {
            (Rotation::identity(), c)
        }
    } else {
        let root = (c * c + 4.0 * gamma.norm_sqr()).sqrt();
        let i = Complex64::i();
        // c − root cancels for c > 0; rewrite as −4|γ|²/(c + root).
        let xi0 = if c >= 0.0 {
            2.0 * i * gamma / (c + root)
        } else {
            (c - root) / (2.0 * i * gamma.conj())
        };
        let a2 = 1.0 / (1.0 + xi0.norm_sqr()).sqrt();
        (Rotation::new(Complex64::new(a2, 0.0), -xi0 * a2)?, root)
    };
    Ok(NormalizationCertificate {
        translation,
        rotation,
        result: StandardSphere::new(c_final)?,
        intermediate_gamma: gamma,
        intermediate_c: c,
    })
}

/// Nodes used when refitting a transformed section.
pub const REFIT_NODES: [Complex64; 5] = [
    Complex64::new(0.0, 0.0),
    Complex64::new(1.0, 0.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(0.0, -1.0),
];

/// Picks refit nodes away from `−α₂/ᾱ₃`, the image of the south pole, where
/// the transformed section cannot be sampled. Falls back from
/// [`REFIT_NODES`] to scaled and turned copies of it.
fn refit_nodes(r: &Rotation) -> [Complex64; 5] {
    let candidates = [(1.0, 0.0), (0.5, 0.4), (1.5, 0.9)].map(|(scale, turn)| {
        let w = Complex64::from_polar(scale, turn);
        REFIT_NODES.map(|z| z * w)
    });
    if r.alpha3().norm() < 1e-300 {
        return candidates[0];
    }
    let pole = -r.alpha2() / r.alpha3().conj();
    let clearance = |nodes: &[Complex64; 5]| nodes.iter().map(|z| (z - pole).norm()).fold(f64::INFINITY, f64::min);
    if clearance(&candidates[0]) >= 0.25 {
        return candidates[0];
    }
    candidates
        .into_iter()
        .max_by(|a, b| clearance(a).total_cmp(&clearance(b)))
        .expect("non-empty candidate list")
}

/// Transforms the section pointwise by the certificate's motions and refits
/// a quadratic at five nodes ([`REFIT_NODES`] unless one of them is the
/// image of the south pole). Returns the fitted coefficients and the worst
/// mismatch at the two surplus nodes.
///
/// This goes through the action on points of `L` only, so it checks
/// [`NormalizationCertificate::transform`] independently.
pub fn refit_transformed(s: &QuadraticSection, cert: &NormalizationCertificate) -> Result<(QuadraticSection, f64)> {
    let back = cert.rotation.inverse();
    let samples = refit_nodes(&cert.rotation)
        .iter()
        .map(|&target| {
            let xi = back.map_xi(target)?;
            let p = cert.rotation.apply(&cert.translation.apply(&s.evaluate(xi)?)?)?;
            Ok((p.xi, p.eta))
        })
        .collect::<Result<Vec<_>>>()?;
    QuadraticSection::fit(&samples)
}
