//! Dirichlet spectrum of `−Δ` on the inclusion and the spectral sums built
//! from it.
//!
//! Eigenvalues `ν_j` split into the nonzero-mean family `μ_n` (eigenfunctions
//! with nonzero average over `P`) and the zero-mean family `μ′_ℓ`. Only the
//! former enter the dispersion relation.

pub mod bessel;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{eigensolve, CellOperators, EigenOptions, FieldVector};
use crate::mesh::{CellGeometry, Inclusion, NodeTag, Region};

/// Default mean-classification threshold relative to `√|P|`.
pub const DEFAULT_MEAN_THRESHOLD: f64 = 1e-2;
/// Relative gap below which neighbouring eigenvalues form one cluster.
pub const CLUSTER_GAP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Fem,
    BesselDisk,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeanClass {
    NonzeroMean,
    ZeroMean,
}

impl MeanClass {
    pub fn label(self) -> &'static str {
        match self {
            MeanClass::NonzeroMean => "nonzero_mean",
            MeanClass::ZeroMean => "zero_mean",
        }
    }
}

/// Sign of the inclusion coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContrastSign {
    Positive,
    Negative,
}

impl ContrastSign {
    /// `χ = ±1`.
    pub fn chi(self) -> f64 {
        match self {
            ContrastSign::Positive => 1.0,
            ContrastSign::Negative => -1.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DirichletMode {
    pub nu: f64,
    /// `⟨φ⟩_P = ∫_P φ` for the `L²(P)`-normalized eigenfunction.
    pub mean: f64,
    pub class: MeanClass,
    /// Full-length nodal field (FEM backend only).
    pub field: Option<Vec<f64>>,
    /// Angular order of the disk mode (Bessel backend only).
    pub angular_order: Option<u32>,
}

#[derive(Clone, Debug)]
pub struct DirichletSpectrum {
    pub modes: Vec<DirichletMode>,
    pub threshold: f64,
    pub backend: Backend,
    pub area_p: f64,
    pub area_pc: f64,
    /// 1 on interior and interface nodes of `P` (FEM backend only).
    pub p_indicator: Option<Vec<f64>>,
}

/// Truncated spectral sum with an estimate of the omitted tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralSum {
    pub value: f64,
    pub tail: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectralKind {
    Psi0,
    PsiStar,
    SolvabilityConst,
}

/// Result of [`DirichletSpectrum::spectral_sum`].
#[derive(Clone, Debug)]
pub enum SpectralValue {
    Scalar(SpectralSum),
    /// Field on `P` with the `L²(P)` size of the omitted tail.
    Field(FieldVector, f64),
}

impl DirichletSpectrum {
    /// Computes `n_modes` Dirichlet eigenpairs of the inclusion and classifies them.
    pub fn compute(
        geom: &CellGeometry,
        ops: &CellOperators,
        n_modes: usize,
        backend: Backend,
        threshold: f64,
    ) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::Backend("at least one mode is required".into()));
        }
        let spec = match backend {
            Backend::Fem => Self::fem(geom, ops, n_modes, threshold)?,
            Backend::BesselDisk => Self::bessel(geom, n_modes, threshold)?,
        };
        Ok(spec.classify(threshold))
    }

    fn fem(geom: &CellGeometry, ops: &CellOperators, n_modes: usize, threshold: f64) -> Result<Self> {
        let interior = geom.dofs_tagged(NodeTag::InteriorP);
        if n_modes > interior.len() {
            return Err(Error::Backend(format!(
                "{n_modes} modes requested but the inclusion has {} interior nodes",
                interior.len()
            )));
        }
        let k = ops.stiffness_p.restrict(&interior);
        let m = ops.mass_p.restrict(&interior);
        let opts = EigenOptions {
            guard: (n_modes / 2).max(12),
            ..EigenOptions::default()
        };
        let pairs = eigensolve(&k, &m, n_modes, 0.0, &opts)?;
        let ones = vec![1.0; geom.n_dofs()];
        let w = ops.mass_p.matvec(&ones);
        let modes = pairs
            .into_iter()
            .map(|p| {
                let mut field = vec![0.0; geom.n_dofs()];
                for (i, &d) in interior.iter().enumerate() {
                    field[d] = p.vector[i];
                }
                let mean = field.iter().zip(&w).map(|(a, b)| a * b).sum();
                DirichletMode {
                    nu: p.value,
                    mean,
                    class: MeanClass::NonzeroMean,
                    field: Some(field),
                    angular_order: None,
                }
            })
            .collect();
        Ok(DirichletSpectrum {
            modes,
            threshold,
            backend: Backend::Fem,
            area_p: ops.area_p,
            area_pc: ops.area_pc,
            p_indicator: Some(indicator(geom, Region::P)),
        })
    }

    fn bessel(geom: &CellGeometry, n_modes: usize, threshold: f64) -> Result<Self> {
        let radius = match geom.inclusion {
            Inclusion::Disk { radius, .. } => radius,
            Inclusion::Polygon { .. } => {
                return Err(Error::Backend("the Bessel backend requires a disk inclusion".into()))
            }
        };
        Ok(Self::bessel_disk(radius, n_modes, threshold))
    }

    /// Analytic spectrum of a disk of the given radius.
    pub fn bessel_disk(radius: f64, n_modes: usize, threshold: f64) -> Self {
        let mut modes = Vec::with_capacity(n_modes);
        for e in bessel::disk_eigenvalues(radius, n_modes) {
            for _ in 0..e.multiplicity {
                if modes.len() == n_modes {
                    break;
                }
                let mean = if e.order == 0 {
                    2.0 * PI.sqrt() * radius / e.zero
                } else {
                    0.0
                };
                modes.push(DirichletMode {
                    nu: e.nu,
                    mean,
                    class: MeanClass::NonzeroMean,
                    field: None,
                    angular_order: Some(e.order),
                });
            }
        }
        let area_p = PI * radius * radius;
        DirichletSpectrum {
            modes,
            threshold,
            backend: Backend::BesselDisk,
            area_p,
            area_pc: 1.0 - area_p,
            p_indicator: None,
        }
        .classify(threshold)
    }

    /// Rotates degenerate clusters so at most one vector carries the mean,
    /// then classifies by `|mean| ≤ θ√|P|` and makes nonzero means positive.
    pub fn classify(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        let cut = threshold * self.area_p.sqrt();
        let mut start = 0;
        while start < self.modes.len() {
            let mut end = start + 1;
            while end < self.modes.len()
                && (self.modes[end].nu - self.modes[end - 1].nu).abs()
                    <= CLUSTER_GAP * self.modes[end].nu.abs()
            {
                end += 1;
            }
            if end - start > 1 {
                rotate_cluster(&mut self.modes[start..end]);
            }
            start = end;
        }
        for m in self.modes.iter_mut() {
            m.class = if m.mean.abs() <= cut {
                MeanClass::ZeroMean
            } else {
                MeanClass::NonzeroMean
            };
            if m.class == MeanClass::NonzeroMean && m.mean < 0.0 {
                m.mean = -m.mean;
                if let Some(f) = m.field.as_mut() {
                    f.iter_mut().for_each(|v| *v = -*v);
                }
            }
        }
        self
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn nonzero_mean(&self) -> impl Iterator<Item = &DirichletMode> {
        self.modes.iter().filter(|m| m.class == MeanClass::NonzeroMean)
    }

    pub fn zero_mean(&self) -> impl Iterator<Item = &DirichletMode> {
        self.modes.iter().filter(|m| m.class == MeanClass::ZeroMean)
    }

    /// Nonzero-mean eigenvalues `μ_n`, ascending.
    pub fn mu(&self) -> Vec<f64> {
        self.nonzero_mean().map(|m| m.nu).collect()
    }

    /// Zero-mean eigenvalues `μ′_ℓ`, ascending.
    pub fn mu_prime(&self) -> Vec<f64> {
        self.zero_mean().map(|m| m.nu).collect()
    }

    pub fn largest(&self) -> f64 {
        self.modes.last().map_or(f64::INFINITY, |m| m.nu)
    }

    /// Parseval remainder `|P| − Σ⟨φ_j⟩²` (nonnegative up to roundoff).
    pub fn parseval_remainder(&self) -> f64 {
        let s: f64 = self.modes.iter().map(|m| m.mean * m.mean).sum();
        (self.area_p - s).max(0.0)
    }

    /// Positive sign: error if `ζ₀` lies within `epsilon` of any `ν_j`.
    pub fn check_resonance(&self, zeta0: f64, sign: ContrastSign, epsilon: f64) -> Result<()> {
        if sign == ContrastSign::Negative {
            return Ok(());
        }
        for m in &self.modes {
            let d = (zeta0 - m.nu).abs();
            if d < epsilon {
                return Err(Error::Resonance {
                    zeta: zeta0,
                    eigenvalue: m.nu,
                    distance: d,
                });
            }
        }
        Ok(())
    }

    /// Default resonance exclusion `10⁻³ μ₁`.
    pub fn default_epsilon(&self) -> f64 {
        1e-3 * self.modes.first().map_or(1.0, |m| m.nu)
    }

    /// `β(ζ) = |P^c| + Σ μ_n⟨φ_n⟩²/(μ_n ∓ ζ)`, evaluated in the Parseval form
    /// `1 ± ζ Σ⟨φ_n⟩²/(μ_n ∓ ζ)` plus a tail estimate. This is `∫_Q ψ₀`.
    pub fn dispersion_factor(&self, zeta: f64, sign: ContrastSign) -> Result<SpectralSum> {
        let s = sign.chi();
        let mut acc = 0.0;
        for m in self.nonzero_mean() {
            let den = m.nu - s * zeta;
            if den.abs() <= 1e-9 * m.nu {
                return Err(Error::Pole { zeta, pole: m.nu });
            }
            acc += m.mean * m.mean / den;
        }
        let nu_n = self.largest();
        let tail = if nu_n - s * zeta > 0.0 {
            s * zeta * self.parseval_remainder() / (nu_n - s * zeta)
        } else {
            0.0
        };
        Ok(SpectralSum {
            value: self.area_pc + self.area_p + s * zeta * acc,
            tail,
        })
    }

    /// `|P^c| + Σ μ_n²⟨φ_n⟩²/(μ_n ∓ ζ₀)²`, the derivative of `ζ β(ζ)`.
    pub fn solvability_const(&self, zeta0: f64, sign: ContrastSign) -> SpectralSum {
        let s = sign.chi();
        let mut acc = 0.0;
        for m in self.nonzero_mean() {
            let r = m.nu / (m.nu - s * zeta0);
            acc += m.mean * m.mean * r * r;
        }
        let nu_n = self.largest();
        let f = nu_n / (nu_n - s * zeta0);
        SpectralSum {
            value: self.area_pc + acc,
            tail: self.parseval_remainder() * f * f,
        }
    }

    /// Spectral representations of `ψ₀`, `ψ*` and the solvability constant.
    pub fn spectral_sum(
        &self,
        zeta0: f64,
        kind: SpectralKind,
        sign: ContrastSign,
        epsilon: f64,
    ) -> Result<SpectralValue> {
        self.check_resonance(zeta0, sign, epsilon)?;
        let s = sign.chi();
        let nu_n = self.largest();
        let rem = self.parseval_remainder().sqrt();
        match kind {
            SpectralKind::SolvabilityConst => {
                Ok(SpectralValue::Scalar(self.solvability_const(zeta0, sign)))
            }
            SpectralKind::Psi0 => {
                // ψ₀ = 1 ± ζ₀ Σ ⟨φ⟩/(μ ∓ ζ₀) φ on P (exact on ∂P).
                let mut f = self.p_closure_ones()?;
                for m in self.nonzero_mean() {
                    let c = s * zeta0 * m.mean / (m.nu - s * zeta0);
                    axpy_field(c, m.field.as_ref().unwrap(), &mut f);
                }
                let tail = zeta0.abs() * rem / (nu_n - s * zeta0).abs();
                Ok(SpectralValue::Field(FieldVector::new(Region::P, f), tail))
            }
            SpectralKind::PsiStar => {
                let mut f = vec![0.0; self.field_len()?];
                for m in self.nonzero_mean() {
                    let d = m.nu - s * zeta0;
                    let c = s * m.nu * m.mean / (d * d);
                    axpy_field(c, m.field.as_ref().unwrap(), &mut f);
                }
                let d = nu_n - s * zeta0;
                let tail = nu_n * rem / (d * d);
                Ok(SpectralValue::Field(FieldVector::new(Region::P, f), tail))
            }
        }
    }

    fn field_len(&self) -> Result<usize> {
        self.modes
            .first()
            .and_then(|m| m.field.as_ref())
            .map(|f| f.len())
            .ok_or_else(|| Error::Backend("spectral fields require the FEM backend".into()))
    }

    fn p_closure_ones(&self) -> Result<Vec<f64>> {
        self.p_indicator
            .clone()
            .ok_or_else(|| Error::Backend("spectral fields require the FEM backend".into()))
    }
}

/// 1 on the closure of `region`, 0 elsewhere.
pub fn indicator(geom: &CellGeometry, region: Region) -> Vec<f64> {
    let mut v = vec![0.0; geom.n_dofs()];
    for d in geom.closure_dofs(region) {
        v[d] = 1.0;
    }
    v
}

fn axpy_field(c: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}

/// Householder-style rotation: the first vector takes the direction of the
/// mean vector, the rest span its orthogonal complement (zero mean).
fn rotate_cluster(modes: &mut [DirichletMode]) {
    let k = modes.len();
    let means: Vec<f64> = modes.iter().map(|m| m.mean).collect();
    let norm = means.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    // Orthonormal basis whose first column is means / norm.
    let mut basis: Vec<Vec<f64>> = vec![means.iter().map(|v| v / norm).collect()];
    for e in 0..k {
        let mut v = vec![0.0; k];
        v[e] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let c: f64 = b.iter().zip(&v).map(|(x, y)| x * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= c * bi;
                }
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 && basis.len() < k {
            basis.push(v.iter().map(|x| x / n).collect());
        }
    }
    let fields: Option<Vec<Vec<f64>>> = modes.iter().map(|m| m.field.clone()).collect();
    for (i, b) in basis.iter().enumerate() {
        modes[i].mean = if i == 0 { norm } else { 0.0 };
        if let Some(fs) = fields.as_ref() {
            let mut f = vec![0.0; fs[0].len()];
            for (c, fj) in b.iter().zip(fs) {
                axpy_field(*c, fj, &mut f);
            }
            modes[i].field = Some(f);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mode(nu: f64, mean: f64) -> DirichletMode {
        DirichletMode {
            nu,
            mean,
            class: MeanClass::NonzeroMean,
            field: None,
            angular_order: None,
        }
    }

    fn synthetic(modes: Vec<DirichletMode>) -> DirichletSpectrum {
        DirichletSpectrum {
            modes,
            threshold: DEFAULT_MEAN_THRESHOLD,
            backend: Backend::BesselDisk,
            area_p: 0.5,
            area_pc: 0.5,
            p_indicator: None,
        }
    }

    #[test]
    fn bessel_first_eigenvalue() {
        let s = DirichletSpectrum::bessel_disk(0.375, 12, DEFAULT_MEAN_THRESHOLD);
        let j01 = 2.404_825_557_695_773_f64;
        assert!((s.modes[0].nu - (j01 / 0.375).powi(2)).abs() < 1e-9);
        assert!((s.modes[0].nu - 41.1249).abs() < 1e-4);
    }

    #[test]
    fn angular_modes_are_zero_mean() {
        let s = DirichletSpectrum::bessel_disk(0.375, 12, DEFAULT_MEAN_THRESHOLD);
        for m in &s.modes {
            let radial = m.angular_order == Some(0);
            assert_eq!(m.class == MeanClass::NonzeroMean, radial, "nu = {}", m.nu);
        }
        assert_eq!(s.modes[1].class, MeanClass::ZeroMean);
        assert_eq!(s.modes[2].class, MeanClass::ZeroMean);
    }

    #[test]
    fn exact_zero_mean_is_zero_mean() {
        let s = synthetic(vec![mode(1.0, 0.3), mode(2.0, 0.0)]).classify(1e-12);
        assert_eq!(s.modes[1].class, MeanClass::ZeroMean);
        assert_eq!(s.modes[0].class, MeanClass::NonzeroMean);
    }

    #[test]
    fn degenerate_pair_rotated_onto_one_vector() {
        let s = synthetic(vec![mode(5.0, 0.3), mode(5.0, -0.4)]).classify(1e-6);
        assert!((s.modes[0].mean - 0.5).abs() < 1e-14);
        assert_eq!(s.modes[1].mean, 0.0);
        assert_eq!(s.mu(), vec![5.0]);
        assert_eq!(s.mu_prime(), vec![5.0]);
    }

    #[test]
    fn negative_means_flipped() {
        let s = synthetic(vec![mode(1.0, -0.3)]).classify(1e-6);
        assert!((s.modes[0].mean - 0.3).abs() < 1e-15);
    }

    #[test]
    fn solvability_constant_at_zero_is_parseval_sum() {
        let s = DirichletSpectrum::bessel_disk(0.375, 50, DEFAULT_MEAN_THRESHOLD);
        let c = s.solvability_const(0.0, ContrastSign::Positive);
        let sum: f64 = s.modes.iter().map(|m| m.mean * m.mean).sum();
        assert!((c.value - (s.area_pc + sum)).abs() < 1e-14);
        assert!(c.value <= 1.0 && c.value > s.area_pc);
        assert!((c.value + c.tail - 1.0).abs() < 1e-12);
    }

    #[test]
    fn resonance_and_pole_errors() {
        let s = DirichletSpectrum::bessel_disk(0.375, 12, DEFAULT_MEAN_THRESHOLD);
        let nu1 = s.modes[0].nu;
        let eps = s.default_epsilon();
        assert!(matches!(
            s.check_resonance(nu1 + 0.5 * eps, ContrastSign::Positive, eps),
            Err(Error::Resonance { .. })
        ));
        assert!(s.check_resonance(nu1, ContrastSign::Negative, eps).is_ok());
        assert!(matches!(s.dispersion_factor(nu1, ContrastSign::Positive), Err(Error::Pole { .. })));
    }

    #[test]
    fn dispersion_factor_is_unity_at_zero() {
        let s = DirichletSpectrum::bessel_disk(0.375, 50, DEFAULT_MEAN_THRESHOLD);
        let b = s.dispersion_factor(0.0, ContrastSign::Positive).unwrap();
        assert!((b.value - 1.0).abs() < 1e-14 && b.tail == 0.0);
    }
}
