//! Homogenized dispersion relation `τ² E(κ̂) = ζ₀ β(ζ₀)` with
//! `β(ζ) = ∫_Q ψ₀ = |P^c| + Σ μ_n⟨φ_n⟩²/(μ_n ∓ ζ)`.
//!
//! For positive contrast the relation has asymptotes at the nonzero-mean
//! eigenvalues `μ_n`; band `m` is `[μ*_m, μ_m)` with `μ*₀ = 0` and `μ*_m` the
//! root of `β` between `μ_{m−1}` and `μ_m`. For negative contrast there is a
//! single branch through the origin.

use crate::cell::CellProblem;
use crate::error::{Error, Result};
use crate::fem::FieldVector;
use crate::mesh::Region;
use crate::spectrum::{ContrastSign, DirichletSpectrum};

/// Unit vector at `angle_deg` degrees from the first axis.
pub fn direction_from_degrees(angle_deg: f64) -> [f64; 2] {
    let t = angle_deg.to_radians();
    let (s, c) = t.sin_cos();
    // Snap exact quarter turns so that, e.g., 90° gives (0, 1).
    let snap = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
    [snap(c), snap(s)]
}

/// Conversions between physical and reduced variables:
/// `τ² = γk²`, `ζ = γω²/c²`, `η = kd`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalScales {
    pub gamma: f64,
    pub wave_speed: f64,
    pub period: f64,
}

impl PhysicalScales {
    pub fn tau(&self, k: f64) -> f64 {
        self.gamma.sqrt() * k
    }

    pub fn zeta(&self, omega: f64) -> f64 {
        self.gamma * omega * omega / (self.wave_speed * self.wave_speed)
    }

    pub fn eta(&self, k: f64) -> f64 {
        k * self.period
    }

    pub fn omega(&self, zeta: f64) -> f64 {
        self.wave_speed * (zeta / self.gamma).sqrt()
    }
}

/// One branch of the relation in a fixed direction.
#[derive(Clone, Debug)]
pub struct DispersionBranch {
    pub index: usize,
    pub sign: ContrastSign,
    pub direction: [f64; 2],
    pub effective: f64,
    /// `[μ*_m, μ_m)`; the upper end is infinite for negative contrast.
    pub band: (f64, f64),
    pub psi1: FieldVector,
}

/// The relation for a direction `κ̂` and sign, backed by a spectrum.
#[derive(Clone, Debug)]
pub struct DispersionRelation<'s> {
    pub spectrum: &'s DirichletSpectrum,
    pub sign: ContrastSign,
    pub direction: [f64; 2],
    pub effective: f64,
    pub psi1: FieldVector,
}

impl<'s> DispersionRelation<'s> {
    /// Solves for `ψ₁` and `E(κ̂)` on the mesh of `cell`.
    pub fn new(cell: &CellProblem<'_>, spectrum: &'s DirichletSpectrum, sign: ContrastSign) -> Result<Self> {
        let psi1 = cell.solve_psi1()?;
        let effective = cell.effective(&psi1);
        Ok(DispersionRelation {
            spectrum,
            sign,
            direction: cell.direction,
            effective,
            psi1: FieldVector::new(Region::Pc, psi1),
        })
    }

    /// With an externally supplied effective constant (no mesh needed).
    pub fn with_effective(spectrum: &'s DirichletSpectrum, sign: ContrastSign, direction: [f64; 2], effective: f64) -> Self {
        DispersionRelation {
            spectrum,
            sign,
            direction,
            effective,
            psi1: FieldVector::new(Region::Pc, Vec::new()),
        }
    }

    /// `β(ζ)` including the tail estimate.
    pub fn beta(&self, zeta: f64) -> Result<f64> {
        let s = self.spectrum.dispersion_factor(zeta, self.sign)?;
        Ok(s.value + s.tail)
    }

    /// `τ²(ζ₀) = ζ₀ β(ζ₀) / E`; negative values lie in a gap.
    pub fn tau_squared(&self, zeta0: f64) -> Result<f64> {
        if zeta0 == 0.0 {
            return Ok(0.0);
        }
        Ok(zeta0 * self.beta(zeta0)? / self.effective)
    }

    /// Asymptotes `μ_n` of the relation (empty for negative contrast).
    pub fn asymptotes(&self) -> Vec<f64> {
        match self.sign {
            ContrastSign::Positive => self.spectrum.mu(),
            ContrastSign::Negative => Vec::new(),
        }
    }

    /// Band edges `μ*_m` for every band whose upper end is a computed `μ_m`.
    pub fn band_edges(&self) -> Result<Vec<f64>> {
        let mu = self.spectrum.mu();
        if self.sign == ContrastSign::Negative || mu.is_empty() {
            return Ok(vec![0.0]);
        }
        let mut edges = vec![0.0];
        for m in 1..mu.len() {
            edges.push(self.band_edge(m)?.0);
        }
        Ok(edges)
    }

    /// Root of `β` in `(μ_{m−1}, μ_m)` with its residual.
    pub fn band_edge(&self, m: usize) -> Result<(f64, f64)> {
        if m == 0 {
            return Ok((0.0, 0.0));
        }
        if self.sign == ContrastSign::Negative {
            return Err(Error::Bracket("negative contrast has a single band".into()));
        }
        let mu = self.spectrum.mu();
        if m >= mu.len() {
            return Err(Error::Bracket(format!(
                "band {m} needs {} nonzero-mean modes, have {}",
                m + 1,
                mu.len()
            )));
        }
        let mut lo = mu[m - 1] * (1.0 + 1e-8);
        let mut hi = mu[m] * (1.0 - 1e-8);
        let (flo, fhi) = (self.beta(lo)?, self.beta(hi)?);
        if !(flo < 0.0 && fhi > 0.0) {
            return Err(Error::Bracket(format!(
                "no sign change of β on ({}, {}): {flo:.3e}, {fhi:.3e}",
                mu[m - 1],
                mu[m]
            )));
        }
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.beta(mid)? < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (blo, bhi) = (self.beta(lo)?, self.beta(hi)?);
        Ok(if blo.abs() <= bhi.abs() { (lo, blo) } else { (hi, bhi) })
    }

    pub fn branch(&self, m: usize) -> Result<DispersionBranch> {
        let band = match self.sign {
            ContrastSign::Negative => {
                if m != 0 {
                    return Err(Error::Inversion("negative contrast has only branch 0".into()));
                }
                (0.0, f64::INFINITY)
            }
            ContrastSign::Positive => {
                let mu = self.spectrum.mu();
                if m >= mu.len() {
                    return Err(Error::Inversion(format!("branch {m} beyond computed spectrum")));
                }
                (self.band_edge(m)?.0, mu[m])
            }
        };
        Ok(DispersionBranch {
            index: m,
            sign: self.sign,
            direction: self.direction,
            effective: self.effective,
            band,
            psi1: self.psi1.clone(),
        })
    }

    /// `ζ₀` on branch `m` with `τ²(ζ₀) = τ²`, by bisection.
    pub fn invert_branch(&self, m: usize, tau: f64) -> Result<f64> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::Inversion(format!("τ = {tau} must be finite and nonnegative")));
        }
        let br = self.branch(m)?;
        let target = tau * tau;
        if target == 0.0 {
            return Ok(br.band.0);
        }
        let mut lo = br.band.0;
        let mut hi = match self.sign {
            ContrastSign::Positive => br.band.1 * (1.0 - 1e-8),
            ContrastSign::Negative => {
                let mut h = 1.0_f64.max(target * self.effective);
                while self.tau_squared(h)? < target {
                    h *= 2.0;
                    if h > 1e300 {
                        return Err(Error::Inversion("τ² unreachable".into()));
                    }
                }
                h
            }
        };
        if self.tau_squared(hi)? < target {
            return Err(Error::Inversion(format!(
                "τ² = {target} exceeds the truncated branch maximum {}",
                self.tau_squared(hi)?
            )));
        }
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.tau_squared(mid)? < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (elo, ehi) = (
            (self.tau_squared(lo)? - target).abs(),
            (self.tau_squared(hi)? - target).abs(),
        );
        let z = if elo <= ehi { lo } else { hi };
        let err = elo.min(ehi) / target;
        if err > 1e-10 {
            return Err(Error::Inversion(format!("round-trip error {err:.3e}")));
        }
        Ok(z)
    }

    /// Discrete branch point: the `ζ₀` near `guess` where the mesh relation
    /// `τ² E_h = ζ₀ ∫_Q ψ₀,h(ζ₀)` holds exactly.
    ///
    /// The spectral relation truncates the eigenfunction sum; the hierarchy
    /// needs the discrete root so that every Fredholm defect vanishes.
    pub fn discrete_zeta0(&self, cell: &CellProblem<'_>, m: usize, tau: f64, guess: f64) -> Result<f64> {
        let target = tau * tau * self.effective;
        if target == 0.0 && m == 0 {
            return Ok(0.0);
        }
        let g = |z: f64| -> Result<f64> { Ok(z * cell.psi0_integral(z, self.sign)? - target) };
        let (band_lo, band_hi) = self.branch(m).map(|b| b.band)?;
        let width = if band_hi.is_finite() {
            band_hi - band_lo
        } else {
            guess.max(1.0)
        };
        let floor = if m == 0 {
            0.0
        } else {
            let mu = self.spectrum.mu();
            mu[m - 1] * (1.0 + 1e-8)
        };
        let mut delta = 1e-6 * width.max(guess.abs());
        let (mut lo, mut hi);
        loop {
            lo = (guess - delta).max(floor);
            hi = guess + delta;
            if band_hi.is_finite() {
                hi = hi.min(band_hi - 1e-8 * band_hi);
            }
            let (glo, ghi) = (g(lo)?, g(hi)?);
            if glo <= 0.0 && ghi >= 0.0 {
                break;
            }
            delta *= 4.0;
            if delta > width {
                return Err(Error::Inversion(format!(
                    "no discrete branch point near {guess} (g = {glo:.3e}, {ghi:.3e})"
                )));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid)? < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (glo, ghi) = (g(lo)?.abs(), g(hi)?.abs());
        Ok(if glo <= ghi { lo } else { hi })
    }
}

/// One point `(ζ₀, τ²)` of a band.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DispersionSample {
    pub zeta0: f64,
    pub tau_sq: f64,
    pub band: usize,
}

/// Closest relative approach to an asymptote in [`sample_bands`].
pub const SAMPLE_POLE_GAP: f64 = 1e-4;

impl DispersionRelation<'_> {
    /// Samples every computed band on `[μ*_m, μ_m)`, half uniformly and half
    /// geometrically clustered toward the asymptote. Negative contrast samples
    /// its single band on `[0, zeta_max]`.
    pub fn sample_bands(&self, per_band: usize, zeta_max: f64) -> Result<Vec<DispersionSample>> {
        let per_band = per_band.max(2);
        let mut out = Vec::new();
        let intervals: Vec<(usize, f64, f64, bool)> = match self.sign {
            ContrastSign::Negative => vec![(0, 0.0, zeta_max, false)],
            ContrastSign::Positive => {
                let mu = self.spectrum.mu();
                let mut v = Vec::with_capacity(mu.len());
                for (m, &hi) in mu.iter().enumerate() {
                    v.push((m, self.band_edge(m)?.0, hi, true));
                }
                v
            }
        };
        for (m, lo, hi, pole) in intervals {
            let width = hi - lo;
            let mut zs: Vec<f64> = (0..per_band / 2).map(|k| lo + width * k as f64 / (per_band / 2) as f64).collect();
            if pole {
                let n = per_band - per_band / 2;
                let top = width.ln();
                let bottom = (SAMPLE_POLE_GAP * hi).ln();
                zs.extend((0..n).map(|k| hi - (top + (bottom - top) * (k + 1) as f64 / n as f64).exp()));
            } else {
                zs.push(hi);
            }
            zs.sort_by(f64::total_cmp);
            zs.dedup();
            for z in zs {
                out.push(DispersionSample {
                    zeta0: z,
                    tau_sq: self.tau_squared(z)?,
                    band: m,
                });
            }
        }
        Ok(out)
    }
}

/// `ψ₂` on `P^c` from the second cell problem, given `ψ₀` and `ψ₁`.
///
/// Errors with the Fredholm defect when `(τ², ζ₀)` is off the discrete branch.
pub fn solve_psi2(
    cell: &CellProblem<'_>,
    sign: ContrastSign,
    tau_sq: f64,
    zeta0: f64,
    psi0: &[f64],
    psi1: &[f64],
) -> Result<(Vec<f64>, f64)> {
    let ops = cell.ops;
    let n = cell.n();
    let mut rhs = vec![0.0; n];
    let s1 = cell.skew_pc.matvec(psi1);
    let m0 = ops.mass_pc.matvec(psi0);
    let mq = {
        let mut v = ops.mass_p.matvec(psi0);
        for (a, b) in v.iter_mut().zip(&m0) {
            *a += b;
        }
        v
    };
    let kp = cell.stiffness_p_psi(psi0, true);
    for i in 0..n {
        rhs[i] = -tau_sq * s1[i] + tau_sq * m0[i] - zeta0 * mq[i] + sign.chi() * kp[i];
    }
    let scaled: Vec<f64> = rhs.iter().map(|v| v / tau_sq.max(f64::MIN_POSITIVE)).collect();
    if tau_sq == 0.0 {
        let defect = cell.neumann.defect(&rhs);
        if rhs.iter().all(|v| v.abs() < 1e-14) {
            return Ok((vec![0.0; n], 0.0));
        }
        return Err(Error::Solvability {
            context: "second cell problem at τ = 0".into(),
            defect,
            tolerance: crate::fem::solve::SOLVABILITY_TOL,
        });
    }
    let (x, rep) = cell
        .neumann
        .solve(&scaled, crate::fem::solve::SOLVABILITY_TOL)
        .map_err(|e| match e {
            Error::Solvability { defect, tolerance, .. } => Error::Solvability {
                context: "second cell problem".into(),
                defect,
                tolerance,
            },
            other => other,
        })?;
    Ok((x, rep.defect))
}
