//! Unitary evolution `exp(-iHt)`, exact and analytic, plus validity
//! diagnostics for the rotating-wave approximation and the elimination of
//! the upper level.

use alloc::vec::Vec;

use nalgebra::DVector;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fock::{sector_split, FockBasis, LinearOperator, QuantumState, SectorBlocks, HERMITIAN_TOL};
use crate::hamiltonians::{
    build_three_mode, build_two_mode, effective_blocks, eigenvalue, EffectiveParams, RamanParams, TwoModeParams,
};
use crate::linalg::{expm, HermitianSpectrum};
use crate::states::BasisChange;

/// Evolution time `t`, optionally tagged with the rescaled time
/// `tau = 7 q t` used at the revival resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionTime {
    t: f64,
    tau: Option<(f64, f64)>,
}

impl EvolutionTime {
    pub fn from_t(t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::InvalidParameter("time must be finite"));
        }
        Ok(EvolutionTime { t, tau: None })
    }

    /// `t = tau / (7 q)`.
    pub fn from_tau(tau: f64, q: f64) -> Result<Self> {
        if q == 0.0 {
            return Err(Error::ZeroNonlinearity);
        }
        if !tau.is_finite() || !q.is_finite() {
            return Err(Error::InvalidParameter("time must be finite"));
        }
        Ok(EvolutionTime { t: tau / (7.0 * q), tau: Some((tau, q)) })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn tau(&self) -> Option<f64> {
        self.tau.map(|(tau, _)| tau)
    }
}

impl From<f64> for EvolutionTime {
    fn from(t: f64) -> Self {
        EvolutionTime { t, tau: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Diagonalize once, then multiply phases.
    #[default]
    Eigen,
    /// Padé scaling and squaring of `-iHt`.
    ScalingSquaring,
}

fn check_hermitian(h: &LinearOperator) -> Result<()> {
    let deviation = h.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        Err(Error::NotHermitian { deviation })
    } else {
        Ok(())
    }
}

/// Cached eigendecomposition of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct Propagator {
    basis: alloc::sync::Arc<FockBasis>,
    spectrum: HermitianSpectrum,
}

impl Propagator {
    pub fn new(h: &LinearOperator) -> Result<Self> {
        check_hermitian(h)?;
        Ok(Propagator { basis: h.basis().clone(), spectrum: HermitianSpectrum::new(h.matrix()) })
    }

    pub fn spectrum(&self) -> &HermitianSpectrum {
        &self.spectrum
    }

    pub fn evolve(&self, psi: &QuantumState, t: impl Into<EvolutionTime>) -> Result<QuantumState> {
        if psi.basis() != &self.basis {
            return Err(Error::BasisMismatch);
        }
        let t = t.into().t();
        if t == 0.0 {
            return Ok(psi.clone());
        }
        QuantumState::new(self.basis.clone(), self.spectrum.evolve(psi.amplitudes(), t))
    }
}

pub fn evolve(h: &LinearOperator, psi: &QuantumState, t: impl Into<EvolutionTime>) -> Result<QuantumState> {
    evolve_with(h, psi, t, Method::Eigen)
}

pub fn evolve_with(
    h: &LinearOperator,
    psi: &QuantumState,
    t: impl Into<EvolutionTime>,
    method: Method,
) -> Result<QuantumState> {
    check_hermitian(h)?;
    if h.basis() != psi.basis() {
        return Err(Error::BasisMismatch);
    }
    let t = t.into().t();
    if t == 0.0 {
        return Ok(psi.clone());
    }
    match method {
        Method::Eigen => Propagator::new(h)?.evolve(psi, t),
        Method::ScalingSquaring => {
            let u = expm(&(h.matrix() * Complex64::new(0.0, -t)));
            QuantumState::new(psi.basis().clone(), u * psi.amplitudes())
        }
    }
}

/// Per-sector eigendecompositions of a number-conserving operator.
#[derive(Debug, Clone)]
pub struct BlockPropagator {
    blocks: SectorBlocks,
    spectra: Vec<HermitianSpectrum>,
}

impl BlockPropagator {
    pub fn new(h: &SectorBlocks) -> Result<Self> {
        let spectra = h
            .blocks()
            .iter()
            .map(|b| {
                check_hermitian(b)?;
                Ok(HermitianSpectrum::new(b.matrix()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockPropagator { blocks: h.clone(), spectra })
    }

    pub fn evolve(&self, psi: &QuantumState, t: impl Into<EvolutionTime>) -> Result<QuantumState> {
        let t = t.into().t();
        if psi.basis() != self.blocks.parent() {
            return Err(Error::BasisMismatch);
        }
        if t == 0.0 {
            return Ok(psi.clone());
        }
        let parent = self.blocks.parent();
        let mut out = psi.amplitudes().clone();
        for (block, spectrum) in self.blocks.blocks().iter().zip(&self.spectra) {
            let indices: Vec<usize> = block
                .basis()
                .labels()
                .iter()
                .map(|occ| parent.index_of(occ).expect("sector label inside parent basis"))
                .collect();
            let local = DVector::from_iterator(indices.len(), indices.iter().map(|&i| out[i]));
            let image = spectrum.evolve(&local, t);
            for (k, &i) in indices.iter().enumerate() {
                out[i] = image[k];
            }
        }
        QuantumState::new(parent.clone(), out)
    }
}

/// Analytic evolution under the rotating-wave Hamiltonian: each `|n, m)`
/// amplitude picks up `exp(-i E(n, m) t)`.
pub fn evolve_rwa(p: &EffectiveParams, psi: &QuantumState, t: impl Into<EvolutionTime>) -> Result<QuantumState> {
    psi.basis().expect_modes(2)?;
    let t = t.into().t();
    if t == 0.0 {
        return Ok(psi.clone());
    }
    let amplitudes = DVector::from_iterator(
        psi.basis().dim(),
        psi.basis()
            .labels()
            .iter()
            .zip(psi.amplitudes().iter())
            .map(|(occ, a)| a * Complex64::new(0.0, -eigenvalue(occ[0], occ[1], p) * t).exp()),
    );
    QuantumState::new(psi.basis().clone(), amplitudes)
}

/// Overlap between exact two-mode evolution of a b-representation state and
/// the rotating-wave prediction mapped back to the b representation.
pub fn rwa_fidelity(p: &EffectiveParams, psi0: &QuantumState, t: impl Into<EvolutionTime>) -> Result<f64> {
    let t = t.into();
    let basis = psi0.basis();
    let exact = BlockPropagator::new(&effective_blocks(p, basis)?)?.evolve(psi0, t)?;
    let w = BasisChange::new(basis)?;
    let approx = w.inverse(&evolve_rwa(p, &w.forward(psi0)?, t)?)?;
    Ok(exact.inner(&approx)?.norm_sqr())
}

/// Largest three-mode sector the adiabatic check will diagonalize.
pub const MAX_SECTOR_DIM: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticReport {
    /// `|<psi_eff(t) (x) |0>_2 | psi_3(t)>|^2` at the final time.
    pub fidelity: f64,
    /// Largest mean occupation of level 2 over the sampled trajectory.
    pub max_mid_population: f64,
    /// Worst norm drift of the three-mode trajectory.
    pub norm_drift: f64,
    /// Worst drift of any sector weight of the three-mode trajectory.
    pub sector_drift: f64,
}

/// Compares three-mode evolution (level 2 initially empty) with evolution
/// under the eliminated two-mode Hamiltonian, sector by sector. The
/// trajectory is sampled on `samples` uniform points in `[0, t]`.
pub fn adiabatic_fidelity(
    p: &RamanParams,
    psi0: &QuantumState,
    t: impl Into<EvolutionTime>,
    samples: usize,
) -> Result<AdiabaticReport> {
    adiabatic_fidelity_with_limit(p, psi0, t, samples, MAX_SECTOR_DIM)
}

pub fn adiabatic_fidelity_with_limit(
    p: &RamanParams,
    psi0: &QuantumState,
    t: impl Into<EvolutionTime>,
    samples: usize,
    max_dim: usize,
) -> Result<AdiabaticReport> {
    if samples < 20 {
        return Err(Error::InvalidParameter("trajectory needs at least 20 samples"));
    }
    let t = t.into().t();
    let reduced = TwoModeParams::from_raman(p)?;
    let split = sector_split(psi0)?;

    struct Sector {
        three: HermitianSpectrum,
        three_start: DVector<Complex64>,
        mid_occupation: Vec<f64>,
        embed: Vec<usize>,
        two: HermitianSpectrum,
        two_start: DVector<Complex64>,
        weight: f64,
    }

    // refuse before diagonalizing anything
    if let Some(top) = split.sectors().iter().map(|(total, _)| *total).max() {
        let required = (top + 1) * (top + 2) / 2;
        if required > max_dim {
            return Err(Error::DimensionLimit { required, limit: max_dim });
        }
    }

    let mut sectors = Vec::new();
    for (total, component) in split.sectors() {
        let total = *total;
        let h3 = build_three_mode(p, total)?;
        let basis3 = h3.basis().clone();
        let basis2 = FockBasis::sector(2, total, total)?;
        let h2 = build_two_mode(&reduced, &basis2)?;
        let two_start = component.embed(&basis2)?.into_amplitudes();
        let embed: Vec<usize> = basis2
            .labels()
            .iter()
            .map(|occ| basis3.index_of(&[occ[0], 0, occ[1]]).expect("level-2 vacuum label"))
            .collect();
        let mut three_start = DVector::zeros(basis3.dim());
        for (k, &i) in embed.iter().enumerate() {
            three_start[i] = two_start[k];
        }
        sectors.push(Sector {
            three: HermitianSpectrum::new(h3.matrix()),
            mid_occupation: basis3.labels().iter().map(|occ| occ[1] as f64).collect(),
            weight: two_start.norm_squared(),
            three_start,
            embed,
            two: HermitianSpectrum::new(h2.matrix()),
            two_start,
        });
    }

    let total_weight: f64 = sectors.iter().map(|s| s.weight).sum();
    let mut max_mid_population: f64 = 0.0;
    let mut norm_drift: f64 = 0.0;
    let mut sector_drift: f64 = 0.0;
    for k in 0..samples {
        let tk = t * k as f64 / (samples - 1) as f64;
        let mut mid = 0.0;
        let mut norm_sq = 0.0;
        for s in &sectors {
            let psi = s.three.evolve(&s.three_start, tk);
            let w = psi.norm_squared();
            sector_drift = sector_drift.max((w - s.weight).abs());
            norm_sq += w;
            mid += psi.iter().zip(&s.mid_occupation).map(|(a, n)| a.norm_sqr() * n).sum::<f64>();
        }
        norm_drift = norm_drift.max((norm_sq.sqrt() - total_weight.sqrt()).abs());
        max_mid_population = max_mid_population.max(mid);
    }

    let mut overlap = Complex64::new(0.0, 0.0);
    for s in &sectors {
        let three = s.three.evolve(&s.three_start, t);
        let two = s.two.evolve(&s.two_start, t);
        for (k, &i) in s.embed.iter().enumerate() {
            overlap += two[k].conj() * three[i];
        }
    }

    Ok(AdiabaticReport { fidelity: overlap.norm_sqr(), max_mid_population, norm_drift, sector_drift })
}
