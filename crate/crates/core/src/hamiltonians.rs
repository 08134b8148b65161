//! Model Hamiltonians in units with hbar = 1.
//!
//! * three-mode interaction-picture Hamiltonian of the Raman-coupled
//!   condensate, built one fixed-total-number sector at a time;
//! * the two-mode Hamiltonian left after eliminating the upper level, in its
//!   general ([`TwoModeParams`]) and symmetric ([`EffectiveParams`]) forms;
//! * the rotating-wave Hamiltonian, diagonal in the `(B1, B3)` Fock basis.

use alloc::sync::Arc;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fock::{FockBasis, LinearOperator, Occupation, SectorBlocks};
use crate::states::BasisChange;

/// Couplings of the three-level model. `g1`, `g2` couple levels 1 and 3 to
/// the upper level 2; `lambda_i` are self-collision strengths and
/// `lambda_ij` cross-collision strengths, each pair counted once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamanParams {
    pub g1: Complex64,
    pub g2: Complex64,
    pub delta1: f64,
    pub delta2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda12: f64,
    pub lambda13: f64,
    pub lambda23: f64,
}

impl RamanParams {
    /// Two-photon resonant couplings with no collisions.
    pub fn resonant(g1: Complex64, g2: Complex64, delta: f64) -> Self {
        RamanParams {
            g1,
            g2,
            delta1: delta,
            delta2: delta,
            lambda1: 0.0,
            lambda2: 0.0,
            lambda3: 0.0,
            lambda12: 0.0,
            lambda13: 0.0,
            lambda23: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let reals = [
            self.g1.re,
            self.g1.im,
            self.g2.re,
            self.g2.im,
            self.delta1,
            self.delta2,
            self.lambda1,
            self.lambda2,
            self.lambda3,
            self.lambda12,
            self.lambda13,
            self.lambda23,
        ];
        if reals.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter("Raman parameters must be finite"))
        }
    }

    fn common_detuning(&self) -> Result<f64> {
        self.validate()?;
        if !approx_eq(self.delta1, self.delta2) {
            return Err(Error::UnequalDetunings { delta1: self.delta1, delta2: self.delta2 });
        }
        if self.delta1 == 0.0 {
            return Err(Error::ZeroDetuning);
        }
        Ok(self.delta1)
    }
}

fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Symmetric two-mode couplings: level shift and tunnelling `g`,
/// self-interaction `q`, cross-interaction `chi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    pub g: f64,
    pub q: f64,
    pub chi: f64,
}

impl EffectiveParams {
    pub fn new(g: f64, q: f64, chi: f64) -> Result<Self> {
        if g.is_finite() && q.is_finite() && chi.is_finite() {
            Ok(EffectiveParams { g, q, chi })
        } else {
            Err(Error::InvalidParameter("effective parameters must be finite"))
        }
    }

    /// `omega = g - (chi + q)/2`.
    pub fn omega(&self) -> f64 {
        self.g - 0.5 * (self.chi + self.q)
    }
}

/// General two-mode Hamiltonian
/// `w1 n1 + w3 n3 + (t b3^dag b1 + t^* b1^dag b3)
///  + l1 b1^dag^2 b1^2 + l13 n1 n3 + l3 b3^dag^2 b3^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeParams {
    pub omega1: f64,
    pub omega3: f64,
    pub tunnelling: Complex64,
    pub lambda1: f64,
    pub lambda3: f64,
    pub lambda13: f64,
}

impl TwoModeParams {
    /// Adiabatic elimination of level 2 at two-photon resonance.
    pub fn from_raman(p: &RamanParams) -> Result<Self> {
        let delta = p.common_detuning()?;
        Ok(TwoModeParams {
            omega1: -p.g1.norm_sqr() / delta,
            omega3: -p.g2.norm_sqr() / delta,
            tunnelling: -(p.g1 * p.g2.conj()) / delta,
            lambda1: p.lambda1,
            lambda3: p.lambda3,
            lambda13: p.lambda13,
        })
    }
}

impl From<EffectiveParams> for TwoModeParams {
    fn from(p: EffectiveParams) -> Self {
        TwoModeParams {
            omega1: p.g,
            omega3: p.g,
            tunnelling: Complex64::new(p.g, 0.0),
            lambda1: p.q,
            lambda3: p.q,
            lambda13: 2.0 * p.chi,
        }
    }
}

/// Symmetric reduction: needs equal nonzero detunings, `|g1| = |g2|` and
/// `lambda1 = lambda3`. A relative phase between `g1` and `g2` only rephases
/// mode 3 and is dropped.
pub fn effective_from_raman(p: &RamanParams) -> Result<EffectiveParams> {
    let delta = p.common_detuning()?;
    if !approx_eq(p.g1.norm(), p.g2.norm()) {
        return Err(Error::Asymmetric("|g1| = |g2|"));
    }
    if !approx_eq(p.lambda1, p.lambda3) {
        return Err(Error::Asymmetric("lambda1 = lambda3"));
    }
    EffectiveParams::new(-p.g1.norm_sqr() / delta, p.lambda1, 0.5 * p.lambda13)
}

fn pair(n: usize) -> f64 {
    (n * n.saturating_sub(1)) as f64
}

fn hop(from: usize, to: usize) -> f64 {
    ((from * (to + 1)) as f64).sqrt()
}

/// Three-mode Hamiltonian on the sector `n1 + n2 + n3 = total`.
pub fn build_three_mode(p: &RamanParams, total: usize) -> Result<LinearOperator> {
    p.validate()?;
    let basis = FockBasis::sector(3, total, total)?;
    let op = LinearOperator::from_action(basis, |occ, out| {
        let [n1, n2, n3] = *occ;
        let (f1, f2, f3) = (n1 as f64, n2 as f64, n3 as f64);
        let diag = (p.delta1 - p.delta2) * f3
            + p.delta1 * f2
            + p.lambda1 * pair(n1)
            + p.lambda2 * pair(n2)
            + p.lambda3 * pair(n3)
            + p.lambda12 * f1 * f2
            + p.lambda13 * f1 * f3
            + p.lambda23 * f2 * f3;
        out.push((*occ, Complex64::new(diag, 0.0)));
        if n1 > 0 {
            out.push(([n1 - 1, n2 + 1, n3], -p.g1 * hop(n1, n2)));
        }
        if n3 > 0 {
            out.push(([n1, n2 + 1, n3 - 1], -p.g2 * hop(n3, n2)));
        }
        if n2 > 0 {
            out.push(([n1 + 1, n2 - 1, n3], -p.g1.conj() * hop(n2, n1)));
            out.push(([n1, n2 - 1, n3 + 1], -p.g2.conj() * hop(n2, n3)));
        }
    });
    op.into_hermitian()
}

fn two_mode_action(p: &TwoModeParams) -> impl Fn(&Occupation, &mut alloc::vec::Vec<(Occupation, Complex64)>) + '_ {
    move |occ, out| {
        let [n1, n3, _] = *occ;
        let diag = p.omega1 * n1 as f64
            + p.omega3 * n3 as f64
            + p.lambda1 * pair(n1)
            + p.lambda3 * pair(n3)
            + p.lambda13 * (n1 * n3) as f64;
        out.push((*occ, Complex64::new(diag, 0.0)));
        if n1 > 0 {
            out.push(([n1 - 1, n3 + 1, 0], p.tunnelling * hop(n1, n3)));
        }
        if n3 > 0 {
            out.push(([n1 + 1, n3 - 1, 0], p.tunnelling.conj() * hop(n3, n1)));
        }
    }
}

/// General two-mode Hamiltonian on any two-mode basis (full or sector).
pub fn build_two_mode(p: &TwoModeParams, basis: &Arc<FockBasis>) -> Result<LinearOperator> {
    basis.expect_modes(2)?;
    LinearOperator::from_action(basis.clone(), two_mode_action(p)).into_hermitian()
}

pub fn build_effective(p: &EffectiveParams, basis: &Arc<FockBasis>) -> Result<LinearOperator> {
    build_two_mode(&TwoModeParams::from(*p), basis)
}

pub fn two_mode_blocks(p: &TwoModeParams, parent: &Arc<FockBasis>) -> Result<SectorBlocks> {
    SectorBlocks::build(parent, |sector| build_two_mode(p, sector))
}

pub fn effective_blocks(p: &EffectiveParams, parent: &Arc<FockBasis>) -> Result<SectorBlocks> {
    two_mode_blocks(&TwoModeParams::from(*p), parent)
}

/// Closed-form rotating-wave eigenvalue of `|n, m)`.
pub fn eigenvalue(n: usize, m: usize, p: &EffectiveParams) -> f64 {
    let (n, m) = (n as f64, m as f64);
    let total = n + m;
    p.omega() * total + p.g * (n - m) + 0.5 * (p.q + p.chi) * total * total + (p.q - p.chi) * n * m
}

/// Rotating-wave Hamiltonian, diagonal in the `(B1, B3)` Fock basis.
pub fn build_rwa(p: &EffectiveParams, basis: &Arc<FockBasis>) -> Result<LinearOperator> {
    basis.expect_modes(2)?;
    Ok(LinearOperator::diagonal(basis.clone(), |occ| eigenvalue(occ[0], occ[1], p)))
}

pub fn rwa_blocks(p: &EffectiveParams, parent: &Arc<FockBasis>) -> Result<SectorBlocks> {
    SectorBlocks::build(parent, |sector| build_rwa(p, sector))
}

/// Terms dropped by the rotating-wave approximation, in the B-Fock basis:
/// `W H_eff W^dag - H_rwa` block by block.
pub fn rwa_residual_blocks(p: &EffectiveParams, parent: &Arc<FockBasis>) -> Result<SectorBlocks> {
    let w = BasisChange::new(parent)?;
    let rotated = w.conjugate(&effective_blocks(p, parent)?)?;
    rotated.zip_blocks(&rwa_blocks(p, parent)?, |a, b| a.sub(b))
}

pub fn rwa_residual(p: &EffectiveParams, basis: &Arc<FockBasis>) -> Result<LinearOperator> {
    Ok(rwa_residual_blocks(p, basis)?.to_dense())
}
