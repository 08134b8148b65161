//! Squeezed vacua and the change of mode basis
//! `b1 = (B1 - i B3)/sqrt2`, `b3 = (B1 + i B3)/sqrt2`.
//!
//! Both representations share one truncated two-mode Fock basis; a state is
//! stored as its amplitude array in whichever representation the caller is
//! working in. [`BasisChange`] converts arrays between the two.

use alloc::sync::Arc;

use core::f64::consts::{FRAC_PI_4, PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::{Euclid, Float};

use crate::error::{Error, Result};
use crate::fock::{make_ladder, FockBasis, LinearOperator, QuantumState, SectorBlocks, TAIL_WARNING};
use crate::linalg::expm;

/// Complex squeezing argument `r e^{i theta}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezingParam {
    r: f64,
    theta: f64,
}

impl SqueezingParam {
    /// `theta` is reduced to `[0, 2pi)`.
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !r.is_finite() || !theta.is_finite() {
            return Err(Error::InvalidParameter("squeezing parameters must be finite"));
        }
        if r < 0.0 {
            return Err(Error::InvalidParameter("squeezing amplitude must be non-negative"));
        }
        Ok(SqueezingParam { r, theta: Euclid::rem_euclid(&theta, &TAU) })
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        let (r, theta) = z.to_polar();
        Self::new(r, theta)
    }

    pub fn vacuum() -> Self {
        SqueezingParam { r: 0.0, theta: 0.0 }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(self.r, self.theta)
    }

    /// `e^{i phi} * self`.
    pub fn rotated(&self, phi: f64) -> Self {
        SqueezingParam { r: self.r, theta: Euclid::rem_euclid(&(self.theta + phi), &TAU) }
    }

    /// `-self`.
    pub fn negated(&self) -> Self {
        self.rotated(PI)
    }
}

fn check_tail(state: &QuantumState) -> Result<()> {
    let weight = state.tail_weight();
    if weight > TAIL_WARNING {
        Err(Error::TruncationTail { weight, threshold: TAIL_WARNING })
    } else {
        Ok(())
    }
}

/// Levels the exponential is taken on, for a requested cutoff. Truncating the
/// generator perturbs the amplitudes near the top level, so the exponential
/// is computed on a larger space and cut back afterwards.
fn working_levels(cutoff: usize) -> usize {
    2 * cutoff + 17
}

/// `exp[-(xi b^dag^2 - xi^* b^2)/2] |0>` on a single-mode basis, built by
/// exponentiating the generator and renormalizing on the requested cutoff.
pub fn squeezed_vacuum(xi: SqueezingParam, basis: &Arc<FockBasis>) -> Result<QuantumState> {
    basis.expect_modes(1)?;
    basis.expect_full()?;
    let work = FockBasis::full(1, working_levels(basis.cutoff()) - 1)?;
    let (a, _) = make_ladder(&work, 0)?;
    let a2 = a.matrix() * a.matrix();
    let z = xi.to_complex();
    let half = Complex64::new(0.5, 0.0);
    let generator = (a2.adjoint() * (-z) + &a2 * z.conj()) * half;
    let propagator = expm(&generator);
    let amplitudes = propagator.column(0).rows(0, basis.dim()).into_owned();
    let state = QuantumState::new(basis.clone(), amplitudes)?.normalized()?;
    check_tail(&state)?;
    Ok(state)
}

/// `exp(-zeta B1^dag B3^dag + zeta^* B1 B3) |0,0>` on a full two-mode basis.
///
/// The generator maps the `|n,n>` ladder into itself, so the exponential is
/// taken on that subspace.
pub fn two_mode_squeezed_vacuum(zeta: SqueezingParam, basis: &Arc<FockBasis>) -> Result<QuantumState> {
    basis.expect_modes(2)?;
    basis.expect_full()?;
    let d = working_levels(basis.cutoff());
    let z = zeta.to_complex();
    let mut generator = DMatrix::<Complex64>::zeros(d, d);
    for n in 0..d - 1 {
        let k = (n + 1) as f64;
        generator[(n + 1, n)] = -z * k;
        generator[(n, n + 1)] = z.conj() * k;
    }
    let ladder = expm(&generator).column(0).into_owned();
    let mut state = QuantumState::zeros(basis.clone());
    let mut amplitudes = state.amplitudes().clone();
    for (n, amp) in ladder.iter().take(basis.cutoff() + 1).enumerate() {
        let i = basis.index_of(&[n, n, 0]).expect("ladder label inside basis");
        amplitudes[i] = *amp;
    }
    state = QuantumState::new(basis.clone(), amplitudes)?.normalized()?;
    check_tail(&state)?;
    Ok(state)
}

/// Unitary taking b-representation amplitude arrays to B-representation
/// arrays, stored block-diagonally by total number.
///
/// In each sector it is `(-1)^{n3} exp[-i(pi/4)(b1^dag b3 + b3^dag b1)] i^{n3}`,
/// which realizes `W b1 W^dag = (b1 - i b3)/sqrt2` and
/// `W b3 W^dag = (b1 + i b3)/sqrt2`.
#[derive(Debug, Clone)]
pub struct BasisChange {
    blocks: SectorBlocks,
}

impl BasisChange {
    pub fn new(basis: &Arc<FockBasis>) -> Result<Self> {
        let blocks = SectorBlocks::build(basis, |sector| {
            let hop = LinearOperator::from_action(sector.clone(), |occ, out| {
                let (n1, n3) = (occ[0], occ[1]);
                if n3 > 0 {
                    let k = ((n3 * (n1 + 1)) as f64).sqrt();
                    out.push(([n1 + 1, n3 - 1, 0], Complex64::new(k, 0.0)));
                }
                if n1 > 0 {
                    let k = ((n1 * (n3 + 1)) as f64).sqrt();
                    out.push(([n1 - 1, n3 + 1, 0], Complex64::new(k, 0.0)));
                }
            });
            let mut w = expm(&(hop.matrix() * Complex64::new(0.0, -FRAC_PI_4)));
            let phase_in = |n3: usize| Complex64::i().powu((n3 % 4) as u32);
            let sign_out = |n3: usize| if n3.is_multiple_of(2) { 1.0 } else { -1.0 };
            for (j, occ) in sector.labels().iter().enumerate() {
                let p = phase_in(occ[1]);
                for i in 0..sector.dim() {
                    w[(i, j)] *= p;
                }
            }
            for (i, occ) in sector.labels().iter().enumerate() {
                let s = sign_out(occ[1]);
                for j in 0..sector.dim() {
                    w[(i, j)] *= s;
                }
            }
            LinearOperator::new(sector.clone(), w)?
                .into_unitary()
                .ok_or(Error::InvalidParameter("basis change lost unitarity"))
        })?;
        Ok(BasisChange { blocks })
    }

    pub fn blocks(&self) -> &SectorBlocks {
        &self.blocks
    }

    /// b-representation array -> B-representation array.
    pub fn forward(&self, state: &QuantumState) -> Result<QuantumState> {
        self.blocks.apply(state)
    }

    /// B-representation array -> b-representation array.
    pub fn inverse(&self, state: &QuantumState) -> Result<QuantumState> {
        self.blocks.adjoint().apply(state)
    }

    /// `W H W^dag` for a number-conserving operator given in blocks.
    pub fn conjugate(&self, op: &SectorBlocks) -> Result<SectorBlocks> {
        self.blocks.zip_blocks(op, |w, h| w.mul(h)?.mul(&w.adjoint()))
    }

    /// `W^dag H W`.
    pub fn conjugate_inverse(&self, op: &SectorBlocks) -> Result<SectorBlocks> {
        self.blocks.zip_blocks(op, |w, h| w.adjoint().mul(h)?.mul(w))
    }
}

/// Dense form of the basis change on a full two-mode basis.
pub fn basis_change(basis: &Arc<FockBasis>) -> Result<LinearOperator> {
    Ok(BasisChange::new(basis)?.blocks.to_dense())
}

/// Fidelities of the three product/two-mode squeezed-state identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepRelations {
    /// `|xi, xi>` against `|xi, -xi)`.
    pub same_phase: f64,
    /// `|xi, -xi>` against the two-mode squeezed `|i xi)`.
    pub opposite_phase: f64,
    /// `|xi, xi)` against the two-mode squeezed `|xi>` in the b modes.
    pub upper_same_phase: f64,
}

impl RepRelations {
    pub fn min(&self) -> f64 {
        self.same_phase.min(self.opposite_phase).min(self.upper_same_phase)
    }
}

pub fn fidelity_unchecked(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

pub fn check_rep_relations(xi: SqueezingParam, cutoff: usize) -> Result<RepRelations> {
    let single = FockBasis::full(1, cutoff)?;
    let pair = FockBasis::full(2, cutoff)?;
    let w = BasisChange::new(&pair)?;

    let plus = squeezed_vacuum(xi, &single)?;
    let minus = squeezed_vacuum(xi.negated(), &single)?;
    let plus_plus = QuantumState::product(&plus, &plus)?;
    let plus_minus = QuantumState::product(&plus, &minus)?;

    let same_phase = fidelity_unchecked(&w.forward(&plus_plus)?, &plus_minus)?;
    let opposite_phase =
        fidelity_unchecked(&w.forward(&plus_minus)?, &two_mode_squeezed_vacuum(xi.rotated(PI / 2.0), &pair)?)?;
    let upper_same_phase = fidelity_unchecked(&w.inverse(&plus_plus)?, &two_mode_squeezed_vacuum(xi, &pair)?)?;

    Ok(RepRelations { same_phase, opposite_phase, upper_same_phase })
}

/// Amplitudes on the `|n,n>` ladder, `n = 0..=cutoff`.
pub fn ladder_amplitudes(state: &QuantumState) -> Result<DVector<Complex64>> {
    state.basis().expect_modes(2)?;
    let c = state.basis().cutoff();
    Ok(DVector::from_iterator(c + 1, (0..=c).map(|n| state.amplitude(&[n, n, 0]))))
}
