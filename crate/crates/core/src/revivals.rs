//! Fractional revivals of the two-mode squeezed ladder state under the
//! `n(n-3)` phase law: resonance conditions, Gauss-sum coefficients, the
//! discrete superpositions they produce, and least-squares decomposition of
//! ladder states onto phase-rotated two-mode squeezed vacua.

use alloc::sync::Arc;
use alloc::vec::Vec;

use core::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::{evolve_rwa, EvolutionTime};
use crate::error::{Error, Result};
use crate::fock::{FockBasis, QuantumState, TAIL_WARNING};
use crate::hamiltonians::EffectiveParams;
use crate::linalg::HermitianSpectrum;
use crate::states::{two_mode_squeezed_vacuum, BasisChange, SqueezingParam};

/// Largest Gram-matrix condition number `decompose` accepts.
pub const MAX_CONDITION: f64 = 1e8;

/// Coefficients with modulus below this are dropped when building targets.
const NEGLIGIBLE: f64 = 1e-14;

/// How `g` is tied to `q` at the revival resonance. Both set `chi = q/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Convention {
    /// `4g = -19q`, as printed.
    PaperLiteral,
    /// `g = -9q/2`, which makes the ladder phase exactly `-(tau/2) n(n-3)`.
    #[default]
    Derived,
}

impl Convention {
    pub const ALL: [Convention; 2] = [Convention::Derived, Convention::PaperLiteral];

    pub fn name(&self) -> &'static str {
        match self {
            Convention::PaperLiteral => "paper-literal",
            Convention::Derived => "derived",
        }
    }
}

pub fn resonant_params(q: f64, convention: Convention) -> Result<EffectiveParams> {
    if q == 0.0 {
        return Err(Error::ZeroNonlinearity);
    }
    let chi = q / 2.0;
    let g = match convention {
        Convention::PaperLiteral => -19.0 * q / 4.0,
        Convention::Derived => -(4.0 * q + chi),
    };
    EffectiveParams::new(g, q, chi)
}

/// Ratio of the linear to the quadratic coefficient of the ladder phase,
/// `(q + chi - 2g) / (3q + chi)`. The `n(n-3)` law needs exactly 3.
pub fn coefficient_ratio(p: &EffectiveParams) -> f64 {
    (p.q + p.chi - 2.0 * p.g) / (3.0 * p.q + p.chi)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `c_r = (1/2N) sum_{n<2N} exp{-(i pi/N)[n r + M n(n-3)]}` for `r < 2N`.
///
/// These are the discrete Fourier weights of the evolved ladder phase
/// `exp[-i pi M n(n-3)/N]` on the harmonics `exp(i pi r n/N)`.
pub fn gauss_coefficients(n: u64, m: u64) -> Result<Vec<Complex64>> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter("N and M must be positive"));
    }
    if gcd(n, m) != 1 {
        return Err(Error::NotCoprime { n, m });
    }
    let period = 2 * n as i64;
    let m = (m % (2 * n)) as i64;
    let coefficients = (0..period)
        .map(|r| {
            let sum: Complex64 = (0..period)
                .map(|k| {
                    let exponent = (k * r + m * k * (k - 3)).rem_euclid(period);
                    Complex64::from_polar(1.0, -PI * exponent as f64 / n as f64)
                })
                .sum();
            sum / period as f64
        })
        .collect();
    Ok(coefficients)
}

/// `phi_r = pi r / N`, `r = 0..2N`.
pub fn running_phases(n: u64) -> Vec<f64> {
    (0..2 * n).map(|r| PI * r as f64 / n as f64).collect()
}

/// Revival at `tau = 2 pi M / N` of the ladder state built from `xi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevivalSpec {
    n: u64,
    m: u64,
    xi: SqueezingParam,
}

impl RevivalSpec {
    pub fn new(n: u64, m: u64, xi: SqueezingParam) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidParameter("N and M must be positive"));
        }
        if gcd(n, m) != 1 {
            return Err(Error::NotCoprime { n, m });
        }
        if m > n {
            return Err(Error::InvalidParameter("revival time 2 pi M/N must lie in (0, 2 pi]"));
        }
        Ok(RevivalSpec { n, m, xi })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn xi(&self) -> SqueezingParam {
        self.xi
    }

    pub fn tau(&self) -> f64 {
        TAU * self.m as f64 / self.n as f64
    }
}

/// Which pair of mode operators the amplitude array refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Representation {
    /// Normal modes of the tunnelling term, `B1, B3`.
    Normal,
    /// Bare atomic modes `b1, b3`.
    Bare,
}

/// The ladder state `S2(i xi)|0,0)` in the normal-mode representation.
pub fn initial_state(xi: SqueezingParam, basis: &Arc<FockBasis>) -> Result<QuantumState> {
    two_mode_squeezed_vacuum(xi.rotated(FRAC_PI_2), basis)
}

/// Rotating-wave evolution of a normal-mode state to rescaled time `tau`.
pub fn evolve_to_tau(p: &EffectiveParams, state: &QuantumState, tau: f64) -> Result<QuantumState> {
    evolve_rwa(p, state, EvolutionTime::from_tau(tau, p.q)?)
}

/// Candidate `S2(i e^{i phi_r} xi)|0,0)` for each running phase.
fn candidates(n: u64, xi: SqueezingParam, basis: &Arc<FockBasis>) -> Result<Vec<QuantumState>> {
    running_phases(n).into_iter().map(|phi| two_mode_squeezed_vacuum(xi.rotated(FRAC_PI_2 + phi), basis)).collect()
}

/// `sum_r c_r S2(i e^{i phi_r} xi)|0,0)`, normalized, in the requested
/// representation.
pub fn target_superposition(
    spec: &RevivalSpec,
    basis: &Arc<FockBasis>,
    representation: Representation,
) -> Result<QuantumState> {
    basis.expect_modes(2)?;
    basis.expect_full()?;
    let coefficients = gauss_coefficients(spec.n, spec.m)?;
    let mut total = QuantumState::zeros(basis.clone());
    for (r, c) in coefficients.iter().enumerate() {
        if c.norm() < NEGLIGIBLE {
            continue;
        }
        let phi = PI * r as f64 / spec.n as f64;
        let branch = two_mode_squeezed_vacuum(spec.xi.rotated(FRAC_PI_2 + phi), basis)?;
        total = total.add(&branch.scaled(*c))?;
    }
    let total = total.normalized()?;
    match representation {
        Representation::Normal => Ok(total),
        Representation::Bare => BasisChange::new(basis)?.inverse(&total),
    }
}

fn expect_normalized(state: &QuantumState) -> Result<()> {
    let norm = state.norm();
    if (norm - 1.0).abs() > TAIL_WARNING {
        Err(Error::Unnormalized { norm })
    } else {
        Ok(())
    }
}

/// `|<a|b>|^2` for normalized states on the same basis.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    if a.basis() != b.basis() {
        return Err(Error::BasisMismatch);
    }
    expect_normalized(a)?;
    expect_normalized(b)?;
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    pub phases: Vec<f64>,
    pub coefficients: Vec<Complex64>,
    /// Norm of the part of the state the candidates do not reproduce.
    pub residual: f64,
    /// Condition number of the candidate Gram matrix.
    pub condition: f64,
}

/// Least-squares fit of a ladder state onto the `2N` candidates
/// `S2(i e^{i phi_r} xi)|0,0)`.
///
/// For states whose ladder amplitudes are those of `S2(i xi)` times
/// unit-modulus phases of period `2N`, `sum |c_r|^2 + residual^2 = 1`.
/// Other ladder states still get the least-residual fit, but the candidates
/// are not orthogonal, so that identity does not hold for them.
pub fn decompose(state: &QuantumState, n: u64, xi: SqueezingParam) -> Result<DecompositionResult> {
    let basis = state.basis();
    basis.expect_modes(2)?;
    basis.expect_full()?;
    if n == 0 {
        return Err(Error::InvalidParameter("N must be positive"));
    }
    let off_ladder: f64 = basis
        .labels()
        .iter()
        .zip(state.amplitudes().iter())
        .filter(|(occ, _)| occ[0] != occ[1])
        .map(|(_, a)| a.norm_sqr())
        .sum();
    if off_ladder > TAIL_WARNING {
        return Err(Error::OffLadder { weight: off_ladder });
    }

    let vectors = candidates(n, xi, basis)?;
    let k = vectors.len();
    let mut gram = DMatrix::<Complex64>::zeros(k, k);
    let mut rhs = DVector::<Complex64>::zeros(k);
    for (i, vi) in vectors.iter().enumerate() {
        rhs[i] = vi.inner(state)?;
        for (j, vj) in vectors.iter().enumerate().skip(i) {
            let g = vi.inner(vj)?;
            gram[(i, j)] = g;
            gram[(j, i)] = g.conj();
        }
    }
    let spectrum = HermitianSpectrum::new(&gram);
    let sorted = spectrum.sorted_values();
    let (lo, hi) = (sorted[0], sorted[k - 1]);
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(Error::IllConditioned { condition });
    }
    let solution = gram.lu().solve(&rhs).ok_or(Error::IllConditioned { condition })?;

    let mut fit = QuantumState::zeros(basis.clone());
    for (v, c) in vectors.iter().zip(solution.iter()) {
        fit = fit.add(&v.scaled(*c))?;
    }
    let residual = (state.amplitudes() - fit.amplitudes()).norm();

    Ok(DecompositionResult {
        phases: running_phases(n),
        coefficients: solution.iter().copied().collect(),
        residual,
        condition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::squeezed_vacuum;
    use core::f64::consts::FRAC_PI_4;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn resonance_conventions() {
        let literal = resonant_params(0.1, Convention::PaperLiteral).unwrap();
        assert!((literal.g + 0.475).abs() < 1e-15 && literal.chi == 0.05);
        let derived = resonant_params(0.1, Convention::Derived).unwrap();
        assert!((derived.g + 0.45).abs() < 1e-15);
        assert!((coefficient_ratio(&derived) - 3.0).abs() < 1e-14);
        assert!((coefficient_ratio(&literal) - 22.0 / 7.0).abs() < 1e-14);
        assert_eq!(resonant_params(0.0, Convention::Derived), Err(Error::ZeroNonlinearity));
    }

    #[test]
    fn two_branch_coefficients() {
        let cs = gauss_coefficients(2, 1).unwrap();
        let c1 = Complex64::from_polar(core::f64::consts::FRAC_1_SQRT_2, FRAC_PI_4);
        assert!(close(cs[1], c1, 1e-12));
        assert!(close(cs[3], c1.conj(), 1e-12));
        assert!(cs[0].norm() < 1e-12 && cs[2].norm() < 1e-12);
    }

    #[test]
    fn four_branch_coefficients() {
        // f(n + 4) = -f(n) for N = 4, so only odd harmonics survive
        let cs = gauss_coefficients(4, 1).unwrap();
        let half = |phase: f64| Complex64::from_polar(0.5, phase);
        assert!(close(cs[1], half(0.0), 1e-12));
        assert!(close(cs[3], half(-FRAC_PI_4), 1e-12));
        assert!(close(cs[5], half(0.0), 1e-12));
        assert!(close(cs[7], half(3.0 * FRAC_PI_4), 1e-12));
        for r in [0, 2, 4, 6] {
            assert!(cs[r].norm() < 1e-12);
        }
    }

    #[test]
    fn full_revival_coefficients() {
        let cs = gauss_coefficients(1, 1).unwrap();
        assert!(close(cs[0], c(1.0, 0.0), 1e-15) && cs[1].norm() < 1e-15);
    }

    #[test]
    fn coefficient_errors() {
        assert_eq!(gauss_coefficients(4, 2), Err(Error::NotCoprime { n: 4, m: 2 }));
        assert!(gauss_coefficients(0, 1).is_err());
        assert!(RevivalSpec::new(2, 3, SqueezingParam::vacuum()).is_err());
        assert!(RevivalSpec::new(6, 4, SqueezingParam::vacuum()).is_err());
        let spec = RevivalSpec::new(4, 3, SqueezingParam::vacuum()).unwrap();
        assert!((spec.tau() - 1.5 * PI).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn coefficients_resynthesize_phase(n in 1u64..=12, m in 1u64..=40) {
            prop_assume!(gcd(n, m) == 1);
            let cs = gauss_coefficients(n, m).unwrap();
            for k in 0..(4 * n) {
                let kf = k as f64;
                let expected = Complex64::from_polar(1.0, -PI * m as f64 * kf * (kf - 3.0) / n as f64);
                let sum: Complex64 = cs
                    .iter()
                    .enumerate()
                    .map(|(r, c)| c * Complex64::from_polar(1.0, PI * r as f64 * kf / n as f64))
                    .sum();
                prop_assert!((sum - expected).norm() < 1e-10);
            }
        }

        #[test]
        fn coefficients_parseval_and_period(n in 1u64..=12, m in 1u64..=40) {
            prop_assume!(gcd(n, m) == 1);
            let cs = gauss_coefficients(n, m).unwrap();
            let total: f64 = cs.iter().map(|c| c.norm_sqr()).sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
            let shifted = gauss_coefficients(n, m + 2 * n).unwrap();
            prop_assert_eq!(cs, shifted);
        }
    }

    #[test]
    fn fidelity_basics() {
        let basis = FockBasis::full(2, 3).unwrap();
        let a = QuantumState::vacuum(basis.clone()).unwrap();
        let b = QuantumState::basis_state(basis.clone(), [1, 1, 0]).unwrap();
        assert_eq!(fidelity(&a, &a).unwrap(), 1.0);
        assert!((fidelity(&a, &a.scaled(Complex64::from_polar(1.0, 0.7))).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(fidelity(&a, &b).unwrap(), 0.0);
        let other = QuantumState::vacuum(FockBasis::full(2, 4).unwrap()).unwrap();
        assert_eq!(fidelity(&a, &other), Err(Error::BasisMismatch));
        assert!(matches!(fidelity(&a, &a.scaled(c(2.0, 0.0))), Err(Error::Unnormalized { .. })));
    }

    #[test]
    fn two_branch_target_forms() {
        let basis = FockBasis::full(2, 40).unwrap();
        let xi = SqueezingParam::new(0.5, 0.3).unwrap();
        let spec = RevivalSpec::new(2, 1, xi).unwrap();

        let normal = target_superposition(&spec, &basis, Representation::Normal).unwrap();
        let minus = two_mode_squeezed_vacuum(xi.negated(), &basis).unwrap();
        let plus = two_mode_squeezed_vacuum(xi, &basis).unwrap();
        let printed = minus.add(&plus.scaled(c(0.0, -1.0))).unwrap().normalized().unwrap();
        assert!(fidelity(&normal, &printed).unwrap() >= 1.0 - 1e-12);

        let single = FockBasis::full(1, 40).unwrap();
        let sq = |z: SqueezingParam| squeezed_vacuum(z, &single).unwrap();
        let ixi = xi.rotated(FRAC_PI_2);
        let bare = target_superposition(&spec, &basis, Representation::Bare).unwrap();
        let first = QuantumState::product(&sq(ixi), &sq(ixi.negated())).unwrap();
        let second = QuantumState::product(&sq(ixi.negated()), &sq(ixi)).unwrap();
        let printed_bare = first.add(&second.scaled(c(0.0, -1.0))).unwrap().normalized().unwrap();
        assert!(fidelity(&bare, &printed_bare).unwrap() >= 1.0 - 1e-10);
    }

    #[test]
    fn evolved_state_hits_targets() {
        let basis = FockBasis::full(2, 40).unwrap();
        let xi = SqueezingParam::new(0.5, 0.0).unwrap();
        let p = resonant_params(0.1, Convention::Derived).unwrap();
        let start = initial_state(xi, &basis).unwrap();
        for (n, m) in [(1, 1), (2, 1), (3, 1), (3, 2), (4, 1), (4, 3), (5, 2)] {
            let spec = RevivalSpec::new(n, m, xi).unwrap();
            let evolved = evolve_to_tau(&p, &start, spec.tau()).unwrap();
            let target = target_superposition(&spec, &basis, Representation::Normal).unwrap();
            assert!(fidelity(&evolved, &target).unwrap() >= 1.0 - 1e-10, "N={n} M={m}");
        }
        let literal = resonant_params(0.1, Convention::PaperLiteral).unwrap();
        let spec = RevivalSpec::new(2, 1, xi).unwrap();
        let target = target_superposition(&spec, &basis, Representation::Normal).unwrap();
        let off = fidelity(&evolve_to_tau(&literal, &start, PI).unwrap(), &target).unwrap();
        assert!(off < 1.0 - 1e-6);
    }

    #[test]
    fn decompose_round_trip() {
        let basis = FockBasis::full(2, 40).unwrap();
        let xi = SqueezingParam::new(0.5, 0.2).unwrap();
        for (n, m) in [(2, 1), (3, 1), (4, 1), (4, 3)] {
            let spec = RevivalSpec::new(n, m, xi).unwrap();
            let state = target_superposition(&spec, &basis, Representation::Normal).unwrap();
            let fit = decompose(&state, n, xi).unwrap();
            let expected = gauss_coefficients(n, m).unwrap();
            for (got, want) in fit.coefficients.iter().zip(&expected) {
                assert!(close(*got, *want, 1e-8), "N={n} M={m}: {got} vs {want}");
            }
            assert!(fit.residual <= 1e-8);
            let weight: f64 = fit.coefficients.iter().map(|c| c.norm_sqr()).sum();
            assert!((weight + fit.residual * fit.residual - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn decompose_single_candidate_and_evolved() {
        let basis = FockBasis::full(2, 40).unwrap();
        let xi = SqueezingParam::new(0.5, 0.0).unwrap();
        let fit = decompose(&initial_state(xi, &basis).unwrap(), 2, xi).unwrap();
        assert!(close(fit.coefficients[0], c(1.0, 0.0), 1e-10));
        assert!(fit.coefficients[1..].iter().all(|c| c.norm() <= 1e-10));
        assert!(fit.residual <= 1e-10);

        let p = resonant_params(0.1, Convention::Derived).unwrap();
        let evolved = evolve_to_tau(&p, &initial_state(xi, &basis).unwrap(), PI).unwrap();
        let fit = decompose(&evolved, 2, xi).unwrap();
        for (got, want) in fit.coefficients.iter().zip(gauss_coefficients(2, 1).unwrap()) {
            assert!(close(*got, want, 1e-6));
        }
    }

    #[test]
    fn decompose_errors() {
        let basis = FockBasis::full(2, 10).unwrap();
        let off = QuantumState::basis_state(basis.clone(), [1, 0, 0]).unwrap();
        assert!(matches!(decompose(&off, 2, SqueezingParam::new(0.5, 0.0).unwrap()), Err(Error::OffLadder { .. })));
        let vacuum = QuantumState::vacuum(basis).unwrap();
        assert!(matches!(
            decompose(&vacuum, 4, SqueezingParam::new(1e-3, 0.0).unwrap()),
            Err(Error::IllConditioned { .. })
        ));
    }
}
