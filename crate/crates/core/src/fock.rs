//! Truncated bosonic Fock spaces.
//!
//! Bases are labelled by occupation tuples. Full bases enumerate every tuple
//! with each mode at most `cutoff` (inclusive); sector bases keep only tuples
//! with a fixed total number. In both cases labels are sorted
//! lexicographically with mode 1 as the most significant digit, so the index
//! of `|n1, n3>` in a full two-mode basis is `n1 * (cutoff + 1) + n3`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::{Float, Zero};

use crate::error::{Error, Result};

pub const MAX_MODES: usize = 3;

/// Squared weight at the top two levels above which a state is considered
/// visibly truncated.
pub const TAIL_WARNING: f64 = 1e-8;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-10;

/// Occupation numbers, mode 1 first. Entries past `modes` are zero.
pub type Occupation = [usize; MAX_MODES];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    modes: usize,
    cutoff: usize,
    sector: Option<usize>,
    labels: Vec<Occupation>,
}

impl FockBasis {
    pub fn full(modes: usize, cutoff: usize) -> Result<Arc<Self>> {
        check_modes(modes)?;
        let radix = cutoff + 1;
        let dim = radix.pow(modes as u32);
        let labels = (0..dim)
            .map(|mut index| {
                let mut occ = [0; MAX_MODES];
                for slot in (0..modes).rev() {
                    occ[slot] = index % radix;
                    index /= radix;
                }
                occ
            })
            .collect();
        Ok(Arc::new(FockBasis { modes, cutoff, sector: None, labels }))
    }

    /// Fixed-total-number subspace `n_1 + ... + n_k = total` of the full basis
    /// at `cutoff`.
    pub fn sector(modes: usize, cutoff: usize, total: usize) -> Result<Arc<Self>> {
        check_modes(modes)?;
        let mut labels = Vec::new();
        let mut occ = [0; MAX_MODES];
        fill_sector(&mut labels, &mut occ, 0, modes, cutoff, total);
        Ok(Arc::new(FockBasis { modes, cutoff, sector: Some(total), labels }))
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn sector_number(&self) -> Option<usize> {
        self.sector
    }

    pub fn is_full(&self) -> bool {
        self.sector.is_none()
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, index: usize) -> Occupation {
        self.labels[index]
    }

    pub fn labels(&self) -> &[Occupation] {
        &self.labels
    }

    pub fn index_of(&self, occ: &Occupation) -> Option<usize> {
        if occ[..self.modes].iter().any(|&n| n > self.cutoff) || occ[self.modes..].iter().any(|&n| n != 0) {
            return None;
        }
        match self.sector {
            None => Some(occ[..self.modes].iter().fold(0, |acc, &n| acc * (self.cutoff + 1) + n)),
            Some(_) => self.labels.binary_search(occ).ok(),
        }
    }

    /// Largest total number reachable in this basis.
    pub fn max_total(&self) -> usize {
        self.sector.unwrap_or(self.modes * self.cutoff)
    }

    pub(crate) fn expect_modes(&self, expected: usize) -> Result<()> {
        if self.modes == expected {
            Ok(())
        } else {
            Err(Error::WrongModeCount { expected, found: self.modes })
        }
    }

    pub(crate) fn expect_full(&self) -> Result<()> {
        if self.is_full() {
            Ok(())
        } else {
            Err(Error::SectorBasis)
        }
    }
}

fn check_modes(modes: usize) -> Result<()> {
    if (1..=MAX_MODES).contains(&modes) {
        Ok(())
    } else {
        Err(Error::InvalidParameter("mode count must be 1, 2 or 3"))
    }
}

fn fill_sector(
    out: &mut Vec<Occupation>,
    occ: &mut Occupation,
    slot: usize,
    modes: usize,
    cutoff: usize,
    remaining: usize,
) {
    if slot + 1 == modes {
        if remaining <= cutoff {
            occ[slot] = remaining;
            out.push(*occ);
        }
        return;
    }
    for n in 0..=remaining.min(cutoff) {
        occ[slot] = n;
        fill_sector(out, occ, slot + 1, modes, cutoff, remaining - n);
    }
}

fn same_basis(a: &Arc<FockBasis>, b: &Arc<FockBasis>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::BasisMismatch)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    basis: Arc<FockBasis>,
    amplitudes: DVector<Complex64>,
}

impl QuantumState {
    pub fn new(basis: Arc<FockBasis>, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::BasisMismatch);
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite amplitude"));
        }
        Ok(QuantumState { basis, amplitudes })
    }

    pub fn zeros(basis: Arc<FockBasis>) -> Self {
        let amplitudes = DVector::zeros(basis.dim());
        QuantumState { basis, amplitudes }
    }

    pub fn basis_state(basis: Arc<FockBasis>, occ: Occupation) -> Result<Self> {
        let index = basis.index_of(&occ).ok_or(Error::InvalidParameter("occupation outside the basis"))?;
        let mut state = Self::zeros(basis);
        state.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    pub fn vacuum(basis: Arc<FockBasis>) -> Result<Self> {
        Self::basis_state(basis, [0; MAX_MODES])
    }

    /// `|a> (x) |b>` for two single-mode states at the same cutoff.
    pub fn product(a: &QuantumState, b: &QuantumState) -> Result<Self> {
        a.basis.expect_modes(1)?;
        b.basis.expect_modes(1)?;
        a.basis.expect_full()?;
        b.basis.expect_full()?;
        if a.basis.cutoff != b.basis.cutoff {
            return Err(Error::CutoffMismatch { left: a.basis.cutoff, right: b.basis.cutoff });
        }
        let basis = FockBasis::full(2, a.basis.cutoff)?;
        let amplitudes = a.amplitudes.kronecker(&b.amplitudes);
        Ok(QuantumState { basis, amplitudes })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<Complex64> {
        self.amplitudes
    }

    pub fn amplitude(&self, occ: &Occupation) -> Complex64 {
        self.basis.index_of(occ).map_or(Complex64::zero(), |i| self.amplitudes[i])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-12
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::Unnormalized { norm });
        }
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        QuantumState { basis: self.basis.clone(), amplitudes: &self.amplitudes * factor }
    }

    pub fn add(&self, other: &QuantumState) -> Result<Self> {
        same_basis(&self.basis, &other.basis)?;
        Ok(QuantumState { basis: self.basis.clone(), amplitudes: &self.amplitudes + &other.amplitudes })
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &QuantumState) -> Result<Complex64> {
        same_basis(&self.basis, &other.basis)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Squared weight on labels where any mode sits at one of its top two
    /// levels.
    pub fn tail_weight(&self) -> f64 {
        let edge = self.basis.cutoff.saturating_sub(1);
        self.basis
            .labels
            .iter()
            .zip(self.amplitudes.iter())
            .filter(|(occ, _)| occ[..self.basis.modes].iter().any(|&n| n >= edge))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Mean occupation of `mode`.
    pub fn mean_occupation(&self, mode: usize) -> f64 {
        self.basis.labels.iter().zip(self.amplitudes.iter()).map(|(occ, a)| occ[mode] as f64 * a.norm_sqr()).sum()
    }

    /// Re-express the state on another basis with the same mode count,
    /// dropping amplitudes whose labels do not exist there.
    pub fn embed(&self, target: &Arc<FockBasis>) -> Result<Self> {
        target.expect_modes(self.basis.modes)?;
        let mut out = Self::zeros(target.clone());
        for (occ, a) in self.basis.labels.iter().zip(self.amplitudes.iter()) {
            if let Some(j) = target.index_of(occ) {
                out.amplitudes[j] = *a;
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OperatorFlags {
    pub hermitian: bool,
    pub unitary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    basis: Arc<FockBasis>,
    matrix: DMatrix<Complex64>,
    flags: OperatorFlags,
}

impl LinearOperator {
    pub fn new(basis: Arc<FockBasis>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let d = basis.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::BasisMismatch);
        }
        Ok(LinearOperator { basis, matrix, flags: OperatorFlags::default() })
    }

    pub fn zeros(basis: Arc<FockBasis>) -> Self {
        let d = basis.dim();
        LinearOperator { basis, matrix: DMatrix::zeros(d, d), flags: OperatorFlags::default() }
    }

    pub fn identity(basis: Arc<FockBasis>) -> Self {
        let d = basis.dim();
        LinearOperator {
            basis,
            matrix: DMatrix::identity(d, d),
            flags: OperatorFlags { hermitian: true, unitary: true },
        }
    }

    pub fn diagonal(basis: Arc<FockBasis>, entries: impl Fn(&Occupation) -> f64) -> Self {
        let diag =
            DVector::from_iterator(basis.dim(), basis.labels.iter().map(|occ| Complex64::new(entries(occ), 0.0)));
        LinearOperator {
            basis,
            matrix: DMatrix::from_diagonal(&diag),
            flags: OperatorFlags { hermitian: true, unitary: false },
        }
    }

    /// Builds an operator column by column from its action on basis labels.
    /// Images that fall outside the basis are dropped.
    pub fn from_action(basis: Arc<FockBasis>, action: impl Fn(&Occupation, &mut Vec<(Occupation, Complex64)>)) -> Self {
        let d = basis.dim();
        let mut matrix = DMatrix::zeros(d, d);
        let mut images = Vec::new();
        for (j, occ) in basis.labels.iter().enumerate() {
            images.clear();
            action(occ, &mut images);
            for (image, coef) in images.iter() {
                if let Some(i) = basis.index_of(image) {
                    matrix[(i, j)] += *coef;
                }
            }
        }
        LinearOperator { basis, matrix, flags: OperatorFlags::default() }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn flags(&self) -> OperatorFlags {
        self.flags
    }

    pub fn hermitian_deviation(&self) -> f64 {
        max_abs_diff(&self.matrix, &self.matrix.adjoint())
    }

    pub fn unitary_deviation(&self) -> f64 {
        let d = self.basis.dim();
        max_abs_diff(&(self.matrix.adjoint() * &self.matrix), &DMatrix::identity(d, d))
    }

    /// Sets the Hermitian flag after checking it.
    pub fn into_hermitian(mut self) -> Result<Self> {
        let deviation = self.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        self.flags.hermitian = true;
        Ok(self)
    }

    /// Sets the unitary flag after checking it. Returns `None` when the check
    /// fails.
    pub fn into_unitary(mut self) -> Option<Self> {
        if self.unitary_deviation() > UNITARY_TOL {
            return None;
        }
        self.flags.unitary = true;
        Some(self)
    }

    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        same_basis(&self.basis, &state.basis)?;
        Ok(QuantumState { basis: self.basis.clone(), amplitudes: &self.matrix * &state.amplitudes })
    }

    pub fn adjoint(&self) -> Self {
        LinearOperator { basis: self.basis.clone(), matrix: self.matrix.adjoint(), flags: self.flags }
    }

    pub fn mul(&self, rhs: &LinearOperator) -> Result<Self> {
        same_basis(&self.basis, &rhs.basis)?;
        Ok(LinearOperator {
            basis: self.basis.clone(),
            matrix: &self.matrix * &rhs.matrix,
            flags: OperatorFlags { hermitian: false, unitary: self.flags.unitary && rhs.flags.unitary },
        })
    }

    pub fn add(&self, rhs: &LinearOperator) -> Result<Self> {
        same_basis(&self.basis, &rhs.basis)?;
        Ok(LinearOperator {
            basis: self.basis.clone(),
            matrix: &self.matrix + &rhs.matrix,
            flags: OperatorFlags { hermitian: self.flags.hermitian && rhs.flags.hermitian, unitary: false },
        })
    }

    pub fn sub(&self, rhs: &LinearOperator) -> Result<Self> {
        same_basis(&self.basis, &rhs.basis)?;
        Ok(LinearOperator {
            basis: self.basis.clone(),
            matrix: &self.matrix - &rhs.matrix,
            flags: OperatorFlags { hermitian: self.flags.hermitian && rhs.flags.hermitian, unitary: false },
        })
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        LinearOperator {
            basis: self.basis.clone(),
            matrix: &self.matrix * factor,
            flags: OperatorFlags {
                hermitian: self.flags.hermitian && factor.im == 0.0,
                unitary: self.flags.unitary && factor.norm_sqr() == 1.0,
            },
        }
    }

    /// `[self, rhs] = self*rhs - rhs*self`.
    pub fn commutator(&self, rhs: &LinearOperator) -> Result<Self> {
        same_basis(&self.basis, &rhs.basis)?;
        let m = &self.matrix * &rhs.matrix - &rhs.matrix * &self.matrix;
        LinearOperator::new(self.basis.clone(), m)
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn expectation(&self, state: &QuantumState) -> Result<Complex64> {
        state.inner(&self.apply(state)?)
    }
}

/// Entrywise `max |a - b|`.
pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Annihilator and creator for `mode` on a full basis, identity on the other
/// modes.
pub fn make_ladder(basis: &Arc<FockBasis>, mode: usize) -> Result<(LinearOperator, LinearOperator)> {
    basis.expect_full()?;
    if mode >= basis.modes {
        return Err(Error::ModeOutOfRange { mode, modes: basis.modes });
    }
    let annihilator = LinearOperator::from_action(basis.clone(), |occ, out| {
        let n = occ[mode];
        if n > 0 {
            let mut image = *occ;
            image[mode] -= 1;
            out.push((image, Complex64::new((n as f64).sqrt(), 0.0)));
        }
    });
    let creator = annihilator.adjoint();
    Ok((annihilator, creator))
}

pub fn number_operator(basis: &Arc<FockBasis>, mode: usize) -> Result<LinearOperator> {
    if mode >= basis.modes {
        return Err(Error::ModeOutOfRange { mode, modes: basis.modes });
    }
    Ok(LinearOperator::diagonal(basis.clone(), |occ| occ[mode] as f64))
}

pub fn total_number_operator(basis: &Arc<FockBasis>) -> LinearOperator {
    let modes = basis.modes;
    LinearOperator::diagonal(basis.clone(), |occ| occ[..modes].iter().sum::<usize>() as f64)
}

/// Two-mode operator `a (x) b`, mode 1 major.
pub fn tensor(a: &LinearOperator, b: &LinearOperator) -> Result<LinearOperator> {
    a.basis.expect_modes(1)?;
    b.basis.expect_modes(1)?;
    a.basis.expect_full()?;
    b.basis.expect_full()?;
    if a.basis.cutoff != b.basis.cutoff {
        return Err(Error::CutoffMismatch { left: a.basis.cutoff, right: b.basis.cutoff });
    }
    let basis = FockBasis::full(2, a.basis.cutoff)?;
    let flags = OperatorFlags {
        hermitian: a.flags.hermitian && b.flags.hermitian,
        unitary: a.flags.unitary && b.flags.unitary,
    };
    Ok(LinearOperator { basis, matrix: a.matrix.kronecker(&b.matrix), flags })
}

/// A two-mode state split into fixed-total-number components.
#[derive(Debug, Clone)]
pub struct SectorDecomposition {
    parent: Arc<FockBasis>,
    sectors: Vec<(usize, QuantumState)>,
}

impl SectorDecomposition {
    pub fn parent(&self) -> &Arc<FockBasis> {
        &self.parent
    }

    /// Components as `(total_number, state on the sector basis)`, ascending.
    pub fn sectors(&self) -> &[(usize, QuantumState)] {
        &self.sectors
    }

    pub fn weights(&self) -> Vec<(usize, f64)> {
        self.sectors.iter().map(|(n, s)| (*n, s.amplitudes.norm_squared())).collect()
    }

    pub fn reassemble(&self) -> QuantumState {
        let mut out = QuantumState::zeros(self.parent.clone());
        for (_, component) in &self.sectors {
            for (occ, a) in component.basis.labels.iter().zip(component.amplitudes.iter()) {
                let i = self.parent.index_of(occ).expect("sector label inside parent basis");
                out.amplitudes[i] = *a;
            }
        }
        out
    }
}

/// Splits a full two-mode state by `n + m`. Sectors whose amplitudes are all
/// exactly zero are omitted.
pub fn sector_split(state: &QuantumState) -> Result<SectorDecomposition> {
    let parent = state.basis.clone();
    parent.expect_modes(2)?;
    parent.expect_full()?;
    let mut sectors = Vec::new();
    for total in 0..=parent.max_total() {
        let basis = FockBasis::sector(2, parent.cutoff, total)?;
        let component = state.embed(&basis)?;
        if component.amplitudes.iter().any(|a| !a.is_zero()) {
            sectors.push((total, component));
        }
    }
    Ok(SectorDecomposition { parent, sectors })
}

/// Block-diagonal two-mode operator that conserves `n + m`, stored one block
/// per sector of a full parent basis.
#[derive(Debug, Clone)]
pub struct SectorBlocks {
    parent: Arc<FockBasis>,
    blocks: Vec<LinearOperator>,
}

impl SectorBlocks {
    /// Builds every sector block with `build(sector_basis)`.
    pub fn build(
        parent: &Arc<FockBasis>,
        mut build: impl FnMut(&Arc<FockBasis>) -> Result<LinearOperator>,
    ) -> Result<Self> {
        parent.expect_modes(2)?;
        parent.expect_full()?;
        let blocks = (0..=parent.max_total())
            .map(|total| {
                let basis = FockBasis::sector(2, parent.cutoff, total)?;
                let block = build(&basis)?;
                same_basis(&block.basis, &basis)?;
                Ok(block)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SectorBlocks { parent: parent.clone(), blocks })
    }

    pub fn parent(&self) -> &Arc<FockBasis> {
        &self.parent
    }

    /// Block `total` acts on the sector with `n + m = total`.
    pub fn blocks(&self) -> &[LinearOperator] {
        &self.blocks
    }

    pub fn map_blocks(&self, mut f: impl FnMut(&LinearOperator) -> Result<LinearOperator>) -> Result<Self> {
        let blocks = self.blocks.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        Ok(SectorBlocks { parent: self.parent.clone(), blocks })
    }

    pub fn zip_blocks(
        &self,
        other: &SectorBlocks,
        mut f: impl FnMut(&LinearOperator, &LinearOperator) -> Result<LinearOperator>,
    ) -> Result<Self> {
        same_basis(&self.parent, &other.parent)?;
        let blocks = self.blocks.iter().zip(other.blocks.iter()).map(|(a, b)| f(a, b)).collect::<Result<Vec<_>>>()?;
        Ok(SectorBlocks { parent: self.parent.clone(), blocks })
    }

    pub fn adjoint(&self) -> Self {
        SectorBlocks { parent: self.parent.clone(), blocks: self.blocks.iter().map(LinearOperator::adjoint).collect() }
    }

    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        same_basis(&self.parent, &state.basis)?;
        let mut out = QuantumState::zeros(self.parent.clone());
        for block in &self.blocks {
            let sector = &block.basis;
            let indices: Vec<usize> = sector
                .labels
                .iter()
                .map(|occ| self.parent.index_of(occ).expect("sector label inside parent basis"))
                .collect();
            let local = DVector::from_iterator(indices.len(), indices.iter().map(|&i| state.amplitudes[i]));
            let image = &block.matrix * local;
            for (k, &i) in indices.iter().enumerate() {
                out.amplitudes[i] = image[k];
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> LinearOperator {
        let d = self.parent.dim();
        let mut matrix = DMatrix::zeros(d, d);
        let mut flags = OperatorFlags { hermitian: true, unitary: true };
        for block in &self.blocks {
            let indices: Vec<usize> = block
                .basis
                .labels
                .iter()
                .map(|occ| self.parent.index_of(occ).expect("sector label inside parent basis"))
                .collect();
            for (a, &i) in indices.iter().enumerate() {
                for (b, &j) in indices.iter().enumerate() {
                    matrix[(i, j)] = block.matrix[(a, b)];
                }
            }
            flags.hermitian &= block.flags.hermitian;
            flags.unitary &= block.flags.unitary;
        }
        LinearOperator { basis: self.parent.clone(), matrix, flags }
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().fold(0.0, |acc, b| acc.max(b.max_abs()))
    }
}
