//! Dimerized-chain and tetramerized-lattice Heisenberg models with gauged
//! twist slots, and their partition into commuting bond groups.
//!
//! Units: `S = σ/2`, `ħ = 1`, couplings in units of `J1`. Site `k` is qubit `k`,
//! and bit value 0 is spin up.

use std::fmt;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cis, lit, Real};
use crate::statevector::{HermitianTerm, Mat4, TwoQubitUnitary};

/// Twist angles for slots 1..=4, stored at indices 0..=3. Chains use slot 1 only.
pub type TwistVector<T> = [T; 4];

/// Which coupling a bond carries in the dimer/tetramer pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strength {
    /// `J1`.
    Strong,
    /// `J2`.
    Weak,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    Chain,
    Horizontal,
    Vertical,
}

/// One Heisenberg exchange term `J S_i·S_j`, optionally gauged by a twist slot.
#[derive(Clone, Debug, PartialEq)]
pub struct Bond<T: Real> {
    pub site_i: usize,
    pub site_j: usize,
    pub coupling: T,
    /// Twist slot in `1..=4`.
    pub twist_slot: Option<u8>,
    pub strength: Strength,
    pub axis: Axis,
}

impl<T: Real> Bond<T> {
    pub fn twist(&self, twists: &TwistVector<T>) -> T {
        match self.twist_slot {
            Some(slot) => twists[usize::from(slot) - 1],
            None => T::zero(),
        }
    }

    pub fn matrix(&self, twists: &TwistVector<T>) -> Mat4<T> {
        twisted_bond_matrix(self.coupling, self.twist(twists))
    }

    pub fn term(&self, twists: &TwistVector<T>) -> HermitianTerm<T> {
        HermitianTerm {
            matrix: self.matrix(twists),
            a: self.site_i,
            b: self.site_j,
        }
    }

    /// `exp(-iθ H_bond)` bound to the bond's sites.
    pub fn propagator(&self, twists: &TwistVector<T>, theta: T) -> TwoQubitUnitary<T> {
        TwoQubitUnitary::from_exact(
            bond_propagator(self.coupling, self.twist(twists), theta),
            self.site_i,
            self.site_j,
        )
    }

    fn shares_site(&self, other: &Self) -> bool {
        self.site_i == other.site_i
            || self.site_i == other.site_j
            || self.site_j == other.site_i
            || self.site_j == other.site_j
    }
}

/// Twisted exchange `(1/2)S⁺ᵢS⁻ⱼe^{-iφ} + (1/2)S⁻ᵢS⁺ⱼe^{iφ} + SᶻᵢSᶻⱼ`, scaled by `J`.
///
/// Local basis index is `bit_i + 2·bit_j`.
pub fn twisted_bond_matrix<T: Real>(coupling: T, twist: T) -> Mat4<T> {
    let quarter = coupling * lit(0.25);
    let half = coupling * lit(0.5);
    let mut m = Mat4::zeros();
    m[(0, 0)] = Complex::new(quarter, T::zero());
    m[(3, 3)] = Complex::new(quarter, T::zero());
    m[(1, 1)] = Complex::new(-quarter, T::zero());
    m[(2, 2)] = Complex::new(-quarter, T::zero());
    // S⁺ᵢS⁻ⱼ: (i down, j up) = index 1 -> (i up, j down) = index 2
    m[(2, 1)] = cis(-twist).scale(half);
    m[(1, 2)] = cis(twist).scale(half);
    m
}

/// Closed form of `exp(-iθ·twisted_bond_matrix(J, φ))`.
pub fn bond_propagator<T: Real>(coupling: T, twist: T, theta: T) -> Mat4<T> {
    let quarter = theta * coupling * lit(0.25);
    let half = theta * coupling * lit(0.5);
    let outer = cis(-quarter);
    let inner = cis(quarter);
    let (s, c) = half.sin_cos();
    let mut m = Mat4::zeros();
    m[(0, 0)] = outer;
    m[(3, 3)] = outer;
    m[(1, 1)] = inner.scale(c);
    m[(2, 2)] = inner.scale(c);
    let minus_i_sin = Complex::new(T::zero(), -s);
    m[(1, 2)] = inner * minus_i_sin * cis(twist);
    m[(2, 1)] = inner * minus_i_sin * cis(-twist);
    m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlaquetteType {
    /// Only `J1` bonds.
    I,
    /// Only `J2` bonds.
    II,
    /// Mixed.
    III,
}

impl fmt::Display for PlaquetteType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlaquetteType::I => "I",
            PlaquetteType::II => "II",
            PlaquetteType::III => "III",
        })
    }
}

/// A 2×2 cell identified by its lower-left corner `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Plaquette {
    pub x: usize,
    pub y: usize,
}

impl Plaquette {
    pub fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    /// Type-I plaquette at the origin.
    pub fn type_i() -> Self {
        Self::new(0, 0)
    }

    /// Type-II plaquette at `(1, 1)`.
    pub fn type_ii() -> Self {
        Self::new(1, 1)
    }

    pub fn kind(&self) -> PlaquetteType {
        match (self.x % 2, self.y % 2) {
            (0, 0) => PlaquetteType::I,
            (1, 1) => PlaquetteType::II,
            _ => PlaquetteType::III,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    Chain { length: usize },
    Square { lx: usize, ly: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwistedElement {
    /// Index of the twisted bond `(i, i+1)`.
    ChainBond(usize),
    Plaquette(Plaquette),
}

/// A periodic Heisenberg model with its bond list.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec<T: Real> {
    pub geometry: Geometry,
    pub j1: T,
    pub j2: T,
    pub bonds: Vec<Bond<T>>,
    pub twisted: TwistedElement,
}

impl<T: Real> ModelSpec<T> {
    pub fn n_sites(&self) -> usize {
        match self.geometry {
            Geometry::Chain { length } => length,
            Geometry::Square { lx, ly } => lx * ly,
        }
    }

    /// Number of distinct twist slots the model carries.
    pub fn n_slots(&self) -> usize {
        match self.twisted {
            TwistedElement::ChainBond(_) => 1,
            TwistedElement::Plaquette(_) => 4,
        }
    }

    pub fn is_chain(&self) -> bool {
        matches!(self.geometry, Geometry::Chain { .. })
    }

    pub fn terms(&self, twists: &TwistVector<T>) -> Vec<HermitianTerm<T>> {
        self.bonds.iter().map(|b| b.term(twists)).collect()
    }

    /// Upper bound on the operator norm `Σ |J|·3/4`.
    pub fn norm_bound(&self) -> T {
        self.bonds
            .iter()
            .fold(T::zero(), |acc, b| acc + b.coupling.abs() * lit(0.75))
    }

    /// Bonds carrying slots `a` and `b` share a site (their terms do not commute).
    pub fn slots_share_site(&self, a: u8, b: u8) -> bool {
        let find = |s| self.bonds.iter().find(|bond| bond.twist_slot == Some(s));
        match (find(a), find(b)) {
            (Some(x), Some(y)) => x.shares_site(y),
            _ => false,
        }
    }
}

/// Periodic dimerized chain with couplings alternating `J1` (even bonds) and
/// `J2` (odd bonds). Bond `i` joins sites `i` and `i+1 mod L`.
pub fn build_dimerized_chain<T: Real>(
    length: usize,
    j1: T,
    j2: T,
    twisted_bond: usize,
) -> Result<ModelSpec<T>> {
    if length < 4 || !length.is_multiple_of(2) {
        return Err(Error::InvalidModel(format!(
            "chain length must be even and at least 4, got {length}"
        )));
    }
    if twisted_bond >= length {
        return Err(Error::InvalidModel(format!(
            "twisted bond {twisted_bond} out of range for {length} bonds"
        )));
    }
    check_finite(j1, j2)?;
    let bonds = (0..length)
        .map(|i| {
            let strength = if i % 2 == 0 {
                Strength::Strong
            } else {
                Strength::Weak
            };
            Bond {
                site_i: i,
                site_j: (i + 1) % length,
                coupling: if i % 2 == 0 { j1 } else { j2 },
                twist_slot: (i == twisted_bond).then_some(1),
                strength,
                axis: Axis::Chain,
            }
        })
        .collect();
    Ok(ModelSpec {
        geometry: Geometry::Chain { length },
        j1,
        j2,
        bonds,
        twisted: TwistedElement::ChainBond(twisted_bond),
    })
}

/// Periodic tetramerized square lattice. Horizontal bond `(x,y)-(x+1,y)` is
/// strong for even `x`, vertical bond `(x,y)-(x,y+1)` is strong for even `y`,
/// so type-I plaquettes sit at even corners. Site index is `x + lx·y`.
///
/// The chosen plaquette carries slots 1..=4 cyclically (bottom, right, top,
/// left), each bond oriented counter-clockwise so the twists add up to the
/// flux `Σφ` through the plaquette.
pub fn build_tetramerized_lattice<T: Real>(
    lx: usize,
    ly: usize,
    j1: T,
    j2: T,
    plaquette: Plaquette,
) -> Result<ModelSpec<T>> {
    if lx < 2 || ly < 2 || !lx.is_multiple_of(2) || !ly.is_multiple_of(2) {
        return Err(Error::InvalidModel(format!(
            "lattice dimensions must be even and at least 2, got {lx}x{ly}"
        )));
    }
    if plaquette.x >= lx || plaquette.y >= ly {
        return Err(Error::InvalidPlaquette(format!(
            "corner ({}, {}) outside the {lx}x{ly} lattice",
            plaquette.x, plaquette.y
        )));
    }
    if plaquette.kind() == PlaquetteType::III {
        return Err(Error::InvalidPlaquette(format!(
            "({}, {}) is a mixed type-III plaquette",
            plaquette.x, plaquette.y
        )));
    }
    check_finite(j1, j2)?;

    let site = |x: usize, y: usize| (x % lx) + lx * (y % ly);
    let (px, py) = (plaquette.x, plaquette.y);
    let mut bonds = Vec::with_capacity(2 * lx * ly);
    for y in 0..ly {
        for x in 0..lx {
            let strength = if x % 2 == 0 {
                Strength::Strong
            } else {
                Strength::Weak
            };
            let mut bond = Bond {
                site_i: site(x, y),
                site_j: site(x + 1, y),
                coupling: if x % 2 == 0 { j1 } else { j2 },
                twist_slot: None,
                strength,
                axis: Axis::Horizontal,
            };
            if x == px && y == py {
                bond.twist_slot = Some(1);
            } else if x == px && y == (py + 1) % ly {
                bond.twist_slot = Some(3);
                std::mem::swap(&mut bond.site_i, &mut bond.site_j);
            }
            bonds.push(bond);
        }
    }
    for y in 0..ly {
        for x in 0..lx {
            let strength = if y % 2 == 0 {
                Strength::Strong
            } else {
                Strength::Weak
            };
            let mut bond = Bond {
                site_i: site(x, y),
                site_j: site(x, y + 1),
                coupling: if y % 2 == 0 { j1 } else { j2 },
                twist_slot: None,
                strength,
                axis: Axis::Vertical,
            };
            if x == (px + 1) % lx && y == py {
                bond.twist_slot = Some(2);
            } else if x == px && y == py {
                bond.twist_slot = Some(4);
                std::mem::swap(&mut bond.site_i, &mut bond.site_j);
            }
            bonds.push(bond);
        }
    }
    Ok(ModelSpec {
        geometry: Geometry::Square { lx, ly },
        j1,
        j2,
        bonds,
        twisted: TwistedElement::Plaquette(plaquette),
    })
}

fn check_finite<T: Real>(j1: T, j2: T) -> Result<()> {
    if j1.is_finite() && j2.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidModel("couplings must be finite".into()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupLabel {
    H0,
    H1,
    H0V,
    H0H,
    H1V,
    H1H,
}

impl fmt::Display for GroupLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupLabel::H0 => "H0",
            GroupLabel::H1 => "H1",
            GroupLabel::H0V => "H0V",
            GroupLabel::H0H => "H0H",
            GroupLabel::H1V => "H1V",
            GroupLabel::H1H => "H1H",
        })
    }
}

/// Site-disjoint bonds; their exponentials commute and factor exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutingGroup<T: Real> {
    pub label: GroupLabel,
    pub bonds: Vec<Bond<T>>,
    pub time_dependent: bool,
}

impl<T: Real> CommutingGroup<T> {
    fn new(label: GroupLabel, bonds: Vec<Bond<T>>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for b in &bonds {
            for s in [b.site_i, b.site_j] {
                if !seen.insert(s) {
                    return Err(Error::NotAMatching {
                        label: label.to_string(),
                        site: s,
                    });
                }
            }
        }
        let time_dependent = bonds.iter().any(|b| b.twist_slot.is_some());
        Ok(Self {
            label,
            bonds,
            time_dependent,
        })
    }
}

/// Ordered groups `[H₁, …, H_q]`; `H_q` (last) is the one applied once per
/// symmetric Trotter step.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianPartition<T: Real> {
    pub groups: Vec<CommutingGroup<T>>,
}

impl<T: Real> HamiltonianPartition<T> {
    pub fn n_bonds(&self) -> usize {
        self.groups.iter().map(|g| g.bonds.len()).sum()
    }
}

/// Splits the model into time-independent and twist-carrying matchings.
///
/// Chain: `[H0, H1]` (odd/even bonds, twisted parity last). Lattice:
/// `[H0V, H0H, H1V, H1H]`, where `H1` holds the coupling class of the twisted
/// plaquette.
pub fn partition<T: Real>(model: &ModelSpec<T>) -> Result<HamiltonianPartition<T>> {
    let select = |strength: Strength, axis: Axis| -> Vec<Bond<T>> {
        model
            .bonds
            .iter()
            .filter(|b| b.strength == strength && b.axis == axis)
            .cloned()
            .collect()
    };
    let groups = match model.twisted {
        TwistedElement::ChainBond(idx) => {
            let twisted = if idx % 2 == 0 {
                Strength::Strong
            } else {
                Strength::Weak
            };
            let fixed = other(twisted);
            vec![
                CommutingGroup::new(GroupLabel::H0, select(fixed, Axis::Chain))?,
                CommutingGroup::new(GroupLabel::H1, select(twisted, Axis::Chain))?,
            ]
        }
        TwistedElement::Plaquette(p) => {
            let twisted = if p.kind() == PlaquetteType::I {
                Strength::Strong
            } else {
                Strength::Weak
            };
            let fixed = other(twisted);
            vec![
                CommutingGroup::new(GroupLabel::H0V, select(fixed, Axis::Vertical))?,
                CommutingGroup::new(GroupLabel::H0H, select(fixed, Axis::Horizontal))?,
                CommutingGroup::new(GroupLabel::H1V, select(twisted, Axis::Vertical))?,
                CommutingGroup::new(GroupLabel::H1H, select(twisted, Axis::Horizontal))?,
            ]
        }
    };
    let out = HamiltonianPartition { groups };
    if out.n_bonds() != model.bonds.len() {
        return Err(Error::InvalidModel(format!(
            "partition covers {} of {} bonds",
            out.n_bonds(),
            model.bonds.len()
        )));
    }
    Ok(out)
}

fn other(s: Strength) -> Strength {
    match s {
        Strength::Strong => Strength::Weak,
        Strength::Weak => Strength::Strong,
    }
}

/// `exp(-iθ H)` for a general Hermitian 4×4 matrix via its eigendecomposition.
pub fn hermitian_exp4<T: Real>(h: &Mat4<T>, theta: T) -> Mat4<T> {
    let eig = h.symmetric_eigen();
    let mut d = Mat4::zeros();
    for k in 0..4 {
        d[(k, k)] = cis(-theta * eig.eigenvalues[k]);
    }
    eig.eigenvectors * d * eig.eigenvectors.adjoint()
}
