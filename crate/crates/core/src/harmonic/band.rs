use nalgebra::DMatrix;

use crate::error::{usage, Result};
use crate::group::{irrep_matrix_capped, GroupKind, IrrepIndex, Rotation};

/// A function on the group given by coefficient matrices `f̂^ρ` for orders
/// `0..=max_order`, evaluated as `f(g) = Σ_ρ w_ρ Tr[ρ(g)ᵀ f̂^ρ]`.
///
/// `w_ρ` is [`IrrepIndex::plancherel_weight`].
#[derive(Clone, Debug, PartialEq)]
pub struct BandLimitedFunction {
    pub group: GroupKind,
    pub coefficients: Vec<DMatrix<f64>>,
}

impl BandLimitedFunction {
    pub fn new(group: GroupKind, coefficients: Vec<DMatrix<f64>>) -> Result<Self> {
        for (order, c) in coefficients.iter().enumerate() {
            let d = IrrepIndex::new(group, order).dim();
            if c.shape() != (d, d) {
                return Err(usage!("coefficient of order {order} is {:?}, expected {d}x{d}", c.shape()));
            }
        }
        Ok(BandLimitedFunction { group, coefficients })
    }

    pub fn zero(group: GroupKind, max_order: usize) -> Self {
        let coefficients = (0..=max_order)
            .map(|o| DMatrix::zeros(IrrepIndex::new(group, o).dim(), IrrepIndex::new(group, o).dim()))
            .collect();
        BandLimitedFunction { group, coefficients }
    }

    /// Band-limited truncation of the delta function at `at`: `f̂^ρ = ρ(at)`.
    pub fn delta(at: &Rotation, max_order: usize) -> Result<Self> {
        let group = at.group();
        let coefficients = (0..=max_order)
            .map(|o| irrep_matrix_capped(IrrepIndex::new(group, o), at, usize::MAX).map(|m| m.entries))
            .collect::<Result<Vec<_>>>()?;
        Ok(BandLimitedFunction { group, coefficients })
    }

    pub fn max_order(&self) -> Option<usize> {
        self.coefficients.len().checked_sub(1)
    }

    pub fn evaluate(&self, g: &Rotation) -> Result<f64> {
        if g.group() != self.group {
            return Err(usage!("cannot evaluate a function on {} at an element of {}", self.group, g.group()));
        }
        let mut total = 0.0;
        for (order, c) in self.coefficients.iter().enumerate() {
            let irrep = IrrepIndex::new(self.group, order);
            let rho = irrep_matrix_capped(irrep, g, usize::MAX)?.entries;
            total += irrep.plancherel_weight() * rho.component_mul(c).sum();
        }
        Ok(total)
    }

    /// Squared L² norm under normalised Haar measure, from the coefficients.
    pub fn parseval_norm(&self) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(order, c)| {
                let irrep = IrrepIndex::new(self.group, order);
                irrep.plancherel_weight() * plancherel_part(irrep, c).norm_squared()
            })
            .sum()
    }
}

/// The part of a coefficient matrix that the irrep's matrix elements can see.
///
/// SO(3) irreps are absolutely irreducible, so this is the identity. A real
/// SO(2) block `ρ_k` only spans `{aI + bJ}` (rotation-like matrices); the
/// orthogonal complement integrates to zero against every `ρ_k(g)`.
pub fn plancherel_part(irrep: IrrepIndex, m: &DMatrix<f64>) -> DMatrix<f64> {
    match irrep.group {
        GroupKind::So2 if irrep.order > 0 => {
            let a = 0.5 * (m[(0, 0)] + m[(1, 1)]);
            let b = 0.5 * (m[(0, 1)] - m[(1, 0)]);
            DMatrix::from_row_slice(2, 2, &[a, b, -b, a])
        }
        _ => m.clone(),
    }
}
