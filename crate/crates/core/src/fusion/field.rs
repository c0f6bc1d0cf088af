use crate::lattice::{Torus, TorusCoord};

/// Localized fermions, at most one per cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FermionField {
    torus: Torus,
    bits: Vec<bool>,
    count: usize,
}

impl FermionField {
    pub fn new(torus: Torus) -> Self {
        FermionField {
            bits: vec![false; torus.num_cells()],
            torus,
            count: 0,
        }
    }

    pub fn has_psi(&self, c: TorusCoord) -> bool {
        self.bits[self.torus.cell_index(c)]
    }

    /// Adds a fermion to `c`; an existing one annihilates with it. Returns the new bit.
    pub fn toggle(&mut self, c: TorusCoord) -> bool {
        let bit = &mut self.bits[self.torus.cell_index(c)];
        *bit = !*bit;
        if *bit {
            self.count += 1;
        } else {
            self.count -= 1;
        }
        *bit
    }

    pub fn clear(&mut self, c: TorusCoord) -> bool {
        if self.has_psi(c) {
            self.toggle(c);
            true
        } else {
            false
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn occupied(&self) -> impl Iterator<Item = TorusCoord> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| self.torus.cell_at(i))
    }
}
