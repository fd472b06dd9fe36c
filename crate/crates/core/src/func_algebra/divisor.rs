use num_complex::Complex64;
use serde::Serialize;

use super::roots::CLUSTER_RADIUS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DivisorKind {
    Zeros,
    Poles,
}

/// Finite set of points with positive integer multiplicities.
///
/// Points closer than [`CLUSTER_RADIUS`] are the same point. Entries are kept
/// sorted by real part, then imaginary part.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Divisor {
    pub kind: DivisorKind,
    entries: Vec<(Complex64, u32)>,
}

impl Divisor {
    pub fn empty(kind: DivisorKind) -> Self {
        Divisor {
            kind,
            entries: Vec::new(),
        }
    }

    pub fn from_entries(kind: DivisorKind, entries: impl IntoIterator<Item = (Complex64, u32)>) -> Self {
        let mut d = Self::empty(kind);
        for (point, mult) in entries {
            d.insert(point, mult);
        }
        d
    }

    pub fn insert(&mut self, point: Complex64, multiplicity: u32) {
        if multiplicity == 0 {
            return;
        }
        match self
            .entries
            .iter_mut()
            .find(|(p, _)| (*p - point).norm() <= CLUSTER_RADIUS)
        {
            Some((_, m)) => *m += multiplicity,
            None => {
                self.entries.push((point, multiplicity));
                self.entries
                    .sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
            }
        }
    }

    pub fn entries(&self) -> &[(Complex64, u32)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Multiplicity at `point` (0 when absent).
    pub fn multiplicity_at(&self, point: Complex64) -> u32 {
        self.entries
            .iter()
            .find(|(p, _)| (*p - point).norm() <= CLUSTER_RADIUS)
            .map_or(0, |&(_, m)| m)
    }

    pub fn degree(&self) -> u64 {
        self.entries.iter().map(|&(_, m)| u64::from(m)).sum()
    }

    pub fn min_multiplicity(&self) -> Option<u32> {
        self.entries.iter().map(|&(_, m)| m).min()
    }

    /// `min(nu, 1)`.
    pub fn truncated(&self) -> Self {
        Divisor {
            kind: self.kind,
            entries: self.entries.iter().map(|&(p, _)| (p, 1)).collect(),
        }
    }

    /// Multiset sum.
    pub fn sum(&self, other: &Divisor) -> Self {
        let mut out = self.clone();
        for &(p, m) in &other.entries {
            out.insert(p, m);
        }
        out
    }
}
