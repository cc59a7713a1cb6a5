use crate::error::{Error, Result};

/// A set of dimensions `Ω ⊆ {0, .., N-1}` together with its ambient size `N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DimSubset {
    ambient: usize,
    members: Vec<usize>,
}

impl DimSubset {
    pub fn new(ambient: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        if let Some(w) = members.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidIndex(format!("dimension {} listed twice", w[0])));
        }
        if let Some(&m) = members.last() {
            if m >= ambient {
                return Err(Error::InvalidIndex(format!(
                    "dimension {m} outside ambient range 0..{ambient}"
                )));
            }
        }
        Ok(DimSubset { ambient, members })
    }

    pub fn empty(ambient: usize) -> Self {
        DimSubset {
            ambient,
            members: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        DimSubset {
            ambient,
            members: (0..ambient).collect(),
        }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, w: usize) -> bool {
        self.members.binary_search(&w).is_ok()
    }

    /// Position of `w` among the sorted members.
    pub fn position(&self, w: usize) -> Option<usize> {
        self.members.binary_search(&w).ok()
    }

    pub fn is_subset_of(&self, other: &DimSubset) -> bool {
        self.ambient == other.ambient && self.members.iter().all(|&w| other.contains(w))
    }

    pub fn is_disjoint(&self, other: &DimSubset) -> bool {
        self.members.iter().all(|&w| !other.contains(w))
    }

    fn check_ambient(&self, other: &DimSubset) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::DimensionMismatch(format!(
                "ambient sizes differ: {} vs {}",
                self.ambient, other.ambient
            )));
        }
        Ok(())
    }

    pub fn union(&self, other: &DimSubset) -> Result<DimSubset> {
        self.check_ambient(other)?;
        let mut m: Vec<usize> = self.members.iter().chain(&other.members).copied().collect();
        m.sort_unstable();
        m.dedup();
        Ok(DimSubset {
            ambient: self.ambient,
            members: m,
        })
    }

    pub fn difference(&self, other: &DimSubset) -> Result<DimSubset> {
        self.check_ambient(other)?;
        Ok(DimSubset {
            ambient: self.ambient,
            members: self.members.iter().copied().filter(|&w| !other.contains(w)).collect(),
        })
    }

    pub fn intersection(&self, other: &DimSubset) -> Result<DimSubset> {
        self.check_ambient(other)?;
        Ok(DimSubset {
            ambient: self.ambient,
            members: self.members.iter().copied().filter(|&w| other.contains(w)).collect(),
        })
    }

    pub fn complement(&self) -> DimSubset {
        DimSubset {
            ambient: self.ambient,
            members: (0..self.ambient).filter(|&w| !self.contains(w)).collect(),
        }
    }

    /// `Ω' ⊕ Ω'' = Ω' ∪ (Ω'' + N)` inside `{0, .., 2N-1}`.
    pub fn oplus(&self, other: &DimSubset) -> Result<DimSubset> {
        self.check_ambient(other)?;
        let n = self.ambient;
        Ok(DimSubset {
            ambient: 2 * n,
            members: self
                .members
                .iter()
                .copied()
                .chain(other.members.iter().map(|&w| w + n))
                .collect(),
        })
    }

    /// `Ω ⊕ Ω`.
    pub fn doubled(&self) -> DimSubset {
        self.oplus(self).expect("same ambient")
    }

    /// Splits a subset of `{0, .., 2N-1}` into `(Ω', Ω'')` with `self = Ω' ⊕ Ω''`.
    pub fn split_doubled(&self) -> Result<(DimSubset, DimSubset)> {
        if self.ambient % 2 != 0 {
            return Err(Error::DimensionMismatch(format!(
                "ambient size {} is not even",
                self.ambient
            )));
        }
        let n = self.ambient / 2;
        let (lo, hi): (Vec<usize>, Vec<usize>) = self.members.iter().partition(|&&w| w < n);
        Ok((
            DimSubset {
                ambient: n,
                members: lo,
            },
            DimSubset {
                ambient: n,
                members: hi.into_iter().map(|w| w - n).collect(),
            },
        ))
    }
}

/// Assignment of a value `i_ω ∈ {0, .., m_ω - 1}` to every `ω` of a domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialIndex {
    domain: DimSubset,
    values: Vec<usize>,
}

impl PartialIndex {
    /// `values` are aligned with the sorted members of `domain`.
    pub fn new(domain: DimSubset, values: Vec<usize>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::InvalidIndex(format!(
                "{} values for a domain of {} dimensions",
                values.len(),
                domain.len()
            )));
        }
        Ok(PartialIndex { domain, values })
    }

    pub fn from_pairs(ambient: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut pairs = pairs.to_vec();
        pairs.sort_unstable();
        let domain = DimSubset::new(ambient, pairs.iter().map(|p| p.0))?;
        Ok(PartialIndex {
            domain,
            values: pairs.into_iter().map(|p| p.1).collect(),
        })
    }

    pub fn empty(ambient: usize) -> Self {
        PartialIndex {
            domain: DimSubset::empty(ambient),
            values: Vec::new(),
        }
    }

    pub fn domain(&self) -> &DimSubset {
        &self.domain
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn get(&self, w: usize) -> Option<usize> {
        self.domain.position(w).map(|p| self.values[p])
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.domain.members().iter().copied().zip(self.values.iter().copied())
    }

    /// True when `i_ω < extents[ω]` for every `ω` in the domain.
    pub fn within(&self, extents: &[usize]) -> bool {
        extents.len() == self.domain.ambient() && self.pairs().all(|(w, v)| v < extents[w])
    }

    pub fn restrict(&self, sub: &DimSubset) -> Result<PartialIndex> {
        if !sub.is_subset_of(&self.domain) {
            return Err(Error::InvalidIndex(format!(
                "{:?} is not contained in the domain {:?}",
                sub.members(),
                self.domain.members()
            )));
        }
        let values = sub.members().iter().map(|&w| self.get(w).unwrap()).collect();
        Ok(PartialIndex {
            domain: sub.clone(),
            values,
        })
    }

    /// `i ⊔ j` for indices on disjoint domains.
    pub fn join(&self, other: &PartialIndex) -> Result<PartialIndex> {
        let domain = self.domain.union(&other.domain)?;
        if domain.len() != self.domain.len() + other.domain.len() {
            return Err(Error::InvalidIndex("joined domains overlap".into()));
        }
        let values = domain
            .members()
            .iter()
            .map(|&w| self.get(w).or_else(|| other.get(w)).unwrap())
            .collect();
        Ok(PartialIndex { domain, values })
    }

    /// `i ⧺ j` on `Ω' ⊕ Ω''`.
    pub fn concat(&self, other: &PartialIndex) -> Result<PartialIndex> {
        let domain = self.domain.oplus(&other.domain)?;
        let values = self.values.iter().chain(&other.values).copied().collect();
        Ok(PartialIndex { domain, values })
    }

    /// Inverse of [`concat`](Self::concat) on a doubled ambient set.
    pub fn split_concat(&self) -> Result<(PartialIndex, PartialIndex)> {
        let (lo, hi) = self.domain.split_doubled()?;
        let (a, b) = self.values.split_at(lo.len());
        Ok((
            PartialIndex {
                domain: lo,
                values: a.to_vec(),
            },
            PartialIndex {
                domain: hi,
                values: b.to_vec(),
            },
        ))
    }
}

/// `α ⋄ i` with components `i_ω + α_ω k_ω` over extents `r ⋄ k`.
pub fn kron_index(alpha: &PartialIndex, r: &[usize], i: &PartialIndex, k: &[usize]) -> Result<PartialIndex> {
    if alpha.domain() != i.domain() {
        return Err(Error::InvalidIndex(format!(
            "domains differ: {:?} vs {:?}",
            alpha.domain().members(),
            i.domain().members()
        )));
    }
    if !alpha.within(r) || !i.within(k) {
        return Err(Error::InvalidIndex("index outside its extents".into()));
    }
    let values = alpha.pairs().zip(i.values()).map(|((w, a), &iv)| iv + a * k[w]).collect();
    PartialIndex::new(i.domain().clone(), values)
}

/// Componentwise product of extent tuples, `r ⋄ k`.
pub fn kron_extents(r: &[usize], k: &[usize]) -> Vec<usize> {
    r.iter().zip(k).map(|(a, b)| a * b).collect()
}

/// `m^{×2} = (m_1, .., m_N, m_1, .., m_N)`.
pub fn doubled_extents(m: &[usize]) -> Vec<usize> {
    m.iter().chain(m).copied().collect()
}

/// Calls `f` with every assignment of `extents` (last position fastest).
pub(crate) fn for_each_assignment(extents: &[usize], mut f: impl FnMut(&[usize])) {
    if extents.contains(&0) {
        return;
    }
    let mut cur = vec![0usize; extents.len()];
    loop {
        f(&cur);
        let mut pos = extents.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            cur[pos] += 1;
            if cur[pos] < extents[pos] {
                break;
            }
            cur[pos] = 0;
        }
    }
}

/// All partial indices on `domain` with the given ambient extents, in storage order.
pub fn all_indices(domain: &DimSubset, extents: &[usize]) -> Vec<PartialIndex> {
    let ext: Vec<usize> = domain.members().iter().map(|&w| extents[w]).collect();
    let mut out = Vec::new();
    for_each_assignment(&ext, |v| {
        out.push(PartialIndex {
            domain: domain.clone(),
            values: v.to_vec(),
        })
    });
    out
}
