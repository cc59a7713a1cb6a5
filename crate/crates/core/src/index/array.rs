use super::subset::{all_indices, for_each_assignment, DimSubset, PartialIndex};
use crate::error::{Error, Result};

/// Real values on all partial indices of a domain.
///
/// `extents` has one entry per ambient dimension; only entries of the domain
/// matter. Values are stored with the largest member varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialArray {
    extents: Vec<usize>,
    domain: DimSubset,
    values: Vec<f64>,
}

impl PartialArray {
    pub fn new(extents: Vec<usize>, domain: DimSubset, values: Vec<f64>) -> Result<Self> {
        if extents.len() != domain.ambient() {
            return Err(Error::DimensionMismatch(format!(
                "{} extents for ambient size {}",
                extents.len(),
                domain.ambient()
            )));
        }
        if domain.members().iter().any(|&w| extents[w] == 0) {
            return Err(Error::InvalidShape("zero extent inside the domain".into()));
        }
        let count: usize = domain.members().iter().map(|&w| extents[w]).product();
        if values.len() != count {
            return Err(Error::ShapeMismatch {
                expected: vec![count],
                found: vec![values.len()],
            });
        }
        Ok(PartialArray {
            extents,
            domain,
            values,
        })
    }

    pub fn zeros(extents: Vec<usize>, domain: DimSubset) -> Result<Self> {
        let count: usize = domain.members().iter().map(|&w| extents.get(w).copied().unwrap_or(0)).product();
        PartialArray::new(extents, domain, vec![0.0; count])
    }

    pub fn from_fn(
        extents: Vec<usize>,
        domain: DimSubset,
        mut f: impl FnMut(&PartialIndex) -> f64,
    ) -> Result<Self> {
        if extents.len() != domain.ambient() {
            return Err(Error::DimensionMismatch(format!(
                "{} extents for ambient size {}",
                extents.len(),
                domain.ambient()
            )));
        }
        let values = all_indices(&domain, &extents).iter().map(&mut f).collect();
        PartialArray::new(extents, domain, values)
    }

    /// Array on the empty domain holding a single number.
    pub fn scalar(extents: Vec<usize>, value: f64) -> Self {
        let domain = DimSubset::empty(extents.len());
        PartialArray {
            extents,
            domain,
            values: vec![value],
        }
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn domain(&self) -> &DimSubset {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Extents of the domain members, in member order.
    pub fn member_extents(&self) -> Vec<usize> {
        self.domain.members().iter().map(|&w| self.extents[w]).collect()
    }

    /// Storage offset of the entry whose value at member `ω` is `value_of(ω)`.
    pub(crate) fn offset_by(&self, value_of: impl Fn(usize) -> usize) -> usize {
        self.domain
            .members()
            .iter()
            .fold(0, |acc, &w| acc * self.extents[w] + value_of(w))
    }

    pub fn get(&self, index: &PartialIndex) -> Result<f64> {
        if index.domain() != &self.domain {
            return Err(Error::InvalidIndex(format!(
                "index on {:?}, array on {:?}",
                index.domain().members(),
                self.domain.members()
            )));
        }
        if !index.within(&self.extents) {
            return Err(Error::InvalidIndex("index outside the array extents".into()));
        }
        Ok(self.values[self.offset_by(|w| index.get(w).unwrap())])
    }

    /// The single value of an array on the empty domain.
    pub fn as_scalar(&self) -> Option<f64> {
        self.domain.is_empty().then(|| self.values[0])
    }

    pub fn frobenius(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, c: f64) -> PartialArray {
        PartialArray {
            extents: self.extents.clone(),
            domain: self.domain.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// Largest entrywise difference; domains and member extents must agree.
    pub fn max_abs_diff(&self, other: &PartialArray) -> Result<f64> {
        if self.domain != other.domain || self.member_extents() != other.member_extents() {
            return Err(Error::DimensionMismatch(format!(
                "arrays on {:?} / {:?} with extents {:?} / {:?}",
                self.domain.members(),
                other.domain.members(),
                self.member_extents(),
                other.member_extents()
            )));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Returns `Ω` when this array lives on `Ω ⊕ Ω` with extents `m^{×2}`.
    pub fn doubled_base(&self) -> Result<DimSubset> {
        let (lo, hi) = self.domain.split_doubled()?;
        if lo != hi {
            return Err(Error::DimensionMismatch(format!(
                "domain {:?} is not of the form Ω ⊕ Ω",
                self.domain.members()
            )));
        }
        let n = lo.ambient();
        if lo.members().iter().any(|&w| self.extents[w] != self.extents[w + n]) {
            return Err(Error::DimensionMismatch(
                "doubled array needs matching extents in both halves".into(),
            ));
        }
        Ok(lo)
    }
}

/// `C^⟨Ω'⟩`: sums a doubled array over matched index pairs on `Ω' ⊆ Ω`.
pub fn partial_trace(c: &PartialArray, sub: &DimSubset) -> Result<PartialArray> {
    let omega = c.doubled_base()?;
    if !sub.is_subset_of(&omega) {
        return Err(Error::InvalidIndex(format!(
            "trace set {:?} not contained in {:?}",
            sub.members(),
            omega.members()
        )));
    }
    let n = omega.ambient();
    let rest = omega.difference(sub)?;
    let out_domain = rest.doubled();
    let ext = c.extents();
    let out_ext: Vec<usize> = out_domain.members().iter().map(|&w| ext[w]).collect();
    let sub_ext: Vec<usize> = sub.members().iter().map(|&w| ext[w]).collect();
    let mut full = vec![0usize; 2 * n];
    let mut values = Vec::new();
    for_each_assignment(&out_ext, |ij| {
        for (&w, &v) in out_domain.members().iter().zip(ij) {
            full[w] = v;
        }
        let mut acc = 0.0;
        for_each_assignment(&sub_ext, |l| {
            for (&w, &v) in sub.members().iter().zip(l) {
                full[w] = v;
                full[w + n] = v;
            }
            acc += c.values[c.offset_by(|w| full[w])];
        });
        values.push(acc);
    });
    PartialArray::new(ext.to_vec(), out_domain, values)
}

/// `‖D‖_{F(Ω')}`: root-sum-of-squares over the dimensions in `sub`.
/// An empty `sub` yields entrywise absolute values.
pub fn partial_frobenius(d: &PartialArray, sub: &DimSubset) -> Result<PartialArray> {
    if !sub.is_subset_of(d.domain()) {
        return Err(Error::InvalidIndex(format!(
            "{:?} not contained in {:?}",
            sub.members(),
            d.domain().members()
        )));
    }
    let rest = d.domain().difference(sub)?;
    let ext = d.extents();
    let rest_ext: Vec<usize> = rest.members().iter().map(|&w| ext[w]).collect();
    let sub_ext: Vec<usize> = sub.members().iter().map(|&w| ext[w]).collect();
    let mut full = vec![0usize; ext.len()];
    let mut values = Vec::new();
    for_each_assignment(&rest_ext, |i| {
        for (&w, &v) in rest.members().iter().zip(i) {
            full[w] = v;
        }
        let mut acc = 0.0;
        for_each_assignment(&sub_ext, |j| {
            for (&w, &v) in sub.members().iter().zip(j) {
                full[w] = v;
            }
            let x = d.values[d.offset_by(|w| full[w])];
            acc += x * x;
        });
        values.push(acc.sqrt());
    });
    PartialArray::new(ext.to_vec(), rest, values)
}
