//! Sample containers: one block of observations per component, rows aligned
//! across components.

use crate::error::{Error, Result};

/// `n` observations of a `d`-dimensional component, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentSample {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl ComponentSample {
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::invalid(format!("component must have n >= 1 and d >= 1 (got n={n}, d={d})")));
        }
        if values.len() != n * d {
            return Err(Error::invalid(format!(
                "expected {} values for a {n}x{d} component, got {}",
                n * d,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value at row {}, column {}",
                pos / d + 1,
                pos % d + 1
            )));
        }
        Ok(ComponentSample { n, d, values })
    }

    /// One-dimensional component from a column of scalars.
    pub fn from_column(values: &[f64]) -> Result<Self> {
        Self::new(values.len(), 1, values.to_vec())
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::invalid("ragged rows"));
        }
        Self::new(rows.len(), d, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    /// Rows `idx` in order; indices may repeat.
    pub fn select_rows(&self, idx: &[usize]) -> ComponentSample {
        let mut values = Vec::with_capacity(idx.len() * self.d);
        for &i in idx {
            values.extend_from_slice(self.row(i));
        }
        ComponentSample {
            n: idx.len(),
            d: self.d,
            values,
        }
    }

    /// Column-wise concatenation of components with equal `n`.
    pub fn hstack(parts: &[&ComponentSample]) -> Result<ComponentSample> {
        let first = parts.first().ok_or_else(|| Error::invalid("hstack of nothing"))?;
        let n = first.n;
        if parts.iter().any(|p| p.n != n) {
            return Err(Error::invalid("hstack: components differ in n"));
        }
        let d: usize = parts.iter().map(|p| p.d).sum();
        let mut values = Vec::with_capacity(n * d);
        for i in 0..n {
            for p in parts {
                values.extend_from_slice(p.row(i));
            }
        }
        Ok(ComponentSample { n, d, values })
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.d];
        for i in 0..self.n {
            for (acc, v) in m.iter_mut().zip(self.row(i)) {
                *acc += v;
            }
        }
        m.iter_mut().for_each(|v| *v /= self.n as f64);
        m
    }
}

/// An i.i.d. sample of M-tuples: row `i` of every component is one joint
/// observation.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiSample {
    components: Vec<ComponentSample>,
}

impl MultiSample {
    /// Accepts `M >= 1` components sharing `n`. Estimators additionally
    /// require `M >= 2`.
    pub fn new(components: Vec<ComponentSample>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::invalid("a sample needs at least one component"))?;
        let n = first.n();
        if let Some((m, c)) = components.iter().enumerate().find(|(_, c)| c.n() != n) {
            return Err(Error::invalid(format!(
                "component {} has n={} but component 1 has n={n}",
                m + 1,
                c.n()
            )));
        }
        Ok(MultiSample { components })
    }

    /// Convenience constructor for scalar components given as columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        Self::new(
            columns
                .iter()
                .map(|c| ComponentSample::from_column(c))
                .collect::<Result<_>>()?,
        )
    }

    pub fn n(&self) -> usize {
        self.components[0].n()
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, m: usize) -> &ComponentSample {
        &self.components[m]
    }

    pub fn components(&self) -> &[ComponentSample] {
        &self.components
    }

    pub fn into_components(self) -> Vec<ComponentSample> {
        self.components
    }

    /// Joint rows `idx`, same selection in every component.
    pub fn select_rows(&self, idx: &[usize]) -> MultiSample {
        MultiSample {
            components: self.components.iter().map(|c| c.select_rows(idx)).collect(),
        }
    }

    /// Applies `perms[m]` (when present) to the rows of component `m`,
    /// leaving components with `None` untouched.
    pub fn permute_components(&self, perms: &[Option<Vec<usize>>]) -> MultiSample {
        MultiSample {
            components: self
                .components
                .iter()
                .zip(perms)
                .map(|(c, p)| match p {
                    Some(p) => c.select_rows(p),
                    None => c.clone(),
                })
                .collect(),
        }
    }

    pub(crate) fn require_multi(&self) -> Result<()> {
        if self.num_components() < 2 {
            return Err(Error::invalid(format!(
                "independence estimators need at least 2 components, got {}",
                self.num_components()
            )));
        }
        Ok(())
    }
}
