use super::tensor::Tensor2;
use crate::error::{Error, Result};

/// A named parameter with its gradient buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub value: Tensor2,
    pub grad: Tensor2,
    /// Weight matrices are gradient-centralized; bias vectors are not.
    pub is_matrix: bool,
}

/// Ordered collection of parameters. Iteration order is insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamSet {
    entries: Vec<Param>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, value: Tensor2, is_matrix: bool) -> Result<()> {
        let name = name.into();
        if self.entries.iter().any(|p| p.name == name) {
            return Err(Error::invalid(
                "parameter name",
                format!("duplicate `{name}`"),
            ));
        }
        let grad = Tensor2::zeros(value.rows(), value.cols());
        self.entries.push(Param {
            name,
            value,
            grad,
            is_matrix,
        });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Param> {
        self.entries.iter()
    }

    pub fn iter_mut(&mut self) -> std::slice::IterMut<'_, Param> {
        self.entries.iter_mut()
    }

    pub fn get(&self, name: &str) -> Option<&Param> {
        self.entries.iter().find(|p| p.name == name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Param> {
        self.entries.iter_mut().find(|p| p.name == name)
    }

    pub fn by_index(&self, i: usize) -> &Param {
        &self.entries[i]
    }

    pub fn by_index_mut(&mut self, i: usize) -> &mut Param {
        &mut self.entries[i]
    }

    /// Total number of scalar coordinates.
    pub fn num_scalars(&self) -> usize {
        self.entries.iter().map(|p| p.value.len()).sum()
    }

    pub fn zero_grads(&mut self) {
        for p in &mut self.entries {
            p.grad.fill(0.0);
        }
    }

    /// Zero tensors shaped like each parameter.
    pub fn zeros_like(&self) -> Vec<Tensor2> {
        self.entries
            .iter()
            .map(|p| Tensor2::zeros(p.value.rows(), p.value.cols()))
            .collect()
    }

    pub fn flat_values(&self) -> Vec<f64> {
        self.entries
            .iter()
            .flat_map(|p| p.value.as_slice().iter().copied())
            .collect()
    }

    pub fn flat_grads(&self) -> Vec<f64> {
        self.entries
            .iter()
            .flat_map(|p| p.grad.as_slice().iter().copied())
            .collect()
    }

    /// Global L2 norm over every gradient entry.
    pub fn grad_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|p| p.grad.sum_squares())
            .sum::<f64>()
            .sqrt()
    }

    /// Returns the scalar at flat coordinate `index` as (entry, offset).
    pub fn locate(&self, mut index: usize) -> Option<(usize, usize)> {
        for (i, p) in self.entries.iter().enumerate() {
            if index < p.value.len() {
                return Some((i, index));
            }
            index -= p.value.len();
        }
        None
    }

    /// FNV-1a over names, shapes and value bits.
    pub fn checksum(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        let mut eat = |bytes: &[u8]| {
            for b in bytes {
                h ^= u64::from(*b);
                h = h.wrapping_mul(PRIME);
            }
        };
        for p in &self.entries {
            eat(p.name.as_bytes());
            eat(&(p.value.rows() as u64).to_le_bytes());
            eat(&(p.value.cols() as u64).to_le_bytes());
            for x in p.value.as_slice() {
                eat(&x.to_bits().to_le_bytes());
            }
        }
        h
    }
}

impl<'a> IntoIterator for &'a ParamSet {
    type Item = &'a Param;
    type IntoIter = std::slice::Iter<'a, Param>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}
