//! Best-first enumeration of the largest eigenvalue products.
//!
//! Products are symmetric in the coordinates of `k`, so the search runs over
//! non-decreasing multi-indices only and weights each by the number of its
//! distinct permutations.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::spectrum::{same_level, Spectrum, SpectrumSpec};

/// One distinct value of `lambda_k^2` with the number of `k` attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductLevel<T> {
    /// `ln lambda_k^2 = 2 sum ln lambda(k_l)`.
    pub log_value: T,
    pub multiplicity: BigUint,
}

impl<T: Real> ProductLevel<T> {
    pub fn value(&self) -> T {
        self.log_value.exp()
    }

    /// Level of the sum `S_d = -ln lambda_k`.
    pub fn sum_level(&self) -> T {
        -self.log_value / T::lit(2.0)
    }
}

#[derive(Debug)]
struct Node<T> {
    log_value: T,
    index: Box<[u32]>,
}

impl<T: Real> PartialEq for Node<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Real> Eq for Node<T> {}
impl<T: Real> PartialOrd for Node<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Node<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.log_value
            .partial_cmp(&other.log_value)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.index.cmp(&self.index))
    }
}

/// Lazily yields product levels in decreasing order of value.
pub struct ProductLevels<'a, T> {
    spectrum: &'a Spectrum<T>,
    d: usize,
    heap: BinaryHeap<Node<T>>,
    visited: HashSet<Box<[u32]>>,
    budget: usize,
    ln_lambda: Vec<T>,
    failed: bool,
}

impl<'a, T: Real> ProductLevels<'a, T> {
    /// `budget` caps the number of stored multi-indices (frontier plus visited set).
    pub fn new(spectrum: &'a Spectrum<T>, d: usize, budget: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut levels = Self {
            spectrum,
            d,
            heap: BinaryHeap::new(),
            visited: HashSet::new(),
            budget,
            ln_lambda: Vec::new(),
            failed: false,
        };
        let start: Box<[u32]> = vec![1u32; d].into_boxed_slice();
        let log_value = levels.log_value(&start);
        levels.visited.insert(start.clone());
        levels.heap.push(Node {
            log_value,
            index: start,
        });
        Ok(levels)
    }

    fn ln_lambda_at(&mut self, i: u32) -> T {
        let i = i as usize;
        while self.ln_lambda.len() < i {
            let next = self.ln_lambda.len() + 1;
            self.ln_lambda.push(self.spectrum.ln_lambda(next));
        }
        self.ln_lambda[i - 1]
    }

    fn log_value(&mut self, index: &[u32]) -> T {
        let two = T::lit(2.0);
        let mut acc = T::zero();
        for &i in index {
            acc = acc + two * self.ln_lambda_at(i);
        }
        acc
    }

    fn expand(&mut self, node: &Node<T>) -> Result<()> {
        let limit = self.spectrum.len();
        for j in 0..self.d {
            let at_end = j + 1 == self.d;
            if !at_end && node.index[j] >= node.index[j + 1] {
                continue;
            }
            let next = node.index[j] + 1;
            if limit.is_some_and(|n| next as usize > n) {
                continue;
            }
            let mut index = node.index.clone();
            index[j] = next;
            if self.visited.contains(&index) {
                continue;
            }
            // only the changed coordinate contributes a new factor
            let log_value = node.log_value
                + T::lit(2.0) * (self.ln_lambda_at(next) - self.ln_lambda_at(next - 1));
            self.visited.insert(index.clone());
            self.heap.push(Node { log_value, index });
            if self.visited.len() + self.heap.len() > self.budget {
                return Err(Error::LimitExceedsMemory(self.budget));
            }
        }
        Ok(())
    }

    /// Number of distinct permutations of a sorted multi-index.
    fn permutations(&self, index: &[u32]) -> BigUint {
        let mut acc = BigUint::one();
        let mut run = 0u32;
        for (pos, w) in index.iter().enumerate() {
            if pos > 0 && index[pos - 1] == *w {
                run += 1;
            } else {
                run = 1;
            }
            // multiply by (pos+1)/run incrementally: d!/prod(c_j!)
            acc *= (pos + 1) as u32;
            acc /= run;
        }
        acc
    }
}

impl<T: Real> Iterator for ProductLevels<'_, T> {
    type Item = Result<ProductLevel<T>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let top = self.heap.pop()?;
        let log_value = top.log_value;
        let mut multiplicity = BigUint::zero();
        let mut pending = vec![top];
        // successors of equal eigenvalues can land on the same level
        while let Some(node) = pending.pop() {
            multiplicity += self.permutations(&node.index);
            if let Err(e) = self.expand(&node) {
                self.failed = true;
                return Some(Err(e));
            }
            while self.heap.peek().is_some_and(|p| same_level(p.log_value, log_value)) {
                pending.push(self.heap.pop().expect("peeked"));
            }
        }
        Some(Ok(ProductLevel {
            log_value,
            multiplicity,
        }))
    }
}

/// The `limit` largest distinct values of `lambda_k^2` over `k in N^d`.
pub fn top_products<T: Real>(spec: &SpectrumSpec, d: usize, limit: usize, budget: usize) -> Result<Vec<ProductLevel<T>>> {
    let spectrum = Spectrum::<T>::from_spec(spec)?;
    ProductLevels::new(&spectrum, d, budget)?.take(limit).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> SpectrumSpec {
        SpectrumSpec::geometric(1.0, 0.5f64.sqrt())
    }

    #[test]
    fn maximal_product_is_all_ones() {
        let top = top_products::<f64>(&half(), 2, 1, 1000).unwrap();
        assert_eq!(top.len(), 1);
        assert!((top[0].value() - 0.25).abs() < 1e-15);
        assert_eq!(top[0].multiplicity, BigUint::from(1u8));
    }

    #[test]
    fn three_levels_in_two_dimensions() {
        // brute force over {1..10}^2: levels 2^-2, 2^-3 (x2), 2^-4 (x3)
        let mut brute: Vec<(i32, u32)> = Vec::new();
        for i in 1..=10 {
            for j in 1..=10 {
                let m = i + j;
                match brute.iter_mut().find(|(v, _)| *v == m) {
                    Some((_, c)) => *c += 1,
                    None => brute.push((m, 1)),
                }
            }
        }
        brute.sort();
        let top = top_products::<f64>(&half(), 2, 3, 1000).unwrap();
        for (level, (m, c)) in top.iter().zip(brute) {
            assert!((level.value() - 2f64.powi(-m)).abs() < 1e-15);
            assert_eq!(level.multiplicity, BigUint::from(c));
        }
    }

    #[test]
    fn one_dimension_is_the_sorted_sequence() {
        let spec = SpectrumSpec::explicit([0.2, 0.9, 0.5, 0.5]);
        let top = top_products::<f64>(&spec, 1, 3, 100).unwrap();
        let values: Vec<f64> = top.iter().map(|l| l.value()).collect();
        assert!((values[0] - 0.81).abs() < 1e-15);
        assert!((values[1] - 0.25).abs() < 1e-15);
        assert!((values[2] - 0.04).abs() < 1e-15);
        assert_eq!(top[1].multiplicity, BigUint::from(2u8));
    }

    #[test]
    fn finite_spectrum_exhausts() {
        let spec = SpectrumSpec::explicit([1.0, 0.5]);
        let top = top_products::<f64>(&spec, 3, 10, 100).unwrap();
        let total: BigUint = top.iter().map(|l| l.multiplicity.clone()).sum();
        assert_eq!(total, BigUint::from(8u8));
        assert_eq!(top.len(), 4);
    }

    #[test]
    fn budget_is_enforced() {
        let err = top_products::<f64>(&half(), 8, 10_000, 50).unwrap_err();
        assert!(matches!(err, Error::LimitExceedsMemory(50)));
    }
}
