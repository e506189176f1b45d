//! Normalized QAM constellations with Gray labeling.
//!
//! Supported orders are BPSK (M = 2) and square QAM (M = 4, 16, 64). Square
//! constellations use a reflected binary Gray code on each axis. The first
//! half of a label selects the in-phase level and the second half the
//! quadrature level; levels are ordered from most negative to most positive.
//! All constellations are scaled to unit average energy.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// An M-ary constellation with unit average energy.
///
/// Point `i` carries label `labels[i]`, stored as a big-endian integer of
/// `bits_per_symbol` bits. The structure is immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: u32,
    bits_per_symbol: usize,
    points: Vec<Complex64>,
    labels: Vec<u32>,
    // label value -> point index
    index_of_label: Vec<usize>,
}

fn gray(i: u32) -> u32 {
    i ^ (i >> 1)
}

impl Constellation {
    /// Builds the constellation of order `order`.
    pub fn new(order: u32) -> Result<Self> {
        let (points, labels) = match order {
            2 => (
                vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)],
                vec![0, 1],
            ),
            4 | 16 | 64 => {
                let side = (order as f64).sqrt().round() as u32;
                let half_bits = side.trailing_zeros();
                // mean of a^2 + b^2 over the odd-integer grid is 2(M - 1)/3
                let scale = 1.0 / (2.0 * (order as f64 - 1.0) / 3.0).sqrt();
                let level = |i: u32| (2.0 * i as f64 - (side as f64 - 1.0)) * scale;
                let mut points = Vec::with_capacity(order as usize);
                let mut labels = Vec::with_capacity(order as usize);
                for i in 0..side {
                    for q in 0..side {
                        points.push(Complex64::new(level(i), level(q)));
                        labels.push((gray(i) << half_bits) | gray(q));
                    }
                }
                (points, labels)
            }
            other => return Err(Error::UnsupportedOrder(other)),
        };
        let mut index_of_label = vec![0; order as usize];
        for (idx, &label) in labels.iter().enumerate() {
            index_of_label[label as usize] = idx;
        }
        Ok(Constellation {
            order,
            bits_per_symbol: order.trailing_zeros() as usize,
            points,
            labels,
            index_of_label,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Number of bits carried by one symbol, log2(M).
    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Labels as big-endian integers, aligned with [`points`](Self::points).
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    pub fn label(&self, index: usize) -> u32 {
        self.labels[index]
    }

    /// Index of the point carrying `label`.
    pub fn index_of_label(&self, label: u32) -> usize {
        self.index_of_label[label as usize]
    }

    /// Label of point `index` as a bit string (one `u8` per bit, MSB first).
    pub fn label_bits(&self, index: usize) -> Vec<u8> {
        label_to_bits(self.labels[index], self.bits_per_symbol)
    }

    /// Maps `bits` (one `u8` per bit, MSB first) to its constellation point.
    pub fn map_bits(&self, bits: &[u8]) -> Result<Complex64> {
        if bits.len() != self.bits_per_symbol {
            return Err(Error::LengthMismatch {
                expected: self.bits_per_symbol,
                got: bits.len(),
            });
        }
        Ok(self.points[self.index_of_label[bits_to_label(bits) as usize]])
    }

    /// Index of the Euclidean-nearest point. Ties go to the lowest index.
    pub fn nearest_index(&self, y: Complex64) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (y - p).norm_sqr();
            if d < best_dist {
                best_dist = d;
                best = i;
            }
        }
        best
    }

    /// Hard-decision demapping: label of the nearest point.
    pub fn demap_symbol(&self, y: Complex64) -> Vec<u8> {
        self.label_bits(self.nearest_index(y))
    }

    /// Average symbol energy, (1/M) sum |p|^2.
    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }
}

/// Reads a bit string (MSB first) as an unsigned integer. Any nonzero byte is a one.
pub(crate) fn bits_to_label(bits: &[u8]) -> u32 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | u32::from(b != 0))
}

pub(crate) fn label_to_bits(label: u32, width: usize) -> Vec<u8> {
    (0..width)
        .rev()
        .map(|shift| ((label >> shift) & 1) as u8)
        .collect()
}
