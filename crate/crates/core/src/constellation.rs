//! Unit-power modulation alphabets and the hard-decision slicer.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{c, Complex, ComplexMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modulation {
    #[serde(rename = "bpsk")]
    Bpsk,
    #[serde(rename = "qpsk")]
    Qpsk,
    #[serde(rename = "16qam")]
    Qam16,
}

impl Modulation {
    pub fn constellation(self) -> Constellation {
        Constellation::new(self)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Modulation::Bpsk => "bpsk",
            Modulation::Qpsk => "qpsk",
            Modulation::Qam16 => "16qam",
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "bpsk" => Ok(Modulation::Bpsk),
            "qpsk" => Ok(Modulation::Qpsk),
            "16qam" | "qam16" => Ok(Modulation::Qam16),
            other => Err(Error::InvalidConfig(format!(
                "unknown modulation '{other}' (expected bpsk, qpsk or 16qam)"
            ))),
        }
    }
}

/// A finite symbol alphabet with Gray labels.
///
/// `labels[i]` holds the bit pattern of `points[i]`. The rotation list holds
/// the unit-modulus scalars that map the alphabet onto itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    modulation: Modulation,
    points: Vec<Complex>,
    labels: Vec<u32>,
    bits_per_symbol: u32,
    symmetry_rotations: Vec<Complex>,
}

// Gray code on an axis with levels ordered from most negative to most positive.
const GRAY_2: [u32; 2] = [1, 0];
const GRAY_4: [u32; 4] = [0b00, 0b01, 0b11, 0b10];

impl Constellation {
    pub fn new(modulation: Modulation) -> Self {
        let one = c(1.0, 0.0);
        let quarter_turns = vec![one, c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        match modulation {
            Modulation::Bpsk => Self {
                modulation,
                points: vec![c(1.0, 0.0), c(-1.0, 0.0)],
                labels: vec![0, 1],
                bits_per_symbol: 1,
                symmetry_rotations: vec![one, c(-1.0, 0.0)],
            },
            Modulation::Qpsk => {
                let (points, labels) = square_grid(&[-1.0, 1.0], &GRAY_2, 1, 2f64.sqrt());
                Self {
                    modulation,
                    points,
                    labels,
                    bits_per_symbol: 2,
                    symmetry_rotations: quarter_turns,
                }
            }
            Modulation::Qam16 => {
                let (points, labels) =
                    square_grid(&[-3.0, -1.0, 1.0, 3.0], &GRAY_4, 2, 10f64.sqrt());
                Self {
                    modulation,
                    points,
                    labels,
                    bits_per_symbol: 4,
                    symmetry_rotations: quarter_turns,
                }
            }
        }
    }

    pub fn modulation(&self) -> Modulation {
        self.modulation
    }

    pub fn points(&self) -> &[Complex] {
        &self.points
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits_per_symbol
    }

    pub fn symmetry_rotations(&self) -> &[Complex] {
        &self.symmetry_rotations
    }

    /// Index of the nearest point; ties go to the lowest index.
    #[inline]
    pub fn nearest_index(&self, x: Complex) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (x - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    #[inline]
    pub fn slice(&self, x: Complex) -> Complex {
        self.points[self.nearest_index(x)]
    }

    pub fn slice_matrix(&self, x: &ComplexMatrix) -> ComplexMatrix {
        x.map(|z| self.slice(z))
    }

    /// `count` i.i.d. uniform draws from the alphabet.
    pub fn random_symbols<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<Complex> {
        (0..count)
            .map(|_| self.points[rng.random_range(0..self.points.len())])
            .collect()
    }

    /// Number of differing Gray bits between the decisions for `a` and `b`.
    #[inline]
    pub fn bit_errors(&self, a: Complex, b: Complex) -> u32 {
        (self.labels[self.nearest_index(a)] ^ self.labels[self.nearest_index(b)]).count_ones()
    }

    /// Best common scalar rotation of `s_hat` against `s_true`.
    ///
    /// Tries every `ρ` in the symmetry list, slices `ρ·ŝ` and counts symbol
    /// mismatches. Returns the first minimizing rotation and its count.
    pub fn best_rotation_errors(
        &self,
        s_hat: &ComplexMatrix,
        s_true: &ComplexMatrix,
    ) -> (Complex, usize) {
        assert_eq!(s_hat.shape(), s_true.shape(), "shape mismatch");
        let truth: Vec<usize> = s_true
            .as_slice()
            .iter()
            .map(|&z| self.nearest_index(z))
            .collect();
        let mut best = (self.symmetry_rotations[0], usize::MAX);
        for &rho in &self.symmetry_rotations {
            let errors = s_hat
                .as_slice()
                .iter()
                .zip(&truth)
                .filter(|(&z, &t)| self.nearest_index(rho * z) != t)
                .count();
            if errors < best.1 {
                best = (rho, errors);
            }
        }
        best
    }
}

fn square_grid(
    levels: &[f64],
    gray: &[u32],
    axis_bits: u32,
    scale: f64,
) -> (Vec<Complex>, Vec<u32>) {
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (i, &re) in levels.iter().enumerate() {
        for (q, &im) in levels.iter().enumerate() {
            points.push(c(re / scale, im / scale));
            labels.push((gray[i] << axis_bits) | gray[q]);
        }
    }
    (points, labels)
}
