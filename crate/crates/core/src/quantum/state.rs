use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rustfft::{FftDirection, FftPlanner};

/// Dense two-register state over `Z_{N1} x Z_{N2}`; amplitude of `|m>|n>` lives
/// at `m * N2 + n`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dims: (usize, usize),
    amps: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Register {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `|m> -> N^(-1/2) sum_k w^(km) |k>`, `w = exp(2 pi i / N)`.
    Forward,
    Inverse,
}

/// `exp(2 pi i k / n)` with `k` reduced mod `n` first.
pub fn root_of_unity(k: u64, n: u64) -> Complex64 {
    let k = k % n;
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)
}

impl StateVector {
    pub fn zeros(dims: (usize, usize)) -> Self {
        StateVector {
            dims,
            amps: vec![Complex64::new(0.0, 0.0); dims.0 * dims.1],
        }
    }

    pub fn basis(dims: (usize, usize), m: usize, n: usize) -> Self {
        let mut s = Self::zeros(dims);
        s.amps[m * dims.1 + n] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn from_amplitudes(dims: (usize, usize), amps: Vec<Complex64>) -> Self {
        assert_eq!(
            amps.len(),
            dims.0 * dims.1,
            "amplitude count must match dims"
        );
        StateVector { dims, amps }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    #[inline]
    pub fn amp(&self, m: usize, n: usize) -> Complex64 {
        self.amps[m * self.dims.1 + n]
    }

    #[inline]
    pub fn amp_mut(&mut self, m: usize, n: usize) -> &mut Complex64 {
        &mut self.amps[m * self.dims.1 + n]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Basis states with `|amp|^2 > eps`.
    pub fn support(&self, eps: f64) -> Vec<(usize, usize)> {
        (0..self.amps.len())
            .filter(|&k| self.amps[k].norm_sqr() > eps)
            .map(|k| (k / self.dims.1, k % self.dims.1))
            .collect()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        assert_eq!(self.dims, other.dims);
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Probability of each outcome when measuring `register`.
    pub fn marginal(&self, register: Register) -> Vec<f64> {
        let (n1, n2) = self.dims;
        match register {
            Register::First => (0..n1)
                .map(|m| (0..n2).map(|n| self.amp(m, n).norm_sqr()).sum())
                .collect(),
            Register::Second => (0..n2)
                .map(|n| (0..n1).map(|m| self.amp(m, n).norm_sqr()).sum())
                .collect(),
        }
    }
}

/// Quantum Fourier transform over `Z_N` on one register.
pub fn qft(state: &StateVector, register: Register, direction: Direction) -> StateVector {
    let (n1, n2) = state.dims;
    let len = match register {
        Register::First => n1,
        Register::Second => n2,
    };
    // Forward carries w^(+km), which is rustfft's inverse (positive exponent) direction.
    let fft_dir = match direction {
        Direction::Forward => FftDirection::Inverse,
        Direction::Inverse => FftDirection::Forward,
    };
    let fft = FftPlanner::new().plan_fft(len, fft_dir);
    let scale = 1.0 / (len as f64).sqrt();
    let mut out = state.clone();
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    match register {
        Register::First => {
            for n in 0..n2 {
                for (m, slot) in buf.iter_mut().enumerate() {
                    *slot = state.amp(m, n);
                }
                fft.process(&mut buf);
                for (m, v) in buf.iter().enumerate() {
                    *out.amp_mut(m, n) = v * scale;
                }
            }
        }
        Register::Second => {
            for m in 0..n1 {
                let row = &mut out.amps[m * n2..(m + 1) * n2];
                fft.process(row);
                row.iter_mut().for_each(|v| *v *= scale);
            }
        }
    }
    out
}

/// Draws an index from `probs` (which should sum to 1).
pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (k, &p) in probs.iter().enumerate() {
        acc += p;
        if target < acc {
            return k;
        }
    }
    // rounding can leave target == total; fall back to the last nonzero outcome
    probs
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(probs.len() - 1)
}

/// Computational-basis measurement of one register; returns the outcome and
/// the renormalized post-measurement state.
pub fn measure<R: Rng + ?Sized>(
    state: &StateVector,
    register: Register,
    rng: &mut R,
) -> (usize, StateVector) {
    let probs = state.marginal(register);
    let outcome = sample_index(&probs, rng);
    let scale = 1.0 / probs[outcome].sqrt();
    let (n1, n2) = state.dims;
    let mut out = StateVector::zeros(state.dims);
    match register {
        Register::First => {
            for n in 0..n2 {
                *out.amp_mut(outcome, n) = state.amp(outcome, n) * scale;
            }
        }
        Register::Second => {
            for m in 0..n1 {
                *out.amp_mut(m, outcome) = state.amp(m, outcome) * scale;
            }
        }
    }
    (outcome, out)
}
