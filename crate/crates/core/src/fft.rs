//! Multi-dimensional FFT helpers over row-major complex buffers.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

/// Smallest 2^a·3^b·5^c ≥ n, a size rustfft handles quickly.
pub fn good_size(n: usize) -> usize {
    let mut k = n.max(1);
    loop {
        let mut r = k;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return k;
        }
        k += 1;
    }
}

/// Planned transforms for a 3-D array of shape (n0, n1, n2), last axis contiguous.
pub struct Fft3 {
    shape: [usize; 3],
    plans: [Arc<dyn Fft<f64>>; 3],
    scratch: Vec<Complex64>,
    line: Vec<Complex64>,
}

impl Fft3 {
    pub fn new(shape: [usize; 3], direction: FftDirection) -> Self {
        let mut planner = FftPlanner::new();
        let plans = [
            planner.plan_fft(shape[0], direction),
            planner.plan_fft(shape[1], direction),
            planner.plan_fft(shape[2], direction),
        ];
        let scratch_len = plans.iter().map(|p| p.get_inplace_scratch_len()).max().unwrap_or(0);
        Fft3 {
            shape,
            plans,
            scratch: vec![Complex64::default(); scratch_len],
            line: vec![Complex64::default(); shape.iter().copied().max().unwrap_or(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// In-place unnormalized transform along all three axes.
    pub fn process(&mut self, data: &mut [Complex64]) {
        self.process_axes(data, [true; 3]);
    }

    /// Transform only along the selected axes.
    pub fn process_axes(&mut self, data: &mut [Complex64], axes: [bool; 3]) {
        let [n0, n1, n2] = self.shape;
        debug_assert_eq!(data.len(), n0 * n1 * n2);
        if axes[2] && n2 > 1 {
            self.plans[2].process_with_scratch(data, &mut self.scratch);
        }
        if axes[1] && n1 > 1 {
            for a in 0..n0 {
                for c in 0..n2 {
                    let base = a * n1 * n2 + c;
                    for b in 0..n1 {
                        self.line[b] = data[base + b * n2];
                    }
                    self.plans[1].process_with_scratch(&mut self.line[..n1], &mut self.scratch);
                    for b in 0..n1 {
                        data[base + b * n2] = self.line[b];
                    }
                }
            }
        }
        if axes[0] && n0 > 1 {
            let stride = n1 * n2;
            for c in 0..stride {
                for a in 0..n0 {
                    self.line[a] = data[a * stride + c];
                }
                self.plans[0].process_with_scratch(&mut self.line[..n0], &mut self.scratch);
                for a in 0..n0 {
                    data[a * stride + c] = self.line[a];
                }
            }
        }
    }
}
