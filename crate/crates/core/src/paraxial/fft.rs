//! Iterative radix-2 FFT. Forward is unnormalized; inverse divides by `n`.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Fft {
    n: usize,
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

impl Fft {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("FFT length {n} is not a power of two")));
        }
        let bits = n.trailing_zeros();
        let bitrev = (0..n).map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) }).collect();
        // Each twiddle is evaluated directly to avoid accumulated rotation error.
        let twiddles =
            (0..n / 2).map(|k| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * k as f64 / n as f64)).collect();
        Ok(Self { n, twiddles, bitrev })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, false);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, true);
        let scale = 1.0 / self.n as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn run(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.n, "FFT buffer length mismatch");
        for i in 0..self.n {
            let j = self.bitrev[i];
            if i < j {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= self.n {
            let half = len / 2;
            let stride = self.n / len;
            for start in (0..self.n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

/// Row-major 2D transform: `data[iy * nx + ix]`.
#[derive(Clone, Debug)]
pub struct Fft2 {
    x: Fft,
    y: Fft,
}

impl Fft2 {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        Ok(Self { x: Fft::new(nx)?, y: Fft::new(ny)? })
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.apply(data, false);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.apply(data, true);
    }

    fn apply(&self, data: &mut [Complex64], inverse: bool) {
        let (nx, ny) = (self.x.len(), self.y.len());
        assert_eq!(data.len(), nx * ny, "FFT buffer length mismatch");
        for row in data.chunks_exact_mut(nx) {
            if inverse {
                self.x.inverse(row);
            } else {
                self.x.forward(row);
            }
        }
        let mut col = vec![Complex64::new(0.0, 0.0); ny];
        for ix in 0..nx {
            for iy in 0..ny {
                col[iy] = data[iy * nx + ix];
            }
            if inverse {
                self.y.inverse(&mut col);
            } else {
                self.y.forward(&mut col);
            }
            for iy in 0..ny {
                data[iy * nx + ix] = col[iy];
            }
        }
    }
}

/// Angular frequencies `2π m / (n d)` in FFT order.
pub fn frequencies(n: usize, d: f64) -> Vec<f64> {
    let scale = 2.0 * std::f64::consts::PI / (n as f64 * d);
    (0..n)
        .map(|m| {
            let signed = if m < n.div_ceil(2) { m as f64 } else { m as f64 - n as f64 };
            signed * scale
        })
        .collect()
}
