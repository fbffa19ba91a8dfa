//! Counter-based deterministic random stream and Haar sampling.
//!
//! Output `k` of a stream depends only on `(seed, counter + k)`, so streams
//! can be split across workers by jumping the counter.

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::matrix::CMatrix;
use super::scalar::Cplx;

const WEYL_INCREMENT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Counter spacing between substreams; no consumer draws more than this per substream.
pub const SUBSTREAM_STRIDE: u64 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomStream {
    seed: u64,
    counter: u64,
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, counter: 0 }
    }

    pub fn at(seed: u64, counter: u64) -> Self {
        Self { seed, counter }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Stream positioned `n` draws ahead; `self` is untouched.
    pub fn jumped(&self, n: u64) -> Self {
        Self {
            seed: self.seed,
            counter: self.counter.wrapping_add(n),
        }
    }

    /// Independent-looking child stream number `index`.
    pub fn substream(&self, index: u64) -> Self {
        self.jumped(index.wrapping_mul(SUBSTREAM_STRIDE))
    }

    #[inline]
    fn output(&self, counter: u64) -> u64 {
        let key = mix64(self.seed ^ 0x6A09_E667_F3BC_C909);
        mix64(key.wrapping_add(counter.wrapping_add(1).wrapping_mul(WEYL_INCREMENT)))
    }

    #[inline]
    pub fn draw_u64(&mut self) -> u64 {
        let out = self.output(self.counter);
        self.counter = self.counter.wrapping_add(1);
        out
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.draw_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(self)
    }

    /// Standard complex Gaussian, `E|z|² = 1`.
    pub fn complex_normal(&mut self) -> Cplx {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Cplx::new(s * self.normal(), s * self.normal())
    }

    pub fn ginibre(&mut self, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| self.complex_normal())
    }

    /// Real matrix with entries uniform in `[lo, hi)`.
    pub fn real_matrix(&mut self, rows: usize, cols: usize, lo: f64, hi: f64) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| Cplx::new(self.uniform_in(lo, hi), 0.0))
    }

    /// Complex matrix with real and imaginary parts uniform in `[lo, hi)`.
    pub fn complex_matrix(&mut self, rows: usize, cols: usize, lo: f64, hi: f64) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| {
            Cplx::new(self.uniform_in(lo, hi), self.uniform_in(lo, hi))
        })
    }

    /// Random Hermitian matrix with Gaussian entries.
    pub fn hermitian(&mut self, n: usize) -> CMatrix {
        let g = self.ginibre(n, n);
        CMatrix::from_fn(n, n, |i, j| 0.5 * (g.get(i, j) + g.get(j, i).conj()))
    }

    /// Random Hermitian positive-definite matrix `A A† + shift·1`.
    pub fn positive_definite(&mut self, n: usize, shift: f64) -> CMatrix {
        let a = self.ginibre(n, n);
        &(&a * &a.adjoint()) + &CMatrix::real_diag(&vec![shift; n])
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        (self.draw_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.draw_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.draw_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

/// Haar-distributed unitary of size `r`.
///
/// Gram–Schmidt on the columns of a complex Ginibre matrix; the implied
/// triangular factor has positive real diagonal, which fixes the phases.
pub fn haar_unitary(r: usize, stream: &mut RandomStream) -> CMatrix {
    assert!(r >= 1, "unitary size must be positive");
    let g = stream.ginibre(r, r);
    let mut cols: Vec<Vec<Cplx>> = (0..r).map(|j| (0..r).map(|i| *g.get(i, j)).collect()).collect();
    for j in 0..r {
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for k in 0..j {
                let proj: Cplx = (0..r).map(|i| cols[k][i].conj() * cols[j][i]).sum();
                for i in 0..r {
                    let v = cols[k][i] * proj;
                    cols[j][i] -= v;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
    }
    CMatrix::from_fn(r, r, |i, j| cols[j][i])
}
