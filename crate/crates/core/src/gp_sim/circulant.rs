//! Exact sampling of stationary Gaussian sequences by circulant embedding.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Relative eigenvalue tolerance, multiplied by the embedding length.
pub const EIGEN_TOLERANCE: f64 = 1e-10;
/// Number of times the embedding may be doubled before giving up.
pub const MAX_DOUBLINGS: u32 = 6;

fn first_row(cov: &[f64], half: usize) -> Vec<f64> {
    // half = M, row length 2M: [c0..cM, c(M-1)..c1]
    let mut row = Vec::with_capacity(2 * half);
    row.extend_from_slice(&cov[..=half]);
    row.extend(cov[1..half].iter().rev());
    row
}

fn real_spectrum(row: &[f64]) -> Vec<f64> {
    let m = row.len();
    let mut buf: Vec<Complex64> = row.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

fn check_eigenvalues(eig: &mut [f64]) -> std::result::Result<(), (f64, f64)> {
    let tol = EIGEN_TOLERANCE * eig.len() as f64;
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -tol {
        return Err((min, tol));
    }
    for e in eig.iter_mut() {
        if *e < 0.0 {
            *e = 0.0;
        }
    }
    Ok(())
}

/// Eigenvalues of the minimal circulant extension of the lag covariances
/// `cov[0..n]` (embedding length `2(n-1)`, or 1 when `n == 1`).
///
/// Eigenvalues within the tolerance below zero are returned as zero.
pub fn circulant_embed(cov: &[f64]) -> Result<Vec<f64>> {
    if cov.is_empty() {
        return Ok(Vec::new());
    }
    if cov.len() == 1 {
        return Ok(vec![cov[0]]);
    }
    let mut eig = real_spectrum(&first_row(cov, cov.len() - 1));
    check_eigenvalues(&mut eig).map_err(|(min, tol)| Error::NonEmbeddable {
        min_eigenvalue: min,
        tolerance: tol,
        length: eig.len(),
    })?;
    Ok(eig)
}

/// Smallest 5-smooth integer that is `>= n`.
fn smooth_at_least(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for f in [2, 3, 5] {
            while r % f == 0 {
                r /= f;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Prepared sampler for a stationary sequence of length `n` with lag
/// covariance `kernel(k)`.
#[derive(Clone)]
pub struct CirculantEmbedding {
    n: usize,
    scale: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CirculantEmbedding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantEmbedding")
            .field("n", &self.n)
            .field("length", &self.scale.len())
            .finish()
    }
}

/// Per-worker scratch space for circulant sampling.
#[derive(Default)]
pub struct CirculantScratch {
    buf: Vec<Complex64>,
    fft: Vec<Complex64>,
}

impl CirculantEmbedding {
    /// Builds the embedding, starting from the smallest FFT-friendly size and
    /// doubling up to [`MAX_DOUBLINGS`] times if negative eigenvalues appear.
    pub fn for_kernel(kernel: impl Fn(usize) -> f64, n: usize) -> Result<Self> {
        assert!(n >= 1);
        let mut half = smooth_at_least(n.saturating_sub(1).max(1));
        let mut last = (0.0, 0.0, 0);
        for _ in 0..=MAX_DOUBLINGS {
            let cov: Vec<f64> = (0..=half).map(&kernel).collect();
            let mut eig = real_spectrum(&first_row(&cov, half));
            match check_eigenvalues(&mut eig) {
                Ok(()) => return Ok(Self::from_eigenvalues(n, &eig)),
                Err((min, tol)) => last = (min, tol, eig.len()),
            }
            half *= 2;
        }
        Err(Error::NonEmbeddable {
            min_eigenvalue: last.0,
            tolerance: last.1,
            length: last.2,
        })
    }

    fn from_eigenvalues(n: usize, eig: &[f64]) -> Self {
        let m = eig.len();
        let scale = eig.iter().map(|&e| (e / m as f64).sqrt()).collect();
        let fft = FftPlanner::new().plan_fft_forward(m);
        Self { n, scale, fft }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn embedding_length(&self) -> usize {
        self.scale.len()
    }

    /// Draws two independent sequences (real and imaginary parts).
    pub fn sample_pair<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        scratch: &mut CirculantScratch,
        a: &mut [f64],
        b: &mut [f64],
    ) {
        let m = self.scale.len();
        scratch.buf.clear();
        scratch.buf.extend(self.scale.iter().map(|&s| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(s * re, s * im)
        }));
        let need = self.fft.get_inplace_scratch_len();
        if scratch.fft.len() < need {
            scratch.fft.resize(need, Complex64::default());
        }
        self.fft
            .process_with_scratch(&mut scratch.buf[..m], &mut scratch.fft[..need]);
        for (k, c) in scratch.buf[..self.n].iter().enumerate() {
            a[k] = c.re;
            b[k] = c.im;
        }
    }
}
