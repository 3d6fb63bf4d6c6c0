//! Seeded, splittable random streams and the basic Gaussian draws built on them.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::matrix::{Matrix, Vector};

/// A reproducible random stream identified by `(seed, stream)`.
///
/// Two streams built from the same pair produce bit-identical draws. Child
/// streams are a pure function of the parent's identity and the child index,
/// so spawning never depends on how much of the parent has been consumed.
#[derive(Debug, Clone)]
pub struct RngStream {
    id: StreamId,
    inner: ChaCha8Rng,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamId {
    pub seed: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        RngStream { id: StreamId { seed, stream }, inner }
    }

    pub fn id(&self) -> StreamId {
        self.id
    }

    /// Independent child stream number `index`.
    pub fn spawn(&self, index: u64) -> RngStream {
        let child = splitmix64(self.id.stream ^ splitmix64(index.wrapping_add(1)));
        RngStream::new(splitmix64(self.id.seed.wrapping_add(child)), child)
    }

    pub fn normal(&mut self) -> f64 {
        self.sample(StandardNormal)
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn open01(&mut self) -> f64 {
        loop {
            let u: f64 = self.random();
            if u > 0.0 {
                return u;
            }
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

pub fn gaussian_vector(n: usize, rng: &mut RngStream) -> Vector {
    Vector::from_fn(n, |_, _| rng.normal())
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut RngStream) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.normal())
}

/// Uniform point on the unit sphere `S^{n−1}`.
pub fn uniform_sphere(n: usize, rng: &mut RngStream) -> Vector {
    loop {
        let g = gaussian_vector(n, rng);
        let norm = g.norm();
        if norm > 1e-300 {
            return g / norm;
        }
    }
}

/// Brownian increment over a step `dt`: `N(0, dt·Id)`.
pub fn brownian_increment(n: usize, dt: f64, rng: &mut RngStream) -> Vector {
    assert!(dt > 0.0, "brownian increment needs dt > 0");
    gaussian_vector(n, rng) * dt.sqrt()
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// columns of `Q` re-signed so that `diag(R) > 0`.
pub fn haar_orthogonal(n: usize, rng: &mut RngStream) -> Matrix {
    assert!(n >= 1, "haar_orthogonal requires n >= 1");
    let g = gaussian_matrix(n, n, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}
