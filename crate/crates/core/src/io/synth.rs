use std::f64::consts::PI;

use ndarray::Array2;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SignalMatrix;
use crate::error::{Error, Result};

/// Random sinusoids `X_{l,k} = d_k·sin(f_k·l + φ_k)`, `l = 1..M`, with
/// `d_k ~ N(0, amp_std²)`, `f_k ~ U[freq_center ± freq_halfwidth]`,
/// `φ_k ~ U[phase_range]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub amp_std: f64,
    pub freq_center: f64,
    pub freq_halfwidth: f64,
    pub phase_range: (f64, f64),
}

impl SynthConfig {
    pub fn new(n: usize, m: usize, seed: u64) -> Self {
        Self {
            n,
            m,
            seed,
            amp_std: 1.0,
            freq_center: 2.0 * PI / n.max(1) as f64,
            freq_halfwidth: 0.05,
            phase_range: (-PI, PI),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::InvalidArgument(format!(
                "need at least one node and one sample, got n = {}, m = {}",
                self.n, self.m
            )));
        }
        let finite = [
            self.amp_std,
            self.freq_center,
            self.freq_halfwidth,
            self.phase_range.0,
            self.phase_range.1,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite || self.amp_std < 0.0 || self.freq_halfwidth < 0.0 {
            return Err(Error::InvalidArgument(
                "synthesis parameters must be finite with nonnegative spreads".into(),
            ));
        }
        if self.phase_range.0 > self.phase_range.1 {
            return Err(Error::InvalidArgument("phase range is reversed".into()));
        }
        Ok(())
    }
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self::new(50, 50, 0)
    }
}

/// ChaCha8 stream with 53-bit uniforms and Box–Muller normals (one normal per
/// pair of uniforms, the sine partner is discarded).
struct Sampler(ChaCha8Rng);

impl Sampler {
    fn uniform01(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform01()
    }

    fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform01();
        let u2 = self.uniform01();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }
}

/// Per node, `d_k`, `f_k`, `φ_k` are drawn in that order.
pub fn gen_sinusoids(c: &SynthConfig) -> Result<SignalMatrix> {
    c.validate()?;
    let mut rng = Sampler(ChaCha8Rng::seed_from_u64(c.seed));
    let params: Vec<(f64, f64, f64)> = (0..c.n)
        .map(|_| {
            let d = c.amp_std * rng.normal();
            let f = rng.uniform(
                c.freq_center - c.freq_halfwidth,
                c.freq_center + c.freq_halfwidth,
            );
            let phi = rng.uniform(c.phase_range.0, c.phase_range.1);
            (d, f, phi)
        })
        .collect();
    let x = Array2::from_shape_fn((c.m, c.n), |(row, k)| {
        let (d, f, phi) = params[k];
        d * (f * (row + 1) as f64 + phi).sin()
    });
    SignalMatrix::new(x, None)
}
