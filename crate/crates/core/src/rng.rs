//! Deterministic counter-addressable random streams for the simulation
//! harness.
//!
//! `TrialRng::stream(master_seed, trial_index)` expands
//! `mix64(master_seed ^ trial_index * 0x9E3779B97F4A7C15)` through SplitMix64
//! into the 256-bit state of a xoshiro256++ generator. Any trial's stream can
//! be reconstructed independently on any worker, so parallel runs merge into
//! bit-identical reports regardless of thread count or scheduling.
//!
//! Gaussians use Box-Muller with both branches consumed (the sine branch is
//! cached and returned on the next call), so the draw count per trial is
//! well-defined.

const GOLDEN: u64 = 0x9E3779B97F4A7C15;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct TrialRng {
    s: [u64; 4],
    spare_gaussian: Option<f64>,
}

impl TrialRng {
    pub fn stream(master_seed: u64, trial_index: u64) -> Self {
        let mut sm = mix64(master_seed ^ trial_index.wrapping_mul(GOLDEN));
        let mut s = [0u64; 4];
        for slot in &mut s {
            sm = sm.wrapping_add(GOLDEN);
            *slot = mix64(sm);
        }
        if s == [0; 4] {
            // xoshiro forbids the all-zero state; unreachable for mix64 of
            // four distinct counters, but cheap to guard
            s[0] = 1;
        }
        TrialRng { s, spare_gaussian: None }
    }

    /// xoshiro256++ step.
    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[0].wrapping_add(self.s[3]).rotate_left(23).wrapping_add(self.s[0]);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform on (0, 1]: 53-bit mantissa, shifted so 0 is excluded (safe to
    /// take logs of).
    pub fn uniform_open(&mut self) -> f64 {
        (((self.next_u64() >> 11) + 1) as f64) * (1.0 / 9007199254740992.0)
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64) * (1.0 / 9007199254740992.0)
    }

    /// Standard normal via Box-Muller; both branches of each (u1, u2) pair
    /// are used.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(g) = self.spare_gaussian.take() {
            return g;
        }
        let u1 = self.uniform_open();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_gaussian = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Rademacher sign from the top bit.
    pub fn sign(&mut self) -> f64 {
        if self.next_u64() >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Weibull(scale, shape) via inverse transform.
    pub fn weibull(&mut self, scale: f64, shape: f64) -> f64 {
        // 1 - uniform() is in (0, 1]
        let u = 1.0 - self.uniform();
        scale * (-u.ln()).powf(1.0 / shape)
    }

    /// Uniform direction on the unit sphere of R^m.
    pub fn unit_vector(&mut self, m: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..m).map(|_| self.gaussian()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-8 {
                return v.into_iter().map(|x| x / norm).collect();
            }
            // astronomically unlikely; redraw keeps the stream deterministic
        }
    }
}
