//! Reference model written from the defining formulas, sharing no code with
//! the crate beyond plain data types.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

pub struct Model {
    pub k: f64,
    pub d: f64,
    pub d_inter: f64,
    pub power: f64,
    pub rho: f64,
}

impl Model {
    /// Half-wavelength-free reference setup: λ = 1, d = 0.2, pairs 0.5 apart, P_t = 0.5.
    pub fn reference() -> Self {
        let k = TAU;
        let d = 0.2;
        Self { k, d, d_inter: 0.5, power: 0.5, rho: (k * d).sin() / (k * d) }
    }

    /// `Re{Z0}` of a pair of thin dipoles with unit self resistance.
    pub fn resistance(&self) -> [[f64; 2]; 2] {
        [[1.0, self.rho], [self.rho, 1.0]]
    }

    pub fn positions(&self, i: usize, theta: f64, y: f64) -> [(f64, f64); 2] {
        let (cx, cy) = (i as f64 * self.d_inter, y);
        let (dx, dy) = (0.5 * self.d * theta.cos(), 0.5 * self.d * theta.sin());
        [(cx - dx, cy - dy), (cx + dx, cy + dy)]
    }

    /// Currents maximizing the endfire gain at fixed radiated power:
    /// `w ∝ R⁻¹ conj(a)`, `a` the pair-centred steering vector toward `θ`.
    /// In the pair's own frame that vector does not depend on `θ`.
    pub fn currents(&self, _theta: f64) -> [Complex64; 2] {
        let half = 0.5 * self.k * self.d;
        // Element 1 sits behind the centre along θ, element 2 ahead of it.
        let a = [Complex64::from_polar(1.0, -half), Complex64::from_polar(1.0, half)];
        let det = 1.0 - self.rho * self.rho;
        let b = [a[0].conj(), a[1].conj()];
        let w = [(b[0] - b[1] * self.rho) / det, (b[1] - b[0] * self.rho) / det];
        let scale = (self.power / self.radiated(w)).sqrt();
        [w[0] * scale, w[1] * scale]
    }

    /// `(1/2) wᴴ Re{Z0} w`.
    pub fn radiated(&self, w: [Complex64; 2]) -> f64 {
        let r = self.resistance();
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..2 {
            for n in 0..2 {
                acc += w[m].conj() * r[m][n] * w[n];
            }
        }
        0.5 * acc.re
    }

    pub fn pair_field(&self, i: usize, theta: f64, y: f64, phi: f64) -> Complex64 {
        let w = self.currents(theta);
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        self.positions(i, theta, y)
            .iter()
            .zip(w)
            .map(|(&(x, yy), wn)| Complex64::from_polar(1.0, self.k * (x * phi.cos() + yy * phi.sin())) * wn)
            .sum::<Complex64>()
            * sign
    }

    pub fn field(&self, theta: &[f64], y: &[f64], paths: &[(f64, f64)]) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..theta.len() {
            for &(amp, aoa) in paths {
                s += self.pair_field(i, theta[i], y[i], aoa) * amp;
            }
        }
        s
    }

    pub fn p_signal(&self, theta: &[f64], y: &[f64], paths: &[(f64, f64)]) -> f64 {
        self.field(theta, y, paths).norm_sqr()
    }

    pub fn snr_db(&self, theta: &[f64], y: &[f64], paths: &[(f64, f64)], noise: f64) -> f64 {
        10.0 * (self.p_signal(theta, y, paths) / (theta.len() as f64 * noise)).log10()
    }

    pub fn composite(&self, theta: &[f64], y: &[f64], phi: f64) -> Complex64 {
        (0..theta.len()).map(|i| self.pair_field(i, theta[i], y[i], phi)).sum()
    }
}

/// Smallest absolute difference between two angles, in radians.
pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Angles of the local maxima of `|f|` on a uniform grid over `[0, 2π)`
/// (circular neighbourhood, plateaus counted once).
pub fn local_maxima(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let step = TAU / n as f64;
    (0..n)
        .filter(|&j| {
            let prev = values[(j + n - 1) % n];
            let next = values[(j + 1) % n];
            values[j] > prev && values[j] >= next
        })
        .map(|j| j as f64 * step)
        .collect()
}

pub fn deg(x: f64) -> f64 {
    x * 180.0 / PI
}
