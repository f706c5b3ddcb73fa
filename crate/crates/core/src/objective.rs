//! The received-power objective shared by every optimizer.
//!
//! [`Objective`] precomputes the path directions of a scene and evaluates
//! `P_signal = |S_total|²` and its analytic gradients. The particle swarm and
//! the alternating optimizer both score states through [`Objective::p_signal`].

use num_complex::Complex64;

use crate::array::{
    half_offset, optimal_currents, optimal_currents_derivative, ArrayGeometry, ComplexPair,
    CouplingModel, PairState, SnrReport,
};
use crate::channel::ChannelScene;
use crate::optimizer::GradientModel;
use crate::Result;

/// Counts path-term evaluations (one per `(pair, path)` combination touched).
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct OpCounter(pub u64);

impl OpCounter {
    pub fn add(&mut self, n: usize) {
        self.0 += n as u64;
    }
}

/// Partial derivatives of `P_signal` for every pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub theta: Vec<f64>,
    pub y: Vec<f64>,
    pub p_signal: f64,
}

#[derive(Debug, Clone)]
pub struct Objective {
    geom: ArrayGeometry,
    scene: ChannelScene,
    coupling: CouplingModel,
    k: f64,
    amps: Vec<f64>,
    cos_phi: Vec<f64>,
    sin_phi: Vec<f64>,
}

impl Objective {
    pub fn new(geom: &ArrayGeometry, coupling: &CouplingModel, scene: &ChannelScene) -> Result<Self> {
        geom.validate()?;
        scene.validate()?;
        let k = geom.wavenumber();
        // Fails early if the coupling cannot produce currents.
        optimal_currents(0.0, coupling, geom.pair_power, geom.d_intra, k)?;
        Ok(Self {
            geom: geom.clone(),
            scene: scene.clone(),
            coupling: coupling.clone(),
            k,
            amps: scene.paths.iter().map(|p| p.amplitude).collect(),
            cos_phi: scene.paths.iter().map(|p| p.aoa.cos()).collect(),
            sin_phi: scene.paths.iter().map(|p| p.aoa.sin()).collect(),
        })
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geom
    }

    pub fn scene(&self) -> &ChannelScene {
        &self.scene
    }

    pub fn coupling(&self) -> &CouplingModel {
        &self.coupling
    }

    pub fn num_paths(&self) -> usize {
        self.amps.len()
    }

    /// Feed-signed excitation of a pair at rotation `theta`.
    fn currents(&self, i: usize, theta: f64) -> ComplexPair {
        let w = optimal_currents(theta, &self.coupling, self.geom.pair_power, self.geom.d_intra, self.k)
            .expect("coupling validated at construction");
        let s = self.geom.feed_sign(i);
        [w[0] * s, w[1] * s]
    }

    fn currents_derivative(&self, i: usize, theta: f64) -> ComplexPair {
        let w = optimal_currents_derivative(
            theta,
            &self.coupling,
            self.geom.pair_power,
            self.geom.d_intra,
            self.k,
        )
        .expect("coupling validated at construction");
        let s = self.geom.feed_sign(i);
        [w[0] * s, w[1] * s]
    }

    /// Element phasors `exp(j k r_in·u(φ_l))` of pair `i` for path `l`.
    #[inline]
    fn phasors(&self, i: usize, theta: f64, y: f64, l: usize) -> (Complex64, Complex64) {
        let dr = half_offset(theta, self.geom.d_intra);
        let cx = self.geom.center_x(i);
        let (c, s) = (self.cos_phi[l], self.sin_phi[l]);
        let centre = cx * c + y * s;
        let offset = dr.x * c + dr.y * s;
        (
            Complex64::cis(self.k * (centre - offset)),
            Complex64::cis(self.k * (centre + offset)),
        )
    }

    /// `Σ_l A_l F_i(φ_l)` for pair `i` at `(theta, y)`.
    pub fn pair_field(&self, i: usize, theta: f64, y: f64) -> Complex64 {
        let w = self.currents(i, theta);
        (0..self.num_paths())
            .map(|l| {
                let (e1, e2) = self.phasors(i, theta, y, l);
                (e1 * w[0] + e2 * w[1]) * self.amps[l]
            })
            .sum()
    }

    pub fn total_field(&self, state: &PairState) -> Complex64 {
        (0..self.geom.num_pairs)
            .map(|i| self.pair_field(i, state.theta[i], state.y[i]))
            .sum()
    }

    /// `P_signal = |S_total|²`.
    pub fn p_signal(&self, state: &PairState) -> f64 {
        self.total_field(state).norm_sqr()
    }

    pub fn snr_from_power(&self, p_signal: f64) -> f64 {
        p_signal / (self.geom.num_pairs as f64 * self.scene.noise_power)
    }

    pub fn snr(&self, state: &PairState) -> SnrReport {
        SnrReport::from_linear(self.snr_from_power(self.p_signal(state)))
    }

    /// All `2M` partial derivatives in `O(M·L)`.
    pub fn gradient(&self, state: &PairState, model: GradientModel, ops: &mut OpCounter) -> Gradient {
        let cache = self.cache(state, ops);
        let m = self.geom.num_pairs;
        let theta = (0..m)
            .map(|i| self.grad_theta_cached(&cache, i, state.theta[i], model, ops))
            .collect();
        let y = (0..m).map(|i| self.grad_y_cached(&cache, i, ops)).collect();
        Gradient {
            theta,
            y,
            p_signal: cache.p_signal(),
        }
    }

    pub(crate) fn cache(&self, state: &PairState, ops: &mut OpCounter) -> FieldCache {
        let m = self.geom.num_pairs;
        let l = self.num_paths();
        let mut cache = FieldCache {
            paths: l,
            e1: vec![Complex64::new(0.0, 0.0); m * l],
            e2: vec![Complex64::new(0.0, 0.0); m * l],
            currents: vec![[Complex64::new(0.0, 0.0); 2]; m],
            pair_sum: vec![Complex64::new(0.0, 0.0); m],
            total: Complex64::new(0.0, 0.0),
        };
        for i in 0..m {
            self.refresh_pair(&mut cache, i, state.theta[i], state.y[i], ops);
        }
        cache.resync();
        cache
    }

    /// Recomputes pair `i` after a change of its rotation or offset.
    pub(crate) fn refresh_pair(
        &self,
        cache: &mut FieldCache,
        i: usize,
        theta: f64,
        y: f64,
        ops: &mut OpCounter,
    ) {
        let w = self.currents(i, theta);
        let base = i * cache.paths;
        let mut sum = Complex64::new(0.0, 0.0);
        for l in 0..cache.paths {
            let (e1, e2) = self.phasors(i, theta, y, l);
            cache.e1[base + l] = e1;
            cache.e2[base + l] = e2;
            sum += (e1 * w[0] + e2 * w[1]) * self.amps[l];
        }
        ops.add(cache.paths);
        cache.currents[i] = w;
        cache.total += sum - cache.pair_sum[i];
        cache.pair_sum[i] = sum;
    }

    /// Pair `i` moved by `dy` along `y`: every path phasor rotates by `e^{jk·dy·sin φ_l}`.
    pub(crate) fn shift_pair(&self, cache: &mut FieldCache, i: usize, dy: f64, ops: &mut OpCounter) {
        let w = cache.currents[i];
        let base = i * cache.paths;
        let mut sum = Complex64::new(0.0, 0.0);
        for l in 0..cache.paths {
            let rot = Complex64::cis(self.k * dy * self.sin_phi[l]);
            let e1 = cache.e1[base + l] * rot;
            let e2 = cache.e2[base + l] * rot;
            cache.e1[base + l] = e1;
            cache.e2[base + l] = e2;
            sum += (e1 * w[0] + e2 * w[1]) * self.amps[l];
        }
        ops.add(cache.paths);
        cache.total += sum - cache.pair_sum[i];
        cache.pair_sum[i] = sum;
    }

    /// `∂P/∂θ_i = 2 Re{(∂S/∂θ_i) S*}` using the cached phasors.
    pub(crate) fn grad_theta_cached(
        &self,
        cache: &FieldCache,
        i: usize,
        theta: f64,
        model: GradientModel,
        ops: &mut OpCounter,
    ) -> f64 {
        let w = cache.currents[i];
        let dw = match model {
            GradientModel::Full => self.currents_derivative(i, theta),
            GradientModel::FrozenCurrents => [Complex64::new(0.0, 0.0); 2],
        };
        let (sin_t, cos_t) = theta.sin_cos();
        let half_kd = 0.5 * self.k * self.geom.d_intra;
        let base = i * cache.paths;
        let mut ds = Complex64::new(0.0, 0.0);
        for l in 0..cache.paths {
            let (e1, e2) = (cache.e1[base + l], cache.e2[base + l]);
            // sin(φ_l − θ_i)
            let sin_rel = self.sin_phi[l] * cos_t - self.cos_phi[l] * sin_t;
            let scale = Complex64::new(0.0, half_kd * sin_rel);
            let da = (e2 * w[1] - e1 * w[0]) * scale;
            ds += (da + e1 * dw[0] + e2 * dw[1]) * self.amps[l];
        }
        ops.add(cache.paths);
        2.0 * (ds * cache.total.conj()).re
    }

    /// `∂P/∂y_i = −2k Σ_l A_l sin φ_l Im{F_i(φ_l) S*}`.
    pub(crate) fn grad_y_cached(&self, cache: &FieldCache, i: usize, ops: &mut OpCounter) -> f64 {
        let w = cache.currents[i];
        let base = i * cache.paths;
        let s_conj = cache.total.conj();
        let mut acc = 0.0;
        for l in 0..cache.paths {
            let f = cache.e1[base + l] * w[0] + cache.e2[base + l] * w[1];
            acc += self.amps[l] * self.sin_phi[l] * (f * s_conj).im;
        }
        ops.add(cache.paths);
        -2.0 * self.k * acc
    }
}

/// Per-pair path phasors and partial sums behind incremental updates.
#[derive(Debug, Clone)]
pub(crate) struct FieldCache {
    paths: usize,
    e1: Vec<Complex64>,
    e2: Vec<Complex64>,
    currents: Vec<ComplexPair>,
    pair_sum: Vec<Complex64>,
    total: Complex64,
}

impl FieldCache {
    /// Rebuilds the running total from the pair sums to shed accumulated rounding.
    pub(crate) fn resync(&mut self) {
        self.total = self.pair_sum.iter().sum();
    }

    pub(crate) fn p_signal(&self) -> f64 {
        self.total.norm_sqr()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{coupling_matrix, total_field};
    use crate::channel::{generate_scene, SceneSpec};
    use approx::assert_relative_eq;

    fn setup(m: usize, l: usize, seed: u64) -> (Objective, PairState) {
        let geom = ArrayGeometry::reference(m);
        let coupling = coupling_matrix(geom.d_intra, geom.wavenumber()).unwrap();
        let scene = generate_scene(&SceneSpec::new(l), seed).unwrap();
        let theta = (0..m).map(|i| 0.4 + 0.9 * i as f64).collect();
        let y = (0..m).map(|i| -0.8 + 0.3 * i as f64).collect();
        (
            Objective::new(&geom, &coupling, &scene).unwrap(),
            PairState::new(theta, y).unwrap(),
        )
    }

    #[test]
    fn agrees_with_definitional_model() {
        for seed in 0..10 {
            let (obj, state) = setup(5, 4, seed);
            let want = total_field(obj.geometry(), &state, obj.coupling(), obj.scene()).unwrap();
            let got = obj.total_field(&state);
            assert!((want - got).norm() < 1e-12);
        }
    }

    #[test]
    fn incremental_updates_track_direct_evaluation() {
        let (obj, mut state) = setup(6, 5, 3);
        let mut ops = OpCounter::default();
        let mut cache = obj.cache(&state, &mut ops);
        state.theta[2] += 0.7;
        obj.refresh_pair(&mut cache, 2, state.theta[2], state.y[2], &mut ops);
        state.y[4] += 0.33;
        obj.shift_pair(&mut cache, 4, 0.33, &mut ops);
        assert_relative_eq!(cache.p_signal(), obj.p_signal(&state), max_relative = 1e-12);
    }

    #[test]
    fn gradient_work_is_linear_in_paths() {
        let (a, sa) = setup(4, 3, 1);
        let (b, sb) = setup(4, 6, 1);
        let (mut ca, mut cb) = (OpCounter::default(), OpCounter::default());
        a.gradient(&sa, GradientModel::Full, &mut ca);
        b.gradient(&sb, GradientModel::Full, &mut cb);
        assert_eq!(cb.0, 2 * ca.0);
    }
}
