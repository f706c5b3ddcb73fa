//! Intra-pair mutual coupling and superdirective excitation.

use num_complex::Complex64;

use super::geometry::{relative_steering, ComplexPair};
use crate::{MspError, Result};

/// Determinant magnitude below which a 2×2 resistance matrix is treated as singular.
pub const DET_THRESHOLD: f64 = 1e-12;

/// Mutual-impedance matrix of one pair and the inverse of its real part.
///
/// Pairs are far enough apart that the array matrix is block diagonal with
/// this block repeated, so a single model serves every pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingModel {
    z0: [[Complex64; 2]; 2],
    r_inv: [[f64; 2]; 2],
}

impl CouplingModel {
    /// Builds the symmetric matrix `[[Z_self, Z_mutual], [Z_mutual, Z_self]]`.
    pub fn from_impedances(z_self: Complex64, z_mutual: Complex64) -> Result<Self> {
        let (a, b) = (z_self.re, z_mutual.re);
        if !(a.is_finite() && b.is_finite()) {
            return Err(MspError::CouplingDegenerate(
                "non-finite resistance".into(),
            ));
        }
        let det = a * a - b * b;
        if a <= 0.0 || det <= DET_THRESHOLD {
            return Err(MspError::CouplingDegenerate(format!(
                "Re{{Z0}} = [[{a}, {b}], [{b}, {a}]] is not positive definite (det = {det:e})"
            )));
        }
        let r_inv = [[a / det, -b / det], [-b / det, a / det]];
        Ok(Self {
            z0: [[z_self, z_mutual], [z_mutual, z_self]],
            r_inv,
        })
    }

    pub fn z0(&self) -> &[[Complex64; 2]; 2] {
        &self.z0
    }

    pub fn resistance(&self) -> [[f64; 2]; 2] {
        [
            [self.z0[0][0].re, self.z0[0][1].re],
            [self.z0[1][0].re, self.z0[1][1].re],
        ]
    }

    /// `(Re{Z0})⁻¹`, cached at construction.
    pub fn r_inv(&self) -> &[[f64; 2]; 2] {
        &self.r_inv
    }

    /// Normalized mutual resistance `R_mutual / R_self`.
    pub fn rho(&self) -> f64 {
        self.z0[0][1].re / self.z0[0][0].re
    }

    /// `R⁻¹ v` for a complex vector.
    pub fn apply_r_inv(&self, v: ComplexPair) -> ComplexPair {
        let r = &self.r_inv;
        [
            v[0] * r[0][0] + v[1] * r[0][1],
            v[0] * r[1][0] + v[1] * r[1][1],
        ]
    }

    /// Hermitian form `vᴴ R⁻¹ v` (real because `R⁻¹` is real symmetric).
    pub fn quad_r_inv(&self, v: ComplexPair) -> f64 {
        hermitian_form(&self.r_inv, v)
    }

    /// Radiated power `½ iᴴ Re{Z0} i` of an excitation.
    pub fn radiated_power(&self, currents: ComplexPair) -> f64 {
        0.5 * hermitian_form(&self.resistance(), currents)
    }
}

fn hermitian_form(m: &[[f64; 2]; 2], v: ComplexPair) -> f64 {
    let mut acc = 0.0;
    for (r, row) in m.iter().enumerate() {
        for (c, &entry) in row.iter().enumerate() {
            acc += entry * (v[r].conj() * v[c]).re;
        }
    }
    acc
}

/// Coupling between two isotropic elements spaced `d_intra` apart:
/// `Re{Z0} = [[1, ρ], [ρ, 1]]` with `ρ = sin(kd)/(kd)`. Reactances are zero.
pub fn coupling_matrix(d_intra: f64, k: f64) -> Result<CouplingModel> {
    if !(d_intra.is_finite() && d_intra > 0.0) {
        return Err(MspError::Geometry(format!(
            "d_intra must be positive, got {d_intra}"
        )));
    }
    let kd = k * d_intra;
    let rho = kd.sin() / kd;
    if rho.abs() >= 1.0 {
        return Err(MspError::CouplingDegenerate(format!(
            "|rho| = {} at d_intra = {d_intra}",
            rho.abs()
        )));
    }
    CouplingModel::from_impedances(Complex64::new(1.0, 0.0), Complex64::new(rho, 0.0))
}

/// Endfire-optimal excitation of a pair rotated by `theta`:
/// `c · R⁻¹ · conj(ã(θ;θ))` scaled so the pair radiates exactly `pair_power`.
pub fn optimal_currents(
    theta: f64,
    coupling: &CouplingModel,
    pair_power: f64,
    d_intra: f64,
    k: f64,
) -> Result<ComplexPair> {
    let a = relative_steering(theta, theta, d_intra, k);
    let q = coupling.quad_r_inv(a);
    if !(q.is_finite() && q > 0.0) {
        return Err(MspError::CouplingDegenerate(format!(
            "quadratic form ãᴴR⁻¹ã = {q} is not positive"
        )));
    }
    let c = (2.0 * pair_power / q).sqrt();
    let w = coupling.apply_r_inv([a[0].conj(), a[1].conj()]);
    Ok([w[0] * c, w[1] * c])
}

/// Derivative of [`optimal_currents`] with respect to the rotation angle.
///
/// Both the normalizer and `ã(θ;θ)` enter; since `Δr(θ)·u(θ) = d/2` for every
/// `θ`, the result is zero up to rounding.
pub fn optimal_currents_derivative(
    theta: f64,
    coupling: &CouplingModel,
    pair_power: f64,
    d_intra: f64,
    k: f64,
) -> Result<ComplexPair> {
    let a = relative_steering(theta, theta, d_intra, k);
    let q = coupling.quad_r_inv(a);
    if !(q.is_finite() && q > 0.0) {
        return Err(MspError::CouplingDegenerate(format!(
            "quadratic form ãᴴR⁻¹ã = {q} is not positive"
        )));
    }
    // d/dθ [Δr(θ)·u(θ)] with both factors varying.
    let (s, c) = theta.sin_cos();
    let half = 0.5 * d_intra;
    let dproj = half * (-s * c + c * s) + half * (c * -s + s * c);
    let j = Complex64::new(0.0, 1.0);
    let da = [-(a[0] * j * k * dproj), a[1] * j * k * dproj];

    // q = ãᴴR⁻¹ã, dq = 2 Re{ãᴴ R⁻¹ dã}
    let r_inv_da = coupling.apply_r_inv(da);
    let dq = 2.0 * (a[0].conj() * r_inv_da[0] + a[1].conj() * r_inv_da[1]).re;
    let norm = (2.0 * pair_power / q).sqrt();
    let dnorm = -0.5 * norm / q * dq;

    let w = coupling.apply_r_inv([a[0].conj(), a[1].conj()]);
    let dw = coupling.apply_r_inv([da[0].conj(), da[1].conj()]);
    Ok([w[0] * dnorm + dw[0] * norm, w[1] * dnorm + dw[1] * norm])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn sinc_coupling_at_reference_spacing() {
        let m = coupling_matrix(0.2, TAU).unwrap();
        // sin(0.4π)/(0.4π)
        assert_abs_diff_eq!(m.rho(), 0.756_826_728_640_657, epsilon = 1e-12);
        let r = m.resistance();
        let ri = m.r_inv();
        for i in 0..2 {
            for j in 0..2 {
                let prod: f64 = (0..2).map(|k| ri[i][k] * r[k][j]).sum();
                assert_abs_diff_eq!(prod, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-12);
            }
        }
        assert_eq!(m.z0()[0][1], m.z0()[1][0]);
    }

    #[test]
    fn half_wavelength_is_uncoupled() {
        let m = coupling_matrix(0.5, TAU).unwrap();
        assert_abs_diff_eq!(m.rho(), 0.0, epsilon = 1e-15);
        let far = coupling_matrix(50.25, TAU).unwrap();
        assert!(far.rho().abs() < 0.01);
    }

    #[test]
    fn degenerate_coupling_rejected() {
        assert!(matches!(
            CouplingModel::from_impedances(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)),
            Err(MspError::CouplingDegenerate(_))
        ));
        // kd → 0 drives rho → 1
        assert!(coupling_matrix(1e-9, TAU).is_err());
        assert!(coupling_matrix(0.0, TAU).is_err());
    }

    #[test]
    fn uncoupled_currents_are_conjugate_steering() {
        let m = coupling_matrix(0.5, TAU).unwrap();
        let theta = 0.9;
        let i = optimal_currents(theta, &m, 0.5, 0.5, TAU).unwrap();
        let a = relative_steering(theta, theta, 0.5, TAU);
        for n in 0..2 {
            let want = a[n].conj() * 0.5f64.sqrt();
            assert_abs_diff_eq!((i[n] - want).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn currents_match_direct_solve() {
        // Oracle: solve Re{Z0} x = conj(ã) by Cramer's rule, then scale by power.
        let m = coupling_matrix(0.2, TAU).unwrap();
        let rho = (0.4 * PI).sin() / (0.4 * PI);
        let b = [Complex64::cis(0.2 * PI), Complex64::cis(-0.2 * PI)];
        let det = 1.0 - rho * rho;
        let x = [(b[0] - b[1] * rho) / det, (b[1] - b[0] * rho) / det];
        let power = 0.5 * ((x[0].conj() * (x[0] + x[1] * rho)).re
            + (x[1].conj() * (x[0] * rho + x[1])).re);
        let scale = (0.5 / power).sqrt();
        let i = optimal_currents(0.0, &m, 0.5, 0.2, TAU).unwrap();
        for n in 0..2 {
            assert_abs_diff_eq!((i[n] - x[n] * scale).norm(), 0.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(m.radiated_power(i), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn currents_do_not_depend_on_rotation() {
        let m = coupling_matrix(0.2, TAU).unwrap();
        let i0 = optimal_currents(0.0, &m, 0.5, 0.2, TAU).unwrap();
        for theta in [0.3, 1.7, 4.0, 6.1] {
            let i = optimal_currents(theta, &m, 0.5, 0.2, TAU).unwrap();
            for n in 0..2 {
                assert_abs_diff_eq!((i[n] - i0[n]).norm(), 0.0, epsilon = 1e-14);
            }
            let di = optimal_currents_derivative(theta, &m, 0.5, 0.2, TAU).unwrap();
            assert!(di[0].norm() < 1e-14 && di[1].norm() < 1e-14);
        }
    }
}
