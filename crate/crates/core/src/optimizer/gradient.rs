use super::GradientModel;
use crate::array::{ArrayGeometry, CouplingModel, PairState};
use crate::channel::ChannelScene;
use crate::objective::{Objective, OpCounter};
use crate::Result;

/// `∂P_signal/∂θ_i` for pair `i` (0-based).
pub fn grad_theta(
    geom: &ArrayGeometry,
    state: &PairState,
    coupling: &CouplingModel,
    scene: &ChannelScene,
    i: usize,
    model: GradientModel,
) -> Result<f64> {
    geom.check_index(i)?;
    state.check_against(geom)?;
    let obj = Objective::new(geom, coupling, scene)?;
    let mut ops = OpCounter::default();
    let cache = obj.cache(state, &mut ops);
    Ok(obj.grad_theta_cached(&cache, i, state.theta[i], model, &mut ops))
}

/// `∂P_signal/∂y_i` for pair `i` (0-based).
pub fn grad_y(
    geom: &ArrayGeometry,
    state: &PairState,
    coupling: &CouplingModel,
    scene: &ChannelScene,
    i: usize,
) -> Result<f64> {
    geom.check_index(i)?;
    state.check_against(geom)?;
    let obj = Objective::new(geom, coupling, scene)?;
    let mut ops = OpCounter::default();
    let cache = obj.cache(state, &mut ops);
    Ok(obj.grad_y_cached(&cache, i, &mut ops))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{coupling_matrix, total_field};
    use crate::channel::Path;

    fn single(aoa: f64) -> ChannelScene {
        ChannelScene::new(vec![Path { amplitude: 1.0, aoa }], 1.0).unwrap()
    }

    #[test]
    fn broadside_path_has_no_y_gradient() {
        let geom = ArrayGeometry::reference(3);
        let c = coupling_matrix(geom.d_intra, geom.wavenumber()).unwrap();
        let state = PairState::new(vec![0.2, 1.4, 3.0], vec![0.1, -0.5, 0.7]).unwrap();
        for i in 0..3 {
            assert_eq!(grad_y(&geom, &state, &c, &single(0.0), i).unwrap(), 0.0);
        }
    }

    #[test]
    fn single_pair_single_path_is_translation_invariant() {
        let geom = ArrayGeometry::reference(1);
        let c = coupling_matrix(geom.d_intra, geom.wavenumber()).unwrap();
        for y in [-0.9, -0.2, 0.0, 0.45, 1.0] {
            let state = PairState::uniform(1, 2.1, y);
            let g = grad_y(&geom, &state, &c, &single(1.2), 0).unwrap();
            assert!(g.abs() < 1e-12, "{g}");
        }
    }

    #[test]
    fn endfire_path_has_no_steering_term() {
        let geom = ArrayGeometry::reference(1);
        let c = coupling_matrix(geom.d_intra, geom.wavenumber()).unwrap();
        let state = PairState::uniform(1, 0.9, 0.3);
        let g = grad_theta(&geom, &state, &c, &single(0.9), 0, GradientModel::FrozenCurrents).unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn models_agree() {
        let geom = ArrayGeometry::reference(2);
        let c = coupling_matrix(geom.d_intra, geom.wavenumber()).unwrap();
        let scene = ChannelScene::new(
            vec![Path { amplitude: 0.6, aoa: 0.4 }, Path { amplitude: 0.8, aoa: 2.0 }],
            1.0,
        )
        .unwrap();
        let state = PairState::new(vec![0.5, 2.5], vec![0.2, -0.3]).unwrap();
        for i in 0..2 {
            let full = grad_theta(&geom, &state, &c, &scene, i, GradientModel::Full).unwrap();
            let frozen =
                grad_theta(&geom, &state, &c, &scene, i, GradientModel::FrozenCurrents).unwrap();
            assert!((full - frozen).abs() <= 1e-12 * full.abs().max(1.0));
        }
        // quick sanity against a central difference of the definitional model
        let h = 1e-6;
        let p = |s: &PairState| total_field(&geom, s, &c, &scene).unwrap().norm_sqr();
        let (mut plus, mut minus) = (state.clone(), state.clone());
        plus.y[1] += h;
        minus.y[1] -= h;
        let fd = (p(&plus) - p(&minus)) / (2.0 * h);
        let g = grad_y(&geom, &state, &c, &scene, 1).unwrap();
        assert!((fd - g).abs() < 1e-6 * g.abs().max(1.0));
    }

    #[test]
    fn bad_index() {
        let geom = ArrayGeometry::reference(2);
        let c = coupling_matrix(geom.d_intra, geom.wavenumber()).unwrap();
        let state = PairState::uniform(2, 0.0, 0.0);
        assert!(grad_y(&geom, &state, &c, &single(1.0), 2).is_err());
    }
}
