#[path = "common/mod.rs"]
mod common;

use flashsac::distributional::{cross_entropy, make_grid};
use flashsac::nn::checkpoint::{decode, encode, NamedTensor};
use flashsac::nn::{rmsnorm_forward, BatchNormParams, Mode, NetworkConfig, NetworkParams, NormParams};
use flashsac::policy::{sample_action, GaussianHead};
use flashsac::reward_norm::ReturnTracker;
use flashsac::trainer::{critic_pass, TrainerConfig};
use ndarray::Array2;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(-3.0f64..3.0, rows * cols).prop_map(move |v| Array2::from_shape_vec((rows, cols), v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projected_network_has_unit_rows_and_sqrt_d_gammas(seed in 0u64..1000, scale in 0.01f64..50.0) {
        let config = NetworkConfig { input_dim: 3, hidden_dim: 6, num_blocks: 2, expansion: 2, head_dim: 4, batch_norm: true };
        let mut net = NetworkParams::<f64>::init(&config, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = net.num_learnable();
        net.set_learnable(&common::normal_vec(&mut rng, n, scale)).unwrap();
        net.project_weights();
        let once = net.clone();
        net.project_weights();
        for (a, b) in once.flatten_learnable().iter().zip(net.flatten_learnable()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let weights = std::iter::once(&net.embed.weight)
            .chain(net.blocks.iter().flat_map(|b| [&b.expand.weight, &b.project.weight]))
            .chain(std::iter::once(&net.head.weight));
        for w in weights {
            for row in w.rows() {
                prop_assert!((row.dot(&row).sqrt() - 1.0).abs() < 1e-12);
            }
        }
        for b in &net.blocks {
            let g = &b.bn.as_ref().unwrap().affine.gamma;
            prop_assert!((g.dot(g).sqrt() - (g.len() as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn batch_norm_train_output_is_standardized(x in matrix(8, 3)) {
        let bn = BatchNormParams::<f64>::new(3);
        let (y, _) = bn.forward(x.view(), Mode::Train).unwrap();
        for (c, col) in y.columns().into_iter().enumerate() {
            let var_in = x.column(c).var(0.0);
            prop_assume!(var_in > 1e-2);
            let mean = col.mean().unwrap();
            prop_assert!(mean.abs() < 1e-10);
            let var = col.var(0.0);
            prop_assert!((var - var_in / (var_in + 1e-5)).abs() < 1e-9);
        }
    }

    #[test]
    fn rms_norm_rows_have_norm_sqrt_d(x in matrix(5, 7)) {
        let y = rmsnorm_forward(x.view(), &NormParams::<f64>::new(7)).unwrap();
        for (row_in, row) in x.rows().into_iter().zip(y.rows()) {
            prop_assume!(row_in.dot(&row_in) > 1e-2);
            prop_assert!((row.dot(&row).sqrt() - 7f64.sqrt()).abs() < 1e-4);
        }
    }

    #[test]
    fn sampled_actions_stay_inside_the_box(mean in matrix(6, 2), log_std in matrix(6, 2), eps in matrix(6, 2)) {
        let head = GaussianHead::new(mean * 4.0, log_std);
        let s = sample_action(&head, eps.view()).unwrap();
        prop_assert!(s.action.iter().all(|a| a.abs() < 1.0));
        prop_assert!(s.log_prob.iter().all(|l| l.is_finite()));
    }

    #[test]
    fn cross_entropy_is_bounded_below_by_target_entropy(logits in matrix(3, 5), raw in matrix(3, 5)) {
        let target = raw.mapv(f64::exp);
        let sums = target.sum_axis(ndarray::Axis(1));
        let target = &target / &sums.insert_axis(ndarray::Axis(1));
        let (loss, _) = cross_entropy(logits.view(), target.view()).unwrap();
        let entropy: f64 = -target.iter().map(|p| p * p.ln()).sum::<f64>() / 3.0;
        prop_assert!(loss >= entropy - 1e-12);
    }

    #[test]
    fn checkpoint_bytes_round_trip(values in prop::collection::vec(-1e6f64..1e6, 0..40), name in "[a-z.]{1,12}") {
        let n = values.len();
        let tensors = vec![
            NamedTensor::new(name.clone(), vec![n], values),
            NamedTensor::scalar("meta.x", -0.0),
        ];
        prop_assert_eq!(decode(&encode(&tensors)).unwrap(), tensors);
    }

    #[test]
    fn scaling_rewards_does_not_change_critic_targets(seed in 0u64..200, factor in 1.0f64..1000.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let config = TrainerConfig { batch_size: 6, ..common::tiny_config(seed) };
        let agent = common::random_agent(&config, 3, 1, &mut rng);
        let batch = common::random_batch(&mut rng, 6, 3, 1);
        let mut scaled_batch = batch.clone();
        scaled_batch.rewards.mapv_inplace(|r| r * factor);
        let mut t1 = ReturnTracker::new(0.99, 2, config.g_max);
        let mut t2 = t1.clone();
        for r in common::normal_vec(&mut rng, 400, 1.0).chunks(2) {
            t1.update(r, &[false, false], &[false, true]);
            t2.update(&[r[0] * factor, r[1] * factor], &[false, false], &[false, true]);
        }
        let eps = common::normal(&mut rng, 6, 1, 1.0);
        let a = critic_pass(&agent, &batch, &t1, eps.view()).unwrap();
        let b = critic_pass(&agent, &scaled_batch, &t2, eps.view()).unwrap();
        for (x, y) in a.target.iter().zip(b.target.iter()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }
}

#[test]
fn grid_mean_of_one_hot_is_the_atom() {
    let grid = make_grid::<f64>(-5.0, 5.0, 101).unwrap();
    let mut p = Array2::zeros((1, 101));
    p[[0, 37]] = 1.0;
    assert!((grid.mean(p.view())[0] - grid.atoms[37]).abs() < 1e-12);
}
