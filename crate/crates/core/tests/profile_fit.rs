// SPDX-License-Identifier: Apache-2.0

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mlrss_core::profiles::FitOptions;
use mlrss_core::scenario::Scenario;
use mlrss_core::simulator::poisson_sample;
use mlrss_core::{fit_theta, OutbreakSignature, ProfileFamily, ProfileShape, Source};

fn signature(shape: &ProfileShape, len: usize, rng: Option<&mut ChaCha8Rng>) -> OutbreakSignature {
    let start = 4i64;
    let lambdas: Vec<f64> = (0..len).map(|i| 25.0 + 4.0 * (i as f64 * 0.9).cos()).collect();
    let means: Vec<f64> = lambdas
        .iter()
        .enumerate()
        .map(|(i, l)| l + shape.delta(i as i64 + 1, start))
        .collect();
    let counts = match rng {
        None => means.iter().map(|m| m.round() as u64).collect(),
        Some(rng) => means.iter().map(|&m| poisson_sample(m, rng)).collect(),
    };
    OutbreakSignature::new(counts, lambdas, 1, start).unwrap()
}

#[test]
fn noiseless_gaussian_example_is_recovered() {
    let truth = ProfileShape::gaussian(40.0, 7.0, 8.0);
    let sig = signature(&truth, 20, None);
    let fitted = fit_theta(&sig, ProfileFamily::GaussianKernel, &FitOptions::default()).unwrap();
    let sq: f64 = sig.days().map(|d| (fitted.delta(d, 4) - truth.delta(d, 4)).powi(2)).sum();
    let rmse = (sq / sig.len() as f64).sqrt();
    assert!(rmse <= 0.05 * 40.0, "rmse {rmse}");
}

#[test]
fn fitted_likelihood_beats_the_generating_parameters() {
    let cases = [
        (ProfileFamily::LogNormalKernel, ProfileShape::lognormal(30.0, 5f64.ln(), 0.5), 26),
        (ProfileFamily::GaussianKernel, ProfileShape::gaussian(20.0, 8.0, 20.0), 24),
        (ProfileFamily::BimodalGaussian, ProfileShape::bimodal(25.0, 4.0, 13.0, 6.0), 24),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for (family, truth, len) in cases {
        for _ in 0..5 {
            let sig = signature(&truth, len, Some(&mut rng));
            let fitted = fit_theta(&sig, family, &FitOptions::default()).unwrap();
            let gain = sig.log_likelihood(&fitted) - sig.log_likelihood(&truth);
            assert!(gain >= -1e-6, "{}: fitted log-likelihood short by {}", family.tag(), -gain);
            assert_eq!(fitted.family(), family);
        }
    }
}

#[test]
fn training_scenarios_yield_full_banks() {
    for source in Source::ALL {
        let scenario = Scenario::for_source(source);
        let trained = scenario.train(17, &FitOptions::default()).unwrap();
        assert_eq!(trained.bank.len() + trained.failed_fits, 30);
        assert!(trained.failed_fits <= 1, "{source}: {} failed fits", trained.failed_fits);
        assert_eq!(trained.bank.family(), source.preset().family);
    }
}
