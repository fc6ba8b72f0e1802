//! Distributional checks on payload domain randomization.

use dockrl_core::envdock::{sample_payload, DomainRandomization, OffsetSampling};
use dockrl_core::ChaCha8Rng;
use rand::SeedableRng;

#[test]
fn large_dr_draws_pass_distribution_oracles() {
    let dr = DomainRandomization {
        enabled: true,
        mass_upper: 5.0,
        spawn_radius: 0.3,
        sampling: OffsetSampling::Surface,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 100_000usize;
    let mut mass_sum = 0.0;
    let mut octants = [0usize; 8];
    for _ in 0..n {
        let p = sample_payload(&mut rng, &dr);
        assert!((0.0..=5.0).contains(&p.mass), "mass {}", p.mass);
        assert!(
            (p.offset.norm() - 0.3).abs() < 1e-9,
            "offset radius {}",
            p.offset.norm()
        );
        mass_sum += p.mass;
        let idx = usize::from(p.offset.x > 0.0)
            | (usize::from(p.offset.y > 0.0) << 1)
            | (usize::from(p.offset.z > 0.0) << 2);
        octants[idx] += 1;
    }

    // Uniform(0, 5): mean 2.5, sd 5/sqrt(12); 3 standard errors of the mean.
    let mean = mass_sum / n as f64;
    let se = 5.0 / (12.0f64).sqrt() / (n as f64).sqrt();
    assert!(
        (mean - 2.5).abs() < 3.0 * se,
        "mass mean {mean} outside 2.5 +/- {}",
        3.0 * se
    );

    // Chi-square uniformity over octants, df = 7, alpha = 0.001.
    let expected = n as f64 / 8.0;
    let chi2: f64 = octants
        .iter()
        .map(|o| {
            let d = *o as f64 - expected;
            d * d / expected
        })
        .sum();
    assert!(chi2 < 24.321886347856854, "chi-square {chi2}, octants {octants:?}");
}
