use flarebench::synth::{sample_params, SynthConfig};

#[test]
fn gamma_draws_are_centered() {
    let config = SynthConfig::default();
    let n = 10_000;
    let mean = (0..n)
        .map(|i| sample_params(&config, i, 8, 8).theta_background)
        .sum::<f64>()
        / n as f64;
    assert!((mean - 2.0).abs() < 0.01, "mean gamma {mean}");
}

#[test]
fn light_source_counts_follow_weights() {
    let config = SynthConfig::default();
    let mut counts = [0usize; 3];
    for i in 0..1600 {
        counts[sample_params(&config, i, 8, 8).flares.len() - 1] += 1;
    }
    let expected = [1100.0, 400.0, 100.0];
    for (k, (&got, &want)) in counts.iter().zip(&expected).enumerate() {
        let p: f64 = want / 1600.0;
        let sd = (1600.0 * p * (1.0 - p)).sqrt();
        assert!((got as f64 - want).abs() <= 3.0 * sd, "{} flares: {got} vs {want}", k + 1);
    }
}

#[test]
fn offsets_and_kernels_in_range() {
    let config = SynthConfig::default();
    for i in 0..500 {
        let s = sample_params(&config, i, 40, 100);
        for f in &s.flares {
            assert!(f.dx.abs() <= 30 && f.dy.abs() <= 12);
            assert!(f.kernel_size % 2 == 1 && (5..=21).contains(&f.kernel_size));
            assert!((0.8..=1.0).contains(&f.gain));
            assert!((1.8..=2.2).contains(&f.theta));
            assert!(f.tint.iter().cloned().fold(0.0f32, f32::max) == 1.0);
        }
    }
}
