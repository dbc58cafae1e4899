//! Sampling checks of the simulator against closed-form moments.

use bsc_thermo::sim::{generate_dataset, sample_markov};
use bsc_thermo::spin::all_words;
use bsc_thermo::transfer::brute_force_cylinder;
use bsc_thermo::{ChannelParams, Spin};

const N: usize = 1_000_000;

fn params() -> ChannelParams {
    ChannelParams::new(0.2, 0.1).unwrap()
}

fn within(observed: f64, expected: f64, sigma: f64) -> bool {
    (observed - expected).abs() <= 4.0 * sigma
}

#[test]
fn flip_and_noise_rates() {
    let path = generate_dataset(&params(), N, 11).unwrap();
    let flips = path.x.windows(2).filter(|w| w[0] != w[1]).count() as f64 / (N - 1) as f64;
    let sigma = (0.2 * 0.8 / (N - 1) as f64).sqrt();
    assert!(within(flips, 0.2, sigma), "flip rate {flips}");
    let noise = path.z.iter().filter(|&&s| s == Spin::Minus).count() as f64 / N as f64;
    let sigma = (0.1 * 0.9 / N as f64).sqrt();
    assert!(within(noise, 0.1, sigma), "noise rate {noise}");
}

#[test]
fn initial_symbol_is_uniform() {
    let runs = 4000u64;
    let plus = (0..runs)
        .filter(|&seed| sample_markov(0.3, 1, seed).unwrap()[0] == Spin::Plus)
        .count() as f64;
    let half = runs as f64 / 2.0;
    let chi2 = 2.0 * (plus - half).powi(2) / half;
    // 1 degree of freedom, p = 0.001
    assert!(chi2 < 10.83, "chi2 {chi2}");
}

#[test]
fn observed_lag_one_correlation() {
    let path = generate_dataset(&params(), N, 12).unwrap();
    let mean = path.y.windows(2).map(|w| (w[0] * w[1]).sign()).sum::<f64>() / (N - 1) as f64;
    let expected = (1.0 - 2.0 * 0.2) * (1.0 - 2.0 * 0.1f64).powi(2);
    // neighbouring products share one noise symbol
    let sigma = (3.0 / N as f64).sqrt();
    assert!(within(mean, expected, sigma), "E[y y'] {mean} vs {expected}");
}

#[test]
fn word_frequencies_match_cylinder_probabilities() {
    let path = generate_dataset(&params(), N, 13).unwrap();
    let windows = (N - 2) as f64;
    for word in all_words(3) {
        let count = path.y.windows(3).filter(|w| *w == word.as_slice()).count() as f64;
        let expected = brute_force_cylinder(&word, &params()).unwrap();
        // overlapping windows: inflate the variance by the window length
        let sigma = (3.0 * expected * (1.0 - expected) / windows).sqrt();
        assert!(within(count / windows, expected, sigma), "{word:?}: {} vs {expected}", count / windows);
    }
}
