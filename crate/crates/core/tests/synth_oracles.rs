use spatiocv_core::geom::dist;
use spatiocv_core::synth::{make_classification_task, sample_grf, SyntheticField};

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn nearest_neighbour_values(f: &SyntheticField) -> Vec<f64> {
    (0..f.coords.len())
        .map(|i| {
            let j = (0..f.coords.len())
                .filter(|&j| j != i)
                .min_by(|&a, &b| dist(f.coords[i], f.coords[a]).total_cmp(&dist(f.coords[i], f.coords[b])))
                .unwrap();
            f.values[j]
        })
        .collect()
}

#[test]
fn vanishing_range_decorrelates_neighbours() {
    for seed in 0..20 {
        let f = sample_grf(500, 1.0, 1e-6, 0.0, seed).unwrap();
        let r = pearson(&f.values, &nearest_neighbour_values(&f));
        assert!(r.abs() < 0.15, "seed {seed}: r = {r}");
    }
}

#[test]
fn positive_range_correlates_neighbours() {
    let f = sample_grf(500, 1.0, 0.1, 0.0, 1).unwrap();
    assert!(pearson(&f.values, &nearest_neighbour_values(&f)) > 0.5);
}

#[test]
fn field_means_are_centred() {
    let n = 500;
    let bound = 4.0 / (n as f64).sqrt();
    for seed in 0..20 {
        let f = sample_grf(n, 1.0, 1e-6, 0.0, seed).unwrap();
        let m = f.values.iter().sum::<f64>() / n as f64;
        assert!(m.abs() < bound, "seed {seed}: mean {m}");
    }
    let pooled: f64 = (0..20)
        .map(|seed| sample_grf(n, 1.0, 0.1, 0.0, seed).unwrap().values.iter().sum::<f64>() / n as f64)
        .sum::<f64>()
        / 20.0;
    assert!(pooled.abs() < bound, "pooled mean {pooled}");
}

#[test]
fn signal_feature_tracks_the_label() {
    for seed in 0..20 {
        let f = sample_grf(400, 1.0, 0.1, 0.0, seed).unwrap();
        let t = make_classification_task(&f, 2, seed + 1000).unwrap();
        let y: Vec<f64> = t.binary_labels().unwrap().iter().map(|&b| f64::from(u8::from(b))).collect();
        let r = pearson(t.feature("signal").unwrap(), &y);
        assert!(r > 0.2, "seed {seed}: r = {r}");
    }
}

#[test]
fn zero_field_gives_fair_coin_labels() {
    let n = 2000;
    let f = SyntheticField {
        coords: (0..n).map(|i| [(i % 50) as f64 / 50.0, (i / 50) as f64 / 40.0]).collect(),
        values: vec![0.0; n],
        sigma2: 1.0,
        rho: 0.1,
        nugget: 0.0,
        seed: 0,
    };
    let t = make_classification_task(&f, 0, 5).unwrap();
    let pos = t.binary_labels().unwrap().iter().filter(|&&b| b).count() as f64 / n as f64;
    assert!((pos - 0.5).abs() < 0.05, "positive rate {pos}");
}
