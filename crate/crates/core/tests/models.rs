mod support;

use hetci::numerics::derive_stream;
use hetci::{
    make_design, make_dgm, mixture_cdf, mixture_quantile, population_variance,
    sample_heterogeneous, sample_iid_average, ComponentDistribution, DesignKind, Family,
    MixtureModel,
};

const TAU_GRID: [f64; 19] = [
    0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75,
    0.80, 0.85, 0.90, 0.95,
];

fn all_models() -> Vec<(String, MixtureModel)> {
    let mut out = Vec::new();
    for kind in DesignKind::ALL {
        let design = make_design(kind, 350).unwrap();
        for family in Family::ALL {
            for gamma in [1.0, 2.0, 3.0, 4.0] {
                out.push((
                    format!("{kind}/{family}/{gamma}"),
                    make_dgm(family, gamma, &design).unwrap(),
                ));
            }
        }
    }
    out
}

#[test]
fn quantile_round_trip_and_variance_bound() {
    for (name, model) in all_models() {
        for tau in TAU_GRID {
            let q = mixture_quantile(&model, tau).unwrap();
            assert!((mixture_cdf(&model, q) - tau).abs() <= 1e-10, "{name} τ={tau}");
            let v = population_variance(&model, tau).unwrap();
            assert!(v <= tau * (1.0 - tau) + 1e-12, "{name} τ={tau}");
            assert!(v > 0.0);
        }
    }
}

#[test]
fn uniform_mixture_quantile_against_grid_scan() {
    let design = make_design(DesignKind::Triangular, 350).unwrap();
    let model = make_dgm(Family::III, 1.0, &design).unwrap();
    let q = mixture_quantile(&model, 0.5).unwrap();
    let (lo, hi) = support::grid_scan(|x| mixture_cdf(&model, x), 0.5, 0.5, 4.0, 3_500_000);
    assert!(lo < q && q <= hi, "{lo} {q} {hi}");
    // 40-digit evaluation of the piecewise-linear F̄
    assert!((q - 2.073_662_588_422_322_7).abs() < 1e-12);
}

#[test]
fn normal_mixture_population_variance_pinned() {
    let design = make_design(DesignKind::Twin, 350).unwrap();
    let model = make_dgm(Family::I, 4.0, &design).unwrap();
    let q = mixture_quantile(&model, 0.5).unwrap();
    assert!((q - 20.003_185_338_060_82).abs() < 1e-9);
    // direct evaluation with the reference Φ
    let reference: f64 = model
        .components()
        .iter()
        .map(|c| match c {
            ComponentDistribution::NormalUnitVar { mu } => {
                let p = support::phi(q - mu);
                2.0 * p * (1.0 - p)
            }
            _ => unreachable!(),
        })
        .sum::<f64>()
        / 350.0;
    let v = population_variance(&model, 0.5).unwrap();
    assert!((v - reference).abs() < 1e-13);
    assert!((v - 0.031_642_377_945_500_69).abs() < 1e-12);
    assert!(v < 0.25);
}

#[test]
fn heterogeneous_group_means() {
    let design = make_design(DesignKind::Twin, 350).unwrap();
    let model = make_dgm(Family::I, 1.0, &design).unwrap();
    let reps = 10_000;
    let mut sums = vec![0.0; 175];
    for r in 0..reps {
        let sample = sample_heterogeneous(&model, &mut derive_stream(5, r));
        for (&x, &j) in sample.values().iter().zip(sample.group_of()) {
            sums[j] += x;
        }
    }
    // two unit-variance draws per group and replication
    let se = (1.0 / (2.0 * reps as f64)).sqrt();
    let mut outside = 0;
    for (j, c) in model.components().iter().enumerate() {
        let mean = sums[j] / (2 * reps) as f64;
        if (mean - c.mean()).abs() > 3.0 * se {
            outside += 1;
        }
    }
    // 175 groups at 3 SE: expect about 0.5 exceedances
    assert!(outside <= 3, "{outside} groups outside 3 SE");
}

#[test]
fn iid_arm_matches_average_distribution() {
    let design = make_design(DesignKind::Triangular, 350).unwrap();
    let model = make_dgm(Family::III, 2.0, &design).unwrap();
    let mut stream = derive_stream(17, 0);
    let mut draws = Vec::new();
    while draws.len() < 100_000 {
        draws.extend_from_slice(sample_iid_average(&model, &mut stream).values());
    }
    draws.truncate(100_000);
    draws.sort_by(f64::total_cmp);
    let n = draws.len() as f64;
    let sup = draws
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = mixture_cdf(&model, x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    assert!(sup <= 1.36 / n.sqrt() * 1.5, "sup distance {sup}");
}

#[test]
fn iid_arm_group_choice_frequencies() {
    // components with disjoint supports identify the chosen group
    let comps: Vec<_> = (0..4)
        .map(|j| ComponentDistribution::uniform(j as f64, j as f64 + 1.0).unwrap())
        .collect();
    let mult = vec![2, 3, 5, 10];
    let model = MixtureModel::new(comps, mult.clone()).unwrap();
    let mut counts = [0usize; 4];
    let mut stream = derive_stream(23, 0);
    let mut total = 0;
    while total < 100_000 {
        for &x in sample_iid_average(&model, &mut stream).values() {
            counts[x.floor() as usize] += 1;
            total += 1;
        }
    }
    for (j, &m) in mult.iter().enumerate() {
        let p = m as f64 / 20.0;
        let se = (p * (1.0 - p) / total as f64).sqrt();
        let freq = counts[j] as f64 / total as f64;
        assert!((freq - p).abs() < 3.0 * se, "group {j}: {freq} vs {p}");
    }
}

#[test]
fn homogeneous_arms_coincide_in_law() {
    let model = MixtureModel::homogeneous(ComponentDistribution::exponential(1.0).unwrap(), 50).unwrap();
    let mut a = derive_stream(1, 0);
    let mut b = derive_stream(1, 1);
    let mut het = Vec::new();
    let mut iid = Vec::new();
    for _ in 0..400 {
        het.extend_from_slice(sample_heterogeneous(&model, &mut a).values());
        iid.extend_from_slice(sample_iid_average(&model, &mut b).values());
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    // both means ≈ 1 with SE 1/√20000
    assert!((mean(&het) - 1.0).abs() < 0.025);
    assert!((mean(&iid) - 1.0).abs() < 0.025);
}
