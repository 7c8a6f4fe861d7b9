use nudgeopt_core::human_sim::{
    make_contrastive_spec, sample_cell, DemographicCell, Effect, EffectTable, HumanModel,
    HumanModelSpec, StochasticHuman, N_CELLS,
};
use nudgeopt_core::survey_data::synthetic::PlantedBarrier;
use nudgeopt_core::survey_data::{
    compute_effectiveness, generate_synthetic, read_barrier_survey, read_intervention_survey,
    write_barrier_survey, write_intervention_survey, SyntheticGenConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (
        m,
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0),
    )
}

#[test]
fn stochastic_human_moments() {
    let table = EffectTable::new(vec![vec![
        Effect {
            mean: 5.52,
            variance: 8.41,
        },
        Effect {
            mean: -1.0,
            variance: 0.25,
        },
    ]])
    .unwrap();
    let human = StochasticHuman::new(table);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 100_000;
    for (id, mu, var) in [(0, 5.52, 8.41), (1, -1.0, 0.25)] {
        let draws: Vec<f64> = (0..n)
            .map(|_| {
                human
                    .respond(DemographicCell::from_index(0), id, &mut rng)
                    .unwrap()
            })
            .collect();
        let (m, v) = mean_var(&draws);
        assert!(
            (m - mu).abs() < 3.0 * (var / n as f64).sqrt(),
            "mean {m} vs {mu}"
        );
        assert!((v / var - 1.0).abs() < 0.1, "variance {v} vs {var}");
    }
}

#[test]
fn deterministic_human_ignores_rng() {
    let spec = make_contrastive_spec(4).unwrap();
    let human = HumanModelSpec::new("deterministic", spec.table.clone())
        .build()
        .unwrap();
    let mut a = ChaCha8Rng::seed_from_u64(1);
    let mut b = ChaCha8Rng::seed_from_u64(2);
    for c in DemographicCell::all() {
        for i in 0..spec.table.n_interventions() {
            let want = spec.table.effect(c, i).unwrap().mean;
            assert_eq!(human.respond(c, i, &mut a).unwrap(), want);
            assert_eq!(human.respond(c, i, &mut b).unwrap(), want);
        }
    }
}

#[test]
fn cells_are_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 100_000;
    let mut counts = [0usize; N_CELLS];
    for _ in 0..n {
        counts[sample_cell(&mut rng).index()] += 1;
    }
    for c in counts {
        assert!((c as f64 / n as f64 - 0.25).abs() < 0.02);
    }
}

#[test]
fn contrastive_table_rewards_knowing_the_cell() {
    for seed in 0..20 {
        let t = make_contrastive_spec(seed).unwrap().table;
        assert!(t.demographic_aware());
        assert!(t.mean_of_cell_maxima() - t.max_of_cell_averaged_means() >= 1.0);
        let mut best = t.row_argmax();
        best.sort_unstable();
        best.dedup();
        assert_eq!(best.len(), N_CELLS);
        assert!(t
            .rows()
            .iter()
            .flatten()
            .all(|e| (0.275..=13.10).contains(&e.mean)));
    }
}

#[test]
fn unlinked_prevalence_matches_base_rate() {
    let cfg = SyntheticGenConfig {
        seed: 6,
        n_records: 10_000,
        n_intervention_records: 0,
        links: Vec::new(),
        barriers: (0..18)
            .map(|i| PlantedBarrier {
                code: format!("b{i}"),
                base_rate: 0.5,
            })
            .collect(),
        ..Default::default()
    };
    let data = generate_synthetic(&cfg).unwrap();
    for b in &cfg.barriers {
        let k = data
            .barrier_records
            .iter()
            .filter(|r| r.barriers.contains(&b.code))
            .count();
        let p = k as f64 / 1e4;
        assert!((p - 0.5).abs() < 0.015, "{} prevalence {p}", b.code);
    }
}

#[test]
fn planted_rates_hold_within_sampling_error() {
    // With zero link weights every barrier is mentioned at its base rate,
    // conditioned on at least one mention.
    let cfg = SyntheticGenConfig {
        seed: 7,
        n_records: 20_000,
        n_intervention_records: 0,
        ..Default::default()
    }
    .with_link_scale(0.0);
    let data = generate_synthetic(&cfg).unwrap();
    let none: f64 = cfg.barriers.iter().map(|b| 1.0 - b.base_rate).product();
    let n = cfg.n_records as f64;
    for b in &cfg.barriers {
        let p = b.base_rate / (1.0 - none);
        let k = data
            .barrier_records
            .iter()
            .filter(|r| r.barriers.contains(&b.code))
            .count();
        let se = (p * (1.0 - p) / n).sqrt();
        assert!(
            (k as f64 / n - p).abs() < 3.0 * se + 1e-9,
            "{}: {} vs {p}",
            b.code,
            k as f64 / n
        );
    }
}

#[test]
fn effectiveness_recovers_catalog_means() {
    let cfg = SyntheticGenConfig {
        seed: 8,
        n_records: 1,
        n_intervention_records: 100_000,
        ..Default::default()
    };
    let data = generate_synthetic(&cfg).unwrap();
    let stats = compute_effectiveness(&data.intervention_records, data.catalog.len()).unwrap();
    for (i, s) in stats.interventions.iter().enumerate() {
        let se = (data.catalog.variances[i] / s.n as f64).sqrt();
        // Rounding to the integer scale adds well under 0.01 of bias.
        assert!(
            (s.mean_shift - data.catalog.means[i]).abs() < 3.5 * se + 0.01,
            "intervention {i}: {} vs {}",
            s.mean_shift,
            data.catalog.means[i]
        );
    }
}

#[test]
fn generator_is_deterministic_and_round_trips() {
    let cfg = SyntheticGenConfig {
        seed: 9,
        n_intervention_records: 300,
        ..Default::default()
    };
    let a = generate_synthetic(&cfg).unwrap();
    assert_eq!(a, generate_synthetic(&cfg).unwrap());
    let other = generate_synthetic(&SyntheticGenConfig {
        seed: 10,
        ..cfg.clone()
    })
    .unwrap();
    assert_ne!(a.barrier_records, other.barrier_records);

    let mut buf = Vec::new();
    write_barrier_survey(&mut buf, &cfg.schema, &a.barrier_records).unwrap();
    assert_eq!(
        read_barrier_survey(buf.as_slice(), &cfg.schema).unwrap(),
        a.barrier_records
    );

    let mut buf = Vec::new();
    write_intervention_survey(&mut buf, &cfg.schema, &a.intervention_records).unwrap();
    let back = read_intervention_survey(
        buf.as_slice(),
        &cfg.schema,
        &cfg.preference.scale,
        a.catalog.len(),
    )
    .unwrap();
    assert_eq!(back, a.intervention_records);
}
