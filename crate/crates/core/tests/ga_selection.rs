use ids_core::dataio::{stratified_kfold, DataTable};
use ids_core::gaselect::{apply_mask, fitness, run_ga, Chromosome, GaConfig};
use ids_core::learners::{Classifier, GaussianNb};
use ids_core::synthetic;

/// Plug-in mutual information (nats) between a feature split at 0.5 and the
/// label.
fn mutual_information(table: &DataTable, feature: usize) -> f64 {
    let n = table.n_rows() as f64;
    let mut joint = [[0.0f64; 2]; 2];
    for (r, &l) in table.labels().iter().enumerate() {
        let b = usize::from(table.value(r, feature) > 0.5);
        joint[b][l] += 1.0;
    }
    let px = [joint[0][0] + joint[0][1], joint[1][0] + joint[1][1]];
    let py = [joint[0][0] + joint[1][0], joint[0][1] + joint[1][1]];
    let mut mi = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            if joint[x][y] > 0.0 {
                mi += joint[x][y] / n * (joint[x][y] * n / (px[x] * py[y])).ln();
            }
        }
    }
    mi
}

#[test]
fn informative_features_carry_the_information() {
    let table = synthetic::majority_table(1000, 5, 15, 7);
    let mi: Vec<f64> = (0..20).map(|j| mutual_information(&table, j)).collect();
    let weakest_informative = mi[..5].iter().copied().fold(f64::INFINITY, f64::min);
    let strongest_noise = mi[5..].iter().copied().fold(0.0, f64::max);
    // each informative bit alone gives I = ln2 - H(5/16) ~ 0.1 nats
    assert!(weakest_informative > 0.05, "{mi:?}");
    assert!(strongest_noise < 0.01, "{mi:?}");
}

#[test]
fn ga_recovers_informative_features() {
    for seed in [11, 12] {
        let table = synthetic::majority_table(1000, 5, 15, seed);
        let cfg = GaConfig { seed, ..GaConfig::default() };
        let result = run_ga(&table, &cfg).unwrap();
        let selected = result.best_chromosome.selected();
        let informative = selected.iter().filter(|&&i| i < 5).count();
        assert!(informative >= 4, "seed {seed}: {selected:?}");
        let by_mi: Vec<f64> = selected.iter().map(|&j| mutual_information(&table, j)).collect();
        assert!(by_mi.iter().filter(|&&m| m > 0.05).count() >= 4);
        assert!(result.evaluations <= cfg.population_size * (cfg.generations + 1));
        assert_eq!(result.history.len(), cfg.generations + 1);
    }
}

#[test]
fn fitness_equals_hand_rolled_cv() {
    let table = synthetic::label_copy_table(150, 6, 3, 2);
    for mask in ["000100", "110011", "111111", "010000"] {
        let chrom: Chromosome = mask.parse().unwrap();
        let masked = apply_mask(&table, &chrom).unwrap();
        let mut hits = 0;
        for fold in stratified_kfold(table.labels(), 5, 42).unwrap() {
            let model = GaussianNb::fit(&masked.select_rows(&fold.train)).unwrap();
            hits += fold
                .test
                .iter()
                .filter(|&&i| model.predict(masked.row(i)) == masked.labels()[i])
                .count();
        }
        let oracle = hits as f64 / table.n_rows() as f64;
        assert_eq!(fitness(&chrom, &table, 5, 42).unwrap(), oracle, "mask {mask}");
    }
    assert!(fitness(&"000100".parse().unwrap(), &table, 5, 42).unwrap() >= 0.99);
}

#[test]
fn result_document_shape() {
    let table = synthetic::majority_table(200, 3, 4, 3);
    let cfg = GaConfig { population_size: 8, generations: 3, seed: 1, ..GaConfig::default() };
    let result = run_ga(&table, &cfg).unwrap();
    let doc = serde_json::to_value(result.to_document(&table)).unwrap();
    for key in ["best_mask", "selected_features", "best_fitness", "history"] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    let mask = doc["best_mask"].as_str().unwrap();
    assert_eq!(mask.len(), 7);
    let names: Vec<&str> = doc["selected_features"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    let expected: Vec<&str> = mask
        .chars()
        .zip(table.features())
        .filter(|(c, _)| *c == '1')
        .map(|(_, f)| f.name.as_str())
        .collect();
    assert_eq!(names, expected);
    let h = &doc["history"][0];
    assert!(h.get("generation").is_some() && h.get("best").is_some() && h.get("mean").is_some());
}

#[test]
fn config_keys_round_trip() {
    let text = r#"{"population_size": 20, "generations": 4, "crossover_prob": 0.7,
        "mutation_bit_prob": 0.05, "tournament_size": 2, "elitism": 2,
        "fitness_folds": 3, "seed": 9}"#;
    let cfg: GaConfig = serde_json::from_str(text).unwrap();
    assert_eq!(cfg.population_size, 20);
    assert_eq!(cfg.mutation_bit_prob, Some(0.05));
    let defaults: GaConfig = serde_json::from_str("{}").unwrap();
    assert_eq!(defaults, GaConfig::default());
}
