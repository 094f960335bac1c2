use std::path::PathBuf;

use ids_core::ensembles::{BASE_ORDER, DEFAULT_OOF_FOLDS};
use ids_core::harness::{ClassifierKind, ConfigFile, CvConfig, ExperimentConfig, GridConfig, ScaleScope};
use ids_core::learners::{Criterion, Hyperparams};

fn config(name: &str) -> ConfigFile {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ConfigFile::load(&path).unwrap()
}

#[test]
fn tuned_forest_and_tree_settings() {
    let rf = Hyperparams::forest();
    assert_eq!(rf.n_estimators, 100);
    assert_eq!(rf.criterion, Criterion::Gini);
    assert_eq!(rf.max_depth, Some(80));
    assert_eq!(rf.max_features, Some(2));
    assert_eq!(rf.min_samples_split, 8);
    assert_eq!(rf.min_samples_leaf, 3);
    let dt = Hyperparams::tree();
    assert_eq!((dt.criterion, dt.min_samples_split), (Criterion::Gini, 2));
}

#[test]
fn default_grid_covers_tuned_parameter_names() {
    let keys: Vec<String> = GridConfig::default().params.params.keys().cloned().collect();
    assert_eq!(
        keys,
        ["criterion", "max_depth", "max_features", "min_samples_leaf", "min_samples_split", "n_estimators"]
    );
    // the tuned values are grid points
    let grid = GridConfig::default().params;
    let rf = Hyperparams::forest();
    assert!(grid.params["n_estimators"].contains(&rf.n_estimators.into()));
    assert!(grid.params["max_depth"].contains(&80.into()));
    assert!(grid.params["min_samples_leaf"].contains(&3.into()));
}

#[test]
fn evaluation_protocol_defaults() {
    assert_eq!(CvConfig::default(), CvConfig { k: 10, repeats: 10 });
    assert_eq!(BASE_ORDER, ["random_forest", "decision_tree", "gaussian_nb"]);
    assert_eq!(DEFAULT_OOF_FOLDS, 5);
    let c = ExperimentConfig::new("x.csv", "y");
    assert_eq!(c.classifier, ClassifierKind::Stacking);
    assert_eq!(c.scale_scope, ScaleScope::Global);
    assert!(!c.nest_selection);
}

#[test]
fn unsw_config_matches_record_distribution() {
    let c = config("unsw_nb15.json").single().unwrap();
    assert_eq!(c.label_column, "attack_cat");
    assert_eq!(c.drop_columns, ["id", "label"]);
    let counts = c.subsample.unwrap().counts;
    assert_eq!(counts.len(), 7);
    assert_eq!(counts.values().sum::<usize>(), 14_716);
    for (class, n) in [
        ("Normal", 2135),
        ("Fuzzers", 2112),
        ("Analysis", 2000),
        ("DoS", 2145),
        ("Exploits", 2146),
        ("Reconnaissance", 2097),
        ("Generic", 2081),
    ] {
        assert_eq!(counts[class], n, "{class}");
    }
    assert_eq!(c.cv, CvConfig { k: 10, repeats: 10 });
}

#[test]
fn cicddos_config_matches_record_distribution() {
    let c = config("cicddos2019.json").single().unwrap();
    let counts = c.subsample.unwrap().counts;
    assert_eq!(counts.len(), 4);
    assert_eq!(counts.values().sum::<usize>(), 8_047);
    assert_eq!(counts["Syn"], 2027);
    assert_eq!(counts["UDPLag"], 1873);
}

#[test]
fn suite_config_lists_both_datasets() {
    match config("suite.json") {
        ConfigFile::Suite(s) => {
            let names: Vec<String> = s.experiments.iter().map(|c| c.display_name()).collect();
            assert_eq!(names, ["unsw_nb15", "cicddos2019"]);
        }
        ConfigFile::Single(_) => panic!("expected a suite"),
    }
}
