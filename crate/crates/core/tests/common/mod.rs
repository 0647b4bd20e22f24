#![allow(dead_code)]

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use textclf::corpus::{Document, LabeledCorpus};
use textclf::pipeline::PipelineConfig;
use textclf::{FeatureConfig, Pipeline};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

const SHARED: &[&str] = &[
    "report", "system", "today", "please", "number", "value", "result", "office", "group",
    "window", "river", "light", "paper", "market", "engine", "garden", "signal", "table", "motion",
    "story",
];

/// Random labeled corpus: every class has a few marker words that show up
/// more often in its documents, on top of shared filler.
pub fn random_corpus(seed: u64, n_classes: usize, docs_per_class: usize) -> LabeledCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = Vec::new();
    for c in 0..n_classes {
        let markers: Vec<String> = (0..4).map(|m| format!("marker{c}x{m}")).collect();
        for d in 0..docs_per_class {
            let len = rng.gen_range(3..15);
            let words: Vec<String> = (0..len)
                .map(|_| {
                    if rng.gen_bool(0.4) {
                        markers.choose(&mut rng).unwrap().clone()
                    } else {
                        (*SHARED.choose(&mut rng).unwrap()).to_owned()
                    }
                })
                .collect();
            docs.push(Document::new(
                format!("c{c}/d{d:03}"),
                words.join(" "),
                Some(&format!("class{c}")),
            ));
        }
    }
    LabeledCorpus::from_documents(docs).unwrap()
}

/// Random query text drawn from the shared words, corpus markers and unseen words.
pub fn random_text(rng: &mut ChaCha8Rng, n_classes: usize) -> String {
    let len = rng.gen_range(0..20);
    (0..len)
        .map(|_| match rng.gen_range(0..3) {
            0 => (*SHARED.choose(rng).unwrap()).to_owned(),
            1 => format!(
                "marker{}x{}",
                rng.gen_range(0..n_classes),
                rng.gen_range(0..4)
            ),
            _ => format!("unseen{}", rng.gen_range(0..50)),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn small_config() -> PipelineConfig {
    PipelineConfig {
        features: FeatureConfig {
            min_df: 1,
            ..FeatureConfig::default()
        },
        ..PipelineConfig::default()
    }
}

pub fn fit_random(seed: u64, n_classes: usize) -> Pipeline {
    let corpus = random_corpus(seed, n_classes, 12);
    Pipeline::fit(&corpus, &small_config(), "random", None).unwrap()
}
