#![allow(dead_code)]

use g2pstack::instances::{Instance, InstanceSchema};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn inst(features: &[&str], label: &str) -> Instance {
    Instance {
        features: features.iter().map(|s| s.to_string()).collect(),
        label: label.to_string(),
        word_id: 0,
        position: 0,
    }
}

pub fn schema(width: usize) -> InstanceSchema {
    InstanceSchema::extras_only((0..width).map(|i| format!("c{i}")).collect())
}

/// Random symbolic dataset. Small value alphabets keep distance ties common.
pub struct Dataset {
    pub width: usize,
    pub instances: Vec<Instance>,
    pub rng: ChaCha8Rng,
    values: Vec<usize>,
}

impl Dataset {
    pub fn random(seed: u64, max_rows: usize, max_width: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let width = rng.gen_range(1..=max_width);
        let rows = rng.gen_range(1..=max_rows);
        let n_classes = rng.gen_range(1..=4);
        let values: Vec<usize> = (0..width).map(|_| rng.gen_range(1..=4)).collect();
        let mut instances = Vec::with_capacity(rows);
        for _ in 0..rows {
            let features: Vec<String> = values.iter().map(|&n| format!("v{}", rng.gen_range(0..n))).collect();
            // label leans on the first feature so weights are not all equal
            let label = if rng.gen_bool(0.6) {
                format!("k{}", features[0].len() % n_classes + features[0].as_bytes()[1] as usize % n_classes)
            } else {
                format!("k{}", rng.gen_range(0..n_classes))
            };
            instances.push(Instance {
                features,
                label,
                word_id: 0,
                position: 0,
            });
        }
        Dataset {
            width,
            instances,
            rng,
            values,
        }
    }

    /// A query that may contain values never seen in training.
    pub fn query(&mut self) -> Vec<String> {
        let rng = &mut self.rng;
        self.values
            .iter()
            .map(|&n| format!("v{}", rng.gen_range(0..=n)))
            .collect()
    }
}
