use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::ansatz::{AnsatzKind, AnsatzSpec};
use super::cobyla::OptimizerConfig;
use super::model::{vqc_train, Readout};
use crate::cml::accuracy;
use crate::encode::{Entanglement, FeatureMapSpec};
use crate::error::Result;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub ansatz: AnsatzKind,
    pub reps: usize,
    pub optimizer: String,
    /// Test accuracy; `None` when training failed.
    pub accuracy: Option<f64>,
    pub seconds: f64,
    pub error: Option<String>,
}

/// Trains every (ansatz, reps, optimizer) combination on the same split and seed.
#[allow(clippy::too_many_arguments)]
pub fn grid_search<T: Real>(
    feature_map: FeatureMapSpec,
    kinds: &[AnsatzKind],
    reps: std::ops::RangeInclusive<usize>,
    optimizers: &[OptimizerConfig],
    entanglement: Entanglement,
    readout: &Readout,
    train: (&[Vec<T>], &[usize]),
    test: (&[Vec<T>], &[usize]),
    seed: u64,
) -> Vec<GridRow> {
    let mut rows = Vec::new();
    for &kind in kinds {
        for r in reps.clone() {
            for optimizer in optimizers {
                let start = Instant::now();
                let outcome = AnsatzSpec::new(kind, feature_map.num_qubits(), r, entanglement)
                    .and_then(|ansatz| {
                        vqc_train(feature_map, ansatz, readout.clone(), *optimizer, train.0, train.1, seed)
                    })
                    .and_then(|model| accuracy(&model, test.0, test.1));
                let seconds = start.elapsed().as_secs_f64();
                let (accuracy, error) = match outcome {
                    Ok(a) => (Some(a), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                rows.push(GridRow {
                    ansatz: kind,
                    reps: r,
                    optimizer: optimizer.kind.name().to_string(),
                    accuracy,
                    seconds,
                    error,
                });
            }
        }
    }
    rows
}

/// CSV with columns `ansatz,reps,optimizer,accuracy,seconds`; failed rows leave accuracy empty.
pub fn write_grid_csv<W: Write>(rows: &[GridRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["ansatz", "reps", "optimizer", "accuracy", "seconds"])?;
    for row in rows {
        w.write_record([
            row.ansatz.name().to_string(),
            row.reps.to_string(),
            row.optimizer.clone(),
            row.accuracy.map(|a| a.to_string()).unwrap_or_default(),
            format!("{:.3}", row.seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_cardinality_and_csv() {
        let fm = FeatureMapSpec::new(2, 1, Entanglement::Linear).unwrap();
        let xs = vec![vec![0.1, 0.2], vec![0.9, 0.8], vec![0.2, 0.1], vec![0.8, 0.9]];
        let ys = vec![0, 1, 0, 1];
        let optimizer = OptimizerConfig {
            max_iters: 20,
            ..OptimizerConfig::default()
        };
        let rows = grid_search(
            fm,
            &AnsatzKind::ALL,
            1..=4,
            &[optimizer],
            Entanglement::Linear,
            &Readout::modulo(2, 2).unwrap(),
            (&xs, &ys),
            (&xs, &ys),
            1,
        );
        assert_eq!(rows.len(), 8);
        assert!(rows.iter().all(|r| r.accuracy.is_some_and(|a| (0.0..=1.0).contains(&a))));
        let mut buf = Vec::new();
        write_grid_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("ansatz,reps,optimizer,accuracy,seconds\n"));
        assert_eq!(text.lines().count(), 9);
    }
}
