//! Configuration, result files, plot data and self-verification behind the
//! `ftlab` command line.

mod config;
mod plot;
mod run;
mod verify;

pub use config::{CoherentConfig, ExperimentConfig, ExperimentKind, OutputConfig};
pub use plot::{plot_data, read_rows, write_plot, PlotData, PlotRow};
pub use run::{
    run_experiment, with_workers, AdversaryRow, CollapseRow, ResultRow, RunManifest, RunOutput,
    TOOL_VERSION,
};
pub use verify::{run_verify, Mutations, SuiteReport, VerifyReport, SUITES};

use crate::error::Result;
use crate::threshold::{concat_project, levels_for_target, ConcatProjection};

/// Target of a concatenation table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConcatTarget {
    Levels(u32),
    Epsilon(f64),
}

/// Rows `k = 1..=K`, where `K` is either given or the first level reaching
/// the target rate.
pub fn concat_table(p: f64, p_t: f64, target: ConcatTarget) -> Result<Vec<ConcatProjection>> {
    let depth = match target {
        ConcatTarget::Levels(k) => k,
        ConcatTarget::Epsilon(eps) => levels_for_target(p, p_t, eps)?.0,
    };
    (1..=depth).map(|k| concat_project(p, p_t, k)).collect()
}

/// Printable table: one line per level.
pub fn format_concat_table(rows: &[ConcatProjection]) -> String {
    let mut out = String::from("k\tp_k\tqubits\n");
    for r in rows {
        out.push_str(&format!("{}\t{:.6e}\t{}\n", r.k, r.p_k, r.qubits_per_logical));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concat_tables() {
        let rows = concat_table(1e-3, 1e-2, ConcatTarget::Levels(2)).unwrap();
        assert_eq!(rows.len(), 2);
        assert!((rows[0].p_k - 1e-4).abs() < 1e-16 && rows[0].qubits_per_logical == 7);
        assert!((rows[1].p_k / 1e-6 - 1.0).abs() < 1e-12 && rows[1].qubits_per_logical == 49);

        let rows = concat_table(1e-3, 1e-2, ConcatTarget::Epsilon(1e-15)).unwrap();
        let last = rows.last().unwrap();
        assert_eq!((last.k, last.qubits_per_logical), (4, 2401));

        for r in concat_table(1e-2, 1e-2, ConcatTarget::Levels(4)).unwrap() {
            assert!((r.p_k - 1e-2).abs() < 1e-15);
        }
        let err = concat_table(2e-2, 1e-2, ConcatTarget::Epsilon(1e-6)).unwrap_err();
        assert!(err.to_string().contains("above threshold"));
        let text = format_concat_table(&concat_table(1e-3, 1e-2, ConcatTarget::Levels(2)).unwrap());
        assert_eq!(text.lines().count(), 3);
    }
}
