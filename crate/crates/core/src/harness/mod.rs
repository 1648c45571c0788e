//! Configuration, single runs, batch statistics and output files.

pub mod bench;
pub mod config;
pub mod export;
pub mod report;
pub mod run;
pub mod trace;

pub use bench::{bench, bench_reports, write_csv, BenchRow, BenchSummary};
pub use config::{InitialPoints, InlineProblem, ProblemSpec, ResolvedRun, RunConfig};
pub use export::{export_plot_data, PlotBundle};
pub use report::{Counts, Estimate, RunReport};
pub use run::{execute, run, RunOutcome};
pub use trace::{read_trace, write_trace};
