//! Tabular series for redrawing both phases of a run without re-running it.

use serde::{Deserialize, Serialize};

use crate::bounds::Anchor;
use crate::interval::Interval;
use crate::maximize::SubregionStop;
use crate::oracle::{EvalEvent, TraceRecord};
use crate::samples::Phase;

use super::report::{Estimate, RunReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub x: f64,
    pub value: f64,
    pub event: EvalEvent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionPlot {
    pub threshold: f64,
    pub lipschitz: f64,
    pub delta: f64,
    pub evaluations: Vec<PlotPoint>,
    /// Minorant anchors `(x, g_hat)`.
    pub minorant_anchors: Vec<Anchor>,
    pub regions: Vec<Interval>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubregionMajorant {
    pub interval: Interval,
    /// Majorant anchors `(x, g_check)`.
    pub anchors: Vec<Anchor>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximizationPlot {
    pub evaluations: Vec<PlotPoint>,
    pub majorants: Vec<SubregionMajorant>,
    pub incumbent: Estimate,
    pub n_g: Vec<Interval>,
    pub n_f: Vec<Interval>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotBundle {
    /// No subregion had room for a search.
    pub degenerate: bool,
    pub expansion: ExpansionPlot,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maximization: Option<MaximizationPlot>,
}

fn points(trace: &[TraceRecord], phase: Phase) -> Vec<PlotPoint> {
    trace
        .iter()
        .filter(|r| r.phase == phase)
        .map(|r| PlotPoint {
            x: r.x,
            value: r.value,
            event: r.event,
        })
        .collect()
}

pub fn export_plot_data(trace: &[TraceRecord], report: &RunReport) -> PlotBundle {
    let degenerate = report
        .subregions
        .iter()
        .all(|s| s.stop == SubregionStop::Degenerate);
    let expansion = ExpansionPlot {
        threshold: report.problem.threshold,
        lipschitz: report.problem.lipschitz,
        delta: report.problem.delta,
        evaluations: points(trace, Phase::Expansion),
        minorant_anchors: report.minorant_anchors.clone(),
        regions: report.safe_region.intervals().to_vec(),
    };
    let maximization = (!degenerate).then(|| MaximizationPlot {
        evaluations: points(trace, Phase::Maximization),
        majorants: report
            .subregions
            .iter()
            .map(|s| SubregionMajorant {
                interval: s.interval,
                anchors: s.anchors.clone(),
            })
            .collect(),
        incumbent: report.best,
        n_g: report.exclusion.n_g.intervals().to_vec(),
        n_f: report.exclusion.n_f.intervals().to_vec(),
    });
    PlotBundle {
        degenerate,
        expansion,
        maximization,
    }
}
