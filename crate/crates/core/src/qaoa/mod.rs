//! MaxCut problems, the layered ansatz and landscape scans.

mod graph;
mod landscape;
mod problem;

pub use graph::{make_graph, Graph, GraphKind};
pub use landscape::{landscape_constraint_scan, landscape_line_scan, Landscape, ScanGrid};
pub use problem::{build_ansatz, distance, energy, n_cut, Mode, ParameterVector, QaoaProblem};
