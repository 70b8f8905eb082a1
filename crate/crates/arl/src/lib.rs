//! File formats, experiment runner and report types behind the `arl`
//! command-line tool.

pub mod bundled;
pub mod format;
pub mod ode;
pub mod report;
pub mod run;
