#pragma once

#include <string>
#include <vector>

#include "flowplan/scenario.hpp"

namespace flowplan {

struct ReportOptions {
    bool plots = false;
    bool oracle_dump = false;
};

/// Writes the run artifacts into `out_dir`:
///   steps.csv   — one record per planner step (no wall-clock fields)
///   timing.csv  — per-step wall-clock breakdown
///   kpi.json    — KPI summary and run verdict
///   *.svg       — optional trace and quiver plots
///   stvf_*.csv  — optional field dumps for external checks
/// Returns the list of files written. Throws on unwritable directories.
std::vector<std::string> emit_reports(const RunLog& log,
                                      const std::string& out_dir,
                                      const ReportOptions& opts = {});

struct BatchEntry {
    std::string scenario;
    KpiReport kpi;
    bool collision = false;
    bool reached_goal = false;
};

/// Aggregate table over a batch: one row per scenario plus an averaged
/// row, as CSV and JSON.
std::vector<std::string> emit_batch_summary(const std::vector<BatchEntry>& runs,
                                            const std::string& out_dir);

} // namespace flowplan
