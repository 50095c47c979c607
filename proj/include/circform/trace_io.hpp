// Copyright 2026 circform authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "circform/analysis.hpp"
#include "circform/sim.hpp"

namespace circform {

/// Trace files: `trace.csv` (one row per sampled step per agent),
/// `local_errors.csv` (one row per sampled step per agent per incident
/// edge) and `messages.csv` (one row per broadcast message). Each file
/// starts with `# circform-trace v<schema>` and `# config_hash <hex>`
/// comment lines. Edges and agents are 1-based in files.

void write_trace_csv(std::ostream& out, const SimTrace& trace,
                     std::uint64_t hash);
void write_local_errors_csv(std::ostream& out, const SimTrace& trace,
                            std::uint64_t hash);
void write_messages_csv(std::ostream& out, const SimTrace& trace,
                        std::uint64_t hash);

/// Writes trace.csv, local_errors.csv, messages.csv, summary.json and
/// resolved_config.cfg into `dir` (created if missing).
void write_run_outputs(const std::string& dir, const ScenarioConfig& config,
                       const SimTrace& trace, const ConvergenceReport& report);

/// Reads back the two trace CSVs from `dir`. Metadata fields of the
/// returned trace (dt, counts) are reconstructed from the rows.
/// Throws ValidationError on missing or truncated files.
SimTrace read_trace_dir(const std::string& dir);

std::string summary_json(const ScenarioConfig& config, const SimTrace& trace,
                         const ConvergenceReport& report);

/// Canonical number formatting used in all machine-readable outputs.
std::string format_double(double v);

}  // namespace circform
