#pragma once

// CSV and key-value writers for simulation output. Floating point fields use
// nine significant digits so identical runs give byte-identical files.

#include <selfsense/sim_engine.hpp>

#include <iosfwd>
#include <span>
#include <string>

namespace selfsense {

std::string format_number(double value);

std::string trace_csv_header();
void write_trace_csv(std::ostream& out, std::span<const TraceRecord> trace);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);
void write_summary(std::ostream& out, const RunSummary& summary);

}  // namespace selfsense
