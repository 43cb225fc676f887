// io.hpp — result serialization: per-step CSV records and run summaries.
// All files are written atomically (temp file + rename), so error paths
// never leave partial output behind.

#pragma once

#include <string>
#include <vector>

#include "qse/config.hpp"
#include "qse/harness.hpp"

namespace qse {

struct ResultFiles {
    std::string records_csv;
    std::string summary;
};

// %.17g — enough significant digits for exact double round-trips.
std::string format_real17(double value);

void atomic_write_file(const std::string& path, const std::string& content);

// Fixed header: t,apriori_err,aposteriori_err,fidelity,gain_fro,trace_P
// followed by one LF-terminated row per step.
std::string records_csv_text(const std::vector<TrajectoryRecord>& records);
ResultFiles write_records_csv(const std::vector<TrajectoryRecord>& records,
                              const std::string& path);

// Opt-in companion file with the full complex state vectors per step.
std::string states_csv_text(const std::vector<TrajectoryRecord>& records);
std::string write_states_csv(const std::vector<TrajectoryRecord>& records,
                             const std::string& path);

// Estimator-free trajectory: t,state_norm then one Born probability column
// per operator label.
std::string simulation_csv_text(const std::vector<SimulationRecord>& records,
                                const std::vector<std::string>& labels);

// Structured summary mirroring RunSummary; `config_echo` is the serialized
// experiment config and is embedded verbatim as an object (null if empty).
std::string summary_json_text(const RunSummary& summary, const std::string& config_echo);
std::string write_summary(const RunSummary& summary, const std::string& config_echo,
                          const std::string& path);

}  // namespace qse
