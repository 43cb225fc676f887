#include "qse/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qse/errors.hpp"

namespace qse {

using json = nlohmann::json;

std::string format_real17(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void atomic_write_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw IoError("write to '" + tmp.string() + "' failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        std::error_code ec2;
        fs::remove(tmp, ec2);
        throw IoError("rename to '" + path + "' failed: " + ec.message());
    }
}

std::string records_csv_text(const std::vector<TrajectoryRecord>& records) {
    if (records.empty()) throw IoError("no records to write");
    std::string out = "t,apriori_err,aposteriori_err,fidelity,gain_fro,trace_P\n";
    for (const auto& rec : records) {
        out += std::to_string(rec.t);
        out += ',';
        out += format_real17(rec.apriori_err);
        out += ',';
        out += format_real17(rec.aposteriori_err);
        out += ',';
        out += format_real17(rec.fidelity);
        out += ',';
        out += format_real17(rec.gain_fro);
        out += ',';
        out += format_real17(rec.trace_p);
        out += '\n';
    }
    return out;
}

ResultFiles write_records_csv(const std::vector<TrajectoryRecord>& records,
                              const std::string& path) {
    atomic_write_file(path, records_csv_text(records));
    return ResultFiles{path, ""};
}

namespace {

void append_cvector_columns(std::string& header, const std::string& prefix, Eigen::Index n) {
    for (Eigen::Index k = 0; k < n; ++k) {
        header += ',' + prefix + std::to_string(k) + "_re";
        header += ',' + prefix + std::to_string(k) + "_im";
    }
}

void append_cvector_values(std::string& row, const CVector& v) {
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        row += ',';
        row += format_real17(v(k).real());
        row += ',';
        row += format_real17(v(k).imag());
    }
}

}  // namespace

std::string states_csv_text(const std::vector<TrajectoryRecord>& records) {
    if (records.empty()) throw IoError("no records to write");
    const Eigen::Index d = records.front().psi_true.ket.size();
    const Eigen::Index m = records.front().y_observed.size();
    std::string out = "t";
    append_cvector_columns(out, "psi_true_", d);
    append_cvector_columns(out, "psi_hat_", d);
    append_cvector_columns(out, "y_", m);
    out += '\n';
    for (const auto& rec : records) {
        out += std::to_string(rec.t);
        append_cvector_values(out, rec.psi_true.ket);
        append_cvector_values(out, rec.psi_hat.ket);
        append_cvector_values(out, rec.y_observed);
        out += '\n';
    }
    return out;
}

std::string write_states_csv(const std::vector<TrajectoryRecord>& records,
                             const std::string& path) {
    atomic_write_file(path, states_csv_text(records));
    return path;
}

std::string simulation_csv_text(const std::vector<SimulationRecord>& records,
                                const std::vector<std::string>& labels) {
    if (records.empty()) throw IoError("no records to write");
    std::string out = "t,state_norm";
    for (const auto& label : labels) out += ",p_" + label;
    out += '\n';
    for (const auto& rec : records) {
        out += std::to_string(rec.t);
        out += ',';
        out += format_real17(rec.state_norm);
        for (double p : rec.outcome_probs) {
            out += ',';
            out += format_real17(p);
        }
        out += '\n';
    }
    return out;
}

std::string summary_json_text(const RunSummary& summary, const std::string& config_echo) {
    json methods;
    const auto method_json = [](const MethodStats& s) {
        return json{{"mean_mse", s.mean_mse},
                    {"std_mse", s.std_mse},
                    {"mean_final_fidelity", s.mean_final_fidelity}};
    };
    methods["ose"] = method_json(summary.ose);
    methods["raw_pseudo_inverse"] = method_json(summary.raw_pseudo_inverse);

    json root;
    root["schema_version"] = 1;
    root["n_seeds"] = summary.n_seeds;
    root["steps"] = summary.steps;
    root["seed_base"] = summary.seed_base;
    root["methods"] = methods;
    root["improved_fraction"] = summary.improved_fraction;
    root["degenerate_tie"] = summary.degenerate_tie;
    root["per_seed"] = json{{"mse_ose", summary.per_seed_mse_ose},
                            {"mse_raw", summary.per_seed_mse_raw},
                            {"final_fidelity_ose", summary.per_seed_final_fidelity_ose},
                            {"final_fidelity_raw", summary.per_seed_final_fidelity_raw}};
    root["wall_time_seconds"] = summary.wall_time_seconds;
    root["config"] = config_echo.empty() ? json(nullptr) : json::parse(config_echo);
    return root.dump(2) + "\n";
}

std::string write_summary(const RunSummary& summary, const std::string& config_echo,
                          const std::string& path) {
    atomic_write_file(path, summary_json_text(summary, config_echo));
    return path;
}

}  // namespace qse
