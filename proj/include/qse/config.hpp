// config.hpp — experiment configuration document (schema_version 1).
//
// The parsed form keeps preset names and kron lists as written so that
// parse(serialize(config)) is an identity; materialization into runnable
// SystemSpec / EstimatorConfig values happens separately. Complex numbers
// are serialized as [re, im] pairs.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qse/estimator.hpp"
#include "qse/quantum.hpp"

namespace qse {

inline constexpr int kConfigSchemaVersion = 1;

// One operator reference: exactly one of preset / kron / matrix.
struct OperatorRef {
    std::optional<std::string> preset;
    std::optional<std::vector<std::string>> kron;
    std::optional<CMatrix> matrix;

    bool operator==(const OperatorRef&) const;
};

struct OperatorEntryConfig {
    std::string label;
    OperatorRef ref;

    bool operator==(const OperatorEntryConfig&) const = default;
};

// Dynamics: preset/kron/unitary are the explicit-unitary forms; hamiltonian
// (with dt, hbar) is the generator form.
struct DynamicsConfig {
    OperatorRef unitary_ref;  // empty when hamiltonian form is used
    std::optional<CMatrix> hamiltonian;
    double dt = 0.0;
    double hbar = 1.0;

    bool operator==(const DynamicsConfig&) const;
};

struct MeasurementConfig {
    std::vector<OperatorEntryConfig> operators;
    NormKind norm_kind = NormKind::spectral;
    MeasurementMode mode = MeasurementMode::stacked;
    std::optional<CVector> reference_state;  // required for state_dependent

    bool operator==(const MeasurementConfig&) const;
};

// Either scalar intensities (covariance σ²·I) or full matrices.
struct NoiseConfig {
    std::optional<double> sigma_q;
    std::optional<CMatrix> q;
    std::optional<double> sigma_r;
    std::optional<CMatrix> r;
    ProcessNoiseMode process_noise_mode = ProcessNoiseMode::explicit_q;

    bool operator==(const NoiseConfig&) const;
};

struct SystemConfig {
    Eigen::Index dim = 0;
    DynamicsConfig dynamics;
    MeasurementConfig measurement;
    NoiseConfig noise;
    CVector initial_state;
    bool renormalize_after_state_noise = false;

    bool operator==(const SystemConfig&) const;
};

struct EstimatorSection {
    double lambda = 1.0;
    double delta = 100.0;
    EstimatorMode mode = EstimatorMode::noiseless_rls;
    ProcessNoiseMode process_noise_mode = ProcessNoiseMode::explicit_q;

    bool operator==(const EstimatorSection&) const = default;
};

struct RunSection {
    long steps = 100;
    int n_seeds = 1;
    std::uint64_t seed_base = 0;
    std::string records_csv;
    std::string summary;
    int jobs = 1;
    bool log_states = false;  // opt-in full state logging (separate file)

    bool operator==(const RunSection&) const = default;
};

struct ExperimentConfig {
    int schema_version = kConfigSchemaVersion;
    SystemConfig system;
    EstimatorSection estimator;
    RunSection run;

    bool operator==(const ExperimentConfig&) const = default;
};

// Parses and fully validates; throws ParseError for malformed documents and
// ValidationError naming the first offending field for semantic problems.
ExperimentConfig parse_config(const std::string& text);

// Normalized JSON form; parse(serialize(c)) == c for every valid c.
std::string serialize_config(const ExperimentConfig& config);

// Materialize operator references against the preset library.
CMatrix resolve_operator(const OperatorRef& ref, const std::string& field);

// Build the runnable system (dynamics matrix, measurement model, explicit
// noise covariances — σ intensities become σ²·I of the right dimension).
SystemSpec build_system_spec(const ExperimentConfig& config);

// Estimator parameters; R and Q are left empty here and wired from the
// system's noise spec by the harness.
EstimatorConfig build_estimator_config(const ExperimentConfig& config);

const char* to_string(NormKind kind);
const char* to_string(MeasurementMode mode);
const char* to_string(EstimatorMode mode);
const char* to_string(ProcessNoiseMode mode);

}  // namespace qse
