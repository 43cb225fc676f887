// harness.hpp — closed-loop trajectory runner, metrics and paired
// Monte Carlo comparison against a memoryless pseudo-inverse baseline.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qse/estimator.hpp"
#include "qse/quantum.hpp"

namespace qse {

struct TrajectoryRecord {
    long t = 0;
    StateVector psi_true;
    CVector y_observed;
    StateVector psi_hat;
    CVector innovation_apriori;      // ε⁻ = y − H·x⁻
    CVector innovation_aposteriori;  // ε  = y − H·x̂
    double apriori_err = 0.0;        // ‖ε⁻‖
    double aposteriori_err = 0.0;    // ‖ε‖
    double fidelity = 0.0;
    double gain_fro = 0.0;
    double trace_p = 0.0;
};

enum class BaselineKind { raw_pseudo_inverse, ose };

struct MethodStats {
    double mean_mse = 0.0;
    double std_mse = 0.0;
    double mean_final_fidelity = 0.0;
};

struct RunSummary {
    int n_seeds = 0;
    long steps = 0;
    std::uint64_t seed_base = 0;
    MethodStats ose;
    MethodStats raw_pseudo_inverse;
    std::vector<double> per_seed_mse_ose;
    std::vector<double> per_seed_mse_raw;
    std::vector<double> per_seed_final_fidelity_ose;
    std::vector<double> per_seed_final_fidelity_raw;
    double improved_fraction = 0.0;  // seeds where the ose mse is strictly lower
    bool degenerate_tie = false;     // both methods at or below 1e−12 mse
    double wall_time_seconds = 0.0;
};

// Phase-invariant overlap |⟨ψ|ψ̂⟩|² / (‖ψ‖²·‖ψ̂‖²).
double fidelity(const StateVector& psi, const StateVector& psi_hat);

// Minimum-norm least-squares solve x̂ = H⁺y. H must have full column rank
// (singular values above 1e−10·σ_max), else RankDeficient.
CVector pseudo_inverse_baseline(const CVector& y, const CMatrix& h);

// Drives the loop: evolve the true state (plus state noise when Q ≠ 0),
// observe through the stacked normalized operators (plus measurement noise
// when R ≠ 0), run one estimator step, record metrics. Keeps its own RNG so
// a run advanced in pieces matches a single longer run exactly.
//
// The estimator's plant is the system unitary; its R/Q default to the
// system's noise covariances when the config leaves them empty. The initial
// estimate is the uniform-amplitude state (1/√d, …, 1/√d).
class TrajectoryRunner {
public:
    TrajectoryRunner(SystemSpec spec, EstimatorConfig config, std::uint64_t seed);

    std::vector<TrajectoryRecord> advance(long steps);

    const EstimatorState& estimator_state() const { return estimator_; }
    const StateVector& true_state() const { return psi_true_; }
    const CMatrix& observable_matrix() const { return h_stacked_; }
    long step_count() const { return t_; }

private:
    SystemSpec spec_;
    EstimatorConfig config_;
    CMatrix unitary_;
    CMatrix h_stacked_;
    EstimatorState estimator_;
    StateVector psi_true_;
    RandomStream rng_;
    long t_ = 0;
};

// One full stacked-mode run; records are complete up to the failing step if
// a module error interrupts the loop.
std::vector<TrajectoryRecord> run_trajectory(const SystemSpec& spec,
                                             const EstimatorConfig& config, long steps,
                                             std::uint64_t seed);

// Battery mode: one independent estimator per measurement operator, each
// seeing only its own block of the jointly drawn observation. No fusion;
// results are reported per label.
struct BatteryTrajectory {
    std::string label;
    std::vector<TrajectoryRecord> records;
};
std::vector<BatteryTrajectory> run_trajectory_battery(const SystemSpec& spec,
                                                      const EstimatorConfig& config,
                                                      long steps, std::uint64_t seed);

// Estimator-free trajectory: true state and observable only.
struct SimulationRecord {
    long t = 0;
    StateVector psi_true;
    CVector y_observed;
    double state_norm = 0.0;
    std::vector<double> outcome_probs;  // Born probabilities of the renormalized state
};
std::vector<SimulationRecord> simulate_trajectory(const SystemSpec& spec, long steps,
                                                  std::uint64_t seed);

enum class ErrorCovarianceKind { apriori, aposteriori };

// Monte Carlo estimate of the innovation covariance at one step index
// (default: the final step) across ≥ 2 equal-length runs.
CMatrix error_covariance_estimate(const std::vector<std::vector<TrajectoryRecord>>& runs,
                                  ErrorCovarianceKind which, long step_index = -1);

// ‖ψ̂_t − ψ_t‖² averaged over the last 25% of the records.
double steady_state_mse(const std::vector<TrajectoryRecord>& records);

// Paired study: per seed, one trajectory provides the observations consumed
// by both the estimator and the per-step pseudo-inverse baseline. Seeds are
// seed_base + index; `jobs` > 1 runs seeds in parallel, aggregation stays
// ordered by index.
RunSummary monte_carlo_compare(const SystemSpec& spec, const EstimatorConfig& config,
                               int n_seeds, long steps, std::uint64_t seed_base,
                               int jobs = 1);

}  // namespace qse
