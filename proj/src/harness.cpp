#include "qse/harness.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>

#include "qse/errors.hpp"

namespace qse {

double fidelity(const StateVector& psi, const StateVector& psi_hat) {
    const double n1 = psi.ket.norm();
    const double n2 = psi_hat.ket.norm();
    if (n1 == 0.0 || n2 == 0.0) throw ZeroVector("fidelity of a zero vector is undefined");
    const Complex overlap = psi.ket.adjoint() * psi_hat.ket;
    return std::norm(overlap) / (n1 * n1 * n2 * n2);
}

CVector pseudo_inverse_baseline(const CVector& y, const CMatrix& h) {
    if (h.rows() != y.size())
        throw DimensionMismatch("pseudo_inverse_baseline: H rows vs observation dim");
    Eigen::JacobiSVD<CMatrix> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector& sv = svd.singularValues();
    const double cutoff = 1e-10 * sv(0);
    if (sv.size() < h.cols() || sv(sv.size() - 1) <= cutoff)
        throw RankDeficient("measurement matrix has no full column rank");
    return svd.matrixV() * (svd.matrixU().adjoint() * y).cwiseQuotient(sv.cast<Complex>());
}

namespace {

CVector uniform_amplitudes(Eigen::Index dim) {
    return CVector::Constant(dim, Complex(1.0 / std::sqrt(static_cast<double>(dim)), 0.0));
}

// Shared per-step physics: evolve, add state noise, draw the joint observable.
struct PlantStep {
    StateVector psi;
    CVector y;
};

PlantStep plant_step(const SystemSpec& spec, const CMatrix& unitary, const CMatrix& h,
                     StateVector psi, RandomStream& rng) {
    psi = evolve(unitary, psi);
    if (spec.noise.q.size() != 0 && spec.noise.q.norm() > 0.0) {
        psi = inject_state_noise(psi, spec.noise.q, rng);
        if (spec.renormalize_after_state_noise) {
            const double n = psi.ket.norm();
            if (n == 0.0) throw ZeroVector("state annihilated by noise");
            psi.ket /= n;
            psi.normalized = true;
        }
    }
    CVector y = observe(psi, h, spec.noise.r, rng);
    return PlantStep{std::move(psi), std::move(y)};
}

TrajectoryRecord make_record(long t, const StateVector& psi, const CVector& y,
                             const CMatrix& h, const EstimatorState& est) {
    TrajectoryRecord rec;
    rec.t = t;
    rec.psi_true = psi;
    rec.y_observed = y;
    rec.psi_hat = StateVector{est.x_hat, false};
    rec.innovation_apriori = est.last_innovation;
    rec.innovation_aposteriori = y - h * est.x_hat;
    rec.apriori_err = rec.innovation_apriori.norm();
    rec.aposteriori_err = rec.innovation_aposteriori.norm();
    rec.fidelity = fidelity(psi, rec.psi_hat);
    rec.gain_fro = est.last_gain.norm();
    rec.trace_p = est.p.real().trace();
    return rec;
}

// Estimator noise covariances default to the system's when left empty.
EstimatorConfig wire_noise(EstimatorConfig config, const NoiseSpec& noise) {
    if (config.r.size() == 0 && noise.r.size() != 0) config.r = noise.r;
    if (config.q.size() == 0 && noise.q.size() != 0) config.q = noise.q;
    return config;
}

}  // namespace

TrajectoryRunner::TrajectoryRunner(SystemSpec spec, EstimatorConfig config,
                                   std::uint64_t seed)
    : spec_(std::move(spec)),
      config_(wire_noise(std::move(config), spec_.noise)),
      rng_(seed) {
    validate_system_spec(spec_);
    validate_estimator_config(config_);
    unitary_ = system_unitary(spec_);
    h_stacked_ = stacked_observable(spec_.measurement);
    estimator_ = init(config_, spec_.dim, uniform_amplitudes(spec_.dim));
    psi_true_ = spec_.initial_state;
}

std::vector<TrajectoryRecord> TrajectoryRunner::advance(long steps) {
    if (steps < 1) throw BadConfig("steps must be ≥ 1");
    std::vector<TrajectoryRecord> records;
    records.reserve(static_cast<std::size_t>(steps));
    for (long k = 0; k < steps; ++k) {
        PlantStep next = plant_step(spec_, unitary_, h_stacked_, psi_true_, rng_);
        psi_true_ = std::move(next.psi);
        estimator_ = step(std::move(estimator_), unitary_, h_stacked_, next.y, config_);
        ++t_;
        records.push_back(make_record(t_, psi_true_, next.y, h_stacked_, estimator_));
    }
    return records;
}

std::vector<TrajectoryRecord> run_trajectory(const SystemSpec& spec,
                                             const EstimatorConfig& config, long steps,
                                             std::uint64_t seed) {
    TrajectoryRunner runner(spec, config, seed);
    return runner.advance(steps);
}

std::vector<BatteryTrajectory> run_trajectory_battery(const SystemSpec& spec,
                                                      const EstimatorConfig& config,
                                                      long steps, std::uint64_t seed) {
    validate_system_spec(spec);
    if (steps < 1) throw BadConfig("steps must be ≥ 1");
    const CMatrix unitary = system_unitary(spec);
    const CMatrix h_stacked = stacked_observable(spec.measurement);
    const EstimatorConfig wired = wire_noise(config, spec.noise);
    validate_estimator_config(wired);

    const auto& operators = spec.measurement.operators();
    const CVector* ref =
        spec.measurement.reference_state() ? &spec.measurement.reference_state().value()
                                           : nullptr;

    // Per-operator estimators; each one's R is its diagonal block of the
    // joint covariance.
    std::vector<CMatrix> h_blocks;
    std::vector<EstimatorConfig> configs;
    std::vector<EstimatorState> estimators;
    std::vector<Eigen::Index> offsets;
    Eigen::Index at = 0;
    for (const auto& entry : operators) {
        h_blocks.push_back(normalized_operator(entry.op, spec.measurement.norm_kind(), ref));
        EstimatorConfig local = wired;
        if (wired.r.size() != 0)
            local.r = wired.r.block(at, at, entry.op.rows(), entry.op.rows());
        configs.push_back(local);
        estimators.push_back(init(local, spec.dim, uniform_amplitudes(spec.dim)));
        offsets.push_back(at);
        at += entry.op.rows();
    }

    std::vector<BatteryTrajectory> out(operators.size());
    for (std::size_t m = 0; m < operators.size(); ++m) out[m].label = operators[m].label;

    RandomStream rng(seed);
    StateVector psi = spec.initial_state;
    for (long t = 1; t <= steps; ++t) {
        PlantStep next = plant_step(spec, unitary, h_stacked, psi, rng);
        psi = std::move(next.psi);
        for (std::size_t m = 0; m < operators.size(); ++m) {
            const CVector y_m = next.y.segment(offsets[m], h_blocks[m].rows());
            estimators[m] =
                step(std::move(estimators[m]), unitary, h_blocks[m], y_m, configs[m]);
            out[m].records.push_back(make_record(t, psi, y_m, h_blocks[m], estimators[m]));
        }
    }
    return out;
}

std::vector<SimulationRecord> simulate_trajectory(const SystemSpec& spec, long steps,
                                                  std::uint64_t seed) {
    validate_system_spec(spec);
    if (steps < 1) throw BadConfig("steps must be ≥ 1");
    const CMatrix unitary = system_unitary(spec);
    const CMatrix h_stacked = stacked_observable(spec.measurement);

    std::vector<SimulationRecord> records;
    records.reserve(static_cast<std::size_t>(steps));
    RandomStream rng(seed);
    StateVector psi = spec.initial_state;
    for (long t = 1; t <= steps; ++t) {
        PlantStep next = plant_step(spec, unitary, h_stacked, psi, rng);
        psi = std::move(next.psi);
        SimulationRecord rec;
        rec.t = t;
        rec.psi_true = psi;
        rec.y_observed = std::move(next.y);
        rec.state_norm = psi.ket.norm();
        if (rec.state_norm == 0.0) throw ZeroVector("state annihilated by noise");
        const StateVector renorm{psi.ket / rec.state_norm, true};
        for (const auto& entry : spec.measurement.operators())
            rec.outcome_probs.push_back(outcome_probability(renorm, entry.op));
        records.push_back(std::move(rec));
    }
    return records;
}

CMatrix error_covariance_estimate(const std::vector<std::vector<TrajectoryRecord>>& runs,
                                  ErrorCovarianceKind which, long step_index) {
    if (runs.size() < 2)
        throw InsufficientRuns("error covariance needs ≥ 2 runs, got " +
                               std::to_string(runs.size()));
    const std::size_t len = runs.front().size();
    for (const auto& run : runs)
        if (run.size() != len) throw DimensionMismatch("runs have unequal lengths");
    if (len == 0) throw InsufficientRuns("runs are empty");
    const std::size_t at =
        step_index < 0 ? len - 1 : static_cast<std::size_t>(step_index);
    if (at >= len) throw DimensionMismatch("step index beyond run length");

    const auto pick = [which](const TrajectoryRecord& rec) -> const CVector& {
        return which == ErrorCovarianceKind::apriori ? rec.innovation_apriori
                                                     : rec.innovation_aposteriori;
    };
    const Eigen::Index m = pick(runs.front()[at]).size();
    CMatrix acc = CMatrix::Zero(m, m);
    for (const auto& run : runs) {
        const CVector& eps = pick(run[at]);
        acc += eps * eps.adjoint();
    }
    return hermitize(acc / static_cast<double>(runs.size()));
}

double steady_state_mse(const std::vector<TrajectoryRecord>& records) {
    if (records.empty()) throw InsufficientRuns("no records");
    const std::size_t window = std::max<std::size_t>(1, records.size() / 4);
    double acc = 0.0;
    for (std::size_t k = records.size() - window; k < records.size(); ++k)
        acc += (records[k].psi_hat.ket - records[k].psi_true.ket).squaredNorm();
    return acc / static_cast<double>(window);
}

namespace {

struct PairedSeedResult {
    double mse_ose = 0.0;
    double mse_raw = 0.0;
    double final_fidelity_ose = 0.0;
    double final_fidelity_raw = 0.0;
};

PairedSeedResult run_paired_seed(const SystemSpec& spec, const EstimatorConfig& config,
                                 long steps, std::uint64_t seed) {
    const std::vector<TrajectoryRecord> records = run_trajectory(spec, config, steps, seed);

    // The baseline replays the identical observation sequence, memoryless.
    const CMatrix h = stacked_observable(spec.measurement);
    std::vector<TrajectoryRecord> raw = records;
    for (auto& rec : raw) {
        rec.psi_hat = StateVector{pseudo_inverse_baseline(rec.y_observed, h), false};
        rec.fidelity = fidelity(rec.psi_true, rec.psi_hat);
    }

    PairedSeedResult out;
    out.mse_ose = steady_state_mse(records);
    out.mse_raw = steady_state_mse(raw);
    out.final_fidelity_ose = records.back().fidelity;
    out.final_fidelity_raw = raw.back().fidelity;
    return out;
}

MethodStats stats_of(const std::vector<double>& mses, const std::vector<double>& fids) {
    MethodStats s;
    const double n = static_cast<double>(mses.size());
    for (double v : mses) s.mean_mse += v;
    s.mean_mse /= n;
    for (double v : mses) s.std_mse += (v - s.mean_mse) * (v - s.mean_mse);
    s.std_mse = mses.size() > 1 ? std::sqrt(s.std_mse / (n - 1.0)) : 0.0;
    for (double v : fids) s.mean_final_fidelity += v;
    s.mean_final_fidelity /= n;
    return s;
}

}  // namespace

RunSummary monte_carlo_compare(const SystemSpec& spec, const EstimatorConfig& config,
                               int n_seeds, long steps, std::uint64_t seed_base,
                               int jobs) {
    if (n_seeds < 2)
        throw InsufficientRuns("paired comparison needs ≥ 2 seeds, got " +
                               std::to_string(n_seeds));
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<PairedSeedResult> results(static_cast<std::size_t>(n_seeds));
    if (jobs <= 1) {
        for (int k = 0; k < n_seeds; ++k)
            results[static_cast<std::size_t>(k)] = run_paired_seed(
                spec, config, steps, derive_seed(seed_base, static_cast<std::uint64_t>(k)));
    } else {
        std::vector<std::future<PairedSeedResult>> futures;
        futures.reserve(static_cast<std::size_t>(n_seeds));
        for (int k = 0; k < n_seeds; ++k) {
            futures.push_back(std::async(std::launch::async, [&, k] {
                return run_paired_seed(spec, config, steps,
                                       derive_seed(seed_base, static_cast<std::uint64_t>(k)));
            }));
            if (static_cast<int>(futures.size()) == jobs || k == n_seeds - 1) {
                for (std::size_t j = 0; j < futures.size(); ++j)
                    results[static_cast<std::size_t>(k) - futures.size() + 1 + j] =
                        futures[j].get();
                futures.clear();
            }
        }
    }

    RunSummary summary;
    summary.n_seeds = n_seeds;
    summary.steps = steps;
    summary.seed_base = seed_base;
    int improved = 0;
    for (const auto& r : results) {
        summary.per_seed_mse_ose.push_back(r.mse_ose);
        summary.per_seed_mse_raw.push_back(r.mse_raw);
        summary.per_seed_final_fidelity_ose.push_back(r.final_fidelity_ose);
        summary.per_seed_final_fidelity_raw.push_back(r.final_fidelity_raw);
        if (r.mse_ose < r.mse_raw) ++improved;
    }
    summary.ose = stats_of(summary.per_seed_mse_ose, summary.per_seed_final_fidelity_ose);
    summary.raw_pseudo_inverse =
        stats_of(summary.per_seed_mse_raw, summary.per_seed_final_fidelity_raw);
    summary.improved_fraction = static_cast<double>(improved) / static_cast<double>(n_seeds);
    summary.degenerate_tie =
        summary.ose.mean_mse <= 1e-12 && summary.raw_pseudo_inverse.mean_mse <= 1e-12;
    summary.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return summary;
}

}  // namespace qse
