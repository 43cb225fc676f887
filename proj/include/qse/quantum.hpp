// quantum.hpp — the simulated system under estimation: state vectors,
// unitary dynamics, measurement operators with Born-rule semantics,
// normalized observables and Gaussian noise injection.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qse/rng.hpp"
#include "qse/tensor.hpp"

namespace qse {

// Completeness requirement for a measurement set: ‖Σ M†M − I‖_F bound.
inline constexpr double kCompletenessTol = 1e-8;
inline constexpr double kStateNormTol = 1e-10;

// Complex amplitude column |ψ⟩. `normalized` is false for states that have
// received additive noise and were deliberately left unnormalized.
struct StateVector {
    CVector ket;
    bool normalized = true;
};

// Checks |‖ket‖ − 1| ≤ kStateNormTol and returns a normalized-flagged state.
StateVector make_state(CVector ket);

enum class MeasurementMode { battery, stacked };

struct MeasurementOperator {
    std::string label;
    CMatrix op;
};

// Labeled set {M_m} with Σ M†_m M_m = I, plus the normalization convention
// used to build observables from it. `reference_state` is required when
// norm_kind is state_dependent.
class MeasurementModel {
public:
    MeasurementModel(std::vector<MeasurementOperator> operators, NormKind norm_kind,
                     MeasurementMode mode, std::optional<CVector> reference_state = {});

    Eigen::Index dim() const { return dim_; }
    std::size_t size() const { return operators_.size(); }
    const std::vector<MeasurementOperator>& operators() const { return operators_; }
    NormKind norm_kind() const { return norm_kind_; }
    MeasurementMode mode() const { return mode_; }
    const std::optional<CVector>& reference_state() const { return reference_state_; }

private:
    std::vector<MeasurementOperator> operators_;
    NormKind norm_kind_;
    MeasurementMode mode_;
    std::optional<CVector> reference_state_;
    Eigen::Index dim_;
};

enum class ProcessNoiseMode { explicit_q, output_folded };

// Constant state-noise covariance Q (d×d) and measurement-noise covariance R
// (observable dimension). Zero-sized matrices mean "no noise of that kind".
struct NoiseSpec {
    CMatrix q;
    CMatrix r;
    ProcessNoiseMode process_noise_mode = ProcessNoiseMode::explicit_q;
};

void validate_noise_spec(const NoiseSpec& noise);

// Dynamics given either as an explicit unitary or as a Hamiltonian step
// exp(−i·H·dt/ħ).
struct DynamicsSpec {
    std::optional<CMatrix> unitary;
    std::optional<CMatrix> hamiltonian;
    double dt = 0.0;
    double hbar = 1.0;
};

struct SystemSpec {
    Eigen::Index dim = 0;
    DynamicsSpec dynamics;
    MeasurementModel measurement;
    NoiseSpec noise;
    StateVector initial_state;
    bool renormalize_after_state_noise = false;
};

// Structural checks: unitary within 1e−8 when given explicitly, dt > 0 and
// hbar > 0 for the Hamiltonian form, matching dimensions throughout.
void validate_system_spec(const SystemSpec& spec);

// The single-step unitary of the system (computes the exponential for the
// Hamiltonian form; call once and reuse in loops).
CMatrix system_unitary(const SystemSpec& spec);

// Born rule: p = ⟨ψ|M†M|ψ⟩ taken as its real part, clamped to [0,1] only
// when within 1e−10 of the bounds.
double outcome_probability(const StateVector& psi, const CMatrix& m);

// M|ψ⟩ / √(⟨ψ|M†M|ψ⟩). Throws ZeroProbabilityBranch when the outcome has
// probability below 1e−14.
StateVector post_measurement_state(const StateVector& psi, const CMatrix& m);

struct SampledOutcome {
    std::string label;
    std::size_t index;
    StateVector state;
};

// Draws outcome m with Born probability and collapses the state accordingly.
// Deterministic given the stream state.
SampledOutcome sample_outcome(const StateVector& psi, const MeasurementModel& model,
                              RandomStream& rng);

// M / ‖M‖ with the chosen norm; psi is the reference for state_dependent.
CMatrix normalized_operator(const CMatrix& m, NormKind kind, const CVector* psi = nullptr);

// Vertical stack of all normalized operators of the model: the joint
// measurement matrix used by the estimator in stacked mode.
CMatrix stacked_observable(const MeasurementModel& model);

StateVector evolve(const CMatrix& unitary, const StateVector& psi);
StateVector evolve(const SystemSpec& spec, const StateVector& psi);

// PSD factor L with L·L† = M (eigendecomposition, negative round-off
// eigenvalues clamped to zero). Throws NotPSD below the −1e−12 floor.
CMatrix psd_factor(const CMatrix& m);

// ψ + n with n ~ CN(0, Q). The sum is flagged normalized=false and not
// renormalized; a zero Q returns ψ unchanged and consumes no draws.
StateVector inject_state_noise(const StateVector& psi, const CMatrix& q, RandomStream& rng);

// H|ψ⟩ + v with v ~ CN(0, R). R = 0 gives the exact noiseless observable
// and consumes no draws.
CVector observe(const StateVector& psi, const CMatrix& h, const CMatrix& r, RandomStream& rng);

// QR of a complex Ginibre matrix with the R diagonal phases absorbed into Q.
CMatrix haar_random_unitary(Eigen::Index dim, RandomStream& rng);

// Haar-random normalized state (Gaussian direction).
StateVector haar_random_state(Eigen::Index dim, RandomStream& rng);

}  // namespace qse
