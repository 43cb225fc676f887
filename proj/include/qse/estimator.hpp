// estimator.hpp — recursive least-squares state estimation over complex
// amplitudes, in two flavors:
//
//   noiseless_rls:  K = P⁻H†(λI + HP⁻H†)⁻¹,  P = λ⁻¹(I − KH)P⁻
//   noisy_kalman:   K = P⁻H†(R  + HP⁻H†)⁻¹,  P = (I − KH)P⁻,
//                   prediction adds Q when process noise is explicit
//
// One step runs predict → gain → innovate → correct → update. All transposes
// of the real-valued textbook derivation become conjugate transposes; the
// real case falls out as the zero-imaginary-part special case.
//
// batch_weighted_ls_oracle solves the same exponentially weighted problem by
// direct normal-equations assembly and is kept free of the recursion so the
// two paths can check each other.

#pragma once

#include <vector>

#include "qse/quantum.hpp"
#include "qse/tensor.hpp"

namespace qse {

enum class EstimatorMode { noiseless_rls, noisy_kalman };

struct EstimatorConfig {
    double lambda = 1.0;  // forgetting factor, 0 < λ ≤ 1
    double delta = 100.0; // P₀ = δI scale, δ > 0
    EstimatorMode mode = EstimatorMode::noiseless_rls;
    CMatrix r;  // measurement-noise covariance, used in noisy mode
    CMatrix q;  // state-noise covariance, used when process noise is explicit
    ProcessNoiseMode process_noise_mode = ProcessNoiseMode::explicit_q;

    // Test hook: −1 flips the correction to x̂ = x⁻ − Kε. The plus sign is
    // the supported behavior; the hook exists so a regression test can prove
    // the minus variant does not converge.
    int correction_sign = +1;
};

void validate_estimator_config(const EstimatorConfig& config);

struct EstimatorState {
    CVector x_hat;
    CMatrix p;  // Hermitian inverse-correlation / covariance matrix
    long t = 0;
    CMatrix last_gain;
    CVector last_innovation;
    long regularization_events = 0;  // diagonal-floor retries (normally 0)
};

struct Prediction {
    CVector x_minus;
    CMatrix p_minus;
};

// x̂ = x0, P = δI, t = 0.
EstimatorState init(const EstimatorConfig& config, Eigen::Index dim, const CVector& x0);

// x⁻ = A·x̂; P⁻ = A·P·A† (+ Q in noisy explicit mode).
Prediction predict(const EstimatorState& state, const CMatrix& a,
                   const EstimatorConfig& config);

// Gain against the m×d measurement matrix; throws
// SingularInnovationCovariance when λI/R + HP⁻H† is numerically singular.
CMatrix gain(const CMatrix& p_minus, const CMatrix& h, const EstimatorConfig& config);

// ε⁻ = y − H·x⁻.
CVector innovate(const CVector& y, const CMatrix& h, const CVector& x_minus);

// x̂ = x⁻ + K·ε⁻.
CVector correct(const CVector& x_minus, const CMatrix& k, const CVector& eps,
                int correction_sign = +1);

// Noiseless: P = λ⁻¹(I − KH)P⁻. Noisy: P = (I − KH)P⁻. Re-Hermitianized.
CMatrix update_covariance(const CMatrix& k, const CMatrix& h, const CMatrix& p_minus,
                          const EstimatorConfig& config);

// One full predict/correct cycle; consumes and returns the state value.
EstimatorState step(EstimatorState state, const CMatrix& a, const CMatrix& h,
                    const CVector& y, const EstimatorConfig& config);

// x̂ = R_MM⁻¹ · r_MY.
CVector wiener_solution(const CMatrix& r_mm, const CVector& r_my);

struct CorrelationPair {
    CMatrix r_mm;
    CVector r_my;
};

// Exponentially windowed correlation accumulation:
// R = λR_prev + H†H, r = λr_prev + H†y.
CorrelationPair correlation_updates(const CMatrix& r_prev, const CVector& r_prev_my,
                                    const CMatrix& h, const CVector& y, double lambda);

struct ObservationStep {
    CMatrix h;
    CVector y;
};

using ObservationBatch = std::vector<ObservationStep>;

// argmin_x Σ_k λ^{T−k}‖y_k − H_k x‖² + λ^T δ⁻¹‖x − x0‖², solved directly.
// With A = I this is exactly what T iterated step() calls compute.
CVector batch_weighted_ls_oracle(const ObservationBatch& batch, double lambda,
                                 double delta, const CVector& x0);

}  // namespace qse
