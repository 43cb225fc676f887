#include "qse/estimator.hpp"

#include <cmath>
#include <string>

#include "qse/errors.hpp"

namespace qse {

void validate_estimator_config(const EstimatorConfig& config) {
    if (!(config.lambda > 0.0) || config.lambda > 1.0)
        throw BadConfig("lambda must be in (0, 1], got " + std::to_string(config.lambda));
    if (!(config.delta > 0.0))
        throw BadConfig("delta must be > 0, got " + std::to_string(config.delta));
    if (config.correction_sign != 1 && config.correction_sign != -1)
        throw BadConfig("correction_sign must be ±1");
}

EstimatorState init(const EstimatorConfig& config, Eigen::Index dim, const CVector& x0) {
    validate_estimator_config(config);
    if (dim < 1) throw BadConfig("estimator dim must be ≥ 1");
    if (x0.size() != dim)
        throw DimensionMismatch("x0 has dim " + std::to_string(x0.size()) + ", expected " +
                                std::to_string(dim));
    EstimatorState state;
    state.x_hat = x0;
    state.p = config.delta * CMatrix::Identity(dim, dim);
    state.t = 0;
    return state;
}

Prediction predict(const EstimatorState& state, const CMatrix& a,
                   const EstimatorConfig& config) {
    const Eigen::Index d = state.x_hat.size();
    if (a.rows() != d || a.cols() != d)
        throw DimensionMismatch("plant must be " + std::to_string(d) + "x" +
                                std::to_string(d));
    Prediction pred;
    pred.x_minus = a * state.x_hat;
    pred.p_minus = a * state.p * a.adjoint();
    if (config.mode == EstimatorMode::noisy_kalman &&
        config.process_noise_mode == ProcessNoiseMode::explicit_q && config.q.size() != 0) {
        if (config.q.rows() != d) throw DimensionMismatch("Q dim vs state dim");
        pred.p_minus += config.q;
    }
    pred.p_minus = hermitize(pred.p_minus);
    return pred;
}

CMatrix gain(const CMatrix& p_minus, const CMatrix& h, const EstimatorConfig& config) {
    const Eigen::Index d = p_minus.rows();
    const Eigen::Index m = h.rows();
    if (h.cols() != d)
        throw DimensionMismatch("measurement matrix cols " + std::to_string(h.cols()) +
                                " vs state dim " + std::to_string(d));

    CMatrix s = h * p_minus * h.adjoint();
    if (config.mode == EstimatorMode::noisy_kalman) {
        if (config.r.size() == 0 || config.r.rows() != m)
            throw DimensionMismatch("noisy mode needs R of dim " + std::to_string(m));
        s += config.r;
    } else {
        s += config.lambda * CMatrix::Identity(m, m);
    }

    // K = P⁻H†S⁻¹; with S Hermitian this is (S⁻¹·H·P⁻)†.
    try {
        return solve_hermitian_pd(s, h * p_minus).adjoint();
    } catch (const SingularSystem& e) {
        throw SingularInnovationCovariance(e.what());
    }
}

CVector innovate(const CVector& y, const CMatrix& h, const CVector& x_minus) {
    if (h.cols() != x_minus.size())
        throw DimensionMismatch("innovate: H cols vs state dim");
    if (h.rows() != y.size())
        throw DimensionMismatch("innovate: H rows " + std::to_string(h.rows()) +
                                " vs observation dim " + std::to_string(y.size()));
    return y - h * x_minus;
}

CVector correct(const CVector& x_minus, const CMatrix& k, const CVector& eps,
                int correction_sign) {
    if (k.rows() != x_minus.size() || k.cols() != eps.size())
        throw DimensionMismatch("correct: gain is " + std::to_string(k.rows()) + "x" +
                                std::to_string(k.cols()));
    return x_minus + static_cast<double>(correction_sign) * (k * eps);
}

CMatrix update_covariance(const CMatrix& k, const CMatrix& h, const CMatrix& p_minus,
                          const EstimatorConfig& config) {
    const Eigen::Index d = p_minus.rows();
    if (k.rows() != d || k.cols() != h.rows() || h.cols() != d)
        throw DimensionMismatch("update_covariance: K/H/P dims inconsistent");
    CMatrix p = (CMatrix::Identity(d, d) - k * h) * p_minus;
    if (config.mode == EstimatorMode::noiseless_rls) p /= config.lambda;
    return hermitize(p);
}

EstimatorState step(EstimatorState state, const CMatrix& a, const CMatrix& h,
                    const CVector& y, const EstimatorConfig& config) {
    Prediction pred = predict(state, a, config);

    CMatrix k;
    try {
        k = gain(pred.p_minus, h, config);
    } catch (const SingularInnovationCovariance&) {
        // Divergence protection: floor the predicted covariance diagonal once
        // and retry; a second failure propagates.
        const double floor =
            1e-12 * pred.p_minus.real().trace() / static_cast<double>(pred.p_minus.rows());
        pred.p_minus += std::max(floor, 1e-300) *
                        CMatrix::Identity(pred.p_minus.rows(), pred.p_minus.cols());
        k = gain(pred.p_minus, h, config);
        ++state.regularization_events;
    }

    const CVector eps = innovate(y, h, pred.x_minus);
    state.x_hat = correct(pred.x_minus, k, eps, config.correction_sign);
    state.p = update_covariance(k, h, pred.p_minus, config);
    state.last_gain = std::move(k);
    state.last_innovation = eps;
    ++state.t;
    return state;
}

CVector wiener_solution(const CMatrix& r_mm, const CVector& r_my) {
    return solve_hermitian_pd(r_mm, r_my);
}

CorrelationPair correlation_updates(const CMatrix& r_prev, const CVector& r_prev_my,
                                    const CMatrix& h, const CVector& y, double lambda) {
    if (h.rows() != y.size())
        throw DimensionMismatch("correlation_updates: H rows vs observation dim");
    if (r_prev.rows() != h.cols() || r_prev.cols() != h.cols() ||
        r_prev_my.size() != h.cols())
        throw DimensionMismatch("correlation_updates: accumulator dims vs H cols");
    return CorrelationPair{lambda * r_prev + h.adjoint() * h,
                           lambda * r_prev_my + h.adjoint() * y};
}

CVector batch_weighted_ls_oracle(const ObservationBatch& batch, double lambda,
                                 double delta, const CVector& x0) {
    if (batch.empty()) throw BadConfig("observation batch must not be empty");
    const Eigen::Index d = x0.size();
    const std::size_t t_final = batch.size();

    const double prior_weight = std::pow(lambda, static_cast<double>(t_final)) / delta;
    CMatrix normal = prior_weight * CMatrix::Identity(d, d);
    CVector rhs = prior_weight * x0;
    for (std::size_t k = 0; k < t_final; ++k) {
        const auto& [h, y] = batch[k];
        if (h.cols() != d || h.rows() != y.size())
            throw DimensionMismatch("batch step " + std::to_string(k) + " dims");
        const double w = std::pow(lambda, static_cast<double>(t_final - 1 - k));
        normal += w * (h.adjoint() * h);
        rhs += w * (h.adjoint() * y);
    }
    return solve_hermitian_pd(normal, rhs);
}

}  // namespace qse
