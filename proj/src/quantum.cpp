#include "qse/quantum.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>

#include "qse/errors.hpp"

namespace qse {

namespace {

void require_normalized(const StateVector& psi, const char* who) {
    const double deviation = std::abs(psi.ket.norm() - 1.0);
    if (!psi.normalized || deviation > kStateNormTol)
        throw NotNormalized(std::string(who) + ": ‖ψ‖ deviates from 1 by " +
                            std::to_string(deviation));
}

void require_matching(const CMatrix& m, const StateVector& psi, const char* who) {
    if (m.cols() != psi.ket.size())
        throw DimensionMismatch(std::string(who) + ": operator cols " +
                                std::to_string(m.cols()) + " vs state dim " +
                                std::to_string(psi.ket.size()));
}

}  // namespace

StateVector make_state(CVector ket) {
    if (ket.size() < 1) throw DimensionMismatch("state vector needs dim ≥ 1");
    const double deviation = std::abs(ket.norm() - 1.0);
    if (deviation > kStateNormTol)
        throw NotNormalized("make_state: ‖ψ‖ deviates from 1 by " + std::to_string(deviation));
    return StateVector{std::move(ket), true};
}

MeasurementModel::MeasurementModel(std::vector<MeasurementOperator> operators,
                                   NormKind norm_kind, MeasurementMode mode,
                                   std::optional<CVector> reference_state)
    : operators_(std::move(operators)),
      norm_kind_(norm_kind),
      mode_(mode),
      reference_state_(std::move(reference_state)) {
    if (operators_.empty()) throw IncompleteMeasurement("empty operator set");
    dim_ = operators_.front().op.rows();
    CMatrix sum = CMatrix::Zero(dim_, dim_);
    for (const auto& [label, op] : operators_) {
        if (op.rows() != op.cols())
            throw DimensionMismatch("measurement operator '" + label + "' is not square");
        if (op.rows() != dim_)
            throw DimensionMismatch("measurement operator '" + label + "' has dim " +
                                    std::to_string(op.rows()) + ", expected " +
                                    std::to_string(dim_));
        sum += op.adjoint() * op;
    }
    const double defect = (sum - CMatrix::Identity(dim_, dim_)).norm();
    if (defect > kCompletenessTol)
        throw IncompleteMeasurement("‖Σ M†M − I‖_F = " + std::to_string(defect));
    if (norm_kind_ == NormKind::state_dependent) {
        if (!reference_state_)
            throw BadConfig("state_dependent norm requires a reference state");
        if (reference_state_->size() != dim_)
            throw DimensionMismatch("reference state dim " +
                                    std::to_string(reference_state_->size()) +
                                    " vs operator dim " + std::to_string(dim_));
    }
}

void validate_noise_spec(const NoiseSpec& noise) {
    for (const CMatrix* m : {&noise.q, &noise.r}) {
        if (m->size() == 0) continue;
        if (m->rows() != m->cols()) throw DimensionMismatch("noise covariance must be square");
        if ((*m - m->adjoint()).norm() > 1e-10 * std::max(1.0, m->norm()))
            throw NonHermitianInput("noise covariance is not Hermitian");
        if (m->norm() > 0.0 && min_eigenvalue(*m) < -1e-12)
            throw NotPSD("noise covariance has eigenvalue below −1e−12");
    }
}

void validate_system_spec(const SystemSpec& spec) {
    if (spec.dim < 1) throw DimensionMismatch("system dim must be ≥ 1");
    const bool has_u = spec.dynamics.unitary.has_value();
    const bool has_h = spec.dynamics.hamiltonian.has_value();
    if (has_u == has_h)
        throw BadConfig("dynamics needs exactly one of {unitary, hamiltonian}");
    if (has_u) {
        const CMatrix& u = *spec.dynamics.unitary;
        if (u.rows() != spec.dim || u.cols() != spec.dim)
            throw DimensionMismatch("unitary dim does not match system dim");
        const double defect = (u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())).norm();
        if (defect > 1e-8)
            throw BadConfig("dynamics matrix is not unitary: ‖U†U − I‖_F = " +
                            std::to_string(defect));
    } else {
        const CMatrix& h = *spec.dynamics.hamiltonian;
        if (h.rows() != spec.dim || h.cols() != spec.dim)
            throw DimensionMismatch("hamiltonian dim does not match system dim");
        if (spec.dynamics.dt <= 0.0) throw BadConfig("dt must be > 0");
        if (spec.dynamics.hbar <= 0.0) throw BadConfig("hbar must be > 0");
        if (!is_hermitian(h)) throw NonHermitianInput("hamiltonian");
    }
    if (spec.measurement.dim() != spec.dim)
        throw DimensionMismatch("measurement dim does not match system dim");
    if (spec.initial_state.ket.size() != spec.dim)
        throw DimensionMismatch("initial state dim does not match system dim");
    if (spec.noise.q.size() != 0 && spec.noise.q.rows() != spec.dim)
        throw DimensionMismatch("Q dim does not match system dim");
    validate_noise_spec(spec.noise);
}

CMatrix system_unitary(const SystemSpec& spec) {
    if (spec.dynamics.unitary) return *spec.dynamics.unitary;
    return hermitian_expm(*spec.dynamics.hamiltonian, spec.dynamics.dt, spec.dynamics.hbar);
}

double outcome_probability(const StateVector& psi, const CMatrix& m) {
    require_matching(m, psi, "outcome_probability");
    require_normalized(psi, "outcome_probability");
    double p = (m * psi.ket).squaredNorm();
    if (p < 0.0 && p > -1e-10) p = 0.0;
    if (p > 1.0 && p < 1.0 + 1e-10) p = 1.0;
    return p;
}

StateVector post_measurement_state(const StateVector& psi, const CMatrix& m) {
    const double p = outcome_probability(psi, m);
    if (p <= 1e-14)
        throw ZeroProbabilityBranch("conditioning on outcome with probability " +
                                    std::to_string(p));
    return StateVector{(m * psi.ket) / std::sqrt(p), true};
}

SampledOutcome sample_outcome(const StateVector& psi, const MeasurementModel& model,
                              RandomStream& rng) {
    std::vector<double> probs(model.size());
    double total = 0.0;
    for (std::size_t k = 0; k < model.size(); ++k) {
        probs[k] = outcome_probability(psi, model.operators()[k].op);
        total += probs[k];
    }
    const double u = rng.uniform01() * total;
    double cumulative = 0.0;
    std::size_t pick = model.size() - 1;  // last bucket absorbs rounding
    for (std::size_t k = 0; k < model.size(); ++k) {
        cumulative += probs[k];
        if (u < cumulative) {
            pick = k;
            break;
        }
    }
    // Skip zero-probability buckets the walk may have landed on via rounding.
    while (probs[pick] <= 1e-14 && pick > 0) --pick;
    return SampledOutcome{model.operators()[pick].label, pick,
                          post_measurement_state(psi, model.operators()[pick].op)};
}

CMatrix normalized_operator(const CMatrix& m, NormKind kind, const CVector* psi) {
    return m / operator_norm(m, kind, psi);
}

CMatrix stacked_observable(const MeasurementModel& model) {
    Eigen::Index rows = 0;
    for (const auto& entry : model.operators()) rows += entry.op.rows();
    CMatrix stacked(rows, model.dim());
    const CVector* ref =
        model.reference_state() ? &model.reference_state().value() : nullptr;
    Eigen::Index at = 0;
    for (const auto& entry : model.operators()) {
        stacked.middleRows(at, entry.op.rows()) =
            normalized_operator(entry.op, model.norm_kind(), ref);
        at += entry.op.rows();
    }
    return stacked;
}

StateVector evolve(const CMatrix& unitary, const StateVector& psi) {
    if (unitary.cols() != psi.ket.size())
        throw DimensionMismatch("evolve: unitary cols vs state dim");
    return StateVector{unitary * psi.ket, psi.normalized};
}

StateVector evolve(const SystemSpec& spec, const StateVector& psi) {
    return evolve(system_unitary(spec), psi);
}

CMatrix psd_factor(const CMatrix& m) {
    if (m.rows() != m.cols()) throw DimensionMismatch("psd_factor: matrix must be square");
    if (!is_hermitian(m, 1e-10)) throw NotPSD("psd_factor: matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(m));
    if (es.info() != Eigen::Success) throw NotPSD("psd_factor: eigendecomposition failed");
    RVector evals = es.eigenvalues();
    for (Eigen::Index k = 0; k < evals.size(); ++k) {
        if (evals(k) < -1e-12)
            throw NotPSD("eigenvalue " + std::to_string(evals(k)) + " below −1e−12");
        evals(k) = evals(k) > 0.0 ? std::sqrt(evals(k)) : 0.0;
    }
    return es.eigenvectors() * evals.cast<Complex>().asDiagonal();
}

StateVector inject_state_noise(const StateVector& psi, const CMatrix& q, RandomStream& rng) {
    if (q.size() == 0 || q.norm() == 0.0) return psi;
    if (q.rows() != psi.ket.size())
        throw DimensionMismatch("inject_state_noise: Q dim vs state dim");
    const CMatrix factor = psd_factor(q);
    const CVector noise = factor * rng.complex_gaussian_vector(psi.ket.size());
    return StateVector{psi.ket + noise, false};
}

CVector observe(const StateVector& psi, const CMatrix& h, const CMatrix& r,
                RandomStream& rng) {
    if (h.cols() != psi.ket.size())
        throw DimensionMismatch("observe: H cols vs state dim");
    CVector y = h * psi.ket;
    if (r.size() == 0 || r.norm() == 0.0) return y;
    if (r.rows() != h.rows())
        throw DimensionMismatch("observe: R dim " + std::to_string(r.rows()) +
                                " vs observable dim " + std::to_string(h.rows()));
    const CMatrix factor = psd_factor(r);
    y += factor * rng.complex_gaussian_vector(h.rows());
    return y;
}

CMatrix haar_random_unitary(Eigen::Index dim, RandomStream& rng) {
    if (dim < 1) throw DimensionMismatch("haar_random_unitary: dim must be ≥ 1");
    const CMatrix g = rng.complex_gaussian_matrix(dim, dim);
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ();
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    CVector phases(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        const Complex rkk = r(k, k);
        phases(k) = std::abs(rkk) > 0.0 ? rkk / std::abs(rkk) : Complex(1.0, 0.0);
    }
    return q * phases.asDiagonal();
}

StateVector haar_random_state(Eigen::Index dim, RandomStream& rng) {
    CVector v = rng.complex_gaussian_vector(dim);
    double n = v.norm();
    while (n < 1e-8) {  // astronomically unlikely, but keep the contract total
        v = rng.complex_gaussian_vector(dim);
        n = v.norm();
    }
    return StateVector{v / n, true};
}

}  // namespace qse
