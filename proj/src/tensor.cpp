#include "qse/tensor.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

#include "qse/errors.hpp"

namespace qse {

CMatrix adjoint(const CMatrix& m) { return m.adjoint(); }

bool is_hermitian(const CMatrix& m, double rel_tol) {
    if (m.rows() != m.cols()) return false;
    const double scale = m.norm();
    return (m - m.adjoint()).norm() <= rel_tol * scale;
}

CMatrix hermitian_expm(const CMatrix& h, double t, double hbar) {
    if (h.rows() != h.cols())
        throw DimensionMismatch("hermitian_expm needs a square matrix, got " +
                                std::to_string(h.rows()) + "x" + std::to_string(h.cols()));
    if (!is_hermitian(h))
        throw NonHermitianInput("hermitian_expm: ‖H − H†‖ exceeds tolerance");

    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(h));
    if (es.info() != Eigen::Success)
        throw SingularSystem("hermitian_expm: eigendecomposition failed");

    const RVector& evals = es.eigenvalues();
    CVector phases(evals.size());
    for (Eigen::Index k = 0; k < evals.size(); ++k) {
        const double angle = -evals(k) * t / hbar;
        phases(k) = Complex(std::cos(angle), std::sin(angle));
    }
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

double operator_norm(const CMatrix& m, NormKind kind, const CVector* psi) {
    double value = 0.0;
    switch (kind) {
        case NormKind::spectral: {
            Eigen::JacobiSVD<CMatrix> svd(m);
            value = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
            break;
        }
        case NormKind::frobenius:
            value = m.norm();
            break;
        case NormKind::state_dependent: {
            if (psi == nullptr)
                throw DimensionMismatch("state_dependent norm needs a reference state");
            if (psi->size() != m.cols())
                throw DimensionMismatch("reference state dim " + std::to_string(psi->size()) +
                                        " vs operator cols " + std::to_string(m.cols()));
            value = (m * (*psi)).norm();
            break;
        }
    }
    if (value < tol::zero_norm)
        throw ZeroNorm("operator norm " + std::to_string(value) + " below usable floor");
    return value;
}

CMatrix solve_hermitian_pd(const CMatrix& s, const CMatrix& b) {
    if (s.rows() != s.cols())
        throw DimensionMismatch("solve_hermitian_pd: S must be square");
    if (s.rows() != b.rows())
        throw DimensionMismatch("solve_hermitian_pd: S is " + std::to_string(s.rows()) +
                                "x" + std::to_string(s.cols()) + " but B has " +
                                std::to_string(b.rows()) + " rows");

    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(s));
    if (es.info() != Eigen::Success)
        throw SingularSystem("solve_hermitian_pd: eigendecomposition failed");

    const RVector& evals = es.eigenvalues();
    const double lambda_max = std::max(std::abs(evals(0)), std::abs(evals(evals.size() - 1)));
    if (evals(0) <= tol::pd_floor * lambda_max || lambda_max == 0.0)
        throw SingularSystem("solve_hermitian_pd: smallest eigenvalue " +
                             std::to_string(evals(0)) + " fails the PD check");

    const CMatrix& v = es.eigenvectors();
    return v * evals.cwiseInverse().asDiagonal() * (v.adjoint() * b);
}

CMatrix hermitize(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

double min_eigenvalue(const CMatrix& m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(m));
    if (es.info() != Eigen::Success)
        throw SingularSystem("min_eigenvalue: eigendecomposition failed");
    return es.eigenvalues()(0);
}

}  // namespace qse
