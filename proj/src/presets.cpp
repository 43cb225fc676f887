#include "qse/presets.hpp"

#include <cmath>

#include "qse/errors.hpp"

namespace qse {

namespace {
const Complex kI(0.0, 1.0);
}

CMatrix preset_operator(const std::string& name) {
    CMatrix m(2, 2);
    if (name == "I") {
        m << 1, 0, 0, 1;
    } else if (name == "X") {
        m << 0, 1, 1, 0;
    } else if (name == "Y") {
        m << 0, -kI, kI, 0;
    } else if (name == "Z") {
        m << 1, 0, 0, -1;
    } else if (name == "H") {
        const double s = 1.0 / std::sqrt(2.0);
        m << s, s, s, -s;
    } else if (name == "S") {
        m << 1, 0, 0, kI;
    } else if (name == "T") {
        m << 1, 0, 0, std::exp(kI * (std::acos(-1.0) / 4.0));
    } else if (name == "P0") {
        m << 1, 0, 0, 0;
    } else if (name == "P1") {
        m << 0, 0, 0, 1;
    } else {
        throw BadConfig("unknown operator preset '" + name + "'");
    }
    return m;
}

bool is_preset_name(const std::string& name) {
    static const char* known[] = {"I", "X", "Y", "Z", "H", "S", "T", "P0", "P1"};
    for (const char* k : known)
        if (name == k) return true;
    return false;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CMatrix kron_chain(const std::vector<std::string>& names) {
    if (names.empty()) throw BadConfig("kron list must not be empty");
    CMatrix acc = preset_operator(names.front());
    for (std::size_t k = 1; k < names.size(); ++k)
        acc = kron(acc, preset_operator(names[k]));
    return acc;
}

}  // namespace qse
