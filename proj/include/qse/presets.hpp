// presets.hpp — named single-qubit operators and tensor products for configs

#pragma once

#include <string>
#include <vector>

#include "qse/tensor.hpp"

namespace qse {

// Textbook matrices addressable by name: "I", "X", "Y", "Z", "H" (Hadamard),
// "S", "T", projectors "P0", "P1". Throws BadConfig for unknown names.
CMatrix preset_operator(const std::string& name);

bool is_preset_name(const std::string& name);

// Kronecker product of named presets, left factor first:
// kron_chain({"P0","I"}) = P0 ⊗ I (4×4).
CMatrix kron_chain(const std::vector<std::string>& names);

CMatrix kron(const CMatrix& a, const CMatrix& b);

}  // namespace qse
