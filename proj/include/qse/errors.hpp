// errors.hpp — exception types shared across the library

#pragma once

#include <stdexcept>
#include <string>

namespace qse {

// Base class for all library errors. Catching qse::Error catches everything
// thrown by qse on purpose; std::bad_alloc and friends pass through.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& msg) : Error("dimension mismatch: " + msg) {}
};

class NonHermitianInput : public Error {
public:
    explicit NonHermitianInput(const std::string& msg) : Error("non-Hermitian input: " + msg) {}
};

class ZeroNorm : public Error {
public:
    explicit ZeroNorm(const std::string& msg) : Error("zero norm: " + msg) {}
};

class SingularSystem : public Error {
public:
    explicit SingularSystem(const std::string& msg) : Error("singular system: " + msg) {}
};

class SingularInnovationCovariance : public Error {
public:
    explicit SingularInnovationCovariance(const std::string& msg)
        : Error("singular innovation covariance: " + msg) {}
};

class NotNormalized : public Error {
public:
    explicit NotNormalized(const std::string& msg) : Error("state not normalized: " + msg) {}
};

class ZeroProbabilityBranch : public Error {
public:
    explicit ZeroProbabilityBranch(const std::string& msg)
        : Error("zero-probability branch: " + msg) {}
};

class NotPSD : public Error {
public:
    explicit NotPSD(const std::string& msg) : Error("matrix not positive semidefinite: " + msg) {}
};

class IncompleteMeasurement : public Error {
public:
    explicit IncompleteMeasurement(const std::string& msg)
        : Error("measurement set violates completeness: " + msg) {}
};

class BadConfig : public Error {
public:
    explicit BadConfig(const std::string& msg) : Error("bad config: " + msg) {}
};

class ZeroVector : public Error {
public:
    explicit ZeroVector(const std::string& msg) : Error("zero vector: " + msg) {}
};

class RankDeficient : public Error {
public:
    explicit RankDeficient(const std::string& msg) : Error("rank deficient: " + msg) {}
};

class InsufficientRuns : public Error {
public:
    explicit InsufficientRuns(const std::string& msg) : Error("insufficient runs: " + msg) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error("parse error: " + msg) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error("validation error: " + msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error("i/o error: " + msg) {}
};

}  // namespace qse
