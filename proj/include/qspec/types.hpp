#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace qspec {

using cplx = std::complex<double>;
using Mat4 = Eigen::Matrix<cplx, 4, 4>;
using Vec4 = Eigen::Matrix<cplx, 4, 1>;

/// Base for every error the library raises. `kind` is a short machine tag
/// ("validation", "propagation", "pole", ...) that the CLI copies into its
/// structured error report.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(msg), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error("validation", msg) {}
};

class PropagationError : public Error {
public:
    PropagationError(const std::string& msg, double x)
        : Error("propagation", msg + " at x=" + std::to_string(x)), x_(x) {}
    double x() const noexcept { return x_; }

private:
    double x_;
};

/// Raised when an entry of M(lambda) is requested at a zero of Delta_kk.
class PoleError : public Error {
public:
    PoleError(int k, cplx lambda)
        : Error("pole", "pole: Delta_" + std::to_string(k) + std::to_string(k) +
                            " vanishes at lambda=(" + std::to_string(lambda.real()) + "," +
                            std::to_string(lambda.imag()) + ")"),
          k_(k) {}
    int which() const noexcept { return k_; }

private:
    int k_;
};

class SearchError : public Error {
public:
    explicit SearchError(const std::string& msg) : Error("search", msg) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error("data", msg) {}
};

inline bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

inline double max_abs(const Mat4& m) { return m.cwiseAbs().maxCoeff(); }

} // namespace qspec
