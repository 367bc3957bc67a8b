#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace homspace {

/// Malformed input data: bad distance table, masses, file format.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A parameter outside the admissible range of the routine.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A documented precondition of a routine does not hold for the given data.
class PreconditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A proven inequality failed on concrete data.
class TheoremViolation : public std::runtime_error {
public:
    TheoremViolation(std::string step, const std::string& detail)
        : std::runtime_error(step + ": " + detail), step_(std::move(step)) {}
    const std::string& step() const noexcept { return step_; }

private:
    std::string step_;
};

/// Relative tolerance used for every inequality check between computed quantities.
inline constexpr double kRelTol = 1e-9;
/// Slack used when a constant is fed back into a strict set containment.
inline constexpr double kContainmentSlack = 1e-12;

inline bool leq_rel(double a, double b, double rel = kRelTol) {
    if (a <= b) return true;
    if (std::isinf(b) && b > 0) return true;
    return a - b <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

inline bool close_rel(double a, double b, double rel = kRelTol, double abs_floor = 0.0) {
    double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= std::max(rel * scale, abs_floor);
}

/// One inequality `measured <= bound` with its outcome.
struct BoundCheck {
    std::string step;
    double measured = 0.0;
    double bound = 0.0;
    bool pass = true;
    std::string witness;

    double slack() const {
        if (std::isinf(bound)) return std::numeric_limits<double>::infinity();
        return bound - measured;
    }
};

inline BoundCheck make_check(std::string step, double measured, double bound, std::string witness = {},
                             double rel = kRelTol) {
    return BoundCheck{std::move(step), measured, bound, leq_rel(measured, bound, rel), std::move(witness)};
}

/// Deterministic generator: the engine is fully specified by the standard, and the
/// derived draws below avoid implementation-defined distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }
    bool coin() { return (eng_() >> 63) != 0; }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

private:
    std::mt19937_64 eng_;
};

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::vector<int> iota_vec(std::size_t n) {
    std::vector<int> v(n);
    std::iota(v.begin(), v.end(), 0);
    return v;
}

template <class T>
std::string join(const std::vector<T>& v, const char* sep = ",") {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << sep;
        os << v[i];
    }
    return os.str();
}

inline std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace homspace
