#ifndef SVSPEC_COMMON_HPP
#define SVSPEC_COMMON_HPP

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace svspec {

using cplx = std::complex<double>;

constexpr double PI = 3.14159265358979323846264338327950288;
constexpr double PI2 = PI * PI;

/// Error classes used across the library; each maps to one CLI exit code.
enum class ErrorCode {
    ParseError,
    NotHermitian,
    OutOfDomain,
    BadKind,
    DegenerateMean,
    StepLimitExceeded,
    ToleranceNotMet,
    ZeroOnContour,
    NonIntegerWinding,
    CountMismatch,
    NotAnEigenvalue,
    GramNotPositive,
    IndexingAmbiguous,
    InsufficientShells,
    NearPole,
    TailTooLarge,
    OutOfNeighborhood,
    SingularUpperBlock,
    SingularY,
    LogDivergent,
    WrongIndexCombination,
    MeanNotZero,
    CoincidentEigenvalues,
    RankDeficientGram,
    CountingHypothesisViolated,
    ProductNotConverged,
    SpectraTooClose,
    InterlacingViolated,
    NonPositiveAlpha,
    NotMonotone,
    Internal
};

const char* error_name(ErrorCode c);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& msg)
        : std::runtime_error(std::string(error_name(code)) + ": " + msg), code_(code) {}
    ErrorCode code() const { return code_; }
private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

/// Deterministic 64-bit generator (splitmix64); identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : s_(seed) {}
    std::uint64_t next_u64() {
        std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    /// uniform in [0,1)
    double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }
    /// uniform in [a,b)
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
private:
    std::uint64_t s_;
};

/// Global thread budget (set from --threads / SVSPEC_THREADS); 1 = serial.
void set_threads(int n);
int threads();

/// Runs fn(i) for i in [0,n); results must be written to per-index slots so the
/// reduction order stays deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace svspec

#endif
