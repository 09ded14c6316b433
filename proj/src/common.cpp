#include "svspec/common.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

namespace svspec {

const char* error_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::NotHermitian: return "NotHermitian";
        case ErrorCode::OutOfDomain: return "OutOfDomain";
        case ErrorCode::BadKind: return "BadKind";
        case ErrorCode::DegenerateMean: return "DegenerateMean";
        case ErrorCode::StepLimitExceeded: return "StepLimitExceeded";
        case ErrorCode::ToleranceNotMet: return "ToleranceNotMet";
        case ErrorCode::ZeroOnContour: return "ZeroOnContour";
        case ErrorCode::NonIntegerWinding: return "NonIntegerWinding";
        case ErrorCode::CountMismatch: return "CountMismatch";
        case ErrorCode::NotAnEigenvalue: return "NotAnEigenvalue";
        case ErrorCode::GramNotPositive: return "GramNotPositive";
        case ErrorCode::IndexingAmbiguous: return "IndexingAmbiguous";
        case ErrorCode::InsufficientShells: return "InsufficientShells";
        case ErrorCode::NearPole: return "NearPole";
        case ErrorCode::TailTooLarge: return "TailTooLarge";
        case ErrorCode::OutOfNeighborhood: return "OutOfNeighborhood";
        case ErrorCode::SingularUpperBlock: return "SingularUpperBlock";
        case ErrorCode::SingularY: return "SingularY";
        case ErrorCode::LogDivergent: return "LogDivergent";
        case ErrorCode::WrongIndexCombination: return "WrongIndexCombination";
        case ErrorCode::MeanNotZero: return "MeanNotZero";
        case ErrorCode::CoincidentEigenvalues: return "CoincidentEigenvalues";
        case ErrorCode::RankDeficientGram: return "RankDeficientGram";
        case ErrorCode::CountingHypothesisViolated: return "CountingHypothesisViolated";
        case ErrorCode::ProductNotConverged: return "ProductNotConverged";
        case ErrorCode::SpectraTooClose: return "SpectraTooClose";
        case ErrorCode::InterlacingViolated: return "InterlacingViolated";
        case ErrorCode::NonPositiveAlpha: return "NonPositiveAlpha";
        case ErrorCode::NotMonotone: return "NotMonotone";
        case ErrorCode::Internal: return "Internal";
    }
    return "Unknown";
}

namespace {
std::atomic<int> g_threads{0};  // 0 = uninitialized, resolve lazily

int resolve_threads() {
    int t = g_threads.load();
    if (t > 0) return t;
    if (const char* env = std::getenv("SVSPEC_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) { g_threads = n; return n; }
    }
    g_threads = 1;
    return 1;
}
}  // namespace

void set_threads(int n) { g_threads = n < 1 ? 1 : n; }
int threads() { return resolve_threads(); }

namespace {
thread_local bool g_in_worker = false;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    int nt = threads();
    if (nt <= 1 || n <= 1 || g_in_worker) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr eptr;
    std::atomic<bool> failed{false};
    auto worker = [&]() {
        g_in_worker = true;
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) eptr = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    int use = static_cast<int>(std::min<std::size_t>(nt, n));
    pool.reserve(use);
    for (int t = 0; t < use; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load() && eptr) std::rethrow_exception(eptr);
}

}  // namespace svspec
