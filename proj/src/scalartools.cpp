#include "svspec/scalartools.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "svspec/spectraldata.hpp"

namespace svspec {

void ScalarSpectra::validate() const {
    for (size_t i = 0; i + 1 < dirichlet.size(); ++i)
        if (!(dirichlet[i] < dirichlet[i + 1]))
            fail(ErrorCode::NotMonotone, "dirichlet spectrum must be strictly increasing");
    if (!mixed.empty()) {
        if (mixed.size() < dirichlet.size())
            fail(ErrorCode::ParseError, "mixed spectrum shorter than the Dirichlet one");
        for (size_t i = 0; i < dirichlet.size(); ++i) {
            if (!(mixed[i] < dirichlet[i]))
                fail(ErrorCode::InterlacingViolated, "need mu_n < lambda_n");
            if (i + 1 < mixed.size() && !(dirichlet[i] < mixed[i + 1]))
                fail(ErrorCode::InterlacingViolated, "need lambda_n < mu_{n+1}");
        }
    }
    for (double a : alpha)
        if (!(a > 0)) fail(ErrorCode::NonPositiveAlpha, "normalizing constants must be positive");
}

double estimate_q0(const std::vector<double>& dirichlet) {
    size_t m = dirichlet.size();
    if (m == 0) return 0;
    size_t from = 2 * m / 3;
    double s = 0;
    for (size_t i = from; i < m; ++i) {
        double n = static_cast<double>(i + 1);
        s += dirichlet[i] - PI2 * n * n;
    }
    return s / (m - from);
}

namespace {

// Euler-Maclaurin tails of sum_{m > K} (m + off)^{-2p}, evaluated at k = K + off
double em_s2(double k) { return 1 / k - 1 / (2 * k * k) + 1 / (6 * k * k * k) - 1 / (30 * std::pow(k, 5)); }
double em_s4(double k) { return 1 / (3 * k * k * k) - 1 / (2 * k * k * k * k) + 1 / (2 * std::pow(k, 5)); }
double em_s6(double k) { return 1 / (5 * std::pow(k, 5)); }

// log prod_{m > K} (1 - u / (pi^2 (m+off)^2))
double log_model_tail(double u, double off, int kint) {
    if (u >= 0) {
        // factor = (mm - w)(mm + w)/mm^2 with w = sqrt(u)/pi: exact Gamma ratio
        double w = std::sqrt(u) / PI;
        double x = kint + 1 + off;
        if (x - w < 1)
            fail(ErrorCode::ProductNotConverged, "model tail starts inside the oscillatory range");
        return 2 * std::lgamma(x) - std::lgamma(x - w) - std::lgamma(x + w);
    }
    // u < 0: log-series route (factors exceed 1, |u| moderate in practice)
    double l = u / PI2;
    double s = 0;
    int m = kint + 1;
    int guard = 0;
    while (std::abs(l) / ((m + off) * (m + off)) > 1e-4 && guard++ < 200000) {
        s += std::log1p(-l / ((m + off) * (m + off)));
        ++m;
    }
    for (int t = 0; t < 64; ++t, ++m) {
        double mm = m + off;
        s += std::log1p(-l / (mm * mm));
    }
    double k = (m - 1) + off;
    s += -l * em_s2(k) - l * l / 2 * em_s4(k) - l * l * l / 3 * em_s6(k);
    return s;
}

// prod over the sequence (data for m <= M, model pi^2 (m+off)^2 + q0 beyond) of
//   (seq_m - lambda) / (pi^2 (m+off)^2),   skipping index `skip` (1-based, 0 = none)
double canonical_product(const std::vector<double>& data, double off, double q0, double lambda,
                         int skip) {
    int mdata = static_cast<int>(data.size());
    if (mdata < 3) fail(ErrorCode::ProductNotConverged, "need at least 3 spectrum terms");
    double logs = 0;
    double sign = 1;
    auto mul = [&](double num, double den) {
        double factor = num / den;
        if (factor == 0) { sign = 0; return; }
        if (factor < 0) sign = -sign;
        logs += std::log(std::abs(factor));
    };
    for (int m = 1; m <= mdata; ++m) {
        if (m == skip) continue;
        double mm = m + off;
        mul(data[m - 1] - lambda, PI2 * mm * mm);
    }
    if (sign == 0) return 0;
    int kcut = std::max(mdata, static_cast<int>(std::ceil(4 * std::sqrt(std::abs(lambda)) / PI)));
    for (int m = mdata + 1; m <= kcut; ++m) {
        double mm = m + off;
        mul(PI2 * mm * mm + q0 - lambda, PI2 * mm * mm);
    }
    logs += log_model_tail(lambda - q0, off, kcut);
    return sign * std::exp(logs);
}

double cos_sqrt(double u) { return u >= 0 ? std::cos(std::sqrt(u)) : std::cosh(std::sqrt(-u)); }

}  // namespace

HadamardEval hadamard_products(const ScalarSpectra& s, double lambda) {
    s.validate();
    if (s.mixed.empty())
        fail(ErrorCode::ParseError, "hadamard_products needs both spectra");
    double q0 = estimate_q0(s.dirichlet);
    HadamardEval out;
    out.f = canonical_product(s.dirichlet, 0.0, q0, lambda, 0);
    out.g = canonical_product(s.mixed, -0.5, q0, lambda, 0);
    return out;
}

double hadamard_f(const ScalarSpectra& s, double lambda) {
    double q0 = estimate_q0(s.dirichlet);
    return canonical_product(s.dirichlet, 0.0, q0, lambda, 0);
}

double f_dot_at(const ScalarSpectra& s, int n) {
    double q0 = estimate_q0(s.dirichlet);
    double rn = canonical_product(s.dirichlet, 0.0, q0, s.dirichlet[n - 1], n);
    return -rn / (PI2 * n * n);
}

namespace {

// values g(lambda_n) derived from whichever parametrization is present
std::vector<double> g_values(const ScalarSpectra& s, ScalarParam from) {
    size_t m = s.dirichlet.size();
    std::vector<double> g(m);
    switch (from) {
        case ScalarParam::Mu: {
            if (s.mixed.empty()) fail(ErrorCode::ParseError, "mu sequence absent");
            double q0 = estimate_q0(s.dirichlet);
            for (size_t i = 0; i < m; ++i)
                g[i] = canonical_product(s.mixed, -0.5, q0, s.dirichlet[i], 0);
            break;
        }
        case ScalarParam::Alpha: {
            if (s.alpha.empty()) fail(ErrorCode::ParseError, "alpha sequence absent");
            for (size_t i = 0; i < m; ++i) {
                if (!(s.alpha[i] > 0)) fail(ErrorCode::NonPositiveAlpha, "alpha must be positive");
                g[i] = s.alpha[i] / f_dot_at(s, static_cast<int>(i) + 1);
            }
            break;
        }
        case ScalarParam::Nu: {
            if (s.nu.empty()) fail(ErrorCode::ParseError, "nu sequence absent");
            for (size_t i = 0; i < m; ++i)
                g[i] = ((i + 1) % 2 ? -1.0 : 1.0) * std::exp(s.nu[i]);
            break;
        }
    }
    return g;
}

// interpolation of g from its values at the Dirichlet points:
//   g(lambda) = cos sqrt(lambda - q0)
//             + sum_n [g_n - cos sqrt(lambda_n - q0)] * f(lambda) / ((lambda - lambda_n) fdot(lambda_n))
// the basis functions are evaluated through skip-products, so no 0/0 arises
struct GInterp {
    const ScalarSpectra& s;
    double q0;
    std::vector<double> h, fdot;

    GInterp(const ScalarSpectra& sp, const std::vector<double>& g) : s(sp) {
        q0 = estimate_q0(s.dirichlet);
        size_t m = s.dirichlet.size();
        h.resize(m);
        fdot.resize(m);
        for (size_t i = 0; i < m; ++i) {
            h[i] = g[i] - cos_sqrt(s.dirichlet[i] - q0);
            fdot[i] = f_dot_at(s, static_cast<int>(i) + 1);
        }
    }

    double operator()(double lambda) const {
        double acc = cos_sqrt(lambda - q0);
        for (size_t i = 0; i < h.size(); ++i) {
            int n = static_cast<int>(i) + 1;
            double rn = canonical_product(s.dirichlet, 0.0, q0, lambda, n);
            // f(lambda) / (lambda - lambda_n) = -R_n(lambda) / (pi^2 n^2)
            acc += h[i] * (-rn / (PI2 * n * n)) / fdot[i];
        }
        return acc;
    }
};

double bisect(const std::function<double(double)>& fn, double a, double b) {
    double fa = fn(a), fb = fn(b);
    if (fa == 0) return a;
    if (fb == 0) return b;
    if (fa * fb > 0) fail(ErrorCode::InterlacingViolated, "mu bracket carries no sign change");
    for (int it = 0; it < 200; ++it) {
        double c = 0.5 * (a + b);
        double fc = fn(c);
        if (fc == 0) return c;
        if (fa * fc < 0) {
            b = c;
        } else {
            a = c;
            fa = fc;
        }
        if (b - a < 1e-13 * std::max(1.0, std::abs(b))) break;
    }
    return 0.5 * (a + b);
}

}  // namespace

ScalarSpectra convert(const ScalarSpectra& s_in, ScalarParam from, ScalarParam to) {
    ScalarSpectra s = s_in;
    s.validate();
    if (s.dirichlet.empty()) fail(ErrorCode::ParseError, "dirichlet spectrum required");
    std::vector<double> g = g_values(s, from);
    size_t m = s.dirichlet.size();
    switch (to) {
        case ScalarParam::Alpha: {
            s.alpha.resize(m);
            for (size_t i = 0; i < m; ++i) {
                s.alpha[i] = g[i] * f_dot_at(s, static_cast<int>(i) + 1);
                if (!(s.alpha[i] > 0))
                    fail(ErrorCode::NonPositiveAlpha, "derived alpha not positive");
            }
            break;
        }
        case ScalarParam::Nu: {
            s.nu.resize(m);
            for (size_t i = 0; i < m; ++i) {
                double x = ((i + 1) % 2 ? -1.0 : 1.0) * g[i];
                if (!(x > 0))
                    fail(ErrorCode::NonPositiveAlpha, "(-1)^n g(lambda_n) not positive");
                s.nu[i] = std::log(x);
            }
            break;
        }
        case ScalarParam::Mu: {
            GInterp gi(s, g);
            s.mixed.resize(m);
            // mu_1 below lambda_1
            {
                double hi = s.dirichlet[0] - 1e-9 * std::max(1.0, std::abs(s.dirichlet[0]));
                double lo = std::min(PI2 * 0.25 + gi.q0 - 10, s.dirichlet[0] - 10);
                int guard = 0;
                while (gi(lo) * gi(hi) > 0 && guard++ < 60) lo -= 10 + std::abs(lo) * 0.2;
                s.mixed[0] = bisect([&](double x) { return gi(x); }, lo, hi);
            }
            for (size_t i = 1; i < m; ++i) {
                double span = s.dirichlet[i] - s.dirichlet[i - 1];
                double lo = s.dirichlet[i - 1] + 1e-9 * span;
                double hi = s.dirichlet[i] - 1e-9 * span;
                s.mixed[i] = bisect([&](double x) { return gi(x); }, lo, hi);
            }
            break;
        }
    }
    s.validate();
    return s;
}

ScalarCharacterization check_scalar_characterization(const ScalarSpectra& s) {
    if (s.dirichlet.size() < 30) fail(ErrorCode::InsufficientShells, "need at least 30 terms");
    if (s.alpha.size() < s.dirichlet.size())
        fail(ErrorCode::ParseError, "characterization needs lambda and alpha");
    for (size_t i = 0; i + 1 < s.dirichlet.size(); ++i)
        if (!(s.dirichlet[i] < s.dirichlet[i + 1]))
            fail(ErrorCode::NotMonotone, "dirichlet spectrum must be strictly increasing");
    ScalarCharacterization out;
    out.q0 = estimate_q0(s.dirichlet);
    size_t m = s.dirichlet.size();
    std::vector<double> ns(m), seq1(m), seq2(m);
    for (size_t i = 0; i < m; ++i) {
        double n = static_cast<double>(i + 1);
        ns[i] = n;
        seq1[i] = std::abs(s.dirichlet[i] - PI2 * n * n - out.q0);
        seq2[i] = std::abs(PI * n * (2 * PI2 * n * n * s.alpha[i] - 1));
    }
    bool tiny1 = false;
    out.lambda_slope = loglog_slope(ns, seq1, 1e-10, &tiny1);
    double total = 0, half = 0;
    for (size_t i = 0; i < m; ++i) {
        total += seq2[i] * seq2[i];
        if (i < m / 2) half = total;
    }
    out.alpha_cauchy = total == 0 ? 0 : (total - half) / total;
    double s2max = *std::max_element(seq2.begin(), seq2.end());
    bool pass1 = tiny1 || out.lambda_slope <= -0.7;
    bool pass2 = s2max < 1e-8 || out.alpha_cauchy < 0.05;
    out.monotone = true;
    out.pass = pass1 && pass2;
    return out;
}

std::vector<double> discrete_hilbert(const std::vector<double>& a, HilbertKind kind,
                                     std::size_t out_len) {
    if (a.size() > 10000) fail(ErrorCode::BadKind, "dense transform limited to L <= 1e4");
    std::vector<double> b(out_len, 0.0);
    parallel_for(out_len, [&](std::size_t i) {
        double n = static_cast<double>(i + 1);
        double acc = 0;
        if (kind == HilbertKind::HalfShifted) {
            for (std::size_t t = 0; t < a.size(); ++t) {
                double mm = static_cast<double>(t + 1);
                acc += a[t] / (n - mm + 0.5) + a[t] / (n + mm - 0.5);
            }
            acc /= PI;
        } else {
            for (std::size_t t = 0; t < a.size(); ++t) {
                double mm = static_cast<double>(t + 1);
                if (mm != n) acc += a[t] / (n - mm);
                acc += a[t] / (n + mm);
            }
        }
        b[i] = acc;
    });
    return b;
}

std::vector<double> mixed_spectrum(const MatrixPotential& q, int count, const OdeConfig& ode) {
    if (q.dim() != 1) fail(ErrorCode::BadKind, "mixed_spectrum needs a scalar potential");
    double qbar = q.mean()(0, 0).real();
    double w = q.sup_op_norm();
    auto gval = [&](double lam) {
        SolutionBundle b = solve_bundle(q, lam, ode, SolveWant{}, Pass::PhiOnly);
        return b.dphi1(0, 0).real();
    };
    std::vector<double> mu(count);
    for (int n = 1; n <= count; ++n) {
        double center = PI2 * (n - 0.5) * (n - 0.5) + qbar;
        double half = w + 4;
        int guard = 0;
        while (gval(center - half) * gval(center + half) > 0 && guard++ < 8) half *= 1.6;
        mu[n - 1] = bisect(gval, center - half, center + half);
    }
    return mu;
}

}  // namespace svspec
