#include "svspec/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace svspec {

CountingContour CountingContour::disk(cplx center, double radius, int nodes) {
    CountingContour c;
    c.shape = Shape::Disk;
    c.center = center;
    c.radius = radius;
    c.nodes = std::max(nodes, 64);
    return c;
}

CountingContour CountingContour::rect(double re_lo, double re_hi, double im_lo, double im_hi,
                                      int nodes) {
    CountingContour c;
    c.shape = Shape::Rectangle;
    c.re_lo = re_lo;
    c.re_hi = re_hi;
    c.im_lo = im_lo;
    c.im_hi = im_hi;
    c.nodes = std::max(nodes, 64);
    return c;
}

namespace {

cplx contour_point(const CountingContour& c, double s) {  // s in [0,1)
    if (c.shape == CountingContour::Shape::Disk)
        return c.center + c.radius * std::exp(cplx(0, 2 * PI * s));
    // rectangle, counter-clockwise starting at lower-left
    double w = c.re_hi - c.re_lo, h = c.im_hi - c.im_lo;
    double per = 2 * (w + h), d = s * per;
    if (d < w) return cplx(c.re_lo + d, c.im_lo);
    d -= w;
    if (d < h) return cplx(c.re_hi, c.im_lo + d);
    d -= h;
    if (d < w) return cplx(c.re_hi - d, c.im_hi);
    d -= w;
    return cplx(c.re_lo, c.im_hi - d);
}

cplx det_chi(const MatrixPotential& v, cplx lambda, const OdeConfig& ode) {
    SolutionBundle b = solve_bundle(v, lambda, ode, SolveWant{}, Pass::ChiOnly);
    return det(b.chi0);
}

}  // namespace

int count_zeros(const MatrixPotential& v, const CountingContour& c, const SpectrumConfig& cfg) {
    struct Node {
        double s;
        cplx d;
    };
    std::vector<Node> nodes;
    nodes.reserve(c.nodes + 1);
    {
        std::vector<cplx> dets(c.nodes);
        parallel_for(c.nodes, [&](std::size_t i) {
            dets[i] = det_chi(v, contour_point(c, static_cast<double>(i) / c.nodes), cfg.ode);
        });
        for (int i = 0; i < c.nodes; ++i)
            nodes.push_back({static_cast<double>(i) / c.nodes, dets[i]});
    }
    nodes.push_back({1.0, nodes.front().d});  // wrap

    auto scale = [&]() {
        double m = 0;
        for (const auto& n : nodes) m = std::max(m, std::abs(n.d));
        return m;
    };
    for (int pass = 0;; ++pass) {
        double sc = scale();
        if (sc == 0) fail(ErrorCode::ZeroOnContour, "det vanished along the whole contour");
        for (const auto& n : nodes)
            if (std::abs(n.d) < cfg.det_floor_rel * sc)
                fail(ErrorCode::ZeroOnContour, "det below floor on contour node");
        // refine segments whose phase increment is >= pi/2
        std::vector<Node> refined;
        refined.reserve(nodes.size() * 2);
        bool ok = true;
        for (size_t i = 0; i + 1 < nodes.size(); ++i) {
            refined.push_back(nodes[i]);
            double dphi = std::arg(nodes[i + 1].d / nodes[i].d);
            if (std::abs(dphi) >= PI / 2) {
                ok = false;
                double smid = 0.5 * (nodes[i].s + nodes[i + 1].s);
                refined.push_back({smid, det_chi(v, contour_point(c, smid), cfg.ode)});
            }
        }
        refined.push_back(nodes.back());
        if (ok) break;
        if (static_cast<int>(refined.size()) > cfg.max_contour_nodes)
            fail(ErrorCode::ZeroOnContour, "phase tracking exceeded max contour refinement");
        nodes = std::move(refined);
    }
    double total = 0;
    for (size_t i = 0; i + 1 < nodes.size(); ++i) total += std::arg(nodes[i + 1].d / nodes[i].d);
    double winding = total / (2 * PI);
    long rounded = std::lround(winding);
    if (std::abs(winding - rounded) > 0.1)
        fail(ErrorCode::NonIntegerWinding, "winding " + std::to_string(winding) + " not near integer");
    return static_cast<int>(rounded);
}

namespace {

struct Refiner {
    const MatrixPotential& v;
    const SpectrumConfig& cfg;

    // value of |det chi| used when picking healthy window boundaries
    double abs_det(double lam) const { return std::abs(det_chi(v, lam, cfg.ode)); }

    // Newton iteration on log det chi(0,.) with multiplicity m:
    // step = m / tr(chi^{-1} chi_dot).
    double newton(double lam0, int m) const {
        cplx lam = lam0;
        SolveWant want;
        want.lambda_derivs = true;
        for (int it = 0; it < 80; ++it) {
            SolutionBundle b = solve_bundle(v, lam, cfg.ode, want, Pass::ChiOnly);
            cplx tr = (solve(b.chi0, b.chi0_dot)).trace();
            if (tr == cplx(0, 0)) break;
            cplx step = static_cast<double>(m) / tr;
            lam -= step;
            if (std::abs(step) < cfg.newton_tol * std::max(1.0, std::abs(lam))) break;
        }
        if (std::abs(lam.imag()) > 1e-9 * std::max(1.0, std::abs(lam)))
            fail(ErrorCode::CountMismatch,
                 "refined root stayed away from the real axis (self-adjoint problem)");
        return lam.real();
    }
};

// Scale against which kernel singular values are judged. ||phi(1,.)|| itself
// collapses at a full-multiplicity eigenvalue, so mix in the free-solution
// magnitude 1/|z|.
double phi_scale(double sigma_max, double lambda) {
    return std::max(sigma_max, 1.0 / std::max(1.0, std::sqrt(std::abs(lambda))));
}

EigenLocation make_location(const MatrixPotential& v, double lambda, const SpectrumConfig& cfg,
                            bool certified) {
    SolutionBundle b = solve_bundle(v, lambda, cfg.ode, SolveWant{}, Pass::PhiOnly);
    Svd s = svd(b.phi1);
    double smax = s.sigma.empty() ? 0 : s.sigma.front();
    int k = 0;
    for (double sv : s.sigma)
        if (sv < cfg.sv_threshold * phi_scale(smax, lambda)) ++k;
    EigenLocation loc;
    loc.lambda = lambda;
    loc.multiplicity = std::max(1, k);
    loc.certified_count = certified;
    loc.residual = s.sigma.empty() ? 0 : s.sigma.back();
    return loc;
}

// Certify the count inside (a,b) by the argument principle, then account for it
// with refined roots. Seeds come from the shell structure; quantile seeds and
// window subdivision cover windows where the structural guesses miss.
void certify_interval(const MatrixPotential& v, double a, double b, const SpectrumConfig& cfg,
                      const Refiner& ref, int depth, const std::vector<double>& hints,
                      std::vector<EigenLocation>& out) {
    // contour height keeps Im sqrt(lambda) near 1/2 along the horizontal runs,
    // so the phase of det chi stays resolvable by the adaptive node refinement
    double height = std::sqrt(std::max(1.0, std::max(std::abs(a), std::abs(b))));
    CountingContour c = CountingContour::rect(a, b, -height, height);
    int count = count_zeros(v, c, cfg);
    if (count == 0) return;

    std::vector<double> seeds;
    for (double h : hints)
        if (h > a && h < b) seeds.push_back(h);
    for (int i = 0; i < count + 1; ++i)
        seeds.push_back(a + (b - a) * (i + 0.5) / (count + 1));

    std::vector<double> roots;
    double dedupe = 1e-8 * std::max(1.0, std::abs(b));
    for (double s : seeds) {
        double lam;
        try {
            lam = ref.newton(s, 1);
        } catch (const Error&) {
            continue;  // diverged seed
        }
        if (lam <= a || lam >= b) continue;
        bool dup = false;
        for (double r : roots)
            if (std::abs(r - lam) < dedupe) { dup = true; break; }
        if (!dup) roots.push_back(lam);
        if (static_cast<int>(roots.size()) == count) break;  // cannot exceed the certified count
    }
    std::sort(roots.begin(), roots.end());

    int total = 0;
    std::vector<EigenLocation> locs;
    for (double r : roots) {
        EigenLocation loc = make_location(v, r, cfg, true);
        total += loc.multiplicity;
        locs.push_back(loc);
    }
    if (total == count) {
        for (auto& l : locs) out.push_back(l);
        return;
    }
    // roots unaccounted for: subdivide at a healthy point and retry
    double width = b - a;
    if (depth > 40 || width < 1e-7 * std::max(1.0, std::abs(a))) {
        std::ostringstream os;
        os << "window (" << a << ", " << b << ") certified " << count
           << " roots but refinement accounts for " << total;
        fail(ErrorCode::CountMismatch, os.str());
    }
    double best = 0.5 * (a + b), bestval = -1;
    for (double frac : {0.5, 0.4, 0.6, 0.3, 0.7, 0.45, 0.55}) {
        double cand = a + frac * width;
        bool nearroot = false;
        for (double r : roots)
            if (std::abs(r - cand) < 0.05 * width) nearroot = true;
        if (nearroot) continue;
        double val = ref.abs_det(cand);
        if (val > bestval) {
            bestval = val;
            best = cand;
        }
        if (bestval > 0 && frac == 0.5) break;
    }
    certify_interval(v, a, best, cfg, ref, depth + 1, hints, out);
    certify_interval(v, best, b, cfg, ref, depth + 1, hints, out);
}

}  // namespace

std::vector<EigenLocation> locate_all(const MatrixPotential& v, double lambda_max,
                                      const SpectrumConfig& cfg) {
    double w = v.sup_op_norm();
    double lo = -w - 1;  // spectrum bounded below by pi^2 - w > lo
    Refiner ref{v, cfg};

    // structural seeds pi^2 n^2 + v_j from the eigenvalues of the mean
    // (no distinctness requirement here, unlike diagonalize_mean)
    std::vector<double> vseeds = herm_eig(v.fourier_coefficient(MatrixPotential::CoefKind::Mean, 0)).values;
    double vbar = 0;
    for (double x : vseeds) vbar += x / vseeds.size();
    std::vector<double> hints;
    for (int n = 1; PI2 * n * n - w <= lambda_max; ++n)
        for (double vj : vseeds) hints.push_back(PI2 * n * n + vj);

    // shell-midpoint partition of (lo, lambda_max]; boundaries nudged off roots
    std::vector<double> bounds;
    bounds.push_back(lo);
    for (int n = 1;; ++n) {
        double bnd = PI2 * (n + 0.5) * (n + 0.5) + vbar;
        if (bnd >= lambda_max) break;
        if (bnd - bounds.back() < 1) continue;
        bounds.push_back(bnd);
    }
    bounds.push_back(lambda_max);
    // health check: boundary must be away from eigenvalues (sigma ratio of chi0)
    parallel_for(bounds.size(), [&](std::size_t i) {
        if (i == 0) return;  // lo is strictly below the spectrum
        double span = 0.1 * std::sqrt(std::max(1.0, bounds[i]));
        for (double off : {0.0, 0.37, -0.41, 0.83, -0.79, 1.31}) {
            double cand = bounds[i] + off * span;
            SolutionBundle b = solve_bundle(v, cand, cfg.ode, SolveWant{}, Pass::ChiOnly);
            if (cond_number(b.chi0) < 1e9) {
                bounds[i] = cand;
                return;
            }
        }
        fail(ErrorCode::ZeroOnContour, "no healthy window boundary near " + std::to_string(bounds[i]));
    });

    std::vector<std::vector<EigenLocation>> window_roots(bounds.size() - 1);
    parallel_for(bounds.size() - 1, [&](std::size_t i) {
        std::vector<EigenLocation> local;
        certify_interval(v, bounds[i], bounds[i + 1], cfg, ref, 0, hints, local);
        window_roots[i] = std::move(local);
    });
    std::vector<EigenLocation> out;
    for (auto& wr : window_roots)
        for (auto& r : wr)
            if (r.lambda <= lambda_max) out.push_back(r);
    std::sort(out.begin(), out.end(),
              [](const EigenLocation& x, const EigenLocation& y) { return x.lambda < y.lambda; });
    return out;
}

std::pair<int, Mat> multiplicity(const MatrixPotential& v, double lambda,
                                 const SpectrumConfig& cfg) {
    SolutionBundle b = solve_bundle(v, lambda, cfg.ode, SolveWant{}, Pass::PhiOnly);
    Svd s = svd(b.phi1);
    double smax = s.sigma.empty() ? 0 : s.sigma.front();
    int n = v.dim();
    int k = 0;
    for (double sv : s.sigma)
        if (sv < cfg.sv_threshold * phi_scale(smax, lambda)) ++k;
    if (k == 0)
        fail(ErrorCode::NotAnEigenvalue,
             "no singular value of phi(1,lambda) below threshold at lambda=" + std::to_string(lambda));
    // kernel basis: right singular vectors for the k smallest singular values
    Mat basis = s.v.block(0, n - k, n, k);
    return {k, basis};
}

}  // namespace svspec
