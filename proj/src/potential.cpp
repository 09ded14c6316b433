#include "svspec/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace svspec {

using nlohmann::ordered_json;

MatrixPotential MatrixPotential::zero(int dim) {
    MatrixPotential v;
    v.dim_ = dim;
    v.repr_ = Repr::Fourier;
    v.mean_ = Mat::zeros(dim, dim);
    return v;
}

MatrixPotential MatrixPotential::constant(const Mat& m, bool hermitian) {
    MatrixPotential v;
    v.dim_ = m.rows();
    v.repr_ = Repr::Fourier;
    v.hermitian_ = hermitian;
    v.mean_ = m;
    v.check_hermitian();
    return v;
}

MatrixPotential MatrixPotential::fourier(Mat mean, std::vector<Harmonic> cos_h,
                                         std::vector<Harmonic> sin_h, bool hermitian) {
    MatrixPotential v;
    v.dim_ = mean.rows();
    v.repr_ = Repr::Fourier;
    v.hermitian_ = hermitian;
    v.mean_ = std::move(mean);
    v.cos_ = std::move(cos_h);
    v.sin_ = std::move(sin_h);
    for (const auto& h : v.cos_)
        if (h.n < 1) fail(ErrorCode::ParseError, "cos harmonic index must be >= 1");
    for (const auto& h : v.sin_)
        if (h.n < 1) fail(ErrorCode::ParseError, "sin harmonic index must be >= 1");
    v.check_hermitian();
    return v;
}

MatrixPotential MatrixPotential::grid(std::vector<Mat> samples, bool hermitian) {
    if (samples.size() < 65)
        fail(ErrorCode::ParseError, "grid representation needs M >= 64 samples");
    MatrixPotential v;
    v.dim_ = samples.front().rows();
    v.repr_ = Repr::Grid;
    v.hermitian_ = hermitian;
    v.samples_ = std::move(samples);
    v.check_hermitian();
    return v;
}

MatrixPotential MatrixPotential::scalar_fourier(double mean, const std::vector<double>& cs,
                                                const std::vector<double>& sn) {
    Mat m0(1, 1);
    m0(0, 0) = mean;
    std::vector<Harmonic> ch, sh;
    for (size_t i = 0; i < cs.size(); ++i) {
        if (cs[i] == 0) continue;
        Mat m(1, 1);
        m(0, 0) = cs[i];
        ch.push_back({static_cast<int>(i) + 1, m});
    }
    for (size_t i = 0; i < sn.size(); ++i) {
        if (sn[i] == 0) continue;
        Mat m(1, 1);
        m(0, 0) = sn[i];
        sh.push_back({static_cast<int>(i) + 1, m});
    }
    return fourier(m0, std::move(ch), std::move(sh));
}

void MatrixPotential::check_hermitian() const {
    if (!hermitian_) return;
    auto check = [](const Mat& m, const std::string& where) {
        double worst = 0;
        if (!m.is_hermitian(TOL_HERM, &worst)) {
            std::ostringstream os;
            os << where << " violates Hermiticity, worst entry deviation " << worst;
            fail(ErrorCode::NotHermitian, os.str());
        }
    };
    if (repr_ == Repr::Fourier) {
        check(mean_, "mean matrix");
        for (const auto& h : cos_) check(h.m, "cos harmonic n=" + std::to_string(h.n));
        for (const auto& h : sin_) check(h.m, "sin harmonic n=" + std::to_string(h.n));
    } else {
        for (size_t i = 0; i < samples_.size(); ++i)
            check(samples_[i], "grid sample " + std::to_string(i));
    }
}

Mat MatrixPotential::evaluate(double x) const {
    Mat v(dim_, dim_);
    evaluate_into(x, v);
    return v;
}

void MatrixPotential::evaluate_into(double x, Mat& out) const {
    if (x < -1e-12 || x > 1 + 1e-12)
        fail(ErrorCode::OutOfDomain, "x must lie in [0,1]");
    x = std::min(1.0, std::max(0.0, x));
    if (out.rows() != dim_ || out.cols() != dim_) out = Mat(dim_, dim_);
    const int nn = dim_ * dim_;
    cplx* o = out.data();
    if (repr_ == Repr::Fourier) {
        const cplx* m0 = mean_.data();
        for (int i = 0; i < nn; ++i) o[i] = m0[i];
        for (const auto& h : cos_) {
            double w = 2 * std::cos(2 * PI * h.n * x);
            const cplx* hm = h.m.data();
            for (int i = 0; i < nn; ++i) o[i] += w * hm[i];
        }
        for (const auto& h : sin_) {
            double w = 2 * std::sin(2 * PI * h.n * x);
            const cplx* hm = h.m.data();
            for (int i = 0; i < nn; ++i) o[i] += w * hm[i];
        }
        return;
    }
    // cubic 4-point Lagrange on the uniform grid
    int m = static_cast<int>(samples_.size()) - 1;
    double u = x * m;
    int i1 = static_cast<int>(std::floor(u));
    i1 = std::min(std::max(i1, 1), m - 2);
    int i0 = i1 - 1;
    double t = u - i1;  // in [-1, 2] near the clamped ends, [0,1] inside
    double w[4] = {-t * (t - 1) * (t - 2) / 6.0, (t + 1) * (t - 1) * (t - 2) / 2.0,
                   -(t + 1) * t * (t - 2) / 2.0, (t + 1) * t * (t - 1) / 6.0};
    for (int i = 0; i < nn; ++i)
        o[i] = w[0] * samples_[i0].data()[i] + w[1] * samples_[i0 + 1].data()[i] +
               w[2] * samples_[i0 + 2].data()[i] + w[3] * samples_[i0 + 3].data()[i];
}

namespace {
// int_0^1 (1-t) sin(2 pi k t) dt, signed in k; zero for k = 0
double weighted_sin_moment(int k) {
    if (k == 0) return 0.0;
    return 1.0 / (2 * PI * k);
}
}  // namespace

Mat MatrixPotential::fourier_coefficient(CoefKind kind, int n) const {
    if (kind != CoefKind::Mean && n < 1)
        fail(ErrorCode::BadKind, "harmonic index must be >= 1");
    if (repr_ == Repr::Fourier) {
        switch (kind) {
            case CoefKind::Mean:
                return mean_;
            case CoefKind::Cos:
                for (const auto& h : cos_)
                    if (h.n == n) return h.m;
                return Mat::zeros(dim_, dim_);
            case CoefKind::Sin:
                for (const auto& h : sin_)
                    if (h.n == n) return h.m;
                return Mat::zeros(dim_, dim_);
            case CoefKind::WeightedSin: {
                // int (1-t) V(t) sin(2 pi n t) dt, term by term:
                // mean:        V0 * I1(n)
                // 2 Vc_m cos:  Vc_m * (I1(m+n) - I1(m-n))
                // 2 Vs_m sin:  Vs_m * (I2(m-n) - I2(m+n)), I2(0)=1/2, I2(k!=0)=0
                Mat w = mean_ * weighted_sin_moment(n);
                for (const auto& h : cos_)
                    w += h.m * (weighted_sin_moment(h.n + n) - weighted_sin_moment(h.n - n));
                for (const auto& h : sin_)
                    if (h.n == n) w += h.m * 0.5;
                return w;
            }
        }
        fail(ErrorCode::BadKind, "unknown coefficient kind");
    }
    // grid representation: composite Gauss-Legendre, panel order 8, M/8 panels
    int m = static_cast<int>(samples_.size()) - 1;
    int panels = std::max(8, m / 8);
    std::vector<double> gx, gw;
    gauss_legendre(8, gx, gw);
    Mat acc = Mat::zeros(dim_, dim_);
    double h = 1.0 / panels;
    for (int p = 0; p < panels; ++p) {
        double a = p * h;
        for (size_t q = 0; q < gx.size(); ++q) {
            double t = a + h * gx[q];
            double weight = h * gw[q];
            double phase;
            switch (kind) {
                case CoefKind::Mean: phase = 1.0; break;
                case CoefKind::Cos: phase = std::cos(2 * PI * n * t); break;
                case CoefKind::Sin: phase = std::sin(2 * PI * n * t); break;
                case CoefKind::WeightedSin: phase = (1 - t) * std::sin(2 * PI * n * t); break;
                default: fail(ErrorCode::BadKind, "unknown coefficient kind");
            }
            acc += evaluate(t) * (weight * phase);
        }
    }
    return acc;
}

MatrixPotential MatrixPotential::reflect() const {
    MatrixPotential v = *this;
    if (repr_ == Repr::Fourier) {
        for (auto& h : v.sin_) h.m = -h.m;
    } else {
        std::reverse(v.samples_.begin(), v.samples_.end());
    }
    return v;
}

MatrixPotential MatrixPotential::conjugated(const Mat& u) const {
    MatrixPotential v = *this;
    Mat uh = u.adjoint();
    auto tr = [&](Mat& m) { m = uh * m * u; };
    tr(v.mean_);
    for (auto& h : v.cos_) tr(h.m);
    for (auto& h : v.sin_) tr(h.m);
    for (auto& s : v.samples_) tr(s);
    return v;
}

MatrixPotential MatrixPotential::shifted(double c) const {
    MatrixPotential v = *this;
    Mat ci = Mat::identity(dim_) * c;
    if (repr_ == Repr::Fourier) {
        v.mean_ += ci;
    } else {
        for (auto& s : v.samples_) s += ci;
    }
    return v;
}

MatrixPotential MatrixPotential::scaled(double s) const {
    MatrixPotential v = *this;
    v.mean_ = v.mean_ * s;
    for (auto& h : v.cos_) h.m = h.m * s;
    for (auto& h : v.sin_) h.m = h.m * s;
    for (auto& g : v.samples_) g = g * s;
    return v;
}

MatrixPotential MatrixPotential::plus(const MatrixPotential& w) const {
    if (repr_ != Repr::Fourier || w.repr_ != Repr::Fourier)
        fail(ErrorCode::BadKind, "plus() requires Fourier representations");
    if (dim_ != w.dim_) fail(ErrorCode::BadKind, "dimension mismatch in plus()");
    MatrixPotential v = *this;
    v.hermitian_ = hermitian_ && w.hermitian_;
    v.mean_ += w.mean_;
    auto merge = [](std::vector<Harmonic>& into, const std::vector<Harmonic>& from) {
        for (const auto& h : from) {
            bool found = false;
            for (auto& g : into)
                if (g.n == h.n) { g.m += h.m; found = true; break; }
            if (!found) into.push_back(h);
        }
        std::sort(into.begin(), into.end(), [](const Harmonic& a, const Harmonic& b) { return a.n < b.n; });
    };
    merge(v.cos_, w.cos_);
    merge(v.sin_, w.sin_);
    return v;
}

MatrixPotential MatrixPotential::diagonal_channel(int j) const {
    if (repr_ != Repr::Fourier) fail(ErrorCode::BadKind, "diagonal_channel() needs Fourier repr");
    Mat m0(1, 1);
    m0(0, 0) = mean_(j, j);
    std::vector<Harmonic> ch, sh;
    for (const auto& h : cos_) {
        Mat m(1, 1);
        m(0, 0) = h.m(j, j);
        ch.push_back({h.n, m});
    }
    for (const auto& h : sin_) {
        Mat m(1, 1);
        m(0, 0) = h.m(j, j);
        sh.push_back({h.n, m});
    }
    return fourier(m0, std::move(ch), std::move(sh), hermitian_);
}

double MatrixPotential::sup_op_norm() const {
    int probes = repr_ == Repr::Grid ? static_cast<int>(samples_.size()) - 1 : 512;
    double s = 0;
    for (int i = 0; i <= probes; ++i) s = std::max(s, op_norm(evaluate(static_cast<double>(i) / probes)));
    return s;
}

DiagonalizedPotential diagonalize_mean(const MatrixPotential& v, double gap_min) {
    Mat mean = v.fourier_coefficient(MatrixPotential::CoefKind::Mean, 0);
    HermEig e = herm_eig(mean);
    for (size_t i = 0; i + 1 < e.values.size(); ++i)
        if (e.values[i + 1] - e.values[i] < gap_min) {
            std::ostringstream os;
            os << "mean eigenvalues " << e.values[i] << " and " << e.values[i + 1]
               << " closer than gap_min=" << gap_min;
            fail(ErrorCode::DegenerateMean, os.str());
        }
    DiagonalizedPotential d;
    d.unitary = e.vectors;
    d.v0 = e.values;
    d.potential = v.conjugated(e.vectors);
    return d;
}

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes (on [0,1]) by Newton iteration on P_n

void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(order);
    weights.resize(order);
    for (int i = 0; i < (order + 1) / 2; ++i) {
        double x = std::cos(PI * (i + 0.75) / (order + 0.5));
        double pp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = x;
            for (int k = 2; k <= order; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = order * (x * p1 - p0) / (x * x - 1);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = (1 - x) / 2;
        nodes[order - 1 - i] = (1 + x) / 2;
        double w = 1.0 / ((1 - x * x) * pp * pp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
}

// ---------------------------------------------------------------------------
// JSON I/O

namespace {
cplx parse_entry(const ordered_json& e) {
    if (e.is_number()) return cplx(e.get<double>(), 0.0);
    if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
        return cplx(e[0].get<double>(), e[1].get<double>());
    fail(ErrorCode::ParseError, "matrix entry must be a number or an [re,im] pair");
}

Mat parse_matrix(const ordered_json& j, int n) {
    if (!j.is_array() || static_cast<int>(j.size()) != n)
        fail(ErrorCode::ParseError, "matrix must be an array of N rows");
    Mat m(n, n);
    for (int i = 0; i < n; ++i) {
        const auto& row = j[i];
        if (!row.is_array() || static_cast<int>(row.size()) != n)
            fail(ErrorCode::ParseError, "matrix row has wrong length");
        for (int k = 0; k < n; ++k) m(i, k) = parse_entry(row[k]);
    }
    return m;
}

ordered_json dump_matrix(const Mat& m) {
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (int j = 0; j < m.cols(); ++j)
            row.push_back(ordered_json::array({m(i, j).real(), m(i, j).imag()}));
        rows.push_back(row);
    }
    return rows;
}
}  // namespace

MatrixPotential potential_from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& ex) {
        fail(ErrorCode::ParseError, std::string("invalid JSON: ") + ex.what());
    }
    if (!j.contains("N") || !j["N"].is_number_integer())
        fail(ErrorCode::ParseError, "missing integer field N");
    int n = j["N"].get<int>();
    if (n < 1 || n > 64) fail(ErrorCode::ParseError, "N out of range");
    std::string repr = j.value("repr", std::string("fourier"));
    if (repr == "fourier") {
        Mat mean = j.contains("mean") ? parse_matrix(j["mean"], n) : Mat::zeros(n, n);
        std::vector<Harmonic> ch, sh;
        auto parse_harm = [&](const char* key, std::vector<Harmonic>& out) {
            if (!j.contains(key)) return;
            for (const auto& h : j[key]) {
                if (!h.contains("n") || !h.contains("M"))
                    fail(ErrorCode::ParseError, "harmonic needs fields n and M");
                out.push_back({h["n"].get<int>(), parse_matrix(h["M"], n)});
            }
        };
        parse_harm("cos", ch);
        parse_harm("sin", sh);
        return MatrixPotential::fourier(std::move(mean), std::move(ch), std::move(sh));
    }
    if (repr == "grid") {
        if (!j.contains("grid")) fail(ErrorCode::ParseError, "missing grid object");
        const auto& g = j["grid"];
        int m = g.value("M", 0);
        if (!g.contains("samples")) fail(ErrorCode::ParseError, "missing grid.samples");
        const auto& s = g["samples"];
        if (static_cast<int>(s.size()) != m + 1)
            fail(ErrorCode::ParseError, "grid.samples must hold M+1 matrices");
        std::vector<Mat> samples;
        samples.reserve(s.size());
        for (const auto& e : s) samples.push_back(parse_matrix(e, n));
        return MatrixPotential::grid(std::move(samples));
    }
    fail(ErrorCode::ParseError, "repr must be 'fourier' or 'grid'");
}

std::string potential_to_json_text(const MatrixPotential& v) {
    ordered_json j;
    j["N"] = v.dim();
    if (v.repr() == MatrixPotential::Repr::Fourier) {
        j["repr"] = "fourier";
        j["mean"] = dump_matrix(v.mean());
        ordered_json ch = ordered_json::array(), sh = ordered_json::array();
        for (const auto& h : v.cos_harmonics())
            ch.push_back(ordered_json{{"n", h.n}, {"M", dump_matrix(h.m)}});
        for (const auto& h : v.sin_harmonics())
            sh.push_back(ordered_json{{"n", h.n}, {"M", dump_matrix(h.m)}});
        j["cos"] = ch;
        j["sin"] = sh;
    } else {
        int m = v.grid_size();
        j["repr"] = "grid";
        ordered_json samples = ordered_json::array();
        for (int i = 0; i <= m; ++i) samples.push_back(dump_matrix(v.evaluate(static_cast<double>(i) / m)));
        j["grid"] = ordered_json{{"M", m}, {"samples", samples}};
    }
    return j.dump(2);
}

MatrixPotential load_potential(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(ErrorCode::ParseError, "cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return potential_from_json_text(ss.str());
}

void save_potential(const MatrixPotential& v, const std::string& path) {
    std::ofstream f(path);
    if (!f) fail(ErrorCode::ParseError, "cannot write " + path);
    f << potential_to_json_text(v) << "\n";
}

}  // namespace svspec
