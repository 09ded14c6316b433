// svspec: spectral direct/inverse toolkit for vector-valued Sturm-Liouville
// operators -psi'' + V(x) psi on [0,1] with Dirichlet boundary conditions.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "svspec/inversekit.hpp"
#include "svspec/json_io.hpp"
#include "svspec/scalartools.hpp"

using namespace svspec;
using nlohmann::ordered_json;

namespace {

int exit_code_for(ErrorCode c) {
    switch (c) {
        case ErrorCode::ParseError:
        case ErrorCode::NotHermitian:
            return 1;
        case ErrorCode::CountMismatch:
        case ErrorCode::NonIntegerWinding:
        case ErrorCode::IndexingAmbiguous:
            return 2;
        case ErrorCode::InsufficientShells:
        case ErrorCode::ProductNotConverged:
            return 3;
        case ErrorCode::NotMonotone:
        case ErrorCode::InterlacingViolated:
        case ErrorCode::NonPositiveAlpha:
            return 4;
        case ErrorCode::StepLimitExceeded:
        case ErrorCode::ToleranceNotMet:
        case ErrorCode::Internal:
            return 6;
        default:
            return 5;  // domain/validation guards
    }
}

struct GlobalOpts {
    double rel_tol = 1e-10;
    int threads = 0;
    std::uint64_t seed = 1;
    std::string out;
    std::string format = "json";
};

void emit(const GlobalOpts& g, const std::string& text) {
    if (g.out.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << "\n";
    } else {
        write_text_file(g.out, text.back() == '\n' ? text : text + "\n");
    }
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

Mat parse_matrix_json(const ordered_json& j) {
    int rows = static_cast<int>(j.size());
    int cols = rows ? static_cast<int>(j[0].size()) : 0;
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int k = 0; k < cols; ++k) {
            const auto& e = j[i][k];
            m(i, k) = e.is_number() ? cplx(e.get<double>(), 0)
                                    : cplx(e[0].get<double>(), e[1].get<double>());
        }
    return m;
}

// ---------------------------------------------------------------------------
// spectrum

int cmd_spectrum(const GlobalOpts& g, const std::string& path, double lmax) {
    MatrixPotential v = load_potential(path);
    SpectrumConfig cfg;
    cfg.ode.rel_tol = g.rel_tol;
    std::vector<double> v0;
    MatrixPotential work = v;
    if (v.dim() == 1) {
        v0 = {v.fourier_coefficient(MatrixPotential::CoefKind::Mean, 0)(0, 0).real()};
    } else {
        DiagonalizedPotential d = diagonalize_mean(v);
        work = d.potential;
        v0 = d.v0;
    }
    SpectralDataset ds = assemble_dataset(work, v0, lmax, cfg);
    std::string text;
    if (ds.max_shell() - ds.n_diamond + 1 >= 20) {
        TailDiagnostics tails = check_condition_B(ds);
        text = dataset_to_json_text(ds, &tails);
    } else {
        text = dataset_to_json_text(ds);
    }
    emit(g, text);
    return 0;
}

// ---------------------------------------------------------------------------
// mfun

struct LambdaGrid {
    double lo = 0, hi = 0;
    int count = 0;
};

LambdaGrid parse_grid(const std::string& s) {
    LambdaGrid gr;
    char c1, c2;
    std::istringstream is(s);
    if (!(is >> gr.lo >> c1 >> gr.hi >> c2 >> gr.count) || c1 != ':' || c2 != ':' || gr.count < 1)
        fail(ErrorCode::ParseError, "--lambda-grid expects lo:hi:count");
    return gr;
}

int cmd_mfun(const GlobalOpts& g, const std::string& path, const std::string& grid_spec,
             const std::string& mode, const std::string& dataset_path, int n_max) {
    LambdaGrid grid = parse_grid(grid_spec);
    OdeConfig ode;
    ode.rel_tol = g.rel_tol;

    std::string text = read_text_file(path);
    bool is_dataset = text.find("\"records\"") != std::string::npos;
    std::optional<MatrixPotential> pot;
    std::optional<SpectralDataset> ds;
    if (is_dataset)
        ds = dataset_from_json_text(text);
    else
        pot = potential_from_json_text(text);
    if (!dataset_path.empty()) ds = load_dataset(dataset_path);

    bool want_direct = mode == "direct" || mode == "compare";
    bool want_series = mode == "series" || mode == "compare";
    if (!want_direct && !want_series)
        fail(ErrorCode::ParseError, "--mode must be direct, series or compare");
    if (want_direct && !pot) fail(ErrorCode::ParseError, "direct mode needs a potential file");
    if (want_series && !ds) {
        // build the dataset from the potential
        MatrixPotential work = *pot;
        std::vector<double> v0;
        if (pot->dim() == 1) {
            v0 = {pot->fourier_coefficient(MatrixPotential::CoefKind::Mean, 0)(0, 0).real()};
        } else {
            DiagonalizedPotential d = diagonalize_mean(*pot);
            work = d.potential;
            v0 = d.v0;
        }
        SpectrumConfig cfg;
        cfg.ode = ode;
        ds = assemble_dataset(work, v0, PI2 * (n_max + 0.5) * (n_max + 0.5), cfg);
        pot = work;  // direct side evaluated in the rotated frame as well
    }

    int n = ds ? ds->N : pot->dim();
    std::ostringstream os;
    os.precision(17);
    os << "lambda,status";
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) os << ",M" << i << j << "_re,M" << i << j << "_im";
    if (mode == "compare") os << ",gap";
    os << "\n";
    for (int kk = 0; kk < grid.count; ++kk) {
        double lam = grid.count == 1 ? grid.lo
                                     : grid.lo + (grid.hi - grid.lo) * kk / (grid.count - 1);
        Mat md, ms;
        try {
            if (want_direct) md = evaluate_M(*pot, lam, ode).m;
            if (want_series) {
                SeriesConfig sc;
                sc.n_max = n_max;
                ms = reconstruct_M(*ds, lam, sc).m;
            }
        } catch (const Error& e) {
            if (e.code() == ErrorCode::NearPole) {
                os << lam << ",nearpole";
                for (int i = 0; i < n * n; ++i) os << ",,";
                if (mode == "compare") os << ",";
                os << "\n";
                continue;
            }
            throw;
        }
        const Mat& show = want_direct ? md : ms;
        os << lam << ",ok";
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) os << "," << show(i, j).real() << "," << show(i, j).imag();
        if (mode == "compare") os << "," << (md - ms).max_abs();
        os << "\n";
    }
    emit(g, os.str());
    return 0;
}

// ---------------------------------------------------------------------------
// check

int cmd_check(const GlobalOpts& g, const std::string& path, const std::string& which,
              const std::string& potential_path) {
    SpectralDataset ds = load_dataset(path);
    ordered_json rep;
    rep["command"] = "check";
    rep["which"] = which;
    rep["seed"] = g.seed;
    if (which == "A") {
        // structural condition: multiplicities sum correctly and the index map
        // covers every shell bijectively
        int consumed = 0;
        for (int a = 0; a < ds.alpha_diamond; ++a) consumed += ds.records[a].k;
        bool ok = consumed == ds.N * (ds.n_diamond - 1);
        int nmax = ds.max_shell();
        for (int nn = ds.n_diamond; nn <= nmax && ok; ++nn)
            for (int j = 1; j <= ds.N && ok; ++j) {
                int hits = 0;
                for (const auto& r : ds.records)
                    if (r.index && r.index->first == nn && r.index->second == j) ++hits;
                if (hits != 1) ok = false;
            }
        rep["alpha_diamond"] = ds.alpha_diamond;
        rep["n_diamond"] = ds.n_diamond;
        rep["pass"] = ok;
    } else if (which == "B") {
        TailDiagnostics t = check_condition_B(ds);
        rep["a_slope"] = t.a_slope;
        rep["c_slope"] = t.c_slope;
        rep["b_cauchy"] = t.b_cauchy;
        rep["d_cauchy"] = t.d_cauchy;
        rep["a"] = t.a_seq;
        rep["b"] = t.b_seq;
        rep["c"] = t.c_seq;
        rep["d"] = t.d_seq;
        rep["pass"] = t.pass();
    } else if (which == "equiv") {
        EquivalenceReport e = projector_equivalence(ds);
        rep["ratio_lo"] = e.ratio_lo;
        rep["ratio_hi"] = e.ratio_hi;
        rep["sum_proj_err"] = e.sum_proj_err;
        rep["cross_inner"] = e.cross_inner;
        rep["bn_err"] = e.bn_err;
        rep["hn_gram_err"] = e.hn_gram_err;
        rep["pass"] = e.bounded;
    } else if (which == "Bn") {
        if (potential_path.empty())
            fail(ErrorCode::ParseError, "check --which Bn needs --potential");
        MatrixPotential v = load_potential(potential_path);
        if (v.dim() > 1) v = diagonalize_mean(v).potential;
        std::vector<int> ns;
        for (int nn = std::max(ds.n_diamond, 10); nn <= ds.max_shell(); ++nn) ns.push_back(nn);
        BnAsymptoteReport b = check_Bn_asymptote(v, ds, ns);
        rep["exponent"] = b.exponent;
        rep["r"] = b.r;
        rep["pass"] = b.pass;
    } else {
        fail(ErrorCode::ParseError, "--which must be A, B, equiv or Bn");
    }
    emit(g, rep.dump(2));
    return rep["pass"].get<bool>() ? 0 : 2;
}

// ---------------------------------------------------------------------------
// inverse

ReferenceFrame load_frame(const std::string& path, const GlobalOpts& g, int shells_override) {
    ordered_json j;
    try {
        j = ordered_json::parse(read_text_file(path));
    } catch (const Error&) {
        throw;
    } catch (const std::exception& ex) {
        fail(ErrorCode::ParseError, std::string("invalid frame JSON: ") + ex.what());
    }
    if (!j.contains("channels")) fail(ErrorCode::ParseError, "frame JSON needs channels");
    std::vector<MatrixPotential> ch;
    for (const auto& c : j["channels"]) ch.push_back(potential_from_json_text(c.dump()));
    int shells = shells_override > 0 ? shells_override : j.value("shells", 12);
    FrameConfig fc;
    fc.spectrum.ode.rel_tol = g.rel_tol;
    return make_reference(ch, shells, fc);
}

MatrixPotential random_direction_seeded(Rng& rng, int n, int harmonics) {
    std::vector<Harmonic> ch, sh;
    for (int h = 1; h <= harmonics; ++h) {
        Mat mc(n, n), ms(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                cplx zc = i == j ? cplx(rng.uniform(-1, 1), 0)
                                 : cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
                cplx zs = i == j ? cplx(rng.uniform(-1, 1), 0)
                                 : cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
                mc(i, j) = zc;
                mc(j, i) = std::conj(zc);
                ms(i, j) = zs;
                ms(j, i) = std::conj(zs);
            }
        ch.push_back({h, mc});
        sh.push_back({h, ms});
    }
    return MatrixPotential::fourier(Mat::zeros(n, n), ch, sh);
}

int cmd_inverse(const GlobalOpts& g, const std::string& frame_path, const std::string& task,
                const std::string& potential_path, const std::string& condc_path,
                int shells_override, int level, int chan_j, int chan_k) {
    InverseConfig cfg;
    cfg.ode.rel_tol = g.rel_tol;
    ordered_json rep;
    rep["command"] = "inverse";
    rep["task"] = task;
    rep["seed"] = g.seed;

    if (task == "condC" && frame_path.empty()) {
        // fully synthetic input
        if (condc_path.empty()) fail(ErrorCode::ParseError, "condC needs --condc or --frame");
        ordered_json j = ordered_json::parse(read_text_file(condc_path));
        CondCInput in;
        in.v0 = j.at("v0").get<std::vector<double>>();
        in.retained = j.at("retained").get<std::vector<std::vector<double>>>();
        for (const auto& e : j.at("exceptional")) {
            in.exc_lambda.push_back(e.at("lambda").get<double>());
            in.exc_proj.push_back(parse_matrix_json(e.at("P")));
        }
        CondCResult r = condition_C_finite(in);
        rep["T"] = dump_matrix(r.t);
        rep["min_eig"] = r.min_eig;
        rep["verdict"] = r.holds ? "holds" : "fails";
        emit(g, rep.dump(2));
        return 0;
    }

    ReferenceFrame frame = load_frame(frame_path, g, shells_override);
    if (task == "tildes") {
        MatrixPotential v =
            potential_path.empty() ? frame.v_diamond : load_potential(potential_path);
        ordered_json arr = ordered_json::array();
        for (size_t lv = 0; lv < frame.levels.size(); ++lv) {
            ordered_json e;
            e["lambda"] = frame.levels[lv].lambda;
            e["A_tilde"] = dump_matrix(tilde_A(frame, v, static_cast<int>(lv), cfg));
            e["B_tilde"] = dump_matrix(tilde_B(frame, v, static_cast<int>(lv), cfg));
            arr.push_back(e);
        }
        rep["levels"] = arr;
        emit(g, rep.dump(2));
        return 0;
    }
    if (task == "frechet-check") {
        Rng rng(g.seed);
        std::vector<int> shells = {1, 2, 3};
        FrechetOperator op(frame, {}, shells, cfg);
        double eps = 1e-5;
        int pass = 0, total = 0;
        double worst = 0;
        for (int rep_i = 0; rep_i < 20; ++rep_i) {
            MatrixPotential w = random_direction_seeded(rng, frame.N, 2);
            MatrixPotential vp = frame.v_diamond.plus(w.scaled(eps));
            MatrixPotential vm = frame.v_diamond.plus(w.scaled(-eps));
            for (int n : shells) {
                ShellDerivatives an = op.shell_derivative(n, w);
                ModifiedShellData dp = modified_shell(frame, vp, n, cfg);
                ModifiedShellData dm = modified_shell(frame, vm, n, cfg);
                Mat fdY = (dp.y - dm.y) * (1.0 / (2 * eps));
                double scale = std::max(1.0, fdY.max_abs());
                double err = (an.dY - fdY).max_abs() / scale;
                worst = std::max(worst, err);
                ++total;
                if (err < 1e-4) ++pass;
            }
        }
        rep["directions"] = 20;
        rep["checks"] = total;
        rep["passed"] = pass;
        rep["worst_rel_err"] = worst;
        rep["pass"] = (pass == total);
        emit(g, rep.dump(2));
        return pass == total ? 0 : 2;
    }
    if (task == "biortho") {
        int amax = std::min<int>(8, static_cast<int>(frame.levels.size()));
        double worst = 0;
        ordered_json rows = ordered_json::array();
        for (int a = 0; a < amax; ++a)
            for (int b = 0; b < amax; ++b)
                for (int j = 0; j < frame.N; ++j)
                    for (int k = 0; k < frame.N; ++k) {
                        double r;
                        try {
                            r = biortho_identity_check(frame, a, b, j, k, cfg);
                        } catch (const Error& e) {
                            if (e.code() == ErrorCode::WrongIndexCombination) continue;
                            throw;
                        }
                        worst = std::max(worst, r);
                        rows.push_back(ordered_json::array({a, b, j, k, r}));
                    }
        rep["worst_residual"] = worst;
        rep["rows"] = rows;
        rep["pass"] = worst < 1e-7;
        emit(g, rep.dump(2));
        return worst < 1e-7 ? 0 : 2;
    }
    if (task == "forbidden") {
        if (potential_path.empty()) fail(ErrorCode::ParseError, "forbidden needs --potential");
        MatrixPotential v = load_potential(potential_path);
        if (v.dim() > 1) v = diagonalize_mean(v).potential;
        SpectrumConfig scfg;
        scfg.ode = cfg.ode;
        std::vector<EigenLocation> locs = locate_all(v, PI2 * 6.5 * 6.5, scfg);
        ordered_json arr = ordered_json::array();
        for (const auto& l : locs) {
            EigenRecord r = build_record(v, l, scfg);
            ForbiddenSubspace fs = forbidden_subspace(v, r, cfg);
            ordered_json e;
            e["lambda"] = l.lambda;
            e["F_basis"] = dump_matrix(fs.basis);
            e["cross_angle"] = fs.cross_angle;
            arr.push_back(e);
        }
        rep["records"] = arr;
        emit(g, rep.dump(2));
        return 0;
    }
    if (task == "condC") {
        if (condc_path.empty()) fail(ErrorCode::ParseError, "condC needs --condc");
        ordered_json j = ordered_json::parse(read_text_file(condc_path));
        std::vector<int> levels;
        std::vector<Mat> projs;
        for (const auto& e : j.at("exceptional")) {
            levels.push_back(e.at("level").get<int>());
            projs.push_back(parse_matrix_json(e.at("P")));
        }
        CondCInput in = condc_input_from_frame(frame, levels, projs);
        CondCResult r = condition_C_finite(in);
        rep["T"] = dump_matrix(r.t);
        rep["min_eig"] = r.min_eig;
        rep["verdict"] = r.holds ? "holds" : "fails";
        emit(g, rep.dump(2));
        return 0;
    }
    if (task == "kernels") {
        GradientKernel ker = gradient_kernels(frame, level, chan_j, chan_k, cfg);
        std::ostringstream os;
        os.precision(17);
        os << (ker.shared ? "t,u,u_tilde\n" : "t,u\n");
        for (size_t i = 0; i < ker.t.size(); i += 4) {
            os << ker.t[i] << "," << ker.u[i];
            if (ker.shared) os << "," << ker.u_tilde[i];
            os << "\n";
        }
        emit(g, os.str());
        return 0;
    }
    fail(ErrorCode::ParseError, "unknown task " + task);
}

// ---------------------------------------------------------------------------
// scalar

struct SequenceFile {
    std::vector<std::string> cols;
    std::vector<std::vector<double>> data;  // per column, NaN for blank
    std::vector<double> column(const std::string& name) const {
        for (size_t i = 0; i < cols.size(); ++i)
            if (cols[i] == name) {
                std::vector<double> out;
                for (double x : data[i])
                    if (x == x) out.push_back(x);
                return out;
            }
        return {};
    }
};

SequenceFile read_sequences(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(ErrorCode::ParseError, "cannot open " + path);
    SequenceFile sf;
    std::string line;
    if (!std::getline(f, line)) fail(ErrorCode::ParseError, "empty CSV");
    std::istringstream hs(line);
    std::string tok;
    while (std::getline(hs, tok, ',')) sf.cols.push_back(tok);
    sf.data.resize(sf.cols.size());
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        size_t c = 0;
        while (std::getline(ls, tok, ',') && c < sf.cols.size()) {
            sf.data[c].push_back(tok.empty() ? std::nan("") : std::atof(tok.c_str()));
            ++c;
        }
        while (c < sf.cols.size()) sf.data[c++].push_back(std::nan(""));
    }
    return sf;
}

ScalarParam parse_param(const std::string& s) {
    if (s == "mu") return ScalarParam::Mu;
    if (s == "alpha") return ScalarParam::Alpha;
    if (s == "nu") return ScalarParam::Nu;
    fail(ErrorCode::ParseError, "parameters are mu, alpha, nu");
}

int cmd_scalar(const GlobalOpts& g, const std::string& path, const std::string& convert_spec,
               const std::string& hilbert_kind, long out_len, bool characterize) {
    SequenceFile sf = read_sequences(path);
    if (!hilbert_kind.empty()) {
        std::vector<double> a = sf.column("value");
        if (a.empty()) fail(ErrorCode::ParseError, "hilbert input needs a 'value' column");
        HilbertKind kind;
        if (hilbert_kind == "half_shifted")
            kind = HilbertKind::HalfShifted;
        else if (hilbert_kind == "full_integer")
            kind = HilbertKind::FullInteger;
        else
            fail(ErrorCode::ParseError, "--hilbert expects half_shifted or full_integer");
        std::vector<double> b = discrete_hilbert(a, kind, static_cast<std::size_t>(out_len));
        std::ostringstream os;
        os.precision(17);
        os << "n,value\n";
        for (size_t i = 0; i < b.size(); ++i) os << (i + 1) << "," << b[i] << "\n";
        emit(g, os.str());
        return 0;
    }
    ScalarSpectra s;
    s.dirichlet = sf.column("lambda");
    s.mixed = sf.column("mu");
    s.alpha = sf.column("alpha");
    s.nu = sf.column("nu");
    if (characterize) {
        ScalarCharacterization c = check_scalar_characterization(s);
        ordered_json rep;
        rep["command"] = "scalar";
        rep["seed"] = g.seed;
        rep["q0"] = c.q0;
        rep["lambda_slope"] = c.lambda_slope;
        rep["alpha_cauchy"] = c.alpha_cauchy;
        rep["pass"] = c.pass;
        emit(g, rep.dump(2));
        return c.pass ? 0 : 2;
    }
    if (!convert_spec.empty()) {
        auto colon = convert_spec.find(':');
        if (colon == std::string::npos) fail(ErrorCode::ParseError, "--convert expects from:to");
        ScalarParam from = parse_param(convert_spec.substr(0, colon));
        ScalarParam to = parse_param(convert_spec.substr(colon + 1));
        ScalarSpectra out = convert(s, from, to);
        std::ostringstream os;
        os.precision(17);
        os << "n,lambda,mu,alpha,nu\n";
        for (size_t i = 0; i < out.dirichlet.size(); ++i) {
            os << (i + 1) << "," << out.dirichlet[i] << ",";
            if (i < out.mixed.size()) os << out.mixed[i];
            os << ",";
            if (i < out.alpha.size()) os << out.alpha[i];
            os << ",";
            if (i < out.nu.size()) os << out.nu[i];
            os << "\n";
        }
        emit(g, os.str());
        return 0;
    }
    fail(ErrorCode::ParseError, "scalar needs --convert, --hilbert or --characterize");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "svspec: direct and inverse spectral computations for matrix Sturm-Liouville\n"
        "operators -psi'' + V(x) psi = lambda psi on [0,1], Dirichlet boundary conditions.\n"
        "Exit codes: 0 ok; 1 parse/file; 2 count or check failure; 3 insufficient data;\n"
        "4 invalid scalar sequences; 5 domain guard; 6 numerical failure."};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand
    GlobalOpts g;
    app.add_option("--rel-tol", g.rel_tol, "ODE relative tolerance");
    app.add_option("--threads", g.threads, "worker threads (or SVSPEC_THREADS)");
    app.add_option("--seed", g.seed, "seed for randomized reports");
    app.add_option("--out", g.out, "output path (default: stdout)");
    app.add_option("--format", g.format, "json or csv (commands pick their natural format)");

    auto* sp = app.add_subcommand("spectrum", "locate eigenvalues and write the dataset JSON");
    std::string sp_pot;
    double sp_lmax = 500;
    sp->add_option("potential", sp_pot, "potential JSON")->required();
    sp->add_option("--lmax", sp_lmax, "search eigenvalues up to this lambda");

    auto* mf = app.add_subcommand("mfun", "Weyl-Titchmarsh function along a lambda grid (CSV)");
    std::string mf_in, mf_grid = "-10:-1:10", mf_mode = "direct", mf_ds;
    int mf_nmax = 200;
    mf->add_option("input", mf_in, "potential or dataset JSON")->required();
    mf->add_option("--lambda-grid", mf_grid, "lo:hi:count");
    mf->add_option("--mode", mf_mode, "direct | series | compare");
    mf->add_option("--dataset", mf_ds, "dataset JSON for the series side");
    mf->add_option("--nmax", mf_nmax, "shells summed in the series");

    auto* ck = app.add_subcommand("check", "characterization checks on a dataset");
    std::string ck_ds, ck_which = "B", ck_pot;
    ck->add_option("dataset", ck_ds, "dataset JSON")->required();
    ck->add_option("--which", ck_which, "A | B | equiv | Bn");
    ck->add_option("--potential", ck_pot, "potential JSON (needed by Bn)");

    auto* iv = app.add_subcommand("inverse", "inverse-problem toolkit");
    std::string iv_frame, iv_task, iv_pot, iv_condc;
    int iv_shells = 0, iv_level = 0, iv_j = 0, iv_k = 0;
    iv->add_option("--frame", iv_frame, "frame JSON: {channels:[...], shells:n}");
    iv->add_option("--task", iv_task,
                   "tildes | frechet-check | biortho | forbidden | condC | kernels")
        ->required();
    iv->add_option("--potential", iv_pot, "potential JSON");
    iv->add_option("--condc", iv_condc, "exceptional-set JSON for condC");
    iv->add_option("--shells", iv_shells, "override frame shell count");
    iv->add_option("--level", iv_level, "kernel level index");
    iv->add_option("--j", iv_j, "kernel row channel");
    iv->add_option("--k", iv_k, "kernel column channel");

    auto* sc = app.add_subcommand("scalar", "scalar sequence conversions and transforms");
    std::string sc_in, sc_convert, sc_hilbert;
    long sc_outlen = 10000;
    bool sc_char = false;
    sc->add_option("sequences", sc_in, "CSV with columns n,lambda,mu,alpha,nu or n,value")
        ->required();
    sc->add_option("--convert", sc_convert, "from:to over {mu, alpha, nu}");
    sc->add_option("--hilbert", sc_hilbert, "half_shifted | full_integer");
    sc->add_option("--out-len", sc_outlen, "output length for the transform");
    sc->add_flag("--characterize", sc_char, "run the scalar characterization checks");

    CLI11_PARSE(app, argc, argv);
    if (g.threads > 0) set_threads(g.threads);

    try {
        if (sp->parsed()) return cmd_spectrum(g, sp_pot, sp_lmax);
        if (mf->parsed()) return cmd_mfun(g, mf_in, mf_grid, mf_mode, mf_ds, mf_nmax);
        if (ck->parsed()) return cmd_check(g, ck_ds, ck_which, ck_pot);
        if (iv->parsed())
            return cmd_inverse(g, iv_frame, iv_task, iv_pot, iv_condc, iv_shells, iv_level, iv_j,
                               iv_k);
        if (sc->parsed()) return cmd_scalar(g, sc_in, sc_convert, sc_hilbert, sc_outlen, sc_char);
    } catch (const Error& e) {
        std::cerr << "svspec: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "svspec: " << e.what() << "\n";
        return 6;
    }
    return 1;
}
