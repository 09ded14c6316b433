// Python bindings for the svspec core: potentials, spectra, the
// Weyl-Titchmarsh function and the inverse-problem toolkit.

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "svspec/inversekit.hpp"
#include "svspec/json_io.hpp"
#include "svspec/scalartools.hpp"

namespace py = pybind11;
using namespace svspec;

namespace {

using PyMat = std::vector<std::vector<cplx>>;

PyMat mat_out(const Mat& m) {
    PyMat out(m.rows(), std::vector<cplx>(m.cols()));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    return out;
}

Mat mat_in(const PyMat& v) {
    int r = static_cast<int>(v.size());
    int c = r ? static_cast<int>(v[0].size()) : 0;
    Mat m(r, c);
    for (int i = 0; i < r; ++i) {
        if (static_cast<int>(v[i].size()) != c)
            fail(ErrorCode::ParseError, "ragged matrix rows");
        for (int j = 0; j < c; ++j) m(i, j) = v[i][j];
    }
    return m;
}

py::dict record_out(const EigenRecord& r) {
    py::dict d;
    d["lambda"] = r.lambda;
    d["k"] = r.k;
    d["h"] = mat_out(r.h);
    d["P"] = mat_out(r.P);
    d["g"] = mat_out(r.g);
    d["B"] = mat_out(r.B);
    if (r.index)
        d["index"] = py::make_tuple(r.index->first, r.index->second);
    else
        d["index"] = py::none();
    return d;
}

}  // namespace

PYBIND11_MODULE(_svspec, m) {
    m.doc() = "spectral direct/inverse computations for matrix Sturm-Liouville operators";

    py::register_exception<Error>(m, "SvspecError");

    py::class_<MatrixPotential>(m, "MatrixPotential")
        .def_static("zero", &MatrixPotential::zero, py::arg("dim"))
        .def_static("constant", [](const PyMat& mat) { return MatrixPotential::constant(mat_in(mat)); })
        .def_static("scalar_fourier", &MatrixPotential::scalar_fourier, py::arg("mean"),
                    py::arg("cos"), py::arg("sin"))
        .def_static("from_json", &potential_from_json_text)
        .def_static(
            "fourier",
            [](const PyMat& mean, const std::vector<std::pair<int, PyMat>>& cos_h,
               const std::vector<std::pair<int, PyMat>>& sin_h) {
                std::vector<Harmonic> ch, sh;
                for (const auto& [n, mt] : cos_h) ch.push_back({n, mat_in(mt)});
                for (const auto& [n, mt] : sin_h) sh.push_back({n, mat_in(mt)});
                return MatrixPotential::fourier(mat_in(mean), std::move(ch), std::move(sh));
            },
            py::arg("mean"), py::arg("cos") = std::vector<std::pair<int, PyMat>>{},
            py::arg("sin") = std::vector<std::pair<int, PyMat>>{})
        .def_property_readonly("dim", &MatrixPotential::dim)
        .def("__call__", [](const MatrixPotential& v, double x) { return mat_out(v.evaluate(x)); })
        .def("reflect", &MatrixPotential::reflect)
        .def("shifted", &MatrixPotential::shifted)
        .def("scaled", &MatrixPotential::scaled)
        .def("plus", &MatrixPotential::plus)
        .def("sup_op_norm", &MatrixPotential::sup_op_norm)
        .def("to_json", &potential_to_json_text)
        .def("weighted_sin", [](const MatrixPotential& v, int n) {
            return mat_out(v.fourier_coefficient(MatrixPotential::CoefKind::WeightedSin, n));
        });

    m.def(
        "diagonalize_mean",
        [](const MatrixPotential& v, double gap_min) {
            DiagonalizedPotential d = diagonalize_mean(v, gap_min);
            py::dict out;
            out["potential"] = d.potential;
            out["unitary"] = mat_out(d.unitary);
            out["v0"] = d.v0;
            return out;
        },
        py::arg("potential"), py::arg("gap_min") = 1e-8);

    m.def(
        "locate_all",
        [](const MatrixPotential& v, double lambda_max) {
            std::vector<EigenLocation> locs = locate_all(v, lambda_max);
            py::list out;
            for (const auto& l : locs) {
                py::dict d;
                d["lambda"] = l.lambda;
                d["multiplicity"] = l.multiplicity;
                d["residual"] = l.residual;
                out.append(d);
            }
            return out;
        },
        py::arg("potential"), py::arg("lambda_max"));

    m.def(
        "solve_endpoints",
        [](const MatrixPotential& v, cplx lambda) {
            SolveWant want;
            want.lambda_derivs = true;
            SolutionBundle b = solve_bundle(v, lambda, {}, want);
            py::dict d;
            d["phi1"] = mat_out(b.phi1);
            d["dphi1"] = mat_out(b.dphi1);
            d["chi0"] = mat_out(b.chi0);
            d["dchi0"] = mat_out(b.dchi0);
            return d;
        },
        py::arg("potential"), py::arg("lambda"));

    m.def(
        "assemble_dataset",
        [](const MatrixPotential& v, const std::vector<double>& v0, double lambda_max) {
            SpectralDataset ds = assemble_dataset(v, v0, lambda_max);
            py::dict d;
            d["N"] = ds.N;
            d["v0"] = ds.v0;
            d["n_diamond"] = ds.n_diamond;
            d["alpha_diamond"] = ds.alpha_diamond;
            py::list recs;
            for (const auto& r : ds.records) recs.append(record_out(r));
            d["records"] = recs;
            d["json"] = dataset_to_json_text(ds);
            return d;
        },
        py::arg("potential"), py::arg("v0"), py::arg("lambda_max"));

    m.def(
        "evaluate_M",
        [](const MatrixPotential& v, cplx lambda) { return mat_out(evaluate_M(v, lambda).m); },
        py::arg("potential"), py::arg("lambda"));

    m.def(
        "reconstruct_M",
        [](const std::string& dataset_json, cplx lambda, int n_max) {
            SpectralDataset ds = dataset_from_json_text(dataset_json);
            SeriesConfig cfg;
            cfg.n_max = n_max;
            return mat_out(reconstruct_M(ds, lambda, cfg).m);
        },
        py::arg("dataset_json"), py::arg("lambda"), py::arg("n_max") = 200);

    m.def(
        "residue_via_contour",
        [](const MatrixPotential& v, double center, double radius) {
            return mat_out(residue_via_contour(v, center, radius));
        },
        py::arg("potential"), py::arg("center"), py::arg("radius"));

    m.def(
        "discrete_hilbert",
        [](const std::vector<double>& a, const std::string& kind, std::size_t out_len) {
            HilbertKind k = kind == "half_shifted" ? HilbertKind::HalfShifted
                                                   : HilbertKind::FullInteger;
            return discrete_hilbert(a, k, out_len);
        },
        py::arg("a"), py::arg("kind") = "half_shifted", py::arg("out_len") = 10000);

    m.def(
        "scalar_convert",
        [](const std::vector<double>& dirichlet, const py::dict& extra, const std::string& from,
           const std::string& to) {
            ScalarSpectra s;
            s.dirichlet = dirichlet;
            if (extra.contains("mu")) s.mixed = extra["mu"].cast<std::vector<double>>();
            if (extra.contains("alpha")) s.alpha = extra["alpha"].cast<std::vector<double>>();
            if (extra.contains("nu")) s.nu = extra["nu"].cast<std::vector<double>>();
            auto parse = [](const std::string& x) {
                if (x == "mu") return ScalarParam::Mu;
                if (x == "alpha") return ScalarParam::Alpha;
                if (x == "nu") return ScalarParam::Nu;
                fail(ErrorCode::ParseError, "parameters are mu, alpha, nu");
            };
            ScalarSpectra out = convert(s, parse(from), parse(to));
            py::dict d;
            d["lambda"] = out.dirichlet;
            d["mu"] = out.mixed;
            d["alpha"] = out.alpha;
            d["nu"] = out.nu;
            return d;
        },
        py::arg("dirichlet"), py::arg("extra"), py::arg("from_param"), py::arg("to_param"));

    m.def(
        "condition_C_finite",
        [](const std::vector<double>& v0, const std::vector<std::vector<double>>& retained,
           const std::vector<double>& exc_lambda, const std::vector<PyMat>& exc_proj,
           double pd_tol) {
            CondCInput in;
            in.v0 = v0;
            in.retained = retained;
            in.exc_lambda = exc_lambda;
            for (const auto& p : exc_proj) in.exc_proj.push_back(mat_in(p));
            CondCResult r = condition_C_finite(in, pd_tol);
            py::dict d;
            d["T"] = mat_out(r.t);
            d["holds"] = r.holds;
            d["min_eig"] = r.min_eig;
            return d;
        },
        py::arg("v0"), py::arg("retained"), py::arg("exc_lambda"), py::arg("exc_proj"),
        py::arg("pd_tol") = 1e-10);

    m.def("set_threads", &set_threads);
    m.attr("__version__") = "0.1.0";
}
