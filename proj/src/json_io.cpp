#include "svspec/json_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace svspec {

using nlohmann::ordered_json;

namespace {

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

Mat parse_matrix(const ordered_json& j) {
    int rows = static_cast<int>(j.size());
    int cols = rows ? static_cast<int>(j[0].size()) : 0;
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int k = 0; k < cols; ++k) {
            const auto& e = j[i][k];
            if (e.is_number())
                m(i, k) = e.get<double>();
            else
                m(i, k) = cplx(e[0].get<double>(), e[1].get<double>());
        }
    return m;
}

}  // namespace

std::string dataset_to_json_text(const SpectralDataset& ds, const TailDiagnostics* tails) {
    ordered_json j;
    j["N"] = ds.N;
    j["v0"] = ds.v0;
    j["n_diamond"] = ds.n_diamond;
    j["alpha_diamond"] = ds.alpha_diamond;
    ordered_json recs = ordered_json::array();
    for (const auto& r : ds.records) {
        ordered_json rec;
        rec["lambda"] = r.lambda;
        rec["k"] = r.k;
        rec["h"] = dump_matrix(r.h);
        rec["P"] = dump_matrix(r.P);
        rec["g"] = dump_matrix(r.g);
        rec["B"] = dump_matrix(r.B);
        if (r.index)
            rec["index"] = ordered_json::array({r.index->first, r.index->second});
        else
            rec["index"] = nullptr;
        recs.push_back(rec);
    }
    j["records"] = recs;
    if (tails) {
        ordered_json t;
        t["shells"] = tails->shells;
        t["a"] = tails->a_seq;
        t["b"] = tails->b_seq;
        t["c"] = tails->c_seq;
        t["d"] = tails->d_seq;
        t["a_slope"] = tails->a_slope;
        t["c_slope"] = tails->c_slope;
        t["b_cauchy"] = tails->b_cauchy;
        t["d_cauchy"] = tails->d_cauchy;
        t["pass"] = tails->pass();
        j["tails"] = t;
    }
    return j.dump(2);
}

SpectralDataset dataset_from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& ex) {
        fail(ErrorCode::ParseError, std::string("invalid dataset JSON: ") + ex.what());
    }
    SpectralDataset ds;
    try {
        ds.N = j.at("N").get<int>();
        ds.v0 = j.at("v0").get<std::vector<double>>();
        ds.n_diamond = j.at("n_diamond").get<int>();
        ds.alpha_diamond = j.value("alpha_diamond", 0);
        for (const auto& rec : j.at("records")) {
            EigenRecord r;
            r.lambda = rec.at("lambda").get<double>();
            r.k = rec.at("k").get<int>();
            r.h = parse_matrix(rec.at("h"));
            r.P = parse_matrix(rec.at("P"));
            r.g = parse_matrix(rec.at("g"));
            r.B = parse_matrix(rec.at("B"));
            if (rec.contains("index") && !rec.at("index").is_null())
                r.index = std::make_pair(rec.at("index")[0].get<int>(), rec.at("index")[1].get<int>());
            ds.records.push_back(std::move(r));
        }
    } catch (const Error&) {
        throw;
    } catch (const std::exception& ex) {
        fail(ErrorCode::ParseError, std::string("dataset JSON missing fields: ") + ex.what());
    }
    return ds;
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(ErrorCode::ParseError, "cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) fail(ErrorCode::ParseError, "cannot write " + path);
    f << text;
}

void save_dataset(const SpectralDataset& ds, const std::string& path, const TailDiagnostics* tails) {
    write_text_file(path, dataset_to_json_text(ds, tails) + "\n");
}

SpectralDataset load_dataset(const std::string& path) {
    return dataset_from_json_text(read_text_file(path));
}

}  // namespace svspec
