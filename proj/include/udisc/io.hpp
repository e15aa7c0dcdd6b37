#pragma once

// Problem-file parsing and report serialization (JSON).
//
// Problem file:
//   { "states":  [[[re, im], ...], ...],   // one list of amplitudes per state
//     "priors":  [g1, ..., gn],            // required by solve/simulate
//     "weights": [w1, ..., wn],            // required by gepm
//     "metadata": { "key": "value", ... } }
//
// Complex numbers are always two-element [re, im] arrays. Indices in reports
// (zero_set) are 0-based.

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "udisc/closedform.hpp"
#include "udisc/ensemble.hpp"
#include "udisc/povm.hpp"
#include "udisc/solver.hpp"

namespace udisc::io {

using nlohmann::json;

struct ProblemFile {
    std::vector<CVector> states;
    std::optional<Vector> priors;
    std::optional<Vector> weights;
    std::map<std::string, std::string> metadata;

    /// Validated ensemble. Without priors, uniform priors are used when
    /// `allow_missing_priors` is set.
    StateEnsemble ensemble(bool allow_missing_priors = false) const {
        if (!priors && !allow_missing_priors) throw InputError("priors: field is required");
        const Index n = static_cast<Index>(states.size());
        const Vector g = priors ? *priors : Vector(Vector::Constant(n, n > 0 ? 1.0 / static_cast<double>(n) : 0.0));
        return StateEnsemble(states, g);
    }
};

namespace detail {

inline double number_at(const json& j, const std::string& where) {
    if (!j.is_number()) throw InputError(where + ": expected a number");
    return j.get<double>();
}

inline Vector real_vector(const json& j, const std::string& field) {
    if (!j.is_array()) throw InputError(field + ": expected an array of numbers");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = number_at(j[i], field + "[" + std::to_string(i) + "]");
    return v;
}

inline cplx complex_at(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) throw InputError(where + ": expected a [re, im] pair");
    return {number_at(j[0], where + "[0]"), number_at(j[1], where + "[1]")};
}

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json matrix_json(const CMatrix& m) {
    json rows = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline CMatrix matrix_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) throw InputError(field + ": expected a non-empty matrix");
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    CMatrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) throw InputError(field + ": ragged matrix");
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Index>(r), static_cast<Index>(c)) =
                complex_at(j[r][c], field + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
        }
    }
    return m;
}

}  // namespace detail

inline ProblemFile parse_problem(const json& doc) {
    if (!doc.is_object()) throw InputError("problem: expected a JSON object");
    ProblemFile pf;
    if (!doc.contains("states")) throw InputError("states: field is required");
    const json& states = doc.at("states");
    if (!states.is_array()) throw InputError("states: expected a list of states");
    for (std::size_t i = 0; i < states.size(); ++i) {
        const std::string where = "states[" + std::to_string(i) + "]";
        if (!states[i].is_array()) throw InputError(where + ": expected a list of [re, im] amplitudes");
        CVector v(static_cast<Index>(states[i].size()));
        for (std::size_t k = 0; k < states[i].size(); ++k) {
            v(static_cast<Index>(k)) = detail::complex_at(states[i][k], where + "[" + std::to_string(k) + "]");
        }
        pf.states.push_back(std::move(v));
    }
    if (doc.contains("priors") && !doc.at("priors").is_null()) pf.priors = detail::real_vector(doc.at("priors"), "priors");
    if (doc.contains("weights") && !doc.at("weights").is_null()) pf.weights = detail::real_vector(doc.at("weights"), "weights");
    if (doc.contains("metadata")) {
        const json& meta = doc.at("metadata");
        if (!meta.is_object()) throw InputError("metadata: expected an object");
        for (auto it = meta.begin(); it != meta.end(); ++it) {
            pf.metadata[it.key()] = it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
        }
    }
    return pf;
}

inline ProblemFile parse_problem_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("problem file is not valid JSON: ") + e.what());
    }
    return parse_problem(doc);
}

inline ProblemFile load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read problem file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_problem_text(ss.str());
}

inline json problem_json(const ProblemFile& pf) {
    json doc;
    doc["states"] = json::array();
    for (const auto& s : pf.states) {
        json st = json::array();
        for (Index k = 0; k < s.size(); ++k) st.push_back(detail::complex_json(s(k)));
        doc["states"].push_back(std::move(st));
    }
    auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    if (pf.priors) doc["priors"] = vec(*pf.priors);
    if (pf.weights) doc["weights"] = vec(*pf.weights);
    if (!pf.metadata.empty()) doc["metadata"] = pf.metadata;
    return doc;
}

struct PovmMatrices {
    std::vector<CMatrix> elements;
    CMatrix inconclusive;

    bool operator==(const PovmMatrices& o) const {
        if (elements.size() != o.elements.size() || inconclusive != o.inconclusive) return false;
        for (std::size_t i = 0; i < elements.size(); ++i)
            if (elements[i] != o.elements[i]) return false;
        return true;
    }
};

struct SolutionReport {
    std::vector<double> p;
    double lambda = 0.0;
    double p_bar = 0.0;
    std::string classification;
    std::optional<std::vector<Index>> zero_set;
    std::optional<std::vector<double>> phases;
    std::optional<double> xi;
    std::map<std::string, double> residuals;
    std::optional<PovmMatrices> povm;
    std::optional<double> oracle_gap;

    bool operator==(const SolutionReport&) const = default;
};

inline SolutionReport make_report(const OptimumSolution& s) {
    SolutionReport r;
    r.p.assign(s.p_opt.data(), s.p_opt.data() + s.p_opt.size());
    r.lambda = s.lambda;
    r.p_bar = s.p_bar;
    r.classification = to_string(s.classification);
    if (s.classification == Classification::Boundary) r.zero_set = s.zero_set;
    for (const auto& [k, v] : s.residuals)
        if (std::isfinite(v)) r.residuals[k] = v;
    return r;
}

/// Throws NumericalError if the report contradicts its own invariants.
inline void validate_report(const SolutionReport& r) {
    auto fail = [](const std::string& what) { throw NumericalError("report invariant violated: " + what); };
    const auto cls = classification_from_string(r.classification);
    if (!cls) fail("unknown classification '" + r.classification + "'");
    if (r.p.empty()) fail("empty success vector");
    for (double v : r.p)
        if (!(v >= -tol::psd && v <= 1.0 + tol::psd)) fail("success probability outside [0, 1]");
    if (!(r.p_bar >= -tol::psd && r.p_bar <= 1.0 + tol::psd)) fail("p_bar outside [0, 1]");
    if (!(r.lambda >= 0.0)) fail("negative lambda");
    if ((*cls == Classification::Boundary) != r.zero_set.has_value()) fail("zero_set must be present exactly for boundary optima");
    if (*cls != Classification::Singular && !(r.lambda > 0.0)) fail("non-singular optimum with lambda = 0");
    if (r.zero_set) {
        for (Index i : *r.zero_set) {
            if (i < 0 || i >= static_cast<Index>(r.p.size())) fail("zero_set index out of range");
            if (std::abs(r.p[static_cast<std::size_t>(i)]) > tol::psd) fail("zero_set component is not zero");
        }
    }
    if (r.phases && r.phases->size() != r.p.size()) fail("phase vector length");
}

inline json to_json(const SolutionReport& r) {
    json j;
    j["p"] = r.p;
    j["lambda"] = r.lambda;
    j["p_bar"] = r.p_bar;
    j["classification"] = r.classification;
    j["zero_set"] = r.zero_set ? json(*r.zero_set) : json(nullptr);
    j["phases"] = r.phases ? json(*r.phases) : json(nullptr);
    j["xi"] = r.xi ? json(*r.xi) : json(nullptr);
    j["residuals"] = r.residuals;
    if (r.povm) {
        json pv;
        pv["elements"] = json::array();
        for (const auto& e : r.povm->elements) pv["elements"].push_back(detail::matrix_json(e));
        pv["inconclusive"] = detail::matrix_json(r.povm->inconclusive);
        j["povm"] = std::move(pv);
    } else {
        j["povm"] = nullptr;
    }
    j["oracle_gap"] = r.oracle_gap ? json(*r.oracle_gap) : json(nullptr);
    return j;
}

inline SolutionReport report_from_json(const json& j) {
    SolutionReport r;
    try {
        r.p = j.at("p").get<std::vector<double>>();
        r.lambda = j.at("lambda").get<double>();
        r.p_bar = j.at("p_bar").get<double>();
        r.classification = j.at("classification").get<std::string>();
        if (j.contains("zero_set") && !j.at("zero_set").is_null()) r.zero_set = j.at("zero_set").get<std::vector<Index>>();
        if (j.contains("phases") && !j.at("phases").is_null()) r.phases = j.at("phases").get<std::vector<double>>();
        if (j.contains("xi") && !j.at("xi").is_null()) r.xi = j.at("xi").get<double>();
        if (j.contains("residuals")) r.residuals = j.at("residuals").get<std::map<std::string, double>>();
        if (j.contains("povm") && !j.at("povm").is_null()) {
            PovmMatrices pm;
            const json& elems = j.at("povm").at("elements");
            for (std::size_t i = 0; i < elems.size(); ++i)
                pm.elements.push_back(detail::matrix_from_json(elems[i], "povm.elements[" + std::to_string(i) + "]"));
            pm.inconclusive = detail::matrix_from_json(j.at("povm").at("inconclusive"), "povm.inconclusive");
            r.povm = std::move(pm);
        }
        if (j.contains("oracle_gap") && !j.at("oracle_gap").is_null()) r.oracle_gap = j.at("oracle_gap").get<double>();
    } catch (const json::exception& e) {
        throw InputError(std::string("report: ") + e.what());
    }
    return r;
}

inline json to_json(const SimulationReport& s) {
    json j;
    j["trials"] = s.trials;
    j["seed"] = s.seed;
    j["shards"] = s.shards;
    j["counts"] = s.counts;
    j["empirical_success"] = s.empirical_success;
    j["empirical_error"] = s.empirical_error;
    return j;
}

inline json to_json(const GepmResult& g) {
    json j;
    j["p"] = std::vector<double>(g.p.data(), g.p.data() + g.p.size());
    j["sigma_min"] = g.sigma_min;
    j["minors"] = std::vector<double>(g.minors.data(), g.minors.data() + g.minors.size());
    j["singular"] = g.singular();
    j["classification"] = g.singular() ? "singular" : "interior";
    j["priors"] = g.priors ? json(std::vector<double>(g.priors->data(), g.priors->data() + g.priors->size()))
                           : json(nullptr);
    return j;
}

/// CSV point cloud: header `p1,...,pn`, `\n` line endings, 17 significant digits.
inline std::string region_csv(const std::vector<SuccessPoint>& points) {
    std::string out;
    if (points.empty()) return out;
    const Index n = points.front().size();
    for (Index k = 0; k < n; ++k) out += (k ? ",p" : "p") + std::to_string(k + 1);
    out += '\n';
    char buf[32];
    for (const auto& p : points) {
        for (Index k = 0; k < n; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", p(k));
            if (k) out += ',';
            out += buf;
        }
        out += '\n';
    }
    return out;
}

}  // namespace udisc::io
