#include "nearinv/spec_io.hpp"

#include <fstream>

namespace nearinv {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ValidationError(path + ": " + what);
}

const json& expect(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(path + "." + key, "missing field");
    return *it;
}

Complex complex_from(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        fail(path, "expected a [re, im] pair");
    return Complex(j[0].get<double>(), j[1].get<double>());
}

ordered_json complex_to(Complex c) { return ordered_json::array({c.real(), c.imag()}); }

int int_from(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

Eigen::MatrixXcd matrix_from(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a nonempty matrix");
    const size_t rows = j.size();
    size_t cols = 0;
    Eigen::MatrixXcd out;
    for (size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array()) fail(path + "[" + std::to_string(i) + "]", "expected a row");
        if (i == 0) {
            cols = j[i].size();
            out.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        }
        if (j[i].size() != cols) fail(path + "[" + std::to_string(i) + "]", "ragged matrix");
        for (size_t k = 0; k < cols; ++k)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = complex_from(
                j[i][k], path + "[" + std::to_string(i) + "][" + std::to_string(k) + "]");
    }
    return out;
}

ordered_json matrix_to(const Eigen::MatrixXcd& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(complex_to(m(i, k)));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<TruncatedSeries> basis_from(const json& j, int n, int degree,
                                        const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of series");
    std::vector<TruncatedSeries> out;
    for (size_t e = 0; e < j.size(); ++e)
        out.push_back(series_from_json(j[e], n, degree, path + "[" + std::to_string(e) + "]"));
    return out;
}

AmbientSpace ambient_from(const json& j, const std::string& path) {
    const std::string kind = expect(j, "kind", path).get<std::string>();
    const int n = int_from(expect(j, "components", path), path + ".components");
    const int degree = int_from(expect(j, "degree", path), path + ".degree");
    if (n < 1) fail(path + ".components", "must be >= 1");
    if (degree < 0) fail(path + ".degree", "must be >= 0");
    if (kind == "hardy") return AmbientSpace::hardy(n, degree);
    if (kind == "dirichlet_alpha") {
        const json& a = expect(j, "alpha", path);
        if (!a.is_number()) fail(path + ".alpha", "expected a number");
        const double alpha = a.get<double>();
        if (alpha < 0.0 || alpha > 1.0) fail(path + ".alpha", "must lie in [0, 1]");
        return AmbientSpace::dirichlet(n, degree, alpha);
    }
    fail(path + ".kind", "unknown kind '" + kind + "' (expected hardy or dirichlet_alpha)");
}

} // namespace

TruncatedSeries series_from_json(const json& j, int components, int degree,
                                 const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of coefficient rows");
    if (static_cast<int>(j.size()) > degree + 1)
        fail(path, "series degree exceeds the ambient working degree");
    TruncatedSeries out(components, degree);
    for (size_t m = 0; m < j.size(); ++m) {
        const json& row = j[m];
        const std::string rpath = path + "[" + std::to_string(m) + "]";
        if (!row.is_array() || static_cast<int>(row.size()) != components)
            fail(rpath, "expected a row of " + std::to_string(components) + " complex pairs");
        for (int c = 0; c < components; ++c)
            out.coeff(c, static_cast<int>(m)) =
                complex_from(row[static_cast<size_t>(c)], rpath + "[" + std::to_string(c) + "]");
    }
    return out;
}

ordered_json series_to_json(const TruncatedSeries& s) {
    int top = s.degree();
    while (top > 0) {
        bool nz = false;
        for (int c = 0; c < s.components(); ++c) nz = nz || s.coeff(c, top) != Complex(0.0, 0.0);
        if (nz) break;
        --top;
    }
    ordered_json rows = ordered_json::array();
    for (int m = 0; m <= top; ++m) {
        ordered_json row = ordered_json::array();
        for (int c = 0; c < s.components(); ++c) row.push_back(complex_to(s.coeff(c, m)));
        rows.push_back(std::move(row));
    }
    return rows;
}

LoadedSpec parse_spec(const json& j) {
    AmbientSpace ambient = ambient_from(expect(j, "ambient", "spec"), "spec.ambient");
    const int n = ambient.components();
    const int degree = ambient.degree();

    const json& jspace = expect(j, "space", "spec");
    std::vector<TruncatedSeries> basis =
        basis_from(expect(jspace, "basis", "spec.space"), n, degree, "spec.space.basis");

    const json& metric = expect(jspace, "metric", "spec.space");
    std::optional<ContractiveSpace> space;
    if (metric.contains("gram")) {
        Eigen::MatrixXcd gram = matrix_from(metric["gram"], "spec.space.metric.gram");
        try {
            space.emplace(ContractiveSpace::with_gram(ambient, basis, std::move(gram)));
        } catch (const ValidationError& e) {
            fail("spec.space", e.what());
        }
    } else if (metric.contains("injection")) {
        Eigen::MatrixXcd u = matrix_from(metric["injection"], "spec.space.metric.injection");
        try {
            space.emplace(ContractiveSpace::with_injection(ambient, basis, u));
        } catch (const ValidationError& e) {
            fail("spec.space", e.what());
        }
    } else {
        fail("spec.space.metric", "expected a gram or injection entry");
    }

    std::optional<DefectSpace> defect;
    if (j.contains("defect")) {
        std::vector<TruncatedSeries> fbasis = basis_from(
            expect(j["defect"], "basis", "spec.defect"), n, degree, "spec.defect.basis");
        try {
            defect.emplace(ambient, fbasis);
        } catch (const ValidationError& e) {
            fail("spec.defect", e.what());
        }
    }

    const json& jinner = expect(j, "inner", "spec");
    const json& jz = expect(jinner, "zeros", "spec.inner");
    if (!jz.is_array() || jz.empty()) fail("spec.inner.zeros", "expected a nonempty array");
    std::vector<Complex> zeros;
    for (size_t i = 0; i < jz.size(); ++i)
        zeros.push_back(complex_from(jz[i], "spec.inner.zeros[" + std::to_string(i) + "]"));
    Complex phase(1.0, 0.0);
    if (jinner.contains("phase")) phase = complex_from(jinner["phase"], "spec.inner.phase");
    std::optional<InnerFunction> inner;
    try {
        inner.emplace(std::move(zeros), phase);
    } catch (const ValidationError& e) {
        fail("spec.inner", e.what());
    }
    if (defect) {
        try {
            SumSpace probe(*space, *defect); // validates trivial intersection
        } catch (const ValidationError& e) {
            fail("spec.defect", e.what());
        }
    }
    return LoadedSpec{std::move(*space), std::move(defect), std::move(*inner)};
}

LoadedSpec load_spec(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ValidationError("spec: cannot open file " + file.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("spec: invalid JSON: ") + e.what());
    }
    return parse_spec(j);
}

ordered_json serialize_spec(const LoadedSpec& spec) {
    const AmbientSpace& am = spec.space.ambient();
    ordered_json j;
    ordered_json ambient;
    ambient["kind"] = am.kind() == AmbientKind::hardy ? "hardy" : "dirichlet_alpha";
    if (am.kind() == AmbientKind::dirichlet_alpha) ambient["alpha"] = am.alpha();
    ambient["components"] = am.components();
    ambient["degree"] = am.degree();
    j["ambient"] = std::move(ambient);

    ordered_json space;
    ordered_json basis = ordered_json::array();
    for (const auto& b : spec.space.basis()) basis.push_back(series_to_json(b));
    space["basis"] = std::move(basis);
    space["metric"] = ordered_json{{"gram", matrix_to(spec.space.gram())}};
    j["space"] = std::move(space);

    if (spec.defect && spec.defect->dim() > 0) {
        ordered_json fb = ordered_json::array();
        for (const auto& b : spec.defect->basis()) fb.push_back(series_to_json(b));
        j["defect"] = ordered_json{{"basis", std::move(fb)}};
    }

    ordered_json inner;
    ordered_json zeros = ordered_json::array();
    for (const Complex& a : spec.inner.zeros()) zeros.push_back(complex_to(a));
    inner["zeros"] = std::move(zeros);
    inner["phase"] = complex_to(spec.inner.phase());
    j["inner"] = std::move(inner);
    return j;
}

bool specs_equal(const LoadedSpec& a, const LoadedSpec& b) {
    if (!(a.space.ambient() == b.space.ambient())) return false;
    if (a.space.dim() != b.space.dim()) return false;
    for (int j = 0; j < a.space.dim(); ++j)
        if (a.space.basis()[static_cast<size_t>(j)].coeffs() !=
            b.space.basis()[static_cast<size_t>(j)].coeffs())
            return false;
    if (a.space.gram() != b.space.gram()) return false;
    const int pa = a.defect ? a.defect->dim() : 0;
    const int pb = b.defect ? b.defect->dim() : 0;
    if (pa != pb) return false;
    for (int j = 0; j < pa; ++j)
        if (a.defect->basis()[static_cast<size_t>(j)].coeffs() !=
            b.defect->basis()[static_cast<size_t>(j)].coeffs())
            return false;
    if (a.inner.zeros() != b.inner.zeros() || a.inner.phase() != b.inner.phase()) return false;
    return true;
}

namespace {

ordered_json hypotheses_json(const NearInvarianceCertificate& cert,
                             const NormHypothesisResult& ratio) {
    ordered_json near;
    near["pass"] = cert.pass;
    near["intersection_dim"] = cert.intersection_dim;
    near["max_residual"] = cert.max_residual;
    near["witness"] = cert.witness ? ordered_json(series_to_json(*cert.witness))
                                   : ordered_json(nullptr);
    ordered_json norm;
    norm["pass"] = ratio.pass;
    norm["vacuous"] = ratio.vacuous;
    if (ratio.vacuous)
        norm["min_ratio"] = nullptr;
    else
        norm["min_ratio"] = ratio.min_ratio;
    ordered_json out;
    out["near_invariance"] = std::move(near);
    out["norm_hypothesis"] = std::move(norm);
    return out;
}

ordered_json window_json(const LoadedSpec& spec) {
    ordered_json w;
    w["components"] = spec.space.ambient().components();
    w["degree"] = spec.space.ambient().degree();
    return w;
}

} // namespace

ordered_json check_report_json(const LoadedSpec& spec, const NearInvarianceCertificate& cert,
                               const NormHypothesisResult& ratio, double tol) {
    ordered_json j;
    j["schema"] = 1;
    j["command"] = "check";
    j["window"] = window_json(spec);
    j["tolerances"] = ordered_json{{"tol", tol}};
    j["hypotheses"] = hypotheses_json(cert, ratio);
    j["verdict"] = (cert.pass && ratio.pass) ? "pass" : "fail";
    return j;
}

ordered_json factorize_report_json(const LoadedSpec& spec, const SpaceFactorization& fact) {
    ordered_json j;
    j["schema"] = 1;
    j["command"] = "factorize";
    j["window"] = window_json(spec);
    j["tolerances"] = ordered_json{{"tol", fact.options.tol},
                                   {"eps", fact.options.eps},
                                   {"tol_rank", fact.options.tol_rank},
                                   {"m_max", fact.options.m_max}};
    j["hypotheses"] = hypotheses_json(fact.near_invariance, fact.norm_hypothesis);

    ordered_json f;
    f["case"] = fact.contained_in_phi_h ? "contained_in_phi_h" : "general";
    f["g_orthonormality_error"] = fact.g_orthonormality_error;
    ordered_json gb = ordered_json::array();
    for (const auto& g : fact.g_basis) gb.push_back(series_to_json(g));
    f["g_basis"] = std::move(gb);
    ordered_json db = ordered_json::array();
    for (const auto& e : fact.defect_basis) db.push_back(series_to_json(e));
    f["defect_basis"] = std::move(db);

    ordered_json elems = ordered_json::array();
    for (size_t i = 0; i < fact.reports.size(); ++i) {
        const FactorizationReport& rep = fact.reports[i];
        ordered_json e;
        e["index"] = i;
        e["norm_m_sq"] = rep.budget.h_norm_sq;
        e["extracted_sq"] = rep.budget.extracted_sq;
        e["f_norm_sq"] = rep.f_norm_sq();
        e["t_norm_sq"] = rep.t_norm_sq();
        e["tail_norm"] = rep.tail_norm;
        e["tail_converged"] = rep.tail_converged;
        e["reconstruction_residual"] = rep.reconstruction_residual;
        e["reconstruction_tolerance"] = rep.reconstruction_tolerance;
        e["invariance_residual"] = rep.invariance_residual;
        e["coeff_identity_residual"] = rep.coeff_identity_residual;
        e["max_contraction_ratio"] = rep.max_contraction_ratio;
        e["bessel_excess"] = rep.bessel_excess;
        e["coeffs_c"] = matrix_to(rep.coeffs_c);
        e["coeffs_d"] = matrix_to(rep.coeffs_d);
        ordered_json fs = ordered_json::array();
        for (const auto& s : rep.f_series) fs.push_back(series_to_json(s));
        e["f"] = std::move(fs);
        ordered_json ts = ordered_json::array();
        for (const auto& s : rep.t_series) ts.push_back(series_to_json(s));
        e["t"] = std::move(ts);
        e["pass"] = rep.pass(fact.options.tol);
        elems.push_back(std::move(e));
    }
    f["elements"] = std::move(elems);
    f["pass"] = fact.pass();
    j["factorization"] = std::move(f);
    j["verdict"] = fact.pass() ? "pass" : "fail";
    return j;
}

} // namespace nearinv
