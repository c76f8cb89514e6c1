#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nearinv/fixtures.hpp"
#include "nearinv/spec_io.hpp"

namespace {

using namespace nearinv;

constexpr int kExitPass = 0;
constexpr int kExitMathFail = 1;
constexpr int kExitInputError = 2;

void write_json(const nlohmann::ordered_json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write report to " + path);
    out << j.dump(2) << "\n";
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void print_hypotheses(const NearInvarianceCertificate& cert, const NormHypothesisResult& ratio) {
    std::cout << "near invariance: " << (cert.pass ? "pass" : "FAIL")
              << " (intersection dim " << cert.intersection_dim << ", max residual "
              << fmt(cert.max_residual) << ")\n";
    if (!cert.pass && cert.witness) {
        std::cout << "  witness h in M with h/phi outside: "
                  << series_to_json(*cert.witness).dump() << "\n";
    }
    std::cout << "norm hypothesis: " << (ratio.pass ? "pass" : "FAIL");
    if (ratio.vacuous)
        std::cout << " (vacuous, empty quotient space)";
    else
        std::cout << " (min ratio " << fmt(ratio.min_ratio) << ")";
    std::cout << "\n";
}

const char* failing_audit(const FactorizationReport& rep, double tol) {
    if (!rep.tail_converged) return "tail did not converge within m_max";
    if (!rep.budget_ok()) return "coefficient budget exceeds |h|_M^2";
    if (rep.reconstruction_residual > rep.reconstruction_tolerance) return "reconstruction";
    if (rep.invariance_residual > tol) return "adjoint-shift invariance";
    if (rep.coeff_identity_residual > tol) return "coefficient-extraction identity";
    if (rep.max_contraction_ratio > 1.0 + 1e-12) return "contraction bound";
    if (rep.bessel_excess > 1e-9) return "coefficient budget (running sum)";
    return nullptr;
}

int cmd_check(const std::string& spec_path, double tol, const std::string& json_path) {
    LoadedSpec spec = load_spec(spec_path);
    const DefectSpace* f = spec.defect ? &*spec.defect : nullptr;
    NearInvarianceCertificate cert = check_nearly_invariant(spec.space, spec.inner, tol, f);
    NormHypothesisResult ratio = check_norm_hypothesis(spec.space, spec.inner, f);
    print_hypotheses(cert, ratio);
    const bool pass = cert.pass && ratio.pass;
    std::cout << "verdict: " << (pass ? "pass" : "FAIL") << "\n";
    if (!json_path.empty()) write_json(check_report_json(spec, cert, ratio, tol), json_path);
    return pass ? kExitPass : kExitMathFail;
}

int cmd_factorize(const std::string& spec_path, int m_max, double eps,
                  const std::string& json_path) {
    LoadedSpec spec = load_spec(spec_path);
    FactorizationOptions opts;
    opts.m_max = m_max;
    opts.eps = eps;

    SpaceFactorization fact = [&] {
        if (spec.defect && spec.defect->dim() > 0)
            return defect_factorize(spec.space, *spec.defect, spec.inner, opts);
        const bool plain_shift = spec.space.ambient().kind() == AmbientKind::hardy &&
                                 spec.inner.degree() == 1 && spec.inner.vanishes_at_zero() &&
                                 spec.inner.phase() == Complex(1.0, 0.0);
        if (plain_shift) return hardy_vector_factorize(spec.space, opts);
        return branges_factorize(spec.space, spec.inner, opts);
    }();

    print_hypotheses(fact.near_invariance, fact.norm_hypothesis);
    std::cout << "case: " << (fact.contained_in_phi_h ? "M inside phi*H (t-only)" : "general")
              << ", g basis size " << fact.g_basis.size() << ", defect size "
              << fact.defect_basis.size() << "\n";
    for (size_t i = 0; i < fact.reports.size(); ++i) {
        const FactorizationReport& rep = fact.reports[i];
        std::cout << "element " << i << ": |h|_M^2 = " << fmt(rep.budget.h_norm_sq)
                  << ", |f|_2^2 = " << fmt(rep.f_norm_sq());
        if (rep.coeffs_d.size() > 0) std::cout << ", |t|_2^2 = " << fmt(rep.t_norm_sq());
        std::cout << ", tail = " << fmt(rep.tail_norm)
                  << ", recon = " << fmt(rep.reconstruction_residual);
        const char* audit = failing_audit(rep, fact.options.tol);
        std::cout << (audit == nullptr ? " [ok]" : " [FAIL]") << "\n";
        if (audit != nullptr) std::cout << "  failing audit: " << audit << "\n";
    }
    const bool pass = fact.pass();
    std::cout << "verdict: " << (pass ? "pass" : "FAIL") << "\n";
    if (!json_path.empty()) write_json(factorize_report_json(spec, fact), json_path);
    return pass ? kExitPass : kExitMathFail;
}

int cmd_reproduce(const std::string& name, const std::string& json_path) {
    auto checks = fixtures::run_fixture(name);
    std::printf("fixture %s\n", name.c_str());
    std::printf("  %-44s %16s %16s %10s  %s\n", "quantity", "expected", "computed", "|diff|",
                "status");
    bool all = true;
    for (const auto& c : checks) {
        const double diff = std::abs(c.computed - c.expected);
        std::printf("  %-44s %16.10g %16.10g %10.2e  %s\n", c.name.c_str(), c.expected,
                    c.computed, diff, c.pass() ? "pass" : "FAIL");
        all = all && c.pass();
    }
    std::printf("verdict: %s\n", all ? "pass" : "FAIL");
    if (!json_path.empty()) {
        nlohmann::ordered_json j;
        j["schema"] = 1;
        j["command"] = "reproduce";
        j["fixture"] = name;
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& c : checks)
            arr.push_back(nlohmann::ordered_json{{"name", c.name},
                                                 {"expected", c.expected},
                                                 {"computed", c.computed},
                                                 {"tol", c.tol},
                                                 {"pass", c.pass()}});
        j["checks"] = std::move(arr);
        j["verdict"] = all ? "pass" : "fail";
        write_json(j, json_path);
    }
    return all ? kExitPass : kExitMathFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"factorization toolkit for contractively contained spaces nearly invariant "
                 "under division by an inner function"};
    app.require_subcommand(1);

    std::string spec_path, json_path, fixture;
    double tol = 1e-8;
    double eps = 1e-12;
    int m_max = -1;

    CLI::App* check = app.add_subcommand("check", "validate a spec and run the hypothesis checks");
    check->add_option("spec", spec_path, "spec file (JSON)")->required();
    check->add_option("--tol", tol, "membership residual tolerance");
    check->add_option("--json", json_path, "write the machine-readable report here");

    CLI::App* factorize = app.add_subcommand("factorize", "run the factorization and audits");
    factorize->add_option("spec", spec_path, "spec file (JSON)")->required();
    factorize->add_option("--m-max", m_max, "iteration cap (default: automatic)");
    factorize->add_option("--eps", eps, "relative tail size that stops the iteration");
    factorize->add_option("--json", json_path, "write the machine-readable report here");

    CLI::App* reproduce =
        app.add_subcommand("reproduce", "rebuild a named fixture and verify its golden values");
    reproduce->add_option("fixture", fixture, "eh1 | eh2 | dirichlet-alpha | defect-basic")
        ->required();
    reproduce->add_option("--json", json_path, "write the machine-readable report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitInputError;
    }

    try {
        if (check->parsed()) return cmd_check(spec_path, tol, json_path);
        if (factorize->parsed()) return cmd_factorize(spec_path, m_max, eps, json_path);
        return cmd_reproduce(fixture, json_path);
    } catch (const ValidationError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const HypothesisError& e) {
        std::cerr << "hypothesis failure: " << e.what() << "\n";
        return kExitMathFail;
    } catch (const ContainmentError& e) {
        std::cerr << "degenerate space: " << e.what() << "\n";
        return kExitMathFail;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitMathFail;
    }
}
