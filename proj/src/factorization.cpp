#include "nearinv/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nearinv {

namespace {

// Plain H^2 pairing of scalar series over the common trusted window,
// linear in the first argument. The extracted coefficient functions live
// in the unweighted Hardy space regardless of the ambient weights.
Complex hardy_inner(const TruncatedSeries& f, const TruncatedSeries& g) {
    const int window = std::min(f.valid_degree(), g.valid_degree());
    Complex acc = 0.0;
    for (int m = 0; m <= window; ++m) acc += f.scalar_coeff(m) * std::conj(g.scalar_coeff(m));
    return acc;
}

const DefectSpace* normalize_defect(const DefectSpace* f) {
    return (f != nullptr && f->dim() > 0) ? f : nullptr;
}

} // namespace

NearInvarianceCertificate check_nearly_invariant(const ContractiveSpace& m,
                                                 const InnerFunction& phi, double tol,
                                                 const DefectSpace* defect) {
    defect = normalize_defect(defect);
    NearInvarianceCertificate cert;
    auto v = intersect_with_phiH(m, phi);
    cert.intersection_dim = static_cast<int>(v.size());

    std::optional<SumSpace> sum;
    if (defect) sum.emplace(m, *defect);

    for (const auto& col : v) {
        TruncatedSeries h = m.element(col);
        DivisionResult div = divide_by_inner(m.ambient(), h, phi, tol);
        double resid = 1.0;
        if (div.ok) {
            MembershipResult memb = sum ? sum->membership(div.quotient) : m.membership(div.quotient);
            resid = memb.residual_rel;
        }
        cert.max_residual = std::max(cert.max_residual, resid);
        if (resid > tol) {
            cert.pass = false;
            cert.witness = m.element(detail::phase_normalize(col, m.basis_matrix()));
            break;
        }
    }
    return cert;
}

NormHypothesisResult check_norm_hypothesis(const ContractiveSpace& m, const InnerFunction& phi,
                                           const DefectSpace* defect, double tol_rank) {
    defect = normalize_defect(defect);
    NormHypothesisResult out;
    auto v = intersect_with_phiH(m, phi, tol_rank);
    const int s = static_cast<int>(v.size());
    if (s == 0) {
        out.min_ratio = std::numeric_limits<double>::infinity();
        out.vacuous = true;
        out.pass = true;
        return out;
    }

    std::optional<SumSpace> sum;
    if (defect) sum.emplace(m, *defect);
    const int dim = m.dim() + (defect ? defect->dim() : 0);

    // Quotient space {h : phi h in M} = (1/phi)(M ∩ phi H), paired column
    // by column with the intersection basis so that phi (X_l) = V_l.
    Eigen::MatrixXcd quot(dim, s);
    Eigen::MatrixXcd inter(m.dim(), s);
    for (int l = 0; l < s; ++l) {
        TruncatedSeries h = m.element(v[static_cast<size_t>(l)]);
        DivisionResult div = divide_by_inner(m.ambient(), h, phi, 1.0);
        MembershipResult memb = sum ? sum->membership(div.quotient) : m.membership(div.quotient);
        quot.col(l) = memb.coords;
        inter.col(l) = v[static_cast<size_t>(l)];
    }

    Eigen::MatrixXcd num = inter.adjoint() * m.gram() * inter;
    Eigen::MatrixXcd gram_plus;
    if (defect) {
        gram_plus = sum->gram_plus();
    } else {
        gram_plus = m.gram();
    }
    Eigen::MatrixXcd den = quot.adjoint() * gram_plus * quot;
    num = 0.5 * (num + num.adjoint().eval());
    den = 0.5 * (den + den.adjoint().eval());

    // Drop numerically dependent quotient directions before the pencil solve.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> des(den);
    const double dmax = des.eigenvalues().maxCoeff();
    std::vector<int> keep;
    for (int j = 0; j < s; ++j)
        if (des.eigenvalues()(j) > tol_rank * dmax) keep.push_back(j);
    Eigen::MatrixXcd u(s, static_cast<Eigen::Index>(keep.size()));
    for (size_t j = 0; j < keep.size(); ++j)
        u.col(static_cast<Eigen::Index>(j)) = des.eigenvectors().col(keep[j]);
    if (u.cols() == 0) {
        out.min_ratio = std::numeric_limits<double>::infinity();
        out.vacuous = true;
        out.pass = true;
        return out;
    }

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> ges(
        (u.adjoint() * num * u).eval(), (u.adjoint() * den * u).eval());
    out.min_ratio = ges.eigenvalues().minCoeff();
    out.pass = out.min_ratio >= 1.0 - 1e-10;
    return out;
}

bool contained_in_phiH(const ContractiveSpace& m, const InnerFunction& phi, double tol_rank) {
    return static_cast<int>(intersect_with_phiH(m, phi, tol_rank).size()) == m.dim();
}

FactorizationEngine::FactorizationEngine(const ContractiveSpace& m, const DefectSpace* defect,
                                         const InnerFunction& phi, FactorizationOptions opts,
                                         bool g_from_point_evaluation)
    : m_(&m), f_(normalize_defect(defect)), phi_(phi), opts_(opts),
      phi_zero_series_(1, m.ambient().degree()) {
    if (!phi_.vanishes_at_zero())
        throw ValidationError("factorization: phi(0) must be 0");
    p_ = f_ ? f_->dim() : 0;
    dim_ = m_->dim() + p_;

    if (f_) {
        sum_ = std::make_unique<SumSpace>(*m_, *f_);
        combined_basis_ = sum_->combined_basis_matrix();
        gram_plus_ = sum_->gram_plus();
        e_series_ = f_->basis();
    } else {
        combined_basis_ = m_->basis_matrix();
        gram_plus_ = m_->gram();
    }

    // Intersection with phi H, embedded into combined coordinates.
    auto v = intersect_with_phiH(*m_, phi_, opts_.tol_rank);
    v_ = Eigen::MatrixXcd::Zero(dim_, static_cast<Eigen::Index>(v.size()));
    std::vector<Eigen::VectorXcd> v_m;
    for (size_t l = 0; l < v.size(); ++l) {
        v_.col(static_cast<Eigen::Index>(l)).head(m_->dim()) = v[l];
        v_m.push_back(v[l]);
    }
    proj_ = f_ ? project_in_sum(*sum_, v_m) : project_in_m(*m_, v_m);

    build_g_basis(g_from_point_evaluation);
    build_r_matrix();

    // Blaschke powers; phi^k vanishes inside the window once k m0 > D.
    const int d = m_->ambient().degree();
    const int m0 = phi_.origin_multiplicity();
    TruncatedSeries phit = blaschke_taylor(phi_, d);
    phi_powers_.push_back(TruncatedSeries::constant(1.0, d));
    for (int k = 1; k * m0 <= d; ++k) phi_powers_.push_back(multiply(phit, phi_powers_.back()));
}

const std::vector<TruncatedSeries>& FactorizationEngine::e_series() const { return e_series_; }

const TruncatedSeries& FactorizationEngine::phi_power(int k) const {
    if (k < 0) throw ValidationError("factorization: negative power");
    if (k < static_cast<int>(phi_powers_.size())) return phi_powers_[static_cast<size_t>(k)];
    return phi_zero_series_;
}

Complex FactorizationEngine::inner_plus(const Eigen::VectorXcd& x,
                                        const Eigen::VectorXcd& y) const {
    return (y.adjoint() * gram_plus_ * x)(0);
}

double FactorizationEngine::norm_plus(const Eigen::VectorXcd& x) const {
    return std::sqrt(std::max(0.0, inner_plus(x, x).real()));
}

TruncatedSeries FactorizationEngine::element(const Eigen::VectorXcd& combined) const {
    return TruncatedSeries::from_flattened(combined_basis_ * combined,
                                           m_->ambient().components(), m_->ambient().degree(),
                                           m_->ambient().degree());
}

Eigen::VectorXcd FactorizationEngine::embed(const Eigen::VectorXcd& m_coords) const {
    if (m_coords.size() != m_->dim())
        throw ValidationError("factorization: coordinate length mismatch");
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(dim_);
    x.head(m_->dim()) = m_coords;
    return x;
}

void FactorizationEngine::build_g_basis(bool from_point_evaluation) {
    Eigen::MatrixXcd candidates = proj_.q.leftCols(m_->dim());
    Eigen::MatrixXcd complement =
        detail::gram_schmidt_in_metric(candidates, gram_plus_, opts_.tol_rank);
    for (int j = 0; j < complement.cols(); ++j)
        complement.col(j) = detail::phase_normalize(complement.col(j), combined_basis_);

    if (from_point_evaluation) {
        Eigen::MatrixXcd pe = m_->eval_adjoint_coords(opts_.tol_rank);
        if (pe.cols() != complement.cols())
            throw NumericalError(
                "factorization: point-evaluation basis does not span the complement");
        Eigen::MatrixXcd embedded = Eigen::MatrixXcd::Zero(dim_, pe.cols());
        embedded.topRows(m_->dim()) = pe;
        for (int j = 0; j < embedded.cols(); ++j) {
            const double drift = norm_plus((proj_.p * embedded.col(j)).eval());
            if (drift > 1e-8) throw NumericalError(
                "factorization: point-evaluation vector leaks into the intersection");
        }
        for (int j = 0; j < complement.cols(); ++j) {
            Eigen::VectorXcd res = complement.col(j);
            for (int i = 0; i < embedded.cols(); ++i)
                res -= inner_plus(complement.col(j), embedded.col(i)) * embedded.col(i);
            if (norm_plus(res) > 1e-8)
                throw NumericalError(
                    "factorization: complement escapes the point-evaluation span");
        }
        g_coords_ = embedded;
    } else {
        g_coords_ = complement;
    }

    g_series_.clear();
    for (int j = 0; j < g_coords_.cols(); ++j) g_series_.push_back(element(g_coords_.col(j)));

    if (g_coords_.cols() > 0) {
        Eigen::MatrixXcd gg = g_coords_.adjoint() * gram_plus_ * g_coords_;
        g_orth_error_ =
            (gg - Eigen::MatrixXcd::Identity(gg.rows(), gg.cols())).cwiseAbs().maxCoeff();
    }
}

void FactorizationEngine::build_r_matrix() {
    r_mat_ = Eigen::MatrixXcd::Zero(dim_, dim_);
    double scale = 0.0;
    for (int j = 0; j < dim_; ++j) {
        Eigen::VectorXcd ej = Eigen::VectorXcd::Zero(dim_);
        ej(j) = 1.0;
        scale = std::max(scale, norm_plus(ej));
    }
    for (int j = 0; j < dim_; ++j) {
        Eigen::VectorXcd px = proj_.p.col(j);
        if (norm_plus(px) <= 1e-14 * scale) continue;
        TruncatedSeries s = element(px);
        DivisionResult div = divide_by_inner(m_->ambient(), s, phi_, opts_.tol);
        if (!div.ok) {
            std::ostringstream os;
            os << "factorization: division by phi fails on basis column " << j
               << " (relative residual " << div.residual_rel << ")";
            throw NumericalError(os.str());
        }
        MembershipResult memb = f_ ? sum_->membership(div.quotient) : m_->membership(div.quotient);
        if (memb.residual_rel > opts_.tol) {
            std::ostringstream os;
            os << "factorization: quotient escapes the space on basis column " << j
               << " (relative residual " << memb.residual_rel << ")";
            throw NumericalError(os.str());
        }
        r_mat_.col(j) = memb.coords;
        r_build_residual_ =
            std::max({r_build_residual_, div.residual_rel, memb.residual_rel});
    }
}

IterationTrace FactorizationEngine::iterate(const Eigen::VectorXcd& m_coords) const {
    const int m_max = opts_.m_max < 0 ? 512 : opts_.m_max;
    IterationTrace trace;
    Eigen::VectorXcd x = embed(m_coords);
    const double h_norm = norm_plus(x);
    double budget = 0.0;

    for (int k = 0;; ++k) {
        IterationStep step;
        step.r_coords = x;
        step.r_norm = norm_plus(x);
        step.c_row = g_coords_.adjoint() * gram_plus_ * x;
        step.d_row = x.tail(p_);
        budget += step.c_row.squaredNorm();
        if (k >= 1) budget += step.d_row.squaredNorm();
        trace.bessel_excess = std::max(trace.bessel_excess, budget - h_norm * h_norm);
        trace.steps.push_back(std::move(step));

        Eigen::VectorXcd x_next = r_mat_ * x;
        const double next_norm = norm_plus(x_next);
        const double cur_norm = trace.steps.back().r_norm;
        if (cur_norm > 1e-300) {
            const double ratio = next_norm / cur_norm;
            trace.max_contraction_ratio = std::max(trace.max_contraction_ratio, ratio);
            if (ratio > 1.0 + 1e-6) {
                std::ostringstream os;
                os << "factorization: contraction violated at step " << k << " (ratio " << ratio
                   << "); hypothesis violation or truncation exhaustion";
                throw NumericalError(os.str());
            }
        }
        if (trace.bessel_excess > 1e-6 * std::max(1.0, h_norm * h_norm)) {
            std::ostringstream os;
            os << "factorization: coefficient budget exceeded at step " << k;
            throw NumericalError(os.str());
        }

        if (next_norm <= opts_.eps * h_norm || k + 1 > m_max) {
            trace.tail_coords = std::move(x_next);
            trace.tail_norm = next_norm;
            trace.tail_converged = next_norm <= opts_.eps * h_norm;
            break;
        }
        x = std::move(x_next);
    }
    return trace;
}

FactorizationReport FactorizationEngine::factorize(const Eigen::VectorXcd& m_coords) const {
    IterationTrace trace = iterate(m_coords);
    const int m = static_cast<int>(trace.steps.size()) - 1;
    const int d = m_->ambient().degree();
    const int n = m_->ambient().components();
    const int rr = r();

    FactorizationReport rep;
    rep.tail_norm = trace.tail_norm;
    rep.tail_converged = trace.tail_converged;
    rep.max_contraction_ratio = trace.max_contraction_ratio;
    rep.bessel_excess = trace.bessel_excess;

    rep.coeffs_c.resize(rr, m + 1);
    for (int k = 0; k <= m; ++k) rep.coeffs_c.col(k) = trace.steps[static_cast<size_t>(k)].c_row;
    rep.coeffs_d.resize(p_, std::max(0, m));
    for (int k = 1; k <= m; ++k)
        rep.coeffs_d.col(k - 1) = trace.steps[static_cast<size_t>(k)].d_row;

    TruncatedSeries h = element(embed(m_coords));
    const double h_norm = norm_plus(embed(m_coords));
    rep.budget.h_norm_sq = h_norm * h_norm;
    rep.budget.extracted_sq = rep.coeffs_c.squaredNorm() + rep.coeffs_d.squaredNorm();

    // f_i = sum_k c_{ki} phi^k, t_j = sum_k d_{kj} phi^{k-1}.
    TruncatedSeries recon(n, d);
    for (int i = 0; i < rr; ++i) {
        TruncatedSeries q(1, d);
        for (int k = 0; k <= std::min(m, d); ++k) q.coeff(0, k) = rep.coeffs_c(i, k);
        rep.f_series.push_back(compose_with_inner(q, phi_));
        recon += multiply(rep.f_series.back(), g_series_[static_cast<size_t>(i)]);
    }
    if (p_ > 0 && m >= 1) {
        TruncatedSeries tpart(n, d);
        for (int j = 0; j < p_; ++j) {
            TruncatedSeries q(1, d);
            for (int k = 1; k <= m && k - 1 <= d; ++k) q.coeff(0, k - 1) = rep.coeffs_d(j, k - 1);
            rep.t_series.push_back(compose_with_inner(q, phi_));
            tpart += multiply(rep.t_series.back(), e_series_[static_cast<size_t>(j)]);
        }
        recon += multiply(phi_power(1), tpart);
    } else {
        for (int j = 0; j < p_; ++j) rep.t_series.push_back(TruncatedSeries(1, d));
    }
    rep.reconstruction = recon;
    rep.reconstruction_residual = (h - recon).max_abs_coeff();
    const double w0 = m_->ambient().weights()(0);
    rep.reconstruction_tolerance =
        2.0 * rep.tail_norm / std::sqrt(w0) + 1e-9 * std::max(1.0, h_norm);

    // Adjoint-shift audit: dropping the k = 0 coefficient row of every
    // generator and reassembling must land back inside M.
    {
        TruncatedSeries shifted(n, d);
        for (int i = 0; i < rr; ++i) {
            TruncatedSeries q(1, d);
            for (int k = 1; k <= std::min(m, d + 1) && k - 1 <= d; ++k)
                q.coeff(0, k - 1) = rep.coeffs_c(i, k);
            shifted += multiply(compose_with_inner(q, phi_), g_series_[static_cast<size_t>(i)]);
        }
        if (p_ > 0 && m >= 2) {
            TruncatedSeries tpart(n, d);
            for (int j = 0; j < p_; ++j) {
                TruncatedSeries q(1, d);
                for (int k = 2; k <= m && k - 2 <= d; ++k)
                    q.coeff(0, k - 2) = rep.coeffs_d(j, k - 1);
                tpart += multiply(compose_with_inner(q, phi_), e_series_[static_cast<size_t>(j)]);
            }
            shifted += multiply(phi_power(1), tpart);
        }
        if (m_->ambient().norm(shifted) <= 1e-12 * std::max(1.0, h_norm)) {
            rep.invariance_residual = 0.0;
        } else {
            rep.invariance_residual = m_->membership(shifted).residual_rel;
        }
    }

    // Coefficient-extraction identity <f_i, phi^k> = c_{ki}, audited while
    // the truncated phi powers still carry their full Hardy mass.
    {
        double worst = 0.0;
        for (int k = 0; k <= m; ++k) {
            const TruncatedSeries& pw = phi_power(k);
            const double mass = pw.flattened().squaredNorm();
            if (mass < 1.0 - 1e-10) break;
            for (int i = 0; i < rr; ++i) {
                Complex lhs = hardy_inner(rep.f_series[static_cast<size_t>(i)], pw);
                worst = std::max(worst, std::abs(lhs - rep.coeffs_c(i, k)));
            }
            for (int j = 0; j < p_; ++j) {
                if (k + 1 > m) continue;
                Complex lhs = hardy_inner(rep.t_series[static_cast<size_t>(j)], pw);
                worst = std::max(worst, std::abs(lhs - rep.coeffs_d(j, k)));
            }
        }
        rep.coeff_identity_residual = worst;
    }

    return rep;
}

double FactorizationReport::f_norm_sq() const { return coeffs_c.squaredNorm(); }
double FactorizationReport::t_norm_sq() const { return coeffs_d.squaredNorm(); }

bool FactorizationReport::budget_ok() const {
    return budget.extracted_sq <= budget.h_norm_sq + 1e-9 + 1e-12 * budget.h_norm_sq;
}

bool FactorizationReport::pass(double tol) const {
    return tail_converged && budget_ok() && reconstruction_residual <= reconstruction_tolerance &&
           invariance_residual <= tol && coeff_identity_residual <= tol &&
           max_contraction_ratio <= 1.0 + 1e-12 && bessel_excess <= 1e-9;
}

IterationTrace contraction_iteration(const ContractiveSpace& m, const DefectSpace* defect,
                                     const InnerFunction& phi, const TruncatedSeries& h,
                                     FactorizationOptions opts) {
    FactorizationEngine engine(m, defect, phi, opts);
    MembershipResult memb = m.membership(h);
    if (memb.residual_rel > opts.tol)
        throw ValidationError("iteration: h is not a member of M");
    return engine.iterate(memb.coords);
}

std::vector<double> identity_residuals(const FactorizationEngine& engine,
                                       const TruncatedSeries& h, const IterationTrace& trace) {
    const int m_stop = static_cast<int>(trace.steps.size()) - 1;
    std::vector<double> out;
    TruncatedSeries running(h.components(), h.degree());
    for (int m = 0; m <= m_stop; ++m) {
        const auto& step = trace.steps[static_cast<size_t>(m)];
        Eigen::VectorXcd ql = (engine.proj_q() + engine.proj_l()) * step.r_coords;
        const TruncatedSeries& pw = engine.phi_power(m);
        if (!pw.is_zero()) running += multiply(pw, engine.element(ql));
        const Eigen::VectorXcd& tail_coords =
            m < m_stop ? trace.steps[static_cast<size_t>(m + 1)].r_coords : trace.tail_coords;
        TruncatedSeries residual = h - running;
        const TruncatedSeries& pw_tail = engine.phi_power(m + 1);
        if (!pw_tail.is_zero()) residual -= multiply(pw_tail, engine.element(tail_coords));
        out.push_back(residual.max_abs_coeff());
    }
    return out;
}

bool SpaceFactorization::pass() const {
    if (!near_invariance.pass || !norm_hypothesis.pass) return false;
    if (g_orthonormality_error > 1e-10) return false;
    for (const auto& rep : reports)
        if (!rep.pass(options.tol)) return false;
    return true;
}

namespace {

SpaceFactorization run_factorization(const ContractiveSpace& m, const DefectSpace* f,
                                     const InnerFunction& phi, FactorizationOptions opts,
                                     bool hardy_mode) {
    f = normalize_defect(f);
    if (!phi.vanishes_at_zero())
        throw ValidationError("factorize: phi(0) must be 0");

    if (!f && contained_in_phiH(m, phi, opts.tol_rank))
        throw ContainmentError(
            "factorize: M sits inside phi*H and no defect space is declared; every member "
            "would need a zero of unbounded order, so only the zero subspace is consistent");

    NearInvarianceCertificate cert = check_nearly_invariant(m, phi, opts.tol, f);
    if (!cert.pass) {
        std::ostringstream os;
        os << "factorize: near invariance fails (membership residual " << cert.max_residual
           << ")";
        throw HypothesisError(os.str());
    }
    NormHypothesisResult ratio = check_norm_hypothesis(m, phi, f, opts.tol_rank);
    if (!ratio.pass) {
        std::ostringstream os;
        os << "factorize: norm hypothesis fails (min ratio " << ratio.min_ratio << ")";
        throw HypothesisError(os.str());
    }

    FactorizationEngine engine(m, f, phi, opts, hardy_mode);
    SpaceFactorization out;
    out.g_basis = engine.g_series();
    out.defect_basis = engine.e_series();
    out.contained_in_phi_h = engine.contained_in_phi_h();
    out.near_invariance = std::move(cert);
    out.norm_hypothesis = ratio;
    out.g_orthonormality_error = engine.g_orthonormality_error();
    out.options = opts;
    for (int j = 0; j < m.dim(); ++j) {
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(m.dim());
        e(j) = 1.0;
        out.reports.push_back(engine.factorize(e));
    }
    return out;
}

} // namespace

SpaceFactorization hardy_vector_factorize(const ContractiveSpace& m, FactorizationOptions opts) {
    if (m.ambient().kind() != AmbientKind::hardy)
        throw ValidationError("factorize: the backward-shift form requires a Hardy ambient");
    return run_factorization(m, nullptr, InnerFunction({Complex(0.0, 0.0)}), opts, true);
}

SpaceFactorization branges_factorize(const ContractiveSpace& m, const InnerFunction& phi,
                                     FactorizationOptions opts) {
    return run_factorization(m, nullptr, phi, opts, false);
}

SpaceFactorization defect_factorize(const ContractiveSpace& m, const DefectSpace& f,
                                    const InnerFunction& phi, FactorizationOptions opts) {
    return run_factorization(m, &f, phi, opts, false);
}

} // namespace nearinv
