#include "nearinv/operators.hpp"

#include <algorithm>
#include <cmath>

namespace nearinv {

TruncatedSeries OpMatrix::apply(const TruncatedSeries& f) const {
    if (mat.cols() != f.flattened().size())
        throw ValidationError("operator: shape does not match the series");
    const int n = f.components();
    const int d = f.degree();
    const int valid = std::clamp(f.valid_degree() - degree_loss, 0, d);
    return TruncatedSeries::from_flattened(mat * f.flattened(), n, d, valid);
}

OpMatrix compose(const OpMatrix& outer, const OpMatrix& inner) {
    if (outer.domain_tag != inner.codomain_tag)
        throw ValidationError("operator: composition tags do not match");
    return OpMatrix{outer.mat * inner.mat, inner.domain_tag, outer.codomain_tag,
                    outer.degree_loss + inner.degree_loss};
}

std::pair<OpMatrix, OpMatrix> shift_matrices(const AmbientSpace& h) {
    const int n = h.components();
    const int d = h.degree();
    const Eigen::Index flat = static_cast<Eigen::Index>(n) * (d + 1);
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(flat, flat);
    Eigen::MatrixXcd bs = Eigen::MatrixXcd::Zero(flat, flat);
    for (int m = 0; m + 1 <= d; ++m) {
        for (int c = 0; c < n; ++c) {
            s((m + 1) * n + c, m * n + c) = 1.0;  // z h
            bs(m * n + c, (m + 1) * n + c) = 1.0; // (h - h(0))/z
        }
    }
    return {OpMatrix{std::move(s), h.tag(), h.tag(), 0},
            OpMatrix{std::move(bs), h.tag(), h.tag(), 1}};
}

OpMatrix mult_by_inner(const AmbientSpace& h, const InnerFunction& phi) {
    const int n = h.components();
    const int d = h.degree();
    TruncatedSeries sym = blaschke_taylor(phi, d);
    const Eigen::Index flat = static_cast<Eigen::Index>(n) * (d + 1);
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(flat, flat);
    for (int i = 0; i <= d; ++i)
        for (int j = 0; j <= i; ++j)
            for (int c = 0; c < n; ++c) t(i * n + c, j * n + c) = sym.scalar_coeff(i - j);
    return OpMatrix{std::move(t), h.tag(), h.tag(), 0};
}

OpMatrix toeplitz_adjoint(const AmbientSpace& h, const InnerFunction& phi) {
    OpMatrix t = mult_by_inner(h, phi);
    Eigen::MatrixXcd adj;
    if (h.kind() == AmbientKind::hardy) {
        adj = t.mat.adjoint();
    } else {
        Eigen::VectorXd w = h.flattened_weights();
        adj = w.cwiseInverse().asDiagonal() * t.mat.adjoint() * w.asDiagonal();
    }
    return OpMatrix{std::move(adj), h.tag(), h.tag(), phi.degree()};
}

double windowed_lower_bound(const AmbientSpace& h, const InnerFunction& phi, int domain_degree) {
    if (domain_degree < 0 || domain_degree > h.degree())
        throw ValidationError("lower bound: domain degree outside the window");
    OpMatrix t = mult_by_inner(h, phi);
    const int n = h.components();
    Eigen::VectorXd sw = h.flattened_sqrt_weights();
    Eigen::MatrixXcd a = sw.asDiagonal() * t.mat *
                         sw.cwiseInverse().asDiagonal();
    Eigen::MatrixXcd windowed = a.leftCols(static_cast<Eigen::Index>(n) * (domain_degree + 1));
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(windowed);
    return svd.singularValues().minCoeff();
}

DivisionResult divide_by_inner(const AmbientSpace& h_space, const TruncatedSeries& h,
                               const InnerFunction& phi, double tol) {
    if (h.components() != h_space.components() || h.degree() != h_space.degree())
        throw ValidationError("divide: series does not live in the ambient");
    const int n = h_space.components();
    const int d = h_space.degree();
    const int v = h.valid_degree();
    const int m0 = phi.origin_multiplicity();

    DivisionResult out;
    out.quotient = TruncatedSeries(n, d);

    OpMatrix t = mult_by_inner(h_space, phi);
    Eigen::VectorXd sw = h_space.flattened_sqrt_weights();
    const int rows = n * (v + 1);
    const int quot_deg = v - m0;
    Eigen::VectorXcd target = sw.cwiseProduct(h.flattened());

    if (quot_deg < 0) {
        out.residual_abs = target.head(rows).norm();
        out.residual_rel = out.residual_abs > 0.0 ? 1.0 : 0.0;
        out.quotient.set_valid_degree(0);
        out.ok = out.residual_abs == 0.0;
        return out;
    }

    Eigen::MatrixXcd cols = (sw.asDiagonal() * t.mat).leftCols(n * (quot_deg + 1));
    MembershipResult ls = detail::solve_membership(cols, target, rows);
    Eigen::VectorXcd flat = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n) * (d + 1));
    flat.head(ls.coords.size()) = ls.coords;
    out.quotient = TruncatedSeries::from_flattened(flat, n, d, quot_deg);
    out.residual_abs = ls.residual_abs;
    out.residual_rel = ls.residual_rel;
    out.ok = ls.residual_rel <= tol;
    return out;
}

std::vector<Eigen::VectorXcd> intersect_with_phiH(const ContractiveSpace& m,
                                                  const InnerFunction& phi, double tol) {
    const int n = m.ambient().components();
    const int d = m.dim();

    // Aggregate repeated zeros into multiplicities.
    std::vector<std::pair<Complex, int>> distinct;
    for (const Complex& a : phi.zeros()) {
        bool found = false;
        for (auto& [z, mu] : distinct)
            if (z == a) {
                ++mu;
                found = true;
            }
        if (!found) distinct.emplace_back(a, 1);
    }

    int total = 0;
    for (const auto& [z, mu] : distinct) total += mu;
    Eigen::MatrixXcd constraints(static_cast<Eigen::Index>(total) * n, d);
    Eigen::Index row = 0;
    for (const auto& [a, mu] : distinct) {
        for (int t = 0; t < mu; ++t) {
            // t-th Taylor coefficient at a: sum_m C(m, t) A_m a^{m-t}.
            for (int j = 0; j < d; ++j) {
                Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(n);
                const auto& c = m.basis()[static_cast<size_t>(j)].coeffs();
                double binom = 1.0;
                Complex pw = 1.0;
                for (int deg = t; deg <= m.ambient().degree(); ++deg) {
                    acc += binom * pw * c.col(deg);
                    pw *= a;
                    binom = binom * (deg + 1) / (deg + 1 - t);
                }
                constraints.block(row, j, n, 1) = acc;
            }
            row += n;
        }
    }

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(constraints, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    std::vector<Eigen::VectorXcd> out;
    for (int j = 0; j < d; ++j) {
        const double s = j < sv.size() ? sv(j) : 0.0;
        if (smax == 0.0 || s <= tol * smax) out.push_back(svd.matrixV().col(j));
    }
    return out;
}

namespace {

ProjectionSet projections_for(const Eigen::MatrixXcd& gram, const Eigen::MatrixXcd& target,
                              int defect_dim) {
    const Eigen::Index dim = gram.rows();
    ProjectionSet out;
    out.l = Eigen::MatrixXcd::Zero(dim, dim);
    if (defect_dim > 0)
        out.l.bottomRightCorner(defect_dim, defect_dim) =
            Eigen::MatrixXcd::Identity(defect_dim, defect_dim);
    if (target.cols() == 0) {
        out.p = Eigen::MatrixXcd::Zero(dim, dim);
    } else {
        Eigen::MatrixXcd small = target.adjoint() * gram * target;
        Eigen::LLT<Eigen::MatrixXcd> llt(0.5 * (small + small.adjoint().eval()));
        if (llt.info() != Eigen::Success)
            throw ValidationError("projection: rank-deficient target basis");
        out.p = target * llt.solve(target.adjoint() * gram);
    }
    out.q = Eigen::MatrixXcd::Identity(dim, dim) - out.p - out.l;
    return out;
}

} // namespace

ProjectionSet project_in_m(const ContractiveSpace& m,
                           const std::vector<Eigen::VectorXcd>& target) {
    Eigen::MatrixXcd t(m.dim(), static_cast<Eigen::Index>(target.size()));
    for (size_t j = 0; j < target.size(); ++j) t.col(static_cast<Eigen::Index>(j)) = target[j];
    return projections_for(m.gram(), t, 0);
}

ProjectionSet project_in_sum(const SumSpace& s, const std::vector<Eigen::VectorXcd>& target_m) {
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(s.dim(), static_cast<Eigen::Index>(target_m.size()));
    for (size_t j = 0; j < target_m.size(); ++j)
        t.col(static_cast<Eigen::Index>(j)).head(s.m().dim()) = target_m[j];
    return projections_for(s.gram_plus(), t, s.f().dim());
}

} // namespace nearinv
