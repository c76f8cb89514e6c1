#include "nearinv/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nearinv {

AmbientSpace::AmbientSpace(AmbientKind kind, int n, int d, Eigen::VectorXd w, double alpha)
    : kind_(kind), n_(n), d_(d), weights_(std::move(w)), alpha_(alpha) {
    if (n_ < 1) throw ValidationError("ambient: component count must be >= 1");
    if (d_ < 0) throw ValidationError("ambient: working degree must be >= 0");
    if (weights_.size() != d_ + 1) throw ValidationError("ambient: weight count must be D + 1");
    for (int m = 0; m <= d_; ++m) {
        if (!(weights_(m) > 0.0)) throw ValidationError("ambient: weights must be positive");
        if (m > 0 && weights_(m) < weights_(m - 1))
            throw ValidationError("ambient: weights must be nondecreasing");
    }
}

AmbientSpace AmbientSpace::hardy(int components, int degree) {
    return AmbientSpace(AmbientKind::hardy, components, degree,
                        Eigen::VectorXd::Ones(degree + 1), 0.0);
}

AmbientSpace AmbientSpace::dirichlet(int components, int degree, double alpha) {
    if (alpha < 0.0 || alpha > 1.0)
        throw ValidationError("ambient: dirichlet alpha must lie in [0, 1]");
    Eigen::VectorXd w(degree + 1);
    for (int m = 0; m <= degree; ++m) w(m) = std::pow(m + 1.0, alpha);
    return AmbientSpace(AmbientKind::dirichlet_alpha, components, degree, std::move(w), alpha);
}

AmbientSpace AmbientSpace::custom(int components, int degree, Eigen::VectorXd weights) {
    return AmbientSpace(AmbientKind::custom, components, degree, std::move(weights), 0.0);
}

Eigen::VectorXd AmbientSpace::flattened_weights() const {
    Eigen::VectorXd w(n_ * (d_ + 1));
    for (int m = 0; m <= d_; ++m) w.segment(m * n_, n_).setConstant(weights_(m));
    return w;
}

Eigen::VectorXd AmbientSpace::flattened_sqrt_weights() const {
    return flattened_weights().cwiseSqrt();
}

Complex AmbientSpace::inner(const TruncatedSeries& f, const TruncatedSeries& g) const {
    if (f.components() != n_ || g.components() != n_ || f.degree() != d_ || g.degree() != d_)
        throw ValidationError("ambient: series does not live in this space");
    const int window = std::min(f.valid_degree(), g.valid_degree());
    Complex acc = 0.0;
    for (int m = 0; m <= window; ++m)
        acc += weights_(m) * g.coeffs().col(m).dot(f.coeffs().col(m)); // dot conjugates its caller
    return acc;
}

double AmbientSpace::norm(const TruncatedSeries& f) const {
    return std::sqrt(std::max(0.0, inner(f, f).real()));
}

std::string AmbientSpace::tag() const {
    std::ostringstream os;
    switch (kind_) {
        case AmbientKind::hardy: os << "H2"; break;
        case AmbientKind::dirichlet_alpha: os << "D(" << alpha_ << ")"; break;
        case AmbientKind::custom: os << "custom"; break;
    }
    os << "[n=" << n_ << ",D=" << d_ << "]";
    return os.str();
}

bool AmbientSpace::operator==(const AmbientSpace& o) const {
    return kind_ == o.kind_ && n_ == o.n_ && d_ == o.d_ && weights_ == o.weights_;
}

namespace detail {

MembershipResult solve_membership(const Eigen::MatrixXcd& weighted_columns,
                                  const Eigen::VectorXcd& weighted_target, int rows) {
    MembershipResult out;
    Eigen::MatrixXcd a = weighted_columns.topRows(rows);
    Eigen::VectorXcd b = weighted_target.head(rows);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(a);
    out.coords = cod.solve(b);
    out.residual_abs = (a * out.coords - b).norm();
    const double scale = b.norm();
    out.residual_rel = scale > 0.0 ? out.residual_abs / scale : 0.0;
    return out;
}

Eigen::MatrixXcd gram_schmidt_in_metric(const Eigen::MatrixXcd& candidates,
                                        const Eigen::MatrixXcd& metric, double rel_tol) {
    const auto metric_norm = [&](const Eigen::VectorXcd& v) {
        return std::sqrt(std::max(0.0, (v.adjoint() * metric * v)(0).real()));
    };
    double scale = 0.0;
    for (int j = 0; j < candidates.cols(); ++j)
        scale = std::max(scale, metric_norm(candidates.col(j)));
    std::vector<Eigen::VectorXcd> kept;
    for (int j = 0; j < candidates.cols(); ++j) {
        Eigen::VectorXcd v = candidates.col(j);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& u : kept) v -= ((u.adjoint() * metric * v)(0)) * u;
        const double nrm = metric_norm(v);
        if (nrm > rel_tol * scale && nrm > 0.0) kept.push_back(v / nrm);
    }
    Eigen::MatrixXcd out(candidates.rows(), static_cast<Eigen::Index>(kept.size()));
    for (size_t j = 0; j < kept.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = kept[j];
    return out;
}

Eigen::VectorXcd phase_normalize(const Eigen::VectorXcd& coords,
                                 const Eigen::MatrixXcd& basis_matrix) {
    Eigen::VectorXcd flat = basis_matrix * coords;
    const double mx = flat.cwiseAbs().maxCoeff();
    if (mx == 0.0) return coords;
    for (Eigen::Index i = 0; i < flat.size(); ++i) {
        if (std::abs(flat(i)) > 1e-12 * mx) {
            Complex c = flat(i);
            return coords * (std::abs(c) / c);
        }
    }
    return coords;
}

} // namespace detail

ContractiveSpace::ContractiveSpace(AmbientSpace ambient, std::vector<TruncatedSeries> basis,
                                   Eigen::MatrixXcd gram)
    : ambient_(std::move(ambient)), basis_(std::move(basis)), gram_(std::move(gram)) {
    validate();
}

ContractiveSpace ContractiveSpace::with_gram(AmbientSpace ambient,
                                             std::vector<TruncatedSeries> basis,
                                             Eigen::MatrixXcd gram) {
    return ContractiveSpace(std::move(ambient), std::move(basis), std::move(gram));
}

ContractiveSpace ContractiveSpace::with_injection(AmbientSpace ambient,
                                                  std::vector<TruncatedSeries> basis,
                                                  const Eigen::MatrixXcd& injection) {
    Eigen::MatrixXcd g = gram_of_injection(ambient, injection, basis);
    return ContractiveSpace(std::move(ambient), std::move(basis), std::move(g));
}

ContractiveSpace ContractiveSpace::with_ambient_metric(AmbientSpace ambient,
                                                       std::vector<TruncatedSeries> basis) {
    const int n = ambient.components();
    const int d = ambient.degree();
    Eigen::MatrixXcd b(n * (d + 1), static_cast<Eigen::Index>(basis.size()));
    for (size_t j = 0; j < basis.size(); ++j) b.col(static_cast<Eigen::Index>(j)) = basis[j].flattened();
    Eigen::MatrixXcd g = b.adjoint() * ambient.flattened_weights().asDiagonal() * b;
    return ContractiveSpace(std::move(ambient), std::move(basis), std::move(g));
}

void ContractiveSpace::validate() {
    const int d = dim();
    if (d == 0) throw ValidationError("space: basis must be nonempty");
    for (const auto& b : basis_) {
        if (b.components() != ambient_.components() || b.degree() != ambient_.degree())
            throw ValidationError("space: basis element does not live in the ambient");
        if (b.valid_degree() != b.degree())
            throw ValidationError("space: basis elements must be trusted to the full degree");
    }
    if (gram_.rows() != d || gram_.cols() != d)
        throw ValidationError("space: gram matrix shape does not match the basis");

    bmat_.resize(ambient_.components() * (ambient_.degree() + 1), d);
    for (int j = 0; j < d; ++j) bmat_.col(j) = basis_[static_cast<size_t>(j)].flattened();
    weighted_bmat_ = ambient_.flattened_sqrt_weights().asDiagonal() * bmat_;

    const double gscale = std::max(1.0, gram_.cwiseAbs().maxCoeff());
    if ((gram_ - gram_.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * gscale)
        throw ValidationError("space: gram matrix is not Hermitian");
    gram_ = 0.5 * (gram_ + gram_.adjoint().eval());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram_);
    gram_min_eig_ = es.eigenvalues().minCoeff();
    gram_max_eig_ = es.eigenvalues().maxCoeff();
    if (!(gram_min_eig_ > 0.0))
        throw ValidationError("space: gram matrix is not positive definite");

    // Contractive containment of the inclusion: G - B^H W B >= 0 up to a floor.
    Eigen::MatrixXcd slack = gram_ - weighted_bmat_.adjoint() * weighted_bmat_;
    slack = 0.5 * (slack + slack.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es2(slack);
    const double floor = -1e-10 * std::max(1.0, gram_max_eig_);
    if (es2.eigenvalues().minCoeff() < floor) {
        std::ostringstream os;
        os << "space: inclusion into the ambient is not contractive (min eigenvalue of "
              "G - B^H W B is "
           << es2.eigenvalues().minCoeff() << ")";
        throw ValidationError(os.str());
    }

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(bmat_);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-10 * sv(0))
        throw ValidationError("space: basis is numerically dependent");

    gram_llt_.compute(gram_);
}

TruncatedSeries ContractiveSpace::element(const Eigen::VectorXcd& coords) const {
    if (coords.size() != dim()) throw ValidationError("space: coordinate length mismatch");
    return TruncatedSeries::from_flattened(bmat_ * coords, ambient_.components(),
                                           ambient_.degree(), ambient_.degree());
}

Complex ContractiveSpace::inner_m(const Eigen::VectorXcd& x, const Eigen::VectorXcd& y) const {
    if (x.size() != dim() || y.size() != dim())
        throw ValidationError("space: coordinate length mismatch");
    return (y.adjoint() * gram_ * x)(0);
}

double ContractiveSpace::norm_m(const Eigen::VectorXcd& x) const {
    return std::sqrt(std::max(0.0, inner_m(x, x).real()));
}

MembershipResult ContractiveSpace::membership(const TruncatedSeries& h) const {
    if (h.components() != ambient_.components() || h.degree() != ambient_.degree())
        throw ValidationError("space: series does not live in the ambient");
    const int rows = ambient_.components() * (h.valid_degree() + 1);
    Eigen::VectorXcd target =
        ambient_.flattened_sqrt_weights().cwiseProduct(h.flattened());
    return detail::solve_membership(weighted_bmat_, target, rows);
}

Eigen::MatrixXcd ContractiveSpace::kernel_vectors(Complex w) const {
    if (std::abs(w) >= 1.0) throw ValidationError("kernel: point must satisfy |w| < 1");
    if (gram_condition() > 1e14) {
        std::ostringstream os;
        os << "kernel: gram matrix too ill-conditioned (condition estimate " << gram_condition()
           << ")";
        throw NumericalError(os.str());
    }
    const int n = ambient_.components();
    Eigen::MatrixXcd evals(n, dim()); // evals(i, j) = component i of b_j(w)
    for (int j = 0; j < dim(); ++j) evals.col(j) = basis_[static_cast<size_t>(j)].evaluate(w);
    return gram_llt_.solve(evals.adjoint());
}

Eigen::MatrixXcd ContractiveSpace::eval_adjoint_coords(double rank_tol) const {
    // E_0^* e_i has coordinates G^{-1} (basis values at 0)^H, column i.
    const int n = ambient_.components();
    Eigen::MatrixXcd evals(n, dim());
    for (int j = 0; j < dim(); ++j) evals.col(j) = basis_[static_cast<size_t>(j)].coeffs().col(0);
    Eigen::MatrixXcd k = gram_llt_.solve(evals.adjoint());

    double scale = 0.0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, norm_m(k.col(i)));
    if (scale <= 1e-14) return Eigen::MatrixXcd(dim(), 0); // every member vanishes at 0

    Eigen::MatrixXcd ortho = detail::gram_schmidt_in_metric(k, gram_, rank_tol);
    for (int j = 0; j < ortho.cols(); ++j)
        ortho.col(j) = detail::phase_normalize(ortho.col(j), bmat_);
    return ortho;
}

std::vector<TruncatedSeries> ContractiveSpace::eval_adjoint_basis(double rank_tol) const {
    Eigen::MatrixXcd coords = eval_adjoint_coords(rank_tol);
    std::vector<TruncatedSeries> out;
    out.reserve(static_cast<size_t>(coords.cols()));
    for (int j = 0; j < coords.cols(); ++j) out.push_back(element(coords.col(j)));
    return out;
}

Eigen::MatrixXcd gram_of_injection(const AmbientSpace& metric_space,
                                   const Eigen::MatrixXcd& injection,
                                   const std::vector<TruncatedSeries>& basis) {
    const int n = metric_space.components();
    const int d = metric_space.degree();
    const Eigen::Index flat = static_cast<Eigen::Index>(n) * (d + 1);
    if (injection.rows() != flat || injection.cols() != flat)
        throw ValidationError("injection: map must act on flattened ambient coordinates");
    Eigen::MatrixXcd images(flat, static_cast<Eigen::Index>(basis.size()));
    for (size_t j = 0; j < basis.size(); ++j)
        images.col(static_cast<Eigen::Index>(j)) = injection * basis[j].flattened();
    Eigen::MatrixXcd g =
        images.adjoint() * metric_space.flattened_weights().asDiagonal() * images;
    g = 0.5 * (g + g.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g);
    if (!(es.eigenvalues().minCoeff() > 1e-12 * std::max(1.0, es.eigenvalues().maxCoeff())))
        throw ValidationError("injection: map is not injective on the basis span");
    return g;
}

DefectSpace::DefectSpace(const AmbientSpace& ambient, const std::vector<TruncatedSeries>& raw_basis)
    : ambient_(ambient) {
    for (const auto& b : raw_basis)
        if (b.components() != ambient_.components() || b.degree() != ambient_.degree())
            throw ValidationError("defect: basis element does not live in the ambient");
    if (raw_basis.empty()) {
        bmat_.resize(ambient_.components() * (ambient_.degree() + 1), 0);
        return;
    }
    Eigen::MatrixXcd cand(ambient_.components() * (ambient_.degree() + 1),
                          static_cast<Eigen::Index>(raw_basis.size()));
    for (size_t j = 0; j < raw_basis.size(); ++j)
        cand.col(static_cast<Eigen::Index>(j)) = raw_basis[j].flattened();
    Eigen::MatrixXcd metric = ambient_.flattened_weights().asDiagonal();
    Eigen::MatrixXcd ortho = detail::gram_schmidt_in_metric(cand, metric, 1e-10);
    if (ortho.cols() != static_cast<Eigen::Index>(raw_basis.size()))
        throw ValidationError("defect: basis is numerically dependent");
    bmat_ = ortho;
    for (int j = 0; j < ortho.cols(); ++j) {
        bmat_.col(j) = detail::phase_normalize(ortho.col(j), Eigen::MatrixXcd::Identity(
                                                                 ortho.rows(), ortho.rows()));
        basis_.push_back(TruncatedSeries::from_flattened(bmat_.col(j), ambient_.components(),
                                                         ambient_.degree(), ambient_.degree()));
    }
}

SumSpace::SumSpace(ContractiveSpace m, DefectSpace f) : m_(std::move(m)), f_(std::move(f)) {
    if (!(m_.ambient() == f_.ambient()))
        throw ValidationError("sum space: M and F must share the ambient");
    const Eigen::Index rows = m_.basis_matrix().rows();
    bmat_.resize(rows, m_.dim() + f_.dim());
    bmat_.leftCols(m_.dim()) = m_.basis_matrix();
    if (f_.dim() > 0) bmat_.rightCols(f_.dim()) = f_.basis_matrix();
    weighted_bmat_ = m_.ambient().flattened_sqrt_weights().asDiagonal() * bmat_;

    gram_ = Eigen::MatrixXcd::Zero(dim(), dim());
    gram_.topLeftCorner(m_.dim(), m_.dim()) = m_.gram();
    if (f_.dim() > 0)
        gram_.bottomRightCorner(f_.dim(), f_.dim()) =
            Eigen::MatrixXcd::Identity(f_.dim(), f_.dim());

    if (f_.dim() > 0) {
        // Principal angles between M and F: reject near-trivial intersection.
        Eigen::HouseholderQR<Eigen::MatrixXcd> qm(
            (m_.ambient().flattened_sqrt_weights().asDiagonal() * m_.basis_matrix()).eval());
        Eigen::MatrixXcd qm_thin =
            qm.householderQ() * Eigen::MatrixXcd::Identity(rows, m_.dim());
        Eigen::MatrixXcd qf =
            m_.ambient().flattened_sqrt_weights().asDiagonal() * f_.basis_matrix();
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(qm_thin.adjoint() * qf);
        if (svd.singularValues().size() > 0 && svd.singularValues()(0) > 1.0 - 1e-8)
            throw ValidationError("sum space: defect space intersects M");
    }
}

Complex SumSpace::inner_plus(const Eigen::VectorXcd& x, const Eigen::VectorXcd& y) const {
    if (x.size() != dim() || y.size() != dim())
        throw ValidationError("sum space: coordinate length mismatch");
    return (y.adjoint() * gram_ * x)(0);
}

double SumSpace::norm_plus(const Eigen::VectorXcd& x) const {
    return std::sqrt(std::max(0.0, inner_plus(x, x).real()));
}

TruncatedSeries SumSpace::element(const Eigen::VectorXcd& coords) const {
    if (coords.size() != dim()) throw ValidationError("sum space: coordinate length mismatch");
    return TruncatedSeries::from_flattened(bmat_ * coords, m_.ambient().components(),
                                           m_.ambient().degree(), m_.ambient().degree());
}

MembershipResult SumSpace::membership(const TruncatedSeries& h) const {
    if (h.components() != m_.ambient().components() || h.degree() != m_.ambient().degree())
        throw ValidationError("sum space: series does not live in the ambient");
    const int rows = m_.ambient().components() * (h.valid_degree() + 1);
    Eigen::VectorXcd target =
        m_.ambient().flattened_sqrt_weights().cwiseProduct(h.flattened());
    return detail::solve_membership(weighted_bmat_, target, rows);
}

} // namespace nearinv
