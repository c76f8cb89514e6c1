#include "nearinv/series.hpp"

#include <algorithm>
#include <cmath>

namespace nearinv {

TruncatedSeries::TruncatedSeries(int components, int degree) {
    if (components < 1) throw ValidationError("series: component count must be >= 1");
    if (degree < 0) throw ValidationError("series: working degree must be >= 0");
    coeffs_ = Eigen::MatrixXcd::Zero(components, degree + 1);
    valid_ = degree;
}

TruncatedSeries TruncatedSeries::monomial(int power, int degree) {
    if (power < 0 || power > degree)
        throw ValidationError("series: monomial power outside working degree");
    TruncatedSeries s(1, degree);
    s.coeffs_(0, power) = 1.0;
    return s;
}

TruncatedSeries TruncatedSeries::constant(Complex value, int degree) {
    TruncatedSeries s(1, degree);
    s.coeffs_(0, 0) = value;
    return s;
}

TruncatedSeries TruncatedSeries::from_coeffs(Eigen::MatrixXcd coeffs) {
    if (coeffs.rows() < 1 || coeffs.cols() < 1)
        throw ValidationError("series: empty coefficient block");
    TruncatedSeries s(static_cast<int>(coeffs.rows()), static_cast<int>(coeffs.cols()) - 1);
    s.coeffs_ = std::move(coeffs);
    return s;
}

TruncatedSeries TruncatedSeries::from_scalar_coeffs(const std::vector<Complex>& coeffs, int degree) {
    TruncatedSeries s(1, degree);
    if (static_cast<int>(coeffs.size()) > degree + 1)
        throw ValidationError("series: coefficient list exceeds working degree");
    for (int m = 0; m < static_cast<int>(coeffs.size()); ++m) s.coeffs_(0, m) = coeffs[m];
    return s;
}

void TruncatedSeries::set_valid_degree(int v) {
    if (v < 0 || v > degree())
        throw ValidationError("series: valid_degree outside [0, D]");
    valid_ = v;
}

Complex TruncatedSeries::scalar_coeff(int m) const {
    if (components() != 1) throw ValidationError("series: scalar access on vector-valued series");
    return coeffs_(0, m);
}

Eigen::VectorXcd TruncatedSeries::flattened() const {
    const int n = components();
    Eigen::VectorXcd v(n * (degree() + 1));
    for (int m = 0; m <= degree(); ++m) v.segment(m * n, n) = coeffs_.col(m);
    return v;
}

TruncatedSeries TruncatedSeries::from_flattened(const Eigen::VectorXcd& flat, int components,
                                                int degree, int valid) {
    if (flat.size() != static_cast<Eigen::Index>(components) * (degree + 1))
        throw ValidationError("series: flattened size mismatch");
    TruncatedSeries s(components, degree);
    for (int m = 0; m <= degree; ++m) s.coeffs_.col(m) = flat.segment(m * components, components);
    s.valid_ = std::clamp(valid, 0, degree);
    return s;
}

Eigen::VectorXcd TruncatedSeries::evaluate(Complex w) const {
    if (std::abs(w) >= 1.0)
        throw ValidationError("series: evaluation point must satisfy |w| < 1");
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(components());
    for (int m = valid_; m >= 0; --m) acc = w * acc + coeffs_.col(m);
    return acc;
}

Complex TruncatedSeries::evaluate_scalar(Complex w) const {
    if (components() != 1) throw ValidationError("series: scalar evaluation on vector-valued series");
    return evaluate(w)(0);
}

double TruncatedSeries::max_abs_coeff(int up_to) const {
    int lim = up_to < 0 ? valid_ : std::min(up_to, degree());
    double mx = 0.0;
    for (int m = 0; m <= lim; ++m)
        for (int c = 0; c < components(); ++c) mx = std::max(mx, std::abs(coeffs_(c, m)));
    return mx;
}

bool TruncatedSeries::is_zero(double tol) const { return max_abs_coeff(degree()) <= tol; }

namespace {
void require_compatible(const TruncatedSeries& a, const TruncatedSeries& b) {
    if (a.components() != b.components() || a.degree() != b.degree())
        throw ValidationError("series: incompatible shapes");
}
} // namespace

TruncatedSeries& TruncatedSeries::operator+=(const TruncatedSeries& rhs) {
    require_compatible(*this, rhs);
    coeffs_ += rhs.coeffs_;
    valid_ = std::min(valid_, rhs.valid_);
    return *this;
}

TruncatedSeries& TruncatedSeries::operator-=(const TruncatedSeries& rhs) {
    require_compatible(*this, rhs);
    coeffs_ -= rhs.coeffs_;
    valid_ = std::min(valid_, rhs.valid_);
    return *this;
}

TruncatedSeries& TruncatedSeries::operator*=(Complex s) {
    coeffs_ *= s;
    return *this;
}

TruncatedSeries operator+(TruncatedSeries lhs, const TruncatedSeries& rhs) { return lhs += rhs; }
TruncatedSeries operator-(TruncatedSeries lhs, const TruncatedSeries& rhs) { return lhs -= rhs; }
TruncatedSeries operator*(Complex s, TruncatedSeries f) { return f *= s; }

TruncatedSeries multiply(const TruncatedSeries& scalar_factor, const TruncatedSeries& g) {
    if (scalar_factor.components() != 1)
        throw ValidationError("multiply: left factor must be scalar");
    if (scalar_factor.degree() != g.degree())
        throw ValidationError("multiply: incompatible working degrees");
    const int d = g.degree();
    const int n = g.components();
    TruncatedSeries out(n, d);
    for (int m = 0; m <= d; ++m) {
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(n);
        for (int k = 0; k <= m; ++k) acc += scalar_factor.scalar_coeff(k) * g.coeffs().col(m - k);
        for (int c = 0; c < n; ++c) out.coeff(c, m) = acc(c);
    }
    out.set_valid_degree(std::min(scalar_factor.valid_degree(), g.valid_degree()));
    return out;
}

InnerFunction::InnerFunction(std::vector<Complex> zeros, Complex phase)
    : zeros_(std::move(zeros)), phase_(phase) {
    if (zeros_.empty())
        throw ValidationError("inner function: at least one zero is required");
    for (const Complex& a : zeros_)
        if (std::abs(a) >= 1.0)
            throw ValidationError("inner function: every zero must satisfy |a| < 1");
    if (std::abs(std::abs(phase_) - 1.0) > 1e-14)
        throw ValidationError("inner function: phase must be unimodular");
}

int InnerFunction::origin_multiplicity() const {
    int m = 0;
    for (const Complex& a : zeros_)
        if (a == Complex(0.0, 0.0)) ++m;
    return m;
}

Complex InnerFunction::evaluate(Complex w) const {
    Complex acc = phase_;
    for (const Complex& a : zeros_) {
        if (a == Complex(0.0, 0.0)) {
            acc *= w;
        } else {
            acc *= (a - w) / (1.0 - std::conj(a) * w);
        }
    }
    return acc;
}

TruncatedSeries blaschke_taylor(const InnerFunction& phi, int degree) {
    TruncatedSeries acc = TruncatedSeries::constant(phi.phase(), degree);
    for (const Complex& a : phi.zeros()) {
        TruncatedSeries factor(1, degree);
        if (a == Complex(0.0, 0.0)) {
            if (degree >= 1) factor.coeff(0, 1) = 1.0; // z; truncates to 0 at degree 0
        } else {
            // (a - z)/(1 - conj(a) z) = a + sum_{m>=1} conj(a)^{m-1} (|a|^2 - 1) z^m
            factor.coeff(0, 0) = a;
            const double defect = std::norm(a) - 1.0;
            Complex pw = 1.0;
            for (int m = 1; m <= degree; ++m) {
                factor.coeff(0, m) = pw * defect;
                pw *= std::conj(a);
            }
        }
        acc = multiply(factor, acc);
    }
    return acc;
}

TruncatedSeries compose_with_inner(const TruncatedSeries& q, const InnerFunction& phi) {
    if (q.components() != 1)
        throw ValidationError("compose: q must be scalar");
    if (!phi.vanishes_at_zero())
        throw ValidationError("compose: inner function must vanish at the origin");
    const int d = q.degree();
    const int m0 = phi.origin_multiplicity();
    TruncatedSeries phit = blaschke_taylor(phi, d);
    TruncatedSeries out = q.scalar_coeff(0) * TruncatedSeries::constant(1.0, d);
    TruncatedSeries power = TruncatedSeries::constant(1.0, d);
    for (int k = 1; k <= d; ++k) {
        if (k * m0 > d) break; // phi^k has no coefficients left inside the window
        power = multiply(phit, power);
        out += q.scalar_coeff(k) * power;
    }
    out.set_valid_degree(std::min(d, (q.valid_degree() + 1) * m0 - 1));
    return out;
}

} // namespace nearinv
