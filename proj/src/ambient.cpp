#include "nullgeo/ambient.hpp"

#include <cmath>

#include "nullgeo/util.hpp"

namespace nullgeo {

Vector VectorField::at(const Vector& x) const {
    Vector v(dim());
    std::span<const double> pt(x.data(), static_cast<std::size_t>(x.size()));
    for (int k = 0; k < dim(); ++k) v[k] = components[static_cast<std::size_t>(k)].eval(pt);
    return v;
}

AmbientManifold::AmbientManifold(std::vector<std::string> coords,
                                 std::vector<std::vector<ExprField>> metric,
                                 std::optional<std::pair<int, int>> signature_expected)
    : coords_(std::move(coords)),
      metric_(std::move(metric)),
      signature_expected_(signature_expected) {
    const auto n = coords_.size();
    if (metric_.size() != n)
        throw PreconditionError("metric grid must be " + std::to_string(n) + "x" + std::to_string(n));
    for (auto& row : metric_)
        if (row.size() != n)
            throw PreconditionError("metric grid must be square");
    // Symmetrise: the lower triangle mirrors the upper.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (metric_[i][j].empty()) metric_[i][j] = metric_[j][i];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            if (metric_[i][j].empty()) metric_[i][j] = metric_[j][i];
}

Matrix AmbientManifold::metric_at(const Vector& x) const {
    const int n = dim();
    Matrix g(n, n);
    std::span<const double> pt(x.data(), static_cast<std::size_t>(x.size()));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            g(i, j) = metric_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].eval(pt);
    return 0.5 * (g + g.transpose());
}

Matrix AmbientManifold::metric_inverse_at(const Vector& x) const {
    Matrix g = metric_at(x);
    Eigen::FullPivLU<Matrix> lu(g);
    if (!lu.isInvertible())
        throw PreconditionError("ambient metric is singular at the queried point");
    return lu.inverse();
}

double AmbientManifold::inner(const Vector& x, const Vector& u, const Vector& v) const {
    return u.dot(metric_at(x) * v);
}

Tensor3 AmbientManifold::metric_partials(const Vector& x) const {
    const int n = dim();
    Tensor3 dg(n);
    std::span<const double> pt(x.data(), static_cast<std::size_t>(x.size()));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = j; k < n; ++k) {
                double v = metric_[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]
                               .partial(pt, i);
                dg(i, j, k) = v;
                dg(i, k, j) = v;
            }
    return dg;
}

Tensor3 AmbientManifold::christoffel(const Vector& x) const {
    const int n = dim();
    Matrix ginv = metric_inverse_at(x);
    Tensor3 dg = metric_partials(x);
    Tensor3 gamma(n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                double sum = 0.0;
                for (int l = 0; l < n; ++l)
                    sum += ginv(k, l) * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j));
                gamma(k, i, j) = 0.5 * sum;
                gamma(k, j, i) = gamma(k, i, j);
            }
    return gamma;
}

Vector covariant_derivative(const AmbientManifold& m, const VectorField& X, const VectorField& Y,
                            const Vector& x) {
    const int n = m.dim();
    std::span<const double> pt(x.data(), static_cast<std::size_t>(x.size()));
    Vector Xv = X.at(x);
    Vector Yv = Y.at(x);
    Tensor3 gamma = m.christoffel(x);
    Vector out = Vector::Zero(n);
    for (int k = 0; k < n; ++k) {
        double v = 0.0;
        for (int i = 0; i < n; ++i) {
            v += Xv[i] * Y.components[static_cast<std::size_t>(k)].partial(pt, i);
            for (int j = 0; j < n; ++j) v += gamma(k, i, j) * Xv[i] * Yv[j];
        }
        out[k] = v;
    }
    return out;
}

Vector lie_bracket(const VectorField& X, const VectorField& Y, const Vector& x) {
    const int n = X.dim();
    std::span<const double> pt(x.data(), static_cast<std::size_t>(x.size()));
    Vector Xv = X.at(x);
    Vector Yv = Y.at(x);
    Vector out = Vector::Zero(n);
    for (int k = 0; k < n; ++k) {
        double v = 0.0;
        for (int i = 0; i < n; ++i) {
            v += Xv[i] * Y.components[static_cast<std::size_t>(k)].partial(pt, i);
            v -= Yv[i] * X.components[static_cast<std::size_t>(k)].partial(pt, i);
        }
        out[k] = v;
    }
    return out;
}

}  // namespace nullgeo
