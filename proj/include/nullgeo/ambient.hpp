#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nullgeo/expr.hpp"
#include "nullgeo/linalg.hpp"

namespace nullgeo {

// Christoffel symbols at a point: G(k,i,j) = Gamma^k_ij, symmetric in (i,j).
class Tensor3 {
public:
    Tensor3() = default;
    explicit Tensor3(int dim) : dim_(dim), data_(static_cast<std::size_t>(dim) * dim * dim, 0.0) {}
    int dim() const { return dim_; }
    double& operator()(int k, int i, int j) { return data_[idx(k, i, j)]; }
    double operator()(int k, int i, int j) const { return data_[idx(k, i, j)]; }

private:
    std::size_t idx(int k, int i, int j) const {
        return (static_cast<std::size_t>(k) * dim_ + i) * dim_ + j;
    }
    int dim_ = 0;
    std::vector<double> data_;
};

// Vector field on the ambient chart: one component expression per coordinate.
struct VectorField {
    std::vector<ExprField> components;
    Vector at(const Vector& x) const;
    int dim() const { return static_cast<int>(components.size()); }
};

// One chart of a pseudo-Riemannian manifold. The metric grid is symmetrised:
// entry (i,j) with i > j reuses expression (j,i).
class AmbientManifold {
public:
    AmbientManifold() = default;
    AmbientManifold(std::vector<std::string> coords,
                    std::vector<std::vector<ExprField>> metric,
                    std::optional<std::pair<int, int>> signature_expected = std::nullopt);

    int dim() const { return static_cast<int>(coords_.size()); }
    const std::vector<std::string>& coords() const { return coords_; }
    const std::optional<std::pair<int, int>>& signature_expected() const { return signature_expected_; }

    Matrix metric_at(const Vector& x) const;
    // Throws PreconditionError when the metric is singular at x.
    Matrix metric_inverse_at(const Vector& x) const;
    double inner(const Vector& x, const Vector& u, const Vector& v) const;

    // Gamma^k_ij = (1/2) g^kl (d_i g_jl + d_j g_il - d_l g_ij), from central
    // differences of the metric expressions. Exactly symmetric in (i, j).
    Tensor3 christoffel(const Vector& x) const;

    // Partial derivative tensor d_i g_jk at x.
    Tensor3 metric_partials(const Vector& x) const;

private:
    std::vector<std::string> coords_;
    std::vector<std::vector<ExprField>> metric_;
    std::optional<std::pair<int, int>> signature_expected_;
};

// (D_X Y)^k = X^i d_i Y^k + Gamma^k_ij X^i Y^j at x (Levi-Civita of the chart metric).
Vector covariant_derivative(const AmbientManifold& m, const VectorField& X, const VectorField& Y,
                            const Vector& x);

// [X, Y]^k = X^i d_i Y^k - Y^i d_i X^k at x.
Vector lie_bracket(const VectorField& X, const VectorField& Y, const Vector& x);

}  // namespace nullgeo
