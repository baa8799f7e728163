#pragma once

#include <string>
#include <vector>

#include "nullgeo/ambient.hpp"

namespace nullgeo {

enum class ScreenPolicy { EuclideanComplement, UserFrame, KerTheta };

class NotLightlikeError : public PreconditionError {
public:
    NotLightlikeError(int rank, int expected)
        : PreconditionError("hypersurface is not lightlike here: induced metric rank " +
                            std::to_string(rank) + ", expected " + std::to_string(expected)),
          rank_(rank) {}
    int rank() const { return rank_; }

private:
    int rank_;
};

// Immersed hypersurface chart: params (n+1 names) -> ambient coords (n+2
// expressions). Point-domain guards ("require <expr> > 0") let fixtures
// exclude singular loci such as a cone vertex.
class HypersurfaceChart {
public:
    HypersurfaceChart() = default;
    HypersurfaceChart(AmbientManifold ambient, std::vector<std::string> params,
                      std::vector<ExprField> immersion,
                      ScreenPolicy policy = ScreenPolicy::EuclideanComplement);

    const AmbientManifold& ambient() const { return ambient_; }
    const std::vector<std::string>& params() const { return params_; }
    int n_plus_1() const { return static_cast<int>(params_.size()); }
    ScreenPolicy screen_policy() const { return policy_; }
    void set_screen_policy(ScreenPolicy p) { policy_ = p; }
    void set_user_screen(std::vector<Vector> basis) { user_screen_ = std::move(basis); }
    const std::vector<Vector>& user_screen() const { return user_screen_; }

    void add_domain_guard(ExprField positive_expr);
    // Throws PreconditionError when a guard expression is <= 0 at u.
    void check_domain(const Vector& u) const;

    // Per-parameter period (0 = not periodic), forwarded to holonomy runs.
    void set_param_periods(std::vector<double> periods) { param_periods_ = std::move(periods); }
    const std::vector<double>& param_periods() const { return param_periods_; }

    Vector map_point(const Vector& u) const;
    // Columns are the pushed-forward coordinate fields d f / d u^i. Throws
    // PreconditionError when rank-deficient.
    Matrix jacobian(const Vector& u) const;
    // Second partials of the immersion: H(k, i, j) = d^2 f^k / du^i du^j.
    Tensor3 immersion_hessian(const Vector& u) const;

    // g_ij = gbar(d_i f, d_j f), an (n+1)-dimensional form on parameter space.
    SymBilinearForm induced_metric(const Vector& u) const;

private:
    AmbientManifold ambient_;
    std::vector<std::string> params_;
    std::vector<ExprField> immersion_;
    ScreenPolicy policy_ = ScreenPolicy::EuclideanComplement;
    std::vector<Vector> user_screen_;
    std::vector<ExprField> guards_;
    std::vector<double> param_periods_;
};

// Adapted frame at one point: radical section xi, screen basis, transversal N.
// Invariants (checked on construction, within tolerance): gbar(xi,xi) = 0,
// gbar(xi, tangent) = 0, gbar(N,xi) = 1, gbar(N,N) = gbar(N, screen) = 0.
struct PointFrame {
    Vector param_point;
    Vector ambient_point;
    Matrix tangent_basis;   // (n+2) x (n+1), Jacobian columns
    Vector xi_param;        // kernel direction in parameter coordinates
    Vector xi;              // ambient radical vector
    Matrix screen_param;    // (n+1) x n
    Matrix screen_ambient;  // (n+2) x n
    Vector N;               // ambient transversal
    int pivot = -1;         // parameter component normalised to +1 in xi_param
    double orientation = 1.0;

    int n_plus_1() const { return static_cast<int>(xi_param.size()); }
    // Flips xi and N consistently (gbar(N,xi) stays 1). Used by diagnostics
    // that normalise the radical orientation.
    PointFrame flipped() const;
};

// Kernel of the induced metric, normalised so the largest-|.| parameter
// component equals +1 (pivot_hint keeps the pivot stable across FD stencils).
// Throws NotLightlikeError when the induced rank is not n.
Vector radical_direction_param(const HypersurfaceChart& h, const Vector& u,
                               double tol = kSpectralTol, int pivot_hint = -1);
Vector radical_direction(const HypersurfaceChart& h, const Vector& u, double tol = kSpectralTol,
                         int pivot_hint = -1);

// Screen basis in parameter coordinates per the chart's policy (KerTheta is
// resolved by the weyl module; passing it here throws).
std::vector<Vector> screen_basis_param(const HypersurfaceChart& h, const Vector& u,
                                       const Vector& xi_param);

// Builds the full adapted frame; screen may be supplied explicitly (parameter
// coordinates), otherwise the chart policy decides.
PointFrame normalizing_pair(const HypersurfaceChart& h, const Vector& u,
                            const std::vector<Vector>* screen = nullptr, double tol = kSpectralTol,
                            int pivot_hint = -1);

// v = Q(v) + transversal * N, Q(v) = screen part + radical_coeff * xi.
struct Projections {
    Vector tangent_param;   // Q(v) in the parameter basis
    double transversal = 0.0;
    Vector screen_coeffs;
    double radical_coeff = 0.0;
    double reconstruction_error = 0.0;
};
Projections project(const HypersurfaceChart& h, const PointFrame& frame, const Vector& v);

}  // namespace nullgeo
