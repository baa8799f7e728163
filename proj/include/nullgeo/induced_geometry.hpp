#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nullgeo/hypersurface.hpp"

namespace nullgeo {

// Tangent field along the hypersurface, given in parameter coordinates.
using ParamField = std::function<Vector(const Vector&)>;

ParamField coordinate_field(int i, int n_plus_1);
ParamField constant_param_field(Vector v);
ParamField expr_param_field(std::vector<ExprField> comps);

// Frames along an FD stencil around a center point: the radical pivot and the
// screen signs are locked to the center so derivatives of frame quantities
// stay smooth.
class FrameField {
public:
    FrameField(const HypersurfaceChart& h, const Vector& center, double tol = kSpectralTol);
    FrameField(const HypersurfaceChart& h, PointFrame center_frame, double tol = kSpectralTol);

    const HypersurfaceChart& chart() const { return *h_; }
    const PointFrame& center() const { return center_; }
    PointFrame at(const Vector& u) const;
    Vector xi_param_at(const Vector& u) const;
    Vector xi_ambient_at(const Vector& u) const;

private:
    const HypersurfaceChart* h_;
    PointFrame center_;
    double tol_;
};

// All fundamental-form data at one point, in the parameter coordinate basis:
// B_ij, C(d_i, W_a), tau(d_i), phi(d_i), eta(d_i), shape operators as
// endomorphisms of parameter space, plus the umbilicity fit.
struct AdaptedFrameGeometry {
    PointFrame frame;
    Matrix B;
    Matrix C;
    Vector tau;
    Vector phi;
    Vector eta;
    Matrix A_N;
    Matrix A_star_xi;
    std::optional<double> lambda_umbilic;  // raw sign, i.e. for the frame's xi as-is
    double umbilic_residual = 0.0;
};

// gbar(Dbar_{d_i} d_j f, xi) for the coordinate tangent fields; screen-free.
Matrix second_fundamental_form(const HypersurfaceChart& h, const PointFrame& frame);

// nabla_X Y = Q(Dbar_X Y) in parameter coordinates; `transversal` (= B(X,Y))
// is the coefficient the projection discards.
struct InducedDerivative {
    Vector tangent_param;
    double transversal = 0.0;
};
InducedDerivative induced_connection(const FrameField& frames, const ParamField& X,
                                     const ParamField& Y);

// Connection coefficients of nabla on the coordinate fields at the center.
Tensor3 induced_connection_coeffs(const FrameField& frames);

AdaptedFrameGeometry fundamental_forms(const HypersurfaceChart& h, const Vector& u,
                                       const std::vector<Vector>* screen = nullptr);

// lhs = X.g(Y,Z) - g(nabla_X Y, Z) - g(Y, nabla_X Z); rhs = B(X,Y)eta(Z) + B(X,Z)eta(Y).
struct NablaGResidual {
    double lhs = 0.0;
    double rhs = 0.0;
};
NablaGResidual nabla_g_residual(const FrameField& frames, const ParamField& X, const ParamField& Y,
                                const ParamField& Z);

struct GeodesyReport {
    bool totally_geodesic = false;
    std::vector<double> max_B;  // per point
    double worst = 0.0;
};
GeodesyReport diagnose_geodesic(const HypersurfaceChart& h, const std::vector<Vector>& points,
                                double tol = 1e-8);

enum class UmbilicVerdict { NotUmbilical, TotallyGeodesic, TotallyUmbilical, ProperTotallyUmbilical };
std::string to_string(UmbilicVerdict v);

struct UmbilicReport {
    UmbilicVerdict verdict = UmbilicVerdict::NotUmbilical;
    // Radical orientation used for reporting: lambda is gauge-odd (flipping xi
    // flips B and lambda), so diagnostics orient xi to make lambda >= 0 and
    // report the sign they applied.
    double xi_orientation = 1.0;
    std::vector<double> lambda;          // oriented
    std::vector<double> lambda_raw;      // for xi with the +1-pivot convention
    std::vector<double> residual;        // max |B - lambda g| per point
    double worst_residual = 0.0;
};
UmbilicReport diagnose_umbilic(const HypersurfaceChart& h, const std::vector<Vector>& points,
                               double tol_residual = 1e-5, double tol_proper = 1e-6);

// (L_xi g)(X,Y) against -2 B(X,Y) (they must agree for any radical section).
struct LieDerivativeCheck {
    double lie_value = 0.0;
    double minus_2B = 0.0;
};
LieDerivativeCheck lie_derivative_check(const FrameField& frames, const ParamField& X,
                                        const ParamField& Y);

// Exhibits a coordinate pair (X, Z) with B(X,Z) != 0, certifying that no
// 1-form theta can satisfy nabla g = theta (x) g for the induced connection,
// plus the residual of the best-fit theta. Not applicable in the geodesic case.
struct NeverWeylWitness {
    bool applicable = false;
    Vector point;
    int which_X = -1, which_Z = -1;
    double B_value = 0.0;               // oriented like diagnose_umbilic
    double best_fit_theta_residual = 0.0;
};
NeverWeylWitness never_weyl_witness(const HypersurfaceChart& h, const std::vector<Vector>& points,
                                    double geodesic_tol = 1e-8);

// (nabla_i g)_{jk} for the induced connection, by FD of the induced metric
// plus connection corrections; used by the theta fits.
Tensor3 induced_nabla_g(const FrameField& frames);

}  // namespace nullgeo
