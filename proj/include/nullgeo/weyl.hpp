#pragma once

#include <string>
#include <vector>

#include "nullgeo/holonomy.hpp"
#include "nullgeo/induced_geometry.hpp"

namespace nullgeo {

// Weyl structure on a totally umbilical lightlike hypersurface:
//   zeta = lambda N (+ optional tangent gauge W),
//   theta(X) = -2 gbar(zeta, X),
//   nabla^theta_X Y = Dbar_X Y - (1/2)theta(Y)X - (1/2)theta(X)Y - g(X,Y) zeta.
// zeta is invariant under flipping the radical section (lambda and N flip
// together), so everything here is orientation-free.
class WeylData {
public:
    explicit WeylData(HypersurfaceChart chart, double umbilic_tol = 1e-5);

    const HypersurfaceChart& chart() const { return chart_; }
    double umbilic_tol() const { return umbilic_tol_; }

    // Tangent gauge: zeta' = zeta + J W. Any choice passes the Weyl checks;
    // the default W = 0 keeps the construction deterministic.
    void set_gauge(ParamField tangent_gauge) { gauge_ = std::move(tangent_gauge); }

    // Umbilicity factor for the frame's own xi; throws PreconditionError when
    // the pointwise fit residual exceeds umbilic_tol (not umbilical here).
    double lambda_at(const Vector& u) const;
    Vector zeta_at(const Vector& u) const;   // ambient components
    Vector theta_at(const Vector& u) const;  // covector components theta(d_i)

    struct Derivative {
        Vector tangent_param;
        double tangency_error = 0.0;  // |gbar(nabla^theta_X Y, xi)|
    };
    Derivative connection(const Vector& u, const ParamField& X, const ParamField& Y) const;

    // nabla^theta on the coordinate fields (exact immersion Hessian, no field FD).
    Tensor3 connection_coeffs(const Vector& u) const;

    // Numeric coefficient provider over the parameter chart, for holonomy use.
    FramedConnection framed(const Vector& base_point) const;

    // Basis of ker theta inside the tangent space (n columns). Throws when
    // theta vanishes at u: the kernel is then all of TM.
    Matrix screen_from_theta(const Vector& u) const;
    // max |dtheta(d_i, d_j)| by FD; zero iff the ker-theta screen integrates.
    double theta_closedness(const Vector& u) const;
    // Frame whose screen is ker theta (the induced screen of the structure).
    PointFrame kertheta_frame(const Vector& u) const;

private:
    HypersurfaceChart chart_;
    double umbilic_tol_;
    ParamField gauge_;  // may be null
};

// Canonical section: zeta = lambda N for the frame at u (gauge ignored).
Vector build_zeta(const HypersurfaceChart& h, const Vector& u, double umbilic_tol = 1e-5);

struct WeylTripleResidual {
    int point_index = 0;
    int triple_index = 0;
    double conformality = 0.0;
    double torsion = 0.0;
    double tangency = 0.0;
};

struct WeylVerifyReport {
    unsigned seed = 0;
    std::vector<std::string> field_sources;  // the generated test fields, reproducible
    std::vector<WeylTripleResidual> entries;
    double max_conformality = 0.0;
    double max_torsion = 0.0;
    double max_tangency = 0.0;
    bool passed(double tol_conf, double tol_torsion, double tol_tangency) const {
        return max_conformality <= tol_conf && max_torsion <= tol_torsion &&
               max_tangency <= tol_tangency;
    }
};

// Residuals of nabla^theta g = theta (x) g, torsion-freeness, and tangency on
// seeded pseudo-random tangent field triples at the given points. Uses an FD
// step scaled by `step_scale` (two different scales give an independent check
// that the residuals are FD floor, not structure).
WeylVerifyReport verify_weyl(const WeylData& w, const std::vector<Vector>& points, int n_triples,
                             unsigned seed, double step_scale = 1.0);

// Deterministic smooth tangent fields over the parameter chart; `sources`
// receives one printable component list per field.
std::vector<ParamField> random_tangent_fields(const std::vector<std::string>& params, unsigned seed,
                                              int count, std::vector<std::string>* sources = nullptr);

}  // namespace nullgeo
