#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nullgeo/ambient.hpp"

namespace nullgeo {

// Torsion-free connection on an (n+1)-manifold, given by its coefficients in
// one coordinate frame. Coefficients come either from parsed expressions or
// from a numeric provider (e.g. a Weyl connection built by another module).
struct FramedConnection {
    int dim = 0;
    std::vector<std::string> coords;
    Vector base_point;
    std::function<Tensor3(const Vector&)> gamma;
    // Per-coordinate period (0 = not periodic); loop closure is checked
    // modulo these, so angular charts can host circles.
    std::vector<double> periods;

    static FramedConnection from_expressions(std::vector<std::string> coords,
                                             std::vector<std::vector<std::vector<ExprField>>> grid,
                                             Vector base_point);

    // Max |Gamma^k_ij - Gamma^k_ji| over a few sample points near base.
    double torsion_defect(const std::vector<Vector>& samples) const;
};

// Closed curve gamma(t), componentwise expressions of the single variable t.
struct Loop {
    std::string id;
    std::vector<ExprField> components;
    double t0 = 0.0;
    double t1 = 1.0;
    int steps = 2000;

    Vector at(double t) const;
    Vector velocity(double t) const;
};

struct HolonomyElement {
    std::string loop_id;
    Matrix matrix;                  // transport at base_point, columns = transported basis
    double error_estimate = 0.0;    // Richardson (step-halving) estimate
    double liouville_det = 1.0;     // exp(-loop integral of tr Gamma(gamma'))
};

// Solves V' = -Gamma(gamma)[gamma'] V with fixed-step RK4. Requires a closed
// loop (|gamma(t0)-gamma(t1)| <= 1e-10) and steps >= 100.
HolonomyElement parallel_transport(const FramedConnection& c, const Loop& loop,
                                   int steps_override = 0);

// Open-path transport along a curve given as t -> (point, velocity).
using Curve = std::function<std::pair<Vector, Vector>(double)>;
Matrix transport_curve(const FramedConnection& c, const Curve& curve, double t0, double t1,
                       int steps, double* liouville = nullptr);
Matrix transport_segment(const FramedConnection& c, const Vector& from, const Vector& to,
                         int steps);

struct ClassificationResult {
    enum class Verdict { Qualifies, Fails };
    Verdict verdict = Verdict::Fails;
    std::optional<Vector> invariant_line;
    Matrix adapted_basis;           // orthogonal, first column spans the line
    double line_residual = 0.0;     // max sine of angle between T v and v
    double conformality_residual = 0.0;
    Matrix G_fit;                   // fitted quotient form (n x n)
    std::vector<double> mu;         // conformal factors per element
    int signature_p = 0, signature_q = 0;
    bool line_underdetermined = false;  // all elements ~ identity
    bool conformal_underdetermined = false;
    std::string note;
};

// Structure test for the invariant-line + conformal-quotient holonomy form:
// (a) common invariant line by principal-angle search over eigenvector
// candidates, (b) conjugation into an adapted basis, (c) first-column check,
// (d) least-squares joint fit of a symmetric form G with Di^T G Di = mu_i G
// via the vectorised eigenproblem on Sym(n).
ClassificationResult classify(const std::vector<HolonomyElement>& elements, double tol = 1e-6);

struct MetricSample {
    Vector point;
    Matrix g;                 // degenerate (0,2) form in the frame coordinates
    Vector kernel;            // transported line direction (unit)
    double kernel_residual = 0.0;      // max |g . kernel|
    double path_residual = 0.0;        // proportionality defect between two paths
    double proportionality = 1.0;      // scale between the two path transports
};

// Transports the invariant line and the fitted quotient form from base_point
// to each sample along straight coordinate segments; a second (dogleg) path
// cross-checks path-dependence up to scale. Throws ToleranceError when the
// two paths disagree beyond `consistency_tol` (the reconstruction is then
// inconsistent: the loop family missed holonomy).
std::vector<MetricSample> reconstruct_metric(const FramedConnection& c,
                                             const ClassificationResult& cls,
                                             const std::vector<Vector>& samples,
                                             int steps = 2000,
                                             double consistency_tol = 1e-4);

struct WeylPropertyReport {
    std::vector<Vector> theta;          // fitted covector per sample point
    double max_residual_rel = 0.0;      // |nabla g - theta g| / ||g||, worst entry
    double forward_lemma_residual = 0.0;  // |g(nabla_X kernel, Y)| / ||g||, worst
};

// Fits theta pointwise from the reconstructed metric field and reports the
// residual of nabla g = theta (x) g plus the kernel-parallelism lemma.
WeylPropertyReport verify_weyl_property(const FramedConnection& c,
                                        const ClassificationResult& cls,
                                        const std::vector<Vector>& samples, int steps = 2000);

}  // namespace nullgeo
