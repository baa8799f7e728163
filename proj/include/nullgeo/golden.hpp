#pragma once

#include <string>
#include <vector>

#include "nullgeo/deffile.hpp"
#include "nullgeo/induced_geometry.hpp"
#include "nullgeo/report.hpp"

namespace nullgeo {

// One pinned expectation from fixtures/lightcone.expected. `mode` comes from
// the id suffix: ".max" rows require computed <= tol (value is 0), ".atleast"
// rows require computed >= value, all others |computed - value| <= tol.
struct GoldenRow {
    std::string id;
    double expected = 0.0;
    double computed = 0.0;
    double tol = 0.0;
    std::string basis;  // exact | analytic | crosscheck
    bool pass = false;
};

struct GoldenResult {
    std::vector<GoldenRow> rows;
    std::vector<std::string> notes;
    bool all_pass = false;
};

// Runs the light-cone end-to-end case: umbilicity table, the four
// covariant-derivative values in the normalized cylindrical frame, the frame
// metric matrix, the Weyl 1-form samples, the reference connection's
// conformality, the coordinate-frame witness values, the geodesic control
// plane, the vertex guard, and the Cartesian-chart cross-check.
GoldenResult run_golden(const std::string& fixtures_dir);

Report golden_report(const GoldenResult& result, const std::string& fixtures_dir);

// (nabla_X g)(Y, Z) for a framed connection over the parameter chart, with g
// evaluated from the hypersurface; shared with the acceptance suite.
double framed_nabla_g(const FramedConnection& conn, const HypersurfaceChart& chart,
                      const Vector& u, const Vector& X0, const ParamField& Y, const ParamField& Z);

}  // namespace nullgeo
