#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nullgeo/holonomy.hpp"
#include "nullgeo/hypersurface.hpp"

namespace nullgeo {

// Parsed `nullgeo-def v1` file: ambient + hypersurface blocks, named sample
// points, loops, and an optional stand-alone connection block. Format
// reference: docs/formats.md.
struct DefFile {
    std::string origin;
    std::optional<AmbientManifold> ambient;
    std::optional<HypersurfaceChart> chart;
    std::vector<std::pair<std::string, Vector>> points;
    std::vector<Loop> loops;
    std::optional<FramedConnection> connection;

    std::vector<Vector> point_values() const;

    static DefFile load(const std::string& path);
    static DefFile parse(const std::string& text, const std::string& origin = "<memory>");
};

}  // namespace nullgeo
