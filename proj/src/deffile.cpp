#include "nullgeo/deffile.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "nullgeo/util.hpp"

namespace nullgeo {

namespace {

struct Line {
    int number = 0;
    std::vector<std::string> tokens;
    std::string raw;
};

std::vector<Line> tokenize(const std::string& text) {
    std::vector<Line> lines;
    std::istringstream in(text);
    std::string raw;
    int number = 0;
    while (std::getline(in, raw)) {
        ++number;
        std::string stripped = raw.substr(0, raw.find('#'));
        std::istringstream ls(stripped);
        Line line;
        line.number = number;
        line.raw = stripped;
        std::string tok;
        while (ls >> tok) line.tokens.push_back(tok);
        if (!line.tokens.empty()) lines.push_back(std::move(line));
    }
    return lines;
}

[[noreturn]] void fail(const Line& line, const std::string& msg) {
    throw ParseError("definition file line " + std::to_string(line.number) + ": " + msg,
                     static_cast<std::size_t>(line.number));
}

double parse_number(const Line& line, const std::string& tok) {
    try {
        std::size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) fail(line, "bad number '" + tok + "'");
        return v;
    } catch (const ParseError&) {
        throw;
    } catch (...) {
        fail(line, "bad number '" + tok + "'");
    }
}

// Everything after "= " in the raw line, so expressions may contain spaces.
std::string rhs_expression(const Line& line) {
    auto pos = line.raw.find('=');
    if (pos == std::string::npos) fail(line, "expected '='");
    std::string rhs = line.raw.substr(pos + 1);
    // trim
    auto b = rhs.find_first_not_of(" \t");
    auto e = rhs.find_last_not_of(" \t");
    if (b == std::string::npos) fail(line, "empty expression");
    return rhs.substr(b, e - b + 1);
}

int coord_index(const Line& line, const std::vector<std::string>& names, const std::string& tok) {
    auto it = std::find(names.begin(), names.end(), tok);
    if (it == names.end()) fail(line, "unknown coordinate '" + tok + "'");
    return static_cast<int>(it - names.begin());
}

struct AmbientBlock {
    std::vector<std::string> coords;
    std::optional<std::pair<int, int>> signature;
    std::vector<std::tuple<int, int, std::string>> metric_entries;
};

struct HypersurfaceBlock {
    std::vector<std::string> params;
    std::vector<std::pair<int, std::string>> immersion;  // ambient coord index -> expr
    ScreenPolicy policy = ScreenPolicy::EuclideanComplement;
    std::vector<Vector> screen_vectors;
    std::vector<std::pair<std::string, std::string>> requires_gt;  // lhs > rhs
    std::vector<std::pair<int, double>> periods;
};

}  // namespace

std::vector<Vector> DefFile::point_values() const {
    std::vector<Vector> out;
    out.reserve(points.size());
    for (const auto& [name, v] : points) out.push_back(v);
    return out;
}

DefFile DefFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open definition file '" + path + "'", 0);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

DefFile DefFile::parse(const std::string& text, const std::string& origin) {
    DefFile def;
    def.origin = origin;
    std::vector<Line> lines = tokenize(text);
    if (lines.empty() || lines[0].tokens.size() < 2 || lines[0].tokens[0] != "nullgeo-def" ||
        lines[0].tokens[1] != "v1")
        throw ParseError("definition file must start with 'nullgeo-def v1'", 1);

    std::optional<AmbientBlock> ambient_block;
    std::optional<HypersurfaceBlock> hyper_block;
    std::vector<std::vector<std::pair<std::string, std::string>>> loops_raw;

    std::size_t i = 1;
    auto expect_open = [&](const Line& line) {
        if (line.tokens.back() != "{") fail(line, "expected '{'");
    };

    while (i < lines.size()) {
        const Line& line = lines[i];
        const std::string& head = line.tokens[0];

        if (head == "ambient") {
            expect_open(line);
            ++i;
            AmbientBlock blk;
            while (i < lines.size() && lines[i].tokens[0] != "}") {
                const Line& l = lines[i];
                if (l.tokens[0] == "coords") {
                    blk.coords.assign(l.tokens.begin() + 1, l.tokens.end());
                } else if (l.tokens[0] == "signature") {
                    if (l.tokens.size() != 3) fail(l, "signature needs two integers");
                    blk.signature = {static_cast<int>(parse_number(l, l.tokens[1])),
                                     static_cast<int>(parse_number(l, l.tokens[2]))};
                } else if (l.tokens[0] == "metric") {
                    if (l.tokens.size() < 5 || blk.coords.empty())
                        fail(l, "metric entry needs 'metric <ci> <cj> = <expr>' after coords");
                    int ci = coord_index(l, blk.coords, l.tokens[1]);
                    int cj = coord_index(l, blk.coords, l.tokens[2]);
                    blk.metric_entries.emplace_back(ci, cj, rhs_expression(l));
                } else {
                    fail(l, "unknown ambient entry '" + l.tokens[0] + "'");
                }
                ++i;
            }
            if (i == lines.size()) fail(lines.back(), "unterminated ambient block");
            ++i;  // consume }
            ambient_block = std::move(blk);
        } else if (head == "hypersurface") {
            expect_open(line);
            ++i;
            HypersurfaceBlock blk;
            if (!ambient_block) fail(line, "hypersurface block requires an ambient block first");
            while (i < lines.size() && lines[i].tokens[0] != "}") {
                const Line& l = lines[i];
                if (l.tokens[0] == "params") {
                    blk.params.assign(l.tokens.begin() + 1, l.tokens.end());
                } else if (l.tokens[0] == "immersion") {
                    if (l.tokens.size() < 4) fail(l, "immersion entry: 'immersion <coord> = <expr>'");
                    int ci = coord_index(l, ambient_block->coords, l.tokens[1]);
                    blk.immersion.emplace_back(ci, rhs_expression(l));
                } else if (l.tokens[0] == "screen") {
                    if (l.tokens.size() != 2) fail(l, "screen needs a policy name");
                    if (l.tokens[1] == "euclidean_complement")
                        blk.policy = ScreenPolicy::EuclideanComplement;
                    else if (l.tokens[1] == "user_frame")
                        blk.policy = ScreenPolicy::UserFrame;
                    else if (l.tokens[1] == "ker_theta")
                        blk.policy = ScreenPolicy::KerTheta;
                    else
                        fail(l, "unknown screen policy '" + l.tokens[1] + "'");
                } else if (l.tokens[0] == "screen_vector") {
                    Vector v(static_cast<int>(l.tokens.size()) - 1);
                    for (std::size_t t = 1; t < l.tokens.size(); ++t)
                        v[static_cast<int>(t - 1)] = parse_number(l, l.tokens[t]);
                    blk.screen_vectors.push_back(v);
                } else if (l.tokens[0] == "require") {
                    // require <expr> > <expr>
                    auto pos = l.raw.find('>');
                    if (pos == std::string::npos) fail(l, "require needs '<expr> > <expr>'");
                    std::string lhs = l.raw.substr(0, pos);
                    auto rb = lhs.find("require");
                    lhs = lhs.substr(rb + 7);
                    std::string rhs = l.raw.substr(pos + 1);
                    blk.requires_gt.emplace_back(lhs, rhs);
                } else if (l.tokens[0] == "periodic") {
                    if (l.tokens.size() != 4 || blk.params.empty())
                        fail(l, "periodic entry: 'periodic <param> = <value>' after params");
                    int pi = coord_index(l, blk.params, l.tokens[1]);
                    blk.periods.emplace_back(pi, parse_number(l, l.tokens[3]));
                } else {
                    fail(l, "unknown hypersurface entry '" + l.tokens[0] + "'");
                }
                ++i;
            }
            if (i == lines.size()) fail(lines.back(), "unterminated hypersurface block");
            ++i;
            hyper_block = std::move(blk);
        } else if (head == "point") {
            // point <name> = <values...>
            if (line.tokens.size() < 4 || line.tokens[2] != "=")
                fail(line, "point entry: 'point <name> = <values...>'");
            Vector v(static_cast<int>(line.tokens.size()) - 3);
            for (std::size_t t = 3; t < line.tokens.size(); ++t)
                v[static_cast<int>(t - 3)] = parse_number(line, line.tokens[t]);
            def.points.emplace_back(line.tokens[1], v);
            ++i;
        } else if (head == "loop") {
            if (line.tokens.size() < 2) fail(line, "loop needs a name");
            expect_open(line);
            Loop loop;
            loop.id = line.tokens[1];
            ++i;
            std::vector<std::pair<std::string, std::string>> comps;
            while (i < lines.size() && lines[i].tokens[0] != "}") {
                const Line& l = lines[i];
                if (l.tokens[0] == "range") {
                    if (l.tokens.size() != 3) fail(l, "range needs two numbers");
                    loop.t0 = parse_number(l, l.tokens[1]);
                    loop.t1 = parse_number(l, l.tokens[2]);
                } else if (l.tokens[0] == "steps") {
                    if (l.tokens.size() != 2) fail(l, "steps needs one integer");
                    loop.steps = static_cast<int>(parse_number(l, l.tokens[1]));
                } else if (l.tokens[0] == "component") {
                    if (l.tokens.size() < 4) fail(l, "component entry: 'component <coord> = <expr>'");
                    comps.emplace_back(l.tokens[1], rhs_expression(l));
                } else {
                    fail(l, "unknown loop entry '" + l.tokens[0] + "'");
                }
                ++i;
            }
            if (i == lines.size()) fail(lines.back(), "unterminated loop block");
            ++i;
            // Component order follows the connection/hypersurface coordinate
            // list, which may appear later in the file; resolve afterwards.
            def.loops.push_back(loop);
            loops_raw.push_back(std::move(comps));
        } else if (head == "connection") {
            expect_open(line);
            ++i;
            std::vector<std::string> coords;
            Vector base;
            std::vector<std::tuple<int, int, int, std::string>> entries;
            std::vector<std::pair<int, double>> periods;
            while (i < lines.size() && lines[i].tokens[0] != "}") {
                const Line& l = lines[i];
                if (l.tokens[0] == "coords") {
                    coords.assign(l.tokens.begin() + 1, l.tokens.end());
                } else if (l.tokens[0] == "base") {
                    base.resize(static_cast<int>(l.tokens.size()) - 1);
                    for (std::size_t t = 1; t < l.tokens.size(); ++t)
                        base[static_cast<int>(t - 1)] = parse_number(l, l.tokens[t]);
                } else if (l.tokens[0] == "periodic") {
                    if (l.tokens.size() != 4 || coords.empty())
                        fail(l, "periodic entry: 'periodic <coord> = <value>' after coords");
                    periods.emplace_back(coord_index(l, coords, l.tokens[1]),
                                         parse_number(l, l.tokens[3]));
                } else if (l.tokens[0] == "gamma") {
                    if (l.tokens.size() < 6 || coords.empty())
                        fail(l, "gamma entry: 'gamma <k> <i> <j> = <expr>' after coords");
                    entries.emplace_back(coord_index(l, coords, l.tokens[1]),
                                         coord_index(l, coords, l.tokens[2]),
                                         coord_index(l, coords, l.tokens[3]), rhs_expression(l));
                } else {
                    fail(l, "unknown connection entry '" + l.tokens[0] + "'");
                }
                ++i;
            }
            if (i == lines.size()) fail(lines.back(), "unterminated connection block");
            ++i;
            if (coords.empty()) throw ParseError("connection block needs coords", 0);
            const int d = static_cast<int>(coords.size());
            if (base.size() != d) throw ParseError("connection base point has wrong dimension", 0);
            std::vector<std::vector<std::vector<ExprField>>> grid(
                static_cast<std::size_t>(d),
                std::vector<std::vector<ExprField>>(static_cast<std::size_t>(d),
                                                    std::vector<ExprField>(
                                                        static_cast<std::size_t>(d))));
            for (auto& [k, a, b, expr] : entries) {
                ExprField f = ExprField::parse(expr, coords);
                grid[static_cast<std::size_t>(k)][static_cast<std::size_t>(a)]
                    [static_cast<std::size_t>(b)] = f;
                // torsion-free frame: symmetrise unless the mirror is given
                if (grid[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)]
                        [static_cast<std::size_t>(a)].empty())
                    grid[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)]
                        [static_cast<std::size_t>(a)] = f;
            }
            FramedConnection c = FramedConnection::from_expressions(coords, std::move(grid), base);
            c.periods.assign(static_cast<std::size_t>(d), 0.0);
            for (auto& [ci, p] : periods) c.periods[static_cast<std::size_t>(ci)] = p;
            def.connection = std::move(c);
        } else {
            fail(line, "unknown block '" + head + "'");
        }
    }

    // Build ambient + chart.
    if (ambient_block) {
        const auto& blk = *ambient_block;
        if (blk.coords.empty()) throw ParseError("ambient block needs coords", 0);
        const std::size_t n = blk.coords.size();
        std::vector<std::vector<ExprField>> metric(n, std::vector<ExprField>(n));
        for (const auto& [ci, cj, expr] : blk.metric_entries) {
            ExprField f = ExprField::parse(expr, blk.coords);
            metric[static_cast<std::size_t>(ci)][static_cast<std::size_t>(cj)] = f;
            metric[static_cast<std::size_t>(cj)][static_cast<std::size_t>(ci)] = f;
        }
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                if (metric[a][b].empty()) metric[a][b] = constant_field(0.0, blk.coords);
        std::optional<std::pair<int, int>> sig;
        if (blk.signature) sig = *blk.signature;
        def.ambient = AmbientManifold(blk.coords, std::move(metric), sig);
    }
    if (hyper_block) {
        const auto& blk = *hyper_block;
        if (!def.ambient) throw ParseError("hypersurface needs an ambient block", 0);
        if (blk.params.empty()) throw ParseError("hypersurface block needs params", 0);
        if (blk.immersion.size() != static_cast<std::size_t>(def.ambient->dim()))
            throw ParseError("immersion must define every ambient coordinate (" +
                                 std::to_string(def.ambient->dim()) + " entries)",
                             0);
        std::vector<ExprField> immersion(blk.immersion.size());
        for (const auto& [ci, expr] : blk.immersion)
            immersion[static_cast<std::size_t>(ci)] = ExprField::parse(expr, blk.params);
        HypersurfaceChart chart(*def.ambient, blk.params, std::move(immersion), blk.policy);
        if (blk.policy == ScreenPolicy::UserFrame) chart.set_user_screen(blk.screen_vectors);
        for (const auto& [lhs, rhs] : blk.requires_gt)
            chart.add_domain_guard(ExprField::parse("(" + lhs + ") - (" + rhs + ")", blk.params));
        if (!blk.periods.empty()) {
            std::vector<double> periods(blk.params.size(), 0.0);
            for (auto& [pi, p] : blk.periods) periods[static_cast<std::size_t>(pi)] = p;
            chart.set_param_periods(std::move(periods));
        }
        def.chart = std::move(chart);
    }

    // Resolve loop components against the available coordinate list.
    const std::vector<std::string>* loop_coords = nullptr;
    if (def.connection)
        loop_coords = &def.connection->coords;
    else if (def.chart)
        loop_coords = &def.chart->params();
    for (std::size_t li = 0; li < def.loops.size(); ++li) {
        auto& comps = loops_raw[li];
        if (!loop_coords)
            throw ParseError("loops need a connection or hypersurface block for coordinates", 0);
        def.loops[li].components.assign(loop_coords->size(), ExprField());
        for (auto& [name, expr] : comps) {
            auto it = std::find(loop_coords->begin(), loop_coords->end(), name);
            if (it == loop_coords->end())
                throw ParseError("loop component '" + name + "' is not a known coordinate", 0);
            def.loops[li].components[static_cast<std::size_t>(it - loop_coords->begin())] =
                ExprField::parse(expr, {"t"});
        }
        for (const auto& comp : def.loops[li].components)
            if (comp.empty())
                throw ParseError("loop '" + def.loops[li].id + "' must define every coordinate", 0);
    }

    // Point dimensions must match whatever consumes them.
    int expected_dim = def.chart ? def.chart->n_plus_1()
                                 : (def.connection ? def.connection->dim : -1);
    if (expected_dim > 0)
        for (const auto& [name, v] : def.points)
            if (v.size() != expected_dim)
                throw ParseError("point '" + name + "' has dimension " + std::to_string(v.size()) +
                                     ", expected " + std::to_string(expected_dim),
                                 0);
    return def;
}

}  // namespace nullgeo
