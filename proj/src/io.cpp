#include "cdt/io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cdt/errors.hpp"

namespace cdt {

using nlohmann::json;

MapArtifact build_artifact(const OccupancyGrid& grid, const IngestConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    MapArtifact a;
    a.geometry = ingest(grid, cfg);
    for (const auto& comp : a.geometry.components) {
        DecomposeStats ds;
        ComponentMap part;
        part.dm = decompose(comp.polygon, &ds);
        part.dm.component = comp.id;
        part.graph = build_graph(part.dm);
        a.stats.reflex += ds.initial_reflex;
        a.stats.holes += static_cast<int>(comp.holes.size());
        a.stats.vertices += static_cast<int>(comp.outer.size());
        for (const auto& h : comp.holes) a.stats.vertices += static_cast<int>(h.size());
        a.stats.cells += static_cast<int>(part.dm.cells.size());
        a.stats.cutlines += static_cast<int>(part.dm.cutlines.size());
        a.map.parts.push_back(std::move(part));
    }
    a.stats.components = static_cast<int>(a.geometry.components.size());
    a.stats.elapsed_us =
        std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
    return a;
}

json point_to_json(Point2 p) { return json::array({p.x, p.y}); }

json polyline_to_json(const Polyline& f) {
    json out = json::array();
    for (Point2 p : f) out.push_back(point_to_json(p));
    return out;
}

namespace {

Point2 point_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ParseError("expected a point [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

Polyline points_from_json(const json& j) {
    if (!j.is_array()) throw ParseError("expected an array of points");
    Polyline out;
    for (const auto& p : j) out.push_back(point_from_json(p));
    return out;
}

std::vector<int> ints_from_json(const json& j) {
    if (!j.is_array()) throw ParseError("expected an array of integers");
    std::vector<int> out;
    for (const auto& v : j) {
        if (!v.is_number_integer()) throw ParseError("expected an integer");
        out.push_back(v.get<int>());
    }
    return out;
}

const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field \"") + key + "\"");
    return j.at(key);
}

template <class T>
T get(const json& j, const char* key) {
    try {
        return field(j, key).get<T>();
    } catch (const json::exception&) {
        throw ParseError(std::string("bad value for \"") + key + "\"");
    }
}

}  // namespace

json artifact_to_json(const MapArtifact& a) {
    json comps = json::array();
    for (std::size_t k = 0; k < a.geometry.components.size(); ++k) {
        const ComponentGeometry& cg = a.geometry.components[k];
        const DissectionMap& dm = a.map.parts[k].dm;
        json holes = json::array();
        for (const auto& h : cg.holes) holes.push_back(polyline_to_json(h));
        json cells = json::array();
        for (const auto& c : dm.cells)
            cells.push_back({{"id", c.id},
                             {"vertices", polyline_to_json(c.vertices)},
                             {"vertex_ids", c.vertex_ids},
                             {"cutlines", c.cutline_ids},
                             {"centroid", point_to_json(c.centroid)}});
        json cuts = json::array();
        for (const auto& c : dm.cutlines)
            cuts.push_back({{"id", c.id},
                            {"a", point_to_json(c.a)},
                            {"b", point_to_json(c.b)},
                            {"left", c.left_poly},
                            {"right", c.right_poly},
                            {"bridge", c.bridge}});
        json edges = json::array();
        for (const auto& e : a.map.parts[k].graph.edges()) edges.push_back({e.id, e.u, e.v});
        comps.push_back({{"id", cg.id},
                         {"free_cells", cg.free_cells},
                         {"outer", polyline_to_json(cg.outer)},
                         {"holes", holes},
                         {"polygon",
                          {{"vertices", polyline_to_json(cg.polygon.vertices)}, {"edge_bridge", cg.polygon.edge_bridge}}},
                         {"eps", dm.eps},
                         {"cells", cells},
                         {"cutlines", cuts},
                         {"graph", {{"nodes", a.map.parts[k].graph.node_count()}, {"edges", edges}}}});
    }
    const InitStats& s = a.stats;
    return {{"format", "cdt-map"},
            {"version", 1},
            {"width", a.geometry.width},
            {"height", a.geometry.height},
            {"resolution", a.geometry.resolution},
            {"epsilon_fit", a.geometry.epsilon_fit},
            {"stats",
             {{"components", s.components},
              {"holes", s.holes},
              {"vertices", s.vertices},
              {"reflex", s.reflex},
              {"cells", s.cells},
              {"cutlines", s.cutlines},
              {"elapsed_us", s.elapsed_us}}},
            {"components", comps}};
}

MapArtifact artifact_from_json(const json& j) {
    if (!j.is_object() || j.value("format", "") != "cdt-map") throw ParseError("not a cdt-map artifact");
    if (get<int>(j, "version") != 1) throw ParseError("unsupported artifact version");
    MapArtifact a;
    a.geometry.width = get<int>(j, "width");
    a.geometry.height = get<int>(j, "height");
    a.geometry.resolution = get<double>(j, "resolution");
    a.geometry.epsilon_fit = get<double>(j, "epsilon_fit");
    const json& st = field(j, "stats");
    a.stats = {get<int>(st, "components"), get<int>(st, "holes"), get<int>(st, "vertices"), get<int>(st, "reflex"),
               get<int>(st, "cells"),      get<int>(st, "cutlines"), get<double>(st, "elapsed_us")};

    const json& comps = field(j, "components");
    if (!comps.is_array()) throw ParseError("components must be an array");
    for (const json& cj : comps) {
        ComponentGeometry cg;
        cg.id = get<int>(cj, "id");
        cg.free_cells = get<std::size_t>(cj, "free_cells");
        cg.outer = points_from_json(field(cj, "outer"));
        for (const json& h : field(cj, "holes")) cg.holes.push_back(points_from_json(h));
        const json& pj = field(cj, "polygon");
        cg.polygon.vertices = points_from_json(field(pj, "vertices"));
        cg.polygon.edge_bridge = ints_from_json(field(pj, "edge_bridge"));
        cg.polygon.component = cg.id;
        if (cg.polygon.edge_bridge.size() != cg.polygon.vertices.size())
            throw ParseError("polygon edge_bridge length mismatch");

        ComponentMap part;
        DissectionMap& dm = part.dm;
        dm.component = cg.id;
        dm.eps = get<double>(cj, "eps");
        for (const json& c : field(cj, "cells")) {
            ConvexCell cell;
            cell.id = get<int>(c, "id");
            cell.vertices = points_from_json(field(c, "vertices"));
            cell.vertex_ids = ints_from_json(field(c, "vertex_ids"));
            cell.cutline_ids = ints_from_json(field(c, "cutlines"));
            cell.centroid = point_from_json(field(c, "centroid"));
            if (cell.id != static_cast<int>(dm.cells.size())) throw ParseError("cell ids must be 0..n-1 in order");
            dm.cells.push_back(std::move(cell));
        }
        for (const json& c : field(cj, "cutlines")) {
            Cutline cut;
            cut.id = get<int>(c, "id");
            cut.a = point_from_json(field(c, "a"));
            cut.b = point_from_json(field(c, "b"));
            cut.left_poly = get<int>(c, "left");
            cut.right_poly = get<int>(c, "right");
            cut.bridge = get<bool>(c, "bridge");
            const int n = static_cast<int>(dm.cells.size());
            if (cut.id != static_cast<int>(dm.cutlines.size())) throw ParseError("cutline ids must be 0..m-1 in order");
            if (cut.left_poly < 0 || cut.left_poly >= n || cut.right_poly < 0 || cut.right_poly >= n ||
                cut.left_poly == cut.right_poly)
                throw ParseError("cutline references invalid cells");
            dm.cutlines.push_back(cut);
        }
        for (const auto& cell : dm.cells)
            for (int cid : cell.cutline_ids)
                if (cid < 0 || cid >= static_cast<int>(dm.cutlines.size()))
                    throw ParseError("cell references an unknown cutline");
        part.graph = build_graph(dm);
        a.geometry.components.push_back(std::move(cg));
        a.map.parts.push_back(std::move(part));
    }
    return a;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("cannot read " + path.string());
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << contents;
    if (!out) throw IoError("cannot write " + path.string());
}

MapArtifact load_map_or_artifact(const std::filesystem::path& path, const IngestConfig& cfg) {
    const std::string bytes = read_file(path);
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5')) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data());
        return build_artifact(load_grid({p, bytes.size()}, cfg.occ_threshold), cfg);
    }
    json j;
    try {
        j = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return artifact_from_json(j);
}

namespace {

double parse_double(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw ParseError("not a number: \"" + std::string(s) + "\"");
    return v;
}

}  // namespace

Point2 parse_point(std::string_view text) {
    const auto comma = text.find(',');
    if (comma == std::string_view::npos) throw ParseError("expected x,y: \"" + std::string(text) + "\"");
    return {parse_double(text.substr(0, comma)), parse_double(text.substr(comma + 1))};
}

Polyline parse_polyline(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '[') {
        try {
            return points_from_json(json::parse(text));
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("polyline: ") + e.what());
        }
    }
    Polyline out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        for (char& c : line)
            if (c == ',' || c == '\t' || c == '\r') c = ' ';
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        if (tok.size() != 2) throw ParseError("polyline: expected two numbers per line");
        out.push_back({parse_double(tok[0]), parse_double(tok[1])});
    }
    if (out.empty()) throw ParseError("polyline: no points");
    return out;
}

json plan_to_json(const Task& task, const PlannerOptions& opts, const PlanResult& r, bool timings) {
    json classes = json::array();
    for (const auto& c : r.classes) {
        json cj = {{"code", c.code.to_string()},
                   {"length", c.length},
                   {"iteration", c.iteration},
                   {"best", r.success && c.code == r.best_code},
                   {"path", polyline_to_json(c.path)}};
        if (timings) cj["time_us"] = c.time_us;
        classes.push_back(cj);
    }
    json imps = json::array();
    for (const auto& i : r.improvements) {
        json ij = {{"iteration", i.iteration}, {"length", i.length}};
        if (timings) ij["time_us"] = i.time_us;
        imps.push_back(ij);
    }
    json res = {{"success", r.success},
                {"termination", termination_name(r.termination)},
                {"length", r.success ? json(r.best_length) : json(nullptr)},
                {"code", r.success ? json(r.best_code.to_string()) : json(nullptr)},
                {"path", polyline_to_json(r.best_path)},
                {"iterations", r.iterations_used},
                {"cutlines_total", r.cutlines_total},
                {"cutlines_considered", r.cutlines_considered},
                {"classes", classes},
                {"improvements", imps}};
    if (timings) {
        res["t_init_us"] = r.t_init_us ? json(*r.t_init_us) : json(nullptr);
        res["elapsed_us"] = r.elapsed_us;
    }
    return {{"task",
             {{"start", point_to_json(task.x_init)},
              {"goal", point_to_json(task.x_goal)},
              {"iterations", task.iterations},
              {"seed", task.seed}}},
            {"params",
             {{"variant", variant_name(opts.variant)},
              {"alpha", opts.sampler.alpha},
              {"beta", opts.sampler.beta}}},
            {"result", res}};
}

namespace {

struct SvgWriter {
    std::ostringstream out;
    double height = 0.0;  // world height, for flipping y

    std::string pt(Point2 p) const {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3f,%.3f", p.x, height - p.y);
        return buf;
    }
    void polygon(const std::vector<Point2>& v, const char* style) {
        out << "<polygon points=\"";
        for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << pt(v[i]);
        out << "\" style=\"" << style << "\"/>\n";
    }
    void polyline(const Polyline& v, const char* style) {
        if (v.size() < 2) return;
        out << "<polyline points=\"";
        for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << pt(v[i]);
        out << "\" style=\"fill:none;" << style << "\"/>\n";
    }
    void line(Point2 a, Point2 b, const char* style) {
        const std::string pa = pt(a), pb = pt(b);
        const auto ca = pa.find(','), cb = pb.find(',');
        out << "<line x1=\"" << pa.substr(0, ca) << "\" y1=\"" << pa.substr(ca + 1) << "\" x2=\"" << pb.substr(0, cb)
            << "\" y2=\"" << pb.substr(cb + 1) << "\" style=\"" << style << "\"/>\n";
    }
    void circle(Point2 c, double r, const char* style) {
        const std::string pc = pt(c);
        const auto k = pc.find(',');
        out << "<circle cx=\"" << pc.substr(0, k) << "\" cy=\"" << pc.substr(k + 1) << "\" r=\"" << r << "\" style=\""
            << style << "\"/>\n";
    }
};

}  // namespace

std::string render_svg(const MapArtifact& a, const SvgLayers& layers) {
    const double w = a.geometry.width * a.geometry.resolution;
    const double h = a.geometry.height * a.geometry.resolution;
    const double unit = std::max(w, h) / 500.0;
    SvgWriter s;
    s.height = h;
    s.out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << w << ' ' << h << "\" width=\""
          << std::lround(std::min(1200.0, std::max(400.0, w))) << "\">\n";
    s.out << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h << "\" style=\"fill:#555\"/>\n";
    char style[160];
    for (std::size_t k = 0; k < a.geometry.components.size(); ++k) {
        const auto& cg = a.geometry.components[k];
        s.polygon(cg.outer, "fill:#fff;stroke:none");
        for (const auto& hole : cg.holes) s.polygon(hole, "fill:#555;stroke:none");
        std::snprintf(style, sizeof style, "fill:none;stroke:#999;stroke-width:%.3f", unit * 0.6);
        for (const auto& cell : a.map.parts[k].dm.cells) s.polygon(cell.vertices, style);
        std::snprintf(style, sizeof style, "stroke:#36c;stroke-width:%.3f;stroke-dasharray:%.3f,%.3f", unit,
                      unit * 3, unit * 2);
        for (const auto& c : a.map.parts[k].dm.cutlines) s.line(c.a, c.b, style);
    }
    if (layers.result) {
        const PlanResult& r = *layers.result;
        if (r.tree) {
            std::snprintf(style, sizeof style, "stroke:#7c7;stroke-width:%.3f", unit * 0.5);
            for (const auto& n : r.tree->nodes)
                if (n.parent >= 0) s.line(r.tree->nodes[n.parent].point, n.point, style);
        }
        std::snprintf(style, sizeof style, "stroke:#f90;stroke-width:%.3f", unit * 1.5);
        for (const auto& c : r.classes) s.polyline(c.path, style);
        std::snprintf(style, sizeof style, "stroke:#d00;stroke-width:%.3f", unit * 2.5);
        if (r.success) s.polyline(r.best_path, style);
    }
    if (layers.task) {
        s.circle(layers.task->x_init, unit * 4, "fill:#0a0");
        s.circle(layers.task->x_goal, unit * 4, "fill:#a00");
    }
    s.out << "</svg>\n";
    return s.out.str();
}

}  // namespace cdt
