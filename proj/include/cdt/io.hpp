#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cdt/errors.hpp"
#include "cdt/map_ingest.hpp"
#include "cdt/planner.hpp"

namespace cdt {

/// Input/output failure (missing file, unwritable path).
class IoError : public Error {
public:
    using Error::Error;
};

struct InitStats {
    int components = 0;
    int holes = 0;
    int vertices = 0;  // after simplification, before keyholing
    int reflex = 0;
    int cells = 0;
    int cutlines = 0;
    double elapsed_us = 0.0;  // ingest + decomposition + graphs
};

/// Everything `init` produces for one map: fitted geometry, per-component
/// dissections and topology graphs.
struct MapArtifact {
    MapGeometry geometry;
    CdtMap map;
    InitStats stats;
};

MapArtifact build_artifact(const OccupancyGrid& grid, const IngestConfig& cfg);

nlohmann::json artifact_to_json(const MapArtifact& a);
/// Throws ParseError on malformed documents.
MapArtifact artifact_from_json(const nlohmann::json& j);

/// Reads a JSON artifact, or builds one from a PGM (detected by its magic
/// number). Throws IoError when the file cannot be read.
MapArtifact load_map_or_artifact(const std::filesystem::path& path, const IngestConfig& cfg);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

/// Parses "x,y" (spaces allowed around the comma).
Point2 parse_point(std::string_view text);

/// Polyline from either a JSON array of [x, y] pairs or plain text with one
/// point per line ("x y" or "x,y"; '#' starts a comment).
Polyline parse_polyline(const std::string& text);

nlohmann::json point_to_json(Point2 p);
nlohmann::json polyline_to_json(const Polyline& f);

/// Plan output. Timing fields are only written when `timings` is set so that
/// fixed-seed runs produce identical documents.
nlohmann::json plan_to_json(const Task& task, const PlannerOptions& opts, const PlanResult& r, bool timings);

struct SvgLayers {
    const Task* task = nullptr;
    const PlanResult* result = nullptr;
};

/// Cells, cutlines, obstacles and, when given, the tree, class paths and the
/// best path of a plan.
std::string render_svg(const MapArtifact& a, const SvgLayers& layers = {});

}  // namespace cdt
