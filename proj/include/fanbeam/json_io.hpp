#pragma once

#include <filesystem>

#include "json.hpp"

#include "fanbeam/calibration.hpp"
#include "fanbeam/fbp.hpp"
#include "fanbeam/geometry.hpp"
#include "fanbeam/phantom.hpp"
#include "fanbeam/reconstruction.hpp"

namespace fanbeam {

using Json = nlohmann::json;

// Field names match the struct members. Missing optional fields keep their
// defaults; missing required ones throw Error(Format).

void to_json(Json& j, const FanbeamGeometry& g);
void from_json(const Json& j, FanbeamGeometry& g);

void to_json(Json& j, const CalibParams& p);
void from_json(const Json& j, CalibParams& p);

void to_json(Json& j, const FbpConfig& c);
void from_json(const Json& j, FbpConfig& c);

void to_json(Json& j, const CoordinateDescentConfig& c);
void from_json(const Json& j, CoordinateDescentConfig& c);

void to_json(Json& j, const EnhancerSpec& e);
void from_json(const Json& j, EnhancerSpec& e);

void to_json(Json& j, const ReconConfig& c);
void from_json(const Json& j, ReconConfig& c);

void to_json(Json& j, const Ellipse& e);
void from_json(const Json& j, Ellipse& e);

void to_json(Json& j, const EllipsePhantom& p);
void from_json(const Json& j, EllipsePhantom& p);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

/// Parses and converts, rethrowing conversion failures as Error(Format).
template <class T>
T parse_as(const Json& j, const char* what) {
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Format, std::string(what) + ": " + e.what());
    }
}

} // namespace fanbeam
