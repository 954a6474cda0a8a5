#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "magplate/grid.hpp"

namespace magplate {

// Dump layout: one JSON header line, then node values as little-endian f64,
// nodes x-fastest, components fastest within a node. Matrices are stored
// row-major. "meta" carries free-form extras (e.g. the thickness h).
struct FieldDump {
  nlohmann::json header;
  std::vector<double> data;
};

nlohmann::json grid_json(const Grid2& g);
nlohmann::json grid_json(const Grid3& g);
Grid2 grid2_from_json(const nlohmann::json& j);
Grid3 grid3_from_json(const nlohmann::json& j);

template <class G, class V>
void write_field(const std::string& path, const Field<G, V>& f, const nlohmann::json& meta = nlohmann::json::object());
void write_dump(const std::string& path, const FieldDump& d);
FieldDump read_dump(const std::string& path);

template <class G, class V>
Field<G, V> field_from_dump(const FieldDump& d);

// x1,x2,value per node.
void write_csv(const std::string& path, const ScalarField2& f);

}  // namespace magplate
