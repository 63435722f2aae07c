#pragma once

#include <string>

#include "otmap/transport_map.hpp"

namespace otmap {

inline constexpr int kMapFormatVersion = 1;

// One JSON schema covers both cases.  A single map stores its fields at the
// top level with an empty "stages" array; a sequence stores one object per
// stage (map fields plus stage metadata) and no top-level map fields.
std::string serialize(const TransportMap& map);
std::string serialize(const SequentialMap& seq);

// Throws SchemaError (with the JSON path) or UnsupportedVersion.
TransportMap deserialize_map(const std::string& text);
// A single-map document loads as a one-stage sequence.
SequentialMap deserialize_sequence(const std::string& text);

void save_text(const std::string& path, const std::string& text);
std::string load_text(const std::string& path);

}  // namespace otmap
