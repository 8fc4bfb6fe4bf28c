#pragma once

#include <filesystem>
#include <vector>

#include "gdl/core.hpp"

namespace gdl {

/// JSON Lines, one graph per line. Missing "h" defaults to uniform weights.
std::vector<GraphRepr> read_dataset(const std::filesystem::path& path);
void write_dataset(const std::vector<GraphRepr>& graphs, const std::filesystem::path& path);

Dictionary load_dictionary(const std::filesystem::path& path);
void save_dictionary(const Dictionary& d, const std::filesystem::path& path);

// String forms used by the file functions above and by tests.
GraphRepr parse_graph_record(const std::string& line);
std::string graph_record(const GraphRepr& g);

}  // namespace gdl
