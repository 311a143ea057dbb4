#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "vropt/dataset.hpp"

namespace vropt {

// LIBSVM text format: one sample per line, "label idx:val idx:val ...",
// 1-based ascending indices. If every label is exactly -1, 0, or +1 the set
// is treated as binary classification (0 remapped to -1); otherwise as
// regression targets. The dimension is the largest index seen unless
// dimension_override is given.
Dataset parse_libsvm(std::istream& in, std::optional<int> dimension_override = std::nullopt);
Dataset parse_libsvm_text(const std::string& text,
                          std::optional<int> dimension_override = std::nullopt);

// Canonical text form; parse_libsvm_text(serialize_libsvm(ds)) == ds.
std::string serialize_libsvm(const Dataset& ds);

// Shape registry for the benchmark sets the harness knows by name.
std::optional<DatasetMeta> known_dataset_meta(std::string_view name);
std::vector<DatasetMeta> known_datasets();

// Directory named datasets are loaded from: $VROPT_DATA_DIR, or ./data when
// the variable is unset.
std::string data_directory();

// Loads data_directory()/name (or name + ".txt"). Prints a warning to stderr
// when the registry knows the name but the file shape disagrees.
Dataset load_named_dataset(const std::string& name);

}  // namespace vropt
