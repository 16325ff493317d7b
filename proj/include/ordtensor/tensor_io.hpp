#pragma once

#include "ordtensor/estimator.hpp"
#include "ordtensor/likelihood.hpp"
#include "ordtensor/tensor.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>

namespace ordtensor {

using Json = nlohmann::json;

/// Malformed, inconsistent or unreadable input/output files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EntryLayout {
  /// Dense when at least half the entries are observed and no entry was
  /// drawn more than once, long form otherwise.
  automatic,
  dense,
  /// Records {"index": [1-based], "value": v[, "count": m]}.
  long_form,
};

/// Tensor files: {"dims": [...], "levels": L, "entries": {"dense": [...]}}
/// or {"dims": [...], "levels": L, "entries": {"long": [records]}}. Dense
/// entries are in first-index-fastest order with null marking a missing
/// ordinal entry; "levels" is present only for ordinal tensors.
Json to_json(const DenseTensor& t, EntryLayout layout = EntryLayout::dense);
Json to_json(const OrdinalTensor& y, EntryLayout layout = EntryLayout::automatic);
DenseTensor dense_tensor_from_json(const Json& j);
OrdinalTensor ordinal_tensor_from_json(const Json& j);

Json to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

/// Everything needed to reproduce predictions from a fit.
Json fit_to_json(const FitResult& fit, double alpha, double bic);
FitResult fit_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Parses "2,2,2" into a rank vector.
Dims parse_rank(const std::string& text);
/// Parses "1,1,1;2,2,2" into a list of rank vectors.
std::vector<Dims> parse_rank_grid(const std::string& text);
std::string format_rank(const Dims& rank, char sep = ',');

}  // namespace ordtensor
