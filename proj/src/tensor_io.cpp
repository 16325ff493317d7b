#include "ordtensor/tensor_io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ordtensor {

namespace {

Dims dims_from_json(const Json& j) {
  if (!j.contains("dims") || !j["dims"].is_array()) throw DataError("tensor file lacks a \"dims\" array");
  Dims dims;
  for (const auto& d : j["dims"]) {
    if (!d.is_number_integer() || d.get<long long>() < 1) {
      throw DataError("\"dims\" must hold positive integers");
    }
    dims.push_back(d.get<std::size_t>());
  }
  if (dims.empty()) throw DataError("\"dims\" must not be empty");
  return dims;
}

const Json& entries_of(const Json& j, const char** layout) {
  if (!j.contains("entries") || !j["entries"].is_object()) {
    throw DataError("tensor file lacks an \"entries\" object");
  }
  const Json& e = j["entries"];
  if (e.contains("dense")) {
    *layout = "dense";
    if (!e["dense"].is_array()) throw DataError("\"dense\" entries must be an array");
    return e["dense"];
  }
  if (e.contains("long")) {
    *layout = "long";
    if (!e["long"].is_array()) throw DataError("\"long\" entries must be an array");
    return e["long"];
  }
  throw DataError("\"entries\" must contain \"dense\" or \"long\"");
}

// Returns the flat offset of a long-form record, checking range.
std::size_t record_offset(const Dims& dims, const Json& rec) {
  if (!rec.is_object() || !rec.contains("index") || !rec["index"].is_array()) {
    throw DataError("long-form record lacks an \"index\" array");
  }
  const Json& idx = rec["index"];
  if (idx.size() != dims.size()) throw DataError("long-form index has the wrong order");
  std::vector<std::size_t> zero_based(dims.size());
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (!idx[k].is_number_integer()) throw DataError("long-form index entries must be integers");
    const long long v = idx[k].get<long long>();
    if (v < 1 || static_cast<std::size_t>(v) > dims[k]) {
      throw DataError("long-form index " + std::to_string(v) + " out of range for mode " +
                      std::to_string(k + 1));
    }
    zero_based[k] = static_cast<std::size_t>(v - 1);
  }
  return linear_index(dims, zero_based);
}

double record_value(const Json& rec) {
  if (!rec.contains("value") || !rec["value"].is_number()) {
    throw DataError("long-form record lacks a numeric \"value\"");
  }
  return rec["value"].get<double>();
}

Json index_json(const Dims& dims, std::size_t offset) {
  Json idx = Json::array();
  for (std::size_t v : multi_index(dims, offset)) idx.push_back(v + 1);
  return idx;
}

}  // namespace

Json to_json(const DenseTensor& t, EntryLayout layout) {
  Json j;
  j["dims"] = t.dims();
  if (layout == EntryLayout::long_form) {
    Json records = Json::array();
    for (std::size_t i = 0; i < t.size(); ++i) {
      records.push_back({{"index", index_json(t.dims(), i)}, {"value", t[i]}});
    }
    j["entries"] = {{"long", std::move(records)}};
  } else {
    j["entries"] = {{"dense", std::vector<double>(t.values().begin(), t.values().end())}};
  }
  return j;
}

Json to_json(const OrdinalTensor& y, EntryLayout layout) {
  validate(y);
  Json j;
  j["dims"] = y.dims;
  j["levels"] = y.levels;
  bool repeated = false;
  for (auto c : y.counts) repeated = repeated || c > 1;
  if (layout == EntryLayout::automatic) {
    layout = (!repeated && 2 * y.num_observed() >= y.size()) ? EntryLayout::dense
                                                             : EntryLayout::long_form;
  }
  if (layout == EntryLayout::dense) {
    if (repeated) throw std::invalid_argument("dense layout cannot carry multiplicities");
    Json dense = Json::array();
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y.observed(i)) {
        dense.push_back(y.labels[i]);
      } else {
        dense.push_back(nullptr);
      }
    }
    j["entries"] = {{"dense", std::move(dense)}};
  } else {
    Json records = Json::array();
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (!y.observed(i)) continue;
      Json rec = {{"index", index_json(y.dims, i)}, {"value", y.labels[i]}};
      if (!y.counts.empty() && y.counts[i] > 1) rec["count"] = y.counts[i];
      records.push_back(std::move(rec));
    }
    j["entries"] = {{"long", std::move(records)}};
  }
  return j;
}

DenseTensor dense_tensor_from_json(const Json& j) {
  const Dims dims = dims_from_json(j);
  const char* layout = nullptr;
  const Json& entries = entries_of(j, &layout);
  DenseTensor t(dims);
  if (std::string(layout) == "dense") {
    if (entries.size() != t.size()) {
      throw DataError("dense entry count " + std::to_string(entries.size()) +
                      " does not match dims product " + std::to_string(t.size()));
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!entries[i].is_number()) throw DataError("dense entries must be numbers");
      t[i] = entries[i].get<double>();
    }
  } else {
    std::set<std::size_t> seen;
    for (const auto& rec : entries) {
      const std::size_t off = record_offset(dims, rec);
      if (!seen.insert(off).second) throw DataError("duplicate long-form index");
      t[off] = record_value(rec);
    }
  }
  return t;
}

OrdinalTensor ordinal_tensor_from_json(const Json& j) {
  OrdinalTensor y;
  y.dims = dims_from_json(j);
  if (!j.contains("levels") || !j["levels"].is_number_integer()) {
    throw DataError("ordinal tensor file lacks an integer \"levels\"");
  }
  y.levels = j["levels"].get<int>();
  if (y.levels < 2) throw DataError("\"levels\" must be at least 2");
  const std::size_t n = num_elements(y.dims);
  y.labels.assign(n, 0);
  y.mask.assign(n, 0);
  const char* layout = nullptr;
  const Json& entries = entries_of(j, &layout);
  auto read_label = [&](const Json& v) {
    if (!v.is_number()) throw DataError("ordinal values must be numbers");
    const double x = v.get<double>();
    if (x != std::floor(x) || x < 1 || x > y.levels) {
      throw DataError("ordinal value " + v.dump() + " outside [1, " + std::to_string(y.levels) + "]");
    }
    return static_cast<int>(x);
  };
  if (std::string(layout) == "dense") {
    if (entries.size() != n) {
      throw DataError("dense entry count " + std::to_string(entries.size()) +
                      " does not match dims product " + std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (entries[i].is_null()) continue;
      y.labels[i] = read_label(entries[i]);
      y.mask[i] = 1;
    }
  } else {
    bool any_count = false;
    std::vector<std::uint32_t> counts(n, 0);
    for (const auto& rec : entries) {
      const std::size_t off = record_offset(y.dims, rec);
      if (y.mask[off]) throw DataError("duplicate long-form index");
      if (!rec.contains("value")) throw DataError("long-form record lacks a \"value\"");
      y.labels[off] = read_label(rec["value"]);
      y.mask[off] = 1;
      counts[off] = 1;
      if (rec.contains("count")) {
        if (!rec["count"].is_number_integer() || rec["count"].get<long long>() < 1) {
          throw DataError("\"count\" must be a positive integer");
        }
        counts[off] = rec["count"].get<std::uint32_t>();
        any_count = true;
      }
    }
    if (any_count) y.counts = std::move(counts);
  }
  return y;
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw DataError("matrix must be an array of rows");
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != j[0].size()) throw DataError("matrix rows have unequal lengths");
    for (std::size_t c = 0; c < j[i].size(); ++c) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = j[i][c].get<double>();
    }
  }
  return m;
}

Json fit_to_json(const FitResult& fit, double alpha, double bic) {
  Json factors = Json::array();
  for (const auto& f : fit.factors.factors) factors.push_back(to_json(f));
  return {
      {"kind", "ordinal_tensor_fit"},
      {"dims", fit.theta_hat.dims()},
      {"rank", fit.rank},
      {"link", {{"family", std::string(to_string(fit.link.family))}, {"sigma", fit.link.sigma}}},
      {"alpha", alpha},
      {"cutoffs", fit.cutoffs_hat},
      {"center_shift", fit.center_shift},
      {"theta", to_json(fit.theta_hat)},
      {"core", to_json(fit.factors.core)},
      {"factors", std::move(factors)},
      {"objective_trace", fit.objective_trace},
      {"converged", fit.converged},
      {"iterations", fit.iterations},
      {"final_objective", fit.final_objective},
      {"bic", bic},
  };
}

FitResult fit_from_json(const Json& j) {
  try {
    FitResult fit;
    fit.theta_hat = dense_tensor_from_json(j.at("theta"));
    fit.factors.core = dense_tensor_from_json(j.at("core"));
    for (const auto& f : j.at("factors")) fit.factors.factors.push_back(matrix_from_json(f));
    fit.cutoffs_hat = j.at("cutoffs").get<std::vector<double>>();
    fit.center_shift = j.value("center_shift", 0.0);
    fit.rank = j.at("rank").get<Dims>();
    fit.link.family = parse_link_family(j.at("link").at("family").get<std::string>());
    fit.link.sigma = j.at("link").at("sigma").get<double>();
    fit.objective_trace = j.at("objective_trace").get<std::vector<double>>();
    fit.converged = j.at("converged").get<bool>();
    fit.iterations = j.at("iterations").get<int>();
    fit.final_objective = j.at("final_objective").get<double>();
    check_tucker_shapes(fit.factors);
    return fit;
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed fit file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("malformed fit file: ") + e.what());
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw DataError("cannot parse " + path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, j.dump(1) + "\n");
}

Dims parse_rank(const std::string& text) {
  Dims rank;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("cannot parse rank '" + text + "'");
    }
    while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
    if (pos != item.size() || v < 1) throw std::invalid_argument("cannot parse rank '" + text + "'");
    rank.push_back(static_cast<std::size_t>(v));
  }
  if (rank.empty()) throw std::invalid_argument("empty rank");
  return rank;
}

std::vector<Dims> parse_rank_grid(const std::string& text) {
  std::vector<Dims> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    grid.push_back(parse_rank(item));
  }
  if (grid.empty()) throw std::invalid_argument("rank grid is empty");
  return grid;
}

std::string format_rank(const Dims& rank, char sep) {
  std::string s;
  for (std::size_t k = 0; k < rank.size(); ++k) {
    if (k) s += sep;
    s += std::to_string(rank[k]);
  }
  return s;
}

}  // namespace ordtensor
