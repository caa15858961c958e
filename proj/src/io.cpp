#include "demand/io.hpp"

#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include "json.hpp"

namespace demand {

namespace {

using nlohmann::json;

bool has_extension(const std::string& path, const char* ext) {
  const std::string suffix(ext);
  return path.size() >= suffix.size() &&
         path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string_view trimmed(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_double(std::string_view token, const std::string& path, std::size_t line_no) {
  const std::string_view t = trimmed(token);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
    throw InputError(path + ":" + std::to_string(line_no) + ": cannot parse '" +
                     std::string(token) + "' as a number");
  }
  return value;
}

void put_u32le(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

std::uint32_t get_u32le(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(p[b]) << (8 * b);
  return v;
}

void put_f64le(std::string& out, double d) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &d, sizeof(bits));
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
}

double get_f64le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  double d = 0.0;
  std::memcpy(&d, &bits, sizeof(d));
  return d;
}

void write_binary_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError(path + ": cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError(path + ": write failed");
}

// --- strict JSON helpers -------------------------------------------------

void reject_unknown_keys(const json& obj, const std::vector<std::string>& known,
                         const std::string& where) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const std::string& k : known) {
      if (item.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError(where + ": unknown key \"" + item.key() + "\"");
    }
  }
}

const json* find_key(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  return v.get<double>();
}

int get_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return v.get<int>();
}

bool get_bool(const json& v, const std::string& where) {
  if (!v.is_boolean()) throw ConfigError(where + ": expected a boolean");
  return v.get<bool>();
}

std::uint64_t get_seed(const json& v, const std::string& where) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                 v.get<std::int64_t>() < 0)) {
    throw ConfigError(where + ": expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

json require_object(const std::string& text, const std::string& what) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ConfigError(what + ": not valid JSON");
  if (!doc.is_object()) throw ConfigError(what + ": top level must be an object");
  return doc;
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw InputError("format_double: conversion failed");
  return std::string(buf.data(), ptr);
}

Matrix read_matrix(const std::string& path) {
  if (has_extension(path, ".dmnd")) return read_matrix_dmnd(path);
  if (has_extension(path, ".csv")) return read_matrix_csv(path);
  throw InputError(path + ": unsupported matrix format (expected .csv or .dmnd)");
}

void write_matrix(const std::string& path, const Matrix& m) {
  if (has_extension(path, ".dmnd")) {
    write_matrix_dmnd(path, m);
  } else if (has_extension(path, ".csv")) {
    write_matrix_csv(path, m);
  } else {
    throw InputError(path + ": unsupported matrix format (expected .csv or .dmnd)");
  }
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open for reading");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view stripped = trimmed(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    std::vector<double> row;
    std::size_t start = 0;
    const std::string body(stripped);
    while (true) {
      const std::size_t comma = body.find(',', start);
      const std::string_view token =
          std::string_view(body).substr(start, comma == std::string::npos ? std::string::npos
                                                                          : comma - start);
      row.push_back(parse_double(token, path, line_no));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InputError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(rows.front().size()) + " columns, got " +
                       std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(path + ": no data rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  require_finite(m, path.c_str());
  return m;
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  require_finite(m, path.c_str());
  std::string out;
  out.reserve(static_cast<std::size_t>(m.size()) * 12);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out.push_back(',');
      out += format_double(m(i, j));
    }
    out.push_back('\n');
  }
  write_binary_file(path, out);
}

Matrix read_matrix_dmnd(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || bytes.compare(0, 4, "DMND") != 0) {
    throw InputError(path + ": not a DMND matrix file");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint64_t rows = get_u32le(p + 4);
  const std::uint64_t cols = get_u32le(p + 8);
  if (rows == 0 || cols == 0) throw InputError(path + ": empty matrix");
  const std::uint64_t expected = 12 + 8 * rows * cols;
  if (bytes.size() != expected) {
    throw InputError(path + ": size mismatch (header says " + std::to_string(rows) + "x" +
                     std::to_string(cols) + ", file has " + std::to_string(bytes.size()) +
                     " bytes, expected " + std::to_string(expected) + ")");
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::size_t off = 12;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j, off += 8) {
      m(i, j) = get_f64le(p + off);
    }
  }
  require_finite(m, path.c_str());
  return m;
}

void write_matrix_dmnd(const std::string& path, const Matrix& m) {
  require_finite(m, path.c_str());
  if (m.rows() > static_cast<Eigen::Index>(UINT32_MAX) ||
      m.cols() > static_cast<Eigen::Index>(UINT32_MAX)) {
    throw InputError(path + ": matrix too large for DMND format");
  }
  std::string out;
  out.reserve(12 + static_cast<std::size_t>(m.size()) * 8);
  out += "DMND";
  put_u32le(out, static_cast<std::uint32_t>(m.rows()));
  put_u32le(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      put_f64le(out, m(i, j));
    }
  }
  write_binary_file(path, out);
}

DemandConfig parse_config_json(const std::string& text) {
  const json doc = require_object(text, "config");
  reject_unknown_keys(doc,
                      {"lambda", "max_iters_per_layer", "rel_tol", "max_layers", "activation",
                       "adam", "rank", "mbp", "seed"},
                      "config");
  DemandConfig cfg;
  if (const json* v = find_key(doc, "lambda")) cfg.lambda = get_number(*v, "config.lambda");
  if (const json* v = find_key(doc, "max_iters_per_layer")) {
    cfg.max_iters_per_layer = get_int(*v, "config.max_iters_per_layer");
  }
  if (const json* v = find_key(doc, "rel_tol")) cfg.rel_tol = get_number(*v, "config.rel_tol");
  if (const json* v = find_key(doc, "max_layers")) {
    cfg.max_layers = get_int(*v, "config.max_layers");
  }
  if (const json* v = find_key(doc, "activation")) {
    if (!v->is_string()) throw ConfigError("config.activation: expected a string");
    const auto s = v->get<std::string>();
    if (s == "sigmoid") {
      cfg.activation = ActivationKind::Sigmoid;
    } else if (s == "identity") {
      cfg.activation = ActivationKind::Identity;
    } else {
      throw ConfigError("config.activation: must be \"sigmoid\" or \"identity\", got \"" + s +
                        "\"");
    }
  }
  if (const json* v = find_key(doc, "adam")) {
    if (!v->is_object()) throw ConfigError("config.adam: expected an object");
    reject_unknown_keys(*v, {"alpha", "beta1", "beta2", "eps"}, "config.adam");
    if (const json* w = find_key(*v, "alpha")) cfg.adam.alpha = get_number(*w, "config.adam.alpha");
    if (const json* w = find_key(*v, "beta1")) cfg.adam.beta1 = get_number(*w, "config.adam.beta1");
    if (const json* w = find_key(*v, "beta2")) cfg.adam.beta2 = get_number(*w, "config.adam.beta2");
    if (const json* w = find_key(*v, "eps")) cfg.adam.eps = get_number(*w, "config.adam.eps");
  }
  if (const json* v = find_key(doc, "rank")) {
    if (!v->is_object()) throw ConfigError("config.rank: expected an object");
    reject_unknown_keys(*v, {"wc_window", "eps_denom", "min_rank"}, "config.rank");
    if (const json* w = find_key(*v, "wc_window")) {
      cfg.rank.wc_window = get_int(*w, "config.rank.wc_window");
    }
    if (const json* w = find_key(*v, "eps_denom")) {
      cfg.rank.eps_denom = get_number(*w, "config.rank.eps_denom");
    }
    if (const json* w = find_key(*v, "min_rank")) {
      cfg.rank.min_rank = get_int(*w, "config.rank.min_rank");
    }
  }
  if (const json* v = find_key(doc, "mbp")) {
    if (!v->is_object()) throw ConfigError("config.mbp: expected an object");
    reject_unknown_keys(*v, {"enabled", "e0", "max_iter", "guard"}, "config.mbp");
    if (const json* w = find_key(*v, "enabled")) {
      cfg.mbp.enabled = get_bool(*w, "config.mbp.enabled");
    }
    if (const json* w = find_key(*v, "e0")) cfg.mbp.e0 = get_number(*w, "config.mbp.e0");
    if (const json* w = find_key(*v, "max_iter")) {
      cfg.mbp.max_iter = get_int(*w, "config.mbp.max_iter");
    }
    if (const json* w = find_key(*v, "guard")) cfg.mbp.guard = get_bool(*w, "config.mbp.guard");
  }
  if (const json* v = find_key(doc, "seed")) cfg.seed = get_seed(*v, "config.seed");
  cfg.validate();
  return cfg;
}

SynthSpec parse_synth_spec_json(const std::string& text) {
  const json doc = require_object(text, "spec");
  reject_unknown_keys(
      doc, {"rows", "cols", "ranks", "noise_sigma", "s_density", "s_amplitude", "seed"}, "spec");
  SynthSpec spec;
  if (const json* v = find_key(doc, "rows")) spec.rows = get_int(*v, "spec.rows");
  if (const json* v = find_key(doc, "cols")) spec.cols = get_int(*v, "spec.cols");
  if (const json* v = find_key(doc, "ranks")) {
    if (!v->is_array() || v->empty()) throw ConfigError("spec.ranks: expected a nonempty array");
    spec.ranks.clear();
    for (const json& r : *v) spec.ranks.push_back(get_int(r, "spec.ranks[]"));
  }
  if (const json* v = find_key(doc, "noise_sigma")) {
    spec.noise_sigma = get_number(*v, "spec.noise_sigma");
  }
  if (const json* v = find_key(doc, "s_density")) {
    spec.s_density = get_number(*v, "spec.s_density");
  }
  if (const json* v = find_key(doc, "s_amplitude")) {
    spec.s_amplitude = get_number(*v, "spec.s_amplitude");
  }
  if (const json* v = find_key(doc, "seed")) spec.seed = get_seed(*v, "spec.seed");
  try {
    spec.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("spec: ") + e.what());
  }
  return spec;
}

std::string config_to_json(const DemandConfig& cfg) {
  json doc;
  doc["lambda"] = cfg.lambda;
  doc["max_iters_per_layer"] = cfg.max_iters_per_layer;
  doc["rel_tol"] = cfg.rel_tol;
  doc["max_layers"] = cfg.max_layers;
  doc["activation"] = cfg.activation == ActivationKind::Sigmoid ? "sigmoid" : "identity";
  doc["adam"] = {{"alpha", cfg.adam.alpha},
                 {"beta1", cfg.adam.beta1},
                 {"beta2", cfg.adam.beta2},
                 {"eps", cfg.adam.eps}};
  doc["rank"] = {{"wc_window", cfg.rank.wc_window},
                 {"eps_denom", cfg.rank.eps_denom},
                 {"min_rank", cfg.rank.min_rank}};
  doc["mbp"] = {{"enabled", cfg.mbp.enabled},
                {"e0", cfg.mbp.e0},
                {"max_iter", cfg.mbp.max_iter},
                {"guard", cfg.mbp.guard}};
  doc["seed"] = cfg.seed;
  return doc.dump(2) + "\n";
}

std::string synth_spec_to_json(const SynthSpec& spec) {
  json doc;
  doc["rows"] = spec.rows;
  doc["cols"] = spec.cols;
  doc["ranks"] = spec.ranks;
  doc["noise_sigma"] = spec.noise_sigma;
  doc["s_density"] = spec.s_density;
  doc["s_amplitude"] = spec.s_amplitude;
  doc["seed"] = spec.seed;
  return doc.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw InputError(path + ": read failed");
  return buf.str();
}

}  // namespace demand
