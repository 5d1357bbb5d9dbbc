#include "csc/dataio.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace csc {

using nlohmann::json;

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view token, std::size_t line) {
  token = trim(token);
  if (token.empty()) throw ParseError("empty value", line);
  if (token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw ParseError("non-numeric token '" + std::string(token) + "'", line);
  if (!std::isfinite(v)) throw ParseError("non-finite value '" + std::string(token) + "'", line);
  return v;
}

std::string numbered(const char* prefix, std::size_t i) {
  std::ostringstream os;
  os << prefix << std::setw(3) << std::setfill('0') << i << ".csv";
  return os.str();
}

void require_version(const json& j, const fs::path& where) {
  if (!j.contains("format_version")) throw ValidationError(where.string() + ": missing format_version");
  const std::string v = j.at("format_version").get<std::string>();
  if (v != kFormatVersion)
    throw ValidationError(where.string() + ": unsupported format_version '" + v + "' (expected '" + kFormatVersion + "')");
}

json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_json(const json& j, const fs::path& path) { write_text(j.dump(2) + "\n", path); }

void check_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (m.rows() != rows || m.cols() != cols)
    throw ValidationError(what + ": file is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                          ", manifest declares " + std::to_string(rows) + "x" + std::to_string(cols));
}

}  // namespace

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError("missing file: " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::string& text, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
  if (!out) throw ValidationError("write failed: " + path.string());
}

std::string format_matrix(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) throw ConfigError("format_matrix: matrix has no entries");
  if (!m.allFinite()) throw NumericalError("format_matrix: non-finite entry");
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

Matrix parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t start = 0;
  std::size_t blank_run_start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    const std::string_view line = trim(std::string_view(text).substr(start, end - start));
    start = end + 1;
    if (line.empty()) {
      if (blank_run_start == 0) blank_run_start = line_no;
      continue;
    }
    if (blank_run_start != 0) throw ParseError("blank line inside matrix", blank_run_start);
    std::vector<double> row;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      row.push_back(parse_double(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos),
                                 line_no));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("ragged row: " + std::to_string(row.size()) + " values, expected " +
                           std::to_string(rows.front().size()),
                       line_no);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("empty matrix file", std::max<std::size_t>(line_no, 1));
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

void write_matrix(const Matrix& m, const fs::path& path) { write_text(format_matrix(m), path); }

Matrix read_matrix(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return parse_matrix(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

// ---------------------------------------------------------------------------

json DatasetManifest::to_json() const {
  json j;
  j["format_version"] = format_version;
  j["p"] = p;
  j["q"] = q;
  j["n"] = n;
  j["G"] = G;
  json groups = json::array();
  for (std::size_t g = 0; g < x_files.size(); ++g) groups.push_back({{"X", x_files[g]}, {"Y", y_files[g]}});
  j["groups"] = groups;
  if (!truth_b_files.empty()) {
    json truth;
    truth["B_star"] = truth_b_files;
    if (!truth_dictionary_files.empty()) truth["dictionary"] = truth_dictionary_files;
    if (!truth_supports.empty()) truth["supports"] = truth_supports;
    j["ground_truth"] = truth;
  }
  if (!test_manifest.empty()) j["test_manifest"] = test_manifest;
  j["provenance"] = provenance;
  return j;
}

DatasetManifest DatasetManifest::from_json(const json& j) {
  DatasetManifest m;
  try {
    m.format_version = j.at("format_version").get<std::string>();
    m.p = j.at("p").get<Eigen::Index>();
    m.q = j.at("q").get<Eigen::Index>();
    m.n = j.at("n").get<Eigen::Index>();
    m.G = j.at("G").get<std::size_t>();
    for (const json& g : j.at("groups")) {
      m.x_files.push_back(g.at("X").get<std::string>());
      m.y_files.push_back(g.at("Y").get<std::string>());
    }
    if (j.contains("ground_truth")) {
      const json& t = j.at("ground_truth");
      m.truth_b_files = t.at("B_star").get<std::vector<std::string>>();
      if (t.contains("dictionary")) m.truth_dictionary_files = t.at("dictionary").get<std::vector<std::string>>();
      if (t.contains("supports")) m.truth_supports = t.at("supports").get<std::vector<std::vector<std::size_t>>>();
    }
    if (j.contains("test_manifest")) m.test_manifest = j.at("test_manifest").get<std::string>();
    if (j.contains("provenance")) m.provenance = j.at("provenance");
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed dataset manifest: ") + e.what());
  }
  return m;
}

fs::path LoadedDataset::test_manifest_path() const { return manifest_path.parent_path() / manifest.test_manifest; }

fs::path save_dataset(const GroupedDataset& dataset, const fs::path& dir, const GroundTruth* truth,
                      const GroupedDataset* test, const json& provenance) {
  if (dataset.empty()) throw ConfigError("save_dataset: dataset has no groups");
  fs::create_directories(dir);
  DatasetManifest m;
  m.p = dataset.p();
  m.q = dataset.q();
  m.n = dataset.n();
  m.G = dataset.size();
  m.provenance = provenance;
  for (std::size_t g = 0; g < dataset.size(); ++g) {
    m.x_files.push_back(numbered("X_", g));
    m.y_files.push_back(numbered("Y_", g));
    write_matrix(dataset[g].X, dir / m.x_files.back());
    write_matrix(dataset[g].Y, dir / m.y_files.back());
  }
  if (truth != nullptr) {
    if (truth->B_star.size() != dataset.size()) throw DimensionError("save_dataset: ground truth group count differs");
    for (std::size_t g = 0; g < truth->B_star.size(); ++g) {
      m.truth_b_files.push_back("truth/" + numbered("B_", g));
      write_matrix(truth->B_star[g], dir / m.truth_b_files.back());
    }
    for (std::size_t k = 0; k < truth->true_dictionary.size(); ++k) {
      m.truth_dictionary_files.push_back("truth/" + numbered("D_", k));
      write_matrix(truth->true_dictionary[k], dir / m.truth_dictionary_files.back());
    }
    m.truth_supports = truth->true_supports;
  }
  if (test != nullptr) {
    save_dataset(*test, dir / "test", nullptr, nullptr, json{{"role", "test set"}});
    m.test_manifest = "test/manifest.json";
  }
  const fs::path manifest_path = dir / "manifest.json";
  write_json(m.to_json(), manifest_path);
  return manifest_path;
}

LoadedDataset load_dataset_full(const fs::path& manifest_path) {
  const json j = read_json(manifest_path);
  require_version(j, manifest_path);
  LoadedDataset out;
  out.manifest_path = manifest_path;
  out.manifest = DatasetManifest::from_json(j);
  const DatasetManifest& m = out.manifest;
  if (m.p < 1 || m.q < 1 || m.n < 1 || m.G < 1) throw ValidationError("manifest: p, q, n and G must be positive");
  if (m.x_files.size() != m.G)
    throw ValidationError("manifest declares G = " + std::to_string(m.G) + " but lists " +
                          std::to_string(m.x_files.size()) + " groups");
  const fs::path base = manifest_path.parent_path();
  std::vector<Group> groups;
  groups.reserve(m.G);
  for (std::size_t g = 0; g < m.G; ++g) {
    const std::string name = "group " + std::to_string(g);
    Group grp{read_matrix(base / m.x_files[g]), read_matrix(base / m.y_files[g])};
    check_shape(grp.X, m.p, m.n, name + " X");
    check_shape(grp.Y, m.q, m.n, name + " Y");
    groups.push_back(std::move(grp));
  }
  out.data = GroupedDataset(std::move(groups));

  if (!m.truth_b_files.empty()) {
    if (m.truth_b_files.size() != m.G) throw ValidationError("manifest: ground truth lists the wrong number of groups");
    GroundTruth t;
    for (std::size_t g = 0; g < m.G; ++g) {
      t.B_star.push_back(read_matrix(base / m.truth_b_files[g]));
      check_shape(t.B_star.back(), m.q, m.p, "group " + std::to_string(g) + " B_star");
    }
    for (std::size_t k = 0; k < m.truth_dictionary_files.size(); ++k) {
      t.true_dictionary.push_back(read_matrix(base / m.truth_dictionary_files[k]));
      check_shape(t.true_dictionary.back(), m.q, m.p, "true dictionary entry " + std::to_string(k));
    }
    t.true_supports = m.truth_supports;
    out.truth = std::move(t);
  }
  return out;
}

GroupedDataset load_dataset(const fs::path& manifest_path) { return load_dataset_full(manifest_path).data; }

// ---------------------------------------------------------------------------

json config_to_json(const CscConfig& c) {
  return json{{"K", c.K},
              {"lambda", c.lambda},
              {"tau", c.tau},
              {"max_alternations", c.max_alternations},
              {"objective_rtol", c.objective_rtol},
              {"encoder_tol", c.encoder_tol},
              {"encoder_max_sweeps", c.encoder_max_sweeps},
              {"max_inner_iterations", c.max_inner_iterations},
              {"warm_start", c.warm_start},
              {"rng_seed", c.rng_seed}};
}

CscConfig config_from_json(const json& j) {
  CscConfig c;
  try {
    c.K = j.at("K").get<std::size_t>();
    c.lambda = j.at("lambda").get<double>();
    c.tau = j.at("tau").get<double>();
    c.max_alternations = j.at("max_alternations").get<int>();
    c.objective_rtol = j.at("objective_rtol").get<double>();
    c.encoder_tol = j.at("encoder_tol").get<double>();
    c.encoder_max_sweeps = j.at("encoder_max_sweeps").get<int>();
    c.max_inner_iterations = j.at("max_inner_iterations").get<int>();
    c.warm_start = j.at("warm_start").get<bool>();
    c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
  return c;
}

std::string format_diagnostics_csv(const FitDiagnostics& d) {
  std::string out = "alternation,series,index,value\n";
  auto row = [&out](std::size_t t, const char* series, std::size_t index, const std::string& value) {
    out += std::to_string(t + 1) + ',' + series + ',' + std::to_string(index) + ',' + value + '\n';
  };
  for (std::size_t t = 0; t < d.alternations(); ++t) {
    row(t, "objective", 0, format_double(d.objective[t]));
    if (t < d.stationarity.size()) row(t, "stationarity", 0, format_double(d.stationarity[t]));
    for (std::size_t g = 0; g < d.l0[t].size(); ++g) row(t, "l0", g, std::to_string(d.l0[t][g]));
    for (std::size_t g = 0; g < d.l1[t].size(); ++g) row(t, "l1", g, format_double(d.l1[t][g]));
    for (std::size_t k = 0; k < d.rank[t].size(); ++k) row(t, "rank", k, std::to_string(d.rank[t][k]));
  }
  return out;
}

FitDiagnostics parse_diagnostics_csv(const std::string& text) {
  FitDiagnostics d;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto grow = [](auto& table, std::size_t t) {
    if (table.size() < t) table.resize(t);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 4) throw ParseError("diagnostics row needs 4 fields", line_no);
    const double alt = parse_double(fields[0], line_no);
    const double idx = parse_double(fields[2], line_no);
    if (alt < 1 || idx < 0) throw ParseError("bad alternation or index", line_no);
    const auto t = static_cast<std::size_t>(alt);
    const auto i = static_cast<std::size_t>(idx);
    const double value = parse_double(fields[3], line_no);
    const std::string& series = fields[1];
    auto put = [&](auto& table, auto v) {
      grow(table, t);
      auto& r = table[t - 1];
      if (r.size() <= i) r.resize(i + 1);
      r[i] = v;
    };
    if (series == "objective") {
      grow(d.objective, t);
      d.objective[t - 1] = value;
    } else if (series == "stationarity") {
      grow(d.stationarity, t);
      d.stationarity[t - 1] = value;
    } else if (series == "l0") {
      put(d.l0, static_cast<int>(value));
    } else if (series == "l1") {
      put(d.l1, value);
    } else if (series == "rank") {
      put(d.rank, static_cast<int>(value));
    } else {
      throw ParseError("unknown diagnostics series '" + series + "'", line_no);
    }
  }
  const std::size_t T = d.objective.size();
  d.l0.resize(T);
  d.l1.resize(T);
  d.rank.resize(T);
  d.stationarity.resize(T);
  return d;
}

void save_model(const CscModel& model, const FitDiagnostics& diagnostics, const fs::path& dir) {
  const Dictionary& dict = model.dictionary;
  if (dict.K() == 0) throw ConfigError("save_model: empty dictionary");
  fs::create_directories(dir);
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "csc";
  j["config"] = config_to_json(model.config);
  j["tau"] = dict.tau;
  j["shapes"] = {{"K", dict.K()}, {"G", model.coefficients.size()}, {"p", dict.p()}, {"q", dict.q()}};
  json files = json::array();
  for (std::size_t k = 0; k < dict.K(); ++k) {
    const std::string name = "dictionary/" + numbered("D_", k);
    write_matrix(dict.entries[k], dir / name);
    files.push_back(name);
  }
  j["dictionary"] = files;
  write_matrix(model.coefficients.as_matrix(), dir / "coefficients.csv");
  j["coefficients"] = "coefficients.csv";
  write_text(format_diagnostics_csv(diagnostics), dir / "diagnostics.csv");
  j["diagnostics"] = {{"file", "diagnostics.csv"},
                      {"alternations", diagnostics.alternations()},
                      {"converged", diagnostics.converged},
                      {"sparsity_warning", diagnostics.sparsity_warning}};
  write_json(j, dir / "model.json");
}

LoadedModel load_model(const fs::path& dir) {
  const fs::path path = dir / "model.json";
  const json j = read_json(path);
  require_version(j, path);
  if (j.value("kind", "") != "csc") throw ValidationError(path.string() + ": not a csc model archive");
  LoadedModel out;
  try {
    out.model.config = config_from_json(j.at("config"));
    out.model.dictionary.tau = j.at("tau").get<double>();
    const json& shapes = j.at("shapes");
    const auto K = shapes.at("K").get<std::size_t>();
    const auto G = shapes.at("G").get<std::size_t>();
    const auto p = shapes.at("p").get<Eigen::Index>();
    const auto q = shapes.at("q").get<Eigen::Index>();
    const auto files = j.at("dictionary").get<std::vector<std::string>>();
    if (files.size() != K) throw ValidationError(path.string() + ": dictionary lists " + std::to_string(files.size()) +
                                                 " files for K = " + std::to_string(K));
    for (std::size_t k = 0; k < K; ++k) {
      out.model.dictionary.entries.push_back(read_matrix(dir / files[k]));
      check_shape(out.model.dictionary.entries.back(), q, p, "dictionary entry " + std::to_string(k));
    }
    const Matrix coef = read_matrix(dir / j.at("coefficients").get<std::string>());
    check_shape(coef, static_cast<Eigen::Index>(G), static_cast<Eigen::Index>(K), "coefficients");
    out.model.coefficients = GroupCoefficients::from_matrix(coef);
    const json& diag = j.at("diagnostics");
    out.diagnostics = parse_diagnostics_csv(read_text(dir / diag.at("file").get<std::string>()));
    out.diagnostics.converged = diag.at("converged").get<bool>();
    out.diagnostics.sparsity_warning = diag.at("sparsity_warning").get<bool>();
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": malformed model archive: " + e.what());
  }
  return out;
}

void save_rrr_model(const std::vector<Matrix>& estimates, const std::vector<double>& radii, const json& config,
                    const fs::path& dir) {
  if (estimates.empty()) throw ConfigError("save_rrr_model: no estimates");
  fs::create_directories(dir);
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "rrr";
  j["config"] = config;
  j["shapes"] = {{"G", estimates.size()}, {"p", estimates.front().cols()}, {"q", estimates.front().rows()}};
  j["radii"] = radii;
  json files = json::array();
  for (std::size_t g = 0; g < estimates.size(); ++g) {
    const std::string name = "estimates/" + numbered("B_", g);
    write_matrix(estimates[g], dir / name);
    files.push_back(name);
  }
  j["estimates"] = files;
  write_json(j, dir / "model.json");
}

std::string archive_kind(const fs::path& dir) {
  const fs::path path = dir / "model.json";
  const json j = read_json(path);
  require_version(j, path);
  return j.value("kind", "");
}

std::vector<Matrix> load_estimates(const fs::path& dir) {
  const std::string kind = archive_kind(dir);
  if (kind == "csc") return load_model(dir).model.regression_matrices();
  if (kind != "rrr") throw ValidationError((dir / "model.json").string() + ": unknown archive kind '" + kind + "'");
  const json j = read_json(dir / "model.json");
  std::vector<Matrix> out;
  try {
    const json& shapes = j.at("shapes");
    const auto p = shapes.at("p").get<Eigen::Index>();
    const auto q = shapes.at("q").get<Eigen::Index>();
    for (const auto& f : j.at("estimates").get<std::vector<std::string>>()) {
      out.push_back(read_matrix(dir / f));
      check_shape(out.back(), q, p, f);
    }
  } catch (const json::exception& e) {
    throw ValidationError("malformed rrr archive: " + std::string(e.what()));
  }
  return out;
}

void write_run_record(const RunRecord& r, const fs::path& dir) {
  json j{{"command_line", r.command_line}, {"config", r.config},   {"seed", r.seed},
         {"wall_seconds", r.wall_seconds}, {"outputs", r.outputs}, {"library_version", r.library_version}};
  write_json(j, dir / "run.json");
}

}  // namespace csc
