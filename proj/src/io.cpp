// Apache License, Version 2.0, refer to LICENSE.txt

#include "mcomp/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <type_traits>

#include <json.hpp>

#include "mcomp/errors.hpp"

namespace mcomp {

using json = nlohmann::json;

namespace {

constexpr const char* kModelFormat = "mcomp-model";

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool parse_number(const std::string& field, double& out) {
  const std::string s = trim(field);
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::string line_prefix(int line) { return "line " + std::to_string(line) + ": "; }

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

double number_or_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Collects patterns by key in order of first appearance.
class PatternCollector {
 public:
  explicit PatternCollector(const ObservationDomain& domain)
      : load_{Dataset{domain, {}}, 0, 0, 0} {}

  PointPattern& get(const std::string& key) {
    const auto [it, inserted] = index_.emplace(key, load_.dataset.patterns.size());
    if (inserted) load_.dataset.patterns.push_back(PointPattern{key, {}});
    return load_.dataset.patterns[it->second];
  }

  void add(const std::string& key, const Point& p) {
    PointPattern& pattern = get(key);
    if (load_.dataset.domain.contains(p)) {
      pattern.points.push_back(p);
    } else {
      ++load_.dropped_outside;
    }
  }

  EventLoad& load() { return load_; }

  EventLoad finish() {
    if (load_.dataset.patterns.empty()) throw IoError("event file contains no replicates");
    return std::move(load_);
  }

 private:
  EventLoad load_;
  std::map<std::string, std::size_t> index_;
};

json domain_to_json(const ObservationDomain& d) {
  if (d.kind() == ObservationDomain::Kind::Interval) {
    return {{"type", "interval"}, {"a", d.a()}, {"b", d.b()}};
  }
  json out = {{"type", "planar"},
              {"rect", {d.rect().xmin, d.rect().xmax, d.rect().ymin, d.rect().ymax}}};
  if (d.polygon()) {
    json poly = json::array();
    for (const auto& v : *d.polygon()) poly.push_back({v[0], v[1]});
    out["polygon"] = poly;
  }
  return out;
}

std::vector<Point> points_from_json(const json& arr) {
  std::vector<Point> out;
  for (const auto& v : arr) {
    if (!v.is_array() || v.size() != 2) throw IoError("expected [x, y] pairs");
    out.emplace_back(v[0].get<double>(), v[1].get<double>());
  }
  return out;
}

ObservationDomain domain_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "interval") {
    return ObservationDomain::interval(j.at("a").get<double>(), j.at("b").get<double>());
  }
  if (type == "planar") {
    const auto& r = j.at("rect");
    if (!r.is_array() || r.size() != 4) throw IoError("rect must have four entries");
    const Rect rect{r[0].get<double>(), r[1].get<double>(), r[2].get<double>(),
                    r[3].get<double>()};
    if (j.contains("polygon")) {
      return ObservationDomain::planar(rect, points_from_json(j.at("polygon")));
    }
    return ObservationDomain::planar(rect);
  }
  throw IoError("unknown domain type '" + type + "'");
}

json basis_to_json(const BasisSystem& b) {
  if (b.kind() == BasisSystem::Kind::BSpline) {
    return {{"type", "bspline"}, {"degree", b.degree()}, {"knots", b.knots()}};
  }
  json centers = json::array();
  for (const auto& c : b.centers()) centers.push_back({c[0], c[1]});
  return {{"type", "kernel"}, {"centers", centers}, {"bandwidths", b.bandwidths()}};
}

BasisSystem basis_from_json(const json& j, const ObservationDomain& domain) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "bspline") {
    return BasisSystem::bspline_from_knots(domain, j.at("degree").get<int>(),
                                           j.at("knots").get<std::vector<double>>());
  }
  if (type == "kernel") {
    return BasisSystem::gaussian_kernel(domain, points_from_json(j.at("centers")),
                                        j.at("bandwidths").get<std::vector<double>>());
  }
  throw IoError("unknown basis type '" + type + "'");
}

// The settings that determine the fitted values; the thread count does not,
// so it is left out and reports compare equal across thread counts.
json fit_config_to_json(const FitConfig& c) {
  return {{"p", c.p},
          {"nu1", c.nu1},
          {"nu2", c.nu2},
          {"S", c.S},
          {"seed", c.seed},
          {"max_outer_iters", c.max_outer_iters},
          {"max_inner_iters", c.max_inner_iters},
          {"gradient_tolerance", c.gradient_tolerance},
          {"function_tolerance", c.function_tolerance},
          {"multistart", c.multistart},
          {"init", to_string(c.init)},
          {"redraw", c.redraw},
          {"eval_draws", c.eval_draws}};
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

// ---------------------------------------------------------------- config

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw IoError("config must be a JSON object");

  static const std::set<std::string> known = {
      "domain", "a", "b", "xmin", "xmax", "ymin", "ymax", "polygon",
      "basis", "interior_knots", "degree", "kernel_grid", "quadrature_resolution",
      "p", "nu1", "nu2", "log10_nu1", "log10_nu2", "S", "seed",
      "max_outer_iters", "max_inner_iters", "gradient_tolerance",
      "function_tolerance", "multistart", "init", "redraw", "eval_draws", "threads",
      "id_column", "t_column", "x_column", "y_column", "date_column", "multiplier"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw IoError("unknown config key '" + key + "'");
  }

  RunConfig cfg;
  std::string current;
  try {
    auto get = [&](const char* key, auto& target) {
      current = key;
      if (j.contains(key)) target = j.at(key).get<std::decay_t<decltype(target)>>();
    };
    std::string domain = "interval";
    get("domain", domain);
    if (domain == "interval") {
      double a = 0.0, b = 1.0;
      get("a", a);
      get("b", b);
      cfg.domain = ObservationDomain::interval(a, b);
    } else if (domain == "planar") {
      for (const char* k : {"xmin", "xmax", "ymin", "ymax"}) {
        if (!j.contains(k)) throw IoError(std::string("planar domain needs '") + k + "'");
      }
      Rect rect;
      get("xmin", rect.xmin);
      get("xmax", rect.xmax);
      get("ymin", rect.ymin);
      get("ymax", rect.ymax);
      current = "polygon";
      if (j.contains("polygon")) {
        cfg.domain = ObservationDomain::planar(rect, points_from_json(j.at("polygon")));
      } else {
        cfg.domain = ObservationDomain::planar(rect);
      }
    } else {
      throw IoError("domain must be 'interval' or 'planar'");
    }

    std::string basis = cfg.domain.dim() == 1 ? "bspline" : "kernel";
    get("basis", basis);
    if (basis == "bspline") {
      cfg.basis.kind = BasisSpec::Kind::BSpline;
    } else if (basis == "kernel") {
      cfg.basis.kind = BasisSpec::Kind::Kernel;
    } else {
      throw IoError("basis must be 'bspline' or 'kernel'");
    }
    get("interior_knots", cfg.basis.interior_knots);
    get("degree", cfg.basis.degree);
    get("kernel_grid", cfg.basis.kernel_grid);
    get("quadrature_resolution", cfg.quadrature_resolution);

    FitConfig& f = cfg.fit;
    get("p", f.p);
    get("nu1", f.nu1);
    get("nu2", f.nu2);
    if (j.contains("log10_nu1")) {
      current = "log10_nu1";
      f.nu1 = std::pow(10.0, j.at("log10_nu1").get<double>());
    }
    if (j.contains("log10_nu2")) {
      current = "log10_nu2";
      f.nu2 = std::pow(10.0, j.at("log10_nu2").get<double>());
    }
    get("S", f.S);
    get("seed", f.seed);
    get("max_outer_iters", f.max_outer_iters);
    get("max_inner_iters", f.max_inner_iters);
    get("gradient_tolerance", f.gradient_tolerance);
    get("function_tolerance", f.function_tolerance);
    get("multistart", f.multistart);
    std::string init = to_string(f.init);
    get("init", init);
    f.init = parse_init_mode(init);
    get("redraw", f.redraw);
    get("eval_draws", f.eval_draws);
    get("threads", f.threads);

    get("id_column", cfg.columns.id);
    get("t_column", cfg.columns.t);
    get("x_column", cfg.columns.x);
    get("y_column", cfg.columns.y);
    get("date_column", cfg.columns.date);
    get("multiplier", cfg.multiplier);
  } catch (const json::exception& e) {
    throw IoError("config key '" + current + "': " + e.what());
  }
  try {
    cfg.fit.validate();
  } catch (const UsageError& e) {
    throw IoError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path));
}

BasisSystem make_basis(const RunConfig& config) {
  if (config.basis.kind == BasisSpec::Kind::BSpline) {
    return make_bspline_basis(config.domain, config.basis.interior_knots,
                              config.basis.degree);
  }
  return make_kernel_basis(config.domain, config.basis.kernel_grid);
}

// ---------------------------------------------------------------- events

std::vector<std::vector<std::string>> parse_csv(const std::string& text,
                                                std::vector<int>* lines) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  int line = 1;
  int record_line = 1;
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    const bool blank = record.size() == 1 && record[0].empty() && !field_started;
    if (!blank) {
      records.push_back(std::move(record));
      if (lines) lines->push_back(record_line);
    }
    record.clear();
    field_started = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (quoted) throw IoError(line_prefix(record_line) + "unterminated quoted field");
  if (field_started || !record.empty()) end_record();
  return records;
}

EventLoad parse_events_csv(const std::string& text, const ObservationDomain& domain,
                           const ColumnMapping& columns) {
  std::vector<int> lines;
  const auto records = parse_csv(text, &lines);
  if (records.empty()) throw IoError("event file is empty");
  const auto& header = records.front();
  auto column = [&](const std::string& name) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (trim(header[c]) == name) return static_cast<int>(c);
    }
    throw IoError(line_prefix(lines.front()) + "missing column '" + name + "'");
  };
  const bool by_date = !columns.date.empty();
  const int key_col = by_date ? column(columns.date) : column(columns.id);
  std::vector<int> coord_cols;
  if (domain.dim() == 1) {
    coord_cols = {column(columns.t)};
  } else {
    coord_cols = {column(columns.x), column(columns.y)};
  }

  PatternCollector collect(domain);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const int line = lines[r];
    if (rec.size() != header.size()) {
      throw IoError(line_prefix(line) + "expected " + std::to_string(header.size()) +
                    " fields, found " + std::to_string(rec.size()));
    }
    ++collect.load().rows;
    std::string key = trim(rec[key_col]);
    if (by_date) key = key.substr(0, key.find(' '));
    if (key.empty()) {
      throw IoError(line_prefix(line) + (by_date ? "empty date" : "empty replicate id"));
    }
    int empty = 0;
    for (int c : coord_cols) empty += trim(rec[c]).empty() ? 1 : 0;
    if (empty == static_cast<int>(coord_cols.size())) {
      collect.get(key);
      if (by_date) ++collect.load().dropped_missing;
      continue;
    }
    double v[2] = {0.0, 0.0};
    for (std::size_t k = 0; k < coord_cols.size(); ++k) {
      if (!parse_number(rec[coord_cols[k]], v[k])) {
        throw IoError(line_prefix(line) + "bad coordinate '" + rec[coord_cols[k]] + "'");
      }
    }
    collect.add(key, domain.dim() == 1 ? Point(v[0]) : Point(v[0], v[1]));
  }
  return collect.finish();
}

EventLoad load_events(const std::filesystem::path& path, const ObservationDomain& domain,
                      const ColumnMapping& columns) {
  const std::string text = read_file(path);
  if (path.extension() != ".json") {
    try {
      return parse_events_csv(text, domain, columns);
    } catch (const IoError& e) {
      throw IoError(path.string() + ": " + e.what());
    }
  }
  PatternCollector collect(domain);
  try {
    const json j = json::parse(text);
    if (!j.is_array()) throw IoError("expected an array of replicates");
    for (const auto& rep : j) {
      const std::string id = rep.at("id").is_string() ? rep.at("id").get<std::string>()
                                                      : rep.at("id").dump();
      collect.get(id);
      for (const auto& pt : rep.at("points")) {
        ++collect.load().rows;
        if (domain.dim() == 1) {
          collect.add(id, Point(pt.get<double>()));
        } else {
          if (!pt.is_array() || pt.size() != 2) throw IoError("expected [x, y] points");
          collect.add(id, Point(pt[0].get<double>(), pt[1].get<double>()));
        }
      }
    }
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return collect.finish();
}

void write_events(const Dataset& data, const std::filesystem::path& path) {
  std::string out = data.domain.dim() == 1 ? "replicate_id,t\n" : "replicate_id,x,y\n";
  for (const auto& pattern : data.patterns) {
    const std::string id = csv_quote(pattern.replicate_id);
    if (pattern.points.empty()) {
      out += id + (data.domain.dim() == 1 ? ",\n" : ",,\n");
      continue;
    }
    for (const auto& p : pattern.points) {
      out += id + ',' + format_double(p[0]);
      if (data.domain.dim() == 2) out += ',' + format_double(p[1]);
      out += '\n';
    }
  }
  write_file(path, out);
}

// ---------------------------------------------------------------- models

FitMetadata metadata_of(const FitResult& fit) {
  return FitMetadata{fit.config.nu1, fit.config.nu2, fit.config.p, fit.config.S,
                     fit.config.seed, fit.objective, fit.converged};
}

std::string model_to_json(const ModelParams& theta, const FitMetadata& meta) {
  theta.validate();
  json C = json::array();
  for (int k = 0; k < theta.p(); ++k) {
    C.push_back(std::vector<double>(theta.C.col(k).data(),
                                    theta.C.col(k).data() + theta.q()));
  }
  const json j = {
      {"format", kModelFormat},
      {"version", kModelFormatVersion},
      {"domain", domain_to_json(theta.space->domain())},
      {"basis", basis_to_json(theta.space->basis)},
      {"quadrature_resolution", theta.space->resolution},
      {"c0", std::vector<double>(theta.c0.data(), theta.c0.data() + theta.q())},
      {"C", C},
      {"sigma", std::vector<double>(theta.sigma.data(), theta.sigma.data() + theta.p())},
      {"fit",
       {{"nu1", meta.nu1},
        {"nu2", meta.nu2},
        {"p", meta.p},
        {"S", meta.S},
        {"seed", meta.seed},
        {"objective", finite_or_null(meta.objective)},
        {"converged", meta.converged}}}};
  return j.dump(1) + "\n";
}

ModelFile model_from_json(const std::string& text) {
  ModelFile out;
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != kModelFormat) throw IoError("not a model file");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw IoError("model format version " + std::to_string(version) +
                    " is not supported (expected " +
                    std::to_string(kModelFormatVersion) + ")");
    }
    const ObservationDomain domain = domain_from_json(j.at("domain"));
    BasisSystem basis = basis_from_json(j.at("basis"), domain);
    const auto space =
        ModelSpace::create(std::move(basis), j.at("quadrature_resolution").get<int>());

    ModelParams& theta = out.theta;
    theta.space = space;
    const auto c0 = j.at("c0").get<std::vector<double>>();
    theta.c0 = Eigen::Map<const Eigen::VectorXd>(c0.data(), static_cast<Eigen::Index>(c0.size()));
    const auto& C = j.at("C");
    theta.C.resize(theta.c0.size(), static_cast<Eigen::Index>(C.size()));
    for (std::size_t k = 0; k < C.size(); ++k) {
      const auto col = C[k].get<std::vector<double>>();
      if (col.size() != c0.size()) throw IoError("component length does not match c0");
      theta.C.col(static_cast<Eigen::Index>(k)) =
          Eigen::Map<const Eigen::VectorXd>(col.data(), static_cast<Eigen::Index>(col.size()));
    }
    const auto sigma = j.at("sigma").get<std::vector<double>>();
    theta.sigma = Eigen::Map<const Eigen::VectorXd>(sigma.data(),
                                                    static_cast<Eigen::Index>(sigma.size()));

    const json& f = j.at("fit");
    out.meta.nu1 = f.at("nu1").get<double>();
    out.meta.nu2 = f.at("nu2").get<double>();
    out.meta.p = f.at("p").get<int>();
    out.meta.S = f.at("S").get<int>();
    out.meta.seed = f.at("seed").get<std::uint64_t>();
    out.meta.objective = number_or_nan(f.at("objective"));
    out.meta.converged = f.at("converged").get<bool>();
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed model file: ") + e.what());
  } catch (const UsageError& e) {
    throw IoError(std::string("invalid model file: ") + e.what());
  } catch (const DomainError& e) {
    throw IoError(std::string("invalid model file: ") + e.what());
  }
  try {
    out.theta.validate();
  } catch (const UsageError& e) {
    throw IoError(std::string("invalid model file: ") + e.what());
  }
  const double err = out.theta.orthonormality_error();
  if (!(err <= 1e-8)) {
    throw IoError("invalid model file: components are not orthonormal (max |C^T J C - I| = " +
                  format_double(err) + ")");
  }
  return out;
}

void save_model(const ModelParams& theta, const FitMetadata& meta,
                const std::filesystem::path& path) {
  write_file(path, model_to_json(theta, meta));
}

ModelFile load_model(const std::filesystem::path& path) {
  try {
    return model_from_json(read_file(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_fit_report(const FitResult& fit, const EventLoad& load,
                      const std::filesystem::path& path) {
  json reps = json::array();
  for (std::size_t i = 0; i < load.dataset.patterns.size(); ++i) {
    const auto& x = load.dataset.patterns[i];
    json r = {{"id", x.replicate_id}, {"m", x.m()}};
    if (i < fit.loglik.size()) r["loglik"] = finite_or_null(fit.loglik[i]);
    reps.push_back(r);
  }
  json trace = json::array();
  for (double v : fit.trace) trace.push_back(finite_or_null(v));
  const json j = {{"converged", fit.converged},
                  {"objective", finite_or_null(fit.objective)},
                  {"best_start", fit.best_start},
                  {"trace", trace},
                  {"stage_starts", fit.stage_starts},
                  {"rows", load.rows},
                  {"dropped_outside", load.dropped_outside},
                  {"dropped_missing", load.dropped_missing},
                  {"config", fit_config_to_json(fit.config)},
                  {"replicates", reps}};
  write_file(path, j.dump(1) + "\n");
}

// ---------------------------------------------------------------- tables

std::vector<GridPoint> load_grid(const std::filesystem::path& path) {
  std::vector<int> lines;
  const auto records = parse_csv(read_file(path), &lines);
  if (records.size() < 2) throw IoError(path.string() + ": grid has no rows");
  const auto& header = records.front();
  auto find = [&](const std::string& name) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (trim(header[c]) == name) return static_cast<int>(c);
    }
    return -1;
  };
  const int p_col = find("p");
  int nu1_col = find("nu1"), nu2_col = find("nu2");
  const bool logs = nu1_col < 0 && nu2_col < 0;
  if (logs) {
    nu1_col = find("log10_nu1");
    nu2_col = find("log10_nu2");
  }
  if (p_col < 0 || nu1_col < 0 || nu2_col < 0) {
    throw IoError(path.string() +
                  ": grid needs columns p and nu1, nu2 (or log10_nu1, log10_nu2)");
  }
  std::vector<GridPoint> grid;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != header.size()) {
      throw IoError(path.string() + ": " + line_prefix(lines[r]) + "wrong number of fields");
    }
    double nu1 = 0, nu2 = 0, p = 0;
    if (!parse_number(rec[nu1_col], nu1) || !parse_number(rec[nu2_col], nu2) ||
        !parse_number(rec[p_col], p) || p < 0 || p != std::floor(p)) {
      throw IoError(path.string() + ": " + line_prefix(lines[r]) + "bad grid row");
    }
    if (logs) {
      nu1 = std::pow(10.0, nu1);
      nu2 = std::pow(10.0, nu2);
    }
    grid.push_back(GridPoint{nu1, nu2, static_cast<int>(p)});
  }
  return grid;
}

void write_cv_table(const CVTable& table, const std::filesystem::path& path) {
  std::string out = "nu1,nu2,log10_nu1,log10_nu2,p,cv,valid,is_argmax\n";
  for (std::size_t g = 0; g < table.entries.size(); ++g) {
    const auto& e = table.entries[g];
    out += format_double(e.point.nu1) + ',' + format_double(e.point.nu2) + ',' +
           format_double(std::log10(e.point.nu1)) + ',' +
           format_double(std::log10(e.point.nu2)) + ',' + std::to_string(e.point.p) +
           ',' + format_double(e.cv) + ',' + (e.valid ? "1" : "0") + ',' +
           (static_cast<int>(g) == table.argmax ? "1" : "0") + '\n';
  }
  write_file(path, out);
}

void write_score_table(const ScoreTable& table, const std::filesystem::path& path) {
  std::string out = "replicate_id,m";
  for (Eigen::Index k = 0; k < table.scores.cols(); ++k) out += ",u" + std::to_string(k + 1);
  out += '\n';
  for (std::size_t i = 0; i < table.ids.size(); ++i) {
    out += csv_quote(table.ids[i]) + ',' + std::to_string(table.counts[i]);
    for (Eigen::Index k = 0; k < table.scores.cols(); ++k) {
      out += ',' + format_double(table.scores(static_cast<Eigen::Index>(i), k));
    }
    out += '\n';
  }
  write_file(path, out);
}

void write_curves(const ComponentCurves& curves, int dim,
                  const std::filesystem::path& path) {
  const Eigen::Index p = curves.phi.cols();
  std::string out = dim == 1 ? "t" : "x,y";
  out += ",mu,lambda0";
  for (Eigen::Index k = 1; k <= p; ++k) {
    const std::string s = std::to_string(k);
    out += ",phi_" + s + ",xi_" + s + ",lambda_plus_" + s + ",lambda_minus_" + s;
  }
  out += '\n';
  for (std::size_t i = 0; i < curves.grid.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out += format_double(curves.grid[i][0]);
    if (dim == 2) out += ',' + format_double(curves.grid[i][1]);
    out += ',' + format_double(curves.mu(r)) + ',' + format_double(curves.lambda0(r));
    for (Eigen::Index k = 0; k < p; ++k) {
      out += ',' + format_double(curves.phi(r, k)) + ',' + format_double(curves.xi(r, k)) +
             ',' + format_double(curves.lambda_plus(r, k)) + ',' +
             format_double(curves.lambda_minus(r, k));
    }
    out += '\n';
  }
  write_file(path, out);
}

}  // namespace mcomp
