// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MCOMP_IO_HPP_
#define MCOMP_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mcomp/basis.hpp"
#include "mcomp/estimation.hpp"
#include "mcomp/scores.hpp"

namespace mcomp {

// Which CSV columns hold what.  When `date` is set, replicates are calendar
// days: the key is the text of that column before its first space, and `id`
// is ignored.
struct ColumnMapping {
  std::string id = "replicate_id";
  std::string t = "t";
  std::string x = "x";
  std::string y = "y";
  std::string date;
};

struct BasisSpec {
  enum class Kind { BSpline, Kernel };
  Kind kind = Kind::BSpline;
  int interior_knots = 8;
  int degree = 3;
  int kernel_grid = 100;
};

// Everything a run can be configured with.  Read from a flat JSON object
// whose keys mirror the fields; unknown keys are rejected.
struct RunConfig {
  ObservationDomain domain = ObservationDomain::interval(0.0, 1.0);
  BasisSpec basis;
  int quadrature_resolution = 0;  // 0 picks the default
  FitConfig fit;
  ColumnMapping columns;
  double multiplier = 2.0;
};

RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& json_text);
BasisSystem make_basis(const RunConfig& config);

struct EventLoad {
  Dataset dataset;
  int rows = 0;              // data rows read
  int dropped_outside = 0;   // points outside the domain
  int dropped_missing = 0;   // date-grouped rows without coordinates
};

// CSV with a header row, or (for a .json path) an array of
// {"id": ..., "points": [...]} objects with scalar points in 1D and [x, y]
// pairs in 2D.  In CSV, a row whose coordinate fields are all empty declares
// a replicate with no events.  Replicates keep the order of first
// appearance.  Throws IoError naming the line of a malformed row, and when
// no replicate remains.
EventLoad load_events(const std::filesystem::path& path,
                      const ObservationDomain& domain,
                      const ColumnMapping& columns = {});
EventLoad parse_events_csv(const std::string& text,
                           const ObservationDomain& domain,
                           const ColumnMapping& columns = {});

// Splits CSV text into records of fields (RFC 4180 quoting).  The line on
// which each record starts is stored in `lines`.
std::vector<std::vector<std::string>> parse_csv(const std::string& text,
                                                std::vector<int>* lines = nullptr);

void write_events(const Dataset& data, const std::filesystem::path& path);

struct FitMetadata {
  double nu1 = 0;
  double nu2 = 0;
  int p = 0;
  int S = 0;
  std::uint64_t seed = 0;
  double objective = 0;
  bool converged = false;
};

FitMetadata metadata_of(const FitResult& fit);

struct ModelFile {
  ModelParams theta;
  FitMetadata meta;
};

constexpr int kModelFormatVersion = 1;

// JSON text; doubles are written in shortest round-trip form, so loading
// reproduces c0, C and sigma bit for bit.  Loading rebuilds the basis,
// recomputes J and Omega and checks C^T J C = I to 1e-8.
void save_model(const ModelParams& theta, const FitMetadata& meta,
                const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);
std::string model_to_json(const ModelParams& theta, const FitMetadata& meta);
ModelFile model_from_json(const std::string& text);

// Trace, per-replicate log-likelihoods, convergence and the configuration.
void write_fit_report(const FitResult& fit, const EventLoad& load,
                      const std::filesystem::path& path);

// Grid CSV with a header containing p and either nu1, nu2 or log10_nu1,
// log10_nu2.
std::vector<GridPoint> load_grid(const std::filesystem::path& path);

void write_cv_table(const CVTable& table, const std::filesystem::path& path);
void write_score_table(const ScoreTable& table, const std::filesystem::path& path);
void write_curves(const ComponentCurves& curves, int dim,
                  const std::filesystem::path& path);

// 17 significant digits.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace mcomp

#endif  // MCOMP_IO_HPP_
