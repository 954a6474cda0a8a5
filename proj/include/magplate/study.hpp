#pragma once

#include <functional>
#include <string>
#include <vector>

#include "magplate/config.hpp"

namespace magplate {

struct StudyRow {
  double h = 0;
  EnergyReport Eh;
  RecoveryDiagnostics diag;
};

struct ComponentSummary {
  std::string name;
  std::vector<double> gaps, rel_gaps;
  std::vector<double> rates;  // log-ratio against the previous row; NaN for the first
  double fitted_rate = 0;     // least-squares slope of log gap vs log h; NaN if < 2 usable rows
  bool monotone = true;       // gaps strictly decrease (or sit below the floor) over all rows
  bool pass = true;           // not non-decreasing over the last three rows
};

struct ConvergenceTable {
  EnergyReport E;
  std::vector<StudyRow> rows;
  std::vector<ComponentSummary> components;
  nlohmann::json meta;
  bool ok() const;
};

// Gaps below this are treated as converged.
inline constexpr double kGapFloor = 1e-12;

double component(const EnergyReport& r, const std::string& name);
std::vector<std::string> component_names(const ComponentsConfig& c);
// Fills rates, monotonicity and pass flags from the rows.
void summarize(ConvergenceTable& t, const std::vector<std::string>& names);

ConvergenceTable run_gamma_study(const StudyConfig& cfg,
                                 const std::function<void(const StudyRow&)>& progress = nullptr);

// CSV, schema sidecar, JSON summary and gnuplot files under dir; returns the paths.
std::vector<std::string> emit_reports(const ConvergenceTable& t, const std::string& dir, const std::string& prefix = "gamma");

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
CsvTable read_csv_table(const std::string& path);

}  // namespace magplate
