#pragma once

#include <string>
#include <vector>

namespace voi {

// One row of the emitted VOI table (also the unit plots are built from, so
// regenerating a plot from the table file is byte-identical).
struct VoiTableRow {
  std::string partition;
  std::string target;
  double rvsi = 0.0;
  double rvsi_se = 0.0;
  double pvsi = 0.0;
  double pvsi_se = 0.0;
  bool evoir_defined = false;
  double evoir = 0.0;
  double surprise = 0.0;
  int taxonomy_case = 0;
  std::string taxonomy;
  std::string selected_regressor;
  double heldout_loss = 0.0;
};

struct PlotOptions {
  bool log_x = false;
  bool log_y = false;
};

// Scatter of EVOIR against PVSI with RVSI contours (hyperbolas
// EVOIR = c / PVSI); rows with undefined EVOIR go to a flagged side panel.
// Deterministic bytes; an empty row set yields a valid empty plot.
std::string render_evoir_scatter(const std::vector<VoiTableRow>& rows, const std::string& target,
                                 const PlotOptions& options = {});

struct PrevalencePoint {
  std::string partition;
  int site = 0;
  int year = 0;
  double prevalence = 0.0;
};

// Small multiples, one panel per fit (full then each leave-one-out), one
// polyline per site.
std::string render_prevalence_curves(const std::vector<PrevalencePoint>& points);

}  // namespace voi
